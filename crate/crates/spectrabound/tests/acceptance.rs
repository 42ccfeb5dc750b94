//! End-to-end acceptance suite: one test per shipped guarantee, each
//! printing a single summary line on success. Reference values come from
//! closed forms or from an independent high-precision quadrature oracle.

use std::f64::consts::{FRAC_PI_2, LN_2, PI, TAU};
use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use spectrabound::harness::derive_seed;
use spectrabound::{
    bounds, harness, neumann, operator, similarity, CMatrix, ConvexDomain, RationalFunction,
};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn unit_disk() -> ConvexDomain {
    ConvexDomain::disk(c(0.0, 0.0), 1.0).unwrap()
}

fn ellipse21() -> ConvexDomain {
    ConvexDomain::ellipse(c(0.0, 0.0), 2.0, 1.0, 0.0).unwrap()
}

fn square() -> ConvexDomain {
    ConvexDomain::polygon(vec![c(1.0, -1.0), c(1.0, 1.0), c(-1.0, 1.0), c(-1.0, -1.0)]).unwrap()
}

#[test]
fn criterion_01_ellipse_tv_value() {
    let start = Instant::now();
    let phi = ellipse21().tv_log(c(0.0, 0.0)).unwrap();
    let elapsed = start.elapsed();
    let target = 4.0 * LN_2;
    assert!(
        (phi - target).abs() < 1e-6,
        "tv_log(ellipse 2,1) = {phi}, want {target}"
    );
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!("criterion 01 PASS: tv_log = {phi:.12} = 4·log 2 ± 1e-6 in {elapsed:?}");
}

#[test]
fn criterion_02_disk_tv_degenerates() {
    let center = c(0.7, -0.2);
    let disk = ConvexDomain::disk(center, 1.3).unwrap();
    let (omega, phi) = disk.optimal_tv_center().unwrap();
    let diameter = 2.6;
    assert!(phi.abs() < 1e-8, "phi(disk) = {phi}");
    assert!(
        (omega - center).norm() <= 1e-6 * diameter,
        "recovered center {omega} vs {center}"
    );
    println!(
        "criterion 02 PASS: phi = {phi:.2e}, center error {:.2e}",
        (omega - center).norm()
    );
}

#[test]
fn criterion_03_ellipse_curvature_radius() {
    let ellipse = ConvexDomain::ellipse(c(1.0, 1.0), 2.0, 1.0, 0.3).unwrap();
    let radius = ellipse.metrics().unwrap().max_curvature_radius;
    assert!(
        (radius - 4.0).abs() < 1e-8,
        "curvature radius {radius}, want a²/b = 4"
    );
    println!("criterion 03 PASS: max curvature radius = {radius:.12}");
}

#[test]
fn criterion_04_half_plane_limits_are_exact() {
    let calculus = bounds::bound_sector_calculus(FRAC_PI_2).unwrap();
    assert_eq!(calculus.value, 1.0);
    let (_, c_cb) = bounds::bound_neumann_angle(FRAC_PI_2).unwrap();
    assert_eq!(c_cb.value, 1.0);
    println!("criterion 04 PASS: both half-plane bounds equal 1 exactly");
}

#[test]
fn criterion_05_narrow_sector_checkpoints() {
    let narrow = bounds::bound_sector_calculus(PI / 20.0).unwrap();
    assert!(
        (narrow.value - 5.918074571035794).abs() < 1e-8,
        "got {}",
        narrow.value
    );
    assert!(narrow.value <= 6.0);
    let tiny = bounds::bound_sector_calculus(1e-8).unwrap();
    assert!(
        (tiny.value - 39.06141223290135).abs() < 1e-8,
        "got {}",
        tiny.value
    );
    assert!(tiny.value <= 40.0);
    println!(
        "criterion 05 PASS: calculus(π/20) = {:.12} ≤ 6, calculus(1e-8) = {:.11} ≤ 40",
        narrow.value, tiny.value
    );
}

#[test]
fn criterion_06_q_kernel_matches_sharp_sector_values() {
    // frozen high-precision values of 2 − (2/π)·log tan(απ/(4(π−α)))
    let cases = [
        (PI / 6.0, 3.173118375226328),
        (PI / 4.0, 2.838401436557965),
        (PI / 3.0, 2.56109985233918),
    ];
    for (alpha, reference) in cases {
        let (c_n, _) = bounds::bound_neumann_sector_sharp(alpha).unwrap();
        assert!(
            (c_n.value - reference).abs() < 1e-12,
            "closed form at {alpha}: {} vs {reference}",
            c_n.value
        );
        let l1 = bounds::q_kernel_l1(alpha, 60.0).unwrap();
        assert!(
            (l1 - (c_n.value - 2.0)).abs() < 1e-8,
            "α = {alpha}: ‖q‖₁ = {l1} vs c_n − 2 = {}",
            c_n.value - 2.0
        );
    }
    println!("criterion 06 PASS: ‖q‖₁ = c_n − 2 ± 1e-8 at α ∈ {{π/6, π/4, π/3}}");
}

#[test]
fn criterion_07_regime_crossover_location() {
    // the angle bound (π−α)/α falls below the calculus bound as α grows
    let gap = |alpha: f64| {
        let (_, angle) = bounds::bound_neumann_angle(alpha).unwrap();
        let calculus = bounds::bound_sector_calculus(alpha).unwrap();
        angle.value - calculus.value
    };
    let (mut lo, mut hi) = (0.30 * PI, 0.40 * PI);
    assert!(gap(lo) > 0.0 && gap(hi) < 0.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if gap(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let crossing = 0.5 * (lo + hi);
    assert!(
        crossing > 0.34 * PI && crossing < 0.35 * PI,
        "crossing at {} π",
        crossing / PI
    );
    println!(
        "criterion 07 PASS: bounds cross at α = {:.10} = {:.6}π ∈ (0.34π, 0.35π)",
        crossing,
        crossing / PI
    );
}

#[test]
fn criterion_08_cauchy_identities() {
    let bounded: [ConvexDomain; 3] = [
        ConvexDomain::disk(c(0.5, -0.25), 2.0).unwrap(),
        ConvexDomain::ellipse(c(0.0, 0.0), 2.0, 1.0, 0.4).unwrap(),
        square(),
    ];
    let mut worst_bounded = 0.0f64;
    for trial in 0..20 {
        let domain = &bounded[trial % 3];
        let dim = 2 + trial % 3;
        let a = operator::random_matrix_in_domain(domain, dim, derive_seed(81, dim, trial), 1e-2)
            .unwrap();
        let n = if matches!(domain, ConvexDomain::Polygon { .. }) {
            0
        } else {
            4096
        };
        let dev = operator::mu_boundary_integral(&a, domain, n, None).unwrap();
        assert!(dev < 1e-8, "bounded deviation {dev} on trial {trial}");
        worst_bounded = worst_bounded.max(dev);
    }

    let sector = ConvexDomain::sector(c(0.0, 0.0), 0.0, PI / 4.0).unwrap();
    let mut worst_sector = 0.0f64;
    for trial in 0..20 {
        let dim = 2 + trial % 3;
        let a = operator::random_matrix_in_domain(&sector, dim, derive_seed(82, dim, trial), 1e-3)
            .unwrap();
        let dev = operator::mu_boundary_integral(&a, &sector, 0, Some(1e4)).unwrap();
        assert!(dev < 1e-3, "sector deviation {dev} on trial {trial}");
        worst_sector = worst_sector.max(dev);
    }
    println!(
        "criterion 08 PASS: worst ‖∫μ − 2I‖ = {worst_bounded:.2e} (bounded), \
         worst ‖∫μ − 1.5I‖ = {worst_sector:.2e} (sector π/4)"
    );
}

#[test]
fn criterion_09_representation_residuals() {
    let domains: [ConvexDomain; 4] = [
        unit_disk(),
        ConvexDomain::disk(c(0.4, 0.3), 1.7).unwrap(),
        ellipse21(),
        ConvexDomain::ellipse(c(1.0, -1.0), 1.5, 0.7, 0.5).unwrap(),
    ];
    let mut worst = 0.0f64;
    for trial in 0..20 {
        let domain = &domains[trial % 4];
        let degree = 1 + trial % 3;
        let r = harness::random_rational(domain, degree, derive_seed(91, degree, trial)).unwrap();
        let omega = domain.interior_point();
        let sigma = domain.sample_boundary(64, omega).unwrap()[(trial * 7) % 64].sigma;
        let z = omega + 0.6 * (sigma - omega);
        let residual = bounds::representation_residual_bounded(domain, &r, z).unwrap();
        assert!(residual < 1e-6, "trial {trial}: residual {residual}");
        worst = worst.max(residual);
    }

    // for constant data the angular kernel collapses to −1/π pointwise
    let one = RationalFunction::constant(c(1.0, 0.0));
    let k = bounds::k_kernel(&one, c(0.002, 0.0008), PI + 0.9, c(1.0, 0.2), 60.0);
    assert!(
        (k.re + 1.0 / PI).abs() < 1e-8 && k.im.abs() < 1e-8,
        "K1 = {k}"
    );
    println!("criterion 09 PASS: worst representation residual {worst:.2e}, K·1 = −1/π ± 1e-8");
}

#[test]
fn criterion_10_disk_neumann_closed_forms() {
    let disk = unit_disk();
    let system = neumann::NeumannSystem::assemble(&disk, 1024).unwrap();
    let mut worst = 0.0f64;
    for trial in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(101, 1, trial));
        let modulus = 0.8 * rng.gen::<f64>();
        let pole = Complex64::from_polar(modulus, TAU * rng.gen::<f64>());
        let b = RationalFunction::mobius(pole);
        let data: Vec<Complex64> = system.samples().iter().map(|s| b.eval(s.sigma)).collect();
        let solved = system.solve(&data).unwrap();
        let at_center = b.eval(c(0.0, 0.0));
        let dev = solved
            .iter()
            .zip(&data)
            .map(|(g, r)| (g - (2.0 * r - at_center)).norm())
            .fold(0.0, f64::max);
        assert!(dev < 1e-8, "trial {trial}: deviation {dev}");
        worst = worst.max(dev);
    }

    for k in 1..=8 {
        let defect = neumann::lemniscate_projection_check(k).unwrap();
        assert!(
            defect < 1e-8,
            "harmonic annihilation defect {defect} at k = {k}"
        );
    }

    let family: Vec<RationalFunction> = (0..8)
        .map(|k| RationalFunction::mobius(Complex64::from_polar(0.995, TAU * k as f64 / 8.0 + 0.3)))
        .collect();
    let (c_n_est, _) = neumann::estimate_cn(&disk, &family, 2048).unwrap();
    assert!(
        (c_n_est - 3.0).abs() <= 0.06,
        "c_n estimate {c_n_est} not within 2% of 3"
    );
    println!(
        "criterion 10 PASS: worst closed-form deviation {worst:.2e}, c_n estimate {c_n_est:.4}"
    );
}

#[test]
fn criterion_11_similarity_table() {
    for gamma in [0.1, 0.5, 1.5, 3.0, 10.0] {
        let sim = similarity::build_similarity(gamma, 1e-12).unwrap();
        assert!(
            sim.b_norm_defect <= 1e-10,
            "γ = {gamma}: ‖B‖ defect {}",
            sim.b_norm_defect
        );
        assert!(sim.x > 1.0 && sim.x < 2.0, "γ = {gamma}: X = {}", sim.x);
        assert!(
            sim.quadratic_residual < 1e-9,
            "γ = {gamma}: quadratic residual {}",
            sim.quadratic_residual
        );
        // the map must take the Bernstein ellipse boundary onto the unit circle
        for j in 0..100 {
            let w = Complex64::from_polar(sim.rho, TAU * j as f64 / 100.0);
            let sigma = (w + 1.0 / w) / 2.0;
            let image = similarity::conformal_a(sigma, sim.rho, 1e-12).unwrap();
            assert!(
                (image.norm() - 1.0).abs() < 1e-8,
                "γ = {gamma}, j = {j}: |a(σ)| = {}",
                image.norm()
            );
        }
    }
    println!("criterion 11 PASS: ‖B‖ = 1, X ∈ (1,2), quadratic identity, |a(∂E)| = 1 for all γ");
}

#[test]
fn criterion_12_disk_attainment() {
    let ratio = harness::disk_attainment().unwrap();
    assert!((ratio - 2.0).abs() < 1e-12, "attained ratio {ratio}");
    println!("criterion 12 PASS: attained ratio = {ratio:.15}");
}

#[test]
fn criterion_13_no_violation_suites() {
    let start = Instant::now();
    let domains: [(ConvexDomain, bool, u64); 4] = [
        (unit_disk(), true, 401),
        (ellipse21(), false, 402),
        (square(), false, 403),
        (
            ConvexDomain::sector(c(0.0, 0.0), 0.0, PI / 4.0).unwrap(),
            false,
            404,
        ),
    ];
    for (domain, inject, seed) in domains {
        let kind = domain.kind_name();
        let config = harness::TrialConfig {
            domain,
            dims: (2..=8).collect(),
            trials_per_dim: 29,
            degrees: vec![1, 2, 3],
            master_seed: seed,
            margin: 1e-3,
            boundary_density: 8192,
            inject_attainment: inject,
        };
        let report = harness::run_trials(&config).unwrap();
        assert!(
            report.trials.len() >= 200,
            "{kind}: only {} trials",
            report.trials.len()
        );
        assert!(
            report.violations.is_empty(),
            "{kind}: {} violations, first {:?}",
            report.violations.len(),
            report.violations.first()
        );
        if inject {
            assert!(
                report.max_ratio <= 2.0 + 1e-6 && report.max_ratio >= 1.9,
                "disk max ratio {}",
                report.max_ratio
            );
        }
        println!(
            "criterion 13 [{kind}]: {} trials, max ratio {:.6} ≤ {:.6}",
            report.trials.len(),
            report.max_ratio,
            report.certificate.value
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 300.0, "suites took {elapsed:?}");
    println!("criterion 13 PASS: zero violations over 4 domains in {elapsed:?}");
}

#[test]
fn criterion_14_power_inequality() {
    let dims: Vec<usize> = (2..=8).collect();
    let report = harness::power_inequality_trials(&dims, 5, 72, 1401).unwrap();
    assert!(
        report.violations.is_empty(),
        "violations: {:?}",
        report.violations.first()
    );
    assert!(report.max_numerical_radius <= 1.0 + 1e-8);
    assert!(report.max_power_norm <= 2.0 + 1e-8);
    println!(
        "criterion 14 PASS: 504 trials, max radius {:.12}, max power norm {:.12}",
        report.max_numerical_radius, report.max_power_norm
    );
}

#[test]
fn criterion_15_degree_one_matrix_polynomials() {
    let ellipse = similarity::ellipse_from_foci(c(-1.0, 0.0), c(1.0, 0.0), 1.5).unwrap();
    let mut worst = 0.0f64;
    for trial in 0..200 {
        let seed = derive_seed(1501, 1, trial);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim = 2 + (trial % 5);
        let m = 1 + (trial % 3);
        let a = operator::random_matrix_in_domain(&ellipse, dim, seed ^ 0x9e37, 1e-3).unwrap();
        let mut coeff = || {
            CMatrix::from_fn(m, m, |_, _| {
                c(rng.sample(StandardNormal), rng.sample(StandardNormal))
            })
        };
        let p0 = coeff();
        let p1 = coeff();
        let ratio = similarity::degree_one_bound_check(&a, &p0, &p1, &ellipse).unwrap();
        assert!(ratio <= 2.0 + 1e-6, "trial {trial}: ratio {ratio}");
        worst = worst.max(ratio);
    }
    println!("criterion 15 PASS: 200 trials, worst ratio {worst:.6} ≤ 2");
}
