//! Command-line front end: load a JSON run configuration, dispatch to the
//! library, and emit versioned reports.
//!
//! Exit codes: 0 success, 1 a certified bound was violated by a trial,
//! 2 configuration error (unreadable/invalid config, inadmissible domain),
//! 3 numerical failure (quadrature, eigensolver, or linear algebra gave up).

use std::f64::consts::TAU;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::json;

use spectrabound::{
    bounds, harness, neumann, similarity, ConvexDomain, Error, RationalFunction, REPORT_SCHEMA,
};

#[derive(Parser)]
#[command(
    name = "spectrabound",
    version,
    about = "Bound certificates for rational functions of matrices on convex domains"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute every applicable bound certificate for the configured domain
    Bounds(CommonArgs),
    /// Random matrix/rational trials checking ‖r(A)‖ against the certificate
    Verify(CommonArgs),
    /// Assemble the boundary integral system and estimate the sharp constants
    Neumann(CommonArgs),
    /// Similarity diagnostics for the canonical 2×2 family over γ
    Similar2x2(CommonArgs),
    /// Bounds, trials, similarity table, and (bounded domains) the boundary system
    Report(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// JSON run configuration
    config: PathBuf,
    /// Override the master seed
    #[arg(long)]
    seed: Option<u64>,
    /// Override trials per dimension
    #[arg(long)]
    trials: Option<usize>,
    /// Override the boundary sampling resolution
    #[arg(long)]
    resolution: Option<usize>,
    /// Write the report to this file instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum OutputFormat {
    #[default]
    Json,
    Csv,
}

/// Polynomial coefficients ascending by degree, each entry `[re, im]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct RationalSpec {
    num: Vec<[f64; 2]>,
    den: Vec<[f64; 2]>,
}

impl RationalSpec {
    fn build(&self) -> Result<RationalFunction, Error> {
        let lift = |v: &[[f64; 2]]| v.iter().map(|c| Complex64::new(c[0], c[1])).collect();
        RationalFunction::new(lift(&self.num), lift(&self.den))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunConfig {
    domain: ConvexDomain,
    #[serde(default = "default_seed")]
    seed: u64,
    #[serde(default = "default_trials")]
    trials: usize,
    #[serde(default = "default_dims")]
    dims: Vec<usize>,
    #[serde(default = "default_degrees")]
    degrees: Vec<usize>,
    #[serde(default = "default_margin")]
    margin: f64,
    #[serde(default = "default_resolution")]
    resolution: usize,
    #[serde(default)]
    inject_attainment: bool,
    #[serde(default = "default_nodes")]
    neumann_nodes: usize,
    #[serde(default = "default_gammas")]
    gammas: Vec<f64>,
    #[serde(default = "default_tolerance")]
    tolerance: f64,
    /// Optional explicit rational family for the `neumann` estimates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    family: Option<Vec<RationalSpec>>,
    #[serde(default)]
    format: OutputFormat,
}

fn default_seed() -> u64 {
    42
}
fn default_trials() -> usize {
    200
}
fn default_dims() -> Vec<usize> {
    (2..=8).collect()
}
fn default_degrees() -> Vec<usize> {
    vec![1, 2, 3]
}
fn default_margin() -> f64 {
    1e-3
}
fn default_resolution() -> usize {
    8192
}
fn default_nodes() -> usize {
    1024
}
fn default_gammas() -> Vec<f64> {
    vec![0.1, 0.5, 1.5, 3.0, 10.0]
}
fn default_tolerance() -> f64 {
    1e-12
}

impl RunConfig {
    fn validate(&self) -> Result<(), Error> {
        self.domain.validate()?;
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be ≥ 1".into()));
        }
        if self.dims.is_empty() || self.dims.contains(&0) {
            return Err(Error::InvalidConfig(
                "dims must be nonempty and positive".into(),
            ));
        }
        if self.degrees.is_empty() {
            return Err(Error::InvalidConfig("degrees must be nonempty".into()));
        }
        if !(self.margin > 0.0 && self.margin.is_finite()) {
            return Err(Error::InvalidConfig(
                "margin must be positive and finite".into(),
            ));
        }
        if self.resolution < 64 {
            return Err(Error::InvalidConfig("resolution must be ≥ 64".into()));
        }
        if self.neumann_nodes < 16 {
            return Err(Error::InvalidConfig("neumann_nodes must be ≥ 16".into()));
        }
        if self.gammas.iter().any(|&g| !(g > 0.0 && g.is_finite())) {
            return Err(Error::InvalidConfig(
                "gammas must be positive and finite".into(),
            ));
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::InvalidConfig(
                "tolerance must be positive and finite".into(),
            ));
        }
        Ok(())
    }

    fn trial_config(&self) -> harness::TrialConfig {
        harness::TrialConfig {
            domain: self.domain.clone(),
            dims: self.dims.clone(),
            trials_per_dim: self.trials,
            degrees: self.degrees.clone(),
            master_seed: self.seed,
            margin: self.margin,
            boundary_density: self.resolution,
            inject_attainment: self.inject_attainment,
        }
    }
}

/// A terminal failure: `message` goes to stderr, `code` is the process exit.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn config(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

fn classify(err: Error) -> Failure {
    use Error::*;
    let code = match &err {
        InvalidDomain(_)
        | InvalidConfig(_)
        | DimensionMismatch(_)
        | EmptyInput(_)
        | InvalidRational(_)
        | UnboundedDomain(_)
        | NotASector(_)
        | NotInterior { .. }
        | DirectionNotAdmissible { .. }
        | PoleInsideDomain(..)
        | RangeNotContained(_) => 2,
        EstimateViolated { .. } => 1,
        AccuracyNotMet { .. }
        | IllConditioned { .. }
        | SingularSystem(_)
        | EigenConvergence { .. } => 3,
    };
    Failure {
        code,
        message: err.to_string(),
    }
}

enum Payload {
    Json(serde_json::Value),
    Text(String),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let (args, payload, code) = match &cli.command {
        Command::Bounds(args) => {
            let cfg = load_config(args)?;
            reject_csv(&cfg, "bounds")?;
            (args, Payload::Json(cmd_bounds(&cfg)?), 0)
        }
        Command::Verify(args) => {
            let cfg = load_config(args)?;
            let (payload, code) = cmd_verify(&cfg)?;
            (args, payload, code)
        }
        Command::Neumann(args) => {
            let cfg = load_config(args)?;
            reject_csv(&cfg, "neumann")?;
            (args, Payload::Json(cmd_neumann(&cfg)?), 0)
        }
        Command::Similar2x2(args) => {
            let cfg = load_config(args)?;
            reject_csv(&cfg, "similar2x2")?;
            (args, Payload::Json(cmd_similar2x2(&cfg)?), 0)
        }
        Command::Report(args) => {
            let cfg = load_config(args)?;
            reject_csv(&cfg, "report")?;
            let (payload, code) = cmd_report(&cfg)?;
            (args, payload, code)
        }
    };
    emit(&payload, args.output.as_deref())?;
    Ok(code)
}

fn load_config(args: &CommonArgs) -> Result<RunConfig, Failure> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| Failure::config(format!("cannot read {}: {e}", args.config.display())))?;
    let mut cfg: RunConfig = serde_json::from_str(&text)
        .map_err(|e| Failure::config(format!("cannot parse {}: {e}", args.config.display())))?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = args.trials {
        cfg.trials = trials;
    }
    if let Some(resolution) = args.resolution {
        cfg.resolution = resolution;
    }
    cfg.validate().map_err(classify)?;
    Ok(cfg)
}

fn reject_csv(cfg: &RunConfig, command: &str) -> Result<(), Failure> {
    if cfg.format == OutputFormat::Csv {
        return Err(Failure::config(format!(
            "csv output is only defined for the verify trial table, not `{command}`"
        )));
    }
    Ok(())
}

fn emit(payload: &Payload, output: Option<&std::path::Path>) -> Result<(), Failure> {
    let text = match payload {
        Payload::Json(v) => {
            let mut s = serde_json::to_string_pretty(v)
                .map_err(|e| Failure::config(format!("cannot serialise report: {e}")))?;
            s.push('\n');
            s
        }
        Payload::Text(t) => t.clone(),
    };
    match output {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::config(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_bounds(cfg: &RunConfig) -> Result<serde_json::Value, Failure> {
    let set = bounds::certificate(&cfg.domain).map_err(classify)?;
    Ok(json!({
        "schema": REPORT_SCHEMA,
        "command": "bounds",
        "config": cfg,
        "certificates": set,
    }))
}

fn cmd_verify(cfg: &RunConfig) -> Result<(Payload, u8), Failure> {
    let report = harness::run_trials(&cfg.trial_config()).map_err(classify)?;
    let code = if report.violations.is_empty() { 0 } else { 1 };
    let payload = match cfg.format {
        OutputFormat::Json => Payload::Json(json!({
            "schema": REPORT_SCHEMA,
            "command": "verify",
            "config": cfg,
            "report": report,
        })),
        OutputFormat::Csv => Payload::Text(verify_csv(&report)),
    };
    Ok((payload, code))
}

fn verify_csv(report: &harness::TrialReport) -> String {
    let mut out = String::from("trial,dim,degree,seed,ratio,certificate\n");
    for t in &report.trials {
        out.push_str(&format!(
            "{},{},{},{},{:.17e},{:.17e}\n",
            t.trial, t.dim, t.degree, t.seed, t.ratio, report.certificate.value
        ));
    }
    out
}

fn cmd_neumann(cfg: &RunConfig) -> Result<serde_json::Value, Failure> {
    if !cfg.domain.is_bounded() {
        return Err(Failure::config(
            "the boundary system needs a bounded domain; sector and half-plane \
             constants come in closed form from the `bounds` subcommand",
        ));
    }
    let system =
        neumann::NeumannSystem::assemble(&cfg.domain, cfg.neumann_nodes).map_err(classify)?;
    let condition = system.condition_estimate().map_err(classify)?;
    let family = resolve_family(cfg)?;
    let (c_n_est, d_n_est) =
        neumann::estimate_cn(&cfg.domain, &family, cfg.neumann_nodes).map_err(classify)?;
    let combined = bounds::certificate(&cfg.domain).map_err(classify)?.combined;
    let mut body = json!({
        "schema": REPORT_SCHEMA,
        "command": "neumann",
        "config": cfg,
        "nodes": cfg.neumann_nodes,
        "family_size": family.len(),
        "row_sum_defect": system.row_sum_defect(),
        "p_inf_norm": system.p_inf_norm(),
        "condition_estimate": condition,
        "c_n_est": c_n_est,
        "d_n_est": d_n_est,
        "combined_certificate": combined,
    });
    if let ConvexDomain::Disk { center, radius } = &cfg.domain {
        body["disk_mobius_residual"] =
            json!(disk_mobius_residual(&system, *center, *radius).map_err(classify)?);
    }
    Ok(body)
}

/// On a disk the solved density for a Möbius transform b is 2b(σ) − b(center)
/// exactly; the worst deviation over the nodes is a direct accuracy readout.
fn disk_mobius_residual(
    system: &neumann::NeumannSystem,
    center: Complex64,
    radius: f64,
) -> Result<f64, Error> {
    let b = RationalFunction::mobius(Complex64::new(0.5, 0.3))
        .precompose_affine(Complex64::new(1.0 / radius, 0.0), -center / radius);
    let data: Vec<Complex64> = system.samples().iter().map(|s| b.eval(s.sigma)).collect();
    let solved = system.solve(&data)?;
    let at_center = b.eval(center);
    Ok(solved
        .iter()
        .zip(&data)
        .map(|(g, r)| (g - (2.0 * r - at_center)).norm())
        .fold(0.0, f64::max))
}

fn resolve_family(cfg: &RunConfig) -> Result<Vec<RationalFunction>, Failure> {
    match &cfg.family {
        Some(specs) => {
            if specs.is_empty() {
                return Err(Failure::config("family must be nonempty when given"));
            }
            specs.iter().map(|s| s.build().map_err(classify)).collect()
        }
        None => default_family(&cfg.domain).map_err(classify),
    }
}

/// Twelve near-boundary poles spread in angle, plus a constant: enough to
/// push the empirical constants close to their sharp values without any
/// per-domain tuning.
fn default_family(domain: &ConvexDomain) -> Result<Vec<RationalFunction>, Error> {
    let one = Complex64::new(1.0, 0.0);
    let mut family = vec![RationalFunction::constant(one)];
    match domain {
        ConvexDomain::Disk { center, radius } => {
            for k in 0..12 {
                let theta = TAU * k as f64 / 12.0 + 0.1;
                let c = Complex64::from_polar(0.99, theta);
                family.push(
                    RationalFunction::mobius(c).precompose_affine(one / radius, -center / radius),
                );
            }
        }
        _ => {
            let omega = domain.interior_point();
            for k in 0..12 {
                let theta = TAU * k as f64 / 12.0 + 0.05;
                let reach = domain.support_function(theta)?
                    - (Complex64::from_polar(1.0, -theta) * omega).re;
                let pole = omega + Complex64::from_polar(1.02 * reach, theta);
                family.push(RationalFunction::new(vec![one], vec![-pole, one])?);
            }
        }
    }
    Ok(family)
}

fn cmd_similar2x2(cfg: &RunConfig) -> Result<serde_json::Value, Failure> {
    let mut table = Vec::new();
    for &gamma in &cfg.gammas {
        let sim = similarity::build_similarity(gamma, cfg.tolerance).map_err(classify)?;
        table.push(json!({
            "gamma": sim.gamma,
            "rho": sim.rho,
            "a1": sim.a1,
            "x": sim.x,
            "b_norm_defect": sim.b_norm_defect,
            "quadratic_residual": sim.quadratic_residual,
            "matrix_map_residual": sim.matrix_map_residual,
        }));
    }
    Ok(json!({
        "schema": REPORT_SCHEMA,
        "command": "similar2x2",
        "config": cfg,
        "table": table,
    }))
}

fn cmd_report(cfg: &RunConfig) -> Result<(Payload, u8), Failure> {
    let certificates = bounds::certificate(&cfg.domain).map_err(classify)?;
    let trials = harness::run_trials(&cfg.trial_config()).map_err(classify)?;
    let code = if trials.violations.is_empty() { 0 } else { 1 };
    let similar = cmd_similar2x2(cfg)?;
    let mut body = json!({
        "schema": REPORT_SCHEMA,
        "command": "report",
        "config": cfg,
        "certificates": certificates,
        "trials": trials,
        "similar2x2": similar["table"],
    });
    if cfg.domain.is_bounded() {
        let neumann_body = cmd_neumann(cfg)?;
        body["neumann"] = json!({
            "nodes": neumann_body["nodes"],
            "family_size": neumann_body["family_size"],
            "row_sum_defect": neumann_body["row_sum_defect"],
            "p_inf_norm": neumann_body["p_inf_norm"],
            "condition_estimate": neumann_body["condition_estimate"],
            "c_n_est": neumann_body["c_n_est"],
            "d_n_est": neumann_body["d_n_est"],
        });
    }
    Ok((Payload::Json(body), code))
}
