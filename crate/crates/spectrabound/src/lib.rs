//! Spectral-set constants for convex domains.
//!
//! A convex domain `Ω` is a `K`-spectral set for a matrix `A` when
//! `‖r(A)‖ ≤ K sup_Ω |r|` for every rational function `r` with poles off the
//! closure of `Ω`. This crate estimates and certifies such constants for
//! matrices whose numerical range lies inside `Ω`:
//!
//! * [`domain`] describes the supported convex domains (disks, ellipses,
//!   convex polygons, sectors, half-planes) with boundary sampling, support
//!   functions and geometric summary data,
//! * [`bounds`] evaluates closed-form certificates (total-variation,
//!   flatness, sector calculus, Neumann kernel, curvature, area) and the
//!   boundary representation identities behind them,
//! * [`operator`] works with the numerical range of a matrix and the double
//!   layer potential `μ(σ, A)`,
//! * [`neumann`] discretises the boundary double layer operator and solves
//!   the associated Neumann problem,
//! * [`similarity`] builds explicit 2×2 similarities realising small
//!   spectral constants on ellipses and disks,
//! * [`harness`] runs randomised verification campaigns comparing observed
//!   ratios `‖r(A)‖ / sup_Ω |r|` against the certificates.

pub mod bounds;
pub mod domain;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod neumann;
pub mod operator;
pub mod optim;
pub mod quad;
pub mod rational;
pub mod similarity;

pub use bounds::{BoundCertificate, BoundSource, CertificateSet, ConstantKind};
pub use domain::{BoundarySample, ConvexDomain, DomainMetrics};
pub use error::{Error, Result};
pub use linalg::CMatrix;
pub use rational::RationalFunction;

/// Schema tag stamped on every serialised report.
pub const REPORT_SCHEMA: &str = "spectrabound-report-v1";
