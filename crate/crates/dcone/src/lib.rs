//! Analysis toolkit for the planar double obstacle problem with quadratic
//! obstacles touching at one point.
//!
//! The crate has three layers:
//!
//! * exact machinery: obstacle-pair validation and normalisation
//!   ([`obstacle`]), the closed-form classification of homogeneous blow-up
//!   solutions ([`classify`]), the solution families themselves
//!   ([`solutions`]), and the axisymmetric 3D construction ([`threed`]);
//! * a projected-SOR finite-difference solver for the variational
//!   inequality on a square ([`solver`]);
//! * numerical blow-up analysis on solved fields: scaled energy and its
//!   monotonicity, energy-level classification, best-fit solution families,
//!   free-boundary extraction with angle measurement, and convergence-rate
//!   estimation ([`analysis`]).
//!
//! [`io`] holds the JSON/CSV wire formats shared with the CLI, and
//! [`acceptance`] the end-to-end criteria suite run by `cargo test` and the
//! `corpus` subcommand.

pub mod acceptance;
pub mod analysis;
pub mod classify;
pub mod io;
pub mod obstacle;
pub mod solutions;
pub mod solver;
pub mod threed;

pub use classify::{
    classify, double_cone_alphas, enumerate_double_cones, halfspace_admissible,
    halfspace_direction_bounds, opening_angle, sector_from_alpha, AlphaSet, Branch, CaseLabel,
    ClassifyError, DirectionBound, HalfspaceAdmissibility, SectorSolution,
};
pub use obstacle::{
    NormalizedPair, ObstaclePair, ObstacleSide, QuadraticForm, SignaturePolynomial,
    TransformRecord, ValidationError,
};
pub use solutions::{
    build_halfspace, build_mu, verify_solution, weiss_of_blowup, AngularPiece, Arrangement,
    BlowupSolution, Family, PieceKind, SamplerConfig, VerificationReport,
};
pub use threed::{build_3d, eval_3d, find_t0, g_eval, g_prime, verify_3d, DoubleCone3D, Report3D};
