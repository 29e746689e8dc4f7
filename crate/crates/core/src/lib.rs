//! Explicit radial solutions of mixed Monge–Ampère and Hessian equations, and reconstruction of
//! convex bodies of revolution from their area measures.

pub mod cm_solver;
pub mod convex_profile;
pub mod error;
pub mod expr;
pub mod ma_solver;
pub mod numerics;
pub mod piecewise;
pub mod radial_measure;
pub mod zonal_measure;

pub use cm_solver::{solve_bar_sj, solve_cm, BodyOfRevolution, CmReport, Reason, Variant};
pub use convex_profile::{ConvexProfile, RadialLscFn};
pub use error::{Error, Result, Witness};
pub use expr::{Expr, LinearTable, Monomial};
pub use ma_solver::{
    check_condition, hessian_measure_on_ball, ma_k_on_ball, mixed_ma_on_ball, solve_dirichlet, solve_entire,
    solve_hessian_dirichlet, SolveReport,
};
pub use numerics::{binomial, integrate_monotone, integrate_tail, unit_ball_volume, QuadResult, Tolerance};
pub use piecewise::{LeftMonotoneFn, Piece, Piecewise};
pub use radial_measure::{DensityPiece, RadialMeasure};
pub use zonal_measure::{gnomonic, gnomonic_inverse, AngularPiece, PolarData, Side, ZonalMeasure};
