//! Trigonometric polynomials on the unit circle and their grid images.

mod expr;
mod grid;
mod norms;
mod trig;

pub use expr::parse_trig_poly;
pub use grid::{required_grid_exp, GridFunction, MAX_GRID_EXP};
pub use norms::{norm_l1, norm_linf, QuadratureValue, SupNorm, DEFAULT_Q, MAX_NORM_Q, MIN_NORM_Q, QUADRATURE_TOL};
#[allow(unused_imports)]
pub(crate) use norms::{golden_max, mean_abs_certified};
pub use trig::{Cancellation, SpectrumCheck, TrigPoly, CANCELLATION_THRESHOLD};
