//! Exact calculus for piecewise power-law functions.

mod arc;
mod integrate;
mod piecewise;
pub mod quadrature;

pub use arc::{crossings, Crossings, Interval, PowerArc};
pub use integrate::{
    integrate_log_corrected, integrate_power, integrate_power_log, integrate_product, log_scale, LOG_UPPER_SLACK,
};
pub use piecewise::{PiecewisePowerFn, BREAKPOINT_TOL};
