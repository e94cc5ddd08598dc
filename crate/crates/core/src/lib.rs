//! Weighted measures on the line whose p-weak gradient changes with p.
//!
//! The crate builds the weight `w = inf_k w_k` as exact piecewise power-law
//! functions, checks its Muckenhoupt `A_p` behaviour on interval sweeps, and
//! computes p-moduli of interval curves and p-weak gradients for measures
//! given as a piecewise power-law density plus atoms.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod ext_real;
pub mod io;
pub mod modulus;
pub mod muckenhoupt;
pub mod power_arcs;
pub mod rationals;
pub mod weak_gradient;
pub mod weight;

pub use error::{Error, Result};
pub use ext_real::ExtReal;
pub use power_arcs::{Interval, PiecewisePowerFn, PowerArc};
