//! Numerical toolkit for Stieltjes differential equations driven by
//! left-continuous bounded-variation derivators.

pub mod cli;
pub mod derivator;
pub mod expr;
pub mod g_calculus;
pub mod g_exponential;
pub mod ls_measure;
pub mod poly;
pub mod pv;
pub mod quadrature;
pub mod solver;

pub use derivator::{Density, Derivator, DerivatorError, PointClass, PointTag, Quadrature};
