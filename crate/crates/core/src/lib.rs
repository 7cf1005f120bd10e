//! Numerical toolkit for near-parabolic holomorphic dynamics built around the
//! Buff form `(f' - 1) / ((f - z) Log f') dz`.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod buffform;
pub mod cplx;
pub mod error;
pub mod fixpoint;
pub mod flow;
pub mod germ;
pub mod quad;
pub mod rays;
pub mod rectify;

pub use error::{Error, Result};
pub use germ::AnalyticMap;

pub type Complex = num_complex::Complex64;
