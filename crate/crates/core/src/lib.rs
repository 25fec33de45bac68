//! Models of an N-path circulator-receiver for full-duplex radios.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod balnet;
pub mod circmodel;
pub mod cplx;
pub mod error;
pub mod fddemo;
pub mod linkbudget;
pub mod lptv;
pub mod netcore;
pub mod noisemodel;
pub mod sic;
pub mod tol;
pub mod touchstone;
pub mod waveform;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
