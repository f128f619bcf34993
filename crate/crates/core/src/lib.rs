//! Radial solutions, Morse indices and half-line diagnostics for Hénon-type
//! equations and Schrödinger–Hénon systems on the unit ball.

pub mod error;
pub mod finite_diff;
pub mod halfline;
pub mod interp;
pub mod linalg;
pub mod liouville;
pub mod nonlinearity;
pub mod ode;
pub mod quadrature;
pub mod radial;
pub mod report;
pub mod spectral;
pub mod sweep;

pub use error::{Error, Result};
pub use nonlinearity::Nonlinearity;
