pub mod data;
pub mod error;
pub mod lab;
pub mod linear;
pub mod nonlinearity;
pub mod par;
pub mod picard;
pub mod quadrature;
pub mod spectral;
pub mod timestepper;

pub use error::{Result, WaveError};
