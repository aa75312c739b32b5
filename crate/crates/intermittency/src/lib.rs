//! Green's functions, Feynman-diagram moment formulas and exponent algebra for
//! stochastic heat, wave and fractional diffusion equations driven by
//! Gaussian noise that is fractional in time and correlated in space.

pub mod cli;
pub mod diagrams;
pub mod error;
pub mod exponents;
pub mod hls;
pub mod kernels;
pub mod mc;
pub mod moments;
pub mod noise;
pub mod quad;
pub mod smallball;

pub use error::{Error, Result};
