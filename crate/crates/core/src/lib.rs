//! Finite-element solver and verification harness for plane-wave diffraction
//! by 2π-periodic gratings.
//!
//! The unknown is always the periodic Bloch factor `ũ` of a quasi-periodic
//! field `u = e^{iαx₁}ũ`. Three boundary models are supported (sound-soft
//! Dirichlet, impedance, two-media transmission) together with the auxiliary
//! adjoint-type problem used in the impedance stability estimate.
//!
//! The crate is `no_std` and only needs `alloc`. IO, configuration and the
//! command line live in the `grating-bench` companion crate.
#![no_std]
#![forbid(unsafe_code)]
// `Float` supplies f64 math on toolchains where core has no inherent float
// methods. Where core (or std under test) has them they shadow the trait.
#![allow(unused_imports)]

extern crate alloc;

pub mod bounds;
pub mod dtn;
pub mod error;
pub mod fem;
pub mod geometry;
pub mod mesh;
pub mod postprocess;
pub mod quadrature;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// `2π`, the grating period.
pub const PERIOD: f64 = core::f64::consts::TAU;
