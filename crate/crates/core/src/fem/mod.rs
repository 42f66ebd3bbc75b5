//! Galerkin discretisation of the Bloch-transformed problems.
//!
//! A basis function `φ_j` of the periodic space stands for the quasi-periodic
//! function `e^{iαx₁}φ_j`, so gradients become `∇φ_j + iαφ_j e₁` and the matrix
//! entry is `A_ij = a(φ_j, φ_i)`.

mod assemble;
mod field;
mod solve;
mod space;
mod trace;

pub use assemble::{
    assemble_auxiliary, assemble_dirichlet, assemble_impedance, assemble_model, assemble_transmission, AssembledSystem,
    ProblemKind, SystemMeta,
};
pub use field::{DiscreteField, ElementGeometry};
pub use solve::{solve, CsrMatrix, Solution, RESIDUAL_TOL};
pub use space::{FeSpace, LocalBasis};
pub use trace::{edge_moments, line_modes, TraceModes};
