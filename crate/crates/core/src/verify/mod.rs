//! Oracles and numerical checks.

pub mod auxiliary;
pub mod convergence;
pub mod identities;
pub mod inequalities;
pub mod manufactured;
pub mod oracles;

pub use auxiliary::{auxiliary_bound_check, AuxiliaryReport, AuxiliaryStatus};
pub use convergence::{flat_dirichlet_convergence, least_squares_slope, reference_convergence, ConvergenceStudy};
pub use identities::{rellich_residual, rellich_residual_vanishing, RellichReport};
pub use inequalities::{
    mode_amplitude_check, mode_amplitude_suite, poincare_check, poincare_suite, trace_inequality_check,
    trace_inequality_suite, Margin, SuiteReport,
};
pub use manufactured::{ManufacturedField, Term, Vertical};
pub use oracles::{flat_dirichlet_oracle, flat_impedance_oracle, flat_transmission_oracle, FlatOracle};
