//! Central tolerance constants.
//!
//! Every numeric threshold used by the library (and re-used by the test
//! suites) is defined here so that the same bound is enforced everywhere.

/// Absolute deviation from 1 allowed for the sum of a probability table.
pub const SUM_ABS: f64 = 1e-12;

/// Relative tolerance for the chain identity linking the three-way odds
/// ratio to the ratios of conditional odds ratios.
pub const CHAIN_IDENTITY_REL: f64 = 1e-10;

/// Default maximum |margin - 1/2| accepted by the IPF solver.
pub const MARGIN_ABS: f64 = 1e-12;

/// Default residual max-norm accepted by the Newton solver.
pub const NEWTON_RESIDUAL: f64 = 1e-12;

/// Relative agreement required between the dependence profile of a solver
/// input and the profile of its solution.
pub const PROFILE_PRESERVATION_REL: f64 = 1e-8;

/// Cellwise agreement required between the IPF and Newton solutions of the
/// same problem.
pub const SOLVER_AGREEMENT_ABS: f64 = 1e-9;

/// Log-scale residual bound on the odds-ratio row of a completed family
/// point.
pub const FAMILY_OMEGA_LOG: f64 = 1e-10;

/// Absolute residual bound on the linear rows (total and margins) of a
/// completed family point.
pub const FAMILY_LINEAR_ABS: f64 = 1e-14;

/// Absolute residual bound on every row of the uniform-section system.
pub const SECTION_RESIDUAL_ABS: f64 = 1e-12;
