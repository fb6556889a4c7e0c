//! Transforms of 2×2 and 2×2×2 contingency tables into equivalent
//! probability tables with uniform margins and the same odds-ratio
//! dependence structure.
//!
//! A table with heavily unbalanced margins can hide a strong association.
//! Rescaling it so that every one-dimensional margin equals (1/2, 1/2)
//! while preserving the odds-ratio structure makes the association visible
//! without changing it. For 2×2 tables the transform is a closed form in
//! the odds ratio alone. For 2×2×2 tables the analogous problem is
//! under-determined: fixing the three-way odds ratio leaves a
//! three-parameter family of solutions ([`family`]), and uniqueness is
//! restored either by preserving the conditional odds ratios ([`solver`])
//! or by requiring uniform two-dimensional sections ([`closed_form`]).
//!
//! The crate is organized around:
//!
//! * [`table`] — table types, margins, odds ratios;
//! * [`profile`] — the full conditional-odds-ratio structure and its chain
//!   identity;
//! * [`closed_form`] — the 2×2 transform, its symmetric 2×2×2
//!   generalization, and the uniform-section solution;
//! * [`solver`] — IPF and Newton solvers for the fully constrained
//!   transform, cross-validated against each other;
//! * [`family`] — exploration of the non-unique solution set.
//!
//! All operations are pure functions of immutable inputs.

pub mod closed_form;
pub mod error;
pub mod family;
pub mod profile;
pub mod solver;
pub mod table;
pub mod tol;

pub use closed_form::{
    section_residuals, symmetric_3d, uniform_sections_3d, uniformize_2d, SectionResiduals,
    UniformTransform2,
};
pub use error::{Error, Result};
pub use family::{
    complete_table, sample_family, verify_family_point, FamilyPoint, FamilyResiduals, RootBranch,
};
pub use profile::{DependenceProfile3, OddsRatioTargets};
pub use solver::{
    cross_validate, solve_ipf, solve_newton, solve_newton_from, SolverConfig, SolverMethod,
    SolverReport,
};
pub use table::{Axis, AxisLabel, Pair, Table2, Table3, TableKind};

/// |a − b| scaled by the larger magnitude; 0 when both are 0.
pub fn relative_difference(a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}
