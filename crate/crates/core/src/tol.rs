//! Numerical tolerances shared across the crate.
//!
//! All sign and tie decisions in the pivot machinery go through `SIGN_EPS`;
//! the looser `TABLE_TOL` absorbs drift accumulated by repeated rank-one
//! table updates between refactorizations.

/// Tolerance for every sign test on pivot quantities (alpha >= 0,
/// gamma < 0, phi >= 0) and for single-constraint feasibility checks.
pub const SIGN_EPS: f64 = 1e-9;

/// Tolerance for the searching-table representation identities checked by
/// [`verify_table`](crate::simplex::verify_table).
pub const TABLE_TOL: f64 = 1e-7;

/// Determinant floor for the general-position screen applied when choosing
/// an auxiliary objective.
pub const SCREEN_TOL: f64 = 1e-12;

/// Minimum objective increase a pivot must achieve when the solver runs
/// with auditing enabled.
pub const MONOTONE_EPS: f64 = 1e-12;

/// Pivots between table rebuilds from the active set by direct solves.
pub const REFACTOR_INTERVAL: usize = 50;

/// Pivots between full table verifications in audited solves.
pub const AUDIT_INTERVAL: usize = 10;
