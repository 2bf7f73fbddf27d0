//! Central numerical tolerances.
//!
//! Double-precision eigen/SVD noise at the matrix sizes handled here
//! (dimension at most a few dozen) sits around 1e-12..1e-10, so validation
//! tolerances are 1e-10 and decision tolerances 1e-9.

/// Orthonormality / Hermiticity / normalization validation.
pub const VALIDATE: f64 = 1e-10;

/// Relative threshold on singular values for numerical rank.
pub const RANK_REL: f64 = 1e-9;

/// Tolerance on the minimum partial-transpose eigenvalue for PPT decisions.
pub const PPT: f64 = 1e-9;

/// Acceptance threshold for a verified rank-one pencil point: sigma_2/sigma_1.
pub const PENCIL_RANK1: f64 = 1e-7;

/// Reassembly error allowed for an extracted separable decomposition.
pub const DECOMPOSITION: f64 = 1e-6;

/// Agreement tolerance for normal-form and parameter round trips.
pub const FORM_MATCH: f64 = 1e-8;
