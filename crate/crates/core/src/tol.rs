//! Numerical tolerances shared across modules.

/// Hermiticity check on inputs to spectral routines.
pub const HERMITIAN: f64 = 1e-10;

/// Eigenvalue window treated as zero when testing positivity.
pub const PSD: f64 = 1e-9;

/// Reconstruction residuals (square roots, certificates).
pub const RECONSTRUCTION: f64 = 1e-8;

/// Unit trace of density operators.
pub const TRACE: f64 = 1e-10;

/// Unit norm of pure states.
pub const NORM: f64 = 1e-12;

/// Margin applied to strict inequalities in detection decisions.
pub const STRICT: f64 = 1e-12;

/// Orthonormality of bases and unitarity checks.
pub const ORTHONORMAL: f64 = 1e-10;

/// Hermiticity of covariance-type matrices built from states.
pub const ETA_HERMITIAN: f64 = 1e-9;

/// Positivity window for covariance-type matrices.
pub const ETA_PSD: f64 = 1e-8;
