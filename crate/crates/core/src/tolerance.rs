//! Numerical tolerances shared by the library and its tests.

/// Maximum elementwise `|M - M^dagger|` accepted by the eigensolver.
pub const HERMITICITY: f64 = 1e-10;

/// Maximum elementwise `|M - M^dagger|` for a stored density matrix.
pub const DENSITY_HERMITICITY: f64 = 1e-12;

/// Allowed deviation of a density-matrix trace from one.
pub const TRACE: f64 = 1e-12;

/// Smallest eigenvalue still treated as positive semidefinite.
pub const PSD_FLOOR: f64 = -1e-10;

/// Allowed deviation of a state-vector norm from one.
pub const NORM: f64 = 1e-12;

/// Jacobi stops once the off-diagonal Frobenius norm drops below this.
pub const JACOBI_OFF_DIAGONAL: f64 = 1e-13;

pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Guard band above the CHSH local bound of 2.
pub const CHSH_VIOLATION: f64 = 1e-9;

/// Guard band above the CGLMP local bound of 2. Wider than the CHSH band
/// because CGLMP values come out of an optimizer.
pub const CGLMP_VIOLATION: f64 = 1e-6;

/// Slack used when comparing the two sides of the two-qubit extendibility inequality.
pub const CHEN_SLACK: f64 = 1e-10;

/// Negative determinants down to this value are clamped to zero.
pub const DET_CLAMP: f64 = -1e-12;

/// Default convergence tolerance of the CGLMP optimizer.
pub const CGLMP_OPTIMIZER: f64 = 1e-8;
