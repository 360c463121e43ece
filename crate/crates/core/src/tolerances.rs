//! Pass/fail thresholds shared by the verification suites and the
//! acceptance target.

/// Closed form against the lattice series, absolutely convergent cells.
pub const SERIES_DIRECT: f64 = 1e-8;
/// Closed form against the lattice series, Abel-regularized cells.
pub const SERIES_ABEL: f64 = 1e-6;
/// q-zeta at `-n` against the closed form.
pub const INTERPOLATION_DIRECT: f64 = 1e-8;
pub const INTERPOLATION_ABEL: f64 = 1e-6;
/// Distribution relations, relative.
pub const DISTRIBUTION: f64 = 1e-10;
/// Character recurrence residual.
pub const CHARACTER_RECURRENCE: f64 = 1e-10;
/// Classical Barnes zeta in its convergence region.
pub const CLASSICAL_ZETA: f64 = 1e-8;
/// Mellin transform against the lattice sum.
pub const MELLIN: f64 = 1e-6;
/// q-binomial formula and its reciprocal.
pub const Q_BINOMIAL: f64 = 1e-10;
/// `err(q = 1 - 1e-3) / err(q = 1 - 1e-4)` should be about 10 (linear in
/// `1 - q`), or about 100 when the linear term vanishes: `log10` of the
/// ratio must lie within this distance of 1 or 2, i.e. the ratio in
/// [5, 20] or [50, 200].
pub const Q_TO_ONE_ORDER: f64 = std::f64::consts::LOG10_2;

/// Runtime targets in seconds (reported, not enforced by the checks).
pub const RUNTIME_SERIES: f64 = 60.0;
pub const RUNTIME_INTERPOLATION: f64 = 30.0;
pub const RUNTIME_PADIC: f64 = 120.0;
pub const RUNTIME_MELLIN: f64 = 30.0;
