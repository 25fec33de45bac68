//! Shared numeric tolerances.

/// Relative tolerance on ABCD determinants and unitarity checks.
pub const NETWORK_REL: f64 = 1e-9;

/// Slack allowed above 1 on the largest S-matrix singular value of a passive element.
pub const PASSIVITY: f64 = 1e-9;

/// Reported isolation never exceeds this many dB.
pub const ISOLATION_CAP_DB: f64 = 160.0;

/// Denominators smaller than this (relative to their scale) are treated as zero.
pub const SINGULAR_REL: f64 = 1e-14;

/// Default relative RMS change between consecutive recording windows that marks LPTV steady state.
pub const STEADY_STATE_REL: f64 = 1e-6;

/// Condition number above which the SIC solver adds ridge regularization.
pub const SIC_COND_LIMIT: f64 = 1e10;

/// Ridge weight relative to the mean column energy of the SIC basis.
pub const SIC_RIDGE_REL: f64 = 1e-8;

/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Reference temperature for noise figure, K.
pub const T0_KELVIN: f64 = 290.0;
