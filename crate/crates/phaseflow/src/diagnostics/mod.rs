//! Analyses of computed trajectories.
//!
//! Everything here is a pure function of finished traces and fields:
//! energy-inequality checks, ω-limit detection, decay-rate and Łojasiewicz
//! fits, windowed bound monitors and two-trajectory stability gaps.

mod dissipation;
mod gap;
mod lojasiewicz;
mod monitor;
mod omega;
mod phi;
mod rate;
mod trace;

pub use dissipation::{check_dissipation, check_trace_dissipation, DissipationReport, Violation};
pub use gap::{stability_gap, StabilityGap};
pub use lojasiewicz::{
    estimate_from_samples, estimate_lojasiewicz, field_samples, trajectory_samples, LojFit, LojSample,
    ScalarGradientFlow, ENERGY_FLOOR, MIN_LOJ_SAMPLES,
};
pub use monitor::{growing, monitor_bounds, MonitorReport, WindowNorms, MONITOR_NAMES};
pub use omega::{detect_omega_limit, OmegaThresholds, OmegaVerdict, Verdict};
pub use phi::{phi_increases, phi_series, tail_test, TailReport};
pub use rate::{distance_series, fit_rate, fit_rate_series, predicted_exponent, RateFit, MIN_FIT_POINTS};
pub use trace::{EnergyTrace, TraceRow, CSV_HEADER};
