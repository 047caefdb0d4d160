use serde::Serialize;

use super::trace::{EnergyTrace, TraceRow};

/// Windows compared by the growth detector.
pub const TREND_WINDOWS: usize = 10;
/// Per-window growth factor above which a monotone run is flagged.
pub const TREND_GROWTH: f64 = 1.1;

/// Norms tracked per unit time window `[s + k, s + k + 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct WindowNorms {
    pub start: f64,
    /// `‖θ_t‖_{L²(window; H)}`.
    pub thetat_l2: f64,
    pub theta_v: f64,
    pub u_v: f64,
    pub chit_h: f64,
    /// `‖Aχ‖_H + ‖χ‖_V`.
    pub chi_h2: f64,
    pub wprime_h: f64,
}

impl WindowNorms {
    fn values(&self) -> [f64; 6] {
        [
            self.thetat_l2,
            self.theta_v,
            self.u_v,
            self.chit_h,
            self.chi_h2,
            self.wprime_h,
        ]
    }
}

pub const MONITOR_NAMES: [&str; 6] = ["thetat_l2_window", "theta_V", "u_V", "chit_H", "chi_H2", "Wprime_H"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonitorReport {
    pub s: f64,
    /// Sup over windows of each tracked norm.
    pub sup: WindowNorms,
    /// `‖θ_t‖_{L²(s, T; H)}` over the simulated horizon.
    pub thetat_l2_tail: f64,
    pub windows: Vec<WindowNorms>,
    /// Names of the norms flagged as growing without bound.
    pub unbounded_trend: Vec<String>,
    /// Whether the trace covers `[0, s + 2]`.
    pub coverage_ok: bool,
    pub all_finite: bool,
}

/// Whether the last few entries grow monotonically by more than
/// [`TREND_GROWTH`] per window on average.
pub fn growing(series: &[f64]) -> bool {
    let k = series.len().min(TREND_WINDOWS);
    if k < 3 {
        return false;
    }
    let tail = &series[series.len() - k..];
    if tail.windows(2).any(|w| !(w[1] > w[0])) || !(tail[0] > 0.0) {
        return false;
    }
    let ratio = (tail[k - 1] / tail[0]).powf(1.0 / (k - 1) as f64);
    ratio > TREND_GROWTH
}

/// Windowed sup norms over `t ≥ s`.
pub fn monitor_bounds(trace: &EnergyTrace, s: f64) -> MonitorReport {
    let rows: Vec<&TraceRow> = trace.rows.iter().filter(|r| r.t >= s).collect();
    let t_last = trace.last().map_or(0.0, |r| r.t);
    let mut windows: Vec<WindowNorms> = Vec::new();
    let mut tail = 0.0;
    for r in &rows {
        let k = ((r.t - s).floor().max(0.0)) as usize;
        while windows.len() <= k {
            windows.push(WindowNorms {
                start: s + windows.len() as f64,
                ..Default::default()
            });
        }
        let w = &mut windows[k];
        // θ_t integrals accumulate over the steps ending at this row.
        if r.t > s {
            w.thetat_l2 += r.thetat_sq_int;
            tail += r.thetat_sq_int;
        }
        w.theta_v = w.theta_v.max(r.norm_theta_v);
        w.u_v = w.u_v.max(r.norm_u_v);
        w.chit_h = w.chit_h.max(r.norm_chit_h);
        w.chi_h2 = w.chi_h2.max(r.norm_chi_h2);
        w.wprime_h = w.wprime_h.max(r.norm_wprime_h);
    }
    for w in &mut windows {
        w.thetat_l2 = w.thetat_l2.sqrt();
    }
    let mut sup = WindowNorms {
        start: s,
        ..Default::default()
    };
    for w in &windows {
        sup.thetat_l2 = sup.thetat_l2.max(w.thetat_l2);
        sup.theta_v = sup.theta_v.max(w.theta_v);
        sup.u_v = sup.u_v.max(w.u_v);
        sup.chit_h = sup.chit_h.max(w.chit_h);
        sup.chi_h2 = sup.chi_h2.max(w.chi_h2);
        sup.wprime_h = sup.wprime_h.max(w.wprime_h);
    }
    // Only complete windows take part in the trend test.
    let complete: Vec<&WindowNorms> = windows.iter().filter(|w| w.start + 1.0 <= t_last + 1e-9).collect();
    let unbounded_trend = (0..6)
        .filter(|&i| growing(&complete.iter().map(|w| w.values()[i]).collect::<Vec<_>>()))
        .map(|i| MONITOR_NAMES[i].to_string())
        .collect();
    let all_finite = sup.values().iter().all(|v| v.is_finite()) && tail.is_finite();
    MonitorReport {
        s,
        sup,
        thetat_l2_tail: tail.sqrt(),
        windows,
        unbounded_trend,
        coverage_ok: trace.rows.first().is_some_and(|r| r.t <= 0.0) && t_last >= s + 2.0,
        all_finite,
    }
}
