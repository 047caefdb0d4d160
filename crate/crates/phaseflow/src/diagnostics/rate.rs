use serde::Serialize;

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::grid::Field;
use crate::norms::h_norm;

/// Minimum number of points in the fit window.
pub const MIN_FIT_POINTS: usize = 10;

/// Fitted decay `‖χ(t) - χ∞‖_H ≤ c* t^{-β}` for `t ≥ t*`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateFit {
    /// Power-law exponent; `f64::INFINITY` when the data decay exponentially.
    #[serde(serialize_with = "serialize_beta")]
    pub beta: f64,
    /// Smallest `c` with `d(t) ≤ c t^{-β}` (or `c e^{-rate t}`) on the window.
    pub c_star: f64,
    /// Start of the fit window.
    pub t_star: f64,
    pub points: usize,
    /// RMS residual of the chosen least-squares fit in `log d`.
    pub fit_residual: f64,
    /// Rate `a` of the exponential fit `d ≈ c e^{-a t}`.
    pub exponential_rate: f64,
    /// `ζ/(1 - 2ζ)` for a supplied `ζ` (infinite at `ζ = 1/2`).
    pub predicted: Option<f64>,
    /// `|β - ζ/(1 - 2ζ)|`.
    pub consistency_gap: Option<f64>,
    /// When the source tail exponent `δ` is too small for the `ζ` rate
    /// (`δ ≤ 2ζ/(1-2ζ)`): the supremum `δ/(2(1+δ))` of admissible `ζ₀`.
    pub zeta0: Option<f64>,
    /// `ζ₀/(1 - 2ζ₀)`, the exponent guaranteed in that case.
    pub fallback_exponent: Option<f64>,
}

fn serialize_beta<S: serde::Serializer>(b: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if b.is_finite() {
        s.serialize_f64(*b)
    } else {
        s.serialize_str("inf")
    }
}

/// `ζ/(1 - 2ζ)`.
pub fn predicted_exponent(zeta: f64) -> f64 {
    if zeta >= 0.5 {
        f64::INFINITY
    } else {
        zeta / (1.0 - 2.0 * zeta)
    }
}

/// Least squares `y ≈ a + b x`; returns `(a, b, rms residual)`.
pub(crate) fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let a = my - b * mx;
    let rms = (x.iter().zip(y).map(|(u, v)| (v - a - b * u).powi(2)).sum::<f64>() / n).sqrt();
    (a, b, rms)
}

/// Fits the decay of the series `dist(t)` over its final decade in time.
///
/// Points with `t ≤ 0` or with `dist` below `1e-13` of its maximum (the
/// round-off floor) are discarded first. Both a power law (`log d` vs
/// `log t`) and an exponential (`log d` vs `t`) are fitted; the one with the
/// smaller residual wins, and an exponential win is reported as
/// `β = ∞`.
pub fn fit_rate_series(t: &[f64], dist: &[f64], zeta: Option<f64>, delta_src: Option<f64>) -> Result<RateFit> {
    let dmax = dist.iter().cloned().filter(|d| d.is_finite()).fold(0.0, f64::max);
    let pts: Vec<(f64, f64)> = t
        .iter()
        .zip(dist)
        .filter(|(t, d)| **t > 0.0 && d.is_finite() && **d > 1e-13 * dmax && **d > 0.0)
        .map(|(a, b)| (*a, *b))
        .collect();
    if pts.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientDecay(format!(
            "only {} usable points, need {MIN_FIT_POINTS}",
            pts.len()
        )));
    }
    let (lo, hi) = pts
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), (_, d)| (lo.min(*d), hi.max(*d)));
    if hi < 10.0 * lo {
        return Err(Error::InsufficientDecay(format!(
            "distance spans {:.3} decades, need at least one",
            (hi / lo).log10()
        )));
    }
    let t_end = pts.last().unwrap().0;
    let t_star = t_end / 10.0;
    let window: Vec<(f64, f64)> = pts.iter().cloned().filter(|(t, _)| *t >= t_star).collect();
    if window.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientDecay(format!(
            "final decade [{t_star}, {t_end}] holds {} points, need {MIN_FIT_POINTS}",
            window.len()
        )));
    }
    let ld: Vec<f64> = window.iter().map(|(_, d)| d.ln()).collect();
    let lt: Vec<f64> = window.iter().map(|(t, _)| t.ln()).collect();
    let tt: Vec<f64> = window.iter().map(|(t, _)| *t).collect();
    let (_, slope_p, res_p) = linear_fit(&lt, &ld);
    let (_, slope_e, res_e) = linear_fit(&tt, &ld);
    let exponential_rate = -slope_e;
    let (beta, c_star, fit_residual) = if res_e < res_p && exponential_rate > 0.0 {
        let c = window
            .iter()
            .map(|(t, d)| d * (exponential_rate * t).exp())
            .fold(0.0, f64::max);
        (f64::INFINITY, c, res_e)
    } else {
        let beta = -slope_p;
        let c = window.iter().map(|(t, d)| d * t.powf(beta)).fold(0.0, f64::max);
        (beta, c, res_p)
    };
    let predicted = zeta.map(predicted_exponent);
    let consistency_gap = predicted.map(|p| {
        if p.is_infinite() && beta.is_infinite() {
            0.0
        } else {
            (beta - p).abs()
        }
    });
    let (zeta0, fallback_exponent) = match (zeta, delta_src) {
        (Some(z), Some(d)) if d <= 2.0 * predicted_exponent(z) => {
            let z0 = (d / (2.0 * (1.0 + d))).min(z);
            (Some(z0), Some(predicted_exponent(z0)))
        }
        _ => (None, None),
    };
    Ok(RateFit {
        beta,
        c_star,
        t_star,
        points: window.len(),
        fit_residual,
        exponential_rate,
        predicted,
        consistency_gap,
        zeta0,
        fallback_exponent,
    })
}

/// `‖χ(t) - χ∞‖_H` over the stored fields of a trajectory.
pub fn distance_series(traj: &Trajectory, chi_inf: &Field) -> Result<(Vec<f64>, Vec<f64>)> {
    if **chi_inf.grid() != *traj.grid {
        return Err(Error::ConfigMismatch(
            "reference state lives on a different grid".into(),
        ));
    }
    let w = traj.grid.weights();
    let mut t = Vec::with_capacity(traj.fields.len());
    let mut d = Vec::with_capacity(traj.fields.len());
    for s in &traj.fields {
        let diff: Vec<f64> = s.chi.iter().zip(chi_inf.values()).map(|(a, b)| a - b).collect();
        t.push(s.t);
        d.push(h_norm(&w, &diff));
    }
    Ok((t, d))
}

/// Fits the decay of `‖χ(t) - χ∞‖_H` along a trajectory's stored fields.
pub fn fit_rate(traj: &Trajectory, chi_inf: &Field, zeta: Option<f64>) -> Result<RateFit> {
    let (t, d) = distance_series(traj, chi_inf)?;
    fit_rate_series(&t, &d, zeta, None)
}
