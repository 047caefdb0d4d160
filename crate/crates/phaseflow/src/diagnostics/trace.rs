use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

/// Columns of `trace.csv`, in order.
pub const CSV_HEADER: &str = "t,energy,norm_u_V,norm_chit_H,dist_theta_H,stationary_residual,newton_iters";

/// One row of an energy trace.
///
/// The first seven fields are the `trace.csv` columns. The rest are kept in
/// memory for the diagnostics and are `NaN` for traces read back from CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    pub t: f64,
    pub energy: f64,
    pub norm_u_v: f64,
    pub norm_chit_h: f64,
    pub dist_theta_h: f64,
    pub stationary_residual: f64,
    pub newton_iters: usize,

    pub step: usize,
    /// Length of the last step.
    pub dt: f64,
    /// `½∫|∇χ|² + ∫W(χ)`.
    pub energy_chi: f64,
    /// `∫j(θ)`.
    pub energy_theta: f64,
    /// `‖g(t)‖²` in the dual norm of `B`.
    pub g_dual_sq: f64,
    /// `Σ Δt ‖g(t_{k+1})‖²` over the steps since the previous row.
    pub source_work: f64,
    /// `Σ Δt ‖θ_t‖²_H` over the steps since the previous row.
    pub thetat_sq_int: f64,
    pub norm_thetat_h: f64,
    pub norm_theta_v: f64,
    /// `‖Aχ‖_H + ‖χ‖_V`, a discrete `H²` norm.
    pub norm_chi_h2: f64,
    pub norm_wprime_h: f64,
    /// `∫(θ + λ(χ))`.
    pub internal_energy: f64,
}

impl TraceRow {
    /// A row with only the CSV columns filled in.
    pub fn from_csv_columns(cols: [f64; 6], newton_iters: usize) -> Self {
        TraceRow {
            t: cols[0],
            energy: cols[1],
            norm_u_v: cols[2],
            norm_chit_h: cols[3],
            dist_theta_h: cols[4],
            stationary_residual: cols[5],
            newton_iters,
            step: 0,
            dt: f64::NAN,
            energy_chi: f64::NAN,
            energy_theta: f64::NAN,
            g_dual_sq: f64::NAN,
            source_work: f64::NAN,
            thetat_sq_int: f64::NAN,
            norm_thetat_h: f64::NAN,
            norm_theta_v: f64::NAN,
            norm_chi_h2: f64::NAN,
            norm_wprime_h: f64::NAN,
            internal_energy: f64::NAN,
        }
    }
}

/// Time series of [`TraceRow`]s with strictly increasing times.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct EnergyTrace {
    pub rows: Vec<TraceRow>,
}

impl EnergyTrace {
    pub fn new(rows: Vec<TraceRow>) -> Result<Self> {
        if rows.windows(2).any(|w| !(w[1].t > w[0].t)) {
            return Err(Error::InvalidParameter(
                "trace times must be strictly increasing".into(),
            ));
        }
        Ok(EnergyTrace { rows })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.t).collect()
    }

    pub fn energies(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.energy).collect()
    }

    pub fn last(&self) -> Option<&TraceRow> {
        self.rows.last()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(64 * (self.rows.len() + 1));
        s.push_str(CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            writeln!(
                s,
                "{},{},{},{},{},{},{}",
                r.t, r.energy, r.norm_u_v, r.norm_chit_h, r.dist_theta_h, r.stationary_residual, r.newton_iters
            )
            .unwrap();
        }
        s
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == CSV_HEADER => {}
            _ => {
                return Err(Error::ParseError {
                    line: 1,
                    message: format!("expected header `{CSV_HEADER}`"),
                })
            }
        }
        let mut rows = Vec::new();
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let bad = |m: String| Error::ParseError {
                line: i + 1,
                message: m,
            };
            let parts: Vec<&str> = line.split(',').collect();
            if parts.len() != 7 {
                return Err(bad(format!("expected 7 columns, found {}", parts.len())));
            }
            let mut cols = [0.0; 6];
            for (c, p) in cols.iter_mut().zip(&parts) {
                *c = p.trim().parse().map_err(|_| bad(format!("not a number: `{p}`")))?;
            }
            let iters = parts[6]
                .trim()
                .parse()
                .map_err(|_| bad(format!("not an iteration count: `{}`", parts[6])))?;
            rows.push(TraceRow::from_csv_columns(cols, iters));
        }
        EnergyTrace::new(rows)
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse_csv(&fs::read_to_string(path)?)
    }
}
