use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::snapshot::Snapshot;

use super::expr::Expr;

/// Closed-form initial data or a stored field.
///
/// Products over axes use `x_a / L_a`, so the same expression works in one
/// and two dimensions.
#[derive(Debug, Clone, PartialEq)]
pub enum FieldExpr {
    /// `θ∞` of the model (only meaningful for the temperature).
    ThetaInf,
    Constant(f64),
    /// `offset + amplitude · Π_a cos(k π x_a / L_a)`.
    Cosine {
        amplitude: f64,
        k: f64,
        offset: f64,
    },
    /// `offset + amplitude · Π_a sin(k π x_a / L_a)`.
    Sine {
        amplitude: f64,
        k: f64,
        offset: f64,
    },
    /// `offset + amplitude · tanh((x_0 - center) / width)`.
    Tanh {
        center: f64,
        width: f64,
        amplitude: f64,
        offset: f64,
    },
    /// `a + b x_0`.
    Linear {
        a: f64,
        b: f64,
    },
    Snapshot(PathBuf),
}

impl FieldExpr {
    pub fn parse(text: &str) -> std::result::Result<Self, String> {
        let text = text.trim();
        if let Some(rest) = text.strip_prefix("snapshot(") {
            let path = rest
                .strip_suffix(')')
                .ok_or_else(|| format!("missing `)` in `{text}`"))?;
            let path = path.trim().trim_matches('"');
            if path.is_empty() {
                return Err("snapshot() needs a path".into());
            }
            return Ok(FieldExpr::Snapshot(PathBuf::from(path)));
        }
        let e = Expr::parse(text)?;
        let f = match e.name.as_str() {
            "theta_inf" => {
                e.check_args(&[])?;
                FieldExpr::ThetaInf
            }
            "constant" => {
                e.check_args(&["value"])?;
                FieldExpr::Constant(e.num("value", 0, None)?)
            }
            "cosine" | "sine" => {
                e.check_args(&["amplitude", "k", "offset"])?;
                let amplitude = e.num("amplitude", 0, None)?;
                let k = e.num("k", 1, Some(1.0))?;
                let offset = e.num("offset", 2, Some(0.0))?;
                if e.name == "cosine" {
                    FieldExpr::Cosine { amplitude, k, offset }
                } else {
                    FieldExpr::Sine { amplitude, k, offset }
                }
            }
            "tanh" => {
                e.check_args(&["center", "width", "amplitude", "offset"])?;
                let width = e.num("width", 1, None)?;
                if !(width > 0.0) {
                    return Err(format!("tanh: width must be positive, got {width}"));
                }
                FieldExpr::Tanh {
                    center: e.num("center", 0, None)?,
                    width,
                    amplitude: e.num("amplitude", 2, Some(1.0))?,
                    offset: e.num("offset", 3, Some(0.0))?,
                }
            }
            "linear" => {
                e.check_args(&["a", "b"])?;
                FieldExpr::Linear {
                    a: e.num("a", 0, None)?,
                    b: e.num("b", 1, None)?,
                }
            }
            other => return Err(format!("unknown field expression `{other}`")),
        };
        Ok(f)
    }

    /// Samples the expression on `grid`. Snapshot paths are resolved against
    /// `base_dir` and must match the grid.
    pub fn eval(&self, grid: &Arc<Grid>, theta_inf: f64, base_dir: &Path) -> Result<Field> {
        let ext = grid.extents().to_vec();
        let dim = grid.dim();
        let prod = move |x: [f64; 2], k: f64, f: fn(f64) -> f64| -> f64 {
            (0..dim).map(|a| f(k * PI * x[a] / ext[a])).product()
        };
        let g = Arc::clone(grid);
        Ok(match *self {
            FieldExpr::ThetaInf => Field::constant(g, theta_inf),
            FieldExpr::Constant(c) => Field::constant(g, c),
            FieldExpr::Cosine { amplitude, k, offset } => {
                Field::from_fn(g, |x, y| offset + amplitude * prod([x, y], k, f64::cos))
            }
            FieldExpr::Sine { amplitude, k, offset } => {
                Field::from_fn(g, |x, y| offset + amplitude * prod([x, y], k, f64::sin))
            }
            FieldExpr::Tanh {
                center,
                width,
                amplitude,
                offset,
            } => Field::from_fn(g, |x, _| offset + amplitude * ((x - center) / width).tanh()),
            FieldExpr::Linear { a, b } => Field::from_fn(g, |x, _| a + b * x),
            FieldExpr::Snapshot(ref p) => {
                let path = base_dir.join(p);
                let snap = Snapshot::read(&path)?;
                if snap.grid != **grid {
                    return Err(Error::ConfigMismatch(format!(
                        "{} was written on a different grid",
                        path.display()
                    )));
                }
                Field::new(g, snap.values)?
            }
        })
    }
}
