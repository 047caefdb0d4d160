//! Simulation and long-time diagnostics for generalized phase-field systems
//!
//! ```text
//! θ_t + λ(χ)_t − Δ j'(θ) = f
//! χ_t − Δχ + W'(χ) = λ'(χ) j'(θ)
//! ```
//!
//! with a convex heat-flux law `j`, a nonconvex potential `W` and a latent
//! heat `λ`. The crate is organized bottom-up:
//!
//! * [`model`]: constitutive functions, hypothesis checks, regularization.
//! * [`grid`], [`operators`], [`norms`], [`snapshot`]: uniform box grids,
//!   finite-difference operators under Neumann / Dirichlet / Robin conditions,
//!   discrete norms and the `PFLD` field file format.
//! * [`dynamics`]: the energy-stable time stepper, its brute-force oracle and
//!   the trajectory driver.
//! * [`steady`]: stationary solutions `-Δχ + W'(χ) = 0`.
//! * [`diagnostics`]: dissipation checks, ω-limit detection, Łojasiewicz and
//!   decay-rate fits, uniform-bound monitors, stability gaps.
//! * [`config`] and [`runner`]: the experiment file format and the pipelines
//!   behind the `phaseflow` binary.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::needless_range_loop,
    clippy::type_complexity
)]

pub mod config;
pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod grid;
pub mod linalg;
pub mod model;
pub mod norms;
pub mod operators;
pub mod runner;
pub mod schedule;
pub mod snapshot;
pub mod steady;

pub use error::{Error, Result};
