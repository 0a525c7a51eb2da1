//! Explicit Euler and the stochastic midpoint rule.
//!
//! The midpoint rule
//!
//! ```text
//! x_{n+1} = x_n + h f(m) + g(m) ΔW_n,   m = (x_n + x_{n+1}) / 2
//! ```
//!
//! is solved by plain fixed-point iteration started from `x_n`, a fixed
//! number of sweeps per step (10 by default). The iteration contracts only
//! while `h·L/2 < 1` for the local Lipschitz constant `L`; past that bound
//! the last iterate is returned as-is, which is exactly how stiff problems
//! degrade at large steps.

use std::fmt;
use std::str::FromStr;

use crate::brownian::BrownianGrid;
use crate::error::{Error, Result};
use crate::sde::{stratonovich_to_ito, Calculus, SdeModel};
use crate::trajectory::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    Euler,
    Midpoint,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Euler => "euler",
            Scheme::Midpoint => "midpoint",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euler" => Ok(Scheme::Euler),
            "midpoint" => Ok(Scheme::Midpoint),
            other => Err(Error::parameter(format!("unknown scheme `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MidpointOptions {
    pub fixed_point_iterations: usize,
    /// Stop early once `|x^{(k+1)} − x^{(k)}|` drops below this.
    pub residual_tolerance: Option<f64>,
    /// Clamp `|ΔW_n|` to this bound before stepping.
    pub increment_truncation: Option<f64>,
}

impl Default for MidpointOptions {
    fn default() -> Self {
        MidpointOptions {
            fixed_point_iterations: 10,
            residual_tolerance: None,
            increment_truncation: None,
        }
    }
}

impl MidpointOptions {
    pub fn with_iterations(mut self, n: usize) -> Self {
        self.fixed_point_iterations = n;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.fixed_point_iterations == 0 {
            return Err(Error::parameter("fixed_point_iterations must be >= 1"));
        }
        if let Some(tol) = self.residual_tolerance {
            if !(tol >= 0.0) {
                return Err(Error::parameter(format!("residual_tolerance must be >= 0, got {tol}")));
            }
        }
        if let Some(a) = self.increment_truncation {
            if !(a > 0.0) {
                return Err(Error::parameter(format!("increment_truncation must be > 0, got {a}")));
            }
        }
        Ok(())
    }

    fn truncate(&self, dw: f64) -> f64 {
        match self.increment_truncation {
            Some(a) => dw.clamp(-a, a),
            None => dw,
        }
    }
}

/// Result of one midpoint step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MidpointStep {
    pub state: f64,
    pub iterations: usize,
    /// `|x^{(k)} − x^{(k−1)}|` of the last sweep.
    pub residual: f64,
}

/// `x_n + h f(x_n) + g(x_n) ΔW`.
///
/// A noisy step is only consistent for an Itô model; a Stratonovich model
/// with `dw ≠ 0` is refused (convert it with [`stratonovich_to_ito`]).
pub fn euler_step(model: &SdeModel, x: f64, h: f64, dw: f64) -> Result<f64> {
    if dw != 0.0 && model.calculus() == Calculus::Stratonovich {
        return Err(Error::SchemeMismatch(format!(
            "Euler with noise needs the Itô form of `{}`",
            model.label()
        )));
    }
    let (f, g) = model.drift_diffusion(x)?;
    let next = x + h * f + g * dw;
    if next.is_finite() {
        Ok(next)
    } else {
        Err(Error::Divergence {
            state: x,
            residual: f64::INFINITY,
            step: None,
        })
    }
}

pub fn midpoint_step(
    model: &SdeModel,
    x: f64,
    h: f64,
    dw: f64,
    opts: &MidpointOptions,
) -> Result<MidpointStep> {
    if dw != 0.0 && model.calculus() == Calculus::Ito {
        return Err(Error::SchemeMismatch(format!(
            "the midpoint rule is consistent with Stratonovich models, `{}` is Itô",
            model.label()
        )));
    }
    if !model.domain().contains(x) {
        return Err(model.domain_error(x));
    }
    let dw = opts.truncate(dw);
    let mut iterate = x;
    let mut residual = 0.0;
    let mut iterations = 0;
    while iterations < opts.fixed_point_iterations {
        let mid = 0.5 * (x + iterate);
        let (f, g) = model.drift_diffusion(mid).map_err(|e| {
            if model.domain().contains(mid) {
                // finite state, overflowing coefficients
                Error::Divergence {
                    state: iterate,
                    residual,
                    step: None,
                }
            } else {
                e
            }
        })?;
        let next = x + h * f + g * dw;
        iterations += 1;
        if !next.is_finite() {
            return Err(Error::Divergence {
                state: iterate,
                residual,
                step: None,
            });
        }
        if !model.domain().contains(next) {
            return Err(model.domain_error(next));
        }
        residual = (next - iterate).abs();
        iterate = next;
        if residual == 0.0 || opts.residual_tolerance.is_some_and(|tol| residual < tol) {
            break;
        }
    }
    Ok(MidpointStep {
        state: iterate,
        iterations,
        residual,
    })
}

/// Integrate `model` from `x0` over `grid`, coarsened to step `h`.
///
/// Euler runs on the Itô form of a Stratonovich model (labelled
/// `euler-maruyama-ito`). Stepping errors carry the index of the step that
/// started from the offending state.
pub fn integrate(
    model: &SdeModel,
    scheme: Scheme,
    x0: f64,
    grid: &BrownianGrid,
    h: f64,
    opts: &MidpointOptions,
) -> Result<Trajectory> {
    opts.validate()?;
    let coarse = grid.with_step(h)?;
    let dt = coarse.dt();
    if !model.domain().contains(x0) {
        return Err(model.domain_error(x0).at_step(0));
    }
    let mut states = Vec::with_capacity(coarse.steps() + 1);
    states.push(x0);
    let mut x = x0;
    match scheme {
        Scheme::Euler => {
            let ito;
            let (stepper, label) = if model.calculus() == Calculus::Stratonovich {
                ito = stratonovich_to_ito(model)?;
                (&ito, "euler-maruyama-ito")
            } else {
                (model, "euler")
            };
            for (n, &dw) in coarse.increments().iter().enumerate() {
                x = euler_step(stepper, x, dt, dw).map_err(|e| e.at_step(n))?;
                states.push(x);
            }
            Ok(Trajectory::new(dt, states, stepper.label(), label))
        }
        Scheme::Midpoint => {
            for (n, &dw) in coarse.increments().iter().enumerate() {
                x = midpoint_step(model, x, dt, dw, opts)
                    .map_err(|e| e.at_step(n))?
                    .state;
                states.push(x);
            }
            let label = format!("midpoint(fp={})", opts.fixed_point_iterations);
            Ok(Trajectory::new(dt, states, model.label(), label))
        }
    }
}
