//! Stiffness-reducing variable transformations.
//!
//! Near a stochastically stationary point `c` (`f(c) = g(c) = 0`) the model
//! behaves like `dz = f'(c) z dt + g'(c) z ∘ dW`. The map
//! `Y = (±(y − c))^{−1/f'(c)}` turns that linear equation into
//! `dZ = −Z dt − (g'(c)/f'(c)) Z ∘ dW`, whose decay rate is 1 whatever
//! `f'(c)` was. Applied to the full nonlinear model (Stratonovich calculus,
//! so the ordinary chain rule holds) it gives
//!
//! ```text
//! dY = ∓(1/f'(c)) Y^{1+f'(c)} f(c ± Y^{−f'(c)}) dt ∓ (1/f'(c)) Y^{1+f'(c)} g(c ± Y^{−f'(c)}) ∘ dW
//! ```
//!
//! with the upper signs on the branch `y > c` and the lower ones on `y < c`.
//!
//! The transformed coefficients are evaluated as `−(Y/f'(c))·q(±u)` with
//! `u = Y^{−f'(c)}` and `q(z) = f(c + z)/z`, which stays accurate when `u`
//! is far below the resolution of `c`. Off the branch (`Y < 0`) both
//! coefficients are continued as odd functions of `Y`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::models::LinearParams;
use crate::sde::{signed_pow, Calculus, Coefficients, Domain, SdeModel};
use crate::trajectory::Trajectory;

/// Absolute tolerance on `|f(c)|` and `|g(c)|` for a stationary point.
pub const STATIONARITY_TOLERANCE: f64 = 1e-10;

/// Below this displacement `f(c + z)/z` is replaced by its limit `f'(c)`.
const RATIO_CUTOFF: f64 = 1e-290;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `y > c`
    Above,
    /// `y < c`
    Below,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Above => 1.0,
            Branch::Below => -1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Branch::Above => "above",
            Branch::Below => "below",
        }
    }
}

/// Forward and inverse maps `y ↔ Y` around a stationary point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformPair {
    pub c: f64,
    /// `f'(c)`, negative.
    pub rate: f64,
    /// `−1/f'(c)`.
    pub exponent: f64,
    pub branch: Branch,
}

impl TransformPair {
    /// `Y = (±(y − c))^{−1/f'(c)}`; off-branch states map to `Y < 0`.
    pub fn forward(&self, y: f64) -> f64 {
        signed_pow(self.branch.sign() * (y - self.c), self.exponent)
    }

    /// `y = c ± Y^{−f'(c)}`.
    pub fn inverse(&self, big_y: f64) -> f64 {
        self.c + self.branch.sign() * signed_pow(big_y, -self.rate)
    }

    /// `dY/dy` at `y`.
    pub fn forward_deriv(&self, y: f64) -> f64 {
        let d = self.branch.sign() * (y - self.c);
        self.branch.sign() * self.exponent * d.abs().powf(self.exponent - 1.0)
    }
}

/// Linear coefficients `(f'(c), g'(c))` at a stationary point `c`.
pub fn linearize_at(model: &SdeModel, c: f64) -> Result<LinearParams> {
    let local = model.local(c)?;
    if local.drift.abs() > STATIONARITY_TOLERANCE || local.diffusion.abs() > STATIONARITY_TOLERANCE
    {
        return Err(Error::NotStationary {
            c,
            drift: local.drift,
            diffusion: local.diffusion,
        });
    }
    Ok(LinearParams::new(local.drift_deriv, local.diffusion_deriv))
}

pub fn make_transform(c: f64, rate: f64, branch: Branch) -> Result<TransformPair> {
    if !(rate < 0.0) || !rate.is_finite() || !c.is_finite() {
        return Err(Error::UnsupportedRate(rate));
    }
    Ok(TransformPair {
        c,
        rate,
        exponent: -1.0 / rate,
        branch,
    })
}

/// The transformation of the protein model at `x = 1`, `X = (1 − x)^{1/(1+λ)}`.
pub fn protein_transform(lambda: f64) -> Result<TransformPair> {
    make_transform(1.0, -(1.0 + lambda), Branch::Below)
}

/// Transform `model` about its stationary point `c` on the given branch.
///
/// The rate `f'(c)` comes from the model's own derivative. The returned
/// model lives on the whole real line; evaluating it where the original
/// model is undefined reports a domain error.
pub fn transform_model(
    model: &SdeModel,
    c: f64,
    branch: Branch,
) -> Result<(SdeModel, TransformPair)> {
    if model.calculus() != Calculus::Stratonovich {
        return Err(Error::SchemeMismatch(format!(
            "the change of variables uses the ordinary chain rule and needs a Stratonovich model, `{}` is Itô",
            model.label()
        )));
    }
    let lin = linearize_at(model, c)?;
    let pair = make_transform(c, lin.a, branch)?;
    let rate = lin.a;
    let dg_c = lin.b;
    let power = -rate;
    let sign = branch.sign();
    let source = Arc::new(model.clone());

    // Displacement from c for |Y|, plus the ratios f(c+z)/z and g(c+z)/z
    // with f'(c + z), g'(c + z). NaNs flag evaluation failures and surface
    // as domain errors of the transformed model.
    let local = move |big_y: f64| -> [f64; 4] {
        let z = sign * big_y.abs().powf(power);
        match source.local_displaced(c, z) {
            Ok(l) if z.abs() < RATIO_CUTOFF => [rate, dg_c, l.drift_deriv, l.diffusion_deriv],
            Ok(l) => [l.drift / z, l.diffusion / z, l.drift_deriv, l.diffusion_deriv],
            Err(_) => [f64::NAN; 4],
        }
    };
    let scale = 1.0 + rate;

    let l = local.clone();
    let drift = move |y: f64| -(y / rate) * l(y)[0];
    let l = local.clone();
    let diffusion = move |y: f64| -(y / rate) * l(y)[1];
    let l = local.clone();
    let drift_deriv = move |y: f64| {
        let [q, _, df, _] = l(y);
        -(scale / rate) * q + df
    };
    let l = local;
    let diffusion_deriv = move |y: f64| {
        let [_, q, _, dg] = l(y);
        -(scale / rate) * q + dg
    };

    let label = format!(
        "{}|transform(c={c},rate={rate},branch={})",
        model.label(),
        branch.name()
    );
    let transformed = SdeModel::new(
        label,
        Domain::real_line(),
        Coefficients::new(drift, drift_deriv, diffusion, diffusion_deriv),
    );
    Ok((transformed, pair))
}

/// Outcome of [`check_branch`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BranchReport {
    Clean,
    /// First index whose side of `c` differs from the initial state's.
    /// Touching `c` exactly counts as a violation.
    Violation { index: usize, state: f64 },
}

impl BranchReport {
    pub fn is_clean(&self) -> bool {
        matches!(self, BranchReport::Clean)
    }
}

pub fn check_branch(traj: &Trajectory, c: f64) -> BranchReport {
    let side = |y: f64| {
        if y > c {
            1
        } else if y < c {
            -1
        } else {
            0
        }
    };
    let Some(&first) = traj.states().first() else {
        return BranchReport::Clean;
    };
    let start = side(first);
    traj.states()
        .iter()
        .enumerate()
        .find(|&(_, &y)| side(y) != start || side(y) == 0)
        .map_or(BranchReport::Clean, |(index, &state)| BranchReport::Violation {
            index,
            state,
        })
}
