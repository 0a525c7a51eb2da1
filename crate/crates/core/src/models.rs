//! Protein kinetic models, their transformed forms and the linear test
//! equation with its closed-form solution.

use crate::brownian::BrownianGrid;
use crate::error::{Error, Result};
use crate::sde::{signed_pow, Coefficients, Domain, SdeModel};
use crate::trajectory::Trajectory;

/// Default half-width of the band around `X = 0` excluded from the
/// transformed model when its `X^{-λ}` term is singular.
pub const DEFAULT_SINGULAR_GUARD: f64 = 1e-12;

/// Parameters of `dx = (α − x + λx(1−x)) dt + σx(1−x) ∘ dW`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProteinParams {
    pub alpha: f64,
    pub lambda: f64,
    pub sigma: f64,
    pub x0: f64,
}

impl ProteinParams {
    /// `α = 1`, `x0 = 0.2`.
    pub fn new(lambda: f64, sigma: f64) -> Self {
        ProteinParams {
            alpha: 1.0,
            lambda,
            sigma,
            x0: 0.2,
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_x0(mut self, x0: f64) -> Self {
        self.x0 = x0;
        self
    }

    fn validate(&self) -> Result<()> {
        let finite = [self.alpha, self.lambda, self.sigma, self.x0]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::parameter("protein parameters must be finite"));
        }
        if !(self.alpha > 0.0) {
            return Err(Error::parameter(format!("alpha must be > 0, got {}", self.alpha)));
        }
        if self.sigma < 0.0 {
            return Err(Error::parameter(format!("sigma must be >= 0, got {}", self.sigma)));
        }
        Ok(())
    }

    fn validate_for_transform(&self) -> Result<()> {
        self.validate()?;
        if !(self.lambda > -1.0) {
            return Err(Error::parameter(format!(
                "the transformation needs lambda > -1, got {}",
                self.lambda
            )));
        }
        Ok(())
    }

    /// Stable equilibrium of the noise-free drift: the larger root of
    /// `α − x + λx(1−x) = 0` (and `x = α` when `λ = 0`).
    pub fn deterministic_equilibrium(&self) -> f64 {
        let (a, l) = (self.alpha, self.lambda);
        if l == 0.0 {
            return a;
        }
        if a == 1.0 {
            return 1.0;
        }
        let disc = ((l - 1.0) * (l - 1.0) + 4.0 * l * a).sqrt();
        ((l - 1.0) + disc) / (2.0 * l)
    }
}

/// Parameters of `dz = a z dt + b z ∘ dW`, `z(0) = z0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearParams {
    pub a: f64,
    pub b: f64,
    pub z0: f64,
}

impl LinearParams {
    pub fn new(a: f64, b: f64) -> Self {
        LinearParams { a, b, z0: 1.0 }
    }

    pub fn with_z0(mut self, z0: f64) -> Self {
        self.z0 = z0;
        self
    }

    /// Linearization of the protein model at `x = 1` in `z = 1 − x`:
    /// `a = −λ − 1`, `b = −σ`.
    pub fn linearized_protein(lambda: f64, sigma: f64) -> Self {
        LinearParams::new(-lambda - 1.0, -sigma)
    }

    /// The same equation after the stiffness-reducing transformation:
    /// `a = −1`, `b = −σ/(1+λ)`.
    pub fn transformed_linearized_protein(lambda: f64, sigma: f64) -> Self {
        LinearParams::new(-1.0, -sigma / (1.0 + lambda))
    }
}

/// The protein kinetic model. Its closures are written in `z = x − 1`, the
/// displacement from the stationary point of the `α = 1` case. The domain
/// is the whole real line; the physically meaningful proportions are
/// `(0, 1)`.
pub fn build_protein_model(p: &ProteinParams) -> Result<SdeModel> {
    p.validate()?;
    let ProteinParams {
        alpha,
        lambda,
        sigma,
        ..
    } = *p;
    let shift = alpha - 1.0;
    // x = 1 + z:  α − x + λx(1−x) = (α−1) − z(1 + λ + λz)
    let drift = move |z: f64| {
        let lin = -z * (1.0 + lambda + lambda * z);
        if shift == 0.0 {
            lin
        } else {
            shift + lin
        }
    };
    let drift_deriv = move |z: f64| -1.0 - lambda - 2.0 * lambda * z;
    // σx(1−x) = −σz(1+z)
    let diffusion = move |z: f64| -sigma * z * (1.0 + z);
    let diffusion_deriv = move |z: f64| -sigma * (1.0 + 2.0 * z);
    let coeffs = Coefficients::new(drift, drift_deriv, diffusion, diffusion_deriv)
        .with_diffusion_second(move |_| -2.0 * sigma);
    Ok(SdeModel::centered(
        format!("protein(alpha={alpha},lambda={lambda},sigma={sigma};physical x in (0,1))"),
        Domain::real_line(),
        1.0,
        coeffs,
    ))
}

/// `dz = a z dt + b z ∘ dW`.
pub fn build_linear_model(p: &LinearParams) -> SdeModel {
    let LinearParams { a, b, .. } = *p;
    let coeffs = Coefficients::new(move |z| a * z, move |_| a, move |z| b * z, move |_| b)
        .with_diffusion_second(|_| 0.0);
    SdeModel::new(format!("linear(a={a},b={b})"), Domain::real_line(), coeffs)
}

/// The protein model rewritten in `X = (1 − x)^{1/(1+λ)}`:
///
/// ```text
/// dX = ((1−α)/(1+λ) X^{−λ} − X + λ/(1+λ) X^{2+λ}) dt − σ/(1+λ) (X − X^{2+λ}) ∘ dW
/// ```
///
/// Non-integer powers use the odd extension `sgn(X)|X|^p`. For `α = 1` the
/// `X^{−λ}` term is dropped outright.
pub fn build_transformed_protein_model(p: &ProteinParams) -> Result<SdeModel> {
    build_transformed_protein_model_with_guard(p, DEFAULT_SINGULAR_GUARD)
}

/// As [`build_transformed_protein_model`], excluding `|X| < guard` from the
/// domain whenever `α ≠ 1` and `λ > 0`.
pub fn build_transformed_protein_model_with_guard(
    p: &ProteinParams,
    guard: f64,
) -> Result<SdeModel> {
    p.validate_for_transform()?;
    if !(guard >= 0.0) {
        return Err(Error::parameter(format!("guard must be >= 0, got {guard}")));
    }
    let ProteinParams {
        alpha,
        lambda,
        sigma,
        ..
    } = *p;
    let inv = 1.0 / (1.0 + lambda);
    let source = (1.0 - alpha) * inv;
    let k = lambda * inv;
    let s = sigma * inv;
    let e = 2.0 + lambda;
    let has_source = alpha != 1.0;

    let drift = move |x: f64| {
        let core = -x + k * signed_pow(x, e);
        if has_source {
            source * signed_pow(x, -lambda) + core
        } else {
            core
        }
    };
    let drift_deriv = move |x: f64| {
        let core = -1.0 + k * e * x.abs().powf(e - 1.0);
        if has_source {
            -lambda * source * x.abs().powf(-lambda - 1.0) + core
        } else {
            core
        }
    };
    let diffusion = move |x: f64| -s * (x - signed_pow(x, e));
    let diffusion_deriv = move |x: f64| -s * (1.0 - e * x.abs().powf(e - 1.0));
    let diffusion_second = move |x: f64| s * e * (e - 1.0) * signed_pow(x, e - 2.0);

    let mut domain = Domain::real_line();
    if has_source && lambda > 0.0 {
        domain = domain.excluding_zero_band(guard);
    }
    let coeffs = Coefficients::new(drift, drift_deriv, diffusion, diffusion_deriv)
        .with_diffusion_second(diffusion_second);
    Ok(SdeModel::new(
        format!("transformed-protein(alpha={alpha},lambda={lambda},sigma={sigma})"),
        domain,
        coeffs,
    ))
}

/// `z(t) = z0 · exp(a t + b W(t))` sampled on every point of `grid`.
pub fn exact_linear_solution(p: &LinearParams, grid: &BrownianGrid) -> Trajectory {
    let dt = grid.dt();
    let states = (0..=grid.steps())
        .map(|k| {
            if k == 0 {
                p.z0
            } else {
                p.z0 * (p.a * (k as f64 * dt) + p.b * grid.path_value(k)).exp()
            }
        })
        .collect();
    Trajectory::new(
        dt,
        states,
        format!("linear(a={},b={})", p.a, p.b),
        "exact",
    )
}
