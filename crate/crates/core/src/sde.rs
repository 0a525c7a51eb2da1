//! Scalar SDE models `dy = f(y) dt + g(y) ∘ dW`.
//!
//! A model stores its coefficient functions in *displacement* form: each
//! closure receives `z = y - origin` rather than `y`. Constructors that know
//! a natural anchor (a stationary point, say) pick it as the origin, which
//! lets the transformation code evaluate `f(c + z)` for tiny `z` without
//! first rounding `c + z` back to `c`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// A real scalar function shared between models.
pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Stochastic calculus the diffusion term is interpreted in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Calculus {
    Stratonovich,
    Ito,
}

/// Open interval of admissible states, optionally with a band `|y| < guard`
/// cut out around zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub lower: f64,
    pub upper: f64,
    pub guard: f64,
}

impl Domain {
    pub const fn real_line() -> Self {
        Domain {
            lower: f64::NEG_INFINITY,
            upper: f64::INFINITY,
            guard: 0.0,
        }
    }

    pub fn interval(lower: f64, upper: f64) -> Self {
        Domain {
            lower,
            upper,
            guard: 0.0,
        }
    }

    /// Exclude `|y| < radius` from the domain.
    pub fn excluding_zero_band(mut self, radius: f64) -> Self {
        self.guard = radius;
        self
    }

    pub fn contains(&self, y: f64) -> bool {
        y.is_finite() && y > self.lower && y < self.upper && y.abs() >= self.guard
    }
}

impl Default for Domain {
    fn default() -> Self {
        Domain::real_line()
    }
}

/// Drift, diffusion and their derivatives, all in displacement form.
#[derive(Clone)]
pub struct Coefficients {
    pub drift: ScalarFn,
    pub drift_deriv: ScalarFn,
    pub diffusion: ScalarFn,
    pub diffusion_deriv: ScalarFn,
    /// `g''`, only consulted when deriving the drift derivative of the Itô
    /// form. Falls back to a central difference of `g'` when absent.
    pub diffusion_second: Option<ScalarFn>,
}

impl Coefficients {
    pub fn new(
        drift: impl Fn(f64) -> f64 + Send + Sync + 'static,
        drift_deriv: impl Fn(f64) -> f64 + Send + Sync + 'static,
        diffusion: impl Fn(f64) -> f64 + Send + Sync + 'static,
        diffusion_deriv: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Coefficients {
            drift: Arc::new(drift),
            drift_deriv: Arc::new(drift_deriv),
            diffusion: Arc::new(diffusion),
            diffusion_deriv: Arc::new(diffusion_deriv),
            diffusion_second: None,
        }
    }

    pub fn with_diffusion_second(
        mut self,
        second: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.diffusion_second = Some(Arc::new(second));
        self
    }
}

/// Drift and diffusion values (and derivatives) at one state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalCoefficients {
    pub drift: f64,
    pub diffusion: f64,
    pub drift_deriv: f64,
    pub diffusion_deriv: f64,
}

#[derive(Clone)]
pub struct SdeModel {
    label: String,
    domain: Domain,
    origin: f64,
    calculus: Calculus,
    coeffs: Coefficients,
}

impl fmt::Debug for SdeModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SdeModel")
            .field("label", &self.label)
            .field("domain", &self.domain)
            .field("origin", &self.origin)
            .field("calculus", &self.calculus)
            .finish_non_exhaustive()
    }
}

impl SdeModel {
    /// Stratonovich model whose closures take the state itself.
    pub fn new(label: impl Into<String>, domain: Domain, coeffs: Coefficients) -> Self {
        Self::centered(label, domain, 0.0, coeffs)
    }

    /// Stratonovich model whose closures take `y - origin`.
    pub fn centered(
        label: impl Into<String>,
        domain: Domain,
        origin: f64,
        coeffs: Coefficients,
    ) -> Self {
        SdeModel {
            label: label.into(),
            domain,
            origin,
            calculus: Calculus::Stratonovich,
            coeffs,
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn calculus(&self) -> Calculus {
        self.calculus
    }

    pub fn coefficients(&self) -> &Coefficients {
        &self.coeffs
    }

    pub(crate) fn domain_error(&self, state: f64) -> Error {
        Error::Domain {
            model: self.label.clone(),
            state,
            step: None,
        }
    }

    fn check(&self, y: f64) -> Result<()> {
        if self.domain.contains(y) {
            Ok(())
        } else {
            Err(self.domain_error(y))
        }
    }

    fn finite(&self, y: f64, value: f64) -> Result<f64> {
        if value.is_finite() {
            Ok(value)
        } else {
            Err(self.domain_error(y))
        }
    }

    fn eval(&self, field: &ScalarFn, y: f64) -> Result<f64> {
        self.check(y)?;
        self.finite(y, field(y - self.origin))
    }

    pub fn drift(&self, y: f64) -> Result<f64> {
        self.eval(&self.coeffs.drift, y)
    }

    pub fn diffusion(&self, y: f64) -> Result<f64> {
        self.eval(&self.coeffs.diffusion, y)
    }

    pub fn drift_deriv(&self, y: f64) -> Result<f64> {
        self.eval(&self.coeffs.drift_deriv, y)
    }

    pub fn diffusion_deriv(&self, y: f64) -> Result<f64> {
        self.eval(&self.coeffs.diffusion_deriv, y)
    }

    /// `(f(y), g(y))`, the pair every integrator step needs.
    pub fn drift_diffusion(&self, y: f64) -> Result<(f64, f64)> {
        self.check(y)?;
        let z = y - self.origin;
        let f = self.finite(y, (self.coeffs.drift)(z))?;
        let g = self.finite(y, (self.coeffs.diffusion)(z))?;
        Ok((f, g))
    }

    /// Evaluate everything at `c + z` without rounding the sum when `c` is
    /// the model's origin.
    pub fn local_displaced(&self, c: f64, z: f64) -> Result<LocalCoefficients> {
        let y = c + z;
        self.check(y)?;
        let w = if c == self.origin {
            z
        } else {
            (c - self.origin) + z
        };
        Ok(LocalCoefficients {
            drift: self.finite(y, (self.coeffs.drift)(w))?,
            diffusion: self.finite(y, (self.coeffs.diffusion)(w))?,
            drift_deriv: self.finite(y, (self.coeffs.drift_deriv)(w))?,
            diffusion_deriv: self.finite(y, (self.coeffs.diffusion_deriv)(w))?,
        })
    }

    pub fn local(&self, y: f64) -> Result<LocalCoefficients> {
        self.local_displaced(y, 0.0)
    }

}

/// Convert a Stratonovich model to its Itô form: drift `f + ½ g g'`, same
/// diffusion, label suffixed `-ito`.
pub fn stratonovich_to_ito(model: &SdeModel) -> Result<SdeModel> {
    if model.calculus != Calculus::Stratonovich {
        return Err(Error::parameter(format!(
            "model `{}` is already in Itô form",
            model.label
        )));
    }
    let c = model.coeffs.clone();
    let (f, g, dg) = (c.drift.clone(), c.diffusion.clone(), c.diffusion_deriv.clone());
    let drift = move |z: f64| f(z) + 0.5 * g(z) * dg(z);

    let (df, g, dg) = (c.drift_deriv.clone(), c.diffusion.clone(), c.diffusion_deriv.clone());
    let d2g: ScalarFn = match &c.diffusion_second {
        Some(s) => s.clone(),
        None => {
            let dg = dg.clone();
            Arc::new(move |z: f64| {
                let step = 1e-5 * z.abs().max(1.0);
                (dg(z + step) - dg(z - step)) / (2.0 * step)
            })
        }
    };
    let drift_deriv = move |z: f64| {
        let gp = dg(z);
        df(z) + 0.5 * (gp * gp + g(z) * d2g(z))
    };

    let coeffs = Coefficients {
        drift: Arc::new(drift),
        drift_deriv: Arc::new(drift_deriv),
        diffusion: c.diffusion.clone(),
        diffusion_deriv: c.diffusion_deriv.clone(),
        diffusion_second: c.diffusion_second.clone(),
    };
    Ok(SdeModel {
        label: format!("{}-ito", model.label),
        domain: model.domain,
        origin: model.origin,
        calculus: Calculus::Ito,
        coeffs,
    })
}

/// Sign-preserving power `sgn(x)·|x|^p`, the real extension used for
/// non-integer exponents.
#[inline]
pub fn signed_pow(x: f64, p: f64) -> f64 {
    if x == 0.0 {
        if p < 0.0 {
            f64::INFINITY
        } else {
            0.0
        }
    } else {
        x.signum() * x.abs().powf(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear(a: f64, b: f64) -> SdeModel {
        SdeModel::new(
            "lin",
            Domain::real_line(),
            Coefficients::new(
                move |z| a * z,
                move |_| a,
                move |z| b * z,
                move |_| b,
            ),
        )
    }

    #[test]
    fn domain_violation_is_an_error() {
        let m = SdeModel::new(
            "bounded",
            Domain::interval(0.0, 1.0),
            Coefficients::new(|z| z, |_| 1.0, |z| z, |_| 1.0),
        );
        assert!(m.drift(0.5).is_ok());
        let err = m.drift(1.5).unwrap_err();
        assert!(matches!(err, Error::Domain { state, step: None, .. } if state == 1.5));
        assert!(m.diffusion(f64::NAN).is_err());
    }

    #[test]
    fn guard_band_excludes_neighbourhood_of_zero() {
        let d = Domain::real_line().excluding_zero_band(1e-12);
        assert!(!d.contains(0.0));
        assert!(!d.contains(-5e-13));
        assert!(d.contains(1e-12));
    }

    #[test]
    fn non_finite_coefficient_reported_as_domain_error() {
        let m = SdeModel::new(
            "recip",
            Domain::real_line(),
            Coefficients::new(|z| 1.0 / z, |z| -1.0 / (z * z), |_| 0.0, |_| 0.0),
        );
        assert!(m.drift(0.0).is_err());
    }

    #[test]
    fn ito_drift_of_linear_model() {
        let (lambda, sigma) = (18.0, 1.0);
        let m = linear(-(lambda + 1.0), -sigma);
        let ito = stratonovich_to_ito(&m).unwrap();
        assert_eq!(ito.calculus(), Calculus::Ito);
        assert_eq!(ito.label(), "lin-ito");
        for z in [-1.0, 0.3, 2.5] {
            let expected = (-(lambda + 1.0) + sigma * sigma / 2.0) * z;
            assert!((ito.drift(z).unwrap() - expected).abs() < 1e-14);
            assert_eq!(ito.diffusion(z).unwrap(), m.diffusion(z).unwrap());
        }
        assert!((ito.drift_deriv(0.7).unwrap() - (-19.0 + 0.5)).abs() < 1e-9);
    }

    #[test]
    fn ito_conversion_without_noise_keeps_drift() {
        let m = linear(-3.0, 0.0);
        let ito = stratonovich_to_ito(&m).unwrap();
        for z in [-2.0, 0.0, 1.25] {
            assert_eq!(ito.drift(z).unwrap(), m.drift(z).unwrap());
        }
    }

    #[test]
    fn double_conversion_rejected() {
        let ito = stratonovich_to_ito(&linear(-1.0, 1.0)).unwrap();
        assert!(stratonovich_to_ito(&ito).is_err());
    }

    #[test]
    fn displaced_evaluation_skips_rounding_at_origin() {
        let m = SdeModel::centered(
            "shifted",
            Domain::real_line(),
            1.0,
            Coefficients::new(|z| z, |_| 1.0, |_| 0.0, |_| 0.0),
        );
        let tiny = 1e-30;
        assert_eq!(m.local_displaced(1.0, tiny).unwrap().drift, tiny);
        // through the state the displacement is rounded away
        assert_eq!(m.drift(1.0 + tiny).unwrap(), 0.0);
    }

    #[test]
    fn signed_pow_is_odd() {
        assert_eq!(signed_pow(-8.0, 1.0 / 3.0), -(8f64.powf(1.0 / 3.0)));
        assert_eq!(signed_pow(0.0, 2.5), 0.0);
        assert_eq!(signed_pow(4.0, 0.5), 2.0);
    }
}
