//! Named configurations for the stiffness figures.
//!
//! Horizons are not part of the published figures. They are chosen so that
//! every step size of a preset divides `t_end` exactly: 13 for the
//! deterministic comparison (steps 0.13, 0.1, 0.01), 12 for the `λ = 18`
//! runs (step 0.12) and 1 for `λ = 200`.

use super::config::{ExperimentConfig, Formulation};
use super::ExperimentError;
use crate::integrators::Scheme;

pub const PRESET_NAMES: [&str; 9] = [
    "fig1a", "fig1b", "fig1c", "fig2a", "fig2b", "fig2c", "fig2d", "fig3a", "fig3b",
];

pub const DEFAULT_SEED: u64 = 1;

pub fn preset_description(name: &str) -> Option<&'static str> {
    Some(match name {
        "fig1a" => "deterministic, lambda=18, h=0.13: both schemes oscillate",
        "fig1b" => "deterministic, lambda=18, h=0.1: midpoint stays close, Euler is marginal",
        "fig1c" => "deterministic, lambda=18, h=0.01: both schemes accurate",
        "fig2a" => "stochastic, lambda=18, h=0.12: original vs transformed",
        "fig2b" => "stochastic, lambda=18, h=0.01: original vs transformed",
        "fig2c" => "stochastic, lambda=200, h=0.01: original vs transformed",
        "fig2d" => "stochastic, lambda=200, h=0.001, reference h=0.0001",
        "fig3a" => "alpha=0.3, lambda=18, h=0.12: original vs transformed",
        "fig3b" => "alpha=0.7, lambda=18, h=0.12: original vs transformed",
        _ => return None,
    })
}

fn stochastic(name: &str, lambda: f64, h: f64, t_end: f64) -> ExperimentConfig {
    ExperimentConfig {
        preset: Some(name.to_string()),
        alpha: 1.0,
        lambda,
        sigma: 1.0,
        x0: 0.2,
        h_list: vec![h],
        t_end,
        seed: DEFAULT_SEED,
        schemes: vec![Scheme::Midpoint],
        formulations: vec![Formulation::Original, Formulation::Transformed],
        fixed_point_iterations: 10,
        reference_h: 0.001,
    }
}

fn deterministic(name: &str, h: f64) -> ExperimentConfig {
    ExperimentConfig {
        sigma: 0.0,
        schemes: vec![Scheme::Euler, Scheme::Midpoint],
        formulations: vec![Formulation::Original],
        ..stochastic(name, 18.0, h, 13.0)
    }
}

pub fn resolve_preset(name: &str) -> Result<ExperimentConfig, ExperimentError> {
    let config = match name {
        "fig1a" => deterministic(name, 0.13),
        "fig1b" => deterministic(name, 0.1),
        "fig1c" => deterministic(name, 0.01),
        "fig2a" => stochastic(name, 18.0, 0.12, 12.0),
        "fig2b" => stochastic(name, 18.0, 0.01, 12.0),
        "fig2c" => stochastic(name, 200.0, 0.01, 1.0),
        "fig2d" => ExperimentConfig {
            reference_h: 0.0001,
            ..stochastic(name, 200.0, 0.001, 1.0)
        },
        "fig3a" => ExperimentConfig {
            alpha: 0.3,
            ..stochastic(name, 18.0, 0.12, 12.0)
        },
        "fig3b" => ExperimentConfig {
            alpha: 0.7,
            ..stochastic(name, 18.0, 0.12, 12.0)
        },
        other => return Err(ExperimentError::UnknownPreset(other.to_string())),
    };
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fig2a_parameters() {
        let c = resolve_preset("fig2a").unwrap();
        assert_eq!((c.lambda, c.sigma, c.x0, c.alpha), (18.0, 1.0, 0.2, 1.0));
        assert_eq!(c.h_list, vec![0.12]);
        assert_eq!(c.reference_h, 0.001);
        assert_eq!(c.fixed_point_iterations, 10);
    }

    #[test]
    fn fig2d_reference_step() {
        let c = resolve_preset("fig2d").unwrap();
        assert_eq!(c.reference_h, 0.0001);
        assert_eq!((c.lambda, c.h_list[0]), (200.0, 0.001));
    }

    #[test]
    fn fig3b_parameters() {
        let c = resolve_preset("fig3b").unwrap();
        assert_eq!((c.alpha, c.h_list[0], c.lambda), (0.7, 0.12, 18.0));
    }

    #[test]
    fn fig1_is_deterministic() {
        for (name, h) in [("fig1a", 0.13), ("fig1b", 0.1), ("fig1c", 0.01)] {
            let c = resolve_preset(name).unwrap();
            assert_eq!(c.sigma, 0.0);
            assert_eq!(c.h_list, vec![h]);
            assert_eq!(c.schemes, vec![Scheme::Euler, Scheme::Midpoint]);
        }
    }

    #[test]
    fn every_preset_validates() {
        for name in PRESET_NAMES {
            resolve_preset(name).unwrap().validate().unwrap();
            assert!(preset_description(name).is_some());
        }
        assert!(matches!(resolve_preset("fig9"), Err(ExperimentError::UnknownPreset(_))));
    }
}
