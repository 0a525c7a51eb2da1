use crate::error::{Error, Result};

/// States of one integrator run on the uniform grid `t_n = n·h`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    step: f64,
    times: Vec<f64>,
    states: Vec<f64>,
    model_label: String,
    scheme_label: String,
}

impl Trajectory {
    pub fn new(
        step: f64,
        states: Vec<f64>,
        model_label: impl Into<String>,
        scheme_label: impl Into<String>,
    ) -> Self {
        let times = (0..states.len()).map(|n| n as f64 * step).collect();
        Trajectory {
            step,
            times,
            states,
            model_label: model_label.into(),
            scheme_label: scheme_label.into(),
        }
    }

    /// Build from explicit time points, checking that they start at 0 and
    /// are uniformly spaced.
    pub fn from_parts(
        times: Vec<f64>,
        states: Vec<f64>,
        model_label: impl Into<String>,
        scheme_label: impl Into<String>,
    ) -> Result<Self> {
        if times.len() != states.len() {
            return Err(Error::Incompatible(format!(
                "{} times but {} states",
                times.len(),
                states.len()
            )));
        }
        if times.first().is_some_and(|&t| t != 0.0) {
            return Err(Error::Incompatible("first time point must be 0".into()));
        }
        let step = if times.len() > 1 { times[1] } else { 0.0 };
        for (n, &t) in times.iter().enumerate() {
            let expected = n as f64 * step;
            if (t - expected).abs() > 1e-9 * expected.abs().max(step) {
                return Err(Error::Incompatible(format!(
                    "time point {n} = {t} is off the uniform grid with step {step}"
                )));
            }
        }
        if times.len() > 1 && !(step > 0.0) {
            return Err(Error::Incompatible("time points must increase".into()));
        }
        Ok(Trajectory {
            step,
            times,
            states,
            model_label: model_label.into(),
            scheme_label: scheme_label.into(),
        })
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[f64] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn final_time(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    pub fn final_state(&self) -> Option<f64> {
        self.states.last().copied()
    }

    pub fn model_label(&self) -> &str {
        &self.model_label
    }

    pub fn scheme_label(&self) -> &str {
        &self.scheme_label
    }

    /// Same grid, states replaced by `map(state)`.
    pub fn map_states(&self, map: impl Fn(f64) -> f64, model_label: impl Into<String>) -> Self {
        Trajectory {
            step: self.step,
            times: self.times.clone(),
            states: self.states.iter().map(|&x| map(x)).collect(),
            model_label: model_label.into(),
            scheme_label: self.scheme_label.clone(),
        }
    }
}
