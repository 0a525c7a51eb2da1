//! Seeded Brownian paths on a uniform grid with exact coarsening.
//!
//! Increments are drawn once at the finest resolution. Coarser grids are
//! views of the same realization: each coarse increment is the
//! left-to-right sum of the fine increments it covers, and the coarse path
//! values `W(t_k)` are read straight from the fine cumulative path, so they
//! are a bit-exact subsequence of it.

use std::sync::Arc;

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};

/// Name of the generator, recorded in run manifests.
pub const PRNG_ALGORITHM: &str = "ChaCha20 (rand_chacha 0.3, SeedableRng::seed_from_u64)";
/// Name of the normal sampler, recorded in run manifests.
pub const GAUSSIAN_METHOD: &str = "Marsaglia polar method on 53-bit uniforms";

/// Standard normal variates via the Marsaglia polar method.
///
/// Both variates of each accepted pair are used, first `u·s` then `v·s`.
pub struct NormalSampler {
    rng: ChaCha20Rng,
    spare: Option<f64>,
}

impl NormalSampler {
    pub fn new(seed: u64) -> Self {
        NormalSampler {
            rng: ChaCha20Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    /// Uniform on `[0, 1)` from the top 53 bits of one output word.
    fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn next_standard(&mut self) -> f64 {
        if let Some(v) = self.spare.take() {
            return v;
        }
        loop {
            let u = 2.0 * self.uniform() - 1.0;
            let v = 2.0 * self.uniform() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let scale = (-2.0 * s.ln() / s).sqrt();
                self.spare = Some(v * scale);
                return u * scale;
            }
        }
    }
}

/// One Brownian realization on `[0, t_end]`, viewed at some stride of the
/// grid it was sampled on.
#[derive(Debug, Clone)]
pub struct BrownianGrid {
    seed: u64,
    t_end: f64,
    fine_steps: usize,
    stride: usize,
    /// `W` at every fine grid point, `fine_path[0] = 0`.
    fine_path: Arc<[f64]>,
    fine_increments: Arc<[f64]>,
    increments: Vec<f64>,
}

impl BrownianGrid {
    /// `2^levels` independent `N(0, t_end/2^levels)` increments.
    pub fn sample(seed: u64, t_end: f64, levels: u32) -> Result<Self> {
        if levels >= usize::BITS {
            return Err(Error::parameter(format!("levels = {levels} is too large")));
        }
        Self::sample_steps(seed, t_end, 1usize << levels)
    }

    /// `steps` independent `N(0, t_end/steps)` increments. Used when the
    /// finest step is a decimal value and the step count is not a power
    /// of two.
    pub fn sample_steps(seed: u64, t_end: f64, steps: usize) -> Result<Self> {
        if !(t_end > 0.0) || !t_end.is_finite() {
            return Err(Error::parameter(format!(
                "t_end must be positive and finite, got {t_end}"
            )));
        }
        if steps == 0 {
            return Err(Error::parameter("a Brownian grid needs at least one step"));
        }
        let sd = (t_end / steps as f64).sqrt();
        let mut sampler = NormalSampler::new(seed);
        let increments: Vec<f64> = (0..steps).map(|_| sd * sampler.next_standard()).collect();
        let mut path = Vec::with_capacity(steps + 1);
        let mut w = 0.0;
        path.push(w);
        for dw in &increments {
            w += dw;
            path.push(w);
        }
        let fine_increments: Arc<[f64]> = increments.clone().into();
        Ok(BrownianGrid {
            seed,
            t_end,
            fine_steps: steps,
            stride: 1,
            fine_path: path.into(),
            fine_increments,
            increments,
        })
    }

    /// Coarsen by `2^j`.
    pub fn coarsen(&self, j: u32) -> Result<Self> {
        match self.levels() {
            Some(levels) if j <= levels => self.coarsen_by(1usize << j),
            Some(levels) => Err(Error::parameter(format!(
                "cannot coarsen {levels} levels by {j}"
            ))),
            None => Err(Error::parameter(
                "dyadic coarsening needs a power-of-two step count",
            )),
        }
    }

    /// Coarsen by an integer factor that divides the current step count.
    pub fn coarsen_by(&self, factor: usize) -> Result<Self> {
        let steps = self.steps();
        if factor == 0 || !steps.is_multiple_of(factor) {
            return Err(Error::parameter(format!(
                "factor {factor} does not divide {steps} steps"
            )));
        }
        if factor == 1 {
            return Ok(self.clone());
        }
        let stride = self.stride * factor;
        let increments = self
            .fine_increments
            .chunks_exact(stride)
            .map(|block| block.iter().fold(0.0, |acc, dw| acc + dw))
            .collect();
        Ok(BrownianGrid {
            stride,
            increments,
            fine_path: Arc::clone(&self.fine_path),
            fine_increments: Arc::clone(&self.fine_increments),
            ..*self
        })
    }

    /// Coarsened view whose step is `h`, which must be an integer multiple
    /// of the current step (relative tolerance 1e-9).
    pub fn with_step(&self, h: f64) -> Result<Self> {
        let factor = integer_ratio(h, self.dt()).ok_or_else(|| {
            Error::parameter(format!(
                "step {h} is not an integer multiple of the grid step {}",
                self.dt()
            ))
        })?;
        self.coarsen_by(factor)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn steps(&self) -> usize {
        self.fine_steps / self.stride
    }

    /// `L` such that `steps = 2^L`, if the step count is a power of two.
    pub fn levels(&self) -> Option<u32> {
        let n = self.steps();
        n.is_power_of_two().then(|| n.trailing_zeros())
    }

    pub fn dt(&self) -> f64 {
        self.t_end / self.steps() as f64
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    /// `W(k·dt)`.
    pub fn path_value(&self, k: usize) -> f64 {
        self.fine_path[k * self.stride]
    }

    /// `W` at every grid point, `steps + 1` values starting at 0.
    pub fn path(&self) -> Vec<f64> {
        (0..=self.steps()).map(|k| self.path_value(k)).collect()
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt()
    }
}

pub fn sample_brownian_grid(seed: u64, t_end: f64, levels: u32) -> Result<BrownianGrid> {
    BrownianGrid::sample(seed, t_end, levels)
}

pub fn coarsen(grid: &BrownianGrid, factor_levels: u32) -> Result<BrownianGrid> {
    grid.coarsen(factor_levels)
}

/// `Some(m)` when `coarse ≈ m·fine` for a positive integer `m`.
pub fn integer_ratio(coarse: f64, fine: f64) -> Option<usize> {
    if !(coarse > 0.0 && fine > 0.0) {
        return None;
    }
    let ratio = coarse / fine;
    let m = ratio.round();
    if m >= 1.0 && ((m - ratio).abs() <= 1e-9 * m) {
        Some(m as usize)
    } else {
        None
    }
}
