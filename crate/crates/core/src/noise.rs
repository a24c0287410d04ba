//! Gaussian fluctuations of one control rate, `ξ(t) = ξ₀ + δξ(t)`.
//!
//! The generators are calibrated so that the integrated phase
//! `Φ(t) = ∫₀ᵗ δξ` has variance `∫₀ᵗ G(s) ds`; the Gaussian characteristic
//! function then gives `M[e^{iΦ(t)}] = e^{-Var Φ / 2} = r(t)`, the closed-form
//! damping factor:
//!
//! * white noise: `Var Φ(t) = Γt/2`, `r(t) = exp(-Γt/4)`;
//! * Ornstein–Uhlenbeck: `Var Φ(t) = Γ[t + (e^{-γt} - 1)/γ]/2`, stationary
//!   variance `Γγ/4`.
//!
//! Per-path random streams are derived from a master seed and the path index
//! by [`path_seed`], so paths can be generated in any order or in parallel.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::grid::TimeGrid;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NoiseKind {
    White,
    OrnsteinUhlenbeck { memory_rate: f64 },
}

/// Statistics of the fluctuation: kind, strength Γ and bias ξ₀.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseModel {
    kind: NoiseKind,
    strength: f64,
    bias: f64,
}

impl NoiseModel {
    pub fn white(strength: f64) -> Result<Self> {
        Self::new(NoiseKind::White, strength, 0.0)
    }

    pub fn ornstein_uhlenbeck(strength: f64, memory_rate: f64) -> Result<Self> {
        Self::new(NoiseKind::OrnsteinUhlenbeck { memory_rate }, strength, 0.0)
    }

    pub fn noiseless() -> Self {
        NoiseModel {
            kind: NoiseKind::White,
            strength: 0.0,
            bias: 0.0,
        }
    }

    pub fn new(kind: NoiseKind, strength: f64, bias: f64) -> Result<Self> {
        if !(strength.is_finite() && strength >= 0.0) {
            return Err(Error::InvalidNoise(format!("strength must be >= 0 (got {strength})")));
        }
        if let NoiseKind::OrnsteinUhlenbeck { memory_rate } = kind {
            if !(memory_rate.is_finite() && memory_rate > 0.0) {
                return Err(Error::InvalidNoise(format!(
                    "memory rate must be > 0 (got {memory_rate})"
                )));
            }
        }
        if !bias.is_finite() {
            return Err(Error::InvalidNoise(format!("bias must be finite (got {bias})")));
        }
        Ok(NoiseModel {
            kind,
            strength,
            bias,
        })
    }

    pub fn with_bias(self, bias: f64) -> Result<Self> {
        Self::new(self.kind, self.strength, bias)
    }

    pub fn kind(&self) -> NoiseKind {
        self.kind
    }

    /// Γ.
    pub fn strength(&self) -> f64 {
        self.strength
    }

    /// ξ₀.
    pub fn bias(&self) -> f64 {
        self.bias
    }

    /// `∫₀ᵗ G(s) ds`, the variance of the integrated phase.
    pub fn phase_variance(&self, t: f64) -> f64 {
        match self.kind {
            NoiseKind::White => 0.5 * self.strength * t,
            NoiseKind::OrnsteinUhlenbeck { memory_rate } => {
                0.5 * self.strength * ou_shape(t, memory_rate)
            }
        }
    }

    /// `r(t) = exp(-½ ∫₀ᵗ G(s) ds)`.
    pub fn damping_factor(&self, t: f64) -> f64 {
        (-0.5 * self.phase_variance(t)).exp()
    }

    /// Stationary variance of the OU process (`Γγ/4`); `None` for white noise.
    pub fn stationary_variance(&self) -> Option<f64> {
        match self.kind {
            NoiseKind::White => None,
            NoiseKind::OrnsteinUhlenbeck { memory_rate } => {
                Some(0.25 * self.strength * memory_rate)
            }
        }
    }

    /// Samples one path on `grid` from the stream for `(seed, 0)`.
    pub fn sample_path(&self, grid: &TimeGrid, seed: u64) -> NoisePath {
        let mut rng = path_rng(seed, 0);
        let mut path = NoisePath::zeros(*grid, self.bias);
        path.resample(self, &mut rng);
        path
    }

    /// [`NoiseModel::sample_path`] for explicit times, which must form a
    /// uniform grid starting at zero.
    pub fn sample_path_at(&self, times: &[f64], seed: u64) -> Result<NoisePath> {
        Ok(self.sample_path(&TimeGrid::from_times(times)?, seed))
    }
}

// t + (e^{-γt} - 1)/γ without cancellation for small γt.
fn ou_shape(t: f64, gamma: f64) -> f64 {
    let u = gamma * t;
    if u < 1e-3 {
        t * u * (0.5 - u / 6.0 + u * u / 24.0 - u * u * u / 120.0)
    } else {
        t + (-u).exp_m1() / gamma
    }
}

/// One realization of the fluctuation on a uniform grid.
///
/// The path is stored as the zero-mean noise averaged over each grid interval;
/// the bias is added on read. For OU noise the nodal samples are kept too.
#[derive(Clone, Debug, PartialEq)]
pub struct NoisePath {
    grid: TimeGrid,
    bias: f64,
    steps: Vec<f64>,
    nodes: Option<Vec<f64>>,
    phase: Vec<f64>,
}

impl NoisePath {
    pub fn zeros(grid: TimeGrid, bias: f64) -> Self {
        NoisePath {
            grid,
            bias,
            steps: vec![0.0; grid.steps()],
            nodes: None,
            phase: vec![0.0; grid.len()],
        }
    }

    /// Path with the given zero-mean interval averages.
    pub fn from_step_values(grid: TimeGrid, values: Vec<f64>, bias: f64) -> Result<Self> {
        if values.len() != grid.steps() {
            return Err(Error::GridMismatch);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidNoise("non-finite path value".into()));
        }
        let mut path = Self::zeros(grid, bias);
        path.steps = values;
        path.accumulate();
        Ok(path)
    }

    /// Path sampled from a deterministic function, averaged over each
    /// interval by the trapezoid rule.
    pub fn from_fn(grid: TimeGrid, bias: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = (0..grid.steps())
            .map(|k| 0.5 * (f(grid.time(k)) + f(grid.time(k + 1))))
            .collect();
        Self::from_step_values(grid, values, bias)
    }

    /// Refills the path in place from `rng`.
    pub fn resample<R: Rng + ?Sized>(&mut self, model: &NoiseModel, rng: &mut R) {
        debug_assert_eq!(self.steps.len(), self.grid.steps());
        self.bias = model.bias;
        let h = self.grid.step();
        match model.kind {
            NoiseKind::White => {
                self.nodes = None;
                let sd = (0.5 * model.strength / h).sqrt();
                for v in &mut self.steps {
                    let z: f64 = rng.sample(StandardNormal);
                    *v = sd * z;
                }
            }
            NoiseKind::OrnsteinUhlenbeck { memory_rate } => {
                let var = 0.25 * model.strength * memory_rate;
                let decay = (-memory_rate * h).exp();
                let kick = (var * -(-2.0 * memory_rate * h).exp_m1()).sqrt();
                let nodes = self.nodes.get_or_insert_with(Vec::new);
                nodes.resize(self.grid.len(), 0.0);
                let z: f64 = rng.sample(StandardNormal);
                nodes[0] = var.sqrt() * z;
                for k in 0..self.grid.steps() {
                    let z: f64 = rng.sample(StandardNormal);
                    nodes[k + 1] = nodes[k] * decay + kick * z;
                    self.steps[k] = 0.5 * (nodes[k] + nodes[k + 1]);
                }
            }
        }
        self.accumulate();
    }

    fn accumulate(&mut self) {
        let h = self.grid.step();
        self.phase[0] = 0.0;
        for k in 0..self.steps.len() {
            self.phase[k + 1] = self.phase[k] + self.steps[k] * h;
        }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    /// Mean of ξ over interval `k`, bias included.
    pub fn step_value(&self, k: usize) -> f64 {
        self.bias + self.steps[k]
    }

    /// Zero-mean nodal samples (OU paths only).
    pub fn nodes(&self) -> Option<&[f64]> {
        self.nodes.as_deref()
    }

    /// `∫₀^{t_k} ξ`, bias term `ξ₀ t_k` included.
    pub fn phase_at_index(&self, k: usize) -> f64 {
        self.bias * self.grid.time(k) + self.phase[k]
    }

    /// `∫₀ᵗ ξ` for a grid time `t`.
    pub fn integrated_phase(&self, t: f64) -> Result<f64> {
        Ok(self.phase_at_index(self.grid.index_of(t)?))
    }
}

/// Seed for path `index` under `master`: two rounds of SplitMix64 over the
/// pair, so nearby indices and nearby master seeds give unrelated streams.
pub fn path_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index.wrapping_add(0x6A09_E667_F3BC_C909)))
}

pub fn path_rng(master: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(path_seed(master, index))
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
