//! Monte Carlo averaging of noisy trajectories into density matrices.
//!
//! Paths are generated in fixed-size chunks keyed by path index. Chunks run
//! in parallel but are folded in index order, so every output bit is
//! independent of the number of worker threads.

use rayon::prelude::*;

use crate::channels::Channel;
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::noise::{path_rng, NoiseModel, NoisePath};
use crate::propagate::{evolve_exact, exact_state, noisy_step, propagate_noisy, PropagatorConfig, Trajectory};
use crate::qcore::{DensityMatrix, Ket, Mat, C64};
use crate::schedule::{Angle, Schedule};
use crate::synth::{ControlSystem, ThreeLevel, TwoLevel};
use crate::table::Table;

const CHUNK: usize = 256;
const CHUNKS_PER_WAVE: usize = 64;
/// Differences below these are rounding or propagator error, not statistics.
const ABSOLUTE_FLOOR: f64 = 1e-12;
const PROPAGATOR_FLOOR: f64 = 1e-6;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum SimulationMode {
    /// Analytic `U` evaluated at the noisy angle; exact where the noise acts
    /// only through its integral.
    #[default]
    PhaseIntegral,
    /// Midpoint-exponential propagation of the noisy Hamiltonian.
    Hamiltonian,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnsembleConfig {
    trajectories: usize,
    seed: u64,
    grid: TimeGrid,
    record_every: usize,
    mode: SimulationMode,
}

impl EnsembleConfig {
    pub fn new(trajectories: usize, seed: u64, grid: TimeGrid, mode: SimulationMode) -> Result<Self> {
        if trajectories < 2 {
            return Err(Error::InvalidEnsemble(format!("{trajectories} trajectories; at least 2 required")));
        }
        Ok(EnsembleConfig { trajectories, seed, grid, record_every: 1, mode })
    }

    /// Records every `stride`-th grid point; the final point is always kept.
    pub fn with_record_every(mut self, stride: usize) -> Result<Self> {
        if stride == 0 {
            return Err(Error::InvalidEnsemble("zero record stride".into()));
        }
        self.record_every = stride;
        Ok(self)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_trajectories(self, trajectories: usize) -> Result<Self> {
        Self::new(trajectories, self.seed, self.grid, self.mode)?.with_record_every(self.record_every)
    }

    pub fn with_mode(mut self, mode: SimulationMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn trajectories(&self) -> usize {
        self.trajectories
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn mode(&self) -> SimulationMode {
        self.mode
    }

    pub fn record_every(&self) -> usize {
        self.record_every
    }

    pub fn recorded_indices(&self) -> Vec<usize> {
        let steps = self.grid.steps();
        let mut idx: Vec<usize> = (0..=steps).step_by(self.record_every).collect();
        if idx.last() != Some(&steps) {
            idx.push(steps);
        }
        idx
    }
}

/// Averaged density matrices with error estimates on the recorded times.
#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleReport<const N: usize> {
    times: Vec<f64>,
    rho_series: Vec<DensityMatrix<N>>,
    stderr_series: Vec<f64>,
    fidelity_series: Vec<f64>,
    fidelity_stderr: Vec<f64>,
    trajectories: usize,
    seed: u64,
    param: Angle,
    mode: SimulationMode,
    noise: NoiseModel,
    duration: f64,
}

impl<const N: usize> EnsembleReport<N> {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn rho_series(&self) -> &[DensityMatrix<N>] {
        &self.rho_series
    }

    /// Largest entrywise standard error of the mean at each time.
    pub fn stderr_series(&self) -> &[f64] {
        &self.stderr_series
    }

    /// `√⟨ψ₀|ρ|ψ₀⟩` against the noiseless state.
    pub fn fidelity_series(&self) -> &[f64] {
        &self.fidelity_series
    }

    pub fn fidelity_stderr(&self) -> &[f64] {
        &self.fidelity_stderr
    }

    pub fn trajectories(&self) -> usize {
        self.trajectories
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn param(&self) -> Angle {
        self.param
    }

    pub fn mode(&self) -> SimulationMode {
        self.mode
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    /// One row per recorded time: ρ entries labelled by level, then the
    /// standard error and fidelity columns. With `gamma_hz`, a
    /// `time_seconds = t / Γ[Hz]` column follows `t` (times in units of 1/Γ).
    pub fn to_table(&self, gamma_hz: Option<f64>) -> Result<Table> {
        let mut header = vec!["t".to_string()];
        if gamma_hz.is_some() {
            header.push("time_seconds".into());
        }
        for i in 0..N {
            for j in 0..N {
                let (a, b) = (N - 1 - i, N - 1 - j);
                header.push(format!("rho_{a}{b}_re"));
                header.push(format!("rho_{a}{b}_im"));
            }
        }
        header.extend(["stderr", "fidelity", "fidelity_stderr"].map(String::from));
        let mut table = Table::new(header);
        for (k, &t) in self.times.iter().enumerate() {
            let mut row = vec![t];
            if let Some(hz) = gamma_hz {
                row.push(t / hz);
            }
            let rho = self.rho_series[k].matrix();
            for i in 0..N {
                for j in 0..N {
                    row.push(rho[(i, j)].re);
                    row.push(rho[(i, j)].im);
                }
            }
            row.extend([self.stderr_series[k], self.fidelity_series[k], self.fidelity_stderr[k]]);
            table.push(row)?;
        }
        Ok(table)
    }
}

/// Worst disagreement between a report and a reference series.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Defect {
    /// `max |ρ_MC - ρ_ref| / stderr` over entries and times.
    pub normalized: f64,
    /// `max |ρ_MC - ρ_ref|`.
    pub absolute: f64,
}

/// Two-level ensemble started from `|0⟩`.
pub fn run_ensemble(s: &Schedule, m: &NoiseModel, param: Angle, cfg: &EnsembleConfig) -> Result<EnsembleReport<2>> {
    run_ensemble_with(&TwoLevel, s, m, param, &Ket::level(0), cfg)
}

/// Three-level ensemble started from `initial`.
pub fn run_ensemble_3(
    s: &Schedule,
    m: &NoiseModel,
    param: Angle,
    initial: &Ket<3>,
    cfg: &EnsembleConfig,
) -> Result<EnsembleReport<3>> {
    run_ensemble_with(&ThreeLevel, s, m, param, initial, cfg)
}

fn check_config<S: ControlSystem<N>, const N: usize>(
    system: &S,
    s: &Schedule,
    param: Angle,
    cfg: &EnsembleConfig,
) -> Result<()> {
    system.check_schedule(s)?;
    if (cfg.grid.end() - s.duration()).abs() > 1e-12 * s.duration() {
        return Err(Error::GridMismatch);
    }
    if cfg.mode == SimulationMode::PhaseIntegral && !system.phase_integral_exact(s, param) {
        return Err(Error::UnsupportedPhaseIntegral(format!(
            "noise on {param:?} rate is not exactly solvable for this schedule"
        )));
    }
    if cfg.mode == SimulationMode::Hamiltonian {
        PropagatorConfig::new(s, cfg.grid.steps())?;
    }
    Ok(())
}

pub fn run_ensemble_with<S: ControlSystem<N>, const N: usize>(
    system: &S,
    s: &Schedule,
    m: &NoiseModel,
    param: Angle,
    initial: &Ket<N>,
    cfg: &EnsembleConfig,
) -> Result<EnsembleReport<N>> {
    check_config(system, s, param, cfg)?;
    let initial = initial.normalized()?;
    let recorded = cfg.recorded_indices();
    let reference: Vec<Ket<N>> = recorded
        .iter()
        .map(|&k| system.evolution(&s.point(cfg.grid.time(k))).apply(&initial))
        .collect();
    let run = Run { system, s, m, param, initial, cfg, recorded: &recorded, reference: &reference };

    let chunks = cfg.trajectories.div_ceil(CHUNK);
    let mut total = Accumulator::new(recorded.len(), N);
    let mut start = 0;
    while start < chunks {
        let end = (start + CHUNKS_PER_WAVE).min(chunks);
        let partial: Vec<Accumulator> = (start..end).into_par_iter().map(|c| run.chunk(c)).collect();
        for acc in &partial {
            total.merge(acc);
        }
        start = end;
    }
    total.finish(&run)
}

struct Run<'a, S, const N: usize> {
    system: &'a S,
    s: &'a Schedule,
    m: &'a NoiseModel,
    param: Angle,
    initial: Ket<N>,
    cfg: &'a EnsembleConfig,
    recorded: &'a [usize],
    reference: &'a [Ket<N>],
}

impl<S: ControlSystem<N>, const N: usize> Run<'_, S, N> {
    fn chunk(&self, c: usize) -> Accumulator {
        let first = c * CHUNK;
        let last = (first + CHUNK).min(self.cfg.trajectories);
        let mut acc = Accumulator::new(self.recorded.len(), N);
        let mut path = NoisePath::zeros(self.cfg.grid, self.m.bias());
        for j in first..last {
            let mut rng = path_rng(self.cfg.seed, j as u64);
            path.resample(self.m, &mut rng);
            match self.cfg.mode {
                SimulationMode::PhaseIntegral => {
                    for (slot, &k) in self.recorded.iter().enumerate() {
                        let psi = exact_state(self.system, self.s, &path, self.param, &self.initial, k);
                        acc.add(slot, &psi, &self.reference[slot]);
                    }
                }
                SimulationMode::Hamiltonian => {
                    let mut psi = self.initial;
                    let mut slot = 0;
                    for k in 0..=self.cfg.grid.steps() {
                        if k > 0 {
                            psi = noisy_step(self.system, self.s, &path, self.param, k - 1).apply(&psi);
                        }
                        if self.recorded[slot] == k {
                            acc.add(slot, &psi, &self.reference[slot]);
                            slot += 1;
                        }
                    }
                }
            }
        }
        acc.n = last - first;
        acc
    }
}

/// Sums of the entries of `|ψ⟩⟨ψ| - |ψ₀⟩⟨ψ₀|` and of the overlap defect
/// `|⟨ψ₀|ψ⟩|² - 1`, with their squares. Shifting by the noiseless value
/// keeps the variance exact when every path coincides with it.
struct Accumulator {
    n: usize,
    width: usize,
    sum: Vec<f64>,
    sq: Vec<f64>,
    ov: Vec<f64>,
    ov_sq: Vec<f64>,
}

impl Accumulator {
    fn new(points: usize, dim: usize) -> Self {
        let width = 2 * dim * dim;
        Accumulator {
            n: 0,
            width,
            sum: vec![0.0; points * width],
            sq: vec![0.0; points * width],
            ov: vec![0.0; points],
            ov_sq: vec![0.0; points],
        }
    }

    fn add<const N: usize>(&mut self, slot: usize, psi: &Ket<N>, reference: &Ket<N>) {
        let base = slot * self.width;
        let p = psi.projector();
        let q = reference.projector();
        for i in 0..N {
            for j in 0..N {
                let d = p[(i, j)] - q[(i, j)];
                let o = base + 2 * (i * N + j);
                self.sum[o] += d.re;
                self.sq[o] += d.re * d.re;
                self.sum[o + 1] += d.im;
                self.sq[o + 1] += d.im * d.im;
            }
        }
        let d = reference.inner(psi).norm_sqr() - reference.norm_sqr() * reference.norm_sqr();
        self.ov[slot] += d;
        self.ov_sq[slot] += d * d;
    }

    fn merge(&mut self, other: &Accumulator) {
        self.n += other.n;
        for (a, b) in self.sum.iter_mut().zip(&other.sum) {
            *a += b;
        }
        for (a, b) in self.sq.iter_mut().zip(&other.sq) {
            *a += b;
        }
        for (a, b) in self.ov.iter_mut().zip(&other.ov) {
            *a += b;
        }
        for (a, b) in self.ov_sq.iter_mut().zip(&other.ov_sq) {
            *a += b;
        }
    }

    fn finish<S: ControlSystem<N>, const N: usize>(self, run: &Run<'_, S, N>) -> Result<EnsembleReport<N>> {
        let n = self.n as f64;
        let sem = |sum: f64, sq: f64| {
            let mean = sum / n;
            ((sq / n - mean * mean).max(0.0) / (n - 1.0)).sqrt()
        };
        let mut rho_series = Vec::with_capacity(run.recorded.len());
        let mut stderr_series = Vec::with_capacity(run.recorded.len());
        let mut fidelity_series = Vec::with_capacity(run.recorded.len());
        let mut fidelity_stderr = Vec::with_capacity(run.recorded.len());
        for (slot, reference) in run.reference.iter().enumerate() {
            let base = slot * self.width;
            let mut rho = reference.projector();
            let mut worst: f64 = 0.0;
            for i in 0..N {
                for j in 0..N {
                    let o = base + 2 * (i * N + j);
                    rho[(i, j)] += C64::new(self.sum[o] / n, self.sum[o + 1] / n);
                    worst = worst.max(sem(self.sum[o], self.sq[o])).max(sem(self.sum[o + 1], self.sq[o + 1]));
                }
            }
            let rho = DensityMatrix::with_tolerance(rho, 1e-9)?;
            let f2 = (reference.norm_sqr().powi(2) + self.ov[slot] / n).clamp(0.0, 1.0);
            let f = f2.sqrt();
            let se2 = sem(self.ov[slot], self.ov_sq[slot]);
            rho_series.push(rho);
            stderr_series.push(worst);
            fidelity_series.push(f);
            fidelity_stderr.push(if f > 0.0 { se2 / (2.0 * f) } else { se2.sqrt() });
        }
        Ok(EnsembleReport {
            times: run.recorded.iter().map(|&k| run.cfg.grid.time(k)).collect(),
            rho_series,
            stderr_series,
            fidelity_series,
            fidelity_stderr,
            trajectories: self.n,
            seed: run.cfg.seed,
            param: run.param,
            mode: run.cfg.mode,
            noise: *run.m,
            duration: run.s.duration(),
        })
    }
}

/// Compares a report with `reference(t)` at every recorded time. Entries
/// closer than the mode's numerical floor count as agreeing.
pub fn defect_against<const N: usize>(
    rep: &EnsembleReport<N>,
    mut reference: impl FnMut(f64) -> Result<Mat<N>>,
) -> Result<Defect> {
    let floor = match rep.mode {
        SimulationMode::PhaseIntegral => ABSOLUTE_FLOOR,
        SimulationMode::Hamiltonian => PROPAGATOR_FLOOR,
    };
    let mut worst = Defect { normalized: 0.0, absolute: 0.0 };
    for ((&t, rho), &se) in rep.times.iter().zip(&rep.rho_series).zip(&rep.stderr_series) {
        let diff = rho.matrix().max_abs_diff(&reference(t)?);
        worst.absolute = worst.absolute.max(diff);
        if diff > floor {
            worst.normalized = worst.normalized.max(if se > 0.0 { diff / se } else { f64::INFINITY });
        }
    }
    Ok(worst)
}

/// Normalized and absolute defect of a two-level report against the
/// closed-form channel it should reproduce.
pub fn channel_defect(rep: &EnsembleReport<2>, channel: Channel, s: &Schedule, m: &NoiseModel) -> Result<Defect> {
    if rep.param != channel.noisy_parameter() {
        return Err(Error::ConfigMismatch(format!(
            "{channel:?} needs noise on {:?}, report has {:?}",
            channel.noisy_parameter(),
            rep.param
        )));
    }
    if rep.noise != *m {
        return Err(Error::ConfigMismatch("noise model differs from the report".into()));
    }
    if (rep.duration - s.duration()).abs() > 1e-12 * s.duration() {
        return Err(Error::ConfigMismatch("schedule duration differs from the report".into()));
    }
    defect_against(rep, |t| Ok(channel.rho(s, m, t)?.into_matrix()))
}

/// `max |ρ_MC - ρ_analytic| / stderr` over the recorded grid.
pub fn compare_to_analytic(rep: &EnsembleReport<2>, channel: Channel, s: &Schedule, m: &NoiseModel) -> Result<f64> {
    Ok(channel_defect(rep, channel, s, m)?.normalized)
}

/// The `index`-th trajectory of an ensemble, on the full grid.
pub fn ensemble_trajectory<S: ControlSystem<N>, const N: usize>(
    system: &S,
    s: &Schedule,
    m: &NoiseModel,
    param: Angle,
    initial: &Ket<N>,
    cfg: &EnsembleConfig,
    index: usize,
) -> Result<Trajectory<N>> {
    check_config(system, s, param, cfg)?;
    let mut path = NoisePath::zeros(cfg.grid, m.bias());
    path.resample(m, &mut path_rng(cfg.seed, index as u64));
    match cfg.mode {
        SimulationMode::PhaseIntegral => evolve_exact(system, s, &path, param, initial),
        SimulationMode::Hamiltonian => {
            propagate_noisy(system, s, &path, param, initial, &PropagatorConfig::new(s, cfg.grid.steps())?)
        }
    }
}
