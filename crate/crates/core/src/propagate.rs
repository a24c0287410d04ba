//! Forward integration of `i U̇ = H(t) U` for synthesized Hamiltonians.
//!
//! Every step applies `exp(-i H(t_k + h/2) h)` (second-order Magnus). A noisy
//! trajectory is produced by substituting the fluctuating rate, and its
//! integral, into the control point before the Hamiltonian is assembled.

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::noise::NoisePath;
use crate::qcore::{Ket, Mat};
use crate::schedule::{Angle, ControlPoint, Schedule};
use crate::synth::ControlSystem;

pub const DEFAULT_STEPS: usize = 2000;
const MIN_STEPS: usize = 100;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Scheme {
    #[default]
    MidpointExponential,
}

/// Step size and scheme; `h ≤ T/100`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PropagatorConfig {
    grid: TimeGrid,
    scheme: Scheme,
}

impl PropagatorConfig {
    pub fn new(s: &Schedule, steps: usize) -> Result<Self> {
        if steps < MIN_STEPS {
            return Err(Error::InvalidStep(format!(
                "{steps} steps; at least {MIN_STEPS} required"
            )));
        }
        Ok(PropagatorConfig {
            grid: TimeGrid::new(s.duration(), steps)?,
            scheme: Scheme::MidpointExponential,
        })
    }

    /// Config with step `h`; `T/h` must be (close to) an integer.
    pub fn with_step(s: &Schedule, h: f64) -> Result<Self> {
        let ratio = s.duration() / h;
        let steps = ratio.round();
        if !(h > 0.0) || !steps.is_finite() || (ratio - steps).abs() > 1e-6 {
            return Err(Error::InvalidStep(format!("step {h} does not divide the duration")));
        }
        Self::new(s, steps as usize)
    }

    pub fn default_for(s: &Schedule) -> Self {
        Self::new(s, DEFAULT_STEPS).expect("default step count is valid")
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn step(&self) -> f64 {
        self.grid.step()
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }
}

/// Evolution operators on a time grid.
#[derive(Clone, Debug)]
pub struct OperatorTrajectory<const N: usize> {
    pub grid: TimeGrid,
    pub operators: Vec<Mat<N>>,
}

impl<const N: usize> OperatorTrajectory<N> {
    pub fn last(&self) -> &Mat<N> {
        self.operators.last().expect("trajectory is never empty")
    }
}

/// States on a time grid.
#[derive(Clone, Debug)]
pub struct Trajectory<const N: usize> {
    pub grid: TimeGrid,
    pub states: Vec<Ket<N>>,
}

impl<const N: usize> Trajectory<N> {
    pub fn last(&self) -> &Ket<N> {
        self.states.last().expect("trajectory is never empty")
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.states
            .iter()
            .zip(&other.states)
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max)
    }
}

/// `U_{k+1} = exp(-i H(t_k + h/2) h) U_k`, `U_0 = 𝓘`.
pub fn propagate_unitary<S: ControlSystem<N>, const N: usize>(
    system: &S,
    s: &Schedule,
    cfg: &PropagatorConfig,
) -> Result<OperatorTrajectory<N>> {
    system.check_schedule(s)?;
    let grid = cfg.grid;
    let h = grid.step();
    let mut operators = Vec::with_capacity(grid.len());
    let mut u = Mat::<N>::identity();
    operators.push(u);
    for k in 0..grid.steps() {
        let p = s.point(grid.time(k) + 0.5 * h);
        u = system.step(&p, h) * u;
        operators.push(u);
    }
    Ok(OperatorTrajectory { grid, operators })
}

/// Control point with one angle shifted by `offset` and its rate by `rate`.
pub fn perturbed(mut p: ControlPoint, param: Angle, offset: f64, rate: f64) -> ControlPoint {
    match param {
        Angle::Theta => {
            p.theta += offset;
            p.theta_dot += rate;
        }
        Angle::Alpha => {
            p.alpha += offset;
            p.alpha_dot += rate;
        }
    }
    p
}

/// Midpoint-exponential propagation of `initial` with the rate of `param`
/// replaced by its drift plus the sampled noise.
pub fn propagate_noisy<S: ControlSystem<N>, const N: usize>(
    system: &S,
    s: &Schedule,
    noise: &NoisePath,
    param: Angle,
    initial: &Ket<N>,
    cfg: &PropagatorConfig,
) -> Result<Trajectory<N>> {
    system.check_schedule(s)?;
    if noise.grid() != cfg.grid() {
        return Err(Error::GridMismatch);
    }
    let grid = cfg.grid;
    let mut states = Vec::with_capacity(grid.len());
    let mut psi = *initial;
    states.push(psi);
    for k in 0..grid.steps() {
        psi = noisy_step(system, s, noise, param, k).apply(&psi);
        states.push(psi);
    }
    Ok(Trajectory { grid, states })
}

pub(crate) fn noisy_step<S: ControlSystem<N>, const N: usize>(
    system: &S,
    s: &Schedule,
    noise: &NoisePath,
    param: Angle,
    k: usize,
) -> Mat<N> {
    let grid = noise.grid();
    let h = grid.step();
    let rate = noise.step_value(k);
    let offset = noise.phase_at_index(k) + 0.5 * h * rate;
    let p = perturbed(s.point(grid.time(k) + 0.5 * h), param, offset, rate);
    system.step(&p, h)
}

/// The exactly solvable counterpart of [`propagate_noisy`]: the analytic
/// evolution operator at the noisy angles, applied to `initial`.
pub fn evolve_exact<S: ControlSystem<N>, const N: usize>(
    system: &S,
    s: &Schedule,
    noise: &NoisePath,
    param: Angle,
    initial: &Ket<N>,
) -> Result<Trajectory<N>> {
    system.check_schedule(s)?;
    let grid = *noise.grid();
    if (grid.end() - s.duration()).abs() > 1e-12 * s.duration() {
        return Err(Error::GridMismatch);
    }
    let states = (0..grid.len())
        .map(|k| exact_state(system, s, noise, param, initial, k))
        .collect();
    Ok(Trajectory { grid, states })
}

pub(crate) fn exact_state<S: ControlSystem<N>, const N: usize>(
    system: &S,
    s: &Schedule,
    noise: &NoisePath,
    param: Angle,
    initial: &Ket<N>,
    k: usize,
) -> Ket<N> {
    let p = perturbed(s.point(noise.grid().time(k)), param, noise.phase_at_index(k), 0.0);
    system.evolution(&p).apply(initial)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::{path_rng, NoiseModel};
    use crate::qcore::{is_unitary, Ket2, Mat2, C64};
    use crate::schedule::Curve;
    use crate::synth::{evolution_operator_2, ThreeLevel, TwoLevel};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    #[test]
    fn config_validation() {
        let s = Schedule::linear_ramp(2.0, 1.0, 0.0).unwrap();
        assert!(PropagatorConfig::new(&s, 99).is_err());
        assert_eq!(PropagatorConfig::with_step(&s, 0.01).unwrap().grid().steps(), 200);
        assert!(PropagatorConfig::with_step(&s, 0.003).is_err());
        assert_eq!(PropagatorConfig::default_for(&s).grid().steps(), DEFAULT_STEPS);
    }

    #[test]
    fn simple_ramp_reproduces_analytic_operator() {
        let t_end = 1.0;
        let s = Schedule::linear_ramp(t_end, FRAC_PI_4, 0.0).unwrap();
        let cfg = PropagatorConfig::new(&s, 2000).unwrap();
        let traj = propagate_unitary(&TwoLevel, &s, &cfg).unwrap();
        let exact = evolution_operator_2(&s.point(t_end));
        assert!(traj.last().max_abs_diff(&exact) <= 1e-6);
        assert!(traj.operators.iter().all(|u| is_unitary(u, 1e-12)));
    }

    #[test]
    fn zero_hamiltonian_is_identity() {
        let s = Schedule::linear_ramp(1.0, 0.0, 0.0).unwrap();
        let traj = propagate_unitary(&TwoLevel, &s, &PropagatorConfig::new(&s, 100).unwrap()).unwrap();
        assert!(traj.operators.iter().all(|u| *u == Mat2::identity()));
    }

    #[test]
    fn second_order_convergence() {
        let s = Schedule::planar(
            1.0,
            Curve::SineSquared { start: 0.0, end: 1.2 },
            Curve::Smoothstep { start: 0.0, end: 2.0 },
        )
        .unwrap();
        let exact = evolution_operator_2(&s.point(1.0));
        let defect = |n| {
            let cfg = PropagatorConfig::new(&s, n).unwrap();
            propagate_unitary(&TwoLevel, &s, &cfg).unwrap().last().max_abs_diff(&exact)
        };
        let ratio = defect(400) / defect(800);
        assert!((ratio - 4.0).abs() < 0.8, "ratio {ratio}");
    }

    #[test]
    fn three_level_propagation_matches_analytic() {
        let s = Schedule::planar(
            1.0,
            Curve::SineSquared { start: 0.0, end: FRAC_PI_2 },
            Curve::Linear { start: 0.0, end: 0.6 },
        )
        .unwrap();
        let cfg = PropagatorConfig::new(&s, 2000).unwrap();
        let traj = propagate_unitary(&ThreeLevel, &s, &cfg).unwrap();
        let exact = crate::synth::evolution_operator_3(&s.point(1.0));
        assert!(traj.last().max_abs_diff(&exact) < 1e-6);
        assert!(traj.operators.iter().all(|u| is_unitary(u, 1e-12)));
    }

    #[test]
    fn zero_noise_matches_unitary_propagation() {
        let s = Schedule::linear_ramp(1.0, 1.0, 0.7).unwrap();
        let cfg = PropagatorConfig::new(&s, 500).unwrap();
        let noise = NoisePath::zeros(*cfg.grid(), 0.0);
        let psi0 = Ket2::level(0);
        let noisy = propagate_noisy(&TwoLevel, &s, &noise, Angle::Alpha, &psi0, &cfg).unwrap();
        let ops = propagate_unitary(&TwoLevel, &s, &cfg).unwrap();
        for (psi, u) in noisy.states.iter().zip(&ops.operators) {
            assert!(psi.max_abs_diff(&u.apply(&psi0)) < 1e-12);
        }
    }

    #[test]
    fn constant_noise_equals_shifted_schedule() {
        let c = 0.35;
        let s = Schedule::planar(
            1.0,
            Curve::SineSquared { start: 0.0, end: 1.0 },
            Curve::Linear { start: 0.0, end: 0.5 },
        )
        .unwrap();
        let shifted = Schedule::planar(
            1.0,
            Curve::SineSquared { start: 0.0, end: 1.0 },
            Curve::Linear { start: 0.0, end: 0.5 + c },
        )
        .unwrap();
        let cfg = PropagatorConfig::new(&s, 2000).unwrap();
        let noise = NoisePath::from_fn(*cfg.grid(), 0.0, |_| c).unwrap();
        let psi0 = Ket2::level(0);
        let noisy = propagate_noisy(&TwoLevel, &s, &noise, Angle::Alpha, &psi0, &cfg).unwrap();
        let reference = propagate_noisy(
            &TwoLevel,
            &shifted,
            &NoisePath::zeros(*cfg.grid(), 0.0),
            Angle::Alpha,
            &psi0,
            &cfg,
        )
        .unwrap();
        assert!(noisy.max_abs_diff(&reference) < 1e-8);
    }

    #[test]
    fn white_noise_preserves_norm() {
        let s = Schedule::linear_ramp(1.0, 1.0, 0.7).unwrap();
        let cfg = PropagatorConfig::new(&s, 2000).unwrap();
        let mut noise = NoisePath::zeros(*cfg.grid(), 0.0);
        noise.resample(&NoiseModel::white(4.0).unwrap(), &mut path_rng(1, 2));
        for param in [Angle::Alpha, Angle::Theta] {
            let traj = propagate_noisy(&TwoLevel, &s, &noise, param, &Ket2::level(0), &cfg).unwrap();
            assert!(traj.states.iter().all(|psi| (psi.norm_sqr() - 1.0).abs() < 1e-9));
        }
    }

    #[test]
    fn dephasing_trajectory_follows_closed_form() {
        // |ψ(t)⟩ ∝ sin θ|1⟩ - i e^{i(α + Φ)} cos θ|0⟩ under α̇ noise
        let s = Schedule::planar(
            1.0,
            Curve::Smoothstep { start: 0.0, end: 1.1 },
            Curve::Linear { start: 0.0, end: 0.8 },
        )
        .unwrap();
        let cfg = PropagatorConfig::new(&s, 2000).unwrap();
        let model = NoiseModel::ornstein_uhlenbeck(1.0, 1.0).unwrap().with_bias(0.3).unwrap();
        let mut noise = NoisePath::zeros(*cfg.grid(), 0.0);
        noise.resample(&model, &mut path_rng(3, 4));
        let traj = propagate_noisy(&TwoLevel, &s, &noise, Angle::Alpha, &Ket2::level(0), &cfg).unwrap();
        for k in (0..=2000).step_by(250) {
            let t = cfg.grid().time(k);
            let p = s.point(t);
            let phase = p.alpha + noise.phase_at_index(k);
            let closed = Ket([
                C64::new(p.theta.sin(), 0.0),
                C64::new(0.0, -1.0) * C64::from_polar(p.theta.cos(), phase),
            ]);
            assert!(closed.same_ray(&traj.states[k], 1e-8), "k={k}");
        }
    }

    #[test]
    fn grid_mismatch_is_rejected() {
        let s = Schedule::linear_ramp(1.0, 1.0, 0.0).unwrap();
        let cfg = PropagatorConfig::new(&s, 200).unwrap();
        let noise = NoisePath::zeros(TimeGrid::new(1.0, 100).unwrap(), 0.0);
        assert!(matches!(
            propagate_noisy(&TwoLevel, &s, &noise, Angle::Theta, &Ket2::level(0), &cfg),
            Err(Error::GridMismatch)
        ));
        let bad = NoisePath::zeros(TimeGrid::new(2.0, 200).unwrap(), 0.0);
        assert!(evolve_exact(&TwoLevel, &s, &bad, Angle::Theta, &Ket2::level(0)).is_err());
    }
}
