//! Three-level passage `|0⟩ → |2⟩` that never populates `|1⟩`, and the
//! population-inversion variant started from `|1⟩`, under noise on θ̇.

use crate::error::{Error, Result};
use crate::noise::NoiseModel;
use crate::qcore::{Density3, Ket3, Mat, Mat3, C64};
use crate::schedule::{Angle, ControlPoint, Schedule};
use crate::synth::{check_three_level, evolution_operator_3, ControlSystem, ThreeLevel};
use crate::ensemble::{run_ensemble_3, EnsembleConfig, EnsembleReport, SimulationMode};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StirapInitial {
    Ket0,
    Ket1,
}

impl StirapInitial {
    pub fn ket(&self) -> Ket3 {
        match self {
            StirapInitial::Ket0 => Ket3::level(0),
            StirapInitial::Ket1 => Ket3::level(1),
        }
    }
}

/// Initial level, schedule with `θ(0) = α(0) = 0`, and noise on θ̇.
#[derive(Clone, Debug, PartialEq)]
pub struct StirapCase {
    initial: StirapInitial,
    schedule: Schedule,
    noise: NoiseModel,
}

impl StirapCase {
    pub fn new(initial: StirapInitial, schedule: Schedule, noise: NoiseModel) -> Result<Self> {
        check_three_level(&schedule)?;
        Ok(StirapCase { initial, schedule, noise })
    }

    pub fn initial(&self) -> StirapInitial {
        self.initial
    }

    pub fn schedule(&self) -> &Schedule {
        &self.schedule
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    /// Phase-integral sampling is exact only while α stays constant.
    pub fn simulation_mode(&self) -> SimulationMode {
        if ThreeLevel.phase_integral_exact(&self.schedule, Angle::Theta) {
            SimulationMode::PhaseIntegral
        } else {
            SimulationMode::Hamiltonian
        }
    }

    /// Monte Carlo estimate of ρ(t) in the recommended mode.
    pub fn simulate(&self, cfg: &EnsembleConfig) -> Result<EnsembleReport<3>> {
        let cfg = cfg.with_mode(self.simulation_mode());
        run_ensemble_3(&self.schedule, &self.noise, Angle::Theta, &self.initial.ket(), &cfg)
    }
}

/// `|φ₁⟩, |φ₂⟩, |φ₃⟩`: the images of `|1⟩`, `|2⟩`, `|0⟩` under `U`.
pub fn eigenbasis(p: &ControlPoint) -> [Ket3; 3] {
    let (st, ct) = p.theta.sin_cos();
    let (sa, ca) = p.alpha.sin_cos();
    let ket = |two: f64, one: f64, zero: f64| crate::qcore::Ket([C64::new(two, 0.0), C64::new(one, 0.0), C64::new(zero, 0.0)]);
    [ket(ct * sa, ca, st * sa), ket(ct * ca, -sa, st * ca), ket(-st, 0.0, ct)]
}

fn unbiased(m: &NoiseModel) -> Result<()> {
    if m.bias() != 0.0 {
        return Err(Error::BiasedNoise(m.bias()));
    }
    Ok(())
}

/// ρ(t) from `|0⟩`: the `{|2⟩, |0⟩}` block is `(1 ∓ r⁴cos2θ)/2` on the
/// diagonal and `-r⁴ sin2θ / 2` off it; `|1⟩` stays empty.
pub fn stirap_rho(case: &StirapCase, t: f64) -> Result<Density3> {
    if case.initial != StirapInitial::Ket0 {
        return Err(Error::Unsupported("closed-form ρ is known only for the |0⟩ start".into()));
    }
    unbiased(&case.noise)?;
    let p = case.schedule.point_checked(t)?;
    let r4 = case.noise.damping_factor(t).powi(4);
    let (s2, c2) = (2.0 * p.theta).sin_cos();
    let mut rho = Mat3::zeros();
    rho[(0, 0)] = C64::new(0.5 * (1.0 - r4 * c2), 0.0);
    rho[(2, 2)] = C64::new(0.5 * (1.0 + r4 * c2), 0.0);
    rho[(0, 2)] = C64::new(-0.5 * r4 * s2, 0.0);
    rho[(2, 0)] = rho[(0, 2)];
    Density3::new(rho)
}

/// `√((1 + r⁴)/2)`, whatever the schedule.
pub fn stirap_fidelity_ket0(m: &NoiseModel, t: f64) -> Result<f64> {
    unbiased(m)?;
    Ok((0.5 * (1.0 + m.damping_factor(t).powi(4))).sqrt())
}

/// `√(½(1+r⁴) sin⁴α + 2r sin²α cos²α + cos⁴α)` at `α = alpha_t`.
pub fn stirap_fidelity_ket1(alpha_t: f64, m: &NoiseModel, t: f64) -> Result<f64> {
    unbiased(m)?;
    let r = m.damping_factor(t);
    let (s2, c2) = (alpha_t.sin().powi(2), alpha_t.cos().powi(2));
    Ok((0.5 * (1.0 + r.powi(4)) * s2 * s2 + 2.0 * r * s2 * c2 + c2 * c2).sqrt())
}

/// Noiseless state `U(t)|initial⟩`.
pub fn noiseless_state(case: &StirapCase, t: f64) -> Result<Ket3> {
    Ok(evolution_operator_3(&case.schedule.point_checked(t)?).apply(&case.initial.ket()))
}

/// `Σ |φₙ(t)⟩⟨φₙ(0)|`.
pub fn evolution_from_eigenbasis(p: &ControlPoint, p0: &ControlPoint) -> Mat3 {
    let now = eigenbasis(p);
    let start = eigenbasis(p0);
    now.iter().zip(&start).fold(Mat::zeros(), |acc, (a, b)| {
        let mut outer = Mat3::zeros();
        for i in 0..3 {
            for j in 0..3 {
                outer[(i, j)] = a.0[i] * b.0[j].conj();
            }
        }
        acc + outer
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TimeGrid;
    use crate::qcore::check_density;
    use crate::schedule::Curve;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4};

    fn transfer(theta_final: f64) -> Schedule {
        Schedule::planar(1.0, Curve::SineSquared { start: 0.0, end: theta_final }, Curve::zero()).unwrap()
    }

    fn case(m: NoiseModel) -> StirapCase {
        StirapCase::new(StirapInitial::Ket0, transfer(FRAC_PI_2), m).unwrap()
    }

    #[test]
    fn eigenbasis_builds_the_evolution_operator() {
        let s = Schedule::planar(1.0, Curve::Linear { start: 0.0, end: 1.2 }, Curve::Smoothstep { start: 0.0, end: 0.8 }).unwrap();
        for k in 0..=10 {
            let p = s.point(k as f64 / 10.0);
            let u = evolution_from_eigenbasis(&p, &s.point(0.0));
            assert!(u.max_abs_diff(&evolution_operator_3(&p)) < 1e-15);
        }
    }

    #[test]
    fn noiseless_passage_is_pure_and_skips_level_one() {
        let c = case(NoiseModel::noiseless());
        for k in 0..=20 {
            let t = k as f64 / 20.0;
            let rho = stirap_rho(&c, t).unwrap();
            assert!((rho.purity() - 1.0).abs() < 1e-14);
            assert_eq!(rho.population(1), 0.0);
            let psi = noiseless_state(&c, t).unwrap();
            assert!(rho.matrix().max_abs_diff(&psi.projector()) < 1e-15);
        }
        let end = noiseless_state(&c, 1.0).unwrap();
        assert!((end.amplitude(2).re + 1.0).abs() < 1e-15);
    }

    #[test]
    fn full_decay_and_half_decay() {
        let rho = stirap_rho(&case(NoiseModel::white(1e4).unwrap()), 0.5).unwrap();
        let half = Mat3::diag([C64::new(0.5, 0.0), C64::new(0.0, 0.0), C64::new(0.5, 0.0)]);
        assert!(rho.matrix().max_abs_diff(&half) < 1e-15);

        // θ₀ = π/4 and r⁴ = 1/2
        let c = StirapCase::new(StirapInitial::Ket0, transfer(FRAC_PI_4), NoiseModel::white(2f64.ln()).unwrap()).unwrap();
        let rho = stirap_rho(&c, 1.0).unwrap();
        assert!((rho.matrix()[(0, 2)].re + 0.25).abs() < 1e-15);
        assert!(check_density(rho.matrix(), 1e-12));
    }

    #[test]
    fn fidelity_examples() {
        assert_eq!(stirap_fidelity_ket0(&NoiseModel::noiseless(), 1.0).unwrap(), 1.0);
        assert!((stirap_fidelity_ket0(&NoiseModel::white(1e4).unwrap(), 1.0).unwrap() - FRAC_1_SQRT_2).abs() < 1e-15);
        let f = stirap_fidelity_ket0(&NoiseModel::white(0.04).unwrap(), 1.0).unwrap();
        assert!((f - ((1.0 + (-0.04f64).exp()) / 2.0).sqrt()).abs() < 1e-15);
        assert!((f - 0.990149).abs() < 5e-7);

        for g in [0.0, 0.3, 5.0, 1e3] {
            let m = NoiseModel::white(g).unwrap();
            assert_eq!(stirap_fidelity_ket1(0.0, &m, 1.0).unwrap(), 1.0);
        }
        for a in [0.1, 0.7, 1.3] {
            assert!((stirap_fidelity_ket1(a, &NoiseModel::noiseless(), 1.0).unwrap() - 1.0).abs() < 1e-15);
        }
        let f = stirap_fidelity_ket1(FRAC_PI_2, &NoiseModel::white(1e4).unwrap(), 1.0).unwrap();
        assert!((f - FRAC_1_SQRT_2).abs() < 1e-15);

        let biased = NoiseModel::white(1.0).unwrap().with_bias(0.1).unwrap();
        assert!(matches!(stirap_fidelity_ket0(&biased, 1.0), Err(Error::BiasedNoise(_))));
        assert!(stirap_rho(&case(biased), 0.5).is_err());
    }

    #[test]
    fn ket0_fidelity_matches_rho_overlap() {
        let m = NoiseModel::ornstein_uhlenbeck(1.0, 0.5).unwrap();
        let c = case(m);
        for k in 0..=10 {
            let t = k as f64 / 10.0;
            let rho = stirap_rho(&c, t).unwrap();
            let psi = noiseless_state(&c, t).unwrap();
            let f = crate::qcore::overlap(&psi, rho.matrix()).unwrap().sqrt();
            assert!((f - stirap_fidelity_ket0(&m, t).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn schedule_checks() {
        let bad = Schedule::planar(1.0, Curve::Linear { start: 0.0, end: 1.0 }, Curve::Constant(0.2)).unwrap();
        assert!(StirapCase::new(StirapInitial::Ket0, bad, NoiseModel::noiseless()).is_err());
        let varying = Schedule::planar(1.0, Curve::Linear { start: 0.0, end: 1.0 }, Curve::Linear { start: 0.0, end: 0.5 }).unwrap();
        let c = StirapCase::new(StirapInitial::Ket1, varying, NoiseModel::noiseless()).unwrap();
        assert_eq!(c.simulation_mode(), SimulationMode::Hamiltonian);
        assert!(stirap_rho(&c, 0.5).is_err());
        assert_eq!(case(NoiseModel::noiseless()).simulation_mode(), SimulationMode::PhaseIntegral);
    }

    #[test]
    fn monte_carlo_matches_ket0_closed_form() {
        let c = case(NoiseModel::white(1.0).unwrap());
        let cfg = EnsembleConfig::new(20_000, 3, TimeGrid::new(1.0, 400).unwrap(), SimulationMode::PhaseIntegral)
            .unwrap()
            .with_record_every(40)
            .unwrap();
        let rep = c.simulate(&cfg).unwrap();
        let d = crate::ensemble::defect_against(&rep, |t| Ok(stirap_rho(&c, t)?.into_matrix())).unwrap();
        assert!(d.normalized < 4.5, "{d:?}");
        assert!(rep.rho_series().iter().all(|r| r.population(1) == 0.0));
    }
}
