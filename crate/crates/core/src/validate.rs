//! Monte Carlo against closed forms, plus Kraus identities, for both
//! channels under white and OU noise.

use std::fmt;

use crate::channels::{apply_kraus, completeness_defect, dephasing_kraus, depolarizing_kraus, noiseless_state, Channel};
use crate::ensemble::{defect_against, run_ensemble, EnsembleConfig, SimulationMode};
use crate::error::Result;
use crate::grid::TimeGrid;
use crate::noise::{NoiseKind, NoiseModel};
use crate::qcore::{check_density, Mat2};
use crate::schedule::Schedule;
use crate::synth::{ControlSystem, TwoLevel};

pub const DEFECT_LIMIT: f64 = 3.0;
pub const IDENTITY_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationConfig {
    pub schedule: Schedule,
    pub gamma_big: f64,
    pub gamma_small: f64,
    pub bias: f64,
    pub paths: usize,
    pub seed: u64,
    pub steps: usize,
    pub record_every: usize,
    pub mode: SimulationMode,
    /// Test hook: compares against closed forms evaluated at twice the
    /// noise strength, which every statistical check must catch.
    pub inject_damping_fault: bool,
}

impl ValidationConfig {
    pub fn new(schedule: Schedule) -> Self {
        ValidationConfig {
            schedule,
            gamma_big: 1.0,
            gamma_small: 1.0,
            bias: 0.0,
            paths: 10_000,
            seed: 1,
            steps: 2000,
            record_every: 40,
            mode: SimulationMode::PhaseIntegral,
            inject_damping_fault: false,
        }
    }

    fn models(&self) -> Result<[(&'static str, NoiseModel); 2]> {
        Ok([
            ("white", NoiseModel::white(self.gamma_big)?.with_bias(self.bias)?),
            ("ou", NoiseModel::ornstein_uhlenbeck(self.gamma_big, self.gamma_small)?.with_bias(self.bias)?),
        ])
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub passed: bool,
    pub note: Option<String>,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} value={:.6e} limit={:.1e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.value,
            self.limit
        )?;
        if let Some(note) = &self.note {
            write!(f, " ({note})")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn push(&mut self, name: String, value: f64, limit: f64, note: Option<String>) {
        self.checks.push(Check { name, value, limit, passed: value <= limit, note });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

fn kind_name(m: &NoiseModel) -> &'static str {
    match m.kind() {
        NoiseKind::White => "white",
        NoiseKind::OrnsteinUhlenbeck { .. } => "ou",
    }
}

pub fn run_validation(cfg: &ValidationConfig) -> Result<ValidationReport> {
    let s = &cfg.schedule;
    let grid = TimeGrid::new(s.duration(), cfg.steps)?;
    let base = EnsembleConfig::new(cfg.paths, cfg.seed, grid, cfg.mode)?.with_record_every(cfg.record_every)?;
    let mut report = ValidationReport::default();

    for (_, m) in cfg.models()? {
        for channel in [Channel::Dephasing, Channel::Depolarizing] {
            let param = channel.noisy_parameter();
            let name = format!("mc/{}/{}", channel_name(channel), kind_name(&m));
            let mut note = None;
            let mut ens = base;
            if ens.mode() == SimulationMode::PhaseIntegral && !TwoLevel.phase_integral_exact(s, param) {
                ens = ens.with_mode(SimulationMode::Hamiltonian);
                note = Some("hamiltonian mode: schedule is not exactly solvable for this noise".into());
            }
            let rep = run_ensemble(s, &m, param, &ens)?;
            let reference_model = if cfg.inject_damping_fault {
                NoiseModel::new(m.kind(), 2.0 * m.strength(), m.bias())?
            } else {
                m
            };
            let d = defect_against(&rep, |t| Ok(channel.rho(s, &reference_model, t)?.into_matrix()))?;
            report.push(name, d.normalized, DEFECT_LIMIT, note);
        }
    }

    let times: Vec<f64> = base.recorded_indices().iter().map(|&k| grid.time(k)).collect();
    for (_, m) in cfg.models()? {
        for channel in [Channel::Dephasing, Channel::Depolarizing] {
            let prefix = format!("kraus/{}/{}", channel_name(channel), kind_name(&m));
            let mut completeness: f64 = 0.0;
            let mut action: f64 = 0.0;
            let mut physical = true;
            let mut skipped = false;
            for &t in &times {
                let rho = channel.rho(s, &m, t)?;
                physical &= check_density(rho.matrix(), IDENTITY_TOLERANCE);
                let kraus: Vec<Mat2> = match channel {
                    Channel::Dephasing => dephasing_kraus(&m, t).to_vec(),
                    Channel::Depolarizing => match depolarizing_kraus(&m, t) {
                        Ok(k) => k.to_vec(),
                        Err(_) => {
                            skipped = true;
                            break;
                        }
                    },
                };
                completeness = completeness.max(completeness_defect(&kraus));
                let rho0 = noiseless_state(s, t)?.projector();
                action = action.max(apply_kraus(&kraus, &rho0).max_abs_diff(rho.matrix()));
            }
            report.push(
                format!("density/{}/{}", channel_name(channel), kind_name(&m)),
                if physical { 0.0 } else { 1.0 },
                0.0,
                None,
            );
            if skipped {
                continue;
            }
            report.push(format!("{prefix}/completeness"), completeness, IDENTITY_TOLERANCE, None);
            report.push(format!("{prefix}/action"), action, IDENTITY_TOLERANCE, None);
        }
    }
    Ok(report)
}

fn channel_name(c: Channel) -> &'static str {
    match c {
        Channel::Dephasing => "dephasing",
        Channel::Depolarizing => "depolarizing",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(s: Schedule) -> ValidationConfig {
        ValidationConfig { paths: 2000, steps: 400, ..ValidationConfig::new(s) }
    }

    #[test]
    fn default_schedule_validates() {
        let cfg = small(Schedule::linear_ramp(1.0, 1.0, 0.0).unwrap());
        let rep = run_validation(&cfg).unwrap();
        assert!(rep.passed(), "{rep}");
        assert_eq!(rep.checks.len(), 4 + 4 + 8);
    }

    #[test]
    fn injected_fault_is_caught() {
        let cfg = ValidationConfig { inject_damping_fault: true, ..small(Schedule::linear_ramp(1.0, 1.0, 0.0).unwrap()) };
        let rep = run_validation(&cfg).unwrap();
        assert!(!rep.passed());
        assert!(rep.checks.iter().filter(|c| c.name.starts_with("mc/")).all(|c| !c.passed), "{rep}");
    }

    #[test]
    fn noiseless_defects_vanish() {
        let cfg = ValidationConfig { gamma_big: 0.0, ..small(Schedule::linear_ramp(1.0, 1.0, 0.4).unwrap()) };
        let rep = run_validation(&cfg).unwrap();
        assert!(rep.checks.iter().filter(|c| c.name.starts_with("mc/")).all(|c| c.value == 0.0), "{rep}");
        assert!(rep.passed());
    }

    #[test]
    fn biased_depolarizing_skips_kraus() {
        let cfg = ValidationConfig { bias: 0.3, ..small(Schedule::linear_ramp(1.0, 1.0, 0.0).unwrap()) };
        let rep = run_validation(&cfg).unwrap();
        assert!(!rep.checks.iter().any(|c| c.name.starts_with("kraus/depolarizing")));
        assert!(rep.passed(), "{rep}");
    }
}
