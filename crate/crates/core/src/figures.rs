//! Fidelity surfaces under Ornstein–Uhlenbeck noise, tabulated over `Γt`.
//!
//! `γ` is measured in a frequency unit in which `Γ = 10` by default, so that
//! `γ = 0.1` is deep in the slow-memory regime.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_8};
use std::str::FromStr;

use crate::channels::{critical_time, dephasing_fidelity, depolarizing_fidelity, Channel, CriticalTime};
use crate::error::{Error, Result};
use crate::noise::NoiseModel;
use crate::table::Table;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FigureId {
    /// Dephasing fidelity over `(Γt, γ)` at `θ = π/8`.
    Fig1a,
    /// Dephasing fidelity over `(Γt, θ)` at fixed `γ`.
    Fig1b,
    /// Depolarizing fidelity over `Γt` for a few `γ`.
    Fig2,
}

impl FromStr for FigureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1a" => Ok(FigureId::Fig1a),
            "1b" => Ok(FigureId::Fig1b),
            "2" => Ok(FigureId::Fig2),
            other => Err(Error::Unsupported(format!("unknown figure {other:?}; expected 1a, 1b or 2"))),
        }
    }
}

pub const DEFAULT_GAMMA_BIG: f64 = 10.0;
pub const FIG1A_THETA: f64 = FRAC_PI_8;
pub const FIG2_GAMMAS: [f64; 5] = [0.1, 0.3, 1.0, 3.0, 10.0];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FigureParams {
    pub gamma_big: f64,
    /// Memory rate for the fixed-γ figure.
    pub gamma_small: f64,
    pub gamma_t_max: f64,
    pub time_points: usize,
    pub sweep_points: usize,
    /// When set, adds a `time_seconds` column, `t = Γt / Γ[Hz]`.
    pub gamma_hz: Option<f64>,
}

impl Default for FigureParams {
    fn default() -> Self {
        FigureParams {
            gamma_big: DEFAULT_GAMMA_BIG,
            gamma_small: 1.0,
            gamma_t_max: 10.0,
            time_points: 200,
            sweep_points: 50,
            gamma_hz: None,
        }
    }
}

impl FigureParams {
    fn validate(&self) -> Result<()> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.gamma_big) || !positive(self.gamma_small) || !positive(self.gamma_t_max) {
            return Err(Error::InvalidNoise("figure rates and range must be positive".into()));
        }
        if self.time_points < 2 || self.sweep_points < 2 {
            return Err(Error::InvalidGrid("figure grids need at least two points".into()));
        }
        if let Some(hz) = self.gamma_hz {
            if !positive(hz) {
                return Err(Error::InvalidNoise(format!("gamma-hz {hz}")));
            }
        }
        Ok(())
    }

    fn gamma_t_grid(&self) -> Vec<f64> {
        linspace(0.0, self.gamma_t_max, self.time_points)
    }

    fn ou(&self, gamma_small: f64) -> Result<NoiseModel> {
        NoiseModel::ornstein_uhlenbeck(self.gamma_big, gamma_small)
    }
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| if i + 1 == n { b } else { a + (b - a) * i as f64 / (n - 1) as f64 })
        .collect()
}

pub fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    let (la, lb) = (a.ln(), b.ln());
    (0..n)
        .map(|i| match i {
            0 => a,
            _ if i + 1 == n => b,
            _ => (la + (lb - la) * i as f64 / (n - 1) as f64).exp(),
        })
        .collect()
}

/// Long-format table of the requested figure.
pub fn figure_table(id: FigureId, params: &FigureParams) -> Result<Table> {
    params.validate()?;
    let (sweep_name, sweep): (&str, Vec<f64>) = match id {
        FigureId::Fig1a => ("gamma_small", logspace(0.1, 10.0, params.sweep_points)),
        FigureId::Fig1b => ("theta", linspace(0.0, FRAC_PI_2, params.sweep_points)),
        FigureId::Fig2 => ("gamma_small", FIG2_GAMMAS.to_vec()),
    };
    let mut header = vec!["gamma_t", sweep_name, "fidelity"];
    if params.gamma_hz.is_some() {
        header.push("time_seconds");
    }
    let mut table = Table::new(header);
    for &x in &sweep {
        let (m, theta) = match id {
            FigureId::Fig1a => (params.ou(x)?, FIG1A_THETA),
            FigureId::Fig1b => (params.ou(params.gamma_small)?, x),
            FigureId::Fig2 => (params.ou(x)?, 0.0),
        };
        for gt in params.gamma_t_grid() {
            let t = gt / params.gamma_big;
            let f = match id {
                FigureId::Fig2 => depolarizing_fidelity(&m, t),
                _ => dephasing_fidelity(theta, &m, t),
            };
            let mut row = vec![gt, x, f];
            if let Some(hz) = params.gamma_hz {
                row.push(gt / hz);
            }
            table.push(row)?;
        }
    }
    Ok(table)
}

/// Largest `Γt` with fidelity at least `fc` under OU noise `(Γ, γ)`.
pub fn plateau_gamma_t(channel: Channel, theta: f64, gamma_big: f64, gamma_small: f64, fc: f64) -> Result<CriticalTime> {
    let m = NoiseModel::ornstein_uhlenbeck(gamma_big, gamma_small)?;
    Ok(match critical_time(channel, theta, &m, fc)? {
        CriticalTime::Finite(t) => CriticalTime::Finite(gamma_big * t),
        CriticalTime::Unbounded => CriticalTime::Unbounded,
    })
}
