//! Closed-form noisy density matrices for the two engineered qubit channels.
//!
//! Noise on α̇ dephases: populations are untouched and coherences shrink by
//! the damping factor `r`. Noise on θ̇ depolarizes: the Bloch vector shrinks
//! by `r⁴` towards `𝓘/2`. In both cases the initial state is `|0⟩` and the
//! schedule has β ≡ 0.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};
use crate::noise::{NoiseKind, NoiseModel};
use crate::qcore::{overlap, sigma_x, sigma_y, sigma_z, Density2, Ket2, Mat, Mat2, C64, I, ONE, ZERO};
use crate::schedule::{Angle, Schedule};
use crate::synth::evolution_operator_2;

/// Which engineered channel a noise source produces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Channel {
    /// Noise on α̇.
    Dephasing,
    /// Noise on θ̇.
    Depolarizing,
}

impl Channel {
    pub fn noisy_parameter(&self) -> Angle {
        match self {
            Channel::Dephasing => Angle::Alpha,
            Channel::Depolarizing => Angle::Theta,
        }
    }

    pub fn for_parameter(param: Angle) -> Self {
        match param {
            Angle::Alpha => Channel::Dephasing,
            Angle::Theta => Channel::Depolarizing,
        }
    }

    pub fn rho(&self, s: &Schedule, m: &NoiseModel, t: f64) -> Result<Density2> {
        match self {
            Channel::Dephasing => dephasing_rho(s, m, t),
            Channel::Depolarizing => depolarizing_rho(s, m, t),
        }
    }

    pub fn fidelity(&self, s: &Schedule, m: &NoiseModel, t: f64) -> Result<f64> {
        match self {
            Channel::Dephasing => Ok(dephasing_fidelity(s.point_checked(t)?.theta, m, t)),
            Channel::Depolarizing => {
                s.check_time(t)?;
                Ok(depolarizing_fidelity(m, t))
            }
        }
    }
}

/// Conditions under which a closed-form result should be read with care.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Caveat {
    /// θ̇ noise with nonzero bias: the bias shifts θ, so `sin θ(0) = 0` only
    /// holds if the bias is known and compensated when preparing the state.
    BiasedThetaNoise,
    /// The four-operator Kraus form is only defined for unbiased θ̇ noise.
    KrausUnavailable,
}

/// Everything known in closed form about a channel at one time.
#[derive(Clone, Debug)]
pub struct ChannelSnapshot<const N: usize> {
    pub t: f64,
    pub rho: crate::qcore::DensityMatrix<N>,
    pub kraus: Option<Vec<Mat<N>>>,
    pub r: f64,
    pub fidelity: f64,
    pub caveats: Vec<Caveat>,
}

/// Noiseless engineered state `U(t)|0⟩`.
pub fn noiseless_state(s: &Schedule, t: f64) -> Result<Ket2> {
    Ok(evolution_operator_2(&s.point_checked(t)?).apply(&Ket2::level(0)))
}

/// `Σ K ρ K†`.
pub fn apply_kraus<const N: usize>(kraus: &[Mat<N>], rho: &Mat<N>) -> Mat<N> {
    kraus.iter().fold(Mat::zeros(), |acc, k| acc + k.sandwich(rho))
}

/// Largest entry of `Σ K†K - 𝓘`.
pub fn completeness_defect<const N: usize>(kraus: &[Mat<N>]) -> f64 {
    kraus
        .iter()
        .fold(Mat::<N>::zeros(), |acc, k| acc + k.dagger() * *k)
        .max_abs_diff(&Mat::identity())
}

/// Qubit density matrix with populations `(1 ∓ c)/2` and upper coherence
/// `i s e^{-iφ}/2`, where `c` and `s` are the (damped) cosine and sine.
fn qubit_rho(cos_term: f64, sin_term: f64, phase: f64) -> Mat2 {
    let coherence = I * C64::from_polar(0.5 * sin_term, -phase);
    Mat([
        [C64::new(0.5 * (1.0 - cos_term), 0.0), coherence],
        [coherence.conj(), C64::new(0.5 * (1.0 + cos_term), 0.0)],
    ])
}

/// Dephased state under α̇ noise: coherences carry `r e^{∓i[α(t) + ξ₀t]}`.
///
/// `α(t)` here is the full deterministic angle, so a schedule with
/// `α(0) ≠ 0` is handled as well.
pub fn dephasing_rho(s: &Schedule, m: &NoiseModel, t: f64) -> Result<Density2> {
    let p = s.point_checked(t)?;
    let r = m.damping_factor(t);
    let two_theta = 2.0 * p.theta;
    Density2::new(qubit_rho(two_theta.cos(), two_theta.sin() * r, p.alpha + m.bias() * t))
}

/// `K₁ = diag[r e^{-iξ₀t}, 1]`, `K₂ = diag[√(1 - r²), 0]`.
pub fn dephasing_kraus(m: &NoiseModel, t: f64) -> [Mat2; 2] {
    let r = m.damping_factor(t);
    [
        Mat2::diag([C64::from_polar(r, -m.bias() * t), ONE]),
        Mat2::diag([C64::new((1.0 - r * r).max(0.0).sqrt(), 0.0), ZERO]),
    ]
}

/// `𝓕 = √(1 - ½ sin²(2θ) (1 - r cos ξ₀t))`.
pub fn dephasing_fidelity(theta: f64, m: &NoiseModel, t: f64) -> f64 {
    let r = m.damping_factor(t);
    let s2 = (2.0 * theta).sin().powi(2);
    (1.0 - 0.5 * s2 * (1.0 - r * (m.bias() * t).cos())).max(0.0).sqrt()
}

/// Critical time of a fidelity threshold.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CriticalTime {
    Finite(f64),
    /// The fidelity never drops below the threshold.
    Unbounded,
}

impl CriticalTime {
    pub fn finite(self) -> Option<f64> {
        match self {
            CriticalTime::Finite(t) => Some(t),
            CriticalTime::Unbounded => None,
        }
    }
}

fn check_threshold(fc: f64) -> Result<()> {
    if !(fc > 0.0 && fc < 1.0) {
        return Err(Error::InvalidThreshold(fc));
    }
    Ok(())
}

/// Damping factor below which the dephasing fidelity drops under `fc`;
/// `None` if the fidelity floor `√(1 - sin²(2θ)/2)` already clears it.
fn dephasing_threshold_r(theta: f64, fc: f64) -> Option<f64> {
    let s2 = (2.0 * theta).sin().powi(2);
    let r = 1.0 - 2.0 * (1.0 - fc * fc) / s2;
    (r > 0.0).then_some(r)
}

/// White-noise critical time `t_c = -(4/Γ) ln[1 - 2(1 - 𝓕c²)/sin²(2θ)]`.
pub fn dephasing_tc(theta: f64, strength: f64, fc: f64) -> Result<CriticalTime> {
    check_threshold(fc)?;
    if !(strength.is_finite() && strength >= 0.0) {
        return Err(Error::InvalidNoise(format!("strength {strength}")));
    }
    match dephasing_threshold_r(theta, fc) {
        Some(r) if strength > 0.0 => Ok(CriticalTime::Finite(-4.0 / strength * r.ln())),
        _ => Ok(CriticalTime::Unbounded),
    }
}

/// Depolarized state under θ̇ noise: Bloch components along the engineered
/// state shrink by `r⁴`, with the angle advanced by the bias, `2θ(t) + 2ξ₀t`.
pub fn depolarizing_rho(s: &Schedule, m: &NoiseModel, t: f64) -> Result<Density2> {
    let p = s.point_checked(t)?;
    let r4 = m.damping_factor(t).powi(4);
    let angle = 2.0 * p.theta + 2.0 * m.bias() * t;
    Density2::new(qubit_rho(r4 * angle.cos(), r4 * angle.sin(), p.alpha))
}

/// `D₁ = √(1+3r⁴) 𝓘/2`, `D₂,₃,₄ = √(1-r⁴) σ_{x,y,z}/2`; unbiased noise only.
pub fn depolarizing_kraus(m: &NoiseModel, t: f64) -> Result<[Mat2; 4]> {
    if m.bias() != 0.0 {
        return Err(Error::BiasedKraus(m.bias()));
    }
    let r4 = m.damping_factor(t).powi(4);
    let a = 0.5 * (1.0 + 3.0 * r4).sqrt();
    let b = 0.5 * (1.0 - r4).max(0.0).sqrt();
    Ok([
        Mat2::identity().scale_re(a),
        sigma_x().scale_re(b),
        sigma_y().scale_re(b),
        sigma_z().scale_re(b),
    ])
}

/// `𝓕 = √(½ [1 + r⁴ cos(2ξ₀t)])`; independent of the schedule.
pub fn depolarizing_fidelity(m: &NoiseModel, t: f64) -> f64 {
    let r4 = m.damping_factor(t).powi(4);
    (0.5 * (1.0 + r4 * (2.0 * m.bias() * t).cos())).sqrt()
}

/// White-noise critical time `t_c = -ln(2𝓕c² - 1)/Γ`.
pub fn depolarizing_tc(strength: f64, fc: f64) -> Result<f64> {
    if fc <= FRAC_1_SQRT_2 {
        return Err(Error::UnreachableThreshold(fc));
    }
    check_threshold(fc)?;
    if !(strength.is_finite() && strength > 0.0) {
        return Err(Error::InvalidNoise(format!("strength {strength}")));
    }
    Ok(-(2.0 * fc * fc - 1.0).ln() / strength)
}

/// Largest time with `𝓕 ≥ fc` for any unbiased noise model, found by
/// inverting the monotone damping factor. `theta` is ignored for the
/// depolarizing channel.
pub fn critical_time(channel: Channel, theta: f64, m: &NoiseModel, fc: f64) -> Result<CriticalTime> {
    check_threshold(fc)?;
    if m.bias() != 0.0 {
        return Err(Error::BiasedNoise(m.bias()));
    }
    let r_c = match channel {
        Channel::Dephasing => match dephasing_threshold_r(theta, fc) {
            Some(r) => r,
            None => return Ok(CriticalTime::Unbounded),
        },
        Channel::Depolarizing => {
            if fc <= FRAC_1_SQRT_2 {
                return Err(Error::UnreachableThreshold(fc));
            }
            (2.0 * fc * fc - 1.0).powf(0.25)
        }
    };
    if m.strength() == 0.0 {
        return Ok(CriticalTime::Unbounded);
    }
    // r(t) ≥ r_c  ⟺  Var Φ(t) ≤ -2 ln r_c, and Var Φ is increasing.
    let target = -2.0 * r_c.ln();
    if let NoiseKind::White = m.kind() {
        return Ok(CriticalTime::Finite(2.0 * target / m.strength()));
    }
    let mut hi = 1.0 / m.strength();
    while m.phase_variance(hi) < target {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if m.phase_variance(mid) <= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(CriticalTime::Finite(lo))
}

pub fn dephasing_snapshot(s: &Schedule, m: &NoiseModel, t: f64) -> Result<ChannelSnapshot<2>> {
    let rho = dephasing_rho(s, m, t)?;
    Ok(ChannelSnapshot {
        t,
        rho,
        kraus: Some(dephasing_kraus(m, t).to_vec()),
        r: m.damping_factor(t),
        fidelity: dephasing_fidelity(s.point(t).theta, m, t),
        caveats: Vec::new(),
    })
}

pub fn depolarizing_snapshot(s: &Schedule, m: &NoiseModel, t: f64) -> Result<ChannelSnapshot<2>> {
    let rho = depolarizing_rho(s, m, t)?;
    let mut caveats = Vec::new();
    let kraus = match depolarizing_kraus(m, t) {
        Ok(k) => Some(k.to_vec()),
        Err(_) => {
            caveats.push(Caveat::BiasedThetaNoise);
            caveats.push(Caveat::KrausUnavailable);
            None
        }
    };
    Ok(ChannelSnapshot {
        t,
        rho,
        kraus,
        r: m.damping_factor(t),
        fidelity: depolarizing_fidelity(m, t),
        caveats,
    })
}

/// `√⟨ψ₀(t)|ρ(t)|ψ₀(t)⟩` computed from the closed-form ρ.
pub fn fidelity_from_rho(s: &Schedule, rho: &Density2, t: f64) -> Result<f64> {
    Ok(overlap(&noiseless_state(s, t)?, rho.matrix())?.sqrt())
}
