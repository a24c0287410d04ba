//! Control schedules: the angle functions θ(t), α(t), β(t) that parametrize
//! the engineered evolution operator, together with their time derivatives.

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::Path;

use crate::error::{Error, Result};
use crate::qcore::{Ket, Ket2, C64};

/// Shape of one control angle over `[0, T]`.
///
/// The ramp families interpolate from `start` at `t = 0` to `end` at `t = T`;
/// derivatives are analytic.
#[derive(Clone, Debug, PartialEq)]
pub enum Curve {
    Constant(f64),
    Linear { start: f64, end: f64 },
    /// Cubic smoothstep `3u² - 2u³`; zero slope at both ends.
    Smoothstep { start: f64, end: f64 },
    /// `sin²(πu/2)`; zero slope at both ends.
    SineSquared { start: f64, end: f64 },
    /// Tabulated in absolute time, monotone cubic interpolation.
    Table(MonotoneTable),
}

impl Curve {
    pub fn zero() -> Self {
        Curve::Constant(0.0)
    }

    pub fn value(&self, t: f64, duration: f64) -> f64 {
        let u = t / duration;
        match self {
            Curve::Constant(c) => *c,
            Curve::Linear { start, end } => start + (end - start) * u,
            Curve::Smoothstep { start, end } => start + (end - start) * u * u * (3.0 - 2.0 * u),
            Curve::SineSquared { start, end } => {
                let s = (FRAC_PI_2 * u).sin();
                start + (end - start) * s * s
            }
            Curve::Table(table) => table.value(t),
        }
    }

    pub fn derivative(&self, t: f64, duration: f64) -> f64 {
        let u = t / duration;
        match self {
            Curve::Constant(_) => 0.0,
            Curve::Linear { start, end } => (end - start) / duration,
            Curve::Smoothstep { start, end } => (end - start) * 6.0 * u * (1.0 - u) / duration,
            Curve::SineSquared { start, end } => (end - start) * FRAC_PI_2 * (PI * u).sin() / duration,
            Curve::Table(table) => table.derivative(t),
        }
    }

    /// True when the curve has zero derivative everywhere.
    pub fn is_constant(&self) -> bool {
        match self {
            Curve::Constant(_) => true,
            Curve::Linear { start, end }
            | Curve::Smoothstep { start, end }
            | Curve::SineSquared { start, end } => start == end,
            Curve::Table(table) => table.values.windows(2).all(|w| w[0] == w[1]),
        }
    }

    pub fn is_identically_zero(&self) -> bool {
        self.is_constant() && self.value(0.0, 1.0) == 0.0
    }
}

/// Monotone piecewise-cubic Hermite interpolant through `(t, value)` samples.
///
/// Tangents follow the Fritsch–Butland harmonic-mean rule, so the interpolant
/// never overshoots between monotone samples.
#[derive(Clone, Debug, PartialEq)]
pub struct MonotoneTable {
    times: Vec<f64>,
    values: Vec<f64>,
    tangents: Vec<f64>,
}

impl MonotoneTable {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::InvalidTable("column lengths differ".into()));
        }
        if times.len() < 2 {
            return Err(Error::InvalidTable("need at least two rows".into()));
        }
        if times.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::InvalidTable("non-finite entry".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidTable("times must be strictly increasing".into()));
        }
        let n = times.len();
        let h: Vec<f64> = times.windows(2).map(|w| w[1] - w[0]).collect();
        let d: Vec<f64> = (0..n - 1).map(|k| (values[k + 1] - values[k]) / h[k]).collect();
        let mut tangents = vec![0.0; n];
        tangents[0] = d[0];
        tangents[n - 1] = d[n - 2];
        for k in 1..n - 1 {
            tangents[k] = if d[k - 1] * d[k] <= 0.0 {
                0.0
            } else {
                let (h0, h1) = (h[k - 1], h[k]);
                3.0 * (h0 + h1) / ((2.0 * h1 + h0) / d[k - 1] + (h1 + 2.0 * h0) / d[k])
            };
        }
        Ok(MonotoneTable {
            times,
            values,
            tangents,
        })
    }

    /// Parses two-column text: one `t value` pair per line, separated by
    /// whitespace or a comma. Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut times = Vec::new();
        let mut values = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|f| !f.is_empty())
                .collect();
            if fields.len() != 2 {
                return Err(Error::InvalidTable(format!(
                    "line {}: expected two columns",
                    lineno + 1
                )));
            }
            let parse = |f: &str| {
                f.parse::<f64>()
                    .map_err(|_| Error::InvalidTable(format!("line {}: bad number {f:?}", lineno + 1)))
            };
            times.push(parse(fields[0])?);
            values.push(parse(fields[1])?);
        }
        Self::new(times, values)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| Error::InvalidTable(format!("{}: {e}", path.as_ref().display())))?;
        Self::parse(&text)
    }

    pub fn start(&self) -> f64 {
        self.times[0]
    }

    pub fn end(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    fn segment(&self, t: f64) -> (usize, f64, f64) {
        let n = self.times.len();
        let k = match self.times.partition_point(|&x| x <= t) {
            0 => 0,
            p if p >= n => n - 2,
            p => p - 1,
        };
        let h = self.times[k + 1] - self.times[k];
        (k, h, (t - self.times[k]) / h)
    }

    pub fn value(&self, t: f64) -> f64 {
        let (k, h, s) = self.segment(t);
        let (s2, s3) = (s * s, s * s * s);
        (2.0 * s3 - 3.0 * s2 + 1.0) * self.values[k]
            + (s3 - 2.0 * s2 + s) * h * self.tangents[k]
            + (-2.0 * s3 + 3.0 * s2) * self.values[k + 1]
            + (s3 - s2) * h * self.tangents[k + 1]
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let (k, h, s) = self.segment(t);
        let s2 = s * s;
        ((6.0 * s2 - 6.0 * s) * self.values[k]
            + (3.0 * s2 - 4.0 * s + 1.0) * h * self.tangents[k]
            + (-6.0 * s2 + 6.0 * s) * self.values[k + 1]
            + (3.0 * s2 - 2.0 * s) * h * self.tangents[k + 1])
            / h
    }
}

/// Control angles and their rates at one instant.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ControlPoint {
    pub theta: f64,
    pub alpha: f64,
    pub beta: f64,
    pub theta_dot: f64,
    pub alpha_dot: f64,
    pub beta_dot: f64,
}

/// Which control angle a drift integral or a noise source refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Angle {
    Theta,
    Alpha,
}

/// A complete control schedule over `[0, T]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Schedule {
    duration: f64,
    theta: Curve,
    alpha: Curve,
    beta: Curve,
}

const CONSISTENCY_TOLERANCE: f64 = 1e-12;

impl Schedule {
    pub fn new(duration: f64, theta: Curve, alpha: Curve, beta: Curve) -> Result<Self> {
        if !(duration.is_finite() && duration > 0.0) {
            return Err(Error::InvalidDuration(duration));
        }
        for curve in [&theta, &alpha, &beta] {
            if let Curve::Table(table) = curve {
                let slack = 1e-12 * duration;
                if table.start() > slack || table.end() < duration - slack {
                    return Err(Error::TableTooShort(duration));
                }
            }
        }
        let s = Schedule {
            duration,
            theta,
            alpha,
            beta,
        };
        let sin0 = s.theta.value(0.0, duration).sin();
        if sin0.abs() > CONSISTENCY_TOLERANCE {
            return Err(Error::InconsistentInitialAngle(sin0));
        }
        const PROBES: usize = 256;
        for k in 0..=PROBES {
            let p = s.point(duration * k as f64 / PROBES as f64);
            let all = [p.theta, p.alpha, p.beta, p.theta_dot, p.alpha_dot, p.beta_dot];
            if all.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteCurve);
            }
        }
        Ok(s)
    }

    /// β ≡ 0 schedule.
    pub fn planar(duration: f64, theta: Curve, alpha: Curve) -> Result<Self> {
        Self::new(duration, theta, alpha, Curve::zero())
    }

    /// θ(t) = θ_T t/T, α(t) = α_T t/T, β ≡ 0.
    pub fn linear_ramp(duration: f64, theta_final: f64, alpha_final: f64) -> Result<Self> {
        Self::planar(
            duration,
            Curve::Linear {
                start: 0.0,
                end: theta_final,
            },
            Curve::Linear {
                start: 0.0,
                end: alpha_final,
            },
        )
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn theta(&self) -> &Curve {
        &self.theta
    }

    pub fn alpha(&self) -> &Curve {
        &self.alpha
    }

    pub fn beta(&self) -> &Curve {
        &self.beta
    }

    pub fn is_planar(&self) -> bool {
        self.beta.is_identically_zero()
    }

    /// Control angles and rates at `t`; no range check.
    pub fn point(&self, t: f64) -> ControlPoint {
        let d = self.duration;
        ControlPoint {
            theta: self.theta.value(t, d),
            alpha: self.alpha.value(t, d),
            beta: self.beta.value(t, d),
            theta_dot: self.theta.derivative(t, d),
            alpha_dot: self.alpha.derivative(t, d),
            beta_dot: self.beta.derivative(t, d),
        }
    }

    pub fn point_checked(&self, t: f64) -> Result<ControlPoint> {
        self.check_time(t)?;
        Ok(self.point(t))
    }

    pub fn check_time(&self, t: f64) -> Result<()> {
        if t.is_nan() || t < 0.0 || t > self.duration * (1.0 + 1e-12) {
            return Err(Error::TimeOutOfRange {
                t,
                duration: self.duration,
            });
        }
        Ok(())
    }

    pub fn curve(&self, which: Angle) -> &Curve {
        match which {
            Angle::Theta => &self.theta,
            Angle::Alpha => &self.alpha,
        }
    }
}

/// Accumulated drift `∫₀ᵗ ẋ(s) ds` of one control angle (θ₀(t) or α₀(t)).
///
/// Every curve family carries its exact antiderivative, so this is evaluated
/// as `x(t) - x(0)` with no quadrature error.
pub fn integrate_drift(s: &Schedule, which: Angle, t: f64) -> Result<f64> {
    s.check_time(t)?;
    let curve = s.curve(which);
    Ok(curve.value(t, s.duration) - curve.value(0.0, s.duration))
}

/// Target state `μ|1⟩ + ν|0⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TargetSpec {
    mu: C64,
    nu: C64,
}

impl TargetSpec {
    pub fn new(mu: C64, nu: C64) -> Result<Self> {
        let norm = mu.norm_sqr() + nu.norm_sqr();
        if !norm.is_finite() || (norm - 1.0).abs() > 1e-12 {
            return Err(Error::TargetNotNormalized(norm));
        }
        Ok(TargetSpec { mu, nu })
    }

    pub fn mu(&self) -> C64 {
        self.mu
    }

    pub fn nu(&self) -> C64 {
        self.nu
    }

    pub fn ket(&self) -> Ket2 {
        Ket([self.mu, self.nu])
    }

    /// Endpoint angles `(θ(T), α(T))` reaching this target.
    ///
    /// The phase of μ is absorbed into an (unobservable) global phase so that
    /// `sin θ(T) = |μ|` with `θ(T) ∈ [0, π/2]`; α(T) then solves
    /// `-i e^{iα(T)} cos θ(T) = ν e^{-i arg μ}`. When `ν = 0`, α(T) = 0.
    pub fn endpoint_angles(&self) -> (f64, f64) {
        let abs_mu = self.mu.norm().min(1.0);
        let theta = abs_mu.asin();
        let nu = if abs_mu > 0.0 {
            self.nu * (self.mu / abs_mu).conj()
        } else {
            self.nu
        };
        if nu.norm() <= 1e-15 {
            return (theta, 0.0);
        }
        // e^{iα} = i ν / |ν|
        let rotated = nu * C64::new(0.0, 1.0);
        (theta, rotated.im.atan2(rotated.re))
    }
}

/// Linear-ramp schedule reaching `spec` at time `duration`.
pub fn solve_target(spec: &TargetSpec, duration: f64) -> Result<Schedule> {
    let (theta, alpha) = spec.endpoint_angles();
    Schedule::linear_ramp(duration, theta, alpha)
}
