//! Inverse engineering of control Hamiltonians, `H = i U̇ U†`, from a
//! prescribed evolution operator.
//!
//! Two-level systems use `U = cos θ + i sin θ (σ⃗·n⃗)` with
//! `n⃗ = (cos α, sin α cos β, sin α sin β)`. The three-level system is the
//! Λ-type STIRAP configuration with `U = R_θ R_α`, a product of real
//! rotations in the `(|2⟩, |0⟩)` and `(|2⟩, |1⟩)` planes.

use crate::error::{Error, Result};
use crate::qcore::{expm_pauli, pauli_combination, sigma_x, sigma_y, sigma_z, Mat, Mat2, Mat3, C64, I};
use crate::grid::TimeGrid;
use crate::schedule::{Angle, ControlPoint, Schedule};
use crate::table::Table;

/// Unit rotation axis `n⃗ = cos α x⃗ + sin α cos β y⃗ + sin α sin β z⃗`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitVector3 {
    pub nx: f64,
    pub ny: f64,
    pub nz: f64,
}

impl UnitVector3 {
    pub fn from_angles(alpha: f64, beta: f64) -> Self {
        let (sa, ca) = alpha.sin_cos();
        let (sb, cb) = beta.sin_cos();
        UnitVector3 {
            nx: ca,
            ny: sa * cb,
            nz: sa * sb,
        }
    }

    pub fn norm_defect(&self) -> f64 {
        (self.nx * self.nx + self.ny * self.ny + self.nz * self.nz - 1.0).abs()
    }

    /// `σ⃗·n⃗`.
    pub fn sigma_dot(&self) -> Mat2 {
        pauli_combination(self.nx, self.ny, self.nz)
    }
}

/// Two-level Hamiltonian `hx σx + hy σy + hz σz` (angular-frequency units).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Hamiltonian2 {
    pub hx: f64,
    pub hy: f64,
    pub hz: f64,
}

impl Hamiltonian2 {
    pub fn matrix(&self) -> Mat2 {
        pauli_combination(self.hx, self.hy, self.hz)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self.hx - other.hx)
            .abs()
            .max((self.hy - other.hy).abs())
            .max((self.hz - other.hz).abs())
    }

    /// `exp(-i H dt)`.
    pub fn propagator(&self, dt: f64) -> Mat2 {
        expm_pauli(self.hx, self.hy, self.hz, dt)
    }
}

/// `U = cos θ 𝓘 + i sin θ (σ⃗·n⃗)` at the given control angles.
pub fn evolution_operator_2(p: &ControlPoint) -> Mat2 {
    let (s, c) = p.theta.sin_cos();
    let n = UnitVector3::from_angles(p.alpha, p.beta);
    Mat2::identity().scale_re(c) + n.sigma_dot().scale(I * s)
}

/// General Hamiltonian for arbitrary (θ, α, β), term by term.
pub fn synthesize_2(p: &ControlPoint) -> Hamiltonian2 {
    let (st, ct) = p.theta.sin_cos();
    let (sa, ca) = p.alpha.sin_cos();
    let (sb, cb) = p.beta.sin_cos();
    let (td, ad, bd) = (p.theta_dot, p.alpha_dot, p.beta_dot);

    let hx = -td * ca + ad * st * ct * sa + bd * st * st * sa * sa;
    let hy = -td * sa * cb - ad * st * (ct * ca * cb + st * sb)
        + bd * st * sa * (ct * sb - st * ca * cb);
    let hz = -td * sa * sb - ad * st * (ct * ca * sb - st * cb)
        - bd * st * sa * (ct * cb + st * ca * sb);
    Hamiltonian2 { hx, hy, hz }
}

/// The β ≡ 0 specialization, written out on its own so that it can be
/// cross-checked against [`synthesize_2`]. β and β̇ are ignored.
pub fn synthesize_2_planar(p: &ControlPoint) -> Hamiltonian2 {
    let (st, ct) = p.theta.sin_cos();
    let (sa, ca) = p.alpha.sin_cos();
    let sc = st * ct;
    Hamiltonian2 {
        hx: -p.theta_dot * ca + p.alpha_dot * sc * sa,
        hy: -(p.theta_dot * sa + p.alpha_dot * sc * ca),
        hz: p.alpha_dot * st * st,
    }
}

/// Three-level evolution operator (requires β ≡ 0):
///
/// ```text
/// ⎡ cosθ cosα   cosθ sinα   -sinθ ⎤
/// ⎢   -sinα       cosα        0   ⎥
/// ⎣ sinθ cosα   sinθ sinα    cosθ ⎦
/// ```
pub fn evolution_operator_3(p: &ControlPoint) -> Mat3 {
    let (st, ct) = p.theta.sin_cos();
    let (sa, ca) = p.alpha.sin_cos();
    Mat3::from_real([
        [ct * ca, ct * sa, -st],
        [-sa, ca, 0.0],
        [st * ca, st * sa, ct],
    ])
}

/// Three-level Hamiltonian `i·[[0, α̇cosθ, -θ̇], [-α̇cosθ, 0, -α̇sinθ], [θ̇, α̇sinθ, 0]]`.
pub fn synthesize_3(p: &ControlPoint) -> Mat3 {
    let (st, ct) = p.theta.sin_cos();
    let (td, ad) = (p.theta_dot, p.alpha_dot);
    Mat3::from_real([
        [0.0, ad * ct, -td],
        [-ad * ct, 0.0, -ad * st],
        [td, ad * st, 0.0],
    ])
    .scale(I)
}

/// A family of engineered systems: analytic `U`, synthesized `H`, and the
/// one-step propagator `exp(-i H dt)`.
pub trait ControlSystem<const N: usize>: Sync {
    fn evolution(&self, p: &ControlPoint) -> Mat<N>;
    fn hamiltonian(&self, p: &ControlPoint) -> Mat<N>;
    fn step(&self, p: &ControlPoint, dt: f64) -> Mat<N> {
        self.hamiltonian(p).scale(C64::new(0.0, -dt)).expm()
    }
    /// Checks the preconditions this system places on a schedule.
    fn check_schedule(&self, s: &Schedule) -> Result<()>;
    /// Whether noise on `param` acts on `s` only through its integral, so
    /// the noisy state is the analytic `U` at the noisy angle.
    fn phase_integral_exact(&self, _s: &Schedule, _param: Angle) -> bool {
        false
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct TwoLevel;

impl ControlSystem<2> for TwoLevel {
    fn evolution(&self, p: &ControlPoint) -> Mat2 {
        evolution_operator_2(p)
    }

    fn hamiltonian(&self, p: &ControlPoint) -> Mat2 {
        synthesize_2(p).matrix()
    }

    fn step(&self, p: &ControlPoint, dt: f64) -> Mat2 {
        synthesize_2(p).propagator(dt)
    }

    fn check_schedule(&self, _s: &Schedule) -> Result<()> {
        Ok(())
    }

    fn phase_integral_exact(&self, s: &Schedule, param: Angle) -> bool {
        match param {
            Angle::Alpha => s.is_planar(),
            Angle::Theta => s.is_planar() && s.alpha().is_constant(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ThreeLevel;

impl ControlSystem<3> for ThreeLevel {
    fn evolution(&self, p: &ControlPoint) -> Mat3 {
        evolution_operator_3(p)
    }

    fn hamiltonian(&self, p: &ControlPoint) -> Mat3 {
        synthesize_3(p)
    }

    fn check_schedule(&self, s: &Schedule) -> Result<()> {
        check_three_level(s)
    }

    fn phase_integral_exact(&self, s: &Schedule, param: Angle) -> bool {
        param == Angle::Theta && s.alpha().is_constant()
    }
}

const INITIAL_ANGLE_TOLERANCE: f64 = 1e-12;

pub(crate) fn check_three_level(s: &Schedule) -> Result<()> {
    let p = s.point(0.0);
    if p.theta.abs() > INITIAL_ANGLE_TOLERANCE
        || p.alpha.abs() > INITIAL_ANGLE_TOLERANCE
        || !s.is_planar()
    {
        return Err(Error::InvalidThreeLevelSchedule);
    }
    Ok(())
}

/// `t, hx, hy, hz` on `steps + 1` uniform times.
pub fn hamiltonian_table_2(s: &Schedule, steps: usize) -> Result<Table> {
    let grid = TimeGrid::new(s.duration(), steps)?;
    let mut table = Table::new(["t", "hx", "hy", "hz"]);
    for t in grid.times() {
        let h = synthesize_2(&s.point(t));
        table.push(vec![t, h.hx, h.hy, h.hz])?;
    }
    Ok(table)
}

/// `t` and the real and imaginary parts of the three upper-triangle
/// entries of H, labelled by level.
pub fn hamiltonian_table_3(s: &Schedule, steps: usize) -> Result<Table> {
    check_three_level(s)?;
    let grid = TimeGrid::new(s.duration(), steps)?;
    let entries = [(0, 1), (0, 2), (1, 2)];
    let mut header = vec!["t".to_string()];
    for (i, j) in entries {
        header.push(format!("h{}{}_re", 2 - i, 2 - j));
        header.push(format!("h{}{}_im", 2 - i, 2 - j));
    }
    let mut table = Table::new(header);
    for t in grid.times() {
        let h = synthesize_3(&s.point(t));
        let mut row = vec![t];
        for (i, j) in entries {
            row.push(h[(i, j)].re);
            row.push(h[(i, j)].im);
        }
        table.push(row)?;
    }
    Ok(table)
}

pub fn evolution_operator_2_at(s: &Schedule, t: f64) -> Result<Mat2> {
    Ok(evolution_operator_2(&s.point_checked(t)?))
}

pub fn synthesize_2_at(s: &Schedule, t: f64) -> Result<Hamiltonian2> {
    Ok(synthesize_2(&s.point_checked(t)?))
}

pub fn evolution_operator_3_at(s: &Schedule, t: f64) -> Result<Mat3> {
    check_three_level(s)?;
    Ok(evolution_operator_3(&s.point_checked(t)?))
}

pub fn synthesize_3_at(s: &Schedule, t: f64) -> Result<Mat3> {
    check_three_level(s)?;
    Ok(synthesize_3(&s.point_checked(t)?))
}

/// Largest entry of `H(t) - i (U(t+h) - U(t-h)) U†(t) / 2h`; `O(h²)`.
pub fn inverse_defect<S: ControlSystem<N>, const N: usize>(
    system: &S,
    s: &Schedule,
    t: f64,
    h: f64,
) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::InvalidStep(format!("finite-difference step {h}")));
    }
    s.check_time(t - h)?;
    s.check_time(t + h)?;
    system.check_schedule(s)?;
    let u_dot = (system.evolution(&s.point(t + h)) - system.evolution(&s.point(t - h)))
        .scale_re(0.5 / h);
    let fd = (u_dot * system.evolution(&s.point(t)).dagger()).scale(I);
    Ok(system.hamiltonian(&s.point(t)).max_abs_diff(&fd))
}

/// Two-level [`inverse_defect`].
pub fn verify_inverse(s: &Schedule, t: f64, h: f64) -> Result<f64> {
    inverse_defect(&TwoLevel, s, t, h)
}

/// `(hx, hy, hz)` extracted from a traceless Hermitian 2×2 matrix.
pub fn pauli_coefficients(m: &Mat2) -> (f64, f64, f64) {
    (
        0.5 * m.trace_product(&sigma_x()).re,
        0.5 * m.trace_product(&sigma_y()).re,
        0.5 * m.trace_product(&sigma_z()).re,
    )
}
