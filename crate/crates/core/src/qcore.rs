//! Fixed-size complex linear algebra for two- and three-level systems.
//!
//! Matrices and kets are stored inline (`[[C64; N]; N]`), so nothing here
//! allocates. Basis vectors are ordered from the highest level down: for a
//! qubit index 0 is `|1⟩` and index 1 is `|0⟩`, which makes
//! `σz = diag(1, -1)` with `|1⟩` the `+1` eigenvector. The three-level
//! ordering is `(|2⟩, |1⟩, |0⟩)`. Use [`Ket::level`] rather than raw indices.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Square complex matrix of fixed dimension, row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat<const N: usize>(pub [[C64; N]; N]);

pub type Mat2 = Mat<2>;
pub type Mat3 = Mat<3>;

impl<const N: usize> Mat<N> {
    pub const fn zeros() -> Self {
        Mat([[ZERO; N]; N])
    }

    pub fn identity() -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            m.0[i][i] = ONE;
        }
        m
    }

    pub fn from_real(rows: [[f64; N]; N]) -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            for j in 0..N {
                m.0[i][j] = C64::new(rows[i][j], 0.0);
            }
        }
        m
    }

    pub fn diag(d: [C64; N]) -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            m.0[i][i] = d[i];
        }
        m
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            for j in 0..N {
                m.0[i][j] = self.0[j][i].conj();
            }
        }
        m
    }

    pub fn transpose(&self) -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            for j in 0..N {
                m.0[i][j] = self.0[j][i];
            }
        }
        m
    }

    pub fn trace(&self) -> C64 {
        (0..N).map(|i| self.0[i][i]).sum()
    }

    pub fn scale(&self, z: C64) -> Self {
        let mut m = *self;
        m.0.iter_mut().flatten().for_each(|e| *e *= z);
        m
    }

    pub fn scale_re(&self, x: f64) -> Self {
        self.scale(C64::new(x, 0.0))
    }

    pub fn apply(&self, v: &Ket<N>) -> Ket<N> {
        let mut out = [ZERO; N];
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..N).map(|j| self.0[i][j] * v.0[j]).sum();
        }
        Ket(out)
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().map(|e| e.norm()).fold(0.0, f64::max)
    }

    /// Largest absolute entry of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (*self - *other).max_abs()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|e| e.re.is_finite() && e.im.is_finite())
    }

    /// Largest absolute entry of `self - self†`.
    pub fn hermiticity_defect(&self) -> f64 {
        self.max_abs_diff(&self.dagger())
    }

    /// `Tr(self · other)`.
    pub fn trace_product(&self, other: &Self) -> C64 {
        let mut acc = ZERO;
        for i in 0..N {
            for k in 0..N {
                acc += self.0[i][k] * other.0[k][i];
            }
        }
        acc
    }

    /// `A ρ A†`.
    pub fn sandwich(&self, rho: &Self) -> Self {
        *self * *rho * self.dagger()
    }

    /// `1`-norm (max column sum); used to pick the scaling for [`Mat::expm`].
    pub fn norm_one(&self) -> f64 {
        (0..N)
            .map(|j| (0..N).map(|i| self.0[i][j].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Matrix exponential by scaling and squaring with a truncated Taylor
    /// series. Adequate for the small, well-conditioned generators produced
    /// by single propagation steps.
    pub fn expm(&self) -> Self {
        let norm = self.norm_one();
        let squarings = if norm > 0.5 {
            (norm / 0.5).log2().ceil() as u32
        } else {
            0
        };
        let a = self.scale_re(0.5f64.powi(squarings as i32));
        // ‖a‖ ≤ 1/2: 18 terms push the truncation well below f64 epsilon.
        let mut term = Self::identity();
        let mut sum = Self::identity();
        for k in 1..=18 {
            term = (term * a).scale_re(1.0 / k as f64);
            sum = sum + term;
        }
        for _ in 0..squarings {
            sum = sum * sum;
        }
        sum
    }
}

impl<const N: usize> Default for Mat<N> {
    fn default() -> Self {
        Self::zeros()
    }
}

impl<const N: usize> Index<(usize, usize)> for Mat<N> {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.0[i][j]
    }
}

impl<const N: usize> IndexMut<(usize, usize)> for Mat<N> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.0[i][j]
    }
}

impl<const N: usize> Add for Mat<N> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for i in 0..N {
            for j in 0..N {
                self.0[i][j] += rhs.0[i][j];
            }
        }
        self
    }
}

impl<const N: usize> Sub for Mat<N> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        for i in 0..N {
            for j in 0..N {
                self.0[i][j] -= rhs.0[i][j];
            }
        }
        self
    }
}

impl<const N: usize> Neg for Mat<N> {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale_re(-1.0)
    }
}

impl<const N: usize> Mul for Mat<N> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        mat_mul(&self, &rhs)
    }
}

/// Standard matrix product.
pub fn mat_mul<const N: usize>(a: &Mat<N>, b: &Mat<N>) -> Mat<N> {
    let mut m = Mat::zeros();
    for i in 0..N {
        for j in 0..N {
            let mut acc = ZERO;
            for k in 0..N {
                acc += a.0[i][k] * b.0[k][j];
            }
            m.0[i][j] = acc;
        }
    }
    m
}

pub fn sigma_x() -> Mat2 {
    Mat([[ZERO, ONE], [ONE, ZERO]])
}

pub fn sigma_y() -> Mat2 {
    Mat([[ZERO, -I], [I, ZERO]])
}

pub fn sigma_z() -> Mat2 {
    Mat([[ONE, ZERO], [ZERO, -ONE]])
}

/// `x σx + y σy + z σz`.
pub fn pauli_combination(x: f64, y: f64, z: f64) -> Mat2 {
    Mat([
        [C64::new(z, 0.0), C64::new(x, -y)],
        [C64::new(x, y), C64::new(-z, 0.0)],
    ])
}

/// `exp(-i dt (x σx + y σy + z σz))` in closed Euler–Rodrigues form.
/// Exactly unitary up to rounding for any input.
pub fn expm_pauli(x: f64, y: f64, z: f64, dt: f64) -> Mat2 {
    let norm = (x * x + y * y + z * z).sqrt();
    if norm == 0.0 {
        return Mat2::identity();
    }
    let phi = norm * dt;
    let (s, c) = phi.sin_cos();
    let k = s / norm;
    // cos φ 𝓘 - i sin φ (n̂·σ)
    Mat([
        [C64::new(c, -k * z), C64::new(-k * y, -k * x)],
        [C64::new(k * y, -k * x), C64::new(c, k * z)],
    ])
}

/// True iff the largest entry of `a†a - 𝓘` is at most `tol`.
pub fn is_unitary<const N: usize>(a: &Mat<N>, tol: f64) -> bool {
    unitarity_defect(a) <= tol
}

pub fn unitarity_defect<const N: usize>(a: &Mat<N>) -> f64 {
    (a.dagger() * *a).max_abs_diff(&Mat::identity())
}

/// State vector of fixed dimension.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ket<const N: usize>(pub [C64; N]);

pub type Ket2 = Ket<2>;
pub type Ket3 = Ket<3>;

impl<const N: usize> Ket<N> {
    /// Basis ket for energy level `n` (`|0⟩` is the lowest level).
    pub fn level(n: usize) -> Self {
        assert!(n < N, "level {n} out of range for dimension {N}");
        let mut v = [ZERO; N];
        v[N - 1 - n] = ONE;
        Ket(v)
    }

    /// Amplitude on energy level `n`.
    pub fn amplitude(&self, n: usize) -> C64 {
        self.0[N - 1 - n]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_sqr().sqrt();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::NotNormalizable);
        }
        let mut v = *self;
        v.0.iter_mut().for_each(|a| *a /= n);
        Ok(v)
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> C64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a.conj() * b).sum()
    }

    /// `|self⟩⟨self|`.
    pub fn projector(&self) -> Mat<N> {
        let mut m = Mat::zeros();
        for i in 0..N {
            for j in 0..N {
                m.0[i][j] = self.0[i] * self.0[j].conj();
            }
        }
        m
    }

    /// True iff the two kets describe the same ray: `|⟨a|b⟩| = 1` within `tol`.
    pub fn same_ray(&self, other: &Self, tol: f64) -> bool {
        (self.inner(other).norm() - 1.0).abs() <= tol
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Eigenvalues of a Hermitian matrix in ascending order. Only the Hermitian
/// part of the input is used.
pub fn hermitian_eigenvalues<const N: usize>(a: &Mat<N>) -> [f64; N] {
    let mut out = [0.0; N];
    match N {
        1 => out[0] = a.0[0][0].re,
        2 => {
            let (p, q) = (a.0[0][0].re, a.0[1][1].re);
            let b = 0.5 * (a.0[0][1] + a.0[1][0].conj());
            let mean = 0.5 * (p + q);
            let rad = (0.25 * (p - q) * (p - q) + b.norm_sqr()).sqrt();
            out[0] = mean - rad;
            out[1] = mean + rad;
        }
        3 => {
            let e = eigenvalues_3(a);
            out[..3].copy_from_slice(&e);
        }
        _ => unreachable!("only 2- and 3-level systems are supported"),
    }
    out
}

// Cyclic Jacobi on the real symmetric embedding [[Re, -Im], [Im, Re]], whose
// spectrum is that of the Hermitian part with every eigenvalue doubled.
// Unlike the cubic formula this stays accurate at degenerate eigenvalues.
fn eigenvalues_3<const N: usize>(a: &Mat<N>) -> [f64; 3] {
    const M: usize = 6;
    let mut s = [[0.0f64; M]; M];
    for i in 0..3 {
        for j in 0..3 {
            let h = 0.5 * (a.0[i][j] + a.0[j][i].conj());
            s[i][j] = h.re;
            s[i + 3][j + 3] = h.re;
            s[i + 3][j] = h.im;
            s[i][j + 3] = -h.im;
        }
    }
    for _ in 0..64 {
        let off: f64 = (0..M).flat_map(|i| (0..M).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| s[i][j] * s[i][j]).sum();
        let diag: f64 = (0..M).map(|i| s[i][i] * s[i][i]).sum();
        if off <= 1e-36 * diag || off == 0.0 {
            break;
        }
        for p in 0..M - 1 {
            for q in p + 1..M {
                if s[p][q] == 0.0 {
                    continue;
                }
                let theta = 0.5 * (s[q][q] - s[p][p]) / s[p][q];
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..M {
                    let (kp, kq) = (s[k][p], s[k][q]);
                    s[k][p] = c * kp - sn * kq;
                    s[k][q] = sn * kp + c * kq;
                }
                for k in 0..M {
                    let (pk, qk) = (s[p][k], s[q][k]);
                    s[p][k] = c * pk - sn * qk;
                    s[q][k] = sn * pk + c * qk;
                }
            }
        }
    }
    let mut e: Vec<f64> = (0..M).map(|i| s[i][i]).collect();
    e.sort_by(f64::total_cmp);
    [0.5 * (e[0] + e[1]), 0.5 * (e[2] + e[3]), 0.5 * (e[4] + e[5])]
}

/// True iff `rho` is Hermitian, unit-trace and positive semidefinite within
/// `tol` (eigenvalues in `[-tol, 1 + tol]`).
pub fn check_density<const N: usize>(rho: &Mat<N>, tol: f64) -> bool {
    density_violation(rho, tol).is_none()
}

fn density_violation<const N: usize>(rho: &Mat<N>, tol: f64) -> Option<Error> {
    if !rho.is_finite() {
        return Some(Error::NonFinite);
    }
    let herm = rho.hermiticity_defect();
    if herm > tol {
        return Some(Error::NotHermitian(herm));
    }
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
        return Some(Error::BadTrace(tr.re));
    }
    let ev = hermitian_eigenvalues(rho);
    if ev[0] < -tol || ev[N - 1] > 1.0 + tol {
        return Some(Error::NotPositive(ev[0]));
    }
    None
}

/// A density matrix that passed [`check_density`] at construction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityMatrix<const N: usize>(Mat<N>);

pub type Density2 = DensityMatrix<2>;
pub type Density3 = DensityMatrix<3>;

impl<const N: usize> DensityMatrix<N> {
    pub const TOLERANCE: f64 = 1e-10;

    pub fn new(m: Mat<N>) -> Result<Self> {
        Self::with_tolerance(m, Self::TOLERANCE)
    }

    pub fn with_tolerance(m: Mat<N>, tol: f64) -> Result<Self> {
        match density_violation(&m, tol) {
            None => Ok(DensityMatrix(m)),
            Some(e) => Err(e),
        }
    }

    pub fn pure(psi: &Ket<N>) -> Self {
        DensityMatrix(psi.projector())
    }

    pub fn maximally_mixed() -> Self {
        DensityMatrix(Mat::identity().scale_re(1.0 / N as f64))
    }

    pub fn matrix(&self) -> &Mat<N> {
        &self.0
    }

    pub fn into_matrix(self) -> Mat<N> {
        self.0
    }

    pub fn purity(&self) -> f64 {
        self.0.trace_product(&self.0).re
    }

    /// Population of energy level `n`.
    pub fn population(&self, n: usize) -> f64 {
        self.0.0[N - 1 - n][N - 1 - n].re
    }
}

const OVERLAP_TOLERANCE: f64 = 1e-9;

/// `⟨ψ|ρ|ψ⟩`, clamped into `[0, 1]` when within rounding of the boundary.
pub fn overlap<const N: usize>(psi: &Ket<N>, rho: &Mat<N>) -> Result<f64> {
    let value = psi.inner(&rho.apply(psi)).re;
    if value < -OVERLAP_TOLERANCE || value > 1.0 + OVERLAP_TOLERANCE || !value.is_finite() {
        return Err(Error::NonPhysicalOverlap(value));
    }
    Ok(value.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    #[test]
    fn pauli_involution_and_product() {
        let x = sigma_x();
        assert_eq!(x * x, Mat2::identity());
        let xy = sigma_x() * sigma_y();
        assert!(xy.max_abs_diff(&sigma_z().scale(I)) < 1e-15);
    }

    #[test]
    fn unitarity_checks() {
        assert!(is_unitary(&Mat2::identity(), 1e-12));
        assert!(!is_unitary(&Mat2::identity().scale_re(2.0), 1e-12));
        // cos θ + i sin θ (σx cos α + σy sin α) at θ = π/3, α = 0.7
        let (th, al) = (PI / 3.0, 0.7f64);
        let u = Mat2::identity().scale_re(th.cos())
            + (sigma_x().scale_re(al.cos()) + sigma_y().scale_re(al.sin())).scale(I * th.sin());
        assert!(is_unitary(&u, 1e-12));
    }

    #[test]
    fn density_checks() {
        assert!(check_density(&Mat2::identity().scale_re(0.5), 1e-12));
        let bad = Mat2::from_real([[1.2, 0.0], [0.0, -0.2]]);
        assert!(!check_density(&bad, 1e-12));
        assert!(matches!(Density2::new(bad), Err(Error::NotPositive(_))));
        let not_herm = Mat([[C64::new(0.5, 0.0), ONE], [ZERO, C64::new(0.5, 0.0)]]);
        assert!(matches!(Density2::new(not_herm), Err(Error::NotHermitian(_))));
        let bad_trace = Mat2::identity();
        assert!(matches!(Density2::new(bad_trace), Err(Error::BadTrace(_))));
    }

    #[test]
    fn dephased_density_at_pi_over_8_is_physical() {
        // Dephased qubit at θ = π/8, r = 0.5, α₀ + ξ₀t = 0.
        let th = PI / 8.0;
        let r = 0.5;
        let off = I * (0.5 * (2.0 * th).sin() * r);
        let rho = Mat([
            [C64::new(0.5 * (1.0 - (2.0 * th).cos()), 0.0), off],
            [-off, C64::new(0.5 * (1.0 + (2.0 * th).cos()), 0.0)],
        ]);
        // quadratic formula on the 2×2 characteristic polynomial
        let (a, d, b2) = (rho[(0, 0)].re, rho[(1, 1)].re, off.norm_sqr());
        let disc = ((a + d) * (a + d) - 4.0 * (a * d - b2)).sqrt();
        let oracle = [0.5 * (a + d - disc), 0.5 * (a + d + disc)];
        let ev = hermitian_eigenvalues(&rho);
        assert!((ev[0] - oracle[0]).abs() < 1e-14 && (ev[1] - oracle[1]).abs() < 1e-14);
        assert!(oracle[0] > 0.0);
        assert!(check_density(&rho, 1e-12));
    }

    #[test]
    fn overlap_examples() {
        let zero = Ket2::level(0);
        assert_eq!(overlap(&zero, &zero.projector()).unwrap(), 1.0);
        assert_eq!(overlap(&zero, &Mat2::identity().scale_re(0.5)).unwrap(), 0.5);

        let plus = Ket([C64::new(FRAC_1_SQRT_2, 0.0), C64::new(FRAC_1_SQRT_2, 0.0)]);
        // θ = π/4, r = 1, α₀ = -π/2, ξ₀ = 0
        let (th, r, a0) = (PI / 4.0, 1.0, -PI / 2.0);
        let off = I * 0.5 * (2.0 * th).sin() * r * C64::from_polar(1.0, -a0);
        let rho = Mat([
            [C64::new(0.5 * (1.0 - (2.0 * th).cos()), 0.0), off],
            [off.conj(), C64::new(0.5 * (1.0 + (2.0 * th).cos()), 0.0)],
        ]);
        let mut brute = ZERO;
        for i in 0..2 {
            for j in 0..2 {
                brute += plus.0[i].conj() * rho[(i, j)] * plus.0[j];
            }
        }
        assert!((overlap(&plus, &rho).unwrap() - brute.re).abs() < 1e-15);
    }

    #[test]
    fn overlap_rejects_unphysical() {
        let zero = Ket2::level(0);
        let rho = Mat2::from_real([[1.5, 0.0], [0.0, -0.5]]);
        assert!(matches!(overlap(&zero, &rho), Err(Error::NonPhysicalOverlap(_))));
    }

    #[test]
    fn basis_ordering() {
        // σz|1⟩ = +|1⟩
        let one = Ket2::level(1);
        assert_eq!(sigma_z().apply(&one), one);
        assert_eq!(Ket3::level(2).0[0], ONE);
        assert_eq!(Ket3::level(1).amplitude(1), ONE);
    }

    #[test]
    fn euler_rodrigues_matches_series() {
        let (x, y, z, dt) = (0.3, -1.1, 0.7, 0.37);
        let gen = pauli_combination(x, y, z).scale(-I * dt);
        let a = expm_pauli(x, y, z, dt);
        assert!(a.max_abs_diff(&gen.expm()) < 1e-14);
    }

    #[test]
    fn eigenvalues_3_diagonal_and_degenerate() {
        let m = Mat3::from_real([[0.2, 0.0, 0.0], [0.0, 0.5, 0.0], [0.0, 0.0, 0.3]]);
        assert_eq!(hermitian_eigenvalues(&m), [0.2, 0.3, 0.5]);
        let e = hermitian_eigenvalues(&Mat3::identity());
        assert!(e.iter().all(|v| (v - 1.0).abs() < 1e-15));
    }
}
