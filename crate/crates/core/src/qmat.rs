//! Fixed-size complex matrices (2×2 and 4×4), density-matrix validation and
//! the Hermitian eigen-solver used for square roots and positivity checks.
//!
//! Two-photon objects use the label ordering `|11⟩, |21⟩, |12⟩, |22⟩`, where
//! the first label belongs to path L and the second to path R. The L label is
//! therefore the fast-running index: `index = l + 2 * r` (zero-based labels).

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Complex scalar used throughout the crate.
pub type C64 = Complex64;

/// Tolerance for Hermiticity, unit trace and positivity of density matrices.
pub const DENSITY_TOL: f64 = 1e-10;

const JACOBI_OFF_DIAG_TOL: f64 = 1e-14;
const JACOBI_MAX_SWEEPS: usize = 100;

pub const fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Row-major `N×N` complex matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CMat<const N: usize>(pub [[C64; N]; N]);

pub type Mat2 = CMat<2>;
pub type Mat4 = CMat<4>;

impl<const N: usize> CMat<N> {
    pub fn zeros() -> Self {
        CMat([[C64::new(0.0, 0.0); N]; N])
    }

    pub fn identity() -> Self {
        Self::from_fn(|r, c| if r == c { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
    }

    pub fn from_fn(mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros();
        for r in 0..N {
            for c in 0..N {
                m.0[r][c] = f(r, c);
            }
        }
        m
    }

    pub fn from_real(rows: [[f64; N]; N]) -> Self {
        Self::from_fn(|r, c| C64::new(rows[r][c], 0.0))
    }

    pub fn diag(d: [C64; N]) -> Self {
        Self::from_fn(|r, c| if r == c { d[r] } else { C64::new(0.0, 0.0) })
    }

    /// Outer product `|a⟩⟨b|`.
    pub fn outer(a: &[C64; N], b: &[C64; N]) -> Self {
        Self::from_fn(|r, c| a[r] * b[c].conj())
    }

    pub fn dim(&self) -> usize {
        N
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.0[r][c]
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(|r, c| self.0[c][r].conj())
    }

    pub fn trace(&self) -> C64 {
        (0..N).map(|i| self.0[i][i]).sum()
    }

    pub fn scale(&self, k: C64) -> Self {
        Self::from_fn(|r, c| self.0[r][c] * k)
    }

    pub fn scale_re(&self, k: f64) -> Self {
        Self::from_fn(|r, c| self.0[r][c] * k)
    }

    /// `u · self · u†`
    pub fn conjugate_by(&self, u: &Self) -> Self {
        *u * *self * u.adjoint()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .flatten()
            .zip(other.0.iter().flatten())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest entry of `|m − m†|`.
    pub fn hermiticity_defect(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    /// `(m + m†) / 2`
    pub fn hermitian_part(&self) -> Self {
        (*self + self.adjoint()).scale_re(0.5)
    }

    pub fn apply(&self, v: &[C64; N]) -> [C64; N] {
        let mut out = [C64::new(0.0, 0.0); N];
        for (r, o) in out.iter_mut().enumerate() {
            *o = (0..N).map(|c| self.0[r][c] * v[c]).sum();
        }
        out
    }

    /// `⟨a|m|a⟩`
    pub fn expectation(&self, a: &[C64; N]) -> C64 {
        let ma = self.apply(a);
        a.iter().zip(ma.iter()).map(|(x, y)| x.conj() * y).sum()
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        (*self * self.adjoint()).max_abs_diff(&Self::identity()) <= tol
    }
}

impl<const N: usize> Default for CMat<N> {
    fn default() -> Self {
        Self::zeros()
    }
}

impl<const N: usize> Mul for CMat<N> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self::from_fn(|r, c| (0..N).map(|k| self.0[r][k] * rhs.0[k][c]).sum())
    }
}

impl<const N: usize> Add for CMat<N> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::from_fn(|r, c| self.0[r][c] + rhs.0[r][c])
    }
}

impl<const N: usize> Sub for CMat<N> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::from_fn(|r, c| self.0[r][c] - rhs.0[r][c])
    }
}

/// Position of the two-photon basis state `|χ_lr⟩` (zero-based labels).
pub const fn pair_index(l: usize, r: usize) -> usize {
    l + 2 * r
}

/// Tensor product `a_L ⊗ b_R` in the `(11, 21, 12, 22)` ordering.
///
/// The first factor acts on path L, which is the fast index, so entry
/// `((l, r), (l', r'))` equals `a[l][l'] · b[r][r']`.
pub fn tensor(a: &Mat2, b: &Mat2) -> Mat4 {
    Mat4::from_fn(|row, col| {
        let (l, r) = (row % 2, row / 2);
        let (lc, rc) = (col % 2, col / 2);
        a.0[l][lc] * b.0[r][rc]
    })
}

/// Real rotation `[[cos, −sin], [sin, cos]]`.
pub fn rot2(theta: f64) -> Mat2 {
    let (s, co) = theta.sin_cos();
    Mat2::from_real([[co, -s], [s, co]])
}

/// Eigen-decomposition of a Hermitian matrix: `m = V · diag(values) · V†`.
#[derive(Clone, Copy, Debug)]
pub struct Eigen<const N: usize> {
    /// Ascending eigenvalues.
    pub values: [f64; N],
    /// Eigenvectors stored as columns, in the order of `values`.
    pub vectors: CMat<N>,
}

impl<const N: usize> Eigen<N> {
    pub fn reconstruct(&self, f: impl Fn(f64) -> f64) -> CMat<N> {
        let d = CMat::<N>::diag(std::array::from_fn(|i| C64::new(f(self.values[i]), 0.0)));
        d.conjugate_by(&self.vectors)
    }

    pub fn min_value(&self) -> f64 {
        self.values[0]
    }
}

fn off_diagonal_norm<const N: usize>(m: &CMat<N>) -> f64 {
    let mut s = 0.0;
    for r in 0..N {
        for c in 0..N {
            if r != c {
                s += m.0[r][c].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Cyclic Jacobi eigen-solver for Hermitian matrices.
///
/// Each step removes one off-diagonal pair with a unitary built from a phase
/// fix followed by a real Givens rotation. Only the Hermitian part of the
/// input is used.
pub fn hermitian_eigen<const N: usize>(m: &CMat<N>) -> Eigen<N> {
    let mut a = m.hermitian_part();
    let mut v = CMat::<N>::identity();
    let threshold = JACOBI_OFF_DIAG_TOL * a.frobenius_norm().max(1.0);

    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(&a) <= threshold {
            break;
        }
        for p in 0..N {
            for q in (p + 1)..N {
                let b = a.0[p][q];
                let b_abs = b.norm();
                if b_abs < 1e-300 {
                    continue;
                }
                let phase = b / b_abs;
                let app = a.0[p][p].re;
                let aqq = a.0[q][q].re;
                let tau = (aqq - app) / (2.0 * b_abs);
                let t = if tau == 0.0 {
                    1.0
                } else {
                    tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt())
                };
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = t * cs;

                // rot = diag(1, conj(phase)) on (p, q), then [[c, s], [-s, c]]
                let mut rot = CMat::<N>::identity();
                rot.0[p][p] = C64::new(cs, 0.0);
                rot.0[p][q] = C64::new(sn, 0.0);
                rot.0[q][p] = -phase.conj() * sn;
                rot.0[q][q] = phase.conj() * cs;

                a = rot.adjoint() * a * rot;
                a.0[p][q] = C64::new(0.0, 0.0);
                a.0[q][p] = C64::new(0.0, 0.0);
                v = v * rot;
            }
        }
    }

    let mut order: [usize; N] = std::array::from_fn(|i| i);
    order.sort_by(|&i, &j| a.0[i][i].re.total_cmp(&a.0[j][j].re));
    Eigen {
        values: std::array::from_fn(|k| a.0[order[k]][order[k]].re),
        vectors: CMat::from_fn(|r, k| v.0[r][order[k]]),
    }
}

/// Hermitian positive-semidefinite square root.
///
/// Eigenvalues in `[−DENSITY_TOL, 0)` are treated as zero; anything more
/// negative is rejected.
pub fn psd_sqrt<const N: usize>(m: &CMat<N>) -> Result<CMat<N>> {
    let defect = m.hermiticity_defect();
    if defect > DENSITY_TOL {
        return Err(Error::NotHermitian { deviation: defect });
    }
    let eig = hermitian_eigen(m);
    if eig.min_value() < -DENSITY_TOL {
        return Err(Error::NotPsd { min_eigenvalue: eig.min_value() });
    }
    Ok(eig.reconstruct(|x| x.max(0.0).sqrt()))
}

/// A validated density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityMatrix<const N: usize>(CMat<N>);

pub type Rho2 = DensityMatrix<2>;
pub type Rho4 = DensityMatrix<4>;

impl<const N: usize> DensityMatrix<N> {
    /// Checks every density-matrix invariant and reports the first violation.
    pub fn validate(m: CMat<N>) -> Result<Self> {
        if !m.is_finite() {
            return Err(Error::NonFinite);
        }
        let defect = m.hermiticity_defect();
        if defect > DENSITY_TOL {
            return Err(Error::NotHermitian { deviation: defect });
        }
        let tr = m.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > DENSITY_TOL {
            return Err(Error::TraceNotOne { trace: tr.re });
        }
        let eig = hermitian_eigen(&m);
        if eig.min_value() < -DENSITY_TOL {
            return Err(Error::NotPsd { min_eigenvalue: eig.min_value() });
        }
        Ok(DensityMatrix(m))
    }

    /// Symmetrizes `(m + m†)/2` before validating; for quadrature outputs.
    pub fn validate_symmetrized(m: CMat<N>) -> Result<Self> {
        Self::validate(m.hermitian_part())
    }

    /// `|ψ⟩⟨ψ|` for a ket, normalized first.
    pub fn pure(ket: [C64; N]) -> Result<Self> {
        let norm = ket.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::Domain { field: "ket", reason: "must be nonzero and finite".into() });
        }
        let k: [C64; N] = std::array::from_fn(|i| ket[i] / norm);
        Self::validate(CMat::outer(&k, &k))
    }

    pub fn maximally_mixed() -> Self {
        DensityMatrix(CMat::<N>::identity().scale_re(1.0 / N as f64))
    }

    pub fn matrix(&self) -> &CMat<N> {
        &self.0
    }

    pub fn into_matrix(self) -> CMat<N> {
        self.0
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.0 .0[r][c]
    }

    /// `Tr(ρ²)`
    pub fn purity(&self) -> f64 {
        // Tr(ρ²) = Σ |ρ_ij|² for Hermitian ρ
        self.0 .0.iter().flatten().map(|z| z.norm_sqr()).sum()
    }

    /// Largest |deviation| between diagonal entries of two states.
    pub fn diagonal_diff(&self, other: &Self) -> f64 {
        (0..N).map(|i| (self.get(i, i) - other.get(i, i)).norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0.max_abs_diff(&other.0)
    }

    /// Applies a unitary: `u ρ u†`.
    pub fn transform(&self, u: &CMat<N>) -> Result<Self> {
        Self::validate_symmetrized(self.0.conjugate_by(u))
    }
}

/// Trace distance `½ Σ |eig(a − b)|`.
pub fn trace_distance<const N: usize>(a: &DensityMatrix<N>, b: &DensityMatrix<N>) -> f64 {
    let eig = hermitian_eigen(&(*a.matrix() - *b.matrix()));
    0.5 * eig.values.iter().map(|x| x.abs()).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn expi(x: f64) -> C64 {
        C64::from_polar(1.0, x)
    }

    #[test]
    fn tensor_of_identities_is_identity() {
        assert_eq!(tensor(&Mat2::identity(), &Mat2::identity()), Mat4::identity());
    }

    #[test]
    fn tensor_diagonal_phases_follow_pair_ordering() {
        let (alpha, beta) = (0.3, -1.1);
        let a = Mat2::diag([c(1.0, 0.0), expi(alpha)]);
        let b = Mat2::diag([c(1.0, 0.0), expi(beta)]);
        let t = tensor(&a, &b);
        // (11, 21, 12, 22): L label flips first
        let expected = Mat4::diag([c(1.0, 0.0), expi(alpha), expi(beta), expi(alpha + beta)]);
        assert!(t.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn tensor_maps_basis_vectors_by_index() {
        // |χ_lr⟩ → (a|l⟩) ⊗ (b|r⟩), checked through the index map
        let a = rot2(0.4) * Mat2::diag([c(1.0, 0.0), expi(0.2)]);
        let b = rot2(-1.3);
        let t = tensor(&a, &b);
        for l in 0..2 {
            for r in 0..2 {
                let col = pair_index(l, r);
                for l2 in 0..2 {
                    for r2 in 0..2 {
                        let row = pair_index(l2, r2);
                        let expected = a.get(l2, l) * b.get(r2, r);
                        assert!((t.get(row, col) - expected).norm() < 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn tensor_of_unitaries_is_unitary() {
        let a = rot2(0.7) * Mat2::diag([c(1.0, 0.0), expi(2.0)]);
        let b = Mat2::from_real([[0.0, 1.0], [1.0, 0.0]]) * rot2(-0.2);
        assert!(tensor(&a, &b).is_unitary(1e-14));
    }

    #[test]
    fn sqrt_of_scalar_and_diagonal() {
        let half = Mat2::identity().scale_re(0.5);
        let s = psd_sqrt(&half).unwrap();
        assert!(s.max_abs_diff(&Mat2::identity().scale_re(FRAC_1_SQRT_2)) < 1e-14);

        let d = Mat2::diag([c(0.64, 0.0), c(0.36, 0.0)]);
        let s = psd_sqrt(&d).unwrap();
        assert!(s.max_abs_diff(&Mat2::diag([c(0.8, 0.0), c(0.6, 0.0)])) < 1e-14);
    }

    #[test]
    fn sqrt_rejects_non_hermitian() {
        let m = Mat2::from_fn(|r, cc| if r == 0 && cc == 1 { c(0.2, 0.0) } else if r == cc { c(0.5, 0.0) } else { c(0.0, 0.0) });
        assert!(matches!(psd_sqrt(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn eigen_handles_complex_offdiagonals() {
        let m = Mat4::from_fn(|r, cc| {
            if r == cc {
                c(r as f64, 0.0)
            } else {
                let z = c(0.3 * (r + 1) as f64, 0.1 * (cc as f64 - r as f64));
                if r < cc { z } else { c(0.3 * (cc + 1) as f64, 0.1 * (r as f64 - cc as f64)).conj() }
            }
        });
        assert!(m.hermiticity_defect() < 1e-15);
        let eig = hermitian_eigen(&m);
        assert!(eig.reconstruct(|x| x).max_abs_diff(&m) < 1e-12);
        assert!(eig.vectors.is_unitary(1e-12));
        assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn validation_errors_name_the_invariant() {
        assert!(Rho2::validate(Mat2::identity().scale_re(0.5)).is_ok());
        match Rho2::validate(Mat2::diag([c(0.7, 0.0), c(0.4, 0.0)])) {
            Err(Error::TraceNotOne { trace }) => assert_abs_diff_eq!(trace, 1.1, epsilon = 1e-15),
            other => panic!("unexpected {other:?}"),
        }
        let not_herm = Mat2::from_fn(|r, cc| if r == cc { c(0.5, 0.0) } else if r == 0 { c(0.1, 0.0) } else { c(0.0, 0.0) });
        assert!(matches!(Rho2::validate(not_herm), Err(Error::NotHermitian { .. })));
        let not_psd = Mat2::diag([c(1.5, 0.0), c(-0.5, 0.0)]);
        match Rho2::validate(not_psd) {
            Err(Error::NotPsd { min_eigenvalue }) => assert_abs_diff_eq!(min_eigenvalue, -0.5, epsilon = 1e-14),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn projector_at_45_degrees_is_pure() {
        let rho = Rho2::validate(Mat2::from_real([[0.5, 0.5], [0.5, 0.5]])).unwrap();
        assert_abs_diff_eq!(rho.purity(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(Rho2::maximally_mixed().purity(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(Rho4::maximally_mixed().purity(), 0.25, epsilon = 1e-15);
    }

    #[test]
    fn purity_of_partially_dephased_45_state() {
        // off-diagonal ½F with |F| = ½: Tr ρ² = ½(1 + |F|²)
        let f = C64::from_polar(0.5, 0.9);
        let rho = Rho2::validate(Mat2::from_fn(|r, cc| match (r, cc) {
            (0, 1) => f.conj() * 0.5,
            (1, 0) => f * 0.5,
            _ => c(0.5, 0.0),
        }))
        .unwrap();
        assert_abs_diff_eq!(rho.purity(), 0.625, epsilon = 1e-15);
    }

    #[test]
    fn rot2_composes_additively() {
        let r = rot2(0.3) * rot2(PI / 2.0 - 0.3);
        assert!(r.max_abs_diff(&rot2(PI / 2.0)) < 1e-15);
    }

    #[test]
    fn trace_distance_of_orthogonal_pure_states_is_one() {
        let h = Rho2::pure([c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let v = Rho2::pure([c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert_abs_diff_eq!(trace_distance(&h, &v), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(trace_distance(&h, &h), 0.0, epsilon = 1e-14);
    }
}
