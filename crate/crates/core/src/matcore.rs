//! Dense Hermitian and real-symmetric matrix primitives.
//!
//! Everything here is sized for the small problems the rest of the crate
//! deals with: Hilbert spaces of dimension 2 or 3 and at most eight
//! parameters. Decompositions are direct and dense.
//!
//! The two validated wrappers, [`HermMatrix`] and [`RealSymMatrix`], share
//! the [`Spectral`] trait, which provides eigendecomposition and the matrix
//! functions built on it (square root, absolute value, inverse).

use std::ops::Deref;

use nalgebra::{ComplexField, DMatrix, DVector, Matrix3};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::policy::NumericPolicy;

pub type CMat = DMatrix<Complex64>;
pub type RMat = DMatrix<f64>;

/// Complex Hermitian matrix, exactly Hermitian after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct HermMatrix(CMat);

/// Real symmetric matrix, exactly symmetric after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct RealSymMatrix(RMat);

/// Eigenvalues in ascending order together with orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct EigenDecomp<T: nalgebra::Scalar> {
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: DMatrix<T>,
}

fn check_square<T>(m: &DMatrix<T>) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(())
}

/// Largest `|m_ij - conj(m_ji)|`.
pub fn hermitian_defect<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            let d = (m[(i, j)].clone() - m[(j, i)].clone().conjugate()).modulus();
            worst = worst.max(d);
        }
    }
    worst
}

/// Largest absolute entry.
pub fn max_abs<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> f64 {
    m.iter().fold(0.0f64, |acc, x| acc.max(x.clone().modulus()))
}

fn symmetrize<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> DMatrix<T> {
    let half = T::from_real(0.5);
    (m + m.adjoint()) * half
}

impl HermMatrix {
    pub fn new(m: CMat) -> Result<Self> {
        Self::new_with(m, &NumericPolicy::DEFAULT)
    }

    pub fn new_with(m: CMat, policy: &NumericPolicy) -> Result<Self> {
        check_square(&m)?;
        let defect = hermitian_defect(&m);
        if !(defect <= policy.hermitian_tol) {
            return Err(Error::NotHermitian(defect));
        }
        Ok(Self(symmetrize(&m)))
    }

    /// Build from row-major `(re, im)` pairs.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n = rows.len();
        for r in rows {
            if r.len() != n {
                return Err(Error::NotSquare {
                    rows: n,
                    cols: r.len(),
                });
            }
        }
        Self::new(CMat::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn from_real(m: &RealSymMatrix) -> Self {
        Self(m.0.map(|x| Complex64::new(x, 0.0)))
    }

    pub fn identity(n: usize) -> Self {
        Self(CMat::identity(n, n))
    }

    pub fn zeros(n: usize) -> Self {
        Self(CMat::zeros(n, n))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.0
    }

    pub fn into_inner(self) -> CMat {
        self.0
    }

    /// Real part of the trace (the imaginary part is zero by construction).
    pub fn trace_re(&self) -> f64 {
        self.0.trace().re
    }

    /// `true` if every entry has zero imaginary part within `tol`.
    pub fn is_real(&self, tol: f64) -> bool {
        self.0.iter().all(|z| z.im.abs() <= tol)
    }

    /// Real part, as a symmetric matrix.
    pub fn real_part(&self) -> RealSymMatrix {
        RealSymMatrix(self.0.map(|z| z.re))
    }

    /// Imaginary part, an antisymmetric real matrix.
    pub fn imag_part(&self) -> RMat {
        self.0.map(|z| z.im)
    }

    pub fn scale(&self, c: f64) -> Self {
        Self(&self.0 * Complex64::new(c, 0.0))
    }
}

impl Deref for HermMatrix {
    type Target = CMat;
    fn deref(&self) -> &CMat {
        &self.0
    }
}

impl RealSymMatrix {
    pub fn new(m: RMat) -> Result<Self> {
        Self::new_with(m, &NumericPolicy::DEFAULT)
    }

    pub fn new_with(m: RMat, policy: &NumericPolicy) -> Result<Self> {
        check_square(&m)?;
        let defect = hermitian_defect(&m);
        if !(defect <= policy.hermitian_tol) {
            return Err(Error::NotHermitian(defect));
        }
        Ok(Self(symmetrize(&m)))
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        Self(RMat::from_diagonal(&DVector::from_column_slice(d)))
    }

    pub fn identity(n: usize) -> Self {
        Self(RMat::identity(n, n))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &RMat {
        &self.0
    }

    pub fn into_inner(self) -> RMat {
        self.0
    }

    pub fn diagonal_vec(&self) -> Vec<f64> {
        self.0.diagonal().iter().copied().collect()
    }

    pub fn scale(&self, c: f64) -> Self {
        Self(&self.0 * c)
    }
}

impl Deref for RealSymMatrix {
    type Target = RMat;
    fn deref(&self) -> &RMat {
        &self.0
    }
}

impl<T> EigenDecomp<T>
where
    T: ComplexField<RealField = f64>,
{
    fn from_matrix(m: &DMatrix<T>) -> Self {
        let n = m.nrows();
        let se = nalgebra::SymmetricEigen::new(m.clone());
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
        let eigenvalues = DVector::from_iterator(n, order.iter().map(|&k| se.eigenvalues[k]));
        let mut eigenvectors = DMatrix::<T>::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            eigenvectors.set_column(dst, &se.eigenvectors.column(src));
        }
        Self {
            eigenvalues,
            eigenvectors,
        }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `V f(Λ) V†`.
    pub fn apply<F: Fn(f64) -> f64>(&self, f: F) -> DMatrix<T> {
        let n = self.eigenvalues.len();
        let mut scaled = self.eigenvectors.clone();
        for k in 0..n {
            let fk = T::from_real(f(self.eigenvalues[k]));
            for i in 0..n {
                scaled[(i, k)] = scaled[(i, k)].clone() * fk.clone();
            }
        }
        &scaled * self.eigenvectors.adjoint()
    }

    pub fn reconstruct(&self) -> DMatrix<T> {
        self.apply(|x| x)
    }
}

impl EigenDecomp<f64> {
    /// Flip each eigenvector so its first component larger than `tol` in
    /// magnitude is positive.
    pub fn fix_signs(&mut self, tol: f64) {
        let n = self.eigenvectors.nrows();
        for k in 0..self.eigenvectors.ncols() {
            let lead = (0..n)
                .map(|i| self.eigenvectors[(i, k)])
                .find(|x| x.abs() > tol);
            if matches!(lead, Some(x) if x < 0.0) {
                self.eigenvectors.column_mut(k).neg_mut();
            }
        }
    }
}

/// Shared spectral toolkit for the two validated matrix types.
pub trait Spectral: Sized {
    type Scalar: nalgebra::Scalar;

    fn eig(&self) -> EigenDecomp<Self::Scalar>;

    /// Principal square root of a PSD matrix.
    fn sqrt_psd_with(&self, policy: &NumericPolicy) -> Result<Self>;

    /// `Σ |λ_k| v_k v_k†`.
    fn abs(&self) -> Self;

    fn inv_psd_with(&self, policy: &NumericPolicy) -> Result<Self>;

    fn min_eigenvalue(&self) -> f64;

    fn sqrt_psd(&self) -> Result<Self> {
        self.sqrt_psd_with(&NumericPolicy::DEFAULT)
    }

    fn inv_psd(&self) -> Result<Self> {
        self.inv_psd_with(&NumericPolicy::DEFAULT)
    }
}

// Eigenvalues in [-psd_tol, 0) are clamped to zero by the caller.
fn reject_negative(min: f64, policy: &NumericPolicy) -> Result<()> {
    if min < -policy.psd_tol {
        return Err(Error::NotPsd(min));
    }
    Ok(())
}

macro_rules! impl_spectral {
    ($ty:ident, $scalar:ty) => {
        impl Spectral for $ty {
            type Scalar = $scalar;

            fn eig(&self) -> EigenDecomp<$scalar> {
                EigenDecomp::from_matrix(&self.0)
            }

            fn sqrt_psd_with(&self, policy: &NumericPolicy) -> Result<Self> {
                let e = self.eig();
                let min = e.min_eigenvalue();
                reject_negative(min, policy)?;
                Ok(Self(symmetrize(&e.apply(|x| x.max(0.0).sqrt()))))
            }

            fn min_eigenvalue(&self) -> f64 {
                self.eig().min_eigenvalue()
            }

            fn abs(&self) -> Self {
                Self(symmetrize(&self.eig().apply(f64::abs)))
            }

            fn inv_psd_with(&self, policy: &NumericPolicy) -> Result<Self> {
                let e = self.eig();
                let min = e.min_eigenvalue();
                if !(min > policy.singular_tol) {
                    return Err(Error::Singular(min));
                }
                Ok(Self(symmetrize(&e.apply(|x| 1.0 / x))))
            }
        }
    };
}

impl_spectral!(HermMatrix, Complex64);
impl_spectral!(RealSymMatrix, f64);

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
pub fn eig_herm(m: &HermMatrix) -> EigenDecomp<Complex64> {
    m.eig()
}

pub fn sqrt_psd<M: Spectral>(m: &M) -> Result<M> {
    m.sqrt_psd()
}

pub fn abs_herm<M: Spectral>(m: &M) -> M {
    m.abs()
}

pub fn inv_psd<M: Spectral>(m: &M) -> Result<M> {
    m.inv_psd()
}

/// Returns the smallest eigenvalue, or `NotPsd` when it is below `-psd_tol`.
pub fn check_psd<M: Spectral>(m: &M, policy: &NumericPolicy) -> Result<f64> {
    let min = m.min_eigenvalue();
    if min < -policy.psd_tol {
        return Err(Error::NotPsd(min));
    }
    Ok(min)
}

/// `(Tr √(√a · b · √a))²` for PSD `a`, `b`.
///
/// For two-dimensional inputs this equals `Tr(ab) + 2√det(ab)`, see
/// [`fidelity_trace_sq_2x2`].
pub fn fidelity_trace_sq(a: &RealSymMatrix, b: &RealSymMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    check_psd(b, &NumericPolicy::DEFAULT)?;
    let ra = a.sqrt_psd()?;
    let inner = RealSymMatrix(symmetrize(&(ra.matrix() * b.matrix() * ra.matrix())));
    let root = inner.sqrt_psd()?;
    let tr = root.trace();
    Ok(tr * tr)
}

fn det2(m: &RMat) -> f64 {
    m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]
}

/// Closed form of [`fidelity_trace_sq`] for 2×2 inputs: `Tr(ab) + 2√det(ab)`.
///
/// The determinant is taken from the entries, not from eigenvalues.
pub fn fidelity_trace_sq_2x2(a: &RealSymMatrix, b: &RealSymMatrix) -> Result<f64> {
    for m in [a, b] {
        if m.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: m.dim(),
            });
        }
    }
    let tr_ab = (a.matrix() * b.matrix()).trace();
    let det = det2(a.matrix()) * det2(b.matrix());
    if det < -NumericPolicy::DEFAULT.psd_tol {
        return Err(Error::NotPsd(det));
    }
    Ok(tr_ab + 2.0 * det.max(0.0).sqrt())
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

pub fn anticommutator(a: &CMat, b: &CMat) -> CMat {
    a * b + b * a
}

/// Fast path used by the large state-independent sweeps: trace and diagonal
/// of `√m` for a 3×3 symmetric PSD matrix, without an eigensolver.
///
/// With `s_k = √λ_k` and `I = Σ s_k`, `II = Σ_{j<k} s_j s_k`, `III = Π s_k`,
/// the invariants of `m` give `I² = Tr m + 2·II` and `II² = p₂ + 2·III·I`
/// (`p₂` the sum of principal 2×2 minors, `III = √det m`), so `I` is the
/// root of `(I² − Tr m)² − 4p₂ − 8·III·I`, found by Newton's method. The
/// derivative is `8(s_1+s_2)(s_2+s_3)(s_1+s_3)`, positive unless two
/// eigenvalues vanish. Cayley–Hamilton then gives
/// `√m = (−m² + (I² − II)·m + I·III·𝟙) / (I·II − III)`.
pub fn sqrt3_trace_diag(m: &Matrix3<f64>) -> (f64, [f64; 3]) {
    let p1 = m[(0, 0)] + m[(1, 1)] + m[(2, 2)];
    if !(p1 > 0.0) {
        return (0.0, [0.0; 3]);
    }
    let p2 = (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)])
        + (m[(0, 0)] * m[(2, 2)] - m[(0, 2)] * m[(2, 0)])
        + (m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)]);
    let p2 = p2.max(0.0);
    let i3 = m.determinant().max(0.0).sqrt();

    // The lower bound √(p1 + 2√p2) lies left of the root of a convex,
    // increasing function, so after the first step Newton descends monotonically.
    let mut i1 = (p1 + 2.0 * p2.sqrt()).sqrt();
    for _ in 0..60 {
        let a = i1 * i1 - p1;
        let f = a * a - 4.0 * p2 - 8.0 * i3 * i1;
        let df = 4.0 * i1 * a - 8.0 * i3;
        if !(df > 0.0) {
            break;
        }
        let next = i1 - f / df;
        let done = (next - i1).abs() <= 4.0 * f64::EPSILON * next;
        i1 = next;
        if done {
            break;
        }
    }
    let i2 = 0.5 * (i1 * i1 - p1);
    let denom = i1 * i2 - i3;
    let mut diag = [0.0; 3];
    for (k, d) in diag.iter_mut().enumerate() {
        let m2 = m[(k, 0)] * m[(0, k)] + m[(k, 1)] * m[(1, k)] + m[(k, 2)] * m[(2, k)];
        *d = (-m2 + (i1 * i1 - i2) * m[(k, k)] + i1 * i3) / denom;
    }
    (i1, diag)
}
