//! Scalar lower bounds on the rescaled expected cost `Tr(NV·G)`.
//!
//! Each evaluator has two entry points: one taking a [`QfiBundle`] and one
//! taking `H⁻¹` (and `D`) directly. The second form lets the state-independent
//! sweeps plug in the pure-state limit, where `H⁻¹` is singular but finite.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matcore::{fidelity_trace_sq, CMat, HermMatrix, RMat, RealSymMatrix, Spectral};
use crate::models::QfiBundle;
use crate::policy::NumericPolicy;

/// Eigenvalue slack for cost matrices.
const COST_SLACK: f64 = 1e-10;

/// Smallest eigenvalue accepted by [`optimal_covariance`].
pub const MIN_COST_EIGENVALUE: f64 = 1e-10;

/// Positive-semidefinite weight matrix `G`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix(RealSymMatrix);

impl CostMatrix {
    pub fn new(m: RealSymMatrix) -> Result<Self> {
        let min = m.min_eigenvalue();
        if min < -COST_SLACK {
            return Err(Error::NotPsd(min));
        }
        Ok(Self(m))
    }

    pub fn from_diagonal(d: &[f64]) -> Result<Self> {
        Self::new(RealSymMatrix::from_diagonal(d))
    }

    pub fn matrix(&self) -> &RealSymMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn scale(&self, c: f64) -> Result<Self> {
        Self::new(self.0.scale(c))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundKind {
    Sld,
    Gm,
    RldHolevo,
}

impl BoundKind {
    pub fn name(self) -> &'static str {
        match self {
            BoundKind::Sld => "sld",
            BoundKind::Gm => "gm",
            BoundKind::RldHolevo => "rld",
        }
    }
}

/// A bound on the per-copy expected cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundValue {
    pub kind: BoundKind,
    pub value: f64,
}

fn check_dims(hinv: &RealSymMatrix, g: &CostMatrix) -> Result<()> {
    if hinv.dim() != g.dim() {
        return Err(Error::DimensionMismatch {
            expected: hinv.dim(),
            got: g.dim(),
        });
    }
    Ok(())
}

fn check_d(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::InvalidConfig(format!(
            "Hilbert dimension must be at least 2, got {d}"
        )));
    }
    Ok(())
}

/// `Tr(H⁻¹G)`.
pub fn sld_bound(bundle: &QfiBundle, g: &CostMatrix) -> Result<BoundValue> {
    sld_bound_from_inverse(&bundle.h_inv()?, g)
}

pub fn sld_bound_from_inverse(hinv: &RealSymMatrix, g: &CostMatrix) -> Result<BoundValue> {
    check_dims(hinv, g)?;
    Ok(BoundValue {
        kind: BoundKind::Sld,
        value: (hinv.matrix() * g.matrix().matrix()).trace(),
    })
}

/// `(Tr √(√G H⁻¹ √G))² / (d − 1)` for separable measurements in dimension `d`.
pub fn gm_bound(bundle: &QfiBundle, g: &CostMatrix, d: usize) -> Result<BoundValue> {
    gm_bound_from_inverse(&bundle.h_inv()?, g, d)
}

pub fn gm_bound_from_inverse(hinv: &RealSymMatrix, g: &CostMatrix, d: usize) -> Result<BoundValue> {
    check_dims(hinv, g)?;
    check_d(d)?;
    let f = fidelity_trace_sq(g.matrix(), hinv)?;
    Ok(BoundValue {
        kind: BoundKind::Gm,
        value: f / (d - 1) as f64,
    })
}

/// `Tr(GH⁻¹) + ½ Tr|√G H⁻¹DH⁻¹ √G|`, the RLD bound, equal to the Holevo bound
/// for D-invariant models. Models that fail the D-invariance test are refused.
pub fn rld_holevo_bound(bundle: &QfiBundle, g: &CostMatrix) -> Result<BoundValue> {
    if !bundle.d_invariance.invariant {
        return Err(Error::NotDInvariant(bundle.d_invariance.residual));
    }
    rld_bound_from_inverse(&bundle.h_inv()?, &bundle.d, g)
}

pub fn rld_bound_from_inverse(hinv: &RealSymMatrix, d: &RMat, g: &CostMatrix) -> Result<BoundValue> {
    check_dims(hinv, g)?;
    let k = hinv.dim();
    if d.nrows() != k || d.ncols() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            got: d.nrows(),
        });
    }
    let sg = g.matrix().sqrt_psd()?;
    let a = sg.matrix() * hinv.matrix() * d * hinv.matrix() * sg.matrix();
    // `a` is real antisymmetric, so `i·a` is Hermitian.
    let ia = CMat::from_fn(k, k, |i, j| Complex64::new(0.0, a[(i, j)]));
    let abs_tr: f64 = HermMatrix::new_with(ia, &loose())?
        .eig()
        .eigenvalues
        .iter()
        .map(|x| x.abs())
        .sum();
    let base = (g.matrix().matrix() * hinv.matrix()).trace();
    Ok(BoundValue {
        kind: BoundKind::RldHolevo,
        value: base + 0.5 * abs_tr,
    })
}

fn loose() -> NumericPolicy {
    NumericPolicy {
        hermitian_tol: 1e-6,
        ..NumericPolicy::DEFAULT
    }
}

/// Covariance attaining the Gill–Massar bound for cost `G`:
/// `(Tr √M)/(d−1) · G^{−1/2} √M G^{−1/2}` with `M = G^{1/2} H⁻¹ G^{1/2}`.
///
/// `G` must be strictly positive; boundary costs are reached by adding a
/// small multiple of the identity.
pub fn optimal_covariance(bundle: &QfiBundle, g: &CostMatrix, d: usize) -> Result<RealSymMatrix> {
    optimal_covariance_from_inverse(&bundle.h_inv()?, g, d)
}

pub fn optimal_covariance_from_inverse(
    hinv: &RealSymMatrix,
    g: &CostMatrix,
    d: usize,
) -> Result<RealSymMatrix> {
    check_dims(hinv, g)?;
    check_d(d)?;
    let e = g.matrix().eig();
    let min = e.min_eigenvalue();
    if min < MIN_COST_EIGENVALUE {
        return Err(Error::SingularCost(min));
    }
    let sg = RealSymMatrix::new(e.apply(f64::sqrt))?;
    let sg_inv = RealSymMatrix::new(e.apply(|x| 1.0 / x.sqrt()))?;
    let m = RealSymMatrix::new(sg.matrix() * hinv.matrix() * sg.matrix())?;
    let root = m.sqrt_psd()?;
    let scale = root.trace() / (d - 1) as f64;
    RealSymMatrix::new(sg_inv.matrix() * root.matrix() * sg_inv.matrix() * scale)
}
