//! Statistical models and their quantum Fisher information.
//!
//! A [`StatisticalModel`] is a full-rank reference state `ρ0` together with
//! the derivatives `∂ρ/∂θ_i` at the reference point. Everything local
//! estimation needs follows from those two pieces: the symmetric and right
//! logarithmic derivatives, the SLD and RLD Fisher matrices, and the
//! commutator matrix `D_ij = i Tr ρ0 [L_i, L_j]`.

mod qubit;
mod qutrit;

pub use qubit::{bloch_coefficients, euler_rotation_deg, pauli, qubit_model, qubit_model_with};
pub use qutrit::{closed_form_d_abs, closed_form_sld, gell_mann, qutrit_model};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matcore::{
    check_psd, commutator, CMat, EigenDecomp, HermMatrix, RMat, RealSymMatrix,
    Spectral,
};
use crate::policy::NumericPolicy;

/// Full-rank state plus parameter derivatives at the reference point.
#[derive(Debug, Clone)]
pub struct StatisticalModel {
    rho0: HermMatrix,
    derivs: Vec<HermMatrix>,
    labels: Vec<String>,
    spectrum: EigenDecomp<Complex64>,
    policy: NumericPolicy,
}

impl StatisticalModel {
    pub fn new(rho0: HermMatrix, derivs: Vec<HermMatrix>, labels: Vec<String>) -> Result<Self> {
        Self::new_with(rho0, derivs, labels, NumericPolicy::DEFAULT)
    }

    pub fn new_with(
        rho0: HermMatrix,
        derivs: Vec<HermMatrix>,
        labels: Vec<String>,
        policy: NumericPolicy,
    ) -> Result<Self> {
        let dim = rho0.dim();
        if derivs.is_empty() {
            return Err(Error::InvalidModel("model has no parameters".into()));
        }
        if labels.len() != derivs.len() {
            return Err(Error::InvalidModel(format!(
                "{} labels for {} parameters",
                labels.len(),
                derivs.len()
            )));
        }
        let tr = rho0.trace_re();
        if (tr - 1.0).abs() > policy.trace_tol {
            return Err(Error::InvalidModel(format!("Tr rho0 = {tr}, expected 1")));
        }
        check_psd(&rho0, &policy)?;
        let spectrum = rho0.eig();
        let min = spectrum.min_eigenvalue();
        if min < policy.rank_tol {
            return Err(Error::RankDeficient(min));
        }
        for (i, d) in derivs.iter().enumerate() {
            if d.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: d.dim(),
                });
            }
            let t = d.trace();
            if t.norm() > policy.trace_tol {
                return Err(Error::InvalidModel(format!(
                    "derivative {i} has trace {t}, expected 0"
                )));
            }
        }
        Ok(Self {
            rho0,
            derivs,
            labels,
            spectrum,
            policy,
        })
    }

    pub fn rho0(&self) -> &HermMatrix {
        &self.rho0
    }

    pub fn derivs(&self) -> &[HermMatrix] {
        &self.derivs
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn num_params(&self) -> usize {
        self.derivs.len()
    }

    /// Hilbert-space dimension.
    pub fn dim(&self) -> usize {
        self.rho0.dim()
    }

    pub fn spectrum(&self) -> &EigenDecomp<Complex64> {
        &self.spectrum
    }

    pub fn policy(&self) -> &NumericPolicy {
        &self.policy
    }

    fn deriv(&self, i: usize) -> Result<&HermMatrix> {
        self.derivs.get(i).ok_or(Error::BadIndex {
            index: i,
            count: self.derivs.len(),
        })
    }

    /// Solves `(Lρ0 + ρ0L)/2 = x` for Hermitian `x`.
    ///
    /// In the eigenbasis of `ρ0` the solution is `L_mn = 2 x_mn / (λ_m + λ_n)`;
    /// full rank keeps every divisor at least `2·rank_tol`.
    pub fn solve_sld_for(&self, x: &CMat) -> HermMatrix {
        let v = &self.spectrum.eigenvectors;
        let lam = &self.spectrum.eigenvalues;
        let mut inner = v.adjoint() * x * v;
        let n = inner.nrows();
        for m in 0..n {
            for k in 0..n {
                inner[(m, k)] *= 2.0 / (lam[m] + lam[k]);
            }
        }
        let l = v * inner * v.adjoint();
        HermMatrix::new_with(l, &relaxed(&self.policy)).expect("SLD of Hermitian input is Hermitian")
    }

    /// `ρ0⁻¹`.
    pub fn rho0_inverse(&self) -> CMat {
        self.spectrum.apply(|x| 1.0 / x)
    }
}

// Solver outputs are Hermitian up to rounding that scales with 1/rank_tol.
fn relaxed(policy: &NumericPolicy) -> NumericPolicy {
    NumericPolicy {
        hermitian_tol: policy.hermitian_tol.max(1e-6),
        ..*policy
    }
}

/// Symmetric logarithmic derivative of parameter `i`.
pub fn solve_sld(model: &StatisticalModel, i: usize) -> Result<HermMatrix> {
    let d = model.deriv(i)?;
    Ok(model.solve_sld_for(d.matrix()))
}

/// Right logarithmic derivative `ρ0⁻¹ ∂ρ_i`, in general not Hermitian.
pub fn solve_rld(model: &StatisticalModel, i: usize) -> Result<CMat> {
    let d = model.deriv(i)?;
    Ok(model.rho0_inverse() * d.matrix())
}

/// Outcome of the D-invariance test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DInvariance {
    pub invariant: bool,
    /// Largest Frobenius distance between `𝒟(L_i)` and the real span of the SLDs.
    pub residual: f64,
}

/// Everything the bound evaluators need about a model.
#[derive(Debug, Clone)]
pub struct QfiBundle {
    pub slds: Vec<HermMatrix>,
    pub rlds: Vec<CMat>,
    /// SLD quantum Fisher information.
    pub h: RealSymMatrix,
    /// RLD quantum Fisher information `R_ij = Tr ρ0 𝓛_j 𝓛_i†`.
    pub r: HermMatrix,
    pub rinv: HermMatrix,
    /// `D_ij = i Tr ρ0 [L_i, L_j]`, real antisymmetric.
    pub d: RMat,
    pub d_invariance: DInvariance,
    /// Hilbert-space dimension of the underlying model.
    pub hilbert_dim: usize,
}

impl QfiBundle {
    pub fn num_params(&self) -> usize {
        self.slds.len()
    }

    pub fn h_inv(&self) -> Result<RealSymMatrix> {
        self.h.inv_psd()
    }
}

fn tr_rho_prod(rho: &CMat, a: &CMat, b: &CMat) -> Complex64 {
    (rho * a * b).trace()
}

/// SLDs, RLDs, both Fisher matrices, `D` and the D-invariance verdict.
pub fn qfi_bundle(model: &StatisticalModel) -> Result<QfiBundle> {
    let k = model.num_params();
    let rho = model.rho0().matrix();
    let slds: Vec<HermMatrix> = (0..k)
        .map(|i| solve_sld(model, i))
        .collect::<Result<_>>()?;
    let rlds: Vec<CMat> = (0..k)
        .map(|i| solve_rld(model, i))
        .collect::<Result<_>>()?;

    let mut h = RMat::zeros(k, k);
    let mut d = RMat::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            // Tr ρ L_i L_j = a + ib; the symmetrized part is a, the commutator 2ib.
            let z = tr_rho_prod(rho, slds[i].matrix(), slds[j].matrix());
            h[(i, j)] = z.re;
            d[(i, j)] = -2.0 * z.im;
        }
    }
    let h = RealSymMatrix::new(h)?;
    let d = (&d - d.transpose()) * 0.5;

    let mut r = CMat::zeros(k, k);
    for i in 0..k {
        let li_dag = rlds[i].adjoint();
        for j in 0..k {
            r[(i, j)] = tr_rho_prod(rho, &rlds[j], &li_dag);
        }
    }
    let r = HermMatrix::new_with(r, &relaxed(model.policy()))?;
    let rinv = r
        .inv_psd_with(model.policy())
        .map_err(|e| match e {
            Error::Singular(x) => Error::SingularRld(x),
            other => other,
        })?;
    let d_invariance = d_invariance_of(model, &slds);
    Ok(QfiBundle {
        slds,
        rlds,
        h,
        r,
        rinv,
        d,
        d_invariance,
        hilbert_dim: model.dim(),
    })
}

/// `H⁻¹ + (i/2) H⁻¹ D H⁻¹`, which equals `R⁻¹` for D-invariant models.
pub fn rld_inverse_from_sld(bundle: &QfiBundle) -> Result<HermMatrix> {
    let hinv = bundle.h_inv()?;
    let imag = hinv.matrix() * &bundle.d * hinv.matrix() * 0.5;
    let k = bundle.num_params();
    let m = CMat::from_fn(k, k, |i, j| Complex64::new(hinv[(i, j)], imag[(i, j)]));
    HermMatrix::new_with(m, &relaxed(&NumericPolicy::DEFAULT))
}

/// Tests whether the span of the SLDs is closed under `𝒟`, where
/// `𝒟(X)ρ0 + ρ0𝒟(X) = 2i[X, ρ0]`.
pub fn check_d_invariance(model: &StatisticalModel, bundle: &QfiBundle) -> DInvariance {
    d_invariance_of(model, &bundle.slds)
}

fn d_invariance_of(model: &StatisticalModel, slds: &[HermMatrix]) -> DInvariance {
    let rho = model.rho0().matrix();
    let i_unit = Complex64::new(0.0, 1.0);
    let k = slds.len();

    // Real Hilbert–Schmidt Gram matrix of the SLDs.
    let gram = RMat::from_fn(k, k, |a, b| (slds[a].matrix() * slds[b].matrix()).trace().re);
    let gram_pinv = pseudo_inverse(&gram);

    let mut residual = 0.0f64;
    for l in slds {
        let rhs = commutator(l.matrix(), rho) * i_unit;
        let dl = model.solve_sld_for(&rhs);
        let proj: Vec<f64> = slds
            .iter()
            .map(|lj| (lj.matrix() * dl.matrix()).trace().re)
            .collect();
        let coeffs = &gram_pinv * nalgebra::DVector::from_vec(proj);
        let mut rem = dl.matrix().clone();
        for (c, lj) in coeffs.iter().zip(slds) {
            rem -= lj.matrix() * Complex64::new(*c, 0.0);
        }
        residual = residual.max(rem.norm());
    }
    DInvariance {
        invariant: residual < model.policy().d_invariance_tol,
        residual,
    }
}

fn pseudo_inverse(m: &RMat) -> RMat {
    let sym = RealSymMatrix::new(m.clone()).expect("Gram matrix is symmetric");
    let e = sym.eig();
    let cutoff = 1e-12 * e.max_eigenvalue().abs().max(1.0);
    e.apply(|x| if x.abs() > cutoff { 1.0 / x } else { 0.0 })
}

/// Reparametrizes by `θ̃ = R θ` for invertible `R`: new derivatives are
/// `∂ρ/∂θ̃_i = Σ_j (R⁻ᵀ)_ij ∂ρ/∂θ_j`, which for orthogonal `R` is `Σ_j R_ij ∂ρ_j`.
pub fn reparametrize(model: &StatisticalModel, r: &RMat) -> Result<StatisticalModel> {
    let k = model.num_params();
    if r.nrows() != k || r.ncols() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            got: r.nrows(),
        });
    }
    let r_inv_t = r
        .clone()
        .try_inverse()
        .ok_or(Error::Singular(0.0))?
        .transpose();
    let derivs = (0..k)
        .map(|i| {
            let mut acc = DMatrix::<Complex64>::zeros(model.dim(), model.dim());
            for j in 0..k {
                acc += model.derivs()[j].matrix() * Complex64::new(r_inv_t[(i, j)], 0.0);
            }
            HermMatrix::new(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    StatisticalModel::new_with(
        model.rho0().clone(),
        derivs,
        model.labels().to_vec(),
        *model.policy(),
    )
}
