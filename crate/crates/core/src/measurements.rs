//! POVMs, probabilistic mixtures and the classical Fisher information of a
//! measurement.
//!
//! The qubit helpers follow the Bloch convention `ρ = (𝟙 + n·σ)/2`; a
//! projective measurement along the unit vector `v` is written `P_v`.

use nalgebra::{DVector, Matrix3, Vector3};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::matcore::{CMat, HermMatrix, RMat, RealSymMatrix, Spectral};
use crate::models::{bloch_coefficients, pauli, qfi_bundle, StatisticalModel};
use crate::policy::NumericPolicy;

/// Eigenvalue slack allowed for POVM elements.
const ELEMENT_SLACK: f64 = 1e-10;

/// Simplex tolerance for mixture weights.
const WEIGHT_TOL: f64 = 1e-10;

/// Numerators below this count as zero next to a vanishing probability.
const NUMERATOR_TOL: f64 = 1e-10;

/// Finite set of PSD operators summing to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    elements: Vec<HermMatrix>,
}

impl Povm {
    pub fn new(elements: Vec<HermMatrix>) -> Result<Self> {
        Self::new_with(elements, &NumericPolicy::DEFAULT)
    }

    pub fn new_with(elements: Vec<HermMatrix>, policy: &NumericPolicy) -> Result<Self> {
        let first = elements
            .first()
            .ok_or_else(|| Error::InvalidPovm("no elements".into()))?;
        let dim = first.dim();
        let mut sum = CMat::zeros(dim, dim);
        for (k, e) in elements.iter().enumerate() {
            if e.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: e.dim(),
                });
            }
            let min = e.min_eigenvalue();
            if min < -ELEMENT_SLACK {
                return Err(Error::InvalidPovm(format!(
                    "element {k} has eigenvalue {min:.3e}"
                )));
            }
            sum += e.matrix();
        }
        let defect = (sum - CMat::identity(dim, dim))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if defect > policy.normalization_tol {
            return Err(Error::InvalidPovm(format!(
                "elements sum to identity only within {defect:.3e}"
            )));
        }
        Ok(Self { elements })
    }

    pub fn elements(&self) -> &[HermMatrix] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.elements[0].dim()
    }

    /// `Tr M_k ρ0` for each outcome.
    pub fn probabilities(&self, model: &StatisticalModel) -> Result<Vec<f64>> {
        self.check_dim(model)?;
        let rho = model.rho0().matrix();
        Ok(self
            .elements
            .iter()
            .map(|m| (m.matrix() * rho).trace().re)
            .collect())
    }

    fn check_dim(&self, model: &StatisticalModel) -> Result<()> {
        if self.dim() != model.dim() {
            return Err(Error::DimensionMismatch {
                expected: model.dim(),
                got: self.dim(),
            });
        }
        Ok(())
    }
}

/// `P_v = {(𝟙 + v·σ)/2, (𝟙 − v·σ)/2}`.
pub fn projective_bloch(v: &[f64; 3]) -> Result<Povm> {
    let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::NotUnit(norm));
    }
    let p = pauli();
    let vs = (0..3).fold(CMat::zeros(2, 2), |acc, j| {
        acc + &p[j] * Complex64::new(v[j], 0.0)
    });
    let id = CMat::identity(2, 2);
    let half = Complex64::new(0.5, 0.0);
    Povm::new(vec![
        HermMatrix::new((&id + &vs) * half)?,
        HermMatrix::new((&id - &vs) * half)?,
    ])
}

/// Weights on the simplex together with the POVMs they mix.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureSpec {
    weights: Vec<f64>,
    parts: Vec<Povm>,
}

impl MixtureSpec {
    pub fn new(weights: Vec<f64>, parts: Vec<Povm>) -> Result<Self> {
        if weights.is_empty() || weights.len() != parts.len() {
            return Err(Error::BadWeights(format!(
                "{} weights for {} parts",
                weights.len(),
                parts.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(**w >= 0.0)) {
            return Err(Error::BadWeights(format!("negative weight {w}")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::BadWeights(format!("weights sum to {total}")));
        }
        let dim = parts[0].dim();
        if let Some(p) = parts.iter().find(|p| p.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: p.dim(),
            });
        }
        Ok(Self { weights, parts })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn parts(&self) -> &[Povm] {
        &self.parts
    }
}

/// Flattens a mixture into one POVM with elements `λ_k M^{(k)}_j`, part by part.
pub fn mix(spec: &MixtureSpec) -> Result<Povm> {
    let elements = spec
        .weights
        .iter()
        .zip(&spec.parts)
        .flat_map(|(&w, p)| p.elements().iter().map(move |e| e.scale(w)))
        .collect();
    Povm::new(elements)
}

/// `𝔉_ij = Σ_k Tr(M_k ∂_i) Tr(M_k ∂_j) / Tr(M_k ρ0)`.
///
/// Outcomes whose probability is below `prob_floor` are skipped when all
/// their numerators vanish too.
pub fn fisher_info(model: &StatisticalModel, povm: &Povm) -> Result<RealSymMatrix> {
    let probs = povm.probabilities(model)?;
    let k = model.num_params();
    let floor = model.policy().prob_floor;
    let mut f = RMat::zeros(k, k);
    for (outcome, (m, &p)) in povm.elements().iter().zip(&probs).enumerate() {
        let num = DVector::from_iterator(
            k,
            model
                .derivs()
                .iter()
                .map(|d| (m.matrix() * d.matrix()).trace().re),
        );
        if p < floor {
            if num.amax() > NUMERATOR_TOL {
                return Err(Error::ZeroProbabilityOutcome { outcome, prob: p });
            }
            continue;
        }
        f += &num * num.transpose() / p;
    }
    RealSymMatrix::new(f)
}

/// `Tr(𝔉^M H⁻¹)`, at most `d − 1` for any single-copy measurement.
pub fn gm_trace(model: &StatisticalModel, povm: &Povm) -> Result<f64> {
    let f = fisher_info(model, povm)?;
    let hinv = qfi_bundle(model)?.h_inv()?;
    Ok((f.matrix() * hinv.matrix()).trace())
}

/// Bloch vector `n` of `ρ0` and the coefficient matrix `J` with
/// `∂_i = Σ_j J_ij σ_j` for a three-parameter qubit model.
fn qubit_frame(model: &StatisticalModel) -> Result<(Vector3<f64>, Matrix3<f64>)> {
    if model.dim() != 2 || model.num_params() != 3 {
        return Err(Error::InvalidModel(format!(
            "expected a three-parameter qubit model, got dim {} with {} parameters",
            model.dim(),
            model.num_params()
        )));
    }
    let (_, a) = bloch_coefficients(model.rho0().matrix());
    let n = Vector3::new(2.0 * a[0], 2.0 * a[1], 2.0 * a[2]);
    let mut j = Matrix3::zeros();
    for (i, d) in model.derivs().iter().enumerate() {
        let (_, c) = bloch_coefficients(d.matrix());
        for (col, v) in c.iter().enumerate() {
            j[(i, col)] = *v;
        }
    }
    Ok((n, j))
}

/// One projective part of a Gill–Massar mixture before normalization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmComponent {
    /// Unit Bloch vector of the projective measurement.
    pub direction: [f64; 3],
    pub weight: f64,
}

/// Directions and unnormalized weights whose mixture has Fisher
/// information `target_f`.
///
/// For `∂_i = Σ_j J_ij σ_j`, the measurement `P_v` has Fisher information
/// `4 (Jv)(Jv)ᵀ / (1 − (n·v)²)`. Each eigenvector `e_k` of `target_f` is
/// reached by `v_k ∝ J⁻¹ e_k`, and the weight rescales that rank-one term to
/// `f_k e_k e_kᵀ`. The weights sum to `Tr(target_f H⁻¹)`.
pub fn gm_measurement_components(
    model: &StatisticalModel,
    target_f: &RealSymMatrix,
) -> Result<Vec<GmComponent>> {
    let (n, j) = qubit_frame(model)?;
    if target_f.dim() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            got: target_f.dim(),
        });
    }
    let j_inv = j
        .try_inverse()
        .ok_or_else(|| Error::InvalidModel("derivatives are linearly dependent".into()))?;
    let mut eig = target_f.eig();
    let min = eig.min_eigenvalue();
    if min < -model.policy().psd_tol {
        return Err(Error::NotPsd(min));
    }
    eig.fix_signs(1e-12);
    let scale = eig.max_eigenvalue().max(1.0);
    let mut out = Vec::with_capacity(3);
    for k in 0..3 {
        let f_k = eig.eigenvalues[k];
        if f_k <= 1e-14 * scale {
            continue;
        }
        let e = Vector3::new(
            eig.eigenvectors[(0, k)],
            eig.eigenvectors[(1, k)],
            eig.eigenvectors[(2, k)],
        );
        let v = (j_inv * e).normalize();
        let jv = j * v;
        let nv = n.dot(&v);
        let weight = f_k * (1.0 - nv * nv) / (4.0 * jv.norm_squared());
        out.push(GmComponent {
            direction: [v[0], v[1], v[2]],
            weight,
        });
    }
    Ok(out)
}

/// Mixture of projective qubit measurements with Fisher information
/// `target_f`, which must saturate `Tr(target_f H⁻¹) = 1` within `1e-6`.
pub fn construct_gm_measurement(
    model: &StatisticalModel,
    target_f: &RealSymMatrix,
) -> Result<MixtureSpec> {
    let hinv = qfi_bundle(model)?.h_inv()?;
    let tr = (target_f.matrix() * hinv.matrix()).trace();
    if (tr - 1.0).abs() > 1e-6 {
        return Err(Error::NotSaturating(tr));
    }
    let comps = gm_measurement_components(model, target_f)?;
    let total: f64 = comps.iter().map(|c| c.weight).sum();
    let weights = comps.iter().map(|c| c.weight / total).collect();
    let parts = comps
        .iter()
        .map(|c| projective_bloch(&c.direction))
        .collect::<Result<Vec<_>>>()?;
    MixtureSpec::new(weights, parts)
}

/// Rank-one POVM with `outcomes` elements on a `dim`-dimensional space.
///
/// Rows of a Haar-like random isometry `Q` (`outcomes × dim`, `Q†Q = 𝟙`)
/// give the elements `q_k† q_k`.
pub fn random_rank_one_povm<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    outcomes: usize,
) -> Result<Povm> {
    if outcomes < dim {
        return Err(Error::InvalidPovm(format!(
            "{outcomes} rank-one elements cannot resolve dimension {dim}"
        )));
    }
    let a = CMat::from_fn(outcomes, dim, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let q = a.qr().q();
    let elements = (0..outcomes)
        .map(|k| {
            let row = q.row(k);
            HermMatrix::new(row.adjoint() * row)
        })
        .collect::<Result<Vec<_>>>()?;
    Povm::new(elements)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::max_abs;
    use crate::models::{euler_rotation_deg, qubit_model};
    use proptest::prelude::*;
    use rand::SeedableRng;

    fn aligned(z0: f64) -> StatisticalModel {
        qubit_model(z0, &Matrix3::identity()).unwrap()
    }

    fn pauli_mixture(alpha: f64, beta: f64) -> MixtureSpec {
        MixtureSpec::new(
            vec![alpha, beta, 1.0 - alpha - beta],
            vec![
                projective_bloch(&[1.0, 0.0, 0.0]).unwrap(),
                projective_bloch(&[0.0, 1.0, 0.0]).unwrap(),
                projective_bloch(&[0.0, 0.0, 1.0]).unwrap(),
            ],
        )
        .unwrap()
    }

    fn unit(v: [f64; 3]) -> [f64; 3] {
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        [v[0] / n, v[1] / n, v[2] / n]
    }

    #[test]
    fn projective_z_is_computational_basis() {
        let p = projective_bloch(&[0.0, 0.0, 1.0]).unwrap();
        assert_eq!(p.len(), 2);
        assert!((p.elements()[0][(0, 0)].re - 1.0).abs() < 1e-15);
        assert!(p.elements()[0][(1, 1)].norm() < 1e-15);
        assert!((p.elements()[1][(1, 1)].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn projective_x_is_plus_minus() {
        let p = projective_bloch(&[1.0, 0.0, 0.0]).unwrap();
        for (k, sign) in [(0, 1.0), (1, -1.0)] {
            let e = p.elements()[k].matrix();
            for (i, j) in [(0, 0), (1, 1)] {
                assert!((e[(i, j)].re - 0.5).abs() < 1e-15);
            }
            assert!((e[(0, 1)].re - 0.5 * sign).abs() < 1e-15);
        }
    }

    #[test]
    fn projective_rejects_non_unit() {
        assert!(matches!(
            projective_bloch(&[1.0, 1.0, 0.0]),
            Err(Error::NotUnit(_))
        ));
    }

    #[test]
    fn invalid_povms() {
        let half = HermMatrix::identity(2).scale(0.5);
        assert!(matches!(Povm::new(vec![half.clone()]), Err(Error::InvalidPovm(_))));
        assert!(matches!(Povm::new(vec![]), Err(Error::InvalidPovm(_))));
        let neg = HermMatrix::identity(2).scale(-0.5);
        let big = HermMatrix::identity(2).scale(1.5);
        assert!(matches!(Povm::new(vec![neg, big]), Err(Error::InvalidPovm(_))));
    }

    #[test]
    fn mixture_weights_validated() {
        let p = projective_bloch(&[0.0, 0.0, 1.0]).unwrap();
        assert!(MixtureSpec::new(vec![0.5, 0.6], vec![p.clone(), p.clone()]).is_err());
        assert!(MixtureSpec::new(vec![1.5, -0.5], vec![p.clone(), p.clone()]).is_err());
        assert!(MixtureSpec::new(vec![1.0], vec![p.clone(), p]).is_err());
    }

    #[test]
    fn mix_single_part_is_unchanged() {
        let p = projective_bloch(&unit([0.3, -0.2, 0.9])).unwrap();
        let m = mix(&MixtureSpec::new(vec![1.0], vec![p.clone()]).unwrap()).unwrap();
        assert_eq!(m, p);
    }

    #[test]
    fn mix_of_two_has_four_elements() {
        let spec = MixtureSpec::new(
            vec![0.5, 0.5],
            vec![
                projective_bloch(&[1.0, 0.0, 0.0]).unwrap(),
                projective_bloch(&[0.0, 0.0, 1.0]).unwrap(),
            ],
        )
        .unwrap();
        let m = mix(&spec).unwrap();
        assert_eq!(m.len(), 4);
        let sum = m
            .elements()
            .iter()
            .fold(CMat::zeros(2, 2), |acc, e| acc + e.matrix());
        assert!(max_abs(&(sum - CMat::identity(2, 2))) < 1e-15);
    }

    #[test]
    fn fisher_of_z_projective_at_maximally_mixed() {
        let f = fisher_info(&aligned(0.0), &projective_bloch(&[0.0, 0.0, 1.0]).unwrap()).unwrap();
        let mut expected = RMat::zeros(3, 3);
        expected[(2, 2)] = 4.0;
        assert!(max_abs(&(f.matrix() - expected)) < 1e-14);
    }

    #[test]
    fn fisher_of_pauli_mixture() {
        for z0 in [0.0, 0.4, 0.9] {
            let (a, b) = (0.2, 0.5);
            let f = fisher_info(&aligned(z0), &mix(&pauli_mixture(a, b)).unwrap()).unwrap();
            let expected = [4.0 * a, 4.0 * b, 4.0 * (1.0 - a - b) / (1.0 - z0 * z0)];
            for i in 0..3 {
                for j in 0..3 {
                    let e = if i == j { expected[i] } else { 0.0 };
                    assert!((f[(i, j)] - e).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn gm_trace_of_z_projective_is_one() {
        for z0 in [0.0, 0.5, 0.9] {
            let t = gm_trace(&aligned(z0), &projective_bloch(&[0.0, 0.0, 1.0]).unwrap()).unwrap();
            assert!((t - 1.0).abs() < 1e-12, "z0 {z0}: {t}");
        }
        let t = gm_trace(&aligned(0.7), &mix(&pauli_mixture(0.3, 0.3)).unwrap()).unwrap();
        assert!((t - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_probability_outcomes() {
        let model = aligned(1.0 - 1e-6);
        // P_z on a nearly pure state: the minus outcome has probability 5e-7.
        assert!(fisher_info(&model, &projective_bloch(&[0.0, 0.0, 1.0]).unwrap()).is_ok());

        let rho0 = HermMatrix::new(CMat::from_diagonal(&DVector::from_vec(vec![
            Complex64::new(1.0 - 1e-9, 0.0),
            Complex64::new(1e-9, 0.0),
        ])))
        .unwrap();
        let policy = NumericPolicy {
            rank_tol: 1e-10,
            prob_floor: 1e-8,
            ..NumericPolicy::DEFAULT
        };
        let dz = HermMatrix::new(pauli()[2].clone()).unwrap();
        let dx = HermMatrix::new(pauli()[0].clone()).unwrap();
        let pz = projective_bloch(&[0.0, 0.0, 1.0]).unwrap();
        let m = StatisticalModel::new_with(rho0.clone(), vec![dz], vec!["z".into()], policy).unwrap();
        assert!(matches!(
            fisher_info(&m, &pz),
            Err(Error::ZeroProbabilityOutcome { outcome: 1, .. })
        ));
        let m = StatisticalModel::new_with(rho0, vec![dx], vec!["x".into()], policy).unwrap();
        let f = fisher_info(&m, &pz).unwrap();
        assert_eq!(f[(0, 0)], 0.0);
    }

    #[test]
    fn gm_construction_recovers_rank_one_target() {
        let model = aligned(0.6);
        let target = fisher_info(&model, &projective_bloch(&[0.0, 0.0, 1.0]).unwrap()).unwrap();
        let spec = construct_gm_measurement(&model, &target).unwrap();
        assert_eq!(spec.weights().len(), 1);
        assert!((spec.weights()[0] - 1.0).abs() < 1e-12);
        let f = fisher_info(&model, &mix(&spec).unwrap()).unwrap();
        assert!(max_abs(&(f.matrix() - target.matrix())) < 1e-7);
    }

    #[test]
    fn gm_construction_rejects_non_saturating() {
        let model = aligned(0.6);
        let target = RealSymMatrix::from_diagonal(&[1.0, 1.0, 1.0]);
        assert!(matches!(
            construct_gm_measurement(&model, &target),
            Err(Error::NotSaturating(_))
        ));
    }

    #[test]
    fn gm_construction_on_pauli_mixture() {
        let z0 = 0.8;
        let model = aligned(z0);
        let target = fisher_info(&model, &mix(&pauli_mixture(0.25, 0.35)).unwrap()).unwrap();
        let spec = construct_gm_measurement(&model, &target).unwrap();
        let mut w = spec.weights().to_vec();
        w.sort_by(f64::total_cmp);
        let mut expected = vec![0.25, 0.35, 0.4];
        expected.sort_by(f64::total_cmp);
        for (a, b) in w.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn random_povm_is_valid() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for outcomes in 2..=4 {
            let p = random_rank_one_povm(&mut rng, 2, outcomes).unwrap();
            assert_eq!(p.len(), outcomes);
        }
        assert!(random_rank_one_povm(&mut rng, 3, 2).is_err());
    }

    fn rotated_model(z0: f64, angles: [f64; 3]) -> StatisticalModel {
        qubit_model(z0, &euler_rotation_deg(angles[0], angles[1], angles[2])).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn projective_fisher_closed_form(z0 in 0.0f64..0.99, v in prop::array::uniform3(-1.0f64..1.0)) {
            let n2: f64 = v.iter().map(|x| x * x).sum();
            prop_assume!(n2 > 1e-3);
            let v = unit(v);
            let f = fisher_info(&aligned(z0), &projective_bloch(&v).unwrap()).unwrap();
            let nv = z0 * v[2];
            for i in 0..3 {
                for j in 0..3 {
                    let e = 4.0 * v[i] * v[j] / (1.0 - nv * nv);
                    prop_assert!((f[(i, j)] - e).abs() < 1e-9);
                }
            }
        }

        #[test]
        fn fisher_is_psd_and_gm_trace_bounded(seed in any::<u64>(), z0 in 0.0f64..0.99, outcomes in 2usize..=4,
                                              angles in prop::array::uniform3(0.0f64..360.0)) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let model = rotated_model(z0, angles);
            let povm = random_rank_one_povm(&mut rng, 2, outcomes).unwrap();
            let f = fisher_info(&model, &povm).unwrap();
            prop_assert!(f.min_eigenvalue() > -1e-10);
            prop_assert!(gm_trace(&model, &povm).unwrap() <= 1.0 + 1e-8);
        }

        #[test]
        fn mixture_fisher_is_linear(seed in any::<u64>(), z0 in 0.0f64..0.99, w in 0.0f64..1.0) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let model = aligned(z0);
            let p1 = random_rank_one_povm(&mut rng, 2, 3).unwrap();
            let p2 = random_rank_one_povm(&mut rng, 2, 2).unwrap();
            let spec = MixtureSpec::new(vec![w, 1.0 - w], vec![p1.clone(), p2.clone()]).unwrap();
            let mixed = fisher_info(&model, &mix(&spec).unwrap()).unwrap();
            let f1 = fisher_info(&model, &p1).unwrap();
            let f2 = fisher_info(&model, &p2).unwrap();
            let comb = f1.matrix() * w + f2.matrix() * (1.0 - w);
            prop_assert!(max_abs(&(mixed.matrix() - &comb)) < 1e-10 * (1.0 + max_abs(&comb)));
        }

        #[test]
        fn gm_weights_sum_to_trace(z0 in 0.0f64..0.99, angles in prop::array::uniform3(0.0f64..360.0),
                                   d in prop::array::uniform3(0.01f64..5.0)) {
            let model = rotated_model(z0, angles);
            let r = euler_rotation_deg(10.0, 40.0, 75.0);
            let diag = Matrix3::from_diagonal(&Vector3::new(d[0], d[1], d[2]));
            let f3 = r * diag * r.transpose();
            let target = RealSymMatrix::new(RMat::from_fn(3, 3, |i, j| f3[(i, j)])).unwrap();
            let comps = gm_measurement_components(&model, &target).unwrap();
            let hinv = qfi_bundle(&model).unwrap().h_inv().unwrap();
            let tr = (target.matrix() * hinv.matrix()).trace();
            let total: f64 = comps.iter().map(|c| c.weight).sum();
            prop_assert!((total - tr).abs() < 1e-9 * tr.max(1.0));
        }
    }
}
