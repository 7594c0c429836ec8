//! Monte-Carlo estimation with a locally unbiased linear estimator.
//!
//! Every trial measures `n_copies` independent copies of `ρ0` and forms the
//! linear-inversion estimate `θ̂ = 𝔉⁻¹ · score / N` around the reference
//! point. Over many trials, `N · cov(θ̂)` approaches `𝔉⁻¹`.
//!
//! Trial `t` draws from its own ChaCha8 stream (`seed`, stream `t`), so
//! results do not depend on the number of worker threads.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{gm_bound_from_inverse, optimal_covariance_from_inverse, CostMatrix};
use crate::error::{Error, Result};
use crate::matcore::{RealSymMatrix, Spectral};
use crate::measurements::{construct_gm_measurement, fisher_info, mix, MixtureSpec, Povm};
use crate::models::{qfi_bundle, qubit_model, StatisticalModel};

pub const MIN_COPIES: u64 = 100;
pub const MIN_TRIALS: usize = 10;

/// Outcome probabilities must sum to one within this.
const DISTRIBUTION_TOL: f64 = 1e-9;

/// Label written into reports.
pub const ESTIMATOR_NAME: &str = "linear-inversion";

#[derive(Debug, Clone, PartialEq)]
pub enum Measurement {
    Povm(Povm),
    /// Realized by giving part `k` exactly `⌊λ_k N⌋` copies, with the
    /// leftover copies going to the part with the largest weight.
    Mixture(MixtureSpec),
}

impl Measurement {
    /// The measurement as a single POVM; mixtures are flattened part by part.
    pub fn flattened(&self) -> Result<Povm> {
        match self {
            Measurement::Povm(p) => Ok(p.clone()),
            Measurement::Mixture(m) => mix(m),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub model: StatisticalModel,
    pub measurement: Measurement,
    pub n_copies: u64,
    pub n_trials: usize,
    pub seed: u64,
}

impl SimConfig {
    pub fn new(
        model: StatisticalModel,
        measurement: Measurement,
        n_copies: u64,
        n_trials: usize,
        seed: u64,
    ) -> Result<Self> {
        let config = Self {
            model,
            measurement,
            n_copies,
            n_trials,
            seed,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_copies < MIN_COPIES {
            return Err(Error::InvalidConfig(format!(
                "n_copies must be at least {MIN_COPIES}, got {}",
                self.n_copies
            )));
        }
        if self.n_trials < MIN_TRIALS {
            return Err(Error::InvalidConfig(format!(
                "n_trials must be at least {MIN_TRIALS}, got {}",
                self.n_trials
            )));
        }
        let dim = match &self.measurement {
            Measurement::Povm(p) => p.dim(),
            Measurement::Mixture(m) => m.parts()[0].dim(),
        };
        if dim != self.model.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.model.dim(),
                got: dim,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimationResult {
    /// `N · cov(θ̂)` with the unbiased `1/(T−1)` normalization.
    pub empirical_covariance: RealSymMatrix,
    pub mean_estimate: DVector<f64>,
    /// Number of trials that entered the statistics.
    pub n_effective: usize,
}

/// Pairwise (cascade) summation.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const LEAF: usize = 8;
    if xs.len() <= LEAF {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

fn validated_probabilities(model: &StatisticalModel, povm: &Povm) -> Result<Vec<f64>> {
    let probs = povm.probabilities(model)?;
    if let Some(p) = probs.iter().find(|p| !(**p >= -DISTRIBUTION_TOL)) {
        return Err(Error::BadDistribution(format!("negative probability {p}")));
    }
    let total = pairwise_sum(&probs);
    if (total - 1.0).abs() > DISTRIBUTION_TOL {
        return Err(Error::BadDistribution(format!("probabilities sum to {total}")));
    }
    Ok(probs.into_iter().map(|p| p.clamp(0.0, 1.0)).collect())
}

/// Multinomial draw by a chain of conditional binomials.
fn multinomial(rng: &mut ChaCha8Rng, n: u64, probs: &[f64], out: &mut Vec<u64>) {
    let mut remaining = n;
    let mut mass = 1.0;
    let last = probs.len() - 1;
    for (k, &p) in probs.iter().enumerate() {
        if k == last {
            out.push(remaining);
            break;
        }
        let q = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 0.0 };
        let c = if remaining == 0 || q == 0.0 {
            0
        } else if q >= 1.0 {
            remaining
        } else {
            Binomial::new(remaining, q)
                .expect("binomial parameters in range")
                .sample(rng)
        };
        out.push(c);
        remaining -= c;
        mass -= p;
    }
}

/// Copies given to each mixture part: `⌊λ_k N⌋`, remainder to the largest weight
/// (first one on ties).
pub fn allocate_copies(weights: &[f64], n: u64) -> Vec<u64> {
    let mut alloc: Vec<u64> = weights.iter().map(|w| (w * n as f64).floor() as u64).collect();
    let used: u64 = alloc.iter().sum();
    let largest = weights
        .iter()
        .enumerate()
        .fold(0, |best, (k, w)| if *w > weights[best] { k } else { best });
    alloc[largest] += n.saturating_sub(used);
    alloc
}

/// Part-wise sampling plan: copies and outcome probabilities per part.
struct Plan {
    parts: Vec<(u64, Vec<f64>)>,
}

impl Plan {
    fn new(config: &SimConfig) -> Result<Self> {
        let parts = match &config.measurement {
            Measurement::Povm(p) => vec![(config.n_copies, validated_probabilities(&config.model, p)?)],
            Measurement::Mixture(m) => allocate_copies(m.weights(), config.n_copies)
                .into_iter()
                .zip(m.parts())
                .map(|(n, p)| Ok((n, validated_probabilities(&config.model, p)?)))
                .collect::<Result<Vec<_>>>()?,
        };
        Ok(Self { parts })
    }

    fn sample(&self, seed: u64, trial: usize) -> Vec<u64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial as u64);
        let mut counts = Vec::new();
        for (n, probs) in &self.parts {
            multinomial(&mut rng, *n, probs, &mut counts);
        }
        counts
    }
}

/// Outcome counts per trial, in the order of [`Measurement::flattened`].
pub fn sample_outcomes(config: &SimConfig) -> Result<Vec<Vec<u64>>> {
    config.validate()?;
    let plan = Plan::new(config)?;
    Ok((0..config.n_trials)
        .into_par_iter()
        .map(|t| plan.sample(config.seed, t))
        .collect())
}

/// Precomputed `𝔉⁻¹` and score coefficients for one (model, POVM) pair.
#[derive(Debug, Clone)]
pub struct LinearEstimator {
    fisher_inv: DMatrix<f64>,
    /// `Tr(M_k ∂_i) / Tr(M_k ρ0)`, one column per outcome.
    score: DMatrix<f64>,
}

impl LinearEstimator {
    pub fn new(model: &StatisticalModel, povm: &Povm) -> Result<Self> {
        let f = fisher_info(model, povm)?;
        let eig = f.eig();
        let min = eig.min_eigenvalue();
        let scale = eig.max_eigenvalue().max(1.0);
        if min <= 1e-12 * scale {
            return Err(Error::SingularFisher(min));
        }
        let fisher_inv = f
            .matrix()
            .clone()
            .try_inverse()
            .ok_or(Error::SingularFisher(min))?;
        let probs = povm.probabilities(model)?;
        let floor = model.policy().prob_floor;
        let k = model.num_params();
        let mut score = DMatrix::zeros(k, povm.len());
        for (o, (m, &p)) in povm.elements().iter().zip(&probs).enumerate() {
            if p < floor {
                continue;
            }
            for (i, d) in model.derivs().iter().enumerate() {
                score[(i, o)] = (m.matrix() * d.matrix()).trace().re / p;
            }
        }
        Ok(Self { fisher_inv, score })
    }

    pub fn fisher_inverse(&self) -> &DMatrix<f64> {
        &self.fisher_inv
    }

    pub fn estimate(&self, counts: &[u64]) -> Result<DVector<f64>> {
        if counts.len() != self.score.ncols() {
            return Err(Error::DimensionMismatch {
                expected: self.score.ncols(),
                got: counts.len(),
            });
        }
        let n: u64 = counts.iter().sum();
        if n == 0 {
            return Err(Error::InvalidConfig("no counts".into()));
        }
        let freq = DVector::from_iterator(counts.len(), counts.iter().map(|&c| c as f64 / n as f64));
        Ok(&self.fisher_inv * (&self.score * freq))
    }
}

/// `θ̂ = 𝔉⁻¹ · score`, `score_i = Σ_k counts_k Tr(M_k ∂_i) / (N Tr(M_k ρ0))`.
pub fn linear_estimator(model: &StatisticalModel, povm: &Povm, counts: &[u64]) -> Result<DVector<f64>> {
    LinearEstimator::new(model, povm)?.estimate(counts)
}

/// Estimates of every trial, in trial order.
pub fn simulate_estimates(config: &SimConfig) -> Result<Vec<DVector<f64>>> {
    config.validate()?;
    let povm = config.measurement.flattened()?;
    let est = LinearEstimator::new(&config.model, &povm)?;
    let plan = Plan::new(config)?;
    (0..config.n_trials)
        .into_par_iter()
        .map(|t| est.estimate(&plan.sample(config.seed, t)))
        .collect()
}

fn mean_of(estimates: &[DVector<f64>]) -> DVector<f64> {
    let k = estimates[0].len();
    let t = estimates.len() as f64;
    DVector::from_iterator(
        k,
        (0..k).map(|i| pairwise_sum(&estimates.iter().map(|e| e[i]).collect::<Vec<_>>()) / t),
    )
}

/// Mean and `N`-rescaled sample covariance of per-trial estimates.
pub fn estimation_result(estimates: &[DVector<f64>], n_copies: u64) -> Result<EstimationResult> {
    if estimates.len() < 2 {
        return Err(Error::InvalidConfig("need at least two trials".into()));
    }
    let k = estimates[0].len();
    let mean = mean_of(estimates);
    let scale = n_copies as f64 / (estimates.len() - 1) as f64;
    let mut cov = DMatrix::zeros(k, k);
    let mut buf = vec![0.0; estimates.len()];
    for i in 0..k {
        for j in 0..=i {
            for (b, e) in buf.iter_mut().zip(estimates) {
                *b = (e[i] - mean[i]) * (e[j] - mean[j]);
            }
            let v = pairwise_sum(&buf) * scale;
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    Ok(EstimationResult {
        empirical_covariance: RealSymMatrix::new(cov)?,
        mean_estimate: mean,
        n_effective: estimates.len(),
    })
}

pub fn simulate(config: &SimConfig) -> Result<EstimationResult> {
    estimation_result(&simulate_estimates(config)?, config.n_copies)
}

/// Empirical `Tr(N·cov·G)` and its Monte-Carlo standard error.
///
/// The cost is the mean of `q_t = N (θ̂_t − m)ᵀ G (θ̂_t − m) · T/(T−1)`; the
/// standard error is the sample deviation of `q_t` over `√T`.
pub fn empirical_cost(estimates: &[DVector<f64>], n_copies: u64, g: &CostMatrix) -> Result<(f64, f64)> {
    let t = estimates.len();
    if t < 2 {
        return Err(Error::InvalidConfig("need at least two trials".into()));
    }
    let k = estimates[0].len();
    if g.dim() != k {
        return Err(Error::DimensionMismatch { expected: k, got: g.dim() });
    }
    let mean = mean_of(estimates);
    let gm = g.matrix().matrix();
    let factor = n_copies as f64 * t as f64 / (t - 1) as f64;
    let q: Vec<f64> = estimates
        .iter()
        .map(|e| {
            let dev = e - &mean;
            factor * (dev.transpose() * gm * &dev)[(0, 0)]
        })
        .collect();
    let cost = pairwise_sum(&q) / t as f64;
    let sq: Vec<f64> = q.iter().map(|x| (x - cost) * (x - cost)).collect();
    let sd = (pairwise_sum(&sq) / (t - 1) as f64).sqrt();
    Ok((cost, sd / (t as f64).sqrt()))
}

/// Outcome of comparing a simulated cost with a bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttainabilityReport {
    pub bound: f64,
    pub empirical: f64,
    pub stderr: f64,
    pub n_copies: u64,
    pub n_trials: usize,
    pub seed: u64,
    pub pass: bool,
    pub estimator: String,
}

/// Relative tolerance between the simulated cost and the bound.
pub const ATTAINABILITY_REL_TOL: f64 = 0.05;

impl AttainabilityReport {
    /// `pass` requires the cost within 5% of the bound and no more than
    /// three standard errors below it.
    pub fn new(bound: f64, empirical: f64, stderr: f64, config: &SimConfig) -> Self {
        let close = ((empirical - bound) / bound).abs() <= ATTAINABILITY_REL_TOL;
        let respects = empirical >= bound - 3.0 * stderr;
        Self {
            bound,
            empirical,
            stderr,
            n_copies: config.n_copies,
            n_trials: config.n_trials,
            seed: config.seed,
            pass: close && respects,
            estimator: ESTIMATOR_NAME.to_string(),
        }
    }
}

/// Gill–Massar-optimal mixture for an aligned qubit at `z0` and cost `g`.
pub fn gm_optimal_measurement(z0: f64, g: &CostMatrix) -> Result<(StatisticalModel, MixtureSpec)> {
    let model = qubit_model(z0, &nalgebra::Matrix3::identity())?;
    let hinv = qfi_bundle(&model)?.h_inv()?;
    let v = optimal_covariance_from_inverse(&hinv, g, 2)?;
    let target = v.inv_psd()?;
    let spec = construct_gm_measurement(&model, &target)?;
    Ok((model, spec))
}

/// Simulates the optimal mixture and compares `Tr(N·cov·G)` with `gm_bound(G)`.
pub fn verify_gm_attainability(
    z0: f64,
    g: &CostMatrix,
    n_copies: u64,
    n_trials: usize,
    seed: u64,
) -> Result<AttainabilityReport> {
    if g.dim() != 3 {
        return Err(Error::DimensionMismatch { expected: 3, got: g.dim() });
    }
    let off = g.matrix().matrix().clone() - DMatrix::from_diagonal(&g.matrix().matrix().diagonal());
    if off.amax() > 0.0 {
        return Err(Error::InvalidConfig("cost matrix must be diagonal".into()));
    }
    let (model, spec) = gm_optimal_measurement(z0, g)?;
    let config = SimConfig::new(model, Measurement::Mixture(spec), n_copies, n_trials, seed)?;
    compare_with_gm_bound(&config, g)
}

/// Simulates any configuration and compares its cost with `gm_bound(G)`
/// for a qubit (`d = 2`) or the dimension of the model.
pub fn compare_with_gm_bound(config: &SimConfig, g: &CostMatrix) -> Result<AttainabilityReport> {
    let hinv = qfi_bundle(&config.model)?.h_inv()?;
    let bound = gm_bound_from_inverse(&hinv, g, config.model.dim())?.value;
    let estimates = simulate_estimates(config)?;
    let (empirical, stderr) = empirical_cost(&estimates, config.n_copies, g)?;
    Ok(AttainabilityReport::new(bound, empirical, stderr, config))
}
