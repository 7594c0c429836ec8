use num_complex::Complex64;

use super::StatisticalModel;
use crate::error::{Error, Result};
use crate::matcore::{commutator, CMat, HermMatrix};
use crate::policy::NumericPolicy;

const MIN_GAP: f64 = 1e-6;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Gell-Mann matrix `λ_k`, `k = 1..=8`, in the standard ordering
/// (λ₈ carries the `1/√3`).
///
/// # Panics
///
/// If `k` is outside `1..=8`.
pub fn gell_mann(k: usize) -> CMat {
    let mut m = CMat::zeros(3, 3);
    let i = c(0.0, 1.0);
    let one = c(1.0, 0.0);
    match k {
        1 => {
            m[(0, 1)] = one;
            m[(1, 0)] = one;
        }
        2 => {
            m[(0, 1)] = -i;
            m[(1, 0)] = i;
        }
        3 => {
            m[(0, 0)] = one;
            m[(1, 1)] = -one;
        }
        4 => {
            m[(0, 2)] = one;
            m[(2, 0)] = one;
        }
        5 => {
            m[(0, 2)] = -i;
            m[(2, 0)] = i;
        }
        6 => {
            m[(1, 2)] = one;
            m[(2, 1)] = one;
        }
        7 => {
            m[(1, 2)] = -i;
            m[(2, 1)] = i;
        }
        8 => {
            let s = 1.0 / 3f64.sqrt();
            m[(0, 0)] = c(s, 0.0);
            m[(1, 1)] = c(s, 0.0);
            m[(2, 2)] = c(-2.0 * s, 0.0);
        }
        _ => panic!("Gell-Mann index {k} outside 1..=8"),
    }
    m
}

fn spectrum(k1: f64, k2: f64) -> Result<[f64; 3]> {
    let k = [k1, k2, 1.0 - k1 - k2];
    let policy = NumericPolicy::DEFAULT;
    let min = k.iter().copied().fold(f64::INFINITY, f64::min);
    if min < policy.rank_tol {
        return Err(Error::RankDeficient(min));
    }
    let gap = [(k[0] - k[1]).abs(), (k[0] - k[2]).abs(), (k[1] - k[2]).abs()]
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    if gap < MIN_GAP {
        return Err(Error::DegenerateSpectrum(gap));
    }
    Ok(k)
}

/// Eight-parameter qutrit model around `ρ0 = diag(k1, k2, 1 − k1 − k2)`.
///
/// Off-diagonal parameters `θ_i`, `i ∈ {1,2,4,5,6,7}`, enter through the
/// unitary `exp(−i Σ θ_i λ_i)`, so `∂ρ/∂θ_i = −i[λ_i, ρ0]`; the diagonal
/// ones give `∂ρ/∂θ_3 = λ_3` and `∂ρ/∂θ_8 = λ_8`. Parameter `θ_k` sits at
/// index `k − 1`.
pub fn qutrit_model(k1: f64, k2: f64) -> Result<StatisticalModel> {
    let k = spectrum(k1, k2)?;
    let rho0 = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
        3,
        k.iter().map(|&x| c(x, 0.0)),
    ));
    let minus_i = c(0.0, -1.0);
    let derivs = (1..=8)
        .map(|idx| {
            let m = match idx {
                3 | 8 => gell_mann(idx),
                _ => commutator(&gell_mann(idx), &rho0) * minus_i,
            };
            HermMatrix::new(m)
        })
        .collect::<Result<Vec<_>>>()?;
    let labels = (1..=8).map(|i| format!("theta{i}")).collect();
    StatisticalModel::new(HermMatrix::new(rho0)?, derivs, labels)
}

/// Closed-form SLD of parameter `θ_idx` (`idx = 1..=8`) of [`qutrit_model`].
pub fn closed_form_sld(k1: f64, k2: f64, idx: usize) -> Result<CMat> {
    let [a, b, c3] = spectrum(k1, k2)?;
    let ratio = |x: f64, y: f64| 2.0 * (x - y) / (x + y);
    let m = match idx {
        1 => gell_mann(2) * c(-ratio(a, b), 0.0),
        2 => gell_mann(1) * c(ratio(a, b), 0.0),
        4 => gell_mann(5) * c(-ratio(a, c3), 0.0),
        5 => gell_mann(4) * c(ratio(a, c3), 0.0),
        6 => gell_mann(7) * c(-ratio(b, c3), 0.0),
        7 => gell_mann(6) * c(ratio(b, c3), 0.0),
        3 => CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![
            c(1.0 / a, 0.0),
            c(-1.0 / b, 0.0),
            c(0.0, 0.0),
        ])),
        8 => {
            let s = 1.0 / 3f64.sqrt();
            CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![
                c(s / a, 0.0),
                c(s / b, 0.0),
                c(-2.0 * s / c3, 0.0),
            ]))
        }
        _ => {
            return Err(Error::BadIndex {
                index: idx,
                count: 8,
            })
        }
    };
    Ok(m)
}

/// The three nonzero `|D_ij|` of [`qutrit_model`], as zero-based index pairs:
/// `(0,1)`, `(3,4)`, `(5,6)` with magnitude `8|k_a − k_b|³/(k_a + k_b)²`.
pub fn closed_form_d_abs(k1: f64, k2: f64) -> Result<[(usize, usize, f64); 3]> {
    let [a, b, c3] = spectrum(k1, k2)?;
    let f = |x: f64, y: f64| 8.0 * (x - y).abs().powi(3) / (x + y).powi(2);
    Ok([(0, 1, f(a, b)), (3, 4, f(a, c3)), (5, 6, f(b, c3))])
}
