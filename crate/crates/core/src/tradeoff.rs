//! Trade-off curves and surfaces between rescaled variances.
//!
//! A cost bound `B(G)` that is homogeneous of degree one in `G` excludes, for
//! each `G`, the half-space `Tr(NV·G) < B(G)`. For diagonal costs the
//! allowed region of the diagonal `(NV_1, …, NV_K)` is the intersection of
//! those half-spaces; its boundary is what this module samples.
//!
//! The state-independent part sweeps qubit states and frame rotations and
//! folds the resulting optimal covariances into a running summary, so
//! grids with hundreds of millions of points never have to be stored.

use nalgebra::{Matrix3, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;

use crate::bounds::{gm_bound_from_inverse, optimal_covariance_from_inverse, CostMatrix};
use crate::error::{Error, Result};
use crate::matcore::{sqrt3_trace_diag, RMat, RealSymMatrix, Spectral};
use crate::measurements::{fisher_info, mix, projective_bloch, MixtureSpec};
use crate::models::{bloch_coefficients, euler_rotation_deg, qfi_bundle, qubit_model, solve_sld};
use crate::policy::NumericPolicy;

/// A point `(NV_1, NV_2)` on a two-parameter curve, tagged with the cost
/// weight `t` of `G = diag(t, 1 − t)` that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub t: f64,
    pub nv1: f64,
    pub nv2: f64,
}

/// A point on a three-parameter qubit surface with the cost and state that
/// produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePoint {
    /// Diagonal of the cost matrix.
    pub cost: [f64; 3],
    pub nv: [f64; 3],
    pub z0: f64,
    pub euler_deg: [f64; 3],
}

fn check_open_unit(t: f64) -> Result<()> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::BadGrid(format!("t = {t} outside (0, 1)")));
    }
    Ok(())
}

/// `n` points strictly inside `(0, 1)`: `(k + offset)/n` for `k = 0..n`,
/// with `offset` in `(0, 1)`.
pub fn open_unit_grid(n: usize, offset: f64) -> Vec<f64> {
    (0..n).map(|k| (k as f64 + offset) / n as f64).collect()
}

/// Gill–Massar curve for a two-parameter model with `H⁻¹` diagonal
/// `(u1, u2)` and determinant `det_hinv`:
///
/// `NV_1(t) = (u1 + √((1−t)/t)·√det)/(d−1)`,
/// `NV_2(t) = (u2 + √(t/(1−t))·√det)/(d−1)`.
pub fn gm_curve_parametric(
    u1: f64,
    u2: f64,
    det_hinv: f64,
    d: usize,
    t_grid: &[f64],
) -> Result<Vec<CurvePoint>> {
    if !(u1 > 0.0 && u2 > 0.0 && det_hinv > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "need u1, u2, det > 0 (got {u1}, {u2}, {det_hinv})"
        )));
    }
    if d < 2 {
        return Err(Error::InvalidConfig(format!("d must be at least 2, got {d}")));
    }
    if t_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let sd = det_hinv.sqrt();
    let scale = 1.0 / (d - 1) as f64;
    t_grid
        .iter()
        .map(|&t| {
            check_open_unit(t)?;
            Ok(CurvePoint {
                t,
                nv1: (u1 + ((1.0 - t) / t).sqrt() * sd) * scale,
                nv2: (u2 + (t / (1.0 - t)).sqrt() * sd) * scale,
            })
        })
        .collect()
}

/// Upper envelope of the lines `t·NV_1 + (1−t)·NV_2 = B(diag(t, 1−t))`.
///
/// For each `x` the boundary value is `max_t [B(t) − t·x]/(1 − t)`; the
/// returned point carries the maximizing `t` (first one on ties).
pub fn envelope_from_lines<F>(bound_fn: F, t_grid: &[f64], x_grid: &[f64]) -> Result<Vec<CurvePoint>>
where
    F: Fn(&CostMatrix) -> Result<f64>,
{
    if t_grid.is_empty() || x_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let lines = t_grid
        .iter()
        .map(|&t| {
            check_open_unit(t)?;
            Ok((t, bound_fn(&CostMatrix::from_diagonal(&[t, 1.0 - t])?)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(x_grid
        .iter()
        .map(|&x| {
            let (mut best_t, mut best) = (lines[0].0, f64::NEG_INFINITY);
            for &(t, b) in &lines {
                let y = (b - t * x) / (1.0 - t);
                if y > best {
                    best = y;
                    best_t = t;
                }
            }
            CurvePoint {
                t: best_t,
                nv1: x,
                nv2: best,
            }
        })
        .collect())
}

/// True when the points, sorted by `nv1`, have strictly decreasing `nv2`
/// and non-negative discrete second differences (slack `tol`).
pub fn is_convex_decreasing(points: &[CurvePoint], tol: f64) -> bool {
    let mut p: Vec<(f64, f64)> = points.iter().map(|c| (c.nv1, c.nv2)).collect();
    p.sort_by(|a, b| a.0.total_cmp(&b.0));
    if p.windows(2).any(|w| !(w[1].1 < w[0].1)) {
        return false;
    }
    p.windows(3).all(|w| {
        let s1 = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
        let s2 = (w[2].1 - w[1].1) / (w[2].0 - w[1].0);
        s2 >= s1 - tol
    })
}

/// Interior grid on the cost simplex `{(s, t, r) : s + t + r = 1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexGrid {
    points: Vec<[f64; 3]>,
}

impl SimplexGrid {
    /// Spacing `1/n`, shrunk so every coordinate is at least `eps`.
    pub fn uniform(n: usize, eps: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyGrid);
        }
        if !(eps >= 0.0 && eps < 1.0 / 3.0) {
            return Err(Error::BadGrid(format!("boundary offset {eps} outside [0, 1/3)")));
        }
        let span = 1.0 - 3.0 * eps;
        let mut points = Vec::with_capacity((n + 1) * (n + 2) / 2);
        for i in 0..=n {
            for j in 0..=n - i {
                let s = eps + span * i as f64 / n as f64;
                let t = eps + span * j as f64 / n as f64;
                points.push([s, t, 1.0 - s - t]);
            }
        }
        Ok(Self { points })
    }

    pub fn from_points(points: Vec<[f64; 3]>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyGrid);
        }
        for p in &points {
            if p.iter().any(|x| !(*x >= 0.0)) || (p.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                return Err(Error::BadGrid(format!("{p:?} is not on the simplex")));
            }
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[[f64; 3]] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Value of `min NV_3` together with the cost that attains it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceArgmax {
    pub nv3: f64,
    pub s: f64,
    pub t: f64,
}

/// A bound evaluated once on every point of a simplex grid, so repeated
/// surface queries reduce to a maximum over linear forms.
#[derive(Debug, Clone)]
pub struct TabulatedBound {
    grid: SimplexGrid,
    values: Vec<f64>,
}

impl TabulatedBound {
    pub fn new<F>(bound_fn: F, grid: SimplexGrid) -> Result<Self>
    where
        F: Fn(&CostMatrix) -> Result<f64> + Sync,
    {
        let values = grid
            .points
            .par_iter()
            .map(|p| bound_fn(&CostMatrix::from_diagonal(p)?))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &SimplexGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `max_{(s,t)} [B(s,t,r) − s·nv1 − t·nv2]/r` over grid points with `r > 0`.
    pub fn min_nv3(&self, nv1: f64, nv2: f64) -> Result<SurfaceArgmax> {
        let mut best = SurfaceArgmax {
            nv3: f64::NEG_INFINITY,
            s: f64::NAN,
            t: f64::NAN,
        };
        for (p, &b) in self.grid.points.iter().zip(&self.values) {
            if p[2] <= 0.0 {
                continue;
            }
            let v = (b - p[0] * nv1 - p[1] * nv2) / p[2];
            if v > best.nv3 {
                best = SurfaceArgmax {
                    nv3: v,
                    s: p[0],
                    t: p[1],
                };
            }
        }
        if !(best.nv3 > 0.0) {
            return Err(Error::Infeasible);
        }
        Ok(best)
    }
}

/// Smallest `NV_3` allowed by `bound_fn` given `NV_1 = nv1`, `NV_2 = nv2`.
pub fn surface_min_nv3<F>(bound_fn: F, nv1: f64, nv2: f64, grid: &SimplexGrid) -> Result<f64>
where
    F: Fn(&CostMatrix) -> Result<f64> + Sync,
{
    Ok(TabulatedBound::new(bound_fn, grid.clone())?.min_nv3(nv1, nv2)?.nv3)
}

/// `H⁻¹ = R · ¼diag(1, 1, 1 − z0²) · Rᵀ` for the qubit model in a rotated frame.
pub fn qubit_hinv(z0: f64, r: &Matrix3<f64>) -> Matrix3<f64> {
    let d = Matrix3::from_diagonal(&Vector3::new(0.25, 0.25, 0.25 * (1.0 - z0 * z0)));
    r * d * r.transpose()
}

fn to_sym(m: &Matrix3<f64>) -> Result<RealSymMatrix> {
    RealSymMatrix::new(RMat::from_fn(3, 3, |i, j| m[(i, j)]))
}

/// Trace and diagonal of the optimal covariance for diagonal cost `g`,
/// using the closed-form 3×3 square root.
#[inline]
pub fn optimal_diag_fast(hinv: &Matrix3<f64>, g: &[f64; 3]) -> [f64; 3] {
    let sg = [g[0].sqrt(), g[1].sqrt(), g[2].sqrt()];
    let m = Matrix3::from_fn(|i, j| sg[i] * sg[j] * hinv[(i, j)]);
    let (tr, diag) = sqrt3_trace_diag(&m);
    [tr * diag[0] / g[0], tr * diag[1] / g[1], tr * diag[2] / g[2]]
}

/// Grids of the state-independent sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct StateIndepConfig {
    pub z0_list: Vec<f64>,
    /// Euler angles run over `0, step, 2·step, …, 360` degrees on all three axes.
    pub euler_step_deg: f64,
    pub n_costs: usize,
    pub seed: u64,
}

impl StateIndepConfig {
    pub const DEFAULT_Z0: [f64; 6] = [0.5, 0.9, 0.99, 0.999, 1.0 - 1e-4, 1.0 - 1e-6];

    pub fn angles(&self) -> Result<Vec<f64>> {
        let step = self.euler_step_deg;
        if !(step > 0.0 && step <= 360.0) {
            return Err(Error::BadGrid(format!("Euler step {step} outside (0, 360]")));
        }
        let n = (360.0 / step + 1e-9).floor() as usize;
        Ok((0..=n).map(|k| k as f64 * step).collect())
    }

    /// Random diagonal costs, uniform on the simplex.
    pub fn costs(&self) -> Vec<[f64; 3]> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..self.n_costs)
            .map(|_| loop {
                let e: [f64; 3] = [Exp1.sample(&mut rng), Exp1.sample(&mut rng), Exp1.sample(&mut rng)];
                let s = e[0] + e[1] + e[2];
                let g = [e[0] / s, e[1] / s, e[2] / s];
                if g.iter().all(|x| *x > 1e-6) {
                    break g;
                }
            })
            .collect()
    }

    fn validate(&self) -> Result<()> {
        if self.z0_list.is_empty() || self.n_costs == 0 {
            return Err(Error::EmptyGrid);
        }
        let guard = NumericPolicy::DEFAULT.purity_guard;
        for &z0 in &self.z0_list {
            if !(0.0..=1.0).contains(&z0) {
                return Err(Error::InvalidModel(format!("z0 = {z0} outside [0, 1]")));
            }
            if z0 > 1.0 - guard {
                return Err(Error::PurityGuard(z0));
            }
        }
        Ok(())
    }
}

impl Default for StateIndepConfig {
    fn default() -> Self {
        Self {
            z0_list: Self::DEFAULT_Z0.to_vec(),
            euler_step_deg: 3.0,
            n_costs: 50,
            seed: 0,
        }
    }
}

/// Running minima over a state-independent sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateIndepSummary {
    pub n_points: u64,
    pub min_pairwise_sum: f64,
    pub min_total_sum: f64,
    pub argmin_pairwise: Option<SurfacePoint>,
    pub argmin_total: Option<SurfacePoint>,
    /// Largest `|Tr(NV·G) − gm_bound(G)|` relative to `gm_bound(G)`.
    pub max_equality_defect: f64,
}

impl StateIndepSummary {
    fn empty() -> Self {
        Self {
            n_points: 0,
            min_pairwise_sum: f64::INFINITY,
            min_total_sum: f64::INFINITY,
            argmin_pairwise: None,
            argmin_total: None,
            max_equality_defect: 0.0,
        }
    }

    // Strict comparisons keep the earlier point on ties, so merging in grid
    // order is deterministic.
    fn merge(mut self, other: Self) -> Self {
        self.n_points += other.n_points;
        if other.min_pairwise_sum < self.min_pairwise_sum {
            self.min_pairwise_sum = other.min_pairwise_sum;
            self.argmin_pairwise = other.argmin_pairwise;
        }
        if other.min_total_sum < self.min_total_sum {
            self.min_total_sum = other.min_total_sum;
            self.argmin_total = other.argmin_total;
        }
        self.max_equality_defect = self.max_equality_defect.max(other.max_equality_defect);
        self
    }

    fn push(&mut self, p: &SurfacePoint) {
        self.n_points += 1;
        let nv = p.nv;
        let pair = (nv[0] + nv[1]).min(nv[0] + nv[2]).min(nv[1] + nv[2]);
        let total = nv[0] + nv[1] + nv[2];
        if pair < self.min_pairwise_sum {
            self.min_pairwise_sum = pair;
            self.argmin_pairwise = Some(*p);
        }
        if total < self.min_total_sum {
            self.min_total_sum = total;
            self.argmin_total = Some(*p);
        }
    }
}

/// Sweeps `config` and returns the summary plus every `emit_every`-th point
/// in grid order (`z0`, then α, β, γ, then cost). `emit_every = 0` emits
/// nothing.
///
/// The optimal covariance of every point goes through the closed-form 3×3
/// square root; `check_every`-th points (0 disables) are also re-evaluated
/// through the general Gill–Massar evaluator to track the equality
/// `Tr(NV·G) = gm_bound(G)`.
pub fn state_indep_sweep(
    config: &StateIndepConfig,
    emit_every: u64,
    check_every: u64,
) -> Result<(StateIndepSummary, Vec<SurfacePoint>)> {
    config.validate()?;
    let angles = config.angles()?;
    let costs = config.costs();
    let na = angles.len() as u64;
    let nc = costs.len() as u64;
    let per_alpha = na * na * nc;

    let tasks: Vec<(usize, usize)> = (0..config.z0_list.len())
        .flat_map(|zi| (0..angles.len()).map(move |ai| (zi, ai)))
        .collect();

    let parts = tasks
        .par_iter()
        .map(|&(zi, ai)| -> Result<(StateIndepSummary, Vec<SurfacePoint>)> {
            let z0 = config.z0_list[zi];
            let alpha = angles[ai];
            let mut summary = StateIndepSummary::empty();
            let mut emitted = Vec::new();
            let mut index = (zi as u64 * na + ai as u64) * per_alpha;
            for &beta in &angles {
                for &gamma in &angles {
                    let r = euler_rotation_deg(alpha, beta, gamma);
                    let hinv = qubit_hinv(z0, &r);
                    for g in &costs {
                        let p = SurfacePoint {
                            cost: *g,
                            nv: optimal_diag_fast(&hinv, g),
                            z0,
                            euler_deg: [alpha, beta, gamma],
                        };
                        summary.push(&p);
                        if check_every > 0 && index % check_every == 0 {
                            let gm = gm_bound_from_inverse(&to_sym(&hinv)?, &CostMatrix::from_diagonal(g)?, 2)?.value;
                            let cost = p.nv[0] * g[0] + p.nv[1] * g[1] + p.nv[2] * g[2];
                            summary.max_equality_defect =
                                summary.max_equality_defect.max((cost - gm).abs() / gm);
                        }
                        if emit_every > 0 && index % emit_every == 0 {
                            emitted.push(p);
                        }
                        index += 1;
                    }
                }
            }
            Ok((summary, emitted))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut summary = StateIndepSummary::empty();
    let mut points = Vec::new();
    for (s, e) in parts {
        summary = summary.merge(s);
        points.extend(e);
    }
    Ok((summary, points))
}

/// Every point of a (small) state-independent grid, in grid order.
pub fn state_indep_sample(config: &StateIndepConfig) -> Result<Vec<SurfacePoint>> {
    Ok(state_indep_sweep(config, 1, 0)?.1)
}

/// Two-parameter state-independent objective after the Rodrigues reduction,
/// for `c = cos φ` and the `z` component `u_z` of the rotation axis:
/// `½[f + |f|] + ¼(1 − c)²(1 − u_z²)²` with
/// `f = c² + c(1 − c)(1 − u_z²) + u_z²(1 − c²)`.
///
/// `f` is the determinant of the upper-left 2×2 block `B` of the rotation
/// and `2f + (1 − c)²(1 − u_z²)²` is `Tr BBᵀ`, so the objective equals
/// `¼(Tr BBᵀ + 2|det B|) = ¼(Tr √(BBᵀ))²`.
pub fn two_param_objective(c: f64, uz: f64) -> f64 {
    let q = 1.0 - uz * uz;
    let f = c * c + c * (1.0 - c) * q + uz * uz * (1.0 - c * c);
    0.5 * (f + f.abs()) + 0.25 * (1.0 - c).powi(2) * q * q
}

/// Rotation by `angle` about the unit `axis` (Rodrigues' formula).
pub fn rodrigues(axis: &[f64; 3], angle: f64) -> Matrix3<f64> {
    let u = Vector3::new(axis[0], axis[1], axis[2]);
    let k = Matrix3::new(0.0, -u[2], u[1], u[2], 0.0, -u[0], -u[1], u[0], 0.0);
    let (s, c) = angle.sin_cos();
    Matrix3::identity() * c + k * s + u * u.transpose() * (1.0 - c)
}

/// `¼(Tr √(P₂ R P₂ Rᵀ P₂))²` with `P₂ = diag(1, 1, 0)`, by direct evaluation.
pub fn two_param_cost_direct(r: &Matrix3<f64>) -> f64 {
    let p2 = Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, 0.0));
    let m = p2 * r * p2 * r.transpose() * p2;
    let (tr, _) = sqrt3_trace_diag(&((m + m.transpose()) * 0.5));
    0.25 * tr * tr
}

fn grid_min(
    c_range: (f64, f64),
    u_range: (f64, f64),
    n: usize,
) -> (f64, f64, f64) {
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for i in 0..=n {
        let c = c_range.0 + (c_range.1 - c_range.0) * i as f64 / n as f64;
        for j in 0..=n {
            let u = u_range.0 + (u_range.1 - u_range.0) * j as f64 / n as f64;
            let v = two_param_objective(c, u);
            if v < best.0 {
                best = (v, c, u);
            }
        }
    }
    best
}

/// Minimum of [`two_param_objective`] over `[−1, 1]²`: a `resolution ×
/// resolution` grid, then `refine_iters` rounds that shrink the step
/// tenfold around the incumbent.
pub fn min_two_param_state_indep(resolution: usize, refine_iters: usize) -> Result<f64> {
    if resolution < 100 {
        return Err(Error::BadGrid(format!("resolution {resolution} below 100")));
    }
    let n = resolution - 1;
    let mut step = 2.0 / n as f64;
    let (mut best, mut c, mut u) = grid_min((-1.0, 1.0), (-1.0, 1.0), n);
    for _ in 0..refine_iters {
        let lo = |x: f64| (x - step).max(-1.0);
        let hi = |x: f64| (x + step).min(1.0);
        let (v, c2, u2) = grid_min((lo(c), hi(c)), (lo(u), hi(u)), 20);
        if v < best {
            best = v;
            c = c2;
            u = u2;
        }
        step /= 10.0;
    }
    Ok(best)
}

/// Result of the unit-plane check for the identity cost at pure states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneCheck {
    /// Largest `|(Tr √(R H⁻¹(1) Rᵀ))² − 1|` with `H⁻¹(1) = ¼P₂` substituted
    /// symbolically; rotation invariance reduces it to the diagonal of `¼P₂`.
    pub analytic_max_dev: f64,
    /// Same quantity from the general evaluator at `z0 = 1 − 1e-8`.
    pub numeric_max_dev: f64,
    /// Smallest excess of the `z0 < 1` values over the pure-state value 1.
    pub min_mixed_excess: f64,
}

pub const PLANE_CHECK_Z0: f64 = 1.0 - 1e-8;

/// Checks `min Tr(NV_opt) = 1` for `G = 𝟙` over `rotations`.
pub fn three_param_plane_check(rotations: &[Matrix3<f64>]) -> Result<PlaneCheck> {
    if rotations.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let identity = CostMatrix::from_diagonal(&[1.0; 3])?;
    let pure_diag = [0.25f64, 0.25, 0.0];
    let mut out = PlaneCheck {
        analytic_max_dev: 0.0,
        numeric_max_dev: 0.0,
        min_mixed_excess: f64::INFINITY,
    };
    for r in rotations {
        // R ¼P₂ Rᵀ has the spectrum of ¼P₂.
        let tr: f64 = pure_diag.iter().map(|x| x.sqrt()).sum();
        out.analytic_max_dev = out.analytic_max_dev.max((tr * tr - 1.0).abs());

        let near = gm_bound_from_inverse(&to_sym(&qubit_hinv(PLANE_CHECK_Z0, r))?, &identity, 2)?.value;
        out.numeric_max_dev = out.numeric_max_dev.max((near - 1.0).abs());
        for z0 in [0.0, 0.5, 0.9, 0.99] {
            let v = gm_bound_from_inverse(&to_sym(&qubit_hinv(z0, r))?, &identity, 2)?.value;
            out.min_mixed_excess = out.min_mixed_excess.min(v - 1.0);
        }
    }
    Ok(out)
}

/// State-independent Holevo value for the identity cost, `¼(3 − z0² + 2z0)`.
pub fn holevo_identity_cost(z0: f64) -> f64 {
    0.25 * (3.0 - z0 * z0 + 2.0 * z0)
}

/// Minimum of [`holevo_identity_cost`] over `z0_grid` and where it is attained.
pub fn holevo_state_indep(z0_grid: &[f64]) -> Result<(f64, f64)> {
    let mut best: Option<(f64, f64)> = None;
    for &z0 in z0_grid {
        let v = holevo_identity_cost(z0);
        if best.is_none_or(|(b, _)| v < b) {
            best = Some((v, z0));
        }
    }
    best.ok_or(Error::EmptyGrid)
}

/// The three clouds compared in the rotated-frame qubit experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementClouds {
    /// Diagonals of the optimal covariance for random diagonal costs.
    pub optimal: Vec<SurfacePoint>,
    /// Inverse Fisher diagonals of rotated-Pauli mixtures; `cost` holds the weights.
    pub pauli: Vec<SurfacePoint>,
    /// Inverse Fisher diagonals of SLD-eigenbasis mixtures; `cost` holds the weights.
    pub sld: Vec<SurfacePoint>,
}

/// Inverse-Fisher diagonal of the rotated-Pauli mixture with weights
/// `(α, β, 1 − α − β)`: `¼((1 − z0²R₁₃²)/α, (1 − z0²R₂₃²)/β, (1 − z0²R₃₃²)/(1 − α − β))`.
pub fn pauli_mixture_nv(z0: f64, r: &Matrix3<f64>, w: &[f64; 3]) -> [f64; 3] {
    let f = |i: usize| 0.25 * (1.0 - z0 * z0 * r[(i, 2)] * r[(i, 2)]) / w[i];
    [f(0), f(1), f(2)]
}

fn mixture_nv(
    model: &crate::models::StatisticalModel,
    directions: &[[f64; 3]; 3],
    w: &[f64; 3],
) -> Result<[f64; 3]> {
    let parts = directions
        .iter()
        .map(projective_bloch)
        .collect::<Result<Vec<_>>>()?;
    let spec = MixtureSpec::new(w.to_vec(), parts)?;
    let f = fisher_info(model, &mix(&spec)?)?;
    let inv = f
        .inv_psd_with(model.policy())
        .map_err(|e| match e {
            Error::Singular(x) => Error::SingularFisher(x),
            other => other,
        })?;
    Ok([inv[(0, 0)], inv[(1, 1)], inv[(2, 2)]])
}


fn unit(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

/// Random interior simplex weights, each at least `floor`.
pub fn random_simplex(seed: u64, n: usize, floor: f64) -> Vec<[f64; 3]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let e: [f64; 3] = [Exp1.sample(&mut rng), Exp1.sample(&mut rng), Exp1.sample(&mut rng)];
        let s = e[0] + e[1] + e[2];
        let w = [e[0] / s, e[1] / s, e[2] / s];
        if w.iter().all(|x| *x >= floor) {
            out.push(w);
        }
    }
    out
}

/// Builds the optimal, rotated-Pauli and SLD-mixture clouds for the qubit
/// at Bloch length `z0` in the frame given by `euler_deg`.
///
/// Pauli and SLD mixtures go through the generic Fisher information of the
/// mixed POVM. The SLD directions are the Bloch vectors of the SLDs of the
/// rotated model.
pub fn rotated_pauli_comparison(
    z0: f64,
    euler_deg: [f64; 3],
    n_costs: usize,
    n_mixtures: usize,
    seed: u64,
) -> Result<MeasurementClouds> {
    let r = euler_rotation_deg(euler_deg[0], euler_deg[1], euler_deg[2]);
    let model = qubit_model(z0, &r)?;
    let bundle = qfi_bundle(&model)?;
    let hinv = bundle.h_inv()?;

    let tag = |cost: [f64; 3], nv: [f64; 3]| SurfacePoint {
        cost,
        nv,
        z0,
        euler_deg,
    };

    let optimal = random_simplex(seed, n_costs, 1e-6)
        .into_iter()
        .map(|g| {
            let nv = optimal_covariance_from_inverse(&hinv, &CostMatrix::from_diagonal(&g)?, 2)?;
            Ok(tag(g, [nv[(0, 0)], nv[(1, 1)], nv[(2, 2)]]))
        })
        .collect::<Result<Vec<_>>>()?;

    let rows = |i: usize| [r[(i, 0)], r[(i, 1)], r[(i, 2)]];
    let pauli_dirs = [rows(0), rows(1), rows(2)];
    let sld_dirs = {
        let mut d = [[0.0; 3]; 3];
        for (i, di) in d.iter_mut().enumerate() {
            let (_, a) = bloch_coefficients(solve_sld(&model, i)?.matrix());
            *di = unit(a);
        }
        d
    };

    let weights = random_simplex(seed.wrapping_add(1), n_mixtures, 1e-3);
    let pauli = weights
        .iter()
        .map(|w| Ok(tag(*w, mixture_nv(&model, &pauli_dirs, w)?)))
        .collect::<Result<Vec<_>>>()?;
    let sld = weights
        .iter()
        .map(|w| Ok(tag(*w, mixture_nv(&model, &sld_dirs, w)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(MeasurementClouds {
        optimal,
        pauli,
        sld,
    })
}

#[cfg(test)]
mod tests;
