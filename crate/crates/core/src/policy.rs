//! Numerical tolerances shared by every module.

/// Absolute tolerances used by validation and by the spectral routines.
///
/// All thresholds are absolute. [`NumericPolicy::DEFAULT`] is what every
/// free function in the crate uses; the `*_with` variants accept a custom
/// record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericPolicy {
    /// Asymmetry above which a matrix is rejected as non-Hermitian.
    pub hermitian_tol: f64,
    /// Negative eigenvalues down to `-clamp_tol` are silently set to zero.
    pub clamp_tol: f64,
    /// Eigenvalues below `-psd_tol` make a matrix "not PSD".
    pub psd_tol: f64,
    /// Smallest eigenvalue accepted by the inverse routines.
    pub singular_tol: f64,
    /// Smallest eigenvalue of a density matrix for it to count as full rank.
    pub rank_tol: f64,
    /// Qubit Bloch-vector lengths must satisfy `z0 <= 1 - purity_guard`.
    pub purity_guard: f64,
    /// Outcome probabilities below this are treated as zero.
    pub prob_floor: f64,
    /// Residual below which a model counts as D-invariant.
    pub d_invariance_tol: f64,
    /// Trace tolerance for density matrices and tracelessness of derivatives.
    pub trace_tol: f64,
    /// Identity-sum tolerance for POVMs.
    pub normalization_tol: f64,
}

impl NumericPolicy {
    pub const DEFAULT: NumericPolicy = NumericPolicy {
        hermitian_tol: 1e-9,
        clamp_tol: 1e-10,
        psd_tol: 1e-8,
        singular_tol: 1e-12,
        rank_tol: 1e-9,
        purity_guard: 1e-6,
        prob_floor: 1e-12,
        d_invariance_tol: 1e-8,
        trace_tol: 1e-10,
        normalization_tol: 1e-9,
    };
}

impl Default for NumericPolicy {
    fn default() -> Self {
        Self::DEFAULT
    }
}
