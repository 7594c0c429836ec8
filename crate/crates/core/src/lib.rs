//! Bounds on simultaneous precision in quantum multiparameter estimation.
//!
//! The crate computes the quantum Fisher information of finite-dimensional
//! statistical models, evaluates the expected-cost bounds that follow from
//! it (symmetric logarithmic derivative, Gill–Massar for separable
//! measurements, and the right-logarithmic-derivative bound which equals the
//! Holevo bound for D-invariant models), turns those bounds into trade-off
//! curves and surfaces between the rescaled variances, and checks
//! attainability by simulating measurements.
//!
//! Modules, bottom up:
//!
//! * [`matcore`]: Hermitian/symmetric matrix functions.
//! * [`models`]: states, derivatives, SLD/RLD solvers and the QFI bundle.
//! * [`measurements`]: POVMs, mixtures, classical Fisher information.
//! * [`bounds`]: scalar bound evaluators and the optimal covariance.
//! * [`tradeoff`]: curves, surfaces and the state-independent relations.
//! * [`mc`]: Monte-Carlo estimation with a locally unbiased estimator.
//! * [`spec`]: JSON documents for models, POVMs and simulation configs.
//!
//! ```
//! use qest::models::{qubit_model, qfi_bundle};
//! use qest::bounds::{gm_bound, CostMatrix};
//!
//! let model = qubit_model(0.0, &nalgebra::Matrix3::identity()).unwrap();
//! let bundle = qfi_bundle(&model).unwrap();
//! let g = CostMatrix::from_diagonal(&[1.0 / 3.0; 3]).unwrap();
//! let bound = gm_bound(&bundle, &g, 2).unwrap();
//! assert!((bound.value - 0.75).abs() < 1e-12);
//! ```

pub mod bounds;
pub mod error;
pub mod matcore;
pub mod mc;
pub mod measurements;
pub mod models;
pub mod policy;
pub mod spec;
pub mod tradeoff;

pub use error::{Error, Result};
pub use policy::NumericPolicy;

pub use nalgebra;
pub use num_complex::Complex64;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/fisher-information.md")]
    mod fisher_information {}
    #[doc = include_str!("../../../book/src/bounds.md")]
    mod bounds {}
    #[doc = include_str!("../../../book/src/tradeoff-curves.md")]
    mod tradeoff_curves {}
    #[doc = include_str!("../../../book/src/state-independent.md")]
    mod state_independent {}
    #[doc = include_str!("../../../book/src/measurements.md")]
    mod measurements {}
    #[doc = include_str!("../../../book/src/qutrit.md")]
    mod qutrit {}
}
