//! JSON documents for models, POVMs and simulation configs.
//!
//! Complex numbers are written as `[re, im]` pairs; a bare number is read as
//! a real value. Matrices are arrays of rows.
//!
//! ```
//! use qest::spec::ModelSpec;
//!
//! let spec = ModelSpec::from_json(r#"{"type":"qubit","z0":0.7,"euler_deg":[25,25,55]}"#).unwrap();
//! let model = spec.build().unwrap();
//! assert_eq!(model.num_params(), 3);
//! ```

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bounds::{optimal_covariance_from_inverse, CostMatrix};
use crate::error::{Error, Result};
use crate::matcore::{CMat, HermMatrix, Spectral};
use crate::mc::{Measurement, SimConfig};
use crate::measurements::{construct_gm_measurement, projective_bloch, MixtureSpec, Povm};
use crate::models::{euler_rotation_deg, qfi_bundle, qubit_model, qutrit_model, StatisticalModel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexRepr {
    Pair([f64; 2]),
    Real(f64),
}

impl ComplexRepr {
    fn value(self) -> Complex64 {
        match self {
            ComplexRepr::Pair([re, im]) => Complex64::new(re, im),
            ComplexRepr::Real(re) => Complex64::new(re, 0.0),
        }
    }
}

pub type MatrixRepr = Vec<Vec<ComplexRepr>>;

pub fn matrix_from_repr(rows: &MatrixRepr) -> Result<CMat> {
    let n = rows.len();
    if n == 0 {
        return Err(Error::Parse("empty matrix".into()));
    }
    if let Some(r) = rows.iter().find(|r| r.len() != n) {
        return Err(Error::NotSquare { rows: n, cols: r.len() });
    }
    Ok(CMat::from_fn(n, n, |i, j| rows[i][j].value()))
}

pub fn matrix_to_repr(m: &CMat) -> MatrixRepr {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| ComplexRepr::Pair([m[(i, j)].re, m[(i, j)].im]))
                .collect()
        })
        .collect()
}

fn herm(rows: &MatrixRepr) -> Result<HermMatrix> {
    HermMatrix::new(matrix_from_repr(rows)?)
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    Qubit {
        z0: f64,
        #[serde(default)]
        euler_deg: [f64; 3],
    },
    Qutrit {
        k: [f64; 2],
    },
    Generic {
        rho0: MatrixRepr,
        derivs: Vec<MatrixRepr>,
        #[serde(default)]
        labels: Option<Vec<String>>,
    },
}

impl ModelSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        parse(text)
    }

    pub fn build(&self) -> Result<StatisticalModel> {
        match self {
            ModelSpec::Qubit { z0, euler_deg } => {
                let [a, b, g] = *euler_deg;
                qubit_model(*z0, &euler_rotation_deg(a, b, g))
            }
            ModelSpec::Qutrit { k } => qutrit_model(k[0], k[1]),
            ModelSpec::Generic { rho0, derivs, labels } => {
                let rho0 = herm(rho0)?;
                let derivs = derivs.iter().map(herm).collect::<Result<Vec<_>>>()?;
                let labels = labels
                    .clone()
                    .unwrap_or_else(|| (1..=derivs.len()).map(|i| format!("theta{i}")).collect());
                StatisticalModel::new(rho0, derivs, labels)
            }
        }
    }
}

/// A POVM as a JSON list of complex matrices.
pub fn povm_to_json(povm: &Povm) -> serde_json::Value {
    let elems: Vec<MatrixRepr> = povm.elements().iter().map(|e| matrix_to_repr(e.matrix())).collect();
    serde_json::to_value(elems).expect("matrices serialize")
}

pub fn povm_from_json(text: &str) -> Result<Povm> {
    let elems: Vec<MatrixRepr> = parse(text)?;
    povm_from_repr(&elems)
}

fn povm_from_repr(elems: &[MatrixRepr]) -> Result<Povm> {
    Povm::new(elems.iter().map(herm).collect::<Result<Vec<_>>>()?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasurementSpec {
    Povm {
        elements: Vec<MatrixRepr>,
    },
    Mixture {
        weights: Vec<f64>,
        parts: Vec<Vec<MatrixRepr>>,
    },
    /// Mixture of projective qubit measurements along unit Bloch vectors.
    ProjectiveMixture {
        weights: Vec<f64>,
        directions: Vec<[f64; 3]>,
    },
    /// Gill–Massar-optimal mixture for the diagonal cost `cost`
    /// (three-parameter qubit models only).
    GmOptimal {
        cost: Vec<f64>,
    },
}

impl MeasurementSpec {
    pub fn build(&self, model: &StatisticalModel) -> Result<Measurement> {
        match self {
            MeasurementSpec::Povm { elements } => Ok(Measurement::Povm(povm_from_repr(elements)?)),
            MeasurementSpec::Mixture { weights, parts } => {
                let parts = parts
                    .iter()
                    .map(|p| povm_from_repr(p))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Measurement::Mixture(MixtureSpec::new(weights.clone(), parts)?))
            }
            MeasurementSpec::ProjectiveMixture { weights, directions } => {
                let parts = directions
                    .iter()
                    .map(projective_bloch)
                    .collect::<Result<Vec<_>>>()?;
                Ok(Measurement::Mixture(MixtureSpec::new(weights.clone(), parts)?))
            }
            MeasurementSpec::GmOptimal { cost } => {
                let g = CostMatrix::from_diagonal(cost)?;
                let hinv = qfi_bundle(model)?.h_inv()?;
                let v = optimal_covariance_from_inverse(&hinv, &g, 2)?;
                let spec = construct_gm_measurement(model, &v.inv_psd()?)?;
                Ok(Measurement::Mixture(spec))
            }
        }
    }
}

/// Simulation document, e.g.
/// `{"model":{"type":"qubit","z0":0.7},"measurement":{"type":"gm_optimal","cost":[1,1,1]},
///   "cost":[0.333,0.333,0.333],"n_copies":100000,"n_trials":500,"seed":0}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfigSpec {
    pub model: ModelSpec,
    pub measurement: MeasurementSpec,
    /// Diagonal of the cost matrix used for the report; uniform `1/K` when absent.
    #[serde(default)]
    pub cost: Option<Vec<f64>>,
    pub n_copies: u64,
    pub n_trials: usize,
    #[serde(default)]
    pub seed: u64,
}

impl Default for SimConfigSpec {
    fn default() -> Self {
        let third = 1.0 / 3.0;
        Self {
            model: ModelSpec::Qubit {
                z0: 0.7,
                euler_deg: [0.0; 3],
            },
            measurement: MeasurementSpec::GmOptimal {
                cost: vec![third; 3],
            },
            cost: Some(vec![third; 3]),
            n_copies: 100_000,
            n_trials: 500,
            seed: 0,
        }
    }
}

impl SimConfigSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        parse(text)
    }

    pub fn build(&self) -> Result<(SimConfig, CostMatrix)> {
        let model = self.model.build()?;
        let k = model.num_params();
        let cost = match &self.cost {
            Some(c) if c.len() != k => {
                return Err(Error::DimensionMismatch { expected: k, got: c.len() })
            }
            Some(c) => CostMatrix::from_diagonal(c)?,
            None => CostMatrix::from_diagonal(&vec![1.0 / k as f64; k])?,
        };
        let measurement = self.measurement.build(&model)?;
        let config = SimConfig::new(model, measurement, self.n_copies, self.n_trials, self.seed)?;
        Ok((config, cost))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::max_abs;
    use crate::measurements::fisher_info;
    use crate::models::qfi_bundle;
    use nalgebra::Matrix3;

    fn aligned_qubit(z0: f64) -> Result<StatisticalModel> {
        qubit_model(z0, &Matrix3::identity())
    }

    #[test]
    fn qubit_spec_builds_rotated_model() {
        let spec = ModelSpec::from_json(r#"{"type":"qubit","z0":0.7,"euler_deg":[25,25,55]}"#).unwrap();
        let model = spec.build().unwrap();
        let direct = qubit_model(0.7, &euler_rotation_deg(25.0, 25.0, 55.0)).unwrap();
        for (a, b) in model.derivs().iter().zip(direct.derivs()) {
            assert_eq!(a.matrix(), b.matrix());
        }
        let aligned = ModelSpec::from_json(r#"{"type":"qubit","z0":0.7}"#).unwrap().build().unwrap();
        let h = qfi_bundle(&aligned).unwrap().h;
        assert!((h[(2, 2)] - 4.0 / 0.51).abs() < 1e-9);
    }

    #[test]
    fn qutrit_spec_builds() {
        let model = ModelSpec::from_json(r#"{"type":"qutrit","k":[0.5,0.3]}"#)
            .unwrap()
            .build()
            .unwrap();
        assert_eq!(model.num_params(), 8);
        assert_eq!(model.dim(), 3);
    }

    #[test]
    fn generic_spec_matches_qubit() {
        let text = r#"{"type":"generic",
            "rho0":[[[0.85,0],[0,0]],[[0,0],[0.15,0]]],
            "derivs":[[[0,1],[1,0]], [[0,[0,-1]],[[0,1],0]], [[1,0],[0,-1]]]}"#;
        let model = ModelSpec::from_json(text).unwrap().build().unwrap();
        let direct = aligned_qubit(0.7).unwrap();
        assert!(max_abs(&(model.rho0().matrix() - direct.rho0().matrix())) < 1e-15);
        for (a, b) in model.derivs().iter().zip(direct.derivs()) {
            assert!(max_abs(&(a.matrix() - b.matrix())) < 1e-15);
        }
        assert_eq!(model.labels()[2], "theta3");
    }

    #[test]
    fn malformed_documents_are_parse_errors() {
        for text in [
            "{",
            r#"{"type":"qubit"}"#,
            r#"{"type":"ququart","z0":0.1}"#,
            r#"{"type":"qubit","z0":0.5,"extra":1}"#,
            r#"{"type":"generic","rho0":[[1]],"derivs":[[["x"]]]}"#,
        ] {
            let err = ModelSpec::from_json(text).unwrap_err();
            assert!(matches!(err, Error::Parse(_)), "{text}: {err:?}");
            assert!(err.is_input_error());
        }
    }

    #[test]
    fn invalid_models_are_reported_after_parsing() {
        let err = ModelSpec::from_json(r#"{"type":"qubit","z0":1.5}"#)
            .unwrap()
            .build()
            .unwrap_err();
        assert!(matches!(err, Error::InvalidModel(_)));
        let err = ModelSpec::from_json(r#"{"type":"generic","rho0":[[1,0]],"derivs":[]}"#)
            .unwrap()
            .build()
            .unwrap_err();
        assert!(matches!(err, Error::NotSquare { .. }));
    }

    #[test]
    fn povm_round_trip() {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(4);
        let povm = crate::measurements::random_rank_one_povm(&mut rng, 3, 5).unwrap();
        let text = serde_json::to_string(&povm_to_json(&povm)).unwrap();
        let back = povm_from_json(&text).unwrap();
        assert_eq!(back, povm);
        assert!(povm_from_json("[[[1]],[[1]]]").is_err());
    }

    #[test]
    fn sim_config_round_trip_and_defaults() {
        let spec = SimConfigSpec::default();
        let text = serde_json::to_string(&spec).unwrap();
        assert_eq!(SimConfigSpec::from_json(&text).unwrap(), spec);
        let (config, cost) = spec.build().unwrap();
        assert_eq!(config.n_copies, 100_000);
        assert_eq!(cost.dim(), 3);
        let text = r#"{"model":{"type":"qubit","z0":0.7},
            "measurement":{"type":"gm_optimal","cost":[0.5,0.3,0.2]},
            "n_copies":10,"n_trials":50}"#;
        let err = SimConfigSpec::from_json(text).unwrap().build().unwrap_err();
        assert!(matches!(err, Error::InvalidConfig(_)));
    }

    #[test]
    fn measurement_specs_build() {
        let model = aligned_qubit(0.7).unwrap();
        let m = MeasurementSpec::ProjectiveMixture {
            weights: vec![0.5, 0.5],
            directions: vec![[1.0, 0.0, 0.0], [0.0, 0.0, 1.0]],
        }
        .build(&model)
        .unwrap();
        assert_eq!(m.flattened().unwrap().len(), 4);

        let m = MeasurementSpec::GmOptimal { cost: vec![0.5, 0.3, 0.2] }
            .build(&model)
            .unwrap();
        let f = fisher_info(&model, &m.flattened().unwrap()).unwrap();
        let hinv = qfi_bundle(&model).unwrap().h_inv().unwrap();
        assert!(((f.matrix() * hinv.matrix()).trace() - 1.0).abs() < 1e-9);

        let p = projective_bloch(&[0.0, 1.0, 0.0]).unwrap();
        let elements: Vec<MatrixRepr> = p.elements().iter().map(|e| matrix_to_repr(e.matrix())).collect();
        let m = MeasurementSpec::Mixture {
            weights: vec![1.0],
            parts: vec![elements],
        }
        .build(&model)
        .unwrap();
        assert_eq!(m.flattened().unwrap(), p);
    }
}
