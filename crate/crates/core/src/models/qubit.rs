use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;

use super::StatisticalModel;
use crate::error::{Error, Result};
use crate::matcore::{CMat, HermMatrix};
use crate::policy::NumericPolicy;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `[σ_x, σ_y, σ_z]`.
pub fn pauli() -> [CMat; 3] {
    let z = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    [
        CMat::from_row_slice(2, 2, &[z, one, one, z]),
        CMat::from_row_slice(2, 2, &[z, -i, i, z]),
        CMat::from_row_slice(2, 2, &[one, z, z, -one]),
    ]
}

/// Coefficients `(a0, a)` with `x = a0·𝟙 + a·σ` for a 2×2 Hermitian `x`.
pub fn bloch_coefficients(x: &CMat) -> (f64, [f64; 3]) {
    let p = pauli();
    let a0 = x.trace().re / 2.0;
    let a = [0, 1, 2].map(|k| (&p[k] * x).trace().re / 2.0);
    (a0, a)
}

/// `R = R_x(α) R_y(β) R_z(γ)` with angles in degrees.
pub fn euler_rotation_deg(alpha: f64, beta: f64, gamma: f64) -> Matrix3<f64> {
    let rx = nalgebra::Rotation3::from_axis_angle(&Vector3::x_axis(), alpha.to_radians());
    let ry = nalgebra::Rotation3::from_axis_angle(&Vector3::y_axis(), beta.to_radians());
    let rz = nalgebra::Rotation3::from_axis_angle(&Vector3::z_axis(), gamma.to_radians());
    (rx * ry * rz).into_inner()
}

/// Qubit model `ρ(θ̃) = ρ0 + θ̃·Rσ` with `ρ0 = (𝟙 + z0 σ_z)/2`.
///
/// `rotation` must be orthogonal; `R = 𝟙` gives the coordinates aligned with
/// the Bloch vector of `ρ0`.
pub fn qubit_model(z0: f64, rotation: &Matrix3<f64>) -> Result<StatisticalModel> {
    qubit_model_with(z0, rotation, NumericPolicy::DEFAULT)
}

pub fn qubit_model_with(
    z0: f64,
    rotation: &Matrix3<f64>,
    policy: NumericPolicy,
) -> Result<StatisticalModel> {
    if !(0.0..=1.0).contains(&z0) {
        return Err(Error::InvalidModel(format!("z0 = {z0} outside [0, 1]")));
    }
    if z0 > 1.0 - policy.purity_guard {
        return Err(Error::PurityGuard(z0));
    }
    let defect = (rotation.transpose() * rotation - Matrix3::identity()).abs().max();
    if defect > 1e-9 {
        return Err(Error::InvalidModel(format!(
            "rotation is not orthogonal (defect {defect:.3e})"
        )));
    }
    let p = pauli();
    let rho0 = (CMat::identity(2, 2) + &p[2] * c(z0, 0.0)) * c(0.5, 0.0);
    let derivs = (0..3)
        .map(|i| {
            let m = (0..3).fold(CMat::zeros(2, 2), |acc, j| {
                acc + &p[j] * c(rotation[(i, j)], 0.0)
            });
            HermMatrix::new(m)
        })
        .collect::<Result<Vec<_>>>()?;
    StatisticalModel::new_with(
        HermMatrix::new(rho0)?,
        derivs,
        vec!["x".into(), "y".into(), "z".into()],
        policy,
    )
}
