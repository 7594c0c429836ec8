use std::fs;
use std::path::Path;

use qest::bounds::{
    gm_bound_from_inverse, optimal_covariance_from_inverse, rld_bound_from_inverse, rld_holevo_bound,
    sld_bound_from_inverse, CostMatrix,
};
use qest::matcore::{CMat, RMat, RealSymMatrix, Spectral};
use qest::models::{euler_rotation_deg, qfi_bundle, qubit_model};
use qest::nalgebra::Matrix3;
use qest::spec::{matrix_to_repr, ModelSpec, SimConfigSpec};
use qest::tradeoff::{
    envelope_from_lines, gm_curve_parametric, holevo_state_indep, min_two_param_state_indep,
    open_unit_grid, rotated_pauli_comparison, state_indep_sweep, three_param_plane_check, CurvePoint,
    SimplexGrid, StateIndepConfig, SurfacePoint, TabulatedBound,
};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::output::{to_json, Csv, Sink};
use crate::{CompareArgs, CliError, CurveArgs, CurveBound, QfiArgs, SimulateArgs, StateIndepArgs, SurfaceArgs, SurfaceBound};

/// Resolved parameters for the manifest, plus a failed self-check if any.
pub struct Params {
    pub value: Value,
    pub check: Option<String>,
}

impl Params {
    fn ok(value: Value) -> Self {
        Self { value, check: None }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn params<T: serde::Serialize>(args: &T) -> Value {
    serde_json::to_value(args).expect("arguments serialize")
}

fn real_rows(m: &RMat) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

fn complex_rows(m: &CMat) -> Value {
    serde_json::to_value(matrix_to_repr(m)).expect("matrix serializes")
}

pub fn qfi(args: &QfiArgs, sink: &mut Sink) -> Result<Params, CliError> {
    let spec = ModelSpec::from_json(&read(&args.model)?)?;
    let model = spec.build()?;
    let b = qfi_bundle(&model)?;
    let report = json!({
        "model": spec,
        "labels": model.labels(),
        "hilbert_dim": b.hilbert_dim,
        "h": real_rows(b.h.matrix()),
        "d": real_rows(&b.d),
        "r": complex_rows(b.r.matrix()),
        "rinv": complex_rows(b.rinv.matrix()),
        "slds": b.slds.iter().map(|l| complex_rows(l.matrix())).collect::<Vec<_>>(),
        "d_invariant": b.d_invariance.invariant,
        "d_invariance_residual": b.d_invariance.residual,
    });
    sink.emit(&to_json(&report))?;
    Ok(Params::ok(json!({ "model": args.model, "spec": spec })))
}

fn check_curve_args(a: &CurveArgs) -> Result<RealSymMatrix, CliError> {
    if a.points < 2 {
        return Err(CliError::Usage("--points must be at least 2".into()));
    }
    if a.emit_lines && a.lines == 0 {
        return Err(CliError::Usage("--lines must be positive".into()));
    }
    if a.bound == CurveBound::Gm && (a.d.is_empty() || a.d.iter().any(|&d| d < 2)) {
        return Err(CliError::Usage("--d needs dimensions of at least 2".into()));
    }
    if !(a.u1 > 0.0 && a.u2 > 0.0 && a.u1 * a.u2 > a.b * a.b) {
        return Err(CliError::Usage(format!(
            "inverse QFI [[{}, {}], [{}, {}]] is not positive definite",
            a.u1, a.b, a.b, a.u2
        )));
    }
    Ok(RealSymMatrix::new(RMat::from_row_slice(2, 2, &[a.u1, a.b, a.b, a.u2]))?)
}

pub fn curve(a: &CurveArgs, sink: &mut Sink) -> Result<Params, CliError> {
    let hinv = check_curve_args(a)?;
    let det = a.u1 * a.u2 - a.b * a.b;
    let t_grid = open_unit_grid(a.points, 0.5);
    let line_t = open_unit_grid(a.points, 0.37);
    let x_hi = a.u1 + 2.0 * (a.u1 + a.u2);
    let mut csv = Csv::new(&["curve", "t", "nv1", "nv2"]);
    let push = |csv: &mut Csv, label: &str, pts: &[CurvePoint]| {
        for p in pts {
            csv.row(Some(label), &[p.t, p.nv1, p.nv2]);
        }
    };
    let lines = |csv: &mut Csv, label: &str, f: &dyn Fn(&CostMatrix) -> qest::Result<f64>| -> Result<(), CliError> {
        if !a.emit_lines {
            return Ok(());
        }
        let label = format!("{label}_line");
        for t in open_unit_grid(a.lines, 0.5) {
            let b = f(&CostMatrix::from_diagonal(&[t, 1.0 - t])?)?;
            for x in [0.0, x_hi] {
                csv.row(Some(&label), &[t, x, (b - t * x) / (1.0 - t)]);
            }
        }
        Ok(())
    };
    // Envelope abscissae for bounds without a parametric form.
    let xs: Vec<f64> = (1..=a.points)
        .map(|k| a.u1 + (x_hi - a.u1) * k as f64 / a.points as f64)
        .collect();

    match a.bound {
        CurveBound::Gm => {
            for &d in &a.d {
                let label = format!("gm_d{d}");
                let f = |g: &CostMatrix| Ok(gm_bound_from_inverse(&hinv, g, d)?.value);
                let param = gm_curve_parametric(a.u1, a.u2, det, d, &t_grid)?;
                push(&mut csv, &label, &param);
                if a.envelope {
                    let px: Vec<f64> = param.iter().map(|p| p.nv1).collect();
                    let env = envelope_from_lines(f, &line_t, &px)?;
                    push(&mut csv, &format!("{label}_envelope"), &env);
                }
                lines(&mut csv, &label, &f)?;
            }
        }
        CurveBound::Sld => {
            let f = |g: &CostMatrix| Ok(sld_bound_from_inverse(&hinv, g)?.value);
            push(&mut csv, "sld", &envelope_from_lines(f, &line_t, &xs)?);
            lines(&mut csv, "sld", &f)?;
        }
        CurveBound::Rld => {
            let h = hinv.inv_psd()?;
            let skew = RMat::from_row_slice(2, 2, &[0.0, a.skew, -a.skew, 0.0]);
            let dmat = h.matrix() * skew * h.matrix();
            let f = |g: &CostMatrix| Ok(rld_bound_from_inverse(&hinv, &dmat, g)?.value);
            push(&mut csv, "rld", &envelope_from_lines(f, &line_t, &xs)?);
            lines(&mut csv, "rld", &f)?;
        }
    }
    sink.emit(&csv.into_string())?;
    Ok(Params::ok(params(a)))
}

fn euler3(v: &[f64]) -> Result<[f64; 3], CliError> {
    match v {
        [a, b, c] => Ok([*a, *b, *c]),
        _ => Err(CliError::Usage(format!("expected three Euler angles, got {}", v.len()))),
    }
}

pub fn surface(a: &SurfaceArgs, sink: &mut Sink) -> Result<Params, CliError> {
    let [al, be, ga] = euler3(&a.euler)?;
    if a.grid < 3 {
        return Err(CliError::Usage("--grid must be at least 3".into()));
    }
    let model = qubit_model(a.z0, &euler_rotation_deg(al, be, ga))?;
    let bundle = qfi_bundle(&model)?;
    let hinv = bundle.h_inv()?;
    let grid = SimplexGrid::uniform(a.grid, 1e-6)?;
    let gm: Vec<([f64; 3], [f64; 3])> = grid
        .points()
        .iter()
        .map(|p| {
            let v = optimal_covariance_from_inverse(&hinv, &CostMatrix::from_diagonal(p)?, 2)?;
            Ok((*p, [v[(0, 0)], v[(1, 1)], v[(2, 2)]]))
        })
        .collect::<qest::Result<_>>()?;

    let mut csv = Csv::new(&["s", "t", "nv1", "nv2", "nv3"]);
    match a.bound {
        SurfaceBound::Gm => {
            for (p, nv) in &gm {
                csv.row(None, &[p[0], p[1], nv[0], nv[1], nv[2]]);
            }
        }
        SurfaceBound::Rld => {
            // Evaluated above the Gill–Massar (NV_1, NV_2) points so the two
            // files can be compared row by row.
            let table = TabulatedBound::new(
                |g| Ok(rld_holevo_bound(&bundle, g)?.value),
                SimplexGrid::uniform(a.grid, 0.0)?,
            )?;
            let rows = gm
                .par_iter()
                .map(|(_, nv)| Ok((table.min_nv3(nv[0], nv[1])?, *nv)))
                .collect::<qest::Result<Vec<_>>>()?;
            for (m, nv) in rows {
                csv.row(None, &[m.s, m.t, nv[0], nv[1], m.nv3]);
            }
        }
    }
    sink.emit(&csv.into_string())?;
    Ok(Params::ok(params(a)))
}

fn point_json(p: &Option<SurfacePoint>) -> Value {
    match p {
        Some(p) => json!({ "z0": p.z0, "euler_deg": p.euler_deg, "cost": p.cost, "nv": p.nv }),
        None => Value::Null,
    }
}

pub fn state_indep(a: &StateIndepArgs, seed: Option<u64>, sink: &mut Sink) -> Result<Params, CliError> {
    let config = StateIndepConfig {
        z0_list: a.z0.clone(),
        euler_step_deg: a.euler_step,
        n_costs: a.costs,
        seed: seed.unwrap_or(0),
    };
    let (summary, points) = state_indep_sweep(&config, a.emit_every, a.check_every)?;
    let two_param = min_two_param_state_indep(a.two_param_resolution, a.refine)?;

    let mut rotations: Vec<Matrix3<f64>> = Vec::new();
    for x in 0..12 {
        for y in 0..12 {
            for z in 0..12 {
                rotations.push(euler_rotation_deg(30.0 * x as f64, 30.0 * y as f64, 30.0 * z as f64));
            }
        }
    }
    let plane = three_param_plane_check(&rotations)?;
    let z_grid: Vec<f64> = (0..=1000).map(|k| k as f64 / 1000.0).collect();
    let (holevo_min, holevo_argmin) = holevo_state_indep(&z_grid)?;

    let mut csv = Csv::new(&[
        "z0", "alpha_deg", "beta_deg", "gamma_deg", "g1", "g2", "g3", "nvx", "nvy", "nvz",
    ]);
    for p in &points {
        let [al, be, ga] = p.euler_deg;
        csv.row(
            None,
            &[p.z0, al, be, ga, p.cost[0], p.cost[1], p.cost[2], p.nv[0], p.nv[1], p.nv[2]],
        );
    }
    sink.emit(&csv.into_string())?;

    const FLOOR_TOL: f64 = 1e-9;
    let mut violations = Vec::new();
    if summary.min_pairwise_sum < 0.25 - FLOOR_TOL {
        violations.push(format!("pairwise sum {} < 1/4", summary.min_pairwise_sum));
    }
    if summary.min_total_sum < 1.0 - FLOOR_TOL {
        violations.push(format!("total sum {} < 1", summary.min_total_sum));
    }
    if two_param < 0.25 - FLOOR_TOL {
        violations.push(format!("two-parameter minimum {two_param} < 1/4"));
    }
    let report = json!({
        "n_points": summary.n_points,
        "n_emitted": points.len(),
        "min_pairwise_sum": summary.min_pairwise_sum,
        "min_total_sum": summary.min_total_sum,
        "argmin_pairwise": point_json(&summary.argmin_pairwise),
        "argmin_total": point_json(&summary.argmin_total),
        "max_equality_defect": summary.max_equality_defect,
        "two_param_min": two_param,
        "plane_check": {
            "analytic_max_dev": plane.analytic_max_dev,
            "numeric_max_dev": plane.numeric_max_dev,
            "min_mixed_excess": plane.min_mixed_excess,
        },
        "holevo_identity_min": holevo_min,
        "holevo_identity_argmin_z0": holevo_argmin,
        "floors_hold": violations.is_empty(),
    });
    sink.emit_sidecar("summary.json", &to_json(&report))?;
    let mut value = params(a);
    value["seed"] = json!(config.seed);
    Ok(Params {
        value,
        check: (!violations.is_empty()).then(|| violations.join("; ")),
    })
}

pub fn compare(a: &CompareArgs, seed: Option<u64>, sink: &mut Sink) -> Result<Params, CliError> {
    let euler = euler3(&a.euler)?;
    let seed = seed.unwrap_or(0);
    let clouds = rotated_pauli_comparison(a.z0, euler, a.samples, a.mixtures, seed)?;
    let mut csv = Csv::new(&["label", "w1", "w2", "w3", "nv1", "nv2", "nv3"]);
    for (label, cloud) in [("optimal", &clouds.optimal), ("pauli", &clouds.pauli), ("sld", &clouds.sld)] {
        for p in cloud {
            csv.row(Some(label), &[p.cost[0], p.cost[1], p.cost[2], p.nv[0], p.nv[1], p.nv[2]]);
        }
    }
    sink.emit(&csv.into_string())?;
    let mut value = params(a);
    value["seed"] = json!(seed);
    Ok(Params::ok(value))
}

pub fn simulate(a: &SimulateArgs, seed: Option<u64>, sink: &mut Sink) -> Result<Params, CliError> {
    let mut spec = match &a.config {
        Some(p) => SimConfigSpec::from_json(&read(p)?)?,
        None => SimConfigSpec::default(),
    };
    if let Some(s) = seed {
        spec.seed = s;
    }
    let (config, cost) = spec.build()?;
    let report = qest::mc::compare_with_gm_bound(&config, &cost)?;
    sink.emit(&to_json(&report))?;
    Ok(Params::ok(json!({ "config": a.config, "resolved": spec })))
}
