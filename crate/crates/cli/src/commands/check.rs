use std::path::Path;

use conelab::holonomy::{analyse_holonomy, Classification};
use conelab::metric_core::{constant_curvature_estimate, geodesic_integrate, DerivativeMode};
use conelab::nullplane::{eta_system_residuals, grid_points, integrability_residual, vz_residuals};
use conelab::split_fields::{parallel_field_report, potential_identities, verify_parallel, ParallelCase};
use conelab::warped::{completeness_verdict, Completeness};
use conelab::GeomError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::RunOptions;
use crate::dsl::parser::Call;
use crate::error::{invalid, usage, DslError};
use crate::manifest::{arg, arg_f64, arg_ident, load_manifest, reject_unknown_args, Manifest};
use crate::report::{resolve_seed, timed, CheckRecord, Report};

/// Check name, accepted arguments and default tolerance.
pub const CHECKS: &[(&str, &[&str], f64)] = &[
    ("flatness", &["samples", "tol"], 1e-6),
    ("curvature_symmetry", &["samples", "tol"], 1e-6),
    ("cross_mode", &["samples", "tol"], 1e-5),
    ("constant_curvature", &["samples", "expect", "tol"], 1e-6),
    ("cone_curvature", &["samples", "tol"], 1e-6),
    ("parallel", &["field", "samples", "tol"], 1e-8),
    ("parallel_field", &["field", "samples", "tol"], 1e-5),
    ("holonomy", &["probes", "expect"], 0.0),
    ("completeness", &["base_complete", "expect"], 0.0),
    ("nullplane_eta", &["per_axis", "tol"], 1e-6),
    ("nullplane_pair", &["v", "z", "samples", "tol"], 1e-5),
    ("geodesic_speed", &["samples", "horizon", "tol"], 1e-9),
];

fn validate(m: &Manifest) -> Result<(), DslError> {
    for call in &m.ast.checks {
        let Some((_, allowed, _)) = CHECKS.iter().find(|c| c.0 == call.name) else {
            let names: Vec<&str> = CHECKS.iter().map(|c| c.0).collect();
            return Err(invalid(
                call.pos.line,
                format!("unknown check `{}` (known: {})", call.name, names.join(", ")),
            ));
        };
        reject_unknown_args(call, allowed)?;
        for key in ["field", "v", "z"] {
            if let Some(name) = arg_ident(call, key)? {
                if !m.fields.contains_key(name) {
                    return Err(invalid(call.pos.line, format!("no field named `{name}`")));
                }
            }
        }
    }
    Ok(())
}

/// Tolerance from the check's `tol` argument, else `--tol`, else the default.
fn tolerance(call: &Call, opts: &RunOptions) -> Result<f64, DslError> {
    let default = CHECKS.iter().find(|c| c.0 == call.name).map(|c| c.2).unwrap_or(0.0);
    Ok(arg_f64(call, "tol")?.or(opts.tol).unwrap_or(default))
}

fn count(call: &Call, key: &str, default: usize) -> Result<usize, DslError> {
    Ok(arg_f64(call, key)?.map(|v| v.max(0.0) as usize).unwrap_or(default))
}

fn sample(m: &Manifest, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| m.field.chart().sample_point(&mut rng)).collect()
}

fn field_arg<'a>(m: &'a Manifest, call: &Call, key: &str) -> Result<&'a conelab::metric_core::VectorField, DslError> {
    let name = arg_ident(call, key)?.ok_or_else(|| invalid(call.pos.line, format!("`{}` needs `{key}`", call.name)))?;
    Ok(&m.fields[name])
}

fn classification_from(name: &str) -> Option<Classification> {
    match name {
        "irreducible" => Some(Classification::Irreducible),
        "decomposable" => Some(Classification::Decomposable),
        "null_subspace" => Some(Classification::IndecomposableWithNullSubspace),
        _ => None,
    }
}

fn geom<T>(rec: &mut CheckRecord, r: Result<T, GeomError>) -> Option<T> {
    match r {
        Ok(v) => Some(v),
        Err(GeomError::InconclusiveSample(msg)) => {
            rec.undetermined(msg);
            None
        }
        Err(e) => {
            rec.fail(e);
            None
        }
    }
}

/// Body of one manifest check. Argument errors were rejected by `validate`.
fn run_one(m: &Manifest, call: &Call, seed: u64, tol: f64, rec: &mut CheckRecord) -> Result<(), DslError> {
    match call.name.as_str() {
        "flatness" => {
            let pts = sample(m, count(call, "samples", 50)?, seed);
            let Some(worst) = geom(rec, pts.iter().try_fold(0.0f64, |w, p| Ok(w.max(m.field.riemann(p)?.max_abs())))) else {
                return Ok(());
            };
            rec.bound("max_curvature", worst, tol);
            rec.detail("samples", pts.len());
        }
        "curvature_symmetry" => {
            let pts = sample(m, count(call, "samples", 20)?, seed);
            let Some(worst) =
                geom(rec, pts.iter().try_fold(0.0f64, |w, p| Ok(w.max(m.field.riemann(p)?.symmetry_residual()))))
            else {
                return Ok(());
            };
            rec.bound("symmetry", worst, tol);
        }
        "cross_mode" => {
            let pts = sample(m, count(call, "samples", 100)?, seed);
            let fd = m.field.clone().with_mode(DerivativeMode::FiniteDifference);
            let n = m.field.dim();
            let res = pts.iter().try_fold(0.0f64, |w, p| {
                let (a, b) = (m.field.christoffel(p)?, fd.christoffel(p)?);
                let mut worst = w;
                for k in 0..n {
                    for i in 0..n {
                        for j in 0..n {
                            worst = worst.max((a.get(k, i, j) - b.get(k, i, j)).abs());
                        }
                    }
                }
                Ok(worst)
            });
            let Some(worst) = geom(rec, res) else { return Ok(()) };
            rec.bound("christoffel", worst, tol);
        }
        "constant_curvature" => {
            let pts = sample(m, count(call, "samples", 12)?, seed);
            let Some(kappa) = geom(rec, constant_curvature_estimate(&m.field, &pts)) else {
                return Ok(());
            };
            rec.detail("kappa", kappa.map_or("none".to_string(), |k| format!("{k:.6}")));
            match (arg(call, "expect"), kappa) {
                (None, _) => {}
                (Some(a), k) if a.value.as_ident() == Some("none") => {
                    if k.is_some() {
                        rec.fail("expected no constant curvature");
                    }
                }
                (Some(_), None) => rec.fail("no constant curvature"),
                (Some(_), Some(k)) => {
                    let expect = arg_f64(call, "expect")?.unwrap_or(0.0);
                    rec.bound("kappa_error", (k - expect).abs(), tol);
                }
            }
        }
        "cone_curvature" => {
            let Some(spec) = m.last_cone() else {
                rec.fail("manifest has no cone construction");
                return Ok(());
            };
            let pts = sample(m, count(call, "samples", 20)?, seed);
            let Some(r) = geom(rec, conelab::cone::cone_curvature_residual(spec, &pts)) else {
                return Ok(());
            };
            rec.bound("formula", r.formula, tol);
            rec.bound("radial", r.radial, tol);
        }
        "parallel" => {
            let v = field_arg(m, call, "field")?;
            let pts = sample(m, count(call, "samples", 100)?, seed);
            let Some(r) = geom(rec, verify_parallel(&m.field, v, &pts)) else { return Ok(()) };
            rec.bound("covariant_derivative", r, tol);
        }
        "parallel_field" => {
            let Some(spec) = m.last_cone() else {
                rec.fail("manifest has no cone construction");
                return Ok(());
            };
            let v = field_arg(m, call, "field")?;
            let pts = sample(m, count(call, "samples", 50)?, seed);
            let Some(rep) = geom(rec, parallel_field_report(spec, v, &pts)) else { return Ok(()) };
            rec.detail("case", rep.case.as_str());
            rec.detail("nu", rep.nu);
            rec.bound("covariant_derivative", rep.residual, tol);
            rec.bound("radial", rep.radial_residual, tol);
            if rep.case != ParallelCase::Flat {
                let Some(p) = geom(rec, potential_identities(spec, v, &pts)) else { return Ok(()) };
                rec.bound("potential_reconstruction", p.reconstruction, tol);
                rec.bound("potential_hessian", p.hessian, tol);
                rec.bound("potential_gradient_norm", p.gradient_norm, tol);
            }
        }
        "holonomy" => {
            let probes = count(call, "probes", 60)?;
            let bp = sample(m, 1, seed).remove(0);
            let Some((sample, rep)) = geom(rec, analyse_holonomy(&m.field, &bp, probes, seed)) else {
                return Ok(());
            };
            describe_holonomy(rec, &sample, &rep);
            if let Some(name) = arg_ident(call, "expect")? {
                let want = classification_from(name)
                    .ok_or_else(|| invalid(call.pos.line, "expect is one of irreducible, decomposable, null_subspace"))?;
                if want != rep.classification {
                    rec.fail(format!("expected {}", want.as_str()));
                }
            }
        }
        "completeness" => {
            let Some(spec) = m.last_warped() else {
                rec.fail("manifest has no warped construction");
                return Ok(());
            };
            let base_complete = arg_f64(call, "base_complete")?.unwrap_or(1.0) != 0.0;
            let Some(v) = geom(rec, completeness_verdict(spec, base_complete, seed)) else { return Ok(()) };
            rec.detail("verdict", v.verdict.as_str());
            rec.detail("clause", v.reason.as_str());
            rec.detail("spot_checked", v.spot_checked);
            if let Some(w) = &v.witness {
                rec.residual("witness_escape_time", w.escape_time);
            }
            match arg_ident(call, "expect")? {
                Some(want) if want != v.verdict.as_str() => rec.fail(format!("expected {want}")),
                None if v.verdict == Completeness::Undetermined => rec.undetermined("spot checks inconclusive"),
                _ => {}
            }
        }
        "nullplane_eta" => {
            let Some(spec) = m.nullplane() else {
                rec.fail("manifest has no nullplane construction");
                return Ok(());
            };
            let pts = grid_points(spec, count(call, "per_axis", 3)?);
            let r = eta_system_residuals(spec, &pts);
            for (k, v) in r.iter().enumerate() {
                rec.bound(&format!("equation_{}", k + 1), *v, tol);
            }
            rec.detail("points", pts.len());
        }
        "nullplane_pair" => {
            let Some(spec) = m.nullplane() else {
                rec.fail("manifest has no nullplane construction");
                return Ok(());
            };
            let (v, z) = (field_arg(m, call, "v")?, field_arg(m, call, "z")?);
            let mut pts = grid_points(spec, 3);
            pts.truncate(count(call, "samples", 20)?);
            let Some(r) = geom(rec, vz_residuals(&m.field, v, z, &pts)) else { return Ok(()) };
            rec.bound("frame", r.frame_residual, tol);
            rec.bound("v", r.v_residual, tol);
            rec.bound("z", r.z_residual, tol);
            let Some(i) = geom(rec, integrability_residual(&m.field, v, &pts)) else { return Ok(()) };
            rec.bound("integrability", i, tol);
        }
        "geodesic_speed" => {
            let pts = sample(m, count(call, "samples", 5)?, seed);
            let horizon = arg_f64(call, "horizon")?.unwrap_or(1.0);
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
            let mut worst: f64 = 0.0;
            for p in &pts {
                let v: Vec<f64> = (0..p.len()).map(|_| rng.gen_range(-0.5..0.5)).collect();
                let Some(res) = geom(rec, geodesic_integrate(&m.field, p, &v, horizon, tol)) else { return Ok(()) };
                worst = worst.max(res.speed_drift);
            }
            rec.bound("speed_drift", worst, 10.0 * tol);
        }
        _ => unreachable!("validated"),
    }
    Ok(())
}

pub fn describe_holonomy(rec: &mut CheckRecord, sample: &conelab::holonomy::HolonomySample, rep: &conelab::holonomy::SubspaceReport) {
    rec.detail("classification", rep.classification.as_str());
    rec.detail("sample_size", rep.sample_size);
    let subspaces: Vec<String> = rep
        .subspaces
        .iter()
        .map(|s| {
            let kind = if s.is_totally_null() {
                "null"
            } else if s.is_nondegenerate() {
                "nondegenerate"
            } else {
                "degenerate"
            };
            format!("{}:{kind}", s.dim)
        })
        .collect();
    rec.detail("subspaces", subspaces.join(","));
    rec.residual("held_out_defect", rep.held_out_defect);
    rec.residual("algebra_defect", sample.algebra_defect());
    rec.residual("max_algebra_norm", sample.max_algebra_norm());
}

fn source_name(path: &Path) -> String {
    path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned())
}

pub fn load(path: &Path) -> Result<Manifest, DslError> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    load_manifest(&text)
}

/// `conelab check`: every `check` line of the manifest, run in parallel and
/// reported in manifest order.
pub fn run_check(path: &Path, opts: &RunOptions) -> Result<Report, DslError> {
    let m = load(path)?;
    validate(&m)?;
    let seed = resolve_seed(opts.seed, m.ast.seed);
    let mut report = Report::new("check", seed);
    report.source = Some(source_name(path));
    let jobs: Vec<(Call, f64)> = m
        .ast
        .checks
        .iter()
        .map(|c| Ok((c.clone(), tolerance(c, opts)?)))
        .collect::<Result<_, DslError>>()?;
    let records: Vec<Result<CheckRecord, DslError>> = jobs
        .par_iter()
        .map(|(call, tol)| {
            let mut err = None;
            let rec = timed(&call.name, seed, opts.timing, |rec| {
                if let Err(e) = run_one(&m, call, seed, *tol, rec) {
                    err = Some(e);
                }
            });
            err.map_or(Ok(rec), Err)
        })
        .collect();
    for r in records {
        report.push(r?);
    }
    Ok(report)
}

/// `conelab holonomy`: sample at a point of the manifest's final metric.
pub fn run_holonomy(path: &Path, point: Option<Vec<f64>>, probes: usize, opts: &RunOptions) -> Result<Report, DslError> {
    let m = load(path)?;
    let seed = resolve_seed(opts.seed, m.ast.seed);
    let mut report = Report::new("holonomy", seed);
    report.source = Some(source_name(path));
    let bp = match point {
        Some(p) => {
            m.field.chart().check(&p)?;
            p
        }
        None => sample(&m, 1, seed).remove(0),
    };
    let rec = timed("holonomy", seed, opts.timing, |rec| {
        rec.detail("basepoint", format!("{bp:?}"));
        if let Some((sample, rep)) = geom(rec, analyse_holonomy(&m.field, &bp, probes, seed)) {
            describe_holonomy(rec, &sample, &rep);
        }
    });
    report.push(rec);
    Ok(report)
}
