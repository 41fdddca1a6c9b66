//! Manifest loading: parse, resolve identifiers, check symmetry and build the
//! metric pipeline.

use std::collections::BTreeMap;
use std::sync::Arc;

use conelab::cone::{build_cone, ConeSpec};
use conelab::metric_core::{CoordinateChart, Interval, Jet, MetricField, ScalarField, VectorField};
use conelab::nullplane::{generate_nullplane_metric, NullPlaneInputs, NullPlaneMetricSpec};
use conelab::warped::{build_doubly_warped, build_warped, DoublyWarpedBranch, Warp, WarpedSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dsl::ast::ExprKind;
use crate::dsl::parser::{Arg, Call, ManifestAst};
use crate::dsl::{derivative, parse_manifest_ast, Expr, Func, Program};
use crate::error::{invalid, DslError};

/// Points used for the numeric half of the metric symmetry test.
const SYMMETRY_PROBES: usize = 8;

#[derive(Debug, Clone)]
pub enum StageKind {
    Cone(ConeSpec),
    Warped(WarpedSpec),
    DoublyWarped(DoublyWarpedBranch),
    NullPlane(Box<NullPlaneMetricSpec>),
}

#[derive(Debug, Clone)]
pub struct Stage {
    pub kind: StageKind,
    pub field: MetricField,
}

pub struct Manifest {
    pub ast: ManifestAst,
    /// Metric built from the `metric` entry, absent for null-plane manifests.
    pub base: Option<MetricField>,
    pub stages: Vec<Stage>,
    pub field: MetricField,
    pub names: Vec<String>,
    pub fields: BTreeMap<String, VectorField>,
    pub scalars: BTreeMap<String, ScalarField>,
}

impl Manifest {
    pub fn last_cone(&self) -> Option<&ConeSpec> {
        self.stages.iter().rev().find_map(|s| match &s.kind {
            StageKind::Cone(c) => Some(c),
            _ => None,
        })
    }

    pub fn last_warped(&self) -> Option<&WarpedSpec> {
        self.stages.iter().rev().find_map(|s| match &s.kind {
            StageKind::Warped(w) => Some(w),
            _ => None,
        })
    }

    pub fn nullplane(&self) -> Option<&NullPlaneMetricSpec> {
        self.stages.iter().find_map(|s| match &s.kind {
            StageKind::NullPlane(n) => Some(&**n),
            _ => None,
        })
    }
}

fn bound(e: &Expr) -> Result<f64, DslError> {
    match &e.kind {
        ExprKind::Var(s) if s == "inf" => return Ok(f64::INFINITY),
        ExprKind::Neg(inner) if inner.as_ident() == Some("inf") => return Ok(f64::NEG_INFINITY),
        _ => {}
    }
    constant_expr(e)
}

pub fn constant_expr(e: &Expr) -> Result<f64, DslError> {
    Program::compile(e, &[])?
        .constant_value()
        .ok_or_else(|| invalid(e.pos.line, format!("`{e}` is not a constant")))
}

fn names_of(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

/// Looks up `key` among call arguments.
pub fn arg<'a>(call: &'a Call, key: &str) -> Option<&'a Arg> {
    call.args.iter().find(|a| a.key == key)
}

pub fn arg_f64(call: &Call, key: &str) -> Result<Option<f64>, DslError> {
    arg(call, key).map(|a| constant_expr(&a.value)).transpose()
}

pub fn arg_ident<'a>(call: &'a Call, key: &str) -> Result<Option<&'a str>, DslError> {
    match arg(call, key) {
        None => Ok(None),
        Some(a) => a
            .value
            .as_ident()
            .map(Some)
            .ok_or_else(|| invalid(a.pos.line, format!("`{key}` expects a name, got `{}`", a.value))),
    }
}

pub fn reject_unknown_args(call: &Call, allowed: &[&str]) -> Result<(), DslError> {
    for a in &call.args {
        if !allowed.contains(&a.key.as_str()) {
            return Err(invalid(
                a.pos.line,
                format!("`{}` does not take `{}` (allowed: {})", call.name, a.key, allowed.join(", ")),
            ));
        }
    }
    Ok(())
}

fn epsilon(call: &Call) -> Result<f64, DslError> {
    let eps = arg_f64(call, "eps")?.ok_or_else(|| invalid(call.pos.line, format!("`{}` needs `eps`", call.name)))?;
    if eps != 1.0 && eps != -1.0 {
        return Err(invalid(call.pos.line, format!("eps must be 1 or -1, got {eps}")));
    }
    Ok(eps)
}

fn range(call: &Call, lo_key: &str, hi_key: &str, default: Interval) -> Result<Interval, DslError> {
    let lo = arg_f64(call, lo_key)?.unwrap_or(default.lo);
    let hi = arg_f64(call, hi_key)?.unwrap_or(default.hi);
    Ok(Interval::new(lo, hi))
}

fn compile_all(entries: &[Expr], vars: &[String]) -> Result<Vec<Program>, DslError> {
    entries.iter().map(|e| Program::compile(e, vars)).collect()
}

fn metric_from(chart: CoordinateChart, progs: Vec<Program>) -> MetricField {
    let progs = Arc::new(progs);
    MetricField::new(chart, move |x| progs.iter().map(|p| p.eval(x)).collect())
}

/// `(i,j)` and `(j,i)` must print identically or agree numerically at seeded probe points.
fn check_symmetry(metric: &[Vec<Expr>], progs: &[Program], sampler: &dyn Fn(&mut ChaCha8Rng) -> Vec<f64>) -> Result<(), DslError> {
    let n = metric.len();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let probes: Vec<Vec<f64>> = (0..SYMMETRY_PROBES).map(|_| sampler(&mut rng)).collect();
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (&metric[i][j], &metric[j][i]);
            if a.to_string() == b.to_string() {
                continue;
            }
            let agree = probes.iter().all(|p| {
                let (x, y): (f64, f64) = (progs[i * n + j].eval(p), progs[j * n + i].eval(p));
                !(x.is_finite() && y.is_finite()) || (x - y).abs() <= 1e-12 * x.abs().max(1.0)
            });
            if !agree {
                return Err(DslError::AsymmetricMetric {
                    row: i + 1,
                    col: j + 1,
                    upper: a.to_string(),
                    lower: b.to_string(),
                });
            }
        }
    }
    Ok(())
}

/// Parses and builds a manifest.
pub fn load_manifest(text: &str) -> Result<Manifest, DslError> {
    let ast = parse_manifest_ast(text)?;
    if ast.coordinates.is_empty() {
        return Err(invalid(1, "missing `coordinates`"));
    }
    let coord_names: Vec<String> = ast.coordinates.iter().map(|c| c.name.clone()).collect();
    let mut domains = Vec::new();
    for c in &ast.coordinates {
        let lo = c.lo.as_ref().map(bound).transpose()?.unwrap_or(f64::NEG_INFINITY);
        let hi = c.hi.as_ref().map(bound).transpose()?.unwrap_or(f64::INFINITY);
        domains.push(Interval::new(lo, hi));
    }
    let chart = CoordinateChart::new(coord_names.clone(), domains.clone())?;
    let n = coord_names.len();
    if ast.metric.len() != n || ast.metric.iter().any(|row| row.len() != n) {
        return Err(invalid(ast.metric_pos.line, format!("metric must be a {n}×{n} matrix")));
    }
    let entries: Vec<Expr> = ast.metric.iter().flatten().cloned().collect();
    let is_nullplane = ast.constructions.first().is_some_and(|c| c.name == "nullplane");
    if ast.constructions.iter().skip(1).any(|c| c.name == "nullplane") {
        return Err(invalid(ast.metric_pos.line, "`nullplane` must be the first construction"));
    }

    let mut stages = Vec::new();
    let (base, mut current, mut names) = if is_nullplane {
        let call = &ast.constructions[0];
        reject_unknown_args(call, &["f1", "f2", "u_min", "u_max"])?;
        let mut g0_vars = coord_names.clone();
        g0_vars.push("u".into());
        let g0 = Arc::new(compile_all(&entries, &g0_vars)?);
        let u_range = range(call, "u_min", "u_max", Interval::unbounded())?;
        let probe_chart = chart.product(&CoordinateChart::new(vec!["u"], vec![u_range])?)?;
        check_symmetry(&ast.metric, &g0, &|rng| probe_chart.sample_point(rng))?;
        let need = |k: &str| arg(call, k).ok_or_else(|| invalid(call.pos.line, format!("`nullplane` needs `{k}`")));
        let f1 = Program::compile(&need("f1")?.value, &names_of(&["u"]))?;
        let mut f2_vars = coord_names.clone();
        f2_vars.extend(names_of(&["s", "u"]));
        let f2_expr = need("f2")?.value.clone();
        let f2 = Program::compile(&f2_expr, &f2_vars)?;
        let df2 = Arc::new(compile_all(
            &coord_names.iter().map(|x| derivative(&f2_expr, x)).collect::<Vec<_>>(),
            &f2_vars,
        )?);
        let mut inputs = NullPlaneInputs::new(
            n,
            move |u| f1.eval(&[u]),
            move |y: &[Jet]| f2.eval(y),
            move |y: &[Jet]| df2.iter().map(|p| p.eval(y)).collect(),
            move |y: &[Jet]| g0.iter().map(|p| p.eval(y)).collect(),
        );
        inputs.x_names = coord_names.clone();
        inputs.x_domain = domains.clone();
        inputs.u_range = u_range;
        let (field, spec) = generate_nullplane_metric(inputs)?;
        let names = spec.chart.names().to_vec();
        stages.push(Stage {
            kind: StageKind::NullPlane(Box::new(spec)),
            field: field.clone(),
        });
        (None, field, names)
    } else {
        let progs = compile_all(&entries, &coord_names)?;
        check_symmetry(&ast.metric, &progs, &|rng| chart.sample_point(rng))?;
        let field = metric_from(chart.clone(), progs);
        (Some(field.clone()), field, coord_names.clone())
    };

    for call in ast.constructions.iter().skip(usize::from(is_nullplane)) {
        let kind = match call.name.as_str() {
            "cone" => {
                reject_unknown_args(call, &["eps", "r_min", "r_max"])?;
                let spec = ConeSpec::with_range(epsilon(call)?, current.clone(), range(call, "r_min", "r_max", Interval::positive())?)?;
                current = build_cone(&spec)?;
                StageKind::Cone(spec)
            }
            "warped" => {
                reject_unknown_args(call, &["eps", "f", "s_min", "s_max"])?;
                let f_expr = arg(call, "f")
                    .ok_or_else(|| invalid(call.pos.line, "`warped` needs `f`"))?
                    .value
                    .clone();
                let f = Program::compile(&f_expr, &names_of(&["s"]))?;
                let warp = stock_warp(&f_expr).unwrap_or_else(|| Warp::custom(&f_expr.to_string(), move |s| f.eval(&[s])));
                let spec = WarpedSpec::new(epsilon(call)?, warp, current.clone(), range(call, "s_min", "s_max", Interval::unbounded())?)?;
                current = build_warped(&spec)?;
                StageKind::Warped(spec)
            }
            "doubly_warped" => {
                reject_unknown_args(call, &["branch", "split", "s_min", "s_max"])?;
                let branch = match arg_ident(call, "branch")? {
                    Some("plus") => DoublyWarpedBranch::Plus,
                    Some("minus") => DoublyWarpedBranch::Minus,
                    _ => return Err(invalid(call.pos.line, "`branch` must be `plus` or `minus`")),
                };
                let k = arg_f64(call, "split")?.unwrap_or(1.0) as usize;
                let (g1, g2) = split_blocks(&ast, &chart, &domains, k, call.pos.line)?;
                current = build_doubly_warped(branch, &g1, &g2, range(call, "s_min", "s_max", Interval::positive())?)?;
                StageKind::DoublyWarped(branch)
            }
            "nullplane" => unreachable!("handled above"),
            other => {
                return Err(invalid(
                    call.pos.line,
                    format!("unknown construction `{other}` (expected cone, warped, doubly_warped or nullplane)"),
                ))
            }
        };
        names = current.chart().names().to_vec();
        stages.push(Stage {
            kind,
            field: current.clone(),
        });
    }

    let mut fields = BTreeMap::new();
    for f in &ast.fields {
        if f.value.len() != names.len() {
            return Err(invalid(
                f.pos.line,
                format!("field `{}` has {} components, chart has {}", f.name, f.value.len(), names.len()),
            ));
        }
        let progs = Arc::new(compile_all(&f.value, &names)?);
        fields.insert(
            f.name.clone(),
            VectorField::new(move |x| progs.iter().map(|p| p.eval(x)).collect()),
        );
    }
    let mut scalars = BTreeMap::new();
    for s in &ast.scalars {
        let prog = Program::compile(&s.value, &names)?;
        scalars.insert(s.name.clone(), ScalarField::new(move |x| prog.eval(x)));
    }
    Ok(Manifest {
        ast,
        base,
        stages,
        field: current,
        names,
        fields,
        scalars,
    })
}

/// `cosh(s)`, `exp(s)` and the other named warps keep their identity so
/// completeness analysis can recognise them.
fn stock_warp(e: &Expr) -> Option<Warp> {
    let ExprKind::Call(f, arg) = &e.kind else { return None };
    if arg.as_ident() != Some("s") {
        return None;
    }
    Some(match f {
        Func::Cosh => Warp::Cosh,
        Func::Exp => Warp::Exp,
        Func::Sinh => Warp::Sinh,
        Func::Cos => Warp::Cos,
        Func::Sin => Warp::Sin,
        _ => return None,
    })
}

/// Splits a block-diagonal base metric into its first `k` and remaining coordinates.
fn split_blocks(
    ast: &ManifestAst,
    chart: &CoordinateChart,
    domains: &[Interval],
    k: usize,
    line: usize,
) -> Result<(MetricField, MetricField), DslError> {
    let n = ast.coordinates.len();
    if k == 0 || k >= n {
        return Err(invalid(line, format!("`split` must lie in 1..{n}")));
    }
    let names = chart.names();
    for i in 0..n {
        for j in 0..n {
            if (i < k) != (j < k) && ast.metric[i][j].as_num() != Some(0.0) {
                return Err(invalid(line, format!("metric entry ({},{}) must be 0 for a doubly warped base", i + 1, j + 1)));
            }
        }
    }
    let block = |range: std::ops::Range<usize>| -> Result<MetricField, DslError> {
        let vars: Vec<String> = names[range.clone()].to_vec();
        let entries: Vec<Expr> = range
            .clone()
            .flat_map(|i| range.clone().map(move |j| (i, j)))
            .map(|(i, j)| ast.metric[i][j].clone())
            .collect();
        let progs = compile_all(&entries, &vars)?;
        let chart = CoordinateChart::new(vars, domains[range].to_vec())?;
        Ok(metric_from(chart, progs))
    };
    Ok((block(0..k)?, block(k..n)?))
}
