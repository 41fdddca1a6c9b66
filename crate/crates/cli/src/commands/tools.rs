use conelab::clifford_spin::{build_rep, causality_check, killing_warp_check, spin_equivariance_residual};
use conelab::cone::{closed_form_geodesic, closed_form_vs_integrator, numeric_escape_time, ConeSpec, MaxTime};
use conelab::holonomy::berger_candidates;
use conelab::metric_core::{
    geodesic_integrate_with, CoordinateChart, Interval, Jet, MetricField, OdeOptions,
};
use conelab::split_fields::{cosh_example, horosphere_example, split_reconstruct, SplitOptions};
use conelab::stock;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::RunOptions;
use crate::error::{usage, DslError};
use crate::report::{resolve_seed, timed, CheckRecord, Report};

pub const ESCAPE_REL_TOL: f64 = 0.01;
pub const DEVIATION_TOL: f64 = 1e-6;
pub const SPLIT_TOL: f64 = 1e-5;
pub const CLIFFORD_TOL: f64 = 1e-12;
pub const EQUIVARIANCE_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct GeodesicArgs {
    pub r0: f64,
    pub a: f64,
    pub c: i32,
    pub l: f64,
    pub eps: f64,
    pub horizon: f64,
}

fn timelike_line() -> MetricField {
    let chart = CoordinateChart::new(vec!["t"], vec![Interval::unbounded()]).expect("valid chart");
    MetricField::diagonal(chart, |_| vec![Jet::constant(-1.0)]).with_signature_hint(1, 0)
}

/// One-dimensional base with a unit tangent of the requested causal class:
/// the circle for `c ∈ {0, 1}`, a time-like line for `c = −1`.
fn base_for(c: i32) -> MetricField {
    if c < 0 {
        timelike_line()
    } else {
        stock::circle()
    }
}

fn cone_setup(args: &GeodesicArgs) -> Result<(ConeSpec, Vec<f64>), DslError> {
    if !(-1..=1).contains(&args.c) {
        return Err(usage(format!("--c must be -1, 0 or 1, got {}", args.c)));
    }
    if args.r0 <= 0.0 || args.l <= 0.0 {
        return Err(usage("--r0 and --l must be positive"));
    }
    let spec = ConeSpec::new(args.eps, base_for(args.c))?;
    let x = if args.c == 0 { vec![0.0] } else { vec![args.l] };
    Ok((spec, x))
}

/// `conelab geodesic`: closed form against integration, plus an optional CSV trace.
pub fn run_geodesic(args: &GeodesicArgs, opts: &RunOptions) -> Result<Report, DslError> {
    let (spec, x) = cone_setup(args)?;
    let seed = resolve_seed(opts.seed, None);
    let mut report = Report::new("geodesic", seed);
    let cf = closed_form_geodesic(args.r0, args.a, args.c, args.l, args.eps)?;
    let base_point = vec![0.0];
    let rec = timed("geodesic", seed, opts.timing, |rec| {
        rec.detail("case", cf.case_tag.as_str());
        rec.detail("T", cf.t_max);
        let tol = opts.tol.unwrap_or(ESCAPE_REL_TOL);
        match numeric_escape_time(&spec, &base_point, args.r0, args.a, &x, args.horizon, 1e-10) {
            Ok(numeric) => compare_escape(rec, cf.t_max, numeric, args.horizon, tol),
            Err(e) => rec.fail(e),
        }
        match closed_form_vs_integrator(&spec, &base_point, args.r0, args.a, &x, args.horizon) {
            Ok(cmp) => {
                rec.bound("trajectory_deviation", cmp.max_deviation, DEVIATION_TOL);
            }
            Err(e) => rec.fail(e),
        }
    });
    report.push(rec);
    Ok(report)
}

fn compare_escape(rec: &mut CheckRecord, t_max: MaxTime, numeric: Option<f64>, horizon: f64, tol: f64) {
    match (t_max, numeric) {
        (MaxTime::Finite(t), Some(n)) => {
            rec.residual("numeric_escape", n);
            rec.bound("escape_relative_error", (n - t).abs() / t, tol);
        }
        (MaxTime::Finite(t), None) if t > horizon => {
            rec.detail("numeric_escape", "none before horizon");
        }
        (MaxTime::Finite(_), None) => rec.fail("integrator reached the horizon"),
        (MaxTime::Infinite, Some(n)) => {
            rec.residual("numeric_escape", n);
            rec.fail("integrator escaped although the closed form is complete");
        }
        (MaxTime::Infinite, None) => rec.detail("numeric_escape", "none before horizon"),
    }
}

/// Samples the cone geodesic on a uniform grid as `t,r,<coord>,v_r,v_<coord>`.
pub fn geodesic_csv(args: &GeodesicArgs, samples: usize) -> Result<String, DslError> {
    let (spec, x) = cone_setup(args)?;
    let cone = conelab::cone::build_cone(&spec)?;
    let cf = closed_form_geodesic(args.r0, args.a, args.c, args.l, args.eps)?;
    let t_end = match cf.t_max {
        MaxTime::Finite(t) => (0.99 * t).min(args.horizon),
        MaxTime::Infinite => args.horizon,
    };
    let times: Vec<f64> = (0..=samples).map(|k| t_end * k as f64 / samples as f64).collect();
    let opts = OdeOptions::with_tol(1e-10);
    let p = vec![args.r0, 0.0];
    let v = vec![args.a, x[0]];
    let res = geodesic_integrate_with(&cone, &p, &v, t_end, &times, &opts, false)?;
    let coord = &spec.base.chart().names()[0];
    let mut out = format!("t,r,{coord},v_r,v_{coord}\n");
    for &t in &times {
        let Some(i) = res.index_of_time(t) else { break };
        let (q, w) = (res.position(i), res.velocity(i));
        out.push_str(&format!("{t},{},{},{},{}\n", q[0], q[1], w[0], w[1]));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitExample {
    Cosh,
    Horosphere,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitBase {
    Torus,
    Sphere,
}

/// `conelab split`: parallel field, potential and reconstructed splitting.
pub fn run_split(example: SplitExample, base: SplitBase, opts: &RunOptions) -> Result<Report, DslError> {
    let seed = resolve_seed(opts.seed, None);
    let base_n = match base {
        SplitBase::Torus => stock::flat_torus(),
        SplitBase::Sphere => stock::round_sphere(),
    };
    let ex = match example {
        SplitExample::Cosh => cosh_example(base_n)?,
        SplitExample::Horosphere => horosphere_example(base_n)?,
    };
    let tol = opts.tol.unwrap_or(SPLIT_TOL);
    let mut report = Report::new("split", seed);
    let pts = ex.cone.sample_points(50, seed);
    let cone = conelab::cone::build_cone(&ex.cone)?;
    report.push(timed("parallel_field", seed, opts.timing, |rec| {
        match conelab::split_fields::verify_parallel(&cone, &ex.field, &pts) {
            Ok(r) => {
                rec.bound("covariant_derivative", r, tol);
            }
            Err(e) => rec.fail(e),
        }
    }));
    report.push(timed("potential", seed, opts.timing, |rec| {
        match conelab::split_fields::potential_identities(&ex.cone, &ex.field, &pts) {
            Ok(p) => {
                rec.bound("reconstruction", p.reconstruction, tol);
                rec.bound("hessian", p.hessian, tol);
                rec.bound("gradient_norm", p.gradient_norm, tol);
            }
            Err(e) => rec.fail(e),
        }
    }));
    let split_opts = SplitOptions {
        seed,
        ..SplitOptions::default()
    };
    report.push(timed("splitting", seed, opts.timing, |rec| {
        rec.detail("branch", ex.branch.as_str());
        match split_reconstruct(&ex.cone.base, &ex.potential, ex.cone.epsilon, ex.branch, &split_opts) {
            Ok(s) => {
                rec.detail("grid", format!("{}x{}", s.grid.0, s.grid.1));
                rec.bound("unit", s.unit_residual, tol);
                rec.bound("connection", s.connection_residual, tol);
                rec.bound("pullback", s.pullback_residual, tol);
                rec.bound("level", s.level_residual, tol);
                rec.residual("lie_derivative", s.lie_residual);
                rec.detail("zero_set", if s.m0.is_some() { "found" } else { "none" });
            }
            Err(e) => rec.fail(e),
        }
    }));
    Ok(report)
}

/// `conelab spin`: Clifford representation, Dirac current causality and Killing warps.
pub fn run_spin(r: usize, s: usize, trials: usize, opts: &RunOptions) -> Result<Report, DslError> {
    let seed = resolve_seed(opts.seed, None);
    let rep = build_rep(r, s)?;
    let tol = opts.tol.unwrap_or(CLIFFORD_TOL);
    let mut report = Report::new("spin", seed);
    report.push(timed("clifford", seed, opts.timing, |rec| {
        rec.detail("spinor_dim", rep.spinor_dim());
        rec.bound("relation", rep.clifford_residual(), tol);
        rec.bound("adjoint", rep.adjoint_residual(), tol);
        let (p, q) = rep.form_signature();
        rec.detail("form_signature", format!("({p},{q})"));
    }));
    if r == 1 {
        report.push(timed("causality", seed, opts.timing, |rec| {
            match causality_check(&rep, trials, seed) {
                Ok(c) => {
                    rec.detail("trials", c.trials);
                    rec.residual("max_norm", c.max_norm);
                    rec.bound("non_spacelike", c.max_norm.max(0.0), 0.0);
                    rec.bound("identity", c.identity_residual, 1e-9);
                    rec.bound("orthogonality", c.orthogonality_residual, 1e-9);
                    rec.residual("form_min_eigenvalue", c.form_min_eigenvalue);
                }
                Err(e) => rec.fail(e),
            }
        }));
    }
    if s >= 2 {
        report.push(timed("equivariance", seed, opts.timing, |rec| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut worst: f64 = 0.0;
            for k in 0..20 {
                let phi = rep.random_spinor(&mut rng);
                match spin_equivariance_residual(&rep, r, r + 1, 0.1 + 0.3 * k as f64, &phi) {
                    Ok(v) => worst = worst.max(v),
                    Err(e) => {
                        rec.fail(e);
                        return;
                    }
                }
            }
            rec.bound("current", worst, EQUIVARIANCE_TOL);
        }));
    }
    report.push(timed("killing_warps", seed, opts.timing, |rec| {
        let cosh = killing_warp_check(|t| t.cosh(), -1.0, 0.25, -2.0, 2.0);
        let exp = killing_warp_check(|t| t.exp(), -1.0, 0.25, -2.0, 2.0);
        let mean = |p: &[(f64, f64)]| p.iter().map(|q| q.1).sum::<f64>() / p.len() as f64;
        rec.bound("cosh_ode", cosh.ode_residual, 1e-10);
        rec.bound("cosh_lambda_sq", (mean(&cosh.profile) - 0.25).abs() + cosh.spread, 1e-12);
        rec.bound("exp_ode", exp.ode_residual, 1e-10);
        rec.bound("exp_lambda_sq", mean(&exp.profile).abs() + exp.spread, 1e-12);
    }));
    Ok(report)
}

/// `conelab berger`: candidate irreducible holonomy algebras for signature `(t, s)`.
pub fn run_berger(t: usize, s: usize, opts: &RunOptions) -> Result<Report, DslError> {
    if t + s == 0 {
        return Err(usage("signature must have positive dimension"));
    }
    let seed = resolve_seed(opts.seed, None);
    let mut report = Report::new("berger", seed);
    report.table = berger_candidates(t, s).iter().map(|e| e.row()).collect();
    let mut rec = CheckRecord::new("berger", seed);
    rec.detail("signature", format!("({t},{s})"));
    rec.detail("entries", report.table.len());
    report.push(rec);
    Ok(report)
}
