//! Embedded Dormand–Prince 5(4) integrator with domain-aware step rejection.

/// Tolerances and guards for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: Option<f64>,
    pub h_min: f64,
    pub h_max: f64,
    pub max_norm: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-9,
            atol: 1e-12,
            h_init: None,
            h_min: 1e-12,
            h_max: f64::INFINITY,
            max_norm: 1e8,
            max_steps: 2_000_000,
        }
    }
}

impl OdeOptions {
    /// Options derived from a single user tolerance: `rtol = tol`, `atol = tol·1e-3`.
    pub fn with_tol(tol: f64) -> Self {
        OdeOptions {
            rtol: tol,
            atol: tol * 1e-3,
            ..OdeOptions::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Termination {
    Completed,
    /// The right-hand side refused every step size down to `h_min`.
    LeftDomain { t: f64 },
    /// Step underflow on accuracy grounds, or the state norm exceeded its cap.
    BlowUp { t: f64 },
    /// Step budget exhausted.
    StepLimit { t: f64 },
}

impl Termination {
    pub fn escape_time(&self) -> Option<f64> {
        match *self {
            Termination::Completed => None,
            Termination::LeftDomain { t } | Termination::BlowUp { t } | Termination::StepLimit { t } => {
                Some(t)
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct OdeSolution {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub termination: Termination,
}

impl OdeSolution {
    pub fn last(&self) -> (&f64, &Vec<f64>) {
        (self.times.last().unwrap(), self.states.last().unwrap())
    }

    /// State recorded at exactly time `t`, if any.
    pub fn state_at(&self, t: f64) -> Option<&[f64]> {
        self.times
            .iter()
            .position(|&s| s == t)
            .map(|i| self.states[i].as_slice())
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn norm(y: &[f64]) -> f64 {
    y.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Integrates `y' = f(t, y)` from `t0` to `t_end` (either direction).
///
/// `rhs` writes the derivative into its output slice and returns `false` when
/// the state lies outside the admissible domain; such steps are rejected and
/// retried with a smaller step. Every time in `checkpoints` that lies between
/// `t0` and `t_end` is landed on exactly and recorded. With `record_steps`
/// every accepted step is recorded as well.
pub fn integrate<F>(
    mut rhs: F,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    checkpoints: &[f64],
    record_steps: bool,
    opts: &OdeOptions,
) -> OdeSolution
where
    F: FnMut(f64, &[f64], &mut [f64]) -> bool,
{
    let n = y0.len();
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    let mut stops: Vec<f64> = checkpoints
        .iter()
        .copied()
        .filter(|&c| (c - t0) * dir > 0.0 && (t_end - c) * dir > 0.0)
        .collect();
    stops.sort_by(|a, b| (a * dir).total_cmp(&(b * dir)));
    stops.dedup();
    stops.push(t_end);

    let mut times = vec![t0];
    let mut states = vec![y0.to_vec()];
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k1 = vec![0.0; n];
    if !rhs(t, &y, &mut k1) {
        return OdeSolution {
            times,
            states,
            termination: Termination::LeftDomain { t },
        };
    }
    let span = (t_end - t0).abs();
    if span == 0.0 {
        return OdeSolution {
            times,
            states,
            termination: Termination::Completed,
        };
    }
    let mut h = opts.h_init.unwrap_or_else(|| (1e-3 * span).clamp(1e-6, 1e-2)).min(opts.h_max);
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut k5 = vec![0.0; n];
    let mut k6 = vec![0.0; n];
    let mut k7 = vec![0.0; n];
    let mut ytmp = vec![0.0; n];
    let mut ynew = vec![0.0; n];
    let mut stop_idx = 0;
    let mut steps = 0usize;

    loop {
        let target = stops[stop_idx];
        let remaining = (target - t) * dir;
        let landing = h >= remaining;
        let h_try = if landing { remaining } else { h };
        steps += 1;
        if steps > opts.max_steps {
            return OdeSolution {
                times,
                states,
                termination: Termination::StepLimit { t },
            };
        }
        let hs = h_try * dir;
        let mut ok = true;
        for i in 0..n {
            ytmp[i] = y[i] + hs * A21 * k1[i];
        }
        ok &= rhs(t + C2 * hs, &ytmp, &mut k2);
        if ok {
            for i in 0..n {
                ytmp[i] = y[i] + hs * (A31 * k1[i] + A32 * k2[i]);
            }
            ok &= rhs(t + C3 * hs, &ytmp, &mut k3);
        }
        if ok {
            for i in 0..n {
                ytmp[i] = y[i] + hs * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
            }
            ok &= rhs(t + C4 * hs, &ytmp, &mut k4);
        }
        if ok {
            for i in 0..n {
                ytmp[i] = y[i] + hs * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
            }
            ok &= rhs(t + C5 * hs, &ytmp, &mut k5);
        }
        if ok {
            for i in 0..n {
                ytmp[i] = y[i]
                    + hs * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
            }
            ok &= rhs(t + hs, &ytmp, &mut k6);
        }
        if ok {
            for i in 0..n {
                ynew[i] = y[i]
                    + hs * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
            }
            ok &= ynew.iter().all(|v| v.is_finite());
            ok = ok && rhs(t + hs, &ynew, &mut k7);
        }
        if !ok {
            h = h_try * 0.25;
            if h < opts.h_min {
                return OdeSolution {
                    times,
                    states,
                    termination: Termination::LeftDomain { t },
                };
            }
            continue;
        }
        let mut err = 0.0;
        for i in 0..n {
            let e = hs
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = opts.atol + opts.rtol * y[i].abs().max(ynew[i].abs());
            err += (e / sc) * (e / sc);
        }
        let err = (err / n.max(1) as f64).sqrt();
        if !err.is_finite() {
            h = h_try * 0.25;
            if h < opts.h_min {
                return OdeSolution {
                    times,
                    states,
                    termination: Termination::BlowUp { t },
                };
            }
            continue;
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        if err <= 1.0 {
            t = if landing { target } else { t + hs };
            std::mem::swap(&mut y, &mut ynew);
            std::mem::swap(&mut k1, &mut k7);
            if landing {
                times.push(t);
                states.push(y.clone());
                stop_idx += 1;
                if stop_idx == stops.len() {
                    return OdeSolution {
                        times,
                        states,
                        termination: Termination::Completed,
                    };
                }
            } else if record_steps {
                times.push(t);
                states.push(y.clone());
            }
            if norm(&y) > opts.max_norm {
                if !landing && !record_steps {
                    times.push(t);
                    states.push(y.clone());
                }
                return OdeSolution {
                    times,
                    states,
                    termination: Termination::BlowUp { t },
                };
            }
            // a landing step was truncated, so only grow h from a free step
            if !landing {
                h = (h_try * factor).min(opts.h_max);
            }
        } else {
            h = h_try * factor.min(1.0);
            if h < opts.h_min {
                return OdeSolution {
                    times,
                    states,
                    termination: Termination::BlowUp { t },
                };
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn harmonic_oscillator_hits_checkpoints() {
        let sol = integrate(
            |_, y, d| {
                d[0] = y[1];
                d[1] = -y[0];
                true
            },
            0.0,
            &[1.0, 0.0],
            10.0,
            &[1.0, 2.5, 7.0],
            false,
            &OdeOptions::default(),
        );
        assert_eq!(sol.termination, Termination::Completed);
        for &t in &[1.0, 2.5, 7.0, 10.0] {
            let s = sol.state_at(t).unwrap();
            assert_relative_eq!(s[0], f64::cos(t), epsilon = 1e-8);
            assert_relative_eq!(s[1], -f64::sin(t), epsilon = 1e-8);
        }
    }

    #[test]
    fn backward_integration() {
        let sol = integrate(
            |_, y, d| {
                d[0] = y[0];
                true
            },
            0.0,
            &[1.0],
            -2.0,
            &[],
            false,
            &OdeOptions::default(),
        );
        let (t, y) = sol.last();
        assert_eq!(*t, -2.0);
        assert_relative_eq!(y[0], (-2.0f64).exp(), max_relative = 1e-8);
    }

    #[test]
    fn finite_time_blowup_is_bracketed() {
        // y' = y^2, y(0)=1 blows up at t=1
        let sol = integrate(
            |_, y, d| {
                d[0] = y[0] * y[0];
                true
            },
            0.0,
            &[1.0],
            5.0,
            &[],
            false,
            &OdeOptions::default(),
        );
        let t = sol.termination.escape_time().unwrap();
        assert!(matches!(sol.termination, Termination::BlowUp { .. }));
        assert!((t - 1.0).abs() < 1e-6, "t = {t}");
    }

    #[test]
    fn domain_exit_is_bracketed() {
        // x' = -1 from x=1 with domain x > 0
        let sol = integrate(
            |_, y, d| {
                d[0] = -1.0;
                y[0] > 0.0
            },
            0.0,
            &[1.0],
            5.0,
            &[],
            false,
            &OdeOptions::default(),
        );
        match sol.termination {
            Termination::LeftDomain { t } => assert!((t - 1.0).abs() < 1e-9),
            other => panic!("{other:?}"),
        }
    }
}
