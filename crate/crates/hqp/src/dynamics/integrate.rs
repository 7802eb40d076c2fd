//! Dormand–Prince 5(4) integrator for matrix-valued ODEs.

use crate::error::{Error, Result};

use super::model::Operator;
use crate::C64;

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
// Fifth- minus fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    /// Maximum-norm local error allowed per step.
    pub tol: f64,
    pub max_steps: usize,
    /// If set, take uniform steps of (at most) this size and skip error control.
    pub fixed_step: Option<f64>,
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl { tol: 1e-10, max_steps: 10_000_000, fixed_step: None }
    }
}

/// y + h Σ c_i k_i
fn combine(y: &Operator, h: f64, terms: &[(f64, &Operator)]) -> Operator {
    let mut out = y.clone();
    for &(c, k) in terms {
        let s = C64::from(h * c);
        out.zip_apply(k, |a, b| *a += s * b);
    }
    out
}

/// One DP5 step; returns (y_next, f(t+h, y_next), error estimate).
fn step<F: Fn(f64, &Operator) -> Operator>(f: &F, t: f64, y: &Operator, k1: &Operator, h: f64) -> (Operator, Operator, Operator) {
    let k2 = f(t + C2 * h, &combine(y, h, &[(A21, k1)]));
    let k3 = f(t + C3 * h, &combine(y, h, &[(A31, k1), (A32, &k2)]));
    let k4 = f(t + C4 * h, &combine(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]));
    let k5 = f(t + C5 * h, &combine(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
    let k6 = f(t + h, &combine(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
    let y_new = combine(y, h, &[(B1, k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
    let k7 = f(t + h, &y_new);
    let zero = Operator::zeros(y.nrows(), y.ncols());
    let err = combine(&zero, h, &[(E1, k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)]);
    (y_new, k7, err)
}

fn max_norm(m: &Operator) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Integrate from `t0` to exactly `t1`, calling `on_step(t, y, h)` after every
/// accepted step (returning an error aborts). Returns the final state and the
/// step size to try next.
pub fn integrate<F, S>(f: F, t0: f64, t1: f64, y0: Operator, control: &StepControl, h_init: Option<f64>, mut on_step: S) -> Result<(Operator, f64)>
where
    F: Fn(f64, &Operator) -> Operator,
    S: FnMut(f64, &Operator, f64) -> Result<()>,
{
    let span = t1 - t0;
    let mut y = y0;
    let mut k1 = f(t0, &y);
    if let Some(hf) = control.fixed_step {
        let n = (span / hf).ceil().max(1.0) as usize;
        let h = span / n as f64;
        for i in 0..n {
            let t = t0 + h * i as f64;
            let (yn, kn, _) = step(&f, t, &y, &k1, h);
            y = yn;
            k1 = kn;
            on_step(if i + 1 == n { t1 } else { t + h }, &y, h)?;
        }
        return Ok((y, h));
    }
    let mut h = match h_init {
        Some(h) => h.min(span),
        None => {
            // Step whose Euler increment is ~tol^{1/5} of the state scale.
            let d0 = max_norm(&y).max(1e-300);
            let d1 = max_norm(&k1);
            if d1 == 0.0 { span } else { (0.01 * d0 / d1).min(span) }
        }
    };
    let h_min = 1e-14 * span.abs().max(t1.abs());
    let mut t = t0;
    let mut steps = 0usize;
    while t < t1 {
        if steps >= control.max_steps {
            return Err(Error::Stiff { t_ps: t, step_ps: h });
        }
        let last = t + h >= t1 || (t1 - t - h) < 1e-12 * h;
        let h_try = if last { t1 - t } else { h };
        let (yn, kn, e) = step(&f, t, &y, &k1, h_try);
        let err = max_norm(&e);
        let factor = if err == 0.0 { 5.0 } else { (0.9 * (control.tol / err).powf(0.2)).clamp(0.2, 5.0) };
        if err <= control.tol {
            t = if last { t1 } else { t + h_try };
            y = yn;
            k1 = kn;
            steps += 1;
            on_step(t, &y, h_try)?;
            if !last || factor < 1.0 {
                h = h_try * factor;
            }
        } else {
            h = h_try * factor.min(1.0);
            if h < h_min {
                return Err(Error::Stiff { t_ps: t, step_ps: h });
            }
        }
    }
    Ok((y, h))
}
