//! Adaptive Simpson quadrature on a finite interval.

use serde::Serialize;

use crate::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_DEPTH: u32 = 40;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quadrature {
    pub value: f64,
    /// Sum of the Richardson error estimates over accepted panels.
    pub error_estimate: f64,
    pub evaluations: usize,
    /// Some panel hit the depth limit before meeting its tolerance.
    pub depth_exhausted: bool,
}

struct State<'a, F> {
    f: &'a F,
    evals: usize,
    err: f64,
    exhausted: bool,
}

impl<F: Fn(f64) -> f64> State<'_, F> {
    fn eval(&mut self, x: f64) -> f64 {
        self.evals += 1;
        (self.f)(x)
    }

    #[allow(clippy::too_many_arguments)]
    fn recurse(&mut self, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (self.eval(lm), self.eval(rm));
        let h = (b - a) / 12.0;
        let left = h * (fa + 4.0 * flm + fm);
        let right = h * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if delta.abs() <= 15.0 * tol || depth == 0 || !delta.is_finite() {
            if depth == 0 && delta.abs() > 15.0 * tol {
                self.exhausted = true;
            }
            self.err += delta.abs() / 15.0;
            return left + right + delta / 15.0;
        }
        self.recurse(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + self.recurse(m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

/// `∫_a^b f(x) dx` to absolute tolerance `tol`. Reversed limits flip the sign.
///
/// ```
/// use phase_balance::quadrature::adaptive_simpson;
///
/// let q = adaptive_simpson(|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-10, 40).unwrap();
/// assert!((q.value - 2.0).abs() < 1e-10);
/// ```
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64, max_depth: u32) -> Result<Quadrature> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::NonFinite("integration limits"));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidInput("quadrature tolerance must be positive".into()));
    }
    if a == b {
        return Ok(Quadrature {
            value: 0.0,
            error_estimate: 0.0,
            evaluations: 0,
            depth_exhausted: false,
        });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut st = State {
        f: &f,
        evals: 0,
        err: 0.0,
        exhausted: false,
    };
    let (fa, fb) = (st.eval(lo), st.eval(hi));
    let fm = st.eval(0.5 * (lo + hi));
    let whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
    let value = st.recurse(lo, hi, fa, fm, fb, whole, tol, max_depth);
    if !value.is_finite() {
        return Err(Error::NonFinite("quadrature result"));
    }
    Ok(Quadrature {
        value: sign * value,
        error_estimate: st.err,
        evaluations: st.evals,
        depth_exhausted: st.exhausted,
    })
}
