//! Adaptive Simpson quadrature.

use crate::error::{Error, Result};

pub const DEFAULT_TOLERANCE: f64 = 1e-10;
const MAX_DEPTH: usize = 50;

/// Integrates `f` over `[lo, hi]` to absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidInput(format!(
            "integration bounds must satisfy lo < hi, got [{lo}, {hi}]"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidInput("tolerance must be positive".into()));
    }
    let mid = 0.5 * (lo + hi);
    let (flo, fmid, fhi) = (f(lo), f(mid), f(hi));
    let whole = simpson(lo, hi, flo, fmid, fhi);
    let mut state = State { deepest: 0 };
    let value = refine(&f, lo, hi, flo, fmid, fhi, whole, tol, 0, &mut state);
    if state.deepest >= MAX_DEPTH {
        return Err(Error::NoConvergence {
            what: "adaptive quadrature",
            iterations: MAX_DEPTH,
            residual: f64::NAN,
            best: vec![value],
        });
    }
    Ok(value)
}

struct State {
    deepest: usize,
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn refine<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: usize,
    state: &mut State,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    // Always subdivide at least four levels.
    if depth >= 4 && delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    if depth >= MAX_DEPTH || state.deepest >= MAX_DEPTH {
        state.deepest = MAX_DEPTH;
        return left + right + delta / 15.0;
    }
    refine(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1, state)
        + refine(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1, state)
}
