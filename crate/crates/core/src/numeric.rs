//! Small numerical helpers shared by the loss, divergence and solver modules.

use std::collections::HashMap;
use std::sync::Mutex;

use crate::error::{Error, Result};

/// Arguments of logarithms and ratios are kept inside `[CLAMP, 1 - CLAMP]`.
pub const CLAMP: f64 = 1e-12;

/// Clamp a probability into `[CLAMP, 1 - CLAMP]`.
#[inline]
pub fn clamp_prob(x: f64) -> f64 {
    x.clamp(CLAMP, 1.0 - CLAMP)
}

/// `x * ln(x / y)` with the convention `0 * ln(0 / y) = 0` applied only when `x == 0` exactly.
#[inline]
pub fn xlogxy(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else if y == 0.0 {
        f64::INFINITY
    } else {
        x * (x / y).ln()
    }
}

/// Central-difference step `max(1e-6, 1e-6 |x|)`.
#[inline]
pub fn fd_step(x: f64) -> f64 {
    (1e-6 * x.abs()).max(1e-6)
}

/// Central-difference first derivative.
pub fn central_diff(f: &dyn Fn(f64) -> f64, x: f64) -> f64 {
    let h = fd_step(x);
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Central-difference second derivative with an explicit step.
pub fn second_diff(f: &dyn Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)
}

/// Outcome of [`adaptive_simpson`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    /// False if some subinterval hit the depth limit without meeting its tolerance.
    pub converged: bool,
    pub evaluations: usize,
}

const MAX_DEPTH: u32 = 48;
const MAX_EVALUATIONS: usize = 200_000;

/// Adaptive Simpson quadrature of `f` on `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Quadrature {
    let mut state = SimpsonState {
        evaluations: 3,
        converged: true,
    };
    if a == b {
        return Quadrature {
            value: 0.0,
            converged: true,
            evaluations: 0,
        };
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let value = simpson_step(f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH, &mut state);
    Quadrature {
        value,
        converged: state.converged && value.is_finite(),
        evaluations: state.evaluations,
    }
}

struct SimpsonState {
    evaluations: usize,
    converged: bool,
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    state: &mut SimpsonState,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    state.evaluations += 2;
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    // Below a few ulps of the running estimate the tolerance cannot be met.
    let floor = 64.0 * f64::EPSILON * (left.abs() + right.abs());
    if delta.abs() <= 15.0 * tol.max(floor) {
        return left + right + delta / 15.0;
    }
    if depth == 0 || state.evaluations >= MAX_EVALUATIONS {
        state.converged = false;
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, state)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, state)
}

/// `int_a^b f(c) dc` for `0 < a < b < 1`, with logarithmic substitutions toward the nearer
/// endpoint so power-law singularities at 0 and 1 become smooth.
pub fn integrate_interior(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Quadrature {
    let mut value = 0.0;
    let mut converged = true;
    let mut evaluations = 0;
    let mid = 0.5;
    if a < mid {
        let hi = b.min(mid);
        let g = |u: f64| {
            let c = u.exp();
            f(c) * c
        };
        let r = adaptive_simpson(&g, a.ln(), hi.ln(), 0.5 * tol);
        value += r.value;
        converged &= r.converged;
        evaluations += r.evaluations;
    }
    if b > mid {
        let lo = a.max(mid);
        // s = 1 - c = e^u
        let g = |u: f64| {
            let s = u.exp();
            f(1.0 - s) * s
        };
        let r = adaptive_simpson(&g, (1.0 - b).ln(), (1.0 - lo).ln(), 0.5 * tol);
        value += r.value;
        converged &= r.converged;
        evaluations += r.evaluations;
    }
    Quadrature {
        value,
        converged,
        evaluations,
    }
}

/// Integral of `f` over an endpoint sliver of width `width`, where `f` is sampled at
/// distance `width` and `10 width` from the endpoint and modelled as `A s^alpha`.
pub fn power_law_tail(f_near: f64, f_far: f64, width: f64, endpoint: f64) -> Result<f64> {
    if f_near == 0.0 {
        return Ok(0.0);
    }
    if !f_near.is_finite() || !(f_far > 0.0) || !(f_near > 0.0) {
        return Err(Error::NonIntegrable { endpoint });
    }
    let alpha = (f_far.ln() - f_near.ln()) / std::f64::consts::LN_10;
    if alpha <= -1.0 + 1e-3 {
        return Err(Error::NonIntegrable { endpoint });
    }
    Ok(f_near * width / (alpha + 1.0))
}


/// `int_0^x f(t) dt` for `0 < x <= 1`, integrable singularities allowed at 0 only.
pub fn integrate_from_zero(f: &dyn Fn(f64) -> f64, x: f64, tol: f64) -> Result<f64> {
    if x <= 0.0 {
        return Ok(0.0);
    }
    // the far sample 10 d stays inside [0, x / 10] so factors vanishing at x do not skew it
    let d = (1e-10f64).min(0.01 * x);
    let tail = power_law_tail(f(d), f(10.0 * d), d, 0.0)?;
    let g = |u: f64| {
        let t = u.exp();
        f(t) * t
    };
    let body = adaptive_simpson(&g, d.ln(), x.ln(), tol);
    if !body.converged {
        return Err(Error::Quadrature { q: x });
    }
    Ok(body.value + tail)
}

/// `int_0^x f(t) dt` by double-exponential quadrature after `t = x u^2`, which turns an
/// integrable `t^(-a)` singularity at 0 into the milder `u^(1 - 2a)`.
pub fn tanh_sinh_from_zero(f: &dyn Fn(f64) -> f64, x: f64, tol: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    quadrature::integrate(|u| 2.0 * x * u * f(x * u * u), 0.0, 1.0, tol).integral
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for a minimizer of `f` on `[a, b]`, stopping once the bracket
/// is narrower than `resolution`. Both endpoints are compared against the final point.
pub fn golden_section(f: &dyn Fn(f64) -> f64, a: f64, b: f64, resolution: f64) -> (f64, f64) {
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > resolution {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    let mid = 0.5 * (lo + hi);
    let mut best = (mid, f(mid));
    for x in [a, b] {
        let fx = f(x);
        if fx < best.1 {
            best = (x, fx);
        }
    }
    best
}

/// Bisection for a root of `f` on `[lo, hi]` given `f(lo) < 0 <= f(hi)` (or the mirror).
pub fn bisect(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let flo = f(lo);
    let rising = flo < 0.0;
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if (fm < 0.0) == rising {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Memo of expensive scalar values keyed by the bit pattern of the argument. Grid and
/// lattice checks revisit the same few arguments many times.
#[derive(Default)]
pub struct ValueCache(Mutex<HashMap<u64, f64>>);

const CACHE_LIMIT: usize = 1 << 18;

impl ValueCache {
    pub fn get_or(&self, x: f64, compute: impl FnOnce() -> f64) -> f64 {
        let key = x.to_bits();
        if let Some(&v) = self.0.lock().unwrap_or_else(|e| e.into_inner()).get(&key) {
            return v;
        }
        let v = compute();
        let mut map = self.0.lock().unwrap_or_else(|e| e.into_inner());
        if map.len() >= CACHE_LIMIT {
            map.clear();
        }
        map.insert(key, v);
        v
    }
}
