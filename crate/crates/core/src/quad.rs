//! Adaptive Simpson quadrature and safeguarded root finding.

use crate::error::{Error, Result};
use crate::num::abs;

const MAX_DEPTH: u32 = 48;
/// Cells narrower than this fraction of the interval are accepted as is, so
/// integrable endpoint singularities do not exhaust the depth.
const MIN_RELATIVE_WIDTH: f64 = 1e-14;

/// Adaptive Simpson integral of `f` over `[a, b]` with absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let min_width = MIN_RELATIVE_WIDTH * abs(b - a);
    // One forced split so a kink symmetric about the midpoint is not missed.
    let left = simpson_rec(&f, a, m, fa, f(0.5 * (a + m)), fm, tol / 2.0, MAX_DEPTH, min_width)?;
    let right = simpson_rec(&f, m, b, fm, f(0.5 * (m + b)), fb, tol / 2.0, MAX_DEPTH, min_width)?;
    Ok(left + right)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    tol: f64,
    depth: u32,
    min_width: f64,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if abs(delta) <= 15.0 * tol || (b - a) <= f64::EPSILON * (abs(a) + abs(b)) || (b - a) <= min_width {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::Quadrature { a, b });
    }
    let l = simpson_rec(f, a, m, fa, flm, fm, tol / 2.0, depth - 1, min_width)?;
    let r = simpson_rec(f, m, b, fm, frm, fb, tol / 2.0, depth - 1, min_width)?;
    Ok(l + r)
}

/// Mean of `f` over `[a, b]`.
pub fn average<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    let len = b - a;
    Ok(adaptive_simpson(f, a, b, tol * abs(len).max(f64::MIN_POSITIVE))? / len)
}

/// Solves `g(x) = target` for increasing `g` on the bracket `[lo, hi]`.
///
/// Bisection keeps the bracket; a Newton step is taken whenever `dg` is
/// available and the step stays inside it. Runs to full double precision.
pub fn solve_increasing<G, D>(g: G, dg: Option<D>, target: f64, mut lo: f64, mut hi: f64) -> Result<f64>
where
    G: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let glo = g(lo) - target;
    let ghi = g(hi) - target;
    if glo > 0.0 || ghi < 0.0 {
        return Err(Error::RootFind { target, lo, hi, residual: if glo > 0.0 { glo } else { ghi } });
    }
    if glo == 0.0 {
        return Ok(lo);
    }
    if ghi == 0.0 {
        return Ok(hi);
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let gx = g(x) - target;
        if gx == 0.0 {
            return Ok(x);
        }
        if gx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        if hi - lo <= 2.0 * f64::EPSILON * (abs(lo) + abs(hi)).max(1e-300) {
            break;
        }
        let mut next = 0.5 * (lo + hi);
        if let Some(d) = dg.as_ref() {
            let dx = d(x);
            if dx > 0.0 && dx.is_finite() {
                let cand = x - gx / dx;
                if cand > lo && cand < hi {
                    next = cand;
                }
            }
        }
        if next == x {
            next = 0.5 * (lo + hi);
            if next == x {
                break;
            }
        }
        x = next;
    }
    // Pick the better of the bracket ends and the last iterate.
    let mut best = x;
    let mut best_r = abs(g(x) - target);
    for c in [lo, hi] {
        let r = abs(g(c) - target);
        if r < best_r {
            best = c;
            best_r = r;
        }
    }
    Ok(best)
}
