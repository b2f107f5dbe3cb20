//! Rotation numbers: Birkhoff quotients, integer-part brackets,
//! continued-fraction convergents and periodic-orbit detection.

use alloc::vec::Vec;

use crate::catalog;
use crate::error::{Error, Result};
use crate::maps::CircleDiffeo;
use crate::num::{abs, floor, frac, round};

/// Threshold below which `F^q(x) - x - p` counts as a zero.
pub const PERIOD_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct RotationEstimate {
    /// Rotation number in `[0, 1)`.
    pub value: f64,
    pub iterates_used: u64,
    /// A priori bound `2 / n`.
    pub error_bound: f64,
    pub convergents: Vec<(i64, u64)>,
}

/// `frac((F^n(x0) - x0) / n)` with its a priori error bound.
pub fn birkhoff_estimate(map: &CircleDiffeo, x0: f64, n: u64) -> Result<RotationEstimate> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let xn = map.iterate(n as i64, x0)?;
    let value = frac((xn - x0) / n as f64);
    let q_cap = libm::sqrt(n as f64 / 2.0) as u64;
    Ok(RotationEstimate {
        value,
        iterates_used: n,
        error_bound: 2.0 / n as f64,
        convergents: convergents(value, q_cap.max(1)),
    })
}

/// Interval `[lo, hi]` containing the lift rotation number, from
/// `p_k <= k rho <= p_k + 1` with `p_k = floor(F^k(x0) - x0)`, `k = 1..=n`.
///
/// The inequalities hold for every orientation preserving circle
/// homeomorphism; `None` only signals inconsistent floating-point input.
pub fn rotation_bracket(map: &CircleDiffeo, x0: f64, n: u64) -> Result<Option<(f64, f64)>> {
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    let mut x = x0;
    for k in 1..=n {
        x = map.eval(x);
        let p = floor(x - x0);
        let kf = k as f64;
        lo = lo.max(p / kf);
        hi = hi.min((p + 1.0) / kf);
    }
    if lo.is_finite() && !x.is_nan() && lo <= hi {
        Ok(Some((lo, hi)))
    } else {
        Ok(None)
    }
}

/// Partial quotients of `x` in `[0, 1)`, stopping once a denominator exceeds `q_max`.
pub fn continued_fraction(x: f64, q_max: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut r = frac(x);
    let (mut q0, mut q1) = (1u64, 0u64);
    out.push(0);
    for _ in 0..64 {
        if r < 1e-15 {
            break;
        }
        let inv = 1.0 / r;
        let near = round(inv);
        let last = abs(inv - near) < 1e-9 * inv;
        let a = if last { near } else { floor(inv) };
        if a > 1e15 {
            break;
        }
        let a_int = a as u64;
        let q2 = a_int.saturating_mul(q1).saturating_add(q0);
        out.push(a_int);
        if q2 > q_max || last {
            break;
        }
        (q0, q1) = (q1, q2);
        r = inv - a;
    }
    out
}

/// Continued-fraction convergents `p/q` of `x` with `q <= q_max`.
pub fn convergents(x: f64, q_max: u64) -> Vec<(i64, u64)> {
    let cf = continued_fraction(x, q_max);
    let (mut p0, mut q0, mut p1, mut q1) = (1i64, 0u64, cf[0] as i64, 1u64);
    let mut out = Vec::new();
    out.push((p1, q1));
    for &a in &cf[1..] {
        let p2 = a as i64 * p1 + p0;
        let q2 = a * q1 + q0;
        if q2 > q_max {
            break;
        }
        // A leading quotient of 1 repeats q = 1; keep the later, closer fraction.
        if q2 == q1 {
            out.pop();
        }
        out.push((p2, q2));
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
    }
    out
}

fn iterations_for(q_max: u64) -> u64 {
    (4 * q_max.saturating_mul(q_max)).clamp(1_000, 1_000_000)
}

/// Smallest `q <= q_max` for which `F^q(x) - x - p` vanishes or changes
/// sign on a sample of the circle. Only fractions `p/q` inside the rotation
/// bracket are tested.
pub fn detect_period(map: &CircleDiffeo, q_max: u64, x0: f64) -> Result<Option<(i64, u64)>> {
    let k = iterations_for(q_max);
    let bracket = rotation_bracket(map, x0, k)?;
    let rho = (map.iterate(k as i64, x0)? - x0) / k as f64;
    const SAMPLES: usize = 128;
    for q in 1..=q_max {
        let qf = q as f64;
        let p = match bracket {
            Some((lo, hi)) => {
                let p = libm::ceil(qf * lo - 1e-9);
                if p > qf * hi + 1e-9 {
                    continue;
                }
                p
            }
            None => {
                let p = round(qf * rho);
                if abs(qf * rho - p) > qf / k as f64 + 1e-12 {
                    continue;
                }
                p
            }
        };
        let mut sign = 0.0;
        for j in 0..SAMPLES {
            let x = x0 + j as f64 / SAMPLES as f64;
            let g = map.iterate(q as i64, x)? - x - p;
            if abs(g) < PERIOD_TOL {
                return Ok(Some((p as i64, q)));
            }
            let s = g.signum();
            if sign != 0.0 && s != sign {
                return Ok(Some((p as i64, q)));
            }
            sign = s;
        }
    }
    Ok(None)
}

/// Convergents `p/q`, `q <= q_max`, of the rotation number in `[0, 1)`.
///
/// Errors with [`Error::PeriodicOrbit`] when a periodic orbit of period
/// at most `q_max` is detected.
pub fn convergent_sequence(map: &CircleDiffeo, q_max: u64, x0: f64) -> Result<Vec<(i64, u64)>> {
    if q_max == 0 {
        return Err(Error::InvalidArgument("q_max must be at least 1".into()));
    }
    if let Some((p, q)) = detect_period(map, q_max, x0)? {
        return Err(Error::PeriodicOrbit { p, q });
    }
    let k = iterations_for(q_max);
    let mid = match rotation_bracket(map, x0, k)? {
        Some((lo, hi)) => 0.5 * (lo + hi),
        None => birkhoff_estimate(map, x0, k)?.value,
    };
    Ok(convergents(frac(mid), q_max))
}

/// Rotation number in `[0, 1)` accurate to the bracket width when available.
pub fn refined_rotation(map: &CircleDiffeo, x0: f64, n: u64) -> Result<(f64, f64)> {
    match rotation_bracket(map, x0, n)? {
        Some((lo, hi)) => Ok((frac(0.5 * (lo + hi)), hi - lo)),
        None => {
            let est = birkhoff_estimate(map, x0, n)?;
            Ok((est.value, est.error_bound))
        }
    }
}

/// Finds the Arnold parameter whose rotation number is `target`, by
/// bisection on the monotone map `alpha -> rho`.
pub fn tune_arnold(amplitude: f64, target: f64, iterations: u64) -> Result<(f64, CircleDiffeo)> {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        let map = catalog::arnold(mid, amplitude)?;
        let side = match rotation_bracket(&map, 0.0, iterations)? {
            Some((_, bhi)) if bhi <= target => -1,
            Some((blo, _)) if blo >= target => 1,
            Some(_) => 0,
            None => {
                let est = (map.iterate(iterations as i64, 0.0)? - 0.0) / iterations as f64;
                if est < target {
                    -1
                } else {
                    1
                }
            }
        };
        match side {
            -1 => lo = mid,
            1 => hi = mid,
            _ => return Ok((mid, map)),
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    let alpha = 0.5 * (lo + hi);
    Ok((alpha, catalog::arnold(alpha, amplitude)?))
}
