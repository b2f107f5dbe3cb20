//! Cross ratios, their distortion under maps and iterates, and the
//! Koebe-type log ratio with its split into a Zygmund part and a
//! quadratic part.

use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::catalog::IntervalFunction;
use crate::error::{Error, Result};
use crate::maps::{Arc, CircleDiffeo, RealMap};
use crate::num::{abs, ln, ln_1p};
use crate::quad::average;
use crate::variation::{dyadic_samples, quadratic_variation, quadratic_variation_of_values, zygmund_variation_estimate};

/// Minimal spacing of a usable tuple.
pub const DEGENERATE_SPACING: f64 = 1e-14;
/// Tolerance for averages of `log h'`.
pub const LOG_AVERAGE_TOL: f64 = 1e-10;
/// Dyadic depth of the variation bounds attached to a breakdown.
pub const BOUND_DEPTH: u32 = 12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FourTuple {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub is_standard: bool,
}

impl FourTuple {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<FourTuple> {
        let gaps = [b - a, c - b, d - c];
        if gaps.iter().any(|g| !(*g >= DEGENERATE_SPACING)) {
            return Err(Error::DegenerateTuple);
        }
        let mean = (d - a) / 3.0;
        let is_standard = gaps.iter().all(|g| abs(g - mean) <= 1e-12 * mean);
        Ok(FourTuple { a, b, c, d, is_standard })
    }

    /// `(a, a + s, a + 2s, a + 3s)`.
    pub fn standard(a: f64, step: f64) -> Result<FourTuple> {
        FourTuple::new(a, a + step, a + 2.0 * step, a + 3.0 * step)
    }

    pub fn points(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }
}

/// `(cr_first, cr_second)`; they satisfy `cr_first = 1 + 1/cr_second`.
pub fn cross_ratios(t: &FourTuple) -> (f64, f64) {
    let FourTuple { a, b, c, d, .. } = *t;
    let first = (d - b) * (c - a) / ((c - b) * (d - a));
    let second = (c - b) * (d - a) / ((b - a) * (d - c));
    (first, second)
}

fn cr_second_raw(a: f64, b: f64, c: f64, d: f64) -> f64 {
    (c - b) * (d - a) / ((b - a) * (d - c))
}

/// `cr_second(h(t)) / cr_second(t)`.
pub fn distortion_under_map(h: &dyn RealMap, t: &FourTuple) -> Result<f64> {
    let p = t.points();
    let v = p.map(|x| h.value(x));
    for i in 0..3 {
        if !(v[i + 1] > v[i]) {
            return Err(Error::NotMonotone { at: p[i + 1] });
        }
    }
    Ok(cr_second_raw(v[0], v[1], v[2], v[3]) / cr_second(t))
}

fn cr_second(t: &FourTuple) -> f64 {
    cross_ratios(t).1
}

fn positive_derivative(h: &dyn RealMap, x: f64) -> Result<f64> {
    match h.derivative_at(x) {
        None => Err(Error::NotC1 { label: "map without derivative".into() }),
        Some(d) if d > 0.0 => Ok(d),
        Some(d) => Err(Error::NotDiffeomorphism { reason: alloc::format!("derivative {d} at {x}") }),
    }
}

/// `log h'(x) + log h'(y) - 2 log [h']_{xy}`, with `[h']_{xy}` the
/// increment quotient `(h(y) - h(x)) / (y - x)`.
pub fn koebe_log_ratio(h: &dyn RealMap, x: f64, y: f64) -> Result<f64> {
    if !(y > x) {
        return Err(Error::InvalidArgument("need x < y".into()));
    }
    let dx = positive_derivative(h, x)?;
    let dy = positive_derivative(h, y)?;
    let avg = (h.value(y) - h.value(x)) / (y - x);
    if !(avg > 0.0) {
        return Err(Error::NotMonotone { at: x });
    }
    Ok(ln(dx) + ln(dy) - 2.0 * ln(avg))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DistortionBreakdown {
    pub log_koebe: f64,
    /// `log h'x + log h'y - 2 [log h']_{xy}`.
    pub term_a: f64,
    /// `log [h']_{xy} - [log h']_{xy}`, non-negative by Jensen.
    pub term_b: f64,
    pub zv_bound: f64,
    pub qv_bound: f64,
    /// `log_koebe - (term_a - 2 term_b)`.
    pub residual: f64,
    /// `sup h' / inf h'` over a grid of `[x, y]`.
    pub derivative_ratio: f64,
}

impl DistortionBreakdown {
    /// Constant `K2` in `|log_koebe| <= zv + K2 qv`.
    pub fn k2(&self) -> f64 {
        quadratic_constant(self.derivative_ratio)
    }

    pub fn budget(&self) -> f64 {
        self.zv_bound + self.k2() * self.qv_bound
    }
}

/// `B(delta) R^2` with `delta = 1/R - 1`: twice the Lemma-type bound on
/// `log [h'] - [log h']` per unit of quadratic variation.
pub fn quadratic_constant(derivative_ratio: f64) -> f64 {
    let r = derivative_ratio.max(1.0);
    delta_fn(1.0 / r - 1.0) * r * r
}

/// Splits the Koebe log ratio of `h` on `[x, y]` and attaches variation
/// bounds for `log h'` on the same interval.
pub fn decompose_ab(h: &dyn RealMap, x: f64, y: f64) -> Result<DistortionBreakdown> {
    let log_koebe = koebe_log_ratio(h, x, y)?;
    let lx = ln(positive_derivative(h, x)?);
    let ly = ln(positive_derivative(h, y)?);
    let avg = (h.value(y) - h.value(x)) / (y - x);
    let log_avg = average(|s| ln(h.derivative_at(s).unwrap_or(f64::NAN)), x, y, LOG_AVERAGE_TOL)?;
    if log_avg.is_nan() {
        return Err(Error::Quadrature { a: x, b: y });
    }
    let term_a = lx + ly - 2.0 * log_avg;
    let term_b = ln(avg) - log_avg;

    let logd = log_derivative_on(h, x, y);
    let zv_bound = zygmund_variation_estimate(&logd, BOUND_DEPTH);
    let qv_bound = qv_lower(&logd, BOUND_DEPTH);
    let samples = dyadic_samples(&logd, BOUND_DEPTH);
    let (lo, hi) = samples.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, u), &v| (l.min(v), u.max(v)));
    Ok(DistortionBreakdown {
        log_koebe,
        term_a,
        term_b,
        zv_bound,
        qv_bound,
        residual: log_koebe - (term_a - 2.0 * term_b),
        derivative_ratio: crate::num::exp(hi - lo),
    })
}

fn log_derivative_on(h: &dyn RealMap, x: f64, y: f64) -> IntervalFunction {
    // Tabulated on the finest grid the bounds read, so no sample is interpolated.
    let n = 2usize << BOUND_DEPTH;
    let xs: Vec<f64> = (0..=n).map(|i| if i == n { y } else { x + (y - x) * i as f64 / n as f64 }).collect();
    let ys = xs.iter().map(|&s| ln(h.derivative_at(s).unwrap_or(f64::NAN))).collect();
    IntervalFunction::piecewise_linear("log h'", xs, ys).expect("increasing knots")
}

fn qv_lower(f: &IntervalFunction, depth: u32) -> f64 {
    match quadratic_variation(f, depth) {
        Ok(q) => q,
        Err(_) => quadratic_variation_of_values(&dyadic_samples(f, depth + 1)),
    }
}

/// `Delta(eps) = 2 (eps - log(1 + eps)) / eps^2`, equal to 1 at 0.
pub fn delta_fn(eps: f64) -> f64 {
    if abs(eps) < 1e-3 {
        // Alternating series sum_j 2 (-1)^j eps^j / (j + 2).
        let mut sum = 0.0;
        let mut p = 1.0;
        for j in 0..12 {
            sum += 2.0 * p / (j as f64 + 2.0);
            p *= -eps;
        }
        return sum;
    }
    2.0 * (eps - ln_1p(eps)) / (eps * eps)
}

/// `(Delta(eps), B(delta_floor))`; `Delta` is decreasing, so `B = Delta(delta_floor)`.
pub fn delta_and_bound(eps: f64, delta_floor: f64) -> Result<(f64, f64)> {
    if !(eps > -1.0) {
        return Err(Error::InvalidArgument(alloc::format!("eps {eps} must exceed -1")));
    }
    if !(delta_floor > -1.0 && delta_floor <= eps) {
        return Err(Error::InvalidArgument(alloc::format!("floor {delta_floor} must lie in (-1, {eps}]")));
    }
    Ok((delta_fn(eps), delta_fn(delta_floor)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterateDistortion {
    /// Koebe log ratio of `h^n` on `(t.a, t.d)`, from the product formula.
    pub measured: f64,
    /// Sum of the per-step ratios along the orbit of the pair.
    pub chain_sum: f64,
    pub budget: f64,
    pub zv_total: f64,
    pub qv_total: f64,
    pub steps: Vec<DistortionBreakdown>,
}

/// Distortion of `h^n` on the outer pair of `t`, against the budget
/// `sum zv + K2 sum qv` accumulated over the disjoint images of `arcs[0]`.
pub fn iterate_distortion_bound(h: &CircleDiffeo, n: usize, t: &FourTuple, arcs: &[Arc]) -> Result<IterateDistortion> {
    if arcs.len() < n || n == 0 {
        return Err(Error::InvalidArgument("need n >= 1 arcs".into()));
    }
    if !(arcs[0].contains(t.a) && arcs[0].contains(t.d)) {
        return Err(Error::NotContained);
    }
    for i in 0..n {
        for j in i + 1..n {
            if arcs[i].intersects(&arcs[j]) {
                return Err(Error::Overlap { i, j });
            }
        }
    }
    let (x, y) = (t.a, t.d);
    let dxn = h.iterate_derivative(n as u64, x)?;
    let dyn_ = h.iterate_derivative(n as u64, y)?;
    let (xn, yn) = (h.iterate(n as i64, x)?, h.iterate(n as i64, y)?);
    let measured = ln(dxn) + ln(dyn_) - 2.0 * ln((yn - xn) / (y - x));

    let mut steps = Vec::with_capacity(n);
    let (mut xi, mut yi) = (x, y);
    for _ in 0..n {
        steps.push(decompose_ab(h, xi, yi)?);
        xi = h.eval(xi);
        yi = h.eval(yi);
    }
    let chain_sum = steps.iter().map(|s| s.log_koebe).sum();
    let zv_total: f64 = steps.iter().map(|s| s.zv_bound).sum();
    let qv_total: f64 = steps.iter().map(|s| s.qv_bound).sum();
    let k2 = steps.iter().map(|s| s.k2()).fold(0.0, f64::max);
    Ok(IterateDistortion { measured, chain_sum, budget: zv_total + k2 * qv_total, zv_total, qv_total, steps })
}

/// Differences `T_k - T_{k+1}` of successive trapezoid averages of `f`
/// over its domain, `k = 0..depth`.
pub fn successive_average_defects(f: &IntervalFunction, depth: u32) -> Vec<f64> {
    let v = dyadic_samples(f, depth + 1);
    let top = depth + 1;
    let trapezoid = |k: u32| {
        let stride = 1usize << (top - k);
        let cells = 1usize << k;
        let s: f64 = (0..cells).map(|i| 0.5 * (v[i * stride] + v[(i + 1) * stride])).sum();
        s / cells as f64
    };
    let t: Vec<f64> = (0..=top).map(trapezoid).collect();
    t.windows(2).map(|w| w[0] - w[1]).collect()
}

fn log_cr_distortion(f: &CircleDiffeo, a: f64, b: f64, c: f64, d: f64) -> f64 {
    let (fa, fb, fc, fd) = (f.eval(a), f.eval(b), f.eval(c), f.eval(d));
    ln(cr_second_raw(fa, fb, fc, fd) / cr_second_raw(a, b, c, d))
}

/// Uniform unit sample from 53 random bits.
fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Level-`k` sums `sum_i sup_{b,c} log(cr_second(f images) / cr_second)`
/// over the dyadic circle partition into `2^k` cells, `k = 1..=depth`.
///
/// Inner sups use the trisection pair plus `inner_samples` random pairs per
/// cell; the pairs for a given cell do not depend on `inner_samples`, so
/// more samples only add candidates.
pub fn crd_level_sums(f: &CircleDiffeo, depth: u32, inner_samples: usize, seed: u64) -> Vec<f64> {
    (1..=depth)
        .map(|k| {
            let cells = 1u64 << k;
            let len = 1.0 / cells as f64;
            (0..cells)
                .map(|i| {
                    let a = i as f64 * len;
                    let d = a + len;
                    let mut best = log_cr_distortion(f, a, a + len / 3.0, a + 2.0 * len / 3.0, d);
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(((k as u64) << 40) | i);
                    for _ in 0..inner_samples {
                        let (u, v) = (unit(&mut rng), unit(&mut rng));
                        let (u, v) = if u < v { (u, v) } else { (v, u) };
                        let (b, c) = (a + u * len, a + v * len);
                        if b - a < DEGENERATE_SPACING || c - b < DEGENERATE_SPACING || d - c < DEGENERATE_SPACING {
                            continue;
                        }
                        best = best.max(log_cr_distortion(f, a, b, c, d));
                    }
                    best
                })
                .sum()
        })
        .collect()
}

/// Lower-bound estimate of the cross-ratio distortion variation of `f`:
/// the best level sum over dyadic partitions of depth `1..=depth`.
pub fn crd_variation_estimate(f: &CircleDiffeo, depth: u32, inner_samples: usize, seed: u64) -> f64 {
    crd_level_sums(f, depth.max(1), inner_samples, seed).into_iter().fold(f64::NEG_INFINITY, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{arnold, make_denjoy, piecewise_mobius, rigid};

    struct Square;
    impl RealMap for Square {
        fn value(&self, x: f64) -> f64 {
            x * x
        }
        fn derivative_at(&self, x: f64) -> Option<f64> {
            Some(2.0 * x)
        }
    }

    struct Mobius;
    impl RealMap for Mobius {
        fn value(&self, x: f64) -> f64 {
            x / (1.0 + x)
        }
        fn derivative_at(&self, x: f64) -> Option<f64> {
            Some(1.0 / ((1.0 + x) * (1.0 + x)))
        }
    }

    struct ExpSlope(f64);
    impl RealMap for ExpSlope {
        fn value(&self, x: f64) -> f64 {
            (crate::num::exp(self.0 * x) - 1.0) / self.0
        }
        fn derivative_at(&self, x: f64) -> Option<f64> {
            Some(crate::num::exp(self.0 * x))
        }
    }

    #[test]
    fn standard_and_example_ratios() {
        let t = FourTuple::new(0.0, 1.0, 2.0, 3.0).unwrap();
        assert!(t.is_standard);
        assert_eq!(cross_ratios(&t), (4.0 / 3.0, 3.0));
        let (f, s) = cross_ratios(&FourTuple::new(0.0, 1.0, 2.0, 4.0).unwrap());
        assert_eq!((f, s), (1.5, 2.0));
        assert!(!FourTuple::new(0.0, 1.0, 2.0, 4.0).unwrap().is_standard);
    }

    #[test]
    fn degenerate_rejected() {
        assert_eq!(FourTuple::new(0.0, 1e-15, 1.0, 2.0), Err(Error::DegenerateTuple));
        assert_eq!(FourTuple::new(0.0, 2.0, 1.0, 3.0), Err(Error::DegenerateTuple));
    }

    #[test]
    fn mobius_preserves_cross_ratio() {
        let t = FourTuple::new(0.0, 1.0, 2.0, 3.0).unwrap();
        assert!(abs(distortion_under_map(&Mobius, &t).unwrap() - 1.0) < 1e-14);
    }

    #[test]
    fn square_distortion_matches_direct_evaluation() {
        let t = FourTuple::new(1.0, 2.0, 3.0, 4.0).unwrap();
        let direct = ((9.0 - 4.0) * (16.0 - 1.0) / ((4.0 - 1.0) * (16.0 - 9.0))) / 3.0;
        assert!(abs(distortion_under_map(&Square, &t).unwrap() - direct) < 1e-15);
        let k = koebe_log_ratio(&Square, 1.0, 2.0).unwrap();
        // h'(1) = 2, h'(2) = 4, increment quotient 3.
        assert!(abs(k - ln(8.0 / 9.0)) < 1e-15);
    }

    #[test]
    fn decreasing_map_rejected() {
        let f = crate::catalog::IntervalFunction::new("neg", 0.0, 4.0, |x| -x);
        let t = FourTuple::new(0.0, 1.0, 2.0, 3.0).unwrap();
        assert!(matches!(distortion_under_map(&f, &t), Err(Error::NotMonotone { .. })));
    }

    #[test]
    fn exponential_slope_has_no_zygmund_part() {
        let b = decompose_ab(&ExpSlope(0.7), 0.0, 1.0).unwrap();
        assert!(abs(b.term_a) < 1e-9, "{b:?}");
        assert!(b.term_b > 0.0);
        assert!(abs(b.residual) < 1e-8);
        assert!(abs(b.term_b) * 2.0 <= b.k2() * b.qv_bound);
    }

    #[test]
    fn square_reassembles() {
        let b = decompose_ab(&Square, 1.0, 2.0).unwrap();
        assert!(abs(b.term_a - 2.0 * b.term_b - ln(8.0 / 9.0)) < 1e-8);
        assert!(abs(b.term_a) <= b.zv_bound + 1e-9);
    }

    #[test]
    fn delta_values() {
        assert!(abs(delta_fn(1e-9) - 1.0) < 1e-9);
        assert!(abs(delta_fn(1.0) - 2.0 * (1.0 - ln(2.0))) < 1e-15);
        let (v, b) = delta_and_bound(-0.5, -0.5).unwrap();
        assert!(abs(v - 8.0 * (ln(2.0) - 0.5)) < 1e-14);
        assert_eq!(v, b);
        assert!(delta_and_bound(-1.0, -0.5).is_err());
        // The series and closed form agree across the switch.
        let e = 0.999e-3;
        assert!(abs(delta_fn(e) - 2.0 * (e - ln_1p(e)) / (e * e)) < 1e-9);
    }

    #[test]
    fn rigid_iterate_has_zero_budget() {
        let f = rigid(0.3819660112501051);
        let arc = Arc::new(0.1, 0.12).unwrap();
        let arcs: Vec<Arc> = (0..5).map(|i| arc.image_n(&f, i).unwrap()).collect();
        let t = FourTuple::new(0.1, 0.105, 0.11, 0.12).unwrap();
        let r = iterate_distortion_bound(&f, 5, &t, &arcs).unwrap();
        assert!(abs(r.measured) < 1e-12 && r.budget < 1e-12);
    }

    #[test]
    fn overlapping_arcs_rejected() {
        let f = rigid(0.01);
        let arc = Arc::new(0.1, 0.2).unwrap();
        let arcs: Vec<Arc> = (0..3).map(|i| arc.image_n(&f, i).unwrap()).collect();
        let t = FourTuple::new(0.1, 0.12, 0.15, 0.2).unwrap();
        assert!(matches!(iterate_distortion_bound(&f, 3, &t, &arcs), Err(Error::Overlap { i: 0, j: 1 })));
    }

    #[test]
    fn denjoy_wandering_distortion_within_budget() {
        let d = make_denjoy(0.618_033_988_749_894_8, 200, 0.5).unwrap();
        let arc = d.wandering_arc;
        let arcs: Vec<Arc> = (0..30).map(|i| arc.image_n(&d.base, i).unwrap()).collect();
        let (s, l) = (arc.start(), arc.length());
        let t = FourTuple::new(s, s + l / 3.0, s + 2.0 * l / 3.0, s + l).unwrap();
        let r = iterate_distortion_bound(&d.base, 30, &t, &arcs).unwrap();
        assert!(abs(r.measured - r.chain_sum) < 1e-8, "{} vs {}", r.measured, r.chain_sum);
        assert!(abs(r.measured) <= r.budget && r.budget.is_finite());
    }

    #[test]
    fn crd_zero_for_isometries_and_mobius_pieces() {
        assert!(abs(crd_variation_estimate(&rigid(0.3), 6, 8, 1)) < 1e-10);
        let m = piecewise_mobius(2.5).unwrap();
        assert!(abs(crd_variation_estimate(&m, 6, 8, 1)) < 1e-10);
    }

    #[test]
    fn crd_monotone_in_samples_and_depth() {
        let f = arnold(0.618, 0.5).unwrap();
        let a = crd_variation_estimate(&f, 6, 4, 7);
        let b = crd_variation_estimate(&f, 6, 16, 7);
        let c = crd_variation_estimate(&f, 8, 16, 7);
        assert!(a <= b && b <= c && a > 0.0);
        assert!(abs(c - b) <= 0.05 * b);
    }

    #[test]
    fn successive_defects_follow_level_sums() {
        let f = crate::catalog::IntervalFunction::new("cubic", 0.0, 1.0, |x| x * x * x - x);
        let n = successive_average_defects(&f, 8);
        let sums = crate::variation::zygmund_level_sums(&f, 9);
        for (k, nk) in n.iter().enumerate() {
            assert!(abs(*nk) <= sums[k] / (4u64 << k) as f64 + 1e-15);
        }
    }
}
