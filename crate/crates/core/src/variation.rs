//! Regularity functionals of interval functions: total, Zygmund and
//! quadratic variation, the Zygmund norm, and Hölder bounds.
//!
//! Sup-over-partition quantities are estimated from below on dyadic
//! grids. A function is evaluated once per grid; every functional at a
//! given depth reads the same samples.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::catalog::IntervalFunction;
use crate::error::{Error, Result};
use crate::num::{abs, powf};
use crate::quad::adaptive_simpson;

/// Relative growth per depth doubling that counts as divergence.
pub const DIVERGENCE_RATIO: f64 = 1.1;

/// Samples of `f` at `2^level + 1` equally spaced points of its domain.
pub fn dyadic_samples(f: &IntervalFunction, level: u32) -> Vec<f64> {
    let (a, b) = f.domain;
    let n = 1usize << level;
    let h = (b - a) / n as f64;
    (0..=n).map(|i| f.eval(if i == n { b } else { a + i as f64 * h })).collect()
}

fn grid_point(f: &IntervalFunction, level: u32, i: usize) -> f64 {
    let (a, b) = f.domain;
    let n = 1usize << level;
    if i == n {
        b
    } else {
        a + i as f64 * (b - a) / n as f64
    }
}

/// `sum |v_{i+1} - v_i|` computed run by run.
pub fn total_variation_of_values(v: &[f64]) -> f64 {
    // Summing whole monotone runs telescopes exactly inside each run.
    let mut total = 0.0;
    let mut start = v[0];
    let mut dir = 0.0;
    for w in v.windows(2) {
        let d = w[1] - w[0];
        if d == 0.0 {
            continue;
        }
        let s = d.signum();
        if dir != 0.0 && s != dir {
            total += abs(w[0] - start);
            start = w[0];
        }
        dir = s;
    }
    total + abs(v[v.len() - 1] - start)
}

/// `sum |f(x_{i+1}) - f(x_i)|` over the dyadic partition with `2^depth` cells.
pub fn total_variation_estimate(f: &IntervalFunction, depth: u32) -> f64 {
    total_variation_of_values(&dyadic_samples(f, depth))
}

/// Best partition sum over the dyadic tree: each node either stays a cell
/// or is replaced by the best partitions of its two halves.
///
/// `cell(level, i)` is the signed statistic of cell `i` at `level`.
fn tree_sup<S: FnMut(u32, usize) -> f64>(depth: u32, mut cell: S) -> f64 {
    let top = depth.saturating_sub(1);
    let mut best: Vec<f64> = (0..1usize << top).map(|i| abs(cell(top, i))).collect();
    for level in (0..top).rev() {
        best = (0..1usize << level)
            .map(|i| abs(cell(level, i)).max(best[2 * i] + best[2 * i + 1]))
            .collect();
    }
    best[0]
}

fn midpoint_defect(v: &[f64], depth: u32, level: u32, i: usize) -> f64 {
    let stride = 1usize << (depth - level);
    let lo = i * stride;
    v[lo] + v[lo + stride] - 2.0 * v[lo + stride / 2]
}

/// Dyadic lower bound for the Zygmund variation with cells down to level
/// `depth - 1`, so midpoints reach grid level `depth`.
pub fn zygmund_variation_estimate(f: &IntervalFunction, depth: u32) -> f64 {
    let depth = depth.max(1);
    let v = dyadic_samples(f, depth);
    tree_sup(depth, |level, i| midpoint_defect(&v, depth, level, i))
}

/// Uniform-level sums `sum_cells |f(a) + f(b) - 2 f(m)|` for levels `0..depth`.
pub fn zygmund_level_sums(f: &IntervalFunction, depth: u32) -> Vec<f64> {
    let v = dyadic_samples(f, depth);
    (0..depth)
        .map(|level| (0..1usize << level).map(|i| abs(midpoint_defect(&v, depth, level, i))).sum())
        .collect()
}

/// Exact sup of the Zygmund sum over all partitions whose points lie in `xs`.
pub fn zygmund_variation_on_grid(f: &IntervalFunction, xs: &[f64]) -> f64 {
    let fx: Vec<f64> = xs.iter().map(|&x| f.eval(x)).collect();
    let mut best = vec![f64::NEG_INFINITY; xs.len()];
    best[0] = 0.0;
    for j in 1..xs.len() {
        for i in 0..j {
            let term = abs(fx[i] + fx[j] - 2.0 * f.eval(0.5 * (xs[i] + xs[j])));
            best[j] = best[j].max(best[i] + term);
        }
    }
    best[xs.len() - 1]
}

/// Zygmund sum with the midpoint value replaced by the cell average.
pub fn avg_zygmund_variation(f: &IntervalFunction, depth: u32) -> Result<f64> {
    let depth = depth.max(1);
    let v = dyadic_samples(f, depth);
    let scale = v.iter().fold(0.0f64, |m, &x| m.max(abs(x))).max(1.0);
    let tol = 1e-13 * scale / (1u64 << depth) as f64;
    let top = depth - 1;
    let mut integrals = Vec::with_capacity(1 << top);
    for i in 0..1usize << top {
        let (lo, hi) = (grid_point(f, top, i), grid_point(f, top, i + 1));
        integrals.push(adaptive_simpson(|x| f.eval(x), lo, hi, tol)?);
    }
    let mut levels = vec![integrals];
    for _ in 0..top {
        let prev = levels.last().unwrap();
        let next: Vec<f64> = prev.chunks(2).map(|c| c[0] + c[1]).collect();
        levels.push(next);
    }
    levels.reverse();
    let width = f.width();
    Ok(tree_sup(depth, |level, i| {
        let stride = 1usize << (depth - level);
        let len = width / (1u64 << level) as f64;
        v[i * stride] + v[(i + 1) * stride] - 2.0 * levels[level as usize][i] / len
    }))
}

/// Exact sup of `sum (f(x_{i+1}) - f(x_i))^2` over partitions drawn from
/// the sample points, endpoints included.
///
/// Points inside a monotone stretch can always be moved to one of its ends
/// without decreasing the sum, so only turning points are kept; the
/// remaining dynamic program is solved with a Li Chao tree.
pub fn quadratic_variation_of_values(v: &[f64]) -> f64 {
    let mut pts = Vec::with_capacity(v.len());
    pts.push(v[0]);
    let mut dir = 0.0;
    for w in v.windows(2) {
        let d = w[1] - w[0];
        if d == 0.0 {
            continue;
        }
        let s = d.signum();
        if dir != 0.0 && s != dir {
            pts.push(w[0]);
        }
        dir = s;
    }
    pts.push(v[v.len() - 1]);
    if pts.len() == 2 {
        let d = pts[1] - pts[0];
        return d * d;
    }
    // best[j] = max_i best[i] + (p_j - p_i)^2 = p_j^2 + max_i (-2 p_i p_j + best[i] + p_i^2)
    let mut keys = pts.clone();
    keys.sort_by(|a, b| a.total_cmp(b));
    keys.dedup();
    let mut tree = LiChao::new(keys);
    tree.insert(-2.0 * pts[0], pts[0] * pts[0]);
    let mut last = 0.0;
    for &p in &pts[1..] {
        last = tree.query(p) + p * p;
        tree.insert(-2.0 * p, last + p * p);
    }
    last
}

/// Upper envelope of lines over a fixed, sorted set of query points.
struct LiChao {
    keys: Vec<f64>,
    lines: Vec<Option<(f64, f64)>>,
}

impl LiChao {
    fn new(keys: Vec<f64>) -> Self {
        let n = keys.len();
        LiChao { keys, lines: vec![None; 4 * n] }
    }

    fn insert(&mut self, m: f64, c: f64) {
        let n = self.keys.len();
        self.insert_at(1, 0, n - 1, (m, c));
    }

    fn insert_at(&mut self, node: usize, lo: usize, hi: usize, mut line: (f64, f64)) {
        let Some(mut cur) = self.lines[node] else {
            self.lines[node] = Some(line);
            return;
        };
        let mid = (lo + hi) / 2;
        let at = |l: (f64, f64), x: f64| l.0 * x + l.1;
        let xm = self.keys[mid];
        if at(line, xm) > at(cur, xm) {
            core::mem::swap(&mut line, &mut cur);
            self.lines[node] = Some(cur);
        }
        if lo == hi {
            return;
        }
        if at(line, self.keys[lo]) > at(cur, self.keys[lo]) {
            self.insert_at(2 * node, lo, mid, line);
        } else if at(line, self.keys[hi]) > at(cur, self.keys[hi]) {
            self.insert_at(2 * node + 1, mid + 1, hi, line);
        }
    }

    fn query(&self, x: f64) -> f64 {
        let mut pos = self.keys.partition_point(|&k| k < x);
        pos = pos.min(self.keys.len() - 1);
        let (mut node, mut lo, mut hi) = (1, 0, self.keys.len() - 1);
        let mut best = f64::NEG_INFINITY;
        loop {
            if let Some((m, c)) = self.lines[node] {
                best = best.max(m * x + c);
            }
            if lo == hi {
                return best;
            }
            let mid = (lo + hi) / 2;
            if pos <= mid {
                node *= 2;
                hi = mid;
            } else {
                node = 2 * node + 1;
                lo = mid + 1;
            }
        }
    }
}

/// Quadratic variation on a grid of `2^resolution` cells.
///
/// Errors when some cell's midpoint value falls outside the range of its
/// endpoint values, which signals an extremum the grid does not resolve.
pub fn quadratic_variation(f: &IntervalFunction, resolution: u32) -> Result<f64> {
    let v = dyadic_samples(f, resolution);
    let fine = dyadic_samples(f, resolution + 1);
    let scale = v.iter().fold(0.0f64, |m, &x| m.max(abs(x))).max(1e-300);
    let slack = 1e-12 * scale;
    for i in 0..v.len() - 1 {
        let (lo, hi) = if v[i] <= v[i + 1] { (v[i], v[i + 1]) } else { (v[i + 1], v[i]) };
        let m = fine[2 * i + 1];
        if m < lo - slack || m > hi + slack {
            return Err(Error::Unresolved {
                cell_start: grid_point(f, resolution, i),
                cell_end: grid_point(f, resolution, i + 1),
            });
        }
    }
    Ok(quadratic_variation_of_values(&fine))
}

/// Scaled second differences `|f(x+t) + f(x-t) - 2 f(x)| / t` at
/// `t = width / 2^k`, `k = 1..=scales`; entry `k - 1` is the max at scale `k`.
pub fn zygmund_norm_profile(f: &IntervalFunction, scales: u32) -> Vec<f64> {
    let scales = scales.max(1);
    let v = dyadic_samples(f, scales);
    let n = v.len() - 1;
    let width = f.width();
    (1..=scales)
        .map(|k| {
            let m = 1usize << (scales - k);
            let t = width / (1u64 << k) as f64;
            (m..=n - m).map(|i| abs(v[i + m] + v[i - m] - 2.0 * v[i])).fold(0.0, f64::max) / t
        })
        .collect()
}

/// Lower bound for the Zygmund norm over dyadic scales `1..=scales`.
pub fn zygmund_norm_estimate(f: &IntervalFunction, scales: u32) -> f64 {
    zygmund_norm_profile(f, scales).into_iter().fold(0.0, f64::max)
}

/// Hölder constant implied by a Zygmund bound `b`: the maximum over `n >= 0`
/// of `(|D| + n b) (t / 2^n)^(1 - alpha)`, where `D` is the difference
/// quotient at scale `t`.
pub fn holder_bound(b: f64, t: f64, base_difference: f64, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("alpha {alpha} must lie in (0, 1)")));
    }
    if b < 0.0 || t <= 0.0 {
        return Err(Error::InvalidArgument("need b >= 0 and t > 0".into()));
    }
    let d = abs(base_difference);
    let decay = powf(0.5, 1.0 - alpha);
    let mut scale = powf(t, 1.0 - alpha);
    let mut best: f64 = 0.0;
    for n in 0..100_000u32 {
        let term = (d + n as f64 * b) * scale;
        best = best.max(term);
        // Past the peak the terms decrease geometrically.
        if (n as f64) * (1.0 - decay) > 1.0 && term < best * 1e-16 {
            break;
        }
        scale *= decay;
    }
    Ok(best)
}

/// A functional value, or a divergence verdict with its growth per doubling.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Functional {
    Value(f64),
    Diverging { rate: f64, last: f64 },
}

impl Functional {
    pub fn is_finite(&self) -> bool {
        matches!(self, Functional::Value(_))
    }

    /// Last computed estimate either way.
    pub fn last(&self) -> f64 {
        match *self {
            Functional::Value(v) => v,
            Functional::Diverging { last, .. } => last,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Convergence {
    pub tv: bool,
    pub zv: bool,
    pub qv: bool,
    pub zyg_norm: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VariationReport {
    pub tv: Functional,
    pub zv: Functional,
    pub qv: f64,
    /// False when the grid left some extremum unresolved; `qv` is then a lower bound.
    pub qv_resolved: bool,
    pub zyg_norm: Functional,
    pub depth: u32,
    pub converged: Convergence,
    pub holder: Option<(f64, f64)>,
    /// Depths at which the sequences below were computed.
    pub depths: Vec<u32>,
    pub tv_sequence: Vec<f64>,
    pub zv_sequence: Vec<f64>,
    pub qv_sequence: Vec<f64>,
    pub zyg_sequence: Vec<f64>,
    /// `zv <= tv` and `qv <= 2 max|f| tv` at the finest depth, when `tv` is finite.
    pub bv_implications: Option<bool>,
    /// `zv` and `qv` finite, when the Zygmund norm is finite.
    pub zygmund_implications: Option<bool>,
}

fn judge(seq: &[f64]) -> (Functional, bool) {
    let last = *seq.last().unwrap();
    let growing = seq.windows(2).all(|w| w[0] > 0.0 && w[1] >= DIVERGENCE_RATIO * w[0]);
    if growing {
        let k = seq.len();
        return (Functional::Diverging { rate: seq[k - 1] / seq[k - 2], last }, false);
    }
    let prev = seq[seq.len() - 2];
    let converged = abs(last - prev) <= 0.01 * abs(last).max(1e-12);
    (Functional::Value(last), converged)
}

/// Depths `d/8, d/4, d/2, d`: three doublings ending at `d`.
pub fn doubling_depths(depth: u32) -> Vec<u32> {
    [depth >> 3, depth >> 2, depth >> 1, depth].iter().map(|&d| d.max(1)).collect()
}

/// Computes every functional along three depth doublings and checks the
/// implications between them.
pub fn classify_regularity(f: &IntervalFunction, depth: u32) -> Result<VariationReport> {
    if depth < 4 {
        return Err(Error::InvalidArgument("classification needs depth >= 4".into()));
    }
    let depths = doubling_depths(depth);
    let mut tv_s = Vec::new();
    let mut zv_s = Vec::new();
    let mut qv_s = Vec::new();
    let mut zyg_s = Vec::new();
    let mut qv_resolved = true;
    for &d in &depths {
        tv_s.push(total_variation_estimate(f, d));
        zv_s.push(zygmund_variation_estimate(f, d));
        zyg_s.push(zygmund_norm_estimate(f, d));
        let qv = match quadratic_variation(f, d) {
            Ok(q) => q,
            Err(Error::Unresolved { .. }) => {
                if d == depth {
                    qv_resolved = false;
                }
                quadratic_variation_of_values(&dyadic_samples(f, d + 1))
            }
            Err(e) => return Err(e),
        };
        qv_s.push(qv);
    }
    let (tv, tv_c) = judge(&tv_s);
    let (zv, zv_c) = judge(&zv_s);
    let (qv_f, qv_c) = judge(&qv_s);
    let (zyg_norm, zyg_c) = judge(&zyg_s);
    let qv = qv_f.last();

    let bv_implications = tv.is_finite().then(|| {
        let v = dyadic_samples(f, depth);
        let sup = v.iter().fold(0.0f64, |m, &x| m.max(abs(x)));
        let t = tv.last();
        let slack = 1e-9 * (1.0 + t);
        zv.last() <= t + slack && qv <= 2.0 * sup * t + slack
    });
    let zygmund_implications = zyg_norm.is_finite().then(|| zv.is_finite() && qv_f.is_finite());
    let holder = match zyg_norm {
        Functional::Value(b) => {
            let t = 0.5 * f.width();
            let v = dyadic_samples(f, depth);
            let m = v.len() / 2;
            let d = (0..v.len() - m).map(|i| abs(v[i + m] - v[i])).fold(0.0, f64::max) / t;
            Some((0.5, holder_bound(b, t, d, 0.5)?))
        }
        Functional::Diverging { .. } => None,
    };

    Ok(VariationReport {
        tv,
        zv,
        qv,
        qv_resolved,
        zyg_norm,
        depth,
        converged: Convergence { tv: tv_c, zv: zv_c, qv: qv_c, zyg_norm: zyg_c },
        holder,
        depths,
        tv_sequence: tv_s,
        zv_sequence: zv_s,
        qv_sequence: qv_s,
        zyg_sequence: zyg_s,
        bv_implications,
        zygmund_implications,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{example_function, Example};

    fn square() -> IntervalFunction {
        IntervalFunction::new("x^2", 0.0, 1.0, |x| x * x)
    }

    fn affine() -> IntervalFunction {
        IntervalFunction::new("affine", -2.0, 3.0, |x| 0.5 * x - 1.0)
    }

    #[test]
    fn square_level_sums() {
        let sums = zygmund_level_sums(&square(), 10);
        for (k, s) in sums.iter().enumerate() {
            let expect = powf(2.0, -(k as f64) - 1.0);
            assert!(abs(s - expect) < 1e-14, "level {k}: {s}");
        }
        assert!(abs(zygmund_variation_estimate(&square(), 10) - 0.5) < 1e-14);
    }

    #[test]
    fn square_average_variant() {
        let avg = avg_zygmund_variation(&square(), 8).unwrap();
        assert!(abs(avg - 1.0 / 3.0) < 1e-10, "{avg}");
        let zv = zygmund_variation_estimate(&square(), 8);
        assert!(avg <= zv && zv <= 2.0 * avg);
    }

    #[test]
    fn affine_functionals_vanish() {
        let f = affine();
        assert!(zygmund_variation_estimate(&f, 12) < 1e-12);
        assert!(zygmund_norm_estimate(&f, 12) < 1e-9);
        assert!(avg_zygmund_variation(&f, 8).unwrap() < 1e-10);
        assert!(abs(total_variation_estimate(&f, 6) - 2.5) < 1e-12);
    }

    #[test]
    fn square_zygmund_norm() {
        let z = zygmund_norm_estimate(&square(), 10);
        assert!(abs(z - 1.0) < 1e-12, "{z}");
    }

    #[test]
    fn ex1_total_variation_is_two() {
        let f = example_function(Example::Ex1, 0).unwrap();
        for d in 1..12 {
            assert_eq!(total_variation_estimate(&f, d), 2.0);
        }
    }

    #[test]
    fn ex1_profile_grows_like_root() {
        let f = example_function(Example::Ex1, 0).unwrap();
        let p = zygmund_norm_profile(&f, 18);
        for k in 6..16 {
            let r = p[k] / p[k - 1];
            assert!(r > 0.9 * core::f64::consts::SQRT_2 && r < 1.1 * core::f64::consts::SQRT_2, "scale {k}: {r}");
        }
    }

    #[test]
    fn qv_picks_best_subpartition() {
        // Up 1, down 0.1, up 1: skipping the dip gives 1.9^2.
        let v = [0.0, 1.0, 0.9, 1.9];
        assert!(abs(quadratic_variation_of_values(&v) - 3.61) < 1e-12);
        assert!(abs(quadratic_variation_of_values(&[0.0, 1.0, 0.0, 1.0]) - 3.0) < 1e-12);
        assert_eq!(quadratic_variation_of_values(&[2.0, 2.0, 2.0]), 0.0);
    }

    #[test]
    fn ex3_quadratic_variation() {
        let f = example_function(Example::Ex3, 12).unwrap();
        let qv = quadratic_variation(&f, 16).unwrap();
        let expect: f64 = (1..=12).map(|n| 2.0 / (n * n) as f64).sum();
        assert!(abs(qv - expect) < 1e-12, "{qv} vs {expect}");
    }

    #[test]
    fn unresolved_extremum_reported() {
        let f = IntervalFunction::new("bump", 0.0, 1.0, |x| -((x - 0.3) * (x - 0.3)));
        match quadratic_variation(&f, 1) {
            Err(Error::Unresolved { cell_start, cell_end }) => assert!(cell_start <= 0.3 && 0.3 <= cell_end),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn holder_examples() {
        assert!(abs(holder_bound(0.0, 1.0, 1.0, 0.5).unwrap() - 1.0) < 1e-15);
        let direct = (1..200).map(|n| (1.0 + n as f64) * powf(2.0, -(n as f64) / 2.0)).fold(1.0, f64::max);
        assert!(abs(holder_bound(1.0, 1.0, 1.0, 0.5).unwrap() - direct) < 1e-12);
        assert!(holder_bound(1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn classify_examples() {
        let ex1 = classify_regularity(&example_function(Example::Ex1, 0).unwrap(), 16).unwrap();
        assert_eq!(ex1.tv, Functional::Value(2.0));
        assert!(!ex1.zyg_norm.is_finite());
        assert_eq!(ex1.bv_implications, Some(true));
        let ex3 = classify_regularity(&example_function(Example::Ex3, 40).unwrap(), 16).unwrap();
        assert!(!ex3.zv.is_finite(), "{ex3:?}");
        assert!(ex3.qv > 1.0 && ex3.qv < 3.3);
    }
}
