//! Orbits of points and arcs: limit-set approximations, wandering-interval
//! detection and the discretised semi-conjugacy to a rigid rotation.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::maps::{Arc, CircleDiffeo};
use crate::num::{abs, circle_delta, circle_dist, floor, frac};
use crate::rotation::{detect_period, rotation_bracket};

/// A gap between consecutive knots is a plateau when it exceeds
/// `PLATEAU_DOMAIN_GAP / n` and its target gap is below
/// `PLATEAU_FLATNESS` times its length.
pub const PLATEAU_DOMAIN_GAP: f64 = 10.0;
pub const PLATEAU_FLATNESS: f64 = 0.125;
/// Orbit gaps below `DENSE_GAP / n` count as dense.
pub const DENSE_GAP: f64 = 8.0;
/// Knot tolerance of the semi-conjugacy, in units of `1 / n`.
pub const KNOT_TOL: f64 = 4.0;
/// Largest period searched before declaring evidence of irrational rotation.
pub const PERIOD_SEARCH: u64 = 1000;
/// Minimal orbit length behind the rotation bracket of a semi-conjugacy.
pub const BRACKET_ITERATES: u64 = 1_000_000;
/// Iterates used to confirm a wandering candidate.
pub const CONFIRM_ITERATES: usize = 200;

/// `f^k(arc)` for `k = 1..=n`.
pub fn interval_orbit(map: &CircleDiffeo, arc: &Arc, n: usize) -> Result<Vec<Arc>> {
    let mut a = arc.start();
    let mut b = a + arc.length();
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        a = map.eval(a);
        b = map.eval(b);
        out.push(Arc::from_lift(a, b)?);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WanderingVerdict {
    WanderingUpTo(usize),
    OverlapAt(usize, usize),
    Contracted { min_length: f64 },
}

/// Checks `f^i(arc)`, `0 <= i <= n`, for pairwise separation by more than `tol`.
///
/// The first overlapping pair is the one with the smallest `j`, then the
/// smallest `i < j`.
pub fn wandering_verdict(map: &CircleDiffeo, arc: &Arc, n: usize, tol: f64) -> Result<WanderingVerdict> {
    if n < 2 {
        return Err(Error::InvalidArgument("need n >= 2".into()));
    }
    let mut arcs = Vec::with_capacity(n + 1);
    arcs.push(*arc);
    arcs.extend(interval_orbit(map, arc, n)?);
    for j in 1..=n {
        for i in 0..j {
            if !arcs[i].separated_from(&arcs[j], tol) {
                return Ok(WanderingVerdict::OverlapAt(i, j));
            }
        }
    }
    let min_length = arcs.iter().map(Arc::length).fold(f64::INFINITY, f64::min);
    if min_length <= tol && detect_period(map, n as u64, arc.start())?.is_none() {
        return Ok(WanderingVerdict::Contracted { min_length });
    }
    Ok(WanderingVerdict::WanderingUpTo(n))
}

/// Points of `[0, 1)` sorted, with the largest complementary arc.
pub fn max_circle_gap(points: &[f64]) -> f64 {
    if points.is_empty() {
        return 1.0;
    }
    let mut p: Vec<f64> = points.iter().map(|&x| frac(x)).collect();
    p.sort_by(f64::total_cmp);
    let wrap = p[0] + 1.0 - p[p.len() - 1];
    p.windows(2).map(|w| w[1] - w[0]).fold(wrap, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrbitClass {
    DenseLike,
    CantorLike,
    PeriodicLike(u64),
    Undecided,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrbitProfile {
    /// `f^k(x0) mod 1`, `k = 0..n`.
    pub points: Vec<f64>,
    pub max_gap: f64,
    /// `(m, max gap of the first m points)` for `m = n/4, n/2, n`.
    pub gap_trend: Vec<(usize, f64)>,
    pub periodicity: Option<(i64, u64)>,
    pub class: OrbitClass,
}

/// Orbit of `x0` with gap statistics; periods up to `q_max` are searched.
pub fn omega_gap_profile(map: &CircleDiffeo, x0: f64, n: usize, q_max: u64) -> Result<OrbitProfile> {
    if n < 10 {
        return Err(Error::InvalidArgument("need n >= 10".into()));
    }
    let points = forward_orbit(map, x0, n)?;
    let gap_trend: Vec<(usize, f64)> = [n / 4, n / 2, n].iter().map(|&m| (m, max_circle_gap(&points[..m]))).collect();
    let max_gap = gap_trend[2].1;
    let periodicity = detect_period(map, q_max, x0)?;
    let nf = n as f64;
    let class = if let Some((_, q)) = periodicity {
        OrbitClass::PeriodicLike(q)
    } else if max_gap < DENSE_GAP / nf {
        OrbitClass::DenseLike
    } else if abs(gap_trend[1].1 - max_gap) <= 0.05 * max_gap {
        OrbitClass::CantorLike
    } else {
        OrbitClass::Undecided
    };
    Ok(OrbitProfile { points, max_gap, gap_trend, periodicity, class })
}

/// `f^k(x0) mod 1` for `k = 0..n`.
pub fn forward_orbit(map: &CircleDiffeo, x0: f64, n: usize) -> Result<Vec<f64>> {
    let mut x = x0;
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        out.push(frac(x));
        x = map.eval(x);
        if !x.is_finite() {
            return Err(Error::NotDiffeomorphism { reason: "orbit left the reals".into() });
        }
    }
    Ok(out)
}

/// `f^-k(x0) mod 1` for `k = 0..n`.
pub fn backward_orbit(map: &CircleDiffeo, x0: f64, n: usize) -> Result<Vec<f64>> {
    let mut x = x0;
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        out.push(frac(x));
        x = map.inverse_eval(x)?;
    }
    Ok(out)
}

/// Tail `k in [n/2, n)` of the forward orbit, standing in for the omega-limit set.
pub fn omega_limit_approx(map: &CircleDiffeo, x0: f64, n: usize) -> Result<Vec<f64>> {
    let mut orbit = forward_orbit(map, x0, n)?;
    Ok(orbit.split_off(n / 2))
}

/// Tail of the backward orbit, standing in for the alpha-limit set.
pub fn alpha_limit_approx(map: &CircleDiffeo, x0: f64, n: usize) -> Result<Vec<f64>> {
    let mut orbit = backward_orbit(map, x0, n)?;
    Ok(orbit.split_off(n / 2))
}

/// Hausdorff distance between finite subsets of the circle.
pub fn circle_hausdorff(a: &[f64], b: &[f64]) -> f64 {
    fn directed(from: &[f64], to: &[f64]) -> f64 {
        let mut sorted: Vec<f64> = to.iter().map(|&x| frac(x)).collect();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        from.iter()
            .map(|&x| {
                let x = frac(x);
                let i = sorted.partition_point(|&s| s < x);
                circle_dist(x, sorted[i % n]).min(circle_dist(x, sorted[(i + n - 1) % n]))
            })
            .fold(0.0, f64::max)
    }
    if a.is_empty() || b.is_empty() {
        return 1.0;
    }
    directed(a, b).max(directed(b, a))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Plateau {
    /// Arc between two consecutive knots.
    pub arc: Arc,
    pub target_gap: f64,
    /// `target_gap / arc length`.
    pub flatness: f64,
}

/// Order isomorphism between the orbit of `anchor` and the rotation orbit,
/// extended piecewise linearly to a monotone degree-one map.
#[derive(Clone, Debug, PartialEq)]
pub struct SemiConjugacy {
    pub anchor: f64,
    pub alpha: f64,
    /// Knot positions in `[0, 1)`, increasing.
    pub knots: Vec<f64>,
    /// Targets unwrapped to be non-decreasing, `targets[i]` over `knots[i]`.
    pub targets: Vec<f64>,
    /// Orbit index of each sorted knot.
    pub indices: Vec<usize>,
    pub plateaus: Vec<Plateau>,
}

impl SemiConjugacy {
    /// The interpolant `h`, satisfying `h(x + 1) = h(x) + 1`.
    pub fn eval(&self, x: f64) -> f64 {
        let w = floor(x);
        let u = x - w;
        let n = self.knots.len();
        let i = self.knots.partition_point(|&k| k <= u);
        let (x0, y0, x1, y1) = if i == 0 {
            (self.knots[n - 1] - 1.0, self.targets[n - 1] - 1.0, self.knots[0], self.targets[0])
        } else if i == n {
            (self.knots[n - 1], self.targets[n - 1], self.knots[0] + 1.0, self.targets[0] + 1.0)
        } else {
            (self.knots[i - 1], self.targets[i - 1], self.knots[i], self.targets[i])
        };
        let t = if x1 > x0 { (u - x0) / (x1 - x0) } else { 0.0 };
        w + y0 + t * (y1 - y0)
    }

    /// Largest `|h(f(x)) - h(x) - alpha|` on the circle over `samples` midpoints.
    pub fn conjugacy_defect(&self, map: &CircleDiffeo, samples: usize) -> f64 {
        (0..samples)
            .map(|i| {
                let x = (i as f64 + 0.5) / samples as f64;
                abs(circle_delta(self.eval(x) + self.alpha, self.eval(map.eval(x))))
            })
            .fold(0.0, f64::max)
    }

    /// Same defect on the knots whose image is again a knot (zero up to rounding).
    pub fn knot_defect(&self, map: &CircleDiffeo) -> f64 {
        let last = self.knots.len() - 1;
        self.knots
            .iter()
            .zip(&self.targets)
            .zip(&self.indices)
            .filter(|(_, &k)| k != last)
            .map(|((&x, &t), _)| abs(circle_delta(t + self.alpha, self.eval(map.eval(x)))))
            .fold(0.0, f64::max)
    }

    /// Smallest ratio of target gap to knot gap.
    pub fn min_flatness(&self) -> f64 {
        let n = self.knots.len();
        (0..n)
            .map(|i| {
                let (dx, dt) = self.gap(i);
                dt / dx
            })
            .fold(f64::INFINITY, f64::min)
    }

    fn gap(&self, i: usize) -> (f64, f64) {
        let n = self.knots.len();
        if i + 1 < n {
            (self.knots[i + 1] - self.knots[i], self.targets[i + 1] - self.targets[i])
        } else {
            (self.knots[0] + 1.0 - self.knots[n - 1], self.targets[0] + 1.0 - self.targets[n - 1])
        }
    }
}

/// Builds the semi-conjugacy from `n` orbit points of `x0`.
///
/// The rotation number is the midpoint of a bracket from the same orbit
/// (extended to at least `BRACKET_ITERATES`), so the targets `{k alpha}`
/// are ordered exactly like the orbit.
pub fn build_semiconjugacy(map: &CircleDiffeo, x0: f64, n: usize) -> Result<SemiConjugacy> {
    if n < 10 {
        return Err(Error::InvalidArgument("need n >= 10".into()));
    }
    if let Some((p, q)) = detect_period(map, (n as u64).min(PERIOD_SEARCH), x0)? {
        return Err(Error::PeriodicOrbit { p, q });
    }
    let (lo, hi) = rotation_bracket(map, x0, (n as u64).max(BRACKET_ITERATES))?
        .ok_or_else(|| Error::InvalidArgument("inconsistent rotation bracket".into()))?;
    let alpha = frac(0.5 * (lo + hi));
    let orbit = forward_orbit(map, x0, n)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| orbit[i].total_cmp(&orbit[j]));
    let knots: Vec<f64> = order.iter().map(|&k| orbit[k]).collect();
    let raw: Vec<f64> = order.iter().map(|&k| crate::num::frac_mul(k as i64, alpha)).collect();
    let mut targets = Vec::with_capacity(n);
    let mut wraps = 0.0;
    for (i, &t) in raw.iter().enumerate() {
        if i > 0 && t < raw[i - 1] {
            wraps += 1.0;
        }
        targets.push(t + wraps);
    }
    // Anchor the lift so that the knot with the smallest target sits in [0, 1).
    let shift = floor(targets[0]);
    for t in &mut targets {
        *t -= shift;
    }
    let mut sc = SemiConjugacy { anchor: x0, alpha, knots, targets, indices: order, plateaus: Vec::new() };
    let nf = n as f64;
    for i in 0..n {
        let (dx, dt) = sc.gap(i);
        if dx > PLATEAU_DOMAIN_GAP / nf && dt < PLATEAU_FLATNESS * dx {
            let arc = Arc::from_start_len(sc.knots[i], dx)?;
            sc.plateaus.push(Plateau { arc, target_gap: dt, flatness: dt / dx });
        }
    }
    Ok(sc)
}

#[derive(Clone, Debug, PartialEq)]
pub enum ConjugacyVerdict {
    /// No plateau at the sampled resolution; evidence only, limited by scale.
    ConjugateEvidence { unconfirmed_plateaus: usize },
    WanderingIntervalFound(Arc),
    RationalRotation { p: i64, q: u64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConjugacyReport {
    pub verdict: ConjugacyVerdict,
    pub budget: usize,
    pub rotation: Option<f64>,
    pub plateaus: Vec<Plateau>,
    pub conjugacy_defect: Option<f64>,
}

/// Period search, semi-conjugacy from the orbit of 0, and plateau analysis.
pub fn conjugacy_verdict(map: &CircleDiffeo, budget: usize) -> Result<ConjugacyReport> {
    conjugacy_verdict_from(map, budget, 0.0)
}

pub fn conjugacy_verdict_from(map: &CircleDiffeo, budget: usize, x0: f64) -> Result<ConjugacyReport> {
    if budget < 100 {
        return Err(Error::InvalidArgument("budget must be at least 100".into()));
    }
    if let Some((p, q)) = detect_period(map, (budget as u64).min(PERIOD_SEARCH), x0)? {
        return Ok(ConjugacyReport {
            verdict: ConjugacyVerdict::RationalRotation { p, q },
            budget,
            rotation: Some(frac(p as f64 / q as f64)),
            plateaus: Vec::new(),
            conjugacy_defect: None,
        });
    }
    let sc = build_semiconjugacy(map, x0, budget)?;
    let defect = sc.conjugacy_defect(map, 1000);
    let mut plateaus = sc.plateaus.clone();
    plateaus.sort_by(|a, b| b.arc.length().total_cmp(&a.arc.length()));
    let mut verdict = ConjugacyVerdict::ConjugateEvidence { unconfirmed_plateaus: plateaus.len() };
    for p in &plateaus {
        let inner = p.arc.length() - 2.0 * p.target_gap;
        if inner <= 0.0 {
            continue;
        }
        let candidate = Arc::from_start_len(p.arc.start() + p.target_gap, inner)?;
        let check = CONFIRM_ITERATES.min(budget);
        if wandering_verdict(map, &candidate, check, 0.0)? == WanderingVerdict::WanderingUpTo(check) {
            verdict = ConjugacyVerdict::WanderingIntervalFound(candidate);
            break;
        }
    }
    Ok(ConjugacyReport { verdict, budget, rotation: Some(sc.alpha), plateaus, conjugacy_defect: Some(defect) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{arnold, make_denjoy, rigid};

    const GOLDEN: f64 = 0.618_033_988_749_894_8;

    #[test]
    fn rigid_interval_orbit() {
        let arcs = interval_orbit(&rigid(0.25), &Arc::new(0.0, 0.1).unwrap(), 2).unwrap();
        assert!(abs(arcs[0].start() - 0.25) < 1e-15 && abs(arcs[0].end() - 0.35) < 1e-15);
        assert!(abs(arcs[1].start() - 0.5) < 1e-15 && abs(arcs[1].end() - 0.6) < 1e-15);
    }

    #[test]
    fn period_three_returns() {
        let v = wandering_verdict(&rigid(1.0 / 3.0), &Arc::new(0.0, 0.01).unwrap(), 3, 0.0).unwrap();
        assert_eq!(v, WanderingVerdict::OverlapAt(0, 3));
    }

    #[test]
    fn pigeonhole_overlap() {
        let arc = Arc::new(0.0, 0.05).unwrap();
        match wandering_verdict(&rigid(GOLDEN), &arc, 40, 0.0).unwrap() {
            WanderingVerdict::OverlapAt(i, j) => {
                assert!(j <= 21, "overlap only at {j}");
                // Brute force: the pair really overlaps and no earlier j does.
                let d = crate::num::circle_dist(frac(i as f64 * GOLDEN), frac(j as f64 * GOLDEN));
                assert!(d <= 0.05);
                for jj in 1..j {
                    for ii in 0..jj {
                        assert!(crate::num::circle_dist(frac(ii as f64 * GOLDEN), frac(jj as f64 * GOLDEN)) > 0.05);
                    }
                }
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn denjoy_arc_wanders() {
        let d = make_denjoy(GOLDEN, 100, 0.5).unwrap();
        let v = wandering_verdict(&d.base, &d.wandering_arc, 50, 1e-12).unwrap();
        assert_eq!(v, WanderingVerdict::WanderingUpTo(50));
        let total: f64 = interval_orbit(&d.base, &d.wandering_arc, 50).unwrap().iter().map(Arc::length).sum();
        assert!(total <= 0.5);
    }

    #[test]
    fn orbit_classes() {
        let p = omega_gap_profile(&rigid(GOLDEN), 0.0, 10_000, 100).unwrap();
        assert_eq!(p.class, OrbitClass::DenseLike);
        assert!(p.max_gap <= 3.0 / 10_000.0);
        assert!(p.gap_trend.windows(2).all(|w| w[1].1 <= w[0].1));
        let p = omega_gap_profile(&rigid(1.0 / 3.0), 0.0, 30, 10).unwrap();
        assert_eq!(p.class, OrbitClass::PeriodicLike(3));
    }

    #[test]
    fn rigid_semiconjugacy_is_a_translation() {
        let f = rigid(GOLDEN);
        let sc = build_semiconjugacy(&f, 0.2, 1000).unwrap();
        assert!(sc.plateaus.is_empty());
        for i in 0..50 {
            let x = i as f64 / 50.0;
            assert!(abs(circle_delta(sc.eval(x) - x, sc.eval(0.2) - 0.2)) < 1e-7);
        }
        assert!(sc.knot_defect(&f) < 1e-9);
    }

    #[test]
    fn semiconjugacy_is_monotone_degree_one() {
        let f = arnold(0.61, 0.5).unwrap();
        let sc = build_semiconjugacy(&f, 0.0, 2000).unwrap();
        let mut prev = sc.eval(-0.5);
        for i in 1..=4000 {
            let x = -0.5 + i as f64 / 2000.0;
            let v = sc.eval(x);
            assert!(v >= prev - 1e-12);
            prev = v;
        }
        assert!(abs(sc.eval(1.3) - sc.eval(0.3) - 1.0) < 1e-12);
        assert!(sc.conjugacy_defect(&f, 500) <= KNOT_TOL / 2000.0);
    }

    #[test]
    fn rational_rotation_verdicts() {
        let err = build_semiconjugacy(&rigid(0.4), 0.0, 100).unwrap_err();
        assert_eq!(err, Error::PeriodicOrbit { p: 2, q: 5 });
        let r = conjugacy_verdict(&arnold(0.5, 0.9).unwrap(), 500).unwrap();
        assert_eq!(r.verdict, ConjugacyVerdict::RationalRotation { p: 1, q: 2 });
    }

    #[test]
    fn rigid_conjugate_evidence() {
        let r = conjugacy_verdict(&rigid(GOLDEN), 1000).unwrap();
        assert_eq!(r.verdict, ConjugacyVerdict::ConjugateEvidence { unconfirmed_plateaus: 0 });
    }

    #[test]
    fn hausdorff_basics() {
        assert_eq!(circle_hausdorff(&[0.1, 0.5], &[0.1, 0.5]), 0.0);
        assert!(abs(circle_hausdorff(&[0.05], &[0.95]) - 0.1) < 1e-15);
        assert!(abs(circle_hausdorff(&[0.0, 0.5], &[0.0]) - 0.5) < 1e-15);
    }
}
