use denjoy_core::catalog::{arnold, example_function, make_denjoy, Example, IntervalFunction};
use denjoy_core::crossratio::{cross_ratios, decompose_ab, delta_fn, distortion_under_map, koebe_log_ratio, FourTuple};
use denjoy_core::maps::RealMap;
use denjoy_core::variation::{
    avg_zygmund_variation, classify_regularity, quadratic_variation_of_values, total_variation_estimate,
    zygmund_level_sums, zygmund_variation_estimate,
};
use proptest::prelude::*;

/// `exp` of a piecewise-linear function as a derivative, so `log h'` is exactly
/// piecewise linear.
struct ExpPl {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl ExpPl {
    fn log_der(&self, x: f64) -> f64 {
        let i = self.xs.partition_point(|&k| k <= x).clamp(1, self.xs.len() - 1) - 1;
        let t = (x - self.xs[i]) / (self.xs[i + 1] - self.xs[i]);
        self.ys[i] + t * (self.ys[i + 1] - self.ys[i])
    }
}

impl RealMap for ExpPl {
    fn value(&self, x: f64) -> f64 {
        // Exact integral of exp of a linear function on each piece.
        let mut acc = 0.0;
        for i in 0..self.xs.len() - 1 {
            let (a, b) = (self.xs[i], self.xs[i + 1]);
            if x <= a {
                break;
            }
            let hi = x.min(b);
            let s = (self.ys[i + 1] - self.ys[i]) / (b - a);
            let l0 = self.ys[i];
            acc += if s.abs() < 1e-12 { l0.exp() * (hi - a) } else { (l0.exp() / s) * ((s * (hi - a)).exp() - 1.0) };
        }
        acc
    }
    fn derivative_at(&self, x: f64) -> Option<f64> {
        Some(self.log_der(x).exp())
    }
}

fn exp_pl(knots: Vec<f64>, values: Vec<f64>) -> ExpPl {
    let mut xs = vec![0.0];
    let mut inner: Vec<f64> = knots.into_iter().filter(|&x| x > 0.0 && x < 1.0).collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    xs.extend(inner);
    xs.push(1.0);
    let ys = (0..xs.len()).map(|i| values[i % values.len()]).collect();
    ExpPl { xs, ys }
}

fn sorted4() -> impl Strategy<Value = FourTuple> {
    (-5.0f64..5.0, 0.01f64..2.0, 0.01f64..2.0, 0.01f64..2.0)
        .prop_map(|(a, g1, g2, g3)| FourTuple::new(a, a + g1, a + g1 + g2, a + g1 + g2 + g3).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn first_is_one_plus_inverse_second(t in sorted4()) {
        let (first, second) = cross_ratios(&t);
        prop_assert!((first - (1.0 + 1.0 / second)).abs() <= 1e-12 * first);
    }

    #[test]
    fn affine_maps_preserve_cross_ratio(t in sorted4(), s in 0.1f64..10.0, c in -3.0f64..3.0) {
        struct Affine(f64, f64);
        impl RealMap for Affine {
            fn value(&self, x: f64) -> f64 { self.0 * x + self.1 }
            fn derivative_at(&self, _: f64) -> Option<f64> { Some(self.0) }
        }
        prop_assert!((distortion_under_map(&Affine(s, c), &t).unwrap() - 1.0).abs() < 1e-9);
    }

    /// Reassembly `term_a - 2 term_b = log_koebe`, and the midpoint-vs-average
    /// term bounded by the Zygmund variation of the piecewise-linear `log h'`.
    #[test]
    fn breakdown_reassembles(
        knots in prop::collection::vec(0.0f64..1.0, 1..8),
        values in prop::collection::vec(-1.0f64..1.0, 2..9),
        x in 0.0f64..0.9,
        w in 0.01f64..1.0,
    ) {
        let h = exp_pl(knots, values);
        let y = (x + w).min(1.0);
        prop_assume!(y - x > 1e-3);
        let br = decompose_ab(&h, x, y).unwrap();
        prop_assert!(br.residual.abs() <= 1e-8, "residual {}", br.residual);
        prop_assert!(br.term_b >= -1e-12);
        let logd = IntervalFunction::new("log h'", x, y, move |s| h.log_der(s));
        let zv = zygmund_variation_estimate(&logd, 16);
        prop_assert!(br.term_a.abs() <= zv + 1e-9, "{} > {}", br.term_a, zv);
    }

    #[test]
    fn arnold_reassembly(alpha in 0.0f64..1.0, amp in 0.0f64..0.95, x in -1.0f64..1.0, w in 1e-3f64..1.0) {
        let h = arnold(alpha, amp).unwrap();
        let direct = koebe_log_ratio(&h, x, x + w).unwrap();
        let br = decompose_ab(&h, x, x + w).unwrap();
        prop_assert!((br.term_a - 2.0 * br.term_b - direct).abs() <= 1e-8);
        prop_assert!(direct.abs() <= br.budget() + 1e-9);
    }

    #[test]
    fn delta_is_decreasing(e1 in -0.99f64..100.0, e2 in -0.99f64..100.0) {
        prop_assume!((e1 - e2).abs() > 1e-9);
        let (lo, hi) = if e1 < e2 { (e1, e2) } else { (e2, e1) };
        prop_assert!(delta_fn(lo) > delta_fn(hi) && delta_fn(hi) > 0.0);
    }

    /// Merging two adjacent increments of the same sign never lowers the sum
    /// of squares, so the best partition keeps only turning points.
    #[test]
    fn same_sign_merge_is_superadditive(v in prop::collection::vec(-5.0f64..5.0, 3..40)) {
        let sum_sq = |pts: &[f64]| pts.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum::<f64>();
        let base = sum_sq(&v);
        for i in 1..v.len() - 1 {
            if (v[i] - v[i - 1]) * (v[i + 1] - v[i]) >= 0.0 {
                let mut merged = v.clone();
                merged.remove(i);
                prop_assert!(sum_sq(&merged) >= base - 1e-12);
            }
        }
        prop_assert!(quadratic_variation_of_values(&v) >= base - 1e-12);
    }

    #[test]
    fn estimates_grow_with_depth(c in prop::collection::vec((-1.0f64..1.0, 0.5f64..20.0), 1..5)) {
        let f = IntervalFunction::new("waves", 0.0, 1.0, move |x| c.iter().map(|&(a, w)| a * (w * x).sin()).sum());
        let mut prev = (0.0, 0.0);
        for d in 1..12 {
            let cur = (total_variation_estimate(&f, d), zygmund_variation_estimate(&f, d));
            prop_assert!(cur.0 >= prev.0 - 1e-12 && cur.1 >= prev.1 - 1e-12);
            prev = cur;
        }
    }
}

/// All partitions of the level-3 dyadic grid against the dyadic estimators.
#[test]
fn dyadic_grid_oracle() {
    let fs = [
        example_function(Example::Ex1, 0).unwrap(),
        example_function(Example::Ex2, 6).unwrap(),
        example_function(Example::Ex3, 6).unwrap(),
        IntervalFunction::new("sin", 0.0, 1.0, |x| (7.0 * x).sin()),
    ];
    for f in &fs {
        let (a, b) = f.domain;
        let xs: Vec<f64> = (0..=8).map(|i| a + (b - a) * i as f64 / 8.0).collect();
        let (mut tv, mut zv) = (0.0f64, 0.0f64);
        for mask in 0u32..(1 << 7) {
            let mut pts = vec![xs[0]];
            pts.extend((1..8).filter(|i| mask & (1 << (i - 1)) != 0).map(|i| xs[i]));
            pts.push(xs[8]);
            let t: f64 = pts.windows(2).map(|w| (f.eval(w[1]) - f.eval(w[0])).abs()).sum();
            let z: f64 =
                pts.windows(2).map(|w| (f.eval(w[0]) + f.eval(w[1]) - 2.0 * f.eval(0.5 * (w[0] + w[1]))).abs()).sum();
            tv = tv.max(t);
            zv = zv.max(z);
        }
        assert!((total_variation_estimate(f, 3) - tv).abs() <= 1e-12, "{}", f.label);
        assert!(zygmund_variation_estimate(f, 3) <= zv + 1e-12, "{}", f.label);
    }
}

#[test]
fn sandwich_on_catalog_members() {
    let fs = [
        example_function(Example::Ex1, 0).unwrap(),
        example_function(Example::Ex2, 8).unwrap(),
        example_function(Example::Ex3, 8).unwrap(),
        IntervalFunction::new("x^2", 0.0, 1.0, |x| x * x),
    ];
    for f in &fs {
        for depth in [4, 8, 12] {
            let avg = avg_zygmund_variation(f, depth).unwrap();
            let zv = zygmund_variation_estimate(f, depth);
            assert!(avg <= zv + 1e-9 && zv <= 2.0 * avg + 1e-9, "{} depth {depth}: avg {avg} zv {zv}", f.label);
        }
    }
}

/// `f(a) + f(b) - 2 f(m)` is twice the averaged defect of `[a, b]` minus
/// those of its halves, so `zv <= 3 avg_zv` once the halves are available.
#[test]
fn midpoint_variation_within_three_averaged() {
    for amp in [0.3, 0.7, 0.95] {
        let f = IntervalFunction::log_derivative(&arnold(0.3, amp).unwrap(), 0.0, 1.0).unwrap();
        for depth in [4, 8, 12] {
            let avg = avg_zygmund_variation(&f, depth + 1).unwrap();
            let zv = zygmund_variation_estimate(&f, depth);
            assert!(avg <= zv + 1e-9 && zv <= 3.0 * avg + 1e-9, "amp {amp} depth {depth}: avg {avg} zv {zv}");
        }
    }
}

#[test]
fn bounded_variation_implications() {
    let d = make_denjoy(0.618_033_988_749_894_8, 20, 0.3).unwrap();
    let fs = [
        example_function(Example::Ex1, 0).unwrap(),
        example_function(Example::Ex3, 10).unwrap(),
        IntervalFunction::log_derivative(&arnold(0.3, 0.7).unwrap(), 0.0, 1.0).unwrap(),
        IntervalFunction::log_derivative(&d.base, 0.0, 1.0).unwrap(),
    ];
    for f in &fs {
        let rep = classify_regularity(f, 16).unwrap();
        if rep.tv.is_finite() {
            assert_eq!(rep.bv_implications, Some(true), "{}", f.label);
        }
        if rep.zyg_norm.is_finite() {
            assert_eq!(rep.zygmund_implications, Some(true), "{}", f.label);
        }
    }
}

#[test]
fn square_level_sums_closed_form() {
    let f = IntervalFunction::new("x^2", 0.0, 1.0, |x| x * x);
    for (k, s) in zygmund_level_sums(&f, 12).iter().enumerate() {
        assert!((s - 0.5f64.powi(k as i32 + 1)).abs() < 1e-14);
    }
}
