use denjoy_core::catalog::{arnold, make_denjoy, rigid};
use denjoy_core::combinatorics::{
    intersection_multiplicity, predecessor_successor_table, pullbacks, OrbitCombinatorics, Side,
};
use denjoy_core::crossratio::{crd_variation_estimate, FourTuple};
use denjoy_core::num::frac_mul;
use denjoy_core::{Arc, Error};
use proptest::prelude::*;

fn point_arcs(alpha: f64, n: usize) -> Vec<Arc> {
    (0..n).map(|k| Arc::from_start_len(frac_mul(k as i64, alpha), 1e-10).unwrap()).collect()
}

/// Table of the orbit arcs, or `None` when `alpha` is rational at the arc
/// width and two arcs meet.
fn table(arcs: &[Arc]) -> Option<OrbitCombinatorics> {
    match predecessor_successor_table(arcs) {
        Ok(t) => Some(t),
        Err(Error::Overlap { .. }) => None,
        Err(e) => panic!("{e}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Every index gets at most one successor, and when both clauses are
    /// scanned independently no index qualifies twice.
    #[test]
    fn at_most_one_successor(alpha in 0.05f64..0.95) {
        let t = table(&point_arcs(alpha, 300));
        prop_assume!(t.is_some());
        let t = t.unwrap();
        prop_assert!(t.double_successors.is_empty(), "{:?}", t.double_successors);
        for n in 1..t.len() {
            let Some(l) = t.left_pred[n] else { continue };
            let Some(r) = t.right_pred[n] else { continue };
            let cands: Vec<usize> = [n + (n - l), n + (n - r)]
                .into_iter()
                .filter(|&m| m < t.len() && (t.left_pred[m] == Some(n) || t.right_pred[m] == Some(n)))
                .collect();
            if let Some(s) = t.successor_index(n) {
                prop_assert!(cands.contains(&s));
            }
        }
    }

    #[test]
    fn side_persistence(alpha in 0.05f64..0.95) {
        let t = table(&point_arcs(alpha, 400));
        prop_assume!(t.is_some());
        let t = t.unwrap();
        for n in 1..t.len() {
            let Some((s, side)) = t.successor[n] else { continue };
            let (l, r) = (t.left_pred[n].unwrap(), t.right_pred[n].unwrap());
            if l == r {
                continue;
            }
            match side {
                Side::Right => {
                    prop_assert_eq!(t.left_pred[s], Some(n));
                    prop_assert_eq!(t.right_pred[s], Some(r));
                }
                Side::Left => {
                    prop_assert_eq!(t.right_pred[s], Some(n));
                    prop_assert_eq!(t.left_pred[s], Some(l));
                }
            }
            if let Some((s2, side2)) = t.successor[s] {
                prop_assert_eq!(side2, side);
                prop_assert_eq!(s2 - s, s - n);
            }
        }
    }

    #[test]
    fn natural_neighbourhood_pullbacks_bounded(alpha in 0.05f64..0.95, n in 20usize..120) {
        let arcs = point_arcs(alpha, 3 * n + 1);
        let t = table(&arcs);
        prop_assume!(t.is_some());
        let t = t.unwrap();
        if let Ok(tn) = t.natural_neighborhood(n) {
            let pulled = pullbacks(&rigid(alpha), &tn, n).unwrap();
            prop_assert!(intersection_multiplicity(&pulled) <= 15);
        }
    }
}

/// Pullbacks of a one-sided gap `M_n` with multiplicity at least `2m` force
/// an index `t` with `S^m(t) = n` whose later successors land in `M_n`.
#[test]
fn high_multiplicity_forces_successor_chain() {
    let mut witnessed = 0;
    for alpha in [std::f64::consts::SQRT_2 - 1.0, 0.276_393_202_250_021, 0.1213203435596424, 0.3090169943749474] {
        let total = 3000;
        let arcs = point_arcs(alpha, total);
        let t = predecessor_successor_table(&arcs).unwrap();
        let map = rigid(alpha);
        for n in 2..400 {
            let (Some(l), Some(r)) = (t.left_pred[n], t.right_pred[n]) else { continue };
            if l == r {
                continue;
            }
            for m_n in [arcs[l].span_to(&arcs[n]).unwrap(), arcs[n].span_to(&arcs[r]).unwrap()] {
                let pulled = pullbacks(&map, &m_n, n).unwrap();
                let m = intersection_multiplicity(&pulled) / 2;
                if m < 2 {
                    continue;
                }
                witnessed += 1;
                let chain = |start: usize| {
                    let mut c = vec![start];
                    while c.len() <= 2 * m - 2 {
                        match t.successor_index(*c.last().unwrap()) {
                            Some(s) => c.push(s),
                            None => break,
                        }
                    }
                    c
                };
                let found = (0..=n).any(|s| {
                    let c = chain(s);
                    c.len() == 2 * m - 1 && c[m] == n && (m..=2 * m - 2).all(|j| m_n.contains_arc(&arcs[c[j]]))
                });
                assert!(found, "alpha {alpha} n {n} multiplicity >= {}", 2 * m);
            }
        }
    }
    assert!(witnessed > 0, "no instance reached multiplicity 4");
}

/// For an arc strictly larger than a wandering arc the pullback
/// multiplicity keeps growing with the horizon.
#[test]
fn enlarged_wandering_arc_multiplicity_grows() {
    for alpha in [std::f64::consts::SQRT_2 - 1.0, 0.618_033_988_749_894_8] {
        let d = make_denjoy(alpha, 50, 0.5).unwrap();
        let i0 = d.wandering_arc;
        let j = Arc::from_start_len(i0.start() - 0.01, i0.length() + 0.02).unwrap();
        let mults: Vec<usize> = [10, 20, 40, 80, 160]
            .iter()
            .map(|&h| intersection_multiplicity(&pullbacks(&d.base, &j, h).unwrap()))
            .collect();
        assert!(mults[mults.len() - 1] > mults[0], "{mults:?}");
        assert!(mults.windows(2).all(|w| w[1] >= w[0]), "{mults:?}");
        let inner = pullbacks(&d.base, &i0, 160).unwrap();
        assert_eq!(intersection_multiplicity(&inner), 1);
    }
}

/// Interior triples keep their ratio within `[1/C, C]`, `C = 3 e^B`, where
/// `B` bounds the cross-ratio distortion of the map.
#[test]
fn real_koebe_ratio_bound() {
    for (alpha, amp) in [(0.3, 0.2), (0.61, 0.5), (0.1, 0.8)] {
        let f = arnold(alpha, amp).unwrap();
        let b = crd_variation_estimate(&f, 8, 16, 11);
        let c = 3.0 * b.exp();
        for i in 0..200 {
            let a = i as f64 / 200.0;
            let len = 0.05 + 0.2 * ((i * 37) % 100) as f64 / 100.0;
            let t = FourTuple::standard(a, len / 3.0).unwrap();
            let [p0, p1, p2, p3] = t.points().map(|x| f.eval(x));
            let (l, mid, r) = (p1 - p0, p2 - p1, p3 - p2);
            for ratio in [mid / l, mid / r] {
                assert!(ratio <= c && ratio >= 1.0 / c, "ratio {ratio} vs C {c}");
            }
        }
    }
}
