//! Combinatorics of a finite orbit of disjoint arcs: predecessors,
//! successors, natural neighbourhoods, pullbacks and intersection
//! multiplicity, plus the constants of the macroscopic Koebe principle.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::maps::{Arc, CircleDiffeo};
use crate::num::{exp, frac};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrbitCombinatorics {
    pub arcs: Vec<Arc>,
    pub left_pred: Vec<Option<usize>>,
    pub right_pred: Vec<Option<usize>>,
    pub successor: Vec<Option<(usize, Side)>>,
    /// Indices where both the left and the right clause produced a successor.
    pub double_successors: Vec<usize>,
}

fn key(x: f64) -> u64 {
    // Starts lie in [0, 1), where the bit pattern orders like the value.
    frac(x).to_bits()
}

/// Builds `L(n)`, `R(n)` and `S(n)` for the arcs `I_0, ..., I_N`.
pub fn predecessor_successor_table(arcs: &[Arc]) -> Result<OrbitCombinatorics> {
    let n_arcs = arcs.len();
    let mut sorted: Vec<usize> = (0..n_arcs).collect();
    sorted.sort_by(|&i, &j| arcs[i].start().total_cmp(&arcs[j].start()));
    for w in 0..n_arcs.saturating_sub(1) {
        let (i, j) = (sorted[w], sorted[w + 1]);
        if arcs[i].intersects(&arcs[j]) {
            return Err(Error::Overlap { i: i.min(j), j: i.max(j) });
        }
    }
    if n_arcs > 1 {
        let (i, j) = (sorted[n_arcs - 1], sorted[0]);
        if arcs[i].intersects(&arcs[j]) {
            return Err(Error::Overlap { i: i.min(j), j: i.max(j) });
        }
    }

    let mut left_pred = alloc::vec![None; n_arcs];
    let mut right_pred = alloc::vec![None; n_arcs];
    let mut seen: BTreeMap<u64, usize> = BTreeMap::new();
    for n in 0..n_arcs {
        let k = key(arcs[n].start());
        if !seen.is_empty() {
            let left = seen.range(..k).next_back().or_else(|| seen.iter().next_back());
            let right = seen.range(k..).next().or_else(|| seen.iter().next());
            left_pred[n] = left.map(|(_, &i)| i);
            right_pred[n] = right.map(|(_, &i)| i);
        }
        seen.insert(k, n);
    }

    let mut successor = alloc::vec![None; n_arcs];
    let mut double_successors = Vec::new();
    for n in 1..n_arcs {
        let mut found = Vec::new();
        if let (Some(l), Some(r)) = (left_pred[n], right_pred[n]) {
            // Right of I_n: f^a carries [I_l, I_{n+a}] onto [I_n, I_{n+2a}],
            // which must stay clear of both predecessors.
            let a = n - l;
            let (m, m2) = (n + a, n + 2 * a);
            if m2 < n_arcs && left_pred[m] == Some(n) && bridge_avoids(arcs, n, m2, &[l, r]) {
                found.push((m, Side::Right));
            }
            let a = n - r;
            let (m, m2) = (n + a, n + 2 * a);
            if m2 < n_arcs && right_pred[m] == Some(n) && bridge_avoids(arcs, m2, n, &[l, r]) {
                found.push((m, Side::Left));
            }
        }
        if found.len() > 1 {
            double_successors.push(n);
        }
        successor[n] = found.first().copied();
    }
    Ok(OrbitCombinatorics { arcs: arcs.to_vec(), left_pred, right_pred, successor, double_successors })
}

/// The closed span from `I_from` counter-clockwise to `I_to` meets none of `avoid`.
fn bridge_avoids(arcs: &[Arc], from: usize, to: usize, avoid: &[usize]) -> bool {
    match arcs[from].span_to(&arcs[to]) {
        Ok(span) => avoid.iter().all(|&k| k == from || k == to || !span.intersects(&arcs[k])),
        Err(_) => false,
    }
}

impl OrbitCombinatorics {
    pub fn len(&self) -> usize {
        self.arcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    pub fn successor_index(&self, n: usize) -> Option<usize> {
        self.successor[n].map(|(m, _)| m)
    }

    /// Natural neighbourhood `T_n`: `[I_L, I_R]`, or `[I_L, I_S]` / `[I_S, I_R]`
    /// when `I_n` has a successor on the right / left.
    ///
    /// The successor of `n` can only be found when the table reaches
    /// `I_{n + 2a}`, `a <= n`; below `3n + 1` arcs `T_n` may be too wide.
    pub fn natural_neighborhood(&self, n: usize) -> Result<Arc> {
        let (Some(l), Some(r)) = (self.left_pred[n], self.right_pred[n]) else {
            return Err(Error::InvalidArgument(format!("I_{n} has no predecessors")));
        };
        if l == r {
            return Err(Error::InvalidArgument(format!("I_{n} has a single neighbouring arc")));
        }
        let (from, to) = match self.successor[n] {
            None => (l, r),
            Some((s, Side::Right)) => (l, s),
            Some((s, Side::Left)) => (s, r),
        };
        self.arcs[from].span_to(&self.arcs[to])
    }

    /// Indices `k < limit`, other than `n` and the arcs bounding `T_n`,
    /// whose arcs meet the interior of `T_n`.
    pub fn intruders(&self, n: usize, limit: usize) -> Result<Vec<usize>> {
        let t = self.natural_neighborhood(n)?;
        let ends = [self.left_pred[n], self.right_pred[n], self.successor_index(n)];
        Ok((0..limit.min(self.len()))
            .filter(|&k| k != n && !ends.contains(&Some(k)))
            .filter(|&k| {
                let a = &self.arcs[k];
                t.contains_in_interior(a.start()) || t.contains_in_interior(a.end())
            })
            .collect())
    }

    /// One line per index: `n L R S T_start T_end`, `-` for undefined entries.
    pub fn diagnostic_text(&self) -> String {
        let opt = |v: Option<usize>| v.map_or(String::from("-"), |i| format!("{i}"));
        let mut out = String::new();
        for n in 0..self.len() {
            let t = match self.natural_neighborhood(n) {
                Ok(t) => format!("{:.12} {:.12}", t.start(), t.end()),
                Err(_) => String::from("- -"),
            };
            out.push_str(&format!(
                "{n} {} {} {} {t}\n",
                opt(self.left_pred[n]),
                opt(self.right_pred[n]),
                opt(self.successor_index(n))
            ));
        }
        out
    }
}

/// Maximal number of closed arcs covering a single point.
pub fn intersection_multiplicity(arcs: &[Arc]) -> usize {
    // Events (position, kind): starts (0) sort before ends (1) at ties.
    let mut events: Vec<(f64, u8)> = Vec::with_capacity(4 * arcs.len());
    for a in arcs {
        let (s, e) = (a.start(), a.start() + a.length());
        events.push((s, 0));
        if e < 1.0 {
            events.push((e, 1));
        } else {
            // Wrapping arcs split into [s, 1] and [0, e - 1].
            events.push((1.0, 1));
            events.push((0.0, 0));
            events.push((e - 1.0, 1));
        }
    }
    events.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut depth = 0usize;
    let mut best = 0usize;
    for (_, kind) in events {
        if kind == 0 {
            depth += 1;
            best = best.max(depth);
        } else {
            depth -= 1;
        }
    }
    best
}

/// `f^-i(T)` for `i = 0..=n`.
pub fn pullbacks(map: &CircleDiffeo, t: &Arc, n: usize) -> Result<Vec<Arc>> {
    let mut a = t.start();
    let mut b = a + t.length();
    let mut out = Vec::with_capacity(n + 1);
    out.push(*t);
    for _ in 0..n {
        a = map.inverse_eval(a)?;
        b = map.inverse_eval(b)?;
        out.push(Arc::from_lift(a, b)?);
    }
    Ok(out)
}

/// `min(|L|, |R|) / |M|` for the components `L`, `R` of `T \ M`.
pub fn eps_scale(m: &Arc, t: &Arc) -> Result<f64> {
    if !t.contains_arc(m) {
        return Err(Error::NotContained);
    }
    let left = crate::num::frac(m.start() - t.start());
    let left = if left > t.length() { 0.0 } else { left };
    let right = (t.length() - left - m.length()).max(0.0);
    Ok(left.min(right) / m.length())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KoebeConstants {
    pub b: f64,
    pub c: f64,
    pub eps: f64,
    pub delta: f64,
    pub i_star: u32,
}

/// `C = 3 e^B`, `i*` the least `i` with `(1 + 1/C)^i - 1 > 1/eps`, and
/// `delta = 1 / (2^i* - 1)`.
pub fn macroscopic_delta(b: f64, eps: f64) -> Result<KoebeConstants> {
    if !(b >= 0.0) || !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("need B >= 0 and eps > 0, got {b}, {eps}")));
    }
    let c = 3.0 * exp(b);
    let ratio = 1.0 + 1.0 / c;
    let mut i_star = 1u32;
    let mut grown = ratio;
    while !(grown - 1.0 > 1.0 / eps) {
        i_star += 1;
        grown *= ratio;
        if i_star > 1023 {
            return Err(Error::InvalidArgument("eps too small for a finite delta".into()));
        }
    }
    let delta = 1.0 / (libm::exp2(i_star as f64) - 1.0);
    Ok(KoebeConstants { b, c, eps, delta, i_star })
}
