//! A C1 circle diffeomorphism with an explicit wandering interval.
//!
//! Start from the rigid rotation by `alpha` on a "Cantor coordinate" circle
//! and blow up every orbit point `theta_n = frac(n * alpha)` into an inserted
//! interval of length `mass * c0 / (|n| + 2)^2`. The map carries the inserted
//! interval of index `n` onto the one of index `n + 1` with derivative
//! `1 + 6 (r - 1) s (1 - s)` in normalized coordinates, where `r` is the
//! length ratio; on the complement it is the rotation, derivative one.
//! Both pieces have derivative one at the interval endpoints, so the lift
//! is C1.
//!
//! Indices run over `[-K, K]` with `K = atom_depth`, far beyond the
//! reported truncation `N`, so that the last inserted lengths are below
//! `1e-10`. Past `K` the remaining mass is absorbed by the Cantor
//! coordinate; the map is then a homeomorphism up to jumps of size
//! `len(K)` at the two boundary intervals.

use alloc::format;
use alloc::sync::Arc as Shared;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::maps::{Arc, CircleDiffeo};
use crate::num::{abs, floor, frac, frac_mul};

/// Number of inserted intervals on each side of index zero.
pub const DEFAULT_ATOM_DEPTH: usize = 1 << 17;

/// Inserted intervals sorted by their Cantor coordinate.
#[derive(Debug)]
struct AtomTable {
    alpha: f64,
    depth: i64,
    scale: f64,
    theta: Vec<f64>,
    left: Vec<f64>,
    len: Vec<f64>,
    index: Vec<i64>,
    pos_of: Vec<u32>,
}

impl AtomTable {
    fn build(alpha: f64, mass: f64, depth: usize) -> AtomTable {
        let k = depth as i64;
        let weight = |n: i64| {
            let m = (n.unsigned_abs() + 2) as f64;
            1.0 / (m * m)
        };
        // Sum small terms first.
        let mut total = weight(0);
        for n in (1..=k).rev() {
            total += 2.0 * weight(n);
        }
        let c0 = 1.0 / total;
        let count = (2 * k + 1) as usize;
        let mut order: Vec<(f64, i64)> = (-k..=k).map(|n| (frac_mul(n, alpha), n)).collect();
        order.sort_unstable_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut theta = Vec::with_capacity(count);
        let mut len = Vec::with_capacity(count);
        let mut index = Vec::with_capacity(count);
        let mut pos_of = alloc::vec![0u32; count];
        for (pos, &(t, n)) in order.iter().enumerate() {
            theta.push(t);
            len.push(mass * c0 * weight(n));
            index.push(n);
            pos_of[(n + k) as usize] = pos as u32;
        }
        let inserted: f64 = {
            let mut v: Vec<f64> = len.clone();
            v.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
            v.iter().sum()
        };
        let scale = 1.0 - inserted;
        let mut left = Vec::with_capacity(count);
        let mut prefix = 0.0;
        for pos in 0..count {
            left.push(scale * theta[pos] + prefix);
            prefix += len[pos];
        }
        AtomTable { alpha, depth: k, scale, theta, left, len, index, pos_of }
    }

    #[inline]
    fn pos(&self, n: i64) -> usize {
        self.pos_of[(n + self.depth) as usize] as usize
    }

    /// Last sorted position whose left endpoint is `<= u`.
    #[inline]
    fn locate(&self, u: f64) -> usize {
        self.left.partition_point(|&l| l <= u).saturating_sub(1)
    }

    /// Position on the line of Cantor coordinate `t` (any real).
    fn place(&self, t: f64) -> f64 {
        let w = floor(t);
        let s = t - w;
        let j = self.theta.partition_point(|&th| th <= s).saturating_sub(1);
        let before = self.left[j] + self.len[j] - self.scale * self.theta[j];
        w + self.scale * s + before
    }

    fn coordinate(&self, x: f64) -> f64 {
        let w = floor(x);
        let u = x - w;
        let i = self.locate(u);
        let end = self.left[i] + self.len[i];
        if u < end {
            w + self.theta[i]
        } else {
            w + self.theta[i] + (u - end) / self.scale
        }
    }

    /// Lift value and derivative at `u` in `[0, 1)`.
    fn eval_unit(&self, u: f64) -> (f64, f64) {
        let i = self.locate(u);
        let n = self.index[i];
        let end = self.left[i] + self.len[i];
        if u < end {
            let s = (u - self.left[i]) / self.len[i];
            if n < self.depth {
                let j = self.pos(n + 1);
                let wrap = if self.theta[j] < self.theta[i] { 1.0 } else { 0.0 };
                let r = self.len[j] / self.len[i];
                let value = self.left[j] + wrap + self.len[i] * (s + (r - 1.0) * s * s * (3.0 - 2.0 * s));
                (value, 1.0 + 6.0 * (r - 1.0) * s * (1.0 - s))
            } else {
                (self.place(self.theta[i] + self.alpha) + (u - self.left[i]), 1.0)
            }
        } else {
            let delta = (u - end) / self.scale;
            if n < self.depth {
                let j = self.pos(n + 1);
                let wrap = if self.theta[j] < self.theta[i] { 1.0 } else { 0.0 };
                let mut value = self.left[j] + self.len[j] + wrap + self.scale * delta;
                // The only interval whose preimage is not inserted.
                let edge = self.pos(-self.depth);
                let off = frac(self.theta[edge] - self.theta[j]);
                if off > 0.0 && off <= delta {
                    value += self.len[edge];
                }
                (value, 1.0)
            } else {
                (self.place(self.theta[i] + delta + self.alpha), 1.0)
            }
        }
    }

    fn eval(&self, x: f64) -> (f64, f64) {
        let w = floor(x);
        let (v, d) = self.eval_unit(x - w);
        (v + w, d)
    }
}

/// The constructed counterexample plus its bookkeeping.
#[derive(Clone, Debug)]
pub struct DenjoyMap {
    pub base: CircleDiffeo,
    pub wandering_arc: Arc,
    pub alpha: f64,
    /// Lengths for indices `-N..=N`, entry `n + N`.
    pub inserted_lengths: Vec<f64>,
    pub truncation: usize,
    pub mass: f64,
    table: Shared<AtomTable>,
}

impl DenjoyMap {
    pub fn new(alpha: f64, truncation: usize, mass: f64) -> Result<DenjoyMap> {
        DenjoyMap::with_atom_depth(alpha, truncation, mass, DEFAULT_ATOM_DEPTH)
    }

    pub fn with_atom_depth(alpha: f64, truncation: usize, mass: f64, atom_depth: usize) -> Result<DenjoyMap> {
        if !(mass > 0.0 && mass < 1.0) {
            return Err(Error::InvalidArgument(format!("mass {mass} must lie in (0, 1)")));
        }
        if truncation < 10 {
            return Err(Error::InvalidArgument(format!("truncation {truncation} must be at least 10")));
        }
        if atom_depth < truncation {
            return Err(Error::InvalidArgument("atom depth below truncation".into()));
        }
        let alpha = frac(alpha);
        check_irrational(alpha, 2 * atom_depth as u64 + 1)?;
        let table = Shared::new(AtomTable::build(alpha, mass, atom_depth));
        let label = format!("denjoy({alpha}, {truncation}, {mass})");
        let t = table.clone();
        let t2 = table.clone();
        let base = CircleDiffeo::with_derivative(label, move |x| t.eval(x).0, move |x| t2.eval(x).1);
        let n = truncation as i64;
        let inserted_lengths = (-n..=n).map(|i| table.len[table.pos(i)]).collect();
        let p0 = table.pos(0);
        let wandering_arc = Arc::from_start_len(table.left[p0], table.len[p0])?;
        Ok(DenjoyMap { base, wandering_arc, alpha, inserted_lengths, truncation, mass, table })
    }

    pub fn atom_depth(&self) -> usize {
        self.table.depth as usize
    }

    /// Length of the inserted interval of index `n`, `|n| <= atom_depth`.
    pub fn inserted_length(&self, n: i64) -> f64 {
        self.table.len[self.table.pos(n)]
    }

    /// The inserted interval `I_n = f^n(I_0)`.
    pub fn inserted_arc(&self, n: i64) -> Arc {
        let p = self.table.pos(n);
        Arc::from_start_len(self.table.left[p], self.table.len[p]).expect("inserted length in (0,1)")
    }

    /// Cantor coordinate of an inserted interval.
    pub fn inserted_theta(&self, n: i64) -> f64 {
        self.table.theta[self.table.pos(n)]
    }

    /// Point of the invariant Cantor set with rotation coordinate `theta`.
    pub fn cantor_point(&self, theta: f64) -> f64 {
        self.table.place(theta)
    }

    /// Semi-conjugacy to the rotation: collapses inserted intervals.
    pub fn cantor_coordinate(&self, x: f64) -> f64 {
        self.table.coordinate(x)
    }

    /// A convenient anchor on the Cantor set.
    pub fn default_anchor(&self) -> f64 {
        self.cantor_point(frac(0.5 + 0.5 * self.alpha))
    }

    /// Largest index `|n| <= atom_depth` whose interval is longer than `min_len`.
    pub fn indices_longer_than(&self, min_len: f64) -> Vec<i64> {
        let k = self.table.depth;
        (-k..=k).filter(|&n| self.inserted_length(n) > min_len).collect()
    }
}

/// Rejects `alpha` when some `q <= q_max` has `|q alpha - p| < 1e-13`.
fn check_irrational(alpha: f64, q_max: u64) -> Result<()> {
    let (mut p0, mut q0, mut p1, mut q1) = (0i64, 1u64, 1i64, 0u64);
    let mut x = alpha;
    for _ in 0..64 {
        let a = floor(x);
        let p2 = a as i64 * p1 + p0;
        let q2 = a as u64 * q1 + q0;
        if q2 > q_max {
            return Ok(());
        }
        let resid = abs(q2 as f64 * alpha - p2 as f64);
        if resid < 1e-13 {
            return Err(Error::RationalAlpha { p: p2, q: q2 });
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let r = x - a;
        if r < 1e-15 {
            return Err(Error::RationalAlpha { p: p1, q: q1 });
        }
        x = 1.0 / r;
    }
    Ok(())
}
