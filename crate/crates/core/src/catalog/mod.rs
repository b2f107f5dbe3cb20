//! Named maps and test functions: rotations, Arnold-type perturbations,
//! the Denjoy construction, and three interval functions separating the
//! regularity classes.

mod denjoy;

pub use denjoy::{DenjoyMap, DEFAULT_ATOM_DEPTH};

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc as Shared;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::maps::{CircleDiffeo, RealFn, RealMap};
use crate::num::{cos, floor, frac, ln, sin, sqrt, TAU};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MapKind {
    Rigid,
    Arnold,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MapSpec {
    pub kind: MapKind,
    pub alpha: f64,
    pub amplitude: Option<f64>,
}

pub fn make_map(spec: MapSpec) -> Result<CircleDiffeo> {
    match spec.kind {
        MapKind::Rigid => Ok(rigid(spec.alpha)),
        MapKind::Arnold => arnold(spec.alpha, spec.amplitude.unwrap_or(0.0)),
    }
}

/// `x -> x + alpha`.
pub fn rigid(alpha: f64) -> CircleDiffeo {
    CircleDiffeo::with_derivative(format!("rigid({alpha})"), move |x| x + alpha, |_| 1.0)
}

pub fn identity() -> CircleDiffeo {
    CircleDiffeo::with_derivative("identity", |x| x, |_| 1.0)
}

/// `x -> x + alpha + (a / 2pi) sin(2 pi x)`, derivative `1 + a cos(2 pi x)`.
pub fn arnold(alpha: f64, amplitude: f64) -> Result<CircleDiffeo> {
    if !(0.0..1.0).contains(&amplitude) {
        return Err(Error::NotDiffeomorphism {
            reason: format!("amplitude {amplitude} outside [0, 1)"),
        });
    }
    let c = amplitude / TAU;
    Ok(CircleDiffeo::with_derivative(
        format!("arnold({alpha}, {amplitude})"),
        move |x| x + alpha + c * sin(TAU * x),
        move |x| 1.0 + amplitude * cos(TAU * x),
    ))
}

/// Degree-one lift that is a Möbius map on each half `[k/2, (k+1)/2]`.
///
/// Every cell of a dyadic partition of depth at least one lies inside a
/// single Möbius piece, so cross ratios inside cells are preserved exactly.
pub fn piecewise_mobius(r: f64) -> Result<CircleDiffeo> {
    if !(r > 0.0) {
        return Err(Error::InvalidArgument(format!("mobius parameter {r} must be positive")));
    }
    let m = move |s: f64| s / (r + (1.0 - r) * s);
    let dm = move |s: f64| {
        let den = r + (1.0 - r) * s;
        r / (den * den)
    };
    let lift = move |x: f64| {
        let k = floor(2.0 * x);
        let s = 2.0 * x - k;
        0.5 * (k + m(s))
    };
    let der = move |x: f64| {
        let k = floor(2.0 * x);
        dm(2.0 * x - k)
    };
    Ok(CircleDiffeo::with_derivative(format!("piecewise_mobius({r})"), lift, der))
}

pub fn make_denjoy(alpha: f64, truncation: usize, mass: f64) -> Result<DenjoyMap> {
    DenjoyMap::new(alpha, truncation, mass)
}

/// Analytically known regularity of a catalog function.
///
/// Numeric fields describe the function as truncated; boolean flags describe
/// the limiting object the truncations approximate.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RegularityOracle {
    pub total_variation: Option<f64>,
    pub quadratic_variation: Option<f64>,
    pub zv_bounded: Option<bool>,
    pub zyg_norm_bounded: Option<bool>,
}

/// A continuous real function on a closed interval.
#[derive(Clone)]
pub struct IntervalFunction {
    pub label: String,
    pub domain: (f64, f64),
    eval: Shared<RealFn>,
    derivative: Option<Shared<RealFn>>,
    pub oracle: Option<RegularityOracle>,
}

impl core::fmt::Debug for IntervalFunction {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("IntervalFunction")
            .field("label", &self.label)
            .field("domain", &self.domain)
            .field("oracle", &self.oracle)
            .finish()
    }
}

impl IntervalFunction {
    pub fn new<F>(label: impl Into<String>, a: f64, b: f64, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        IntervalFunction { label: label.into(), domain: (a, b), eval: Shared::new(f), derivative: None, oracle: None }
    }

    pub fn with_derivative<F, D>(label: impl Into<String>, a: f64, b: f64, f: F, d: D) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        IntervalFunction {
            label: label.into(),
            domain: (a, b),
            eval: Shared::new(f),
            derivative: Some(Shared::new(d)),
            oracle: None,
        }
    }

    /// Continuous piecewise-linear interpolant of `(xs, ys)`, `xs` increasing.
    pub fn piecewise_linear(label: impl Into<String>, xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() < 2 || xs.len() != ys.len() {
            return Err(Error::InvalidArgument("need at least two knots of matching length".into()));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("knots must be strictly increasing".into()));
        }
        let (a, b) = (xs[0], xs[xs.len() - 1]);
        let xs = Shared::new(xs);
        let ys = Shared::new(ys);
        let (xs2, ys2) = (xs.clone(), ys.clone());
        let seg = move |xs: &[f64], x: f64| xs.partition_point(|&k| k <= x).clamp(1, xs.len() - 1) - 1;
        let f = move |x: f64| {
            let i = seg(&xs, x);
            let t = (x - xs[i]) / (xs[i + 1] - xs[i]);
            ys[i] + t * (ys[i + 1] - ys[i])
        };
        let d = move |x: f64| {
            let i = seg(&xs2, x);
            (ys2[i + 1] - ys2[i]) / (xs2[i + 1] - xs2[i])
        };
        Ok(IntervalFunction::with_derivative(label, a, b, f, d))
    }

    /// `log F'` of a C1 circle map over `[a, b]`.
    pub fn log_derivative(map: &CircleDiffeo, a: f64, b: f64) -> Result<Self> {
        if !map.is_c1() {
            return Err(Error::NotC1 { label: map.label().into() });
        }
        let m = map.clone();
        Ok(IntervalFunction::new(format!("log D {}", map.label()), a, b, move |x| {
            ln(m.derivative(x).unwrap_or(f64::NAN))
        }))
    }

    /// `h` itself restricted to `[a, b]`, keeping its derivative.
    pub fn from_map(map: &CircleDiffeo, a: f64, b: f64) -> Self {
        let (m, m2) = (map.clone(), map.clone());
        let label = format!("{} on [{a}, {b}]", map.label());
        if map.is_c1() {
            IntervalFunction::with_derivative(label, a, b, move |x| m.eval(x), move |x| {
                m2.derivative(x).unwrap_or(f64::NAN)
            })
        } else {
            IntervalFunction::new(label, a, b, move |x| m.eval(x))
        }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        (self.eval)(x)
    }

    pub fn derivative(&self, x: f64) -> Option<f64> {
        self.derivative.as_ref().map(|d| d(x))
    }

    pub fn width(&self) -> f64 {
        self.domain.1 - self.domain.0
    }

    /// Same function on a subinterval.
    pub fn restrict(&self, a: f64, b: f64) -> Self {
        IntervalFunction {
            label: self.label.clone(),
            domain: (a, b),
            eval: self.eval.clone(),
            derivative: self.derivative.clone(),
            oracle: None,
        }
    }

    /// Largest jump between neighbours on a uniform grid of `n` cells.
    pub fn max_grid_jump(&self, n: usize) -> f64 {
        let (a, b) = self.domain;
        let h = (b - a) / n as f64;
        let mut prev = self.eval(a);
        let mut worst: f64 = 0.0;
        for i in 1..=n {
            let x = if i == n { b } else { a + i as f64 * h };
            let v = self.eval(x);
            worst = worst.max(crate::num::abs(v - prev));
            prev = v;
        }
        worst
    }
}

impl RealMap for IntervalFunction {
    fn value(&self, x: f64) -> f64 {
        self.eval(x)
    }
    fn derivative_at(&self, x: f64) -> Option<f64> {
        self.derivative(x)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Example {
    /// Monotone, not Zygmund: `x` on `[-1, 0]`, `sqrt x` on `(0, 1]`.
    Ex1,
    /// Dyadic tent series `sum_n phi_0(2^n x mod 1) / 2^n` on `[0, 1]`.
    Ex2,
    /// Tents of height `1/n` on the blocks `[2^-n, 2^-(n-1)]`.
    Ex3,
}

impl Example {
    pub fn parse(name: &str) -> Result<Example> {
        match name {
            "ex1" => Ok(Example::Ex1),
            "ex2" => Ok(Example::Ex2),
            "ex3" => Ok(Example::Ex3),
            other => Err(Error::InvalidArgument(format!("unknown example `{other}`"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Example::Ex1 => "ex1",
            Example::Ex2 => "ex2",
            Example::Ex3 => "ex3",
        }
    }
}

/// Default truncation of the tent series.
pub const EX2_DEFAULT_DEPTH: u32 = 20;

#[inline]
fn tent(s: f64) -> f64 {
    2.0 * if s < 0.5 { s } else { 1.0 - s }
}

/// `E|S_m|` for a sum of `m` independent signs.
fn mean_abs_sign_walk(m: u32) -> f64 {
    if m == 0 {
        return 0.0;
    }
    // m * C(m-1, floor((m-1)/2)) / 2^(m-1), accumulated without overflow.
    let k = (m - 1) / 2;
    let mut v = m as f64;
    for i in 0..(m - 1) {
        v *= 0.5;
        if i < k {
            v *= (m - 1 - i) as f64 / (i + 1) as f64;
        }
    }
    v
}

pub fn example_function(name: Example, depth: u32) -> Result<IntervalFunction> {
    match name {
        Example::Ex1 => {
            let mut f = IntervalFunction::new("ex1", -1.0, 1.0, |x| if x <= 0.0 { x } else { sqrt(x) });
            f.oracle = Some(RegularityOracle {
                total_variation: Some(2.0),
                quadratic_variation: Some(4.0),
                zv_bounded: Some(true),
                zyg_norm_bounded: Some(false),
            });
            Ok(f)
        }
        Example::Ex2 => {
            let d = depth;
            let mut f = IntervalFunction::new(format!("ex2[{d}]"), 0.0, 1.0, move |x| {
                let mut sum = 0.0;
                let mut scale = 1.0;
                for _ in 0..=d {
                    sum += tent(frac(x * scale)) / scale;
                    scale *= 2.0;
                }
                sum
            });
            // Slopes are sums of d+1 independent signs times 2.
            f.oracle = Some(RegularityOracle {
                total_variation: Some(2.0 * mean_abs_sign_walk(d + 1)),
                quadratic_variation: None,
                zv_bounded: None,
                zyg_norm_bounded: Some(false),
            });
            Ok(f)
        }
        Example::Ex3 => {
            if depth < 1 {
                return Err(Error::InvalidArgument("ex3 needs depth >= 1".into()));
            }
            let d = depth as i32;
            let mut f = IntervalFunction::new(format!("ex3[{d}]"), 0.0, 1.0, move |x| {
                if !(x > 0.0 && x < 1.0) {
                    return 0.0;
                }
                let (_, e) = libm::frexp(x);
                let n = 1 - e;
                if n < 1 || n > d {
                    return 0.0;
                }
                let lo = libm::ldexp(1.0, -n);
                let s = (x - lo) / lo;
                tent(s) / n as f64
            });
            let qv: f64 = (1..=depth).rev().map(|n| 2.0 / (n as f64 * n as f64)).sum();
            let tv: f64 = (1..=depth).rev().map(|n| 2.0 / n as f64).sum();
            f.oracle = Some(RegularityOracle {
                total_variation: Some(tv),
                quadratic_variation: Some(qv),
                zv_bounded: Some(false),
                zyg_norm_bounded: Some(false),
            });
            Ok(f)
        }
    }
}

/// Catalog entries with a one-line description each.
pub fn catalog_entries() -> Vec<(&'static str, &'static str)> {
    alloc::vec![
        ("rigid", "rigid rotation x -> x + alpha"),
        ("arnold", "x -> x + alpha + (a / 2pi) sin(2 pi x), amplitude a in [0, 1)"),
        ("denjoy", "C1 map with a wandering interval: denjoy(alpha, N, mass)"),
        ("piecewise_mobius", "lift that is Mobius on each half circle (zero cross-ratio distortion)"),
        ("ex1", "x on [-1,0], sqrt x on (0,1]: bounded variation, not Zygmund"),
        ("ex2", "dyadic tent series on [0,1], truncated at depth d"),
        ("ex3", "tents of height 1/n on dyadic blocks: finite quadratic variation, unbounded Zygmund variation"),
    ]
}
