//! Circle diffeomorphisms through their lifts, and arcs on the circle.

use alloc::string::String;
use alloc::sync::Arc as Shared;
use alloc::format;

use crate::error::{Error, Result};
use crate::num::{abs, floor, frac};
use crate::quad;

/// Real function object shared between map values.
pub type RealFn = dyn Fn(f64) -> f64 + Send + Sync;

/// Evaluation tolerance.
pub const EVAL_TOL: f64 = 1e-12;
/// Residual accepted from inverse evaluation.
pub const ROOT_TOL: f64 = 1e-10;
/// Default number of grid points for lift validation.
pub const VALIDATION_GRID: usize = 10_000;
/// Quadrature pieces per validation cell; constructed maps hide narrow bumps.
const SUBCELLS: usize = 16;

/// Anything that can be evaluated (and possibly differentiated) on the line.
pub trait RealMap {
    fn value(&self, x: f64) -> f64;
    fn derivative_at(&self, x: f64) -> Option<f64>;
}

/// An orientation preserving circle map, stored as a degree-one lift.
#[derive(Clone)]
pub struct CircleDiffeo {
    lift: Shared<RealFn>,
    derivative: Option<Shared<RealFn>>,
    degree_offset: i32,
    label: String,
}

impl core::fmt::Debug for CircleDiffeo {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("CircleDiffeo")
            .field("label", &self.label)
            .field("c1", &self.derivative.is_some())
            .finish()
    }
}

impl CircleDiffeo {
    pub fn new<F>(label: impl Into<String>, lift: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        CircleDiffeo { lift: Shared::new(lift), derivative: None, degree_offset: 1, label: label.into() }
    }

    pub fn with_derivative<F, D>(label: impl Into<String>, lift: F, derivative: D) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        CircleDiffeo {
            lift: Shared::new(lift),
            derivative: Some(Shared::new(derivative)),
            degree_offset: 1,
            label: label.into(),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn degree_offset(&self) -> i32 {
        self.degree_offset
    }

    pub fn is_c1(&self) -> bool {
        self.derivative.is_some()
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        (self.lift)(x)
    }

    pub fn derivative(&self, x: f64) -> Result<f64> {
        match &self.derivative {
            Some(d) => Ok(d(x)),
            None => Err(Error::NotC1 { label: self.label.clone() }),
        }
    }

    pub fn eval_and_derivative(&self, x: f64) -> Result<(f64, f64)> {
        let d = self.derivative(x)?;
        if !(d > 0.0) {
            return Err(Error::NotDiffeomorphism { reason: format!("derivative {d} at {x}") });
        }
        Ok((self.eval(x), d))
    }

    /// Solves `F(x) = y`. The bracket comes from `|F(x) - x - F(0)| < 1`.
    pub fn inverse_eval(&self, y: f64) -> Result<f64> {
        let shift = self.eval(0.0);
        let lo = y - shift - 1.0;
        let hi = y - shift + 1.0;
        let x = match &self.derivative {
            Some(d) => quad::solve_increasing(|x| self.eval(x), Some(|x| d(x)), y, lo, hi)?,
            None => quad::solve_increasing(|x| self.eval(x), None::<fn(f64) -> f64>, y, lo, hi)?,
        };
        let residual = abs(self.eval(x) - y);
        if residual > ROOT_TOL {
            return Err(Error::RootFind { target: y, lo, hi, residual });
        }
        Ok(x)
    }

    /// `F^n(x)`; negative `n` iterates the inverse.
    pub fn iterate(&self, n: i64, x: f64) -> Result<f64> {
        let mut y = x;
        if n >= 0 {
            for _ in 0..n {
                y = self.eval(y);
            }
        } else {
            for _ in 0..(-n) {
                y = self.inverse_eval(y)?;
            }
        }
        Ok(y)
    }

    /// Derivative of `F^n` at `x` by the chain rule, `n >= 0`.
    pub fn iterate_derivative(&self, n: u64, x: f64) -> Result<f64> {
        let mut y = x;
        let mut prod = 1.0;
        for _ in 0..n {
            prod *= self.derivative(y)?;
            y = self.eval(y);
        }
        Ok(prod)
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &CircleDiffeo) -> CircleDiffeo {
        let label = format!("{}∘{}", self.label, inner.label);
        let (f, g) = (self.lift.clone(), inner.lift.clone());
        let lift = move |x: f64| f(g(x));
        match (&self.derivative, &inner.derivative) {
            (Some(df), Some(dg)) => {
                let (df, dg, g) = (df.clone(), dg.clone(), inner.lift.clone());
                CircleDiffeo::with_derivative(label, lift, move |x| df(g(x)) * dg(x))
            }
            _ => CircleDiffeo::new(label, lift),
        }
    }

    /// Inverse map through numerical inversion.
    pub fn inverse(&self) -> CircleDiffeo {
        let me = self.clone();
        let label = format!("{}^-1", self.label);
        let lift = {
            let me = me.clone();
            move |y: f64| me.inverse_eval(y).unwrap_or(f64::NAN)
        };
        if self.derivative.is_some() {
            let d = move |y: f64| {
                let x = me.inverse_eval(y).unwrap_or(f64::NAN);
                1.0 / me.derivative(x).unwrap_or(f64::NAN)
            };
            CircleDiffeo::with_derivative(label, lift, d)
        } else {
            CircleDiffeo::new(label, lift)
        }
    }

    /// `h ∘ self ∘ h^-1`.
    pub fn conjugate_by(&self, h: &CircleDiffeo) -> CircleDiffeo {
        h.compose(&self.compose(&h.inverse()))
    }

    /// Grid check of periodicity, monotonicity, derivative sign and
    /// derivative/increment consistency.
    pub fn validate_lift(&self, grid_size: usize, tol: f64) -> Result<LiftReport> {
        if grid_size < 2 {
            return Err(Error::InvalidArgument("grid_size must be at least 2".into()));
        }
        let h = 1.0 / grid_size as f64;
        let mut rep = LiftReport::default();
        let mut prev = self.eval(0.0);
        let mut min_d = f64::INFINITY;
        for i in 0..grid_size {
            let x = i as f64 * h;
            let fx = self.eval(x);
            let per = abs(self.eval(x + 1.0) - fx - 1.0);
            rep.periodicity = rep.periodicity.max(per);
            let x1 = (i + 1) as f64 * h;
            let fx1 = self.eval(x1);
            if i > 0 {
                rep.monotonicity = rep.monotonicity.max(prev - fx);
            }
            rep.monotonicity = rep.monotonicity.max(fx - fx1);
            prev = fx;
            if let Some(d) = &self.derivative {
                let dx = d(x);
                min_d = min_d.min(dx);
                rep.derivative_positivity = rep.derivative_positivity.max(-dx);
                let mut integral = 0.0;
                for k in 0..SUBCELLS {
                    let a = x + k as f64 * h / SUBCELLS as f64;
                    let b = x + (k + 1) as f64 * h / SUBCELLS as f64;
                    integral += quad::adaptive_simpson(|t| d(t), a, b, 1e-14)?;
                }
                rep.derivative_consistency = rep.derivative_consistency.max(abs(integral - (fx1 - fx)));
            }
        }
        if self.derivative.is_some() {
            rep.min_derivative = Some(min_d);
        }
        rep.tol = tol;
        rep.passed = rep.periodicity <= tol
            && rep.monotonicity <= tol
            && rep.derivative_positivity <= tol
            && rep.derivative_consistency <= tol
            && rep.min_derivative.is_none_or(|m| m > 0.0);
        Ok(rep)
    }
}

impl RealMap for CircleDiffeo {
    fn value(&self, x: f64) -> f64 {
        self.eval(x)
    }
    fn derivative_at(&self, x: f64) -> Option<f64> {
        self.derivative.as_ref().map(|d| d(x))
    }
}

/// Worst violations found by [`CircleDiffeo::validate_lift`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LiftReport {
    pub periodicity: f64,
    pub monotonicity: f64,
    pub derivative_positivity: f64,
    pub derivative_consistency: f64,
    pub min_derivative: Option<f64>,
    pub tol: f64,
    pub passed: bool,
}

/// Closed arc running counter-clockwise from `start` to `end`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Arc {
    start: f64,
    end: f64,
    len: f64,
}

impl Arc {
    pub fn new(start: f64, end: f64) -> Result<Arc> {
        let s = frac(start);
        let e = frac(end);
        Arc::from_start_len(s, frac(e - s))
    }

    pub fn from_start_len(start: f64, len: f64) -> Result<Arc> {
        if !(len > 0.0 && len < 1.0) {
            return Err(Error::InvalidArgument(format!("arc length {len} outside (0, 1)")));
        }
        let s = frac(start);
        Ok(Arc { start: s, end: frac(s + len), len })
    }

    /// Arc whose endpoints are the lift values `a < b` with `b - a < 1`.
    pub fn from_lift(a: f64, b: f64) -> Result<Arc> {
        Arc::from_start_len(a, b - a)
    }

    pub fn start(&self) -> f64 {
        self.start
    }
    pub fn end(&self) -> f64 {
        self.end
    }
    pub fn length(&self) -> f64 {
        self.len
    }
    pub fn midpoint(&self) -> f64 {
        frac(self.start + 0.5 * self.len)
    }

    /// Counter-clockwise offset of `x` from the start of the arc.
    #[inline]
    pub fn offset(&self, x: f64) -> f64 {
        frac(x - self.start)
    }

    pub fn contains(&self, x: f64) -> bool {
        let o = self.offset(x);
        o <= self.len || o >= 1.0 - 1e-15
    }

    pub fn contains_in_interior(&self, x: f64) -> bool {
        let o = self.offset(x);
        o > 0.0 && o < self.len
    }

    pub fn contains_arc(&self, other: &Arc) -> bool {
        let o = self.offset(other.start);
        let o = if o >= 1.0 - 1e-15 { 0.0 } else { o };
        o + other.len <= self.len + 1e-15
    }

    /// True when the closed arcs are at distance greater than `tol`.
    pub fn separated_from(&self, other: &Arc, tol: f64) -> bool {
        let ab = frac(other.start - self.start);
        let ba = frac(self.start - other.start);
        ab > self.len + tol && ba > other.len + tol
    }

    pub fn intersects(&self, other: &Arc) -> bool {
        !self.separated_from(other, 0.0)
    }

    /// Smallest arc from the start of `self` to the end of `other`.
    pub fn span_to(&self, other: &Arc) -> Result<Arc> {
        let len = self.offset(other.start) + other.len;
        Arc::from_start_len(self.start, len)
    }

    pub fn image(&self, map: &CircleDiffeo) -> Result<Arc> {
        self.image_n(map, 1)
    }

    /// `f^n(self)` for any integer `n`.
    pub fn image_n(&self, map: &CircleDiffeo, n: i64) -> Result<Arc> {
        let a = map.iterate(n, self.start)?;
        let b = map.iterate(n, self.start + self.len)?;
        if !(b > a) {
            return Err(Error::NotMonotone { at: self.start });
        }
        let len = b - a;
        let s = a - floor(a);
        Arc::from_start_len(s, len)
    }
}
