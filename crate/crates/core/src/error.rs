use alloc::string::String;
use core::fmt;

/// Failure modes shared by every module of the crate.
#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// A derivative was requested from a map that only carries values.
    NotC1 { label: String },
    /// A lift whose derivative vanishes or changes sign.
    NotDiffeomorphism { reason: String },
    /// Bracketed root-finding failed to converge.
    RootFind { target: f64, lo: f64, hi: f64, residual: f64 },
    /// Four points closer together than the working precision allows.
    DegenerateTuple,
    /// The map is not increasing on the points it was asked to act on.
    NotMonotone { at: f64 },
    /// A closed orbit was found; the rotation number is `p/q`.
    PeriodicOrbit { p: i64, q: u64 },
    /// A rotation parameter that resolves to a rational at working precision.
    RationalAlpha { p: i64, q: u64 },
    /// Sampling was too coarse to locate the extrema of a function.
    Unresolved { cell_start: f64, cell_end: f64 },
    /// Adaptive quadrature exhausted its recursion budget.
    Quadrature { a: f64, b: f64 },
    /// Arcs that were required to be pairwise disjoint overlap.
    Overlap { i: usize, j: usize },
    /// An arc that should contain another does not.
    NotContained,
    /// A precondition on an argument failed.
    InvalidArgument(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NotC1 { label } => write!(f, "map `{label}` is not C1: no derivative available"),
            Error::NotDiffeomorphism { reason } => write!(f, "not a diffeomorphism: {reason}"),
            Error::RootFind { target, lo, hi, residual } => write!(
                f,
                "inverse evaluation of {target} did not converge in [{lo}, {hi}] (residual {residual:e})"
            ),
            Error::DegenerateTuple => f.write_str("degenerate tuple: spacing below 1e-14"),
            Error::NotMonotone { at } => write!(f, "map is not increasing near {at}"),
            Error::PeriodicOrbit { p, q } => {
                write!(f, "periodic orbit of period {q} (rotation number {p}/{q})")
            }
            Error::RationalAlpha { p, q } => {
                write!(f, "rational alpha: resolves to {p}/{q} at working precision")
            }
            Error::Unresolved { cell_start, cell_end } => write!(
                f,
                "increase resolution: extremum unresolved in cell [{cell_start}, {cell_end}]"
            ),
            Error::Quadrature { a, b } => write!(f, "quadrature did not converge on [{a}, {b}]"),
            Error::Overlap { i, j } => write!(f, "arcs {i} and {j} overlap"),
            Error::NotContained => f.write_str("inner arc is not contained in the outer arc"),
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
