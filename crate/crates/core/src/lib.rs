//! Heat traces of positive Laplace-type operators given by their spectra.
//!
//! The crate evaluates the classical trace `Θ(t) = Tr e^{-tH}`, the
//! relativistic trace `Θ_r(β) = Tr e^{-βω}` with `ω = H^{1/2}`, and the
//! Bose/Fermi traces `Θ_{b,f}(β, μ)`. On top of those it computes the global
//! invariant `A_q` by a regularized Mellin transform, the associated zeta
//! functions, and the symbolic small-β expansions, which can be checked
//! against direct summation.
//!
//! ```
//! use qheat::asymptotics::{build_expansion, evaluate_expansion, AValues, MuRegime, TraceKind, Truncation};
//! use qheat::mellin::a_q;
//! use qheat::spectra::Spectrum;
//! use qheat::traces::theta_relativistic;
//!
//! # fn main() -> qheat::Result<()> {
//! let c = Spectrum::circle(1.0, 1.0)?;
//! let a0 = a_q(&c, 0.0, 1e-10)?.value;
//! assert!((a0 - std::f64::consts::TAU).abs() < 1e-8);
//!
//! let series = build_expansion(1, TraceKind::Relativistic, MuRegime::Zero, 1)?;
//! let a = AValues::for_series(&c, &series, 1e-10)?;
//! let approx = evaluate_expansion(&series, &a, 0.05, 0.0, Truncation::Full)?;
//! let exact = theta_relativistic(&c, 0.05, 1e-13)?;
//! assert!((approx.value - exact).abs() < 1e-6 * exact);
//! # Ok(())
//! # }
//! ```

pub mod asymptotics;
pub mod error;
pub mod harness;
pub mod mellin;
pub mod quad;
pub mod spectra;
pub mod specfun;
pub mod sum;
pub mod traces;

pub use error::{Error, Result};

/// A numerical value together with an absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub err: f64,
}

impl Estimate {
    pub fn new(value: f64, err: f64) -> Self {
        Estimate { value, err }
    }

    pub fn exact(value: f64) -> Self {
        Estimate { value, err: 0.0 }
    }

    /// Relative error estimate, `err / |value|`.
    pub fn rel_err(&self) -> f64 {
        if self.value == 0.0 {
            if self.err == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            self.err / self.value.abs()
        }
    }
}

/// Quantum statistics of the occupation function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Statistics {
    Bose,
    Fermi,
}

impl Statistics {
    pub fn name(self) -> &'static str {
        match self {
            Statistics::Bose => "bose",
            Statistics::Fermi => "fermi",
        }
    }
}
