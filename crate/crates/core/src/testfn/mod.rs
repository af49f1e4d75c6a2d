//! Smooth test functions with exact compact support, parameterized plot
//! families, and the separating functional used to detect families whose
//! supports are not locally uniformly bounded.

mod bump;
mod family;
mod function;
mod hadamard;

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::oracle::{OracleError, ScalarOracle};

pub use bump::{Bump, DEFAULT_MAX_ORDER, TABLE_ORDER};
pub use family::{
    dilating_family, lubs_check, moving_bump_family, scaled_moving_family, separating_discontinuity_demo,
    steady_family, CoverEntry, LubsOutcome, PlotFamily, ScanConfig, SeparatingFunctional, SeparationReport,
    SeparationRow,
};
pub use function::{common_support_bound, Gaussian, Plateau, Polynomial, Profile, Term, TestFunction};
pub use hadamard::HadamardQuotient;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TestFnError {
    #[error("derivative of order {k} requested, at most {max} available")]
    OrderTooHigh { k: usize, max: usize },
    #[error("invalid support interval [{a}, {b}]")]
    Support { a: f64, b: f64 },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("no violating sequence: {0}")]
    NoViolatingSequence(String),
}

/// How fast a function may grow at infinity; decides which quadrature
/// schemes may integrate it against a density.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Growth {
    /// Vanishes outside a bounded interval.
    Compact,
    /// Bounded on the line.
    Bounded,
    /// Bounded by `C (1 + |x|)^d`.
    Polynomial(u32),
}

/// A smooth function of one real variable with derivatives on demand.
pub trait Smooth: Send + Sync {
    fn derivative(&self, k: usize, x: f64) -> Result<f64, TestFnError>;

    fn value(&self, x: f64) -> f64 {
        self.derivative(0, x).expect("order 0 is always available")
    }

    /// Highest derivative order the evaluator supports.
    fn max_order(&self) -> usize;

    /// Closed interval outside of which every derivative vanishes.
    fn support(&self) -> Option<(f64, f64)>;

    /// Points where the function fails to be real-analytic. Quadrature
    /// panels are split there.
    fn breakpoints(&self) -> Vec<f64>;

    fn growth(&self) -> Growth;

    /// Length over which the function changes appreciably.
    fn length_scale(&self) -> f64 {
        1.0
    }
}

impl<T: Smooth + ?Sized> Smooth for Arc<T> {
    fn derivative(&self, k: usize, x: f64) -> Result<f64, TestFnError> {
        (**self).derivative(k, x)
    }
    fn max_order(&self) -> usize {
        (**self).max_order()
    }
    fn support(&self) -> Option<(f64, f64)> {
        (**self).support()
    }
    fn breakpoints(&self) -> Vec<f64> {
        (**self).breakpoints()
    }
    fn growth(&self) -> Growth {
        (**self).growth()
    }
    fn length_scale(&self) -> f64 {
        (**self).length_scale()
    }
}

/// `k`-th derivative of another smooth function.
#[derive(Clone)]
pub struct Derived {
    inner: Arc<dyn Smooth>,
    k: usize,
}

impl Derived {
    pub fn new(inner: Arc<dyn Smooth>, k: usize) -> Result<Self, TestFnError> {
        if k > inner.max_order() {
            return Err(TestFnError::OrderTooHigh {
                k,
                max: inner.max_order(),
            });
        }
        Ok(Self { inner, k })
    }
}

impl Smooth for Derived {
    fn derivative(&self, k: usize, x: f64) -> Result<f64, TestFnError> {
        self.inner.derivative(k + self.k, x)
    }
    fn max_order(&self) -> usize {
        self.inner.max_order() - self.k
    }
    fn support(&self) -> Option<(f64, f64)> {
        self.inner.support()
    }
    fn breakpoints(&self) -> Vec<f64> {
        self.inner.breakpoints()
    }
    fn growth(&self) -> Growth {
        self.inner.growth()
    }
    fn length_scale(&self) -> f64 {
        self.inner.length_scale()
    }
}

/// Adapter exposing a [`Smooth`] function as a [`ScalarOracle`].
pub struct SmoothOracle<'a>(pub &'a dyn Smooth);

impl ScalarOracle for SmoothOracle<'_> {
    fn derivatives(&self, x: f64, order: usize) -> Result<Vec<f64>, OracleError> {
        (0..=order)
            .map(|k| {
                self.0.derivative(k, x).map_err(|_| OracleError::OrderUnavailable {
                    requested: order,
                    available: self.0.max_order(),
                })
            })
            .collect()
    }
}
