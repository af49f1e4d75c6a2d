use std::sync::Arc;

use super::{Growth, Smooth, TestFnError};
use crate::quad::gauss_legendre;

const NODES: usize = 24;

/// The smooth quotient `psi` with `phi(x) = phi(0) + x psi(x)`.
///
/// Near the origin `psi^(k)(x) = int_0^1 s^k phi^(k+1)(x s) ds` is integrated
/// with a fixed Gauss-Legendre rule; this has no cancellation. Further out
/// the quotient `(phi(x) - phi(0))/x` and its derivatives
/// `psi^(k) = (phi^(k) - k psi^(k-1))/x` are used directly.
#[derive(Clone)]
pub struct HadamardQuotient {
    phi: Arc<dyn Smooth>,
    phi0: f64,
    inner: f64,
}

impl HadamardQuotient {
    pub fn new(phi: Arc<dyn Smooth>) -> Self {
        let phi0 = phi.value(0.0);
        let nearest = phi
            .breakpoints()
            .iter()
            .map(|p| p.abs())
            .fold(f64::INFINITY, f64::min);
        let inner = 0.5 * nearest.min(phi.length_scale());
        Self { phi, phi0, inner }
    }

    pub fn phi(&self) -> &Arc<dyn Smooth> {
        &self.phi
    }
}

impl Smooth for HadamardQuotient {
    fn derivative(&self, k: usize, x: f64) -> Result<f64, TestFnError> {
        let max = self.max_order();
        if k > max {
            return Err(TestFnError::OrderTooHigh { k, max });
        }
        if x == 0.0 {
            return Ok(self.phi.derivative(k + 1, 0.0)? / (k + 1) as f64);
        }
        if x.abs() < self.inner {
            let rule = gauss_legendre(NODES);
            let mut acc = 0.0;
            for (&u, &w) in rule.nodes.iter().zip(&rule.weights) {
                let s = 0.5 * (u + 1.0);
                acc += 0.5 * w * s.powi(k as i32) * self.phi.derivative(k + 1, x * s)?;
            }
            return Ok(acc);
        }
        let mut psi = (self.phi.value(x) - self.phi0) / x;
        for j in 1..=k {
            psi = (self.phi.derivative(j, x)? - j as f64 * psi) / x;
        }
        Ok(psi)
    }

    fn max_order(&self) -> usize {
        self.phi.max_order().saturating_sub(1)
    }

    fn support(&self) -> Option<(f64, f64)> {
        match self.phi.support() {
            Some(s) if self.phi0 == 0.0 => Some(s),
            _ => None,
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.phi.breakpoints()
    }

    fn growth(&self) -> Growth {
        match self.phi.growth() {
            Growth::Compact if self.phi0 == 0.0 => Growth::Compact,
            Growth::Compact | Growth::Bounded => Growth::Bounded,
            Growth::Polynomial(d) => Growth::Polynomial(d.saturating_sub(1)),
        }
    }

    fn length_scale(&self) -> f64 {
        self.phi.length_scale()
    }
}
