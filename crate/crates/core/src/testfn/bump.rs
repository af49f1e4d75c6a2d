use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::{Growth, Smooth, TestFnError};

/// Derivative order up to which the recurrence table is built.
pub const TABLE_ORDER: usize = 24;
pub const DEFAULT_MAX_ORDER: usize = 16;

// Below this value of 1 - u^2 every derivative is zero in double precision:
// |R_k| q^(-2k) exp(-1/q) underflows long before.
const EDGE: f64 = 1e-12;

/// Coefficients (ascending in u) of the polynomials R_k with
/// `P^(k)(u) = R_k(u) P(u) / (1 - u^2)^(2k)`, `P(u) = exp(-1/(1 - u^2))`.
fn table() -> &'static [Vec<f64>] {
    static TABLE: OnceLock<Vec<Vec<f64>>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut out = vec![vec![1.0]];
        for k in 0..TABLE_ORDER {
            let r = &out[k];
            // R_{k+1} = (1-u^2)^2 R_k' - 2u R_k + 4k u (1-u^2) R_k
            let mut next = vec![0.0; r.len() + 3];
            for (i, &c) in r.iter().enumerate().skip(1) {
                let d = c * i as f64;
                next[i - 1] += d;
                next[i + 1] -= 2.0 * d;
                next[i + 3] += d;
            }
            let kk = 4.0 * k as f64;
            for (i, &c) in r.iter().enumerate() {
                next[i + 1] += (kk - 2.0) * c;
                next[i + 3] -= kk * c;
            }
            while next.len() > 1 && next.last() == Some(&0.0) {
                next.pop();
            }
            out.push(next);
        }
        out
    })
}

fn horner(c: &[f64], u: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * u + a)
}

/// `A exp(-1/(1-u^2))` with `u = (2x - a - b)/(b - a)`, zero outside `(a, b)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    a: f64,
    b: f64,
    amplitude: f64,
    max_order: usize,
}

impl Bump {
    pub fn new(a: f64, b: f64) -> Result<Self, TestFnError> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(TestFnError::Support { a, b });
        }
        Ok(Self {
            a,
            b,
            amplitude: 1.0,
            max_order: DEFAULT_MAX_ORDER,
        })
    }

    /// Bump on `[-1, 1]` with unit amplitude.
    pub fn standard() -> Self {
        Self::new(-1.0, 1.0).expect("valid interval")
    }

    pub fn with_amplitude(mut self, amplitude: f64) -> Self {
        self.amplitude = amplitude;
        self
    }

    pub fn with_max_order(mut self, max_order: usize) -> Result<Self, TestFnError> {
        if max_order > TABLE_ORDER {
            return Err(TestFnError::OrderTooHigh {
                k: max_order,
                max: TABLE_ORDER,
            });
        }
        self.max_order = max_order;
        Ok(self)
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.a + self.b)
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.b - self.a)
    }

    pub fn translate(&self, c: f64) -> Self {
        Self {
            a: self.a + c,
            b: self.b + c,
            ..self.clone()
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.eval_derivative(0, x)
    }

    fn eval_derivative(&self, k: usize, x: f64) -> f64 {
        if !(x > self.a && x < self.b) {
            return 0.0;
        }
        let s = 2.0 / (self.b - self.a);
        let u = (x - self.a) * s - 1.0;
        let q = 1.0 - u * u;
        if q <= EDGE {
            return 0.0;
        }
        let expo = -1.0 / q - 2.0 * k as f64 * q.ln();
        let v = self.amplitude * s.powi(k as i32) * horner(&table()[k], u) * expo.exp();
        // keep the exact-zero contract even when the product underflows to -0
        if v == 0.0 {
            0.0
        } else {
            v
        }
    }
}

impl Smooth for Bump {
    fn derivative(&self, k: usize, x: f64) -> Result<f64, TestFnError> {
        if k > self.max_order {
            return Err(TestFnError::OrderTooHigh { k, max: self.max_order });
        }
        Ok(self.eval_derivative(k, x))
    }

    fn max_order(&self) -> usize {
        self.max_order
    }

    fn support(&self) -> Option<(f64, f64)> {
        Some((self.a, self.b))
    }

    fn breakpoints(&self) -> Vec<f64> {
        vec![self.a, self.b]
    }

    fn growth(&self) -> Growth {
        Growth::Compact
    }

    fn length_scale(&self) -> f64 {
        self.half_width()
    }
}
