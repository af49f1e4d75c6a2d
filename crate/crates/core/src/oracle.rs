//! Derivative oracles.
//!
//! Three ways of obtaining derivatives are supported, from most to least
//! accurate: closed forms supplied by the caller, jets evaluated through a
//! pure truncated algebra (see [`crate::weil::JetOracle`]), and central
//! finite differences.

use std::sync::Arc;

use thiserror::Error;

use crate::weil::{MultiIndex, TruncatedPoly};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("derivative of order {requested} requested, oracle provides at most {available}")]
    OrderUnavailable { requested: usize, available: usize },
    #[error("point {x} is outside the domain of the function")]
    Domain { x: f64 },
    #[error("oracle produced a non-finite value at {x}")]
    NonFinite { x: f64 },
    #[error("oracle expects {expected} variables, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("{0}")]
    Other(String),
}

/// Scalar function of one variable with access to its derivatives.
pub trait ScalarOracle: Send + Sync {
    /// Returns `[g(x), g'(x), ..., g^(order)(x)]`.
    fn derivatives(&self, x: f64, order: usize) -> Result<Vec<f64>, OracleError>;

    fn value(&self, x: f64) -> Result<f64, OracleError> {
        Ok(self.derivatives(x, 0)?[0])
    }
}

impl<T: ScalarOracle + ?Sized> ScalarOracle for Arc<T> {
    fn derivatives(&self, x: f64, order: usize) -> Result<Vec<f64>, OracleError> {
        (**self).derivatives(x, order)
    }
}

impl<T: ScalarOracle + ?Sized> ScalarOracle for &T {
    fn derivatives(&self, x: f64, order: usize) -> Result<Vec<f64>, OracleError> {
        (**self).derivatives(x, order)
    }
}

/// Elementary functions with closed-form derivatives of every order.
#[derive(Debug, Clone, PartialEq)]
pub enum Elementary {
    Exp,
    Sin,
    Cos,
    /// `x^(1/2)`, defined for `x > 0`.
    Sqrt,
    /// Natural logarithm, defined for `x > 0`.
    Ln,
    /// `1/x`.
    Recip,
    /// `x^n` for integer `n`.
    Powi(i32),
    /// Polynomial with coefficients in increasing degree.
    Poly(Vec<f64>),
}

fn falling_factorial(a: f64, n: usize) -> f64 {
    (0..n).fold(1.0, |acc, i| acc * (a - i as f64))
}

impl ScalarOracle for Elementary {
    fn derivatives(&self, x: f64, order: usize) -> Result<Vec<f64>, OracleError> {
        let out: Vec<f64> = match self {
            Elementary::Exp => vec![x.exp(); order + 1],
            Elementary::Sin => (0..=order)
                .map(|k| match k % 4 {
                    0 => x.sin(),
                    1 => x.cos(),
                    2 => -x.sin(),
                    _ => -x.cos(),
                })
                .collect(),
            Elementary::Cos => (0..=order)
                .map(|k| match k % 4 {
                    0 => x.cos(),
                    1 => -x.sin(),
                    2 => -x.cos(),
                    _ => x.sin(),
                })
                .collect(),
            Elementary::Sqrt => {
                if x <= 0.0 {
                    return Err(OracleError::Domain { x });
                }
                (0..=order)
                    .map(|k| falling_factorial(0.5, k) * x.powf(0.5 - k as f64))
                    .collect()
            }
            Elementary::Ln => {
                if x <= 0.0 {
                    return Err(OracleError::Domain { x });
                }
                (0..=order)
                    .map(|k| {
                        if k == 0 {
                            x.ln()
                        } else {
                            // (k-1)! (-1)^(k-1) x^-k
                            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                            sign * factorial(k - 1) * x.powi(-(k as i32))
                        }
                    })
                    .collect()
            }
            Elementary::Recip => {
                if x == 0.0 {
                    return Err(OracleError::Domain { x });
                }
                (0..=order)
                    .map(|k| {
                        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                        sign * factorial(k) * x.powi(-(k as i32) - 1)
                    })
                    .collect()
            }
            Elementary::Powi(n) => {
                if *n < 0 && x == 0.0 {
                    return Err(OracleError::Domain { x });
                }
                (0..=order)
                    .map(|k| {
                        if *n >= 0 && k as i32 > *n {
                            0.0
                        } else {
                            falling_factorial(*n as f64, k) * x.powi(*n - k as i32)
                        }
                    })
                    .collect()
            }
            Elementary::Poly(c) => {
                let mut cur = c.clone();
                let mut out = Vec::with_capacity(order + 1);
                for _ in 0..=order {
                    out.push(cur.iter().rev().fold(0.0, |acc, &a| acc * x + a));
                    cur = cur
                        .iter()
                        .enumerate()
                        .skip(1)
                        .map(|(i, &a)| a * i as f64)
                        .collect();
                }
                out
            }
        };
        if out.iter().any(|v| !v.is_finite()) {
            return Err(OracleError::NonFinite { x });
        }
        Ok(out)
    }
}

/// Caller-provided closed form `(x, k) -> g^(k)(x)`, valid up to `max_order`.
pub struct ClosedForm<F> {
    f: F,
    max_order: usize,
}

impl<F> ClosedForm<F>
where
    F: Fn(f64, usize) -> f64 + Send + Sync,
{
    pub fn new(max_order: usize, f: F) -> Self {
        Self { f, max_order }
    }
}

impl<F> ScalarOracle for ClosedForm<F>
where
    F: Fn(f64, usize) -> f64 + Send + Sync,
{
    fn derivatives(&self, x: f64, order: usize) -> Result<Vec<f64>, OracleError> {
        if order > self.max_order {
            return Err(OracleError::OrderUnavailable {
                requested: order,
                available: self.max_order,
            });
        }
        let v: Vec<f64> = (0..=order).map(|k| (self.f)(x, k)).collect();
        if v.iter().any(|y| !y.is_finite()) {
            return Err(OracleError::NonFinite { x });
        }
        Ok(v)
    }
}

/// Central finite differences on a plain evaluator.
///
/// The k-th derivative uses a second-order central stencil with step
/// `eps^(1/(k+2)) * (1 + |x|)`; for `k = 1` this is the cube root of machine
/// epsilon.
pub struct FiniteDifference<F> {
    f: F,
    max_order: usize,
}

impl<F> FiniteDifference<F>
where
    F: Fn(f64) -> f64 + Send + Sync,
{
    pub fn new(f: F) -> Self {
        Self { f, max_order: 4 }
    }

    pub fn with_max_order(mut self, max_order: usize) -> Self {
        self.max_order = max_order;
        self
    }
}

pub fn fd_step(order: usize, x: f64) -> f64 {
    f64::EPSILON.powf(1.0 / (order as f64 + 2.0)) * (1.0 + x.abs())
}

impl<F> ScalarOracle for FiniteDifference<F>
where
    F: Fn(f64) -> f64 + Send + Sync,
{
    fn derivatives(&self, x: f64, order: usize) -> Result<Vec<f64>, OracleError> {
        if order > self.max_order {
            return Err(OracleError::OrderUnavailable {
                requested: order,
                available: self.max_order,
            });
        }
        let mut out = vec![(self.f)(x)];
        for k in 1..=order {
            let h = fd_step(k, x);
            let st = central_stencil(k, 2);
            let v: f64 = st
                .iter()
                .map(|&(off, w)| w * (self.f)(x + off as f64 * h))
                .sum::<f64>()
                / h.powi(k as i32);
            out.push(v);
        }
        if out.iter().any(|y| !y.is_finite()) {
            return Err(OracleError::NonFinite { x });
        }
        Ok(out)
    }
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Fornberg's algorithm: weights `w[m][j]` such that
/// `f^(m)(x0) ~ sum_j w[m][j] f(points[j])` for `m = 0..=max_order`.
pub fn fornberg_weights(x0: f64, points: &[f64], max_order: usize) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut c = vec![vec![0.0; n]; max_order + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = points[0] - x0;
    for i in 1..n {
        let mn = i.min(max_order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = points[i] - x0;
        for j in 0..i {
            let c3 = points[i] - points[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Central stencil for the `order`-th derivative with the given (even)
/// accuracy, as `(offset, weight)` pairs on a unit grid.
pub fn central_stencil(order: usize, accuracy: usize) -> Vec<(i32, f64)> {
    let half = ((order + 1) / 2 + accuracy / 2 - 1).max(1) as i32;
    let offsets: Vec<i32> = (-half..=half).collect();
    let pts: Vec<f64> = offsets.iter().map(|&o| o as f64).collect();
    let w = fornberg_weights(0.0, &pts, order);
    offsets
        .into_iter()
        .zip(w[order].iter().copied())
        .filter(|(_, w)| *w != 0.0)
        .collect()
}

/// Function of several variables with access to partial derivatives.
pub trait MultiOracle: Send + Sync {
    fn nvars(&self) -> usize;

    /// `d^alpha f (at)`.
    fn partial(&self, alpha: &MultiIndex, at: &[f64]) -> Result<f64, OracleError>;

    /// Taylor polynomial at `at` truncated below `order`, coefficients
    /// `d^alpha f(at) / alpha!`.
    fn taylor(&self, at: &[f64], order: usize) -> Result<TruncatedPoly, OracleError> {
        let l = self.nvars();
        if at.len() != l {
            return Err(OracleError::Arity {
                expected: l,
                got: at.len(),
            });
        }
        let mut p = TruncatedPoly::zero(l, order);
        for alpha in MultiIndex::all_below(l, order) {
            let v = self.partial(&alpha, at)?;
            if v != 0.0 {
                let f = alpha.factorial();
                p.set(alpha, v / f);
            }
        }
        Ok(p)
    }
}

impl<T: MultiOracle + ?Sized> MultiOracle for Arc<T> {
    fn nvars(&self) -> usize {
        (**self).nvars()
    }
    fn partial(&self, alpha: &MultiIndex, at: &[f64]) -> Result<f64, OracleError> {
        (**self).partial(alpha, at)
    }
    fn taylor(&self, at: &[f64], order: usize) -> Result<TruncatedPoly, OracleError> {
        (**self).taylor(at, order)
    }
}

impl<T: MultiOracle + ?Sized> MultiOracle for &T {
    fn nvars(&self) -> usize {
        (**self).nvars()
    }
    fn partial(&self, alpha: &MultiIndex, at: &[f64]) -> Result<f64, OracleError> {
        (**self).partial(alpha, at)
    }
    fn taylor(&self, at: &[f64], order: usize) -> Result<TruncatedPoly, OracleError> {
        (**self).taylor(at, order)
    }
}

impl MultiOracle for TruncatedPoly {
    fn nvars(&self) -> usize {
        self.nvars()
    }

    fn partial(&self, alpha: &MultiIndex, at: &[f64]) -> Result<f64, OracleError> {
        if at.len() != self.nvars() {
            return Err(OracleError::Arity {
                expected: self.nvars(),
                got: at.len(),
            });
        }
        Ok(self.partial_at(alpha, at))
    }
}

/// Closed-form partials `(alpha, x) -> d^alpha f(x)`.
pub struct ClosedFormMulti<F> {
    nvars: usize,
    f: F,
}

impl<F> ClosedFormMulti<F>
where
    F: Fn(&MultiIndex, &[f64]) -> Option<f64> + Send + Sync,
{
    pub fn new(nvars: usize, f: F) -> Self {
        Self { nvars, f }
    }
}

impl<F> MultiOracle for ClosedFormMulti<F>
where
    F: Fn(&MultiIndex, &[f64]) -> Option<f64> + Send + Sync,
{
    fn nvars(&self) -> usize {
        self.nvars
    }

    fn partial(&self, alpha: &MultiIndex, at: &[f64]) -> Result<f64, OracleError> {
        if at.len() != self.nvars {
            return Err(OracleError::Arity {
                expected: self.nvars,
                got: at.len(),
            });
        }
        match (self.f)(alpha, at) {
            Some(v) if v.is_finite() => Ok(v),
            Some(_) => Err(OracleError::NonFinite { x: at[0] }),
            None => Err(OracleError::OrderUnavailable {
                requested: alpha.order() as usize,
                available: 0,
            }),
        }
    }
}

/// Mixed partials by tensor products of central stencils.
pub struct FiniteDifferenceMulti<F> {
    nvars: usize,
    f: F,
}

impl<F> FiniteDifferenceMulti<F>
where
    F: Fn(&[f64]) -> f64 + Send + Sync,
{
    pub fn new(nvars: usize, f: F) -> Self {
        Self { nvars, f }
    }
}

impl<F> MultiOracle for FiniteDifferenceMulti<F>
where
    F: Fn(&[f64]) -> f64 + Send + Sync,
{
    fn nvars(&self) -> usize {
        self.nvars
    }

    fn partial(&self, alpha: &MultiIndex, at: &[f64]) -> Result<f64, OracleError> {
        if at.len() != self.nvars {
            return Err(OracleError::Arity {
                expected: self.nvars,
                got: at.len(),
            });
        }
        let total = alpha.order() as usize;
        let scale = at.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let h = fd_step(total.max(1), scale);
        let stencils: Vec<Vec<(i32, f64)>> = alpha
            .exponents()
            .iter()
            .map(|&a| {
                if a == 0 {
                    vec![(0, 1.0)]
                } else {
                    central_stencil(a as usize, 2)
                }
            })
            .collect();
        let mut acc = 0.0;
        let mut idx = vec![0usize; self.nvars];
        let mut x = at.to_vec();
        loop {
            let mut w = 1.0;
            for (i, st) in stencils.iter().enumerate() {
                let (off, wi) = st[idx[i]];
                w *= wi;
                x[i] = at[i] + off as f64 * h;
            }
            acc += w * (self.f)(&x);
            // odometer increment
            let mut i = 0;
            loop {
                if i == self.nvars {
                    let v = acc / h.powi(total as i32);
                    return if v.is_finite() {
                        Ok(v)
                    } else {
                        Err(OracleError::NonFinite { x: at[0] })
                    };
                }
                idx[i] += 1;
                if idx[i] < stencils[i].len() {
                    break;
                }
                idx[i] = 0;
                i += 1;
            }
            if self.nvars == 0 {
                return Ok(acc);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fornberg_reproduces_classic_stencils() {
        let st = central_stencil(1, 4);
        let expect = [(-2, 1.0 / 12.0), (-1, -8.0 / 12.0), (1, 8.0 / 12.0), (2, -1.0 / 12.0)];
        assert_eq!(st.len(), 4);
        for ((o, w), (eo, ew)) in st.iter().zip(expect.iter()) {
            assert_eq!(o, eo);
            assert!((w - ew).abs() < 1e-15);
        }
        let st2 = central_stencil(2, 4);
        let w: Vec<f64> = st2.iter().map(|p| p.1 * 12.0).collect();
        for (a, b) in w.iter().zip([-1.0, 16.0, -30.0, 16.0, -1.0]) {
            assert!((a - b).abs() < 1e-12, "{w:?}");
        }
    }

    #[test]
    fn elementary_derivatives() {
        let d = Elementary::Sqrt.derivatives(4.0, 2).unwrap();
        assert!((d[0] - 2.0).abs() < 1e-15);
        assert!((d[1] - 0.25).abs() < 1e-15);
        assert!((d[2] + 1.0 / 32.0).abs() < 1e-15);
        let r = Elementary::Recip.derivatives(2.0, 3).unwrap();
        assert_eq!(r, vec![0.5, -0.25, 0.25, -6.0 / 16.0]);
        let p = Elementary::Poly(vec![1.0, 2.0, 3.0]).derivatives(2.0, 3).unwrap();
        assert_eq!(p, vec![17.0, 14.0, 6.0, 0.0]);
        assert!(Elementary::Sqrt.derivatives(-1.0, 0).is_err());
        assert_eq!(Elementary::Powi(2).derivatives(3.0, 3).unwrap(), vec![9.0, 6.0, 2.0, 0.0]);
    }

    #[test]
    fn finite_difference_matches_closed_form() {
        let fd = FiniteDifference::new(|x: f64| x.sin());
        let d = fd.derivatives(0.7, 2).unwrap();
        assert!((d[1] - 0.7f64.cos()).abs() < 1e-9);
        assert!((d[2] + 0.7f64.sin()).abs() < 1e-6);
    }

    #[test]
    fn closed_form_order_limit() {
        let cf = ClosedForm::new(1, |x: f64, k| if k == 0 { x * x } else { 2.0 * x });
        assert!(cf.derivatives(1.0, 1).is_ok());
        assert!(matches!(
            cf.derivatives(1.0, 2),
            Err(OracleError::OrderUnavailable { .. })
        ));
    }

    #[test]
    fn mixed_partial_by_finite_differences() {
        // d^2/ds1 ds2 of s1 s2 e^{s1} at 0 is 1
        let f = FiniteDifferenceMulti::new(2, |x: &[f64]| x[0] * x[1] * x[0].exp());
        let v = f.partial(&MultiIndex::new(vec![1, 1]), &[0.0, 0.0]).unwrap();
        assert!((v - 1.0).abs() < 1e-6, "{v}");
    }
}
