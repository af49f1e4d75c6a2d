//! Derivatives by self-application: evaluate a function on `x + s` in the
//! pure truncated algebra `C^inf(R^l)/M^r` and read off Taylor coefficients.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use super::{MultiIndex, TruncatedPoly, WeilAlgebra, WeilElement, WeilError};
use crate::oracle::{MultiOracle, OracleError, ScalarOracle};

/// Shared instance of the pure truncation `C^inf(R^l)/M^r`.
pub fn truncated_algebra(l: usize, r: usize) -> Arc<WeilAlgebra> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<WeilAlgebra>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("algebra cache poisoned");
    guard
        .entry((l, r))
        .or_insert_with(|| Arc::new(WeilAlgebra::truncated(l, r).expect("r >= 1")))
        .clone()
}

/// Univariate jet `x + eps` in `R[eps]/(eps^(order+1))`.
pub fn univariate_jet(x: f64, order: usize) -> WeilElement {
    let a = truncated_algebra(1, order + 1);
    WeilElement::variable(&a, 0)
        .expect("one variable")
        .add_scalar(x)
}

/// Derivatives `g(x), ..., g^(order)(x)` read from a univariate jet.
pub fn jet_to_derivatives(jet: &WeilElement) -> Vec<f64> {
    // pure truncation: basis is 1, s, s^2, ... in order
    let mut fact = 1.0;
    jet.coords()
        .iter()
        .enumerate()
        .map(|(k, &c)| {
            if k > 0 {
                fact *= k as f64;
            }
            c * fact
        })
        .collect()
}

type JetFn1 = dyn Fn(&WeilElement) -> Result<WeilElement, WeilError> + Send + Sync;

/// Scalar oracle defined by a function on univariate jets.
#[derive(Clone)]
pub struct JetScalar {
    f: Arc<JetFn1>,
}

impl JetScalar {
    pub fn new<F>(f: F) -> Self
    where
        F: Fn(&WeilElement) -> Result<WeilElement, WeilError> + Send + Sync + 'static,
    {
        Self { f: Arc::new(f) }
    }

    pub fn apply(&self, w: &WeilElement) -> Result<WeilElement, WeilError> {
        (self.f)(w)
    }
}

impl ScalarOracle for JetScalar {
    fn derivatives(&self, x: f64, order: usize) -> Result<Vec<f64>, OracleError> {
        let jet = (self.f)(&univariate_jet(x, order)).map_err(|e| match e {
            WeilError::Oracle(o) => o,
            other => OracleError::Other(other.to_string()),
        })?;
        let d = jet_to_derivatives(&jet);
        if d.iter().any(|v| !v.is_finite()) {
            return Err(OracleError::NonFinite { x });
        }
        Ok(d)
    }
}

/// Multivariate oracle from a function on jets, exact to order `< order`.
pub struct JetOracle<F> {
    nvars: usize,
    algebra: Arc<WeilAlgebra>,
    f: F,
}

impl<F> JetOracle<F>
where
    F: Fn(&[WeilElement]) -> Result<WeilElement, WeilError> + Send + Sync,
{
    /// `order` bounds the partials available: `|alpha| < order`.
    pub fn new(nvars: usize, order: usize, f: F) -> Self {
        Self {
            nvars,
            algebra: truncated_algebra(nvars, order),
            f,
        }
    }

    pub fn jet_at(&self, at: &[f64]) -> Result<WeilElement, OracleError> {
        if at.len() != self.nvars {
            return Err(OracleError::Arity {
                expected: self.nvars,
                got: at.len(),
            });
        }
        let vars = (0..self.nvars)
            .map(|i| {
                WeilElement::variable(&self.algebra, i)
                    .map(|v| v.add_scalar(at[i]))
                    .map_err(|e| OracleError::Other(e.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        (self.f)(&vars).map_err(|e| match e {
            WeilError::Oracle(o) => o,
            other => OracleError::Other(other.to_string()),
        })
    }
}

impl<F> MultiOracle for JetOracle<F>
where
    F: Fn(&[WeilElement]) -> Result<WeilElement, WeilError> + Send + Sync,
{
    fn nvars(&self) -> usize {
        self.nvars
    }

    fn partial(&self, alpha: &MultiIndex, at: &[f64]) -> Result<f64, OracleError> {
        if alpha.order() as usize >= self.algebra.order() {
            return Err(OracleError::OrderUnavailable {
                requested: alpha.order() as usize,
                available: self.algebra.order() - 1,
            });
        }
        let jet = self.jet_at(at)?;
        Ok(jet.to_poly().get(alpha) * alpha.factorial())
    }

    fn taylor(&self, at: &[f64], order: usize) -> Result<TruncatedPoly, OracleError> {
        if order > self.algebra.order() {
            return Err(OracleError::OrderUnavailable {
                requested: order - 1,
                available: self.algebra.order() - 1,
            });
        }
        Ok(self.jet_at(at)?.to_poly().truncate(order))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::Elementary;

    #[test]
    fn cos_of_sqrt_derivatives() {
        // cos(sqrt(t)) = 1 - t/2 + t^2/24 - t^3/720 + ...
        let g = JetScalar::new(|w| w.lift(&Elementary::Sqrt)?.lift(&Elementary::Cos));
        let d = g.derivatives(1e-3, 3).unwrap();
        assert!((d[1] + 0.5).abs() < 1e-4);
        assert!((d[2] - 1.0 / 12.0).abs() < 1e-4);
    }

    #[test]
    fn mixed_partial_by_jets() {
        let f = JetOracle::new(2, 3, |x: &[WeilElement]| Ok(&(&x[0] * &x[1]) * &x[0].lift(&Elementary::Exp)?));
        let v = f.partial(&MultiIndex::new(vec![1, 1]), &[0.0, 0.0]).unwrap();
        assert_eq!(v, 1.0);
        assert!(f.partial(&MultiIndex::new(vec![2, 1]), &[0.0, 0.0]).is_err());
    }
}
