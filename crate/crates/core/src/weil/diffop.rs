use serde::{Deserialize, Serialize};

use super::MultiIndex;
use crate::oracle::{MultiOracle, OracleError};

/// Differential operator supported at a point:
/// `f -> sum_k weight_k * d^alpha_k f (base)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiffOperator {
    base: Vec<f64>,
    terms: Vec<(MultiIndex, f64)>,
}

impl DiffOperator {
    pub fn new(base: Vec<f64>, terms: Vec<(MultiIndex, f64)>) -> Self {
        debug_assert!(terms.iter().all(|(a, _)| a.nvars() == base.len()));
        Self { base, terms }
    }

    /// The single operator `d^alpha` at `base`.
    pub fn partial(base: Vec<f64>, alpha: MultiIndex) -> Self {
        Self::new(base, vec![(alpha, 1.0)])
    }

    pub fn base(&self) -> &[f64] {
        &self.base
    }

    pub fn terms(&self) -> &[(MultiIndex, f64)] {
        &self.terms
    }

    pub fn max_order(&self) -> u32 {
        self.terms.iter().map(|(a, _)| a.order()).max().unwrap_or(0)
    }

    pub fn apply<O: MultiOracle + ?Sized>(&self, f: &O) -> Result<f64, OracleError> {
        let mut acc = 0.0;
        for (alpha, w) in &self.terms {
            acc += w * f.partial(alpha, &self.base)?;
        }
        Ok(acc)
    }

    /// Same operator acting in the first `alpha.nvars()` variables of a
    /// function of more variables, with the trailing variables fixed at `t`.
    pub fn apply_partial<O: MultiOracle + ?Sized>(&self, f: &O, t: &[f64]) -> Result<f64, OracleError> {
        let mut at = self.base.clone();
        at.extend_from_slice(t);
        let mut acc = 0.0;
        for (alpha, w) in &self.terms {
            acc += w * f.partial(&alpha.extend(t.len()), &at)?;
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::ClosedFormMulti;
    use crate::weil::TruncatedPoly;

    #[test]
    fn applied_to_polynomials() {
        let s2 = TruncatedPoly::monomial(MultiIndex::new(vec![2]), 5, 1.0);
        let d1 = DiffOperator::partial(vec![0.0], MultiIndex::new(vec![1]));
        assert_eq!(d1.apply(&s2).unwrap(), 0.0);
        let half_d2 = DiffOperator::new(vec![0.0], vec![(MultiIndex::new(vec![2]), 0.5)]);
        assert_eq!(half_d2.apply(&s2).unwrap(), 1.0);
    }

    #[test]
    fn mixed_partial_closed_form() {
        // f = s1 s2 e^{s1}; d^2 f/ds1 ds2 = (1 + s1) e^{s1}
        let f = ClosedFormMulti::new(2, |a: &MultiIndex, x: &[f64]| match a.exponents() {
            [1, 1] => Some((1.0 + x[0]) * x[0].exp()),
            _ => None,
        });
        let d = DiffOperator::partial(vec![0.0, 0.0], MultiIndex::new(vec![1, 1]));
        assert_eq!(d.apply(&f).unwrap(), 1.0);
    }
}
