use std::collections::BTreeMap;
use std::fmt;

use super::MultiIndex;

/// Polynomial in `nvars` variables with every monomial of order `>= order`
/// discarded, i.e. a representative of a class in `C^inf(R^l) / M^order`.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedPoly {
    nvars: usize,
    order: usize,
    coeffs: BTreeMap<MultiIndex, f64>,
}

impl TruncatedPoly {
    pub fn zero(nvars: usize, order: usize) -> Self {
        Self {
            nvars,
            order,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, order: usize, c: f64) -> Self {
        let mut p = Self::zero(nvars, order);
        p.set(MultiIndex::zero(nvars), c);
        p
    }

    pub fn monomial(alpha: MultiIndex, order: usize, c: f64) -> Self {
        let mut p = Self::zero(alpha.nvars(), order);
        p.set(alpha, c);
        p
    }

    /// The coordinate function `s_var`.
    pub fn variable(nvars: usize, order: usize, var: usize) -> Self {
        Self::monomial(MultiIndex::unit(nvars, var), order, 1.0)
    }

    pub fn from_terms<I>(nvars: usize, order: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (MultiIndex, f64)>,
    {
        let mut p = Self::zero(nvars, order);
        for (a, c) in terms {
            assert_eq!(a.nvars(), nvars, "multi-index arity");
            let cur = p.get(&a);
            p.set(a, cur + c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn get(&self, alpha: &MultiIndex) -> f64 {
        self.coeffs.get(alpha).copied().unwrap_or(0.0)
    }

    /// Sets a coefficient; monomials at or above the truncation order are dropped.
    pub fn set(&mut self, alpha: MultiIndex, c: f64) {
        if alpha.order() as usize >= self.order {
            return;
        }
        if c == 0.0 {
            self.coeffs.remove(&alpha);
        } else {
            self.coeffs.insert(alpha, c);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, f64)> {
        self.coeffs.iter().map(|(a, &c)| (a, c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn constant_term(&self) -> f64 {
        self.get(&MultiIndex::zero(self.nvars))
    }

    /// Highest order present, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.coeffs.keys().map(|a| a.order()).max()
    }

    /// Re-truncates to a (possibly different) order.
    pub fn truncate(&self, order: usize) -> Self {
        let mut p = Self::zero(self.nvars, order);
        for (a, c) in self.terms() {
            p.set(a.clone(), c);
        }
        p
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars, "variable count mismatch");
        let mut p = self.truncate(self.order.min(other.order));
        for (a, c) in other.terms() {
            let cur = p.get(a);
            p.set(a.clone(), cur + c);
        }
        p
    }

    pub fn scale(&self, k: f64) -> Self {
        let mut p = Self::zero(self.nvars, self.order);
        for (a, c) in self.terms() {
            p.set(a.clone(), c * k);
        }
        p
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    /// Product truncated to the smaller of the two orders.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars, "variable count mismatch");
        let order = self.order.min(other.order);
        let mut p = Self::zero(self.nvars, order);
        for (a, ca) in self.terms() {
            for (b, cb) in other.terms() {
                let ab = a.add(b);
                if (ab.order() as usize) < order {
                    let cur = p.get(&ab);
                    p.set(ab, cur + ca * cb);
                }
            }
        }
        p
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms().map(|(a, c)| c * a.monomial_value(x)).sum()
    }

    /// `d^alpha p (x)`, computed symbolically.
    pub fn partial_at(&self, alpha: &MultiIndex, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (beta, c) in self.terms() {
            let mut term = c;
            for ((&b, &a), &xi) in beta.exponents().iter().zip(alpha.exponents()).zip(x) {
                if a > b {
                    term = 0.0;
                    break;
                }
                // b (b-1) ... (b-a+1) x^(b-a)
                let ff: f64 = (0..a).map(|i| (b - i) as f64).product();
                term *= ff * xi.powi((b - a) as i32);
            }
            acc += term;
        }
        acc
    }
}

impl fmt::Display for TruncatedPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (a, c) in self.terms() {
            let (sign, mag) = if c < 0.0 { ("-", -c) } else { ("+", c) };
            if first {
                if c < 0.0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            if a.order() == 0 {
                write!(f, "{mag}")?;
            } else if mag == 1.0 {
                write!(f, "{a}")?;
            } else {
                write!(f, "{mag}*{a}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(i: usize) -> TruncatedPoly {
        TruncatedPoly::variable(2, 3, i)
    }

    #[test]
    fn multiplication_truncates() {
        let p = s(0).mul(&s(0)).mul(&s(0));
        assert!(p.is_zero());
        let q = s(0).mul(&s(1));
        assert_eq!(q.get(&MultiIndex::new(vec![1, 1])), 1.0);
    }

    #[test]
    fn symbolic_partials() {
        // p = 3 s1^2 s2 + s2
        let p = TruncatedPoly::from_terms(
            2,
            5,
            [(MultiIndex::new(vec![2, 1]), 3.0), (MultiIndex::new(vec![0, 1]), 1.0)],
        );
        assert_eq!(p.partial_at(&MultiIndex::new(vec![1, 0]), &[2.0, 5.0]), 60.0);
        assert_eq!(p.partial_at(&MultiIndex::new(vec![2, 1]), &[0.0, 0.0]), 6.0);
        assert_eq!(p.partial_at(&MultiIndex::new(vec![0, 1]), &[1.0, 0.0]), 4.0);
        assert_eq!(p.partial_at(&MultiIndex::new(vec![3, 0]), &[1.0, 1.0]), 0.0);
    }

    #[test]
    fn display() {
        let p = s(0).mul(&s(0)).sub(&s(1));
        assert_eq!(p.to_string(), "-s2 + s1^2");
    }
}
