use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Exponent vector of a monomial `s^alpha` in a fixed number of variables.
///
/// Ordering is graded: lower total order first, ties broken so that larger
/// exponents on earlier variables come first (`1, s1, s2, s1^2, s1 s2, s2^2`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        Self(exponents)
    }

    pub fn zero(nvars: usize) -> Self {
        Self(vec![0; nvars])
    }

    pub fn unit(nvars: usize, var: usize) -> Self {
        let mut e = vec![0; nvars];
        e[var] = 1;
        Self(e)
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    /// `alpha! = prod alpha_i!`
    pub fn factorial(&self) -> f64 {
        self.0
            .iter()
            .map(|&a| (1..=a).fold(1.0, |acc, k| acc * k as f64))
            .product()
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        debug_assert_eq!(self.nvars(), other.nvars());
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Pads with zero exponents for `extra` trailing variables.
    pub fn extend(&self, extra: usize) -> MultiIndex {
        let mut e = self.0.clone();
        e.extend(std::iter::repeat(0).take(extra));
        MultiIndex(e)
    }

    /// Value of `x^alpha`.
    pub fn monomial_value(&self, x: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(x)
            .map(|(&a, &xi)| xi.powi(a as i32))
            .product()
    }

    /// All multi-indices in `nvars` variables with order `< order`, sorted.
    pub fn all_below(nvars: usize, order: usize) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        for total in 0..order as u32 {
            let mut cur = vec![0u32; nvars];
            push_with_total(nvars, 0, total, &mut cur, &mut out);
        }
        out.sort();
        out
    }
}

fn push_with_total(n: usize, i: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
    if n == 0 {
        if left == 0 {
            out.push(MultiIndex(Vec::new()));
        }
        return;
    }
    if i == n - 1 {
        cur[i] = left;
        out.push(MultiIndex(cur.clone()));
        return;
    }
    for a in (0..=left).rev() {
        cur[i] = a;
        push_with_total(n, i + 1, left - a, cur, out);
    }
    cur[i] = 0;
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.order()
            .cmp(&other.order())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.order() == 0 {
            return write!(f, "1");
        }
        let single = self.nvars() == 1;
        let mut first = true;
        for (i, &a) in self.0.iter().enumerate() {
            if a == 0 {
                continue;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if single {
                write!(f, "s")?;
            } else {
                write!(f, "s{}", i + 1)?;
            }
            if a > 1 {
                write!(f, "^{a}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graded_order_listing() {
        let all = MultiIndex::all_below(2, 3);
        let shown: Vec<String> = all.iter().map(|m| m.to_string()).collect();
        assert_eq!(shown, ["1", "s1", "s2", "s1^2", "s1*s2", "s2^2"]);
    }

    #[test]
    fn counts_match_binomials() {
        // number of monomials of order < r in l variables is C(l + r - 1, l)
        assert_eq!(MultiIndex::all_below(1, 4).len(), 4);
        assert_eq!(MultiIndex::all_below(2, 3).len(), 6);
        assert_eq!(MultiIndex::all_below(3, 3).len(), 10);
        assert_eq!(MultiIndex::all_below(0, 3).len(), 1);
    }

    #[test]
    fn factorial_is_multi_factorial() {
        assert_eq!(MultiIndex::new(vec![2, 1]).factorial(), 2.0);
        assert_eq!(MultiIndex::new(vec![3]).factorial(), 6.0);
    }
}
