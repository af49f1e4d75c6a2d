use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use super::{TruncatedPoly, WeilAlgebra, WeilError};
use crate::oracle::{factorial, ScalarOracle};

/// Element of a Weil algebra, stored as coordinates over its quotient basis.
#[derive(Clone, Debug)]
pub struct WeilElement {
    algebra: Arc<WeilAlgebra>,
    coords: Vec<f64>,
}

impl PartialEq for WeilElement {
    fn eq(&self, other: &Self) -> bool {
        same_algebra(&self.algebra, &other.algebra) && self.coords == other.coords
    }
}

fn same_algebra(a: &Arc<WeilAlgebra>, b: &Arc<WeilAlgebra>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl WeilElement {
    pub fn from_coords(algebra: Arc<WeilAlgebra>, coords: Vec<f64>) -> Result<Self, WeilError> {
        if coords.len() != algebra.dim() {
            return Err(WeilError::Dimension {
                expected: algebra.dim(),
                got: coords.len(),
            });
        }
        Ok(Self { algebra, coords })
    }

    pub fn zero(algebra: &Arc<WeilAlgebra>) -> Self {
        Self {
            algebra: algebra.clone(),
            coords: vec![0.0; algebra.dim()],
        }
    }

    pub fn constant(algebra: &Arc<WeilAlgebra>, c: f64) -> Self {
        let mut e = Self::zero(algebra);
        e.coords[algebra.unit_index()] = c;
        e
    }

    pub fn one(algebra: &Arc<WeilAlgebra>) -> Self {
        Self::constant(algebra, 1.0)
    }

    /// Class of the coordinate function `s_var`.
    pub fn variable(algebra: &Arc<WeilAlgebra>, var: usize) -> Result<Self, WeilError> {
        let p = TruncatedPoly::variable(algebra.nvars(), algebra.order(), var);
        Self::from_poly(algebra, &p)
    }

    /// Class of a polynomial.
    pub fn from_poly(algebra: &Arc<WeilAlgebra>, p: &TruncatedPoly) -> Result<Self, WeilError> {
        Ok(Self {
            algebra: algebra.clone(),
            coords: algebra.reduce(p)?,
        })
    }

    pub fn algebra(&self) -> &Arc<WeilAlgebra> {
        &self.algebra
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Value at `s = 0`: the coordinate on the class of 1.
    pub fn augmentation(&self) -> f64 {
        self.coords[self.algebra.unit_index()]
    }

    /// `self - augmentation * 1`.
    pub fn nilpotent_part(&self) -> Self {
        let mut e = self.clone();
        e.coords[self.algebra.unit_index()] = 0.0;
        e
    }

    /// Representative polynomial `sum c_gamma h_gamma`.
    pub fn to_poly(&self) -> TruncatedPoly {
        let basis = self.algebra.basis();
        TruncatedPoly::from_terms(
            self.algebra.nvars(),
            self.algebra.order(),
            basis.into_iter().zip(self.coords.iter().copied()),
        )
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0.0)
    }

    fn check(&self, other: &Self) -> Result<(), WeilError> {
        if same_algebra(&self.algebra, &other.algebra) {
            Ok(())
        } else {
            Err(WeilError::AlgebraMismatch)
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, WeilError> {
        self.check(other)?;
        Ok(Self {
            algebra: self.algebra.clone(),
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, WeilError> {
        self.try_add(&other.scale(-1.0))
    }

    /// Product through the structure constants.
    pub fn try_mul(&self, other: &Self) -> Result<Self, WeilError> {
        self.check(other)?;
        let dim = self.algebra.dim();
        let table = self.algebra.table();
        let mut out = vec![0.0; dim];
        for (i, &a) in self.coords.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (j, &b) in other.coords.iter().enumerate() {
                if b == 0.0 {
                    continue;
                }
                let ab = a * b;
                for (o, &t) in out.iter_mut().zip(&table[i][j]) {
                    if t != 0.0 {
                        *o += ab * t;
                    }
                }
            }
        }
        Ok(Self {
            algebra: self.algebra.clone(),
            coords: out,
        })
    }

    pub fn scale(&self, k: f64) -> Self {
        Self {
            algebra: self.algebra.clone(),
            coords: self.coords.iter().map(|c| c * k).collect(),
        }
    }

    pub fn add_scalar(&self, k: f64) -> Self {
        let mut e = self.clone();
        e.coords[self.algebra.unit_index()] += k;
        e
    }

    pub fn powi(&self, n: u32) -> Self {
        let mut acc = Self::one(&self.algebra);
        for _ in 0..n {
            acc = acc.try_mul(self).expect("same algebra");
        }
        acc
    }

    /// Taylor lift `sum_n g^(n)(a) (w - a)^n / n!` with `a` the augmentation.
    /// The series stops at `n = r - 1`: `(w - a)^r` vanishes in the algebra.
    pub fn lift<G: ScalarOracle + ?Sized>(&self, g: &G) -> Result<Self, WeilError> {
        taylor_lift(g, self)
    }

    /// Multiplicative inverse; requires a nonzero augmentation.
    pub fn recip(&self) -> Result<Self, WeilError> {
        self.lift(&crate::oracle::Elementary::Recip)
    }

    pub fn try_div(&self, other: &Self) -> Result<Self, WeilError> {
        self.try_mul(&other.recip()?)
    }
}

/// Lifts a scalar function through a Weil element:
/// `g(a) + g'(a) N + g''(a)/2! N^2 + ... + g^(r-1)(a)/(r-1)! N^(r-1)`,
/// where `a` is the augmentation of `w` and `N = w - a`.
pub fn taylor_lift<G: ScalarOracle + ?Sized>(g: &G, w: &WeilElement) -> Result<WeilElement, WeilError> {
    let r = w.algebra.order();
    let a = w.augmentation();
    let derivs = g.derivatives(a, r - 1)?;
    let n = w.nilpotent_part();
    // Horner in N
    let mut acc = WeilElement::constant(&w.algebra, derivs[r - 1] / factorial(r - 1));
    for k in (0..r - 1).rev() {
        acc = acc.try_mul(&n)?.add_scalar(derivs[k] / factorial(k));
    }
    Ok(acc)
}

impl Add for &WeilElement {
    type Output = WeilElement;
    fn add(self, rhs: &WeilElement) -> WeilElement {
        self.try_add(rhs).expect("elements of different Weil algebras")
    }
}

impl Sub for &WeilElement {
    type Output = WeilElement;
    fn sub(self, rhs: &WeilElement) -> WeilElement {
        self.try_sub(rhs).expect("elements of different Weil algebras")
    }
}

impl Mul for &WeilElement {
    type Output = WeilElement;
    fn mul(self, rhs: &WeilElement) -> WeilElement {
        self.try_mul(rhs).expect("elements of different Weil algebras")
    }
}

impl Neg for &WeilElement {
    type Output = WeilElement;
    fn neg(self) -> WeilElement {
        self.scale(-1.0)
    }
}

impl fmt::Display for WeilElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_poly())
    }
}
