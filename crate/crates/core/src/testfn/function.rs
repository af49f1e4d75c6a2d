use serde::{Deserialize, Serialize};

use super::{Bump, Growth, Smooth, TestFnError, DEFAULT_MAX_ORDER};
use crate::oracle::Elementary;
use crate::weil::{jet_to_derivatives, univariate_jet, WeilElement};

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `d^j/dx^j` of the polynomial with ascending coefficients `c`, at `x`.
fn poly_derivative(c: &[f64], j: usize, x: f64) -> f64 {
    let mut acc = 0.0;
    for i in (j..c.len()).rev() {
        let falling = ((i - j + 1)..=i).fold(1.0, |p, m| p * m as f64);
        acc = acc * x + c[i] * falling;
    }
    acc
}

fn poly_mul(p: &[f64], q: &[f64]) -> Vec<f64> {
    if p.is_empty() || q.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; p.len() + q.len() - 1];
    for (i, a) in p.iter().enumerate() {
        for (j, b) in q.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    out
}

/// Coefficients of `p(x - c)`.
fn poly_shift(p: &[f64], c: f64) -> Vec<f64> {
    let mut out = vec![0.0; p.len()];
    for (i, &a) in p.iter().enumerate() {
        // a (x - c)^i
        for (j, o) in out.iter_mut().enumerate().take(i + 1) {
            *o += a * binomial(i, j) * (-c).powi((i - j) as i32);
        }
    }
    out
}

/// Smooth plateau: 1 on `[c - B, c + B]`, 0 outside `(c - B - w, c + B + w)`,
/// with ramps built from `e^(-1/y) / (e^(-1/y) + e^(-1/(1-y)))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Plateau {
    center: f64,
    half_width: f64,
    ramp: f64,
}

impl Plateau {
    pub fn new(half_width: f64, ramp: f64) -> Result<Self, TestFnError> {
        if !(half_width >= 0.0 && ramp > 0.0 && half_width.is_finite() && ramp.is_finite()) {
            return Err(TestFnError::Parameter(format!(
                "plateau needs half width >= 0 and ramp > 0, got {half_width}, {ramp}"
            )));
        }
        Ok(Self {
            center: 0.0,
            half_width,
            ramp,
        })
    }

    pub fn translate(&self, c: f64) -> Self {
        Self {
            center: self.center + c,
            ..self.clone()
        }
    }

    pub fn interval(&self) -> (f64, f64) {
        let r = self.half_width + self.ramp;
        (self.center - r, self.center + r)
    }

    fn derivative(&self, k: usize, x: f64) -> f64 {
        let y = x - self.center;
        let (b, w) = (self.half_width, self.ramp);
        if y.abs() >= b + w {
            return 0.0;
        }
        if y.abs() <= b {
            return if k == 0 { 1.0 } else { 0.0 };
        }
        // ramp coordinate in (0, 1), increasing towards the plateau
        let (z, dz) = if y < 0.0 { ((y + b + w) / w, 1.0 / w) } else { ((b + w - y) / w, -1.0 / w) };
        let d = step_derivatives(z, k);
        let v = d[k] * dz.powi(k as i32);
        if v == 0.0 {
            0.0
        } else {
            v
        }
    }
}

fn step_derivatives(z: f64, k: usize) -> Vec<f64> {
    let jet = univariate_jet(z, k);
    let e = |w: &WeilElement| -> WeilElement {
        let a = w.augmentation();
        // e^(-1/a) and all its derivatives underflow for a < 1/745
        if a <= 1.0 / 740.0 {
            return WeilElement::zero(w.algebra());
        }
        w.lift(&Elementary::Recip)
            .and_then(|r| r.scale(-1.0).lift(&Elementary::Exp))
            .expect("finite jet")
    };
    let left = e(&jet);
    let right = e(&jet.scale(-1.0).add_scalar(1.0));
    if left.is_zero() || right.is_zero() {
        let mut d = vec![0.0; k + 1];
        d[0] = if left.is_zero() { 0.0 } else { 1.0 };
        return d;
    }
    let step = left.try_div(&(&left + &right)).expect("denominator is positive");
    jet_to_derivatives(&step)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Profile {
    Bump(Bump),
    Plateau(Plateau),
}

impl Profile {
    fn interval(&self) -> (f64, f64) {
        match self {
            Profile::Bump(b) => b.interval(),
            Profile::Plateau(p) => p.interval(),
        }
    }

    fn derivative(&self, k: usize, x: f64) -> Result<f64, TestFnError> {
        match self {
            Profile::Bump(b) => b.derivative(k, x),
            Profile::Plateau(p) => Ok(p.derivative(k, x)),
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        match self {
            Profile::Bump(b) => b.breakpoints(),
            Profile::Plateau(p) => {
                let (c, b, w) = (p.center, p.half_width, p.ramp);
                vec![c - b - w, c - b, c + b, c + b + w]
            }
        }
    }

    fn max_order(&self) -> usize {
        match self {
            Profile::Bump(b) => b.max_order(),
            Profile::Plateau(_) => DEFAULT_MAX_ORDER,
        }
    }

    fn length_scale(&self) -> f64 {
        match self {
            Profile::Bump(b) => b.half_width(),
            Profile::Plateau(p) => p.ramp,
        }
    }

    fn translate(&self, c: f64) -> Self {
        match self {
            Profile::Bump(b) => Profile::Bump(b.translate(c)),
            Profile::Plateau(p) => Profile::Plateau(p.translate(c)),
        }
    }
}

/// `poly(x) * profile(x)`, polynomial coefficients ascending.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub poly: Vec<f64>,
    pub profile: Profile,
}

/// Finite sum of polynomial multiples of bumps and plateaus.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    terms: Vec<Term>,
}

impl TestFunction {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn bump(a: f64, b: f64) -> Result<Self, TestFnError> {
        Ok(Bump::new(a, b)?.into())
    }

    pub fn standard_bump() -> Self {
        Bump::standard().into()
    }

    pub fn plateau(half_width: f64, ramp: f64) -> Result<Self, TestFnError> {
        Ok(Self::from_term(vec![1.0], Profile::Plateau(Plateau::new(half_width, ramp)?)))
    }

    pub fn from_term(poly: Vec<f64>, profile: Profile) -> Self {
        Self {
            terms: vec![Term { poly, profile }],
        }
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Self { terms }
    }

    pub fn scale(&self, k: f64) -> Self {
        self.mul_poly(&[k])
    }

    /// Multiplies by the polynomial with ascending coefficients `q`.
    pub fn mul_poly(&self, q: &[f64]) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    poly: poly_mul(&t.poly, q),
                    profile: t.profile.clone(),
                })
                .collect(),
        }
    }

    /// `x -> self(x - c)`.
    pub fn translate(&self, c: f64) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    poly: poly_shift(&t.poly, c),
                    profile: t.profile.translate(c),
                })
                .collect(),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.value(x)
    }
}

impl From<Bump> for TestFunction {
    fn from(b: Bump) -> Self {
        Self::from_term(vec![1.0], Profile::Bump(b))
    }
}

impl Smooth for TestFunction {
    fn derivative(&self, k: usize, x: f64) -> Result<f64, TestFnError> {
        let max = self.max_order();
        if k > max {
            return Err(TestFnError::OrderTooHigh { k, max });
        }
        match self.support() {
            Some((a, b)) if x > a && x < b => {}
            _ => return Ok(0.0),
        }
        let mut acc = 0.0;
        for t in &self.terms {
            let (a, b) = t.profile.interval();
            if !(x > a && x < b) {
                continue;
            }
            for j in 0..=k.min(t.poly.len().saturating_sub(1)) {
                let p = poly_derivative(&t.poly, j, x);
                if p != 0.0 {
                    acc += binomial(k, j) * p * t.profile.derivative(k - j, x)?;
                }
            }
        }
        Ok(if acc == 0.0 { 0.0 } else { acc })
    }

    fn max_order(&self) -> usize {
        self.terms
            .iter()
            .map(|t| t.profile.max_order())
            .min()
            .unwrap_or(DEFAULT_MAX_ORDER)
    }

    /// Smallest interval containing every summand's support.
    fn support(&self) -> Option<(f64, f64)> {
        self.terms.iter().map(|t| t.profile.interval()).reduce(|(a, b), (c, d)| (a.min(c), b.max(d)))
    }

    fn breakpoints(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.terms.iter().flat_map(|t| t.profile.breakpoints()).collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    fn growth(&self) -> Growth {
        Growth::Compact
    }

    fn length_scale(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| t.profile.length_scale())
            .fold(f64::INFINITY, f64::min)
            .min(1.0)
    }
}

/// Largest absolute endpoint over the supports of finitely many test
/// functions: one bound serving all of them.
pub fn common_support_bound(fns: &[TestFunction]) -> Option<f64> {
    fns.iter()
        .filter_map(|f| f.support())
        .map(|(a, b)| a.abs().max(b.abs()))
        .reduce(f64::max)
}

/// `amplitude * exp(-((x - center)/width)^2)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gaussian {
    pub amplitude: f64,
    pub center: f64,
    pub width: f64,
}

impl Gaussian {
    /// `e^(-x^2)`.
    pub fn unit() -> Self {
        Self {
            amplitude: 1.0,
            center: 0.0,
            width: 1.0,
        }
    }
}

impl Smooth for Gaussian {
    fn derivative(&self, k: usize, x: f64) -> Result<f64, TestFnError> {
        let z = (x - self.center) / self.width;
        // physicists' Hermite polynomials: d^k/dz^k e^(-z^2) = (-1)^k H_k(z) e^(-z^2)
        let (mut h0, mut h1) = (1.0, 2.0 * z);
        let hk = match k {
            0 => h0,
            _ => {
                for n in 1..k {
                    let h2 = 2.0 * z * h1 - 2.0 * n as f64 * h0;
                    h0 = h1;
                    h1 = h2;
                }
                h1
            }
        };
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        Ok(self.amplitude * sign * hk * (-z * z).exp() / self.width.powi(k as i32))
    }

    fn max_order(&self) -> usize {
        64
    }

    fn support(&self) -> Option<(f64, f64)> {
        None
    }

    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    fn growth(&self) -> Growth {
        Growth::Bounded
    }

    fn length_scale(&self) -> f64 {
        self.width
    }
}

/// Polynomial with ascending coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polynomial(pub Vec<f64>);

impl Smooth for Polynomial {
    fn derivative(&self, k: usize, x: f64) -> Result<f64, TestFnError> {
        Ok(poly_derivative(&self.0, k, x))
    }

    fn max_order(&self) -> usize {
        usize::MAX / 2
    }

    fn support(&self) -> Option<(f64, f64)> {
        None
    }

    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    fn growth(&self) -> Growth {
        Growth::Polynomial(self.0.len().saturating_sub(1) as u32)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::central_stencil;
    use proptest::prelude::*;

    fn fd(f: &dyn Smooth, k: usize, x: f64) -> f64 {
        let h = 1e-3;
        central_stencil(1, 8)
            .iter()
            .map(|&(j, w)| w * f.derivative(k, x + j as f64 * h).unwrap())
            .sum::<f64>()
            / h
    }

    #[test]
    fn polynomial_helpers() {
        let c = [1.0, -2.0, 0.5, 3.0];
        assert_eq!(poly_derivative(&c, 0, 2.0), 1.0 - 4.0 + 2.0 + 24.0);
        assert_eq!(poly_derivative(&c, 2, 2.0), 1.0 + 36.0);
        assert_eq!(poly_derivative(&c, 4, 2.0), 0.0);
        let s = poly_shift(&c, 0.5);
        for x in [-1.0, 0.3, 2.0] {
            assert!((poly_derivative(&s, 0, x) - poly_derivative(&c, 0, x - 0.5)).abs() < 1e-12);
        }
    }

    #[test]
    fn product_rule_against_fd() {
        let f = TestFunction::bump(-1.0, 2.0).unwrap().mul_poly(&[0.5, -1.0, 2.0]);
        for k in 0..5 {
            for x in [-0.5, 0.1, 1.2] {
                let e = f.derivative(k + 1, x).unwrap();
                assert!((fd(&f, k, x) - e).abs() < 1e-6 * e.abs().max(1.0), "k={k} x={x}");
            }
        }
    }

    #[test]
    fn plateau_shape() {
        let p = TestFunction::plateau(2.0, 1.0).unwrap();
        assert_eq!(p.eval(0.0), 1.0);
        assert_eq!(p.eval(2.0), 1.0);
        assert_eq!(p.eval(-3.0), 0.0);
        assert_eq!(p.eval(3.5), 0.0);
        assert!((p.eval(2.5) - 0.5).abs() < 1e-15);
        assert!((p.eval(-2.5) - 0.5).abs() < 1e-15);
        for k in 0..5 {
            for x in [-2.7, -2.2, 2.4, 2.9] {
                let e = p.derivative(k + 1, x).unwrap();
                assert!((fd(&p, k, x) - e).abs() < 1e-6 * e.abs().max(1.0), "k={k} x={x}");
            }
        }
        assert_eq!(p.derivative(3, 2.0 + 1e-4).unwrap(), 0.0);
    }

    #[test]
    fn gaussian_derivatives() {
        let g = Gaussian::unit();
        assert_eq!(g.derivative(2, 0.0).unwrap(), -2.0);
        assert_eq!(g.derivative(4, 0.0).unwrap(), 12.0);
        let g = Gaussian {
            amplitude: 2.0,
            center: 0.3,
            width: 0.7,
        };
        for k in 0..6 {
            let e = g.derivative(k + 1, 0.9).unwrap();
            assert!((fd(&g, k, 0.9) - e).abs() < 1e-6 * e.abs().max(1.0));
        }
    }

    #[test]
    fn translate_and_support() {
        let f = TestFunction::bump(-1.0, 1.0).unwrap().mul_poly(&[0.0, 1.0]);
        let g = f.translate(3.0);
        assert_eq!(g.support(), Some((2.0, 4.0)));
        for x in [2.2, 3.0, 3.7] {
            assert!((g.eval(x) - f.eval(x - 3.0)).abs() < 1e-15);
        }
        let h = f.add(&g);
        assert_eq!(h.support(), Some((-1.0, 4.0)));
        assert_eq!(common_support_bound(&[f, g, h]), Some(4.0));
        assert_eq!(TestFunction::zero().support(), None);
        assert_eq!(TestFunction::zero().eval(1.0), 0.0);
    }

    proptest! {
        #[test]
        fn exact_zero_outside_support(
            a in -5.0f64..5.0, w in 0.1f64..4.0, c0 in -2.0f64..2.0, c1 in -2.0f64..2.0,
            pw in 0.0f64..2.0, x in prop::collection::vec(-50.0f64..50.0, 40), k in 0usize..8,
        ) {
            let f = TestFunction::bump(a, a + w).unwrap().mul_poly(&[c0, c1])
                .add(&TestFunction::plateau(pw, 0.5).unwrap().translate(a));
            let (lo, hi) = f.support().unwrap();
            for x in x {
                if x <= lo || x >= hi {
                    prop_assert_eq!(f.derivative(k, x).unwrap().to_bits(), 0u64);
                }
            }
        }

        #[test]
        fn derivative_is_linear(a in -2.0f64..2.0, b in -2.0f64..2.0, x in -1.5f64..1.5, k in 0usize..6) {
            let f = TestFunction::bump(-1.0, 1.0).unwrap();
            let g = TestFunction::bump(-0.5, 1.5).unwrap().mul_poly(&[1.0, 1.0]);
            let lhs = f.scale(a).add(&g.scale(b)).derivative(k, x).unwrap();
            let rhs = a * f.derivative(k, x).unwrap() + b * g.derivative(k, x).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
        }
    }
}
