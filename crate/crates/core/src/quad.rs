//! Quadrature: adaptive Gauss-Legendre panels for finite intervals and
//! Gauss-Hermite rules for Gaussian-weighted integrals over the line.
//!
//! Panel results are kept in a deterministic list and combined by pairwise
//! summation, so the result does not depend on evaluation order.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadError {
    #[error("quadrature did not reach tolerance: best estimate {best} with error {error:e}")]
    NotConverged { best: f64, error: f64 },
    #[error("integrand is not finite at {x}")]
    NonFinite { x: f64 },
    #[error("invalid interval [{a}, {b}]")]
    Interval { a: f64, b: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    /// Nodes per Gauss-Legendre panel.
    pub gl_nodes: usize,
    /// Initial panels per breakpoint-free segment.
    pub panels: usize,
    /// Maximum bisection depth of a panel.
    pub max_depth: usize,
    /// Nodes of the Gauss-Hermite rule.
    pub gh_nodes: usize,
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Gaussian tails are cut at this many units of `2 sqrt(t)`; the
    /// neglected mass is below `erfc(window)`.
    pub gaussian_window: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            gl_nodes: 16,
            panels: 4,
            max_depth: 40,
            gh_nodes: 96,
            abs_tol: 1e-14,
            rel_tol: 1e-13,
            gaussian_window: 9.0,
        }
    }
}

impl QuadratureConfig {
    /// Same tolerances with twice the nodes per rule; used as an
    /// independent cross-check.
    pub fn doubled(&self) -> Self {
        Self {
            gl_nodes: self.gl_nodes * 2,
            gh_nodes: self.gh_nodes * 2,
            panels: self.panels * 2,
            ..self.clone()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
}

impl std::ops::Add for Integral {
    type Output = Integral;
    fn add(self, rhs: Integral) -> Integral {
        Integral {
            value: self.value + rhs.value,
            error: self.error + rhs.error,
        }
    }
}

impl Integral {
    pub const ZERO: Integral = Integral {
        value: 0.0,
        error: 0.0,
    };

    pub fn scale(self, k: f64) -> Integral {
        Integral {
            value: self.value * k,
            error: self.error * k.abs(),
        }
    }
}

/// Nodes and weights of a fixed rule.
#[derive(Debug)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

fn cached(kind: u8, n: usize, build: fn(usize) -> Rule) -> Arc<Rule> {
    static CACHE: OnceLock<Mutex<HashMap<(u8, usize), Arc<Rule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("rule cache poisoned");
    guard.entry((kind, n)).or_insert_with(|| Arc::new(build(n))).clone()
}

/// Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Arc<Rule> {
    cached(0, n, build_legendre)
}

/// Gauss-Hermite rule for `int e^{-x^2} f(x) dx`.
pub fn gauss_hermite(n: usize) -> Arc<Rule> {
    cached(1, n, build_hermite)
}

fn build_legendre(n: usize) -> Rule {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p1, mut p2) = (1.0, 0.0);
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j + 1) as f64 * z * p2 - j as f64 * p3) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let z1 = z;
            z = z1 - p1 / dp;
            if (z - z1).abs() <= 1e-15 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Rule { nodes, weights }
}

fn build_hermite(n: usize) -> Rule {
    assert!(n >= 1);
    let pim4 = PI.powf(-0.25);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    let nf = n as f64;
    let mut z = 0.0f64;
    for i in 0..m {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-0.16667),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..200 {
            let (mut p1, mut p2) = (pim4, 0.0);
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = (j + 1) as f64;
                p1 = z * (2.0 / jf).sqrt() * p2 - (j as f64 / jf).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    // ascending order
    x.reverse();
    w.reverse();
    Rule {
        nodes: x,
        weights: w,
    }
}

/// Pairwise (tree) summation in list order.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        2 => v[0] + v[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
        }
    }
}

fn gl_panel<F: Fn(f64) -> f64>(f: &F, rule: &Rule, a: f64, b: f64) -> Result<f64, QuadError> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut terms = Vec::with_capacity(rule.nodes.len());
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        let xx = c + h * x;
        let y = f(xx);
        if !y.is_finite() {
            return Err(QuadError::NonFinite { x: xx });
        }
        terms.push(w * y);
    }
    Ok(h * pairwise_sum(&terms))
}

/// Adaptive Gauss-Legendre integral over `[a, b]`, with the interval first
/// split at every `breakpoint` strictly inside it.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    cfg: &QuadratureConfig,
) -> Result<Integral, QuadError> {
    if !(a.is_finite() && b.is_finite()) || a > b {
        return Err(QuadError::Interval { a, b });
    }
    if a == b {
        return Ok(Integral::ZERO);
    }
    let rule = gauss_legendre(cfg.gl_nodes);
    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&p| p > a && p < b)
        .collect();
    cuts.push(a);
    cuts.push(b);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let total = b - a;
    let mut values = Vec::new();
    let mut errors = Vec::new();
    let mut exhausted = false;
    for seg in cuts.windows(2) {
        let (sa, sb) = (seg[0], seg[1]);
        let np = cfg.panels.max(1);
        let step = (sb - sa) / np as f64;
        for p in 0..np {
            let pa = sa + step * p as f64;
            let pb = if p + 1 == np { sb } else { sa + step * (p + 1) as f64 };
            let whole = gl_panel(&f, &rule, pa, pb)?;
            // depth-first, left before right: deterministic panel order
            let mut stack = vec![(pa, pb, whole, 0usize)];
            while let Some((lo, hi, whole, depth)) = stack.pop() {
                let mid = 0.5 * (lo + hi);
                let left = gl_panel(&f, &rule, lo, mid)?;
                let right = gl_panel(&f, &rule, mid, hi)?;
                let refined = left + right;
                let err = (refined - whole).abs();
                let local = (cfg.abs_tol * (hi - lo) / total).max(cfg.rel_tol * refined.abs());
                if err <= local || depth >= cfg.max_depth || mid <= lo || mid >= hi {
                    if err > local {
                        exhausted = true;
                    }
                    values.push(refined);
                    errors.push(err);
                } else {
                    stack.push((mid, hi, right, depth + 1));
                    stack.push((lo, mid, left, depth + 1));
                }
            }
        }
    }
    let value = pairwise_sum(&values);
    let error = pairwise_sum(&errors);
    if exhausted && error > cfg.abs_tol.max(cfg.rel_tol * value.abs()) {
        return Err(QuadError::NotConverged { best: value, error });
    }
    Ok(Integral { value, error })
}

/// `int e^{-u^2} g(u) du` by an `n`-node Gauss-Hermite rule.
pub fn hermite_sum<F: Fn(f64) -> f64>(g: F, n: usize) -> Result<f64, QuadError> {
    let rule = gauss_hermite(n);
    let mut terms = Vec::with_capacity(n);
    for (&u, &w) in rule.nodes.iter().zip(&rule.weights) {
        let y = g(u);
        if !y.is_finite() {
            return Err(QuadError::NonFinite { x: u });
        }
        terms.push(w * y);
    }
    Ok(pairwise_sum(&terms))
}

/// Gaussian-weighted integral `int e^{-u^2} g(u) du` with an error estimate
/// from comparing the configured rule against one with two thirds of the nodes.
pub fn integrate_hermite<F: Fn(f64) -> f64>(g: F, cfg: &QuadratureConfig) -> Result<Integral, QuadError> {
    let n = cfg.gh_nodes.max(2);
    let fine = hermite_sum(&g, n)?;
    let coarse = hermite_sum(&g, (2 * n / 3).max(1))?;
    Ok(Integral {
        value: fine,
        error: (fine - coarse).abs(),
    })
}
