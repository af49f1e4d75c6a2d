//! Smoothness of functions on the closed half line `t >= 0`: the
//! square-smooth test on `g(x) = f(x^2)`, one-sided derivative limits at
//! `0+`, and extension to the whole line by finitely many reflections.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::oracle::{central_stencil, fd_step, ClosedForm, Elementary, OracleError, ScalarOracle};
use crate::richardson::{diverges, richardson};
use crate::weil::{jet_to_derivatives, taylor_lift, univariate_jet, JetScalar, WeilElement, WeilError};

pub const REPORT_SCHEMA: &str = "heatjet.smoothness-report/1";

/// Dyadic ladder exponents: limits at `0+` are taken along `2^-j`.
pub const LADDER: std::ops::RangeInclusive<i32> = 4..=26;
const RICHARDSON_ORDER: usize = 4;
const DIVERGENCE_JUMP: f64 = 1e8;
const DIVERGENCE_RUN: usize = 8;
pub const MAX_EXTENSION_ORDER: usize = 12;
pub const DEFAULT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HalfLineError {
    #[error("evaluation overflowed near 0 (at {at})")]
    Overflow { at: f64 },
    #[error("order must be at least {min}, got {got}")]
    Order { min: usize, got: usize },
    #[error("not Seeley smooth: derivative of order {order} has no finite limit at 0+")]
    NotSeeleySmooth { order: usize },
    #[error("extension order {n} exceeds {max}: reflection system too ill-conditioned")]
    Conditioning { n: usize, max: usize },
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

type Eval = dyn Fn(f64) -> f64 + Send + Sync;

/// A function on `t > 0`, optionally with its value at 0 and a derivative
/// oracle. Without an oracle derivatives come from finite differences.
#[derive(Clone)]
pub struct HalfLineFn {
    name: String,
    eval: Arc<Eval>,
    value_at_zero: Option<f64>,
    oracle: Option<Arc<dyn ScalarOracle>>,
}

impl fmt::Debug for HalfLineFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HalfLineFn")
            .field("name", &self.name)
            .field("value_at_zero", &self.value_at_zero)
            .field("oracle", &self.oracle.is_some())
            .finish()
    }
}

impl HalfLineFn {
    pub fn new<F>(name: &str, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.to_string(),
            eval: Arc::new(f),
            value_at_zero: None,
            oracle: None,
        }
    }

    pub fn with_value_at_zero(mut self, v: f64) -> Self {
        self.value_at_zero = Some(v);
        self
    }

    pub fn with_oracle(mut self, oracle: Arc<dyn ScalarOracle>) -> Self {
        self.oracle = Some(oracle);
        self
    }

    /// Derivatives by evaluating on jets.
    pub fn with_jet<J>(self, jet: J) -> Self
    where
        J: Fn(&WeilElement) -> Result<WeilElement, WeilError> + Send + Sync + 'static,
    {
        self.with_oracle(Arc::new(JetScalar::new(jet)))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn value_at_zero(&self) -> Option<f64> {
        self.value_at_zero
    }

    pub fn has_oracle(&self) -> bool {
        self.oracle.is_some()
    }

    /// `f(t)` for `t > 0`; at `t = 0` the stored value (NaN if absent).
    pub fn eval(&self, t: f64) -> f64 {
        if t == 0.0 {
            self.value_at_zero.unwrap_or(f64::NAN)
        } else {
            (self.eval)(t)
        }
    }

    /// `[f(t), ..., f^(n)(t)]` for `t > 0`.
    pub fn derivatives(&self, t: f64, n: usize) -> Result<Vec<f64>, HalfLineError> {
        Ok(self.derivatives_with_noise(t, n)?.0)
    }

    /// Derivatives together with an estimate of their rounding error
    /// (zero when an oracle is present).
    fn derivatives_with_noise(&self, t: f64, n: usize) -> Result<(Vec<f64>, Vec<f64>), HalfLineError> {
        match &self.oracle {
            Some(o) => Ok((o.derivatives(t, n)?, vec![0.0; n + 1])),
            None => {
                let f = |x: f64| (self.eval)(x);
                let mut vals = Vec::with_capacity(n + 1);
                let mut noise = Vec::with_capacity(n + 1);
                for k in 0..=n {
                    let (v, e) = fd_inside(&f, k, t, t);
                    vals.push(v);
                    noise.push(e);
                }
                Ok((vals, noise))
            }
        }
    }

    /// `f'` as a half-line function, with its own oracle when `f` has one.
    pub fn derivative_fn(&self) -> HalfLineFn {
        let this = self.clone();
        let eval = move |t: f64| this.derivatives(t, 1).map(|d| d[1]).unwrap_or(f64::NAN);
        let mut out = HalfLineFn::new(&format!("d/dt {}", self.name), eval);
        if let Some(o) = &self.oracle {
            out.oracle = Some(Arc::new(Shifted(o.clone())));
        }
        out
    }

    /// Largest relative disagreement between the oracle and finite
    /// differences of the oracle's lower derivatives on a fixed probe set.
    pub fn oracle_consistency(&self) -> Result<f64, HalfLineError> {
        let Some(o) = &self.oracle else { return Ok(0.0) };
        let mut worst = 0.0f64;
        for t in [0.25, 0.5, 1.0, 2.0] {
            let d = o.derivatives(t, 3)?;
            for k in 1..=3 {
                let g = |x: f64| o.derivatives(x, k - 1).map(|v| v[k - 1]).unwrap_or(f64::NAN);
                let (fd, _) = fd_inside(&g, 1, t, t);
                worst = worst.max((fd - d[k]).abs() / d[k].abs().max(1.0));
            }
        }
        Ok(worst)
    }
}

struct Shifted(Arc<dyn ScalarOracle>);

impl ScalarOracle for Shifted {
    fn derivatives(&self, x: f64, order: usize) -> Result<Vec<f64>, OracleError> {
        Ok(self.0.derivatives(x, order + 1)?[1..].to_vec())
    }
}

/// Central difference for `f^(k)(x)` whose stencil stays within
/// `(x - room/2, x + room/2)`; returns the value and a rounding-error bound.
fn fd_inside<F: Fn(f64) -> f64>(f: &F, k: usize, x: f64, room: f64) -> (f64, f64) {
    if k == 0 {
        let v = f(x);
        return (v, v.abs() * f64::EPSILON);
    }
    let st = central_stencil(k, 6);
    let reach = st.iter().map(|(j, _)| j.unsigned_abs()).max().unwrap_or(1) as f64;
    let h = fd_step(k, x).min(0.5 * room / reach);
    let mut acc = 0.0;
    let mut mag = 0.0;
    for &(j, w) in &st {
        let y = f(x + j as f64 * h);
        acc += w * y;
        mag += (w * y).abs();
    }
    let scale = h.powi(k as i32);
    (acc / scale, 4.0 * f64::EPSILON * mag / scale)
}

fn ladder_points() -> Vec<f64> {
    LADDER.map(|j| 0.5f64.powi(j)).collect()
}

/// Limit of one derivative along the ladder.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LimitRow {
    pub k: usize,
    pub value: f64,
    pub error: f64,
    pub diverged: bool,
    /// Ladder points kept after discarding rounding-dominated ones.
    pub points: usize,
}

fn limit_of(k: usize, values: &[f64], noise: &[f64]) -> LimitRow {
    let kept: Vec<f64> = values
        .iter()
        .zip(noise)
        .take_while(|(v, e)| **e <= 1e-3 * v.abs().max(1e-3))
        .map(|(v, _)| *v)
        .collect();
    if diverges(&kept, DIVERGENCE_JUMP, DIVERGENCE_RUN) {
        return LimitRow {
            k,
            value: kept.last().copied().unwrap_or(f64::NAN),
            error: f64::INFINITY,
            diverged: true,
            points: kept.len(),
        };
    }
    match richardson(&kept, 2.0, RICHARDSON_ORDER) {
        Some(e) => LimitRow {
            k,
            value: e.value,
            error: e.error,
            diverged: false,
            points: kept.len(),
        },
        None => LimitRow {
            k,
            value: f64::NAN,
            error: f64::INFINITY,
            diverged: false,
            points: 0,
        },
    }
}

/// Ladder table: `values[k][j]` is the k-th derivative at `t[j]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Ladder {
    pub t: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeeleyReport {
    pub order: usize,
    pub limits: Vec<LimitRow>,
    pub smooth: bool,
    pub divergent_order: Option<usize>,
    pub ladder: Ladder,
}

impl SeeleyReport {
    pub fn values(&self) -> Vec<f64> {
        self.limits.iter().map(|l| l.value).collect()
    }
}

/// Richardson-extrapolated limits of `f^(k)(2^-j)`, `k = 0..=n`.
pub fn seeley_limits(f: &HalfLineFn, n: usize) -> Result<SeeleyReport, HalfLineError> {
    let t = ladder_points();
    let mut values = vec![Vec::with_capacity(t.len()); n + 1];
    let mut noise = vec![Vec::with_capacity(t.len()); n + 1];
    for &tj in &t {
        let (d, e) = f.derivatives_with_noise(tj, n)?;
        for k in 0..=n {
            if !d[k].is_finite() {
                return Err(HalfLineError::Overflow { at: tj });
            }
            values[k].push(d[k]);
            noise[k].push(e[k]);
        }
    }
    let limits: Vec<LimitRow> = (0..=n).map(|k| limit_of(k, &values[k], &noise[k])).collect();
    let divergent_order = limits.iter().find(|l| l.diverged).map(|l| l.k);
    Ok(SeeleyReport {
        order: n,
        smooth: divergent_order.is_none() && limits.iter().all(|l| l.value.is_finite()),
        divergent_order,
        limits,
        ladder: Ladder { t, values },
    })
}

/// `g(x) = f(x^2)`, defined for `x != 0` and even by construction.
#[derive(Clone, Debug)]
pub struct SquareComposite {
    f: HalfLineFn,
}

pub fn precompose_square(f: &HalfLineFn) -> SquareComposite {
    SquareComposite { f: f.clone() }
}

impl SquareComposite {
    pub fn eval(&self, x: f64) -> f64 {
        self.f.eval(x * x)
    }

    /// `[g(x), ..., g^(n)(x)]` for `x != 0`: through the oracle by lifting
    /// `f` along the jet `(x + e)^2`, otherwise by finite differences.
    pub fn derivatives(&self, x: f64, n: usize) -> Result<Vec<f64>, HalfLineError> {
        Ok(self.derivatives_with_noise(x, n)?.0)
    }

    fn derivatives_with_noise(&self, x: f64, n: usize) -> Result<(Vec<f64>, Vec<f64>), HalfLineError> {
        match &self.f.oracle {
            Some(o) => {
                let jet = univariate_jet(x, n);
                let sq = &jet * &jet;
                let lifted = taylor_lift(o.as_ref(), &sq).map_err(|e| match e {
                    WeilError::Oracle(o) => HalfLineError::Oracle(o),
                    other => HalfLineError::Oracle(OracleError::Other(other.to_string())),
                })?;
                Ok((jet_to_derivatives(&lifted), vec![0.0; n + 1]))
            }
            None => {
                let g = |y: f64| self.eval(y);
                let (vals, noise) = (0..=n).map(|k| fd_inside(&g, k, x, x.abs())).unzip();
                Ok((vals, noise))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SquareSmoothReport {
    pub order: usize,
    pub passed: bool,
    /// Largest gap between the left and right limits of `g^(k)` at 0.
    pub defect: f64,
    pub tol: f64,
    /// Right limits of `g^(k)` at `0+`.
    pub limits: Vec<LimitRow>,
    pub divergent_order: Option<usize>,
}

/// Checks that `g(x) = f(x^2)` has matching one-sided derivative limits at
/// 0 up to order `n`. Since `g` is even, the left limit of `g^(k)` is
/// `(-1)^k` times the right one, so odd-order limits must vanish.
pub fn square_smooth_test(f: &HalfLineFn, n: usize, tol: f64) -> Result<SquareSmoothReport, HalfLineError> {
    if n == 0 {
        return Err(HalfLineError::Order { min: 1, got: n });
    }
    let g = precompose_square(f);
    let xs = ladder_points();
    let mut values = vec![Vec::with_capacity(xs.len()); n + 1];
    let mut noise = vec![Vec::with_capacity(xs.len()); n + 1];
    for &x in &xs {
        let (d, e) = g.derivatives_with_noise(x, n)?;
        for k in 0..=n {
            if !d[k].is_finite() {
                return Err(HalfLineError::Overflow { at: x });
            }
            values[k].push(d[k]);
            noise[k].push(e[k]);
        }
    }
    let limits: Vec<LimitRow> = (0..=n).map(|k| limit_of(k, &values[k], &noise[k])).collect();
    let divergent_order = limits.iter().find(|l| l.diverged).map(|l| l.k);
    let defect = limits
        .iter()
        .filter(|l| l.k % 2 == 1)
        .map(|l| if l.diverged { f64::INFINITY } else { 2.0 * l.value.abs() })
        .fold(0.0, f64::max);
    Ok(SquareSmoothReport {
        order: n,
        passed: divergent_order.is_none() && defect <= tol,
        defect,
        tol,
        limits,
        divergent_order,
    })
}

/// Whole-line extension: `f` on `t >= 0`, and for `t < 0`
/// `sum_k a_k f(-b_k t)` with `b_k = 2^k`, the weights matching the first
/// `n + 1` one-sided derivatives at 0.
#[derive(Clone, Debug)]
pub struct Extension {
    f: HalfLineFn,
    value0: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    right_limits: Vec<f64>,
}

/// Weights `a_k` with `sum_k a_k (-b_k)^m = 1` for `m = 0..=n`: the
/// Lagrange basis polynomials on the nodes `-b_k`, evaluated at 1.
pub fn reflection_weights(n: usize) -> (Vec<f64>, Vec<f64>) {
    let b: Vec<f64> = (0..=n).map(|k| 2f64.powi(k as i32)).collect();
    let x: Vec<f64> = b.iter().map(|v| -v).collect();
    let a = (0..=n)
        .map(|k| {
            (0..=n)
                .filter(|&j| j != k)
                .map(|j| (1.0 - x[j]) / (x[k] - x[j]))
                .product()
        })
        .collect();
    (b, a)
}

pub fn extend_to_line(f: &HalfLineFn, n: usize) -> Result<Extension, HalfLineError> {
    if n > MAX_EXTENSION_ORDER {
        return Err(HalfLineError::Conditioning {
            n,
            max: MAX_EXTENSION_ORDER,
        });
    }
    let seeley = seeley_limits(f, n)?;
    if let Some(order) = seeley.divergent_order {
        return Err(HalfLineError::NotSeeleySmooth { order });
    }
    let (nodes, weights) = reflection_weights(n);
    let right_limits = seeley.values();
    Ok(Extension {
        f: f.clone(),
        value0: f.value_at_zero.unwrap_or(right_limits[0]),
        nodes,
        weights,
        right_limits,
    })
}

impl Extension {
    pub fn order(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn right_limits(&self) -> &[f64] {
        &self.right_limits
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t > 0.0 {
            self.f.eval(t)
        } else if t == 0.0 {
            self.value0
        } else {
            self.nodes
                .iter()
                .zip(&self.weights)
                .map(|(b, a)| a * self.f.eval(-b * t))
                .sum()
        }
    }

    /// `[E(t), ..., E^(m)(t)]` for `t != 0`.
    pub fn derivatives(&self, t: f64, m: usize) -> Result<Vec<f64>, HalfLineError> {
        if t > 0.0 {
            return self.f.derivatives(t, m);
        }
        let mut out = vec![0.0; m + 1];
        for (b, a) in self.nodes.iter().zip(&self.weights) {
            let d = self.f.derivatives(-b * t, m)?;
            for (k, o) in out.iter_mut().enumerate() {
                *o += a * (-b).powi(k as i32) * d[k];
            }
        }
        Ok(out)
    }

    /// Limits of `E^(k)(t)` as `t -> 0-`, `k = 0..=order`.
    pub fn left_limits(&self) -> Result<Vec<LimitRow>, HalfLineError> {
        let n = self.order();
        let mut values = vec![Vec::new(); n + 1];
        let mut noise = vec![Vec::new(); n + 1];
        // the reflected points reach -2^n t, so start the ladder lower
        for t in ladder_points().into_iter().skip(n) {
            let d = self.derivatives(-t, n)?;
            for k in 0..=n {
                values[k].push(d[k]);
                noise[k].push(0.0);
            }
        }
        Ok((0..=n).map(|k| limit_of(k, &values[k], &noise[k])).collect())
    }

    /// Largest gap between left and right derivative limits at 0, relative
    /// to `max(1, |right limit|)`.
    pub fn derivative_mismatch(&self) -> Result<Vec<f64>, HalfLineError> {
        Ok(self
            .left_limits()?
            .iter()
            .zip(&self.right_limits)
            .map(|(l, r)| (l.value - r).abs() / r.abs().max(1.0))
            .collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExtensionSummary {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub left_limits: Vec<LimitRow>,
    pub mismatch: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SmoothnessReport {
    pub schema: &'static str,
    pub function: String,
    pub order: usize,
    pub square_smooth: bool,
    pub square_defect: f64,
    /// Set when evaluation failed near 0, as opposed to the test failing.
    pub square_error: Option<String>,
    pub square_limits: Vec<LimitRow>,
    pub seeley_smooth: bool,
    pub seeley_limits: Vec<LimitRow>,
    /// `|f'(0+) - g''(0)/2|`, from `g'(x) = x h(x)` with `h(0) = g''(0)`.
    pub consistency_defect: Option<f64>,
    pub extension: Option<ExtensionSummary>,
    #[serde(skip)]
    pub ladder: Option<Ladder>,
}

pub fn smoothness_report(f: &HalfLineFn, n: usize, tol: f64) -> Result<SmoothnessReport, HalfLineError> {
    let square = square_smooth_test(f, n, tol);
    let seeley = seeley_limits(f, n)?;
    let (square_smooth, square_defect, square_error, square_limits) = match &square {
        Ok(r) => (r.passed, r.defect, None, r.limits.clone()),
        Err(e) => (false, f64::NAN, Some(e.to_string()), Vec::new()),
    };
    let consistency_defect = match &square {
        Ok(r) if r.passed && n >= 2 => Some((seeley.limits[1].value - 0.5 * r.limits[2].value).abs()),
        _ => None,
    };
    let extension = if seeley.smooth && n <= MAX_EXTENSION_ORDER {
        let ext = extend_to_line(f, n)?;
        let left = ext.left_limits()?;
        let mismatch = ext.derivative_mismatch()?;
        Some(ExtensionSummary {
            nodes: ext.nodes.clone(),
            weights: ext.weights.clone(),
            left_limits: left,
            mismatch,
        })
    } else {
        None
    };
    Ok(SmoothnessReport {
        schema: REPORT_SCHEMA,
        function: f.name.clone(),
        order: n,
        square_smooth,
        square_defect,
        square_error,
        square_limits,
        seeley_smooth: seeley.smooth,
        seeley_limits: seeley.limits.clone(),
        consistency_defect,
        extension,
        ladder: Some(seeley.ladder),
    })
}

/// Names accepted by [`builtin`].
pub const BUILTINS: &[&str] = &["sqrt", "cos_sqrt", "square", "identity", "exp_inv", "t3_2"];

fn cos_sqrt_series(t: f64, k: usize) -> f64 {
    // cos(sqrt t) = sum_n (-1)^n t^n / (2n)!
    let mut acc = 0.0;
    let mut n = k;
    loop {
        let falling: f64 = ((n - k + 1)..=n).map(|m| m as f64).product();
        let fact2n: f64 = (1..=2 * n).map(|m| m as f64).product();
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let term = sign * falling * t.powi((n - k) as i32) / fact2n;
        acc += term;
        if n > k + 2 && term.abs() <= 1e-18 * acc.abs().max(1e-300) || n > k + 60 {
            return acc;
        }
        n += 1;
    }
}

/// Built-in half-line functions with derivative oracles.
pub fn builtin(name: &str) -> Option<HalfLineFn> {
    let f = match name {
        "sqrt" => HalfLineFn::new("sqrt", f64::sqrt)
            .with_value_at_zero(0.0)
            .with_oracle(Arc::new(Elementary::Sqrt)),
        "cos_sqrt" => {
            let jet = JetScalar::new(|w| w.lift(&Elementary::Sqrt)?.lift(&Elementary::Cos));
            let oracle = ClosedForm::new(usize::MAX, move |t: f64, k: usize| {
                if t.abs() <= 4.0 {
                    cos_sqrt_series(t, k)
                } else {
                    jet.derivatives(t, k).map_or(f64::NAN, |d| d[k])
                }
            });
            HalfLineFn::new("cos_sqrt", |t: f64| t.sqrt().cos())
                .with_value_at_zero(1.0)
                .with_oracle(Arc::new(oracle))
        }
        "square" => HalfLineFn::new("square", |t: f64| t * t)
            .with_value_at_zero(0.0)
            .with_oracle(Arc::new(Elementary::Poly(vec![0.0, 0.0, 1.0]))),
        "identity" => HalfLineFn::new("identity", |t: f64| t)
            .with_value_at_zero(0.0)
            .with_oracle(Arc::new(Elementary::Poly(vec![0.0, 1.0]))),
        "exp_inv" => HalfLineFn::new("exp_inv", |t: f64| (-1.0 / t).exp())
            .with_value_at_zero(0.0)
            .with_jet(|w| w.lift(&Elementary::Recip)?.scale(-1.0).lift(&Elementary::Exp)),
        "t3_2" => HalfLineFn::new("t3_2", |t: f64| t * t.sqrt())
            .with_value_at_zero(0.0)
            .with_jet(|w| Ok(w * &w.lift(&Elementary::Sqrt)?)),
        _ => return None,
    };
    Some(f)
}
