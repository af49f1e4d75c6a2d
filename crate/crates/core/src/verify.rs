//! The acceptance suite as a library call producing a JSON report.
//!
//! Every criterion is a list of checks. A residual check passes when
//! `residual <= tolerance`; a condition check is a plain predicate. The
//! criterion-level residual and tolerance are those of its tightest residual
//! check (largest `residual / tolerance`).

use std::error::Error;
use std::f64::consts::E;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::dist::{
    boundary_induction_check, derivative, heat_evolve, heat_kernel, integration_by_parts_identity, limit_lemma_check,
    pair, phi_derivative_identity, synthetic_heat_check, Atom, Distribution,
};
use crate::halfline::{builtin, extend_to_line, seeley_limits, square_smooth_test, DEFAULT_TOL};
use crate::oracle::{Elementary, OracleError, ScalarOracle};
use crate::quad::QuadratureConfig;
use crate::testfn::{
    moving_bump_family, separating_discontinuity_demo, Bump, Gaussian, Polynomial, Smooth, TestFunction,
};
use crate::weil::{
    default_grid, parse_poly, reduction_check, semi_weil_membership, taylor_lift, truncated_algebra,
    vanishing_condition, JetOracle, WeilAlgebra, WeilElement, WeilError,
};

pub const VERIFY_SCHEMA: &str = "heatjet.verify-report/1";
pub const DEFAULT_SEED: u64 = 20_240_917;

pub const CRITERIA: &[&str] = &[
    "closed-form-pairing",
    "limit-lemma",
    "derivative-identity",
    "boundary-induction",
    "integration-by-parts",
    "synthetic-heat",
    "kernel-physics",
    "weil-algebra",
    "semi-weil-membership",
    "half-line",
    "separating-functional",
];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error("unknown criterion `{0}`")]
    UnknownCriterion(String),
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    /// Replaces every residual tolerance.
    pub tol: Option<f64>,
    /// Criteria to run; empty runs all.
    pub only: Vec<String>,
    pub seed: u64,
    pub quad: QuadratureConfig,
    /// Record wall-clock runtimes; off gives byte-identical reports.
    pub timing: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            tol: None,
            only: Vec::new(),
            seed: DEFAULT_SEED,
            quad: QuadratureConfig::default(),
            timing: true,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub label: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CriterionResult {
    pub name: String,
    pub passed: bool,
    pub residual: f64,
    pub tolerance: f64,
    pub runtime_ms: u64,
    pub detail: Value,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub schema: String,
    pub seed: u64,
    pub tolerance_override: Option<f64>,
    pub criteria: Vec<CriterionResult>,
    pub passed: bool,
}

type Outcome = Result<(), Box<dyn Error + Send + Sync>>;

struct Ctx<'a> {
    opts: &'a VerifyOptions,
    q: &'a QuadratureConfig,
    rng: ChaCha8Rng,
    checks: Vec<Check>,
    notes: Map<String, Value>,
}

impl Ctx<'_> {
    fn residual(&mut self, label: impl Into<String>, residual: f64, tol: f64) {
        let tolerance = self.opts.tol.unwrap_or(tol);
        self.checks.push(Check {
            label: label.into(),
            residual: Some(residual),
            tolerance: Some(tolerance),
            passed: residual <= tolerance,
        });
    }

    fn condition(&mut self, label: impl Into<String>, holds: bool) {
        self.checks.push(Check {
            label: label.into(),
            residual: None,
            tolerance: None,
            passed: holds,
        });
    }

    fn note<T: Serialize>(&mut self, key: &str, value: T) {
        self.notes
            .insert(key.to_string(), serde_json::to_value(value).unwrap_or(Value::Null));
    }

    fn random_bump(&mut self) -> TestFunction {
        let a = self.rng.gen_range(-2.0..-0.4);
        let b = self.rng.gen_range(0.4..2.0);
        let amp = self.rng.gen_range(0.5..2.0);
        TestFunction::from(Bump::new(a, b).expect("a < 0 < b").with_amplitude(amp))
    }
}

pub fn run_verify(opts: &VerifyOptions) -> Result<VerifyReport, VerifyError> {
    if let Some(bad) = opts.only.iter().find(|n| !CRITERIA.contains(&n.as_str())) {
        return Err(VerifyError::UnknownCriterion(bad.clone()));
    }
    let mut criteria = Vec::new();
    for (idx, &name) in CRITERIA.iter().enumerate() {
        if !opts.only.is_empty() && !opts.only.iter().any(|n| n == name) {
            continue;
        }
        criteria.push(run_criterion(idx, name, opts));
    }
    let passed = criteria.iter().all(|c| c.passed);
    Ok(VerifyReport {
        schema: VERIFY_SCHEMA.to_string(),
        seed: opts.seed,
        tolerance_override: opts.tol,
        criteria,
        passed,
    })
}

fn run_criterion(idx: usize, name: &str, opts: &VerifyOptions) -> CriterionResult {
    let mut ctx = Ctx {
        opts,
        q: &opts.quad,
        // per-criterion streams, so --only reproduces the full run
        rng: ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(idx as u64)),
        checks: Vec::new(),
        notes: Map::new(),
    };
    let start = Instant::now();
    let outcome = match name {
        "closed-form-pairing" => closed_form_pairing(&mut ctx),
        "limit-lemma" => limit_lemma(&mut ctx),
        "derivative-identity" => derivative_identity(&mut ctx),
        "boundary-induction" => boundary_induction(&mut ctx),
        "integration-by-parts" => integration_by_parts(&mut ctx),
        "synthetic-heat" => synthetic_heat(&mut ctx),
        "kernel-physics" => kernel_physics(&mut ctx),
        "weil-algebra" => weil_algebra(&mut ctx),
        "semi-weil-membership" => semi_weil(&mut ctx),
        "half-line" => half_line(&mut ctx),
        "separating-functional" => separating_functional(&mut ctx),
        _ => unreachable!("criterion names are validated"),
    };
    let runtime_ms = if opts.timing {
        start.elapsed().as_millis() as u64
    } else {
        0
    };
    let error = outcome.err().map(|e| e.to_string());
    let (mut residual, mut tolerance, mut worst) = (0.0, 0.0, f64::NEG_INFINITY);
    for c in &ctx.checks {
        if let (Some(r), Some(t)) = (c.residual, c.tolerance) {
            let ratio = if r.is_nan() {
                f64::INFINITY
            } else if t > 0.0 {
                r / t
            } else if r > 0.0 {
                f64::INFINITY
            } else {
                0.0
            };
            if ratio > worst {
                worst = ratio;
                residual = r;
                tolerance = t;
            }
        }
    }
    let passed = error.is_none() && !ctx.checks.is_empty() && ctx.checks.iter().all(|c| c.passed);
    let mut detail = Map::new();
    detail.insert("checks".into(), serde_json::to_value(&ctx.checks).unwrap_or(Value::Null));
    if let Some(e) = error {
        detail.insert("error".into(), Value::String(e));
        residual = f64::NAN;
    }
    detail.extend(ctx.notes);
    CriterionResult {
        name: name.to_string(),
        passed,
        residual,
        tolerance,
        runtime_ms,
        detail: Value::Object(detail),
    }
}

fn three_bumps() -> Vec<(&'static str, Arc<dyn Smooth>)> {
    let mk = |a, b| -> Arc<dyn Smooth> { Arc::new(TestFunction::bump(a, b).expect("valid interval")) };
    vec![
        ("bump[-1,1]", mk(-1.0, 1.0)),
        ("bump[-0.5,1.5]", mk(-0.5, 1.5)),
        ("bump[-2,0.75]", mk(-2.0, 0.75)),
    ]
}

fn closed_form_pairing(c: &mut Ctx) -> Outcome {
    let g = Gaussian::unit();
    for t in [0.1, 0.5, 1.0, 2.0] {
        let v = pair(&heat_kernel(t)?, &g, c.q)?.value;
        let want = 1.0 / (1.0 + 4.0 * t).sqrt();
        c.residual(format!("t={t}"), (v - want).abs(), 1e-8);
    }
    Ok(())
}

fn limit_lemma(c: &mut Ctx) -> Outcome {
    let bump: Arc<dyn Smooth> = Arc::new(TestFunction::standard_bump());
    let rep = limit_lemma_check(bump, c.q)?;
    // e^(-1/(1-x^2)) = e^(-1) (1 - x^2 + ..)
    let exact = -2.0 / E;
    c.residual("bump limit vs -2/e", (rep.limit - exact).abs(), 1e-4);
    c.condition("first-order convergence", rep.first_order == Some(true));
    c.note("ladder", &rep.rows);
    c.note("ratios", &rep.ratios);
    c.note("limit", rep.limit);
    let g = limit_lemma_check(Arc::new(Gaussian::unit()), c.q)?;
    c.residual("gauss limit vs -2", (g.limit + 2.0).abs(), 1e-4);
    Ok(())
}

fn derivative_identity(c: &mut Ctx) -> Outcome {
    for (name, phi) in three_bumps() {
        for n in [1, 2] {
            for t in [0.25, 1.0] {
                let r = phi_derivative_identity(phi.clone(), n, t, c.q)?;
                c.residual(format!("{name} n={n} t={t}"), r.residual, 1e-5);
            }
        }
    }
    Ok(())
}

fn boundary_induction(c: &mut Ctx) -> Outcome {
    for (name, phi) in three_bumps() {
        for n in [1, 2] {
            let r = boundary_induction_check(phi.clone(), n, c.q)?;
            c.residual(format!("{name} n={n}"), r.residual, 1e-3);
        }
    }
    let r = boundary_induction_check(Arc::new(Gaussian::unit()), 1, c.q)?;
    c.residual("gauss n=1 vs -2", (r.estimate + 2.0).abs(), 1e-6);
    Ok(())
}

fn integration_by_parts(c: &mut Ctx) -> Outcome {
    for i in 0..5 {
        let phi: Arc<dyn Smooth> = Arc::new(c.random_bump());
        let (a, b) = phi.support().expect("bump");
        for t in [0.05, 0.5] {
            let r = integration_by_parts_identity(phi.clone(), t, c.q)?;
            c.residual(format!("bump#{i}[{a:.4},{b:.4}] t={t}"), r.worst(), 1e-8);
        }
    }
    Ok(())
}

fn synthetic_heat(c: &mut Ctx) -> Outcome {
    let dual = truncated_algebra(1, 2);
    for (name, phi) in three_bumps() {
        for t0 in [0.25, 1.0] {
            let r = synthetic_heat_check(t0, phi.clone(), &dual, c.q)?;
            let second = pair(&derivative(&heat_kernel(t0)?, 2), phi.as_ref(), c.q)?.value;
            c.residual(format!("{name} t0={t0} eps vs <K,phi''>"), (r.lifted[1] - second).abs(), 1e-5);
            c.residual(format!("{name} t0={t0} eps vs FD"), r.derivative_residuals[1].abs(), 1e-5);
        }
    }
    let r = synthetic_heat_check(0.5, Arc::new(Gaussian::unit()), &dual, c.q)?;
    c.residual("gauss t0=0.5 eps vs closed form", (r.lifted[1] + 2.0 * 3f64.powf(-1.5)).abs(), 1e-5);
    let w3 = truncated_algebra(1, 3);
    for (name, phi) in three_bumps() {
        let r = synthetic_heat_check(0.0, phi.clone(), &w3, c.q)?;
        let phi4 = phi.derivative(4, 0.0)?;
        c.residual(format!("{name} t0=0 2*eps^2 vs phi''''(0)"), (2.0 * r.lifted[2] - phi4).abs(), 1e-3);
        c.residual(
            format!("{name} t0=0 2*eps^2 vs one-sided limit"),
            r.derivative_residuals[2].abs(),
            1e-3,
        );
    }
    Ok(())
}

fn kernel_physics(c: &mut Ctx) -> Outcome {
    let delta = Distribution::dirac(0.0);
    for t in [0.1, 1.0, 10.0] {
        let k = heat_evolve(&delta, t)?;
        // erfc(6) < 1e-16
        let b = 12.0 * f64::sqrt(t);
        let one = TestFunction::plateau(b, 1.0)?;
        let m0 = pair(&k, &one, c.q)?.value;
        c.residual(format!("mass t={t}"), (m0 - 1.0).abs(), 1e-10);
        let m2 = pair(&k, &Polynomial(vec![0.0, 0.0, 1.0]), c.q)?.value;
        c.residual(format!("second moment t={t}"), (m2 - 2.0 * t).abs(), 1e-8);
    }
    let t0 = Distribution::from_atoms(vec![Atom::new(0.0, 0, 1.0), Atom::new(0.3, 1, 0.5)]);
    let (s, t) = (0.2, 0.3);
    let mid = Distribution::from_density(heat_evolve(&t0, s)?.density_function(c.q)?);
    let two_step = heat_evolve(&mid, t)?;
    let one_step = heat_evolve(&t0, s + t)?;
    for i in 0..5 {
        let phi = c.random_bump();
        let a = pair(&two_step, &phi, c.q)?.value;
        let b = pair(&one_step, &phi, c.q)?.value;
        c.residual(format!("semigroup bump#{i}"), (a - b).abs(), 1e-6);
    }
    Ok(())
}

/// `a + b x + c x^2` with its derivatives.
struct Quadratic([f64; 3]);

impl ScalarOracle for Quadratic {
    fn derivatives(&self, x: f64, order: usize) -> Result<Vec<f64>, OracleError> {
        let [a, b, c] = self.0;
        let all = [a + b * x + c * x * x, b + 2.0 * c * x, 2.0 * c];
        Ok((0..=order).map(|k| all.get(k).copied().unwrap_or(0.0)).collect())
    }
}

fn random_element(rng: &mut ChaCha8Rng, w: &Arc<WeilAlgebra>, dyadic: bool) -> Result<WeilElement, WeilError> {
    let coords = (0..w.dim())
        .map(|_| {
            if dyadic {
                rng.gen_range(-16i32..=16) as f64 / 8.0
            } else {
                rng.gen_range(-1.0..1.0)
            }
        })
        .collect();
    WeilElement::from_coords(w.clone(), coords)
}

fn rel_gap(x: &WeilElement, y: &WeilElement) -> f64 {
    let scale = x
        .coords()
        .iter()
        .chain(y.coords())
        .fold(1.0f64, |m, v| m.max(v.abs()));
    x.coords()
        .iter()
        .zip(y.coords())
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
        / scale
}

fn parabola() -> Result<WeilAlgebra, WeilError> {
    WeilAlgebra::build(2, 3, vec![parse_poly("s1^2 - s2", 2, 3)?])
}

fn weil_algebra(c: &mut Ctx) -> Outcome {
    let p = Arc::new(parabola()?);
    c.condition("parabola dimension 3", p.dim() == 3);
    let s1 = WeilElement::variable(&p, 0)?;
    let s2 = WeilElement::variable(&p, 1)?;
    c.residual("s2 = s1^2 in the quotient", rel_gap(&s2, &(&s1 * &s1)), 1e-12);
    c.note("dimension", p.dim());
    let algebras: Vec<Arc<WeilAlgebra>> = vec![
        p.clone(),
        Arc::new(WeilAlgebra::dual_numbers()),
        truncated_algebra(1, 5),
        truncated_algebra(2, 3),
        truncated_algebra(3, 3),
    ];
    let mut worst = 0.0f64;
    for i in 0..1000 {
        let w = &algebras[i % algebras.len()];
        let x = random_element(&mut c.rng, w, false)?;
        let y = random_element(&mut c.rng, w, false)?;
        let z = random_element(&mut c.rng, w, false)?;
        let one = WeilElement::one(w);
        worst = worst
            .max(rel_gap(&(&(&x * &y) * &z), &(&x * &(&y * &z))))
            .max(rel_gap(&(&x * &y), &(&y * &x)))
            .max(rel_gap(&(&x * &one), &x))
            .max(rel_gap(&(&x * &(&y + &z)), &(&(&x * &y) + &(&x * &z))));
    }
    c.residual("axioms, 1000 trials", worst, 1e-12);
    let mut lift_gap = 0.0f64;
    for i in 0..200 {
        let w = &algebras[i % algebras.len()];
        let x = random_element(&mut c.rng, w, true)?;
        let q = [
            c.rng.gen_range(-8i32..=8) as f64 / 4.0,
            c.rng.gen_range(-8i32..=8) as f64 / 4.0,
            c.rng.gen_range(-8i32..=8) as f64 / 4.0,
        ];
        let lifted = taylor_lift(&Quadratic(q), &x)?;
        let direct = &(&x.scale(q[1]) + &(&x * &x).scale(q[2])).add_scalar(q[0]) + &WeilElement::zero(w);
        lift_gap = lift_gap.max(rel_gap(&lifted, &direct));
    }
    c.residual("taylor_lift of quadratics", lift_gap, 0.0);
    Ok(())
}

fn semi_weil(c: &mut Ctx) -> Outcome {
    let dual = WeilAlgebra::dual_numbers();
    let grid = default_grid(1);
    let accepted = JetOracle::new(2, 4, |x: &[WeilElement]| Ok(&(&x[0] * &x[0]) * &x[1].lift(&Elementary::Sin)?));
    let rejected = JetOracle::new(2, 4, |x: &[WeilElement]| Ok(&x[0] * &x[1].lift(&Elementary::Sin)?));
    let a = semi_weil_membership(&accepted, &dual, &grid, 1e-9)?;
    let r = semi_weil_membership(&rejected, &dual, &grid, 1e-9)?;
    c.condition("s^2 sin(t) accepted", a.member);
    c.condition("s sin(t) rejected", !r.member);
    let direct = vanishing_condition(&rejected, 1, 2, &grid, 1e-9)?;
    c.condition("agrees with the direct vanishing condition", direct.member == r.member);
    c.note("rejected_violation", r.max_violation);
    let algebras = [Arc::new(parabola()?), truncated_algebra(2, 3)];
    for i in 0..5 {
        let k: [f64; 5] = std::array::from_fn(|_| c.rng.gen_range(-1.5..1.5));
        let f = JetOracle::new(2, 4, move |x: &[WeilElement]| {
            let e = (&x[0].scale(k[0]) + &x[1].scale(k[1])).lift(&Elementary::Exp)?;
            let s = (&x[0] - &x[1].scale(k[2])).lift(&Elementary::Sin)?;
            Ok(&e.scale(k[3]) + &(&s * &x[1]).scale(k[4]))
        });
        let w = &algebras[i % 2];
        let rep = reduction_check(&f, w, 1e-9)?;
        c.residual(format!("reduction f#{i}"), rep.max_violation, 1e-9);
    }
    Ok(())
}

fn half_line(c: &mut Ctx) -> Outcome {
    let sqrt = builtin("sqrt").expect("builtin");
    let cs = builtin("cos_sqrt").expect("builtin");
    let r = square_smooth_test(&sqrt, 3, DEFAULT_TOL)?;
    c.condition("sqrt not square smooth", !r.passed);
    let r = square_smooth_test(&cs, 4, DEFAULT_TOL)?;
    c.condition("cos(sqrt t) square smooth", r.passed);
    let s = seeley_limits(&cs, 2)?;
    for (k, want) in [1.0, -0.5, 1.0 / 12.0].into_iter().enumerate() {
        c.residual(format!("cos(sqrt t) limit k={k}"), (s.limits[k].value - want).abs(), 1e-6);
    }
    let e = extend_to_line(&cs, 4)?;
    let gap = e.derivative_mismatch()?.into_iter().fold(0.0f64, f64::max);
    c.residual("extension derivative mismatch", gap, 1e-6);
    Ok(())
}

fn separating_functional(c: &mut Ctx) -> Outcome {
    let ts: Vec<Vec<f64>> = (1..=12).map(|k| vec![1.0 / k as f64]).collect();
    let rep = separating_discontinuity_demo(&moving_bump_family(), &[0.0], &ts)?;
    c.residual("T(f(t0))", rep.value_at_t0.abs(), 0.0);
    let start = rep.functional.start();
    let tail: Vec<f64> = rep.rows.iter().filter(|r| r.k > start).map(|r| r.value).collect();
    c.condition("T(f(t_k)) >= 1 for k > N", !tail.is_empty() && tail.iter().all(|v| *v >= 1.0));
    c.note("N", start);
    c.note("rows", json!(rep.rows));
    Ok(())
}
