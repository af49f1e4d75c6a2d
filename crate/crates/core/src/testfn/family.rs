use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use super::{Bump, TestFnError};

pub type FamilyFn = dyn Fn(&[f64], f64) -> f64 + Send + Sync;
pub type SupportWitness = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// Grid on which supports are scanned.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScanConfig {
    /// Scan `[-x_max, x_max]`.
    pub x_max: f64,
    pub step: f64,
    /// Values with `|f| <= tol` count as zero.
    pub tol: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            x_max: 128.0,
            step: 1.0 / 64.0,
            tol: 1e-300,
        }
    }
}

impl ScanConfig {
    fn points(&self) -> impl Iterator<Item = f64> + '_ {
        let n = (self.x_max / self.step).round() as i64;
        (-n..=n).map(move |j| j as f64 * self.step)
    }
}

/// Smooth map `f: U x R -> R`, `U` a box in `R^k`, sampled on a grid.
#[derive(Clone)]
pub struct PlotFamily {
    name: String,
    lo: Vec<f64>,
    hi: Vec<f64>,
    samples: Vec<Vec<f64>>,
    f: Arc<FamilyFn>,
    witness: Option<Arc<SupportWitness>>,
    scan: ScanConfig,
}

impl fmt::Debug for PlotFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PlotFamily")
            .field("name", &self.name)
            .field("lo", &self.lo)
            .field("hi", &self.hi)
            .field("samples", &self.samples.len())
            .field("witness", &self.witness.is_some())
            .finish()
    }
}

impl PlotFamily {
    /// Family over the box `[lo, hi]` with a tensor grid of `per_axis`
    /// points per axis, endpoints included.
    pub fn new<F>(name: &str, lo: Vec<f64>, hi: Vec<f64>, per_axis: usize, f: F) -> Result<Self, TestFnError>
    where
        F: Fn(&[f64], f64) -> f64 + Send + Sync + 'static,
    {
        if lo.len() != hi.len() || lo.is_empty() || lo.iter().zip(&hi).any(|(a, b)| !(a <= b)) {
            return Err(TestFnError::Parameter("parameter box must be non-empty".into()));
        }
        if per_axis < 2 {
            return Err(TestFnError::Parameter("need at least 2 samples per axis".into()));
        }
        let mut samples = vec![Vec::new()];
        for (a, b) in lo.iter().zip(&hi) {
            let axis: Vec<f64> = (0..per_axis)
                .map(|i| a + (b - a) * i as f64 / (per_axis - 1) as f64)
                .collect();
            samples = samples
                .into_iter()
                .flat_map(|p| {
                    axis.iter().map(move |&v| {
                        let mut q = p.clone();
                        q.push(v);
                        q
                    })
                })
                .collect();
        }
        Ok(Self {
            name: name.to_string(),
            lo,
            hi,
            samples,
            f: Arc::new(f),
            witness: None,
            scan: ScanConfig::default(),
        })
    }

    pub fn with_witness<W>(mut self, b: W) -> Self
    where
        W: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        self.witness = Some(Arc::new(b));
        self
    }

    pub fn with_scan(mut self, scan: ScanConfig) -> Self {
        self.scan = scan;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn samples(&self) -> &[Vec<f64>] {
        &self.samples
    }

    pub fn scan(&self) -> &ScanConfig {
        &self.scan
    }

    pub fn has_witness(&self) -> bool {
        self.witness.is_some()
    }

    pub fn eval(&self, u: &[f64], x: f64) -> f64 {
        (self.f)(u, x)
    }

    /// Largest scanned `|x|` with `f(u, x)` nonzero; `None` if the
    /// nonzero set reaches the edge of the scan window.
    pub fn support_bound(&self, u: &[f64]) -> Option<f64> {
        let mut bound = 0.0f64;
        for x in self.scan.points() {
            if self.eval(u, x).abs() > self.scan.tol {
                bound = bound.max(x.abs());
            }
        }
        if bound >= self.scan.x_max - self.scan.step {
            None
        } else {
            Some(bound)
        }
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// A neighbourhood of a sampled parameter and one support bound valid on it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoverEntry {
    pub t: Vec<f64>,
    pub radius: f64,
    pub bound: f64,
    /// Samples inside the neighbourhood that were checked.
    pub checked: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum LubsOutcome {
    Cover { entries: Vec<CoverEntry> },
    /// Supports blow up when approaching `t0`; `approach` lists
    /// `(parameter, support bound)` nearest first.
    Violation { t0: Vec<f64>, approach: Vec<(Vec<f64>, f64)> },
    /// The witness bound is wrong: `f(u, x) != 0` with `|x| > b(u) + 1`.
    WitnessRefuted { u: Vec<f64>, x: f64 },
    Inconclusive { reason: String },
}

impl LubsOutcome {
    pub fn is_lubs(&self) -> bool {
        matches!(self, LubsOutcome::Cover { .. })
    }
}

fn spacing(samples: &[Vec<f64>], i: usize) -> f64 {
    samples
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, s)| dist(s, &samples[i]))
        .fold(f64::INFINITY, f64::min)
}

/// Checks that supports are locally uniformly bounded over the sample grid.
///
/// With a witness `b`, each sample `t` gets the constant `c_t = b(t) + 1` and
/// the largest neighbourhood (at most twice the grid spacing) on which `b`
/// stays below `c_t`; every sample in it is then scanned for values beyond
/// `c_t`. Without a witness, scanned support bounds are searched for a
/// parameter where they blow up.
pub fn lubs_check(fam: &PlotFamily) -> LubsOutcome {
    let samples = &fam.samples;
    if samples.len() < 2 {
        return LubsOutcome::Inconclusive {
            reason: "fewer than two samples".into(),
        };
    }
    match &fam.witness {
        Some(b) => witness_cover(fam, b.as_ref()),
        None => scan_cover(fam),
    }
}

fn witness_cover(fam: &PlotFamily, b: &SupportWitness) -> LubsOutcome {
    let samples = &fam.samples;
    let mut entries = Vec::with_capacity(samples.len());
    for (i, t) in samples.iter().enumerate() {
        let c = b(t) + 1.0;
        if c >= fam.scan.x_max {
            return LubsOutcome::Inconclusive {
                reason: format!("bound {c} at u = {t:?} exceeds the scan window"),
            };
        }
        let h = spacing(samples, i);
        let mut radius = 2.0 * h;
        let nbrs = loop {
            let nbrs: Vec<&Vec<f64>> = samples.iter().filter(|y| dist(y, t) <= radius).collect();
            if nbrs.iter().all(|y| b(y) < c) {
                break nbrs;
            }
            radius *= 0.5;
            if radius < h {
                return LubsOutcome::Inconclusive {
                    reason: format!("grid too coarse to certify a neighbourhood of u = {t:?}"),
                };
            }
        };
        for y in &nbrs {
            for x in fam.scan.points().filter(|x| x.abs() > c) {
                if fam.eval(y, x).abs() > fam.scan.tol {
                    return LubsOutcome::WitnessRefuted { u: y.to_vec(), x };
                }
            }
        }
        entries.push(CoverEntry {
            t: t.clone(),
            radius,
            bound: c,
            checked: nbrs.len(),
        });
    }
    LubsOutcome::Cover { entries }
}

fn scan_cover(fam: &PlotFamily) -> LubsOutcome {
    let samples = &fam.samples;
    let bounds: Vec<Option<f64>> = samples.iter().map(|u| fam.support_bound(u)).collect();
    let k = samples[0].len();
    for (i, u) in samples.iter().enumerate() {
        let Some(here) = bounds[i] else { continue };
        for axis in 0..k {
            for side in [-1.0, 1.0] {
                // samples on the ray from u along the axis, nearest first
                let mut ray: Vec<(f64, usize)> = samples
                    .iter()
                    .enumerate()
                    .filter(|&(j, y)| {
                        j != i
                            && (0..k).all(|a| a == axis || y[a] == u[a])
                            && (y[axis] - u[axis]) * side > 0.0
                    })
                    .map(|(j, y)| ((y[axis] - u[axis]).abs(), j))
                    .collect();
                ray.sort_by(|a, b| a.0.total_cmp(&b.0));
                let near: Vec<usize> = ray.iter().take(4).map(|&(_, j)| j).collect();
                if near.len() < 3 {
                    continue;
                }
                let vals: Option<Vec<f64>> = near.iter().map(|&j| bounds[j]).collect();
                let Some(vals) = vals else { continue };
                let growing = vals.windows(2).all(|w| w[0] > w[1]);
                if growing && vals[0] > 10.0 * (here + 1.0) {
                    return LubsOutcome::Violation {
                        t0: u.clone(),
                        approach: near.iter().zip(vals).map(|(&j, v)| (samples[j].clone(), v)).collect(),
                    };
                }
            }
        }
    }
    if let Some(i) = bounds.iter().position(Option::is_none) {
        return LubsOutcome::Inconclusive {
            reason: format!("support at u = {:?} reaches the scan window", samples[i]),
        };
    }
    let entries = samples
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let radius = 2.0 * spacing(samples, i);
            let nbrs: Vec<usize> = (0..samples.len()).filter(|&j| dist(&samples[j], t) <= radius).collect();
            let bound = nbrs.iter().filter_map(|&j| bounds[j]).fold(0.0, f64::max) + 1.0;
            CoverEntry {
                t: t.clone(),
                radius,
                bound,
                checked: nbrs.len(),
            }
        })
        .collect();
    LubsOutcome::Cover { entries }
}

/// `T(g) = sum_{n >= N} c_n^(-2) g(x_n)^2` over finitely many stored points.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeparatingFunctional {
    points: Vec<f64>,
    scales: Vec<f64>,
    start: usize,
}

impl SeparatingFunctional {
    /// `points[n - 1] = x_n`, `scales[n - 1] = c_n`; `start` is the first
    /// index `N >= 1` in the sum.
    pub fn new(points: Vec<f64>, scales: Vec<f64>, start: usize) -> Result<Self, TestFnError> {
        if points.len() != scales.len() || start == 0 {
            return Err(TestFnError::Parameter("points and scales must pair up, N >= 1".into()));
        }
        if scales.iter().any(|&c| c == 0.0 || !c.is_finite()) {
            return Err(TestFnError::Parameter("scales must be finite and nonzero".into()));
        }
        if points.windows(2).any(|w| w[0].abs() >= w[1].abs()) {
            return Err(TestFnError::Parameter("|x_n| must increase".into()));
        }
        Ok(Self { points, scales, start })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn eval<G: Fn(f64) -> f64>(&self, g: G) -> f64 {
        self.points
            .iter()
            .zip(&self.scales)
            .skip(self.start - 1)
            .map(|(&x, &c)| {
                let r = g(x) / c;
                r * r
            })
            .sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeparationRow {
    pub k: usize,
    pub t: Vec<f64>,
    pub x: f64,
    pub c: f64,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeparationReport {
    pub functional: SeparatingFunctional,
    pub t0: Vec<f64>,
    /// `T(f(t0, .))`.
    pub value_at_t0: f64,
    pub rows: Vec<SeparationRow>,
    /// `T(f(t0, .)) = 0` and `T(f(t_k, .)) >= 1` for every `k > N`.
    pub separated: bool,
}

/// Builds the separating functional from a sequence `t_k -> t0` and checks
/// that `T` vanishes at `t0` while `T(f(t_k, .)) >= 1` for `k > N`.
///
/// The compact sets are `K_k = [-(k - 1/2), k - 1/2]`; `x_k` is the scanned
/// point outside `K_k` where `|f(t_k, .)|` is largest.
pub fn separating_discontinuity_demo(
    fam: &PlotFamily,
    t0: &[f64],
    ts: &[Vec<f64>],
) -> Result<SeparationReport, TestFnError> {
    let radius = |k: usize| k as f64 - 0.5;
    let n = match fam.support_bound(t0) {
        Some(b) => (1..).find(|&k| radius(k) > b).unwrap_or(1),
        None => {
            return Err(TestFnError::NoViolatingSequence(
                "support at t0 exceeds the scan window".into(),
            ))
        }
    };
    let mut points = Vec::new();
    let mut scales = Vec::new();
    for (idx, t) in ts.iter().enumerate() {
        let k = idx + 1;
        let best = fam
            .scan
            .points()
            .filter(|x| x.abs() > radius(k))
            .map(|x| (x, fam.eval(t, x)))
            .filter(|(_, v)| v.abs() > fam.scan.tol)
            .fold(None::<(f64, f64)>, |acc, (x, v)| match acc {
                Some((_, w)) if w.abs() >= v.abs() => acc,
                _ => Some((x, v)),
            });
        match best {
            Some((x, c)) => {
                points.push(x);
                scales.push(c);
            }
            None => break,
        }
    }
    if points.len() <= n {
        return Err(TestFnError::NoViolatingSequence(format!(
            "{} points outside K_k found, need more than N = {n}",
            points.len()
        )));
    }
    let functional = SeparatingFunctional::new(points, scales, n)
        .map_err(|e| TestFnError::NoViolatingSequence(e.to_string()))?;
    let value_at_t0 = functional.eval(|x| fam.eval(t0, x));
    let rows: Vec<SeparationRow> = functional
        .points
        .iter()
        .zip(&functional.scales)
        .enumerate()
        .map(|(i, (&x, &c))| SeparationRow {
            k: i + 1,
            t: ts[i].clone(),
            x,
            c,
            value: functional.eval(|y| fam.eval(&ts[i], y)),
        })
        .collect();
    let separated = value_at_t0 == 0.0 && rows.iter().filter(|r| r.k > n).all(|r| r.value >= 1.0);
    Ok(SeparationReport {
        functional,
        t0: t0.to_vec(),
        value_at_t0,
        rows,
        separated,
    })
}

fn standard() -> Bump {
    Bump::standard()
}

/// `B(x) sin(u)` on `u in [0, pi]`: support independent of `u`.
pub fn steady_family() -> PlotFamily {
    let b = standard();
    PlotFamily::new("steady", vec![0.0], vec![std::f64::consts::PI], 41, move |u, x| {
        b.eval(x) * u[0].sin()
    })
    .expect("valid box")
    .with_witness(|_| 1.0)
}

/// `B(x - 1/u)` on `u in [0, 1]`, identically zero at `u = 0`.
pub fn moving_bump_family() -> PlotFamily {
    let b = standard();
    PlotFamily::new("moving", vec![0.0], vec![1.0], 101, move |u, x| {
        if u[0] == 0.0 {
            0.0
        } else {
            b.eval(x - 1.0 / u[0])
        }
    })
    .expect("valid box")
}

/// `u B(x - 1/u)` on `u in [0, 1]`.
pub fn scaled_moving_family() -> PlotFamily {
    let b = standard();
    PlotFamily::new("scaled", vec![0.0], vec![1.0], 101, move |u, x| {
        if u[0] == 0.0 {
            0.0
        } else {
            u[0] * b.eval(x - 1.0 / u[0])
        }
    })
    .expect("valid box")
}

/// `B(x / (1 + u^2))` on `u in [-2, 2]`, support bound `1 + u^2`.
pub fn dilating_family() -> PlotFamily {
    let b = standard();
    PlotFamily::new("dilating", vec![-2.0], vec![2.0], 41, move |u, x| {
        b.eval(x / (1.0 + u[0] * u[0]))
    })
    .expect("valid box")
    .with_witness(|u| 1.0 + u[0] * u[0])
}
