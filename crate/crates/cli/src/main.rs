//! `heatjet` command-line front end.
//!
//! Exit codes: 0 success, 1 verification or computation failure, 2 usage
//! error. Output goes to stdout unless `--output` names a file, which is
//! placed in the output directory (`--out-dir`, overridden by the
//! `HEATJET_OUT_DIR` environment variable).

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use heatjet::dist::{heat_evolve, limit_lemma_check, Atom, Distribution, FnDensity, PhiCurve};
use heatjet::halfline::{builtin, smoothness_report, BUILTINS, DEFAULT_TOL, REPORT_SCHEMA};
use heatjet::named::{family, test_function, FAMILIES};
use heatjet::quad::QuadratureConfig;
use heatjet::testfn::{lubs_check, separating_discontinuity_demo, LubsOutcome};
use heatjet::verify::{run_verify, VerifyOptions, CRITERIA, DEFAULT_SEED};
use heatjet::weil::{
    membership_defect, parse_poly, reduction_check, AlgebraDoc, AlgebraSpec, MultiIndex, TruncatedPoly, WeilAlgebra,
    DEFAULT_MEMBERSHIP_TOL,
};
use serde_json::json;

const OUT_DIR_ENV: &str = "HEATJET_OUT_DIR";

#[derive(Parser)]
#[command(name = "heatjet", version, about = "Heat-kernel distributions, half-line smoothness and Weil-algebra jets")]
struct Cli {
    /// Directory for files named by --output.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a Weil algebra and print its basis, table and reductions.
    WeilDemo(WeilDemo),
    /// Run the acceptance criteria and emit a JSON report.
    Verify(Verify),
    /// Evolve initial data under the heat flow and sample the density.
    Evolve(Evolve),
    /// Tabulate Phi(t) = <K(t), phi> and its derivative estimators.
    HeatTable(HeatTable),
    /// The ladder (Phi(t) - phi(0))/t at t = 2^-j.
    LimitTable(LimitTable),
    /// Square-smooth and Seeley tests for a half-line function.
    SmoothnessReport(Smoothness),
    /// Uniform-support check or discontinuity table for a plot family.
    LubsDemo(LubsDemo),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Clone)]
struct Output {
    /// Write to this file inside the output directory instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct Quad {
    /// Gauss-Hermite nodes.
    #[arg(long)]
    gh_nodes: Option<usize>,
    /// Gauss-Legendre nodes per panel.
    #[arg(long)]
    gl_nodes: Option<usize>,
    /// Initial panels per segment.
    #[arg(long)]
    panels: Option<usize>,
    #[arg(long)]
    max_depth: Option<usize>,
    #[arg(long)]
    abs_tol: Option<f64>,
    #[arg(long)]
    rel_tol: Option<f64>,
}

impl Quad {
    fn config(&self) -> QuadratureConfig {
        let mut q = QuadratureConfig::default();
        if let Some(v) = self.gh_nodes {
            q.gh_nodes = v;
        }
        if let Some(v) = self.gl_nodes {
            q.gl_nodes = v;
        }
        if let Some(v) = self.panels {
            q.panels = v;
        }
        if let Some(v) = self.max_depth {
            q.max_depth = v;
        }
        if let Some(v) = self.abs_tol {
            q.abs_tol = v;
        }
        if let Some(v) = self.rel_tol {
            q.rel_tol = v;
        }
        q
    }
}

#[derive(Args)]
struct WeilDemo {
    /// Number of variables.
    #[arg(long)]
    l: Option<usize>,
    /// Truncation order: monomials of order >= r vanish.
    #[arg(long)]
    r: Option<usize>,
    /// Ideal generator, e.g. "s1^2 - s2". Repeatable.
    #[arg(long = "gen")]
    generators: Vec<String>,
    /// Algebra spec as JSON ({"l":..,"r":..,"generators":[[{"exponents":..,"coeff":..}]]}).
    #[arg(long, conflicts_with_all = ["l", "r", "generators"])]
    spec: Option<PathBuf>,
    /// Polynomial to reduce into the quotient basis. Repeatable.
    #[arg(long)]
    reduce: Vec<String>,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct Verify {
    /// Replace every residual tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Run only this criterion. Repeatable.
    #[arg(long)]
    only: Vec<String>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Report zero runtimes, making the output byte-reproducible.
    #[arg(long)]
    no_timing: bool,
    #[command(flatten)]
    quad: Quad,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct Evolve {
    /// Snapshot time. Repeatable.
    #[arg(long = "t", required = true)]
    times: Vec<f64>,
    /// Sample grid lo:hi:step.
    #[arg(long, default_value = "-4:4:0.05", allow_hyphen_values = true)]
    grid: String,
    /// Initial atom `delta[point,order,weight]` (or `delta` for the Dirac at 0). Repeatable.
    #[arg(long)]
    atom: Vec<String>,
    /// Compactly supported initial density, by test-function name.
    #[arg(long)]
    density: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(flatten)]
    quad: Quad,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct HeatTable {
    #[arg(long, default_value = "bump")]
    phi: String,
    /// Times to tabulate. Repeatable.
    #[arg(long = "t")]
    times: Vec<f64>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(flatten)]
    quad: Quad,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct LimitTable {
    #[arg(long, default_value = "bump")]
    phi: String,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(flatten)]
    quad: Quad,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct Smoothness {
    /// Built-in half-line function.
    #[arg(long = "f")]
    function: String,
    /// Highest derivative order tested.
    #[arg(long, default_value_t = 4)]
    order: usize,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Also write the extrapolation ladder as CSV to this file in the output directory.
    #[arg(long)]
    ladder_csv: Option<PathBuf>,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct LubsDemo {
    #[arg(long, default_value = "moving")]
    family: String,
    /// Parameter to approach when the family is not locally uniformly supported.
    #[arg(long)]
    t0: Option<f64>,
    /// Length of the approaching sequence t_k = t0 + s/k.
    #[arg(long, default_value_t = 12)]
    k: usize,
    /// The step s above.
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    #[command(flatten)]
    out: Output,
}

enum Failure {
    Usage(anyhow::Error),
    Failed(anyhow::Error),
}

type Run = Result<bool, Failure>;

fn usage(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Usage(e.into())
}

fn failed(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Failed(e.into())
}

struct Sink {
    dir: PathBuf,
}

impl Sink {
    fn emit(&self, out: &Output, text: &str) -> Result<(), Failure> {
        self.emit_to(out.output.as_ref(), text)
    }

    fn emit_to(&self, file: Option<&PathBuf>, text: &str) -> Result<(), Failure> {
        match file {
            None => {
                print!("{text}");
                Ok(())
            }
            Some(name) => {
                fs::create_dir_all(&self.dir)
                    .with_context(|| format!("creating {}", self.dir.display()))
                    .map_err(failed)?;
                let path = self.dir.join(name);
                fs::write(&path, text)
                    .with_context(|| format!("writing {}", path.display()))
                    .map_err(failed)
            }
        }
    }
}

fn json_text<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let dir = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or(cli.out_dir);
    let sink = Sink { dir };
    let result = match cli.command {
        Command::WeilDemo(a) => weil_demo(a, &sink),
        Command::Verify(a) => verify(a, &sink),
        Command::Evolve(a) => evolve(a, &sink),
        Command::HeatTable(a) => heat_table(a, &sink),
        Command::LimitTable(a) => limit_table(a, &sink),
        Command::SmoothnessReport(a) => smoothness(a, &sink),
        Command::LubsDemo(a) => lubs_demo(a, &sink),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Failed(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("usage error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn weil_demo(a: WeilDemo, sink: &Sink) -> Run {
    let algebra = match &a.spec {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))
                .map_err(usage)?;
            let spec: AlgebraSpec = serde_json::from_str(&text).context("parsing algebra spec").map_err(usage)?;
            spec.build().map_err(usage)?
        }
        None => {
            let (l, r) = match (a.l, a.r) {
                (Some(l), Some(r)) => (l, r),
                _ => return Err(usage(anyhow!("--l and --r are required without --spec"))),
            };
            if l == 0 {
                return Err(usage(anyhow!("--l must be at least 1")));
            }
            let gens = a
                .generators
                .iter()
                .map(|g| parse_poly(g, l, r).with_context(|| format!("generator `{g}`")))
                .collect::<Result<Vec<_>, _>>()
                .map_err(usage)?;
            WeilAlgebra::build(l, r, gens).map_err(usage)?
        }
    };
    let (l, r) = (algebra.nvars(), algebra.order());
    let generator_defects: Vec<f64> = algebra
        .generators()
        .iter()
        .map(|g| membership_defect(g, &algebra))
        .collect::<Result<_, _>>()
        .map_err(failed)?;
    // class of every monomial below the truncation order
    let mut monomial_classes = Vec::new();
    for alpha in MultiIndex::all_below(l, r) {
        let p = TruncatedPoly::monomial(alpha.clone(), r, 1.0);
        monomial_classes.push(json!({
            "monomial": alpha.to_string(),
            "coords": algebra.reduce(&p).map_err(failed)?,
        }));
    }
    let mut reductions = Vec::new();
    for src in &a.reduce {
        let p = parse_poly(src, l, r)
            .with_context(|| format!("--reduce `{src}`"))
            .map_err(usage)?;
        let rep = reduction_check(&p, &algebra, DEFAULT_MEMBERSHIP_TOL).map_err(failed)?;
        reductions.push(json!({ "poly": src, "report": rep }));
    }
    let doc = json!({
        "algebra": AlgebraDoc::from(&algebra),
        "generator_membership_defects": generator_defects,
        "monomial_classes": monomial_classes,
        "reductions": reductions,
    });
    sink.emit(&a.out, &json_text(&doc))?;
    Ok(true)
}

fn verify(a: Verify, sink: &Sink) -> Run {
    for name in &a.only {
        if !CRITERIA.contains(&name.as_str()) {
            return Err(usage(anyhow!(
                "unknown criterion `{name}`; expected one of {}",
                CRITERIA.join(", ")
            )));
        }
    }
    let opts = VerifyOptions {
        tol: a.tol,
        only: a.only,
        seed: a.seed,
        quad: a.quad.config(),
        timing: !a.no_timing,
    };
    let report = run_verify(&opts).map_err(usage)?;
    sink.emit(&a.out, &json_text(&report))?;
    for c in &report.criteria {
        eprintln!(
            "{} {:<22} residual={:.3e} tol={:.1e}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.residual,
            c.tolerance
        );
    }
    Ok(report.passed)
}

fn parse_grid(s: &str) -> Result<Vec<f64>, Failure> {
    let parts: Vec<&str> = s.split(':').collect();
    let nums = parts
        .iter()
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| usage(anyhow!("grid `{s}` must be lo:hi:step")))?;
    let [lo, hi, step] = nums[..] else {
        return Err(usage(anyhow!("grid `{s}` must be lo:hi:step")));
    };
    if !(lo <= hi && step > 0.0 && ((hi - lo) / step) < 1e7) {
        return Err(usage(anyhow!("grid `{s}` needs lo <= hi and a positive step")));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| lo + i as f64 * step).collect())
}

fn parse_atom(s: &str) -> Result<Atom, Failure> {
    let s = s.trim();
    if s == "delta" {
        return Ok(Atom::new(0.0, 0, 1.0));
    }
    let bad = || usage(anyhow!("atom `{s}` must be delta or delta[point,order,weight]"));
    let inner = s
        .strip_prefix("delta[")
        .and_then(|r| r.strip_suffix(']'))
        .ok_or_else(bad)?;
    let f: Vec<&str> = inner.split(',').map(str::trim).collect();
    if f.len() != 3 {
        return Err(bad());
    }
    let point: f64 = f[0].parse().map_err(|_| bad())?;
    let order: usize = f[1].parse().map_err(|_| bad())?;
    let weight: f64 = f[2].parse().map_err(|_| bad())?;
    if !point.is_finite() || !weight.is_finite() {
        return Err(bad());
    }
    Ok(Atom::new(point, order, weight))
}

fn evolve(a: Evolve, sink: &Sink) -> Run {
    let grid = parse_grid(&a.grid)?;
    if let Some(t) = a.times.iter().find(|t| !(**t >= 0.0)) {
        return Err(usage(anyhow!("time must be non-negative, got {t}")));
    }
    let mut atoms = a.atom.iter().map(|s| parse_atom(s)).collect::<Result<Vec<_>, _>>()?;
    if atoms.is_empty() && a.density.is_none() {
        atoms.push(Atom::new(0.0, 0, 1.0));
    }
    let mut init = Distribution::from_atoms(atoms);
    if let Some(name) = &a.density {
        let f = test_function(name).map_err(usage)?;
        init = init.add(&Distribution::from_density(FnDensity::from_smooth(f).map_err(usage)?));
    }
    let q = a.quad.config();
    let mut rows = Vec::new();
    for &t in &a.times {
        if t == 0.0 && !init.atoms().is_empty() {
            return Err(usage(anyhow!("t = 0 with atoms has no density to sample")));
        }
        let d = heat_evolve(&init, t).map_err(failed)?;
        for &x in &grid {
            rows.push((t, x, d.density_at(x, &q).map_err(failed)?));
        }
    }
    let text = match a.format {
        Format::Csv => {
            let mut s = String::from("t,x,density\n");
            for (t, x, v) in &rows {
                let _ = writeln!(s, "{t},{x},{v}");
            }
            s
        }
        Format::Json => json_text(&rows.iter().map(|(t, x, v)| json!({"t": t, "x": x, "density": v})).collect::<Vec<_>>()),
    };
    sink.emit(&a.out, &text)?;
    Ok(true)
}

fn opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn heat_table(a: HeatTable, sink: &Sink) -> Run {
    let phi = test_function(&a.phi).map_err(usage)?;
    let times = if a.times.is_empty() {
        vec![0.0, 0.0625, 0.125, 0.25, 0.5, 1.0, 2.0]
    } else {
        a.times.clone()
    };
    if let Some(t) = times.iter().find(|t| !(**t >= 0.0)) {
        return Err(usage(anyhow!("time must be non-negative, got {t}")));
    }
    let curve = PhiCurve::new(phi, a.quad.config());
    let mut rows = Vec::new();
    for &t in &times {
        let value = curve.value(t).map_err(failed)?;
        let d1 = curve.identity_derivative(1, t).map_err(failed)?;
        let d2 = curve.identity_derivative(2, t).map_err(failed)?;
        let (f1, f2) = if t > 0.0 {
            (
                Some(curve.fd_derivative(1, t).map_err(failed)?),
                Some(curve.fd_derivative(2, t).map_err(failed)?),
            )
        } else {
            (None, None)
        };
        rows.push((t, value, d1, f1, d2, f2));
    }
    let text = match a.format {
        Format::Csv => {
            let mut s = String::from("t,phi,d1_identity,d1_fd,d2_identity,d2_fd\n");
            for (t, v, d1, f1, d2, f2) in &rows {
                let _ = writeln!(s, "{t},{v},{d1},{},{d2},{}", opt(*f1), opt(*f2));
            }
            s
        }
        Format::Json => json_text(
            &rows
                .iter()
                .map(|(t, v, d1, f1, d2, f2)| {
                    json!({"t": t, "phi": v, "d1_identity": d1, "d1_fd": f1, "d2_identity": d2, "d2_fd": f2})
                })
                .collect::<Vec<_>>(),
        ),
    };
    sink.emit(&a.out, &text)?;
    Ok(true)
}

fn limit_table(a: LimitTable, sink: &Sink) -> Run {
    let phi = test_function(&a.phi).map_err(usage)?;
    let rep = limit_lemma_check(phi, &a.quad.config()).map_err(failed)?;
    let text = match a.format {
        Format::Csv => {
            let mut s = String::from("j,t,quotient\n");
            for r in &rep.rows {
                let _ = writeln!(s, "{},{},{}", r.j, r.t, r.quotient);
            }
            s
        }
        Format::Json => json_text(&rep),
    };
    sink.emit(&a.out, &text)?;
    eprintln!("limit {} (phi''(0) = {}, residual {:.3e})", rep.limit, rep.exact, rep.residual);
    Ok(true)
}

fn smoothness(a: Smoothness, sink: &Sink) -> Run {
    let f = builtin(&a.function).ok_or_else(|| {
        usage(anyhow!(
            "unknown function `{}`; expected one of {}",
            a.function,
            BUILTINS.join(", ")
        ))
    })?;
    if a.order == 0 {
        return Err(usage(anyhow!("--order must be at least 1")));
    }
    let rep = match smoothness_report(&f, a.order, a.tol) {
        Ok(r) => r,
        Err(e) => {
            // evaluation trouble near 0 is not a verdict on smoothness
            let doc = json!({"schema": REPORT_SCHEMA, "function": a.function, "error": e.to_string()});
            sink.emit(&a.out, &json_text(&doc))?;
            return Err(failed(e));
        }
    };
    sink.emit(&a.out, &json_text(&rep))?;
    if let (Some(path), Some(ladder)) = (&a.ladder_csv, &rep.ladder) {
        let mut s = String::from("t");
        for k in 0..ladder.values.len() {
            let _ = write!(s, ",d{k}");
        }
        s.push('\n');
        for (j, t) in ladder.t.iter().enumerate() {
            let _ = write!(s, "{t}");
            for row in &ladder.values {
                let _ = write!(s, ",{}", row[j]);
            }
            s.push('\n');
        }
        sink.emit_to(Some(path), &s)?;
    }
    Ok(true)
}

fn lubs_demo(a: LubsDemo, sink: &Sink) -> Run {
    let fam = family(&a.family).ok_or_else(|| {
        usage(anyhow!("unknown family `{}`; expected one of {}", a.family, FAMILIES.join(", ")))
    })?;
    if a.k == 0 || !(a.scale > 0.0) {
        return Err(usage(anyhow!("--k and --scale must be positive")));
    }
    let outcome = lubs_check(&fam);
    let t0 = match (&outcome, a.t0) {
        (_, Some(t0)) => Some(vec![t0]),
        (LubsOutcome::Violation { t0, .. }, None) => Some(t0.clone()),
        _ => None,
    };
    let text = match (&outcome, t0) {
        (LubsOutcome::Cover { entries }, None) => {
            let mut s = String::from("t,radius,bound,checked\n");
            for e in entries {
                let t: Vec<String> = e.t.iter().map(|v| v.to_string()).collect();
                let _ = writeln!(s, "{},{},{},{}", t.join(";"), e.radius, e.bound, e.checked);
            }
            s
        }
        (_, Some(t0)) => {
            let ts: Vec<Vec<f64>> = (1..=a.k)
                .map(|k| t0.iter().map(|u| u + a.scale / k as f64).collect())
                .collect();
            let rep = separating_discontinuity_demo(&fam, &t0, &ts).map_err(failed)?;
            let mut s = String::from("k,t,x,c,value\n");
            let _ = writeln!(s, "0,{},,,{}", t0[0], rep.value_at_t0);
            for r in &rep.rows {
                let _ = writeln!(s, "{},{},{},{},{}", r.k, r.t[0], r.x, r.c, r.value);
            }
            eprintln!("N = {}, separated = {}", rep.functional.start(), rep.separated);
            s
        }
        (other, None) => return Err(failed(anyhow!("no cover and no parameter to approach: {other:?}"))),
    };
    sink.emit(&a.out, &text)?;
    Ok(true)
}
