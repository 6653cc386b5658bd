//! Manifest-driven experiment runner behind the `approxctl` binary.
//!
//! Each experiment writes `<out>/<experiment>.csv` with a fixed header and
//! `<out>/<experiment>.summary.json` with the rules used, fitted rates, and
//! pass/fail checks. Exit codes: 0 success, 1 manifest or validation error,
//! 2 numerical failure.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::approximation::{
    rate_fit, sup_error, trace_mean_deviation, KernelIntegrator, ProbeGrid, RateFit,
};
use crate::error::Error;
use crate::geometry::{make_geometry, HarmonicTerm, ModelGeometry, Perturbation, SpherePoint};
use crate::kernels::KernelEvaluator;
use crate::quadrature::{integrate, recommended_rule, RuleInfo};
use crate::sections::{closed_form_norms, orthonormal_basis};
use crate::spectral::{chi_closed_form, chi_via_operator};
use crate::toeplitz::{
    moment_map_value, toeplitz_matrix, trace_identity_residual, SphereFunction, TestFunction,
};

/// Largest `d_N + 1` the runner accepts.
pub const MAX_SECTION_DIM: u32 = 512;

/// Random probe points per `N` in the dual-path experiment.
pub const DUAL_PATH_POINTS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
#[value(rename_all = "kebab-case")]
pub enum Experiment {
    Density,
    GramCheck,
    TraceCheck,
    Approx,
    Convergence,
    Spectrum,
    DualPath,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Density => "density",
            Experiment::GramCheck => "gram-check",
            Experiment::TraceCheck => "trace-check",
            Experiment::Approx => "approx",
            Experiment::Convergence => "convergence",
            Experiment::Spectrum => "spectrum",
            Experiment::DualPath => "dual-path",
        }
    }

    fn needs_function(self) -> bool {
        matches!(
            self,
            Experiment::TraceCheck
                | Experiment::Approx
                | Experiment::Convergence
                | Experiment::DualPath
        )
    }

    /// CSV header, part of the stable output format.
    pub fn csv_header(self) -> &'static [&'static str] {
        match self {
            Experiment::Density => &["n", "dim", "e_min", "e_max", "zelditch_sup"],
            Experiment::GramCheck => &[
                "n",
                "dim",
                "orthonormality_residual",
                "closed_form_max_rel_err",
                "scaled_condition_number",
            ],
            Experiment::TraceCheck => &[
                "n",
                "dim",
                "trace",
                "integral",
                "residual",
                "trace_mean_deviation",
            ],
            Experiment::Approx => &["n", "y1", "y2", "y3", "f", "pn_f", "error"],
            Experiment::Convergence => &[
                "n",
                "dim",
                "sup_error",
                "mean_abs_error",
                "trace_mean_deviation",
            ],
            Experiment::Spectrum => &["n", "m", "chi_closed_form", "chi_operator", "residual"],
            Experiment::DualPath => &[
                "n",
                "point",
                "y1",
                "y2",
                "y3",
                "moment_map",
                "kernel",
                "abs_diff",
            ],
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySpec {
    pub k: u32,
    #[serde(default)]
    pub psi: Vec<HarmonicTerm>,
}

/// Manifest file contents, as parsed from JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    #[serde(default)]
    pub experiment: Option<Experiment>,
    pub geometry: GeometrySpec,
    pub n_list: Vec<u32>,
    #[serde(default)]
    pub f: Option<BTreeMap<String, f64>>,
    #[serde(default)]
    pub grid: Option<String>,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl Manifest {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Manifest(vec![format!("manifest: {e}")]))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| {
            CliError::Manifest(vec![format!(
                "cannot read manifest {}: {e}",
                path.display()
            )])
        })?;
        Self::from_json(&text)
    }
}

/// A manifest after validation against one experiment.
#[derive(Debug, Clone)]
pub struct Plan {
    pub experiment: Experiment,
    pub k: u32,
    pub psi: Perturbation,
    pub n_list: Vec<u32>,
    pub f: Option<TestFunction>,
    pub grid: ProbeGrid,
    pub out_dir: PathBuf,
    pub seed: u64,
}

#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub grid: Option<String>,
    pub seed: Option<u64>,
}

/// Checks the manifest and collects one diagnostic per problem.
pub fn validate(
    experiment: Experiment,
    manifest: &Manifest,
    overrides: &Overrides,
) -> Result<Plan, CliError> {
    let mut problems = Vec::new();
    if let Some(e) = manifest.experiment {
        if e != experiment {
            problems.push(format!("manifest is for experiment {e}, not {experiment}"));
        }
    }
    let k = manifest.geometry.k;
    if k == 0 {
        problems.push("geometry.k must be at least 1".to_string());
    }
    let psi = match Perturbation::new(manifest.geometry.psi.clone()) {
        Ok(p) => p,
        Err(e) => {
            problems.push(format!("geometry.psi: {e}"));
            Perturbation::round()
        }
    };
    if manifest.n_list.is_empty() {
        problems.push("n_list must not be empty".to_string());
    }
    if manifest.n_list.contains(&0) {
        problems.push("n_list entries must be positive".to_string());
    }
    if manifest.n_list.windows(2).any(|w| w[0] >= w[1]) {
        problems.push("n_list must be strictly increasing".to_string());
    }
    if let Some(&max_n) = manifest.n_list.iter().max() {
        if u64::from(k) * u64::from(max_n) + 1 > u64::from(MAX_SECTION_DIM) {
            problems.push(format!("k·N + 1 exceeds {MAX_SECTION_DIM} sections"));
        }
    }
    let f = match &manifest.f {
        Some(map) => match TestFunction::from_monomial_map(map) {
            Ok(f) => Some(f),
            Err(e) => {
                problems.push(format!("f: {e}"));
                None
            }
        },
        None => {
            if experiment.needs_function() {
                problems.push(format!("experiment {experiment} needs a test function f"));
            }
            None
        }
    };
    if experiment == Experiment::Spectrum && !psi.is_zero() {
        problems.push("spectrum requires the round geometry (empty psi)".to_string());
    }
    let grid_text = overrides.grid.clone().or_else(|| manifest.grid.clone());
    let grid = match grid_text {
        Some(text) => text.parse::<ProbeGrid>().unwrap_or_else(|e| {
            problems.push(e);
            ProbeGrid::lat_lon(2, 1)
        }),
        None => ProbeGrid::default(),
    };
    if !problems.is_empty() {
        return Err(CliError::Manifest(problems));
    }
    Ok(Plan {
        experiment,
        k,
        psi,
        n_list: manifest.n_list.clone(),
        f,
        grid,
        out_dir: overrides
            .out
            .clone()
            .or_else(|| manifest.output.clone())
            .unwrap_or_else(|| PathBuf::from(".")),
        seed: overrides.seed.unwrap_or(0),
    })
}

#[derive(Debug)]
pub enum CliError {
    Manifest(Vec<String>),
    Numerical(Error),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical(e) if e.is_numerical() => 2,
            _ => 1,
        }
    }

    pub fn diagnostics(&self) -> Vec<String> {
        match self {
            CliError::Manifest(p) => p.clone(),
            CliError::Numerical(e) => vec![format!("numerical failure: {e}")],
            CliError::Io(m) => vec![m.clone()],
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Numerical(e)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            pass: value <= threshold,
        }
    }

    fn at_least(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            pass: value >= threshold,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RuleRecord {
    pub n: u32,
    #[serde(flatten)]
    pub rule: RuleInfo,
}

/// Contents of `<experiment>.summary.json`.
#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub experiment: Experiment,
    pub geometry: GeometrySpec,
    pub f: Option<String>,
    pub n_list: Vec<u32>,
    pub grid: [usize; 2],
    pub seed: u64,
    pub rules: Vec<RuleRecord>,
    pub fit: Option<RateFit>,
    pub checks: Vec<Check>,
    pub pass: bool,
}

/// Files written by a run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub csv: PathBuf,
    pub summary_path: PathBuf,
    pub summary: Summary,
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

struct Report {
    rows: Vec<Vec<String>>,
    rules: Vec<RuleRecord>,
    fit: Option<RateFit>,
    checks: Vec<Check>,
}

impl Report {
    fn new() -> Self {
        Self {
            rows: Vec::new(),
            rules: Vec::new(),
            fit: None,
            checks: Vec::new(),
        }
    }
}

fn evaluator(
    geom: &ModelGeometry,
    n: u32,
    extra: usize,
    report: &mut Report,
) -> Result<KernelEvaluator, Error> {
    let rule = recommended_rule(n, geom, extra)?;
    report.rules.push(RuleRecord {
        n,
        rule: rule.info(),
    });
    Ok(KernelEvaluator::new(orthonormal_basis(geom, n, rule)?))
}

fn run_density(plan: &Plan, geom: &ModelGeometry, r: &mut Report) -> Result<(), Error> {
    let mut zelditch = Vec::new();
    let mut worst_round = 0.0f64;
    let mut min_e = f64::INFINITY;
    for &n in &plan.n_list {
        let ev = evaluator(geom, n, 0, r)?;
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        let exact = (geom.k() * n + 1) as f64 / (2.0 * std::f64::consts::PI * geom.k() as f64);
        for y in plan.grid.points() {
            let e = ev.density_e(y)?;
            lo = lo.min(e);
            hi = hi.max(e);
            worst_round = worst_round.max((e / exact - 1.0).abs());
        }
        min_e = min_e.min(lo);
        let z = ev.zelditch_deviation(plan.grid.points())?;
        zelditch.push((n, z));
        r.rows.push(vec![
            n.to_string(),
            ev.basis().dim().to_string(),
            num(lo),
            num(hi),
            num(z),
        ]);
    }
    r.checks.push(Check::at_least(
        "density_positive",
        min_e,
        f64::MIN_POSITIVE,
    ));
    if geom.is_round() {
        r.checks
            .push(Check::at_most("round_density_rel_err", worst_round, 1e-9));
    }
    if let Ok(fit) = rate_fit(&zelditch) {
        r.fit = Some(fit);
        r.checks.push(Check {
            name: "zelditch_slope".into(),
            value: fit.slope,
            threshold: -0.7,
            pass: (-1.3..=-0.7).contains(&fit.slope),
        });
    }
    Ok(())
}

fn run_gram_check(plan: &Plan, geom: &ModelGeometry, r: &mut Report) -> Result<(), Error> {
    let (mut worst_res, mut worst_closed) = (0.0f64, 0.0f64);
    for &n in &plan.n_list {
        let ev = evaluator(geom, n, 0, r)?;
        let basis = ev.basis();
        let res = basis.orthonormality_residual();
        worst_res = worst_res.max(res);
        let closed = if geom.is_round() {
            let norms = closed_form_norms(geom.k(), n);
            let g = basis.gram();
            let mut worst = 0.0f64;
            for a in 0..basis.dim() {
                for b in 0..basis.dim() {
                    let err = if a == b {
                        ((g[(a, a)].re - norms[a]) / norms[a]).abs()
                    } else {
                        g[(a, b)].norm()
                    };
                    worst = worst.max(err);
                }
            }
            worst_closed = worst_closed.max(worst);
            num(worst)
        } else {
            String::new()
        };
        r.rows.push(vec![
            n.to_string(),
            basis.dim().to_string(),
            num(res),
            closed,
            num(basis.scaled_condition_number()),
        ]);
    }
    r.checks
        .push(Check::at_most("orthonormality_residual", worst_res, 1e-10));
    if geom.is_round() {
        r.checks.push(Check::at_most(
            "round_gram_closed_form",
            worst_closed,
            1e-12,
        ));
    }
    Ok(())
}

fn run_trace_check(
    plan: &Plan,
    geom: &ModelGeometry,
    f: &TestFunction,
    r: &mut Report,
) -> Result<(), Error> {
    let mut worst = 0.0f64;
    for &n in &plan.n_list {
        let ev = evaluator(geom, n, f.degree() as usize, r)?;
        let basis = ev.basis();
        let t = toeplitz_matrix(basis, f)?;
        let residual = trace_identity_residual(&t, basis, f)?;
        worst = worst.max(residual);
        let integral: f64 = integrate(basis.rule(), |y| basis.density(y) * f.eval(y), geom)?;
        let dev = trace_mean_deviation(&t, geom, basis.rule(), f)?;
        r.rows.push(vec![
            n.to_string(),
            basis.dim().to_string(),
            num(t.trace()),
            num(integral),
            num(residual),
            num(dev),
        ]);
    }
    r.checks
        .push(Check::at_most("trace_identity_residual", worst, 1e-9));
    Ok(())
}

fn run_approx(
    plan: &Plan,
    geom: &ModelGeometry,
    f: &TestFunction,
    r: &mut Report,
) -> Result<(), Error> {
    for &n in &plan.n_list {
        let ev = evaluator(geom, n, f.degree() as usize, r)?;
        let basis = ev.basis();
        let t = toeplitz_matrix(basis, f)?;
        for y in plan.grid.points() {
            let c: Vec<_> = basis
                .eval(&y.to_homogeneous())
                .into_iter()
                .map(|s| s.conj())
                .collect();
            let p = t.expectation(&c)?;
            let fy = f.eval(y);
            r.rows.push(vec![
                n.to_string(),
                num(y.y1),
                num(y.y2),
                num(y.y3),
                num(fy),
                num(p),
                num((p - fy).abs()),
            ]);
        }
    }
    Ok(())
}

fn run_convergence(
    plan: &Plan,
    geom: &ModelGeometry,
    f: &TestFunction,
    r: &mut Report,
) -> Result<(), Error> {
    let mut pts = Vec::new();
    for &n in &plan.n_list {
        let ev = evaluator(geom, n, f.degree() as usize, r)?;
        let stats = sup_error(&ev, f, &plan.grid)?;
        let t = toeplitz_matrix(ev.basis(), f)?;
        let dev = trace_mean_deviation(&t, geom, ev.basis().rule(), f)?;
        pts.push((n, stats.sup));
        r.rows.push(vec![
            n.to_string(),
            ev.basis().dim().to_string(),
            num(stats.sup),
            num(stats.mean_abs),
            num(dev),
        ]);
    }
    if let Ok(fit) = rate_fit(&pts) {
        r.fit = Some(fit);
        r.checks.push(Check {
            name: "sup_error_slope".into(),
            value: fit.slope,
            threshold: -0.8,
            pass: (-1.2..=-0.8).contains(&fit.slope),
        });
    }
    Ok(())
}

fn run_spectrum(plan: &Plan, geom: &ModelGeometry, r: &mut Report) -> Result<(), Error> {
    let (mut worst_gap, mut worst_proj, mut worst_range) = (0.0f64, 0.0f64, 0.0f64);
    let mut chi0 = 0.0f64;
    for &n in &plan.n_list {
        let degree = geom.k() * n;
        let ev = evaluator(geom, n, degree as usize + 1, r)?;
        for m in 0..=degree {
            let closed = chi_closed_form(m, degree);
            let op = chi_via_operator(&ev, m, &plan.grid)?;
            worst_gap = worst_gap.max((closed - op.chi).abs());
            if m == 0 {
                chi0 = chi0.max((closed - 1.0).abs());
            } else {
                worst_proj = worst_proj.max(closed);
            }
            r.rows.push(vec![
                n.to_string(),
                m.to_string(),
                num(closed),
                num(op.chi),
                num(op.residual),
            ]);
        }
        worst_range = worst_range.max(chi_via_operator(&ev, degree + 1, &plan.grid)?.chi.abs());
    }
    r.checks.push(Check::at_most("chi_0_is_one", chi0, 1e-12));
    r.checks
        .push(Check::at_most("operator_vs_closed_form", worst_gap, 1e-8));
    r.checks.push(Check {
        name: "non_projection_max_chi".into(),
        value: worst_proj,
        threshold: 1.0,
        pass: worst_proj < 1.0,
    });
    r.checks
        .push(Check::at_most("range_bound", worst_range, 1e-8));
    Ok(())
}

fn run_dual_path(
    plan: &Plan,
    geom: &ModelGeometry,
    f: &TestFunction,
    r: &mut Report,
) -> Result<(), Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let mut worst = 0.0f64;
    for &n in &plan.n_list {
        let ev = evaluator(geom, n, f.degree() as usize, r)?;
        let t = toeplitz_matrix(ev.basis(), f)?;
        let op = KernelIntegrator::new(&ev, f)?;
        for i in 0..DUAL_PATH_POINTS {
            let y = SpherePoint::from_height(
                rng.gen_range(-1.0..=1.0),
                rng.gen_range(0.0..std::f64::consts::TAU),
            );
            let moment = moment_map_value(ev.basis(), &t, &y)?;
            let kernel = op.p0_n(&t, &y)?;
            let diff = (moment - kernel).abs();
            worst = worst.max(diff);
            r.rows.push(vec![
                n.to_string(),
                i.to_string(),
                num(y.y1),
                num(y.y2),
                num(y.y3),
                num(moment),
                num(kernel),
                num(diff),
            ]);
        }
    }
    r.checks
        .push(Check::at_most("dual_path_max_diff", worst, 1e-10));
    Ok(())
}

/// Runs one validated plan and writes its CSV and summary.
pub fn execute(plan: &Plan) -> Result<RunOutcome, CliError> {
    let geom = make_geometry(plan.k, plan.psi.clone())?;
    let mut report = Report::new();
    let f = plan.f.as_ref();
    let need_f = || f.expect("validated manifests carry f where needed");
    match plan.experiment {
        Experiment::Density => run_density(plan, &geom, &mut report)?,
        Experiment::GramCheck => run_gram_check(plan, &geom, &mut report)?,
        Experiment::TraceCheck => run_trace_check(plan, &geom, need_f(), &mut report)?,
        Experiment::Approx => run_approx(plan, &geom, need_f(), &mut report)?,
        Experiment::Convergence => run_convergence(plan, &geom, need_f(), &mut report)?,
        Experiment::Spectrum => run_spectrum(plan, &geom, &mut report)?,
        Experiment::DualPath => run_dual_path(plan, &geom, need_f(), &mut report)?,
    }

    let io =
        |e: std::io::Error, p: &Path| CliError::Io(format!("cannot write {}: {e}", p.display()));
    fs::create_dir_all(&plan.out_dir).map_err(|e| io(e, &plan.out_dir))?;
    let csv_path = plan.out_dir.join(format!("{}.csv", plan.experiment));
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(&csv_path)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", csv_path.display())))?;
    let csv_err = |e: csv::Error| CliError::Io(format!("cannot write {}: {e}", csv_path.display()));
    writer
        .write_record(plan.experiment.csv_header())
        .map_err(csv_err)?;
    for row in &report.rows {
        writer.write_record(row).map_err(csv_err)?;
    }
    writer.flush().map_err(|e| io(e, &csv_path))?;

    let (n_lat, n_lon) = plan.grid.shape();
    let summary = Summary {
        experiment: plan.experiment,
        geometry: GeometrySpec {
            k: plan.k,
            psi: plan.psi.terms().to_vec(),
        },
        f: f.map(|f| f.to_string()),
        n_list: plan.n_list.clone(),
        grid: [n_lat, n_lon],
        seed: plan.seed,
        pass: report.checks.iter().all(|c| c.pass),
        rules: report.rules,
        fit: report.fit,
        checks: report.checks,
    };
    let summary_path = plan
        .out_dir
        .join(format!("{}.summary.json", plan.experiment));
    let text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    fs::write(&summary_path, text + "\n").map_err(|e| io(e, &summary_path))?;
    Ok(RunOutcome {
        csv: csv_path,
        summary_path,
        summary,
    })
}

/// Validates and executes.
pub fn run(
    experiment: Experiment,
    manifest: &Manifest,
    overrides: &Overrides,
) -> Result<RunOutcome, CliError> {
    execute(&validate(experiment, manifest, overrides)?)
}

#[derive(Debug, Parser)]
#[command(
    name = "approxctl",
    about = "Berezin-Toeplitz approximation experiments on the Riemann sphere"
)]
struct Args {
    /// Experiment to run.
    experiment: Experiment,
    /// Path to the JSON manifest.
    #[arg(long)]
    manifest: PathBuf,
    /// Output directory (overrides the manifest).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Probe grid as <lat>x<lon>, e.g. 64x128.
    #[arg(long)]
    grid: Option<String>,
    /// Seed for random probe points.
    #[arg(long)]
    seed: Option<u64>,
}

/// Entry point of the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let overrides = Overrides {
        out: args.out,
        grid: args.grid,
        seed: args.seed,
    };
    let result = Manifest::load(&args.manifest).and_then(|m| run(args.experiment, &m, &overrides));
    match result {
        Ok(outcome) => {
            println!("wrote {}", outcome.csv.display());
            println!("wrote {}", outcome.summary_path.display());
            for c in &outcome.summary.checks {
                println!(
                    "{} {} = {:.3e}",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.name,
                    c.value
                );
            }
            0
        }
        Err(e) => {
            for line in e.diagnostics() {
                eprintln!("approxctl: {line}");
            }
            e.exit_code()
        }
    }
}
