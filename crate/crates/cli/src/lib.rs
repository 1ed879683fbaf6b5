//! Command layer: assembles the catalog, runs verification suites and emits
//! JSON/CSV reports. Every command is callable in-process (the suite runner
//! and the test suites reuse the same entry points as the binary).

use clap::{Args, Parser, Subcommand};
use reglab_core::error::Error as CoreError;
use reglab_core::field::{omega_radius, FieldSpec};
use reglab_core::lab::{
    decay_scan, morrey_scan, sobolev_membership, DecayScanConfig, MembershipVerdict, ScanQuantity,
};
use reglab_core::rearrange::{
    lorentz_norm, lorentz_norm_radial_sampled, NormOutcome, QIndex, RadialDomain,
    RearrangementCurve,
};
use reglab_core::report::divergence_csv;
use reglab_core::residual::{
    log_spaced_radii, pointwise_residual, weak_residual, SystemKind, SystemSpec, TestBump,
};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::time::Instant;

pub mod suite;

/// Numerical regularity laboratory: singular elliptic fields, Lorentz
/// norms, residual verification and decay diagnostics.
#[derive(Debug, Parser)]
#[command(name = "reglab", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output directory for report files.
    #[arg(long, global = true, default_value = "reports")]
    pub out: PathBuf,
    /// Global tolerance override.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Seed for sampled pipelines (fixed seed makes runs bit-identical).
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Run independent suite jobs concurrently.
    #[arg(long, global = true)]
    pub parallel: bool,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Verify the pointwise and weak-form residuals of a catalog system.
    Verify(VerifyArgs),
    /// Compute a Lorentz norm of a radial function.
    Lorentz(LorentzArgs),
    /// Scan the Morrey subnorm over shrinking balls.
    Morrey(MorreyArgs),
    /// Scan a ball-decay quantity over a geometric radius grid.
    Decay(DecayArgs),
    /// Tabulate Sobolev membership verdicts over a p-grid.
    Membership(MembershipArgs),
    /// Run a batch of jobs from a JSON config.
    Suite(SuiteArgs),
}

fn default_radii_count() -> usize {
    100
}
fn default_radii_min() -> f64 {
    1e-6
}
fn default_center_norm() -> f64 {
    0.0
}
fn default_r0() -> f64 {
    0.1
}
fn default_theta() -> f64 {
    0.5
}
fn default_count() -> usize {
    6
}
fn default_resolution() -> usize {
    4096
}
fn default_cells() -> usize {
    1 << 14
}
fn default_domain() -> String {
    "ball:1".into()
}
fn default_q() -> String {
    "inf".into()
}

#[derive(Debug, Clone, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyArgs {
    /// Catalog family: loglog4, sinlog2nd or sinlog4th.
    #[arg(long)]
    pub family: String,
    /// Ambient dimension (4 for loglog4; >= 3 / >= 5 for the others).
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = default_radii_count())]
    #[serde(default = "default_radii_count")]
    pub radii_count: usize,
    #[arg(long, default_value_t = default_radii_min())]
    #[serde(default = "default_radii_min")]
    pub radii_min: f64,
    /// Upper scan radius; defaults to the domain radius e^-2.
    #[arg(long)]
    #[serde(default)]
    pub radii_max: Option<f64>,
}

#[derive(Debug, Clone, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LorentzArgs {
    /// Function spec: powerlaw:s=S, const:c=C, or grad:FAMILY.
    #[arg(long)]
    pub function: String,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub p: f64,
    /// Secondary index: a number or "inf".
    #[arg(long, default_value = "inf")]
    #[serde(default = "default_q")]
    pub q: String,
    /// Domain: ball:R or annulus:A..B.
    #[arg(long, default_value = "ball:1")]
    #[serde(default = "default_domain")]
    pub domain: String,
    #[arg(long, default_value_t = default_cells())]
    #[serde(default = "default_cells")]
    pub cells: usize,
}

#[derive(Debug, Clone, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MorreyArgs {
    #[arg(long)]
    pub family: String,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub p: f64,
    #[arg(long, default_value_t = default_center_norm())]
    #[serde(default = "default_center_norm")]
    pub center_norm: f64,
    #[arg(long, default_value_t = default_r0())]
    #[serde(default = "default_r0")]
    pub r0: f64,
    #[arg(long, default_value_t = default_theta())]
    #[serde(default = "default_theta")]
    pub theta: f64,
    #[arg(long, default_value_t = default_count())]
    #[serde(default = "default_count")]
    pub count: usize,
}

#[derive(Debug, Clone, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayArgs {
    #[arg(long)]
    pub family: String,
    #[arg(long)]
    pub n: usize,
    /// Quantity: lorentz:p=P,q=Q,grad-order=K, morrey:p=P, or oscillation.
    #[arg(long)]
    pub quantity: String,
    #[arg(long, default_value_t = default_r0())]
    #[serde(default = "default_r0")]
    pub r0: f64,
    #[arg(long, default_value_t = default_theta())]
    #[serde(default = "default_theta")]
    pub theta: f64,
    #[arg(long, default_value_t = default_count())]
    #[serde(default = "default_count")]
    pub count: usize,
    #[arg(long, default_value_t = default_resolution())]
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    /// Smallness threshold column (flags rows at or below it).
    #[arg(long)]
    #[serde(default)]
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MembershipArgs {
    #[arg(long)]
    pub family: String,
    #[arg(long)]
    pub n: usize,
    /// Derivative order of the membership question (1 or 2).
    #[arg(long)]
    pub k: usize,
    /// Comma-separated integrability indices.
    #[arg(long)]
    pub p_grid: String,
}

#[derive(Debug, Clone, Args, Deserialize)]
pub struct SuiteArgs {
    /// JSON config path.
    #[arg(long)]
    pub config: PathBuf,
}

/// What a finished command reports back to the process layer.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    /// all checks passed (exit 0)
    Pass,
    /// the command ran but a verification failed (exit 1)
    VerificationFailed(String),
}

/// Command errors map to exit status 2 (configuration) via `CliError`.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(std::io::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "configuration error: {msg}"),
            CliError::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

pub type CliResult = Result<Outcome, CliError>;

/// Builds a catalog field from a family name and dimension.
pub fn catalog_field(family: &str, n: usize) -> Result<FieldSpec, CliError> {
    match family {
        "loglog4" => {
            if n != 4 {
                return Err(CliError::Config(format!(
                    "family loglog4 is fixed to n = 4 (got n = {n})"
                )));
            }
            Ok(FieldSpec::log_log_4d())
        }
        "sinlog2nd" => Ok(FieldSpec::sin_log_second_order(n)?),
        "sinlog4th" => Ok(FieldSpec::sin_log_fourth_order(n)?),
        other => Err(CliError::Config(format!(
            "unknown family {other:?} (expected loglog4, sinlog2nd or sinlog4th)"
        ))),
    }
}

fn system_for(family: &str) -> Result<SystemSpec, CliError> {
    let kind = match family {
        "loglog4" => SystemKind::FourthOrderLogLog,
        "sinlog2nd" => SystemKind::SecondOrderSphere,
        "sinlog4th" => SystemKind::FourthOrderSinLog,
        other => return Err(CliError::Config(format!("unknown family {other:?}"))),
    };
    Ok(SystemSpec::new(kind))
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, contents)?;
    Ok(path)
}

/// Standard bump triple used by `verify`: two origin-centered supports and
/// one bump away from the singularity, all inside the domain radius e^-2.
pub fn verification_bumps() -> Vec<TestBump> {
    vec![
        TestBump::origin((-3.0f64).exp()),
        TestBump::origin(0.8 * omega_radius()),
        TestBump::off_center(0.07, 0.05),
    ]
}

#[derive(Debug, Serialize)]
struct WeakReportFile {
    family: String,
    n: usize,
    order: usize,
    bumps: Vec<WeakRow>,
    max_rel: f64,
}

#[derive(Debug, Serialize)]
struct WeakRow {
    center_norm: f64,
    radius: f64,
    residual_rel: f64,
    quadrature_bound: f64,
}

/// verify: pointwise residual over a log radius grid plus the weak-form
/// identity on the standard bumps; exit 0 iff max_rel is at or below tol.
pub fn cmd_verify(args: &VerifyArgs, out: &Path, tol: Option<f64>) -> CliResult {
    let field = catalog_field(&args.family, args.n)?;
    let system = system_for(&args.family)?;
    let tol = tol.unwrap_or(reglab_core::tol::POINTWISE_RESIDUAL_REL);
    let hi = args.radii_max.unwrap_or_else(omega_radius);
    if !(args.radii_min > 0.0 && hi > args.radii_min && args.radii_count >= 2) {
        return Err(CliError::Config("invalid radius grid".into()));
    }
    let radii = log_spaced_radii(args.radii_min, hi, args.radii_count);
    let report = pointwise_residual(&system, &field, &radii)?;

    let mut weak_rows = Vec::new();
    let mut weak_max = 0.0f64;
    for bump in verification_bumps() {
        let res = weak_residual(&field, &bump, system.order(), reglab_core::tol::WEAK_RESIDUAL_REL)?;
        weak_max = weak_max.max(res.residual_rel);
        weak_rows.push(WeakRow {
            center_norm: bump.center_norm,
            radius: bump.radius(),
            residual_rel: res.residual_rel,
            quadrature_bound: res.bound,
        });
    }

    let stem = format!("verify_{}_n{}", args.family, args.n);
    let file = report.to_file();
    write_file(out, &format!("{stem}.json"), &file.to_json())?;
    write_file(out, &format!("{stem}.csv"), &file.to_csv())?;
    let weak_file = WeakReportFile {
        family: args.family.clone(),
        n: args.n,
        order: system.order(),
        bumps: weak_rows,
        max_rel: weak_max,
    };
    write_file(
        out,
        &format!("{stem}_weak.json"),
        &serde_json::to_string_pretty(&weak_file).expect("weak report serializes"),
    )?;

    println!(
        "verify {} n={}: pointwise max_rel = {:.3e}, weak max_rel = {:.3e}",
        args.family, args.n, report.max_rel, weak_max
    );
    if report.max_rel <= tol {
        Ok(Outcome::Pass)
    } else {
        Ok(Outcome::VerificationFailed(format!(
            "pointwise residual {:.3e} above tolerance {tol:.3e}",
            report.max_rel
        )))
    }
}

#[derive(Debug, Serialize)]
struct LorentzReportFile {
    function: String,
    n: usize,
    p: f64,
    q: String,
    domain: String,
    verdict: String,
    value: Option<f64>,
    error_bound: Option<f64>,
    method: String,
}

/// lorentz: empirical norm of a radial scalar through the sampling pipeline,
/// or the closed form for exact power laws on balls.
pub fn cmd_lorentz(args: &LorentzArgs, out: &Path) -> CliResult {
    let q = QIndex::parse(&args.q).map_err(|e| CliError::Config(e.to_string()))?;
    let domain = parse_domain(&args.domain)?;
    let n = args.n;

    let norm = match parse_function(&args.function)? {
        FunctionSpec::PowerLaw { s } => {
            // empirical pipeline; the exact-radial curve is the cross-check
            let scalar = move |r: f64| r.powf(-s);
            let empirical = lorentz_norm_radial_sampled(
                &scalar,
                domain,
                n,
                args.cells,
                1e-12,
                args.p,
                q,
            )?;
            if let RadialDomain::Ball { radius } = domain {
                let exact_curve = RearrangementCurve::power_law(1.0, s, n, Some(radius))?;
                let exact = lorentz_norm(&exact_curve, args.p, q)?;
                if let (NormOutcome::Finite { value, .. }, Ok(ev)) =
                    (&exact.outcome, empirical.value())
                {
                    println!("exact-radial cross-check: {value} (empirical {ev})");
                }
            }
            empirical
        }
        FunctionSpec::Constant { c } => {
            let scalar = move |_r: f64| c;
            lorentz_norm_radial_sampled(&scalar, domain, n, args.cells, 1e-12, args.p, q)?
        }
        FunctionSpec::GradOf { family } => {
            let field = catalog_field(&family, n)?;
            let deep = field.with_inner_cutoff(1e-30);
            let scalar = move |r: f64| deep.radial_derived(r, 1).expect("in domain").grad_norm;
            lorentz_norm_radial_sampled(&scalar, domain, n, args.cells, 1e-12, args.p, q)?
        }
    };

    let (verdict, value, error_bound) = match &norm.outcome {
        NormOutcome::Finite { value, error_bound } => ("finite", Some(*value), Some(*error_bound)),
        NormOutcome::Divergent(ev) => {
            write_file(out, "lorentz_divergence.csv", &divergence_csv(ev))?;
            ("divergent", None, None)
        }
    };
    let file = LorentzReportFile {
        function: args.function.clone(),
        n,
        p: args.p,
        q: args.q.clone(),
        domain: args.domain.clone(),
        verdict: verdict.into(),
        value,
        error_bound,
        method: match norm.method {
            reglab_core::rearrange::NormMethod::ExactRadial => "exact-radial".into(),
            reglab_core::rearrange::NormMethod::Empirical => "empirical".into(),
        },
    };
    let name = format!(
        "lorentz_{}_n{}_p{}_q{}.json",
        args.function.replace([':', '=', '.'], "_"),
        n,
        args.p,
        args.q
    );
    write_file(out, &name, &serde_json::to_string_pretty(&file).expect("serializes"))?;
    match value {
        Some(v) => println!("lorentz norm = {v} ({verdict})"),
        None => println!("lorentz norm: {verdict}"),
    }
    Ok(Outcome::Pass)
}

enum FunctionSpec {
    PowerLaw { s: f64 },
    Constant { c: f64 },
    GradOf { family: String },
}

fn parse_function(text: &str) -> Result<FunctionSpec, CliError> {
    let (kind, params) = text.split_once(':').unwrap_or((text, ""));
    match kind {
        "powerlaw" => {
            let s = parse_kv(params, "s")?;
            Ok(FunctionSpec::PowerLaw { s })
        }
        "const" => {
            let c = parse_kv(params, "c")?;
            Ok(FunctionSpec::Constant { c })
        }
        "grad" => Ok(FunctionSpec::GradOf { family: params.to_string() }),
        other => Err(CliError::Config(format!(
            "unknown function {other:?} (expected powerlaw:s=S, const:c=C or grad:FAMILY)"
        ))),
    }
}

fn parse_kv(params: &str, key: &str) -> Result<f64, CliError> {
    for pair in params.split(',') {
        if let Some((k, v)) = pair.split_once('=') {
            if k == key {
                return v
                    .parse()
                    .map_err(|_| CliError::Config(format!("cannot parse {key}={v:?}")));
            }
        }
    }
    Err(CliError::Config(format!("missing parameter {key} in {params:?}")))
}

fn parse_domain(text: &str) -> Result<RadialDomain, CliError> {
    let (kind, params) = text
        .split_once(':')
        .ok_or_else(|| CliError::Config(format!("bad domain {text:?}")))?;
    match kind {
        "ball" => {
            let radius: f64 = params
                .parse()
                .map_err(|_| CliError::Config(format!("bad ball radius {params:?}")))?;
            Ok(RadialDomain::Ball { radius })
        }
        "annulus" => {
            let (a, b) = params
                .split_once("..")
                .ok_or_else(|| CliError::Config("annulus needs A..B".into()))?;
            let inner: f64 =
                a.parse().map_err(|_| CliError::Config(format!("bad inner radius {a:?}")))?;
            let outer: f64 =
                b.parse().map_err(|_| CliError::Config(format!("bad outer radius {b:?}")))?;
            Ok(RadialDomain::Annulus { inner, outer })
        }
        other => Err(CliError::Config(format!("unknown domain kind {other:?}"))),
    }
}

/// morrey: subnorm scan with a log-log fit (or annulus increments at the
/// critical index where the origin integral diverges).
pub fn cmd_morrey(args: &MorreyArgs, out: &Path) -> CliResult {
    let field = catalog_field(&args.family, args.n)
        .or_else(|_| power_law_field(&args.family, args.n))?;
    if !(args.theta > 0.0 && args.theta < 1.0) {
        return Err(CliError::Config("theta must lie in (0, 1)".into()));
    }
    let radii: Vec<f64> =
        (0..args.count).map(|l| args.r0 * args.theta.powi(l as i32)).collect();
    let scan = morrey_scan(&field, args.center_norm, &radii, args.p)?;
    let stem = format!("morrey_{}_n{}_p{}", sanitize(&args.family), args.n, args.p);
    write_file(out, &format!("{stem}.json"), &scan.report.to_json())?;
    write_file(out, &format!("{stem}.csv"), &scan.report.to_csv())?;
    if scan.increments_mode {
        println!("morrey {}: divergent at the origin; annulus increments written", args.family);
    } else if let Some(fit) = scan.report.fit {
        println!("morrey {}: slope {:.4} (residual {:.3e})", args.family, fit.slope, fit.residual);
    } else {
        println!("morrey {}: no fit", args.family);
    }
    Ok(Outcome::Pass)
}

fn sanitize(text: &str) -> String {
    text.replace([':', '=', ',', '.', '-'], "_")
}

/// power-law test fields are addressable as "powerlaw:a=ALPHA"
fn power_law_field(family: &str, n: usize) -> Result<FieldSpec, CliError> {
    if let Some(params) = family.strip_prefix("powerlaw:") {
        let alpha = parse_kv(params, "a")?;
        return Ok(FieldSpec::power_law(1.0, alpha, n));
    }
    Err(CliError::Config(format!("unknown family {family:?}")))
}

/// decay: geometric ball-decay scan of a Lorentz/Morrey/oscillation
/// quantity, with the halving comparison against alpha_0.
pub fn cmd_decay(args: &DecayArgs, out: &Path) -> CliResult {
    let field = catalog_field(&args.family, args.n)
        .or_else(|_| power_law_field(&args.family, args.n))?;
    let quantity = parse_quantity(&args.quantity)?;
    let config = DecayScanConfig {
        center: vec![0.0; args.n],
        r0: args.r0,
        theta: args.theta,
        count: args.count,
        quantity,
        resolution: args.resolution,
        fit: true,
        smallness_threshold: args.threshold,
    };
    let scan = decay_scan(&field, &config)?;
    let stem = format!("decay_{}_n{}_{}", sanitize(&args.family), args.n, sanitize(&args.quantity));
    write_file(out, &format!("{stem}.json"), &scan.report.to_json())?;
    write_file(out, &format!("{stem}.csv"), &scan.report.to_csv())?;
    println!(
        "decay {}: alpha0 = {:.4}, halving observed = {}",
        args.family, scan.halving.alpha0, scan.halving.halving_observed
    );
    if let Some(fit) = scan.report.fit {
        println!("  fitted slope {:.4} (residual {:.3e})", fit.slope, fit.residual);
    }
    Ok(Outcome::Pass)
}

fn parse_quantity(text: &str) -> Result<ScanQuantity, CliError> {
    if text == "oscillation" {
        return Ok(ScanQuantity::Oscillation);
    }
    let (kind, params) = text
        .split_once(':')
        .ok_or_else(|| CliError::Config(format!("bad quantity {text:?}")))?;
    match kind {
        "lorentz" => {
            let p = parse_kv(params, "p")?;
            let q = params
                .split(',')
                .find_map(|pair| pair.strip_prefix("q="))
                .map(QIndex::parse)
                .transpose()
                .map_err(|e| CliError::Config(e.to_string()))?
                .unwrap_or(QIndex::Infinity);
            let grad_order = params
                .split(',')
                .find_map(|pair| pair.strip_prefix("grad-order="))
                .map(|v| v.parse::<usize>())
                .transpose()
                .map_err(|_| CliError::Config("bad grad-order".into()))?
                .unwrap_or(1);
            Ok(ScanQuantity::Lorentz { p, q, grad_order })
        }
        "morrey" => Ok(ScanQuantity::Morrey { p: parse_kv(params, "p")? }),
        other => Err(CliError::Config(format!("unknown quantity {other:?}"))),
    }
}

#[derive(Debug, Serialize)]
struct MembershipReportFile {
    family: String,
    n: usize,
    k: usize,
    entries: Vec<MembershipEntry>,
}

#[derive(Debug, Serialize)]
struct MembershipEntry {
    p: f64,
    verdict: String,
    integrals: Vec<MembershipIntegral>,
    divergent_increments: Option<Vec<f64>>,
}

#[derive(Debug, Serialize)]
struct MembershipIntegral {
    name: String,
    value: f64,
    error: f64,
}

/// membership: W^{k,p} verdicts over a p-grid.
pub fn cmd_membership(args: &MembershipArgs, out: &Path) -> CliResult {
    let field = catalog_field(&args.family, args.n)?;
    let grid: Result<Vec<f64>, _> =
        args.p_grid.split(',').map(|t| t.trim().parse::<f64>()).collect();
    let grid = grid.map_err(|_| CliError::Config(format!("bad p grid {:?}", args.p_grid)))?;
    if grid.is_empty() {
        return Err(CliError::Config("empty p grid".into()));
    }
    let mut entries = Vec::new();
    for &p in &grid {
        let verdict = sobolev_membership(&field, args.k, p)?;
        println!("W^{{{},{p}}}: {}", args.k, verdict.label());
        let entry = match &verdict {
            MembershipVerdict::Member { integrals } => MembershipEntry {
                p,
                verdict: "Member".into(),
                integrals: integrals
                    .iter()
                    .map(|i| MembershipIntegral { name: i.name.clone(), value: i.value, error: i.error })
                    .collect(),
                divergent_increments: None,
            },
            MembershipVerdict::NotMember { failing, evidence, converged } => MembershipEntry {
                p,
                verdict: format!("NotMember({failing})"),
                integrals: converged
                    .iter()
                    .map(|i| MembershipIntegral { name: i.name.clone(), value: i.value, error: i.error })
                    .collect(),
                divergent_increments: Some(evidence.increments.clone()),
            },
            MembershipVerdict::Inconclusive { reason } => MembershipEntry {
                p,
                verdict: format!("Inconclusive({reason})"),
                integrals: Vec::new(),
                divergent_increments: None,
            },
        };
        entries.push(entry);
    }
    let file = MembershipReportFile {
        family: args.family.clone(),
        n: args.n,
        k: args.k,
        entries,
    };
    let name = format!("membership_{}_n{}_k{}.json", args.family, args.n, args.k);
    write_file(out, &name, &serde_json::to_string_pretty(&file).expect("serializes"))?;
    Ok(Outcome::Pass)
}

/// Dispatches one command against an output directory.
pub fn run_command(command: &Command, out: &Path, tol: Option<f64>, parallel: bool) -> CliResult {
    match command {
        Command::Verify(args) => cmd_verify(args, out, tol),
        Command::Lorentz(args) => cmd_lorentz(args, out),
        Command::Morrey(args) => cmd_morrey(args, out),
        Command::Decay(args) => cmd_decay(args, out),
        Command::Membership(args) => cmd_membership(args, out),
        Command::Suite(args) => suite::cmd_suite(args, out, tol, parallel),
    }
}

pub use suite::{SuiteConfig, SuiteJob};

/// Timing helper for the suite summary.
pub(crate) fn timed<T>(f: impl FnOnce() -> T) -> (T, u128) {
    let start = Instant::now();
    let value = f();
    (value, start.elapsed().as_millis())
}
