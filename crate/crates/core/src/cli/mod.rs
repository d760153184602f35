//! Suite configuration, orchestration and reporting behind
//! `twistorlab verify <suite>`.
//!
//! A [`SuiteConfig`] comes from flags layered over an optional JSON file,
//! expands into one [`SuiteRun`] per (suite, metric) pair, and each run
//! yields a [`VerificationReport`] plus named side checks.

pub mod sampling;
pub mod suites;

use std::fmt;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::riemann::{MetricField, MetricKind};
use crate::twistor::{calibrate_sign, FdConfig};

/// The verification suites, one per family of identities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, ValueEnum)]
pub enum Suite {
    Algebra,
    Brackets,
    Domega,
    Dprime,
    Kaehler,
    HessianAsd,
    HessianHk,
    Nijenhuis,
    CyclesVol,
    CyclesLevi,
}

impl Suite {
    pub const ALL: [Suite; 10] = [
        Suite::Algebra,
        Suite::Brackets,
        Suite::Domega,
        Suite::Dprime,
        Suite::Kaehler,
        Suite::HessianAsd,
        Suite::HessianHk,
        Suite::Nijenhuis,
        Suite::CyclesVol,
        Suite::CyclesLevi,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Algebra => "algebra",
            Suite::Brackets => "brackets",
            Suite::Domega => "domega",
            Suite::Dprime => "dprime",
            Suite::Kaehler => "kaehler",
            Suite::HessianAsd => "hessian-asd",
            Suite::HessianHk => "hessian-hk",
            Suite::Nijenhuis => "nijenhuis",
            Suite::CyclesVol => "cycles-vol",
            Suite::CyclesLevi => "cycles-levi",
        }
    }

    pub fn default_samples(self) -> usize {
        match self {
            Suite::Algebra => 1000,
            Suite::CyclesVol => 50,
            Suite::CyclesLevi => 30,
            _ => 20,
        }
    }

    /// Absolute, except for the cycle suites where it is relative.
    pub fn default_tolerance(self) -> f64 {
        match self {
            Suite::Algebra => 1e-12,
            Suite::HessianAsd | Suite::HessianHk => 2e-4,
            Suite::CyclesVol => 1e-4,
            Suite::CyclesLevi => 1e-3,
            _ => 1e-5,
        }
    }

    pub fn default_metrics(self) -> Vec<MetricField> {
        let sqrt2 = std::f64::consts::SQRT_2;
        let s4 =
            |r: f64| MetricField::new(MetricKind::S4 { radius: r }).expect("registered radius");
        let bump =
            MetricField::new(MetricKind::ConformalBump { eps: 0.1 }).expect("registered amplitude");
        match self {
            Suite::Algebra | Suite::HessianHk | Suite::CyclesVol | Suite::CyclesLevi => {
                vec![MetricField::flat()]
            }
            Suite::Brackets => vec![MetricField::flat(), s4(sqrt2), bump],
            Suite::Domega | Suite::Dprime => vec![MetricField::flat(), s4(sqrt2), s4(1.0), bump],
            Suite::Kaehler => vec![s4(sqrt2)],
            Suite::HessianAsd | Suite::Nijenhuis => vec![MetricField::flat(), s4(sqrt2)],
        }
    }

    /// Rejects metrics the suite's formulas do not cover.
    fn accepts(self, metric: &MetricField) -> Result<()> {
        let ok = match self {
            Suite::Algebra | Suite::HessianHk | Suite::CyclesVol | Suite::CyclesLevi => {
                metric.kind() == MetricKind::Flat
            }
            Suite::HessianAsd => metric.has_constant_scalar_curvature(),
            _ => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "suite `{}` does not support metric `{metric}`",
                self.name()
            )))
        }
    }

    /// Label of the metric column for suites that do not use one.
    fn metric_label(self, metric: &MetricField) -> String {
        match self {
            Suite::Algebra => "none".into(),
            _ => metric.to_string(),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown suite `{s}`")))
    }
}

/// Which suites a configuration selects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    One(Suite),
    All,
}

impl FromStr for Selection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "all" {
            Ok(Selection::All)
        } else {
            s.parse().map(Selection::One)
        }
    }
}

/// Output format for [`emit_report`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    #[default]
    Text,
}

/// A validated configuration. Unset options take per-suite defaults when
/// the configuration is expanded into runs.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub selection: Selection,
    pub metric: Option<MetricField>,
    pub samples: Option<usize>,
    pub seed: u64,
    /// Twistor-chart step for forms and brackets (the nested step is five
    /// times larger), or the Levi-form step `ε` for `cycles-levi`.
    pub fd_step: Option<f64>,
    pub tolerance: Option<f64>,
    pub quadrature: (usize, usize),
    pub json: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub format: Format,
    /// Worker count; `TWISTORLAB_THREADS` applies when unset.
    pub threads: Option<usize>,
}

impl SuiteConfig {
    pub fn new(selection: Selection) -> Self {
        SuiteConfig {
            selection,
            metric: None,
            samples: None,
            seed: 42,
            fd_step: None,
            tolerance: None,
            quadrature: (64, 128),
            json: None,
            csv: None,
            format: Format::Text,
            threads: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.samples == Some(0) {
            return Err(Error::Config("samples must be at least 1".into()));
        }
        if let Some(t) = self.tolerance {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::Config(format!(
                    "tolerance must be positive, got {t}"
                )));
            }
        }
        if let Some(h) = self.fd_step {
            if !(h.is_finite() && h > 0.0) {
                return Err(Error::Config(format!("fd step must be positive, got {h}")));
            }
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        crate::cycles::Quadrature::new(self.quadrature.0, self.quadrature.1)?;
        if self.selection == Selection::All && self.metric.is_some() {
            return Err(Error::Config(
                "`--metric` selects a single suite's metric; it cannot be used with `all`".into(),
            ));
        }
        if let (Selection::One(s), Some(m)) = (self.selection, &self.metric) {
            s.accepts(m)?;
        }
        Ok(())
    }

    /// One run per selected suite and metric.
    pub fn runs(&self) -> Result<Vec<SuiteRun>> {
        self.validate()?;
        let suites = match self.selection {
            Selection::One(s) => vec![s],
            Selection::All => Suite::ALL.to_vec(),
        };
        let fd = match self.fd_step {
            Some(h) => FdConfig {
                h_form: h,
                h_nested: 5.0 * h,
                h_bracket: h,
            },
            None => FdConfig::default(),
        };
        let mut out = Vec::new();
        for suite in suites {
            let metrics = match &self.metric {
                Some(m) => vec![m.clone()],
                None => suite.default_metrics(),
            };
            for metric in metrics {
                out.push(SuiteRun {
                    suite,
                    metric,
                    samples: self.samples.unwrap_or(suite.default_samples()),
                    seed: self.seed,
                    fd,
                    fd_step: self.fd_step,
                    tolerance: self.tolerance.unwrap_or(suite.default_tolerance()),
                    quadrature: self.quadrature,
                    threads: self.threads,
                });
            }
        }
        Ok(out)
    }
}

/// A single suite on a single metric, with every default resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteRun {
    pub suite: Suite,
    pub metric: MetricField,
    pub samples: usize,
    pub seed: u64,
    pub fd: FdConfig,
    pub fd_step: Option<f64>,
    pub tolerance: f64,
    pub quadrature: (usize, usize),
    pub threads: Option<usize>,
}

impl SuiteRun {
    /// A run with the suite's defaults on the given metric.
    pub fn new(suite: Suite, metric: MetricField) -> Self {
        SuiteRun {
            suite,
            metric,
            samples: suite.default_samples(),
            seed: 42,
            fd: FdConfig::default(),
            fd_step: None,
            tolerance: suite.default_tolerance(),
            quadrature: (64, 128),
            threads: None,
        }
    }
}

/// Aggregate result of one run. Field order is the JSON key order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub suite: String,
    pub metric: String,
    pub n_samples: usize,
    pub max_abs_err: f64,
    pub max_rel_err: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub seed: u64,
    pub calibrated_sign: Option<f64>,
    pub fitted_v0: Option<f64>,
    pub fitted_kappa: Option<f64>,
    pub wall_time_ms: u64,
}

/// A named side condition of a suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    /// `true` when `value` must not exceed `bound`, `false` when it must
    /// reach it.
    pub upper: bool,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: &str, value: f64, bound: f64) -> Self {
        Check {
            name: name.into(),
            value,
            bound,
            upper: true,
            pass: value <= bound,
        }
    }

    pub fn at_least(name: &str, value: f64, bound: f64) -> Self {
        Check {
            name: name.into(),
            value,
            bound,
            upper: false,
            pass: value >= bound,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = if self.upper { "<=" } else { ">=" };
        let verdict = if self.pass { "ok" } else { "FAILED" };
        write!(
            f,
            "{}: {:.3e} {op} {:.3e} {verdict}",
            self.name, self.value, self.bound
        )
    }
}

/// A report with the side checks and per-sample failures behind it.
///
/// The report passes when the main residual is within tolerance (relative
/// for the cycle suites), no sample failed, and every check holds.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOutcome {
    pub report: VerificationReport,
    pub checks: Vec<Check>,
    pub diagnostics: Vec<String>,
}

impl SuiteOutcome {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let n = match threads {
        Some(n) => Some(n),
        None => match std::env::var("TWISTORLAB_THREADS") {
            Ok(v) => Some(
                v.trim()
                    .parse::<usize>()
                    .ok()
                    .filter(|n| *n > 0)
                    .ok_or_else(|| {
                        Error::Config(format!(
                            "TWISTORLAB_THREADS must be a positive integer, got `{v}`"
                        ))
                    })?,
            ),
            Err(_) => None,
        },
    };
    match n {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("cannot start {n} workers: {e}")))?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

/// Runs one suite. Numeric failures inside the suite produce a failing
/// report with diagnostics rather than an error; only configuration
/// problems are returned as `Err`.
pub fn run_suite(run: &SuiteRun) -> Result<SuiteOutcome> {
    run.suite.accepts(&run.metric)?;
    let start = Instant::now();
    let (sigma, body) = with_threads(run.threads, || {
        let sigma = calibrate_sign(run.fd);
        let sig = sigma.as_ref().ok().map(|s| s.0);
        (sigma, suites::run(run, sig))
    })?;
    let mut diagnostics = Vec::new();
    let calibrated_sign = match sigma {
        Ok((s, _)) => Some(s),
        Err(e) => {
            diagnostics.push(format!("sign calibration: {e}"));
            None
        }
    };
    let body = match body {
        Ok(b) => b,
        Err(e @ Error::Config(_)) => return Err(e),
        Err(e) => {
            diagnostics.push(e.to_string());
            suites::SuiteBody {
                residuals: suites::Residuals {
                    non_finite: true,
                    ..Default::default()
                },
                ..Default::default()
            }
        }
    };
    diagnostics.extend(body.diagnostics.iter().cloned());
    let r = &body.residuals;
    let judged = if body.relative { r.max_rel } else { r.max_abs };
    let pass = !r.non_finite && judged <= run.tolerance && body.checks.iter().all(|c| c.pass);
    let report = VerificationReport {
        suite: run.suite.name().into(),
        metric: run.suite.metric_label(&run.metric),
        n_samples: run.samples,
        max_abs_err: r.max_abs,
        max_rel_err: r.max_rel,
        tolerance: run.tolerance,
        pass,
        seed: run.seed,
        calibrated_sign,
        fitted_v0: body.fitted.map(|f| f.0),
        fitted_kappa: body.fitted.map(|f| f.1),
        wall_time_ms: start.elapsed().as_millis() as u64,
    };
    Ok(SuiteOutcome {
        report,
        checks: body.checks,
        diagnostics,
    })
}

/// Runs every run of a configuration in order.
pub fn run_config(cfg: &SuiteConfig) -> Result<Vec<SuiteOutcome>> {
    cfg.runs()?.iter().map(run_suite).collect()
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |x| format!("{x:.10}"))
}

fn text_line(r: &VerificationReport) -> String {
    format!(
        "{} {}[{}] n={} max_abs={:.3e} max_rel={:.3e} tol={:.1e} seed={} sigma={} V0={} kappa={} ({} ms)",
        if r.pass { "PASS" } else { "FAIL" },
        r.suite,
        r.metric,
        r.n_samples,
        r.max_abs_err,
        r.max_rel_err,
        r.tolerance,
        r.seed,
        r.calibrated_sign.map_or_else(|| "-".into(), |s| format!("{s:+}")),
        opt(r.fitted_v0),
        opt(r.fitted_kappa),
        r.wall_time_ms
    )
}

/// Serializes reports: a JSON array, CSV with a header and one row per
/// report, or one text line per report.
pub fn emit_reports(reports: &[VerificationReport], format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Json => {
            let mut v = serde_json::to_vec_pretty(reports)?;
            v.push(b'\n');
            Ok(v)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in reports {
                w.serialize(r)?;
            }
            w.into_inner().map_err(|e| Error::Io(e.into_error()))
        }
        Format::Text => Ok(reports
            .iter()
            .map(|r| text_line(r) + "\n")
            .collect::<String>()
            .into_bytes()),
    }
}

/// Serializes one report; JSON is a single object.
pub fn emit_report(report: &VerificationReport, format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Json => Ok(serde_json::to_vec_pretty(report)?),
        _ => emit_reports(std::slice::from_ref(report), format),
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "twistorlab",
    version,
    about = "Numerical verification of twistor-space identities"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a verification suite, or `all` of them.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// algebra, brackets, domega, dprime, kaehler, hessian-asd, hessian-hk,
    /// nijenhuis, cycles-vol, cycles-levi, or all.
    suite: String,
    /// Metric spec: flat, s4:<r>, conformal_bump:<eps>, perturbed:<eps>.
    #[arg(long)]
    metric: Option<String>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "fd-step")]
    fd_step: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    /// Sphere grid as `NT,NP`.
    #[arg(long)]
    quadrature: Option<String>,
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Format of the standard-output summary.
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    threads: Option<usize>,
    /// JSON file with the same keys as the flags; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum QuadratureSpec {
    Text(String),
    Pair([usize; 2]),
}

/// The config file: the flag names as keys, all optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct FileConfig {
    suite: Option<String>,
    metric: Option<String>,
    samples: Option<usize>,
    seed: Option<u64>,
    #[serde(alias = "fd_step")]
    fd_step: Option<f64>,
    #[serde(alias = "tolerance")]
    tol: Option<f64>,
    quadrature: Option<QuadratureSpec>,
    json: Option<PathBuf>,
    csv: Option<PathBuf>,
    format: Option<Format>,
    threads: Option<usize>,
}

fn parse_quadrature(s: &str) -> Result<(usize, usize)> {
    let parse = |t: &str| t.trim().parse::<usize>().ok();
    match s.split_once(',') {
        Some((a, b)) => match (parse(a), parse(b)) {
            (Some(a), Some(b)) => Ok((a, b)),
            _ => Err(Error::Config(format!(
                "quadrature must be `NT,NP`, got `{s}`"
            ))),
        },
        None => Err(Error::Config(format!(
            "quadrature must be `NT,NP`, got `{s}`"
        ))),
    }
}

fn read_file_config(path: &Path) -> Result<FileConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read config file {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("invalid config file {}: {e}", path.display())))
}

/// Builds a configuration from command-line arguments (without the program
/// name, e.g. `["verify", "brackets", "--samples", "5"]`) and an optional
/// JSON file. Flags override file values; `--config` in `args` names a
/// file when `file` is `None`.
pub fn parse_config<I, S>(args: I, file: Option<&Path>) -> Result<SuiteConfig>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let argv = std::iter::once(std::ffi::OsString::from("twistorlab"))
        .chain(args.into_iter().map(Into::into));
    let Command::Verify(a) = Cli::try_parse_from(argv)?.command;
    let file_path = file.map(Path::to_path_buf).or(a.config.clone());
    let f = match &file_path {
        Some(p) => read_file_config(p)?,
        None => FileConfig::default(),
    };
    if let Some(s) = &f.suite {
        if s != &a.suite {
            return Err(Error::Config(format!(
                "config file selects suite `{s}` but the command line selects `{}`",
                a.suite
            )));
        }
    }
    let mut cfg = SuiteConfig::new(a.suite.parse()?);
    cfg.metric = match a.metric.or(f.metric) {
        Some(m) => Some(m.parse()?),
        None => None,
    };
    cfg.samples = a.samples.or(f.samples);
    cfg.seed = a.seed.or(f.seed).unwrap_or(cfg.seed);
    cfg.fd_step = a.fd_step.or(f.fd_step);
    cfg.tolerance = a.tol.or(f.tol);
    cfg.quadrature = match (a.quadrature, f.quadrature) {
        (Some(s), _) | (None, Some(QuadratureSpec::Text(s))) => parse_quadrature(&s)?,
        (None, Some(QuadratureSpec::Pair([nt, np]))) => (nt, np),
        (None, None) => cfg.quadrature,
    };
    cfg.json = a.json.or(f.json);
    cfg.csv = a.csv.or(f.csv);
    cfg.format = a.format.or(f.format).unwrap_or_default();
    cfg.threads = a.threads.or(f.threads);
    cfg.validate()?;
    Ok(cfg)
}

/// Exit status of the command-line tool.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    AllPassed = 0,
    SomeFailed = 1,
    ConfigError = 2,
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes)
        .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))
}

/// The whole command-line tool: parse, run, print, write files.
pub fn main_with_args<I, S>(args: I) -> ExitStatus
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cfg = match parse_config(args, None) {
        Ok(c) => c,
        Err(Error::Cli(e)) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitStatus::ConfigError
            } else {
                ExitStatus::AllPassed
            };
        }
        Err(e) => {
            eprintln!("twistorlab: {e}");
            return ExitStatus::ConfigError;
        }
    };
    let runs = match cfg.runs() {
        Ok(r) => r,
        Err(e) => {
            eprintln!("twistorlab: {e}");
            return ExitStatus::ConfigError;
        }
    };
    let mut outcomes = Vec::new();
    let stdout = std::io::stdout();
    for run in &runs {
        match run_suite(run) {
            Ok(o) => {
                if cfg.format == Format::Text {
                    let mut out = stdout.lock();
                    let _ =
                        out.write_all(&emit_report(&o.report, Format::Text).unwrap_or_default());
                    for c in &o.checks {
                        let _ = writeln!(out, "    {c}");
                    }
                    for d in &o.diagnostics {
                        let _ = writeln!(out, "    ! {d}");
                    }
                }
                outcomes.push(o);
            }
            Err(e) => {
                eprintln!("twistorlab: {e}");
                return ExitStatus::ConfigError;
            }
        }
    }
    let reports: Vec<VerificationReport> = outcomes.iter().map(|o| o.report.clone()).collect();
    if cfg.format != Format::Text {
        match emit_reports(&reports, cfg.format) {
            Ok(b) => {
                let _ = stdout.lock().write_all(&b);
            }
            Err(e) => {
                eprintln!("twistorlab: {e}");
                return ExitStatus::ConfigError;
            }
        }
    }
    for (path, format) in [(&cfg.json, Format::Json), (&cfg.csv, Format::Csv)] {
        if let Some(p) = path {
            let written = emit_reports(&reports, format).and_then(|b| write_file(p, &b));
            if let Err(e) = written {
                eprintln!("twistorlab: {e}");
                return ExitStatus::ConfigError;
            }
        }
    }
    if reports.iter().all(|r| r.pass) {
        ExitStatus::AllPassed
    } else {
        ExitStatus::SomeFailed
    }
}
