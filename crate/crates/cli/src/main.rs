//! `qmono`: divergences, map classification and verification suites from the command line.
//!
//! Exit codes: 0 success, 1 suite failure, 2 input error, 3 precondition or domain error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qmono_core::channels::{Classification, PositivityCertificate, TraceTag};
use qmono_core::divergences::DivergenceFamily;
use qmono_core::harness::{run_suite, CheckReport, Outcome};
use qmono_core::io::{
    self, float, to_canonical_json, ChannelFile, DpiMode, MatrixFile, MatrixKind, RunConfig, SuiteName,
};
use qmono_core::{Error, ExtendedReal, ToleranceConfig};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "qmono", version, about = "Quantum divergences, positive maps and data-processing checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a divergence between two operator files.
    Compute(ComputeArgs),
    /// Classify a channel file: positivity certificate, trace behavior, Choi spectrum.
    CheckMap(CheckMapArgs),
    /// Run a verification suite and write its report.
    Suite(SuiteArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Umegaki,
    Sandwiched,
    OldRenyi,
}

#[derive(Args, Default)]
struct ToleranceArgs {
    #[arg(long)]
    tolerance_support_cutoff: Option<f64>,
    #[arg(long)]
    tolerance_psd: Option<f64>,
    #[arg(long)]
    tolerance_monotonicity_slack: Option<f64>,
    #[arg(long)]
    tolerance_hermiticity: Option<f64>,
    #[arg(long)]
    tolerance_containment: Option<f64>,
}

impl ToleranceArgs {
    fn apply(&self, mut cfg: ToleranceConfig) -> ToleranceConfig {
        let overrides = [
            (self.tolerance_support_cutoff, &mut cfg.support_cutoff),
            (self.tolerance_psd, &mut cfg.psd_tolerance),
            (self.tolerance_monotonicity_slack, &mut cfg.monotonicity_slack),
            (self.tolerance_hermiticity, &mut cfg.hermiticity_tolerance),
            (self.tolerance_containment, &mut cfg.containment_tolerance),
        ];
        for (value, slot) in overrides {
            if let Some(v) = value {
                *slot = v;
            }
        }
        cfg
    }
}

#[derive(Args)]
struct ComputeArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    #[arg(long)]
    rho: PathBuf,
    #[arg(long)]
    sigma: PathBuf,
    /// Order of the Rényi families.
    #[arg(long)]
    alpha: Option<f64>,
    #[command(flatten)]
    tolerance: ToleranceArgs,
}

#[derive(Args)]
struct CheckMapArgs {
    channel: PathBuf,
    /// Random pure states used to try to falsify positivity of non-CP maps.
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = io::DEFAULT_SEED)]
    seed: u64,
    #[command(flatten)]
    tolerance: ToleranceArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    RelativeEntropy,
    Sandwiched,
    TraceCondition,
}

#[derive(Args)]
struct SuiteArgs {
    /// counterexample, dpi, contraction, step2, auxiliary, alpha-limit or violation.
    name: String,
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Comma-separated dimensions.
    #[arg(long, value_delimiter = ',')]
    dims: Option<Vec<usize>>,
    /// Violation-search order.
    #[arg(long)]
    alpha: Option<f64>,
    /// Comma-separated Rényi orders.
    #[arg(long, value_delimiter = ',')]
    alpha_grid: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    epsilon_grid: Option<Vec<f64>>,
    /// Divergence checked by the dpi suite.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long)]
    instances: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    n_sequence: Option<Vec<usize>>,
    #[arg(long)]
    hill_climb_steps: Option<usize>,
    #[arg(long)]
    allow_inconclusive: bool,
    /// Report path (default: qmono-<suite>-report.json).
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    tolerance: ToleranceArgs,
}

enum Failure {
    Input(String),
    Precondition(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_input_error() {
            Failure::Input(e.to_string())
        } else {
            Failure::Precondition(e.to_string())
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Compute(args) => compute(args),
        Command::CheckMap(args) => check_map(args),
        Command::Suite(args) => suite(args),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Precondition(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

#[derive(Serialize)]
struct ComputeOutput {
    value: ExtendedReal,
    family: &'static str,
    #[serde(with = "float::option")]
    alpha: Option<f64>,
}

fn compute(args: ComputeArgs) -> CliResult<ExitCode> {
    let cfg = args.tolerance.apply(ToleranceConfig::default());
    cfg.validate()?;
    let rho = MatrixFile::load(&args.rho)?.to_psd(&cfg)?;
    let sigma = MatrixFile::load(&args.sigma)?.to_psd(&cfg)?;
    let family = match (args.family, args.alpha) {
        (FamilyArg::Umegaki, None) => DivergenceFamily::Umegaki,
        (FamilyArg::Umegaki, Some(_)) => return Err(Failure::Input("--alpha does not apply to umegaki".into())),
        (FamilyArg::Sandwiched, Some(alpha)) => DivergenceFamily::SandwichedRenyi { alpha },
        (FamilyArg::OldRenyi, Some(alpha)) => DivergenceFamily::OldRenyi { alpha },
        (_, None) => return Err(Failure::Input("Rényi families need --alpha".into())),
    };
    if rho.dim() != sigma.dim() {
        return Err(Failure::Input(format!("rho is {0}x{0} but sigma is {1}x{1}", rho.dim(), sigma.dim())));
    }
    let value = family.evaluate(&rho, &sigma, &cfg)?;
    let out = ComputeOutput {
        value,
        family: family.name(),
        alpha: family.alpha(),
    };
    print!("{}", to_canonical_json(&out)?);
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct MapReport {
    dim_in: usize,
    dim_out: usize,
    cp: bool,
    positive: &'static str,
    certificate: PositivityCertificate,
    trace: TraceTag,
    #[serde(with = "float")]
    choi_min_eigenvalue: f64,
    #[serde(with = "float::vec")]
    adjoint_unit_spectrum: Vec<f64>,
    #[serde(with = "float::option")]
    one_to_one_norm: Option<f64>,
    #[serde(with = "float::option")]
    sampled_min_eigenvalue: Option<f64>,
}

fn positivity_label(c: &PositivityCertificate) -> &'static str {
    match c {
        PositivityCertificate::CompletelyPositive => "completely_positive",
        PositivityCertificate::PositiveByConstruction { .. } => "by_construction",
        PositivityCertificate::Unverified => "unverified",
        PositivityCertificate::Falsified { .. } => "falsified",
    }
}

fn check_map(args: CheckMapArgs) -> CliResult<ExitCode> {
    let cfg = args.tolerance.apply(ToleranceConfig::default());
    cfg.validate()?;
    let phi = ChannelFile::load(&args.channel)?.to_superoperator(&cfg)?;
    let Classification {
        certificate,
        trace,
        choi_min_eigenvalue,
        sampled_min_eigenvalue,
    } = phi.classify(&cfg, args.samples, args.seed)?;
    let spectrum = trace.adjoint_unit_spectrum()?;
    // For positive maps the 1->1 norm is the largest eigenvalue of Phi^*(1).
    let one_to_one_norm = certificate.is_positive().then(|| spectrum.last().copied().unwrap_or(0.0));
    let out = MapReport {
        dim_in: phi.dim_in(),
        dim_out: phi.dim_out(),
        cp: certificate == PositivityCertificate::CompletelyPositive,
        positive: positivity_label(&certificate),
        trace: trace.tag,
        choi_min_eigenvalue,
        adjoint_unit_spectrum: spectrum,
        one_to_one_norm,
        sampled_min_eigenvalue,
        certificate,
    };
    print!("{}", to_canonical_json(&out)?);
    Ok(ExitCode::SUCCESS)
}

fn build_config(args: &SuiteArgs) -> CliResult<RunConfig> {
    let name: SuiteName = args.name.parse()?;
    let mut cfg = match &args.config {
        Some(path) => {
            let cfg = RunConfig::load(path)?;
            if cfg.suite != name {
                return Err(Failure::Input(format!(
                    "config file is for suite {} but {} was requested",
                    cfg.suite, name
                )));
            }
            cfg
        }
        None => RunConfig::defaults(name),
    };
    if let Some(mode) = args.mode {
        cfg = cfg.with_mode(match mode {
            ModeArg::RelativeEntropy => DpiMode::RelativeEntropy,
            ModeArg::Sandwiched => DpiMode::Sandwiched,
            ModeArg::TraceCondition => DpiMode::TraceCondition,
        });
    }
    macro_rules! set {
        ($($field:ident),*) => { $(if let Some(v) = args.$field.clone() { cfg.$field = v; })* };
    }
    set!(seed, trials, dims, alpha, alpha_grid, epsilon_grid, instances, n_sequence, hill_climb_steps);
    if args.allow_inconclusive {
        cfg.allow_inconclusive = true;
    }
    if let Some(out) = &args.out {
        cfg.output = Some(out.display().to_string());
    }
    cfg.tolerance = args.tolerance.apply(cfg.tolerance);
    cfg.validate()?;
    Ok(cfg)
}

/// `report.json` -> `report.<suffix>.json`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}.json"))
}

/// Writes the violation witness as standalone files that `compute` and `check-map` accept.
fn write_violation_files(report: &CheckReport, out: &Path, cfg: &ToleranceConfig) -> CliResult<Vec<PathBuf>> {
    let Some(w) = report.witnesses.iter().find(|w| w.kind == qmono_core::harness::CheckKind::Violation) else {
        return Ok(Vec::new());
    };
    let (Some(map), Some(rho), Some(sigma)) = (&w.map, &w.rho, &w.sigma) else {
        return Ok(Vec::new());
    };
    let phi = map.build_inferred(cfg)?;
    let channel = ChannelFile::new(phi.dim_in(), phi.dim_out(), map.clone());
    let phi_rho = MatrixFile::new(&phi.apply(&rho.to_matrix(cfg)?)?, MatrixKind::Psd);
    let phi_sigma = MatrixFile::new(&phi.apply(&sigma.to_matrix(cfg)?)?, MatrixKind::Psd);
    let mut paths = Vec::new();
    let mut save = |suffix: &str, text: String| -> CliResult<()> {
        let p = sibling(out, suffix);
        std::fs::write(&p, text).map_err(Error::from)?;
        paths.push(p);
        Ok(())
    };
    save("witness", to_canonical_json(w)?)?;
    save("witness-channel", to_canonical_json(&channel)?)?;
    save("witness-rho", to_canonical_json(rho)?)?;
    save("witness-sigma", to_canonical_json(sigma)?)?;
    save("witness-phi-rho", to_canonical_json(&phi_rho)?)?;
    save("witness-phi-sigma", to_canonical_json(&phi_sigma)?)?;
    Ok(paths)
}

fn suite(args: SuiteArgs) -> CliResult<ExitCode> {
    let cfg = build_config(&args)?;
    let out = PathBuf::from(
        cfg.output
            .clone()
            .unwrap_or_else(|| format!("qmono-{}-report.json", cfg.suite)),
    );
    let report = run_suite(&cfg)?;
    std::fs::write(&out, to_canonical_json(&report)?).map_err(Error::from)?;
    println!("{}", report.summary());
    println!("report: {}", out.display());

    let code = match report.outcome {
        Outcome::Pass => {
            if cfg.suite == SuiteName::Violation {
                for p in write_violation_files(&report, &out, &cfg.tolerance)? {
                    println!("witness: {}", p.display());
                }
            }
            ExitCode::SUCCESS
        }
        Outcome::Inconclusive if cfg.allow_inconclusive => ExitCode::SUCCESS,
        Outcome::Inconclusive => ExitCode::from(1),
        Outcome::Fail => {
            for (k, w) in report.failures.iter().enumerate() {
                let p = sibling(&out, &format!("failure-{k}"));
                std::fs::write(&p, to_canonical_json(w)?).map_err(Error::from)?;
                println!("failing witness: {}", p.display());
            }
            ExitCode::from(1)
        }
    };
    Ok(code)
}
