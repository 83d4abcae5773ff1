//! Command-line front end: flat config files in, CSV reports out.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use exlab_core::dependence::{run_diagnostics, CorrelationModel, DiagnosticGrid, VerdictCutoffs};
use exlab_core::engine::{
    estimates_to_csv, records_to_csv, run_experiment, ExperimentConfig, NormingSpec,
};
use exlab_core::limitlaw::{joint_limit, LimitSpec, ThresholdQuad};
use exlab_core::missing::{MissingnessModel, PDistribution};
use exlab_core::Error;

const EXIT_CONFIG: u8 = 2;
const EXIT_GENERATION: u8 = 3;
const EXIT_IO: u8 = 4;

#[derive(Parser)]
#[command(
    name = "exlab",
    version,
    about = "Monte Carlo laboratory for extremes of partially observed stationary Gaussian samples"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the replicate engine from a config file and write reports.
    Simulate(SimulateArgs),
    /// Evaluate the limiting joint law on threshold quadruples.
    Limit(LimitArgs),
    /// Diagnose the correlation-decay conditions for a model.
    Check(CheckArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Experiment configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Override the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the sample length.
    #[arg(long)]
    n: Option<u64>,
    /// Override the replicate count.
    #[arg(long)]
    reps: Option<u64>,
    /// Override the worker count; 0 uses every core.
    #[arg(long)]
    workers: Option<usize>,
    /// Directory for the report files.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Also write the per-replicate extremes to raw.csv.
    #[arg(long)]
    dump_raw: bool,
}

#[derive(Args)]
struct LimitArgs {
    /// Law of the observed fraction: point_mass:P, uniform:A:B,
    /// beta:ALPHA:BETA, or discrete:V@W,V@W,...
    #[arg(long, default_value = "point_mass:1")]
    pd: String,
    /// Threshold quadruple "x2 y2 x1 y1"; repeatable; inf and -inf allowed.
    #[arg(long = "quad")]
    quads: Vec<String>,
}

#[derive(Args)]
struct CheckArgs {
    /// Correlation model: iid, ar1:PHI, power:C:ALPHA, or log:C.
    #[arg(long)]
    model: String,
    /// Exponent for the correlation summability check.
    #[arg(long, default_value_t = 2.0)]
    davis_p: f64,
}

struct Failure {
    code: u8,
    message: String,
}

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure { code, message: message.into() }
}

/// Errors surfacing once generation has started are generation failures;
/// everything a validation pass could have caught is a config error.
fn run_failure(e: Error) -> Failure {
    let code = match e {
        Error::EmbeddingFailure { .. } | Error::LengthMismatch { .. } => EXIT_GENERATION,
        _ => EXIT_CONFIG,
    };
    fail(code, e.to_string())
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Limit(args) => cmd_limit(args),
        Command::Check(args) => cmd_check(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

// ---------------------------------------------------------------------------
// Config file parsing

/// One `key = value` line still waiting to be claimed by the assembler.
struct Entry {
    key: String,
    value: String,
    line: usize,
    consumed: bool,
}

struct RawConfig {
    entries: Vec<Entry>,
    /// Values of repeated `threshold` lines, in file order.
    thresholds: Vec<(String, usize)>,
}

impl RawConfig {
    fn parse(text: &str) -> Result<Self, Failure> {
        let mut entries: Vec<Entry> = Vec::new();
        let mut thresholds = Vec::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line = idx + 1;
            let stripped = match raw_line.split_once('#') {
                Some((head, _)) => head,
                None => raw_line,
            }
            .trim();
            if stripped.is_empty() {
                continue;
            }
            let (key, value) = stripped.split_once('=').ok_or_else(|| {
                fail(EXIT_CONFIG, format!("line {line}: expected `key = value`, got `{stripped}`"))
            })?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if value.is_empty() {
                return Err(fail(EXIT_CONFIG, format!("line {line}: key `{key}` has no value")));
            }
            if key == "threshold" {
                thresholds.push((value, line));
            } else {
                if entries.iter().any(|e| e.key == key) {
                    return Err(fail(EXIT_CONFIG, format!("line {line}: duplicate key `{key}`")));
                }
                entries.push(Entry { key, value, line, consumed: false });
            }
        }
        Ok(Self { entries, thresholds })
    }

    fn take(&mut self, key: &str) -> Option<String> {
        self.entries.iter_mut().find(|e| e.key == key).map(|e| {
            e.consumed = true;
            e.value.clone()
        })
    }

    fn require(&mut self, key: &str) -> Result<String, Failure> {
        self.take(key)
            .ok_or_else(|| fail(EXIT_CONFIG, format!("missing required key `{key}`")))
    }

    /// Every key must be spent by the assembler; a leftover is a typo or a
    /// field that does not apply to the chosen kinds.
    fn finish(self) -> Result<(), Failure> {
        match self.entries.iter().find(|e| !e.consumed) {
            Some(e) => Err(fail(
                EXIT_CONFIG,
                format!("line {}: unknown or unused key `{}`", e.line, e.key),
            )),
            None => Ok(()),
        }
    }
}

fn parse_f64_field(key: &str, value: &str) -> Result<f64, Failure> {
    value
        .parse::<f64>()
        .map_err(|_| fail(EXIT_CONFIG, format!("key `{key}`: `{value}` is not a number")))
}

fn parse_u64_field(key: &str, value: &str) -> Result<u64, Failure> {
    value
        .parse::<u64>()
        .map_err(|_| fail(EXIT_CONFIG, format!("key `{key}`: `{value}` is not a whole number")))
}

fn take_f64(raw: &mut RawConfig, key: &str) -> Result<f64, Failure> {
    let value = raw.require(key)?;
    parse_f64_field(key, &value)
}

fn correlation_from(raw: &mut RawConfig) -> Result<CorrelationModel, Failure> {
    let kind = raw.require("correlation.kind")?;
    let model = match kind.as_str() {
        "iid" => CorrelationModel::Iid,
        "ar1" => CorrelationModel::ar1(take_f64(raw, "correlation.phi")?).map_err(run_failure)?,
        "power_decay" => CorrelationModel::power_decay(
            take_f64(raw, "correlation.c")?,
            take_f64(raw, "correlation.alpha")?,
        )
        .map_err(run_failure)?,
        "log_decay" => {
            CorrelationModel::log_decay(take_f64(raw, "correlation.c")?).map_err(run_failure)?
        }
        other => {
            return Err(fail(
                EXIT_CONFIG,
                format!(
                    "correlation.kind `{other}` is not one of iid, ar1, power_decay, log_decay"
                ),
            ))
        }
    };
    Ok(model)
}

fn p_distribution_from(raw: &mut RawConfig) -> Result<PDistribution, Failure> {
    let kind = raw.require("p_distribution.kind")?;
    let pd = match kind.as_str() {
        "point_mass" => {
            PDistribution::point_mass(take_f64(raw, "p_distribution.p")?).map_err(run_failure)?
        }
        "uniform" => PDistribution::uniform(
            take_f64(raw, "p_distribution.a")?,
            take_f64(raw, "p_distribution.b")?,
        )
        .map_err(run_failure)?,
        "beta" => PDistribution::beta(
            take_f64(raw, "p_distribution.alpha")?,
            take_f64(raw, "p_distribution.beta")?,
        )
        .map_err(run_failure)?,
        "discrete" => {
            let spec = raw.require("p_distribution.atoms")?;
            PDistribution::discrete(parse_atoms("p_distribution.atoms", &spec)?)
                .map_err(run_failure)?
        }
        other => {
            return Err(fail(
                EXIT_CONFIG,
                format!(
                    "p_distribution.kind `{other}` is not one of point_mass, uniform, beta, \
                     discrete"
                ),
            ))
        }
    };
    Ok(pd)
}

/// Atoms are `value@weight` pairs separated by commas or whitespace.
fn parse_atoms(key: &str, spec: &str) -> Result<Vec<(f64, f64)>, Failure> {
    let mut atoms = Vec::new();
    for pair in spec.split([',', ' ']).filter(|s| !s.is_empty()) {
        let (v, w) = pair.split_once('@').ok_or_else(|| {
            fail(EXIT_CONFIG, format!("key `{key}`: `{pair}` is not value@weight"))
        })?;
        atoms.push((parse_f64_field(key, v)?, parse_f64_field(key, w)?));
    }
    if atoms.is_empty() {
        return Err(fail(EXIT_CONFIG, format!("key `{key}` lists no atoms")));
    }
    Ok(atoms)
}

fn missingness_from(raw: &mut RawConfig) -> Result<MissingnessModel, Failure> {
    let kind = raw.require("missingness.kind")?;
    let model = match kind.as_str() {
        "iid_bernoulli" => MissingnessModel::iid_bernoulli(take_f64(raw, "missingness.p")?)
            .map_err(run_failure)?,
        "exchangeable" => MissingnessModel::exchangeable(p_distribution_from(raw)?),
        "two_state_markov" => MissingnessModel::two_state_markov(
            take_f64(raw, "missingness.p01")?,
            take_f64(raw, "missingness.p10")?,
        )
        .map_err(run_failure)?,
        "deterministic" => {
            let bits = raw.require("missingness.pattern")?;
            let pattern: Result<Vec<bool>, Failure> = bits
                .chars()
                .filter(|c| !c.is_whitespace())
                .map(|c| match c {
                    '1' => Ok(true),
                    '0' => Ok(false),
                    other => Err(fail(
                        EXIT_CONFIG,
                        format!("key `missingness.pattern`: `{other}` is not 0 or 1"),
                    )),
                })
                .collect();
            MissingnessModel::deterministic(pattern?).map_err(run_failure)?
        }
        other => {
            return Err(fail(
                EXIT_CONFIG,
                format!(
                    "missingness.kind `{other}` is not one of iid_bernoulli, exchangeable, \
                     two_state_markov, deterministic"
                ),
            ))
        }
    };
    Ok(model)
}

fn quad_from(text: &str, context: &str) -> Result<ThresholdQuad, Failure> {
    let levels: Vec<&str> = text.split_whitespace().collect();
    if levels.len() != 4 {
        return Err(fail(
            EXIT_CONFIG,
            format!("{context}: expected `x2 y2 x1 y1`, got `{text}`"),
        ));
    }
    let mut parsed = [0.0f64; 4];
    for (slot, level) in parsed.iter_mut().zip(&levels) {
        *slot = level
            .parse::<f64>()
            .map_err(|_| fail(EXIT_CONFIG, format!("{context}: `{level}` is not a level")))?;
    }
    ThresholdQuad::new(parsed[0], parsed[1], parsed[2], parsed[3])
        .map_err(|e| fail(EXIT_CONFIG, format!("{context}: {e}")))
}

fn config_from_file(path: &Path, args: &SimulateArgs) -> Result<ExperimentConfig, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        fail(EXIT_CONFIG, format!("cannot read config `{}`: {e}", path.display()))
    })?;
    let mut raw = RawConfig::parse(&text)?;
    let correlation = correlation_from(&mut raw)?;
    let missingness = missingness_from(&mut raw)?;
    let n = parse_u64_field("n", &raw.require("n")?)?;
    let reps = parse_u64_field("reps", &raw.require("reps")?)?;
    let seed = match raw.take("seed") {
        Some(v) => parse_u64_field("seed", &v)?,
        None => 0,
    };
    let workers = match raw.take("workers") {
        Some(v) => parse_u64_field("workers", &v)? as usize,
        None => 0,
    };
    let mut quads = Vec::with_capacity(raw.thresholds.len());
    for (text, line) in std::mem::take(&mut raw.thresholds) {
        quads.push(quad_from(&text, &format!("line {line}: threshold"))?);
    }
    raw.finish()?;
    Ok(ExperimentConfig {
        correlation,
        missingness,
        n: args.n.unwrap_or(n),
        reps: args.reps.unwrap_or(reps),
        quads,
        norming: NormingSpec::Gaussian,
        base_seed: args.seed.unwrap_or(seed),
        workers: args.workers.unwrap_or(workers),
    })
}

// ---------------------------------------------------------------------------
// Subcommands

#[derive(Serialize)]
struct ManifestOutputs {
    estimates: String,
    raw: Option<String>,
}

/// Everything needed to rerun: the resolved config is the authority, the
/// rest is provenance.
#[derive(Serialize)]
struct RunManifest<'a> {
    artifact_version: &'static str,
    created_utc: String,
    base_seed: u64,
    config: &'a ExperimentConfig,
    empty_observation_count: u64,
    outputs: ManifestOutputs,
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    std::fs::write(path, contents)
        .map_err(|e| fail(EXIT_IO, format!("cannot write `{}`: {e}", path.display())))
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), Failure> {
    let cfg = config_from_file(&args.config, &args)?;
    cfg.validate().map_err(|e| fail(EXIT_CONFIG, e.to_string()))?;
    let result = run_experiment(&cfg).map_err(|e| {
        fail(
            EXIT_GENERATION,
            format!("generation failed for {:?}: {e}", cfg.correlation),
        )
    })?;

    std::fs::create_dir_all(&args.out).map_err(|e| {
        fail(EXIT_IO, format!("cannot create `{}`: {e}", args.out.display()))
    })?;
    let estimates_path = args.out.join("estimates.csv");
    write_file(&estimates_path, &estimates_to_csv(&result.rows))?;
    let raw_name = if args.dump_raw {
        let raw_path = args.out.join("raw.csv");
        write_file(&raw_path, &records_to_csv(&result.records))?;
        Some("raw.csv".to_string())
    } else {
        None
    };
    let manifest = RunManifest {
        artifact_version: env!("CARGO_PKG_VERSION"),
        created_utc: chrono::Utc::now().to_rfc3339(),
        base_seed: cfg.base_seed,
        config: &cfg,
        empty_observation_count: result.empty_observation_count,
        outputs: ManifestOutputs { estimates: "estimates.csv".to_string(), raw: raw_name },
    };
    let manifest_json = serde_json::to_string_pretty(&manifest)
        .map_err(|e| fail(EXIT_IO, format!("cannot encode manifest: {e}")))?;
    write_file(&args.out.join("manifest.json"), &manifest_json)?;
    println!(
        "wrote {} ({} quadruples, {} replicates at n = {})",
        args.out.display(),
        cfg.quads.len(),
        cfg.reps,
        cfg.n
    );
    Ok(())
}

fn parse_pd_arg(spec: &str) -> Result<PDistribution, Failure> {
    let (kind, rest) = match spec.split_once(':') {
        Some((k, r)) => (k, r),
        None => (spec, ""),
    };
    let parts: Vec<&str> = if rest.is_empty() { Vec::new() } else { rest.split(':').collect() };
    let wrong_arity = |want: &str| {
        fail(EXIT_CONFIG, format!("--pd {kind} takes {want}, got `{spec}`"))
    };
    let pd = match kind {
        "point_mass" => {
            let [p] = parts[..] else { return Err(wrong_arity("one argument")) };
            PDistribution::point_mass(parse_f64_field("--pd", p)?).map_err(run_failure)?
        }
        "uniform" => {
            let [a, b] = parts[..] else { return Err(wrong_arity("two arguments")) };
            PDistribution::uniform(parse_f64_field("--pd", a)?, parse_f64_field("--pd", b)?)
                .map_err(run_failure)?
        }
        "beta" => {
            let [a, b] = parts[..] else { return Err(wrong_arity("two arguments")) };
            PDistribution::beta(parse_f64_field("--pd", a)?, parse_f64_field("--pd", b)?)
                .map_err(run_failure)?
        }
        "discrete" => {
            let [atoms] = parts[..] else { return Err(wrong_arity("value@weight atoms")) };
            PDistribution::discrete(parse_atoms("--pd", atoms)?).map_err(run_failure)?
        }
        other => {
            return Err(fail(
                EXIT_CONFIG,
                format!("--pd kind `{other}` is not one of point_mass, uniform, beta, discrete"),
            ))
        }
    };
    Ok(pd)
}

fn cmd_limit(args: LimitArgs) -> Result<(), Failure> {
    let pd = parse_pd_arg(&args.pd)?;
    let spec = LimitSpec::gumbel();
    let mut out = String::from("x2,y2,x1,y1,value\n");
    for (i, text) in args.quads.iter().enumerate() {
        let q = quad_from(text, &format!("quad {}", i + 1))?;
        let value = joint_limit(&spec, &q, &pd)
            .map_err(|e| fail(EXIT_CONFIG, format!("quad {}: {e}", i + 1)))?;
        let _ = writeln!(out, "{},{},{},{},{}", q.x2, q.y2, q.x1, q.y1, value);
    }
    print!("{out}");
    Ok(())
}

fn parse_model_arg(spec: &str) -> Result<CorrelationModel, Failure> {
    let (kind, rest) = match spec.split_once(':') {
        Some((k, r)) => (k, r),
        None => (spec, ""),
    };
    let parts: Vec<&str> = if rest.is_empty() { Vec::new() } else { rest.split(':').collect() };
    let wrong_arity = |want: &str| {
        fail(EXIT_CONFIG, format!("--model {kind} takes {want}, got `{spec}`"))
    };
    let model = match kind {
        "iid" => {
            if !parts.is_empty() {
                return Err(wrong_arity("no arguments"));
            }
            CorrelationModel::Iid
        }
        "ar1" => {
            let [phi] = parts[..] else { return Err(wrong_arity("one argument")) };
            CorrelationModel::ar1(parse_f64_field("--model", phi)?).map_err(run_failure)?
        }
        "power" | "power_decay" => {
            let [c, alpha] = parts[..] else { return Err(wrong_arity("two arguments")) };
            CorrelationModel::power_decay(
                parse_f64_field("--model", c)?,
                parse_f64_field("--model", alpha)?,
            )
            .map_err(run_failure)?
        }
        "log" | "log_decay" => {
            let [c] = parts[..] else { return Err(wrong_arity("one argument")) };
            CorrelationModel::log_decay(parse_f64_field("--model", c)?).map_err(run_failure)?
        }
        other => {
            return Err(fail(
                EXIT_CONFIG,
                format!("--model kind `{other}` is not one of iid, ar1, power, log"),
            ))
        }
    };
    Ok(model)
}

fn cmd_check(args: CheckArgs) -> Result<(), Failure> {
    let model = parse_model_arg(&args.model)?;
    let report = run_diagnostics(
        &model,
        args.davis_p,
        &DiagnosticGrid::default(),
        &VerdictCutoffs::default(),
    )
    .map_err(|e| fail(EXIT_CONFIG, e.to_string()))?;
    print!("{}", report.to_csv());
    Ok(())
}
