//! Command-line pipelines behind the `outlier-attribution` binary.
//!
//! Subcommands: `simulate` (model file → observation CSV), `score` (single
//! scores on stdout), `attribute` (observation CSV → attribution reports),
//! `experiment` (registered scenarios → JSON + CSV reports), and `calibrate`
//! (ratio-form p-value → e-value).
//!
//! Exit codes are a stable contract: 0 success/pass, 1 usage error, 2
//! input-data error, 3 experiment acceptance failure.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use crate::attribution::attribute;
use crate::causal::{
    sample, BitString, CausalModel, DigitValue, MechanismSpec, Observation, Value,
};
use crate::deficiency::{
    binary_word_deficiency_bound, deficiency_estimate, gaussian_deficiency_bound, BinaryBoundMode,
};
use crate::experiments::{self, ExperimentConfig, ExperimentError};
use crate::it_scores::it_score;
use crate::lzc::Compressor;
use crate::stat_tests::{ramdas_calibrate, Reference, StdGaussian, TestScore, Uniform01};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_ACCEPTANCE: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "outlier-attribution",
    about = "Calibrated outlier scores and root-cause attribution on causal DAGs",
    version,
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample observations from a model file into a CSV.
    Simulate {
        /// Model JSON file.
        #[arg(long)]
        model: PathBuf,
        /// Sampler seed.
        #[arg(long)]
        seed: u64,
        /// Number of observations.
        #[arg(long)]
        count: usize,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Print a single score in bits with 6 decimal places.
    Score(ScoreArgs),
    /// Attribute each observation row of a CSV to its root-cause mechanism.
    Attribute {
        /// Model JSON file.
        #[arg(long)]
        model: PathBuf,
        /// Observation CSV (as written by `simulate`).
        #[arg(long)]
        data: PathBuf,
        /// Compressor variant: lz77 or lz78.
        #[arg(long, default_value = "lz77")]
        compressor: String,
        /// Output path for the JSON-lines report stream (one report per row).
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a registered experiment scenario and write its report files.
    Experiment {
        /// Scenario name.
        #[arg(long)]
        name: String,
        /// Base seed; trial i derives seed ⊕ i.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Trial count (scenarios with fixed sweeps ignore it).
        #[arg(long, default_value_t = 100)]
        trials: u64,
        /// Report JSON path.
        #[arg(long)]
        out: PathBuf,
        /// Per-trial CSV path (default: the JSON path with a .csv extension).
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Scenario parameter overrides, KEY=VALUE (VALUE parsed as JSON when
        /// possible). Repeatable.
        #[arg(long = "param", value_name = "KEY=VALUE")]
        params: Vec<String>,
    },
    /// Calibrate a ratio-form p-value into an e-value.
    Calibrate {
        /// Ratio-form p-test value (≥ 1 carries evidence; below 1 clamps).
        #[arg(long)]
        p_ratio: f64,
    },
}

#[derive(Debug, Args)]
struct ScoreArgs {
    /// One of: it, gaussian, binary, deficiency.
    #[arg(long)]
    mode: String,
    /// Feature value (it mode).
    #[arg(long)]
    tau: Option<f64>,
    /// Use the uniform [0,1] reference (it mode).
    #[arg(long)]
    uniform01: bool,
    /// Use the standard Gaussian reference (it mode).
    #[arg(long)]
    gaussian: bool,
    /// Comma-separated empirical reference sample (it mode).
    #[arg(long)]
    samples: Option<String>,
    /// z-score (gaussian mode).
    #[arg(long)]
    z: Option<f64>,
    /// Word length (binary mode).
    #[arg(long)]
    m: Option<u32>,
    /// Hamming weight (binary mode).
    #[arg(long)]
    l: Option<u32>,
    /// Bit probability (binary mode).
    #[arg(long)]
    p: Option<f64>,
    /// Use the KL form instead of exact counting (binary mode).
    #[arg(long)]
    kl: bool,
    /// Probability budget in bits (deficiency mode).
    #[arg(long)]
    neg_log_prob: Option<f64>,
    /// Payload string (deficiency mode).
    #[arg(long)]
    x: Option<String>,
    /// Context string (deficiency mode).
    #[arg(long, default_value = "")]
    ctx: String,
    /// Compressor variant (deficiency mode).
    #[arg(long, default_value = "lz77")]
    compressor: String,
}

/// A failure mapped to an exit code; the message goes to stderr.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn data(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_DATA,
            message: message.into(),
        }
    }
}

type CmdResult = Result<(), Failure>;

/// Parse and execute; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            return match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{err}");
                    EXIT_OK
                }
                _ => {
                    eprint!("{err}");
                    EXIT_USAGE
                }
            };
        }
    };
    let result = match cli.command {
        Command::Simulate {
            model,
            seed,
            count,
            out,
        } => cmd_simulate(&model, seed, count, &out),
        Command::Score(args) => cmd_score(&args),
        Command::Attribute {
            model,
            data,
            compressor,
            out,
        } => cmd_attribute(&model, &data, &compressor, &out),
        Command::Experiment {
            name,
            seed,
            trials,
            out,
            csv,
            params,
        } => cmd_experiment(&name, seed, trials, &out, csv.as_deref(), &params),
        Command::Calibrate { p_ratio } => cmd_calibrate(p_ratio),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            failure.code
        }
    }
}

fn parse_compressor(s: &str) -> Result<Compressor, Failure> {
    s.parse()
        .map_err(|_| Failure::usage(format!("--compressor must be lz77 or lz78, got {s:?}")))
}

fn load_model(path: &Path) -> Result<CausalModel, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::data(format!("cannot read model {}: {e}", path.display())))?;
    CausalModel::from_json(&text)
        .map_err(|e| Failure::data(format!("model {}: {e}", path.display())))
}

/// Fields may not contain CSV metacharacters; node ids and value renderings
/// are plain identifiers/decimals/hex by construction.
fn check_csv_field(field: &str) -> Result<(), Failure> {
    if field.contains([',', '"', '\n', '\r']) {
        return Err(Failure::data(format!(
            "field {field:?} contains CSV metacharacters"
        )));
    }
    Ok(())
}

fn cmd_simulate(model_path: &Path, seed: u64, count: usize, out: &Path) -> CmdResult {
    let model = load_model(model_path)?;
    let observations = sample(&model, seed, count)
        .map_err(|e| Failure::data(format!("sampling failed: {e}")))?;
    let ids = model.topological_ids();

    let mut text = String::new();
    for (i, id) in ids.iter().enumerate() {
        check_csv_field(id)?;
        if i > 0 {
            text.push(',');
        }
        text.push_str(id);
    }
    text.push('\n');
    for obs in &observations {
        for (i, id) in ids.iter().enumerate() {
            if i > 0 {
                text.push(',');
            }
            let value = &obs.values[*id];
            let rendered = value.render();
            check_csv_field(&rendered)?;
            match value {
                // String-valued cells are quoted verbatim; reals stay bare.
                Value::Digits(_) | Value::Bits(_) => {
                    text.push('"');
                    text.push_str(&rendered);
                    text.push('"');
                }
                Value::Real(_) => text.push_str(&rendered),
            }
        }
        text.push('\n');
    }
    fs::write(out, text)
        .map_err(|e| Failure::data(format!("cannot write {}: {e}", out.display())))?;
    eprintln!("wrote {count} observations to {}", out.display());
    Ok(())
}

/// The value type each node's CSV cell parses into; identity maps inherit
/// their parent's type.
fn expected_kind(model: &CausalModel, idx: usize) -> &'static str {
    match &model.node(idx).mechanism {
        MechanismSpec::LinearGaussian { .. } => "real",
        MechanismSpec::UniformDigits { .. } => "digits",
        MechanismSpec::XorConst { .. } => "bits",
        MechanismSpec::Deterministic { map } => match map.as_str() {
            "identity" => expected_kind(model, model.parent_indices(idx)[0]),
            _ => "real",
        },
    }
}

fn mechanism_digits(model: &CausalModel, idx: usize) -> u32 {
    match &model.node(idx).mechanism {
        MechanismSpec::UniformDigits { digits } => *digits,
        MechanismSpec::Deterministic { .. } => mechanism_digits(model, model.parent_indices(idx)[0]),
        _ => unreachable!("digits queried for a non-digit node"),
    }
}

fn mechanism_bits(model: &CausalModel, idx: usize) -> usize {
    match &node_mechanism(model, idx) {
        MechanismSpec::XorConst { constant } => constant.len_bits(),
        MechanismSpec::Deterministic { .. } => mechanism_bits(model, model.parent_indices(idx)[0]),
        _ => unreachable!("bits queried for a non-bit node"),
    }
}

fn node_mechanism(model: &CausalModel, idx: usize) -> MechanismSpec {
    model.node(idx).mechanism.clone()
}

fn parse_cell(model: &CausalModel, idx: usize, raw: &str) -> Result<Value, String> {
    match expected_kind(model, idx) {
        "real" => raw
            .parse::<f64>()
            .map(Value::Real)
            .map_err(|e| format!("{e}")),
        "digits" => {
            let digits = mechanism_digits(model, idx);
            DigitValue::parse(raw, digits)
                .map(Value::Digits)
                .map_err(|e| format!("{e}"))
        }
        "bits" => {
            let bits = mechanism_bits(model, idx);
            parse_hex_bits(raw, bits).map(Value::Bits)
        }
        other => unreachable!("unknown kind {other}"),
    }
}

fn parse_hex_bits(s: &str, bits: usize) -> Result<BitString, String> {
    if s.len() != bits.div_ceil(4) {
        return Err(format!(
            "expected {} hex chars for {bits} bits, got {}",
            bits.div_ceil(4),
            s.len()
        ));
    }
    let mut flags = Vec::with_capacity(bits);
    for (i, ch) in s.chars().enumerate() {
        let v = ch
            .to_digit(16)
            .ok_or_else(|| format!("bad hex char {ch:?}"))?;
        for k in 0..4 {
            let bit_idx = i * 4 + k;
            if bit_idx < bits {
                flags.push((v >> (3 - k)) & 1 == 1);
            }
        }
    }
    Ok(BitString::from_bits(&flags))
}

fn cmd_attribute(model_path: &Path, data: &Path, compressor: &str, out: &Path) -> CmdResult {
    let compressor = parse_compressor(compressor)?;
    let model = load_model(model_path)?;
    let ids = model.topological_ids();

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(data)
        .map_err(|e| Failure::data(format!("cannot read data {}: {e}", data.display())))?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| Failure::data(format!("bad CSV header: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();

    let missing: Vec<&str> = ids
        .iter()
        .filter(|id| !headers.iter().any(|h| h == *id))
        .copied()
        .collect();
    let extra: Vec<&String> = headers
        .iter()
        .filter(|h| !ids.contains(&h.as_str()))
        .collect();
    if !missing.is_empty() || !extra.is_empty() {
        return Err(Failure::data(format!(
            "data columns do not match model nodes (missing: {missing:?}, extra: {extra:?})"
        )));
    }
    let column_of = |id: &str| headers.iter().position(|h| h == id).unwrap();

    let mut out_file = fs::File::create(out)
        .map_err(|e| Failure::data(format!("cannot write {}: {e}", out.display())))?;
    let mut rows = 0usize;
    for (row_idx, record) in reader.records().enumerate() {
        let row = row_idx + 1;
        let record =
            record.map_err(|e| Failure::data(format!("row {row}: malformed CSV: {e}")))?;
        let mut values = indexmap::IndexMap::new();
        for &id in &ids {
            let idx = model.node_index(id).unwrap();
            let raw = record
                .get(column_of(id))
                .ok_or_else(|| Failure::data(format!("row {row}: missing cell for {id}")))?;
            let value = parse_cell(&model, idx, raw)
                .map_err(|e| Failure::data(format!("row {row}, node {id}: {e}")))?;
            values.insert(id.to_string(), value);
        }
        let obs = Observation {
            values,
            noise: None,
        };
        let report = attribute(&model, &obs, compressor, 0)
            .map_err(|e| Failure::data(format!("row {row}: {e}")))?;
        println!(
            "row {row}: root_cause={} bits={:.6}",
            report.root_cause, report.per_node[&report.root_cause].bits
        );
        writeln!(out_file, "{}", report.to_json())
            .map_err(|e| Failure::data(format!("cannot write {}: {e}", out.display())))?;
        rows += 1;
    }
    if rows == 0 {
        return Err(Failure::data(format!(
            "data file {} has no observation rows",
            data.display()
        )));
    }
    Ok(())
}

/// Parse `KEY=VALUE` with a JSON-typed value where possible.
fn parse_param(raw: &str) -> Result<(String, serde_json::Value), Failure> {
    let (key, value) = raw
        .split_once('=')
        .ok_or_else(|| Failure::usage(format!("--param expects KEY=VALUE, got {raw:?}")))?;
    let json = serde_json::from_str(value)
        .unwrap_or_else(|_| serde_json::Value::String(value.to_string()));
    Ok((key.to_string(), json))
}

fn cmd_experiment(
    name: &str,
    seed: u64,
    trials: u64,
    out: &Path,
    csv: Option<&Path>,
    params: &[String],
) -> CmdResult {
    let mut cfg = ExperimentConfig::new(name, seed, trials);
    for raw in params {
        let (key, value) = parse_param(raw)?;
        cfg.params.insert(key, value);
    }
    let report = experiments::run(&cfg).map_err(|e| match e {
        ExperimentError::UnknownScenario { .. } | ExperimentError::BadParam { .. } => {
            Failure::usage(e.to_string())
        }
        other => Failure::data(other.to_string()),
    })?;

    fs::write(out, report.to_json())
        .map_err(|e| Failure::data(format!("cannot write {}: {e}", out.display())))?;
    let csv_path = csv
        .map(Path::to_path_buf)
        .unwrap_or_else(|| out.with_extension("csv"));
    let csv_file = fs::File::create(&csv_path)
        .map_err(|e| Failure::data(format!("cannot write {}: {e}", csv_path.display())))?;
    report
        .write_csv(csv_file)
        .map_err(|e| Failure::data(format!("cannot write {}: {e}", csv_path.display())))?;

    println!(
        "scenario {name}: {} ({})",
        if report.pass { "PASS" } else { "FAIL" },
        serde_json::to_string(&report.summary).unwrap_or_default()
    );
    if report.pass {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_ACCEPTANCE,
            message: format!("scenario {name} failed its acceptance rule"),
        })
    }
}

fn parse_samples(raw: &str) -> Result<Vec<f64>, Failure> {
    raw.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Failure::usage(format!("--samples: bad value {s:?}: {e}")))
        })
        .collect()
}

fn cmd_score(args: &ScoreArgs) -> CmdResult {
    let bits = match args.mode.as_str() {
        "it" => {
            let tau = args
                .tau
                .ok_or_else(|| Failure::usage("--mode it requires --tau"))?;
            let refs_given =
                u8::from(args.uniform01) + u8::from(args.gaussian) + u8::from(args.samples.is_some());
            if refs_given != 1 {
                return Err(Failure::usage(
                    "--mode it requires exactly one of --uniform01, --gaussian, --samples",
                ));
            }
            let score = if args.uniform01 {
                it_score(tau, &Reference::Survival(&Uniform01))
            } else if args.gaussian {
                it_score(tau, &Reference::Survival(&StdGaussian))
            } else {
                let samples = parse_samples(args.samples.as_deref().unwrap())?;
                it_score(tau, &Reference::Samples(&samples))
            };
            score.map_err(|e| Failure::data(e.to_string()))?.bits
        }
        "gaussian" => {
            let z = args
                .z
                .ok_or_else(|| Failure::usage("--mode gaussian requires --z"))?;
            gaussian_deficiency_bound(z).map_err(|e| Failure::data(e.to_string()))?
        }
        "binary" => {
            let (m, l, p) = match (args.m, args.l, args.p) {
                (Some(m), Some(l), Some(p)) => (m, l, p),
                _ => {
                    return Err(Failure::usage(
                        "--mode binary requires --m, --l and --p",
                    ))
                }
            };
            let mode = if args.kl {
                BinaryBoundMode::Kl
            } else {
                BinaryBoundMode::Exact
            };
            binary_word_deficiency_bound(m, l, p, mode)
                .map_err(|e| Failure::data(e.to_string()))?
        }
        "deficiency" => {
            let neg_log_prob = args
                .neg_log_prob
                .ok_or_else(|| Failure::usage("--mode deficiency requires --neg-log-prob"))?;
            let x = args
                .x
                .as_deref()
                .ok_or_else(|| Failure::usage("--mode deficiency requires --x"))?;
            let compressor = parse_compressor(&args.compressor)?;
            deficiency_estimate(neg_log_prob, x.as_bytes(), args.ctx.as_bytes(), compressor)
                .map_err(|e| Failure::data(e.to_string()))?
                .bits
        }
        other => {
            return Err(Failure::usage(format!(
                "--mode must be one of it, gaussian, binary, deficiency; got {other:?}"
            )))
        }
    };
    println!("{bits:.6}");
    Ok(())
}

fn cmd_calibrate(p_ratio: f64) -> CmdResult {
    let p = TestScore::p_ratio(p_ratio).map_err(|e| Failure::data(e.to_string()))?;
    let e = ramdas_calibrate(&p).map_err(|e| Failure::data(e.to_string()))?;
    println!("{:.6}", e.value());
    Ok(())
}
