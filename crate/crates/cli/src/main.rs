//! Command-line front end: parameter generation, file protection and
//! recovery, entropy reports, equivalent-code inspection, and the
//! reconstruction-versus-noise demonstrator.
//!
//! Reports are key=value lines on stdout. Exit codes are stable: 0 success,
//! 1 runtime/I-O, 2 usage, 3 malformed input, 4 checksum corruption,
//! 5 integrity (wrong key or damaged payload).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::Deserialize;

use perseus_core::session::DEFAULT_CHUNK_BYTES;
use perseus_core::{
    byte_entropy, deserialize_params, equivalent_code, protect, read_frames,
    reconstruction_sweep, serialize_params, unprotect, write_frames, Error, GenBounds,
    PayloadMode, SessionParams,
};

/// Noise levels swept by `attack-demo`.
const SWEEP_LEVELS: [f64; 6] = [0.0, 0.01, 0.02, 0.05, 0.15, 0.25];

#[derive(Parser)]
#[command(
    name = "perseus",
    version,
    about = "Scalable-security codec: punctured convolutional codes with keyed noise"
)]
struct Cli {
    /// Deterministic RNG seed for reproducible runs; omit to use system
    /// entropy.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// TOML configuration file; explicit flags take precedence over it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a fresh secret parameter blob.
    Gen(GenArgs),
    /// Protect a file into a frame container.
    Encode(CodecArgs),
    /// Recover the plaintext from a frame container.
    Decode(CodecArgs),
    /// Report the byte entropy of a file.
    Entropy {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Sweep encoder-reconstruction success across channel noise levels.
    AttackDemo(AttackArgs),
    /// Print the unpunctured code equivalent to a parameter blob.
    Equiv {
        #[arg(long)]
        params: PathBuf,
    },
}

#[derive(Args)]
struct GenArgs {
    /// Where to write the parameter blob.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Noise probability percentage as `lo..hi` or a single value
    /// (default 15..35; below 15 is low-entropy mode).
    #[arg(long)]
    proba: Option<String>,

    /// Fraction of pattern positions punctured away: 8, 16, or 32 for
    /// 1/8th, 1/16th, 1/32nd.
    #[arg(long)]
    puncture_divisor: Option<u32>,

    #[arg(long)]
    k_min: Option<usize>,
    #[arg(long)]
    k_span: Option<usize>,
    #[arg(long)]
    n_min: Option<usize>,
    #[arg(long)]
    n_span: Option<usize>,
    #[arg(long)]
    mem_min: Option<usize>,
    #[arg(long)]
    mem_span: Option<usize>,
    #[arg(long)]
    mwidth_min: Option<usize>,
    #[arg(long)]
    mwidth_span: Option<usize>,
}

#[derive(Args)]
struct CodecArgs {
    /// Parameter blob from `gen`.
    #[arg(long)]
    params: Option<PathBuf>,

    #[arg(long = "in")]
    input: Option<PathBuf>,

    #[arg(long)]
    out: Option<PathBuf>,

    /// Plaintext bytes per frame (encode only).
    #[arg(long)]
    chunk_bytes: Option<usize>,

    /// Frame payload encoding on disk.
    #[arg(long, value_enum)]
    payload_mode: Option<ModeArg>,
}

#[derive(Args)]
struct AttackArgs {
    /// Reconstruction attempts per noise level.
    #[arg(long, default_value_t = 100)]
    trials: u32,

    /// Intercepted stream length in bits.
    #[arg(long, default_value_t = 10_000)]
    bits: usize,

    /// Maximum hypothesis memory (hard limit 8).
    #[arg(long, default_value_t = 6)]
    max_mem: usize,

    /// Syndrome fraction below which a hypothesis counts as a candidate.
    #[arg(long, default_value_t = 0.10)]
    threshold: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Hex,
    Binary,
}

impl From<ModeArg> for PayloadMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Hex => PayloadMode::Hex,
            ModeArg::Binary => PayloadMode::Binary,
        }
    }
}

/// Optional TOML configuration; every field can also be given as a flag,
/// and flags win.
#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    bounds: Option<FileBounds>,
    proba: Option<String>,
    puncture_divisor: Option<u32>,
    chunk_bytes: Option<usize>,
    payload_mode: Option<String>,
    params: Option<PathBuf>,
    input: Option<PathBuf>,
    output: Option<PathBuf>,
}

#[derive(Deserialize, Default, Clone, Copy)]
#[serde(deny_unknown_fields)]
struct FileBounds {
    k_min: Option<usize>,
    k_span: Option<usize>,
    n_min: Option<usize>,
    n_span: Option<usize>,
    mem_min: Option<usize>,
    mem_span: Option<usize>,
    mwidth_min: Option<usize>,
    mwidth_span: Option<usize>,
}

enum CliError {
    Usage(String),
    Io(PathBuf, std::io::Error),
    Core(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(..) => 1,
            CliError::Core(e) => match e.root() {
                Error::InvalidRange(_)
                | Error::InvalidBounds(_)
                | Error::ParametersTooLarge { .. }
                | Error::HypothesisSpaceTooLarge { .. } => 2,
                Error::Format(_)
                | Error::Sequence { .. }
                | Error::LengthMismatch(_)
                | Error::MalformedPayload(_)
                | Error::MessageLength { .. }
                | Error::InvalidParams(_)
                | Error::EmptyInput => 3,
                Error::Corruption { .. } => 4,
                Error::Integrity(_) | Error::AmbiguousDecode { .. } => 5,
                _ => 1,
            },
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Io(path, e) => write!(f, "{}: {e}", path.display()),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = load_config(cli.config.as_deref())?;
    let mut rng = match cli.seed {
        Some(seed) => ChaCha20Rng::seed_from_u64(seed),
        None => ChaCha20Rng::from_entropy(),
    };
    match cli.command {
        Command::Gen(args) => cmd_gen(args, &config, &mut rng),
        Command::Encode(args) => cmd_encode(args, &config),
        Command::Decode(args) => cmd_decode(args, &config),
        Command::Entropy { input } => cmd_entropy(&input),
        Command::AttackDemo(args) => cmd_attack_demo(args, &mut rng),
        Command::Equiv { params } => cmd_equiv(&params),
    }
}

fn load_config(path: Option<&Path>) -> Result<FileConfig, CliError> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.into(), e))?;
    toml::from_str(&text)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn read_file(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| CliError::Io(path.into(), e))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| CliError::Io(path.into(), e))
}

fn require(path: Option<PathBuf>, flag: &str) -> Result<PathBuf, CliError> {
    path.ok_or_else(|| CliError::Usage(format!("missing --{flag} (flag or config file)")))
}

/// Parses `lo..hi` or a single percentage.
fn parse_proba(text: &str) -> Result<(u8, u8), CliError> {
    let parse = |s: &str| {
        s.trim()
            .parse::<u8>()
            .map_err(|_| CliError::Usage(format!("invalid noise probability '{s}'")))
    };
    match text.split_once("..") {
        Some((lo, hi)) => Ok((parse(lo)?, parse(hi)?)),
        None => {
            let p = parse(text)?;
            Ok((p, p))
        }
    }
}

fn cmd_gen(args: GenArgs, config: &FileConfig, rng: &mut ChaCha20Rng) -> Result<(), CliError> {
    let out = require(args.out.or_else(|| config.output.clone()), "out")?;
    let fb = config.bounds.unwrap_or_default();
    let d = GenBounds::default();
    let bounds = GenBounds {
        k_min: args.k_min.or(fb.k_min).unwrap_or(d.k_min),
        k_span: args.k_span.or(fb.k_span).unwrap_or(d.k_span),
        n_min: args.n_min.or(fb.n_min).unwrap_or(d.n_min),
        n_span: args.n_span.or(fb.n_span).unwrap_or(d.n_span),
        mem_min: args.mem_min.or(fb.mem_min).unwrap_or(d.mem_min),
        mem_span: args.mem_span.or(fb.mem_span).unwrap_or(d.mem_span),
        mwidth_min: args.mwidth_min.or(fb.mwidth_min).unwrap_or(d.mwidth_min),
        mwidth_span: args.mwidth_span.or(fb.mwidth_span).unwrap_or(d.mwidth_span),
    };
    let proba_text = args.proba.or_else(|| config.proba.clone());
    let (lo, hi) = match proba_text.as_deref() {
        Some(text) => parse_proba(text)?,
        None => (15, 35),
    };
    if lo < 15 {
        eprintln!("warning: noise probability below 15% is low-entropy mode");
    }
    let divisor = args
        .puncture_divisor
        .or(config.puncture_divisor)
        .unwrap_or(8);

    let sp = SessionParams::generate(&bounds, lo, hi, divisor, rng)?;
    let blob = serialize_params(&sp);
    write_file(&out, &blob)?;

    let base = sp.code.base();
    let (k, width, weight) = (base.k(), sp.code.width(), sp.code.weight());
    println!("k={k}");
    println!("n={}", base.n());
    println!("mem={}", base.mem());
    println!("mwidth={width}");
    println!("weight={weight}");
    println!("rate={:.4}", (k * width) as f64 / weight as f64);
    println!("noise_weight={}", sp.bf.count_ones());
    println!("proba={}", sp.proba);
    println!("blob_bytes={}", blob.len());
    Ok(())
}

fn resolve_codec_common(
    args: &mut CodecArgs,
    config: &FileConfig,
) -> Result<(PathBuf, PathBuf, PathBuf, PayloadMode), CliError> {
    let params = require(args.params.take().or_else(|| config.params.clone()), "params")?;
    let input = require(args.input.take().or_else(|| config.input.clone()), "in")?;
    let out = require(args.out.take().or_else(|| config.output.clone()), "out")?;
    let mode = match args.payload_mode {
        Some(m) => m.into(),
        None => match config.payload_mode.as_deref() {
            None | Some("hex") => PayloadMode::Hex,
            Some("binary") => PayloadMode::Binary,
            Some(other) => {
                return Err(CliError::Usage(format!(
                    "invalid payload_mode '{other}' in config (hex or binary)"
                )))
            }
        },
    };
    Ok((params, input, out, mode))
}

fn cmd_encode(mut args: CodecArgs, config: &FileConfig) -> Result<(), CliError> {
    let (params, input, out, mode) = resolve_codec_common(&mut args, config)?;
    let chunk_bytes = args
        .chunk_bytes
        .or(config.chunk_bytes)
        .unwrap_or(DEFAULT_CHUNK_BYTES);
    let sp = deserialize_params(&read_file(&params)?)?;
    let data = read_file(&input)?;

    let frames = protect(&sp, &data, chunk_bytes)?;
    let container = write_frames(&frames, mode);
    write_file(&out, &container)?;

    println!("chunks={}", frames.len());
    println!("in_bytes={}", data.len());
    println!("out_bytes={}", container.len());
    if !data.is_empty() {
        println!(
            "expansion={:.4}",
            container.len() as f64 / data.len() as f64
        );
        // Entropy is always measured on packed payload bits, regardless of
        // the container mode on disk.
        let packed: Vec<u8> = frames
            .iter()
            .flat_map(|f| f.payload.to_bytes_msb())
            .collect();
        println!("payload_entropy={:.4}", byte_entropy(&packed)?.byte_entropy);
    }
    Ok(())
}

fn cmd_decode(mut args: CodecArgs, config: &FileConfig) -> Result<(), CliError> {
    let (params, input, out, mode) = resolve_codec_common(&mut args, config)?;
    let sp = deserialize_params(&read_file(&params)?)?;
    let frames = read_frames(&read_file(&input)?, mode)?;
    let plain = unprotect(&sp, &frames)?;
    write_file(&out, &plain)?;
    println!("chunks={}", frames.len());
    println!("out_bytes={}", plain.len());
    Ok(())
}

fn cmd_entropy(input: &Path) -> Result<(), CliError> {
    let report = byte_entropy(&read_file(input)?)?;
    println!("sample_bytes={}", report.sample_bytes);
    println!("byte_entropy={:.4}", report.byte_entropy);
    Ok(())
}

fn cmd_attack_demo(args: AttackArgs, rng: &mut ChaCha20Rng) -> Result<(), CliError> {
    let points = reconstruction_sweep(
        rng,
        &SWEEP_LEVELS,
        args.trials,
        args.bits,
        args.max_mem,
        args.threshold,
    )?;
    for point in points {
        println!(
            "p={:.3} trials={} successes={} success_rate={:.3} hypotheses={}",
            point.noise_p,
            point.trials,
            point.successes,
            point.successes as f64 / point.trials.max(1) as f64,
            point.hypotheses
        );
    }
    Ok(())
}

fn cmd_equiv(params: &Path) -> Result<(), CliError> {
    let sp = deserialize_params(&read_file(params)?)?;
    let eq = equivalent_code(&sp.code);
    println!("k={}", eq.k());
    println!("n={}", eq.n());
    println!("mem={}", eq.mem());
    for i in 0..eq.k() {
        for j in 0..eq.n() {
            println!("poly_{}_{}={}", i + 1, j + 1, eq.poly(i, j));
        }
    }
    Ok(())
}
