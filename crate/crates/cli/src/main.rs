use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use schur_dilate::dilation::{
    channel_dilate, channel_simulate, channel_simulate_kraus_only, povm_dilate, povm_verify,
    ChannelOptions, DilationResult,
};
use schur_dilate::json::{self, ChannelJson, DilationJson, FreedomJson, MatrixJson, ParamsJson, PovmJson};
use schur_dilate::linalg::unitarity_defect;
use schur_dilate::sample::{random_density, rng_from_seed};
use schur_dilate::sc_params::{parametrize, BlockShape, ParamKind};
use schur_dilate::witness::{bell_projector, check_blockwise, witness_batch_cycled, Family, SpanPattern, TrialRecord};
use schur_dilate::{maps::builtin_witness, Error, Tolerances};

const TOL_ENV: &str = "SCHUR_DILATE_TOL";

#[derive(Debug, Parser)]
#[command(name = "schur-dilate", version, about = "Schur parameters, unitary dilations and positivity witnesses")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Extract Schur parameters of a matrix, or rebuild a matrix from them.
    Param(ParamArgs),
    /// Dilate a rank-one POVM or a Kraus channel to a unitary.
    Dilate(DilateArgs),
    /// Run a seeded batch of positivity witnesses against a structured family.
    Witness(WitnessArgs),
}

#[derive(Debug, Args)]
struct ParamArgs {
    /// row, column, matrix or psd.
    #[arg(long, required_unless_present = "reconstruct")]
    kind: Option<ParamKind>,
    /// Block sizes as `ROWS:COLS` with `+`-separated lists, e.g. `2:1+1`; a
    /// single list such as `2+2` means the same partition on both sides.
    #[arg(long, required_unless_present = "reconstruct")]
    shape: Option<String>,
    /// Input matrix, or a parameter file with `--reconstruct`.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Read parameters and write the matrix they describe.
    #[arg(long)]
    reconstruct: bool,
}

#[derive(Debug, Args)]
struct DilateArgs {
    #[arg(long, conflicts_with = "channel", required_unless_present = "channel")]
    povm: Option<PathBuf>,
    #[arg(long)]
    channel: Option<PathBuf>,
    /// `{"u1": matrix, "u2": matrix}` applied as `diag(I, U₁) J diag(I, U₂)`.
    #[arg(long)]
    freedom: Option<PathBuf>,
    /// Total number of ancilla blocks for a channel dilation.
    #[arg(long)]
    pad: Option<usize>,
    /// Accept a trace-decreasing channel by adding an absorbing outcome.
    #[arg(long)]
    absorb: bool,
    #[arg(long)]
    out: PathBuf,
    /// Compare the dilation with the Kraus sum on this many random states.
    #[arg(long, requires = "seed")]
    simulate: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct WitnessArgs {
    /// A family name, `span3` for all three span patterns in turn, or
    /// `bell-control` for the maximally entangled projector.
    #[arg(long)]
    family: String,
    /// transpose, reduction or choi3.
    #[arg(long)]
    witness: String,
    #[arg(long)]
    trials: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    block_dim: Option<usize>,
    #[arg(long)]
    blocks: Option<usize>,
    /// JSON lines, one per trial.
    #[arg(long)]
    out: PathBuf,
}

/// Failure carrying the process exit code.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn io(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidMatrix(_) | Error::UnknownName(_) => 1,
            Error::NoConvergence => 3,
            _ => 2,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = tolerances().and_then(|tol| match &cli.command {
        Command::Param(a) => cmd_param(a, &tol),
        Command::Dilate(a) => cmd_dilate(a, &tol),
        Command::Witness(a) => cmd_witness(a, &tol),
    });
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn tolerances() -> CliResult<Tolerances> {
    let tol = match std::env::var(TOL_ENV) {
        Ok(v) => {
            let psd_tol: f64 = v
                .trim()
                .parse()
                .map_err(|_| Failure::io(format!("{TOL_ENV}={v:?} is not a number")))?;
            Tolerances::default().with_psd_tol(psd_tol)
        }
        Err(_) => Tolerances::default(),
    };
    tol.validate().map_err(|e| Failure::io(e.to_string()))?;
    Ok(tol)
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| Failure::io(format!("{}: {e}", path.display())))
}

fn write(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents).map_err(|e| Failure::io(format!("{}: {e}", path.display())))
}

fn parse_dims(s: &str) -> CliResult<Vec<usize>> {
    s.split('+')
        .map(|d| d.trim().parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Failure::io(format!("bad block sizes {s:?}")))
}

fn parse_shape(s: &str) -> CliResult<BlockShape> {
    let (rows, cols) = match s.split_once(':') {
        Some((r, c)) => (parse_dims(r)?, parse_dims(c)?),
        None => {
            let d = parse_dims(s)?;
            (d.clone(), d)
        }
    };
    BlockShape::new(rows, cols).map_err(|e| Failure::io(e.to_string()))
}

fn cmd_param(a: &ParamArgs, tol: &Tolerances) -> CliResult<u8> {
    let text = read(&a.input)?;
    let shape = a.shape.as_deref().map(parse_shape).transpose()?;
    let (matrix, params) = if a.reconstruct {
        let params = json::from_str::<ParamsJson>(&text)?.to_params(tol)?;
        if a.kind.is_some_and(|k| k != params.kind()) || shape.as_ref().is_some_and(|s| s != params.shape()) {
            return Err(Failure::io("--kind/--shape disagree with the parameter file"));
        }
        (params.reconstruct(tol)?, params)
    } else {
        let matrix = json::matrix_from_str(&text)?;
        let kind = a.kind.expect("required without --reconstruct");
        let shape = shape.expect("required without --reconstruct");
        let params = parametrize(kind, &matrix, &shape, tol)?;
        (matrix, params)
    };
    let rebuilt = if a.reconstruct {
        parametrize(params.kind(), &matrix, params.shape(), tol)?.reconstruct(tol)?
    } else {
        params.reconstruct(tol)?
    };
    let roundtrip = (rebuilt - &matrix).norm();
    eprintln!("roundtrip={roundtrip:.1e}");
    let out = if a.reconstruct {
        json::to_string(&MatrixJson::from(&matrix))
    } else {
        json::to_string(&ParamsJson::from(&params))
    };
    write(&a.out, &out)?;
    Ok(0)
}

#[derive(Debug, Serialize)]
struct PovmSummary {
    kind: &'static str,
    size: usize,
    outcomes: usize,
    unitarity: f64,
    orthogonality: f64,
    completeness: f64,
    compression: f64,
    passed: bool,
}

#[derive(Debug, Serialize)]
struct ChannelSummary {
    kind: &'static str,
    size: usize,
    ancilla_dim: usize,
    absorbing_block: Option<usize>,
    unitarity: f64,
    simulated: usize,
    max_deviation: Option<f64>,
    passed: bool,
}

/// Pass thresholds for the dilation report.
const UNITARITY_TOL: f64 = 1e-10;
const SIMULATION_TOL: f64 = 1e-10;

fn cmd_dilate(a: &DilateArgs, tol: &Tolerances) -> CliResult<u8> {
    let freedom = match &a.freedom {
        Some(p) => Some(json::from_str::<FreedomJson>(&read(p)?)?.to_freedom()?),
        None => None,
    };
    let (result, report, passed) = if let Some(path) = &a.povm {
        if a.pad.is_some() || a.simulate.is_some() || a.absorb {
            return Err(Failure::io("--pad, --absorb and --simulate apply to channels only"));
        }
        let povm = json::from_str::<PovmJson>(&read(path)?)?.to_povm()?;
        let result = povm_dilate(&povm, freedom, tol)?;
        let r = povm_verify(&result, &povm);
        let unitarity = unitarity_defect(&result.unitary);
        let passed = r.passed && unitarity <= UNITARITY_TOL;
        let summary = PovmSummary {
            kind: "povm",
            size: result.size(),
            outcomes: povm.outcomes(),
            unitarity,
            orthogonality: r.orthogonality,
            completeness: r.completeness,
            compression: r.compression,
            passed,
        };
        (result, json::to_string(&summary), passed)
    } else {
        let path = a.channel.as_ref().expect("clap enforces one source");
        let ch = json::from_str::<ChannelJson>(&read(path)?)?.to_channel()?;
        let opts = ChannelOptions {
            freedom,
            pad_to_ancilla: a.pad,
            absorb: a.absorb,
        };
        let result = channel_dilate(&ch, &opts, tol)?;
        let unitarity = unitarity_defect(&result.unitary);
        let simulated = a.simulate.unwrap_or(0);
        let max_deviation = match (a.simulate, a.seed) {
            (Some(n), Some(seed)) => Some(simulation_deviation(&result, &ch, n, seed, tol)?),
            _ => None,
        };
        let passed = unitarity <= UNITARITY_TOL && max_deviation.is_none_or(|d| d <= SIMULATION_TOL);
        let summary = ChannelSummary {
            kind: "channel",
            size: result.size(),
            ancilla_dim: result.ancilla_dim,
            absorbing_block: result.absorbing_block,
            unitarity,
            simulated,
            max_deviation,
            passed,
        };
        (result, json::to_string(&summary), passed)
    };
    write(&a.out, &json::to_string(&DilationJson::from(&result)))?;
    println!("{report}");
    Ok(if passed { 0 } else { 3 })
}

fn simulation_deviation(
    result: &DilationResult,
    ch: &schur_dilate::dilation::KrausChannel,
    n: usize,
    seed: u64,
    tol: &Tolerances,
) -> CliResult<f64> {
    let mut rng = rng_from_seed(seed);
    let mut worst = 0.0_f64;
    for _ in 0..n {
        let rho = random_density(&mut rng, ch.in_dim);
        let out = if result.absorbing_block.is_some() {
            channel_simulate_kraus_only(result, &rho, tol)?
        } else {
            channel_simulate(result, &rho, tol)?
        };
        worst = worst.max((out - ch.apply(&rho)?).norm());
    }
    Ok(worst)
}

const BELL_CONTROL: &str = "bell-control";

fn cmd_witness(a: &WitnessArgs, tol: &Tolerances) -> CliResult<u8> {
    let records = if a.family == BELL_CONTROL {
        let n = a.block_dim.unwrap_or(2);
        if a.blocks.is_some_and(|k| k != n) {
            return Err(Error::UnsupportedCombination(format!("{BELL_CONTROL} has {n} blocks of size {n}")).into());
        }
        let phi = builtin_witness(&a.witness, n)?;
        let out = check_blockwise(&phi, &bell_projector(n), n, tol)?;
        (0..a.trials)
            .map(|i| TrialRecord {
                family: BELL_CONTROL.to_string(),
                seed: a.seed.wrapping_add(i as u64),
                witness: a.witness.clone(),
                min_eig: out.min_eig,
                passed: out.passed,
            })
            .collect()
    } else {
        let families = if a.family == "span3" {
            [SpanPattern::First, SpanPattern::Second, SpanPattern::Third]
                .map(Family::Span3)
                .to_vec()
        } else {
            vec![a.family.parse::<Family>()?]
        };
        let first = families[0];
        let block_dim = a.block_dim.or(first.fixed_block_dim()).unwrap_or(2);
        let blocks = a.blocks.unwrap_or(first.default_blocks());
        witness_batch_cycled(&families, &a.witness, block_dim, blocks, a.trials, a.seed, tol)?
    };
    let mut lines = String::new();
    for r in &records {
        lines.push_str(&json::to_string(r));
        lines.push('\n');
    }
    write(&a.out, &lines)?;
    let passed = records.iter().filter(|r| r.passed).count();
    let worst = records.iter().map(|r| r.min_eig).fold(f64::INFINITY, f64::min);
    println!("trials={} passed={passed} worst_min_eig={worst:.6e}", records.len());
    Ok(if passed == records.len() { 0 } else { 2 })
}
