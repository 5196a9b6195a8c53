//! Command-line harness: argument parsing, validation and dispatch.
//!
//! Every command writes machine-readable data (CSV with a header row, or a
//! single JSON object) to `--output` or standard output. Long runs report
//! progress as JSON lines on standard error, at most once per second.
//! `POLAR_THREADS` sets the worker count; results are gathered by trial
//! index, so output does not depend on it.

use std::ffi::OsString;
use std::io::Write;
use std::ops::Range;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{ChannelError, Dmc};
use crate::codec::{llr_decision, simulate_trials, wald_half_width, CodecError, ErrorCounts, FerResult, GenieSc, PolarCode};
use crate::density::{
    construct, evolve_all, heuristic_bec_construct, monte_carlo_construct, select, ConstructionResult, DensityError, Grid,
    GridParams,
};
use crate::kernel::{Certificate, Kernel, KernelError, KernelProfile};
use crate::lab::{scaling_experiment, LabError, ScalingConfig};
use crate::transform::{bec_ladder, iterate_subchannel, TransformError};

/// Environment variable holding the worker thread count.
pub const THREADS_VAR: &str = "POLAR_THREADS";
/// Largest depth accepted by `fig2`, `construct` and `simulate`.
pub const MAX_CODE_DEPTH: usize = 20;
/// Largest trial count accepted by any command.
pub const MAX_TRIALS: usize = 100_000_000;

#[derive(Error, Debug)]
pub enum HarnessError {
    #[error("{0}")]
    Usage(String),
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed code file: {0}")]
    CodeFile(String),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Density(#[from] DensityError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Lab(#[from] LabError),
}

fn usage(msg: impl Into<String>) -> HarnessError {
    HarnessError::Usage(msg.into())
}

#[derive(Parser, Debug)]
#[command(name = "polar", version, about = "Channel polarization and polar code experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Partial distances, exponents and polarization certificate of a kernel (JSON).
    AnalyzeKernel(AnalyzeArgs),
    /// Choose a frozen set for the 2×2 binary kernel (JSON).
    Construct(ConstructArgs),
    /// SC frame error rate of a constructed code (CSV).
    Simulate(SimulateArgs),
    /// Empirical scaling law of the Z_n process on an erasure channel (CSV).
    Polarize(PolarizeArgs),
    /// DE versus BEC-heuristic construction on BSC(0.11), N = 4096 (CSV).
    Fig2(Fig2Args),
    /// Exact synthetic channel along a digit path (JSON).
    OracleSubchannel(OracleArgs),
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    /// arikan | rs:<q> | rs:<q>:<gamma> | rs:<q>:primitive | file:<path>
    #[arg(long)]
    pub kernel: String,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    De,
    BecHeuristic,
    MonteCarlo,
}

impl Method {
    fn name(self) -> &'static str {
        match self {
            Method::De => "de",
            Method::BecHeuristic => "bec-heuristic",
            Method::MonteCarlo => "monte-carlo",
        }
    }
}

#[derive(Args, Debug)]
pub struct GridArgs {
    /// LLR quantization step.
    #[arg(long, default_value_t = 1.0 / 64.0)]
    pub delta: f64,
    /// LLR clipping magnitude.
    #[arg(long, default_value_t = 40.0)]
    pub half_range: f64,
}

#[derive(Args, Debug)]
pub struct ConstructArgs {
    /// bec:<eps> | bsc:<p> | bawgnc:<sigma>:<bins> | file:<path>
    #[arg(long)]
    pub channel: String,
    #[arg(long)]
    pub n: usize,
    /// Code rate; the information set has round(rate·2^n) indices.
    #[arg(long, conflicts_with = "count", required_unless_present = "count")]
    pub rate: Option<f64>,
    /// Information set size.
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long, value_enum, default_value_t = Method::De)]
    pub method: Method,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Trials of the monte-carlo method.
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    /// Seed of the monte-carlo method.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Include the per-index estimates.
    #[arg(long)]
    pub with_pe: bool,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Construction JSON written by `construct`.
    #[arg(long)]
    pub code: PathBuf,
    #[arg(long)]
    pub channel: String,
    #[arg(long)]
    pub trials: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Enumerate {
    Auto,
    Always,
    Never,
}

#[derive(Args, Debug)]
pub struct PolarizeArgs {
    /// bec:<eps>; with a q-ary kernel this is the q-ary erasure channel.
    #[arg(long)]
    pub channel: String,
    /// arikan | rs:<q> | rs:<q>:<gamma> | file:<path> (linear kernels only)
    #[arg(long, default_value = "arikan")]
    pub kernel: String,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 100_000)]
    pub trials: usize,
    /// start:stop:step, inclusive.
    #[arg(long, default_value = "-1:1:1", allow_hyphen_values = true)]
    pub t_grid: String,
    /// Extra rows with threshold 2^{-ℓ^{βn}}, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub beta: Vec<f64>,
    #[arg(long, value_enum, default_value_t = Enumerate::Auto)]
    pub enumerate: Enumerate,
    #[arg(long)]
    pub seed: u64,
    /// Also write the full report, including the KS distance, as JSON.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct Fig2Args {
    #[arg(long, default_value = "bsc:0.11")]
    pub channel: String,
    #[arg(long, default_value_t = 12)]
    pub n: usize,
    /// start:stop:step, inclusive.
    #[arg(long, default_value = "0.25:0.45:0.025")]
    pub rates: String,
    #[arg(long, default_value_t = 100_000)]
    pub trials: usize,
    #[arg(long)]
    pub seed: u64,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    #[arg(long)]
    pub channel: String,
    #[arg(long, default_value = "arikan")]
    pub kernel: String,
    /// Comma-separated digits, first transform first.
    #[arg(long, value_delimiter = ',')]
    pub path: Vec<usize>,
    /// Keep outputs with equal posteriors separate.
    #[arg(long)]
    pub no_merge: bool,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// A fully validated command.
#[derive(Debug)]
pub enum RunConfig {
    AnalyzeKernel { kernel: Kernel, output: Option<PathBuf> },
    Construct(ConstructConfig),
    Simulate { code: PolarCode, channel: Dmc, trials: usize, seed: u64, output: Option<PathBuf> },
    Polarize { kernel: Kernel, scaling: ScalingConfig, report: Option<PathBuf>, output: Option<PathBuf> },
    Fig2(Fig2Config),
    OracleSubchannel { channel: Dmc, kernel: Kernel, path: Vec<usize>, merge: bool, output: Option<PathBuf> },
}

#[derive(Debug)]
pub struct ConstructConfig {
    pub channel_spec: String,
    pub channel: Dmc,
    pub n: usize,
    pub count: usize,
    pub method: Method,
    pub grid: Grid,
    pub trials: usize,
    pub seed: Option<u64>,
    pub with_pe: bool,
    pub output: Option<PathBuf>,
}

#[derive(Debug)]
pub struct Fig2Config {
    pub channel: Dmc,
    pub n: usize,
    pub rates: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub grid: Grid,
    pub output: Option<PathBuf>,
}

/// Inclusive `start:stop:step` range, rounded to nine decimals.
pub fn parse_range(text: &str) -> Result<Vec<f64>, HarnessError> {
    let bad = || usage(format!("expected start:stop:step, got {text:?}"));
    let parts: Vec<f64> = text
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_, _>>()?;
    let [a, b, step] = parts[..] else { return Err(bad()) };
    if !(a.is_finite() && b.is_finite() && step.is_finite()) || step <= 0.0 || b < a {
        return Err(bad());
    }
    let count = ((b - a) / step + 1e-9).floor() as usize + 1;
    if count > 10_000 {
        return Err(usage("range has too many points"));
    }
    Ok((0..count).map(|k| ((a + k as f64 * step) * 1e9).round() / 1e9).collect())
}

fn check_trials(trials: usize) -> Result<(), HarnessError> {
    if trials == 0 || trials > MAX_TRIALS {
        return Err(usage(format!("trials must lie in 1..={MAX_TRIALS}")));
    }
    Ok(())
}

fn check_depth(n: usize) -> Result<(), HarnessError> {
    if n > MAX_CODE_DEPTH {
        return Err(usage(format!("n = {n} exceeds the limit {MAX_CODE_DEPTH}")));
    }
    Ok(())
}

fn grid_from(args: &GridArgs) -> Result<Grid, HarnessError> {
    Ok(Grid::new(args.delta, args.half_range)?)
}

fn count_from_rate(rate: f64, n: usize) -> Result<usize, HarnessError> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(usage(format!("rate {rate} must lie in [0,1]")));
    }
    Ok((rate * (1u64 << n) as f64).round() as usize)
}

/// Erasure probability of a `bec:<eps>` spec.
fn erasure_spec(spec: &str) -> Result<f64, HarnessError> {
    let eps = spec
        .strip_prefix("bec:")
        .and_then(|e| e.trim().parse::<f64>().ok())
        .ok_or_else(|| usage(format!("expected bec:<eps>, got {spec:?}")))?;
    Dmc::bec(eps)?;
    Ok(eps)
}

impl TryFrom<Command> for RunConfig {
    type Error = HarnessError;

    fn try_from(cmd: Command) -> Result<Self, HarnessError> {
        Ok(match cmd {
            Command::AnalyzeKernel(a) => RunConfig::AnalyzeKernel { kernel: Kernel::parse_spec(&a.kernel)?, output: a.output },
            Command::Construct(a) => {
                check_depth(a.n)?;
                let count = match (a.rate, a.count) {
                    (Some(r), _) => count_from_rate(r, a.n)?,
                    (None, Some(c)) => c,
                    (None, None) => return Err(usage("one of --rate or --count is required")),
                };
                if count > 1 << a.n {
                    return Err(usage(format!("count {count} exceeds the blocklength {}", 1u64 << a.n)));
                }
                if a.method == Method::MonteCarlo {
                    check_trials(a.trials)?;
                    if a.seed.is_none() {
                        return Err(usage("--seed is required for the monte-carlo method"));
                    }
                }
                RunConfig::Construct(ConstructConfig {
                    channel: Dmc::parse_spec(&a.channel)?,
                    channel_spec: a.channel,
                    n: a.n,
                    count,
                    method: a.method,
                    grid: grid_from(&a.grid)?,
                    trials: a.trials,
                    seed: a.seed,
                    with_pe: a.with_pe,
                    output: a.output,
                })
            }
            Command::Simulate(a) => {
                check_trials(a.trials)?;
                let code = read_code_file(&a.code)?;
                let channel = Dmc::parse_spec(&a.channel)?;
                if channel.q() != code.kernel().q() {
                    return Err(usage("channel alphabet does not match the code"));
                }
                RunConfig::Simulate { code, channel, trials: a.trials, seed: a.seed, output: a.output }
            }
            Command::Polarize(a) => {
                let eps = erasure_spec(&a.channel)?;
                let kernel = Kernel::parse_spec(&a.kernel)?;
                if !kernel.is_linear() {
                    return Err(usage("polarize needs a linear kernel"));
                }
                let enumerate = match a.enumerate {
                    Enumerate::Auto => None,
                    Enumerate::Always => Some(true),
                    Enumerate::Never => Some(false),
                };
                if enumerate != Some(true) {
                    check_trials(a.trials)?;
                }
                let scaling = ScalingConfig {
                    eps,
                    n: a.n,
                    trials: a.trials,
                    t_grid: parse_range(&a.t_grid)?,
                    betas: a.beta,
                    seed: a.seed,
                    enumerate,
                };
                RunConfig::Polarize { kernel, scaling, report: a.report, output: a.output }
            }
            Command::Fig2(a) => {
                check_depth(a.n)?;
                check_trials(a.trials)?;
                let channel = Dmc::parse_spec(&a.channel)?;
                if channel.q() != 2 || !channel.is_symmetric()? {
                    return Err(usage("fig2 needs a symmetric binary channel"));
                }
                let rates = parse_range(&a.rates)?;
                for &r in &rates {
                    count_from_rate(r, a.n)?;
                }
                RunConfig::Fig2(Fig2Config { channel, n: a.n, rates, trials: a.trials, seed: a.seed, grid: grid_from(&a.grid)?, output: a.output })
            }
            Command::OracleSubchannel(a) => {
                let channel = Dmc::parse_spec(&a.channel)?;
                let kernel = Kernel::parse_spec(&a.kernel)?;
                if channel.q() != kernel.q() {
                    return Err(usage("channel alphabet does not match the kernel"));
                }
                if let Some(&d) = a.path.iter().find(|&&d| d >= kernel.ell()) {
                    return Err(usage(format!("digit {d} out of range for ℓ = {}", kernel.ell())));
                }
                RunConfig::OracleSubchannel { channel, kernel, path: a.path, merge: !a.no_merge, output: a.output }
            }
        })
    }
}

/// Construction file written by `construct` and read by `simulate`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CodeFile {
    pub n: usize,
    pub channel: String,
    #[serde(default)]
    pub grid: Option<GridParams>,
    pub frozen: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pe_per_index: Option<Vec<f64>>,
    pub union_bound: f64,
    /// Kernel spec; the 2×2 binary kernel when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frozen_values: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
}

impl CodeFile {
    pub fn to_code(&self) -> Result<PolarCode, HarnessError> {
        check_depth(self.n)?;
        let kernel = match &self.kernel {
            Some(spec) => Kernel::parse_spec(spec)?,
            None => Kernel::arikan(),
        };
        let values = self.frozen_values.clone().unwrap_or_else(|| vec![0; self.frozen.len()]);
        Ok(PolarCode::with_frozen_values(kernel, self.n, &self.frozen, &values)?)
    }
}

fn read_code_file(path: &Path) -> Result<PolarCode, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let file: CodeFile = serde_json::from_str(&text).map_err(|e| HarnessError::CodeFile(e.to_string()))?;
    file.to_code()
}

fn io_err(path: &Path, source: std::io::Error) -> HarnessError {
    HarnessError::Io { path: path.display().to_string(), source }
}

/// Throttled progress lines on standard error.
struct Progress {
    label: &'static str,
    total: usize,
    last: Mutex<Instant>,
}

impl Progress {
    fn new(label: &'static str, total: usize) -> Self {
        Progress { label, total, last: Mutex::new(Instant::now()) }
    }

    fn tick(&self, done: usize) {
        let mut last = self.last.lock().expect("progress lock");
        if last.elapsed() >= Duration::from_secs(1) {
            *last = Instant::now();
            eprintln!("{{\"progress\":\"{}\",\"done\":{},\"total\":{}}}", self.label, done, self.total);
        }
    }
}

/// Worker count from `POLAR_THREADS`, defaulting to the available cores.
pub fn thread_count() -> usize {
    std::env::var(THREADS_VAR)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&t| t > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Splits `0..total` into contiguous blocks of at most `block` items, runs
/// them on `threads` workers and returns the results in block order.
fn parallel_blocks<T, F>(total: usize, block: usize, threads: usize, work: F) -> Vec<T>
where
    T: Send,
    F: Fn(Range<usize>) -> T + Sync,
{
    let blocks: Vec<Range<usize>> = (0..total).step_by(block.max(1)).map(|s| s..(s + block).min(total)).collect();
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<T>>> = blocks.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..threads.clamp(1, blocks.len().max(1)) {
            scope.spawn(|| loop {
                let b = next.fetch_add(1, Ordering::Relaxed);
                let Some(r) = blocks.get(b) else { break };
                let out = work(r.clone());
                *slots[b].lock().expect("slot lock") = Some(out);
            });
        }
    });
    slots.into_iter().map(|s| s.into_inner().expect("slot lock").expect("every block ran")).collect()
}

/// Result of `analyze-kernel`.
#[derive(Debug, Serialize)]
pub struct KernelReport {
    pub q: usize,
    pub linear: bool,
    #[serde(flatten)]
    pub profile: KernelProfile,
    pub certified: bool,
    pub certificate: Certificate,
}

pub fn analyze_kernel(kernel: &Kernel) -> Result<KernelReport, HarnessError> {
    let certificate = kernel.check_polarization()?;
    Ok(KernelReport {
        q: kernel.q(),
        linear: kernel.is_linear(),
        profile: kernel.partial_distances()?,
        certified: certificate.is_certified(),
        certificate,
    })
}

pub fn run_construct(cfg: &ConstructConfig) -> Result<CodeFile, HarnessError> {
    let result: ConstructionResult = match cfg.method {
        Method::De => construct(&cfg.channel, cfg.n, cfg.count, &cfg.grid)?,
        Method::BecHeuristic => heuristic_bec_construct(&cfg.channel, cfg.n, cfg.count)?,
        Method::MonteCarlo => {
            let seed = cfg.seed.ok_or_else(|| usage("--seed is required for the monte-carlo method"))?;
            monte_carlo_construct(&cfg.channel, cfg.n, cfg.count, cfg.trials, seed)?
        }
    };
    Ok(CodeFile {
        n: cfg.n,
        channel: cfg.channel_spec.clone(),
        grid: (cfg.method == Method::De).then(|| cfg.grid.params()),
        frozen: result.frozen,
        pe_per_index: cfg.with_pe.then_some(result.pe_per_index),
        union_bound: result.union_bound,
        kernel: Some("arikan".into()),
        frozen_values: None,
        method: Some(cfg.method.name().into()),
        rate: Some(cfg.count as f64 / (1u64 << cfg.n) as f64),
    })
}

pub fn run_simulate(code: &PolarCode, w: &Dmc, trials: usize, seed: u64, threads: usize) -> Result<FerResult, HarnessError> {
    check_trials(trials)?;
    let progress = Progress::new("simulate", trials);
    let done = AtomicUsize::new(0);
    let parts = parallel_blocks(trials, 256, threads, |r| {
        let len = r.len();
        let c = simulate_trials(code, w, r, seed);
        progress.tick(done.fetch_add(len, Ordering::Relaxed) + len);
        c
    });
    let mut counts = ErrorCounts::default();
    for p in parts {
        counts += p?;
    }
    Ok(FerResult::from_counts(trials, code.info_indices().len(), counts))
}

/// One row of the `fig2` sweep output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fig2Row {
    pub rate: f64,
    pub method: &'static str,
    pub fer: f64,
    pub ci: f64,
    pub union_bound: f64,
    pub frame_errors: usize,
    pub trials: usize,
}

/// DE versus BEC-heuristic construction, simulated with shared genie runs.
///
/// Each trial sends a uniformly random input word (so frozen values are
/// random too) through genie-aided SC and records at which positions the
/// genie decision is wrong. SC decoding of a code fails exactly when one of
/// its information positions is among them, so one genie run scores every
/// rate and method at once. The union bound column is the sum of the
/// density-evolution error probabilities over each information set.
pub fn run_fig2(cfg: &Fig2Config, threads: usize) -> Result<Vec<Fig2Row>, HarnessError> {
    check_depth(cfg.n)?;
    check_trials(cfg.trials)?;
    let size = 1usize << cfg.n;
    let (pe_de, _) = evolve_all(&cfg.channel, cfg.n, &cfg.grid)?;
    let eps = 1.0 - cfg.channel.capacity();
    let pe_heur: Vec<f64> = bec_ladder(eps, cfg.n).into_iter().map(|e| e / 2.0).collect();
    let mut configs: Vec<(f64, &'static str, Vec<bool>, f64)> = Vec::new();
    for &rate in &cfg.rates {
        let count = count_from_rate(rate, cfg.n)?;
        for (name, pe) in [("de", &pe_de), ("bec-heuristic", &pe_heur)] {
            let (info, _) = select(pe, count)?;
            let mut mask = vec![false; size];
            info.iter().for_each(|&i| mask[i] = true);
            let ub = info.iter().map(|&i| pe_de[i]).sum();
            configs.push((rate, name, mask, ub));
        }
    }
    let progress = Progress::new("fig2", cfg.trials);
    let done = AtomicUsize::new(0);
    let parts = parallel_blocks(cfg.trials, 64, threads, |r| {
        let mut genie = GenieSc::new(&cfg.channel, cfg.n);
        let mut errors = vec![0usize; configs.len()];
        let mut u = vec![0usize; size];
        let mut wrong = Vec::new();
        let len = r.len();
        for t in r {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(t as u64);
            for chunk in u.chunks_mut(64) {
                let bits = rng.next_u64();
                for (j, b) in chunk.iter_mut().enumerate() {
                    *b = (bits >> j & 1) as usize;
                }
            }
            let llrs = genie.run(&u, &mut rng);
            wrong.clear();
            wrong.extend((0..size).filter(|&i| usize::from(llr_decision(llrs[i])) != u[i]));
            for (e, (_, _, mask, _)) in errors.iter_mut().zip(&configs) {
                *e += usize::from(wrong.iter().any(|&i| mask[i]));
            }
        }
        progress.tick(done.fetch_add(len, Ordering::Relaxed) + len);
        errors
    });
    let mut totals = vec![0usize; configs.len()];
    for p in parts {
        totals.iter_mut().zip(p).for_each(|(t, e)| *t += e);
    }
    Ok(configs
        .into_iter()
        .zip(totals)
        .map(|((rate, method, _, union_bound), frame_errors)| {
            let fer = frame_errors as f64 / cfg.trials as f64;
            Fig2Row { rate, method, fer, ci: wald_half_width(fer, cfg.trials), union_bound, frame_errors, trials: cfg.trials }
        })
        .collect())
}

fn csv_float(x: f64) -> String {
    format!("{x:e}")
}

fn write_output(path: Option<&Path>, data: &str) -> Result<(), HarnessError> {
    match path {
        Some(p) => std::fs::write(p, data).map_err(|e| io_err(p, e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(data.as_bytes()).and_then(|_| out.flush()).map_err(|e| io_err(Path::new("<stdout>"), e))
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

/// Runs a validated command, writing its data output.
pub fn dispatch(cfg: RunConfig) -> Result<(), HarnessError> {
    let threads = thread_count();
    match cfg {
        RunConfig::AnalyzeKernel { kernel, output } => write_output(output.as_deref(), &to_json(&analyze_kernel(&kernel)?)),
        RunConfig::Construct(c) => write_output(c.output.as_deref(), &to_json(&run_construct(&c)?)),
        RunConfig::Simulate { code, channel, trials, seed, output } => {
            let r = run_simulate(&code, &channel, trials, seed, threads)?;
            let data = format!(
                "rate,trials,fer,ber,ci\n{},{},{},{},{}\n",
                code.rate(),
                r.trials,
                csv_float(r.fer),
                csv_float(r.ber),
                csv_float(r.ci)
            );
            write_output(output.as_deref(), &data)
        }
        RunConfig::Polarize { kernel, scaling, report, output } => {
            let r = scaling_experiment(&kernel, &scaling)?;
            let mut data = String::from("t,threshold,empirical,target,ci\n");
            for row in &r.rows {
                let label = match (row.t, row.beta) {
                    (Some(t), _) => t.to_string(),
                    (None, Some(b)) => format!("beta:{b}"),
                    (None, None) => String::new(),
                };
                data.push_str(&format!(
                    "{label},{},{},{},{}\n",
                    row.threshold,
                    csv_float(row.empirical),
                    csv_float(row.target),
                    csv_float(row.ci)
                ));
            }
            if let Some(p) = report {
                write_output(Some(&p), &to_json(&r))?;
            }
            write_output(output.as_deref(), &data)
        }
        RunConfig::Fig2(c) => {
            let rows = run_fig2(&c, threads)?;
            let mut data = String::from("rate,method,fer,ci,union_bound\n");
            for r in rows {
                data.push_str(&format!("{},{},{},{},{}\n", r.rate, r.method, csv_float(r.fer), csv_float(r.ci), csv_float(r.union_bound)));
            }
            write_output(c.output.as_deref(), &data)
        }
        RunConfig::OracleSubchannel { channel, kernel, path, merge, output } => {
            let w = iterate_subchannel(&channel, &kernel, &path, merge)?;
            let mut s = w.to_json();
            s.push('\n');
            write_output(output.as_deref(), &s)
        }
    }
}

/// Parses arguments, validates and dispatches; the exit status is nonzero
/// on any error.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return ExitCode::from(code.clamp(0, 255) as u8);
        }
    };
    match RunConfig::try_from(cli.command).and_then(dispatch) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if matches!(e, HarnessError::Usage(_)) { 2 } else { 1 })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("0.25:0.45:0.025").unwrap().len(), 9);
        assert_eq!(parse_range("0.25:0.45:0.025").unwrap()[2], 0.3);
        assert_eq!(parse_range("-1:1:1").unwrap(), vec![-1.0, 0.0, 1.0]);
        assert!(parse_range("1:0:1").is_err());
        assert!(parse_range("0:1:0").is_err());
        assert!(parse_range("0:1").is_err());
    }

    #[test]
    fn construct_example() {
        let cli = Cli::try_parse_from(["polar", "construct", "--channel", "bec:0.5", "--n", "2", "--rate", "0.25"]).unwrap();
        let RunConfig::Construct(c) = RunConfig::try_from(cli.command).unwrap() else { panic!() };
        assert_eq!(run_construct(&c).unwrap().frozen, vec![0, 1, 2]);
    }

    #[test]
    fn parallel_blocks_keep_order() {
        let out = parallel_blocks(10, 3, 4, |r| r.start);
        assert_eq!(out, vec![0, 3, 6, 9]);
    }

    #[test]
    fn unknown_flag_is_rejected() {
        assert!(Cli::try_parse_from(["polar", "construct", "--bogus"]).is_err());
        assert!(Cli::try_parse_from(["polar", "frobnicate"]).is_err());
    }

    #[test]
    fn fig2_small_is_deterministic() {
        let cfg = Fig2Config {
            channel: Dmc::bsc(0.11).unwrap(),
            n: 6,
            rates: vec![0.25, 0.5],
            trials: 300,
            seed: 4,
            grid: Grid::standard(),
            output: None,
        };
        let a = run_fig2(&cfg, 1).unwrap();
        assert_eq!(a, run_fig2(&cfg, 3).unwrap());
        assert_eq!(a.len(), 4);
        assert!(a.iter().all(|r| r.fer <= 1.0));
    }
}
