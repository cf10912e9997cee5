//! Command-line front end: image filtering, stream ranking, clock traces and
//! frame-rate reporting.
//!
//! Exit status is 0 on success, 1 for invalid input or arguments and 2 when
//! a cross-check against the sort-based reference disagrees.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::engine::{drain_cycles, CycleInput, Engine};
use crate::ensembles::{Enables, Ensemble9753, CADENCE};
use crate::imaging::{
    filter_image_with, frame_rate, percentile_to_rank, BorderPolicy, EngineChoice, Execution,
    FilterOptions, Image, WindowShape,
};
use crate::multichannel::{McEngine, McParams};
use crate::oracle::{filter_image_oracle, select_desc};
use crate::params::{min_counter_bits, padded_width, FilterParams, Sample, DEFAULT_COUNTER_BITS};
use crate::pgm;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_MISMATCH: i32 = 2;

/// Reference clock for frame-rate reports.
pub const DEFAULT_CLOCK_HZ: f64 = 275e6;

#[derive(Debug, Parser)]
#[command(name = "rankpipe", version, about = "Cycle-accurate streaming rank and percentile filters")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Rank-filter a PGM image.
    Filter(FilterArgs),
    /// Select the M-th largest value of each N-sample set read as integers.
    Rank(RankArgs),
    /// Write a per-clock CSV trace of an engine run.
    Trace(TraceArgs),
    /// Print the frame-rate table, optionally backed by a simulated run.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
struct RankSel {
    /// Rank M, 1 = maximum.
    #[arg(long)]
    rank: Option<usize>,
    /// Fraction P in (0, 1]; M = ceil(P N).
    #[arg(long)]
    percentile: Option<f64>,
}

impl RankSel {
    fn resolve(&self, n: usize) -> anyhow::Result<usize> {
        match (self.rank, self.percentile) {
            (Some(m), _) => Ok(m),
            (_, Some(p)) => Ok(percentile_to_rank(p, n)?),
            _ => bail!("one of --rank or --percentile is required"),
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum EngineArg {
    Single,
    Multichannel,
    Sliding,
    #[value(name = "9753")]
    E9753,
}

impl From<EngineArg> for EngineChoice {
    fn from(e: EngineArg) -> Self {
        match e {
            EngineArg::Single => EngineChoice::Single,
            EngineArg::Multichannel => EngineChoice::MultiChannel,
            EngineArg::Sliding => EngineChoice::Sliding,
            EngineArg::E9753 => EngineChoice::Ensemble9753,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BorderArg {
    Clamp,
    Valid,
}

impl From<BorderArg> for BorderPolicy {
    fn from(b: BorderArg) -> Self {
        match b {
            BorderArg::Clamp => BorderPolicy::Clamp,
            BorderArg::Valid => BorderPolicy::ValidOnly,
        }
    }
}

#[derive(Debug, Args)]
struct FilterArgs {
    input: PathBuf,
    output: PathBuf,
    /// WxH, diamondD or custom=FILE (one "dx dy" pair per line).
    #[arg(long)]
    window: String,
    #[command(flatten)]
    rank: RankSel,
    #[arg(long, value_enum, default_value = "single")]
    engine: EngineArg,
    #[arg(long, value_enum, default_value = "clamp")]
    border: BorderArg,
    /// Reference clock in Hz for the frame-rate report.
    #[arg(long, default_value_t = DEFAULT_CLOCK_HZ)]
    clock: f64,
    /// Compare against the sort-based reference; exit 2 on any difference.
    #[arg(long)]
    check: bool,
    #[arg(long)]
    threads: Option<usize>,
    /// Accumulator width; defaults to the narrowest of at least 8 bits that fits.
    #[arg(long)]
    counter_bits: Option<u32>,
}

#[derive(Debug, Args)]
struct RankArgs {
    /// Whitespace-separated unsigned integers; stdin when absent or "-".
    input: Option<PathBuf>,
    #[arg(long, short = 'n')]
    set_size: usize,
    #[command(flatten)]
    rank: RankSel,
    /// Sample width; defaults to at least 8 bits, wider if the data needs it.
    #[arg(long)]
    bits: Option<u32>,
    #[arg(long)]
    counter_bits: Option<u32>,
    /// Cross-check every result against the sort-based reference.
    #[arg(long)]
    check: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TraceMode {
    Single,
    Multichannel,
    #[value(name = "9753")]
    E9753,
}

#[derive(Debug, Args)]
struct TraceArgs {
    /// Whitespace-separated samples, column by column for multi-lane modes.
    input: Option<PathBuf>,
    /// Samples per set; ignored in 9753 mode.
    #[arg(long, short = 'n', default_value_t = 1)]
    set_size: usize,
    /// Rank for single and multichannel modes; defaults to the median.
    #[arg(long)]
    rank: Option<usize>,
    /// Comma-separated ranks of the 9, 7, 5 and 3 chains (9753 mode).
    #[arg(long, value_delimiter = ',')]
    ranks: Option<Vec<usize>>,
    #[arg(long, value_enum, default_value = "single")]
    mode: TraceMode,
    /// Lanes per clock in multichannel mode.
    #[arg(long, default_value_t = 1)]
    channels: usize,
    #[arg(long)]
    bits: Option<u32>,
    #[arg(long)]
    counter_bits: Option<u32>,
    /// CSV destination; stdout when absent.
    #[arg(long, short = 'o')]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 1024)]
    width: usize,
    #[arg(long, default_value_t = 768)]
    height: usize,
    /// Window shapes; repeatable. Defaults to 3x3 5x5 3x5 3x7 diamond5 diamond7.
    #[arg(long)]
    window: Vec<String>,
    #[arg(long, default_value_t = DEFAULT_CLOCK_HZ)]
    clock: f64,
    #[arg(long, value_enum, default_value = "single")]
    engine: EngineArg,
    /// Also simulate a scaled image and compare clock counts with the formula.
    #[arg(long)]
    simulate: bool,
    #[arg(long, default_value_t = 64)]
    sim_width: usize,
    #[arg(long, default_value_t = 48)]
    sim_height: usize,
}

/// A failed `--check` or clock-accounting comparison.
#[derive(Debug)]
struct Mismatch(String);

impl std::fmt::Display for Mismatch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "mismatch: {}", self.0)
    }
}

impl std::error::Error for Mismatch {}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Filter(a) => cmd_filter(&a, stdout),
        Command::Rank(a) => cmd_rank(&a, stdin, stdout),
        Command::Trace(a) => cmd_trace(&a, stdin, stdout),
        Command::Bench(a) => cmd_bench(&a, stdout),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e:#}");
            if e.is::<Mismatch>() {
                EXIT_MISMATCH
            } else {
                EXIT_INVALID
            }
        }
    }
}

fn parse_window(spec: &str) -> anyhow::Result<WindowShape> {
    if let Some(path) = spec.strip_prefix("custom=") {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
        return parse_custom(&text);
    }
    Ok(spec.parse()?)
}

/// One `dx dy` (or `dx,dy`) pair per line; `#` starts a comment.
fn parse_custom(text: &str) -> anyhow::Result<WindowShape> {
    let mut offsets = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let nums: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .collect();
        match nums.as_slice() {
            [dx, dy] => offsets.push((
                dx.parse().with_context(|| format!("line {}", i + 1))?,
                dy.parse().with_context(|| format!("line {}", i + 1))?,
            )),
            _ => bail!("line {}: expected 'dx dy'", i + 1),
        }
    }
    Ok(WindowShape::Custom(offsets))
}

fn read_input(path: Option<&Path>, stdin: &mut dyn Read) -> anyhow::Result<String> {
    let mut text = String::new();
    match path {
        Some(p) if p != Path::new("-") => {
            text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        }
        _ => {
            stdin.read_to_string(&mut text).context("reading stdin")?;
        }
    }
    Ok(text)
}

fn parse_samples(text: &str) -> anyhow::Result<Vec<u32>> {
    text.split_whitespace()
        .map(|t| {
            t.parse::<u32>()
                .map_err(|_| anyhow!("'{t}' is not an unsigned integer"))
        })
        .collect()
}

/// Requested width, or the narrowest even width of at least 8 bits holding `max`.
fn data_bits_for(requested: Option<u32>, max: u32) -> anyhow::Result<u32> {
    let needed = padded_width((32 - max.leading_zeros()).max(1))
        .map_err(|_| anyhow!("sample {max} exceeds 16 bits"))?;
    Ok(match requested {
        Some(b) => padded_width(b)?,
        None => needed.max(8),
    })
}

fn stream_params(
    n: usize,
    rank: usize,
    bits: u32,
    counter_bits: Option<u32>,
) -> anyhow::Result<FilterParams> {
    let c = counter_bits.unwrap_or_else(|| min_counter_bits(n, rank, DEFAULT_COUNTER_BITS));
    Ok(FilterParams::new(1, 1)?
        .with_counter_bits(c)?
        .with_data_bits(bits)?
        .with_set(n, rank)?)
}

fn checked_samples(params: &FilterParams, raw: &[u32]) -> anyhow::Result<Vec<Sample>> {
    Ok(raw
        .iter()
        .map(|&v| params.check_sample(v))
        .collect::<crate::Result<Vec<_>>>()?)
}

fn with_threads<T: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> anyhow::Result<T> + Send,
) -> anyhow::Result<T> {
    match threads {
        #[cfg(feature = "parallel")]
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .context("building thread pool")?
            .install(f),
        _ => f(),
    }
}

fn cmd_filter(a: &FilterArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    if a.clock.is_nan() || a.clock <= 0.0 {
        bail!("clock must be positive");
    }
    let bytes = std::fs::read(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let format = pgm::detect_format(&bytes).unwrap_or_default();
    let img = pgm::decode(&bytes)?;
    let shape = parse_window(&a.window)?;
    let n = shape.size()?;
    let rank = a.rank.resolve(n)?;
    let engine = EngineChoice::from(a.engine);
    let border = BorderPolicy::from(a.border);
    let opts = FilterOptions {
        counter_bits: a.counter_bits,
        execution: if a.threads == Some(1) {
            Execution::Sequential
        } else {
            Execution::Parallel
        },
        ..FilterOptions::default()
    };
    let outcome = with_threads(a.threads, || {
        Ok(filter_image_with(&img, &shape, rank, engine, border, &opts)?)
    })?;
    let fps = frame_rate(
        a.clock,
        img.width(),
        img.height(),
        engine.cycles_per_result(&shape)? as f64,
    );
    writeln!(
        out,
        "window {shape} N={n} M={rank} engine={engine} border={}",
        border_name(border)
    )?;
    writeln!(
        out,
        "simulated cycles: {} ({} bands)",
        outcome.cycles, outcome.bands
    )?;
    writeln!(
        out,
        "frame rate at {:.0} MHz: {:.1} fps for {}x{}",
        a.clock / 1e6,
        fps,
        img.width(),
        img.height()
    )?;
    if a.check {
        let reference = filter_image_oracle(&img, &shape, rank, border)?;
        if reference != outcome.image {
            let diff = reference
                .pixels()
                .iter()
                .zip(outcome.image.pixels())
                .filter(|(r, o)| r != o)
                .count();
            return Err(Mismatch(format!("{diff} pixels differ from the reference")).into());
        }
        writeln!(out, "check: output matches reference")?;
    }
    std::fs::write(&a.output, pgm::encode(&outcome.image, format))
        .with_context(|| format!("writing {}", a.output.display()))?;
    Ok(())
}

fn border_name(b: BorderPolicy) -> &'static str {
    match b {
        BorderPolicy::Clamp => "clamp",
        BorderPolicy::ValidOnly => "valid",
    }
}

fn cmd_rank(a: &RankArgs, stdin: &mut dyn Read, out: &mut dyn Write) -> anyhow::Result<()> {
    let raw = parse_samples(&read_input(a.input.as_deref(), stdin)?)?;
    let n = a.set_size;
    let rank = a.rank.resolve(n.max(1))?;
    let bits = data_bits_for(a.bits, raw.iter().copied().max().unwrap_or(0))?;
    let params = stream_params(n, rank, bits, a.counter_bits)?;
    let data = checked_samples(&params, &raw)?;
    let results = crate::engine::run_stream(params, &data)?;
    for r in &results {
        writeln!(out, "{r}")?;
    }
    if a.check {
        for (i, (set, &r)) in data.chunks(n).zip(&results).enumerate() {
            let expected = select_desc(set, rank)?;
            if expected != r {
                return Err(Mismatch(format!("set {i}: engine {r}, reference {expected}")).into());
            }
        }
    }
    Ok(())
}

fn cmd_trace(a: &TraceArgs, stdin: &mut dyn Read, out: &mut dyn Write) -> anyhow::Result<()> {
    let raw = parse_samples(&read_input(a.input.as_deref(), stdin)?)?;
    let bits = data_bits_for(a.bits, raw.iter().copied().max().unwrap_or(0))?;
    let csv = match a.mode {
        TraceMode::Single => {
            let rank = a.rank.unwrap_or(a.set_size.div_ceil(2));
            let params = stream_params(a.set_size, rank, bits, a.counter_bits)?;
            let data = checked_samples(&params, &raw)?;
            trace_single(params, &data)?
        }
        TraceMode::Multichannel => {
            let k = a.channels;
            if k == 0 || !a.set_size.is_multiple_of(k) {
                bail!("set size {} is not a multiple of {k} channels", a.set_size);
            }
            let rank = a.rank.unwrap_or(a.set_size.div_ceil(2));
            let params = stream_params(a.set_size, rank, bits, a.counter_bits)?;
            let data = checked_samples(&params, &raw)?;
            trace_multichannel(McParams::with_filter(k, a.set_size / k, params)?, &data)?
        }
        TraceMode::E9753 => {
            let ranks: [usize; 4] = match &a.ranks {
                Some(r) => r
                    .as_slice()
                    .try_into()
                    .map_err(|_| anyhow!("--ranks needs exactly four values"))?,
                None => [41, 25, 13, 5],
            };
            let c = a.counter_bits.unwrap_or_else(|| {
                [9, 7, 5, 3]
                    .iter()
                    .zip(ranks)
                    .map(|(&w, m)| min_counter_bits(CADENCE * w, m, DEFAULT_COUNTER_BITS))
                    .max()
                    .unwrap_or(DEFAULT_COUNTER_BITS)
            });
            let base = stream_params(1, 1, bits, Some(c))?;
            let data = checked_samples(&base, &raw)?;
            trace_9753(Ensemble9753::with_base(base, ranks)?, &data)?
        }
    };
    match &a.out {
        Some(path) => std::fs::write(path, csv).with_context(|| format!("writing {}", path.display()))?,
        None => out.write_all(csv.as_bytes())?,
    }
    Ok(())
}

fn csv_header(lanes: usize, enables: bool) -> String {
    let mut h = String::from("cycle,d1st");
    (0..lanes).for_each(|i| write!(h, ",din{i}").unwrap());
    h.push_str(",dv");
    (0..lanes).for_each(|i| write!(h, ",dout{i}").unwrap());
    h.push_str(",result");
    if enables {
        h.push_str(",en7,en5,en3");
    }
    h.push('\n');
    h
}

fn csv_row(cycle: usize, d1st: bool, din: &[Sample], dv: bool, dout: &[Sample], result: &str) -> String {
    let mut r = format!("{cycle},{}", d1st as u8);
    din.iter().for_each(|x| write!(r, ",{x}").unwrap());
    write!(r, ",{}", dv as u8).unwrap();
    dout.iter().for_each(|x| write!(r, ",{x}").unwrap());
    write!(r, ",{result}").unwrap();
    r
}

/// One CSV row per clock of a single-channel run, drain included.
pub fn trace_single(params: FilterParams, data: &[Sample]) -> crate::Result<String> {
    let n = params.set_size();
    if !data.len().is_multiple_of(n) {
        return Err(crate::Error::StreamLength {
            len: data.len(),
            set_size: n,
        });
    }
    let mut engine = Engine::new(params)?;
    let mut csv = csv_header(1, false);
    let inputs = data
        .iter()
        .enumerate()
        .map(|(i, &din)| CycleInput { din, d1st: i % n == 0 })
        .chain(std::iter::repeat_n(CycleInput::default(), drain_cycles(&params)));
    for (cycle, input) in inputs.enumerate() {
        let o = engine.clock(input)?;
        let result = if o.dv { o.result.to_string() } else { String::new() };
        csv += &csv_row(cycle, input.d1st, &[input.din], o.dv, &[o.dout], &result);
        csv.push('\n');
    }
    Ok(csv)
}

/// CSV trace of a K-lane run; `data` holds K samples per clock.
pub fn trace_multichannel(params: McParams, data: &[Sample]) -> crate::Result<String> {
    let k = params.channels();
    let window = k * params.columns();
    if !data.len().is_multiple_of(window) {
        return Err(crate::Error::StreamLength {
            len: data.len(),
            set_size: window,
        });
    }
    let mut engine = McEngine::new(params)?;
    let mut csv = csv_header(k, false);
    let idle = vec![0; k];
    let columns = data
        .chunks(k)
        .enumerate()
        .map(|(i, c)| (c, i % params.columns() == 0))
        .chain(std::iter::repeat_n((idle.as_slice(), false), params.drain_cycles()));
    for (cycle, (col, d1st)) in columns.enumerate() {
        let o = engine.clock(col, d1st)?;
        let result = if o.dv { o.result.to_string() } else { String::new() };
        csv += &csv_row(cycle, d1st, col, o.dv, &o.dout, &result);
        csv.push('\n');
    }
    Ok(csv)
}

/// CSV trace of the 9753 ensemble. The result field lists the 9x9, 7x7,
/// 5x5 and 3x3 results separated by `/`.
pub fn trace_9753(mut ens: Ensemble9753, data: &[Sample]) -> crate::Result<String> {
    if !data.len().is_multiple_of(CADENCE * CADENCE) {
        return Err(crate::Error::StreamLength {
            len: data.len(),
            set_size: CADENCE * CADENCE,
        });
    }
    let mut csv = csv_header(CADENCE, true);
    let idle = vec![0; CADENCE];
    let drain = ens.drain_cycles();
    let columns = data
        .chunks(CADENCE)
        .enumerate()
        .map(|(i, c)| (c, i % CADENCE == 0))
        .chain(std::iter::repeat_n((idle.as_slice(), false), drain));
    for (cycle, (col, d1st)) in columns.enumerate() {
        let o = ens.clock(col, d1st)?;
        let result = match o.medians() {
            Some(r) => r.map(|v| v.to_string()).join("/"),
            None => String::new(),
        };
        let Enables { en7, en5, en3 } = o.enables;
        csv += &csv_row(cycle, d1st, col, o.dv, &o.dout, &result);
        writeln!(csv, ",{},{},{}", en7 as u8, en5 as u8, en3 as u8).unwrap();
    }
    Ok(csv)
}

const TABLE_SHAPES: [&str; 6] = ["3x3", "5x5", "3x5", "3x7", "diamond5", "diamond7"];

/// Truncates to one decimal place, the precision of the printed table.
fn one_decimal(x: f64) -> f64 {
    (x * 10.0).floor() / 10.0
}

fn cmd_bench(a: &BenchArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    if a.width == 0 || a.height == 0 {
        bail!("image must have a nonzero area");
    }
    if a.simulate && (a.sim_width == 0 || a.sim_height == 0) {
        bail!("simulated image must have a nonzero area");
    }
    if a.clock.is_nan() || a.clock <= 0.0 {
        bail!("clock must be positive");
    }
    let engine = EngineChoice::from(a.engine);
    let shapes: Vec<String> = if a.window.is_empty() {
        TABLE_SHAPES.iter().map(|s| s.to_string()).collect()
    } else {
        a.window.clone()
    };
    writeln!(
        out,
        "engine {engine}, {}x{} image, {:.0} MHz clock",
        a.width,
        a.height,
        a.clock / 1e6
    )?;
    writeln!(out, "{:<10} {:>4} {:>14} {:>10}", "window", "N", "cycles/result", "fps")?;
    let mut rows = Vec::new();
    for spec in &shapes {
        let shape = parse_window(spec)?;
        let n = shape.size()?;
        let cpr = engine.cycles_per_result(&shape)?;
        let fps = frame_rate(a.clock, a.width, a.height, cpr as f64);
        writeln!(out, "{:<10} {n:>4} {cpr:>14} {:>10.1}", shape.to_string(), one_decimal(fps))?;
        rows.push((shape, n, cpr));
    }
    if a.simulate {
        writeln!(out)?;
        writeln!(
            out,
            "simulated {}x{} image ({engine}):",
            a.sim_width, a.sim_height
        )?;
        writeln!(
            out,
            "{:<10} {:>10} {:>10} {:>14} {:>10}",
            "window", "cycles", "overhead", "cycles/result", "fps"
        )?;
        for (shape, n, cpr) in rows {
            let sim = simulate(engine, &shape, a.sim_width, a.sim_height)?;
            let pixels = (a.sim_width * a.sim_height) as u64;
            let overhead = sim.cycles as i64 - (pixels * cpr as u64) as i64;
            if overhead != sim.expected_overhead as i64 {
                return Err(Mismatch(format!(
                    "{shape}: {} simulated cycles, expected {} + {}",
                    sim.cycles,
                    pixels * cpr as u64,
                    sim.expected_overhead
                ))
                .into());
            }
            let measured = (sim.cycles - sim.expected_overhead) as f64 / pixels as f64;
            let fps = frame_rate(a.clock, a.width, a.height, measured);
            writeln!(
                out,
                "{:<10} {:>10} {:>10} {:>14.3} {:>10.1}",
                shape.to_string(),
                sim.cycles,
                overhead,
                measured,
                one_decimal(fps)
            )?;
            let _ = n;
        }
    }
    Ok(())
}

/// Clock count of a scaled run and the overhead the engine's drain predicts.
pub struct Simulation {
    pub cycles: u64,
    pub expected_overhead: u64,
}

/// Filters a pseudo-random `width x height` image as one band and reports
/// its clock count.
pub fn simulate(
    engine: EngineChoice,
    shape: &WindowShape,
    width: usize,
    height: usize,
) -> crate::Result<Simulation> {
    let mut state = 0x2545_f491_4f6c_dd1du64;
    let img = Image::from_fn(width, height, 255, |_, _| {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state % 256) as Sample
    })?;
    let n = shape.size()?;
    let rank = percentile_to_rank(0.5, n)?;
    let opts = FilterOptions {
        execution: Execution::Sequential,
        band_rows: height,
        ..FilterOptions::default()
    };
    let outcome = filter_image_with(&img, shape, rank, engine, BorderPolicy::Clamp, &opts)?;
    let base = FilterParams::new(1, 1)?;
    let latency = base.pipe_latency();
    let stages = base.stages();
    let expected_overhead = match engine {
        EngineChoice::Single => {
            let c = min_counter_bits(n, rank, DEFAULT_COUNTER_BITS);
            drain_cycles(&base.with_counter_bits(c)?.with_set(n, rank)?)
        }
        EngineChoice::MultiChannel | EngineChoice::Ensemble9753 => {
            let cols = engine.cycles_per_result(shape)?;
            (stages - 1) * (cols + latency) + latency
        }
        EngineChoice::Sliding => {
            // Each row streams W - 1 extra edge columns, then drains.
            let w = shape.square_side().unwrap_or(1);
            height * (w - 1 + stages * (w + latency) - w)
        }
    } as u64;
    Ok(Simulation {
        cycles: outcome.cycles,
        expected_overhead,
    })
}
