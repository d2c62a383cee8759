//! `megflood` command line.
//!
//! Exit codes: 0 success, 1 lemma violation, 2 invalid flags or config,
//! 3 flooding timeout (trace still written), 130 interrupted sweep.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::experiments::{fit_scaling, run_sweep_until, write_sweep_csv, RhoRule, SweepSpec};
use crate::flooding::{
    build_analysis_grid, flood, FloodOptions, Source, DEFAULT_ETA, DEFAULT_GAMMA,
};
use crate::geometry::connected_components;
use crate::lemmas::{
    verify_almost_increasing, verify_boundary_lemma, verify_boundary_sampled,
    verify_spreading_lemma, AlmostIncreasingSpec, LemmaReport, EXHAUSTIVE_BOUNDARY_MAX_M,
};
use crate::mobility::{move_offsets, StationarySampler, WorldConfig};
use crate::rng::{rng_from_seed, trial_seed};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_TIMEOUT: i32 = 3;
pub const EXIT_INTERRUPTED: i32 = 130;

#[derive(Debug, Parser)]
#[command(
    name = "megflood",
    version,
    about = "Flooding on geometric Markovian evolving graphs"
)]
pub struct Cli {
    /// Log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one flooding trial and write its per-step trace as CSV.
    Flood(FloodArgs),
    /// Run a parameter sweep described by a JSON config.
    Sweep(SweepArgs),
    /// Check the boundary, spreading-time and almost-increasing lemmas.
    Verify(VerifyArgs),
    /// Component statistics of independent stationary snapshots.
    SnapshotStats(SnapshotArgs),
}

#[derive(Debug, Args)]
struct FloodArgs {
    #[arg(long)]
    n: usize,
    /// Move radius.
    #[arg(
        long,
        conflicts_with = "rho_rule",
        required_unless_present = "rho_rule"
    )]
    rho: Option<f64>,
    /// Move radius as a rule: a number, `c*sqrt(log n)` or `c*sqrt(n)`.
    #[arg(long)]
    rho_rule: Option<String>,
    /// Transmission radius.
    #[arg(long)]
    r: f64,
    #[arg(long, default_value_t = 1.0)]
    epsilon: f64,
    #[arg(long, env = "MEGFLOOD_SEED", default_value_t = 0)]
    seed: u64,
    /// Source node id (0-based); uniformly random when omitted.
    #[arg(long)]
    source: Option<usize>,
    /// Defaults to ceil(50*(sqrt(n)/rho + log2 n)).
    #[arg(long)]
    max_steps: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_GAMMA)]
    gamma: f64,
    #[arg(long, default_value_t = DEFAULT_ETA)]
    eta: f64,
    /// Record the largest-component fraction every K steps.
    #[arg(long, value_name = "K")]
    components_every: Option<u64>,
    /// Trace CSV path; stdout when omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    /// Sweep CSV path; stdout when omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Worker threads. Output does not depend on this.
    #[arg(long, default_value_t = default_jobs())]
    jobs: usize,
    /// Override the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Print the scaling fit to stderr.
    #[arg(long)]
    fit: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LemmaChoice {
    Boundary,
    Spreading,
    AlmostIncreasing,
    All,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = LemmaChoice::All)]
    lemma: LemmaChoice,
    /// Grid side for the boundary lemma; exhaustive up to 4, sampled above.
    #[arg(long, default_value_t = 4)]
    m: usize,
    /// Random subsets for sampled boundary checks.
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    #[arg(long, default_value_t = 10_000)]
    kmax: u64,
    /// Monte Carlo trials per t for the almost-increasing lemma.
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, env = "MEGFLOOD_SEED", default_value_t = 0)]
    seed: u64,
    /// One JSON object per lemma instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct SnapshotArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    r: f64,
    /// Move radius; shapes the stationary law near the walls.
    #[arg(long, default_value_t = 1.0)]
    rho: f64,
    #[arg(long, default_value_t = 1.0)]
    epsilon: f64,
    #[arg(long, default_value_t = 10)]
    samples: u64,
    #[arg(long, env = "MEGFLOOD_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

fn default_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Entry point for the binary.
pub fn main() -> ! {
    let stdout = io::stdout();
    let stderr = io::stderr();
    let code = run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock());
    std::process::exit(code)
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return EXIT_USAGE;
            }
            let _ = write!(out, "{}", e.render());
            return EXIT_OK;
        }
    };
    init_logging(cli.verbose);
    let result = match cli.command {
        Command::Flood(a) => cmd_flood(&a, out, err),
        Command::Sweep(a) => cmd_sweep(&a, out, err),
        Command::Verify(a) => cmd_verify(&a, out),
        Command::SnapshotStats(a) => cmd_snapshot_stats(&a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new().filter_level(level).try_init();
}

fn with_output<F>(path: Option<&Path>, out: &mut dyn Write, f: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            f(&mut w)?;
            w.flush()?;
            Ok(())
        }
        None => f(out),
    }
}

fn cmd_flood(a: &FloodArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let rho = match (&a.rho_rule, a.rho) {
        (Some(rule), _) => rule.parse::<RhoRule>()?.eval(a.n),
        (None, Some(rho)) => rho,
        (None, None) => unreachable!("clap requires one of --rho/--rho-rule"),
    };
    let world = WorldConfig::with_epsilon(a.n, a.epsilon, rho, a.r)?;
    let source = match a.source {
        Some(id) if id >= a.n => {
            return Err(Error::InvalidConfig(format!(
                "source {id} out of range for n = {}",
                a.n
            )))
        }
        Some(id) => Source::Node(id),
        None => Source::UniformRandom,
    };
    let analysis = match build_analysis_grid(&world, a.gamma, a.eta) {
        Ok(an) => Some(an),
        Err(Error::DegenerateGeometry(why)) => {
            log::warn!("instrumentation disabled: {why}");
            None
        }
        Err(e) => return Err(e),
    };
    let mut opts = FloodOptions::for_world(&world);
    if let Some(m) = a.max_steps {
        if m == 0 {
            return Err(Error::InvalidConfig("max-steps must be at least 1".into()));
        }
        opts.max_steps = m;
    }
    opts.component_every = a.components_every;
    let trace = flood(
        &world,
        analysis.as_ref(),
        source,
        rng_from_seed(a.seed),
        &opts,
    );
    with_output(a.output.as_deref(), out, |w| trace.write_csv(w))?;
    writeln!(err, "{}", trace.summary_line())?;
    Ok(if trace.timed_out() {
        EXIT_TIMEOUT
    } else {
        EXIT_OK
    })
}

fn cmd_sweep(a: &SweepArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let text = std::fs::read_to_string(&a.config)
        .map_err(|e| Error::InvalidConfig(format!("{}: {e}", a.config.display())))?;
    let mut spec = SweepSpec::from_json(&text)?;
    if let Some(s) = a.seed {
        spec.master_seed = s;
    }
    let cancel = Arc::new(AtomicBool::new(false));
    {
        let c = Arc::clone(&cancel);
        // Only the first sweep in a process can install the handler.
        let _ = ctrlc::set_handler(move || c.store(true, Ordering::Relaxed));
    }
    let outcome = run_sweep_until(&spec, a.jobs, &cancel)?;
    with_output(a.output.as_deref(), out, |w| {
        write_sweep_csv(&outcome.results, w)
    })?;
    if a.fit {
        match fit_scaling(&outcome.results) {
            Ok(fit) => writeln!(
                err,
                "fit a={:.4} b={:.4} c={:.4} residual_ratio={:.4} growth_ratio={}",
                fit.a,
                fit.b,
                fit.c,
                fit.residual_ratio,
                fit.growth_ratio
                    .map_or("none".into(), |g| format!("{g:.4}"))
            )?,
            Err(e) => writeln!(err, "fit unavailable: {e}")?,
        }
    }
    if !outcome.complete {
        writeln!(
            err,
            "interrupted: wrote {} completed trials",
            outcome.results.len()
        )?;
        return Ok(EXIT_INTERRUPTED);
    }
    Ok(EXIT_OK)
}

fn cmd_verify(a: &VerifyArgs, out: &mut dyn Write) -> Result<i32> {
    let mut reports: Vec<LemmaReport> = Vec::new();
    let want = |l: LemmaChoice| a.lemma == l || a.lemma == LemmaChoice::All;
    if want(LemmaChoice::Boundary) {
        if a.m == 0 {
            return Err(Error::InvalidConfig("m must be at least 1".into()));
        }
        reports.push(if a.m <= EXHAUSTIVE_BOUNDARY_MAX_M {
            verify_boundary_lemma(a.m)?
        } else {
            verify_boundary_sampled(a.m, a.samples, a.seed, &mut rng_from_seed(a.seed))
        });
    }
    if want(LemmaChoice::Spreading) {
        if a.kmax == 0 {
            return Err(Error::InvalidConfig("kmax must be at least 1".into()));
        }
        let s = verify_spreading_lemma(a.kmax);
        if !a.json {
            writeln!(out, "spreading: max steps/(5 sqrt K) = {:.4}", s.max_ratio)?;
        }
        reports.push(s.report);
    }
    if want(LemmaChoice::AlmostIncreasing) {
        let spec = AlmostIncreasingSpec::new(2.0, 1.0 / 121.0, 1000, 0.01)?;
        let t0 = spec.min_t();
        let ts: Vec<u64> = (t0..t0 + 20).collect();
        let mut rng = rng_from_seed(a.seed);
        let (report, _) =
            verify_almost_increasing(&spec, &spec.adversarial(), &ts, a.trials, a.seed, &mut rng)?;
        reports.push(report);
    }
    for r in &reports {
        if a.json {
            writeln!(out, "{}", r.to_json())?;
        } else {
            writeln!(out, "{r}")?;
        }
    }
    Ok(if reports.iter().all(LemmaReport::passed) {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    })
}

fn cmd_snapshot_stats(a: &SnapshotArgs, out: &mut dyn Write) -> Result<i32> {
    let world = WorldConfig::with_epsilon(a.n, a.epsilon, a.rho, a.r)?;
    let sampler = StationarySampler::new(&world, &move_offsets(world.rho(), world.epsilon()));
    with_output(a.output.as_deref(), out, |w| {
        let mut csv = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(w);
        csv.write_record(["sample", "n", "r", "components", "largest", "max_comp_frac"])?;
        for k in 0..a.samples {
            let mut rng = rng_from_seed(trial_seed(a.seed, 0, k));
            let pos = sampler.sample_n(world.n(), &mut rng);
            let rep = connected_components(&pos, world.r(), &world);
            csv.write_record([
                k.to_string(),
                world.n().to_string(),
                world.r().to_string(),
                rep.count.to_string(),
                rep.largest().to_string(),
                rep.largest_fraction.to_string(),
            ])?;
        }
        csv.flush()?;
        Ok(())
    })?;
    Ok(EXIT_OK)
}
