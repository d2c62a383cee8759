//! Seeded multi-trial experiments: single trials, parameter sweeps with CSV
//! output, and the least-squares scaling fit of flooding time against
//! `a·√n/ρ + b·log₂ n + c`.
//!
//! # Sweep configuration
//!
//! A sweep is described by a JSON object:
//!
//! ```json
//! {
//!   "points": [
//!     { "n": 4096, "rho": "4*sqrt(log n)", "r": 2.0 },
//!     { "n": 9216, "rho": 12, "r": 2.0, "epsilon": 1.0 }
//!   ],
//!   "trials": 20,
//!   "master_seed": 1,
//!   "record_components": false,
//!   "record_density": true,
//!   "max_steps": null,
//!   "max_steps_scale": 50.0,
//!   "gamma": 0.01,
//!   "eta": 0.01
//! }
//! ```
//!
//! Only `points`, `trials` and `master_seed` are required. `rho` is either a
//! number or one of `c*sqrt(log n)` (natural log), `c*sqrt(n)`; the `c*`
//! prefix is optional. `max_steps: null` means
//! `⌈max_steps_scale·(√n/ρ + log₂ n)⌉`.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::sync::atomic::{AtomicBool, Ordering};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flooding::{
    build_analysis_grid, flood, FloodOptions, Source, DEFAULT_ETA, DEFAULT_GAMMA,
};
use crate::mobility::WorldConfig;
use crate::rng::{rng_from_seed, trial_seed};

/// Move radius as a function of `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RhoRuleRepr", into = "String")]
pub enum RhoRule {
    Constant(f64),
    /// `c·√(ln n)`.
    SqrtLog(f64),
    /// `c·√n`.
    SqrtN(f64),
}

impl RhoRule {
    pub fn eval(&self, n: usize) -> f64 {
        let nf = n as f64;
        match *self {
            RhoRule::Constant(c) => c,
            RhoRule::SqrtLog(c) => c * nf.ln().sqrt(),
            RhoRule::SqrtN(c) => c * nf.sqrt(),
        }
    }
}

impl fmt::Display for RhoRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RhoRule::Constant(c) => write!(f, "{c}"),
            RhoRule::SqrtLog(c) => write!(f, "{c}*sqrt(log n)"),
            RhoRule::SqrtN(c) => write!(f, "{c}*sqrt(n)"),
        }
    }
}

impl FromStr for RhoRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || Error::InvalidConfig(format!("unrecognized rho rule {s:?}"));
        let (coef, func) = match compact.split_once('*') {
            Some((c, f)) => (c.parse::<f64>().map_err(|_| bad())?, f),
            None if compact.starts_with("sqrt") => (1.0, compact.as_str()),
            None => {
                return compact
                    .parse::<f64>()
                    .map(RhoRule::Constant)
                    .map_err(|_| bad())
            }
        };
        if !coef.is_finite() || coef < 0.0 {
            return Err(bad());
        }
        match func {
            "sqrt(logn)" | "sqrt(ln(n))" | "sqrt(log(n))" | "sqrt(lnn)" => {
                Ok(RhoRule::SqrtLog(coef))
            }
            "sqrt(n)" => Ok(RhoRule::SqrtN(coef)),
            _ => Err(bad()),
        }
    }
}

impl From<RhoRule> for String {
    fn from(r: RhoRule) -> String {
        r.to_string()
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RhoRuleRepr {
    Number(f64),
    Text(String),
}

impl TryFrom<RhoRuleRepr> for RhoRule {
    type Error = Error;

    fn try_from(r: RhoRuleRepr) -> Result<Self> {
        match r {
            RhoRuleRepr::Number(c) => Ok(RhoRule::Constant(c)),
            RhoRuleRepr::Text(s) => s.parse(),
        }
    }
}

fn one() -> f64 {
    1.0
}

fn fifty() -> f64 {
    50.0
}

fn yes() -> bool {
    true
}

fn default_gamma() -> f64 {
    DEFAULT_GAMMA
}

fn default_eta() -> f64 {
    DEFAULT_ETA
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepPoint {
    pub n: usize,
    pub rho: RhoRule,
    pub r: f64,
    #[serde(default = "one")]
    pub epsilon: f64,
}

impl SweepPoint {
    pub fn new(n: usize, rho: RhoRule, r: f64) -> Self {
        Self {
            n,
            rho,
            r,
            epsilon: 1.0,
        }
    }

    pub fn world(&self) -> Result<WorldConfig> {
        WorldConfig::with_epsilon(self.n, self.epsilon, self.rho.eval(self.n), self.r)
    }
}

/// Per-trial knobs shared by every point of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOptions {
    pub record_components: bool,
    pub record_density: bool,
    /// Fixed step budget; `None` scales with the expected flooding time.
    pub max_steps: Option<u64>,
    pub max_steps_scale: f64,
    pub gamma: f64,
    pub eta: f64,
}

impl Default for TrialOptions {
    fn default() -> Self {
        Self {
            record_components: false,
            record_density: true,
            max_steps: None,
            max_steps_scale: 50.0,
            gamma: DEFAULT_GAMMA,
            eta: DEFAULT_ETA,
        }
    }
}

/// `√n/ρ + log₂ n`, the shape of the expected flooding time. Uses `√n` in
/// place of `√n/ρ` when `ρ = 0`.
pub fn expected_time_shape(n: usize, rho: f64) -> f64 {
    let nf = n as f64;
    let lead = if rho > 0.0 {
        nf.sqrt() / rho
    } else {
        nf.sqrt()
    };
    lead + nf.log2()
}

impl TrialOptions {
    /// Step budget for one trial. Without movement flooding ends within
    /// `n − 1` steps or never, so `ρ = 0` gets a budget of `n`.
    pub fn max_steps_for(&self, n: usize, rho: f64) -> u64 {
        self.max_steps.unwrap_or_else(|| {
            if rho > 0.0 {
                ((self.max_steps_scale * expected_time_shape(n, rho)).ceil() as u64).max(1)
            } else {
                (n as u64).max(1)
            }
        })
    }

    /// Snapshot components are sampled every `⌈shape/10⌉` steps.
    pub fn component_interval(n: usize, rho: f64) -> u64 {
        ((expected_time_shape(n, rho) / 10.0).ceil() as u64).max(1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub points: Vec<SweepPoint>,
    pub trials: u32,
    pub master_seed: u64,
    #[serde(default)]
    pub record_components: bool,
    #[serde(default = "yes")]
    pub record_density: bool,
    #[serde(default)]
    pub max_steps: Option<u64>,
    #[serde(default = "fifty")]
    pub max_steps_scale: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_eta")]
    pub eta: f64,
}

impl SweepSpec {
    /// Spec with default trial options.
    pub fn new(points: Vec<SweepPoint>, trials: u32, master_seed: u64) -> Self {
        Self::with_options(points, trials, master_seed, &TrialOptions::default())
    }

    pub fn with_options(
        points: Vec<SweepPoint>,
        trials: u32,
        master_seed: u64,
        o: &TrialOptions,
    ) -> Self {
        Self {
            points,
            trials,
            master_seed,
            record_components: o.record_components,
            record_density: o.record_density,
            max_steps: o.max_steps,
            max_steps_scale: o.max_steps_scale,
            gamma: o.gamma,
            eta: o.eta,
        }
    }

    pub fn options(&self) -> TrialOptions {
        TrialOptions {
            record_components: self.record_components,
            record_density: self.record_density,
            max_steps: self.max_steps,
            max_steps_scale: self.max_steps_scale,
            gamma: self.gamma,
            eta: self.eta,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        for p in &self.points {
            p.world()?;
        }
        Ok(())
    }
}

/// Outcome of one flooding trial. Serializes to one sweep CSV row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialResult {
    pub n: usize,
    pub rho: f64,
    pub r: f64,
    pub seed: u64,
    pub flood_time: Option<u64>,
    pub timeout: bool,
    pub bootstrap_end: Option<u64>,
    pub spreading_end: Option<u64>,
    pub max_comp_frac_mean: Option<f64>,
    pub density_violations: Option<u64>,
}

pub const SWEEP_CSV_HEADER: [&str; 10] = [
    "n",
    "rho",
    "r",
    "seed",
    "flood_time",
    "timeout",
    "bootstrap_end",
    "spreading_end",
    "max_comp_frac_mean",
    "density_violations",
];

/// One instrumented flooding run. A point whose move radius admits no
/// supercell partition still runs, without phase markers or density counts.
pub fn run_trial(point: &SweepPoint, options: &TrialOptions, seed: u64) -> Result<TrialResult> {
    let world = point.world()?;
    let analysis = match build_analysis_grid(&world, options.gamma, options.eta) {
        Ok(a) => Some(a),
        Err(Error::DegenerateGeometry(why)) => {
            log::warn!(
                "n={} rho={}: instrumentation disabled: {why}",
                world.n(),
                world.rho()
            );
            None
        }
        Err(e) => return Err(e),
    };
    let flood_opts = FloodOptions {
        max_steps: options.max_steps_for(world.n(), world.rho()),
        component_every: options
            .record_components
            .then(|| TrialOptions::component_interval(world.n(), world.rho())),
    };
    let trace = flood(
        &world,
        analysis.as_ref(),
        Source::UniformRandom,
        rng_from_seed(seed),
        &flood_opts,
    );
    Ok(TrialResult {
        n: world.n(),
        rho: world.rho(),
        r: world.r(),
        seed,
        flood_time: trace.flooding_time,
        timeout: trace.timed_out(),
        bootstrap_end: trace.bootstrap_end,
        spreading_end: trace.spreading_end,
        max_comp_frac_mean: trace.mean_largest_component(),
        density_violations: if options.record_density {
            trace.density_violations()
        } else {
            None
        },
    })
}

/// Results of a sweep that may have been interrupted.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub results: Vec<TrialResult>,
    pub complete: bool,
}

/// All trials of `spec`, ordered by (point index, trial index).
pub fn run_sweep(spec: &SweepSpec, jobs: usize) -> Result<Vec<TrialResult>> {
    Ok(run_sweep_until(spec, jobs, &AtomicBool::new(false))?.results)
}

/// Like [`run_sweep`], but trials not yet started when `cancel` is raised
/// are skipped. Finished trials keep their order.
pub fn run_sweep_until(spec: &SweepSpec, jobs: usize, cancel: &AtomicBool) -> Result<SweepOutcome> {
    spec.validate()?;
    let options = spec.options();
    let work: Vec<(usize, u32)> = (0..spec.points.len())
        .flat_map(|p| (0..spec.trials).map(move |t| (p, t)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    let done: Vec<Option<Result<TrialResult>>> = pool.install(|| {
        work.par_iter()
            .map(|&(p, t)| {
                if cancel.load(Ordering::Relaxed) {
                    return None;
                }
                let seed = trial_seed(spec.master_seed, p as u64, t as u64);
                Some(run_trial(&spec.points[p], &options, seed))
            })
            .collect()
    });
    let complete = done.iter().all(Option::is_some);
    let results = done.into_iter().flatten().collect::<Result<Vec<_>>>()?;
    Ok(SweepOutcome { results, complete })
}

pub fn write_sweep_csv<W: Write>(results: &[TrialResult], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(SWEEP_CSV_HEADER)?;
    for r in results {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Median completed flooding time at one `(n, ρ)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingPoint {
    pub n: usize,
    pub rho: f64,
    pub median: f64,
    pub completed: usize,
    pub timeouts: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingFit {
    /// Coefficient of `√n/ρ`.
    pub a: f64,
    /// Coefficient of `log₂ n`.
    pub b: f64,
    pub c: f64,
    /// `max_i |residual_i| / fitted_i`.
    pub residual_ratio: f64,
    /// `median T(4n) / median T(n)` for the smallest `n` with `4n` present,
    /// pairing the `4n` point whose `ρ` is closest.
    pub growth_ratio: Option<f64>,
    pub points: Vec<ScalingPoint>,
}

impl ScalingFit {
    pub fn predict(&self, n: usize, rho: f64) -> f64 {
        let nf = n as f64;
        self.a * nf.sqrt() / rho + self.b * nf.log2() + self.c
    }
}

pub fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let k = values.len() / 2;
    Some(if values.len() % 2 == 1 {
        values[k]
    } else {
        (values[k - 1] + values[k]) / 2.0
    })
}

/// Median flooding time per `(n, ρ)` pair, timeouts excluded. Ordered by
/// `n`, then `ρ`.
pub fn scaling_points(results: &[TrialResult]) -> Vec<ScalingPoint> {
    // positive f64 bit patterns sort like the values
    let mut groups: BTreeMap<(usize, u64), (Vec<f64>, usize)> = BTreeMap::new();
    for r in results {
        let g = groups.entry((r.n, r.rho.to_bits())).or_default();
        match r.flood_time {
            Some(t) if !r.timeout => g.0.push(t as f64),
            _ => g.1 += 1,
        }
    }
    groups
        .into_iter()
        .filter_map(|((n, rho), (mut times, timeouts))| {
            let completed = times.len();
            median(&mut times).map(|median| ScalingPoint {
                n,
                rho: f64::from_bits(rho),
                median,
                completed,
                timeouts,
            })
        })
        .collect()
}

/// Least-squares fit of the per-point medians.
pub fn fit_scaling(results: &[TrialResult]) -> Result<ScalingFit> {
    fit_points(scaling_points(results))
}

pub fn fit_points(points: Vec<ScalingPoint>) -> Result<ScalingFit> {
    if points.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "need completed trials at >= 3 (n, rho) points, have {}",
            points.len()
        )));
    }
    if points.iter().any(|p| p.rho.is_nan() || p.rho <= 0.0) {
        return Err(Error::InsufficientData(
            "scaling fit needs rho > 0 at every point".into(),
        ));
    }
    let rows = points.len();
    let design = DMatrix::from_fn(rows, 3, |i, j| {
        let nf = points[i].n as f64;
        match j {
            0 => nf.sqrt() / points[i].rho,
            1 => nf.log2(),
            _ => 1.0,
        }
    });
    let target = DVector::from_iterator(rows, points.iter().map(|p| p.median));
    let coef = design
        .clone()
        .svd(true, true)
        .solve(&target, 1e-12)
        .map_err(|e| Error::InsufficientData(e.to_string()))?;
    let fitted = &design * &coef;
    let residual_ratio = points
        .iter()
        .zip(fitted.iter())
        .map(|(p, &f)| (p.median - f).abs() / f.abs())
        .fold(0.0, f64::max);
    let growth_ratio = points.iter().find_map(|p| {
        points
            .iter()
            .filter(|q| q.n == 4 * p.n)
            .min_by(|x, y| (x.rho - p.rho).abs().total_cmp(&(y.rho - p.rho).abs()))
            .map(|q| q.median / p.median)
    });
    Ok(ScalingFit {
        a: coef[0],
        b: coef[1],
        c: coef[2],
        residual_ratio,
        growth_ratio,
        points,
    })
}
