//! Verifiers for the standalone combinatorial and probabilistic lemmas
//! behind the flooding bound:
//!
//! * boundary size on an `m × m` grid, `|∂B| ≥ √min{|B|, m² − |B|}`;
//! * spreading time, where any integer sequence with
//!   `q_{t+1} ≥ q_t + √min{q_t, K − q_t}` reaches `K` by `t = ⌈5√K⌉`;
//! * almost-increasing processes, `P(X_1..X_t all < M) ≤ e^{−pt}`.
//!
//! The first two are checked exactly; the third by seeded Monte Carlo with a
//! fixed 3-standard-error margin.

use std::collections::BTreeSet;
use std::fmt;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// Monte Carlo margin, in standard errors.
pub const SE_MARGIN: f64 = 3.0;

/// Largest side for exhaustive boundary enumeration (`2^16` subsets).
pub const EXHAUSTIVE_BOUNDARY_MAX_M: usize = 4;

/// Outcome of a lemma check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaReport {
    pub lemma: String,
    pub cases: u64,
    pub violations: u64,
    /// Smallest `bound side − checked side` seen; negative on a violation.
    pub worst_margin: f64,
    pub seed: Option<u64>,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

impl fmt::Display for LemmaReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} cases, {} violations, worst margin {:.6}",
            self.lemma, self.cases, self.violations, self.worst_margin
        )?;
        if let Some(s) = self.seed {
            write!(f, ", seed {s}")?;
        }
        write!(f, " [{}]", if self.passed() { "PASS" } else { "FAIL" })
    }
}

// ---------------------------------------------------------------------------
// Boundary size

/// A set of cells of an `m × m` grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellSubset {
    m: usize,
    cells: Vec<bool>,
}

impl CellSubset {
    pub fn empty(m: usize) -> Self {
        assert!(m >= 1);
        Self {
            m,
            cells: vec![false; m * m],
        }
    }

    pub fn full(m: usize) -> Self {
        Self {
            m,
            cells: vec![true; m * m],
        }
    }

    pub fn from_cells(m: usize, cells: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut s = Self::empty(m);
        for (row, col) in cells {
            if row >= m || col >= m {
                return Err(Error::InvalidConfig(format!(
                    "cell ({row},{col}) outside {m}x{m} grid"
                )));
            }
            s.insert(row, col);
        }
        Ok(s)
    }

    /// Bit `row·m + col` of `mask` selects cell `(row, col)`.
    pub fn from_mask(m: usize, mask: u64) -> Self {
        assert!(m * m <= 64);
        let cells = (0..m * m).map(|k| mask >> k & 1 == 1).collect();
        Self { m, cells }
    }

    pub fn side(&self) -> usize {
        self.m
    }

    pub fn insert(&mut self, row: usize, col: usize) {
        self.cells[row * self.m + col] = true;
    }

    pub fn contains(&self, row: usize, col: usize) -> bool {
        self.cells[row * self.m + col]
    }

    pub fn len(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn members(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let m = self.m;
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, &c)| c)
            .map(move |(k, _)| (k / m, k % m))
    }

    fn boundary_len(&self) -> usize {
        let m = self.m;
        let mut count = 0;
        for row in 0..m {
            for col in 0..m {
                if !self.contains(row, col) && self.has_member_neighbor(row, col) {
                    count += 1;
                }
            }
        }
        count
    }

    fn has_member_neighbor(&self, row: usize, col: usize) -> bool {
        let m = self.m;
        (row > 0 && self.contains(row - 1, col))
            || (row + 1 < m && self.contains(row + 1, col))
            || (col > 0 && self.contains(row, col - 1))
            || (col + 1 < m && self.contains(row, col + 1))
    }
}

/// `∂B`: cells outside `B` sharing an edge with a cell of `B`.
pub fn boundary(b: &CellSubset) -> BTreeSet<(usize, usize)> {
    let m = b.side();
    let mut out = BTreeSet::new();
    for row in 0..m {
        for col in 0..m {
            if !b.contains(row, col) && b.has_member_neighbor(row, col) {
                out.insert((row, col));
            }
        }
    }
    out
}

/// `√min{|B|, m² − |B|}`.
pub fn boundary_bound(m: usize, size: usize) -> f64 {
    (size.min(m * m - size) as f64).sqrt()
}

/// Bitmask boundary size for `m ≤ 8`.
fn mask_boundary_len(m: usize, mask: u64, not_left: u64, not_right: u64, all: u64) -> u32 {
    // bit k = row·m + col; col ± 1 is a shift by 1, row ± 1 a shift by m
    let grow = ((mask & not_right) << 1) | ((mask & not_left) >> 1) | (mask << m) | (mask >> m);
    (grow & all & !mask).count_ones()
}

fn column_masks(m: usize) -> (u64, u64, u64) {
    let all = if m * m == 64 {
        u64::MAX
    } else {
        (1u64 << (m * m)) - 1
    };
    let mut left = 0u64;
    let mut right = 0u64;
    for row in 0..m {
        left |= 1 << (row * m);
        right |= 1 << (row * m + m - 1);
    }
    (all & !left, all & !right, all)
}

/// Checks every subset of every `k × k` grid with `1 ≤ k ≤ m_max`.
pub fn verify_boundary_lemma(m_max: usize) -> Result<LemmaReport> {
    if m_max == 0 || m_max > EXHAUSTIVE_BOUNDARY_MAX_M {
        return Err(Error::InvalidConfig(format!(
            "exhaustive boundary check supports 1 <= m <= {EXHAUSTIVE_BOUNDARY_MAX_M}, got {m_max}"
        )));
    }
    let mut report = LemmaReport {
        lemma: "boundary".into(),
        cases: 0,
        violations: 0,
        worst_margin: f64::INFINITY,
        seed: None,
    };
    for m in 1..=m_max {
        let (not_left, not_right, all) = column_masks(m);
        for mask in 0..=all {
            let size = mask.count_ones() as usize;
            let len = mask_boundary_len(m, mask, not_left, not_right, all);
            record(&mut report, len as f64 - boundary_bound(m, size));
        }
    }
    Ok(report)
}

fn record(report: &mut LemmaReport, margin: f64) {
    report.cases += 1;
    if margin < 0.0 {
        report.violations += 1;
    }
    report.worst_margin = report.worst_margin.min(margin);
}

/// Random subsets of an `m × m` grid: a third each of Bernoulli fills with a
/// random density, axis-aligned rectangles, and discrete disks. Compact
/// shapes are where the bound is tight.
pub fn random_subset<R: Rng + ?Sized>(m: usize, rng: &mut R) -> CellSubset {
    let mut s = CellSubset::empty(m);
    match rng.random_range(0..3) {
        0 => {
            let p: f64 = rng.random();
            for k in 0..m * m {
                s.cells[k] = rng.random_bool(p);
            }
        }
        1 => {
            let (r0, r1) = sorted_pair(rng.random_range(0..m), rng.random_range(0..m));
            let (c0, c1) = sorted_pair(rng.random_range(0..m), rng.random_range(0..m));
            for row in r0..=r1 {
                for col in c0..=c1 {
                    s.insert(row, col);
                }
            }
        }
        _ => {
            let (cr, cc) = (rng.random_range(0..m) as f64, rng.random_range(0..m) as f64);
            let rad: f64 = rng.random_range(0.0..m as f64 * 1.5);
            for row in 0..m {
                for col in 0..m {
                    if (row as f64 - cr).hypot(col as f64 - cc) <= rad {
                        s.insert(row, col);
                    }
                }
            }
        }
    }
    s
}

fn sorted_pair(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// Sampled boundary check on an `m × m` grid.
pub fn verify_boundary_sampled<R: Rng + ?Sized>(
    m: usize,
    samples: u64,
    seed: u64,
    rng: &mut R,
) -> LemmaReport {
    let mut report = LemmaReport {
        lemma: "boundary".into(),
        cases: 0,
        violations: 0,
        worst_margin: f64::INFINITY,
        seed: Some(seed),
    };
    for _ in 0..samples {
        let b = random_subset(m, rng);
        record(
            &mut report,
            b.boundary_len() as f64 - boundary_bound(m, b.len()),
        );
    }
    report
}

// ---------------------------------------------------------------------------
// Spreading time

/// `⌈√x⌉` for integers.
fn ceil_sqrt(x: u64) -> u64 {
    let s = x.isqrt();
    if s * s == x {
        s
    } else {
        s + 1
    }
}

/// `⌈5√K⌉`, computed exactly as the least `c` with `c² ≥ 25K`.
pub fn spreading_bound(k: u64) -> u64 {
    ceil_sqrt(25 * k)
}

/// The slowest admissible sequence from `q_0 = 1`:
/// `q_{t+1} = min(K, q_t + ⌈√min(q_t, K − q_t)⌉)`.
pub fn minimal_spreading_step(q: u64, k: u64) -> u64 {
    (q + ceil_sqrt(q.min(k - q))).min(k)
}

/// Steps for the minimal sequence to reach `K`.
pub fn minimal_spreading_sequence(k: u64) -> u64 {
    assert!(k >= 1, "K must be positive");
    let mut q = 1;
    let mut t = 0;
    while q < k {
        q = minimal_spreading_step(q, k);
        t += 1;
    }
    t
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpreadingReport {
    pub report: LemmaReport,
    /// `max_K steps(K) / (5√K)`.
    pub max_ratio: f64,
}

/// Checks `steps(K) ≤ ⌈5√K⌉` for every `K ∈ [1, k_max]`.
pub fn verify_spreading_lemma(k_max: u64) -> SpreadingReport {
    assert!(k_max >= 1);
    let mut report = LemmaReport {
        lemma: "spreading".into(),
        cases: 0,
        violations: 0,
        worst_margin: f64::INFINITY,
        seed: None,
    };
    let mut max_ratio: f64 = 0.0;
    for k in 1..=k_max {
        let steps = minimal_spreading_sequence(k);
        record(&mut report, spreading_bound(k) as f64 - steps as f64);
        max_ratio = max_ratio.max(steps as f64 / (5.0 * (k as f64).sqrt()));
    }
    SpreadingReport { report, max_ratio }
}

// ---------------------------------------------------------------------------
// Almost-increasing processes

/// A stochastic rule producing `X_{t+1}` from the history `X_0..X_t`.
pub trait ProcessRule {
    fn next<R: Rng + ?Sized>(&self, history: &[f64], rng: &mut R) -> f64;
}

/// Multiplies by `α` every step.
#[derive(Debug, Clone, Copy)]
pub struct AlwaysGrow {
    pub alpha: f64,
}

impl ProcessRule for AlwaysGrow {
    fn next<R: Rng + ?Sized>(&self, history: &[f64], _rng: &mut R) -> f64 {
        self.alpha * history[history.len() - 1]
    }
}

/// Below `M`: shrinks by `β` with probability `fail`, else grows by `α`.
/// At or above `M`: grows by `α`. Meets both hypotheses with equality
/// when `fail = p`.
#[derive(Debug, Clone, Copy)]
pub struct Adversarial {
    pub alpha: f64,
    pub beta: f64,
    pub threshold: f64,
    pub fail: f64,
}

impl ProcessRule for Adversarial {
    fn next<R: Rng + ?Sized>(&self, history: &[f64], rng: &mut R) -> f64 {
        let x = history[history.len() - 1];
        if x < self.threshold && rng.random_bool(self.fail) {
            self.beta * x
        } else {
            self.alpha * x
        }
    }
}

/// Constants of the almost-increasing lemma.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlmostIncreasingSpec {
    pub alpha: f64,
    pub beta: f64,
    pub m: u64,
    pub p: f64,
}

impl AlmostIncreasingSpec {
    pub fn new(alpha: f64, beta: f64, m: u64, p: f64) -> Result<Self> {
        let s = Self { alpha, beta, m, p };
        s.validate()?;
        Ok(s)
    }

    /// Checks ranges and `p < log α / (e·log(α/β))`.
    pub fn validate(&self) -> Result<()> {
        if self.alpha.is_nan() || self.alpha <= 1.0 {
            return Err(Error::LemmaInapplicable(format!(
                "alpha = {} is not > 1",
                self.alpha
            )));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::LemmaInapplicable(format!(
                "beta = {} not in (0,1)",
                self.beta
            )));
        }
        if self.m == 0 {
            return Err(Error::LemmaInapplicable("M must be positive".into()));
        }
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(Error::LemmaInapplicable(format!(
                "p = {} not in (0,1)",
                self.p
            )));
        }
        if self.p >= self.p_limit() {
            return Err(Error::LemmaInapplicable(format!(
                "p = {} is not below log(alpha)/(e log(alpha/beta)) = {}",
                self.p,
                self.p_limit()
            )));
        }
        Ok(())
    }

    pub fn p_limit(&self) -> f64 {
        self.alpha.ln() / (std::f64::consts::E * (self.alpha / self.beta).ln())
    }

    /// Least integer `t ≥ log M / (log α − e·p·log(α/β))`.
    pub fn min_t(&self) -> u64 {
        let denom = self.alpha.ln() - std::f64::consts::E * self.p * (self.alpha / self.beta).ln();
        ((self.m as f64).ln() / denom).ceil().max(0.0) as u64
    }

    /// `e^{−pt}`.
    pub fn tail_bound(&self, t: u64) -> f64 {
        (-self.p * t as f64).exp()
    }

    pub fn adversarial(&self) -> Adversarial {
        Adversarial {
            alpha: self.alpha,
            beta: self.beta,
            threshold: self.m as f64,
            fail: self.p,
        }
    }
}

/// Monte Carlo estimate of `P(X_1, …, X_t all < M)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailEstimate {
    pub t: u64,
    pub trials: u64,
    pub stuck: u64,
    pub probability: f64,
    pub std_error: f64,
    pub bound: f64,
}

impl TailEstimate {
    /// `bound + 3·SE − probability`; negative means the estimate exceeds the
    /// analytic bound by more than the margin.
    pub fn margin(&self) -> f64 {
        self.bound + SE_MARGIN * self.std_error - self.probability
    }

    pub fn within_bound(&self) -> bool {
        self.margin() >= 0.0
    }

    /// One-sided upper confidence limit at the fixed margin.
    pub fn upper_confidence(&self) -> f64 {
        self.probability + SE_MARGIN * self.std_error
    }
}

/// Runs `trials` independent paths of `rule` from `X_0 = 1` for `t` steps.
pub fn simulate_almost_increasing<P: ProcessRule, R: Rng + ?Sized>(
    spec: &AlmostIncreasingSpec,
    rule: &P,
    t: u64,
    trials: u64,
    rng: &mut R,
) -> Result<TailEstimate> {
    spec.validate()?;
    if t < spec.min_t() {
        return Err(Error::LemmaInapplicable(format!(
            "t = {t} is below the lemma's threshold {}",
            spec.min_t()
        )));
    }
    if trials == 0 {
        return Err(Error::InvalidConfig("trials must be positive".into()));
    }
    let m = spec.m as f64;
    let mut stuck = 0u64;
    let mut history = Vec::with_capacity(t as usize + 1);
    for _ in 0..trials {
        history.clear();
        history.push(1.0);
        let mut below = true;
        for _ in 0..t {
            let x = rule.next(&history, rng);
            history.push(x);
            if x >= m {
                below = false;
                break;
            }
        }
        stuck += u64::from(below);
    }
    let probability = stuck as f64 / trials as f64;
    let std_error = (probability * (1.0 - probability) / trials as f64).sqrt();
    Ok(TailEstimate {
        t,
        trials,
        stuck,
        probability,
        std_error,
        bound: spec.tail_bound(t),
    })
}

/// Tail check at every `t` in `t_values`, one report case per `t`.
pub fn verify_almost_increasing<P: ProcessRule, R: Rng + ?Sized>(
    spec: &AlmostIncreasingSpec,
    rule: &P,
    t_values: &[u64],
    trials: u64,
    seed: u64,
    rng: &mut R,
) -> Result<(LemmaReport, Vec<TailEstimate>)> {
    let mut report = LemmaReport {
        lemma: "almost-increasing".into(),
        cases: 0,
        violations: 0,
        worst_margin: f64::INFINITY,
        seed: Some(seed),
    };
    let mut estimates = Vec::with_capacity(t_values.len());
    for &t in t_values {
        let est = simulate_almost_increasing(spec, rule, t, trials, rng)?;
        record(&mut report, est.margin());
        estimates.push(est);
    }
    Ok((report, estimates))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    #[test]
    fn boundary_small_cases() {
        let c = CellSubset::from_cells(3, [(1, 1)]).unwrap();
        let b = boundary(&c);
        assert_eq!(b, [(0, 1), (1, 0), (1, 2), (2, 1)].into_iter().collect());
        assert!(b.len() as f64 >= boundary_bound(3, 1));

        assert!(boundary(&CellSubset::full(3)).is_empty());
        assert_eq!(boundary_bound(3, 9), 0.0);

        // a full row of a 3x3 grid
        let row = CellSubset::from_cells(3, [(1, 0), (1, 1), (1, 2)]).unwrap();
        assert_eq!(boundary(&row).len(), 6);
        assert!(6.0 >= boundary_bound(3, 3));

        assert!(CellSubset::from_cells(2, [(2, 0)]).is_err());
    }

    #[test]
    fn mask_boundary_matches_set_boundary() {
        for m in 1..=4 {
            let (nl, nr, all) = column_masks(m);
            for mask in 0..=all {
                let s = CellSubset::from_mask(m, mask);
                assert_eq!(
                    mask_boundary_len(m, mask, nl, nr, all) as usize,
                    boundary(&s).len()
                );
            }
        }
    }

    #[test]
    fn boundary_m1() {
        let r = verify_boundary_lemma(1).unwrap();
        assert_eq!(r.cases, 2);
        assert_eq!(r.violations, 0);
        assert!(verify_boundary_lemma(5).is_err());
    }

    #[test]
    fn spreading_small_k() {
        assert_eq!(minimal_spreading_sequence(1), 0);
        assert_eq!(minimal_spreading_sequence(2), 1);
        assert_eq!(minimal_spreading_sequence(4), 2);
        assert_eq!(spreading_bound(1), 5);
        assert_eq!(spreading_bound(4), 10);
        assert_eq!(spreading_bound(2), 8); // 5√2 ≈ 7.07
        assert!(verify_spreading_lemma(2).report.passed());
    }

    #[test]
    fn spec_rejections() {
        assert!(AlmostIncreasingSpec::new(2.0, 1.0 / 121.0, 1000, 1.0).is_err());
        assert!(AlmostIncreasingSpec::new(2.0, 1.0 / 121.0, 1000, 0.2).is_err());
        assert!(AlmostIncreasingSpec::new(1.0, 0.5, 10, 0.01).is_err());
        let s = AlmostIncreasingSpec::new(2.0, 1.0 / 121.0, 1000, 0.01).unwrap();
        assert_eq!(s.min_t(), 13);
        let mut rng = rng_from_seed(0);
        assert!(simulate_almost_increasing(&s, &s.adversarial(), 12, 10, &mut rng).is_err());
    }

    #[test]
    fn deterministic_growth_never_stuck() {
        let s = AlmostIncreasingSpec::new(2.0, 0.5, 1000, 0.01).unwrap();
        let mut rng = rng_from_seed(0);
        let e =
            simulate_almost_increasing(&s, &AlwaysGrow { alpha: 2.0 }, s.min_t(), 1000, &mut rng)
                .unwrap();
        assert_eq!(e.stuck, 0);
        assert!(e.within_bound());
    }

    #[test]
    fn report_json_fields() {
        let r = verify_boundary_lemma(2).unwrap();
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        let keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        assert_eq!(keys.len(), 5);
        for k in ["lemma", "cases", "violations", "worst_margin", "seed"] {
            assert!(v.get(k).is_some(), "{k}");
        }
        assert!(r.to_string().contains("PASS"));
    }
}
