//! Flooding over the evolving disk graph, with per-step instrumentation
//! over a supercell/cell partition of the square.
//!
//! One time step is a move action (every node jumps) followed by a
//! transmission action (every node informed before the step informs all
//! nodes within `r` of it). Transmission is a single round: nodes informed
//! during a step first transmit in the next one.

use std::f64::consts::SQRT_2;
use std::io::Write;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{build_cell_index, components_from_index, CellIndex};
use crate::mobility::{
    move_offsets, step_move, GridPos, NodeState, OffsetSet, StationarySampler, WorldConfig,
};

pub const DEFAULT_GAMMA: f64 = 0.01;
pub const DEFAULT_ETA: f64 = 0.01;

/// Constant `a` of the infected-cells concentration bound.
pub const INFECTED_CELLS_A: f64 = 1.0 / 227.0;

/// The quasi-informed coefficient used by the asymptotic analysis,
/// `γ = a·η/227`. Far below one node at simulation scale, hence not the
/// default.
pub fn analysis_gamma(eta: f64) -> f64 {
    INFECTED_CELLS_A * eta / 227.0
}

/// Default step budget `⌈50·(√n/ρ + log₂ n)⌉`. With `ρ = 0` nodes never
/// move and flooding either ends within `n − 1` steps or never, so the
/// budget is `n`.
pub fn default_max_steps(n: usize, rho: f64) -> u64 {
    if rho > 0.0 {
        let nf = n as f64;
        ((50.0 * (nf.sqrt() / rho + nf.log2())).ceil() as u64).max(1)
    } else {
        (n as u64).max(1)
    }
}

const BOUND_SLACK: f64 = 1e-12;

/// Supercell and cell partition used for instrumentation.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisConfig {
    pub gamma: f64,
    pub eta: f64,
    rho: f64,
    side: f64,
    supercells_per_side: usize,
    cells_per_supercell: usize,
}

impl AnalysisConfig {
    /// Partition of a square of side `side` for move radius `rho` and
    /// transmission radius `r`.
    ///
    /// The supercell count per side is the smallest `k` with
    /// `side/k ≤ ρ/(2√2)`, the cell count per supercell side the smallest
    /// `k` with `L/k ≤ r/√2`; the lower bounds `L ≥ ρ/(3√2)` and
    /// `ℓ ≥ r/(1+√2)` are then checked. Comparisons carry a relative slack
    /// of 1e-12 so exact boundary cases count as inside.
    pub fn for_square(side: f64, rho: f64, r: f64, gamma: f64, eta: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "gamma must be in (0,1), got {gamma}"
            )));
        }
        if !(0.0..1.0).contains(&eta) {
            return Err(Error::InvalidConfig(format!(
                "eta must be in [0,1), got {eta}"
            )));
        }
        if !(side > 0.0 && r > 0.0) {
            return Err(Error::InvalidConfig("side and r must be positive".into()));
        }
        let l_max = rho / (2.0 * SQRT_2);
        let l_min = rho / (3.0 * SQRT_2);
        let k_s = smallest_divisions(side, l_max).ok_or_else(|| {
            Error::DegenerateGeometry(format!("move radius {rho} admits no supercell side"))
        })?;
        let l = side / k_s as f64;
        if l < l_min * (1.0 - BOUND_SLACK) {
            return Err(Error::DegenerateGeometry(format!(
                "supercell side {l} below rho/(3*sqrt 2) = {l_min}"
            )));
        }
        let ell_max = r / SQRT_2;
        let ell_min = r / (1.0 + SQRT_2);
        let k_c = smallest_divisions(l, ell_max).expect("r > 0");
        let ell = l / k_c as f64;
        if ell < ell_min * (1.0 - BOUND_SLACK) {
            return Err(Error::DegenerateGeometry(format!(
                "cell side {ell} below r/(1+sqrt 2) = {ell_min}"
            )));
        }
        Ok(Self {
            gamma,
            eta,
            rho,
            side,
            supercells_per_side: k_s,
            cells_per_supercell: k_c,
        })
    }

    pub fn supercells_per_side(&self) -> usize {
        self.supercells_per_side
    }

    pub fn cells_per_supercell(&self) -> usize {
        self.cells_per_supercell
    }

    pub fn supercell_count(&self) -> usize {
        self.supercells_per_side * self.supercells_per_side
    }

    pub fn cells_per_axis(&self) -> usize {
        self.supercells_per_side * self.cells_per_supercell
    }

    /// `L`.
    pub fn supercell_side(&self) -> f64 {
        self.side / self.supercells_per_side as f64
    }

    /// `ℓ`.
    pub fn cell_side(&self) -> f64 {
        self.supercell_side() / self.cells_per_supercell as f64
    }

    /// `γρ²`, the informed count at which a supercell is quasi-informed.
    pub fn quasi_threshold(&self) -> f64 {
        self.gamma * self.rho * self.rho
    }

    /// `ηρ²`, the per-supercell population required by the density condition.
    pub fn density_threshold(&self) -> f64 {
        self.eta * self.rho * self.rho
    }

    /// Cell coordinates of a physical point. Points on the far wall belong to
    /// the last cell.
    pub fn cell_of(&self, x: f64, y: f64) -> (usize, usize) {
        let k = self.cells_per_axis();
        let scale = k as f64 / self.side;
        let c = |v: f64| ((v * scale).floor() as usize).min(k - 1);
        (c(x), c(y))
    }

    /// Flat supercell index of a physical point.
    pub fn supercell_of(&self, x: f64, y: f64) -> usize {
        let (cx, cy) = self.cell_of(x, y);
        let kc = self.cells_per_supercell;
        (cx / kc) * self.supercells_per_side + cy / kc
    }

    /// `N(S)`: the supercell and every supercell sharing an edge or corner.
    pub fn neighborhood(&self, supercell: usize) -> Vec<usize> {
        let k = self.supercells_per_side as isize;
        let (sx, sy) = ((supercell as isize) / k, (supercell as isize) % k);
        let mut out = Vec::with_capacity(9);
        for dx in -1..=1 {
            for dy in -1..=1 {
                let (x, y) = (sx + dx, sy + dy);
                if (0..k).contains(&x) && (0..k).contains(&y) {
                    out.push((x * k + y) as usize);
                }
            }
        }
        out
    }
}

/// Smallest `k ≥ 1` with `side/k ≤ upper`.
fn smallest_divisions(side: f64, upper: f64) -> Option<usize> {
    if upper.is_nan() || upper <= 0.0 {
        return None;
    }
    let fits = |k: usize| side / k as f64 <= upper * (1.0 + BOUND_SLACK);
    let mut k = ((side / upper).ceil() as usize).max(1);
    while !fits(k) {
        k += 1;
    }
    while k > 1 && fits(k - 1) {
        k -= 1;
    }
    Some(k)
}

pub fn build_analysis_grid(world: &WorldConfig, gamma: f64, eta: f64) -> Result<AnalysisConfig> {
    AnalysisConfig::for_square(world.side(), world.rho(), world.r(), gamma, eta)
}

/// Per-supercell counters at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct SupercellStats {
    /// `m_t(S)`.
    pub informed: Vec<u32>,
    pub totals: Vec<u32>,
    /// Cells of `S` holding at least one informed node.
    pub infected_cells: Vec<u32>,
    /// `Y_t = max_S m_t(S)`.
    pub y_max: u32,
}

impl SupercellStats {
    pub fn quasi_informed_count(&self, threshold: f64) -> usize {
        self.informed
            .iter()
            .filter(|&&m| m as f64 >= threshold)
            .count()
    }

    pub fn all_quasi_informed(&self, threshold: f64) -> bool {
        self.informed.iter().all(|&m| m as f64 >= threshold)
    }

    pub fn density_ok(&self, threshold: f64) -> bool {
        self.totals.iter().all(|&c| c as f64 >= threshold)
    }
}

pub fn supercell_stats(
    state: &NodeState,
    analysis: &AnalysisConfig,
    world: &WorldConfig,
) -> SupercellStats {
    let ns = analysis.supercell_count();
    let kc = analysis.cells_per_supercell();
    let cpa = analysis.cells_per_axis();
    let mut informed = vec![0u32; ns];
    let mut totals = vec![0u32; ns];
    let mut infected_cells = vec![0u32; ns];
    let mut seen = vec![false; cpa * cpa];
    for (id, &p) in state.positions.iter().enumerate() {
        let (x, y) = world.physical(p);
        let (cx, cy) = analysis.cell_of(x, y);
        let s = (cx / kc) * analysis.supercells_per_side() + cy / kc;
        totals[s] += 1;
        if state.informed.contains(id) {
            informed[s] += 1;
            let c = cx * cpa + cy;
            if !seen[c] {
                seen[c] = true;
                infected_cells[s] += 1;
            }
        }
    }
    let y_max = informed.iter().copied().max().unwrap_or(0);
    SupercellStats {
        informed,
        totals,
        infected_cells,
        y_max,
    }
}

/// Density condition: every supercell holds at least `ηρ²` nodes.
pub fn density_check(state: &NodeState, analysis: &AnalysisConfig, world: &WorldConfig) -> bool {
    let mut totals = vec![0u32; analysis.supercell_count()];
    for &p in &state.positions {
        let (x, y) = world.physical(p);
        totals[analysis.supercell_of(x, y)] += 1;
    }
    let th = analysis.density_threshold();
    totals.iter().all(|&c| c as f64 >= th)
}

/// Transmission action. `index` must be built over the current positions.
/// Returns the number of newly informed nodes.
pub fn transmit(state: &mut NodeState, world: &WorldConfig, index: &CellIndex) -> usize {
    debug_assert_eq!(index.positions(), &state.positions[..], "stale cell index");
    let r2 = world.r_sq_index();
    let n = state.n();
    let informed = &state.informed;
    let mut fresh = Vec::new();
    if informed.len() <= n - informed.len() {
        for i in informed.ids() {
            index.for_each_neighbor(i, r2, |j| {
                if !informed.contains(j) {
                    fresh.push(j);
                }
            });
        }
    } else {
        for j in 0..n {
            if !informed.contains(j) && index.any_neighbor(j, r2, |i| informed.contains(i)) {
                fresh.push(j);
            }
        }
    }
    fresh
        .into_iter()
        .filter(|&j| state.informed.insert(j))
        .count()
}

/// Which node starts with the message.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Source {
    Node(usize),
    #[default]
    UniformRandom,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FloodOptions {
    pub max_steps: u64,
    /// Record the largest-component fraction every this many steps.
    pub component_every: Option<u64>,
}

impl FloodOptions {
    pub fn for_world(world: &WorldConfig) -> Self {
        Self {
            max_steps: default_max_steps(world.n(), world.rho()),
            component_every: None,
        }
    }
}

/// One row of a flooding trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord {
    pub t: u64,
    pub informed: usize,
    pub y_max: Option<u32>,
    pub quasi_cells: Option<usize>,
    pub density_ok: Option<bool>,
    pub largest_comp_frac: Option<f64>,
    /// Largest distance from the source's starting point to an informed node.
    #[serde(skip)]
    pub informed_radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FloodTrace {
    pub n: usize,
    pub rho: f64,
    pub r: f64,
    pub max_steps: u64,
    pub source: usize,
    pub source_position: GridPos,
    /// Distance from the source to the farthest node at time 0.
    pub initial_max_distance: f64,
    pub records: Vec<StepRecord>,
    pub bootstrap_end: Option<u64>,
    pub spreading_end: Option<u64>,
    pub flooding_time: Option<u64>,
}

impl FloodTrace {
    pub fn timed_out(&self) -> bool {
        self.flooding_time.is_none()
    }

    /// `⌈D₀/(ρ+r)⌉`.
    pub fn speed_limit_bound(&self) -> u64 {
        (self.initial_max_distance / (self.rho + self.r) * (1.0 - BOUND_SLACK)).ceil() as u64
    }

    /// `⌈D₀/(2ρ+r)⌉`. Information spreads at most `ρ+r` per step while the
    /// farthest node can close in by another `ρ`, so this bound holds on
    /// every trace.
    pub fn guaranteed_lower_bound(&self) -> u64 {
        (self.initial_max_distance / (2.0 * self.rho + self.r) * (1.0 - BOUND_SLACK)).ceil() as u64
    }

    pub fn density_violations(&self) -> Option<u64> {
        let mut any = false;
        let mut bad = 0;
        for rec in &self.records {
            if let Some(ok) = rec.density_ok {
                any = true;
                bad += u64::from(!ok);
            }
        }
        any.then_some(bad)
    }

    pub fn mean_largest_component(&self) -> Option<f64> {
        let v: Vec<f64> = self
            .records
            .iter()
            .filter_map(|r| r.largest_comp_frac)
            .collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    }

    /// Invariant violations, empty on a consistent trace.
    pub fn check_invariants(&self) -> Vec<String> {
        let mut bad = Vec::new();
        for (t, w) in self.records.windows(2).enumerate() {
            if w[1].informed < w[0].informed {
                bad.push(format!("informed count dropped at t={}", t + 1));
            }
        }
        let step_reach = self.rho + self.r;
        for rec in &self.records {
            if rec.informed_radius > rec.t as f64 * step_reach * (1.0 + BOUND_SLACK) + 1e-9 {
                bad.push(format!(
                    "informed radius {} exceeds {}*(rho+r) at t={}",
                    rec.informed_radius, rec.t, rec.t
                ));
            }
        }
        if let Some(ft) = self.flooding_time {
            if ft < self.guaranteed_lower_bound() {
                bad.push(format!("flooding time {ft} below ceil(D0/(2rho+r))"));
            }
            let first_full = self
                .records
                .iter()
                .find(|r| r.informed == self.n)
                .map(|r| r.t);
            if first_full != Some(ft) {
                bad.push("flooding time is not the first full step".into());
            }
        }
        let (b, s, f) = (self.bootstrap_end, self.spreading_end, self.flooding_time);
        if let (Some(b), Some(s)) = (b, s) {
            if b > s {
                bad.push(format!("bootstrap_end {b} after spreading_end {s}"));
            }
        }
        if let (Some(s), Some(f)) = (s, f) {
            if s > f {
                bad.push(format!("spreading_end {s} after flooding_time {f}"));
            }
        }
        bad
    }

    /// CSV with one row per step:
    /// `t,informed,y_max,quasi_cells,density_ok,largest_comp_frac`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        if self.records.is_empty() {
            w.write_record([
                "t",
                "informed",
                "y_max",
                "quasi_cells",
                "density_ok",
                "largest_comp_frac",
            ])?;
        }
        for rec in &self.records {
            w.serialize(rec)?;
        }
        w.flush()?;
        Ok(())
    }

    /// `flood_time=<t> bootstrap=<t1> spread=<t2>`, with `none` for absent values.
    pub fn summary_line(&self) -> String {
        let f = |v: Option<u64>| v.map_or_else(|| "none".to_string(), |x| x.to_string());
        format!(
            "flood_time={} bootstrap={} spread={}",
            f(self.flooding_time),
            f(self.bootstrap_end),
            f(self.spreading_end)
        )
    }
}

/// Step-by-step flooding simulation.
pub struct FloodSim<'a, R: Rng> {
    world: &'a WorldConfig,
    analysis: Option<&'a AnalysisConfig>,
    offsets: OffsetSet,
    state: NodeState,
    rng: R,
    component_every: Option<u64>,
    source_xy: (f64, f64),
}

impl<'a, R: Rng> FloodSim<'a, R> {
    /// Stationary start. Positions are drawn first, then the source if random.
    pub fn new(
        world: &'a WorldConfig,
        analysis: Option<&'a AnalysisConfig>,
        source: Source,
        mut rng: R,
    ) -> Self {
        let offsets = move_offsets(world.rho(), world.epsilon());
        let positions = StationarySampler::new(world, &offsets).sample_n(world.n(), &mut rng);
        let source = match source {
            Source::Node(id) => {
                assert!(id < world.n(), "source {id} out of range");
                id
            }
            Source::UniformRandom => rng.random_range(0..world.n()),
        };
        Self::from_state(world, analysis, NodeState::new(positions, source), rng)
    }

    /// Starts from explicit positions; the single informed node is the source.
    pub fn from_state(
        world: &'a WorldConfig,
        analysis: Option<&'a AnalysisConfig>,
        state: NodeState,
        rng: R,
    ) -> Self {
        assert_eq!(state.n(), world.n());
        let src = state.informed.ids().next().expect("one informed node");
        let source_xy = world.physical(state.positions[src]);
        Self {
            world,
            analysis,
            offsets: move_offsets(world.rho(), world.epsilon()),
            state,
            rng,
            component_every: None,
            source_xy,
        }
    }

    pub fn with_component_sampling(mut self, every: Option<u64>) -> Self {
        self.component_every = every.filter(|&k| k > 0);
        self
    }

    pub fn state(&self) -> &NodeState {
        &self.state
    }

    pub fn is_done(&self) -> bool {
        self.state.informed.is_full()
    }

    /// Record for the current state.
    pub fn record(&self, index: Option<&CellIndex>) -> StepRecord {
        let t = self.state.t;
        let (y_max, quasi_cells, density_ok) = match self.analysis {
            Some(a) => {
                let s = supercell_stats(&self.state, a, self.world);
                (
                    Some(s.y_max),
                    Some(s.quasi_informed_count(a.quasi_threshold())),
                    Some(s.density_ok(a.density_threshold())),
                )
            }
            None => (None, None, None),
        };
        let largest_comp_frac = match self.component_every {
            Some(k) if t.is_multiple_of(k) => {
                let r2 = self.world.r_sq_index();
                Some(match index {
                    Some(ix) => components_from_index(ix, r2).largest_fraction,
                    None => {
                        let ix =
                            build_cell_index(&self.state.positions, self.world.r(), self.world);
                        components_from_index(&ix, r2).largest_fraction
                    }
                })
            }
            _ => None,
        };
        let (sx, sy) = self.source_xy;
        let informed_radius = self
            .state
            .informed
            .ids()
            .map(|i| {
                let (x, y) = self.world.physical(self.state.positions[i]);
                (x - sx).hypot(y - sy)
            })
            .fold(0.0, f64::max);
        StepRecord {
            t,
            informed: self.state.informed.len(),
            y_max,
            quasi_cells,
            density_ok,
            largest_comp_frac,
            informed_radius,
        }
    }

    /// Move action, then transmission action; returns the new record.
    pub fn step(&mut self) -> StepRecord {
        step_move(&mut self.state, self.world, &self.offsets, &mut self.rng);
        let index = build_cell_index(&self.state.positions, self.world.r(), self.world);
        transmit(&mut self.state, self.world, &index);
        self.state.t += 1;
        self.record(Some(&index))
    }

    /// Runs to completion or `max_steps`.
    pub fn run(mut self, max_steps: u64) -> FloodTrace {
        let n = self.world.n();
        let source = self.state.informed.ids().next().unwrap();
        let source_position = self.state.positions[source];
        let (sx, sy) = self.source_xy;
        let initial_max_distance = self
            .state
            .positions
            .iter()
            .map(|&p| {
                let (x, y) = self.world.physical(p);
                (x - sx).hypot(y - sy)
            })
            .fold(0.0, f64::max);

        let quasi = self.analysis.map(|a| a.quasi_threshold());
        let mut trace = FloodTrace {
            n,
            rho: self.world.rho(),
            r: self.world.r(),
            max_steps,
            source,
            source_position,
            initial_max_distance,
            records: Vec::new(),
            bootstrap_end: None,
            spreading_end: None,
            flooding_time: None,
        };
        let mut rec = self.record(None);
        loop {
            if let (Some(th), Some(y)) = (quasi, rec.y_max) {
                if trace.bootstrap_end.is_none() && y as f64 >= th {
                    trace.bootstrap_end = Some(rec.t);
                }
                if trace.spreading_end.is_none()
                    && rec.quasi_cells == Some(self.analysis.unwrap().supercell_count())
                {
                    trace.spreading_end = Some(rec.t);
                }
            }
            let t = rec.t;
            trace.records.push(rec);
            if self.is_done() {
                trace.flooding_time = Some(t);
                break;
            }
            if t >= max_steps {
                break;
            }
            rec = self.step();
        }
        trace
    }
}

/// One full flooding run from a stationary start.
pub fn flood<R: Rng>(
    world: &WorldConfig,
    analysis: Option<&AnalysisConfig>,
    source: Source,
    rng: R,
    options: &FloodOptions,
) -> FloodTrace {
    assert!(options.max_steps >= 1, "max_steps must be at least 1");
    FloodSim::new(world, analysis, source, rng)
        .with_component_sampling(options.component_every)
        .run(options.max_steps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    fn idx(st: &NodeState, w: &WorldConfig) -> CellIndex {
        build_cell_index(&st.positions, w.r(), w)
    }

    #[test]
    fn supercell_partition_at_exact_upper_bound() {
        // rho/(2√2) = 8 exactly, so 128/16 = 8 fits; rho/(3√2) = 16/3.
        let a = AnalysisConfig::for_square(128.0, 16.0 * SQRT_2, 2.0, 0.1, 0.5).unwrap();
        assert_eq!(a.supercells_per_side(), 16);
        assert!((a.supercell_side() - 8.0).abs() < 1e-12);
        // cells: smallest k with 8/k <= √2 is 6
        assert_eq!(a.cells_per_supercell(), 6);
    }

    #[test]
    fn supercell_partition_matches_interval_enumeration() {
        for &(side, rho, r) in &[(64.0, 12.0, 2.0), (128.0, 32.0, 1.0), (90.5, 11.54, 2.0)] {
            let a = AnalysisConfig::for_square(side, rho, r, 0.1, 0.5).unwrap();
            let k = (1..10_000)
                .find(|&k| side / k as f64 <= rho / (2.0 * SQRT_2))
                .unwrap();
            assert_eq!(a.supercells_per_side(), k);
            let l = a.supercell_side();
            assert!(l >= rho / (3.0 * SQRT_2) && l <= rho / (2.0 * SQRT_2));
            let ell = a.cell_side();
            assert!(ell >= r / (1.0 + SQRT_2) && ell <= r / SQRT_2);
        }
    }

    #[test]
    fn degenerate_partitions() {
        // ρ beyond 3√2·side: even a single supercell is too small
        let side = 10.0;
        let e = AnalysisConfig::for_square(side, side * 3.0 * SQRT_2 + 1.0, 1.0, 0.1, 0.5);
        assert!(matches!(e, Err(Error::DegenerateGeometry(_))));
        assert!(matches!(
            AnalysisConfig::for_square(side, 0.0, 1.0, 0.1, 0.5),
            Err(Error::DegenerateGeometry(_))
        ));
        // r far larger than the supercell: one cell per supercell is still too small
        assert!(matches!(
            AnalysisConfig::for_square(64.0, 12.0, 30.0, 0.1, 0.5),
            Err(Error::DegenerateGeometry(_))
        ));
    }

    #[test]
    fn constructible_whenever_side_is_three_rho() {
        let mut ratio = 3.0;
        while ratio <= 100.0 {
            let rho = 10.0;
            assert!(
                AnalysisConfig::for_square(rho * ratio, rho, 1.0, 0.1, 0.5).is_ok(),
                "side/rho = {ratio}"
            );
            ratio += 0.01;
        }
    }

    #[test]
    fn neighborhood_is_eight_adjacent() {
        let a = AnalysisConfig::for_square(64.0, 12.0, 2.0, 0.1, 0.5).unwrap();
        assert_eq!(a.neighborhood(0).len(), 4);
        assert_eq!(a.neighborhood(a.supercells_per_side() + 1).len(), 9);
    }

    #[test]
    fn two_coincident_nodes() {
        let w = WorldConfig::new(2, 0.0, 1.0).unwrap();
        let mut st = NodeState::new(vec![GridPos::new(1, 1); 2], 0);
        let ix = idx(&st, &w);
        assert_eq!(transmit(&mut st, &w, &ix), 1);
        assert!(st.informed.is_full());
    }

    #[test]
    fn chain_needs_two_rounds() {
        let w = WorldConfig::new(100, 0.0, 2.0).unwrap();
        let mut st = NodeState::new(
            vec![GridPos::new(0, 0), GridPos::new(2, 0), GridPos::new(4, 0)],
            0,
        );
        let ix = idx(&st, &w);
        transmit(&mut st, &w, &ix);
        assert_eq!(st.informed.len(), 2);
        assert!(st.informed.contains(1));
        transmit(&mut st, &w, &ix);
        assert_eq!(st.informed.len(), 3);
    }

    #[test]
    fn flood_single_node() {
        let w = WorldConfig::new(1, 0.5, 1.0).unwrap();
        let tr = flood(
            &w,
            None,
            Source::UniformRandom,
            rng_from_seed(1),
            &FloodOptions::for_world(&w),
        );
        assert_eq!(tr.flooding_time, Some(0));
        assert_eq!(tr.records.len(), 1);
    }

    #[test]
    fn static_pair_within_and_beyond_r() {
        let w = WorldConfig::new(2, 0.0, 1.0).unwrap();
        let near = NodeState::new(vec![GridPos::new(0, 0), GridPos::new(1, 0)], 0);
        let tr = FloodSim::from_state(&w, None, near, rng_from_seed(0)).run(10);
        assert_eq!(tr.flooding_time, Some(1));
        let far = NodeState::new(vec![GridPos::new(0, 0), GridPos::new(1, 1)], 0);
        let tr = FloodSim::from_state(&w, None, far, rng_from_seed(0)).run(10);
        assert!(tr.timed_out());
        assert_eq!(tr.records.len(), 11);
        assert!(tr.summary_line().starts_with("flood_time=none"));
    }

    #[test]
    fn stats_partition_and_edge_cases() {
        let w = WorldConfig::new(4096, 12.0, 2.0).unwrap();
        let a = build_analysis_grid(&w, 0.1, 0.5).unwrap();
        // everyone in one corner, everyone informed
        let mut st = NodeState::new(vec![GridPos::new(0, 0); 4096], 0);
        for i in 0..4096 {
            st.informed.insert(i);
        }
        let s = supercell_stats(&st, &a, &w);
        assert_eq!(s.informed[0], 4096);
        assert!(s.informed[1..].iter().all(|&m| m == 0));
        assert_eq!(s.infected_cells[0], 1);
        assert!(!density_check(&st, &a, &w));
        let a0 = build_analysis_grid(&w, 0.1, 0.0).unwrap();
        assert!(density_check(&st, &a0, &w));

        let offs = move_offsets(12.0, 1.0);
        let mut rng = rng_from_seed(4);
        let pos = StationarySampler::new(&w, &offs).sample_n(4096, &mut rng);
        let mut st = NodeState::new(pos, 0);
        st.informed = crate::mobility::InformedSet::empty(4096);
        let s = supercell_stats(&st, &a, &w);
        assert_eq!(s.y_max, 0);
        assert_eq!(s.quasi_informed_count(a.quasi_threshold()), 0);
        for i in (0..4096).step_by(3) {
            st.informed.insert(i);
        }
        let s = supercell_stats(&st, &a, &w);
        assert_eq!(s.informed.iter().sum::<u32>() as usize, st.informed.len());
        assert_eq!(s.totals.iter().sum::<u32>(), 4096);
        let cells = (a.cells_per_supercell() * a.cells_per_supercell()) as u32;
        assert!(s.infected_cells.iter().all(|&z| z <= cells));
    }

    #[test]
    fn trace_invariants_hold_on_small_runs() {
        let w = WorldConfig::new(1024, 6.0, 1.5).unwrap();
        let a = build_analysis_grid(&w, 0.1, 0.5).unwrap();
        for seed in 0..5 {
            let opts = FloodOptions {
                component_every: Some(3),
                ..FloodOptions::for_world(&w)
            };
            let tr = flood(
                &w,
                Some(&a),
                Source::UniformRandom,
                rng_from_seed(seed),
                &opts,
            );
            assert!(
                tr.check_invariants().is_empty(),
                "{:?}",
                tr.check_invariants()
            );
            assert!(tr.flooding_time.is_some());
            assert!(tr.records[0].largest_comp_frac.is_some());
            assert!(tr.records[1].largest_comp_frac.is_none());
        }
    }

    #[test]
    fn trace_csv_layout() {
        let w = WorldConfig::new(2, 0.0, 1.0).unwrap();
        let st = NodeState::new(vec![GridPos::new(0, 0), GridPos::new(1, 0)], 0);
        let tr = FloodSim::from_state(&w, None, st, rng_from_seed(0)).run(5);
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "t,informed,y_max,quasi_cells,density_ok,largest_comp_frac\n0,1,,,,\n1,2,,,,\n"
        );
    }

    #[test]
    fn default_budget() {
        assert_eq!(
            default_max_steps(4096, 16.0),
            (50.0f64 * (4.0 + 12.0)).ceil() as u64
        );
        assert_eq!(default_max_steps(1, 0.0), 1);
        assert_eq!(default_max_steps(9, 0.0), 9);
        assert!(analysis_gamma(0.5) < 1e-5);
    }
}
