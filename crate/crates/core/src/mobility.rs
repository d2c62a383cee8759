//! Node mobility on the discretized square.
//!
//! Nodes live on the grid `{(iε, jε) : 0 ≤ i, j ≤ ⌊√n/ε⌋}` and, at every
//! step, jump to a uniformly chosen grid point within Euclidean distance `ρ`
//! of their current position. Walls clip the reachable set rather than
//! wrapping, so border points have fewer moves and the walk's stationary law
//! is proportional to the size of that clipped set.
//!
//! All distance tests are done in index space: an offset `(di, dj)` is within
//! radius `R` iff the integer `di² + dj²` does not exceed the real `(R/ε)²`,
//! ties included.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::error::{Error, Result};

/// Largest grid accepted by [`transition_matrix`].
pub const TRANSITION_MATRIX_MAX_POINTS: usize = 10_000;

/// `⌊(radius/ε)²⌋`: the largest integer squared index distance that still
/// counts as "within `radius`".
pub fn index_radius_sq(radius: f64, epsilon: f64) -> u64 {
    let q = radius / epsilon;
    (q * q).floor() as u64
}

/// Model parameters of one world.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldConfig {
    n: usize,
    epsilon: f64,
    rho: f64,
    r: f64,
    max_index: u32,
    rho_sq_idx: u64,
    r_sq_idx: u64,
}

impl WorldConfig {
    /// World with unit resolution.
    pub fn new(n: usize, rho: f64, r: f64) -> Result<Self> {
        Self::with_epsilon(n, 1.0, rho, r)
    }

    pub fn with_epsilon(n: usize, epsilon: f64, rho: f64, r: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidConfig("n must be at least 1".into()));
        }
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "epsilon must be > 0, got {epsilon}"
            )));
        }
        if !(rho.is_finite() && rho >= 0.0) {
            return Err(Error::InvalidConfig(format!("rho must be >= 0, got {rho}")));
        }
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::InvalidConfig(format!("r must be > 0, got {r}")));
        }
        let side = (n as f64).sqrt();
        if rho > side {
            return Err(Error::InvalidConfig(format!(
                "rho = {rho} exceeds the square side {side}"
            )));
        }
        // Relative slack keeps exact quotients such as 64/0.1 from flooring down.
        let max_index = (side / epsilon * (1.0 + 1e-12)).floor();
        if max_index > u32::MAX as f64 / 2.0 {
            return Err(Error::InvalidConfig(
                "grid too fine for 32-bit indices".into(),
            ));
        }
        Ok(Self {
            n,
            epsilon,
            rho,
            r,
            max_index: max_index as u32,
            rho_sq_idx: index_radius_sq(rho, epsilon),
            r_sq_idx: index_radius_sq(r, epsilon),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// Side length `√n` of the square.
    pub fn side(&self) -> f64 {
        (self.n as f64).sqrt()
    }

    /// Largest grid index on either axis, `⌊√n/ε⌋`.
    pub fn max_index(&self) -> u32 {
        self.max_index
    }

    pub fn points_per_axis(&self) -> usize {
        self.max_index as usize + 1
    }

    pub fn grid_points(&self) -> usize {
        self.points_per_axis() * self.points_per_axis()
    }

    /// `⌊(r/ε)²⌋`, the transmission threshold in squared index units.
    pub fn r_sq_index(&self) -> u64 {
        self.r_sq_idx
    }

    pub fn rho_sq_index(&self) -> u64 {
        self.rho_sq_idx
    }

    pub fn contains(&self, pos: GridPos) -> bool {
        pos.i <= self.max_index && pos.j <= self.max_index
    }

    pub fn physical(&self, pos: GridPos) -> (f64, f64) {
        (pos.i as f64 * self.epsilon, pos.j as f64 * self.epsilon)
    }

    /// Row-major index of a grid point.
    pub fn point_index(&self, pos: GridPos) -> usize {
        pos.i as usize * self.points_per_axis() + pos.j as usize
    }

    pub fn point_at(&self, index: usize) -> GridPos {
        let p = self.points_per_axis();
        GridPos::new((index / p) as u32, (index % p) as u32)
    }
}

/// Grid point `(iε, jε)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GridPos {
    pub i: u32,
    pub j: u32,
}

impl GridPos {
    pub const fn new(i: u32, j: u32) -> Self {
        Self { i, j }
    }

    pub fn dist_sq_index(self, other: GridPos) -> u64 {
        let di = self.i.abs_diff(other.i) as u64;
        let dj = self.j.abs_diff(other.j) as u64;
        di * di + dj * dj
    }
}

/// Integer offsets reachable in one move from an interior point.
///
/// The set is a lattice disk, so it is also stored row by row: for each
/// `di` in `-reach..=reach` every `dj` with `|dj| ≤ half_width(di)` is a
/// member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OffsetSet {
    offsets: Vec<(i32, i32)>,
    half_widths: Vec<u32>,
    reach: u32,
}

impl OffsetSet {
    fn from_radius_sq(r2: u64) -> Self {
        let mut reach = (r2 as f64).sqrt() as u64;
        while reach * reach > r2 {
            reach -= 1;
        }
        while (reach + 1) * (reach + 1) <= r2 {
            reach += 1;
        }
        let reach = reach as u32;
        let mut half_widths = Vec::with_capacity(2 * reach as usize + 1);
        let mut offsets = Vec::new();
        for di in -(reach as i64)..=reach as i64 {
            let rem = r2 - (di * di) as u64;
            let mut w = (rem as f64).sqrt() as u64;
            while w * w > rem {
                w -= 1;
            }
            while (w + 1) * (w + 1) <= rem {
                w += 1;
            }
            half_widths.push(w as u32);
            for dj in -(w as i64)..=w as i64 {
                offsets.push((di as i32, dj as i32));
            }
        }
        Self {
            offsets,
            half_widths,
            reach,
        }
    }

    pub fn offsets(&self) -> &[(i32, i32)] {
        &self.offsets
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    /// Largest `|di|` in the set.
    pub fn reach(&self) -> u32 {
        self.reach
    }

    /// Largest `|dj|` for a given row offset, or `None` outside the disk.
    pub fn half_width(&self, di: i32) -> Option<u32> {
        let k = di + self.reach as i32;
        if k < 0 {
            return None;
        }
        self.half_widths.get(k as usize).copied()
    }
}

/// Offsets `(di, dj)` with `di² + dj² ≤ (ρ/ε)²`.
pub fn move_offsets(rho: f64, epsilon: f64) -> OffsetSet {
    assert!(
        rho >= 0.0 && epsilon > 0.0,
        "move_offsets needs rho >= 0 and epsilon > 0"
    );
    OffsetSet::from_radius_sq(index_radius_sq(rho, epsilon))
}

/// `|Γ(pos)|`: the number of offsets that keep a node at `pos` on the grid.
pub fn gamma_size(pos: GridPos, world: &WorldConfig, offs: &OffsetSet) -> u32 {
    debug_assert!(world.contains(pos));
    let e = world.max_index() as i64;
    let (i, j) = (pos.i as i64, pos.j as i64);
    let reach = offs.reach() as i64;
    let mut count = 0u32;
    for di in (-reach).max(-i)..=reach.min(e - i) {
        let w = offs.half_widths[(di + reach) as usize] as i64;
        let lo = (j - w).max(0);
        let hi = (j + w).min(e);
        count += (hi - lo + 1) as u32;
    }
    count
}

/// Per-node state of one flooding run.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeState {
    pub positions: Vec<GridPos>,
    pub informed: InformedSet,
    pub t: u64,
}

impl NodeState {
    /// State at time 0 with only `source` informed.
    pub fn new(positions: Vec<GridPos>, source: usize) -> Self {
        let mut informed = InformedSet::empty(positions.len());
        informed.insert(source);
        Self {
            positions,
            informed,
            t: 0,
        }
    }

    pub fn n(&self) -> usize {
        self.positions.len()
    }
}

/// Membership set over node ids `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InformedSet {
    flags: Vec<bool>,
    count: usize,
}

impl InformedSet {
    pub fn empty(n: usize) -> Self {
        Self {
            flags: vec![false; n],
            count: 0,
        }
    }

    pub fn contains(&self, id: usize) -> bool {
        self.flags[id]
    }

    /// Returns true if `id` was not yet a member.
    pub fn insert(&mut self, id: usize) -> bool {
        if self.flags[id] {
            false
        } else {
            self.flags[id] = true;
            self.count += 1;
            true
        }
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn capacity(&self) -> usize {
        self.flags.len()
    }

    pub fn is_full(&self) -> bool {
        self.count == self.flags.len()
    }

    pub fn flags(&self) -> &[bool] {
        &self.flags
    }

    pub fn ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.flags
            .iter()
            .enumerate()
            .filter_map(|(i, &f)| f.then_some(i))
    }
}

/// Draws positions from the stationary law `π(x) ∝ |Γ(x)|` using a
/// cumulative-weight table over all grid points.
#[derive(Debug, Clone)]
pub struct StationarySampler {
    world: WorldConfig,
    table: WeightedIndex<u64>,
}

impl StationarySampler {
    pub fn new(world: &WorldConfig, offs: &OffsetSet) -> Self {
        let weights =
            (0..world.grid_points()).map(|k| gamma_size(world.point_at(k), world, offs) as u64);
        let table = WeightedIndex::new(weights).expect("every grid point has |Γ| >= 1");
        Self {
            world: world.clone(),
            table,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> GridPos {
        self.world.point_at(self.table.sample(rng))
    }

    pub fn sample_n<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<GridPos> {
        (0..n).map(|_| self.sample(rng)).collect()
    }
}

/// Independent stationary positions for all `n` nodes.
pub fn sample_stationary<R: Rng + ?Sized>(
    world: &WorldConfig,
    offs: &OffsetSet,
    rng: &mut R,
) -> Vec<GridPos> {
    StationarySampler::new(world, offs).sample_n(world.n(), rng)
}

/// One uniform move from `pos` over its clipped neighborhood.
///
/// Draws from the full offset disk and redraws on leaving the grid, which is
/// exactly uniform over the in-bounds offsets.
pub fn move_once<R: Rng + ?Sized>(
    pos: GridPos,
    world: &WorldConfig,
    offs: &OffsetSet,
    rng: &mut R,
) -> GridPos {
    if offs.len() == 1 {
        return pos;
    }
    let e = world.max_index() as i64;
    loop {
        let (di, dj) = offs.offsets[rng.random_range(0..offs.len())];
        let ni = pos.i as i64 + di as i64;
        let nj = pos.j as i64 + dj as i64;
        if (0..=e).contains(&ni) && (0..=e).contains(&nj) {
            return GridPos::new(ni as u32, nj as u32);
        }
    }
}

/// Move action: every node jumps independently. The informed set and the
/// clock are left alone; the clock advances after transmission.
pub fn step_move<R: Rng + ?Sized>(
    state: &mut NodeState,
    world: &WorldConfig,
    offs: &OffsetSet,
    rng: &mut R,
) {
    for p in state.positions.iter_mut() {
        *p = move_once(*p, world, offs, rng);
    }
}

/// Sparse row-stochastic matrix of the single-node walk, indexed by
/// [`WorldConfig::point_index`].
#[derive(Debug, Clone)]
pub struct TransitionMatrix {
    size: usize,
    row_starts: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl TransitionMatrix {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn row(&self, x: usize) -> (&[usize], &[f64]) {
        let range = self.row_starts[x]..self.row_starts[x + 1];
        (&self.cols[range.clone()], &self.vals[range])
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        let (cols, vals) = self.row(x);
        match cols.binary_search(&y) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    /// `v · P`.
    pub fn left_mul(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.size);
        let mut out = vec![0.0; self.size];
        for (x, &vx) in v.iter().enumerate() {
            let (cols, vals) = self.row(x);
            for (&y, &p) in cols.iter().zip(vals) {
                out[y] += vx * p;
            }
        }
        out
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.size)
            .map(|x| {
                let mut row = vec![0.0; self.size];
                let (cols, vals) = self.row(x);
                for (&y, &p) in cols.iter().zip(vals) {
                    row[y] = p;
                }
                row
            })
            .collect()
    }
}

/// Exact one-step transition matrix: `1/|Γ(x)|` on every `y ∈ Γ(x)`.
pub fn transition_matrix(world: &WorldConfig, offs: &OffsetSet) -> Result<TransitionMatrix> {
    let size = world.grid_points();
    if size > TRANSITION_MATRIX_MAX_POINTS {
        return Err(Error::GridTooLarge {
            points: size,
            limit: TRANSITION_MATRIX_MAX_POINTS,
        });
    }
    let e = world.max_index() as i64;
    let mut row_starts = Vec::with_capacity(size + 1);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    row_starts.push(0);
    for x in 0..size {
        let p = world.point_at(x);
        let start = cols.len();
        for &(di, dj) in offs.offsets() {
            let ni = p.i as i64 + di as i64;
            let nj = p.j as i64 + dj as i64;
            if (0..=e).contains(&ni) && (0..=e).contains(&nj) {
                cols.push(world.point_index(GridPos::new(ni as u32, nj as u32)));
            }
        }
        cols[start..].sort_unstable();
        let deg = (cols.len() - start) as f64;
        vals.extend(std::iter::repeat_n(1.0 / deg, cols.len() - start));
        row_starts.push(cols.len());
    }
    Ok(TransitionMatrix {
        size,
        row_starts,
        cols,
        vals,
    })
}

/// Normalized stationary weights `|Γ(x)| / Σ_y |Γ(y)|` over all grid points.
pub fn stationary_distribution(world: &WorldConfig, offs: &OffsetSet) -> Vec<f64> {
    let w: Vec<f64> = (0..world.grid_points())
        .map(|k| gamma_size(world.point_at(k), world, offs) as f64)
        .collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}
