//! Snapshot geometry: fixed-radius neighbor queries and connected components
//! of the disk graph `G_t`.

use crate::mobility::{index_radius_sq, GridPos, WorldConfig};

/// Uniform bucket grid over node positions, stored as a counting-sorted
/// array of node ids with per-bucket start offsets.
///
/// Buckets are `width` grid steps wide with `width·ε ≥ max(r, ε)`, so every
/// radius-`r` neighbor of a node sits in its own bucket or one of the eight
/// around it.
#[derive(Debug, Clone)]
pub struct CellIndex {
    width: u32,
    buckets_per_axis: usize,
    starts: Vec<u32>,
    ids: Vec<u32>,
    positions: Vec<GridPos>,
    epsilon: f64,
}

impl CellIndex {
    /// Bucket side in grid steps.
    pub fn bucket_width(&self) -> u32 {
        self.width
    }

    /// Bucket side in distance units.
    pub fn bucket_side(&self) -> f64 {
        self.width as f64 * self.epsilon
    }

    pub fn buckets_per_axis(&self) -> usize {
        self.buckets_per_axis
    }

    pub fn positions(&self) -> &[GridPos] {
        &self.positions
    }

    pub fn bucket_of(&self, pos: GridPos) -> (usize, usize) {
        ((pos.i / self.width) as usize, (pos.j / self.width) as usize)
    }

    /// Node ids in bucket `(bx, by)`.
    pub fn bucket(&self, bx: usize, by: usize) -> &[u32] {
        let b = bx * self.buckets_per_axis + by;
        &self.ids[self.starts[b] as usize..self.starts[b + 1] as usize]
    }

    /// Number of non-empty buckets.
    pub fn occupied_buckets(&self) -> usize {
        self.starts.windows(2).filter(|w| w[1] > w[0]).count()
    }

    /// Calls `f` for every id in the 3x3 bucket block around `pos`.
    fn for_each_candidate(&self, pos: GridPos, mut f: impl FnMut(u32)) {
        let (bx, by) = self.bucket_of(pos);
        let last = self.buckets_per_axis - 1;
        for x in bx.saturating_sub(1)..=(bx + 1).min(last) {
            for y in by.saturating_sub(1)..=(by + 1).min(last) {
                for &id in self.bucket(x, y) {
                    f(id);
                }
            }
        }
    }

    /// Ids `j ≠ id` within squared index distance `r2` of node `id`.
    pub(crate) fn for_each_neighbor(&self, id: usize, r2: u64, mut f: impl FnMut(usize)) {
        let p = self.positions[id];
        self.for_each_candidate(p, |j| {
            let j = j as usize;
            if j != id && p.dist_sq_index(self.positions[j]) <= r2 {
                f(j);
            }
        });
    }

    /// True if any node satisfying `pred` lies within `r2` of node `id`.
    pub(crate) fn any_neighbor(&self, id: usize, r2: u64, pred: impl Fn(usize) -> bool) -> bool {
        let p = self.positions[id];
        let (bx, by) = self.bucket_of(p);
        let last = self.buckets_per_axis - 1;
        for x in bx.saturating_sub(1)..=(bx + 1).min(last) {
            for y in by.saturating_sub(1)..=(by + 1).min(last) {
                for &j in self.bucket(x, y) {
                    let j = j as usize;
                    if j != id && pred(j) && p.dist_sq_index(self.positions[j]) <= r2 {
                        return true;
                    }
                }
            }
        }
        false
    }
}

pub fn build_cell_index(positions: &[GridPos], r: f64, world: &WorldConfig) -> CellIndex {
    let eps = world.epsilon();
    let reach = index_radius_sq(r, eps).isqrt() as u32;
    let width = ((r.max(eps) / eps) * (1.0 - 1e-12)).ceil().max(1.0) as u32;
    let width = width.max(reach);
    let buckets_per_axis = world.max_index() as usize / width as usize + 1;
    let nb = buckets_per_axis * buckets_per_axis;
    let key = |p: &GridPos| (p.i / width) as usize * buckets_per_axis + (p.j / width) as usize;

    let mut starts = vec![0u32; nb + 1];
    for p in positions {
        debug_assert!(world.contains(*p));
        starts[key(p) + 1] += 1;
    }
    for b in 0..nb {
        starts[b + 1] += starts[b];
    }
    let mut fill = starts.clone();
    let mut ids = vec![0u32; positions.len()];
    for (id, p) in positions.iter().enumerate() {
        let k = key(p);
        ids[fill[k] as usize] = id as u32;
        fill[k] += 1;
    }
    CellIndex {
        width,
        buckets_per_axis,
        starts,
        ids,
        positions: positions.to_vec(),
        epsilon: eps,
    }
}

/// Ids `j ≠ id` with `d(P_id, P_j) ≤ r`, in bucket scan order.
///
/// `r` may not exceed the radius the index was built for.
pub fn neighbors_within(index: &CellIndex, id: usize, r: f64) -> Vec<usize> {
    let r2 = index_radius_sq(r, index.epsilon);
    assert!(
        r2 < (index.width as u64 + 1).pow(2),
        "query radius {r} is larger than the index bucket side {}",
        index.bucket_side()
    );
    let mut out = Vec::new();
    index.for_each_neighbor(id, r2, |j| out.push(j));
    out
}

/// Disjoint-set forest with path compression and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
    sets: usize,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
            sets: n,
        }
    }

    pub fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] as usize != root {
            root = self.parent[root] as usize;
        }
        let mut x = x;
        while self.parent[x] as usize != root {
            let next = self.parent[x] as usize;
            self.parent[x] = root as u32;
            x = next;
        }
        root
    }

    /// Merges the sets of `a` and `b`; returns false if already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a as u32;
        self.size[a] += self.size[b];
        self.sets -= 1;
        true
    }

    pub fn set_count(&self) -> usize {
        self.sets
    }

    /// Sizes of all sets, largest first.
    pub fn set_sizes(&self) -> Vec<usize> {
        let mut sizes: Vec<usize> = (0..self.parent.len())
            .filter(|&x| self.parent[x] as usize == x)
            .map(|x| self.size[x] as usize)
            .collect();
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        sizes
    }
}

/// Component structure of one snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentReport {
    /// Component sizes, descending.
    pub sizes: Vec<usize>,
    pub largest_fraction: f64,
    pub count: usize,
}

impl ComponentReport {
    pub fn largest(&self) -> usize {
        self.sizes.first().copied().unwrap_or(0)
    }
}

/// Components of the disk graph with radius `r` over `positions`.
pub fn connected_components(positions: &[GridPos], r: f64, world: &WorldConfig) -> ComponentReport {
    let index = build_cell_index(positions, r, world);
    components_from_index(&index, index_radius_sq(r, world.epsilon()))
}

pub(crate) fn components_from_index(index: &CellIndex, r2: u64) -> ComponentReport {
    let n = index.positions().len();
    let mut uf = UnionFind::new(n);
    for i in 0..n {
        index.for_each_neighbor(i, r2, |j| {
            if j > i {
                uf.union(i, j);
            }
        });
    }
    let sizes = uf.set_sizes();
    let largest_fraction = if n == 0 {
        0.0
    } else {
        sizes[0] as f64 / n as f64
    };
    ComponentReport {
        count: sizes.len(),
        largest_fraction,
        sizes,
    }
}
