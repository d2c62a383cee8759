//! Brute-force oracles shared by the integration tests. Nothing here calls
//! into the spatial index or the flooding engine.

#![allow(dead_code)]

use std::collections::{BTreeSet, VecDeque};

use megflood::GridPos;
use rand::Rng;

/// `d(a, b) ≤ r` evaluated in floating point on physical coordinates.
pub fn within(a: GridPos, b: GridPos, r: f64, eps: f64) -> bool {
    let dx = (a.i as f64 - b.i as f64) * eps;
    let dy = (a.j as f64 - b.j as f64) * eps;
    // squared index distance is an exact integer; compare against (r/eps)^2
    let d2 = (dx / eps).powi(2) + (dy / eps).powi(2);
    d2 <= (r / eps) * (r / eps)
}

pub fn all_pairs_neighbors(pos: &[GridPos], r: f64, eps: f64) -> Vec<BTreeSet<usize>> {
    (0..pos.len())
        .map(|i| {
            (0..pos.len())
                .filter(|&j| j != i && within(pos[i], pos[j], r, eps))
                .collect()
        })
        .collect()
}

/// One transmission round over the all-pairs graph.
pub fn oracle_round(pos: &[GridPos], informed: &[bool], r: f64, eps: f64) -> Vec<bool> {
    (0..pos.len())
        .map(|j| {
            informed[j] || (0..pos.len()).any(|i| informed[i] && within(pos[i], pos[j], r, eps))
        })
        .collect()
}

/// Component sizes (descending) by BFS over the all-pairs graph.
pub fn bfs_components(pos: &[GridPos], r: f64, eps: f64) -> Vec<Vec<usize>> {
    let adj = all_pairs_neighbors(pos, r, eps);
    let mut seen = vec![false; pos.len()];
    let mut comps = Vec::new();
    for s in 0..pos.len() {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut comp = vec![s];
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    comp.push(v);
                    q.push_back(v);
                }
            }
        }
        comp.sort_unstable();
        comps.push(comp);
    }
    comps
}

/// Uniform positions on a grid with `max_index + 1` points per axis,
/// optionally clustered to create dense neighborhoods.
pub fn random_positions<R: Rng>(n: usize, max_index: u32, rng: &mut R) -> Vec<GridPos> {
    let clustered = rng.random_bool(0.3);
    let (ci, cj) = (
        rng.random_range(0..=max_index),
        rng.random_range(0..=max_index),
    );
    (0..n)
        .map(|_| {
            if clustered {
                let spread = 3.max(max_index / 8) as i64;
                let f = |c: u32, rng: &mut R| {
                    (c as i64 + rng.random_range(-spread..=spread)).clamp(0, max_index as i64)
                        as u32
                };
                GridPos::new(f(ci, rng), f(cj, rng))
            } else {
                GridPos::new(
                    rng.random_range(0..=max_index),
                    rng.random_range(0..=max_index),
                )
            }
        })
        .collect()
}

pub fn boundary_by_definition(
    m: usize,
    members: &BTreeSet<(usize, usize)>,
) -> BTreeSet<(usize, usize)> {
    let mut out = BTreeSet::new();
    for r in 0..m {
        for c in 0..m {
            if members.contains(&(r, c)) {
                continue;
            }
            let adjacent = members
                .iter()
                .any(|&(br, bc)| br.abs_diff(r) + bc.abs_diff(c) == 1);
            if adjacent {
                out.insert((r, c));
            }
        }
    }
    out
}
