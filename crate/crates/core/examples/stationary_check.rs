//! Stationarity of the `|Γ(x)|`-weighted law: exact check against the
//! transition matrix, then an empirical check of the sampler.
//!
//! ```text
//! cargo run --release --example stationary_check
//! ```

use megflood::mobility::{
    gamma_size, move_offsets, stationary_distribution, transition_matrix, StationarySampler,
};
use megflood::rng::rng_from_seed;
use megflood::WorldConfig;

fn main() -> megflood::Result<()> {
    for (n, rho) in [(100, 1.0), (2500, 2.0), (9801, 3.0)] {
        let world = WorldConfig::new(n, rho, 1.0)?;
        let offs = move_offsets(rho, 1.0);
        let p = transition_matrix(&world, &offs)?;
        let pi = stationary_distribution(&world, &offs);
        let err = pi
            .iter()
            .zip(p.left_mul(&pi))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        println!(
            "grid {0}x{0}, rho={rho}: max |piP - pi| = {err:e}",
            world.points_per_axis()
        );
    }

    let world = WorldConfig::new(16, 1.0, 1.0)?;
    let offs = move_offsets(1.0, 1.0);
    let total: usize = (0..world.grid_points())
        .map(|k| gamma_size(world.point_at(k), &world, &offs) as usize)
        .sum();
    let sampler = StationarySampler::new(&world, &offs);
    let draws = 1_000_000;
    let mut counts = vec![0u64; world.grid_points()];
    let mut rng = rng_from_seed(5);
    for _ in 0..draws {
        counts[world.point_index(sampler.sample(&mut rng))] += 1;
    }
    println!("5x5 grid, {draws} draws:");
    for k in [0, 1, 6, 12] {
        let pos = world.point_at(k);
        let expect = gamma_size(pos, &world, &offs) as f64 / total as f64;
        println!(
            "  ({},{}) |Gamma|={} expected {expect:.5} observed {:.5}",
            pos.i,
            pos.j,
            gamma_size(pos, &world, &offs),
            counts[k] as f64 / draws as f64
        );
    }
    Ok(())
}
