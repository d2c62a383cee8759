//! One flooding run with per-step phase markers.
//!
//! ```text
//! cargo run --release --example flood_once -- [n] [r] [seed]
//! ```

use megflood::flooding::{
    build_analysis_grid, flood, FloodOptions, Source, DEFAULT_ETA, DEFAULT_GAMMA,
};
use megflood::rng::rng_from_seed;
use megflood::{RhoRule, WorldConfig};

fn main() -> megflood::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n: usize = args.first().map_or(4096, |s| s.parse().expect("n"));
    let r: f64 = args.get(1).map_or(2.0, |s| s.parse().expect("r"));
    let seed: u64 = args.get(2).map_or(1, |s| s.parse().expect("seed"));

    let rho = RhoRule::SqrtLog(4.0).eval(n);
    let world = WorldConfig::new(n, rho, r)?;
    let analysis = build_analysis_grid(&world, DEFAULT_GAMMA, DEFAULT_ETA)?;
    println!(
        "n={n} rho={rho:.3} r={r}: {}x{} supercells, {} cells per supercell side",
        analysis.supercells_per_side(),
        analysis.supercells_per_side(),
        analysis.cells_per_supercell()
    );

    let opts = FloodOptions {
        component_every: Some(1),
        ..FloodOptions::for_world(&world)
    };
    let trace = flood(
        &world,
        Some(&analysis),
        Source::UniformRandom,
        rng_from_seed(seed),
        &opts,
    );
    for rec in &trace.records {
        println!(
            "t={:>3} informed={:>6} Y={:>4} quasi={:>4} largest_comp={:.3}",
            rec.t,
            rec.informed,
            rec.y_max.unwrap_or(0),
            rec.quasi_cells.unwrap_or(0),
            rec.largest_comp_frac.unwrap_or(f64::NAN)
        );
    }
    println!("{}", trace.summary_line());
    println!(
        "distance bound {} steps, guaranteed bound {} steps",
        trace.speed_limit_bound(),
        trace.guaranteed_lower_bound()
    );
    Ok(())
}
