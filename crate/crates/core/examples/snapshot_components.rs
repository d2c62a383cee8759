//! Component structure of stationary snapshots with a small transmission
//! radius.
//!
//! ```text
//! cargo run --release --example snapshot_components -- [n] [r] [samples]
//! ```

use megflood::mobility::{move_offsets, StationarySampler};
use megflood::rng::{rng_from_seed, trial_seed};
use megflood::{connected_components, WorldConfig};

fn main() -> megflood::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n: usize = args.first().map_or(16384, |s| s.parse().expect("n"));
    let r: f64 = args.get(1).map_or(1.0, |s| s.parse().expect("r"));
    let samples: u64 = args.get(2).map_or(10, |s| s.parse().expect("samples"));

    let rho = 32.0_f64.min((n as f64).sqrt());
    let world = WorldConfig::new(n, rho, r)?;
    let sampler = StationarySampler::new(&world, &move_offsets(rho, 1.0));
    for k in 0..samples {
        let pos = sampler.sample_n(n, &mut rng_from_seed(trial_seed(3, 0, k)));
        let rep = connected_components(&pos, r, &world);
        let singletons = rep.sizes.iter().filter(|&&s| s == 1).count();
        println!(
            "snapshot {k}: {} components, largest {} ({:.3}), {singletons} isolated nodes",
            rep.count,
            rep.largest(),
            rep.largest_fraction
        );
    }
    Ok(())
}
