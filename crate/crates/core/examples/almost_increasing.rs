//! Monte Carlo tail of an adversarial almost-increasing process against the
//! `e^{-pt}` bound.
//!
//! ```text
//! cargo run --release --example almost_increasing -- [trials]
//! ```

use megflood::lemmas::{simulate_almost_increasing, AlmostIncreasingSpec};
use megflood::rng::rng_from_seed;

fn main() -> megflood::Result<()> {
    let trials: u64 = std::env::args()
        .nth(1)
        .map_or(100_000, |s| s.parse().expect("trials"));
    let spec = AlmostIncreasingSpec::new(2.0, 1.0 / 121.0, 1000, 0.01)?;
    println!(
        "p limit {:.5}, first admissible t = {}",
        spec.p_limit(),
        spec.min_t()
    );
    let mut rng = rng_from_seed(4);
    for t in [spec.min_t(), spec.min_t() + 5, spec.min_t() + 20, 100] {
        let e = simulate_almost_increasing(&spec, &spec.adversarial(), t, trials, &mut rng)?;
        println!(
            "t={t:>3}: P(stuck below M) = {:.5} +- {:.5}, bound {:.5} [{}]",
            e.probability,
            e.std_error,
            e.bound,
            if e.within_bound() { "ok" } else { "exceeded" }
        );
    }
    Ok(())
}
