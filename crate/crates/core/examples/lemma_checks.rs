//! Combinatorial checks: boundary size on small grids and the spreading-time
//! bound for the slowest admissible growth sequence.
//!
//! ```text
//! cargo run --release --example lemma_checks
//! ```

use megflood::lemmas::{
    boundary, minimal_spreading_sequence, spreading_bound, verify_boundary_lemma,
    verify_boundary_sampled, verify_spreading_lemma, CellSubset,
};
use megflood::rng::rng_from_seed;

fn main() -> megflood::Result<()> {
    let corner = CellSubset::from_cells(4, [(0, 0), (0, 1), (1, 0), (1, 1)])?;
    println!("2x2 block in a 4x4 grid: boundary {:?}", boundary(&corner));

    println!("{}", verify_boundary_lemma(4)?);
    println!(
        "{}",
        verify_boundary_sampled(16, 100_000, 9, &mut rng_from_seed(9))
    );

    let s = verify_spreading_lemma(10_000);
    println!("{} (max steps/5sqrtK = {:.4})", s.report, s.max_ratio);
    for k in [10, 100, 1000, 10_000] {
        println!(
            "  K={k:>5}: {:>3} steps, bound {}",
            minimal_spreading_sequence(k),
            spreading_bound(k)
        );
    }
    Ok(())
}
