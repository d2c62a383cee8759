//! Parameter sweep and least-squares fit of median flooding time against
//! `a·√n/ρ + b·log₂ n + c`.
//!
//! ```text
//! cargo run --release --example scaling_sweep -- [trials] [jobs]
//! ```

use megflood::experiments::{fit_scaling, run_sweep, write_sweep_csv, SweepPoint};
use megflood::{RhoRule, SweepSpec};

fn main() -> megflood::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let trials: u32 = args.first().map_or(10, |s| s.parse().expect("trials"));
    let jobs: usize = args.get(1).map_or(4, |s| s.parse().expect("jobs"));

    let points = [1024, 2304, 4096, 9216, 16384]
        .into_iter()
        .map(|n| SweepPoint::new(n, RhoRule::SqrtLog(4.0), 2.0))
        .collect();
    let spec = SweepSpec::new(points, trials, 42);
    let results = run_sweep(&spec, jobs)?;

    let path = std::env::temp_dir().join("megflood_scaling.csv");
    write_sweep_csv(&results, std::fs::File::create(&path)?)?;
    println!("{} rows written to {}", results.len(), path.display());

    let fit = fit_scaling(&results)?;
    for p in &fit.points {
        println!(
            "n={:>6} rho={:.3} median={:>5.1} fitted={:>5.1} timeouts={}",
            p.n,
            p.rho,
            p.median,
            fit.predict(p.n, p.rho),
            p.timeouts
        );
    }
    println!(
        "T ~ {:.3}*sqrt(n)/rho + {:.3}*log2(n) + {:.3}, residual ratio {:.3}, growth T(4n)/T(n) {:?}",
        fit.a, fit.b, fit.c, fit.residual_ratio, fit.growth_ratio
    );
    Ok(())
}
