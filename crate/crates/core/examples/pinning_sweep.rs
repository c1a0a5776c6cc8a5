//! Steady-state current as the pinning strength grows.
//!
//! ```bash
//! cargo run --release --example pinning_sweep -- [N] [steps]
//! ```

use pinned_toda::ness::{estimator_agreement, pinning_sweep, NessConfig};
use pinned_toda::ChainSpec;

fn main() -> pinned_toda::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(32, |s| s.parse().expect("N"));
    let steps: u64 = args.next().map_or(1_000_000, |s| s.parse().expect("steps"));

    let mut config = NessConfig::desk(ChainSpec::fixed(n), 4.0, 1.0);
    config.steps_relax = steps;
    config.steps_measure = steps;
    config.measure_stride = 10;
    println!("{:>5} {:>10} {:>9} {:>10}", "nu", "J_bulk", "se", "agreement");
    for (nu, r) in pinning_sweep(&config, &[0.0, 0.5, 1.0, 2.0])? {
        println!(
            "{nu:>5} {:>10.5} {:>9.5} {:>10.4}",
            r.j_bulk.mean,
            r.j_bulk.stderr,
            estimator_agreement(&r)?
        );
    }
    Ok(())
}
