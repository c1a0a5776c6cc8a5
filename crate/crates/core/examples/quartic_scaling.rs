//! Current against chain length for harmonic and quartic pinning, and the
//! exponent `alpha` in `J ~ N^-alpha`.
//!
//! ```bash
//! cargo run --release --example quartic_scaling -- [steps] [N...]
//! ```

use pinned_toda::config::SweepConfig;
use pinned_toda::harness::run_sweep;
use pinned_toda::ness::{scaling_exponent_least_squares, scaling_exponent_two_point, NessConfig};
use pinned_toda::ChainSpec;

fn main() -> pinned_toda::Result<()> {
    let mut args = std::env::args().skip(1);
    let steps: u64 = args.next().map_or(1_000_000, |s| s.parse().expect("steps"));
    let mut sizes: Vec<usize> = args.map(|s| s.parse().expect("N")).collect();
    if sizes.is_empty() {
        sizes = vec![16, 32, 64];
    }

    for z in [2, 4] {
        let mut base = NessConfig::desk(ChainSpec::fixed(sizes[0]).with_pinning(1.0, z), 4.0, 1.0);
        base.steps_relax = steps;
        base.steps_measure = steps;
        base.measure_stride = 10;
        let sweep = SweepConfig {
            base,
            n_values: sizes.clone(),
            nu_values: vec![1.0],
        };
        let results = run_sweep(&sweep)?;
        println!("z = {z}");
        for r in &results {
            println!("  N = {:>4}  J_bulk = {:.5} +- {:.5}", r.n, r.j_bulk.mean, r.j_bulk.stderr);
        }
        let pts: Vec<(f64, f64)> = results.iter().map(|r| (r.n as f64, r.j_bulk.mean)).collect();
        println!(
            "  alpha: two-point {:.3}, least squares {:.3}",
            scaling_exponent_two_point(&pts)?,
            scaling_exponent_least_squares(&pts)?
        );
    }
    Ok(())
}
