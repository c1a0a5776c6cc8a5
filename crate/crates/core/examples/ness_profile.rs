//! Harmonic-pinned chain between reservoirs at 4 and 1: temperature profile,
//! bond currents and the three current estimators.
//!
//! ```bash
//! cargo run --release --example ness_profile -- [N] [steps] [z]
//! ```

use pinned_toda::ness::{estimator_agreement, run_ness, NessConfig};
use pinned_toda::ChainSpec;

fn main() -> pinned_toda::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(32, |s| s.parse().expect("N"));
    let steps: u64 = args.next().map_or(2_000_000, |s| s.parse().expect("steps"));
    let z: u32 = args.next().map_or(2, |s| s.parse().expect("z"));

    let mut config = NessConfig::desk(ChainSpec::fixed(n).with_pinning(1.0, z), 4.0, 1.0);
    config.steps_relax = steps;
    config.steps_measure = steps;
    config.measure_stride = 10;
    let r = run_ness(&config)?;

    println!("{:>5} {:>8} {:>10} {:>9} {:>10} {:>9}", "site", "x", "T", "se", "J", "se");
    for i in 0..r.n {
        let t = &r.temp_profile[i];
        let j = r.current_profile.get(i);
        println!(
            "{:>5} {:>8.4} {:>10.5} {:>9.5} {:>10} {:>9}",
            i + 1,
            r.position(i + 1),
            t.mean,
            t.stderr,
            j.map_or(String::new(), |e| format!("{:.5}", e.mean)),
            j.map_or(String::new(), |e| format!("{:.5}", e.stderr)),
        );
    }
    println!();
    println!("J_bulk  = {:.5} +- {:.5}", r.j_bulk.mean, r.j_bulk.stderr);
    println!("J_left  = {:.5} +- {:.5}", r.j_left.mean, r.j_left.stderr);
    println!("J_right = {:.5} +- {:.5}", r.j_right.mean, r.j_right.stderr);
    println!("estimator agreement {:.4}", estimator_agreement(&r)?);
    println!("middle-half T spread {:.4}", r.middle_temperature_spread());
    println!("worst bond deviation {:.2} se", r.current_profile_deviation());
    Ok(())
}
