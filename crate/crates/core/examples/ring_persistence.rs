//! Isolated 200-site ring started from a three-site disturbance: total
//! current envelope, persistence ratio and dominant frequency.
//!
//! ```bash
//! cargo run --release --example ring_persistence -- [z] [t_final]
//! ```

use pinned_toda::ring::{run_ring, RingConfig};

fn main() -> pinned_toda::Result<()> {
    let mut args = std::env::args().skip(1);
    let z: u32 = args.next().map_or(2, |s| s.parse().expect("z"));
    let t_final: f64 = args.next().map_or(1_000.0, |s| s.parse().expect("t_final"));

    let mut config = RingConfig::desk(z);
    config.t_final = t_final;
    config.envelope_window = config.envelope_window.min(t_final / 20.0);
    let s = run_ring(&config)?;

    println!("{:>10} {:>10} {:>10}", "t", "env_max", "env_min");
    let env = &s.envelope;
    let fmt = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.4}"));
    for i in 0..env.t_center.len() {
        println!("{:>10.1} {:>10} {:>10}", env.t_center[i], fmt(env.env_max[i]), fmt(env.env_min[i]));
    }
    println!();
    println!("dominant angular frequency {} (nu = {})", fmt(s.omega), config.chain.nu);
    println!("persistence ratio {:.3}", s.persistence_ratio()?);
    println!("energy drift {:.2e}, h_c drift {:.2e}", s.energy_drift, s.hc_drift);
    Ok(())
}
