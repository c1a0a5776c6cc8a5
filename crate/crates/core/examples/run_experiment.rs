//! Library-level equivalent of `simulate ring --config ... --out ...`:
//! parse an experiment file, run it, and check the manifest digests.
//!
//! ```bash
//! cargo run --release --example run_experiment -- [out_dir]
//! ```

use pinned_toda::config::parse_config;
use pinned_toda::harness;
use pinned_toda::output::verify_manifest;

const CONFIG: &str = r#"
kind = "ring"
master_seed = 1

[chain]
total_sites = 200
z = 2

[ring]
dt = 1e-3
t_final = 500.0
sample_stride = 100
envelope_window = 50.0
"#;

fn main() -> pinned_toda::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "ring_run".into());
    let config = parse_config(CONFIG)?;
    let manifest = harness::run(&config, out.as_ref(), 1)?;
    let m = verify_manifest(manifest.parent().expect("manifest lives in the run dir"))?;
    for f in &m.files {
        println!("{:<20} {:>9} bytes  {}", f.path, f.bytes, &f.sha256[..16]);
    }
    Ok(())
}
