//! One pinned site coupled to one Langevin reservoir. The stationary state
//! of this linear system has `<p^2> = <q^2> = T` for `nu = 1`.
//!
//! ```bash
//! cargo run --release --example thermostat_check -- [steps]
//! ```

use pinned_toda::integrator::{BathSpec, StepperConfig, Trajectory};
use pinned_toda::stats::mean_stderr;
use pinned_toda::{ChainSpec, State};

const T: f64 = 2.0;
const BATCHES: u64 = 100;

fn main() -> pinned_toda::Result<()> {
    let steps: u64 = std::env::args().nth(1).map_or(1_000_000, |s| s.parse().expect("steps"));
    let spec = ChainSpec::open(1);
    let baths = BathSpec::single(0, 1.0, T);
    let mut traj = Trajectory::new(
        spec.clone(),
        State::zeros(&spec),
        Some(&baths),
        &StepperConfig::langevin(0.005, 7),
    )?;
    traj.advance(10_000)?;

    let per_batch = steps / BATCHES;
    let (mut p2, mut q2) = (Vec::new(), Vec::new());
    for _ in 0..BATCHES {
        let (mut sp, mut sq) = (0.0, 0.0);
        traj.evolve(per_batch, 1, |t| {
            sp += t.state().p[0].powi(2);
            sq += t.state().q[0].powi(2);
        })?;
        p2.push(sp / per_batch as f64);
        q2.push(sq / per_batch as f64);
    }
    for (name, xs) in [("<p^2>", &p2), ("<q^2>", &q2)] {
        let e = mean_stderr(xs);
        println!(
            "{name} = {:.4} +- {:.4}  ({:+.2} se from {T})",
            e.mean,
            e.stderr,
            (e.mean - T) / e.stderr
        );
    }
    Ok(())
}
