//! Poincaré sections of the three-body chain from random initial states,
//! sliced at fixed momentum, with box-counting dimensions of every slice.
//!
//! ```bash
//! cargo run --release --example poincare_sections -- [states] [t_final]
//! ```

use pinned_toda::poincare::{run_study, InitialConditions, PoincareStudy};

fn main() -> pinned_toda::Result<()> {
    let mut args = std::env::args().skip(1);
    let count: usize = args.next().map_or(2, |s| s.parse().expect("states"));
    let t_final: f64 = args.next().map_or(2e4, |s| s.parse().expect("t_final"));

    let mut study = PoincareStudy::desk();
    study.t_final = t_final;
    if let InitialConditions::Random { energy_scale, .. } = study.initial {
        study.initial = InitialConditions::Random { count, energy_scale };
    }
    for (i, r) in run_study(&study)?.iter().enumerate() {
        println!(
            "state {i}: q = {:.3?}, p = {:.3?}, {} events, H drift {:.1e}, h_c drift {:.1e}",
            r.initial.q,
            r.initial.p,
            r.run.events.len(),
            r.run.energy_drift,
            r.run.hc_drift
        );
        for o in &r.slices {
            let sl = &o.slice;
            match o.dimension() {
                Some(d) => println!(
                    "  p{} = {:+.3} (tol {}): {} points, dimension {d:.3}",
                    sl.index,
                    sl.value,
                    sl.tolerance,
                    sl.points.len()
                ),
                None => println!(
                    "  p{} = {:+.3}: skipped, {}",
                    sl.index,
                    sl.value,
                    o.note.as_deref().unwrap_or("")
                ),
            }
        }
    }
    Ok(())
}
