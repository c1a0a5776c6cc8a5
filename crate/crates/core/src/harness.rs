//! Run orchestration: executes an [`ExperimentConfig`] on a fixed-size
//! worker pool and writes its CSV/JSON outputs and manifest.
//!
//! Trajectories run in parallel, but every result is collected in job order
//! and folded sequentially, so outputs do not depend on the worker count.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde_json::json;

use crate::chain::ChainSpec;
use crate::config::{emit, Experiment, ExperimentConfig, SweepConfig};
use crate::error::{Error, Result};
use crate::ness::{
    combine, estimator_agreement, run_ness, run_single, scaling_exponent_least_squares,
    scaling_exponent_two_point, NessConfig, NessResult,
};
use crate::output::{Cell, OutputDir, RunManifest, SeedRecord};
use crate::poincare::{run_study, InitialConditions, PoincareStudy, StudyRun};
use crate::ring::{run_ring, RingConfig};
use crate::rng::GENERATOR;

/// Environment variable that overrides the worker count of a config file.
pub const WORKERS_ENV: &str = "TODA_WORKERS";

type Meta = Vec<(String, String)>;

fn chain_meta(spec: &ChainSpec) -> Meta {
    vec![
        ("boundary".into(), format!("{:?}", spec.boundary).to_lowercase()),
        ("total_sites".into(), spec.total_sites().to_string()),
        ("n_dynamic".into(), spec.n_dynamic.to_string()),
        ("a".into(), spec.a.to_string()),
        ("b".into(), spec.b.to_string()),
        ("nu".into(), spec.nu.to_string()),
        ("z".into(), spec.z.to_string()),
        ("interaction".into(), format!("{:?}", spec.interaction).to_lowercase()),
    ]
}

fn ness_meta(c: &NessConfig) -> Meta {
    let mut m: Meta = vec![
        ("experiment".into(), "ness".into()),
        ("generator".into(), GENERATOR.into()),
        ("master_seed".into(), c.master_seed.to_string()),
        ("streams".into(), format!("0..{}", c.n_runs)),
        ("dt".into(), c.dt.to_string()),
        ("scheme".into(), "langevin".into()),
        ("mu".into(), c.baths.mu.to_string()),
        ("t_left".into(), c.baths.t_left.to_string()),
        ("t_right".into(), c.baths.t_right.to_string()),
        ("steps_relax".into(), c.steps_relax.to_string()),
        ("steps_measure".into(), c.steps_measure.to_string()),
        ("measure_stride".into(), c.measure_stride.to_string()),
    ];
    m.extend(chain_meta(&c.chain));
    m
}

fn profile_rows(r: &NessResult) -> Vec<Vec<Cell>> {
    (0..r.n)
        .map(|i| {
            let site = i + 1;
            let t = &r.temp_profile[i];
            let (j, se) = match r.current_profile.get(i) {
                Some(e) if site < r.n => (Cell::from(e.mean), Cell::from(e.stderr)),
                _ => (Cell::Empty, Cell::Empty),
            };
            vec![
                site.into(),
                r.position(site).into(),
                t.mean.into(),
                t.stderr.into(),
                j,
                se,
            ]
        })
        .collect()
}

const PROFILE_HEADER: [&str; 6] = ["site_index", "x", "T_j", "T_j_stderr", "J_bond", "J_bond_stderr"];
const CURRENTS_HEADER: [&str; 9] = [
    "N",
    "nu",
    "z",
    "J_bulk",
    "J_left",
    "J_right",
    "J_bulk_stderr",
    "J_left_stderr",
    "J_right_stderr",
];

fn currents_row(r: &NessResult) -> Vec<Cell> {
    vec![
        r.n.into(),
        r.nu.into(),
        r.z.into(),
        r.j_bulk.mean.into(),
        r.j_left.mean.into(),
        r.j_right.mean.into(),
        r.j_bulk.stderr.into(),
        r.j_left.stderr.into(),
        r.j_right.stderr.into(),
    ]
}

fn ness_json(r: &NessResult) -> serde_json::Value {
    json!({
        "n": r.n,
        "nu": r.nu,
        "z": r.z,
        "j_bulk": r.j_bulk,
        "j_left": r.j_left,
        "j_right": r.j_right,
        "estimator_agreement": estimator_agreement(r).ok(),
        "current_profile_deviation_se": r.current_profile_deviation(),
        "middle_temperature_spread": r.middle_temperature_spread(),
        "middle_monotonicity_violation_se": r.middle_monotonicity_violation(),
    })
}

fn stream_seeds(label: &str, master: u64, count: usize) -> Vec<SeedRecord> {
    (0..count as u64)
        .map(|i| SeedRecord {
            label: format!("{label} run {i}"),
            master_seed: master,
            stream: i,
        })
        .collect()
}

fn write_ness(out: &mut OutputDir, c: &NessConfig, clock: Instant) -> Result<Vec<SeedRecord>> {
    let r = run_ness(c)?;
    let meta = ness_meta(c);
    out.write_csv("profile.csv", &meta, &PROFILE_HEADER, &profile_rows(&r))?;
    out.write_csv("currents.csv", &meta, &CURRENTS_HEADER, &[currents_row(&r)])?;
    out.write_json(
        "summary.json",
        &json!({
            "config": c,
            "seeds": r.metadata.streams,
            "generator": GENERATOR,
            "result": ness_json(&r),
            "wall_clock_seconds": clock.elapsed().as_secs_f64(),
        }),
    )?;
    Ok(stream_seeds("ness", c.master_seed, c.n_runs))
}

/// Results of a sweep, ordered by `nu` and then `N`.
pub fn run_sweep(sweep: &SweepConfig) -> Result<Vec<NessResult>> {
    sweep.validate()?;
    let mut nus = sweep.nu_values.clone();
    nus.sort_by(f64::total_cmp);
    let mut ns = sweep.n_values.clone();
    ns.sort_unstable();
    let configs: Vec<NessConfig> = nus
        .iter()
        .flat_map(|&nu| ns.iter().map(move |&n| sweep.base.with_size(n).with_nu(nu)))
        .collect();
    let runs_per = sweep.base.n_runs;
    let jobs: Vec<(usize, usize)> = (0..configs.len())
        .flat_map(|c| (0..runs_per).map(move |r| (c, r)))
        .collect();
    let runs = jobs
        .par_iter()
        .map(|&(c, r)| run_single(&configs[c], r))
        .collect::<Result<Vec<_>>>()?;
    configs
        .iter()
        .zip(runs.chunks(runs_per))
        .map(|(c, rs)| combine(c, rs))
        .collect()
}

fn write_sweep(out: &mut OutputDir, s: &SweepConfig, clock: Instant) -> Result<Vec<SeedRecord>> {
    let results = run_sweep(s)?;
    let mut meta = ness_meta(&s.base);
    meta.retain(|(k, _)| k != "n_dynamic" && k != "total_sites" && k != "nu");
    meta[0].1 = "sweep".into();
    let rows: Vec<Vec<Cell>> = results.iter().map(currents_row).collect();
    out.write_csv("currents.csv", &meta, &CURRENTS_HEADER, &rows)?;
    for r in &results {
        let c = s.base.with_size(r.n).with_nu(r.nu);
        out.write_csv(
            &format!("profile_N{}_nu{}.csv", r.n, r.nu),
            &ness_meta(&c),
            &PROFILE_HEADER,
            &profile_rows(r),
        )?;
    }
    let mut scaling = Vec::new();
    let mut nus: Vec<f64> = results.iter().map(|r| r.nu).collect();
    nus.dedup();
    for nu in nus {
        let pts: Vec<(f64, f64)> = results
            .iter()
            .filter(|r| r.nu == nu)
            .map(|r| (r.n as f64, r.j_bulk.mean))
            .collect();
        let ratio = (pts.len() >= 2).then(|| pts[pts.len() - 1].1 / pts[0].1);
        scaling.push(json!({
            "nu": nu,
            "sizes": pts.iter().map(|p| p.0 as usize).collect::<Vec<_>>(),
            "j_bulk": pts.iter().map(|p| p.1).collect::<Vec<_>>(),
            "alpha_two_point": scaling_exponent_two_point(&pts).ok(),
            "alpha_least_squares": scaling_exponent_least_squares(&pts).ok(),
            "ratio_largest_to_smallest": ratio,
        }));
    }
    out.write_json(
        "summary.json",
        &json!({
            "base": s.base,
            "n_values": s.n_values,
            "nu_values": s.nu_values,
            "generator": GENERATOR,
            "results": results.iter().map(ness_json).collect::<Vec<_>>(),
            "scaling": scaling,
            "wall_clock_seconds": clock.elapsed().as_secs_f64(),
        }),
    )?;
    let mut seeds = Vec::new();
    for r in &results {
        seeds.extend(stream_seeds(
            &format!("N={} nu={}", r.n, r.nu),
            s.base.master_seed,
            s.base.n_runs,
        ));
    }
    Ok(seeds)
}

fn write_ring(out: &mut OutputDir, c: &RingConfig, clock: Instant) -> Result<Vec<SeedRecord>> {
    let series = run_ring(c)?;
    let mut meta: Meta = vec![
        ("experiment".into(), "ring".into()),
        ("dt".into(), c.dt.to_string()),
        ("scheme".into(), "deterministic".into()),
        ("t_final".into(), c.t_final.to_string()),
        ("sample_stride".into(), c.sample_stride.to_string()),
        ("envelope_window".into(), c.envelope_window.to_string()),
        ("initial_q".into(), format!("{:?}", c.initial.q)),
        ("initial_p".into(), format!("{:?}", c.initial.p)),
    ];
    meta.extend(chain_meta(&c.chain));
    let rows: Vec<Vec<Cell>> = series
        .times
        .iter()
        .zip(&series.total_current)
        .map(|(&t, &j)| vec![t.into(), j.into()])
        .collect();
    out.write_csv("ring.csv", &meta, &["t", "total_current"], &rows)?;
    let env = &series.envelope;
    let rows: Vec<Vec<Cell>> = (0..env.t_center.len())
        .map(|i| vec![env.t_center[i].into(), env.env_max[i].into(), env.env_min[i].into()])
        .collect();
    out.write_csv("ring_envelope.csv", &meta, &["t_center", "env_max", "env_min"], &rows)?;
    out.write_json(
        "summary.json",
        &json!({
            "config": c,
            "omega": series.omega,
            "peak_height": series.peak_height,
            "frequency_convention": "omega is angular; compare with nu",
            "nu": c.chain.nu,
            "persistence_ratio": series.persistence_ratio().ok(),
            "energy_drift": series.energy_drift,
            "hc_drift": series.hc_drift,
            "samples": series.times.len(),
            "wall_clock_seconds": clock.elapsed().as_secs_f64(),
        }),
    )?;
    Ok(Vec::new())
}

fn pstar_label(x: f64) -> String {
    format!("{x:+.4}")
}

fn write_poincare(out: &mut OutputDir, s: &PoincareStudy, clock: Instant) -> Result<Vec<SeedRecord>> {
    let runs: Vec<StudyRun> = run_study(s)?;
    let mut meta: Meta = vec![
        ("experiment".into(), "poincare".into()),
        ("dt".into(), s.dt.to_string()),
        ("scheme".into(), "deterministic".into()),
        ("t_final".into(), s.t_final.to_string()),
        ("delta".into(), s.delta.to_string()),
        ("detection".into(), format!("{:?}", s.detection)),
        ("master_seed".into(), s.master_seed.to_string()),
    ];
    meta.extend(chain_meta(&s.chain));
    let mut rows = Vec::new();
    for (i, r) in runs.iter().enumerate() {
        for e in &r.run.events {
            rows.push(vec![
                i.into(),
                e.t.into(),
                e.direction.as_str().into(),
                e.q[0].into(),
                e.q[1].into(),
                e.q[2].into(),
                e.p[0].into(),
                e.p[1].into(),
                e.p[2].into(),
                e.energy.into(),
                e.hc.into(),
            ]);
        }
    }
    out.write_csv(
        "sections.csv",
        &meta,
        &["run", "t", "direction", "q0", "q1", "q2", "p0", "p1", "p2", "H", "h_c"],
        &rows,
    )?;
    let mut summary = Vec::new();
    for (i, r) in runs.iter().enumerate() {
        let mut slices = Vec::new();
        for o in &r.slices {
            let sl = &o.slice;
            let name = format!("slice_{i}_{}_{}.csv", sl.index, pstar_label(sl.value));
            let [a, b] = match sl.index {
                0 => ["p1", "p2"],
                1 => ["p0", "p2"],
                _ => ["p0", "p1"],
            };
            let mut m = meta.clone();
            m.push(("run".into(), i.to_string()));
            m.push(("fixed_index".into(), sl.index.to_string()));
            m.push(("p_star".into(), sl.value.to_string()));
            m.push(("tolerance".into(), sl.tolerance.to_string()));
            let rows: Vec<Vec<Cell>> = sl.points.iter().map(|p| vec![p[0].into(), p[1].into()]).collect();
            out.write_csv(&name, &m, &[a, b], &rows)?;
            slices.push(json!({
                "file": name,
                "index": sl.index,
                "quantile": o.quantile,
                "p_star": sl.value,
                "tolerance": sl.tolerance,
                "points": sl.points.len(),
                "dimension": o.dimension(),
                "note": o.note,
            }));
        }
        summary.push(json!({
            "initial_q": r.initial.q,
            "initial_p": r.initial.p,
            "events": r.run.events.len(),
            "energy": r.run.energy0,
            "energy_drift": r.run.energy_drift,
            "hc_drift": r.run.hc_drift,
            "slices": slices,
        }));
    }
    out.write_json(
        "summary.json",
        &json!({
            "study": s,
            "runs": summary,
            "wall_clock_seconds": clock.elapsed().as_secs_f64(),
        }),
    )?;
    Ok(match &s.initial {
        InitialConditions::Random { count, .. } => stream_seeds("initial state", s.master_seed, *count),
        InitialConditions::Explicit(_) => Vec::new(),
    })
}

/// Worker count: explicit value, then the environment, then the config, then 1.
pub fn resolve_workers(explicit: Option<usize>, config: &ExperimentConfig) -> Result<usize> {
    let env = match std::env::var(WORKERS_ENV) {
        Ok(v) => Some(v.trim().parse::<usize>().map_err(|_| {
            Error::invalid(format!("{WORKERS_ENV} must be a positive integer, got {v:?}"))
        })?),
        Err(_) => None,
    };
    let w = explicit.or(env).or(config.workers).unwrap_or(1);
    if w == 0 {
        return Err(Error::invalid("workers must be >= 1"));
    }
    Ok(w)
}

/// Runs the experiment on `workers` threads, writes every output into
/// `out_dir` and finally the manifest. Returns the manifest path.
pub fn run(config: &ExperimentConfig, out_dir: &Path, workers: usize) -> Result<PathBuf> {
    config.validate()?;
    if workers == 0 {
        return Err(Error::invalid("workers must be >= 1"));
    }
    let started = chrono::Utc::now().to_rfc3339();
    let clock = Instant::now();
    let mut out = OutputDir::create(out_dir)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::invalid(format!("cannot start {workers} workers: {e}")))?;
    let seeds = pool.install(|| match &config.experiment {
        Experiment::Ness(c) => write_ness(&mut out, c, clock),
        Experiment::Sweep(s) => write_sweep(&mut out, s, clock),
        Experiment::Ring(c) => write_ring(&mut out, c, clock),
        Experiment::Poincare(s) => write_poincare(&mut out, s, clock),
    })?;
    out.finish(RunManifest {
        software: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        kind: config.kind().as_str().into(),
        config: emit(config)?,
        generator: GENERATOR.into(),
        seeds,
        started,
        finished: chrono::Utc::now().to_rfc3339(),
        files: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;
    use crate::output::{csv_body, verify_manifest};

    fn small_sweep() -> ExperimentConfig {
        parse_config(
            "kind = \"sweep\"\n[ness]\nt_left = 2.0\nt_right = 1.0\nsteps_relax = 200\nsteps_measure = 400\nmeasure_stride = 2\nn_runs = 2\n[sweep]\nn_dynamic = [6, 4]\nnu = [2.0, 0.5]\n",
        )
        .unwrap()
    }

    #[test]
    fn sweep_is_ordered_by_nu_then_size() {
        let Experiment::Sweep(s) = small_sweep().experiment else {
            unreachable!()
        };
        let r = run_sweep(&s).unwrap();
        let keys: Vec<(f64, usize)> = r.iter().map(|r| (r.nu, r.n)).collect();
        assert_eq!(keys, vec![(0.5, 4), (0.5, 6), (2.0, 4), (2.0, 6)]);
    }

    #[test]
    fn single_size_sweep_equals_run_ness() {
        let Experiment::Sweep(mut s) = small_sweep().experiment else {
            unreachable!()
        };
        s.n_values = vec![5];
        s.nu_values = vec![1.0];
        let swept = run_sweep(&s).unwrap();
        let direct = run_ness(&s.base.with_size(5).with_nu(1.0)).unwrap();
        assert_eq!(swept, vec![direct]);
    }

    #[test]
    fn sweep_writes_one_row_per_grid_point_and_a_manifest() {
        let dir = tempfile::tempdir().unwrap();
        run(&small_sweep(), dir.path(), 2).unwrap();
        let text = std::fs::read_to_string(dir.path().join("currents.csv")).unwrap();
        assert_eq!(csv_body(&text).lines().count(), 1 + 4);
        let m = verify_manifest(dir.path()).unwrap();
        assert_eq!(m.kind, "sweep");
        assert!(m.files.iter().any(|f| f.path == "profile_N4_nu0.5.csv"));
        assert_eq!(m.seeds.len(), 8);
    }

    #[test]
    fn worker_count_does_not_change_bodies() {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        run(&small_sweep(), a.path(), 1).unwrap();
        run(&small_sweep(), b.path(), 3).unwrap();
        let read = |d: &Path| std::fs::read(d.join("currents.csv")).unwrap();
        assert_eq!(read(a.path()), read(b.path()));
    }

    #[test]
    fn explicit_worker_count_wins() {
        let c = small_sweep();
        assert_eq!(resolve_workers(Some(3), &c).unwrap(), 3);
        assert!(resolve_workers(Some(0), &c).is_err());
    }
}
