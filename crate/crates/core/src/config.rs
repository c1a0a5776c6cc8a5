//! Experiment files.
//!
//! An experiment is a TOML document with a top-level `kind` and one flat
//! table per module. Missing keys take the desk-scale defaults, unknown keys
//! are errors. [`parse_config`] returns a fully resolved, validated
//! [`ExperimentConfig`]; [`emit`] writes it back with every value spelled out.
//!
//! ```toml
//! kind = "ness"            # ness | ring | poincare | sweep
//! master_seed = 2017
//! workers = 4
//!
//! [chain]
//! total_sites = 66         # lattice sites including frozen walls
//! nu = 1.0
//! z = 2
//!
//! [ness]
//! t_left = 4.0
//! t_right = 1.0
//! ```
//!
//! `total_sites` counts every lattice site: for fixed walls the chain has
//! `total_sites - 2` dynamical sites. Sweeps list dynamical sizes directly
//! under `[sweep] n_dynamic`.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::chain::{Boundary, ChainSpec, Interaction};
use crate::error::{Error, Result};
use crate::integrator::BathSpec;
use crate::ness::NessConfig;
use crate::poincare::{Detection, InitialConditions, PoincareStudy, SliceRule};
use crate::ring::{RingConfig, SparseInitial};

pub const DEFAULT_MASTER_SEED: u64 = 2017;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Ness,
    Ring,
    Poincare,
    Sweep,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::Ness => "ness",
            ExperimentKind::Ring => "ring",
            ExperimentKind::Poincare => "poincare",
            ExperimentKind::Sweep => "sweep",
        }
    }

    fn default_boundary(self) -> Boundary {
        match self {
            ExperimentKind::Ness | ExperimentKind::Sweep => Boundary::Fixed,
            ExperimentKind::Ring => Boundary::Periodic,
            ExperimentKind::Poincare => Boundary::Open,
        }
    }
}

/// Steady-state runs over every `(N, nu)` pair of a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    /// Protocol shared by every grid point; its chain size and `nu` are overridden.
    pub base: NessConfig,
    pub n_values: Vec<usize>,
    pub nu_values: Vec<f64>,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_values.is_empty() {
            return Err(Error::invalid("sweep needs at least one size"));
        }
        if self.nu_values.is_empty() {
            return Err(Error::invalid("sweep needs at least one nu"));
        }
        for &n in &self.n_values {
            for &nu in &self.nu_values {
                self.base.with_size(n).with_nu(nu).validate()?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Experiment {
    Ness(NessConfig),
    Ring(RingConfig),
    Poincare(PoincareStudy),
    Sweep(SweepConfig),
}

impl Experiment {
    pub fn kind(&self) -> ExperimentKind {
        match self {
            Experiment::Ness(_) => ExperimentKind::Ness,
            Experiment::Ring(_) => ExperimentKind::Ring,
            Experiment::Poincare(_) => ExperimentKind::Poincare,
            Experiment::Sweep(_) => ExperimentKind::Sweep,
        }
    }

    pub fn chain(&self) -> &ChainSpec {
        match self {
            Experiment::Ness(c) => &c.chain,
            Experiment::Ring(c) => &c.chain,
            Experiment::Poincare(c) => &c.chain,
            Experiment::Sweep(c) => &c.base.chain,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Experiment::Ness(c) => c.validate(),
            Experiment::Ring(c) => c.validate(),
            Experiment::Poincare(c) => c.validate(),
            Experiment::Sweep(c) => c.validate(),
        }
    }

    /// Replaces the master seed wherever the experiment draws random numbers.
    pub fn set_master_seed(&mut self, seed: u64) {
        match self {
            Experiment::Ness(c) => c.master_seed = seed,
            Experiment::Sweep(c) => c.base.master_seed = seed,
            Experiment::Poincare(c) => c.master_seed = seed,
            Experiment::Ring(_) => {}
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub master_seed: u64,
    /// Worker threads; `None` leaves the choice to the caller.
    pub workers: Option<usize>,
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> Self {
        let mut c = Self {
            experiment,
            master_seed: DEFAULT_MASTER_SEED,
            workers: None,
            output_dir: None,
        };
        c.set_master_seed(DEFAULT_MASTER_SEED);
        c
    }

    pub fn kind(&self) -> ExperimentKind {
        self.experiment.kind()
    }

    pub fn set_master_seed(&mut self, seed: u64) {
        self.master_seed = seed;
        self.experiment.set_master_seed(seed);
    }

    pub fn validate(&self) -> Result<()> {
        if self.workers == Some(0) {
            return Err(Error::invalid("workers must be >= 1"));
        }
        self.experiment.validate()
    }
}

// ---- file schema -------------------------------------------------------

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileDoc {
    kind: Option<ExperimentKind>,
    master_seed: Option<u64>,
    workers: Option<usize>,
    output_dir: Option<PathBuf>,
    chain: Option<ChainTable>,
    ness: Option<NessTable>,
    ring: Option<RingTable>,
    poincare: Option<PoincareTable>,
    sweep: Option<SweepTable>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChainTable {
    total_sites: Option<usize>,
    boundary: Option<Boundary>,
    a: Option<f64>,
    b: Option<f64>,
    nu: Option<f64>,
    z: Option<i64>,
    interaction: Option<Interaction>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NessTable {
    t_left: Option<f64>,
    t_right: Option<f64>,
    mu: Option<f64>,
    dt: Option<f64>,
    steps_relax: Option<u64>,
    steps_measure: Option<u64>,
    measure_stride: Option<u64>,
    n_runs: Option<usize>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RingTable {
    dt: Option<f64>,
    t_final: Option<f64>,
    sample_stride: Option<u64>,
    envelope_window: Option<f64>,
    initial_q: Option<Vec<(usize, f64)>>,
    initial_p: Option<Vec<(usize, f64)>>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PoincareTable {
    dt: Option<f64>,
    t_final: Option<f64>,
    delta: Option<f64>,
    detection: Option<Detection>,
    random_initial: Option<usize>,
    energy_scale: Option<f64>,
    initial_states: Option<Vec<[f64; 6]>>,
    slice_tolerance: Option<f64>,
    slice_max_tolerance: Option<f64>,
    slice_min_points: Option<usize>,
    slice_quantiles: Option<Vec<f64>>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepTable {
    n_dynamic: Option<Vec<usize>>,
    nu: Option<Vec<f64>>,
}

fn parse_error(text: &str, err: toml::de::Error) -> Error {
    let (line, column) = match err.span() {
        Some(span) => {
            let before = &text[..span.start.min(text.len())];
            let line = before.matches('\n').count() + 1;
            let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
            (line, column)
        }
        None => (0, 0),
    };
    Error::Parse {
        line,
        column,
        message: err.message().to_string(),
    }
}

fn unexpected(table: &str, kind: ExperimentKind) -> Error {
    Error::invalid(format!(
        "[{table}] is not used by a {} experiment",
        kind.as_str()
    ))
}

fn build_chain(t: Option<ChainTable>, kind: ExperimentKind) -> Result<ChainSpec> {
    let t = t.unwrap_or_default();
    let boundary = t.boundary.unwrap_or(kind.default_boundary());
    let expected = kind.default_boundary();
    if boundary != expected {
        return Err(Error::invalid(format!(
            "a {} experiment needs a {:?} chain, got {boundary:?}",
            kind.as_str(),
            expected
        )));
    }
    let total = match (t.total_sites, kind) {
        (Some(m), _) => m,
        (None, ExperimentKind::Ring) => 200,
        (None, ExperimentKind::Poincare) => 3,
        // sweeps set the size per grid point; this placeholder is overwritten
        (None, ExperimentKind::Sweep) => 3,
        (None, ExperimentKind::Ness) => {
            return Err(Error::invalid("[chain] total_sites is required"))
        }
    };
    if kind == ExperimentKind::Sweep && t.total_sites.is_some() {
        return Err(Error::invalid(
            "sweeps take their sizes from [sweep] n_dynamic, not [chain] total_sites",
        ));
    }
    let n_dynamic = match boundary {
        Boundary::Fixed if kind == ExperimentKind::Sweep => 1,
        Boundary::Fixed => total.checked_sub(2).filter(|n| *n > 0).ok_or_else(|| {
            Error::invalid(format!(
                "fixed chains need total_sites >= 3 (two walls), got {total}"
            ))
        })?,
        _ => total,
    };
    let z = t.z.unwrap_or(2);
    if z < 2 || z % 2 != 0 {
        return Err(Error::invalid(format!(
            "z must be a positive even integer, got {z}"
        )));
    }
    let spec = ChainSpec::new(boundary, n_dynamic)
        .with_interaction(t.a.unwrap_or(1.0), t.b.unwrap_or(1.0))
        .with_pinning(t.nu.unwrap_or(1.0), z as u32)
        .with_bond(t.interaction.unwrap_or_default());
    Ok(spec)
}

fn build_ness(t: Option<NessTable>, chain: ChainSpec, seed: u64) -> Result<NessConfig> {
    let t = t.ok_or_else(|| Error::invalid("[ness] with t_left and t_right is required"))?;
    let (t_left, t_right) = match (t.t_left, t.t_right) {
        (Some(l), Some(r)) => (l, r),
        _ => return Err(Error::invalid("[ness] t_left and t_right are required")),
    };
    let mut c = NessConfig::desk(chain, t_left, t_right);
    let mu = t.mu.unwrap_or(c.baths.mu);
    c.baths = BathSpec::at_ends(&c.chain, mu, t_left, t_right);
    c.dt = t.dt.unwrap_or(c.dt);
    c.steps_relax = t.steps_relax.unwrap_or(c.steps_relax);
    c.steps_measure = t.steps_measure.unwrap_or(c.steps_measure);
    c.measure_stride = t.measure_stride.unwrap_or(c.measure_stride);
    c.n_runs = t.n_runs.unwrap_or(c.n_runs);
    c.master_seed = seed;
    Ok(c)
}

fn build_ring(t: Option<RingTable>, chain: ChainSpec) -> Result<RingConfig> {
    let t = t.unwrap_or_default();
    let mut c = RingConfig::desk(chain.z);
    c.envelope_window = 100.0 * 2.0 * std::f64::consts::PI / chain.nu;
    c.chain = chain;
    c.dt = t.dt.unwrap_or(c.dt);
    c.t_final = t.t_final.unwrap_or(c.t_final);
    c.sample_stride = t.sample_stride.unwrap_or(c.sample_stride);
    c.envelope_window = t.envelope_window.unwrap_or(c.envelope_window);
    if t.initial_q.is_some() || t.initial_p.is_some() {
        c.initial = SparseInitial {
            q: t.initial_q.unwrap_or_default(),
            p: t.initial_p.unwrap_or_default(),
        };
    }
    c.initial.build(&c.chain)?;
    Ok(c)
}

fn build_poincare(t: Option<PoincareTable>, chain: ChainSpec, seed: u64) -> Result<PoincareStudy> {
    let t = t.unwrap_or_default();
    let mut c = PoincareStudy::desk();
    c.chain = chain;
    c.dt = t.dt.unwrap_or(c.dt);
    c.t_final = t.t_final.unwrap_or(c.t_final);
    c.delta = t.delta.unwrap_or(c.delta);
    c.detection = t.detection.unwrap_or(c.detection);
    c.initial = match (t.initial_states, t.random_initial, t.energy_scale) {
        (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
            return Err(Error::invalid(
                "give either initial_states or random_initial/energy_scale, not both",
            ))
        }
        (Some(states), None, None) => InitialConditions::Explicit(states),
        (None, count, scale) => match c.initial {
            InitialConditions::Random {
                count: c0,
                energy_scale: s0,
            } => InitialConditions::Random {
                count: count.unwrap_or(c0),
                energy_scale: scale.unwrap_or(s0),
            },
            InitialConditions::Explicit(_) => unreachable!("desk study draws random states"),
        },
    };
    let d = c.slice.clone();
    c.slice = SliceRule {
        tolerance: t.slice_tolerance.unwrap_or(d.tolerance),
        max_tolerance: t.slice_max_tolerance.unwrap_or(d.max_tolerance),
        min_points: t.slice_min_points.unwrap_or(d.min_points),
        quantiles: t.slice_quantiles.unwrap_or(d.quantiles),
    };
    c.master_seed = seed;
    Ok(c)
}

/// Parses and validates an experiment file.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let doc: FileDoc = toml::from_str(text).map_err(|e| parse_error(text, e))?;
    let kind = doc
        .kind
        .ok_or_else(|| Error::invalid("missing top-level key `kind`"))?;
    let seed = doc.master_seed.unwrap_or(DEFAULT_MASTER_SEED);
    let chain = build_chain(doc.chain, kind)?;

    let (ness, ring, poincare, sweep) = (doc.ness, doc.ring, doc.poincare, doc.sweep);
    let allowed: &[&str] = match kind {
        ExperimentKind::Ness => &["ness"],
        ExperimentKind::Ring => &["ring"],
        ExperimentKind::Poincare => &["poincare"],
        ExperimentKind::Sweep => &["ness", "sweep"],
    };
    for (name, present) in [
        ("ness", ness.is_some()),
        ("ring", ring.is_some()),
        ("poincare", poincare.is_some()),
        ("sweep", sweep.is_some()),
    ] {
        if present && !allowed.contains(&name) {
            return Err(unexpected(name, kind));
        }
    }

    let experiment = match kind {
        ExperimentKind::Ness => Experiment::Ness(build_ness(ness, chain, seed)?),
        ExperimentKind::Ring => Experiment::Ring(build_ring(ring, chain)?),
        ExperimentKind::Poincare => Experiment::Poincare(build_poincare(poincare, chain, seed)?),
        ExperimentKind::Sweep => {
            let s = sweep.ok_or_else(|| Error::invalid("[sweep] n_dynamic is required"))?;
            let nu = chain.nu;
            let base = build_ness(ness, chain, seed)?;
            Experiment::Sweep(SweepConfig {
                base,
                n_values: s
                    .n_dynamic
                    .ok_or_else(|| Error::invalid("[sweep] n_dynamic is required"))?,
                nu_values: s.nu.unwrap_or_else(|| vec![nu]),
            })
        }
    };
    let config = ExperimentConfig {
        experiment,
        master_seed: seed,
        workers: doc.workers,
        output_dir: doc.output_dir,
    };
    config.validate()?;
    Ok(config)
}

fn chain_table(spec: &ChainSpec, with_size: bool) -> ChainTable {
    ChainTable {
        total_sites: with_size.then(|| spec.total_sites()),
        boundary: Some(spec.boundary),
        a: Some(spec.a),
        b: Some(spec.b),
        nu: Some(spec.nu),
        z: Some(spec.z as i64),
        interaction: Some(spec.interaction),
    }
}

fn ness_table(c: &NessConfig) -> NessTable {
    NessTable {
        t_left: Some(c.baths.t_left),
        t_right: Some(c.baths.t_right),
        mu: Some(c.baths.mu),
        dt: Some(c.dt),
        steps_relax: Some(c.steps_relax),
        steps_measure: Some(c.steps_measure),
        measure_stride: Some(c.measure_stride),
        n_runs: Some(c.n_runs),
    }
}

/// Writes a fully resolved experiment file; `parse_config(&emit(c))` gives back `c`.
pub fn emit(config: &ExperimentConfig) -> Result<String> {
    let mut doc = FileDoc {
        kind: Some(config.kind()),
        master_seed: Some(config.master_seed),
        workers: config.workers,
        output_dir: config.output_dir.clone(),
        ..FileDoc::default()
    };
    match &config.experiment {
        Experiment::Ness(c) => {
            doc.chain = Some(chain_table(&c.chain, true));
            doc.ness = Some(ness_table(c));
        }
        Experiment::Ring(c) => {
            doc.chain = Some(chain_table(&c.chain, true));
            doc.ring = Some(RingTable {
                dt: Some(c.dt),
                t_final: Some(c.t_final),
                sample_stride: Some(c.sample_stride),
                envelope_window: Some(c.envelope_window),
                initial_q: Some(c.initial.q.clone()),
                initial_p: Some(c.initial.p.clone()),
            });
        }
        Experiment::Poincare(c) => {
            doc.chain = Some(chain_table(&c.chain, true));
            let (random_initial, energy_scale, initial_states) = match &c.initial {
                InitialConditions::Random {
                    count,
                    energy_scale,
                } => (Some(*count), Some(*energy_scale), None),
                InitialConditions::Explicit(s) => (None, None, Some(s.clone())),
            };
            doc.poincare = Some(PoincareTable {
                dt: Some(c.dt),
                t_final: Some(c.t_final),
                delta: Some(c.delta),
                detection: Some(c.detection),
                random_initial,
                energy_scale,
                initial_states,
                slice_tolerance: Some(c.slice.tolerance),
                slice_max_tolerance: Some(c.slice.max_tolerance),
                slice_min_points: Some(c.slice.min_points),
                slice_quantiles: Some(c.slice.quantiles.clone()),
            });
        }
        Experiment::Sweep(c) => {
            doc.chain = Some(chain_table(&c.base.chain, false));
            doc.ness = Some(ness_table(&c.base));
            doc.sweep = Some(SweepTable {
                n_dynamic: Some(c.n_values.clone()),
                nu: Some(c.nu_values.clone()),
            });
        }
    }
    toml::to_string(&doc).map_err(|e| Error::invalid(format!("cannot serialise config: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL_NESS: &str = "kind = \"ness\"\n[chain]\ntotal_sites = 66\n[ness]\nt_left = 4.0\nt_right = 1.0\n";

    #[test]
    fn minimal_ness_takes_desk_defaults() {
        let c = parse_config(MINIMAL_NESS).unwrap();
        let Experiment::Ness(n) = &c.experiment else {
            panic!("wrong kind")
        };
        let chain = ChainSpec::fixed(64);
        assert_eq!(*n, NessConfig::desk(chain, 4.0, 1.0));
        assert_eq!(c.master_seed, DEFAULT_MASTER_SEED);
        assert_eq!(c.workers, None);
    }

    #[test]
    fn odd_pinning_power_is_rejected() {
        let text = MINIMAL_NESS.replace("total_sites = 66", "total_sites = 66\nz = 3");
        let err = parse_config(&text).unwrap_err();
        assert!(matches!(err, Error::Invalid(_)));
        assert!(err.to_string().contains("even"), "{err}");
    }

    #[test]
    fn unknown_key_reports_its_line() {
        let text = MINIMAL_NESS.replace("t_right = 1.0", "t_right = 1.0\ntemperature = 3.0");
        match parse_config(&text).unwrap_err() {
            Error::Parse { line, column, .. } => {
                assert_eq!(line, 7);
                assert_eq!(column, 1);
            }
            e => panic!("expected a parse error, got {e}"),
        }
    }

    #[test]
    fn syntax_error_reports_its_line() {
        let err = parse_config("kind = \"ness\"\n[chain\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn missing_requirements_are_validation_errors() {
        for text in [
            "[chain]\ntotal_sites = 10\n",
            "kind = \"ness\"\n[ness]\nt_left = 1.0\nt_right = 1.0\n",
            "kind = \"ness\"\n[chain]\ntotal_sites = 10\n",
            "kind = \"sweep\"\n[ness]\nt_left = 1.0\nt_right = 1.0\n",
            "kind = \"ring\"\n[ness]\nt_left = 1.0\nt_right = 1.0\n",
            "kind = \"ring\"\n[chain]\nboundary = \"open\"\n",
            "kind = \"ring\"\nworkers = 0\n",
            "kind = \"ring\"\n[ring]\ninitial_q = [[500, 1.0]]\n",
        ] {
            let err = parse_config(text).unwrap_err();
            assert_eq!(err.exit_code(), 1, "{text}: {err}");
            assert!(matches!(err, Error::Invalid(_)), "{text}: {err}");
        }
    }

    #[test]
    fn ring_defaults_match_the_desk_ring() {
        let c = parse_config("kind = \"ring\"\n[chain]\nz = 4\n").unwrap();
        assert_eq!(c.experiment, Experiment::Ring(RingConfig::desk(4)));
    }

    #[test]
    fn poincare_defaults_match_the_desk_study() {
        let c = parse_config("kind = \"poincare\"\n").unwrap();
        assert_eq!(c.experiment, Experiment::Poincare(PoincareStudy::desk()));
    }

    #[test]
    fn sweep_defaults_nu_to_the_chain_value() {
        let text = "kind = \"sweep\"\n[chain]\nnu = 0.5\n[ness]\nt_left = 4.0\nt_right = 1.0\n[sweep]\nn_dynamic = [8, 16]\n";
        let Experiment::Sweep(s) = parse_config(text).unwrap().experiment else {
            panic!("wrong kind")
        };
        assert_eq!(s.n_values, vec![8, 16]);
        assert_eq!(s.nu_values, vec![0.5]);
    }

    #[test]
    fn emitted_configs_parse_back_unchanged() {
        let texts = [
            MINIMAL_NESS.to_string(),
            "kind = \"ring\"\nworkers = 3\noutput_dir = \"out\"\n[ring]\nt_final = 50.0\ninitial_p = [[5, 0.5]]\n".into(),
            "kind = \"poincare\"\nmaster_seed = 9\n[poincare]\ninitial_states = [[0.1, 0.0, 0.0, 0.0, 0.2, 0.0]]\ndetection = \"tolerance_window\"\n".into(),
            "kind = \"sweep\"\n[ness]\nt_left = 2.0\nt_right = 1.0\nn_runs = 1\n[sweep]\nn_dynamic = [8]\nnu = [0.5, 2.0]\n".into(),
        ];
        for text in texts {
            let c = parse_config(&text).unwrap();
            let again = parse_config(&emit(&c).unwrap()).unwrap();
            assert_eq!(again, c, "{text}");
        }
    }

    #[test]
    fn seed_override_reaches_the_experiment() {
        let mut c = parse_config(MINIMAL_NESS).unwrap();
        c.set_master_seed(5);
        let Experiment::Ness(n) = &c.experiment else {
            panic!("wrong kind")
        };
        assert_eq!(n.master_seed, 5);
    }
}
