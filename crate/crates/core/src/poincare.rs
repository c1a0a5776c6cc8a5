//! Poincaré sections of the three-body open chain.
//!
//! An event is recorded whenever particle 0 returns to its initial
//! displacement, `g(t) = q_0(t) - q_0(0) = 0`. Fixing one of the three
//! momenta at the events (a slice) leaves a planar point set whose box
//! counting dimension tells a curve (an extra conserved quantity) from an
//! area-filling cloud.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{center_of_mass_invariant, total_energy, Boundary, ChainSpec, State};
use crate::error::{Error, Result};
use crate::integrator::{StepperConfig, Trajectory};
use crate::rng::RngStream;
use crate::stats::ols_slope;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Detection {
    /// Record steps with `|g| < delta`, at most one per pass through the window.
    ToleranceWindow,
    /// Detect sign changes of `g` and interpolate linearly to `g = 0`.
    SignCrossing,
}

/// Crossing direction, the sign of `dq_0/dt` at the event.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Up,
    Down,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Up => "up",
            Direction::Down => "down",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectionConfig {
    pub chain: ChainSpec,
    pub dt: f64,
    pub t_final: f64,
    pub delta: f64,
    pub initial: State,
    pub detection: Detection,
}

impl SectionConfig {
    /// Three-body open chain, `a = b = nu = 1`, `z = 2`, `dt = 1e-4`,
    /// `t_final = 1e5`, `delta = 1e-3`, sign-crossing detection.
    pub fn desk(initial: State) -> Self {
        Self {
            chain: ChainSpec::open(3),
            dt: 1e-4,
            t_final: 1e5,
            delta: 1e-3,
            initial,
            detection: Detection::SignCrossing,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.chain.validate()?;
        if self.chain.boundary != Boundary::Open || self.chain.n_dynamic != 3 {
            return Err(Error::invalid("sections need an open chain of exactly 3 sites"));
        }
        StepperConfig::deterministic(self.dt).validate()?;
        if !(self.delta > 0.0) {
            return Err(Error::invalid("delta must be > 0"));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::invalid("t_final must be > 0"));
        }
        self.initial.check(&self.chain)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectionEvent {
    pub t: f64,
    pub direction: Direction,
    pub q: [f64; 3],
    pub p: [f64; 3],
    pub energy: f64,
    pub hc: f64,
}

/// Events of one run together with the invariants of the initial state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectionRun {
    pub events: Vec<SectionEvent>,
    pub energy0: f64,
    pub hc0: f64,
    /// Largest relative drift of `H` over the recorded events.
    pub energy_drift: f64,
    /// Largest drift of `h_c` over the events, relative to `max(1, |h_c(0)|)`.
    pub hc_drift: f64,
}

fn event_at(spec: &ChainSpec, t: f64, q: [f64; 3], p: [f64; 3], direction: Direction) -> SectionEvent {
    let state = State {
        q: q.to_vec(),
        p: p.to_vec(),
        t,
    };
    SectionEvent {
        t,
        direction,
        q,
        p,
        energy: total_energy(&state, spec),
        hc: center_of_mass_invariant(&state, spec).unwrap_or(f64::NAN),
    }
}

/// Integrates the three-body chain and records returns of particle 0 to
/// its initial displacement.
pub fn run_sections(config: &SectionConfig) -> Result<SectionRun> {
    config.validate()?;
    let spec = config.chain.clone();
    let energy0 = total_energy(&config.initial, &spec);
    let hc0 = center_of_mass_invariant(&config.initial, &spec)?;
    let q00 = config.initial.q[0];
    let mut traj = Trajectory::new(
        spec.clone(),
        config.initial.clone(),
        None,
        &StepperConfig::deterministic(config.dt),
    )?;
    let steps = (config.t_final / config.dt).round() as u64;

    let snapshot = |t: &Trajectory| -> ([f64; 3], [f64; 3], f64) {
        let s = t.state();
        ([s.q[0], s.q[1], s.q[2]], [s.p[0], s.p[1], s.p[2]], s.t)
    };
    let mut events = Vec::new();
    let (mut prev_q, mut prev_p, mut prev_t) = snapshot(&traj);
    let mut prev_g = 0.0;
    let mut started = false;
    // tolerance mode: sign of g at the last record, and whether g has since
    // both changed sign and left the window (the run starts inside it)
    let mut last_sign: Option<bool> = None;
    let mut sign_changed = true;
    let mut left_window = false;
    let delta = config.delta;

    traj.evolve(steps, 1, |t| {
        let (q, p, time) = snapshot(t);
        let g = q[0] - q00;
        match config.detection {
            Detection::SignCrossing => {
                if started && (prev_g < 0.0) != (g < 0.0) {
                    let f = prev_g / (prev_g - g);
                    let lerp = |a: [f64; 3], b: [f64; 3]| {
                        [
                            a[0] + f * (b[0] - a[0]),
                            a[1] + f * (b[1] - a[1]),
                            a[2] + f * (b[2] - a[2]),
                        ]
                    };
                    let dir = if g >= prev_g { Direction::Up } else { Direction::Down };
                    events.push(event_at(
                        &spec,
                        prev_t + f * (time - prev_t),
                        lerp(prev_q, q),
                        lerp(prev_p, p),
                        dir,
                    ));
                }
            }
            Detection::ToleranceWindow => {
                let sign = g >= 0.0;
                if let Some(s) = last_sign {
                    sign_changed |= sign != s;
                }
                if g.abs() >= delta {
                    left_window = true;
                }
                if g.abs() < delta && sign_changed && left_window {
                    let dir = if p[0] >= 0.0 { Direction::Up } else { Direction::Down };
                    events.push(event_at(&spec, time, q, p, dir));
                    last_sign = Some(sign);
                    sign_changed = false;
                    left_window = false;
                }
            }
        }
        started = true;
        prev_g = g;
        prev_q = q;
        prev_p = p;
        prev_t = time;
    })?;

    if events.is_empty() {
        return Err(Error::NoCrossings {
            t_final: config.t_final,
        });
    }
    let energy_drift = events
        .iter()
        .map(|e| ((e.energy - energy0) / energy0).abs())
        .fold(0.0, f64::max);
    let hc_drift = events
        .iter()
        .map(|e| (e.hc - hc0).abs() / hc0.abs().max(1.0))
        .fold(0.0, f64::max);
    Ok(SectionRun {
        events,
        energy0,
        hc0,
        energy_drift,
        hc_drift,
    })
}

/// Events with one momentum pinned near a value, projected on the other two.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlicedSection {
    pub index: usize,
    pub value: f64,
    pub tolerance: f64,
    /// The two free momenta, in increasing index order.
    pub points: Vec<[f64; 2]>,
}

fn free_indices(j: usize) -> [usize; 2] {
    match j {
        0 => [1, 2],
        1 => [0, 2],
        _ => [0, 1],
    }
}

/// Keeps events with `|p_j - value| <= tol`.
pub fn slice(events: &[SectionEvent], j: usize, value: f64, tol: f64) -> Result<SlicedSection> {
    if events.is_empty() {
        return Err(Error::invalid("no events to slice"));
    }
    if j > 2 {
        return Err(Error::invalid(format!("momentum index {j} out of range")));
    }
    if !(tol >= 0.0) {
        return Err(Error::invalid("slice tolerance must be >= 0"));
    }
    let [a, b] = free_indices(j);
    let points: Vec<[f64; 2]> = events
        .iter()
        .filter(|e| (e.p[j] - value).abs() <= tol)
        .map(|e| [e.p[a], e.p[b]])
        .collect();
    if points.is_empty() {
        return Err(Error::EmptySlice {
            index: j,
            value,
            tolerance: tol,
        });
    }
    Ok(SlicedSection {
        index: j,
        value,
        tolerance: tol,
        points,
    })
}

/// Doubles the tolerance from `tol` until the slice has `min_points`
/// points or the tolerance would exceed `max_tol`. Returns the last slice
/// tried (possibly smaller than `min_points`).
pub fn slice_widening(
    events: &[SectionEvent],
    j: usize,
    value: f64,
    tol: f64,
    min_points: usize,
    max_tol: f64,
) -> Result<SlicedSection> {
    let mut tol = tol;
    loop {
        let s = slice(events, j, value, tol);
        let enough = matches!(&s, Ok(s) if s.points.len() >= min_points);
        if enough || tol * 2.0 > max_tol {
            return s;
        }
        tol *= 2.0;
    }
}

/// Median of the nearest-neighbour distances (sweep over x-sorted points).
pub fn median_nearest_neighbor(points: &[[f64; 2]]) -> f64 {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]));
    let mut nn: Vec<f64> = (0..pts.len())
        .map(|i| {
            let mut best = f64::INFINITY;
            for k in (i + 1)..pts.len() {
                let dx = pts[k][0] - pts[i][0];
                if dx * dx >= best {
                    break;
                }
                best = best.min(dx * dx + (pts[k][1] - pts[i][1]).powi(2));
            }
            for k in (0..i).rev() {
                let dx = pts[i][0] - pts[k][0];
                if dx * dx >= best {
                    break;
                }
                best = best.min(dx * dx + (pts[k][1] - pts[i][1]).powi(2));
            }
            best.sqrt()
        })
        .collect();
    nn.sort_by(f64::total_cmp);
    nn[nn.len() / 2]
}

/// Box-counting estimate of the dimension of a planar point set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxCount {
    pub dimension: f64,
    /// `(epsilon, occupied boxes)` for every scale used in the fit.
    pub counts: Vec<(f64, usize)>,
    pub diameter: f64,
    pub nn_median: f64,
}

/// Minimum number of points accepted by [`box_count_dimension`].
pub const MIN_BOX_COUNT_POINTS: usize = 500;

/// Least-squares slope of `ln N(eps)` against `ln(1/eps)` for
/// `eps_k = L / 2^k`, `k = 2, 3, ...` while `eps_k` stays at least four
/// median nearest-neighbour spacings. `L` is the larger side of the
/// bounding box. At least three octaves are required.
pub fn box_count_dimension(points: &[[f64; 2]]) -> Result<BoxCount> {
    if points.len() < MIN_BOX_COUNT_POINTS {
        return Err(Error::invalid(format!(
            "box counting needs at least {MIN_BOX_COUNT_POINTS} points, got {}",
            points.len()
        )));
    }
    if points.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::invalid("non-finite point"));
    }
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in points {
        for d in 0..2 {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    let diameter = (hi[0] - lo[0]).max(hi[1] - lo[1]);
    if diameter == 0.0 {
        return Err(Error::Degenerate("all points coincide".into()));
    }
    let nn_median = median_nearest_neighbor(points);
    let floor = 4.0 * nn_median;
    let mut counts = Vec::new();
    let mut k = 2;
    loop {
        let eps = diameter / f64::powi(2.0, k);
        if eps < floor || k > 40 {
            break;
        }
        let boxes: HashSet<(i64, i64)> = points
            .iter()
            .map(|p| {
                (
                    ((p[0] - lo[0]) / eps).floor() as i64,
                    ((p[1] - lo[1]) / eps).floor() as i64,
                )
            })
            .collect();
        counts.push((eps, boxes.len()));
        k += 1;
    }
    if counts.len() < 4 {
        return Err(Error::Degenerate(format!(
            "only {} dyadic scales between the diameter and the point spacing",
            counts.len()
        )));
    }
    let xs: Vec<f64> = counts.iter().map(|c| (1.0 / c.0).ln()).collect();
    let ys: Vec<f64> = counts.iter().map(|c| (c.1 as f64).ln()).collect();
    let dimension = ols_slope(&xs, &ys).expect("distinct scales");
    Ok(BoxCount {
        dimension,
        counts,
        diameter,
        nn_median,
    })
}

/// Three-body state with every `q` and `p` uniform in `[-scale, scale]`.
pub fn random_initial_state(energy_scale: f64, rng: &mut RngStream) -> Result<State> {
    if !(energy_scale > 0.0 && energy_scale.is_finite()) {
        return Err(Error::invalid("energy_scale must be > 0"));
    }
    let mut s = State::zeros(&ChainSpec::open(3));
    for i in 0..3 {
        s.q[i] = rng.uniform(-energy_scale, energy_scale);
    }
    for i in 0..3 {
        s.p[i] = rng.uniform(-energy_scale, energy_scale);
    }
    Ok(s)
}

/// Where the initial states of a study come from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialConditions {
    /// `count` states from [`random_initial_state`], state `i` on stream `i`.
    Random { count: usize, energy_scale: f64 },
    /// Listed as `[q0, q1, q2, p0, p1, p2]`.
    Explicit(Vec<[f64; 6]>),
}

/// How slices are cut from the events of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SliceRule {
    /// Starting tolerance; doubled until `min_points` are reached.
    pub tolerance: f64,
    pub max_tolerance: f64,
    pub min_points: usize,
    /// Slice values `p*`, as quantiles of the fixed momentum over the events.
    pub quantiles: Vec<f64>,
}

impl Default for SliceRule {
    fn default() -> Self {
        Self {
            tolerance: 0.01,
            max_tolerance: 0.1,
            min_points: MIN_BOX_COUNT_POINTS,
            quantiles: vec![0.25, 0.5, 0.75],
        }
    }
}

impl SliceRule {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance <= self.max_tolerance) {
            return Err(Error::invalid("need 0 < slice_tolerance <= slice_max_tolerance"));
        }
        if self.min_points < MIN_BOX_COUNT_POINTS {
            return Err(Error::invalid(format!(
                "slice_min_points must be at least {MIN_BOX_COUNT_POINTS}"
            )));
        }
        if self.quantiles.is_empty() || self.quantiles.iter().any(|q| !(0.0..=1.0).contains(q)) {
            return Err(Error::invalid("slice_quantiles must be non-empty and within [0, 1]"));
        }
        Ok(())
    }
}

/// Several section runs of one chain from different initial states.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoincareStudy {
    pub chain: ChainSpec,
    pub dt: f64,
    pub t_final: f64,
    pub delta: f64,
    pub detection: Detection,
    pub initial: InitialConditions,
    pub slice: SliceRule,
    pub master_seed: u64,
}

impl PoincareStudy {
    /// [`SectionConfig::desk`] settings, five random states of scale 1.
    pub fn desk() -> Self {
        let s = SectionConfig::desk(State::zeros(&ChainSpec::open(3)));
        Self {
            chain: s.chain,
            dt: s.dt,
            t_final: s.t_final,
            delta: s.delta,
            detection: s.detection,
            initial: InitialConditions::Random {
                count: 5,
                energy_scale: 1.0,
            },
            slice: SliceRule::default(),
            master_seed: 2017,
        }
    }

    pub fn initial_states(&self) -> Result<Vec<State>> {
        match &self.initial {
            InitialConditions::Random {
                count,
                energy_scale,
            } => (0..*count as u64)
                .map(|i| random_initial_state(*energy_scale, &mut RngStream::split(self.master_seed, i)))
                .collect(),
            InitialConditions::Explicit(list) => Ok(list
                .iter()
                .map(|v| State {
                    q: v[..3].to_vec(),
                    p: v[3..].to_vec(),
                    t: 0.0,
                })
                .collect()),
        }
    }

    pub fn section_config(&self, initial: State) -> SectionConfig {
        SectionConfig {
            chain: self.chain.clone(),
            dt: self.dt,
            t_final: self.t_final,
            delta: self.delta,
            initial,
            detection: self.detection,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let states = self.initial_states()?;
        if states.is_empty() {
            return Err(Error::invalid("a study needs at least one initial state"));
        }
        for s in states {
            self.section_config(s).validate()?;
        }
        self.slice.validate()
    }
}

/// One slice of one run and its dimension estimate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SliceOutcome {
    pub quantile: f64,
    pub slice: SlicedSection,
    /// `None` when the slice is too small or too degenerate to measure.
    pub box_count: Option<BoxCount>,
    pub note: Option<String>,
}

impl SliceOutcome {
    pub fn dimension(&self) -> Option<f64> {
        self.box_count.as_ref().map(|b| b.dimension)
    }
}

/// `q`-quantile of the sorted values (lower order statistic).
fn quantile(sorted: &[f64], q: f64) -> f64 {
    sorted[((sorted.len() - 1) as f64 * q).floor() as usize]
}

/// Cuts every slice named by `rule` and measures the ones that are large enough.
pub fn analyse_slices(events: &[SectionEvent], rule: &SliceRule) -> Result<Vec<SliceOutcome>> {
    rule.validate()?;
    if events.is_empty() {
        return Err(Error::invalid("no events to slice"));
    }
    let mut out = Vec::new();
    for j in 0..3 {
        let mut v: Vec<f64> = events.iter().map(|e| e.p[j]).collect();
        v.sort_by(f64::total_cmp);
        for &q in &rule.quantiles {
            let value = quantile(&v, q);
            let slice = slice_widening(events, j, value, rule.tolerance, rule.min_points, rule.max_tolerance)?;
            let (box_count, note) = if slice.points.len() < rule.min_points {
                (None, Some(format!("only {} points at the widest tolerance", slice.points.len())))
            } else {
                match box_count_dimension(&slice.points) {
                    Ok(b) => (Some(b), None),
                    Err(Error::Degenerate(m)) => (None, Some(m)),
                    Err(e) => return Err(e),
                }
            };
            out.push(SliceOutcome {
                quantile: q,
                slice,
                box_count,
                note,
            });
        }
    }
    Ok(out)
}

/// Section run and slices for one initial state of a study.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyRun {
    pub initial: State,
    pub run: SectionRun,
    pub slices: Vec<SliceOutcome>,
}

/// Runs every initial state of the study (in parallel on the current rayon pool).
pub fn run_study(study: &PoincareStudy) -> Result<Vec<StudyRun>> {
    study.validate()?;
    study
        .initial_states()?
        .into_par_iter()
        .map(|initial| {
            let run = run_sections(&study.section_config(initial.clone()))?;
            let slices = analyse_slices(&run.events, &study.slice)?;
            Ok(StudyRun {
                initial,
                run,
                slices,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uncoupled(detection: Detection) -> SectionConfig {
        // a -> 0 leaves three independent oscillators of frequency nu
        let mut s = State::zeros(&ChainSpec::open(3));
        s.q[0] = 0.3;
        s.p[0] = 0.8;
        s.p[1] = 0.1;
        let mut c = SectionConfig::desk(s);
        c.chain = c.chain.with_interaction(1e-12, 1.0).with_pinning(1.5, 2);
        c.dt = 1e-3;
        c.t_final = 40.0;
        c.detection = detection;
        c
    }

    #[test]
    fn uncoupled_returns_every_half_period() {
        let run = run_sections(&uncoupled(Detection::SignCrossing)).unwrap();
        let half = std::f64::consts::PI / 1.5;
        // q0(t) = A cos(nu t - phi) returns to q0(0) at t = 2 phi / nu + k * 2 pi / nu
        // and at t = k * 2 pi / nu, alternating gaps that add up to a period
        let ts: Vec<f64> = run.events.iter().map(|e| e.t).collect();
        assert!(ts[0] > 0.0);
        for w in ts.windows(3) {
            assert!((w[2] - w[0] - 2.0 * half).abs() < 1e-4, "{w:?}");
        }
        for (k, e) in run.events.iter().enumerate() {
            let expect = if k % 2 == 0 { Direction::Down } else { Direction::Up };
            assert_eq!(e.direction, expect);
        }
        let nu = 1.5f64;
        let phi = (0.8f64 / nu).atan2(0.3);
        assert!((ts[0] - 2.0 * phi / nu).abs() < 1e-4, "{} vs {}", ts[0], 2.0 * phi / nu);
    }

    #[test]
    fn events_lie_on_the_section() {
        for mode in [Detection::SignCrossing, Detection::ToleranceWindow] {
            let c = uncoupled(mode);
            let run = run_sections(&c).unwrap();
            assert!(run.events.len() >= 10, "{mode:?}");
            for e in &run.events {
                assert!((e.q[0] - c.initial.q[0]).abs() <= c.delta);
                assert!(((e.energy - run.energy0) / run.energy0).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn tolerance_window_matches_crossings() {
        let a = run_sections(&uncoupled(Detection::SignCrossing)).unwrap();
        let b = run_sections(&uncoupled(Detection::ToleranceWindow)).unwrap();
        assert_eq!(a.events.len(), b.events.len());
        for (x, y) in a.events.iter().zip(&b.events) {
            assert!((x.t - y.t).abs() < 1e-2);
            assert_eq!(x.direction, y.direction);
        }
    }

    #[test]
    fn rejects_wrong_chain() {
        let mut c = uncoupled(Detection::SignCrossing);
        c.chain.n_dynamic = 4;
        assert!(run_sections(&c).is_err());
        let mut c = uncoupled(Detection::SignCrossing);
        c.delta = 0.0;
        assert!(run_sections(&c).is_err());
    }

    #[test]
    fn no_crossings_is_reported() {
        let mut c = uncoupled(Detection::SignCrossing);
        c.t_final = 0.5;
        assert!(matches!(run_sections(&c), Err(Error::NoCrossings { .. })));
    }

    fn fake_events(ps: &[[f64; 3]]) -> Vec<SectionEvent> {
        ps.iter()
            .map(|&p| SectionEvent {
                t: 0.0,
                direction: Direction::Up,
                q: [0.0; 3],
                p,
                energy: 0.0,
                hc: 0.0,
            })
            .collect()
    }

    #[test]
    fn slicing() {
        let ev = fake_events(&[[0.0, 1.0, 2.0], [0.5, 1.5, 2.5], [0.01, -1.0, 3.0]]);
        let all = slice(&ev, 0, 0.0, f64::INFINITY).unwrap();
        assert_eq!(all.points.len(), 3);
        let s = slice(&ev, 0, 0.0, 0.02).unwrap();
        assert_eq!(s.points, vec![[1.0, 2.0], [-1.0, 3.0]]);
        let s = slice(&ev, 1, 1.5, 0.0).unwrap();
        assert_eq!(s.points, vec![[0.5, 2.5]]);
        assert!(matches!(
            slice(&ev, 2, 7.0, 0.0),
            Err(Error::EmptySlice { index: 2, .. })
        ));
        assert!(slice(&[], 0, 0.0, 1.0).is_err());
    }

    #[test]
    fn widening_doubles_until_enough() {
        let ps: Vec<[f64; 3]> = (0..1000).map(|i| [i as f64 / 1000.0, 0.0, 0.0]).collect();
        let ev = fake_events(&ps);
        let s = slice_widening(&ev, 0, 0.5, 0.01, 100, 0.2).unwrap();
        assert_eq!(s.tolerance, 0.08);
        assert!(s.points.len() >= 100);
        let capped = slice_widening(&ev, 0, 0.5, 0.01, 900, 0.1).unwrap();
        assert_eq!(capped.tolerance, 0.08);
    }

    #[test]
    fn box_count_rejects_small_or_degenerate() {
        assert!(box_count_dimension(&[[0.0, 0.0]; 10]).is_err());
        assert!(matches!(
            box_count_dimension(&[[1.0, 1.0]; 600]),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn random_states_are_seeded() {
        let a = random_initial_state(0.5, &mut RngStream::new(3)).unwrap();
        let b = random_initial_state(0.5, &mut RngStream::new(3)).unwrap();
        assert_eq!(a, b);
        assert!(a.q.iter().chain(&a.p).all(|x| x.abs() <= 0.5));
        let tiny = random_initial_state(1e-9, &mut RngStream::new(3)).unwrap();
        assert!(tiny.q.iter().chain(&tiny.p).all(|x| x.abs() <= 1e-9));
        assert!(random_initial_state(0.0, &mut RngStream::new(3)).is_err());
    }
}
