//! Time stepping: velocity Verlet for isolated chains, and an
//! Ornstein-Uhlenbeck / Verlet / Ornstein-Uhlenbeck splitting for chains
//! whose end sites are coupled to Langevin reservoirs.
//!
//! The reservoir sub-flow is integrated exactly,
//! `p <- p e^{-mu h} + sqrt(T (1 - e^{-2 mu h})) xi` with `h = dt / 2`,
//! so an isolated bath site samples its Maxwell distribution without
//! discretisation error.

use serde::{Deserialize, Serialize};

use crate::chain::{bond_derivatives_into, forces_from_bonds, Boundary, ChainSpec, State};
use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Two Langevin reservoirs at temperatures `t_left` and `t_right`.
///
/// When `left_site == right_site` the site is coupled to a single reservoir
/// and both temperatures must agree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BathSpec {
    pub mu: f64,
    pub t_left: f64,
    pub t_right: f64,
    pub left_site: usize,
    pub right_site: usize,
}

impl BathSpec {
    /// Reservoirs on the first and last dynamical sites of `spec`.
    pub fn at_ends(spec: &ChainSpec, mu: f64, t_left: f64, t_right: f64) -> Self {
        let sites = spec.dynamic_sites();
        Self {
            mu,
            t_left,
            t_right,
            left_site: sites.start,
            right_site: sites.end - 1,
        }
    }

    /// One reservoir at temperature `t` acting on `site`.
    pub fn single(site: usize, mu: f64, t: f64) -> Self {
        Self {
            mu,
            t_left: t,
            t_right: t,
            left_site: site,
            right_site: site,
        }
    }

    pub fn validate(&self, spec: &ChainSpec) -> Result<()> {
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            return Err(Error::invalid(format!("mu must be >= 0, got {}", self.mu)));
        }
        for t in [self.t_left, self.t_right] {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::invalid(format!("temperatures must be > 0, got {t}")));
            }
        }
        for site in [self.left_site, self.right_site] {
            if !spec.is_dynamic(site) {
                return Err(Error::invalid(format!(
                    "bath site {site} is not a dynamical site"
                )));
            }
        }
        if self.left_site == self.right_site && self.t_left != self.t_right {
            return Err(Error::invalid(
                "a single bath site cannot hold two temperatures",
            ));
        }
        Ok(())
    }

    /// `(site, temperature)` for each distinct coupled site.
    fn couplings(&self) -> Vec<(usize, f64)> {
        if self.left_site == self.right_site {
            vec![(self.left_site, self.t_left)]
        } else {
            vec![(self.left_site, self.t_left), (self.right_site, self.t_right)]
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Deterministic,
    Langevin,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepperConfig {
    pub dt: f64,
    pub seed: u64,
    pub scheme: Scheme,
}

impl StepperConfig {
    pub fn deterministic(dt: f64) -> Self {
        Self {
            dt,
            seed: 0,
            scheme: Scheme::Deterministic,
        }
    }

    pub fn langevin(dt: f64, seed: u64) -> Self {
        Self {
            dt,
            seed,
            scheme: Scheme::Langevin,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid(format!("dt must be > 0, got {}", self.dt)));
        }
        Ok(())
    }
}

/// Exact OU half-step coefficients for one bath site.
#[derive(Clone, Copy, Debug)]
struct OuSite {
    site: usize,
    decay: f64,
    kick: f64,
}

fn ou_sites(baths: &BathSpec, dt: f64) -> Vec<OuSite> {
    if baths.mu == 0.0 {
        return Vec::new();
    }
    let decay = (-baths.mu * 0.5 * dt).exp();
    baths
        .couplings()
        .into_iter()
        .map(|(site, t)| OuSite {
            site,
            decay,
            kick: (t * -(-baths.mu * dt).exp_m1()).sqrt(),
        })
        .collect()
}

#[inline]
fn apply_ou(p: &mut [f64], ou: &[OuSite], rng: &mut RngStream) {
    for s in ou {
        p[s.site] = p[s.site] * s.decay + s.kick * rng.gaussian();
    }
}

/// One velocity Verlet step. `force` must hold the forces at the incoming
/// positions; on return `dv` and `force` match the outgoing positions.
#[inline]
fn verlet(
    q: &mut [f64],
    p: &mut [f64],
    force: &mut [f64],
    dv: &mut [f64],
    spec: &ChainSpec,
    dt: f64,
) {
    let half = 0.5 * dt;
    let range = spec.dynamic_sites();
    for ((q, p), f) in q[range.clone()]
        .iter_mut()
        .zip(&mut p[range.clone()])
        .zip(&force[range.clone()])
    {
        *p += half * f;
        *q += dt * *p;
    }
    bond_derivatives_into(q, spec, dv);
    forces_from_bonds(q, spec, dv, force);
    for (p, f) in p[range.clone()].iter_mut().zip(&force[range]) {
        *p += half * f;
    }
}

fn blow_up_check(state: &State, step: u64) -> Result<()> {
    if state.is_finite() {
        Ok(())
    } else {
        Err(Error::BlowUp {
            step,
            time: state.t,
        })
    }
}

/// Advances an isolated chain by one velocity Verlet step.
pub fn deterministic_step(state: &mut State, spec: &ChainSpec, dt: f64) -> Result<()> {
    state.check(spec)?;
    let mut dv = vec![0.0; spec.bond_count()];
    let mut force = vec![0.0; state.q.len()];
    bond_derivatives_into(&state.q, spec, &mut dv);
    forces_from_bonds(&state.q, spec, &dv, &mut force);
    verlet(&mut state.q, &mut state.p, &mut force, &mut dv, spec, dt);
    state.t += dt;
    blow_up_check(state, 1)
}

/// Advances a bath-coupled chain by one OU(dt/2) / Verlet(dt) / OU(dt/2) step.
pub fn langevin_step(
    state: &mut State,
    spec: &ChainSpec,
    baths: &BathSpec,
    dt: f64,
    rng: &mut RngStream,
) -> Result<()> {
    state.check(spec)?;
    baths.validate(spec)?;
    let ou = ou_sites(baths, dt);
    let mut dv = vec![0.0; spec.bond_count()];
    let mut force = vec![0.0; state.q.len()];
    bond_derivatives_into(&state.q, spec, &mut dv);
    forces_from_bonds(&state.q, spec, &dv, &mut force);
    apply_ou(&mut state.p, &ou, rng);
    verlet(&mut state.q, &mut state.p, &mut force, &mut dv, spec, dt);
    apply_ou(&mut state.p, &ou, rng);
    state.t += dt;
    blow_up_check(state, 1)
}

/// A single trajectory: owns its state, its noise stream and the force
/// cache, which stays valid between steps.
#[derive(Clone, Debug)]
pub struct Trajectory {
    spec: ChainSpec,
    state: State,
    dt: f64,
    ou: Vec<OuSite>,
    rng: RngStream,
    force: Vec<f64>,
    dv: Vec<f64>,
    t0: f64,
    steps: u64,
}

impl Trajectory {
    pub fn new(
        spec: ChainSpec,
        state: State,
        baths: Option<&BathSpec>,
        config: &StepperConfig,
    ) -> Result<Self> {
        spec.validate()?;
        state.check(&spec)?;
        config.validate()?;
        if spec.boundary == Boundary::Fixed {
            let last = state.q.len() - 1;
            if [state.q[0], state.p[0], state.q[last], state.p[last]] != [0.0; 4] {
                return Err(Error::invalid("frozen boundary sites must be at rest at 0"));
            }
        }
        let ou = match (config.scheme, baths) {
            (Scheme::Deterministic, _) => Vec::new(),
            (Scheme::Langevin, Some(b)) => {
                b.validate(&spec)?;
                ou_sites(b, config.dt)
            }
            (Scheme::Langevin, None) => {
                return Err(Error::invalid("Langevin scheme needs a bath specification"))
            }
        };
        let mut dv = vec![0.0; spec.bond_count()];
        let mut force = vec![0.0; state.q.len()];
        bond_derivatives_into(&state.q, &spec, &mut dv);
        forces_from_bonds(&state.q, &spec, &dv, &mut force);
        Ok(Self {
            t0: state.t,
            spec,
            state,
            dt: config.dt,
            ou,
            rng: RngStream::new(config.seed),
            force,
            dv,
            steps: 0,
        })
    }

    /// Replaces the noise stream, e.g. with one split from a sweep seed.
    pub fn with_rng(mut self, rng: RngStream) -> Self {
        self.rng = rng;
        self
    }

    pub fn spec(&self) -> &ChainSpec {
        &self.spec
    }

    pub fn state(&self) -> &State {
        &self.state
    }

    pub fn into_state(self) -> State {
        self.state
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Steps taken since construction.
    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// `V'(r_j)` for every bond at the current positions.
    pub fn bond_derivatives(&self) -> &[f64] {
        &self.dv
    }

    /// Forces at the current positions.
    pub fn forces(&self) -> &[f64] {
        &self.force
    }

    /// Advances one step without a finiteness check.
    #[inline]
    pub fn step(&mut self) {
        let st = &mut self.state;
        apply_ou(&mut st.p, &self.ou, &mut self.rng);
        verlet(
            &mut st.q,
            &mut st.p,
            &mut self.force,
            &mut self.dv,
            &self.spec,
            self.dt,
        );
        apply_ou(&mut st.p, &self.ou, &mut self.rng);
        self.steps += 1;
        st.t = self.t0 + self.steps as f64 * self.dt;
    }

    /// Takes `n_steps` steps. After every step whose global index is a
    /// multiple of `stride` the coordinates are checked for blow-up and
    /// `observer` is called.
    pub fn evolve<F>(&mut self, n_steps: u64, stride: u64, mut observer: F) -> Result<()>
    where
        F: FnMut(&Trajectory),
    {
        if stride == 0 {
            return Err(Error::invalid("observer stride must be >= 1"));
        }
        for _ in 0..n_steps {
            self.step();
            if self.steps % stride == 0 {
                blow_up_check(&self.state, self.steps)?;
                observer(self);
            }
        }
        blow_up_check(&self.state, self.steps)
    }

    /// `evolve` without an observer.
    pub fn advance(&mut self, n_steps: u64) -> Result<()> {
        let stride = n_steps.clamp(1, 4096);
        self.evolve(n_steps, stride, |_| {})
    }
}

/// Runs `n_steps` of the configured scheme from `state`, calling `observer`
/// every `stride` steps, and returns the final state.
pub fn evolve<F>(
    state: State,
    spec: &ChainSpec,
    baths: Option<&BathSpec>,
    config: &StepperConfig,
    n_steps: u64,
    stride: u64,
    observer: F,
) -> Result<State>
where
    F: FnMut(&Trajectory),
{
    let mut traj = Trajectory::new(spec.clone(), state, baths, config)?;
    traj.evolve(n_steps, stride, observer)?;
    Ok(traj.into_state())
}
