//! Driven chains: relax to the nonequilibrium steady state between two
//! reservoirs, then measure the temperature profile, the bond currents and
//! the three current estimators.
//!
//! Per run the chain starts at rest, relaxes for `steps_relax` steps and is
//! then sampled every `measure_stride` steps. Independent runs use split
//! noise streams of one master seed; error bars are between-run standard
//! errors (batch means of the single run when `n_runs == 1`).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{current_from_derivative, Boundary, ChainSpec, State};
use crate::error::{Error, Result};
use crate::integrator::{BathSpec, Scheme, StepperConfig, Trajectory};
use crate::rng::{RngStream, GENERATOR};
use crate::stats::{mean_stderr, Estimate};

/// Batches used for error bars when only one run is available.
const SINGLE_RUN_BATCHES: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NessConfig {
    pub chain: ChainSpec,
    pub baths: BathSpec,
    pub dt: f64,
    pub steps_relax: u64,
    pub steps_measure: u64,
    pub measure_stride: u64,
    pub n_runs: usize,
    pub master_seed: u64,
}

impl NessConfig {
    /// Desk-scale protocol: `mu = 1`, `dt = 0.005`, `2e7` relaxation and
    /// measurement steps, a sample every `1e3` steps, 4 runs.
    pub fn desk(chain: ChainSpec, t_left: f64, t_right: f64) -> Self {
        let baths = BathSpec::at_ends(&chain, 1.0, t_left, t_right);
        Self {
            chain,
            baths,
            dt: 0.005,
            steps_relax: 20_000_000,
            steps_measure: 20_000_000,
            measure_stride: 1_000,
            n_runs: 4,
            master_seed: 2017,
        }
    }

    /// Same protocol on a chain with `n` dynamical sites, baths moved to the new ends.
    pub fn with_size(&self, n: usize) -> Self {
        let mut c = self.clone();
        c.chain.n_dynamic = n;
        c.baths.left_site = 1;
        c.baths.right_site = n;
        c
    }

    pub fn with_nu(&self, nu: f64) -> Self {
        let mut c = self.clone();
        c.chain.nu = nu;
        c
    }

    pub fn validate(&self) -> Result<()> {
        self.chain.validate()?;
        if self.chain.boundary != Boundary::Fixed {
            return Err(Error::invalid(
                "steady-state runs need a fixed-boundary chain",
            ));
        }
        if self.chain.n_dynamic < 3 {
            return Err(Error::invalid(
                "steady-state runs need at least 3 dynamical sites",
            ));
        }
        self.baths.validate(&self.chain)?;
        StepperConfig::langevin(self.dt, 0).validate()?;
        if self.steps_relax == 0 || self.steps_measure == 0 {
            return Err(Error::invalid("steps_relax and steps_measure must be > 0"));
        }
        if self.measure_stride == 0 {
            return Err(Error::invalid("measure_stride must be >= 1"));
        }
        if self.measure_stride > self.steps_measure {
            return Err(Error::invalid("measure_stride exceeds steps_measure"));
        }
        if self.n_runs == 0 {
            return Err(Error::invalid("n_runs must be >= 1"));
        }
        Ok(())
    }
}

/// Reproducibility record attached to every result.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub generator: String,
    pub master_seed: u64,
    /// Stream id of each run; run `i` uses stream `i` of `master_seed`.
    pub streams: Vec<u64>,
    pub dt: f64,
    pub scheme: Scheme,
    pub steps_relax: u64,
    pub steps_measure: u64,
    pub measure_stride: u64,
}

/// Time averages collected by one run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunAverages {
    /// `<p_j^2>` for `j = 1..=N`.
    pub temperatures: Vec<f64>,
    /// `<J_j>` for bonds `j = 1..=N-1`.
    pub currents: Vec<f64>,
    /// Per-batch copies of the two vectors above.
    pub batches: Vec<(Vec<f64>, Vec<f64>)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NessResult {
    pub n: usize,
    pub nu: f64,
    pub z: u32,
    pub j_bulk: Estimate,
    pub j_left: Estimate,
    pub j_right: Estimate,
    /// `T_j` for sites `j = 1..=N`.
    pub temp_profile: Vec<Estimate>,
    /// `<J_j>` for bonds `j = 1..=N-1`.
    pub current_profile: Vec<Estimate>,
    pub metadata: RunMetadata,
}

impl NessResult {
    /// Position `x_j = j / N` of profile entry `j` (1-based site label).
    pub fn position(&self, site: usize) -> f64 {
        site as f64 / self.n as f64
    }

    /// Profile indices covering the middle half of the chain.
    pub fn middle_half(&self) -> std::ops::Range<usize> {
        self.n / 4..self.n - self.n / 4
    }

    /// Largest `|<J_j> - J_bulk|` in units of the bond's standard error.
    pub fn current_profile_deviation(&self) -> f64 {
        self.current_profile
            .iter()
            .map(|e| {
                let dev = (e.mean - self.j_bulk.mean).abs();
                if e.stderr > 0.0 {
                    dev / e.stderr
                } else if dev == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            })
            .fold(0.0, f64::max)
    }

    /// Population standard deviation of `T_j` over the middle half.
    pub fn middle_temperature_spread(&self) -> f64 {
        let t: Vec<f64> = self.temp_profile[self.middle_half()]
            .iter()
            .map(|e| e.mean)
            .collect();
        let m = t.iter().sum::<f64>() / t.len() as f64;
        (t.iter().map(|x| (x - m).powi(2)).sum::<f64>() / t.len() as f64).sqrt()
    }

    /// Largest rise `T_{j+1} - T_j` over the middle half, in units of the
    /// pair's combined standard error. Values `<= k` mean the profile
    /// decreases left to right up to `k`-sigma fluctuations.
    pub fn middle_monotonicity_violation(&self) -> f64 {
        let r = self.middle_half();
        self.temp_profile[r]
            .windows(2)
            .map(|w| {
                let rise = w[1].mean - w[0].mean;
                let se = w[0].stderr.hypot(w[1].stderr);
                if rise <= 0.0 {
                    0.0
                } else if se > 0.0 {
                    rise / se
                } else {
                    f64::INFINITY
                }
            })
            .fold(0.0, f64::max)
    }
}

/// Integrates run `run_index` of `config` and returns its time averages.
pub fn run_single(config: &NessConfig, run_index: usize) -> Result<RunAverages> {
    config.validate()?;
    let n = config.chain.n_dynamic;
    let stepper = StepperConfig::langevin(config.dt, config.master_seed);
    let mut traj = Trajectory::new(
        config.chain.clone(),
        State::zeros(&config.chain),
        Some(&config.baths),
        &stepper,
    )?
    .with_rng(RngStream::split(config.master_seed, run_index as u64));

    traj.advance(config.steps_relax)?;

    let samples = config.steps_measure / config.measure_stride;
    let batches = SINGLE_RUN_BATCHES.min(samples as usize).max(1);
    let mut temp = vec![vec![0.0; n]; batches];
    let mut cur = vec![vec![0.0; n - 1]; batches];
    let mut counts = vec![0u64; batches];
    let mut taken = 0u64;
    traj.evolve(config.steps_measure, config.measure_stride, |t| {
        let b = ((taken * batches as u64) / samples).min(batches as u64 - 1) as usize;
        taken += 1;
        counts[b] += 1;
        let p = &t.state().p;
        let spec = t.spec();
        for (acc, &pj) in temp[b].iter_mut().zip(&p[1..=n]) {
            *acc += pj * pj;
        }
        let dv = t.bond_derivatives();
        for (k, acc) in cur[b].iter_mut().enumerate() {
            *acc += current_from_derivative(p, spec, k + 1, dv[k + 1]);
        }
    })?;

    let total: u64 = counts.iter().sum();
    let mut temperatures = vec![0.0; n];
    let mut currents = vec![0.0; n - 1];
    let mut out_batches = Vec::with_capacity(batches);
    for ((t, c), &k) in temp.into_iter().zip(cur).zip(&counts) {
        for (dst, s) in temperatures.iter_mut().zip(&t) {
            *dst += s;
        }
        for (dst, s) in currents.iter_mut().zip(&c) {
            *dst += s;
        }
        let k = k.max(1) as f64;
        out_batches.push((
            t.iter().map(|s| s / k).collect(),
            c.iter().map(|s| s / k).collect(),
        ));
    }
    let total = total.max(1) as f64;
    temperatures.iter_mut().for_each(|x| *x /= total);
    currents.iter_mut().for_each(|x| *x /= total);
    if temperatures.iter().chain(&currents).any(|x| !x.is_finite()) {
        return Err(Error::BlowUp {
            step: traj.steps(),
            time: traj.state().t,
        });
    }
    Ok(RunAverages {
        temperatures,
        currents,
        batches: out_batches,
    })
}

/// Folds per-run averages (ordered by run index) into a steady-state result.
pub fn combine(config: &NessConfig, runs: &[RunAverages]) -> Result<NessResult> {
    if runs.is_empty() {
        return Err(Error::invalid("no runs to combine"));
    }
    let samples: Vec<(&[f64], &[f64])> = if runs.len() == 1 {
        runs[0]
            .batches
            .iter()
            .map(|(t, c)| (t.as_slice(), c.as_slice()))
            .collect()
    } else {
        runs.iter()
            .map(|r| (r.temperatures.as_slice(), r.currents.as_slice()))
            .collect()
    };
    let n = config.chain.n_dynamic;
    let mu = config.baths.mu;
    let column = |f: &dyn Fn(&(&[f64], &[f64])) -> f64| -> Estimate {
        let xs: Vec<f64> = samples.iter().map(f).collect();
        mean_stderr(&xs)
    };
    let temp_profile = (0..n).map(|j| column(&|s| s.0[j])).collect();
    let current_profile = (0..n - 1).map(|k| column(&|s| s.1[k])).collect();
    // bonds 2..=N-1 sit at indices 1..=N-2 of the current vector
    let j_bulk = column(&|s| s.1[1..n - 1].iter().sum::<f64>() / (n - 2) as f64);
    let j_left = column(&|s| mu * (config.baths.t_left - s.0[0]));
    let j_right = column(&|s| mu * (s.0[n - 1] - config.baths.t_right));
    Ok(NessResult {
        n,
        nu: config.chain.nu,
        z: config.chain.z,
        j_bulk,
        j_left,
        j_right,
        temp_profile,
        current_profile,
        metadata: RunMetadata {
            generator: GENERATOR.to_string(),
            master_seed: config.master_seed,
            streams: (0..config.n_runs as u64).collect(),
            dt: config.dt,
            scheme: Scheme::Langevin,
            steps_relax: config.steps_relax,
            steps_measure: config.steps_measure,
            measure_stride: config.measure_stride,
        },
    })
}

/// Runs every seed of `config` (in parallel on the current rayon pool) and
/// combines them.
pub fn run_ness(config: &NessConfig) -> Result<NessResult> {
    config.validate()?;
    let runs = (0..config.n_runs)
        .into_par_iter()
        .map(|i| run_single(config, i))
        .collect::<Result<Vec<_>>>()?;
    combine(config, &runs)
}

/// Largest pairwise discrepancy among `J_bulk`, `J_L` and `J_R`, relative
/// to their mean.
pub fn estimator_agreement(result: &NessResult) -> Result<f64> {
    currents_agreement([
        result.j_bulk.mean,
        result.j_left.mean,
        result.j_right.mean,
    ])
}

/// [`estimator_agreement`] on raw values.
pub fn currents_agreement(j: [f64; 3]) -> Result<f64> {
    let mean = j.iter().sum::<f64>() / 3.0;
    if mean == 0.0 || !mean.is_finite() {
        return Err(Error::Degenerate(
            "estimator agreement needs a nonzero mean current".into(),
        ));
    }
    let mut worst = 0.0f64;
    for x in 0..3 {
        for y in x + 1..3 {
            worst = worst.max((j[x] - j[y]).abs());
        }
    }
    Ok(worst / mean.abs())
}

fn check_scaling_points(points: &[(f64, f64)]) -> Result<()> {
    if points.len() < 2 {
        return Err(Error::invalid("scaling fit needs at least two points"));
    }
    for &(n, j) in points {
        if !(n > 0.0) {
            return Err(Error::invalid(format!("system size must be > 0, got {n}")));
        }
        if !(j > 0.0) {
            return Err(Error::invalid(format!(
                "scaling fit needs positive currents, got {j}"
            )));
        }
    }
    Ok(())
}

/// `alpha` in `J ~ N^-alpha` from the two largest sizes.
pub fn scaling_exponent_two_point(points: &[(f64, f64)]) -> Result<f64> {
    check_scaling_points(points)?;
    let mut p = points.to_vec();
    p.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (n1, j1) = p[p.len() - 2];
    let (n2, j2) = p[p.len() - 1];
    if n1 == n2 {
        return Err(Error::invalid("the two largest sizes coincide"));
    }
    Ok(-(j2 / j1).ln() / (n2 / n1).ln())
}

/// `alpha` from a least-squares line through `(ln N, ln J)`.
pub fn scaling_exponent_least_squares(points: &[(f64, f64)]) -> Result<f64> {
    check_scaling_points(points)?;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let slope = crate::stats::ols_slope(&xs, &ys)
        .ok_or_else(|| Error::invalid("all sizes coincide"))?;
    Ok(-slope)
}

/// One steady-state run per pinning strength, sharing seeds; sorted by `nu`.
pub fn pinning_sweep(config: &NessConfig, nu_values: &[f64]) -> Result<Vec<(f64, NessResult)>> {
    let mut nus = nu_values.to_vec();
    if let Some(bad) = nus.iter().find(|nu| !(**nu >= 0.0)) {
        return Err(Error::invalid(format!("nu must be >= 0, got {bad}")));
    }
    nus.sort_by(f64::total_cmp);
    let configs: Vec<NessConfig> = nus.iter().map(|&nu| config.with_nu(nu)).collect();
    for c in &configs {
        c.validate()?;
    }
    let jobs: Vec<(usize, usize)> = (0..configs.len())
        .flat_map(|c| (0..config.n_runs).map(move |r| (c, r)))
        .collect();
    let runs = jobs
        .par_iter()
        .map(|&(c, r)| run_single(&configs[c], r))
        .collect::<Result<Vec<_>>>()?;
    configs
        .iter()
        .zip(runs.chunks(config.n_runs))
        .zip(nus)
        .map(|((c, rs), nu)| Ok((nu, combine(c, rs)?)))
        .collect()
}
