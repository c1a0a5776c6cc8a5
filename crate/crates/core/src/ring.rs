//! Isolated periodic rings started from a localized disturbance.
//!
//! The total heat current is sampled along a deterministic trajectory and
//! summarised by a windowed envelope (mean of the local maxima and minima
//! in each window) and by the dominant angular frequency of its periodogram.

use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::chain::{
    center_of_mass_invariant, current_from_derivative, total_energy, Boundary, ChainSpec, State,
};
use crate::error::{Error, Result};
use crate::integrator::{StepperConfig, Trajectory};

/// Sparse initial condition: listed coordinates are set, everything else is 0.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseInitial {
    pub q: Vec<(usize, f64)>,
    pub p: Vec<(usize, f64)>,
}

impl SparseInitial {
    /// `q_0 = -1`, `p_1 = 1`, `q_2 = 1`.
    pub fn three_site_kick() -> Self {
        Self {
            q: vec![(0, -1.0), (2, 1.0)],
            p: vec![(1, 1.0)],
        }
    }

    pub fn build(&self, spec: &ChainSpec) -> Result<State> {
        let mut s = State::zeros(spec);
        for (&(site, v), is_q) in self
            .q
            .iter()
            .map(|e| (e, true))
            .chain(self.p.iter().map(|e| (e, false)))
        {
            if !spec.is_dynamic(site) {
                return Err(Error::invalid(format!(
                    "initial condition names site {site}, which is not dynamical"
                )));
            }
            if is_q {
                s.q[site] = v;
            } else {
                s.p[site] = v;
            }
        }
        Ok(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RingConfig {
    pub chain: ChainSpec,
    pub dt: f64,
    pub t_final: f64,
    /// Steps between current samples.
    pub sample_stride: u64,
    pub initial: SparseInitial,
    /// Envelope window length in time units.
    pub envelope_window: f64,
}

impl RingConfig {
    /// 200-site ring, `a = b = nu = 1`, pinning power `z`, the three-site
    /// kick, `dt = 1e-4`, `t_final = 8e3`, a sample every `0.1` time units
    /// and an envelope window of 100 pinning periods.
    pub fn desk(z: u32) -> Self {
        let chain = ChainSpec::periodic(200).with_pinning(1.0, z);
        Self {
            envelope_window: 100.0 * 2.0 * std::f64::consts::PI / chain.nu,
            chain,
            dt: 1e-4,
            t_final: 8e3,
            sample_stride: 1000,
            initial: SparseInitial::three_site_kick(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.chain.validate()?;
        if self.chain.boundary != Boundary::Periodic {
            return Err(Error::invalid("ring runs need a periodic chain"));
        }
        StepperConfig::deterministic(self.dt).validate()?;
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::invalid("t_final must be > 0"));
        }
        if self.sample_stride == 0 {
            return Err(Error::invalid("sample_stride must be >= 1"));
        }
        if self.window_samples() < 3 {
            return Err(Error::invalid("envelope window must span at least 3 samples"));
        }
        Ok(())
    }

    pub fn sample_interval(&self) -> f64 {
        self.dt * self.sample_stride as f64
    }

    pub fn window_samples(&self) -> usize {
        (self.envelope_window / self.sample_interval()).round() as usize
    }

    fn total_steps(&self) -> u64 {
        // number of whole sampling blocks, so the last sample lands on a block end
        let samples = (self.t_final / self.sample_interval() * (1.0 + 1e-12)).floor() as u64;
        samples * self.sample_stride
    }
}

/// Windowed averages of the local extrema; `None` marks a window without any.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub t_center: Vec<f64>,
    pub env_max: Vec<Option<f64>>,
    pub env_min: Vec<Option<f64>>,
}

impl Envelope {
    /// Mean of `|env_max|` and `|env_min|` per window, `None` for gaps.
    pub fn magnitude(&self) -> Vec<Option<f64>> {
        self.env_max
            .iter()
            .zip(&self.env_min)
            .map(|(hi, lo)| match (hi, lo) {
                (Some(h), Some(l)) => Some(0.5 * (h.abs() + l.abs())),
                (Some(x), None) | (None, Some(x)) => Some(x.abs()),
                (None, None) => None,
            })
            .collect()
    }

    /// Mean envelope magnitude over the last tenth of the windows divided by
    /// that over the first tenth (at least one window each).
    pub fn persistence_ratio(&self) -> Result<f64> {
        let mag = self.magnitude();
        let k = mag.len().div_ceil(10);
        if k == 0 {
            return Err(Error::Degenerate("envelope has no windows".into()));
        }
        let mean = |xs: &[Option<f64>]| -> Option<f64> {
            let v: Vec<f64> = xs.iter().flatten().copied().collect();
            (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
        };
        let first = mean(&mag[..k]).ok_or_else(|| Error::Degenerate("no extrema early in the run".into()))?;
        let last = mean(&mag[mag.len() - k..]).unwrap_or(0.0);
        if first == 0.0 {
            return Err(Error::Degenerate("early envelope is zero".into()));
        }
        Ok(last / first)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RingSeries {
    pub times: Vec<f64>,
    pub total_current: Vec<f64>,
    pub envelope: Envelope,
    /// Dominant angular frequency; `None` when the current vanishes identically.
    pub omega: Option<f64>,
    pub peak_height: Option<f64>,
    /// Largest `|H(t) - H(0)| / |H(0)|` over the samples.
    pub energy_drift: f64,
    /// Largest `|h_c(t) - h_c(0)| / max(1, |h_c(0)|)`; only meaningful for `z = 2`.
    pub hc_drift: f64,
}

impl RingSeries {
    pub fn persistence_ratio(&self) -> Result<f64> {
        self.envelope.persistence_ratio()
    }
}

/// Integrates the isolated ring and samples its total current.
pub fn run_ring(config: &RingConfig) -> Result<RingSeries> {
    config.validate()?;
    let spec = config.chain.clone();
    let state = config.initial.build(&spec)?;
    let e0 = total_energy(&state, &spec);
    let h0 = center_of_mass_invariant(&state, &spec)?;
    let mut traj = Trajectory::new(
        spec.clone(),
        state,
        None,
        &StepperConfig::deterministic(config.dt),
    )?;

    let sample = |t: &Trajectory| -> f64 {
        let p = &t.state().p;
        t.bond_derivatives()
            .iter()
            .enumerate()
            .map(|(j, &dv)| current_from_derivative(p, t.spec(), j, dv))
            .sum()
    };
    let mut times = vec![0.0];
    let mut current = vec![sample(&traj)];
    let mut energy_drift = 0.0f64;
    let mut hc_drift = 0.0f64;
    traj.evolve(config.total_steps(), config.sample_stride, |t| {
        times.push(t.state().t);
        current.push(sample(t));
        let e = total_energy(t.state(), t.spec());
        energy_drift = energy_drift.max(((e - e0) / e0).abs());
        if let Ok(h) = center_of_mass_invariant(t.state(), t.spec()) {
            hc_drift = hc_drift.max((h - h0).abs() / h0.abs().max(1.0));
        }
    })?;

    let env = envelope(&times, &current, config.window_samples())?;
    let (omega, peak_height) = match dominant_frequency(&current, config.sample_interval()) {
        Ok((w, h)) => (Some(w), Some(h)),
        Err(Error::Degenerate(_)) => (None, None),
        Err(e) => return Err(e),
    };
    Ok(RingSeries {
        times,
        total_current: current,
        envelope: env,
        omega,
        peak_height,
        energy_drift,
        hc_drift,
    })
}

/// Splits the series into consecutive windows of `window` samples and
/// averages the strict local maxima and minima inside each one.
pub fn envelope(times: &[f64], values: &[f64], window: usize) -> Result<Envelope> {
    if window < 3 {
        return Err(Error::invalid("envelope window must be >= 3 samples"));
    }
    if times.len() != values.len() {
        return Err(Error::invalid("times and values differ in length"));
    }
    let mut env = Envelope::default();
    for start in (0..values.len()).step_by(window) {
        let end = (start + window).min(values.len());
        let (mut hi, mut nhi, mut lo, mut nlo) = (0.0, 0usize, 0.0, 0usize);
        for i in start.max(1)..end.min(values.len() - 1) {
            let (a, x, b) = (values[i - 1], values[i], values[i + 1]);
            if x > a && x > b {
                hi += x;
                nhi += 1;
            } else if x < a && x < b {
                lo += x;
                nlo += 1;
            }
        }
        env.t_center
            .push(times[start..end].iter().sum::<f64>() / (end - start) as f64);
        env.env_max.push((nhi > 0).then(|| hi / nhi as f64));
        env.env_min.push((nlo > 0).then(|| lo / nlo as f64));
    }
    Ok(env)
}

/// Angular frequency of the largest non-zero periodogram peak of a uniformly
/// sampled series, refined by a parabola through the log power of the peak
/// bin and its neighbours. Returns `(omega, peak power)`.
///
/// The series is mean-subtracted and Hann-tapered, then zero-padded to at
/// least twice its length.
pub fn dominant_frequency(values: &[f64], interval: f64) -> Result<(f64, f64)> {
    let n = values.len();
    if n < 4 {
        return Err(Error::invalid("need at least 4 samples"));
    }
    if !(interval > 0.0) {
        return Err(Error::invalid("sampling interval must be > 0"));
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if values.iter().all(|&v| v == 0.0) || values.iter().all(|&v| (v - mean).abs() <= 1e-300) {
        return Err(Error::Degenerate("series carries no oscillation".into()));
    }
    let len = (2 * n).next_power_of_two();
    let mut buf: Vec<Complex<f64>> = values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let w = 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / (n - 1) as f64).cos();
            Complex::new((v - mean) * w, 0.0)
        })
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(len)
        .collect();
    FftPlanner::new().plan_fft_forward(len).process(&mut buf);
    let power: Vec<f64> = buf[..=len / 2].iter().map(|c| c.norm_sqr()).collect();
    let (k, &peak) = power
        .iter()
        .enumerate()
        .skip(1)
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("at least one positive-frequency bin");
    let mut offset = 0.0;
    if k + 1 < power.len() && power[k - 1] > 0.0 && power[k + 1] > 0.0 {
        let (a, b, c) = (power[k - 1].ln(), peak.ln(), power[k + 1].ln());
        let denom = a - 2.0 * b + c;
        if denom < 0.0 {
            offset = (0.5 * (a - c) / denom).clamp(-0.5, 0.5);
        }
    }
    let freq = (k as f64 + offset) / (len as f64 * interval);
    Ok((2.0 * std::f64::consts::PI * freq, peak))
}
