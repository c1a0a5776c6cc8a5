//! Physics of the pinned chain: potentials, forces, energies, heat currents
//! and the center-of-mass invariant.
//!
//! Sites are labelled `0..total_sites()`. Bond `j` joins site `j` to site
//! `j + 1`, with stretch `r_j = q_{j+1} - q_j`; on a periodic ring the last
//! bond wraps around, `r = q_0 - q_{M-1}`. With fixed ends the lattice is
//! `0..=N+1`, sites `0` and `N+1` are frozen at `q = p = 0`, and the
//! dynamical sites are `1..=N`.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// Walls at sites `0` and `N+1`; `N` dynamical sites in between.
    Fixed,
    /// Ring: every site is dynamical, the last bond wraps to site 0.
    Periodic,
    /// Free ends: every site is dynamical, no wrap bond.
    Open,
}

/// Nearest-neighbour interaction.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interaction {
    /// `V(r) = (a/b) exp(-b r)`.
    #[default]
    Toda,
    /// Second-order Taylor expansion of the Toda bond about `r = 0`,
    /// `V(r) = a/b - a r + (a b / 2) r^2`. Only meant as a harmonic-crystal
    /// reference for testing the transport machinery.
    Harmonic,
}

/// Static description of a chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    /// Number of dynamical sites. For `Fixed` this is `N`; for `Periodic`
    /// and `Open` it equals the total number of sites.
    pub n_dynamic: usize,
    pub boundary: Boundary,
    /// Interaction amplitude.
    pub a: f64,
    /// Inverse interaction range.
    pub b: f64,
    /// Pinning strength.
    pub nu: f64,
    /// Pinning power; positive and even.
    pub z: u32,
    #[serde(default)]
    pub interaction: Interaction,
}

impl ChainSpec {
    /// Chain with `a = b = nu = 1`, harmonic pinning and the given boundary.
    pub fn new(boundary: Boundary, n_dynamic: usize) -> Self {
        Self {
            n_dynamic,
            boundary,
            a: 1.0,
            b: 1.0,
            nu: 1.0,
            z: 2,
            interaction: Interaction::Toda,
        }
    }

    /// Fixed-end chain with `n` dynamical sites (`n + 2` lattice sites).
    pub fn fixed(n: usize) -> Self {
        Self::new(Boundary::Fixed, n)
    }

    /// Ring of `total_sites` particles.
    pub fn periodic(total_sites: usize) -> Self {
        Self::new(Boundary::Periodic, total_sites)
    }

    /// Open chain of `total_sites` particles.
    pub fn open(total_sites: usize) -> Self {
        Self::new(Boundary::Open, total_sites)
    }

    pub fn with_pinning(mut self, nu: f64, z: u32) -> Self {
        self.nu = nu;
        self.z = z;
        self
    }

    pub fn with_interaction(mut self, a: f64, b: f64) -> Self {
        self.a = a;
        self.b = b;
        self
    }

    pub fn with_bond(mut self, interaction: Interaction) -> Self {
        self.interaction = interaction;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.a.is_finite()) {
            return Err(Error::invalid(format!("a must be > 0, got {}", self.a)));
        }
        if !(self.b > 0.0 && self.b.is_finite()) {
            return Err(Error::invalid(format!("b must be > 0, got {}", self.b)));
        }
        if !(self.nu >= 0.0 && self.nu.is_finite()) {
            return Err(Error::invalid(format!("nu must be >= 0, got {}", self.nu)));
        }
        if self.z < 2 || self.z % 2 != 0 {
            return Err(Error::invalid(format!(
                "z must be even and >= 2, got {}",
                self.z
            )));
        }
        if self.n_dynamic == 0 {
            return Err(Error::invalid("chain needs at least one dynamical site"));
        }
        if self.boundary == Boundary::Periodic && self.n_dynamic < 2 {
            return Err(Error::invalid("a periodic ring needs at least two sites"));
        }
        Ok(())
    }

    /// Length of the `q` and `p` arrays.
    pub fn total_sites(&self) -> usize {
        match self.boundary {
            Boundary::Fixed => self.n_dynamic + 2,
            Boundary::Periodic | Boundary::Open => self.n_dynamic,
        }
    }

    /// Labels of the sites that move.
    pub fn dynamic_sites(&self) -> Range<usize> {
        match self.boundary {
            Boundary::Fixed => 1..self.n_dynamic + 1,
            Boundary::Periodic | Boundary::Open => 0..self.n_dynamic,
        }
    }

    pub fn is_dynamic(&self, site: usize) -> bool {
        self.dynamic_sites().contains(&site)
    }

    pub fn bond_count(&self) -> usize {
        match self.boundary {
            Boundary::Fixed => self.n_dynamic + 1,
            Boundary::Periodic => self.n_dynamic,
            Boundary::Open => self.n_dynamic - 1,
        }
    }

    /// Sites joined by bond `j` (no bounds check).
    #[inline]
    pub fn bond_sites(&self, j: usize) -> (usize, usize) {
        let total = self.total_sites();
        (j, if j + 1 == total { 0 } else { j + 1 })
    }

    #[inline]
    fn pin_pow(&self, q: f64) -> f64 {
        match self.z {
            2 => q,
            4 => q * q * q,
            z => q.powi(z as i32 - 1),
        }
    }

    /// Potential of the configured bond interaction.
    #[inline]
    pub fn bond_potential(&self, r: f64) -> f64 {
        match self.interaction {
            Interaction::Toda => toda_potential(r, self),
            Interaction::Harmonic => self.a / self.b - self.a * r + 0.5 * self.a * self.b * r * r,
        }
    }

    /// `dV/dr` of the configured bond interaction.
    #[inline]
    pub fn bond_derivative(&self, r: f64) -> f64 {
        match self.interaction {
            Interaction::Toda => toda_potential_derivative(r, self),
            Interaction::Harmonic => -self.a + self.a * self.b * r,
        }
    }
}

/// Dynamical snapshot. `q` and `p` cover every lattice site, frozen ones included.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    pub t: f64,
}

impl State {
    /// The all-zero state at `t = 0`.
    pub fn zeros(spec: &ChainSpec) -> Self {
        let n = spec.total_sites();
        Self {
            q: vec![0.0; n],
            p: vec![0.0; n],
            t: 0.0,
        }
    }

    pub fn check(&self, spec: &ChainSpec) -> Result<()> {
        let n = spec.total_sites();
        if self.q.len() != n || self.p.len() != n {
            return Err(Error::invalid(format!(
                "state has {} positions and {} momenta, chain expects {}",
                self.q.len(),
                self.p.len(),
                n
            )));
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.q.iter().chain(&self.p).all(|x| x.is_finite())
    }

    /// Copy with every momentum negated.
    pub fn reversed(&self) -> Self {
        Self {
            q: self.q.clone(),
            p: self.p.iter().map(|p| -p).collect(),
            t: self.t,
        }
    }
}

/// Toda bond energy `(a/b) exp(-b r)`.
///
/// Overflows to `+inf` for very compressed bonds; drivers treat the
/// resulting non-finite coordinates as a blow-up.
#[inline]
pub fn toda_potential(r: f64, spec: &ChainSpec) -> f64 {
    spec.a / spec.b * (-spec.b * r).exp()
}

/// `dV/dr = -a exp(-b r)`, negative everywhere.
#[inline]
pub fn toda_potential_derivative(r: f64, spec: &ChainSpec) -> f64 {
    -spec.a * (-spec.b * r).exp()
}

/// `(nu^2 / z) q^z`
#[inline]
pub fn pinning_energy(q: f64, spec: &ChainSpec) -> f64 {
    spec.nu * spec.nu / spec.z as f64 * q.powi(spec.z as i32)
}

/// `-nu^2 q^(z-1)`
#[inline]
pub fn pinning_force(q: f64, spec: &ChainSpec) -> f64 {
    -spec.nu * spec.nu * spec.pin_pow(q)
}

/// Writes `V'(r_j)` for every bond into `dv` (length `bond_count()`).
#[inline]
pub fn bond_derivatives_into(q: &[f64], spec: &ChainSpec, dv: &mut [f64]) {
    let bonds = spec.bond_count();
    debug_assert_eq!(dv.len(), bonds);
    let (a, b) = (spec.a, spec.b);
    let total = q.len();
    let straight = bonds.min(total - 1);
    for (d, w) in dv[..straight].iter_mut().zip(q.windows(2)) {
        *d = w[1] - w[0];
    }
    match spec.interaction {
        Interaction::Toda => {
            for d in &mut dv[..straight] {
                *d = -a * (-b * *d).exp();
            }
        }
        Interaction::Harmonic => {
            for d in &mut dv[..straight] {
                *d = -a + a * b * *d;
            }
        }
    }
    if bonds > straight {
        dv[bonds - 1] = spec.bond_derivative(q[0] - q[total - 1]);
    }
}

/// Forces given precomputed bond derivatives. Frozen sites receive 0.
#[inline]
pub fn forces_from_bonds(q: &[f64], spec: &ChainSpec, dv: &[f64], force: &mut [f64]) {
    let total = q.len();
    let nu2 = spec.nu * spec.nu;
    match spec.boundary {
        Boundary::Fixed => {
            force[0] = 0.0;
            force[total - 1] = 0.0;
            for j in 1..total - 1 {
                force[j] = dv[j] - dv[j - 1] - nu2 * spec.pin_pow(q[j]);
            }
        }
        Boundary::Periodic => {
            force[0] = dv[0] - dv[total - 1] - nu2 * spec.pin_pow(q[0]);
            for j in 1..total {
                force[j] = dv[j] - dv[j - 1] - nu2 * spec.pin_pow(q[j]);
            }
        }
        Boundary::Open => {
            if total == 1 {
                force[0] = -nu2 * spec.pin_pow(q[0]);
                return;
            }
            force[0] = dv[0] - nu2 * spec.pin_pow(q[0]);
            for j in 1..total - 1 {
                force[j] = dv[j] - dv[j - 1] - nu2 * spec.pin_pow(q[j]);
            }
            force[total - 1] = -dv[total - 2] - nu2 * spec.pin_pow(q[total - 1]);
        }
    }
}

/// Force on every lattice site: `V'(r_j) - V'(r_{j-1}) - nu^2 q_j^(z-1)`,
/// zero on frozen sites.
pub fn forces(state: &State, spec: &ChainSpec) -> Vec<f64> {
    let mut dv = vec![0.0; spec.bond_count()];
    let mut force = vec![0.0; state.q.len()];
    bond_derivatives_into(&state.q, spec, &mut dv);
    forces_from_bonds(&state.q, spec, &dv, &mut force);
    force
}

pub fn bond_stretch(q: &[f64], spec: &ChainSpec, j: usize) -> f64 {
    let (l, r) = spec.bond_sites(j);
    q[r] - q[l]
}

/// Hamiltonian: kinetic, pinning and bond energy summed over the lattice.
pub fn total_energy(state: &State, spec: &ChainSpec) -> f64 {
    let site: f64 = state
        .q
        .iter()
        .zip(&state.p)
        .map(|(&q, &p)| 0.5 * p * p + pinning_energy(q, spec))
        .sum();
    let bonds: f64 = (0..spec.bond_count())
        .map(|j| spec.bond_potential(bond_stretch(&state.q, spec, j)))
        .sum();
    site + bonds
}

/// `h_c = (sum p)^2 / 2 + nu^2 (sum q)^2 / 2`, conserved under harmonic
/// pinning when bond forces telescope (periodic and open chains).
pub fn center_of_mass_invariant(state: &State, spec: &ChainSpec) -> Result<f64> {
    if spec.boundary == Boundary::Fixed {
        return Err(Error::invalid(
            "center-of-mass invariant is not conserved with fixed boundaries",
        ));
    }
    let sp: f64 = state.p.iter().sum();
    let sq: f64 = state.q.iter().sum();
    Ok(0.5 * sp * sp + 0.5 * spec.nu * spec.nu * sq * sq)
}

/// Heat current through bond `j`: `-(p_j + p_{j+1}) V'(r_j) / 2`.
pub fn local_current(state: &State, spec: &ChainSpec, j: usize) -> Result<f64> {
    let bonds = spec.bond_count();
    if j >= bonds {
        return Err(Error::InvalidBond { bond: j, bonds });
    }
    let (l, r) = spec.bond_sites(j);
    let dv = spec.bond_derivative(state.q[r] - state.q[l]);
    Ok(-0.5 * (state.p[l] + state.p[r]) * dv)
}

/// Current through bond `j` given its cached `V'`.
#[inline]
pub(crate) fn current_from_derivative(p: &[f64], spec: &ChainSpec, j: usize, dv: f64) -> f64 {
    let (l, r) = spec.bond_sites(j);
    -0.5 * (p[l] + p[r]) * dv
}

/// Sum of the local currents over every bond.
pub fn total_current(state: &State, spec: &ChainSpec) -> f64 {
    (0..spec.bond_count())
        .map(|j| {
            let (l, r) = spec.bond_sites(j);
            -0.5 * (state.p[l] + state.p[r]) * spec.bond_derivative(state.q[r] - state.q[l])
        })
        .sum()
}
