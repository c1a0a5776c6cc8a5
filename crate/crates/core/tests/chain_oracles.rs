//! Independent oracles for the chain physics: finite-difference gradients,
//! a compensated-sum energy, and symmetry properties of forces and currents.

use pinned_toda::chain::{
    center_of_mass_invariant, forces, local_current, total_current, total_energy,
};
use pinned_toda::{Boundary, ChainSpec, Interaction, RngStream, State};
use proptest::prelude::*;

fn random_state(spec: &ChainSpec, rng: &mut RngStream, scale: f64) -> State {
    let mut s = State::zeros(spec);
    for i in spec.dynamic_sites() {
        s.q[i] = rng.uniform(-scale, scale);
        s.p[i] = rng.uniform(-scale, scale);
    }
    s
}

fn specs() -> Vec<ChainSpec> {
    vec![
        ChainSpec::fixed(6),
        ChainSpec::fixed(5).with_pinning(0.7, 4),
        ChainSpec::periodic(7).with_interaction(0.8, 1.3),
        ChainSpec::periodic(2),
        ChainSpec::open(3).with_pinning(1.5, 6),
        ChainSpec::open(4).with_bond(Interaction::Harmonic).with_pinning(0.0, 2),
    ]
}

/// Potential energy only.
fn potential(q: &[f64], spec: &ChainSpec) -> f64 {
    total_energy(
        &State {
            q: q.to_vec(),
            p: vec![0.0; q.len()],
            t: 0.0,
        },
        spec,
    )
}

#[test]
fn forces_match_central_differences() {
    let mut rng = RngStream::new(11);
    let mut checked = 0;
    for spec in specs() {
        for _ in 0..1000 / specs().len() + 1 {
            let s = random_state(&spec, &mut rng, 1.0);
            let f = forces(&s, &spec);
            for i in spec.dynamic_sites() {
                // step tuned for O(h^2) truncation vs rounding at |q| ~ 1
                let h = 1e-5;
                let mut up = s.q.clone();
                let mut dn = s.q.clone();
                up[i] += h;
                dn[i] -= h;
                let fd = -(potential(&up, &spec) - potential(&dn, &spec)) / (2.0 * h);
                let scale = f[i].abs().max(1.0);
                assert!(
                    (f[i] - fd).abs() / scale <= 1e-6,
                    "{spec:?} site {i}: analytic {} vs numeric {fd}",
                    f[i]
                );
            }
            checked += 1;
        }
    }
    assert!(checked >= 1000);
}

fn neumaier(xs: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut c) = (0.0f64, 0.0f64);
    for x in xs {
        let t = sum + x;
        c += if sum.abs() >= x.abs() { (sum - t) + x } else { (x - t) + sum };
        sum = t;
    }
    sum + c
}

/// Energy written out term by term from the lattice definition.
fn energy_oracle(s: &State, spec: &ChainSpec) -> f64 {
    let m = s.q.len();
    let z = spec.z as i32;
    let mut terms = Vec::new();
    for i in 0..m {
        terms.push(s.p[i] * s.p[i] / 2.0);
        terms.push(spec.nu * spec.nu / spec.z as f64 * s.q[i].powi(z));
    }
    let pairs: Vec<(usize, usize)> = match spec.boundary {
        Boundary::Periodic => (0..m).map(|j| (j, (j + 1) % m)).collect(),
        _ => (0..m - 1).map(|j| (j, j + 1)).collect(),
    };
    for (l, r) in pairs {
        let x = s.q[r] - s.q[l];
        terms.push(match spec.interaction {
            Interaction::Toda => spec.a / spec.b * (-spec.b * x).exp(),
            Interaction::Harmonic => spec.a / spec.b - spec.a * x + spec.a * spec.b / 2.0 * x * x,
        });
    }
    neumaier(terms)
}

#[test]
fn energy_matches_compensated_oracle() {
    let mut rng = RngStream::new(12);
    for spec in specs() {
        for _ in 0..200 {
            let s = random_state(&spec, &mut rng, 1.5);
            let e = total_energy(&s, &spec);
            let o = energy_oracle(&s, &spec);
            assert!((e - o).abs() <= 1e-13 * o.abs(), "{spec:?}: {e} vs {o}");
        }
    }
}

#[test]
fn fixed_chain_bond_to_the_wall_counts() {
    // one dynamical site between two walls: two bonds of length +-q
    let spec = ChainSpec::fixed(1);
    let s = State {
        q: vec![0.0, 0.3, 0.0],
        p: vec![0.0, 0.2, 0.0],
        t: 0.0,
    };
    let expected = 0.02 + 0.5 * 0.09 + (-0.3f64).exp() + 0.3f64.exp();
    assert!((total_energy(&s, &spec) - expected).abs() < 1e-15);
}

fn spec_strategy() -> impl Strategy<Value = ChainSpec> {
    (0usize..3, 2usize..9, 0.2f64..2.0, 0.2f64..2.0, 0.0f64..2.0, prop_oneof![Just(2u32), Just(4u32)]).prop_map(
        |(kind, n, a, b, nu, z)| {
            let spec = match kind {
                0 => ChainSpec::fixed(n),
                1 => ChainSpec::periodic(n),
                _ => ChainSpec::open(n),
            };
            spec.with_interaction(a, b).with_pinning(nu, z)
        },
    )
}

proptest! {
    #[test]
    fn reversing_momenta_negates_every_current(spec in spec_strategy(), seed in any::<u64>()) {
        let s = random_state(&spec, &mut RngStream::new(seed), 1.0);
        let r = s.reversed();
        for j in 0..spec.bond_count() {
            let a = local_current(&s, &spec, j).unwrap();
            let b = local_current(&r, &spec, j).unwrap();
            prop_assert_eq!(a, -b);
        }
        prop_assert_eq!(total_current(&s, &spec), -total_current(&r, &spec));
    }

    #[test]
    fn mirror_image_reverses_the_current(n in 2usize..9, seed in any::<u64>()) {
        // q_i -> -q_{M-1-i}, p_i -> -p_{M-1-i} maps bond j onto bond M-2-j
        // with the same stretch and negated momenta, so the current changes sign
        let spec = ChainSpec::open(n);
        let s = random_state(&spec, &mut RngStream::new(seed), 1.0);
        let m = State {
            q: s.q.iter().rev().map(|x| -x).collect(),
            p: s.p.iter().rev().map(|x| -x).collect(),
            t: 0.0,
        };
        for j in 0..spec.bond_count() {
            let a = local_current(&s, &spec, j).unwrap();
            let b = local_current(&m, &spec, spec.bond_count() - 1 - j).unwrap();
            prop_assert!((a + b).abs() <= 1e-14 * a.abs().max(1.0), "{} vs {}", a, b);
        }
    }

    #[test]
    fn bond_forces_cancel_without_walls(spec in spec_strategy(), seed in any::<u64>()) {
        prop_assume!(spec.boundary != Boundary::Fixed);
        let s = random_state(&spec, &mut RngStream::new(seed), 1.0);
        let f = forces(&s, &spec);
        // total force reduces to the pinning part
        let pin: f64 = s.q.iter().map(|q| -spec.nu * spec.nu * q.powi(spec.z as i32 - 1)).sum();
        let total: f64 = f.iter().sum();
        prop_assert!((total - pin).abs() <= 1e-12 * (1.0 + f.iter().map(|x| x.abs()).sum::<f64>()));
    }

    #[test]
    fn frozen_sites_feel_no_force(n in 1usize..9, seed in any::<u64>()) {
        let spec = ChainSpec::fixed(n);
        let s = random_state(&spec, &mut RngStream::new(seed), 1.0);
        let f = forces(&s, &spec);
        prop_assert_eq!(f[0], 0.0);
        prop_assert_eq!(f[n + 1], 0.0);
    }

    #[test]
    fn hc_is_rejected_only_for_walls(spec in spec_strategy(), seed in any::<u64>()) {
        let s = random_state(&spec, &mut RngStream::new(seed), 1.0);
        let h = center_of_mass_invariant(&s, &spec);
        prop_assert_eq!(h.is_err(), spec.boundary == Boundary::Fixed);
    }
}
