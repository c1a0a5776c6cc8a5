//! Integrator properties: convergence order, invariants, reversibility,
//! equilibrium sampling and the ballistic harmonic-crystal reference.

use pinned_toda::chain::{center_of_mass_invariant, total_energy};
use pinned_toda::integrator::{evolve, BathSpec, StepperConfig, Trajectory};
use pinned_toda::ness::{run_ness, NessConfig};
use pinned_toda::{ChainSpec, Interaction, RngStream, State};
use proptest::prelude::*;

fn kicked_open(n: usize) -> (ChainSpec, State) {
    let spec = ChainSpec::open(n);
    let mut s = State::zeros(&spec);
    let mut rng = RngStream::new(3);
    for i in 0..n {
        s.q[i] = rng.uniform(-0.5, 0.5);
        s.p[i] = rng.uniform(-0.5, 0.5);
    }
    (spec, s)
}

fn run(spec: &ChainSpec, s: &State, dt: f64, t: f64) -> State {
    let steps = (t / dt).round() as u64;
    evolve(s.clone(), spec, None, &StepperConfig::deterministic(dt), steps, steps, |_| {}).unwrap()
}

#[test]
fn verlet_is_second_order() {
    let (spec, s) = kicked_open(6);
    let reference = run(&spec, &s, 1e-4, 2.0);
    let err = |dt: f64| {
        let e = run(&spec, &s, dt, 2.0);
        e.q.iter()
            .zip(&reference.q)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    };
    let (e1, e2) = (err(0.02), err(0.01));
    let order = (e1 / e2).log2();
    assert!((order - 2.0).abs() < 0.2, "observed order {order}");
}

#[test]
fn energy_error_shrinks_fourfold_when_dt_halves() {
    let (spec, s) = kicked_open(6);
    let e0 = total_energy(&s, &spec);
    let drift = |dt: f64| {
        let steps = (20.0 / dt) as u64;
        let mut worst = 0.0f64;
        evolve(s.clone(), &spec, None, &StepperConfig::deterministic(dt), steps, 1, |t| {
            worst = worst.max((total_energy(t.state(), &spec) - e0).abs());
        })
        .unwrap();
        worst
    };
    let ratio = drift(0.02) / drift(0.01);
    assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
}

#[test]
fn periodic_ring_keeps_energy_and_hc() {
    let spec = ChainSpec::periodic(12);
    let mut s = State::zeros(&spec);
    s.q[0] = -1.0;
    s.p[1] = 1.0;
    s.q[2] = 1.0;
    let e0 = total_energy(&s, &spec);
    let h0 = center_of_mass_invariant(&s, &spec).unwrap();
    let end = run(&spec, &s, 1e-3, 200.0);
    assert!(((total_energy(&end, &spec) - e0) / e0).abs() < 1e-6);
    assert!((center_of_mass_invariant(&end, &spec).unwrap() - h0).abs() < 1e-6);
}

#[test]
fn quartic_pinning_breaks_hc_but_keeps_energy() {
    let spec = ChainSpec::periodic(12).with_pinning(1.0, 4);
    let mut s = State::zeros(&spec);
    s.q[0] = -1.0;
    s.p[1] = 1.0;
    s.q[2] = 1.0;
    let e0 = total_energy(&s, &spec);
    let h0 = center_of_mass_invariant(&s, &spec).unwrap();
    let end = run(&spec, &s, 1e-3, 200.0);
    assert!(((total_energy(&end, &spec) - e0) / e0).abs() < 1e-6);
    assert!((center_of_mass_invariant(&end, &spec).unwrap() - h0).abs() > 1e-3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn deterministic_steps_are_reversible(seed in any::<u64>(), n in 2usize..8, fixed in any::<bool>()) {
        let spec = if fixed { ChainSpec::fixed(n) } else { ChainSpec::open(n) };
        let mut s = State::zeros(&spec);
        let mut rng = RngStream::new(seed);
        for i in spec.dynamic_sites() {
            s.q[i] = rng.uniform(-0.5, 0.5);
            s.p[i] = rng.uniform(-0.5, 0.5);
        }
        let forward = run(&spec, &s, 1e-3, 5.0);
        let back = run(&spec, &forward.reversed(), 1e-3, 5.0).reversed();
        for (a, b) in back.q.iter().zip(&s.q).chain(back.p.iter().zip(&s.p)) {
            prop_assert!((a - b).abs() <= 1e-10, "{} vs {}", a, b);
        }
    }

    #[test]
    fn walls_stay_at_rest(seed in any::<u64>(), n in 2usize..6) {
        let spec = ChainSpec::fixed(n);
        let baths = BathSpec::at_ends(&spec, 1.0, 3.0, 1.0);
        let mut traj = Trajectory::new(
            spec.clone(),
            State::zeros(&spec),
            Some(&baths),
            &StepperConfig::langevin(0.01, seed),
        ).unwrap();
        traj.evolve(500, 7, |t| {
            let s = t.state();
            assert_eq!([s.q[0], s.p[0], s.q[n + 1], s.p[n + 1]], [0.0; 4]);
        }).unwrap();
    }
}

#[test]
fn equal_reservoirs_give_a_flat_gibbs_profile() {
    // both ends at T: the stationary state is Gibbs, so <p_j^2> = T everywhere
    let mut c = NessConfig::desk(ChainSpec::fixed(6), 1.5, 1.5);
    c.steps_relax = 20_000;
    c.steps_measure = 400_000;
    c.measure_stride = 5;
    let r = run_ness(&c).unwrap();
    for t in &r.temp_profile {
        assert!((t.mean - 1.5).abs() <= 4.0 * t.stderr, "{t:?}");
    }
    assert!(r.j_bulk.mean.abs() <= 4.0 * r.j_bulk.stderr);
}

#[test]
fn harmonic_crystal_current_is_size_independent() {
    // pinned harmonic crystal: the steady current is a property of the
    // reservoir coupling and barely depends on N
    let base = NessConfig::desk(
        ChainSpec::fixed(8).with_bond(Interaction::Harmonic),
        2.0,
        1.0,
    );
    let mut c = base.clone();
    c.steps_relax = 40_000;
    c.steps_measure = 400_000;
    c.measure_stride = 5;
    let j8 = run_ness(&c.with_size(8)).unwrap().j_bulk;
    let j16 = run_ness(&c.with_size(16)).unwrap().j_bulk;
    let tol = 4.0 * j8.stderr.hypot(j16.stderr) + 0.03 * j8.mean;
    assert!((j8.mean - j16.mean).abs() <= tol, "{j8:?} vs {j16:?}");
}
