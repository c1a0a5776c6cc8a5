//! Calibration of the box-counting estimator on synthetic sets of known dimension.

use pinned_toda::poincare::box_count_dimension;
use pinned_toda::RngStream;

const N: usize = 10_000;

fn segment(rng: &mut RngStream) -> Vec<[f64; 2]> {
    (0..N)
        .map(|_| {
            let s = rng.uniform(0.0, 1.0);
            [0.3 + 2.0 * s, -1.0 + 0.7 * s]
        })
        .collect()
}

fn disk(rng: &mut RngStream) -> Vec<[f64; 2]> {
    let mut pts = Vec::with_capacity(N);
    while pts.len() < N {
        let (x, y) = (rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
        if x * x + y * y <= 1.0 {
            pts.push([x, y]);
        }
    }
    pts
}

fn circle(rng: &mut RngStream) -> Vec<[f64; 2]> {
    (0..N)
        .map(|_| {
            let a = rng.uniform(0.0, 2.0 * std::f64::consts::PI);
            [a.cos(), a.sin()]
        })
        .collect()
}

#[test]
fn segment_is_one_dimensional() {
    let d = box_count_dimension(&segment(&mut RngStream::new(1))).unwrap();
    assert!((0.9..=1.1).contains(&d.dimension), "{d:?}");
}

#[test]
fn disk_is_two_dimensional() {
    let d = box_count_dimension(&disk(&mut RngStream::new(2))).unwrap();
    assert!((1.8..=2.1).contains(&d.dimension), "{d:?}");
}

#[test]
fn circle_is_one_dimensional() {
    let d = box_count_dimension(&circle(&mut RngStream::new(3))).unwrap();
    assert!((0.9..=1.1).contains(&d.dimension), "{d:?}");
}
