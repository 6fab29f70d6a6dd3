use std::sync::Arc;

use planewave::geometry::MetricSpec;
use planewave::scenarios;
use planewave::transport::{initial_normal_frame, integrate_geodesic, parallel_transport, GeodesicOptions};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const DRIFT_TOL: f64 = 1e-8;
const REVERSAL_TOL: f64 = 1e-6;

fn suite() -> Vec<(MetricSpec, f64, f64)> {
    // (metric, radius of the initial-point box, parameter length)
    vec![
        (scenarios::sphere(3), 0.5, 3.0),
        (scenarios::hyperbolic(3), 0.3, 1.0),
        (scenarios::surface_of_revolution(), 0.5, 4.0),
        (scenarios::schwarzschild_euclid(), 0.5, 2.0),
        (scenarios::generic4(), 0.3, 1.0),
        (scenarios::generic_split4(), 0.3, 1.0),
        (scenarios::pp_example_ssmm(), 0.5, 2.0),
        (scenarios::minkowski(4), 1.0, 3.0),
    ]
}

#[test]
fn energy_and_frame_drift_stay_small() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for (m, radius, len) in suite() {
        let m = Arc::new(m);
        for _ in 0..6 {
            let (x0, v0) = scenarios::random_unit_data(&m, radius, &mut rng).unwrap();
            let rec = integrate_geodesic(m.clone(), &x0, &v0, &GeodesicOptions::new((0.0, len), 41)).unwrap();
            assert!(rec.horizon.is_none(), "{}: horizon {:?}", m.label(), rec.horizon);
            assert!(rec.energy_drift() < DRIFT_TOL, "{}: energy drift {:e}", m.label(), rec.energy_drift());
            let frame = parallel_transport(&rec, &initial_normal_frame(&m, &x0, &v0).unwrap()).unwrap();
            assert!(frame.gram_drift < DRIFT_TOL, "{}: Gram drift {:e}", m.label(), frame.gram_drift);
            assert!(frame.orthogonality_drift < DRIFT_TOL, "{}: {:e}", m.label(), frame.orthogonality_drift);
        }
    }
}

#[test]
fn reversed_geodesic_retraces_its_path() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for (m, radius, len) in suite() {
        let m = Arc::new(m);
        for _ in 0..4 {
            let (x0, v0) = scenarios::random_unit_data(&m, radius, &mut rng).unwrap();
            let fwd = integrate_geodesic(m.clone(), &x0, &v0, &GeodesicOptions::new((0.0, len), 21)).unwrap();
            let end = fwd.len() - 1;
            let back_v: Vec<f64> = fwd.vs[end].iter().map(|c| -c).collect();
            let back = integrate_geodesic(m.clone(), &fwd.xs[end], &back_v, &GeodesicOptions::new((0.0, len), 21)).unwrap();
            for s in 0..fwd.len() {
                let b = end - s;
                let dx = fwd.xs[s].iter().zip(&back.xs[b]).map(|(a, c)| (a - c).abs()).fold(0.0, f64::max);
                let dv = fwd.vs[s].iter().zip(&back.vs[b]).map(|(a, c)| (a + c).abs()).fold(0.0, f64::max);
                assert!(dx < REVERSAL_TOL && dv < REVERSAL_TOL, "{}: dx {dx:e} dv {dv:e}", m.label());
            }
        }
    }
}

#[test]
fn two_sided_integration_agrees_with_one_sided() {
    let m = Arc::new(scenarios::surface_of_revolution());
    let x0 = [0.7, 0.2];
    let v0 = [0.6, 0.8 / (2.0 + 0.7f64.cos())];
    let centred = integrate_geodesic(m.clone(), &x0, &v0, &GeodesicOptions::new((-2.0, 2.0), 41)).unwrap();
    let a = centred.anchor;
    assert_eq!(centred.ts[a], 0.0);
    let fwd = integrate_geodesic(m, &x0, &v0, &GeodesicOptions::new((0.0, 2.0), 21)).unwrap();
    for (s, x) in fwd.xs.iter().enumerate() {
        let d = x.iter().zip(&centred.xs[a + s]).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        assert!(d < 1e-9, "sample {s}: {d:e}");
    }
}
