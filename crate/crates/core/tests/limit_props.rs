use std::sync::Arc;

use nalgebra::DMatrix;
use planewave::exprlang::{parse_with_names, Expr};
use planewave::geometry::{curvature_at, Tensor4};
use planewave::limit::{
    assemble_plane_wave, flow_profile, frame_change_check, lift_and_limit, profile_along, rosen_to_brinkmann,
    PlaneWaveMetric, RosenData,
};
use planewave::ode;
use planewave::scenarios;
use planewave::transport::GeodesicOptions;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Curvature of `2 dv dt + H dt² + Σ dx²` from the Hessian of `H` alone:
/// `Rm(∂_i, ∂_t, ∂_t, ∂_j) = −½ H_ij` and the components related to it by
/// symmetry, everything else zero.
fn brinkmann_oracle(pw: &PlaneWaveMetric, t: f64) -> Tensor4 {
    let r = pw.r();
    let h = pw.hessian_at(t);
    let mut rm = Tensor4::zeros(r + 2);
    for i in 0..r {
        for j in 0..r {
            let v = -0.5 * h[(i, j)];
            let (a, b) = (2 + i, 2 + j);
            rm.set(a, 1, 1, b, v);
            rm.set(1, a, b, 1, v);
            rm.set(a, 1, b, 1, -v);
            rm.set(1, a, 1, b, -v);
        }
    }
    rm
}

#[test]
fn assembled_sphere_limit_matches_the_hessian_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for n in [2, 3] {
        let (x0, v0) = scenarios::random_sphere_geodesic(n, &mut rng);
        let run = profile_along(Arc::new(scenarios::sphere(n)), &x0, &v0, &GeodesicOptions::new((0.0, 10.0), 201)).unwrap();
        let pw = assemble_plane_wave(&run.profile).unwrap();
        for _ in 0..50 {
            let t = rng.gen_range(0.0..10.0);
            let x: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let p = pw.point(rng.gen_range(-2.0..2.0), t, &x);
            let cp = curvature_at(&pw.metric, &p).unwrap();
            let oracle = brinkmann_oracle(&pw, t);
            let mut d: f64 = 0.0;
            for (idx, v) in oracle.iter() {
                d = d.max((cp.rm.get(idx[0], idx[1], idx[2], idx[3]) - v).abs());
            }
            assert!(d < 1e-9, "n = {n}, point {p:?}: {d:e}");
            let lap: f64 = pw.hessian_at(t).trace();
            let mut want = DMatrix::zeros(n + 1, n + 1);
            want[(1, 1)] = -0.5 * lap;
            assert!((&cp.ric - want).amax() < 1e-9);
            // −½ΔH = (n − 1) for the unit sphere.
            assert!((cp.ric[(1, 1)] - (n as f64 - 1.0)).abs() < 1e-7);
        }
    }
}

#[test]
fn trace_identity_on_generic_metrics() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for m in [scenarios::generic4(), scenarios::generic_split4()] {
        let m = Arc::new(m);
        for _ in 0..4 {
            let (x0, v0) = scenarios::random_unit_data(&m, 0.3, &mut rng).unwrap();
            let run = profile_along(m.clone(), &x0, &v0, &GeodesicOptions::new((0.0, 0.8), 17)).unwrap();
            assert!(run.profile.trace_residual() < 1e-9, "{}", m.label());
            assert!(run.profile.symmetry_residual() < 1e-9, "{}", m.label());
        }
    }
}

#[test]
fn affine_reparametrisation_scales_the_profile() {
    // γ_c(t) = γ(ct) has A_c(t) = c² A(ct).
    let m = Arc::new(scenarios::surface_of_revolution());
    let x0 = [0.4, 0.0];
    let v0 = [0.8, 0.6 / (2.0 + 0.4f64.cos())];
    let c = 2.0;
    let one = profile_along(m.clone(), &x0, &v0, &GeodesicOptions::new((0.0, 4.0), 81)).unwrap().profile;
    let vc: Vec<f64> = v0.iter().map(|x| c * x).collect();
    let two = profile_along(m, &x0, &vc, &GeodesicOptions::new((0.0, 2.0), 81)).unwrap().profile;
    for (t, a) in two.ts.iter().zip(&two.a) {
        let d = (a - one.at(c * t) * (c * c)).amax();
        assert!(d < 1e-6, "t = {t}: {d:e}");
    }
}

#[test]
fn frame_rotation_conjugates_the_profile() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    let m = Arc::new(scenarios::generic4());
    let (x0, v0) = scenarios::random_unit_data(&m, 0.3, &mut rng).unwrap();
    let run = profile_along(m, &x0, &v0, &GeodesicOptions::new((0.0, 1.0), 21)).unwrap();
    let (c, s) = (0.6f64, 0.8f64);
    let k = DMatrix::from_row_slice(3, 3, &[c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0]);
    let fc = frame_change_check(&run.record, &run.frame, &run.profile, &k, 1e-9).unwrap();
    assert!(fc.holds, "{:e}", fc.residual);
}

#[test]
fn lift_reproduces_the_direct_profile() {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let (x0, v0) = scenarios::random_sphere_geodesic(2, &mut rng);
    let sor_v0 = [0.6, 0.8 / (2.0 + 0.5f64.cos())];
    let cases = [
        (scenarios::sphere(2), x0, v0),
        (scenarios::surface_of_revolution(), vec![0.5, 0.0], sor_v0.to_vec()),
    ];
    for (m, x0, v0) in cases {
        let run = profile_along(Arc::new(m.clone()), &x0, &v0, &GeodesicOptions::new((0.0, 6.0), 121)).unwrap();
        let lifted = lift_and_limit(&m, &run.record, &run.frame.initial(run.record.anchor)).unwrap();
        let d = lifted.a.iter().zip(&run.profile.a).map(|(a, b)| (a - b).amax()).fold(0.0, f64::max);
        assert!(d < 1e-6, "{}: {d:e}", m.label());
        assert!(run.profile.max_abs() > 0.1);
    }
}

fn rosen(rows: &[&[&str]]) -> RosenData {
    let rows: Vec<Vec<String>> = rows.iter().map(|r| r.iter().map(|s| s.to_string()).collect()).collect();
    RosenData::parse(&rows).unwrap()
}

#[test]
fn rosen_cos_squared() {
    let out = rosen_to_brinkmann(&rosen(&[&["cos(t)^2"]]), (-1.4, 1.4), 57, &DMatrix::identity(1, 1), &ode::Options::default())
        .unwrap();
    for ((t, a), f) in out.profile.ts.iter().zip(&out.profile.a).zip(&out.f) {
        assert!((a[(0, 0)] + 1.0).abs() < 1e-6, "t = {t}");
        assert!((f[(0, 0)] * t.cos() - 1.0).abs() < 1e-6, "t = {t}");
    }
}

#[test]
fn rosen_matches_the_surface_meridian() {
    // Along the meridian θ = 0 from r₀, ∂θ is a Jacobi field of length
    // 2 + cos(t + r₀), so g(t) = (2 + cos(t + r₀))² is Rosen data for it.
    let r0 = 0.5;
    let run = profile_along(
        Arc::new(scenarios::surface_of_revolution()),
        &[r0, 0.0],
        &[1.0, 0.0],
        &GeodesicOptions::new((0.0, 6.0), 121),
    )
    .unwrap();
    let data = rosen(&[&["(2 + cos(t + 0.5))^2"]]);
    let f0 = DMatrix::from_element(1, 1, 1.0 / (2.0 + r0.cos()));
    let out = rosen_to_brinkmann(&data, (0.0, 6.0), 121, &f0, &ode::Options::default()).unwrap();
    for ((t, a), b) in out.profile.ts.iter().zip(&out.profile.a).zip(&run.profile.a) {
        let k = (t + r0).cos() / (2.0 + (t + r0).cos());
        assert!((a[(0, 0)] - b[(0, 0)]).abs() < 1e-5, "t = {t}");
        assert!((b[(0, 0)] + k).abs() < 1e-8, "t = {t}");
    }
}

#[test]
fn radial_field_riccati_identity() {
    let m = scenarios::flat(3);
    let z: Vec<Expr> = m
        .names()
        .iter()
        .map(|c| parse_with_names(&format!("{c} / sqrt(x1^2 + x2^2 + x3^2)"), m.names()).unwrap())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(45);
    for _ in 0..5 {
        // Start on the unit sphere, moving outward.
        let mut u: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let nu = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        u.iter_mut().for_each(|x| *x /= nu);
        let opts = GeodesicOptions::new((1.0, 5.0), 81);
        let run = profile_along(Arc::new(m.clone()), &u, &u, &opts).unwrap();
        let fp = flow_profile(&m, &z, &run.record, &run.frame).unwrap();
        assert!(fp.residual < 1e-5, "{:e}", fp.residual);
        for (t, a) in fp.ts.iter().zip(&fp.az) {
            assert!((a + DMatrix::identity(2, 2) / *t).amax() < 1e-8);
        }
    }
}
