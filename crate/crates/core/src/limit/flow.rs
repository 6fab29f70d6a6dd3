use nalgebra::DMatrix;

use super::{wave_profile, WaveProfile};
use crate::error::{Error, Result};
use crate::exprlang::{eval_jet, Expr};
use crate::geometry::{curvature_at, MetricSpec};
use crate::transport::{GeodesicRecord, ParallelFrame};

/// Tolerance on `∇_Z Z = 0` and on `γ′ = Z` along the record.
pub const FLOW_TOL: f64 = 1e-7;

/// `A_Z(t)` along an integral curve of a geodesic unit field `Z`.
#[derive(Debug, Clone)]
pub struct FlowProfile {
    pub ts: Vec<f64>,
    /// `(A_Z)_ij = −g(∇_{E_j} Z, E_i)`.
    pub az: Vec<DMatrix<f64>>,
    /// `d(A_Z)/dt`, from the second covariant derivative of `Z`.
    pub az_dot: Vec<DMatrix<f64>>,
    pub profile: WaveProfile,
    /// `max_t ‖A + dA_Z/dt − A_Z²‖∞`.
    pub residual: f64,
    /// `max_t |∇_Z Z|∞`.
    pub geodesic_residual: f64,
    /// `max_t |γ′ − Z|∞`.
    pub integral_curve_residual: f64,
}

/// Evaluate `A_Z` and the Riccati residual `A + dA_Z/dt − A_Z²` along `rec`.
///
/// `rec` must be an integral curve of `Z` and `Z` must be geodesic there;
/// the frame must be parallel along `rec` and consist of spacelike vectors.
pub fn flow_profile(m: &MetricSpec, z: &[Expr], rec: &GeodesicRecord, frame: &ParallelFrame) -> Result<FlowProfile> {
    let n = m.dim();
    if z.len() != n {
        return Err(Error::InvalidInput(format!("vector field has {} components, metric has dimension {n}", z.len())));
    }
    if frame.eps.iter().any(|e| *e < 0.0) {
        return Err(Error::InvalidInput("flow profile needs a frame of spacelike vectors".into()));
    }
    let profile = wave_profile(rec, frame)?;
    let r = frame.r();
    let mut az = Vec::with_capacity(rec.len());
    let mut az_dot = Vec::with_capacity(rec.len());
    let mut geo: f64 = 0.0;
    let mut integral: f64 = 0.0;
    let mut residual: f64 = 0.0;
    for s in 0..rec.len() {
        let x = &rec.xs[s];
        let v = &rec.vs[s];
        let e = &frame.vectors[s];
        let cp = curvature_at(m, x)?;
        let jets = z.iter().map(|c| eval_jet(c, x)).collect::<std::result::Result<Vec<_>, _>>()?;
        let zv: Vec<f64> = jets.iter().map(|j| j.value).collect();

        // d[k][b] = ∇_b Z^k
        let d = DMatrix::from_fn(n, n, |k, b| {
            jets[k].grad[b] + (0..n).map(|c| cp.gamma.get(k, b, c) * zv[c]).sum::<f64>()
        });
        // dd[a][(k, b)] = ∇_a ∇_b Z^k
        let dd: Vec<DMatrix<f64>> = (0..n)
            .map(|a| {
                DMatrix::from_fn(n, n, |k, b| {
                    let mut s = jets[k].hess(a, b);
                    for c in 0..n {
                        s += cp.dgamma.get(a, k, b, c) * zv[c] + cp.gamma.get(k, b, c) * jets[c].grad[a];
                        s += cp.gamma.get(k, a, c) * d[(c, b)] - cp.gamma.get(c, a, b) * d[(k, c)];
                    }
                    s
                })
            })
            .collect();

        let zz = &d * nalgebra::DVector::from_column_slice(&zv);
        geo = geo.max(zz.amax());
        integral = integral.max(zv.iter().zip(v).fold(0.0, |m, (a, b)| m.max((a - b).abs())));

        let dz_along = |w: &[f64]| -> Vec<f64> { (0..n).map(|k| (0..n).map(|b| d[(k, b)] * w[b]).sum()).collect() };
        let ddz_along = |w: &[f64]| -> Vec<f64> {
            (0..n)
                .map(|k| {
                    let mut s = 0.0;
                    for (a, va) in v.iter().enumerate() {
                        for (b, wb) in w.iter().enumerate() {
                            s += va * wb * dd[a][(k, b)];
                        }
                    }
                    s
                })
                .collect()
        };
        let a_z = DMatrix::from_fn(r, r, |i, j| -cp.inner(&dz_along(&e[j]), &e[i]));
        let a_z_dot = DMatrix::from_fn(r, r, |i, j| -cp.inner(&ddz_along(&e[j]), &e[i]));
        let res = &profile.a[s] + &a_z_dot - &a_z * &a_z;
        residual = residual.max(res.amax());
        az.push(a_z);
        az_dot.push(a_z_dot);
    }
    if geo > FLOW_TOL {
        return Err(Error::InvalidInput(format!("vector field is not geodesic along the curve (|∇_Z Z| = {geo:.2e})")));
    }
    if integral > FLOW_TOL {
        return Err(Error::InvalidInput(format!(
            "geodesic is not an integral curve of the field (|γ′ − Z| = {integral:.2e})"
        )));
    }
    Ok(FlowProfile {
        ts: rec.ts.clone(),
        az,
        az_dot,
        profile,
        residual,
        geodesic_residual: geo,
        integral_curve_residual: integral,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::limit::profile_along;
    use crate::scenarios::{self, parse_on};
    use crate::transport::GeodesicOptions;
    use std::sync::Arc;

    #[test]
    fn radial_field_in_flat_space() {
        let m = scenarios::flat(3);
        let z: Vec<Expr> = ["x1", "x2", "x3"]
            .iter()
            .map(|c| parse_on(&m, &format!("{c} / sqrt(x1^2 + x2^2 + x3^2)")).unwrap())
            .collect();
        let opts = GeodesicOptions::new((1.0, 5.0), 41);
        let run = profile_along(Arc::new(m.clone()), &[1.0, 0.0, 0.0], &[1.0, 0.0, 0.0], &opts).unwrap();
        let fp = flow_profile(&m, &z, &run.record, &run.frame).unwrap();
        for (t, a) in fp.ts.iter().zip(&fp.az) {
            assert!((a + DMatrix::identity(2, 2) / *t).amax() < 1e-10);
        }
        assert!(fp.residual < 1e-10);
    }

    #[test]
    fn meridian_field_on_the_sphere() {
        let m = scenarios::polar_sphere();
        let z = vec![parse_on(&m, "1").unwrap(), parse_on(&m, "0").unwrap()];
        let opts = GeodesicOptions::new((0.3, std::f64::consts::PI - 0.3), 41);
        let run = profile_along(Arc::new(m.clone()), &[0.3, 0.4], &[1.0, 0.0], &opts).unwrap();
        let fp = flow_profile(&m, &z, &run.record, &run.frame).unwrap();
        for (t, a) in fp.ts.iter().zip(&fp.az) {
            assert!((a[(0, 0)] + 1.0 / t.tan()).abs() < 1e-8);
        }
        assert!(fp.residual < 1e-8);
    }

    #[test]
    fn rejects_curve_that_is_not_an_integral_curve() {
        let m = scenarios::flat(2);
        let z = vec![parse_on(&m, "1").unwrap(), parse_on(&m, "0").unwrap()];
        let run = profile_along(Arc::new(m.clone()), &[0.0; 2], &[0.0, 1.0], &GeodesicOptions::new((0.0, 1.0), 5)).unwrap();
        assert!(flow_profile(&m, &z, &run.record, &run.frame).is_err());
    }
}
