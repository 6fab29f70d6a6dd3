//! Jacobi fields of the assembled limit, integrated in full `(v, t, x)`
//! coordinates from the linearised geodesic equation
//!
//! ```text
//! J̈^a + ∂_d Γ^a_bc ẋ^b ẋ^c J^d + 2 Γ^a_bc ẋ^b J̇^c = 0.
//! ```

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::scan::{self, ConjugatePoint, ScanOptions};
use super::{BaseJacobi, ConjugateReport, JacobiSystem, INDEPENDENCE_TOL};
use crate::error::{Error, Result};
use crate::geometry::{curvature_at, CurvaturePoint};
use crate::limit::PlaneWaveMetric;
use crate::ode;
use crate::ppwave::{integrate_pp_geodesic, PpWave};
use crate::transport::{GeodesicOptions, GeodesicRecord};

/// Residual bound for a supplied field to count as a Jacobi field.
pub const JACOBI_TOL: f64 = 1e-6;

/// `(P, Q)` with `J̈ = P J + Q J̇` along a curve with velocity `xd`.
fn coefficients(cp: &CurvaturePoint, xd: &[f64]) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = xd.len();
    let mut p = DMatrix::zeros(n, n);
    let mut q = DMatrix::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            if xd[b] == 0.0 {
                continue;
            }
            for c in 0..n {
                q[(a, c)] -= 2.0 * cp.gamma.get(a, b, c) * xd[b];
                if xd[c] == 0.0 {
                    continue;
                }
                for d in 0..n {
                    p[(a, d)] -= cp.dgamma.get(d, a, b, c) * xd[b] * xd[c];
                }
            }
        }
    }
    (p, q)
}

/// The timelike geodesic `x = 0`, `t(s) = s`, `v(s) = −s/2` of the limit.
fn axis_point(s: f64, r: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; r + 2];
    x[0] = -0.5 * s;
    x[1] = s;
    let mut xd = vec![0.0; r + 2];
    xd[0] = -0.5;
    xd[1] = 1.0;
    (x, xd)
}

fn check_inside(pw: &PlaneWaveMetric, span: (f64, f64)) -> Result<()> {
    let (lo, hi) = pw.profile.domain();
    let slack = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
    if !(span.1 > span.0) || span.0 < lo - slack || span.1 > hi + slack {
        return Err(Error::InvalidInput(format!(
            "interval ({}, {}) is not inside the profile domain [{lo}, {hi}]",
            span.0, span.1
        )));
    }
    Ok(())
}

/// Index of the axis geodesic on an interval, counted with multiplicity
/// from the full-coordinate fundamental matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitIndex {
    pub span: (f64, f64),
    pub points: Vec<ConjugatePoint>,
    pub index: usize,
}

pub fn limit_morse_index(pw: &PlaneWaveMetric, span: (f64, f64), opts: &ScanOptions) -> Result<LimitIndex> {
    check_inside(pw, span)?;
    let r = pw.r();
    let coeff = |s: f64| -> Result<(DMatrix<f64>, Option<DMatrix<f64>>)> {
        let (x, xd) = axis_point(s, r);
        let cp = curvature_at(&pw.metric, &x)?;
        let (p, q) = coefficients(&cp, &xd);
        Ok((p, Some(q)))
    };
    let s = scan::scan(r + 2, coeff, span, opts)?;
    Ok(LimitIndex {
        span,
        index: s.points.iter().map(|p| p.multiplicity).sum(),
        points: s.points,
    })
}

/// A limit Jacobi field in full coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitJacobi {
    pub ts: Vec<f64>,
    pub j: Vec<Vec<f64>>,
    pub jd: Vec<Vec<f64>>,
    pub jdd: Vec<Vec<f64>>,
}

/// Jacobi field along the axis geodesic with `J̃(a) = 0`, `J̃′(a) = c`
/// (`c` in full coordinates).
pub fn limit_jacobi_field(
    pw: &PlaneWaveMetric,
    span: (f64, f64),
    samples: usize,
    c: &[f64],
    opts: &ode::Options,
) -> Result<LimitJacobi> {
    check_inside(pw, span)?;
    let n = pw.r() + 2;
    if c.len() != n {
        return Err(Error::InvalidInput(format!("initial derivative must have {n} components")));
    }
    let rhs = |s: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
        let (x, xd) = axis_point(s, n - 2);
        let cp = curvature_at(&pw.metric, &x)?;
        let (p, q) = coefficients(&cp, &xd);
        dy[..n].copy_from_slice(&y[n..]);
        for a in 0..n {
            dy[n + a] = (0..n).map(|d| p[(a, d)] * y[d] + q[(a, d)] * y[n + d]).sum();
        }
        Ok(())
    };
    let (grid, _) = ode::grid_with_anchor(span.0, span.1, samples, span.0);
    let mut y0 = vec![0.0; n];
    y0.extend_from_slice(c);
    let out = ode::integrate(rhs, &grid, &y0, opts)?;
    Ok(LimitJacobi {
        j: out.ys.iter().map(|y| y[..n].to_vec()).collect(),
        jd: out.ys.iter().map(|y| y[n..].to_vec()).collect(),
        jdd: out.dys.iter().map(|d| d[n..].to_vec()).collect(),
        ts: out.ts,
    })
}

/// A timelike unit-speed geodesic of the limit with `t(s) = s`.
#[derive(Debug, Clone)]
pub struct LimitGeodesic {
    pub record: GeodesicRecord,
    /// `d³x^i/ds³ = ½ (H_it + Σ_k H_ik ẋ^k)`.
    pub jerk: Vec<Vec<f64>>,
}

/// The limit geodesic through `(0, s₀, x0)` with transverse velocity `xd0`,
/// `s₀` being the anchor of `opts`; `v̇` is chosen to make it unit timelike.
pub fn timelike_limit_geodesic(
    pw: &PlaneWaveMetric,
    x0: &[f64],
    xd0: &[f64],
    opts: &GeodesicOptions,
) -> Result<LimitGeodesic> {
    let r = pw.r();
    if x0.len() != r || xd0.len() != r {
        return Err(Error::InvalidInput(format!("transverse data must have {r} components")));
    }
    check_inside(pw, opts.span)?;
    let s0 = opts.anchor();
    let pp = PpWave::from_plane_wave(pw);
    let start = pw.point(0.0, s0, x0);
    let h = pp.h_data(&start)?.value;
    let speed: f64 = xd0.iter().map(|v| v * v).sum();
    let mut v0 = vec![0.5 * (-1.0 - h - speed), 1.0];
    v0.extend_from_slice(xd0);
    let record = integrate_pp_geodesic(&pp, &start, &v0, opts)?;
    let mut jerk = Vec::with_capacity(record.len());
    for ((s, x), v) in record.ts.iter().zip(&record.xs).zip(&record.vs) {
        let hs = pw.hessian_at(*s);
        let d = pw.profile.derivative_at(*s);
        let dhs = &d + d.transpose();
        jerk.push(
            (0..r)
                .map(|i| 0.5 * (0..r).map(|k| dhs[(i, k)] * x[2 + k] + hs[(i, k)] * v[2 + k]).sum::<f64>())
                .collect(),
        );
    }
    Ok(LimitGeodesic { record, jerk })
}

/// Lift a base field to `J̃ = (−Σ J^i ẋ^i, 0, J)` along a limit geodesic,
/// with derivatives.
pub fn lift_field(g: &LimitGeodesic, base: &BaseJacobi) -> Result<LimitJacobi> {
    let rec = &g.record;
    if rec.ts.len() != base.ts.len() || rec.ts.iter().zip(&base.ts).any(|(a, b)| (a - b).abs() > 1e-12) {
        return Err(Error::InvalidInput("limit geodesic and base field are sampled differently".into()));
    }
    let r = base.j.first().map_or(0, Vec::len);
    let mut out = LimitJacobi {
        ts: base.ts.clone(),
        j: Vec::new(),
        jd: Vec::new(),
        jdd: Vec::new(),
    };
    for s in 0..base.ts.len() {
        let (j, jd, jdd) = (&base.j[s], &base.jd[s], &base.jdd[s]);
        let xd = &rec.vs[s][2..];
        let xdd = &rec.accs[s][2..];
        let x3 = &g.jerk[s];
        let mut v = 0.0;
        let mut vd = 0.0;
        let mut vdd = 0.0;
        for i in 0..r {
            v -= j[i] * xd[i];
            vd -= jd[i] * xd[i] + j[i] * xdd[i];
            vdd -= jdd[i] * xd[i] + 2.0 * jd[i] * xdd[i] + j[i] * x3[i];
        }
        let stack = |head: f64, tail: &[f64]| {
            let mut w = vec![head, 0.0];
            w.extend_from_slice(tail);
            w
        };
        out.j.push(stack(v, j));
        out.jd.push(stack(vd, jd));
        out.jdd.push(stack(vdd, jdd));
    }
    Ok(out)
}

/// Largest residual of the full-coordinate Jacobi equation along a limit
/// geodesic.
pub fn limit_jacobi_residual(pw: &PlaneWaveMetric, g: &LimitGeodesic, f: &LimitJacobi) -> Result<f64> {
    let n = pw.r() + 2;
    let mut worst: f64 = 0.0;
    for s in 0..f.ts.len() {
        let cp = curvature_at(&pw.metric, &g.record.xs[s])?;
        let (p, q) = coefficients(&cp, &g.record.vs[s]);
        for a in 0..n {
            let rhs: f64 = (0..n).map(|d| p[(a, d)] * f.j[s][d] + q[(a, d)] * f.jd[s][d]).sum();
            worst = worst.max((f.jdd[s][a] - rhs).abs());
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrespondenceReport {
    /// Residual of the supplied base field.
    pub base_residual: f64,
    /// Residual of the lifted field in the limit Jacobi equation.
    pub forward_residual: f64,
    /// Residuals of the timelike and spacelike parts of the limit field with
    /// the same initial data, in the base equation.
    pub timelike_residual: f64,
    pub spacelike_residual: f64,
    /// `max |J̃^x − J|` between the limit field and the base field.
    pub agreement: f64,
}

impl CorrespondenceReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.forward_residual < tol && self.timelike_residual < tol && self.spacelike_residual < tol && self.agreement < tol
    }
}

/// Check the correspondence between base and limit Jacobi fields in both
/// directions. The base field must vanish at its first sample. `g` is the
/// limit geodesic the field is lifted along; `None` takes the axis.
pub fn correspondence_check(
    pw: &PlaneWaveMetric,
    base: &BaseJacobi,
    transverse: Option<(&[f64], &[f64])>,
) -> Result<CorrespondenceReport> {
    let p = &pw.profile;
    let r = p.r();
    let sys = JacobiSystem::new(p, INDEPENDENCE_TOL)?;
    let base_residual = sys.residual(base);
    if !(base_residual < JACOBI_TOL) {
        return Err(Error::InvalidInput(format!(
            "supplied field is not a Jacobi field of the base system (residual {base_residual:.3e})"
        )));
    }
    if base.ts.len() < 2 {
        return Err(Error::InvalidInput("base field needs at least two samples".into()));
    }
    let span = (base.ts[0], *base.ts.last().unwrap());
    let zero = vec![0.0; r];
    let (x0, xd0) = transverse.unwrap_or((&zero, &zero));
    let mut opts = GeodesicOptions::new(span, base.ts.len());
    opts.ode = ode::Options::with_tol(1e-12);
    let g = timelike_limit_geodesic(pw, x0, xd0, &opts)?;
    let lifted = lift_field(&g, base)?;
    let forward_residual = limit_jacobi_residual(pw, &g, &lifted)?;

    // Backward: limit field on the axis with J̃(a) = 0, J̃′(a) = (0, 0, J′(a)).
    let mut c = vec![0.0, 0.0];
    c.extend_from_slice(&base.jd[0]);
    let lim = limit_jacobi_field(pw, span, base.ts.len(), &c, &ode::Options::with_tol(1e-12))?;
    let part = |timelike: bool| -> BaseJacobi {
        let keep = |w: &Vec<f64>| -> Vec<f64> {
            (0..r)
                .map(|i| if (p.eps[i] < 0.0) == timelike { w[2 + i] } else { 0.0 })
                .collect()
        };
        BaseJacobi {
            ts: lim.ts.clone(),
            j: lim.j.iter().map(keep).collect(),
            jd: lim.jd.iter().map(keep).collect(),
            jdd: lim.jdd.iter().map(keep).collect(),
        }
    };
    let timelike_residual = sys.residual(&part(true));
    let spacelike_residual = sys.residual(&part(false));
    let mut agreement: f64 = 0.0;
    for (a, b) in lim.j.iter().zip(&base.j) {
        for i in 0..r {
            agreement = agreement.max((a[2 + i] - b[i]).abs());
        }
    }
    Ok(CorrespondenceReport {
        base_residual,
        forward_residual,
        timelike_residual,
        spacelike_residual,
        agreement,
    })
}

impl ConjugateReport {
    /// Attach `2 · Ind(γ̃)` from the limit side.
    pub fn with_index(mut self, limit: &LimitIndex) -> Self {
        self.index_bound = Some(2 * limit.index);
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::limit::{assemble_plane_wave, profile_along};
    use crate::scenarios;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn ssmm_limit(span: f64) -> PlaneWaveMetric {
        let m = Arc::new(scenarios::pp_example_ssmm());
        let run = profile_along(m, &[0.0; 4], &[0.0, 1.0, 0.0, 0.0], &GeodesicOptions::new((0.0, span), 101)).unwrap();
        assemble_plane_wave(&run.profile).unwrap()
    }

    #[test]
    fn axis_index_matches_base_points() {
        let pw = ssmm_limit(2.5 * PI);
        let li = limit_morse_index(&pw, (0.0, 2.5 * PI), &ScanOptions::default()).unwrap();
        assert_eq!(li.index, 4);
        for (k, p) in li.points.iter().enumerate() {
            assert!((p.t - (k + 1) as f64 * PI).abs() < 1e-6);
        }
    }

    #[test]
    fn sine_field_corresponds() {
        let pw = ssmm_limit(4.0);
        let ts: Vec<f64> = (0..41).map(|i| i as f64 * 0.1).collect();
        let base = BaseJacobi::from_fn(ts, |t| [vec![t.sin(), 0.0], vec![t.cos(), 0.0], vec![-t.sin(), 0.0]]);
        let axis = correspondence_check(&pw, &base, None).unwrap();
        assert!(axis.holds(1e-6), "{axis:?}");
        let off = correspondence_check(&pw, &base, Some((&[0.3, -0.2], &[0.1, 0.4]))).unwrap();
        assert!(off.forward_residual < 1e-6, "{off:?}");
    }

    #[test]
    fn non_jacobi_input_is_rejected() {
        let pw = ssmm_limit(2.0);
        let ts: Vec<f64> = (0..21).map(|i| i as f64 * 0.1).collect();
        let base = BaseJacobi::from_fn(ts, |t| [vec![t, 0.0], vec![1.0, 0.0], vec![0.0, 0.0]]);
        assert!(correspondence_check(&pw, &base, None).is_err());
    }
}
