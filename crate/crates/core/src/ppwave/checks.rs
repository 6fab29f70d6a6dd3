use nalgebra::DMatrix;

use super::PpWave;
use crate::error::Result;
use crate::geometry::{curvature_at, MetricSpec, Tensor4};
use crate::limit::PlaneWaveMetric;

/// Weyl slots `W(∂_i, ∂_t, ∂_t, ∂_j) = −H_ij/2 + ΔH σ_i δ_ij / (2r)` of a
/// pp-wave, from the transverse Hessian of `H`.
pub fn weyl_slots(hij: &DMatrix<f64>, sigma: &[f64]) -> DMatrix<f64> {
    let r = sigma.len();
    let lap: f64 = (0..r).map(|i| sigma[i] * hij[(i, i)]).sum();
    DMatrix::from_fn(r, r, |i, j| {
        let d = if i == j { sigma[i] * lap / (2.0 * r as f64) } else { 0.0 };
        -hij[(i, j)] / 2.0 + d
    })
}

/// Largest deviation of the computed Christoffel symbols from the pp-wave
/// pattern `Γ^v_tt = H_t/2`, `Γ^v_it = H_i/2`, `Γ^i_tt = −σ_i H_i/2`, all
/// others zero.
pub fn christoffel_residual(pp: &PpWave, x: &[f64]) -> Result<f64> {
    let n = pp.dim();
    let d = pp.h_data(x)?;
    let conn = pp.metric.connection_at(x)?;
    let mut worst: f64 = 0.0;
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let expect = match (k, i.min(j), i.max(j)) {
                    (0, 1, 1) => d.ht / 2.0,
                    (0, 1, m) if m >= 2 => d.grad[m - 2] / 2.0,
                    (k, 1, 1) if k >= 2 => -pp.sigma[k - 2] * d.grad[k - 2] / 2.0,
                    _ => 0.0,
                };
                worst = worst.max((conn.gamma.get(k, i, j) - expect).abs());
            }
        }
    }
    Ok(worst)
}

/// `∇_m Rm` at `x` by central differences of `Rm` in coordinate `m`,
/// corrected by the connection.
fn nabla_rm(metric: &MetricSpec, x: &[f64], m: usize, h: f64) -> Result<Tensor4> {
    let n = metric.dim();
    let mut xp = x.to_vec();
    let mut xm = x.to_vec();
    xp[m] += h;
    xm[m] -= h;
    let (cp, cm, c0) = (curvature_at(metric, &xp)?, curvature_at(metric, &xm)?, curvature_at(metric, x)?);
    let mut out = Tensor4::zeros(n);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let mut s = (cp.rm.get(a, b, c, d) - cm.rm.get(a, b, c, d)) / (2.0 * h);
                    for e in 0..n {
                        s -= c0.gamma.get(e, m, a) * c0.rm.get(e, b, c, d)
                            + c0.gamma.get(e, m, b) * c0.rm.get(a, e, c, d)
                            + c0.gamma.get(e, m, c) * c0.rm.get(a, b, e, d)
                            + c0.gamma.get(e, m, d) * c0.rm.get(a, b, c, e);
                    }
                    out.set(a, b, c, d, s);
                }
            }
        }
    }
    Ok(out)
}

/// Schouten tensor `P = (Ric − scal g / (2(n−1))) / (n−2)`.
fn schouten(metric: &MetricSpec, x: &[f64]) -> Result<DMatrix<f64>> {
    let cp = curvature_at(metric, x)?;
    let n = cp.g.nrows() as f64;
    Ok((&cp.ric - &cp.g * (cp.scal / (2.0 * (n - 1.0)))) / (n - 2.0))
}

/// `max |C_abc|` for the Cotton tensor `C_abc = ∇_c P_ab − ∇_b P_ac` at `x`,
/// with `∂P` by central differences of step `h`. In dimension three this
/// vanishes exactly when the metric is locally conformally flat.
pub fn cotton_residual(metric: &MetricSpec, x: &[f64], h: f64) -> Result<f64> {
    let n = metric.dim();
    let cp = curvature_at(metric, x)?;
    let p0 = schouten(metric, x)?;
    let mut dp = Vec::with_capacity(n);
    for c in 0..n {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[c] += h;
        xm[c] -= h;
        dp.push((schouten(metric, &xp)? - schouten(metric, &xm)?) / (2.0 * h));
    }
    let nabla = |c: usize, a: usize, b: usize| -> f64 {
        let mut s = dp[c][(a, b)];
        for e in 0..n {
            s -= cp.gamma.get(e, c, a) * p0[(e, b)] + cp.gamma.get(e, c, b) * p0[(a, e)];
        }
        s
    };
    let mut worst: f64 = 0.0;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                worst = worst.max((nabla(c, a, b) - nabla(b, a, c)).abs());
            }
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NablaRmReport {
    /// `max |∇_k Rm(∂_i, ∂_t, ∂_t, ∂_j)|` over transverse `k`.
    pub x_slots: f64,
    /// `max |∇_t Rm(∂_i, ∂_t, ∂_t, ∂_j) + ½(Ȧ_ij + Ȧ_ji)|`.
    pub t_slot: f64,
    /// Interior sample times used.
    pub samples: usize,
}

/// Compare `∇Rm` of an assembled limit with the values predicted by its
/// profile: transverse derivative slots vanish and the `t` slot is
/// `−½ dH_ij/dt`. Evaluated at interior sample nodes, at most `max_samples`
/// of them, spread evenly.
pub fn nabla_rm_check(pw: &PlaneWaveMetric, max_samples: usize, h: f64) -> Result<NablaRmReport> {
    let p = &pw.profile;
    let r = p.r();
    let len = p.len();
    if len < 3 {
        return Ok(NablaRmReport {
            x_slots: 0.0,
            t_slot: 0.0,
            samples: 0,
        });
    }
    let stride = ((len - 2) / max_samples.max(1)).max(1);
    let x: Vec<f64> = (0..r).map(|i| 0.3 - 0.2 * i as f64).collect();
    let slopes: Vec<Vec<Vec<f64>>> = (0..r)
        .map(|i| (0..r).map(|j| p.table(i, j).slopes().to_vec()).collect())
        .collect();
    let mut xs: f64 = 0.0;
    let mut ts: f64 = 0.0;
    let mut used = 0;
    for s in (1..len - 1).step_by(stride) {
        let t = p.ts[s];
        let h = h.min(0.25 * (p.ts[s + 1] - t)).min(0.25 * (t - p.ts[s - 1]));
        let pt = pw.point(0.1, t, &x);
        for k in 0..r {
            let d = nabla_rm(&pw.metric, &pt, 2 + k, h)?;
            for i in 0..r {
                for j in 0..r {
                    xs = xs.max(d.get(2 + i, 1, 1, 2 + j).abs());
                }
            }
        }
        let d = nabla_rm(&pw.metric, &pt, 1, h)?;
        for i in 0..r {
            for j in 0..r {
                let expect = -0.5 * (slopes[i][j][s] + slopes[j][i][s]);
                ts = ts.max((d.get(2 + i, 1, 1, 2 + j) - expect).abs());
            }
        }
        used += 1;
    }
    Ok(NablaRmReport {
        x_slots: xs,
        t_slot: ts,
        samples: used,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn christoffels_follow_the_pattern() {
        let pp = PpWave::parse("sin(t)*x1^2 - x1*x2 + t^2*x2", vec![1.0, -1.0], None).unwrap();
        for x in [[0.0, 0.5, 1.0, -2.0], [1.0, -1.0, 0.3, 0.7]] {
            assert!(christoffel_residual(&pp, &x).unwrap() < 1e-12);
        }
    }

    #[test]
    fn cotton_tensor_in_three_dimensions() {
        let quadratic = PpWave::parse("-(1 + 0.5*sin(t))*x1^2", vec![1.0], None).unwrap();
        assert!(cotton_residual(&quadratic.metric, &[0.1, 0.4, 0.7], 1e-4).unwrap() < 1e-6);
        let cubic = PpWave::parse("x1^3", vec![1.0], None).unwrap();
        assert!(cotton_residual(&cubic.metric, &[0.1, 0.4, 0.7], 1e-4).unwrap() > 0.1);
    }

    #[test]
    fn weyl_slot_formula_matches_curvature() {
        let pp = PpWave::parse("cos(t)*x1^2 + 3*x2^2 - x1*x2*t + x3^2", vec![1.0, 1.0, 1.0], None).unwrap();
        let x = [0.2, 0.7, -0.4, 1.1, 0.5];
        let cp = curvature_at(&pp.metric, &x).unwrap();
        let w = cp.weyl().unwrap();
        let formula = weyl_slots(&pp.h_data(&x).unwrap().hess, &pp.sigma);
        for i in 0..3 {
            for j in 0..3 {
                assert!((w.get(2 + i, 1, 1, 2 + j) - formula[(i, j)]).abs() < 1e-12);
            }
        }
    }
}
