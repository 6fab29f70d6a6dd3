use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::interp::{locate, HermiteTable};
use crate::limit::WaveProfile;

/// A continuous piecewise-linear field in frame components.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    pub knots: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl PiecewiseLinear {
    pub fn new(knots: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        if knots.len() < 2 || knots.len() != values.len() || knots.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("piecewise-linear field needs increasing knots, one value each".into()));
        }
        let r = values[0].len();
        if values.iter().any(|v| v.len() != r) {
            return Err(Error::InvalidInput("field values have inconsistent length".into()));
        }
        Ok(Self { knots, values })
    }

    pub fn r(&self) -> usize {
        self.values[0].len()
    }

    /// Value and slope at `t`, inside knot interval `k`.
    fn eval_in(&self, k: usize, t: f64) -> (Vec<f64>, Vec<f64>) {
        let (t0, t1) = (self.knots[k], self.knots[k + 1]);
        let s = (t - t0) / (t1 - t0);
        let (a, b) = (&self.values[k], &self.values[k + 1]);
        let v = a.iter().zip(b).map(|(x, y)| x + s * (y - x)).collect();
        let d = a.iter().zip(b).map(|(x, y)| (y - x) / (t1 - t0)).collect();
        (v, d)
    }

    fn masked(&self, keep: impl Fn(usize) -> bool) -> Self {
        Self {
            knots: self.knots.clone(),
            values: self
                .values
                .iter()
                .map(|v| v.iter().enumerate().map(|(i, x)| if keep(i) { *x } else { 0.0 }).collect())
                .collect(),
        }
    }
}

/// `(V_t, V_s)`: the timelike and spacelike parts of a field.
pub fn split_fields(p: &WaveProfile, v: &PiecewiseLinear) -> (PiecewiseLinear, PiecewiseLinear) {
    (v.masked(|i| p.eps[i] < 0.0), v.masked(|i| p.eps[i] > 0.0))
}

/// Gauss–Legendre nodes and weights on `[−1, 1]` (Golub–Welsch).
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let jac = DMatrix::from_fn(n, n, |i, j| {
        if i + 1 == j || j + 1 == i {
            let k = i.max(j) as f64;
            k / (4.0 * k * k - 1.0).sqrt()
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(jac);
    let mut out: Vec<(f64, f64)> = (0..n)
        .map(|i| (eig.eigenvalues[i], 2.0 * eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

const NODES: usize = 8;

/// `I(V, W) = ∫ Σ ε_i V̇^i Ẇ^i − Σ V^i W^j Rm(E_i, γ′, γ′, E_j) dt` over the
/// common knot range, by Gauss–Legendre quadrature on every piece between
/// field knots and profile samples.
pub fn index_form(p: &WaveProfile, v: &PiecewiseLinear, w: &PiecewiseLinear) -> Result<f64> {
    let r = p.r();
    if v.r() != r || w.r() != r {
        return Err(Error::InvalidInput(format!("fields must have {r} components")));
    }
    if v.knots != w.knots {
        return Err(Error::InvalidInput("fields must share their knots".into()));
    }
    let (a, b) = (v.knots[0], *v.knots.last().unwrap());
    let (lo, hi) = p.domain();
    let slack = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
    if a < lo - slack || b > hi + slack {
        return Err(Error::InvalidInput(format!("fields leave the profile domain [{lo}, {hi}]")));
    }
    // Rm(E_i, γ′, γ′, E_j) = −ε_i A_ij.
    let tables: Vec<HermiteTable> = (0..r * r)
        .map(|k| {
            let (i, j) = (k / r, k % r);
            HermiteTable::new(p.ts.clone(), p.a.iter().map(|m| -p.eps[i] * m[(i, j)]).collect())
        })
        .collect();
    let mut cuts: Vec<f64> = v.knots.clone();
    cuts.extend(p.ts.iter().copied().filter(|t| *t > a && *t < b));
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|x, y| (*x - *y).abs() < 1e-14);
    let gl = gauss_legendre(NODES);
    let mut total = 0.0;
    for piece in cuts.windows(2) {
        let (t0, t1) = (piece[0], piece[1]);
        let k = locate(&v.knots, 0.5 * (t0 + t1));
        let half = 0.5 * (t1 - t0);
        for (x, wt) in &gl {
            let t = t0 + half * (x + 1.0);
            let (vv, vd) = v.eval_in(k, t);
            let (ww, wd) = w.eval_in(k, t);
            let mut f = 0.0;
            for i in 0..r {
                f += p.eps[i] * vd[i] * wd[i];
                for j in 0..r {
                    f -= vv[i] * ww[j] * tables[i * r + j].value(t);
                }
            }
            total += wt * half * f;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadrature_integrates_degree_fifteen() {
        let gl = gauss_legendre(NODES);
        let sum: f64 = gl.iter().map(|(x, w)| w * x.powi(14)).sum();
        assert!((sum - 2.0 / 15.0).abs() < 1e-14);
        let odd: f64 = gl.iter().map(|(x, w)| w * x.powi(15)).sum();
        assert!(odd.abs() < 1e-14);
    }
}
