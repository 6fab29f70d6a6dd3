use std::sync::Arc;

use nalgebra::DMatrix;

use super::WaveProfile;
use crate::error::Result;
use crate::exprlang::{Expr, SampledFn};
use crate::geometry::MetricSpec;

/// The plane wave `2 dv dt + H(t, x) dt² + Σ (dx^i)²` with
/// `H = Σ A_ij(t) x^i x^j`, on coordinates `(v, t, x1, .., xr)`.
#[derive(Debug, Clone)]
pub struct PlaneWaveMetric {
    pub profile: Arc<WaveProfile>,
    pub metric: MetricSpec,
    /// `H` as an expression; profile entries enter through sampled functions
    /// of `t`.
    pub h: Expr,
}

impl PlaneWaveMetric {
    pub fn r(&self) -> usize {
        self.profile.r()
    }

    /// Hessian `H_ij(t) = A_ij + A_ji`, interpolated.
    pub fn hessian_at(&self, t: f64) -> DMatrix<f64> {
        let a = self.profile.at(t);
        &a + a.transpose()
    }

    /// Hessian at a sample node, without interpolation.
    pub fn hessian_sample(&self, s: usize) -> DMatrix<f64> {
        let a = &self.profile.a[s];
        a + a.transpose()
    }

    /// `ΔH = Σ H_ii = 2 tr A` at a sample node.
    pub fn laplacian_sample(&self, s: usize) -> f64 {
        2.0 * self.profile.a[s].trace()
    }

    /// A point `(v, t, x)` of the chart.
    pub fn point(&self, v: f64, t: f64, x: &[f64]) -> Vec<f64> {
        let mut p = vec![v, t];
        p.extend_from_slice(x);
        p
    }
}

/// Build the limit metric from a profile. Only the symmetric part of `A`
/// enters `H`; mixed-sign pairs therefore drop out.
pub fn assemble_plane_wave(p: &WaveProfile) -> Result<PlaneWaveMetric> {
    let r = p.r();
    let t = Expr::var(1);
    let mut terms: Vec<Expr> = Vec::new();
    for i in 0..r {
        for j in i..r {
            let c: Vec<f64> = if i == j {
                p.entry(i, i)
            } else {
                p.a.iter().map(|a| a[(i, j)] + a[(j, i)]).collect()
            };
            if c.iter().all(|v| *v == 0.0) {
                continue;
            }
            let coeff = if c.iter().all(|v| *v == c[0]) {
                Expr::constant(c[0])
            } else {
                let f = SampledFn::new(format!("A{}{}", i + 1, j + 1), crate::interp::HermiteTable::new(p.ts.clone(), c));
                Expr::sampled(Arc::new(f), t.clone())
            };
            let mono = if i == j {
                Expr::pow(Expr::var(2 + i), 2.0)
            } else {
                Expr::mul(Expr::var(2 + i), Expr::var(2 + j))
            };
            terms.push(Expr::mul(coeff, mono));
        }
    }
    let h = terms.into_iter().reduce(Expr::add).unwrap_or(Expr::constant(0.0));

    let n = r + 2;
    let mut names = vec!["v".to_string(), "t".to_string()];
    names.extend((1..=r).map(|i| format!("x{i}")));
    let mut upper = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in i..n {
            upper.push(match (i, j) {
                (0, 1) => Expr::constant(1.0),
                (1, 1) => h.clone(),
                (i, j) if i == j && i >= 2 => Expr::constant(1.0),
                _ => Expr::constant(0.0),
            });
        }
    }
    let mut base = vec![0.0; n];
    base[1] = p.ts[p.anchor];
    let metric = MetricSpec::from_upper(format!("plane-wave-limit({})", p.provenance.metric), names, upper, base)?;
    Ok(PlaneWaveMetric {
        profile: Arc::new(p.clone()),
        metric,
        h,
    })
}
