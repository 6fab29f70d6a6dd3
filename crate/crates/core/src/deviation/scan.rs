//! Conjugate-point search on a linear second-order matrix system
//! `Φ″ = P(t) Φ + Q(t) Φ′`, `Φ(a) = 0`, `Φ′(a) = I`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode;

#[derive(Debug, Clone, Copy)]
pub struct ScanOptions {
    /// Spacing of the sampling grid.
    pub step: f64,
    /// A singular value below `threshold · σ_max([Φ; Φ′])` counts as zero.
    pub threshold: f64,
    /// Width of the bracket at which refinement stops.
    pub t_tol: f64,
    pub ode: ode::Options,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            step: 5e-3,
            threshold: 1e-7,
            t_tol: 1e-9,
            ode: ode::Options::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConjugatePoint {
    pub t: f64,
    pub multiplicity: usize,
    /// `σ_min(Φ) / σ_max([Φ; Φ′])` at `t`.
    pub rho: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct Scan {
    pub points: Vec<ConjugatePoint>,
    /// `(t, ρ(t))` on the sampling grid.
    pub curve: Vec<(f64, f64)>,
}

/// Ascending singular values of `Φ`, each divided by `σ_max([Φ; Φ′])`.
fn normalised_singular_values(y: &[f64], dim: usize) -> Vec<f64> {
    let phi = DMatrix::from_column_slice(dim, dim, &y[..dim * dim]);
    let stacked = DMatrix::from_fn(2 * dim, dim, |i, j| {
        if i < dim {
            phi[(i, j)]
        } else {
            y[dim * dim + j * dim + (i - dim)]
        }
    });
    let top = stacked
        .singular_values()
        .iter()
        .fold(0.0_f64, |m, s| m.max(*s));
    let mut sv: Vec<f64> = phi.singular_values().iter().map(|s| s / top).collect();
    sv.sort_by(f64::total_cmp);
    sv
}

const INVPHI: f64 = 0.618_033_988_749_894_8;

pub(crate) fn scan<F>(dim: usize, coeff: F, span: (f64, f64), opts: &ScanOptions) -> Result<Scan>
where
    F: Fn(f64) -> Result<(DMatrix<f64>, Option<DMatrix<f64>>)>,
{
    let (a, b) = span;
    if !(b > a) {
        return Err(Error::InvalidInput(format!("empty interval ({a}, {b})")));
    }
    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
        let (p, q) = coeff(t)?;
        let phi = DMatrix::from_column_slice(dim, dim, &y[..dim * dim]);
        let dphi = DMatrix::from_column_slice(dim, dim, &y[dim * dim..]);
        let mut acc = &p * &phi;
        if let Some(q) = q {
            acc += &q * &dphi;
        }
        dy[..dim * dim].copy_from_slice(dphi.as_slice());
        dy[dim * dim..].copy_from_slice(acc.as_slice());
        Ok(())
    };
    let samples = ((b - a) / opts.step).ceil() as usize + 1;
    let grid: Vec<f64> = (0..samples)
        .map(|i| if i + 1 == samples { b } else { a + (b - a) * i as f64 / (samples - 1) as f64 })
        .collect();
    let mut y0 = vec![0.0; 2 * dim * dim];
    for i in 0..dim {
        y0[dim * dim + i * dim + i] = 1.0;
    }
    let out = ode::integrate(rhs, &grid, &y0, &opts.ode)?;
    if !out.termination.is_complete() {
        return Err(Error::Integration {
            t: *out.ts.last().unwrap_or(&a),
            detail: format!("fundamental matrix integration stopped: {:?}", out.termination),
        });
    }
    let svs: Vec<Vec<f64>> = out.ys.iter().map(|y| normalised_singular_values(y, dim)).collect();
    let curve = out.ts.iter().zip(&svs).map(|(t, s)| (*t, s[0])).collect();

    let value_at = |i: usize, t: f64| -> Result<Vec<f64>> {
        if t == out.ts[i] {
            return Ok(svs[i].clone());
        }
        let o = ode::integrate(rhs, &[out.ts[i], t], &out.ys[i], &opts.ode)?;
        Ok(normalised_singular_values(o.ys.last().unwrap(), dim))
    };

    let mut found: Vec<ConjugatePoint> = Vec::new();
    let h = (b - a) / (samples - 1) as f64;
    for k in 0..dim {
        for i in 1..svs.len() - 1 {
            let (l, c, r) = (svs[i - 1][k], svs[i][k], svs[i + 1][k]);
            if !(c <= l && c < r) || out.ts[i] - a < 2.0 * h {
                continue;
            }
            // Golden-section search on [t_{i−1}, t_{i+1}].
            let (mut lo, mut hi) = (out.ts[i - 1], out.ts[i + 1]);
            let mut x1 = hi - INVPHI * (hi - lo);
            let mut x2 = lo + INVPHI * (hi - lo);
            let mut f1 = value_at(i - 1, x1)?[k];
            let mut f2 = value_at(i - 1, x2)?[k];
            while hi - lo > opts.t_tol {
                if f1 < f2 {
                    hi = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = hi - INVPHI * (hi - lo);
                    f1 = value_at(i - 1, x1)?[k];
                } else {
                    lo = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = lo + INVPHI * (hi - lo);
                    f2 = value_at(i - 1, x2)?[k];
                }
            }
            let t = 0.5 * (lo + hi);
            let sv = value_at(i - 1, t)?;
            if sv[k] >= opts.threshold || t >= b {
                continue;
            }
            let multiplicity = sv.iter().filter(|s| **s < opts.threshold).count();
            match found.iter_mut().find(|p| (p.t - t).abs() < 1e-6) {
                Some(p) => {
                    if sv[0] < p.rho {
                        p.t = t;
                        p.rho = sv[0];
                    }
                    p.multiplicity = p.multiplicity.max(multiplicity);
                }
                None => found.push(ConjugatePoint {
                    t,
                    multiplicity,
                    rho: sv[0],
                }),
            }
        }
    }
    found.sort_by(|p, q| p.t.total_cmp(&q.t));
    Ok(Scan { points: found, curve })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn harmonic_oscillator_zeros() {
        let coeff = |_t: f64| Ok((DMatrix::from_diagonal_element(2, 2, -1.0), None));
        let s = scan(2, coeff, (0.0, 3.5 * PI), &ScanOptions::default()).unwrap();
        let ts: Vec<f64> = s.points.iter().map(|p| p.t).collect();
        assert_eq!(s.points.len(), 3, "{ts:?}");
        for (k, p) in s.points.iter().enumerate() {
            assert!((p.t - (k + 1) as f64 * PI).abs() < 1e-7);
            assert_eq!(p.multiplicity, 2);
        }
    }

    #[test]
    fn distinct_frequencies_give_simple_zeros() {
        let coeff = |_t: f64| Ok((DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-1.0, -4.0])), None));
        let s = scan(2, coeff, (0.0, 5.0), &ScanOptions::default()).unwrap();
        let got: Vec<(f64, usize)> = s.points.iter().map(|p| (p.t, p.multiplicity)).collect();
        assert_eq!(got.len(), 3, "{got:?}");
        assert!((got[0].0 - PI / 2.0).abs() < 1e-7 && got[0].1 == 1);
        assert!((got[1].0 - PI).abs() < 1e-7 && got[1].1 == 2);
        assert!((got[2].0 - 1.5 * PI).abs() < 1e-7 && got[2].1 == 1);
    }
}
