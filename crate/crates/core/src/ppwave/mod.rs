//! pp-waves `2 dv dt + H(t, x) dt² + Σ σ_i (dx^i)²` in Brinkmann coordinates
//! `(v, t, x1, .., xr)`: curvature classification and geodesics.
//!
//! The classification reads everything off second and third derivatives of
//! `H`:
//!
//! | flag               | criterion                         |
//! |--------------------|-----------------------------------|
//! | flat               | `H_ij = 0`                        |
//! | conformally flat   | Weyl tensor vanishes (`r ≥ 2`)    |
//! | Ricci-flat         | `ΔH = Σ σ_i H_ii = 0`             |
//! | scalar-flat        | always                            |
//! | locally symmetric  | `H_ijk = H_ijt = 0`               |
//! | harmonic curvature | `∂_i ΔH = 0`                      |
//! | parallel Ricci     | `ΔH` constant                     |

mod checks;
mod classify;
mod geodesic;

use nalgebra::DMatrix;

pub use checks::{christoffel_residual, cotton_residual, nabla_rm_check, weyl_slots, NablaRmReport};
pub use classify::{classify_general, classify_plane_wave, classify_sampled, ClassifyOptions, Flag, PpClassification};
pub use geodesic::{completeness_probe, integrate_pp_geodesic, CompletenessReport};

use crate::error::{Error, Result};
use crate::exprlang::{eval_jet, parse_with_names, Expr};
use crate::geometry::MetricSpec;
use crate::limit::PlaneWaveMetric;

/// A pp-wave with profile function `H` over `(v, t, x1, .., xr)` and
/// transverse signs `σ_i`.
#[derive(Debug, Clone)]
pub struct PpWave {
    pub h: Expr,
    pub sigma: Vec<f64>,
    pub metric: MetricSpec,
}

/// Second-order data of `H` at a point.
#[derive(Debug, Clone)]
pub struct HData {
    pub value: f64,
    /// `H_t`.
    pub ht: f64,
    /// `H_i` for the transverse coordinates.
    pub grad: Vec<f64>,
    /// `H_ij` for the transverse coordinates.
    pub hess: DMatrix<f64>,
}

impl PpWave {
    /// Coordinates are named `v, t, x1, .., xr`.
    pub fn new(h: Expr, sigma: Vec<f64>) -> Result<Self> {
        let mut names = vec!["v".to_string(), "t".to_string()];
        names.extend((1..=sigma.len()).map(|i| format!("x{i}")));
        Self::with_names(h, sigma, names)
    }

    pub fn with_names(h: Expr, sigma: Vec<f64>, names: Vec<String>) -> Result<Self> {
        let r = sigma.len();
        if r == 0 || names.len() != r + 2 {
            return Err(Error::InvalidInput("a pp-wave needs at least one transverse coordinate".into()));
        }
        if sigma.iter().any(|s| s.abs() != 1.0) {
            return Err(Error::InvalidInput("transverse signs must be ±1".into()));
        }
        if h.required_dimension() > r + 2 {
            return Err(Error::InvalidInput(format!("H = `{h}` uses a variable beyond dimension {}", r + 2)));
        }
        if uses_var(&h, 0) {
            return Err(Error::InvalidInput("H must not depend on v".into()));
        }
        let n = r + 2;
        let mut upper = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in i..n {
                upper.push(match (i, j) {
                    (0, 1) => Expr::constant(1.0),
                    (1, 1) => h.clone(),
                    (i, j) if i == j && i >= 2 => Expr::constant(sigma[i - 2]),
                    _ => Expr::constant(0.0),
                });
            }
        }
        let mut base = vec![0.0; n];
        if let Some(t0) = sampled_start(&h) {
            base[1] = t0;
        }
        let metric = MetricSpec::from_upper("pp-wave", names, upper, base)?;
        Ok(Self { h, sigma, metric })
    }

    /// Parse `H` over coordinate names `v, t, x1, ..`, or custom names.
    pub fn parse(h: &str, sigma: Vec<f64>, names: Option<Vec<String>>) -> Result<Self> {
        let names = names.unwrap_or_else(|| {
            let mut n = vec!["v".to_string(), "t".to_string()];
            n.extend((1..=sigma.len()).map(|i| format!("x{i}")));
            n
        });
        let h = parse_with_names(h, &names)?;
        Self::with_names(h, sigma, names)
    }

    /// The assembled limit as a pp-wave with all `σ_i = +1`.
    pub fn from_plane_wave(pw: &PlaneWaveMetric) -> Self {
        Self {
            h: pw.h.clone(),
            sigma: vec![1.0; pw.r()],
            metric: pw.metric.clone(),
        }
    }

    pub fn r(&self) -> usize {
        self.sigma.len()
    }

    pub fn dim(&self) -> usize {
        self.r() + 2
    }

    /// `H`, `H_t`, `H_i`, `H_ij` at a point of the chart.
    pub fn h_data(&self, x: &[f64]) -> Result<HData> {
        let r = self.r();
        let jet = eval_jet(&self.h, x)?;
        Ok(HData {
            value: jet.value,
            ht: jet.grad[1],
            grad: (0..r).map(|i| jet.grad[2 + i]).collect(),
            hess: DMatrix::from_fn(r, r, |i, j| jet.hess(2 + i, 2 + j)),
        })
    }

    /// `ΔH = Σ σ_i H_ii`.
    pub fn laplacian(&self, hess: &DMatrix<f64>) -> f64 {
        (0..self.r()).map(|i| self.sigma[i] * hess[(i, i)]).sum()
    }
}

fn uses_var(e: &Expr, k: usize) -> bool {
    match e {
        Expr::Const(_) => false,
        Expr::Var(i) => *i == k,
        Expr::Unary(_, a) | Expr::Pow(a, _) | Expr::Sampled(_, a) => uses_var(a, k),
        Expr::Binary(_, a, b) => uses_var(a, k) || uses_var(b, k),
    }
}

/// Left end of the first sampled function in `e`, if any, so that the base
/// point lies inside its domain.
fn sampled_start(e: &Expr) -> Option<f64> {
    match e {
        Expr::Const(_) | Expr::Var(_) => None,
        Expr::Sampled(f, _) => {
            let (a, b) = f.table.domain();
            Some(if a <= 0.0 && 0.0 <= b { 0.0 } else { a })
        }
        Expr::Unary(_, a) | Expr::Pow(a, _) => sampled_start(a),
        Expr::Binary(_, a, b) => sampled_start(a).or_else(|| sampled_start(b)),
    }
}
