//! Jacobi fields along the base geodesic and along its plane-wave limit.
//!
//! In the parallel frame a normal Jacobi field `J = Σ J^i E_i` satisfies
//!
//! ```text
//! (J^j)″ = −ε_j Σ_i Rm(E_i, γ′, γ′, E_j) J^i
//! ```
//!
//! which for a causally independent geodesic splits into a timelike and a
//! spacelike block. Conjugate points are the zeros of the fundamental
//! matrix `Φ` (`Φ(a) = 0`, `Φ′(a) = I`); a multiplicity is the number of
//! singular values of `Φ` below `10⁻⁷ σ_max([Φ; Φ′])`.

mod focus;
mod index_form;
mod limit_side;
mod scan;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub use focus::{focusing_check, morse_bound, FocusingReport, FocusingVerdict, MorseBound};
pub use index_form::{index_form, split_fields, PiecewiseLinear};
pub use limit_side::{
    correspondence_check, limit_jacobi_field, limit_morse_index, timelike_limit_geodesic, CorrespondenceReport,
    LimitGeodesic, LimitIndex, LimitJacobi,
};
pub use scan::{ConjugatePoint, ScanOptions};

use crate::error::{Error, Result};
use crate::interp::HermiteTable;
use crate::limit::WaveProfile;
use crate::ode;

/// Default threshold on cross-causal curvature slots.
pub const INDEPENDENCE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CausalIndependence {
    /// Independent relative to the supplied frame; other frames are not
    /// searched.
    pub independent: bool,
    /// `max_t |Rm(E_i, γ′, γ′, E_j)|` over pairs with `ε_i ≠ ε_j`.
    pub residual: f64,
    pub tolerance: f64,
}

pub fn causal_independence_check(p: &WaveProfile, tol: f64) -> CausalIndependence {
    let residual = p.cross_causal_residual();
    CausalIndependence {
        independent: residual < tol,
        residual,
        tolerance: tol,
    }
}

/// The reduced Jacobi system `J″ = K(t) J`, `K_ji = −ε_j S_ij`, with
/// cross-causal entries set to zero.
#[derive(Debug, Clone)]
pub struct JacobiSystem {
    pub eps: Vec<f64>,
    pub timelike: usize,
    tables: Vec<HermiteTable>,
    pub causal_residual: f64,
}

impl JacobiSystem {
    /// Refuses profiles that are not causally independent relative to their
    /// frame.
    pub fn new(p: &WaveProfile, tol: f64) -> Result<Self> {
        let ci = causal_independence_check(p, tol);
        if !ci.independent {
            return Err(Error::CausallyDependent { residual: ci.residual });
        }
        if p.len() < 2 {
            return Err(Error::InvalidInput("profile needs at least two samples".into()));
        }
        let r = p.r();
        let mut tables = Vec::with_capacity(r * r);
        for j in 0..r {
            for i in 0..r {
                // Entry (j, i) of K is ε_j ε_i A_ij.
                let vals: Vec<f64> = if p.eps[i] != p.eps[j] {
                    vec![0.0; p.len()]
                } else {
                    p.a.iter().map(|a| p.eps[j] * p.eps[i] * a[(i, j)]).collect()
                };
                tables.push(HermiteTable::new(p.ts.clone(), vals));
            }
        }
        Ok(Self {
            eps: p.eps.clone(),
            timelike: p.timelike,
            tables,
            causal_residual: ci.residual,
        })
    }

    pub fn r(&self) -> usize {
        self.eps.len()
    }

    pub fn domain(&self) -> (f64, f64) {
        self.tables[0].domain()
    }

    /// `K(t)`.
    pub fn coefficient(&self, t: f64) -> DMatrix<f64> {
        let r = self.r();
        DMatrix::from_fn(r, r, |j, i| self.tables[j * r + i].value(t))
    }

    fn check_span(&self, span: (f64, f64)) -> Result<()> {
        let (lo, hi) = self.domain();
        let slack = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
        if span.0 < lo - slack || span.1 > hi + slack {
            return Err(Error::InvalidInput(format!(
                "interval ({}, {}) is not inside the profile domain [{lo}, {hi}]",
                span.0, span.1
            )));
        }
        Ok(())
    }

    /// Jacobi field with `J(a) = 0`, `J′(a) = c`, sampled on `samples`
    /// uniform points of `[a, b]`.
    pub fn field(&self, span: (f64, f64), samples: usize, c: &[f64], opts: &ode::Options) -> Result<BaseJacobi> {
        self.check_span(span)?;
        let r = self.r();
        if c.len() != r {
            return Err(Error::InvalidInput(format!("initial derivative must have {r} components")));
        }
        let (grid, _) = ode::grid_with_anchor(span.0, span.1, samples, span.0);
        let mut y0 = vec![0.0; r];
        y0.extend_from_slice(c);
        let rhs = |t: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
            let k = self.coefficient(t);
            dy[..r].copy_from_slice(&y[r..]);
            for j in 0..r {
                dy[r + j] = (0..r).map(|i| k[(j, i)] * y[i]).sum();
            }
            Ok(())
        };
        let out = ode::integrate(rhs, &grid, &y0, opts)?;
        Ok(BaseJacobi {
            j: out.ys.iter().map(|y| y[..r].to_vec()).collect(),
            jd: out.ys.iter().map(|y| y[r..].to_vec()).collect(),
            jdd: out.dys.iter().map(|d| d[r..].to_vec()).collect(),
            ts: out.ts,
        })
    }

    /// Largest `|J″ − K J|` over the samples of a supplied field.
    pub fn residual(&self, f: &BaseJacobi) -> f64 {
        let r = self.r();
        let mut m: f64 = 0.0;
        for s in 0..f.ts.len() {
            let k = self.coefficient(f.ts[s]);
            for j in 0..r {
                let kj: f64 = (0..r).map(|i| k[(j, i)] * f.j[s][i]).sum();
                m = m.max((f.jdd[s][j] - kj).abs());
            }
        }
        m
    }
}

/// Samples of a Jacobi field in frame components, with first and second
/// derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseJacobi {
    pub ts: Vec<f64>,
    pub j: Vec<Vec<f64>>,
    pub jd: Vec<Vec<f64>>,
    pub jdd: Vec<Vec<f64>>,
}

impl BaseJacobi {
    /// A field given in closed form by `J`, `J′` and `J″`.
    pub fn from_fn(ts: Vec<f64>, f: impl Fn(f64) -> [Vec<f64>; 3]) -> Self {
        let mut out = Self {
            ts: ts.clone(),
            j: Vec::new(),
            jd: Vec::new(),
            jdd: Vec::new(),
        };
        for t in ts {
            let [a, b, c] = f(t);
            out.j.push(a);
            out.jd.push(b);
            out.jdd.push(c);
        }
        out
    }
}

/// Conjugate points of the base geodesic on an interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConjugateReport {
    pub span: (f64, f64),
    pub points: Vec<ConjugatePoint>,
    /// Sum of multiplicities.
    pub total: usize,
    /// `2 · Ind(γ̃)` once the limit side has been counted.
    pub index_bound: Option<usize>,
    pub causal_residual: f64,
    /// Spacing of the sampling grid; zeros closer than this to each other
    /// may merge.
    pub resolution: f64,
    /// `(t, σ_min(Φ)/σ_max([Φ; Φ′]))` on the sampling grid.
    pub curve: Vec<(f64, f64)>,
}

impl ConjugateReport {
    pub fn to_json(&self) -> Value {
        json!({
            "span": [self.span.0, self.span.1],
            "points": self.points.iter().map(|p| json!({"t": p.t, "multiplicity": p.multiplicity, "rho": p.rho})).collect::<Vec<_>>(),
            "total": self.total,
            "index_bound": self.index_bound,
            "residuals": {"causal_independence": self.causal_residual},
            "resolution": self.resolution,
        })
    }

    /// `t,rho` lines for plotting.
    pub fn curve_csv(&self) -> String {
        let mut s = String::from("t,rho\n");
        for (t, r) in &self.curve {
            s.push_str(&format!("{t:.16e},{r:.16e}\n"));
        }
        s
    }
}

/// Conjugate points of `γ(a)` on `(a, b)` from the reduced system.
pub fn conjugate_points(p: &WaveProfile, span: (f64, f64), opts: &ScanOptions) -> Result<ConjugateReport> {
    let sys = JacobiSystem::new(p, INDEPENDENCE_TOL)?;
    sys.check_span(span)?;
    let s = scan::scan(sys.r(), |t| Ok((sys.coefficient(t), None)), span, opts)?;
    Ok(ConjugateReport {
        span,
        total: s.points.iter().map(|p| p.multiplicity).sum(),
        points: s.points,
        index_bound: None,
        causal_residual: sys.causal_residual,
        resolution: opts.step,
        curve: s.curve,
    })
}
