//! Wave profiles along geodesics and the plane waves they define.
//!
//! Along a geodesic `γ` with parallel orthonormal normal frame `{E_i}`,
//! `ε_i = g(E_i, E_i)`, the profile is
//!
//! ```text
//! A_ij(t) = −ε_i |ε_j| Rm(E_i, γ′, γ′, E_j)(t)
//! ```
//!
//! and the limit is the Lorentzian metric
//! `2 dv dt + (Σ A_ij(t) x^i x^j) dt² + Σ (dx^i)²` on `(v, t, x¹..x^r)`.

mod assemble;
mod export;
mod flow;
mod lift;
mod rosen;

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use assemble::{assemble_plane_wave, PlaneWaveMetric};
pub use flow::{flow_profile, FlowProfile, FLOW_TOL};
pub use lift::{frame_change_check, lift_and_limit, FrameChange};
pub use rosen::{rosen_to_brinkmann, RosenData, RosenOutput};

use crate::error::{Error, Result};
use crate::geometry::{curvature_at, MetricSpec};
use crate::interp::HermiteTable;
use crate::transport::{
    initial_normal_frame, integrate_geodesic, parallel_transport, CausalCharacter, GeodesicOptions, GeodesicRecord,
    Horizon, ParallelFrame,
};

/// Where a profile came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub metric: String,
    pub x0: Vec<f64>,
    pub v0: Vec<f64>,
    /// Pipeline stage that produced the numbers.
    pub stage: String,
}

/// Samples of the matrix function `A(t)` with the frame signs.
#[derive(Debug, Clone)]
pub struct WaveProfile {
    pub eps: Vec<f64>,
    /// Number of timelike frame members; they come first.
    pub timelike: usize,
    pub ts: Vec<f64>,
    pub a: Vec<DMatrix<f64>>,
    /// `Ric(γ′, γ′)` per sample, when the base metric is known.
    pub ric: Option<Vec<f64>>,
    pub character: CausalCharacter,
    pub horizon: Option<Horizon>,
    /// Index of the sample carrying the initial data.
    pub anchor: usize,
    /// Largest `|S_ij − S_ji|` of the raw curvature slots before they were
    /// symmetrised.
    pub slot_asymmetry: f64,
    pub provenance: Provenance,
}

impl WaveProfile {
    pub fn r(&self) -> usize {
        self.eps.len()
    }

    pub fn len(&self) -> usize {
        self.ts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ts.is_empty()
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.ts[0], self.ts[self.ts.len() - 1])
    }

    pub fn is_riemannian(&self) -> bool {
        self.eps.iter().all(|e| *e > 0.0)
    }

    /// Samples of one entry.
    pub fn entry(&self, i: usize, j: usize) -> Vec<f64> {
        self.a.iter().map(|a| a[(i, j)]).collect()
    }

    /// Hermite interpolant of one entry.
    pub fn table(&self, i: usize, j: usize) -> HermiteTable {
        HermiteTable::new(self.ts.clone(), self.entry(i, j))
    }

    /// `A(t)`, interpolated between samples.
    pub fn at(&self, t: f64) -> DMatrix<f64> {
        let r = self.r();
        DMatrix::from_fn(r, r, |i, j| self.table(i, j).value(t))
    }

    /// `dA/dt` from the Hermite interpolant.
    pub fn derivative_at(&self, t: f64) -> DMatrix<f64> {
        let r = self.r();
        DMatrix::from_fn(r, r, |i, j| self.table(i, j).eval(t).1)
    }

    /// `max_t ‖dA/dt‖∞` over the sample nodes.
    pub fn max_derivative(&self) -> f64 {
        let r = self.r();
        let mut m: f64 = 0.0;
        for i in 0..r {
            for j in 0..r {
                let tab = self.table(i, j);
                m = tab.slopes().iter().fold(m, |m, s| m.max(s.abs()));
            }
        }
        m
    }

    pub fn max_abs(&self) -> f64 {
        self.a.iter().fold(0.0, |m, a| m.max(a.amax()))
    }

    /// Raw curvature slots `S_ij = Rm(E_i, γ′, γ′, E_j) = −ε_i A_ij` at a
    /// sample.
    pub fn slots(&self, s: usize) -> DMatrix<f64> {
        let r = self.r();
        DMatrix::from_fn(r, r, |i, j| -self.eps[i] * self.a[s][(i, j)])
    }

    /// `−Σ A_ii` per sample, which equals `Ric(γ′, γ′)`.
    pub fn minus_trace(&self) -> Vec<f64> {
        self.a.iter().map(|a| -a.trace()).collect()
    }

    /// Largest violation of `A_ij = A_ji` (same sign) and `A_ij = −A_ji`
    /// (mixed sign).
    pub fn symmetry_residual(&self) -> f64 {
        let r = self.r();
        let mut m: f64 = 0.0;
        for a in &self.a {
            for i in 0..r {
                for j in 0..r {
                    let s = self.eps[i] * self.eps[j];
                    m = m.max((a[(i, j)] - s * a[(j, i)]).abs());
                }
            }
        }
        m
    }

    /// Largest `|Ric(γ′,γ′) + Σ A_ii|`; zero when no Ricci samples exist.
    pub fn trace_residual(&self) -> f64 {
        let Some(ric) = &self.ric else { return 0.0 };
        ric.iter()
            .zip(self.minus_trace())
            .fold(0.0, |m, (r, t)| m.max((r - t).abs()))
    }

    /// Largest `|Rm(E_i, γ′, γ′, E_j)|` with `ε_i ≠ ε_j`.
    pub fn cross_causal_residual(&self) -> f64 {
        let r = self.r();
        let mut m: f64 = 0.0;
        for a in &self.a {
            for i in 0..r {
                for j in 0..r {
                    if self.eps[i] != self.eps[j] {
                        m = m.max(a[(i, j)].abs());
                    }
                }
            }
        }
        m
    }

    /// Restrict to samples with `lo <= t <= hi`.
    pub fn restricted(&self, lo: f64, hi: f64) -> WaveProfile {
        let keep: Vec<usize> = (0..self.len()).filter(|&s| self.ts[s] >= lo && self.ts[s] <= hi).collect();
        let pick = |v: &[f64]| keep.iter().map(|&s| v[s]).collect::<Vec<_>>();
        WaveProfile {
            ts: pick(&self.ts),
            a: keep.iter().map(|&s| self.a[s].clone()).collect(),
            ric: self.ric.as_ref().map(|r| pick(r)),
            anchor: keep.iter().position(|&s| s == self.anchor).unwrap_or(0),
            ..self.clone()
        }
    }
}

/// Profile of `rec` in the transported frame.
pub fn wave_profile(rec: &GeodesicRecord, frame: &ParallelFrame) -> Result<WaveProfile> {
    if frame.ts.len() != rec.len() {
        return Err(Error::InvalidInput(format!(
            "frame has {} samples, geodesic record has {}",
            frame.ts.len(),
            rec.len()
        )));
    }
    let r = frame.r();
    let m = &rec.metric;
    let mut a = Vec::with_capacity(rec.len());
    let mut ric = Vec::with_capacity(rec.len());
    let mut asym: f64 = 0.0;
    for s in 0..rec.len() {
        let cp = curvature_at(m, &rec.xs[s])?;
        let v = &rec.vs[s];
        let e = &frame.vectors[s];
        let raw = DMatrix::from_fn(r, r, |i, j| cp.rm_eval(&e[i], v, v, &e[j]));
        asym = asym.max((&raw - raw.transpose()).amax());
        // Symmetrising makes mixed-sign pairs cancel exactly in A_ij + A_ji.
        let sym = (&raw + raw.transpose()) * 0.5;
        a.push(DMatrix::from_fn(r, r, |i, j| -frame.eps[i] * sym[(i, j)]));
        ric.push(cp.ric_eval(v, v));
    }
    Ok(WaveProfile {
        eps: frame.eps.clone(),
        timelike: frame.timelike,
        ts: rec.ts.clone(),
        a,
        ric: Some(ric),
        character: rec.character,
        horizon: rec.horizon.clone(),
        anchor: rec.anchor,
        slot_asymmetry: asym,
        provenance: Provenance {
            metric: m.label().to_string(),
            x0: rec.x0().to_vec(),
            v0: rec.v0().to_vec(),
            stage: "wave_profile".into(),
        },
    })
}

/// Geodesic, parallel frame and profile from initial data.
#[derive(Debug, Clone)]
pub struct LimitRun {
    pub record: GeodesicRecord,
    pub frame: ParallelFrame,
    pub profile: WaveProfile,
}

/// Integrate the geodesic, build and transport the normal frame, and read
/// off the profile.
pub fn profile_along(m: Arc<MetricSpec>, x0: &[f64], v0: &[f64], opts: &GeodesicOptions) -> Result<LimitRun> {
    let frame0 = initial_normal_frame(&m, x0, v0)?;
    let record = integrate_geodesic(m, x0, v0, opts)?;
    let frame = parallel_transport(&record, &frame0)?;
    let profile = wave_profile(&record, &frame)?;
    Ok(LimitRun { record, frame, profile })
}

pub use export::{profile_csv, profile_json};
