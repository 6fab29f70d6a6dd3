//! Geodesics and parallel orthonormal frames along them.

mod frame;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use frame::{initial_normal_frame, parallel_transport, InitialFrame, ParallelFrame};

use crate::error::{Error, Result};
use crate::geometry::MetricSpec;
use crate::interp::hermite_vector;
use crate::ode::{self, Termination};

/// `|g(γ′,γ′)|` below this counts as lightlike.
pub const CAUSAL_TOL: f64 = 1e-9;
/// Allowed relative drift of `g(γ′,γ′)` along a record.
pub const ENERGY_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CausalCharacter {
    Spacelike,
    Timelike,
    Lightlike,
}

impl CausalCharacter {
    pub fn of(energy: f64) -> Self {
        if energy.abs() < CAUSAL_TOL {
            CausalCharacter::Lightlike
        } else if energy > 0.0 {
            CausalCharacter::Spacelike
        } else {
            CausalCharacter::Timelike
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CausalCharacter::Spacelike => "spacelike",
            CausalCharacter::Timelike => "timelike",
            CausalCharacter::Lightlike => "lightlike",
        }
    }
}

/// Where and why an integration stopped short of the requested span.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Horizon {
    /// Last parameter value reached.
    pub t: f64,
    pub reason: String,
}

#[derive(Debug, Clone, Copy)]
pub struct GeodesicOptions {
    pub span: (f64, f64),
    pub samples: usize,
    pub ode: ode::Options,
}

impl Default for GeodesicOptions {
    fn default() -> Self {
        Self {
            span: (0.0, 10.0),
            samples: 201,
            ode: ode::Options::default(),
        }
    }
}

impl GeodesicOptions {
    pub fn new(span: (f64, f64), samples: usize) -> Self {
        Self {
            span,
            samples,
            ..Self::default()
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.ode.rtol = tol;
        self.ode.atol = tol;
        self
    }

    /// The initial data is placed at 0 when the span contains it, otherwise
    /// at the left end.
    pub fn anchor(&self) -> f64 {
        let (a, b) = self.span;
        if a <= 0.0 && 0.0 <= b {
            0.0
        } else {
            a
        }
    }
}

/// A sampled geodesic. Positions and velocities are stored at every grid
/// point together with their derivatives, so values between nodes come from
/// cubic Hermite interpolation rather than re-integration.
#[derive(Debug, Clone)]
pub struct GeodesicRecord {
    pub metric: Arc<MetricSpec>,
    pub ts: Vec<f64>,
    pub xs: Vec<Vec<f64>>,
    pub vs: Vec<Vec<f64>>,
    /// Geodesic accelerations `−Γ(v, v)`.
    pub accs: Vec<Vec<f64>>,
    /// Index of the sample holding the initial data.
    pub anchor: usize,
    /// `g(γ′, γ′)` per sample.
    pub energies: Vec<f64>,
    pub character: CausalCharacter,
    pub horizon: Option<Horizon>,
    pub options: GeodesicOptions,
}

impl GeodesicRecord {
    pub fn len(&self) -> usize {
        self.ts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ts.is_empty()
    }

    pub fn energy(&self) -> f64 {
        self.energies[self.anchor]
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.ts[0], self.ts[self.ts.len() - 1])
    }

    pub fn x0(&self) -> &[f64] {
        &self.xs[self.anchor]
    }

    pub fn v0(&self) -> &[f64] {
        &self.vs[self.anchor]
    }

    pub fn position_at(&self, t: f64) -> Vec<f64> {
        hermite_vector(&self.ts, &self.xs, &self.vs, t)
    }

    pub fn velocity_at(&self, t: f64) -> Vec<f64> {
        hermite_vector(&self.ts, &self.vs, &self.accs, t)
    }

    /// Largest `|g(γ′,γ′)(t) − g(γ′,γ′)(t₀)|`.
    pub fn energy_drift(&self) -> f64 {
        let e0 = self.energy();
        self.energies.iter().fold(0.0, |m, e| m.max((e - e0).abs()))
    }
}

pub(crate) fn geodesic_rhs(m: &MetricSpec, t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
    let n = m.dim();
    let conn = m.connection_at(&y[..n]).map_err(|e| Error::Integration {
        t,
        detail: e.to_string(),
    })?;
    dy[..n].copy_from_slice(&y[n..2 * n]);
    conn.acceleration(&y[n..2 * n], &mut dy[n..2 * n]);
    Ok(())
}

pub(crate) fn horizon_of(term: Termination) -> Option<Horizon> {
    match term {
        Termination::Completed => None,
        Termination::BlowUp { t } => Some(Horizon {
            t,
            reason: "state exceeded blow-up threshold".into(),
        }),
        Termination::StepUnderflow { t } => Some(Horizon {
            t,
            reason: "step size underflow".into(),
        }),
        Termination::MaxSteps { t } => Some(Horizon {
            t,
            reason: "step budget exhausted".into(),
        }),
    }
}

/// Integrate the geodesic with `γ(anchor) = x0`, `γ′(anchor) = v0` over
/// `opts.span`, sampling `opts.samples` uniform points (plus the anchor).
///
/// Running into a blow-up or step underflow is not an error: the record is
/// truncated and `horizon` says where. A metric that degenerates along the
/// path is an error.
pub fn integrate_geodesic(
    m: Arc<MetricSpec>,
    x0: &[f64],
    v0: &[f64],
    opts: &GeodesicOptions,
) -> Result<GeodesicRecord> {
    let n = m.dim();
    if x0.len() != n || v0.len() != n {
        return Err(Error::InvalidInput(format!(
            "initial data must have {n} components (got {} and {})",
            x0.len(),
            v0.len()
        )));
    }
    let (a, b) = opts.span;
    if !(b > a) {
        return Err(Error::InvalidInput(format!("empty span [{a}, {b}]")));
    }
    m.signature_at(x0)?;
    let (grid, anchor) = ode::grid_with_anchor(a, b, opts.samples, opts.anchor());
    let mut y0 = x0.to_vec();
    y0.extend_from_slice(v0);
    let out = ode::integrate_two_sided(
        |t, y: &[f64], dy: &mut [f64]| geodesic_rhs(&m, t, y, dy),
        &grid,
        anchor,
        &y0,
        &opts.ode,
    )?;
    let anchor = out.ts.iter().position(|t| *t == grid[anchor]).unwrap_or(0);
    let mut rec = GeodesicRecord {
        metric: m.clone(),
        xs: out.ys.iter().map(|y| y[..n].to_vec()).collect(),
        vs: out.ys.iter().map(|y| y[n..].to_vec()).collect(),
        accs: out.dys.iter().map(|d| d[n..].to_vec()).collect(),
        ts: out.ts,
        anchor,
        energies: Vec::new(),
        character: CausalCharacter::Spacelike,
        horizon: horizon_of(out.termination),
        options: *opts,
    };
    rec.energies = rec
        .xs
        .iter()
        .zip(&rec.vs)
        .map(|(x, v)| m.inner(x, v, v))
        .collect::<Result<_>>()?;
    let e0 = rec.energy();
    rec.character = CausalCharacter::of(e0);
    let limit = ENERGY_TOL * (1.0 + e0.abs());
    let bad = |e: &f64| (e - e0).abs() > limit;
    if rec.energies.iter().any(bad) {
        if rec.horizon.is_none() {
            return Err(Error::Drift {
                quantity: "geodesic energy g(γ′,γ′)".into(),
                value: rec.energy_drift(),
                limit,
            });
        }
        // Near a horizon the tail is unreliable; keep the trustworthy part.
        truncate_to_valid(&mut rec, limit);
    }
    Ok(rec)
}

fn truncate_to_valid(rec: &mut GeodesicRecord, limit: f64) {
    let e0 = rec.energy();
    let ok = |i: usize| (rec.energies[i] - e0).abs() <= limit;
    let mut lo = rec.anchor;
    while lo > 0 && ok(lo - 1) {
        lo -= 1;
    }
    let mut hi = rec.anchor;
    while hi + 1 < rec.len() && ok(hi + 1) {
        hi += 1;
    }
    let keep = lo..hi + 1;
    rec.ts = rec.ts[keep.clone()].to_vec();
    rec.xs = rec.xs[keep.clone()].to_vec();
    rec.vs = rec.vs[keep.clone()].to_vec();
    rec.accs = rec.accs[keep.clone()].to_vec();
    rec.energies = rec.energies[keep].to_vec();
    rec.anchor -= lo;
    if let Some(h) = rec.horizon.as_mut() {
        h.reason.push_str("; samples with energy drift removed");
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios;
    use std::f64::consts::PI;

    #[test]
    fn straight_line_in_the_plane() {
        let m = Arc::new(scenarios::flat(2));
        let rec = integrate_geodesic(m, &[0.0, 0.0], &[1.0, 0.0], &GeodesicOptions::new((0.0, 5.0), 11)).unwrap();
        for (t, x) in rec.ts.iter().zip(&rec.xs) {
            assert!((x[0] - t).abs() < 1e-12 && x[1].abs() < 1e-12);
        }
        assert_eq!(rec.character, CausalCharacter::Spacelike);
        assert!(rec.horizon.is_none());
    }

    #[test]
    fn equator_is_a_closed_great_circle() {
        let m = Arc::new(scenarios::polar_sphere());
        let opts = GeodesicOptions::new((0.0, 2.0 * PI), 101);
        let rec = integrate_geodesic(m, &[PI / 2.0, 0.0], &[0.0, 1.0], &opts).unwrap();
        for (t, x) in rec.ts.iter().zip(&rec.xs) {
            assert!((x[0] - PI / 2.0).abs() < 1e-9);
            assert!((x[1] - t).abs() < 1e-9);
        }
        assert!(rec.energy_drift() < 1e-10);
    }

    #[test]
    fn split_signature_example_null_line() {
        let m = Arc::new(scenarios::pp_example_ssmm());
        let rec = integrate_geodesic(m, &[0.0; 4], &[0.0, 1.0, 0.0, 0.0], &GeodesicOptions::new((0.0, 6.0), 31)).unwrap();
        assert_eq!(rec.character, CausalCharacter::Lightlike);
        for (t, x) in rec.ts.iter().zip(&rec.xs) {
            assert!((x[1] - t).abs() < 1e-12);
            assert!(x[0].abs() + x[2].abs() + x[3].abs() < 1e-12);
        }
    }

    #[test]
    fn two_sided_span_keeps_anchor_data() {
        let m = Arc::new(scenarios::polar_sphere());
        let opts = GeodesicOptions::new((-1.0, 1.5), 26);
        let rec = integrate_geodesic(m, &[1.0, 0.3], &[0.6, 0.8 / 1f64.sin()], &opts).unwrap();
        assert_eq!(rec.ts[rec.anchor], 0.0);
        assert_eq!(rec.x0(), &[1.0, 0.3]);
        assert_eq!(rec.domain(), (-1.0, 1.5));
    }
}
