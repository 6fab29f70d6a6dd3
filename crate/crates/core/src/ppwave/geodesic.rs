use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::PpWave;
use crate::error::{Error, Result};
use crate::limit::WaveProfile;
use crate::ode;
use crate::transport::{horizon_of, CausalCharacter, GeodesicOptions, GeodesicRecord, Horizon, ENERGY_TOL};

/// Geodesics of a pp-wave from the reduced system
///
/// ```text
/// ẗ = 0,   ẍ^i = ½ σ_i H_i ṫ²,   v̈ = −½ H_t ṫ² − Σ H_i ẋ^i ṫ
/// ```
///
/// Initial data are full `(v, t, x)` position and velocity.
pub fn integrate_pp_geodesic(pp: &PpWave, x0: &[f64], v0: &[f64], opts: &GeodesicOptions) -> Result<GeodesicRecord> {
    let n = pp.dim();
    let r = pp.r();
    if x0.len() != n || v0.len() != n {
        return Err(Error::InvalidInput(format!("initial data must have {n} components")));
    }
    let (a, b) = opts.span;
    if !(b > a) {
        return Err(Error::InvalidInput(format!("empty span [{a}, {b}]")));
    }
    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
        let d = pp.h_data(&y[..n]).map_err(|e| Error::Integration {
            t,
            detail: e.to_string(),
        })?;
        let vel = &y[n..];
        let tdot = vel[1];
        dy[..n].copy_from_slice(vel);
        dy[n + 1] = 0.0;
        let mut vdd = -0.5 * d.ht * tdot * tdot;
        for i in 0..r {
            dy[n + 2 + i] = 0.5 * pp.sigma[i] * d.grad[i] * tdot * tdot;
            vdd -= d.grad[i] * vel[2 + i] * tdot;
        }
        dy[n] = vdd;
        Ok(())
    };
    let (grid, anchor) = ode::grid_with_anchor(a, b, opts.samples, opts.anchor());
    let mut y0 = x0.to_vec();
    y0.extend_from_slice(v0);
    let out = ode::integrate_two_sided(rhs, &grid, anchor, &y0, &opts.ode)?;
    let anchor = out.ts.iter().position(|t| *t == grid[anchor]).unwrap_or(0);
    let metric = Arc::new(pp.metric.clone());
    let xs: Vec<Vec<f64>> = out.ys.iter().map(|y| y[..n].to_vec()).collect();
    let vs: Vec<Vec<f64>> = out.ys.iter().map(|y| y[n..].to_vec()).collect();
    let energies = xs
        .iter()
        .zip(&vs)
        .map(|(x, v)| metric.inner(x, v, v))
        .collect::<Result<Vec<f64>>>()?;
    let e0 = energies[anchor];
    let limit = ENERGY_TOL * (1.0 + e0.abs());
    let horizon = horizon_of(out.termination);
    let drift = energies.iter().fold(0.0_f64, |m, e| m.max((e - e0).abs()));
    if drift > limit && horizon.is_none() {
        return Err(Error::Drift {
            quantity: "geodesic energy g(γ′,γ′)".into(),
            value: drift,
            limit,
        });
    }
    Ok(GeodesicRecord {
        metric,
        accs: out.dys.iter().map(|d| d[n..].to_vec()).collect(),
        ts: out.ts,
        xs,
        vs,
        anchor,
        character: CausalCharacter::of(e0),
        energies,
        horizon,
        options: *opts,
    })
}

/// Whether a plane-wave limit is complete on `[−T, T]`, decided from the
/// domain of the profile. For quadratic `H` the geodesic equations are
/// linear in `x`, so the limit is complete exactly when `A(t)` is defined
/// for all `t`; this probe can only report evidence on a finite window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletenessReport {
    /// `complete` or `incomplete-evidence`.
    pub verdict: String,
    pub requested: (f64, f64),
    pub domain: (f64, f64),
    pub horizon: Option<Horizon>,
}

impl CompletenessReport {
    pub fn complete(&self) -> bool {
        self.verdict == "complete"
    }
}

pub fn completeness_probe(p: &WaveProfile, horizon: f64) -> CompletenessReport {
    let domain = p.domain();
    let slack = 1e-12 * (1.0 + horizon.abs());
    let covers = domain.0 <= -horizon + slack && domain.1 >= horizon - slack;
    let verdict = if covers && p.horizon.is_none() {
        "complete"
    } else {
        "incomplete-evidence"
    };
    CompletenessReport {
        verdict: verdict.into(),
        requested: (-horizon, horizon),
        domain,
        horizon: p.horizon.clone(),
    }
}
