use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::limit_side::LimitIndex;
use super::scan::ScanOptions;
use super::{conjugate_points, ConjugateReport};
use crate::error::{Error, Result};
use crate::limit::WaveProfile;

/// Threshold on `Ric(γ′,γ′)` and on curvature slots.
pub const FOCUS_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FocusingVerdict {
    /// `Ric ≥ 0`, curvature at `t = 0` nonzero, and a conjugate pair found.
    Consistent,
    /// Curvature vanishes at `t = 0`; nothing to focus.
    Vacuous,
    /// `Ric(γ′,γ′) < 0` somewhere on the horizon.
    HypothesisFails,
    /// Hypotheses hold but no conjugate pair lies within the horizon.
    HorizonTooSmall,
}

impl FocusingVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Consistent => "consistent",
            Self::Vacuous => "vacuous",
            Self::HypothesisFails => "hypothesis fails",
            Self::HorizonTooSmall => "horizon too small",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FocusingReport {
    pub verdict: FocusingVerdict,
    pub horizon: f64,
    /// `min Ric(γ′,γ′)` over samples in `[−T, T]`.
    pub ric_min: f64,
    /// `max |A_ij(0)|`.
    pub curvature_at_zero: f64,
    /// A conjugate pair `(t₀, t₁)` and the multiplicity at `t₁`.
    pub pair: Option<(f64, f64)>,
    pub multiplicity: usize,
}

impl FocusingReport {
    pub fn to_json(&self) -> Value {
        json!({
            "verdict": self.verdict.as_str(),
            "horizon": self.horizon,
            "ric_min": self.ric_min,
            "curvature_at_zero": self.curvature_at_zero,
            "pair": self.pair.map(|(a, b)| vec![a, b]),
            "multiplicity": self.multiplicity,
        })
    }
}

/// Test the focusing statement on `[−T, T]`: with `Ric(γ′,γ′) ≥ 0` and
/// curvature at `t = 0`, a conjugate pair must exist on a long enough
/// complete geodesic. Pairs are sought from `0` on `[0, T]`, then from `−T`
/// on `[−T, T]`.
pub fn focusing_check(p: &WaveProfile, horizon: f64, opts: &ScanOptions) -> Result<FocusingReport> {
    if !(horizon > 0.0) {
        return Err(Error::InvalidInput(format!("horizon must be positive, got {horizon}")));
    }
    let (lo, hi) = p.domain();
    let slack = 1e-12 * (1.0 + horizon);
    if lo > -horizon + slack || hi < horizon - slack || p.horizon.is_some() {
        return Err(Error::InvalidInput(format!(
            "profile on [{lo}, {hi}] does not cover [{}, {horizon}]",
            -horizon
        )));
    }
    let ric_min = p
        .ts
        .iter()
        .zip(p.minus_trace())
        .filter(|(t, _)| t.abs() <= horizon + slack)
        .fold(f64::INFINITY, |m, (_, r)| m.min(r));
    let curvature_at_zero = p.at(0.0).amax();
    let mut report = FocusingReport {
        verdict: FocusingVerdict::HypothesisFails,
        horizon,
        ric_min,
        curvature_at_zero,
        pair: None,
        multiplicity: 0,
    };
    if ric_min < -FOCUS_TOL {
        return Ok(report);
    }
    if curvature_at_zero < FOCUS_TOL {
        report.verdict = FocusingVerdict::Vacuous;
        return Ok(report);
    }
    for span in [(0.0, horizon), (-horizon, horizon)] {
        let rep = conjugate_points(p, span, opts)?;
        if let Some(first) = rep.points.first() {
            report.verdict = FocusingVerdict::Consistent;
            report.pair = Some((span.0, first.t));
            report.multiplicity = first.multiplicity;
            return Ok(report);
        }
    }
    report.verdict = FocusingVerdict::HorizonTooSmall;
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MorseBound {
    pub base_total: usize,
    pub limit_index: usize,
    pub holds: bool,
}

/// `Σ multiplicities ≤ 2 · Ind(γ̃)` on a common interval.
pub fn morse_bound(report: &ConjugateReport, limit: &LimitIndex) -> Result<MorseBound> {
    let d = (report.span.0 - limit.span.0).abs().max((report.span.1 - limit.span.1).abs());
    if d > 1e-12 * (1.0 + report.span.1.abs()) {
        return Err(Error::InvalidInput(format!(
            "base interval ({}, {}) differs from limit interval ({}, {})",
            report.span.0, report.span.1, limit.span.0, limit.span.1
        )));
    }
    Ok(MorseBound {
        base_total: report.total,
        limit_index: limit.index,
        holds: report.total <= 2 * limit.index,
    })
}
