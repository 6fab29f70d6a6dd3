use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{weyl_slots, PpWave};
use crate::error::Result;
use crate::geometry::curvature_at;
use crate::interp::three_point_slopes;
use crate::limit::PlaneWaveMetric;

#[derive(Debug, Clone, Copy)]
pub struct ClassifyOptions {
    /// Threshold for flags read off values of `H_ij` and curvature.
    pub tol: f64,
    /// Threshold for flags read off derivatives of `H_ij`.
    pub derivative_tol: f64,
    /// Step of the central differences used for third derivatives of `H`.
    pub fd_step: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            tol: 1e-7,
            derivative_tol: 1e-6,
            fd_step: 1e-4,
        }
    }
}

/// One classification flag. `value` is `None` when the property is not
/// defined for the dimension at hand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Flag {
    pub value: Option<bool>,
    pub residual: f64,
    pub tolerance: f64,
}

impl Flag {
    fn new(residual: f64, tolerance: f64) -> Self {
        Self {
            value: Some(residual < tolerance),
            residual,
            tolerance,
        }
    }

    fn not_applicable(tolerance: f64) -> Self {
        Self {
            value: None,
            residual: 0.0,
            tolerance,
        }
    }

    pub fn holds(&self) -> bool {
        self.value == Some(true)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PpClassification {
    /// `sampled`, `plane-wave` or `general`.
    pub path: String,
    pub r: usize,
    pub flat: Flag,
    pub conformally_flat: Flag,
    pub ricci_flat: Flag,
    pub scalar_flat: Flag,
    pub locally_symmetric: Flag,
    pub harmonic_curvature: Flag,
    pub parallel_ricci: Flag,
}

impl PpClassification {
    pub fn flags(&self) -> [(&'static str, &Flag); 7] {
        [
            ("flat", &self.flat),
            ("conformally_flat", &self.conformally_flat),
            ("ricci_flat", &self.ricci_flat),
            ("scalar_flat", &self.scalar_flat),
            ("locally_symmetric", &self.locally_symmetric),
            ("harmonic_curvature", &self.harmonic_curvature),
            ("parallel_ricci", &self.parallel_ricci),
        ]
    }

    /// `{flag: {value, residual, tolerance}}`; `value` is the string
    /// `"not applicable"` where undefined.
    pub fn to_json(&self) -> Value {
        let mut map = serde_json::Map::new();
        for (name, f) in self.flags() {
            let value = match f.value {
                Some(b) => json!(b),
                None => json!("not applicable"),
            };
            map.insert(
                name.into(),
                json!({"value": value, "residual": f.residual, "tolerance": f.tolerance}),
            );
        }
        json!({"path": self.path, "r": self.r, "flags": Value::Object(map)})
    }
}

fn laplacian(h: &DMatrix<f64>, sigma: &[f64]) -> f64 {
    (0..sigma.len()).map(|i| sigma[i] * h[(i, i)]).sum()
}

/// Classify a quadratic `H = ½ Σ H_ij(t) x^i x^j` from samples of its
/// Hessian. Third `x`-derivatives vanish identically; `t`-derivatives come
/// from three-point differences of the samples.
pub fn classify_sampled(ts: &[f64], hij: &[DMatrix<f64>], sigma: &[f64], opts: &ClassifyOptions) -> PpClassification {
    let r = sigma.len();
    let max_over = |f: &dyn Fn(&DMatrix<f64>) -> f64| hij.iter().fold(0.0_f64, |m, h| m.max(f(h)));
    let flat = max_over(&|h| h.amax());
    let conformal = if r >= 2 {
        Flag::new(max_over(&|h| weyl_slots(h, sigma).amax()), opts.tol)
    } else {
        Flag::not_applicable(opts.tol)
    };
    let lap: Vec<f64> = hij.iter().map(|h| laplacian(h, sigma)).collect();
    let ricci = lap.iter().fold(0.0_f64, |m, v| m.max(v.abs()));

    let (dh, dlap) = if ts.len() >= 2 {
        let mut dh: f64 = 0.0;
        for i in 0..r {
            for j in 0..r {
                let col: Vec<f64> = hij.iter().map(|h| h[(i, j)]).collect();
                dh = three_point_slopes(ts, &col).iter().fold(dh, |m, s| m.max(s.abs()));
            }
        }
        let dlap = three_point_slopes(ts, &lap).iter().fold(0.0_f64, |m, s| m.max(s.abs()));
        (dh, dlap)
    } else {
        (0.0, 0.0)
    };
    PpClassification {
        path: "sampled".into(),
        r,
        flat: Flag::new(flat, opts.tol),
        conformally_flat: conformal,
        ricci_flat: Flag::new(ricci, opts.tol),
        scalar_flat: Flag::new(0.0, opts.tol),
        locally_symmetric: Flag::new(dh, opts.derivative_tol),
        harmonic_curvature: Flag::new(0.0, opts.derivative_tol),
        parallel_ricci: Flag::new(dlap, opts.derivative_tol),
    }
}

/// Transverse point at which curvature of an assembled limit is probed.
fn probe_x(r: usize) -> Vec<f64> {
    (0..r).map(|i| 0.5 - 0.25 * i as f64).collect()
}

/// Classify an assembled limit. `H_ij = A_ij + A_ji` comes from the profile
/// samples; scalar curvature and the Weyl tensor are evaluated on the
/// assembled metric at every sample time.
pub fn classify_plane_wave(pw: &PlaneWaveMetric, opts: &ClassifyOptions) -> Result<PpClassification> {
    let p = &pw.profile;
    let r = p.r();
    let hij: Vec<DMatrix<f64>> = (0..p.len()).map(|s| pw.hessian_sample(s)).collect();
    let mut c = classify_sampled(&p.ts, &hij, &vec![1.0; r], opts);
    c.path = "plane-wave".into();
    let x = probe_x(r);
    let mut scal: f64 = 0.0;
    let mut weyl: f64 = 0.0;
    for t in &p.ts {
        let cp = curvature_at(&pw.metric, &pw.point(0.25, *t, &x))?;
        scal = scal.max(cp.scal.abs());
        if let Some(w) = cp.weyl() {
            weyl = weyl.max(w.max_abs());
        }
    }
    c.scalar_flat = Flag::new(scal, opts.tol);
    if r >= 2 {
        c.conformally_flat = Flag::new(weyl, opts.tol);
    }
    Ok(c)
}

/// Classify a pp-wave with an explicit `H` at the given chart points. Third
/// derivatives of `H` are central differences of its exact Hessian.
pub fn classify_general(pp: &PpWave, points: &[Vec<f64>], opts: &ClassifyOptions) -> Result<PpClassification> {
    let r = pp.r();
    let h = opts.fd_step;
    let mut flat: f64 = 0.0;
    let mut ricci: f64 = 0.0;
    let mut scal: f64 = 0.0;
    let mut weyl: f64 = 0.0;
    let mut sym: f64 = 0.0;
    let mut harmonic: f64 = 0.0;
    let mut parallel: f64 = 0.0;
    for x in points {
        let d = pp.h_data(x)?;
        flat = flat.max(d.hess.amax());
        ricci = ricci.max(pp.laplacian(&d.hess).abs());
        let cp = curvature_at(&pp.metric, x)?;
        scal = scal.max(cp.scal.abs());
        if let Some(w) = cp.weyl() {
            weyl = weyl.max(w.max_abs());
        }
        // Directions: t, then each transverse coordinate.
        for (k, axis) in std::iter::once(1).chain(2..2 + r).enumerate() {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[axis] += h;
            xm[axis] -= h;
            let (hp, hm) = (pp.h_data(&xp)?.hess, pp.h_data(&xm)?.hess);
            let third = (&hp - &hm) / (2.0 * h);
            let dlap = (pp.laplacian(&hp) - pp.laplacian(&hm)) / (2.0 * h);
            sym = sym.max(third.amax());
            parallel = parallel.max(dlap.abs());
            if k > 0 {
                harmonic = harmonic.max(dlap.abs());
            }
        }
    }
    Ok(PpClassification {
        path: "general".into(),
        r,
        flat: Flag::new(flat, opts.tol),
        conformally_flat: if r >= 2 {
            Flag::new(weyl, opts.tol)
        } else {
            Flag::not_applicable(opts.tol)
        },
        ricci_flat: Flag::new(ricci, opts.tol),
        scalar_flat: Flag::new(scal, opts.tol),
        locally_symmetric: Flag::new(sym, opts.derivative_tol),
        harmonic_curvature: Flag::new(harmonic, opts.derivative_tol),
        parallel_ricci: Flag::new(parallel, opts.derivative_tol),
    })
}
