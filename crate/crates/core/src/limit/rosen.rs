use nalgebra::{Cholesky, DMatrix};

use super::{Provenance, WaveProfile};
use crate::error::{Error, Result};
use crate::exprlang::{eval_jet, parse_with_names, Expr};
use crate::ode;
use crate::transport::{horizon_of, CausalCharacter};

/// Rosen data `g_ij(t)`: a symmetric matrix of expressions in the single
/// variable `t`.
#[derive(Debug, Clone)]
pub struct RosenData {
    pub entries: Vec<Vec<Expr>>,
}

impl RosenData {
    pub fn new(entries: Vec<Vec<Expr>>) -> Result<Self> {
        let r = entries.len();
        if r == 0 || entries.iter().any(|row| row.len() != r) {
            return Err(Error::InvalidInput("Rosen data must be a nonempty square matrix".into()));
        }
        if let Some(e) = entries.iter().flatten().find(|e| e.required_dimension() > 1) {
            return Err(Error::InvalidInput(format!("Rosen entry `{e}` depends on more than t")));
        }
        Ok(Self { entries })
    }

    /// Parse entries written in the variable `t`.
    pub fn parse(rows: &[Vec<String>]) -> Result<Self> {
        let names = ["t".to_string()];
        let entries = rows
            .iter()
            .map(|row| row.iter().map(|s| parse_with_names(s, &names)).collect())
            .collect::<std::result::Result<Vec<Vec<Expr>>, _>>()?;
        Self::new(entries)
    }

    pub fn r(&self) -> usize {
        self.entries.len()
    }

    /// `(G, Ġ, G̈)` at `t`, symmetrised.
    pub fn jets(&self, t: f64) -> Result<[DMatrix<f64>; 3]> {
        let r = self.r();
        let mut out = [DMatrix::zeros(r, r), DMatrix::zeros(r, r), DMatrix::zeros(r, r)];
        for i in 0..r {
            for j in 0..r {
                let jet = eval_jet(&self.entries[i][j], &[t])?;
                out[0][(i, j)] = jet.value;
                out[1][(i, j)] = jet.grad[0];
                out[2][(i, j)] = jet.hess(0, 0);
            }
        }
        for m in out.iter_mut() {
            *m = (&*m + m.transpose()) * 0.5;
        }
        Ok(out)
    }
}

/// Brinkmann profile computed from Rosen data.
#[derive(Debug, Clone)]
pub struct RosenOutput {
    pub profile: WaveProfile,
    /// Frame matrices `F(t)`, column `i` holding `f_i`.
    pub f: Vec<DMatrix<f64>>,
    /// `max_t ‖ḞᵀGF − (ḞᵀGF)ᵀ‖∞`.
    pub symmetry_residual: f64,
    /// `max_t ‖FᵀGF − I‖∞`.
    pub normalization_residual: f64,
}

/// Limit on the monitored symmetry of `ḞᵀGF`.
const SYMMETRY_LIMIT: f64 = 1e-6;

struct Coefficients {
    g: DMatrix<f64>,
    gd: DMatrix<f64>,
    m: DMatrix<f64>,
    md: DMatrix<f64>,
}

fn coefficients(data: &RosenData, t: f64) -> Result<Coefficients> {
    let [g, gd, gdd] = data.jets(t)?;
    let chol = Cholesky::new(g.clone()).ok_or_else(|| Error::DegenerateMetric {
        point: vec![t],
        detail: "Rosen metric is not positive definite".into(),
    })?;
    let ginv_gd = chol.solve(&gd);
    let m = &ginv_gd * -0.5;
    let md = (&ginv_gd * &ginv_gd - chol.solve(&gdd)) * 0.5;
    Ok(Coefficients { g, gd, m, md })
}

fn unpack(y: &[f64], r: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    (
        DMatrix::from_column_slice(r, r, &y[..r * r]),
        DMatrix::from_column_slice(r, r, &y[r * r..]),
    )
}

/// Solve `2 G Ḟ = −Ġ F` with `F(t₀) = f0`, as the second-order system
/// `F̈ = Ṁ F + M Ḟ`, `M = −½ G⁻¹Ġ`, and return
/// `A = −(ḞᵀĠF + F̈ᵀGF)`. `t₀` is 0 when the span contains it, otherwise the
/// left end. `f0` must satisfy `f0ᵀ G(t₀) f0 = I`.
pub fn rosen_to_brinkmann(
    data: &RosenData,
    span: (f64, f64),
    samples: usize,
    f0: &DMatrix<f64>,
    opts: &ode::Options,
) -> Result<RosenOutput> {
    let r = data.r();
    if f0.nrows() != r || f0.ncols() != r {
        return Err(Error::InvalidInput(format!("f0 must be {r}×{r}")));
    }
    let (a, b) = span;
    if !(b > a) {
        return Err(Error::InvalidInput(format!("empty span [{a}, {b}]")));
    }
    let t0 = if a <= 0.0 && 0.0 <= b { 0.0 } else { a };
    let c0 = coefficients(data, t0)?;
    let norm0 = (f0.transpose() * &c0.g * f0 - DMatrix::identity(r, r)).amax();
    if norm0 > 1e-10 {
        return Err(Error::InvalidInput(format!(
            "f0 does not normalise the Rosen metric (‖f0ᵀGf0 − I‖ = {norm0:.2e})"
        )));
    }
    let fd0 = &c0.m * f0;
    let mut y0: Vec<f64> = f0.as_slice().to_vec();
    y0.extend_from_slice(fd0.as_slice());

    let (grid, anchor) = ode::grid_with_anchor(a, b, samples, t0);
    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
        let c = coefficients(data, t)?;
        let (f, fd) = unpack(y, r);
        let fdd = &c.md * &f + &c.m * &fd;
        dy[..r * r].copy_from_slice(fd.as_slice());
        dy[r * r..].copy_from_slice(fdd.as_slice());
        Ok(())
    };
    let out = ode::integrate_two_sided(rhs, &grid, anchor, &y0, opts)?;

    let mut a_samples = Vec::with_capacity(out.ts.len());
    let mut fs = Vec::with_capacity(out.ts.len());
    let mut sym: f64 = 0.0;
    let mut norm: f64 = 0.0;
    for (t, y) in out.ts.iter().zip(&out.ys) {
        let c = coefficients(data, *t)?;
        let (f, fd) = unpack(y, r);
        let fdd = &c.md * &f + &c.m * &fd;
        let w = fd.transpose() * &c.g * &f;
        sym = sym.max((&w - w.transpose()).amax());
        norm = norm.max((f.transpose() * &c.g * &f - DMatrix::identity(r, r)).amax());
        let am = -(fd.transpose() * &c.gd * &f + fdd.transpose() * &c.g * &f);
        a_samples.push(am);
        fs.push(f);
    }
    if sym > SYMMETRY_LIMIT {
        return Err(Error::Drift {
            quantity: "symmetry of ḞᵀGF".into(),
            value: sym,
            limit: SYMMETRY_LIMIT,
        });
    }
    let anchor = out.ts.iter().position(|t| *t == t0).unwrap_or(0);
    let profile = WaveProfile {
        eps: vec![1.0; r],
        timelike: 0,
        ts: out.ts,
        a: a_samples,
        ric: None,
        character: CausalCharacter::Lightlike,
        horizon: horizon_of(out.termination),
        anchor,
        slot_asymmetry: 0.0,
        provenance: Provenance {
            metric: "rosen".into(),
            x0: vec![t0],
            v0: f0.as_slice().to_vec(),
            stage: "rosen_to_brinkmann".into(),
        },
    };
    Ok(RosenOutput {
        profile,
        f: fs,
        symmetry_residual: sym,
        normalization_residual: norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data(rows: &[&[&str]]) -> RosenData {
        let rows: Vec<Vec<String>> = rows.iter().map(|r| r.iter().map(|s| s.to_string()).collect()).collect();
        RosenData::parse(&rows).unwrap()
    }

    #[test]
    fn flat_rosen_data() {
        let d = data(&[&["1", "0"], &["0", "1"]]);
        let out = rosen_to_brinkmann(&d, (0.0, 3.0), 31, &DMatrix::identity(2, 2), &ode::Options::default()).unwrap();
        assert!(out.profile.max_abs() < 1e-14);
        assert!(out.f.iter().all(|f| (f - DMatrix::identity(2, 2)).amax() < 1e-14));
    }

    #[test]
    fn cos_squared_gives_minus_one() {
        let d = data(&[&["cos(t)^2"]]);
        let out = rosen_to_brinkmann(&d, (0.0, 1.4), 29, &DMatrix::identity(1, 1), &ode::Options::default()).unwrap();
        for ((t, a), f) in out.profile.ts.iter().zip(&out.profile.a).zip(&out.f) {
            assert!((a[(0, 0)] + 1.0).abs() < 1e-8, "t = {t}: {}", a[(0, 0)]);
            assert!((f[(0, 0)] - 1.0 / t.cos()).abs() < 1e-8 * (1.0 / t.cos()).powi(2));
        }
    }

    #[test]
    fn rejects_unnormalised_frame() {
        let d = data(&[&["4"]]);
        let err = rosen_to_brinkmann(&d, (0.0, 1.0), 5, &DMatrix::identity(1, 1), &ode::Options::default());
        assert!(matches!(err, Err(Error::InvalidInput(_))));
    }
}
