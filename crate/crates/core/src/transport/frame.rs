use nalgebra::DMatrix;

use super::{geodesic_rhs, CausalCharacter, GeodesicRecord};
use crate::error::{Error, Result};
use crate::geometry::{bilinear, MetricSpec};
use crate::interp::hermite_vector;
use crate::ode;

/// Pivots with `|g(e,e)|` below this are rejected.
const PIVOT_TOL: f64 = 1e-9;
/// Orthonormality drift that aborts a transport.
pub const DRIFT_LIMIT: f64 = 1e-5;

/// An orthonormal basis of the normal space of `v0`, timelike members first.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialFrame {
    pub vectors: Vec<Vec<f64>>,
    pub eps: Vec<f64>,
    pub timelike: usize,
}

impl InitialFrame {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Replace the frame by `E'_i = Σ_j K_ij E_j`.
    pub fn rotated(&self, k: &DMatrix<f64>) -> InitialFrame {
        let r = self.len();
        let n = self.vectors.first().map_or(0, |v| v.len());
        let vectors = (0..r)
            .map(|i| {
                (0..n)
                    .map(|c| (0..r).map(|j| k[(i, j)] * self.vectors[j][c]).sum())
                    .collect()
            })
            .collect();
        InitialFrame {
            vectors,
            eps: self.eps.clone(),
            timelike: self.timelike,
        }
    }
}

fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(y, x)| *y += a * x);
}

/// Signed Gram–Schmidt with pivoting on `|g(c,c)|`. Takes up to `want`
/// vectors out of `cands`.
fn signed_gram_schmidt(g: &DMatrix<f64>, mut cands: Vec<Vec<f64>>, want: usize) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let mut basis = Vec::with_capacity(want);
    let mut eps = Vec::with_capacity(want);
    while basis.len() < want {
        let norms: Vec<f64> = cands.iter().map(|c| bilinear(g, c, c)).collect();
        // Largest pivot; among near-ties the earliest candidate, so coordinate
        // order is kept when possible.
        let top = norms.iter().fold(0.0_f64, |m, q| m.max(q.abs()));
        let best = norms.iter().position(|q| q.abs() >= top * (1.0 - 1e-12));
        let mut pick = match best {
            Some(i) if norms[i].abs() >= PIVOT_TOL => cands.remove(i),
            _ => {
                // Every remaining candidate is (nearly) null: combine two of
                // them, which succeeds whenever they pair nondegenerately.
                let mut found = None;
                let mut best_val = PIVOT_TOL;
                for a in 0..cands.len() {
                    for b in a + 1..cands.len() {
                        for s in [1.0, -1.0] {
                            let mut c = cands[a].clone();
                            axpy(s, &cands[b], &mut c);
                            let q = bilinear(g, &c, &c).abs();
                            if q >= best_val {
                                best_val = q;
                                found = Some((a, c));
                            }
                        }
                    }
                }
                match found {
                    Some((a, c)) => {
                        cands.remove(a);
                        c
                    }
                    None => {
                        return Err(Error::Frame(format!(
                            "found {} of {want} vectors; remaining candidates are degenerate",
                            basis.len()
                        )))
                    }
                }
            }
        };
        let q = bilinear(g, &pick, &pick);
        let e = q.signum();
        let scale = 1.0 / q.abs().sqrt();
        pick.iter_mut().for_each(|p| *p *= scale);
        for c in cands.iter_mut() {
            let proj = e * bilinear(g, c, &pick);
            axpy(-proj, &pick, c);
        }
        basis.push(pick);
        eps.push(e);
    }
    Ok((basis, eps))
}

/// Orthonormal frame of `v0^⊥` (spacelike or timelike `v0`, `n−1` vectors)
/// or of a complement of `span{v0, w}` inside `v0^⊥` (lightlike `v0`,
/// `n−2` vectors, with `w` a null vector pairing to 1 with `v0`).
pub fn initial_normal_frame(m: &MetricSpec, x0: &[f64], v0: &[f64]) -> Result<InitialFrame> {
    let n = m.dim();
    if v0.iter().all(|v| *v == 0.0) {
        return Err(Error::InvalidInput("initial velocity is zero".into()));
    }
    let g = m.metric_at(x0)?;
    let nu = m.signature_at(x0)?.index;
    let q = bilinear(&g, v0, v0);
    let character = CausalCharacter::of(q);
    let basis: Vec<Vec<f64>> = (0..n)
        .map(|k| {
            let mut e = vec![0.0; n];
            e[k] = 1.0;
            e
        })
        .collect();

    let (cands, want) = if character != CausalCharacter::Lightlike {
        let cands = basis
            .into_iter()
            .map(|mut e| {
                let c = bilinear(&g, &e, v0) / q;
                axpy(-c, v0, &mut e);
                e
            })
            .collect();
        (cands, n - 1)
    } else {
        let k = (0..n)
            .max_by(|&a, &b| bilinear(&g, &basis[a], v0).abs().total_cmp(&bilinear(&g, &basis[b], v0).abs()))
            .unwrap();
        let pair = bilinear(&g, &basis[k], v0);
        if pair.abs() < PIVOT_TOL {
            return Err(Error::Frame("null velocity pairs trivially with every coordinate vector".into()));
        }
        let mut w: Vec<f64> = basis[k].iter().map(|c| c / pair).collect();
        let ww = bilinear(&g, &w, &w);
        axpy(-ww / 2.0, v0, &mut w);
        let cands = basis
            .into_iter()
            .map(|mut e| {
                let (ew, ev) = (bilinear(&g, &e, &w), bilinear(&g, &e, v0));
                axpy(-ew, v0, &mut e);
                axpy(-ev, &w, &mut e);
                e
            })
            .collect();
        (cands, n - 2)
    };

    let (vectors, eps) = signed_gram_schmidt(&g, cands, want)?;
    let mut order: Vec<usize> = (0..vectors.len()).collect();
    order.sort_by(|&a, &b| eps[a].total_cmp(&eps[b]));
    let vectors: Vec<Vec<f64>> = order.iter().map(|&i| vectors[i].clone()).collect();
    let eps: Vec<f64> = order.iter().map(|&i| eps[i]).collect();
    let timelike = eps.iter().filter(|e| **e < 0.0).count();

    let expected = match character {
        CausalCharacter::Spacelike => nu,
        _ => nu.saturating_sub(1),
    };
    if timelike != expected || (character != CausalCharacter::Spacelike && nu == 0) {
        return Err(Error::Frame(format!(
            "{} velocity in index-{nu} metric gave {timelike} timelike frame vectors, expected {expected}",
            character.as_str()
        )));
    }
    Ok(InitialFrame {
        vectors,
        eps,
        timelike,
    })
}

/// Frame vectors sampled on the grid of a geodesic record.
#[derive(Debug, Clone)]
pub struct ParallelFrame {
    pub eps: Vec<f64>,
    pub timelike: usize,
    pub ts: Vec<f64>,
    /// `vectors[s][i]` is `E_i` at sample `s`.
    pub vectors: Vec<Vec<Vec<f64>>>,
    /// `∇`-free coordinate derivatives `dE_i/dt = −Γ(γ′, E_i)`.
    pub derivs: Vec<Vec<Vec<f64>>>,
    /// `max_t ‖Gram(t) − diag(ε)‖∞`.
    pub gram_drift: f64,
    /// `max_t max_i |g(E_i, γ′)|`.
    pub orthogonality_drift: f64,
}

impl ParallelFrame {
    pub fn r(&self) -> usize {
        self.eps.len()
    }

    pub fn initial(&self, anchor: usize) -> InitialFrame {
        InitialFrame {
            vectors: self.vectors[anchor].clone(),
            eps: self.eps.clone(),
            timelike: self.timelike,
        }
    }

    /// Frame at `t` by Hermite interpolation of the components.
    pub fn at(&self, t: f64) -> Vec<Vec<f64>> {
        (0..self.r())
            .map(|i| {
                let ys: Vec<Vec<f64>> = self.vectors.iter().map(|f| f[i].clone()).collect();
                let ds: Vec<Vec<f64>> = self.derivs.iter().map(|f| f[i].clone()).collect();
                hermite_vector(&self.ts, &ys, &ds, t)
            })
            .collect()
    }
}

/// Parallel transport `frame0` (given at the record's anchor) along the
/// record. The geodesic and the frame are integrated together on the record's
/// grid; nothing is re-orthonormalised, and drift above [`DRIFT_LIMIT`] is an
/// error.
pub fn parallel_transport(rec: &GeodesicRecord, frame0: &InitialFrame) -> Result<ParallelFrame> {
    let m = &rec.metric;
    let n = m.dim();
    let r = frame0.len();
    if frame0.vectors.iter().any(|v| v.len() != n) {
        return Err(Error::InvalidInput("frame vectors have the wrong dimension".into()));
    }
    let mut y0 = rec.x0().to_vec();
    y0.extend_from_slice(rec.v0());
    for v in &frame0.vectors {
        y0.extend_from_slice(v);
    }
    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
        geodesic_rhs(m, t, &y[..2 * n], &mut dy[..2 * n])?;
        let conn = m.connection_at(&y[..n]).map_err(|e| Error::Integration {
            t,
            detail: e.to_string(),
        })?;
        let v = &y[n..2 * n];
        for i in 0..r {
            let o = 2 * n + i * n;
            conn.transport(v, &y[o..o + n], &mut dy[o..o + n]);
        }
        Ok(())
    };
    let out = ode::integrate_two_sided(rhs, &rec.ts, rec.anchor, &y0, &rec.options.ode)?;
    if out.ts.len() != rec.ts.len() {
        let t = out.ts.last().copied().unwrap_or(rec.ts[0]);
        return Err(Error::Integration {
            t,
            detail: "frame transport stopped before the end of the geodesic record".into(),
        });
    }

    let split = |ys: &[Vec<f64>]| -> Vec<Vec<Vec<f64>>> {
        ys.iter()
            .map(|y| (0..r).map(|i| y[2 * n + i * n..2 * n + (i + 1) * n].to_vec()).collect())
            .collect()
    };
    let vectors = split(&out.ys);
    let derivs = split(&out.dys);

    let mut gram_drift: f64 = 0.0;
    let mut orth: f64 = 0.0;
    for (s, frame) in vectors.iter().enumerate() {
        let g = m.metric_at(&rec.xs[s])?;
        for i in 0..r {
            orth = orth.max(bilinear(&g, &frame[i], &rec.vs[s]).abs());
            for j in 0..r {
                let target = if i == j { frame0.eps[i] } else { 0.0 };
                gram_drift = gram_drift.max((bilinear(&g, &frame[i], &frame[j]) - target).abs());
            }
        }
    }
    let worst = gram_drift.max(orth);
    if worst > DRIFT_LIMIT {
        return Err(Error::Drift {
            quantity: "parallel frame orthonormality".into(),
            value: worst,
            limit: DRIFT_LIMIT,
        });
    }
    Ok(ParallelFrame {
        eps: frame0.eps.clone(),
        timelike: frame0.timelike,
        ts: rec.ts.clone(),
        vectors,
        derivs,
        gram_drift,
        orthogonality_drift: orth,
    })
}
