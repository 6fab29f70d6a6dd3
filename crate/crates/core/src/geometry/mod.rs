//! Pointwise curvature of a coordinate metric.
//!
//! Conventions: `Γ^k_ij` is stored `[k][i][j]`, the curvature endomorphism is
//! `R(X,Y)Z = ∇_X∇_Y Z − ∇_Y∇_X Z − ∇_[X,Y] Z`, and the lowered tensor is
//! `Rm(a,b,c,d) = g(R(∂_a,∂_b)∂_c, ∂_d)`. With these, sectional curvature is
//! `Rm(X,Y,Y,X)` for an orthonormal pair and `Ric_bc = g^{ad} Rm_abcd`.

mod metric;
mod tensor;

use nalgebra::DMatrix;

pub use metric::{Connection, MetricSpec, Signature, DEGENERACY_TOL, MAX_CONDITION};
pub use tensor::{Tensor3, Tensor4};

pub(crate) use metric::{bilinear, christoffel, invert, signature_of};

use crate::error::Result;
use crate::exprlang::eval_jet;

/// Metric, connection and curvature at one point.
#[derive(Debug, Clone)]
pub struct CurvaturePoint {
    pub x: Vec<f64>,
    pub g: DMatrix<f64>,
    pub ginv: DMatrix<f64>,
    /// `∂_k g_ij` at `[k][i][j]`.
    pub dg: Tensor3,
    /// `Γ^k_ij` at `[k][i][j]`.
    pub gamma: Tensor3,
    /// `∂_m Γ^k_ij` at `[m][k][i][j]`.
    pub dgamma: Tensor4,
    pub rm: Tensor4,
    pub ric: DMatrix<f64>,
    pub scal: f64,
}

/// Evaluate everything up to curvature at `x`. Needs second derivatives of
/// the components, which come from second-order jets.
pub fn curvature_at(m: &MetricSpec, x: &[f64]) -> Result<CurvaturePoint> {
    let n = m.dim();
    if x.len() != n {
        return Err(crate::Error::InvalidInput(format!(
            "point has {} coordinates, metric has dimension {n}",
            x.len()
        )));
    }
    let mut g = DMatrix::zeros(n, n);
    let mut dg = Tensor3::zeros(n);
    let mut ddg = Tensor4::zeros(n); // [a][b][i][j] = ∂_a∂_b g_ij
    for i in 0..n {
        for j in i..n {
            let jet = eval_jet(m.component(i, j), x)?;
            g[(i, j)] = jet.value;
            g[(j, i)] = jet.value;
            for a in 0..n {
                dg.set(a, i, j, jet.grad[a]);
                dg.set(a, j, i, jet.grad[a]);
                for b in 0..n {
                    let h = jet.hess(a, b);
                    ddg.set(a, b, i, j, h);
                    ddg.set(a, b, j, i, h);
                }
            }
        }
    }
    signature_of(&g, x)?;
    let ginv = invert(&g, x)?;
    let gamma = christoffel(&ginv, &dg);

    // ∂_m g^{kl} = −g^{ka} ∂_m g_ab g^{bl}
    let mut dginv = Tensor3::zeros(n); // [m][k][l]
    for mm in 0..n {
        let dgm = DMatrix::from_fn(n, n, |a, b| dg.get(mm, a, b));
        let prod = -(&ginv * dgm * &ginv);
        for k in 0..n {
            for l in 0..n {
                dginv.set(mm, k, l, prod[(k, l)]);
            }
        }
    }

    // ∂_m Γ^k_ij = ½ ∂_m g^{kl} (∂_i g_lj + ∂_j g_li − ∂_l g_ij)
    //            + ½ g^{kl} (∂_m∂_i g_lj + ∂_m∂_j g_li − ∂_m∂_l g_ij)
    let mut dgamma = Tensor4::zeros(n);
    for mm in 0..n {
        for k in 0..n {
            for i in 0..n {
                for j in i..n {
                    let mut s = 0.0;
                    for l in 0..n {
                        let low = dg.get(i, l, j) + dg.get(j, l, i) - dg.get(l, i, j);
                        let dlow = ddg.get(mm, i, l, j) + ddg.get(mm, j, l, i) - ddg.get(mm, l, i, j);
                        s += dginv.get(mm, k, l) * low + ginv[(k, l)] * dlow;
                    }
                    dgamma.set(mm, k, i, j, 0.5 * s);
                    dgamma.set(mm, k, j, i, 0.5 * s);
                }
            }
        }
    }

    // R^e_abc = ∂_a Γ^e_bc − ∂_b Γ^e_ac + Γ^f_bc Γ^e_af − Γ^f_ac Γ^e_bf
    let mut rm = Tensor4::zeros(n);
    let mut r_up = vec![0.0; n];
    for a in 0..n {
        for b in 0..n {
            if a == b {
                continue;
            }
            for c in 0..n {
                for (e, r) in r_up.iter_mut().enumerate() {
                    let mut s = dgamma.get(a, e, b, c) - dgamma.get(b, e, a, c);
                    for f in 0..n {
                        s += gamma.get(f, b, c) * gamma.get(e, a, f) - gamma.get(f, a, c) * gamma.get(e, b, f);
                    }
                    *r = s;
                }
                for d in 0..n {
                    let mut s = 0.0;
                    for (e, r) in r_up.iter().enumerate() {
                        s += g[(d, e)] * r;
                    }
                    rm.set(a, b, c, d, s);
                }
            }
        }
    }

    let (ric, scal) = contract(&ginv, &rm);
    Ok(CurvaturePoint {
        x: x.to_vec(),
        g,
        ginv,
        dg,
        gamma,
        dgamma,
        rm,
        ric,
        scal,
    })
}

/// Index and eigenvalues of the metric at `x`.
pub fn signature_at(m: &MetricSpec, x: &[f64]) -> Result<Signature> {
    m.signature_at(x)
}

/// `Ric_bc = g^{ad} Rm_abcd` and its trace.
pub fn ricci_contract(cp: &CurvaturePoint) -> (DMatrix<f64>, f64) {
    contract(&cp.ginv, &cp.rm)
}

fn contract(ginv: &DMatrix<f64>, rm: &Tensor4) -> (DMatrix<f64>, f64) {
    let n = ginv.nrows();
    let mut ric = DMatrix::zeros(n, n);
    for b in 0..n {
        for c in 0..n {
            let mut s = 0.0;
            for a in 0..n {
                for d in 0..n {
                    s += ginv[(a, d)] * rm.get(a, b, c, d);
                }
            }
            ric[(b, c)] = s;
        }
    }
    let mut scal = 0.0;
    for b in 0..n {
        for c in 0..n {
            scal += ginv[(b, c)] * ric[(b, c)];
        }
    }
    (ric, scal)
}

/// Kulkarni–Nomizu product of two symmetric 2-tensors, matching the sign of
/// `Rm`: a space of constant curvature `K` has `Rm = (K/2) g ⊙ g`.
pub fn kulkarni_nomizu(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Tensor4 {
    let n = a.nrows();
    let mut out = Tensor4::zeros(n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let v = a[(i, l)] * b[(j, k)] + a[(j, k)] * b[(i, l)]
                        - a[(i, k)] * b[(j, l)]
                        - a[(j, l)] * b[(i, k)];
                    out.set(i, j, k, l, v);
                }
            }
        }
    }
    out
}

impl CurvaturePoint {
    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    /// `Rm(X, Y, Z, W)`.
    pub fn rm_eval(&self, x: &[f64], y: &[f64], z: &[f64], w: &[f64]) -> f64 {
        let n = self.dim();
        let mut s = 0.0;
        for a in 0..n {
            if x[a] == 0.0 {
                continue;
            }
            for b in 0..n {
                if y[b] == 0.0 {
                    continue;
                }
                let xy = x[a] * y[b];
                for c in 0..n {
                    if z[c] == 0.0 {
                        continue;
                    }
                    for d in 0..n {
                        s += xy * z[c] * w[d] * self.rm.get(a, b, c, d);
                    }
                }
            }
        }
        s
    }

    pub fn ric_eval(&self, x: &[f64], y: &[f64]) -> f64 {
        bilinear(&self.ric, x, y)
    }

    pub fn inner(&self, u: &[f64], w: &[f64]) -> f64 {
        bilinear(&self.g, u, w)
    }

    /// Weyl tensor `Rm − P ⊙ g` with Schouten tensor
    /// `P = (Ric − scal·g/(2(n−1)))/(n−2)`. Needs `n ≥ 3`.
    pub fn weyl(&self) -> Option<Tensor4> {
        let n = self.dim();
        if n < 3 {
            return None;
        }
        let p = (&self.ric - &self.g * (self.scal / (2.0 * (n as f64 - 1.0)))) / (n as f64 - 2.0);
        let pg = kulkarni_nomizu(&p, &self.g);
        let mut w = self.rm.clone();
        for ([a, b, c, d], v) in pg.iter() {
            w.set(a, b, c, d, w.get(a, b, c, d) - v);
        }
        Some(w)
    }

    /// Largest violation of antisymmetry in each pair and pair exchange,
    /// relative to the largest component.
    pub fn symmetry_residual(&self) -> f64 {
        let n = self.dim();
        let mut r: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let v = self.rm.get(a, b, c, d);
                        r = r
                            .max((v + self.rm.get(b, a, c, d)).abs())
                            .max((v + self.rm.get(a, b, d, c)).abs())
                            .max((v - self.rm.get(c, d, a, b)).abs());
                    }
                }
            }
        }
        r / self.rm.max_abs().max(1.0)
    }

    /// First Bianchi identity `Rm_abcd + Rm_bcad + Rm_cabd = 0`, relative.
    pub fn bianchi_residual(&self) -> f64 {
        let n = self.dim();
        let mut r: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let s = self.rm.get(a, b, c, d) + self.rm.get(b, c, a, d) + self.rm.get(c, a, b, d);
                        r = r.max(s.abs());
                    }
                }
            }
        }
        r / self.rm.max_abs().max(1.0)
    }

    /// Metric compatibility `∂_k g_ij − Γ^l_ki g_lj − Γ^l_kj g_il`, relative
    /// to the largest first derivative.
    pub fn compatibility_residual(&self) -> f64 {
        let n = self.dim();
        let mut r: f64 = 0.0;
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut s = self.dg.get(k, i, j);
                    for l in 0..n {
                        s -= self.gamma.get(l, k, i) * self.g[(l, j)] + self.gamma.get(l, k, j) * self.g[(i, l)];
                    }
                    r = r.max(s.abs());
                }
            }
        }
        r / self.dg.max_abs().max(1.0)
    }

    /// Christoffel symmetry `Γ^k_ij = Γ^k_ji`; exact by construction.
    pub fn torsion_residual(&self) -> f64 {
        let n = self.dim();
        let mut r: f64 = 0.0;
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    r = r.max((self.gamma.get(k, i, j) - self.gamma.get(k, j, i)).abs());
                }
            }
        }
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn diag_metric(label: &str, coords: &[&str], diag: &[&str], base: Vec<f64>) -> MetricSpec {
        let nm = names(coords);
        let n = nm.len();
        let rows: Vec<Vec<String>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { diag[i].to_string() } else { "0".into() }).collect())
            .collect();
        MetricSpec::parse(label, nm, &rows, base).unwrap()
    }

    #[test]
    fn flat_space_has_no_curvature() {
        let m = diag_metric("flat", &["x", "y", "z"], &["1", "1", "1"], vec![0.0; 3]);
        let cp = curvature_at(&m, &[0.3, -1.0, 2.0]).unwrap();
        assert_eq!(cp.gamma.max_abs(), 0.0);
        assert_eq!(cp.rm.max_abs(), 0.0);
        assert_eq!(cp.scal, 0.0);
        assert_eq!(m.index(), 0);
    }

    #[test]
    fn round_sphere_at_equator() {
        let m = diag_metric("s2", &["theta", "phi"], &["1", "sin(theta)^2"], vec![1.0, 0.0]);
        let cp = curvature_at(&m, &[FRAC_PI_2, 0.4]).unwrap();
        assert!((cp.rm.get(0, 1, 1, 0) - 1.0).abs() < 1e-14);
        assert!((cp.scal - 2.0).abs() < 1e-14);
        let (ric, _) = ricci_contract(&cp);
        assert!((&ric - &cp.g).amax() < 1e-14);
    }

    #[test]
    fn sphere_away_from_equator_is_sin_squared() {
        let m = diag_metric("s2", &["theta", "phi"], &["1", "sin(theta)^2"], vec![1.0, 0.0]);
        let th = 0.7_f64;
        let cp = curvature_at(&m, &[th, 0.0]).unwrap();
        assert!((cp.rm.get(0, 1, 1, 0) - th.sin().powi(2)).abs() < 1e-14);
        assert!((cp.scal - 2.0).abs() < 1e-13);
    }

    #[test]
    fn brinkmann_slots() {
        let nm = names(&["v", "t", "x", "y"]);
        let h = "x^2 + 3*x*y - y^2*sin(t)";
        let rows: Vec<Vec<String>> = vec![
            vec!["0".into(), "1".into(), "0".into(), "0".into()],
            vec!["1".into(), h.into(), "0".into(), "0".into()],
            vec!["0".into(), "0".into(), "1".into(), "0".into()],
            vec!["0".into(), "0".into(), "0".into(), "1".into()],
        ];
        let m = MetricSpec::parse("pp", nm, &rows, vec![0.0; 4]).unwrap();
        assert_eq!(m.index(), 1);
        let t = 0.8_f64;
        let cp = curvature_at(&m, &[0.1, t, 0.5, -0.3]).unwrap();
        let hxx = 2.0;
        let hxy = 3.0;
        let hyy = -2.0 * t.sin();
        assert!((cp.rm.get(2, 1, 1, 2) + hxx / 2.0).abs() < 1e-13);
        assert!((cp.rm.get(2, 1, 1, 3) + hxy / 2.0).abs() < 1e-13);
        assert!((cp.rm.get(3, 1, 1, 3) + hyy / 2.0).abs() < 1e-13);
        assert!((cp.ric[(1, 1)] + 0.5 * (hxx + hyy)).abs() < 1e-13);
        assert!(cp.scal.abs() < 1e-13);
    }

    #[test]
    fn product_lift_and_split_signature() {
        let m = diag_metric("lift", &["tau", "x", "y"], &["-1", "1", "1"], vec![0.0; 3]);
        assert_eq!(m.index(), 1);
        let m = diag_metric("ssmm", &["a", "b", "c", "d"], &["-1", "-1", "1", "1"], vec![0.0; 4]);
        assert_eq!(m.index(), 2);
    }

    #[test]
    fn asymmetric_matrix_rejected() {
        let nm = names(&["x", "y"]);
        let rows = vec![vec!["1".into(), "x".into()], vec!["y".into(), "1".into()]];
        assert!(MetricSpec::parse("bad", nm, &rows, vec![0.1, 0.2]).is_err());
    }

    #[test]
    fn degenerate_metric_rejected() {
        let nm = names(&["x", "y"]);
        let rows = vec![vec!["x".into(), "0".into()], vec!["0".into(), "1".into()]];
        assert!(matches!(
            MetricSpec::parse("deg", nm, &rows, vec![0.0, 0.0]),
            Err(crate::Error::DegenerateMetric { .. })
        ));
    }

    #[test]
    fn weyl_vanishes_for_constant_curvature() {
        let d = "4/(1 + x^2 + y^2 + z^2)^2";
        let m = diag_metric("s3", &["x", "y", "z"], &[d, d, d], vec![0.0; 3]);
        let cp = curvature_at(&m, &[0.3, -0.2, 0.5]).unwrap();
        assert!(cp.weyl().unwrap().max_abs() < 1e-13);
        assert!((cp.scal - 6.0).abs() < 1e-12);
    }
}
