use nalgebra::{DMatrix, SymmetricEigen};

use super::tensor::Tensor3;
use crate::error::{Error, Result};
use crate::exprlang::{self, eval, eval_grad, Expr, ExprError};

/// Eigenvalues closer to zero than this are treated as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-10;
/// Largest accepted condition number of the metric matrix.
pub const MAX_CONDITION: f64 = 1e12;

/// A metric given by coordinate expressions. Only the upper triangle is
/// stored, so the component matrix is symmetric by construction.
#[derive(Debug, Clone)]
pub struct MetricSpec {
    label: String,
    names: Vec<String>,
    upper: Vec<Expr>,
    base_point: Vec<f64>,
    index: usize,
}

#[inline]
pub(crate) fn upper_index(i: usize, j: usize, n: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * n - i * (i + 1) / 2 + j
}

impl MetricSpec {
    /// Build from the upper triangle, listed row by row.
    ///
    /// The index is read off at `base_point`, which must be a point where the
    /// metric is nondegenerate.
    pub fn from_upper(
        label: impl Into<String>,
        names: Vec<String>,
        upper: Vec<Expr>,
        base_point: Vec<f64>,
    ) -> Result<Self> {
        let n = names.len();
        if n < 2 {
            return Err(Error::InvalidInput("metric dimension must be at least 2".into()));
        }
        if upper.len() != n * (n + 1) / 2 {
            return Err(Error::InvalidInput(format!(
                "expected {} upper-triangle components for dimension {n}, got {}",
                n * (n + 1) / 2,
                upper.len()
            )));
        }
        if base_point.len() != n {
            return Err(Error::InvalidInput(format!(
                "base point has {} coordinates, metric has dimension {n}",
                base_point.len()
            )));
        }
        if let Some(e) = upper.iter().find(|e| e.required_dimension() > n) {
            return Err(Error::InvalidInput(format!("component `{e}` uses a variable beyond dimension {n}")));
        }
        let mut m = Self {
            label: label.into(),
            names,
            upper,
            base_point,
            index: 0,
        };
        m.index = m.signature_at(&m.base_point.clone())?.index;
        Ok(m)
    }

    /// Build from a full component matrix. Entries below the diagonal must
    /// agree with their mirror images, either structurally or numerically at
    /// the base point.
    pub fn from_matrix(
        label: impl Into<String>,
        names: Vec<String>,
        rows: Vec<Vec<Expr>>,
        base_point: Vec<f64>,
    ) -> Result<Self> {
        let n = names.len();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput(format!("component matrix must be {n}×{n}")));
        }
        let mut upper = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in i..n {
                let (a, b) = (&rows[i][j], &rows[j][i]);
                if a != b && base_point.len() == n {
                    let (va, vb) = (eval(a, &base_point)?, eval(b, &base_point)?);
                    if (va - vb).abs() > 1e-12 * (1.0 + va.abs()) {
                        return Err(Error::InvalidInput(format!(
                            "component matrix is not symmetric: g[{i}][{j}] = `{a}` but g[{j}][{i}] = `{b}`"
                        )));
                    }
                }
                upper.push(a.clone());
            }
        }
        Self::from_upper(label, names, upper, base_point)
    }

    /// Parse a full matrix of component strings against the coordinate names.
    pub fn parse(
        label: impl Into<String>,
        names: Vec<String>,
        rows: &[Vec<String>],
        base_point: Vec<f64>,
    ) -> Result<Self> {
        let parsed: std::result::Result<Vec<Vec<Expr>>, ExprError> = rows
            .iter()
            .map(|r| r.iter().map(|s| exprlang::parse_with_names(s, &names)).collect())
            .collect();
        Self::from_matrix(label, names, parsed?, base_point)
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn base_point(&self) -> &[f64] {
        &self.base_point
    }

    /// Number of negative eigenvalues at the base point.
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn component(&self, i: usize, j: usize) -> &Expr {
        &self.upper[upper_index(i, j, self.dim())]
    }

    pub fn upper(&self) -> &[Expr] {
        &self.upper
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::InvalidInput(format!(
                "point has {} coordinates, metric has dimension {}",
                x.len(),
                self.dim()
            )));
        }
        Ok(())
    }

    pub fn metric_at(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.check_point(x)?;
        let n = self.dim();
        let mut g = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = eval(self.component(i, j), x)?;
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        Ok(g)
    }

    /// `g(u, w)` at `x`.
    pub fn inner(&self, x: &[f64], u: &[f64], w: &[f64]) -> Result<f64> {
        let g = self.metric_at(x)?;
        Ok(bilinear(&g, u, w))
    }

    /// Metric, inverse and Christoffel symbols `Γ^k_ij` (stored `[k][i][j]`).
    pub fn connection_at(&self, x: &[f64]) -> Result<Connection> {
        self.check_point(x)?;
        let n = self.dim();
        let mut g = DMatrix::zeros(n, n);
        let mut dg = Tensor3::zeros(n);
        for i in 0..n {
            for j in i..n {
                let jet = eval_grad(self.component(i, j), x)?;
                g[(i, j)] = jet.value;
                g[(j, i)] = jet.value;
                for k in 0..n {
                    dg.set(k, i, j, jet.grad[k]);
                    dg.set(k, j, i, jet.grad[k]);
                }
            }
        }
        let ginv = invert(&g, x)?;
        let gamma = christoffel(&ginv, &dg);
        Ok(Connection { g, ginv, dg, gamma })
    }

    /// Index and spectrum at `x`.
    pub fn signature_at(&self, x: &[f64]) -> Result<Signature> {
        signature_of(&self.metric_at(x)?, x)
    }
}

/// First-order metric data at a point.
#[derive(Debug, Clone)]
pub struct Connection {
    pub g: DMatrix<f64>,
    pub ginv: DMatrix<f64>,
    /// `dg[k][i][j] = ∂_k g_ij`.
    pub dg: Tensor3,
    /// `gamma[k][i][j] = Γ^k_ij`.
    pub gamma: Tensor3,
}

impl Connection {
    /// Geodesic acceleration `-Γ^k_ij v^i v^j`.
    pub fn acceleration(&self, v: &[f64], out: &mut [f64]) {
        let n = v.len();
        for (k, o) in out.iter_mut().enumerate().take(n) {
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    s += self.gamma.get(k, i, j) * v[i] * v[j];
                }
            }
            *o = -s;
        }
    }

    /// `-Γ^k_ij v^i e^j`, the derivative of a parallel field `e`.
    pub fn transport(&self, v: &[f64], e: &[f64], out: &mut [f64]) {
        let n = v.len();
        for (k, o) in out.iter_mut().enumerate().take(n) {
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    s += self.gamma.get(k, i, j) * v[i] * e[j];
                }
            }
            *o = -s;
        }
    }
}

/// Index (negative eigenvalue count) and eigenvalues of the metric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Signature {
    pub index: usize,
    pub eigenvalues: Vec<f64>,
}

pub(crate) fn signature_of(g: &DMatrix<f64>, x: &[f64]) -> Result<Signature> {
    let eig = SymmetricEigen::new(g.clone());
    let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let min_abs = ev.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    let max_abs = ev.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if !(min_abs > DEGENERACY_TOL) || max_abs / min_abs > MAX_CONDITION {
        return Err(Error::DegenerateMetric {
            point: x.to_vec(),
            detail: format!("eigenvalues {ev:?}"),
        });
    }
    Ok(Signature {
        index: ev.iter().filter(|v| **v < 0.0).count(),
        eigenvalues: ev,
    })
}

pub(crate) fn invert(g: &DMatrix<f64>, x: &[f64]) -> Result<DMatrix<f64>> {
    g.clone().try_inverse().ok_or_else(|| Error::DegenerateMetric {
        point: x.to_vec(),
        detail: "metric matrix is singular".into(),
    })
}

pub(crate) fn christoffel(ginv: &DMatrix<f64>, dg: &Tensor3) -> Tensor3 {
    let n = ginv.nrows();
    // Lowered symbols Γ_lij = ½(∂_i g_lj + ∂_j g_li − ∂_l g_ij).
    let mut low = Tensor3::zeros(n);
    for l in 0..n {
        for i in 0..n {
            for j in i..n {
                let v = 0.5 * (dg.get(i, l, j) + dg.get(j, l, i) - dg.get(l, i, j));
                low.set(l, i, j, v);
                low.set(l, j, i, v);
            }
        }
    }
    let mut gamma = Tensor3::zeros(n);
    for k in 0..n {
        for i in 0..n {
            for j in i..n {
                let mut s = 0.0;
                for l in 0..n {
                    s += ginv[(k, l)] * low.get(l, i, j);
                }
                gamma.set(k, i, j, s);
                gamma.set(k, j, i, s);
            }
        }
    }
    gamma
}

pub(crate) fn bilinear(g: &DMatrix<f64>, u: &[f64], w: &[f64]) -> f64 {
    let n = u.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += g[(i, j)] * u[i] * w[j];
        }
    }
    s
}
