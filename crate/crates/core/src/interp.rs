//! Piecewise cubic Hermite interpolation of sampled scalar data.
//!
//! Slopes are estimated with the second-order three-point formula on the
//! (possibly nonuniform) grid, so the interpolant is C¹ and reproduces
//! quadratics exactly.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HermiteTable {
    ts: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl HermiteTable {
    /// Build from strictly increasing abscissae and matching values.
    ///
    /// Panics if fewer than two samples are given or the grid is not strictly
    /// increasing; callers construct grids from integrator output where both
    /// hold.
    pub fn new(ts: Vec<f64>, values: Vec<f64>) -> Self {
        assert!(ts.len() >= 2, "interpolation needs at least two samples");
        assert_eq!(ts.len(), values.len());
        assert!(
            ts.windows(2).all(|w| w[1] > w[0]),
            "sample grid must be strictly increasing"
        );
        let slopes = three_point_slopes(&ts, &values);
        Self { ts, values, slopes }
    }

    /// Build with known derivatives at the nodes.
    pub fn with_slopes(ts: Vec<f64>, values: Vec<f64>, slopes: Vec<f64>) -> Self {
        assert!(ts.len() >= 2);
        assert!(ts.len() == values.len() && ts.len() == slopes.len());
        assert!(ts.windows(2).all(|w| w[1] > w[0]));
        Self { ts, values, slopes }
    }

    pub fn ts(&self) -> &[f64] {
        &self.ts
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.ts[0], self.ts[self.ts.len() - 1])
    }

    pub fn contains(&self, t: f64) -> bool {
        let (a, b) = self.domain();
        let slack = 1e-12 * (1.0 + a.abs().max(b.abs()));
        t >= a - slack && t <= b + slack
    }

    fn interval(&self, t: f64) -> usize {
        locate(&self.ts, t)
    }

    /// Value, first and second derivative at `t` (clamped to the domain).
    pub fn eval(&self, t: f64) -> (f64, f64, f64) {
        let i = self.interval(t);
        let (t0, t1) = (self.ts[i], self.ts[i + 1]);
        let h = t1 - t0;
        let s = ((t - t0) / h).clamp(0.0, 1.0);
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.slopes[i] * h, self.slopes[i + 1] * h);

        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        let value = h00 * y0 + h10 * m0 + h01 * y1 + h11 * m1;

        let d00 = 6.0 * s2 - 6.0 * s;
        let d10 = 3.0 * s2 - 4.0 * s + 1.0;
        let d01 = -6.0 * s2 + 6.0 * s;
        let d11 = 3.0 * s2 - 2.0 * s;
        let first = (d00 * y0 + d10 * m0 + d01 * y1 + d11 * m1) / h;

        let e00 = 12.0 * s - 6.0;
        let e10 = 6.0 * s - 4.0;
        let e01 = -12.0 * s + 6.0;
        let e11 = 6.0 * s - 2.0;
        let second = (e00 * y0 + e10 * m0 + e01 * y1 + e11 * m1) / (h * h);

        (value, first, second)
    }

    pub fn value(&self, t: f64) -> f64 {
        self.eval(t).0
    }
}

/// Index `i` of the interval `[ts[i], ts[i+1]]` containing `t`, clamped to
/// the first or last interval outside the grid.
pub fn locate(ts: &[f64], t: f64) -> usize {
    let n = ts.len();
    assert!(n >= 2);
    match ts.binary_search_by(|s| s.total_cmp(&t)) {
        Ok(i) => i.min(n - 2),
        Err(0) => 0,
        Err(i) => (i - 1).min(n - 2),
    }
}

/// Cubic Hermite interpolation of vector samples with known derivatives.
pub fn hermite_vector(ts: &[f64], ys: &[Vec<f64>], dys: &[Vec<f64>], t: f64) -> Vec<f64> {
    let i = locate(ts, t);
    let (t0, t1) = (ts[i], ts[i + 1]);
    let h = t1 - t0;
    let s = (t - t0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = (s3 - 2.0 * s2 + s) * h;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = (s3 - s2) * h;
    (0..ys[i].len())
        .map(|k| h00 * ys[i][k] + h10 * dys[i][k] + h01 * ys[i + 1][k] + h11 * dys[i + 1][k])
        .collect()
}

/// Second-order slope estimates on a nonuniform grid.
pub fn three_point_slopes(ts: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = ts.len();
    if n == 2 {
        let d = (ys[1] - ys[0]) / (ts[1] - ts[0]);
        return vec![d, d];
    }
    let mut out = vec![0.0; n];
    for i in 0..n {
        // Stencil (l, c, r) around i; one-sided at the ends.
        let (l, c, r) = if i == 0 {
            (0, 1, 2)
        } else if i == n - 1 {
            (n - 3, n - 2, n - 1)
        } else {
            (i - 1, i, i + 1)
        };
        let (x0, x1, x2) = (ts[l], ts[c], ts[r]);
        let (y0, y1, y2) = (ys[l], ys[c], ys[r]);
        let x = ts[i];
        // Derivative of the Lagrange quadratic through the stencil.
        let w0 = (2.0 * x - x1 - x2) / ((x0 - x1) * (x0 - x2));
        let w1 = (2.0 * x - x0 - x2) / ((x1 - x0) * (x1 - x2));
        let w2 = (2.0 * x - x0 - x1) / ((x2 - x0) * (x2 - x1));
        out[i] = w0 * y0 + w1 * y1 + w2 * y2;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_quadratics() {
        let ts: Vec<f64> = vec![0.0, 0.3, 0.5, 1.2, 2.0, 2.1];
        let ys: Vec<f64> = ts.iter().map(|t| 1.0 - 2.0 * t + 0.5 * t * t).collect();
        let table = HermiteTable::new(ts, ys);
        for &t in &[0.1, 0.45, 1.0, 1.7, 2.05] {
            let (v, d, dd) = table.eval(t);
            assert!((v - (1.0 - 2.0 * t + 0.5 * t * t)).abs() < 1e-13);
            assert!((d - (-2.0 + t)).abs() < 1e-12);
            assert!((dd - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn constant_data_has_zero_derivatives() {
        let table = HermiteTable::new(vec![0.0, 1.0, 3.0], vec![-1.0, -1.0, -1.0]);
        assert_eq!(table.eval(2.2), (-1.0, 0.0, 0.0));
    }

    #[test]
    fn nodes_are_interpolated_exactly() {
        let ts = vec![0.0, 0.7, 1.1, 2.9];
        let ys = vec![0.3, -1.0, 4.0, 2.5];
        let table = HermiteTable::new(ts.clone(), ys.clone());
        for (t, y) in ts.iter().zip(&ys) {
            assert_eq!(table.value(*t), *y);
        }
    }
}
