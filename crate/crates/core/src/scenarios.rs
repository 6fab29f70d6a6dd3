//! Built-in metrics and random geodesic data used by the test suites and the
//! command-line runner.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::exprlang::{parse_with_names, Expr};
use crate::geometry::{bilinear, MetricSpec};

fn coords(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

fn names(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

/// Diagonal metric from component strings.
fn diagonal(label: &str, names: Vec<String>, diag: &[String], base: Vec<f64>) -> Result<MetricSpec> {
    let n = names.len();
    let rows: Vec<Vec<String>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { diag[i].clone() } else { "0".into() }).collect())
        .collect();
    MetricSpec::parse(label, names, &rows, base)
}

fn expect(m: Result<MetricSpec>) -> MetricSpec {
    m.expect("built-in metric is well formed")
}

/// Euclidean `ℝⁿ`.
pub fn flat(n: usize) -> MetricSpec {
    expect(diagonal(&format!("flat-{n}"), coords("x", n), &vec!["1".into(); n], vec![0.0; n]))
}

/// Minkowski space of dimension `n` with coordinates `(t, x1, ..)`.
pub fn minkowski(n: usize) -> MetricSpec {
    let mut nm = vec!["t".to_string()];
    nm.extend(coords("x", n - 1));
    let mut d = vec!["-1".to_string()];
    d.extend(vec!["1".to_string(); n - 1]);
    expect(diagonal(&format!("minkowski-{n}"), nm, &d, vec![0.0; n]))
}

/// Unit `Sⁿ` in stereographic coordinates from the north pole:
/// `4 |dx|² / (1 + |x|²)²`.
pub fn sphere(n: usize) -> MetricSpec {
    let nm = coords("x", n);
    let r2 = nm.iter().map(|c| format!("{c}^2")).collect::<Vec<_>>().join(" + ");
    let c = format!("4 / (1 + {r2})^2");
    expect(diagonal(&format!("sphere-{n}"), nm, &vec![c; n], vec![0.0; n]))
}

/// Unit hyperbolic space in the Poincaré ball: `4 |dx|² / (1 − |x|²)²`.
pub fn hyperbolic(n: usize) -> MetricSpec {
    let nm = coords("x", n);
    let r2 = nm.iter().map(|c| format!("{c}^2")).collect::<Vec<_>>().join(" + ");
    let c = format!("4 / (1 - ({r2}))^2");
    expect(diagonal(&format!("hyperbolic-{n}"), nm, &vec![c; n], vec![0.0; n]))
}

/// Unit `S²` in polar coordinates `dθ² + sin²θ dφ²`.
pub fn polar_sphere() -> MetricSpec {
    expect(diagonal(
        "polar-sphere",
        names(&["theta", "phi"]),
        &["1".into(), "sin(theta)^2".into()],
        vec![1.0, 0.0],
    ))
}

/// The split-signature pp-wave-type metric
/// `2 dv dt + (x² − y²) dt² − dx² + dy²` of index 2.
pub fn pp_example_ssmm() -> MetricSpec {
    pp_example_with("x^2 - y^2")
}

/// The same family with a user-supplied `H(t, x, y)`.
pub fn pp_example_with(h: &str) -> MetricSpec {
    let rows = [
        ["0", "1", "0", "0"],
        ["1", h, "0", "0"],
        ["0", "0", "-1", "0"],
        ["0", "0", "0", "1"],
    ];
    let rows: Vec<Vec<String>> = rows.iter().map(|r| r.iter().map(|s| s.to_string()).collect()).collect();
    expect(MetricSpec::parse("pp-example-ssmm", names(&["v", "t", "x", "y"]), &rows, vec![0.0; 4]))
}

/// Lorentzian vacuum plane wave `2 dv dt + (x² − y²) dt² + dx² + dy²`.
pub fn pp_vacuum() -> MetricSpec {
    let rows = [
        ["0", "1", "0", "0"],
        ["1", "x^2 - y^2", "0", "0"],
        ["0", "0", "1", "0"],
        ["0", "0", "0", "1"],
    ];
    let rows: Vec<Vec<String>> = rows.iter().map(|r| r.iter().map(|s| s.to_string()).collect()).collect();
    expect(MetricSpec::parse("pp-vacuum", names(&["v", "t", "x", "y"]), &rows, vec![0.0; 4]))
}

/// Surface of revolution `dr² + (2 + cos r)² dθ²`. Its Gaussian curvature
/// `cos r / (2 + cos r)` changes sign.
pub fn surface_of_revolution() -> MetricSpec {
    expect(diagonal(
        "surface-of-revolution",
        names(&["r", "theta"]),
        &["1".into(), "(2 + cos(r))^2".into()],
        vec![0.5, 0.0],
    ))
}

/// Euclidean Schwarzschild metric with mass 1,
/// `(1 − 2/r) dτ² + dr²/(1 − 2/r) + r² (dθ² + sin²θ dφ²)`. Ricci-flat and
/// not flat.
pub fn schwarzschild_euclid() -> MetricSpec {
    expect(diagonal(
        "schwarzschild-euclid",
        names(&["tau", "r", "theta", "phi"]),
        &[
            "1 - 2/r".into(),
            "1 / (1 - 2/r)".into(),
            "r^2".into(),
            "r^2 * sin(theta)^2".into(),
        ],
        vec![0.0, 6.0, std::f64::consts::FRAC_PI_2, 0.0],
    ))
}

/// A Riemannian 4-manifold with no symmetry, positive definite on
/// `[−1, 1]⁴`.
pub fn generic4() -> MetricSpec {
    let rows = [
        ["1 + 0.3*sin(x2)^2", "0.1*x3", "0", "0.05*x1*x4"],
        ["0.1*x3", "exp(0.2*x1)", "0.1*cos(x4)", "0"],
        ["0", "0.1*cos(x4)", "1 + 0.1*x4^2", "0.1*sin(x1)"],
        ["0.05*x1*x4", "0", "0.1*sin(x1)", "2 + cos(x3)"],
    ];
    let rows: Vec<Vec<String>> = rows.iter().map(|r| r.iter().map(|s| s.to_string()).collect()).collect();
    expect(MetricSpec::parse("generic-4", coords("x", 4), &rows, vec![0.0; 4]))
}

/// A split-signature metric of index 2 with every component nonconstant,
/// nondegenerate on `[−1, 1]⁴`.
pub fn generic_split4() -> MetricSpec {
    let rows = [
        ["-1 - 0.2*x2^2", "0.1*sin(x3)", "0", "0.1*x1"],
        ["0.1*sin(x3)", "-2 + 0.3*cos(x1)", "0.05*x4", "0"],
        ["0", "0.05*x4", "1 + 0.2*x1^2", "0.1*x2*x3"],
        ["0.1*x1", "0", "0.1*x2*x3", "exp(0.1*x2)"],
    ];
    let rows: Vec<Vec<String>> = rows.iter().map(|r| r.iter().map(|s| s.to_string()).collect()).collect();
    expect(MetricSpec::parse("generic-split-4", coords("x", 4), &rows, vec![0.0; 4]))
}

/// `−dτ² + g` on `ℝ × M`, with `τ` prepended to the coordinates of `m`.
pub fn product_lift(m: &MetricSpec) -> MetricSpec {
    let n = m.dim();
    let mut nm = vec![unique_name("tau", m.names())];
    nm.extend(m.names().iter().cloned());
    let mut upper = Vec::with_capacity((n + 1) * (n + 2) / 2);
    upper.push(Expr::constant(-1.0));
    upper.extend((0..n).map(|_| Expr::constant(0.0)));
    for i in 0..n {
        for j in i..n {
            upper.push(m.component(i, j).shift_vars(1));
        }
    }
    let mut base = vec![0.0];
    base.extend_from_slice(m.base_point());
    expect(MetricSpec::from_upper(format!("product-lift({})", m.label()), nm, upper, base))
}

fn unique_name(want: &str, taken: &[String]) -> String {
    let mut s = want.to_string();
    while taken.contains(&s) {
        s.push('_');
    }
    s
}

/// Names accepted by [`builtin`].
pub const BUILTIN_NAMES: &[&str] = &[
    "flat-N",
    "sphere-N",
    "hyperbolic-N",
    "minkowski",
    "minkowski-N",
    "pp-example-ssmm",
    "product-lift",
    "polar-sphere",
    "surface-of-revolution",
    "schwarzschild-euclid",
    "pp-vacuum",
    "generic-4",
    "generic-split-4",
];

/// Resolve a built-in scenario name. `product-lift` is `−dτ²` plus the
/// polar round sphere.
pub fn builtin(name: &str) -> Result<MetricSpec> {
    let sized = |prefix: &str| -> Option<Result<usize>> {
        name.strip_prefix(prefix).map(|s| {
            s.parse::<usize>()
                .ok()
                .filter(|n| (2..=12).contains(n))
                .ok_or_else(|| Error::InvalidInput(format!("bad dimension in scenario name `{name}`")))
        })
    };
    if let Some(n) = sized("flat-") {
        return Ok(flat(n?));
    }
    if let Some(n) = sized("sphere-") {
        return Ok(sphere(n?));
    }
    if let Some(n) = sized("hyperbolic-") {
        return Ok(hyperbolic(n?));
    }
    if let Some(n) = sized("minkowski-") {
        return Ok(minkowski(n?));
    }
    Ok(match name {
        "minkowski" => minkowski(4),
        "pp-example-ssmm" => pp_example_ssmm(),
        "product-lift" => product_lift(&polar_sphere()),
        "polar-sphere" => polar_sphere(),
        "surface-of-revolution" => surface_of_revolution(),
        "schwarzschild-euclid" => schwarzschild_euclid(),
        "pp-vacuum" => pp_vacuum(),
        "generic-4" => generic4(),
        "generic-split-4" => generic_split4(),
        _ => {
            return Err(Error::InvalidInput(format!(
                "unknown scenario `{name}` (known: {})",
                BUILTIN_NAMES.join(", ")
            )))
        }
    })
}

/// Parse a standalone expression against a metric's coordinate names.
pub fn parse_on(m: &MetricSpec, src: &str) -> Result<Expr> {
    Ok(parse_with_names(src, m.names())?)
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Largest `|proj_P N|` accepted for a great circle in plane `P`, i.e. the
/// circle stays at least 30° away from the projection pole `N`.
const POLE_CLEARANCE: f64 = 0.866;

/// Initial data of a random unit-speed great circle on `Sⁿ` in the
/// stereographic chart of [`sphere`]. Circles passing within 30° of the
/// projection pole are rejected so the chart stays well conditioned along
/// the whole circle.
pub fn random_sphere_geodesic<R: Rng + ?Sized>(n: usize, rng: &mut R) -> (Vec<f64>, Vec<f64>) {
    loop {
        let mut p = gaussian(rng, n + 1);
        let np = dot(&p, &p).sqrt();
        p.iter_mut().for_each(|x| *x /= np);
        let mut q = gaussian(rng, n + 1);
        let pq = dot(&p, &q);
        q.iter_mut().zip(&p).for_each(|(q, p)| *q -= pq * p);
        let nq = dot(&q, &q).sqrt();
        if nq < 1e-6 {
            continue;
        }
        q.iter_mut().for_each(|x| *x /= nq);
        let reach = (p[n] * p[n] + q[n] * q[n]).sqrt();
        if reach > POLE_CLEARANCE {
            continue;
        }
        // x = y / (1 − y_N), dx = dy / (1 − y_N) + y dy_N / (1 − y_N)²
        let d = 1.0 - p[n];
        let x0 = p[..n].iter().map(|y| y / d).collect();
        let v0 = (0..n).map(|i| q[i] / d + p[i] * q[n] / (d * d)).collect();
        return (x0, v0);
    }
}

/// A random point in the box of half-width `radius` around the base point
/// and a random direction there, normalised to `|g(v,v)| = 1`.
pub fn random_unit_data<R: Rng + ?Sized>(m: &MetricSpec, radius: f64, rng: &mut R) -> Result<(Vec<f64>, Vec<f64>)> {
    let x: Vec<f64> = m.base_point().iter().map(|b| b + rng.gen_range(-radius..=radius)).collect();
    let n = m.dim();
    let g = m.metric_at(&x)?;
    loop {
        let mut v = gaussian(rng, n);
        let q = bilinear(&g, &v, &v);
        if q.abs() < 1e-3 {
            continue;
        }
        let s = 1.0 / q.abs().sqrt();
        v.iter_mut().for_each(|c| *c *= s);
        return Ok((x, v));
    }
}

/// A random point in `[−radius, radius]ⁿ`.
pub fn random_point<R: Rng + ?Sized>(n: usize, radius: f64, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-radius..=radius)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn builtin_names_resolve() {
        for (name, dim, index) in [
            ("flat-3", 3, 0),
            ("sphere-2", 2, 0),
            ("hyperbolic-3", 3, 0),
            ("minkowski", 4, 1),
            ("minkowski-3", 3, 1),
            ("pp-example-ssmm", 4, 2),
            ("product-lift", 3, 1),
            ("pp-vacuum", 4, 1),
            ("schwarzschild-euclid", 4, 0),
            ("generic-4", 4, 0),
            ("generic-split-4", 4, 2),
        ] {
            let m = builtin(name).unwrap();
            assert_eq!((m.dim(), m.index()), (dim, index), "{name}");
        }
        assert!(builtin("sphere-x").is_err());
        assert!(builtin("torus").is_err());
    }

    #[test]
    fn sphere_data_is_unit_and_away_from_pole() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m = sphere(3);
        for _ in 0..20 {
            let (x, v) = random_sphere_geodesic(3, &mut rng);
            assert!((m.inner(&x, &v, &v).unwrap() - 1.0).abs() < 1e-12);
            assert!(dot(&x, &x).sqrt() < 8.0);
        }
    }
}
