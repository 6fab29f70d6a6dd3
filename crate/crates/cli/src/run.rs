//! The pipelines behind each subcommand. Every run returns the files it
//! would write and a summary; nothing here touches the filesystem.

use std::fmt::Write;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use planewave::deviation::{
    causal_independence_check, conjugate_points, correspondence_check, focusing_check, limit_morse_index, morse_bound,
    JacobiSystem, ScanOptions, INDEPENDENCE_TOL,
};
use planewave::evidence::{theorem_evidence, EvidenceOptions, Item};
use planewave::exprlang::eval;
use planewave::geometry::MetricSpec;
use planewave::limit::{
    assemble_plane_wave, flow_profile, profile_along, profile_csv, profile_json, rosen_to_brinkmann, LimitRun,
    RosenData,
};
use planewave::ode;
use planewave::ppwave::{classify_general, classify_plane_wave, ClassifyOptions, PpWave};
use planewave::scenarios;
use planewave::transport::GeodesicOptions;

use crate::config::Config;
use crate::CliError;

/// Command-line overrides applied on top of a config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub scenario: Option<String>,
    pub tol: Option<f64>,
    pub span: Option<(f64, f64)>,
}

/// Files to write, relative to the output directory, and a summary printed
/// on stdout.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub files: Vec<(String, String)>,
    pub summary: Value,
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialise");
    s.push('\n');
    s
}

/// `"A:B"` with `A < B`.
pub fn parse_span(s: &str) -> Result<(f64, f64), CliError> {
    let bad = || CliError::Config(format!("span must look like A:B with A < B, got `{s}`"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    let a: f64 = a.trim().parse().map_err(|_| bad())?;
    let b: f64 = b.trim().parse().map_err(|_| bad())?;
    if !(b > a) {
        return Err(bad());
    }
    Ok((a, b))
}

struct Scenario {
    name: String,
    metric: Arc<MetricSpec>,
}

fn scenario(cfg: &Config, ov: &Overrides) -> Result<Scenario, CliError> {
    if let Some(name) = &ov.scenario {
        return Ok(Scenario {
            name: name.clone(),
            metric: Arc::new(scenarios::builtin(name)?),
        });
    }
    if let Some(m) = &cfg.metric {
        let n = m.coordinates.len();
        let base = m.base.clone().unwrap_or_else(|| vec![0.0; n]);
        let spec = MetricSpec::parse(m.label.clone(), m.coordinates.clone(), &m.components, base)?;
        return Ok(Scenario {
            name: m.label.clone(),
            metric: Arc::new(spec),
        });
    }
    match &cfg.scenario.name {
        Some(name) => Ok(Scenario {
            name: name.clone(),
            metric: Arc::new(scenarios::builtin(name)?),
        }),
        None => Err(CliError::Config(
            "no metric: give [scenario] name, a [metric] table, or --scenario".into(),
        )),
    }
}

/// Default initial data: the base point and, for pp-waves, `∂_t`; for
/// spheres a fixed great circle clear of the chart pole; otherwise the
/// first coordinate direction that is not null, normalised.
fn default_data(sc: &Scenario) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let m = &sc.metric;
    let n = m.dim();
    let x0 = m.base_point().to_vec();
    if sc.name.starts_with("pp-") {
        let mut v = vec![0.0; n];
        v[1] = 1.0;
        return Ok((x0, v));
    }
    if sc.name.starts_with("sphere-") {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        return Ok(scenarios::random_sphere_geodesic(n, &mut rng));
    }
    let g = m.metric_at(&x0)?;
    for k in 0..n {
        let gkk = g[(k, k)];
        if gkk.abs() > 1e-12 {
            let mut v = vec![0.0; n];
            v[k] = 1.0 / gkk.abs().sqrt();
            return Ok((x0, v));
        }
    }
    Err(CliError::Config("cannot pick a default direction; give [geodesic] v0".into()))
}

struct Setup {
    sc: Scenario,
    x0: Vec<f64>,
    v0: Vec<f64>,
    opts: GeodesicOptions,
}

fn setup(cfg: &Config, ov: &Overrides, span: Option<[f64; 2]>) -> Result<Setup, CliError> {
    let sc = scenario(cfg, ov)?;
    let (dx, dv) = default_data(&sc)?;
    let x0 = cfg.geodesic.x0.clone().unwrap_or(dx);
    let v0 = cfg.geodesic.v0.clone().unwrap_or(dv);
    let n = sc.metric.dim();
    if x0.len() != n || v0.len() != n {
        return Err(CliError::Config(format!("x0 and v0 must have {n} components")));
    }
    let span = ov
        .span
        .or(span.map(|s| (s[0], s[1])))
        .or(cfg.geodesic.span.map(|s| (s[0], s[1])))
        .unwrap_or((0.0, 10.0));
    if !(span.1 > span.0) {
        return Err(CliError::Config(format!("empty span ({}, {})", span.0, span.1)));
    }
    let samples = cfg.geodesic.samples.unwrap_or(201);
    if samples < 3 {
        return Err(CliError::Config("samples must be at least 3".into()));
    }
    let opts = GeodesicOptions::new(span, samples).with_tol(cfg.tolerances.ode);
    Ok(Setup { sc, x0, v0, opts })
}

fn run_profile(s: &Setup) -> Result<LimitRun, CliError> {
    Ok(profile_along(s.sc.metric.clone(), &s.x0, &s.v0, &s.opts)?)
}

/// Profile CSV and JSON, and the assembled limit metric as JSON.
pub fn run_limit(cfg: &Config, ov: &Overrides) -> Result<Outcome, CliError> {
    let mut cfg = cfg.clone();
    if let Some(t) = ov.tol {
        cfg.tolerances.ode = t;
    }
    let s = setup(&cfg, ov, None)?;
    let run = run_profile(&s)?;
    let p = &run.profile;
    let pw = assemble_plane_wave(p)?;
    let names = pw.metric.names().to_vec();
    let n = names.len();
    let components: Vec<Vec<String>> = (0..n)
        .map(|i| (0..n).map(|j| pw.metric.component(i, j).display_with(&names).to_string()).collect())
        .collect();
    let limit = json!({
        "coordinates": names,
        "components": components,
        "H": pw.h.display_with(&names).to_string(),
        "base_point": pw.metric.base_point(),
        "profile_domain": [p.domain().0, p.domain().1],
        "provenance": {"metric": s.sc.name, "stage": "assemble_plane_wave"},
    });
    let summary = json!({
        "scenario": s.sc.name,
        "r": p.r(),
        "eps": p.eps,
        "causal_character": p.character.as_str(),
        "samples": p.len(),
        "domain": [p.domain().0, p.domain().1],
        "horizon": p.horizon,
        "max_abs_A": p.max_abs(),
        "energy_drift": run.record.energy_drift(),
        "frame_drift": run.frame.gram_drift,
    });
    Ok(Outcome {
        files: vec![
            ("profile.csv".into(), profile_csv(p)),
            ("profile.json".into(), pretty(&profile_json(p))),
            ("limit_metric.json".into(), pretty(&limit)),
        ],
        summary,
    })
}

/// Classification flags, either of an explicit pp-wave (`[ppwave]`) or of
/// the limit along the configured geodesic.
pub fn run_classify(cfg: &Config, ov: &Overrides) -> Result<Outcome, CliError> {
    let t = &cfg.tolerances;
    let opts = ClassifyOptions {
        tol: ov.tol.unwrap_or(t.classify),
        derivative_tol: t.derivative,
        fd_step: t.fd_step,
    };
    let c = if let (Some(pp), None) = (&cfg.ppwave, &ov.scenario) {
        let wave = PpWave::parse(&pp.h, pp.sigma.clone(), pp.coordinates.clone())?;
        let points = match &pp.points {
            Some(p) => p.clone(),
            None => {
                let mut rng = ChaCha8Rng::seed_from_u64(pp.seed);
                (0..pp.count).map(|_| scenarios::random_point(wave.dim(), 1.0, &mut rng)).collect()
            }
        };
        if points.is_empty() || points.iter().any(|p| p.len() != wave.dim()) {
            return Err(CliError::Config(format!("points must be non-empty with {} components", wave.dim())));
        }
        classify_general(&wave, &points, &opts)?
    } else {
        let s = setup(cfg, ov, None)?;
        let run = run_profile(&s)?;
        classify_plane_wave(&assemble_plane_wave(&run.profile)?, &opts)?
    };
    let out = c.to_json();
    Ok(Outcome {
        files: vec![("classification.json".into(), pretty(&out))],
        summary: out,
    })
}

fn scan_options(cfg: &Config, ov: &Overrides) -> ScanOptions {
    let t = &cfg.tolerances;
    ScanOptions {
        step: cfg.conjugate.step,
        threshold: ov.tol.unwrap_or(t.conjugate),
        t_tol: t.refine,
        ode: ode::Options::with_tol(t.ode),
    }
}

/// Conjugate points along the configured geodesic, with the limit-side
/// index and the Morse bound, plus `t, rho` plot data.
pub fn run_conjugate(cfg: &Config, ov: &Overrides) -> Result<Outcome, CliError> {
    if !(cfg.conjugate.step > 0.0) {
        return Err(CliError::Config("conjugate step must be positive".into()));
    }
    let s = setup(cfg, ov, cfg.conjugate.span)?;
    let run = run_profile(&s)?;
    let span = s.opts.span;
    let opts = scan_options(cfg, ov);
    let mut rep = conjugate_points(&run.profile, span, &opts)?;
    let mut out = rep.to_json();
    if cfg.conjugate.limit_index {
        let pw = assemble_plane_wave(&run.profile)?;
        let li = limit_morse_index(&pw, span, &opts)?;
        let mb = morse_bound(&rep, &li)?;
        rep = rep.with_index(&li);
        out = rep.to_json();
        out["limit_index"] = json!(li.index);
        out["limit_points"] = json!(li.points);
        out["morse_bound_holds"] = json!(mb.holds);
    }
    out["scenario"] = json!(s.sc.name);
    Ok(Outcome {
        files: vec![
            ("conjugate.json".into(), pretty(&out)),
            ("conjugate_curve.csv".into(), rep.curve_csv()),
        ],
        summary: out,
    })
}

fn expand_items(items: &[String]) -> Result<Vec<String>, CliError> {
    let mut out = Vec::new();
    for it in items {
        match it.trim().to_ascii_lowercase().as_str() {
            "all" => {
                out.extend(Item::ALL.iter().map(|i| i.label().to_string()));
                out.extend(["focusing", "morse", "correspondence"].map(String::from));
            }
            "focusing" | "morse" | "correspondence" => out.push(it.trim().to_ascii_lowercase()),
            other => out.push(other.parse::<Item>()?.label().to_string()),
        }
    }
    out.dedup();
    Ok(out)
}

/// Theorem evidence: the seven correspondence items on random geodesics,
/// then focusing, Morse bound and Jacobi correspondence on the configured
/// geodesic.
pub fn run_verify(cfg: &Config, ov: &Overrides) -> Result<Outcome, CliError> {
    let v = &cfg.verify;
    let tol = ov.tol.unwrap_or(cfg.tolerances.evidence);
    let s = setup(cfg, ov, None)?;
    let mut reports = Vec::new();
    for item in expand_items(&v.items)? {
        let rep = match item.as_str() {
            "focusing" => verify_focusing(cfg, &s)?,
            "morse" => verify_morse(cfg, ov, &s)?,
            "correspondence" => verify_correspondence(&s, tol)?,
            label => {
                let opts = EvidenceOptions {
                    geodesics: v.geodesics,
                    span: s.opts.span,
                    samples: s.opts.samples,
                    radius: v.radius,
                    seed: v.seed,
                    tol,
                    ..EvidenceOptions::default()
                };
                theorem_evidence(&s.sc.name, s.sc.metric.clone(), label.parse()?, &opts)?.to_json()
            }
        };
        reports.push(rep);
    }
    let passed: Vec<Value> = reports
        .iter()
        .map(|r| {
            let status = match (&r["status"], r["passed"].as_bool()) {
                (Value::String(s), _) => s.clone(),
                (_, Some(true)) => "pass".into(),
                _ => "fail".into(),
            };
            json!({"item": r["item"], "status": status})
        })
        .collect();
    let out = json!({"kind": "evidence", "scenario": s.sc.name, "reports": reports});
    Ok(Outcome {
        files: vec![("verify.json".into(), pretty(&out))],
        summary: json!({"kind": "evidence", "scenario": s.sc.name, "items": passed}),
    })
}

fn verify_focusing(cfg: &Config, s: &Setup) -> Result<Value, CliError> {
    let t = cfg.verify.horizon;
    let mut opts = s.opts;
    opts.span = (-t, t);
    let run = profile_along(s.sc.metric.clone(), &s.x0, &s.v0, &opts)?;
    let ci = causal_independence_check(&run.profile, INDEPENDENCE_TOL);
    if !ci.independent {
        return Ok(json!({"item": "focusing", "passed": false, "causal_independence": ci}));
    }
    let rep = focusing_check(&run.profile, t, &ScanOptions::default())?;
    let mut out = rep.to_json();
    out["item"] = json!("focusing");
    out["passed"] = json!(rep.verdict.as_str() != "horizon too small");
    Ok(out)
}

fn verify_morse(cfg: &Config, ov: &Overrides, s: &Setup) -> Result<Value, CliError> {
    let run = run_profile(s)?;
    let opts = scan_options(cfg, ov);
    let rep = conjugate_points(&run.profile, s.opts.span, &opts)?;
    let pw = assemble_plane_wave(&run.profile)?;
    let li = limit_morse_index(&pw, s.opts.span, &opts)?;
    let mb = morse_bound(&rep, &li)?;
    let agreement = rep
        .points
        .iter()
        .zip(&li.points)
        .fold(0.0_f64, |m, (a, b)| m.max((a.t - b.t).abs()));
    Ok(json!({
        "item": "morse",
        "span": [s.opts.span.0, s.opts.span.1],
        "base_total": mb.base_total,
        "limit_index": mb.limit_index,
        "bound": 2 * mb.limit_index,
        "location_agreement": agreement,
        "passed": mb.holds && rep.points.len() == li.points.len() && agreement < 1e-6,
    }))
}

fn verify_correspondence(s: &Setup, tol: f64) -> Result<Value, CliError> {
    let run = run_profile(s)?;
    let p = &run.profile;
    let sys = JacobiSystem::new(p, INDEPENDENCE_TOL)?;
    let (lo, hi) = p.domain();
    let a = s.opts.anchor().max(lo);
    let span = (a, hi.min(a + 4.0));
    let pw = assemble_plane_wave(p)?;
    let mut fields = Vec::new();
    let mut passed = true;
    for k in 0..p.r() {
        let mut c = vec![0.0; p.r()];
        c[k] = 1.0;
        let base = sys.field(span, 81, &c, &ode::Options::with_tol(1e-12))?;
        let rep = correspondence_check(&pw, &base, None)?;
        passed &= rep.holds(tol);
        fields.push(json!({"initial_derivative": c, "report": rep}));
    }
    Ok(json!({"item": "correspondence", "span": [span.0, span.1], "fields": fields, "passed": passed}))
}

fn initial_frame(g: &DMatrix<f64>) -> Result<DMatrix<f64>, CliError> {
    let eig = SymmetricEigen::new(g.clone());
    if eig.eigenvalues.iter().any(|l| !(*l > 0.0)) {
        return Err(CliError::Numerical("Rosen metric is not positive definite at the start".into()));
    }
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()));
    Ok(&eig.eigenvectors * d * eig.eigenvectors.transpose())
}

/// Brinkmann profile from Rosen data.
pub fn run_rosen(cfg: &Config, ov: &Overrides) -> Result<Outcome, CliError> {
    let r = cfg
        .rosen
        .as_ref()
        .ok_or_else(|| CliError::Config("rosen2brinkmann needs a [rosen] table".into()))?;
    let data = RosenData::parse(&r.g)?;
    let span = ov.span.or(r.span.map(|s| (s[0], s[1]))).unwrap_or((0.0, 1.0));
    if !(span.1 > span.0) {
        return Err(CliError::Config(format!("empty span ({}, {})", span.0, span.1)));
    }
    let f0 = match &r.f0 {
        Some(rows) => {
            let n = data.r();
            if rows.len() != n || rows.iter().any(|row| row.len() != n) {
                return Err(CliError::Config(format!("f0 must be {n}x{n}")));
            }
            DMatrix::from_fn(n, n, |i, j| rows[i][j])
        }
        None => {
            let t0 = if span.0 <= 0.0 && 0.0 <= span.1 { 0.0 } else { span.0 };
            initial_frame(&data.jets(t0)?[0])?
        }
    };
    let opts = ode::Options::with_tol(ov.tol.unwrap_or(cfg.tolerances.ode));
    let out = rosen_to_brinkmann(&data, span, r.samples.unwrap_or(201), &f0, &opts)?;
    let summary = json!({
        "r": data.r(),
        "span": [span.0, span.1],
        "samples": out.profile.len(),
        "symmetry_residual": out.symmetry_residual,
        "normalization_residual": out.normalization_residual,
        "max_abs_A": out.profile.max_abs(),
    });
    Ok(Outcome {
        files: vec![
            ("rosen_profile.csv".into(), profile_csv(&out.profile)),
            ("rosen.json".into(), pretty(&summary)),
        ],
        summary,
    })
}

/// `A_Z`, its derivative and the Riccati residual along one integral curve
/// of a unit geodesic field.
pub fn run_flow(cfg: &Config, ov: &Overrides) -> Result<Outcome, CliError> {
    let f = cfg
        .flow
        .as_ref()
        .ok_or_else(|| CliError::Config("flowprofile needs a [flow] table".into()))?;
    let sc = scenario(cfg, ov)?;
    let m = sc.metric.clone();
    let n = m.dim();
    if f.z.len() != n || f.x0.len() != n {
        return Err(CliError::Config(format!("z and x0 must have {n} components")));
    }
    let z = f
        .z
        .iter()
        .map(|s| scenarios::parse_on(&m, s))
        .collect::<Result<Vec<_>, _>>()?;
    let v0 = z.iter().map(|e| eval(e, &f.x0)).collect::<Result<Vec<f64>, _>>()?;
    let span = ov
        .span
        .or(f.span.map(|s| (s[0], s[1])))
        .unwrap_or((0.0, 1.0));
    if !(span.1 > span.0) {
        return Err(CliError::Config(format!("empty span ({}, {})", span.0, span.1)));
    }
    let opts = GeodesicOptions::new(span, f.samples.unwrap_or(101)).with_tol(ov.tol.unwrap_or(cfg.tolerances.ode));
    let run = profile_along(m.clone(), &f.x0, &v0, &opts)?;
    let fp = flow_profile(&m, &z, &run.record, &run.frame)?;
    let r = run.profile.r();
    let mut csv = String::from("t");
    for prefix in ["AZ", "dAZ", "A"] {
        for i in 1..=r {
            for j in 1..=r {
                let _ = write!(csv, ",{prefix}_{i}{j}");
            }
        }
    }
    csv.push('\n');
    for s in 0..fp.ts.len() {
        let _ = write!(csv, "{:.16e}", fp.ts[s]);
        for mat in [&fp.az[s], &fp.az_dot[s], &fp.profile.a[s]] {
            for i in 0..r {
                for j in 0..r {
                    let _ = write!(csv, ",{:.16e}", mat[(i, j)]);
                }
            }
        }
        csv.push('\n');
    }
    let summary = json!({
        "scenario": sc.name,
        "span": [span.0, span.1],
        "riccati_residual": fp.residual,
        "geodesic_residual": fp.geodesic_residual,
        "integral_curve_residual": fp.integral_curve_residual,
    });
    Ok(Outcome {
        files: vec![("flow.csv".into(), csv), ("flow.json".into(), pretty(&summary))],
        summary,
    })
}
