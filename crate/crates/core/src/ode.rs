//! Dormand–Prince 5(4) with step-size control.
//!
//! The solver advances through a monotone list of output times and lands on
//! each exactly, recording the state and its derivative there so callers can
//! interpolate with cubic Hermite pieces. It integrates backwards when the
//! output times decrease.

/// Solver settings.
#[derive(Debug, Clone, Copy)]
pub struct Options {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; estimated from the problem when `None`.
    pub h_init: Option<f64>,
    /// Steps shorter than this (relative to |t|+1) count as underflow.
    pub h_min: f64,
    pub max_steps: usize,
    /// Max-norm of the state treated as blow-up.
    pub blowup: f64,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-10,
            h_init: None,
            h_min: 1e-13,
            max_steps: 2_000_000,
            blowup: 1e8,
        }
    }
}

impl Options {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            rtol: tol,
            atol: tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Termination {
    Completed,
    /// State norm exceeded the blow-up threshold after time `t`.
    BlowUp { t: f64 },
    /// Step size collapsed near time `t`.
    StepUnderflow { t: f64 },
    MaxSteps { t: f64 },
}

impl Termination {
    pub fn is_complete(&self) -> bool {
        matches!(self, Termination::Completed)
    }
}

/// States at the output times actually reached.
#[derive(Debug, Clone)]
pub struct Output {
    pub ts: Vec<f64>,
    pub ys: Vec<Vec<f64>>,
    pub dys: Vec<Vec<f64>>,
    pub termination: Termination,
    pub steps: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
// Error coefficients: fifth-order minus embedded fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

struct Stages {
    k: [Vec<f64>; 7],
    tmp: Vec<f64>,
    y_new: Vec<f64>,
}

impl Stages {
    fn new(n: usize) -> Self {
        Self {
            k: std::array::from_fn(|_| vec![0.0; n]),
            tmp: vec![0.0; n],
            y_new: vec![0.0; n],
        }
    }
}

fn combine(out: &mut [f64], y: &[f64], h: f64, terms: &[(f64, &[f64])]) {
    for i in 0..y.len() {
        let mut s = 0.0;
        for (c, k) in terms {
            s += c * k[i];
        }
        out[i] = y[i] + h * s;
    }
}

/// Try one step of size `h` from `(t, y)` with `k[0] = f(t, y)`. On success
/// `stages.y_new` and `stages.k[6] = f(t+h, y_new)` are filled and the scaled
/// error norm is returned.
fn attempt<E, F>(f: &mut F, t: f64, y: &[f64], h: f64, s: &mut Stages, opts: &Options) -> Result<f64, E>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<(), E>,
{
    let Stages { k, tmp, y_new } = s;
    let [k1, k2, k3, k4, k5, k6, k7] = k;
    combine(tmp, y, h, &[(A21, k1)]);
    f(t + C2 * h, tmp, k2)?;
    combine(tmp, y, h, &[(A31, k1), (A32, k2)]);
    f(t + C3 * h, tmp, k3)?;
    combine(tmp, y, h, &[(A41, k1), (A42, k2), (A43, k3)]);
    f(t + C4 * h, tmp, k4)?;
    combine(tmp, y, h, &[(A51, k1), (A52, k2), (A53, k3), (A54, k4)]);
    f(t + C5 * h, tmp, k5)?;
    combine(tmp, y, h, &[(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)]);
    f(t + h, tmp, k6)?;
    combine(y_new, y, h, &[(A71, k1), (A73, k3), (A74, k4), (A75, k5), (A76, k6)]);
    f(t + h, y_new, k7)?;
    let mut err = 0.0;
    for i in 0..y.len() {
        let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        let sc = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
        err += (e / sc).powi(2);
    }
    Ok((err / y.len().max(1) as f64).sqrt())
}

fn initial_step(t_span: f64, y: &[f64], dy: &[f64], opts: &Options) -> f64 {
    let mut d0: f64 = 0.0;
    let mut d1: f64 = 0.0;
    for i in 0..y.len() {
        let sc = opts.atol + opts.rtol * y[i].abs();
        d0 = d0.max((y[i] / sc).abs());
        d1 = d1.max((dy[i] / sc).abs());
    }
    let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h.min(t_span.abs()).max(1e-10)
}

/// Integrate `y' = f(t, y)` from `grid[0]` (where `y = y0`) through every
/// time in `grid`.
///
/// Errors raised by `f` during a trial step are treated as a rejected step;
/// they propagate only when the step cannot be shrunk any further.
pub fn integrate<E, F>(mut f: F, grid: &[f64], y0: &[f64], opts: &Options) -> Result<Output, E>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<(), E>,
{
    let n = y0.len();
    assert!(!grid.is_empty(), "output grid must not be empty");
    let dir = if grid.len() > 1 && grid[grid.len() - 1] < grid[0] { -1.0 } else { 1.0 };
    assert!(
        grid.windows(2).all(|w| (w[1] - w[0]) * dir > 0.0),
        "output grid must be strictly monotone"
    );

    let mut t = grid[0];
    let mut y = y0.to_vec();
    let mut s = Stages::new(n);
    f(t, &y, &mut s.k[0])?;

    let mut out = Output {
        ts: vec![t],
        ys: vec![y.clone()],
        dys: vec![s.k[0].clone()],
        termination: Termination::Completed,
        steps: 0,
    };
    if grid.len() == 1 {
        return Ok(out);
    }

    let total = grid[grid.len() - 1] - t;
    let mut h = opts
        .h_init
        .unwrap_or_else(|| initial_step(total, &y, &s.k[0], opts))
        .abs()
        * dir;
    let mut next = 1;
    let mut last_err: Option<E> = None;

    while next < grid.len() {
        if out.steps >= opts.max_steps {
            out.termination = Termination::MaxSteps { t };
            return Ok(out);
        }
        let target = grid[next];
        let mut lands = false;
        let mut step = h;
        if (t + step - target) * dir >= 0.0 {
            step = target - t;
            lands = true;
        }
        let h_floor = opts.h_min * (1.0 + t.abs());
        if step.abs() < h_floor && !lands {
            if let Some(e) = last_err {
                return Err(e);
            }
            out.termination = Termination::StepUnderflow { t };
            return Ok(out);
        }

        match attempt(&mut f, t, &y, step, &mut s, opts) {
            Err(e) => {
                last_err = Some(e);
                h = step * 0.25;
                if h.abs() < h_floor {
                    return Err(last_err.unwrap());
                }
                continue;
            }
            Ok(err) if err <= 1.0 && s.y_new.iter().all(|v| v.is_finite()) => {
                last_err = None;
                out.steps += 1;
                t = if lands { target } else { t + step };
                std::mem::swap(&mut y, &mut s.y_new);
                s.k.swap(0, 6);
                let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                // A forced landing step says nothing about the natural step.
                h = if lands { h.abs().max((step * fac).abs()) * dir } else { step * fac };
                if lands {
                    out.ts.push(t);
                    out.ys.push(y.clone());
                    out.dys.push(s.k[0].clone());
                    next += 1;
                }
                if y.iter().any(|v| v.abs() > opts.blowup) {
                    out.termination = Termination::BlowUp { t };
                    return Ok(out);
                }
            }
            Ok(err) => {
                let fac = if err.is_finite() { (0.9 * err.powf(-0.2)).clamp(0.1, 0.9) } else { 0.1 };
                h = step * fac;
                if h.abs() < opts.h_min * (1.0 + t.abs()) {
                    out.termination = Termination::StepUnderflow { t };
                    return Ok(out);
                }
            }
        }
    }
    Ok(out)
}

/// Integrate in both directions from `grid[anchor]`, returning samples on the
/// whole (increasing) grid. Truncation on either side shortens the output;
/// the reported termination is the first non-complete one.
pub fn integrate_two_sided<E, F>(
    mut f: F,
    grid: &[f64],
    anchor: usize,
    y0: &[f64],
    opts: &Options,
) -> Result<Output, E>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<(), E>,
{
    let forward = integrate(&mut f, &grid[anchor..], y0, opts)?;
    if anchor == 0 {
        return Ok(forward);
    }
    let back_grid: Vec<f64> = grid[..=anchor].iter().rev().copied().collect();
    let mut backward = integrate(&mut f, &back_grid, y0, opts)?;
    backward.ts.reverse();
    backward.ys.reverse();
    backward.dys.reverse();
    let termination = if !backward.termination.is_complete() {
        backward.termination
    } else {
        forward.termination
    };
    let mut out = Output {
        ts: backward.ts,
        ys: backward.ys,
        dys: backward.dys,
        termination,
        steps: backward.steps + forward.steps,
    };
    out.ts.extend_from_slice(&forward.ts[1..]);
    out.ys.extend_from_slice(&forward.ys[1..]);
    out.dys.extend_from_slice(&forward.dys[1..]);
    Ok(out)
}

/// Uniform grid on `[a, b]` with `samples` points; `anchor` is inserted when
/// it lies strictly inside and is not already a node. Returns the grid and
/// the anchor's index.
pub fn grid_with_anchor(a: f64, b: f64, samples: usize, anchor: f64) -> (Vec<f64>, usize) {
    let samples = samples.max(2);
    let mut ts: Vec<f64> = (0..samples)
        .map(|i| {
            if i == samples - 1 {
                b
            } else {
                a + (b - a) * i as f64 / (samples - 1) as f64
            }
        })
        .collect();
    let tol = 1e-12 * (b - a).abs().max(1.0);
    if let Some(i) = ts.iter().position(|t| (t - anchor).abs() <= tol) {
        ts[i] = anchor;
        return (ts, i);
    }
    let i = ts.partition_point(|t| *t < anchor);
    ts.insert(i, anchor);
    (ts, i)
}
