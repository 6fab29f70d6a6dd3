use std::fmt::Write;

use serde_json::{json, Value};

use super::WaveProfile;

fn sign(e: f64) -> &'static str {
    if e < 0.0 {
        "-1"
    } else {
        "1"
    }
}

/// CSV with header `t,A_11,..,A_rr` (row-major), then a row `eps,..` with
/// the signs of the frame members, then one row per sample.
pub fn profile_csv(p: &WaveProfile) -> String {
    let r = p.r();
    let mut out = String::from("t");
    for i in 1..=r {
        for j in 1..=r {
            let _ = write!(out, ",A_{i}{j}");
        }
    }
    out.push('\n');
    out.push_str("eps");
    for e in &p.eps {
        let _ = write!(out, ",{}", sign(*e));
    }
    out.push('\n');
    for (t, a) in p.ts.iter().zip(&p.a) {
        let _ = write!(out, "{t:.16e}");
        for i in 0..r {
            for j in 0..r {
                let _ = write!(out, ",{:.16e}", a[(i, j)]);
            }
        }
        out.push('\n');
    }
    out
}

/// JSON with the samples and a provenance block.
pub fn profile_json(p: &WaveProfile) -> Value {
    let rows: Vec<Vec<Vec<f64>>> = p
        .a
        .iter()
        .map(|a| (0..p.r()).map(|i| (0..p.r()).map(|j| a[(i, j)]).collect()).collect())
        .collect();
    json!({
        "r": p.r(),
        "eps": p.eps,
        "timelike": p.timelike,
        "causal_character": p.character.as_str(),
        "t": p.ts,
        "A": rows,
        "ricci_along": p.ric,
        "horizon": p.horizon,
        "residuals": {
            "symmetry": p.symmetry_residual(),
            "trace_identity": p.trace_residual(),
            "slot_asymmetry": p.slot_asymmetry,
        },
        "provenance": p.provenance,
    })
}
