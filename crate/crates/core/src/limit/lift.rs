use std::sync::Arc;

use nalgebra::DMatrix;

use super::{wave_profile, WaveProfile};
use crate::error::{Error, Result};
use crate::geometry::MetricSpec;
use crate::scenarios::product_lift;
use crate::transport::{integrate_geodesic, parallel_transport, GeodesicRecord, InitialFrame, ParallelFrame};

/// Outcome of re-deriving a profile in a rotated frame.
#[derive(Debug, Clone)]
pub struct FrameChange {
    pub holds: bool,
    /// `max_t ‖A′(t) − K A(t) Kᵀ‖∞`.
    pub residual: f64,
    pub rotated: WaveProfile,
}

/// Rotate the initial frame by `K`, transport it again, recompute the
/// profile and compare with `K A Kᵀ`. `K` must be orthogonal and must not
/// mix frame members of different causal character.
pub fn frame_change_check(
    rec: &GeodesicRecord,
    frame: &ParallelFrame,
    p: &WaveProfile,
    k: &DMatrix<f64>,
    tol: f64,
) -> Result<FrameChange> {
    let r = p.r();
    if k.nrows() != r || k.ncols() != r {
        return Err(Error::InvalidInput(format!("K must be {r}×{r}")));
    }
    let orth = (k * k.transpose() - DMatrix::identity(r, r)).amax();
    if orth > 1e-10 {
        return Err(Error::InvalidInput(format!("K is not orthogonal (‖KKᵀ − I‖ = {orth:.2e})")));
    }
    for i in 0..r {
        for j in 0..r {
            if p.eps[i] != p.eps[j] && k[(i, j)].abs() > 1e-12 {
                return Err(Error::InvalidInput(format!(
                    "K mixes frame members {} and {} of different causal character",
                    i + 1,
                    j + 1
                )));
            }
        }
    }
    let frame0: InitialFrame = frame.initial(rec.anchor).rotated(k);
    let moved = parallel_transport(rec, &frame0)?;
    let rotated = wave_profile(rec, &moved)?;
    let mut residual: f64 = 0.0;
    for (a, b) in p.a.iter().zip(&rotated.a) {
        residual = residual.max((b - k * a * k.transpose()).amax());
    }
    Ok(FrameChange {
        holds: residual < tol,
        residual,
        rotated,
    })
}

/// Profile of the lightlike lift `t ↦ (t, γ(t))` in `−dτ² + g`, with the
/// frame `(0, E_i)`. For a unit-speed geodesic of a Riemannian metric this
/// reproduces the profile of `γ` itself.
pub fn lift_and_limit(m: &MetricSpec, rec: &GeodesicRecord, frame0: &InitialFrame) -> Result<WaveProfile> {
    if m.index() != 0 {
        return Err(Error::InvalidInput("lift requires a Riemannian base metric".into()));
    }
    if (rec.energy() - 1.0).abs() > 1e-7 {
        return Err(Error::InvalidInput(format!(
            "lift requires a unit-speed geodesic (g(γ′,γ′) = {})",
            rec.energy()
        )));
    }
    let lifted = Arc::new(product_lift(m));
    let t0 = rec.ts[rec.anchor];
    let mut x0 = vec![t0];
    x0.extend_from_slice(rec.x0());
    let mut v0 = vec![1.0];
    v0.extend_from_slice(rec.v0());
    let mut opts = rec.options;
    let (a, b) = rec.domain();
    opts.span = (a, b);
    let lrec = integrate_geodesic(lifted, &x0, &v0, &opts)?;
    let lframe0 = InitialFrame {
        vectors: frame0
            .vectors
            .iter()
            .map(|e| {
                let mut w = vec![0.0];
                w.extend_from_slice(e);
                w
            })
            .collect(),
        eps: frame0.eps.clone(),
        timelike: frame0.timelike,
    };
    let lframe = parallel_transport(&lrec, &lframe0)?;
    let mut p = wave_profile(&lrec, &lframe)?;
    p.provenance.stage = "lift_and_limit".into();
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::limit::profile_along;
    use crate::scenarios;
    use crate::transport::{CausalCharacter, GeodesicOptions};

    #[test]
    fn equator_lift_matches() {
        let m = scenarios::polar_sphere();
        let run = profile_along(
            Arc::new(m.clone()),
            &[std::f64::consts::FRAC_PI_2, 0.0],
            &[0.0, 1.0],
            &GeodesicOptions::new((0.0, 6.0), 61),
        )
        .unwrap();
        let lp = lift_and_limit(&m, &run.record, &run.frame.initial(run.record.anchor)).unwrap();
        assert_eq!(lp.character, CausalCharacter::Lightlike);
        for (a, b) in lp.a.iter().zip(&run.profile.a) {
            assert!((a - b).amax() < 1e-9);
            assert!((a[(0, 0)] + 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_bad_rotations() {
        let m = Arc::new(scenarios::pp_example_ssmm());
        let run = profile_along(m, &[0.0; 4], &[0.0, 1.0, 0.0, 0.0], &GeodesicOptions::new((0.0, 1.0), 5)).unwrap();
        let (c, s) = (0.6, 0.8);
        let k = DMatrix::from_row_slice(2, 2, &[c, -s, s, c]);
        assert!(frame_change_check(&run.record, &run.frame, &run.profile, &k, 1e-8).is_err());
        let flip = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 1.0]);
        let fc = frame_change_check(&run.record, &run.frame, &run.profile, &flip, 1e-8).unwrap();
        assert!(fc.holds);
    }
}
