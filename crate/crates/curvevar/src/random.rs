//! Seeded smooth variation fields.
//!
//! A field is a short sum of plane waves in the ambient coordinates,
//! restricted to the surface, so it is smooth and well defined on any chart.
//! On open chart directions it is multiplied by a bump that vanishes with all
//! derivatives before the boundary.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::calculus::ScalarField;
use crate::error::Result;
use crate::jet::{Jet, Scalar};
use crate::surface::{Axis, AxisKind, SurfaceSample};

/// Number of plane waves in a random field.
pub const RANDOM_MODES: usize = 6;

/// Fraction of an open direction covered by the bump's support.
pub const BUMP_SUPPORT: f64 = 0.9;

struct Wave {
    k: [f64; 4],
    phase: f64,
    amplitude: f64,
}

/// `exp(1 − 1/(1 − x²))` for `|x| < 1`, zero outside; equals 1 at the centre.
pub fn bump(x: &Jet) -> Jet {
    if x.value().abs() >= 1.0 {
        return Jet::constant(0.0, x.order());
    }
    let one = Jet::constant(1.0, x.order());
    ((one - *x * *x).recip() * -1.0 + 1.0).exp()
}

fn axis_bump(axis: &Axis, s: &Jet) -> Option<Jet> {
    (axis.kind == AxisKind::Open).then(|| {
        let centre = 0.5 * (axis.start + axis.end);
        let half = 0.5 * axis.extent() * BUMP_SUPPORT;
        bump(&((*s - centre) / half))
    })
}

/// A smooth random field on `s` with `max |u| = 1` over the nodes.
pub fn random_field(s: &SurfaceSample, seed: u64) -> Result<ScalarField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = s.space_form().ambient_dim();
    let size = s
        .nodes()
        .iter()
        .map(|n| n.position[..dim].iter().map(|x| x * x).sum::<f64>().sqrt())
        .fold(0.0f64, f64::max)
        .max(1e-12);
    let offset: f64 = rng.gen_range(-0.5..0.5);
    let waves: Vec<Wave> = (0..RANDOM_MODES)
        .map(|_| {
            let mut k = [0.0; 4];
            for c in k.iter_mut().take(dim) {
                *c = rng.gen_range(-1.5..1.5) / size;
            }
            Wave {
                k,
                phase: rng.gen_range(0.0..2.0 * PI),
                amplitude: rng.gen_range(-1.0..1.0),
            }
        })
        .collect();
    let immersion = s.immersion().clone();
    let domain = *s.domain();
    let raw = ScalarField::try_from_fn(s.domain(), move |u, v| {
        let x = immersion.position(u, v)?;
        let mut acc = u.lift(offset);
        for w in &waves {
            let mut arg = u.lift(w.phase);
            for c in 0..4 {
                if w.k[c] != 0.0 {
                    arg += x[c] * w.k[c];
                }
            }
            acc += arg.cos() * w.amplitude;
        }
        for b in [axis_bump(&domain.u, u), axis_bump(&domain.v, v)].into_iter().flatten() {
            acc *= b;
        }
        Ok(acc)
    })?;
    let m = raw.max_abs();
    Ok(if m > 0.0 { raw.scaled(1.0 / m) } else { raw })
}
