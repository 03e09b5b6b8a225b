use std::fmt;
use std::sync::Arc;

use once_cell::sync::Lazy;
use serde::{Deserialize, Serialize};

use super::{Immersion, PatchDomain, Provenance};
use crate::error::{Error, Result};
use crate::jet::{coefficient_count, slot, Jet};
use crate::space_form::SpaceForm;

/// Highest derivative order finite-difference jets are built for.
pub const MAX_FD_ORDER: usize = 5;

/// Step control for finite-difference jets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdConfig {
    /// Base step as a fraction of each direction's extent.
    pub step_fraction: f64,
    /// Combine steps `h` and `2h` to cancel the leading error term.
    pub richardson: bool,
}

impl Default for FdConfig {
    fn default() -> Self {
        FdConfig {
            step_fraction: 1e-3,
            richardson: true,
        }
    }
}

/// Fornberg's recursion: weights of the `derivative`-th derivative on the
/// given offsets, evaluated at 0, for unit spacing.
pub fn fornberg_weights(offsets: &[f64], derivative: usize) -> Vec<f64> {
    let n = offsets.len();
    let mut c = vec![vec![0.0; derivative + 1]; n];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = offsets[0];
    for i in 1..n {
        let mn = i.min(derivative);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = offsets[i];
        for j in 0..i {
            let c3 = offsets[i] - offsets[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[derivative]).collect()
}

/// Half-width of the fourth-order central stencil for derivative `a`.
pub(crate) fn half_width(a: usize) -> usize {
    if a == 0 {
        0
    } else {
        (a + 3) / 2
    }
}

// Central fourth-order weights, indexed by derivative order.
static CENTRAL: Lazy<Vec<Vec<f64>>> = Lazy::new(|| {
    (0..=MAX_FD_ORDER)
        .map(|a| {
            let q = half_width(a) as i64;
            let offsets: Vec<f64> = (-q..=q).map(|x| x as f64).collect();
            fornberg_weights(&offsets, a)
        })
        .collect()
});

/// An immersion given as a plain map, differentiated numerically.
#[derive(Clone)]
pub struct CallableImmersion {
    map: Arc<dyn Fn(f64, f64) -> Vec<f64> + Send + Sync>,
    space_form: SpaceForm,
    steps: (f64, f64),
    richardson: bool,
    name: String,
}

impl fmt::Debug for CallableImmersion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CallableImmersion")
            .field("name", &self.name)
            .field("steps", &self.steps)
            .field("richardson", &self.richardson)
            .finish()
    }
}

impl CallableImmersion {
    pub fn new<F>(map: F, space_form: SpaceForm, domain: &PatchDomain, fd: FdConfig) -> Result<Self>
    where
        F: Fn(f64, f64) -> Vec<f64> + Send + Sync + 'static,
    {
        if !(fd.step_fraction.is_finite() && fd.step_fraction > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "finite-difference step fraction must be positive, got {}",
                fd.step_fraction
            )));
        }
        Ok(CallableImmersion {
            map: Arc::new(map),
            space_form,
            steps: (fd.step_fraction * domain.u.extent(), fd.step_fraction * domain.v.extent()),
            richardson: fd.richardson,
            name: "callable".into(),
        })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn steps(&self) -> (f64, f64) {
        self.steps
    }

    fn eval(&self, u: f64, v: f64) -> Result<[f64; 4]> {
        let x = (self.map)(u, v);
        self.space_form.pad(&x)
    }

    /// Partial derivatives `∂^a_u ∂^b_v r` for `a + b ≤ order` with steps `(hu, hv)`.
    fn derivative_table(&self, u0: f64, v0: f64, order: usize, hu: f64, hv: f64) -> Result<Vec<[f64; 4]>> {
        let q = half_width(order) as i64;
        let width = (2 * q + 1) as usize;
        let mut values = vec![[0.0; 4]; width * width];
        for i in -q..=q {
            for j in -q..=q {
                let k = (i + q) as usize * width + (j + q) as usize;
                values[k] = self.eval(u0 + i as f64 * hu, v0 + j as f64 * hv)?;
            }
        }
        let mut out = vec![[0.0; 4]; coefficient_count(order)];
        for d in 0..=order {
            for b in 0..=d {
                let a = d - b;
                let (qa, qb) = (half_width(a) as i64, half_width(b) as i64);
                let (wa, wb) = (&CENTRAL[a], &CENTRAL[b]);
                let mut acc = [0.0; 4];
                for i in -qa..=qa {
                    let wi = wa[(i + qa) as usize];
                    if wi == 0.0 {
                        continue;
                    }
                    for j in -qb..=qb {
                        let w = wi * wb[(j + qb) as usize];
                        if w == 0.0 {
                            continue;
                        }
                        let val = &values[(i + q) as usize * width + (j + q) as usize];
                        for c in 0..4 {
                            acc[c] += w * val[c];
                        }
                    }
                }
                let scale = hu.powi(a as i32) * hv.powi(b as i32);
                out[slot(a, b)] = acc.map(|x| x / scale);
            }
        }
        Ok(out)
    }

    /// Finite-difference partials at a point, combined over steps `h`, `2h`.
    pub fn partials(&self, u0: f64, v0: f64, order: usize) -> Result<Vec<[f64; 4]>> {
        if order > MAX_FD_ORDER {
            return Err(Error::InsufficientOrder {
                required: order,
                available: MAX_FD_ORDER,
            });
        }
        let (hu, hv) = self.steps;
        let fine = self.derivative_table(u0, v0, order, hu, hv)?;
        if !self.richardson {
            return Ok(fine);
        }
        let coarse = self.derivative_table(u0, v0, order, 2.0 * hu, 2.0 * hv)?;
        Ok(fine
            .iter()
            .zip(&coarse)
            .map(|(f, c)| std::array::from_fn(|k| (16.0 * f[k] - c[k]) / 15.0))
            .collect())
    }
}

impl Immersion for CallableImmersion {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn space_form(&self) -> SpaceForm {
        self.space_form
    }

    fn position(&self, u: &Jet, v: &Jet) -> Result<[Jet; 4]> {
        let order = u.order().min(v.order());
        let table = self.partials(u.value(), v.value(), order)?;
        let mut out = [Jet::constant(0.0, order); 4];
        for (c, jet) in out.iter_mut().enumerate() {
            let derivs: Vec<f64> = table.iter().map(|d| d[c]).collect();
            *jet = Jet::from_derivatives(&derivs, order).substitute(u, v);
        }
        Ok(out)
    }

    fn provenance(&self) -> Provenance {
        Provenance::NumericJets
    }
}
