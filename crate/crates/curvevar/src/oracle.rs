//! Finite-difference oracles along geodesic normal deformations.
//!
//! Every closed-form variation in [`crate::variations`] is checked here by
//! deforming the sample for real and differencing the recomputed quantity.
//! Two step sizes `h` and `h/2` give an observed convergence order, and the
//! two differences are combined by one Richardson step into the oracle value.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::calculus::{chart_gradient, covariant_hessian, dot_covectors, integrate_values, neumaier_sum, raise, ScalarField};
use crate::density::EnergyDensity;
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::surface::{deform_normal_with_order, SurfaceSample};
use crate::tensor::Sym2;
use crate::variations::{
    first_variation_integrand_jets, functional_value, u_jets, second_variation_terms, signed_volume, volume_variations,
};

/// Base step as a fraction of the smallest curvature radius.
pub const STEP_FRACTION: f64 = 1e-3;

/// Roundoff allowance, in units of machine epsilon, for the noise-floor test.
const NOISE_ULPS: f64 = 100.0;

/// Relative floor below which differences are treated as discretisation noise.
const NOISE_RELATIVE: f64 = 1e-11;

/// A formula compared with its finite-difference oracle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariationReport {
    pub quantity: String,
    pub formula_value: f64,
    /// Richardson combination of the `h` and `h/2` differences.
    pub oracle_value: f64,
    pub abs_error: f64,
    /// `abs_error / max(|formula|, |oracle|, scale)`.
    pub rel_error: f64,
    /// Larger of the summed magnitude of the formula's terms and the
    /// reference magnitude from [`reference_scale`].
    pub scale: f64,
    pub fd_step: f64,
    /// `log₂(e(h) / e(h/2))` for the raw differences.
    pub convergence_order: f64,
    /// The `h/2` error is already at roundoff level, so the order says little.
    pub at_noise_floor: bool,
    /// `−λ δ²V` for augmented second variations, else 0. The formula value
    /// excludes it.
    pub multiplier_correction: f64,
}

impl VariationReport {
    /// `rel_error ≤ tol` and the differences converge at order ≥ `min_order`
    /// (or are already at the noise floor).
    pub fn passes(&self, tol: f64, min_order: f64) -> bool {
        self.rel_error <= tol && (self.convergence_order >= min_order || self.at_noise_floor)
    }
}

impl fmt::Display for VariationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: formula {:.10e} oracle {:.10e} rel {:.2e} order {:.2}{}",
            self.quantity,
            self.formula_value,
            self.oracle_value,
            self.rel_error,
            self.convergence_order,
            if self.at_noise_floor { " (noise floor)" } else { "" }
        )
    }
}

/// Which derivative of the functional the oracle takes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum VariationOrder {
    First,
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OracleOptions {
    /// `λ` in `F − λV`. Volume is only defined in ℝ³.
    pub multiplier: Option<f64>,
    /// Base step; defaults to [`default_step`].
    pub step: Option<f64>,
}

/// `STEP_FRACTION × (min curvature radius) / max |u|`.
pub fn default_step(s: &SurfaceSample, u: &ScalarField) -> f64 {
    let radius = 1.0 / max_curvature(s);
    let umax = u.max_abs();
    STEP_FRACTION * radius / if umax > 0.0 { umax } else { 1.0 }
}

fn max_curvature(s: &SurfaceSample) -> f64 {
    let kmax = s
        .nodes()
        .iter()
        .fold(0.0f64, |m, n| m.max(n.scalars.kappa1.abs()).max(n.scalars.kappa2.abs()));
    if kmax > 0.0 {
        kmax
    } else {
        1.0
    }
}

/// Size a variation of the given order would have for a density of typical
/// magnitude: `|E(κ, κ²)| κⁿ ∫ |u|ⁿ dS` with `κ` the largest principal
/// curvature. It keeps relative errors meaningful when the exact variation
/// and all its terms vanish, as for `H²` on a minimal surface.
pub fn reference_scale(s: &SurfaceSample, e: &dyn EnergyDensity, u: &ScalarField, order: VariationOrder) -> Result<f64> {
    let kappa = max_curvature(s);
    let n = match order {
        VariationOrder::First => 1,
        VariationOrder::Second => 2,
    };
    let (h, k) = (kappa, kappa * kappa);
    let density = if e.in_domain(h, k) { e.value(h, k).abs() } else { 0.0 };
    let powers: Vec<f64> = u.values().iter().map(|x| x.abs().powi(n)).collect();
    Ok(density * kappa.powi(n) * integrate_values(&powers, s)?)
}

fn check_step(h: f64) -> Result<f64> {
    if h.is_finite() && h > 0.0 {
        Ok(h)
    } else {
        Err(Error::InvalidParameter(format!("finite-difference step must be positive, got {h}")))
    }
}

struct Convergence {
    oracle: f64,
    e1: f64,
    e2: f64,
    order: f64,
}

fn converge(d1: f64, d2: f64, target: f64, richardson: f64) -> Convergence {
    let e1 = (d1 - target).abs();
    let e2 = (d2 - target).abs();
    Convergence {
        oracle: (richardson * d2 - d1) / (richardson - 1.0),
        e1,
        e2,
        order: observed_order(e1, e2),
    }
}

fn observed_order(e1: f64, e2: f64) -> f64 {
    if e2 == 0.0 {
        if e1 == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (e1 / e2).log2()
    }
}

fn relative(abs: f64, formula: f64, oracle: f64, scale: f64) -> f64 {
    let denom = formula.abs().max(oracle.abs()).max(scale);
    if denom > 0.0 {
        abs / denom
    } else {
        abs
    }
}

/// Compares the first or second variation formula with differences of
/// `t ↦ F(r_t) − λ V(r_t)` along the normal deformation by `u`.
///
/// The second-order formula is the nine-term expression evaluated without a
/// criticality check; `multiplier_correction` carries `−λ δ²V` separately.
pub fn fd_variation_oracle(
    s: &SurfaceSample,
    e: &dyn EnergyDensity,
    u: &ScalarField,
    order: VariationOrder,
    opts: OracleOptions,
) -> Result<VariationReport> {
    Ok(fd_variation_oracle_multi(s, &[e], u, order, opts)?.remove(0))
}

/// [`fd_variation_oracle`] for several densities sharing one set of
/// deformed samples.
pub fn fd_variation_oracle_multi(
    s: &SurfaceSample,
    densities: &[&dyn EnergyDensity],
    u: &ScalarField,
    order: VariationOrder,
    opts: OracleOptions,
) -> Result<Vec<VariationReport>> {
    u.check_domain(s.domain())?;
    let lambda = opts.multiplier.unwrap_or(0.0);
    if lambda != 0.0 && !s.space_form().is_euclidean() {
        return Err(Error::NeedsEuclidean("volume multiplier"));
    }
    let h = check_step(opts.step.unwrap_or_else(|| default_step(s, u)))?;
    let offsets: Vec<f64> = match order {
        VariationOrder::First => vec![-h, h, -0.5 * h, 0.5 * h],
        VariationOrder::Second => vec![-h, h, -0.5 * h, 0.5 * h, 0.0],
    };
    let samples: Vec<SurfaceSample> = offsets
        .par_iter()
        .map(|t| if *t == 0.0 { Ok(s.clone()) } else { deform_normal_with_order(s, u, *t, 2) })
        .collect::<Result<_>>()?;
    let volumes: Vec<f64> = if lambda != 0.0 {
        samples.iter().map(signed_volume).collect::<Result<_>>()?
    } else {
        vec![0.0; samples.len()]
    };
    let (dv, d2v) = if lambda != 0.0 { volume_variations(s, u)? } else { (0.0, 0.0) };
    let uj = match order {
        VariationOrder::First => u_jets(u, s)?,
        VariationOrder::Second => Vec::new(),
    };
    densities
        .iter()
        .map(|e| {
            let values: Vec<f64> = samples
                .iter()
                .zip(&volumes)
                .map(|(d, v)| Ok(functional_value(d, *e)? - lambda * v))
                .collect::<Result<_>>()?;
            report(s, *e, u, &uj, order, h, lambda, dv, d2v, &values)
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn report(
    s: &SurfaceSample,
    e: &dyn EnergyDensity,
    u: &ScalarField,
    uj: &[Jet],
    order: VariationOrder,
    h: f64,
    lambda: f64,
    dv: f64,
    d2v: f64,
    values: &[f64],
) -> Result<VariationReport> {
    let magnitude = values.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let (quantity, formula, scale, correction, d1, d2, k) = match order {
        VariationOrder::First => {
            let (vals, scales) = first_variation_integrand_jets(s, e, uj)?;
            let formula = integrate_values(&vals, s)? - lambda * dv;
            let scale = integrate_values(&scales, s)? + (lambda * dv).abs();
            let d1 = (values[1] - values[0]) / (2.0 * h);
            let d2 = (values[3] - values[2]) / h;
            ("first_variation", formula, scale, 0.0, d1, d2, 1)
        }
        VariationOrder::Second => {
            let terms = second_variation_terms(s, e, u)?;
            let formula = neumaier_sum(terms.iter().copied());
            let scale: f64 = terms.iter().map(|t| t.abs()).sum();
            let c = values[4];
            let d1 = (values[1] - 2.0 * c + values[0]) / (h * h);
            let d2 = (values[3] - 2.0 * c + values[2]) / (0.25 * h * h);
            let name = if lambda != 0.0 {
                "second_variation_augmented"
            } else {
                "second_variation"
            };
            (name, formula, scale, -lambda * d2v, d1, d2, 2)
        }
    };
    let scale = scale.max(reference_scale(s, e, u, order)?);
    let conv = converge(d1, d2, formula, 4.0);
    let abs_error = (conv.oracle - formula).abs();
    let noise = NOISE_ULPS * f64::EPSILON * magnitude / (0.5 * h).powi(k) + NOISE_RELATIVE * scale;
    Ok(VariationReport {
        quantity: quantity.to_string(),
        formula_value: formula,
        oracle_value: conv.oracle,
        abs_error,
        rel_error: relative(abs_error, formula, conv.oracle, scale),
        scale,
        fd_step: h,
        convergence_order: conv.order,
        at_noise_floor: conv.e2 <= noise && conv.e1 <= 4.0 * noise.max(conv.e2),
        multiplier_correction: correction,
    })
}

/// Pointwise quantities with a closed-form evolution along `u N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    /// `g`, evolving as `−2u h`.
    Metric,
    /// `g⁻¹`, evolving as `2u ĥ`.
    InverseMetric,
    /// `√det g`, evolving as `−2Hu √det g`.
    AreaElement,
    /// `2H`, evolving as `Δu + 2u(2H² − K + 2k₀)`.
    TwiceMean,
    /// Intrinsic `K`, evolving as `2HΔu − ⟨h, Hess u⟩ + 2HKu`.
    Gauss,
    /// `Δf` for `f` fixed in the chart.
    LaplacianF,
    /// `⟨h, Hess f⟩` for `f` fixed in the chart.
    HHessF,
}

impl Quantity {
    pub const ALL: [Quantity; 7] = [
        Quantity::Metric,
        Quantity::InverseMetric,
        Quantity::AreaElement,
        Quantity::TwiceMean,
        Quantity::Gauss,
        Quantity::LaplacianF,
        Quantity::HHessF,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::Metric => "g",
            Quantity::InverseMetric => "ginv",
            Quantity::AreaElement => "dS",
            Quantity::TwiceMean => "2H",
            Quantity::Gauss => "K",
            Quantity::LaplacianF => "laplacian_f",
            Quantity::HHessF => "h_hess_f",
        }
    }

    pub fn needs_f(self) -> bool {
        matches!(self, Quantity::LaplacianF | Quantity::HHessF)
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "g" | "metric" => Quantity::Metric,
            "ginv" | "inverse_metric" => Quantity::InverseMetric,
            "dS" | "ds" | "area_element" => Quantity::AreaElement,
            "2H" | "2h" | "mean" => Quantity::TwiceMean,
            "K" | "gauss" => Quantity::Gauss,
            "laplacian_f" => Quantity::LaplacianF,
            "h_hess_f" => Quantity::HHessF,
            other => return Err(Error::UnknownQuantity(other.to_string())),
        })
    }
}

fn sym(t: Sym2) -> Vec<f64> {
    t.0.to_vec()
}

/// Current value of `q` at node `k` of `s`.
fn measure(s: &SurfaceSample, q: Quantity, f: Option<&ScalarField>, k: usize) -> Result<Vec<f64>> {
    let n = s.node(k);
    let ff = &n.forms;
    Ok(match q {
        Quantity::Metric => sym(ff.metric),
        Quantity::InverseMetric => sym(ff.metric_inv),
        Quantity::AreaElement => vec![ff.area_element],
        Quantity::TwiceMean => vec![2.0 * n.scalars.mean],
        Quantity::Gauss => vec![n.scalars.gauss],
        Quantity::LaplacianF | Quantity::HHessF => {
            let fj = f.expect("checked by caller").node_jet(k, 2)?;
            let hess = covariant_hessian(ff, &fj);
            vec![if q == Quantity::LaplacianF {
                hess.trace(&ff.metric_inv)
            } else {
                ff.second.contract(&hess, &ff.metric_inv)
            }]
        }
    })
}

/// Closed-form rate of `q` at node `k`, with the summed magnitude of its terms.
fn evolution(s: &SurfaceSample, q: Quantity, u: &ScalarField, f: Option<&ScalarField>, k: usize) -> Result<(Vec<f64>, f64)> {
    let n = s.node(k);
    let ff = &n.forms;
    let ginv = &ff.metric_inv;
    let k0 = s.space_form().k0();
    let (h, kk) = (n.scalars.mean, n.scalars.gauss);
    let uj = u.node_jet(k, 2)?;
    let uv = uj.value();
    let hess_u = covariant_hessian(ff, &uj);
    let lap_u = hess_u.trace(ginv);
    let abs_sum = |terms: &[f64]| terms.iter().map(|x| x.abs()).sum::<f64>();
    Ok(match q {
        Quantity::Metric => {
            let r = ff.second * (-2.0 * uv);
            let m = r.max_abs();
            (sym(r), m)
        }
        Quantity::InverseMetric => {
            let r = ff.second.raised(ginv) * (2.0 * uv);
            let m = r.max_abs();
            (sym(r), m)
        }
        Quantity::AreaElement => {
            let r = -2.0 * h * uv * ff.area_element;
            (vec![r], r.abs())
        }
        Quantity::TwiceMean => {
            let t = [lap_u, 2.0 * uv * (2.0 * h * h - kk + 2.0 * k0)];
            (vec![t[0] + t[1]], abs_sum(&t))
        }
        Quantity::Gauss => {
            let t = [2.0 * h * lap_u, -ff.second.contract(&hess_u, ginv), 2.0 * h * kk * uv];
            (vec![t.iter().sum()], abs_sum(&t))
        }
        Quantity::LaplacianF | Quantity::HHessF => {
            let fj = f.expect("checked by caller").node_jet(k, 2)?;
            let hess_f = covariant_hessian(ff, &fj);
            let du = chart_gradient(&uj);
            let df = chart_gradient(&fj);
            let (du_up, df_up) = (raise(ff, du), raise(ff, df));
            let grad_h = chart_gradient(&n.mean_jet);
            let grad_k = chart_gradient(&n.gauss_jet);
            let uf = dot_covectors(ff, du, df);
            if q == Quantity::LaplacianF {
                let t = [
                    2.0 * uv * ff.second.contract(&hess_f, ginv),
                    2.0 * uv * dot_covectors(ff, grad_h, df),
                    2.0 * ff.second.apply(du_up, df_up),
                    -2.0 * h * uf,
                ];
                (vec![t.iter().sum()], abs_sum(&t))
            } else {
                let h2 = ff.second.squared(ginv);
                // ∇|h|² = 8H∇H − 2∇K_E, and ∇K_E = ∇K.
                let grad_hsq = [8.0 * h * grad_h[0] - 2.0 * grad_k[0], 8.0 * h * grad_h[1] - 2.0 * grad_k[1]];
                let t = [
                    hess_u.contract(&hess_f, ginv),
                    3.0 * uv * h2.contract(&hess_f, ginv),
                    uv * k0 * hess_f.trace(ginv),
                    2.0 * h2.apply(du_up, df_up),
                    0.5 * uv * dot_covectors(ff, grad_hsq, df),
                    -n.scalars.h_norm_sq * uf,
                ];
                (vec![t.iter().sum()], abs_sum(&t))
            }
        }
    })
}

/// Node-wise comparison of the evolution of `q` with centred differences
/// along the normal deformation by `u`. Values in the report are sup-norms
/// over nodes and components; `f` is held fixed in chart coordinates.
pub fn evolution_check(
    s: &SurfaceSample,
    u: &ScalarField,
    f: Option<&ScalarField>,
    q: Quantity,
    step: Option<f64>,
) -> Result<VariationReport> {
    Ok(evolution_check_multi(s, u, f, &[q], step)?.remove(0))
}

/// [`evolution_check`] for several quantities sharing one set of deformed
/// samples.
pub fn evolution_check_multi(
    s: &SurfaceSample,
    u: &ScalarField,
    f: Option<&ScalarField>,
    quantities: &[Quantity],
    step: Option<f64>,
) -> Result<Vec<VariationReport>> {
    u.check_domain(s.domain())?;
    if let Some(f) = f {
        f.check_domain(s.domain())?;
    }
    for q in quantities {
        if q.needs_f() {
            if f.is_none() {
                return Err(Error::InvalidParameter(format!("quantity {q} needs a field f")));
            }
            if s.order() < 3 {
                return Err(Error::InsufficientOrder {
                    required: 3,
                    available: s.order(),
                });
            }
        }
    }
    let h = check_step(step.unwrap_or_else(|| default_step(s, u)))?;
    let offsets = [-h, h, -0.5 * h, 0.5 * h];
    let samples: Vec<SurfaceSample> = offsets
        .par_iter()
        .map(|t| deform_normal_with_order(s, u, *t, 2))
        .collect::<Result<_>>()?;
    quantities
        .iter()
        .map(|&q| compare_evolution(s, u, f, q, h, &samples))
        .collect()
}

fn compare_evolution(
    s: &SurfaceSample,
    u: &ScalarField,
    f: Option<&ScalarField>,
    q: Quantity,
    h: f64,
    samples: &[SurfaceSample],
) -> Result<VariationReport> {
    let rows: Vec<(Vec<f64>, f64, [Vec<f64>; 4])> = (0..s.len())
        .into_par_iter()
        .map(|k| {
            let (formula, mag) = evolution(s, q, u, f, k)?;
            let m: [Vec<f64>; 4] = [
                measure(&samples[0], q, f, k)?,
                measure(&samples[1], q, f, k)?,
                measure(&samples[2], q, f, k)?,
                measure(&samples[3], q, f, k)?,
            ];
            Ok((formula, mag, m))
        })
        .collect::<Result<_>>()?;
    let (mut fsup, mut osup, mut scale, mut qmag) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let (mut e1, mut e2, mut abs) = (0.0f64, 0.0f64, 0.0f64);
    for (formula, mag, m) in &rows {
        scale = scale.max(*mag);
        for (c, target) in formula.iter().enumerate() {
            let d1 = (m[1][c] - m[0][c]) / (2.0 * h);
            let d2 = (m[3][c] - m[2][c]) / h;
            let conv = converge(d1, d2, *target, 4.0);
            fsup = fsup.max(target.abs());
            osup = osup.max(conv.oracle.abs());
            e1 = e1.max(conv.e1);
            e2 = e2.max(conv.e2);
            abs = abs.max((conv.oracle - target).abs());
            qmag = m.iter().fold(qmag, |acc, v| acc.max(v[c].abs()));
        }
    }
    let noise = NOISE_ULPS * f64::EPSILON * qmag / (0.5 * h) + NOISE_RELATIVE * scale;
    Ok(VariationReport {
        quantity: q.name().to_string(),
        formula_value: fsup,
        oracle_value: osup,
        abs_error: abs,
        rel_error: relative(abs, fsup, osup, scale),
        scale,
        fd_step: h,
        convergence_order: observed_order(e1, e2),
        at_noise_floor: e2 <= noise && e1 <= 4.0 * noise.max(e2),
        multiplier_correction: 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{Area, PWillmore, Willmore};
    use crate::random::random_field;
    use crate::space_form::SpaceForm;
    use crate::surface::{sample_catalog, CatalogSurface};
    use std::f64::consts::PI;

    fn sample(c: CatalogSurface, n: usize) -> SurfaceSample {
        sample_catalog(c, &c.default_domain(n).unwrap(), SpaceForm::euclidean()).unwrap()
    }

    #[test]
    fn first_variation_on_torus_matches_oracle() {
        let s = sample(CatalogSurface::Torus { big_r: 2.0, a: 1.0 }, 48);
        let u = random_field(&s, 11).unwrap();
        let r = fd_variation_oracle(&s, &Willmore { k0: 0.0 }, &u, VariationOrder::First, OracleOptions::default()).unwrap();
        assert!(r.passes(1e-5, 1.9), "{r}");
    }

    #[test]
    fn sphere_first_variations() {
        let s = sample(CatalogSurface::Sphere { r: 1.0 }, 32);
        let one = ScalarField::constant(s.domain(), 1.0);
        let r = fd_variation_oracle(&s, &PWillmore::new(3.0).unwrap(), &one, VariationOrder::First, OracleOptions::default())
            .unwrap();
        assert!((r.oracle_value - 4.0 * PI).abs() < 1e-7 * 4.0 * PI, "{r}");
        let s2 = sample(CatalogSurface::Sphere { r: 2.0 }, 32);
        let one = ScalarField::constant(s2.domain(), 1.0);
        let r = fd_variation_oracle(&s2, &Area, &one, VariationOrder::First, OracleOptions::default()).unwrap();
        assert!((r.oracle_value + 16.0 * PI).abs() < 1e-7 * 16.0 * PI, "{r}");
    }

    #[test]
    fn wrong_formula_shows_no_convergence() {
        let s = sample(CatalogSurface::Torus { big_r: 2.0, a: 1.0 }, 32);
        let u = random_field(&s, 2).unwrap();
        let good = fd_variation_oracle(&s, &Willmore { k0: 0.0 }, &u, VariationOrder::First, OracleOptions::default()).unwrap();
        // A first variation off by a constant factor cannot converge.
        let c = converge(
            good.oracle_value + 1e-3,
            good.oracle_value + 1e-3,
            good.formula_value * 1.01,
            4.0,
        );
        assert!(c.order.abs() < 0.1);
    }

    #[test]
    fn willmore_sphere_second_variation() {
        let s = sample(CatalogSurface::Sphere { r: 1.0 }, 32);
        let u = ScalarField::from_fn(s.domain(), |t, _| {
            let c = t.cos();
            (c * c * 3.0 - 1.0) * 0.5
        });
        let r = fd_variation_oracle(&s, &Willmore { k0: 0.0 }, &u, VariationOrder::Second, OracleOptions::default()).unwrap();
        assert!(r.rel_error < 1e-4, "{r}");
        assert!((r.formula_value - 48.0 * PI / 5.0).abs() < 1e-8, "{r}");
    }

    #[test]
    fn evolution_examples() {
        let s = sample(CatalogSurface::Sphere { r: 1.0 }, 32);
        let one = ScalarField::constant(s.domain(), 1.0);
        let r = evolution_check(&s, &one, None, Quantity::AreaElement, None).unwrap();
        assert!(r.rel_error < 1e-6, "{r}");
        let c = ScalarField::from_fn(s.domain(), |t, _| t.cos());
        let r = evolution_check(&s, &c, None, Quantity::TwiceMean, None).unwrap();
        assert!(r.formula_value < 1e-12 && r.oracle_value < 1e-5, "{r}");
    }

    #[test]
    fn torus_evolutions() {
        let s = sample(CatalogSurface::Torus { big_r: 2.0, a: 1.0 }, 48);
        let u = random_field(&s, 7).unwrap();
        let f = ScalarField::from_fn(s.domain(), |a, _| a.sin());
        for q in Quantity::ALL {
            let r = evolution_check(&s, &u, Some(&f), q, None).unwrap();
            assert!(r.passes(1e-4, 1.9), "{r}");
        }
    }

    #[test]
    fn quantity_names_round_trip() {
        for q in Quantity::ALL {
            assert_eq!(q.name().parse::<Quantity>().unwrap(), q);
        }
        assert!(matches!("nope".parse::<Quantity>(), Err(Error::UnknownQuantity(_))));
    }
}
