//! Functional values, first and second variations and Euler-Lagrange
//! residuals of `∫ E(H, K) dS`.
//!
//! Variations are taken along normal deformations with velocity `u N`, with
//! `N` the sample's oriented normal and `h_ij = ⟨N, r_ij⟩`.

use rayon::prelude::*;
use serde::Serialize;

use crate::calculus::{
    chart_gradient, covariant_hessian, dot_covectors, integrate_values, neumaier_sum, raise, ScalarField,
};
use crate::curvature::NodeGeometry;
use crate::density::{density_jets, EnergyDensity, Partials};
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::surface::SurfaceSample;

/// Relative criticality tolerance applied to the residual's natural scale.
pub const CRITICALITY_TOLERANCE: f64 = 1e-5;

/// Absolute floor added to the criticality tolerance.
pub const CRITICALITY_FLOOR: f64 = 1e-10;

fn guarded_partials(s: &SurfaceSample, e: &dyn EnergyDensity) -> Result<Vec<Partials>> {
    s.nodes()
        .iter()
        .enumerate()
        .map(|(k, n)| {
            let (i, j) = s.domain().split(k);
            e.check(n.scalars.mean, n.scalars.gauss, i, j)?;
            Ok(e.partials(n.scalars.mean, n.scalars.gauss))
        })
        .collect()
}

pub(crate) fn u_jets(u: &ScalarField, s: &SurfaceSample) -> Result<Vec<Jet>> {
    u.check_domain(s.domain())?;
    (0..s.len()).into_par_iter().map(|k| u.node_jet(k, 2)).collect()
}

/// `F = ∫ E(H, K) dS`.
pub fn functional_value(s: &SurfaceSample, e: &dyn EnergyDensity) -> Result<f64> {
    let p = guarded_partials(s, e)?;
    let values: Vec<f64> = p.iter().map(|p| p.e).collect();
    integrate_values(&values, s)
}

/// Integrand of the first variation at every node, with the sum of the
/// absolute values of its terms (a magnitude scale).
pub fn first_variation_integrand(s: &SurfaceSample, e: &dyn EnergyDensity, u: &ScalarField) -> Result<(Vec<f64>, Vec<f64>)> {
    first_variation_integrand_jets(s, e, &u_jets(u, s)?)
}

pub(crate) fn first_variation_integrand_jets(s: &SurfaceSample, e: &dyn EnergyDensity, uj: &[Jet]) -> Result<(Vec<f64>, Vec<f64>)> {
    let p = guarded_partials(s, e)?;
    let k0 = s.space_form().k0();
    let (values, scales) = s
        .nodes()
        .iter()
        .zip(&p)
        .zip(uj)
        .map(|((n, p), uj)| {
            let (h, k) = (n.scalars.mean, n.scalars.gauss);
            let hess = covariant_hessian(&n.forms, uj);
            let lap = hess.trace(&n.forms.metric_inv);
            let h_hess = n.forms.second.contract(&hess, &n.forms.metric_inv);
            let u0 = uj.value();
            let terms = [
                (0.5 * p.e_h + 2.0 * h * p.e_k) * lap,
                ((2.0 * h * h - k + 2.0 * k0) * p.e_h + 2.0 * h * k * p.e_k - 2.0 * h * p.e) * u0,
                -p.e_k * h_hess,
            ];
            (terms.iter().sum::<f64>(), terms.iter().map(|t| t.abs()).sum::<f64>())
        })
        .unzip();
    Ok((values, scales))
}

/// `δF[u]`.
pub fn first_variation(s: &SurfaceSample, e: &dyn EnergyDensity, u: &ScalarField) -> Result<f64> {
    let (values, _) = first_variation_integrand(s, e, u)?;
    integrate_values(&values, s)
}

/// Pointwise residual with the magnitude of its largest term.
fn el_node(n: &NodeGeometry, e: &dyn EnergyDensity, k0: f64) -> (f64, f64) {
    let (h, k) = (n.scalars.mean, n.scalars.gauss);
    let [ej, ehj, ekj] = density_jets(e, &n.mean_jet, &n.gauss_jet);
    let ff = &n.forms;
    let lap_eh = crate::calculus::laplacian_of(ff, &ehj);
    let hess_ek = covariant_hessian(ff, &ekj);
    let lap_ek = hess_ek.trace(&ff.metric_inv);
    let h_hess_ek = ff.second.contract(&hess_ek, &ff.metric_inv);
    let terms = [
        0.5 * lap_eh,
        (2.0 * h * h - k + 2.0 * k0) * ehj.value(),
        2.0 * h * lap_ek,
        -h_hess_ek,
        2.0 * h * k * ekj.value(),
        -2.0 * h * ej.value(),
    ];
    (terms.iter().sum(), terms.iter().fold(0.0f64, |m, t| m.max(t.abs())))
}

/// Euler-Lagrange residual
/// `(½Δ + 2H² − K + 2k₀) E_H + (2HΔ − ⟨h, Hess ·⟩ + 2HK) E_K − 2HE`.
///
/// Derivatives of `E_H`, `E_K` along the surface come from the series of
/// `H` and `K`, so the sample needs order 4 jets.
pub fn el_residual(s: &SurfaceSample, e: &dyn EnergyDensity) -> Result<ScalarField> {
    Ok(el_residual_with_scale(s, e)?.0)
}

fn el_residual_with_scale(s: &SurfaceSample, e: &dyn EnergyDensity) -> Result<(ScalarField, f64)> {
    if s.order() < 4 {
        return Err(Error::InsufficientOrder {
            required: 4,
            available: s.order(),
        });
    }
    guarded_partials(s, e)?;
    let k0 = s.space_form().k0();
    let (values, scales): (Vec<f64>, Vec<f64>) = s.nodes().par_iter().map(|n| el_node(n, e, k0)).unzip();
    let scale = scales.iter().fold(0.0f64, |m, x| m.max(*x));
    Ok((ScalarField::from_values(s.domain(), values)?, scale))
}

/// Which critical points a second variation is taken at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    /// Critical among all variations: the residual vanishes.
    #[default]
    None,
    /// Critical under fixed enclosed volume: the residual is a constant `λ`.
    Volume,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Criticality {
    /// `sup |R − λ|`.
    pub residual_sup: f64,
    /// Largest single term of the residual, over all nodes.
    pub scale: f64,
    pub tolerance: f64,
    /// Area-weighted mean of `R` for volume-constrained problems, else 0.
    pub multiplier: f64,
    pub critical: bool,
}

/// Measures how far `s` is from critical for `e`.
pub fn criticality(s: &SurfaceSample, e: &dyn EnergyDensity, constraint: Constraint) -> Result<Criticality> {
    let (r, scale) = el_residual_with_scale(s, e)?;
    let multiplier = match constraint {
        Constraint::None => 0.0,
        Constraint::Volume => {
            let area = neumaier_sum(s.area_weights().iter().copied());
            integrate_values(r.values(), s)? / area
        }
    };
    let residual_sup = r.values().iter().fold(0.0f64, |m, x| m.max((x - multiplier).abs()));
    let tolerance = CRITICALITY_TOLERANCE * scale + CRITICALITY_FLOOR;
    Ok(Criticality {
        residual_sup,
        scale,
        tolerance,
        multiplier,
        critical: residual_sup <= tolerance,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Validity {
    /// The sample passed the criticality check.
    #[default]
    Critical,
    /// The check failed and the expression was evaluated on request.
    #[serde(rename = "formula outside stated validity")]
    OutsideStatedValidity,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SecondVariationOptions {
    pub constraint: Constraint,
    /// Evaluate even when the criticality check fails.
    pub force: bool,
}

/// The nine integral groups of the second variation, in order:
/// `(Δu)²`, `⟨h,Hess u⟩²`, `Δu⟨h,Hess u⟩`, the `E_K` curvature group,
/// `uΔu`, `u²`, `u⟨h,Hess u⟩`, the `h(∇u,∇u)` / `⟨∇H,∇u⟩` group and `|∇u|²`.
pub type SecondVariationTerms = [f64; 9];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SecondVariation {
    /// The second-variation expression.
    pub value: f64,
    pub terms: SecondVariationTerms,
    /// `λ` for volume-constrained problems, else 0.
    pub multiplier: f64,
    /// `δ²V = ∫ −2H u² dS`.
    pub volume_second_variation: f64,
    /// `value − λ δ²V`.
    pub lagrangian_shifted: f64,
    pub criticality: Criticality,
    pub validity: Validity,
}

/// The nine second-variation integrals without any criticality check.
pub fn second_variation_terms(s: &SurfaceSample, e: &dyn EnergyDensity, u: &ScalarField) -> Result<SecondVariationTerms> {
    if s.order() < 3 {
        return Err(Error::InsufficientOrder {
            required: 3,
            available: s.order(),
        });
    }
    let p = guarded_partials(s, e)?;
    let uj = u_jets(u, s)?;
    let k0 = s.space_form().k0();
    let per_node: Vec<[f64; 9]> = s
        .nodes()
        .par_iter()
        .zip(p.par_iter())
        .zip(uj.par_iter())
        .map(|((n, p), uj)| second_variation_node(n, p, uj, k0))
        .collect();
    let mut out = [0.0; 9];
    for (t, slot) in out.iter_mut().enumerate() {
        let values: Vec<f64> = per_node.iter().map(|x| x[t]).collect();
        *slot = integrate_values(&values, s)?;
    }
    Ok(out)
}

fn second_variation_node(n: &NodeGeometry, p: &Partials, uj: &Jet, k0: f64) -> [f64; 9] {
    let ff = &n.forms;
    let ginv = &ff.metric_inv;
    let (h, k) = (n.scalars.mean, n.scalars.gauss);
    let a = 2.0 * h * h - k + 2.0 * k0;
    let u = uj.value();
    let du = chart_gradient(uj);
    let du_up = raise(ff, du);
    let hess = covariant_hessian(ff, uj);
    let lap = hess.trace(ginv);
    let h_hess = ff.second.contract(&hess, ginv);
    let h2 = ff.second.squared(ginv);
    let h2_hess = h2.contract(&hess, ginv);
    let h2_uu = h2.apply(du_up, du_up);
    let h_uu = ff.second.apply(du_up, du_up);
    let hess_sq = hess.contract(&hess, ginv);
    let grad_u_sq = dot_covectors(ff, du, du);
    let grad_k_u = dot_covectors(ff, chart_gradient(&n.gauss_jet), du);
    let grad_h_u = dot_covectors(ff, chart_gradient(&n.mean_jet), du);
    let Partials {
        e,
        e_h,
        e_k,
        e_hh,
        e_hk,
        e_kk,
    } = *p;
    [
        (0.25 * e_hh + 2.0 * h * e_hk + 4.0 * h * h * e_kk + e_k) * lap * lap,
        e_kk * h_hess * h_hess,
        -(e_hk + 4.0 * h * e_kk) * lap * h_hess,
        e_k * (u * grad_k_u - 3.0 * u * h2_hess - 2.0 * h2_uu - hess_sq),
        (a * e_hh + 2.0 * h * (4.0 * h * h - k + 4.0 * k0) * e_hk + 8.0 * h * h * k * e_kk - 2.0 * h * e_h
            + (3.0 * k0 - k) * e_k
            - e)
            * u
            * lap,
        (a * a * e_hh + 4.0 * h * k * a * e_hk + 4.0 * h * h * k * k * e_kk - 2.0 * k * (k - 2.0 * k0) * e_k
            - 2.0 * h * k * e_h
            + 2.0 * (k - 2.0 * k0) * e)
            * u
            * u,
        (2.0 * e_h + 6.0 * h * e_k - 2.0 * a * e_hk - 4.0 * h * k * e_kk) * u * h_hess,
        (e_h + 4.0 * h * e_k) * h_uu + e_h * u * grad_h_u,
        -(2.0 * (k - k0) * e_k + h * e_h) * grad_u_sq,
    ]
}

/// `δ²F[u]` at a critical immersion.
///
/// Fails with [`Error::NotCritical`] unless the sample is critical for `e`
/// (under the chosen constraint) or `force` is set.
pub fn second_variation(
    s: &SurfaceSample,
    e: &dyn EnergyDensity,
    u: &ScalarField,
    opts: SecondVariationOptions,
) -> Result<SecondVariation> {
    let crit = criticality(s, e, opts.constraint)?;
    let validity = if crit.critical {
        Validity::Critical
    } else if opts.force {
        Validity::OutsideStatedValidity
    } else {
        return Err(Error::NotCritical {
            residual: crit.residual_sup,
            tolerance: crit.tolerance,
        });
    };
    let terms = second_variation_terms(s, e, u)?;
    let value = neumaier_sum(terms.iter().copied());
    let (_, dv2) = volume_variations(s, u)?;
    Ok(SecondVariation {
        value,
        terms,
        multiplier: crit.multiplier,
        volume_second_variation: dv2,
        lagrangian_shifted: value - crit.multiplier * dv2,
        criticality: crit,
        validity,
    })
}

/// `(δV, δ²V) = (∫ u dS, ∫ −2H u² dS)`.
pub fn volume_variations(s: &SurfaceSample, u: &ScalarField) -> Result<(f64, f64)> {
    u.check_domain(s.domain())?;
    let first = integrate_values(u.values(), s)?;
    let second: Vec<f64> = s
        .nodes()
        .iter()
        .zip(u.values())
        .map(|(n, u)| -2.0 * n.scalars.mean * u * u)
        .collect();
    Ok((first, integrate_values(&second, s)?))
}

/// `V = ⅓ ∫ ⟨r, N⟩ dS` for closed surfaces in ℝ³. Its derivative along a
/// normal deformation with velocity `u N` is `∫ u dS`, so with an inward
/// normal `V` is minus the enclosed volume.
pub fn signed_volume(s: &SurfaceSample) -> Result<f64> {
    if !s.space_form().is_euclidean() {
        return Err(Error::NeedsEuclidean("signed volume"));
    }
    let values: Vec<f64> = s
        .nodes()
        .iter()
        .map(|n| (0..3).map(|c| n.position[c] * n.forms.normal[c]).sum::<f64>() / 3.0)
        .collect();
    integrate_values(&values, s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{Area, Bending, KSquared, PWillmore, Willmore};
    use crate::space_form::SpaceForm;
    use crate::surface::{sample_catalog, CatalogSurface};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn sample(surface: CatalogSurface, sf: SpaceForm, n: usize) -> SurfaceSample {
        sample_catalog(surface, &surface.default_domain(n).unwrap(), sf).unwrap()
    }

    fn sphere(r: f64) -> SurfaceSample {
        sample(CatalogSurface::Sphere { r }, SpaceForm::euclidean(), 48)
    }

    #[test]
    fn energies_of_spheres_and_clifford_torus() {
        let s = sphere(1.0);
        assert_relative_eq!(functional_value(&s, &Willmore { k0: 0.0 }).unwrap(), 4.0 * PI, max_relative = 1e-12);
        let s2 = sphere(2.0);
        let p3 = PWillmore::new(3.0).unwrap();
        assert_relative_eq!(functional_value(&s2, &p3).unwrap(), 2.0 * PI, max_relative = 1e-12);
        let sf = SpaceForm::sphere(1.0).unwrap();
        let c = sample(CatalogSurface::CliffordTorusS3 { rho: 1.0 }, sf, 48);
        assert_relative_eq!(
            functional_value(&c, &Willmore { k0: 1.0 }).unwrap(),
            2.0 * PI * PI,
            max_relative = 1e-12
        );
    }

    #[test]
    fn first_variation_examples() {
        let s = sphere(1.0);
        let cos = ScalarField::from_fn(s.domain(), |t, _| t.cos());
        assert!(first_variation(&s, &Willmore { k0: 0.0 }, &cos).unwrap().abs() < 1e-13);
        let one = ScalarField::constant(s.domain(), 1.0);
        let p3 = PWillmore::new(3.0).unwrap();
        assert_relative_eq!(first_variation(&s, &p3, &one).unwrap(), 4.0 * PI, max_relative = 1e-12);
        let zero = ScalarField::zeros(s.domain());
        assert_eq!(first_variation(&s, &Bending { k0: 0.0 }, &zero).unwrap(), 0.0);
        // area: δA = −2 ∫ H u dS = −8πr for u ≡ 1
        let s3 = sphere(3.0);
        let one3 = ScalarField::constant(s3.domain(), 1.0);
        assert_relative_eq!(first_variation(&s3, &Area, &one3).unwrap(), -24.0 * PI, max_relative = 1e-12);
    }

    #[test]
    fn el_residuals() {
        let s = sphere(1.7);
        let r = el_residual(&s, &Willmore { k0: 0.0 }).unwrap();
        assert!(r.max_abs() < 1e-10);
        let r = el_residual(&sphere(1.0), &PWillmore::new(3.0).unwrap()).unwrap();
        assert!(r.values().iter().all(|x| (x - 1.0).abs() < 1e-10));
        let cat = sample(CatalogSurface::Catenoid { c: 1.0 }, SpaceForm::euclidean(), 32);
        let r = el_residual(&cat, &PWillmore::new(1.0).unwrap()).unwrap();
        for (k, n) in cat.nodes().iter().enumerate() {
            assert_relative_eq!(r.value(k), -n.scalars.gauss, max_relative = 1e-10);
        }
        let r = el_residual(&cat, &PWillmore::new(3.0).unwrap()).unwrap();
        assert!(r.max_abs() < 1e-12);
    }

    #[test]
    fn second_variation_on_willmore_sphere() {
        let s = sphere(1.0);
        let w = Willmore { k0: 0.0 };
        let cos = ScalarField::from_fn(s.domain(), |t, _| t.cos());
        let v = second_variation(&s, &w, &cos, SecondVariationOptions::default()).unwrap();
        assert!(v.value.abs() < 1e-11, "{}", v.value);
        let y20 = ScalarField::from_fn(s.domain(), |t, _| (t.cos().powi(2) * 3.0 - 1.0) * 0.5);
        let v = second_variation(&s, &w, &y20, SecondVariationOptions::default()).unwrap();
        assert_relative_eq!(v.value, 12.0 * 4.0 * PI / 5.0, max_relative = 1e-10);
    }

    #[test]
    fn second_variation_requires_criticality() {
        let s = sphere(1.0);
        let p3 = PWillmore::new(3.0).unwrap();
        let cos = ScalarField::from_fn(s.domain(), |t, _| t.cos());
        assert!(matches!(
            second_variation(&s, &p3, &cos, SecondVariationOptions::default()),
            Err(Error::NotCritical { .. })
        ));
        let forced = second_variation(
            &s,
            &p3,
            &cos,
            SecondVariationOptions {
                force: true,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(forced.validity, Validity::OutsideStatedValidity);
        let constrained = second_variation(
            &s,
            &p3,
            &cos,
            SecondVariationOptions {
                constraint: Constraint::Volume,
                force: false,
            },
        )
        .unwrap();
        assert_relative_eq!(constrained.multiplier, 1.0, max_relative = 1e-10);
        assert_relative_eq!(constrained.value, -8.0 * PI / 3.0, max_relative = 1e-10);
    }

    #[test]
    fn ksquared_exercises_curvature_terms() {
        let t = sample(CatalogSurface::Torus { big_r: 2.0, a: 1.0 }, SpaceForm::euclidean(), 32);
        let u = ScalarField::from_fn(t.domain(), |a, b| (*a + *b * 2.0).sin() + a.cos() * 0.3);
        let terms = second_variation_terms(&t, &KSquared, &u).unwrap();
        assert!(terms[1].abs() > 1e-3 && terms[3].abs() > 1e-3, "{terms:?}");
    }

    #[test]
    fn volume_of_concentric_spheres() {
        let s = sphere(1.0);
        let one = ScalarField::constant(s.domain(), 1.0);
        let (d1, d2) = volume_variations(&s, &one).unwrap();
        assert_relative_eq!(d1, 4.0 * PI, max_relative = 1e-12);
        assert_relative_eq!(d2, -8.0 * PI, max_relative = 1e-12);
        assert_relative_eq!(signed_volume(&s).unwrap(), -4.0 * PI / 3.0, max_relative = 1e-12);
    }
}
