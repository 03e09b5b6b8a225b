//! Fundamental forms and curvature scalars from position jets.
//!
//! Every quantity is computed pointwise from the Taylor series of the
//! immersion at a node, so derivatives of the metric (Christoffel symbols),
//! of the shape operator (Codazzi) and of `H`, `K` come from the same jets
//! rather than from differencing across the grid.
//!
//! Sign conventions: `h_ij = ⟨N, r_ij⟩`, `H = ½ g^{ij} h_ij`,
//! `K_E = det h / det g`, and the intrinsic curvature is `K = K_E + k₀`.

use serde::Serialize;

use crate::calculus::ScalarField;
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::space_form::{Ambient, SpaceForm};
use crate::surface::SurfaceSample;
use crate::tensor::Sym2;

/// Taylor series of the immersion at one parameter point.
#[derive(Debug, Clone, Copy)]
pub struct ImmersionJet {
    pub position: [Jet; 4],
    pub space_form: SpaceForm,
}

impl ImmersionJet {
    pub fn order(&self) -> usize {
        self.position.iter().map(Jet::order).min().unwrap_or(0)
    }

    /// `∂^a_u ∂^b_v r` as an ambient vector.
    pub fn partial(&self, a: usize, b: usize) -> [f64; 4] {
        self.position.map(|c| c.derivative(a, b))
    }
}

/// First and second fundamental forms at a node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FundamentalForms {
    pub metric: Sym2,
    pub metric_inv: Sym2,
    pub second: Sym2,
    pub normal: [f64; 4],
    /// `christoffel[k]` holds `Γ^k_ij`.
    pub christoffel: [Sym2; 2],
    /// `√det g`.
    pub area_element: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvatureScalars {
    pub mean: f64,
    pub extrinsic_gauss: f64,
    pub gauss: f64,
    pub h_norm_sq: f64,
    pub kappa1: f64,
    pub kappa2: f64,
}

/// Everything a sample stores per node.
#[derive(Debug, Clone, Copy)]
pub struct NodeGeometry {
    pub position: [f64; 4],
    pub tangents: [[f64; 4]; 2],
    pub forms: FundamentalForms,
    pub scalars: CurvatureScalars,
    /// Series of `H` about the node (two orders below the position jet).
    pub mean_jet: Jet,
    /// Series of the intrinsic `K`.
    pub gauss_jet: Jet,
    /// `max |∇_k h_ij − ∇_j h_ik|`, when third derivatives are available.
    pub codazzi: Option<f64>,
    /// `K` from the metric alone, when third derivatives are available.
    pub intrinsic_gauss: Option<f64>,
}

struct FormJets {
    tangents: [[Jet; 4]; 2],
    normal: [Jet; 4],
    metric: [Jet; 3],
    second: [Jet; 3],
}

fn sym_index(i: usize, j: usize) -> usize {
    i + j
}

fn form_jets(jet: &ImmersionJet, sign: f64) -> Result<FormJets> {
    let m = jet.order();
    if m < 2 {
        return Err(Error::InsufficientOrder {
            required: 2,
            available: m,
        });
    }
    let sf = &jet.space_form;
    let ru = jet.position.map(|c| c.diff_u());
    let rv = jet.position.map(|c| c.diff_v());
    let p = jet.position.map(|c| c.truncate(m - 1));
    let metric = [sf.dot(&ru, &ru), sf.dot(&ru, &rv), sf.dot(&rv, &rv)];
    let det = metric[0].value() * metric[2].value() - metric[1].value().powi(2);
    let scale = metric[0].value().abs() + metric[2].value().abs();
    if !(det.is_finite() && det > 1e-12 * scale * scale) {
        return Err(Error::DegenerateMetric { i: 0, j: 0, det });
    }
    let n = sf.normal_direction(&p, &ru, &rv);
    let norm = sf.dot(&n, &n).sqrt().recip() * sign;
    let normal: Ambient<Jet> = n.map(|c| c * norm);
    let ruu = ru.map(|c| c.diff_u());
    let ruv = ru.map(|c| c.diff_v());
    let rvv = rv.map(|c| c.diff_v());
    let second = [sf.dot(&normal, &ruu), sf.dot(&normal, &ruv), sf.dot(&normal, &rvv)];
    Ok(FormJets {
        tangents: [ru, rv],
        normal,
        metric,
        second,
    })
}

fn sym_value(t: &[Jet; 3]) -> Sym2 {
    Sym2([t[0].value(), t[1].value(), t[2].value()])
}

// Γ^k_ij as jets from metric jets; one order below the metric.
fn christoffel_jets(metric: &[Jet; 3]) -> [[Jet; 3]; 2] {
    let g = |i: usize, j: usize| metric[sym_index(i, j)];
    let dg = |k: usize, i: usize, j: usize| if k == 0 { g(i, j).diff_u() } else { g(i, j).diff_v() };
    let det = metric[0] * metric[2] - metric[1] * metric[1];
    let inv_det = det.recip();
    let ginv = [metric[2] * inv_det, -(metric[1] * inv_det), metric[0] * inv_det];
    let gi = |i: usize, j: usize| ginv[sym_index(i, j)];
    let mut out = [[Jet::constant(0.0, 0); 3]; 2];
    for (k, row) in out.iter_mut().enumerate() {
        for (slot, (i, j)) in [(0, 0), (0, 1), (1, 1)].into_iter().enumerate() {
            let mut acc: Option<Jet> = None;
            for l in 0..2 {
                let lower = (dg(i, j, l) + dg(j, i, l) - dg(l, i, j)) * 0.5;
                let term = gi(k, l) * lower;
                acc = Some(match acc {
                    None => term,
                    Some(a) => a + term,
                });
            }
            row[slot] = acc.unwrap();
        }
    }
    out
}

/// Unit normal series, one order below the position jet. Needs order ≥ 1.
pub fn normal_jet(jet: &ImmersionJet, sign: f64) -> Result<[Jet; 4]> {
    let m = jet.order();
    if m < 1 {
        return Err(Error::InsufficientOrder {
            required: 1,
            available: m,
        });
    }
    let sf = &jet.space_form;
    let ru = jet.position.map(|c| c.diff_u());
    let rv = jet.position.map(|c| c.diff_v());
    let p = jet.position.map(|c| c.truncate(m - 1));
    let n = sf.normal_direction(&p, &ru, &rv);
    let len_sq = sf.dot(&n, &n);
    if !(len_sq.value() > 0.0) {
        return Err(Error::DegenerateMetric {
            i: 0,
            j: 0,
            det: len_sq.value(),
        });
    }
    let norm = len_sq.sqrt().recip() * sign;
    Ok(n.map(|c| c * norm))
}

/// First and second fundamental forms. `sign` flips the normal.
pub fn fundamental_forms(jet: &ImmersionJet, sign: f64) -> Result<FundamentalForms> {
    let fj = form_jets(jet, sign)?;
    Ok(forms_from_jets(&fj))
}

fn forms_from_jets(fj: &FormJets) -> FundamentalForms {
    let metric = sym_value(&fj.metric);
    let metric_inv = metric.inverse();
    let gam = christoffel_jets(&fj.metric);
    let christoffel = [
        Sym2(gam[0].map(|j| j.value())),
        Sym2(gam[1].map(|j| j.value())),
    ];
    FundamentalForms {
        metric,
        metric_inv,
        second: sym_value(&fj.second),
        normal: fj.normal.map(|c| c.value()),
        christoffel,
        area_element: metric.det().sqrt(),
    }
}

/// Scalar curvatures from the forms.
pub fn curvature_scalars(ff: &FundamentalForms, sf: &SpaceForm) -> CurvatureScalars {
    let mean = 0.5 * ff.second.trace(&ff.metric_inv);
    let extrinsic_gauss = ff.second.det() / ff.metric.det();
    let disc = (mean * mean - extrinsic_gauss).max(0.0).sqrt();
    CurvatureScalars {
        mean,
        extrinsic_gauss,
        gauss: extrinsic_gauss + sf.k0(),
        h_norm_sq: ff.second.contract(&ff.second, &ff.metric_inv),
        kappa1: mean + disc,
        kappa2: mean - disc,
    }
}

/// Full per-node geometry; `sign` is the orientation applied to the normal.
pub fn node_geometry(jet: &ImmersionJet, sign: f64) -> Result<NodeGeometry> {
    let m = jet.order();
    let fj = form_jets(jet, sign)?;
    let forms = forms_from_jets(&fj);
    let scalars = curvature_scalars(&forms, &jet.space_form);

    let g = fj.metric.map(|c| c.truncate(m - 2));
    let det = g[0] * g[2] - g[1] * g[1];
    let h = &fj.second;
    let trace = g[2] * h[0] - g[1] * h[1] * 2.0 + g[0] * h[2];
    let inv_det = det.recip();
    let mean_jet = trace * inv_det * 0.5;
    let gauss_jet = (h[0] * h[2] - h[1] * h[1]) * inv_det + jet.space_form.k0();

    let (codazzi, intrinsic_gauss) = if m >= 3 {
        let gam = christoffel_jets(&fj.metric);
        (
            Some(codazzi_defect(&forms, h)),
            Some(intrinsic_gauss_curvature(&forms, &gam)),
        )
    } else {
        (None, None)
    };

    Ok(NodeGeometry {
        position: jet.position.map(|c| c.value()),
        tangents: fj.tangents.map(|t| t.map(|c| c.value())),
        forms,
        scalars,
        mean_jet,
        gauss_jet,
        codazzi,
        intrinsic_gauss,
    })
}

fn codazzi_defect(forms: &FundamentalForms, h: &[Jet; 3]) -> f64 {
    let hv = |i: usize, j: usize| forms.second.get(i, j);
    let dh = |k: usize, i: usize, j: usize| {
        let c = h[sym_index(i, j)];
        if k == 0 {
            c.du()
        } else {
            c.dv()
        }
    };
    let gam = |p: usize, i: usize, j: usize| forms.christoffel[p].get(i, j);
    let cov = |k: usize, i: usize, j: usize| {
        let mut x = dh(k, i, j);
        for p in 0..2 {
            x -= gam(p, k, i) * hv(p, j) + gam(p, k, j) * hv(i, p);
        }
        x
    };
    let mut worst = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                worst = worst.max((cov(k, i, j) - cov(j, i, k)).abs());
            }
        }
    }
    worst
}

// K = g_{1m} R^m_{212} / det g with R^m_{212} from Christoffel series.
fn intrinsic_gauss_curvature(forms: &FundamentalForms, gam: &[[Jet; 3]; 2]) -> f64 {
    let gv = |k: usize, i: usize, j: usize| gam[k][sym_index(i, j)].value();
    let d = |dir: usize, k: usize, i: usize, j: usize| {
        let c = gam[k][sym_index(i, j)];
        if dir == 0 {
            c.du()
        } else {
            c.dv()
        }
    };
    let mut r = [0.0; 2];
    for (m, rm) in r.iter_mut().enumerate() {
        let mut x = d(0, m, 1, 1) - d(1, m, 0, 1);
        for l in 0..2 {
            x += gv(l, 1, 1) * gv(m, 0, l) - gv(l, 0, 1) * gv(m, 1, l);
        }
        *rm = x;
    }
    let g = &forms.metric;
    (g.get(0, 0) * r[0] + g.get(0, 1) * r[1]) / g.det()
}

/// Per-node Codazzi defect `max |∇_k h_ij − ∇_j h_ik|`. In a space form the
/// ambient curvature term vanishes on tangent index triples, so the defect
/// of a genuine immersion is zero up to rounding.
pub fn codazzi_residual(s: &SurfaceSample) -> Result<ScalarField> {
    let values = s
        .nodes()
        .iter()
        .map(|n| {
            n.codazzi.ok_or(Error::InsufficientOrder {
                required: 3,
                available: s.order(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    ScalarField::from_values(s.domain(), values)
}

/// Per-node `|K_metric − (K_E + k₀)|`, comparing the curvature computed from
/// the metric alone with the extrinsic one. With `include_k0 = false` the
/// ambient term is left out, which is wrong in curved ambients.
pub fn gauss_residual(s: &SurfaceSample, include_k0: bool) -> Result<ScalarField> {
    let k0 = if include_k0 { s.space_form().k0() } else { 0.0 };
    let values = s
        .nodes()
        .iter()
        .map(|n| {
            n.intrinsic_gauss
                .map(|k| (k - (n.scalars.extrinsic_gauss + k0)).abs())
                .ok_or(Error::InsufficientOrder {
                    required: 3,
                    available: s.order(),
                })
        })
        .collect::<Result<Vec<_>>>()?;
    ScalarField::from_values(s.domain(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::CatalogSurface;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn jet_of(surface: CatalogSurface, sf: SpaceForm, u: f64, v: f64, order: usize) -> ImmersionJet {
        ImmersionJet {
            position: surface.eval(Jet::var_u(u, order), Jet::var_v(v, order)),
            space_form: sf,
        }
    }

    #[test]
    fn unit_sphere_equator() {
        let s = CatalogSurface::Sphere { r: 1.0 };
        let j = jet_of(s, SpaceForm::euclidean(), PI / 2.0, 0.0, 4);
        let ff = fundamental_forms(&j, s.orientation()).unwrap();
        assert_relative_eq!(ff.metric.0[0], 1.0, epsilon = 1e-15);
        assert_relative_eq!(ff.metric.0[2], 1.0, epsilon = 1e-15);
        assert_relative_eq!(ff.second.0[0], 1.0, epsilon = 1e-15);
        assert_relative_eq!(ff.second.0[2], 1.0, epsilon = 1e-15);
        let sc = curvature_scalars(&ff, &SpaceForm::euclidean());
        assert_relative_eq!(sc.mean, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn sphere_radius_two() {
        let s = CatalogSurface::Sphere { r: 2.0 };
        let j = jet_of(s, SpaceForm::euclidean(), 0.7, 1.3, 3);
        let g = node_geometry(&j, s.orientation()).unwrap();
        assert_relative_eq!(g.scalars.mean, 0.5, epsilon = 1e-14);
        assert_relative_eq!(g.scalars.gauss, 0.25, epsilon = 1e-14);
        assert_relative_eq!(g.scalars.h_norm_sq, 0.5, epsilon = 1e-14);
        assert_relative_eq!(g.intrinsic_gauss.unwrap(), 0.25, epsilon = 1e-13);
    }

    #[test]
    fn torus_outer_equator_against_eigen_decomposition() {
        let s = CatalogSurface::Torus { big_r: 2.0, a: 1.0 };
        let j = jet_of(s, SpaceForm::euclidean(), 0.0, 0.0, 3);
        let ff = fundamental_forms(&j, s.orientation()).unwrap();
        // brute-force eigenvalues of g⁻¹h via the characteristic polynomial
        let m = ff.second.mixed(&ff.metric_inv);
        let tr = m[0][0] + m[1][1];
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let disc = (tr * tr / 4.0 - det).sqrt();
        let (k1, k2) = (tr / 2.0 + disc, tr / 2.0 - disc);
        assert_relative_eq!(k1, 1.0, epsilon = 1e-14);
        assert_relative_eq!(k2, 1.0 / 3.0, epsilon = 1e-14);
        let sc = curvature_scalars(&ff, &SpaceForm::euclidean());
        assert_relative_eq!(sc.mean, 2.0 / 3.0, epsilon = 1e-14);
        assert_relative_eq!(sc.gauss, 1.0 / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn geodesic_sphere_in_s3() {
        let sf = SpaceForm::sphere(1.0).unwrap();
        let s = CatalogSurface::GeodesicSphereS3 { rho: 1.0, a: PI / 4.0 };
        let g = node_geometry(&jet_of(s, sf, 1.0, 0.4, 3), s.orientation()).unwrap();
        assert_relative_eq!(g.scalars.mean, 1.0, epsilon = 1e-13);
        assert_relative_eq!(g.scalars.extrinsic_gauss, 1.0, epsilon = 1e-13);
        assert_relative_eq!(g.scalars.gauss, 2.0, epsilon = 1e-13);
        assert_relative_eq!(g.intrinsic_gauss.unwrap(), 2.0, epsilon = 1e-12);
        let n = g.forms.normal;
        assert!(sf.dot(&n, &g.position).abs() < 1e-14);
    }

    #[test]
    fn geodesic_sphere_in_h3() {
        let sf = SpaceForm::hyperbolic(1.0).unwrap();
        let a = 0.8f64;
        let s = CatalogSurface::GeodesicSphereH3 { rho: 1.0, a };
        let g = node_geometry(&jet_of(s, sf, 1.0, 0.4, 3), s.orientation()).unwrap();
        assert_relative_eq!(g.scalars.mean, 1.0 / a.tanh(), epsilon = 1e-13);
        assert_relative_eq!(g.scalars.gauss, 1.0 / a.sinh().powi(2), epsilon = 1e-12);
        assert_relative_eq!(g.intrinsic_gauss.unwrap(), g.scalars.gauss, epsilon = 1e-12);
    }

    #[test]
    fn clifford_torus_is_minimal_and_flat() {
        let sf = SpaceForm::sphere(1.0).unwrap();
        let s = CatalogSurface::CliffordTorusS3 { rho: 1.0 };
        let g = node_geometry(&jet_of(s, sf, 0.3, 2.0, 3), 1.0).unwrap();
        assert!(g.scalars.mean.abs() < 1e-15);
        assert_relative_eq!(g.scalars.extrinsic_gauss, -1.0, epsilon = 1e-14);
        assert!(g.scalars.gauss.abs() < 1e-14);
        assert!(g.intrinsic_gauss.unwrap().abs() < 1e-14);
        assert!(g.codazzi.unwrap() < 1e-14);
    }

    #[test]
    fn catenoid_curvature() {
        let s = CatalogSurface::Catenoid { c: 1.0 };
        let x = 0.6f64;
        let g = node_geometry(&jet_of(s, SpaceForm::euclidean(), x, 0.2, 4), 1.0).unwrap();
        assert!(g.scalars.mean.abs() < 1e-14);
        assert_relative_eq!(g.scalars.gauss, -1.0 / x.cosh().powi(4), epsilon = 1e-14);
        assert!(g.mean_jet.coefficients().iter().all(|c| c.abs() < 1e-13));
    }

    #[test]
    fn flipping_orientation_negates_h() {
        let s = CatalogSurface::Torus { big_r: 2.0, a: 1.0 };
        let j = jet_of(s, SpaceForm::euclidean(), 0.4, 1.0, 3);
        let a = node_geometry(&j, 1.0).unwrap();
        let b = node_geometry(&j, -1.0).unwrap();
        assert_eq!(a.scalars.mean, -b.scalars.mean);
        assert_eq!(a.scalars.gauss, b.scalars.gauss);
        assert_eq!(a.scalars.h_norm_sq, b.scalars.h_norm_sq);
    }
}
