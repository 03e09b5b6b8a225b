//! Intrinsic differential operators and surface quadrature.
//!
//! Operators read the metric, inverse metric and Christoffel symbols stored
//! per node in a [`SurfaceSample`] and the derivatives of a field from its
//! series at the node.

mod field;
pub mod spectral;

pub use field::{ScalarField, TensorField02, VectorField, SAMPLED_ORDER};

use rayon::prelude::*;

use crate::curvature::FundamentalForms;
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::surface::SurfaceSample;
use crate::tensor::Sym2;

/// Chart gradient `(f_u, f_v)`.
#[inline]
pub fn chart_gradient(f: &Jet) -> [f64; 2] {
    [f.du(), f.dv()]
}

/// `∇^i f = g^{ij} f_j`.
#[inline]
pub fn raise(ff: &FundamentalForms, df: [f64; 2]) -> [f64; 2] {
    let g = &ff.metric_inv;
    [g.get(0, 0) * df[0] + g.get(0, 1) * df[1], g.get(1, 0) * df[0] + g.get(1, 1) * df[1]]
}

/// `g^{ij} a_i b_j`.
#[inline]
pub fn dot_covectors(ff: &FundamentalForms, a: [f64; 2], b: [f64; 2]) -> f64 {
    ff.metric_inv.apply(a, b)
}

/// `Hess f_ij = f_ij − Γ^k_ij f_k` from a series of order ≥ 2.
#[inline]
pub fn covariant_hessian(ff: &FundamentalForms, f: &Jet) -> Sym2 {
    let (fu, fv) = (f.du(), f.dv());
    let second = [f.derivative(2, 0), f.derivative(1, 1), f.derivative(0, 2)];
    Sym2(std::array::from_fn(|s| {
        second[s] - ff.christoffel[0].0[s] * fu - ff.christoffel[1].0[s] * fv
    }))
}

/// `Δf = g^{ij} Hess f_ij`.
#[inline]
pub fn laplacian_of(ff: &FundamentalForms, f: &Jet) -> f64 {
    covariant_hessian(ff, f).trace(&ff.metric_inv)
}

fn node_jets(f: &ScalarField, s: &SurfaceSample, order: usize) -> Result<Vec<Jet>> {
    f.check_domain(s.domain())?;
    (0..s.len()).into_par_iter().map(|k| f.node_jet(k, order)).collect()
}

pub fn gradient(f: &ScalarField, s: &SurfaceSample) -> Result<VectorField> {
    let jets = node_jets(f, s, 1)?;
    let values = s
        .nodes()
        .iter()
        .zip(&jets)
        .map(|(n, j)| raise(&n.forms, chart_gradient(j)))
        .collect();
    VectorField::new(s.domain(), values)
}

/// `|∇f|² = g^{ij} f_i f_j` per node.
pub fn gradient_norm_sq(f: &ScalarField, s: &SurfaceSample) -> Result<ScalarField> {
    let jets = node_jets(f, s, 1)?;
    let values = s
        .nodes()
        .iter()
        .zip(&jets)
        .map(|(n, j)| {
            let d = chart_gradient(j);
            dot_covectors(&n.forms, d, d)
        })
        .collect();
    ScalarField::from_values(s.domain(), values)
}

pub fn hessian(f: &ScalarField, s: &SurfaceSample) -> Result<TensorField02> {
    let jets = node_jets(f, s, 2)?;
    let values = s
        .nodes()
        .iter()
        .zip(&jets)
        .map(|(n, j)| covariant_hessian(&n.forms, j))
        .collect();
    TensorField02::new(s.domain(), values)
}

pub fn laplace_beltrami(f: &ScalarField, s: &SurfaceSample) -> Result<ScalarField> {
    let jets = node_jets(f, s, 2)?;
    let values = s
        .nodes()
        .iter()
        .zip(&jets)
        .map(|(n, j)| laplacian_of(&n.forms, j))
        .collect();
    ScalarField::from_values(s.domain(), values)
}

/// `⟨a, b⟩ = g^{ik} g^{jl} a_ij b_kl`.
pub fn contract(a: &TensorField02, b: &TensorField02, s: &SurfaceSample) -> Result<ScalarField> {
    for t in [a.domain(), b.domain()] {
        if t != s.domain() {
            return Err(Error::GridMismatch {
                expected: s.domain().shape(),
                found: t.shape(),
            });
        }
    }
    let values = s
        .nodes()
        .iter()
        .enumerate()
        .map(|(k, n)| a.at(k).contract(&b.at(k), &n.forms.metric_inv))
        .collect();
    ScalarField::from_values(s.domain(), values)
}

/// The second fundamental form `h` as a tensor field.
pub fn second_fundamental_form(s: &SurfaceSample) -> TensorField02 {
    let values = s.nodes().iter().map(|n| n.forms.second).collect();
    TensorField02::new(s.domain(), values).expect("sample grid")
}

/// The metric `g` as a tensor field.
pub fn metric(s: &SurfaceSample) -> TensorField02 {
    let values = s.nodes().iter().map(|n| n.forms.metric).collect();
    TensorField02::new(s.domain(), values).expect("sample grid")
}

/// `(h²)_ij = g^{kl} h_li h_kj`.
pub fn h_squared(s: &SurfaceSample) -> TensorField02 {
    let values = s
        .nodes()
        .iter()
        .map(|n| n.forms.second.squared(&n.forms.metric_inv))
        .collect();
    TensorField02::new(s.domain(), values).expect("sample grid")
}

/// Compensated sum in index order, so repeated runs agree bitwise.
pub fn neumaier_sum<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for x in terms {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// `∫ f dS` over node values already computed on `s`.
pub fn integrate_values(values: &[f64], s: &SurfaceSample) -> Result<f64> {
    if values.len() != s.len() {
        return Err(Error::GridMismatch {
            expected: s.domain().shape(),
            found: (values.len(), 1),
        });
    }
    s.check_integrable()?;
    let w = s.area_weights();
    Ok(neumaier_sum(values.iter().zip(w.iter()).map(|(f, w)| f * w)))
}

/// `∫ f dS` by tensor-product quadrature. Needs a closed surface or a sample
/// whose open-domain override is set.
pub fn integrate(f: &ScalarField, s: &SurfaceSample) -> Result<f64> {
    f.check_domain(s.domain())?;
    integrate_values(f.values(), s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space_form::SpaceForm;
    use crate::surface::{sample_catalog, CatalogSurface};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn sphere(r: f64, n: usize) -> SurfaceSample {
        let surface = CatalogSurface::Sphere { r };
        sample_catalog(surface, &surface.default_domain(n).unwrap(), SpaceForm::euclidean()).unwrap()
    }

    #[test]
    fn neumaier_recovers_cancelled_terms() {
        let s = neumaier_sum([1.0, 1e100, 1.0, -1e100]);
        assert_eq!(s, 2.0);
    }

    #[test]
    fn sphere_area_and_willmore() {
        let s = sphere(2.0, 64);
        let one = ScalarField::constant(s.domain(), 1.0);
        assert_relative_eq!(integrate(&one, &s).unwrap(), 16.0 * PI, max_relative = 1e-13);
        let s1 = sphere(1.0, 64);
        let h2: Vec<f64> = s1.nodes().iter().map(|n| n.scalars.mean.powi(2)).collect();
        assert_relative_eq!(integrate_values(&h2, &s1).unwrap(), 4.0 * PI, max_relative = 1e-13);
    }

    #[test]
    fn gradient_and_hessian_of_cos_theta() {
        let s = sphere(1.0, 32);
        let f = ScalarField::from_fn(s.domain(), |t, _| t.cos());
        let g2 = gradient_norm_sq(&f, &s).unwrap();
        let hess = hessian(&f, &s).unwrap();
        let lap = laplace_beltrami(&f, &s).unwrap();
        for (k, n) in s.nodes().iter().enumerate() {
            let (t, _) = s.domain().point(k);
            assert_relative_eq!(g2.value(k), t.sin().powi(2), epsilon = 1e-13);
            let expect = n.forms.metric * (-t.cos());
            assert!((hess.at(k) - expect).max_abs() < 1e-13);
            assert_relative_eq!(lap.value(k), -2.0 * t.cos(), epsilon = 1e-12);
        }
    }

    #[test]
    fn contraction_identities_on_sphere() {
        let s = sphere(1.0, 32);
        let h = second_fundamental_form(&s);
        let g = metric(&s);
        let hg = contract(&h, &g, &s).unwrap();
        assert!(hg.values().iter().all(|x| (x - 2.0).abs() < 1e-13));
        let hh = contract(&h, &h, &s).unwrap();
        for (k, n) in s.nodes().iter().enumerate() {
            assert_relative_eq!(hh.value(k), n.scalars.h_norm_sq, epsilon = 1e-12);
            assert!((h_squared(&s).at(k) - n.forms.metric).max_abs() < 1e-13);
        }
    }

    #[test]
    fn open_domain_needs_override() {
        let surface = CatalogSurface::Catenoid { c: 1.0 };
        let s = sample_catalog(surface, &surface.default_domain(32).unwrap(), SpaceForm::euclidean()).unwrap();
        let one = ScalarField::constant(s.domain(), 1.0);
        assert!(matches!(integrate(&one, &s), Err(Error::NotClosed)));
        assert!(integrate(&one, &s.clone().with_open_override(true)).is_ok());
    }
}
