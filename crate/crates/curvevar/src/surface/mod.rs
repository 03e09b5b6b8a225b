//! Parametrized surfaces sampled on structured grids.
//!
//! An [`Immersion`] evaluates the chart map on jets, so every node of a
//! [`SurfaceSample`] carries the Taylor series of the immersion rather than a
//! handful of differenced values.

pub mod callable;
mod catalog;
mod domain;

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use callable::{CallableImmersion, FdConfig};
pub use catalog::{CatalogImmersion, CatalogSurface, CATALOG_NAMES};
pub use domain::{Axis, AxisKind, PatchDomain, MIN_NODES};

use crate::calculus::ScalarField;
use crate::curvature::{node_geometry, normal_jet, ImmersionJet, NodeGeometry};
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::space_form::SpaceForm;

/// Jet order stored at each node unless asked otherwise. Four derivatives of
/// the position give two derivatives of `H` and `K`.
pub const DEFAULT_ORDER: usize = 4;

/// How the node jets were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Analytic,
    NumericJets,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    #[default]
    AsComputed,
    Flip,
}

/// A chart map into a space form, evaluated on jets.
pub trait Immersion: Send + Sync {
    fn name(&self) -> String;

    fn space_form(&self) -> SpaceForm;

    /// The chart map composed with `u`, `v`. Plain values are order-0 jets.
    fn position(&self, u: &Jet, v: &Jet) -> Result<[Jet; 4]>;

    /// Sign applied to the computed normal.
    fn orientation_sign(&self) -> f64 {
        1.0
    }

    fn provenance(&self) -> Provenance {
        Provenance::Analytic
    }
}

/// An immersion with its per-node geometry on a grid.
#[derive(Clone)]
pub struct SurfaceSample {
    domain: PatchDomain,
    immersion: Arc<dyn Immersion>,
    orientation: Orientation,
    order: usize,
    nodes: Arc<Vec<NodeGeometry>>,
    area_weights: Arc<Vec<f64>>,
    open_override: bool,
}

impl fmt::Debug for SurfaceSample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SurfaceSample")
            .field("immersion", &self.immersion.name())
            .field("shape", &self.domain.shape())
            .field("order", &self.order)
            .field("orientation", &self.orientation)
            .finish()
    }
}

impl SurfaceSample {
    /// Samples `immersion` on `domain` with jets of the given order.
    pub fn new(
        immersion: Arc<dyn Immersion>,
        domain: &PatchDomain,
        orientation: Orientation,
        order: usize,
    ) -> Result<Self> {
        let sf = immersion.space_form();
        let sign = immersion.orientation_sign() * orientation_factor(orientation);
        let nodes = (0..domain.len())
            .into_par_iter()
            .map(|k| {
                let (i, j) = domain.split(k);
                let (u, v) = domain.point(k);
                let position = immersion.position(&Jet::var_u(u, order), &Jet::var_v(v, order))?;
                let p0 = position.map(|c| c.value());
                let defect = sf.quadric_defect(&p0[..sf.ambient_dim()])?;
                if defect > 1e-9 {
                    return Err(Error::OffQuadric { defect });
                }
                node_geometry(
                    &ImmersionJet {
                        position,
                        space_form: sf,
                    },
                    sign,
                )
                .map_err(|e| match e {
                    Error::DegenerateMetric { det, .. } => Error::DegenerateMetric { i, j, det },
                    other => other,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let area_weights = domain
            .weights()
            .iter()
            .zip(&nodes)
            .map(|(w, n)| w * n.forms.area_element)
            .collect();
        Ok(SurfaceSample {
            domain: *domain,
            immersion,
            orientation,
            order,
            nodes: Arc::new(nodes),
            area_weights: Arc::new(area_weights),
            open_override: false,
        })
    }

    pub fn domain(&self) -> &PatchDomain {
        &self.domain
    }

    pub fn space_form(&self) -> SpaceForm {
        self.immersion.space_form()
    }

    pub fn immersion(&self) -> &Arc<dyn Immersion> {
        &self.immersion
    }

    pub fn name(&self) -> String {
        self.immersion.name()
    }

    pub fn provenance(&self) -> Provenance {
        self.immersion.provenance()
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    /// Jet order of the stored position series.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn nodes(&self) -> &[NodeGeometry] {
        &self.nodes
    }

    pub fn node(&self, k: usize) -> &NodeGeometry {
        &self.nodes[k]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Sign applied to the chart normal.
    pub fn sign(&self) -> f64 {
        self.immersion.orientation_sign() * orientation_factor(self.orientation)
    }

    /// The same immersion with the opposite normal.
    pub fn flipped(&self) -> Result<Self> {
        let orientation = match self.orientation {
            Orientation::AsComputed => Orientation::Flip,
            Orientation::Flip => Orientation::AsComputed,
        };
        let mut s = SurfaceSample::new(self.immersion.clone(), &self.domain, orientation, self.order)?;
        s.open_override = self.open_override;
        Ok(s)
    }

    /// The same immersion with jets of another order.
    pub fn with_order(&self, order: usize) -> Result<Self> {
        let mut s = SurfaceSample::new(self.immersion.clone(), &self.domain, self.orientation, order)?;
        s.open_override = self.open_override;
        Ok(s)
    }

    /// Allows quadrature over an open domain. Only meaningful for integrands
    /// that vanish near the boundary.
    pub fn with_open_override(mut self, allow: bool) -> Self {
        self.open_override = allow;
        self
    }

    pub fn open_override(&self) -> bool {
        self.open_override
    }

    pub(crate) fn check_integrable(&self) -> Result<()> {
        if self.domain.is_closed() || self.open_override {
            Ok(())
        } else {
            Err(Error::NotClosed)
        }
    }

    /// Quadrature weights for `dS`, one per node.
    pub fn area_weights(&self) -> &[f64] {
        &self.area_weights
    }

    /// Position series about an arbitrary chart point.
    pub fn position_jet(&self, u: f64, v: f64, order: usize) -> Result<ImmersionJet> {
        Ok(ImmersionJet {
            position: self.immersion.position(&Jet::var_u(u, order), &Jet::var_v(v, order))?,
            space_form: self.space_form(),
        })
    }

    /// Writes `u,v,x,y,z[,w]` rows with a header.
    pub fn write_positions_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let dim = self.space_form().ambient_dim();
        let names = ["x", "y", "z", "w"];
        writeln!(w, "u,v,{}", names[..dim].join(","))?;
        for (k, n) in self.nodes.iter().enumerate() {
            let (u, v) = self.domain.point(k);
            write!(w, "{u:.17e},{v:.17e}")?;
            for c in &n.position[..dim] {
                write!(w, ",{c:.17e}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

fn orientation_factor(o: Orientation) -> f64 {
    match o {
        Orientation::AsComputed => 1.0,
        Orientation::Flip => -1.0,
    }
}

/// Samples a catalog surface with analytic jets.
pub fn sample_catalog(surface: CatalogSurface, domain: &PatchDomain, sf: SpaceForm) -> Result<SurfaceSample> {
    surface.validate(&sf)?;
    surface.check_domain(domain)?;
    let immersion = CatalogImmersion {
        surface,
        space_form: sf,
    };
    SurfaceSample::new(Arc::new(immersion), domain, Orientation::AsComputed, DEFAULT_ORDER)
}

/// Samples the catalog surface `name` with the given parameters.
pub fn sample_builtin(
    name: &str,
    params: &BTreeMap<String, f64>,
    domain: &PatchDomain,
    sf: SpaceForm,
) -> Result<SurfaceSample> {
    sample_catalog(CatalogSurface::from_params(name, params, &sf)?, domain, sf)
}

/// Samples a user map `(u, v) ↦ ambient point` with finite-difference jets.
pub fn sample_callable<F>(f: F, domain: &PatchDomain, sf: SpaceForm, fd: FdConfig) -> Result<SurfaceSample>
where
    F: Fn(f64, f64) -> Vec<f64> + Send + Sync + 'static,
{
    let immersion = CallableImmersion::new(f, sf, domain, fd)?;
    SurfaceSample::new(Arc::new(immersion), domain, Orientation::AsComputed, DEFAULT_ORDER)
}

/// The immersion `x ↦ exp_{r(x)}(t u(x) N(x))`.
///
/// The deformed series at a point is built from the base series one order
/// higher: the normal costs one derivative, the geodesic flow none.
#[derive(Clone)]
pub struct NormalDeformation {
    base: Arc<dyn Immersion>,
    sign: f64,
    field: ScalarField,
    t: f64,
}

impl NormalDeformation {
    pub fn new(sample: &SurfaceSample, field: &ScalarField, t: f64) -> Result<Self> {
        field.check_domain(sample.domain())?;
        Ok(NormalDeformation {
            base: sample.immersion().clone(),
            sign: sample.sign(),
            field: field.clone(),
            t,
        })
    }

    fn at_seed(&self, u0: f64, v0: f64, order: usize) -> Result<[Jet; 4]> {
        let sf = self.base.space_form();
        let base = ImmersionJet {
            position: self.base.position(&Jet::var_u(u0, order + 1), &Jet::var_v(v0, order + 1))?,
            space_form: sf,
        };
        let normal = normal_jet(&base, self.sign)?;
        let p = base.position.map(|c| c.truncate(order));
        let u = self.field.jet_at(&Jet::var_u(u0, order), &Jet::var_v(v0, order))?;
        Ok(sf.flow(&p, &normal, u * self.t))
    }
}

impl Immersion for NormalDeformation {
    fn name(&self) -> String {
        format!("{} (normal deformation, t = {})", self.base.name(), self.t)
    }

    fn space_form(&self) -> SpaceForm {
        self.base.space_form()
    }

    fn position(&self, u: &Jet, v: &Jet) -> Result<[Jet; 4]> {
        let order = u.order().min(v.order());
        let seed = self.at_seed(u.value(), v.value(), order)?;
        if u.is_u_seed() && v.is_v_seed() {
            return Ok(seed);
        }
        Ok(seed.map(|c| c.substitute(u, v)))
    }

    fn orientation_sign(&self) -> f64 {
        self.sign
    }

    fn provenance(&self) -> Provenance {
        self.base.provenance()
    }
}

/// Moves every point of `s` a geodesic distance `t · u` along its normal.
pub fn deform_normal(s: &SurfaceSample, u: &ScalarField, t: f64) -> Result<SurfaceSample> {
    deform_normal_with_order(s, u, t, s.order())
}

/// [`deform_normal`] with an explicit jet order for the deformed sample.
pub fn deform_normal_with_order(s: &SurfaceSample, u: &ScalarField, t: f64, order: usize) -> Result<SurfaceSample> {
    let deformation = NormalDeformation::new(s, u, t)?;
    let mut out = SurfaceSample::new(Arc::new(deformation), s.domain(), Orientation::AsComputed, order)?;
    out.open_override = s.open_override;
    Ok(out)
}

/// A catalog surface named with inline parameters, e.g. `torus:R=2,a=1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceSpec {
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

impl SurfaceSpec {
    pub fn resolve(&self, sf: &SpaceForm) -> Result<CatalogSurface> {
        CatalogSurface::from_params(&self.name, &self.params, sf)
    }
}

impl FromStr for SurfaceSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, rest) = match s.split_once(':') {
            Some((n, r)) => (n.trim(), r.trim()),
            None => (s.trim(), ""),
        };
        if name.is_empty() {
            return Err(Error::Parse("surface spec needs a name, e.g. torus:R=2,a=1".into()));
        }
        let mut params = BTreeMap::new();
        for item in rest.split(',').map(str::trim).filter(|x| !x.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("surface parameter '{item}' should look like key=value")))?;
            let value: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("surface parameter '{}' has non-numeric value '{v}'", k.trim())))?;
            if params.insert(k.trim().to_string(), value).is_some() {
                return Err(Error::Parse(format!("surface parameter '{}' given twice", k.trim())));
            }
        }
        Ok(SurfaceSpec {
            name: name.to_string(),
            params,
        })
    }
}

impl fmt::Display for SurfaceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)?;
        for (i, (k, v)) in self.params.iter().enumerate() {
            write!(f, "{}{k}={v}", if i == 0 { ':' } else { ',' })?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::integrate;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn unit_sphere(n: usize) -> SurfaceSample {
        let s = CatalogSurface::Sphere { r: 1.0 };
        sample_catalog(s, &s.default_domain(n).unwrap(), SpaceForm::euclidean()).unwrap()
    }

    fn area(s: &SurfaceSample) -> f64 {
        integrate(&ScalarField::constant(s.domain(), 1.0), s).unwrap()
    }

    #[test]
    fn builtin_lookup_and_positions() {
        let d = CatalogSurface::Torus { big_r: 2.0, a: 1.0 }.default_domain(16).unwrap();
        let spec: SurfaceSpec = "torus:R=2,a=1".parse().unwrap();
        let s = sample_builtin(&spec.name, &spec.params, &d, SpaceForm::euclidean()).unwrap();
        assert_eq!(s.node(0).position, [3.0, 0.0, 0.0, 0.0]);
        assert_eq!(spec.to_string(), "torus:R=2,a=1");
        assert!("torus:R".parse::<SurfaceSpec>().is_err());
    }

    #[test]
    fn callable_sphere_matches_catalog_jets() {
        let d = CatalogSurface::Sphere { r: 1.0 }.default_domain(16).unwrap();
        let f = |t: f64, p: f64| vec![t.sin() * p.cos(), t.sin() * p.sin(), t.cos()];
        let im = CallableImmersion::new(f, SpaceForm::euclidean(), &d, FdConfig::default()).unwrap();
        let cat = CatalogSurface::Sphere { r: 1.0 };
        let mut worst = 0.0f64;
        for k in (0..d.len()).step_by(7) {
            let (u, v) = d.point(k);
            let num = im.partials(u, v, 3).unwrap();
            let exact = cat.eval(Jet::var_u(u, 3), Jet::var_v(v, 3));
            for a in 0..=3 {
                for b in 0..=(3 - a) {
                    for c in 0..3 {
                        let e = exact[c].derivative(a, b);
                        worst = worst.max((num[crate::jet::slot(a, b)][c] - e).abs());
                    }
                }
            }
        }
        assert!(worst < 1e-7, "{worst}");
    }

    #[test]
    fn constant_map_is_degenerate() {
        let d = CatalogSurface::Sphere { r: 1.0 }.default_domain(16).unwrap();
        let err = sample_callable(|_, _| vec![1.0, 2.0, 3.0], &d, SpaceForm::euclidean(), FdConfig::default());
        assert!(matches!(err, Err(Error::DegenerateMetric { .. })));
    }

    #[test]
    fn graph_second_derivative() {
        let d = PatchDomain::new(Axis::open(-1.0, 1.0, 9).unwrap(), Axis::open(-1.0, 1.0, 9).unwrap()).unwrap();
        let im = CallableImmersion::new(|u, v| vec![u, v, u * u + v * v], SpaceForm::euclidean(), &d, FdConfig::default())
            .unwrap();
        let p = im.partials(0.0, 0.0, 2).unwrap();
        let ruu = p[crate::jet::slot(2, 0)];
        assert!((ruu[2] - 2.0).abs() < 1e-8 && ruu[0].abs() < 1e-8);
    }

    #[test]
    fn deforming_unit_sphere_shrinks_it() {
        let s = unit_sphere(32);
        let one = ScalarField::constant(s.domain(), 1.0);
        let d = deform_normal(&s, &one, 0.1).unwrap();
        assert_relative_eq!(area(&d), 4.0 * PI * 0.81, max_relative = 1e-12);
        for n in d.nodes() {
            assert_relative_eq!(n.scalars.mean, 1.0 / 0.9, max_relative = 1e-12);
        }
    }

    #[test]
    fn zero_deformation_is_identity() {
        let s = unit_sphere(16);
        let f = ScalarField::from_fn(s.domain(), |t, p| t.cos() + (*p * 2.0).sin() * t.sin());
        let d = deform_normal(&s, &f, 0.0).unwrap();
        for (a, b) in s.nodes().iter().zip(d.nodes()) {
            for c in 0..4 {
                assert!((a.position[c] - b.position[c]).abs() < 1e-15);
            }
            assert!((a.scalars.mean - b.scalars.mean).abs() < 1e-12);
            assert!((a.mean_jet.derivative(1, 1) - b.mean_jet.derivative(1, 1)).abs() < 1e-10);
        }
    }

    #[test]
    fn geodesic_sphere_in_s3_moves_to_smaller_radius() {
        let sf = SpaceForm::sphere(1.0).unwrap();
        let surface = CatalogSurface::GeodesicSphereS3 { rho: 1.0, a: 1.0 };
        let s = sample_catalog(surface, &surface.default_domain(32).unwrap(), sf).unwrap();
        let t = 0.05;
        let d = deform_normal(&s, &ScalarField::constant(s.domain(), 1.0), t).unwrap();
        assert_relative_eq!(area(&d), 4.0 * PI * (1.0f64 - t).sin().powi(2), max_relative = 1e-12);
        for n in d.nodes() {
            assert!(sf.quadric_defect(&n.position).unwrap() < 1e-14);
        }
    }

    #[test]
    fn deformation_with_sampled_field_matches_analytic() {
        let s = unit_sphere(24);
        let f = ScalarField::from_fn(s.domain(), |t, p| t.cos() * t.sin() * p.cos());
        let a = deform_normal(&s, &f, 0.05).unwrap();
        let b = deform_normal(&s, &f.to_sampled(), 0.05).unwrap();
        for (x, y) in a.nodes().iter().zip(b.nodes()) {
            assert!((x.scalars.mean - y.scalars.mean).abs() < 1e-9);
        }
    }

    #[test]
    fn flip_negates_mean_curvature() {
        let s = unit_sphere(16);
        let f = s.flipped().unwrap();
        assert_eq!(f.sign(), -s.sign());
        assert_relative_eq!(f.node(3).scalars.mean, -1.0, max_relative = 1e-14);
    }

    #[test]
    fn positions_export_has_header_and_rows() {
        let s = unit_sphere(16);
        let mut buf = Vec::new();
        s.write_positions_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("u,v,x,y,z\n"));
        assert_eq!(text.lines().count(), s.len() + 1);
    }
}
