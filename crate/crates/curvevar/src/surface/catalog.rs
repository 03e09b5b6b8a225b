use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::{Deserialize, Serialize};

use super::{Axis, Immersion, PatchDomain};
use crate::error::{Error, Result};
use crate::jet::{Jet, Scalar};
use crate::space_form::{Model, SpaceForm};

/// Built-in parametrized surfaces with closed-form charts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum CatalogSurface {
    /// Round sphere, chart `(θ, φ)`.
    Sphere { r: f64 },
    /// Torus of revolution, chart `(tube angle, rotation angle)`.
    Torus {
        #[serde(rename = "R")]
        big_r: f64,
        a: f64,
    },
    /// Catenoid `(c cosh(s/c) cos φ, c cosh(s/c) sin φ, s)`, chart `(s, φ)`.
    Catenoid { c: f64 },
    /// Graph `z = a u² + b v²`.
    Graph { a: f64, b: f64 },
    /// Geodesic sphere of geodesic radius `a` about the pole of the 3-sphere
    /// of radius `rho`, chart `(θ, φ)`.
    #[serde(rename = "geodesic_sphere_S3")]
    GeodesicSphereS3 { rho: f64, a: f64 },
    /// Clifford torus in the 3-sphere of radius `rho`.
    #[serde(rename = "clifford_torus_S3")]
    CliffordTorusS3 { rho: f64 },
    /// Geodesic sphere of radius `a` about the vertex of the hyperboloid.
    #[serde(rename = "geodesic_sphere_H3")]
    GeodesicSphereH3 { rho: f64, a: f64 },
}

pub const CATALOG_NAMES: [&str; 7] = [
    "sphere",
    "torus",
    "catenoid",
    "graph",
    "geodesic_sphere_S3",
    "clifford_torus_S3",
    "geodesic_sphere_H3",
];

fn positive(name: &str, x: f64) -> Result<f64> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive, got {x}")))
    }
}

impl CatalogSurface {
    /// Looks up `name` and reads its parameters. Radii of surfaces in curved
    /// ambients default to the model radius of `sf`.
    pub fn from_params(name: &str, params: &BTreeMap<String, f64>, sf: &SpaceForm) -> Result<Self> {
        let known: &[&str] = match name {
            "sphere" => &["r"],
            "torus" => &["R", "a"],
            "catenoid" => &["c"],
            "graph" => &["a", "b"],
            "geodesic_sphere_S3" | "geodesic_sphere_H3" => &["a", "rho"],
            "clifford_torus_S3" => &["rho"],
            _ => return Err(Error::UnknownSurface(name.to_string())),
        };
        if let Some(extra) = params.keys().find(|k| !known.contains(&k.as_str())) {
            return Err(Error::InvalidParameter(format!(
                "unknown parameter '{extra}' for surface '{name}' (expected {})",
                known.join(", ")
            )));
        }
        let get = |k: &str, default: Option<f64>| -> Result<f64> {
            params
                .get(k)
                .copied()
                .or(default)
                .ok_or_else(|| Error::InvalidParameter(format!("surface '{name}' needs parameter '{k}'")))
        };
        let surface = match name {
            "sphere" => CatalogSurface::Sphere {
                r: get("r", Some(1.0))?,
            },
            "torus" => CatalogSurface::Torus {
                big_r: get("R", Some(2.0))?,
                a: get("a", Some(1.0))?,
            },
            "catenoid" => CatalogSurface::Catenoid { c: get("c", Some(1.0))? },
            "graph" => CatalogSurface::Graph {
                a: get("a", Some(1.0))?,
                b: get("b", Some(1.0))?,
            },
            "geodesic_sphere_S3" => CatalogSurface::GeodesicSphereS3 {
                rho: get("rho", sf.radius())?,
                a: get("a", None)?,
            },
            "clifford_torus_S3" => CatalogSurface::CliffordTorusS3 {
                rho: get("rho", sf.radius())?,
            },
            _ => CatalogSurface::GeodesicSphereH3 {
                rho: get("rho", sf.radius())?,
                a: get("a", None)?,
            },
        };
        surface.validate(sf)?;
        Ok(surface)
    }

    pub fn name(&self) -> &'static str {
        match self {
            CatalogSurface::Sphere { .. } => "sphere",
            CatalogSurface::Torus { .. } => "torus",
            CatalogSurface::Catenoid { .. } => "catenoid",
            CatalogSurface::Graph { .. } => "graph",
            CatalogSurface::GeodesicSphereS3 { .. } => "geodesic_sphere_S3",
            CatalogSurface::CliffordTorusS3 { .. } => "clifford_torus_S3",
            CatalogSurface::GeodesicSphereH3 { .. } => "geodesic_sphere_H3",
        }
    }

    /// Checks parameters and the ambient the chart lives in.
    pub fn validate(&self, sf: &SpaceForm) -> Result<()> {
        let model_radius = |rho: f64, want_sphere: bool| -> Result<()> {
            positive("rho", rho)?;
            let ok = match (sf.model(), want_sphere) {
                (Model::SphereEmbedding { radius }, true) | (Model::HyperboloidEmbedding { radius }, false) => {
                    ((radius - rho) / rho).abs() <= 1e-12
                }
                _ => false,
            };
            if ok {
                Ok(())
            } else {
                Err(Error::InconsistentSpaceForm(format!(
                    "surface '{}' with rho = {rho} does not live in the ambient with k0 = {}",
                    self.name(),
                    sf.k0()
                )))
            }
        };
        let flat = || -> Result<()> {
            if sf.is_euclidean() {
                Ok(())
            } else {
                Err(Error::InconsistentSpaceForm(format!(
                    "surface '{}' is a Euclidean chart but k0 = {}",
                    self.name(),
                    sf.k0()
                )))
            }
        };
        match *self {
            CatalogSurface::Sphere { r } => {
                positive("r", r)?;
                flat()
            }
            CatalogSurface::Torus { big_r, a } => {
                positive("a", a)?;
                positive("R", big_r)?;
                if big_r <= a {
                    return Err(Error::InvalidParameter(format!(
                        "torus needs R > a for an immersion, got R = {big_r}, a = {a}"
                    )));
                }
                flat()
            }
            CatalogSurface::Catenoid { c } => {
                positive("c", c)?;
                flat()
            }
            CatalogSurface::Graph { a, b } => {
                if !(a.is_finite() && b.is_finite()) {
                    return Err(Error::InvalidParameter("graph coefficients must be finite".into()));
                }
                flat()
            }
            CatalogSurface::GeodesicSphereS3 { rho, a } => {
                model_radius(rho, true)?;
                positive("a", a)?;
                if a >= PI * rho {
                    return Err(Error::InvalidParameter(format!(
                        "geodesic radius {a} must be below the antipodal distance {}",
                        PI * rho
                    )));
                }
                Ok(())
            }
            CatalogSurface::CliffordTorusS3 { rho } => model_radius(rho, true),
            CatalogSurface::GeodesicSphereH3 { rho, a } => {
                model_radius(rho, false)?;
                positive("a", a).map(|_| ())
            }
        }
    }

    /// Chart map, generic over plain values and jets.
    pub fn eval<S: Scalar>(&self, u: S, v: S) -> [S; 4] {
        let zero = u.lift(0.0);
        match *self {
            CatalogSurface::Sphere { r } => {
                let (st, ct) = (u.sin(), u.cos());
                [st * v.cos() * r, st * v.sin() * r, ct * r, zero]
            }
            CatalogSurface::Torus { big_r, a } => {
                let ring = u.cos() * a + big_r;
                [ring * v.cos(), ring * v.sin(), u.sin() * a, zero]
            }
            CatalogSurface::Catenoid { c } => {
                let w = (u / c).cosh() * c;
                [w * v.cos(), w * v.sin(), u, zero]
            }
            CatalogSurface::Graph { a, b } => [u, v, u * u * a + v * v * b, zero],
            CatalogSurface::GeodesicSphereS3 { rho, a } => {
                let alpha = a / rho;
                let (s, c) = (alpha.sin() * rho, alpha.cos() * rho);
                let st = u.sin();
                [st * v.cos() * s, st * v.sin() * s, u.cos() * s, u.lift(c)]
            }
            CatalogSurface::CliffordTorusS3 { rho } => {
                let k = rho * FRAC_1_SQRT_2;
                [u.cos() * k, u.sin() * k, v.cos() * k, v.sin() * k]
            }
            CatalogSurface::GeodesicSphereH3 { rho, a } => {
                let alpha = a / rho;
                let (s, c) = (alpha.sinh() * rho, alpha.cosh() * rho);
                let st = u.sin();
                [st * v.cos() * s, st * v.sin() * s, u.cos() * s, u.lift(c)]
            }
        }
    }

    /// Sign applied to the chart normal so closed surfaces have `H > 0`.
    pub fn orientation(&self) -> f64 {
        match self {
            CatalogSurface::Sphere { .. }
            | CatalogSurface::GeodesicSphereS3 { .. }
            | CatalogSurface::GeodesicSphereH3 { .. } => -1.0,
            _ => 1.0,
        }
    }

    /// Natural chart domain, `n` nodes along the long direction.
    pub fn default_domain(&self, n: usize) -> Result<PatchDomain> {
        let tau = 2.0 * PI;
        let half = (n / 2).max(super::MIN_NODES);
        match *self {
            CatalogSurface::Sphere { .. }
            | CatalogSurface::GeodesicSphereS3 { .. }
            | CatalogSurface::GeodesicSphereH3 { .. } => {
                PatchDomain::new(Axis::polar(0.0, PI, half)?, Axis::periodic(0.0, tau, n)?)
            }
            CatalogSurface::Torus { .. } | CatalogSurface::CliffordTorusS3 { .. } => {
                PatchDomain::new(Axis::periodic(0.0, tau, half)?, Axis::periodic(0.0, tau, n)?)
            }
            CatalogSurface::Catenoid { c } => {
                PatchDomain::new(Axis::open(-1.5 * c, 1.5 * c, half + 1)?, Axis::periodic(0.0, tau, n)?)
            }
            CatalogSurface::Graph { .. } => {
                PatchDomain::new(Axis::open(-1.0, 1.0, half + 1)?, Axis::open(-1.0, 1.0, half + 1)?)
            }
        }
    }

    /// Checks that periodic directions of `domain` span one period of the chart.
    pub fn check_domain(&self, domain: &PatchDomain) -> Result<()> {
        let tau = 2.0 * PI;
        let periodic_ok = |axis: &Axis, period: Option<f64>| -> Result<()> {
            match (axis.kind, period) {
                (super::AxisKind::Periodic, Some(p)) if (axis.extent() - p).abs() <= 1e-12 * p => Ok(()),
                (super::AxisKind::Periodic, _) => Err(Error::InvalidDomain(format!(
                    "periodic direction [{}, {}] is not one period of the '{}' chart",
                    axis.start,
                    axis.end,
                    self.name()
                ))),
                (super::AxisKind::Polar, _) if !self.has_poles() => Err(Error::InvalidDomain(format!(
                    "the '{}' chart has no poles",
                    self.name()
                ))),
                (super::AxisKind::Polar, _) if axis.start.abs() > 1e-12 || (axis.end - PI).abs() > 1e-12 => {
                    Err(Error::InvalidDomain("a polar direction must span [0, π]".into()))
                }
                _ => Ok(()),
            }
        };
        let (pu, pv) = match self {
            CatalogSurface::Sphere { .. }
            | CatalogSurface::GeodesicSphereS3 { .. }
            | CatalogSurface::GeodesicSphereH3 { .. } => (None, Some(tau)),
            CatalogSurface::Torus { .. } | CatalogSurface::CliffordTorusS3 { .. } => (Some(tau), Some(tau)),
            CatalogSurface::Catenoid { .. } => (None, Some(tau)),
            CatalogSurface::Graph { .. } => (None, None),
        };
        periodic_ok(&domain.u, pu)?;
        periodic_ok(&domain.v, pv)
    }

    fn has_poles(&self) -> bool {
        matches!(
            self,
            CatalogSurface::Sphere { .. } | CatalogSurface::GeodesicSphereS3 { .. } | CatalogSurface::GeodesicSphereH3 { .. }
        )
    }
}

/// A catalog chart bound to its ambient.
#[derive(Debug, Clone, Copy)]
pub struct CatalogImmersion {
    pub surface: CatalogSurface,
    pub space_form: SpaceForm,
}

impl Immersion for CatalogImmersion {
    fn name(&self) -> String {
        self.surface.name().to_string()
    }

    fn space_form(&self) -> SpaceForm {
        self.space_form
    }

    fn position(&self, u: &Jet, v: &Jet) -> Result<[Jet; 4]> {
        Ok(self.surface.eval(*u, *v))
    }

    fn orientation_sign(&self) -> f64 {
        self.surface.orientation()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chart_positions() {
        let s = CatalogSurface::Sphere { r: 1.0 };
        let p = s.eval(PI / 2.0, 0.0);
        assert!((p[0] - 1.0).abs() < 1e-15 && p[2].abs() < 1e-15);
        let t = CatalogSurface::Torus { big_r: 2.0, a: 1.0 };
        assert_eq!(t.eval(0.0, 0.0), [3.0, 0.0, 0.0, 0.0]);
        let c = CatalogSurface::CliffordTorusS3 { rho: 1.0 };
        let p = c.eval(0.0, 0.0);
        assert!((p[0] - FRAC_1_SQRT_2).abs() < 1e-15 && (p[2] - FRAC_1_SQRT_2).abs() < 1e-15);
        let norm: f64 = p.iter().map(|x| x * x).sum();
        assert!((norm - 1.0).abs() < 1e-15);
    }

    #[test]
    fn parameters_are_validated() {
        let e = SpaceForm::euclidean();
        let mut params = BTreeMap::new();
        params.insert("R".to_string(), 1.0);
        params.insert("a".to_string(), 1.0);
        assert!(matches!(
            CatalogSurface::from_params("torus", &params, &e),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            CatalogSurface::from_params("klein_bottle", &params, &e),
            Err(Error::UnknownSurface(_))
        ));
        assert!(CatalogSurface::from_params("clifford_torus_S3", &BTreeMap::new(), &e).is_err());
        let s3 = SpaceForm::sphere(1.0).unwrap();
        assert!(CatalogSurface::from_params("clifford_torus_S3", &BTreeMap::new(), &s3).is_ok());
    }
}
