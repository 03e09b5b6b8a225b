//! Ambient space forms `M³(k₀)`.
//!
//! The flat case lives in ℝ³. The round 3-sphere of radius `ρ` is the quadric
//! `|x|² = ρ²` in ℝ⁴ and hyperbolic space is the upper sheet of
//! `x₁² + x₂² + x₃² − x₄² = −ρ²` in Minkowski space, signature `(+,+,+,−)`.
//! Geodesics through a point along a unit tangent are closed-form in all
//! three models, which is what makes exact normal deformations possible.
//!
//! Ambient points and vectors are carried as `[S; 4]`; the Euclidean model
//! ignores the last slot.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::Scalar;

/// Relative tolerance for tangency, unit-length and quadric preconditions.
pub const TANGENCY_TOLERANCE: f64 = 1e-8;

/// Fixed-size ambient coordinates.
pub type Ambient<S> = [S; 4];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Model {
    Euclidean,
    SphereEmbedding { radius: f64 },
    HyperboloidEmbedding { radius: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceForm {
    model: Model,
}

impl Default for SpaceForm {
    fn default() -> Self {
        SpaceForm::euclidean()
    }
}

impl SpaceForm {
    pub fn euclidean() -> Self {
        SpaceForm {
            model: Model::Euclidean,
        }
    }

    pub fn sphere(radius: f64) -> Result<Self> {
        check_radius(radius)?;
        Ok(SpaceForm {
            model: Model::SphereEmbedding { radius },
        })
    }

    pub fn hyperbolic(radius: f64) -> Result<Self> {
        check_radius(radius)?;
        Ok(SpaceForm {
            model: Model::HyperboloidEmbedding { radius },
        })
    }

    /// The model with sectional curvature `k0` (radius `1/√|k0|` when curved).
    pub fn from_k0(k0: f64) -> Result<Self> {
        if !k0.is_finite() {
            return Err(Error::InconsistentSpaceForm(format!("k0 = {k0}")));
        }
        if k0 == 0.0 {
            Ok(SpaceForm::euclidean())
        } else if k0 > 0.0 {
            SpaceForm::sphere(1.0 / k0.sqrt())
        } else {
            SpaceForm::hyperbolic(1.0 / (-k0).sqrt())
        }
    }

    pub fn model(&self) -> Model {
        self.model
    }

    /// Sectional curvature.
    pub fn k0(&self) -> f64 {
        match self.model {
            Model::Euclidean => 0.0,
            Model::SphereEmbedding { radius } => 1.0 / (radius * radius),
            Model::HyperboloidEmbedding { radius } => -1.0 / (radius * radius),
        }
    }

    pub fn radius(&self) -> Option<f64> {
        match self.model {
            Model::Euclidean => None,
            Model::SphereEmbedding { radius } | Model::HyperboloidEmbedding { radius } => Some(radius),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        match self.model {
            Model::Euclidean => 3,
            _ => 4,
        }
    }

    pub fn is_euclidean(&self) -> bool {
        matches!(self.model, Model::Euclidean)
    }

    /// Diagonal of the ambient metric.
    pub fn signature(&self) -> [f64; 4] {
        match self.model {
            Model::Euclidean => [1.0, 1.0, 1.0, 0.0],
            Model::SphereEmbedding { .. } => [1.0; 4],
            Model::HyperboloidEmbedding { .. } => [1.0, 1.0, 1.0, -1.0],
        }
    }

    /// `⟨x, x⟩` that points of the model satisfy (`±ρ²`); `None` for ℝ³.
    pub fn quadric_level(&self) -> Option<f64> {
        match self.model {
            Model::Euclidean => None,
            Model::SphereEmbedding { radius } => Some(radius * radius),
            Model::HyperboloidEmbedding { radius } => Some(-radius * radius),
        }
    }

    /// Ambient bilinear form, no precondition checks.
    #[inline]
    pub fn dot<S: Scalar>(&self, a: &Ambient<S>, b: &Ambient<S>) -> S {
        let sig = self.signature();
        let mut acc = a[0] * b[0] * sig[0];
        for k in 1..4 {
            if sig[k] != 0.0 {
                acc = acc + a[k] * b[k] * sig[k];
            }
        }
        acc
    }

    /// Geodesic from `p` with unit initial velocity `n` after arc length `s`.
    #[inline]
    pub fn flow<S: Scalar>(&self, p: &Ambient<S>, n: &Ambient<S>, s: S) -> Ambient<S> {
        match self.model {
            Model::Euclidean => std::array::from_fn(|k| p[k] + n[k] * s),
            Model::SphereEmbedding { radius } => {
                let a = s / radius;
                let (c, sn) = (a.cos(), a.sin() * radius);
                std::array::from_fn(|k| p[k] * c + n[k] * sn)
            }
            Model::HyperboloidEmbedding { radius } => {
                let a = s / radius;
                let (c, sn) = (a.cosh(), a.sinh() * radius);
                std::array::from_fn(|k| p[k] * c + n[k] * sn)
            }
        }
    }

    /// Velocity of [`SpaceForm::flow`] at arc length `s` (parallel transport
    /// of `n` along the geodesic).
    pub fn transport<S: Scalar>(&self, p: &Ambient<S>, n: &Ambient<S>, s: S) -> Ambient<S> {
        match self.model {
            Model::Euclidean => *n,
            Model::SphereEmbedding { radius } => {
                let a = s / radius;
                let (c, sn) = (a.cos(), a.sin() / radius);
                std::array::from_fn(|k| n[k] * c - p[k] * sn)
            }
            Model::HyperboloidEmbedding { radius } => {
                let a = s / radius;
                let (c, sn) = (a.cosh(), a.sinh() / radius);
                std::array::from_fn(|k| n[k] * c + p[k] * sn)
            }
        }
    }

    /// A vector orthogonal to `tu`, `tv` and, in the embedded models, to the
    /// position `p`. Not normalised; its sign follows `tu × tv` in ℝ³ and the
    /// orientation of `(p, tu, tv)` in ℝ⁴.
    pub fn normal_direction<S: Scalar>(
        &self,
        p: &Ambient<S>,
        tu: &Ambient<S>,
        tv: &Ambient<S>,
    ) -> Ambient<S> {
        match self.model {
            Model::Euclidean => {
                let z = p[0].lift(0.0);
                [
                    tu[1] * tv[2] - tu[2] * tv[1],
                    tu[2] * tv[0] - tu[0] * tv[2],
                    tu[0] * tv[1] - tu[1] * tv[0],
                    z,
                ]
            }
            _ => {
                let sig = self.signature();
                let rows = [p, tu, tv];
                let mut out = [p[0].lift(0.0); 4];
                for (a, slot) in out.iter_mut().enumerate() {
                    let cols: Vec<usize> = (0..4).filter(|&c| c != a).collect();
                    let m = |r: usize, c: usize| rows[r][cols[c]];
                    let minor = m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1))
                        - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0))
                        + m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
                    let sign = if a % 2 == 0 { 1.0 } else { -1.0 };
                    *slot = minor * (sign * sig[a]);
                }
                out
            }
        }
    }

    pub(crate) fn pad(&self, x: &[f64]) -> Result<Ambient<f64>> {
        let dim = self.ambient_dim();
        if x.len() != dim {
            return Err(Error::Dimension {
                expected: dim,
                found: x.len(),
            });
        }
        let mut out = [0.0; 4];
        out[..dim].copy_from_slice(x);
        Ok(out)
    }

    fn euclid_norm(x: &Ambient<f64>) -> f64 {
        x.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Relative defect of `p` from the model quadric (zero in ℝ³).
    pub fn quadric_defect(&self, p: &[f64]) -> Result<f64> {
        let p = self.pad(p)?;
        Ok(match self.quadric_level() {
            None => 0.0,
            Some(level) => (self.dot(&p, &p) - level).abs() / level.abs(),
        })
    }

    fn check_point(&self, p: &Ambient<f64>) -> Result<()> {
        if let Some(level) = self.quadric_level() {
            let defect = (self.dot(p, p) - level).abs() / level.abs();
            let wrong_sheet = level < 0.0 && p[3] <= 0.0;
            if defect > TANGENCY_TOLERANCE || wrong_sheet {
                return Err(Error::OffQuadric { defect });
            }
        }
        Ok(())
    }

    fn check_tangent(&self, p: &Ambient<f64>, v: &Ambient<f64>) -> Result<()> {
        if self.is_euclidean() {
            return Ok(());
        }
        let scale = Self::euclid_norm(p) * Self::euclid_norm(v);
        if scale == 0.0 {
            return Ok(());
        }
        let defect = self.dot(p, v).abs() / scale;
        if defect > TANGENCY_TOLERANCE {
            return Err(Error::NotTangent { defect });
        }
        Ok(())
    }

    /// Inner product of two tangent vectors at `p`.
    pub fn ambient_inner(&self, p: &[f64], v: &[f64], w: &[f64]) -> Result<f64> {
        let (p, v, w) = (self.pad(p)?, self.pad(v)?, self.pad(w)?);
        self.check_point(&p)?;
        self.check_tangent(&p, &v)?;
        self.check_tangent(&p, &w)?;
        Ok(self.dot(&v, &w))
    }

    /// The point at arc length `s` along the geodesic leaving `p` with unit
    /// velocity `n`.
    pub fn geodesic_step(&self, p: &[f64], n: &[f64], s: f64) -> Result<Vec<f64>> {
        let (pp, nn) = (self.pad(p)?, self.pad(n)?);
        self.check_point(&pp)?;
        self.check_tangent(&pp, &nn)?;
        let norm_sq = self.dot(&nn, &nn);
        if (norm_sq - 1.0).abs() > TANGENCY_TOLERANCE {
            return Err(Error::NotUnit { norm_sq });
        }
        let out = self.flow(&pp, &nn, s);
        Ok(out[..self.ambient_dim()].to_vec())
    }

    pub fn to_config(&self) -> SpaceFormConfig {
        SpaceFormConfig {
            k0: self.k0(),
            model_radius: self.radius(),
        }
    }
}

fn check_radius(radius: f64) -> Result<()> {
    if radius.is_finite() && radius > 0.0 {
        Ok(())
    } else {
        Err(Error::InconsistentSpaceForm(format!(
            "model radius must be positive and finite, got {radius}"
        )))
    }
}

/// JSON form `{"k0": float, "model_radius": float?}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceFormConfig {
    pub k0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_radius: Option<f64>,
}

impl TryFrom<SpaceFormConfig> for SpaceForm {
    type Error = Error;

    fn try_from(cfg: SpaceFormConfig) -> Result<SpaceForm> {
        let sf = SpaceForm::from_k0(cfg.k0)?;
        match (cfg.model_radius, sf.radius()) {
            (None, _) => Ok(sf),
            (Some(r), None) => Err(Error::InconsistentSpaceForm(format!(
                "k0 = 0 is flat but model_radius = {r} was given"
            ))),
            (Some(r), Some(expected)) => {
                if r > 0.0 && ((r - expected) / expected).abs() <= 1e-12 {
                    Ok(sf)
                } else {
                    Err(Error::InconsistentSpaceForm(format!(
                        "k0 = {} implies radius {expected}, but model_radius = {r}",
                        cfg.k0
                    )))
                }
            }
        }
    }
}

impl Serialize for SpaceForm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_config().serialize(s)
    }
}

impl<'de> Deserialize<'de> for SpaceForm {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let cfg = SpaceFormConfig::deserialize(d)?;
        SpaceForm::try_from(cfg).map_err(serde::de::Error::custom)
    }
}
