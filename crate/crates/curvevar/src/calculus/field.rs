use std::fmt;
use std::io::{BufRead, Write};
use std::sync::Arc;

use once_cell::sync::OnceCell;

use super::spectral::grid_partials;
use crate::error::{Error, Result};
use crate::jet::{slot, Jet, Scalar};
use crate::surface::{PatchDomain, SurfaceSample};
use crate::tensor::Sym2;

/// Highest derivative order available for sampled (non-analytic) fields.
pub const SAMPLED_ORDER: usize = 4;

type FieldFn = dyn Fn(&Jet, &Jet) -> Result<Jet> + Send + Sync;

#[derive(Clone)]
enum Source {
    Analytic(Arc<FieldFn>),
    Sampled(Arc<OnceCell<Vec<Vec<f64>>>>),
}

/// A scalar function on the chart domain, sampled at the grid nodes.
///
/// Analytic fields carry a closure evaluated on jets, which gives exact
/// derivatives at any point. Sampled fields know only their node values and
/// are differentiated on the grid.
#[derive(Clone)]
pub struct ScalarField {
    domain: PatchDomain,
    values: Arc<Vec<f64>>,
    source: Source,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("shape", &self.domain.shape())
            .field("analytic", &self.is_analytic())
            .finish()
    }
}

impl ScalarField {
    /// An analytic field given in chart coordinates.
    pub fn from_fn<F>(domain: &PatchDomain, f: F) -> Self
    where
        F: Fn(&Jet, &Jet) -> Jet + Send + Sync + 'static,
    {
        Self::try_from_fn(domain, move |u, v| Ok(f(u, v))).expect("infallible field")
    }

    pub fn try_from_fn<F>(domain: &PatchDomain, f: F) -> Result<Self>
    where
        F: Fn(&Jet, &Jet) -> Result<Jet> + Send + Sync + 'static,
    {
        let values = (0..domain.len())
            .map(|k| {
                let (u, v) = domain.point(k);
                f(&Jet::constant(u, 0), &Jet::constant(v, 0)).map(|j| j.value())
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ScalarField {
            domain: *domain,
            values: Arc::new(values),
            source: Source::Analytic(Arc::new(f)),
        })
    }

    /// A field written in terms of the ambient position of `sample`.
    pub fn from_position<F>(sample: &SurfaceSample, f: F) -> Result<Self>
    where
        F: Fn(&[Jet; 4]) -> Jet + Send + Sync + 'static,
    {
        let immersion = sample.immersion().clone();
        Self::try_from_fn(sample.domain(), move |u, v| Ok(f(&immersion.position(u, v)?)))
    }

    pub fn constant(domain: &PatchDomain, c: f64) -> Self {
        Self::from_fn(domain, move |u, _| u.lift(c))
    }

    pub fn zeros(domain: &PatchDomain) -> Self {
        Self::constant(domain, 0.0)
    }

    /// A sampled field from node values in row-major order.
    pub fn from_values(domain: &PatchDomain, values: Vec<f64>) -> Result<Self> {
        if values.len() != domain.len() {
            return Err(Error::GridMismatch {
                expected: domain.shape(),
                found: (values.len(), 1),
            });
        }
        Ok(ScalarField {
            domain: *domain,
            values: Arc::new(values),
            source: Source::Sampled(Arc::new(OnceCell::new())),
        })
    }

    pub fn domain(&self) -> &PatchDomain {
        &self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, k: usize) -> f64 {
        self.values[k]
    }

    pub fn is_analytic(&self) -> bool {
        matches!(self.source, Source::Analytic(_))
    }

    /// Forgets the analytic form, keeping node values only.
    pub fn to_sampled(&self) -> Self {
        ScalarField {
            domain: self.domain,
            values: self.values.clone(),
            source: Source::Sampled(Arc::new(OnceCell::new())),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    /// `c · f`, keeping the analytic form when there is one.
    pub fn scaled(&self, c: f64) -> Self {
        match &self.source {
            Source::Analytic(f) => {
                let f = f.clone();
                ScalarField {
                    domain: self.domain,
                    values: Arc::new(self.values.iter().map(|x| c * x).collect()),
                    source: Source::Analytic(Arc::new(move |u: &Jet, v: &Jet| Ok(f(u, v)? * c))),
                }
            }
            Source::Sampled(_) => {
                ScalarField::from_values(&self.domain, self.values.iter().map(|x| c * x).collect())
                    .expect("same grid")
            }
        }
    }

    /// `a f + b g` on a shared grid.
    pub fn combine(&self, a: f64, other: &ScalarField, b: f64) -> Result<Self> {
        self.check_domain(&other.domain)?;
        let values: Vec<f64> = self.values.iter().zip(other.values.iter()).map(|(x, y)| a * x + b * y).collect();
        match (&self.source, &other.source) {
            (Source::Analytic(f), Source::Analytic(g)) => {
                let (f, g) = (f.clone(), g.clone());
                Ok(ScalarField {
                    domain: self.domain,
                    values: Arc::new(values),
                    source: Source::Analytic(Arc::new(move |u: &Jet, v: &Jet| Ok(f(u, v)? * a + g(u, v)? * b))),
                })
            }
            _ => ScalarField::from_values(&self.domain, values),
        }
    }

    pub(crate) fn check_domain(&self, domain: &PatchDomain) -> Result<()> {
        if &self.domain != domain {
            return Err(Error::GridMismatch {
                expected: domain.shape(),
                found: self.domain.shape(),
            });
        }
        Ok(())
    }

    fn sampled_partials<'a>(&self, cache: &'a OnceCell<Vec<Vec<f64>>>) -> Result<&'a Vec<Vec<f64>>> {
        cache.get_or_try_init(|| grid_partials(&self.domain, &self.values, SAMPLED_ORDER))
    }

    /// Series of the field about node `k`.
    pub fn node_jet(&self, k: usize, order: usize) -> Result<Jet> {
        let (u, v) = self.domain.point(k);
        match &self.source {
            Source::Analytic(f) => f(&Jet::var_u(u, order), &Jet::var_v(v, order)),
            Source::Sampled(cache) => {
                if order > SAMPLED_ORDER {
                    return Err(Error::InsufficientOrder {
                        required: order,
                        available: SAMPLED_ORDER,
                    });
                }
                let partials = self.sampled_partials(cache)?;
                let derivs: Vec<f64> = (0..=order)
                    .flat_map(|d| (0..=d).map(move |b| (d - b, b)))
                    .map(|(a, b)| partials[slot(a, b)][k])
                    .collect();
                Ok(Jet::from_derivatives(&derivs, order))
            }
        }
    }

    /// The field composed with the jets `u`, `v`. Sampled fields can only be
    /// evaluated at grid nodes.
    pub fn jet_at(&self, u: &Jet, v: &Jet) -> Result<Jet> {
        match &self.source {
            Source::Analytic(f) => f(u, v),
            Source::Sampled(_) => {
                let order = u.order().min(v.order());
                let k = self.domain.locate(u.value(), v.value()).ok_or_else(|| {
                    Error::InvalidDomain(format!(
                        "sampled field evaluated off its grid at ({}, {})",
                        u.value(),
                        v.value()
                    ))
                })?;
                Ok(self.node_jet(k, order)?.substitute(u, v))
            }
        }
    }

    /// Writes `u,v,value` rows with a header.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "u,v,value")?;
        for (k, x) in self.values.iter().enumerate() {
            let (u, v) = self.domain.point(k);
            writeln!(w, "{u:.17e},{v:.17e},{x:.17e}")?;
        }
        Ok(())
    }

    /// Reads `u,v,value` rows (header optional) onto `domain`. Every node must
    /// appear exactly once.
    pub fn read_csv<R: BufRead>(domain: &PatchDomain, r: R) -> Result<Self> {
        let mut values = vec![f64::NAN; domain.len()];
        let mut seen = vec![false; domain.len()];
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() != 3 {
                return Err(Error::Parse(format!("line {}: expected u,v,value", lineno + 1)));
            }
            let parsed: std::result::Result<Vec<f64>, _> = cols.iter().map(|c| c.parse::<f64>()).collect();
            let nums = match parsed {
                Ok(n) => n,
                Err(_) if lineno == 0 => continue,
                Err(e) => return Err(Error::Parse(format!("line {}: {e}", lineno + 1))),
            };
            let k = domain.locate(nums[0], nums[1]).ok_or_else(|| {
                Error::Parse(format!("line {}: ({}, {}) is not a grid node", lineno + 1, nums[0], nums[1]))
            })?;
            if seen[k] {
                return Err(Error::Parse(format!("line {}: node listed twice", lineno + 1)));
            }
            seen[k] = true;
            values[k] = nums[2];
        }
        if let Some(k) = seen.iter().position(|s| !s) {
            let (i, j) = domain.split(k);
            return Err(Error::Parse(format!("node ({i}, {j}) is missing")));
        }
        ScalarField::from_values(domain, values)
    }
}

/// Symmetric (0,2)-tensor per node.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorField02 {
    domain: PatchDomain,
    values: Vec<Sym2>,
}

impl TensorField02 {
    pub fn new(domain: &PatchDomain, values: Vec<Sym2>) -> Result<Self> {
        if values.len() != domain.len() {
            return Err(Error::GridMismatch {
                expected: domain.shape(),
                found: (values.len(), 1),
            });
        }
        Ok(TensorField02 {
            domain: *domain,
            values,
        })
    }

    pub fn domain(&self) -> &PatchDomain {
        &self.domain
    }

    pub fn values(&self) -> &[Sym2] {
        &self.values
    }

    pub fn at(&self, k: usize) -> Sym2 {
        self.values[k]
    }
}

/// Tangent vector field by contravariant chart components.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    domain: PatchDomain,
    values: Vec<[f64; 2]>,
}

impl VectorField {
    pub fn new(domain: &PatchDomain, values: Vec<[f64; 2]>) -> Result<Self> {
        if values.len() != domain.len() {
            return Err(Error::GridMismatch {
                expected: domain.shape(),
                found: (values.len(), 1),
            });
        }
        Ok(VectorField {
            domain: *domain,
            values,
        })
    }

    pub fn domain(&self) -> &PatchDomain {
        &self.domain
    }

    pub fn values(&self) -> &[[f64; 2]] {
        &self.values
    }

    pub fn at(&self, k: usize) -> [f64; 2] {
        self.values[k]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::Axis;
    use std::f64::consts::PI;

    fn torus_domain() -> PatchDomain {
        PatchDomain::new(
            Axis::periodic(0.0, 2.0 * PI, 16).unwrap(),
            Axis::periodic(0.0, 2.0 * PI, 24).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn sampled_and_analytic_jets_agree() {
        let d = torus_domain();
        let f = ScalarField::from_fn(&d, |u, v| u.sin() * v.cos() + v.sin());
        let s = f.to_sampled();
        for k in [0, 17, 101] {
            let a = f.node_jet(k, 3).unwrap();
            let b = s.node_jet(k, 3).unwrap();
            for (x, y) in a.coefficients().iter().zip(b.coefficients()) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn csv_round_trip() {
        let d = torus_domain();
        let f = ScalarField::from_fn(&d, |u, v| (*u * 2.0).cos() + *v);
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let g = ScalarField::read_csv(&d, buf.as_slice()).unwrap();
        assert_eq!(f.values(), g.values());
        assert!(!g.is_analytic());
    }

    #[test]
    fn csv_missing_node_is_an_error() {
        let d = torus_domain();
        let err = ScalarField::read_csv(&d, "u,v,value\n0,0,1\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("missing"));
    }

    #[test]
    fn off_grid_sampled_evaluation_fails() {
        let d = torus_domain();
        let s = ScalarField::from_values(&d, vec![1.0; d.len()]).unwrap();
        assert!(s.jet_at(&Jet::var_u(0.123, 2), &Jet::var_v(0.0, 2)).is_err());
        assert!(s.jet_at(&Jet::var_u(0.0, 2), &Jet::var_v(0.0, 2)).is_ok());
    }
}
