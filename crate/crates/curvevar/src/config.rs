//! Run configuration shared by the command line and JSON config files.
//!
//! Every field is optional so that a config file and command-line flags can
//! be merged field by field, flags winning.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::calculus::ScalarField;
use crate::density::DensitySpec;
use crate::error::{Error, Result};
use crate::harmonics::harmonic_field;
use crate::oracle::Quantity;
use crate::random::random_field;
use crate::space_form::SpaceForm;
use crate::surface::{sample_catalog, SurfaceSample, SurfaceSpec};
use crate::variations::Constraint;

/// Default longitude resolution; the other direction uses half of it.
pub const DEFAULT_GRID: usize = 128;

/// Smallest and largest accepted longitude resolution.
pub const GRID_RANGE: (usize, usize) = (8, 4096);

/// A variation field as written on the command line.
#[derive(Debug, Clone, PartialEq)]
pub enum FieldSpec {
    /// `const` or `const:c`.
    Const(f64),
    /// `harmonic:l,m`; only on round spheres.
    Harmonic { l: usize, m: i32 },
    /// `random:seed=N`: a smooth seeded field.
    Random { seed: u64 },
    /// A CSV file with one value per node.
    File(PathBuf),
}

impl Default for FieldSpec {
    fn default() -> Self {
        FieldSpec::Const(1.0)
    }
}

impl FieldSpec {
    /// Builds the field on `s`.
    pub fn build(&self, s: &SurfaceSample) -> Result<ScalarField> {
        match self {
            FieldSpec::Const(c) => Ok(ScalarField::constant(s.domain(), *c)),
            FieldSpec::Harmonic { l, m } => harmonic_field(s, *l, *m),
            FieldSpec::Random { seed } => random_field(s, *seed),
            FieldSpec::File(path) => {
                let f = std::fs::File::open(path)
                    .map_err(|e| Error::Parse(format!("cannot open field file '{}': {e}", path.display())))?;
                ScalarField::read_csv(s.domain(), std::io::BufReader::new(f))
            }
        }
    }
}

impl FromStr for FieldSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let expected = "expected const, const:c, harmonic:l,m, random:seed=N or a .csv path";
        let s = s.trim();
        let (head, rest) = s.split_once(':').unwrap_or((s, ""));
        match head {
            "const" if rest.is_empty() => Ok(FieldSpec::Const(1.0)),
            "const" => rest
                .parse()
                .map(FieldSpec::Const)
                .map_err(|_| Error::Parse(format!("--u '{s}': bad constant; {expected}"))),
            "harmonic" => {
                let bad = || Error::Parse(format!("--u '{s}': {expected}"));
                let (l, m) = rest.split_once(',').ok_or_else(bad)?;
                Ok(FieldSpec::Harmonic {
                    l: l.trim().parse().map_err(|_| bad())?,
                    m: m.trim().parse().map_err(|_| bad())?,
                })
            }
            "random" => {
                let seed = rest
                    .strip_prefix("seed=")
                    .and_then(|x| x.trim().parse().ok())
                    .ok_or_else(|| Error::Parse(format!("--u '{s}': {expected}")))?;
                Ok(FieldSpec::Random { seed })
            }
            _ if s.ends_with(".csv") => Ok(FieldSpec::File(PathBuf::from(s))),
            _ => Err(Error::Parse(format!("--u '{s}': {expected}"))),
        }
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldSpec::Const(c) => write!(f, "const:{c}"),
            FieldSpec::Harmonic { l, m } => write!(f, "harmonic:{l},{m}"),
            FieldSpec::Random { seed } => write!(f, "random:seed={seed}"),
            FieldSpec::File(p) => write!(f, "{}", p.display()),
        }
    }
}

impl Serialize for FieldSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for FieldSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            _ => Err(Error::Parse(format!("--format '{s}': expected json or csv"))),
        }
    }
}

/// Names accepted by `--density`.
pub const DENSITY_NAMES: [&str; 6] = ["willmore", "bending", "helfrich", "pwillmore", "ksquared", "area"];

/// Everything a run can be configured with.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// `name:key=value,...`, e.g. `torus:R=2,a=1`.
    pub surface: Option<String>,
    /// Ambient curvature; also the `k0` of the Willmore and bending densities.
    pub k0: Option<f64>,
    pub density: Option<String>,
    pub p: Option<f64>,
    pub c0: Option<f64>,
    pub kc: Option<f64>,
    pub kbar: Option<f64>,
    pub u: Option<FieldSpec>,
    pub f: Option<FieldSpec>,
    pub quantity: Option<String>,
    /// Longitude nodes; the latitude or tube direction uses half.
    pub grid: Option<usize>,
    /// Base finite-difference step; the default scales with curvature.
    pub step: Option<f64>,
    pub tolerance: Option<f64>,
    pub min_order: Option<f64>,
    /// Integrate over open patches (the field must vanish at the boundary).
    pub allow_open: Option<bool>,
    pub constraint: Option<Constraint>,
    pub force: Option<bool>,
    pub lmax: Option<usize>,
    pub k: Option<usize>,
    pub r: Option<f64>,
    pub format: Option<OutputFormat>,
    pub output: Option<PathBuf>,
}

macro_rules! merge_fields {
    ($base:ident, $over:ident, $($f:ident),*) => {
        RunConfig { $($f: $over.$f.or($base.$f)),* }
    };
}

impl RunConfig {
    /// Reads a JSON config; unknown keys are an error.
    pub fn from_json_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("--config '{}': {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("--config '{}': {e}", path.display())))
    }

    /// Fields set in `over` replace those in `self`.
    pub fn merged(self, over: RunConfig) -> RunConfig {
        let base = self;
        merge_fields!(
            base, over, surface, k0, density, p, c0, kc, kbar, u, f, quantity, grid, step, tolerance, min_order,
            allow_open, constraint, force, lmax, k, r, format, output
        )
    }

    /// Checks ranges and that referenced files exist.
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, x: Option<f64>| match x {
            Some(v) if !(v > 0.0 && v.is_finite()) => {
                Err(Error::InvalidParameter(format!("--{name} must be a positive number, got {v}")))
            }
            _ => Ok(()),
        };
        positive("p", self.p)?;
        positive("r", self.r)?;
        positive("step", self.step)?;
        positive("tolerance", self.tolerance)?;
        positive("kc", self.kc)?;
        if let Some(g) = self.grid {
            if g < GRID_RANGE.0 || g > GRID_RANGE.1 || g % 2 != 0 {
                return Err(Error::InvalidParameter(format!(
                    "--grid must be even and within {}..={}, got {g}",
                    GRID_RANGE.0, GRID_RANGE.1
                )));
            }
        }
        for (name, spec) in [("u", &self.u), ("f", &self.f)] {
            if let Some(FieldSpec::File(p)) = spec {
                if !p.exists() {
                    return Err(Error::Parse(format!("--{name}: file '{}' does not exist", p.display())));
                }
            }
        }
        if let Some(q) = &self.quantity {
            if q != "all" {
                q.parse::<Quantity>()?;
            }
        }
        if let Some(d) = &self.density {
            if !DENSITY_NAMES.contains(&d.as_str()) {
                return Err(Error::Parse(format!(
                    "--density '{d}': expected one of {}",
                    DENSITY_NAMES.join(", ")
                )));
            }
        }
        Ok(())
    }

    pub fn space_form(&self) -> Result<SpaceForm> {
        SpaceForm::from_k0(self.k0.unwrap_or(0.0))
    }

    pub fn grid(&self) -> usize {
        self.grid.unwrap_or(DEFAULT_GRID)
    }

    pub fn surface_spec(&self) -> Result<SurfaceSpec> {
        self.surface.as_deref().unwrap_or("sphere:r=1").parse()
    }

    /// Samples the configured surface in the configured space form.
    pub fn sample(&self) -> Result<SurfaceSample> {
        let sf = self.space_form()?;
        let surface = self.surface_spec()?.resolve(&sf)?;
        let s = sample_catalog(surface, &surface.default_domain(self.grid())?, sf)?;
        Ok(s.with_open_override(self.allow_open.unwrap_or(false)))
    }

    pub fn density_spec(&self) -> Result<DensitySpec> {
        let k0 = self.k0.unwrap_or(0.0);
        Ok(match self.density.as_deref().unwrap_or("willmore") {
            "willmore" => DensitySpec::Willmore { k0 },
            "bending" => DensitySpec::Bending { k0 },
            "helfrich" => DensitySpec::Helfrich {
                kc: self.kc.unwrap_or(1.0),
                c0: self.c0.unwrap_or(0.0),
                kbar: self.kbar.unwrap_or(0.0),
            },
            "pwillmore" => DensitySpec::Pwillmore { p: self.p.unwrap_or(2.0) },
            "ksquared" => DensitySpec::Ksquared,
            "area" => DensitySpec::Area,
            other => {
                return Err(Error::Parse(format!(
                    "--density '{other}': expected one of {}",
                    DENSITY_NAMES.join(", ")
                )))
            }
        })
    }

    pub fn field(&self) -> FieldSpec {
        self.u.clone().unwrap_or_default()
    }

    /// `None` means every quantity.
    pub fn quantities(&self) -> Result<Vec<Quantity>> {
        match self.quantity.as_deref() {
            None | Some("all") => Ok(Quantity::ALL.to_vec()),
            Some(q) => Ok(vec![q.parse()?]),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_specs_round_trip() {
        for text in ["const:2.5", "harmonic:3,-2", "random:seed=7", "data/u.csv"] {
            let spec: FieldSpec = text.parse().unwrap();
            assert_eq!(spec.to_string(), text);
        }
        assert_eq!("const".parse::<FieldSpec>().unwrap(), FieldSpec::Const(1.0));
        for bad in ["harmonic:2", "random:7", "noise", "const:x"] {
            let e = bad.parse::<FieldSpec>().unwrap_err().to_string();
            assert!(e.contains("--u"), "{e}");
        }
    }

    #[test]
    fn flags_win_over_the_file() {
        let file: RunConfig = serde_json::from_str(r#"{"surface": "torus:R=2,a=1", "p": 3, "grid": 64}"#).unwrap();
        let flags = RunConfig {
            p: Some(4.0),
            ..Default::default()
        };
        let m = file.merged(flags);
        assert_eq!(m.p, Some(4.0));
        assert_eq!(m.grid, Some(64));
        assert_eq!(m.surface.as_deref(), Some("torus:R=2,a=1"));
    }

    #[test]
    fn unknown_keys_and_ranges_are_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"surfce": "sphere"}"#).is_err());
        let c = RunConfig {
            grid: Some(7),
            ..Default::default()
        };
        assert!(c.validate().unwrap_err().to_string().contains("--grid"));
        let c = RunConfig {
            u: Some(FieldSpec::File("/nonexistent/u.csv".into())),
            ..Default::default()
        };
        assert!(c.validate().unwrap_err().to_string().contains("does not exist"));
        let c = RunConfig {
            density: Some("elastic".into()),
            ..Default::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn builds_a_sample_and_density() {
        let c = RunConfig {
            surface: Some("clifford_torus_S3".into()),
            k0: Some(1.0),
            grid: Some(32),
            ..Default::default()
        };
        c.validate().unwrap();
        let s = c.sample().unwrap();
        assert_eq!(s.space_form().k0(), 1.0);
        assert_eq!(c.density_spec().unwrap(), DensitySpec::Willmore { k0: 1.0 });
        assert_eq!(c.quantities().unwrap().len(), Quantity::ALL.len());
    }
}
