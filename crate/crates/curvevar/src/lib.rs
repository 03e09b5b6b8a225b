//! Curvature functionals on surfaces in three-dimensional space forms.
//!
//! Surfaces are sampled on structured grids with exact derivative series at
//! every node. On top of that the crate evaluates energies `∫E(H, K) dS`,
//! their first and second variations along normal deformations, and checks
//! each formula against finite differences of deformed surfaces.
//!
//! ```
//! use curvevar::{functional_value, sample_catalog, CatalogSurface, SpaceForm, Willmore};
//!
//! let sphere = CatalogSurface::Sphere { r: 1.0 };
//! let s = sample_catalog(sphere, &sphere.default_domain(32)?, SpaceForm::euclidean())?;
//! let w = functional_value(&s, &Willmore { k0: 0.0 })?;
//! assert!((w - 4.0 * std::f64::consts::PI).abs() < 1e-10);
//! # Ok::<(), curvevar::Error>(())
//! ```

pub mod acceptance;
pub mod calculus;
pub mod config;
pub mod curvature;
pub mod density;
pub mod error;
pub mod harmonics;
pub mod jet;
pub mod oracle;
pub mod pwillmore;
pub mod random;
pub mod space_form;
pub mod surface;
pub mod tensor;
pub mod variations;

pub use calculus::{integrate, laplace_beltrami, ScalarField};
pub use config::{FieldSpec, RunConfig};
pub use density::{Area, Bending, DensitySpec, EnergyDensity, Helfrich, KSquared, PWillmore, Willmore};
pub use error::{Error, Result};
pub use oracle::{evolution_check, fd_variation_oracle, OracleOptions, Quantity, VariationOrder, VariationReport};
pub use pwillmore::{sphere_index_form, stability_report, PWillmoreSetting, StabilityReport};
pub use space_form::SpaceForm;
pub use surface::{deform_normal, sample_builtin, sample_catalog, CatalogSurface, PatchDomain, SurfaceSample};
pub use variations::{first_variation, functional_value, second_variation, Constraint, SecondVariationOptions};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/space-forms.md")]
    mod space_forms {}
    #[doc = include_str!("../../../book/src/surfaces.md")]
    mod surfaces {}
    #[doc = include_str!("../../../book/src/curvature.md")]
    mod curvature {}
    #[doc = include_str!("../../../book/src/calculus.md")]
    mod calculus {}
    #[doc = include_str!("../../../book/src/energies.md")]
    mod energies {}
    #[doc = include_str!("../../../book/src/second-variation.md")]
    mod second_variation {}
    #[doc = include_str!("../../../book/src/oracles.md")]
    mod oracles {}
    #[doc = include_str!("../../../book/src/spheres.md")]
    mod spheres {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/acceptance.md")]
    mod acceptance {}
}
