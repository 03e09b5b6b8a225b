//! Real spherical harmonics on round spheres in ℝ³ and projections onto them.
//!
//! Harmonics are evaluated from the ambient position, as polynomials in the
//! unit vector `x / r`, so they do not depend on how the sphere is charted.
//! `Y_ℓm` is orthonormal on the unit sphere; fields on a sphere of radius `r`
//! use `Y_ℓm / r`, which is orthonormal for `dS`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::calculus::{integrate_values, ScalarField};
use crate::error::{Error, Result};
use crate::jet::Scalar;
use crate::surface::SurfaceSample;

/// Largest supported degree.
pub const L_MAX: usize = 8;

/// Relative tolerance on `|x| = r` for a sample to count as a round sphere.
pub const SPHERE_TOLERANCE: f64 = 1e-9;

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `d^m P_ℓ / dz^m` by the associated Legendre recurrence in `ℓ`.
fn legendre_derivative<T: Scalar>(l: usize, m: usize, z: T) -> T {
    let double_factorial: f64 = (1..=m).map(|k| (2 * k - 1) as f64).product();
    let mut prev = z.lift(double_factorial);
    if l == m {
        return prev;
    }
    let mut cur = z * ((2 * m + 1) as f64) * double_factorial;
    for n in (m + 2)..=l {
        let next = (z * cur * (2 * n - 1) as f64 - prev * (n + m - 1) as f64) / (n - m) as f64;
        prev = cur;
        cur = next;
    }
    cur
}

/// Legendre polynomial `P_ℓ(z)`.
pub fn legendre<T: Scalar>(l: usize, z: T) -> T {
    legendre_derivative(l, 0, z)
}

/// Orthonormal real harmonic `Y_ℓm` at a unit vector `x`; `m < 0` selects
/// the sine branch.
pub fn real_harmonic<T: Scalar>(l: usize, m: i32, x: [T; 3]) -> T {
    let am = m.unsigned_abs() as usize;
    let q = legendre_derivative(l, am, x[2]);
    let norm = ((2 * l + 1) as f64 / (4.0 * PI) * factorial(l - am) / factorial(l + am)).sqrt();
    if am == 0 {
        return q * norm;
    }
    // (x + iy)^m = sin^m θ e^{imφ}
    let (mut re, mut im) = (x[0].lift(1.0), x[0].lift(0.0));
    for _ in 0..am {
        let r = re * x[0] - im * x[1];
        im = re * x[1] + im * x[0];
        re = r;
    }
    let trig = if m > 0 { re } else { im };
    q * trig * (norm * std::f64::consts::SQRT_2)
}

fn check_degree(l: usize, m: i32) -> Result<()> {
    if l > L_MAX || m.unsigned_abs() as usize > l {
        return Err(Error::InvalidParameter(format!(
            "harmonic (l={l}, m={m}) needs l ≤ {L_MAX} and |m| ≤ l"
        )));
    }
    Ok(())
}

/// Radius of a closed round sphere in ℝ³ centred at the origin.
pub fn sphere_radius(s: &SurfaceSample) -> Result<f64> {
    let not = |reason: String| Error::NotSphere {
        radius: f64::NAN,
        reason,
    };
    if !s.space_form().is_euclidean() {
        return Err(not("ambient is not Euclidean".into()));
    }
    if !s.domain().is_closed() {
        return Err(not("surface is not closed".into()));
    }
    let norms: Vec<f64> = s
        .nodes()
        .iter()
        .map(|n| n.position[..3].iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    let r = norms.iter().sum::<f64>() / norms.len() as f64;
    let dev = norms.iter().fold(0.0f64, |m, x| m.max((x - r).abs()));
    if !(r > 0.0) || dev > SPHERE_TOLERANCE * r {
        return Err(not(format!("|x| varies by {dev:.3e} around {r}")));
    }
    Ok(r)
}

fn unit_position_field<F>(s: &SurfaceSample, f: F) -> Result<ScalarField>
where
    F: Fn([crate::jet::Jet; 3]) -> crate::jet::Jet + Send + Sync + 'static,
{
    let r = sphere_radius(s)?;
    let immersion = s.immersion().clone();
    ScalarField::try_from_fn(s.domain(), move |u, v| {
        let x = immersion.position(u, v)?;
        Ok(f([x[0] / r, x[1] / r, x[2] / r]) / r)
    })
}

/// `Y_ℓm / r` on a sphere sample of radius `r`: unit `L²(dS)` norm.
pub fn harmonic_field(s: &SurfaceSample, l: usize, m: i32) -> Result<ScalarField> {
    check_degree(l, m)?;
    unit_position_field(s, move |x| real_harmonic(l, m, x))
}

/// The zonal Legendre field `P_ℓ(z / r)`, not normalised.
pub fn zonal_field(s: &SurfaceSample, l: usize) -> Result<ScalarField> {
    check_degree(l, 0)?;
    let r = sphere_radius(s)?;
    unit_position_field(s, move |x| legendre(l, x[2]) * r)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HarmonicCoefficient {
    pub l: usize,
    pub m: i32,
    pub value: f64,
}

/// Coefficients of a field against the orthonormal basis `Y_ℓm / r`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HarmonicDecomposition {
    pub l_max: usize,
    pub radius: f64,
    /// Ordered by `ℓ`, then `m` from `−ℓ` to `ℓ`.
    pub coefficients: Vec<HarmonicCoefficient>,
    /// `∫ u² dS`.
    pub total_energy: f64,
    /// `∫ u² dS − Σ c²`.
    pub residual_energy: f64,
}

impl HarmonicDecomposition {
    pub fn coefficient(&self, l: usize, m: i32) -> Option<f64> {
        self.coefficients.iter().find(|c| c.l == l && c.m == m).map(|c| c.value)
    }

    /// `Σ_m c_ℓm²`.
    pub fn energy_in(&self, l: usize) -> f64 {
        self.coefficients.iter().filter(|c| c.l == l).map(|c| c.value * c.value).sum()
    }

    /// Coefficients with `|c| > tol · ‖u‖`.
    pub fn nonzero(&self, tol: f64) -> Vec<HarmonicCoefficient> {
        let norm = self.total_energy.sqrt();
        self.coefficients.iter().copied().filter(|c| c.value.abs() > tol * norm).collect()
    }

    /// The `ℓ = 1` part has norm at most `tol · ‖u‖`.
    pub fn is_orthogonal_to_first_eigenspace(&self, tol: f64) -> bool {
        self.energy_in(1).sqrt() <= tol * self.total_energy.sqrt()
    }

    /// The `ℓ = 0` part has norm at most `tol · ‖u‖`.
    pub fn is_orthogonal_to_constants(&self, tol: f64) -> bool {
        self.energy_in(0).sqrt() <= tol * self.total_energy.sqrt()
    }
}

/// Projects `u` onto harmonics of degree `≤ l_max` by quadrature.
pub fn harmonic_project(s: &SurfaceSample, u: &ScalarField, l_max: usize) -> Result<HarmonicDecomposition> {
    check_degree(l_max, 0)?;
    u.check_domain(s.domain())?;
    let radius = sphere_radius(s)?;
    let squares: Vec<f64> = u.values().iter().map(|x| x * x).collect();
    let total_energy = integrate_values(&squares, s)?;
    let mut coefficients = Vec::new();
    for l in 0..=l_max {
        for m in -(l as i32)..=(l as i32) {
            let y = harmonic_field(s, l, m)?;
            let prod: Vec<f64> = u.values().iter().zip(y.values()).map(|(a, b)| a * b).collect();
            coefficients.push(HarmonicCoefficient {
                l,
                m,
                value: integrate_values(&prod, s)?,
            });
        }
    }
    let captured: f64 = coefficients.iter().map(|c| c.value * c.value).sum();
    Ok(HarmonicDecomposition {
        l_max,
        radius,
        coefficients,
        total_energy,
        residual_energy: total_energy - captured,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::laplace_beltrami;
    use crate::space_form::SpaceForm;
    use crate::surface::{sample_catalog, CatalogSurface};

    fn sphere(r: f64, n: usize) -> SurfaceSample {
        let c = CatalogSurface::Sphere { r };
        sample_catalog(c, &c.default_domain(n).unwrap(), SpaceForm::euclidean()).unwrap()
    }

    #[test]
    fn basis_is_orthonormal_under_quadrature() {
        let s = sphere(2.0, 48);
        let mut fields = Vec::new();
        for l in 0..=4 {
            for m in -(l as i32)..=(l as i32) {
                fields.push(harmonic_field(&s, l, m).unwrap());
            }
        }
        for (a, fa) in fields.iter().enumerate() {
            for (b, fb) in fields.iter().enumerate() {
                let prod: Vec<f64> = fa.values().iter().zip(fb.values()).map(|(x, y)| x * y).collect();
                let g = integrate_values(&prod, &s).unwrap();
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((g - expect).abs() < 1e-12, "{a} {b} {g}");
            }
        }
    }

    #[test]
    fn harmonics_are_eigenfunctions() {
        let r = 1.5;
        let s = sphere(r, 64);
        for l in 0..=L_MAX {
            for m in [-(l as i32), 0, l as i32] {
                let y = harmonic_field(&s, l, m).unwrap();
                let lap = laplace_beltrami(&y, &s).unwrap();
                let lambda = (l * (l + 1)) as f64 / (r * r);
                let err = lap
                    .values()
                    .iter()
                    .zip(y.values())
                    .fold(0.0f64, |e, (a, b)| e.max((a + lambda * b).abs()));
                assert!(err < 1e-9 * (1.0 + lambda) * y.max_abs(), "l={l} m={m} err={err}");
            }
        }
    }

    #[test]
    fn projections_pick_out_the_right_modes() {
        let s = sphere(1.0, 48);
        let c = ScalarField::from_fn(s.domain(), |t, _| t.cos());
        let d = harmonic_project(&s, &c, 4).unwrap();
        let nz = d.nonzero(1e-10);
        assert_eq!(nz.len(), 1);
        assert_eq!((nz[0].l, nz[0].m), (1, 0));
        assert!(!d.is_orthogonal_to_first_eigenspace(1e-6));

        let one = ScalarField::constant(s.domain(), 1.0);
        let d = harmonic_project(&s, &one, 4).unwrap();
        let nz = d.nonzero(1e-10);
        assert_eq!(nz.len(), 1);
        assert_eq!((nz[0].l, nz[0].m), (0, 0));

        let mix = ScalarField::from_fn(s.domain(), |t, _| {
            let c = t.cos();
            c + (c * c * 3.0 - 1.0) * 0.5
        });
        let d = harmonic_project(&s, &mix, 6).unwrap();
        let nz = d.nonzero(1e-10);
        assert_eq!(nz.iter().map(|c| (c.l, c.m)).collect::<Vec<_>>(), vec![(1, 0), (2, 0)]);
        // ∫cos²θ dS = 4π/3 and ∫P₂² dS = 4π/5.
        assert!((d.coefficient(1, 0).unwrap().abs() - (4.0 * PI / 3.0).sqrt()).abs() < 1e-8);
        assert!((d.coefficient(2, 0).unwrap().abs() - (4.0 * PI / 5.0).sqrt()).abs() < 1e-8);
        assert!(d.residual_energy.abs() < 1e-8 * d.total_energy);
    }

    #[test]
    fn non_spheres_are_rejected() {
        let t = CatalogSurface::Torus { big_r: 2.0, a: 1.0 };
        let s = sample_catalog(t, &t.default_domain(32).unwrap(), SpaceForm::euclidean()).unwrap();
        assert!(matches!(sphere_radius(&s), Err(Error::NotSphere { .. })));
        assert!(harmonic_field(&sphere(1.0, 32), 9, 0).is_err());
    }
}
