//! The p-Willmore energy `∫ Hᵖ dS`: its Euler-Lagrange residual, the index
//! form of round spheres in ℝ³, the Laplacian spectrum and Poincaré
//! inequalities on spheres, and the sphere stability report.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::calculus::{gradient_norm_sq, integrate_values, laplace_beltrami, laplacian_of, ScalarField};
use crate::error::{Error, Result};
use crate::harmonics::{harmonic_field, sphere_radius, L_MAX};
use crate::jet::Jet;
use crate::space_form::SpaceForm;
use crate::surface::{sample_catalog, CatalogSurface, SurfaceSample};

/// Longitude nodes of the default sphere grid (latitude uses half).
pub const SPHERE_GRID: usize = 128;

/// Relative tolerance for `∫ u dS = 0`.
pub const VOLUME_TOLERANCE: f64 = 1e-8;

/// Relative tolerance for orthogonality to the excluded eigenspaces.
pub const ORTHOGONALITY_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PWillmoreSetting {
    pub p: f64,
    pub r: f64,
    pub k0: f64,
}

impl PWillmoreSetting {
    pub fn new(p: f64, r: f64) -> Result<Self> {
        if !(p >= 1.0) || !p.is_finite() {
            return Err(Error::InvalidParameter(format!("p-Willmore exponent must be ≥ 1, got {p}")));
        }
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::InvalidParameter(format!("sphere radius must be positive, got {r}")));
        }
        Ok(Self { p, r, k0: 0.0 })
    }

    /// A round sphere of radius `r` on the default grid.
    pub fn sphere(&self) -> Result<SurfaceSample> {
        sphere_sample(self.r, SPHERE_GRID)
    }

    /// `(2p² − 3p + 4) / (2r²)`.
    pub fn coercivity_bound(&self) -> f64 {
        let p = self.p;
        (2.0 * p * p - 3.0 * p + 4.0) / (2.0 * self.r * self.r)
    }

    /// Index form per unit `∫u² dS` on an eigenfunction with eigenvalue `λ`.
    pub fn eigen_index(&self, lambda: f64) -> f64 {
        let (p, r) = (self.p, self.r);
        r.powf(-p)
            * (p * (p - 1.0) * r * r / 4.0 * lambda * lambda - (p * p - p - 1.0) * lambda
                + (p - 1.0) * (p - 2.0) / (r * r))
    }
}

/// A sphere of radius `r` in ℝ³ with `n` longitude nodes.
pub fn sphere_sample(r: f64, n: usize) -> Result<SurfaceSample> {
    let c = CatalogSurface::Sphere { r };
    sample_catalog(c, &c.default_domain(n)?, SpaceForm::euclidean())
}

fn is_integer(p: f64) -> bool {
    p.fract() == 0.0
}

/// `(p/2) Δ(H^{p−1}) + p(2H² − K + 2k₀) H^{p−1} − 2H^{p+1}`.
pub fn pwillmore_el_residual(s: &SurfaceSample, p: f64) -> Result<ScalarField> {
    if !(p >= 1.0) {
        return Err(Error::InvalidParameter(format!("p-Willmore exponent must be ≥ 1, got {p}")));
    }
    if s.order() < 4 {
        return Err(Error::InsufficientOrder {
            required: 4,
            available: s.order(),
        });
    }
    let k0 = s.space_form().k0();
    let integer = is_integer(p);
    let values = s
        .nodes()
        .iter()
        .enumerate()
        .map(|(k, n)| {
            let (h, kk) = (n.scalars.mean, n.scalars.gauss);
            if !integer && !(h > 0.0) {
                let (i, j) = s.domain().split(k);
                return Err(Error::DomainGuard {
                    density: format!("pwillmore(p={p})"),
                    i,
                    j,
                    h,
                    k: kk,
                });
            }
            let pow = |jet: &Jet, e: f64| -> Jet {
                if integer {
                    jet.powi(e as i32)
                } else {
                    jet.powf(e)
                }
            };
            let hp1 = pow(&n.mean_jet, p - 1.0);
            let lap = laplacian_of(&n.forms, &hp1);
            Ok(0.5 * p * lap + p * (2.0 * h * h - kk + 2.0 * k0) * hp1.value() - 2.0 * pow(&n.mean_jet, p + 1.0).value())
        })
        .collect::<Result<Vec<f64>>>()?;
    ScalarField::from_values(s.domain(), values)
}

fn check_sphere(s: &SurfaceSample, r: f64) -> Result<()> {
    let found = sphere_radius(s)?;
    if (found - r).abs() > 1e-9 * r {
        return Err(Error::NotSphere {
            radius: r,
            reason: format!("sample radius is {found}"),
        });
    }
    Ok(())
}

/// `(1/rᵖ) ∫ [p(p−1)r²/4 (Δu)² + (p²−p−1) uΔu + (p−1)(p−2)/r² u²] dS` for
/// volume-preserving `u` (`∫ u dS = 0`).
pub fn sphere_index_form(setting: &PWillmoreSetting, s: &SurfaceSample, u: &ScalarField) -> Result<f64> {
    check_sphere(s, setting.r)?;
    u.check_domain(s.domain())?;
    let mean = integrate_values(u.values(), s)?;
    let area: f64 = s.area_weights().iter().sum();
    let sq: Vec<f64> = u.values().iter().map(|x| x * x).collect();
    let norm = (area * integrate_values(&sq, s)?).sqrt();
    let tolerance = VOLUME_TOLERANCE * norm + 1e-14;
    if mean.abs() > tolerance {
        return Err(Error::VolumeConstraint {
            value: mean.abs(),
            tolerance,
        });
    }
    let lap = laplace_beltrami(u, s)?;
    index_integral(setting, s, u.values(), lap.values())
}

fn index_integral(setting: &PWillmoreSetting, s: &SurfaceSample, u: &[f64], lap: &[f64]) -> Result<f64> {
    let (p, r) = (setting.p, setting.r);
    let integrand: Vec<f64> = u
        .iter()
        .zip(lap)
        .map(|(u, l)| p * (p - 1.0) * r * r / 4.0 * l * l + (p * p - p - 1.0) * u * l + (p - 1.0) * (p - 2.0) / (r * r) * u * u)
        .collect();
    Ok(integrate_values(&integrand, s)? / r.powf(p))
}

/// `(λ_k, N_k) = (k(k+1)/r², C(k+2, 2))`.
pub fn sphere_spectrum(k: usize, r: f64) -> (f64, usize) {
    ((k * (k + 1)) as f64 / (r * r), (k + 2) * (k + 1) / 2)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumCheck {
    pub k: usize,
    pub radius: f64,
    pub eigenvalue: f64,
    /// Largest `|λ̂ − λ_k| / max(λ_k, 1)` over the basis of the eigenspace, with
    /// `λ̂ = −∫ YΔY / ∫ Y²` from the sampled Laplacian.
    pub eigenvalue_error: f64,
    /// Largest `sup |ΔY + λ_k Y| / sup |Y|`.
    pub residual_sup: f64,
    /// `N_k` as stated.
    pub stated_multiplicity: usize,
    /// Dimension of the `λ_k` eigenspace inside the restricted degree-`k`
    /// polynomials, from the discrete Laplacian.
    pub measured_multiplicity: usize,
}

/// Checks the sampled Laplacian on the degree-`k` eigenspace of a sphere.
pub fn spectrum_check(s: &SurfaceSample, k: usize) -> Result<SpectrumCheck> {
    if k > L_MAX {
        return Err(Error::InvalidParameter(format!("k must be ≤ {L_MAX}")));
    }
    let r = sphere_radius(s)?;
    let (lambda, stated) = sphere_spectrum(k, r);
    let ms: Vec<i32> = (-(k as i32)..=(k as i32)).collect();
    let per_m = ms
        .par_iter()
        .map(|&m| {
            let y = harmonic_field(s, k, m)?.to_sampled();
            let lap = laplace_beltrami(&y, s)?;
            let num: Vec<f64> = y.values().iter().zip(lap.values()).map(|(a, b)| -a * b).collect();
            let den: Vec<f64> = y.values().iter().map(|a| a * a).collect();
            let estimate = integrate_values(&num, s)? / integrate_values(&den, s)?;
            let res = y
                .values()
                .iter()
                .zip(lap.values())
                .fold(0.0f64, |e, (a, b)| e.max((b + lambda * a).abs()));
            Ok(((estimate - lambda).abs() / lambda.max(1.0), res / y.max_abs()))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;
    Ok(SpectrumCheck {
        k,
        radius: r,
        eigenvalue: lambda,
        eigenvalue_error: per_m.iter().fold(0.0f64, |m, x| m.max(x.0)),
        residual_sup: per_m.iter().fold(0.0f64, |m, x| m.max(x.1)),
        stated_multiplicity: stated,
        measured_multiplicity: measured_multiplicity(s, k)?,
    })
}

/// Number of independent functions in the span of the degree-`k` monomials
/// `xᵃyᵇzᶜ` (restricted to the sphere) that satisfy `Δf = −λ_k f`, found as
/// the near-null space of `(Δ + λ_k)` relative to the `L²` Gram matrix.
pub fn measured_multiplicity(s: &SurfaceSample, k: usize) -> Result<usize> {
    let r = sphere_radius(s)?;
    let lambda = (k * (k + 1)) as f64 / (r * r);
    let exps: Vec<(i32, i32, i32)> = (0..=k as i32)
        .flat_map(|a| (0..=(k as i32 - a)).map(move |b| (a, b, k as i32 - a - b)))
        .collect();
    let immersion = s.immersion().clone();
    let fields = exps
        .iter()
        .map(|&(a, b, c)| {
            let im = immersion.clone();
            let m = ScalarField::try_from_fn(s.domain(), move |u, v| {
                let x = im.position(u, v)?;
                Ok((x[0] / r).powi(a) * (x[1] / r).powi(b) * (x[2] / r).powi(c))
            })?
            .to_sampled();
            let lap = laplace_beltrami(&m, s)?;
            let res: Vec<f64> = lap.values().iter().zip(m.values()).map(|(l, f)| l + lambda * f).collect();
            Ok((m.values().to_vec(), res))
        })
        .collect::<Result<Vec<_>>>()?;
    let n = fields.len();
    let w = s.area_weights();
    let gram = |i: usize, j: usize, which: usize| -> f64 {
        let (a, b) = if which == 0 {
            (&fields[i].0, &fields[j].0)
        } else {
            (&fields[i].1, &fields[j].1)
        };
        a.iter().zip(b).zip(w).map(|((x, y), w)| x * y * w).sum()
    };
    let mass = DMatrix::from_fn(n, n, |i, j| gram(i, j, 0));
    let stiff = DMatrix::from_fn(n, n, |i, j| gram(i, j, 1));
    let chol = mass
        .cholesky()
        .ok_or_else(|| Error::InvalidParameter("monomial Gram matrix is singular".into()))?;
    let l_inv = chol
        .l()
        .try_inverse()
        .ok_or_else(|| Error::InvalidParameter("monomial Gram matrix is singular".into()))?;
    let reduced = &l_inv * stiff * l_inv.transpose();
    let reduced = (&reduced + reduced.transpose()) * 0.5;
    let eig = reduced.symmetric_eigenvalues();
    let tol = 1e-10 * lambda.max(1.0).powi(2);
    Ok(eig.iter().filter(|e| e.abs() <= tol).count())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PoincareReport {
    pub radius: f64,
    /// `∫ u² dS`.
    pub l2: f64,
    /// `(r²/6) ∫ |∇u|² dS`.
    pub gradient_term: f64,
    /// `(r⁴/36) ∫ (Δu)² dS`.
    pub laplacian_term: f64,
    pub gradient_ratio: f64,
    pub laplacian_ratio: f64,
    /// Both inequalities hold (to `1e-9` relative).
    pub holds: bool,
    /// All three quantities agree to `1e-6` relative.
    pub equality: bool,
}

/// `∫u² ≤ (r²/6)∫|∇u|² ≤ (r⁴/36)∫(Δu)²` for `u` orthogonal to constants and
/// to the first eigenspace.
pub fn poincare_check(s: &SurfaceSample, u: &ScalarField) -> Result<PoincareReport> {
    let r = sphere_radius(s)?;
    let d = crate::harmonics::harmonic_project(s, u, 1)?;
    if !(d.total_energy > 0.0) {
        return Err(Error::NotOrthogonal("u vanishes identically".into()));
    }
    if !d.is_orthogonal_to_constants(ORTHOGONALITY_TOLERANCE) {
        return Err(Error::NotOrthogonal("u has a constant component".into()));
    }
    if !d.is_orthogonal_to_first_eigenspace(ORTHOGONALITY_TOLERANCE) {
        return Err(Error::NotOrthogonal("u has a component in the first eigenspace".into()));
    }
    let g2 = gradient_norm_sq(u, s)?;
    let lap = laplace_beltrami(u, s)?;
    let lap2: Vec<f64> = lap.values().iter().map(|x| x * x).collect();
    let l2 = d.total_energy;
    let gradient_term = r * r / 6.0 * integrate_values(g2.values(), s)?;
    let laplacian_term = r.powi(4) / 36.0 * integrate_values(&lap2, s)?;
    let (gr, lr) = (gradient_term / l2, laplacian_term / l2);
    Ok(PoincareReport {
        radius: r,
        l2,
        gradient_term,
        laplacian_term,
        gradient_ratio: gr,
        laplacian_ratio: lr,
        holds: gr >= 1.0 - 1e-9 && laplacian_term >= gradient_term * (1.0 - 1e-9),
        equality: (gr - 1.0).abs() <= 1e-6 && (lr - 1.0).abs() <= 1e-6,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenspaceIndex {
    pub l: usize,
    pub eigenvalue: f64,
    /// Index form of each orthonormal basis member `Y_ℓm / r`, `m = −ℓ..ℓ`.
    pub values: Vec<f64>,
    /// `max − min` of `values`.
    pub spread: f64,
    /// Index per unit mass predicted from the eigenvalue alone.
    pub predicted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub p: f64,
    pub r: f64,
    pub l_max: usize,
    pub eigenspaces: Vec<EigenspaceIndex>,
    pub l1_index: f64,
    /// Signs per `ℓ = 1..l_max`: `-1`, `0` or `1`.
    pub signs: Vec<i8>,
    /// Smallest index per unit mass over `ℓ ≥ 2`.
    pub rayleigh_min: f64,
    pub coercivity_bound: f64,
    pub coercive: bool,
    pub verdict: String,
}

/// Absolute threshold under which an index per unit mass counts as zero.
pub const SIGN_TOLERANCE: f64 = 1e-8;

fn sign(x: f64) -> i8 {
    if x > SIGN_TOLERANCE {
        1
    } else if x < -SIGN_TOLERANCE {
        -1
    } else {
        0
    }
}

/// Index form on each eigenspace `ℓ = 1..l_max` of a sphere sample.
pub fn stability_report_on(setting: &PWillmoreSetting, s: &SurfaceSample, l_max: usize) -> Result<StabilityReport> {
    if l_max < 1 || l_max > L_MAX {
        return Err(Error::InvalidParameter(format!("l_max must be in 1..={L_MAX}")));
    }
    check_sphere(s, setting.r)?;
    let eigenspaces = (1..=l_max)
        .into_par_iter()
        .map(|l| {
            let values = (-(l as i32)..=(l as i32))
                .map(|m| sphere_index_form(setting, s, &harmonic_field(s, l, m)?))
                .collect::<Result<Vec<f64>>>()?;
            let (lo, hi) = values
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(*x), b.max(*x)));
            let eigenvalue = sphere_spectrum(l, setting.r).0;
            Ok(EigenspaceIndex {
                l,
                eigenvalue,
                values,
                spread: hi - lo,
                predicted: setting.eigen_index(eigenvalue),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mean = |e: &EigenspaceIndex| e.values.iter().sum::<f64>() / e.values.len() as f64;
    let l1_index = mean(&eigenspaces[0]);
    let signs: Vec<i8> = eigenspaces
        .iter()
        .map(|e| {
            let s: Vec<i8> = e.values.iter().map(|v| sign(*v)).collect();
            if s.iter().all(|x| *x == s[0]) {
                s[0]
            } else {
                0
            }
        })
        .collect();
    let rayleigh_min = eigenspaces
        .iter()
        .skip(1)
        .flat_map(|e| e.values.iter().copied())
        .fold(f64::INFINITY, f64::min);
    let bound = setting.coercivity_bound();
    let higher_positive = signs.iter().skip(1).all(|x| *x > 0);
    let verdict = match (signs[0], higher_positive) {
        (-1, true) => "unstable in first eigenspace",
        (0, true) => "marginally stable in first eigenspace",
        (1, true) => "stable on tested eigenspaces",
        _ => "unstable beyond first eigenspace",
    };
    Ok(StabilityReport {
        p: setting.p,
        r: setting.r,
        l_max,
        eigenspaces,
        l1_index,
        signs,
        rayleigh_min,
        coercivity_bound: bound,
        coercive: rayleigh_min >= bound * (1.0 - 1e-6),
        verdict: verdict.to_string(),
    })
}

/// [`stability_report_on`] on the default sphere grid.
pub fn stability_report(setting: &PWillmoreSetting, l_max: usize) -> Result<StabilityReport> {
    stability_report_on(setting, &setting.sphere()?, l_max)
}

fn random_coefficients(seed: u64, count: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn harmonic_range(l_lo: usize, l_hi: usize) -> Result<Vec<(usize, i32)>> {
    if l_lo > l_hi || l_hi > L_MAX {
        return Err(Error::InvalidParameter(format!("need l_lo ≤ l_hi ≤ {L_MAX}")));
    }
    Ok((l_lo..=l_hi)
        .flat_map(|l| (-(l as i32)..=(l as i32)).map(move |m| (l, m)))
        .collect())
}

/// A random field in the span of `Y_ℓm / r` for `ℓ ∈ [l_lo, l_hi]`, with
/// uniform coefficients in `[−1, 1)` drawn from `seed`.
pub fn random_harmonic_field(s: &SurfaceSample, l_lo: usize, l_hi: usize, seed: u64) -> Result<ScalarField> {
    let modes = harmonic_range(l_lo, l_hi)?;
    let coeffs = random_coefficients(seed, modes.len());
    let mut acc: Option<ScalarField> = None;
    for (&(l, m), c) in modes.iter().zip(&coeffs) {
        let y = harmonic_field(s, l, m)?.scaled(*c);
        acc = Some(match acc {
            None => y,
            Some(a) => a.combine(1.0, &y, 1.0)?,
        });
    }
    Ok(acc.expect("non-empty range"))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoercivityReport {
    pub p: f64,
    pub r: f64,
    /// Rayleigh quotient `I(u,u) / ∫u² dS` per seed.
    pub quotients: Vec<f64>,
    pub minimum: f64,
    pub bound: f64,
    /// `minimum ≥ bound − tolerance`.
    pub holds: bool,
}

/// Rayleigh quotients of the index form for seeded random fields in the
/// span of `ℓ = l_lo..l_hi` (the same fields as [`random_harmonic_field`]).
/// Each field is assembled node by node from the sampled basis and its
/// sampled Laplacian.
pub fn coercivity_check(
    setting: &PWillmoreSetting,
    s: &SurfaceSample,
    l_lo: usize,
    l_hi: usize,
    seeds: &[u64],
    tolerance: f64,
) -> Result<CoercivityReport> {
    check_sphere(s, setting.r)?;
    let modes = harmonic_range(l_lo, l_hi)?;
    let basis = modes
        .par_iter()
        .map(|&(l, m)| {
            let y = harmonic_field(s, l, m)?.to_sampled();
            let lap = laplace_beltrami(&y, s)?;
            Ok((y.values().to_vec(), lap.values().to_vec()))
        })
        .collect::<Result<Vec<_>>>()?;
    let quotients = seeds
        .iter()
        .map(|seed| {
            let coeffs = random_coefficients(*seed, modes.len());
            let mut u = vec![0.0; s.len()];
            let mut lap = vec![0.0; s.len()];
            for ((y, ly), c) in basis.iter().zip(&coeffs) {
                for k in 0..s.len() {
                    u[k] += c * y[k];
                    lap[k] += c * ly[k];
                }
            }
            let sq: Vec<f64> = u.iter().map(|x| x * x).collect();
            Ok(index_integral(setting, s, &u, &lap)? / integrate_values(&sq, s)?)
        })
        .collect::<Result<Vec<f64>>>()?;
    let minimum = quotients.iter().copied().fold(f64::INFINITY, f64::min);
    let bound = setting.coercivity_bound();
    Ok(CoercivityReport {
        p: setting.p,
        r: setting.r,
        quotients,
        minimum,
        bound,
        holds: minimum >= bound - tolerance,
    })
}

/// `I(u, u) / ∫ u² dS`.
pub fn rayleigh_quotient(setting: &PWillmoreSetting, s: &SurfaceSample, u: &ScalarField) -> Result<f64> {
    let sq: Vec<f64> = u.values().iter().map(|x| x * x).collect();
    Ok(sphere_index_form(setting, s, u)? / integrate_values(&sq, s)?)
}
