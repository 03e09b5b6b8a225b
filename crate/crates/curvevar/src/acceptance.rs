//! The fourteen acceptance criteria, runnable from tests and the CLI.
//!
//! Each criterion returns a verdict with one line of detail per sub-check.
//! Errors inside a criterion are reported as a failure, never swallowed.

use std::f64::consts::PI;
use std::fmt;

use serde::Serialize;

use crate::calculus::{integrate_values, ScalarField};
use crate::curvature::{codazzi_residual, gauss_residual};
use crate::density::{Area, Bending, EnergyDensity, Helfrich, KSquared, PWillmore, Willmore};
use crate::error::Result;
use crate::harmonics::zonal_field;
use crate::oracle::{evolution_check_multi, fd_variation_oracle, fd_variation_oracle_multi, OracleOptions, Quantity, VariationOrder};
use crate::pwillmore::{
    coercivity_check, poincare_check, sphere_index_form, sphere_sample, spectrum_check, stability_report_on,
    PWillmoreSetting,
};
use crate::random::random_field;
use crate::space_form::SpaceForm;
use crate::surface::{sample_catalog, CatalogSurface, SurfaceSample};
use crate::variations::{
    el_residual, first_variation, functional_value, second_variation, Constraint, SecondVariationOptions,
};

/// Longitude nodes of the default grids (latitude or tube direction uses half).
pub const DEFAULT_GRID: usize = 128;

/// Longitude nodes for the spectrum criterion.
pub const SPECTRUM_GRID: usize = 256;

/// Number of criteria.
pub const CRITERIA: u8 = 14;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub details: Vec<String>,
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "criterion {:>2} {}: {}",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.title
        )
    }
}

/// Collects sub-checks; the criterion passes when all of them do.
#[derive(Default)]
struct Checks {
    ok: bool,
    lines: Vec<String>,
}

impl Checks {
    fn new() -> Self {
        Self {
            ok: true,
            lines: Vec::new(),
        }
    }

    fn check(&mut self, pass: bool, line: String) {
        self.ok &= pass;
        self.lines.push(format!("[{}] {line}", if pass { "ok" } else { "FAIL" }));
    }

    fn note(&mut self, line: String) {
        self.lines.push(format!("[note] {line}"));
    }
}

fn title(id: u8) -> &'static str {
    match id {
        1 => "Willmore energy of the unit sphere",
        2 => "p-Willmore energies of round spheres",
        3 => "first-variation oracle equivalence",
        4 => "p-Willmore sphere first variation",
        5 => "evolution equations along normal deformations",
        6 => "second-variation oracle equivalence at critical immersions",
        7 => "sphere index form on the first eigenspace",
        8 => "sign pattern of the sphere index form",
        9 => "coercivity on the complement of the first eigenspace",
        10 => "Poincaré inequalities on the sphere",
        11 => "Laplace-Beltrami spectrum of the sphere",
        12 => "Clifford torus in the 3-sphere",
        13 => "Codazzi and Gauss equations on catalog surfaces",
        14 => "Gauss-Bonnet and the Willmore-bending gap",
        _ => "unknown criterion",
    }
}

/// Runs one criterion; ids outside `1..=14` fail.
pub fn run_criterion(id: u8) -> CriterionResult {
    let outcome = match id {
        1 => c1(),
        2 => c2(),
        3 => c3(),
        4 => c4(),
        5 => c5(),
        6 => c6(),
        7 => c7(),
        8 => c8(),
        9 => c9(),
        10 => c10(),
        11 => c11(),
        12 => c12(),
        13 => c13(),
        14 => c14(),
        _ => {
            let mut c = Checks::new();
            c.check(false, format!("no criterion with id {id}"));
            Ok(c)
        }
    };
    let checks = outcome.unwrap_or_else(|e| {
        let mut c = Checks::new();
        c.check(false, format!("error: {e}"));
        c
    });
    CriterionResult {
        id,
        title: title(id),
        passed: checks.ok,
        details: checks.lines,
    }
}

/// Runs all criteria in order.
pub fn run_all() -> Vec<CriterionResult> {
    (1..=CRITERIA).map(run_criterion).collect()
}

fn euclidean(c: CatalogSurface, n: usize) -> Result<SurfaceSample> {
    sample_catalog(c, &c.default_domain(n)?, SpaceForm::euclidean())
}

fn in_unit_s3(c: CatalogSurface, n: usize) -> Result<SurfaceSample> {
    sample_catalog(c, &c.default_domain(n)?, SpaceForm::sphere(1.0)?)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn c1() -> Result<Checks> {
    let mut c = Checks::new();
    let s = sphere_sample(1.0, DEFAULT_GRID)?;
    let w = functional_value(&s, &Willmore { k0: 0.0 })?;
    c.check(rel(w, 4.0 * PI) <= 1e-8, format!("W = {w:.15}, rel error {:.2e}", rel(w, 4.0 * PI)));
    Ok(c)
}

fn c2() -> Result<Checks> {
    let mut c = Checks::new();
    for r in [0.5, 1.0, 2.0] {
        let s = sphere_sample(r, DEFAULT_GRID)?;
        for p in [1.0, 2.0, 3.0, 4.0] {
            let w = functional_value(&s, &PWillmore::new(p)?)?;
            let expect = 4.0 * PI * r.powf(2.0 - p);
            let e = rel(w, expect);
            c.check(e <= 1e-8, format!("p={p} r={r}: {w:.12} vs {expect:.12} (rel {e:.2e})"));
        }
    }
    Ok(c)
}

fn c3() -> Result<Checks> {
    let mut c = Checks::new();
    let densities: Vec<(&str, Box<dyn EnergyDensity>)> = vec![
        ("willmore", Box::new(Willmore { k0: 0.0 })),
        ("bending", Box::new(Bending { k0: 0.0 })),
        (
            "helfrich",
            Box::new(Helfrich {
                kc: 1.0,
                c0: 0.3,
                kbar: 0.5,
            }),
        ),
        ("pwillmore p=1", Box::new(PWillmore::new(1.0)?)),
        ("pwillmore p=3", Box::new(PWillmore::new(3.0)?)),
        ("ksquared", Box::new(KSquared)),
    ];
    let refs: Vec<&dyn EnergyDensity> = densities.iter().map(|(_, d)| d.as_ref()).collect();
    let surfaces = [
        ("sphere", euclidean(CatalogSurface::Sphere { r: 1.0 }, DEFAULT_GRID)?),
        ("torus(2,1)", euclidean(CatalogSurface::Torus { big_r: 2.0, a: 1.0 }, DEFAULT_GRID)?),
        (
            "catenoid",
            euclidean(CatalogSurface::Catenoid { c: 1.0 }, DEFAULT_GRID)?.with_open_override(true),
        ),
    ];
    for (name, s) in &surfaces {
        let (mut worst_rel, mut worst_order, mut count) = (0.0f64, f64::INFINITY, 0);
        for seed in 1..=5u64 {
            let u = random_field(s, seed)?;
            let reports = fd_variation_oracle_multi(s, &refs, &u, VariationOrder::First, OracleOptions::default())?;
            for ((dname, _), r) in densities.iter().zip(&reports) {
                count += 1;
                worst_rel = worst_rel.max(r.rel_error);
                if !r.at_noise_floor {
                    worst_order = worst_order.min(r.convergence_order);
                }
                if !r.passes(1e-5, 1.9) {
                    c.check(false, format!("{name} {dname} seed {seed}: {r}"));
                }
            }
        }
        c.check(
            true,
            format!("{name}: {count} cases, worst rel {worst_rel:.2e}, lowest order off the noise floor {worst_order:.2}"),
        );
    }
    Ok(c)
}

fn c4() -> Result<Checks> {
    let mut c = Checks::new();
    for r in [0.5, 1.0, 2.0] {
        let s = sphere_sample(r, DEFAULT_GRID)?;
        let one = ScalarField::constant(s.domain(), 1.0);
        for p in [1.0, 2.0, 3.0, 4.0] {
            let v = first_variation(&s, &PWillmore::new(p)?, &one)?;
            let expect = 4.0 * PI * (p - 2.0) * r.powf(1.0 - p);
            let err = if expect == 0.0 { v.abs() } else { rel(v, expect) };
            c.check(err <= 1e-7, format!("p={p} r={r}: {v:.12} vs {expect:.12} (err {err:.2e})"));
        }
    }
    Ok(c)
}

fn c5() -> Result<Checks> {
    let mut c = Checks::new();
    let torus = euclidean(CatalogSurface::Torus { big_r: 2.0, a: 1.0 }, DEFAULT_GRID)?;
    let gs = in_unit_s3(CatalogSurface::GeodesicSphereS3 { rho: 1.0, a: 1.0 }, DEFAULT_GRID)?;
    let cases = [
        ("torus(2,1)", &torus, ScalarField::from_fn(torus.domain(), |a, _| a.sin())),
        ("geodesic sphere in S3", &gs, ScalarField::from_position(&gs, |x| x[0])?),
    ];
    for (name, s, f) in cases {
        let u = random_field(s, 7)?;
        for r in evolution_check_multi(s, &u, Some(&f), &Quantity::ALL, None)? {
            c.check(r.passes(1e-4, 1.9), format!("{name} {r}"));
        }
    }
    Ok(c)
}

fn c6() -> Result<Checks> {
    let mut c = Checks::new();
    let plain = SecondVariationOptions::default();
    let second = |c: &mut Checks, name: &str, s: &SurfaceSample, e: &dyn EnergyDensity, u: &ScalarField| -> Result<()> {
        let sv = second_variation(s, e, u, plain)?;
        let r = fd_variation_oracle(s, e, u, VariationOrder::Second, OracleOptions::default())?;
        c.check(r.rel_error <= 1e-4, format!("{name}: {r}; EL residual {:.2e}", sv.criticality.residual_sup));
        Ok(())
    };
    let sphere = sphere_sample(1.0, DEFAULT_GRID)?;
    second(&mut c, "unit sphere, Willmore", &sphere, &Willmore { k0: 0.0 }, &random_field(&sphere, 1)?)?;
    let clifford = in_unit_s3(CatalogSurface::CliffordTorusS3 { rho: 1.0 }, DEFAULT_GRID)?;
    second(
        &mut c,
        "Clifford torus, Willmore k0=1",
        &clifford,
        &Willmore { k0: 1.0 },
        &random_field(&clifford, 2)?,
    )?;
    let cat = euclidean(CatalogSurface::Catenoid { c: 1.0 }, DEFAULT_GRID)?.with_open_override(true);
    second(&mut c, "catenoid, p=3", &cat, &PWillmore::new(3.0)?, &random_field(&cat, 3)?)?;

    // Volume-constrained sphere: the augmented functional F − λV.
    let e = PWillmore::new(3.0)?;
    let raw = random_field(&sphere, 4)?;
    let area: f64 = sphere.area_weights().iter().sum();
    let mean = integrate_values(raw.values(), &sphere)? / area;
    let u = raw.combine(1.0, &ScalarField::constant(sphere.domain(), mean), -1.0)?;
    let opts = SecondVariationOptions {
        constraint: Constraint::Volume,
        force: false,
    };
    let sv = second_variation(&sphere, &e, &u, opts)?;
    let r = fd_variation_oracle(
        &sphere,
        &e,
        &u,
        VariationOrder::Second,
        OracleOptions {
            multiplier: Some(sv.multiplier),
            step: None,
        },
    )?;
    c.check(
        r.rel_error <= 1e-4,
        format!("sphere, p=3, λ = {:.12}: {r}", sv.multiplier),
    );
    let shifted = sv.value + r.multiplier_correction;
    c.note(format!(
        "constrained sphere: nine-term value {:.10}, value − λδ²V {:.10}, augmented difference {:.10} (rel {:.2e} to the shifted value)",
        sv.value,
        shifted,
        r.oracle_value,
        (shifted - r.oracle_value).abs() / shifted.abs().max(r.scale)
    ));
    let plain_fd = fd_variation_oracle(&sphere, &e, &u, VariationOrder::Second, OracleOptions::default())?;
    c.note(format!(
        "constrained sphere: difference of F alone {:.10} (rel {:.2e} to the nine-term value)",
        plain_fd.oracle_value, plain_fd.rel_error
    ));
    Ok(c)
}

fn c7() -> Result<Checks> {
    let mut c = Checks::new();
    let s = sphere_sample(1.0, DEFAULT_GRID)?;
    let u = ScalarField::from_fn(s.domain(), |t, _| t.cos());
    let v3 = sphere_index_form(&PWillmoreSetting::new(3.0, 1.0)?, &s, &u)?;
    let expect = -8.0 * PI / 3.0;
    c.check(rel(v3, expect) <= 1e-6, format!("p=3: {v3:.12} vs {expect:.12}"));
    let v2 = sphere_index_form(&PWillmoreSetting::new(2.0, 1.0)?, &s, &u)?;
    c.check(v2.abs() <= 1e-8, format!("p=2: {v2:.3e}"));
    Ok(c)
}

fn c8() -> Result<Checks> {
    let mut c = Checks::new();
    let s = sphere_sample(1.0, DEFAULT_GRID)?;
    for p in [2.5, 3.0, 4.0, 5.0] {
        let rep = stability_report_on(&PWillmoreSetting::new(p, 1.0)?, &s, 6)?;
        let ok = rep.signs[0] < 0 && rep.signs[1..].iter().all(|x| *x > 0);
        c.check(ok, format!("p={p}: signs {:?}, ℓ=1 index {:.6}, verdict '{}'", rep.signs, rep.l1_index, rep.verdict));
    }
    for p in [1.0, 2.0] {
        let rep = stability_report_on(&PWillmoreSetting::new(p, 1.0)?, &s, 6)?;
        let ok = rep.signs.iter().all(|x| *x >= 0);
        c.check(ok, format!("p={p}: signs {:?}, ℓ=1 index {:.3e}, verdict '{}'", rep.signs, rep.l1_index, rep.verdict));
    }
    Ok(c)
}

fn c9() -> Result<Checks> {
    let mut c = Checks::new();
    let seeds: Vec<u64> = (1..=20).collect();
    for r in [0.5, 1.0, 2.0] {
        let s = sphere_sample(r, DEFAULT_GRID)?;
        for p in [1.0, 2.0, 3.0, 4.0] {
            let rep = coercivity_check(&PWillmoreSetting::new(p, r)?, &s, 2, 6, &seeds, 1e-6)?;
            c.check(
                rep.holds,
                format!("p={p} r={r}: min Rayleigh {:.9} vs bound {:.9}", rep.minimum, rep.bound),
            );
            let setting = PWillmoreSetting::new(p, r)?;
            let q2 = setting.eigen_index(6.0 / (r * r));
            if q2 < setting.coercivity_bound() {
                c.note(format!(
                    "p={p} r={r}: a pure ℓ=2 field has quotient {q2:.9}, below the bound {:.9}",
                    setting.coercivity_bound()
                ));
            }
        }
    }
    Ok(c)
}

fn c10() -> Result<Checks> {
    let mut c = Checks::new();
    let s = sphere_sample(1.0, DEFAULT_GRID)?;
    let p2 = poincare_check(&s, &zonal_field(&s, 2)?)?;
    let target = 4.0 * PI / 5.0;
    let ok = [p2.l2, p2.gradient_term, p2.laplacian_term].iter().all(|x| rel(*x, target) <= 1e-6);
    c.check(
        ok,
        format!("ℓ=2: {:.12}, {:.12}, {:.12} vs 4π/5", p2.l2, p2.gradient_term, p2.laplacian_term),
    );
    let p3 = poincare_check(&s, &zonal_field(&s, 3)?)?;
    let ok = p3.holds && !p3.equality && rel(p3.gradient_ratio, 2.0) <= 1e-6 && rel(p3.laplacian_ratio, 4.0) <= 1e-6;
    c.check(
        ok,
        format!("ℓ=3: ratios {:.12} and {:.12}", p3.gradient_ratio, p3.laplacian_ratio),
    );
    Ok(c)
}

fn c11() -> Result<Checks> {
    let mut c = Checks::new();
    let s = sphere_sample(1.0, SPECTRUM_GRID)?;
    for k in 0..=6 {
        let sc = spectrum_check(&s, k)?;
        c.check(
            sc.eigenvalue_error <= 1e-6,
            format!("k={k}: λ = {}, eigenvalue error {:.2e}, residual {:.2e}", sc.eigenvalue, sc.eigenvalue_error, sc.residual_sup),
        );
        c.check(
            sc.measured_multiplicity == sc.stated_multiplicity,
            format!(
                "k={k}: measured multiplicity {} vs N_k = C(k+2,2) = {}",
                sc.measured_multiplicity, sc.stated_multiplicity
            ),
        );
    }
    Ok(c)
}

fn c12() -> Result<Checks> {
    let mut c = Checks::new();
    let s = in_unit_s3(CatalogSurface::CliffordTorusS3 { rho: 1.0 }, DEFAULT_GRID)?;
    let hsup = s.nodes().iter().fold(0.0f64, |m, n| m.max(n.scalars.mean.abs()));
    c.check(hsup <= 1e-8, format!("sup |H| = {hsup:.2e}"));
    let e = Willmore { k0: 1.0 };
    let res = el_residual(&s, &e)?.max_abs();
    c.check(res <= 1e-6, format!("Willmore residual sup = {res:.2e}"));
    let w = functional_value(&s, &e)?;
    let target = 2.0 * PI * PI;
    c.check(rel(w, target) <= 1e-7, format!("energy {w:.12} vs 2π² (rel {:.2e})", rel(w, target)));
    let gaps = [
        ("Clifford torus", s.clone()),
        (
            "geodesic sphere a=0.5",
            in_unit_s3(CatalogSurface::GeodesicSphereS3 { rho: 1.0, a: 0.5 }, DEFAULT_GRID)?,
        ),
        (
            "geodesic sphere a=1",
            in_unit_s3(CatalogSurface::GeodesicSphereS3 { rho: 1.0, a: 1.0 }, DEFAULT_GRID)?,
        ),
    ];
    for (name, t) in gaps {
        let g = gauss_residual(&t, true)?.max_abs();
        c.check(g <= 1e-9, format!("{name}: sup |K − (K_E + k0)| = {g:.2e}"));
    }
    Ok(c)
}

fn c13() -> Result<Checks> {
    let mut c = Checks::new();
    let n = DEFAULT_GRID;
    let surfaces = [
        euclidean(CatalogSurface::Sphere { r: 1.3 }, n)?,
        euclidean(CatalogSurface::Torus { big_r: 2.0, a: 1.0 }, n)?,
        euclidean(CatalogSurface::Catenoid { c: 1.0 }, n)?,
        euclidean(CatalogSurface::Graph { a: 0.5, b: -0.3 }, n)?,
        in_unit_s3(CatalogSurface::GeodesicSphereS3 { rho: 1.0, a: 1.0 }, n)?,
        in_unit_s3(CatalogSurface::CliffordTorusS3 { rho: 1.0 }, n)?,
        {
            let cs = CatalogSurface::GeodesicSphereH3 { rho: 1.0, a: 0.8 };
            sample_catalog(cs, &cs.default_domain(n)?, SpaceForm::hyperbolic(1.0)?)?
        },
    ];
    for s in &surfaces {
        let cod = codazzi_residual(s)?.max_abs();
        let kscale = s.nodes().iter().fold(0.0f64, |m, n| m.max(n.scalars.gauss.abs())).max(1.0);
        let gauss = gauss_residual(s, true)?.max_abs() / kscale;
        c.check(cod <= 1e-6, format!("{}: Codazzi sup {cod:.2e}", s.name()));
        c.check(gauss <= 1e-6, format!("{}: intrinsic vs extrinsic K, rel {gauss:.2e}", s.name()));
    }
    Ok(c)
}

fn c14() -> Result<Checks> {
    let mut c = Checks::new();
    let cases = [
        ("sphere", euclidean(CatalogSurface::Sphere { r: 1.0 }, DEFAULT_GRID)?, 2.0),
        ("torus(2,1)", euclidean(CatalogSurface::Torus { big_r: 2.0, a: 1.0 }, DEFAULT_GRID)?, 0.0),
    ];
    for (name, s, chi) in cases {
        let k: Vec<f64> = s.nodes().iter().map(|n| n.scalars.gauss).collect();
        let total = integrate_values(&k, &s)?;
        let err = (total - 2.0 * PI * chi).abs();
        c.check(err <= 1e-7 * 4.0 * PI, format!("{name}: ∫K dS = {total:.12}, 2πχ = {:.12}", 2.0 * PI * chi));
        let k0 = s.space_form().k0();
        let gap = functional_value(&s, &Bending { k0 })? - functional_value(&s, &Willmore { k0 })?;
        let area = functional_value(&s, &Area)?;
        let expect = -2.0 * PI * chi + 2.0 * k0 * area;
        c.check(
            (gap - expect).abs() <= 1e-7 * 4.0 * PI,
            format!("{name}: bending − Willmore = {gap:.12}, −2πχ + 2k0·Area = {expect:.12}"),
        );
    }
    Ok(c)
}
