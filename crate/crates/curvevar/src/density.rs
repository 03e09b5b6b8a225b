//! Curvature energy densities `E(H, K)` and their partial derivatives.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::Jet;

/// `E` and its partials up to second order at one `(H, K)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Partials {
    pub e: f64,
    pub e_h: f64,
    pub e_k: f64,
    pub e_hh: f64,
    pub e_hk: f64,
    pub e_kk: f64,
}

/// Third partials `[E_HHH, E_HHK, E_HKK, E_KKK]`.
pub type ThirdPartials = [f64; 4];

/// A curvature density `E(H, K)`.
///
/// `K` is the intrinsic Gauss curvature. Implementations supply closed-form
/// partials; third partials feed the chain rule for `ΔE_H`, `Hess E_K`.
pub trait EnergyDensity: Send + Sync {
    fn name(&self) -> String;

    fn partials(&self, h: f64, k: f64) -> Partials;

    fn third_partials(&self, h: f64, k: f64) -> ThirdPartials;

    fn value(&self, h: f64, k: f64) -> f64 {
        self.partials(h, k).e
    }

    /// Whether `(H, K)` lies where the density is defined and smooth.
    fn in_domain(&self, _h: f64, _k: f64) -> bool {
        true
    }

    /// Checks the guard, reporting node `(i, j)` on failure.
    fn check(&self, h: f64, k: f64, i: usize, j: usize) -> Result<()> {
        if self.in_domain(h, k) {
            Ok(())
        } else {
            Err(Error::DomainGuard {
                density: self.name(),
                i,
                j,
                h,
                k,
            })
        }
    }
}

impl fmt::Debug for dyn EnergyDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "EnergyDensity({})", self.name())
    }
}

/// Second-order Taylor composition `F(H, K)` with `H`, `K` given as jets,
/// from the value, gradient and Hessian of `F` at the base point.
pub fn compose(value: f64, grad: [f64; 2], hess: [f64; 3], h: &Jet, k: &Jet) -> Jet {
    let dh = *h - h.value();
    let dk = *k - k.value();
    let order = h.order().min(k.order());
    let mut out = Jet::constant(value, order) + dh * grad[0] + dk * grad[1];
    if order >= 2 {
        out += (dh * dh * hess[0] + dh * dk * (2.0 * hess[1]) + dk * dk * hess[2]) * 0.5;
    }
    out
}

/// Series of `E`, `E_H`, `E_K` along the surface, to second order, from the
/// series of `H` and `K`.
pub fn density_jets(d: &dyn EnergyDensity, h: &Jet, k: &Jet) -> [Jet; 3] {
    let (h0, k0) = (h.value(), k.value());
    let p = d.partials(h0, k0);
    let t = d.third_partials(h0, k0);
    [
        compose(p.e, [p.e_h, p.e_k], [p.e_hh, p.e_hk, p.e_kk], h, k),
        compose(p.e_h, [p.e_hh, p.e_hk], [t[0], t[1], t[2]], h, k),
        compose(p.e_k, [p.e_hk, p.e_kk], [t[1], t[2], t[3]], h, k),
    ]
}

/// `H² + k₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Willmore {
    pub k0: f64,
}

impl EnergyDensity for Willmore {
    fn name(&self) -> String {
        "willmore".into()
    }
    fn partials(&self, h: f64, _k: f64) -> Partials {
        Partials {
            e: h * h + self.k0,
            e_h: 2.0 * h,
            e_hh: 2.0,
            ..Partials::default()
        }
    }
    fn third_partials(&self, _h: f64, _k: f64) -> ThirdPartials {
        [0.0; 4]
    }
}

/// `H² − K + k₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bending {
    pub k0: f64,
}

impl EnergyDensity for Bending {
    fn name(&self) -> String {
        "bending".into()
    }
    fn partials(&self, h: f64, k: f64) -> Partials {
        Partials {
            e: h * h - k + self.k0,
            e_h: 2.0 * h,
            e_k: -1.0,
            e_hh: 2.0,
            ..Partials::default()
        }
    }
    fn third_partials(&self, _h: f64, _k: f64) -> ThirdPartials {
        [0.0; 4]
    }
}

/// `k_c (2H + c₀)² + k̄ K`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Helfrich {
    pub kc: f64,
    pub c0: f64,
    pub kbar: f64,
}

impl EnergyDensity for Helfrich {
    fn name(&self) -> String {
        "helfrich".into()
    }
    fn partials(&self, h: f64, k: f64) -> Partials {
        let s = 2.0 * h + self.c0;
        Partials {
            e: self.kc * s * s + self.kbar * k,
            e_h: 4.0 * self.kc * s,
            e_k: self.kbar,
            e_hh: 8.0 * self.kc,
            ..Partials::default()
        }
    }
    fn third_partials(&self, _h: f64, _k: f64) -> ThirdPartials {
        [0.0; 4]
    }
}

/// `H^p`. Integer exponents use exact integer powers, so `H⁰ = 1` even at
/// `H = 0`; other exponents need `H > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PWillmore {
    pub p: f64,
}

impl PWillmore {
    pub fn new(p: f64) -> Result<Self> {
        if !(p.is_finite() && p >= 1.0) {
            return Err(Error::InvalidParameter(format!("p-Willmore exponent must be ≥ 1, got {p}")));
        }
        Ok(PWillmore { p })
    }

    fn is_integer(&self) -> bool {
        self.p.fract() == 0.0
    }

    // c · H^(p − n) with exact zero when the coefficient vanishes.
    fn term(&self, c: f64, h: f64, n: i32) -> f64 {
        if c == 0.0 {
            return 0.0;
        }
        if self.is_integer() {
            c * h.powi(self.p as i32 - n)
        } else {
            c * h.powf(self.p - n as f64)
        }
    }
}

impl EnergyDensity for PWillmore {
    fn name(&self) -> String {
        format!("pwillmore(p={})", self.p)
    }
    fn partials(&self, h: f64, _k: f64) -> Partials {
        let p = self.p;
        Partials {
            e: self.term(1.0, h, 0),
            e_h: self.term(p, h, 1),
            e_hh: self.term(p * (p - 1.0), h, 2),
            ..Partials::default()
        }
    }
    fn third_partials(&self, h: f64, _k: f64) -> ThirdPartials {
        let p = self.p;
        [self.term(p * (p - 1.0) * (p - 2.0), h, 3), 0.0, 0.0, 0.0]
    }
    fn in_domain(&self, h: f64, _k: f64) -> bool {
        self.is_integer() || h > 0.0
    }
}

/// `K²`, the density that exercises every `E_K`, `E_KK` term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KSquared;

impl EnergyDensity for KSquared {
    fn name(&self) -> String {
        "ksquared".into()
    }
    fn partials(&self, _h: f64, k: f64) -> Partials {
        Partials {
            e: k * k,
            e_k: 2.0 * k,
            e_kk: 2.0,
            ..Partials::default()
        }
    }
    fn third_partials(&self, _h: f64, _k: f64) -> ThirdPartials {
        [0.0; 4]
    }
}

/// `E ≡ 1`, whose functional is the area.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Area;

impl EnergyDensity for Area {
    fn name(&self) -> String {
        "area".into()
    }
    fn partials(&self, _h: f64, _k: f64) -> Partials {
        Partials {
            e: 1.0,
            ..Partials::default()
        }
    }
    fn third_partials(&self, _h: f64, _k: f64) -> ThirdPartials {
        [0.0; 4]
    }
}

type PartialsFn = dyn Fn(f64, f64) -> Partials + Send + Sync;
type GuardFn = dyn Fn(f64, f64) -> bool + Send + Sync;

/// A user density given by its value and partials up to second order.
/// Third partials come from central differences of the supplied second
/// partials.
#[derive(Clone)]
pub struct CustomDensity {
    name: String,
    partials: Arc<PartialsFn>,
    guard: Option<Arc<GuardFn>>,
}

impl CustomDensity {
    pub fn new<F>(name: impl Into<String>, partials: F) -> Self
    where
        F: Fn(f64, f64) -> Partials + Send + Sync + 'static,
    {
        CustomDensity {
            name: name.into(),
            partials: Arc::new(partials),
            guard: None,
        }
    }

    pub fn with_guard<G>(mut self, guard: G) -> Self
    where
        G: Fn(f64, f64) -> bool + Send + Sync + 'static,
    {
        self.guard = Some(Arc::new(guard));
        self
    }
}

impl EnergyDensity for CustomDensity {
    fn name(&self) -> String {
        self.name.clone()
    }
    fn partials(&self, h: f64, k: f64) -> Partials {
        (self.partials)(h, k)
    }
    fn third_partials(&self, h: f64, k: f64) -> ThirdPartials {
        let dh = 1e-4 * (1.0 + h.abs());
        let dk = 1e-4 * (1.0 + k.abs());
        let along_h = |s: f64| (self.partials)(h + s, k);
        let along_k = |s: f64| (self.partials)(h, k + s);
        let d = |f: &dyn Fn(f64) -> Partials, step: f64, pick: fn(&Partials) -> f64| {
            (-pick(&f(2.0 * step)) + 8.0 * pick(&f(step)) - 8.0 * pick(&f(-step)) + pick(&f(-2.0 * step)))
                / (12.0 * step)
        };
        [
            d(&along_h, dh, |p| p.e_hh),
            d(&along_h, dh, |p| p.e_hk),
            d(&along_k, dk, |p| p.e_hk),
            d(&along_k, dk, |p| p.e_kk),
        ]
    }
    fn in_domain(&self, h: f64, k: f64) -> bool {
        self.guard.as_ref().map_or(true, |g| g(h, k))
    }
}

/// Largest relative mismatch between the supplied first and second partials
/// and fourth-order central differences of `E` at `(h, k)`.
pub fn partials_fd_mismatch(d: &dyn EnergyDensity, h: f64, k: f64) -> f64 {
    let sh = 1e-3 * (1.0 + h.abs());
    let sk = 1e-3 * (1.0 + k.abs());
    let e = |a: f64, b: f64| d.value(h + a, k + b);
    let first = |f: &dyn Fn(f64) -> f64, s: f64| (-f(2.0 * s) + 8.0 * f(s) - 8.0 * f(-s) + f(-2.0 * s)) / (12.0 * s);
    let second =
        |f: &dyn Fn(f64) -> f64, s: f64| (-f(2.0 * s) + 16.0 * f(s) - 30.0 * f(0.0) + 16.0 * f(-s) - f(-2.0 * s)) / (12.0 * s * s);
    let p = d.partials(h, k);
    let fd_h = first(&|s| e(s, 0.0), sh);
    let fd_k = first(&|s| e(0.0, s), sk);
    let fd_hh = second(&|s| e(s, 0.0), sh);
    let fd_kk = second(&|s| e(0.0, s), sk);
    let fd_hk = (e(sh, sk) - e(sh, -sk) - e(-sh, sk) + e(-sh, -sk)) / (4.0 * sh * sk);
    let scale = 1.0 + [p.e, p.e_h, p.e_k, p.e_hh, p.e_hk, p.e_kk].iter().fold(0.0f64, |m, x| m.max(x.abs()));
    [
        p.e_h - fd_h,
        p.e_k - fd_k,
        p.e_hh - fd_hh,
        p.e_kk - fd_kk,
        p.e_hk - fd_hk,
    ]
    .iter()
    .fold(0.0f64, |m, x| m.max(x.abs()))
        / scale
}

/// Density choice as written in configs and on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum DensitySpec {
    Willmore { k0: f64 },
    Bending { k0: f64 },
    Helfrich { kc: f64, c0: f64, kbar: f64 },
    Pwillmore { p: f64 },
    Ksquared,
    Area,
}

impl DensitySpec {
    pub fn build(&self) -> Result<Arc<dyn EnergyDensity>> {
        Ok(match *self {
            DensitySpec::Willmore { k0 } => Arc::new(Willmore { k0 }),
            DensitySpec::Bending { k0 } => Arc::new(Bending { k0 }),
            DensitySpec::Helfrich { kc, c0, kbar } => Arc::new(Helfrich { kc, c0, kbar }),
            DensitySpec::Pwillmore { p } => Arc::new(PWillmore::new(p)?),
            DensitySpec::Ksquared => Arc::new(KSquared),
            DensitySpec::Area => Arc::new(Area),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn builtins() -> Vec<Box<dyn EnergyDensity>> {
        vec![
            Box::new(Willmore { k0: 0.7 }),
            Box::new(Bending { k0: -0.3 }),
            Box::new(Helfrich {
                kc: 1.0,
                c0: 0.3,
                kbar: 0.5,
            }),
            Box::new(PWillmore::new(3.0).unwrap()),
            Box::new(PWillmore::new(2.5).unwrap()),
            Box::new(KSquared),
            Box::new(Area),
        ]
    }

    #[test]
    fn supplied_partials_match_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for d in builtins() {
            for _ in 0..50 {
                let h = rng.gen_range(0.2..2.0);
                let k = rng.gen_range(-2.0..2.0);
                assert!(d.in_domain(h, k));
                let m = partials_fd_mismatch(d.as_ref(), h, k);
                assert!(m < 1e-6, "{} at ({h}, {k}): {m}", d.name());
            }
        }
    }

    #[test]
    fn custom_third_partials_by_differences() {
        let d = CustomDensity::new("h4", |h, _| Partials {
            e: h.powi(4),
            e_h: 4.0 * h.powi(3),
            e_hh: 12.0 * h * h,
            ..Partials::default()
        });
        let t = d.third_partials(1.5, 0.0);
        assert!((t[0] - 36.0).abs() < 1e-8);
    }

    #[test]
    fn integer_powers_at_zero_mean_curvature() {
        let p1 = PWillmore::new(1.0).unwrap();
        let q = p1.partials(0.0, -1.0);
        assert_eq!((q.e, q.e_h, q.e_hh), (0.0, 1.0, 0.0));
        let frac = PWillmore::new(1.5).unwrap();
        assert!(!frac.in_domain(0.0, 0.0));
        assert!(matches!(frac.check(-0.1, 0.0, 3, 4), Err(Error::DomainGuard { i: 3, j: 4, .. })));
    }

    #[test]
    fn composition_matches_direct_series() {
        let u = Jet::var_u(0.3, 2);
        let v = Jet::var_v(-0.2, 2);
        let h = u.sin() + v * 0.5 + 1.0;
        let k = u * v + 0.4;
        let d = PWillmore::new(3.0).unwrap();
        let [e, eh, _] = density_jets(&d, &h, &k);
        let direct = h.powi(3);
        let direct_h = h.powi(2) * 3.0;
        for (a, b) in e.coefficients().iter().zip(direct.coefficients()) {
            assert!((a - b).abs() < 1e-13);
        }
        for (a, b) in eh.coefficients().iter().zip(direct_h.coefficients()) {
            assert!((a - b).abs() < 1e-13);
        }
    }
}
