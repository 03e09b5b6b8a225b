//! Truncated bivariate Taylor series.
//!
//! A [`Jet`] holds the Taylor coefficients of a smooth function of two chart
//! variables `(u, v)` about a base point, up to a runtime total order of at
//! most [`MAX_ORDER`]. Arithmetic and elementary functions propagate the
//! series exactly (up to rounding), so evaluating a parametrization on seeded
//! jets yields all of its partial derivatives at once.
//!
//! Coefficients are stored graded by total degree: the coefficient of
//! `du^a dv^b` lives at `d(d+1)/2 + b` with `d = a + b`.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use once_cell::sync::Lazy;

/// Highest total order a [`Jet`] can carry.
pub const MAX_ORDER: usize = 6;

const CAPACITY: usize = (MAX_ORDER + 1) * (MAX_ORDER + 2) / 2;

/// Number of coefficients of a series truncated at total order `order`.
pub const fn coefficient_count(order: usize) -> usize {
    (order + 1) * (order + 2) / 2
}

/// Storage slot of the `du^a dv^b` coefficient.
#[inline]
pub const fn slot(a: usize, b: usize) -> usize {
    let d = a + b;
    d * (d + 1) / 2 + b
}

const fn exponents(index: usize) -> (usize, usize) {
    let mut d = 0;
    while (d + 1) * (d + 2) / 2 <= index {
        d += 1;
    }
    let b = index - d * (d + 1) / 2;
    (d - b, b)
}

// (lhs slot, rhs slot, product slot) triples for each truncation order.
static PRODUCT_TABLES: Lazy<Vec<Vec<(u8, u8, u8)>>> = Lazy::new(|| {
    (0..=MAX_ORDER)
        .map(|order| {
            let n = coefficient_count(order);
            let mut table = Vec::new();
            for i in 0..n {
                let (ai, bi) = exponents(i);
                for j in 0..n {
                    let (aj, bj) = exponents(j);
                    if ai + aj + bi + bj <= order {
                        table.push((i as u8, j as u8, slot(ai + aj, bi + bj) as u8));
                    }
                }
            }
            table
        })
        .collect()
});

const FACTORIAL: [f64; 8] = [1.0, 1.0, 2.0, 6.0, 24.0, 120.0, 720.0, 5040.0];

/// A truncated Taylor series in two variables.
#[derive(Clone, Copy, PartialEq)]
pub struct Jet {
    c: [f64; CAPACITY],
    order: u8,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("order", &self.order)
            .field("coefficients", &self.coefficients())
            .finish()
    }
}

impl Jet {
    /// The constant series `value` truncated at `order`.
    pub fn constant(value: f64, order: usize) -> Self {
        assert!(order <= MAX_ORDER, "jet order {order} exceeds {MAX_ORDER}");
        let mut c = [0.0; CAPACITY];
        c[0] = value;
        Jet { c, order: order as u8 }
    }

    /// The coordinate `u` seeded at `u0`.
    pub fn var_u(u0: f64, order: usize) -> Self {
        let mut j = Jet::constant(u0, order);
        if order >= 1 {
            j.c[slot(1, 0)] = 1.0;
        }
        j
    }

    /// The coordinate `v` seeded at `v0`.
    pub fn var_v(v0: f64, order: usize) -> Self {
        let mut j = Jet::constant(v0, order);
        if order >= 1 {
            j.c[slot(0, 1)] = 1.0;
        }
        j
    }

    /// Builds a series from partial derivatives `d[slot(a, b)] = ∂^a_u ∂^b_v f`.
    pub fn from_derivatives(derivatives: &[f64], order: usize) -> Self {
        let mut j = Jet::constant(0.0, order);
        for (i, d) in derivatives.iter().take(coefficient_count(order)).enumerate() {
            let (a, b) = exponents(i);
            j.c[i] = d / (FACTORIAL[a] * FACTORIAL[b]);
        }
        j
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order as usize
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// Raw Taylor coefficients in graded order.
    pub fn coefficients(&self) -> &[f64] {
        &self.c[..coefficient_count(self.order())]
    }

    /// Taylor coefficient of `du^a dv^b` (zero beyond the truncation order).
    pub fn coefficient(&self, a: usize, b: usize) -> f64 {
        if a + b > self.order() {
            0.0
        } else {
            self.c[slot(a, b)]
        }
    }

    /// The partial derivative `∂^a_u ∂^b_v` at the base point.
    pub fn derivative(&self, a: usize, b: usize) -> f64 {
        self.coefficient(a, b) * FACTORIAL[a] * FACTORIAL[b]
    }

    pub fn du(&self) -> f64 {
        self.derivative(1, 0)
    }

    pub fn dv(&self) -> f64 {
        self.derivative(0, 1)
    }

    /// Drops every term above `order`.
    pub fn truncate(&self, order: usize) -> Self {
        let order = order.min(self.order());
        let mut j = *self;
        for x in &mut j.c[coefficient_count(order)..] {
            *x = 0.0;
        }
        j.order = order as u8;
        j
    }

    /// The series of `∂f/∂u`, one order lower.
    pub fn diff_u(&self) -> Self {
        self.differentiate(true)
    }

    /// The series of `∂f/∂v`, one order lower.
    pub fn diff_v(&self) -> Self {
        self.differentiate(false)
    }

    fn differentiate(&self, along_u: bool) -> Self {
        assert!(self.order > 0, "cannot differentiate an order-0 jet");
        let order = self.order() - 1;
        let mut out = Jet::constant(0.0, order);
        for i in 0..coefficient_count(order) {
            let (a, b) = exponents(i);
            out.c[i] = if along_u {
                (a + 1) as f64 * self.c[slot(a + 1, b)]
            } else {
                (b + 1) as f64 * self.c[slot(a, b + 1)]
            };
        }
        out
    }

    /// True when this is exactly `var_u(u0, order)`.
    pub fn is_u_seed(&self) -> bool {
        self.order == 0 || (self.c[1] == 1.0 && self.c[2..].iter().all(|&c| c == 0.0))
    }

    /// True when this is exactly `var_v(v0, order)`.
    pub fn is_v_seed(&self) -> bool {
        self.order == 0
            || (self.c[1] == 0.0 && self.c[2] == 1.0 && self.c[3..].iter().all(|&c| c == 0.0))
    }

    /// Re-expands a series taken about `(u0, v0)` at the inputs `u`, `v`,
    /// whose constant terms must be `u0`, `v0`: returns `f(u(·), v(·))`.
    pub fn substitute(&self, u: &Jet, v: &Jet) -> Jet {
        let order = self.order().min(u.order()).min(v.order());
        if u.is_u_seed() && v.is_v_seed() {
            return self.truncate(order);
        }
        let mut du = u.truncate(order);
        du.c[0] = 0.0;
        let mut dv = v.truncate(order);
        dv.c[0] = 0.0;
        // Horner in du over polynomials in dv
        let mut acc = Jet::constant(0.0, order);
        for a in (0..=order).rev() {
            let mut inner = Jet::constant(0.0, order);
            for b in (0..=order - a).rev() {
                inner = inner * dv;
                inner.c[0] += self.coefficient(a, b);
            }
            acc = acc * du + inner;
        }
        acc
    }

    fn binary_order(&self, other: &Jet) -> usize {
        self.order.min(other.order) as usize
    }

    /// Applies a univariate function given its derivatives `f^(n)(x0)` for
    /// `n = 0..=order`, where `x0` is this series' constant term.
    pub fn compose(&self, derivatives: &[f64]) -> Self {
        let order = self.order();
        debug_assert!(derivatives.len() > order);
        let mut delta = *self;
        delta.c[0] = 0.0;
        let mut acc = Jet::constant(derivatives[order] / FACTORIAL[order], order);
        for n in (0..order).rev() {
            acc = acc * delta;
            acc.c[0] += derivatives[n] / FACTORIAL[n];
        }
        acc
    }

    pub fn recip(&self) -> Self {
        let x = self.value();
        let mut d = [0.0; MAX_ORDER + 1];
        let mut p = 1.0 / x;
        for (n, dn) in d.iter_mut().enumerate().take(self.order() + 1) {
            *dn = if n % 2 == 0 { 1.0 } else { -1.0 } * FACTORIAL[n] * p;
            p /= x;
        }
        self.compose(&d)
    }

    /// Real power `x^p`, defined for a positive constant term.
    pub fn powf(&self, p: f64) -> Self {
        let x = self.value();
        let mut d = [0.0; MAX_ORDER + 1];
        let mut coef = 1.0;
        for (n, dn) in d.iter_mut().enumerate().take(self.order() + 1) {
            *dn = if coef == 0.0 { 0.0 } else { coef * x.powf(p - n as f64) };
            coef *= p - n as f64;
        }
        self.compose(&d)
    }

    /// Integer power by repeated multiplication; `powi(0)` is exactly one.
    pub fn powi(&self, n: i32) -> Self {
        if n < 0 {
            return self.powi(-n).recip();
        }
        let mut acc = Jet::constant(1.0, self.order());
        let mut base = *self;
        let mut e = n as u32;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            e >>= 1;
            if e > 0 {
                base = base * base;
            }
        }
        acc
    }

    pub fn sqrt(&self) -> Self {
        self.powf(0.5)
    }

    pub fn exp(&self) -> Self {
        let e = self.value().exp();
        self.compose(&[e; MAX_ORDER + 1])
    }

    pub fn ln(&self) -> Self {
        let x = self.value();
        let mut d = [0.0; MAX_ORDER + 1];
        d[0] = x.ln();
        for n in 1..=self.order() {
            let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
            d[n] = sign * FACTORIAL[n - 1] / x.powi(n as i32);
        }
        self.compose(&d)
    }

    pub fn sin(&self) -> Self {
        let (s, c) = self.value().sin_cos();
        let cycle = [s, c, -s, -c];
        let mut d = [0.0; MAX_ORDER + 1];
        for (n, dn) in d.iter_mut().enumerate() {
            *dn = cycle[n % 4];
        }
        self.compose(&d)
    }

    pub fn cos(&self) -> Self {
        let (s, c) = self.value().sin_cos();
        let cycle = [c, -s, -c, s];
        let mut d = [0.0; MAX_ORDER + 1];
        for (n, dn) in d.iter_mut().enumerate() {
            *dn = cycle[n % 4];
        }
        self.compose(&d)
    }

    pub fn sinh(&self) -> Self {
        let (s, c) = (self.value().sinh(), self.value().cosh());
        let mut d = [0.0; MAX_ORDER + 1];
        for (n, dn) in d.iter_mut().enumerate() {
            *dn = if n % 2 == 0 { s } else { c };
        }
        self.compose(&d)
    }

    pub fn cosh(&self) -> Self {
        let (s, c) = (self.value().sinh(), self.value().cosh());
        let mut d = [0.0; MAX_ORDER + 1];
        for (n, dn) in d.iter_mut().enumerate() {
            *dn = if n % 2 == 0 { c } else { s };
        }
        self.compose(&d)
    }
}

impl Add for Jet {
    type Output = Jet;
    #[inline]
    fn add(self, rhs: Jet) -> Jet {
        let order = self.binary_order(&rhs);
        let mut out = self.truncate(order);
        for i in 0..coefficient_count(order) {
            out.c[i] += rhs.c[i];
        }
        out
    }
}

impl Sub for Jet {
    type Output = Jet;
    #[inline]
    fn sub(self, rhs: Jet) -> Jet {
        let order = self.binary_order(&rhs);
        let mut out = self.truncate(order);
        for i in 0..coefficient_count(order) {
            out.c[i] -= rhs.c[i];
        }
        out
    }
}

impl Mul for Jet {
    type Output = Jet;
    #[inline]
    fn mul(self, rhs: Jet) -> Jet {
        let order = self.binary_order(&rhs);
        let mut out = Jet::constant(0.0, order);
        for &(i, j, k) in &PRODUCT_TABLES[order] {
            out.c[k as usize] += self.c[i as usize] * rhs.c[j as usize];
        }
        out
    }
}

impl Div for Jet {
    type Output = Jet;
    #[inline]
    fn div(self, rhs: Jet) -> Jet {
        self * rhs.recip()
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(mut self) -> Jet {
        for x in &mut self.c {
            *x = -*x;
        }
        self
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, rhs: f64) -> Jet {
        self.c[0] += rhs;
        self
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: f64) -> Jet {
        self.c[0] -= rhs;
        self
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(mut self, rhs: f64) -> Jet {
        for x in &mut self.c {
            *x *= rhs;
        }
        self
    }
}

impl Div<f64> for Jet {
    type Output = Jet;
    fn div(self, rhs: f64) -> Jet {
        self * (1.0 / rhs)
    }
}

impl Mul<Jet> for f64 {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        rhs * self
    }
}

impl AddAssign for Jet {
    fn add_assign(&mut self, rhs: Jet) {
        *self = *self + rhs;
    }
}

impl SubAssign for Jet {
    fn sub_assign(&mut self, rhs: Jet) {
        *self = *self - rhs;
    }
}

impl MulAssign for Jet {
    fn mul_assign(&mut self, rhs: Jet) {
        *self = *self * rhs;
    }
}

/// Numeric types that parametrizations and fields are written against, so a
/// single formula serves both plain evaluation (`f64`) and jets.
pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn value(&self) -> f64;
    /// A constant with the same truncation as `self`.
    fn lift(&self, c: f64) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn sinh(&self) -> Self;
    fn cosh(&self) -> Self;
    fn exp(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn recip(&self) -> Self;
    fn powi(&self, n: i32) -> Self;
    fn powf(&self, p: f64) -> Self;
}

impl Scalar for f64 {
    fn value(&self) -> f64 {
        *self
    }
    fn lift(&self, c: f64) -> Self {
        c
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn sinh(&self) -> Self {
        f64::sinh(*self)
    }
    fn cosh(&self) -> Self {
        f64::cosh(*self)
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn recip(&self) -> Self {
        1.0 / *self
    }
    fn powi(&self, n: i32) -> Self {
        f64::powi(*self, n)
    }
    fn powf(&self, p: f64) -> Self {
        f64::powf(*self, p)
    }
}

impl Scalar for Jet {
    fn value(&self) -> f64 {
        self.c[0]
    }
    fn lift(&self, c: f64) -> Self {
        Jet::constant(c, self.order())
    }
    fn sin(&self) -> Self {
        Jet::sin(self)
    }
    fn cos(&self) -> Self {
        Jet::cos(self)
    }
    fn sinh(&self) -> Self {
        Jet::sinh(self)
    }
    fn cosh(&self) -> Self {
        Jet::cosh(self)
    }
    fn exp(&self) -> Self {
        Jet::exp(self)
    }
    fn sqrt(&self) -> Self {
        Jet::sqrt(self)
    }
    fn recip(&self) -> Self {
        Jet::recip(self)
    }
    fn powi(&self, n: i32) -> Self {
        Jet::powi(self, n)
    }
    fn powf(&self, p: f64) -> Self {
        Jet::powf(self, p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn seeds(u: f64, v: f64, order: usize) -> (Jet, Jet) {
        (Jet::var_u(u, order), Jet::var_v(v, order))
    }

    #[test]
    fn slot_layout_is_graded() {
        assert_eq!(slot(0, 0), 0);
        assert_eq!(slot(1, 0), 1);
        assert_eq!(slot(0, 1), 2);
        assert_eq!(slot(2, 0), 3);
        assert_eq!(slot(0, 4), 14);
        for i in 0..CAPACITY {
            let (a, b) = exponents(i);
            assert_eq!(slot(a, b), i);
        }
    }

    #[test]
    fn polynomial_derivatives_are_exact() {
        // f = u^3 v^2 + 2 u v
        let (u, v) = seeds(1.5, -0.5, 5);
        let f = u.powi(3) * v.powi(2) + u * v * 2.0;
        assert_relative_eq!(f.value(), 1.5f64.powi(3) * 0.25 - 1.5);
        assert_relative_eq!(f.derivative(1, 0), 3.0 * 2.25 * 0.25 - 1.0);
        assert_relative_eq!(f.derivative(3, 2), 12.0);
        assert_relative_eq!(f.derivative(2, 1), 6.0 * 1.5 * 2.0 * -0.5);
        assert_eq!(f.derivative(4, 0), 0.0);
    }

    #[test]
    fn trig_identity_holds_to_all_orders() {
        let (u, v) = seeds(0.3, 1.1, 6);
        let w = u * v + u.sin();
        let one = w.sin() * w.sin() + w.cos() * w.cos();
        assert_relative_eq!(one.value(), 1.0, epsilon = 1e-14);
        for &c in &one.coefficients()[1..] {
            assert!(c.abs() < 1e-13, "{c}");
        }
    }

    #[test]
    fn reciprocal_and_sqrt_invert() {
        let (u, v) = seeds(0.7, 0.2, 4);
        let x = u * u + v.exp() + 1.0;
        let r = x * x.recip();
        let s = x.sqrt() * x.sqrt() - x;
        assert_relative_eq!(r.value(), 1.0, epsilon = 1e-15);
        for i in 1..15 {
            assert!(r.coefficients()[i].abs() < 1e-13);
            assert!(s.coefficients()[i].abs() < 1e-13);
        }
    }

    #[test]
    fn diff_matches_derivative() {
        let (u, v) = seeds(0.4, -0.3, 4);
        let f = (u * v).cosh() + u.powi(2) * v.sinh();
        let fu = f.diff_u();
        assert_eq!(fu.order(), 3);
        assert_relative_eq!(fu.value(), f.derivative(1, 0), epsilon = 1e-14);
        assert_relative_eq!(fu.derivative(1, 2), f.derivative(2, 2), epsilon = 1e-12);
        assert_relative_eq!(f.diff_v().derivative(2, 1), f.derivative(2, 2), epsilon = 1e-12);
    }

    #[test]
    fn powf_matches_powi_for_integers() {
        let (u, v) = seeds(1.3, 0.4, 5);
        let x = u + v * u + 0.5;
        let a = x.powf(3.0);
        let b = x.powi(3);
        for (p, q) in a.coefficients().iter().zip(b.coefficients()) {
            assert_relative_eq!(p, q, max_relative = 1e-13, epsilon = 1e-13);
        }
    }

    #[test]
    fn powi_zero_is_one_even_at_zero() {
        let (u, _) = seeds(0.0, 0.0, 3);
        let one = u.powi(0);
        assert_eq!(one.value(), 1.0);
        assert_eq!(one.derivative(1, 0), 0.0);
    }

    #[test]
    fn mixed_orders_truncate_to_minimum() {
        let a = Jet::var_u(1.0, 4);
        let b = Jet::var_v(2.0, 2);
        assert_eq!((a * b).order(), 2);
        assert_eq!((a + b).order(), 2);
    }

    #[test]
    fn substitution_matches_direct_composition() {
        let order = 4;
        let f = |u: Jet, v: Jet| u.sin() * v + (u * v).exp();
        let (u0, v0) = (0.3, -0.4);
        let base = f(Jet::var_u(u0, order), Jet::var_v(v0, order));
        let (s, t) = seeds(0.1, 0.2, order);
        let u = (s * t).sin() * 0.5 + u0 - (0.1f64 * 0.2).sin() * 0.5;
        let v = s.exp() - 0.1f64.exp() + v0;
        let direct = f(u, v);
        let via = base.substitute(&u, &v);
        for (p, q) in direct.coefficients().iter().zip(via.coefficients()) {
            assert_relative_eq!(p, q, epsilon = 1e-13);
        }
    }

    #[test]
    fn ln_inverts_exp() {
        let (u, v) = seeds(0.2, 0.9, 5);
        let x = u * v + v.cos();
        let y = x.exp().ln() - x;
        for &c in y.coefficients() {
            assert!(c.abs() < 1e-13);
        }
    }
}
