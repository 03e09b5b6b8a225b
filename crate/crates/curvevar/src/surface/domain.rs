use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest grid count along either chart direction.
pub const MIN_NODES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisKind {
    /// Nodes `a + iL/n`; the range is one full period.
    Periodic,
    /// Latitude-like axis whose ends are chart poles; nodes sit at
    /// half-integer offsets `a + (i + ½)L/n`.
    Polar,
    /// Bounded axis sampled with both endpoints.
    Open,
}

/// One chart direction of a structured grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub start: f64,
    pub end: f64,
    pub count: usize,
    pub kind: AxisKind,
}

impl Axis {
    pub fn new(start: f64, end: f64, count: usize, kind: AxisKind) -> Result<Self> {
        if !(start.is_finite() && end.is_finite() && end > start) {
            return Err(Error::InvalidDomain(format!("range [{start}, {end}] is empty or not finite")));
        }
        if count < MIN_NODES {
            return Err(Error::InvalidDomain(format!(
                "grid count {count} is below the minimum of {MIN_NODES}"
            )));
        }
        Ok(Axis {
            start,
            end,
            count,
            kind,
        })
    }

    pub fn periodic(start: f64, end: f64, count: usize) -> Result<Self> {
        Axis::new(start, end, count, AxisKind::Periodic)
    }

    pub fn polar(start: f64, end: f64, count: usize) -> Result<Self> {
        Axis::new(start, end, count, AxisKind::Polar)
    }

    pub fn open(start: f64, end: f64, count: usize) -> Result<Self> {
        Axis::new(start, end, count, AxisKind::Open)
    }

    pub fn extent(&self) -> f64 {
        self.end - self.start
    }

    /// Distance between neighbouring nodes.
    pub fn spacing(&self) -> f64 {
        match self.kind {
            AxisKind::Open => self.extent() / (self.count - 1) as f64,
            _ => self.extent() / self.count as f64,
        }
    }

    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        match self.kind {
            AxisKind::Periodic | AxisKind::Open => self.start + i as f64 * self.spacing(),
            AxisKind::Polar => self.start + (i as f64 + 0.5) * self.spacing(),
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.node(i)).collect()
    }

    pub fn is_closed(&self) -> bool {
        self.kind != AxisKind::Open
    }

    /// One-dimensional quadrature weights.
    ///
    /// Periodic axes use equal weights. Open axes use the trapezoid rule. Polar
    /// axes use Fejér's first rule in `cos θ`, divided by `sin θ`, so that an
    /// integrand carrying the chart's `sin θ` area factor is integrated as a
    /// smooth function of `cos θ`.
    pub fn weights(&self) -> Vec<f64> {
        let n = self.count;
        let h = self.spacing();
        match self.kind {
            AxisKind::Periodic => vec![h; n],
            AxisKind::Open => {
                let mut w = vec![h; n];
                w[0] *= 0.5;
                w[n - 1] *= 0.5;
                w
            }
            AxisKind::Polar => {
                let scale = self.extent() / PI;
                (0..n)
                    .map(|j| {
                        let theta = (j as f64 + 0.5) * PI / n as f64;
                        let mut s = 0.0;
                        for k in 1..=n / 2 {
                            let k = k as f64;
                            s += (2.0 * k * theta).cos() / (4.0 * k * k - 1.0);
                        }
                        let fejer = 2.0 / n as f64 * (1.0 - 2.0 * s);
                        scale * fejer / theta.sin()
                    })
                    .collect()
            }
        }
    }
}

/// A rectangular chart domain `U` with its sampling grid.
///
/// Nodes are indexed `(i, j)` with `i` along `u`, stored row-major at
/// `i * nv + j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatchDomain {
    pub u: Axis,
    pub v: Axis,
}

impl PatchDomain {
    pub fn new(u: Axis, v: Axis) -> Result<Self> {
        if v.kind == AxisKind::Polar {
            return Err(Error::InvalidDomain("only the first chart direction can be polar".into()));
        }
        Ok(PatchDomain { u, v })
    }

    /// Builds a domain from ranges and flags. `pole_offset` turns the `u`
    /// direction into a polar axis and requires `v` to be periodic.
    pub fn from_flags(
        u_range: (f64, f64),
        v_range: (f64, f64),
        nu: usize,
        nv: usize,
        periodic: [bool; 2],
        pole_offset: bool,
    ) -> Result<Self> {
        let kind = |p: bool| if p { AxisKind::Periodic } else { AxisKind::Open };
        let u_kind = if pole_offset {
            if periodic[0] {
                return Err(Error::InvalidDomain("a polar axis cannot also be periodic".into()));
            }
            if !periodic[1] {
                return Err(Error::InvalidDomain(
                    "pole offset needs a periodic longitude direction".into(),
                ));
            }
            AxisKind::Polar
        } else {
            kind(periodic[0])
        };
        PatchDomain::new(
            Axis::new(u_range.0, u_range.1, nu, u_kind)?,
            Axis::new(v_range.0, v_range.1, nv, kind(periodic[1]))?,
        )
    }

    pub fn nu(&self) -> usize {
        self.u.count
    }

    pub fn nv(&self) -> usize {
        self.v.count
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.u.count, self.v.count)
    }

    pub fn len(&self) -> usize {
        self.u.count * self.v.count
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.v.count + j
    }

    #[inline]
    pub fn split(&self, k: usize) -> (usize, usize) {
        (k / self.v.count, k % self.v.count)
    }

    #[inline]
    pub fn point(&self, k: usize) -> (f64, f64) {
        let (i, j) = self.split(k);
        (self.u.node(i), self.v.node(j))
    }

    /// Closed when no direction has a boundary.
    pub fn is_closed(&self) -> bool {
        self.u.is_closed() && self.v.is_closed()
    }

    /// Tensor-product coordinate weights `w_u(i) w_v(j)`; multiply by the
    /// area element for `dS`.
    pub fn weights(&self) -> Vec<f64> {
        let wu = self.u.weights();
        let wv = self.v.weights();
        let mut out = Vec::with_capacity(self.len());
        for a in &wu {
            for b in &wv {
                out.push(a * b);
            }
        }
        out
    }

    /// Smallest coordinate step, used to scale finite-difference steps.
    pub fn min_spacing(&self) -> f64 {
        self.u.spacing().min(self.v.spacing())
    }

    /// Returns the node index when `(u, v)` coincides with a grid node.
    pub fn locate(&self, u: f64, v: f64) -> Option<usize> {
        let find = |axis: &Axis, x: f64| -> Option<usize> {
            let offset = if axis.kind == AxisKind::Polar { 0.5 } else { 0.0 };
            let mut t = (x - axis.start) / axis.spacing() - offset;
            if axis.kind == AxisKind::Periodic {
                t = t.rem_euclid(axis.count as f64);
            }
            let i = t.round();
            let tol = 1e-9 * (1.0 + t.abs());
            if (t - i).abs() > tol {
                return None;
            }
            let i = i as i64;
            if axis.kind == AxisKind::Periodic {
                Some(i.rem_euclid(axis.count as i64) as usize)
            } else if (0..axis.count as i64).contains(&i) {
                Some(i as usize)
            } else {
                None
            }
        };
        Some(self.index(find(&self.u, u)?, find(&self.v, v)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn small_grids_are_rejected() {
        assert!(Axis::periodic(0.0, 1.0, 4).is_err());
        assert!(Axis::open(1.0, 0.0, 16).is_err());
    }

    #[test]
    fn polar_weights_integrate_sine_moments() {
        // ∫_0^π cos²θ sinθ dθ = 2/3
        let axis = Axis::polar(0.0, PI, 16).unwrap();
        let w = axis.weights();
        let s: f64 = axis.nodes().iter().zip(&w).map(|(t, w)| w * t.cos().powi(2) * t.sin()).sum();
        assert_relative_eq!(s, 2.0 / 3.0, epsilon = 1e-14);
        let area: f64 = axis.nodes().iter().zip(&w).map(|(t, w)| w * t.sin()).sum();
        assert_relative_eq!(area, 2.0, epsilon = 1e-14);
    }

    #[test]
    fn trapezoid_and_periodic_weights() {
        let open = Axis::open(0.0, 1.0, 11).unwrap();
        assert_relative_eq!(open.weights().iter().sum::<f64>(), 1.0, epsilon = 1e-15);
        let per = Axis::periodic(0.0, 2.0 * PI, 32).unwrap();
        let s: f64 = per.nodes().iter().zip(per.weights()).map(|(t, w)| w * t.cos().powi(2)).sum();
        assert_relative_eq!(s, PI, epsilon = 1e-14);
    }

    #[test]
    fn locate_finds_nodes() {
        let d = PatchDomain::from_flags((0.0, PI), (0.0, 2.0 * PI), 16, 32, [false, true], true).unwrap();
        let (u, v) = d.point(d.index(3, 5));
        assert_eq!(d.locate(u, v), Some(d.index(3, 5)));
        assert_eq!(d.locate(u + 0.01, v), None);
        assert_eq!(d.locate(u, v + 2.0 * PI), Some(d.index(3, 5)));
    }

    #[test]
    fn pole_offset_needs_periodic_partner() {
        assert!(PatchDomain::from_flags((0.0, PI), (0.0, 1.0), 16, 16, [false, false], true).is_err());
    }
}
