//! Derivatives of grid-sampled values along chart directions.
//!
//! Periodic directions are differentiated spectrally. A polar direction is
//! continued through both poles by the reflection `f(2π − θ, φ) = f(θ, φ + π)`,
//! which makes the doubled line periodic, and is then differentiated
//! spectrally as well. Open directions use fourth-order finite differences,
//! one-sided near the ends.

use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::jet::{coefficient_count, slot};
use crate::surface::callable::fornberg_weights;
use crate::surface::{Axis, AxisKind, PatchDomain};

#[derive(Clone, Copy)]
enum Direction {
    U,
    V,
}

fn axis_of(domain: &PatchDomain, d: Direction) -> (&Axis, &Axis) {
    match d {
        Direction::U => (&domain.u, &domain.v),
        Direction::V => (&domain.v, &domain.u),
    }
}

/// Spectral derivative of one periodic line of length `period`.
fn periodic_line(planner: &mut FftPlanner<f64>, line: &[f64], period: f64, order: usize) -> Vec<f64> {
    let n = line.len();
    let mut buf: Vec<Complex<f64>> = line.iter().map(|&x| Complex::new(x, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut buf);
    let base = 2.0 * PI / period;
    for (k, c) in buf.iter_mut().enumerate() {
        let freq = if 2 * k < n {
            k as f64
        } else if 2 * k == n {
            if order % 2 == 1 {
                *c = Complex::new(0.0, 0.0);
                continue;
            }
            (n / 2) as f64
        } else {
            k as f64 - n as f64
        };
        let ik = Complex::new(0.0, freq * base);
        *c *= ik.powu(order as u32);
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    buf.iter().map(|c| c.re / n as f64).collect()
}

fn open_line(line: &[f64], spacing: f64, order: usize) -> Vec<f64> {
    let n = line.len();
    let width = (order + 4).min(n);
    let scale = spacing.powi(order as i32);
    (0..n)
        .map(|i| {
            let start = i.saturating_sub(width / 2).min(n - width);
            let offsets: Vec<f64> = (start..start + width).map(|k| k as f64 - i as f64).collect();
            let w = fornberg_weights(&offsets, order);
            w.iter().zip(&line[start..start + width]).map(|(w, f)| w * f).sum::<f64>() / scale
        })
        .collect()
}

/// Derivative of order `order` along one direction of a row-major grid.
fn differentiate(
    planner: &mut FftPlanner<f64>,
    domain: &PatchDomain,
    values: &[f64],
    dir: Direction,
    order: usize,
) -> Result<Vec<f64>> {
    if order == 0 {
        return Ok(values.to_vec());
    }
    let (axis, partner) = axis_of(domain, dir);
    let (nu, nv) = domain.shape();
    let (lines, len) = match dir {
        Direction::U => (nv, nu),
        Direction::V => (nu, nv),
    };
    let at = |line: usize, k: usize| match dir {
        Direction::U => domain.index(k, line),
        Direction::V => domain.index(line, k),
    };
    if axis.kind == AxisKind::Polar {
        let half_turn = partner.kind == AxisKind::Periodic
            && partner.count % 2 == 0
            && (partner.extent() - 2.0 * PI).abs() <= 1e-12 * 2.0 * PI;
        if !half_turn {
            return Err(Error::InvalidDomain(
                "differentiating across a pole needs an even periodic partner direction spanning 2π".into(),
            ));
        }
    }
    let mut out = vec![0.0; values.len()];
    for line in 0..lines {
        let data: Vec<f64> = (0..len).map(|k| values[at(line, k)]).collect();
        let deriv = match axis.kind {
            AxisKind::Periodic => periodic_line(planner, &data, axis.extent(), order),
            AxisKind::Open => open_line(&data, axis.spacing(), order),
            AxisKind::Polar => {
                let opposite = (line + partner.count / 2) % partner.count;
                let mut ext = data.clone();
                ext.extend((0..len).rev().map(|k| values[at(opposite, k)]));
                let mut d = periodic_line(planner, &ext, 2.0 * axis.extent(), order);
                d.truncate(len);
                d
            }
        };
        for (k, x) in deriv.into_iter().enumerate() {
            out[at(line, k)] = x;
        }
    }
    Ok(out)
}

/// All partials `∂^a_u ∂^b_v f` with `a + b ≤ max_order`, indexed by
/// [`slot`]. Derivatives along `v` are taken first so a polar `u` direction
/// always reflects a function that is smooth on the surface.
pub fn grid_partials(domain: &PatchDomain, values: &[f64], max_order: usize) -> Result<Vec<Vec<f64>>> {
    if values.len() != domain.len() {
        return Err(Error::GridMismatch {
            expected: domain.shape(),
            found: (values.len(), 1),
        });
    }
    let mut planner = FftPlanner::new();
    let mut out = vec![Vec::new(); coefficient_count(max_order)];
    for b in 0..=max_order {
        let along_v = differentiate(&mut planner, domain, values, Direction::V, b)?;
        for a in 0..=(max_order - b) {
            out[slot(a, b)] = differentiate(&mut planner, domain, &along_v, Direction::U, a)?;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere_domain(nt: usize, np: usize) -> PatchDomain {
        PatchDomain::new(Axis::polar(0.0, PI, nt).unwrap(), Axis::periodic(0.0, 2.0 * PI, np).unwrap()).unwrap()
    }

    #[test]
    fn periodic_derivatives_are_spectral() {
        let d = PatchDomain::new(
            Axis::periodic(0.0, 2.0 * PI, 16).unwrap(),
            Axis::periodic(0.0, 2.0 * PI, 32).unwrap(),
        )
        .unwrap();
        let f: Vec<f64> = (0..d.len()).map(|k| {
            let (u, v) = d.point(k);
            (u + 2.0 * v).sin()
        }).collect();
        let p = grid_partials(&d, &f, 2).unwrap();
        for k in 0..d.len() {
            let (u, v) = d.point(k);
            assert!((p[slot(1, 0)][k] - (u + 2.0 * v).cos()).abs() < 1e-12);
            assert!((p[slot(1, 1)][k] + 2.0 * (u + 2.0 * v).sin()).abs() < 1e-12);
            assert!((p[slot(0, 2)][k] + 4.0 * (u + 2.0 * v).sin()).abs() < 1e-11);
        }
    }

    #[test]
    fn polar_reflection_differentiates_through_poles() {
        let d = sphere_domain(24, 48);
        // x = sinθ cosφ, smooth on the sphere
        let f: Vec<f64> = (0..d.len()).map(|k| {
            let (t, p) = d.point(k);
            t.sin() * p.cos()
        }).collect();
        let part = grid_partials(&d, &f, 3).unwrap();
        for k in 0..d.len() {
            let (t, p) = d.point(k);
            assert!((part[slot(1, 0)][k] - t.cos() * p.cos()).abs() < 1e-12);
            assert!((part[slot(2, 1)][k] - t.sin() * p.sin()).abs() < 1e-11);
        }
    }

    #[test]
    fn open_axes_are_fourth_order() {
        let err = |n: usize| {
            let d = PatchDomain::new(Axis::open(0.0, 1.0, n).unwrap(), Axis::open(0.0, 1.0, n).unwrap()).unwrap();
            let f: Vec<f64> = (0..d.len()).map(|k| {
                let (u, v) = d.point(k);
                (2.0 * u).exp() * v.sin()
            }).collect();
            let p = grid_partials(&d, &f, 2).unwrap();
            (0..d.len())
                .map(|k| {
                    let (u, v) = d.point(k);
                    (p[slot(2, 0)][k] - 4.0 * (2.0 * u).exp() * v.sin()).abs()
                })
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(17), err(33));
        assert!((e1 / e2).log2() > 3.5, "{e1} {e2}");
    }

    #[test]
    fn odd_partner_is_rejected() {
        let d = sphere_domain(16, 31);
        assert!(grid_partials(&d, &vec![0.0; d.len()], 1).is_err());
    }
}
