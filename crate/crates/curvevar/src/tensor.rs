//! Small symmetric 2×2 tensors in chart components.

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

/// Symmetric 2×2 components `[t11, t12, t22]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Sym2(pub [f64; 3]);

impl Sym2 {
    pub const IDENTITY: Sym2 = Sym2([1.0, 0.0, 1.0]);
    pub const ZERO: Sym2 = Sym2([0.0; 3]);

    pub fn new(t11: f64, t12: f64, t22: f64) -> Self {
        Sym2([t11, t12, t22])
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        match (i, j) {
            (0, 0) => self.0[0],
            (1, 1) => self.0[2],
            _ => self.0[1],
        }
    }

    pub fn det(&self) -> f64 {
        self.0[0] * self.0[2] - self.0[1] * self.0[1]
    }

    pub fn inverse(&self) -> Sym2 {
        let d = self.det();
        Sym2([self.0[2] / d, -self.0[1] / d, self.0[0] / d])
    }

    /// `t(a, b) = t_ij a^i b^j`.
    pub fn apply(&self, a: [f64; 2], b: [f64; 2]) -> f64 {
        self.0[0] * a[0] * b[0] + self.0[1] * (a[0] * b[1] + a[1] * b[0]) + self.0[2] * a[1] * b[1]
    }

    /// Raises one index with `ginv`, contracting: `(ginv · t)` as a full matrix.
    pub fn mixed(&self, ginv: &Sym2) -> [[f64; 2]; 2] {
        let mut m = [[0.0; 2]; 2];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = (0..2).map(|k| ginv.get(i, k) * self.get(k, j)).sum();
            }
        }
        m
    }

    /// `g^{ij} t_ij`.
    pub fn trace(&self, ginv: &Sym2) -> f64 {
        ginv.0[0] * self.0[0] + 2.0 * ginv.0[1] * self.0[1] + ginv.0[2] * self.0[2]
    }

    /// `g^{ik} g^{jl} a_ij b_kl`.
    pub fn contract(&self, other: &Sym2, ginv: &Sym2) -> f64 {
        let a = self.mixed(ginv);
        let b = other.mixed(ginv);
        // tr(g⁻¹a g⁻¹b)
        a[0][0] * b[0][0] + a[0][1] * b[1][0] + a[1][0] * b[0][1] + a[1][1] * b[1][1]
    }

    /// `(t²)_ij = g^{kl} t_li t_kj`.
    pub fn squared(&self, ginv: &Sym2) -> Sym2 {
        let mut out = [0.0; 3];
        for (slot, (i, j)) in [(0, 0), (0, 1), (1, 1)].into_iter().enumerate() {
            let mut acc = 0.0;
            for k in 0..2 {
                for l in 0..2 {
                    acc += ginv.get(k, l) * self.get(l, i) * self.get(k, j);
                }
            }
            out[slot] = acc;
        }
        Sym2(out)
    }

    /// Raises both indices: `g^{ik} g^{jl} t_kl`.
    pub fn raised(&self, ginv: &Sym2) -> Sym2 {
        let mut out = [0.0; 3];
        for (slot, (i, j)) in [(0, 0), (0, 1), (1, 1)].into_iter().enumerate() {
            let mut acc = 0.0;
            for k in 0..2 {
                for l in 0..2 {
                    acc += ginv.get(i, k) * ginv.get(j, l) * self.get(k, l);
                }
            }
            out[slot] = acc;
        }
        Sym2(out)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }
}

impl Add for Sym2 {
    type Output = Sym2;
    fn add(self, rhs: Sym2) -> Sym2 {
        Sym2(std::array::from_fn(|k| self.0[k] + rhs.0[k]))
    }
}

impl Sub for Sym2 {
    type Output = Sym2;
    fn sub(self, rhs: Sym2) -> Sym2 {
        Sym2(std::array::from_fn(|k| self.0[k] - rhs.0[k]))
    }
}

impl Mul<f64> for Sym2 {
    type Output = Sym2;
    fn mul(self, rhs: f64) -> Sym2 {
        Sym2(self.0.map(|x| x * rhs))
    }
}
