//! Second-order forward-mode jets on charts of dimension ≤ [`MAX_DIM`].

use std::ops::{Add, Mul, Neg, Sub};

pub const MAX_DIM: usize = 5;

/// Value, gradient and Hessian of a scalar function at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub grad: [f64; MAX_DIM],
    pub hess: [[f64; MAX_DIM]; MAX_DIM],
}

impl Jet {
    pub const ZERO: Jet = Jet { value: 0.0, grad: [0.0; MAX_DIM], hess: [[0.0; MAX_DIM]; MAX_DIM] };

    pub fn constant(value: f64) -> Jet {
        Jet { value, ..Jet::ZERO }
    }

    /// The coordinate function `x_axis` evaluated at `value`.
    pub fn variable(axis: usize, value: f64) -> Jet {
        let mut j = Jet::constant(value);
        j.grad[axis] = 1.0;
        j
    }

    /// `f ∘ self` for a univariate `f` given as `[f, f', f'']` at `self.value`.
    pub fn compose(&self, f: [f64; 3]) -> Jet {
        let mut out = Jet::constant(f[0]);
        for i in 0..MAX_DIM {
            out.grad[i] = f[1] * self.grad[i];
            for j in 0..MAX_DIM {
                out.hess[i][j] = f[2] * (self.grad[i] * self.grad[j]) + f[1] * self.hess[i][j];
            }
        }
        out
    }

    pub fn exp(&self) -> Jet {
        let e = self.value.exp();
        self.compose([e, e, e])
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.value.sin_cos();
        self.compose([s, c, -s])
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.value.sin_cos();
        self.compose([c, -s, -c])
    }

    pub fn scale(&self, k: f64) -> Jet {
        let mut out = *self;
        out.value *= k;
        for i in 0..MAX_DIM {
            out.grad[i] *= k;
            for j in 0..MAX_DIM {
                out.hess[i][j] *= k;
            }
        }
        out
    }

    /// Re-indexes derivatives: coordinate `i` of this jet becomes coordinate `axes[i]`.
    pub fn remap(&self, axes: &[usize]) -> Jet {
        let mut out = Jet::constant(self.value);
        for (i, &ai) in axes.iter().enumerate() {
            out.grad[ai] = self.grad[i];
            for (j, &aj) in axes.iter().enumerate() {
                out.hess[ai][aj] = self.hess[i][j];
            }
        }
        out
    }

    /// Chain rule through an affine change of variables `y = M x + c`,
    /// where `self` is a jet in `y` and `m` is `dim_y × dim_x`.
    pub fn pull_affine(&self, m: &[Vec<f64>], dim_x: usize) -> Jet {
        let mut out = Jet::constant(self.value);
        let dim_y = m.len();
        for a in 0..dim_x {
            out.grad[a] = (0..dim_y).map(|k| self.grad[k] * m[k][a]).sum();
            for b in 0..dim_x {
                let mut s = 0.0;
                for k in 0..dim_y {
                    for l in 0..dim_y {
                        s += m[k][a] * self.hess[k][l] * m[l][b];
                    }
                }
                out.hess[a][b] = s;
            }
        }
        out
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        let mut out = self;
        out.value += o.value;
        for i in 0..MAX_DIM {
            out.grad[i] += o.grad[i];
            for j in 0..MAX_DIM {
                out.hess[i][j] += o.hess[i][j];
            }
        }
        out
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        self + (-o)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let mut out = Jet::constant(self.value * o.value);
        for i in 0..MAX_DIM {
            out.grad[i] = self.value * o.grad[i] + o.value * self.grad[i];
            for j in 0..MAX_DIM {
                out.hess[i][j] = self.value * o.hess[i][j]
                    + o.value * self.hess[i][j]
                    + (self.grad[i] * o.grad[j] + o.grad[i] * self.grad[j]);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule_and_symmetry() {
        let x = Jet::variable(0, 0.7);
        let y = Jet::variable(1, -1.3);
        let f = (x * y).sin() * x.exp();
        // f = sin(xy) e^x
        let (xv, yv) = (0.7f64, -1.3f64);
        let fx = yv * (xv * yv).cos() * xv.exp() + (xv * yv).sin() * xv.exp();
        assert!((f.grad[0] - fx).abs() < 1e-14);
        assert_eq!(f.hess[0][1], f.hess[1][0]);
    }

    #[test]
    fn remap_moves_derivatives() {
        let x = Jet::variable(0, 2.0) * Jet::variable(0, 2.0);
        let r = x.remap(&[3]);
        assert_eq!(r.grad[3], 4.0);
        assert_eq!(r.hess[3][3], 2.0);
        assert_eq!(r.grad[0], 0.0);
    }
}
