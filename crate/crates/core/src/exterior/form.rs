//! Pointwise differential forms stored over strictly increasing multi-indices.

use std::ops::{Add, Mul, Neg, Sub};
use std::sync::OnceLock;

use super::jet::{Jet, MAX_DIM};
use crate::error::{Error, Result};

/// Coefficient ring for [`Form`]: plain values or jets.
pub trait Coefficient:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self> + Send + Sync
{
    fn zero() -> Self;
    fn scale(self, k: f64) -> Self;
}

impl Coefficient for f64 {
    fn zero() -> Self {
        0.0
    }
    fn scale(self, k: f64) -> Self {
        self * k
    }
}

impl Coefficient for Jet {
    fn zero() -> Self {
        Jet::ZERO
    }
    fn scale(self, k: f64) -> Self {
        Jet::scale(&self, k)
    }
}

pub(crate) struct Basis {
    pub masks: Vec<u8>,
    pub pos: [usize; 1 << MAX_DIM],
}

fn indices(mask: u8) -> Vec<usize> {
    (0..MAX_DIM).filter(|i| mask & (1 << i) != 0).collect()
}

pub(crate) fn basis(dim: usize, degree: usize) -> &'static Basis {
    static TABLE: OnceLock<Vec<Vec<Basis>>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        (0..=MAX_DIM)
            .map(|n| {
                (0..=MAX_DIM + 1)
                    .map(|k| {
                        let mut masks: Vec<u8> =
                            (0u8..(1u8 << n)).filter(|m| m.count_ones() as usize == k).collect();
                        masks.sort_by_key(|&m| indices(m));
                        let mut pos = [usize::MAX; 1 << MAX_DIM];
                        for (i, &m) in masks.iter().enumerate() {
                            pos[m as usize] = i;
                        }
                        Basis { masks, pos }
                    })
                    .collect()
            })
            .collect()
    });
    &table[dim][degree.min(MAX_DIM + 1)]
}

/// Strictly increasing multi-indices of `degree` in `dim` variables, in storage order.
pub fn multi_indices(dim: usize, degree: usize) -> Vec<Vec<usize>> {
    basis(dim, degree).masks.iter().map(|&m| indices(m)).collect()
}

/// Sign of `dx_I ∧ dx_J` relative to `dx_{I∪J}`; zero when the sets meet.
pub(crate) fn wedge_sign(i: u8, j: u8) -> f64 {
    if i & j != 0 {
        return 0.0;
    }
    let mut inversions = 0;
    for a in indices(i) {
        inversions += (j & ((1u8 << a) - 1)).count_ones();
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

pub(crate) fn to_mask(idx: &[usize]) -> Option<(u8, f64)> {
    let mut mask = 0u8;
    let mut sign = 1.0;
    for (k, &i) in idx.iter().enumerate() {
        if mask & (1 << i) != 0 {
            return None;
        }
        // parity of the permutation sorting idx
        for &j in &idx[..k] {
            if j > i {
                sign = -sign;
            }
        }
        mask |= 1 << i;
    }
    Some((mask, sign))
}

/// A degree-`degree` form on a `dim`-chart at a single point.
#[derive(Clone, Debug, PartialEq)]
pub struct Form<T> {
    pub dim: usize,
    pub degree: usize,
    pub coeffs: Vec<T>,
}

pub type FormValue = Form<f64>;
pub type FormJet = Form<Jet>;

impl<T: Coefficient> Form<T> {
    pub fn zero(dim: usize, degree: usize) -> Self {
        Form { dim, degree, coeffs: vec![T::zero(); basis(dim, degree).masks.len()] }
    }

    /// Coefficient of `dx_{idx[0]} ∧ … ∧ dx_{idx[k-1]}` for any index order.
    pub fn coeff(&self, idx: &[usize]) -> T {
        match to_mask(idx) {
            Some((mask, sign)) if idx.len() == self.degree => {
                let p = basis(self.dim, self.degree).pos[mask as usize];
                self.coeffs[p].scale(sign)
            }
            _ => T::zero(),
        }
    }

    /// Adds `c · dx_{idx}` (indices in any order, repeated indices ignored).
    pub fn add_term(&mut self, idx: &[usize], c: T) {
        if idx.len() != self.degree {
            return;
        }
        if let Some((mask, sign)) = to_mask(idx) {
            let p = basis(self.dim, self.degree).pos[mask as usize];
            self.coeffs[p] = self.coeffs[p] + c.scale(sign);
        }
    }

    pub fn wedge(&self, other: &Form<T>) -> Result<Form<T>> {
        if self.dim != other.dim {
            return Err(Error::ChartMismatch(format!("wedge of {}-chart and {}-chart forms", self.dim, other.dim)));
        }
        let mut out = Form::zero(self.dim, self.degree + other.degree);
        if out.coeffs.is_empty() {
            return Ok(out);
        }
        let bi = basis(self.dim, self.degree);
        let bj = basis(other.dim, other.degree);
        let bo = basis(self.dim, out.degree);
        for (a, &mi) in bi.masks.iter().enumerate() {
            for (b, &mj) in bj.masks.iter().enumerate() {
                let s = wedge_sign(mi, mj);
                if s != 0.0 {
                    let p = bo.pos[(mi | mj) as usize];
                    out.coeffs[p] = out.coeffs[p] + (self.coeffs[a] * other.coeffs[b]).scale(s);
                }
            }
        }
        Ok(out)
    }

    pub fn try_add(&self, other: &Form<T>) -> Result<Form<T>> {
        if self.dim != other.dim || self.degree != other.degree {
            return Err(Error::ChartMismatch(format!(
                "sum of ({}, deg {}) and ({}, deg {}) forms",
                self.dim, self.degree, other.dim, other.degree
            )));
        }
        Ok(Form {
            dim: self.dim,
            degree: self.degree,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| *a + *b).collect(),
        })
    }

    pub fn scale(&self, k: f64) -> Form<T> {
        Form { dim: self.dim, degree: self.degree, coeffs: self.coeffs.iter().map(|c| c.scale(k)).collect() }
    }

    pub fn mul_scalar(&self, f: T) -> Form<T> {
        Form { dim: self.dim, degree: self.degree, coeffs: self.coeffs.iter().map(|c| f * *c).collect() }
    }
}

impl FormValue {
    /// `dx_axis` on a `dim`-chart.
    pub fn dx(dim: usize, axis: usize) -> FormValue {
        let mut f = FormValue::zero(dim, 1);
        f.add_term(&[axis], 1.0);
        f
    }

    pub fn scalar(dim: usize, v: f64) -> FormValue {
        Form { dim, degree: 0, coeffs: vec![v] }
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn max_abs_diff(&self, other: &FormValue) -> f64 {
        self.coeffs.iter().zip(&other.coeffs).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Coefficient on `dx_0 ∧ … ∧ dx_{dim-1}` (zero unless top degree).
    pub fn top(&self) -> f64 {
        if self.degree == self.dim {
            self.coeffs[0]
        } else {
            0.0
        }
    }

    /// Value on `vectors` (one per degree), each a component list in chart coordinates.
    pub fn evaluate(&self, vectors: &[Vec<f64>]) -> Result<f64> {
        if vectors.len() != self.degree {
            return Err(Error::FrameMismatch { expected: self.degree, got: vectors.len() });
        }
        let mut total = 0.0;
        for (k, &m) in basis(self.dim, self.degree).masks.iter().enumerate() {
            if self.coeffs[k] == 0.0 {
                continue;
            }
            let rows = indices(m);
            let minor: Vec<Vec<f64>> =
                rows.iter().map(|&r| vectors.iter().map(|v| v[r]).collect()).collect();
            total += self.coeffs[k] * determinant(&minor);
        }
        Ok(total)
    }

    /// Pullback through a linear map with Jacobian `jac` (`self.dim × n`,
    /// `jac[a][b] = ∂y_a/∂x_b`).
    pub fn pullback(&self, jac: &[Vec<f64>]) -> Result<FormValue> {
        if jac.len() != self.dim {
            return Err(Error::ChartMismatch(format!("Jacobian has {} rows for a {}-chart form", jac.len(), self.dim)));
        }
        let n = jac.first().map_or(0, |r| r.len());
        let mut out = FormValue::zero(n, self.degree);
        let src = basis(self.dim, self.degree);
        for (o, &mo) in basis(n, self.degree).masks.iter().enumerate() {
            let cols = indices(mo);
            let mut s = 0.0;
            for (k, &mk) in src.masks.iter().enumerate() {
                if self.coeffs[k] == 0.0 {
                    continue;
                }
                let rows = indices(mk);
                let minor: Vec<Vec<f64>> = rows.iter().map(|&r| cols.iter().map(|&c| jac[r][c]).collect()).collect();
                s += self.coeffs[k] * determinant(&minor);
            }
            out.coeffs[o] = s;
        }
        Ok(out)
    }
}

impl FormJet {
    pub fn value(&self) -> FormValue {
        Form { dim: self.dim, degree: self.degree, coeffs: self.coeffs.iter().map(|j| j.value).collect() }
    }

    /// Exterior derivative from the jets; the result loses one order of derivatives.
    pub fn exterior_derivative(&self) -> FormJet {
        let mut out = FormJet::zero(self.dim, self.degree + 1);
        if out.coeffs.is_empty() {
            return out;
        }
        let bo = basis(self.dim, self.degree + 1);
        for (k, &m) in basis(self.dim, self.degree).masks.iter().enumerate() {
            let c = &self.coeffs[k];
            for i in 0..self.dim {
                let s = wedge_sign(1 << i, m);
                if s == 0.0 {
                    continue;
                }
                let mut term = Jet::constant(c.grad[i]);
                for j in 0..self.dim {
                    term.grad[j] = 0.5 * (c.hess[i][j] + c.hess[j][i]);
                }
                let p = bo.pos[(m | (1 << i)) as usize];
                out.coeffs[p] = out.coeffs[p] + term.scale(s);
            }
        }
        out
    }
}

/// Determinant by partial-pivot elimination; `1` for the empty matrix.
pub fn determinant(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    match n {
        0 => return 1.0,
        1 => return m[0][0],
        2 => return m[0][0] * m[1][1] - m[0][1] * m[1][0],
        _ => {}
    }
    let mut a: Vec<Vec<f64>> = m.to_vec();
    let mut det = 1.0;
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap_or(col);
        if a[piv][col] == 0.0 {
            return 0.0;
        }
        if piv != col {
            a.swap(piv, col);
            det = -det;
        }
        det *= a[col][col];
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
        }
    }
    det
}

/// Pfaffian of an antisymmetric matrix of size 0, 2 or 4.
pub fn pfaffian(m: &[Vec<f64>]) -> Option<f64> {
    match m.len() {
        0 => Some(1.0),
        2 => Some(m[0][1]),
        4 => Some(m[0][1] * m[2][3] - m[0][2] * m[1][3] + m[0][3] * m[1][2]),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_order_is_lexicographic() {
        assert_eq!(
            multi_indices(4, 2),
            vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]
        );
        assert!(multi_indices(3, 4).is_empty());
    }

    #[test]
    fn wedge_signs() {
        let dx = FormValue::dx(3, 0);
        assert_eq!(dx.wedge(&dx).unwrap().max_abs(), 0.0);
        let du = FormValue::dx(3, 1);
        let dv = FormValue::dx(3, 2);
        let a = du.wedge(&dv).unwrap();
        let b = dv.wedge(&du).unwrap();
        assert_eq!(a.coeffs, b.scale(-1.0).coeffs);
        assert_eq!(dv.wedge(&dx).unwrap().wedge(&du).unwrap().top(), 1.0);
    }

    #[test]
    fn coefficient_lookup_respects_order() {
        let mut f = FormValue::zero(4, 2);
        f.add_term(&[3, 1], 2.0);
        assert_eq!(f.coeff(&[1, 3]), -2.0);
        assert_eq!(f.coeff(&[3, 1]), 2.0);
    }

    #[test]
    fn evaluate_on_vectors() {
        let mut f = FormValue::zero(2, 2);
        f.add_term(&[0, 1], 1.0);
        assert_eq!(f.evaluate(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap(), 1.0);
        assert_eq!(f.evaluate(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap(), -1.0);
        assert!(f.evaluate(&[vec![1.0, 0.0]]).is_err());
    }

    #[test]
    fn determinant_small() {
        let m = vec![vec![2.0, 1.0, 0.0], vec![1.0, 3.0, 1.0], vec![0.0, 1.0, 4.0]];
        assert!((determinant(&m) - 18.0).abs() < 1e-12);
    }
}
