//! Exterior calculus on product charts of dimension at most five.
//!
//! Form fields carry analytic coefficient closures evaluated on second-order
//! jets, so `d` is exact up to rounding. The finite-difference derivative on
//! sampled grids is kept as an independent oracle.

mod form;
mod jet;

use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;

pub use form::{determinant, multi_indices, pfaffian, Coefficient, Form, FormJet, FormValue};
pub use jet::{Jet, MAX_DIM};

use crate::error::{Error, Result};

type Eval = Arc<dyn Fn(&[Jet]) -> FormJet + Send + Sync>;

/// A differential form on a `dim`-chart, evaluated through jets.
///
/// `order` counts how many exterior derivatives the coefficient jets still
/// support: freshly built fields have 2, each `d` spends one.
#[derive(Clone)]
pub struct FormField {
    dim: usize,
    degree: usize,
    order: u8,
    eval: Eval,
}

impl std::fmt::Debug for FormField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FormField")
            .field("dim", &self.dim)
            .field("degree", &self.degree)
            .field("order", &self.order)
            .finish()
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 || dim > MAX_DIM {
        return Err(Error::ChartMismatch(format!("chart dimension {dim} outside 1..={MAX_DIM}")));
    }
    Ok(())
}

impl FormField {
    /// Builds a field from a closure on coordinate jets. The closure must return
    /// a form of the declared `dim` and `degree`.
    pub fn new<F>(dim: usize, degree: usize, f: F) -> Result<FormField>
    where
        F: Fn(&[Jet]) -> FormJet + Send + Sync + 'static,
    {
        check_dim(dim)?;
        Ok(FormField { dim, degree, order: 2, eval: Arc::new(f) })
    }

    /// A field whose coefficients are known only as values (no derivatives).
    pub fn without_derivatives<F>(dim: usize, degree: usize, f: F) -> Result<FormField>
    where
        F: Fn(&[f64]) -> FormValue + Send + Sync + 'static,
    {
        check_dim(dim)?;
        let eval = move |x: &[Jet]| {
            let p: Vec<f64> = x.iter().map(|j| j.value).collect();
            let v = f(&p);
            Form { dim: v.dim, degree: v.degree, coeffs: v.coeffs.into_iter().map(Jet::constant).collect() }
        };
        Ok(FormField { dim, degree, order: 0, eval: Arc::new(eval) })
    }

    pub fn constant(value: FormValue) -> Result<FormField> {
        check_dim(value.dim)?;
        let (dim, degree) = (value.dim, value.degree);
        let jets: FormJet = Form { dim, degree, coeffs: value.coeffs.iter().map(|&c| Jet::constant(c)).collect() };
        Ok(FormField { dim, degree, order: 2, eval: Arc::new(move |_| jets.clone()) })
    }

    /// `dx_axis` as a constant field.
    pub fn dx(dim: usize, axis: usize) -> Result<FormField> {
        FormField::constant(FormValue::dx(dim, axis))
    }

    /// The coordinate function `x_axis` as a 0-form.
    pub fn coordinate(dim: usize, axis: usize) -> Result<FormField> {
        FormField::new(dim, 0, move |x| Form { dim, degree: 0, coeffs: vec![x[axis]] })
    }

    /// A 0-form from a closure on jets.
    pub fn scalar<F>(dim: usize, f: F) -> Result<FormField>
    where
        F: Fn(&[Jet]) -> Jet + Send + Sync + 'static,
    {
        FormField::new(dim, 0, move |x| Form { dim, degree: 0, coeffs: vec![f(x)] })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn order(&self) -> u8 {
        self.order
    }

    fn seed(&self, p: &[f64]) -> Result<Vec<Jet>> {
        if p.len() != self.dim {
            return Err(Error::ChartMismatch(format!("point of length {} on a {}-chart", p.len(), self.dim)));
        }
        Ok(p.iter().enumerate().map(|(i, &v)| Jet::variable(i, v)).collect())
    }

    pub fn jet_at(&self, p: &[f64]) -> Result<FormJet> {
        let x = self.seed(p)?;
        Ok((self.eval)(&x))
    }

    pub fn at(&self, p: &[f64]) -> Result<FormValue> {
        Ok(self.jet_at(p)?.value())
    }

    fn combine(&self, other: &FormField, degree: usize, f: impl Fn(&FormJet, &FormJet) -> FormJet + Send + Sync + 'static) -> FormField {
        let (a, b) = (self.eval.clone(), other.eval.clone());
        FormField {
            dim: self.dim,
            degree,
            order: self.order.min(other.order),
            eval: Arc::new(move |x| f(&a(x), &b(x))),
        }
    }

    pub fn wedge(&self, other: &FormField) -> Result<FormField> {
        wedge(self, other)
    }

    pub fn add(&self, other: &FormField) -> Result<FormField> {
        if self.dim != other.dim || self.degree != other.degree {
            return Err(Error::ChartMismatch(format!(
                "sum of ({}, deg {}) and ({}, deg {}) fields",
                self.dim, self.degree, other.dim, other.degree
            )));
        }
        Ok(self.combine(other, self.degree, |a, b| a.try_add(b).expect("shapes checked")))
    }

    pub fn sub(&self, other: &FormField) -> Result<FormField> {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, k: f64) -> FormField {
        let a = self.eval.clone();
        FormField { dim: self.dim, degree: self.degree, order: self.order, eval: Arc::new(move |x| a(x).scale(k)) }
    }

    /// Product with a 0-form field.
    pub fn mul(&self, f: &FormField) -> Result<FormField> {
        if f.degree != 0 {
            return Err(Error::ChartMismatch(format!("multiplier has degree {}", f.degree)));
        }
        f.wedge(self)
    }

    pub fn d(&self) -> Result<FormField> {
        d_analytic(self)
    }

    /// Pullback through the affine map `y = M x + c` from a `cols(M)`-chart.
    pub fn pull_affine(&self, m: &[Vec<f64>], c: &[f64]) -> Result<FormField> {
        if m.len() != self.dim || c.len() != self.dim {
            return Err(Error::ChartMismatch(format!("affine map with {} rows for a {}-chart", m.len(), self.dim)));
        }
        let n = m.first().map_or(0, |r| r.len());
        check_dim(n)?;
        if m.iter().any(|r| r.len() != n) {
            return Err(Error::ChartMismatch("ragged affine matrix".into()));
        }
        // Jacobian minors are constant; pull the jet-valued form through them.
        let minors = Form::<f64>::zero(self.dim, self.degree).pullback_table(m);
        let (a, m, c) = (self.eval.clone(), m.to_vec(), c.to_vec());
        let degree = self.degree;
        let eval = move |x: &[Jet]| {
            // the source sees its own coordinates, so derivatives taken inside it stay in y
            let y: Vec<Jet> = (0..m.len())
                .map(|k| Jet::variable(k, c[k] + (0..n).map(|j| m[k][j] * x[j].value).sum::<f64>()))
                .collect();
            let src = a(&y);
            let mut out = FormJet::zero(n, degree);
            for (o, row) in minors.iter().enumerate() {
                for (k, &w) in row.iter().enumerate() {
                    if w != 0.0 {
                        out.coeffs[o] = out.coeffs[o] + src.coeffs[k].pull_affine(&m, n).scale(w);
                    }
                }
            }
            out
        };
        Ok(FormField { dim: n, degree, order: self.order, eval: Arc::new(eval) })
    }

    /// Lifts a field along the projection that keeps coordinates `axes` of a `dim`-chart.
    pub fn embed(&self, dim: usize, axes: &[usize]) -> Result<FormField> {
        if axes.len() != self.dim || axes.iter().any(|&a| a >= dim) {
            return Err(Error::ChartMismatch(format!("cannot embed a {}-chart field via {axes:?}", self.dim)));
        }
        let mut m = vec![vec![0.0; dim]; self.dim];
        for (i, &a) in axes.iter().enumerate() {
            m[i][a] = 1.0;
        }
        self.pull_affine(&m, &vec![0.0; self.dim])
    }
}

impl Form<f64> {
    /// For each target multi-index, the weights of the source coefficients under
    /// pullback by the linear map `m` (`self.dim × n`).
    fn pullback_table(&self, m: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let n = m.first().map_or(0, |r| r.len());
        let src = multi_indices(self.dim, self.degree);
        multi_indices(n, self.degree)
            .into_iter()
            .map(|cols| {
                src.iter()
                    .map(|rows| {
                        let minor: Vec<Vec<f64>> =
                            rows.iter().map(|&r| cols.iter().map(|&c| m[r][c]).collect()).collect();
                        determinant(&minor)
                    })
                    .collect()
            })
            .collect()
    }
}

pub fn wedge(a: &FormField, b: &FormField) -> Result<FormField> {
    if a.dim != b.dim {
        return Err(Error::ChartMismatch(format!("wedge of {}-chart and {}-chart fields", a.dim, b.dim)));
    }
    Ok(a.combine(b, a.degree + b.degree, |x, y| x.wedge(y).expect("same chart")))
}

pub fn d_analytic(a: &FormField) -> Result<FormField> {
    if a.order == 0 {
        return Err(Error::MissingDerivative);
    }
    let f = a.eval.clone();
    Ok(FormField { dim: a.dim, degree: a.degree + 1, order: a.order - 1, eval: Arc::new(move |x| f(x).exterior_derivative()) })
}

/// One grid axis: `n` samples on `[min, max]`, or on `[min, max)` when periodic.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub n: usize,
    pub periodic: bool,
}

impl Axis {
    pub fn closed(min: f64, max: f64, n: usize) -> Axis {
        Axis { min, max, n, periodic: false }
    }

    pub fn periodic(min: f64, max: f64, n: usize) -> Axis {
        Axis { min, max, n, periodic: true }
    }

    pub fn h(&self) -> f64 {
        if self.periodic {
            (self.max - self.min) / self.n as f64
        } else {
            (self.max - self.min) / (self.n - 1) as f64
        }
    }

    pub fn point(&self, i: usize) -> f64 {
        self.min + i as f64 * self.h()
    }

    /// The same axis with spacing halved.
    pub fn refined(&self) -> Axis {
        let n = if self.periodic { 2 * self.n } else { 2 * self.n - 1 };
        Axis { n, ..self.clone() }
    }
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Grid {
    pub axes: Vec<Axis>,
}

impl Grid {
    /// Rejects axes with fewer than four samples.
    pub fn new(axes: Vec<Axis>) -> Result<Grid> {
        for (axis, a) in axes.iter().enumerate() {
            if a.n < 4 {
                return Err(Error::GridTooCoarse { axis, samples: a.n });
            }
            if !(a.max > a.min) {
                return Err(Error::Config(format!("axis {axis} has empty range [{}, {}]", a.min, a.max)));
            }
        }
        check_dim(axes.len())?;
        Ok(Grid { axes })
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.n).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn refined(&self) -> Grid {
        Grid { axes: self.axes.iter().map(Axis::refined).collect() }
    }

    /// Multi-index of the `k`-th point in row-major order (last axis fastest).
    pub fn index(&self, mut k: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for (i, a) in self.axes.iter().enumerate().rev() {
            idx[i] = k % a.n;
            k /= a.n;
        }
        idx
    }

    pub fn flat(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.axes).fold(0, |acc, (&i, a)| acc * a.n + i)
    }

    pub fn point(&self, k: usize) -> Vec<f64> {
        self.index(k).iter().zip(&self.axes).map(|(&i, a)| a.point(i)).collect()
    }

    pub fn points(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.len()).map(|k| self.point(k))
    }

    /// Short human-readable descriptor, e.g. `64x16x16x16`.
    pub fn describe(&self) -> String {
        self.axes.iter().map(|a| a.n.to_string()).collect::<Vec<_>>().join("x")
    }
}

/// Form values on every grid point, row-major.
#[derive(Clone, Debug)]
pub struct SampledForm {
    pub grid: Grid,
    pub degree: usize,
    pub values: Vec<FormValue>,
}

pub fn sample(a: &FormField, grid: &Grid) -> Result<SampledForm> {
    if grid.dim() != a.dim {
        return Err(Error::ChartMismatch(format!("{}-dim grid for a {}-chart field", grid.dim(), a.dim)));
    }
    let values = (0..grid.len()).into_par_iter().map(|k| a.at(&grid.point(k))).collect::<Result<Vec<_>>>()?;
    Ok(SampledForm { grid: grid.clone(), degree: a.degree, values })
}

/// Second-order finite difference of `f` along `axis` at `idx`.
fn fd_partial(s: &SampledForm, idx: &[usize], axis: usize, coeff: usize) -> f64 {
    let ax = &s.grid.axes[axis];
    let h = ax.h();
    let i = idx[axis];
    let at = |j: usize| {
        let mut m = idx.to_vec();
        m[axis] = j;
        s.values[s.grid.flat(&m)].coeffs[coeff]
    };
    if ax.periodic {
        let n = ax.n;
        (at((i + 1) % n) - at((i + n - 1) % n)) / (2.0 * h)
    } else if i == 0 {
        (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h)
    } else if i == ax.n - 1 {
        (3.0 * at(i) - 4.0 * at(i - 1) + at(i - 2)) / (2.0 * h)
    } else {
        (at(i + 1) - at(i - 1)) / (2.0 * h)
    }
}

/// Finite-difference exterior derivative of sampled values.
pub fn d_fd_sampled(s: &SampledForm) -> SampledForm {
    let dim = s.grid.dim();
    let src = multi_indices(dim, s.degree);
    let values = (0..s.grid.len())
        .into_par_iter()
        .map(|k| {
            let idx = s.grid.index(k);
            let mut out = FormValue::zero(dim, s.degree + 1);
            for (c, mi) in src.iter().enumerate() {
                for axis in 0..dim {
                    if mi.contains(&axis) {
                        continue;
                    }
                    let mut term = vec![axis];
                    term.extend_from_slice(mi);
                    out.add_term(&term, fd_partial(s, &idx, axis, c));
                }
            }
            out
        })
        .collect();
    SampledForm { grid: s.grid.clone(), degree: s.degree + 1, values }
}

/// Samples `a` on `grid` and differentiates by central differences, wrapping
/// periodic axes and using one-sided second-order stencils at closed ends.
pub fn d_fd(a: &FormField, grid: &Grid) -> Result<SampledForm> {
    Ok(d_fd_sampled(&sample(a, grid)?))
}

/// Central-difference exterior derivative at a single point with step `h[axis]`.
/// Needs `a` defined on the whole stencil `p ± h e_axis`.
pub fn d_fd_at(a: &FormField, p: &[f64], h: &[f64]) -> Result<FormValue> {
    let dim = a.dim;
    if p.len() != dim || h.len() != dim {
        return Err(Error::ChartMismatch(format!("stencil of size {} for a {dim}-chart", p.len())));
    }
    let mut partials = Vec::with_capacity(dim);
    for axis in 0..dim {
        let mut q = p.to_vec();
        q[axis] = p[axis] + h[axis];
        let hi = a.at(&q)?;
        q[axis] = p[axis] - h[axis];
        let lo = a.at(&q)?;
        partials.push((hi, lo));
    }
    let mut out = FormValue::zero(dim, a.degree + 1);
    for (c, mi) in multi_indices(dim, a.degree).iter().enumerate() {
        for (axis, (hi, lo)) in partials.iter().enumerate() {
            if mi.contains(&axis) {
                continue;
            }
            let mut term = vec![axis];
            term.extend_from_slice(mi);
            out.add_term(&term, (hi.coeffs[c] - lo.coeffs[c]) / (2.0 * h[axis]));
        }
    }
    Ok(out)
}

/// Largest gap between `d_fd_at` and `reference` over `probes`.
pub fn probe_residual(a: &FormField, reference: &FormField, probes: &[Vec<f64>], h: &[f64]) -> Result<f64> {
    let r = probes
        .par_iter()
        .map(|p| Ok(d_fd_at(a, p, h)?.max_abs_diff(&reference.at(p)?)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(r.into_iter().fold(0.0, f64::max))
}

impl SampledForm {
    /// Largest coefficient gap to `reference` over the grid.
    pub fn max_residual(&self, reference: &FormField) -> Result<f64> {
        let r = (0..self.grid.len())
            .into_par_iter()
            .map(|k| reference.at(&self.grid.point(k)).map(|v| v.max_abs_diff(&self.values[k])))
            .collect::<Result<Vec<_>>>()?;
        Ok(r.into_iter().fold(0.0, f64::max))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(FormValue::max_abs).fold(0.0, f64::max)
    }
}

/// Evaluates `f` at every grid point in parallel, keeping row-major order.
pub fn sweep<T, F>(grid: &Grid, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&[f64]) -> Result<T> + Send + Sync,
{
    (0..grid.len()).into_par_iter().map(|k| f(&grid.point(k))).collect()
}

/// Smallest and largest sample with the first row-major point attaining each.
#[derive(Clone, Debug, PartialEq)]
pub struct Extrema {
    pub min: f64,
    pub argmin: Vec<f64>,
    pub max: f64,
    pub argmax: Vec<f64>,
}

impl Extrema {
    pub fn of(grid: &Grid, values: &[f64]) -> Extrema {
        let (mut lo, mut hi) = (0, 0);
        for (k, v) in values.iter().enumerate() {
            if *v < values[lo] || values[lo].is_nan() {
                lo = k;
            }
            if *v > values[hi] || values[hi].is_nan() {
                hi = k;
            }
        }
        Extrema { min: values[lo], argmin: grid.point(lo), max: values[hi], argmax: grid.point(hi) }
    }
}

/// Inverse of a square matrix via nalgebra; `None` if singular.
pub fn invert(m: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = m.len();
    let mat = DMatrix::from_fn(n, n, |i, j| m[i][j]);
    let inv = mat.try_inverse()?;
    Some((0..n).map(|i| (0..n).map(|j| inv[(i, j)]).collect()).collect())
}

/// Euclidean norm of `a` in the basis induced by `coframe`, whose rows are the
/// chart components of orthonormal 1-forms.
pub fn pointwise_norm(a: &FormValue, coframe: &[Vec<f64>]) -> Result<f64> {
    if coframe.len() != a.dim {
        return Err(Error::FrameMismatch { expected: a.dim, got: coframe.len() });
    }
    let inv = invert(coframe).ok_or_else(|| Error::DegenerateGeometry("singular coframe".into()))?;
    // dx_i = Σ_a (C⁻¹)_{ia} e_a, so coefficients in the e-basis are a pullback by C⁻¹.
    let e = a.pullback(&inv)?;
    Ok(e.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt())
}

/// Matrix of a 2-form on a frame, plus its Pfaffian when the frame has 2 or 4 vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameRestriction {
    pub matrix: Vec<Vec<f64>>,
    pub pfaffian: Option<f64>,
}

pub fn restrict_to_frame(a: &FormValue, frame: &[Vec<f64>]) -> Result<FrameRestriction> {
    if a.degree != 2 {
        return Err(Error::FrameMismatch { expected: 2, got: a.degree });
    }
    if frame.is_empty() || frame.len() % 2 != 0 || frame.len() > a.dim {
        return Err(Error::FrameMismatch { expected: 2 * (frame.len() / 2).max(1), got: frame.len() });
    }
    if let Some(v) = frame.iter().find(|v| v.len() != a.dim) {
        return Err(Error::FrameMismatch { expected: a.dim, got: v.len() });
    }
    let n = frame.len();
    let mut matrix = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let w = a.evaluate(&[frame[i].clone(), frame[j].clone()])?;
            matrix[i][j] = w;
            matrix[j][i] = -w;
        }
    }
    let pfaffian = pfaffian(&matrix);
    Ok(FrameRestriction { matrix, pfaffian })
}

/// Least-squares slope of `log r` against `log h`.
/// `[1.234e-5, ...]`
pub fn sci_list(xs: &[f64]) -> String {
    let parts: Vec<String> = xs.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

pub fn fit_order(hs: &[f64], residuals: &[f64]) -> Option<f64> {
    if hs.len() < 2 || hs.len() != residuals.len() || residuals.iter().any(|&r| !(r > 0.0)) {
        return None;
    }
    let xs: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = residuals.iter().map(|r| r.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Some(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn sin_x_du() -> FormField {
        FormField::new(3, 1, |x| {
            let mut f = FormJet::zero(3, 1);
            f.add_term(&[1], x[0].sin());
            f
        })
        .unwrap()
    }

    #[test]
    fn analytic_d_of_sin_du() {
        let d = sin_x_du().d().unwrap().at(&[0.3, 0.1, 0.2]).unwrap();
        assert!((d.coeff(&[0, 1]) - 0.3f64.cos()).abs() < 1e-15);
        assert_eq!(d.coeff(&[0, 2]), 0.0);
    }

    #[test]
    fn fd_of_sin_du_is_second_order() {
        let a = sin_x_du();
        let da = a.d().unwrap();
        let mut g = Grid::new(vec![Axis::periodic(0.0, TAU, 8), Axis::periodic(0.0, 1.0, 4), Axis::periodic(0.0, 1.0, 4)]).unwrap();
        let (mut hs, mut rs) = (vec![], vec![]);
        for _ in 0..4 {
            hs.push(g.axes[0].h());
            rs.push(d_fd(&a, &g).unwrap().max_residual(&da).unwrap());
            g.axes[0] = g.axes[0].refined();
        }
        let order = fit_order(&hs, &rs).unwrap();
        assert!((order - 2.0).abs() < 0.1, "order {order}");
    }

    #[test]
    fn closed_end_stencils_are_second_order() {
        let a = FormField::scalar(3, |x| x[0].scale(1.3).exp() * x[1].cos()).unwrap();
        let da = a.d().unwrap();
        let mut g = Grid::new(vec![Axis::closed(0.0, 1.0, 6), Axis::closed(0.0, 1.0, 6), Axis::periodic(0.0, 1.0, 4)]).unwrap();
        let (mut hs, mut rs) = (vec![], vec![]);
        for _ in 0..4 {
            hs.push(g.axes[0].h());
            rs.push(d_fd(&a, &g).unwrap().max_residual(&da).unwrap());
            g = Grid { axes: vec![g.axes[0].refined(), g.axes[1].refined(), g.axes[2].clone()] };
        }
        let order = fit_order(&hs, &rs).unwrap();
        assert!((order - 2.0).abs() < 0.15, "order {order}");
    }

    #[test]
    fn coarse_grid_rejected() {
        assert!(matches!(Grid::new(vec![Axis::closed(0.0, 1.0, 3)]), Err(Error::GridTooCoarse { axis: 0, samples: 3 })));
    }

    #[test]
    fn d_needs_derivatives() {
        let f = FormField::without_derivatives(3, 0, |p| FormValue::scalar(3, p[0])).unwrap();
        assert_eq!(f.d().unwrap_err(), Error::MissingDerivative);
        let g = sin_x_du().d().unwrap().d().unwrap();
        assert_eq!(g.order(), 0);
        assert_eq!(g.d().unwrap_err(), Error::MissingDerivative);
    }

    #[test]
    fn constant_form_is_closed() {
        let w = FormField::dx(3, 1).unwrap().wedge(&FormField::dx(3, 2).unwrap()).unwrap();
        assert_eq!(w.d().unwrap().at(&[0.1, 0.2, 0.3]).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn nil_volume_has_unit_norm() {
        let ell = 3.0;
        let x = 1.1;
        let k = ell * x / TAU;
        // coframe dx, du, α = dv + k du
        let coframe = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, k, 1.0]];
        let mut vol = FormValue::zero(3, 3);
        vol.add_term(&[0, 1, 2], 1.0);
        assert!((pointwise_norm(&vol, &coframe).unwrap() - 1.0).abs() < 1e-15);
        assert!((pointwise_norm(&FormValue::dx(3, 0), &coframe).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(pointwise_norm(&FormValue::zero(3, 2), &coframe).unwrap(), 0.0);
    }

    #[test]
    fn frame_restrictions() {
        let mut w = FormValue::zero(3, 2);
        w.add_term(&[1, 2], 1.0);
        let r = restrict_to_frame(&w, &[vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]).unwrap();
        assert_eq!(r.matrix, vec![vec![0.0, 1.0], vec![-1.0, 0.0]]);
        assert_eq!(r.pfaffian, Some(1.0));

        let (a, b) = (2.5, 0.7);
        let mut w4 = FormValue::zero(4, 2);
        w4.add_term(&[0, 1], a);
        w4.add_term(&[2, 3], b);
        let e = |i: usize| (0..4).map(|j| if i == j { 1.0 } else { 0.0 }).collect::<Vec<_>>();
        let r = restrict_to_frame(&w4, &[e(0), e(1), e(2), e(3)]).unwrap();
        assert!((r.pfaffian.unwrap() - a * b).abs() < 1e-15);

        let mut dxdu = FormValue::zero(3, 2);
        dxdu.add_term(&[0, 1], 1.0);
        assert!(restrict_to_frame(&dxdu, &[vec![0.0, 0.0, 1.0]]).is_err());
    }

    #[test]
    fn reflections_pull_back_with_sign() {
        // x(1) = -x(2)
        let dx = FormField::dx(1, 0).unwrap();
        let p = dx.pull_affine(&[vec![-1.0]], &[0.0]).unwrap();
        assert_eq!(p.at(&[0.4]).unwrap().coeffs, vec![-1.0]);
        // ϱ(1) = 20 - ϱ(2)
        let p = dx.pull_affine(&[vec![-1.0]], &[20.0]).unwrap();
        assert_eq!(p.at(&[3.0]).unwrap().coeffs, vec![-1.0]);
        let id = sin_x_du().pull_affine(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]], &[0.0; 3]).unwrap();
        let q = [0.7, 0.2, 0.9];
        assert_eq!(id.at(&q).unwrap(), sin_x_du().at(&q).unwrap());
    }

    #[test]
    fn fit_order_exact_power() {
        let hs = [0.1, 0.05, 0.025];
        let rs: Vec<f64> = hs.iter().map(|h| 3.0 * h * h).collect();
        assert!((fit_order(&hs, &rs).unwrap() - 2.0).abs() < 1e-12);
        assert!(fit_order(&hs, &[1.0, 0.0, 1.0]).is_none());
    }
}
