//! Coordinate models of the link as a torus bundle over the circle.
//!
//! The chart is `(x, u, v)` with `x ∈ [0, 2π)` the base coordinate and
//! `(u, v) ∈ [0, 1)²` the fiber. Orientation: `dx∧du∧dv` is positive.

use std::f64::consts::{PI, TAU};

use nalgebra::{Matrix4x3, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exterior::{self, Axis, Extrema, FormField, FormJet, FormValue, Grid, Jet};
use crate::report::{CheckResult, Status};
use crate::sl2z::{self, ConjugacyKind, SingularityKind, Sl2Matrix};

#[derive(Clone, Debug, PartialEq)]
pub enum ModelKind {
    Nil { ell: u32 },
    Solv { matrix: Sl2Matrix, mu: f64, lambda_hat: f64 },
}

/// Affine deck transformation `p ↦ J p + c` of the `(x, u, v)` chart.
#[derive(Clone, Debug, PartialEq)]
pub struct DeckMap {
    pub name: &'static str,
    pub jacobian: Vec<Vec<f64>>,
    pub offset: Vec<f64>,
}

impl DeckMap {
    pub fn apply(&self, p: &[f64]) -> Vec<f64> {
        (0..3).map(|i| self.offset[i] + (0..3).map(|j| self.jacobian[i][j] * p[j]).sum::<f64>()).collect()
    }
}

#[derive(Clone, Debug)]
pub struct LinkModel {
    pub triple: [i64; 3],
    pub kind: ModelKind,
    pub alpha: FormField,
    pub omega_sigma: FormField,
    pub coframe: [FormField; 3],
    pub deck: Vec<DeckMap>,
    /// Rows `s`, `t` of the eigen-coordinate change `(s, t) = E (u, v)` (solv only).
    pub eigen: Option<[[f64; 2]; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GeometryConstants {
    pub a_min: f64,
    pub a_max: f64,
    pub c_max: f64,
    pub m_min: f64,
    pub grid: String,
}

fn dx3() -> FormField {
    FormField::dx(3, 0).expect("3-chart")
}

fn fiber_area() -> FormField {
    let mut w = FormValue::zero(3, 2);
    w.add_term(&[1, 2], 1.0);
    FormField::constant(w).expect("3-chart")
}

fn one_form(f: impl Fn(&[Jet]) -> [Jet; 3] + Send + Sync + 'static) -> FormField {
    FormField::new(3, 1, move |x| {
        let c = f(x);
        FormJet { dim: 3, degree: 1, coeffs: c.to_vec() }
    })
    .expect("3-chart")
}

/// Nil contact form `dv + (ℓx/2π) du`.
pub fn nil_alpha(ell: u32) -> FormField {
    let k = ell as f64 / TAU;
    one_form(move |x| [Jet::ZERO, x[0].scale(k), Jet::constant(1.0)])
}

/// Left eigenvectors of a hyperbolic `A`, rows for `1/μ` then `μ`, scaled to determinant 1.
pub fn eigen_rows(m: &Sl2Matrix) -> Result<([[f64; 2]; 2], f64)> {
    let t = m.trace() as f64;
    if t <= 2.0 {
        return Err(Error::Domain(format!("eigen-coordinates need trace > 2, got {t}")));
    }
    let mu = (t + (t * t - 4.0).sqrt()) / 2.0;
    let (a, c) = (m.a() as f64, m.c() as f64);
    let s_row = [c, 1.0 / mu - a];
    let k = 1.0 / (c * (mu - 1.0 / mu));
    let t_row = [c * k, (mu - a) * k];
    Ok(([s_row, t_row], mu))
}

fn solv_pieces(e: [[f64; 2]; 2], lam: f64) -> (FormField, [FormField; 2]) {
    // e^{λx} ds and e^{-λx} dt in (x,u,v) components
    let es = one_form(move |x| {
        let g = x[0].scale(lam).exp();
        [Jet::ZERO, g.scale(e[0][0]), g.scale(e[0][1])]
    });
    let et = one_form(move |x| {
        let g = x[0].scale(-lam).exp();
        [Jet::ZERO, g.scale(e[1][0]), g.scale(e[1][1])]
    });
    let alpha = es.add(&et).expect("same chart");
    (alpha, [es, et])
}

pub fn build_link_model(p: i64, q: i64, r: i64) -> Result<LinkModel> {
    let class = sl2z::classify_singularity(p, q, r)?;
    let m = sl2z::monodromy_matrix(p, q, r)?;
    let triple = [p, q, r];
    match class.kind {
        SingularityKind::SimpleElliptic => {
            let inv = sl2z::topological_invariants(p, q, r)?;
            let ell = inv
                .euler_number_if_nil
                .ok_or(Error::UnsupportedSingularity { p, q, r })?
                .unsigned_abs() as u32;
            let alpha = nil_alpha(ell);
            let l = ell as f64;
            Ok(LinkModel {
                triple,
                kind: ModelKind::Nil { ell },
                coframe: [dx3(), FormField::dx(3, 1)?, alpha.clone()],
                alpha,
                omega_sigma: fiber_area(),
                deck: vec![
                    translation("T_u", [0.0, 1.0, 0.0]),
                    translation("T_v", [0.0, 0.0, 1.0]),
                    DeckMap {
                        name: "T_x",
                        jacobian: vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, -l, 1.0]],
                        offset: vec![TAU, 0.0, 0.0],
                    },
                ],
                eigen: None,
            })
        }
        SingularityKind::Cusp => {
            if m.conjugacy_type().kind != ConjugacyKind::Hyperbolic {
                return Err(Error::UnsupportedSingularity { p, q, r });
            }
            let (e, mu) = eigen_rows(&m)?;
            let lambda_hat = mu.ln() / TAU;
            let (alpha, [es, et]) = solv_pieces(e, lambda_hat);
            let [[a, b], [c, d]] = m.rows();
            Ok(LinkModel {
                triple,
                kind: ModelKind::Solv { matrix: m, mu, lambda_hat },
                coframe: [dx3(), es, et],
                alpha,
                omega_sigma: fiber_area(),
                deck: vec![
                    translation("T_u", [0.0, 1.0, 0.0]),
                    translation("T_v", [0.0, 0.0, 1.0]),
                    DeckMap {
                        name: "T_x",
                        jacobian: vec![
                            vec![1.0, 0.0, 0.0],
                            vec![0.0, a as f64, b as f64],
                            vec![0.0, c as f64, d as f64],
                        ],
                        offset: vec![TAU, 0.0, 0.0],
                    },
                ],
                eigen: Some(e),
            })
        }
        SingularityKind::Other => Err(Error::UnsupportedSingularity { p, q, r }),
    }
}

fn translation(name: &'static str, c: [f64; 3]) -> DeckMap {
    DeckMap {
        name,
        jacobian: vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]],
        offset: c.to_vec(),
    }
}

/// Periodic sampling of the fundamental domain with `n` points per axis.
pub fn n_grid(n: usize) -> Result<Grid> {
    Grid::new(vec![Axis::periodic(0.0, TAU, n), Axis::periodic(0.0, 1.0, n), Axis::periodic(0.0, 1.0, n)])
}

/// Grid for finite differences: closed in `x` (chart coefficients are not
/// periodic there), periodic in the fiber.
pub fn n_fd_grid(nx: usize, nf: usize) -> Result<Grid> {
    Grid::new(vec![Axis::closed(0.0, TAU, nx), Axis::periodic(0.0, 1.0, nf), Axis::periodic(0.0, 1.0, nf)])
}

impl LinkModel {
    pub fn is_nil(&self) -> bool {
        matches!(self.kind, ModelKind::Nil { .. })
    }

    /// The same model with a replacement contact form (coframe unchanged).
    pub fn with_alpha(&self, alpha: FormField) -> LinkModel {
        LinkModel { alpha, ..self.clone() }
    }

    /// Rows are the chart components of the orthonormal coframe at `p`.
    pub fn coframe_at(&self, p: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.coframe.iter().map(|e| e.at(p).map(|v| v.coeffs)).collect()
    }

    pub fn volume_at(&self, p: &[f64]) -> Result<f64> {
        Ok(exterior::determinant(&self.coframe_at(p)?))
    }

    /// Closed-form Reeb field in chart components.
    pub fn reeb_closed_form(&self, p: &[f64]) -> Option<[f64; 3]> {
        match &self.kind {
            ModelKind::Nil { .. } => Some([0.0, 0.0, 1.0]),
            ModelKind::Solv { lambda_hat, .. } => {
                let e = self.eigen?;
                // ∂s, ∂t are the columns of E⁻¹ (det E = 1)
                let ds = [e[1][1], -e[1][0]];
                let dt = [-e[0][1], e[0][0]];
                let (gs, gt) = (0.5 * (-lambda_hat * p[0]).exp(), 0.5 * (lambda_hat * p[0]).exp());
                Some([0.0, gs * ds[0] + gt * dt[0], gs * ds[1] + gt * dt[1]])
            }
        }
    }

    /// Closed-form constants in the declared coframe.
    pub fn closed_form_constants(&self) -> GeometryConstants {
        let a = match &self.kind {
            ModelKind::Nil { ell } => *ell as f64 / TAU,
            ModelKind::Solv { lambda_hat, .. } => 2.0 * lambda_hat,
        };
        GeometryConstants { a_min: a, a_max: a, c_max: 0.0, m_min: 1.0, grid: "closed form".into() }
    }
}

/// Solves `α(R) = 1`, `dα(R, ∂_j) = 0` in the least-squares sense.
pub fn reeb_field(alpha: &FormValue, dalpha: &FormValue, p: &[f64]) -> Result<[f64; 3]> {
    let mut m = Matrix4x3::zeros();
    let mut rhs = Vector4::zeros();
    for j in 0..3 {
        m[(0, j)] = alpha.coeffs[j];
    }
    rhs[0] = 1.0;
    for row in 0..3 {
        for j in 0..3 {
            // dα(∂_j, ∂_row)
            m[(row + 1, j)] = dalpha.coeff(&[j, row]);
        }
    }
    let svd = m.svd(true, true);
    if svd.singular_values.min() < 1e-12 * svd.singular_values.max() {
        return Err(Error::DegenerateContact(p.to_vec()));
    }
    let sol = svd.solve(&rhs, 0.0).map_err(|_| Error::DegenerateContact(p.to_vec()))?;
    let r = [sol[0], sol[1], sol[2]];
    let resid = (m * sol - rhs).amax();
    if !resid.is_finite() || resid > 1e-6 {
        return Err(Error::DegenerateContact(p.to_vec()));
    }
    Ok(r)
}

pub const REF_CONTACT: &str = "\"a part of symplectization of a contact structure\"";
pub const REF_REEB: &str = "\"Reeb vector field is tangent\" to the fibers of p_N (criterion-2)";
pub const REF_DIVISIBLE: &str = "\"d α_N is divisible by dx\"";
pub const REF_CONSTANTS: &str = "\"We prepare four positive constants\" a, A, C, m";
pub const REF_DECK: &str = "\"the monodromy φ_Σ preserves ω_Σ\" (deck invariance of α_N, ω̃_Σ, coframe)";
pub const REF_FIBER: &str = "closed 2-form ω̃_Σ on the fibers of p_N";

pub fn check_contact(model: &LinkModel, grid: &Grid, delta: f64) -> Result<CheckResult> {
    let ada = model.alpha.wedge(&model.alpha.d()?)?;
    let vals = exterior::sweep(grid, |p| Ok(ada.at(p)?.top() / model.volume_at(p)?))?;
    let ex = Extrema::of(grid, &vals);
    let ok = ex.min >= delta && ex.min.signum() == ex.max.signum();
    Ok(CheckResult::new("contact", REF_CONTACT, grid.describe())
        .margin(ex.min)
        .witness(Some(ex.argmin))
        .pass_if(ok)
        .note(format!("alpha^dalpha / vol in [{:.12}, {:.12}]", ex.min, ex.max))
        .note("orientation: dx^du^dv positive"))
}

/// Reeb tangency: the residual is the larger of `max |dx(R)|` and the gap to the closed form.
pub fn check_reeb_tangent_to_fibers(model: &LinkModel, grid: &Grid, tol: f64) -> Result<CheckResult> {
    let da = model.alpha.d()?;
    let vals = exterior::sweep(grid, |p| {
        let r = reeb_field(&model.alpha.at(p)?, &da.at(p)?, p)?;
        Ok((r[0].abs(), r))
    });
    let vals = match vals {
        Ok(v) => v,
        Err(e) => return Ok(CheckResult::from_error("reeb-tangency", REF_REEB, grid.describe(), &e)),
    };
    let tang: Vec<f64> = vals.iter().map(|v| v.0).collect();
    let ex = Extrema::of(grid, &tang);
    let mut gap = 0.0f64;
    for (k, (_, r)) in vals.iter().enumerate() {
        if let Some(c) = model.reeb_closed_form(&grid.point(k)) {
            gap = gap.max(relative_gap(r, &c));
        }
    }
    Ok(CheckResult::new("reeb-tangency", REF_REEB, grid.describe())
        .residual(ex.max)
        .witness(Some(ex.argmax))
        .pass_if(ex.max <= tol)
        .note(format!("max relative |R - R_closed| = {gap:.3e}")))
}

/// `max |r − c| / max(1, max |c|)`: solv Reeb fields grow like `e^{λ̂x}` in chart components.
fn relative_gap(r: &[f64; 3], c: &[f64; 3]) -> f64 {
    let scale = c.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    (0..3).map(|i| (r[i] - c[i]).abs()).fold(0.0, f64::max) / scale
}

/// Largest relative gap between the solved and closed-form Reeb fields.
pub fn reeb_closed_form_gap(model: &LinkModel, grid: &Grid) -> Result<f64> {
    let da = model.alpha.d()?;
    let gaps = exterior::sweep(grid, |p| {
        let r = reeb_field(&model.alpha.at(p)?, &da.at(p)?, p)?;
        let c = model.reeb_closed_form(p).unwrap_or(r);
        Ok(relative_gap(&r, &c))
    })?;
    Ok(gaps.into_iter().fold(0.0, f64::max))
}

pub fn check_dx_divisibility(model: &LinkModel, grid: &Grid, tol: f64) -> Result<CheckResult> {
    let w = dx3().wedge(&model.alpha.d()?)?;
    let vals = exterior::sweep(grid, |p| Ok(w.at(p)?.top().abs()))?;
    let ex = Extrema::of(grid, &vals);
    Ok(CheckResult::new("dx-divisibility", REF_DIVISIBLE, grid.describe())
        .residual(ex.max)
        .witness(Some(ex.argmax))
        .pass_if(ex.max <= tol))
}

pub fn geometry_constants(model: &LinkModel, grid: &Grid) -> Result<GeometryConstants> {
    let ada = model.alpha.wedge(&model.alpha.d()?)?;
    let aw = model.alpha.wedge(&model.omega_sigma)?;
    let dw = dx3().wedge(&model.omega_sigma)?;
    let vals = exterior::sweep(grid, |p| {
        let c = model.coframe_at(p)?;
        Ok([
            exterior::pointwise_norm(&ada.at(p)?, &c)?,
            exterior::pointwise_norm(&aw.at(p)?, &c)?,
            exterior::pointwise_norm(&dw.at(p)?, &c)?,
        ])
    })?;
    let col = |i: usize| vals.iter().map(|v| v[i]).collect::<Vec<_>>();
    let a = Extrema::of(grid, &col(0));
    let c = Extrema::of(grid, &col(1));
    let m = Extrema::of(grid, &col(2));
    Ok(GeometryConstants { a_min: a.min, a_max: a.max, c_max: c.max, m_min: m.min, grid: grid.describe() })
}

/// Deck invariance of `α`, `ω̃_Σ` and the coframe at `samples` seeded points.
pub fn check_deck_invariance(model: &LinkModel, samples: usize, seed: u64, tol: f64) -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fields: Vec<&FormField> = vec![&model.alpha, &model.omega_sigma];
    fields.extend(model.coframe.iter());
    let mut worst = 0.0f64;
    let mut witness = None;
    for _ in 0..samples {
        let p = [rng.gen_range(0.0..TAU), rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)];
        for deck in &model.deck {
            let q = deck.apply(&p);
            for f in &fields {
                let pulled = f.at(&q)?.pullback(&deck.jacobian)?;
                let r = pulled.max_abs_diff(&f.at(&p)?);
                if r > worst {
                    worst = r;
                    witness = Some(p.to_vec());
                }
            }
        }
    }
    Ok(CheckResult::new("deck-invariance", REF_DECK, format!("{samples} seeded points (seed {seed})"))
        .residual(worst)
        .witness(witness)
        .pass_if(worst <= tol))
}

/// `∫ ω̃_Σ` over the fiber `x = 0` by the midpoint rule, and `dω̃_Σ` by finite differences.
pub fn check_fiber_area(model: &LinkModel, n: usize, tol: f64) -> Result<CheckResult> {
    let h = 1.0 / n as f64;
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            let p = [0.0, (i as f64 + 0.5) * h, (j as f64 + 0.5) * h];
            total += model.omega_sigma.at(&p)?.coeff(&[1, 2]) * h * h;
        }
    }
    let g = n_fd_grid(n, n)?;
    let closed = exterior::d_fd(&model.omega_sigma, &g)?.max_abs();
    let area_err = (total - 1.0).abs();
    let status = if area_err > tol {
        Status::Fail
    } else if closed == 0.0 {
        // constant coefficients: FD residual sits at the floor, no order to fit
        Status::Vacuous
    } else {
        Status::from_bool(closed <= 1e-12)
    };
    Ok(CheckResult::new("fiber-area", REF_FIBER, g.describe())
        .residual(area_err)
        .status(status)
        .note(format!("fiber integral {total:.15}; max |d_fd omega_sigma| = {closed:.3e}")))
}

/// FD residual of `dα` against the analytic derivative at the given fiber resolution
/// and increasing `x` resolutions; returns `(h, residual)` pairs.
pub fn alpha_fd_study(model: &LinkModel, nx: &[usize], nf: usize) -> Result<Vec<(f64, f64)>> {
    let da = model.alpha.d()?;
    nx.iter()
        .map(|&n| {
            let g = n_fd_grid(n, nf)?;
            let r = exterior::d_fd(&model.alpha, &g)?.max_residual(&da)?;
            Ok((g.axes[0].h(), r))
        })
        .collect()
}

/// `ℓ/2π` for nil models: the contact ratio and the constants `a = A`.
pub fn nil_ratio(ell: u32) -> f64 {
    ell as f64 / (2.0 * PI)
}
