//! The circular form `ω = d(K(θ)α_N) + ω̃_Σ + L(θ) dθ∧dx` on `S¹ × N`.
//!
//! Chart `(θ, x, u, v)`, fibration case `α_G = dx`.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::profiles::Profile;
use super::{end_form, lift_link_form, profile_scalar};
use crate::error::{Error, Result};
use crate::exterior::{self, Axis, Extrema, FormField, Grid};
use crate::link_model::{n_grid, LinkModel};
use crate::report::CheckResult;

pub const REF_LAMBDA: &str = "λ(θ): \"the ratio is taken as the that of 2n−1 forms on N\"";
pub const REF_CIRCULAR: &str =
    "\"ω = d(K(θ)α_N) + ω̃_Σ + L(θ)dθ∧α_G\" with \"L(θ) > λ(θ) for any θ ∈ S¹\"; \"looks like a co-symplectic form\"";

/// `K(θ) = 1 + sin(θ)/2`.
pub fn default_circular_k() -> Profile {
    Profile::custom("K(theta) = 1 + sin(theta)/2", (0.0, TAU), |t| {
        let (s, c) = t.sin_cos();
        [1.0 + 0.5 * s, 0.5 * c, -0.5 * s]
    })
}

/// `λ(θ) = −min_N [K′ α∧(K dα + ω̃_Σ)] / [dx∧ω̃_Σ]` at each `θ`.
pub fn lambda_profile(model: &LinkModel, k: &Profile, thetas: &[f64], link: &Grid) -> Result<Vec<f64>> {
    let alpha = &model.alpha;
    let da = alpha.d()?;
    let a_da = alpha.wedge(&da)?;
    let a_w = alpha.wedge(&model.omega_sigma)?;
    let dx_w = FormField::dx(3, 0)?.wedge(&model.omega_sigma)?;
    let parts = exterior::sweep(link, |p| {
        let den = dx_w.at(p)?.top();
        if den.abs() < 1e-14 {
            return Err(Error::DegenerateGeometry(format!("dx ∧ ω̃_Σ vanishes at {p:?}")));
        }
        Ok((a_da.at(p)?.top() / den, a_w.at(p)?.top() / den))
    })?;
    Ok(thetas
        .iter()
        .map(|&t| {
            let [kv, k1, _] = k.eval(t);
            let m = parts.iter().map(|(c, w)| k1 * (kv * c + w)).fold(f64::INFINITY, f64::min);
            -m
        })
        .collect())
}

/// Closed form `−𝐀 K′K`, exact when the contact ratio is constant and `𝐂 = 0`.
pub fn lambda_closed(model: &LinkModel, k: &Profile, theta: f64) -> f64 {
    let [kv, k1, _] = k.eval(theta);
    -model.closed_form_constants().a_max * k1 * kv
}

/// `L = λ + shift` built from the closed form of `λ`.
pub fn l_from_lambda(model: &LinkModel, k: &Profile, shift: f64) -> Profile {
    let a = model.closed_form_constants().a_max;
    let k = k.clone();
    Profile::custom(&format!("L = lambda + {shift}"), (0.0, TAU), move |t| {
        let [kv, k1, k2] = k.eval(t);
        [-a * k1 * kv + shift, -a * (k2 * kv + k1 * k1), 0.0]
    })
}

#[derive(Clone, Debug)]
pub struct CircularForm {
    pub model: LinkModel,
    pub k: Profile,
    pub l: Profile,
    pub omega: FormField,
}

pub fn assemble_circular_form(model: &LinkModel, k: &Profile, l: &Profile) -> Result<CircularForm> {
    let alpha = lift_link_form(&model.alpha, 4)?;
    let sigma = lift_link_form(&model.omega_sigma, 4)?;
    let kf = profile_scalar(4, 0, k)?;
    let lf = profile_scalar(4, 0, l)?;
    let dth_dx = FormField::dx(4, 0)?.wedge(&FormField::dx(4, 1)?)?;
    let omega = alpha.mul(&kf)?.d()?.add(&sigma)?.add(&dth_dx.mul(&lf)?)?;
    Ok(CircularForm { model: model.clone(), k: k.clone(), l: l.clone(), omega })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CircularConfig {
    pub n_theta: usize,
    pub n_link: usize,
    /// Probe counts `(n_θ, n_x, n_fiber)` for the closedness stencils.
    pub fd_probes: (usize, usize, usize),
    /// Stencil step per refinement level, halving.
    pub fd_steps: Vec<f64>,
    pub delta: f64,
    pub lambda_tol: f64,
    pub order_window: (f64, f64),
}

impl Default for CircularConfig {
    fn default() -> Self {
        CircularConfig {
            n_theta: 16,
            n_link: 16,
            fd_probes: (32, 8, 2),
            fd_steps: vec![0.04, 0.02, 0.01],
            delta: 1e-6,
            lambda_tol: 1e-8,
            order_window: (1.9, 2.3),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CircularVerdict {
    pub check: CheckResult,
    pub lambda: Vec<(f64, f64)>,
    pub lambda_closed_gap: f64,
    pub l_margin: f64,
    pub square_margin: f64,
    pub integral_l: f64,
    pub order: Option<f64>,
}

pub fn verify_circular(form: &CircularForm, cfg: &CircularConfig) -> Result<CircularVerdict> {
    let theta_axis = Axis::periodic(0.0, TAU, cfg.n_theta);
    let thetas: Vec<f64> = (0..cfg.n_theta).map(|i| theta_axis.point(i)).collect();
    let link = n_grid(cfg.n_link)?;
    let lambda = lambda_profile(&form.model, &form.k, &thetas, &link)?;
    let gap = thetas
        .iter()
        .zip(&lambda)
        .map(|(&t, &l)| (l - lambda_closed(&form.model, &form.k, t)).abs())
        .fold(0.0, f64::max);

    let l_minus: Vec<f64> = thetas.iter().zip(&lambda).map(|(&t, &l)| form.l.value(t) - l).collect();
    let (mut l_margin, mut l_witness) = (f64::INFINITY, 0.0);
    for (t, m) in thetas.iter().zip(&l_minus) {
        if *m < l_margin {
            l_margin = *m;
            l_witness = *t;
        }
    }
    let integral_l = thetas.iter().map(|&t| form.l.value(t)).sum::<f64>() * theta_axis.h();

    let grid = Grid::new(vec![theta_axis.clone(), link.axes[0].clone(), link.axes[1].clone(), link.axes[2].clone()])?;
    let ratios = exterior::sweep(&grid, |p| {
        let w = form.omega.at(p)?;
        Ok(w.wedge(&w)?.top() / (2.0 * form.model.volume_at(&p[1..])?))
    })?;
    let sq = Extrema::of(&grid, &ratios);

    // θ plays the role of ϱ in the probe layout
    let probes = end_form::fd_probes(cfg.fd_probes, 0.0, TAU);
    let fd = end_form::closedness_study(&form.omega, &probes, &cfg.fd_steps)?;
    let (hs, rs): (Vec<f64>, Vec<f64>) = fd.iter().copied().unzip();
    let order = if rs.iter().all(|&r| r < 1e-13) { None } else { exterior::fit_order(&hs, &rs) };
    // a residual at the rounding floor (K constant) has no order to measure
    let order_ok = match order {
        Some(o) => o >= cfg.order_window.0 && o <= cfg.order_window.1,
        None => rs.iter().all(|&r| r < 1e-13),
    };

    let l_ok = l_margin > 0.0;
    let sq_ok = sq.min >= cfg.delta;
    let ok = l_ok && sq_ok && order_ok;
    let witness = if !l_ok {
        Some(vec![l_witness])
    } else if !sq_ok {
        Some(sq.argmin.clone())
    } else {
        None
    };
    let check = CheckResult::new("circular-form", REF_CIRCULAR, grid.describe())
        .margin(l_margin.min(sq.min))
        .residual(rs.last().copied().unwrap_or(0.0))
        .witness(witness)
        .pass_if(ok)
        .note(format!("min (L - lambda) = {l_margin:.6e} at theta = {l_witness:.6}"))
        .note(format!("min omega^2/(2 vol) = {:.6e}", sq.min))
        .note(format!("max |lambda_grid - lambda_closed| = {gap:.3e}"))
        .note(format!("integral of L dtheta = {integral_l:.12}"))
        .note(format!(
            "FD closedness residuals {}{}",
            exterior::sci_list(&rs),
            order.map(|o| format!(", order {o:.4}")).unwrap_or_default()
        ));
    Ok(CircularVerdict {
        check,
        lambda: thetas.into_iter().zip(lambda).collect(),
        lambda_closed_gap: gap,
        l_margin,
        square_margin: sq.min,
        integral_l,
        order,
    })
}
