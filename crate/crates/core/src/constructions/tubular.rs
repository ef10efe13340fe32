//! Turbulization near the binding: `α_U = ψ dx + (1−ψ) dr` and the leafwise form
//! `ω_Ū = a ω_R + b ω̃_Σ` with `ω_R = dθ∧((1−ψ)dx − ψ dr)`.
//!
//! Chart `(r, θ, x, u, v)`.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::profiles::{build_profile, Profile, ProfileParams};
use super::{lift_link_form, profile_scalar};
use crate::error::Result;
use crate::exterior::{self, restrict_to_frame, Axis, Extrema, FormField, FormValue, Grid, Jet};
use crate::link_model::LinkModel;
use crate::report::CheckResult;

pub const REF_TUBULAR: &str =
    "\"α_U = ψ dx + (1−ψ)dr\" \"as the defining 1-form of the desired foliation\"; \"ω_Ū = a(dθ∧dx) + b(ω̃_Σ)\" \"is a leafwise symplectic form\"";

#[derive(Clone, Debug)]
pub struct Tubular {
    pub psi: Profile,
    pub a: f64,
    pub b: f64,
    pub alpha_u: FormField,
    pub omega_u: FormField,
}

pub fn default_psi() -> Result<Profile> {
    build_profile(&ProfileParams::PsiTurb)
}

pub fn assemble_tubular(model: &LinkModel, psi: &Profile, a: f64, b: f64) -> Result<Tubular> {
    let dim = 5;
    let ps = profile_scalar(dim, 0, psi)?;
    let one_minus = FormField::scalar(dim, |_| Jet::constant(1.0))?.sub(&ps)?;
    let (dr, dth, dx) = (FormField::dx(dim, 0)?, FormField::dx(dim, 1)?, FormField::dx(dim, 2)?);
    let alpha_u = dx.mul(&ps)?.add(&dr.mul(&one_minus)?)?;
    let omega_r = dth.wedge(&dx.mul(&one_minus)?.sub(&dr.mul(&ps)?)?)?;
    let sigma = lift_link_form(&model.omega_sigma, dim)?;
    let omega_u = omega_r.scale(a).add(&sigma.scale(b))?;
    Ok(Tubular { psi: psi.clone(), a, b, alpha_u, omega_u })
}

/// `{∂θ, (1−ψ)∂x − ψ∂r, ∂u, ∂v}` at radius `r`.
pub fn leaf_frame(psi: &Profile, r: f64) -> Vec<Vec<f64>> {
    let s = psi.value(r);
    vec![
        vec![0.0, 1.0, 0.0, 0.0, 0.0],
        vec![-s, 0.0, 1.0 - s, 0.0, 0.0],
        vec![0.0, 0.0, 0.0, 1.0, 0.0],
        vec![0.0, 0.0, 0.0, 0.0, 1.0],
    ]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TubularConfig {
    pub n_r: usize,
    pub r_min: f64,
    pub n_theta: usize,
    pub n_link: usize,
    pub delta: f64,
    pub identity_tol: f64,
    pub agreement_tol: f64,
}

impl Default for TubularConfig {
    fn default() -> Self {
        TubularConfig { n_r: 32, r_min: 1.0 / 32.0, n_theta: 8, n_link: 4, delta: 1e-6, identity_tol: 1e-12, agreement_tol: 1e-10 }
    }
}

#[derive(Clone, Debug)]
pub struct TubularVerdict {
    pub check: CheckResult,
    pub integrability: f64,
    pub leaf_closed: f64,
    pub min_pfaffian: f64,
    pub boundary_pfaffian_gap: f64,
    pub boundary_form_gap: f64,
}

pub fn verify_tubular(t: &Tubular, cfg: &TubularConfig) -> Result<TubularVerdict> {
    let grid = Grid::new(vec![
        Axis::closed(cfg.r_min, 1.0, cfg.n_r),
        Axis::periodic(0.0, TAU, cfg.n_theta),
        Axis::periodic(0.0, TAU, cfg.n_link),
        Axis::periodic(0.0, 1.0, cfg.n_link),
        Axis::periodic(0.0, 1.0, cfg.n_link),
    ])?;
    let ada = t.alpha_u.wedge(&t.alpha_u.d()?)?;
    let dwa = t.omega_u.d()?.wedge(&t.alpha_u)?;
    let vals = exterior::sweep(&grid, |p| {
        let w = t.omega_u.at(p)?;
        let pf = restrict_to_frame(&w, &leaf_frame(&t.psi, p[0]))?.pfaffian.unwrap_or(f64::NAN);
        Ok((ada.at(p)?.max_abs(), dwa.at(p)?.max_abs(), pf))
    })?;
    let integrability = vals.iter().map(|v| v.0).fold(0.0, f64::max);
    let leaf_closed = vals.iter().map(|v| v.1).fold(0.0, f64::max);
    let pf: Vec<f64> = vals.iter().map(|v| v.2).collect();
    let ex = Extrema::of(&grid, &pf);

    // boundary torus r = 1
    let mut expect = FormValue::zero(5, 2);
    expect.add_term(&[1, 2], t.a);
    expect.add_term(&[3, 4], t.b);
    let mut boundary_form_gap = 0.0f64;
    let mut boundary_pfaffian_gap = 0.0f64;
    for k in 0..grid.len() {
        let p = grid.point(k);
        if p[0] != 1.0 {
            continue;
        }
        let w = t.omega_u.at(&p)?;
        boundary_form_gap = boundary_form_gap.max(w.max_abs_diff(&expect));
        let pf = restrict_to_frame(&w, &leaf_frame(&t.psi, 1.0))?.pfaffian.unwrap_or(f64::NAN);
        boundary_pfaffian_gap = boundary_pfaffian_gap.max((pf - t.a * t.b).abs());
    }

    let ok = integrability <= cfg.identity_tol
        && leaf_closed <= cfg.identity_tol
        && ex.min >= cfg.delta
        && boundary_pfaffian_gap <= cfg.agreement_tol
        && boundary_form_gap <= cfg.agreement_tol;
    let check = CheckResult::new("tubular", REF_TUBULAR, grid.describe())
        .margin(ex.min)
        .residual(integrability.max(leaf_closed).max(boundary_pfaffian_gap))
        .witness(if ex.min >= cfg.delta { None } else { Some(ex.argmin.clone()) })
        .pass_if(ok)
        .note(format!("alpha_U ^ d alpha_U max = {integrability:.3e}"))
        .note(format!("d omega_U ^ alpha_U max = {leaf_closed:.3e}"))
        .note(format!("min leaf Pfaffian = {:.6e} (r in [{}, 1])", ex.min, cfg.r_min))
        .note(format!("boundary Pfaffian - ab = {boundary_pfaffian_gap:.3e}; boundary form gap = {boundary_form_gap:.3e}"));
    Ok(TubularVerdict { check, integrability, leaf_closed, min_pfaffian: ex.min, boundary_pfaffian_gap, boundary_form_gap })
}

/// Closed-form leaf Pfaffian `ab((1−ψ)² + ψ²)`.
pub fn leaf_pfaffian_closed(t: &Tubular, r: f64) -> f64 {
    let s = t.psi.value(r);
    t.a * t.b * ((1.0 - s) * (1.0 - s) + s * s)
}
