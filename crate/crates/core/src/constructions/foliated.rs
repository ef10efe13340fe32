//! The foliated cylinder on `(−2, 2) × S¹ × N`: `α′ = cos φ(τ) dθ − sin φ(τ) dτ`
//! with the leafwise forms `Ω_−`, `Ω_0`, `Ω_+`.
//!
//! Chart `(τ, θ, x, u, v)`; `α′` is extended to the `N` factor by pullback.

use std::f64::consts::{PI, TAU};

use super::profiles::{build_profile, Profile, ProfileParams};
use super::lift_link_form;
use crate::error::Result;
use crate::exterior::{self, restrict_to_frame, Axis, FormField, FormValue, Grid};
use crate::link_model::LinkModel;
use crate::report::CheckResult;

pub const REF_FOLIATED: &str =
    "\"α′ = cos φ(τ)dθ − sin φ(τ)dτ\"; \"the two restrictions coincide to each other\"; \"admits a leafwise symplectic foliation\"";

pub const M_MINUS: (f64, f64) = (-2.0, -1.0 / 3.0);
pub const M_ZERO: (f64, f64) = (-2.0 / 3.0, 2.0 / 3.0);
pub const M_PLUS: (f64, f64) = (1.0 / 3.0, 2.0);

#[derive(Clone, Debug)]
pub struct FoliatedCylinder {
    pub phi: Profile,
    pub alpha: FormField,
    /// `Ω_− = dτ∧β + ω̃_Σ`
    pub omega_minus: FormField,
    /// `Ω_0 = dθ∧β + ω̃_Σ`
    pub omega_zero: FormField,
    /// `Ω_+ = −dτ∧β + ω̃_Σ`
    pub omega_plus: FormField,
}

pub fn default_phi() -> Result<Profile> {
    build_profile(&ProfileParams::Phi { plateaus: [PI / 4.0, 3.0 * PI / 4.0] })
}

pub fn assemble_foliated_cylinder(model: &LinkModel, phi: &Profile) -> Result<FoliatedCylinder> {
    let dim = 5;
    let ph = phi.clone();
    let cos_phi = FormField::scalar(dim, move |x| x[0].compose(ph.eval(x[0].value)).cos())?;
    let ph = phi.clone();
    let sin_phi = FormField::scalar(dim, move |x| x[0].compose(ph.eval(x[0].value)).sin())?;
    let (dtau, dth, beta) = (FormField::dx(dim, 0)?, FormField::dx(dim, 1)?, FormField::dx(dim, 2)?);
    let alpha = dth.mul(&cos_phi)?.sub(&dtau.mul(&sin_phi)?)?;
    let sigma = lift_link_form(&model.omega_sigma, dim)?;
    Ok(FoliatedCylinder {
        phi: phi.clone(),
        alpha,
        omega_minus: dtau.wedge(&beta)?.add(&sigma)?,
        omega_zero: dth.wedge(&beta)?.add(&sigma)?,
        omega_plus: dtau.wedge(&beta)?.scale(-1.0).add(&sigma)?,
    })
}

/// `{V, ∂x, ∂u, ∂v}` with `V = cos φ ∂τ + sin φ ∂θ`.
pub fn leaf_frame(phi: &Profile, tau: f64) -> Vec<Vec<f64>> {
    let f = phi.value(tau);
    vec![
        vec![f.cos(), f.sin(), 0.0, 0.0, 0.0],
        vec![0.0, 0.0, 1.0, 0.0, 0.0],
        vec![0.0, 0.0, 0.0, 1.0, 0.0],
        vec![0.0, 0.0, 0.0, 0.0, 1.0],
    ]
}

fn restricted(w: &FormValue, phi: &Profile, tau: f64) -> Result<(Vec<Vec<f64>>, f64)> {
    let r = restrict_to_frame(w, &leaf_frame(phi, tau))?;
    Ok((r.matrix, r.pfaffian.unwrap_or(f64::NAN)))
}

#[derive(Clone, Debug)]
pub struct FoliatedVerdict {
    pub check: CheckResult,
    pub integrability: f64,
    pub overlap_gap: [f64; 2],
    pub overlap_witness: Option<f64>,
    pub min_pfaffian: [f64; 3],
}

fn tau_grid(lo: f64, hi: f64, n: usize) -> Result<Grid> {
    // open intervals: stay one step inside
    let h = (hi - lo) / (n + 1) as f64;
    Grid::new(vec![
        Axis::closed(lo + h, hi - h, n),
        Axis::periodic(0.0, TAU, 4),
        Axis::periodic(0.0, TAU, 4),
        Axis::periodic(0.0, 1.0, 4),
        Axis::periodic(0.0, 1.0, 4),
    ])
}

pub fn verify_foliated(f: &FoliatedCylinder, n: usize, delta: f64, tol: f64) -> Result<FoliatedVerdict> {
    let full = tau_grid(-2.0, 2.0, 4 * n)?;
    let ada = f.alpha.wedge(&f.alpha.d()?)?;
    let integrability = exterior::sweep(&full, |p| Ok(ada.at(p)?.max_abs()))?.into_iter().fold(0.0, f64::max);

    let mut overlap_gap = [0.0f64; 2];
    let mut overlap_witness = None;
    let mut worst_seen = 0.0f64;
    for (k, (range, a, b)) in [(( -2.0 / 3.0, -1.0 / 3.0), &f.omega_minus, &f.omega_zero), ((1.0 / 3.0, 2.0 / 3.0), &f.omega_zero, &f.omega_plus)]
        .into_iter()
        .enumerate()
    {
        for p in tau_grid(range.0, range.1, n)?.points() {
            let (ma, _) = restricted(&a.at(&p)?, &f.phi, p[0])?;
            let (mb, _) = restricted(&b.at(&p)?, &f.phi, p[0])?;
            let gap = ma.iter().flatten().zip(mb.iter().flatten()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            overlap_gap[k] = overlap_gap[k].max(gap);
            if gap > worst_seen {
                worst_seen = gap;
                overlap_witness = Some(p[0]);
            }
        }
    }

    let mut min_pf = [f64::INFINITY; 3];
    for (k, (range, w)) in [(M_MINUS, &f.omega_minus), (M_ZERO, &f.omega_zero), (M_PLUS, &f.omega_plus)].into_iter().enumerate() {
        for p in tau_grid(range.0, range.1, 2 * n)?.points() {
            let (_, pf) = restricted(&w.at(&p)?, &f.phi, p[0])?;
            min_pf[k] = min_pf[k].min(pf);
        }
    }

    let overlaps_ok = overlap_gap.iter().all(|g| *g <= tol);
    let ok = integrability <= 1e-12 && overlaps_ok && min_pf.iter().all(|m| *m >= delta);
    let check = CheckResult::new("foliated-cylinder", REF_FOLIATED, full.describe())
        .margin(min_pf.iter().copied().fold(f64::INFINITY, f64::min))
        .residual(overlap_gap[0].max(overlap_gap[1]).max(integrability))
        .witness(if overlaps_ok { None } else { overlap_witness.map(|t| vec![t]) })
        .pass_if(ok)
        .note(format!("alpha' ^ d alpha' max = {integrability:.3e}"))
        .note(format!("overlap gaps M-/M0 = {:.3e}, M0/M+ = {:.3e}", overlap_gap[0], overlap_gap[1]))
        .note(format!("min leaf Pfaffian on M-, M0, M+ = {:.6}, {:.6}, {:.6}", min_pf[0], min_pf[1], min_pf[2]));
    Ok(FoliatedVerdict { check, integrability, overlap_gap, overlap_witness, min_pfaffian: min_pf })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::link_model::build_link_model;

    #[test]
    fn overlap_at_minus_half() {
        let m = build_link_model(3, 3, 3).unwrap();
        let f = assemble_foliated_cylinder(&m, &default_phi().unwrap()).unwrap();
        let p = [-0.5, 0.1, 0.2, 0.3, 0.4];
        let v = &leaf_frame(&f.phi, -0.5)[0];
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((v[0] - h).abs() < 1e-15 && (v[1] - h).abs() < 1e-15);
        let (a, _) = restricted(&f.omega_minus.at(&p).unwrap(), &f.phi, -0.5).unwrap();
        let (b, _) = restricted(&f.omega_zero.at(&p).unwrap(), &f.phi, -0.5).unwrap();
        let gap = a.iter().flatten().zip(b.iter().flatten()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(gap < 1e-15);
    }

    #[test]
    fn pfaffian_at_zero() {
        let m = build_link_model(2, 3, 7).unwrap();
        let f = assemble_foliated_cylinder(&m, &default_phi().unwrap()).unwrap();
        let (_, pf) = restricted(&f.omega_zero.at(&[0.0, 0.0, 0.0, 0.0, 0.0]).unwrap(), &f.phi, 0.0).unwrap();
        assert!((pf - 1.0).abs() < 1e-15);
    }
}
