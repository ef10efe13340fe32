//! The b^ℓ-symplectic form `Ω_b = p(τ) dτ∧β + ω̃_Σ` on `(−2, 2) × N`, `β = dx`.
//!
//! Chart `(τ, x, u, v)`. Here `β` is the closed fibration form, not the contact form.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::profiles::{build_profile, Profile, ProfileParams};
use super::{lift_link_form, profile_scalar};
use crate::error::{Error, Result};
use crate::exterior::{self, invert, pfaffian, Axis, FormField, FormValue, Grid};
use crate::link_model::LinkModel;
use crate::report::CheckResult;

pub const REF_BSYMP: &str =
    "\"Ω_b = p(t)dt∧P_N*(α_N) + P_N*Ω_N\" with \"(i) p(τ)=1/t\"; b^ℓ parity \"for odd ℓ ∈ ℕ\" / \"For any even ℓ\"";

/// How the two ends are glued: the double (`τ ↦ −τ`) or a base-reversing
/// identification (`(τ, x) ↦ (−τ, −x)`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GluingMode {
    Double,
    BaseReversed,
}

#[derive(Clone, Debug)]
pub struct BSymplectic {
    pub ell: u32,
    pub mode: GluingMode,
    pub p: Profile,
    pub omega: FormField,
}

pub fn parity_gate(ell: u32, mode: GluingMode) -> Result<()> {
    match (mode, ell % 2) {
        (GluingMode::Double, 1) | (GluingMode::BaseReversed, 0) => Ok(()),
        (GluingMode::Double, _) => Err(Error::Parity(format!("the double needs odd l, got l = {ell}"))),
        (GluingMode::BaseReversed, _) => Err(Error::Parity(format!("same-sign ends need even l, got l = {ell}"))),
    }
}

pub fn assemble_bsymplectic(model: &LinkModel, ell: u32, mode: GluingMode) -> Result<BSymplectic> {
    parity_gate(ell, mode)?;
    let p = build_profile(&ProfileParams::PEll(ell))?;
    let pf = profile_scalar(4, 0, &p)?;
    let beta = FormField::dx(4, 1)?;
    let omega = FormField::dx(4, 0)?.wedge(&beta)?.mul(&pf)?.add(&lift_link_form(&model.omega_sigma, 4)?)?;
    Ok(BSymplectic { ell, mode, p, omega })
}

/// Pfaffian of the Poisson bivector `Ω_b⁻¹` at a point.
pub fn bivector_pfaffian(w: &FormValue) -> Result<f64> {
    let n = w.dim;
    let mut m = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            m[i][j] = w.coeff(&[i, j]);
        }
    }
    let inv = invert(&m).ok_or_else(|| Error::DegenerateGeometry("Ω_b is degenerate".into()))?;
    pfaffian(&inv).ok_or_else(|| Error::ChartMismatch(format!("Pfaffian of a {n}×{n} matrix")))
}

/// `(τ, |Pf Π|)` at `τ = 2^{−j}`, `j = 3..=10`, and the log-log slope.
pub fn degeneration_order(b: &BSymplectic) -> Result<(Vec<(f64, f64)>, f64)> {
    let pts: Vec<(f64, f64)> = (3..=10)
        .map(|j| {
            let tau = 2f64.powi(-j);
            Ok((tau, bivector_pfaffian(&b.omega.at(&[tau, 0.7, 0.3, 0.6])?)?.abs()))
        })
        .collect::<Result<_>>()?;
    let (hs, rs): (Vec<f64>, Vec<f64>) = pts.iter().copied().unzip();
    let slope = exterior::fit_order(&hs, &rs).ok_or_else(|| Error::DegenerateGeometry("Pf Π vanished".into()))?;
    Ok((pts, slope))
}

/// `dt∧dx + du∧dv`, the common collar form the ends must reproduce.
fn collar_form() -> Result<FormField> {
    let mut w = FormValue::zero(4, 2);
    w.add_term(&[0, 1], 1.0);
    w.add_term(&[2, 3], 1.0);
    FormField::constant(w)
}

/// Largest coefficient gap between `Ω_b` on the end collars and the pulled-back collar form.
pub fn ends_match(b: &BSymplectic, n: usize) -> Result<f64> {
    let collar = collar_form()?;
    let x_sign = match b.mode {
        GluingMode::Double => 1.0,
        GluingMode::BaseReversed => -1.0,
    };
    let left = collar.pull_affine(
        &[
            vec![-1.0, 0.0, 0.0, 0.0],
            vec![0.0, x_sign, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 0.0],
            vec![0.0, 0.0, 0.0, 1.0],
        ],
        &[0.0; 4],
    )?;
    let mut worst = 0.0f64;
    for (lo, hi, target) in [(-1.99, -1.51, &left), (1.51, 1.99, &collar)] {
        let g = Grid::new(vec![
            Axis::closed(lo, hi, n),
            Axis::periodic(0.0, TAU, n),
            Axis::periodic(0.0, 1.0, 4),
            Axis::periodic(0.0, 1.0, 4),
        ])?;
        for p in g.points() {
            worst = worst.max(b.omega.at(&p)?.max_abs_diff(&target.at(&p)?));
        }
    }
    Ok(worst)
}

#[derive(Clone, Debug)]
pub struct BVerdict {
    pub check: CheckResult,
    pub slope: f64,
    pub samples: Vec<(f64, f64)>,
    pub min_abs_p: f64,
    pub ends_gap: f64,
}

pub fn verify_bsymplectic(b: &BSymplectic, n: usize, slope_tol: f64, agreement_tol: f64) -> Result<BVerdict> {
    let (samples, slope) = degeneration_order(b)?;
    // Ω_b² = 2p dτ∧dx∧du∧dv away from τ = 0
    let g = Grid::new(vec![
        Axis::closed(-1.99, 1.99, 2 * n),
        Axis::periodic(0.0, TAU, 4),
        Axis::periodic(0.0, 1.0, 4),
        Axis::periodic(0.0, 1.0, 4),
    ])?;
    let sq = exterior::sweep(&g, |p| {
        let w = b.omega.at(p)?;
        Ok((w.wedge(&w)?.top() / 2.0).abs())
    })?;
    let min_abs_p = sq.into_iter().fold(f64::INFINITY, f64::min);
    let ends_gap = ends_match(b, n)?;
    let ok = (slope - b.ell as f64).abs() <= slope_tol && min_abs_p > 0.0 && ends_gap <= agreement_tol;
    let check = CheckResult::new(&format!("b-symplectic-l{}", b.ell), REF_BSYMP, g.describe())
        .margin(min_abs_p)
        .residual(ends_gap)
        .pass_if(ok)
        .note(format!("mode {:?}; degeneration order fit {slope:.6} (target {})", b.mode, b.ell))
        .note(format!("ends coefficient gap {ends_gap:.3e}"));
    Ok(BVerdict { check, slope, samples, min_abs_p, ends_gap })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::link_model::build_link_model;

    #[test]
    fn parity() {
        let m = build_link_model(2, 3, 7).unwrap();
        assert!(matches!(assemble_bsymplectic(&m, 2, GluingMode::Double), Err(Error::Parity(_))));
        assert!(matches!(assemble_bsymplectic(&m, 1, GluingMode::BaseReversed), Err(Error::Parity(_))));
        assert!(assemble_bsymplectic(&m, 0, GluingMode::BaseReversed).is_ok());
    }

    #[test]
    fn order_one_fit() {
        let m = build_link_model(2, 3, 7).unwrap();
        let b = assemble_bsymplectic(&m, 1, GluingMode::Double).unwrap();
        let (_, slope) = degeneration_order(&b).unwrap();
        assert!((slope - 1.0).abs() < 0.05);
    }

    #[test]
    fn constant_p_reproduces_sign_flip() {
        let m = build_link_model(4, 4, 4).unwrap();
        let b = assemble_bsymplectic(&m, 0, GluingMode::BaseReversed).unwrap();
        assert_eq!(ends_match(&b, 4).unwrap(), 0.0);
    }
}
