//! The end form `ω_E = d(K(ϱ)α_N) + b ω̃_Σ + L(ϱ) dϱ∧dx` on `[1, ∞) × N`.
//!
//! Chart `(ϱ, x, u, v)`.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::profiles::{build_profile, KParams, Profile, ProfileParams};
use super::{lift_link_form, profile_scalar};
use crate::error::{Error, Result};
use crate::exterior::{self, Axis, Extrema, FormField, FormValue, Grid};
use crate::link_model::{GeometryConstants, LinkModel};
use crate::report::{CheckResult, Status};

pub const REF_CONSTANTS: &str = "\"a > (2A+bC)/(bm)\" and \"We take b>0 satisfying b < a/C\"";
pub const REF_END: &str =
    "\"On [3,8]×N, the first two terms might be negative, while the third term is already big enough\"; identity (*) d(K(ϱ)α_N)∧(dϱ∧dx) = 0";
pub const REF_TAIL: &str = "\"cylindrical symplectic form a dϱ∧dx + b ω̃_Σ\"";
pub const REF_END_CLOSED: &str = "\"consider the following 2-form\" ω_E = d(K(ρ)α_N) + b ω̃_Σ + L(ρ)dρ∧dx (closedness)";

/// The chosen `(a, b)` with their bounds; `b_bound = None` means the bound is vacuous (`+∞`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ChosenConstants {
    pub a: f64,
    pub b: f64,
    pub a_bound: f64,
    pub b_bound: Option<f64>,
}

impl ChosenConstants {
    pub fn b_bound_label(&self) -> String {
        match self.b_bound {
            Some(v) => format!("{v}"),
            None => "+∞".to_string(),
        }
    }
}

/// `𝐂` below this counts as zero.
pub const C_ZERO: f64 = 1e-12;

pub fn choose_constants(gc: &GeometryConstants) -> Result<ChosenConstants> {
    if !(gc.m_min > 0.0) {
        return Err(Error::DegenerateGeometry(format!("m = {} must be positive", gc.m_min)));
    }
    if !(gc.a_min > 0.0) || gc.a_min > gc.a_max {
        return Err(Error::DegenerateGeometry(format!("need 0 < a_min <= a_max, got {} and {}", gc.a_min, gc.a_max)));
    }
    let (b, b_bound) = if gc.c_max <= C_ZERO {
        (1.0, None)
    } else {
        let bound = gc.a_min / gc.c_max;
        (f64::min(1.0, 0.5 * bound), Some(bound))
    };
    let c = if gc.c_max <= C_ZERO { 0.0 } else { gc.c_max };
    let a_bound = (2.0 * gc.a_max + b * c) / (b * gc.m_min);
    Ok(ChosenConstants { a: 1.1 * a_bound, b, a_bound, b_bound })
}

pub fn check_constants(gc: &GeometryConstants, cc: &ChosenConstants) -> CheckResult {
    let ok = cc.a > cc.a_bound && cc.b_bound.map_or(true, |bb| cc.b < bb) && cc.b > 0.0;
    let status = match (ok, cc.b_bound) {
        (false, _) => Status::Fail,
        // 𝐂 = 0 leaves the b-bound with nothing to constrain
        (true, None) => Status::Vacuous,
        (true, Some(_)) => Status::Pass,
    };
    CheckResult::new("constants", REF_CONSTANTS, gc.grid.clone())
        .margin(cc.a - cc.a_bound)
        .status(status)
        .note(format!("a = {:.12} > {:.12}", cc.a, cc.a_bound))
        .note(format!("b = {} < {}", cc.b, cc.b_bound_label()))
        .note(format!("a_min = {:.12}, a_max = {:.12}, C = {:.3e}, m = {:.12}", gc.a_min, gc.a_max, gc.c_max, gc.m_min))
}

#[derive(Clone, Debug)]
pub struct EndForm {
    pub model: LinkModel,
    pub k: Profile,
    pub l: Profile,
    pub a: f64,
    pub b: f64,
    /// `d(K α_N)` alone, for identity (*).
    pub d_k_alpha: FormField,
    pub omega: FormField,
}

pub fn default_k() -> Result<Profile> {
    build_profile(&ProfileParams::K(KParams::default()))
}

pub fn assemble_end_form(model: &LinkModel, k: &Profile, l: &Profile, a: f64, b: f64) -> Result<EndForm> {
    let alpha = lift_link_form(&model.alpha, 4)?;
    let kf = profile_scalar(4, 0, k)?;
    let lf = profile_scalar(4, 0, l)?;
    let d_k_alpha = alpha.mul(&kf)?.d()?;
    let sigma = lift_link_form(&model.omega_sigma, 4)?;
    let drho_dx = FormField::dx(4, 0)?.wedge(&FormField::dx(4, 1)?)?;
    let omega = d_k_alpha.add(&sigma.scale(b))?.add(&drho_dx.mul(&lf)?)?;
    Ok(EndForm { model: model.clone(), k: k.clone(), l: l.clone(), a, b, d_k_alpha, omega })
}

/// `a dϱ∧dx + b du∧dv` on the 4-chart.
pub fn cylindrical_form(a: f64, b: f64) -> FormValue {
    let mut w = FormValue::zero(4, 2);
    w.add_term(&[0, 1], a);
    w.add_term(&[2, 3], b);
    w
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EndGridConfig {
    pub n_rho: usize,
    pub n_link: usize,
    pub n_tail: usize,
    /// Probe counts `(n_ϱ, n_x, n_fiber)` for the closedness stencils.
    pub fd_probes: (usize, usize, usize),
    /// Stencil step per refinement level, halving.
    pub fd_steps: Vec<f64>,
    pub delta: f64,
    pub identity_tol: f64,
    pub agreement_tol: f64,
    pub order_window: (f64, f64),
}

impl Default for EndGridConfig {
    fn default() -> Self {
        EndGridConfig {
            n_rho: 64,
            n_link: 16,
            n_tail: 16,
            fd_probes: (180, 4, 2),
            fd_steps: vec![0.02, 0.01, 0.005],
            delta: 1e-6,
            identity_tol: 1e-12,
            agreement_tol: 1e-10,
            order_window: (1.9, 2.3),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct IntervalMargin {
    pub interval: (f64, f64),
    pub min_ratio: f64,
    pub witness: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct EndVerdict {
    pub check: CheckResult,
    pub identity: f64,
    pub intervals: Vec<IntervalMargin>,
    /// `(ϱ, min over N of ω_E²/(2 vol))` per ϱ-slice.
    pub curve: Vec<(f64, f64)>,
    pub tail_residual: f64,
    pub fd: Vec<(f64, f64)>,
    pub order: Option<f64>,
}

fn end_grid(lo: f64, hi: f64, n_rho: usize, n: usize) -> Result<Grid> {
    Grid::new(vec![
        Axis::closed(lo, hi, n_rho),
        Axis::periodic(0.0, TAU, n),
        Axis::periodic(0.0, 1.0, n),
        Axis::periodic(0.0, 1.0, n),
    ])
}

/// `ω²/(2 vol)` with `vol = dϱ ∧ (coframe volume of N)`.
pub fn square_ratio(omega: &FormValue, model: &LinkModel, p: &[f64]) -> Result<f64> {
    let sq = omega.wedge(omega)?.top();
    Ok(sq / (2.0 * model.volume_at(&p[1..])?))
}

/// Probe points strictly inside `(lo, hi) × N`, midpoints of a uniform split.
pub fn fd_probes(counts: (usize, usize, usize), lo: f64, hi: f64) -> Vec<Vec<f64>> {
    let (nr, nx, nf) = counts;
    let mid = |i: usize, n: usize, a: f64, b: f64| a + (b - a) * (i as f64 + 0.5) / n as f64;
    let mut out = Vec::with_capacity(nr * nx * nf * nf);
    for i in 0..nr {
        for j in 0..nx {
            for k in 0..nf {
                for l in 0..nf {
                    out.push(vec![mid(i, nr, lo, hi), mid(j, nx, 0.0, TAU), mid(k, nf, 0.0, 1.0), mid(l, nf, 0.0, 1.0)]);
                }
            }
        }
    }
    out
}

/// Central-difference residual of `d ω` at the probes for each step; returns `(h, residual)`.
pub fn closedness_study(omega: &FormField, probes: &[Vec<f64>], steps: &[f64]) -> Result<Vec<(f64, f64)>> {
    let d = omega.d()?;
    steps
        .iter()
        .map(|&h| Ok((h, exterior::probe_residual(omega, &d, probes, &[h; 4])?)))
        .collect()
}

/// Checks identity (*), positivity of `ω_E²` on `[1, 8] × N`, the exact tail on
/// `[8, 10]`, and the order of the FD closedness residual.
pub fn verify_end_form(end: &EndForm, cfg: &EndGridConfig) -> Result<EndVerdict> {
    let grid = end_grid(1.0, 8.0, cfg.n_rho, cfg.n_link)?;
    let drho_dx = FormField::dx(4, 0)?.wedge(&FormField::dx(4, 1)?)?;
    let star = end.d_k_alpha.wedge(&drho_dx)?;
    let samples = exterior::sweep(&grid, |p| {
        let w = end.omega.at(p)?;
        Ok((star.at(p)?.top().abs(), square_ratio(&w, &end.model, p)?))
    })?;
    let identity = samples.iter().map(|s| s.0).fold(0.0, f64::max);
    let ratios: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let all = Extrema::of(&grid, &ratios);

    let per_slice = grid.len() / cfg.n_rho;
    let curve: Vec<(f64, f64)> = (0..cfg.n_rho)
        .map(|i| {
            let slice = &ratios[i * per_slice..(i + 1) * per_slice];
            (grid.axes[0].point(i), slice.iter().copied().fold(f64::INFINITY, f64::min))
        })
        .collect();
    let intervals = [(1.0, 2.0), (2.0, 3.0), (3.0, 8.0)]
        .iter()
        .map(|&(lo, hi)| {
            let mut best = (f64::INFINITY, vec![]);
            for (k, r) in ratios.iter().enumerate() {
                let p = grid.point(k);
                if p[0] >= lo - 1e-12 && p[0] <= hi + 1e-12 && *r < best.0 {
                    best = (*r, p);
                }
            }
            IntervalMargin { interval: (lo, hi), min_ratio: best.0, witness: best.1 }
        })
        .collect::<Vec<_>>();

    let tail = end_grid(8.0, 10.0, cfg.n_tail, cfg.n_link.min(8))?;
    let cyl = cylindrical_form(end.a, end.b);
    let tail_res = exterior::sweep(&tail, |p| Ok(end.omega.at(p)?.max_abs_diff(&cyl)))?;
    let tail_residual = tail_res.into_iter().fold(0.0, f64::max);

    let probes = fd_probes(cfg.fd_probes, 1.0, 10.0);
    let fd = closedness_study(&end.omega, &probes, &cfg.fd_steps)?;
    let (hs, rs): (Vec<f64>, Vec<f64>) = fd.iter().copied().unzip();
    let order = exterior::fit_order(&hs, &rs);
    let order_ok = order.is_some_and(|o| o >= cfg.order_window.0 && o <= cfg.order_window.1);

    let positive = all.min >= cfg.delta;
    let ok = identity <= cfg.identity_tol && positive && tail_residual == 0.0 && order_ok;
    let witness = if positive { None } else { Some(all.argmin.clone()) };
    let mut check = CheckResult::new("end-form", REF_END, format!("{} + tail {} + fd probes {} at h {:?}", grid.describe(), tail.describe(), probes.len(), cfg.fd_steps))
        .margin(all.min)
        .residual(identity)
        .witness(witness)
        .pass_if(ok)
        .note(format!("identity (*) max = {identity:.3e}"))
        .note(format!("tail [8,10] max coefficient gap = {tail_residual:.3e}"));
    for m in &intervals {
        check = check.note(format!("min omega^2/(2 vol) on [{}, {}] = {:.6e}", m.interval.0, m.interval.1, m.min_ratio));
    }
    check = check.note(match order {
        Some(o) => format!("FD closedness order {o:.4} (residuals {})", exterior::sci_list(&rs)),
        None => format!("FD closedness order unavailable (residuals {})", exterior::sci_list(&rs)),
    });
    Ok(EndVerdict { check, identity, intervals, curve, tail_residual, fd, order })
}

/// CSV with header `rho,min_omega_sq_ratio`.
pub fn curve_csv(curve: &[(f64, f64)]) -> String {
    let mut s = String::from("rho,min_omega_sq_ratio\n");
    for (r, m) in curve {
        s.push_str(&format!("{r},{m}\n"));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::link_model::{build_link_model, geometry_constants, n_grid};

    #[test]
    fn nil_constants() {
        let m = build_link_model(3, 3, 3).unwrap();
        let gc = geometry_constants(&m, &n_grid(8).unwrap()).unwrap();
        let cc = choose_constants(&gc).unwrap();
        assert_eq!(cc.b, 1.0);
        assert!(cc.b_bound.is_none());
        assert_eq!(cc.b_bound_label(), "+∞");
        assert!((cc.a - 1.1 * 3.0 / std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn zero_m_is_an_error() {
        let gc = GeometryConstants { a_min: 1.0, a_max: 1.0, c_max: 0.0, m_min: 0.0, grid: "-".into() };
        assert!(matches!(choose_constants(&gc), Err(Error::DegenerateGeometry(_))));
    }

    #[test]
    fn positive_c_bounds_b() {
        let gc = GeometryConstants { a_min: 1.0, a_max: 2.0, c_max: 4.0, m_min: 1.0, grid: "-".into() };
        let cc = choose_constants(&gc).unwrap();
        assert_eq!(cc.b, 0.125);
        assert_eq!(cc.b_bound, Some(0.25));
        assert!((cc.a - 1.1 * (4.0 + 0.5) / 0.125).abs() < 1e-12);
    }

    #[test]
    fn tail_and_plateau_values() {
        let m = build_link_model(3, 3, 3).unwrap();
        let k = default_k().unwrap();
        let l = build_profile(&ProfileParams::L { a: 1.05 }).unwrap();
        let e = assemble_end_form(&m, &k, &l, 1.05, 1.0).unwrap();
        let w = e.omega.at(&[9.0, 0.4, 0.2, 0.7]).unwrap();
        assert_eq!(w, cylindrical_form(1.05, 1.0));
        // at ϱ = 1.5: d(ϱα) + ω̃ = dϱ∧α + ϱ dα + du∧dv
        let p = [1.5, 0.4, 0.2, 0.7];
        let w = e.omega.at(&p).unwrap();
        let k3 = 3.0 / TAU;
        assert!((w.coeff(&[0, 2]) - 0.4 * k3).abs() < 1e-14);
        assert!((w.coeff(&[0, 3]) - 1.0).abs() < 1e-14);
        assert!((w.coeff(&[1, 2]) - 1.5 * k3).abs() < 1e-14);
        assert!((w.coeff(&[2, 3]) - 1.0).abs() < 1e-14);
        assert_eq!(w.coeff(&[0, 1]), 0.0);
    }
}
