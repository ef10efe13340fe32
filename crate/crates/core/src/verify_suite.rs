//! The per-triple pipeline: classification, link model, end form, circular and
//! tubular pieces, b^ℓ and foliated cylinders, gluing. Produces a [`VerificationReport`].

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::constructions::bsymplectic::{self, GluingMode};
use crate::constructions::circular::{self, CircularConfig};
use crate::constructions::end_form::{self, EndGridConfig};
use crate::constructions::foliated;
use crate::constructions::gluing;
use crate::constructions::profiles::{build_profile, KParams, ProfileParams};
use crate::constructions::tubular::{self, TubularConfig};
use crate::error::{Error, Result};
use crate::exterior::{self, FormField, Grid};
use crate::link_model::{self, build_link_model, n_fd_grid, n_grid, LinkModel, ModelKind};
use crate::report::{CheckResult, Status, VerificationReport};
use crate::sl2z::{self, ConjugacyKind, Sl2Matrix};

pub const THREADS_ENV: &str = "FOLIATION_FORGE_THREADS";

pub const REF_CLASSIFY: &str = "\"T_{p,q,r} is a cusp singularity if 1/p+1/q+1/r<1\"; \"simple elliptic\" when = 1";
pub const REF_TRACE: &str = "\"tr A = 2 + pqr(1 − 1/p − 1/q − 1/r)\" on the monodromy A = F(r)F(q)F(p)";
pub const REF_CONJUGACY: &str = "\"A is conjugate to A^{-1}\" (hyperbolic) / \"conjugate to [[1,0],[ℓ,1]]\" (nil)";
pub const REF_INVARIANTS: &str = "\"μ = p+q+r−1\" and the Euler characteristic of the glued page";
pub const REF_NIL_CONSTANTS: &str = "nil model: \"a = A = ℓ/2π\", \"C = 0\", \"m = 1\"";
pub const REF_ALPHA_FD: &str = "\"α_N\" closedness of dα_N against finite differences";
pub const REF_PARITY: &str = "b^ℓ gluing \"for odd ℓ\" (double) / \"for any even ℓ\" (same-sign ends)";

/// Every check the suite knows, in report order.
pub const CHECK_NAMES: &[&str] = &[
    "classification",
    "trace-identity",
    "conjugacy",
    "invariants",
    "contact",
    "reeb-tangency",
    "dx-divisibility",
    "deck-invariance",
    "fiber-area",
    "alpha-fd-order",
    "nil-constants",
    "constants",
    "end-form",
    "circular-form",
    "tubular",
    "b-symplectic-l1",
    "b-symplectic-l2",
    "b-symplectic-l3",
    "parity-gate",
    "foliated-cylinder",
    "double-gluing",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SuiteConfig {
    pub triple: [i64; 3],
    /// Points per axis of the periodic `N` grid.
    pub n_link: usize,
    pub end: EndGridConfig,
    pub circular: CircularConfig,
    pub tubular: TubularConfig,
    pub k: KParams,
    /// `L = λ + shift` for the circular form.
    pub circular_l_shift: f64,
    pub tau_samples: usize,
    pub deck_samples: usize,
    pub seed: u64,
    pub identity_tol: f64,
    pub agreement_tol: f64,
    pub order_window: (f64, f64),
    pub order_fit_tol: f64,
    pub delta: f64,
    /// `None` runs everything.
    pub checks: Option<Vec<String>>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig::for_triple([2, 3, 7])
    }
}

impl SuiteConfig {
    pub fn for_triple(triple: [i64; 3]) -> SuiteConfig {
        SuiteConfig {
            triple,
            n_link: 16,
            end: EndGridConfig::default(),
            circular: CircularConfig::default(),
            tubular: TubularConfig::default(),
            k: KParams::default(),
            circular_l_shift: 1.0,
            tau_samples: 16,
            deck_samples: 256,
            seed: 0x5eed,
            identity_tol: 1e-12,
            agreement_tol: 1e-10,
            order_window: (1.9, 2.3),
            order_fit_tol: 0.05,
            delta: 1e-6,
            checks: None,
        }
    }

    /// Sets every link-grid size to `n`.
    pub fn with_grid(mut self, n: usize) -> SuiteConfig {
        self.n_link = n;
        self.end.n_link = n;
        self.circular.n_link = n;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let sizes = [
            ("n_link", self.n_link),
            ("end.n_rho", self.end.n_rho),
            ("end.n_link", self.end.n_link),
            ("end.n_tail", self.end.n_tail),
            ("circular.n_theta", self.circular.n_theta),
            ("circular.n_link", self.circular.n_link),
            ("tubular.n_r", self.tubular.n_r),
            ("tubular.n_theta", self.tubular.n_theta),
            ("tubular.n_link", self.tubular.n_link),
            ("tau_samples", self.tau_samples),
        ];
        if let Some((name, n)) = sizes.iter().find(|(_, n)| *n < 4) {
            return Err(Error::Config(format!("{name} = {n}: grids need at least 4 points per axis")));
        }
        let tols = [
            self.identity_tol,
            self.agreement_tol,
            self.order_fit_tol,
            self.delta,
            self.end.identity_tol,
            self.end.agreement_tol,
            self.end.delta,
            self.circular.lambda_tol,
            self.circular.delta,
            self.tubular.delta,
        ];
        if tols.iter().any(|t| !(*t > 0.0)) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if !(self.order_window.0 < self.order_window.1) {
            return Err(Error::Config(format!("empty order window {:?}", self.order_window)));
        }
        if let Some(list) = &self.checks {
            if let Some(bad) = list.iter().find(|c| !CHECK_NAMES.contains(&c.as_str())) {
                return Err(Error::Config(format!("unknown check '{bad}'; known: {}", CHECK_NAMES.join(", "))));
            }
        }
        Ok(())
    }

    pub fn enabled(&self, name: &str) -> bool {
        self.checks.as_ref().map_or(true, |l| l.iter().any(|c| c == name))
    }

    /// SHA-256 of the canonical JSON encoding, as lowercase hex.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&json).iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Side outputs used by the CLI's `--csv`.
#[derive(Clone, Debug, Default)]
pub struct Artifacts {
    /// `(ϱ, min over N of ω_E²/(2 vol))`.
    pub end_curve: Option<Vec<(f64, f64)>>,
}

/// Runs `f` on a pool sized by `FOLIATION_FORGE_THREADS` (unset or 0 means rayon's default).
pub fn with_thread_pool<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T> {
    let n = match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse::<usize>()
            .map_err(|_| Error::Config(format!("{THREADS_ENV}='{v}' is not a non-negative integer")))?,
        _ => 0,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

pub fn run_suite(config: &SuiteConfig) -> Result<VerificationReport> {
    run_suite_with_artifacts(config).map(|(r, _)| r)
}

pub fn run_suite_with_artifacts(config: &SuiteConfig) -> Result<(VerificationReport, Artifacts)> {
    config.validate()?;
    let hash = config.hash();
    let [p, q, r] = config.triple;
    let model = match build_link_model(p, q, r) {
        Ok(m) => m,
        Err(e) => {
            let check = CheckResult::from_error("classification", REF_CLASSIFY, "none", &e);
            return Ok((VerificationReport::new(config.triple, hash, vec![check]), Artifacts::default()));
        }
    };
    let names: Vec<&str> = CHECK_NAMES.iter().copied().filter(|n| config.enabled(n)).collect();
    let results: Vec<(CheckResult, Option<Vec<(f64, f64)>>)> = with_thread_pool(|| {
        names
            .par_iter()
            .map(|name| match run_check(name, config, &model) {
                Ok(v) => v,
                Err(e) => (CheckResult::from_error(name, reference_for(name), "n/a", &e), None),
            })
            .collect()
    })?;
    let mut artifacts = Artifacts::default();
    let mut checks = Vec::with_capacity(results.len());
    for (c, curve) in results {
        if curve.is_some() {
            artifacts.end_curve = curve;
        }
        checks.push(c);
    }
    Ok((VerificationReport::new(config.triple, hash, checks), artifacts))
}

fn reference_for(name: &str) -> &'static str {
    match name {
        "classification" => REF_CLASSIFY,
        "trace-identity" => REF_TRACE,
        "conjugacy" => REF_CONJUGACY,
        "invariants" => REF_INVARIANTS,
        "contact" => link_model::REF_CONTACT,
        "reeb-tangency" => link_model::REF_REEB,
        "dx-divisibility" => link_model::REF_DIVISIBLE,
        "deck-invariance" => link_model::REF_DECK,
        "fiber-area" => link_model::REF_FIBER,
        "alpha-fd-order" => REF_ALPHA_FD,
        "nil-constants" => REF_NIL_CONSTANTS,
        "constants" => end_form::REF_CONSTANTS,
        "end-form" => end_form::REF_END,
        "circular-form" => circular::REF_CIRCULAR,
        "tubular" => tubular::REF_TUBULAR,
        "parity-gate" => REF_PARITY,
        "foliated-cylinder" => foliated::REF_FOLIATED,
        "double-gluing" => gluing::REF_GLUING,
        _ => bsymplectic::REF_BSYMP,
    }
}

fn nil_ell(model: &LinkModel) -> Option<u32> {
    match model.kind {
        ModelKind::Nil { ell } => Some(ell),
        ModelKind::Solv { .. } => None,
    }
}

fn run_check(name: &str, cfg: &SuiteConfig, model: &LinkModel) -> Result<(CheckResult, Option<Vec<(f64, f64)>>)> {
    let [p, q, r] = cfg.triple;
    let link = || n_grid(cfg.n_link);
    let check = match name {
        "classification" => {
            let class = sl2z::classify_singularity(p, q, r)?;
            let m = sl2z::monodromy_matrix(p, q, r)?;
            CheckResult::new(name, REF_CLASSIFY, "exact")
                .pass_if(true)
                .note(format!("{:?}; reciprocal sum {}", class.kind, class.reciprocal_sum))
                .note(format!("monodromy {:?}, conjugacy type {:?}", m.rows(), m.conjugacy_type()))
        }
        "trace-identity" => {
            let t = sl2z::trace_identity_check(p, q, r)?;
            CheckResult::new(name, REF_TRACE, "exact")
                .pass_if(t.equal)
                .note(format!("trace {} vs formula {}", t.trace_computed, t.trace_formula))
        }
        "conjugacy" => conjugacy_check(cfg.triple, model)?,
        "invariants" => {
            let inv = sl2z::topological_invariants(p, q, r)?;
            let ok = inv.mu == p + q + r - 1 && inv.chi_glued == 2 * inv.chi_fiber;
            CheckResult::new(name, REF_INVARIANTS, "exact").pass_if(ok).note(format!(
                "mu = {}, chi_fiber = {}, chi_glued = {}, euler = {:?}",
                inv.mu, inv.chi_fiber, inv.chi_glued, inv.euler_number_if_nil
            ))
        }
        "contact" => link_model::check_contact(model, &link()?, cfg.delta)?,
        "reeb-tangency" => link_model::check_reeb_tangent_to_fibers(model, &link()?, cfg.agreement_tol)?,
        "dx-divisibility" => link_model::check_dx_divisibility(model, &link()?, cfg.identity_tol)?,
        "deck-invariance" => link_model::check_deck_invariance(model, cfg.deck_samples, cfg.seed, cfg.agreement_tol)?,
        "fiber-area" => link_model::check_fiber_area(model, cfg.n_link, cfg.agreement_tol)?,
        "alpha-fd-order" => {
            let levels = [cfg.n_link, 2 * cfg.n_link, 4 * cfg.n_link];
            let grids = levels.iter().map(|&n| n_fd_grid(n, 4)).collect::<Result<Vec<_>>>()?;
            let row = fd_order_row("d alpha_N", &model.alpha, &model.alpha.d()?, &grids, cfg.order_window)?;
            row.to_check(name, REF_ALPHA_FD)
        }
        "nil-constants" => match nil_ell(model) {
            None => CheckResult::new(name, REF_NIL_CONSTANTS, "n/a")
                .status(Status::Skipped)
                .note("closed-form constants exist only for nil models"),
            Some(ell) => {
                let g = link()?;
                let gc = link_model::geometry_constants(model, &g)?;
                let k = link_model::nil_ratio(ell);
                let gap_a = (gc.a_min - k).abs().max((gc.a_max - k).abs());
                let gap_m = (gc.m_min - 1.0).abs();
                let ok = gap_a <= 1e-8 && gc.c_max.abs() <= 1e-12 && gap_m <= 1e-8;
                CheckResult::new(name, REF_NIL_CONSTANTS, g.describe())
                    .residual(gap_a.max(gap_m).max(gc.c_max.abs()))
                    .pass_if(ok)
                    .note(format!("a in [{:.12}, {:.12}] vs l/2pi = {k:.12}", gc.a_min, gc.a_max))
                    .note(format!("C = {:.3e}, m = {:.12}", gc.c_max, gc.m_min))
            }
        },
        "constants" => {
            let gc = link_model::geometry_constants(model, &link()?)?;
            end_form::check_constants(&gc, &end_form::choose_constants(&gc)?)
        }
        "end-form" => {
            let end = build_end(cfg, model)?;
            let v = end_form::verify_end_form(&end, &cfg.end)?;
            return Ok((v.check, Some(v.curve)));
        }
        "circular-form" => {
            let k = circular::default_circular_k();
            let l = circular::l_from_lambda(model, &k, cfg.circular_l_shift);
            let form = circular::assemble_circular_form(model, &k, &l)?;
            let v = circular::verify_circular(&form, &cfg.circular)?;
            let gap_ok = v.lambda_closed_gap <= cfg.circular.lambda_tol;
            let mut c = v.check;
            if !gap_ok {
                c = c.status(Status::Fail).note("grid lambda disagrees with the closed form");
            }
            c
        }
        "tubular" => {
            let gc = link_model::geometry_constants(model, &link()?)?;
            let cc = end_form::choose_constants(&gc)?;
            let t = tubular::assemble_tubular(model, &tubular::default_psi()?, cc.a, cc.b)?;
            tubular::verify_tubular(&t, &cfg.tubular)?.check
        }
        "b-symplectic-l1" | "b-symplectic-l2" | "b-symplectic-l3" => {
            let ell: u32 = name[name.len() - 1..].parse().expect("digit suffix");
            let mode = if ell % 2 == 1 { GluingMode::Double } else { GluingMode::BaseReversed };
            let b = bsymplectic::assemble_bsymplectic(model, ell, mode)?;
            bsymplectic::verify_bsymplectic(&b, cfg.tau_samples, cfg.order_fit_tol, cfg.agreement_tol)?.check
        }
        "parity-gate" => {
            let mut rejected = true;
            let mut notes = vec![];
            for ell in 0..=3u32 {
                for mode in [GluingMode::Double, GluingMode::BaseReversed] {
                    let expect_ok = (mode == GluingMode::Double) == (ell % 2 == 1);
                    let got = bsymplectic::assemble_bsymplectic(model, ell, mode);
                    let fine = match (&got, expect_ok) {
                        (Ok(_), true) => true,
                        (Err(Error::Parity(_)), false) => true,
                        _ => false,
                    };
                    rejected &= fine;
                    notes.push(format!("l = {ell}, {mode:?}: {}", if got.is_ok() { "accepted" } else { "rejected" }));
                }
            }
            CheckResult::new(name, REF_PARITY, "l in 0..=3").pass_if(rejected).note(notes.join("; "))
        }
        "foliated-cylinder" => {
            let f = foliated::assemble_foliated_cylinder(model, &foliated::default_phi()?)?;
            foliated::verify_foliated(&f, cfg.tau_samples, cfg.delta, cfg.agreement_tol)?.check
        }
        "double-gluing" => {
            let gc = link_model::geometry_constants(model, &link()?)?;
            let cc = end_form::choose_constants(&gc)?;
            gluing::verify_double_gluing(cfg.triple, cc.a, cc.b, 4, cfg.identity_tol)?.check
        }
        other => return Err(Error::Config(format!("unknown check '{other}'"))),
    };
    Ok((check, None))
}

fn conjugacy_check(triple: [i64; 3], model: &LinkModel) -> Result<CheckResult> {
    let [p, q, r] = triple;
    let a = sl2z::monodromy_matrix(p, q, r)?;
    let c = CheckResult::new("conjugacy", REF_CONJUGACY, "exact");
    Ok(match (a.conjugacy_type().kind, nil_ell(model)) {
        (ConjugacyKind::Hyperbolic, _) => {
            let word = sl2z::rl_word(&a)?;
            let gate = sl2z::conjugate_to_inverse(&a)?;
            let witness = sl2z::brute_force_conjugator(&a, &a.inverse()?, gluing::CONJUGATOR_BOUND);
            // both deciders must agree
            let agree = gate == witness.is_some();
            c.pass_if(agree)
                .note(format!("RL word {word}"))
                .note(format!("conjugate to inverse: {gate}; brute-force conjugator {:?}", witness.map(|m| m.rows())))
        }
        (ConjugacyKind::Unipotent, Some(ell)) => {
            let target = Sl2Matrix::new(1, 0, ell as i64, 1)?;
            let ok = sl2z::are_conjugate(&a, &target)?;
            c.pass_if(ok)
                .note(format!("conjugate to [[1,0],[{ell},1]]: {ok}; unipotent parameter {}", sl2z::unipotent_parameter(&a)?))
                .note(format!("conjugate to inverse: {}", sl2z::conjugate_to_inverse(&a)?))
        }
        (kind, _) => c.pass_if(false).note(format!("unexpected conjugacy type {kind:?}")),
    })
}

pub fn build_end(cfg: &SuiteConfig, model: &LinkModel) -> Result<end_form::EndForm> {
    let gc = link_model::geometry_constants(model, &n_grid(cfg.n_link)?)?;
    let cc = end_form::choose_constants(&gc)?;
    let k = build_profile(&ProfileParams::K(cfg.k.clone()))?;
    let l = build_profile(&ProfileParams::L { a: cc.a })?;
    end_form::assemble_end_form(model, &k, &l, cc.a, cc.b)
}

/// One row of a convergence table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ConvergenceRow {
    pub label: String,
    /// `(h, residual)` per level, `h` halving.
    pub levels: Vec<(f64, f64)>,
    pub order: Option<f64>,
    pub monotone: bool,
    pub status: Status,
}

/// Residuals at the rounding floor make the order vacuous.
pub const FD_FLOOR: f64 = 1e-13;

impl ConvergenceRow {
    pub fn to_check(&self, name: &str, paper_ref: &str) -> CheckResult {
        let rs: Vec<f64> = self.levels.iter().map(|l| l.1).collect();
        CheckResult::new(name, paper_ref, format!("{} levels", self.levels.len()))
            .residual(rs.last().copied().unwrap_or(0.0))
            .status(self.status)
            .note(format!(
                "{}: residuals {}{}{}",
                self.label,
                exterior::sci_list(&rs),
                self.order.map(|o| format!(", order {o:.4}")).unwrap_or_default(),
                if self.monotone { "" } else { ", NOT monotone" }
            ))
    }
}

/// FD residual of `d field` against `reference` on each grid, with the fitted order.
pub fn fd_order_row(
    label: &str,
    field: &FormField,
    reference: &FormField,
    grids: &[Grid],
    window: (f64, f64),
) -> Result<ConvergenceRow> {
    let levels: Vec<(f64, f64)> = grids
        .iter()
        .map(|g| {
            let h = g.axes.iter().filter(|a| !a.periodic).map(|a| a.h()).fold(0.0, f64::max);
            let h = if h > 0.0 { h } else { g.axes[0].h() };
            Ok((h, exterior::d_fd(field, g)?.max_residual(reference)?))
        })
        .collect::<Result<_>>()?;
    Ok(order_row(label, levels, window))
}

/// Stencil-at-probe counterpart of [`fd_order_row`], one level per step.
pub fn probe_order_row(
    label: &str,
    field: &FormField,
    probes: &[Vec<f64>],
    steps: &[f64],
    window: (f64, f64),
) -> Result<ConvergenceRow> {
    let levels = end_form::closedness_study(field, probes, steps)?;
    Ok(order_row(label, levels, window))
}

fn order_row(label: &str, levels: Vec<(f64, f64)>, window: (f64, f64)) -> ConvergenceRow {
    let rs: Vec<f64> = levels.iter().map(|l| l.1).collect();
    if rs.iter().all(|r| *r < FD_FLOOR) {
        return ConvergenceRow { label: label.into(), levels, order: None, monotone: true, status: Status::Vacuous };
    }
    let monotone = rs.windows(2).all(|w| w[1] < w[0]);
    let hs: Vec<f64> = levels.iter().map(|l| l.0).collect();
    let order = exterior::fit_order(&hs, &rs);
    let in_window = order.is_some_and(|o| o >= window.0 && o <= window.1);
    let status = Status::from_bool(monotone && in_window);
    ConvergenceRow { label: label.into(), levels, order, monotone, status }
}

/// Halves `h` over `levels` refinements for every closed form the suite differentiates.
pub fn convergence_study(config: &SuiteConfig, levels: usize) -> Result<Vec<ConvergenceRow>> {
    if levels < 3 {
        return Err(Error::Config(format!("convergence needs at least 3 levels, got {levels}")));
    }
    config.validate()?;
    let [p, q, r] = config.triple;
    let model = build_link_model(p, q, r)?;
    let w = config.order_window;
    with_thread_pool(|| {
        let mut rows = vec![];
        let link_grids = (0..levels).map(|i| n_fd_grid(config.n_link << i, 4)).collect::<Result<Vec<_>>>()?;
        rows.push(fd_order_row("d alpha_N", &model.alpha, &model.alpha.d()?, &link_grids, w)?);
        rows.push(fd_order_row("d omega_sigma", &model.omega_sigma, &model.omega_sigma.d()?, &link_grids, w)?);

        let steps: Vec<f64> = (0..levels).map(|i| config.end.fd_steps[0] / (1u32 << i) as f64).collect();
        let end = build_end(config, &model)?;
        let probes = end_form::fd_probes(config.end.fd_probes, 1.0, 10.0);
        rows.push(probe_order_row("d omega_E", &end.omega, &probes, &steps, w)?);

        let k = circular::default_circular_k();
        let l = circular::l_from_lambda(&model, &k, config.circular_l_shift);
        let circ = circular::assemble_circular_form(&model, &k, &l)?;
        let steps: Vec<f64> = (0..levels).map(|i| config.circular.fd_steps[0] / (1u32 << i) as f64).collect();
        let probes = end_form::fd_probes(config.circular.fd_probes, 0.0, std::f64::consts::TAU);
        rows.push(probe_order_row("d omega_circ", &circ.omega, &probes, &steps, w)?);
        Ok(rows)
    })?
}

pub fn convergence_csv(rows: &[ConvergenceRow]) -> String {
    let mut s = String::from("form,h,residual,order,status\n");
    for row in rows {
        let order = row.order.map(|o| o.to_string()).unwrap_or_default();
        for (h, r) in &row.levels {
            s.push_str(&format!("{},{h},{r},{order},{}\n", row.label.replace(' ', "_"), row.status));
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exterior::{Form, Jet};

    #[test]
    fn config_validation() {
        let mut c = SuiteConfig::default();
        assert!(c.validate().is_ok());
        c.n_link = 3;
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        let mut c = SuiteConfig::default();
        c.checks = Some(vec!["nope".into()]);
        assert!(c.validate().is_err());
    }

    #[test]
    fn hash_tracks_config() {
        let a = SuiteConfig::default();
        let b = SuiteConfig::default().with_grid(8);
        assert_eq!(a.hash().len(), 64);
        assert_eq!(a.hash(), SuiteConfig::default().hash());
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn unsupported_triple_single_record() {
        let r = run_suite(&SuiteConfig::for_triple([2, 3, 5])).unwrap();
        assert_eq!(r.checks.len(), 1);
        assert_eq!(r.checks[0].name, "classification");
        assert_eq!(r.checks[0].status, Status::Fail);
    }

    #[test]
    fn broken_derivative_fails_order() {
        // sin(x) du with a jet whose gradient is off by 10%
        let f = FormField::new(3, 1, |x| {
            let mut s = x[0].sin();
            for g in s.grad.iter_mut() {
                *g *= 1.1;
            }
            let mut c = vec![Jet::constant(0.0); 3];
            c[1] = s;
            Form { dim: 3, degree: 1, coeffs: c }
        })
        .unwrap();
        let grids: Vec<Grid> = [8, 16, 32].iter().map(|&n| n_grid(n).unwrap()).collect();
        let row = fd_order_row("broken", &f, &f.d().unwrap(), &grids, (1.9, 2.3)).unwrap();
        assert_eq!(row.status, Status::Fail);
    }
}
