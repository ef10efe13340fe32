use std::sync::OnceLock;

use jsonschema::JSONSchema;

use foliation_forge::exterior::{Form, FormField, Jet};
use foliation_forge::link_model::n_grid;
use foliation_forge::report::{report_schema, CheckResult, Status, VerificationReport};
use foliation_forge::verify_suite::{convergence_csv, convergence_study, fd_order_row, run_suite, SuiteConfig, CHECK_NAMES};

fn full_237() -> &'static VerificationReport {
    static R: OnceLock<VerificationReport> = OnceLock::new();
    R.get_or_init(|| run_suite(&SuiteConfig::for_triple([2, 3, 7])).unwrap())
}

fn same_outcome(a: &CheckResult, b: &CheckResult) -> bool {
    a.name == b.name && a.status == b.status && a.witness_point == b.witness_point
}

fn assert_schema_valid(report: &VerificationReport) {
    let schema = report_schema();
    let compiled = JSONSchema::compile(&schema).expect("schema compiles");
    let value = serde_json::to_value(report).unwrap();
    if let Err(errors) = compiled.validate(&value) {
        let msgs: Vec<String> = errors.map(|e| format!("{e} at {}", e.instance_path)).collect();
        panic!("report does not validate: {msgs:?}");
    };
}

#[test]
fn cusp_237_passes_everything() {
    let r = full_237();
    for c in &r.checks {
        assert_ne!(c.status, Status::Fail, "{}: {:?}", c.name, c.notes);
    }
    assert_eq!(r.overall, Status::Pass);
    assert!(r.checks.len() >= 18);
    assert_eq!(r.checks.len(), CHECK_NAMES.len());
    assert_eq!(r.check("double-gluing").unwrap().status, Status::Pass);
    assert_eq!(r.check("nil-constants").unwrap().status, Status::Skipped);
}

#[test]
fn every_record_cites_its_source() {
    for c in &full_237().checks {
        assert!(!c.paper_ref.trim().is_empty(), "{}", c.name);
        assert!(!c.grid_used.is_empty(), "{}", c.name);
    }
}

#[test]
fn report_validates_against_schema() {
    let r = full_237();
    assert_schema_valid(r);
    assert_eq!(r.config_hash, SuiteConfig::for_triple([2, 3, 7]).hash());
    assert!(!r.tool_version.is_empty());
}

#[test]
fn rerun_is_witness_identical() {
    let a = full_237();
    let b = run_suite(&SuiteConfig::for_triple([2, 3, 7])).unwrap();
    assert_eq!(a.checks.len(), b.checks.len());
    for (x, y) in a.checks.iter().zip(&b.checks) {
        assert!(same_outcome(x, y), "{} differs between runs", x.name);
        assert_eq!(x.worst_margin, y.worst_margin, "{}", x.name);
        assert_eq!(x.worst_residual, y.worst_residual, "{}", x.name);
    }
    assert_eq!(a.overall, b.overall);
}

#[test]
fn single_checks_match_the_full_run() {
    let full = full_237();
    for name in CHECK_NAMES {
        let mut cfg = SuiteConfig::for_triple([2, 3, 7]);
        cfg.checks = Some(vec![name.to_string()]);
        let r = run_suite(&cfg).unwrap();
        assert_eq!(r.checks.len(), 1, "{name}");
        let alone = &r.checks[0];
        let within = full.check(name).unwrap();
        assert!(same_outcome(alone, within), "{name} changes when run alone");
        assert_eq!(alone.worst_margin, within.worst_margin, "{name}");
        assert_eq!(alone.worst_residual, within.worst_residual, "{name}");
    }
}

#[test]
fn nil_333_passes_with_gluing_skipped() {
    let r = run_suite(&SuiteConfig::for_triple([3, 3, 3])).unwrap();
    for c in &r.checks {
        assert_ne!(c.status, Status::Fail, "{}: {:?}", c.name, c.notes);
    }
    assert_eq!(r.overall, Status::Pass);
    let g = r.check("double-gluing").unwrap();
    assert_eq!(g.status, Status::Skipped);
    assert!(!g.notes.is_empty());
    assert_eq!(r.check("nil-constants").unwrap().status, Status::Pass);
    assert_schema_valid(&r);
}

#[test]
fn unsupported_triple_is_one_failed_record() {
    let r = run_suite(&SuiteConfig::for_triple([2, 3, 5])).unwrap();
    assert_eq!(r.checks.len(), 1);
    assert_eq!(r.checks[0].name, "classification");
    assert_eq!(r.checks[0].status, Status::Fail);
    assert_eq!(r.overall, Status::Fail);
    assert_schema_valid(&r);
}

#[test]
fn invalid_config_is_rejected() {
    let mut cfg = SuiteConfig::for_triple([2, 3, 7]);
    cfg.checks = Some(vec!["no-such-check".into()]);
    assert!(run_suite(&cfg).is_err());
    let mut cfg = SuiteConfig::for_triple([2, 3, 7]);
    cfg.identity_tol = 0.0;
    assert!(run_suite(&cfg).is_err());
    assert!(run_suite(&SuiteConfig::for_triple([2, 3, 7]).with_grid(3)).is_err());
}

#[test]
fn convergence_orders_on_nil() {
    let rows = convergence_study(&SuiteConfig::for_triple([3, 3, 3]), 3).unwrap();
    let row = |l: &str| rows.iter().find(|r| r.label == l).unwrap();
    let end = row("d omega_E");
    assert_eq!(end.status, Status::Pass);
    assert!(end.monotone);
    let o = end.order.unwrap();
    assert!((1.9..=2.3).contains(&o), "order {o}");
    assert_eq!(end.levels.len(), 3);
    assert!(end.levels.windows(2).all(|w| (w[1].0 - w[0].0 / 2.0).abs() < 1e-15));
    assert_eq!(row("d omega_sigma").status, Status::Vacuous);
    assert_eq!(row("d omega_circ").status, Status::Pass);
    let csv = convergence_csv(&rows);
    assert!(csv.starts_with("form,h,residual,order,status\n"));
    assert_eq!(csv.lines().count(), 1 + 3 * rows.len());
    assert!(convergence_study(&SuiteConfig::for_triple([3, 3, 3]), 2).is_err());
}

/// `sin(x) du` whose jet gradient is scaled by `k`.
fn scaled_gradient(k: f64) -> FormField {
    FormField::new(3, 1, move |x| {
        let mut s = x[0].sin();
        for g in s.grad.iter_mut() {
            *g *= k;
        }
        let mut c = vec![Jet::constant(0.0); 3];
        c[1] = s;
        Form { dim: 3, degree: 1, coeffs: c }
    })
    .unwrap()
}

#[test]
fn mutated_derivative_fails_the_order_check() {
    let grids: Vec<_> = [8, 16, 32].iter().map(|&n| n_grid(n).unwrap()).collect();
    let good = scaled_gradient(1.0);
    let row = fd_order_row("sin x du", &good, &good.d().unwrap(), &grids, (1.9, 2.3)).unwrap();
    assert_eq!(row.status, Status::Pass);
    let bad = scaled_gradient(1.1);
    let row = fd_order_row("broken", &bad, &bad.d().unwrap(), &grids, (1.9, 2.3)).unwrap();
    assert_eq!(row.status, Status::Fail);
}
