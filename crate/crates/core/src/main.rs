use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use foliation_forge::constructions::end_form::{self, curve_csv};
use foliation_forge::link_model::{self, build_link_model, n_grid};
use foliation_forge::report::{report_schema, Status};
use foliation_forge::sl2z::{self, ConjugacyKind, SingularityKind};
use foliation_forge::verify_suite::{self, SuiteConfig};
use foliation_forge::Error;

/// `println!` that exits quietly when stdout is closed early (e.g. piped into `head`).
macro_rules! out {
    ($($arg:tt)*) => {{
        let mut o = io::stdout().lock();
        if writeln!(o, $($arg)*).is_err() {
            std::process::exit(0);
        }
    }};
}

/// Verification of leafwise symplectic constructions on Milnor open books of T_{p,q,r}.
#[derive(Parser)]
#[command(name = "foliation-forge", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monodromy, singularity class, conjugacy data and invariants.
    Classify {
        #[command(flatten)]
        triple: Triple,
        #[arg(long)]
        json: bool,
    },
    /// Run the verification suite.
    Verify(VerifyArgs),
    /// The constants a, A, C, m measured on the link and the chosen (a, b).
    Constants {
        #[command(flatten)]
        triple: Triple,
        #[arg(long, default_value_t = 16)]
        grid: usize,
        #[arg(long)]
        json: bool,
    },
    /// Finite-difference convergence table for every closed form.
    Convergence {
        #[command(flatten)]
        triple: Triple,
        #[arg(long, default_value_t = 3)]
        levels: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Print the JSON schema of the verification report.
    ReportSchema,
}

#[derive(Args, Clone, Copy)]
struct Triple {
    #[arg(long, allow_negative_numbers = true)]
    p: i64,
    #[arg(long, allow_negative_numbers = true)]
    q: i64,
    #[arg(long, allow_negative_numbers = true)]
    r: i64,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    triple: Triple,
    /// Points per axis on the link grids.
    #[arg(long)]
    grid: Option<usize>,
    /// Comma-separated subset of checks.
    #[arg(long, value_delimiter = ',')]
    checks: Option<Vec<String>>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-slice margin curve of the end form.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Print the report as JSON on stdout instead of the summary.
    #[arg(long)]
    json: bool,
    /// Circular form uses L = lambda + shift.
    #[arg(long, allow_negative_numbers = true)]
    circular_l_shift: Option<f64>,
}

enum Failure {
    Verification,
    Input(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("json value")
}

fn write_file(path: &PathBuf, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Classify { triple, json } => classify(triple, json),
        Command::Verify(args) => verify(args),
        Command::Constants { triple, grid, json } => constants(triple, grid, json),
        Command::Convergence { triple, levels, csv, json } => convergence(triple, levels, csv, json),
        Command::ReportSchema => {
            out!("{}", pretty(&report_schema()));
            Ok(())
        }
    }
}

fn classify(t: Triple, as_json: bool) -> Result<(), Failure> {
    let (p, q, r) = (t.p, t.q, t.r);
    let class = sl2z::classify_singularity(p, q, r)?;
    let m = sl2z::monodromy_matrix(p, q, r)?;
    let trace = sl2z::trace_identity_check(p, q, r)?;
    let inv = sl2z::topological_invariants(p, q, r)?;
    let ctype = m.conjugacy_type();
    let geometry = match class.kind {
        SingularityKind::SimpleElliptic => "nil",
        SingularityKind::Cusp => "solv",
        SingularityKind::Other => "other",
    };
    let word = match ctype.kind {
        ConjugacyKind::Hyperbolic if ctype.trace > 0 => Some(sl2z::rl_word(&m)?.to_string()),
        ConjugacyKind::Hyperbolic => Some(format!("-{}", sl2z::rl_word(&m.neg()?)?)),
        _ => None,
    };
    let unipotent = match ctype.kind {
        ConjugacyKind::Unipotent => Some(sl2z::unipotent_parameter(&m)?),
        _ => None,
    };
    let to_inverse = sl2z::conjugate_to_inverse(&m)?;
    let v = json!({
        "triple": [p, q, r],
        "monodromy": m.rows(),
        "class": class.kind,
        "geometry": geometry,
        "reciprocalSum": format!("{}", class.reciprocal_sum),
        "trace": trace.trace_computed,
        "traceFormula": format!("{}", trace.trace_formula),
        "traceIdentity": trace.equal,
        "conjugacyType": ctype.kind,
        "rlWord": word,
        "unipotentParameter": unipotent,
        "mu": inv.mu,
        "chiFiber": inv.chi_fiber,
        "chiGlued": inv.chi_glued,
        "eulerNumber": inv.euler_number_if_nil,
        "conjugateToInverse": to_inverse,
    });
    if as_json {
        out!("{}", pretty(&v));
        return Ok(());
    }
    let [[a, b], [c, d]] = m.rows();
    out!("triple               ({p}, {q}, {r})");
    out!("monodromy            [[{a}, {b}], [{c}, {d}]]");
    out!("class                {}", v["class"].as_str().unwrap_or("?"));
    out!("geometry             {geometry}");
    out!("trace                {} (formula {}, equal {})", trace.trace_computed, trace.trace_formula, trace.equal);
    out!("conjugacy type       {}", v["conjugacyType"].as_str().unwrap_or("?"));
    if let Some(w) = &word {
        out!("RL word              {w}");
    }
    if let Some(n) = unipotent {
        out!("unipotent parameter  {n}");
    }
    out!("mu                   {}", inv.mu);
    out!("chi fiber            {}", inv.chi_fiber);
    out!("chi glued            {}", inv.chi_glued);
    if let Some(e) = inv.euler_number_if_nil {
        out!("euler number         {e}");
    }
    out!("conjugate to inverse {to_inverse}");
    Ok(())
}

fn verify(args: VerifyArgs) -> Result<(), Failure> {
    let t = args.triple;
    let mut cfg = SuiteConfig::for_triple([t.p, t.q, t.r]);
    if let Some(g) = args.grid {
        cfg = cfg.with_grid(g);
    }
    if let Some(s) = args.circular_l_shift {
        cfg.circular_l_shift = s;
    }
    cfg.checks = args.checks.map(|l| l.into_iter().map(|c| c.trim().to_string()).filter(|c| !c.is_empty()).collect());
    sl2z::classify_singularity(t.p, t.q, t.r)?;
    let (report, artifacts) = verify_suite::run_suite_with_artifacts(&cfg)?;
    let body = serde_json::to_string_pretty(&report).expect("report serializes");
    if let Some(path) = &args.out {
        write_file(path, &body)?;
    }
    if let Some(path) = &args.csv {
        let curve = artifacts.end_curve.ok_or_else(|| {
            Failure::Input("--csv needs the end-form check enabled".into())
        })?;
        write_file(path, &curve_csv(&curve))?;
    }
    if args.json {
        out!("{body}");
    } else {
        for c in &report.checks {
            let margin = c.worst_margin.map(|m| format!("{m:.6e}")).unwrap_or_else(|| "-".into());
            let resid = c.worst_residual.map(|m| format!("{m:.3e}")).unwrap_or_else(|| "-".into());
            out!("{:<8} {:<20} margin {:<14} residual {:<10} grid {}", c.status, c.name, margin, resid, c.grid_used);
        }
        out!("overall  {}  ({} checks, config {})", report.overall, report.checks.len(), &report.config_hash[..12]);
    }
    if report.overall == Status::Fail {
        return Err(Failure::Verification);
    }
    Ok(())
}

fn constants(t: Triple, grid: usize, as_json: bool) -> Result<(), Failure> {
    let model = build_link_model(t.p, t.q, t.r)?;
    let gc = link_model::geometry_constants(&model, &n_grid(grid)?)?;
    let cc = end_form::choose_constants(&gc)?;
    if as_json {
        out!("{}", pretty(&json!({ "triple": [t.p, t.q, t.r], "measured": gc, "chosen": cc })));
        return Ok(());
    }
    out!("grid      {}", gc.grid);
    out!("a (min)   {:.12}", gc.a_min);
    out!("A (max)   {:.12}", gc.a_max);
    out!("C         {:.6e}", gc.c_max);
    out!("m         {:.12}", gc.m_min);
    out!("chosen a  {:.12} (> {:.12})", cc.a, cc.a_bound);
    out!("chosen b  {} (< {})", cc.b, cc.b_bound_label());
    Ok(())
}

fn convergence(t: Triple, levels: usize, csv: Option<PathBuf>, as_json: bool) -> Result<(), Failure> {
    let cfg = SuiteConfig::for_triple([t.p, t.q, t.r]);
    let rows = verify_suite::convergence_study(&cfg, levels)?;
    if let Some(path) = &csv {
        write_file(path, &verify_suite::convergence_csv(&rows))?;
    }
    if as_json {
        out!("{}", serde_json::to_string_pretty(&rows).expect("rows serialize"));
    } else {
        for row in &rows {
            let order = row.order.map(|o| format!("{o:.4}")).unwrap_or_else(|| "-".into());
            out!("{:<8} {:<16} order {:<8} residuals {:?}", row.status, row.label, order, row.levels.iter().map(|l| l.1).collect::<Vec<_>>());
        }
    }
    if rows.iter().any(|r| r.status == Status::Fail) {
        return Err(Failure::Verification);
    }
    Ok(())
}
