//! The three pipelines and the files they leave behind.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use hammerstein_core::catalog::{self, CatalogEntry, ReferenceValue};
use hammerstein_core::certify::{
    analyze, eigenvector_guess, fit_coefficient, ordering_check, picard_solve, Analysis, AnalysisConfig,
    OrderingReport, SolveResult, SolverConfig,
};
use hammerstein_core::conditions::{ConditionStatus, LimitValue, SamplingConfig};
use hammerstein_core::operators::Discretization;
use hammerstein_core::spectral::{analyze_spectrum, SpectralConfig, SpectralSummary};
use serde::Serialize;
use thiserror::Error;

use crate::config::RunSpec;
use crate::json::{self, format_f64};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_NO_CERTIFICATE: i32 = 2;
pub const EXIT_CONDITION_FAILED: i32 = 3;
pub const EXIT_TRIVIAL: i32 = 4;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Core(#[from] hammerstein_core::Error),
    #[error("writing {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub exit_code: i32,
    pub files: Vec<PathBuf>,
    pub summary: String,
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, RunError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| RunError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(io(&path))?;
    Ok(path)
}

fn setup(spec: &RunSpec) -> Result<(CatalogEntry, Discretization), RunError> {
    let entry = catalog::build(&spec.problem)?;
    let disc = Discretization::new(&entry.problem, spec.n_nodes, spec.nodes_per_a_interval)?;
    Ok((entry, disc))
}

fn spectral_config(spec: &RunSpec) -> SpectralConfig {
    SpectralConfig {
        tol: spec.tol_spectral,
        max_iter: spec.max_iter,
        seed: spec.seed,
        ..SpectralConfig::default()
    }
}

#[derive(Serialize)]
struct AnalyzeReport<'a> {
    command: &'static str,
    run: &'a RunSpec,
    verdict: &'static str,
    exit_code: i32,
    analysis: &'a Analysis,
    reference_values: &'a [ReferenceValue],
}

pub fn analyze_exit_code(a: &Analysis) -> (i32, &'static str) {
    if a.conditions.any_failed() {
        (EXIT_CONDITION_FAILED, "condition failure")
    } else if a.existence_certified {
        (EXIT_OK, "nontrivial solution certified")
    } else {
        (EXIT_NO_CERTIFICATE, "no certificate")
    }
}

pub fn run_analyze(spec: &RunSpec, out: &Path) -> Result<Outcome, RunError> {
    let (entry, disc) = setup(spec)?;
    let cfg = AnalysisConfig {
        spectral: spectral_config(spec),
        sampling: SamplingConfig {
            seed: spec.seed,
            ..SamplingConfig::default()
        },
        ..AnalysisConfig::default()
    };
    let analysis = analyze(&entry.problem, &disc, &cfg)?;
    let (exit_code, verdict) = analyze_exit_code(&analysis);
    let report = AnalyzeReport {
        command: "analyze",
        run: spec,
        verdict,
        exit_code,
        analysis: &analysis,
        reference_values: &entry.reference_values,
    };
    let text = analyze_text(spec, &analysis, verdict);
    let files = vec![
        write(out, "report.json", &json::to_string(&report)?)?,
        write(out, "report.txt", &text)?,
    ];
    Ok(Outcome {
        exit_code,
        files,
        summary: format!("{}: {verdict}", spec.problem.id),
    })
}

fn limit_line(name: &str, v: &LimitValue) -> String {
    format!("  {name:<10} {:<14} {:?} (drift {:.2e})\n", format_f64(v.value), v.kind, v.drift)
}

fn analyze_text(spec: &RunSpec, a: &Analysis, verdict: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "problem   {}", spec.problem.id);
    let _ = writeln!(s, "nodes     {} (window rule {})", spec.n_nodes, spec.nodes_per_a_interval);
    let _ = writeln!(s, "verdict   {verdict}\n");

    s += "conditions\n";
    for e in &a.conditions.entries {
        let status = match e.status {
            ConditionStatus::PassedSampled => "passed (sampled)",
            ConditionStatus::Failed => "FAILED",
            ConditionStatus::Skipped => "skipped",
        };
        let _ = write!(s, "  {:<4} {status}", e.condition.to_string());
        if let Some(note) = &e.note {
            let _ = write!(s, "  {note}");
        }
        s.push('\n');
    }
    for w in &a.conditions.witnesses {
        let _ = writeln!(s, "  witness {} {}: {}", w.condition, w.quantity, w.message);
    }

    let sp = &a.spectral;
    s += "\nspectral\n";
    let _ = writeln!(s, "  r(L1)     {}  mu {}", format_f64(sp.l1.radius), format_f64(sp.l1.char_value));
    let _ = writeln!(s, "  r(L2|A)   {}  mu {}", format_f64(sp.l2.radius), format_f64(sp.l2.char_value));
    match sp.m_tilde {
        Some(m) => {
            let _ = writeln!(s, "  M~(A)     {}", format_f64(m));
        }
        None => {
            let _ = writeln!(s, "  M~(A)     unavailable: {}", sp.m_tilde_error.as_deref().unwrap_or("?"));
        }
    }

    match &a.certificate {
        Some(c) => {
            s += "\nlimits\n";
            s += &limit_line("f^0", &c.f_limits.f_sup_0);
            s += &limit_line("f_0", &c.f_limits.f_inf_0);
            s += &limit_line("f^inf", &c.f_limits.f_sup_inf);
            s += &limit_line("f_inf", &c.f_limits.f_inf_inf);
            s += "\ncertificate\n";
            let _ = writeln!(s, "  T1 {}  T2 {}", c.t1_holds, c.t2_holds);
            for ineq in [
                &c.margins.f_sup_0_below_mu_l1,
                &c.margins.mu_l2_below_f_inf_inf,
                &c.margins.f_sup_inf_below_mu_l1,
                &c.margins.mu_l2_below_f_inf_0,
            ] {
                let _ = writeln!(
                    s,
                    "  {} < {}: margin {} ({})",
                    ineq.smaller,
                    ineq.larger,
                    format_f64(ineq.margin),
                    if ineq.holds { "holds" } else { "fails" }
                );
            }
        }
        None => {
            let _ = writeln!(s, "\ncertificate skipped: {}", a.certificate_skipped.as_deref().unwrap_or("?"));
        }
    }
    if let Some(o) = &a.ordering {
        let _ = writeln!(s, "\nordering {}", if o.passed { "passed" } else { "FAILED" });
        for c in &o.checks {
            let _ = writeln!(s, "  {:<24} gap {}", c.relation, format_f64(c.gap));
        }
    }
    s
}

#[derive(Serialize)]
struct SolveReport<'a> {
    command: &'static str,
    run: &'a RunSpec,
    exit_code: i32,
    nodes: usize,
    #[serde(flatten)]
    result: &'a SolveResult,
    /// Least-squares coefficient against `sin t` for the sine kernels.
    sin_coefficient: Option<f64>,
    reference_coefficient: Option<f64>,
}

pub fn solve_exit_code(r: &SolveResult) -> i32 {
    if r.trivial {
        EXIT_TRIVIAL
    } else if r.converged {
        EXIT_OK
    } else {
        EXIT_RUNTIME
    }
}

pub fn run_solve(spec: &RunSpec, out: &Path) -> Result<Outcome, RunError> {
    let (entry, disc) = setup(spec)?;
    let p = &entry.problem;
    let u0 = eigenvector_guess(p, &disc, &spectral_config(spec), spec.initial_amplitude)?;
    let cfg = SolverConfig {
        damping: spec.damping,
        tol: spec.tol_solve,
        max_iter: spec.max_iter,
    };
    let result = picard_solve(p, &disc, u0, &cfg)?;
    let exit_code = solve_exit_code(&result);
    let sine = matches!(entry.id.as_str(), "sine_exp" | "linear_probe");
    let report = SolveReport {
        command: "solve",
        run: spec,
        exit_code,
        nodes: disc.grid.len(),
        result: &result,
        sin_coefficient: sine.then(|| fit_coefficient(&result.solution, &disc.phi, f64::sin)),
        reference_coefficient: entry.reference("solution_coefficient"),
    };
    let files = vec![
        write(out, "solution.csv", &solution_csv(&result, &disc.phi))?,
        write(out, "solve.json", &json::to_string(&report)?)?,
    ];
    let state = match exit_code {
        EXIT_OK => "converged",
        EXIT_TRIVIAL => "collapsed to the trivial solution",
        _ => "did not converge",
    };
    Ok(Outcome {
        exit_code,
        files,
        summary: format!(
            "{}: {state} after {} iterations, residual {:e}",
            spec.problem.id, result.iterations, result.residual
        ),
    })
}

/// At ±∞ the column `u` holds `±inf` by the sign of the limit of ũ, or
/// `nan` when that limit is zero and u itself has no limit in general.
fn u_at_infinity(u_tilde: f64) -> f64 {
    if u_tilde == 0.0 {
        f64::NAN
    } else {
        u_tilde.signum() * f64::INFINITY
    }
}

pub fn solution_csv(r: &SolveResult, phi: &[f64]) -> String {
    let u = &r.solution;
    let grid = u.grid();
    let mut s = String::from("t,tau,u,u_tilde\n");
    let mut row = |t: f64, tau: f64, uu: f64, ut: f64| {
        let _ = writeln!(s, "{},{},{},{}", format_f64(t), format_f64(tau), format_f64(uu), format_f64(ut));
    };
    let minus = u.value_at_minus_inf();
    row(f64::NEG_INFINITY, -1.0, u_at_infinity(minus), minus);
    for (((&t, &tau), &ut), &ph) in grid.nodes_t().iter().zip(grid.nodes_tau()).zip(u.values_tilde()).zip(phi) {
        row(t, tau, ut * ph, ut);
    }
    let plus = u.value_at_plus_inf();
    row(f64::INFINITY, 1.0, u_at_infinity(plus), plus);
    s
}

#[derive(Serialize)]
struct SpectralReport<'a> {
    command: &'static str,
    run: &'a RunSpec,
    spectral: &'a SpectralSummary,
    ordering: Option<OrderingReport>,
    reference_values: &'a [ReferenceValue],
}

pub fn run_spectral(spec: &RunSpec, out: &Path) -> Result<Outcome, RunError> {
    let (entry, disc) = setup(spec)?;
    let summary = analyze_spectrum(&entry.problem, &disc, &spectral_config(spec), true)?;
    let ordering = summary
        .m_tilde
        .map(|m| ordering_check(summary.l1.char_value, summary.l2.char_value, m, summary.l1.radius));
    let report = SpectralReport {
        command: "spectral",
        run: spec,
        spectral: &summary,
        ordering,
        reference_values: &entry.reference_values,
    };
    let files = vec![write(out, "spectral.json", &json::to_string(&report)?)?];
    Ok(Outcome {
        exit_code: EXIT_OK,
        files,
        summary: format!(
            "{}: r(L1) = {}, r(L2|A) = {}",
            spec.problem.id,
            format_f64(summary.l1.radius),
            format_f64(summary.l2.radius)
        ),
    })
}
