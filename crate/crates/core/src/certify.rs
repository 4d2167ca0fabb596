//! Existence certificate from the limit quotients and characteristic values,
//! and a damped Picard solver for the nontrivial fixed point.
//!
//! With `β(u) = ‖u‖_φ` the index dichotomy reads
//!
//! 1. `f⁰ < μ(L₁)`: index 1 on small balls,
//! 2. `f^∞ < μ(L₁)`: index 1 on large balls,
//! 3. `μ(L₂) < f₀`: index 0 on small balls,
//! 4. `μ(L₂) < f_∞`: index 0 on large balls,
//!
//! and a nontrivial fixed point exists under (T1) = cases 1 and 4 or
//! (T2) = cases 2 and 3.

use std::sync::Arc;

use serde::Serialize;

use crate::conditions::{check_conditions, estimate_limits, ConditionReport, LimitEstimates, LimitValue, SamplingConfig};
use crate::error::{Error, Result};
use crate::operators::{Discretization, HammersteinOperator, ProblemSpec};
use crate::quadrature::QuadratureRule;
use crate::spectral::{analyze_spectrum, SpectralConfig, SpectralSummary};
use crate::weighted_space::{cone_value, phi_norm, WeightedFunction};

/// Finite margins must exceed this for a strict inequality to count.
pub const STRICT_TOLERANCE: f64 = 1e-9;

/// Relative slack of the ordering checks.
pub const ORDERING_SLACK: f64 = 1e-6;

/// Below this φ-norm an iterate counts as the trivial solution.
pub const COLLAPSE_NORM: f64 = 1e-10;

/// `smaller < larger`, with the signed gap `larger − smaller`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Inequality {
    pub smaller: &'static str,
    pub larger: &'static str,
    #[serde(serialize_with = "crate::ext::serialize")]
    pub margin: f64,
    pub holds: bool,
}

fn strict(smaller: &'static str, a: f64, larger: &'static str, b: f64, determined: bool, tol: f64) -> Inequality {
    let margin = if a == b { 0.0 } else { b - a };
    Inequality {
        smaller,
        larger,
        margin,
        holds: determined && margin > tol,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndexCase {
    pub case: u8,
    pub hypothesis: &'static str,
    pub conclusion: &'static str,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Margins {
    pub f_sup_0_below_mu_l1: Inequality,
    pub mu_l2_below_f_inf_inf: Inequality,
    pub f_sup_inf_below_mu_l1: Inequality,
    pub mu_l2_below_f_inf_0: Inequality,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    #[serde(serialize_with = "crate::ext::serialize")]
    pub mu_l1: f64,
    #[serde(serialize_with = "crate::ext::serialize")]
    pub mu_l2: f64,
    pub m_tilde: f64,
    pub f_limits: LimitEstimates,
    pub t1_holds: bool,
    pub t2_holds: bool,
    pub margins: Margins,
    pub index_cases: Vec<IndexCase>,
    /// The functional β of the index results.
    pub beta: &'static str,
}

fn limit(v: &LimitValue) -> (f64, bool) {
    (v.value, v.is_determined())
}

/// Evaluates (T1) and (T2). Undetermined limits never satisfy an inequality.
pub fn existence_certificate(mu_l1: f64, mu_l2: f64, m_tilde: f64, f_limits: LimitEstimates, tol: f64) -> Certificate {
    let (f_sup_0, d1) = limit(&f_limits.f_sup_0);
    let (f_inf_0, d2) = limit(&f_limits.f_inf_0);
    let (f_sup_inf, d3) = limit(&f_limits.f_sup_inf);
    let (f_inf_inf, d4) = limit(&f_limits.f_inf_inf);
    let margins = Margins {
        f_sup_0_below_mu_l1: strict("f_sup_0", f_sup_0, "mu_L1", mu_l1, d1, tol),
        mu_l2_below_f_inf_inf: strict("mu_L2", mu_l2, "f_inf_inf", f_inf_inf, d4, tol),
        f_sup_inf_below_mu_l1: strict("f_sup_inf", f_sup_inf, "mu_L1", mu_l1, d3, tol),
        mu_l2_below_f_inf_0: strict("mu_L2", mu_l2, "f_inf_0", f_inf_0, d2, tol),
    };
    let index_cases = vec![
        IndexCase {
            case: 1,
            hypothesis: "f_sup_0 < mu_L1",
            conclusion: "index 1 on small balls",
            holds: margins.f_sup_0_below_mu_l1.holds,
        },
        IndexCase {
            case: 2,
            hypothesis: "f_sup_inf < mu_L1",
            conclusion: "index 1 on large balls",
            holds: margins.f_sup_inf_below_mu_l1.holds,
        },
        IndexCase {
            case: 3,
            hypothesis: "mu_L2 < f_inf_0",
            conclusion: "index 0 on small balls",
            holds: margins.mu_l2_below_f_inf_0.holds,
        },
        IndexCase {
            case: 4,
            hypothesis: "mu_L2 < f_inf_inf",
            conclusion: "index 0 on large balls",
            holds: margins.mu_l2_below_f_inf_inf.holds,
        },
    ];
    Certificate {
        mu_l1,
        mu_l2,
        m_tilde,
        t1_holds: margins.f_sup_0_below_mu_l1.holds && margins.mu_l2_below_f_inf_inf.holds,
        t2_holds: margins.f_sup_inf_below_mu_l1.holds && margins.mu_l2_below_f_inf_0.holds,
        margins,
        index_cases,
        f_limits,
        beta: "phi_norm",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderingCheck {
    pub relation: &'static str,
    #[serde(serialize_with = "crate::ext::serialize")]
    pub gap: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderingReport {
    pub checks: Vec<OrderingCheck>,
    pub passed: bool,
}

fn at_least(relation: &'static str, lhs: f64, rhs: f64) -> OrderingCheck {
    let gap = if lhs == rhs { 0.0 } else { lhs - rhs };
    let scale = lhs.abs().max(rhs.abs());
    OrderingCheck {
        relation,
        gap,
        passed: gap >= -ORDERING_SLACK * scale,
    }
}

/// `M̃ ≥ μ(L₂) ≥ μ(L₁)` and `r(L₁) ≥ 1/(2M̃)`, each with relative slack
/// [`ORDERING_SLACK`].
pub fn ordering_check(mu_l1: f64, mu_l2: f64, m_tilde: f64, r_l1: f64) -> OrderingReport {
    let checks = vec![
        at_least("m_tilde >= mu_L2", m_tilde, mu_l2),
        at_least("mu_L2 >= mu_L1", mu_l2, mu_l1),
        at_least("r_L1 >= 1/(2 m_tilde)", r_l1, 0.5 / m_tilde),
    ];
    let passed = checks.iter().all(|c| c.passed);
    OrderingReport { checks, passed }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalysisConfig {
    pub spectral: SpectralConfig,
    pub sampling: SamplingConfig,
    pub strict_tolerance: f64,
    pub node_doubling: bool,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            spectral: SpectralConfig::default(),
            sampling: SamplingConfig::default(),
            strict_tolerance: STRICT_TOLERANCE,
            node_doubling: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Analysis {
    pub problem: String,
    pub conditions: ConditionReport,
    pub spectral: SpectralSummary,
    pub ordering: Option<OrderingReport>,
    pub certificate: Option<Certificate>,
    pub certificate_skipped: Option<String>,
    pub existence_certified: bool,
}

/// Condition audit, spectral data, limits and certificate for one problem.
pub fn analyze(p: &ProblemSpec, disc: &Discretization, cfg: &AnalysisConfig) -> Result<Analysis> {
    let conditions = check_conditions(p, disc, &cfg.sampling)?;
    let spectral = analyze_spectrum(p, disc, &cfg.spectral, cfg.node_doubling)?;
    let limits = estimate_limits(p, &disc.grid, &cfg.sampling.limits)?;

    let (ordering, certificate, certificate_skipped) = match spectral.m_tilde {
        Some(m) if spectral.window_condition_holds() => {
            let ordering = ordering_check(spectral.l1.char_value, spectral.l2.char_value, m, spectral.l1.radius);
            let cert = existence_certificate(
                spectral.l1.char_value,
                spectral.l2.char_value,
                m,
                limits,
                cfg.strict_tolerance,
            );
            (Some(ordering), Some(cert), None)
        }
        _ => {
            let reason = spectral
                .m_tilde_error
                .clone()
                .or_else(|| spectral.lbar_error.clone())
                .unwrap_or_else(|| "window condition does not hold".into());
            (None, None, Some(format!("C6 fails: {reason}")))
        }
    };
    let existence_certified =
        certificate.as_ref().is_some_and(|c| c.t1_holds || c.t2_holds) && !conditions.any_failed();
    Ok(Analysis {
        problem: p.label.clone(),
        conditions,
        spectral,
        ordering,
        certificate,
        certificate_skipped,
        existence_certified,
    })
}

/// `‖u − Tu‖_φ`.
pub fn residual(p: &ProblemSpec, u: &WeightedFunction, rule: &QuadratureRule) -> Result<f64> {
    let op = HammersteinOperator::new(p, Arc::clone(u.grid()), rule)?;
    Ok(phi_norm(&u.sub(&op.apply(u)?)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PicardStep {
    /// `‖u − Tu‖_φ` at the iterate before the update.
    pub residual: f64,
    /// `‖u‖_φ` after the update.
    pub norm: f64,
}

/// Damped iteration `u ← (1−d)u + d·Tu`, one step at a time.
#[derive(Debug, Clone)]
pub struct PicardSolver {
    op: HammersteinOperator,
    u: WeightedFunction,
    damping: f64,
    iterations: usize,
}

impl PicardSolver {
    pub fn new(op: HammersteinOperator, u0: WeightedFunction, damping: f64) -> Result<Self> {
        if !(damping > 0.0 && damping <= 1.0) {
            return Err(Error::invalid("damping", format!("must lie in (0, 1], got {damping}")));
        }
        Ok(Self {
            op,
            u: u0,
            damping,
            iterations: 0,
        })
    }

    pub fn current(&self) -> &WeightedFunction {
        &self.u
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn damping(&self) -> f64 {
        self.damping
    }

    pub fn residual(&self) -> Result<f64> {
        Ok(phi_norm(&self.u.sub(&self.op.apply(&self.u)?)?))
    }

    pub fn step(&mut self) -> Result<PicardStep> {
        let tu = self.op.apply(&self.u)?;
        let residual = phi_norm(&self.u.sub(&tu)?);
        self.u = self.u.combine(1.0 - self.damping, &tu, self.damping)?;
        self.iterations += 1;
        Ok(PicardStep {
            residual,
            norm: phi_norm(&self.u),
        })
    }

    pub fn into_solution(self) -> WeightedFunction {
        self.u
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverConfig {
    pub damping: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            damping: 1.0,
            tol: 1e-8,
            max_iter: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveResult {
    #[serde(skip)]
    pub solution: WeightedFunction,
    pub residual: f64,
    pub cone_value: f64,
    pub phi_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub trivial: bool,
    pub restarted: bool,
    pub damping_used: f64,
    pub log: Vec<String>,
}

/// The L₁ eigenvector as a weighted function of φ-norm `amplitude`.
pub fn eigenvector_guess(
    p: &ProblemSpec,
    disc: &Discretization,
    spectral: &SpectralConfig,
    amplitude: f64,
) -> Result<WeightedFunction> {
    let l1 = crate::operators::assemble_l1(p, &disc.grid, &disc.rule)?;
    let est = crate::spectral::power_iteration(&l1, spectral.tol, spectral.max_iter, spectral.seed)?;
    let v = WeightedFunction::with_extrapolated_limits(Arc::clone(&disc.grid), est.eigenvector)?;
    let norm = phi_norm(&v);
    if norm == 0.0 {
        return Ok(v);
    }
    Ok(v.scaled(amplitude / norm))
}

/// Iterates from `u0` until `‖u − Tu‖_φ < tol`. If the iterate collapses to
/// zero, the run restarts once from `10·u0` with half the damping; a second
/// collapse is reported as the trivial solution.
pub fn picard_solve(
    p: &ProblemSpec,
    disc: &Discretization,
    u0: WeightedFunction,
    cfg: &SolverConfig,
) -> Result<SolveResult> {
    if !(cfg.tol > 0.0) {
        return Err(Error::invalid("tol", "must be positive"));
    }
    let op = HammersteinOperator::from_discretization(p, disc)?;
    let mut solver = PicardSolver::new(op.clone(), u0.clone(), cfg.damping)?;
    let mut log = Vec::new();
    let mut restarted = false;
    let mut used = 0usize;
    let mut converged = false;
    let mut trivial = false;

    while used < cfg.max_iter {
        if phi_norm(solver.current()) < COLLAPSE_NORM {
            if restarted {
                trivial = true;
                log.push(format!("iterate collapsed again after {used} iterations; trivial solution"));
                break;
            }
            restarted = true;
            let damping = solver.damping() / 2.0;
            log.push(format!(
                "iterate collapsed after {used} iterations; restarting from 10x the initial guess with damping {damping}"
            ));
            solver = PicardSolver::new(op.clone(), u0.scaled(10.0), damping)?;
            continue;
        }
        let before = solver.current().clone();
        let step = solver.step()?;
        used += 1;
        if step.residual < cfg.tol {
            // the pre-update iterate already satisfies the tolerance
            solver = PicardSolver::new(op.clone(), before, solver.damping())?;
            converged = true;
            break;
        }
    }
    if !converged && !trivial && phi_norm(solver.current()) < COLLAPSE_NORM {
        trivial = true;
    }

    let residual = solver.residual()?;
    converged = converged || residual < cfg.tol;
    if trivial {
        converged = residual < cfg.tol;
    }
    let damping_used = solver.damping();
    let solution = solver.into_solution();
    let cone_value = cone_value(&p.cone, &solution, &p.weight)?;
    log.push(format!("stopped after {used} iterations with residual {residual:e}"));
    Ok(SolveResult {
        phi_norm: phi_norm(&solution),
        solution,
        residual,
        cone_value,
        iterations: used,
        converged,
        trivial,
        restarted,
        damping_used,
        log,
    })
}

/// Least-squares coefficient of ũ against `g(t)/φ(t)` over the grid nodes.
pub fn fit_coefficient<G: Fn(f64) -> f64>(u: &WeightedFunction, phi: &[f64], g: G) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for ((&t, &v), &ph) in u.grid().nodes_t().iter().zip(u.values_tilde()).zip(phi) {
        let basis = g(t) / ph;
        num += basis * v;
        den += basis * basis;
    }
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::conditions::LimitKind;

    const I_SQUARED: f64 = 2.936_511_226_521_297_6;

    fn limit(kind: LimitKind, value: f64) -> LimitValue {
        LimitValue {
            kind,
            value,
            drift: 0.0,
            probes: vec![value],
        }
    }

    fn limits(sup0: f64, inf0: f64, supinf: f64, infinf: f64) -> LimitEstimates {
        let k = |v: f64| if v.is_infinite() { LimitKind::PlusInfinity } else { LimitKind::Finite };
        LimitEstimates {
            f_sup_0: limit(k(sup0), sup0),
            f_inf_0: limit(k(inf0), inf0),
            f_sup_inf: limit(k(supinf), supinf),
            f_inf_inf: limit(k(infinf), infinf),
            probe_x_zero: vec![1.0],
            probe_x_inf: vec![1.0],
        }
    }

    #[test]
    fn t2_fires_for_sine_exp_limits() {
        let c = existence_certificate(0.409871, 1.515082, 1.92479, limits(f64::INFINITY, f64::INFINITY, 0.0, 0.0), STRICT_TOLERANCE);
        assert!(c.t2_holds && !c.t1_holds);
        assert!(c.margins.f_sup_inf_below_mu_l1.margin >= 0.4);
        assert_eq!(c.margins.mu_l2_below_f_inf_0.margin, f64::INFINITY);
        assert_eq!(c.index_cases.iter().filter(|i| i.holds).map(|i| i.case).collect::<Vec<_>>(), vec![2, 3]);
    }

    #[test]
    fn linear_limits_give_no_certificate() {
        let c = existence_certificate(0.4099, 1.5151, 1.92, limits(1.0, 1.0, 1.0, 1.0), STRICT_TOLERANCE);
        assert!(!c.t1_holds && !c.t2_holds);
    }

    #[test]
    fn margins_within_tolerance_do_not_count() {
        let c = existence_certificate(1.0, 2.0, 3.0, limits(1.0 - 1e-12, 3.0, 0.0, 3.0), STRICT_TOLERANCE);
        assert!(!c.margins.f_sup_0_below_mu_l1.holds);
        let c = existence_certificate(1.0, 2.0, 3.0, limits(1.0 - 1e-6, 3.0, 0.0, 3.0), STRICT_TOLERANCE);
        assert!(c.t1_holds);
    }

    #[test]
    fn undetermined_limits_never_certify() {
        let mut l = limits(0.0, 0.0, 0.0, 0.0);
        l.f_sup_inf.kind = LimitKind::Undetermined;
        l.f_inf_0 = limit(LimitKind::PlusInfinity, f64::INFINITY);
        let c = existence_certificate(1.0, 2.0, 3.0, l, STRICT_TOLERANCE);
        assert!(!c.t2_holds);
    }

    #[test]
    fn ordering_examples() {
        let ok = ordering_check(0.409871, 1.515081, 1.924768, 2.439794);
        assert!(ok.passed);
        assert!(ordering_check(1.0, 1.0, 1.0, 0.5).passed);
        let bad = ordering_check(1.515081, 0.409871, 1.924768, 2.439794);
        assert!(!bad.passed);
        assert!(bad.checks[1].gap < 0.0);
    }

    #[test]
    fn sine_exp_analysis_certifies_existence() {
        let p = catalog::get("sine_exp").unwrap().problem;
        let disc = Discretization::new(&p, 400, 64).unwrap();
        let a = analyze(&p, &disc, &AnalysisConfig::default()).unwrap();
        let c = a.certificate.as_ref().unwrap();
        assert!(c.t2_holds);
        assert!(a.existence_certified);
        assert!(a.ordering.as_ref().unwrap().passed);
    }

    #[test]
    fn picard_finds_the_rank_one_solution() {
        let p = catalog::get("sine_exp").unwrap().problem;
        let disc = Discretization::new(&p, 400, 64).unwrap();
        let u0 = eigenvector_guess(&p, &disc, &SpectralConfig::default(), 1.0).unwrap();
        let r = picard_solve(&p, &disc, u0, &SolverConfig::default()).unwrap();
        assert!(r.converged && !r.trivial, "{r:?}");
        assert!(r.residual < 1e-8);
        assert!(r.cone_value >= -1e-9);
        let c = fit_coefficient(&r.solution, &disc.phi, f64::sin);
        assert!(((c - I_SQUARED) / I_SQUARED).abs() < 1e-4, "{c}");
        assert!(phi_norm(&r.solution) > 0.1);
    }

    #[test]
    fn scalar_recursion_holds_at_every_step() {
        let p = catalog::get("sine_exp").unwrap().problem;
        let disc = Discretization::new(&p, 400, 64).unwrap();
        let op = HammersteinOperator::from_discretization(&p, &disc).unwrap();
        let u0 = WeightedFunction::from_u(Arc::clone(&disc.grid), &p.weight, |t| 0.3 * t.sin()).unwrap();
        let mut solver = PicardSolver::new(op, u0, 1.0).unwrap();
        let i = I_SQUARED.sqrt();
        let mut c = 0.3_f64;
        for _ in 0..12 {
            solver.step().unwrap();
            let next = fit_coefficient(solver.current(), &disc.phi, f64::sin);
            assert!((next - i * c.sqrt()).abs() < 1e-5 * next, "{next} vs {}", i * c.sqrt());
            c = next;
        }
    }

    #[test]
    fn zero_start_is_reported_trivial() {
        let p = catalog::get("sine_exp").unwrap().problem;
        let disc = Discretization::new(&p, 200, 32).unwrap();
        let zero = WeightedFunction::zero(Arc::clone(&disc.grid));
        let r = picard_solve(&p, &disc, zero.clone(), &SolverConfig::default()).unwrap();
        assert!(r.trivial && r.restarted);
        assert_eq!(r.residual, 0.0);
        assert_eq!(residual(&p, &zero, &disc.rule).unwrap(), 0.0);
    }

    #[test]
    fn one_iteration_does_not_converge() {
        let p = catalog::get("sine_exp").unwrap().problem;
        let disc = Discretization::new(&p, 200, 32).unwrap();
        let u0 = eigenvector_guess(&p, &disc, &SpectralConfig::default(), 1.0).unwrap();
        let cfg = SolverConfig {
            max_iter: 1,
            ..SolverConfig::default()
        };
        let r = picard_solve(&p, &disc, u0, &cfg).unwrap();
        assert!(!r.converged && !r.trivial);
        assert_eq!(r.iterations, 1);
    }

    #[test]
    fn doubled_solution_is_not_a_fixed_point() {
        let p = catalog::get("sine_exp").unwrap().problem;
        let disc = Discretization::new(&p, 400, 64).unwrap();
        let u = WeightedFunction::from_u(Arc::clone(&disc.grid), &p.weight, |t| 2.0 * I_SQUARED * t.sin()).unwrap();
        assert!(residual(&p, &u, &disc.rule).unwrap() > 0.1);
    }
}
