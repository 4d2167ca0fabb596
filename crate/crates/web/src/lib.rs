//! Browser bindings for the `sine_exp` family: spectral data, the existence
//! certificate and the Picard solution, each returned as a JSON string.

use std::f64::consts::PI;

use hammerstein_core::catalog::{self, ProblemParams};
use hammerstein_core::certify::{
    analyze, eigenvector_guess, fit_coefficient, ordering_check, picard_solve, AnalysisConfig, Certificate,
    OrderingReport, SolverConfig,
};
use hammerstein_core::operators::{Discretization, ProblemSpec};
use hammerstein_core::spectral::{analyze_spectrum, SpectralConfig, SpectralSummary};
use hammerstein_core::weighted_space::evaluate_u;
use serde::Serialize;
use wasm_bindgen::prelude::*;

const WINDOW_RULE: usize = 32;
const PLOT_POINTS: usize = 401;

fn problem(amplitude: f64, decay_rate: f64, window: Option<(f64, f64)>) -> Result<ProblemSpec, String> {
    let mut params = ProblemParams::new("sine_exp");
    params.amplitude = Some(amplitude);
    params.decay_rate = Some(decay_rate);
    params.window = window;
    Ok(catalog::build(&params).map_err(|e| e.to_string())?.problem)
}

fn discretize(p: &ProblemSpec, nodes: usize) -> Result<Discretization, String> {
    Discretization::new(p, nodes, WINDOW_RULE).map_err(|e| e.to_string())
}

fn to_json<T: Serialize>(v: &T) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct SpectralView {
    summary: SpectralSummary,
    ordering: Option<OrderingReport>,
}

pub fn spectral_json(amplitude: f64, decay_rate: f64, a: f64, b: f64, nodes: usize) -> Result<String, String> {
    let p = problem(amplitude, decay_rate, Some((a, b)))?;
    let disc = discretize(&p, nodes)?;
    let summary = analyze_spectrum(&p, &disc, &SpectralConfig::default(), false).map_err(|e| e.to_string())?;
    let ordering = summary
        .m_tilde
        .map(|m| ordering_check(summary.l1.char_value, summary.l2.char_value, m, summary.l1.radius));
    to_json(&SpectralView { summary, ordering })
}

#[derive(Serialize)]
struct CertifyView {
    certified: bool,
    failed_conditions: Vec<String>,
    skipped: Option<String>,
    certificate: Option<Certificate>,
}

pub fn certify_json(amplitude: f64, decay_rate: f64, a: f64, b: f64, nodes: usize) -> Result<String, String> {
    let p = problem(amplitude, decay_rate, Some((a, b)))?;
    let disc = discretize(&p, nodes)?;
    let cfg = AnalysisConfig {
        node_doubling: false,
        ..AnalysisConfig::default()
    };
    let analysis = analyze(&p, &disc, &cfg).map_err(|e| e.to_string())?;
    to_json(&CertifyView {
        certified: analysis.existence_certified,
        failed_conditions: analysis.conditions.failed().iter().map(|c| c.to_string()).collect(),
        skipped: analysis.certificate_skipped,
        certificate: analysis.certificate,
    })
}

#[derive(Serialize)]
struct SolveView {
    converged: bool,
    trivial: bool,
    iterations: usize,
    residual: f64,
    sin_coefficient: f64,
    t: Vec<f64>,
    u: Vec<f64>,
}

pub fn solve_json(amplitude: f64, decay_rate: f64, nodes: usize, damping: f64) -> Result<String, String> {
    let p = problem(amplitude, decay_rate, None)?;
    let disc = discretize(&p, nodes)?;
    let u0 = eigenvector_guess(&p, &disc, &SpectralConfig::default(), 1.0).map_err(|e| e.to_string())?;
    let cfg = SolverConfig {
        damping,
        max_iter: 2000,
        ..SolverConfig::default()
    };
    let r = picard_solve(&p, &disc, u0, &cfg).map_err(|e| e.to_string())?;
    let t: Vec<f64> = (0..PLOT_POINTS)
        .map(|i| -4.0 * PI + 8.0 * PI * i as f64 / (PLOT_POINTS - 1) as f64)
        .collect();
    let u = t
        .iter()
        .map(|&x| evaluate_u(&r.solution, x, &p.weight))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    to_json(&SolveView {
        converged: r.converged,
        trivial: r.trivial,
        iterations: r.iterations,
        residual: r.residual,
        sin_coefficient: fit_coefficient(&r.solution, &disc.phi, f64::sin),
        t,
        u,
    })
}

/// Spectral radii, characteristic values, M̃ and the ordering checks.
#[wasm_bindgen]
pub fn spectral(amplitude: f64, decay_rate: f64, window_a: f64, window_b: f64, nodes: usize) -> Result<String, JsValue> {
    spectral_json(amplitude, decay_rate, window_a, window_b, nodes).map_err(|e| JsValue::from_str(&e))
}

/// Condition audit plus the (T1)/(T2) verdict with margins.
#[wasm_bindgen]
pub fn certify(amplitude: f64, decay_rate: f64, window_a: f64, window_b: f64, nodes: usize) -> Result<String, JsValue> {
    certify_json(amplitude, decay_rate, window_a, window_b, nodes).map_err(|e| JsValue::from_str(&e))
}

/// Picard solution sampled on [−4π, 4π].
#[wasm_bindgen]
pub fn solve(amplitude: f64, decay_rate: f64, nodes: usize, damping: f64) -> Result<String, JsValue> {
    solve_json(amplitude, decay_rate, nodes, damping).map_err(|e| JsValue::from_str(&e))
}
