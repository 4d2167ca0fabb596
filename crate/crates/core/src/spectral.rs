//! Spectral radii of the comparison operators and the window constant M̃.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::operators::{
    assemble_l1, assemble_l2_on_window, assemble_lbar, mat_vec, Discretization, NystromOperator, ProblemSpec,
};
use crate::quadrature::{compact_rule, QuadratureRule};

/// Probe points per window interval for the infimum defining M̃.
pub const DEFAULT_PROBE_POINTS: usize = 257;

/// Window integrals at or below this count as zero.
pub const INFIMUM_FLOOR: f64 = 1e-14;

const START_NOISE: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralEstimate {
    pub radius: f64,
    /// μ = 1/r, infinite for r = 0.
    #[serde(serialize_with = "crate::ext::serialize")]
    pub char_value: f64,
    /// Nonnegative, maximum entry 1.
    #[serde(skip)]
    pub eigenvector: Vec<f64>,
    pub cw_lower: f64,
    #[serde(serialize_with = "crate::ext::serialize")]
    pub cw_upper: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl SpectralEstimate {
    fn zero(eigenvector: Vec<f64>, iterations: usize) -> Self {
        Self {
            radius: 0.0,
            char_value: f64::INFINITY,
            eigenvector,
            cw_lower: 0.0,
            cw_upper: 0.0,
            iterations,
            converged: true,
        }
    }
}

/// Ratio bounds `min (Mv)ᵢ/vᵢ`, `max (Mv)ᵢ/vᵢ` over the support of a
/// nonnegative `v`. A positive `(Mv)ᵢ` on a zero of `v` makes the upper bound
/// infinite.
fn ratio_bounds(mv: &[f64], v: &[f64]) -> (f64, f64) {
    let mut lower = f64::INFINITY;
    let mut upper = 0.0f64;
    for (&a, &b) in mv.iter().zip(v) {
        if b > 0.0 {
            let r = a / b;
            lower = lower.min(r);
            upper = upper.max(r);
        } else if a > 0.0 {
            upper = f64::INFINITY;
        }
    }
    if lower == f64::INFINITY {
        lower = 0.0;
    }
    (lower, upper)
}

/// Dominant eigenpair of a square nonnegative matrix.
///
/// Starts from all ones plus seeded noise of size 1e−3, normalizes by the
/// max norm each step and stops once the Collatz–Wielandt bracket at the
/// current vector satisfies `upper − lower < tol·upper`. The returned radius
/// is `‖Mv‖∞` at the returned vector and always lies inside the bracket.
pub fn power_iteration(op: &NystromOperator, tol: f64, max_iter: usize, seed: u64) -> Result<SpectralEstimate> {
    power_iteration_matrix(&op.matrix, tol, max_iter, seed)
}

pub fn power_iteration_matrix(m: &DMatrix<f64>, tol: f64, max_iter: usize, seed: u64) -> Result<SpectralEstimate> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("tol", format!("must be positive, got {tol}")));
    }
    if max_iter == 0 {
        return Err(Error::invalid("max_iter", "must be at least 1"));
    }
    let n = m.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..n).map(|_| 1.0 + START_NOISE * rng.random_range(-1.0..1.0)).collect();
    let top = v.iter().cloned().fold(0.0, f64::max);
    v.iter_mut().for_each(|x| *x /= top);

    let mut last = (0.0, f64::INFINITY, 0.0);
    for iteration in 1..=max_iter {
        let mv = mat_vec(m, &v);
        let norm = mv.iter().cloned().fold(0.0, f64::max);
        if norm == 0.0 {
            return Ok(SpectralEstimate::zero(v, iteration));
        }
        let (lower, upper) = ratio_bounds(&mv, &v);
        last = (lower, upper, norm);
        if upper - lower < tol * upper {
            return Ok(SpectralEstimate {
                radius: norm,
                char_value: 1.0 / norm,
                eigenvector: v,
                cw_lower: lower,
                cw_upper: upper,
                iterations: iteration,
                converged: true,
            });
        }
        v = mv.iter().map(|x| x / norm).collect();
    }
    let (lower, upper, norm) = last;
    Ok(SpectralEstimate {
        radius: norm,
        char_value: 1.0 / norm,
        eigenvector: v,
        cw_lower: lower,
        cw_upper: upper,
        iterations: max_iter,
        converged: false,
    })
}

/// Collatz–Wielandt bracket of the spectral radius at a strictly positive
/// test vector.
pub fn collatz_wielandt_bounds(op: &NystromOperator, v: &[f64]) -> Result<(f64, f64)> {
    if !op.is_square() {
        return Err(Error::NotSquare {
            rows: op.matrix.nrows(),
            cols: op.matrix.ncols(),
        });
    }
    if let Some(index) = v.iter().position(|&x| !(x > 0.0)) {
        return Err(Error::NonPositiveVector { index, value: v[index] });
    }
    let mv = op.apply(v)?;
    Ok(ratio_bounds(&mv, v))
}

/// `M̃ = 1 / min_{t ∈ A} ∫_A k(t,s)η(s) ds`, the minimum taken over
/// `probe_points` equispaced points of each window interval.
pub fn m_tilde(p: &ProblemSpec, rule_a: &QuadratureRule, probe_points: usize) -> Result<f64> {
    if probe_points < 2 {
        return Err(Error::invalid("probe_points", "need at least 2"));
    }
    let mut worst = (f64::INFINITY, f64::NAN);
    for t in p.window.equispaced(probe_points) {
        let integral = rule_a.iter().fold(0.0, |acc, (s, w)| acc + p.k_eta(t, s) * w);
        if !integral.is_finite() {
            return Err(Error::NonFinite {
                context: "window integral",
                index: 0,
                t,
                s: t,
                value: integral,
            });
        }
        if integral < worst.0 {
            worst = (integral, t);
        }
    }
    if worst.0 <= INFIMUM_FLOOR {
        return Err(Error::NonPositiveInfimum {
            t: worst.1,
            value: worst.0,
        });
    }
    Ok(1.0 / worst.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub probe_points: usize,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 10_000,
            seed: 42,
            probe_points: DEFAULT_PROBE_POINTS,
        }
    }
}

/// Change of the spectral radii when grid and window rule both double.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DoublingDeltas {
    pub nodes: usize,
    pub nodes_refined: usize,
    pub r_l1_refined: f64,
    pub r_l2_refined: f64,
    pub relative_delta_l1: f64,
    pub relative_delta_l2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralSummary {
    pub l1: SpectralEstimate,
    /// L₂ restricted to the window nodes.
    pub l2: SpectralEstimate,
    pub lbar: Option<SpectralEstimate>,
    pub lbar_error: Option<String>,
    pub m_tilde: Option<f64>,
    pub m_tilde_error: Option<String>,
    pub doubling: Option<DoublingDeltas>,
}

impl SpectralSummary {
    pub fn window_condition_holds(&self) -> bool {
        self.m_tilde.is_some() && self.lbar.is_some()
    }
}

fn relative_delta(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

pub fn l1_and_l2(p: &ProblemSpec, disc: &Discretization, cfg: &SpectralConfig) -> Result<(SpectralEstimate, SpectralEstimate)> {
    let l1 = assemble_l1(p, &disc.grid, &disc.rule)?;
    let l2 = assemble_l2_on_window(p, &disc.rule_a)?;
    Ok((
        power_iteration(&l1, cfg.tol, cfg.max_iter, cfg.seed)?,
        power_iteration(&l2, cfg.tol, cfg.max_iter, cfg.seed)?,
    ))
}

/// Spectral data of one discretization, optionally repeated at twice the
/// resolution.
pub fn analyze_spectrum(
    p: &ProblemSpec,
    disc: &Discretization,
    cfg: &SpectralConfig,
    with_doubling: bool,
) -> Result<SpectralSummary> {
    let (l1, l2) = l1_and_l2(p, disc, cfg)?;
    let (lbar, lbar_error) = match assemble_lbar(p, &disc.rule_a) {
        Ok(op) => (Some(power_iteration(&op, cfg.tol, cfg.max_iter, cfg.seed)?), None),
        Err(e @ Error::SignViolation { .. }) => (None, Some(e.to_string())),
        Err(e) => return Err(e),
    };
    let (m_tilde, m_tilde_error) = match m_tilde(p, &disc.rule_a, cfg.probe_points) {
        Ok(v) => (Some(v), None),
        Err(e @ Error::NonPositiveInfimum { .. }) => (None, Some(e.to_string())),
        Err(e) => return Err(e),
    };
    let doubling = if with_doubling {
        let grid = disc.grid.refined(2)?;
        let mut fine = Discretization::from_grid(p, std::sync::Arc::new(grid), disc.rule_a.order() * 2)?;
        fine.rule_a = compact_rule(&p.window, disc.rule_a.order() * 2)?;
        let (f1, f2) = l1_and_l2(p, &fine, cfg)?;
        Some(DoublingDeltas {
            nodes: disc.grid.len(),
            nodes_refined: fine.grid.len(),
            r_l1_refined: f1.radius,
            r_l2_refined: f2.radius,
            relative_delta_l1: relative_delta(l1.radius, f1.radius),
            relative_delta_l2: relative_delta(l2.radius, f2.radius),
        })
    } else {
        None
    };
    Ok(SpectralSummary {
        l1,
        l2,
        lbar,
        lbar_error,
        m_tilde,
        m_tilde_error,
        doubling,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::operators::OperatorTag;
    use crate::weighted_space::IntervalUnion;
    use std::sync::Arc;

    fn square(m: DMatrix<f64>) -> NystromOperator {
        let n = m.nrows();
        let rule = compact_rule(&IntervalUnion::single(0.0, 1.0).unwrap(), n.max(4)).unwrap();
        NystromOperator {
            matrix: m,
            rows: vec![0.0; n],
            rule,
            tag: OperatorTag::L1,
        }
    }

    #[test]
    fn diagonal_matrix_radius() {
        let op = square(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, 1.0, 0.5])));
        let est = power_iteration(&op, 1e-12, 10_000, 1).unwrap();
        assert!(est.converged);
        assert!((est.radius - 3.0).abs() < 1e-10);
        assert!((est.char_value * est.radius - 1.0).abs() < 1e-15);
        assert!(est.cw_lower <= est.radius && est.radius <= est.cw_upper);
    }

    #[test]
    fn zero_matrix_gives_trivial_bracket() {
        let est = power_iteration(&square(DMatrix::zeros(4, 4)), 1e-10, 100, 0).unwrap();
        assert_eq!((est.radius, est.cw_lower, est.cw_upper), (0.0, 0.0, 0.0));
        assert_eq!(est.char_value, f64::INFINITY);
    }

    #[test]
    fn rectangular_matrix_is_rejected() {
        let m = DMatrix::from_element(3, 2, 1.0);
        assert!(matches!(power_iteration_matrix(&m, 1e-10, 10, 0), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn bracket_examples_on_diagonal() {
        let op = square(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, 1.0])));
        assert!(collatz_wielandt_bounds(&op, &[1.0, 0.0]).is_err());
        let (lo, hi) = collatz_wielandt_bounds(&op, &[1.0, 1e-3]).unwrap();
        assert!(lo <= 3.0 && 3.0 <= hi);
    }

    #[test]
    fn sine_exp_spectral_values() {
        let p = catalog::get("sine_exp").unwrap().problem;
        let disc = Discretization::new(&p, 400, 64).unwrap();
        let cfg = SpectralConfig::default();
        let (l1, l2) = l1_and_l2(&p, &disc, &cfg).unwrap();
        let r1 = catalog::r_l1_closed_form();
        assert!(((l1.radius - r1) / r1).abs() < 1e-5, "{}", l1.radius);
        assert!((l2.radius - catalog::r_l2_closed_form()).abs() < 1e-10, "{}", l2.radius);

        let l1_op = assemble_l1(&p, &disc.grid, &disc.rule).unwrap();
        let (lo, hi) = collatz_wielandt_bounds(&l1_op, &vec![1.0; disc.grid.len()]).unwrap();
        assert!(lo <= r1 && r1 <= hi);
        let (lo, hi) = collatz_wielandt_bounds(&l1_op, &l1.eigenvector).unwrap();
        assert!(hi - lo < 1e-6 * l1.radius);
    }

    #[test]
    fn m_tilde_examples() {
        let p = catalog::get("sine_exp").unwrap().problem;
        let rule_a = compact_rule(&p.window, 64).unwrap();
        let inv = 1.0 / m_tilde(&p, &rule_a, DEFAULT_PROBE_POINTS).unwrap();
        assert!((inv - catalog::m_tilde_inv_closed_form()).abs() < 1e-12);

        let mut unit = p.clone();
        unit.kernel = Arc::new(|_, _| 1.0);
        unit.window = IntervalUnion::single(0.0, 1.0).unwrap();
        let rule = compact_rule(&unit.window, 8).unwrap();
        assert!((m_tilde(&unit, &rule, 257).unwrap() - 1.0).abs() < 1e-14);

        let mut vanishing = p;
        vanishing.kernel = Arc::new(|_, _| 0.0);
        assert!(matches!(
            m_tilde(&vanishing, &rule_a, 257),
            Err(Error::NonPositiveInfimum { .. })
        ));
    }

    #[test]
    fn lbar_dominates_restricted_l2() {
        let p = catalog::get("sine_exp").unwrap().problem;
        let disc = Discretization::new(&p, 200, 32).unwrap();
        let s = analyze_spectrum(&p, &disc, &SpectralConfig::default(), false).unwrap();
        let lbar = s.lbar.unwrap();
        assert!(lbar.radius >= s.l2.radius - 1e-8);
    }
}
