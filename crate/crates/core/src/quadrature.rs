//! Gauss–Legendre rules on the compactified real line and on finite unions
//! of compact intervals.
//!
//! Real-line rules are built from a [`CompactGrid`]: the grid's τ-nodes carry
//! Legendre weights, and the Jacobian of `t = L·τ/(1−τ²)` turns them into
//! weights for `∫_ℝ g(t) dt`. Because the rule nodes are exactly the grid
//! nodes, Nyström matrices assembled from a grid and its rule are square.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::weighted_space::{CompactGrid, IntervalUnion};

const NEWTON_MAX_ITER: usize = 100;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`,
/// nodes in increasing order.
///
/// Nodes are found by Newton's method on the three-term recurrence, starting
/// from Tricomi's asymptotic guess; the cost is `O(n²)` which keeps rules of a
/// few thousand nodes cheap.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    if n == 0 {
        return (nodes, weights);
    }
    let nf = n as f64;
    let m = n.div_ceil(2);
    for i in 0..m {
        let theta = std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5);
        let mut x = theta.cos();
        let mut dp = 0.0;
        for _ in 0..NEWTON_MAX_ITER {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d.is_finite() {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // descending from the right end, mirrored on the left
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let dp = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainTag {
    RealLine,
    CompactUnion,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    domain: DomainTag,
    order: usize,
}

impl QuadratureRule {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn domain(&self) -> DomainTag {
        self.domain
    }

    /// Number of Gauss points per panel (real line: total node count).
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }
}

/// Real-line rule whose nodes are the interior nodes of `grid`.
pub fn real_line_rule(grid: &CompactGrid) -> QuadratureRule {
    let scale = grid.map_scale();
    let weights = grid
        .nodes_tau()
        .iter()
        .zip(grid.tau_weights())
        .map(|(&tau, &w)| {
            let d = 1.0 - tau * tau;
            w * scale * (1.0 + tau * tau) / (d * d)
        })
        .collect();
    QuadratureRule {
        nodes: grid.nodes_t().to_vec(),
        weights,
        domain: DomainTag::RealLine,
        order: grid.len(),
    }
}

/// Per-interval Gauss–Legendre rule of `points_per_interval` points,
/// concatenated in interval order.
pub fn compact_rule(intervals: &IntervalUnion, points_per_interval: usize) -> Result<QuadratureRule> {
    if points_per_interval < 4 {
        return Err(Error::invalid(
            "points_per_interval",
            format!("need at least 4, got {points_per_interval}"),
        ));
    }
    let (x, w) = gauss_legendre(points_per_interval);
    let mut nodes = Vec::with_capacity(intervals.len() * points_per_interval);
    let mut weights = Vec::with_capacity(nodes.capacity());
    for &(a, b) in intervals.intervals() {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (xi, wi) in x.iter().zip(&w) {
            // clamp guards the endpoints against rounding of mid + half·x
            nodes.push((mid + half * xi).clamp(a, b));
            weights.push(half * wi);
        }
    }
    Ok(QuadratureRule {
        nodes,
        weights,
        domain: DomainTag::CompactUnion,
        order: points_per_interval,
    })
}

/// Weighted sum `Σ wᵢ g(xᵢ)`, accumulated left to right over node index.
///
/// A non-finite integrand value aborts with the offending node index.
pub fn integrate<F>(rule: &QuadratureRule, integrand: F) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let mut acc = 0.0;
    for (index, (x, w)) in rule.iter().enumerate() {
        let value = integrand(x);
        if !value.is_finite() {
            return Err(Error::NonFinite {
                context: "integrand",
                index,
                t: x,
                s: x,
                value,
            });
        }
        acc += w * value;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weighted_space::build_grid;
    use std::f64::consts::{FRAC_PI_4, PI};

    #[test]
    fn legendre_rule_small_orders() {
        let (x, w) = gauss_legendre(2);
        let r = 1.0 / 3f64.sqrt();
        assert!((x[0] + r).abs() < 1e-15 && (x[1] - r).abs() < 1e-15);
        assert!((w[0] - 1.0).abs() < 1e-15 && (w[1] - 1.0).abs() < 1e-15);

        let (x, w) = gauss_legendre(5);
        assert_eq!(x[2], 0.0);
        assert!((w[2] - 128.0 / 225.0).abs() < 1e-15);
        assert!((x[4] - (5.0 + 2.0 * (10.0f64 / 7.0).sqrt()).sqrt() / 3.0).abs() < 1e-15);
    }

    #[test]
    fn legendre_weights_sum_to_two_for_large_orders() {
        for n in [8, 64, 401, 1600] {
            let (x, w) = gauss_legendre(n);
            let total: f64 = w.iter().sum();
            assert!((total - 2.0).abs() < 1e-13, "n = {n}: {total}");
            assert!(x.windows(2).all(|p| p[0] < p[1]));
            assert!(w.iter().all(|&wi| wi > 0.0));
        }
    }

    #[test]
    fn compact_rule_is_exact_for_cubics() {
        let a = IntervalUnion::new(vec![(0.0, 1.0)]).unwrap();
        let rule = compact_rule(&a, 4).unwrap();
        let v = integrate(&rule, |s| s * s * s).unwrap();
        assert!((v - 0.25).abs() < 1e-15);
        // degree 7 is the exactness limit of 4 points
        let v = integrate(&rule, |s| s.powi(7)).unwrap();
        assert!((v - 0.125).abs() < 1e-15);
    }

    #[test]
    fn compact_rule_examples() {
        let a = IntervalUnion::new(vec![(FRAC_PI_4, 3.0 * FRAC_PI_4)]).unwrap();
        let rule = compact_rule(&a, 32).unwrap();
        let v = integrate(&rule, f64::sin).unwrap();
        assert!((v - 2f64.sqrt()).abs() < 1e-12);

        let two = IntervalUnion::new(vec![(0.0, 1.0), (2.0, 3.0)]).unwrap();
        let rule = compact_rule(&two, 8).unwrap();
        assert!((integrate(&rule, |_| 1.0).unwrap() - 2.0).abs() < 1e-14);
        assert!(rule.nodes().iter().all(|&s| two.contains(s)));
    }

    #[test]
    fn compact_rule_rejects_too_few_points() {
        let a = IntervalUnion::new(vec![(0.0, 1.0)]).unwrap();
        assert!(compact_rule(&a, 3).is_err());
    }

    #[test]
    fn integrate_reports_non_finite_node() {
        let a = IntervalUnion::new(vec![(-1.0, 1.0)]).unwrap();
        let rule = compact_rule(&a, 6).unwrap();
        let err = integrate(&rule, |s| if s > 0.9 { f64::NAN } else { 1.0 }).unwrap_err();
        match err {
            Error::NonFinite { index, .. } => assert_eq!(index, 5),
            other => panic!("unexpected error {other:?}"),
        }
        assert_eq!(integrate(&rule, |_| 0.0).unwrap(), 0.0);
    }

    #[test]
    fn plain_real_line_rule_handles_smooth_integrands() {
        let grid = build_grid(1.0, 400, &[]).unwrap();
        let rule = real_line_rule(&grid);
        let g = integrate(&rule, |s| (-s * s).exp()).unwrap();
        assert!((g - PI.sqrt()).abs() < 1e-10);
        let odd = integrate(&rule, |s| s * (-s * s).exp()).unwrap();
        assert!(odd.abs() < 1e-12);
        assert!(rule.weights().iter().all(|&w| w > 0.0));
    }
}
