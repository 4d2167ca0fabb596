//! Problem definitions and their Nyström discretizations.
//!
//! Matrices act on weighted coordinates: `M·ũ ≈ (Lu)/φ` on the row nodes.
//! The exception is `L̄`, which lives on the window `A` in plain coordinates.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::{compact_rule, real_line_rule, DomainTag, QuadratureRule};
use crate::weighted_space::{
    build_panel_grid, same_grid, CompactGrid, ConeFunctional, IntervalUnion, Weight, WeightedFunction,
};

/// Tolerance on the sign of `k·η` over `A × A`.
pub const SIGN_TOLERANCE: f64 = 1e-12;

pub type Fn1 = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type Fn2 = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Everything that defines `u = ∫ k(t,s) η(s) f(s, u(s)) ds` together with
/// the data needed to audit it.
#[derive(Clone)]
pub struct ProblemSpec {
    pub label: String,
    /// k(t, s)
    pub kernel: Fn2,
    /// η(s)
    pub eta: Fn1,
    /// f(t, y)
    pub nonlinearity: Fn2,
    pub weight: Weight,
    pub window: IntervalUnion,
    pub cone: ConeFunctional,
    /// ω₀(s), the modulus weight of the continuity condition.
    pub modulus_weight: Fn1,
    /// φ_r(t) as a function of (t, r).
    pub caratheodory_bound: Fn2,
    /// Closed interval outside which the kernel is treated as zero. The whole
    /// line is `(−∞, ∞)`.
    pub support: (f64, f64),
    /// Kinks of the integrands in s; grids put panel edges there.
    pub breakpoints: Vec<f64>,
    pub map_scale: f64,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("label", &self.label)
            .field("weight", &self.weight)
            .field("window", &self.window)
            .field("cone", &self.cone)
            .field("support", &self.support)
            .field("breakpoints", &self.breakpoints)
            .field("map_scale", &self.map_scale)
            .finish_non_exhaustive()
    }
}

impl ProblemSpec {
    fn in_support(&self, x: f64) -> bool {
        self.support.0 <= x && x <= self.support.1
    }

    /// `k(t,s)·η(s)`, zero when either point leaves the support.
    pub fn k_eta(&self, t: f64, s: f64) -> f64 {
        if self.in_support(t) && self.in_support(s) {
            (self.kernel)(t, s) * (self.eta)(s)
        } else {
            0.0
        }
    }

    pub fn f(&self, t: f64, y: f64) -> f64 {
        (self.nonlinearity)(t, y)
    }

    pub fn with_weight(mut self, weight: Weight) -> Self {
        self.weight = weight;
        self
    }

    pub fn is_whole_line(&self) -> bool {
        self.support.0 == f64::NEG_INFINITY && self.support.1 == f64::INFINITY
    }
}

/// Grid, real-line rule on the grid nodes, compact rule on the window, and φ
/// at the grid nodes.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub grid: Arc<CompactGrid>,
    pub rule: QuadratureRule,
    pub rule_a: QuadratureRule,
    pub phi: Vec<f64>,
}

impl Discretization {
    pub fn new(p: &ProblemSpec, n_nodes: usize, nodes_per_interval: usize) -> Result<Self> {
        let grid = build_panel_grid(p.map_scale, n_nodes, p.weight.positivity_exceptions(), &p.breakpoints)?;
        Self::from_grid(p, Arc::new(grid), nodes_per_interval)
    }

    pub fn from_grid(p: &ProblemSpec, grid: Arc<CompactGrid>, nodes_per_interval: usize) -> Result<Self> {
        let rule = real_line_rule(&grid);
        let rule_a = compact_rule(&p.window, nodes_per_interval)?;
        let phi = p.weight.on_grid(&grid)?;
        Ok(Self { grid, rule, rule_a, phi })
    }

    /// Same problem at `factor` times the node count.
    pub fn refined(&self, p: &ProblemSpec, factor: usize) -> Result<Self> {
        let grid = self.grid.refined(factor)?;
        Self::from_grid(p, Arc::new(grid), self.rule_a.order())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OperatorTag {
    L1,
    L2,
    Lbar,
}

/// Dense discretization of a linear integral operator with nonnegative kernel.
#[derive(Debug, Clone)]
pub struct NystromOperator {
    pub matrix: DMatrix<f64>,
    /// t-coordinates of the rows.
    pub rows: Vec<f64>,
    /// Column nodes and weights.
    pub rule: QuadratureRule,
    pub tag: OperatorTag,
}

impl NystromOperator {
    pub fn is_square(&self) -> bool {
        self.matrix.is_square()
    }

    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: self.matrix.ncols(),
                found: v.len(),
            });
        }
        Ok(mat_vec(&self.matrix, v))
    }
}

/// Row-major `M·v` with a fixed left-to-right summation order.
pub(crate) fn mat_vec(m: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().zip(v).fold(0.0, |acc, (a, b)| acc + a * b))
        .collect()
}

fn checked(value: f64, context: &'static str, index: usize, t: f64, s: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite {
            context,
            index,
            t,
            s,
            value,
        })
    }
}

fn assemble_weighted<G>(
    p: &ProblemSpec,
    rows: &[f64],
    rule: &QuadratureRule,
    tag: OperatorTag,
    entry: G,
) -> Result<NystromOperator>
where
    G: Fn(f64) -> f64,
{
    let phi_rows = rows.iter().map(|&t| p.weight.positive_at(t)).collect::<Result<Vec<_>>>()?;
    let phi_cols = rule.nodes().iter().map(|&s| p.weight.positive_at(s)).collect::<Result<Vec<_>>>()?;
    let mut matrix = DMatrix::zeros(rows.len(), rule.len());
    for (i, &t) in rows.iter().enumerate() {
        for (j, (s, w)) in rule.iter().enumerate() {
            let ke = checked(p.k_eta(t, s), "kernel", i, t, s)?;
            matrix[(i, j)] = checked(entry(ke) * phi_cols[j] * w / phi_rows[i], "operator entry", i, t, s)?;
        }
    }
    Ok(NystromOperator {
        matrix,
        rows: rows.to_vec(),
        rule: rule.clone(),
        tag,
    })
}

/// `M[i][j] = |k(tᵢ,sⱼ)η(sⱼ)|·φ(sⱼ)wⱼ/φ(tᵢ)` on grid rows and real-line columns.
pub fn assemble_l1(p: &ProblemSpec, grid: &CompactGrid, rule: &QuadratureRule) -> Result<NystromOperator> {
    if rule.domain() != DomainTag::RealLine {
        return Err(Error::invalid("rule", "L1 needs a real-line rule"));
    }
    assemble_weighted(p, grid.nodes_t(), rule, OperatorTag::L1, f64::abs)
}

/// `M[i][j] = (k(tᵢ,sⱼ)η(sⱼ))⁺·φ(sⱼ)wⱼ/φ(tᵢ)`, rows on the grid and columns
/// on the window rule.
pub fn assemble_l2(p: &ProblemSpec, grid: &CompactGrid, rule_a: &QuadratureRule) -> Result<NystromOperator> {
    if rule_a.domain() != DomainTag::CompactUnion {
        return Err(Error::invalid("rule_a", "L2 needs a rule over the window"));
    }
    assemble_weighted(p, grid.nodes_t(), rule_a, OperatorTag::L2, |v| v.max(0.0))
}

/// The square part of `L₂` whose rows sit at the window nodes; its spectrum
/// is the one used for μ(L₂).
pub fn assemble_l2_on_window(p: &ProblemSpec, rule_a: &QuadratureRule) -> Result<NystromOperator> {
    if rule_a.domain() != DomainTag::CompactUnion {
        return Err(Error::invalid("rule_a", "L2 needs a rule over the window"));
    }
    assemble_weighted(p, rule_a.nodes(), rule_a, OperatorTag::L2, |v| v.max(0.0))
}

/// `L̄` on the window nodes in plain coordinates, `M[i][j] = k(tᵢ,sⱼ)η(sⱼ)wⱼ`.
/// Fails if `k·η` is negative somewhere on `A × A` beyond [`SIGN_TOLERANCE`].
pub fn assemble_lbar(p: &ProblemSpec, rule_a: &QuadratureRule) -> Result<NystromOperator> {
    let nodes = rule_a.nodes();
    let mut matrix = DMatrix::zeros(nodes.len(), nodes.len());
    for (i, &t) in nodes.iter().enumerate() {
        for (j, (s, w)) in rule_a.iter().enumerate() {
            let ke = checked(p.k_eta(t, s), "kernel", i, t, s)?;
            if ke < -SIGN_TOLERANCE {
                return Err(Error::SignViolation { t, s, value: ke });
            }
            matrix[(i, j)] = ke.max(0.0) * w;
        }
    }
    Ok(NystromOperator {
        matrix,
        rows: nodes.to_vec(),
        rule: rule_a.clone(),
        tag: OperatorTag::Lbar,
    })
}

/// The nonlinear operator `T` with its kernel part precomputed:
/// `K[i][j] = k(tᵢ,sⱼ)η(sⱼ)wⱼ/φ(tᵢ)`.
#[derive(Debug, Clone)]
pub struct HammersteinOperator {
    problem: ProblemSpec,
    grid: Arc<CompactGrid>,
    rule: QuadratureRule,
    kernel: DMatrix<f64>,
    /// Column j sits on grid node j, so u(sⱼ) needs no interpolation.
    aligned: bool,
}

impl HammersteinOperator {
    pub fn new(p: &ProblemSpec, grid: Arc<CompactGrid>, rule: &QuadratureRule) -> Result<Self> {
        if rule.domain() != DomainTag::RealLine {
            return Err(Error::invalid("rule", "T needs a real-line rule"));
        }
        let rows = grid.nodes_t();
        let mut kernel = DMatrix::zeros(rows.len(), rule.len());
        for (i, &t) in rows.iter().enumerate() {
            let phi_t = p.weight.positive_at(t)?;
            for (j, (s, w)) in rule.iter().enumerate() {
                kernel[(i, j)] = checked(p.k_eta(t, s), "kernel", i, t, s)? * w / phi_t;
            }
        }
        let aligned = rule.nodes() == grid.nodes_t();
        Ok(Self {
            problem: p.clone(),
            grid,
            rule: rule.clone(),
            kernel,
            aligned,
        })
    }

    pub fn from_discretization(p: &ProblemSpec, disc: &Discretization) -> Result<Self> {
        Self::new(p, Arc::clone(&disc.grid), &disc.rule)
    }

    pub fn grid(&self) -> &Arc<CompactGrid> {
        &self.grid
    }

    pub fn problem(&self) -> &ProblemSpec {
        &self.problem
    }

    /// `f(sⱼ, u(sⱼ))` at every column node.
    fn nonlinear_samples(&self, u: &WeightedFunction) -> Result<Vec<f64>> {
        let p = &self.problem;
        self.rule
            .nodes()
            .iter()
            .enumerate()
            .map(|(j, &s)| {
                let phi_s = p.weight.positive_at(s)?;
                let tilde = if self.aligned {
                    u.values_tilde()[j]
                } else {
                    u.interp_tilde(self.grid.tau_of(s))
                };
                let y = phi_s * tilde;
                checked(p.f(s, y), "nonlinearity", j, s, s)
            })
            .collect()
    }

    /// `(Tu)/φ` at the grid nodes, limits at ±∞ extrapolated linearly in τ.
    pub fn apply(&self, u: &WeightedFunction) -> Result<WeightedFunction> {
        if !same_grid(u.grid(), &self.grid) {
            return Err(Error::GridMismatch);
        }
        let fs = self.nonlinear_samples(u)?;
        let values = mat_vec(&self.kernel, &fs);
        WeightedFunction::with_extrapolated_limits(Arc::clone(&self.grid), values)
    }
}

/// One-shot application of `T`; repeated use should go through
/// [`HammersteinOperator`].
pub fn apply_t(p: &ProblemSpec, u: &WeightedFunction, rule: &QuadratureRule) -> Result<WeightedFunction> {
    HammersteinOperator::new(p, Arc::clone(u.grid()), rule)?.apply(u)
}

/// Points of a 10 × 10 lattice in (t, y) where f is negative or non-finite.
pub fn nonlinearity_spot_check(p: &ProblemSpec, grid: &CompactGrid) -> Vec<(f64, f64, f64)> {
    let nodes = grid.nodes_t();
    let ys = [-100.0, -10.0, -1.0, -0.1, -1e-3, 1e-3, 0.1, 1.0, 10.0, 100.0];
    let mut bad = Vec::new();
    for k in 0..10 {
        let t = nodes[(k * (nodes.len() - 1)) / 9];
        for &y in &ys {
            let v = p.f(t, y);
            if !(v >= 0.0 && v.is_finite()) {
                bad.push((t, y, v));
            }
        }
    }
    bad
}

/// Row t-values of an operator whose rows are grid nodes, as a function on
/// that grid.
pub fn operator_image(
    op: &NystromOperator,
    grid: &Arc<CompactGrid>,
    v: &[f64],
) -> Result<WeightedFunction> {
    if op.rows.as_slice() != grid.nodes_t() {
        return Err(Error::GridMismatch);
    }
    WeightedFunction::with_extrapolated_limits(Arc::clone(grid), op.apply(v)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::quadrature::compact_rule;

    fn sine_exp() -> ProblemSpec {
        catalog::get("sine_exp").unwrap().problem
    }

    fn with_kernel(mut p: ProblemSpec, k: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> ProblemSpec {
        p.kernel = Arc::new(k);
        p
    }

    #[test]
    fn zero_kernel_gives_zero_matrices() {
        let p = with_kernel(sine_exp(), |_, _| 0.0);
        let disc = Discretization::new(&p, 64, 16).unwrap();
        let l1 = assemble_l1(&p, &disc.grid, &disc.rule).unwrap();
        assert!(l1.matrix.iter().all(|&x| x == 0.0));
        assert_eq!(l1.matrix.shape(), (64, 64));
    }

    #[test]
    fn l1_entries_follow_the_definition() {
        let p = sine_exp();
        let disc = Discretization::new(&p, 100, 16).unwrap();
        let l1 = assemble_l1(&p, &disc.grid, &disc.rule).unwrap();
        for &(i, j) in &[(0, 0), (10, 57), (50, 50), (99, 3)] {
            let t = disc.grid.nodes_t()[i];
            let s = disc.rule.nodes()[j];
            let w = disc.rule.weights()[j];
            let expected = (-s.abs() / 2.0).exp() * t.sin().abs() * s.hypot(1.0) * w / t.hypot(1.0);
            assert!((l1.matrix[(i, j)] - expected).abs() <= 1e-14 * expected.abs().max(1e-300));
        }
    }

    #[test]
    fn l2_clips_negative_rows_and_matches_kernel_on_window() {
        let p = sine_exp();
        let disc = Discretization::new(&p, 200, 16).unwrap();
        let l2 = assemble_l2(&p, &disc.grid, &disc.rule_a).unwrap();
        assert_eq!(l2.matrix.shape(), (200, 16));
        for (i, &t) in disc.grid.nodes_t().iter().enumerate() {
            if t.sin() < 0.0 {
                assert!(l2.matrix.row(i).iter().all(|&x| x == 0.0));
            }
            if p.window.contains(t) {
                for (j, (s, w)) in disc.rule_a.iter().enumerate() {
                    let raw = (-s / 2.0).exp() * t.sin() * s.hypot(1.0) * w / t.hypot(1.0);
                    assert!((l2.matrix[(i, j)] - raw).abs() < 1e-15);
                }
            }
        }
        let clipped = with_kernel(p.clone(), |_, _| -1.0);
        let l2 = assemble_l2(&clipped, &disc.grid, &disc.rule_a).unwrap();
        assert!(l2.matrix.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn lbar_examples() {
        let p = sine_exp();
        let rule_a = compact_rule(&p.window, 16).unwrap();
        let lbar = assemble_lbar(&p, &rule_a).unwrap();
        assert!(lbar.matrix.iter().all(|&x| x > 0.0));

        let mut unit = with_kernel(p.clone(), |_, _| 1.0);
        unit.window = IntervalUnion::single(0.0, 1.0).unwrap();
        let rule = compact_rule(&unit.window, 8).unwrap();
        let m = assemble_lbar(&unit, &rule).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                assert_eq!(m.matrix[(i, j)], rule.weights()[j]);
            }
        }

        let negative = with_kernel(p, |t, s| if t > 1.5 && s > 1.5 { -0.1 } else { 1.0 });
        assert!(matches!(assemble_lbar(&negative, &rule_a), Err(Error::SignViolation { .. })));
    }

    #[test]
    fn t_of_zero_is_zero_and_rank_one_structure_holds() {
        let p = sine_exp();
        let disc = Discretization::new(&p, 400, 64).unwrap();
        let t_op = HammersteinOperator::from_discretization(&p, &disc).unwrap();
        let zero = WeightedFunction::zero(Arc::clone(&disc.grid));
        assert_eq!(crate::weighted_space::phi_norm(&t_op.apply(&zero).unwrap()), 0.0);

        let u = WeightedFunction::from_u(Arc::clone(&disc.grid), &p.weight, |t| 4.0 * t.sin()).unwrap();
        let tu = t_op.apply(&u).unwrap();
        // output ∝ sin t/φ(t): fit the ratio on a well-conditioned node
        let (k, _) = disc
            .grid
            .nodes_t()
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.sin().abs().total_cmp(&b.1.sin().abs()))
            .unwrap();
        let t_k = disc.grid.nodes_t()[k];
        let scale = tu.values_tilde()[k] * disc.phi[k] / t_k.sin();
        for (i, &t) in disc.grid.nodes_t().iter().enumerate() {
            let expected = scale * t.sin() / disc.phi[i];
            assert!((tu.values_tilde()[i] - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn nonnegative_data_gives_nonnegative_image() {
        let p = with_kernel(sine_exp(), |t, s| (-(t - s).powi(2)).exp());
        let disc = Discretization::new(&p, 128, 16).unwrap();
        let u = WeightedFunction::from_u(Arc::clone(&disc.grid), &p.weight, f64::cos).unwrap();
        let tu = apply_t(&p, &u, &disc.rule).unwrap();
        assert!(tu.values_tilde().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn l1_dominates_l2_on_shared_columns() {
        let p = sine_exp();
        let disc = Discretization::new(&p, 128, 16).unwrap();
        let l1_on_a = assemble_weighted(&p, disc.grid.nodes_t(), &disc.rule_a, OperatorTag::L1, f64::abs).unwrap();
        let l2 = assemble_l2(&p, &disc.grid, &disc.rule_a).unwrap();
        assert!(l1_on_a.matrix.iter().zip(l2.matrix.iter()).all(|(a, b)| a >= b));
    }

    #[test]
    fn grid_mismatch_is_rejected() {
        let p = sine_exp();
        let disc = Discretization::new(&p, 64, 16).unwrap();
        let other = Discretization::new(&p, 80, 16).unwrap();
        let t_op = HammersteinOperator::from_discretization(&p, &disc).unwrap();
        let u = WeightedFunction::zero(Arc::clone(&other.grid));
        assert!(matches!(t_op.apply(&u), Err(Error::GridMismatch)));
    }
}
