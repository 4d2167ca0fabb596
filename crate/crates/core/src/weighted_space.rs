//! Functions on ℝ with a continuous φ-extension to [−∞, +∞].
//!
//! A function `u` is stored through `ũ = u/φ` sampled on a grid of the
//! compactified line, plus the two limits `ũ(±∞)`. The compactification is
//! the algebraic map `t = L·τ/(1−τ²)`, a strictly increasing bijection from
//! (−1, 1) onto ℝ.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;

/// Default tolerance for membership in the cone `{α ≥ 0}`.
pub const MEMBERSHIP_TOLERANCE: f64 = 1e-9;

/// Smallest number of Gauss points placed in any grid panel.
pub const MIN_PANEL_NODES: usize = 6;

/// Nodes closer than this to an excluded point get shifted.
const EXCLUSION_RADIUS: f64 = 1e-9;

/// Points per interval when the window has to be densified by interpolation.
const DENSIFY_POINTS: usize = 33;

/// `t = L·τ/(1−τ²)`; τ = ±1 map to ±∞.
pub fn tau_to_t(tau: f64, map_scale: f64) -> f64 {
    if tau >= 1.0 {
        f64::INFINITY
    } else if tau <= -1.0 {
        f64::NEG_INFINITY
    } else {
        map_scale * tau / ((1.0 - tau) * (1.0 + tau))
    }
}

/// Inverse of [`tau_to_t`], in the cancellation-free form
/// `τ = 2x / (1 + √(1 + 4x²))` with `x = t/L`.
pub fn t_to_tau(t: f64, map_scale: f64) -> f64 {
    if t == f64::INFINITY {
        return 1.0;
    }
    if t == f64::NEG_INFINITY {
        return -1.0;
    }
    let x = t / map_scale;
    let ax = x.abs();
    if ax <= 0.5 {
        return 2.0 * x / (1.0 + (1.0 + 4.0 * x * x).sqrt());
    }
    // 1 − |τ| formed without cancellation so that τ is correctly rounded
    // near the poles
    let root = if ax > 1e150 { 2.0 * ax } else { (1.0 + 4.0 * ax * ax).sqrt() };
    let gap = (1.0 + 1.0 / (root + 2.0 * ax)) / (1.0 + root);
    x.signum() * (1.0 - gap)
}

/// Finite union of disjoint compact intervals, stored sorted.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntervalUnion {
    intervals: Vec<(f64, f64)>,
}

impl IntervalUnion {
    pub fn new(mut intervals: Vec<(f64, f64)>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::InvalidIntervals("empty union".into()));
        }
        for &(a, b) in &intervals {
            if !a.is_finite() || !b.is_finite() {
                return Err(Error::InvalidIntervals(format!("[{a}, {b}] is not finite")));
            }
            if b <= a {
                return Err(Error::InvalidIntervals(format!("[{a}, {b}] has no positive length")));
            }
        }
        intervals.sort_by(|x, y| x.0.total_cmp(&y.0));
        for pair in intervals.windows(2) {
            if pair[1].0 <= pair[0].1 {
                return Err(Error::InvalidIntervals(format!(
                    "[{}, {}] and [{}, {}] overlap",
                    pair[0].0, pair[0].1, pair[1].0, pair[1].1
                )));
            }
        }
        Ok(Self { intervals })
    }

    pub fn single(a: f64, b: f64) -> Result<Self> {
        Self::new(vec![(a, b)])
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn contains(&self, t: f64) -> bool {
        self.intervals.iter().any(|&(a, b)| a <= t && t <= b)
    }

    pub fn total_length(&self) -> f64 {
        self.intervals.iter().map(|(a, b)| b - a).sum()
    }

    /// `points` equispaced probes per interval, endpoints included.
    pub fn equispaced(&self, points: usize) -> Vec<f64> {
        let points = points.max(2);
        self.intervals
            .iter()
            .flat_map(|&(a, b)| {
                (0..points).map(move |k| {
                    if k + 1 == points {
                        b
                    } else {
                        a + (b - a) * k as f64 / (points - 1) as f64
                    }
                })
            })
            .collect()
    }
}

impl fmt::Display for IntervalUnion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.intervals.iter().map(|(a, b)| format!("[{a}, {b}]")).collect();
        f.write_str(&parts.join(" ∪ "))
    }
}

/// Interior nodes of the compactified line. The two boundary points τ = ±1
/// (t = ±∞) are implicit: every [`WeightedFunction`] carries its values there.
#[derive(Debug, Clone, PartialEq)]
pub struct CompactGrid {
    map_scale: f64,
    nodes_tau: Vec<f64>,
    nodes_t: Vec<f64>,
    tau_weights: Vec<f64>,
    excluded: Vec<f64>,
    breakpoints: Vec<f64>,
}

impl CompactGrid {
    pub fn map_scale(&self) -> f64 {
        self.map_scale
    }

    pub fn nodes_tau(&self) -> &[f64] {
        &self.nodes_tau
    }

    pub fn nodes_t(&self) -> &[f64] {
        &self.nodes_t
    }

    /// Legendre weights attached to the τ-nodes.
    pub fn tau_weights(&self) -> &[f64] {
        &self.tau_weights
    }

    pub fn excluded_points(&self) -> &[f64] {
        &self.excluded
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// The boundary nodes τ = ±1 are always represented.
    pub fn includes_infinities(&self) -> bool {
        true
    }

    pub fn len(&self) -> usize {
        self.nodes_t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes_t.is_empty()
    }

    pub fn t_of(&self, tau: f64) -> f64 {
        tau_to_t(tau, self.map_scale)
    }

    pub fn tau_of(&self, t: f64) -> f64 {
        t_to_tau(t, self.map_scale)
    }

    /// Range of t covered by interior nodes.
    pub fn resolved_range(&self) -> (f64, f64) {
        (self.nodes_t[0], self.nodes_t[self.len() - 1])
    }

    /// The same construction with `factor` times as many nodes.
    pub fn refined(&self, factor: usize) -> Result<CompactGrid> {
        build_panel_grid(self.map_scale, self.len() * factor, &self.excluded, &self.breakpoints)
    }
}

/// Plain Gauss–Legendre grid of order `n_interior` on (−1, 1).
pub fn build_grid(map_scale: f64, n_interior: usize, excluded: &[f64]) -> Result<CompactGrid> {
    build_panel_grid(map_scale, n_interior, excluded, &[])
}

/// Composite Gauss–Legendre grid: the τ-interval is cut at the images of
/// `breakpoints` and each panel gets its own rule. Node counts follow the
/// arcsine measure of the panel (the density of a single global rule), so the
/// tails keep their clustering; every panel gets at least
/// [`MIN_PANEL_NODES`] and the total is exactly `n_interior`.
pub fn build_panel_grid(
    map_scale: f64,
    n_interior: usize,
    excluded: &[f64],
    breakpoints: &[f64],
) -> Result<CompactGrid> {
    if n_interior < 8 {
        return Err(Error::invalid("n_interior", format!("need at least 8 nodes, got {n_interior}")));
    }
    if !map_scale.is_finite() || map_scale <= 0.0 {
        return Err(Error::invalid("map_scale", format!("must be finite and positive, got {map_scale}")));
    }
    if excluded.iter().chain(breakpoints).any(|x| !x.is_finite()) {
        return Err(Error::invalid("excluded/breakpoints", "points must be finite"));
    }

    let mut cuts: Vec<f64> = breakpoints.iter().map(|&b| t_to_tau(b, map_scale)).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut edges = Vec::with_capacity(cuts.len() + 2);
    edges.push(-1.0);
    edges.extend(cuts.into_iter().filter(|&c| c > -1.0 && c < 1.0));
    edges.push(1.0);
    let panels = edges.len() - 1;
    if n_interior < MIN_PANEL_NODES * panels {
        return Err(Error::invalid(
            "n_interior",
            format!("{n_interior} nodes cannot fill {panels} panels with {MIN_PANEL_NODES} each"),
        ));
    }

    let counts = allocate_panel_counts(&edges, n_interior);
    let mut nodes_tau = Vec::with_capacity(n_interior);
    let mut tau_weights = Vec::with_capacity(n_interior);
    for (p, &count) in counts.iter().enumerate() {
        let (a, b) = (edges[p], edges[p + 1]);
        let (x, w) = gauss_legendre(count);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (xi, wi) in x.iter().zip(&w) {
            nodes_tau.push(mid + half * xi);
            tau_weights.push(half * wi);
        }
    }

    shift_away_from(&mut nodes_tau, excluded, map_scale);
    let nodes_t: Vec<f64> = nodes_tau.iter().map(|&tau| tau_to_t(tau, map_scale)).collect();

    let mut excluded = excluded.to_vec();
    excluded.sort_by(f64::total_cmp);
    let mut breakpoints = breakpoints.to_vec();
    breakpoints.sort_by(f64::total_cmp);
    breakpoints.dedup();

    Ok(CompactGrid {
        map_scale,
        nodes_tau,
        nodes_t,
        tau_weights,
        excluded,
        breakpoints,
    })
}

fn allocate_panel_counts(edges: &[f64], total: usize) -> Vec<usize> {
    let raw: Vec<f64> = edges
        .windows(2)
        .map(|e| (e[1].asin() - e[0].asin()) / std::f64::consts::PI * total as f64)
        .collect();
    let mut counts: Vec<usize> = raw.iter().map(|&r| (r.floor() as usize).max(MIN_PANEL_NODES)).collect();
    let mut assigned: usize = counts.iter().sum();

    // largest-remainder adjustment, ties broken by panel index
    while assigned < total {
        let i = (0..counts.len())
            .max_by(|&a, &b| (raw[a] - counts[a] as f64).total_cmp(&(raw[b] - counts[b] as f64)).then(b.cmp(&a)))
            .expect("at least one panel");
        counts[i] += 1;
        assigned += 1;
    }
    while assigned > total {
        let i = (0..counts.len())
            .filter(|&i| counts[i] > MIN_PANEL_NODES)
            .max_by(|&a, &b| (counts[a] as f64 - raw[a]).total_cmp(&(counts[b] as f64 - raw[b])).then(b.cmp(&a)))
            .expect("caller checked capacity");
        counts[i] -= 1;
        assigned -= 1;
    }
    counts
}

fn shift_away_from(nodes_tau: &mut [f64], excluded: &[f64], map_scale: f64) {
    for &e in excluded {
        let tau_e = t_to_tau(e, map_scale);
        for i in 0..nodes_tau.len() {
            let t = tau_to_t(nodes_tau[i], map_scale);
            if (t - e).abs() > EXCLUSION_RADIUS * e.abs().max(1.0) {
                continue;
            }
            let left = if i > 0 { nodes_tau[i] - nodes_tau[i - 1] } else { nodes_tau[i] + 1.0 };
            let right = if i + 1 < nodes_tau.len() { nodes_tau[i + 1] - nodes_tau[i] } else { 1.0 - nodes_tau[i] };
            if nodes_tau[i] >= tau_e {
                nodes_tau[i] += 0.25 * right;
            } else {
                nodes_tau[i] -= 0.25 * left;
            }
        }
    }
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// The weight φ: positive except at a finite list of points that grids avoid.
#[derive(Clone)]
pub struct Weight {
    label: String,
    eval: ScalarFn,
    exceptions: Vec<f64>,
}

impl fmt::Debug for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Weight")
            .field("label", &self.label)
            .field("exceptions", &self.exceptions)
            .finish()
    }
}

impl Weight {
    pub fn new<F>(label: impl Into<String>, eval: F, exceptions: Vec<f64>) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            label: label.into(),
            eval: Arc::new(eval),
            exceptions,
        }
    }

    /// φ(t) = √(1+t²).
    pub fn smooth() -> Self {
        Self::new("smooth", |t: f64| 1f64.hypot(t), Vec::new())
    }

    /// φ(t) = |t|, vanishing at the origin.
    pub fn abs_t() -> Self {
        Self::new("abs_t", f64::abs, vec![0.0])
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn positivity_exceptions(&self) -> &[f64] {
        &self.exceptions
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.eval)(t)
    }

    /// φ(t), rejecting points where it is not strictly positive.
    pub fn positive_at(&self, t: f64) -> Result<f64> {
        let v = self.eval(t);
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(Error::WeightNotPositive {
                label: self.label.clone(),
                t,
            })
        }
    }

    /// φ at every grid node, failing on the first non-positive value.
    pub fn on_grid(&self, grid: &CompactGrid) -> Result<Vec<f64>> {
        grid.nodes_t().iter().map(|&t| self.positive_at(t)).collect()
    }
}

/// Samples of `ũ = u/φ` on a grid plus the limits at ±∞.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedFunction {
    grid: Arc<CompactGrid>,
    values_tilde: Vec<f64>,
    minus_inf: f64,
    plus_inf: f64,
}

impl WeightedFunction {
    pub fn new(grid: Arc<CompactGrid>, values_tilde: Vec<f64>, minus_inf: f64, plus_inf: f64) -> Result<Self> {
        if values_tilde.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                found: values_tilde.len(),
            });
        }
        if let Some(index) = values_tilde.iter().position(|v| !v.is_finite()) {
            let t = grid.nodes_t()[index];
            return Err(Error::NonFinite {
                context: "weighted function value",
                index,
                t,
                s: t,
                value: values_tilde[index],
            });
        }
        if !minus_inf.is_finite() || !plus_inf.is_finite() {
            return Err(Error::invalid("limits at infinity", "must be finite"));
        }
        Ok(Self {
            grid,
            values_tilde,
            minus_inf,
            plus_inf,
        })
    }

    /// Node values with the limits at ±∞ extrapolated linearly in τ from the
    /// two outermost nodes on each side.
    pub fn with_extrapolated_limits(grid: Arc<CompactGrid>, values_tilde: Vec<f64>) -> Result<Self> {
        let (minus, plus) = extrapolate_limits(&grid, &values_tilde);
        Self::new(grid, values_tilde, minus, plus)
    }

    /// `ũ ≡ c`, limits included.
    pub fn constant(grid: Arc<CompactGrid>, c: f64) -> Self {
        let n = grid.len();
        Self {
            grid,
            values_tilde: vec![c; n],
            minus_inf: c,
            plus_inf: c,
        }
    }

    pub fn zero(grid: Arc<CompactGrid>) -> Self {
        Self::constant(grid, 0.0)
    }

    /// Samples `u/φ` of a function given in ordinary coordinates.
    pub fn from_u<F>(grid: Arc<CompactGrid>, weight: &Weight, u: F) -> Result<Self>
    where
        F: Fn(f64) -> f64,
    {
        let values = grid
            .nodes_t()
            .iter()
            .map(|&t| Ok(u(t) / weight.positive_at(t)?))
            .collect::<Result<Vec<_>>>()?;
        Self::with_extrapolated_limits(grid, values)
    }

    pub fn grid(&self) -> &Arc<CompactGrid> {
        &self.grid
    }

    pub fn values_tilde(&self) -> &[f64] {
        &self.values_tilde
    }

    pub fn value_at_minus_inf(&self) -> f64 {
        self.minus_inf
    }

    pub fn value_at_plus_inf(&self) -> f64 {
        self.plus_inf
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            grid: Arc::clone(&self.grid),
            values_tilde: self.values_tilde.iter().map(|v| a * v).collect(),
            minus_inf: a * self.minus_inf,
            plus_inf: a * self.plus_inf,
        }
    }

    /// `a·self + b·other` on a shared grid.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        if !same_grid(&self.grid, &other.grid) {
            return Err(Error::GridMismatch);
        }
        Ok(Self {
            grid: Arc::clone(&self.grid),
            values_tilde: self
                .values_tilde
                .iter()
                .zip(&other.values_tilde)
                .map(|(x, y)| a * x + b * y)
                .collect(),
            minus_inf: a * self.minus_inf + b * other.minus_inf,
            plus_inf: a * self.plus_inf + b * other.plus_inf,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(1.0, other, -1.0)
    }

    /// Piecewise-linear interpolant of ũ in τ, with knots at the grid nodes
    /// and at τ = ±1.
    pub fn interp_tilde(&self, tau: f64) -> f64 {
        let taus = self.grid.nodes_tau();
        let n = taus.len();
        if tau <= -1.0 {
            return self.minus_inf;
        }
        if tau >= 1.0 {
            return self.plus_inf;
        }
        let k = taus.partition_point(|&x| x < tau);
        if k < n && taus[k] == tau {
            return self.values_tilde[k];
        }
        let (t0, v0, t1, v1) = match k {
            0 => (-1.0, self.minus_inf, taus[0], self.values_tilde[0]),
            k if k == n => (taus[n - 1], self.values_tilde[n - 1], 1.0, self.plus_inf),
            k => (taus[k - 1], self.values_tilde[k - 1], taus[k], self.values_tilde[k]),
        };
        v0 + (v1 - v0) * (tau - t0) / (t1 - t0)
    }

    /// Largest |u(tᵢ)| = |φ(tᵢ)·ũᵢ| over the grid nodes.
    pub fn sup_abs_u(&self, phi_nodes: &[f64]) -> f64 {
        self.values_tilde
            .iter()
            .zip(phi_nodes)
            .fold(0.0, |m, (v, p)| m.max((v * p).abs()))
    }
}

pub(crate) fn same_grid(a: &Arc<CompactGrid>, b: &Arc<CompactGrid>) -> bool {
    Arc::ptr_eq(a, b) || a.nodes_t() == b.nodes_t()
}

pub(crate) fn extrapolate_limits(grid: &CompactGrid, values: &[f64]) -> (f64, f64) {
    let taus = grid.nodes_tau();
    let n = taus.len();
    if n < 2 {
        let v = values.first().copied().unwrap_or(0.0);
        return (v, v);
    }
    // Oscillating tails (sin t/φ near τ = ±1) make the last secant useless;
    // an extrapolant that crosses zero is clamped to the zero limit.
    let extrapolate = |ta: f64, va: f64, tb: f64, vb: f64, target: f64| {
        let e = vb + (vb - va) * (target - tb) / (tb - ta);
        if e * vb > 0.0 {
            e
        } else {
            0.0
        }
    };
    let minus = extrapolate(taus[1], values[1], taus[0], values[0], -1.0);
    let plus = extrapolate(taus[n - 2], values[n - 2], taus[n - 1], values[n - 1], 1.0);
    (minus, plus)
}

/// ‖u‖_φ = sup |ũ| over the grid nodes and the two limits.
pub fn phi_norm(u: &WeightedFunction) -> f64 {
    u.values_tilde
        .iter()
        .fold(u.minus_inf.abs().max(u.plus_inf.abs()), |m, v| m.max(v.abs()))
}

/// `u(t) = φ(t)·ũ(τ(t))` with ũ interpolated piecewise-linearly in τ.
pub fn evaluate_u(u: &WeightedFunction, t: f64, weight: &Weight) -> Result<f64> {
    if !t.is_finite() {
        return Err(Error::invalid("t", format!("must be finite, got {t}")));
    }
    if weight.positivity_exceptions().contains(&t) {
        return Err(Error::WeightNotPositive {
            label: weight.label().to_owned(),
            t,
        });
    }
    Ok(weight.eval(t) * u.interp_tilde(u.grid().tau_of(t)))
}

/// α(u) = min_{t∈A} u(t) − c·sup_t |u(t)|.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConeFunctional {
    window: IntervalUnion,
    coefficient: f64,
    description: String,
}

impl ConeFunctional {
    pub fn new(window: IntervalUnion, coefficient: f64, description: impl Into<String>) -> Result<Self> {
        if !(coefficient > 0.0 && coefficient <= 1.0) {
            return Err(Error::invalid("coefficient_c", format!("must lie in (0, 1], got {coefficient}")));
        }
        Ok(Self {
            window,
            coefficient,
            description: description.into(),
        })
    }

    pub fn window(&self) -> &IntervalUnion {
        &self.window
    }

    pub fn coefficient(&self) -> f64 {
        self.coefficient
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn contains(&self, u: &WeightedFunction, weight: &Weight) -> Result<bool> {
        Ok(cone_value(self, u, weight)? >= -MEMBERSHIP_TOLERANCE)
    }
}

/// Grid realization of α: the window minimum runs over grid nodes inside A,
/// the supremum over all grid nodes. Window intervals holding fewer than two
/// nodes are sampled at extra interpolated points, which then also enter the
/// supremum.
pub fn cone_value(alpha: &ConeFunctional, u: &WeightedFunction, weight: &Weight) -> Result<f64> {
    let grid = u.grid();
    let (lo, hi) = grid.resolved_range();
    let window = alpha.window();
    if window.intervals().iter().all(|&(a, b)| b < lo || a > hi) {
        return Err(Error::WindowOutsideGrid {
            window: window.to_string(),
            lo,
            hi,
        });
    }

    let mut sup = 0.0f64;
    let mut window_min = f64::INFINITY;
    let mut per_interval = vec![0usize; window.len()];
    for (&t, &v) in grid.nodes_t().iter().zip(u.values_tilde()) {
        let value = weight.eval(t) * v;
        sup = sup.max(value.abs());
        if let Some(k) = window.intervals().iter().position(|&(a, b)| a <= t && t <= b) {
            per_interval[k] += 1;
            window_min = window_min.min(value);
        }
    }
    for (k, &(a, b)) in window.intervals().iter().enumerate() {
        if per_interval[k] >= 2 {
            continue;
        }
        for j in 0..DENSIFY_POINTS {
            let t = a + (b - a) * j as f64 / (DENSIFY_POINTS - 1) as f64;
            let value = evaluate_u(u, t, weight)?;
            sup = sup.max(value.abs());
            window_min = window_min.min(value);
        }
    }
    Ok(window_min - alpha.coefficient() * sup)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyCheck {
    pub passed: bool,
    pub checked: usize,
    pub witness: Option<String>,
}

impl PropertyCheck {
    fn new() -> Self {
        Self {
            passed: true,
            checked: 0,
            witness: None,
        }
    }

    fn record(&mut self, ok: bool, witness: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok && self.passed {
            self.passed = false;
            self.witness = Some(witness());
        }
    }
}

/// Outcome of the sampled super-additivity, homogeneity and pointedness
/// checks of a cone functional.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyReport {
    pub samples: usize,
    pub seed: u64,
    pub superadditive: PropertyCheck,
    pub homogeneous: PropertyCheck,
    pub pointed: PropertyCheck,
    /// Samples where both α(u) ≥ 0 and α(−u) ≥ 0, i.e. where pointedness
    /// was actually exercised.
    pub pointed_premise_hits: usize,
}

impl PropertyReport {
    pub fn all_passed(&self) -> bool {
        self.superadditive.passed && self.homogeneous.passed && self.pointed.passed
    }
}

/// Draws `n_samples` random pairs of weighted functions with node values in
/// [−1, 1] and checks α(u+v) ≥ α(u)+α(v), α(λu) ≥ λα(u) for λ ∈ [0, 10], and
/// that α(u) ≥ 0, α(−u) ≥ 0 only for u = 0. Inequalities allow a rounding
/// slack of 1e−12 relative to the magnitudes involved.
pub fn check_p_properties(
    alpha: &ConeFunctional,
    weight: &Weight,
    grid: &Arc<CompactGrid>,
    n_samples: usize,
    seed: u64,
) -> Result<PropertyReport> {
    if n_samples < 100 {
        return Err(Error::invalid("n_samples", format!("need at least 100, got {n_samples}")));
    }
    let phi = weight.on_grid(grid)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let random_function = |rng: &mut ChaCha8Rng| {
        let values: Vec<f64> = (0..grid.len()).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let minus = rng.random_range(-1.0..=1.0);
        let plus = rng.random_range(-1.0..=1.0);
        WeightedFunction::new(Arc::clone(grid), values, minus, plus)
    };

    let mut superadditive = PropertyCheck::new();
    let mut homogeneous = PropertyCheck::new();
    let mut pointed = PropertyCheck::new();
    let mut premise_hits = 0;

    let zero = WeightedFunction::zero(Arc::clone(grid));
    let check_pointed = |u: &WeightedFunction, pointed: &mut PropertyCheck, hits: &mut usize| -> Result<()> {
        let a_pos = cone_value(alpha, u, weight)?;
        let a_neg = cone_value(alpha, &u.scaled(-1.0), weight)?;
        if a_pos >= 0.0 && a_neg >= 0.0 {
            *hits += 1;
            let size = u.sup_abs_u(&phi);
            pointed.record(size <= 1e-12, || format!("α(u) = {a_pos}, α(−u) = {a_neg} but sup|u| = {size}"));
        } else {
            pointed.record(true, String::new);
        }
        Ok(())
    };
    check_pointed(&zero, &mut pointed, &mut premise_hits)?;

    for _ in 0..n_samples {
        let u = random_function(&mut rng)?;
        let v = random_function(&mut rng)?;
        let lambda = rng.random_range(0.0..=10.0);

        let au = cone_value(alpha, &u, weight)?;
        let av = cone_value(alpha, &v, weight)?;
        let auv = cone_value(alpha, &u.add(&v)?, weight)?;
        let scale = 1.0 + u.sup_abs_u(&phi) + v.sup_abs_u(&phi);
        superadditive.record(auv >= au + av - 1e-12 * scale, || {
            format!("α(u+v) = {auv} < α(u)+α(v) = {}", au + av)
        });

        let alu = cone_value(alpha, &u.scaled(lambda), weight)?;
        homogeneous.record(alu >= lambda * au - 1e-12 * scale * (1.0 + lambda), || {
            format!("α(λu) = {alu} < λα(u) = {} for λ = {lambda}", lambda * au)
        });

        check_pointed(&u, &mut pointed, &mut premise_hits)?;
        // u and −u together: α(0) = 0 ≥ α(u) + α(−u)
        let sum = au + cone_value(alpha, &u.scaled(-1.0), weight)?;
        superadditive.record(0.0 >= sum - 1e-12 * scale, || format!("α(u)+α(−u) = {sum} > α(0) = 0"));
    }

    Ok(PropertyReport {
        samples: n_samples,
        seed,
        superadditive,
        homogeneous,
        pointed,
        pointed_premise_hits: premise_hits,
    })
}
