//! Built-in problems and their reference constants.
//!
//! * `sine_exp`: `k(t,s) = a·e^{−b|s|} sin t`, `η ≡ 1`, `f(t,y) = √|y|·sin²t`,
//!   window `[π/4, 3π/4]`, cone coefficient `√2/2`.
//! * `linear_probe`: the same kernel with `f(t,y) = |y|`.
//! * `rocket`: `k(t,s) = a·(t−s)⁺` on the half-line, `f(t,y) = −gR²/(y+R)²`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, SQRT_2};
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::operators::ProblemSpec;
use crate::weighted_space::{ConeFunctional, IntervalUnion, Weight};

pub const PROBLEM_IDS: [&str; 3] = ["sine_exp", "rocket", "linear_probe"];

const GRAVITY: f64 = 9.8;
const EARTH_RADIUS: f64 = 6.371e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// Stated in closed form in the literature on this example.
    Published,
    /// Immediate from the definitions.
    Analytic,
    /// Computed from an independent closed form or quadrature.
    Oracle,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReferenceValue {
    pub name: &'static str,
    pub value: f64,
    pub provenance: Provenance,
    pub formula: &'static str,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightChoice {
    Smooth,
    AbsT,
}

impl WeightChoice {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "smooth" => Ok(Self::Smooth),
            "abs_t" => Ok(Self::AbsT),
            other => Err(Error::invalid("weight", format!("unknown weight `{other}` (smooth, abs_t)"))),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Smooth => "smooth",
            Self::AbsT => "abs_t",
        }
    }

    pub fn weight(self) -> Weight {
        match self {
            Self::Smooth => Weight::smooth(),
            Self::AbsT => Weight::abs_t(),
        }
    }
}

/// Tunable parameters of a catalog problem. `None` means the built-in value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProblemParams {
    pub id: String,
    pub weight: Option<WeightChoice>,
    pub amplitude: Option<f64>,
    pub decay_rate: Option<f64>,
    pub window: Option<(f64, f64)>,
    pub cone_coefficient: Option<f64>,
    pub map_scale: Option<f64>,
}

impl ProblemParams {
    pub fn new(id: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            weight: None,
            amplitude: None,
            decay_rate: None,
            window: None,
            cone_coefficient: None,
            map_scale: None,
        }
    }

    pub fn is_default(&self) -> bool {
        *self == Self::new(self.id.clone())
    }

    /// `key = value` lines for the command-line config format. Only
    /// explicitly set parameters are written, so parsing the text back gives
    /// an identical value.
    pub fn to_config(&self) -> String {
        let mut out = format!("problem = {}\n", self.id);
        if let Some(w) = self.weight {
            out += &format!("weight = {}\n", w.as_str());
        }
        let scalars = [
            ("amplitude", self.amplitude),
            ("decay_rate", self.decay_rate),
            ("cone_coefficient", self.cone_coefficient),
            ("map_scale", self.map_scale),
        ];
        for (key, value) in scalars {
            if let Some(v) = value {
                out += &format!("{key} = {v:?}\n");
            }
        }
        if let Some((a, b)) = self.window {
            out += &format!("window = {a:?}, {b:?}\n");
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub id: String,
    pub problem: ProblemSpec,
    pub params: ProblemParams,
    /// Reference constants; only present for the built-in parameter values.
    pub reference_values: Vec<ReferenceValue>,
    pub expect_c2_failure: bool,
    pub notes: &'static str,
}

impl CatalogEntry {
    pub fn reference(&self, name: &str) -> Option<f64> {
        self.reference_values.iter().find(|r| r.name == name).map(|r| r.value)
    }
}

pub fn get(id: &str) -> Result<CatalogEntry> {
    build(&ProblemParams::new(id))
}

fn positive(name: &'static str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::invalid(name, format!("must be finite and positive, got {v}")))
    }
}

pub fn build(params: &ProblemParams) -> Result<CatalogEntry> {
    let amplitude = params.amplitude.unwrap_or(1.0);
    if !amplitude.is_finite() || amplitude < 0.0 {
        return Err(Error::invalid("amplitude", format!("must be finite and nonnegative, got {amplitude}")));
    }
    let map_scale = positive("map_scale", params.map_scale.unwrap_or(1.0))?;
    match params.id.as_str() {
        "sine_exp" | "linear_probe" => sine_family(params, amplitude, map_scale),
        "rocket" => rocket(params, amplitude, map_scale),
        other => Err(Error::UnknownProblem(other.to_owned())),
    }
}

fn sine_family(params: &ProblemParams, a: f64, map_scale: f64) -> Result<CatalogEntry> {
    let linear = params.id == "linear_probe";
    let b = positive("decay_rate", params.decay_rate.unwrap_or(0.5))?;
    let (wa, wb) = params.window.unwrap_or((FRAC_PI_4, 3.0 * FRAC_PI_4));
    let window = IntervalUnion::single(wa, wb)?;
    let c = params.cone_coefficient.unwrap_or(SQRT_2 / 2.0);
    let cone = ConeFunctional::new(window.clone(), c, "min over the window minus c·sup|u|")?;
    let choice = params.weight.unwrap_or(WeightChoice::Smooth);
    let weight = choice.weight();

    let nonlinearity: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync> = if linear {
        Arc::new(|_t: f64, y: f64| y.abs())
    } else {
        Arc::new(|t: f64, y: f64| y.abs().sqrt() * t.sin().powi(2))
    };
    // f(t, xφ)/φ is bounded by √r·sin²t/√φ, or by r in the linear case
    let bound_weight = weight.clone();
    let caratheodory_bound: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync> = if linear {
        Arc::new(|_t: f64, r: f64| r)
    } else {
        Arc::new(move |t: f64, r: f64| r.sqrt() * t.sin().powi(2) / bound_weight.eval(t).sqrt())
    };

    let problem = ProblemSpec {
        label: params.id.clone(),
        kernel: Arc::new(move |t: f64, s: f64| a * (-b * s.abs()).exp() * t.sin()),
        eta: Arc::new(|_| 1.0),
        nonlinearity,
        weight,
        window,
        cone,
        modulus_weight: Arc::new(move |s: f64| a * (-b * s.abs()).exp()),
        caratheodory_bound,
        support: (f64::NEG_INFINITY, f64::INFINITY),
        breakpoints: (-4..=4).map(|k| k as f64 * PI).collect(),
        map_scale,
    };

    let defaults = ProblemParams {
        weight: params.weight,
        map_scale: params.map_scale,
        ..ProblemParams::new(params.id.clone())
    };
    let reference_values = if *params == defaults {
        if linear {
            linear_references()
        } else {
            sine_exp_references()
        }
    } else {
        Vec::new()
    };
    Ok(CatalogEntry {
        id: params.id.clone(),
        problem,
        params: params.clone(),
        reference_values,
        expect_c2_failure: false,
        notes: if linear {
            "linear nonlinearity; every limit quotient is identically 1"
        } else {
            "rank-one kernel; the fixed point is a multiple of sin t"
        },
    })
}

fn rocket(params: &ProblemParams, a: f64, map_scale: f64) -> Result<CatalogEntry> {
    if params.decay_rate.is_some() {
        return Err(Error::invalid("decay_rate", "the rocket kernel has no decay rate"));
    }
    let (wa, wb) = params.window.unwrap_or((1.0, 2.0));
    let window = IntervalUnion::single(wa, wb)?;
    let cone = ConeFunctional::new(
        window.clone(),
        params.cone_coefficient.unwrap_or(0.5),
        "min over the window minus c·sup|u|",
    )?;
    let problem = ProblemSpec {
        label: "rocket".into(),
        kernel: Arc::new(move |t: f64, s: f64| a * (t - s).max(0.0)),
        eta: Arc::new(|_| 1.0),
        nonlinearity: Arc::new(|_t: f64, y: f64| -GRAVITY * EARTH_RADIUS * EARTH_RADIUS / (y + EARTH_RADIUS).powi(2)),
        weight: params.weight.unwrap_or(WeightChoice::Smooth).weight(),
        window,
        cone,
        modulus_weight: Arc::new(|_| 1.0),
        caratheodory_bound: Arc::new(|_t: f64, _r: f64| GRAVITY),
        support: (0.0, f64::INFINITY),
        breakpoints: vec![0.0],
        map_scale,
    };
    Ok(CatalogEntry {
        id: "rocket".into(),
        problem,
        params: params.clone(),
        reference_values: Vec::new(),
        expect_c2_failure: true,
        notes: "vertical motion under gravity on the half-line; the kernel grows linearly, so the integrability condition fails",
    })
}

/// `2(1+e^{−π/2}) / ((1−e^{−π/2})·5/4)`
pub fn r_l1_closed_form() -> f64 {
    let q = (-FRAC_PI_2).exp();
    2.0 * (1.0 + q) / ((1.0 - q) * 1.25)
}

/// `∫_{π/4}^{3π/4} e^{−s/2} sin s ds` through its antiderivative.
pub fn r_l2_closed_form() -> f64 {
    let antiderivative = |s: f64| (-s / 2.0).exp() * (-0.5 * s.sin() - s.cos()) / 1.25;
    antiderivative(3.0 * FRAC_PI_4) - antiderivative(FRAC_PI_4)
}

/// `√2·e^{−3π/8}(e^{π/4} − 1)`
pub fn m_tilde_inv_closed_form() -> f64 {
    SQRT_2 * (-3.0 * PI / 8.0).exp() * (FRAC_PI_4.exp() - 1.0)
}

fn sine_exp_references() -> Vec<ReferenceValue> {
    vec![
        ReferenceValue {
            name: "m_tilde_inv",
            value: m_tilde_inv_closed_form(),
            provenance: Provenance::Published,
            formula: "sqrt(2)·exp(−3π/8)·(exp(π/4) − 1)",
        },
        ReferenceValue {
            name: "r_L1",
            value: r_l1_closed_form(),
            provenance: Provenance::Oracle,
            formula: "∫ e^{−|s|/2}|sin s| ds = 2(1+e^{−π/2})/((1−e^{−π/2})·5/4)",
        },
        ReferenceValue {
            name: "r_L2",
            value: r_l2_closed_form(),
            provenance: Provenance::Oracle,
            formula: "∫_{π/4}^{3π/4} e^{−s/2} sin s ds",
        },
        ReferenceValue {
            name: "f_sup_inf",
            value: 0.0,
            provenance: Provenance::Published,
            formula: "√|x|·sin²t/(√φ·|x|) → 0",
        },
        ReferenceValue {
            name: "f_inf_0",
            value: f64::INFINITY,
            provenance: Provenance::Published,
            formula: "√|x|·sin²t/(√φ·|x|) → +∞",
        },
        ReferenceValue {
            name: "solution_coefficient",
            value: 2.936_511_226_521_297_6,
            provenance: Provenance::Oracle,
            formula: "I² with I = 2∫₀^∞ e^{−s/2}|sin s|^{5/2} ds; u* = I²·sin t",
        },
    ]
}

fn linear_references() -> Vec<ReferenceValue> {
    ["f_sup_0", "f_inf_0", "f_sup_inf", "f_inf_inf"]
        .into_iter()
        .map(|name| ReferenceValue {
            name,
            value: 1.0,
            provenance: Provenance::Analytic,
            formula: "f(t, xφ)/(φ|x|) = 1",
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_ids_resolve() {
        for id in PROBLEM_IDS {
            let entry = get(id).unwrap();
            assert_eq!(entry.id, id);
        }
        assert!(matches!(get("nope"), Err(Error::UnknownProblem(_))));
    }

    #[test]
    fn sine_exp_reference_constants() {
        let e = get("sine_exp").unwrap();
        assert!((e.reference("m_tilde_inv").unwrap() - 0.519_536_716_520_839).abs() < 1e-14);
        assert!((e.reference("r_L1").unwrap() - 2.439_789_790_115_30).abs() < 1e-12);
        assert!((e.reference("r_L2").unwrap() - 0.660_030_352_807_547).abs() < 1e-14);
        assert_eq!(e.reference("f_inf_0"), Some(f64::INFINITY));
    }

    #[test]
    fn rocket_expects_integrability_failure() {
        let e = get("rocket").unwrap();
        assert!(e.expect_c2_failure);
        assert_eq!(e.problem.k_eta(-1.0, -2.0), 0.0);
        assert_eq!(e.problem.k_eta(3.0, 1.0), 2.0);
    }

    #[test]
    fn linear_probe_limits_are_one() {
        let e = get("linear_probe").unwrap();
        assert_eq!(e.reference_values.len(), 4);
        assert!(e.reference_values.iter().all(|r| r.value == 1.0));
    }

    #[test]
    fn modified_parameters_drop_reference_values() {
        let mut params = ProblemParams::new("sine_exp");
        params.decay_rate = Some(0.7);
        assert!(build(&params).unwrap().reference_values.is_empty());
        params.weight = Some(WeightChoice::AbsT);
        params.decay_rate = None;
        assert!(!build(&params).unwrap().reference_values.is_empty());
        let mut rocket = ProblemParams::new("rocket");
        rocket.decay_rate = Some(1.0);
        assert!(build(&rocket).is_err());
    }
}
