//! Shared oracles and helpers for the integration tests. Nothing here calls
//! into the numerical core.
#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;

/// Adaptive Simpson on `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1)
            + recurse(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1)
    }
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, m, fm, whole, tol, 50)
}

/// `∫₀^∞ g` for integrands with `|g(s)| ≤ e^{−s/2}`, panel by panel over
/// `[kπ, (k+1)π]` until the tail is below 1e−18.
pub fn half_line<F: Fn(f64) -> f64>(g: F) -> f64 {
    let pi = std::f64::consts::PI;
    (0..30)
        .map(|k| adaptive_simpson(&g, k as f64 * pi, (k + 1) as f64 * pi, 1e-15))
        .sum()
}

/// `I = 2∫₀^∞ e^{−s/2}|sin s|^{5/2} ds`.
pub fn oracle_i() -> f64 {
    2.0 * half_line(|s| (-s / 2.0).exp() * s.sin().abs().powf(2.5))
}

/// `∫ e^{−|s|/2}|sin s| ds` over the real line.
pub fn oracle_r_l1() -> f64 {
    2.0 * half_line(|s| (-s / 2.0).exp() * s.sin().abs())
}

/// `∫_{π/4}^{3π/4} e^{−s/2} sin s ds` from the antiderivative
/// `−e^{−s/2}(sin s/2 + cos s)/(5/4)`.
pub fn oracle_r_l2() -> f64 {
    let pi = std::f64::consts::PI;
    let anti = |s: f64| -(-s / 2.0).exp() * (0.5 * s.sin() + s.cos()) / 1.25;
    anti(0.75 * pi) - anti(0.25 * pi)
}

/// `1/M̃ = inf_{t∈A} sin t ∫_A e^{−s/2} ds`, attained at the window ends.
pub fn oracle_m_tilde_inv() -> f64 {
    let pi = std::f64::consts::PI;
    (0.25 * pi).sin() * 2.0 * ((-pi / 8.0).exp() - (-3.0 * pi / 8.0).exp())
}

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_hammerstein")
}

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
    pub out: PathBuf,
}

pub fn run_cli(dir: &Path, verb: &str, config: &str, extra: &[&str]) -> Run {
    let cfg = dir.join(format!("{verb}.cfg"));
    std::fs::write(&cfg, config).unwrap();
    let out = dir.join(format!("out_{verb}"));
    let output = Command::new(bin())
        .arg(verb)
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .args(extra)
        .output()
        .expect("binary runs");
    Run {
        code: output.status.code().expect("exit code"),
        stdout: String::from_utf8_lossy(&output.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&output.stderr).into_owned(),
        out,
    }
}

pub fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Reads a number that may have been written as `"inf"`/`"-inf"`.
pub fn number(v: &serde_json::Value) -> f64 {
    match v {
        serde_json::Value::String(s) => s.parse().unwrap(),
        other => other.as_f64().unwrap_or_else(|| panic!("not a number: {other}")),
    }
}

pub fn parse_csv_number(s: &str) -> f64 {
    s.parse().unwrap_or_else(|_| panic!("bad CSV number {s}"))
}
