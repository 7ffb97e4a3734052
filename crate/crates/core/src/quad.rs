//! Deterministic quadrature helpers.
//!
//! Everything here is plain Gauss–Legendre machinery: nodes and weights are
//! generated once per order by Newton iteration on the Legendre recurrence
//! (deterministic to the last bit), then reused. Higher-level adaptive
//! drivers live next to their integrands in the modules that need them.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_complex::Complex64;

/// Gauss–Legendre nodes and weights on the reference interval `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Compute the `n`-point rule by Newton iteration on `P_n`.
    fn compute(n: usize) -> Self {
        assert!(n >= 2, "Gauss-Legendre order must be at least 2");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Standard initial guess for the i-th positive root.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                // Evaluate P_n(x) and P_{n-1}(x) by the three-term recurrence.
                let (mut p0, mut p1) = (1.0_f64, x);
                for k in 2..=n {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                // P_n'(x) = n (x P_n - P_{n-1}) / (x^2 - 1).
                let dp = (n as f64) * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (mut p0, mut p1) = (1.0_f64, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let dp = (n as f64) * (x * p1 - p0) / (x * x - 1.0);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            // Midpoint node: recompute the weight at x = 0 explicitly.
            let x = 0.0;
            let (mut p0, mut p1) = (1.0_f64, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let dp = (n as f64) * (x * p1 - p0) / (x * x - 1.0);
            nodes[n / 2] = 0.0;
            weights[n / 2] = 2.0 / (dp * dp);
        }
        GaussLegendre { nodes, weights }
    }
}

fn rule_cache() -> &'static Mutex<HashMap<usize, &'static GaussLegendre>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, &'static GaussLegendre>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Shared `n`-point rule (computed once per order, leaked for static reuse).
pub fn gauss_legendre(n: usize) -> &'static GaussLegendre {
    let mut cache = rule_cache().lock().unwrap();
    if let Some(rule) = cache.get(&n) {
        return rule;
    }
    let rule: &'static GaussLegendre = Box::leak(Box::new(GaussLegendre::compute(n)));
    cache.insert(n, rule);
    rule
}

/// `∫_a^b f` with a single `n`-point Gauss–Legendre panel.
pub fn integrate_panel(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let rule = gauss_legendre(n);
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut sum = 0.0;
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        sum += w * f(c + h * x);
    }
    sum * h
}

/// `∫_a^b f` with a single `n`-point panel, complex-valued integrand.
pub fn integrate_panel_complex(
    f: &mut impl FnMut(f64) -> Complex64,
    a: f64,
    b: f64,
    n: usize,
) -> Complex64 {
    let rule = gauss_legendre(n);
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut sum = Complex64::new(0.0, 0.0);
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        sum += f(c + h * x) * *w;
    }
    sum * h
}

/// `∫_a^b f` over `panels` equal panels of `n` points each.
pub fn integrate_composite(
    f: &mut impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    panels: usize,
    n: usize,
) -> f64 {
    let h = (b - a) / panels as f64;
    let mut sum = 0.0;
    for p in 0..panels {
        sum += integrate_panel(f, a + p as f64 * h, a + (p + 1) as f64 * h, n);
    }
    sum
}

/// `∫_a^b f` over `panels` equal panels, complex-valued integrand.
pub fn integrate_composite_complex(
    f: &mut impl FnMut(f64) -> Complex64,
    a: f64,
    b: f64,
    panels: usize,
    n: usize,
) -> Complex64 {
    let h = (b - a) / panels as f64;
    let mut sum = Complex64::new(0.0, 0.0);
    for p in 0..panels {
        sum += integrate_panel_complex(f, a + p as f64 * h, a + (p + 1) as f64 * h, n);
    }
    sum
}

/// Adaptive panel-doubling driver: doubles the panel count until two
/// successive composite evaluations agree to `tol` (absolute), returning the
/// finer value and the last disagreement.
pub fn integrate_adaptive_complex(
    f: &mut impl FnMut(f64) -> Complex64,
    a: f64,
    b: f64,
    tol: f64,
    n: usize,
    max_panels: usize,
) -> (Complex64, f64) {
    let mut panels = 2;
    let mut prev = integrate_composite_complex(f, a, b, panels, n);
    loop {
        panels *= 2;
        let next = integrate_composite_complex(f, a, b, panels, n);
        let diff = (next - prev).norm();
        if diff <= tol || panels >= max_panels {
            return (next, diff);
        }
        prev = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        // An n-point rule is exact through degree 2n-1.
        for &n in &[2usize, 5, 8, 16] {
            let deg = 2 * n - 1;
            let mut f = |x: f64| x.powi(deg as i32) + 3.0 * x * x;
            let got = integrate_panel(&mut f, 0.0, 1.0, n);
            let want = 1.0 / (deg as f64 + 1.0) + 1.0;
            assert!(
                (got - want).abs() < 1e-13,
                "n={n} deg={deg}: got {got}, want {want}"
            );
        }
    }

    #[test]
    fn composite_matches_known_transcendental_integral() {
        // ∫_0^π sin = 2 exactly.
        let mut f = |x: f64| x.sin();
        let got = integrate_composite(&mut f, 0.0, std::f64::consts::PI, 4, 16);
        assert!((got - 2.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_driver_reaches_tolerance() {
        let mut f = |x: f64| Complex64::new((10.0 * x).cos(), (7.0 * x).sin());
        let (got, err) = integrate_adaptive_complex(&mut f, 0.0, 1.0, 1e-12, 16, 1 << 12);
        let want = Complex64::new(10.0_f64.sin() / 10.0, (1.0 - 7.0_f64.cos()) / 7.0);
        assert!(err <= 1e-12);
        assert!((got - want).norm() < 1e-12);
    }
}
