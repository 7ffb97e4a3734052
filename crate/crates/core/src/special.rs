//! Gamma function and smooth compactly supported profiles.
//!
//! The gamma implementation is a Lanczos approximation (g = 7, nine
//! coefficients) with compensated summation of the partial-fraction series
//! and the reflection formula for arguments below 1/2. Accuracy is a few
//! ulps across the range used by the crate; the test suite pins a relative
//! error budget of 1e-13 on (0, 5].
//!
//! The smooth profiles are built from the classical flat-ended mollifier
//! `exp(-1/(v(1-v)))`: [`smooth_step`] S is its normalized running integral
//! (S(0) = 0, S(1) = 1, all derivatives vanish at both ends), and both the
//! frequency bump [`eta0`] and the time cutoff [`psi`] are S-transitions
//! glued to plateaus: identically 1 on [-1, 1], identically 0 outside
//! (-2, 2), with S(2 - |u|) in between.

use crate::quad;
use std::sync::OnceLock;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
];

/// Gamma function for real arguments (poles at 0, -1, -2, … return NaN).
pub fn gamma(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x <= 0.0 && x == x.floor() {
        return f64::NAN; // pole
    }
    if x < 0.5 {
        // Reflection: Γ(x) Γ(1-x) = π / sin(πx).
        let s = (std::f64::consts::PI * x).sin();
        return std::f64::consts::PI / (s * gamma(1.0 - x));
    }
    let z = x - 1.0;
    // Compensated (Kahan) summation of the partial-fraction series.
    let mut sum = LANCZOS_COEFFS[0];
    let mut comp = 0.0_f64;
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        let term = c / (z + i as f64);
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    let t = z + LANCZOS_G + 0.5;
    (2.0 * std::f64::consts::PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * sum
}

/// Natural log of |Γ(x)| for x > 0 (used to balance large quotients).
pub fn ln_gamma(x: f64) -> f64 {
    assert!(x > 0.0, "ln_gamma requires a positive argument");
    if x < 0.5 {
        let s = (std::f64::consts::PI * x).sin();
        return std::f64::consts::PI.ln() - s.ln() - ln_gamma(1.0 - x);
    }
    let z = x - 1.0;
    let mut sum = LANCZOS_COEFFS[0];
    let mut comp = 0.0_f64;
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        let term = c / (z + i as f64);
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + sum.ln()
}

/// The flat-ended mollifier `exp(-1/(v(1-v)))` on (0, 1), zero outside.
fn mollifier(v: f64) -> f64 {
    if v <= 0.0 || v >= 1.0 {
        return 0.0;
    }
    let q = 1.0 / (v * (1.0 - v));
    (-q).exp()
}

/// Normalization `∫_0^1 exp(-1/(v(1-v))) dv`, computed once.
fn mollifier_mass() -> f64 {
    static MASS: OnceLock<f64> = OnceLock::new();
    *MASS.get_or_init(|| {
        let mut f = mollifier;
        quad::integrate_composite(&mut f, 0.0, 1.0, 32, 32)
    })
}

/// Smooth step S: 0 for u ≤ 0, 1 for u ≥ 1, normalized running integral of
/// the mollifier in between; C^∞ with all derivatives vanishing at the ends.
pub fn smooth_step(u: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return 1.0;
    }
    let mut f = mollifier;
    // The integrand is smooth and flat at 0, so a fixed composite rule over
    // [0, u] resolves it to near machine precision.
    let panels = 16.max((32.0 * u).ceil() as usize);
    quad::integrate_composite(&mut f, 0.0, u, panels, 32) / mollifier_mass()
}

/// Smooth frequency bump: 1 on [-1, 1], 0 outside (-2, 2), S(2 - |ξ|) in the
/// transition bands. Even and C^∞.
pub fn eta0(xi: f64) -> f64 {
    let a = xi.abs();
    if a <= 1.0 {
        1.0
    } else if a >= 2.0 {
        0.0
    } else {
        smooth_step(2.0 - a)
    }
}

/// Littlewood–Paley multiplier for the k-th dyadic shell, k ≥ 1:
/// `χ_k(ξ) = η₀(ξ/2^k) - η₀(ξ/2^{k-1})`; supported in 2^{k-1} ≤ |ξ| ≤ 2^{k+1}.
pub fn chi_k(k: u32, xi: f64) -> f64 {
    assert!(k >= 1, "chi_k is defined for k >= 1; use eta0 for the core block");
    let scale = (2.0_f64).powi(k as i32);
    eta0(xi / scale) - eta0(xi / (scale / 2.0))
}

/// Smooth time cutoff: 1 on [-1, 1], 0 outside (-2, 2) (same profile as the
/// frequency bump; the two names reflect their distinct roles).
pub fn psi(t: f64) -> f64 {
    eta0(t)
}

/// `ψ(t/T)`: the rescaled cutoff, identically 1 on [-T, T], supported in
/// (-2T, 2T).
pub fn psi_scaled(t: f64, cap_t: f64) -> f64 {
    assert!(cap_t > 0.0, "cutoff width must be positive");
    psi(t / cap_t)
}
