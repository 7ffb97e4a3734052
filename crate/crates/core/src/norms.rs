//! Weighted space-time norms: the dispersive-weight family `X^{s,b}`, the
//! time-weight family `Y^{s,b}`, the low-frequency modulation norm `D^α`,
//! spatial Sobolev norms (whole-line and half-line-by-zero-extension), and
//! the composite solution-space norm.
//!
//! All space-time norms are weighted ℓ² sums over the discrete space-time
//! spectrum with the continuum measure, so a single mode of amplitude `A`
//! contributes `A·(weight)·√(T·L)` exactly and the zero-weight cases reduce
//! to the space-time L² norm.

use crate::error::{Error, Result};
use crate::fracint::HalfLineSignal;
use crate::spectral::{
    forward_transform, forward_transform_2d, spatial_derivative_2d, DomainTag, Field1D, Field2D,
    Grid1D,
};
use num_complex::Complex64;

/// Regularity bookkeeping for the solution spaces: spatial index `s`,
/// modulation exponent `b`, and the low-frequency modulation exponent `α`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SobolevIndex {
    pub s: f64,
    pub b: f64,
    pub alpha: f64,
}

impl SobolevIndex {
    /// Validates the contraction-scheme window `0 < b < 1/2 < α < 1 − b`.
    pub fn new(s: f64, b: f64, alpha: f64) -> Result<Self> {
        if !s.is_finite() || !b.is_finite() || !alpha.is_finite() {
            return Err(Error::domain("Sobolev indices must be finite"));
        }
        if !(0.0 < b && b < 0.5) {
            return Err(Error::domain(format!(
                "modulation exponent must satisfy 0 < b < 1/2, got {b}"
            )));
        }
        if !(0.5 < alpha && alpha < 1.0 - b) {
            return Err(Error::domain(format!(
                "low-frequency exponent must satisfy 1/2 < α < 1 − b, got α = {alpha}, b = {b}"
            )));
        }
        Ok(SobolevIndex { s, b, alpha })
    }
}

/// ⟨x⟩ = (1 + x²)^{1/2}.
pub fn bracket(x: f64) -> f64 {
    (1.0 + x * x).sqrt()
}

/// The space-time spectrum of a field (pass-through when already on the
/// frequency side).
fn spectrum(f: &Field2D) -> Result<Field2D> {
    match f.domain {
        DomainTag::Frequency => Ok(f.clone()),
        DomainTag::Physical => forward_transform_2d(f),
    }
}

/// Weighted ℓ² of the space-time spectrum with the continuum normalization:
/// `sqrt( Σ w(τ,ξ)² |f̃|² / (T·L) )`.
fn weighted_norm(f: &Field2D, weight: impl Fn(f64, f64) -> f64) -> Result<f64> {
    let hat = spectrum(f)?;
    let g = hat.grid;
    let mut acc = 0.0;
    for mt in 0..g.time.n {
        let tau = g.time.xi(mt);
        for mx in 0..g.space.n {
            let xi = g.space.xi(mx);
            let w = weight(tau, xi);
            acc += w * w * hat.at(mt, mx).norm_sqr();
        }
    }
    Ok((acc / (g.time.length * g.space.length)).sqrt())
}

/// Dispersive-weight norm: `‖f‖² = ∫ ⟨ξ⟩^{2s} ⟨τ−ξ⁵⟩^{2b} |f̃(τ,ξ)|² dξ dτ`.
pub fn xsb_norm(f: &Field2D, s: f64, b: f64) -> Result<f64> {
    weighted_norm(f, |tau, xi| {
        bracket(xi).powf(s) * bracket(tau - xi.powi(5)).powf(b)
    })
}

/// Time-weight norm: `‖f‖² = ∫ ⟨τ⟩^{2s/5} ⟨τ−ξ⁵⟩^{2b} |f̃(τ,ξ)|² dξ dτ`.
pub fn ysb_norm(f: &Field2D, s: f64, b: f64) -> Result<f64> {
    weighted_norm(f, |tau, xi| {
        bracket(tau).powf(s / 5.0) * bracket(tau - xi.powi(5)).powf(b)
    })
}

/// Low-frequency modulation norm: `‖f‖² = ∫ ⟨τ⟩^{2α} 1_{|ξ|≤1} |f̃|² dξ dτ`.
pub fn dalpha_norm(f: &Field2D, alpha: f64) -> Result<f64> {
    weighted_norm(f, |tau, xi| {
        if xi.abs() <= 1.0 {
            bracket(tau).powf(alpha)
        } else {
            0.0
        }
    })
}

/// The intersection norm `X^{s,b} ∩ D^α`, realized as the max of the two
/// members (equivalent to their sum within a factor 2; max is kept for
/// determinism).
pub fn xsb_dalpha_norm(f: &Field2D, s: f64, b: f64, alpha: f64) -> Result<f64> {
    Ok(xsb_norm(f, s, b)?.max(dalpha_norm(f, alpha)?))
}

/// Spatial Sobolev norm `‖f‖² = ∫ ⟨ξ⟩^{2s} |f̂|² dξ` of a line field.
pub fn hs_norm(f: &Field1D, s: f64) -> Result<f64> {
    let hat = match f.domain {
        DomainTag::Frequency => f.clone(),
        DomainTag::Physical => forward_transform(f)?,
    };
    let g = hat.grid;
    let mut acc = 0.0;
    for (m, v) in hat.values.iter().enumerate() {
        acc += bracket(g.xi(m)).powf(2.0 * s) * v.norm_sqr();
    }
    Ok((acc / g.length).sqrt())
}

/// Half-line Sobolev norm by zero extension, valid for |s| < 1/2 (the window
/// in which the sharp-cutoff extension is bounded on H^s and the norm does
/// not depend on the extension).  The samples are placed on the right half
/// of a symmetric power-of-two grid, padded with zeros.
pub fn hs0_halfline_norm(f: &HalfLineSignal, s: f64) -> Result<f64> {
    if !(s.abs() < 0.5) {
        return Err(Error::domain(format!(
            "half-line Sobolev norm by zero extension needs |s| < 1/2, got {s}"
        )));
    }
    let len = f.len();
    let n = (2 * len).next_power_of_two().max(16);
    let dx = f.dt();
    let half = (n / 2) as f64 * dx;
    let grid = Grid1D::new(n, n as f64 * dx, -half)?;
    let mut values = vec![Complex64::new(0.0, 0.0); n];
    for (i, v) in f.values().iter().enumerate() {
        values[n / 2 + i] = Complex64::new(*v, 0.0);
    }
    let field = Field1D::new(grid, DomainTag::Physical, values)?;
    hs_norm(&field, s)
}

/// The solution-space norm, reported in its three components:
///
/// * `sup_t ‖u(t,·)‖_{H^s}` over grid rows;
/// * `sup_x ‖∂ₓ^j u(·,x)‖_{H^{(s+2−j)/5}}` over grid columns, j = 0..=ℓ;
/// * the intersection norm `X^{s,b} ∩ D^α`.
#[derive(Clone, Debug)]
pub struct ZNormParts {
    /// Largest spatial Sobolev norm over time rows.
    pub sup_spatial: f64,
    /// Largest time-trace Sobolev norm per derivative order j = 0..=ℓ.
    pub trace: Vec<f64>,
    /// The dispersive component `max(X^{s,b}, D^α)`.
    pub dispersive: f64,
}

impl ZNormParts {
    /// The composite norm: spatial sup + all trace sups + dispersive part.
    pub fn total(&self) -> f64 {
        self.sup_spatial + self.trace.iter().sum::<f64>() + self.dispersive
    }
}

/// Compute the solution-space norm of a physical-side field with `ell` ∈
/// {1, 2} boundary-derivative traces.
pub fn z_norm(u: &Field2D, idx: SobolevIndex, ell: u32) -> Result<ZNormParts> {
    if !(ell == 1 || ell == 2) {
        return Err(Error::domain(format!(
            "trace count must be 1 or 2, got {ell}"
        )));
    }
    if u.domain != DomainTag::Physical {
        return Err(Error::structural("z_norm expects a physical-side field"));
    }
    let mut sup_spatial: f64 = 0.0;
    for it in 0..u.grid.time.n {
        sup_spatial = sup_spatial.max(hs_norm(&u.row(it), idx.s)?);
    }
    let mut trace = Vec::with_capacity(ell as usize + 1);
    for j in 0..=ell {
        let du = if j == 0 {
            u.clone()
        } else {
            spatial_derivative_2d(u, j)?
        };
        let order = (idx.s + 2.0 - j as f64) / 5.0;
        let mut sup: f64 = 0.0;
        for ix in 0..u.grid.space.n {
            sup = sup.max(hs_norm(&du.column(ix), order)?);
        }
        trace.push(sup);
    }
    let dispersive = xsb_dalpha_norm(u, idx.s, idx.b, idx.alpha)?;
    Ok(ZNormParts {
        sup_spatial,
        trace,
        dispersive,
    })
}
