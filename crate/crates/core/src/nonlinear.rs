//! The two nonlinear maps driving the evolution, the resonance polynomials
//! behind their multilinear estimates, and the scaling symmetry.
//!
//! Both nonlinearities are total derivatives: the quadratic one carries a
//! nonlocal half-order weight, `F(u) = (1−∂ₓ²)^{1/2}∂ₓ(u²)`, the cubic one is
//! local, `F(u) = ∂ₓ(u³)`.  Products are formed pointwise in physical space
//! after a dealiasing truncation sized to the product degree, and the symbol
//! (`iξ⟨ξ⟩` or `iξ`) is applied spectrally.
//!
//! The resonance polynomials are the exact dispersive mismatches
//! `(Σξᵢ)⁵ − Σξᵢ⁵` of a product of waves; their factored forms exhibit the
//! vanishing surfaces the block estimates organize around.

use crate::error::{Error, Result};
use crate::spectral::{
    forward_transform, inverse_transform, DomainTag, Field1D, Field2D, Grid1D, SpaceTimeGrid,
};
use num_complex::Complex64;

/// Which nonlinearity drives the equation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NonlinearityKind {
    /// `F(u) = (1−∂ₓ²)^{1/2} ∂ₓ (u²)`: quadratic product under a first-order
    /// nonlocal symbol `iξ⟨ξ⟩`.
    QuadraticNonlocal,
    /// `F(u) = ∂ₓ (u³)`: cubic product under the plain derivative `iξ`.
    Cubic,
}

impl NonlinearityKind {
    /// Degree of the pointwise product formed in physical space.
    pub fn degree(self) -> u32 {
        match self {
            NonlinearityKind::QuadraticNonlocal => 2,
            NonlinearityKind::Cubic => 3,
        }
    }

    /// Fraction of the spectrum kept by the dealiasing rule: 2/3 for a
    /// quadratic product, 1/2 for a cubic one (a degree-p product of modes
    /// inside the kept band then cannot alias back into it).
    pub fn dealias_fraction(self) -> f64 {
        match self {
            NonlinearityKind::QuadraticNonlocal => 2.0 / 3.0,
            NonlinearityKind::Cubic => 0.5,
        }
    }

    /// The Fourier symbol applied to the product's spectrum.
    fn symbol(self, xi: f64) -> Complex64 {
        match self {
            NonlinearityKind::QuadraticNonlocal => {
                Complex64::new(0.0, xi * (1.0 + xi * xi).sqrt())
            }
            NonlinearityKind::Cubic => Complex64::new(0.0, xi),
        }
    }
}

/// Relative L² energy of `hat` outside the kept dealias band.
fn out_of_band_energy(hat: &Field1D, cutoff: f64) -> f64 {
    let mut inside = 0.0;
    let mut outside = 0.0;
    for (m, v) in hat.values.iter().enumerate() {
        let e = v.norm_sqr();
        if hat.grid.xi(m).abs() <= cutoff && !hat.grid.is_unpaired_nyquist(m) {
            inside += e;
        } else {
            outside += e;
        }
    }
    let total = inside + outside;
    if total == 0.0 {
        0.0
    } else {
        outside / total
    }
}

/// Apply the nonlinearity `F` to a real physical-space field.
///
/// The input spectrum is truncated to the kind's dealias band, the product is
/// formed pointwise, and the symbol is applied along with the same truncation
/// (modes a product pushes past the band carry aliased energy and are
/// discarded).  Both symbols vanish at ξ = 0, so the output always has zero
/// spatial mean, and both are odd with real `⟨ξ⟩` weight, so real input gives
/// real output; the unpaired Nyquist bin (where an odd symbol is ambiguous)
/// is zeroed.
pub fn apply_f(u: &Field1D, kind: NonlinearityKind) -> Result<Field1D> {
    if u.domain != DomainTag::Physical {
        return Err(Error::structural("apply_f expects a physical-side field"));
    }
    let residual = u.imag_residual();
    if residual > 1e-10 {
        return Err(Error::domain(format!(
            "apply_f expects a real field (imaginary residual {residual:.3e} > 1e-10)"
        )));
    }
    let cutoff = kind.dealias_fraction() * u.grid.xi_max();
    let mut hat = forward_transform(u)?;
    let aliasing = out_of_band_energy(&hat, cutoff);
    if aliasing > 1e-6 {
        return Err(Error::numerical(format!(
            "input carries {aliasing:.3e} of its energy above the dealias \
             cutoff; products would alias (refine the grid or filter first)"
        )));
    }
    for (m, v) in hat.values.iter_mut().enumerate() {
        if hat.grid.xi(m).abs() > cutoff || hat.grid.is_unpaired_nyquist(m) {
            *v = Complex64::new(0.0, 0.0);
        }
    }
    let clean = inverse_transform(&hat)?;
    let product = Field1D {
        grid: clean.grid,
        domain: DomainTag::Physical,
        values: clean
            .values
            .iter()
            .map(|v| Complex64::new(v.re.powi(kind.degree() as i32), 0.0))
            .collect(),
    };
    let mut phat = forward_transform(&product)?;
    for (m, v) in phat.values.iter_mut().enumerate() {
        let xi = phat.grid.xi(m);
        if xi.abs() > cutoff || phat.grid.is_unpaired_nyquist(m) {
            *v = Complex64::new(0.0, 0.0);
        } else {
            *v *= kind.symbol(xi);
        }
    }
    inverse_transform(&phat)
}

// ---------------------------------------------------------------------------
// Resonance polynomials
// ---------------------------------------------------------------------------

/// Two-wave resonance `(ξ₁+ξ₂)⁵ − ξ₁⁵ − ξ₂⁵` in its factored form
/// `(5/2)ξ₁ξ₂(ξ₁+ξ₂)(ξ₁²+ξ₂²+(ξ₁+ξ₂)²)`.
pub fn resonance_h(xi1: f64, xi2: f64) -> f64 {
    let s = xi1 + xi2;
    2.5 * xi1 * xi2 * s * (xi1 * xi1 + xi2 * xi2 + s * s)
}

/// The same two-wave resonance evaluated by expanding the fifth powers —
/// a genuinely different arithmetic path used to cross-check the factored
/// form.
pub fn resonance_h_expanded(xi1: f64, xi2: f64) -> f64 {
    (xi1 + xi2).powi(5) - xi1.powi(5) - xi2.powi(5)
}

/// Three-wave resonance `(ξ₁+ξ₂+ξ₃)⁵ − ξ₁⁵ − ξ₂⁵ − ξ₃⁵` in its factored form
/// `(5/2)(ξ₁+ξ₂)(ξ₂+ξ₃)(ξ₃+ξ₁)(ξ₁²+ξ₂²+ξ₃²+(ξ₁+ξ₂+ξ₃)²)`.
pub fn resonance_g(xi1: f64, xi2: f64, xi3: f64) -> f64 {
    let s = xi1 + xi2 + xi3;
    2.5 * (xi1 + xi2)
        * (xi2 + xi3)
        * (xi3 + xi1)
        * (xi1 * xi1 + xi2 * xi2 + xi3 * xi3 + s * s)
}

/// The three-wave resonance by expanded fifth powers (cross-check path).
pub fn resonance_g_expanded(xi1: f64, xi2: f64, xi3: f64) -> f64 {
    (xi1 + xi2 + xi3).powi(5) - xi1.powi(5) - xi2.powi(5) - xi3.powi(5)
}

// ---------------------------------------------------------------------------
// Scaling symmetry
// ---------------------------------------------------------------------------

/// The scaling map `u ↦ λ²u(λ⁵t, λx)` realized on the rescaled grid.
///
/// The image lives on the box `[T/λ⁵] × [L/λ]` with the same node counts;
/// node `(i, j)` of the new grid pulls back exactly onto node `(i, j)` of the
/// original one, so the construction is an exact relabeling (no interpolation
/// error) with the amplitude factor `λ²`.  For the cubic (local) nonlinearity
/// this map commutes with the flow; the nonlocal weight `⟨ξ⟩` of the
/// quadratic kind breaks the symmetry at order one.
pub fn scaling_map(u: &Field2D, lambda: f64) -> Result<Field2D> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::domain(format!(
            "scaling parameter must be a positive real, got {lambda}"
        )));
    }
    if u.domain != DomainTag::Physical {
        return Err(Error::structural("scaling_map expects a physical-side field"));
    }
    let l5 = lambda.powi(5);
    let time = Grid1D::new(
        u.grid.time.n,
        u.grid.time.length / l5,
        u.grid.time.origin / l5,
    )?;
    let space = Grid1D::new(
        u.grid.space.n,
        u.grid.space.length / lambda,
        u.grid.space.origin / lambda,
    )?;
    let amp = lambda * lambda;
    Ok(Field2D {
        grid: SpaceTimeGrid::new(time, space),
        domain: DomainTag::Physical,
        values: u.values.iter().map(|v| amp * v).collect(),
    })
}
