//! The free fifth-order group e^{t∂_x⁵}, the inhomogeneous Duhamel operator,
//! smooth time cutoffs, and the linear boundary energy identity.
//!
//! The group acts as the frequency multiplier e^{itξ⁵}; it is exactly
//! unitary on the grid and satisfies the group law to rounding.  The Duhamel
//! operator integrates e^{(t−t′)∂_x⁵}w(t′,·) by the trapezoid rule per
//! spatial frequency, so its accuracy knob is the time step alone.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::special::psi_scaled;
use crate::spectral::{
    apply_multiplier_binwise, forward_transform, inverse_transform, DomainTag, Field1D, Field2D,
};

/// Smooth time cutoff ψ_T(t) = ψ(t/T): identically one on [−T, T], zero
/// outside (−2T, 2T), monotone on each transition band.
#[derive(Debug, Clone, Copy)]
pub struct Cutoff {
    scale: f64,
}

impl Cutoff {
    /// The scale must lie in (0, 1]: the contraction argument only shrinks T.
    pub fn new(scale: f64) -> Result<Self> {
        if !scale.is_finite() || scale <= 0.0 || scale > 1.0 {
            return Err(Error::domain(format!(
                "cutoff scale must lie in (0, 1], got {scale}"
            )));
        }
        Ok(Cutoff { scale })
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn eval(&self, t: f64) -> f64 {
        psi_scaled(t, self.scale)
    }
}

/// e^{t∂_x⁵}φ: multiply the spatial transform by e^{itξ⁵}. The unpaired
/// Nyquist bin aliases ±ξ_max, where the odd phase tξ⁵ averages to zero, so
/// that mode is held fixed; this keeps real states exactly real while
/// preserving unitarity and the group law.
pub fn propagate(phi: &Field1D, t: f64) -> Result<Field1D> {
    if phi.domain != DomainTag::Physical {
        return Err(Error::structural("propagate expects a physical-domain field"));
    }
    if !t.is_finite() {
        return Err(Error::domain("propagation time must be finite"));
    }
    let grid = phi.grid;
    apply_multiplier_binwise(phi, |bin, xi| {
        if grid.is_unpaired_nyquist(bin) {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::from_polar(1.0, t * xi.powi(5))
        }
    })
}

/// ∫₀^t e^{(t−t′)∂_x⁵} w(t′,·) dt′ computed per spatial frequency as
/// e^{itξ⁵} ∫₀^t e^{−it′ξ⁵} ŵ(t′,ξ) dt′ with trapezoidal time quadrature.
/// The first row of the result is exactly zero.
pub fn duhamel(w: &Field2D) -> Result<Field2D> {
    if w.domain != DomainTag::Physical {
        return Err(Error::structural("duhamel expects a physical-domain field"));
    }
    if w.grid.time.origin != 0.0 {
        return Err(Error::domain(format!(
            "duhamel needs a time axis starting at 0, got origin {}",
            w.grid.time.origin
        )));
    }
    let nt = w.grid.time.n;
    let nx = w.grid.space.n;
    let dt = w.grid.time.dx();

    // Spatial transforms of every row, then one cumulative pass in time.
    let mut hat_rows = Vec::with_capacity(nt);
    for it in 0..nt {
        hat_rows.push(forward_transform(&w.row(it))?);
    }
    let mut out = Field2D::zeros(w.grid, DomainTag::Physical);
    let mut running = vec![Complex64::new(0.0, 0.0); nx];
    let mut prev = vec![Complex64::new(0.0, 0.0); nx];
    for (it, hat) in hat_rows.iter().enumerate() {
        let t = it as f64 * dt;
        let mut row_values = vec![Complex64::new(0.0, 0.0); nx];
        for m in 0..nx {
            // Same Nyquist symmetrization as `propagate`: the odd phase is
            // zero on the aliased ±ξ_max pair.
            let xi5 = if w.grid.space.is_unpaired_nyquist(m) {
                0.0
            } else {
                w.grid.space.xi(m).powi(5)
            };
            let integrand = hat.values[m] * Complex64::from_polar(1.0, -t * xi5);
            if it > 0 {
                running[m] += 0.5 * dt * (prev[m] + integrand);
            }
            row_values[m] = running[m] * Complex64::from_polar(1.0, t * xi5);
            prev[m] = integrand;
        }
        let row = Field1D::new(w.grid.space, DomainTag::Frequency, row_values)?;
        out.set_row(it, &inverse_transform(&row)?);
    }
    Ok(out)
}

/// Multiply a space-time field by ψ_T along the time axis.
pub fn apply_cutoff(u: &Field2D, scale: f64) -> Result<Field2D> {
    if u.domain != DomainTag::Physical {
        return Err(Error::structural("apply_cutoff expects a physical-domain field"));
    }
    let cutoff = Cutoff::new(scale)?;
    let mut out = u.clone();
    for it in 0..u.grid.time.n {
        let w = cutoff.eval(u.grid.time.node(it));
        for ix in 0..u.grid.space.n {
            *out.at_mut(it, ix) = u.at(it, ix) * w;
        }
    }
    Ok(out)
}

/// Multiply a sampled time signal by ψ_T.
pub fn apply_cutoff_signal(
    f: &crate::fracint::HalfLineSignal,
    scale: f64,
) -> Result<crate::fracint::HalfLineSignal> {
    let cutoff = Cutoff::new(scale)?;
    let values = (0..f.len())
        .map(|i| f.values()[i] * cutoff.eval(f.time(i)))
        .collect();
    let mut out = crate::fracint::HalfLineSignal::new(f.dt(), values)?;
    out.accuracy_warning = f.accuracy_warning.clone();
    Ok(out)
}

/// Which half of the line the mass budget is computed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HalfLine {
    Right,
    Left,
}

/// Both sides of the linear L² boundary budget together with their gap.
#[derive(Debug, Clone, serde::Serialize)]
pub struct EnergyReport {
    /// ∫ u²(T) dx over the chosen half-line.
    pub final_mass: f64,
    /// Initial mass combined with the three boundary flux integrals.
    pub predicted_mass: f64,
    pub gap: f64,
    pub initial_mass: f64,
    /// ∫₀^T (∂_x²u)²(t,0) dt.
    pub flux_second: f64,
    /// 2 ∫₀^T ∂_x³u·∂_x u (t,0) dt.
    pub flux_cross: f64,
    /// 2 ∫₀^T ∂_x⁴u·u (t,0) dt.
    pub flux_fourth: f64,
    pub accuracy_warning: Option<String>,
}

/// Evaluates the linear mass budget: on the right half-line,
///   ∫₀^∞ u²(T) = ∫₀^∞ u²(0) − ∫₀^T (∂_x²u)² + 2∫₀^T ∂_x³u ∂_x u − 2∫₀^T ∂_x⁴u·u,
/// with all traces at x = 0; on the left half-line the three flux signs
/// flip (the two half-line budgets sum to exact mass conservation).
/// Boundary traces are evaluated by spectral differentiation and exact
/// Fourier interpolation at x = 0.
pub fn energy_identity_report(u: &Field2D, half: HalfLine) -> Result<EnergyReport> {
    if u.domain != DomainTag::Physical {
        return Err(Error::structural(
            "energy_identity_report expects a physical-domain field",
        ));
    }
    let zero_node = u
        .grid
        .space
        .index_of(0.0)
        .ok_or_else(|| Error::structural("space grid must contain x = 0 as a node"))?;
    let nt = u.grid.time.n;
    let nx = u.grid.space.n;
    let dx = u.grid.space.dx();
    let dt = u.grid.time.dx();

    // Traces ∂_x^k u(t, 0) = (1/L) Σ_m (iξ_m)^k û_m.
    let length = u.grid.space.length;
    let mut traces = vec![[0.0f64; 5]; nt];
    for it in 0..nt {
        let hat = forward_transform(&u.row(it))?;
        for k in 0..5 {
            let mut acc = Complex64::new(0.0, 0.0);
            for m in 0..nx {
                let ixi = Complex64::new(0.0, u.grid.space.xi(m));
                acc += ixi.powu(k as u32) * hat.values[m];
            }
            traces[it][k] = (acc / length).re;
        }
    }

    // Half-line mass: trapezoid with half weight at the boundary node plus
    // the Euler–Maclaurin endpoint correction ±(dx²/12)(u²)′(0), which the
    // cut at x = 0 otherwise leaves as the dominant O(dx²) error.
    let mass = |row: &Field1D, it: usize| -> f64 {
        let mut acc = 0.5 * row.values[zero_node].norm_sqr();
        for ix in 0..nx {
            let x = u.grid.space.node(ix);
            let keep = match half {
                HalfLine::Right => x > 0.0,
                HalfLine::Left => x < 0.0,
            };
            if keep {
                acc += row.values[ix].norm_sqr();
            }
        }
        let endpoint_slope = 2.0 * traces[it][0] * traces[it][1];
        let correction = match half {
            HalfLine::Right => dx * dx / 12.0 * endpoint_slope,
            HalfLine::Left => -dx * dx / 12.0 * endpoint_slope,
        };
        dx * acc + correction
    };

    // Trapezoid in time over [0, (nt−1)dt].
    let time_integral = |f: &dyn Fn(usize) -> f64| -> f64 {
        let mut acc = 0.0;
        for it in 1..nt {
            acc += 0.5 * dt * (f(it - 1) + f(it));
        }
        acc
    };
    let flux_second = time_integral(&|it| traces[it][2] * traces[it][2]);
    let flux_cross = time_integral(&|it| 2.0 * traces[it][3] * traces[it][1]);
    let flux_fourth = time_integral(&|it| 2.0 * traces[it][4] * traces[it][0]);

    let initial_mass = mass(&u.row(0), 0);
    let final_mass = mass(&u.row(nt - 1), nt - 1);
    let sign = match half {
        HalfLine::Right => 1.0,
        HalfLine::Left => -1.0,
    };
    let predicted_mass = initial_mass + sign * (-flux_second + flux_cross - flux_fourth);

    // Warnings target visible problems: wrapped radiation at the periodic
    // seam (relative amplitude above 1e-3 biases the half-line split) or a
    // field that is not actually real-valued.
    let mut accuracy_warning = None;
    let wrap = u.wrap_contamination_space();
    if wrap > 1e-3 {
        accuracy_warning = Some(format!(
            "relative field magnitude {wrap:.3e} near the wrap boundary; half-line split is contaminated"
        ));
    }
    let scale = u.max_abs();
    let imag = u.imag_residual();
    if scale > 0.0 && imag > 1e-6 * scale {
        accuracy_warning = Some(format!(
            "field carries imaginary residual {imag:.3e} (peak magnitude {scale:.3e})"
        ));
    }

    Ok(EnergyReport {
        final_mass,
        predicted_mass,
        gap: (final_mass - predicted_mass).abs(),
        initial_mass,
        flux_second,
        flux_cross,
        flux_fourth,
        accuracy_warning,
    })
}
