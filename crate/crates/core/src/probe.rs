//! Brute-force evaluation of the bilinear and trilinear block functionals
//! and empirical scale-uniformity probes of the multilinear estimates.
//!
//! The central objects are discrete functions on the modulation–frequency
//! plane (ζ, ξ).  The bilinear functional couples two of them through a
//! frequency-shifted third; the quadratic resonance polynomial supplies the
//! modulation shift.  All probes express "the estimate's constant does not
//! grow with scale" as a fitted log-slope criterion, never as an absolute
//! constant.

use crate::error::{Error, Result};
use crate::nonlinear::{self, NonlinearityKind};
use crate::norms::{xsb_dalpha_norm, xsb_norm, ysb_norm};
use crate::propagator::propagate;
use crate::special;
use crate::spectral::{
    apply_multiplier, lp_project, DomainTag, Field1D, Field2D, Grid1D, SpaceTimeGrid,
};
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Cell-count ceiling per factor for the bilinear functional (direct
/// summation is quartic in this count).
pub const BILINEAR_CELL_LIMIT: usize = 4096;
/// Cell-count ceiling per factor for the trilinear functional.
pub const TRILINEAR_CELL_LIMIT: usize = 256;

// ---------------------------------------------------------------------------
// Discrete functions on the (ζ, ξ) plane
// ---------------------------------------------------------------------------

/// A real-valued function sampled on a rectangle of the (ζ, ξ) plane.
///
/// The ξ axis lives on a global lattice `{m·dxi : m ∈ Z}` and the rectangle
/// holds columns `xi_first ..= xi_first + nxi − 1` of it, so sums of sampled
/// frequencies land exactly on lattice nodes.  The ζ axis is a plain uniform
/// grid starting at `zeta_start`; shifted evaluations interpolate linearly
/// in ζ and vanish outside the rectangle.
#[derive(Clone, Debug)]
pub struct ZetaXiFn {
    pub dzeta: f64,
    pub zeta_start: f64,
    pub dxi: f64,
    pub xi_first: i64,
    pub nzeta: usize,
    pub nxi: usize,
    /// Row-major samples: index = iz · nxi + ix.
    pub values: Vec<f64>,
}

impl ZetaXiFn {
    pub fn new(
        dzeta: f64,
        zeta_start: f64,
        dxi: f64,
        xi_first: i64,
        nzeta: usize,
        nxi: usize,
        values: Vec<f64>,
    ) -> Result<Self> {
        if !(dzeta > 0.0) || !(dxi > 0.0) || !dzeta.is_finite() || !dxi.is_finite() {
            return Err(Error::domain("mesh steps must be positive and finite"));
        }
        if nzeta == 0 || nxi == 0 || values.len() != nzeta * nxi {
            return Err(Error::structural(format!(
                "value count {} does not fill a {nzeta} x {nxi} rectangle",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("samples must be finite"));
        }
        Ok(ZetaXiFn {
            dzeta,
            zeta_start,
            dxi,
            xi_first,
            nzeta,
            nxi,
            values,
        })
    }

    pub fn zeta(&self, iz: usize) -> f64 {
        self.zeta_start + iz as f64 * self.dzeta
    }

    pub fn xi(&self, ix: usize) -> f64 {
        (self.xi_first + ix as i64) as f64 * self.dxi
    }

    pub fn at(&self, iz: usize, ix: usize) -> f64 {
        self.values[iz * self.nxi + ix]
    }

    /// `sqrt( Σ v² dζ dξ )`.
    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self.values.iter().map(|v| v * v).sum();
        (s * self.dzeta * self.dxi).sqrt()
    }

    /// The reflection f(ζ, ξ) → f(−ζ, −ξ), staying on the same lattices.
    pub fn reflected(&self) -> ZetaXiFn {
        let mut values = Vec::with_capacity(self.values.len());
        for iz in (0..self.nzeta).rev() {
            for ix in (0..self.nxi).rev() {
                values.push(self.at(iz, ix));
            }
        }
        ZetaXiFn {
            dzeta: self.dzeta,
            zeta_start: -(self.zeta_start + (self.nzeta - 1) as f64 * self.dzeta),
            dxi: self.dxi,
            xi_first: -(self.xi_first + self.nxi as i64 - 1),
            nzeta: self.nzeta,
            nxi: self.nxi,
            values,
        }
    }

    fn column_of_global(&self, m: i64) -> Option<usize> {
        let ix = m - self.xi_first;
        if ix >= 0 && (ix as usize) < self.nxi {
            Some(ix as usize)
        } else {
            None
        }
    }

    /// Linear interpolation along ζ within one column; zero outside.
    fn interp_zeta(&self, ix: usize, zeta: f64) -> f64 {
        let u = (zeta - self.zeta_start) / self.dzeta;
        if !(u > -1.0 && u < self.nzeta as f64) {
            return 0.0;
        }
        let base = u.floor();
        let fr = u - base;
        let i0 = base as isize;
        let lo = if i0 >= 0 {
            self.values[i0 as usize * self.nxi + ix]
        } else {
            0.0
        };
        let i1 = i0 + 1;
        let hi = if (i1 as usize) < self.nzeta && i1 >= 0 {
            self.values[i1 as usize * self.nxi + ix]
        } else {
            0.0
        };
        lo * (1.0 - fr) + hi * fr
    }
}

fn guard_cells(fs: &[&ZetaXiFn], limit: usize) -> Result<()> {
    for f in fs {
        let n = f.nzeta * f.nxi;
        if n > limit {
            return Err(Error::domain(format!(
                "cost guard: factor holds {n} cells, limit is {limit}"
            )));
        }
    }
    Ok(())
}

fn guard_shared_lattice(fs: &[&ZetaXiFn]) -> Result<()> {
    let dxi = fs[0].dxi;
    if fs.iter().any(|f| f.dxi != dxi) {
        return Err(Error::structural(
            "factors must share one frequency lattice step",
        ));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// The bilinear and trilinear functionals
// ---------------------------------------------------------------------------

/// `Σ f(ζ₁,ξ₁) g(ζ₂,ξ₂) h(ζ₁+ζ₂+H(ξ₁,ξ₂), ξ₁+ξ₂) dζ₁dξ₁dζ₂dξ₂`
/// with `H` the quadratic resonance polynomial.  Frequency sums land
/// exactly on `h`'s lattice; the shifted modulation argument interpolates
/// linearly in ζ.
pub fn j2(f: &ZetaXiFn, g: &ZetaXiFn, h: &ZetaXiFn) -> Result<f64> {
    guard_shared_lattice(&[f, g, h])?;
    guard_cells(&[f, g, h], BILINEAR_CELL_LIMIT)?;
    let mut acc = 0.0;
    for ix1 in 0..f.nxi {
        let xi1 = f.xi(ix1);
        let m1 = f.xi_first + ix1 as i64;
        for ix2 in 0..g.nxi {
            let Some(col) = h.column_of_global(m1 + g.xi_first + ix2 as i64) else {
                continue;
            };
            let shift = nonlinear::resonance_h(xi1, g.xi(ix2));
            for iz1 in 0..f.nzeta {
                let v1 = f.values[iz1 * f.nxi + ix1];
                if v1 == 0.0 {
                    continue;
                }
                let z1s = f.zeta(iz1) + shift;
                for iz2 in 0..g.nzeta {
                    let v2 = g.values[iz2 * g.nxi + ix2];
                    if v2 == 0.0 {
                        continue;
                    }
                    acc += v1 * v2 * h.interp_zeta(col, z1s + g.zeta(iz2));
                }
            }
        }
    }
    Ok(acc * f.dzeta * f.dxi * g.dzeta * g.dxi)
}

/// The four-factor analogue with the cubic resonance polynomial:
/// `Σ f₁f₂f₃·f₄(ζ₁+ζ₂+ζ₃+G(ξ₁,ξ₂,ξ₃), ξ₁+ξ₂+ξ₃)`.
pub fn j3(f1: &ZetaXiFn, f2: &ZetaXiFn, f3: &ZetaXiFn, f4: &ZetaXiFn) -> Result<f64> {
    guard_shared_lattice(&[f1, f2, f3, f4])?;
    guard_cells(&[f1, f2, f3, f4], TRILINEAR_CELL_LIMIT)?;
    let mut acc = 0.0;
    for ix1 in 0..f1.nxi {
        let xi1 = f1.xi(ix1);
        let m1 = f1.xi_first + ix1 as i64;
        for ix2 in 0..f2.nxi {
            let xi2 = f2.xi(ix2);
            let m12 = m1 + f2.xi_first + ix2 as i64;
            for ix3 in 0..f3.nxi {
                let Some(col) = f4.column_of_global(m12 + f3.xi_first + ix3 as i64) else {
                    continue;
                };
                let shift = nonlinear::resonance_g(xi1, xi2, f3.xi(ix3));
                for iz1 in 0..f1.nzeta {
                    let v1 = f1.values[iz1 * f1.nxi + ix1];
                    if v1 == 0.0 {
                        continue;
                    }
                    let z1s = f1.zeta(iz1) + shift;
                    for iz2 in 0..f2.nzeta {
                        let v2 = f2.values[iz2 * f2.nxi + ix2];
                        if v2 == 0.0 {
                            continue;
                        }
                        let v12 = v1 * v2;
                        let z12 = z1s + f2.zeta(iz2);
                        for iz3 in 0..f3.nzeta {
                            let v3 = f3.values[iz3 * f3.nxi + ix3];
                            if v3 == 0.0 {
                                continue;
                            }
                            acc += v12 * v3 * f4.interp_zeta(col, z12 + f3.zeta(iz3));
                        }
                    }
                }
            }
        }
    }
    Ok(acc * f1.dzeta * f1.dxi * f2.dzeta * f2.dxi * f3.dzeta * f3.dxi)
}

/// The bilinear functional computed along an independent route: each factor
/// is carried to the (τ, ξ) plane by the dispersive shear τ = ζ + ξ⁵, the
/// first two are convolved there, and the result is paired with the third.
/// Requires all three factors on one (ζ, ξ) lattice whose ζ step divides
/// every dispersion shift ξ⁵ exactly (so the shear is a lattice bijection).
/// The pairing reproduces the shifted sum when the factors are even in ζ.
pub fn j2_sharp_convolution(f: &ZetaXiFn, g: &ZetaXiFn, h: &ZetaXiFn) -> Result<f64> {
    guard_shared_lattice(&[f, g, h])?;
    guard_cells(&[f, g, h], BILINEAR_CELL_LIMIT)?;
    let dzeta = f.dzeta;
    for q in [g.dzeta, h.dzeta] {
        if q != dzeta {
            return Err(Error::structural(
                "the convolution route needs one shared modulation step",
            ));
        }
    }
    let zeta_index = |fun: &ZetaXiFn| -> Result<i64> {
        let q = fun.zeta_start / dzeta;
        if (q - q.round()).abs() > 1e-9 {
            return Err(Error::structural(
                "modulation offsets must sit on the shared lattice",
            ));
        }
        Ok(q.round() as i64)
    };
    let shear = |fun: &ZetaXiFn, ix: usize| -> Result<i64> {
        let q = fun.xi(ix).powi(5) / dzeta;
        if (q - q.round()).abs() > 1e-6 * q.abs().max(1.0) {
            return Err(Error::structural(
                "the modulation lattice cannot host the dispersion shifts exactly",
            ));
        }
        Ok(q.round() as i64)
    };
    let zf = zeta_index(f)?;
    let zg = zeta_index(g)?;
    let zh = zeta_index(h)?;
    let mut h_shear = Vec::with_capacity(h.nxi);
    for ix in 0..h.nxi {
        h_shear.push(shear(h, ix)?);
    }
    let mut acc = 0.0;
    for ix1 in 0..f.nxi {
        let m1 = f.xi_first + ix1 as i64;
        let s1 = shear(f, ix1)?;
        for ix2 in 0..g.nxi {
            let Some(col) = h.column_of_global(m1 + g.xi_first + ix2 as i64) else {
                continue;
            };
            let s2 = shear(g, ix2)?;
            // τ₁ + τ₂ = τ₃ fixes the third modulation row exactly.
            let base = zf + s1 + zg + s2 - h_shear[col] - zh;
            for iz1 in 0..f.nzeta {
                let v1 = f.values[iz1 * f.nxi + ix1];
                if v1 == 0.0 {
                    continue;
                }
                for iz2 in 0..g.nzeta {
                    let v2 = g.values[iz2 * g.nxi + ix2];
                    if v2 == 0.0 {
                        continue;
                    }
                    let row = base + iz1 as i64 + iz2 as i64;
                    if row >= 0 && (row as usize) < h.nzeta {
                        acc += v1 * v2 * h.values[row as usize * h.nxi + col];
                    }
                }
            }
        }
    }
    Ok(acc * f.dzeta * f.dxi * g.dzeta * g.dxi)
}

// ---------------------------------------------------------------------------
// Loose-mesh variants for far-separated blocks (support diagnostics)
// ---------------------------------------------------------------------------

/// Bilinear sum with per-factor frequency meshes: the summed frequency is
/// matched to the nearest column of the shifted factor within half a step.
/// Used only for support diagnostics, where blocks can sit many octaves
/// apart and a shared lattice would burst the cost guard.
fn j2_loose(f: &ZetaXiFn, g: &ZetaXiFn, h: &ZetaXiFn) -> Result<f64> {
    guard_cells(&[f, g, h], BILINEAR_CELL_LIMIT)?;
    let mut acc = 0.0;
    for ix1 in 0..f.nxi {
        let xi1 = f.xi(ix1);
        for ix2 in 0..g.nxi {
            let xi2 = g.xi(ix2);
            let target = xi1 + xi2;
            let m = (target / h.dxi).round() as i64;
            let Some(col) = h.column_of_global(m) else {
                continue;
            };
            if (h.xi(col) - target).abs() > 0.5 * h.dxi + 1e-12 {
                continue;
            }
            let shift = nonlinear::resonance_h(xi1, xi2);
            for iz1 in 0..f.nzeta {
                let v1 = f.values[iz1 * f.nxi + ix1];
                if v1 == 0.0 {
                    continue;
                }
                let z1s = f.zeta(iz1) + shift;
                for iz2 in 0..g.nzeta {
                    let v2 = g.values[iz2 * g.nxi + ix2];
                    if v2 == 0.0 {
                        continue;
                    }
                    acc += v1 * v2 * h.interp_zeta(col, z1s + g.zeta(iz2));
                }
            }
        }
    }
    Ok(acc * f.dzeta * f.dxi * g.dzeta * g.dxi)
}

/// Trilinear analogue of [`j2_loose`].
fn j3_loose(f1: &ZetaXiFn, f2: &ZetaXiFn, f3: &ZetaXiFn, f4: &ZetaXiFn) -> Result<f64> {
    guard_cells(&[f1, f2, f3, f4], TRILINEAR_CELL_LIMIT)?;
    let mut acc = 0.0;
    for ix1 in 0..f1.nxi {
        let xi1 = f1.xi(ix1);
        for ix2 in 0..f2.nxi {
            let xi2 = f2.xi(ix2);
            for ix3 in 0..f3.nxi {
                let xi3 = f3.xi(ix3);
                let target = xi1 + xi2 + xi3;
                let m = (target / f4.dxi).round() as i64;
                let Some(col) = f4.column_of_global(m) else {
                    continue;
                };
                if (f4.xi(col) - target).abs() > 0.5 * f4.dxi + 1e-12 {
                    continue;
                }
                let shift = nonlinear::resonance_g(xi1, xi2, xi3);
                for iz1 in 0..f1.nzeta {
                    let v1 = f1.values[iz1 * f1.nxi + ix1];
                    if v1 == 0.0 {
                        continue;
                    }
                    let z1s = f1.zeta(iz1) + shift;
                    for iz2 in 0..f2.nzeta {
                        let v2 = f2.values[iz2 * f2.nxi + ix2];
                        if v2 == 0.0 {
                            continue;
                        }
                        let v12 = v1 * v2;
                        let z12 = z1s + f2.zeta(iz2);
                        for iz3 in 0..f3.nzeta {
                            let v3 = f3.values[iz3 * f3.nxi + ix3];
                            if v3 == 0.0 {
                                continue;
                            }
                            acc += v12 * v3 * f4.interp_zeta(col, z12 + f3.zeta(iz3));
                        }
                    }
                }
            }
        }
    }
    Ok(acc * f1.dzeta * f1.dxi * f2.dzeta * f2.dxi * f3.dzeta * f3.dxi)
}

// ---------------------------------------------------------------------------
// Dyadic block bumps
// ---------------------------------------------------------------------------

/// The magnitude range of dyadic block `idx`: the centered ball of radius 2
/// for index 0, the band `[2^{idx−1}, 2^{idx+1}]` otherwise.
pub fn block_band(idx: u32) -> (f64, f64) {
    if idx == 0 {
        (0.0, 2.0)
    } else {
        (2f64.powi(idx as i32 - 1), 2f64.powi(idx as i32 + 1))
    }
}

fn block_taper(idx: u32, v: f64) -> f64 {
    if idx == 0 {
        special::eta0(v)
    } else {
        special::chi_k(idx, v)
    }
}

/// A seeded random realization of a unit-norm block function: nonnegative,
/// smooth within its block, and supported exactly on
/// `{|ζ| in block j} × {|ξ| in block k}`.
#[derive(Clone, Debug)]
pub struct DyadicBump {
    pub k: u32,
    pub j: u32,
    pub f: ZetaXiFn,
}

impl DyadicBump {
    /// Realize block (k, j) on the global frequency lattice with step
    /// `dxi`, with `zeta_band_nodes` ζ samples across each modulation band.
    pub fn realize(
        k: u32,
        j: u32,
        dxi: f64,
        zeta_band_nodes: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<DyadicBump> {
        if !(dxi > 0.0) || !dxi.is_finite() {
            return Err(Error::domain("frequency step must be positive"));
        }
        if zeta_band_nodes == 0 {
            return Err(Error::domain("need at least one modulation node per band"));
        }
        let (_, xi_hi) = block_band(k);
        let reach = (xi_hi / dxi).floor() as i64;
        let nxi = (2 * reach + 1) as usize;
        let xi_first = -reach;
        let (dzeta, nzeta, zeta_start) = if j == 0 {
            let n = 2 * zeta_band_nodes;
            (4.0 / n as f64, n, -2.0)
        } else {
            let band = 3.0 * 2f64.powi(j as i32 - 1);
            let dz = band / zeta_band_nodes as f64;
            let span = 2f64.powi(j as i32 + 2);
            let n = (span / dz).ceil() as usize;
            (dz, n, -2f64.powi(j as i32 + 1))
        };
        // Smooth positive modulation of the block window: the exponential of
        // a few random low-order waves in block-normalized coordinates.
        let mut waves = Vec::new();
        for _ in 0..3 {
            waves.push((
                rng.gen_range(0.0..0.7),
                rng.gen_range(0.3..2.0),
                rng.gen_range(0.3..2.0),
                rng.gen_range(0.0..std::f64::consts::TAU),
            ));
        }
        let (_, zeta_hi) = block_band(j);
        let mut values = Vec::with_capacity(nzeta * nxi);
        for iz in 0..nzeta {
            let zeta = zeta_start + iz as f64 * dzeta;
            let u = zeta / zeta_hi;
            for ix in 0..nxi {
                let xi = (xi_first + ix as i64) as f64 * dxi;
                let taper = block_taper(j, zeta) * block_taper(k, xi);
                if taper == 0.0 {
                    values.push(0.0);
                    continue;
                }
                let v = xi / xi_hi;
                let mut phase = 0.0;
                for (a, p, q, ph) in &waves {
                    phase += a * (std::f64::consts::TAU * (p * u + q * v) + ph).cos();
                }
                values.push(taper * phase.exp());
            }
        }
        let f = ZetaXiFn::new(dzeta, zeta_start, dxi, xi_first, nzeta, nxi, values)?;
        let norm = f.l2_norm();
        if norm == 0.0 {
            return Err(Error::domain(format!(
                "block ({k}, {j}) has no lattice support at frequency step {dxi}"
            )));
        }
        let mut f = f;
        for v in f.values.iter_mut() {
            *v /= norm;
        }
        Ok(DyadicBump { k, j, f })
    }

    /// Squared mass lying outside the block, relative to the total.
    pub fn support_leakage(&self) -> f64 {
        let (zeta_lo, zeta_hi) = block_band(self.j);
        let (xi_lo, xi_hi) = block_band(self.k);
        let mut outside = 0.0;
        let mut total = 0.0;
        for iz in 0..self.f.nzeta {
            let zeta = self.f.zeta(iz).abs();
            for ix in 0..self.f.nxi {
                let xi = self.f.xi(ix).abs();
                let v = self.f.at(iz, ix);
                total += v * v;
                let in_block =
                    (zeta_lo..=zeta_hi).contains(&zeta) && (xi_lo..=xi_hi).contains(&xi);
                if !in_block {
                    outside += v * v;
                }
            }
        }
        if total == 0.0 {
            0.0
        } else {
            outside / total
        }
    }
}

// ---------------------------------------------------------------------------
// Support property
// ---------------------------------------------------------------------------

type Span = (f64, f64);

fn signed_set(idx: u32) -> Vec<Span> {
    let (lo, hi) = block_band(idx);
    if idx == 0 {
        vec![(-hi, hi)]
    } else {
        vec![(-hi, -lo), (lo, hi)]
    }
}

fn minkowski(a: &[Span], b: &[Span]) -> Vec<Span> {
    let mut out = Vec::new();
    for (a0, a1) in a {
        for (b0, b1) in b {
            out.push((a0 + b0, a1 + b1));
        }
    }
    out
}

fn spans_intersect(a: &[Span], b: &[Span]) -> bool {
    a.iter()
        .any(|(a0, a1)| b.iter().any(|(b0, b1)| a0 <= b1 && b0 <= a1))
}

fn span_samples(set: &[Span], per: usize) -> Vec<f64> {
    let mut out = Vec::new();
    for (lo, hi) in set {
        for i in 0..per {
            let t = if per == 1 {
                0.5
            } else {
                i as f64 / (per - 1) as f64
            };
            out.push(lo + t * (hi - lo));
        }
    }
    out
}

/// Outcome of a block-compatibility check: interval reachability of the
/// frequency and modulation constraints, plus the functional evaluated on a
/// fixed-seed bump realization of the blocks.
#[derive(Clone, Debug, Serialize)]
pub struct SupportDiagnostic {
    pub frequency_reachable: bool,
    pub modulation_reachable: bool,
    pub functional_value: f64,
    pub norm_product: f64,
    /// False when a block had no lattice node at the diagnostic resolution
    /// (possible for blocks many octaves below the largest).
    pub realized: bool,
}

/// Decide whether blocks `(k_i, j_i)` can interact at all: the sampled
/// frequencies must be able to sum into the last block, and the modulation
/// bands shifted by the resonance range must be able to reach the last
/// modulation band.  Alongside the interval arithmetic, the functional is
/// evaluated on a deterministic bump realization; incompatible blocks must
/// produce a value below 1e−10 times the norm product.
///
/// Three blocks select the bilinear functional, four the trilinear.
pub fn support_property_check(blocks: &[(u32, u32)]) -> Result<(bool, SupportDiagnostic)> {
    if blocks.len() != 3 && blocks.len() != 4 {
        return Err(Error::structural(format!(
            "support check takes 3 or 4 blocks, got {}",
            blocks.len()
        )));
    }
    let n_in = blocks.len() - 1;
    let xi_sets: Vec<Vec<Span>> = blocks.iter().map(|(k, _)| signed_set(*k)).collect();
    let zeta_sets: Vec<Vec<Span>> = blocks.iter().map(|(_, j)| signed_set(*j)).collect();

    let mut sum_set = xi_sets[0].clone();
    for s in xi_sets.iter().take(n_in).skip(1) {
        sum_set = minkowski(&sum_set, s);
    }
    let frequency_reachable = spans_intersect(&sum_set, &xi_sets[n_in]);

    // Hull of the resonance values over admissible frequency tuples.
    let per = if n_in == 2 { 96 } else { 24 };
    let mut rlo = f64::INFINITY;
    let mut rhi = f64::NEG_INFINITY;
    let samples: Vec<Vec<f64>> = xi_sets
        .iter()
        .take(n_in)
        .map(|s| span_samples(s, per))
        .collect();
    let target = &xi_sets[n_in];
    let in_target = |x: f64| target.iter().any(|(lo, hi)| x >= *lo && x <= *hi);
    if n_in == 2 {
        for &x1 in &samples[0] {
            for &x2 in &samples[1] {
                if in_target(x1 + x2) {
                    let r = nonlinear::resonance_h(x1, x2);
                    rlo = rlo.min(r);
                    rhi = rhi.max(r);
                }
            }
        }
    } else {
        for &x1 in &samples[0] {
            for &x2 in &samples[1] {
                for &x3 in &samples[2] {
                    if in_target(x1 + x2 + x3) {
                        let r = nonlinear::resonance_g(x1, x2, x3);
                        rlo = rlo.min(r);
                        rhi = rhi.max(r);
                    }
                }
            }
        }
    }
    let modulation_reachable = if !frequency_reachable || rlo > rhi {
        false
    } else {
        let mut reach = zeta_sets[0].clone();
        for s in zeta_sets.iter().take(n_in).skip(1) {
            reach = minkowski(&reach, s);
        }
        reach = minkowski(&reach, &[(rlo, rhi)]);
        spans_intersect(&reach, &zeta_sets[n_in])
    };

    // Deterministic realization at per-block resolution (64 or 32 columns
    // per block regardless of scale).
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_b10c);
    let (shift_pow, zeta_nodes) = if n_in == 2 { (4, 6) } else { (3, 2) };
    let mut bumps = Vec::new();
    let mut realized = true;
    for (k, j) in blocks {
        let dxi = 2f64.powi(*k as i32 - shift_pow);
        match DyadicBump::realize(*k, *j, dxi, zeta_nodes, &mut rng) {
            Ok(b) => bumps.push(Some(b)),
            Err(_) => {
                bumps.push(None);
                realized = false;
            }
        }
    }
    let functional_value = if realized {
        let fs: Vec<&ZetaXiFn> = bumps.iter().map(|b| &b.as_ref().unwrap().f).collect();
        if n_in == 2 {
            j2_loose(fs[0], fs[1], fs[2])?
        } else {
            j3_loose(fs[0], fs[1], fs[2], fs[3])?
        }
    } else {
        0.0
    };
    let diag = SupportDiagnostic {
        frequency_reachable,
        modulation_reachable,
        functional_value,
        norm_product: 1.0,
        realized,
    };
    Ok((frequency_reachable && modulation_reachable, diag))
}

// ---------------------------------------------------------------------------
// Block-estimate bounds
// ---------------------------------------------------------------------------

/// The six scalar block-estimate bounds (without their absolute constants).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BlockVariant {
    L2a,
    L2b,
    L2c,
    L3a,
    L3b1,
    L3b2,
}

impl BlockVariant {
    pub fn name(self) -> &'static str {
        match self {
            BlockVariant::L2a => "L2a",
            BlockVariant::L2b => "L2b",
            BlockVariant::L2c => "L2c",
            BlockVariant::L3a => "L3a",
            BlockVariant::L3b1 => "L3b1",
            BlockVariant::L3b2 => "L3b2",
        }
    }

    pub fn is_bilinear(self) -> bool {
        matches!(self, BlockVariant::L2a | BlockVariant::L2b | BlockVariant::L2c)
    }
}

fn sorted_desc<T: Copy + PartialOrd>(v: &[T]) -> Vec<T> {
    let mut s = v.to_vec();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s
}

fn p2(e: f64) -> f64 {
    2f64.powf(e)
}

/// The scalar right-hand side of the chosen block estimate at the given
/// per-slot frequency and modulation indices (norm factors excluded).
/// Variant hypotheses are enforced; a violation names the failed condition.
pub fn block_bound_rhs(variant: BlockVariant, ks: &[i32], js: &[u32]) -> Result<f64> {
    let want = if variant.is_bilinear() { 3 } else { 4 };
    if ks.len() != want || js.len() != want {
        return Err(Error::structural(format!(
            "{} takes {want} frequency and modulation indices",
            variant.name()
        )));
    }
    let ksort = sorted_desc(ks);
    let jsort = sorted_desc(js);
    let (kmax, kmin) = (ksort[0], *ksort.last().unwrap());
    let jmax = jsort[0];
    match variant {
        BlockVariant::L2a => {
            if kmax - kmin > 5 {
                return Err(Error::domain(format!(
                    "hypothesis k_max - k_min <= 5 violated: {kmax} - {kmin}"
                )));
            }
            let (jmin, jmed) = (jsort[2], jsort[1]);
            Ok(p2(jmin as f64 / 2.0 + jmed as f64 / 4.0 - 0.75 * kmax as f64))
        }
        BlockVariant::L2b => {
            let kmed = ksort[1];
            if kmed - kmin < 5 {
                return Err(Error::domain(format!(
                    "hypothesis k_min << k_med violated: k_med - k_min = {}",
                    kmed - kmin
                )));
            }
            if kmax - kmed > 5 {
                return Err(Error::domain(format!(
                    "hypothesis k_med ~ k_max violated: k_max - k_med = {}",
                    kmax - kmed
                )));
            }
            let jsum: f64 = js.iter().map(|j| *j as f64).sum();
            let best = ks
                .iter()
                .zip(js)
                .map(|(k, j)| *k as f64 + *j as f64)
                .fold(f64::NEG_INFINITY, f64::max);
            Ok(p2(jsum / 2.0 - 1.5 * kmax as f64 - best / 2.0))
        }
        BlockVariant::L2c => {
            let jmin = jsort[2];
            Ok(p2(jmin as f64 / 2.0 + kmin as f64 / 2.0))
        }
        BlockVariant::L3a => {
            let (jmin, jthd) = (jsort[3], jsort[2]);
            let kthd = ksort[2];
            Ok(p2(
                (jmin + jthd) as f64 / 2.0 + (kmin + kthd) as f64 / 2.0,
            ))
        }
        BlockVariant::L3b1 | BlockVariant::L3b2 => {
            let kthd = ksort[2];
            if kthd > kmax - 10 {
                return Err(Error::domain(format!(
                    "hypothesis k_thd <= k_max - 10 violated: {kthd} > {kmax} - 10"
                )));
            }
            let carries = ks
                .iter()
                .zip(js)
                .any(|(k, j)| *k == kthd && *j == jmax);
            let jsum: f64 = js.iter().map(|j| *j as f64).sum();
            match variant {
                BlockVariant::L3b1 => {
                    if !carries {
                        return Err(Error::domain(
                            "hypothesis violated: no slot carries both k_thd and j_max",
                        ));
                    }
                    Ok(p2(
                        jsum / 2.0 - 2.0 * kmax as f64 + kthd as f64 / 2.0 - jmax as f64 / 2.0,
                    ))
                }
                _ => {
                    if carries {
                        return Err(Error::domain(
                            "hypothesis violated: a slot carries both k_thd and j_max",
                        ));
                    }
                    Ok(p2(
                        jsum / 2.0 - 2.0 * kmax as f64 + kmin as f64 / 2.0 - jmax as f64 / 2.0,
                    ))
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Probe reports
// ---------------------------------------------------------------------------

/// One evaluated configuration: the dyadic scale it probes, an interaction
/// label, and the measured left/right ratio.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct ProbeSample {
    pub scale: u32,
    pub class: String,
    pub ratio: f64,
}

/// Per-class digest: largest ratio and the least-squares slope of
/// log₂(max ratio per scale) against the scale.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct ClassSummary {
    pub class: String,
    pub max_ratio: f64,
    pub log_slope: f64,
}

/// Result of an ensemble probe: every sampled ratio plus per-class digests.
/// A slope near zero (or below) means the estimate's hidden constant shows
/// no systematic growth across scales.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct ProbeReport {
    pub probe: String,
    pub seed: u64,
    pub ensemble: usize,
    pub samples: Vec<ProbeSample>,
    pub max_ratio: f64,
    pub classes: Vec<ClassSummary>,
}

impl ProbeReport {
    fn assemble(probe: String, seed: u64, ensemble: usize, samples: Vec<ProbeSample>) -> Self {
        let mut names: Vec<String> = samples.iter().map(|s| s.class.clone()).collect();
        names.sort();
        names.dedup();
        let mut classes = Vec::new();
        for name in names {
            let of_class: Vec<(u32, f64)> = samples
                .iter()
                .filter(|s| s.class == name)
                .map(|s| (s.scale, s.ratio))
                .collect();
            let (max_ratio, log_slope) = fitted_log_slope(&of_class);
            classes.push(ClassSummary {
                class: name,
                max_ratio,
                log_slope,
            });
        }
        let max_ratio = samples.iter().map(|s| s.ratio).fold(0.0, f64::max);
        ProbeReport {
            probe,
            seed,
            ensemble,
            samples,
            max_ratio,
            classes,
        }
    }

    pub fn class_slope(&self, class: &str) -> Option<f64> {
        self.classes
            .iter()
            .find(|c| c.class == class)
            .map(|c| c.log_slope)
    }

    /// The steepest per-class slope (0 when nothing was sampled).
    pub fn worst_slope(&self) -> f64 {
        if self.classes.is_empty() {
            return 0.0;
        }
        self.classes
            .iter()
            .map(|c| c.log_slope)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Max ratio overall, and the least-squares slope of log₂(max per scale)
/// against scale over scales with a nonzero max.
fn fitted_log_slope(samples: &[(u32, f64)]) -> (f64, f64) {
    let mut per_scale: Vec<(u32, f64)> = Vec::new();
    let mut max_ratio = 0.0f64;
    for &(scale, ratio) in samples {
        max_ratio = max_ratio.max(ratio);
        match per_scale.iter_mut().find(|(s, _)| *s == scale) {
            Some((_, m)) => *m = m.max(ratio),
            None => per_scale.push((scale, ratio)),
        }
    }
    per_scale.retain(|(_, m)| *m > 0.0);
    if per_scale.len() < 2 {
        return (max_ratio, 0.0);
    }
    let n = per_scale.len() as f64;
    let sx: f64 = per_scale.iter().map(|(s, _)| *s as f64).sum();
    let sy: f64 = per_scale.iter().map(|(_, m)| m.log2()).sum();
    let sxx: f64 = per_scale.iter().map(|(s, _)| (*s as f64).powi(2)).sum();
    let sxy: f64 = per_scale.iter().map(|(s, m)| *s as f64 * m.log2()).sum();
    let denom = n * sxx - sx * sx;
    if denom == 0.0 {
        return (max_ratio, 0.0);
    }
    (max_ratio, (n * sxy - sx * sy) / denom)
}

// ---------------------------------------------------------------------------
// Block-estimate probe
// ---------------------------------------------------------------------------

/// Ensemble probe of one block estimate: random near-diagonal blocks up to
/// frequency scale `k_hi`, bump realizations, ratio of the functional to
/// the scalar bound.  The pass signal is a per-scale max-ratio log-slope
/// that stays at or below 0.05.
pub fn probe_block_estimate(
    variant: BlockVariant,
    k_hi: u32,
    ensemble: usize,
    seed: u64,
) -> Result<ProbeReport> {
    if ensemble == 0 {
        return Err(Error::domain("ensemble must hold at least one sample"));
    }
    let k_floor = match variant {
        BlockVariant::L2b => 7,
        _ => 3,
    };
    if k_hi < k_floor {
        return Err(Error::domain(format!(
            "variant {} needs probing room: k_hi >= {k_floor}",
            variant.name()
        )));
    }
    if matches!(variant, BlockVariant::L3b1 | BlockVariant::L3b2) {
        return Err(Error::domain(
            "cost guard: blocks ten octaves apart cannot be realized within the cell limits",
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(ensemble);
    for _ in 0..ensemble {
        let mut sub = ChaCha8Rng::seed_from_u64(rng.gen());
        let kmax = sub.gen_range(k_floor..=k_hi);
        let (ks, columns_shift, zeta_nodes) = match variant {
            BlockVariant::L2a | BlockVariant::L2c => {
                let mut ks = vec![
                    kmax,
                    kmax - sub.gen_range(0..=2).min(kmax - 1),
                    kmax - sub.gen_range(0..=2).min(kmax - 1),
                ];
                ks.shuffle(&mut sub);
                (ks, 4, 6)
            }
            BlockVariant::L2b => {
                let kmed = kmax - sub.gen_range(0..=1);
                let mut ks = vec![kmax, kmed, kmed - 5];
                ks.shuffle(&mut sub);
                (ks, 6, 5)
            }
            _ => {
                let mut ks = vec![
                    kmax,
                    kmax - sub.gen_range(0..=2).min(kmax - 1),
                    kmax - sub.gen_range(0..=2).min(kmax - 1),
                    kmax - sub.gen_range(0..=2).min(kmax - 1),
                ];
                ks.shuffle(&mut sub);
                (ks, 3, 2)
            }
        };
        let dxi = 2f64.powi(kmax as i32 - columns_shift);
        let n = ks.len();
        // Small modulation indices for the inputs; the shifted slot gets an
        // index matched to the resonance magnitude at a random admissible
        // frequency tuple (otherwise the supports cannot meet).
        let mut js: Vec<u32> = (0..n - 1).map(|_| sub.gen_range(0..=5)).collect();
        let pick = |sub: &mut ChaCha8Rng, k: &u32| -> f64 {
            let (lo, hi) = block_band(*k);
            let sign = if sub.gen::<bool>() { 1.0 } else { -1.0 };
            sign * sub.gen_range(lo.max(1e-3)..hi)
        };
        let r = if n == 3 {
            nonlinear::resonance_h(pick(&mut sub, &ks[0]), pick(&mut sub, &ks[1]))
        } else {
            nonlinear::resonance_g(
                pick(&mut sub, &ks[0]),
                pick(&mut sub, &ks[1]),
                pick(&mut sub, &ks[2]),
            )
        };
        let jbig = if r.abs() < 2.0 {
            0
        } else {
            r.abs().log2().floor() as u32
        };
        let jitter: i32 = if sub.gen_range(0..10) < 3 {
            if sub.gen::<bool>() {
                1
            } else {
                -1
            }
        } else {
            0
        };
        js.push((jbig as i32 + jitter).max(0) as u32);
        let mut bumps = Vec::with_capacity(n);
        for (k, j) in ks.iter().zip(&js) {
            bumps.push(DyadicBump::realize(*k, *j, dxi, zeta_nodes, &mut sub)?);
        }
        let value = if n == 3 {
            j2(&bumps[0].f, &bumps[1].f, &bumps[2].f)?
        } else {
            j3(&bumps[0].f, &bumps[1].f, &bumps[2].f, &bumps[3].f)?
        };
        let ks_i32: Vec<i32> = ks.iter().map(|k| *k as i32).collect();
        let rhs = block_bound_rhs(variant, &ks_i32, &js)?;
        samples.push(ProbeSample {
            scale: kmax,
            class: "all".to_string(),
            ratio: value.abs() / rhs,
        });
    }
    Ok(ProbeReport::assemble(
        format!("block-{}", variant.name()),
        seed,
        ensemble,
        samples,
    ))
}

// ---------------------------------------------------------------------------
// Theorem-ratio probe
// ---------------------------------------------------------------------------

/// Which weighted norm measures the nonlinear output.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LhsWeight {
    /// The dispersive-weight family with exponents (s, −b).
    Dispersive,
    /// The time-weight family with exponents (s, −b).
    TimeBracket,
}

fn field_combine(a: &Field2D, b: &Field2D, sa: f64, sb: f64) -> Field2D {
    let mut out = a.clone();
    for (x, y) in out.values.iter_mut().zip(&b.values) {
        *x = *x * sa + *y * sb;
    }
    out
}

fn field_scale(a: &Field2D, s: f64) -> Field2D {
    let mut out = a.clone();
    for x in out.values.iter_mut() {
        *x *= s;
    }
    out
}

/// Apply the nonlinearity row by row over the time axis.
fn rowwise_nonlinearity(u: &Field2D, kind: NonlinearityKind) -> Result<Field2D> {
    let mut out = Field2D::zeros(u.grid, DomainTag::Physical);
    for it in 0..u.grid.time.n {
        let row = nonlinear::apply_f(&u.row(it), kind)?;
        out.set_row(it, &row);
    }
    Ok(out)
}

/// The mixed multilinear form underlying the nonlinearity, recovered by
/// polarization: two fields for the quadratic kind, three for the cubic.
pub fn mixed_nonlinearity(inputs: &[&Field2D], kind: NonlinearityKind) -> Result<Field2D> {
    if inputs.is_empty() {
        return Err(Error::structural("the mixed form needs input fields"));
    }
    let grid = inputs[0].grid;
    if inputs.iter().any(|u| u.grid != grid) {
        return Err(Error::structural("input fields must share one grid"));
    }
    match kind {
        NonlinearityKind::QuadraticNonlocal => {
            if inputs.len() != 2 {
                return Err(Error::structural(
                    "the quadratic form takes exactly two fields",
                ));
            }
            let plus = rowwise_nonlinearity(&field_combine(inputs[0], inputs[1], 1.0, 1.0), kind)?;
            let minus = rowwise_nonlinearity(&field_combine(inputs[0], inputs[1], 1.0, -1.0), kind)?;
            Ok(field_scale(&field_combine(&plus, &minus, 1.0, -1.0), 0.25))
        }
        NonlinearityKind::Cubic => {
            if inputs.len() != 3 {
                return Err(Error::structural("the cubic form takes exactly three fields"));
            }
            let (u, v, w) = (inputs[0], inputs[1], inputs[2]);
            let mut acc: Option<Field2D> = None;
            for (sv, sw) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                let sum = field_combine(&field_combine(u, v, 1.0, sv), w, 1.0, sw);
                let f = rowwise_nonlinearity(&sum, kind)?;
                let signed = field_scale(&f, sv * sw);
                acc = Some(match acc {
                    None => signed,
                    Some(a) => field_combine(&a, &signed, 1.0, 1.0),
                });
            }
            Ok(field_scale(&acc.unwrap(), 1.0 / 24.0))
        }
    }
}

/// Keep only spatial-frequency shells `lo ..= hi` of a physical field.
fn project_shells_2d(u: &Field2D, lo: u32, hi: u32) -> Result<Field2D> {
    let mut out = Field2D::zeros(u.grid, u.domain);
    let weight = |xi: f64| {
        let mut w = 0.0;
        for k in lo..=hi {
            w += block_taper(k, xi);
        }
        Complex64::new(w, 0.0)
    };
    for it in 0..u.grid.time.n {
        let row = apply_multiplier(&u.row(it), &weight)?;
        out.set_row(it, &row);
    }
    Ok(out)
}

/// One interaction-class ratio: the weighted norm of the (shell-projected)
/// nonlinear output over the product of the inputs' intersection norms.
/// Zero inputs give zero.
pub fn theorem_class_ratio(
    inputs: &[&Field2D],
    kind: NonlinearityKind,
    s: f64,
    b: f64,
    alpha: f64,
    out_shells: (u32, u32),
    lhs: LhsWeight,
) -> Result<f64> {
    let mut rhs = 1.0;
    for u in inputs {
        rhs *= xsb_dalpha_norm(u, s, b, alpha)?;
    }
    if rhs == 0.0 {
        return Ok(0.0);
    }
    let out = mixed_nonlinearity(inputs, kind)?;
    let projected = project_shells_2d(&out, out_shells.0, out_shells.1)?;
    let lhs_val = match lhs {
        LhsWeight::Dispersive => xsb_norm(&projected, s, -b)?,
        LhsWeight::TimeBracket => ysb_norm(&projected, s, -b)?,
    };
    Ok(lhs_val / rhs)
}

fn theorem_grid() -> SpaceTimeGrid {
    SpaceTimeGrid::new(
        Grid1D::new(16, std::f64::consts::TAU, 0.0).unwrap(),
        Grid1D::new(8192, std::f64::consts::TAU, -std::f64::consts::PI).unwrap(),
    )
}

/// A random real field with spatial spectrum in the lower half of shell
/// `band` (whole-ball content for band 0), modulated by a smooth random
/// time window.  Rank-one in (t, x), so its space-time spectrum is exactly
/// the product of the two profiles.
fn synth_band_field(grid: SpaceTimeGrid, band: u32, rng: &mut ChaCha8Rng) -> Field2D {
    let freqs: Vec<i64> = if band == 0 {
        vec![0, 1]
    } else {
        let lo = 2i64.pow(band - 1);
        let hi = (2i64.pow(band) - 1).max(lo);
        (0..12).map(|_| rng.gen_range(lo..=hi)).collect()
    };
    let waves: Vec<(f64, f64, f64)> = freqs
        .iter()
        .map(|m| {
            (
                rng.gen_range(0.5..1.0),
                *m as f64,
                rng.gen_range(0.0..std::f64::consts::TAU),
            )
        })
        .collect();
    let q = rng.gen_range(1..=3) as f64;
    let phi = rng.gen_range(0.0..std::f64::consts::TAU);
    let t_len = grid.time.length;
    Field2D::from_fn(grid, move |t, x| {
        let window = (std::f64::consts::PI * t / t_len).sin().powi(2)
            * (1.0 + 0.5 * (std::f64::consts::TAU * q * t / t_len + phi).cos());
        let mut v = 0.0;
        for (a, m, ph) in &waves {
            v += a * (m * x + ph).cos();
        }
        Complex64::new(window * v, 0.0)
    })
}

/// Scale-uniformity probe of the nonlinear estimates: synthesized dyadic
/// interactions per class, ratio of output norm to input norm product, and
/// a per-class slope across the frequency scale.  The pass window asks for
/// slopes at or below 0.1.
pub fn probe_theorem_ratio(
    kind: NonlinearityKind,
    s: f64,
    b: f64,
    alpha: f64,
    k_hi: u32,
    seed: u64,
    lhs: LhsWeight,
) -> Result<ProbeReport> {
    if !(4..=10).contains(&k_hi) {
        return Err(Error::domain(
            "cost guard: the synthesis grid resolves scales 4 through 10",
        ));
    }
    let grid = theorem_grid();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::new();
    for scale in 4..=k_hi {
        let mut sub = ChaCha8Rng::seed_from_u64(rng.gen());
        let hi_out = (scale.saturating_sub(1), scale + 2);
        let lo_out = (0, scale.saturating_sub(5).max(1));
        let classes: Vec<(&str, Vec<u32>, (u32, u32))> = match kind {
            NonlinearityKind::QuadraticNonlocal => vec![
                ("high-low-to-high", vec![scale, 0], hi_out),
                ("high-high-to-high", vec![scale, scale], hi_out),
                ("high-high-to-low", vec![scale, scale], lo_out),
            ],
            NonlinearityKind::Cubic => {
                let mid = scale.saturating_sub(5).max(1);
                vec![
                    ("all-high-to-high", vec![scale, scale, scale], hi_out),
                    ("low-high-high-to-high", vec![0, scale, scale], hi_out),
                    ("mid-high-high-to-high", vec![mid, scale, scale], hi_out),
                    ("all-high-to-low", vec![scale, scale, scale], lo_out),
                    ("low-high-high-to-low", vec![0, scale, scale], lo_out),
                ]
            }
        };
        for (name, bands, out_shells) in classes {
            let fields: Vec<Field2D> = bands
                .iter()
                .map(|k| synth_band_field(grid, *k, &mut sub))
                .collect();
            let refs: Vec<&Field2D> = fields.iter().collect();
            let ratio = theorem_class_ratio(&refs, kind, s, b, alpha, out_shells, lhs)?;
            samples.push(ProbeSample {
                scale,
                class: name.to_string(),
                ratio,
            });
        }
    }
    let kind_name = match kind {
        NonlinearityKind::QuadraticNonlocal => "quadratic",
        NonlinearityKind::Cubic => "cubic",
    };
    let lhs_name = match lhs {
        LhsWeight::Dispersive => "dispersive",
        LhsWeight::TimeBracket => "time-bracket",
    };
    let n = samples.len();
    Ok(ProbeReport::assemble(
        format!("theorem-{kind_name}-{lhs_name}"),
        seed,
        n,
        samples,
    ))
}

// ---------------------------------------------------------------------------
// Dispersive-decay (space-time sixth-power) probe
// ---------------------------------------------------------------------------

/// Probe of the band-limited space-time L⁶ decay of the free group: for
/// each shell k, evolve random shell data over a window that scales like
/// the shell's decoherence time and compare the L⁶ norm against the
/// predicted 2^{−k/2} rate.  A flat slope means the rate is scale-uniform.
pub fn probe_strichartz(k_lo: u32, k_hi: u32, ensemble: usize, seed: u64) -> Result<ProbeReport> {
    if ensemble == 0 {
        return Err(Error::domain("ensemble must hold at least one sample"));
    }
    if !(3..=8).contains(&k_lo) || !(3..=8).contains(&k_hi) || k_lo > k_hi {
        return Err(Error::domain(
            "cost guard: the decay grid resolves shells 3 through 8",
        ));
    }
    let grid = Grid1D::new(16384, 64.0, -32.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::new();
    for k in k_lo..=k_hi {
        for _ in 0..ensemble {
            let mut sub = ChaCha8Rng::seed_from_u64(rng.gen());
            // A coherent wave packet, scale-covariant under the dyadic
            // rescaling: spatial width ∝ 2^{−k}, carrier in mid-shell.
            // (Phase-randomized data is statistically stationary under the
            // free flow and cannot exhibit the dispersive decay.)
            let scale_n = 2f64.powi(k as i32);
            let width = sub.gen_range(4.0..7.0) / scale_n;
            let carrier = sub.gen_range(0.8..1.2) * scale_n;
            let x0 = sub.gen_range(-20.0..20.0);
            let phase = sub.gen_range(0.0..std::f64::consts::TAU);
            let raw = Field1D::from_real_fn(grid, |x| {
                let d = x - x0;
                (-d * d / (2.0 * width * width)).exp() * (carrier * d + phase).cos()
            });
            let mut phi = lp_project(&raw, k)?;
            let norm = phi.l2_norm();
            for v in phi.values.iter_mut() {
                *v /= norm;
            }
            // Time window: a fixed multiple of the shell's decoherence time
            // 2^{−5k}, sampled midpoint-style.
            let t_span = 3.0 * 2f64.powi(-5 * (k as i32));
            let nt = 192;
            let dt = t_span / nt as f64;
            let mut sixth = 0.0;
            for i in 0..nt {
                let t = (i as f64 + 0.5) * dt;
                let u = propagate(&phi, t)?;
                let s: f64 = u.values.iter().map(|v| v.norm_sqr().powi(3)).sum();
                sixth += s * grid.dx() * dt;
            }
            let l6 = sixth.powf(1.0 / 6.0);
            samples.push(ProbeSample {
                scale: k,
                class: "all".to_string(),
                ratio: l6 * 2f64.powf(k as f64 / 2.0),
            });
        }
    }
    Ok(ProbeReport::assemble(
        "free-decay-sixth-power".to_string(),
        seed,
        samples.len(),
        samples,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Random function on an integer (ζ, ξ) lattice window.
    fn lattice_random(
        zeta_lo: i64,
        nzeta: usize,
        xi_lo: i64,
        nxi: usize,
        rng: &mut ChaCha8Rng,
    ) -> ZetaXiFn {
        let values = (0..nzeta * nxi).map(|_| rng.gen_range(-1.0..1.0)).collect();
        ZetaXiFn::new(1.0, zeta_lo as f64, 1.0, xi_lo, nzeta, nxi, values).unwrap()
    }

    fn zeta_even(f: &ZetaXiFn) -> ZetaXiFn {
        // Symmetrize in ζ about 0 (the window must already be centered).
        let mut g = f.clone();
        for iz in 0..g.nzeta {
            for ix in 0..g.nxi {
                let mirror = g.nzeta - 1 - iz;
                let v = 0.5 * (f.at(iz, ix) + f.at(mirror, ix));
                g.values[iz * g.nxi + ix] = v;
            }
        }
        g
    }

    #[test]
    fn bilinear_functional_vanishes_for_zero_argument() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = lattice_random(-20, 41, -2, 5, &mut rng);
        let g = lattice_random(-20, 41, -2, 5, &mut rng);
        let zero = ZetaXiFn::new(1.0, -20.0, 1.0, -2, 41, 5, vec![0.0; 41 * 5]).unwrap();
        assert_eq!(j2(&f, &g, &zero).unwrap(), 0.0);
        assert_eq!(j2(&zero, &f, &g).unwrap(), 0.0);
    }

    #[test]
    fn bilinear_functional_satisfies_permutation_identities() {
        // On an integer lattice every resonance shift is an exact row
        // offset, so the change-of-variables identities hold to rounding.
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = lattice_random(-40, 81, -2, 5, &mut rng);
        let g = lattice_random(-40, 81, -2, 5, &mut rng);
        let h = lattice_random(-40, 81, -2, 5, &mut rng);
        let a = j2(&f, &g, &h).unwrap();
        let b = j2(&g, &h.reflected(), &f.reflected()).unwrap();
        let c = j2(&h.reflected(), &f, &g.reflected()).unwrap();
        let swapped = j2(&g, &f, &h).unwrap();
        assert!(a.abs() > 1e-6, "test functions interact too weakly: {a}");
        assert!((a - b).abs() <= 1e-8 * a.abs(), "{a} vs {b}");
        assert!((a - c).abs() <= 1e-8 * a.abs(), "{a} vs {c}");
        assert!((a - swapped).abs() <= 1e-8 * a.abs(), "{a} vs {swapped}");
    }

    #[test]
    fn concentrated_cells_reduce_to_pointwise_products() {
        // Single cells at the origin: the resonance vanishes, so the value
        // is the product of the cell values and mesh measures.
        let cell = |v: f64| ZetaXiFn::new(0.5, 0.0, 0.25, 0, 1, 1, vec![v]).unwrap();
        let (f, g, h) = (cell(2.0), cell(3.0), cell(5.0));
        let got = j2(&f, &g, &h).unwrap();
        let want = 2.0 * 3.0 * 5.0 * (0.5 * 0.25) * (0.5 * 0.25);
        assert!((got - want).abs() < 1e-15 * want.abs());
        let f4 = cell(7.0);
        let got3 = j3(&f, &g, &h, &f4).unwrap();
        let want3 = 2.0 * 3.0 * 5.0 * 7.0 * (0.5 * 0.25f64).powi(3);
        assert!((got3 - want3).abs() < 1e-15 * want3.abs());
    }

    #[test]
    fn direct_sum_matches_sharp_convolution_oracle() {
        // ζ-even factors: the shifted direct sum and the sheared
        // convolution pairing are two routes to the same number.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = zeta_even(&lattice_random(-40, 81, -2, 5, &mut rng));
        let g = zeta_even(&lattice_random(-40, 81, -2, 5, &mut rng));
        let h = zeta_even(&lattice_random(-40, 81, -2, 5, &mut rng));
        let direct = j2(&f, &g, &h).unwrap();
        let conv = j2_sharp_convolution(&f, &g, &h).unwrap();
        assert!(direct.abs() > 1e-6, "test functions interact too weakly");
        assert!(
            (direct - conv).abs() <= 1e-8 * direct.abs(),
            "{direct} vs {conv}"
        );
    }

    #[test]
    fn trilinear_functional_vanishes_for_zero_argument() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let f = lattice_random(-10, 21, -1, 3, &mut rng);
        let g = lattice_random(-10, 21, -1, 3, &mut rng);
        let h = lattice_random(-10, 21, -1, 3, &mut rng);
        let zero = ZetaXiFn::new(1.0, -10.0, 1.0, -1, 21, 3, vec![0.0; 63]).unwrap();
        assert_eq!(j3(&f, &g, &h, &zero).unwrap(), 0.0);
        assert_eq!(j3(&zero, &f, &g, &h).unwrap(), 0.0);
    }

    #[test]
    fn trilinear_functional_satisfies_swap_symmetries() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f1 = lattice_random(-20, 41, -2, 5, &mut rng);
        let f2 = lattice_random(-20, 41, -2, 5, &mut rng);
        let f3 = lattice_random(-20, 41, -2, 5, &mut rng);
        let f4 = lattice_random(-20, 41, -2, 5, &mut rng);
        let a = j3(&f1, &f2, &f3, &f4).unwrap();
        let b = j3(&f2, &f1, &f3, &f4).unwrap();
        let c = j3(&f3, &f2, &f1, &f4).unwrap();
        let d = j3(&f1, &f2, &f4.reflected(), &f3.reflected()).unwrap();
        assert!(a.abs() > 1e-6, "test functions interact too weakly: {a}");
        for (name, other) in [("input swap", b), ("outer input swap", c), ("dual swap", d)] {
            assert!(
                (a - other).abs() <= 1e-8 * a.abs(),
                "{name}: {a} vs {other}"
            );
        }
    }

    #[test]
    fn bump_realizations_are_unit_norm_and_block_supported() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for (k, j) in [(0u32, 0u32), (3, 2), (5, 14), (2, 0)] {
            let dxi = 2f64.powi(k as i32 - 4);
            let bump = DyadicBump::realize(k, j, dxi, 6, &mut rng).unwrap();
            let norm = bump.f.l2_norm();
            assert!((norm - 1.0).abs() < 1e-12, "block ({k},{j}): norm {norm}");
            assert!(bump.f.values.iter().all(|v| *v >= 0.0));
            assert_eq!(bump.support_leakage(), 0.0, "block ({k},{j}) leaks");
        }
        // Same seed, same realization.
        let mut r1 = ChaCha8Rng::seed_from_u64(7);
        let mut r2 = ChaCha8Rng::seed_from_u64(7);
        let b1 = DyadicBump::realize(4, 3, 0.5, 6, &mut r1).unwrap();
        let b2 = DyadicBump::realize(4, 3, 0.5, 6, &mut r2).unwrap();
        assert_eq!(b1.f.values, b2.f.values);
    }

    #[test]
    fn support_check_flags_impossible_blocks() {
        // A frequency ten octaves above the others cannot be a sum.
        let (ok, diag) = support_property_check(&[(10, 0), (3, 0), (3, 20)]).unwrap();
        assert!(!ok);
        assert!(!diag.frequency_reachable);
        assert!(
            diag.functional_value.abs() <= 1e-10 * diag.norm_product,
            "value {}",
            diag.functional_value
        );
        // Compatible frequencies but a modulation band far beyond the
        // resonance range.
        let (ok, diag) = support_property_check(&[(2, 0), (2, 0), (3, 26)]).unwrap();
        assert!(!ok);
        assert!(diag.frequency_reachable);
        assert!(!diag.modulation_reachable);
        assert!(
            diag.functional_value.abs() <= 1e-10 * diag.norm_product,
            "value {}",
            diag.functional_value
        );
        // Trilinear: three small blocks cannot reach a large output.
        let (ok, diag) = support_property_check(&[(8, 0), (0, 0), (0, 0), (0, 4)]).unwrap();
        assert!(!ok);
        assert!(!diag.frequency_reachable);
        assert!(diag.functional_value.abs() <= 1e-10 * diag.norm_product);
    }

    #[test]
    fn support_check_accepts_compliant_blocks() {
        let (ok, diag) = support_property_check(&[(0, 0), (0, 0), (0, 0)]).unwrap();
        assert!(ok, "{diag:?}");
        let (ok, diag) = support_property_check(&[(0, 0), (0, 0), (0, 0), (0, 0)]).unwrap();
        assert!(ok, "{diag:?}");
        // Matched modulation: the resonance of two shell-2 frequencies
        // whose sum stays in shell 3 reaches a few thousand.
        let (ok, diag) = support_property_check(&[(2, 0), (2, 0), (3, 11)]).unwrap();
        assert!(ok, "{diag:?}");
        assert!(
            diag.functional_value.abs() > 1e-8,
            "compliant blocks should interact: {diag:?}"
        );
    }

    #[test]
    fn block_bound_values_and_hypotheses() {
        // Instantiated scalar bounds.
        let v = block_bound_rhs(BlockVariant::L2a, &[8, 8, 8], &[2, 4, 9]).unwrap();
        assert!((v - 2f64.powi(-4)).abs() < 1e-15);
        let v = block_bound_rhs(BlockVariant::L2c, &[0, 3, 5], &[0, 1, 7]).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
        let v = block_bound_rhs(BlockVariant::L3a, &[0, 0, 0, 0], &[0, 0, 0, 0]).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
        let v = block_bound_rhs(BlockVariant::L2b, &[0, 6, 7], &[1, 1, 1]).unwrap();
        assert!((v - 2f64.powi(-13)).abs() < 1e-15 * v);
        let v = block_bound_rhs(BlockVariant::L3b1, &[12, 12, 1, 1], &[0, 0, 7, 0]).unwrap();
        assert!((v - 2f64.powf(-23.5)).abs() < 1e-15 * v);
        let v = block_bound_rhs(BlockVariant::L3b2, &[12, 12, 2, 1], &[7, 0, 0, 0]).unwrap();
        assert!((v - 2f64.powf(-23.5)).abs() < 1e-15 * v);
        // Hypothesis violations name the failed condition.
        let e = block_bound_rhs(BlockVariant::L2a, &[8, 1, 8], &[0, 0, 0]).unwrap_err();
        assert!(e.to_string().contains("k_max - k_min"), "{e}");
        let e = block_bound_rhs(BlockVariant::L2b, &[5, 6, 7], &[0, 0, 0]).unwrap_err();
        assert!(e.to_string().contains("k_min << k_med"), "{e}");
        let e = block_bound_rhs(BlockVariant::L3b1, &[5, 5, 5, 5], &[0, 0, 0, 0]).unwrap_err();
        assert!(e.to_string().contains("k_thd <= k_max - 10"), "{e}");
        let e = block_bound_rhs(BlockVariant::L3b1, &[12, 12, 1, 1], &[7, 0, 0, 0]).unwrap_err();
        assert!(e.to_string().contains("no slot carries"), "{e}");
        let e = block_bound_rhs(BlockVariant::L3b2, &[12, 12, 1, 1], &[0, 0, 7, 0]).unwrap_err();
        assert!(e.to_string().contains("a slot carries"), "{e}");
        // Slot-count mismatch is structural.
        assert!(matches!(
            block_bound_rhs(BlockVariant::L2a, &[1, 2], &[0, 0]),
            Err(Error::Structural(_))
        ));
    }

    #[test]
    fn block_probe_slopes_stay_flat_for_primary_variants() {
        for variant in [BlockVariant::L2a, BlockVariant::L2c, BlockVariant::L3a] {
            let report = probe_block_estimate(variant, 8, 100, 0x0b5e_55ed).unwrap();
            assert!(report.max_ratio > 0.0, "{}: all ratios zero", variant.name());
            let slope = report.worst_slope();
            assert!(
                slope <= 0.05,
                "{}: slope {slope:.4} exceeds 0.05",
                variant.name()
            );
        }
    }

    #[test]
    fn probe_reports_reproduce_bitwise_and_reject_empty() {
        let a = probe_block_estimate(BlockVariant::L2a, 6, 10, 42).unwrap();
        let b = probe_block_estimate(BlockVariant::L2a, 6, 10, 42).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        assert!(a.samples.iter().all(|s| s.ratio >= 0.0));
        assert!(matches!(
            probe_block_estimate(BlockVariant::L2a, 8, 0, 1),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            probe_block_estimate(BlockVariant::L3b1, 8, 10, 1),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn quadratic_theorem_probe_slopes_within_window() {
        let report = probe_theorem_ratio(
            NonlinearityKind::QuadraticNonlocal,
            0.0,
            0.45,
            0.55,
            10,
            0x7e57_0001,
            LhsWeight::Dispersive,
        )
        .unwrap();
        assert_eq!(report.classes.len(), 3);
        for c in &report.classes {
            assert!(
                c.log_slope <= 0.1,
                "{}: slope {:.4} exceeds 0.1",
                c.class,
                c.log_slope
            );
            assert!(c.max_ratio > 0.0, "{}: no interaction measured", c.class);
        }
    }

    #[test]
    fn cubic_theorem_probe_slopes_within_window() {
        let report = probe_theorem_ratio(
            NonlinearityKind::Cubic,
            0.0,
            0.45,
            0.55,
            10,
            0x7e57_0002,
            LhsWeight::Dispersive,
        )
        .unwrap();
        assert_eq!(report.classes.len(), 5);
        for c in &report.classes {
            assert!(
                c.log_slope <= 0.1,
                "{}: slope {:.4} exceeds 0.1",
                c.class,
                c.log_slope
            );
            assert!(c.max_ratio > 0.0, "{}: no interaction measured", c.class);
        }
    }

    #[test]
    fn time_weight_theorem_probe_slopes_within_window() {
        for kind in [NonlinearityKind::QuadraticNonlocal, NonlinearityKind::Cubic] {
            let report =
                probe_theorem_ratio(kind, -0.2, 0.45, 0.55, 10, 0x7e57_0003, LhsWeight::TimeBracket)
                    .unwrap();
            for c in &report.classes {
                assert!(
                    c.log_slope <= 0.1,
                    "{}: slope {:.4} exceeds 0.1",
                    c.class,
                    c.log_slope
                );
            }
        }
    }

    #[test]
    fn zero_inputs_give_zero_ratio() {
        let grid = theorem_grid();
        let z = Field2D::zeros(grid, DomainTag::Physical);
        let r = theorem_class_ratio(
            &[&z, &z],
            NonlinearityKind::QuadraticNonlocal,
            0.0,
            0.45,
            0.55,
            (3, 6),
            LhsWeight::Dispersive,
        )
        .unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn below_threshold_probe_reports_diagnostics() {
        // Deep below the bilinear regularity threshold the probe still
        // reports per-class slopes; they carry no pass/fail meaning.
        let report = probe_theorem_ratio(
            NonlinearityKind::QuadraticNonlocal,
            -1.5,
            0.45,
            0.55,
            7,
            0x7e57_0004,
            LhsWeight::Dispersive,
        )
        .unwrap();
        let slope = report
            .class_slope("high-high-to-high")
            .expect("class must be present");
        assert!(slope.is_finite());
        assert!(report.samples.iter().all(|s| s.ratio >= 0.0));
    }

    #[test]
    fn free_decay_probe_is_scale_uniform() {
        let report = probe_strichartz(3, 8, 2, 0xdeca_1).unwrap();
        let slope = report.worst_slope();
        assert!(
            slope.abs() <= 0.05,
            "decay rate drifts with scale: slope {slope:.4}"
        );
        assert!(report.max_ratio > 0.0);
    }
}
