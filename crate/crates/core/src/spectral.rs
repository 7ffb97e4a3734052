//! Uniform grids, continuum-normalized discrete Fourier transforms, and
//! dyadic frequency / modulation projections.
//!
//! Conventions (used consistently by every module):
//!
//! * A [`Grid1D`] has `n` nodes `x_j = origin + j·dx`, `dx = length/n`, with
//!   `n` a power of two ≥ 8. The represented wavenumbers are
//!   `ξ_m = 2π m̃ / length` with `m̃ ∈ [-n/2, n/2)` in standard FFT bin order.
//! * The forward transform mimics the continuum one:
//!   `f̂(ξ) = ∫ f(x) e^{-iξx} dx ≈ dx Σ_j f(x_j) e^{-iξ x_j}` (the absolute
//!   coordinate enters, so grids with shifted origins transform like their
//!   continuum counterparts). The inverse is `f(x) = (2π)^{-1} ∫ f̂ e^{iξx} dξ
//!   ≈ L^{-1} Σ_m f̂(ξ_m) e^{iξ_m x_j}`. With these scalings Plancherel holds
//!   exactly: `dx Σ |f|² = L^{-1} Σ |f̂|²`.
//! * Space-time fields are stored row-major with the time index slow:
//!   `values[it * nx + ix]`. The 2D transform applies the same convention on
//!   each axis (`e^{-i(tτ + xξ)}`), so bin `(mt, mx)` holds `f̃(τ_mt, ξ_mx)`.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::special;

/// Whether a field's samples live on the physical or the frequency side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum DomainTag {
    Physical,
    Frequency,
}

/// Uniform periodic 1D grid.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Grid1D {
    pub n: usize,
    pub length: f64,
    pub origin: f64,
}

impl Grid1D {
    pub fn new(n: usize, length: f64, origin: f64) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::structural(format!(
                "grid size must be a power of two >= 8, got {n}"
            )));
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::structural(format!(
                "grid length must be positive and finite, got {length}"
            )));
        }
        Ok(Grid1D { n, length, origin })
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n as f64
    }

    /// j-th node coordinate.
    pub fn node(&self, j: usize) -> f64 {
        self.origin + j as f64 * self.dx()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.node(j)).collect()
    }

    /// Signed integer frequency index for FFT bin `m` (m̃ ∈ [-n/2, n/2)).
    pub fn bin_index(&self, m: usize) -> i64 {
        let n = self.n as i64;
        let m = m as i64;
        if m < n / 2 {
            m
        } else {
            m - n
        }
    }

    /// Wavenumber associated with FFT bin `m`.
    pub fn xi(&self, m: usize) -> f64 {
        2.0 * std::f64::consts::PI * self.bin_index(m) as f64 / self.length
    }

    /// Largest represented wavenumber magnitude (Nyquist).
    pub fn xi_max(&self) -> f64 {
        std::f64::consts::PI * self.n as f64 / self.length
    }

    /// Whether FFT bin `m` is the unpaired Nyquist bin of an even-length
    /// grid. That bin aliases ±ξ_max, so odd symbols (odd derivatives, odd
    /// dispersion phases) should be symmetrized to zero there; otherwise a
    /// real field picks up a spurious imaginary component.
    pub fn is_unpaired_nyquist(&self, m: usize) -> bool {
        self.n % 2 == 0 && m == self.n / 2
    }

    /// Index of the node at coordinate `x` if it lies on the grid.
    pub fn index_of(&self, x: f64) -> Option<usize> {
        let rel = (x - self.origin) / self.dx();
        let j = rel.round();
        if (rel - j).abs() < 1e-9 && j >= 0.0 && (j as usize) < self.n {
            Some(j as usize)
        } else {
            None
        }
    }
}

/// Product grid for space-time fields; time is the slow (row) axis.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SpaceTimeGrid {
    pub time: Grid1D,
    pub space: Grid1D,
}

impl SpaceTimeGrid {
    pub fn new(time: Grid1D, space: Grid1D) -> Self {
        SpaceTimeGrid { time, space }
    }
}

/// Dyadic block index: `k` for the spatial-frequency shell, `j` for the
/// modulation shell. Shell 0 is the ball `[0, 2]`; shell m ≥ 1 is
/// `[2^{m-1}, 2^{m+1}]` in absolute value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct DyadicBlock {
    pub k: u32,
    pub j: u32,
}

/// Absolute-value range of dyadic shell `m`.
pub fn shell_range(m: u32) -> (f64, f64) {
    if m == 0 {
        (0.0, 2.0)
    } else {
        ((2.0_f64).powi(m as i32 - 1), (2.0_f64).powi(m as i32 + 1))
    }
}

/// Complex field on a 1D grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Field1D {
    pub grid: Grid1D,
    pub domain: DomainTag,
    pub values: Vec<Complex64>,
}

impl Field1D {
    pub fn new(grid: Grid1D, domain: DomainTag, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n {
            return Err(Error::structural(format!(
                "field length {} does not match grid size {}",
                values.len(),
                grid.n
            )));
        }
        Ok(Field1D { grid, domain, values })
    }

    pub fn zeros(grid: Grid1D, domain: DomainTag) -> Self {
        Field1D {
            grid,
            domain,
            values: vec![Complex64::new(0.0, 0.0); grid.n],
        }
    }

    /// Sample a physical-side function on the grid.
    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> Complex64) -> Self {
        let values = (0..grid.n).map(|j| f(grid.node(j))).collect();
        Field1D {
            grid,
            domain: DomainTag::Physical,
            values,
        }
    }

    pub fn from_real_fn(grid: Grid1D, f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    /// `(dx Σ |f|²)^{1/2}` on the physical side, `(L^{-1} Σ |f̂|²)^{1/2}` on
    /// the frequency side (equal by Plancherel).
    pub fn l2_norm(&self) -> f64 {
        let sum: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        match self.domain {
            DomainTag::Physical => (sum * self.grid.dx()).sqrt(),
            DomainTag::Frequency => (sum / self.grid.length).sqrt(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest |imaginary part| relative to the max modulus — a residual for
    /// fields that should be real.
    pub fn imag_residual(&self) -> f64 {
        let max = self.max_abs();
        if max == 0.0 {
            return 0.0;
        }
        self.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max) / max
    }

    /// Relative magnitude of samples within `length/8` of the periodic seam;
    /// values above ~1e-8 indicate the data wraps around the domain edge.
    pub fn wrap_contamination(&self) -> f64 {
        assert_eq!(self.domain, DomainTag::Physical);
        let max = self.max_abs();
        if max == 0.0 {
            return 0.0;
        }
        let band = self.grid.n / 8;
        let mut worst = 0.0_f64;
        for j in 0..band {
            worst = worst.max(self.values[j].norm());
            worst = worst.max(self.values[self.grid.n - 1 - j].norm());
        }
        worst / max
    }
}

/// Complex field on a space-time grid (row-major, time slow).
#[derive(Debug, Clone, PartialEq)]
pub struct Field2D {
    pub grid: SpaceTimeGrid,
    pub domain: DomainTag,
    pub values: Vec<Complex64>,
}

impl Field2D {
    pub fn new(grid: SpaceTimeGrid, domain: DomainTag, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.time.n * grid.space.n {
            return Err(Error::structural(format!(
                "field length {} does not match grid size {}x{}",
                values.len(),
                grid.time.n,
                grid.space.n
            )));
        }
        Ok(Field2D { grid, domain, values })
    }

    pub fn zeros(grid: SpaceTimeGrid, domain: DomainTag) -> Self {
        Field2D {
            grid,
            domain,
            values: vec![Complex64::new(0.0, 0.0); grid.time.n * grid.space.n],
        }
    }

    pub fn from_fn(grid: SpaceTimeGrid, f: impl Fn(f64, f64) -> Complex64) -> Self {
        let mut values = Vec::with_capacity(grid.time.n * grid.space.n);
        for it in 0..grid.time.n {
            let t = grid.time.node(it);
            for ix in 0..grid.space.n {
                values.push(f(t, grid.space.node(ix)));
            }
        }
        Field2D {
            grid,
            domain: DomainTag::Physical,
            values,
        }
    }

    #[inline]
    pub fn idx(&self, it: usize, ix: usize) -> usize {
        it * self.grid.space.n + ix
    }

    #[inline]
    pub fn at(&self, it: usize, ix: usize) -> Complex64 {
        self.values[self.idx(it, ix)]
    }

    #[inline]
    pub fn at_mut(&mut self, it: usize, ix: usize) -> &mut Complex64 {
        let i = self.idx(it, ix);
        &mut self.values[i]
    }

    /// Copy of the `it`-th time slice as a spatial field.
    pub fn row(&self, it: usize) -> Field1D {
        let nx = self.grid.space.n;
        Field1D {
            grid: self.grid.space,
            domain: self.domain,
            values: self.values[it * nx..(it + 1) * nx].to_vec(),
        }
    }

    pub fn set_row(&mut self, it: usize, row: &Field1D) {
        assert_eq!(row.grid.n, self.grid.space.n);
        let nx = self.grid.space.n;
        self.values[it * nx..(it + 1) * nx].copy_from_slice(&row.values);
    }

    /// Copy of the `ix`-th spatial column as a time signal field.
    pub fn column(&self, ix: usize) -> Field1D {
        let nx = self.grid.space.n;
        Field1D {
            grid: self.grid.time,
            domain: self.domain,
            values: (0..self.grid.time.n)
                .map(|it| self.values[it * nx + ix])
                .collect(),
        }
    }

    /// `(dt dx ΣΣ |f|²)^{1/2}` (physical side).
    pub fn l2_norm(&self) -> f64 {
        let sum: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        match self.domain {
            DomainTag::Physical => (sum * self.grid.time.dx() * self.grid.space.dx()).sqrt(),
            DomainTag::Frequency => {
                (sum / (self.grid.time.length * self.grid.space.length)).sqrt()
            }
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn imag_residual(&self) -> f64 {
        let max = self.max_abs();
        if max == 0.0 {
            return 0.0;
        }
        self.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max) / max
    }

    /// Wrap contamination of the spatial axis, worst over time slices.
    pub fn wrap_contamination_space(&self) -> f64 {
        assert_eq!(self.domain, DomainTag::Physical);
        let max = self.max_abs();
        if max == 0.0 {
            return 0.0;
        }
        let nx = self.grid.space.n;
        let band = nx / 8;
        let mut worst = 0.0_f64;
        for it in 0..self.grid.time.n {
            for j in 0..band {
                worst = worst.max(self.at(it, j).norm());
                worst = worst.max(self.at(it, nx - 1 - j).norm());
            }
        }
        worst / max
    }
}

fn fft_cache() -> &'static Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn plan(n: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    let mut cache = fft_cache().lock().unwrap();
    cache
        .entry((n, forward))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            if forward {
                planner.plan_fft_forward(n)
            } else {
                planner.plan_fft_inverse(n)
            }
        })
        .clone()
}

/// Raw unnormalized DFT (`Σ_j v_j e^{∓2πi jk/n}`) in place.
fn dft_in_place(values: &mut [Complex64], forward: bool) {
    plan(values.len(), forward).process(values);
}

/// Continuum-normalized forward transform of a physical field.
pub fn forward_transform(field: &Field1D) -> Result<Field1D> {
    if field.domain != DomainTag::Physical {
        return Err(Error::structural(
            "forward_transform expects a physical-side field",
        ));
    }
    let mut values = field.values.clone();
    dft_in_place(&mut values, true);
    let g = field.grid;
    let dx = g.dx();
    for (m, v) in values.iter_mut().enumerate() {
        // dx e^{-i ξ_m origin} · DFT bin.
        let phase = Complex64::from_polar(1.0, -g.xi(m) * g.origin);
        *v *= phase * dx;
    }
    Ok(Field1D {
        grid: g,
        domain: DomainTag::Frequency,
        values,
    })
}

/// Continuum-normalized inverse transform of a frequency field.
pub fn inverse_transform(field: &Field1D) -> Result<Field1D> {
    if field.domain != DomainTag::Frequency {
        return Err(Error::structural(
            "inverse_transform expects a frequency-side field",
        ));
    }
    let g = field.grid;
    let mut values = field.values.clone();
    for (m, v) in values.iter_mut().enumerate() {
        let phase = Complex64::from_polar(1.0, g.xi(m) * g.origin);
        *v *= phase;
    }
    dft_in_place(&mut values, false);
    for v in values.iter_mut() {
        *v /= g.length;
    }
    Ok(Field1D {
        grid: g,
        domain: DomainTag::Physical,
        values,
    })
}

/// Space-time forward transform (both axes, same sign convention).
pub fn forward_transform_2d(field: &Field2D) -> Result<Field2D> {
    if field.domain != DomainTag::Physical {
        return Err(Error::structural(
            "forward_transform_2d expects a physical-side field",
        ));
    }
    let g = field.grid;
    let (nt, nx) = (g.time.n, g.space.n);
    let mut values = field.values.clone();
    // Space axis, each row.
    for it in 0..nt {
        dft_in_place(&mut values[it * nx..(it + 1) * nx], true);
    }
    // Time axis, each column.
    let mut col = vec![Complex64::new(0.0, 0.0); nt];
    for ix in 0..nx {
        for it in 0..nt {
            col[it] = values[it * nx + ix];
        }
        dft_in_place(&mut col, true);
        for it in 0..nt {
            values[it * nx + ix] = col[it];
        }
    }
    let scale = g.time.dx() * g.space.dx();
    for mt in 0..nt {
        let tphase = Complex64::from_polar(1.0, -g.time.xi(mt) * g.time.origin);
        for mx in 0..nx {
            let xphase = Complex64::from_polar(1.0, -g.space.xi(mx) * g.space.origin);
            values[mt * nx + mx] *= tphase * xphase * scale;
        }
    }
    Ok(Field2D {
        grid: g,
        domain: DomainTag::Frequency,
        values,
    })
}

/// Space-time inverse transform.
pub fn inverse_transform_2d(field: &Field2D) -> Result<Field2D> {
    if field.domain != DomainTag::Frequency {
        return Err(Error::structural(
            "inverse_transform_2d expects a frequency-side field",
        ));
    }
    let g = field.grid;
    let (nt, nx) = (g.time.n, g.space.n);
    let mut values = field.values.clone();
    for mt in 0..nt {
        let tphase = Complex64::from_polar(1.0, g.time.xi(mt) * g.time.origin);
        for mx in 0..nx {
            let xphase = Complex64::from_polar(1.0, g.space.xi(mx) * g.space.origin);
            values[mt * nx + mx] *= tphase * xphase;
        }
    }
    for it in 0..nt {
        dft_in_place(&mut values[it * nx..(it + 1) * nx], false);
    }
    let mut col = vec![Complex64::new(0.0, 0.0); nt];
    for ix in 0..nx {
        for it in 0..nt {
            col[it] = values[it * nx + ix];
        }
        dft_in_place(&mut col, false);
        for it in 0..nt {
            values[it * nx + ix] = col[it];
        }
    }
    let scale = 1.0 / (g.time.length * g.space.length);
    for v in values.iter_mut() {
        *v *= scale;
    }
    Ok(Field2D {
        grid: g,
        domain: DomainTag::Physical,
        values,
    })
}

/// Apply a frequency multiplier `m(ξ)` to a 1D field (any domain; physical
/// fields are round-tripped through the frequency side).
pub fn apply_multiplier(field: &Field1D, m: impl Fn(f64) -> Complex64) -> Result<Field1D> {
    apply_multiplier_binwise(field, |_, xi| m(xi))
}

/// Apply a frequency multiplier that also sees the raw FFT bin index, so
/// callers implementing odd symbols can symmetrize the unpaired Nyquist bin
/// (see `Grid1D::is_unpaired_nyquist`).
pub fn apply_multiplier_binwise(
    field: &Field1D,
    m: impl Fn(usize, f64) -> Complex64,
) -> Result<Field1D> {
    match field.domain {
        DomainTag::Frequency => {
            let mut out = field.clone();
            for (bin, v) in out.values.iter_mut().enumerate() {
                *v *= m(bin, field.grid.xi(bin));
            }
            Ok(out)
        }
        DomainTag::Physical => {
            let hat = forward_transform(field)?;
            let mut out = hat;
            for (bin, v) in out.values.iter_mut().enumerate() {
                *v *= m(bin, out.grid.xi(bin));
            }
            inverse_transform(&out)
        }
    }
}

/// Spectral spatial derivative of order `k` (multiplier `(iξ)^k`). For odd
/// `k` the unpaired Nyquist bin is zeroed: it aliases ±ξ_max, where an odd
/// symbol averages to zero, and zeroing keeps real data real.
pub fn spatial_derivative(field: &Field1D, k: u32) -> Result<Field1D> {
    let grid = field.grid;
    apply_multiplier_binwise(field, |bin, xi| {
        if k % 2 == 1 && grid.is_unpaired_nyquist(bin) {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, xi).powu(k)
        }
    })
}

/// Spectral spatial derivative of a space-time field, row by row.
pub fn spatial_derivative_2d(field: &Field2D, k: u32) -> Result<Field2D> {
    if field.domain != DomainTag::Physical {
        return Err(Error::structural(
            "spatial_derivative_2d expects a physical-side field",
        ));
    }
    let mut out = field.clone();
    for it in 0..field.grid.time.n {
        let row = field.row(it);
        let drow = spatial_derivative(&row, k)?;
        out.set_row(it, &drow);
    }
    Ok(out)
}

/// Littlewood–Paley projection onto dyadic shell `k` (the smooth multiplier
/// `η₀` for k = 0, `χ_k` for k ≥ 1). Domain is preserved.
pub fn lp_project(field: &Field1D, k: u32) -> Result<Field1D> {
    apply_multiplier(field, |xi| {
        let w = if k == 0 {
            special::eta0(xi)
        } else {
            special::chi_k(k, xi)
        };
        Complex64::new(w, 0.0)
    })
}

/// Modulation projection of a frequency-side space-time field onto shell `j`
/// of the dispersive distance `|τ - ξ⁵|` (smooth dyadic multiplier).
pub fn modulation_project(field: &Field2D, j: u32) -> Result<Field2D> {
    if field.domain != DomainTag::Frequency {
        return Err(Error::structural(
            "modulation_project expects a frequency-side field",
        ));
    }
    let g = field.grid;
    let mut out = field.clone();
    for mt in 0..g.time.n {
        let tau = g.time.xi(mt);
        for mx in 0..g.space.n {
            let xi = g.space.xi(mx);
            let zeta = tau - xi.powi(5);
            let w = if j == 0 {
                special::eta0(zeta)
            } else {
                special::chi_k(j, zeta)
            };
            *out.at_mut(mt, mx) *= w;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// DFT by the defining sum — the independent oracle for the transforms.
    fn naive_forward(field: &Field1D) -> Vec<Complex64> {
        let g = field.grid;
        (0..g.n)
            .map(|m| {
                let xi = g.xi(m);
                let mut sum = c(0.0, 0.0);
                for j in 0..g.n {
                    let x = g.node(j);
                    sum += field.values[j] * Complex64::from_polar(1.0, -xi * x);
                }
                sum * g.dx()
            })
            .collect()
    }

    fn random_field(grid: Grid1D, seed: u64) -> Field1D {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..grid.n)
            .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        Field1D::new(grid, DomainTag::Physical, values).unwrap()
    }

    #[test]
    fn grid_rejects_bad_sizes() {
        assert!(Grid1D::new(7, 1.0, 0.0).is_err());
        assert!(Grid1D::new(12, 1.0, 0.0).is_err());
        assert!(Grid1D::new(16, -1.0, 0.0).is_err());
        assert!(Grid1D::new(16, 1.0, 0.0).is_ok());
    }

    #[test]
    fn forward_matches_dft_by_definition_with_offset_origin() {
        // n = 16 grid with a shifted origin; oracle is the literal sum.
        let grid = Grid1D::new(16, 5.0, -2.0).unwrap();
        let field = random_field(grid, 7);
        let fast = forward_transform(&field).unwrap();
        let slow = naive_forward(&field);
        for (a, b) in fast.values.iter().zip(&slow) {
            assert!((a - b).norm() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn roundtrip_and_plancherel() {
        let grid = Grid1D::new(64, 10.0, -5.0).unwrap();
        let field = random_field(grid, 13);
        let hat = forward_transform(&field).unwrap();
        // Plancherel with the continuum normalization.
        assert!((field.l2_norm() - hat.l2_norm()).abs() < 1e-12 * field.l2_norm());
        let back = inverse_transform(&hat).unwrap();
        let err: f64 = field
            .values
            .iter()
            .zip(&back.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-12);
    }

    #[test]
    fn pure_mode_lands_in_single_bin() {
        // f(x) = e^{iξ_3 x} has transform L·δ at bin 3 under our scaling
        // (f̂(ξ_3) = dx·n = L).
        let grid = Grid1D::new(32, 4.0, 1.0).unwrap();
        let xi3 = grid.xi(3);
        let field = Field1D::from_fn(grid, |x| Complex64::from_polar(1.0, xi3 * x));
        let hat = forward_transform(&field).unwrap();
        for m in 0..grid.n {
            let want = if m == 3 { grid.length } else { 0.0 };
            assert!(
                (hat.values[m] - c(want, 0.0)).norm() < 1e-10,
                "bin {m}: {}",
                hat.values[m]
            );
        }
    }

    #[test]
    fn transform_2d_roundtrip_and_plancherel() {
        let tg = Grid1D::new(16, 2.0, 0.0).unwrap();
        let xg = Grid1D::new(32, 7.0, -3.0).unwrap();
        let grid = SpaceTimeGrid::new(tg, xg);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let values: Vec<Complex64> = (0..tg.n * xg.n)
            .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let field = Field2D::new(grid, DomainTag::Physical, values).unwrap();
        let hat = forward_transform_2d(&field).unwrap();
        assert!((field.l2_norm() - hat.l2_norm()).abs() < 1e-12 * field.l2_norm());
        let back = inverse_transform_2d(&hat).unwrap();
        let err: f64 = field
            .values
            .iter()
            .zip(&back.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-12);
    }

    #[test]
    fn transform_2d_separable_mode_check() {
        // f(t,x) = e^{i(τ_2 t + ξ_5 x)} must land at bin (2, 5) with value
        // T·L.
        let tg = Grid1D::new(16, 3.0, -1.0).unwrap();
        let xg = Grid1D::new(16, 5.0, 0.5).unwrap();
        let grid = SpaceTimeGrid::new(tg, xg);
        let (tau2, xi5) = (tg.xi(2), xg.xi(5));
        let field = Field2D::from_fn(grid, |t, x| Complex64::from_polar(1.0, tau2 * t + xi5 * x));
        let hat = forward_transform_2d(&field).unwrap();
        for mt in 0..tg.n {
            for mx in 0..xg.n {
                let want = if (mt, mx) == (2, 5) {
                    tg.length * xg.length
                } else {
                    0.0
                };
                assert!(
                    (hat.at(mt, mx) - c(want, 0.0)).norm() < 1e-9,
                    "bin ({mt},{mx}): {}",
                    hat.at(mt, mx)
                );
            }
        }
    }

    #[test]
    fn lp_projections_partition_unity() {
        // Summing shells 0..K over a field reproduces it when every
        // represented frequency sits below 2^K.
        let grid = Grid1D::new(64, 4.0, 0.0).unwrap(); // ξ_max ≈ 50.3
        let field = random_field(grid, 3);
        let hat = forward_transform(&field).unwrap();
        let kmax = 7; // 2^7 = 128 > ξ_max
        let mut sum = Field1D::zeros(grid, DomainTag::Frequency);
        for k in 0..=kmax {
            let p = lp_project(&hat, k).unwrap();
            for (s, v) in sum.values.iter_mut().zip(&p.values) {
                *s += v;
            }
        }
        let err: f64 = sum
            .values
            .iter()
            .zip(&hat.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-12 * field.l2_norm().max(1.0), "err={err}");
    }

    #[test]
    fn lp_project_band_limits_support() {
        let grid = Grid1D::new(128, 16.0, 0.0).unwrap();
        let field = random_field(grid, 11);
        let hat = forward_transform(&field).unwrap();
        let p = lp_project(&hat, 3).unwrap();
        for m in 0..grid.n {
            let a = grid.xi(m).abs();
            if !(4.0..=16.0).contains(&a) && p.values[m].norm() > 1e-14 {
                panic!("shell-3 projection leaked to |ξ| = {a}");
            }
        }
    }

    #[test]
    fn modulation_projection_partitions_unity() {
        let tg = Grid1D::new(32, 2.0, 0.0).unwrap();
        let xg = Grid1D::new(16, 8.0, -4.0).unwrap();
        let grid = SpaceTimeGrid::new(tg, xg);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let values: Vec<Complex64> = (0..tg.n * xg.n)
            .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let field = Field2D::new(grid, DomainTag::Physical, values).unwrap();
        let hat = forward_transform_2d(&field).unwrap();
        // |τ - ξ⁵| ≤ τ_max + ξ_max⁵; pick J with 2^J above that.
        let bound = tg.xi_max() + xg.xi_max().powi(5);
        let jmax = bound.log2().ceil() as u32 + 1;
        let mut sum = Field2D::zeros(grid, DomainTag::Frequency);
        for j in 0..=jmax {
            let p = modulation_project(&hat, j).unwrap();
            for (s, v) in sum.values.iter_mut().zip(&p.values) {
                *s += v;
            }
        }
        let err: f64 = sum
            .values
            .iter()
            .zip(&hat.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-11 * hat.max_abs(), "err={err}");
    }

    #[test]
    fn wrap_contamination_flags_edge_mass() {
        let grid = Grid1D::new(64, 8.0, -4.0).unwrap();
        let centered = Field1D::from_real_fn(grid, |x| (-8.0 * x * x).exp());
        assert!(centered.wrap_contamination() < 1e-8);
        let edge = Field1D::from_real_fn(grid, |x| (-8.0 * (x + 3.8) * (x + 3.8)).exp());
        assert!(edge.wrap_contamination() > 1e-3);
    }

    #[test]
    fn rows_columns_and_derivative() {
        let tg = Grid1D::new(8, 1.0, 0.0).unwrap();
        let xg = Grid1D::new(32, 2.0 * std::f64::consts::PI, 0.0).unwrap();
        let grid = SpaceTimeGrid::new(tg, xg);
        let field = Field2D::from_fn(grid, |t, x| c((x.sin()) * (1.0 + t), 0.0));
        let d = spatial_derivative_2d(&field, 1).unwrap();
        for it in 0..tg.n {
            let t = tg.node(it);
            for ix in 0..xg.n {
                let x = xg.node(ix);
                let want = x.cos() * (1.0 + t);
                assert!((d.at(it, ix).re - want).abs() < 1e-10);
            }
        }
        let col = field.column(3);
        assert_eq!(col.values.len(), tg.n);
        assert!((col.values[5].re - (xg.node(3).sin()) * (1.0 + tg.node(5))).abs() < 1e-14);
    }
}
