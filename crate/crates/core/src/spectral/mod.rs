//! Periodic-box spectral representation.
//!
//! Coefficients use the unitary convention
//! `û(ξ) = V^{-1/2} ∫_box u(x) e^{-iξ·x} dx`, so the box L² norm equals the
//! ℓ² norm of the coefficients and the coefficients of a band-limited
//! function do not depend on the grid it is sampled on.

pub(crate) mod fft;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, WaveError};
use crate::par;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Relative tolerance for the Hermitian-symmetry check in [`inverse_transform`].
pub const HERMITIAN_TOL: f64 = 1e-9;

/// Default oversampling factor for sup norms.
pub const DEFAULT_OVERSAMPLE: usize = 2;

/// Discretization of the periodic box `[0, period)^n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGrid")]
pub struct GridSpec {
    n: usize,
    points_per_axis: usize,
    period: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    n: usize,
    points_per_axis: usize,
    period: f64,
}

impl TryFrom<RawGrid> for GridSpec {
    type Error = WaveError;

    fn try_from(r: RawGrid) -> Result<Self> {
        GridSpec::new(r.n, r.points_per_axis, r.period)
    }
}

impl GridSpec {
    pub fn new(n: usize, points_per_axis: usize, period: f64) -> Result<Self> {
        if n == 0 {
            return Err(WaveError::InvalidGrid("dimension must be at least 1".into()));
        }
        if points_per_axis < 4 || !points_per_axis.is_power_of_two() {
            return Err(WaveError::InvalidGrid(format!(
                "points per axis must be a power of two >= 4, got {points_per_axis}"
            )));
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(WaveError::InvalidGrid(format!("period must be positive, got {period}")));
        }
        points_per_axis
            .checked_pow(n as u32)
            .filter(|&m| m <= 1 << 28)
            .ok_or_else(|| WaveError::InvalidGrid("too many modes".into()))?;
        Ok(Self {
            n,
            points_per_axis,
            period,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn points(&self) -> usize {
        self.points_per_axis
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// Total number of modes (and of grid points).
    pub fn len(&self) -> usize {
        self.points_per_axis.pow(self.n as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn volume(&self) -> f64 {
        self.period.powi(self.n as i32)
    }

    pub fn spacing(&self) -> f64 {
        self.period / self.points_per_axis as f64
    }

    /// Frequency spacing `2π/P`.
    pub fn base_frequency(&self) -> f64 {
        2.0 * PI / self.period
    }

    /// Signed integer wavenumber of an axis index; the Nyquist index maps
    /// to `-points/2`.
    pub fn wavenumber(&self, index: usize) -> i64 {
        signed_wavenumber(index, self.points_per_axis)
    }

    /// Frequency `ξ` of an axis index.
    pub fn frequency(&self, index: usize) -> f64 {
        self.base_frequency() * self.wavenumber(index) as f64
    }

    /// Axis indices of a flat (row-major) index; axis 0 varies slowest.
    pub fn unravel(&self, mut flat: usize) -> Vec<usize> {
        let mut out = vec![0; self.n];
        for slot in out.iter_mut().rev() {
            *slot = flat % self.points_per_axis;
            flat /= self.points_per_axis;
        }
        out
    }

    pub fn ravel(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.points_per_axis + i)
    }

    /// Flat index of the mode `-ξ`.
    pub fn negate(&self, flat: usize) -> usize {
        let idx: Vec<usize> = self
            .unravel(flat)
            .into_iter()
            .map(|i| (self.points_per_axis - i) % self.points_per_axis)
            .collect();
        self.ravel(&idx)
    }

    /// `|ξ|²` for every flat index.
    pub fn xi_squared(&self) -> Vec<f64> {
        let axis: Vec<f64> = (0..self.points_per_axis).map(|i| self.frequency(i).powi(2)).collect();
        let mut out = vec![0.0; self.len()];
        for (flat, v) in out.iter_mut().enumerate() {
            *v = self.unravel(flat).iter().map(|&i| axis[i]).sum();
        }
        out
    }

    /// Largest `|ξ|` on the lattice (the corner mode).
    pub fn max_frequency(&self) -> f64 {
        self.base_frequency() * (self.points_per_axis / 2) as f64 * (self.n as f64).sqrt()
    }

    /// Physical coordinates of a grid point.
    pub fn position(&self, flat: usize) -> Vec<f64> {
        let h = self.spacing();
        self.unravel(flat).into_iter().map(|i| i as f64 * h).collect()
    }

    pub fn center(&self) -> Vec<f64> {
        vec![self.period / 2.0; self.n]
    }

    pub fn with_points(&self, points_per_axis: usize) -> Result<Self> {
        Self::new(self.n, points_per_axis, self.period)
    }
}

pub(crate) fn signed_wavenumber(index: usize, points: usize) -> i64 {
    if index < points / 2 {
        index as i64
    } else {
        index as i64 - points as i64
    }
}

/// Unitary-normalized Fourier coefficients on a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: GridSpec,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            coeffs: vec![ZERO; grid.len()],
        }
    }

    pub fn from_coeffs(grid: GridSpec, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(WaveError::DimensionMismatch {
                expected: grid.len(),
                found: coeffs.len(),
            });
        }
        Ok(Self { grid, coeffs })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            grid: self.grid,
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    /// `self + factor * other`.
    pub fn axpy(&self, factor: f64, other: &SpectralField) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        Self {
            grid: self.grid,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b * factor)
                .collect(),
        }
    }

    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Largest `|û(-ξ) - conj(û(ξ))|` relative to the largest coefficient.
    pub fn hermitian_defect(&self) -> f64 {
        let scale = self.max_abs_coeff();
        if scale == 0.0 {
            return 0.0;
        }
        let worst = (0..self.grid.len())
            .map(|i| (self.coeffs[self.grid.negate(i)] - self.coeffs[i].conj()).norm())
            .fold(0.0, f64::max);
        worst / scale
    }

    /// Multiplies by the Japanese bracket `(1+|ξ|²)^{s/2}`.
    pub fn bracket(&self, s: f64) -> Self {
        let xi2 = self.grid.xi_squared();
        Self {
            grid: self.grid,
            coeffs: self
                .coeffs
                .iter()
                .zip(xi2)
                .map(|(c, x)| c * (1.0 + x).powf(s / 2.0))
                .collect(),
        }
    }
}

/// `(u, ∂_t u)` at one time instant.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub time: f64,
    pub u: SpectralField,
    pub ut: SpectralField,
}

impl FieldState {
    pub fn new(time: f64, u: SpectralField, ut: SpectralField) -> Result<Self> {
        if u.grid != ut.grid {
            return Err(WaveError::invalid("u and ut must share a grid"));
        }
        Ok(Self { time, u, ut })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            time: 0.0,
            u: SpectralField::zeros(grid),
            ut: SpectralField::zeros(grid),
        }
    }

    pub fn grid(&self) -> &GridSpec {
        self.u.grid()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            time: self.time,
            u: self.u.scaled(factor),
            ut: self.ut.scaled(factor),
        }
    }

    /// `self + factor * other` componentwise, keeping `self.time`.
    pub fn axpy(&self, factor: f64, other: &FieldState) -> Self {
        Self {
            time: self.time,
            u: self.u.axpy(factor, &other.u),
            ut: self.ut.axpy(factor, &other.ut),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.ut.is_finite()
    }

    /// Data size `‖u‖_{H^s} + ‖∂_t u‖_{H^{s-1}}`.
    pub fn data_norm(&self, s: f64) -> f64 {
        sobolev_norm(&self.u, s) + sobolev_norm(&self.ut, s - 1.0)
    }
}

fn samples_to_coeffs(samples: Vec<Complex64>, n: usize, points: usize, period: f64) -> Vec<Complex64> {
    let mut data = samples;
    fft::fft_nd(&mut data, points, n, false);
    let scale = period.powi(n as i32).sqrt() / points.pow(n as u32) as f64;
    data.iter_mut().for_each(|c| *c *= scale);
    data
}

fn coeffs_to_samples(coeffs: Vec<Complex64>, n: usize, points: usize, period: f64) -> Vec<Complex64> {
    let mut data = coeffs;
    fft::fft_nd(&mut data, points, n, true);
    let scale = 1.0 / period.powi(n as i32).sqrt();
    data.iter_mut().for_each(|c| *c *= scale);
    data
}

/// Unitary forward transform of real samples (row-major, axis 0 slowest).
pub fn forward_transform(grid: &GridSpec, samples: &[f64]) -> Result<SpectralField> {
    if samples.len() != grid.len() {
        return Err(WaveError::DimensionMismatch {
            expected: grid.len(),
            found: samples.len(),
        });
    }
    let data = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    Ok(SpectralField {
        grid: *grid,
        coeffs: samples_to_coeffs(data, grid.n, grid.points_per_axis, grid.period),
    })
}

/// Real samples of a Hermitian-symmetric field; rejects asymmetric input.
pub fn inverse_transform(f: &SpectralField) -> Result<Vec<f64>> {
    let defect = f.hermitian_defect();
    if defect > HERMITIAN_TOL {
        return Err(WaveError::NotHermitian { defect });
    }
    let g = f.grid;
    Ok(coeffs_to_samples(f.coeffs.clone(), g.n, g.points_per_axis, g.period)
        .into_iter()
        .map(|c| c.re)
        .collect())
}

/// Real samples of several Hermitian fields on a grid with `points` per
/// axis (zero-padded or truncated from the fields' own grid). Fields are
/// transformed two at a time by packing them as `a + i b`.
pub(crate) fn real_samples_on(
    grid: &GridSpec,
    fields: &[&[Complex64]],
    points: usize,
) -> Vec<Vec<f64>> {
    let n = grid.n;
    let mut out = Vec::with_capacity(fields.len());
    for pair in fields.chunks(2) {
        let mut packed = resample_coeffs(grid, pair[0], points);
        if let Some(second) = pair.get(1) {
            let b = resample_coeffs(grid, second, points);
            packed
                .iter_mut()
                .zip(b)
                .for_each(|(a, b)| *a += Complex64::new(-b.im, b.re));
        }
        let samples = coeffs_to_samples(packed, n, points, grid.period);
        out.push(samples.iter().map(|c| c.re).collect());
        if pair.len() == 2 {
            out.push(samples.iter().map(|c| c.im).collect());
        }
    }
    out
}

/// Coefficients of real samples taken on a grid with `points` per axis,
/// truncated or padded back onto `grid`.
pub(crate) fn coeffs_from_samples_on(grid: &GridSpec, samples: Vec<f64>, points: usize) -> Vec<Complex64> {
    let data = samples.into_iter().map(|x| Complex64::new(x, 0.0)).collect();
    let coeffs = samples_to_coeffs(data, grid.n, points, grid.period);
    fft::resample(&coeffs, grid.n, points, grid.points_per_axis)
}

pub(crate) fn resample_coeffs(grid: &GridSpec, coeffs: &[Complex64], points: usize) -> Vec<Complex64> {
    fft::resample(coeffs, grid.n, grid.points_per_axis, points)
}

/// `∂_axis` for `axis ∈ 1..=n`: multiplies by `iξ_axis` and zeroes the
/// Nyquist row along that axis.
pub fn spectral_derivative(f: &SpectralField, axis: usize) -> Result<SpectralField> {
    let g = f.grid;
    if axis == 0 || axis > g.n {
        return Err(WaveError::AxisOutOfRange { axis, n: g.n });
    }
    Ok(SpectralField {
        grid: g,
        coeffs: derivative_coeffs(&g, &f.coeffs, axis - 1),
    })
}

pub(crate) fn derivative_coeffs(g: &GridSpec, coeffs: &[Complex64], axis0: usize) -> Vec<Complex64> {
    let points = g.points_per_axis;
    let stride = points.pow((g.n - 1 - axis0) as u32);
    let nyquist = points / 2;
    let k0 = g.base_frequency();
    coeffs
        .iter()
        .enumerate()
        .map(|(flat, c)| {
            let i = (flat / stride) % points;
            if i == nyquist {
                ZERO
            } else {
                c * Complex64::new(0.0, k0 * signed_wavenumber(i, points) as f64)
            }
        })
        .collect()
}

/// Inhomogeneous Sobolev norm `(Σ_ξ (1+|ξ|²)^s |û(ξ)|²)^{1/2}`.
pub fn sobolev_norm(f: &SpectralField, s: f64) -> f64 {
    let xi2 = f.grid.xi_squared();
    weighted_sum(&f.coeffs, &xi2, s).sqrt()
}

fn weighted_sum(coeffs: &[Complex64], xi2: &[f64], s: f64) -> f64 {
    if s == 0.0 {
        return coeffs.iter().map(|c| c.norm_sqr()).sum();
    }
    coeffs
        .iter()
        .zip(xi2)
        .map(|(c, x)| (1.0 + x).powf(s) * c.norm_sqr())
        .sum()
}

/// `‖∂u‖_{H^r}` of the space-time gradient `(∂_t u, ∂_1 u, …, ∂_n u)`,
/// i.e. `(‖∂_t u‖²_{H^r} + Σ_i ‖∂_i u‖²_{H^r})^{1/2}` evaluated spectrally
/// (Nyquist rows dropped from the spatial derivatives as in
/// [`spectral_derivative`]).
pub fn gradient_sobolev_norm(state: &FieldState, r: f64) -> f64 {
    let g = state.grid();
    gradient_sobolev_norm_with(state, r, &g.xi_squared(), &grad_weights(g))
}

/// Per-mode `Σ_i ξ_i²` with Nyquist rows excluded per axis.
pub(crate) fn grad_weights(g: &GridSpec) -> Vec<f64> {
    let points = g.points_per_axis;
    let axis: Vec<f64> = (0..points)
        .map(|i| if i == points / 2 { 0.0 } else { g.frequency(i).powi(2) })
        .collect();
    (0..g.len())
        .map(|flat| g.unravel(flat).iter().map(|&i| axis[i]).sum())
        .collect()
}

pub(crate) fn gradient_sobolev_norm_with(state: &FieldState, r: f64, xi2: &[f64], gw: &[f64]) -> f64 {
    state
        .u
        .coeffs
        .iter()
        .zip(&state.ut.coeffs)
        .zip(xi2.iter().zip(gw))
        .map(|((u, ut), (x, w))| (1.0 + x).powf(r) * (ut.norm_sqr() + w * u.norm_sqr()))
        .sum::<f64>()
        .sqrt()
}

/// Linear wave energy `½(‖∂_t u‖² + ‖∇u‖²)` in the box.
pub fn energy(state: &FieldState) -> f64 {
    let xi2 = state.grid().xi_squared();
    0.5 * state
        .u
        .coeffs
        .iter()
        .zip(&state.ut.coeffs)
        .zip(&xi2)
        .map(|((u, ut), x)| ut.norm_sqr() + x * u.norm_sqr())
        .sum::<f64>()
}

/// Coefficient arrays of `(∂_t u, ∂_1 u, …, ∂_n u)`.
pub(crate) fn gradient_coeffs(state: &FieldState) -> Vec<Vec<Complex64>> {
    let g = *state.grid();
    let mut out = Vec::with_capacity(g.n + 1);
    out.push(state.ut.coeffs.clone());
    for axis in 0..g.n {
        out.push(derivative_coeffs(&g, &state.u.coeffs, axis));
    }
    out
}

/// `max_x max(|∂_t u|, |∂_1 u|, …, |∂_n u|)` on a grid oversampled by
/// [`DEFAULT_OVERSAMPLE`].
pub fn gradient_sup_norm(state: &FieldState) -> f64 {
    gradient_sup_norm_with(state, DEFAULT_OVERSAMPLE)
}

/// As [`gradient_sup_norm`] with an explicit oversampling factor (≥ 1).
pub fn gradient_sup_norm_with(state: &FieldState, oversample: usize) -> f64 {
    let g = *state.grid();
    let points = g.points_per_axis * oversample.max(1);
    let comps = gradient_coeffs(state);
    let refs: Vec<&[Complex64]> = comps.iter().map(|c| c.as_slice()).collect();
    real_samples_on(&g, &refs, points)
        .iter()
        .map(|s| par::max_range(s.len(), |i| s[i].abs()))
        .fold(0.0, |a, b| if a.is_nan() || b.is_nan() { f64::NAN } else { a.max(b) })
}

/// Samples of a closure on the grid, row-major.
pub fn sample(grid: &GridSpec, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    (0..grid.len()).map(|i| f(&grid.position(i))).collect()
}
