//! Exact Fourier-space propagator for `□u = F`, the Duhamel integral, and
//! empirical Strichartz ratios.

use num_complex::Complex64;

use crate::error::{Result, WaveError};
use crate::par;
use crate::quadrature::{self, TimeExponent};
use crate::spectral::{
    gradient_sobolev_norm, gradient_sup_norm, FieldState, GridSpec, SpectralField,
};

/// Solution of the free wave equation at time `data.time + t`.
pub fn homogeneous_solution(data: &FieldState, t: f64) -> FieldState {
    let g = *data.grid();
    let xi2 = g.xi_squared();
    let (u, ut): (Vec<Complex64>, Vec<Complex64>) = data
        .u
        .coeffs()
        .iter()
        .zip(data.ut.coeffs())
        .zip(&xi2)
        .map(|((&u0, &u1), &x)| propagate_mode(u0, u1, x.sqrt(), t))
        .unzip();
    FieldState {
        time: data.time + t,
        u: SpectralField::from_coeffs(g, u).expect("same grid"),
        ut: SpectralField::from_coeffs(g, ut).expect("same grid"),
    }
}

fn propagate_mode(u0: Complex64, u1: Complex64, omega: f64, t: f64) -> (Complex64, Complex64) {
    if omega == 0.0 {
        return (u0 + u1 * t, u1);
    }
    let (s, c) = (omega * t).sin_cos();
    (u0 * c + u1 * (s / omega), u0 * (-omega * s) + u1 * c)
}

/// Forcing snapshots `F(iΔt)`, `i = 0..len`, on a uniform time grid.
#[derive(Debug, Clone)]
pub struct ForcingHistory {
    dt: f64,
    snapshots: Vec<SpectralField>,
}

impl ForcingHistory {
    pub fn new(dt: f64, snapshots: Vec<SpectralField>) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(WaveError::invalid(format!("forcing step must be positive, got {dt}")));
        }
        let Some(first) = snapshots.first() else {
            return Err(WaveError::invalid("forcing history is empty"));
        };
        let g = *first.grid();
        if snapshots.iter().any(|s| *s.grid() != g) {
            return Err(WaveError::invalid("forcing snapshots live on different grids"));
        }
        Ok(Self { dt, snapshots })
    }

    /// Builds a history from explicit sample times, which must be uniform
    /// and start at zero.
    pub fn from_times(times: &[f64], snapshots: Vec<SpectralField>) -> Result<Self> {
        if times.len() != snapshots.len() || times.len() < 2 {
            return Err(WaveError::invalid("need at least two forcing samples with matching times"));
        }
        let dt = quadrature::uniform_step(times)?;
        Self::new(dt, snapshots)
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn grid(&self) -> &GridSpec {
        self.snapshots[0].grid()
    }

    /// Index of `t` on the grid, if it lies on it.
    pub fn index_of(&self, t: f64) -> Result<usize> {
        let x = t / self.dt;
        let j = x.round();
        if t < 0.0 || (x - j).abs() > 1e-9 * x.abs().max(1.0) || j as usize >= self.len() {
            return Err(WaveError::invalid(format!("time {t} is not on the forcing grid")));
        }
        Ok(j as usize)
    }
}

/// State at time `t` of the solution of `□u = F` with null data, by
/// fourth-order quadrature of `∫₀ᵗ sin((t−τ)|ξ|)/|ξ| F̂(τ,ξ) dτ`.
pub fn duhamel(forcing: &ForcingHistory, t: f64) -> Result<FieldState> {
    let j = forcing.index_of(t)?;
    let mut all = duhamel_trajectory(forcing);
    Ok(all.swap_remove(j))
}

/// Duhamel states at every forcing time.
///
/// Uses `sin(ω(t−τ)) = sin ωt cos ωτ − cos ωt sin ωτ` so the quadrature
/// sums accumulate in one pass per mode; the weights are the same as for
/// the direct form.
pub fn duhamel_trajectory(forcing: &ForcingHistory) -> Vec<FieldState> {
    let g = *forcing.grid();
    let steps = forcing.len() - 1;
    let h = forcing.dt;
    let xi2 = g.xi_squared();
    let width = 2 * (steps + 1);
    let mut modes = vec![Complex64::new(0.0, 0.0); g.len() * width];
    par::for_each_chunk(&mut modes, width, |mode, out| {
        let omega = xi2[mode].sqrt();
        let f: Vec<Complex64> = forcing.snapshots.iter().map(|s| s.coeffs()[mode]).collect();
        let (u, ut) = out.split_at_mut(steps + 1);
        if omega == 0.0 {
            // ∫(t−τ)F dτ and ∫F dτ
            let a: Vec<Complex64> = f.clone();
            let b: Vec<Complex64> = (0..=steps).map(|i| f[i] * (i as f64 * h)).collect();
            let ia = quadrature::cumulative(&a, h);
            let ib = quadrature::cumulative(&b, h);
            for j in 0..=steps {
                u[j] = ia[j] * (j as f64 * h) - ib[j];
                ut[j] = ia[j];
            }
        } else {
            let phases: Vec<(f64, f64)> = (0..=steps).map(|i| (omega * i as f64 * h).sin_cos()).collect();
            let cf: Vec<Complex64> = f.iter().zip(&phases).map(|(v, p)| v * p.1).collect();
            let sf: Vec<Complex64> = f.iter().zip(&phases).map(|(v, p)| v * p.0).collect();
            let ic = quadrature::cumulative(&cf, h);
            let is = quadrature::cumulative(&sf, h);
            for j in 0..=steps {
                let (s, c) = phases[j];
                u[j] = (ic[j] * s - is[j] * c) / omega;
                ut[j] = ic[j] * c + is[j] * s;
            }
        }
    });
    (0..=steps)
        .map(|j| {
            let mut u = Vec::with_capacity(g.len());
            let mut ut = Vec::with_capacity(g.len());
            for m in 0..g.len() {
                u.push(modes[m * width + j]);
                ut.push(modes[m * width + steps + 1 + j]);
            }
            FieldState {
                time: j as f64 * h,
                u: SpectralField::from_coeffs(g, u).expect("grid"),
                ut: SpectralField::from_coeffs(g, ut).expect("grid"),
            }
        })
        .collect()
}

/// Time exponent, regularity, horizon and sample grid for a Strichartz
/// measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct StrichartzQuery {
    pub q: TimeExponent,
    pub s: f64,
    pub horizon: f64,
    pub sample_times: Vec<f64>,
}

impl StrichartzQuery {
    pub fn new(q: TimeExponent, s: f64, sample_times: Vec<f64>) -> Result<Self> {
        if let TimeExponent::Finite(q) = q {
            if !(q >= 2.0) {
                return Err(WaveError::invalid(format!("Strichartz exponent must be >= 2, got {q}")));
            }
        }
        quadrature::uniform_step(&sample_times)?;
        let horizon = *sample_times.last().expect("checked non-empty");
        Ok(Self {
            q,
            s,
            horizon,
            sample_times,
        })
    }

    /// `intervals + 1` uniformly spaced samples on `[0, horizon]`.
    pub fn uniform(q: TimeExponent, s: f64, horizon: f64, intervals: usize) -> Result<Self> {
        if !(horizon > 0.0) || intervals == 0 {
            return Err(WaveError::invalid("horizon and interval count must be positive"));
        }
        let times = (0..=intervals)
            .map(|i| horizon * i as f64 / intervals as f64)
            .collect();
        Self::new(q, s, times)
    }
}

/// `(‖∂u‖_{L^q_t L^∞_x} + ‖∂u‖_{L^∞_t H^{s−1}}) / ‖∂u(0)‖_{H^{s−1}}` for the
/// free evolution of `data`; a lower bound on the Strichartz constant.
pub fn estimate_strichartz_ratio(data: &FieldState, query: &StrichartzQuery) -> Result<f64> {
    let denom = gradient_sobolev_norm(data, query.s - 1.0);
    if denom == 0.0 {
        return Err(WaveError::Degenerate("zero data has no Strichartz ratio".into()));
    }
    let h = quadrature::uniform_step(&query.sample_times)?;
    let samples: Vec<(f64, f64)> = par::map(&query.sample_times, |&t| {
        let st = homogeneous_solution(data, t);
        (gradient_sup_norm(&st), gradient_sobolev_norm(&st, query.s - 1.0))
    });
    let sups: Vec<f64> = samples.iter().map(|p| p.0).collect();
    let energy_part = samples.iter().map(|p| p.1).fold(0.0, f64::max);
    let mixed = quadrature::mixed_time_norm(&sups, h, query.q)?;
    Ok((mixed + energy_part) / denom)
}

/// Default time spacing for endpoint growth tables.
pub const ENDPOINT_SAMPLE_SPACING: f64 = 0.125;

/// `‖∂u‖_{L²([0,T]; L^∞)} / ‖∂u(0)‖_{H^{s−1}}` for every `T` in `horizons`,
/// in three dimensions with `s > 2`.
pub fn estimate_endpoint_growth(data: &FieldState, s: f64, horizons: &[f64]) -> Result<Vec<(f64, f64)>> {
    estimate_endpoint_growth_with(data, s, horizons, ENDPOINT_SAMPLE_SPACING)
}

/// As [`estimate_endpoint_growth`] with an explicit target sample spacing.
/// When every horizon is an even multiple of a common step, one sample
/// sweep serves all of them.
pub fn estimate_endpoint_growth_with(
    data: &FieldState,
    s: f64,
    horizons: &[f64],
    spacing: f64,
) -> Result<Vec<(f64, f64)>> {
    if data.grid().n() != 3 {
        return Err(WaveError::invalid(format!(
            "endpoint growth is defined for n = 3, got n = {}",
            data.grid().n()
        )));
    }
    if !(s > 2.0) {
        return Err(WaveError::invalid(format!("endpoint growth needs s > 2, got {s}")));
    }
    if horizons.is_empty() || horizons.windows(2).any(|w| w[1] <= w[0]) || horizons[0] <= 0.0 {
        return Err(WaveError::invalid("horizons must be positive and increasing"));
    }
    let denom = gradient_sobolev_norm(data, s - 1.0);
    if denom == 0.0 {
        return Err(WaveError::Degenerate("zero data has no Strichartz ratio".into()));
    }
    let first = horizons[0];
    let h = first / (2.0 * (first / (2.0 * spacing)).ceil().max(1.0));
    let counts: Vec<f64> = horizons.iter().map(|t| t / h).collect();
    let shared = counts
        .iter()
        .all(|c| (c - c.round()).abs() < 1e-9 * c.max(1.0) && (c.round() as u64) % 2 == 0);
    if shared {
        let last = counts.last().expect("non-empty").round() as usize;
        let sups = par::map_range(last + 1, |i| gradient_sup_norm(&homogeneous_solution(data, i as f64 * h)));
        let mut out = Vec::with_capacity(horizons.len());
        for (t, c) in horizons.iter().zip(&counts) {
            let m = c.round() as usize;
            let l2 = quadrature::mixed_time_norm(&sups[..=m], h, TimeExponent::Finite(2.0))?;
            out.push((*t, l2 / denom));
        }
        Ok(out)
    } else {
        horizons
            .iter()
            .map(|&t| {
                let m = 2 * (t / (2.0 * spacing)).ceil().max(1.0) as usize;
                let step = t / m as f64;
                let sups = par::map_range(m + 1, |i| gradient_sup_norm(&homogeneous_solution(data, i as f64 * step)));
                let l2 = quadrature::mixed_time_norm(&sups, step, TimeExponent::Finite(2.0))?;
                Ok((t, l2 / denom))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{energy, forward_transform, sample};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn grid() -> GridSpec {
        GridSpec::new(1, 16, 2.0 * PI).unwrap()
    }

    fn field(g: &GridSpec, f: impl Fn(f64) -> f64) -> SpectralField {
        forward_transform(g, &sample(g, |x| f(x[0]))).unwrap()
    }

    fn max_diff(a: &SpectralField, b: &SpectralField) -> f64 {
        a.coeffs().iter().zip(b.coeffs()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn single_mode_and_zero_mode_closed_forms() {
        let g = grid();
        let d = FieldState::new(0.0, field(&g, f64::cos), SpectralField::zeros(g)).unwrap();
        for t in [0.3, 1.0, 7.5] {
            let st = homogeneous_solution(&d, t);
            assert!(max_diff(&st.u, &field(&g, |x| t.cos() * x.cos())) < 1e-12);
            assert!(max_diff(&st.ut, &field(&g, |x| -t.sin() * x.cos())) < 1e-12);
        }
        let d = FieldState::new(0.0, SpectralField::zeros(g), field(&g, |_| 1.0)).unwrap();
        let st = homogeneous_solution(&d, 2.5);
        assert!(max_diff(&st.u, &field(&g, |_| 2.5)) < 1e-12);
        let d = FieldState::new(0.0, SpectralField::zeros(g), field(&g, f64::cos)).unwrap();
        let st = homogeneous_solution(&d, 0.7);
        assert!(max_diff(&st.u, &field(&g, |x| 0.7f64.sin() * x.cos())) < 1e-12);
    }

    #[test]
    fn duhamel_closed_forms() {
        let g = grid();
        let steps = 40;
        let h = 0.05;
        let zero = ForcingHistory::new(h, vec![SpectralField::zeros(g); steps + 1]).unwrap();
        assert_eq!(duhamel(&zero, 1.0).unwrap().u.max_abs_coeff(), 0.0);

        let c = ForcingHistory::new(h, vec![field(&g, |_| 3.0); steps + 1]).unwrap();
        for t in [0.05, 0.15, 1.0, 2.0] {
            let st = duhamel(&c, t).unwrap();
            assert!(max_diff(&st.u, &field(&g, |_| 1.5 * t * t)) < 1e-12);
            assert!(max_diff(&st.ut, &field(&g, |_| 3.0 * t)) < 1e-12);
        }

        let f = ForcingHistory::new(h, vec![field(&g, f64::cos); steps + 1]).unwrap();
        for t in [0.05, 0.35, 2.0] {
            let st = duhamel(&f, t).unwrap();
            // time-constant forcing: quadrature of a sine is O(h⁴) accurate
            assert!(max_diff(&st.u, &field(&g, |x| (1.0 - t.cos()) * x.cos())) < 1e-6);
        }
        assert!(duhamel(&f, 0.123).is_err());
        assert!(duhamel(&f, 2.05).is_err());
    }

    #[test]
    fn group_property_and_energy() {
        let g = GridSpec::new(2, 16, 6.0).unwrap();
        let u0 = forward_transform(&g, &sample(&g, |x| (-(x[0] - 3.0).powi(2) - (x[1] - 2.5).powi(2)).exp())).unwrap();
        let u1 = forward_transform(&g, &sample(&g, |x| (x[0] * x[1] * 0.3).sin())).unwrap();
        let d = FieldState::new(0.0, u0, u1).unwrap();
        let a = homogeneous_solution(&homogeneous_solution(&d, 0.8), 1.7);
        let b = homogeneous_solution(&d, 2.5);
        assert!(max_diff(&a.u, &b.u) < 1e-10 * b.u.max_abs_coeff());
        assert!(max_diff(&a.ut, &b.ut) < 1e-10 * b.ut.max_abs_coeff());
        assert_relative_eq!(energy(&b), energy(&d), max_relative = 1e-12);
    }

    #[test]
    fn strichartz_ratio_basics() {
        let g = grid();
        let zero = FieldState::zeros(g);
        let q = StrichartzQuery::uniform(TimeExponent::Infinite, 1.5, 1.0, 8).unwrap();
        assert!(matches!(estimate_strichartz_ratio(&zero, &q), Err(WaveError::Degenerate(_))));
        let d = FieldState::new(0.0, field(&g, |x| (2.0 * x).sin()), field(&g, f64::cos)).unwrap();
        let r = estimate_strichartz_ratio(&d, &q).unwrap();
        assert!(r >= 1.0);
        let q2 = StrichartzQuery::uniform(TimeExponent::Finite(4.0), 1.5, 2.0, 16).unwrap();
        let a = estimate_strichartz_ratio(&d, &q2).unwrap();
        let b = estimate_strichartz_ratio(&d.scaled(-3.5), &q2).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-12);
        assert!(StrichartzQuery::uniform(TimeExponent::Finite(1.5), 1.0, 1.0, 4).is_err());
        assert!(StrichartzQuery::new(TimeExponent::Finite(2.0), 1.0, vec![0.0, 0.1, 0.3]).is_err());
    }

    #[test]
    fn endpoint_growth_preconditions() {
        let g = grid();
        let d = FieldState::new(0.0, field(&g, f64::cos), SpectralField::zeros(g)).unwrap();
        assert!(estimate_endpoint_growth(&d, 2.1, &[1.0]).is_err());
        let g3 = GridSpec::new(3, 8, 2.0 * PI).unwrap();
        let u0 = forward_transform(&g3, &sample(&g3, |x| x[0].cos() * x[1].sin())).unwrap();
        let d3 = FieldState::new(0.0, u0, SpectralField::zeros(g3)).unwrap();
        assert!(estimate_endpoint_growth(&d3, 2.0, &[1.0]).is_err());
        assert!(estimate_endpoint_growth(&d3, 2.5, &[2.0, 1.0]).is_err());
        let a = estimate_endpoint_growth(&d3, 2.5, &[1.0, 2.0]).unwrap();
        let b = estimate_endpoint_growth(&d3.scaled(2.0), 2.5, &[1.0, 2.0]).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_relative_eq!(x.1, y.1, max_relative = 1e-12);
        }
        // consistency with the general ratio restricted to its L²L^∞ part
        let single = estimate_endpoint_growth(&d3, 2.5, &[1.0]).unwrap()[0].1;
        let q = StrichartzQuery::uniform(TimeExponent::Finite(2.0), 2.5, 1.0, 8).unwrap();
        let full = estimate_strichartz_ratio(&d3, &q).unwrap();
        let energy_part = q
            .sample_times
            .iter()
            .map(|&t| gradient_sobolev_norm(&homogeneous_solution(&d3, t), 1.5))
            .fold(0.0, f64::max)
            / gradient_sobolev_norm(&d3, 1.5);
        assert_relative_eq!(single, full - energy_part, max_relative = 1e-12);
    }
}
