//! Initial-data families: localized bumps and gaussians, single modes,
//! constants, seeded random superpositions, and concentrating ladders.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, WaveError};
use crate::spectral::{forward_transform, FieldState, GridSpec};

/// Gaussians are truncated to zero where they fall below this fraction of
/// their peak; the truncation radius is their support radius.
pub const GAUSSIAN_CUTOFF: f64 = 1e-14;

/// Minimum grid points across a concentrated width.
pub const MIN_POINTS_ACROSS: f64 = 8.0;

const RANDOM_BLOBS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    /// `exp(−|x−c|²/w²)`.
    Gaussian,
    /// `exp(1 − 1/(1 − |x−c|²/w²))` inside `|x−c| < w`.
    Bump,
    /// `cos(ξ·x)` for the integer wave vector `mode`.
    SingleMode,
    Constant,
    /// Seeded sum of bumps with random amplitudes, widths in `[w/2, w]`
    /// and (unless radial) offsets within `w/2` of the center.
    Random,
}

/// Which of `(u₀, u₁)` carries the profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Slot {
    Position,
    #[default]
    Velocity,
    Both,
}

fn default_width() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataProfile {
    pub shape: Shape,
    /// Defaults to the box center.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
    #[serde(default = "default_width")]
    pub width: f64,
    #[serde(default)]
    pub radial: bool,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub slot: Slot,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Vec<i64>>,
}

impl DataProfile {
    pub fn new(shape: Shape, width: f64) -> Self {
        Self {
            shape,
            center: None,
            width,
            radial: false,
            seed: 0,
            slot: Slot::Velocity,
            mode: None,
        }
    }

    pub fn with_slot(mut self, slot: Slot) -> Self {
        self.slot = slot;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn radial(mut self) -> Self {
        self.radial = true;
        self
    }

    pub fn with_center(mut self, center: Vec<f64>) -> Self {
        self.center = Some(center);
        self
    }

    pub fn with_mode(mut self, mode: Vec<i64>) -> Self {
        self.mode = Some(mode);
        self
    }

    fn center_on(&self, grid: &GridSpec) -> Vec<f64> {
        self.center.clone().unwrap_or_else(|| grid.center())
    }

    /// Radius of the ball around the center outside of which the data
    /// vanish; `None` for data filling the box.
    pub fn support_radius(&self, n: usize) -> Option<f64> {
        match self.shape {
            Shape::Gaussian => Some(self.width * (1.0 / GAUSSIAN_CUTOFF).ln().sqrt()),
            Shape::Bump => Some(self.width),
            Shape::Random => {
                let (a, b) = self.blobs(n);
                a.iter()
                    .chain(&b)
                    .map(|blob| blob.offset.iter().map(|o| o * o).sum::<f64>().sqrt() + blob.width)
                    .fold(None, |acc: Option<f64>, r| Some(acc.map_or(r, |m| m.max(r))))
            }
            Shape::SingleMode | Shape::Constant => None,
        }
    }

    pub fn validate(&self, grid: &GridSpec) -> Result<()> {
        if !(self.width.is_finite() && self.width > 0.0) {
            return Err(WaveError::invalid(format!("profile width must be positive, got {}", self.width)));
        }
        let center = self.center_on(grid);
        if center.len() != grid.n() {
            return Err(WaveError::DimensionMismatch {
                expected: grid.n(),
                found: center.len(),
            });
        }
        if self.radial {
            if center.iter().zip(grid.center()).any(|(a, b)| (a - b).abs() > 1e-12 * grid.period()) {
                return Err(WaveError::invalid("radial data must be centered in the box"));
            }
            if self.shape == Shape::SingleMode {
                return Err(WaveError::invalid("a single Fourier mode is not radial"));
            }
        }
        if self.shape == Shape::SingleMode {
            match &self.mode {
                Some(m) if m.len() == grid.n() => {}
                Some(m) => {
                    return Err(WaveError::DimensionMismatch {
                        expected: grid.n(),
                        found: m.len(),
                    })
                }
                None => return Err(WaveError::invalid("single_mode profile needs a `mode` wave vector")),
            }
        }
        if let Some(r) = self.support_radius(grid.n()) {
            let limit = grid.period() / 2.0;
            if r >= limit {
                return Err(WaveError::Support { radius: r, limit });
            }
        }
        Ok(())
    }

    /// Random bump components for `u₀` and `u₁`; lengths scale with `width`.
    fn blobs(&self, n: usize) -> (Vec<Blob>, Vec<Blob>) {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let draw = |rng: &mut ChaCha8Rng| -> Vec<Blob> {
            (0..RANDOM_BLOBS)
                .map(|_| {
                    let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                    let amp = sign * rng.gen_range(0.2..1.0);
                    let width = self.width * rng.gen_range(0.5..1.0);
                    let offset = (0..n)
                        .map(|_| {
                            let o: f64 = rng.gen_range(-0.5..0.5);
                            if self.radial {
                                0.0
                            } else {
                                o * self.width
                            }
                        })
                        .collect();
                    Blob { amp, width, offset }
                })
                .collect()
        };
        let a = draw(&mut rng);
        let b = draw(&mut rng);
        (a, b)
    }

    /// Raw (unnormalized) samples of `(u₀, u₁)`.
    pub fn samples(&self, grid: &GridSpec) -> Result<(Vec<f64>, Vec<f64>)> {
        self.validate(grid)?;
        let center = self.center_on(grid);
        let p = grid.period();
        let disp = |x: &[f64]| -> Vec<f64> {
            x.iter()
                .zip(&center)
                .map(|(a, c)| {
                    let d = a - c;
                    d - p * (d / p).round()
                })
                .collect()
        };
        let len = grid.len();
        let profile: Box<dyn Fn(&[f64], usize) -> f64> = match self.shape {
            Shape::Gaussian => {
                let rmax2 = self.support_radius(grid.n()).expect("localized").powi(2);
                let w2 = self.width * self.width;
                Box::new(move |x, _| {
                    let r2: f64 = disp(x).iter().map(|d| d * d).sum();
                    if r2 >= rmax2 {
                        0.0
                    } else {
                        (-r2 / w2).exp()
                    }
                })
            }
            Shape::Bump => {
                let w = self.width;
                Box::new(move |x, _| bump(disp(x).iter().map(|d| d * d).sum::<f64>().sqrt(), w))
            }
            Shape::SingleMode => {
                let k0 = grid.base_frequency();
                let mode = self.mode.clone().expect("validated");
                Box::new(move |x, _| {
                    let phase: f64 = x.iter().zip(&mode).map(|(a, m)| a * k0 * *m as f64).sum();
                    phase.cos()
                })
            }
            Shape::Constant => Box::new(|_, _| 1.0),
            Shape::Random => {
                let (a, b) = self.blobs(grid.n());
                Box::new(move |x, slot| {
                    let d = disp(x);
                    let set = if slot == 0 { &a } else { &b };
                    set.iter()
                        .map(|blob| {
                            let r = d
                                .iter()
                                .zip(&blob.offset)
                                .map(|(x, o)| (x - o).powi(2))
                                .sum::<f64>()
                                .sqrt();
                            blob.amp * bump(r, blob.width)
                        })
                        .sum()
                })
            }
        };
        let fill = |slot: usize| -> Vec<f64> { (0..len).map(|i| profile(&grid.position(i), slot)).collect() };
        let zeros = || vec![0.0; len];
        Ok(match self.slot {
            Slot::Position => (fill(0), zeros()),
            Slot::Velocity => (zeros(), fill(1)),
            Slot::Both => (fill(0), fill(1)),
        })
    }

    /// Same profile with every length multiplied by `factor`.
    pub fn shrunk(&self, factor: f64) -> Self {
        let mut p = self.clone();
        p.width *= factor;
        p
    }
}

#[derive(Debug, Clone)]
struct Blob {
    amp: f64,
    width: f64,
    offset: Vec<f64>,
}

fn bump(r: f64, w: f64) -> f64 {
    let z = r / w;
    if z >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - z * z)).exp()
    }
}

/// Builds `(u₀, u₁)` from `profile` and rescales both by one factor so
/// that `‖u₀‖_{H^s} + ‖u₁‖_{H^{s−1}} = eps` in the discrete norms.
pub fn make_data(profile: &DataProfile, grid: &GridSpec, eps: f64, s: f64) -> Result<FieldState> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(WaveError::invalid(format!("data size must be positive, got {eps}")));
    }
    let (a, b) = profile.samples(grid)?;
    let raw = FieldState::new(0.0, forward_transform(grid, &a)?, forward_transform(grid, &b)?)?;
    let norm = raw.data_norm(s);
    if !(norm > 0.0) {
        return Err(WaveError::Degenerate("profile has zero norm on this grid".into()));
    }
    Ok(raw.scaled(eps / norm))
}

/// The `j`-th member of a concentrating ladder: `base` shrunk by `2^{−j}`
/// and normalized to data size `2^{−j·norm_exponent}`.
pub fn concentrated_family(
    base: &DataProfile,
    grid: &GridSpec,
    s: f64,
    j: u32,
    norm_exponent: f64,
) -> Result<FieldState> {
    if matches!(base.shape, Shape::Constant | Shape::SingleMode) {
        return Err(WaveError::invalid("only localized profiles can be concentrated"));
    }
    let factor = 0.5f64.powi(j as i32);
    let profile = base.shrunk(factor);
    let across = profile.width / grid.spacing();
    if across < MIN_POINTS_ACROSS {
        return Err(WaveError::UnderResolved(format!(
            "level {j} has width {:.4} = {across:.2} grid cells (< {MIN_POINTS_ACROSS})",
            profile.width
        )));
    }
    make_data(&profile, grid, factor.powf(norm_exponent), s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{inverse_transform, sobolev_norm};
    use approx::assert_relative_eq;

    fn quarter_turn(grid: &GridSpec, v: &[f64]) -> Vec<f64> {
        let n = grid.points();
        (0..grid.len())
            .map(|flat| {
                let mut idx = grid.unravel(flat);
                let (i, j) = (idx[0], idx[1]);
                idx[0] = j;
                idx[1] = (n - i) % n;
                v[grid.ravel(&idx)]
            })
            .collect()
    }

    #[test]
    fn constant_profile_normalization() {
        let g = GridSpec::new(2, 8, 3.0).unwrap();
        let p = DataProfile::new(Shape::Constant, 1.0).with_slot(Slot::Position);
        let d = make_data(&p, &g, 0.25, 1.5).unwrap();
        let u0 = inverse_transform(&d.u).unwrap();
        assert!(u0.iter().all(|x| (x - 0.25 / g.volume().sqrt()).abs() < 1e-14));
        assert_eq!(d.ut.max_abs_coeff(), 0.0);
    }

    #[test]
    fn normalization_is_exact_for_every_shape() {
        let g = GridSpec::new(2, 32, 16.0).unwrap();
        let profiles = [
            DataProfile::new(Shape::Gaussian, 1.2).with_slot(Slot::Both),
            DataProfile::new(Shape::Bump, 3.0).with_slot(Slot::Position),
            DataProfile::new(Shape::SingleMode, 1.0).with_mode(vec![1, 2]),
            DataProfile::new(Shape::Constant, 1.0),
            DataProfile::new(Shape::Random, 4.0).with_seed(3).with_slot(Slot::Both),
        ];
        for p in &profiles {
            for (eps, s) in [(1e-3, 1.25), (0.7, 2.1), (3.0, 0.5)] {
                let d = make_data(p, &g, eps, s).unwrap();
                assert_relative_eq!(d.data_norm(s), eps, max_relative = 1e-12);
            }
        }
        assert!(make_data(&profiles[0], &g, 0.0, 1.0).is_err());
    }

    #[test]
    fn support_constraint_is_enforced() {
        let g = GridSpec::new(1, 64, 8.0).unwrap();
        assert!(matches!(
            make_data(&DataProfile::new(Shape::Bump, 4.0), &g, 1.0, 1.0),
            Err(WaveError::Support { .. })
        ));
        assert!(make_data(&DataProfile::new(Shape::Gaussian, 0.7), &g, 1.0, 1.0).is_ok());
        assert!(make_data(&DataProfile::new(Shape::Gaussian, 0.71), &g, 1.0, 1.0).is_err());
        assert!(make_data(&DataProfile::new(Shape::SingleMode, 1.0), &g, 1.0, 1.0).is_err());
        assert!(make_data(&DataProfile::new(Shape::Gaussian, 1.0).radial().with_center(vec![3.0]), &g, 1.0, 1.0).is_err());
    }

    #[test]
    fn radial_profiles_respect_grid_symmetries() {
        let g = GridSpec::new(2, 32, 16.0).unwrap();
        for p in [
            DataProfile::new(Shape::Gaussian, 1.3).radial().with_slot(Slot::Both),
            DataProfile::new(Shape::Random, 5.0).radial().with_seed(7).with_slot(Slot::Both),
        ] {
            let (a, b) = p.samples(&g).unwrap();
            for v in [a, b] {
                let r = quarter_turn(&g, &v);
                assert!(v.iter().zip(&r).all(|(x, y)| (x - y).abs() < 1e-12));
            }
        }
    }

    #[test]
    fn random_profiles_are_reproducible() {
        let g = GridSpec::new(1, 64, 16.0).unwrap();
        let p = DataProfile::new(Shape::Random, 3.0).with_seed(42).with_slot(Slot::Both);
        assert_eq!(p.samples(&g).unwrap(), p.samples(&g).unwrap());
        assert_ne!(p.samples(&g).unwrap(), p.clone().with_seed(43).samples(&g).unwrap());
    }

    #[test]
    fn concentrated_family_levels() {
        let g = GridSpec::new(1, 4096, 32.0).unwrap();
        let base = DataProfile::new(Shape::Bump, 0.5);
        let s = 0.75;
        let d0 = concentrated_family(&base, &g, s, 0, 0.25).unwrap();
        assert_eq!(d0, make_data(&base, &g, 1.0, s).unwrap());
        let r0 = base.support_radius(1).unwrap();
        let center = g.center()[0];
        let mut last_critical = 0.0;
        for j in 0..=3 {
            let d = concentrated_family(&base, &g, s, j, 0.25).unwrap();
            assert_relative_eq!(d.data_norm(s), 0.5f64.powf(0.25 * j as f64), max_relative = 1e-12);
            let v = inverse_transform(&d.ut).unwrap();
            let peak = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let reach = v
                .iter()
                .enumerate()
                .filter(|(_, x)| x.abs() > 1e-12 * peak)
                .map(|(i, _)| (g.position(i)[0] - center).abs())
                .fold(0.0, f64::max);
            assert!(reach <= 0.5f64.powi(j as i32) * r0 + g.spacing());
            // s = s_c − 0.5 for k = 5: the critical norm grows along the ladder
            let critical = sobolev_norm(&d.ut, 1.25 - 1.0);
            assert!(critical > last_critical);
            last_critical = critical;
        }
        assert!(matches!(
            concentrated_family(&base, &g, s, 4, 0.25),
            Err(WaveError::UnderResolved(_))
        ));
    }
}
