use num_complex::Complex64;

use super::NonlinearSpec;
use crate::error::{Result, WaveError};
use crate::par;
use crate::spectral::{self, FieldState, SpectralField};

/// Points per axis of the dealiasing grid for a degree-`k` product:
/// at least `(k+1)/2 · points`, rounded up to an even size.
pub fn padded_points(points: usize, k: u32) -> usize {
    let m = ((k as usize + 1) * points).div_ceil(2);
    m + m % 2
}

/// `N(u) = Σ c_α (∂u)^α`, formed pointwise on a zero-padded grid and
/// truncated back, which removes all aliasing of the degree-`k` product.
pub fn eval_n(state: &FieldState, spec: &NonlinearSpec) -> Result<SpectralField> {
    let g = *state.grid();
    if spec.n() != g.n() {
        return Err(WaveError::DimensionMismatch {
            expected: g.n(),
            found: spec.n(),
        });
    }
    if spec.is_zero() {
        return Ok(SpectralField::zeros(g));
    }
    let used = spec.used_components();
    let mut comps: Vec<Vec<Complex64>> = Vec::new();
    let mut slot = vec![usize::MAX; g.n() + 1];
    for (i, &u) in used.iter().enumerate() {
        if !u {
            continue;
        }
        slot[i] = comps.len();
        comps.push(if i == 0 {
            state.ut.coeffs().to_vec()
        } else {
            spectral::derivative_coeffs(&g, state.u.coeffs(), i - 1)
        });
    }
    let m = padded_points(g.points(), spec.k());
    let refs: Vec<&[Complex64]> = comps.iter().map(|c| c.as_slice()).collect();
    let samples = spectral::real_samples_on(&g, &refs, m);
    // exponent table indexed by sample slot
    let terms: Vec<(f64, Vec<(usize, i32)>)> = spec
        .terms()
        .iter()
        .map(|t| {
            let powers = t
                .alpha
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| (slot[i], e as i32))
                .collect();
            (t.coeff, powers)
        })
        .collect();
    let mut product = vec![0.0; m.pow(g.n() as u32)];
    par::for_each_chunk(&mut product, 4096, |c, chunk| {
        let base = c * 4096;
        for (j, out) in chunk.iter_mut().enumerate() {
            let p = base + j;
            *out = terms
                .iter()
                .map(|(coeff, powers)| {
                    coeff * powers.iter().map(|&(s, e)| samples[s][p].powi(e)).product::<f64>()
                })
                .sum();
        }
    });
    SpectralField::from_coeffs(g, spectral::coeffs_from_samples_on(&g, product, m))
}
