//! Multi-dimensional complex FFT over flat row-major arrays and spectral
//! zero-padding / truncation between grid sizes.

use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::par;

fn planner() -> &'static Mutex<FftPlanner<f64>> {
    static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    PLANNER.get_or_init(|| Mutex::new(FftPlanner::new()))
}

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    let mut planner = planner().lock().expect("fft planner poisoned");
    if inverse {
        planner.plan_fft_inverse(len)
    } else {
        planner.plan_fft_forward(len)
    }
}

/// Unnormalized in-place transform along every axis of an `n`-dimensional
/// cube with `points` samples per axis. Axis 0 varies slowest.
pub(crate) fn fft_nd(data: &mut [Complex64], points: usize, n: usize, inverse: bool) {
    debug_assert_eq!(data.len(), points.pow(n as u32));
    let fft = plan(points, inverse);
    // ~16k complex values per task keeps rayon overhead negligible.
    let batch = points * (16384 / points).max(1);
    let mut lines = if n > 1 {
        vec![Complex64::new(0.0, 0.0); data.len()]
    } else {
        Vec::new()
    };
    for axis in 0..n {
        let inner = points.pow((n - 1 - axis) as u32);
        if inner == 1 {
            par::for_each_chunk(data, batch, |_, c| fft.process(c));
            continue;
        }
        {
            let src = &*data;
            par::for_each_chunk(&mut lines, points, |l, line| {
                let (o, i) = (l / inner, l % inner);
                let base = o * points * inner + i;
                for (p, v) in line.iter_mut().enumerate() {
                    *v = src[base + p * inner];
                }
            });
        }
        par::for_each_chunk(&mut lines, batch, |_, c| fft.process(c));
        let lines = &lines;
        par::for_each_chunk(data, inner, |c, chunk| {
            let (o, p) = (c / points, c % points);
            let base = o * inner * points + p;
            for (i, v) in chunk.iter_mut().enumerate() {
                *v = lines[base + i * points];
            }
        });
    }
}

/// Where one source index along an axis lands on the resized axis.
fn axis_targets(from: usize, to: usize) -> Vec<Vec<(usize, f64)>> {
    (0..from)
        .map(|i| {
            let m = if i < from / 2 { i as i64 } else { i as i64 - from as i64 };
            let wrap = |m: i64| m.rem_euclid(to as i64) as usize;
            if to == from {
                vec![(i, 1.0)]
            } else if to > from {
                if i == from / 2 {
                    // the Nyquist coefficient is a cosine: split it over ±from/2
                    vec![(wrap(-m), 0.5), (wrap(m), 0.5)]
                } else {
                    vec![(wrap(m), 1.0)]
                }
            } else {
                let half = (to / 2) as i64;
                if m.abs() < half {
                    vec![(wrap(m), 1.0)]
                } else if m.abs() == half {
                    vec![(to / 2, 1.0)]
                } else {
                    Vec::new()
                }
            }
        })
        .collect()
}

/// Moves unitary-normalized coefficients from a `from`-point grid to a
/// `to`-point grid (zero-padding when growing, truncation when shrinking).
/// Growing then shrinking back is the identity.
pub(crate) fn resample(src: &[Complex64], n: usize, from: usize, to: usize) -> Vec<Complex64> {
    let mut dst = vec![Complex64::new(0.0, 0.0); to.pow(n as u32)];
    if from == to {
        dst.copy_from_slice(src);
        return dst;
    }
    let targets = axis_targets(from, to);
    fn walk(
        axis: usize,
        n: usize,
        from: usize,
        to: usize,
        src_off: usize,
        dst_off: usize,
        weight: f64,
        targets: &[Vec<(usize, f64)>],
        src: &[Complex64],
        dst: &mut [Complex64],
    ) {
        for (i, outs) in targets.iter().enumerate() {
            for &(j, w) in outs {
                let s = src_off * from + i;
                let d = dst_off * to + j;
                if axis + 1 == n {
                    dst[d] += src[s] * (weight * w);
                } else {
                    walk(axis + 1, n, from, to, s, d, weight * w, targets, src, dst);
                }
            }
        }
    }
    walk(0, n, from, to, 0, 0, 1.0, &targets, src, &mut dst);
    dst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft_1d(x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter().enumerate().fold(Complex64::new(0.0, 0.0), |acc, (j, v)| {
                    let ang = -2.0 * std::f64::consts::PI * (j * k) as f64 / n as f64;
                    acc + v * Complex64::from_polar(1.0, ang)
                })
            })
            .collect()
    }

    #[test]
    fn nd_transform_matches_naive_dft() {
        let (points, n) = (4usize, 3usize);
        let data: Vec<Complex64> = (0..64)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let mut fast = data.clone();
        fft_nd(&mut fast, points, n, false);
        // separable naive transform, axis by axis
        let mut slow = data;
        for axis in 0..n {
            let inner = points.pow((n - 1 - axis) as u32);
            let outer = 64 / (inner * points);
            for o in 0..outer {
                for i in 0..inner {
                    let idx: Vec<usize> = (0..points).map(|p| (o * points + p) * inner + i).collect();
                    let line: Vec<Complex64> = idx.iter().map(|&q| slow[q]).collect();
                    for (q, v) in idx.iter().zip(naive_dft_1d(&line)) {
                        slow[*q] = v;
                    }
                }
            }
        }
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn pad_then_truncate_is_identity() {
        let src: Vec<Complex64> = (0..64).map(|i| Complex64::new(i as f64, -(i as f64) * 0.5)).collect();
        let up = resample(&src, 2, 8, 12);
        let back = resample(&up, 2, 12, 8);
        for (a, b) in src.iter().zip(&back) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
