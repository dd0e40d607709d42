//! Rotation invariance of `P(a, b) = Σ c_α a^{α₀} Π b_i^{α_i}`.
//!
//! Two independent routes: an exact reduction to a polynomial in `a` and
//! `|b|²`, and a randomized falsification over random vectors and random
//! rotations. In one dimension "rotation" means the reflection `b → −b`.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::NonlinearSpec;

/// Seed of the sampling pass; recorded in every report.
pub const RADIAL_SEED: u64 = 0x7261_6469_616c;
pub const RADIAL_VECTORS: usize = 64;
pub const RADIAL_ROTATIONS: usize = 64;
pub const RADIAL_TOL: f64 = 1e-9;

/// A rotation `R` and point `(a, b)` with `P(a, Rb) ≠ P(a, b)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RotationWitness {
    pub a: f64,
    pub b: Vec<f64>,
    /// Row-major `n × n` matrix.
    pub rotation: Vec<Vec<f64>>,
    pub before: f64,
    pub after: f64,
}

impl std::fmt::Display for RotationWitness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let fmt_vec = |v: &[f64]| {
            let parts: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
            format!("[{}]", parts.join(", "))
        };
        let rows: Vec<String> = self.rotation.iter().map(|r| fmt_vec(r)).collect();
        write!(
            f,
            "a = {:.6}, b = {}, R = [{}]: P(a, b) = {:.6e} but P(a, Rb) = {:.6e}",
            self.a,
            fmt_vec(&self.b),
            rows.join(", "),
            self.before,
            self.after
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialReport {
    pub radial: bool,
    /// Verdict of the exact reduction.
    pub symbolic: bool,
    /// Verdict of the sampling pass.
    pub sampled: bool,
    pub seed: u64,
    pub witness: Option<RotationWitness>,
}

pub fn is_radial(spec: &NonlinearSpec) -> bool {
    classify_radial(spec).radial
}

pub fn classify_radial(spec: &NonlinearSpec) -> RadialReport {
    let symbolic = symbolic_radial(spec);
    let witness = sampled_witness(spec, RADIAL_SEED);
    RadialReport {
        radial: symbolic && witness.is_none(),
        symbolic,
        sampled: witness.is_none(),
        seed: RADIAL_SEED,
        witness,
    }
}

fn factorial(m: u32) -> f64 {
    (1..=m).map(f64::from).product()
}

/// Exact check that, for every power of `a`, the spatial part is a
/// multiple of `|b|^d` (and vanishes for odd `d`): these are the only
/// rotation-invariant homogeneous polynomials in `b`.
pub fn symbolic_radial(spec: &NonlinearSpec) -> bool {
    let n = spec.n();
    let scale = spec.terms().iter().map(|t| t.coeff.abs()).fold(0.0, f64::max);
    let tol = 1e-12 * scale.max(f64::MIN_POSITIVE);
    let mut groups: BTreeMap<u32, Vec<(&[u32], f64)>> = BTreeMap::new();
    for t in spec.terms() {
        groups.entry(t.alpha[0]).or_default().push((&t.alpha[1..], t.coeff));
    }
    for (a_pow, terms) in groups {
        let d = spec.k() - a_pow;
        if terms.iter().any(|(b, _)| b.iter().any(|e| e % 2 == 1)) {
            return false;
        }
        let half = d / 2;
        let mut lead = vec![0u32; n];
        lead[0] = d;
        let c = terms
            .iter()
            .find(|(b, _)| *b == lead.as_slice())
            .map(|(_, c)| *c)
            .unwrap_or(0.0);
        // coefficient of Π b_i^{2β_i} in c·(Σ b_i²)^{d/2}
        for (b, coeff) in &terms {
            let expected = c * factorial(half) / b.iter().map(|e| factorial(e / 2)).product::<f64>();
            if (coeff - expected).abs() > tol {
                return false;
            }
        }
        if c != 0.0 && terms.len() != compositions(half, n) {
            return false;
        }
    }
    true
}

/// Number of ways to write `m` as an ordered sum of `parts` nonnegative integers.
fn compositions(m: u32, parts: usize) -> usize {
    // C(m + parts − 1, parts − 1)
    let (top, r) = (m as u64 + parts as u64 - 1, parts as u64 - 1);
    let mut acc = 1u64;
    for i in 0..r {
        acc = acc * (top - i) / (i + 1);
    }
    acc as usize
}

/// Random rotation in SO(n) as a product of Givens rotations in every
/// coordinate plane, applied twice with fresh angles.
fn random_rotation(n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut r: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    if n == 1 {
        r[0][0] = -1.0;
        return r;
    }
    for _ in 0..2 {
        for i in 0..n {
            for j in i + 1..n {
                let theta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                let (s, c) = theta.sin_cos();
                for row in r.iter_mut() {
                    let (x, y) = (row[i], row[j]);
                    row[i] = c * x - s * y;
                    row[j] = s * x + c * y;
                }
            }
        }
    }
    r
}

fn apply(r: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    r.iter().map(|row| row.iter().zip(b).map(|(x, y)| x * y).sum()).collect()
}

/// Looks for a violation of `P(a, Rb) = P(a, b)` beyond [`RADIAL_TOL`]
/// relative; `None` means none was found.
pub fn sampled_witness(spec: &NonlinearSpec, seed: u64) -> Option<RotationWitness> {
    let n = spec.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rotations: Vec<Vec<Vec<f64>>> = (0..RADIAL_ROTATIONS).map(|_| random_rotation(n, &mut rng)).collect();
    for _ in 0..RADIAL_VECTORS {
        let a: f64 = rng.gen_range(-1.0..1.0);
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let before = spec.evaluate(a, &b);
        for r in &rotations {
            let rb = apply(r, &b);
            let after = spec.evaluate(a, &rb);
            let scale = spec.magnitude(a, &b).max(spec.magnitude(a, &rb));
            if (after - before).abs() > RADIAL_TOL * scale {
                return Some(RotationWitness {
                    a,
                    b: b.clone(),
                    rotation: r.clone(),
                    before,
                    after,
                });
            }
        }
    }
    None
}
