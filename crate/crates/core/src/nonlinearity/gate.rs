//! Scaling index and the regularity conditions under which the small-data
//! existence results apply.

use serde::{Deserialize, Serialize};

use crate::error::{Result, WaveError};
use crate::quadrature::TimeExponent;

/// `s_c = (n+2)/2 − 1/(k−1)`.
pub fn scaling_index(n: usize, k: u32) -> Result<f64> {
    if k < 2 {
        return Err(WaveError::invalid(format!("degree must be >= 2, got {k}")));
    }
    if n == 0 {
        return Err(WaveError::invalid("dimension must be >= 1"));
    }
    Ok((n as f64 + 2.0) / 2.0 - 1.0 / (k as f64 - 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateCase {
    /// `k−1 = max(4/(n−1), 2)`, `n ≠ 3`: needs `s > s_c`.
    Strict,
    /// `k−1 > max(4/(n−1), 2)`: `s ≥ s_c` suffices.
    Weak,
    /// `n = k = 3`: almost global existence for `s > 2`.
    AlmostGlobal33,
    /// Radial equation and data, `n ≥ 2`, `k > max((n+1)/(n−1), 2)`: `s ≥ s_c`.
    RadialGlobal,
    /// No existence result covers `(n, k)`.
    Inadmissible,
}

impl GateCase {
    pub fn as_str(&self) -> &'static str {
        match self {
            GateCase::Strict => "strict",
            GateCase::Weak => "weak",
            GateCase::AlmostGlobal33 => "almost_global_3_3",
            GateCase::RadialGlobal => "radial_global",
            GateCase::Inadmissible => "inadmissible",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityVerdict {
    pub s_c: f64,
    pub case: GateCase,
    /// Time exponent `k − 1` of the Strichartz step.
    pub q: u32,
    /// Whether `s` meets the case's regularity requirement.
    pub admitted: bool,
}

impl std::fmt::Display for AdmissibilityVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "case={} s_c={} q={} admitted={}",
            self.case.as_str(),
            self.s_c,
            self.q,
            self.admitted
        )
    }
}

/// Compares `q` with `max(4/(n−1), 2)` exactly in integers.
fn compare_with_threshold(n: usize, q: u32) -> std::cmp::Ordering {
    use std::cmp::Ordering::*;
    if n == 1 {
        return Less;
    }
    // 4/(n−1) vs 2: the first wins for n ≤ 3
    let (num, den) = if n <= 3 { (4u64, (n - 1) as u64) } else { (2, 1) };
    (q as u64 * den).cmp(&num)
}

/// Classifies `(n, k, s)` and whether the data are radial; `s` equal to
/// the scaling index counts as `s = s_c`.
pub fn regularity_gate(n: usize, k: u32, s: f64, radial: bool) -> AdmissibilityVerdict {
    let k_eff = k.max(2);
    let s_c = scaling_index(n.max(1), k_eff).expect("clamped arguments");
    let q = k_eff - 1;
    let radial_ok = radial && n >= 2 && k as u64 * (n as u64 - 1) > n as u64 + 1 && k > 2;
    let (case, admitted) = if k < 2 || n == 0 {
        (GateCase::Inadmissible, false)
    } else if radial_ok {
        (GateCase::RadialGlobal, s >= s_c)
    } else if n == 3 && k == 3 {
        (GateCase::AlmostGlobal33, s > 2.0)
    } else {
        match compare_with_threshold(n, q) {
            std::cmp::Ordering::Greater => (GateCase::Weak, s >= s_c),
            std::cmp::Ordering::Equal => (GateCase::Strict, s > s_c),
            std::cmp::Ordering::Less => (GateCase::Inadmissible, false),
        }
    };
    AdmissibilityVerdict {
        s_c,
        case,
        q,
        admitted,
    }
}

/// Which linear space-time estimate covers `(n, q, s)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrichartzRange {
    Standard,
    /// `(q, n) = (2, 3)`, `s > 2`, with the logarithmic loss in `T`.
    Endpoint,
    Radial,
    Outside,
}

const EXP_TOL: f64 = 1e-12;

/// Strichartz admissibility of the exponent `q` at regularity `s`:
/// `q > max(4/(n−1), 2)` with `s ≥ (n+2)/2 − 1/q`, or equality in `q` with
/// strict inequality in `s`; the `(2, 3)` endpoint for `s > 2`; and for
/// radial data `q > 2/(n−1)`, `q ≥ 2`, `s ≥ (n+2)/2 − 1/q`.
pub fn strichartz_range(n: usize, q: TimeExponent, s: f64, radial: bool) -> StrichartzRange {
    let TimeExponent::Finite(q) = q else {
        return StrichartzRange::Outside;
    };
    if n < 2 || !(q >= 2.0) {
        return StrichartzRange::Outside;
    }
    let nf = n as f64;
    let s_q = (nf + 2.0) / 2.0 - 1.0 / q;
    let threshold = (4.0 / (nf - 1.0)).max(2.0);
    if n == 3 && (q - 2.0).abs() < EXP_TOL {
        if s > 2.0 {
            return StrichartzRange::Endpoint;
        }
    } else if q > threshold + EXP_TOL {
        if s >= s_q - EXP_TOL {
            return StrichartzRange::Standard;
        }
    } else if (q - threshold).abs() <= EXP_TOL && s > s_q + EXP_TOL {
        return StrichartzRange::Standard;
    }
    if radial && q > 2.0 / (nf - 1.0) + EXP_TOL && s >= s_q - EXP_TOL {
        return StrichartzRange::Radial;
    }
    StrichartzRange::Outside
}
