//! Uniform-grid time quadrature and mixed `L^q_t` norms.

use std::fmt;
use std::ops::{Add, Mul};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Result, WaveError};

/// Time-integrability exponent `q ∈ [1, ∞]`.
///
/// Serialized as a number, or the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeExponent {
    Finite(f64),
    Infinite,
}

impl TimeExponent {
    pub fn value(&self) -> f64 {
        match self {
            TimeExponent::Finite(q) => *q,
            TimeExponent::Infinite => f64::INFINITY,
        }
    }
}

impl fmt::Display for TimeExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeExponent::Finite(q) => write!(f, "{q}"),
            TimeExponent::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for TimeExponent {
    type Err = WaveError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(TimeExponent::Infinite),
            other => other
                .parse::<f64>()
                .map(TimeExponent::Finite)
                .map_err(|_| WaveError::invalid(format!("bad time exponent {other:?}"))),
        }
    }
}

impl Serialize for TimeExponent {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            TimeExponent::Finite(q) => ser.serialize_f64(*q),
            TimeExponent::Infinite => ser.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for TimeExponent {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(de)? {
            Raw::Num(q) => Ok(TimeExponent::Finite(q)),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Step of a uniform grid starting at zero; errors on anything else.
pub fn uniform_step(times: &[f64]) -> Result<f64> {
    if times.len() < 2 {
        return Err(WaveError::invalid("need at least two sample times"));
    }
    if times[0] != 0.0 {
        return Err(WaveError::invalid("sample times must start at 0"));
    }
    let h = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    if !(h > 0.0) {
        return Err(WaveError::invalid("sample times must be strictly increasing"));
    }
    for (i, t) in times.iter().enumerate() {
        if (t - i as f64 * h).abs() > 1e-9 * h.max(t.abs()) {
            return Err(WaveError::invalid("sample times are not uniform"));
        }
    }
    Ok(h)
}

/// `∫₀^{t_j} f` for every grid index `j`, fourth order throughout: Simpson
/// on even counts, Simpson plus a closing 3/8 panel on odd counts, and the
/// three-point rule `h(5f₀ + 8f₁ − f₂)/12` on the first interval.
pub fn cumulative<T>(values: &[T], h: f64) -> Vec<T>
where
    T: Copy + Default + Add<Output = T> + Mul<f64, Output = T>,
{
    let n = values.len();
    let mut out = vec![T::default(); n];
    if n < 2 {
        return out;
    }
    let f = values;
    out[1] = if n >= 3 {
        (f[0] * 5.0 + f[1] * 8.0 + f[2] * -1.0) * (h / 12.0)
    } else {
        (f[0] + f[1]) * (h / 2.0)
    };
    for j in 2..n {
        out[j] = if j % 2 == 0 {
            out[j - 2] + (f[j - 2] + f[j - 1] * 4.0 + f[j]) * (h / 3.0)
        } else {
            out[j - 3] + (f[j - 3] + f[j - 2] * 3.0 + f[j - 1] * 3.0 + f[j]) * (3.0 * h / 8.0)
        };
    }
    out
}

/// `∫₀ᵀ f` on a uniform grid.
pub fn integrate<T>(values: &[T], h: f64) -> T
where
    T: Copy + Default + Add<Output = T> + Mul<f64, Output = T>,
{
    cumulative(values, h).last().copied().unwrap_or_default()
}

/// `(∫₀ᵀ g(t)^q dt)^{1/q}` from uniform samples; `q = ∞` gives the max.
pub fn mixed_time_norm(values: &[f64], h: f64, q: TimeExponent) -> Result<f64> {
    match q {
        TimeExponent::Infinite => Ok(values.iter().copied().fold(0.0, f64::max)),
        TimeExponent::Finite(q) if q >= 1.0 => {
            let powered: Vec<f64> = values.iter().map(|g| g.abs().powf(q)).collect();
            Ok(integrate(&powered, h).max(0.0).powf(1.0 / q))
        }
        TimeExponent::Finite(q) => Err(WaveError::invalid(format!("time exponent must be >= 1, got {q}"))),
    }
}
