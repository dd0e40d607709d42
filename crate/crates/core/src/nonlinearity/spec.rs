use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Result, WaveError};

/// One monomial `c_α (∂u)^α` with `α` over `(∂_t, ∂_1, …, ∂_n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearTerm {
    pub alpha: Vec<u32>,
    pub coeff: f64,
}

impl NonlinearTerm {
    pub fn degree(&self) -> u32 {
        self.alpha.iter().sum()
    }
}

/// `N(u) = Σ_{|α|=k} c_α (∂u)^α` in `n` space dimensions.
///
/// Terms are kept sorted by multi-index with duplicates merged and zero
/// coefficients dropped, so equal polynomials compare equal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct NonlinearSpec {
    k: u32,
    n: usize,
    terms: Vec<NonlinearTerm>,
}

impl NonlinearSpec {
    pub fn new(n: usize, k: u32, terms: Vec<NonlinearTerm>) -> Result<Self> {
        if k < 2 {
            return Err(WaveError::invalid(format!("nonlinearity degree must be >= 2, got {k}")));
        }
        if n == 0 {
            return Err(WaveError::invalid("spatial dimension must be >= 1"));
        }
        let mut merged: Vec<NonlinearTerm> = Vec::with_capacity(terms.len());
        for t in terms {
            if t.alpha.len() != n + 1 {
                return Err(WaveError::invalid(format!(
                    "multi-index {:?} must have length n + 1 = {}",
                    t.alpha,
                    n + 1
                )));
            }
            if t.degree() != k {
                return Err(WaveError::invalid(format!(
                    "multi-index {:?} has degree {}, expected {k}",
                    t.alpha,
                    t.degree()
                )));
            }
            if !t.coeff.is_finite() {
                return Err(WaveError::invalid("coefficients must be finite real numbers"));
            }
            match merged.iter_mut().find(|m| m.alpha == t.alpha) {
                Some(m) => m.coeff += t.coeff,
                None => merged.push(t),
            }
        }
        merged.retain(|t| t.coeff != 0.0);
        merged.sort_by(|a, b| b.alpha.cmp(&a.alpha));
        Ok(Self { k, n, terms: merged })
    }

    /// `N ≡ 0` of nominal degree `k`.
    pub fn zero(n: usize, k: u32) -> Result<Self> {
        Self::new(n, k, Vec::new())
    }

    /// `c (∂_t u)^k`.
    pub fn time_power(n: usize, k: u32, c: f64) -> Result<Self> {
        let mut alpha = vec![0; n + 1];
        alpha[0] = k;
        Self::new(n, k, vec![NonlinearTerm { alpha, coeff: c }])
    }

    /// `c₁ (∂_t u)² + c₂ |∇u|²`.
    pub fn radial_quadratic(n: usize, c1: f64, c2: f64) -> Result<Self> {
        let mut terms = vec![NonlinearTerm {
            alpha: {
                let mut a = vec![0; n + 1];
                a[0] = 2;
                a
            },
            coeff: c1,
        }];
        for i in 1..=n {
            let mut a = vec![0; n + 1];
            a[i] = 2;
            terms.push(NonlinearTerm { alpha: a, coeff: c2 });
        }
        Self::new(n, 2, terms)
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[NonlinearTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Evaluates the polynomial at `a = ∂_t u`, `b = ∇u`.
    pub fn evaluate(&self, a: f64, b: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                t.coeff
                    * a.powi(t.alpha[0] as i32)
                    * b.iter().zip(&t.alpha[1..]).map(|(x, &e)| x.powi(e as i32)).product::<f64>()
            })
            .sum()
    }

    /// `Σ |c_α| |a|^{α₀} Π|b_i|^{α_i}`, a scale for relative comparisons.
    pub fn magnitude(&self, a: f64, b: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                t.coeff.abs()
                    * a.abs().powi(t.alpha[0] as i32)
                    * b.iter()
                        .zip(&t.alpha[1..])
                        .map(|(x, &e)| x.abs().powi(e as i32))
                        .product::<f64>()
            })
            .sum()
    }

    /// Which of the `n + 1` derivative components appear in some term.
    pub fn used_components(&self) -> Vec<bool> {
        (0..=self.n)
            .map(|i| self.terms.iter().any(|t| t.alpha[i] > 0))
            .collect()
    }
}

/// Text format:
///
/// ```text
/// # comment
/// k = 3
/// n = 2
/// alpha = (3, 0, 0), coeff = 1.0
/// ```
impl FromStr for NonlinearSpec {
    type Err = WaveError;

    fn from_str(text: &str) -> Result<Self> {
        let mut k: Option<u32> = None;
        let mut n: Option<usize> = None;
        let mut terms = Vec::new();
        let mut term_lines = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let content = raw.split('#').next().unwrap_or("");
            let indent = content.len() - content.trim_start().len();
            let line = content.trim();
            if line.is_empty() {
                continue;
            }
            let err = |col: usize, msg: String| WaveError::Parse {
                line: line_no,
                column: indent + col + 1,
                message: msg,
            };
            if line.starts_with("alpha") {
                let (alpha, coeff) = parse_term(line).map_err(|(c, m)| err(c, m))?;
                term_lines.push(line_no);
                terms.push(NonlinearTerm { alpha, coeff });
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(err(0, format!("expected `key = value`, found {line:?}")));
            };
            let vcol = key.len() + 1 + (value.len() - value.trim_start().len());
            let value = value.trim();
            match key.trim() {
                "k" => {
                    k = Some(value.parse().map_err(|_| err(vcol, format!("bad degree {value:?}")))?);
                }
                "n" => {
                    n = Some(value.parse().map_err(|_| err(vcol, format!("bad dimension {value:?}")))?);
                }
                other => return Err(err(0, format!("unknown key {other:?}"))),
            }
        }
        let last = text.lines().count().max(1);
        let missing = |what: &str| WaveError::Parse {
            line: last,
            column: 1,
            message: format!("missing `{what} = …` line"),
        };
        let k = k.ok_or_else(|| missing("k"))?;
        let n = n.ok_or_else(|| missing("n"))?;
        // re-run validation per term so the error points at its line
        for (t, &line) in terms.iter().zip(&term_lines) {
            NonlinearSpec::new(n, k, vec![t.clone()]).map_err(|e| WaveError::Parse {
                line,
                column: 1,
                message: e.to_string(),
            })?;
        }
        NonlinearSpec::new(n, k, terms)
    }
}

fn parse_term(line: &str) -> std::result::Result<(Vec<u32>, f64), (usize, String)> {
    let open = line.find('(').ok_or((0, "expected `alpha = (…)`".to_string()))?;
    let head = &line[..open];
    if head.trim() != "alpha =" && head.replace(' ', "") != "alpha=" {
        return Err((0, "expected `alpha = (…)`".into()));
    }
    let close = line[open..]
        .find(')')
        .map(|c| c + open)
        .ok_or((open, "unclosed multi-index".to_string()))?;
    let alpha = line[open + 1..close]
        .split(',')
        .map(|p| p.trim().parse::<u32>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|_| (open + 1, "multi-index entries must be nonnegative integers".to_string()))?;
    let rest = &line[close + 1..];
    let rest_trim = rest.trim_start();
    let Some(after_comma) = rest_trim.strip_prefix(',') else {
        return Err((close + 1, "expected `, coeff = …` after the multi-index".into()));
    };
    let Some((key, value)) = after_comma.split_once('=') else {
        return Err((close + 1, "expected `coeff = …`".into()));
    };
    if key.trim() != "coeff" {
        return Err((close + 1, format!("expected `coeff`, found {:?}", key.trim())));
    }
    let vcol = line.len() - value.trim_start().len();
    let coeff = value
        .trim()
        .parse::<f64>()
        .map_err(|_| (vcol, format!("bad coefficient {:?}", value.trim())))?;
    Ok((alpha, coeff))
}

impl fmt::Display for NonlinearSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "k = {}", self.k)?;
        writeln!(f, "n = {}", self.n)?;
        for t in &self.terms {
            let idx: Vec<String> = t.alpha.iter().map(|a| a.to_string()).collect();
            writeln!(f, "alpha = ({}), coeff = {:?}", idx.join(", "), t.coeff)?;
        }
        Ok(())
    }
}

impl TryFrom<String> for NonlinearSpec {
    type Error = WaveError;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<NonlinearSpec> for String {
    fn from(s: NonlinearSpec) -> String {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merges_and_validates_terms() {
        let t = |a: Vec<u32>, c| NonlinearTerm { alpha: a, coeff: c };
        let s = NonlinearSpec::new(1, 2, vec![t(vec![2, 0], 1.0), t(vec![2, 0], 2.0), t(vec![0, 2], 0.0)]).unwrap();
        assert_eq!(s.terms().len(), 1);
        assert_eq!(s.terms()[0].coeff, 3.0);
        assert!(NonlinearSpec::new(1, 2, vec![t(vec![1, 0], 1.0)]).is_err());
        assert!(NonlinearSpec::new(1, 2, vec![t(vec![2, 0, 0], 1.0)]).is_err());
        assert!(NonlinearSpec::new(1, 1, vec![]).is_err());
        assert!(NonlinearSpec::new(1, 2, vec![t(vec![2, 0], f64::NAN)]).is_err());
    }

    #[test]
    fn parses_text_format() {
        let text = "# cubic\nk = 3\nn = 2\nalpha = (3, 0, 0), coeff = 1.5\nalpha=(1,2,0),coeff=-2e-1  # mixed\n";
        let s: NonlinearSpec = text.parse().unwrap();
        assert_eq!(s.k(), 3);
        assert_eq!(s.n(), 2);
        assert_eq!(s.terms().len(), 2);
        assert_eq!(s.to_string().parse::<NonlinearSpec>().unwrap(), s);
        assert_eq!(s.evaluate(2.0, &[1.0, 5.0]), 1.5 * 8.0 - 0.2 * 2.0);
    }

    #[test]
    fn parse_errors_carry_positions() {
        let e = "k = 3\nn = 1\nalpha = (3, 1), coeff = 1\n".parse::<NonlinearSpec>().unwrap_err();
        assert!(matches!(e, WaveError::Parse { line: 3, .. }), "{e}");
        let e = "k = 3\nn = 1\nalpha = (3, 0), coeff = x\n".parse::<NonlinearSpec>().unwrap_err();
        assert!(matches!(e, WaveError::Parse { line: 3, column: 25, .. }), "{e}");
        let e = "k = 3\n  m = 1\n".parse::<NonlinearSpec>().unwrap_err();
        assert!(matches!(e, WaveError::Parse { line: 2, column: 3, .. }), "{e}");
        let e = "k = 3\n".parse::<NonlinearSpec>().unwrap_err();
        assert!(matches!(e, WaveError::Parse { .. }), "{e}");
    }
}
