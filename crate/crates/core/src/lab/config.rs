//! Experiment configuration: TOML schema, validation and hashing.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::data::DataProfile;
use crate::error::{Result, WaveError};
use crate::nonlinearity::{scaling_index, NonlinearSpec};
use crate::picard::{PicardMode, DEFAULT_M_MAX};
use crate::quadrature::TimeExponent;
use crate::spectral::GridSpec;
use crate::timestepper::DEFAULT_BLOWUP_THRESHOLD;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    PicardContraction,
    LifespanSweep,
    StrichartzEnsemble,
    RadialCompare,
    IllposednessProbe,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 5] = [
        ExperimentKind::PicardContraction,
        ExperimentKind::LifespanSweep,
        ExperimentKind::StrichartzEnsemble,
        ExperimentKind::RadialCompare,
        ExperimentKind::IllposednessProbe,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::PicardContraction => "picard_contraction",
            ExperimentKind::LifespanSweep => "lifespan_sweep",
            ExperimentKind::StrichartzEnsemble => "strichartz_ensemble",
            ExperimentKind::RadialCompare => "radial_compare",
            ExperimentKind::IllposednessProbe => "illposedness_probe",
        }
    }

    fn section(&self) -> &'static str {
        match self {
            ExperimentKind::PicardContraction => "picard",
            ExperimentKind::LifespanSweep => "lifespan",
            ExperimentKind::StrichartzEnsemble => "strichartz",
            ExperimentKind::RadialCompare => "radial",
            ExperimentKind::IllposednessProbe => "illposedness",
        }
    }
}

impl std::str::FromStr for ExperimentKind {
    type Err = WaveError;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.replace('-', "_");
        ExperimentKind::ALL
            .into_iter()
            .find(|k| k.as_str() == norm)
            .ok_or_else(|| WaveError::Config(format!("unknown experiment {s:?}")))
    }
}

fn default_m_max() -> usize {
    DEFAULT_M_MAX
}

fn default_tol() -> f64 {
    1e-10
}

fn default_bisections() -> usize {
    12
}

fn default_threshold() -> f64 {
    DEFAULT_BLOWUP_THRESHOLD
}

fn default_growth_bound() -> f64 {
    2.0
}

fn default_endpoint_horizons() -> Vec<f64> {
    vec![2.0, 4.0, 8.0]
}

fn default_one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdParams {
    pub lo: f64,
    pub hi: f64,
    #[serde(default = "default_bisections")]
    pub bisections: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PicardParams {
    pub s: f64,
    pub eps: Vec<f64>,
    #[serde(rename = "T")]
    pub t: f64,
    pub steps: usize,
    /// Defaults to `k − 1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<TimeExponent>,
    #[serde(default = "default_m_max")]
    pub m_max: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub mode: PicardMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<ThresholdParams>,
    /// Compare each converged run with the time-stepper.
    #[serde(default)]
    pub oracle: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LifespanParams {
    pub s: f64,
    pub eps: Vec<f64>,
    pub dt: f64,
    pub t_max: f64,
    #[serde(default = "default_threshold")]
    pub blowup_threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrichartzParams {
    pub s: f64,
    pub q: TimeExponent,
    #[serde(rename = "T")]
    pub t: f64,
    /// Time intervals on `[0, T]` (even).
    pub intervals: usize,
    /// Ensemble size; member `i` uses seed `profile.seed + seed + i`.
    pub members: usize,
    /// Horizons of the endpoint table, used when `(q, n) = (2, 3)`.
    #[serde(default = "default_endpoint_horizons")]
    pub endpoint_horizons: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadialParams {
    /// Defaults to the scaling index.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    pub eps: Vec<f64>,
    pub dt: f64,
    pub t_max: f64,
    /// Allowed `max_t sup|∂u| / sup|∂u(0)|`.
    #[serde(default = "default_growth_bound")]
    pub growth_bound: f64,
    /// Keep every n-th step of the norm histories.
    #[serde(default = "default_one")]
    pub history_every: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IllposednessParams {
    pub s: Vec<f64>,
    pub j: Vec<u32>,
    pub dt: f64,
    pub t_max: f64,
    /// Level `j` has data size `2^{−j·norm_exponent}`; defaults to `1/(k−1)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm_exponent: Option<f64>,
    #[serde(default = "default_threshold")]
    pub blowup_threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    /// Run even where the admissibility gate refuses; stamped into output.
    #[serde(default)]
    pub override_gate: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    /// In the nonlinearity text grammar.
    pub nonlinearity: NonlinearSpec,
    pub grid: GridSpec,
    pub profile: DataProfile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub picard: Option<PicardParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lifespan: Option<LifespanParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strichartz: Option<StrichartzParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radial: Option<RadialParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub illposedness: Option<IllposednessParams>,
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

fn bad(msg: impl Into<String>) -> WaveError {
    WaveError::Config(msg.into())
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(bad(format!("{name} must be positive, got {x}")))
    }
}

fn non_empty<T>(name: &str, v: &[T]) -> Result<()> {
    if v.is_empty() {
        Err(bad(format!("{name} must not be empty")))
    } else {
        Ok(())
    }
}

impl ExperimentConfig {
    /// Parses and validates; syntax errors carry line and column.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| {
            let (line, column) = e.span().map_or((0, 0), |s| line_col(text, s.start));
            WaveError::Parse {
                line,
                column,
                message: e.message().to_string(),
            }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }

    /// SHA-256 of the canonical serialization.
    pub fn hash(&self) -> String {
        format!("{:x}", Sha256::digest(self.to_toml().as_bytes()))
    }

    pub fn s_c(&self) -> f64 {
        scaling_index(self.grid.n(), self.nonlinearity.k()).expect("validated spec")
    }

    /// Checks cross-field constraints.
    pub fn validate(&self) -> Result<()> {
        let n = self.grid.n();
        if self.nonlinearity.n() != n {
            return Err(bad(format!(
                "nonlinearity is for n = {} but the grid has n = {n}",
                self.nonlinearity.n()
            )));
        }
        self.profile
            .validate(&self.grid)
            .map_err(|e| bad(format!("profile: {e}")))?;
        let present = [
            self.picard.is_some(),
            self.lifespan.is_some(),
            self.strichartz.is_some(),
            self.radial.is_some(),
            self.illposedness.is_some(),
        ];
        let want = ExperimentKind::ALL
            .iter()
            .position(|k| *k == self.experiment)
            .expect("listed");
        if !present[want] {
            return Err(bad(format!(
                "experiment {} needs a [{}] section",
                self.experiment.as_str(),
                self.experiment.section()
            )));
        }
        for (i, p) in present.iter().enumerate() {
            if *p && i != want {
                return Err(bad(format!(
                    "section [{}] does not belong to experiment {}",
                    ExperimentKind::ALL[i].section(),
                    self.experiment.as_str()
                )));
            }
        }
        let eps_ok = |name: &str, eps: &[f64]| -> Result<()> {
            non_empty(name, eps)?;
            match eps.iter().find(|e| !(e.is_finite() && **e >= 0.0)) {
                Some(e) => Err(bad(format!("{name} entries must be >= 0, got {e}"))),
                None => Ok(()),
            }
        };
        if let Some(p) = &self.picard {
            eps_ok("picard.eps", &p.eps)?;
            positive("picard.T", p.t)?;
            positive("picard.tol", p.tol)?;
            if p.steps < 8 || p.steps % 2 != 0 {
                return Err(bad(format!("picard.steps must be even and >= 8, got {}", p.steps)));
            }
            if p.m_max == 0 {
                return Err(bad("picard.m_max must be >= 1"));
            }
            if let Some(TimeExponent::Finite(q)) = p.q {
                if !(q >= 1.0) {
                    return Err(bad(format!("picard.q must be >= 1, got {q}")));
                }
            }
            if let Some(t) = &p.threshold {
                if !(t.lo > 0.0 && t.hi > t.lo) {
                    return Err(bad("picard.threshold needs 0 < lo < hi"));
                }
            }
        }
        if let Some(p) = &self.lifespan {
            eps_ok("lifespan.eps", &p.eps)?;
            positive("lifespan.dt", p.dt)?;
            positive("lifespan.t_max", p.t_max)?;
            positive("lifespan.blowup_threshold", p.blowup_threshold)?;
        }
        if let Some(p) = &self.strichartz {
            positive("strichartz.T", p.t)?;
            if p.intervals < 2 || p.intervals % 2 != 0 {
                return Err(bad("strichartz.intervals must be even and >= 2"));
            }
            if p.members == 0 {
                return Err(bad("strichartz.members must be >= 1"));
            }
            if p.endpoint_horizons.iter().any(|t| !(*t > 0.0)) {
                return Err(bad("strichartz.endpoint_horizons must be positive"));
            }
        }
        if let Some(p) = &self.radial {
            eps_ok("radial.eps", &p.eps)?;
            positive("radial.dt", p.dt)?;
            positive("radial.t_max", p.t_max)?;
            positive("radial.growth_bound", p.growth_bound)?;
            if p.history_every == 0 {
                return Err(bad("radial.history_every must be >= 1"));
            }
        }
        if let Some(p) = &self.illposedness {
            non_empty("illposedness.s", &p.s)?;
            non_empty("illposedness.j", &p.j)?;
            positive("illposedness.dt", p.dt)?;
            positive("illposedness.t_max", p.t_max)?;
            positive("illposedness.blowup_threshold", p.blowup_threshold)?;
            if let Some(e) = p.norm_exponent {
                positive("illposedness.norm_exponent", e)?;
            }
            if p.j.windows(2).any(|w| w[1] <= w[0]) {
                return Err(bad("illposedness.j must be strictly increasing"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
experiment = "picard_contraction"
seed = 7
override_gate = true
nonlinearity = """
k = 5
n = 1
alpha = (5, 0), coeff = 1.0
"""

[grid]
n = 1
points_per_axis = 64
period = 32.0

[profile]
shape = "gaussian"
width = 1.0
slot = "both"

[picard]
s = 1.25
eps = [0.0, 1e-3]
T = 1.0
steps = 16
q = "inf"
"#;

    #[test]
    fn round_trip_is_identity() {
        let a = ExperimentConfig::from_toml_str(SAMPLE).unwrap();
        let b = ExperimentConfig::from_toml_str(&a.to_toml()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.hash(), b.hash());
        assert_eq!(a.picard.as_ref().unwrap().q, Some(TimeExponent::Infinite));
        assert_eq!(a.picard.as_ref().unwrap().m_max, DEFAULT_M_MAX);
    }

    #[test]
    fn syntax_errors_have_positions() {
        let broken = SAMPLE.replace("steps = 16", "steps = sixteen");
        match ExperimentConfig::from_toml_str(&broken) {
            Err(WaveError::Parse { line, column, .. }) => {
                assert_eq!(line, 25);
                assert_eq!(column, 9);
            }
            other => panic!("{other:?}"),
        }
        let unknown = SAMPLE.replace("seed = 7", "sed = 7");
        assert!(matches!(
            ExperimentConfig::from_toml_str(&unknown),
            Err(WaveError::Parse { line: 3, .. })
        ));
        let bad_grid = SAMPLE.replace("points_per_axis = 64", "points_per_axis = 60");
        assert!(ExperimentConfig::from_toml_str(&bad_grid).is_err());
    }

    #[test]
    fn semantic_errors_are_config_errors() {
        let wrong_section = SAMPLE.replace("[picard]", "[lifespan]");
        assert!(matches!(
            ExperimentConfig::from_toml_str(&wrong_section),
            Err(WaveError::Parse { .. } | WaveError::Config(_))
        ));
        let odd = SAMPLE.replace("steps = 16", "steps = 15");
        assert!(matches!(ExperimentConfig::from_toml_str(&odd), Err(WaveError::Config(_))));
        let neg = SAMPLE.replace("[0.0, 1e-3]", "[-1.0]");
        assert!(matches!(ExperimentConfig::from_toml_str(&neg), Err(WaveError::Config(_))));
        let dim = SAMPLE.replace("n = 1\npoints", "n = 2\npoints");
        assert!(matches!(ExperimentConfig::from_toml_str(&dim), Err(WaveError::Config(_))));
    }

    #[test]
    fn kinds_parse_from_cli_names() {
        for k in ExperimentKind::ALL {
            assert_eq!(k.as_str().parse::<ExperimentKind>().unwrap(), k);
            assert_eq!(k.as_str().replace('_', "-").parse::<ExperimentKind>().unwrap(), k);
        }
    }
}
