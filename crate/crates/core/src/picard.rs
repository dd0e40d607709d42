//! Picard iteration `u⁽⁰⁾ = 0`, `□u⁽ᵐ⁺¹⁾ = N(∂u⁽ᵐ⁾)` with the given data,
//! carried out on full time-grid trajectories with norm bookkeeping.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Result, WaveError};
use crate::lab::report::num;
use crate::linear::{duhamel_trajectory, homogeneous_solution, ForcingHistory};
use crate::nonlinearity::{eval_n, NonlinearSpec};
use crate::par;
use crate::quadrature::{mixed_time_norm, TimeExponent};
use crate::spectral::{gradient_sobolev_norm, gradient_sup_norm, FieldState};
use crate::timestepper::{evolve, EvolveConfig, Outcome};

pub const DEFAULT_M_MAX: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PicardMode {
    #[default]
    Standard,
    /// Also tracks `A_m = ‖∂u⁽ᵐ⁾‖_{L²L^∞} + (ln(1+T))^{1/2}‖∂u⁽ᵐ⁾‖_{L^∞H^{s−1}}`.
    #[serde(rename = "endpoint_3_3")]
    Endpoint33,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PicardConfig {
    /// Final time.
    pub t: f64,
    /// Number of time intervals (even, ≥ 8).
    pub steps: usize,
    pub s: f64,
    pub q: TimeExponent,
    pub m_max: usize,
    pub tol: f64,
    pub mode: PicardMode,
    /// Validity horizon of the data, if known.
    pub horizon: Option<f64>,
}

impl PicardConfig {
    pub fn new(t: f64, steps: usize, s: f64, q: TimeExponent) -> Self {
        Self {
            t,
            steps,
            s,
            q,
            m_max: DEFAULT_M_MAX,
            tol: 1e-10,
            mode: PicardMode::Standard,
            horizon: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t.is_finite() && self.t > 0.0) {
            return Err(WaveError::invalid(format!("T must be positive, got {}", self.t)));
        }
        if self.steps < 8 || self.steps % 2 != 0 {
            return Err(WaveError::invalid(format!("steps must be even and >= 8, got {}", self.steps)));
        }
        if !(self.tol > 0.0) {
            return Err(WaveError::invalid(format!("tol must be positive, got {}", self.tol)));
        }
        if self.m_max == 0 {
            return Err(WaveError::invalid("m_max must be at least 1"));
        }
        if let TimeExponent::Finite(q) = self.q {
            if !(q >= 1.0) {
                return Err(WaveError::invalid(format!("time exponent must be >= 1, got {q}")));
            }
        }
        if let Some(h) = self.horizon {
            if self.t > h {
                return Err(WaveError::BeyondHorizon { t: self.t, horizon: h });
            }
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        self.t / self.steps as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Tolerance,
    MaxIterations,
}

/// The endpoint quantities of one iterate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndpointTerms {
    pub a_m: f64,
    /// `‖∂u⁽ᵐ⁾‖_{L²_t L^∞}`.
    pub l2_linf: f64,
    /// `‖∂u⁽ᵐ⁾‖_{L^∞_t H^{s−1}}`.
    pub linf_h: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub m: usize,
    pub iter_norm: f64,
    pub diff_norm: f64,
    /// `diff_norm_m / diff_norm_{m−1}`, for `m ≥ 2` with a nonzero previous diff.
    pub ratio: Option<f64>,
    pub endpoint: Option<EndpointTerms>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationTrace {
    pub rows: Vec<TraceRow>,
    pub eps: f64,
    pub m_observed: f64,
    pub stop: StopReason,
}

impl IterationTrace {
    pub fn worst_ratio(&self) -> Option<f64> {
        self.rows
            .iter()
            .filter_map(|r| r.ratio)
            .fold(None, |acc, r| Some(acc.map_or(r, |m: f64| m.max(r))))
    }

    pub fn converged(&self) -> bool {
        self.stop == StopReason::Tolerance
    }

    /// True when every ratio is at most `bound`.
    pub fn contracts(&self, bound: f64) -> bool {
        self.rows.iter().filter_map(|r| r.ratio).all(|r| r <= bound)
    }

    /// Rows with `m ≥ 2` breaking `diff_norm_m ≤ 2^{1−m} M_observed eps`.
    pub fn geometric_violations(&self) -> Vec<usize> {
        let scale = self.m_observed * self.eps;
        self.rows
            .iter()
            .filter(|r| r.m >= 2 && r.diff_norm > 2f64.powi(1 - r.m as i32) * scale * (1.0 + 1e-12))
            .map(|r| r.m)
            .collect()
    }

    /// `m,iter_norm,diff_norm,ratio,A_m` with blanks for undefined cells.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["m", "iter_norm", "diff_norm", "ratio", "A_m"])?;
        for r in &self.rows {
            out.write_record([
                r.m.to_string(),
                num(r.iter_norm),
                num(r.diff_norm),
                r.ratio.map(num).unwrap_or_default(),
                r.endpoint.map(|e| num(e.a_m)).unwrap_or_default(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct PicardSolution {
    /// Final iterate at the times `i·T/steps`.
    pub trajectory: Vec<FieldState>,
    pub trace: IterationTrace,
}

/// `(‖∂v‖_{L^∞_t H^{s−1}}, ‖∂v‖_{L^q_t L^∞})` of a trajectory on a uniform grid.
pub fn trajectory_norms(traj: &[FieldState], s: f64, q: TimeExponent, h: f64) -> Result<(f64, f64)> {
    let per: Vec<(f64, f64)> = par::map(traj, |st| (gradient_sobolev_norm(st, s - 1.0), gradient_sup_norm(st)));
    let linf_h = per.iter().map(|p| p.0).fold(0.0, nan_max);
    let sups: Vec<f64> = per.iter().map(|p| p.1).collect();
    let lq = if sups.iter().any(|x| x.is_nan()) {
        f64::NAN
    } else {
        mixed_time_norm(&sups, h, q)?
    };
    Ok((linf_h, lq))
}

/// The iteration norm `‖∂v‖_{L^∞_t H^{s−1}} + ‖∂v‖_{L^q_t L^∞}`.
pub fn iteration_norm(traj: &[FieldState], s: f64, q: TimeExponent, h: f64) -> Result<f64> {
    let (a, b) = trajectory_norms(traj, s, q, h)?;
    Ok(a + b)
}

fn nan_max(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

fn difference(a: &[FieldState], b: &[FieldState]) -> Vec<FieldState> {
    a.iter().zip(b).map(|(x, y)| x.axpy(-1.0, y)).collect()
}

fn endpoint_terms(traj: &[FieldState], cfg: &PicardConfig) -> Result<EndpointTerms> {
    let (linf_h, l2_linf) = trajectory_norms(traj, cfg.s, TimeExponent::Finite(2.0), cfg.dt())?;
    Ok(EndpointTerms {
        a_m: l2_linf + (1.0 + cfg.t).ln().sqrt() * linf_h,
        l2_linf,
        linf_h,
    })
}

/// Runs the iteration until `diff_norm_m ≤ tol·eps` or `m = m_max`.
pub fn picard_solve(data: &FieldState, spec: &NonlinearSpec, cfg: &PicardConfig) -> Result<PicardSolution> {
    cfg.validate()?;
    let g = *data.grid();
    if spec.n() != g.n() {
        return Err(WaveError::DimensionMismatch {
            expected: g.n(),
            found: spec.n(),
        });
    }
    if !data.is_finite() {
        return Err(WaveError::Divergence { iterate: 0 });
    }
    let h = cfg.dt();
    let times: Vec<f64> = (0..=cfg.steps).map(|i| i as f64 * h).collect();
    let free: Vec<FieldState> = par::map(&times, |&t| {
        let mut st = homogeneous_solution(data, t);
        st.time = t;
        st
    });
    let eps = data.data_norm(cfg.s);
    let next_iterate = |prev: &[FieldState], m: usize| -> Result<Vec<FieldState>> {
        let forcing: Vec<_> = par::map(prev, |st| eval_n(st, spec));
        let forcing = forcing.into_iter().collect::<Result<Vec<_>>>()?;
        let duhamel = duhamel_trajectory(&ForcingHistory::new(h, forcing)?);
        let next: Vec<FieldState> = free.iter().zip(&duhamel).map(|(a, b)| a.axpy(1.0, b)).collect();
        if next.iter().any(|st| !st.is_finite()) {
            return Err(WaveError::Divergence { iterate: m });
        }
        Ok(next)
    };

    // u⁽¹⁾ is the free solution since N(0) = 0
    let mut current = next_iterate(&vec![FieldState::zeros(g); cfg.steps + 1], 1)?;
    let mut rows: Vec<TraceRow> = Vec::new();
    let mut stop = StopReason::MaxIterations;
    for m in 1..=cfg.m_max {
        let next = next_iterate(&current, m + 1)?;
        let iter_norm = iteration_norm(&current, cfg.s, cfg.q, h)?;
        let diff_norm = iteration_norm(&difference(&next, &current), cfg.s, cfg.q, h)?;
        if !(iter_norm.is_finite() && diff_norm.is_finite()) {
            return Err(WaveError::Divergence { iterate: m });
        }
        let ratio = match rows.last() {
            Some(prev) if prev.diff_norm > 0.0 => Some(diff_norm / prev.diff_norm),
            _ => None,
        };
        let endpoint = match cfg.mode {
            PicardMode::Standard => None,
            PicardMode::Endpoint33 => Some(endpoint_terms(&current, cfg)?),
        };
        rows.push(TraceRow {
            m,
            iter_norm,
            diff_norm,
            ratio,
            endpoint,
        });
        current = next;
        if diff_norm <= cfg.tol * eps {
            stop = StopReason::Tolerance;
            break;
        }
    }
    let m_observed = if eps > 0.0 {
        rows.iter().map(|r| r.iter_norm).fold(0.0, f64::max) / eps
    } else {
        0.0
    };
    Ok(PicardSolution {
        trajectory: current,
        trace: IterationTrace {
            rows,
            eps,
            m_observed,
            stop,
        },
    })
}

/// Lipschitz ratio `‖∂(u−v)‖ / ‖(u₀−v₀, u₁−v₁)‖_{H^s×H^{s−1}}` between two
/// converged solutions, in the iteration norm.
pub fn continuous_dependence_probe(
    a: &FieldState,
    b: &FieldState,
    spec: &NonlinearSpec,
    cfg: &PicardConfig,
) -> Result<f64> {
    let denom = a.axpy(-1.0, b).data_norm(cfg.s);
    if !(denom > 0.0) {
        return Err(WaveError::Degenerate("data pair is identical".into()));
    }
    let solve = |d: &FieldState| -> Result<Vec<FieldState>> {
        let sol = picard_solve(d, spec, cfg)?;
        if !sol.trace.converged() {
            return Err(WaveError::NotConverged {
                iterations: sol.trace.rows.len(),
            });
        }
        Ok(sol.trajectory)
    };
    let ua = solve(a)?;
    let ub = solve(b)?;
    Ok(iteration_norm(&difference(&ua, &ub), cfg.s, cfg.q, cfg.dt())? / denom)
}

/// Relative `L^∞_t H^{s−1}` distance between the Picard trajectory and an
/// RK4 run on a step dividing the Picard step at least four times.
pub fn timestepper_agreement(
    data: &FieldState,
    spec: &NonlinearSpec,
    cfg: &PicardConfig,
    trajectory: &[FieldState],
) -> Result<f64> {
    let h = cfg.dt();
    let sub = ((h / EvolveConfig::max_dt(data.grid())).ceil() as usize).max(4);
    let ev = evolve(
        data,
        spec,
        &EvolveConfig {
            record_every: sub,
            s: cfg.s,
            ..EvolveConfig::new(h / sub as f64, cfg.t)
        },
    )?;
    if ev.record.outcome == Outcome::Blowup || ev.snapshots.len() != trajectory.len() {
        return Err(WaveError::Divergence { iterate: 0 });
    }
    let diff = difference(trajectory, &ev.snapshots);
    let (num, _) = trajectory_norms(&diff, cfg.s, TimeExponent::Infinite, h)?;
    let (den, _) = trajectory_norms(trajectory, cfg.s, TimeExponent::Infinite, h)?;
    Ok(if den > 0.0 { num / den } else { num })
}

/// A run contracts if it converges with every ratio at most ½.
pub fn contracts(data: &FieldState, spec: &NonlinearSpec, cfg: &PicardConfig) -> bool {
    match picard_solve(data, spec, cfg) {
        Ok(sol) => sol.trace.converged() && sol.trace.contracts(0.5),
        Err(_) => false,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdSearch {
    /// Largest data size seen to contract.
    pub eps0: f64,
    /// Smallest data size seen to fail, if any.
    pub failed_at: Option<f64>,
    pub evaluations: usize,
}

/// Log-space bisection for the contraction threshold in `[lo, hi]`;
/// `family(eps)` builds data of size `eps`.
pub fn find_contraction_threshold<F>(
    family: F,
    spec: &NonlinearSpec,
    cfg: &PicardConfig,
    lo: f64,
    hi: f64,
    bisections: usize,
) -> Result<ThresholdSearch>
where
    F: Fn(f64) -> Result<FieldState>,
{
    if !(lo > 0.0 && hi > lo) {
        return Err(WaveError::invalid(format!("need 0 < lo < hi, got [{lo}, {hi}]")));
    }
    let test = |eps: f64| -> Result<bool> { Ok(contracts(&family(eps)?, spec, cfg)) };
    let mut evaluations = 1;
    if !test(lo)? {
        return Err(WaveError::Degenerate(format!("no contraction even at eps = {lo}")));
    }
    evaluations += 1;
    if test(hi)? {
        return Ok(ThresholdSearch {
            eps0: hi,
            failed_at: None,
            evaluations,
        });
    }
    let (mut good, mut bad) = (lo, hi);
    for _ in 0..bisections {
        let mid = (good * bad).sqrt();
        evaluations += 1;
        if test(mid)? {
            good = mid;
        } else {
            bad = mid;
        }
    }
    Ok(ThresholdSearch {
        eps0: good,
        failed_at: Some(bad),
        evaluations,
    })
}

/// Per-step constants `C_m = A_{m+1} / ((ln(1+T))^{1/2}(eps + l2_m²·linf_m))`
/// of the endpoint induction, from an endpoint-mode trace.
pub fn induction_constants(trace: &IterationTrace, t: f64) -> Vec<f64> {
    let log = (1.0 + t).ln().sqrt();
    trace
        .rows
        .windows(2)
        .filter_map(|w| {
            let (cur, next) = (w[0].endpoint?, w[1].endpoint?);
            let rhs = log * (trace.eps + cur.l2_linf.powi(2) * cur.linf_h);
            (rhs > 0.0).then(|| next.a_m / rhs)
        })
        .collect()
}
