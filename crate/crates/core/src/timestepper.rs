//! Method-of-lines solver: classical RK4 on `(û, ∂_t û)` with the
//! nonlinear term from [`eval_n`], blow-up detection and lifespans.

use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::data::{make_data, DataProfile};
use crate::error::{Result, WaveError};
use crate::nonlinearity::{eval_n, NonlinearSpec};
use crate::spectral::{gradient_sobolev_norm, gradient_sup_norm_with, FieldState, GridSpec, SpectralField};

pub const DEFAULT_BLOWUP_THRESHOLD: f64 = 1e6;
pub const DEFAULT_CFL: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolveConfig {
    pub dt: f64,
    pub t_max: f64,
    pub blowup_threshold: f64,
    /// Keep every `record_every`-th state (plus the last); 0 keeps none.
    pub record_every: usize,
    /// Stop here if it comes before `t_max`.
    pub horizon: Option<f64>,
    /// Bound on `dt · |ξ|_max`.
    pub cfl: f64,
    /// Regularity of the reported `H^{s−1}` norm of `∂u`.
    pub s: f64,
}

impl EvolveConfig {
    pub fn new(dt: f64, t_max: f64) -> Self {
        Self {
            dt,
            t_max,
            blowup_threshold: DEFAULT_BLOWUP_THRESHOLD,
            record_every: 0,
            horizon: None,
            cfl: DEFAULT_CFL,
            s: 1.0,
        }
    }

    pub fn validate(&self, grid: &GridSpec) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(WaveError::invalid(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_max.is_finite() && self.t_max > 0.0) {
            return Err(WaveError::invalid(format!("t_max must be positive, got {}", self.t_max)));
        }
        if !(self.blowup_threshold > 0.0) {
            return Err(WaveError::invalid("blow-up threshold must be positive"));
        }
        if let Some(h) = self.horizon {
            if !(h > 0.0) {
                return Err(WaveError::invalid(format!("horizon must be positive, got {h}")));
            }
        }
        let limit = self.cfl / grid.max_frequency();
        if self.dt > limit {
            return Err(WaveError::Cfl { dt: self.dt, limit });
        }
        Ok(())
    }

    /// Largest step allowed by the CFL bound on `grid`.
    pub fn max_dt(grid: &GridSpec) -> f64 {
        DEFAULT_CFL / grid.max_frequency()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Blowup,
    SurvivedToTmax,
    HitHorizon,
}

impl Outcome {
    pub fn as_str(&self) -> &'static str {
        match self {
            Outcome::Blowup => "blowup",
            Outcome::SurvivedToTmax => "survived_to_tmax",
            Outcome::HitHorizon => "hit_horizon",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LifespanRecord {
    pub eps: f64,
    pub t_star: f64,
    pub outcome: Outcome,
    /// `‖∂u‖_{H^{s−1}}` at the last state.
    pub final_h_norm: f64,
    /// `sup |∂u|` at the last state.
    pub final_sup: f64,
}

/// Per-step norms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostic {
    pub time: f64,
    pub h_norm: f64,
    pub sup: f64,
}

#[derive(Debug, Clone)]
pub struct Evolution {
    pub snapshots: Vec<FieldState>,
    pub history: Vec<Diagnostic>,
    pub record: LifespanRecord,
}

struct Rhs<'a> {
    spec: &'a NonlinearSpec,
    xi2: Vec<f64>,
}

impl Rhs<'_> {
    /// `(∂_t û, −|ξ|²û + N̂)`; non-finite input yields non-finite output.
    fn eval(&self, st: &FieldState) -> FieldState {
        let g = *st.grid();
        let forcing = eval_n(st, self.spec).expect("grid checked");
        let acc: Vec<Complex64> = st
            .u
            .coeffs()
            .iter()
            .zip(forcing.coeffs())
            .zip(&self.xi2)
            .map(|((u, f), x)| f - u * x)
            .collect();
        FieldState {
            time: st.time,
            u: st.ut.clone(),
            ut: SpectralField::from_coeffs(g, acc).expect("grid"),
        }
    }

    fn step(&self, st: &FieldState, h: f64) -> FieldState {
        let k1 = self.eval(st);
        let k2 = self.eval(&st.axpy(h / 2.0, &k1));
        let k3 = self.eval(&st.axpy(h / 2.0, &k2));
        let k4 = self.eval(&st.axpy(h, &k3));
        let mut next = st
            .axpy(h / 6.0, &k1)
            .axpy(h / 3.0, &k2)
            .axpy(h / 3.0, &k3)
            .axpy(h / 6.0, &k4);
        next.time = st.time + h;
        next
    }
}

/// Integrates `□u = N(∂u)` from `state` until blow-up, the horizon or
/// `t_max`. Non-finite values count as blow-up.
pub fn evolve(state: &FieldState, spec: &NonlinearSpec, cfg: &EvolveConfig) -> Result<Evolution> {
    let g = *state.grid();
    cfg.validate(&g)?;
    if spec.n() != g.n() {
        return Err(WaveError::DimensionMismatch {
            expected: g.n(),
            found: spec.n(),
        });
    }
    let rhs = Rhs {
        spec,
        xi2: g.xi_squared(),
    };
    let t0 = state.time;
    let horizon = cfg.horizon.unwrap_or(f64::INFINITY);
    let end = cfg.t_max.min(horizon);
    let blown = |d: &Diagnostic| !(d.sup.is_finite() && d.h_norm.is_finite()) || d.sup >= cfg.blowup_threshold;
    let diag = |st: &FieldState| Diagnostic {
        time: st.time - t0,
        h_norm: gradient_sobolev_norm(st, cfg.s - 1.0),
        sup: gradient_sup_norm_with(st, 1),
    };

    let mut current = state.clone();
    let mut history = vec![diag(&current)];
    let mut snapshots = Vec::new();
    if cfg.record_every > 0 {
        snapshots.push(current.clone());
    }
    let record = |eps: f64, t_star: f64, outcome, d: &Diagnostic| LifespanRecord {
        eps,
        t_star,
        outcome,
        final_h_norm: d.h_norm,
        final_sup: d.sup,
    };
    let eps = state.data_norm(cfg.s);
    if blown(&history[0]) {
        let d = history[0];
        return Ok(Evolution {
            snapshots,
            history,
            record: record(eps, 0.0, Outcome::Blowup, &d),
        });
    }
    let mut k = 0usize;
    loop {
        let t = k as f64 * cfg.dt;
        if t >= end * (1.0 - 1e-12) {
            let outcome = if horizon < cfg.t_max {
                Outcome::HitHorizon
            } else {
                Outcome::SurvivedToTmax
            };
            if cfg.record_every > 0 && k % cfg.record_every != 0 {
                snapshots.push(current.clone());
            }
            let d = *history.last().expect("non-empty");
            return Ok(Evolution {
                snapshots,
                history,
                record: record(eps, end, outcome, &d),
            });
        }
        let h = cfg.dt.min(end - t);
        let mut next = rhs.step(&current, h);
        next.time = t0 + t + h;
        let d = diag(&next);
        if blown(&d) {
            let half = rhs.step(&current, h / 2.0);
            let t_star = if blown(&diag(&half)) { t + h / 4.0 } else { t + 0.75 * h };
            history.push(d);
            if cfg.record_every > 0 {
                snapshots.push(next);
            }
            return Ok(Evolution {
                snapshots,
                history,
                record: record(eps, t_star, Outcome::Blowup, &d),
            });
        }
        history.push(d);
        current = next;
        k += 1;
        if cfg.record_every > 0 && k % cfg.record_every == 0 {
            snapshots.push(current.clone());
        }
    }
}

/// Time before a unit-speed disturbance from a centered support of radius
/// `support_radius` wraps around the box.
pub fn validity_horizon(grid: &GridSpec, support_radius: f64) -> Result<f64> {
    let limit = grid.period() / 2.0;
    if !(support_radius >= 0.0 && support_radius < limit) {
        return Err(WaveError::Support {
            radius: support_radius,
            limit,
        });
    }
    Ok(limit - support_radius)
}

/// Lifespan of `profile` normalized to data size `eps` in `H^s × H^{s−1}`;
/// the evolution also stops at the profile's validity horizon.
pub fn lifespan_estimate(
    profile: &DataProfile,
    grid: &GridSpec,
    spec: &NonlinearSpec,
    s: f64,
    eps: f64,
    cfg: &EvolveConfig,
) -> Result<LifespanRecord> {
    let data = make_data(profile, grid, eps, s)?;
    lifespan_of(&data, profile.support_radius(grid.n()), spec, s, cfg)
}

/// Lifespan of prepared data whose support has radius `support` (if any).
pub fn lifespan_of(
    data: &FieldState,
    support: Option<f64>,
    spec: &NonlinearSpec,
    s: f64,
    cfg: &EvolveConfig,
) -> Result<LifespanRecord> {
    let mut cfg = cfg.clone();
    cfg.s = s;
    cfg.record_every = 0;
    if let Some(r) = support {
        let h = validity_horizon(data.grid(), r)?;
        cfg.horizon = Some(cfg.horizon.map_or(h, |c| c.min(h)));
    }
    let mut rec = evolve(data, spec, &cfg)?.record;
    rec.eps = data.data_norm(s);
    Ok(rec)
}

/// Writes `state` as a binary record: `n`, `points` (u64), `period`, `time`
/// (f64), then the `u` and `∂_t u` coefficients as interleaved re/im f64,
/// all little-endian.
pub fn write_snapshot<W: Write>(mut w: W, state: &FieldState) -> Result<()> {
    let g = state.grid();
    w.write_all(&(g.n() as u64).to_le_bytes())?;
    w.write_all(&(g.points() as u64).to_le_bytes())?;
    w.write_all(&g.period().to_le_bytes())?;
    w.write_all(&state.time.to_le_bytes())?;
    let mut buf = Vec::with_capacity(32 * g.len());
    for c in state.u.coeffs().iter().chain(state.ut.coeffs()) {
        buf.extend_from_slice(&c.re.to_le_bytes());
        buf.extend_from_slice(&c.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_snapshot<R: Read>(mut r: R) -> Result<FieldState> {
    let mut word = [0u8; 8];
    let mut next = |r: &mut R| -> Result<[u8; 8]> {
        r.read_exact(&mut word)?;
        Ok(word)
    };
    let n = u64::from_le_bytes(next(&mut r)?) as usize;
    let points = u64::from_le_bytes(next(&mut r)?) as usize;
    let period = f64::from_le_bytes(next(&mut r)?);
    let time = f64::from_le_bytes(next(&mut r)?);
    let g = GridSpec::new(n, points, period)?;
    let mut read_field = |r: &mut R| -> Result<SpectralField> {
        let mut coeffs = Vec::with_capacity(g.len());
        for _ in 0..g.len() {
            let re = f64::from_le_bytes(next(r)?);
            let im = f64::from_le_bytes(next(r)?);
            coeffs.push(Complex64::new(re, im));
        }
        SpectralField::from_coeffs(g, coeffs)
    };
    let u = read_field(&mut r)?;
    let ut = read_field(&mut r)?;
    FieldState::new(time, u, ut)
}
