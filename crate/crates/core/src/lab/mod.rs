//! Experiment driver: the five canonical experiments, each producing
//! deterministic CSV files and a key/value summary.

pub mod config;
pub mod report;

use std::path::Path;

use log::{info, warn};

use crate::data::{concentrated_family, make_data, DataProfile};
use crate::error::{Result, WaveError};
use crate::linear::{estimate_endpoint_growth, estimate_strichartz_ratio, StrichartzQuery};
use crate::nonlinearity::{
    classify_radial, is_radial, regularity_gate, strichartz_range, AdmissibilityVerdict, GateCase, StrichartzRange,
};
use crate::par;
use crate::picard::{
    find_contraction_threshold, picard_solve, timestepper_agreement, PicardConfig, PicardSolution,
};
use crate::quadrature::TimeExponent;
use crate::spectral::FieldState;
use crate::timestepper::{evolve, lifespan_of, validity_horizon, EvolveConfig, LifespanRecord, Outcome};

pub use config::{ExperimentConfig, ExperimentKind};
pub use report::{linear_fit, OutputFile};

use report::{header, num, opt, table};

/// Everything one experiment produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub experiment: ExperimentKind,
    pub files: Vec<OutputFile>,
    pub summary: Vec<(String, String)>,
}

impl Report {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.summary.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn file(&self, name: &str) -> Option<&str> {
        self.files.iter().find(|f| f.name == name).map(|f| f.contents.as_str())
    }

    /// Writes every file into `dir`, creating it if needed.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for f in &self.files {
            std::fs::write(dir.join(&f.name), &f.contents)?;
        }
        Ok(())
    }
}

/// Runs the experiment named in `cfg`.
pub fn run(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    info!("running {} (config {})", cfg.experiment.as_str(), &cfg.hash()[..12]);
    match cfg.experiment {
        ExperimentKind::PicardContraction => run_picard_contraction(cfg),
        ExperimentKind::LifespanSweep => run_lifespan_sweep(cfg),
        ExperimentKind::StrichartzEnsemble => run_strichartz_ensemble(cfg),
        ExperimentKind::RadialCompare => run_radial_compare(cfg),
        ExperimentKind::IllposednessProbe => run_illposedness_probe(cfg),
    }
}

fn section<'a, T>(p: &'a Option<T>, name: &str) -> Result<&'a T> {
    p.as_ref()
        .ok_or_else(|| WaveError::Config(format!("missing [{name}] section")))
}

/// The profile with the run seed folded in.
fn seeded_profile(cfg: &ExperimentConfig, offset: u64) -> DataProfile {
    let mut p = cfg.profile.clone();
    p.seed = p.seed.wrapping_add(cfg.seed).wrapping_add(offset);
    p
}

fn horizon_of(cfg: &ExperimentConfig, profile: &DataProfile) -> Result<Option<f64>> {
    profile
        .support_radius(cfg.grid.n())
        .map(|r| validity_horizon(&cfg.grid, r))
        .transpose()
}

/// Data of size `eps`; zero data for `eps = 0`.
fn data_of(cfg: &ExperimentConfig, profile: &DataProfile, eps: f64, s: f64) -> Result<FieldState> {
    if eps == 0.0 {
        Ok(FieldState::zeros(cfg.grid))
    } else {
        make_data(profile, &cfg.grid, eps, s)
    }
}

fn gate_at(cfg: &ExperimentConfig, s: f64) -> AdmissibilityVerdict {
    let radial = cfg.profile.radial && is_radial(&cfg.nonlinearity);
    regularity_gate(cfg.grid.n(), cfg.nonlinearity.k(), s, radial)
}

/// Gate verdicts for every `s`, refusing unless all are admitted or the
/// override is set.
fn require_gate(cfg: &ExperimentConfig, s_values: &[f64]) -> Result<Vec<String>> {
    let mut lines = Vec::new();
    for &s in s_values {
        let v = gate_at(cfg, s);
        if !v.admitted && !cfg.override_gate {
            return Err(WaveError::Refused(format!(
                "(n={}, k={}, s={s}) not admitted: {v}; use the gate override to run anyway",
                cfg.grid.n(),
                cfg.nonlinearity.k()
            )));
        }
        lines.push(format!("s={s} {v}"));
    }
    Ok(lines)
}

fn status_of(e: &WaveError) -> &'static str {
    match e {
        WaveError::Divergence { .. } => "divergence",
        WaveError::NotConverged { .. } => "not_converged",
        WaveError::UnderResolved(_) => "under_resolved",
        _ => "error",
    }
}

fn summary_file(cfg: &ExperimentConfig, head: &str, summary: &[(String, String)]) -> Result<OutputFile> {
    let rows: Vec<Vec<String>> = summary.iter().map(|(k, v)| vec![k.clone(), v.clone()]).collect();
    Ok(OutputFile {
        name: format!("{}_summary.csv", cfg.experiment.as_str()),
        contents: table(head, &["key", "value"], &rows)?,
    })
}

fn kv(k: &str, v: impl ToString) -> (String, String) {
    (k.to_string(), v.to_string())
}

struct PicardRun {
    eps: f64,
    result: Result<(PicardSolution, Option<f64>)>,
}

pub fn run_picard_contraction(cfg: &ExperimentConfig) -> Result<Report> {
    let p = section(&cfg.picard, "picard")?;
    let gate = require_gate(cfg, &[p.s])?;
    let profile = seeded_profile(cfg, 0);
    let horizon = horizon_of(cfg, &profile)?;
    let spec = &cfg.nonlinearity;
    let pc = PicardConfig {
        t: p.t,
        steps: p.steps,
        s: p.s,
        q: p.q.unwrap_or(TimeExponent::Finite((spec.k() - 1) as f64)),
        m_max: p.m_max,
        tol: p.tol,
        mode: p.mode,
        horizon,
    };
    pc.validate()?;

    let runs: Vec<PicardRun> = par::map(&p.eps, |&eps| {
        let result = data_of(cfg, &profile, eps, p.s).and_then(|d| {
            let sol = picard_solve(&d, spec, &pc)?;
            let oracle = if p.oracle && sol.trace.converged() {
                Some(timestepper_agreement(&d, spec, &pc, &sol.trajectory)?)
            } else {
                None
            };
            Ok((sol, oracle))
        });
        PicardRun { eps, result }
    });
    if let [single] = runs.as_slice() {
        if let Err(e) = &single.result {
            if matches!(e, WaveError::Divergence { .. }) {
                return Err(WaveError::Divergence {
                    iterate: match e {
                        WaveError::Divergence { iterate } => *iterate,
                        _ => 0,
                    },
                });
            }
        }
    }

    let threshold = p.threshold.as_ref().map(|t| {
        find_contraction_threshold(|e| make_data(&profile, &cfg.grid, e, p.s), spec, &pc, t.lo, t.hi, t.bisections)
    });
    let mut extra = vec![
        ("T".to_string(), num(p.t)),
        ("steps".to_string(), p.steps.to_string()),
        ("q".to_string(), pc.q.to_string()),
        ("tol".to_string(), num(p.tol)),
    ];
    extra.push(("s".to_string(), num(p.s)));
    let head = header(cfg, horizon, &gate, &extra);

    let mut files = Vec::new();
    let mut rows = Vec::new();
    for (i, r) in runs.iter().enumerate() {
        match &r.result {
            Ok((sol, oracle)) => {
                let t = &sol.trace;
                rows.push(vec![
                    num(r.eps),
                    "ok".into(),
                    t.rows.len().to_string(),
                    match t.stop {
                        crate::picard::StopReason::Tolerance => "tolerance".into(),
                        crate::picard::StopReason::MaxIterations => "max_iterations".into(),
                    },
                    opt(t.worst_ratio()),
                    num(t.m_observed),
                    t.geometric_violations().is_empty().to_string(),
                    (t.converged() && t.contracts(0.5)).to_string(),
                    opt(*oracle),
                ]);
                let mut buf = Vec::new();
                t.write_csv(&mut buf)?;
                let trace_head = header(cfg, horizon, &gate, &[("eps".into(), num(r.eps))]);
                files.push(OutputFile {
                    name: format!("picard_trace_{i:03}.csv"),
                    contents: format!("{trace_head}{}", String::from_utf8(buf).expect("utf-8")),
                });
            }
            Err(e) => {
                warn!("picard run at eps={} failed: {e}", r.eps);
                let mut row = vec![num(r.eps), status_of(e).into()];
                row.extend(std::iter::repeat(String::new()).take(7));
                rows.push(row);
            }
        }
    }
    files.insert(
        0,
        OutputFile {
            name: "picard_contraction.csv".into(),
            contents: table(
                &head,
                &[
                    "eps",
                    "status",
                    "iterations",
                    "stop",
                    "worst_ratio",
                    "m_observed",
                    "geometric_ok",
                    "contracts",
                    "oracle_rel_err",
                ],
                &rows,
            )?,
        },
    );

    let eps0 = match &threshold {
        Some(Ok(t)) => Some(t.eps0),
        Some(Err(e)) => {
            warn!("threshold search failed: {e}");
            None
        }
        None => None,
    };
    let below = |eps: f64| eps0.map_or(true, |e0| eps <= e0);
    let ok_runs: Vec<(f64, &PicardSolution, Option<f64>)> = runs
        .iter()
        .filter_map(|r| r.result.as_ref().ok().map(|(s, o)| (r.eps, s, *o)))
        .collect();
    let worst = ok_runs
        .iter()
        .filter(|(e, _, _)| below(*e))
        .filter_map(|(_, s, _)| s.trace.worst_ratio())
        .fold(None, |a: Option<f64>, r| Some(a.map_or(r, |m| m.max(r))));
    let max_m = ok_runs.iter().map(|(_, s, _)| s.trace.m_observed).fold(0.0, f64::max);
    let contraction = ok_runs
        .iter()
        .filter(|(e, _, _)| below(*e))
        .all(|(_, s, _)| s.trace.converged() && s.trace.contracts(0.5) && s.trace.geometric_violations().is_empty())
        && ok_runs.len() == runs.len();
    let oracle_max = ok_runs.iter().filter_map(|(_, _, o)| *o).fold(None, |a: Option<f64>, r| Some(a.map_or(r, |m| m.max(r))));
    let mut summary = vec![
        kv("runs", runs.len()),
        kv("converged", ok_runs.iter().filter(|(_, s, _)| s.trace.converged()).count()),
        kv("eps0", opt(eps0)),
        kv("max_m_observed", num(max_m)),
        kv("worst_ratio_below_eps0", opt(worst)),
        kv("contraction_below_eps0", contraction),
        kv("oracle_max_rel_err", opt(oracle_max)),
    ];
    if let Some(Ok(t)) = &threshold {
        summary.push(kv("eps0_failed_at", opt(t.failed_at)));
        summary.push(kv("eps0_evaluations", t.evaluations));
    }
    files.push(summary_file(cfg, &head, &summary)?);
    Ok(Report {
        experiment: cfg.experiment,
        files,
        summary,
    })
}

pub fn run_lifespan_sweep(cfg: &ExperimentConfig) -> Result<Report> {
    let p = section(&cfg.lifespan, "lifespan")?;
    let gate = require_gate(cfg, &[p.s])?;
    let profile = seeded_profile(cfg, 0);
    let horizon = horizon_of(cfg, &profile)?;
    let support = profile.support_radius(cfg.grid.n());
    let spec = &cfg.nonlinearity;
    let ec = EvolveConfig {
        blowup_threshold: p.blowup_threshold,
        ..EvolveConfig::new(p.dt, p.t_max)
    };
    ec.validate(&cfg.grid)?;
    let results: Vec<Result<LifespanRecord>> = par::map(&p.eps, |&eps| {
        let d = data_of(cfg, &profile, eps, p.s)?;
        let mut rec = lifespan_of(&d, support, spec, p.s, &ec)?;
        rec.eps = eps;
        Ok(rec)
    });
    if let [Err(e)] = results.as_slice() {
        if let WaveError::Divergence { iterate } = e {
            return Err(WaveError::Divergence { iterate: *iterate });
        }
    }
    let head = header(
        cfg,
        horizon,
        &gate,
        &[
            ("s".into(), num(p.s)),
            ("dt".into(), num(p.dt)),
            ("t_max".into(), num(p.t_max)),
            ("blowup_threshold".into(), num(p.blowup_threshold)),
        ],
    );
    let mut rows = Vec::new();
    let mut ok = Vec::new();
    for (eps, r) in p.eps.iter().zip(&results) {
        match r {
            Ok(rec) => {
                rows.push(vec![
                    num(*eps),
                    num(rec.t_star),
                    rec.outcome.as_str().into(),
                    num(rec.final_h_norm),
                    num(rec.final_sup),
                    "ok".into(),
                ]);
                ok.push(rec.clone());
            }
            Err(e) => {
                warn!("lifespan run at eps={eps} failed: {e}");
                rows.push(vec![num(*eps), String::new(), String::new(), String::new(), String::new(), status_of(e).into()]);
            }
        }
    }
    let mut by_eps = ok.clone();
    by_eps.sort_by(|a, b| b.eps.total_cmp(&a.eps));
    let monotone = by_eps.len() >= 2 && by_eps.windows(2).all(|w| w[1].t_star > w[0].t_star);
    let blow: Vec<&LifespanRecord> = ok.iter().filter(|r| r.outcome == Outcome::Blowup && r.eps > 0.0).collect();
    let fit_enabled = cfg.grid.n() == 3 && spec.k() == 3;
    let (status, slope, intercept) = if !fit_enabled {
        ("disabled", None, None)
    } else if blow.len() < 2 {
        ("inconclusive", None, None)
    } else {
        let xs: Vec<f64> = blow.iter().map(|r| r.eps.powi(-2)).collect();
        let ys: Vec<f64> = blow.iter().map(|r| r.t_star.ln()).collect();
        match linear_fit(&xs, &ys) {
            Some((a, b)) => ("fitted", Some(a), Some(b)),
            None => ("inconclusive", None, None),
        }
    };
    let summary = vec![
        kv("runs", results.len()),
        kv("blowups", blow.len()),
        kv("t_star_increasing_as_eps_decreases", monotone),
        kv("fit_status", status),
        kv("fit_points", if slope.is_some() { blow.len() } else { 0 }),
        kv("slope_ln_tstar_vs_eps_inv2", opt(slope)),
        kv("intercept", opt(intercept)),
        kv("slope_positive", slope.map_or("".to_string(), |s| (s > 0.0).to_string())),
    ];
    Ok(Report {
        experiment: cfg.experiment,
        files: vec![
            OutputFile {
                name: "lifespan_sweep.csv".into(),
                contents: table(
                    &head,
                    &["eps", "t_star", "outcome", "final_h_norm", "final_sup", "status"],
                    &rows,
                )?,
            },
            summary_file(cfg, &head, &summary)?,
        ],
        summary,
    })
}

pub fn run_strichartz_ensemble(cfg: &ExperimentConfig) -> Result<Report> {
    let p = section(&cfg.strichartz, "strichartz")?;
    let n = cfg.grid.n();
    let radial = cfg.profile.radial;
    let range = strichartz_range(n, p.q, p.s, radial);
    if range == StrichartzRange::Outside && !cfg.override_gate {
        return Err(WaveError::Refused(format!(
            "(n={n}, q={}, s={}, radial={radial}) is outside every Strichartz range",
            p.q, p.s
        )));
    }
    let endpoint = n == 3 && p.q == TimeExponent::Finite(2.0);
    let longest = if endpoint {
        p.endpoint_horizons.iter().copied().fold(p.t, f64::max)
    } else {
        p.t
    };
    let query = StrichartzQuery::uniform(p.q, p.s, p.t, p.intervals)?;
    let members: Vec<usize> = (0..p.members).collect();
    let seed_of = |i: usize| seeded_profile(cfg, i as u64).seed;
    let mut horizon: Option<f64> = None;
    for &i in &members {
        if let Some(h) = horizon_of(cfg, &seeded_profile(cfg, i as u64))? {
            if longest > h {
                return Err(WaveError::BeyondHorizon { t: longest, horizon: h });
            }
            horizon = Some(horizon.map_or(h, |m: f64| m.min(h)));
        }
    }
    let results: Vec<Result<(f64, Vec<(f64, f64)>)>> = par::map(&members, |&i| {
        let d = make_data(&seeded_profile(cfg, i as u64), &cfg.grid, 1.0, p.s)?;
        let ratio = estimate_strichartz_ratio(&d, &query)?;
        let table = if endpoint {
            estimate_endpoint_growth(&d, p.s, &p.endpoint_horizons)?
        } else {
            Vec::new()
        };
        Ok((ratio, table))
    });
    let results = results.into_iter().collect::<Result<Vec<_>>>()?;
    let gate = vec![format!(
        "strichartz_range={} n={n} q={} s={} radial={radial}",
        match range {
            StrichartzRange::Standard => "standard",
            StrichartzRange::Endpoint => "endpoint",
            StrichartzRange::Radial => "radial",
            StrichartzRange::Outside => "outside",
        },
        p.q,
        p.s
    )];
    let head = header(
        cfg,
        horizon,
        &gate,
        &[("T".into(), num(p.t)), ("intervals".into(), p.intervals.to_string())],
    );
    let mut running = 0.0f64;
    let rows: Vec<Vec<String>> = results
        .iter()
        .enumerate()
        .map(|(i, (r, _))| {
            running = running.max(*r);
            vec![i.to_string(), seed_of(i).to_string(), num(*r), num(running)]
        })
        .collect();
    let mut files = vec![OutputFile {
        name: "strichartz_ensemble.csv".into(),
        contents: table(&head, &["member", "seed", "ratio", "running_max"], &rows)?,
    }];
    let mut summary = vec![kv("members", p.members), kv("ensemble_max", num(running))];
    if endpoint {
        let mut erows = Vec::new();
        let mut worst_spread = 0.0f64;
        for (i, (_, tab)) in results.iter().enumerate() {
            let normalized: Vec<f64> = tab.iter().map(|(t, r)| r / (1.0 + t).ln().sqrt()).collect();
            for ((t, r), nrm) in tab.iter().zip(&normalized) {
                erows.push(vec![i.to_string(), seed_of(i).to_string(), num(*t), num(*r), num(*nrm)]);
            }
            let hi = normalized.iter().copied().fold(0.0, f64::max);
            let lo = normalized.iter().copied().fold(f64::INFINITY, f64::min);
            worst_spread = worst_spread.max(hi / lo);
        }
        files.push(OutputFile {
            name: "strichartz_endpoint.csv".into(),
            contents: table(&head, &["member", "seed", "T", "ratio", "normalized"], &erows)?,
        });
        summary.push(kv("endpoint_worst_spread", num(worst_spread)));
    }
    files.push(summary_file(cfg, &head, &summary)?);
    Ok(Report {
        experiment: cfg.experiment,
        files,
        summary,
    })
}

pub fn run_radial_compare(cfg: &ExperimentConfig) -> Result<Report> {
    let p = section(&cfg.radial, "radial")?;
    let n = cfg.grid.n();
    let spec = &cfg.nonlinearity;
    let report = classify_radial(spec);
    if !report.radial {
        let witness = report
            .witness
            .map(|w| w.to_string())
            .unwrap_or_else(|| "no rotation-invariant form in the symbolic reduction".into());
        return Err(WaveError::NotRadial { witness });
    }
    if !cfg.profile.radial {
        return Err(WaveError::Refused("radial_compare needs a radial data profile".into()));
    }
    let s = p.s.unwrap_or_else(|| cfg.s_c());
    let v = regularity_gate(n, spec.k(), s, true);
    if (v.case != GateCase::RadialGlobal || !v.admitted) && !cfg.override_gate {
        return Err(WaveError::Refused(format!(
            "radial global existence does not cover (n={n}, k={}, s={s}): {v}",
            spec.k()
        )));
    }
    let profile = seeded_profile(cfg, 0);
    let horizon = horizon_of(cfg, &profile)?;
    let ec = EvolveConfig {
        horizon,
        s,
        ..EvolveConfig::new(p.dt, p.t_max)
    };
    ec.validate(&cfg.grid)?;
    let runs = par::map(&p.eps, |&eps| -> Result<_> {
        let d = data_of(cfg, &profile, eps, s)?;
        evolve(&d, spec, &ec)
    });
    let head = header(
        cfg,
        horizon,
        &[format!("s={s} {v}")],
        &[("dt".into(), num(p.dt)), ("t_max".into(), num(p.t_max)), ("growth_bound".into(), num(p.growth_bound))],
    );
    let mut hist = Vec::new();
    let mut rows = Vec::new();
    let mut all_pass = true;
    for (eps, r) in p.eps.iter().zip(&runs) {
        match r {
            Ok(ev) => {
                let last = ev.history.len() - 1;
                for (i, d) in ev.history.iter().enumerate() {
                    if i % p.history_every == 0 || i == last {
                        hist.push(vec![num(*eps), num(d.time), num(d.h_norm), num(d.sup)]);
                    }
                }
                let init = ev.history[0].sup;
                let max = ev.history.iter().map(|d| d.sup).fold(0.0, f64::max);
                let growth = if init > 0.0 {
                    max / init
                } else if max == 0.0 {
                    1.0
                } else {
                    f64::INFINITY
                };
                let pass = ev.record.outcome != Outcome::Blowup && growth <= p.growth_bound;
                all_pass &= pass;
                rows.push(vec![
                    num(*eps),
                    ev.record.outcome.as_str().into(),
                    num(ev.record.t_star),
                    num(init),
                    num(max),
                    num(growth),
                    pass.to_string(),
                ]);
            }
            Err(e) => {
                warn!("radial run at eps={eps} failed: {e}");
                all_pass = false;
                rows.push(vec![num(*eps), status_of(e).into(), String::new(), String::new(), String::new(), String::new(), "false".into()]);
            }
        }
    }
    let summary = vec![kv("s", num(s)), kv("runs", p.eps.len()), kv("all_pass", all_pass)];
    Ok(Report {
        experiment: cfg.experiment,
        files: vec![
            OutputFile {
                name: "radial_compare.csv".into(),
                contents: table(&head, &["eps", "t", "h_norm", "sup"], &hist)?,
            },
            OutputFile {
                name: "radial_compare_runs.csv".into(),
                contents: table(
                    &head,
                    &["eps", "outcome", "t_end", "initial_sup", "max_sup", "growth", "pass"],
                    &rows,
                )?,
            },
            summary_file(cfg, &head, &summary)?,
        ],
        summary,
    })
}

#[derive(Debug, Clone)]
struct ProbeRow {
    s: f64,
    j: u32,
    width: f64,
    horizon: Option<f64>,
    rec: LifespanRecord,
}

/// Trend of one `s` along the ladder.
fn ladder_trend(rows: &[&ProbeRow], below: bool) -> bool {
    if below {
        rows.len() >= 2
            && rows
                .windows(2)
                .all(|w| w[1].rec.outcome == Outcome::Blowup && w[1].rec.t_star < w[0].rec.t_star)
    } else {
        rows.windows(2)
            .all(|w| w[1].rec.t_star >= w[0].rec.t_star || w[1].rec.outcome != Outcome::Blowup)
    }
}

pub fn run_illposedness_probe(cfg: &ExperimentConfig) -> Result<Report> {
    let p = section(&cfg.illposedness, "illposedness")?;
    let s_c = cfg.s_c();
    if !(p.s.iter().any(|&s| s < s_c) && p.s.iter().any(|&s| s > s_c)) {
        return Err(WaveError::Config(format!(
            "illposedness.s must contain values on both sides of s_c = {s_c}"
        )));
    }
    let gate = require_gate(cfg, &p.s)?;
    let spec = &cfg.nonlinearity;
    let ne = p.norm_exponent.unwrap_or(1.0 / (spec.k() - 1) as f64);
    let base = seeded_profile(cfg, 0);
    let ec = EvolveConfig {
        blowup_threshold: p.blowup_threshold,
        ..EvolveConfig::new(p.dt, p.t_max)
    };
    ec.validate(&cfg.grid)?;
    let jobs: Vec<(f64, u32)> = p.s.iter().flat_map(|&s| p.j.iter().map(move |&j| (s, j))).collect();
    let results: Vec<Result<Option<ProbeRow>>> = par::map(&jobs, |&(s, j)| {
        let data = match concentrated_family(&base, &cfg.grid, s, j, ne) {
            Ok(d) => d,
            Err(WaveError::UnderResolved(why)) => {
                warn!("skipping s={s} j={j}: {why}");
                return Ok(None);
            }
            Err(e) => return Err(e),
        };
        let shrunk = base.shrunk(0.5f64.powi(j as i32));
        let support = shrunk.support_radius(cfg.grid.n());
        let horizon = horizon_of(cfg, &shrunk)?;
        let rec = lifespan_of(&data, support, spec, s, &ec)?;
        Ok(Some(ProbeRow {
            s,
            j,
            width: shrunk.width,
            horizon,
            rec,
        }))
    });
    let rows: Vec<ProbeRow> = results.into_iter().collect::<Result<Vec<_>>>()?.into_iter().flatten().collect();
    let head = header(
        cfg,
        horizon_of(cfg, &base)?,
        &gate,
        &[
            ("s_c".into(), num(s_c)),
            ("norm_exponent".into(), num(ne)),
            ("dt".into(), num(p.dt)),
            ("t_max".into(), num(p.t_max)),
        ],
    );
    let csv_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                num(r.s),
                r.j.to_string(),
                num(r.width),
                num(r.rec.eps),
                num(r.rec.t_star),
                r.rec.outcome.as_str().into(),
                opt(r.horizon),
            ]
        })
        .collect();
    let mut summary = vec![kv("s_c", num(s_c)), kv("norm_exponent", num(ne))];
    let mut below_ok = true;
    let mut above_ok = true;
    for &s in &p.s {
        let of_s: Vec<&ProbeRow> = rows.iter().filter(|r| r.s == s).collect();
        if s == s_c {
            continue;
        }
        let below = s < s_c;
        let ok = ladder_trend(&of_s, below);
        summary.push(kv(
            &format!("trend_s={s}"),
            format!("{}:{}", if below { "decreasing" } else { "non_decreasing_or_horizon" }, ok),
        ));
        if below {
            below_ok &= ok;
        } else {
            above_ok &= ok;
        }
    }
    let any_blowup = rows.iter().any(|r| r.rec.outcome == Outcome::Blowup);
    let verdict = if !any_blowup {
        "vacuous"
    } else if below_ok && above_ok {
        "supports_sharpness"
    } else {
        "inconclusive"
    };
    summary.push(kv("verdict", verdict));
    Ok(Report {
        experiment: cfg.experiment,
        files: vec![
            OutputFile {
                name: "illposedness_probe.csv".into(),
                contents: table(
                    &head,
                    &["s", "j", "width", "eps", "t_star", "outcome", "horizon"],
                    &csv_rows,
                )?,
            },
            summary_file(cfg, &head, &summary)?,
        ],
        summary,
    })
}
