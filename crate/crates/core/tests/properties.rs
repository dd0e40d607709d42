//! Property tests across modules: dealiasing against a fine-grid oracle,
//! homogeneity of the nonlinearity, commutation with grid rotations, and
//! round trips of the shipped configs and snapshots.

use std::f64::consts::PI;
use std::path::Path;

use proptest::prelude::*;

use wavelab_core::data::{make_data, DataProfile, Shape, Slot};
use wavelab_core::lab::ExperimentConfig;
use wavelab_core::nonlinearity::{eval_n, NonlinearSpec, NonlinearTerm};
use wavelab_core::spectral::{forward_transform, inverse_transform, sample, FieldState, GridSpec, SpectralField};
use wavelab_core::timestepper::{evolve, read_snapshot, write_snapshot, EvolveConfig};

/// Trigonometric polynomial `Σ a_j cos(jx) + b_j sin(jx)` and its derivative.
#[derive(Debug, Clone)]
struct Trig {
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl Trig {
    fn value(&self, x: f64) -> f64 {
        let c: f64 = self.cos.iter().enumerate().map(|(j, a)| a * (j as f64 * x).cos()).sum();
        let s: f64 = self.sin.iter().enumerate().map(|(j, b)| b * (j as f64 * x).sin()).sum();
        c + s
    }

    fn slope(&self, x: f64) -> f64 {
        let c: f64 = self.cos.iter().enumerate().map(|(j, a)| -a * j as f64 * (j as f64 * x).sin()).sum();
        let s: f64 = self.sin.iter().enumerate().map(|(j, b)| b * j as f64 * (j as f64 * x).cos()).sum();
        c + s
    }
}

/// Modes `0..max_mode` with the Nyquist mode excluded.
fn trig(max_mode: usize) -> impl Strategy<Value = Trig> {
    (
        prop::collection::vec(-1.0..1.0f64, max_mode),
        prop::collection::vec(-1.0..1.0f64, max_mode),
    )
        .prop_map(|(cos, sin)| Trig { cos, sin })
}

fn on(g: &GridSpec, f: impl Fn(f64) -> f64) -> SpectralField {
    forward_transform(g, &sample(g, |x| f(x[0]))).unwrap()
}

fn cubic_spec(c: [f64; 4]) -> NonlinearSpec {
    let terms = (0..4u32)
        .map(|j| NonlinearTerm {
            alpha: vec![3 - j, j],
            coeff: c[j as usize],
        })
        .collect();
    NonlinearSpec::new(1, 3, terms).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn dealiased_product_matches_fine_grid_oracle(
        u in trig(8), ut in trig(8), c in prop::array::uniform4(-2.0..2.0f64)
    ) {
        // modes up to 7 on 16 points: the cubic reaches 21 and would alias
        let g = GridSpec::new(1, 16, 2.0 * PI).unwrap();
        let fine = g.with_points(128).unwrap();
        let spec = cubic_spec(c);
        let state = FieldState::new(0.0, on(&g, |x| u.value(x)), on(&g, |x| ut.value(x))).unwrap();
        let got = eval_n(&state, &spec).unwrap();
        let exact = on(&fine, |x| spec.evaluate(ut.value(x), &[u.slope(x)]));
        let scale = exact.max_abs_coeff().max(1e-300);
        for i in 0..g.points() {
            let k = g.wavenumber(i);
            if k == -(g.points() as i64) / 2 {
                continue;
            }
            let j = k.rem_euclid(fine.points() as i64) as usize;
            let d = (got.coeffs()[i] - exact.coeffs()[j]).norm();
            prop_assert!(d <= 1e-11 * scale, "mode {k}: {} vs {}", got.coeffs()[i], exact.coeffs()[j]);
        }
    }

    #[test]
    fn nonlinearity_is_homogeneous(
        seed in 0u64..1000, k in 2u32..6, lambda in -3.0..3.0f64
    ) {
        let g = GridSpec::new(2, 16, 16.0).unwrap();
        let p = DataProfile::new(Shape::Random, 2.0).with_seed(seed).with_slot(Slot::Both);
        let d = make_data(&p, &g, 1.0, 1.5).unwrap();
        let mut terms = vec![NonlinearTerm { alpha: vec![k, 0, 0], coeff: 1.0 }];
        terms.push(NonlinearTerm { alpha: vec![k - 1, 1, 0], coeff: -0.5 });
        terms.push(NonlinearTerm { alpha: vec![0, k - 2, 2], coeff: 0.25 });
        let spec = NonlinearSpec::new(2, k, terms).unwrap();
        let a = eval_n(&d.scaled(lambda), &spec).unwrap();
        let b = eval_n(&d, &spec).unwrap().scaled(lambda.powi(k as i32));
        let scale = b.max_abs_coeff().max(1e-300);
        for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
            prop_assert!((x - y).norm() <= 1e-12 * scale);
        }
    }

    #[test]
    fn radial_nonlinearity_commutes_with_quarter_turns(seed in 0u64..1000, c2 in -2.0..2.0f64) {
        let g = GridSpec::new(2, 16, 16.0).unwrap();
        let p = DataProfile::new(Shape::Random, 2.0).with_seed(seed).with_slot(Slot::Both);
        let d = make_data(&p, &g, 1.0, 1.5).unwrap();
        let spec = NonlinearSpec::radial_quadratic(2, 1.0, c2).unwrap();
        let a = eval_n(&rotate_state(&d), &spec).unwrap();
        let b = rotate(&eval_n(&d, &spec).unwrap());
        let scale = b.max_abs_coeff().max(1e-300);
        for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
            prop_assert!((x - y).norm() <= 1e-12 * scale);
        }
    }
}

/// `v(x) = u(R⁻¹x)` for the quarter turn `R(x, y) = (−y, x)` about the origin.
fn rotate(f: &SpectralField) -> SpectralField {
    let g = *f.grid();
    let n = g.points();
    let u = inverse_transform(f).unwrap();
    let v: Vec<f64> = (0..g.len())
        .map(|flat| {
            let idx = g.unravel(flat);
            u[g.ravel(&[idx[1], (n - idx[0]) % n])]
        })
        .collect();
    forward_transform(&g, &v).unwrap()
}

fn rotate_state(s: &FieldState) -> FieldState {
    FieldState::new(s.time, rotate(&s.u), rotate(&s.ut)).unwrap()
}

#[test]
fn radial_evolution_commutes_with_quarter_turns() {
    let g = GridSpec::new(2, 32, 16.0).unwrap();
    let p = DataProfile::new(Shape::Random, 2.0).with_seed(3).with_slot(Slot::Both);
    let d = make_data(&p, &g, 0.5, 1.5).unwrap();
    let spec = NonlinearSpec::radial_quadratic(2, 1.0, -1.0).unwrap();
    let cfg = EvolveConfig {
        record_every: 20,
        ..EvolveConfig::new(0.05, 1.0)
    };
    let a = evolve(&rotate_state(&d), &spec, &cfg).unwrap();
    let b = evolve(&d, &spec, &cfg).unwrap();
    let (sa, sb) = (a.snapshots.last().unwrap(), rotate_state(b.snapshots.last().unwrap()));
    let scale = sb.u.max_abs_coeff();
    for (x, y) in sa.u.coeffs().iter().zip(sb.u.coeffs()) {
        assert!((x - y).norm() <= 1e-11 * scale);
    }
}

#[test]
fn shipped_configs_round_trip() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("toml") {
            continue;
        }
        let cfg = ExperimentConfig::load(&path).unwrap();
        cfg.validate().unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let back = ExperimentConfig::from_toml_str(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg, "{}", path.display());
        assert_eq!(back.hash(), cfg.hash());
        seen += 1;
    }
    assert!(seen >= 5);
}

#[test]
fn snapshots_survive_the_filesystem() {
    let g = GridSpec::new(3, 8, 8.0).unwrap();
    let p = DataProfile::new(Shape::Gaussian, 0.5).with_slot(Slot::Both).radial();
    let d = make_data(&p, &g, 0.2, 2.1).unwrap();
    let cfg = EvolveConfig {
        record_every: 5,
        ..EvolveConfig::new(0.05, 0.5)
    };
    let ev = evolve(&d, &NonlinearSpec::time_power(3, 3, 1.0).unwrap(), &cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("state.bin");
    let last = ev.snapshots.last().unwrap();
    write_snapshot(std::fs::File::create(&path).unwrap(), last).unwrap();
    let back = read_snapshot(std::fs::File::open(&path).unwrap()).unwrap();
    assert_eq!(&back, last);
    assert!((back.time - 0.5).abs() < 1e-12);
}
