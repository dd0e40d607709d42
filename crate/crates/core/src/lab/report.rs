//! Versioned CSV output with reproducibility headers.

use crate::error::Result;

use super::config::ExperimentConfig;

pub const CSV_VERSION: &str = "v1";

/// One output file, as text.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputFile {
    pub name: String,
    pub contents: String,
}

/// Comment block opening every CSV: schema version, config hash, seed,
/// grid, validity horizon, gate verdict and override flag.
pub fn header(cfg: &ExperimentConfig, horizon: Option<f64>, gate: &[String], extra: &[(String, String)]) -> String {
    let g = cfg.grid;
    let mut lines = vec![
        format!("# wavelab-csv {CSV_VERSION} {}", cfg.experiment.as_str()),
        format!("# config_sha256: {}", cfg.hash()),
        format!("# seed: {}", cfg.seed),
        format!("# grid: n={} points_per_axis={} period={}", g.n(), g.points(), g.period()),
        format!("# validity_horizon: {}", horizon.map_or("none".to_string(), |h| h.to_string())),
    ];
    lines.extend(gate.iter().map(|v| format!("# gate: {v}")));
    lines.push(format!("# gate_override: {}", cfg.override_gate));
    if g.n() == 1 {
        lines.push("# scope: n=1 surrogate, outside all theorem hypotheses".into());
    }
    lines.extend(extra.iter().map(|(k, v)| format!("# {k}: {v}")));
    let mut out = lines.join("\n");
    out.push('\n');
    out
}

/// `header` followed by a CSV table.
pub fn table(header: &str, columns: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(columns)?;
    for r in rows {
        w.write_record(r)?;
    }
    let body = String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("utf-8 fields");
    Ok(format!("{header}{body}"))
}

/// Shortest round-trip text; scientific outside `[1e-4, 1e7)`.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e7).contains(&a) {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Least-squares line `y ≈ slope·x + intercept`; `None` with fewer than two
/// distinct abscissae.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let n = xs.len() as f64;
    if xs.len() < 2 || xs.len() != ys.len() {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_recovers_lines() {
        let xs = [1.0, 2.0, 3.0, 5.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.5 * x - 1.0).collect();
        let (a, b) = linear_fit(&xs, &ys).unwrap();
        assert!((a - 2.5).abs() < 1e-12 && (b + 1.0).abs() < 1e-12);
        assert!(linear_fit(&[1.0, 1.0], &[0.0, 1.0]).is_none());
        assert!(linear_fit(&[1.0], &[0.0]).is_none());
    }

    #[test]
    fn numbers_round_trip() {
        for x in [0.0, 1.5, -2.0, 1e-10, 3.3e12, 0.1 + 0.2, f64::INFINITY] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(num(1e-10), "1e-10");
        assert_eq!(num(0.25), "0.25");
    }

    #[test]
    fn tables_are_plain_csv() {
        let t = table("# h\n", &["a", "b"], &[vec!["1".into(), "".into()]]).unwrap();
        assert_eq!(t, "# h\na,b\n1,\n");
    }
}
