//! CSV and JSON rendering, atomic file writes and the console summary.
//!
//! CSV layout: `#`-prefixed metadata lines, one header row, then one row per
//! grid point ordered by (series, grid index). `sweep_value` is in the units
//! of the swept variable (T: meV, t_ad: ps, others dimensionless or meV⁻²);
//! `tau_E` is in ps. No wall-clock data goes into the CSV.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use serde_json::json;

use crate::qsystem::FRAME_DESCRIPTION;
use crate::units::UNIT_CONVENTIONS;

use super::config::Plan;
use super::{SweepRecord, SweepResult};

pub const CSV_COLUMNS: [&str; 15] = [
    "sweep_value",
    "T_meV",
    "T_over_Omega",
    "k1",
    "k3_per_meV2",
    "t_ad_ps",
    "alpha",
    "gamma_plus_meV",
    "gamma_minus_meV",
    "T_M_meV",
    "tau_E",
    "fidelity_mean",
    "fidelity_min",
    "fidelity_max",
    "n_samples",
];

pub const CODE_VERSION: &str = concat!("holosim ", env!("CARGO_PKG_VERSION"));

fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.12e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn metadata(plan: &Plan) -> Vec<String> {
    let mut m = vec![
        CODE_VERSION.to_string(),
        format!("source: {}", plan.source),
        format!("units: {UNIT_CONVENTIONS}; sweep_value in the swept variable's units (T meV, t_ad ps); tau_E in ps"),
        format!("frame: {FRAME_DESCRIPTION}"),
    ];
    m.extend(plan.overrides.iter().map(|o| format!("override: {o}")));
    m.push(format!("config: {}", plan.resolved));
    for (i, s) in plan.sweeps.iter().enumerate() {
        m.push(format!(
            "series[{i}]: {}",
            serde_json::to_string(s).expect("sweep config serializes")
        ));
    }
    m
}

pub fn render_csv(plan: &Plan, records: &[SweepRecord]) -> String {
    let mut out = String::new();
    for line in metadata(plan) {
        let _ = writeln!(out, "# {line}");
    }
    let _ = writeln!(out, "{}", CSV_COLUMNS.join(","));
    for r in records {
        let row = [
            num(r.sweep_value),
            num(r.temperature),
            num(r.t_over_omega),
            num(r.k1),
            num(r.k3),
            num(r.t_ad_ps),
            num(r.alpha),
            num(r.gamma_plus),
            num(r.gamma_minus),
            num(r.t_m.unwrap_or(f64::NAN)),
            num(r.tau_e_ps),
            num(r.fidelity_mean),
            num(r.fidelity_min),
            num(r.fidelity_max),
            r.n_samples.to_string(),
        ];
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}

/// The header row and data rows of a rendered CSV.
pub fn data_section(csv: &str) -> String {
    csv.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect()
}

pub fn render_json(plan: &Plan, records: &[SweepRecord]) -> String {
    let doc = json!({
        "metadata": {
            "version": CODE_VERSION,
            "source": plan.source,
            "units": UNIT_CONVENTIONS,
            "frame": FRAME_DESCRIPTION,
            "overrides": plan.overrides,
            "config": plan.resolved,
            "series": plan.sweeps,
        },
        "records": records,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("records serialize");
    s.push('\n');
    s
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, contents: &str) -> SweepResult<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

pub fn summary_table(records: &[SweepRecord]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<16} {:>4} {:>12} {:>12} {:>12} {:>12} {:>8}",
        "series", "i", "value", "F_mean", "F_min", "F_max", "time_s"
    );
    for r in records {
        let _ = writeln!(
            out,
            "{:<16} {:>4} {:>12.4e} {:>12.8} {:>12.8} {:>12.8} {:>8.2}",
            r.series, r.index, r.sweep_value, r.fidelity_mean, r.fidelity_min, r.fidelity_max, r.wall_time_s
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format() {
        assert_eq!(num(0.5), "5.000000000000e-1");
        assert_eq!(num(f64::NAN), "nan");
        assert_eq!(num(f64::INFINITY), "inf");
    }

    #[test]
    fn data_section_drops_metadata() {
        let csv = "# a\n# b\nx,y\n1,2\n";
        assert_eq!(data_section(csv), "x,y\n1,2\n");
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.csv");
        write_atomic(&p, "one").unwrap();
        write_atomic(&p, "two").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "two");
        assert!(write_atomic(&dir.path().join("missing/out.csv"), "x").is_err());
    }
}
