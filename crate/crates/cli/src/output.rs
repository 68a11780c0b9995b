//! CSV serialization of experiment results.
//!
//! Numbers are written with nine significant digits in scientific
//! notation, which round-trips through an f64 parse. The `seconds`
//! column is always left empty: the file contract is byte-identical
//! output for a given configuration and seed at any worker count, and
//! wall-clock timing cannot honor that. Timing lives in the summary
//! table instead.

use crate::CliError;
use afrelay_core::ExperimentResult;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub const CSV_HEADER: &str = "sweep,scheme,mean_mse,mse_ci95,mean_ber,ber_ci95,mean_L,seconds";
pub const HISTOGRAM_HEADER: &str = "sweep,L,count";

fn write_file(path: &Path, content: &str) -> Result<(), CliError> {
    std::fs::write(path, content)
        .map_err(|err| CliError::Internal(format!("cannot write {}: {err}", path.display())))
}

/// Writes one row per (sweep point, scheme). BER fields are empty for
/// runs without detection.
pub fn write_csv(result: &ExperimentResult, path: &Path) -> Result<(), CliError> {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for point in &result.points {
        for stats in &point.stats {
            let ber = stats
                .mean_ber
                .map_or_else(String::new, |v| format!("{v:.8e}"));
            let ber_ci = stats
                .ber_ci95
                .map_or_else(String::new, |v| format!("{v:.8e}"));
            let _ = writeln!(
                out,
                "{},{},{:.8e},{:.8e},{},{},{:.8e},",
                point.sweep_value,
                stats.scheme.label(),
                stats.mean_mse,
                stats.mse_ci95,
                ber,
                ber_ci,
                stats.mean_selected,
            );
        }
    }
    write_file(path, &out)
}

/// Companion path for the selected-size distribution of a histogram run.
pub fn histogram_path(csv_path: &Path) -> PathBuf {
    PathBuf::from(format!("{}.hist.csv", csv_path.display()))
}

/// Writes the selected-size distribution, one row per (sweep point,
/// observed size), from each point's first scheme.
pub fn write_histogram_csv(result: &ExperimentResult, csv_path: &Path) -> Result<(), CliError> {
    let mut out = String::from(HISTOGRAM_HEADER);
    out.push('\n');
    for point in &result.points {
        if let Some(stats) = point.stats.first() {
            for (&level, &count) in &stats.level_histogram {
                let _ = writeln!(out, "{},{level},{count}", point.sweep_value);
            }
        }
    }
    write_file(&histogram_path(csv_path), &out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use afrelay_core::{PointResult, SchemeStats, Scheme, SweepValue};
    use std::collections::BTreeMap;

    fn sample_result(with_ber: bool) -> ExperimentResult {
        let mut histogram = BTreeMap::new();
        histogram.insert(2, 7u64);
        histogram.insert(3, 3u64);
        ExperimentResult {
            points: vec![PointResult {
                sweep_value: SweepValue::RelayCount(4),
                stats: vec![SchemeStats {
                    scheme: Scheme::Gmm,
                    mean_mse: 0.123456789123,
                    mse_ci95: 0.00123,
                    mean_ber: with_ber.then_some(0.025),
                    ber_ci95: with_ber.then_some(0.001),
                    mean_selected: 2.3,
                    level_histogram: histogram,
                    seconds: 1.25,
                }],
            }],
        }
    }

    #[test]
    fn csv_rows_have_all_fields_and_empty_seconds() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        write_csv(&sample_result(true), &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 2);
        let fields: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(fields.len(), 8);
        assert_eq!(fields[0], "k=4");
        assert_eq!(fields[1], "gmm");
        assert_eq!(fields[2], "1.23456789e-1");
        assert_eq!(fields[7], "", "seconds column stays empty");
    }

    #[test]
    fn ber_fields_are_empty_without_detection() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        write_csv(&sample_result(false), &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let fields: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
        assert_eq!(fields[4], "");
        assert_eq!(fields[5], "");
    }

    #[test]
    fn numbers_round_trip_at_nine_significant_digits() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        write_csv(&sample_result(true), &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let fields: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
        for field in &fields[2..7] {
            if field.is_empty() {
                continue;
            }
            let value: f64 = field.parse().unwrap();
            assert_eq!(format!("{value:.8e}"), **field);
        }
    }

    #[test]
    fn histogram_file_lists_each_observed_size() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.csv");
        write_histogram_csv(&sample_result(false), &path).unwrap();
        let hist = dir.path().join("run.csv.hist.csv");
        let text = std::fs::read_to_string(&hist).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines, vec![HISTOGRAM_HEADER, "k=4,2,7", "k=4,3,3"]);
    }

    #[test]
    fn write_error_names_the_path() {
        let err = write_csv(&sample_result(false), Path::new("/nonexistent/dir/out.csv"))
            .unwrap_err();
        assert!(err.to_string().contains("/nonexistent/dir/out.csv"), "{err}");
    }
}
