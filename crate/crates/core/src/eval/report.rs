//! Text and CSV renderings of experiment results.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::ensemble::Combiner;
use crate::error::{Error, Result};

use super::experiment::ResultTable;
use super::stats::win_draw_loss;

pub const RESULTS_HEADER: [&str; 7] = [
    "dataset", "size", "combiner", "run", "fold", "accuracy", "seconds",
];

fn csv_error(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Writes one row per run. Accuracies use the shortest round-trip decimal
/// form; with `timing` off the seconds column is left empty so reruns are
/// byte-identical.
pub fn write_results_csv<W: Write>(table: &ResultTable, out: W, timing: bool) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RESULTS_HEADER).map_err(csv_error)?;
    for r in &table.records {
        let seconds = if timing {
            format!("{:.6}", r.seconds)
        } else {
            String::new()
        };
        w.write_record([
            r.dataset.clone(),
            r.size.to_string(),
            r.combiner.clone(),
            r.run.to_string(),
            r.fold.to_string(),
            r.accuracy.to_string(),
            seconds,
        ])
        .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

fn display_name(combiner: &str) -> String {
    match combiner.parse::<Combiner>() {
        Ok(Combiner::Gm(c)) => c.label().to_string(),
        _ => combiner.to_string(),
    }
}

fn push_grid(out: &mut String, header: &[String], rows: &[Vec<String>]) {
    let cols = header.len();
    let widths: Vec<usize> = (0..cols)
        .map(|j| {
            rows.iter()
                .map(|r| r[j].chars().count())
                .chain([header[j].chars().count()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let line = |cells: &[String]| {
        cells
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(j, (c, w))| {
                let pad = w - c.chars().count();
                if j == 0 {
                    format!("{c}{}", " ".repeat(pad))
                } else {
                    format!("{}{c}", " ".repeat(pad))
                }
            })
            .collect::<Vec<_>>()
            .join("  ")
    };
    let _ = writeln!(out, "{}", line(header));
    for r in rows {
        let _ = writeln!(out, "{}", line(r));
    }
}

/// Mean ± standard deviation of every (dataset, combiner) per ensemble size,
/// with the average rank of each combiner on the last line of each block.
pub fn format_summary(table: &ResultTable) -> String {
    let mut out = String::new();
    let mut header = vec!["dataset".to_string()];
    header.extend(table.combiners.iter().map(|c| display_name(c)));
    header.push("majority".to_string());
    for &size in &table.sizes {
        let _ = writeln!(
            out,
            "Ensemble size {size} ({} runs per cell)",
            table.runs_per_cell
        );
        let mut rows: Vec<Vec<String>> = table
            .datasets
            .iter()
            .map(|d| {
                let mut row = vec![d.name.clone()];
                row.extend(table.combiners.iter().map(
                    |c| match table.mean_std(&d.name, size, c) {
                        Some((m, s)) => format!("{m:.4} ± {s:.4}"),
                        None => "n/a".to_string(),
                    },
                ));
                row.push(format!("{:.4}", d.majority_rate));
                row
            })
            .collect();
        let mut ranks = vec!["avg rank".to_string()];
        ranks.extend(
            table
                .average_ranks(size)
                .into_iter()
                .map(|(_, r)| format!("{r:.2}")),
        );
        ranks.push(String::new());
        rows.push(ranks);
        push_grid(&mut out, &header, &rows);
        out.push('\n');
    }
    if !table.failures.is_empty() {
        let _ = writeln!(out, "Failed cells: {}", table.failures.len());
        for f in &table.failures {
            let _ = writeln!(
                out,
                "  {} size {} run {} fold {}: {}",
                f.dataset, f.size, f.run, f.fold, f.message
            );
        }
    }
    out
}

/// Per-size Friedman results for every dataset and the win/draw/loss grid
/// of the GM combiners (rows) against the other combiners (columns). When
/// either group is empty every combiner is compared with every other.
pub fn format_stats(table: &ResultTable, alpha: f64) -> Result<String> {
    let (mut proposed, mut baselines): (Vec<String>, Vec<String>) = table
        .combiners
        .iter()
        .cloned()
        .partition(|c| c.parse::<Combiner>().is_ok_and(|c| c.is_gm()));
    if proposed.is_empty() || baselines.is_empty() {
        proposed = table.combiners.clone();
        baselines = table.combiners.clone();
    }
    let mut out = String::new();
    for &size in &table.sizes {
        let reports = table.stat_reports(size, alpha)?;
        let _ = writeln!(out, "Ensemble size {size}, alpha = {alpha}");
        let header = ["dataset", "chi2", "p-value", "CD", "rejected"].map(String::from);
        let rows: Vec<Vec<String>> = reports
            .iter()
            .map(|r| {
                vec![
                    r.label.clone(),
                    format!("{:.4}", r.friedman.statistic),
                    format!("{:.6}", r.friedman.p_value),
                    format!("{:.4}", r.critical_difference),
                    if r.rejected() { "yes" } else { "no" }.to_string(),
                ]
            })
            .collect();
        push_grid(&mut out, &header, &rows);
        out.push('\n');
        let mut wdl = win_draw_loss(&reports, &proposed, &baselines)?;
        wdl.proposed = wdl.proposed.iter().map(|c| display_name(c)).collect();
        wdl.baselines = wdl.baselines.iter().map(|c| display_name(c)).collect();
        let _ = writeln!(out, "wins - draws - losses over {} datasets", reports.len());
        out.push_str(&wdl.to_string());
        out.push('\n');
    }
    Ok(out)
}

pub fn write_timing_csv<W: Write>(table: &ResultTable, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["size", "combiner", "seconds"])
        .map_err(csv_error)?;
    for row in table.timing_report() {
        w.write_record([
            row.size.to_string(),
            row.combiner,
            format!("{:.6}", row.seconds),
        ])
        .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Paths written by [`write_reports`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportFiles {
    pub results: PathBuf,
    pub summary: PathBuf,
    pub stats: PathBuf,
    pub timing: PathBuf,
}

/// Writes `results.csv`, `summary.txt`, `stats.txt` and `timing.csv` into `dir`.
pub fn write_reports(
    table: &ResultTable,
    dir: &Path,
    alpha: f64,
    timing: bool,
) -> Result<ReportFiles> {
    fs::create_dir_all(dir)?;
    let files = ReportFiles {
        results: dir.join("results.csv"),
        summary: dir.join("summary.txt"),
        stats: dir.join("stats.txt"),
        timing: dir.join("timing.csv"),
    };
    write_results_csv(table, fs::File::create(&files.results)?, timing)?;
    fs::write(&files.summary, format_summary(table))?;
    fs::write(&files.stats, format_stats(table, alpha)?)?;
    write_timing_csv(table, fs::File::create(&files.timing)?)?;
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::experiment::{DatasetInfo, RunRecord};

    fn table() -> ResultTable {
        let combiners = ["arith", "h_arith"];
        let mut records = Vec::new();
        for (ci, c) in combiners.iter().enumerate() {
            for run in 0..4 {
                records.push(RunRecord {
                    dataset: "toy".into(),
                    size: 5,
                    combiner: c.to_string(),
                    run,
                    fold: 0,
                    accuracy: 0.5 + 0.1 * ci as f64 + 0.05 * run as f64,
                    seconds: 0.25,
                });
            }
        }
        ResultTable {
            datasets: vec![DatasetInfo {
                name: "toy".into(),
                instances: 40,
                features: 2,
                classes: 2,
                majority_rate: 0.5,
                stratified: true,
            }],
            sizes: vec![5],
            combiners: combiners.map(String::from).to_vec(),
            runs_per_cell: 4,
            records,
            failures: vec![],
        }
    }

    #[test]
    fn results_csv_layout() {
        let mut buf = Vec::new();
        write_results_csv(&table(), &mut buf, true).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next(),
            Some("dataset,size,combiner,run,fold,accuracy,seconds")
        );
        assert_eq!(lines.next(), Some("toy,5,arith,0,0,0.5,0.250000"));
        assert_eq!(text.lines().count(), 9);

        let mut buf = Vec::new();
        write_results_csv(&table(), &mut buf, false).unwrap();
        assert!(String::from_utf8(buf)
            .unwrap()
            .lines()
            .nth(1)
            .unwrap()
            .ends_with("0.5,"));
    }

    #[test]
    fn summary_layout() {
        let s = format_summary(&table());
        assert!(s.contains("H_Arith"));
        assert!(s.contains("0.5750 ± 0.0645"));
        assert!(s.contains("avg rank"));
    }

    #[test]
    fn stats_layout() {
        let s = format_stats(&table(), 0.05).unwrap();
        assert!(s.contains("wins - draws - losses over 1 datasets"));
        assert!(s.contains("0 - 1 - 0") || s.contains("1 - 0 - 0"));
    }

    #[test]
    fn writes_all_files() {
        let dir = tempfile::tempdir().unwrap();
        let files = write_reports(&table(), dir.path(), 0.05, true).unwrap();
        let timing = fs::read_to_string(files.timing).unwrap();
        assert_eq!(timing.lines().nth(1), Some("5,arith,1.000000"));
        assert!(files.summary.exists() && files.stats.exists() && files.results.exists());
    }
}
