//! Report files: CSV tables, markdown summary, JSON and SVG charts.

mod svg;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub use svg::line_chart;

use crate::bench::{MethodTrajectory, SensitivityReport};
use crate::error::{Error, Result};
use crate::selectors::Family;

#[derive(Debug, Clone, Default)]
pub struct EmitOptions {
    /// Written into report.md only; `None` keeps every file reproducible.
    pub timestamp: Option<String>,
}

fn opt(v: Option<f64>, digits: usize) -> String {
    v.map_or_else(String::new, |x| format!("{x:.digits$}"))
}

pub fn trajectories_csv(report: &SensitivityReport) -> String {
    let mut s = String::from("method,fraction,mean_r2,fold_std\n");
    for t in &report.trajectories {
        for p in &t.points {
            let _ = writeln!(
                s,
                "{},{:.2},{},{}",
                t.method,
                p.fraction,
                opt(p.mean_r2, 6),
                opt(p.fold_std, 6)
            );
        }
    }
    s
}

fn composite_score(report: &SensitivityReport, t: &MethodTrajectory) -> usize {
    [&report.rank_by_mean_r2, &report.rank_by_abs_slope, &report.rank_by_fluctuation]
        .iter()
        .filter_map(|r| SensitivityReport::position(r, t.method))
        .sum()
}

/// One row per method, ordered by mean R² rank.
pub fn summary_csv(report: &SensitivityReport) -> String {
    let mut s = String::from(
        "method,mean_r2,r2_full,slope,fluctuation,rank_mean_r2,rank_abs_slope,rank_fluctuation,composite_score,composite_rank,error_cells\n",
    );
    for &m in &report.rank_by_mean_r2 {
        let Some(t) = report.trajectory(m) else { continue };
        let pos = |r: &[crate::selectors::Method]| {
            SensitivityReport::position(r, m).map_or_else(String::new, |p| p.to_string())
        };
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{}",
            m,
            opt(t.mean_r2_overall, 6),
            opt(t.r2_full, 6),
            opt(t.slope, 6),
            opt(t.fluctuation, 6),
            pos(&report.rank_by_mean_r2),
            pos(&report.rank_by_abs_slope),
            pos(&report.rank_by_fluctuation),
            composite_score(report, t),
            pos(&report.composite_rank),
            t.error_cells
        );
    }
    s
}

pub fn report_markdown(report: &SensitivityReport, opts: &EmitOptions) -> Result<String> {
    let c = &report.config;
    let mut s = String::from("# Feature-selection sensitivity report\n\n");
    if let Some(ts) = &opts.timestamp {
        let _ = writeln!(s, "Generated: {ts}\n");
    }
    let _ = writeln!(
        s,
        "Target `{}` at horizon {}, {} rows x {} candidate features, {} schedule points ({:.0}% to {:.0}%), {}-fold CV, seed {}.\n",
        c.target_id,
        c.horizon,
        c.n_rows,
        c.n_features,
        c.schedule.len(),
        c.schedule.fractions.first().copied().unwrap_or(1.0) * 100.0,
        c.schedule.fractions.last().copied().unwrap_or(1.0) * 100.0,
        c.folds,
        c.seed
    );
    s.push_str("## Average R² by method\n\n");
    s.push_str("`mean R²` averages over folds and schedule points; `R² (100%)` averages over folds at full size.\n\n");
    s.push_str("| method | mean R² | R² (100%) | slope | fluctuation | rank R² | rank slope | rank fluct. | composite |\n");
    s.push_str("|---|---|---|---|---|---|---|---|---|\n");
    for &m in &report.rank_by_mean_r2 {
        let Some(t) = report.trajectory(m) else { continue };
        let pos = |r: &[crate::selectors::Method]| {
            SensitivityReport::position(r, m).map_or_else(|| "-".to_string(), |p| p.to_string())
        };
        let _ = writeln!(
            s,
            "| {} | {} | {} | {} | {} | {} | {} | {} | {} |",
            m,
            opt(t.mean_r2_overall, 6),
            opt(t.r2_full, 6),
            opt(t.slope, 6),
            opt(t.fluctuation, 6),
            pos(&report.rank_by_mean_r2),
            pos(&report.rank_by_abs_slope),
            pos(&report.rank_by_fluctuation),
            pos(&report.composite_rank)
        );
    }
    s.push_str("\n## Composite ranking\n\n");
    for (i, m) in report.composite_rank.iter().enumerate() {
        let _ = writeln!(s, "{}. {}", i + 1, m);
    }
    let errors: Vec<String> = report
        .trajectories
        .iter()
        .flat_map(|t| {
            t.points.iter().filter_map(move |p| {
                p.error
                    .as_ref()
                    .map(|e| format!("- {} at {:.2}: {}", t.method, p.fraction, e))
            })
        })
        .collect();
    if !errors.is_empty() {
        let _ = writeln!(s, "\n## Error cells ({})\n", errors.len());
        for e in errors {
            let _ = writeln!(s, "{e}");
        }
    }
    s.push_str("\n## Configuration\n\n```json\n");
    s.push_str(&serde_json::to_string_pretty(&report.config)?);
    s.push_str("\n```\n");
    Ok(s)
}

/// Chart file stem and methods per chart: one per family present, then `all`.
pub fn chart_groups(report: &SensitivityReport) -> Vec<(String, Vec<&MethodTrajectory>)> {
    let mut groups = Vec::new();
    for family in [Family::Filter, Family::Wrapper, Family::Embedded, Family::Similarity] {
        let members: Vec<&MethodTrajectory> = report
            .trajectories
            .iter()
            .filter(|t| t.method.family() == family)
            .collect();
        if !members.is_empty() {
            groups.push((family.id().to_string(), members));
        }
    }
    groups.push(("all".to_string(), report.trajectories.iter().collect()));
    groups
}

fn write(path: PathBuf, contents: &str, written: &mut Vec<PathBuf>) -> Result<()> {
    std::fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
    written.push(path);
    Ok(())
}

pub fn emit_report(report: &SensitivityReport, out_dir: &Path, opts: &EmitOptions) -> Result<Vec<PathBuf>> {
    let charts = out_dir.join("charts");
    std::fs::create_dir_all(&charts).map_err(|e| Error::io(&charts, e))?;
    let mut written = Vec::new();
    write(out_dir.join("trajectories.csv"), &trajectories_csv(report), &mut written)?;
    write(out_dir.join("summary.csv"), &summary_csv(report), &mut written)?;
    write(out_dir.join("report.md"), &report_markdown(report, opts)?, &mut written)?;
    let json = serde_json::to_string_pretty(report)? + "\n";
    write(out_dir.join("report.json"), &json, &mut written)?;
    for (name, members) in chart_groups(report) {
        let title = format!("R² vs retained data: {name}");
        write(charts.join(format!("{name}.svg")), &line_chart(&title, &members), &mut written)?;
    }
    Ok(written)
}

pub fn load_report(path: &Path) -> Result<SensitivityReport> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}
