//! The `report` command: renders ROC, precision-recall, and reliability
//! plots as static SVG from the stored curve exports, and tabulates the
//! internal → external attenuation of every scalar metric.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::evaluate::{CohortReport, ModelReport};
use super::{io_err, BundlePaths, RunnerError};

const MODEL_COLORS: [(&str, &str); 2] = [("xgb_rf", "#c0392b"), ("svm_lr", "#2471a3")];

/// Per-model metric deltas `to_cohort - from_cohort`; negative values
/// mean the metric attenuated on the external cohort.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttenuationTable {
    pub from_cohort: String,
    pub to_cohort: String,
    pub models: BTreeMap<String, BTreeMap<String, f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportSummary {
    pub cohorts: Vec<String>,
    pub plots: Vec<PathBuf>,
    pub attenuation: Option<AttenuationTable>,
}

fn scalar_metrics(m: &ModelReport) -> BTreeMap<String, f64> {
    BTreeMap::from([
        ("auroc".to_string(), m.auroc),
        ("auprc".to_string(), m.auprc),
        ("brier".to_string(), m.brier),
        ("cal_slope".to_string(), m.cal_slope),
        ("cal_intercept".to_string(), m.cal_intercept),
        ("accuracy".to_string(), m.thresholded.accuracy),
        ("precision".to_string(), m.thresholded.precision),
        ("recall".to_string(), m.thresholded.recall),
        ("f1".to_string(), m.thresholded.f1),
    ])
}

fn attenuation(internal: &CohortReport, external: &CohortReport) -> AttenuationTable {
    let mut models = BTreeMap::new();
    for (name, int_m) in &internal.models {
        let Some(ext_m) = external.models.get(name) else { continue };
        let int_s = scalar_metrics(int_m);
        let deltas: BTreeMap<String, f64> = scalar_metrics(ext_m)
            .into_iter()
            .map(|(k, v)| {
                let d = v - int_s[&k];
                (k, d)
            })
            .collect();
        models.insert(name.clone(), deltas);
    }
    AttenuationTable {
        from_cohort: internal.cohort.clone(),
        to_cohort: external.cohort.clone(),
        models,
    }
}

// SVG geometry: fixed canvas, unit-square plot area for all three chart
// kinds (every axis here lives on [0, 1]).
const W: f64 = 640.0;
const H: f64 = 480.0;
const L: f64 = 70.0;
const R: f64 = 620.0;
const T: f64 = 40.0;
const B: f64 = 420.0;

fn px(v: f64) -> f64 {
    L + v * (R - L)
}

fn py(v: f64) -> f64 {
    B - v * (B - T)
}

struct Series {
    label: String,
    color: String,
    points: Vec<(f64, f64)>,
    markers: bool,
}

fn render_chart(
    title: &str,
    x_label: &str,
    y_label: &str,
    series: &[Series],
    diagonal: bool,
    baseline: Option<(f64, String)>,
) -> String {
    let mut s = String::new();
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" \
         viewBox=\"0 0 {W} {H}\" font-family=\"Helvetica, Arial, sans-serif\">\n"
    ));
    s.push_str(&format!(
        "  <rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n  <text x=\"{:.1}\" y=\"24\" \
         text-anchor=\"middle\" font-size=\"16\">{title}</text>\n",
        (L + R) / 2.0
    ));
    s.push_str(&format!(
        "  <rect x=\"{L}\" y=\"{T}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"none\" \
         stroke=\"#333\" stroke-width=\"1\"/>\n",
        R - L,
        B - T
    ));
    for i in 0..=5 {
        let v = i as f64 / 5.0;
        s.push_str(&format!(
            "  <line x1=\"{:.1}\" y1=\"{B}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"#333\"/>\n  \
             <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"11\">{v:.1}</text>\n",
            px(v),
            px(v),
            B + 5.0,
            px(v),
            B + 18.0
        ));
        s.push_str(&format!(
            "  <line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{L}\" y2=\"{:.1}\" stroke=\"#333\"/>\n  \
             <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\" font-size=\"11\">{v:.1}</text>\n",
            L - 5.0,
            py(v),
            py(v),
            L - 8.0,
            py(v) + 4.0
        ));
    }
    s.push_str(&format!(
        "  <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"13\">{x_label}</text>\n",
        (L + R) / 2.0,
        B + 40.0
    ));
    s.push_str(&format!(
        "  <text x=\"20\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"13\" \
         transform=\"rotate(-90 20 {:.1})\">{y_label}</text>\n",
        (T + B) / 2.0,
        (T + B) / 2.0
    ));
    if diagonal {
        s.push_str(&format!(
            "  <line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"#999\" \
             stroke-dasharray=\"5,4\"/>\n",
            px(0.0),
            py(0.0),
            px(1.0),
            py(1.0)
        ));
    }
    if let Some((level, label)) = &baseline {
        s.push_str(&format!(
            "  <line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"#999\" \
             stroke-dasharray=\"5,4\"/>\n  <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\" \
             font-size=\"11\" fill=\"#666\">{label}</text>\n",
            px(0.0),
            py(*level),
            px(1.0),
            py(*level),
            px(1.0) - 4.0,
            py(*level) - 5.0
        ));
    }
    for sr in series {
        let pts: Vec<String> =
            sr.points.iter().map(|(x, y)| format!("{:.2},{:.2}", px(*x), py(*y))).collect();
        s.push_str(&format!(
            "  <polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.8\" points=\"{}\"/>\n",
            sr.color,
            pts.join(" ")
        ));
        if sr.markers {
            for (x, y) in &sr.points {
                s.push_str(&format!(
                    "  <circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{}\"/>\n",
                    px(*x),
                    py(*y),
                    sr.color
                ));
            }
        }
    }
    for (i, sr) in series.iter().enumerate() {
        let y = B - 16.0 - 18.0 * (series.len() - 1 - i) as f64;
        s.push_str(&format!(
            "  <line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"{}\" \
             stroke-width=\"1.8\"/>\n  <text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\">{}</text>\n",
            R - 150.0,
            y - 4.0,
            R - 120.0,
            y - 4.0,
            sr.color,
            R - 112.0,
            y,
            sr.label
        ));
    }
    s.push_str("</svg>\n");
    s
}

fn read_xy_csv(path: &Path) -> Result<Vec<(f64, f64)>, RunnerError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for line in text.lines().skip(1) {
        let mut cells = line.split(',');
        let (Some(a), Some(b)) = (cells.next(), cells.next()) else { continue };
        let (Ok(x), Ok(y)) = (a.parse::<f64>(), b.parse::<f64>()) else {
            return Err(RunnerError::Bundle(format!("bad curve row in {}", path.display())));
        };
        out.push((x, y));
    }
    Ok(out)
}

/// (mean_predicted, observed_frequency) for non-empty bins.
fn read_reliability_csv(path: &Path) -> Result<Vec<(f64, f64)>, RunnerError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for line in text.lines().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 5 {
            return Err(RunnerError::Bundle(format!("bad reliability row in {}", path.display())));
        }
        let count: usize = cells[4]
            .parse()
            .map_err(|_| RunnerError::Bundle(format!("bad count in {}", path.display())))?;
        if count == 0 {
            continue;
        }
        match (cells[2].parse::<f64>(), cells[3].parse::<f64>()) {
            (Ok(x), Ok(y)) => out.push((x, y)),
            _ => return Err(RunnerError::Bundle(format!("bad reliability row in {}", path.display()))),
        }
    }
    Ok(out)
}

fn write_text(path: &Path, text: &str) -> Result<(), RunnerError> {
    crate::preprocess::atomic_write(path, text.as_bytes()).map_err(io_err(path))
}

fn cohort_series(
    paths: &BundlePaths,
    cohort: &str,
    kind: &str,
    markers: bool,
) -> Result<Vec<Series>, RunnerError> {
    let mut series = Vec::new();
    for (model, color) in MODEL_COLORS {
        let path = paths.curve(cohort, model, kind);
        if !path.exists() {
            continue;
        }
        let points = if kind == "reliability" {
            read_reliability_csv(&path)?
        } else {
            read_xy_csv(&path)?
        };
        series.push(Series {
            label: model.to_string(),
            color: color.to_string(),
            points,
            markers,
        });
    }
    Ok(series)
}

fn fmt_row(name: &str, m: &ModelReport) -> String {
    format!(
        "| {name} | {:.3} [{:.3}, {:.3}] | {:.3} [{:.3}, {:.3}] | {:.4} | {:.3} | {:+.3} | {:.3} | {:.3} | {:.3} | {:.3} |\n",
        m.auroc,
        m.auroc_ci[0],
        m.auroc_ci[1],
        m.auprc,
        m.auprc_ci[0],
        m.auprc_ci[1],
        m.brier,
        m.cal_slope,
        m.cal_intercept,
        m.thresholded.accuracy,
        m.thresholded.precision,
        m.thresholded.recall,
        m.thresholded.f1
    )
}

/// Renders plots and the summary for every evaluated cohort. With both
/// an internal and an external report present, the attenuation table is
/// written as well; with one cohort it is omitted with a notice.
pub fn cmd_report(out: &Path) -> Result<ReportSummary, RunnerError> {
    let paths = BundlePaths::new(out);
    let dir = paths.reports_dir();
    let mut cohorts: Vec<String> = match std::fs::read_dir(&dir) {
        Ok(entries) => entries
            .filter_map(|e| e.ok())
            .filter_map(|e| {
                let name = e.file_name().to_string_lossy().into_owned();
                name.strip_suffix(".json").map(str::to_string)
            })
            .collect(),
        Err(_) => return Err(RunnerError::MissingReports(dir)),
    };
    cohorts.sort();
    if cohorts.is_empty() {
        return Err(RunnerError::MissingReports(dir));
    }
    std::fs::create_dir_all(paths.plots_dir()).map_err(io_err(&paths.plots_dir()))?;

    let mut reports: BTreeMap<String, CohortReport> = BTreeMap::new();
    for cohort in &cohorts {
        reports.insert(cohort.clone(), super::read_json(&paths.report(cohort))?);
    }

    let mut plots = Vec::new();
    let mut md = String::from("# Evaluation summary\n");
    for cohort in &cohorts {
        let report = &reports[cohort];
        let roc = cohort_series(&paths, cohort, "roc", false)?;
        let pr = cohort_series(&paths, cohort, "pr", false)?;
        let rel = cohort_series(&paths, cohort, "reliability", true)?;

        let roc_path = paths.plot(cohort, "roc");
        write_text(
            &roc_path,
            &render_chart(
                &format!("ROC: {cohort}"),
                "False positive rate",
                "True positive rate",
                &roc,
                true,
                None,
            ),
        )?;
        let pr_path = paths.plot(cohort, "pr");
        write_text(
            &pr_path,
            &render_chart(
                &format!("Precision-Recall: {cohort}"),
                "Recall",
                "Precision",
                &pr,
                false,
                Some((report.prevalence, format!("baseline {:.3}", report.prevalence))),
            ),
        )?;
        let rel_path = paths.plot(cohort, "reliability");
        write_text(
            &rel_path,
            &render_chart(
                &format!("Reliability: {cohort}"),
                "Mean predicted probability",
                "Observed frequency",
                &rel,
                true,
                None,
            ),
        )?;
        plots.extend([roc_path, pr_path, rel_path]);

        md.push_str(&format!(
            "\n## Cohort `{cohort}`\n\nprevalence (PR baseline): {:.3}\n\n",
            report.prevalence
        ));
        md.push_str(
            "| model | AUROC [95% CI] | AUPRC [95% CI] | Brier | cal slope | cal intercept | acc | prec | rec | F1 |\n\
             |---|---|---|---|---|---|---|---|---|---|\n",
        );
        for (name, m) in &report.models {
            md.push_str(&fmt_row(name, m));
        }
        md.push_str(&format!(
            "\npaired tests: ΔAUROC {:+.4} (DeLong p = {:.4}); discordant b = {}, c = {} \
             (McNemar statistic {:.3}, p = {:.4})\n",
            report.tests.delong.delta_auc,
            report.tests.delong.p,
            report.tests.mcnemar.b,
            report.tests.mcnemar.c,
            report.tests.mcnemar.statistic,
            report.tests.mcnemar.p
        ));
    }

    let att = match (reports.get("internal_test"), reports.get("external")) {
        (Some(i), Some(e)) => Some(attenuation(i, e)),
        _ => None,
    };
    match &att {
        Some(table) => {
            super::write_json(&paths.attenuation(), table)?;
            md.push_str(&format!(
                "\n## Attenuation {} → {}\n\n| model | metric | delta |\n|---|---|---|\n",
                table.from_cohort, table.to_cohort
            ));
            for (model, metrics) in &table.models {
                for (metric, delta) in metrics {
                    md.push_str(&format!("| {model} | {metric} | {delta:+.4} |\n"));
                }
            }
        }
        None => {
            md.push_str(
                "\nAttenuation table omitted: it needs both an internal_test and an external \
                 report.\n",
            );
        }
    }
    write_text(&paths.summary(), &md)?;

    Ok(ReportSummary { cohorts, plots, attenuation: att })
}
