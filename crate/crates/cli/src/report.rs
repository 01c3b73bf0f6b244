//! `report`: outcome classification and group metrics from patient reports.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use hfo_core::analytics::{compute_metrics, format_percent, OutcomeRecord};
use serde::Serialize;

use crate::config::{self, DEFAULT_OUT};
use crate::failure;
use crate::model::{file_stem, PatientReport};
use crate::render::{self, PatientRow};

#[derive(Debug, Clone, clap::Args)]
pub struct ReportArgs {
    /// Patient report files, or directories holding them.
    #[arg(value_name = "REPORT")]
    pub reports: Vec<PathBuf>,
    /// CSV with header patient_id,ilae,resected; resected channels are
    /// separated by ';'.
    #[arg(long)]
    pub resection: PathBuf,
    #[arg(long, default_value = DEFAULT_OUT)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Resection {
    pub ilae: u8,
    pub channels: Vec<String>,
}

pub fn parse_resection(text: &str) -> Result<BTreeMap<String, Resection>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == "patient_id,ilae,resected" => {}
        _ => {
            return Err(failure::data(
                "resection header must be patient_id,ilae,resected",
            ))
        }
    }
    let mut out = BTreeMap::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let row = idx + 1;
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 3 {
            return Err(failure::data(format!(
                "resection row {row}: expected 3 fields, found {}",
                f.len()
            )));
        }
        let ilae = f[1].parse::<u8>().map_err(|_| {
            failure::data(format!(
                "resection row {row}: ILAE class {:?} is not an integer",
                f[1]
            ))
        })?;
        let channels = f[2]
            .split(';')
            .map(str::trim)
            .filter(|c| !c.is_empty())
            .map(String::from)
            .collect();
        if out
            .insert(f[0].to_string(), Resection { ilae, channels })
            .is_some()
        {
            return Err(failure::data(format!(
                "resection row {row}: patient {} listed twice",
                f[0]
            )));
        }
    }
    Ok(out)
}

fn report_files(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut inner: Vec<PathBuf> = fs::read_dir(p)
                .with_context(|| format!("listing {}", p.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "json"))
                .collect();
            inner.sort();
            files.extend(inner);
        } else if p.is_file() {
            files.push(p.clone());
        } else {
            return Err(failure::config(format!("{} does not exist", p.display())));
        }
    }
    Ok(files)
}

fn read_report(path: &Path) -> Result<PatientReport> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text)
        .map_err(|e| failure::data(format!("report {}: {e}", path.display())))
}

#[derive(Serialize)]
struct PatientSummary<'a> {
    #[serde(flatten)]
    outcome: &'a OutcomeRecord,
    intervals: usize,
    test_retest: Option<f64>,
}

#[derive(Serialize)]
struct MetricRow {
    label: &'static str,
    percent: String,
    num: Option<u64>,
    den: Option<u64>,
}

#[derive(Serialize)]
struct MetricsFile<'a> {
    patients: Vec<PatientSummary<'a>>,
    counts: hfo_core::analytics::ConfusionCounts,
    metrics: Vec<MetricRow>,
}

#[derive(Serialize)]
struct ReportManifest<'a> {
    reports: &'a [PathBuf],
    resection: &'a Path,
    out: &'a Path,
}

pub fn run(args: &ReportArgs) -> Result<()> {
    if !args.resection.is_file() {
        return Err(failure::config(format!(
            "{} does not exist",
            args.resection.display()
        )));
    }
    let files = report_files(&args.reports)?;
    if files.is_empty() {
        return Err(failure::data("no patient reports given"));
    }
    let text = fs::read_to_string(&args.resection)
        .with_context(|| format!("reading {}", args.resection.display()))?;
    let resections = parse_resection(&text)?;
    let mut reports = files
        .iter()
        .map(|f| read_report(f))
        .collect::<Result<Vec<_>>>()?;
    reports.sort_by(|a, b| a.patient_id.cmp(&b.patient_id));
    if let Some(w) = reports
        .windows(2)
        .find(|w| w[0].patient_id == w[1].patient_id)
    {
        return Err(failure::data(format!(
            "patient {} has two reports",
            w[0].patient_id
        )));
    }
    let mut outcomes = Vec::new();
    for r in &mut reports {
        let res = resections.get(&r.patient_id).ok_or_else(|| {
            failure::data(format!(
                "patient {} is missing from the resection file",
                r.patient_id
            ))
        })?;
        let o = OutcomeRecord::new(
            r.patient_id.clone(),
            r.hfo_area.clone(),
            res.channels.clone(),
            res.ilae,
        )
        .map_err(|e| failure::data(format!("patient {}: {e}", r.patient_id)))?;
        r.classification = Some(o.classification);
        outcomes.push(o);
    }
    let classes: Vec<_> = outcomes.iter().map(|o| o.classification).collect();
    let metrics = compute_metrics(&classes)?;

    let rows: Vec<PatientRow> = reports
        .iter()
        .zip(&outcomes)
        .map(|(r, o)| PatientRow {
            outcome: o,
            intervals: r.intervals.len(),
            test_retest: r.test_retest.as_ref(),
        })
        .collect();
    let md = render::markdown(&rows, &metrics);
    let file = MetricsFile {
        patients: rows
            .iter()
            .map(|r| PatientSummary {
                outcome: r.outcome,
                intervals: r.intervals,
                test_retest: r.test_retest.map(|t| t.score),
            })
            .collect(),
        counts: metrics.counts,
        metrics: metrics
            .rows()
            .iter()
            .map(|(label, ratio)| MetricRow {
                label,
                percent: format_percent(*ratio),
                num: ratio.map(|r| r.num),
                den: ratio.map(|r| r.den),
            })
            .collect(),
    };

    config::create_dir(&args.out)?;
    config::write_json(&args.out.join("metrics.json"), &file)?;
    let md_path = args.out.join("metrics.md");
    fs::write(&md_path, &md).with_context(|| format!("writing {}", md_path.display()))?;
    let charts = args.out.join("charts");
    config::create_dir(&charts)?;
    for r in &reports {
        let svg = render::rate_chart(&format!("Patient {}", r.patient_id), &r.rates, &r.hfo_area);
        let p = charts.join(format!("{}.svg", file_stem(&r.patient_id)));
        fs::write(&p, svg).with_context(|| format!("writing {}", p.display()))?;
    }
    let manifest = ReportManifest {
        reports: &files,
        resection: &args.resection,
        out: &args.out,
    };
    config::write_manifest(&args.out, "report", &manifest)?;
    print!("{md}");
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resection_file_parses() {
        let m = parse_resection("patient_id,ilae,resected\n1,1,AR1-2;AR2-3\n2,3,\n").unwrap();
        assert_eq!(m["1"].channels, ["AR1-2", "AR2-3"]);
        assert_eq!((m["2"].ilae, m["2"].channels.len()), (3, 0));
    }

    #[test]
    fn bad_resection_rows_are_data_errors() {
        for text in [
            "id,ilae\n",
            "patient_id,ilae,resected\n1,x,A\n",
            "patient_id,ilae,resected\n1,1\n",
        ] {
            let e = parse_resection(text).unwrap_err();
            assert_eq!(failure::exit_code(&e), 3, "{text}");
        }
    }
}
