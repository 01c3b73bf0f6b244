//! Markdown tables and the per-channel rate chart.

use std::fmt::Write as _;

use hfo_core::analytics::{format_percent, OutcomeRecord, TestRetest};
use hfo_core::PredictionMetrics;

use crate::model::ChannelRate;

pub struct PatientRow<'a> {
    pub outcome: &'a OutcomeRecord,
    pub intervals: usize,
    pub test_retest: Option<&'a TestRetest>,
}

fn list(items: &[String]) -> String {
    if items.is_empty() {
        "--".into()
    } else {
        items.join(", ")
    }
}

pub fn markdown(rows: &[PatientRow<'_>], metrics: &PredictionMetrics) -> String {
    let mut s = String::new();
    s.push_str("| Patient | Intervals | Test-retest | HFO area | Resected | ILAE | Prediction |\n");
    s.push_str("| --- | --- | --- | --- | --- | --- | --- |\n");
    for r in rows {
        let o = r.outcome;
        let retest = r
            .test_retest
            .map_or("--".into(), |t| format!("{:.2}", t.score));
        let _ = writeln!(
            s,
            "| {} | {} | {} | {} | {} | {} | {} |",
            o.patient_id,
            r.intervals,
            retest,
            list(&o.hfo_area),
            list(&o.resection),
            o.ilae_class,
            o.classification
        );
    }
    let c = metrics.counts;
    let _ = write!(s, "\nTP {} TN {} FP {} FN {}\n\n", c.tp, c.tn, c.fp, c.fn_);
    s.push_str("| Metric | SNN prediction [%] |\n| --- | --- |\n");
    for (label, ratio) in metrics.rows() {
        let _ = writeln!(s, "| {label} | {} |", format_percent(ratio));
    }
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

const BAR_W: f64 = 28.0;
const GAP: f64 = 12.0;
const LEFT: f64 = 60.0;
const TOP: f64 = 30.0;
const PLOT_H: f64 = 200.0;
const BOTTOM: f64 = 70.0;

/// Bar chart of mean HFO rate per channel with standard-error whiskers.
pub fn rate_chart(title: &str, rates: &[ChannelRate], area: &[String]) -> String {
    let top_rate = rates
        .iter()
        .map(|r| r.mean_per_min + r.sem_per_min.unwrap_or(0.0))
        .fold(0.0, f64::max);
    let ymax = if top_rate > 0.0 { top_rate * 1.1 } else { 1.0 };
    let y = |v: f64| TOP + PLOT_H * (1.0 - v / ymax);
    let width = LEFT + rates.len() as f64 * (BAR_W + GAP) + GAP;
    let height = TOP + PLOT_H + BOTTOM;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{LEFT}" y="18" font-size="13">{}</text>"#,
        escape(title)
    );
    let _ = writeln!(
        s,
        r#"<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{:.2}" stroke="black"/>"#,
        TOP + PLOT_H
    );
    let _ = writeln!(
        s,
        r#"<line x1="{LEFT}" y1="{0:.2}" x2="{width:.2}" y2="{0:.2}" stroke="black"/>"#,
        TOP + PLOT_H
    );
    for k in 0..=4 {
        let v = ymax * k as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{v:.2}</text>"#,
            LEFT - 6.0,
            y(v) + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text transform="translate(14 {:.2}) rotate(-90)" text-anchor="middle">HFO rate [1/min]</text>"#,
        TOP + PLOT_H / 2.0
    );
    for (i, r) in rates.iter().enumerate() {
        let x = LEFT + GAP + i as f64 * (BAR_W + GAP);
        let fill = if area.contains(&r.channel) {
            "#c0392b"
        } else {
            "#7f8c8d"
        };
        let _ = writeln!(
            s,
            r#"<rect x="{x:.2}" y="{:.2}" width="{BAR_W}" height="{:.2}" fill="{fill}"/>"#,
            y(r.mean_per_min),
            PLOT_H * r.mean_per_min / ymax
        );
        if let Some(sem) = r.sem_per_min {
            let cx = x + BAR_W / 2.0;
            let (lo, hi) = (y((r.mean_per_min - sem).max(0.0)), y(r.mean_per_min + sem));
            let _ = writeln!(
                s,
                r#"<path d="M{cx:.2} {lo:.2}V{hi:.2}M{:.2} {hi:.2}H{:.2}M{:.2} {lo:.2}H{:.2}" stroke="black"/>"#,
                cx - 5.0,
                cx + 5.0,
                cx - 5.0,
                cx + 5.0
            );
        }
        let lx = x + BAR_W / 2.0;
        let ly = TOP + PLOT_H + 10.0;
        let _ = writeln!(
            s,
            r#"<text transform="translate({lx:.2} {ly:.2}) rotate(60)">{}</text>"#,
            escape(&r.channel)
        );
    }
    s.push_str("</svg>\n");
    s
}
