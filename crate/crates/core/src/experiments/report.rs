use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::{Algorithm, ExperimentReport, OutputFormat, ReportRow};
use crate::error::Result;

pub const ERRORS_HEADER: &str = "algorithm,m,error_avg,error_max,cputime_s,quality_avg,quality_min";
pub const NORMTABLE_HEADER: &str = "n,measured_max_norm,theoretical_bound";
pub const SELECTION_HEADER: &str = "algorithm,iteration,selected,score";

fn num(v: f64) -> String {
    format!("{v:.10e}")
}

pub fn errors_csv(report: &ExperimentReport) -> String {
    let mut s = String::from(ERRORS_HEADER);
    s.push('\n');
    for r in &report.rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            r.algorithm,
            r.m,
            num(r.error_avg),
            num(r.error_max),
            num(r.cputime_s),
            num(r.quality_avg),
            num(r.quality_min)
        );
    }
    s
}

pub fn normtable_csv(report: &ExperimentReport) -> Option<String> {
    let rows = report.norm_rows.as_ref()?;
    let mut s = String::from(NORMTABLE_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(s, "{},{},{}", r.n, num(r.measured_max_norm), num(r.theoretical_bound));
    }
    Some(s)
}

pub fn selection_csv(report: &ExperimentReport) -> String {
    let mut s = String::from(SELECTION_HEADER);
    s.push('\n');
    for run in &report.runs {
        for (k, score) in run.scores.iter().enumerate() {
            let sel = run.selected.get(k).map(|i| i.to_string()).unwrap_or_default();
            let _ = writeln!(s, "{},{},{},{}", run.algorithm, k + 1, sel, num(*score));
        }
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    ErrorAvg,
    ErrorMax,
    Cputime,
    QualityAvg,
    QualityMin,
}

impl Metric {
    pub const ALL: [Metric; 5] = [
        Metric::ErrorAvg,
        Metric::ErrorMax,
        Metric::Cputime,
        Metric::QualityAvg,
        Metric::QualityMin,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Metric::ErrorAvg => "error_avg",
            Metric::ErrorMax => "error_max",
            Metric::Cputime => "cputime_s",
            Metric::QualityAvg => "quality_avg",
            Metric::QualityMin => "quality_min",
        }
    }

    fn get(&self, r: &ReportRow) -> f64 {
        match self {
            Metric::ErrorAvg => r.error_avg,
            Metric::ErrorMax => r.error_max,
            Metric::Cputime => r.cputime_s,
            Metric::QualityAvg => r.quality_avg,
            Metric::QualityMin => r.quality_min,
        }
    }
}

const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];
const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 120.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;

/// Line chart of one metric against `m` with a logarithmic y axis.
/// Non-positive and non-finite values are left out.
pub fn svg_chart(rows: &[ReportRow], metric: Metric) -> String {
    let mut algs: Vec<Algorithm> = Vec::new();
    for r in rows {
        if !algs.contains(&r.algorithm) {
            algs.push(r.algorithm);
        }
    }
    let points: Vec<(usize, f64, f64)> = rows
        .iter()
        .filter_map(|r| {
            let v = metric.get(r);
            (v > 0.0 && v.is_finite()).then(|| {
                let a = algs.iter().position(|&a| a == r.algorithm).unwrap_or(0);
                (a, r.m as f64, v.log10())
            })
        })
        .collect();
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="18" text-anchor="middle">{}</text>"#,
        W / 2.0,
        metric.name()
    );
    let (pw, ph) = (W - LEFT - RIGHT, H - TOP - BOTTOM);
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    if points.is_empty() {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">no positive values</text>"#,
            LEFT + pw / 2.0,
            TOP + ph / 2.0
        );
        s.push_str("</svg>\n");
        return s;
    }
    let fold =
        |f: fn(f64, f64) -> f64, init: f64, sel: fn(&(usize, f64, f64)) -> f64| points.iter().map(sel).fold(init, f);
    let (x0, x1) = (
        fold(f64::min, f64::INFINITY, |p| p.1),
        fold(f64::max, f64::NEG_INFINITY, |p| p.1),
    );
    let y0 = fold(f64::min, f64::INFINITY, |p| p.2).floor();
    let mut y1 = fold(f64::max, f64::NEG_INFINITY, |p| p.2).ceil();
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let xspan = if x1 > x0 { x1 - x0 } else { 1.0 };
    let px = |x: f64| LEFT + (x - x0) / xspan * pw;
    let py = |y: f64| TOP + (y1 - y) / (y1 - y0) * ph;

    let step = ((y1 - y0) / 8.0).ceil().max(1.0);
    let mut e = y0;
    while e <= y1 {
        let y = py(e);
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd"/>"##,
            LEFT + pw
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">1e{}</text>"#,
            LEFT - 6.0,
            y + 4.0,
            e as i64
        );
        e += step;
    }
    let mut ms: Vec<f64> = points.iter().map(|p| p.1).collect();
    ms.sort_by(f64::total_cmp);
    ms.dedup();
    for m in &ms {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            px(*m),
            TOP + ph + 16.0,
            m
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">m</text>"#,
        LEFT + pw / 2.0,
        H - 10.0
    );
    for (k, alg) in algs.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let pts: Vec<String> = points
            .iter()
            .filter(|p| p.0 == k)
            .map(|p| format!("{:.2},{:.2}", px(p.1), py(p.2)))
            .collect();
        if !pts.is_empty() {
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
                pts.join(" ")
            );
        }
        let ly = TOP + 16.0 + 18.0 * k as f64;
        let lx = LEFT + pw + 12.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#,
            lx + 20.0
        );
        let _ = writeln!(s, r#"<text x="{}" y="{}">{alg}</text>"#, lx + 26.0, ly + 4.0);
    }
    s.push_str("</svg>\n");
    s
}

/// Writes the requested formats into `dir` and returns the created paths.
pub fn write_report(report: &ExperimentReport, dir: &Path, formats: &[OutputFormat]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut put = |name: &str, body: String| -> Result<()> {
        let path = dir.join(name);
        fs::write(&path, body)?;
        written.push(path);
        Ok(())
    };
    if formats.contains(&OutputFormat::Csv) {
        put("errors.csv", errors_csv(report))?;
        put("selection.csv", selection_csv(report))?;
        if let Some(t) = normtable_csv(report) {
            put("normtable.csv", t)?;
        }
    }
    if formats.contains(&OutputFormat::Svg) {
        for metric in Metric::ALL {
            put(&format!("{}.svg", metric.name()), svg_chart(&report.rows, metric))?;
        }
    }
    if formats.contains(&OutputFormat::Json) {
        let mut body = serde_json::to_string_pretty(report).expect("report serializes");
        body.push('\n');
        put("report.json", body)?;
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(algorithm: Algorithm, m: usize, e: f64) -> ReportRow {
        ReportRow {
            algorithm,
            m,
            error_avg: e,
            error_max: 2.0 * e,
            cputime_s: 0.0,
            quality_avg: 0.0,
            quality_min: f64::INFINITY,
        }
    }

    #[test]
    fn chart_skips_non_positive_values() {
        let rows = vec![
            row(Algorithm::Nga, 3, 0.1),
            row(Algorithm::Nga, 6, 1e-4),
            row(Algorithm::Pod, 3, 0.0),
        ];
        let svg = svg_chart(&rows, Metric::ErrorAvg);
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert!(svg_chart(&rows, Metric::Cputime).contains("no positive values"));
    }

    #[test]
    fn number_format() {
        assert_eq!(num(0.5), "5.0000000000e-1");
        assert_eq!(num(f64::INFINITY), "inf");
    }
}
