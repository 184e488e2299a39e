//! Standalone SVG charts: ROC curves and grouped bar charts.

use std::fmt::Write;

use facefuse_core::metrics::RocCurve;

use crate::error::{Error, Result};
use crate::numfmt::{num, opt};

const PALETTE: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

pub fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// ROC as `(FMR, 1 - FNMR)` on the unit square.
pub fn roc_svg(roc: &RocCurve, title: &str) -> String {
    let (w, h, m) = (420.0, 420.0, 50.0);
    let side = w - 2.0 * m;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="25" text-anchor="middle" font-family="sans-serif" font-size="14">{}</text>"#,
        w / 2.0,
        escape(title)
    );
    let _ = writeln!(
        s,
        r#"<path d="M{m} {m} V{} H{}" fill="none" stroke="black"/>"#,
        m + side,
        m + side
    );
    let _ = writeln!(
        s,
        r##"<path d="M{m} {} L{} {m}" fill="none" stroke="#bbbbbb" stroke-dasharray="4 4"/>"##,
        m + side,
        m + side
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12">FMR</text>"#,
        w / 2.0,
        h - 12.0
    );
    let _ = writeln!(
        s,
        r#"<text x="15" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12" transform="rotate(-90 15 {})">1 - FNMR</text>"#,
        h / 2.0,
        h / 2.0
    );
    let pts: Vec<String> = roc
        .points()
        .iter()
        .rev()
        .map(|p| format!("{:.2},{:.2}", m + p.fmr * side, m + side - (1.0 - p.fnmr) * side))
        .collect();
    let _ = writeln!(
        s,
        r##"<polyline points="{}" fill="none" stroke="#1f77b4" stroke-width="2"/>"##,
        pts.join(" ")
    );
    s.push_str("</svg>\n");
    s
}

/// Values grouped by row (method), one bar per column (setting).
#[derive(Debug, Clone, PartialEq)]
pub struct BarTable {
    pub title: String,
    pub value_label: String,
    pub groups: Vec<String>,
    pub series: Vec<String>,
    /// `values[group][series]`; `None` draws no bar.
    pub values: Vec<Vec<Option<f64>>>,
}

impl BarTable {
    fn validate(&self) -> Result<()> {
        if self.groups.is_empty() || self.series.is_empty() {
            return Err(Error::Validation("cannot render an empty table".into()));
        }
        if self.values.len() != self.groups.len() || self.values.iter().any(|r| r.len() != self.series.len()) {
            return Err(Error::Internal("bar table shape does not match its labels".into()));
        }
        Ok(())
    }
}

/// Only bars are drawn as `<rect>`; legend swatches are circles.
pub fn bar_chart_svg(t: &BarTable) -> Result<String> {
    t.validate()?;
    let bar_w = 10.0;
    let gap = 24.0;
    let (left, top, plot_h) = (60.0, 40.0, 260.0);
    let group_w = bar_w * t.series.len() as f64 + gap;
    let plot_w = group_w * t.groups.len() as f64;
    let legend_h = 16.0 * t.series.len() as f64;
    let (w, h) = (left + plot_w + 20.0, top + plot_h + 90.0 + legend_h);
    let max = t
        .values
        .iter()
        .flatten()
        .flatten()
        .fold(0.0f64, |a, &b| a.max(b))
        .max(1e-12);
    let y_max = if max <= 100.0 && max > 1.0 { 100.0 } else { max };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}">"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="22" text-anchor="middle" font-family="sans-serif" font-size="14">{}</text>"#,
        w / 2.0,
        escape(&t.title)
    );
    let _ = writeln!(
        s,
        r#"<path d="M{left} {top} V{} H{}" fill="none" stroke="black"/>"#,
        top + plot_h,
        left + plot_w
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{:.1}" text-anchor="middle" font-family="sans-serif" font-size="12" transform="rotate(-90 14 {:.1})">{}</text>"#,
        top + plot_h / 2.0,
        top + plot_h / 2.0,
        escape(&t.value_label)
    );
    for (gi, (group, row)) in t.groups.iter().zip(&t.values).enumerate() {
        let x0 = left + gap / 2.0 + gi as f64 * group_w;
        let _ = writeln!(s, r#"<g class="group" data-method="{}">"#, escape(group));
        for (si, v) in row.iter().enumerate() {
            let Some(v) = v else { continue };
            let bh = (v / y_max).clamp(0.0, 1.0) * plot_h;
            let _ = writeln!(
                s,
                r#"<rect x="{:.2}" y="{:.2}" width="{bar_w}" height="{:.2}" fill="{}"><title>{} / {}: {}</title></rect>"#,
                x0 + si as f64 * bar_w,
                top + plot_h - bh,
                bh,
                PALETTE[si % PALETTE.len()],
                escape(group),
                escape(&t.series[si]),
                num(*v)
            );
        }
        let cx = x0 + bar_w * t.series.len() as f64 / 2.0;
        let _ = writeln!(
            s,
            r#"<text x="{cx:.2}" y="{:.2}" text-anchor="end" font-family="sans-serif" font-size="10" transform="rotate(-35 {cx:.2} {:.2})">{}</text>"#,
            top + plot_h + 14.0,
            top + plot_h + 14.0,
            escape(group)
        );
        s.push_str("</g>\n");
    }
    for (si, name) in t.series.iter().enumerate() {
        let y = top + plot_h + 80.0 + 16.0 * si as f64;
        let _ = writeln!(
            s,
            r#"<circle cx="{}" cy="{y:.1}" r="5" fill="{}"/>"#,
            left + 5.0,
            PALETTE[si % PALETTE.len()]
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.1}" font-family="sans-serif" font-size="11">{}</text>"#,
            left + 16.0,
            y + 4.0,
            escape(name)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

/// CSV twin of a bar table: `method,<series...>`.
pub fn bar_table_csv(t: &BarTable) -> Result<Vec<u8>> {
    t.validate()?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["method".to_string()];
    header.extend(t.series.iter().cloned());
    w.write_record(&header).map_err(|e| Error::Internal(e.to_string()))?;
    for (g, row) in t.groups.iter().zip(&t.values) {
        let mut rec = vec![g.clone()];
        rec.extend(row.iter().map(|v| opt(*v)));
        w.write_record(&rec).map_err(|e| Error::Internal(e.to_string()))?;
    }
    w.into_inner().map_err(|e| Error::Internal(e.to_string()))
}

/// Renders a metrics table as CSV bytes plus an SVG bar chart.
pub fn render_report(t: &BarTable) -> Result<(Vec<u8>, String)> {
    Ok((bar_table_csv(t)?, bar_chart_svg(t)?))
}
