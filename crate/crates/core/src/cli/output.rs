//! CSV tables and static SVG line charts.
//!
//! Numbers are written in scientific notation with a fixed number of
//! significant digits, so identical inputs give byte-identical files.

use std::fmt::Write as _;

/// One number with `precision` significant digits.
pub fn format_number(value: f64, precision: usize) -> String {
    format!("{:.*e}", precision.saturating_sub(1), value)
}

/// Comma-separated table with `#`-prefixed metadata lines, LF endings.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub metadata: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn new(columns: &[&str]) -> Self {
        CsvTable {
            metadata: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    /// Builds rows from equally long columns.
    pub fn from_columns(names: &[&str], data: &[&[f64]]) -> Self {
        let mut table = CsvTable::new(names);
        let len = data.first().map_or(0, |c| c.len());
        table.rows = (0..len).map(|i| data.iter().map(|c| c[i]).collect()).collect();
        table
    }

    pub fn render(&self, precision: usize) -> String {
        let mut out = String::new();
        for line in &self.metadata {
            // Embedded newlines would end the comment early.
            let line = line.replace(['\n', '\r'], " ");
            let _ = writeln!(out, "# {line}");
        }
        let _ = writeln!(out, "{}", self.columns.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&v| format_number(v, precision)).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }
}

/// Reads a table written by [`CsvTable::render`].
pub fn parse_csv(text: &str) -> Result<CsvTable, String> {
    let mut metadata = Vec::new();
    let mut columns = None;
    let mut rows = Vec::new();
    for (k, line) in text.lines().enumerate() {
        if let Some(rest) = line.strip_prefix('#') {
            metadata.push(rest.strip_prefix(' ').unwrap_or(rest).to_string());
        } else if columns.is_none() {
            columns = Some(line.split(',').map(str::to_string).collect::<Vec<_>>());
        } else if !line.is_empty() {
            let row = line
                .split(',')
                .map(|cell| cell.parse::<f64>().map_err(|e| format!("line {}: {e}", k + 1)))
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(row);
        }
    }
    Ok(CsvTable {
        metadata,
        columns: columns.ok_or("missing column header")?,
        rows,
    })
}

pub struct Series<'a> {
    pub name: &'a str,
    pub x: &'a [f64],
    pub y: &'a [f64],
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 150.0;
const MARGIN_Y: f64 = 50.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Static line chart. With `log_log` both axes show `log10` of the data and
/// non-positive points are dropped.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series], log_log: bool) -> String {
    let map = |v: f64| if log_log { v.log10() } else { v };
    let points: Vec<Vec<(f64, f64)>> = series
        .iter()
        .map(|s| {
            s.x.iter()
                .zip(s.y)
                .filter(|(x, y)| x.is_finite() && y.is_finite() && (!log_log || (**x > 0.0 && **y > 0.0)))
                .map(|(&x, &y)| (map(x), map(y)))
                .collect()
        })
        .collect();
    let all = points.iter().flatten();
    let (mut x0, mut x1, mut y0, mut y1) = all.fold(
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY),
        |(a, b, c, d), &(x, y)| (a.min(x), b.max(x), c.min(y), d.max(y)),
    );
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 - x0 <= 0.0 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if y1 - y0 <= 0.0 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - 2.0 * MARGIN_Y;
    let sx = |x: f64| MARGIN_LEFT + (x - x0) / (x1 - x0) * plot_w;
    let sy = |y: f64| HEIGHT - MARGIN_Y - (y - y0) / (y1 - y0) * plot_h;
    let tick = |v: f64| {
        if log_log {
            format!("1e{v:.2}")
        } else {
            format!("{v:.3}")
        }
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="25" text-anchor="middle" font-size="15">{}</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        escape(title)
    );
    let _ = writeln!(
        svg,
        r#"<rect x="{MARGIN_LEFT}" y="{MARGIN_Y}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    for k in 0..=4 {
        let fx = x0 + (x1 - x0) * k as f64 / 4.0;
        let fy = y0 + (y1 - y0) * k as f64 / 4.0;
        let (px, py) = (sx(fx), sy(fy));
        let bottom = HEIGHT - MARGIN_Y;
        let _ = writeln!(
            svg,
            r##"<line x1="{px:.2}" y1="{MARGIN_Y}" x2="{px:.2}" y2="{bottom}" stroke="#dddddd"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
            bottom + 16.0,
            tick(fx)
        );
        let right = MARGIN_LEFT + plot_w;
        let _ = writeln!(
            svg,
            r##"<line x1="{MARGIN_LEFT}" y1="{py:.2}" x2="{right}" y2="{py:.2}" stroke="#dddddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
            MARGIN_LEFT - 6.0,
            py + 4.0,
            tick(fy)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 12.0,
        escape(x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{0}" text-anchor="middle" transform="rotate(-90 18 {0})">{1}</text>"#,
        MARGIN_Y + plot_h / 2.0,
        escape(y_label)
    );
    for (k, (s, pts)) in series.iter().zip(&points).enumerate() {
        let color = COLORS[k % COLORS.len()];
        let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            path.join(" ")
        );
        if log_log {
            for &(x, y) in pts {
                let _ = writeln!(svg, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, sx(x), sy(y));
            }
        }
        let ly = MARGIN_Y + 16.0 + 18.0 * k as f64;
        let lx = WIDTH - MARGIN_RIGHT + 12.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            escape(s.name)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
