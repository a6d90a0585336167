//! CSV and SVG output.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{CliError, Result};
use crate::experiment::ResultRow;

pub const CSV_HEADER: &str =
    "experiment,instance,algorithm,partition,k,m,stat,value,ratio,oracle_calls,wall_ms";

pub fn csv_string(rows: &[ResultRow]) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|source| CliError::Csv {
            path: "<memory>".into(),
            source,
        })?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::io("<memory>", e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn emit_csv(rows: &[ResultRow], path: &Path) -> Result<()> {
    if rows.is_empty() {
        return Err(CliError::config("rows", "nothing to write"));
    }
    let text = csv_string(rows)?;
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn read_csv(path: &Path) -> Result<Vec<ResultRow>> {
    let csv_err = |source| CliError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    r.deserialize().map(|row| row.map_err(csv_err)).collect()
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 56.0;
const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Ratio-versus-k line chart with one polyline per (algorithm, partition).
/// Standard-error rows are skipped.
pub fn plot_svg(rows: &[ResultRow]) -> Result<String> {
    let first = rows
        .first()
        .ok_or_else(|| CliError::Plot("no rows to plot".into()))?;
    if rows.iter().any(|r| r.experiment != first.experiment) {
        return Err(CliError::Plot("rows mix several experiments".into()));
    }
    let mut series: BTreeMap<(String, String), Vec<(usize, f64)>> = BTreeMap::new();
    for r in rows.iter().filter(|r| !r.stat.starts_with("se_")) {
        series
            .entry((r.algorithm.clone(), r.partition.clone()))
            .or_default()
            .push((r.k, r.ratio));
    }
    for points in series.values_mut() {
        points.sort_by_key(|&(k, _)| k);
    }

    let (k_min, k_max) = rows
        .iter()
        .fold((usize::MAX, 0), |(lo, hi), r| (lo.min(r.k), hi.max(r.k)));
    let y_max = rows.iter().map(|r| r.ratio).fold(1.0f64, f64::max);
    let x = |k: usize| {
        let span = (k_max - k_min).max(1) as f64;
        MARGIN + (k - k_min) as f64 / span * (WIDTH - 2.0 * MARGIN)
    };
    let y = |ratio: f64| HEIGHT - MARGIN - ratio.max(0.0) / y_max * (HEIGHT - 2.0 * MARGIN);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<title>{}</title>"#, escape(&first.experiment));
    let (x0, y0, x1, y1) = (MARGIN, HEIGHT - MARGIN, WIDTH - MARGIN, MARGIN);
    let _ = writeln!(
        svg,
        r#"<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">k</text>"#,
        WIDTH / 2.0,
        HEIGHT - 16.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">ratio</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
    for k in [k_min, k_max] {
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{}" text-anchor="middle">{k}</text>"#,
            x(k),
            y0 + 16.0
        );
    }
    for tick in [0.0, y_max] {
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{:.1}" text-anchor="end">{tick:.2}</text>"#,
            x0 - 6.0,
            y(tick)
        );
    }

    for (i, ((alg, part), points)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let coords: Vec<String> = points
            .iter()
            .map(|&(k, r)| format!("{:.1},{:.1}", x(k), y(r)))
            .collect();
        let label = escape(&format!("{alg} ({part})"));
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"><title>{label}</title></polyline>"#,
            coords.join(" ")
        );
        let ly = MARGIN + 16.0 * i as f64;
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{ly}" fill="{color}" font-size="12">{label}</text>"#,
            WIDTH - MARGIN - 150.0
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn emit_plot(rows: &[ResultRow], path: &Path) -> Result<()> {
    let svg = plot_svg(rows)?;
    std::fs::write(path, svg).map_err(|e| CliError::io(path, e))
}
