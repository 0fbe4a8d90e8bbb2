//! File emitters: CSV data (always) and self-contained SVG plots (on
//! request). CSV is the source of truth; file names derive from the config
//! hash so identical experiments overwrite their own outputs.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::{scaling_groups, BenchReport, GroupResult};
use crate::error::Result;
use crate::qubo::LambdaScanPoint;

/// Writes the boxplot CSVs, scaling CSVs and the JSON run manifest for a
/// benchmark, plus SVG renderings when `svg` is set. Returns every path
/// written.
pub fn write_benchmark_outputs(report: &BenchReport, svg: bool) -> Result<Vec<PathBuf>> {
    let dir = &report.config.output_dir;
    fs::create_dir_all(dir)?;
    let prefix = format!("bench_{:016x}", report.config.content_hash());
    let mut files = Vec::new();

    let mut sides: Vec<usize> = report.groups.iter().map(|g| g.l).collect();
    sides.sort_unstable();
    sides.dedup();
    for l in sides {
        let groups: Vec<&GroupResult> =
            report.groups.iter().filter(|g| g.l == l).collect();
        let raw_path = dir.join(format!("{prefix}_L{l}_raw.csv"));
        fs::write(&raw_path, boxplot_csv(report, &groups, false))?;
        files.push(raw_path);
        let trimmed_path = dir.join(format!("{prefix}_L{l}_trimmed.csv"));
        fs::write(&trimmed_path, boxplot_csv(report, &groups, true))?;
        files.push(trimmed_path);
    }

    let scaling = scaling_groups(report);
    let scaling_path = dir.join(format!("{prefix}_scaling.csv"));
    let mut scaling_csv = String::from("group,N,mean_s\n");
    for group in &scaling {
        for &(n, secs) in &group.points {
            let _ = writeln!(scaling_csv, "{},{},{:?}", group.label, n as usize, secs);
        }
    }
    fs::write(&scaling_path, scaling_csv)?;
    files.push(scaling_path);

    let exponents_path = dir.join(format!("{prefix}_exponents.csv"));
    let mut exponents_csv = String::from("group,exponent,intercept\n");
    for group in &scaling {
        if let Some(fit) = group.fit {
            let _ = writeln!(
                exponents_csv,
                "{},{:?},{:?}",
                group.label, fit.exponent, fit.intercept
            );
        }
    }
    fs::write(&exponents_path, exponents_csv)?;
    files.push(exponents_path);

    if svg {
        for group in &report.groups {
            let path = dir.join(format!(
                "{prefix}_L{}_{}_box.svg",
                group.l,
                group
                    .parameter
                    .map_or_else(|| report.config.method.label().to_string(), |p| p.to_string())
            ));
            fs::write(&path, boxplot_svg(group))?;
            files.push(path);
        }
        let path = dir.join(format!("{prefix}_scaling.svg"));
        fs::write(&path, scaling_svg(&scaling))?;
        files.push(path);
    }

    let manifest_path = dir.join(format!("{prefix}_manifest.json"));
    let manifest = serde_json::json!({
        "config": report.config,
        "seeds": (0..report.config.samples as u64)
            .map(|i| report.config.base_seed + i)
            .collect::<Vec<u64>>(),
        "version": env!("CARGO_PKG_VERSION"),
        "files": files
            .iter()
            .filter_map(|p| p.file_name().map(|f| f.to_string_lossy().into_owned()))
            .collect::<Vec<String>>(),
    });
    fs::write(&manifest_path, serde_json::to_string_pretty(&manifest)?)?;
    files.push(manifest_path);
    Ok(files)
}

fn boxplot_csv(report: &BenchReport, groups: &[&GroupResult], trimmed: bool) -> String {
    let mut out = String::from("method,param,min,q1,median,q3,max,invalid_count\n");
    for group in groups {
        let method = report.config.method.label();
        let parameter = group
            .parameter
            .map_or_else(String::new, |p| p.to_string());
        let stats = if trimmed { group.trimmed } else { Some(group.raw) };
        match stats {
            Some(s) => {
                let _ = writeln!(
                    out,
                    "{method},{parameter},{:?},{:?},{:?},{:?},{:?},{}",
                    s.min, s.q1, s.median, s.q3, s.max, group.invalid_count
                );
            }
            None => {
                let _ = writeln!(out, "{method},{parameter},,,,,,{}", group.invalid_count);
            }
        }
    }
    out
}

/// Writes a matrix of optional values as CSV, blank cells for `None`
/// (used for the log-magnitude heatmap where zeros stay white).
pub fn write_heatmap_csv(path: &Path, cells: &[Vec<Option<f64>>]) -> Result<()> {
    let mut out = String::new();
    for row in cells {
        let rendered: Vec<String> = row
            .iter()
            .map(|c| c.map_or_else(String::new, |v| format!("{v:?}")))
            .collect();
        out.push_str(&rendered.join(","));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Writes a dense matrix (windspeed field) as CSV.
pub fn write_field_csv(path: &Path, field: &[Vec<f64>]) -> Result<()> {
    let mut out = String::new();
    for row in field {
        let rendered: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        out.push_str(&rendered.join(","));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Writes a penalty-weight scan as CSV.
pub fn write_lambda_csv(path: &Path, points: &[LambdaScanPoint]) -> Result<()> {
    let mut out = String::from("lambda,turbines,gap\n");
    for p in points {
        let _ = writeln!(out, "{:?},{},{:?}", p.lambda, p.turbines, p.gap);
    }
    fs::write(path, out)?;
    Ok(())
}

const SVG_W: f64 = 640.0;
const SVG_H: f64 = 420.0;
const MARGIN: f64 = 50.0;

fn svg_open() -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SVG_W}\" height=\"{SVG_H}\" \
         viewBox=\"0 0 {SVG_W} {SVG_H}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    )
}

fn svg_axes(out: &mut String) {
    let _ = writeln!(
        out,
        "<line x1=\"{m}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n\
         <line x1=\"{m}\" y1=\"{t}\" x2=\"{m}\" y2=\"{b}\" stroke=\"black\"/>",
        m = MARGIN,
        t = MARGIN,
        b = SVG_H - MARGIN,
        r = SVG_W - MARGIN
    );
}

/// Raw vs trimmed five-number boxes for one benchmark group.
pub fn boxplot_svg(group: &GroupResult) -> String {
    let mut out = svg_open();
    svg_axes(&mut out);
    let summaries: Vec<(&str, super::Summary)> = std::iter::once(("raw", group.raw))
        .chain(group.trimmed.map(|t| ("trimmed", t)))
        .collect();
    let lo = summaries.iter().map(|(_, s)| s.min).fold(f64::INFINITY, f64::min);
    let hi = summaries
        .iter()
        .map(|(_, s)| s.max)
        .fold(f64::NEG_INFINITY, f64::max);
    let span = (hi - lo).max(1e-9);
    let y = |v: f64| SVG_H - MARGIN - (v - lo) / span * (SVG_H - 2.0 * MARGIN);
    let slot = (SVG_W - 2.0 * MARGIN) / summaries.len() as f64;
    for (i, (label, s)) in summaries.iter().enumerate() {
        let cx = MARGIN + slot * (i as f64 + 0.5);
        let w = slot * 0.3;
        let _ = writeln!(
            out,
            "<line x1=\"{cx}\" y1=\"{}\" x2=\"{cx}\" y2=\"{}\" stroke=\"black\"/>\n\
             <rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"#9ecae1\" stroke=\"black\"/>\n\
             <line x1=\"{}\" y1=\"{my}\" x2=\"{}\" y2=\"{my}\" stroke=\"black\" stroke-width=\"2\"/>\n\
             <text x=\"{cx}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">{label}</text>",
            y(s.min),
            y(s.max),
            cx - w / 2.0,
            y(s.q3),
            w,
            (y(s.q1) - y(s.q3)).max(1.0),
            cx - w / 2.0,
            cx + w / 2.0,
            SVG_H - MARGIN + 16.0,
            my = y(s.median),
        );
    }
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"20\" font-size=\"13\" text-anchor=\"middle\">L={} power (invalid: {})</text>",
        SVG_W / 2.0,
        group.l,
        group.invalid_count
    );
    out.push_str("</svg>\n");
    out
}

/// Log-log scatter of mean times with fitted-exponent labels.
pub fn scaling_svg(groups: &[super::ScalingGroup]) -> String {
    let mut out = svg_open();
    svg_axes(&mut out);
    let all: Vec<(f64, f64)> = groups
        .iter()
        .flat_map(|g| g.points.iter().copied())
        .filter(|&(n, t)| n > 0.0 && t > 0.0)
        .collect();
    if !all.is_empty() {
        let (min_x, max_x) = all
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(n, _)| {
                (lo.min(n.ln()), hi.max(n.ln()))
            });
        let (min_y, max_y) = all
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, t)| {
                (lo.min(t.ln()), hi.max(t.ln()))
            });
        let sx = (max_x - min_x).max(1e-9);
        let sy = (max_y - min_y).max(1e-9);
        let px = |v: f64| MARGIN + (v.ln() - min_x) / sx * (SVG_W - 2.0 * MARGIN);
        let py = |v: f64| SVG_H - MARGIN - (v.ln() - min_y) / sy * (SVG_H - 2.0 * MARGIN);
        let palette = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b"];
        for (gi, group) in groups.iter().enumerate() {
            let color = palette[gi % palette.len()];
            for &(n, t) in &group.points {
                let _ = writeln!(
                    out,
                    "<circle cx=\"{}\" cy=\"{}\" r=\"4\" fill=\"{color}\"/>",
                    px(n),
                    py(t)
                );
            }
            let label = match group.fit {
                Some(fit) => format!("{} ~ N^{:.2}", group.label, fit.exponent),
                None => group.label.clone(),
            };
            let _ = writeln!(
                out,
                "<text x=\"{}\" y=\"{}\" font-size=\"12\" fill=\"{color}\">{label}</text>",
                SVG_W - MARGIN - 150.0,
                MARGIN + 16.0 * (gi as f64 + 1.0)
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

/// Grayscale cell plot of a heatmap matrix; empty cells stay white.
pub fn heatmap_svg(cells: &[Vec<Option<f64>>]) -> String {
    let mut out = svg_open();
    let rows = cells.len().max(1);
    let cols = cells.iter().map(Vec::len).max().unwrap_or(1).max(1);
    let values: Vec<f64> = cells.iter().flatten().filter_map(|&c| c).collect();
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = (hi - lo).max(1e-9);
    let cw = (SVG_W - 2.0 * MARGIN) / cols as f64;
    let ch = (SVG_H - 2.0 * MARGIN) / rows as f64;
    for (r, row) in cells.iter().enumerate() {
        for (c, &cell) in row.iter().enumerate() {
            if let Some(v) = cell {
                let shade = (255.0 * (1.0 - (v - lo) / span)) as u8;
                let _ = writeln!(
                    out,
                    "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" \
                     fill=\"rgb({shade},{shade},{shade})\"/>",
                    MARGIN + c as f64 * cw,
                    MARGIN + r as f64 * ch,
                    cw.max(0.5),
                    ch.max(0.5)
                );
            }
        }
    }
    out.push_str("</svg>\n");
    out
}

/// Blue-scale rendering of a windspeed field.
pub fn field_svg(field: &[Vec<f64>]) -> String {
    let cells: Vec<Vec<Option<f64>>> = field
        .iter()
        .map(|row| row.iter().map(|&v| Some(v)).collect())
        .collect();
    heatmap_svg(&cells)
}

/// Step plots of the turbine count and the cost gap across penalty weights.
pub fn lambda_svg(points: &[LambdaScanPoint]) -> String {
    let mut out = svg_open();
    svg_axes(&mut out);
    if !points.is_empty() {
        let max_lambda = points.iter().map(|p| p.lambda).fold(0.0f64, f64::max).max(1e-9);
        let max_turbines = points.iter().map(|p| p.turbines).max().unwrap_or(1).max(1);
        let max_gap = points.iter().map(|p| p.gap).fold(0.0f64, f64::max).max(1e-9);
        let px = |l: f64| MARGIN + l / max_lambda * (SVG_W - 2.0 * MARGIN);
        let py_count =
            |t: usize| SVG_H - MARGIN - t as f64 / max_turbines as f64 * (SVG_H - 2.0 * MARGIN);
        let py_gap = |g: f64| SVG_H - MARGIN - g / max_gap * (SVG_H - 2.0 * MARGIN);
        let count_path: Vec<String> = points
            .iter()
            .enumerate()
            .map(|(i, p)| {
                format!(
                    "{}{:.2},{:.2}",
                    if i == 0 { "M" } else { "L" },
                    px(p.lambda),
                    py_count(p.turbines)
                )
            })
            .collect();
        let gap_path: Vec<String> = points
            .iter()
            .enumerate()
            .map(|(i, p)| {
                format!(
                    "{}{:.2},{:.2}",
                    if i == 0 { "M" } else { "L" },
                    px(p.lambda),
                    py_gap(p.gap)
                )
            })
            .collect();
        let _ = writeln!(
            out,
            "<path d=\"{}\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\"/>\n\
             <path d=\"{}\" fill=\"none\" stroke=\"#d62728\" stroke-width=\"2\"/>\n\
             <text x=\"{m}\" y=\"20\" font-size=\"12\" fill=\"#1f77b4\">turbines</text>\n\
             <text x=\"{m}\" y=\"36\" font-size=\"12\" fill=\"#d62728\">cost gap</text>",
            count_path.join(" "),
            gap_path.join(" "),
            m = MARGIN
        );
    }
    out.push_str("</svg>\n");
    out
}
