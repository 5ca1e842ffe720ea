//! SVG figures: rank-vs-iteration curves and y* sample histograms.

use crate::bias::BiasReport;
use crate::error::{BenchError, Result};
use crate::rank::RankTable;
use plotters::prelude::*;
use std::path::Path;

// matplotlib tab palette; wraps if a figure has more series than this
const PALETTE: [RGBColor; 8] = [
    RGBColor(31, 119, 180),
    RGBColor(255, 127, 14),
    RGBColor(44, 160, 44),
    RGBColor(214, 39, 40),
    RGBColor(148, 103, 189),
    RGBColor(140, 86, 75),
    RGBColor(227, 119, 194),
    RGBColor(127, 127, 127),
];

fn perr<E: std::fmt::Display>(e: E) -> BenchError {
    BenchError::Plot(e.to_string())
}

/// Mean rank of each strategy per iteration, lower is better.
pub fn rank_vs_iteration(table: &RankTable, out: &Path) -> Result<()> {
    let per_iter = table.mean_by_iteration();
    if per_iter.is_empty() {
        return Err(BenchError::Plot("rank table has no cells".into()));
    }
    let n = table.strategies.len();
    let max_iter = *per_iter.keys().last().unwrap();
    let root = SVGBackend::new(out, (900, 600)).into_drawing_area();
    root.fill(&WHITE).map_err(perr)?;
    let mut chart = ChartBuilder::on(&root)
        .margin(20)
        .x_label_area_size(40)
        .y_label_area_size(40)
        .caption("average rank by iteration", ("sans-serif", 24))
        .build_cartesian_2d(0f64..max_iter as f64 + 0.5, 0.5f64..n as f64 + 0.5)
        .map_err(perr)?;
    chart
        .configure_mesh()
        .x_desc("iteration")
        .y_desc("mean rank")
        .draw()
        .map_err(perr)?;
    for (si, name) in table.strategies.iter().enumerate() {
        let color = PALETTE[si % PALETTE.len()];
        let series: Vec<(f64, f64)> = per_iter
            .iter()
            .map(|(&it, means)| (it as f64, means[si]))
            .collect();
        chart
            .draw_series(LineSeries::new(series, color.stroke_width(2)))
            .map_err(perr)?
            .label(name)
            .legend(move |(x, y)| {
                PathElement::new(vec![(x, y), (x + 16, y)], color.stroke_width(2))
            });
    }
    chart
        .configure_series_labels()
        .position(SeriesLabelPosition::UpperRight)
        .border_style(BLACK)
        .background_style(WHITE.mix(0.85))
        .draw()
        .map_err(perr)?;
    root.present().map_err(perr)?;
    Ok(())
}

/// Frequency polygons of the y* draws, one series per (sampler, m).
pub fn ystar_histograms(report: &BiasReport, out: &Path) -> Result<()> {
    let all: Vec<f64> = report
        .joint_samples
        .iter()
        .chain(&report.marginal_samples)
        .flatten()
        .copied()
        .collect();
    if all.is_empty() {
        return Err(BenchError::Plot("bias report has no samples".into()));
    }
    let lo = all.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    let mut hi = all.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    if hi <= lo {
        hi = lo + 1.0;
    }
    let bins = 40usize;
    let width = (hi - lo) / bins as f64;

    let mut series = Vec::new();
    for (mi, &m) in report.m_values.iter().enumerate() {
        for (sampler, samples) in [
            ("joint", &report.joint_samples[mi]),
            ("marginal", &report.marginal_samples[mi]),
        ] {
            let mut counts = vec![0usize; bins];
            for &v in samples {
                let b = (((v - lo) / width) as usize).min(bins - 1);
                counts[b] += 1;
            }
            let pts: Vec<(f64, f64)> = counts
                .iter()
                .enumerate()
                .map(|(b, &c)| (lo + (b as f64 + 0.5) * width, c as f64 / samples.len() as f64))
                .collect();
            series.push((format!("{sampler} m={m}"), pts));
        }
    }
    let top = series
        .iter()
        .flat_map(|(_, pts)| pts.iter().map(|p| p.1))
        .fold(0.0f64, f64::max);

    let root = SVGBackend::new(out, (900, 600)).into_drawing_area();
    root.fill(&WHITE).map_err(perr)?;
    let mut chart = ChartBuilder::on(&root)
        .margin(20)
        .x_label_area_size(40)
        .y_label_area_size(40)
        .caption(
            format!("y* draws on {} ({} per histogram)", report.problem, report.n_draws),
            ("sans-serif", 24),
        )
        .build_cartesian_2d(lo..hi, 0.0..top * 1.1 + 1e-9)
        .map_err(perr)?;
    chart
        .configure_mesh()
        .x_desc("y* (standardized)")
        .y_desc("frequency")
        .draw()
        .map_err(perr)?;
    for (si, (name, pts)) in series.into_iter().enumerate() {
        let color = PALETTE[si % PALETTE.len()];
        chart
            .draw_series(LineSeries::new(pts, color.stroke_width(2)))
            .map_err(perr)?
            .label(name)
            .legend(move |(x, y)| {
                PathElement::new(vec![(x, y), (x + 16, y)], color.stroke_width(2))
            });
    }
    chart
        .configure_series_labels()
        .position(SeriesLabelPosition::UpperLeft)
        .border_style(BLACK)
        .background_style(WHITE.mix(0.85))
        .draw()
        .map_err(perr)?;
    root.present().map_err(perr)?;
    Ok(())
}
