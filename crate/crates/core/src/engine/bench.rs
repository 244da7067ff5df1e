use std::fmt::Write as _;
use std::time::{Duration, Instant};

use crate::flow::build_flow_tree;
use crate::layout::layout;
use crate::scheduler::TraversalOptions;
use crate::style::compute_styles;

use super::{parse_document, EngineError, Page};

/// Printed under every table so nobody reads the columns as targets.
pub const REFERENCE_NOTE: &str = "# reference only, not targets (different engine, hardware and sites): \
layout ms for Gecko / Servo 1 thread / Servo 4 threads: Reddit 250/100/55, CNN 105/50/35";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchCell {
    pub workers: usize,
    pub median_ms: f64,
    pub min_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub page: String,
    pub flows: usize,
    pub cells: Vec<BenchCell>,
}

/// Times the layout stage (style plus the three traversals; flow
/// construction excluded) for each worker count after one warm-up run.
pub fn benchmark(
    page: &str,
    html: &str,
    css: &[String],
    worker_counts: &[usize],
    repetitions: usize,
    viewport: f64,
) -> Result<BenchRow, EngineError> {
    if repetitions < 3 {
        return Err(EngineError::Usage(format!("need at least 3 repetitions, got {repetitions}")));
    }
    if worker_counts.is_empty() || worker_counts.contains(&0) {
        return Err(EngineError::Usage("worker counts must be positive".into()));
    }
    let dom = parse_document(html, usize::MAX, |_| {}).tree;
    let reference = Page::from_dom(dom.clone(), css, viewport, TraversalOptions::with_workers(1))?;
    let rules = &reference.rules;
    let mut cells = Vec::new();
    for &workers in worker_counts {
        let options = TraversalOptions::with_workers(workers);
        let run = || -> Result<Duration, EngineError> {
            let t0 = Instant::now();
            let styles = compute_styles(&dom, rules, options)?;
            let style_time = t0.elapsed();
            let mut flows = build_flow_tree(&dom, &styles)?;
            let t1 = Instant::now();
            layout(&mut flows, viewport, options)?;
            Ok(style_time + t1.elapsed())
        };
        run()?;
        let mut samples: Vec<f64> =
            (0..repetitions).map(|_| run().map(|d| d.as_secs_f64() * 1000.0)).collect::<Result<_, _>>()?;
        samples.sort_by(f64::total_cmp);
        cells.push(BenchCell { workers, median_ms: median(&samples), min_ms: samples[0] });
    }
    Ok(BenchRow { page: page.to_string(), flows: reference.flows.len(), cells })
}

/// Median of sorted samples; the mean of the middle two for even counts.
pub fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

/// Tab-separated table: one row per page, a median and a min column per
/// worker count.
pub fn format_bench_table(rows: &[BenchRow]) -> String {
    let mut out = String::from("page\tflows");
    if let Some(first) = rows.first() {
        for c in &first.cells {
            let _ = write!(out, "\tmedian_ms_w{0}\tmin_ms_w{0}", c.workers);
        }
    }
    out.push('\n');
    for row in rows {
        let _ = write!(out, "{}\t{}", row.page, row.flows);
        for c in &row.cells {
            let _ = write!(out, "\t{:.3}\t{:.3}", c.median_ms, c.min_ms);
        }
        out.push('\n');
    }
    out.push_str(REFERENCE_NOTE);
    out.push('\n');
    out
}
