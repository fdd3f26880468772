//! Gantt-style SVG chart of execution spans: one lane per worker, one
//! rectangle per span, block starts drawn as vertical lines.

use std::collections::BTreeSet;
use std::fmt::Write;

use splitkit::trace::labels;
use splitkit::ExecutionSpan;

const LEFT: f64 = 90.0;
const TOP: f64 = 20.0;
const WIDTH: f64 = 1000.0;
const LANE: f64 = 28.0;
const BAR: f64 = 18.0;

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Renders `spans` as a standalone SVG document. The output depends only
/// on the spans, not on their order.
pub fn render(spans: &[ExecutionSpan]) -> String {
    let mut spans = spans.to_vec();
    spans.sort_by(|a, b| {
        (a.start_ns, a.worker_id, a.end_ns, a.task_id, &a.label).cmp(&(
            b.start_ns,
            b.worker_id,
            b.end_ns,
            b.task_id,
            &b.label,
        ))
    });
    let workers: Vec<usize> = spans
        .iter()
        .map(|s| s.worker_id)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let lane_of = |worker: usize| workers.binary_search(&worker).expect("worker has a lane");
    let t0 = spans.iter().map(|s| s.start_ns).min().unwrap_or(0);
    let t1 = spans
        .iter()
        .map(|s| s.end_ns)
        .max()
        .unwrap_or(0)
        .max(t0 + 1);
    let x = |t: u64| LEFT + (t - t0) as f64 / (t1 - t0) as f64 * WIDTH;
    let height = TOP * 2.0 + LANE * workers.len() as f64;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.0}" height="{height:.0}" font-family="monospace" font-size="11">"#,
        LEFT + WIDTH + 20.0
    );
    for (lane, worker) in workers.iter().enumerate() {
        let y = TOP + LANE * lane as f64 + LANE / 2.0;
        let _ = writeln!(
            out,
            r##"<line x1="{LEFT:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ccc"/>"##,
            LEFT + WIDTH
        );
        let _ = writeln!(
            out,
            r#"<text x="4" y="{:.2}">worker {worker}</text>"#,
            y + 4.0
        );
    }
    let lanes = workers.len().max(1);
    for span in &spans {
        if span.label == labels::BLOCK {
            let _ = writeln!(
                out,
                r##"<line x1="{0:.2}" y1="{TOP:.2}" x2="{0:.2}" y2="{1:.2}" stroke="#000" stroke-dasharray="4 2"/>"##,
                x(span.start_ns),
                height - TOP
            );
            continue;
        }
        let lane = lane_of(span.worker_id);
        let hue = lane * 360 / lanes;
        let lightness = if span.label == labels::COMBINE {
            35
        } else {
            55
        };
        let left = x(span.start_ns);
        let _ = writeln!(
            out,
            r#"<rect x="{left:.2}" y="{:.2}" width="{:.2}" height="{BAR:.2}" fill="hsl({hue},65%,{lightness}%)"><title>{} task {} ({} ns)</title></rect>"#,
            TOP + LANE * lane as f64 + (LANE - BAR) / 2.0,
            (x(span.end_ns) - left).max(0.5),
            escape(&span.label),
            span.task_id,
            span.end_ns - span.start_ns
        );
    }
    out.push_str("</svg>\n");
    out
}
