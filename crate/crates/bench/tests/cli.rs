use std::path::Path;
use std::process::{Command, Output};

use splitkit::trace::labels;
use splitkit::ExecutionSpan;
use splitkit_bench::descriptor::Bench;
use splitkit_bench::report::{self, CSV_HEADER};
use splitkit_bench::runner::{self, RunSpec};
use splitkit_bench::svg;

fn bench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_splitkit-bench"))
        .args(args)
        .env_remove("SPLITKIT_THREADS")
        .output()
        .expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

fn spec(bench: Bench, policy: &str, workers: usize, size: usize) -> RunSpec {
    RunSpec {
        bench,
        policy: policy.to_string(),
        workers,
        size,
        runs: 2,
        seed: 7,
        record_spans: false,
    }
}

fn span(worker: usize, start: u64, end: u64) -> ExecutionSpan {
    ExecutionSpan {
        task_id: worker as u64 + 1,
        parent_id: None,
        worker_id: worker,
        start_ns: start,
        end_ns: end,
        label: labels::LEAF.to_string(),
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("out.csv");
    let ok = bench(&[
        "run",
        "--bench",
        "max_sum",
        "--workers",
        "2",
        "--size",
        "5000",
        "--runs",
        "2",
        "--csv",
        path_str(&csv),
    ]);
    assert_eq!(
        ok.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&ok.stderr)
    );

    assert_eq!(bench(&["run", "--bench", "nope"]).status.code(), Some(2));
    assert_eq!(
        bench(&["run", "--bench", "sort", "--policy", "by_blocks"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        bench(&["run", "--bench", "all", "--workers", "0"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        bench(&["run", "--bench", "fannkuch", "--size", "40"])
            .status
            .code(),
        Some(2)
    );
    let bad_env = Command::new(env!("CARGO_BIN_EXE_splitkit-bench"))
        .args(["run", "--bench", "all", "--size", "10"])
        .env("SPLITKIT_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(bad_env.status.code(), Some(2));

    let missing = dir.path().join("missing.jsonl");
    let out = dir.path().join("out.svg");
    assert_eq!(
        bench(&[
            "render",
            "--spans",
            path_str(&missing),
            "--svg",
            path_str(&out)
        ])
        .status
        .code(),
        Some(3)
    );
    let unwritable = dir.path().join("no/such/dir/out.csv");
    let io = bench(&[
        "run",
        "--bench",
        "all",
        "--workers",
        "1",
        "--size",
        "10",
        "--runs",
        "1",
        "--csv",
        path_str(&unwritable),
    ]);
    assert_eq!(io.status.code(), Some(3));
}

#[test]
fn csv_has_header_and_one_row_per_run() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("runs.csv");
    let out = bench(&[
        "run",
        "--bench",
        "find_first",
        "--policy",
        "thief_splitting+by_blocks",
        "--workers",
        "2",
        "--size",
        "20000",
        "--runs",
        "3",
        "--csv",
        path_str(&csv),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], CSV_HEADER);
    assert_eq!(lines.len(), 4);
    for (run, line) in lines[1..].iter().enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 9);
        assert_eq!(
            &fields[..5],
            &[
                "find_first",
                "thief_splitting+by_blocks",
                "2",
                "20000",
                &run.to_string()
            ]
        );
        assert!(!fields[8].is_empty());
    }

    let empty = dir.path().join("empty.csv");
    report::write_csv(&empty, &[]).unwrap();
    assert_eq!(
        std::fs::read_to_string(&empty).unwrap(),
        format!("{CSV_HEADER}\n")
    );
}

#[test]
fn every_bench_passes_its_oracle() {
    let cases = [
        (Bench::FindFirst, "default", 3000),
        (Bench::All, "size_limit=64+adaptive", 3000),
        (Bench::Sort, "join_context=3+depjoin+thief_merge", 3000),
        (Bench::Fannkuch, "thief_splitting", 6),
        (Bench::MaxSum, "bound_depth=4+depjoin", 3000),
        (Bench::FilterEven, "thief_splitting+by_blocks=8:2", 3000),
    ];
    for (bench, policy, size) in cases {
        for workers in [1, 3] {
            let output = runner::run(&spec(bench, policy, workers, size)).unwrap();
            assert_eq!(output.records.len(), 2, "{bench} {policy}");
        }
    }
}

#[test]
fn single_worker_sort_never_steals() {
    let output = runner::run(&spec(Bench::Sort, "default", 1, 10_000)).unwrap();
    assert!(output.records.iter().all(|r| r.steals == 0));
}

#[test]
fn single_worker_spans_use_one_lane() {
    let mut s = spec(Bench::MaxSum, "bound_depth=3", 1, 4096);
    s.record_spans = true;
    let output = runner::run(&s).unwrap();
    assert!(!output.spans.is_empty());
    assert!(output.spans.iter().all(|span| span.worker_id == 0));
    let rendered = svg::render(&output.spans);
    assert_eq!(rendered.matches("<text").count(), 1);
}

#[test]
fn blocked_search_stops_near_the_target() {
    let size = 1 << 16;
    let output = runner::run(&spec(
        Bench::FindFirst,
        "thief_splitting+by_blocks",
        2,
        size,
    ))
    .unwrap();
    for record in output.records {
        assert!(record.consumed.unwrap() <= size);
    }
    // With the target at the front, growing blocks inspect a small prefix.
    let values: Vec<i64> = (0..size as i64)
        .map(|i| if i == 3 { -1 } else { i })
        .collect();
    let _pool = splitkit::Runtime::install(splitkit::RuntimeConfig::new(2)).unwrap();
    let counted = splitkit::algorithms::find_first_counted(
        &values,
        |&x| x < 0,
        &[splitkit::PolicyKind::ThiefSplitting(None)],
        splitkit::Schedule {
            blocks: Some(splitkit::BlockSchedule::new(4, 2.0)),
            ..Default::default()
        },
    );
    assert_eq!(counted.value, Some(3));
    assert!(counted.consumed <= 4 + 8, "consumed {}", counted.consumed);
}

#[test]
fn span_log_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("spans.jsonl");
    let spans = vec![span(0, 0, 10), span(1, 5, 20)];
    report::write_spans(&log, &spans).unwrap();
    assert_eq!(report::read_spans(&log).unwrap(), spans);

    let chart = dir.path().join("chart.svg");
    let out = bench(&[
        "render",
        "--spans",
        path_str(&log),
        "--svg",
        path_str(&chart),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let rendered = std::fs::read_to_string(&chart).unwrap();
    assert_eq!(rendered, svg::render(&spans));
    assert_eq!(rendered.matches("<rect").count(), 2);
    assert_eq!(rendered.matches("<text").count(), 2);
}

#[test]
fn rendering_is_deterministic() {
    let spans: Vec<ExecutionSpan> = (0..20)
        .map(|i| span(i % 3, i as u64 * 7, i as u64 * 7 + 5))
        .collect();
    let mut reversed = spans.clone();
    reversed.reverse();
    assert_eq!(svg::render(&spans), svg::render(&spans));
    assert_eq!(svg::render(&spans), svg::render(&reversed));
}

#[test]
fn malformed_log_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("bad.jsonl");
    let good = serde_json_line(&span(0, 0, 1));
    std::fs::write(&log, format!("{good}\n{good}\n{{not json\n")).unwrap();
    let out = bench(&[
        "render",
        "--spans",
        path_str(&log),
        "--svg",
        path_str(&dir.path().join("x.svg")),
    ]);
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("bad.jsonl:3:"), "{stderr}");
}

fn serde_json_line(span: &ExecutionSpan) -> String {
    format!(
        r#"{{"task_id":{},"parent_id":null,"worker_id":{},"start_ns":{},"end_ns":{},"label":"{}"}}"#,
        span.task_id, span.worker_id, span.start_ns, span.end_ns, span.label
    )
}
