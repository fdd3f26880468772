//! Executes benchmark runs and checks each result against its oracle.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use splitkit::algorithms::{
    all_counted, fannkuch, filter_collect_even_with, find_first_counted, max_sum_with,
    merge_sort_iter, SortBuffers, MAX_FANNKUCH_N,
};
use splitkit::{ExecutionSpan, Runtime, RuntimeConfig};

use crate::descriptor::{self, Bench, Plan};
use crate::{oracle, BenchError};

#[derive(Debug, Clone)]
pub struct RunSpec {
    pub bench: Bench,
    pub policy: String,
    pub workers: usize,
    pub size: usize,
    pub runs: usize,
    pub seed: u64,
    pub record_spans: bool,
}

/// One line of the CSV output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchRecord {
    pub bench: Bench,
    pub policy: String,
    pub workers: usize,
    pub size: usize,
    pub run: usize,
    pub wall_ns: u64,
    pub steals: u64,
    pub splits: u64,
    /// Elements inspected, for the searches.
    pub consumed: Option<usize>,
}

#[derive(Debug, Default)]
pub struct RunOutput {
    pub records: Vec<BenchRecord>,
    pub spans: Vec<ExecutionSpan>,
}

enum Input {
    Values(Vec<i64>),
    None,
}

fn generate(bench: Bench, size: usize, rng: &mut ChaCha8Rng) -> Input {
    match bench {
        Bench::Fannkuch => Input::None,
        Bench::FindFirst => {
            let mut values: Vec<i64> = (0..size).map(|_| rng.gen_range(0..1 << 40)).collect();
            if size > 0 {
                let target = rng.gen_range(0..size);
                values[target] = -1;
            }
            Input::Values(values)
        }
        Bench::All => {
            let mut values: Vec<i64> = (0..size).map(|_| rng.gen_range(0..1 << 40)).collect();
            if size > 0 && rng.gen_bool(0.5) {
                let target = rng.gen_range(0..size);
                values[target] = -1;
            }
            Input::Values(values)
        }
        Bench::MaxSum => Input::Values((0..size).map(|_| rng.gen_range(-1000..=1000)).collect()),
        Bench::Sort | Bench::FilterEven => Input::Values((0..size).map(|_| rng.gen()).collect()),
    }
}

struct Outcome {
    consumed: Option<usize>,
    check: Result<(), String>,
}

fn mismatch<T: std::fmt::Debug + PartialEq>(what: &str, got: T, expected: T) -> Result<(), String> {
    if got == expected {
        Ok(())
    } else {
        Err(format!("{what}: got {got:?}, expected {expected:?}"))
    }
}

fn execute(runtime: &Runtime, spec: &RunSpec, plan: &Plan, input: Input) -> Outcome {
    match (plan, input) {
        (Plan::Fannkuch(policy), _) => {
            let result = runtime
                .run(|| fannkuch(spec.size, *policy))
                .expect("size validated");
            let expected = oracle::fannkuch(spec.size);
            Outcome {
                consumed: None,
                check: mismatch("fannkuch", (result.checksum, result.max_flips), expected),
            }
        }
        (Plan::Sort(variant), Input::Values(mut values)) => {
            let mut expected = values.clone();
            let mut scratch = vec![0i64; values.len()];
            runtime.run(|| {
                let buffers = SortBuffers::new(&mut values, &mut scratch).expect("equal lengths");
                merge_sort_iter(buffers, *variant);
            });
            expected.sort();
            let check = match values.iter().zip(&expected).position(|(a, b)| a != b) {
                None => Ok(()),
                Some(i) => Err(format!("sort: first difference at index {i}")),
            };
            Outcome {
                consumed: None,
                check,
            }
        }
        (Plan::Pipeline { policies, schedule }, Input::Values(values)) => match spec.bench {
            Bench::FindFirst => {
                let counted =
                    runtime.run(|| find_first_counted(&values, |&x| x < 0, policies, *schedule));
                Outcome {
                    consumed: Some(counted.consumed),
                    check: mismatch(
                        "find_first",
                        counted.value,
                        values.iter().position(|&x| x < 0),
                    ),
                }
            }
            Bench::All => {
                let counted =
                    runtime.run(|| all_counted(&values, |&x| x >= 0, policies, *schedule));
                Outcome {
                    consumed: Some(counted.consumed),
                    check: mismatch("all", counted.value, values.iter().all(|&x| x >= 0)),
                }
            }
            Bench::MaxSum => {
                let got = runtime.run(|| max_sum_with(&values, policies, *schedule));
                Outcome {
                    consumed: None,
                    check: mismatch("max_sum", got, oracle::max_sum(&values)),
                }
            }
            Bench::FilterEven => {
                let got = runtime.run(|| filter_collect_even_with(&values, policies, *schedule));
                let expected: Vec<i64> = values.iter().copied().filter(|x| x % 2 == 0).collect();
                let check = if got == expected {
                    Ok(())
                } else {
                    Err(format!(
                        "filter_even: {} values, expected {}",
                        got.len(),
                        expected.len()
                    ))
                };
                Outcome {
                    consumed: None,
                    check,
                }
            }
            Bench::Sort | Bench::Fannkuch => unreachable!("planned separately"),
        },
        _ => unreachable!("input matches the plan"),
    }
}

/// Validates the descriptor, then executes `spec.runs` runs on a fresh pool.
pub fn run(spec: &RunSpec) -> Result<RunOutput, BenchError> {
    let tokens = descriptor::parse_descriptor(&spec.policy)?;
    let plan = descriptor::plan(spec.bench, &tokens)?;
    if spec.bench == Bench::Fannkuch && !(1..=MAX_FANNKUCH_N).contains(&spec.size) {
        return Err(BenchError::Usage(format!(
            "fannkuch size must be in 1..={MAX_FANNKUCH_N}, got {}",
            spec.size
        )));
    }
    let config = RuntimeConfig::new(spec.workers).record_spans(spec.record_spans);
    let runtime = Runtime::install(config).map_err(|e| BenchError::Usage(e.to_string()))?;

    let mut output = RunOutput::default();
    for run in 0..spec.runs {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed.wrapping_add(run as u64));
        let input = generate(spec.bench, spec.size, &mut rng);
        runtime.reset_stats();
        runtime.take_spans();
        let start = Instant::now();
        let outcome = execute(&runtime, spec, &plan, input);
        let wall_ns = start.elapsed().as_nanos() as u64;
        let stats = runtime.stats();
        outcome
            .check
            .map_err(|e| BenchError::Oracle(format!("run {run}: {e}")))?;
        output.spans.extend(runtime.take_spans());
        output.records.push(BenchRecord {
            bench: spec.bench,
            policy: spec.policy.clone(),
            workers: spec.workers,
            size: spec.size,
            run,
            wall_ns,
            steals: stats.steals,
            splits: stats.splits,
            consumed: outcome.consumed,
        });
    }
    Ok(output)
}
