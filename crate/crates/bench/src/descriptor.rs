//! Policy descriptors: `+`-separated tokens such as
//! `thief_splitting+by_blocks=4:2` or `bound_depth=6+depjoin+slice_merge`.

use std::fmt;

use clap::ValueEnum;
use splitkit::algorithms::{FannkuchPolicy, MergePolicy, SortSplit, SortVariant};
use splitkit::{AdaptiveConfig, BlockSchedule, PolicyKind, Schedule, Scheduler};

use crate::BenchError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Bench {
    #[value(name = "find_first")]
    FindFirst,
    #[value(name = "all")]
    All,
    #[value(name = "sort")]
    Sort,
    #[value(name = "fannkuch")]
    Fannkuch,
    #[value(name = "max_sum")]
    MaxSum,
    #[value(name = "filter_even")]
    FilterEven,
}

impl Bench {
    pub fn name(self) -> &'static str {
        match self {
            Bench::FindFirst => "find_first",
            Bench::All => "all",
            Bench::Sort => "sort",
            Bench::Fannkuch => "fannkuch",
            Bench::MaxSum => "max_sum",
            Bench::FilterEven => "filter_even",
        }
    }

    pub fn default_size(self) -> usize {
        match self {
            Bench::Fannkuch => 9,
            _ => 1_000_000,
        }
    }
}

impl fmt::Display for Bench {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Token {
    Policy(PolicyKind),
    Join,
    DepJoin,
    Adaptive,
    Blocks(BlockSchedule),
    Merge(MergePolicy),
    Static(Option<usize>),
}

fn usage(message: impl Into<String>) -> BenchError {
    BenchError::Usage(message.into())
}

fn parse_blocks(value: Option<&str>) -> Result<BlockSchedule, BenchError> {
    let Some(value) = value else {
        return Ok(BlockSchedule::default());
    };
    let (initial, factor) = match value.split_once(':') {
        Some((initial, factor)) => (initial, Some(factor)),
        None => (value, None),
    };
    let initial: usize = initial
        .parse()
        .ok()
        .filter(|&i| i > 0)
        .ok_or_else(|| usage(format!("invalid block size in by_blocks={value}")))?;
    let factor: f64 = match factor {
        Some(f) => f
            .parse()
            .ok()
            .filter(|&f: &f64| f >= 1.0)
            .ok_or_else(|| usage(format!("invalid growth factor in by_blocks={value}")))?,
        None => 2.0,
    };
    Ok(BlockSchedule::new(initial, factor))
}

pub fn parse_token(token: &str) -> Result<Token, BenchError> {
    let (name, value) = match token.split_once('=') {
        Some((name, value)) => (name, Some(value)),
        None => (token, None),
    };
    let no_value = |t: Token| match value {
        None => Ok(t),
        Some(_) => Err(usage(format!("{name} takes no value"))),
    };
    match name {
        "join" => no_value(Token::Join),
        "depjoin" => no_value(Token::DepJoin),
        "adaptive" => no_value(Token::Adaptive),
        "adaptive_merge" => no_value(Token::Merge(MergePolicy::AdaptiveIter)),
        "thief_merge" => no_value(Token::Merge(MergePolicy::ThiefIter)),
        "slice_merge" => no_value(Token::Merge(MergePolicy::Slice)),
        "by_blocks" => parse_blocks(value).map(Token::Blocks),
        "static" => match value {
            None => Ok(Token::Static(None)),
            Some(v) => v
                .parse()
                .ok()
                .filter(|&k| k > 0)
                .map(|k| Token::Static(Some(k)))
                .ok_or_else(|| usage(format!("invalid block count in static={v}"))),
        },
        _ => token
            .parse::<PolicyKind>()
            .map(Token::Policy)
            .map_err(|e| usage(e.to_string())),
    }
}

pub fn parse_descriptor(text: &str) -> Result<Vec<Token>, BenchError> {
    let text = text.trim();
    if text.is_empty() || text == "default" {
        return Ok(Vec::new());
    }
    text.split('+').map(|t| parse_token(t.trim())).collect()
}

/// What a descriptor selects for one benchmark.
#[derive(Debug, Clone, PartialEq)]
pub enum Plan {
    Pipeline {
        policies: Vec<PolicyKind>,
        schedule: Schedule,
    },
    Sort(SortVariant),
    Fannkuch(FannkuchPolicy),
}

fn not_for(token: &Token, bench: Bench) -> BenchError {
    usage(format!("{token:?} does not apply to {bench}"))
}

pub fn plan(bench: Bench, tokens: &[Token]) -> Result<Plan, BenchError> {
    match bench {
        Bench::Sort => sort_plan(tokens),
        Bench::Fannkuch => fannkuch_plan(tokens),
        _ => pipeline_plan(bench, tokens),
    }
}

fn pipeline_plan(bench: Bench, tokens: &[Token]) -> Result<Plan, BenchError> {
    let mut policies = Vec::new();
    let mut schedule = Schedule::default();
    if bench == Bench::MaxSum && !tokens.iter().any(|t| matches!(t, Token::Policy(_))) {
        policies.push(PolicyKind::ThiefSplitting(None));
    }
    for token in tokens {
        match *token {
            Token::Policy(kind) => policies.push(kind),
            Token::Join => schedule.scheduler = Scheduler::Join,
            Token::DepJoin => schedule.scheduler = Scheduler::DepJoin,
            Token::Adaptive => schedule.scheduler = Scheduler::Adaptive(AdaptiveConfig::default()),
            Token::Blocks(blocks) => schedule.blocks = Some(blocks),
            Token::Merge(_) | Token::Static(_) => return Err(not_for(token, bench)),
        }
    }
    Ok(Plan::Pipeline { policies, schedule })
}

fn sort_plan(tokens: &[Token]) -> Result<Plan, BenchError> {
    let mut split = None;
    let mut scheduler = Scheduler::Join;
    let mut merge = MergePolicy::AdaptiveIter;
    for token in tokens {
        match *token {
            Token::Policy(kind) => {
                let chosen = match kind {
                    PolicyKind::BoundDepth(d) => SortSplit::BoundDepth(d),
                    PolicyKind::ThiefSplitting(c) => SortSplit::ThiefSplitting(c),
                    PolicyKind::JoinContext(d) => SortSplit::JoinContext(d),
                    _ => return Err(not_for(token, Bench::Sort)),
                };
                if split.replace(chosen).is_some() {
                    return Err(usage("sort takes a single division policy"));
                }
            }
            Token::Join => scheduler = Scheduler::Join,
            Token::DepJoin => scheduler = Scheduler::DepJoin,
            Token::Merge(m) => merge = m,
            Token::Adaptive | Token::Blocks(_) | Token::Static(_) => {
                return Err(not_for(token, Bench::Sort))
            }
        }
    }
    Ok(Plan::Sort(SortVariant {
        split: split.unwrap_or(SortSplit::ThiefSplitting(None)),
        scheduler,
        merge,
    }))
}

fn fannkuch_plan(tokens: &[Token]) -> Result<Plan, BenchError> {
    match tokens {
        [] | [Token::Adaptive] => Ok(Plan::Fannkuch(FannkuchPolicy::Adaptive)),
        [Token::Policy(PolicyKind::ThiefSplitting(None))] => {
            Ok(Plan::Fannkuch(FannkuchPolicy::ThiefSplitting))
        }
        [Token::Static(blocks)] => Ok(Plan::Fannkuch(FannkuchPolicy::StaticChunks {
            blocks: *blocks,
        })),
        _ => Err(usage(
            "fannkuch takes one of: adaptive, thief_splitting, static[=k]",
        )),
    }
}
