//! Splitting policies: adaptors that only override the division decision.
//!
//! A policy wraps a producer together with a small per-task state. The
//! wrapped producer is asked for its own opinion lazily, so stacked policies
//! compose from the innermost outwards.

use std::cell::Cell;
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use crate::divisible::{Divisible, Producer};
use crate::runtime::{current_num_workers, current_worker_index};

/// Per-task splitting state.
pub trait SplitPolicy: Sized + Send {
    /// Called once when the pipeline starts executing, on the worker that
    /// runs the root task.
    fn start(&mut self) {}

    /// Decides whether to divide; `inner` is the wrapped producer's answer.
    fn should_divide(&self, inner: impl FnOnce() -> bool, length: usize) -> bool;

    /// States of the two children of a division.
    fn split(self) -> (Self, Self);

    /// States of the two parts of a cut (see [`Divisible::cut_at`]).
    fn cut(self) -> (Self, Self);
}

/// A producer whose division decision is overridden by a policy.
pub struct PolicyProducer<P, S> {
    base: P,
    state: S,
}

impl<P, S> PolicyProducer<P, S> {
    pub fn new(base: P, state: S) -> Self {
        PolicyProducer { base, state }
    }
}

impl<P: Divisible, S: SplitPolicy> Divisible for PolicyProducer<P, S> {
    #[inline]
    fn base_length(&self) -> usize {
        self.base.base_length()
    }

    fn should_be_divided(&self) -> bool {
        let base = &self.base;
        self.state
            .should_divide(|| base.should_be_divided(), base.base_length())
    }

    fn divide(self) -> (Self, Self) {
        let (left, right) = self.base.divide();
        let (ls, rs) = self.state.split();
        (
            PolicyProducer::new(left, ls),
            PolicyProducer::new(right, rs),
        )
    }

    fn divide_at(self, index: usize) -> (Self, Self) {
        let (left, right) = self.base.divide_at(index);
        let (ls, rs) = self.state.split();
        (
            PolicyProducer::new(left, ls),
            PolicyProducer::new(right, rs),
        )
    }

    fn cut_at(self, index: usize) -> (Self, Self) {
        let (left, right) = self.base.cut_at(index);
        let (ls, rs) = self.state.cut();
        (
            PolicyProducer::new(left, ls),
            PolicyProducer::new(right, rs),
        )
    }
}

impl<P: Iterator, S> Iterator for PolicyProducer<P, S> {
    type Item = P::Item;

    #[inline]
    fn next(&mut self) -> Option<P::Item> {
        self.base.next()
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        self.base.size_hint()
    }

    fn fold<B, F>(self, init: B, f: F) -> B
    where
        F: FnMut(B, Self::Item) -> B,
    {
        self.base.fold(init, f)
    }
}

impl<P: Producer, S: SplitPolicy> Producer for PolicyProducer<P, S> {
    fn partial_fold<B, F>(&mut self, init: B, fold_op: F, limit: usize) -> B
    where
        F: FnMut(B, Self::Item) -> B,
    {
        self.base.partial_fold(init, fold_op, limit)
    }
}

/// Stops dividing below a given depth of the division tree.
#[derive(Debug, Clone, Copy)]
pub struct BoundDepth {
    depth: usize,
    limit: usize,
}

impl BoundDepth {
    pub fn new(limit: usize) -> Self {
        BoundDepth { depth: 0, limit }
    }
}

impl SplitPolicy for BoundDepth {
    fn should_divide(&self, inner: impl FnOnce() -> bool, _length: usize) -> bool {
        self.depth < self.limit && inner()
    }

    fn split(self) -> (Self, Self) {
        let child = BoundDepth {
            depth: self.depth + 1,
            ..self
        };
        (child, child)
    }

    fn cut(self) -> (Self, Self) {
        (self, self)
    }
}

/// Forces a complete division tree down to a given depth.
#[derive(Debug, Clone, Copy)]
pub struct ForceDepth {
    depth: usize,
    limit: usize,
}

impl ForceDepth {
    pub fn new(limit: usize) -> Self {
        ForceDepth { depth: 0, limit }
    }
}

impl SplitPolicy for ForceDepth {
    fn should_divide(&self, inner: impl FnOnce() -> bool, _length: usize) -> bool {
        self.depth < self.limit || inner()
    }

    fn split(self) -> (Self, Self) {
        let child = ForceDepth {
            depth: self.depth + 1,
            ..self
        };
        (child, child)
    }

    fn cut(self) -> (Self, Self) {
        (self, self)
    }
}

/// Stops dividing once the producer is no longer than a threshold.
#[derive(Debug, Clone, Copy)]
pub struct SizeLimit {
    threshold: usize,
}

impl SizeLimit {
    pub fn new(threshold: usize) -> Self {
        SizeLimit { threshold }
    }
}

impl SplitPolicy for SizeLimit {
    fn should_divide(&self, inner: impl FnOnce() -> bool, length: usize) -> bool {
        length > self.threshold && inner()
    }

    fn split(self) -> (Self, Self) {
        (self, self)
    }

    fn cut(self) -> (Self, Self) {
        (self, self)
    }
}

/// Keeps every leaf at an even depth by forcing one more division when the
/// wrapped policy stops at an odd depth.
#[derive(Debug, Clone, Copy, Default)]
pub struct EvenLevels {
    odd: bool,
}

impl EvenLevels {
    pub fn new() -> Self {
        EvenLevels { odd: false }
    }
}

impl SplitPolicy for EvenLevels {
    fn should_divide(&self, inner: impl FnOnce() -> bool, _length: usize) -> bool {
        self.odd || inner()
    }

    fn split(self) -> (Self, Self) {
        let child = EvenLevels { odd: !self.odd };
        (child, child)
    }

    fn cut(self) -> (Self, Self) {
        (self, self)
    }
}

/// Shared active-task counter of a [`Cap`] policy.
///
/// The counter starts at one for the root task, increases when a division
/// is granted and decreases when a task's producer is dropped. The largest
/// value ever reached is kept for inspection.
#[derive(Debug)]
pub struct CapGauge {
    limit: usize,
    active: AtomicUsize,
    high_water: AtomicUsize,
}

impl CapGauge {
    pub fn new(limit: usize) -> Arc<CapGauge> {
        Arc::new(CapGauge {
            limit: limit.max(1),
            active: AtomicUsize::new(0),
            high_water: AtomicUsize::new(0),
        })
    }

    pub fn limit(&self) -> usize {
        self.limit
    }

    pub fn active(&self) -> usize {
        self.active.load(Ordering::SeqCst)
    }

    pub fn high_water(&self) -> usize {
        self.high_water.load(Ordering::SeqCst)
    }

    fn acquire(&self) {
        let now = self.active.fetch_add(1, Ordering::SeqCst) + 1;
        self.high_water.fetch_max(now, Ordering::SeqCst);
    }

    fn try_acquire(&self) -> bool {
        let granted = self
            .active
            .fetch_update(Ordering::SeqCst, Ordering::SeqCst, |n| {
                (n < self.limit).then_some(n + 1)
            });
        match granted {
            Ok(previous) => {
                self.high_water.fetch_max(previous + 1, Ordering::SeqCst);
                true
            }
            Err(_) => false,
        }
    }

    fn release(&self) {
        self.active.fetch_sub(1, Ordering::SeqCst);
    }
}

/// Refuses divisions while the number of live tasks is at a threshold.
///
/// A granted division reserves a slot for the right child at decision
/// time, so the threshold holds even with concurrent deciders. Refusals are
/// not sticky: the next decision point asks again.
#[derive(Debug)]
pub struct Cap {
    gauge: Arc<CapGauge>,
    token: bool,
    reserved: Cell<bool>,
}

impl Cap {
    pub fn new(limit: usize) -> Self {
        Cap::with_gauge(CapGauge::new(limit))
    }

    pub fn with_gauge(gauge: Arc<CapGauge>) -> Self {
        Cap {
            gauge,
            token: false,
            reserved: Cell::new(false),
        }
    }

    fn into_parts(self) -> (Arc<CapGauge>, bool, bool) {
        let this = std::mem::ManuallyDrop::new(self);
        // SAFETY: `this` is never dropped, so the gauge is moved out once.
        let gauge = unsafe { std::ptr::read(&this.gauge) };
        (gauge, this.token, this.reserved.get())
    }
}

impl Drop for Cap {
    fn drop(&mut self) {
        if self.token {
            self.gauge.release();
        }
        if self.reserved.get() {
            self.gauge.release();
        }
    }
}

impl SplitPolicy for Cap {
    fn start(&mut self) {
        if !self.token {
            self.token = true;
            self.gauge.acquire();
        }
    }

    fn should_divide(&self, inner: impl FnOnce() -> bool, _length: usize) -> bool {
        if !inner() {
            return false;
        }
        if self.reserved.get() {
            return true;
        }
        let granted = self.gauge.try_acquire();
        self.reserved.set(granted);
        granted
    }

    fn split(self) -> (Self, Self) {
        let (gauge, token, reserved) = self.into_parts();
        if !reserved {
            // Division requested without a prior decision.
            gauge.acquire();
        }
        let left = Cap {
            gauge: Arc::clone(&gauge),
            token,
            reserved: Cell::new(false),
        };
        let right = Cap {
            gauge,
            token: true,
            reserved: Cell::new(false),
        };
        (left, right)
    }

    fn cut(self) -> (Self, Self) {
        let (gauge, token, reserved) = self.into_parts();
        if reserved {
            gauge.release();
        }
        if !token {
            gauge.acquire();
        }
        let left = Cap {
            gauge: Arc::clone(&gauge),
            token: true,
            reserved: Cell::new(false),
        };
        let right = Cap {
            gauge,
            token: false,
            reserved: Cell::new(false),
        };
        (left, right)
    }
}

/// Left children always divide; right children divide only when they run
/// on another worker than the one that created them, up to a depth limit.
#[derive(Debug, Clone, Copy)]
pub struct JoinContextPolicy {
    depth: usize,
    limit: usize,
    creator: Option<usize>,
    right: bool,
}

impl JoinContextPolicy {
    pub fn new(limit: usize) -> Self {
        JoinContextPolicy {
            depth: 0,
            limit,
            creator: None,
            right: false,
        }
    }
}

impl SplitPolicy for JoinContextPolicy {
    fn should_divide(&self, inner: impl FnOnce() -> bool, _length: usize) -> bool {
        if self.depth >= self.limit {
            return false;
        }
        if self.right && current_worker_index() == self.creator {
            return false;
        }
        inner()
    }

    fn split(self) -> (Self, Self) {
        let creator = current_worker_index();
        let left = JoinContextPolicy {
            depth: self.depth + 1,
            creator,
            right: false,
            ..self
        };
        (
            left,
            JoinContextPolicy {
                right: true,
                ..left
            },
        )
    }

    fn cut(self) -> (Self, Self) {
        (self, self)
    }
}

/// Countdown splitting: each division decrements a counter, and a task
/// whose counter reached zero divides again only if it was stolen, in which
/// case the counter restarts from its initial value.
#[derive(Debug, Clone, Copy)]
pub struct ThiefSplitting {
    counter: usize,
    initial: Option<usize>,
    creator: Option<usize>,
}

impl ThiefSplitting {
    /// `None` selects `⌈log2 p⌉ + 1` for `p` workers.
    pub fn new(initial: Option<usize>) -> Self {
        ThiefSplitting {
            counter: initial.unwrap_or(0),
            initial,
            creator: None,
        }
    }

    fn initial(&self) -> usize {
        self.initial.unwrap_or(0)
    }

    fn stolen(&self) -> bool {
        current_worker_index() != self.creator
    }
}

/// Default initial counter of [`ThiefSplitting`] for `workers` threads.
pub fn default_thief_counter(workers: usize) -> usize {
    workers.max(1).next_power_of_two().trailing_zeros() as usize + 1
}

impl SplitPolicy for ThiefSplitting {
    fn start(&mut self) {
        let initial = self
            .initial
            .unwrap_or_else(|| default_thief_counter(current_num_workers()));
        self.initial = Some(initial);
        self.counter = initial;
        self.creator = current_worker_index();
    }

    fn should_divide(&self, inner: impl FnOnce() -> bool, _length: usize) -> bool {
        (self.counter > 0 || (self.initial() > 0 && self.stolen())) && inner()
    }

    fn split(self) -> (Self, Self) {
        let base = if self.counter == 0 {
            self.initial()
        } else {
            self.counter
        };
        let child = ThiefSplitting {
            counter: base.saturating_sub(1),
            creator: current_worker_index(),
            ..self
        };
        (child, child)
    }

    fn cut(self) -> (Self, Self) {
        (self, self)
    }
}

/// A policy chosen at run time, as parsed from a descriptor such as
/// `bound_depth=4` or `thief_splitting`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicyKind {
    BoundDepth(usize),
    ForceDepth(usize),
    SizeLimit(usize),
    EvenLevels,
    Cap(usize),
    JoinContext(usize),
    ThiefSplitting(Option<usize>),
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicyKind::BoundDepth(d) => write!(f, "bound_depth={d}"),
            PolicyKind::ForceDepth(d) => write!(f, "force_depth={d}"),
            PolicyKind::SizeLimit(t) => write!(f, "size_limit={t}"),
            PolicyKind::EvenLevels => write!(f, "even_levels"),
            PolicyKind::Cap(k) => write!(f, "cap={k}"),
            PolicyKind::JoinContext(d) => write!(f, "join_context={d}"),
            PolicyKind::ThiefSplitting(None) => write!(f, "thief_splitting"),
            PolicyKind::ThiefSplitting(Some(c)) => write!(f, "thief_splitting={c}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid policy {0:?}")]
pub struct PolicyParseError(pub String);

impl FromStr for PolicyKind {
    type Err = PolicyParseError;

    fn from_str(token: &str) -> Result<Self, Self::Err> {
        let err = || PolicyParseError(token.to_string());
        let (name, value) = match token.split_once('=') {
            Some((name, value)) => (name.trim(), Some(value.trim())),
            None => (token.trim(), None),
        };
        let number = |v: Option<&str>| -> Result<usize, PolicyParseError> {
            v.ok_or_else(err)?.parse().map_err(|_| err())
        };
        let kind = match name {
            "bound_depth" => PolicyKind::BoundDepth(number(value)?),
            "force_depth" => PolicyKind::ForceDepth(number(value)?),
            "size_limit" => PolicyKind::SizeLimit(number(value)?),
            "even_levels" if value.is_none() => PolicyKind::EvenLevels,
            "cap" => match number(value)? {
                0 => return Err(err()),
                k => PolicyKind::Cap(k),
            },
            "join_context" => match number(value)? {
                0 => return Err(err()),
                d => PolicyKind::JoinContext(d),
            },
            "thief_splitting" => match value {
                None => PolicyKind::ThiefSplitting(None),
                Some(_) => match number(value)? {
                    0 => return Err(err()),
                    c => PolicyKind::ThiefSplitting(Some(c)),
                },
            },
            _ => return Err(err()),
        };
        Ok(kind)
    }
}

/// Run-time instance of a [`PolicyKind`].
#[derive(Debug)]
pub enum AnyPolicy {
    BoundDepth(BoundDepth),
    ForceDepth(ForceDepth),
    SizeLimit(SizeLimit),
    EvenLevels(EvenLevels),
    Cap(Cap),
    JoinContext(JoinContextPolicy),
    ThiefSplitting(ThiefSplitting),
}

impl From<PolicyKind> for AnyPolicy {
    fn from(kind: PolicyKind) -> Self {
        match kind {
            PolicyKind::BoundDepth(d) => AnyPolicy::BoundDepth(BoundDepth::new(d)),
            PolicyKind::ForceDepth(d) => AnyPolicy::ForceDepth(ForceDepth::new(d)),
            PolicyKind::SizeLimit(t) => AnyPolicy::SizeLimit(SizeLimit::new(t)),
            PolicyKind::EvenLevels => AnyPolicy::EvenLevels(EvenLevels::new()),
            PolicyKind::Cap(k) => AnyPolicy::Cap(Cap::new(k)),
            PolicyKind::JoinContext(d) => AnyPolicy::JoinContext(JoinContextPolicy::new(d)),
            PolicyKind::ThiefSplitting(c) => AnyPolicy::ThiefSplitting(ThiefSplitting::new(c)),
        }
    }
}

macro_rules! each_policy {
    ($value:expr, $p:ident => $body:expr) => {
        match $value {
            AnyPolicy::BoundDepth($p) => $body,
            AnyPolicy::ForceDepth($p) => $body,
            AnyPolicy::SizeLimit($p) => $body,
            AnyPolicy::EvenLevels($p) => $body,
            AnyPolicy::Cap($p) => $body,
            AnyPolicy::JoinContext($p) => $body,
            AnyPolicy::ThiefSplitting($p) => $body,
        }
    };
}

macro_rules! split_policy {
    ($value:expr, $method:ident) => {
        match $value {
            AnyPolicy::BoundDepth(p) => {
                let (l, r) = p.$method();
                (AnyPolicy::BoundDepth(l), AnyPolicy::BoundDepth(r))
            }
            AnyPolicy::ForceDepth(p) => {
                let (l, r) = p.$method();
                (AnyPolicy::ForceDepth(l), AnyPolicy::ForceDepth(r))
            }
            AnyPolicy::SizeLimit(p) => {
                let (l, r) = p.$method();
                (AnyPolicy::SizeLimit(l), AnyPolicy::SizeLimit(r))
            }
            AnyPolicy::EvenLevels(p) => {
                let (l, r) = p.$method();
                (AnyPolicy::EvenLevels(l), AnyPolicy::EvenLevels(r))
            }
            AnyPolicy::Cap(p) => {
                let (l, r) = p.$method();
                (AnyPolicy::Cap(l), AnyPolicy::Cap(r))
            }
            AnyPolicy::JoinContext(p) => {
                let (l, r) = p.$method();
                (AnyPolicy::JoinContext(l), AnyPolicy::JoinContext(r))
            }
            AnyPolicy::ThiefSplitting(p) => {
                let (l, r) = p.$method();
                (AnyPolicy::ThiefSplitting(l), AnyPolicy::ThiefSplitting(r))
            }
        }
    };
}

impl SplitPolicy for AnyPolicy {
    fn start(&mut self) {
        each_policy!(self, p => p.start())
    }

    fn should_divide(&self, inner: impl FnOnce() -> bool, length: usize) -> bool {
        each_policy!(self, p => p.should_divide(inner, length))
    }

    fn split(self) -> (Self, Self) {
        split_policy!(self, split)
    }

    fn cut(self) -> (Self, Self) {
        split_policy!(self, cut)
    }
}

/// A stack of policies applied in order: the first one wraps the producer
/// directly, the last one is outermost and decides first.
#[derive(Debug, Default)]
pub struct PolicyStack {
    layers: Vec<AnyPolicy>,
}

impl PolicyStack {
    pub fn new(kinds: &[PolicyKind]) -> Self {
        PolicyStack {
            layers: kinds.iter().map(|&k| AnyPolicy::from(k)).collect(),
        }
    }

    fn decide(layers: &[AnyPolicy], inner: impl FnOnce() -> bool, length: usize) -> bool {
        match layers.split_last() {
            None => inner(),
            Some((outer, rest)) => {
                outer.should_divide(|| PolicyStack::decide(rest, inner, length), length)
            }
        }
    }

    fn split_with(self, f: impl Fn(AnyPolicy) -> (AnyPolicy, AnyPolicy)) -> (Self, Self) {
        let (left, right) = self.layers.into_iter().map(f).unzip();
        (PolicyStack { layers: left }, PolicyStack { layers: right })
    }
}

impl SplitPolicy for PolicyStack {
    fn start(&mut self) {
        self.layers.iter_mut().for_each(SplitPolicy::start);
    }

    fn should_divide(&self, inner: impl FnOnce() -> bool, length: usize) -> bool {
        PolicyStack::decide(&self.layers, inner, length)
    }

    fn split(self) -> (Self, Self) {
        self.split_with(SplitPolicy::split)
    }

    fn cut(self) -> (Self, Self) {
        self.split_with(SplitPolicy::cut)
    }
}

/// Parses a `+`-separated list of policy descriptors.
pub fn parse_policies(descriptor: &str) -> Result<Vec<PolicyKind>, PolicyParseError> {
    descriptor
        .split('+')
        .filter(|t| !t.trim().is_empty())
        .map(str::parse)
        .collect()
}
