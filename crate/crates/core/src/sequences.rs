//! Pulse-schedule compilation on normalized time `[0, 1]`.
//!
//! Every scheme is built from the same primitive: a [`Block`] is a pulse
//! pattern on `[0, 1]` plus the pulses that close it at `t = 1`. Nesting a
//! block into an interval `[a, b]` rescales its times; its closing pulses land
//! at `b`, where they are composed (first) with whatever the outer level
//! applies there. A pulse instant therefore always carries one ordered list of
//! operator labels, and the simulator sees one unitary per instant.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::CMatrix;
use crate::operators::{Moos, Operator};

/// Budget on the exponent of `2^k` interval counts (CDD and first-order).
pub const MAX_DOUBLINGS: usize = 20;
pub const MAX_FIRST_ORDER_LEVELS: usize = 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SequenceError {
    #[error("interval budget exceeded: {what} = {value} > {limit}")]
    BudgetExceeded { what: &'static str, value: usize, limit: usize },
    #[error(
        "inner level {level} has odd order {order}; nested UDD needs even inner orders so each inner block is \
         time-symmetric and self-similar (pass allow_odd_inner to build it anyway)"
    )]
    OddInnerOrder { level: usize, order: usize },
    #[error("{requested} levels requested but the MOOS has only {available} elements")]
    TooManyLevels { requested: usize, available: usize },
    #[error("order vector is empty")]
    EmptyOrders,
    #[error("operator label {0:?} does not resolve")]
    UnresolvedLabel(String),
    #[error("invalid schedule: {0}")]
    Invalid(String),
}

/// Pulses applied at one instant, composed in list order (first applied first).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Event {
    pub t: f64,
    pub ops: Vec<String>,
}

/// A compiled schedule. Serializes to the schedule JSON format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Schedule {
    pub scheme: String,
    pub orders: Vec<usize>,
    pub events: Vec<Event>,
    /// Pulses applied at `t = 1`, in order.
    pub closing: Vec<String>,
    pub intervals: usize,
}

impl Schedule {
    fn from_block(scheme: &str, orders: Vec<usize>, block: Block) -> Self {
        let intervals = block.events.len() + 1;
        Self { scheme: scheme.to_string(), orders, events: block.events, closing: block.closing, intervals }
    }

    /// Free evolution over the whole window.
    pub fn free() -> Self {
        Self::from_block("free", vec![0], Block::default())
    }

    pub fn validate(&self) -> Result<(), SequenceError> {
        let mut last = 0.0;
        for e in &self.events {
            if !(e.t > last && e.t < 1.0) {
                return Err(SequenceError::Invalid(format!(
                    "event time {} must lie in (0, 1) and follow {}",
                    e.t, last
                )));
            }
            last = e.t;
        }
        if self.intervals != self.events.len() + 1 {
            return Err(SequenceError::Invalid(format!(
                "{} events imply {} intervals, header says {}",
                self.events.len(),
                self.events.len() + 1,
                self.intervals
            )));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, SequenceError> {
        let s: Schedule = serde_json::from_str(text).map_err(|e| SequenceError::Invalid(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schedule serializes")
    }

    /// Free-evolution durations as fractions of the window.
    pub fn interval_lengths(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.events.len() + 1);
        let mut last = 0.0;
        for e in &self.events {
            out.push(e.t - last);
            last = e.t;
        }
        out.push(1.0 - last);
        out
    }

    /// Number of individual pulses per label, closing pulses included.
    pub fn pulse_counts(&self) -> Vec<(String, usize)> {
        let mut counts: Vec<(String, usize)> = Vec::new();
        let all = self.events.iter().flat_map(|e| e.ops.iter()).chain(self.closing.iter());
        for op in all {
            match counts.iter_mut().find(|(l, _)| l == op) {
                Some((_, n)) => *n += 1,
                None => counts.push((op.clone(), 1)),
            }
        }
        counts
    }
}

/// Pulse pattern on `[0, 1]` with its closing pulses.
#[derive(Debug, Clone, Default, PartialEq)]
struct Block {
    events: Vec<Event>,
    closing: Vec<String>,
}

impl Block {
    /// Concatenate `inner` blocks over the intervals cut by `cuts` (interior
    /// points of `(0, 1)`), applying `pulses[k]` at `cuts[k]` after the
    /// closing pulses of the block that ends there.
    fn nest(cuts: &[f64], pulses: &[Vec<String>], inner: &Block, closing: Vec<String>) -> Block {
        debug_assert_eq!(cuts.len(), pulses.len());
        let mut events = Vec::new();
        let mut start = 0.0;
        for k in 0..=cuts.len() {
            let end = if k < cuts.len() { cuts[k] } else { 1.0 };
            let width = end - start;
            events.extend(inner.events.iter().map(|e| Event { t: start + width * e.t, ops: e.ops.clone() }));
            if k < cuts.len() {
                let mut ops = inner.closing.clone();
                ops.extend(pulses[k].iter().cloned());
                events.push(Event { t: end, ops });
            }
            start = end;
        }
        let mut all_closing = inner.closing.clone();
        all_closing.extend(closing);
        Block { events, closing: all_closing }
    }

    /// `[Ω] B(1/2) Ω B(1/2)`.
    fn echo(inner: &Block, label: &str, include_closing: bool) -> Block {
        let closing = if include_closing { vec![label.to_string()] } else { Vec::new() };
        Block::nest(&[0.5], &[vec![label.to_string()]], inner, closing)
    }

    fn udd(inner: &Block, label: &str, order: usize, closing: bool) -> Block {
        let cuts = udd_times(order);
        let pulses = vec![vec![label.to_string()]; order];
        let closing = if closing && order % 2 == 1 { vec![label.to_string()] } else { Vec::new() };
        Block::nest(&cuts, &pulses, inner, closing)
    }
}

/// UDD pulse fractions `sin²(nπ/(2N+2))`, n = 1..N.
pub fn udd_times(order: usize) -> Vec<f64> {
    let denom = 2.0 * order as f64 + 2.0;
    (1..=order)
        .map(|n| {
            let s = (n as f64 * std::f64::consts::PI / denom).sin();
            s * s
        })
        .collect()
}

/// Single-operator UDD of order `order`; the leftover `Ω^N` is not applied.
pub fn udd_schedule(op: &Operator, order: usize) -> Schedule {
    let block = Block::udd(&Block::default(), &op.label, order, false);
    Schedule::from_block("udd", vec![order], block)
}

fn first_order_block(labels: &[String], inner: &Block, include_closing: bool) -> Block {
    labels.iter().fold(inner.clone(), |b, label| Block::echo(&b, label, include_closing))
}

/// Iterated first-order scheme over all MOOS elements: `2^L` equal intervals,
/// element `j` applied at boundary `k` when `k` has `j - 1` trailing zeros.
pub fn first_order_schedule(moos: &Moos, include_closing: bool) -> Result<Schedule, SequenceError> {
    let l = moos.len();
    if l > MAX_FIRST_ORDER_LEVELS {
        return Err(SequenceError::BudgetExceeded { what: "MOOS size", value: l, limit: MAX_FIRST_ORDER_LEVELS });
    }
    let block = first_order_block(&moos.labels(), &Block::default(), include_closing);
    Ok(Schedule::from_block("first_order", vec![1; l], block))
}

/// Inner schedule followed by its time mirror on a doubled window.
pub fn sdd_schedule(inner: &Schedule) -> Schedule {
    let mut events: Vec<Event> = inner.events.iter().map(|e| Event { t: e.t / 2.0, ops: e.ops.clone() }).collect();
    // The midpoint always marks a block boundary, even when nothing is applied.
    let mut mid = inner.closing.clone();
    mid.extend(inner.closing.iter().rev().cloned());
    events.push(Event { t: 0.5, ops: mid });
    events.extend(
        inner.events.iter().rev().map(|e| Event { t: 1.0 - e.t / 2.0, ops: e.ops.iter().rev().cloned().collect() }),
    );
    let intervals = events.len() + 1;
    Schedule { scheme: "sdd".into(), orders: inner.orders.clone(), events, closing: Vec::new(), intervals }
}

/// Uniform concatenation: each free interval of the first-order pattern
/// replaced by the order-`N-1` sequence. `2^{NL}` intervals.
pub fn cdd_uniform(moos: &Moos, order: usize) -> Result<Schedule, SequenceError> {
    let budget = order * moos.len();
    if budget > MAX_DOUBLINGS {
        return Err(SequenceError::BudgetExceeded { what: "N·L", value: budget, limit: MAX_DOUBLINGS });
    }
    let labels = moos.labels();
    let block = (0..order).fold(Block::default(), |b, _| first_order_block(&labels, &b, true));
    Ok(Schedule::from_block("cdd", vec![order; moos.len()], block))
}

/// Level-wise concatenation: level `l` doubles its echo `N_l` times around
/// all inner levels. `2^{ΣN_l}` intervals.
pub fn cdd_nested(moos: &Moos, orders: &[usize]) -> Result<Schedule, SequenceError> {
    check_levels(moos, orders)?;
    let total: usize = orders.iter().sum();
    if total > MAX_DOUBLINGS {
        return Err(SequenceError::BudgetExceeded { what: "ΣN_l", value: total, limit: MAX_DOUBLINGS });
    }
    let mut block = Block::default();
    for (op, &n) in moos.elements().iter().zip(orders) {
        for _ in 0..n {
            block = Block::echo(&block, &op.label, true);
        }
    }
    Ok(Schedule::from_block("cdd_nested", orders.to_vec(), block))
}

/// Nested UDD. Level `l` (1 = innermost) places `N_l` pulses of `Ω_l` at
/// UDD fractions of every level-`l+1` interval. An odd inner level closes
/// each block with its leftover `Ω_l`; the outermost leftover is not applied.
pub fn nudd(moos: &Moos, orders: &[usize], allow_odd_inner: bool) -> Result<Schedule, SequenceError> {
    check_levels(moos, orders)?;
    let levels = orders.len();
    if !allow_odd_inner {
        if let Some((i, &n)) = orders[..levels - 1].iter().enumerate().find(|(_, &n)| n % 2 == 1) {
            return Err(SequenceError::OddInnerOrder { level: i + 1, order: n });
        }
    }
    let intervals: usize = orders.iter().map(|n| n + 1).product();
    if intervals > 1 << MAX_DOUBLINGS {
        return Err(SequenceError::BudgetExceeded { what: "Π(N_l+1)", value: intervals, limit: 1 << MAX_DOUBLINGS });
    }
    let mut block = Block::default();
    for (level, (op, &n)) in moos.elements().iter().zip(orders).enumerate() {
        let inner_level = level + 1 < levels;
        block = Block::udd(&block, &op.label, n, inner_level);
    }
    Ok(Schedule::from_block("nudd", orders.to_vec(), block))
}

/// Outer spin echo `Ω U(1/2) Ω U(1/2)` around an existing schedule.
pub fn echo_wrap(inner: &Schedule, label: &str) -> Schedule {
    let block = Block { events: inner.events.clone(), closing: inner.closing.clone() };
    let wrapped = Block::echo(&block, label, true);
    let mut orders = inner.orders.clone();
    orders.push(1);
    Schedule::from_block(&format!("{}+echo", inner.scheme), orders, wrapped)
}

fn check_levels(moos: &Moos, orders: &[usize]) -> Result<(), SequenceError> {
    if orders.is_empty() {
        return Err(SequenceError::EmptyOrders);
    }
    if orders.len() > moos.len() {
        return Err(SequenceError::TooManyLevels { requested: orders.len(), available: moos.len() });
    }
    Ok(())
}

/// Anything that can turn a pulse label into an operator.
pub trait OperatorLookup {
    fn lookup(&self, label: &str) -> Option<&Operator>;
    /// System dimension shared by the operators, if known.
    fn system_dim(&self) -> Option<usize>;
}

impl OperatorLookup for Moos {
    fn lookup(&self, label: &str) -> Option<&Operator> {
        self.get(label)
    }
    fn system_dim(&self) -> Option<usize> {
        Some(self.dim())
    }
}

impl OperatorLookup for [Operator] {
    fn lookup(&self, label: &str) -> Option<&Operator> {
        self.iter().find(|o| o.label == label)
    }
    fn system_dim(&self) -> Option<usize> {
        self.first().map(Operator::dim)
    }
}

impl OperatorLookup for Vec<Operator> {
    fn lookup(&self, label: &str) -> Option<&Operator> {
        self.as_slice().lookup(label)
    }
    fn system_dim(&self) -> Option<usize> {
        self.as_slice().system_dim()
    }
}

/// Ordered product of every pulse in the schedule, closing pulses included.
pub fn net_pulse_operator<L: OperatorLookup + ?Sized>(schedule: &Schedule, ops: &L) -> Result<Operator, SequenceError> {
    let labels = schedule.events.iter().flat_map(|e| e.ops.iter()).chain(schedule.closing.iter());
    let mut product: Option<CMatrix> = None;
    for label in labels {
        let op = ops.lookup(label).ok_or_else(|| SequenceError::UnresolvedLabel(label.clone()))?;
        product = Some(match product {
            None => op.matrix.clone(),
            Some(p) => &op.matrix * &p,
        });
    }
    let matrix = match product {
        Some(p) => p,
        None => CMatrix::identity(ops.system_dim().unwrap_or(1)),
    };
    Ok(Operator::new("net", matrix))
}
