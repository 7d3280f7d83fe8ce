//! Domain data model shared by all estimators and generators.
//!
//! A [`Dataset`] is a collection of [`Thread`]s; a thread is an ordered chain
//! of [`Comment`]s, each carrying a positive probability `p_pos` and a
//! subjective probability `p_sub` in `[0, 1]`. [`BinSpec`] is the uniform
//! binning of `[0, 1]` used by every discretized estimator.
//!
//! All types here are immutable after construction and safe to share across
//! concurrent readers; estimators take read-only views.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which annotated probability a statistic runs over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Field {
    /// Positive probability `p_pos`.
    Pos,
    /// Subjective probability `p_sub`.
    Sub,
}

impl std::fmt::Display for Field {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Field::Pos => write!(f, "pos"),
            Field::Sub => write!(f, "sub"),
        }
    }
}

/// One annotated post: its 0-based position within the thread plus the two
/// classifier scores.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Comment {
    pub index: usize,
    pub p_pos: f64,
    pub p_sub: f64,
}

impl Comment {
    pub fn new(index: usize, p_pos: f64, p_sub: f64) -> Self {
        Comment {
            index,
            p_pos,
            p_sub,
        }
    }

    /// The selected probability score.
    pub fn value(&self, field: Field) -> f64 {
        match field {
            Field::Pos => self.p_pos,
            Field::Sub => self.p_sub,
        }
    }
}

/// An ordered chain of comments under one root post.
///
/// Invariant: comments are sorted by `index`, contiguous from `0` to `N-1`.
/// Order-sensitive statistics (pairs, triples, clusters) run over this chain
/// and never span thread boundaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Thread {
    pub id: String,
    pub comments: Vec<Comment>,
}

impl Thread {
    pub fn new(id: impl Into<String>, comments: Vec<Comment>) -> Self {
        Thread {
            id: id.into(),
            comments,
        }
    }

    /// Builds a thread from bare `(p_pos, p_sub)` pairs, assigning indices
    /// `0..N-1` in order.
    pub fn from_values(id: impl Into<String>, values: &[(f64, f64)]) -> Self {
        let comments = values
            .iter()
            .enumerate()
            .map(|(i, &(p_pos, p_sub))| Comment::new(i, p_pos, p_sub))
            .collect();
        Thread::new(id, comments)
    }

    pub fn len(&self) -> usize {
        self.comments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.comments.is_empty()
    }

    /// Values of the selected field in chain order.
    pub fn values(&self, field: Field) -> impl Iterator<Item = f64> + '_ {
        self.comments.iter().map(move |c| c.value(field))
    }
}

/// A collection of threads plus a free-form provenance label.
///
/// Threads are kept sorted by id so that serialization order is canonical:
/// writing and re-reading a dataset reproduces it thread for thread.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub threads: Vec<Thread>,
    pub source_label: String,
}

impl Dataset {
    /// Builds a dataset, sorting threads into canonical id order.
    pub fn new(mut threads: Vec<Thread>, source_label: impl Into<String>) -> Self {
        threads.sort_by(|a, b| a.id.cmp(&b.id));
        Dataset {
            threads,
            source_label: source_label.into(),
        }
    }

    pub fn empty(source_label: impl Into<String>) -> Self {
        Dataset::new(Vec::new(), source_label)
    }

    pub fn thread_count(&self) -> usize {
        self.threads.len()
    }

    /// Total comment count over all threads.
    pub fn comment_count(&self) -> usize {
        self.threads.iter().map(Thread::len).sum()
    }

    /// Every comment's selected field, in thread order then chain order.
    pub fn values(&self, field: Field) -> impl Iterator<Item = f64> + '_ {
        self.threads.iter().flat_map(move |t| t.values(field))
    }
}

/// Which bin receives a value falling exactly on an interior bin edge.
///
/// The top edge of the last bin is closed under both rules, so `1.0` always
/// maps to the last bin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum EdgeRule {
    /// Interior edges belong to the bin above: bins are `[k*w, (k+1)*w)`.
    #[default]
    Upper,
    /// Interior edges belong to the bin below: bins are `(k*w, (k+1)*w]`,
    /// with the first bin closed at 0.
    Lower,
}

/// Uniform binning of `[0, 1]` into `ceil(1/width)` bins.
///
/// The default rule assigns interior edges to the upper bin (left-closed,
/// right-open) except the final bin, which is closed on both sides. With
/// width 0.1 this makes `[0.9, 1.0]` a single top bin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinSpec {
    width: f64,
    bins: usize,
    edge_rule: EdgeRule,
}

impl BinSpec {
    /// A binning with the given width in `(0, 1]` and the default edge rule.
    pub fn new(width: f64) -> Result<Self> {
        Self::with_edge_rule(width, EdgeRule::default())
    }

    pub fn with_edge_rule(width: f64, edge_rule: EdgeRule) -> Result<Self> {
        if !(width > 0.0 && width <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "bin width must be in (0,1], got {width}"
            )));
        }
        // ceil(1/width), tolerating widths like 1/3 whose reciprocal lands
        // a few ulps above or below an integer.
        let raw = 1.0 / width;
        let bins = if (raw - raw.round()).abs() < 1e-9 {
            raw.round() as usize
        } else {
            raw.ceil() as usize
        };
        Ok(BinSpec {
            width,
            bins,
            edge_rule,
        })
    }

    /// The default binning: width 0.1, ten bins.
    pub fn tenths() -> Self {
        BinSpec::new(0.1).expect("0.1 is a valid width")
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn edge_rule(&self) -> EdgeRule {
        self.edge_rule
    }

    /// Center of bin `b`, used for synthetic state values and TSV output.
    pub fn center(&self, bin: usize) -> f64 {
        let lo = bin as f64 * self.width;
        let hi = ((bin + 1) as f64 * self.width).min(1.0);
        0.5 * (lo + hi)
    }

    /// All bin centers in order.
    pub fn centers(&self) -> Vec<f64> {
        (0..self.bins).map(|b| self.center(b)).collect()
    }

    /// `[lo, hi)` bounds of bin `b` (the last bin's top bound is 1.0, closed).
    pub fn bounds(&self, bin: usize) -> (f64, f64) {
        let lo = bin as f64 * self.width;
        let hi = if bin + 1 == self.bins {
            1.0
        } else {
            (bin + 1) as f64 * self.width
        };
        (lo, hi)
    }

    /// Maps a value in `[0, 1]` to its unique bin index. Edges are the
    /// floating-point products `k * width`, consistent with [`Self::bounds`].
    pub fn bin_of(&self, value: f64) -> Result<usize> {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::domain(value));
        }
        if value >= 1.0 {
            return Ok(self.bins - 1);
        }
        // The division may round across an edge; compare against the actual
        // edge products to settle membership exactly.
        let mut bin = (value / self.width).floor() as usize;
        if value >= (bin + 1) as f64 * self.width {
            bin += 1;
        } else if bin > 0 && value < bin as f64 * self.width {
            bin -= 1;
        }
        if self.edge_rule == EdgeRule::Lower && bin > 0 && value == bin as f64 * self.width {
            bin -= 1;
        }
        Ok(bin.min(self.bins - 1))
    }
}

/// One invariant violation found by [`validate`], with its location.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// A probability outside `[0, 1]` (or NaN).
    ValueOutOfRange {
        thread_id: String,
        index: usize,
        field: Field,
        value: f64,
    },
    /// Stored comment index does not match its position in the chain.
    IndexMismatch {
        thread_id: String,
        position: usize,
        stored: usize,
    },
    /// A stored thread with no comments.
    EmptyThread { thread_id: String },
    /// Two threads share an id.
    DuplicateThreadId { thread_id: String },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::ValueOutOfRange {
                thread_id,
                index,
                field,
                value,
            } => write!(
                f,
                "thread {thread_id:?} comment {index}: p_{field} = {value} outside [0,1]"
            ),
            Violation::IndexMismatch {
                thread_id,
                position,
                stored,
            } => write!(
                f,
                "thread {thread_id:?}: comment at position {position} has index {stored}"
            ),
            Violation::EmptyThread { thread_id } => {
                write!(f, "thread {thread_id:?} has no comments")
            }
            Violation::DuplicateThreadId { thread_id } => {
                write!(f, "thread id {thread_id:?} appears more than once")
            }
        }
    }
}

/// Counts of threads and comments plus every invariant violation found.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub threads: usize,
    pub comments: usize,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks every dataset invariant, reporting violations rather than failing.
pub fn validate(dataset: &Dataset) -> ValidationReport {
    let mut violations = Vec::new();
    let mut seen_ids: std::collections::HashSet<&str> = std::collections::HashSet::new();

    for thread in &dataset.threads {
        if !seen_ids.insert(thread.id.as_str()) {
            violations.push(Violation::DuplicateThreadId {
                thread_id: thread.id.clone(),
            });
        }
        if thread.is_empty() {
            violations.push(Violation::EmptyThread {
                thread_id: thread.id.clone(),
            });
        }
        for (position, comment) in thread.comments.iter().enumerate() {
            if comment.index != position {
                violations.push(Violation::IndexMismatch {
                    thread_id: thread.id.clone(),
                    position,
                    stored: comment.index,
                });
            }
            for field in [Field::Pos, Field::Sub] {
                let value = comment.value(field);
                if !(0.0..=1.0).contains(&value) {
                    violations.push(Violation::ValueOutOfRange {
                        thread_id: thread.id.clone(),
                        index: comment.index,
                        field,
                        value,
                    });
                }
            }
        }
    }

    ValidationReport {
        threads: dataset.thread_count(),
        comments: dataset.comment_count(),
        violations,
    }
}
