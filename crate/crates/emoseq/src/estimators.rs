//! Distributional statistics: value histograms, per-thread mean
//! distributions, and subjective cluster size curves.

use crate::error::{Error, Result};
use crate::model::{BinSpec, Dataset, Field, Thread};

/// Binned counts of a value distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    spec: BinSpec,
    counts: Vec<u64>,
    total: u64,
}

impl Histogram {
    /// Tallies every value from the iterator into its bin.
    pub fn from_values(values: impl IntoIterator<Item = f64>, spec: BinSpec) -> Result<Self> {
        let mut counts = vec![0u64; spec.bins()];
        let mut total = 0u64;
        for value in values {
            counts[spec.bin_of(value)?] += 1;
            total += 1;
        }
        Ok(Histogram {
            spec,
            counts,
            total,
        })
    }

    pub fn spec(&self) -> &BinSpec {
        &self.spec
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Normalized frequencies; all zero when the histogram is empty.
    pub fn frequencies(&self) -> Vec<f64> {
        if self.total == 0 {
            return vec![0.0; self.counts.len()];
        }
        let total = self.total as f64;
        self.counts.iter().map(|&c| c as f64 / total).collect()
    }
}

/// Histogram of one field over every comment in the dataset.
pub fn histogram(dataset: &Dataset, field: Field, spec: BinSpec) -> Result<Histogram> {
    Histogram::from_values(dataset.values(field), spec)
}

/// Per-thread mean distribution plus the number of threads excluded for
/// having no qualifying comments.
#[derive(Debug, Clone, PartialEq)]
pub struct ThreadMeans {
    pub histogram: Histogram,
    pub excluded_threads: usize,
}

/// For each thread, the mean of `field` over comments passing the optional
/// subjectivity filter (`p_sub >= cut`), binned into a histogram of means.
///
/// Values are summed in a canonical sorted order, so the output is
/// bit-identical across any reordering of comments within threads — in
/// particular a thread shuffle leaves it unchanged exactly.
pub fn thread_means(
    dataset: &Dataset,
    field: Field,
    subjectivity_filter: Option<f64>,
    spec: BinSpec,
) -> Result<ThreadMeans> {
    let mut means = Vec::with_capacity(dataset.thread_count());
    let mut excluded = 0usize;
    for thread in &dataset.threads {
        let mut values: Vec<f64> = thread
            .comments
            .iter()
            .filter(|c| subjectivity_filter.is_none_or(|cut| c.p_sub >= cut))
            .map(|c| c.value(field))
            .collect();
        if values.is_empty() {
            excluded += 1;
            continue;
        }
        values.sort_by(f64::total_cmp);
        let sum: f64 = values.iter().sum();
        means.push(sum / values.len() as f64);
    }
    Ok(ThreadMeans {
        histogram: Histogram::from_values(means, spec)?,
        excluded_threads: excluded,
    })
}

/// Lengths of maximal runs of consecutive comments with `p_sub >= t`, in
/// order of occurrence.
pub fn find_clusters(thread: &Thread, t: f64) -> Vec<usize> {
    let mut clusters = Vec::new();
    let mut run = 0usize;
    for comment in &thread.comments {
        if comment.p_sub >= t {
            run += 1;
        } else if run > 0 {
            clusters.push(run);
            run = 0;
        }
    }
    if run > 0 {
        clusters.push(run);
    }
    clusters
}

/// How cluster sizes are averaged into `⟨S(T)⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Pooling {
    /// Mean over all clusters pooled across threads (cluster-weighted).
    #[default]
    Clusters,
    /// Mean over threads of each thread's own mean cluster size.
    ThreadMean,
}

/// Mean subjective cluster size as a function of the threshold `T`.
///
/// `mean_sizes[k]` is NaN where `cluster_counts[k]` is zero. Note that
/// `cluster_counts` need not be monotone in `T` (raising the threshold can
/// split one cluster into several); `clustered_comments` is non-increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterCurve {
    pub thresholds: Vec<f64>,
    pub mean_sizes: Vec<f64>,
    pub cluster_counts: Vec<u64>,
    pub clustered_comments: Vec<u64>,
}

/// Sweeps the threshold grid, pooling clusters across all threads.
pub fn cluster_curve(dataset: &Dataset, thresholds: &[f64]) -> Result<ClusterCurve> {
    cluster_curve_with(dataset, thresholds, Pooling::default())
}

/// As [`cluster_curve`], with an explicit averaging rule.
pub fn cluster_curve_with(
    dataset: &Dataset,
    thresholds: &[f64],
    pooling: Pooling,
) -> Result<ClusterCurve> {
    if thresholds.is_empty() {
        return Err(Error::InvalidArgument(
            "threshold grid must not be empty".into(),
        ));
    }
    if thresholds.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidArgument(
            "threshold grid must be ascending".into(),
        ));
    }

    let mut mean_sizes = Vec::with_capacity(thresholds.len());
    let mut cluster_counts = Vec::with_capacity(thresholds.len());
    let mut clustered_comments = Vec::with_capacity(thresholds.len());
    for &t in thresholds {
        let mut clusters = 0u64;
        let mut comments = 0u64;
        let mut per_thread_sum = 0.0f64;
        let mut clustered_threads = 0u64;
        for thread in &dataset.threads {
            let lengths = find_clusters(thread, t);
            if lengths.is_empty() {
                continue;
            }
            let thread_comments: usize = lengths.iter().sum();
            clusters += lengths.len() as u64;
            comments += thread_comments as u64;
            per_thread_sum += thread_comments as f64 / lengths.len() as f64;
            clustered_threads += 1;
        }
        let mean = match pooling {
            Pooling::Clusters if clusters > 0 => comments as f64 / clusters as f64,
            Pooling::ThreadMean if clustered_threads > 0 => {
                per_thread_sum / clustered_threads as f64
            }
            _ => f64::NAN,
        };
        mean_sizes.push(mean);
        cluster_counts.push(clusters);
        clustered_comments.push(comments);
    }

    Ok(ClusterCurve {
        thresholds: thresholds.to_vec(),
        mean_sizes,
        cluster_counts,
        clustered_comments,
    })
}

/// Evenly spaced thresholds `start, start+step, …` up to `stop` inclusive
/// (within one part in 10^9 of the step).
pub fn threshold_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if step <= 0.0 || step.is_nan() {
        return Err(Error::InvalidArgument(format!(
            "threshold step must be positive, got {step}"
        )));
    }
    if stop < start {
        return Err(Error::InvalidArgument(format!(
            "threshold range is empty: {start}..{stop}"
        )));
    }
    let count = ((stop - start) / step + 1.0 + 1e-9).floor() as usize;
    Ok((0..count).map(|k| start + k as f64 * step).collect())
}
