//! Sequential-dependence statistics over consecutive comments: correlation
//! ratio, PMI matrix, mutual information with shuffle baselines, and
//! three-step correlations.
//!
//! Everything here is computed from counts of within-thread consecutive
//! pairs (or triples); pairs never span thread boundaries. Counting is
//! parallelized across threads with associative merging, and the final
//! statistics are evaluated single-threaded from the merged counts, so
//! results are deterministic.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{BinSpec, Dataset, Field};
use crate::nullmodel::{global_shuffle, thread_shuffle, Seed};
use rand::Rng;

/// Base of the logarithm used for PMI and mutual information.
///
/// Natural log (nats) is the default throughout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LogBase {
    #[default]
    E,
    Two,
    Ten,
}

impl LogBase {
    fn nats_per_unit(self) -> f64 {
        match self {
            LogBase::E => 1.0,
            LogBase::Two => std::f64::consts::LN_2,
            LogBase::Ten => std::f64::consts::LN_10,
        }
    }

    fn log(self, x: f64) -> f64 {
        match self {
            LogBase::E => x.ln(),
            LogBase::Two => x.log2(),
            LogBase::Ten => x.log10(),
        }
    }
}

/// Joint counts of consecutive pairs: entry `(i, j)` counts pairs with
/// `x_{n-1}` in bin `i` and `x_n` in bin `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairCountMatrix {
    spec: BinSpec,
    counts: Vec<u64>,
    total_pairs: u64,
}

impl PairCountMatrix {
    pub fn spec(&self) -> &BinSpec {
        &self.spec
    }

    pub fn bins(&self) -> usize {
        self.spec.bins()
    }

    pub fn get(&self, prev_bin: usize, next_bin: usize) -> u64 {
        self.counts[prev_bin * self.bins() + next_bin]
    }

    pub fn total_pairs(&self) -> u64 {
        self.total_pairs
    }

    /// Occurrence counts of each bin as `x_{n-1}`.
    pub fn row_totals(&self) -> Vec<u64> {
        let b = self.bins();
        (0..b)
            .map(|i| self.counts[i * b..(i + 1) * b].iter().sum())
            .collect()
    }

    /// Occurrence counts of each bin as `x_n`.
    pub fn col_totals(&self) -> Vec<u64> {
        let b = self.bins();
        let mut totals = vec![0u64; b];
        for row in self.counts.chunks(b) {
            for (total, &n) in totals.iter_mut().zip(row) {
                *total += n;
            }
        }
        totals
    }

    /// The pair matrix of the reversed sequences.
    pub fn transpose(&self) -> PairCountMatrix {
        let b = self.bins();
        let mut counts = vec![0u64; b * b];
        for i in 0..b {
            for j in 0..b {
                counts[j * b + i] = self.counts[i * b + j];
            }
        }
        PairCountMatrix {
            spec: self.spec,
            counts,
            total_pairs: self.total_pairs,
        }
    }

    /// Builds a matrix directly from counts (row-major, length `bins²`).
    pub fn from_counts(spec: BinSpec, counts: Vec<u64>) -> Result<Self> {
        if counts.len() != spec.bins() * spec.bins() {
            return Err(Error::InvalidArgument(format!(
                "expected {} counts, got {}",
                spec.bins() * spec.bins(),
                counts.len()
            )));
        }
        let total_pairs = counts.iter().sum();
        Ok(PairCountMatrix {
            spec,
            counts,
            total_pairs,
        })
    }
}

/// Counts every within-thread consecutive pair `(x_{n-1}, x_n)` exactly once.
pub fn pair_counts(dataset: &Dataset, field: Field, spec: BinSpec) -> Result<PairCountMatrix> {
    let b = spec.bins();
    let counts = dataset
        .threads
        .par_iter()
        .try_fold(
            || vec![0u64; b * b],
            |mut acc, thread| -> Result<Vec<u64>> {
                let mut prev: Option<usize> = None;
                for comment in &thread.comments {
                    let bin = spec.bin_of(comment.value(field))?;
                    if let Some(p) = prev {
                        acc[p * b + bin] += 1;
                    }
                    prev = Some(bin);
                }
                Ok(acc)
            },
        )
        .try_reduce(
            || vec![0u64; b * b],
            |mut left, right| {
                for (l, r) in left.iter_mut().zip(right) {
                    *l += r;
                }
                Ok(left)
            },
        )?;
    let total_pairs = counts.iter().sum();
    Ok(PairCountMatrix {
        spec,
        counts,
        total_pairs,
    })
}

/// A matrix of correlation ratios `C` or their logarithms (PMI), with a mask
/// of which entries had sufficient counts to be defined.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    spec: BinSpec,
    values: Vec<f64>,
    defined: Vec<bool>,
}

impl CorrelationMatrix {
    pub fn spec(&self) -> &BinSpec {
        &self.spec
    }

    pub fn bins(&self) -> usize {
        self.spec.bins()
    }

    /// Entry `(prev_bin, next_bin)`, or `None` if masked.
    pub fn get(&self, prev_bin: usize, next_bin: usize) -> Option<f64> {
        let idx = prev_bin * self.bins() + next_bin;
        self.defined[idx].then(|| self.values[idx])
    }

    pub fn is_defined(&self, prev_bin: usize, next_bin: usize) -> bool {
        self.defined[prev_bin * self.bins() + next_bin]
    }

    pub fn defined_count(&self) -> usize {
        self.defined.iter().filter(|&&d| d).count()
    }
}

/// Correlation ratio `C(x_n, x_{n-1}) = p(x_n | x_{n-1}) / p(x_n)` per bin
/// pair. `C = 1` means picking `x_n` after `x_{n-1}` is no different from
/// picking it at random; `C = 2` means twice as likely.
///
/// Entries are masked undefined where the joint count is zero or where the
/// row or column total falls below `min_count`.
pub fn correlation_ratio(pairs: &PairCountMatrix, min_count: u64) -> Result<CorrelationMatrix> {
    if pairs.total_pairs() == 0 {
        return Err(Error::EmptyResult("no consecutive pairs to correlate".into()));
    }
    let b = pairs.bins();
    let rows = pairs.row_totals();
    let cols = pairs.col_totals();
    let total = pairs.total_pairs() as f64;

    let mut values = vec![f64::NAN; b * b];
    let mut defined = vec![false; b * b];
    for i in 0..b {
        for j in 0..b {
            let n = pairs.get(i, j);
            if n == 0 || rows[i] < min_count || cols[j] < min_count {
                continue;
            }
            values[i * b + j] = (n as f64 * total) / (rows[i] as f64 * cols[j] as f64);
            defined[i * b + j] = true;
        }
    }
    if !defined.iter().any(|&d| d) {
        return Err(Error::EmptyResult(
            "every correlation ratio entry is masked".into(),
        ));
    }
    Ok(CorrelationMatrix {
        spec: *pairs.spec(),
        values,
        defined,
    })
}

/// `PMI = log C`, entry-wise over the defined entries. Masked cells stay
/// masked, so `log 0` is never emitted.
pub fn pmi_matrix(c: &CorrelationMatrix) -> CorrelationMatrix {
    pmi_matrix_in(c, LogBase::default())
}

/// As [`pmi_matrix`] with an explicit logarithm base.
pub fn pmi_matrix_in(c: &CorrelationMatrix, base: LogBase) -> CorrelationMatrix {
    let values = c
        .values
        .iter()
        .zip(&c.defined)
        .map(|(&v, &d)| if d { base.log(v) } else { f64::NAN })
        .collect();
    CorrelationMatrix {
        spec: c.spec,
        values,
        defined: c.defined.clone(),
    }
}

fn mi_from_counts(counts: &[u64], b: usize) -> f64 {
    let mut rows = vec![0u64; b];
    let mut cols = vec![0u64; b];
    let mut total = 0u64;
    for i in 0..b {
        for j in 0..b {
            let n = counts[i * b + j];
            rows[i] += n;
            cols[j] += n;
            total += n;
        }
    }
    if total == 0 {
        return 0.0;
    }
    let total_f = total as f64;
    let mut sum = 0.0;
    for i in 0..b {
        if rows[i] == 0 {
            continue;
        }
        for j in 0..b {
            let n = counts[i * b + j];
            if n == 0 {
                continue;
            }
            // n·N and row·col are exact in f64 up to ~9e15, so an exactly
            // factorized joint yields ratio 1.0 and MI exactly 0.
            let ratio = (n as f64 * total_f) / (rows[i] as f64 * cols[j] as f64);
            sum += (n as f64 / total_f) * ratio.ln();
        }
    }
    sum.max(0.0)
}

/// Plug-in mutual information of the pair distribution, in nats. Always
/// non-negative; exactly zero for an exactly factorized joint.
pub fn mutual_information(pairs: &PairCountMatrix) -> f64 {
    mi_from_counts(&pairs.counts, pairs.bins())
}

/// As [`mutual_information`] with an explicit logarithm base.
pub fn mutual_information_in(pairs: &PairCountMatrix, base: LogBase) -> f64 {
    mutual_information(pairs) / base.nats_per_unit()
}

/// Plug-in MI together with a Miller-Madow style bias-corrected estimate.
///
/// The plug-in estimator is biased upward at finite samples; the correction
/// subtracts `(nonzero cells - nonzero rows - nonzero cols + 1) / (2 N)`.
/// The corrected value may be slightly negative near independence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MiEstimate {
    pub plugin: f64,
    pub corrected: f64,
}

pub fn mi_estimate(pairs: &PairCountMatrix) -> MiEstimate {
    let plugin = mutual_information(pairs);
    let nonzero_cells = pairs.counts.iter().filter(|&&n| n > 0).count() as f64;
    let nonzero_rows = pairs.row_totals().iter().filter(|&&n| n > 0).count() as f64;
    let nonzero_cols = pairs.col_totals().iter().filter(|&&n| n > 0).count() as f64;
    let correction = if pairs.total_pairs() == 0 {
        0.0
    } else {
        (nonzero_cells - nonzero_rows - nonzero_cols + 1.0)
            / (2.0 * pairs.total_pairs() as f64)
    };
    MiEstimate {
        plugin,
        corrected: plugin - correction,
    }
}

/// One row of the MI report: a dataset variant with its estimates and
/// bootstrap standard error.
#[derive(Debug, Clone, PartialEq)]
pub struct MiRow {
    pub label: &'static str,
    pub plugin: f64,
    pub corrected: f64,
    pub bootstrap_se: f64,
}

/// MI of the original data and of its two shuffles, with bias-corrected
/// estimates and thread-bootstrap standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct MiReport {
    pub rows: Vec<MiRow>,
    pub bootstrap_replicates: usize,
}

pub const DEFAULT_BOOTSTRAP_REPLICATES: usize = 200;

/// Reproduces the shuffle-comparison pipeline: MI on the original data, on a
/// thread shuffle, and on a global shuffle, each with a bootstrap standard
/// error from resampling whole threads with replacement.
pub fn mi_report(
    dataset: &Dataset,
    field: Field,
    spec: BinSpec,
    seed: Seed,
    replicates: usize,
) -> Result<MiReport> {
    let variants: [(&'static str, Dataset); 2] = [
        ("thread shuffle", thread_shuffle(dataset, seed.derive(1))),
        ("global shuffle", global_shuffle(dataset, seed.derive(2))),
    ];

    let mut rows = Vec::with_capacity(3);
    for (stream, (label, data)) in std::iter::once(("no shuffle", dataset))
        .chain(variants.iter().map(|(l, d)| (*l, d)))
        .enumerate()
    {
        let binned = bin_threads(data, field, spec)?;
        let estimate = {
            let counts = count_pairs_binned(&binned, spec.bins());
            let pairs = PairCountMatrix::from_counts(spec, counts)?;
            mi_estimate(&pairs)
        };
        let se = bootstrap_se(&binned, spec.bins(), seed.derive(10 + stream as u64), replicates);
        rows.push(MiRow {
            label,
            plugin: estimate.plugin,
            corrected: estimate.corrected,
            bootstrap_se: se,
        });
    }

    Ok(MiReport {
        rows,
        bootstrap_replicates: replicates,
    })
}

fn bin_threads(dataset: &Dataset, field: Field, spec: BinSpec) -> Result<Vec<Vec<u16>>> {
    dataset
        .threads
        .iter()
        .map(|thread| {
            thread
                .values(field)
                .map(|v| spec.bin_of(v).map(|b| b as u16))
                .collect()
        })
        .collect()
}

fn count_pairs_binned(binned: &[Vec<u16>], b: usize) -> Vec<u64> {
    let mut counts = vec![0u64; b * b];
    for seq in binned {
        for w in seq.windows(2) {
            counts[w[0] as usize * b + w[1] as usize] += 1;
        }
    }
    counts
}

/// Standard error of the plug-in MI under resampling whole threads with
/// replacement. Pairs within a thread are dependent, so the thread is the
/// resampling unit.
fn bootstrap_se(binned: &[Vec<u16>], b: usize, seed: Seed, replicates: usize) -> f64 {
    if replicates < 2 || binned.is_empty() {
        return 0.0;
    }
    let m = binned.len();
    let samples: Vec<f64> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = seed.derive(r as u64).rng();
            let mut counts = vec![0u64; b * b];
            for _ in 0..m {
                let seq = &binned[rng.random_range(0..m)];
                for w in seq.windows(2) {
                    counts[w[0] as usize * b + w[1] as usize] += 1;
                }
            }
            mi_from_counts(&counts, b)
        })
        .collect();
    let mean = samples.iter().sum::<f64>() / replicates as f64;
    let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (replicates - 1) as f64;
    var.sqrt()
}

/// Configuration for the three-step correlation curves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreeStepConfig {
    /// Both predecessors must be `>= upper` for the positive curve.
    pub upper: f64,
    /// Both predecessors must be `<= lower` for the negative curve.
    pub lower: f64,
    /// Bins whose marginal count (or whose curve's conditioning-event count)
    /// is below this are masked undefined.
    pub min_count: u64,
}

impl Default for ThreeStepConfig {
    fn default() -> Self {
        ThreeStepConfig {
            upper: 0.9,
            lower: 0.1,
            min_count: 10,
        }
    }
}

/// Three-step correlation curves `C₊` and `C₋` per bin.
///
/// `C₊(b) = P(x_n ∈ b | x_{n-1} ≥ upper, x_{n-2} ≥ upper) / P(x_n ∈ b)`,
/// and `C₋` conditions on both predecessors `≤ lower`. The marginal
/// `P(x_n ∈ b)` is taken over the third element of every within-thread
/// triple, so conditional and marginal come from the same population.
#[derive(Debug, Clone, PartialEq)]
pub struct ThreeStepCurve {
    pub spec: BinSpec,
    pub c_plus: Vec<f64>,
    pub c_minus: Vec<f64>,
    pub plus_defined: Vec<bool>,
    pub minus_defined: Vec<bool>,
    /// Counts of `x_n` per bin among triples whose predecessors passed.
    pub plus_counts: Vec<u64>,
    pub minus_counts: Vec<u64>,
    /// Number of triples whose two predecessors passed each rule.
    pub plus_events: u64,
    pub minus_events: u64,
    /// Counts of `x_n` per bin over all triples.
    pub marginal_counts: Vec<u64>,
    pub triples: u64,
}

/// Computes the three-step correlation curves over all within-thread
/// triples. Errors if no thread has length ≥ 3.
pub fn three_step(
    dataset: &Dataset,
    field: Field,
    spec: BinSpec,
    config: ThreeStepConfig,
) -> Result<ThreeStepCurve> {
    let b = spec.bins();
    let mut plus_counts = vec![0u64; b];
    let mut minus_counts = vec![0u64; b];
    let mut marginal_counts = vec![0u64; b];
    let mut plus_events = 0u64;
    let mut minus_events = 0u64;
    let mut triples = 0u64;

    for thread in &dataset.threads {
        if thread.len() < 3 {
            continue;
        }
        let values: Vec<f64> = thread.values(field).collect();
        for n in 2..values.len() {
            let bin = spec.bin_of(values[n])?;
            triples += 1;
            marginal_counts[bin] += 1;
            if values[n - 1] >= config.upper && values[n - 2] >= config.upper {
                plus_events += 1;
                plus_counts[bin] += 1;
            }
            if values[n - 1] <= config.lower && values[n - 2] <= config.lower {
                minus_events += 1;
                minus_counts[bin] += 1;
            }
        }
    }

    if triples == 0 {
        return Err(Error::NoTriples);
    }

    let curve_of = |events: u64, counts: &[u64]| -> (Vec<f64>, Vec<bool>) {
        let mut values = vec![f64::NAN; b];
        let mut defined = vec![false; b];
        if events >= config.min_count.max(1) {
            for bin in 0..b {
                if marginal_counts[bin] >= config.min_count.max(1) {
                    values[bin] = (counts[bin] as f64 * triples as f64)
                        / (events as f64 * marginal_counts[bin] as f64);
                    defined[bin] = true;
                }
            }
        }
        (values, defined)
    };

    let (c_plus, plus_defined) = curve_of(plus_events, &plus_counts);
    let (c_minus, minus_defined) = curve_of(minus_events, &minus_counts);

    Ok(ThreeStepCurve {
        spec,
        c_plus,
        c_minus,
        plus_defined,
        minus_defined,
        plus_counts,
        minus_counts,
        plus_events,
        minus_events,
        marginal_counts,
        triples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Dataset, Thread};
    use std::f64::consts::LN_2;

    fn dataset_of(value_lists: &[&[f64]]) -> Dataset {
        let threads = value_lists
            .iter()
            .enumerate()
            .map(|(k, values)| {
                let pairs: Vec<(f64, f64)> = values.iter().map(|&v| (v, v)).collect();
                Thread::from_values(format!("t{k:03}"), &pairs)
            })
            .collect();
        Dataset::new(threads, "test")
    }

    #[test]
    fn pair_counts_per_thread_lengths() {
        let spec = BinSpec::tenths();
        let single = dataset_of(&[&[0.5]]);
        assert_eq!(pair_counts(&single, Field::Pos, spec).unwrap().total_pairs(), 0);

        let two = dataset_of(&[&[0.1, 0.2, 0.3], &[0.9, 0.8, 0.7, 0.6, 0.5]]);
        let pairs = pair_counts(&two, Field::Pos, spec).unwrap();
        assert_eq!(pairs.total_pairs(), 6);
    }

    #[test]
    fn pair_counts_marginals_match_occurrences() {
        let spec = BinSpec::tenths();
        let dataset = dataset_of(&[&[0.05, 0.15, 0.05, 0.95], &[0.95, 0.05]]);
        let pairs = pair_counts(&dataset, Field::Pos, spec).unwrap();
        // x_{n-1} occurrences: thread 1 positions 0..2, thread 2 position 0.
        let rows = pairs.row_totals();
        assert_eq!(rows[0], 2); // 0.05 at t1[0], t1[2]
        assert_eq!(rows[1], 1); // 0.15 at t1[1]
        assert_eq!(rows[9], 1); // 0.95 at t2[0]
        // x_n occurrences: thread 1 positions 1..3, thread 2 position 1.
        let cols = pairs.col_totals();
        assert_eq!(cols[0], 2); // 0.05 at t1[2], t2[1]
        assert_eq!(cols[1], 1);
        assert_eq!(cols[9], 1);
        assert_eq!(rows.iter().sum::<u64>(), pairs.total_pairs());
    }

    #[test]
    fn correlation_ratio_hand_value() {
        // Row 0 = [6, 4], row 1 = [10, 0]: p(1|0) = 0.4, p(col 1) = 0.2,
        // so C(0,1) = 2 exactly.
        let spec = BinSpec::new(0.5).unwrap();
        let pairs = PairCountMatrix::from_counts(spec, vec![6, 4, 10, 0]).unwrap();
        let c = correlation_ratio(&pairs, 1).unwrap();
        assert_eq!(c.get(0, 1), Some(2.0));
        // Zero joint count stays masked.
        assert_eq!(c.get(1, 1), None);
    }

    #[test]
    fn correlation_ratio_masks_sparse_marginals() {
        let spec = BinSpec::new(0.5).unwrap();
        let pairs = PairCountMatrix::from_counts(spec, vec![100, 3, 2, 1]).unwrap();
        let c = correlation_ratio(&pairs, 5).unwrap();
        // Column 1 total is 4 < 5: both entries of that column are masked.
        assert!(c.is_defined(0, 0));
        assert!(!c.is_defined(0, 1));
        assert!(!c.is_defined(1, 1));
    }

    #[test]
    fn correlation_ratio_needs_pairs() {
        let spec = BinSpec::new(0.5).unwrap();
        let empty = PairCountMatrix::from_counts(spec, vec![0, 0, 0, 0]).unwrap();
        assert!(matches!(
            correlation_ratio(&empty, 1),
            Err(Error::EmptyResult(_))
        ));
    }

    #[test]
    fn pmi_is_log_of_c() {
        let spec = BinSpec::new(0.5).unwrap();
        let pairs = PairCountMatrix::from_counts(spec, vec![6, 4, 10, 0]).unwrap();
        let c = correlation_ratio(&pairs, 1).unwrap();
        let pmi = pmi_matrix(&c);
        assert!((pmi.get(0, 1).unwrap() - LN_2).abs() < 1e-15);
        assert_eq!(pmi.get(1, 1), None);

        let uniform = PairCountMatrix::from_counts(spec, vec![5, 5, 5, 5]).unwrap();
        let c1 = correlation_ratio(&uniform, 1).unwrap();
        let pmi1 = pmi_matrix(&c1);
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(c1.get(i, j), Some(1.0));
                assert_eq!(pmi1.get(i, j), Some(0.0));
            }
        }
    }

    #[test]
    fn mi_of_identity_coupling_is_ln_2() {
        let spec = BinSpec::new(0.5).unwrap();
        let pairs = PairCountMatrix::from_counts(spec, vec![50, 0, 0, 50]).unwrap();
        assert!((mutual_information(&pairs) - LN_2).abs() < 1e-15);
        assert!((mutual_information_in(&pairs, LogBase::Two) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn mi_of_exact_product_is_zero() {
        // counts(i,j) = r_i * c_j factorizes exactly.
        let r = [3u64, 7, 2];
        let c = [5u64, 1, 4];
        let counts: Vec<u64> = r.iter().flat_map(|&ri| c.iter().map(move |&cj| ri * cj)).collect();
        let spec = BinSpec::new(1.0 / 3.0).unwrap();
        let pairs = PairCountMatrix::from_counts(spec, counts).unwrap();
        assert_eq!(mutual_information(&pairs), 0.0);
    }

    #[test]
    fn mi_symmetric_under_reversal() {
        let spec = BinSpec::tenths();
        let dataset = dataset_of(&[
            &[0.05, 0.95, 0.95, 0.15, 0.85],
            &[0.55, 0.45, 0.45, 0.95],
            &[0.05, 0.05, 0.05],
        ]);
        let pairs = pair_counts(&dataset, Field::Pos, spec).unwrap();

        let reversed = Dataset::new(
            dataset
                .threads
                .iter()
                .map(|t| {
                    let mut values: Vec<(f64, f64)> =
                        t.comments.iter().map(|c| (c.p_pos, c.p_sub)).collect();
                    values.reverse();
                    Thread::from_values(t.id.clone(), &values)
                })
                .collect(),
            "reversed",
        );
        let rev_pairs = pair_counts(&reversed, Field::Pos, spec).unwrap();
        assert_eq!(rev_pairs, pairs.transpose());
        assert!((mutual_information(&rev_pairs) - mutual_information(&pairs)).abs() < 1e-12);
    }

    #[test]
    fn mi_estimate_correction_formula() {
        let spec = BinSpec::new(0.5).unwrap();
        let pairs = PairCountMatrix::from_counts(spec, vec![50, 0, 0, 50]).unwrap();
        let est = mi_estimate(&pairs);
        // 2 nonzero cells, 2 nonzero rows, 2 nonzero cols: (2-2-2+1)/(2*100).
        let expected = est.plugin - (-1.0 / 200.0);
        assert!((est.corrected - expected).abs() < 1e-15);
    }

    #[test]
    fn degenerate_dataset_has_zero_mi() {
        let dataset = dataset_of(&[&[0.7; 50], &[0.7; 30]]);
        let pairs = pair_counts(&dataset, Field::Pos, BinSpec::tenths()).unwrap();
        assert_eq!(mutual_information(&pairs), 0.0);
        let est = mi_estimate(&pairs);
        assert_eq!(est.plugin, 0.0);
        assert_eq!(est.corrected, 0.0);
    }

    #[test]
    fn mi_report_is_deterministic_and_labeled() {
        let dataset = dataset_of(&[
            &[0.05, 0.95, 0.95, 0.15, 0.85, 0.95],
            &[0.55, 0.45, 0.45, 0.95, 0.05],
            &[0.05, 0.05, 0.05, 0.95],
        ]);
        let spec = BinSpec::tenths();
        let a = mi_report(&dataset, Field::Pos, spec, Seed(7), 25).unwrap();
        let b = mi_report(&dataset, Field::Pos, spec, Seed(7), 25).unwrap();
        assert_eq!(a, b);
        let labels: Vec<&str> = a.rows.iter().map(|r| r.label).collect();
        assert_eq!(labels, ["no shuffle", "thread shuffle", "global shuffle"]);
        for row in &a.rows {
            assert!(row.plugin >= 0.0);
            assert!(row.bootstrap_se >= 0.0);
        }
    }

    #[test]
    fn three_step_hand_example() {
        // Triples in [0.5, 0.95, 0.95, 0.95, 0.05]: predecessors pass the
        // ≥0.9 rule for the last two triples only.
        let dataset = dataset_of(&[&[0.5, 0.95, 0.95, 0.95, 0.05]]);
        let curve = three_step(
            &dataset,
            Field::Pos,
            BinSpec::tenths(),
            ThreeStepConfig {
                min_count: 1,
                ..ThreeStepConfig::default()
            },
        )
        .unwrap();
        assert_eq!(curve.triples, 3);
        assert_eq!(curve.plus_events, 2);
        assert_eq!(curve.minus_events, 0);
        assert!((curve.c_plus[9] - 0.75).abs() < 1e-15);
        assert!((curve.c_plus[0] - 1.5).abs() < 1e-15);
        // No ≤0.1 predecessor pairs: the whole negative curve is undefined.
        assert!(curve.minus_defined.iter().all(|&d| !d));
        assert!(curve.c_minus.iter().all(|v| v.is_nan()));
    }

    #[test]
    fn three_step_requires_triples() {
        let dataset = dataset_of(&[&[0.9, 0.8], &[0.1, 0.2]]);
        assert!(matches!(
            three_step(
                &dataset,
                Field::Pos,
                BinSpec::tenths(),
                ThreeStepConfig::default()
            ),
            Err(Error::NoTriples)
        ));
    }

    #[test]
    fn three_step_min_count_masks_sparse_bins() {
        let dataset = dataset_of(&[&[0.95, 0.95, 0.95, 0.95, 0.95, 0.45]]);
        let curve = three_step(
            &dataset,
            Field::Pos,
            BinSpec::tenths(),
            ThreeStepConfig {
                min_count: 2,
                ..ThreeStepConfig::default()
            },
        )
        .unwrap();
        // Bin 4 has marginal count 1 < 2: masked.
        assert!(!curve.plus_defined[4]);
        assert!(curve.plus_defined[9]);
    }
}
