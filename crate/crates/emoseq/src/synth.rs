//! Synthetic datasets with known statistical structure, and exact analytic
//! oracles for every estimator.
//!
//! Two forward models are provided. [`generate_iid`] draws every comment
//! value independently from a [`Marginal`] distribution — the exact null for
//! all correlation statistics. [`generate_markov`] runs a first-order
//! [`MarkovModel`] over a set of state values within each thread, producing
//! the sequential correlation signatures the estimators are meant to detect.
//!
//! States are bin centers with optional within-bin uniform jitter, so
//! generated values exercise real-valued code paths while binned statistics
//! stay exactly analyzable: [`MarkovModel::mi_oracle`],
//! [`MarkovModel::three_step_oracle`] and [`iid_cluster_size_oracle`] give
//! closed-form targets for the corresponding estimators.

use nalgebra::{DMatrix, DVector};
use rand::distr::weighted::WeightedIndex;
use rand::distr::{Distribution, Uniform};
use rand::Rng;
use rand_distr::{Beta as BetaDist, Geometric};
use statrs::distribution::{Beta as BetaCdf, ContinuousCDF};

use crate::error::{Error, Result};
use crate::estimators::Histogram;
use crate::model::{BinSpec, Dataset, Thread};
use crate::nullmodel::Seed;

/// First-order Markov chain over a fixed set of state values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovModel {
    states: Vec<f64>,
    transition: Vec<f64>,
    initial: Vec<f64>,
    jitter_half_width: Option<f64>,
}

const STOCHASTIC_TOL: f64 = 1e-12;

impl MarkovModel {
    /// Validates and builds a model. `transition` is row-stochastic with one
    /// row per state; `initial` is the start distribution.
    pub fn new(states: Vec<f64>, transition: Vec<Vec<f64>>, initial: Vec<f64>) -> Result<Self> {
        let b = states.len();
        if b == 0 {
            return Err(Error::InvalidArgument("model needs at least one state".into()));
        }
        for &s in &states {
            if !(0.0..=1.0).contains(&s) {
                return Err(Error::domain_at(s, "model state value"));
            }
        }
        if transition.len() != b {
            return Err(Error::InvalidArgument(format!(
                "transition has {} rows for {} states",
                transition.len(),
                b
            )));
        }
        let mut flat = Vec::with_capacity(b * b);
        for (i, row) in transition.iter().enumerate() {
            if row.len() != b {
                return Err(Error::InvalidArgument(format!(
                    "transition row {i} has {} entries for {} states",
                    row.len(),
                    b
                )));
            }
            check_stochastic(row, &format!("transition row {i}"))?;
            flat.extend_from_slice(row);
        }
        if initial.len() != b {
            return Err(Error::InvalidArgument(format!(
                "initial distribution has {} entries for {} states",
                initial.len(),
                b
            )));
        }
        check_stochastic(&initial, "initial distribution")?;
        Ok(MarkovModel {
            states,
            transition: flat,
            initial,
            jitter_half_width: None,
        })
    }

    /// As [`MarkovModel::new`] with a uniform start distribution.
    pub fn with_uniform_initial(states: Vec<f64>, transition: Vec<Vec<f64>>) -> Result<Self> {
        let b = states.len();
        let initial = vec![1.0 / b as f64; b.max(1)];
        MarkovModel::new(states, transition, initial)
    }

    /// A model whose states are the centers of every bin of `spec`, with
    /// jitter spanning exactly one bin when enabled.
    pub fn on_bin_centers(
        spec: BinSpec,
        transition: Vec<Vec<f64>>,
        initial: Vec<f64>,
        jitter: bool,
    ) -> Result<Self> {
        let model = MarkovModel::new(spec.centers(), transition, initial)?;
        if jitter {
            model.with_jitter(spec.width() / 2.0)
        } else {
            Ok(model)
        }
    }

    /// Adds uniform noise in `[-half_width, half_width)` around each state
    /// value; pick half the bin width to keep values inside the state's bin.
    pub fn with_jitter(mut self, half_width: f64) -> Result<Self> {
        if !(half_width > 0.0 && half_width <= 0.5) {
            return Err(Error::InvalidArgument(format!(
                "jitter half-width must be in (0, 0.5], got {half_width}"
            )));
        }
        self.jitter_half_width = Some(half_width);
        Ok(self)
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[f64] {
        &self.states
    }

    pub fn transition_prob(&self, from: usize, to: usize) -> f64 {
        self.transition[from * self.state_count() + to]
    }

    pub fn initial(&self) -> &[f64] {
        &self.initial
    }

    pub fn jitter_half_width(&self) -> Option<f64> {
        self.jitter_half_width
    }

    /// Indices of states whose value is `>= threshold`.
    pub fn states_at_least(&self, threshold: f64) -> Vec<usize> {
        (0..self.state_count())
            .filter(|&k| self.states[k] >= threshold)
            .collect()
    }

    /// Indices of states whose value is `<= threshold`.
    pub fn states_at_most(&self, threshold: f64) -> Vec<usize> {
        (0..self.state_count())
            .filter(|&k| self.states[k] <= threshold)
            .collect()
    }

    fn is_strongly_connected(&self) -> bool {
        let b = self.state_count();
        let forward = |from: usize| (0..b).filter(move |&to| self.transition_prob(from, to) > 0.0);
        let backward = |to: usize| (0..b).filter(move |&from| self.transition_prob(from, to) > 0.0);
        reaches_all(b, forward) && reaches_all(b, backward)
    }

    /// The marginal distribution the oracles evaluate against: the unique
    /// stationary distribution of an irreducible chain, or the supplied
    /// initial distribution when the chain is reducible but the initial is
    /// itself invariant.
    pub fn stationary(&self) -> Result<Vec<f64>> {
        let b = self.state_count();
        if self.is_strongly_connected() {
            // Solve pi P = pi with sum(pi) = 1: replace the last equation of
            // (P^T - I) pi = 0 by the normalization row.
            let mut a = DMatrix::zeros(b, b);
            for i in 0..b {
                for j in 0..b {
                    a[(j, i)] = self.transition_prob(i, j);
                }
            }
            for d in 0..b {
                a[(d, d)] -= 1.0;
            }
            for j in 0..b {
                a[(b - 1, j)] = 1.0;
            }
            let mut rhs = DVector::zeros(b);
            rhs[b - 1] = 1.0;
            let solution = a
                .lu()
                .solve(&rhs)
                .ok_or_else(|| Error::Oracle("stationary system is singular".into()))?;
            let mut pi: Vec<f64> = solution.iter().map(|&x| x.max(0.0)).collect();
            let total: f64 = pi.iter().sum();
            for p in &mut pi {
                *p /= total;
            }
            self.check_invariant(&pi, 1e-9)?;
            Ok(pi)
        } else if self.check_invariant(&self.initial, 1e-10).is_ok() {
            Ok(self.initial.clone())
        } else {
            Err(Error::Oracle(
                "chain is reducible and the initial distribution is not invariant".into(),
            ))
        }
    }

    fn check_invariant(&self, pi: &[f64], tol: f64) -> Result<()> {
        let b = self.state_count();
        for j in 0..b {
            let next: f64 = (0..b).map(|i| pi[i] * self.transition_prob(i, j)).sum();
            if (next - pi[j]).abs() > tol {
                return Err(Error::Oracle(format!(
                    "distribution is not invariant at state {j}: {next} vs {}",
                    pi[j]
                )));
            }
        }
        Ok(())
    }

    /// Exact mutual information of consecutive states under the stationary
    /// law: `I = sum_ij pi_i P_ij ln(P_ij / pi_j)`, in nats.
    pub fn mi_oracle(&self) -> Result<f64> {
        let pi = self.stationary()?;
        let b = self.state_count();
        let mut sum = 0.0;
        for i in 0..b {
            if pi[i] == 0.0 {
                continue;
            }
            for j in 0..b {
                let p = self.transition_prob(i, j);
                if p > 0.0 {
                    sum += pi[i] * p * (p / pi[j]).ln();
                }
            }
        }
        Ok(sum)
    }

    /// Exact three-step correlation targets: for each state `b`,
    /// `C(b) = P(x_n = b | x_{n-1} ∈ A, x_{n-2} ∈ A) / pi_b`, where `A` is
    /// the top (plus curve) or bottom (minus curve) state set.
    pub fn three_step_oracle(
        &self,
        top_states: &[usize],
        bottom_states: &[usize],
    ) -> Result<ThreeStepOracle> {
        let pi = self.stationary()?;
        let c_plus = self.conditional_ratio(&pi, top_states)?;
        let c_minus = self.conditional_ratio(&pi, bottom_states)?;
        Ok(ThreeStepOracle { c_plus, c_minus })
    }

    fn conditional_ratio(&self, pi: &[f64], set: &[usize]) -> Result<Vec<f64>> {
        let b = self.state_count();
        let mut seen = vec![false; b];
        for &s in set {
            if s >= b {
                return Err(Error::InvalidArgument(format!(
                    "state index {s} out of range for {b} states"
                )));
            }
            if std::mem::replace(&mut seen[s], true) {
                return Err(Error::InvalidArgument(format!("duplicate state index {s}")));
            }
        }
        // Weight of each (x_{n-2}, x_{n-1}) pair inside the conditioning set
        // is pi_i P_ij; x_n then follows row j.
        let mut weight_total = 0.0;
        let mut cond = vec![0.0; b];
        for &i in set {
            for &j in set {
                let w = pi[i] * self.transition_prob(i, j);
                weight_total += w;
                for (target, c) in cond.iter_mut().enumerate() {
                    *c += w * self.transition_prob(j, target);
                }
            }
        }
        if weight_total <= 0.0 {
            return Err(Error::Oracle(
                "conditioning set has zero stationary mass".into(),
            ));
        }
        Ok((0..b)
            .map(|target| {
                if pi[target] > 0.0 {
                    cond[target] / weight_total / pi[target]
                } else {
                    f64::NAN
                }
            })
            .collect())
    }
}

/// Exact `C₊`/`C₋` values per state from [`MarkovModel::three_step_oracle`].
#[derive(Debug, Clone, PartialEq)]
pub struct ThreeStepOracle {
    pub c_plus: Vec<f64>,
    pub c_minus: Vec<f64>,
}

fn check_stochastic(row: &[f64], what: &str) -> Result<()> {
    let mut sum = 0.0;
    for &p in row {
        if !(p >= 0.0 && p.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "{what} has a negative or non-finite entry: {p}"
            )));
        }
        sum += p;
    }
    if (sum - 1.0).abs() > STOCHASTIC_TOL {
        return Err(Error::InvalidArgument(format!(
            "{what} sums to {sum}, expected 1"
        )));
    }
    Ok(())
}

fn reaches_all<I>(b: usize, neighbors: impl Fn(usize) -> I) -> bool
where
    I: Iterator<Item = usize>,
{
    let mut visited = vec![false; b];
    let mut stack = vec![0usize];
    visited[0] = true;
    while let Some(node) = stack.pop() {
        for next in neighbors(node) {
            if !visited[next] {
                visited[next] = true;
                stack.push(next);
            }
        }
    }
    visited.into_iter().all(|v| v)
}

/// Thread length distribution; lengths are always at least 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LengthLaw {
    Fixed(usize),
    /// Geometric on `{1, 2, ...}` with the given mean.
    Geometric { mean: f64 },
}

/// Whether `p_sub` copies the `p_pos` chain or runs an independent one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FieldsCoupling {
    /// `p_sub` is generated by an independent run of the same mechanism.
    #[default]
    Independent,
    /// `p_sub` equals `p_pos` comment for comment.
    Coupled,
}

/// Shape of a generated dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorConfig {
    pub thread_count: usize,
    pub length_law: LengthLaw,
    pub coupling: FieldsCoupling,
    pub seed: Seed,
}

impl GeneratorConfig {
    pub fn new(thread_count: usize, length_law: LengthLaw, seed: Seed) -> Self {
        GeneratorConfig {
            thread_count,
            length_law,
            coupling: FieldsCoupling::default(),
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.thread_count == 0 {
            return Err(Error::InvalidArgument(
                "generator config requests zero threads".into(),
            ));
        }
        match self.length_law {
            LengthLaw::Fixed(0) => Err(Error::InvalidArgument(
                "fixed thread length must be at least 1".into(),
            )),
            LengthLaw::Geometric { mean } if !(mean >= 1.0 && mean.is_finite()) => {
                Err(Error::InvalidArgument(format!(
                    "geometric mean length must be >= 1, got {mean}"
                )))
            }
            _ => Ok(()),
        }
    }
}

enum LengthSampler {
    Fixed(usize),
    Geometric(Geometric),
}

impl LengthSampler {
    fn build(law: LengthLaw) -> Result<Self> {
        match law {
            LengthLaw::Fixed(n) => Ok(LengthSampler::Fixed(n)),
            LengthLaw::Geometric { mean } => {
                let geometric = Geometric::new(1.0 / mean).map_err(|e| {
                    Error::InvalidArgument(format!("geometric length law: {e}"))
                })?;
                Ok(LengthSampler::Geometric(geometric))
            }
        }
    }

    fn sample(&self, rng: &mut impl Rng) -> usize {
        match self {
            LengthSampler::Fixed(n) => *n,
            LengthSampler::Geometric(g) => g.sample(rng) as usize + 1,
        }
    }
}

/// A one-dimensional marginal distribution on `[0, 1]` with analytic bin
/// masses, used both for sampling and as the histogram oracle.
#[derive(Debug, Clone, PartialEq)]
pub enum Marginal {
    /// Uniform on `[0, 1)`.
    Uniform,
    /// Discrete mixture of point masses.
    Atoms { values: Vec<f64>, weights: Vec<f64> },
    /// Mixture of Beta components, weights proportional.
    BetaMixture { components: Vec<BetaComponent> },
    /// Piecewise-uniform over the bins of an observed histogram.
    Empirical(Histogram),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaComponent {
    pub alpha: f64,
    pub beta: f64,
    pub weight: f64,
}

impl Marginal {
    pub fn uniform() -> Self {
        Marginal::Uniform
    }

    pub fn atoms(values: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.len() != weights.len() {
            return Err(Error::InvalidArgument(
                "atoms need matching, non-empty values and weights".into(),
            ));
        }
        for &v in &values {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::domain_at(v, "atom value"));
            }
        }
        check_weights(&weights)?;
        Ok(Marginal::Atoms { values, weights })
    }

    pub fn beta_mixture(components: Vec<BetaComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidArgument("mixture needs components".into()));
        }
        for c in &components {
            if !(c.alpha > 0.0 && c.beta > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "beta component parameters must be positive: alpha={}, beta={}",
                    c.alpha, c.beta
                )));
            }
        }
        check_weights(&components.iter().map(|c| c.weight).collect::<Vec<_>>())?;
        Ok(Marginal::BetaMixture { components })
    }

    pub fn empirical(histogram: Histogram) -> Result<Self> {
        if histogram.total() == 0 {
            return Err(Error::InvalidArgument(
                "empirical marginal needs a non-empty histogram".into(),
            ));
        }
        Ok(Marginal::Empirical(histogram))
    }

    /// Probability mass the marginal assigns to bin `bin` of `spec`. Atom
    /// masses follow the spec's edge rule exactly.
    pub fn bin_mass(&self, spec: &BinSpec, bin: usize) -> f64 {
        let (lo, hi) = spec.bounds(bin);
        match self {
            Marginal::Uniform => hi - lo,
            Marginal::Atoms { values, weights } => {
                let total: f64 = weights.iter().sum();
                values
                    .iter()
                    .zip(weights)
                    .filter(|(&v, _)| spec.bin_of(v).is_ok_and(|b| b == bin))
                    .map(|(_, &w)| w)
                    .sum::<f64>()
                    / total
            }
            Marginal::BetaMixture { components } => {
                let total: f64 = components.iter().map(|c| c.weight).sum();
                components
                    .iter()
                    .map(|c| {
                        let cdf = BetaCdf::new(c.alpha, c.beta).expect("validated parameters");
                        c.weight * (cdf.cdf(hi) - cdf.cdf(lo))
                    })
                    .sum::<f64>()
                    / total
            }
            Marginal::Empirical(hist) => {
                // Overlap of this bin with each source bin, piecewise uniform.
                let freqs = hist.frequencies();
                let mut mass = 0.0;
                for (src, f) in freqs.iter().enumerate() {
                    let (slo, shi) = hist.spec().bounds(src);
                    let overlap = (hi.min(shi) - lo.max(slo)).max(0.0);
                    if shi > slo {
                        mass += f * overlap / (shi - slo);
                    }
                }
                mass
            }
        }
    }

    /// `P(X >= t)`.
    pub fn tail_mass(&self, t: f64) -> f64 {
        match self {
            Marginal::Uniform => (1.0 - t).clamp(0.0, 1.0),
            Marginal::Atoms { values, weights } => {
                let total: f64 = weights.iter().sum();
                values
                    .iter()
                    .zip(weights)
                    .filter(|(&v, _)| v >= t)
                    .map(|(_, &w)| w)
                    .sum::<f64>()
                    / total
            }
            Marginal::BetaMixture { components } => {
                let total: f64 = components.iter().map(|c| c.weight).sum();
                components
                    .iter()
                    .map(|c| {
                        let cdf = BetaCdf::new(c.alpha, c.beta).expect("validated parameters");
                        c.weight * (1.0 - cdf.cdf(t))
                    })
                    .sum::<f64>()
                    / total
            }
            Marginal::Empirical(hist) => hist
                .frequencies()
                .iter()
                .enumerate()
                .map(|(b, &f)| {
                    let (lo, hi) = hist.spec().bounds(b);
                    if t <= lo {
                        f
                    } else if t >= hi {
                        0.0
                    } else {
                        f * (hi - t) / (hi - lo)
                    }
                })
                .sum(),
        }
    }
}

fn check_weights(weights: &[f64]) -> Result<()> {
    let mut sum = 0.0;
    for &w in weights {
        if !(w >= 0.0 && w.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "weights must be non-negative and finite, got {w}"
            )));
        }
        sum += w;
    }
    if sum <= 0.0 {
        return Err(Error::InvalidArgument("weights sum to zero".into()));
    }
    Ok(())
}

enum MarginalSampler {
    Uniform,
    Atoms {
        index: WeightedIndex<f64>,
        values: Vec<f64>,
    },
    Beta {
        index: WeightedIndex<f64>,
        dists: Vec<BetaDist<f64>>,
    },
    Empirical {
        index: WeightedIndex<u64>,
        bins: Vec<Uniform<f64>>,
    },
}

impl MarginalSampler {
    fn build(marginal: &Marginal) -> Result<Self> {
        let arg = |e: String| Error::InvalidArgument(e);
        match marginal {
            Marginal::Uniform => Ok(MarginalSampler::Uniform),
            Marginal::Atoms { values, weights } => Ok(MarginalSampler::Atoms {
                index: WeightedIndex::new(weights.iter().copied())
                    .map_err(|e| arg(e.to_string()))?,
                values: values.clone(),
            }),
            Marginal::BetaMixture { components } => Ok(MarginalSampler::Beta {
                index: WeightedIndex::new(components.iter().map(|c| c.weight))
                    .map_err(|e| arg(e.to_string()))?,
                dists: components
                    .iter()
                    .map(|c| BetaDist::new(c.alpha, c.beta).map_err(|e| arg(e.to_string())))
                    .collect::<Result<_>>()?,
            }),
            Marginal::Empirical(hist) => {
                let spec = *hist.spec();
                Ok(MarginalSampler::Empirical {
                    index: WeightedIndex::new(hist.counts().iter().copied())
                        .map_err(|e| arg(e.to_string()))?,
                    bins: (0..spec.bins())
                        .map(|b| {
                            let (lo, hi) = spec.bounds(b);
                            Uniform::new(lo, hi).map_err(|e| arg(e.to_string()))
                        })
                        .collect::<Result<_>>()?,
                })
            }
        }
    }

    fn sample(&self, rng: &mut impl Rng) -> f64 {
        match self {
            MarginalSampler::Uniform => rng.random(),
            MarginalSampler::Atoms { index, values } => values[index.sample(rng)],
            MarginalSampler::Beta { index, dists } => dists[index.sample(rng)].sample(rng),
            MarginalSampler::Empirical { index, bins } => bins[index.sample(rng)].sample(rng),
        }
    }
}

/// Draws every comment value independently from `marginal`. With the default
/// coupling, `p_sub` is an independent draw from the same marginal;
/// `Coupled` copies `p_pos`.
pub fn generate_iid(marginal: &Marginal, config: &GeneratorConfig) -> Result<Dataset> {
    config.validate()?;
    let sampler = MarginalSampler::build(marginal)?;
    let lengths = LengthSampler::build(config.length_law)?;
    let mut threads = Vec::with_capacity(config.thread_count);
    for t in 0..config.thread_count {
        let mut rng = config.seed.derive(t as u64).rng();
        let len = lengths.sample(&mut rng);
        let pos: Vec<f64> = (0..len).map(|_| sampler.sample(&mut rng)).collect();
        let sub: Vec<f64> = match config.coupling {
            FieldsCoupling::Independent => (0..len).map(|_| sampler.sample(&mut rng)).collect(),
            FieldsCoupling::Coupled => pos.clone(),
        };
        let values: Vec<(f64, f64)> = pos.into_iter().zip(sub).collect();
        threads.push(Thread::from_values(format!("t{t:08}"), &values));
    }
    Ok(Dataset::new(
        threads,
        format!("synth:iid:seed={}", config.seed),
    ))
}

struct ChainSampler<'a> {
    model: &'a MarkovModel,
    initial: WeightedIndex<f64>,
    rows: Vec<WeightedIndex<f64>>,
    jitter: Option<Uniform<f64>>,
}

impl<'a> ChainSampler<'a> {
    fn build(model: &'a MarkovModel) -> Result<Self> {
        let arg = |e: String| Error::InvalidArgument(e);
        let b = model.state_count();
        let initial =
            WeightedIndex::new(model.initial().iter().copied()).map_err(|e| arg(e.to_string()))?;
        let rows = (0..b)
            .map(|i| {
                WeightedIndex::new((0..b).map(|j| model.transition_prob(i, j)))
                    .map_err(|e| arg(e.to_string()))
            })
            .collect::<Result<_>>()?;
        let jitter = match model.jitter_half_width() {
            Some(h) => Some(Uniform::new(-h, h).map_err(|e| arg(e.to_string()))?),
            None => None,
        };
        Ok(ChainSampler {
            model,
            initial,
            rows,
            jitter,
        })
    }

    fn run(&self, len: usize, rng: &mut impl Rng) -> Vec<f64> {
        let mut values = Vec::with_capacity(len);
        let mut state = self.initial.sample(rng);
        values.push(self.value_of(state, rng));
        for _ in 1..len {
            state = self.rows[state].sample(rng);
            values.push(self.value_of(state, rng));
        }
        values
    }

    fn value_of(&self, state: usize, rng: &mut impl Rng) -> f64 {
        let center = self.model.states()[state];
        match &self.jitter {
            Some(noise) => (center + noise.sample(rng)).clamp(0.0, 1.0),
            None => center,
        }
    }
}

/// Runs the Markov chain independently within each thread, starting from the
/// model's initial distribution. Thread generation uses per-thread derived
/// seeds, so output is deterministic.
pub fn generate_markov(model: &MarkovModel, config: &GeneratorConfig) -> Result<Dataset> {
    config.validate()?;
    let sampler = ChainSampler::build(model)?;
    let lengths = LengthSampler::build(config.length_law)?;
    let mut threads = Vec::with_capacity(config.thread_count);
    for t in 0..config.thread_count {
        let mut rng = config.seed.derive(t as u64).rng();
        let len = lengths.sample(&mut rng);
        let pos = sampler.run(len, &mut rng);
        let sub = match config.coupling {
            FieldsCoupling::Independent => sampler.run(len, &mut rng),
            FieldsCoupling::Coupled => pos.clone(),
        };
        let values: Vec<(f64, f64)> = pos.into_iter().zip(sub).collect();
        threads.push(Thread::from_values(format!("t{t:08}"), &values));
    }
    Ok(Dataset::new(
        threads,
        format!("synth:markov:seed={}", config.seed),
    ))
}

/// What a parsed generator configuration file describes.
#[derive(Debug, Clone, PartialEq)]
pub enum SynthTarget {
    Markov(MarkovModel),
    Iid(Marginal),
}

/// A generator configuration parsed from a TOML file: the forward model plus
/// thread shape. The seed may be left to the caller.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub target: SynthTarget,
    pub thread_count: usize,
    pub length_law: LengthLaw,
    pub coupling: FieldsCoupling,
    pub file_seed: Option<u64>,
}

impl SynthSpec {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: config::SynthFile =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config::build(file)
    }

    pub fn generator_config(&self, seed: Seed) -> GeneratorConfig {
        GeneratorConfig {
            thread_count: self.thread_count,
            length_law: self.length_law,
            coupling: self.coupling,
            seed,
        }
    }

    /// Generates the dataset this spec describes.
    pub fn generate(&self, seed: Seed) -> Result<Dataset> {
        let config = self.generator_config(seed);
        match &self.target {
            SynthTarget::Markov(model) => generate_markov(model, &config),
            SynthTarget::Iid(marginal) => generate_iid(marginal, &config),
        }
    }
}

mod config {
    use serde::Deserialize;

    use super::*;

    #[derive(Debug, Deserialize)]
    #[serde(deny_unknown_fields)]
    pub(super) struct SynthFile {
        kind: String,
        model: Option<ModelSection>,
        marginal: Option<MarginalSection>,
        threads: ThreadsSection,
    }

    #[derive(Debug, Deserialize)]
    #[serde(deny_unknown_fields)]
    struct ModelSection {
        bin_width: Option<f64>,
        state_bins: Option<Vec<usize>>,
        states: Option<Vec<f64>>,
        transition: Vec<Vec<f64>>,
        initial: Option<Vec<f64>>,
        jitter: Option<bool>,
    }

    #[derive(Debug, Deserialize)]
    #[serde(deny_unknown_fields)]
    struct MarginalSection {
        kind: String,
        values: Option<Vec<f64>>,
        weights: Option<Vec<f64>>,
        components: Option<Vec<ComponentSection>>,
    }

    #[derive(Debug, Deserialize)]
    #[serde(deny_unknown_fields)]
    struct ComponentSection {
        alpha: f64,
        beta: f64,
        weight: f64,
    }

    #[derive(Debug, Deserialize)]
    #[serde(deny_unknown_fields)]
    struct ThreadsSection {
        count: usize,
        length: LengthSection,
        coupling: Option<String>,
        seed: Option<u64>,
    }

    #[derive(Debug, Deserialize)]
    #[serde(deny_unknown_fields)]
    struct LengthSection {
        law: String,
        mean: Option<f64>,
        n: Option<usize>,
    }

    pub(super) fn build(file: SynthFile) -> Result<SynthSpec> {
        let target = match file.kind.as_str() {
            "markov" => {
                let section = file
                    .model
                    .ok_or_else(|| Error::Config("kind = \"markov\" needs a [model] section".into()))?;
                SynthTarget::Markov(build_model(section)?)
            }
            "iid" => {
                let section = file.marginal.ok_or_else(|| {
                    Error::Config("kind = \"iid\" needs a [marginal] section".into())
                })?;
                SynthTarget::Iid(build_marginal(section)?)
            }
            other => {
                return Err(Error::Config(format!(
                    "unknown kind {other:?}, expected \"markov\" or \"iid\""
                )))
            }
        };

        let length_law = match file.threads.length.law.as_str() {
            "fixed" => LengthLaw::Fixed(file.threads.length.n.ok_or_else(|| {
                Error::Config("length law \"fixed\" needs n".into())
            })?),
            "geometric" => LengthLaw::Geometric {
                mean: file.threads.length.mean.ok_or_else(|| {
                    Error::Config("length law \"geometric\" needs mean".into())
                })?,
            },
            other => {
                return Err(Error::Config(format!(
                    "unknown length law {other:?}, expected \"fixed\" or \"geometric\""
                )))
            }
        };

        let coupling = match file.threads.coupling.as_deref() {
            None | Some("independent") => FieldsCoupling::Independent,
            Some("coupled") => FieldsCoupling::Coupled,
            Some(other) => {
                return Err(Error::Config(format!(
                    "unknown coupling {other:?}, expected \"independent\" or \"coupled\""
                )))
            }
        };

        Ok(SynthSpec {
            target,
            thread_count: file.threads.count,
            length_law,
            coupling,
            file_seed: file.threads.seed,
        })
    }

    fn build_model(section: ModelSection) -> Result<MarkovModel> {
        let states = match (section.states, section.state_bins, section.bin_width) {
            (Some(states), None, _) => states,
            (None, Some(bins), Some(width)) => {
                let spec = BinSpec::new(width)?;
                bins.iter()
                    .map(|&b| {
                        if b < spec.bins() {
                            Ok(spec.center(b))
                        } else {
                            Err(Error::Config(format!(
                                "state bin {b} out of range for width {width}"
                            )))
                        }
                    })
                    .collect::<Result<Vec<f64>>>()?
            }
            (None, Some(_), None) => {
                return Err(Error::Config("state_bins needs bin_width".into()))
            }
            (None, None, _) => {
                return Err(Error::Config("model needs states or state_bins".into()))
            }
            (Some(_), Some(_), _) => {
                return Err(Error::Config("give states or state_bins, not both".into()))
            }
        };

        let initial = match section.initial {
            Some(initial) => initial,
            None => vec![1.0 / states.len().max(1) as f64; states.len()],
        };
        let model = MarkovModel::new(states, section.transition, initial)?;
        if section.jitter.unwrap_or(false) {
            let width = section.bin_width.ok_or_else(|| {
                Error::Config("jitter = true needs bin_width".into())
            })?;
            model.with_jitter(width / 2.0)
        } else {
            Ok(model)
        }
    }

    fn build_marginal(section: MarginalSection) -> Result<Marginal> {
        match section.kind.as_str() {
            "uniform" => Ok(Marginal::uniform()),
            "atoms" => {
                let values = section
                    .values
                    .ok_or_else(|| Error::Config("atoms marginal needs values".into()))?;
                let weights = match section.weights {
                    Some(w) => w,
                    None => vec![1.0; values.len()],
                };
                Marginal::atoms(values, weights)
            }
            "beta_mixture" => {
                let components = section
                    .components
                    .ok_or_else(|| Error::Config("beta_mixture needs components".into()))?
                    .into_iter()
                    .map(|c| BetaComponent {
                        alpha: c.alpha,
                        beta: c.beta,
                        weight: c.weight,
                    })
                    .collect();
                Marginal::beta_mixture(components)
            }
            other => Err(Error::Config(format!(
                "unknown marginal kind {other:?}, expected uniform, atoms or beta_mixture"
            ))),
        }
    }
}

/// Expected pooled mean cluster size for IID comments passing a threshold
/// with probability `q`, given the actual thread lengths: the ratio of
/// expected clustered comments to expected cluster count,
/// `sum(N) / sum(1 + (N-1)(1-q))`. NaN when no clusters can form.
pub fn iid_cluster_size_oracle(lengths: &[usize], q: f64) -> f64 {
    if lengths.is_empty() || q <= 0.0 || q.is_nan() {
        return f64::NAN;
    }
    let comments: f64 = lengths.iter().map(|&n| n as f64).sum();
    let clusters: f64 = lengths
        .iter()
        .map(|&n| 1.0 + (n as f64 - 1.0) * (1.0 - q))
        .sum();
    comments / clusters
}
