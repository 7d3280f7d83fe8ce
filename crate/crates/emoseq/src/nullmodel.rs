//! Randomized reference datasets: thread shuffles, global shuffles, and IID
//! resamples from the empirical marginal.
//!
//! Shuffling reorders existing comments to destroy sequential correlations.
//! The thread shuffle permutes comment order independently within each
//! thread, preserving every thread's composition; the global shuffle
//! redistributes all comments across all slots dataset-wide, destroying
//! thread composition as well. The IID resample replaces one field of every
//! comment with an independent draw (with replacement) from that field's
//! empirical distribution, leaving the other field untouched.
//!
//! All three are pure functions of `(dataset, seed)`. The generator is
//! pinned to ChaCha12 seeded via `seed_from_u64`, and shuffles use the
//! Fisher-Yates pass from `rand`, so outputs are reproducible bit-for-bit.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::model::{Comment, Dataset, Field, Thread};

/// Seed for a deterministic pseudorandom generator. Identical
/// `(seed, operation, input)` triples yield identical outputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Seed(pub u64);

impl Seed {
    /// A seed drawn from system entropy, for callers that did not supply one.
    pub fn from_entropy() -> Self {
        Seed(rand::rng().random())
    }

    /// The pinned generator for this seed.
    pub fn rng(self) -> ChaCha12Rng {
        ChaCha12Rng::seed_from_u64(self.0)
    }

    /// Derives an independent stream for a sub-task, keyed by position.
    pub fn derive(self, stream: u64) -> Seed {
        let mut rng = ChaCha12Rng::seed_from_u64(self.0 ^ 0x9e37_79b9_7f4a_7c15);
        rng.set_stream(stream);
        Seed(rng.random())
    }
}

impl std::fmt::Display for Seed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn rebuild(values: Vec<(f64, f64)>) -> Vec<Comment> {
    values
        .into_iter()
        .enumerate()
        .map(|(i, (p_pos, p_sub))| Comment::new(i, p_pos, p_sub))
        .collect()
}

/// Uniformly permutes comment order within each thread. The `(p_pos, p_sub)`
/// pair moves as a unit; per-thread value multisets, thread lengths and the
/// thread count are preserved exactly.
pub fn thread_shuffle(dataset: &Dataset, seed: Seed) -> Dataset {
    let mut rng = seed.rng();
    let threads = dataset
        .threads
        .iter()
        .map(|thread| {
            let mut values: Vec<(f64, f64)> =
                thread.comments.iter().map(|c| (c.p_pos, c.p_sub)).collect();
            values.shuffle(&mut rng);
            Thread::new(thread.id.clone(), rebuild(values))
        })
        .collect();
    Dataset {
        threads,
        source_label: dataset.source_label.clone(),
    }
}

/// Uniformly redistributes all `(p_pos, p_sub)` pairs across every comment
/// slot in the dataset. The dataset-wide value multiset, the thread count
/// and every thread's length are preserved exactly.
pub fn global_shuffle(dataset: &Dataset, seed: Seed) -> Dataset {
    let mut rng = seed.rng();
    let mut pool: Vec<(f64, f64)> = dataset
        .threads
        .iter()
        .flat_map(|t| t.comments.iter().map(|c| (c.p_pos, c.p_sub)))
        .collect();
    pool.shuffle(&mut rng);

    let mut cursor = pool.into_iter();
    let threads = dataset
        .threads
        .iter()
        .map(|thread| {
            let values: Vec<(f64, f64)> = cursor.by_ref().take(thread.len()).collect();
            Thread::new(thread.id.clone(), rebuild(values))
        })
        .collect();
    Dataset {
        threads,
        source_label: dataset.source_label.clone(),
    }
}

/// Replaces the chosen field of every comment with an independent draw (with
/// replacement) from the dataset's empirical distribution of that field. The
/// other field and the thread structure are unchanged.
pub fn iid_resample(dataset: &Dataset, field: Field, seed: Seed) -> Dataset {
    let mut rng = seed.rng();
    let pool: Vec<f64> = dataset.values(field).collect();
    let threads = dataset
        .threads
        .iter()
        .map(|thread| {
            let comments = thread
                .comments
                .iter()
                .map(|c| {
                    let drawn = pool[rng.random_range(0..pool.len())];
                    match field {
                        Field::Pos => Comment::new(c.index, drawn, c.p_sub),
                        Field::Sub => Comment::new(c.index, c.p_pos, drawn),
                    }
                })
                .collect();
            Thread::new(thread.id.clone(), comments)
        })
        .collect();
    Dataset {
        threads,
        source_label: dataset.source_label.clone(),
    }
}
