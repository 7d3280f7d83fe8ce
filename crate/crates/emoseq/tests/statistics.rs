//! Statistical behavior of the estimators against the synthetic generators
//! and their analytic oracles. All runs are seeded, so every assertion is
//! deterministic; tolerances are sized from the sampling error at the stated
//! sample sizes.

use emoseq::correlations::{
    correlation_ratio, mi_estimate, mi_report, mutual_information, pair_counts, pmi_matrix,
    three_step, ThreeStepConfig,
};
use emoseq::estimators::{cluster_curve, histogram, thread_means};
use emoseq::model::{BinSpec, Dataset, Field};
use emoseq::nullmodel::{global_shuffle, iid_resample, thread_shuffle, Seed};
use emoseq::synth::{
    generate_iid, generate_markov, iid_cluster_size_oracle, BetaComponent, GeneratorConfig,
    LengthLaw, Marginal, MarkovModel,
};

fn sticky_two_state(jitter: bool) -> MarkovModel {
    let model = MarkovModel::with_uniform_initial(
        vec![0.05, 0.95],
        vec![vec![0.9, 0.1], vec![0.1, 0.9]],
    )
    .unwrap();
    if jitter {
        model.with_jitter(0.05).unwrap()
    } else {
        model
    }
}

fn persistent_three_state() -> MarkovModel {
    MarkovModel::with_uniform_initial(
        vec![0.05, 0.55, 0.95],
        vec![
            vec![0.8, 0.1, 0.1],
            vec![0.1, 0.8, 0.1],
            vec![0.1, 0.1, 0.8],
        ],
    )
    .unwrap()
    .with_jitter(0.05)
    .unwrap()
}

fn bimodal_beta() -> Marginal {
    Marginal::beta_mixture(vec![BetaComponent {
        alpha: 0.7,
        beta: 0.7,
        weight: 1.0,
    }])
    .unwrap()
}

fn per_thread_means(dataset: &Dataset) -> Vec<f64> {
    dataset
        .threads
        .iter()
        .map(|t| t.values(Field::Pos).sum::<f64>() / t.len() as f64)
        .collect()
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
}

#[test]
fn histogram_matches_beta_mixture_bin_integrals() {
    let marginal = Marginal::beta_mixture(vec![
        BetaComponent {
            alpha: 0.5,
            beta: 2.0,
            weight: 0.5,
        },
        BetaComponent {
            alpha: 2.0,
            beta: 0.5,
            weight: 0.5,
        },
    ])
    .unwrap();
    let config = GeneratorConfig::new(10_000, LengthLaw::Fixed(20), Seed(101));
    let dataset = generate_iid(&marginal, &config).unwrap();
    let n = dataset.comment_count() as f64;

    let spec = BinSpec::tenths();
    let hist = histogram(&dataset, Field::Pos, spec).unwrap();
    let freqs = hist.frequencies();
    for b in 0..spec.bins() {
        let expected = marginal.bin_mass(&spec, b);
        let se = (expected * (1.0 - expected) / n).sqrt();
        assert!(
            (freqs[b] - expected).abs() <= 3.0 * se,
            "bin {b}: observed {} expected {expected} (3se = {})",
            freqs[b],
            3.0 * se
        );
    }
    // The two extreme bins dominate the distribution.
    let max_inner = freqs[1..9].iter().cloned().fold(0.0, f64::max);
    assert!(freqs[0] > max_inner);
    assert!(freqs[9] > max_inner);
}

#[test]
fn thread_mean_distribution_wider_for_markov_than_iid_baseline() {
    let config = GeneratorConfig::new(2_000, LengthLaw::Fixed(50), Seed(202));
    let markov = generate_markov(&sticky_two_state(true), &config).unwrap();
    let baseline = iid_resample(&markov, Field::Pos, Seed(203));

    let var_markov = variance(&per_thread_means(&markov));
    let var_baseline = variance(&per_thread_means(&baseline));
    assert!(
        var_markov > 2.0 * var_baseline,
        "markov {var_markov} vs baseline {var_baseline}"
    );

    // Same comparison through the histogram pipeline: the baseline peaks
    // higher than the correlated data.
    let spec = BinSpec::tenths();
    let data = thread_means(&markov, Field::Pos, None, spec).unwrap();
    let base = thread_means(&baseline, Field::Pos, None, spec).unwrap();
    let data_peak = data.histogram.frequencies().into_iter().fold(0.0, f64::max);
    let base_peak = base.histogram.frequencies().into_iter().fold(0.0, f64::max);
    assert!(base_peak > data_peak, "baseline {base_peak} vs data {data_peak}");
}

#[test]
fn iid_resample_preserves_global_mean_within_3_se() {
    let config = GeneratorConfig::new(2_000, LengthLaw::Fixed(50), Seed(204));
    let dataset = generate_markov(&sticky_two_state(true), &config).unwrap();
    let resampled = iid_resample(&dataset, Field::Pos, Seed(205));

    let values: Vec<f64> = dataset.values(Field::Pos).collect();
    let n = values.len() as f64;
    let se = (variance(&values) / n).sqrt();
    let delta = (mean(&values)
        - resampled.values(Field::Pos).sum::<f64>() / n)
        .abs();
    assert!(delta <= 3.0 * se, "delta {delta} vs 3se {}", 3.0 * se);
}

#[test]
fn iid_resample_thread_mean_variance_matches_sigma2_over_n() {
    let thread_len = 50usize;
    let config = GeneratorConfig::new(2_000, LengthLaw::Fixed(thread_len), Seed(206));
    let dataset = generate_markov(&sticky_two_state(true), &config).unwrap();
    let resampled = iid_resample(&dataset, Field::Pos, Seed(207));

    let pooled: Vec<f64> = dataset.values(Field::Pos).collect();
    let predicted = variance(&pooled) / thread_len as f64;
    let observed = variance(&per_thread_means(&resampled));
    assert!(
        (observed - predicted).abs() <= 0.15 * predicted,
        "observed {observed} predicted {predicted}"
    );
    // The correlated original is far wider than the sigma^2/N prediction.
    assert!(variance(&per_thread_means(&dataset)) > 3.0 * predicted);
}

#[test]
fn cluster_curve_iid_matches_run_length_oracle() {
    // q = P(p_sub >= 0.5) = 0.5 under the uniform marginal; long threads
    // approach the geometric mean run length 1/(1-q) = 2.
    let config = GeneratorConfig::new(1_000, LengthLaw::Fixed(1_000), Seed(208));
    let dataset = generate_iid(&Marginal::uniform(), &config).unwrap();
    let lengths: Vec<usize> = dataset.threads.iter().map(|t| t.len()).collect();

    let curve = cluster_curve(&dataset, &[0.5]).unwrap();
    let oracle = iid_cluster_size_oracle(&lengths, 0.5);
    assert!((oracle - 2.0).abs() < 0.01);
    assert!(
        (curve.mean_sizes[0] / oracle - 1.0).abs() < 0.02,
        "estimate {} oracle {oracle}",
        curve.mean_sizes[0]
    );
}

#[test]
fn cluster_curve_persistent_chain_beats_both_shuffles() {
    let config = GeneratorConfig::new(5_000, LengthLaw::Geometric { mean: 20.0 }, Seed(209));
    let dataset = generate_markov(&sticky_two_state(true), &config).unwrap();
    let thread_shuffled = thread_shuffle(&dataset, Seed(210));
    let global_shuffled = global_shuffle(&dataset, Seed(211));

    let grid = [0.3, 0.5, 0.7];
    let data = cluster_curve(&dataset, &grid).unwrap();
    let by_thread = cluster_curve(&thread_shuffled, &grid).unwrap();
    let by_global = cluster_curve(&global_shuffled, &grid).unwrap();
    for k in 0..grid.len() {
        assert!(
            data.mean_sizes[k] > by_thread.mean_sizes[k],
            "T={}: data {} vs thread shuffle {}",
            grid[k],
            data.mean_sizes[k],
            by_thread.mean_sizes[k]
        );
        assert!(
            by_thread.mean_sizes[k] > by_global.mean_sizes[k],
            "T={}: thread shuffle {} vs global shuffle {}",
            grid[k],
            by_thread.mean_sizes[k],
            by_global.mean_sizes[k]
        );
    }
}

#[test]
fn correlation_ratio_iid_is_near_one() {
    let config = GeneratorConfig::new(8_000, LengthLaw::Fixed(25), Seed(212));
    let dataset = generate_iid(&bimodal_beta(), &config).unwrap();
    let pairs = pair_counts(&dataset, Field::Pos, BinSpec::tenths()).unwrap();
    let c = correlation_ratio(&pairs, 10).unwrap();
    let mut checked = 0;
    for i in 0..10 {
        for j in 0..10 {
            if pairs.get(i, j) >= 1_000 {
                let value = c.get(i, j).unwrap();
                assert!(
                    (value - 1.0).abs() <= 0.1,
                    "cell ({i},{j}) with {} pairs: C = {value}",
                    pairs.get(i, j)
                );
                checked += 1;
            }
        }
    }
    assert!(checked >= 50, "only {checked} cells had 1000+ pairs");
}

#[test]
fn correlation_ratio_sticky_diagonal_is_1_8() {
    // Stay probability 0.9 over a uniform stationary of 1/2: C = 0.9/0.5.
    let config = GeneratorConfig::new(4_000, LengthLaw::Fixed(25), Seed(213));
    let dataset = generate_markov(&sticky_two_state(true), &config).unwrap();
    let pairs = pair_counts(&dataset, Field::Pos, BinSpec::tenths()).unwrap();
    let c = correlation_ratio(&pairs, 10).unwrap();
    for bin in [0usize, 9] {
        let value = c.get(bin, bin).unwrap();
        assert!(
            (value - 1.8).abs() < 0.05,
            "diagonal C at bin {bin}: {value}"
        );
    }
}

#[test]
fn pmi_is_maximal_on_the_diagonal_for_persistent_chains() {
    let config = GeneratorConfig::new(4_000, LengthLaw::Fixed(25), Seed(214));
    let dataset = generate_markov(&persistent_three_state(), &config).unwrap();
    let pairs = pair_counts(&dataset, Field::Pos, BinSpec::tenths()).unwrap();
    let pmi = pmi_matrix(&correlation_ratio(&pairs, 10).unwrap());

    let occupied = [0usize, 5, 9];
    for &i in &occupied {
        let diagonal = pmi.get(i, i).unwrap();
        assert!(diagonal > 0.0);
        for &j in &occupied {
            if j != i {
                assert!(
                    diagonal > pmi.get(i, j).unwrap(),
                    "row {i}: pmi({i},{i}) = {diagonal} vs pmi({i},{j}) = {:?}",
                    pmi.get(i, j)
                );
            }
        }
    }
}

#[test]
fn mi_estimate_shrinks_toward_oracle_with_sample_size() {
    let model = sticky_two_state(true);
    let oracle = model.mi_oracle().unwrap();

    let small = GeneratorConfig::new(400, LengthLaw::Fixed(25), Seed(215));
    let large = GeneratorConfig::new(40_000, LengthLaw::Fixed(25), Seed(216));
    let spec = BinSpec::tenths();

    let err_of = |config: &GeneratorConfig| {
        let dataset = generate_markov(&model, config).unwrap();
        let pairs = pair_counts(&dataset, Field::Pos, spec).unwrap();
        (mi_estimate(&pairs).corrected - oracle).abs() / oracle
    };

    let err_small = err_of(&small);
    let err_large = err_of(&large);
    assert!(err_small < 0.06, "1e4-scale relative error {err_small}");
    assert!(err_large < 0.006, "1e6-scale relative error {err_large}");
    assert!(err_large < err_small);
}

#[test]
fn global_shuffle_kills_markov_mi() {
    let config = GeneratorConfig::new(8_000, LengthLaw::Fixed(25), Seed(217));
    let dataset = generate_markov(&sticky_two_state(true), &config).unwrap();
    let spec = BinSpec::tenths();
    let original = mutual_information(&pair_counts(&dataset, Field::Pos, spec).unwrap());
    assert!(original > 0.3);

    let shuffled = global_shuffle(&dataset, Seed(218));
    let after = mutual_information(&pair_counts(&shuffled, Field::Pos, spec).unwrap());
    assert!(after < 0.01, "global-shuffle MI {after}");
}

#[test]
fn three_step_matches_oracle_on_persistent_chain() {
    let model = persistent_three_state();
    let oracle = model.three_step_oracle(&[2], &[0]).unwrap();

    let config = GeneratorConfig::new(8_000, LengthLaw::Fixed(25), Seed(219));
    let dataset = generate_markov(&model, &config).unwrap();
    let curve = three_step(
        &dataset,
        Field::Pos,
        BinSpec::tenths(),
        ThreeStepConfig::default(),
    )
    .unwrap();

    // States 0.05 / 0.55 / 0.95 live in bins 0 / 5 / 9.
    let state_bins = [0usize, 5, 9];
    for (state, &bin) in state_bins.iter().enumerate() {
        let c_plus = curve.c_plus[bin];
        let c_minus = curve.c_minus[bin];
        assert!(
            (c_plus / oracle.c_plus[state] - 1.0).abs() < 0.1,
            "c_plus bin {bin}: {c_plus} vs oracle {}",
            oracle.c_plus[state]
        );
        assert!(
            (c_minus / oracle.c_minus[state] - 1.0).abs() < 0.1,
            "c_minus bin {bin}: {c_minus} vs oracle {}",
            oracle.c_minus[state]
        );
    }
    // Persistence: after two positive posts the next is very likely
    // positive, and very unlikely negative.
    assert!(curve.c_plus[9] > 1.0);
    assert!(curve.c_plus[0] < 1.0);
    assert!(curve.c_minus[0] > 1.0);
    assert!(curve.c_minus[9] < 1.0);
}

#[test]
fn null_models_leave_iid_statistics_unchanged() {
    let config = GeneratorConfig::new(4_000, LengthLaw::Geometric { mean: 25.0 }, Seed(220));
    let dataset = generate_iid(&Marginal::uniform(), &config).unwrap();
    let spec = BinSpec::tenths();

    let variants = [
        dataset.clone(),
        thread_shuffle(&dataset, Seed(221)),
        global_shuffle(&dataset, Seed(222)),
        iid_resample(&dataset, Field::Sub, Seed(223)),
    ];
    let mut cluster_sizes = Vec::new();
    for variant in &variants {
        let est = mi_estimate(&pair_counts(variant, Field::Sub, spec).unwrap());
        assert!(est.corrected.abs() < 0.005, "corrected MI {}", est.corrected);
        cluster_sizes.push(cluster_curve(variant, &[0.5]).unwrap().mean_sizes[0]);
    }
    let reference = cluster_sizes[0];
    for s in &cluster_sizes[1..] {
        assert!(
            (s / reference - 1.0).abs() < 0.03,
            "cluster size {s} vs reference {reference}"
        );
    }
}

#[test]
fn mi_report_rows_agree_on_iid_data() {
    let config = GeneratorConfig::new(4_000, LengthLaw::Geometric { mean: 25.0 }, Seed(224));
    let dataset = generate_iid(&bimodal_beta(), &config).unwrap();
    let report = mi_report(&dataset, Field::Pos, BinSpec::tenths(), Seed(225), 50).unwrap();
    assert_eq!(report.rows.len(), 3);
    for row in &report.rows {
        assert!(row.plugin < 0.005, "{}: plugin {}", row.label, row.plugin);
        assert!(
            row.corrected.abs() < 0.003,
            "{}: corrected {}",
            row.label,
            row.corrected
        );
    }
    let spread = report
        .rows
        .iter()
        .map(|r| r.plugin)
        .fold(f64::NEG_INFINITY, f64::max)
        - report
            .rows
            .iter()
            .map(|r| r.plugin)
            .fold(f64::INFINITY, f64::min);
    assert!(spread < 0.003, "spread {spread}");
}

#[test]
fn mi_report_separates_shuffles_on_persistent_data() {
    let config = GeneratorConfig::new(4_000, LengthLaw::Geometric { mean: 25.0 }, Seed(226));
    let dataset = generate_markov(&sticky_two_state(true), &config).unwrap();
    let report = mi_report(&dataset, Field::Pos, BinSpec::tenths(), Seed(227), 50).unwrap();
    let [original, by_thread, by_global] = [&report.rows[0], &report.rows[1], &report.rows[2]];
    // 95% separation of adjacent rows.
    assert!(
        original.plugin - 1.96 * original.bootstrap_se
            > by_thread.plugin + 1.96 * by_thread.bootstrap_se
    );
    assert!(
        by_thread.plugin - 1.96 * by_thread.bootstrap_se
            > by_global.plugin + 1.96 * by_global.bootstrap_se
    );
    assert!(by_global.plugin < 0.01);
}
