//! End-to-end properties of the Monte Carlo experiment layer: agreement
//! with a hand-run trial, determinism across worker counts, statistical
//! behavior of the aggregates, and the orderings the schemes are
//! expected to produce.

use afrelay_core::{
    dors_select, draw_network, gmm_select, run_ber_experiment, run_mse_experiment,
    run_selection_histogram, ExperimentConfig, NetworkConfig, Scheme, SchemeStats, Sweep,
};

fn db(x: f64) -> f64 {
    10f64.powf(x / 10.0)
}

fn stats_for(point_stats: &[SchemeStats], scheme: Scheme) -> &SchemeStats {
    point_stats
        .iter()
        .find(|s| s.scheme == scheme)
        .expect("scheme missing from results")
}

#[test]
fn a_single_trial_reproduces_a_hand_run_pipeline() {
    // nd > ns so the dimension completion term is exercised.
    let network = NetworkConfig::new(2, 3, 2, 4, db(5.0), db(5.0)).unwrap();
    let mut config = ExperimentConfig::new(network, Sweep::RelayCount(vec![4]));
    config.schemes = vec![Scheme::Gmm, Scheme::Dors];
    config.trials = 1;
    config.seed = 9;

    let result = run_mse_experiment(&config).unwrap();
    let stats = &result.points[0].stats;

    let channels = draw_network(&network, 9, 0);
    let beta = network.sigma_x2() * (network.ns() as f64 - network.nd() as f64);

    let greedy = gmm_select(&channels, &network);
    let gmm = stats_for(stats, Scheme::Gmm);
    assert_eq!(gmm.mean_mse.to_bits(), (greedy.mse + beta).to_bits());
    assert_eq!(gmm.mean_selected, greedy.level() as f64);
    assert_eq!(gmm.level_histogram.get(&greedy.level()), Some(&1));
    assert_eq!(gmm.mse_ci95, 0.0);

    let baseline = dors_select(&channels, &network).unwrap();
    let dors = stats_for(stats, Scheme::Dors);
    assert_eq!(dors.mean_mse.to_bits(), (baseline.mse + beta).to_bits());
    assert_eq!(dors.mean_selected, baseline.level() as f64);
}

#[test]
fn worker_counts_agree_bit_for_bit_on_detection_runs() {
    let network = NetworkConfig::new(2, 2, 2, 4, db(5.0), db(5.0)).unwrap();
    let mut config = ExperimentConfig::new(network, Sweep::SourceSnrDb(vec![0.0, 10.0]));
    config.trials = 50;
    config.symbol_blocks_per_trial = 20;
    config.seed = 17;

    config.workers = Some(1);
    let serial = run_ber_experiment(&config).unwrap();
    config.workers = Some(4);
    let parallel = run_ber_experiment(&config).unwrap();

    assert_eq!(serial.points.len(), parallel.points.len());
    for (a, b) in serial.points.iter().zip(&parallel.points) {
        assert_eq!(a.sweep_value, b.sweep_value);
        for (sa, sb) in a.stats.iter().zip(&b.stats) {
            assert_eq!(sa.scheme, sb.scheme);
            assert_eq!(sa.mean_mse.to_bits(), sb.mean_mse.to_bits());
            assert_eq!(sa.mse_ci95.to_bits(), sb.mse_ci95.to_bits());
            assert_eq!(sa.mean_ber.unwrap().to_bits(), sb.mean_ber.unwrap().to_bits());
            assert_eq!(sa.ber_ci95.unwrap().to_bits(), sb.ber_ci95.unwrap().to_bits());
            assert_eq!(sa.mean_selected.to_bits(), sb.mean_selected.to_bits());
            assert_eq!(sa.level_histogram, sb.level_histogram);
        }
    }
}

#[test]
fn adding_a_scheme_does_not_perturb_the_others() {
    let network = NetworkConfig::new(2, 2, 2, 4, db(5.0), db(5.0)).unwrap();
    let mut config = ExperimentConfig::new(network, Sweep::RelayCount(vec![3, 4]));
    config.schemes = vec![Scheme::Gmm];
    config.trials = 25;
    config.symbol_blocks_per_trial = 10;
    config.seed = 23;
    let alone = run_ber_experiment(&config).unwrap();

    config.schemes = vec![Scheme::Gmm, Scheme::Dors];
    let paired = run_ber_experiment(&config).unwrap();

    for (a, b) in alone.points.iter().zip(&paired.points) {
        let sa = stats_for(&a.stats, Scheme::Gmm);
        let sb = stats_for(&b.stats, Scheme::Gmm);
        assert_eq!(sa.mean_mse.to_bits(), sb.mean_mse.to_bits());
        assert_eq!(sa.mean_ber.unwrap().to_bits(), sb.mean_ber.unwrap().to_bits());
        assert_eq!(sa.level_histogram, sb.level_histogram);
    }
}

#[test]
fn confidence_intervals_shrink_with_the_trial_count() {
    let network = NetworkConfig::new(2, 2, 2, 8, db(5.0), db(5.0)).unwrap();
    let mut config = ExperimentConfig::new(network, Sweep::RelayCount(vec![8]));
    config.schemes = vec![Scheme::Gmm];
    config.seed = 31;

    config.trials = 100;
    let narrow = run_mse_experiment(&config).unwrap();
    config.trials = 400;
    let wide = run_mse_experiment(&config).unwrap();

    let ci_small = narrow.points[0].stats[0].mse_ci95;
    let ci_large = wide.points[0].stats[0].mse_ci95;
    // Quadrupling the trials should halve the interval, up to the
    // sampling noise of the variance estimate itself.
    let ratio = ci_small / ci_large;
    assert!(
        (1.5..=2.7).contains(&ratio),
        "CI ratio {ratio} strays from 2"
    );
}

#[test]
fn error_rates_fall_when_the_source_snr_rises() {
    let network = NetworkConfig::new(2, 2, 2, 6, db(5.0), db(5.0)).unwrap();
    let mut config = ExperimentConfig::new(network, Sweep::SourceSnrDb(vec![0.0, 30.0]));
    config.trials = 60;
    config.symbol_blocks_per_trial = 50;
    config.seed = 37;
    let result = run_ber_experiment(&config).unwrap();

    for scheme in [Scheme::Gmm, Scheme::Dors, Scheme::SemiOrthogonal] {
        let low = stats_for(&result.points[0].stats, scheme).mean_ber.unwrap();
        let high = stats_for(&result.points[1].stats, scheme).mean_ber.unwrap();
        assert!(
            high < low,
            "{}: BER {high} at 30 dB not below {low} at 0 dB",
            scheme.label()
        );
        assert!(low > 0.01, "{}: implausibly clean at 0 dB", scheme.label());
    }
}

#[test]
fn a_single_relay_caps_the_selected_set_size() {
    let network = NetworkConfig::new(2, 2, 2, 1, db(5.0), db(5.0)).unwrap();
    let mut config = ExperimentConfig::new(network, Sweep::RelayCount(vec![1]));
    config.trials = 40;
    config.seed = 41;
    let result = run_selection_histogram(&config).unwrap();

    let histogram = &result.points[0].stats[0].level_histogram;
    assert!(histogram.keys().all(|&level| level <= 1));
    assert_eq!(histogram.values().sum::<u64>(), config.trials);
}

#[test]
fn greedy_separates_from_the_baselines_on_paired_draws() {
    let network = NetworkConfig::new(2, 2, 2, 8, db(5.0), db(5.0)).unwrap();
    let mut config = ExperimentConfig::new(network, Sweep::RelayCount(vec![8]));
    config.trials = 200;
    config.seed = 43;
    let result = run_mse_experiment(&config).unwrap();
    let stats = &result.points[0].stats;

    let gmm = stats_for(stats, Scheme::Gmm);
    for baseline in [Scheme::Dors, Scheme::SemiOrthogonal] {
        let other = stats_for(stats, baseline);
        assert!(
            gmm.mean_mse + gmm.mse_ci95 < other.mean_mse - other.mse_ci95,
            "greedy ({} ± {}) does not separate from {} ({} ± {})",
            gmm.mean_mse,
            gmm.mse_ci95,
            baseline.label(),
            other.mean_mse,
            other.mse_ci95
        );
    }
}
