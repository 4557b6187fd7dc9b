use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sigclass::features::SignatureDesign;
use sigclass::harness::split;
use sigclass::selection::{
    cross_validate_lambda, default_cpen_grid, default_lambda_grid, penalty, select_order, slope_heuristic,
    tune_lambda, DropMeasure, FoldData, PenaltySpec, RiskProfile,
};
use sigclass::synth::{generate_dataset, ScenarioConfig};

fn noise_search(seed: u64) -> (f64, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (n, m) = (100, 5);
    let x = DMatrix::from_fn(n, m, |_, _| rng.sample::<f64, _>(StandardNormal));
    let labels: Vec<u8> = (0..n).map(|i| (i % 2) as u8).collect();
    let grid = default_lambda_grid();
    let search = cross_validate_lambda(&labels, 5, seed, &grid, |tr, va| {
        let rows = |idx: &[usize]| DMatrix::from_fn(idx.len(), m, |i, j| x[(idx[i], j)]);
        Ok(FoldData {
            train: rows(tr),
            train_labels: tr.iter().map(|&i| labels[i]).collect(),
            validation: rows(va),
            validation_labels: va.iter().map(|&i| labels[i]).collect(),
            signature_len: m,
        })
    })
    .unwrap();
    (search.lambda, search.grid)
}

#[test]
fn pure_noise_prefers_heavy_shrinkage() {
    let hits = (0..20)
        .filter(|&seed| {
            let (lambda, grid) = noise_search(seed);
            // upper third of the descending grid
            grid[..grid.len() / 3 + 1].contains(&lambda)
        })
        .count();
    assert!(hits >= 16, "{hits} of 20");
}

#[test]
fn lambda_grid_edge_cases() {
    let ds = generate_dataset(&ScenarioConfig::new(2, 1, 80, 3)).unwrap();
    assert_eq!(tune_lambda(&ds, 4, &[0.05], 1).unwrap(), 0.05);
    let grid = [1.0, 0.1, 0.01, 0.001];
    let doubled = [0.01, 1.0, 0.1, 0.01, 0.001, 1.0];
    assert_eq!(tune_lambda(&ds, 4, &grid, 1).unwrap(), tune_lambda(&ds, 4, &doubled, 1).unwrap());
}

#[test]
fn penalty_formula() {
    let spec = PenaltySpec::new(0.016, 0.4, 3, 1000, 3).unwrap();
    let direct = 0.016 * (4.0 * 3f64.exp()).sqrt() / 1000f64.powf(0.4);
    assert!((penalty(1, &spec).unwrap() - direct).abs() <= 1e-12);
    assert!((penalty(1, &spec).unwrap() - 0.009049).abs() < 5e-7);
    assert!((penalty(0, &spec).unwrap() - 0.004524).abs() < 5e-7);
    for p in 0..8 {
        assert!(penalty(p + 1, &spec).unwrap() > penalty(p, &spec).unwrap());
    }
}

#[test]
fn nested_risks_do_not_increase() {
    for seed in 0..10 {
        let ds = generate_dataset(&ScenarioConfig::new(2, 1, 120, seed)).unwrap();
        let design = SignatureDesign::new(&ds).unwrap();
        let risks = RiskProfile::compute(&design, 0.01, 4).unwrap().risks();
        for w in risks.windows(2) {
            assert!(w[1] <= w[0] + 1e-6, "seed {seed}: {risks:?}");
        }
    }
}

#[test]
fn order_selection_limits_on_real_profiles() {
    let ds = generate_dataset(&ScenarioConfig::new(2, 1, 150, 4)).unwrap();
    let huge = PenaltySpec::new(1e3, 0.4, 1, ds.len(), ds.alphabet()).unwrap();
    assert_eq!(select_order(&ds, 0.01, &huge, 3).unwrap().selected_p, 0);
    let design = SignatureDesign::new(&ds).unwrap();
    let profile = RiskProfile::compute(&design, 0.001, 3).unwrap();
    let risks = profile.risks();
    let zero = PenaltySpec::new(0.0, 0.4, 1, ds.len(), ds.alphabet()).unwrap();
    let chosen = profile.select(&zero).unwrap().selected_p;
    if risks.windows(2).all(|w| w[1] < w[0]) {
        assert_eq!(chosen, 3);
    } else {
        // flat stretch: the smallest order of the minimum
        let min = risks.iter().cloned().fold(f64::INFINITY, f64::min);
        assert_eq!(chosen, risks.iter().position(|&r| r == min).unwrap());
    }
}

#[test]
fn slope_heuristic_reaches_zero_and_doubles() {
    let ds = generate_dataset(&ScenarioConfig::new(2, 1, 200, 6)).unwrap();
    for measure in [DropMeasure::Order, DropMeasure::Dimension] {
        let s = slope_heuristic(&ds, 0.01, &default_cpen_grid(), 0.4, 4, measure).unwrap();
        assert_eq!(s.path.last().unwrap().1, 0);
        assert_eq!(s.c_pen, 2.0 * s.drop_at);
        assert!(s.path.windows(2).all(|w| w[1].1 <= w[0].1));
    }
}

#[test]
fn larger_q_penalty_never_selects_higher_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for seed in 0..5 {
        let ds = generate_dataset(&ScenarioConfig::new(1, 3, 200, seed)).unwrap();
        let (train, _) = split(&ds, 0.2, seed).unwrap();
        let design = SignatureDesign::new(&train).unwrap();
        let profile = RiskProfile::compute(&design, 0.005, 6).unwrap();
        let c = 10f64.powf(rng.random_range(-3.0..-1.0));
        let at = |q| profile.select(&PenaltySpec::new(c, 0.4, q, train.len(), 2).unwrap()).unwrap().selected_p;
        assert!(at(3) <= at(0));
    }
}
