use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sigclass::baselines::{bspline_basis, bspline_features, common_grid, fourier_features, BasisKind, FpcaChannel};
use sigclass::harness::{run_experiment, ExperimentConfig, Mode, ModelKind};
use sigclass::sigcore::ChannelSeries;

fn channel(f: impl Fn(f64) -> f64) -> ChannelSeries {
    let grid = common_grid();
    let values = grid.iter().map(|&t| f(t)).collect();
    ChannelSeries::new(0, grid, values).unwrap()
}

#[test]
fn basis_element_gives_indicator() {
    let grid = common_grid();
    let basis = bspline_basis(8, &grid).unwrap();
    for j in [0, 3, 7] {
        let c = ChannelSeries::new(0, grid.clone(), basis.column(j).iter().copied().collect()).unwrap();
        let coef = bspline_features(&[c], 8).unwrap();
        for (i, v) in coef.iter().enumerate() {
            let expected = if i == j { 1.0 } else { 0.0 };
            assert!((v - expected).abs() < 1e-8, "element {j}, coefficient {i}: {v}");
        }
    }
}

#[test]
fn reconstruction_improves_with_k() {
    let f = |t: f64| (3.0 * PI * t).sin() + t * t;
    let grid = common_grid();
    let c = channel(f);
    let errors: Vec<f64> = [4, 8, 12]
        .iter()
        .map(|&k| {
            let coef = bspline_features(std::slice::from_ref(&c), k).unwrap();
            let basis = bspline_basis(k, &grid).unwrap();
            grid.iter()
                .enumerate()
                .map(|(r, &t)| {
                    let fit: f64 = (0..k).map(|j| basis[(r, j)] * coef[j]).sum();
                    (fit - f(t)).powi(2)
                })
                .sum::<f64>()
        })
        .collect();
    assert!(errors[0] > errors[1] && errors[1] > errors[2], "{errors:?}");
}

#[test]
fn fourier_parseval() {
    let f = |t: f64| (2.0 * PI * t).sin().exp();
    let coef = fourier_features(&[channel(f)], 15).unwrap();
    // unnormalized basis: the constant has squared norm 1, sines and cosines 1/2
    let energy = coef[0] * coef[0] + 0.5 * coef[1..].iter().map(|a| a * a).sum::<f64>();
    let m = 100_000;
    let norm = (0..m).map(|i| f((i as f64 + 0.5) / m as f64).powi(2)).sum::<f64>() / m as f64;
    assert!((energy / norm - 1.0).abs() < 0.05, "{energy} vs {norm}");
}

#[test]
fn fourier_constant_channel() {
    let coef = fourier_features(&[channel(|_| 2.5)], 7).unwrap();
    assert!((coef[0] - 2.5).abs() < 1e-8);
    assert!(coef[1..].iter().all(|v| v.abs() < 1e-8));
}

#[test]
fn fpca_rank_one() {
    let grid = common_grid();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let curves: Vec<Vec<f64>> = (0..60)
        .map(|_| {
            let a: f64 = rng.random_range(-2.0..2.0);
            grid.iter().map(|&t| a * (PI * t).sin()).collect()
        })
        .collect();
    let fpca = FpcaChannel::fit(&curves, 3).unwrap();
    assert!(fpca.explained(1) >= 0.999);
}

fn mean_accuracy(kind: ModelKind, d: usize, q: usize, n: usize, missing: f64, reps: usize) -> Vec<f64> {
    let mut cfg = ExperimentConfig::new(Mode::Simulate, 31);
    cfg.d = d;
    cfg.q = q;
    cfg.n = n;
    cfg.model = kind;
    cfg.missing_prob = missing;
    cfg.replicates = reps;
    run_experiment(&cfg).unwrap().report.replicates.iter().map(|r| r.accuracy).collect()
}

#[test]
fn baselines_beat_chance_on_the_three_channel_scenario() {
    for kind in [ModelKind::Bspline, ModelKind::Fourier, ModelKind::Fpca] {
        let acc = mean_accuracy(kind, 3, 3, 1000, 0.0, 10);
        let above = acc.iter().filter(|&&a| a > 0.5).count();
        assert!(above >= 9, "{kind}: {acc:?}");
    }
}

#[test]
fn missingness_does_not_help_baselines() {
    for kind in [BasisKind::Bspline, BasisKind::Fourier] {
        let model = if kind == BasisKind::Bspline { ModelKind::Bspline } else { ModelKind::Fourier };
        let full: f64 = mean_accuracy(model, 2, 1, 300, 0.0, 10).iter().sum();
        let sparse: f64 = mean_accuracy(model, 2, 1, 300, 0.3, 10).iter().sum();
        assert!(sparse <= full, "{kind}: {sparse} > {full}");
    }
}
