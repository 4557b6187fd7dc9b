use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sigclass::harness::functional_csv;
use sigclass::sigcore::interpolate_path;
use sigclass::synth::{apply_missing, generate_dataset, uneven_grid, uniform_grid, GpSampler, ScenarioConfig};

#[test]
fn gp_moments_match_the_kernel() {
    let grid = uniform_grid(100);
    let sampler = GpSampler::new(&grid, 1.0, 0.1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let draws: Vec<Vec<f64>> = (0..10_000).map(|_| sampler.sample(&mut rng)).collect();
    let moments = |i: usize| {
        let mean = draws.iter().map(|d| d[i]).sum::<f64>() / draws.len() as f64;
        let var = draws.iter().map(|d| (d[i] - mean).powi(2)).sum::<f64>() / (draws.len() - 1) as f64;
        (mean, var)
    };
    for i in [0, 37, 99] {
        let (_, var) = moments(i);
        assert!((var / 0.01 - 1.0).abs() < 0.05, "variance at {i}: {var}");
    }
    let (m0, v0) = moments(0);
    let (m1, v1) = moments(99);
    let cov = draws.iter().map(|d| (d[0] - m0) * (d[99] - m1)).sum::<f64>() / (draws.len() - 1) as f64;
    let corr = cov / (v0 * v1).sqrt();
    assert!((corr - (-1f64).exp()).abs() < 0.02, "correlation {corr}");
}

#[test]
fn missingness_keeps_about_seventy_percent() {
    let ds = generate_dataset(&ScenarioConfig::new(3, 1, 300, 8)).unwrap();
    let sparse = apply_missing(&ds, 0.3, 99).unwrap();
    let counts: Vec<usize> = sparse.samples().iter().flat_map(|s| s.channels.iter().map(|c| c.len())).collect();
    let mean = counts.iter().sum::<usize>() as f64 / counts.len() as f64;
    assert!((mean - 70.0).abs() <= 3.0, "mean surviving points {mean}");
    assert!(counts.iter().all(|&c| c >= 2));
    for s in sparse.samples() {
        let path = interpolate_path(&s.channels, s.channels.len()).unwrap();
        assert!(path.points().iter().all(|v| v.is_finite()));
    }
    let untouched = apply_missing(&ds, 0.0, 99).unwrap();
    assert_eq!(functional_csv(&untouched).unwrap(), functional_csv(&ds).unwrap());
}

#[test]
fn generation_is_deterministic() {
    let cfg = ScenarioConfig::new(3, 3, 60, 5);
    let a = generate_dataset(&cfg).unwrap();
    let b = generate_dataset(&cfg).unwrap();
    assert_eq!(functional_csv(&a).unwrap(), functional_csv(&b).unwrap());
    let other = generate_dataset(&ScenarioConfig::new(3, 3, 60, 6)).unwrap();
    assert_ne!(functional_csv(&a).unwrap(), functional_csv(&other).unwrap());
}

#[test]
fn uneven_grids_are_strictly_increasing() {
    for seed in 0..20 {
        let g = uneven_grid(100, 0.5, seed).unwrap();
        assert_eq!((g[0], g[99]), (0.0, 1.0));
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }
    assert_eq!(uneven_grid(50, 0.0, 3).unwrap(), uniform_grid(50));
}

#[test]
fn uneven_scenario_samples_have_own_grids() {
    let cfg = ScenarioConfig {
        grid_sigma: Some(0.5),
        ..ScenarioConfig::new(2, 1, 10, 4)
    };
    let ds = generate_dataset(&cfg).unwrap();
    let t0 = ds.samples()[0].channels[0].times().to_vec();
    let t1 = ds.samples()[1].channels[0].times().to_vec();
    assert_eq!(t0.len(), 100);
    assert_ne!(t0, t1);
}
