use sigclass::harness::{
    evaluate, fit_model, load_config, load_dataset, run_experiment, run_experiment_file, save_dataset, split,
    write_outputs, Dataset, ExperimentConfig, FittedModel, Mode, ModelKind, PipelineSettings, Sample, Setting,
};
use sigclass::sigcore::ChannelSeries;
use sigclass::synth::{generate_dataset, ScenarioConfig};

fn settings() -> PipelineSettings {
    PipelineSettings {
        lambda: Setting::Fixed(0.01),
        c_pen: Setting::Fixed(0.05),
        p_max: Setting::Fixed(3),
        seed: 9,
        ..PipelineSettings::default()
    }
}

#[test]
fn dataset_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ScenarioConfig {
        grid_sigma: Some(0.5),
        ..ScenarioConfig::new(3, 2, 40, 12)
    };
    let ds = generate_dataset(&cfg).unwrap();
    let (f, s) = (dir.path().join("f.csv"), dir.path().join("s.csv"));
    save_dataset(&ds, &f, &s).unwrap();
    let back = load_dataset(&f, &s).unwrap();
    assert_eq!(back.samples(), ds.samples());
    assert_eq!(back.meta().scalar_names, ds.meta().scalar_names);
    assert_eq!(back.channels(), 3);
}

#[test]
fn model_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let ds = generate_dataset(&ScenarioConfig::new(2, 1, 120, 3)).unwrap();
    let (train, test) = split(&ds, 0.25, 1).unwrap();
    for kind in [ModelKind::Pslr, ModelKind::Fpca] {
        let s = PipelineSettings {
            k_grid: Some(vec![3]),
            ..settings()
        };
        let model = fit_model(kind, &train, &s).unwrap().model;
        let path = dir.path().join(format!("{kind}.json"));
        model.save(&path).unwrap();
        let back = FittedModel::load(&path).unwrap();
        assert_eq!(back, model);
        assert_eq!(back.predict_proba(&test).unwrap(), model.predict_proba(&test).unwrap());
    }
}

fn scramble(sample: &Sample) -> Sample {
    let mut s = sample.clone();
    s.channels = s
        .channels
        .iter()
        .map(|c| {
            let values = c.values().iter().map(|v| -3.0 * v + 7.0).collect();
            ChannelSeries::new(c.channel(), c.times().to_vec(), values).unwrap()
        })
        .collect();
    s.scalars.iter_mut().for_each(|z| *z += 100.0);
    s
}

#[test]
fn test_rows_do_not_reach_the_fit() {
    let ds = generate_dataset(&ScenarioConfig::new(2, 1, 100, 8)).unwrap();
    let (train, test) = split(&ds, 0.2, 4).unwrap();
    let test_ids: Vec<&str> = test.samples().iter().map(|s| s.id.as_str()).collect();
    let perturbed = Dataset::new(
        ds.samples()
            .iter()
            .map(|s| if test_ids.contains(&s.id.as_str()) { scramble(s) } else { s.clone() })
            .collect(),
        ds.meta().clone(),
    )
    .unwrap();
    let (train2, test2) = split(&perturbed, 0.2, 4).unwrap();
    assert_eq!(train2.samples(), train.samples());
    assert_ne!(test2.samples(), test.samples());
    let auto = PipelineSettings {
        p_max: Setting::Fixed(3),
        seed: 2,
        ..PipelineSettings::default()
    };
    for kind in [ModelKind::Pslr, ModelKind::Fpca] {
        let s = PipelineSettings {
            k_grid: Some(vec![2, 3]),
            ..auto.clone()
        };
        assert_eq!(fit_model(kind, &train, &s).unwrap().model, fit_model(kind, &train2, &s).unwrap().model);
    }
}

#[test]
fn scalar_and_signature_variants() {
    let ds = generate_dataset(&ScenarioConfig::new(2, 2, 120, 5)).unwrap();
    let (train, test) = split(&ds, 0.2, 0).unwrap();
    let scalar = fit_model(ModelKind::Scalar, &train, &settings()).unwrap();
    assert_eq!(scalar.model.p_hat, Some(0));
    assert_eq!(scalar.model.coefficients.len(), 1 + 2);

    let sig = fit_model(ModelKind::Signature, &train, &settings()).unwrap();
    assert!(sig.model.coefficients.scalar_block().is_empty());
    assert!(sig.model.scalar_names.is_empty());
    let trace = sig.trace.unwrap();
    // q = 0 leaves e^q = 1 in the penalty
    let r1 = &trace.records[1];
    let expected = 0.05 * 4f64.sqrt() / (train.len() as f64).powf(0.4);
    assert!((r1.penalty - expected).abs() < 1e-12);
    let m = evaluate(&sig.model, &test).unwrap();
    assert!((0.0..=1.0).contains(&m.accuracy));
}

#[test]
fn experiment_is_deterministic_and_writes_tables() {
    let mut cfg = ExperimentConfig::new(Mode::Simulate, 17);
    cfg.n = 120;
    cfg.replicates = 2;
    cfg.lambda = Setting::Fixed(0.01);
    cfg.p_max = Setting::Fixed(3);
    let a = run_experiment(&cfg).unwrap();
    let b = run_experiment(&cfg).unwrap();
    assert_eq!(a.report.metrics.len(), 2);
    assert_eq!(a.report.metrics, b.report.metrics);
    assert_eq!(a.report.coefficients, b.report.coefficients);

    let dir = tempfile::tempdir().unwrap();
    write_outputs(&a, dir.path()).unwrap();
    for f in ["report.json", "trace.csv", "cpen_trace.csv", "coefficients.csv", "level_magnitudes.csv", "replicates.csv"] {
        assert!(dir.path().join(f).is_file(), "{f}");
    }
    let trace = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 1 + 2 * 4);
}

#[test]
fn config_file_with_loaded_data() {
    let dir = tempfile::tempdir().unwrap();
    let ds = generate_dataset(&ScenarioConfig::new(1, 1, 60, 2)).unwrap();
    save_dataset(&ds, &dir.path().join("f.csv"), &dir.path().join("s.csv")).unwrap();
    let path = dir.path().join("run.cfg");
    std::fs::write(
        &path,
        "mode = load\nseed = 3\nfunctional_file = f.csv\nscalar_file = s.csv\nlambda = 0.02\nc_pen = 0.1\np_max = 2\n",
    )
    .unwrap();
    let cfg = load_config(&path).unwrap();
    assert_eq!(cfg.functional_file.as_deref(), Some(dir.path().join("f.csv").as_path()));
    let out = dir.path().join("out");
    let report = run_experiment_file(&path, &out).unwrap();
    assert_eq!(report.c_pen, Some(0.1));
    assert!(report.p_hat.unwrap() <= 2);
    assert!(out.join("report.json").is_file());
}
