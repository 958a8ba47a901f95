use std::fs;
use std::path::PathBuf;

use fuzzy_ucs::config::ExperimentConfig;
use fuzzy_ucs::data::{load_csv, load_dataset, read_csv};
use fuzzy_ucs::grid::{export_grid, write_grid};
use fuzzy_ucs::inference::filtered_match_set;
use fuzzy_ucs::learner::Trainer;
use fuzzy_ucs::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

#[test]
fn fixtures_load_with_expected_shapes() {
    let iris = load_dataset(data_dir().join("iris.csv")).unwrap();
    assert_eq!((iris.len(), iris.dimension(), iris.num_classes()), (150, 4, 3));
    let wine = load_dataset(data_dir().join("wine.csv")).unwrap();
    assert_eq!((wine.len(), wine.dimension(), wine.num_classes()), (178, 13, 3));
    for d in [&iris, &wine] {
        assert!(d.rows().iter().flatten().all(|c| c.is_some_and(|v| (0.0..=1.0).contains(&v))));
    }
}

#[test]
fn model_file_round_trip_preserves_predictions() {
    let data = load_dataset(data_dir().join("iris.csv")).unwrap();
    let (train_set, test_set) = shuffle_split(&data, SplitPlan { train_fraction: 0.9, seed: 4 }).unwrap();
    let params = Hyperparameters::default();
    let model = train(&train_set, &params, 10, 4).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    model.save(fs::File::create(&path).unwrap()).unwrap();
    let back = TrainedModel::load(fs::File::open(&path).unwrap()).unwrap();
    assert_eq!(back, model);

    for scheme in Scheme::ALL {
        let a = evaluate(&model, &test_set, scheme, 10.0, &mut stream_rng(1, Stream::TieBreak(scheme))).unwrap();
        let b = evaluate(&back, &test_set, scheme, 10.0, &mut stream_rng(1, Stream::TieBreak(scheme))).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn corrupted_model_is_rejected() {
    let data = gen_rmaj(100, 2);
    let params = Hyperparameters { population_size: 100, ..Hyperparameters::default() };
    let model = train(&data, &params, 1, 2).unwrap();
    let mut json: serde_json::Value = serde_json::to_value(&model).unwrap();
    json["header"]["dimension"] = serde_json::json!(3);
    let text = serde_json::to_string(&json).unwrap();
    assert!(TrainedModel::load(text.as_bytes()).is_err());
    assert!(TrainedModel::load(&b"{not json"[..]).is_err());
}

#[test]
fn schemes_share_the_filtered_match_set() {
    let data = load_dataset(data_dir().join("iris.csv")).unwrap();
    let model = train(&data, &Hyperparameters::default(), 5, 9).unwrap();
    let partition = model.partition();
    for x in data.rows().iter().take(30) {
        let a = filtered_match_set(&model.population, &partition, x, 10.0).unwrap();
        let b = filtered_match_set(&model.population, &partition, x, 10.0).unwrap();
        let idx = |m: &[fuzzy_ucs::inference::Candidate<'_>]| {
            m.iter().map(|c| (c.rule as *const FuzzyRule, c.degree.to_bits())).collect::<Vec<_>>()
        };
        assert_eq!(idx(&a), idx(&b));
        assert!(a.iter().all(|c| c.rule.experience > 10.0 && c.degree > 0.0));
        let explained = explain_ds(&model, x, 10.0).unwrap();
        assert_eq!(explained.is_some(), !a.is_empty());
        if let Some((m, betp)) = explained {
            assert!((betp.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert!((0.0..=1.0).contains(&m.ignorance()));
        }
    }
}

#[test]
fn deletion_keeps_small_populations_bounded() {
    let params = Hyperparameters { population_size: 40, theta_ga: 5.0, ..Hyperparameters::default() };
    let mut trainer = Trainer::new(params, 3, 3, 21).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut deleted = 0;
    for _ in 0..3000 {
        let x: Vec<f64> = (0..3).map(|_| rng.gen()).collect();
        let label = ((x[0] * 3.0) as usize).min(2);
        let before = trainer.population().micro_size();
        let report = trainer.train_step(&[Some(x[0]), Some(x[1]), Some(x[2])], label).unwrap();
        let after = trainer.population().micro_size();
        assert!(after <= 40);
        assert_eq!(after, before + usize::from(report.covered) + report.offspring - report.deleted);
        deleted += report.deleted;
        for r in trainer.population().rules() {
            assert!(r.numerosity > 0);
            assert!(r.fitness > -1.0 && r.fitness <= 1.0);
        }
    }
    assert!(deleted > 0);
}

#[test]
fn no_duplicate_rules_enter_through_the_ga() {
    let data = gen_rmux(400, 3);
    let params = Hyperparameters { population_size: 300, ..Hyperparameters::default() };
    let model = train(&data, &params, 5, 3).unwrap();
    let rules = model.population.rules();
    let mut keys: Vec<_> = rules.iter().map(|r| (r.antecedent.clone(), r.consequent)).collect();
    keys.sort_by_key(|(a, c)| (a.iter().map(|t| t.bits()).collect::<Vec<_>>(), *c));
    let total = keys.len();
    keys.dedup();
    // consequents can drift after insertion, so only near-uniqueness is expected
    assert!(keys.len() * 10 >= total * 9, "{} unique of {}", keys.len(), total);
}

#[test]
fn config_file_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.cfg");
    fs::write(&path, "# small run\nN = 300\ntheta_GA = 25\nschemes = ds, vote\nepochs = 3\n").unwrap();
    let mut cfg = ExperimentConfig::from_file(&path).unwrap();
    assert_eq!(cfg.params.population_size, 300);
    assert_eq!(cfg.params.theta_ga, 25.0);
    assert_eq!(cfg.schemes, vec![Scheme::Ds, Scheme::Vote]);
    cfg.set("N", "500").unwrap();
    assert_eq!(cfg.params.population_size, 500);
    let again = ExperimentConfig::parse(&cfg.render()).unwrap();
    assert_eq!(again, cfg);
    assert_eq!(again.hash(), cfg.hash());
    assert!(ExperimentConfig::from_file(dir.path().join("missing.cfg")).is_err());
}

#[test]
fn grid_export_of_a_trained_model() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for _ in 0..300 {
        let (a, b): (f64, f64) = (rng.gen(), rng.gen());
        rows.push(vec![Some(a), Some(b)]);
        labels.push(usize::from(a * a + b * b > 0.5));
    }
    let data = Dataset::new(rows, labels, vec!["in".into(), "out".into()], vec!["a".into(), "b".into()]).unwrap();
    let model = train(&data, &Hyperparameters::default(), 10, 5).unwrap();
    let cells = export_grid(&model, 20, 10.0, Scheme::Ds, &mut stream_rng(5, Stream::Grid)).unwrap();
    assert_eq!(cells.len(), 400);
    for c in &cells {
        let theta = c.mass_theta.unwrap();
        assert!((0.0..=1.0).contains(&theta));
        let betp = c.betp.as_ref().unwrap();
        assert!((betp.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        let masses: f64 = c.masses.as_ref().unwrap().iter().sum::<f64>() + theta;
        assert!((masses - 1.0).abs() < 1e-9);
    }
    let mut buf = Vec::new();
    write_grid(&cells, &model.header.class_names, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().next().unwrap(), "x1,x2,pred,betp_in,betp_out,mass_in,mass_out,mass_theta");
    assert_eq!(text.lines().count(), 401);
}

#[test]
fn generated_csv_reloads_identically() {
    let data = gen_rcar(50, 8);
    let mut buf = Vec::new();
    data.to_csv(&mut buf).unwrap();
    let raw = read_csv(buf.as_slice()).unwrap();
    assert_eq!(raw.rows.len(), 50);
    assert_eq!(raw.feature_names.len(), 12);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rcar.csv");
    fs::write(&path, &buf).unwrap();
    assert_eq!(load_csv(&path).unwrap(), raw);
}
