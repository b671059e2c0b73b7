mod common;

use proptest::prelude::*;
use qexplore_core::agent::{q_target, Model};
use qexplore_core::efg::EventId;
use qexplore_core::features::{fcd_feature, tokenize, txc_feature, TextMatrix};
use qexplore_core::sim::{generate_app, random_input, GenParams};
use qexplore_core::{
    AdamState, Architecture, EmbeddingProvider, FeatureBundle, FeatureConfig, QNetwork, SimApp,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn merge_classes_share_fcr(seed in any::<u64>(), ops in 1usize..400) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut fz = common::GraphFuzzer::new(&mut rng, 8);
        for _ in 0..ops {
            fz.step(&mut rng);
        }
        prop_assert_eq!(fz.check(), Ok(()));
    }

    #[test]
    fn fcd_histograms_count_each_generation(seed in any::<u64>(), ops in 1usize..300) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut fz = common::GraphFuzzer::new(&mut rng, 6);
        for _ in 0..ops {
            fz.step(&mut rng);
        }
        let cfg = FeatureConfig::default();
        for v in 0..fz.graph.vertex_count() {
            let e = EventId(v);
            let gens = fz.graph.generations(e, cfg.generations).unwrap();
            let fcd = fcd_feature(&fz.graph, e, &cfg).unwrap();
            prop_assert_eq!(fcd.len(), cfg.generations);
            for (hist, classes) in fcd.iter().zip(&gens) {
                prop_assert_eq!(hist.len(), cfg.buckets);
                prop_assert_eq!(hist.iter().sum::<u64>(), classes.len() as u64);
            }
        }
    }

    #[test]
    fn txc_columns_follow_words(text in "[a-zA-Z ,.!]{0,60}") {
        let cfg = FeatureConfig::default();
        let p = EmbeddingProvider::hashed(cfg.embedding_dim);
        let m = txc_feature(&p, &text, &cfg);
        let words = tokenize(&text);
        for col in 0..cfg.max_words {
            let expected = match words.get(col) {
                Some(w) => p.embed(w),
                None => vec![0.0; cfg.embedding_dim],
            };
            prop_assert_eq!(m.column(col), expected);
        }
    }

    #[test]
    fn coverage_never_decreases(app_seed in 0u64..1000, seed in any::<u64>()) {
        let spec = generate_app(&GenParams { page_count: 12, depth: 4, ..GenParams::with_seed(app_seed) }).unwrap();
        let mut app = SimApp::new(spec).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        app.launch();
        let mut last = app.coverage();
        for _ in 0..300 {
            use rand::Rng;
            let page = app.current_page();
            let i = rng.random_range(0..page.events.len());
            let input = page.events[i].kind.accepts_input().then(|| random_input(&mut rng));
            let out = app.execute(i, input.as_deref()).unwrap();
            prop_assert!(out.coverage >= last);
            prop_assert_eq!(out.coverage_increased, out.coverage > last);
            prop_assert!(out.coverage <= 1.0);
            last = out.coverage;
        }
    }

    #[test]
    fn target_with_zero_discount_is_reward(r in -10.0f64..10.0, qs in prop::collection::vec(-50.0f64..50.0, 0..8)) {
        prop_assert_eq!(q_target(r, &qs, 0.0), r);
        prop_assert_eq!(q_target(r, &qs, 0.6), common::oracle_target(r, &qs, 0.6));
    }
}

fn random_bundle(cfg: &FeatureConfig, rng: &mut ChaCha8Rng) -> FeatureBundle {
    use rand::Rng;
    let mut txc = TextMatrix::zeros(cfg.embedding_dim, cfg.max_words);
    for v in &mut txc.data {
        *v = rng.random_range(-1.0..1.0);
    }
    FeatureBundle {
        fcr: rng.random_range(0..9),
        fcd: (0..cfg.generations)
            .map(|_| (0..cfg.buckets).map(|_| rng.random_range(0..4)).collect())
            .collect(),
        txc,
    }
}

#[test]
fn checkpoint_round_trip_preserves_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.qxp");
    let mut model = Model::new(Architecture::default(), 21).unwrap();
    let cfg = FeatureConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let samples: Vec<_> = (0..5)
        .map(|i| qexplore_core::TrainingSample {
            bundle: random_bundle(&cfg, &mut rng),
            target_q: i as f64,
        })
        .collect();
    for _ in 0..3 {
        model.net.train_batch(&mut model.adam, &samples).unwrap();
    }
    model.save(&path).unwrap();
    let back = Model::load(&path).unwrap();
    assert_eq!(back, model);
    for _ in 0..100 {
        let b = random_bundle(&cfg, &mut rng);
        assert_eq!(
            back.net.forward(&b).unwrap(),
            model.net.forward(&b).unwrap()
        );
    }
}

#[test]
fn load_with_other_embedding_dim_fails() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.qxp");
    let net = QNetwork::new(Architecture::default(), 1).unwrap();
    qexplore_core::nn::save_model(&net, &AdamState::new(net.param_count()), &path).unwrap();
    let other = Architecture::for_features(FeatureConfig {
        embedding_dim: 32,
        ..FeatureConfig::default()
    });
    assert!(matches!(
        Model::load_expecting(&path, &other),
        Err(qexplore_core::Error::ArchitectureMismatch { .. })
    ));
}
