use imbdrift::imbalance::ClassSizeTracker;
use imbdrift::learners::{
    hidden_size, EnsembleModel, MlpModel, OnlineModel, Sampling, DEFAULT_ENSEMBLE_SIZE,
};
use imbdrift::stream::{preset, Stream};
use proptest::prelude::*;

fn sampling() -> impl Strategy<Value = Sampling> {
    prop_oneof![Just(Sampling::Ob), Just(Sampling::Oob), Just(Sampling::Uob)]
}

/// Prequential pass over `steps` examples; returns every prediction.
fn predictions(
    s: Sampling,
    preset_name: &str,
    seed: u64,
    steps: usize,
    reset_every: usize,
) -> Vec<(f64, bool)> {
    let schedule = preset(preset_name).unwrap();
    let mut stream = Stream::new(schedule, seed).unwrap();
    let mut model = EnsembleModel::new(s, 5, schedule.n_features(), 0.1, seed);
    let mut tracker = ClassSizeTracker::<f64>::default();
    let mut out = Vec::with_capacity(steps);
    for i in 0..steps {
        let ex = stream.next_example().unwrap();
        let p = model.predict(&ex.features).unwrap();
        assert_eq!(
            model.predict(&ex.features).unwrap(),
            p,
            "predict changed state"
        );
        out.push((p.score, p.label == imbdrift::Label::Pos));
        tracker.update(ex.label);
        model.train_one(&ex, &tracker).unwrap();
        if reset_every > 0 && (i + 1) % reset_every == 0 {
            model.reset();
        }
        assert_eq!(model.members().len(), 5);
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn scores_are_probabilities(s in sampling(), seed in any::<u64>(), reset_every in 0usize..300) {
        for (score, pos) in predictions(s, "sine1-pxy", seed, 600, reset_every) {
            prop_assert!((0.0..=1.0).contains(&score));
            prop_assert_eq!(pos, score >= 0.5);
        }
    }

    #[test]
    fn runs_are_reproducible(s in sampling(), seed in any::<u64>()) {
        prop_assert_eq!(
            predictions(s, "sea-pyx", seed, 400, 150),
            predictions(s, "sea-pyx", seed, 400, 150)
        );
    }

    #[test]
    fn member_outputs_sum_to_one(
        seed in any::<u64>(),
        n in 1usize..6,
        x in prop::collection::vec(-5.0f64..5.0, 6),
    ) {
        let m = MlpModel::<f64>::new(n, 0.1, seed);
        prop_assert_eq!(m.n_hidden(), hidden_size(n));
        let p = m.predict(&x[..n]).unwrap();
        prop_assert!(p.iter().all(|v| (0.0..=1.0).contains(v)));
        prop_assert!((p[0] + p[1] - 1.0).abs() < 1e-12);
    }
}

#[test]
fn default_ensemble_has_fifteen_members() {
    let m = EnsembleModel::<f64>::new(Sampling::Oob, DEFAULT_ENSEMBLE_SIZE, 2, 0.1, 0);
    assert_eq!(m.members().len(), 15);
}

#[test]
fn oversampling_lifts_minority_recall() {
    // Positives are 10% of sine1-pxy; after 3000 steps OOB should find
    // more of them than plain OB.
    let schedule = preset("sine1-pxy").unwrap();
    let recall = |s: Sampling| {
        let mut hits = 0;
        let mut seen = 0;
        for seed in 0..3 {
            let mut stream = Stream::new(schedule, seed).unwrap();
            let mut model = EnsembleModel::new(s, 5, 2, 0.1, seed);
            let mut tracker = ClassSizeTracker::<f64>::default();
            for t in 0..3000 {
                let ex = stream.next_example().unwrap();
                let p = model.predict(&ex.features).unwrap();
                if t >= 2000 && ex.label == imbdrift::Label::Pos {
                    seen += 1;
                    hits += (p.label == ex.label) as usize;
                }
                tracker.update(ex.label);
                model.train_one(&ex, &tracker).unwrap();
            }
        }
        hits as f64 / seen as f64
    };
    let (ob, oob) = (recall(Sampling::Ob), recall(Sampling::Oob));
    assert!(oob > ob + 0.2, "OB {ob:.3} OOB {oob:.3}");
}
