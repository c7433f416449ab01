mod common;

use std::collections::BTreeSet;
use std::sync::Arc;

use chrono::{TimeZone, Utc};
use proptest::prelude::*;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wntags::ontology::{neighborhood, parse_simple_graph, NeighborhoodConfig, OntologyGraph, Sense};
use wntags::repository::{
    mean_weight, AgreementConfig, EmotionTuple, ImageId, Repository, RepositoryError,
    WeightRating,
};

use common::{random_graph, toy_graph_text, RandomGraph};

fn toy() -> Arc<OntologyGraph> {
    Arc::new(parse_simple_graph(toy_graph_text().as_bytes()).unwrap())
}

fn ratings(weights: &[f64]) -> Vec<WeightRating> {
    let at = Utc.with_ymd_and_hms(2020, 1, 1, 0, 0, 0).unwrap();
    weights
        .iter()
        .enumerate()
        .map(|(i, &weight)| WeightRating { annotator: format!("a{i}"), weight, recorded_at: at })
        .collect()
}

#[test]
fn mean_weight_examples() {
    assert!((mean_weight(&ratings(&[0.5, 0.7, 0.9])).unwrap() - 0.7).abs() < 1e-15);
    assert_eq!(mean_weight(&ratings(&[0.3])).unwrap(), 0.3);
    assert!(matches!(mean_weight(&[]), Err(RepositoryError::EmptyRatings)));
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let w: Vec<f64> = (0..100).map(|_| rng.random::<f64>()).collect();
    let mut naive = 0.0;
    for x in &w {
        naive += x;
    }
    assert!((mean_weight(&ratings(&w)).unwrap() - naive / 100.0).abs() < 1e-12);
}

#[test]
fn mean_weight_permutation_and_bounds() {
    let mut runner = proptest::test_runner::TestRunner::new(ProptestConfig::with_cases(10_000));
    runner
        .run(&(prop::collection::vec(0.0f64..=1.0, 1..40), any::<u64>()), |(w, seed)| {
            let m = mean_weight(&ratings(&w)).unwrap();
            let mut shuffled = w.clone();
            rand::seq::SliceRandom::shuffle(shuffled.as_mut_slice(), &mut ChaCha8Rng::seed_from_u64(seed));
            let m2 = mean_weight(&ratings(&shuffled)).unwrap();
            prop_assert!((m - m2).abs() <= 1e-12);
            let lo = w.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!((0.0..=1.0).contains(&m));
            prop_assert!(m >= lo - 1e-12 && m <= hi + 1e-12);
            Ok(())
        })
        .unwrap();
}

fn any_component() -> impl Strategy<Value = f64> {
    prop_oneof![
        -20.0f64..30.0,
        0.5f64..1.5,
        8.5f64..9.5,
        Just(1.0),
        Just(9.0),
        Just(f64::NAN),
        Just(f64::INFINITY),
        Just(f64::NEG_INFINITY),
        any::<f64>(),
    ]
}

#[test]
fn emotion_bounds_fuzz() {
    let mut runner = proptest::test_runner::TestRunner::new(ProptestConfig::with_cases(10_000));
    runner
        .run(&(any_component(), any_component(), any_component()), |(v, a, d)| {
            let valid = [v, a, d].iter().all(|x| (1.0..=9.0).contains(x));
            let result = EmotionTuple::new(v, a, d);
            prop_assert_eq!(result.is_ok(), valid);
            if !valid {
                let is_range_error = matches!(result, Err(RepositoryError::EmotionOutOfRange { .. }));
                prop_assert!(is_range_error);
                let mut repo = Repository::new(toy());
                let raw = EmotionTuple { valence: v, arousal: a, dominance: d };
                let added = repo.add_image("x", None, Some(raw)).is_ok();
                prop_assert!(!added);
                prop_assert!(repo.is_empty());
            }
            Ok(())
        })
        .unwrap();
}

#[test]
fn annotation_contracts() {
    let g = toy();
    let mut repo = Repository::new(g.clone());
    let rec = repo.add_image("file:7175.jpg", Some("lamp".into()), Some(EmotionTuple::new(5.0, 3.2, 6.1).unwrap())).unwrap();
    assert!(!rec.committed);
    let id = rec.id;
    assert!(matches!(
        repo.add_image("x", None, Some(EmotionTuple { valence: 0.9, arousal: 5.0, dominance: 5.0 })),
        Err(RepositoryError::EmotionOutOfRange { component: "valence", .. })
    ));
    let none = repo.add_image("y", None, None).unwrap();
    assert!(none.keyword.is_none() && none.emotion.is_none());
    let cat = g.lookup_senses("cat", None)[0].clone();
    repo.annotate(id, cat.clone(), 0.9, "ana").unwrap();
    repo.annotate(id, cat.clone(), 0.4, "ana").unwrap();
    let tag = repo.image(id).unwrap().annotation(&cat).unwrap().clone();
    assert_eq!(tag.ratings.len(), 1);
    assert_eq!(tag.ratings[0].weight, 0.4);
    assert!(matches!(repo.annotate(id, cat.clone(), 1.2, "ana"), Err(RepositoryError::WeightOutOfRange(_))));
    assert!(matches!(repo.annotate(ImageId(99), cat.clone(), 0.5, "ana"), Err(RepositoryError::UnknownImage(_))));
    let bogus = Sense::new("cat", "n9999".parse().unwrap());
    assert!(matches!(repo.annotate(id, bogus, 0.5, "ana"), Err(RepositoryError::UnknownSense(_))));
    for a in ["b", "c", "d", "e"] {
        repo.annotate(id, cat.clone(), 0.5, a).unwrap();
    }
    assert!(matches!(repo.commit(id), Err(RepositoryError::TooFewSenses { found: 1 })));
    repo.annotate(id, g.lookup_senses("sky", None)[0].clone(), 0.5, "ana").unwrap();
    assert!(matches!(repo.commit(id), Err(RepositoryError::TooFewSenses { found: 2 })));
    repo.annotate(id, g.lookup_senses("sea", None)[0].clone(), 0.5, "ana").unwrap();
    assert!(repo.commit(id).unwrap().committed);
}

#[test]
fn expanded_semantics_matches_bfs_union() {
    for seed in 0..30u64 {
        let rg = random_graph(seed, 30, 1.2);
        let g = Arc::new(rg.graph());
        let oracle = rg.floyd(|_| true);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut repo = Repository::new(g.clone());
        let id = repo.add_image("x", None, None).unwrap().id;
        let nodes: Vec<usize> = (0..rg.n).collect();
        let tagged: Vec<usize> = nodes.choose_multiple(&mut rng, 5).copied().collect();
        for &t in &tagged {
            repo.annotate(id, Sense::new(rg.lemmas[t][0].clone(), RandomGraph::id(t)), 0.5, "a").unwrap();
        }
        assert!(matches!(
            repo.expanded_semantics(id, &NeighborhoodConfig::with_distance(1).unwrap()),
            Err(RepositoryError::UncommittedImage(_))
        ));
        repo.commit(id).unwrap();
        let tags: BTreeSet<Sense> = repo.image(id).unwrap().annotations.iter().map(|a| a.sense.clone()).collect();
        assert_eq!(repo.expanded_semantics(id, &NeighborhoodConfig::with_distance(0).unwrap()).unwrap(), tags);
        let mut expected = tags.clone();
        for &t in &tagged {
            for (i, lemmas) in rg.lemmas.iter().enumerate() {
                if oracle[t][i].is_some_and(|d| d <= 2) {
                    expected.extend(lemmas.iter().map(|l| Sense::new(l.clone(), RandomGraph::id(i))));
                }
            }
        }
        let cfg = NeighborhoodConfig::with_distance(2).unwrap();
        let got = repo.expanded_semantics(id, &cfg).unwrap();
        assert_eq!(got, expected);
        let wider = repo.expanded_semantics(id, &NeighborhoodConfig::with_distance(3).unwrap()).unwrap();
        assert!(wider.is_superset(&got));
        let one = neighborhood(RandomGraph::id(tagged[0]), &cfg, &g).unwrap();
        assert!(got.is_superset(&one));
    }
}

/// Textbook Fleiss kappa over per-item category counts.
fn fleiss_oracle(items: &[Vec<usize>]) -> f64 {
    let n_items = items.len() as f64;
    let k = items[0].len();
    let mut p_bar = 0.0;
    let mut totals = vec![0.0; k];
    let mut all = 0.0;
    for item in items {
        let n: usize = item.iter().sum();
        let agree: usize = item.iter().map(|c| c * c.saturating_sub(1)).sum();
        p_bar += agree as f64 / (n * (n - 1)) as f64;
        for (j, c) in item.iter().enumerate() {
            totals[j] += *c as f64;
        }
        all += n as f64;
    }
    p_bar /= n_items;
    let pe: f64 = totals.iter().map(|t| (t / all).powi(2)).sum();
    (p_bar - pe) / (1.0 - pe)
}

fn rated_repo(tags: usize, raters: usize, mut weight: impl FnMut(usize, usize) -> f64) -> (Repository, Vec<(ImageId, Sense)>) {
    let mut text = String::new();
    for i in 1..=tags {
        text.push_str(&format!("n{i}\tt{i}\tg\t\n"));
    }
    let g = Arc::new(parse_simple_graph(text.as_bytes()).unwrap());
    let mut repo = Repository::new(g);
    let mut keys = Vec::new();
    let mut id = repo.add_image("x", None, None).unwrap().id;
    for t in 0..tags {
        if t % 25 == 24 {
            id = repo.add_image("x", None, None).unwrap().id;
        }
        let sense = Sense::new(format!("t{}", t + 1), format!("n{}", t + 1).parse().unwrap());
        for r in 0..raters {
            repo.annotate(id, sense.clone(), weight(t, r), &format!("r{r}")).unwrap();
        }
        keys.push((id, sense));
    }
    (repo, keys)
}

#[test]
fn kappa_unanimous_and_insufficient() {
    let (repo, keys) = rated_repo(3, 4, |t, _| [0.8, 0.1, 0.55][t]);
    let cfg = AgreementConfig::default();
    for (id, sense) in &keys {
        assert!((repo.tag_agreement(*id, sense, &cfg).unwrap().kappa - 1.0).abs() <= 1e-9);
    }
    let (repo, keys) = rated_repo(1, 1, |_, _| 0.8);
    assert!(matches!(
        repo.tag_agreement(keys[0].0, &keys[0].1, &cfg),
        Err(RepositoryError::InsufficientRaters { found: 1 })
    ));
}

#[test]
fn kappa_of_random_ratings_is_near_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (repo, _) = rated_repo(1000, 4, |_, _| rng.random::<f64>());
    let report = repo.agreement_report(&AgreementConfig::default()).unwrap();
    let overall = report.overall.unwrap();
    assert!(overall.abs() < 0.1, "{overall}");
    let mean_tag: f64 = report.tags.iter().map(|t| t.kappa).sum::<f64>() / report.tags.len() as f64;
    assert!(mean_tag.abs() < 0.1);
}

#[test]
fn kappa_matches_textbook_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (repo, _) = rated_repo(60, 5, |t, _| if t % 3 == 0 { 0.9 } else { rng.random::<f64>() });
    for bins in [2, 3, 5, 10] {
        let cfg = AgreementConfig { bins, threshold: 0.4 };
        let report = repo.agreement_report(&cfg).unwrap();
        let items: Vec<Vec<usize>> = repo
            .images()
            .flat_map(|r| r.annotations.iter())
            .map(|a| {
                let mut c = vec![0; bins];
                for r in &a.ratings {
                    c[((r.weight * bins as f64).floor() as usize).min(bins - 1)] += 1;
                }
                c
            })
            .collect();
        assert!((report.overall.unwrap() - fleiss_oracle(&items)).abs() < 1e-12);
    }
}

#[test]
fn kappa_ignores_annotator_names() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let weights: Vec<Vec<f64>> = (0..30).map(|_| (0..3).map(|_| rng.random()).collect()).collect();
    let (a, keys) = rated_repo(30, 3, |t, r| weights[t][r]);
    let (b, _) = rated_repo(30, 3, |t, r| weights[t][2 - r]);
    let cfg = AgreementConfig::default();
    for (id, sense) in &keys {
        let x = a.tag_agreement(*id, sense, &cfg).unwrap().kappa;
        let y = b.tag_agreement(*id, sense, &cfg).unwrap().kappa;
        assert!((x - y).abs() < 1e-12);
    }
}

fn random_repository(seed: u64, g: &Arc<OntologyGraph>) -> Repository {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let senses: Vec<Sense> = g.synsets().flat_map(|s| g.synset_senses(s.id)).collect();
    let mut repo = Repository::new(g.clone());
    for i in 0..rng.random_range(0..12) {
        let keyword = rng.random_bool(0.5).then(|| format!("kw {}", rng.random_range(0..4)));
        let emotion = rng.random_bool(0.7).then(|| {
            EmotionTuple::new(rng.random_range(1.0..=9.0), rng.random_range(1.0..=9.0), rng.random_range(1.0..=9.0)).unwrap()
        });
        let id = repo.add_image(&format!("file:{i}.jpg"), keyword, emotion).unwrap().id;
        let k = rng.random_range(0..7);
        for s in senses.choose_multiple(&mut rng, k) {
            for a in 0..rng.random_range(1..4) {
                let at = Utc.timestamp_opt(rng.random_range(0..2_000_000_000), rng.random_range(0..1_000_000_000)).unwrap();
                repo.annotate_at(id, s.clone(), rng.random::<f64>(), &format!("ann\"{a}\u{e9}"), at).unwrap();
            }
        }
        if rng.random_bool(0.6) {
            let _ = repo.commit(id);
        }
    }
    repo
}

#[test]
fn save_load_round_trip() {
    let g = toy();
    for seed in 0..100 {
        let repo = random_repository(seed, &g);
        let mut buf = Vec::new();
        repo.save(&mut buf).unwrap();
        let loaded = Repository::load(buf.as_slice(), g.clone()).unwrap();
        assert_eq!(loaded, repo, "seed {seed}");
        assert_eq!(loaded.keyword_vocabulary(), repo.keyword_vocabulary());
        let mut again = Vec::new();
        loaded.save(&mut again).unwrap();
        assert_eq!(buf, again);
    }
}

#[test]
fn vocabulary_matches_fold() {
    let g = toy();
    for seed in 0..50 {
        let repo = random_repository(seed, &g);
        assert_eq!(repo.keyword_vocabulary(), repo.recompute_vocabulary());
        let folded: BTreeSet<String> = repo.images().filter_map(|r| r.keyword.clone()).collect();
        assert_eq!(repo.keyword_vocabulary(), folded);
    }
}

#[test]
fn corpus_stats_match_naive_pass() {
    let (repo, _) = wntags::evaluation::generate_synthetic_corpus(
        &wntags::evaluation::SyntheticSpec { image_count: 100, graph_size: 500, seed: 11, ..Default::default() },
        None,
    )
    .unwrap();
    let counts: Vec<f64> = repo.committed_images().map(|r| r.annotations.len() as f64).collect();
    let n = counts.len() as f64;
    let mut sum = 0.0;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &c in &counts {
        sum += c;
        lo = lo.min(c);
        hi = hi.max(c);
    }
    let mean = sum / n;
    let mut ss = 0.0;
    for &c in &counts {
        ss += (c - mean) * (c - mean);
    }
    let sd = (ss / (n - 1.0)).sqrt();
    let mut sorted = counts.clone();
    sorted.sort_by(f64::total_cmp);
    let median = (sorted[49] + sorted[50]) / 2.0;
    let synsets: BTreeSet<_> = repo.images().flat_map(|r| r.annotations.iter().map(|a| a.sense.synset)).collect();
    let stats = repo.corpus_stats();
    assert_eq!(stats.image_count, 100);
    assert!((stats.tag_count_mean - mean).abs() < 1e-9);
    assert!((stats.tag_count_sd - sd).abs() < 1e-9);
    assert!((stats.tag_count_median - median).abs() < 1e-9);
    assert_eq!(stats.tag_count_min as f64, lo);
    assert_eq!(stats.tag_count_max as f64, hi);
    assert_eq!(stats.distinct_synset_count, synsets.len());
    assert!(stats.tag_count_min as f64 <= stats.tag_count_median && stats.tag_count_median <= stats.tag_count_max as f64);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn rerating_keeps_rating_count(weights in prop::collection::vec(0.0f64..=1.0, 1..10)) {
        let g = toy();
        let mut repo = Repository::new(g.clone());
        let id = repo.add_image("x", None, None).unwrap().id;
        let sense = g.lookup_senses("cat", None)[0].clone();
        repo.annotate(id, sense.clone(), 0.5, "other").unwrap();
        for w in &weights {
            repo.annotate(id, sense.clone(), *w, "same").unwrap();
            prop_assert_eq!(repo.image(id).unwrap().annotation(&sense).unwrap().ratings.len(), 2);
        }
    }
}
