use ftok_core::metrics::{boundary_scores, derivative, normalize, peak, profile, variance};
use ftok_core::model::{Direction, Mode};
use ftok_core::tokenize::{delimiter_tokenize, freedom_tokenize, token_texts};
use ftok_core::{MetricKind, MetricPair, NGramModel, TokenizerConfig};
use proptest::prelude::*;

const KINDS: [&str; 11] = ["f", "df", "dvf", "peak", "p", "dp", "dvp", "peakp", "gp", "dgp", "dvgp"];

fn corpus_model() -> NGramModel {
    let mut m = NGramModel::new(Mode::Chars, 3).unwrap();
    m.train(["the cat sat on the mat.", "a cat, a hat!", "on the mat the cat sat?", "that hat"]);
    m
}

fn pairs() -> impl Strategy<Value = MetricPair> {
    prop::sample::select(KINDS.to_vec()).prop_map(|k| format!("{k}-,{k}+").parse().unwrap())
}

fn dir() -> impl Strategy<Value = Direction> {
    prop_oneof![Just(Direction::Forward), Just(Direction::Backward)]
}

proptest! {
    #[test]
    fn peak_is_negated_second_difference(v in prop::collection::vec(-1000i32..1000, 3..40), d in dir()) {
        let v: Vec<f64> = v.into_iter().map(f64::from).collect();
        let p = peak(&v, d);
        for i in 1..v.len() - 1 {
            prop_assert_eq!(p[i], 2.0 * v[i] - v[i - 1] - v[i + 1]);
        }
    }

    #[test]
    fn derivative_of_first_visited_is_zero(v in prop::collection::vec(-1.0f64..1.0, 1..30)) {
        prop_assert_eq!(derivative(&v, Direction::Forward)[0], 0.0);
        prop_assert_eq!(*derivative(&v, Direction::Backward).last().unwrap(), 0.0);
    }

    #[test]
    fn variance_is_centred(v in prop::collection::vec(-1e3f64..1e3, 1..60)) {
        let sum: f64 = variance(&v).iter().sum();
        prop_assert!(sum.abs() <= 1e-9);
    }

    #[test]
    fn normalize_is_idempotent_and_bounded(v in prop::collection::vec(-1e6f64..1e6, 0..40)) {
        let once = normalize(&v);
        prop_assert_eq!(&normalize(&once), &once);
        prop_assert!(once.iter().all(|x| x.abs() <= 1.0));
        if v.iter().any(|&x| x != 0.0) {
            prop_assert!(once.iter().any(|x| x.abs() == 1.0));
        }
    }

    #[test]
    fn profiles_cover_every_gram_position(line in "[a-z .,!?]{0,30}", n in 1usize..=3, k in prop::sample::select(KINDS.to_vec()), d in dir()) {
        let m = corpus_model();
        let sign = if d == Direction::Forward { '+' } else { '-' };
        let kind: MetricKind = format!("{k}{sign}").parse().unwrap();
        let p = profile(&m, &line, n, kind).unwrap();
        prop_assert_eq!(p.values.len(), line.chars().count().saturating_sub(n - 1));
        prop_assert!(p.values.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn scores_one_per_gap(line in "[a-z .,!?]{0,30}", pair in pairs(), n_set in prop::sample::subsequence(vec![1usize, 2, 3], 1..=3)) {
        let m = corpus_model();
        let config = TokenizerConfig::new(pair, n_set, 0.5, 0.0).unwrap();
        let scores = boundary_scores(&m, &line, &config).unwrap();
        prop_assert_eq!(scores.len(), line.chars().count().saturating_sub(1));
    }

    #[test]
    fn freedom_tokens_partition_the_line(line in "\\PC{0,30}", pair in pairs(), t in 0.0f64..1.0) {
        let m = corpus_model();
        let config = TokenizerConfig::new(pair, vec![1], t, 0.0).unwrap();
        let tokens = freedom_tokenize(&m, &line, &config).unwrap();
        prop_assert_eq!(token_texts(&tokens).concat(), line.clone());
        let mut offset = 0;
        for t in &tokens {
            prop_assert!(!t.text.is_empty());
            prop_assert_eq!(t.start, offset);
            offset += t.text.chars().count();
        }
    }

    #[test]
    fn higher_threshold_coarsens(line in "[a-z .,!?]{0,30}", pair in pairs(), a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let m = corpus_model();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let cuts = |t: f64| -> Vec<usize> {
            let config = TokenizerConfig::new(pair, vec![1, 2], t, 0.0).unwrap();
            freedom_tokenize(&m, &line, &config).unwrap().iter().map(|t| t.start).collect()
        };
        let coarse = cuts(hi);
        let fine = cuts(lo);
        prop_assert!(coarse.iter().all(|s| fine.contains(s)));
    }

    #[test]
    fn delimiter_tokens_are_stable(line in "[a-z ,.!?()'\"\\-]{0,30}") {
        let tokens = delimiter_tokenize(&line);
        let again = delimiter_tokenize(&token_texts(&tokens).concat());
        prop_assert_eq!(tokens, again);
    }
}

#[test]
fn unseen_symbols_do_not_split() {
    let m = corpus_model();
    let config = TokenizerConfig::new("dvf-,dvf+".parse().unwrap(), vec![1], 0.1, 0.0).unwrap();
    let tokens = freedom_tokenize(&m, "qq", &config).unwrap();
    assert_eq!(token_texts(&tokens), vec!["qq"]);
    let everything = TokenizerConfig::new("f-,f+".parse().unwrap(), vec![1], 1.0, 0.0).unwrap();
    let tokens = freedom_tokenize(&m, "the cat sat", &everything).unwrap();
    assert_eq!(token_texts(&tokens), vec!["the cat sat"]);
    assert!(freedom_tokenize(&m, "", &config).unwrap().is_empty());
}
