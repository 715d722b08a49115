use mhscreen_core::features::{class_correlation, class_profiles, fit_tfidf, TfidfModel};
use mhscreen_core::{ClassLabel, Corpus, LabeledPost};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const WORDS: [&str; 12] = [
    "i", "feel", "so", "tired", "the", "bully", "mom", "pray", "cant", "sleep", "race", "old",
];

fn random_text(rng: &mut ChaCha8Rng, max_len: usize) -> String {
    let n = rng.gen_range(0..=max_len);
    (0..n)
        .map(|_| WORDS[rng.gen_range(0..WORDS.len())])
        .collect::<Vec<_>>()
        .join(" ")
}

#[test]
fn two_document_fixture() {
    let m = fit_tfidf(["a b", "a c"], 100).unwrap();
    let terms: Vec<&str> = (0..m.len()).map(|i| m.term(i).unwrap()).collect();
    assert_eq!(terms, ["a", "a b", "a c", "b", "c"]);
    let r = (1.5f64).ln() + 1.0;
    assert!((m.idf_of("a").unwrap() - 1.0).abs() < 1e-12);
    assert!((m.idf_of("a b").unwrap() - r).abs() < 1e-12);

    let v = m.transform("a b");
    let norm = (1.0 + 2.0 * r * r).sqrt();
    let expect = [(0, 1.0 / norm), (1, r / norm), (3, r / norm)];
    assert_eq!(v.nnz(), 3);
    for (got, want) in v.entries().iter().zip(expect) {
        assert_eq!(got.0, want.0);
        assert!((got.1 - want.1).abs() < 1e-12);
    }
}

#[test]
fn repeated_term_and_oov() {
    let m = fit_tfidf(["x y", "x"], 100).unwrap();
    let v = m.transform("y y y y");
    assert_eq!(v.entries(), &[(m.index_of("y").unwrap(), 1.0)]);
    assert!(m.transform("q r s").is_empty());
}

#[test]
fn unit_norm_on_random_texts() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let train: Vec<String> = (0..300).map(|_| random_text(&mut rng, 12)).collect();
    let m = fit_tfidf(train.iter().map(String::as_str), 40).unwrap();
    let mut checked = 0;
    for _ in 0..10_000 {
        let v = m.transform(&random_text(&mut rng, 15));
        if !v.is_empty() {
            assert!((v.norm() - 1.0).abs() < 1e-9);
            checked += 1;
        }
    }
    assert!(checked > 9_000);
}

#[test]
fn rebuilt_from_parts_gives_identical_transforms() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let train: Vec<String> = (0..100).map(|_| random_text(&mut rng, 10)).collect();
    let m = fit_tfidf(train.iter().map(String::as_str), 50).unwrap();
    let back = TfidfModel::from_parts(m.vocabulary().clone(), m.idf().to_vec(), m.max_features()).unwrap();
    assert_eq!(back, m);
    for _ in 0..200 {
        let t = random_text(&mut rng, 10);
        assert_eq!(back.transform(&t), m.transform(&t));
    }
}

#[test]
fn fitting_is_deterministic_and_keeps_stopwords() {
    let docs = ["the cat", "the dog", "the end"];
    let a = fit_tfidf(docs, 10).unwrap();
    assert_eq!(a, fit_tfidf(docs, 10).unwrap());
    assert!(a.index_of("the").is_some());
}

#[test]
fn correlation_bounds_and_diagonal() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let texts: Vec<String> = (0..120).map(|_| random_text(&mut rng, 8)).collect();
    let corpus = Corpus::new(
        texts
            .iter()
            .enumerate()
            .map(|(i, t)| LabeledPost::new(i.to_string(), t.clone(), ClassLabel::ALL[i % 5], None))
            .collect(),
    )
    .unwrap();
    let m = fit_tfidf(texts.iter().map(String::as_str), 60).unwrap();
    let profiles = class_profiles(&m, &corpus, &ClassLabel::ALL[..5], 10).unwrap();
    let corr = class_correlation(&profiles).unwrap();
    for (i, row) in corr.values.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let v = v.expect("non-constant profiles");
            assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&v));
            if i == j {
                assert!((v - 1.0).abs() < 1e-12);
            }
        }
    }
}

proptest! {
    #[test]
    fn adding_a_document_never_raises_idf(
        docs in prop::collection::vec(prop::collection::vec(0usize..6, 1..6), 1..12),
        extra in prop::collection::vec(0usize..6, 1..6),
    ) {
        let render = |d: &Vec<usize>| d.iter().map(|&i| WORDS[i]).collect::<Vec<_>>().join(" ");
        let base: Vec<String> = docs.iter().map(render).collect();
        let mut more = base.clone();
        more.push(render(&extra));
        let a = fit_tfidf(base.iter().map(String::as_str), 10_000).unwrap();
        let b = fit_tfidf(more.iter().map(String::as_str), 10_000).unwrap();
        for w in extra.iter().map(|&i| WORDS[i]) {
            if let (Some(before), Some(after)) = (a.idf_of(w), b.idf_of(w)) {
                prop_assert!(after <= before + 1e-12);
            }
        }
    }
}
