mod common;

use std::collections::HashSet;

use common::*;
use proptest::prelude::*;
use textgat::corpus::{build_vocabulary, TokenMode};
use textgat::graph::{build_graph_with, count_windows, normalize, pmi};
use textgat::numcore::softmax_row;
use textgat::{DenseMatrix, Rng, SparseMatrix, TextGraph};

fn sparse_strategy() -> impl Strategy<Value = (usize, usize, Vec<(usize, usize, f64)>)> {
    (1usize..50, 1usize..50).prop_flat_map(|(r, c)| {
        let entry = (0..r, 0..c, -5.0f64..5.0);
        (Just(r), Just(c), prop::collection::vec(entry, 0..200))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spmm_matches_dense((r, c, triplets) in sparse_strategy(), k in 1usize..6, seed in any::<u64>()) {
        let s = SparseMatrix::from_triplets(r, c, &triplets).unwrap();
        let mut rng = Rng::new(seed);
        let x = random_dense(c, k, &mut rng);
        let d = s.to_dense();
        let want = DenseMatrix::from_fn(r, k, |i, j| (0..c).map(|m| d.get(i, m) * x.get(m, j)).sum());
        prop_assert!(s.spmm(&x).unwrap().max_abs_diff(&want) < 1e-12);
        let y = random_dense(r, k, &mut rng);
        let want_t = DenseMatrix::from_fn(c, k, |i, j| (0..r).map(|m| d.get(m, i) * y.get(m, j)).sum());
        prop_assert!(s.spmm_transpose(&y).unwrap().max_abs_diff(&want_t) < 1e-12);
    }

    #[test]
    fn csr_rows_are_sorted_and_without_zeros((r, c, triplets) in sparse_strategy()) {
        let s = SparseMatrix::from_triplets(r, c, &triplets).unwrap();
        for row in 0..r {
            let idx = s.row_indices(row);
            prop_assert!(idx.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(s.row_values(row).iter().all(|&v| v != 0.0));
        }
        prop_assert_eq!(SparseMatrix::from_dense(&s.to_dense()), s);
    }

    #[test]
    fn softmax_sums_to_one_and_ignores_shift(
        row in prop::collection::vec(-50.0f64..50.0, 1..20),
        shift in -500.0f64..500.0,
    ) {
        let p = softmax_row(&row);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(p.iter().all(|&v| (0.0..=1.0).contains(&v)));
        let shifted: Vec<f64> = row.iter().map(|v| v + shift).collect();
        let q = softmax_row(&shifted);
        for (a, b) in p.iter().zip(&q) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn char_mode_yields_one_token_per_non_space_char(text in "[a-z 中文字\t]{0,40}") {
        let tokens = TokenMode::Char.tokenize(&text);
        prop_assert_eq!(tokens.len(), text.chars().filter(|c| !c.is_whitespace()).count());
        prop_assert!(tokens.iter().all(|t| t.chars().count() == 1));
    }

    #[test]
    fn word_mode_round_trips_whitespace_split(words in prop::collection::vec("[a-z]{1,5}", 0..12)) {
        let text = words.join("  ");
        prop_assert_eq!(TokenMode::Word.tokenize(&text), words);
    }

    #[test]
    fn graph_invariants(seed in any::<u64>(), ws in 1usize..8) {
        let mut rng = Rng::new(seed);
        let corpus = random_corpus(&mut rng, 12, 15);
        let vocab = build_vocabulary(&corpus).unwrap();
        let distinct: HashSet<&String> = corpus.documents().iter().flat_map(|d| &d.tokens).collect();
        prop_assert_eq!(vocab.len(), distinct.len());

        let g = build_graph_with(&corpus, &vocab, &lenient(ws)).unwrap();
        prop_assert_eq!(g.n_nodes(), corpus.len() + vocab.len());
        prop_assert!(g.adjacency.is_symmetric());
        for i in 0..g.n_nodes() {
            prop_assert_eq!(g.adjacency.get(i, i), 1.0);
        }
        prop_assert!(g.adjacency.iter().all(|(_, _, v)| v > 0.0));
        for i in 0..g.n_docs {
            for j in 0..g.n_docs {
                if i != j {
                    prop_assert_eq!(g.adjacency.get(i, j), 0.0);
                }
            }
        }

        let stats = count_windows(&corpus, &vocab, ws);
        for i in 0..vocab.len() {
            for j in (0..vocab.len()).filter(|&j| j != i) {
                prop_assert_eq!(pmi(&stats, i, j), pmi(&stats, j, i));
            }
        }

        let again = build_graph_with(&corpus, &vocab, &lenient(ws)).unwrap();
        prop_assert_eq!(g.to_bytes(), again.to_bytes());
        let round = TextGraph::from_bytes(&g.to_bytes()).unwrap();
        prop_assert_eq!(round.to_bytes(), g.to_bytes());
    }

    #[test]
    fn graph_matches_brute_force(seed in any::<u64>(), ws in 1usize..6) {
        let mut rng = Rng::new(seed);
        let corpus = random_corpus(&mut rng, 10, 12);
        let vocab = build_vocabulary(&corpus).unwrap();
        let g = build_graph_with(&corpus, &vocab, &lenient(ws)).unwrap();
        prop_assume!(g.n_nodes() <= 50);
        let (want, _) = brute_force_adjacency(&corpus, vocab.terms(), ws);
        prop_assert!(g.adjacency.to_dense().max_abs_diff(&want) < 1e-12);
    }

    #[test]
    fn normalization_adds_identity_then_scales_by_degree(seed in any::<u64>(), n in 1usize..30) {
        let mut rng = Rng::new(seed);
        let a = random_adjacency(n, 0.3, &mut rng).to_dense();
        let tilde = DenseMatrix::from_fn(n, n, |i, j| a.get(i, j) + if i == j { 1.0 } else { 0.0 });
        let degree: Vec<f64> = (0..n).map(|i| tilde.row(i).iter().sum()).collect();
        let want = DenseMatrix::from_fn(n, n, |i, j| tilde.get(i, j) / (degree[i] * degree[j]).sqrt());
        let got = normalize(&SparseMatrix::from_dense(&a)).0.to_dense();
        prop_assert!(got.max_abs_diff(&want) < 1e-15);
    }
}
