mod common;

use proptest::prelude::*;
use steelpower::dataset::{self, ColumnRole, SchemaConfig};
use steelpower::eda::{self, correlation_of_columns, histogram, pearson};
use steelpower::preprocess::StandardizationParams;
use steelpower::synthetic::steel_like_csv;
use steelpower::Matrix;

fn small_schema() -> SchemaConfig {
    SchemaConfig::new(
        vec![
            ("y".into(), ColumnRole::Target),
            ("a".into(), ColumnRole::Numeric),
            ("load".into(), ColumnRole::Label),
        ],
        SchemaConfig::default_null_markers(),
    )
    .unwrap()
}

fn cell() -> impl Strategy<Value = String> {
    prop_oneof![
        3 => (-100i32..100).prop_map(|v| v.to_string()),
        1 => Just("?".to_string()),
        1 => Just(String::new()),
        1 => Just("NA".to_string()),
    ]
}

/// Two-pass Pearson written independently of the library.
fn pearson_oracle(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    sxy / (sxx.sqrt() * syy.sqrt())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn null_counts_match_brute_force(rows in prop::collection::vec(prop::collection::vec(cell(), 4), 0..40)) {
        let mut text = String::from("y,a,load,extra\n");
        for r in &rows {
            text.push_str(&r.join(","));
            text.push('\n');
        }
        let schema = small_schema();
        let table = dataset::parse_csv(text.as_bytes(), &schema).unwrap();
        let report = dataset::detect_nulls(&table);
        prop_assert_eq!(report.total_rows, rows.len());
        for (j, name) in ["y", "a", "load", "extra"].iter().enumerate() {
            let brute = rows.iter().filter(|r| r[j].is_empty() || r[j] == "?").count();
            prop_assert_eq!(report.count(name), Some(brute));
            prop_assert!(brute <= rows.len());
        }
    }

    #[test]
    fn encoding_is_deterministic_and_split_conserves(rows in 1usize..300, seed in any::<u64>(), frac in 0.05f64..0.95) {
        let schema = SchemaConfig::default();
        let text = steel_like_csv(rows, seed);
        let t1 = dataset::parse_csv(text.as_bytes(), &schema).unwrap();
        let t2 = dataset::parse_csv(text.as_bytes(), &schema).unwrap();
        let d1 = dataset::encode_features(&t1, &schema).unwrap();
        let d2 = dataset::encode_features(&t2, &schema).unwrap();
        prop_assert_eq!(d1.x().as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                        d2.x().as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>());
        prop_assert_eq!(d1.labels(), d2.labels());
        prop_assert_eq!(d1.nrows(), rows);

        // the seven day indicators sum to exactly one per row
        let days: Vec<usize> = dataset::DAY_COLUMNS.iter().map(|d| d1.feature_index(d).unwrap()).collect();
        for i in 0..d1.nrows() {
            prop_assert_eq!(days.iter().map(|&j| d1.x()[(i, j)]).sum::<f64>(), 1.0);
        }

        let test_n = (rows as f64 * frac).round() as usize;
        match dataset::split_indices(rows, frac, seed) {
            Ok((train, test)) => {
                prop_assert_eq!(test.len(), test_n);
                let mut all: Vec<usize> = train.iter().chain(&test).copied().collect();
                all.sort_unstable();
                prop_assert_eq!(all, (0..rows).collect::<Vec<_>>());
                let (tr, te) = dataset::split(&d1, frac, seed).unwrap();
                for (k, &i) in test.iter().enumerate() {
                    prop_assert_eq!(te.x().row(k), d1.x().row(i));
                    prop_assert_eq!(te.y()[k], d1.y()[i]);
                }
                prop_assert_eq!(tr.nrows() + te.nrows(), rows);
            }
            Err(_) => prop_assert!(test_n == 0 || test_n == rows),
        }
    }

    #[test]
    fn pearson_matches_two_pass_oracle(
        (x, y) in (2usize..1000).prop_flat_map(|n| (
            prop::collection::vec(-1e3f64..1e3, n),
            prop::collection::vec(-1e3f64..1e3, n),
        ))
    ) {
        let r = pearson(&x, &y).unwrap();
        let o = pearson_oracle(&x, &y);
        prop_assert!((r - o).abs() <= 1e-12, "{r} vs {o}");
        prop_assert!((-1.0..=1.0).contains(&r));
    }

    #[test]
    fn correlation_matrix_permutes_with_columns(
        cols in prop::collection::vec(prop::collection::vec(-10.0f64..10.0, 30), 2..6),
        seed in any::<u64>(),
    ) {
        let m = cols.len();
        let names: Vec<String> = (0..m).map(|i| format!("c{i}")).collect();
        let base = correlation_of_columns(names.clone(), &cols);
        let mut perm: Vec<usize> = (0..m).collect();
        use rand::seq::SliceRandom;
        perm.shuffle(&mut common::rng(seed));
        let pcols: Vec<Vec<f64>> = perm.iter().map(|&i| cols[i].clone()).collect();
        let pnames: Vec<String> = perm.iter().map(|&i| names[i].clone()).collect();
        let permuted = correlation_of_columns(pnames, &pcols);
        for a in &names {
            for b in &names {
                prop_assert_eq!(base.get(a, b), permuted.get(a, b));
            }
            prop_assert_eq!(base.get(a, a), Some(1.0));
        }
        for i in 0..m {
            for j in 0..m {
                prop_assert_eq!(base.values[i][j], base.values[j][i]);
            }
        }
    }

    #[test]
    fn histogram_conserves_and_scales(
        values in prop::collection::vec(-1e3f64..1e3, 1..500),
        bins in 1usize..50,
        exp in -4i32..5,
        c in 0.01f64..100.0,
    ) {
        let h = histogram("v", &values, bins).unwrap();
        prop_assert_eq!(h.counts.iter().sum::<usize>(), values.len());
        prop_assert!(h.edges.windows(2).all(|w| w[0] < w[1]));

        // power-of-two scaling is exact in floating point
        let p2 = 2f64.powi(exp);
        let scaled: Vec<f64> = values.iter().map(|v| v * p2).collect();
        let hs = histogram("v", &scaled, bins).unwrap();
        prop_assert_eq!(&hs.counts, &h.counts);
        if h.edges.len() > 2 || h.counts.len() > 1 {
            for (a, b) in h.edges.iter().zip(&hs.edges) {
                prop_assert_eq!(a * p2, *b);
            }
        }

        // general c: edges scale up to rounding
        let scaled: Vec<f64> = values.iter().map(|v| v * c).collect();
        let hc = histogram("v", &scaled, bins).unwrap();
        if h.counts.len() > 1 {
            for (a, b) in h.edges.iter().zip(&hc.edges) {
                prop_assert!((a * c - b).abs() <= 1e-9 * (a * c).abs().max(1.0));
            }
        }
    }

    #[test]
    fn standardizer_properties(
        xs in prop::collection::vec(-50.0f64..50.0, 40 * 3),
        a in 0.1f64..10.0,
        b in -20.0f64..20.0,
    ) {
        let x = Matrix::from_row_major(40, 3, xs.clone()).unwrap();
        let params = StandardizationParams::fit(&x).unwrap();
        let z = params.transform(&x).unwrap();
        for j in 0..3 {
            let col = z.column(j);
            let mean = col.iter().sum::<f64>() / 40.0;
            let sd = (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 40.0).sqrt();
            prop_assert!(mean.abs() < 1e-10);
            prop_assert!((sd - 1.0).abs() < 1e-10);
        }
        // refit on the output is (nearly) the identity
        let again = StandardizationParams::fit(&z).unwrap().transform(&z).unwrap();
        for (u, v) in z.as_slice().iter().zip(again.as_slice()) {
            prop_assert!((u - v).abs() < 1e-10);
        }
        // z-scores ignore a positive affine change of units
        let moved = Matrix::from_row_major(40, 3, xs.iter().map(|v| a * v + b).collect()).unwrap();
        let zm = StandardizationParams::fit(&moved).unwrap().transform(&moved).unwrap();
        for (u, v) in z.as_slice().iter().zip(zm.as_slice()) {
            prop_assert!((u - v).abs() < 1e-9);
        }
    }
}

#[test]
fn constant_and_small_histograms() {
    let h = histogram("c", &[3.0; 5], 7).unwrap();
    assert_eq!(h.counts, vec![5]);
    assert_eq!(h.edges, vec![3.0, 4.0]);
    let h = histogram("x", &[0.0, 1.0, 2.0, 3.0], 2).unwrap();
    assert_eq!(h.counts, vec![2, 2]);
    assert!(eda::histogram("x", &[], 3).is_err());
}

#[test]
fn correlation_sign_identities() {
    let x: Vec<f64> = (0..20).map(|i| (i * i) as f64).collect();
    let neg: Vec<f64> = x.iter().map(|v| -v).collect();
    assert!((pearson(&x, &x).unwrap() - 1.0).abs() < 1e-15);
    assert!((pearson(&x, &neg).unwrap() + 1.0).abs() < 1e-15);
}
