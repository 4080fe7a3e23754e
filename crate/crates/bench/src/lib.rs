//! Fixtures shared by the benchmarks.

use steelpower::dataset::{encode_features, parse_csv, split, Dataset, SchemaConfig};
use steelpower::synthetic::steel_like_csv;

/// Encoded synthetic steel-like data, split 75/25 with seed 42.
pub fn fixture(rows: usize) -> (Dataset, Dataset) {
    let schema = SchemaConfig::default();
    let text = steel_like_csv(rows, 1);
    let table = parse_csv(text.as_bytes(), &schema).expect("synthetic csv parses");
    let data = encode_features(&table, &schema).expect("synthetic csv encodes");
    split(&data, 0.25, 42).expect("split")
}
