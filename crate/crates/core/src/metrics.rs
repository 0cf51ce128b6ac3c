//! Partition agreement.

use std::collections::HashMap;

/// Adjusted Rand index between two labellings of the same points.
///
/// Returns 1.0 for identical partitions (including the degenerate case
/// where both put every point in one cluster, or every point alone).
///
/// # Panics
/// If the labellings have different lengths.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> f64 {
    assert_eq!(a.len(), b.len(), "labellings must cover the same points");
    let n = a.len() as f64;
    let pairs = |x: f64| x * (x - 1.0) / 2.0;

    let mut table: HashMap<(usize, usize), usize> = HashMap::new();
    let mut rows: HashMap<usize, usize> = HashMap::new();
    let mut cols: HashMap<usize, usize> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *table.entry((x, y)).or_default() += 1;
        *rows.entry(x).or_default() += 1;
        *cols.entry(y).or_default() += 1;
    }
    let index: f64 = table.values().map(|&c| pairs(c as f64)).sum();
    let sum_rows: f64 = rows.values().map(|&c| pairs(c as f64)).sum();
    let sum_cols: f64 = cols.values().map(|&c| pairs(c as f64)).sum();
    let expected = sum_rows * sum_cols / pairs(n);
    let max = 0.5 * (sum_rows + sum_cols);
    if max == expected {
        return 1.0;
    }
    (index - expected) / (max - expected)
}
