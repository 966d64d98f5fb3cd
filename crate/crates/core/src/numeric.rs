//! Deterministic floating-point reductions.
//!
//! Every sum that feeds a reproducibility contract (standardization stats,
//! Gram matrices, energy labels) goes through a fixed pairwise tree: the
//! split points depend only on the input length, so sequential and parallel
//! callers produce bit-identical results and the accumulated rounding error
//! stays O(log n) instead of O(n).

const LEAF: usize = 32;

/// Pairwise (cascade) sum of a slice.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= LEAF {
        let mut acc = 0.0;
        for &x in xs {
            acc += x;
        }
        acc
    } else {
        let mid = xs.len() / 2;
        pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
    }
}

/// Pairwise dot product of two equal-length slices.
pub fn pairwise_dot(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "dot product of mismatched lengths");
    if a.len() <= LEAF {
        let mut acc = 0.0;
        for (&x, &y) in a.iter().zip(b) {
            acc += x * y;
        }
        acc
    } else {
        let mid = a.len() / 2;
        pairwise_dot(&a[..mid], &b[..mid]) + pairwise_dot(&a[mid..], &b[mid..])
    }
}

/// Pairwise-tree sum of `count` vectors produced by `leaf(i)`.
///
/// The merge tree is fixed by `count` alone. Returns the zero-length vector
/// when `count` is 0.
pub fn tree_sum_by<F>(count: usize, leaf: &F) -> Vec<f64>
where
    F: Fn(usize) -> Vec<f64>,
{
    fn go<F: Fn(usize) -> Vec<f64>>(lo: usize, hi: usize, leaf: &F) -> Vec<f64> {
        if hi - lo == 1 {
            return leaf(lo);
        }
        let mid = lo + (hi - lo) / 2;
        let mut left = go(lo, mid, leaf);
        let right = go(mid, hi, leaf);
        for (l, r) in left.iter_mut().zip(&right) {
            *l += r;
        }
        left
    }
    if count == 0 {
        return Vec::new();
    }
    go(0, count, leaf)
}

/// Σ_i weights[i] · rows[i], accumulated over the same fixed tree.
pub fn tree_weighted_row_sum(rows: &[&[f64]], weights: &[f64]) -> Vec<f64> {
    assert_eq!(rows.len(), weights.len());
    tree_sum_by(rows.len(), &|i| {
        rows[i].iter().map(|&x| x * weights[i]).collect()
    })
}

pub fn norm(xs: &[f64]) -> f64 {
    pairwise_dot(xs, xs).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive_on_small_input() {
        let xs: Vec<f64> = (0..7).map(|i| i as f64 * 0.1).collect();
        let naive: f64 = xs.iter().sum();
        assert!((pairwise_sum(&xs) - naive).abs() < 1e-15);
    }

    #[test]
    fn tree_split_is_length_deterministic() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 1e-3).collect();
        assert_eq!(pairwise_sum(&xs).to_bits(), pairwise_sum(&xs).to_bits());
        let a = tree_sum_by(10, &|i| vec![xs[i]; 4]);
        let b = tree_sum_by(10, &|i| vec![xs[i]; 4]);
        assert_eq!(a, b);
    }

    #[test]
    fn weighted_row_sum_matches_manual() {
        let r0 = [1.0, 2.0];
        let r1 = [3.0, 4.0];
        let out = tree_weighted_row_sum(&[&r0, &r1], &[2.0, -1.0]);
        assert_eq!(out, vec![-1.0, 0.0]);
    }
}
