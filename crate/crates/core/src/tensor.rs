//! Dense row-major complex tensors and the axis contractions shared by
//! series evaluation and quadrature read-outs.
//!
//! All reductions here run in a fixed order, so results are bit-reproducible
//! run to run.

use num_complex::Complex64;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Deterministic pairwise summation. Better roundoff growth than a running
/// sum for the long node reductions in quadrature.
pub fn pairwise_sum(values: &[Complex64]) -> Complex64 {
    const BASE: usize = 32;
    if values.len() <= BASE {
        let mut acc = ZERO;
        for v in values {
            acc += v;
        }
        return acc;
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Powers `base^0 ..= base^max_degree` by repeated multiplication.
pub fn power_column(base: Complex64, max_degree: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(max_degree + 1);
    let mut acc = ONE;
    for _ in 0..=max_degree {
        out.push(acc);
        acc *= base;
    }
    out
}

/// For each node, its powers up to `max_degree`: `table[k][d] = nodes[k]^d`.
pub fn power_table(nodes: &[Complex64], max_degree: usize) -> Vec<Vec<Complex64>> {
    nodes.iter().map(|&z| power_column(z, max_degree)).collect()
}

/// Transposed layout: `rows[d][k] = nodes[k]^d`.
pub fn power_rows(nodes: &[Complex64], max_degree: usize) -> Vec<Vec<Complex64>> {
    let mut rows = vec![vec![ZERO; nodes.len()]; max_degree + 1];
    for (k, &z) in nodes.iter().enumerate() {
        let mut acc = ONE;
        for row in rows.iter_mut() {
            row[k] = acc;
            acc *= z;
        }
    }
    rows
}

/// Contracts the leading axis of a row-major tensor against a weight table
/// and appends the new index as the trailing axis.
///
/// `tensor` has shape `(lead, rest)` flattened; `weights[m][a]` pairs new
/// index `m` with old leading index `a`. The result has shape `(rest, M)`:
/// `out[r, m] = sum_a tensor[a, r] * weights[m][a]`.
///
/// Applying this once per axis of an n-axis tensor cycles the axes so they
/// come back in their original order with each axis re-indexed.
pub fn contract_leading_to_back(
    tensor: &[Complex64],
    lead: usize,
    weights: &[Vec<Complex64>],
) -> Vec<Complex64> {
    assert!(lead > 0 && tensor.len().is_multiple_of(lead));
    let rest = tensor.len() / lead;
    let m_len = weights.len();
    let mut out = vec![ZERO; rest * m_len];
    for (a, block) in tensor.chunks_exact(rest).enumerate() {
        for (m, w_row) in weights.iter().enumerate() {
            let w = w_row[a];
            if w == ZERO {
                continue;
            }
            for (r, &t) in block.iter().enumerate() {
                out[r * m_len + m] += w * t;
            }
        }
    }
    out
}

/// Row-major flat index of `idx` in a tensor of the given shape.
pub fn flat_index(shape: &[usize], idx: &[usize]) -> usize {
    debug_assert_eq!(shape.len(), idx.len());
    let mut flat = 0;
    for (s, i) in shape.iter().zip(idx) {
        debug_assert!(i < s);
        flat = flat * s + i;
    }
    flat
}

/// Inverse of [`flat_index`].
pub fn unflatten(shape: &[usize], mut flat: usize) -> Vec<usize> {
    let mut idx = vec![0; shape.len()];
    for j in (0..shape.len()).rev() {
        idx[j] = flat % shape[j];
        flat /= shape[j];
    }
    idx
}
