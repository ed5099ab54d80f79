//! Shared oracles for integration tests.
#![allow(dead_code)]

/// Centers of the 2^depth Cantor cells of generation `depth`, in order.
pub fn cantor_cell_midpoints(depth: u32) -> Vec<f64> {
    let w = 3f64.powi(-(depth as i32));
    (0..1u64 << depth)
        .map(|j| {
            let left: f64 = (0..depth)
                .map(|i| 2.0 * ((j >> (depth - 1 - i)) & 1) as f64 * 3f64.powi(-(i as i32) - 1))
                .sum();
            left + w / 2.0
        })
        .collect()
}

/// Optimal n-level quantization error of the uniform Cantor law, by dynamic
/// programming over contiguous groups of generation-`depth` cells. Exact when
/// optimal cells are unions of generation-`depth` cells.
pub fn cantor_vn_brute_force(n: usize, depth: u32) -> f64 {
    let xs = cantor_cell_midpoints(depth);
    let len = xs.len();
    let w = 1.0 / len as f64;
    // prefix sums for O(1) group cost
    let mut s1 = vec![0.0; len + 1];
    let mut s2 = vec![0.0; len + 1];
    for (i, x) in xs.iter().enumerate() {
        s1[i + 1] = s1[i] + x;
        s2[i + 1] = s2[i] + x * x;
    }
    let cost = |i: usize, j: usize| {
        let c = (j - i) as f64;
        let a = s1[j] - s1[i];
        w * ((s2[j] - s2[i]) - a * a / c)
    };
    let mut best = vec![f64::INFINITY; len + 1];
    best[0] = 0.0;
    for _ in 0..n {
        let mut next = vec![f64::INFINITY; len + 1];
        next[0] = 0.0;
        for j in 1..=len {
            next[j] = (0..j).map(|i| best[i] + cost(i, j)).fold(best[j], f64::min);
        }
        best = next;
    }
    // within-cell variance of a Cantor law scaled by 3^{-depth}
    best[len] + 3f64.powi(-2 * depth as i32) / 8.0
}

/// Unit vector e_1 in dimension d.
pub fn e1(d: usize) -> Vec<f64> {
    let mut v = vec![0.0; d];
    v[0] = 1.0;
    v
}
