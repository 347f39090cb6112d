//! Deterministic data-parallel reductions.
//!
//! The index range is cut into fixed-size chunks; each chunk is folded
//! sequentially and the chunk partials are combined by a balanced pairwise
//! tree. The tree depends on the range length only, so results are
//! bit-identical whatever the size of the rayon pool.

use rayon::prelude::*;

/// Number of terms folded sequentially before the pairwise tree takes over.
pub const CHUNK: usize = 256;

/// Reduces `0..n` into a single value with a fixed reduction tree.
pub fn tree_reduce<T, I, F, C>(n: usize, identity: I, fold: F, combine: C) -> T
where
    T: Send,
    I: Fn() -> T + Sync,
    F: Fn(&mut T, usize) + Sync,
    C: Fn(T, T) -> T + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    if chunks <= 1 {
        let mut acc = identity();
        for i in 0..n {
            fold(&mut acc, i);
        }
        return acc;
    }
    let partials: Vec<T> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = identity();
            for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
                fold(&mut acc, i);
            }
            acc
        })
        .collect();
    pairwise(partials, &combine)
}

fn pairwise<T, C: Fn(T, T) -> T>(mut items: Vec<T>, combine: &C) -> T {
    while items.len() > 1 {
        let mut next = Vec::with_capacity(items.len().div_ceil(2));
        let mut it = items.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(combine(a, b)),
                None => next.push(a),
            }
        }
        items = next;
    }
    items.pop().expect("pairwise reduction of an empty list")
}

/// Maximum of `f(i)` over `0..n` (`-inf` for an empty range).
pub fn tree_max<F: Fn(usize) -> f64 + Sync>(n: usize, f: F) -> f64 {
    tree_reduce(
        n,
        || f64::NEG_INFINITY,
        |acc, i| *acc = acc.max(f(i)),
        f64::max,
    )
}
