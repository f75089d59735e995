//! Odometer enumeration of integer boxes.

use alloc::vec::Vec;

/// Calls `f` on every `x` with `lo[i] <= x[i] <= hi[i]`, last coordinate
/// fastest. Does nothing if any range is empty.
pub fn for_each_in_box<F: FnMut(&[i64])>(lo: &[i64], hi: &[i64], mut f: F) {
    assert_eq!(lo.len(), hi.len());
    if lo.iter().zip(hi).any(|(a, b)| a > b) {
        return;
    }
    let n = lo.len();
    let mut x: Vec<i64> = lo.to_vec();
    loop {
        f(&x);
        let mut i = n;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if x[i] < hi[i] {
                x[i] += 1;
                break;
            }
            x[i] = lo[i];
        }
    }
}

/// `[-radius, radius]^n`.
pub fn for_each_in_cube<F: FnMut(&[i64])>(n: usize, radius: i64, f: F) {
    let lo = alloc::vec![-radius; n];
    let hi = alloc::vec![radius; n];
    for_each_in_box(&lo, &hi, f)
}

/// Number of points of `[lo, hi]` as a `u128`.
pub fn box_size(lo: &[i64], hi: &[i64]) -> u128 {
    lo.iter()
        .zip(hi)
        .map(|(a, b)| if b < a { 0 } else { (b - a) as u128 + 1 })
        .fold(1u128, |acc, k| acc.saturating_mul(k))
}

/// Every residue vector of `(Z/mZ)^n`, last coordinate fastest.
pub fn for_each_residue<F: FnMut(&[u64])>(n: usize, m: u64, mut f: F) {
    let mut x = alloc::vec![0u64; n];
    if m == 0 {
        return;
    }
    loop {
        f(&x);
        let mut i = n;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if x[i] + 1 < m {
                x[i] += 1;
                break;
            }
            x[i] = 0;
        }
    }
}
