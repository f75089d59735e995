//! Integer helpers: modular arithmetic on `u64`, primality, factoring of
//! small integers, distinct prime divisors and exact integer roots.

use alloc::vec::Vec;
use num_bigint::{BigInt, Sign};
use num_integer::{Integer, Roots};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{invalid, Result};

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

pub fn gcd_u64(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

/// Reduce a signed integer into `[0, m)`.
#[inline]
pub fn rem_i128(x: i128, m: u64) -> u64 {
    x.rem_euclid(m as i128) as u64
}

pub fn rem_big(x: &BigInt, m: u64) -> u64 {
    let r = x.mod_floor(&BigInt::from(m));
    r.to_u64().expect("remainder fits in u64")
}

/// Deterministic Miller-Rabin for all `u64`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Distinct prime factors of `n > 0`, ascending, by trial division.
pub fn distinct_prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// `ν(|n|)`, the number of distinct primes dividing `n`.
pub fn nu_distinct_prime_divisors(n: &BigInt) -> Result<u32> {
    if n.is_zero() {
        return Err(invalid("nu is undefined at 0"));
    }
    let m = n.abs();
    if let Some(small) = m.to_u64() {
        return Ok(nu_u64(small));
    }
    // Wide values: plain trial division.
    let mut m = m;
    let mut count = 0;
    let mut d = BigInt::from(2u32);
    while &d * &d <= m {
        if let Some(small) = m.to_u64() {
            return Ok(count + nu_u64(small));
        }
        if m.is_multiple_of(&d) {
            count += 1;
            while m.is_multiple_of(&d) {
                m /= &d;
            }
        }
        d += 1u32;
    }
    if !m.is_one() {
        count += 1;
    }
    Ok(count)
}

/// Trial division up to the cube root; whatever remains has at most two
/// prime factors and is classified directly.
fn nu_u64(mut n: u64) -> u32 {
    let mut count = 0;
    let mut d = 2u64;
    while d.saturating_mul(d).saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            count += 1;
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n == 1 {
        count
    } else if is_prime(n) {
        count + 1
    } else {
        let s = n.sqrt();
        if s * s == n {
            count + 1
        } else {
            count + 2
        }
    }
}

/// Number of integers `y` with `y^r = v`.
pub fn rth_root_multiplicity_i128(v: i128, r: u32) -> u32 {
    if v == 0 {
        return 1;
    }
    let even = r.is_multiple_of(2);
    if v < 0 && even {
        return 0;
    }
    let a = v.unsigned_abs();
    if exact_root_u128(a, r).is_some() {
        if even && v > 0 {
            2
        } else {
            1
        }
    } else {
        0
    }
}

pub fn rth_root_multiplicity_big(v: &BigInt, r: u32) -> u32 {
    if let Some(small) = v.to_i128() {
        return rth_root_multiplicity_i128(small, r);
    }
    let even = r.is_multiple_of(2);
    if v.sign() == Sign::Minus && even {
        return 0;
    }
    let a = v.abs();
    let root = a.nth_root(r);
    if num_traits::pow(root, r as usize) == a {
        if even {
            2
        } else {
            1
        }
    } else {
        0
    }
}

/// `Some(y)` with `y^r = a`, if `a` is a perfect `r`-th power.
pub fn exact_root_u128(a: u128, r: u32) -> Option<u128> {
    if a < 2 || r == 1 {
        return Some(a);
    }
    let y = a.nth_root(r);
    match y.checked_pow(r) {
        Some(v) if v == a => Some(y),
        _ => None,
    }
}

/// Primes in `(lo, hi]` congruent to 1 modulo `r`, ascending.
pub fn primes_one_mod_r(lo: u64, hi: u64, r: u64) -> Vec<u64> {
    if hi <= lo || r == 0 {
        return Vec::new();
    }
    let start = lo + 1;
    let len = (hi - lo) as usize;
    let mut composite = alloc::vec![false; len];
    let mut d = 2u64;
    while d * d <= hi {
        let first = core::cmp::max(d * d, start.div_ceil(d) * d);
        let mut m = first;
        while m <= hi {
            composite[(m - start) as usize] = true;
            m += d;
        }
        d += 1;
    }
    (start..=hi)
        .filter(|&p| p >= 2 && !composite[(p - start) as usize] && p % r == 1 % r)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eratosthenes(n: usize) -> Vec<u64> {
        let mut is = alloc::vec![true; n + 1];
        is[0] = false;
        if n >= 1 {
            is[1] = false;
        }
        let mut i = 2;
        while i * i <= n {
            if is[i] {
                let mut j = i * i;
                while j <= n {
                    is[j] = false;
                    j += i;
                }
            }
            i += 1;
        }
        (0..=n as u64).filter(|&k| is[k as usize]).collect()
    }

    #[test]
    fn primality_agrees_with_sieve() {
        let primes = eratosthenes(20_000);
        for n in 0..=20_000u64 {
            assert_eq!(is_prime(n), primes.binary_search(&n).is_ok(), "n={n}");
        }
        assert!(is_prime(18_446_744_073_709_551_557));
        assert!(!is_prime(3_215_031_751));
    }

    #[test]
    fn primes_one_mod_r_examples() {
        let oracle: Vec<u64> = eratosthenes(50)
            .into_iter()
            .filter(|&p| p > 22 && p <= 43 && p % 2 == 1)
            .collect();
        assert_eq!(primes_one_mod_r(22, 43, 2), oracle);
        assert_eq!(primes_one_mod_r(22, 43, 2), [23, 29, 31, 37, 41, 43]);
        assert_eq!(primes_one_mod_r(2, 3, 2), [3]);
        assert_eq!(primes_one_mod_r(2, 12, 3), [7]);
        assert!(primes_one_mod_r(24, 28, 2).is_empty());
    }

    #[test]
    fn nu_examples() {
        assert_eq!(nu_distinct_prime_divisors(&BigInt::from(12)).unwrap(), 2);
        assert_eq!(nu_distinct_prime_divisors(&BigInt::from(1)).unwrap(), 0);
        assert_eq!(nu_distinct_prime_divisors(&BigInt::from(30)).unwrap(), 3);
        assert_eq!(nu_distinct_prime_divisors(&BigInt::from(-30)).unwrap(), 3);
        assert!(nu_distinct_prime_divisors(&BigInt::zero()).is_err());
        // p^2, p*q and prime remainders past the cube-root cut.
        assert_eq!(nu_u64(2 * 1_000_003 * 1_000_003), 2);
        assert_eq!(nu_u64(1_000_003 * 1_000_033), 2);
        assert_eq!(nu_u64(4 * 1_000_003), 2);
        for n in 1..5000u64 {
            assert_eq!(nu_u64(n) as usize, distinct_prime_factors(n).len());
        }
        let wide: BigInt = BigInt::from(u64::MAX) * 6u32;
        assert_eq!(
            nu_distinct_prime_divisors(&wide).unwrap(),
            2 + distinct_prime_factors(u64::MAX).len() as u32 - 1
        );
    }

    #[test]
    fn root_multiplicities() {
        assert_eq!(rth_root_multiplicity_i128(0, 2), 1);
        assert_eq!(rth_root_multiplicity_i128(4, 2), 2);
        assert_eq!(rth_root_multiplicity_i128(5, 2), 0);
        assert_eq!(rth_root_multiplicity_i128(-4, 2), 0);
        assert_eq!(rth_root_multiplicity_i128(-8, 3), 1);
        assert_eq!(rth_root_multiplicity_i128(27, 3), 1);
        let big = num_traits::pow(BigInt::from(10u64.pow(15) + 7), 3);
        assert_eq!(rth_root_multiplicity_big(&big, 3), 1);
        assert_eq!(rth_root_multiplicity_big(&(big + 1u32), 3), 0);
    }
}
