//! The prime field `F_p`, primitive roots and discrete logarithms.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;

use crate::arith::{self, mul_mod, pow_mod};
use crate::error::{invalid, Result};

/// `F_p` with elements held canonically in `[0, p)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PrimeField {
    p: u64,
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self> {
        if !arith::is_prime(p) {
            return Err(invalid(alloc::format!("{p} is not prime")));
        }
        Ok(PrimeField { p })
    }

    #[inline]
    pub fn modulus(&self) -> u64 {
        self.p
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            self.p - (b - a)
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        mul_mod(a, b, self.p)
    }

    pub fn pow(&self, a: u64, e: u64) -> u64 {
        pow_mod(a, e, self.p)
    }

    /// Inverse of a nonzero element.
    pub fn inv(&self, a: u64) -> Option<u64> {
        if a.is_multiple_of(self.p) {
            None
        } else {
            Some(self.pow(a, self.p - 2))
        }
    }

    pub fn from_i64(&self, x: i64) -> u64 {
        arith::rem_i128(x as i128, self.p)
    }

    pub fn from_big(&self, x: &BigInt) -> u64 {
        arith::rem_big(x, self.p)
    }
}

/// Smallest positive primitive root modulo `p` (1 for `p = 2`).
pub fn primitive_root(p: u64) -> Result<u64> {
    if !arith::is_prime(p) {
        return Err(invalid(alloc::format!("{p} is not prime")));
    }
    if p == 2 {
        return Ok(1);
    }
    let cofactors: Vec<u64> = arith::distinct_prime_factors(p - 1)
        .into_iter()
        .map(|l| (p - 1) / l)
        .collect();
    (2..p)
        .find(|&g| cofactors.iter().all(|&e| pow_mod(g, e, p) != 1))
        .ok_or_else(|| invalid("no primitive root found"))
}

/// Moduli below this get a full discrete-log table.
pub const DLOG_TABLE_LIMIT: u64 = 1 << 20;

/// Discrete logarithms to a fixed base `g` of `F_p^*`.
#[derive(Debug, Clone)]
pub enum DiscreteLog {
    /// `table[n] = k` with `g^k = n`; `table[0]` is unused.
    Table { p: u64, table: Vec<u32> },
    /// Baby-step giant-step with `m = ceil(sqrt(p-1))` baby steps.
    Bsgs {
        p: u64,
        m: u64,
        baby: BTreeMap<u64, u64>,
        giant: u64,
    },
}

impl DiscreteLog {
    pub fn new(p: u64, g: u64) -> Self {
        if p < DLOG_TABLE_LIMIT {
            let mut table = vec![0u32; p as usize];
            let mut x = 1u64;
            for k in 0..p - 1 {
                table[x as usize] = k as u32;
                x = mul_mod(x, g, p);
            }
            DiscreteLog::Table { p, table }
        } else {
            let order = p - 1;
            let mut m = libm::ceil(libm::sqrt(order as f64)) as u64;
            while m * m < order {
                m += 1;
            }
            let mut baby = BTreeMap::new();
            let mut x = 1u64;
            for j in 0..m {
                baby.entry(x).or_insert(j);
                x = mul_mod(x, g, p);
            }
            // g^{-m}
            let giant = pow_mod(pow_mod(g, p - 2, p), m, p);
            DiscreteLog::Bsgs { p, m, baby, giant }
        }
    }

    /// `k` in `[0, p-1)` with `g^k = n`, or `None` when `p | n`.
    pub fn log(&self, n: u64) -> Option<u64> {
        match self {
            DiscreteLog::Table { p, table } => {
                let n = n % p;
                (n != 0).then(|| table[n as usize] as u64)
            }
            DiscreteLog::Bsgs { p, m, baby, giant } => {
                let mut gamma = n % p;
                if gamma == 0 {
                    return None;
                }
                for i in 0..*m {
                    if let Some(j) = baby.get(&gamma) {
                        return Some((i * m + j) % (p - 1));
                    }
                    gamma = mul_mod(gamma, *giant, *p);
                }
                None
            }
        }
    }
}
