//! Compiled evaluators for hot loops.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;

use super::MultiPoly;
use crate::arith::{self, mul_mod};
use crate::ext_field::FiniteField;

/// A polynomial with coefficients reduced modulo `m` (any `m >= 1`).
#[derive(Debug, Clone)]
pub struct ModPoly {
    modulus: u64,
    nvars: usize,
    max_exp: Vec<u32>,
    terms: Vec<(u64, Vec<u32>)>,
}

impl ModPoly {
    pub fn new(poly: &MultiPoly, modulus: u64) -> Self {
        let terms: Vec<(u64, Vec<u32>)> = poly
            .terms()
            .map(|(m, c)| (arith::rem_big(c, modulus), m.0.clone()))
            .filter(|(c, _)| *c != 0)
            .collect();
        ModPoly {
            modulus,
            nvars: poly.nvars(),
            max_exp: poly.max_exponents(),
            terms,
        }
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// `true` when every coefficient vanishes modulo `m`.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Value at `x ∈ (Z/mZ)^n`, coordinates already reduced.
    pub fn eval(&self, x: &[u64]) -> u64 {
        let m = self.modulus;
        let mut powers: Vec<Vec<u64>> = Vec::with_capacity(self.nvars);
        for (i, &xi) in x.iter().enumerate() {
            let mut row = vec![1 % m; self.max_exp[i] as usize + 1];
            for k in 1..row.len() {
                row[k] = mul_mod(row[k - 1], xi, m);
            }
            powers.push(row);
        }
        let mut acc = 0u64;
        for (c, e) in &self.terms {
            let mut t = *c;
            for (i, &ei) in e.iter().enumerate() {
                if ei > 0 {
                    t = mul_mod(t, powers[i][ei as usize], m);
                }
            }
            acc = (acc + t) % m;
        }
        acc
    }

    /// Value over a finite field of characteristic `m`.
    pub fn eval_field<F: FiniteField>(&self, field: &F, x: &[F::Elem]) -> F::Elem {
        debug_assert_eq!(field.characteristic(), self.modulus);
        let mut powers: Vec<Vec<F::Elem>> = Vec::with_capacity(self.nvars);
        for (i, &xi) in x.iter().enumerate() {
            let mut row = vec![field.embed(1); self.max_exp[i] as usize + 1];
            for k in 1..row.len() {
                row[k] = field.mul(row[k - 1], xi);
            }
            powers.push(row);
        }
        let mut acc = field.zero();
        for (c, e) in &self.terms {
            let mut t = field.embed(*c);
            for (i, &ei) in e.iter().enumerate() {
                if ei > 0 {
                    t = field.mul(t, powers[i][ei as usize]);
                }
            }
            acc = field.add(acc, t);
        }
        acc
    }
}

/// Exact integer evaluation with an `i128` fast path; falls back to
/// arbitrary precision on overflow.
#[derive(Debug, Clone)]
pub struct IntEvaluator {
    poly: MultiPoly,
    small: Option<Vec<(i128, Vec<u32>)>>,
}

impl IntEvaluator {
    pub fn new(poly: &MultiPoly) -> Self {
        IntEvaluator {
            poly: poly.clone(),
            small: poly
                .to_i128_terms()
                .map(|ts| ts.into_iter().map(|(e, c)| (c, e)).collect()),
        }
    }

    pub fn poly(&self) -> &MultiPoly {
        &self.poly
    }

    /// `Some(f(x))` when every intermediate fits in `i128`.
    #[inline]
    pub fn eval_i128(&self, x: &[i64]) -> Option<i128> {
        let terms = self.small.as_ref()?;
        let mut acc: i128 = 0;
        for (c, e) in terms {
            let mut t = *c;
            for (&xi, &ei) in x.iter().zip(e) {
                for _ in 0..ei {
                    t = t.checked_mul(xi as i128)?;
                }
            }
            acc = acc.checked_add(t)?;
        }
        Some(acc)
    }

    pub fn eval(&self, x: &[i64]) -> BigInt {
        match self.eval_i128(x) {
            Some(v) => BigInt::from(v),
            None => self.poly.eval_i64(x).expect("dimension checked by caller"),
        }
    }

    /// `f(x) mod m` in `[0, m)`.
    pub fn eval_mod(&self, x: &[i64], m: u64) -> u64 {
        match self.eval_i128(x) {
            Some(v) => arith::rem_i128(v, m),
            None => arith::rem_big(&self.eval(x), m),
        }
    }
}
