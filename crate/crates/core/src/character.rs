//! Power-residue characters and additive characters.
//!
//! For a prime `p ≡ 1 (mod r)` with smallest primitive root `g`, the
//! isomorphism `F_p^* → μ_{p-1}` is fixed as `g^k ↦ e(k/(p-1))`. The
//! character `χ_p(n) = θ(n^{(p-1)/r})` is then `e(k/r)` where `n = g^k`.

use alloc::sync::Arc;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use serde::Serialize;

use crate::arith;
use crate::error::{invalid, Result};
use crate::field::{primitive_root, DiscreteLog};
use crate::rootsum::unit_root;

/// An exact angle `num/den` of a full turn, reduced, `0 <= num < den`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Turn {
    pub num: u64,
    pub den: u64,
}

impl Turn {
    pub fn new(num: i128, den: u64) -> Self {
        assert!(den > 0);
        let n = num.rem_euclid(den as i128) as u64;
        let g = n.gcd(&den);
        Turn {
            num: n / g,
            den: den / g,
        }
    }

    pub fn zero() -> Self {
        Turn { num: 0, den: 1 }
    }

    pub fn to_complex(self) -> Complex64 {
        unit_root(self.num, self.den)
    }
}

impl core::ops::Add for Turn {
    type Output = Turn;

    fn add(self, other: Turn) -> Turn {
        let den = self.den.lcm(&other.den);
        let num = self.num as i128 * (den / self.den) as i128
            + other.num as i128 * (den / other.den) as i128;
        Turn::new(num, den)
    }
}

impl core::ops::Neg for Turn {
    type Output = Turn;

    fn neg(self) -> Turn {
        Turn::new(-(self.num as i128), self.den)
    }
}

/// The value of a multiplicative character: zero, or a root of unity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CharValue {
    Zero,
    Unit(Turn),
}

impl CharValue {
    pub fn to_complex(self) -> Complex64 {
        match self {
            CharValue::Zero => Complex64::new(0.0, 0.0),
            CharValue::Unit(t) => t.to_complex(),
        }
    }

    pub fn is_one(self) -> bool {
        matches!(self, CharValue::Unit(t) if t.num == 0)
    }
}

/// `e_p(t) = e(t/p)`, for any modulus `p >= 2`.
pub fn additive_char(p: u64, t: i128) -> Result<Turn> {
    if p < 2 {
        return Err(invalid("additive character needs modulus >= 2"));
    }
    Ok(Turn::new(t, p))
}

/// The `r`-th power residue character modulo a prime `p ≡ 1 (mod r)`.
#[derive(Debug, Clone)]
pub struct PowerCharacter {
    p: u64,
    r: u32,
    g: u64,
    dlog: DiscreteLog,
}

impl PowerCharacter {
    pub fn new(p: u64, r: u32) -> Result<Self> {
        if r < 2 {
            return Err(invalid("power index r must be at least 2"));
        }
        if !arith::is_prime(p) {
            return Err(invalid(alloc::format!("{p} is not prime")));
        }
        if p % r as u64 != 1 {
            return Err(invalid(alloc::format!("{p} is not 1 mod {r}")));
        }
        let g = primitive_root(p)?;
        Ok(PowerCharacter {
            p,
            r,
            g,
            dlog: DiscreteLog::new(p, g),
        })
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn generator(&self) -> u64 {
        self.g
    }

    /// `j` in `[0, r)` with `χ_p(n) = e(j/r)`, from a residue `n mod p`;
    /// `None` when `p | n`.
    #[inline]
    pub fn exponent_of_residue(&self, n: u64) -> Option<u32> {
        self.dlog.log(n).map(|k| (k % self.r as u64) as u32)
    }

    pub fn exponent(&self, n: i128) -> Option<u32> {
        self.exponent_of_residue(arith::rem_i128(n, self.p))
    }

    pub fn value(&self, n: i128) -> CharValue {
        match self.exponent(n) {
            None => CharValue::Zero,
            Some(j) => CharValue::Unit(Turn::new(j as i128, self.r as u64)),
        }
    }

    pub fn value_big(&self, n: &BigInt) -> CharValue {
        match self.exponent_of_residue(arith::rem_big(n, self.p)) {
            None => CharValue::Zero,
            Some(j) => CharValue::Unit(Turn::new(j as i128, self.r as u64)),
        }
    }
}

/// A product `Π χ_{p_i}^{k_i}` of power-residue characters sharing one `r`.
///
/// [`CompositeCharacter::new`] builds `χ_q` with distinct prime moduli and
/// every `k_i = 1`. [`CompositeCharacter::twisted`] admits arbitrary
/// exponents and repeated moduli, as in `χ_u · conj(χ_{u'})`.
#[derive(Debug, Clone)]
pub struct CompositeCharacter {
    r: u32,
    factors: Vec<(Arc<PowerCharacter>, u32)>,
}

impl CompositeCharacter {
    pub fn new(chars: Vec<Arc<PowerCharacter>>) -> Result<Self> {
        let mut moduli: Vec<u64> = chars.iter().map(|c| c.modulus()).collect();
        moduli.sort_unstable();
        if moduli.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid("composite character needs distinct prime moduli"));
        }
        Self::twisted(chars.into_iter().map(|c| (c, 1)).collect())
    }

    pub fn twisted(factors: Vec<(Arc<PowerCharacter>, i64)>) -> Result<Self> {
        if factors.is_empty() {
            return Err(invalid("composite character needs at least one factor"));
        }
        let r = factors[0].0.r();
        if factors.iter().any(|(c, _)| c.r() != r) {
            return Err(invalid("all factors must share the same r"));
        }
        Ok(CompositeCharacter {
            r,
            factors: factors
                .into_iter()
                .map(|(c, k)| (c, k.rem_euclid(r as i64) as u32))
                .collect(),
        })
    }

    /// The principal character modulo 1.
    pub fn trivial(r: u32) -> Self {
        CompositeCharacter {
            r,
            factors: Vec::new(),
        }
    }

    pub fn single(c: Arc<PowerCharacter>) -> Self {
        CompositeCharacter {
            r: c.r(),
            factors: alloc::vec![(c, 1)],
        }
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn factors(&self) -> &[(Arc<PowerCharacter>, u32)] {
        &self.factors
    }

    /// Product of the factor moduli, with repetition.
    pub fn modulus(&self) -> u64 {
        self.factors.iter().map(|(c, _)| c.modulus()).product()
    }

    /// Distinct primes dividing the modulus, ascending.
    pub fn primes(&self) -> Vec<u64> {
        let mut ps: Vec<u64> = self.factors.iter().map(|(c, _)| c.modulus()).collect();
        ps.sort_unstable();
        ps.dedup();
        ps
    }

    pub fn conj(&self) -> Self {
        CompositeCharacter {
            r: self.r,
            factors: self
                .factors
                .iter()
                .map(|(c, k)| (c.clone(), (self.r - k) % self.r))
                .collect(),
        }
    }

    /// Principal iff the exponents on each prime cancel modulo `r`.
    pub fn is_principal(&self) -> bool {
        self.primes().into_iter().all(|p| {
            self.factors
                .iter()
                .filter(|(c, _)| c.modulus() == p)
                .map(|(_, k)| *k)
                .sum::<u32>()
                % self.r
                == 0
        })
    }

    /// `j` in `[0, r)` with `χ(n) = e(j/r)`, or `None` if `gcd(n, q) > 1`.
    #[inline]
    pub fn exponent(&self, n: i128) -> Option<u32> {
        let mut j = 0u32;
        for (c, k) in &self.factors {
            j += c.exponent(n)? * k;
        }
        Some(j % self.r)
    }

    pub fn exponent_big(&self, n: &BigInt) -> Option<u32> {
        let mut j = 0u32;
        for (c, k) in &self.factors {
            j += c.exponent_of_residue(arith::rem_big(n, c.modulus()))? * k;
        }
        Some(j % self.r)
    }

    pub fn value(&self, n: i128) -> CharValue {
        match self.exponent(n) {
            None => CharValue::Zero,
            Some(j) => CharValue::Unit(Turn::new(j as i128, self.r as u64)),
        }
    }
}
