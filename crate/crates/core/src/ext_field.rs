//! Small extensions `F_{p^k}`, `k <= 3`, used to count points of varieties
//! over several fields at once.

use alloc::vec::Vec;

use crate::budget::{pow_count, Budget};
use crate::error::{invalid, Result};
use crate::field::PrimeField;

/// Common interface for the prime field and its small extensions, enough to
/// evaluate polynomials and enumerate every element.
pub trait FiniteField {
    type Elem: Copy + Eq + core::fmt::Debug;

    fn characteristic(&self) -> u64;
    /// Number of elements.
    fn order(&self) -> u64;
    fn zero(&self) -> Self::Elem;
    fn embed(&self, c: u64) -> Self::Elem;
    fn add(&self, a: Self::Elem, b: Self::Elem) -> Self::Elem;
    fn mul(&self, a: Self::Elem, b: Self::Elem) -> Self::Elem;
    /// The `index`-th element, `0 <= index < order()`, `0` mapping to zero.
    fn element(&self, index: u64) -> Self::Elem;

    fn is_zero(&self, a: Self::Elem) -> bool {
        a == self.zero()
    }
}

impl FiniteField for PrimeField {
    type Elem = u64;

    fn characteristic(&self) -> u64 {
        self.modulus()
    }
    fn order(&self) -> u64 {
        self.modulus()
    }
    fn zero(&self) -> u64 {
        0
    }
    fn embed(&self, c: u64) -> u64 {
        c % self.modulus()
    }
    #[inline]
    fn add(&self, a: u64, b: u64) -> u64 {
        PrimeField::add(self, a, b)
    }
    #[inline]
    fn mul(&self, a: u64, b: u64) -> u64 {
        PrimeField::mul(self, a, b)
    }
    fn element(&self, index: u64) -> u64 {
        index
    }
}

/// Element of `F_{p^k}` as coefficients `c0 + c1 t + c2 t^2` of the residue
/// class of `t` modulo the defining polynomial. Unused slots are zero.
pub type ExtElem = [u64; 3];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtField {
    base: PrimeField,
    k: u32,
    /// Monic modulus, coefficients low to high, length `k + 1`.
    modulus: Vec<u64>,
}

impl ExtField {
    /// `F_{p^k}` defined by the smallest monic irreducible of degree `k`,
    /// ordering candidates by `c0 + c1 p + ... + c_{k-1} p^{k-1}`.
    /// `cap` bounds `p^k`.
    pub fn build(p: u64, k: u32, cap: u64) -> Result<Self> {
        let base = PrimeField::new(p)?;
        if !(1..=3).contains(&k) {
            return Err(invalid(alloc::format!("extension degree {k} not in 1..=3")));
        }
        Budget::uniform(cap).check_scan("extension field", pow_count(p as u128, k))?;
        let modulus = if k == 1 {
            alloc::vec![0, 1]
        } else {
            let count = p.pow(k);
            (0..count)
                .map(|m| {
                    let mut c = Vec::with_capacity(k as usize + 1);
                    let mut rest = m;
                    for _ in 0..k {
                        c.push(rest % p);
                        rest /= p;
                    }
                    c.push(1);
                    c
                })
                .find(|c| !has_root(&base, c))
                .expect("an irreducible polynomial of degree <= 3 exists")
        };
        Ok(ExtField { base, k, modulus })
    }

    pub fn base(&self) -> PrimeField {
        self.base
    }

    pub fn degree(&self) -> u32 {
        self.k
    }

    pub fn modulus_poly(&self) -> &[u64] {
        &self.modulus
    }

    pub fn pow(&self, mut a: ExtElem, mut e: u64) -> ExtElem {
        let mut acc = self.embed(1);
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        acc
    }

    pub fn frobenius(&self, a: ExtElem) -> ExtElem {
        self.pow(a, self.base.modulus())
    }

    /// `true` when `a` lies in the prime subfield.
    pub fn is_base(&self, a: ExtElem) -> bool {
        a[1] == 0 && a[2] == 0
    }
}

/// For degree <= 3, irreducible is the same as having no root.
fn has_root(f: &PrimeField, c: &[u64]) -> bool {
    (0..f.modulus()).any(|x| {
        c.iter()
            .rev()
            .fold(0u64, |acc, &ci| f.add(f.mul(acc, x), ci))
            == 0
    })
}

impl FiniteField for ExtField {
    type Elem = ExtElem;

    fn characteristic(&self) -> u64 {
        self.base.modulus()
    }
    fn order(&self) -> u64 {
        self.base.modulus().pow(self.k)
    }
    fn zero(&self) -> ExtElem {
        [0; 3]
    }
    fn embed(&self, c: u64) -> ExtElem {
        [c % self.base.modulus(), 0, 0]
    }
    #[inline]
    fn add(&self, a: ExtElem, b: ExtElem) -> ExtElem {
        let f = &self.base;
        [f.add(a[0], b[0]), f.add(a[1], b[1]), f.add(a[2], b[2])]
    }
    fn mul(&self, a: ExtElem, b: ExtElem) -> ExtElem {
        let f = &self.base;
        let k = self.k as usize;
        let mut prod = [0u64; 5];
        for i in 0..k {
            if a[i] == 0 {
                continue;
            }
            for j in 0..k {
                prod[i + j] = f.add(prod[i + j], f.mul(a[i], b[j]));
            }
        }
        // t^k = -(m_0 + ... + m_{k-1} t^{k-1})
        for top in (k..2 * k - 1).rev() {
            let c = prod[top];
            if c == 0 {
                continue;
            }
            prod[top] = 0;
            for (i, &m) in self.modulus[..k].iter().enumerate() {
                let idx = top - k + i;
                prod[idx] = f.sub(prod[idx], f.mul(c, m));
            }
        }
        [prod[0], prod[1], prod[2]]
    }
    fn element(&self, index: u64) -> ExtElem {
        let p = self.base.modulus();
        let mut out = [0u64; 3];
        let mut rest = index;
        for slot in out.iter_mut().take(self.k as usize) {
            *slot = rest % p;
            rest /= p;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CAP: u64 = 10_000_000;

    #[test]
    fn modulus_examples() {
        assert_eq!(ExtField::build(5, 1, CAP).unwrap().modulus_poly(), [0, 1]);
        assert_eq!(ExtField::build(2, 2, CAP).unwrap().modulus_poly(), [1, 1, 1]);
        assert_eq!(ExtField::build(3, 2, CAP).unwrap().modulus_poly(), [1, 0, 1]);
        // x^3 + x + 1 is the smallest irreducible cubic over F_2.
        assert_eq!(ExtField::build(2, 3, CAP).unwrap().modulus_poly(), [1, 1, 0, 1]);
    }

    #[test]
    fn budget_and_degree_errors() {
        assert!(matches!(
            ExtField::build(101, 3, 1000),
            Err(crate::Error::Budget { .. })
        ));
        assert!(ExtField::build(5, 4, CAP).is_err());
        assert!(ExtField::build(6, 2, CAP).is_err());
    }

    fn check_field(p: u64, k: u32) {
        let f = ExtField::build(p, k, CAP).unwrap();
        let q = f.order();
        let elems: Vec<ExtElem> = (0..q).map(|i| f.element(i)).collect();
        // Every nonzero element is a unit: x^(q-1) = 1.
        for &a in &elems[1..] {
            assert_eq!(f.pow(a, q - 1), f.embed(1), "p={p} k={k} a={a:?}");
        }
        // Frobenius is additive and multiplicative and fixes exactly F_p.
        let step = core::cmp::max(1, q / 40) as usize;
        for &a in elems.iter().step_by(step) {
            for &b in elems.iter().step_by(step) {
                assert_eq!(
                    f.frobenius(f.add(a, b)),
                    f.add(f.frobenius(a), f.frobenius(b))
                );
                assert_eq!(
                    f.frobenius(f.mul(a, b)),
                    f.mul(f.frobenius(a), f.frobenius(b))
                );
                for &c in elems.iter().step_by(step * 3) {
                    assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                }
            }
        }
        let fixed = elems.iter().filter(|&&a| f.frobenius(a) == a).count();
        assert_eq!(fixed as u64, p);
        for &a in &elems {
            assert_eq!(f.frobenius(a) == a, f.is_base(a));
        }
        // Frobenius is a bijection.
        let mut images: Vec<ExtElem> = elems.iter().map(|&a| f.frobenius(a)).collect();
        images.sort();
        images.dedup();
        assert_eq!(images.len() as u64, q);
    }

    #[test]
    fn extension_arithmetic() {
        for (p, k) in [(2, 2), (2, 3), (3, 2), (3, 3), (5, 2), (5, 3), (7, 2), (11, 2), (13, 3), (97, 2)] {
            check_field(p, k);
        }
    }
}
