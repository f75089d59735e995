//! Sparse multivariate polynomials with arbitrary-precision integer
//! coefficients.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith;
use crate::error::{invalid, Result};
use crate::ext_field::FiniteField;

mod eval;
mod parse;

pub use eval::{IntEvaluator, ModPoly};

/// Exponent vector, ordered graded-lexicographically: total degree first,
/// then lexicographically with `x1` most significant.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiPoly {
    nvars: usize,
    terms: BTreeMap<Monomial, BigInt>,
}

impl MultiPoly {
    pub fn zero(nvars: usize) -> Self {
        MultiPoly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: impl Into<BigInt>) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(Monomial::one(nvars), c.into());
        p
    }

    /// The variable `x_{i+1}` (zero-based index `i`).
    pub fn var(nvars: usize, i: usize) -> Self {
        assert!(i < nvars);
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(Monomial(e), BigInt::one());
        p
    }

    pub fn from_terms<I, C>(nvars: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (Vec<u32>, C)>,
        C: Into<BigInt>,
    {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            assert_eq!(e.len(), nvars, "exponent vector length");
            p.add_term(Monomial(e), c.into());
        }
        p
    }

    pub fn parse(text: &str, nvars: usize) -> Result<Self> {
        parse::parse(text, nvars)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in increasing graded-lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &BigInt)> {
        self.terms.iter()
    }

    pub fn coeff(&self, e: &[u32]) -> BigInt {
        self.terms
            .get(&Monomial(e.to_vec()))
            .cloned()
            .unwrap_or_default()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().next_back().map(Monomial::degree)
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degs = self.terms.keys().map(Monomial::degree);
        match degs.next() {
            None => true,
            Some(d) => degs.all(|e| e == d),
        }
    }

    fn add_term(&mut self, e: Monomial, c: BigInt) {
        if c.is_zero() {
            return;
        }
        use alloc::collections::btree_map::Entry;
        match self.terms.entry(e) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// Sum of the terms of total degree exactly `d`.
    pub fn homogeneous_part(&self, d: u32) -> MultiPoly {
        MultiPoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() == d)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// The homogeneous part of top degree.
    pub fn leading_form(&self) -> Result<MultiPoly> {
        let d = self
            .degree()
            .ok_or_else(|| invalid("leading form of the zero polynomial"))?;
        Ok(self.homogeneous_part(d))
    }

    pub fn scale(&self, c: &BigInt) -> MultiPoly {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        MultiPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> MultiPoly {
        let mut acc = Self::constant(self.nvars, 1);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.nvars {
            Err(invalid(alloc::format!(
                "expected {} coordinates, got {len}",
                self.nvars
            )))
        } else {
            Ok(())
        }
    }

    /// Exact value at an integer point.
    pub fn eval_int(&self, x: &[BigInt]) -> Result<BigInt> {
        self.check_len(x.len())?;
        let mut acc = BigInt::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (xi, &e) in x.iter().zip(&m.0) {
                if e > 0 {
                    t *= num_traits::pow(xi.clone(), e as usize);
                }
            }
            acc += t;
        }
        Ok(acc)
    }

    pub fn eval_i64(&self, x: &[i64]) -> Result<BigInt> {
        let big: Vec<BigInt> = x.iter().map(|&v| BigInt::from(v)).collect();
        self.eval_int(&big)
    }

    /// Value at a point of `F^n`, coefficients reduced into the field.
    pub fn eval_mod<F: FiniteField>(&self, field: &F, x: &[F::Elem]) -> Result<F::Elem> {
        self.check_len(x.len())?;
        Ok(ModPoly::new(self, field.characteristic()).eval_field(field, x))
    }

    /// Formal partial derivative in `x_{i+1}`.
    pub fn partial(&self, i: usize) -> MultiPoly {
        let mut out = Self::zero(self.nvars);
        for (m, c) in &self.terms {
            let e = m.0[i];
            if e == 0 {
                continue;
            }
            let mut m2 = m.clone();
            m2.0[i] -= 1;
            out.add_term(m2, c * BigInt::from(e));
        }
        out
    }

    pub fn gradient(&self) -> Vec<MultiPoly> {
        (0..self.nvars).map(|i| self.partial(i)).collect()
    }

    /// `Σ h_i ∂F/∂x_i`.
    pub fn directional_derivative(&self, h: &[BigInt]) -> Result<MultiPoly> {
        self.check_len(h.len())?;
        let mut out = Self::zero(self.nvars);
        for (i, hi) in h.iter().enumerate() {
            if !hi.is_zero() {
                out = &out + &self.partial(i).scale(hi);
            }
        }
        Ok(out)
    }

    /// Substitute `x_i ↦ images[i]` (all over the same target ring).
    pub fn substitute(&self, images: &[MultiPoly]) -> Result<MultiPoly> {
        self.check_len(images.len())?;
        let target = images.first().map_or(0, |p| p.nvars);
        if images.iter().any(|p| p.nvars != target) {
            return Err(invalid("substitution images live in different rings"));
        }
        let mut powers: Vec<Vec<MultiPoly>> = images.iter().map(|p| vec![Self::constant(target, 1), p.clone()]).collect();
        let mut out = Self::zero(target);
        for (m, c) in &self.terms {
            let mut t = Self::constant(target, c.clone());
            for (i, &e) in m.0.iter().enumerate() {
                while powers[i].len() <= e as usize {
                    let next = powers[i].last().unwrap() * &images[i];
                    powers[i].push(next);
                }
                if e > 0 {
                    t = &t * &powers[i][e as usize];
                }
            }
            out = &out + &t;
        }
        Ok(out)
    }

    /// `f(x + t) - c · f(x)`, fully expanded.
    pub fn shift_scale_compose(&self, t: &[BigInt], c: &BigInt) -> Result<MultiPoly> {
        self.check_len(t.len())?;
        let images: Vec<MultiPoly> = t
            .iter()
            .enumerate()
            .map(|(i, ti)| &Self::var(self.nvars, i) + &Self::constant(self.nvars, ti.clone()))
            .collect();
        let shifted = if self.nvars == 0 {
            self.clone()
        } else {
            self.substitute(&images)?
        };
        Ok(&shifted - &self.scale(c))
    }

    /// `f(M x)` for an integer matrix `M` given by rows (`m × n`, where `m`
    /// is the number of variables of `f`).
    pub fn compose_linear(&self, rows: &[Vec<i64>]) -> Result<MultiPoly> {
        self.check_len(rows.len())?;
        let n = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n) {
            return Err(invalid("ragged matrix"));
        }
        let images: Vec<MultiPoly> = rows
            .iter()
            .map(|row| {
                MultiPoly::from_terms(
                    n,
                    row.iter().enumerate().map(|(j, &a)| {
                        let mut e = vec![0; n];
                        e[j] = 1;
                        (e, a)
                    }),
                )
            })
            .collect();
        self.substitute(&images)
    }

    /// Coefficients reduced into `[0, p)`.
    pub fn reduce_mod(&self, p: u64) -> MultiPoly {
        let mut out = Self::zero(self.nvars);
        for (m, c) in &self.terms {
            let r = arith::rem_big(c, p);
            out.add_term(m.clone(), BigInt::from(r));
        }
        out
    }

    /// `gcd` of all coefficients (zero for the zero polynomial).
    pub fn content(&self) -> BigInt {
        self.terms
            .values()
            .fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    pub fn max_abs_coeff(&self) -> BigInt {
        self.terms
            .values()
            .map(|c| c.abs())
            .max()
            .unwrap_or_default()
    }

    /// Largest exponent of each variable.
    pub fn max_exponents(&self) -> Vec<u32> {
        let mut out = vec![0; self.nvars];
        for m in self.terms.keys() {
            for (o, &e) in out.iter_mut().zip(&m.0) {
                *o = (*o).max(e);
            }
        }
        out
    }

    pub fn to_i128_terms(&self) -> Option<Vec<(Vec<u32>, i128)>> {
        self.terms
            .iter()
            .map(|(m, c)| c.to_i128().map(|v| (m.0.clone(), v)))
            .collect()
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            match (k, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let mut factors: Vec<String> = Vec::new();
            if !a.is_one() || m.degree() == 0 {
                factors.push(a.to_string());
            }
            for (i, &e) in m.0.iter().enumerate() {
                match e {
                    0 => {}
                    1 => factors.push(alloc::format!("x{}", i + 1)),
                    _ => factors.push(alloc::format!("x{}^{}", i + 1, e)),
                }
            }
            f.write_str(&factors.join("*"))?;
        }
        Ok(())
    }
}

impl core::ops::Add for &MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: &MultiPoly) -> MultiPoly {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl core::ops::Sub for &MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: &MultiPoly) -> MultiPoly {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }
}

impl core::ops::Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        self.scale(&BigInt::from(-1))
    }
}

impl core::ops::Mul for &MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: &MultiPoly) -> MultiPoly {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = MultiPoly::zero(self.nvars);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }
}

/// `true` iff no nonzero `x ∈ F_p^n` has `F(x) = 0` and `∇F(x) = 0`.
pub fn is_nonsingular_form_mod_p(form: &MultiPoly, p: u64, budget: &crate::Budget) -> Result<bool> {
    let field = crate::field::PrimeField::new(p)?;
    if !form.is_homogeneous() || form.degree().unwrap_or(0) == 0 {
        return Err(invalid("nonsingularity needs a homogeneous form of degree >= 1"));
    }
    let n = form.nvars();
    budget.check_scan("nonsingularity scan", crate::budget::pow_count(p as u128, n as u32))?;
    let f = ModPoly::new(form, p);
    let grad: Vec<ModPoly> = form.gradient().iter().map(|g| ModPoly::new(g, p)).collect();
    let total = p.pow(n as u32);
    let mut x = vec![0u64; n];
    for idx in 1..total {
        let mut rest = idx;
        for xi in x.iter_mut() {
            *xi = rest % p;
            rest /= p;
        }
        if f.eval_field(&field, &x) == 0 && grad.iter().all(|g| g.eval_field(&field, &x) == 0) {
            return Ok(false);
        }
    }
    Ok(true)
}
