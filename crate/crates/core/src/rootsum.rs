//! Sums of weighted roots of unity kept as per-angle buckets.
//!
//! A sum `Σ w_j e(j/N)` is stored as the vector of bucket weights; the
//! complex value is rendered only at the end, so identities between sums
//! are not polluted by rounding of intermediate cosines.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if libm::fabs(self.sum) >= libm::fabs(x) {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &Compensated) {
        self.add(other.sum);
        self.add(other.carry);
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl core::iter::FromIterator<f64> for Compensated {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut c = Compensated::new();
        for x in iter {
            c.add(x);
        }
        c
    }
}

/// `|z|` without needing `std`.
#[inline]
pub fn cabs(z: Complex64) -> f64 {
    libm::hypot(z.re, z.im)
}

/// `e(j/N) = exp(2πi j/N)`.
pub fn unit_root(j: u64, n: u64) -> Complex64 {
    let (s, c) = libm::sincos(2.0 * core::f64::consts::PI * (j % n) as f64 / n as f64);
    Complex64::new(c, s)
}

/// Real-weighted sum of `N`-th roots of unity.
#[derive(Debug, Clone, PartialEq)]
pub struct RootSum {
    den: u64,
    buckets: Vec<Compensated>,
    terms: u64,
}

impl RootSum {
    pub fn new(den: u64) -> Self {
        assert!(den >= 1);
        RootSum {
            den,
            buckets: vec![Compensated::new(); den as usize],
            terms: 0,
        }
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    /// Adds `w · e(j/N)`.
    #[inline]
    pub fn add(&mut self, j: u64, w: f64) {
        self.buckets[(j % self.den) as usize].add(w);
        self.terms += 1;
    }

    pub fn merge(&mut self, other: &RootSum) {
        assert_eq!(self.den, other.den);
        for (a, b) in self.buckets.iter_mut().zip(&other.buckets) {
            a.merge(b);
        }
        self.terms += other.terms;
    }

    pub fn terms(&self) -> u64 {
        self.terms
    }

    pub fn bucket(&self, j: u64) -> f64 {
        self.buckets[(j % self.den) as usize].value()
    }

    /// Sum of the absolute values of all added weights' buckets.
    pub fn mass(&self) -> f64 {
        self.buckets.iter().map(|b| libm::fabs(b.value())).sum()
    }

    pub fn value(&self) -> Complex64 {
        let mut re = Compensated::new();
        let mut im = Compensated::new();
        for (j, b) in self.buckets.iter().enumerate() {
            let w = b.value();
            if w != 0.0 {
                let z = unit_root(j as u64, self.den);
                re.add(w * z.re);
                im.add(w * z.im);
            }
        }
        Complex64::new(re.value(), im.value())
    }
}

/// Integer-weighted sum of `N`-th roots of unity with an exact zero test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactRootSum {
    den: u64,
    counts: Vec<i64>,
}

impl ExactRootSum {
    pub fn new(den: u64) -> Self {
        assert!(den >= 1);
        ExactRootSum {
            den,
            counts: vec![0; den as usize],
        }
    }

    #[inline]
    pub fn add(&mut self, j: u64, c: i64) {
        self.counts[(j % self.den) as usize] += c;
    }

    pub fn counts(&self) -> &[i64] {
        &self.counts
    }

    pub fn value(&self) -> Complex64 {
        let mut re = Compensated::new();
        let mut im = Compensated::new();
        for (j, &c) in self.counts.iter().enumerate() {
            if c != 0 {
                let z = unit_root(j as u64, self.den);
                re.add(c as f64 * z.re);
                im.add(c as f64 * z.im);
            }
        }
        Complex64::new(re.value(), im.value())
    }

    /// The sum is exactly zero iff `Σ c_j x^j` is divisible by the `N`-th
    /// cyclotomic polynomial.
    pub fn is_zero(&self) -> bool {
        let phi = cyclotomic(self.den);
        let mut rem: Vec<i128> = self.counts.iter().map(|&c| c as i128).collect();
        let deg = phi.len() - 1;
        // phi is monic
        for top in (deg..rem.len()).rev() {
            let c = rem[top];
            if c == 0 {
                continue;
            }
            for (i, &a) in phi.iter().enumerate() {
                rem[top - deg + i] -= c * a;
            }
        }
        rem.iter().all(|&c| c == 0)
    }
}

fn mobius(mut n: u64) -> i32 {
    let mut sign = 1;
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            n /= d;
            if n.is_multiple_of(d) {
                return 0;
            }
            sign = -sign;
        }
        d += 1;
    }
    if n > 1 {
        sign = -sign;
    }
    sign
}

/// Coefficients (low to high) of the `n`-th cyclotomic polynomial, from
/// `Φ_n = Π_{d | n} (x^d - 1)^{μ(n/d)}`.
pub fn cyclotomic(n: u64) -> Vec<i128> {
    let divisors: Vec<u64> = (1..=n).filter(|d| n.is_multiple_of(*d)).collect();
    let mut num = vec![1i128];
    let mut den = vec![1i128];
    for &d in &divisors {
        let factor = |poly: &Vec<i128>| {
            // poly * (x^d - 1)
            let mut out = vec![0i128; poly.len() + d as usize];
            for (i, &c) in poly.iter().enumerate() {
                out[i + d as usize] += c;
                out[i] -= c;
            }
            out
        };
        match mobius(n / d) {
            1 => num = factor(&num),
            -1 => den = factor(&den),
            _ => {}
        }
    }
    // exact division num / den, den monic up to sign
    let lead = *den.last().unwrap();
    let qlen = num.len() - den.len() + 1;
    let mut q = vec![0i128; qlen];
    for i in (0..qlen).rev() {
        let c = num[i + den.len() - 1] / lead;
        q[i] = c;
        for (j, &b) in den.iter().enumerate() {
            num[i + j] -= c * b;
        }
    }
    debug_assert!(num.iter().all(|&c| c == 0));
    q
}
