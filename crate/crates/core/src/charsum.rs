//! Complete exponential sums over `Z/qZ`: mixed sums
//! `Σ e_p(a h + b g + v·x)`, the restricted sums `S_q(v)`, their behaviour
//! under the Chinese remainder theorem, and the Poisson evaluation of
//! `Σ_{q | h(x), (g(x), q) = 1} W(x/L)`.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use serde::Serialize;

use crate::arith::{distinct_prime_factors, gcd_u64, is_prime, pow_mod};
use crate::budget::{pow_count, Budget};
use crate::error::{hypothesis, invalid, Result};
use crate::geometry::{compute_gamma, singular_locus_dim};
use crate::lattice::{for_each_in_cube, for_each_residue};
use crate::poly::{is_nonsingular_form_mod_p, ModPoly, MultiPoly};
use crate::rng::SplitMix64;
use crate::rootsum::{cabs, Compensated, ExactRootSum};
use crate::weight::Weight;

/// A character or exponential sum with its size relative to a reference
/// scale.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SumReport {
    pub modulus: u64,
    pub sum_re: f64,
    pub sum_im: f64,
    pub abs: f64,
    pub terms: u64,
    /// `abs / scale`.
    pub normalized: f64,
    pub bound_terms: Vec<f64>,
    /// `abs / Σ bound_terms`, when bound terms are given.
    pub ratio: Option<f64>,
}

impl SumReport {
    pub fn new(modulus: u64, value: Complex64, terms: u64, scale: f64, bound_terms: Vec<f64>) -> Self {
        let abs = cabs(value);
        let total: f64 = bound_terms.iter().sum();
        SumReport {
            modulus,
            sum_re: value.re,
            sum_im: value.im,
            abs,
            terms,
            normalized: abs / scale,
            ratio: (!bound_terms.is_empty()).then(|| abs / total),
            bound_terms,
        }
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.sum_re, self.sum_im)
    }
}

/// Values of `h` and `g` mod `m` at every `z ∈ (Z/mZ)^n`, last coordinate
/// fastest.
struct ResidueTable {
    m: u64,
    n: usize,
    h: Vec<u64>,
    g: Vec<u64>,
}

impl ResidueTable {
    fn new(m: u64, h: &MultiPoly, g: &MultiPoly, budget: &Budget) -> Result<Self> {
        if h.nvars() != g.nvars() {
            return Err(invalid("h and g have different numbers of variables"));
        }
        let n = h.nvars();
        budget.check_scan("complete sum", pow_count(m as u128, n as u32))?;
        let (hm, gm) = (ModPoly::new(h, m), ModPoly::new(g, m));
        let size = m.pow(n as u32) as usize;
        let (mut hv, mut gv) = (Vec::with_capacity(size), Vec::with_capacity(size));
        for_each_residue(n, m, |z| {
            hv.push(hm.eval(z));
            gv.push(gm.eval(z));
        });
        Ok(ResidueTable { m, n, h: hv, g: gv })
    }

    /// `Σ_z [keep(h(z), g(z))] e_m(c(z) + v·z)` with `c` read off the table.
    fn sum<K: Fn(u64, u64) -> Option<u64>>(&self, v: &[u64], keep: K) -> ExactRootSum {
        let m = self.m;
        let mut acc = ExactRootSum::new(m);
        let mut idx = 0usize;
        for_each_residue(self.n, m, |z| {
            let (hz, gz) = (self.h[idx], self.g[idx]);
            idx += 1;
            if let Some(c) = keep(hz, gz) {
                let dot = z
                    .iter()
                    .zip(v)
                    .fold(c, |acc, (&zi, &vi)| (acc + zi * vi) % m);
                acc.add(dot, 1);
            }
        });
        acc
    }
}

fn reduce_vec(v: &[i64], m: u64) -> Vec<u64> {
    v.iter().map(|&x| x.rem_euclid(m as i64) as u64).collect()
}

/// `Σ_{x mod p} e_p(a h(x) + b g(x) + v·x)`, normalized by `p^{n/2}`.
pub fn mixed_complete_sum(
    p: u64,
    h: &MultiPoly,
    g: &MultiPoly,
    a: u64,
    b: u64,
    v: &[i64],
    budget: &Budget,
) -> Result<SumReport> {
    if !is_prime(p) {
        return Err(invalid("p must be prime"));
    }
    let table = ResidueTable::new(p, h, g, budget)?;
    if v.len() != table.n {
        return Err(invalid("v has the wrong length"));
    }
    Ok(mixed_from_table(&table, a, b, &reduce_vec(v, p)))
}

fn mixed_from_table(table: &ResidueTable, a: u64, b: u64, v: &[u64]) -> SumReport {
    let p = table.m;
    let (a, b) = (a % p, b % p);
    let acc = table.sum(v, |hz, gz| Some((a * hz + b * gz) % p));
    let scale = libm::pow(p as f64, table.n as f64 / 2.0);
    SumReport::new(p, acc.value(), p.pow(table.n as u32), scale, Vec::new())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeligneScan {
    pub p: u64,
    pub draws: usize,
    pub max_ratio: f64,
    pub mean_ratio: f64,
}

/// Max of `|Σ e_p(a h + b g + v·x)| / p^{n/2}` over seeded draws with
/// `(a, b) ≠ (0, 0)`.
pub fn deligne_scan(
    p: u64,
    h: &MultiPoly,
    g: &MultiPoly,
    draws: usize,
    seed: u64,
    budget: &Budget,
) -> Result<DeligneScan> {
    if !is_prime(p) {
        return Err(invalid("p must be prime"));
    }
    let table = ResidueTable::new(p, h, g, budget)?;
    let mut rng = SplitMix64::new(seed);
    let mut max_ratio: f64 = 0.0;
    let mut mean = Compensated::new();
    let mut done = 0;
    while done < draws {
        let a = rng.below(p);
        let b = rng.below(p);
        let v: Vec<u64> = (0..table.n).map(|_| rng.below(p)).collect();
        if a == 0 && b == 0 {
            continue;
        }
        let rep = mixed_from_table(&table, a, b, &v);
        max_ratio = max_ratio.max(rep.normalized);
        mean.add(rep.normalized);
        done += 1;
    }
    Ok(DeligneScan {
        p,
        draws,
        max_ratio,
        mean_ratio: if draws == 0 { 0.0 } else { mean.value() / draws as f64 },
    })
}

/// `S_q(v) = Σ_{z mod q, q | h(z), (g(z), q) = 1} e_q(v·z)`, normalized by
/// `q^{n/2}`.
pub fn s_q_v(q: u64, h: &MultiPoly, g: &MultiPoly, v: &[i64], budget: &Budget) -> Result<SumReport> {
    if q < 2 {
        return Err(invalid("q must be at least 2"));
    }
    let table = ResidueTable::new(q, h, g, budget)?;
    if v.len() != table.n {
        return Err(invalid("v has the wrong length"));
    }
    Ok(s_from_table(&table, &reduce_vec(v, q)))
}

fn s_from_table(table: &ResidueTable, v: &[u64]) -> SumReport {
    let q = table.m;
    let acc = table.sum(v, |hz, gz| (hz == 0 && gcd_u64(gz, q) == 1).then_some(0));
    let terms = acc.counts().iter().sum::<i64>() as u64;
    let scale = libm::pow(q as f64, table.n as f64 / 2.0);
    let mut rep = SumReport::new(q, acc.value(), terms, scale, Vec::new());
    if acc.is_zero() {
        rep.sum_re = 0.0;
        rep.sum_im = 0.0;
        rep.abs = 0.0;
        rep.normalized = 0.0;
    }
    rep
}

/// Euler's totient.
pub fn totient(q: u64) -> u64 {
    distinct_prime_factors(q)
        .into_iter()
        .fold(q, |acc, p| acc / p * (p - 1))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiplicativityReport {
    pub p1: u64,
    pub p2: u64,
    pub direct: SumReport,
    /// `S_{p1}(v) S_{p2}(v)`.
    pub product_re: f64,
    pub product_im: f64,
    /// `S_{p1}(p̄2 v) S_{p2}(p̄1 v)`, `p̄2 p2 ≡ 1 (mod p1)` and symmetrically.
    pub twisted_re: f64,
    pub twisted_im: f64,
    pub literal_error: f64,
    pub twisted_error: f64,
    pub literal_holds: bool,
    pub twisted_holds: bool,
}

fn rel_err(a: Complex64, b: Complex64) -> f64 {
    cabs(a - b) / cabs(a).max(cabs(b)).max(1.0)
}

/// Compares `S_{p1 p2}(v)` with the literal product `S_{p1}(v) S_{p2}(v)`
/// and with the CRT form. The literal product is exact when `h` and `g`
/// are homogeneous; the CRT form always is.
pub fn multiplicativity_check(
    p1: u64,
    p2: u64,
    h: &MultiPoly,
    g: &MultiPoly,
    v: &[i64],
    budget: &Budget,
) -> Result<MultiplicativityReport> {
    if !is_prime(p1) || !is_prime(p2) || p1 == p2 {
        return Err(invalid("need two distinct primes"));
    }
    let q = p1 * p2;
    let direct = s_q_v(q, h, g, v, budget)?;
    let t1 = ResidueTable::new(p1, h, g, budget)?;
    let t2 = ResidueTable::new(p2, h, g, budget)?;
    let s1 = s_from_table(&t1, &reduce_vec(v, p1)).value();
    let s2 = s_from_table(&t2, &reduce_vec(v, p2)).value();
    let inv2 = pow_mod(p2 % p1, p1 - 2, p1) as i64;
    let inv1 = pow_mod(p1 % p2, p2 - 2, p2) as i64;
    let v1: Vec<i64> = v.iter().map(|&x| (x % p1 as i64) * inv2).collect();
    let v2: Vec<i64> = v.iter().map(|&x| (x % p2 as i64) * inv1).collect();
    let w1 = s_from_table(&t1, &reduce_vec(&v1, p1)).value();
    let w2 = s_from_table(&t2, &reduce_vec(&v2, p2)).value();
    let product = s1 * s2;
    let twisted = w1 * w2;
    let literal_error = rel_err(direct.value(), product);
    let twisted_error = rel_err(direct.value(), twisted);
    Ok(MultiplicativityReport {
        p1,
        p2,
        direct,
        product_re: product.re,
        product_im: product.im,
        twisted_re: twisted.re,
        twisted_im: twisted.im,
        literal_error,
        twisted_error,
        literal_holds: literal_error <= 1e-6,
        twisted_holds: twisted_error <= 1e-6,
    })
}

/// `|S_p(0) - φ(p) p^{n-2}| / p^{n/2}`.
pub fn main_term_deviation(p: u64, h: &MultiPoly, g: &MultiPoly, budget: &Budget) -> Result<f64> {
    if !is_prime(p) {
        return Err(invalid("p must be prime"));
    }
    let n = h.nvars();
    if n < 2 {
        return Err(invalid("need n >= 2"));
    }
    let s0 = s_q_v(p, h, g, &vec![0; n], budget)?;
    let main = (p - 1) as f64 * libm::pow(p as f64, n as f64 - 2.0);
    Ok(libm::fabs(s0.sum_re - main) / libm::pow(p as f64, n as f64 / 2.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrimeData {
    pub p: u64,
    pub gamma: u64,
    pub deg_h: u32,
    pub s: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoissonReport {
    pub q: u64,
    pub n: usize,
    #[serde(rename = "L")]
    pub l: f64,
    /// Smallest prime factor of `q`.
    pub p: u64,
    pub s: u32,
    pub primes: Vec<PrimeData>,
    /// `Σ_{q | h(x), (g(x), q) = 1} W(x/L)`.
    #[serde(rename = "S")]
    pub sum: f64,
    pub main_term: f64,
    pub residual: f64,
    /// `Δ L^s q^{(n-s)/2}` and `Δ L^n p^{(s-n+2)/2} q^{-1}`.
    pub bound_terms: Vec<f64>,
    pub ratio: f64,
}

/// Splits `q` into one prime or two primes `p1 < p2 < 2 p1`.
pub fn admissible_factors(q: u64) -> Result<Vec<u64>> {
    if is_prime(q) {
        return Ok(vec![q]);
    }
    let ps = distinct_prime_factors(q);
    if ps.len() == 2 && ps[0] * ps[1] == q && ps[1] < 2 * ps[0] {
        Ok(ps)
    } else {
        Err(invalid("q must be prime or p1*p2 with p1 < p2 < 2*p1"))
    }
}

/// Direct evaluation of `S` against the main term `q^{-2} φ(q) Σ W(x/L)`.
/// Checks the standing hypotheses prime by prime and reports `s` as the
/// minimum singular-locus dimension over the primes dividing `q`.
pub fn poisson_identity_check<W: Weight + ?Sized>(
    q: u64,
    h: &MultiPoly,
    g: &MultiPoly,
    w: &W,
    delta: f64,
    l: f64,
    budget: &Budget,
) -> Result<PoissonReport> {
    if l.is_nan() || l < 1.0 {
        return Err(invalid("L must be at least 1"));
    }
    let n = g.nvars();
    if n < 2 || h.nvars() != n || w.dim() != n {
        return Err(invalid("need n >= 2 variables throughout"));
    }
    let factors = admissible_factors(q)?;
    let lead = g.leading_form()?;
    let mut primes = Vec::new();
    for &p in &factors {
        if !is_nonsingular_form_mod_p(&lead, p, budget)? {
            return Err(hypothesis(alloc::format!("leading form of g is singular mod {p}")));
        }
        let gf = compute_gamma(h, g, p)?;
        if gf.degenerate {
            return Err(hypothesis(alloc::format!(
                "leading form of h - gamma*g mod {p} has degree below 2"
            )));
        }
        let max_k = if budget
            .check_scan("", pow_count(p as u128, 2 * n as u32))
            .is_ok()
        {
            2
        } else {
            1
        };
        let s = singular_locus_dim(&gf.h_form, p, max_k, budget)?.dim_estimate;
        primes.push(PrimeData {
            p,
            gamma: gf.gamma,
            deg_h: gf.deg_h.unwrap_or(0),
            s,
        });
    }
    let s = primes.iter().map(|d| d.s).min().expect("at least one prime");
    let p = factors[0];

    let table = ResidueTable::new(q, h, g, budget)?;
    let keep: Vec<bool> = table
        .h
        .iter()
        .zip(&table.g)
        .map(|(&hz, &gz)| hz == 0 && gcd_u64(gz, q) == 1)
        .collect();
    let radius = libm::floor(l) as i64;
    budget.check_box("poisson lattice sum", pow_count(2 * radius as u128 + 1, n as u32))?;
    let factor = w.factor_table(radius, l);
    let mut sum = Compensated::new();
    let mut total = Compensated::new();
    for_each_in_cube(n, radius, |x| {
        let wx: f64 = x.iter().map(|&xi| factor[(xi + radius) as usize]).product();
        if wx == 0.0 {
            return;
        }
        total.add(wx);
        let idx = x
            .iter()
            .fold(0u64, |acc, &xi| acc * q + xi.rem_euclid(q as i64) as u64);
        if keep[idx as usize] {
            sum.add(wx);
        }
    });
    let qf = q as f64;
    let main_term = totient(q) as f64 / (qf * qf) * total.value();
    let residual = sum.value() - main_term;
    let (nf, sf) = (n as f64, s as f64);
    let bound_terms = vec![
        delta * libm::pow(l, sf) * libm::pow(qf, (nf - sf) / 2.0),
        delta * libm::pow(l, nf) * libm::pow(p as f64, (sf - nf + 2.0) / 2.0) / qf,
    ];
    let ratio = libm::fabs(residual) / bound_terms.iter().sum::<f64>();
    Ok(PoissonReport {
        q,
        n,
        l,
        p,
        s,
        primes,
        sum: sum.value(),
        main_term,
        residual,
        bound_terms,
        ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weight::BumpWeight;
    use num_bigint::BigInt;

    fn p(s: &str, n: usize) -> MultiPoly {
        MultiPoly::parse(s, n).unwrap()
    }

    /// Oracle: floating-point sum of `exp(2πi t/m)` term by term.
    fn naive_mixed(m: u64, h: &MultiPoly, g: &MultiPoly, a: i64, b: i64, v: &[i64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        let n = h.nvars();
        crate::lattice::for_each_in_box(&vec![0; n], &vec![m as i64 - 1; n], |x| {
            let t = a * i64::try_from(h.eval_i64(x).unwrap()).unwrap()
                + b * i64::try_from(g.eval_i64(x).unwrap()).unwrap()
                + x.iter().zip(v).map(|(xi, vi)| xi * vi).sum::<i64>();
            let ang = 2.0 * core::f64::consts::PI * t.rem_euclid(m as i64) as f64 / m as f64;
            acc += Complex64::new(ang.cos(), ang.sin());
        });
        acc
    }

    #[test]
    fn orthogonality() {
        let b = Budget::default();
        let h = p("x1^2 + x2^2", 2);
        let g = p("x1^3 + x2^3", 2);
        let all = mixed_complete_sum(11, &h, &g, 0, 0, &[0, 0], &b).unwrap();
        assert_eq!(all.sum_re, 121.0);
        let none = mixed_complete_sum(11, &h, &g, 0, 0, &[3, 0], &b).unwrap();
        assert!(none.abs < 1e-12);
    }

    #[test]
    fn mixed_sum_matches_oracle() {
        let b = Budget::default();
        let h = p("x1^2 + x2^2", 2);
        let g = p("x1^3 + x2^3", 2);
        for (a, c, v) in [(1, 0, [0, 0]), (3, 5, [1, 2]), (0, 7, [4, 10])] {
            let rep = mixed_complete_sum(11, &h, &g, a, c, &v, &b).unwrap();
            let naive = naive_mixed(11, &h, &g, a as i64, c as i64, &v);
            assert!(cabs(rep.value() - naive) < 1e-9);
            assert!(rep.abs <= rep.terms as f64);
        }
        let scan = deligne_scan(11, &h, &g, 200, 7, &b).unwrap();
        assert!(scan.max_ratio <= 2.0 * 9.0);
    }

    #[test]
    fn s_q_examples() {
        let b = Budget::default();
        let s = s_q_v(5, &p("x1", 2), &p("x2", 2), &[0, 1], &b).unwrap();
        assert!((s.sum_re + 1.0).abs() < 1e-12 && s.sum_im.abs() < 1e-12);
        assert_eq!(s.terms, 4);
        let never = s_q_v(7, &p("1", 2), &p("x1", 2), &[1, 1], &b).unwrap();
        assert_eq!((never.abs, never.terms), (0.0, 0));
    }

    #[test]
    fn crt_conflict_on_inhomogeneous_input() {
        let b = Budget::default();
        let rep = multiplicativity_check(2, 3, &p("x1 - 1", 1), &p("1", 1), &[1], &b).unwrap();
        // S_6(1) = e(1/6) while S_2(1) S_3(1) = e(1/2) e(1/3) = e(5/6)
        assert!((rep.direct.sum_re - 0.5).abs() < 1e-12);
        assert!((rep.direct.sum_im - 0.75f64.sqrt()).abs() < 1e-12);
        assert!(!rep.literal_holds);
        assert!(rep.twisted_holds);
    }

    #[test]
    fn crt_forms_on_homogeneous_input() {
        let b = Budget::default();
        let h = p("x1^2 + x2^2", 2);
        let g = p("x1^3 + x2^3", 2);
        let mut rng = SplitMix64::new(3);
        for _ in 0..10 {
            let v = [rng.range_i64(-40, 40), rng.range_i64(-40, 40)];
            let rep = multiplicativity_check(5, 7, &h, &g, &v, &b).unwrap();
            assert!(rep.literal_holds && rep.twisted_holds, "{v:?}");
        }
        let zero = multiplicativity_check(5, 7, &h, &g, &[0, 0], &b).unwrap();
        assert_eq!(zero.direct.terms as f64, zero.product_re);
    }

    #[test]
    fn main_term_of_s_p_zero() {
        let b = Budget::default();
        let f = p("x1^3 + x2^3 + x3^3", 3);
        let c = [BigInt::from(1), BigInt::from(2), BigInt::from(0)];
        let h = f.shift_scale_compose(&c, &BigInt::from(3)).unwrap();
        for pr in [7, 11, 13] {
            let dev = main_term_deviation(pr, &h, &f, &b).unwrap();
            assert!(dev < 10.0, "p={pr} dev={dev}");
        }
        assert_eq!(totient(143), 120);
    }

    #[test]
    fn poisson_structure() {
        let b = Budget::default();
        let g = p("x1^3 + x2^3", 2);
        let w = BumpWeight::new(2);
        // -1 is not a square mod 7, so S = 0 and the residual is the main term
        let h = p("x1^2 + 1", 2);
        let rep = poisson_identity_check(7, &h, &g, &w, w.delta(), 20.0, &b).unwrap();
        assert_eq!(rep.sum, 0.0);
        assert!((rep.residual + rep.main_term).abs() < 1e-12);
        assert!(rep.main_term > 0.0 && rep.ratio.is_finite());
        assert_eq!(rep.s, 1);
        assert!(poisson_identity_check(7, &h, &g, &w, w.delta(), 0.5, &b).is_err());
        assert!(poisson_identity_check(3 * 7, &h, &g, &w, w.delta(), 5.0, &b).is_err());
        // x1^3 + x2^3 is singular mod 3
        assert!(poisson_identity_check(3, &h, &g, &w, w.delta(), 5.0, &b).is_err());
        let lin = p("x1 + 2", 2);
        assert!(poisson_identity_check(7, &lin, &g, &w, w.delta(), 5.0, &b).is_err());
    }

    #[test]
    fn poisson_on_shifted_difference() {
        let b = Budget::default();
        let g = p("x1^3 + x2^3", 2);
        let w = BumpWeight::new(2);
        let h = g
            .shift_scale_compose(&[BigInt::from(1), BigInt::from(1)], &BigInt::from(2))
            .unwrap();
        let rep = poisson_identity_check(11, &h, &g, &w, w.delta(), 50.0, &b).unwrap();
        assert_eq!(rep.primes[0].gamma, 10);
        assert!(rep.ratio < 10.0, "{rep:?}");
        let two = poisson_identity_check(35, &h, &g, &w, w.delta(), 40.0, &b).unwrap();
        assert_eq!(two.p, 5);
        assert!(two.ratio.is_finite());
    }
}
