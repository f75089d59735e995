//! Singular loci over finite fields: the reduction `h - γ g`, affine
//! dimensions estimated from point counts over `F_{p^k}`, and the counting
//! checks for `h · ∇F`.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use serde::Serialize;

use crate::arith::{is_prime, pow_mod, rem_big};
use crate::budget::{pow_count, Budget};
use crate::error::{hypothesis, invalid, Result};
use crate::ext_field::{ExtField, FiniteField};
use crate::lattice::{for_each_in_cube, for_each_residue};
use crate::poly::{is_nonsingular_form_mod_p, ModPoly, MultiPoly};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaForm {
    pub p: u64,
    pub gamma: u64,
    /// Leading form of `h - γ g` over `F_p`, coefficients in `[0, p)`.
    #[serde(skip)]
    pub h_form: MultiPoly,
    /// `None` when `h - γ g` vanishes identically mod `p`.
    pub deg_h: Option<u32>,
    /// `deg_h < 2` or `h ≡ γ g`.
    pub degenerate: bool,
}

fn inv_mod(a: u64, p: u64) -> u64 {
    pow_mod(a, p - 2, p)
}

/// The unique `γ mod p` making `deg(h - γ g) < deg g`, with the leading
/// form `H` of `h - γ g`.
pub fn compute_gamma(h: &MultiPoly, g: &MultiPoly, p: u64) -> Result<GammaForm> {
    if !is_prime(p) {
        return Err(invalid("p must be prime"));
    }
    if h.nvars() != g.nvars() {
        return Err(invalid("h and g have different numbers of variables"));
    }
    let d = g.degree().unwrap_or(0);
    if d < 3 {
        return Err(invalid("deg g must be at least 3"));
    }
    if h.degree().unwrap_or(0) > d {
        return Err(invalid("deg h exceeds deg g"));
    }
    let lead_g = g.homogeneous_part(d).reduce_mod(p);
    if lead_g.is_zero() {
        return Err(hypothesis("leading form of g vanishes mod p"));
    }
    let top_h = h.homogeneous_part(d).reduce_mod(p);
    let gamma = match top_h.is_zero() {
        true => 0,
        false => {
            let (mono, gc) = lead_g.terms().next().expect("nonzero");
            let hc = rem_big(&top_h.coeff(&mono.0), p);
            let c = hc * inv_mod(rem_big(gc, p), p) % p;
            let check = (&top_h - &lead_g.scale(&BigInt::from(c))).reduce_mod(p);
            if !check.is_zero() {
                return Err(hypothesis(
                    "leading form of h is not a multiple of the leading form of g mod p",
                ));
            }
            c
        }
    };
    let diff = (h - &g.scale(&BigInt::from(gamma))).reduce_mod(p);
    let deg_h = diff.degree();
    debug_assert!(deg_h.is_none_or(|k| k < d));
    let h_form = match deg_h {
        Some(k) => diff.homogeneous_part(k),
        None => diff,
    };
    Ok(GammaForm {
        p,
        gamma,
        h_form,
        deg_h,
        degenerate: deg_h.is_none_or(|k| k < 2),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingularLocusReport {
    pub p: u64,
    /// `counts[k-1]`: points over `F_{p^k}`.
    pub counts: Vec<u64>,
    pub dim_estimate: u32,
    /// Every `count_k / p^{k s}` lies in `[1/4, 4]`, with at least two `k`.
    pub exact: bool,
    pub ratios: Vec<f64>,
}

/// Number of common zeros of `polys` over `F_{p^k}`.
fn common_zeros<F: FiniteField>(field: &F, n: usize, polys: &[ModPoly]) -> u64 {
    let elems: Vec<F::Elem> = (0..field.order()).map(|i| field.element(i)).collect();
    let mut x = vec![field.zero(); n];
    let mut count = 0u64;
    for_each_residue(n, field.order(), |idx| {
        for (xi, &i) in x.iter_mut().zip(idx) {
            *xi = elems[i as usize];
        }
        if polys.iter().all(|f| field.is_zero(f.eval_field(field, &x))) {
            count += 1;
        }
    });
    count
}

/// Point counts of the common zero set of `polys` over `F_{p^k}` for every
/// `k <= max_k` whose `p^{kn}` fits the scan budget, and the dimension read
/// off from their growth.
pub fn locus_report(
    polys: &[MultiPoly],
    n: usize,
    p: u64,
    max_k: u32,
    budget: &Budget,
) -> Result<SingularLocusReport> {
    if !is_prime(p) {
        return Err(invalid("p must be prime"));
    }
    if !(1..=3).contains(&max_k) {
        return Err(invalid("max_k must be 1, 2 or 3"));
    }
    budget.check_scan("singular locus scan", pow_count(p as u128, n as u32))?;
    let reduced: Vec<ModPoly> = polys.iter().map(|f| ModPoly::new(f, p)).collect();
    let mut counts = Vec::new();
    for k in 1..=max_k {
        if budget
            .check_scan("singular locus scan", pow_count(p as u128, k * n as u32))
            .is_err()
        {
            break;
        }
        let c = if k == 1 {
            common_zeros(&crate::field::PrimeField::new(p)?, n, &reduced)
        } else {
            common_zeros(&ExtField::build(p, k, budget.scan_points)?, n, &reduced)
        };
        counts.push(c);
    }
    let logp = libm::log(p as f64);
    let pts: Vec<(f64, f64)> = counts
        .iter()
        .enumerate()
        .map(|(i, &c)| ((i + 1) as f64 * logp, libm::log(c.max(1) as f64)))
        .collect();
    let slope = if pts.len() >= 2 {
        let k = pts.len() as f64;
        let mx = pts.iter().map(|q| q.0).sum::<f64>() / k;
        let my = pts.iter().map(|q| q.1).sum::<f64>() / k;
        let sxy: f64 = pts.iter().map(|q| (q.0 - mx) * (q.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|q| (q.0 - mx) * (q.0 - mx)).sum();
        sxy / sxx
    } else {
        pts[0].1 / pts[0].0
    };
    let s = libm::round(slope).clamp(0.0, n as f64) as u32;
    let ratios: Vec<f64> = counts
        .iter()
        .enumerate()
        .map(|(i, &c)| c as f64 / libm::pow(p as f64, ((i + 1) as u32 * s) as f64))
        .collect();
    let exact = counts.len() >= 2 && ratios.iter().all(|&r| (0.25..=4.0).contains(&r));
    Ok(SingularLocusReport {
        p,
        counts,
        dim_estimate: s,
        exact,
        ratios,
    })
}

/// Dimension of `{H = 0, ∇H = 0}` in `A^n` over the algebraic closure,
/// estimated from counts over `F_{p^k}`.
pub fn singular_locus_dim(
    form: &MultiPoly,
    p: u64,
    max_k: u32,
    budget: &Budget,
) -> Result<SingularLocusReport> {
    let reduced = form.reduce_mod(p);
    if reduced.is_zero() {
        return Err(invalid("form vanishes mod p"));
    }
    if !reduced.is_homogeneous() || reduced.degree().unwrap_or(0) < 2 {
        return Err(invalid("need a homogeneous form of degree at least 2"));
    }
    let mut polys = vec![reduced.clone()];
    polys.extend(reduced.gradient());
    locus_report(&polys, form.nvars(), p, max_k, budget)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SOfH {
    pub s: u32,
    /// `h ≡ 0 mod p` or `h · ∇F ≡ 0 mod p`.
    pub degenerate: bool,
    pub report: Option<SingularLocusReport>,
}

/// `h · ∇F` reduced mod `p`.
pub fn h_dot_grad(form: &MultiPoly, h: &[i64], p: u64) -> MultiPoly {
    let hb: Vec<BigInt> = h.iter().map(|&v| BigInt::from(v)).collect();
    form.directional_derivative(&hb)
        .expect("dimension checked")
        .reduce_mod(p)
}

fn s_of_h_unchecked(form: &MultiPoly, h: &[i64], p: u64, max_k: u32, budget: &Budget) -> Result<SOfH> {
    let n = form.nvars();
    let degenerate = SOfH {
        s: n as u32,
        degenerate: true,
        report: None,
    };
    if h.iter().all(|&v| v.rem_euclid(p as i64) == 0) {
        return Ok(degenerate);
    }
    let dir = h_dot_grad(form, h, p);
    if dir.is_zero() {
        return Ok(degenerate);
    }
    let report = singular_locus_dim(&dir, p, max_k, budget)?;
    Ok(SOfH {
        s: report.dim_estimate,
        degenerate: false,
        report: Some(report),
    })
}

fn check_nonsingular_form(form: &MultiPoly, p: u64, budget: &Budget) -> Result<()> {
    if form.degree().unwrap_or(0) < 3 {
        return Err(invalid("F must have degree at least 3"));
    }
    if !is_nonsingular_form_mod_p(form, p, budget)? {
        return Err(hypothesis("F is singular mod p"));
    }
    Ok(())
}

/// Dimension of the singular locus of `h · ∇F(x) = 0`; `n` when `h ≡ 0`.
pub fn s_of_h(form: &MultiPoly, h: &[i64], p: u64, max_k: u32, budget: &Budget) -> Result<SOfH> {
    if h.len() != form.nvars() {
        return Err(invalid("h has the wrong length"));
    }
    check_nonsingular_form(form, p, budget)?;
    s_of_h_unchecked(form, h, p, max_k, budget)
}

/// `h` scaled so its first coordinate nonzero mod `p` is 1. `s_of_h` only
/// depends on this class.
fn projective_key(h: &[i64], p: u64) -> Vec<u64> {
    let red: Vec<u64> = h.iter().map(|&v| v.rem_euclid(p as i64) as u64).collect();
    match red.iter().find(|&&v| v != 0) {
        None => red,
        Some(&lead) => {
            let inv = inv_mod(lead, p);
            red.iter().map(|&v| v * inv % p).collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistogramReport {
    pub p: u64,
    pub h_box: i64,
    pub histogram: BTreeMap<u32, u64>,
    /// `count_s / (H^{n-s} + H^n p^{-s})`.
    pub ratios: BTreeMap<u32, f64>,
    pub total: u64,
}

/// Histogram of `s_of_h` over nonzero `h ∈ [-H, H]^n` (counts over `F_p`).
pub fn lemma3_histogram(form: &MultiPoly, h_box: i64, p: u64, budget: &Budget) -> Result<HistogramReport> {
    if h_box < 0 {
        return Err(invalid("H must be non-negative"));
    }
    let n = form.nvars();
    check_nonsingular_form(form, p, budget)?;
    budget.check_box(
        "s(h) histogram",
        pow_count(2 * h_box as u128 + 1, n as u32).saturating_mul(pow_count(p as u128, n as u32)),
    )?;
    let mut cache: BTreeMap<Vec<u64>, u32> = BTreeMap::new();
    let mut histogram: BTreeMap<u32, u64> = BTreeMap::new();
    let mut failure = None;
    let mut total = 0u64;
    if h_box > 0 {
        for_each_in_cube(n, h_box, |h| {
            if failure.is_some() || h.iter().all(|&v| v == 0) {
                return;
            }
            let key = projective_key(h, p);
            let s = match cache.get(&key) {
                Some(&s) => s,
                None => match s_of_h_unchecked(form, h, p, 1, budget) {
                    Ok(r) => {
                        cache.insert(key, r.s);
                        r.s
                    }
                    Err(e) => {
                        failure = Some(e);
                        return;
                    }
                },
            };
            *histogram.entry(s).or_insert(0) += 1;
            total += 1;
        });
    }
    if let Some(e) = failure {
        return Err(e);
    }
    let hf = h_box as f64;
    let ratios = histogram
        .iter()
        .map(|(&s, &c)| {
            let denom = libm::pow(hf, (n as u32 - s) as f64)
                + libm::pow(hf, n as f64) * libm::pow(p as f64, -(s as f64));
            (s, c as f64 / denom)
        })
        .collect();
    Ok(HistogramReport {
        p,
        h_box,
        histogram,
        ratios,
        total,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatticeCountReport {
    pub q: u64,
    pub r: i64,
    pub k: u32,
    pub count: u64,
    pub bound: f64,
    pub ratio: f64,
}

/// Points of `[-R, R]^n` whose reduction lies in `V_p = {f = 0 : f ∈ eqs}`
/// for every prime `p | q`, against `R^n q^{k-n} + R^k`.
pub fn lemma4_count_check(
    eqs: &[MultiPoly],
    n: usize,
    q: u64,
    r: i64,
    k: u32,
    budget: &Budget,
) -> Result<LatticeCountReport> {
    if r < 1 {
        return Err(invalid("R must be at least 1"));
    }
    let primes = crate::arith::distinct_prime_factors(q);
    let squarefree = primes.iter().product::<u64>() == q;
    if !(1..=2).contains(&primes.len()) || !squarefree {
        return Err(invalid("q must be a prime or a product of two distinct primes"));
    }
    if eqs.iter().any(|f| f.nvars() != n) {
        return Err(invalid("equations have the wrong number of variables"));
    }
    budget.check_box("lattice count", pow_count(2 * r as u128 + 1, n as u32))?;
    let reduced: Vec<Vec<ModPoly>> = primes
        .iter()
        .map(|&p| eqs.iter().map(|f| ModPoly::new(f, p)).collect())
        .collect();
    let mut count = 0u64;
    let mut red = vec![0u64; n];
    for_each_in_cube(n, r, |x| {
        let inside = primes.iter().zip(&reduced).all(|(&p, fs)| {
            for (ri, &xi) in red.iter_mut().zip(x) {
                *ri = xi.rem_euclid(p as i64) as u64;
            }
            fs.iter().all(|f| f.eval(&red) == 0)
        });
        if inside {
            count += 1;
        }
    });
    let rf = r as f64;
    let bound = libm::pow(rf, n as f64) * libm::pow(q as f64, k as f64 - n as f64)
        + libm::pow(rf, k as f64);
    Ok(LatticeCountReport {
        q,
        r,
        k,
        count,
        bound,
        ratio: count as f64 / bound,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TsReport {
    pub p: u64,
    pub s: u32,
    pub count: u64,
    pub bound: f64,
    pub ratio: f64,
}

/// Counts `h ∈ F_p^n` whose `S_h = {x : ∇(h · ∇F)(x) = 0}` has dimension at
/// least `s`, against `p^{n-s}`.
pub fn lemma6_ts_check(form: &MultiPoly, p: u64, s: u32, budget: &Budget) -> Result<TsReport> {
    let n = form.nvars();
    check_nonsingular_form(form, p, budget)?;
    budget.check_scan(
        "T_s scan",
        pow_count(p as u128, n as u32).saturating_mul(pow_count(p as u128, n as u32)),
    )?;
    let mut count = 0u64;
    if s as usize <= n {
        let mut failure = None;
        let mut cache: BTreeMap<Vec<u64>, u32> = BTreeMap::new();
        for_each_residue(n, p, |h| {
            if failure.is_some() {
                return;
            }
            let hi: Vec<i64> = h.iter().map(|&v| v as i64).collect();
            let key = projective_key(&hi, p);
            let dim = match cache.get(&key) {
                Some(&d) => d,
                None => {
                    let dir = h_dot_grad(form, &hi, p);
                    let d = if dir.is_zero() {
                        n as u32
                    } else {
                        match locus_report(&dir.gradient(), n, p, 1, budget) {
                            Ok(rep) => rep.dim_estimate,
                            Err(e) => {
                                failure = Some(e);
                                return;
                            }
                        }
                    };
                    cache.insert(key, d);
                    d
                }
            };
            if dim >= s {
                count += 1;
            }
        });
        if let Some(e) = failure {
            return Err(e);
        }
    }
    let bound = libm::pow(p as f64, n as f64 - s as f64);
    Ok(TsReport {
        p,
        s,
        count,
        bound,
        ratio: count as f64 / bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str, n: usize) -> MultiPoly {
        MultiPoly::parse(s, n).unwrap()
    }

    #[test]
    fn gamma_examples() {
        let g = p("x1^3 + x2^3", 2);
        let h = &(&g.scale(&BigInt::from(2)) + &p("x1^2 + x1", 2));
        let gf = compute_gamma(h, &g, 7).unwrap();
        assert_eq!(gf.gamma, 2);
        assert_eq!(gf.h_form, p("x1^2", 2));
        assert_eq!(gf.deg_h, Some(2));
        assert!(!gf.degenerate);
        let h1 = &g.scale(&BigInt::from(2)) + &p("x1", 2);
        let gf = compute_gamma(&h1, &g, 7).unwrap();
        assert_eq!((gf.gamma, gf.deg_h, gf.degenerate), (2, Some(1), true));
        let low = p("3*x1^2 - x2^2 + 5", 2);
        let gf = compute_gamma(&low, &g, 7).unwrap();
        assert_eq!(gf.gamma, 0);
        assert_eq!(gf.h_form, p("3*x1^2 + 6*x2^2", 2));
        // proportional mod 7 only: 9 ≡ 2
        let h9 = &g.scale(&BigInt::from(9)) + &p("x2^2", 2);
        assert_eq!(compute_gamma(&h9, &g, 7).unwrap().gamma, 2);
        assert!(compute_gamma(&p("x1^3", 2), &g, 7).is_err());
        assert!(compute_gamma(&g, &p("x1^2", 2), 7).is_err());
    }

    #[test]
    fn gamma_reduces_degree() {
        let g = p("x1^3 + 2*x2^3 - x1*x2*x3 + x3^3", 3);
        for (c, extra) in [(5, "x1^2 - 4"), (-3, "x2 + x3^2"), (0, "x1*x2")] {
            let h = &g.scale(&BigInt::from(c)) + &p(extra, 3);
            for pr in [5u64, 7, 11] {
                let gf = compute_gamma(&h, &g, pr).unwrap();
                let diff = (&h - &g.scale(&BigInt::from(gf.gamma))).reduce_mod(pr);
                assert!(diff.degree().unwrap_or(0) < 3);
                assert_eq!(gf.gamma, (c as i64).rem_euclid(pr as i64) as u64);
            }
        }
    }

    #[test]
    fn singular_locus_examples() {
        let b = Budget::default();
        let line = singular_locus_dim(&p("x1^2", 2), 5, 3, &b).unwrap();
        assert_eq!(line.counts, [5, 25, 125]);
        assert_eq!(line.dim_estimate, 1);
        assert!(line.exact);
        let quadric = singular_locus_dim(&p("x1^2 + x2^2 + x3^2", 3), 7, 3, &b).unwrap();
        assert_eq!(quadric.counts, [1, 1]);
        assert_eq!(quadric.dim_estimate, 0);
        assert!(quadric.exact);
        assert!(singular_locus_dim(&MultiPoly::zero(2), 5, 1, &b).is_err());
        assert!(singular_locus_dim(&p("7*x1^2", 2), 7, 1, &b).is_err());
    }

    #[test]
    fn s_of_h_examples() {
        let b = Budget::default();
        let f = p("x1^3 + x2^3 + x3^3", 3);
        assert_eq!(s_of_h(&f, &[1, 1, 1], 7, 2, &b).unwrap().s, 0);
        assert_eq!(s_of_h(&f, &[1, 0, 0], 7, 2, &b).unwrap().s, 2);
        let zero = s_of_h(&f, &[7, 14, 0], 7, 2, &b).unwrap();
        assert_eq!(zero.s, 3);
        assert!(zero.degenerate);
        assert!(s_of_h(&p("x1^3 + x2^3 + 3*x3^3", 3), &[1, 1, 1], 3, 1, &b).is_err());
    }

    #[test]
    fn histogram_partitions_the_box() {
        let b = Budget::default();
        let f = p("x1^3 + x2^3 + x3^3", 3);
        let rep = lemma3_histogram(&f, 3, 7, &b).unwrap();
        assert_eq!(rep.total, 7u64.pow(3) - 1);
        assert_eq!(rep.histogram.values().sum::<u64>(), rep.total);
        // s = 0 for h with no zero coordinate, s = 1 for exactly one zero
        assert_eq!(rep.histogram[&0], 216);
        assert_eq!(rep.histogram[&1], 108);
        assert_eq!(rep.histogram[&2], 18);
        assert!(rep.ratios.values().all(|&r| r <= 10.0));
        let empty = lemma3_histogram(&f, 0, 7, &b).unwrap();
        assert!(empty.histogram.is_empty());
    }

    #[test]
    fn lattice_counts() {
        let b = Budget::default();
        let hyper = lemma4_count_check(&[p("x1", 2)], 2, 7, 20, 1, &b).unwrap();
        assert_eq!(hyper.count, 41 * (2 * (20 / 7) + 1));
        assert!(hyper.ratio < 4.0);
        let whole = lemma4_count_check(&[], 2, 7, 20, 2, &b).unwrap();
        assert_eq!(whole.count, 41 * 41);
        assert!(whole.ratio <= 4.0 + 1e-9);
        let point = lemma4_count_check(&[p("x1", 2), p("x2", 2)], 2, 5, 12, 0, &b).unwrap();
        assert_eq!(point.count, 25);
        let both = lemma4_count_check(&[p("x1", 2)], 2, 35, 40, 1, &b).unwrap();
        assert_eq!(both.count, 81 * 3);
        assert!(lemma4_count_check(&[], 2, 49, 5, 2, &b).is_err());
    }

    #[test]
    fn ts_counts() {
        let b = Budget::default();
        let f = p("x1^3 + x2^3 + x3^3", 3);
        let all = lemma6_ts_check(&f, 5, 0, &b).unwrap();
        assert_eq!(all.count, 125);
        assert_eq!(all.ratio, 1.0);
        // S_h = {h_i x_i = 0 for all i}: dimension = number of zero h_i
        let one = lemma6_ts_check(&f, 5, 1, &b).unwrap();
        assert_eq!(one.count, 125 - 64);
        assert!(lemma6_ts_check(&f, 5, 4, &b).unwrap().count == 0);
    }
}
