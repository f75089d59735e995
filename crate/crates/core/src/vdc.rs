//! Weighted character sums `T(q1, q2) = Σ_x w_B(x) χ_{q1}(f(x)) χ_{q2}(f(x))`
//! and the q-analogue of van der Corput differencing with `H = ⌊B/q2⌋`.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use num_integer::Integer;
use serde::Serialize;

use crate::arith::{gcd_u64, is_prime, rem_i128};
use crate::budget::{pow_count, Budget};
use crate::character::CompositeCharacter;
use crate::charsum::SumReport;
use crate::error::{invalid, Result};
use crate::lattice::{for_each_in_box, for_each_in_cube};
use crate::poly::{IntEvaluator, MultiPoly};
use crate::rng::SplitMix64;
use crate::rootsum::{cabs, Compensated, ExactRootSum, RootSum};
use crate::weight::Weight;

/// `f`, `w_B`, `χ_{q1}` and `χ_{q2}` tabulated on `[-R, R]^n`.
struct Grid {
    n: usize,
    radius: i64,
    side: usize,
    weight: Vec<f64>,
    e1: Vec<Option<u32>>,
    e2: Vec<Option<u32>>,
    /// `f(x) mod q1`.
    f1: Vec<u64>,
}

impl Grid {
    fn build<W: Weight + ?Sized>(
        f: &MultiPoly,
        chi1: &CompositeCharacter,
        chi2: &CompositeCharacter,
        b: i64,
        radius: i64,
        w: &W,
    ) -> Self {
        let n = f.nvars();
        let eval = IntEvaluator::new(f);
        let q1 = chi1.modulus();
        let factor: Vec<f64> = (-radius..=radius)
            .map(|x| w.factor(x as f64 / b as f64))
            .collect();
        let side = (2 * radius + 1) as usize;
        let cap = side.pow(n as u32);
        let mut g = Grid {
            n,
            radius,
            side,
            weight: Vec::with_capacity(cap),
            e1: Vec::with_capacity(cap),
            e2: Vec::with_capacity(cap),
            f1: Vec::with_capacity(cap),
        };
        for_each_in_cube(n, radius, |x| {
            g.weight
                .push(x.iter().map(|&xi| factor[(xi + radius) as usize]).product());
            match eval.eval_i128(x) {
                Some(v) => {
                    g.e1.push(chi1.exponent(v));
                    g.e2.push(chi2.exponent(v));
                    g.f1.push(rem_i128(v, q1));
                }
                None => {
                    let v = eval.eval(x);
                    g.e1.push(chi1.exponent_big(&v));
                    g.e2.push(chi2.exponent_big(&v));
                    g.f1.push(crate::arith::rem_big(&v, q1));
                }
            }
        });
        g
    }

    #[inline]
    fn index(&self, x: &[i64]) -> Option<usize> {
        let mut idx = 0usize;
        for &xi in x {
            if xi.abs() > self.radius {
                return None;
            }
            idx = idx * self.side + (xi + self.radius) as usize;
        }
        Some(idx)
    }
}

fn check_characters(chi1: &CompositeCharacter, chi2: &CompositeCharacter, b: i64) -> Result<()> {
    let (q1, q2) = (chi1.modulus(), chi2.modulus());
    if q1 == 1 || chi1.is_principal() {
        return Err(invalid("chi_q1 must be non-principal with q1 > 1"));
    }
    if gcd_u64(q1, q2) != 1 {
        return Err(invalid("q1 and q2 must be coprime"));
    }
    if b < q2 as i64 {
        return Err(invalid("need B >= q2"));
    }
    Ok(())
}

/// `B^{n/2} q1^{1/2} q2^{n/2}`, `B^{n/2} q1^{(n+2)/4}`, `B^n p^{-(n-2)/4}`
/// with `p` the smallest prime of `q1`.
pub fn proposition1_terms(n: usize, b: i64, q1: u64, q2: u64, p: u64) -> Vec<f64> {
    let (nf, bf) = (n as f64, b as f64);
    vec![
        libm::pow(bf, nf / 2.0) * libm::sqrt(q1 as f64) * libm::pow(q2 as f64, nf / 2.0),
        libm::pow(bf, nf / 2.0) * libm::pow(q1 as f64, (nf + 2.0) / 4.0),
        libm::pow(bf, nf) * libm::pow(p as f64, -(nf - 2.0) / 4.0),
    ]
}

/// `T(q1, q2)` over `[-B, B]^n`, with the three terms of its upper bound.
pub fn t_full<W: Weight + ?Sized>(
    f: &MultiPoly,
    chi1: &CompositeCharacter,
    chi2: &CompositeCharacter,
    b: i64,
    w: &W,
    budget: &Budget,
) -> Result<SumReport> {
    check_characters(chi1, chi2, b)?;
    let n = f.nvars();
    if w.dim() != n {
        return Err(invalid("weight dimension differs from the number of variables"));
    }
    budget.check_box("T(q1, q2)", pow_count(2 * b as u128 + 1, n as u32))?;
    let grid = Grid::build(f, chi1, chi2, b, b, w);
    let den = (chi1.r() as u64).lcm(&(chi2.r() as u64));
    let (s1, s2) = ((den / chi1.r() as u64) as u32, (den / chi2.r() as u64) as u32);
    let mut acc = RootSum::new(den);
    let mut mass = Compensated::new();
    for i in 0..grid.weight.len() {
        let wx = grid.weight[i];
        mass.add(wx);
        if let (Some(a), Some(c)) = (grid.e1[i], grid.e2[i]) {
            acc.add((a * s1 + c * s2) as u64, wx);
        }
    }
    let (q1, q2) = (chi1.modulus(), chi2.modulus());
    let p = chi1.primes()[0];
    let value = acc.value();
    let scale = mass.value().max(f64::MIN_POSITIVE);
    Ok(SumReport::new(
        q1 * q2,
        value,
        grid.weight.len() as u64,
        scale,
        proposition1_terms(n, b, q1, q2, p),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct THEntry {
    pub h: Vec<i64>,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VdcDecomposition {
    #[serde(rename = "H")]
    pub h: i64,
    pub q1: u64,
    pub q2: u64,
    #[serde(rename = "B")]
    pub b: i64,
    pub t: SumReport,
    #[serde(rename = "Sigma1")]
    pub sigma1: f64,
    /// With the condition `(f(x), q2) = 1`.
    #[serde(rename = "Sigma2")]
    pub sigma2: f64,
    /// Without it.
    #[serde(rename = "Sigma2_upper")]
    pub sigma2_upper: f64,
    /// `Σ_{h ∈ [-H, H]^n} Π (H - |h_j|) S(h, 0)`.
    #[serde(rename = "Sigma2_expansion")]
    pub sigma2_expansion: f64,
    #[serde(rename = "Sigma2A")]
    pub sigma2a: f64,
    #[serde(rename = "Sigma2B")]
    pub sigma2b: f64,
    /// `H^n Σ_{h ≠ 0} |T(h)|`.
    #[serde(rename = "Sigma2B_bound")]
    pub sigma2b_bound: f64,
    #[serde(rename = "T_h")]
    pub t_h: Vec<THEntry>,
    /// `H^{2n} |T|² / (Σ1 Σ2)`.
    pub cauchy_constant: f64,
    /// Largest relative gap `|S(h1, h2) - S(h1 - h2, 0)|` over the sampled pairs.
    pub shift_residual: f64,
    /// Largest relative gap between `T(h)` and `S(h, 0)`.
    pub t_h_residual: f64,
    /// Relative gap between `H^n T` and the shifted sum over `[1, H]^n`.
    pub shifted_route_residual: f64,
    /// Relative gap between `Σ2_upper` and its expansion.
    pub expansion_residual: f64,
}

impl VdcDecomposition {
    pub fn cauchy_holds(&self) -> bool {
        self.cauchy_constant <= 1.0 + 1e-9
    }

    pub fn sigma2b_bound_holds(&self) -> bool {
        libm::fabs(self.sigma2b) <= self.sigma2b_bound * (1.0 + 1e-9) + 1e-9
    }
}

fn rel(a: Complex64, b: Complex64, scale: f64) -> f64 {
    cabs(a - b) / scale.max(1.0)
}

/// `S(h1, h2) = Σ_x χ(f(x + q2 h1)) conj χ(f(x + q2 h2)) w_B(x + q2 h1) w_B(x + q2 h2)`.
fn s_pair(grid: &Grid, q2: i64, h1: &[i64], h2: &[i64], r: u32, span: i64) -> Complex64 {
    let n = grid.n;
    let mut acc = RootSum::new(r as u64);
    let mut y1 = vec![0i64; n];
    let mut y2 = vec![0i64; n];
    for_each_in_cube(n, span, |x| {
        for j in 0..n {
            y1[j] = x[j] + q2 * h1[j];
            y2[j] = x[j] + q2 * h2[j];
        }
        let (Some(i1), Some(i2)) = (grid.index(&y1), grid.index(&y2)) else {
            return;
        };
        let wgt = grid.weight[i1] * grid.weight[i2];
        if wgt == 0.0 {
            return;
        }
        if let (Some(a), Some(c)) = (grid.e1[i1], grid.e1[i2]) {
            acc.add((a + r - c) as u64, wgt);
        }
    });
    acc.value()
}

/// `T(h) = Σ_{k mod q1} χ(k) Σ_{f(x + q2 h) ≡ k f(x) (q1), (f(x), q1) = 1} w_{B,h}(x)`,
/// summing each residue class `k` separately.
fn t_of_h(grid: &Grid, chi1: &CompositeCharacter, q2: i64, h: &[i64], b: i64) -> Complex64 {
    let q1 = chi1.modulus();
    let n = grid.n;
    let mut classes = vec![Compensated::new(); q1 as usize];
    let mut y = vec![0i64; n];
    for_each_in_cube(n, b, |x| {
        for j in 0..n {
            y[j] = x[j] + q2 * h[j];
        }
        let (Some(ix), Some(iy)) = (grid.index(x), grid.index(&y)) else {
            return;
        };
        let wgt = grid.weight[ix] * grid.weight[iy];
        if wgt == 0.0 {
            return;
        }
        let fx = grid.f1[ix];
        if gcd_u64(fx, q1) != 1 {
            return;
        }
        let inv = (fx as i64).extended_gcd(&(q1 as i64)).x.rem_euclid(q1 as i64) as u64;
        let k = (grid.f1[iy] as u128 * inv as u128 % q1 as u128) as u64;
        debug_assert_eq!((grid.f1[iy] + q1 - (k as u128 * fx as u128 % q1 as u128) as u64) % q1, 0);
        classes[k as usize].add(wgt);
    });
    let r = chi1.r() as u64;
    let mut acc = RootSum::new(r);
    for (k, c) in classes.iter().enumerate() {
        if let Some(e) = chi1.exponent(k as i128) {
            acc.add(e as u64, c.value());
        }
    }
    acc.value()
}

/// The full differencing chain for `T(q1, q2)`. `pairs` seeded random
/// `(h1, h2) ∈ [1, H]^n` test the shift identity.
#[allow(clippy::too_many_arguments)]
pub fn vdc_decompose<W: Weight + ?Sized>(
    f: &MultiPoly,
    chi1: &CompositeCharacter,
    chi2: &CompositeCharacter,
    b: i64,
    w: &W,
    pairs: usize,
    seed: u64,
    budget: &Budget,
) -> Result<VdcDecomposition> {
    check_characters(chi1, chi2, b)?;
    let n = f.nvars();
    if w.dim() != n {
        return Err(invalid("weight dimension differs from the number of variables"));
    }
    let (q1, q2) = (chi1.modulus(), chi2.modulus());
    let q2i = q2 as i64;
    let hh = b / q2i;
    if hh < 1 {
        return Err(invalid("H = [B/q2] must be at least 1"));
    }
    let radius = b + hh * q2i;
    let shifts = pow_count(2 * hh as u128 + 1, n as u32);
    let points = pow_count(2 * radius as u128 + 1, n as u32);
    budget.check_box("van der Corput chain", points.saturating_mul(shifts).saturating_mul(2))?;
    let t = t_full(f, chi1, chi2, b, w, budget)?;
    let grid = Grid::build(f, chi1, chi2, b, radius, w);
    let r1 = chi1.r();
    let hn = libm::pow(hh as f64, n as f64);

    // Σ1, Σ2 and the shifted route over x ∈ [-B - H q2, B - q2]^n.
    let lo = vec![-b - hh * q2i; n];
    let hi = vec![b - q2i; n];
    let mut sigma1 = 0u64;
    let mut sigma2 = Compensated::new();
    let mut sigma2_upper = Compensated::new();
    let den = (r1 as u64).lcm(&(chi2.r() as u64));
    let (s1, s2) = ((den / r1 as u64) as u32, (den / chi2.r() as u64) as u32);
    let mut shifted = RootSum::new(den);
    let mut y = vec![0i64; n];
    for_each_in_box(&lo, &hi, |x| {
        let ix = grid.index(x).expect("inside grid");
        let coprime = grid.e2[ix].is_some();
        if coprime {
            sigma1 += 1;
        }
        let mut inner = RootSum::new(r1 as u64);
        let hlo = vec![1i64; n];
        let hhi = vec![hh; n];
        for_each_in_box(&hlo, &hhi, |h| {
            for j in 0..n {
                y[j] = x[j] + q2i * h[j];
            }
            let iy = grid.index(&y).expect("inside grid");
            let wy = grid.weight[iy];
            if wy == 0.0 {
                return;
            }
            if let Some(a) = grid.e1[iy] {
                inner.add(a as u64, wy);
                if let Some(c) = grid.e2[ix] {
                    shifted.add((a * s1 + c * s2) as u64, wy);
                }
            }
        });
        let sq = inner.value().norm_sqr();
        sigma2_upper.add(sq);
        if coprime {
            sigma2.add(sq);
        }
    });
    let sigma1 = sigma1 as f64;
    let (sigma2, sigma2_upper) = (sigma2.value(), sigma2_upper.value());
    let shifted_route_residual = rel(shifted.value(), t.value() * hn, hn * t.terms as f64);

    // S(h, 0) and T(h) over h ∈ [-H, H]^n.
    let zero = vec![0i64; n];
    let mut expansion = Complex64::new(0.0, 0.0);
    let mut sigma2a = 0.0;
    let mut sigma2b = Complex64::new(0.0, 0.0);
    let mut t_abs = Compensated::new();
    let mut t_h = Vec::new();
    let mut t_h_residual: f64 = 0.0;
    let mass: f64 = grid.weight.iter().map(|w| w * w).sum();
    for_each_in_cube(n, hh, |h| {
        let s = s_pair(&grid, q2i, h, &zero, r1, b);
        let coef: f64 = h.iter().map(|&hj| (hh - hj.abs()) as f64).product();
        expansion += s * coef;
        if h.iter().all(|&hj| hj == 0) {
            sigma2a = hn * s.re;
            return;
        }
        sigma2b += s * coef;
        let th = t_of_h(&grid, chi1, q2i, h, b);
        t_h_residual = t_h_residual.max(rel(th, s, mass));
        t_abs.add(cabs(th));
        t_h.push(THEntry {
            h: h.to_vec(),
            re: th.re,
            im: th.im,
        });
    });
    let expansion_residual = libm::fabs(expansion.re - sigma2_upper) / sigma2_upper.max(1.0)
        + libm::fabs(expansion.im) / sigma2_upper.max(1.0);

    let mut rng = SplitMix64::new(seed);
    let mut shift_residual: f64 = 0.0;
    for _ in 0..pairs {
        let h1: Vec<i64> = (0..n).map(|_| rng.range_i64(1, hh)).collect();
        let h2: Vec<i64> = (0..n).map(|_| rng.range_i64(1, hh)).collect();
        let diff: Vec<i64> = h1.iter().zip(&h2).map(|(a, c)| a - c).collect();
        let direct = s_pair(&grid, q2i, &h1, &h2, r1, radius);
        let reduced = s_pair(&grid, q2i, &diff, &zero, r1, b);
        shift_residual = shift_residual.max(rel(direct, reduced, mass));
    }

    let cauchy_constant = if sigma1 * sigma2 > 0.0 {
        hn * hn * t.abs * t.abs / (sigma1 * sigma2)
    } else if t.abs == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(VdcDecomposition {
        h: hh,
        q1,
        q2,
        b,
        t,
        sigma1,
        sigma2,
        sigma2_upper,
        sigma2_expansion: expansion.re,
        sigma2a,
        sigma2b: sigma2b.re,
        sigma2b_bound: hn * t_abs.value(),
        t_h,
        cauchy_constant,
        shift_residual,
        t_h_residual,
        shifted_route_residual,
        expansion_residual,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Proposition1Report {
    pub reports: Vec<SumReport>,
    pub max_ratio: f64,
}

/// Measured `|T(q1, q2)|` against the three-term bound over a grid of
/// `(χ_{q1}, χ_{q2}, B)`.
pub fn proposition1_constant<W: Weight + ?Sized>(
    f: &MultiPoly,
    grid: &[(CompositeCharacter, CompositeCharacter, i64)],
    w: &W,
    budget: &Budget,
) -> Result<Proposition1Report> {
    if f.degree().unwrap_or(0) < 3 {
        return Err(invalid("f must have degree at least 3"));
    }
    let mut reports = Vec::with_capacity(grid.len());
    for (c1, c2, b) in grid {
        let primes = c1.primes();
        let ok = match primes.len() {
            1 => true,
            2 => primes[1] < 2 * primes[0] && c1.modulus() == primes[0] * primes[1],
            _ => false,
        };
        if !ok || !primes.iter().all(|&p| is_prime(p)) {
            return Err(invalid("q1 must be prime or p1*p2 with p1 < p2 < 2*p1"));
        }
        reports.push(t_full(f, c1, c2, *b, w, budget)?);
    }
    let max_ratio = reports
        .iter()
        .filter_map(|r| r.ratio)
        .fold(0.0, f64::max);
    Ok(Proposition1Report { reports, max_ratio })
}

/// `Σ_{k mod q1} χ(k) = 0` exactly.
pub fn main_term_cancels(chi1: &CompositeCharacter) -> bool {
    let mut acc = ExactRootSum::new(chi1.r() as u64);
    for k in 0..chi1.modulus() {
        if let Some(e) = chi1.exponent(k as i128) {
            acc.add(e as u64, 1);
        }
    }
    acc.is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::character::PowerCharacter;
    use crate::weight::BumpWeight;
    use alloc::sync::Arc;

    fn chi(p: u64, r: u32) -> Arc<PowerCharacter> {
        Arc::new(PowerCharacter::new(p, r).unwrap())
    }

    fn cubic() -> MultiPoly {
        MultiPoly::parse("x1^3 + x2^3", 2).unwrap()
    }

    #[test]
    fn preconditions() {
        let w = BumpWeight::new(2);
        let b = Budget::default();
        let c7 = CompositeCharacter::single(chi(7, 3));
        let c13 = CompositeCharacter::single(chi(13, 3));
        let one = CompositeCharacter::trivial(3);
        assert!(t_full(&cubic(), &one, &c13, 30, &w, &b).is_err());
        assert!(t_full(&cubic(), &c7, &c7, 30, &w, &b).is_err());
        assert!(t_full(&cubic(), &c7, &c13, 12, &w, &b).is_err());
        let principal = CompositeCharacter::twisted(vec![(chi(7, 3), 1), (chi(7, 3), -1)]).unwrap();
        assert!(t_full(&cubic(), &principal, &c13, 30, &w, &b).is_err());
        assert!(vdc_decompose(&cubic(), &c7, &c13, 12, &w, 20, 1, &b).is_err());
        let quad = MultiPoly::parse("x1^2 + x2^2", 2).unwrap();
        assert!(proposition1_constant(&quad, &[(c7, c13, 13)], &w, &b).is_err());
    }

    #[test]
    fn constant_polynomial_factors_out() {
        let w = BumpWeight::new(2);
        let f = MultiPoly::constant(2, 5);
        let c7 = CompositeCharacter::single(chi(7, 3));
        let c13 = CompositeCharacter::single(chi(13, 3));
        let rep = t_full(&f, &c7, &c13, 13, &w, &Budget::default()).unwrap();
        let mut mass = 0.0;
        for_each_in_cube(2, 13, |x| mass += w.scaled(x, 13.0));
        assert!((rep.abs - mass).abs() < 1e-9);
        let expect = (c7.value(5).to_complex() * c13.value(5).to_complex()) * mass;
        assert!(cabs(rep.value() - expect) < 1e-9);
    }

    /// Oracle: T(q1, q2) from `CharValue` complex renderings.
    #[test]
    fn t_full_matches_naive_sum() {
        let w = BumpWeight::new(2);
        let f = cubic();
        let c91 = CompositeCharacter::new(vec![chi(7, 3), chi(13, 3)]).unwrap();
        let rep = t_full(&f, &c91, &CompositeCharacter::trivial(3), 30, &w, &Budget::default()).unwrap();
        let mut naive = Complex64::new(0.0, 0.0);
        for_each_in_cube(2, 30, |x| {
            let v = i128::try_from(f.eval_i64(x).unwrap()).unwrap();
            naive += c91.value(v).to_complex() * w.scaled(x, 30.0);
        });
        assert!(cabs(rep.value() - naive) < 1e-9);
        assert!(rep.abs <= rep.terms as f64);
    }

    #[test]
    fn chain_identities() {
        let w = BumpWeight::new(2);
        let c7 = CompositeCharacter::single(chi(7, 3));
        let c13 = CompositeCharacter::single(chi(13, 3));
        let d = vdc_decompose(&cubic(), &c7, &c13, 26, &w, 20, 9, &Budget::default()).unwrap();
        assert_eq!(d.h, 2);
        assert!(d.shift_residual < 1e-9, "{}", d.shift_residual);
        assert!(d.t_h_residual < 1e-9);
        assert!(d.shifted_route_residual < 1e-9);
        assert!(d.expansion_residual < 1e-9);
        assert!(d.cauchy_holds(), "{}", d.cauchy_constant);
        assert!(d.sigma2b_bound_holds());
        assert!(d.sigma2 <= d.sigma2_upper + 1e-9);
        assert!(d.sigma1 >= 0.0 && d.sigma2a >= 0.0);
        assert_eq!(d.t_h.len(), 24);
    }

    #[test]
    fn zero_weight_gives_zero_chain() {
        struct Nothing;
        impl Weight for Nothing {
            fn dim(&self) -> usize {
                2
            }
            fn factor(&self, _: f64) -> f64 {
                0.0
            }
        }
        let c7 = CompositeCharacter::single(chi(7, 3));
        let c13 = CompositeCharacter::single(chi(13, 3));
        let d = vdc_decompose(&cubic(), &c7, &c13, 26, &Nothing, 5, 1, &Budget::default()).unwrap();
        assert_eq!(d.t.abs, 0.0);
        assert_eq!((d.sigma2, d.sigma2a, d.sigma2b), (0.0, 0.0, 0.0));
        assert_eq!(d.cauchy_constant, 0.0);
    }

    #[test]
    fn cancellation_over_k() {
        assert!(main_term_cancels(&CompositeCharacter::single(chi(7, 3))));
        let twisted = CompositeCharacter::twisted(vec![(chi(31, 3), 1), (chi(37, 3), -1)]).unwrap();
        assert!(main_term_cancels(&twisted));
        let principal = CompositeCharacter::twisted(vec![(chi(7, 3), 1), (chi(7, 3), 2)]).unwrap();
        assert!(!main_term_cancels(&principal));
    }
}
