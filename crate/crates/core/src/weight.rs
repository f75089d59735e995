//! Smooth product bump weights, their derivative bound `Δ`, and the
//! Fourier transform of the weight.
//!
//! The one-dimensional profile is `φ(t) = e^{4/3} e^{-1/(1-t²)}` on
//! `|t| < 1` and zero elsewhere, so `φ(±1/2) = 1`, `φ(0) = e^{1/3}` and
//! `φ ≥ 1` on `[-1/2, 1/2]`. The `n`-dimensional weight is
//! `w(t) = Π φ(t_i)` and `w_B(x) = w(x/B)`.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rootsum::{cabs, Compensated};

/// A product weight `w(t) = Π_i factor(t_i)` supported in `[-1, 1]^n`.
pub trait Weight {
    fn dim(&self) -> usize;

    fn factor(&self, t: f64) -> f64;

    fn value(&self, t: &[f64]) -> f64 {
        t.iter().map(|&ti| self.factor(ti)).product()
    }

    /// `w_B(x) = w(x / B)`.
    fn scaled(&self, x: &[i64], scale: f64) -> f64 {
        x.iter().map(|&xi| self.factor(xi as f64 / scale)).product()
    }

    /// `factor(x / B)` for `x = -radius ..= radius`, index `x + radius`.
    fn factor_table(&self, radius: i64, scale: f64) -> Vec<f64> {
        (-radius..=radius)
            .map(|x| self.factor(x as f64 / scale))
            .collect()
    }
}

const BUMP_LOG_SCALE: f64 = 4.0 / 3.0;

/// `φ(t)`.
pub fn bump_profile(t: f64) -> f64 {
    let u = 1.0 - t * t;
    if u <= 0.0 {
        0.0
    } else {
        libm::exp(BUMP_LOG_SCALE - 1.0 / u)
    }
}

/// Polynomials `P_k` with `φ^{(k)}(t) = φ(t) P_k(t) / (1 - t²)^{2k}`,
/// coefficients low to high. From `P_0 = 1` and
/// `P_{k+1} = (P_k' u + 4k t P_k) u - 2t P_k`, `u = 1 - t²`.
pub fn derivative_numerators(max_order: usize) -> Vec<Vec<i128>> {
    let mut out: Vec<Vec<i128>> = vec![vec![1]];
    for k in 0..max_order {
        let pk = &out[k];
        let mut deriv = vec![0i128; pk.len().saturating_sub(1).max(1)];
        for (i, &c) in pk.iter().enumerate().skip(1) {
            deriv[i - 1] = c * i as i128;
        }
        let mut inner = mul_poly(&deriv, &[1, 0, -1]);
        let tp = mul_poly(pk, &[0, 4 * k as i128]);
        add_into(&mut inner, &tp);
        let mut next = mul_poly(&inner, &[1, 0, -1]);
        add_into(&mut next, &mul_poly(pk, &[0, -2]));
        while next.len() > 1 && *next.last().unwrap() == 0 {
            next.pop();
        }
        out.push(next);
    }
    out
}

fn mul_poly(a: &[i128], b: &[i128]) -> Vec<i128> {
    let mut out = vec![0i128; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn add_into(acc: &mut Vec<i128>, b: &[i128]) {
    if acc.len() < b.len() {
        acc.resize(b.len(), 0);
    }
    for (a, &y) in acc.iter_mut().zip(b) {
        *a += y;
    }
}

/// `φ^{(k)}(t)` from the numerator polynomial `P_k`.
pub fn bump_derivative(numerator: &[i128], k: usize, t: f64) -> f64 {
    let u = 1.0 - t * t;
    if u <= 0.0 {
        return 0.0;
    }
    let poly = numerator
        .iter()
        .rev()
        .fold(0.0, |acc, &c| acc * t + c as f64);
    bump_profile(t) * poly / libm::pow(u, 2.0 * k as f64)
}

/// `sup |φ^{(k)}|` for `k = 0..=max_order`, by sampling `samples` points.
pub fn derivative_sups(max_order: usize, samples: usize) -> Vec<f64> {
    let nums = derivative_numerators(max_order);
    nums.iter()
        .enumerate()
        .map(|(k, pk)| {
            (0..=samples)
                .map(|i| -1.0 + 2.0 * i as f64 / samples as f64)
                .map(|t| libm::fabs(bump_derivative(pk, k, t)))
                .fold(0.0, f64::max)
        })
        .collect()
}

/// The standard bump weight in `n` variables.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BumpWeight {
    n: usize,
    delta: f64,
}

impl BumpWeight {
    pub fn new(n: usize) -> Self {
        let sups = derivative_sups(n + 1, 40_000);
        BumpWeight {
            n,
            delta: product_bound(&sups, n, n + 1),
        }
    }

    /// Max modulus of all partial derivatives of order at most `n + 1`.
    pub fn delta(&self) -> f64 {
        self.delta
    }
}

/// `max Π_i sups[α_i]` over multi-indices `α ∈ N^n` with `|α| <= order`.
fn product_bound(sups: &[f64], n: usize, order: usize) -> f64 {
    // best[s]: largest product over the coordinates seen so far with |α| = s
    let mut best = vec![f64::NEG_INFINITY; order + 1];
    best[0] = 1.0;
    for _ in 0..n {
        let mut next = vec![f64::NEG_INFINITY; order + 1];
        for (s, &b) in best.iter().enumerate() {
            if b == f64::NEG_INFINITY {
                continue;
            }
            for (a, &m) in sups.iter().enumerate().take(order + 1 - s) {
                next[s + a] = next[s + a].max(b * m);
            }
        }
        best = next;
    }
    best.into_iter().fold(0.0, f64::max)
}

impl Weight for BumpWeight {
    fn dim(&self) -> usize {
        self.n
    }

    fn factor(&self, t: f64) -> f64 {
        bump_profile(t)
    }
}

/// The indicator of `[-1, 1]^n`; turns weighted counts into plain counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndicatorWeight {
    pub n: usize,
}

impl Weight for IndicatorWeight {
    fn dim(&self) -> usize {
        self.n
    }

    fn factor(&self, t: f64) -> f64 {
        if (-1.0..=1.0).contains(&t) {
            1.0
        } else {
            0.0
        }
    }
}

/// `∫ φ(t) e(-ξ t) dt` by trapezoid doubling. `φ` is flat to all orders at
/// `±1`, so the trapezoid rule converges faster than any power of the step.
pub fn bump_fourier_1d(xi: f64, tol: f64) -> Result<Complex64> {
    let mut prev: Option<Complex64> = None;
    let mut m = 64usize;
    while m <= 1 << 22 {
        let h = 2.0 / m as f64;
        let mut re = Compensated::new();
        let mut im = Compensated::new();
        for i in 1..m {
            let t = -1.0 + i as f64 * h;
            let w = bump_profile(t);
            let (s, c) = libm::sincos(2.0 * core::f64::consts::PI * xi * t);
            re.add(w * c);
            im.add(-w * s);
        }
        let cur = Complex64::new(re.value() * h, im.value() * h);
        if let Some(p) = prev {
            if cabs(cur - p) < tol {
                return Ok(cur);
            }
        }
        prev = Some(cur);
        m *= 2;
    }
    Err(Error::Quadrature(alloc::format!("{xi}")))
}

/// `Ŵ(x) = Π_i φ̂(x_i)` for the product weight.
pub fn bump_fourier(x: &[f64], tol: f64) -> Result<Complex64> {
    x.iter().try_fold(Complex64::new(1.0, 0.0), |acc, &xi| {
        Ok(acc * bump_fourier_1d(xi, tol)?)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayRow {
    pub x: Vec<f64>,
    pub norm: f64,
    pub re: f64,
    pub im: f64,
    pub bound: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayReport {
    pub n: usize,
    pub delta: f64,
    pub rows: Vec<DecayRow>,
    pub max_ratio: f64,
    pub max_imag: f64,
}

/// `|Ŵ(x)| / (Δ min(1, |x|^{-n-1}))` over a grid with `|x| <= 50`.
pub fn fourier_decay_check(w: &BumpWeight, grid: &[Vec<f64>]) -> Result<DecayReport> {
    let n = w.dim();
    let mut rows = Vec::with_capacity(grid.len());
    for x in grid {
        if x.len() != n {
            return Err(crate::error::invalid("grid point has the wrong dimension"));
        }
        let norm = libm::sqrt(x.iter().map(|v| v * v).sum::<f64>());
        if norm > 50.0 {
            return Err(crate::error::invalid("grid point beyond |x| = 50"));
        }
        let value = bump_fourier(x, 1e-12)?;
        let decay = if norm <= 1.0 {
            1.0
        } else {
            libm::pow(norm, -(n as f64) - 1.0)
        };
        let bound = w.delta() * decay;
        rows.push(DecayRow {
            x: x.clone(),
            norm,
            re: value.re,
            im: value.im,
            bound,
            ratio: cabs(value) / bound,
        });
    }
    let max_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let max_imag = rows.iter().map(|r| libm::fabs(r.im)).fold(0.0, f64::max);
    Ok(DecayReport {
        n,
        delta: w.delta(),
        rows,
        max_ratio,
        max_imag,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_values() {
        let w = BumpWeight::new(3);
        let at0 = w.value(&[0.0, 0.0, 0.0]);
        assert!((at0 - libm::exp(1.0)).abs() < 1e-12, "e^(3/3) = e");
        assert!((bump_profile(0.0) - libm::exp(1.0 / 3.0)).abs() < 1e-15);
        assert_eq!(w.value(&[1.0, 0.0, 0.0]), 0.0);
        assert_eq!(w.value(&[0.0, -1.5, 0.0]), 0.0);
        assert!((w.value(&[0.5, 0.5, 0.5]) - 1.0).abs() < 1e-14);
        // φ >= 1 on [-1/2, 1/2], minimum at the ends
        for i in 0..=1000 {
            let t = -0.5 + i as f64 / 1000.0;
            assert!(bump_profile(t) >= 1.0 - 1e-14);
        }
        assert_eq!(w.scaled(&[2, -2, 0], 4.0), w.value(&[0.5, -0.5, 0.0]));
    }

    #[test]
    fn derivative_formula_matches_finite_differences() {
        let nums = derivative_numerators(4);
        assert_eq!(nums[1], [0, -2]);
        let h = 1e-4;
        for &t in &[-0.8, -0.3, 0.0, 0.2, 0.55, 0.9] {
            for k in 1..=4 {
                let lower = |s: f64| bump_derivative(&nums[k - 1], k - 1, s);
                let fd = (lower(t + h) - lower(t - h)) / (2.0 * h);
                let exact = bump_derivative(&nums[k], k, t);
                let scale = exact.abs().max(1.0);
                assert!(
                    (fd - exact).abs() / scale < 1e-4,
                    "k={k} t={t} fd={fd} exact={exact}"
                );
            }
        }
    }

    #[test]
    fn delta_dominates_sampled_partials() {
        let w = BumpWeight::new(2);
        let sups = derivative_sups(3, 40_000);
        assert!((sups[0] - libm::exp(1.0 / 3.0)).abs() < 1e-9);
        // Δ covers every mixed partial of order <= 3.
        for a in 0..=3 {
            for b in 0..=(3 - a) {
                assert!(sups[a] * sups[b] <= w.delta() + 1e-12);
            }
        }
        assert!(w.delta().is_finite() && w.delta() >= sups[0] * sups[0]);
    }

    #[test]
    fn fourier_at_zero_is_volume() {
        // Oracle: Simpson on a fine grid.
        let m = 200_000;
        let h = 2.0 / m as f64;
        let simpson: f64 = (0..=m)
            .map(|i| {
                let t = -1.0 + i as f64 * h;
                let c = if i == 0 || i == m {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                c * bump_profile(t)
            })
            .sum::<f64>()
            * h
            / 3.0;
        let v = bump_fourier_1d(0.0, 1e-12).unwrap();
        assert!((v.re - simpson).abs() < 1e-9);
        assert!(v.im.abs() < 1e-15);
        let w2 = bump_fourier(&[0.0, 0.0], 1e-12).unwrap();
        assert!(w2.re <= 4.0 * libm::exp(1.0 / 3.0) * libm::exp(1.0 / 3.0));
    }

    #[test]
    fn fourier_is_real_and_decays() {
        let w = BumpWeight::new(2);
        let grid: Vec<Vec<f64>> = [0.0, 1.0, 2.0, 4.0, 8.0, 16.0]
            .iter()
            .map(|&r| vec![r / libm::sqrt(2.0), r / libm::sqrt(2.0)])
            .collect();
        let rep = fourier_decay_check(&w, &grid).unwrap();
        assert!(rep.max_imag < 1e-8);
        assert!(rep.max_ratio.is_finite());
        assert!(fourier_decay_check(&w, &[vec![40.0, 40.0]]).is_err());
    }

    #[test]
    fn indicator() {
        let w = IndicatorWeight { n: 2 };
        assert_eq!(w.scaled(&[3, -3], 3.0), 1.0);
        assert_eq!(w.scaled(&[4, 0], 3.0), 0.0);
    }
}
