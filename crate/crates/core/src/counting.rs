//! Exact and weighted counts of `r`-th power values over integer boxes,
//! height counts on cyclic covers, and the reference exponents.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_integer::Integer;
use num_rational::Ratio;
use serde::Serialize;

use crate::arith::{rth_root_multiplicity_big, rth_root_multiplicity_i128};
use crate::budget::{pow_count, Budget};
use crate::error::{invalid, Result};
use crate::lattice::for_each_in_cube;
use crate::poly::{IntEvaluator, MultiPoly};
use crate::rootsum::Compensated;
use crate::weight::Weight;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountReport {
    #[serde(rename = "B")]
    pub b: i64,
    pub r: u32,
    pub poly: String,
    /// Pairs `(y, x)` with `f(x) = y^r`, `x` in `[-B, B]^n`.
    pub exact_count: u64,
    /// `N_{w,B}(f)`.
    pub weighted_count: f64,
    /// `ω(0)`, the weight of the zero locus.
    pub zero_count: f64,
}

pub(crate) fn check_box_budget(n: usize, b: i64, budget: &Budget) -> Result<()> {
    budget.check_box("box enumeration", pow_count(2 * b as u128 + 1, n as u32))
}

/// Number of integers `y` with `y^r = f(x)`.
#[inline]
pub(crate) fn root_multiplicity(eval: &IntEvaluator, x: &[i64], r: u32) -> u32 {
    match eval.eval_i128(x) {
        Some(v) => rth_root_multiplicity_i128(v, r),
        None => rth_root_multiplicity_big(&eval.eval(x), r),
    }
}

/// Visits `[-B, B]^n` and hands each point to `f` with its weight `w_B(x)`.
pub(crate) fn for_each_weighted<W: Weight + ?Sized, F: FnMut(&[i64], f64)>(
    n: usize,
    b: i64,
    w: &W,
    mut f: F,
) {
    let table = w.factor_table(b, b as f64);
    for_each_in_cube(n, b, |x| {
        let weight: f64 = x.iter().map(|&xi| table[(xi + b) as usize]).product();
        f(x, weight)
    });
}

fn check_count_args<W: Weight + ?Sized>(f: &MultiPoly, b: i64, w: &W) -> Result<()> {
    if b < 1 {
        return Err(invalid("B must be at least 1"));
    }
    if w.dim() != f.nvars() {
        return Err(invalid("weight dimension differs from the number of variables"));
    }
    Ok(())
}

/// `N_{w,B}(f) = Σ_y Σ_{f(x) = y^r} w_B(x)` by exhaustive enumeration.
pub fn weighted_count<W: Weight + ?Sized>(
    f: &MultiPoly,
    r: u32,
    b: i64,
    w: &W,
    budget: &Budget,
) -> Result<CountReport> {
    if r < 2 {
        return Err(invalid("r must be at least 2"));
    }
    check_count_args(f, b, w)?;
    let n = f.nvars();
    check_box_budget(n, b, budget)?;
    let eval = IntEvaluator::new(f);
    let mut exact = 0u64;
    let mut weighted = Compensated::new();
    let mut zero = Compensated::new();
    for_each_weighted(n, b, w, |x, wx| {
        let mult = root_multiplicity(&eval, x, r);
        if mult == 0 {
            return;
        }
        exact += mult as u64;
        weighted.add(mult as f64 * wx);
        let is_zero = match eval.eval_i128(x) {
            Some(v) => v == 0,
            None => false,
        };
        if is_zero {
            zero.add(wx);
        }
    });
    Ok(CountReport {
        b,
        r,
        poly: f.to_string(),
        exact_count: exact,
        weighted_count: weighted.value(),
        zero_count: zero.value(),
    })
}

/// `ω(0) = Σ_{f(x) = 0} w_B(x)`.
pub fn zero_locus_count<W: Weight + ?Sized>(
    f: &MultiPoly,
    b: i64,
    w: &W,
    budget: &Budget,
) -> Result<f64> {
    check_count_args(f, b, w)?;
    check_box_budget(f.nvars(), b, budget)?;
    let eval = IntEvaluator::new(f);
    let mut acc = Compensated::new();
    for_each_weighted(f.nvars(), b, w, |x, wx| {
        let vanishes = match eval.eval_i128(x) {
            Some(v) => v == 0,
            None => false,
        };
        if vanishes {
            acc.add(wx);
        }
    });
    Ok(acc.value())
}

/// Primitive `x` with first nonzero coordinate positive and
/// `max |x_i| <= B` such that `F(x) = y^r` is solvable. `F` must be a form
/// of degree `m r`.
pub fn height_count_cyclic_cover(
    form: &MultiPoly,
    m: u32,
    r: u32,
    b: i64,
    budget: &Budget,
) -> Result<u64> {
    if r < 2 || m < 1 {
        return Err(invalid("need m >= 1 and r >= 2"));
    }
    if !form.is_homogeneous() || form.is_zero() {
        return Err(invalid("F must be a nonzero form"));
    }
    if form.degree() != Some(m * r) {
        return Err(invalid("degree of F differs from m*r"));
    }
    if b < 1 {
        return Ok(0);
    }
    let n = form.nvars();
    check_box_budget(n, b, budget)?;
    let eval = IntEvaluator::new(form);
    let mut count = 0u64;
    for_each_in_cube(n, b, |x| {
        let lead = x.iter().find(|&&v| v != 0);
        if lead.is_none_or(|&v| v < 0) {
            return;
        }
        if x.iter().fold(0i64, |g, &v| g.gcd(&v)) != 1 {
            return;
        }
        if root_multiplicity(&eval, x, r) > 0 {
            count += 1;
        }
    });
    Ok(count)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExponentKind {
    Theorem1High,
    Theorem1Low,
    Munshi,
    Serre,
}

impl ExponentKind {
    pub const ALL: [ExponentKind; 4] = [
        ExponentKind::Theorem1High,
        ExponentKind::Theorem1Low,
        ExponentKind::Munshi,
        ExponentKind::Serre,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExponentKind::Theorem1High => "theorem1_high",
            ExponentKind::Theorem1Low => "theorem1_low",
            ExponentKind::Munshi => "munshi",
            ExponentKind::Serre => "serre",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

/// Exponent of `B` in the upper bounds: `n - 3n/(2n+10)`,
/// `n - n(n-2)/(6n+4)`, `n - n/(n+1)` and `n - 1`.
pub fn reference_exponent(n: i64, kind: ExponentKind) -> Result<Ratio<i64>> {
    if n < 2 {
        return Err(invalid("n must be at least 2"));
    }
    let whole = Ratio::from_integer(n);
    let saving = match kind {
        ExponentKind::Theorem1High => Ratio::new(3 * n, 2 * n + 10),
        ExponentKind::Theorem1Low => Ratio::new(n * (n - 2), 6 * n + 4),
        ExponentKind::Munshi => Ratio::new(n, n + 1),
        ExponentKind::Serre => Ratio::from_integer(1),
    };
    Ok(whole - saving)
}

/// Least-squares slope of `log N` against `log B`.
pub fn exponent_fit(counts: &[(f64, f64)]) -> Result<f64> {
    if counts.len() < 3 {
        return Err(invalid("need at least 3 points"));
    }
    if counts.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(invalid("B must be strictly increasing"));
    }
    if counts.iter().any(|&(b, c)| b <= 0.0 || c <= 0.0) {
        return Err(invalid("B and N must be positive"));
    }
    let pts: Vec<(f64, f64)> = counts
        .iter()
        .map(|&(b, c)| (libm::log(b), libm::log(c)))
        .collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weight::{BumpWeight, IndicatorWeight};

    fn p(s: &str, n: usize) -> MultiPoly {
        MultiPoly::parse(s, n).unwrap()
    }

    /// Direct oracle: evaluates with BigInt and searches for roots by
    /// brute force over `|y| <= |f(x)|`.
    fn oracle_pairs(f: &MultiPoly, r: u32, b: i64, half: bool) -> u64 {
        let mut total = 0;
        let bound = if half { b / 2 } else { b };
        for_each_in_cube(f.nvars(), bound, |x| {
            let v = f.eval_i64(x).unwrap();
            let v: i64 = v.try_into().unwrap();
            let lim = (v.unsigned_abs() as f64).sqrt() as i64 + 2;
            total += (-lim..=lim)
                .filter(|&y| (y as i128).pow(r) == v as i128)
                .count() as u64;
        });
        total
    }

    #[test]
    fn linear_form_example() {
        let f = p("x1", 1);
        let w = BumpWeight::new(1);
        let rep = weighted_count(&f, 2, 4, &w, &Budget::default()).unwrap();
        // x1 in {0, 1, 4}: y = 0; y = ±1; y = ±2
        assert_eq!(rep.exact_count, 5);
        let expect = w.value(&[0.0]) + 2.0 * w.value(&[0.25]) + 2.0 * w.value(&[1.0]);
        assert!((rep.weighted_count - expect).abs() < 1e-12);
        assert!((rep.zero_count - w.value(&[0.0])).abs() < 1e-15);
    }

    #[test]
    fn constant_square() {
        let f = p("1", 1);
        let w = BumpWeight::new(1);
        let rep = weighted_count(&f, 2, 1, &w, &Budget::default()).unwrap();
        assert_eq!(rep.exact_count, 6);
        // w_1(±1) = 0, so only x = 0 carries weight
        assert!((rep.weighted_count - 2.0 * libm::exp(1.0 / 3.0)).abs() < 1e-12);
        assert_eq!(zero_locus_count(&f, 4, &w, &Budget::default()).unwrap(), 0.0);
    }

    #[test]
    fn zero_locus_of_sum_of_cubes() {
        let f = p("x1^3 + x2^3", 2);
        let w = BumpWeight::new(2);
        let z = zero_locus_count(&f, 5, &w, &Budget::default()).unwrap();
        let expect: f64 = (-5..=5)
            .map(|t| w.scaled(&[t, -t], 5.0))
            .sum();
        assert!((z - expect).abs() < 1e-12);
        let line = zero_locus_count(&p("x1", 2), 3, &w, &Budget::default()).unwrap();
        let expect: f64 = (-3..=3).map(|t| w.scaled(&[0, t], 3.0)).sum();
        assert!((line - expect).abs() < 1e-12);
    }

    #[test]
    fn indicator_weight_matches_oracle() {
        for (s, n, r, b) in [
            ("x1^3 + x2^3", 2, 2, 12),
            ("x1^2 + x2^2 - 3", 2, 2, 15),
            ("x1*x2 + x3", 3, 3, 5),
            ("x1^2 - 2*x2^2", 2, 4, 10),
        ] {
            let f = p(s, n);
            let w = IndicatorWeight { n };
            let rep = weighted_count(&f, r, b, &w, &Budget::default()).unwrap();
            let oracle = oracle_pairs(&f, r, b, false);
            assert_eq!(rep.exact_count, oracle, "{s}");
            assert_eq!(rep.weighted_count, oracle as f64, "{s}");
        }
    }

    #[test]
    fn bump_count_dominates_half_box() {
        let f = p("x1^3 + x2^3", 2);
        let w = BumpWeight::new(2);
        for b in [2, 5, 10, 17] {
            let rep = weighted_count(&f, 2, b, &w, &Budget::default()).unwrap();
            assert!(rep.weighted_count + 1e-9 >= oracle_pairs(&f, 2, b, true) as f64);
        }
    }

    #[test]
    fn budget_is_enforced() {
        let f = p("x1 + x2 + x3", 3);
        let w = BumpWeight::new(3);
        let err = weighted_count(&f, 2, 10, &w, &Budget::uniform(1000)).unwrap_err();
        assert!(matches!(err, crate::Error::Budget { .. }));
    }

    #[test]
    fn height_count_examples() {
        let f = p("x1^2 + x2^2", 2);
        assert_eq!(height_count_cyclic_cover(&f, 1, 2, 1, &Budget::default()).unwrap(), 2);
        assert_eq!(height_count_cyclic_cover(&f, 1, 2, 0, &Budget::default()).unwrap(), 0);
        assert!(height_count_cyclic_cover(&f, 2, 2, 1, &Budget::default()).is_err());
        assert!(height_count_cyclic_cover(&p("x1^2 + x2", 2), 1, 2, 1, &Budget::default()).is_err());
        // x1^4 is always a square: every normalized primitive vector counts
        let g = p("x1^4", 2);
        let all = height_count_cyclic_cover(&g, 2, 2, 2, &Budget::default()).unwrap();
        // hand count: (1,-2..2), (2,±1), (0,1) → 5 + 2 + 1
        assert_eq!(all, 8);
    }

    #[test]
    fn height_count_below_weighted_count() {
        let f = p("x1^2 + x2^2", 2);
        let w = BumpWeight::new(2);
        for b in 1..8 {
            let h = height_count_cyclic_cover(&f, 1, 2, b, &Budget::default()).unwrap();
            let n = weighted_count(&f, 2, 2 * b, &w, &Budget::default()).unwrap();
            assert!(h as f64 <= n.weighted_count, "B={b}");
        }
    }

    #[test]
    fn reference_exponents() {
        use ExponentKind::*;
        assert_eq!(reference_exponent(9, Theorem1High).unwrap(), Ratio::new(9 * 28 - 27, 28));
        let hi = reference_exponent(8, Theorem1High).unwrap();
        let lo = reference_exponent(8, Theorem1Low).unwrap();
        assert_eq!(hi, lo);
        assert_eq!(hi, Ratio::new(8 * 13 - 12, 13));
        assert_eq!(reference_exponent(2, Theorem1Low).unwrap(), Ratio::from_integer(2));
        assert_eq!(reference_exponent(4, Serre).unwrap(), Ratio::from_integer(3));
        assert_eq!(reference_exponent(3, Munshi).unwrap(), Ratio::new(9, 4));
        assert!(reference_exponent(1, Serre).is_err());
        assert_eq!(ExponentKind::from_name("munshi"), Some(Munshi));
    }

    #[test]
    fn fit_recovers_power_laws() {
        let sq: Vec<(f64, f64)> = [10.0, 20.0, 40.0].iter().map(|&b| (b, b * b)).collect();
        assert!((exponent_fit(&sq).unwrap() - 2.0).abs() < 1e-9);
        let cube: Vec<(f64, f64)> = [3.0, 7.0, 11.0, 50.0]
            .iter()
            .map(|&b| (b, 0.37 * b * b * b))
            .collect();
        assert!((exponent_fit(&cube).unwrap() - 3.0).abs() < 1e-9);
        assert!(exponent_fit(&sq[..2]).is_err());
        assert!(exponent_fit(&[(2.0, 1.0), (1.0, 1.0), (3.0, 1.0)]).is_err());
    }
}
