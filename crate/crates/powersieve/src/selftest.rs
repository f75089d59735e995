//! The exact-identity suite behind `powersieve selftest`. Every check is a
//! pure function of the seed, so two runs print the same bytes.

use std::sync::Arc;

use anyhow::Result;
use serde_json::{json, Value};

use powersieve_core::charsum::multiplicativity_check;
use powersieve_core::counting::weighted_count;
use powersieve_core::geometry::singular_locus_dim;
use powersieve_core::rng::SplitMix64;
use powersieve_core::rootsum::ExactRootSum;
use powersieve_core::sieve::{sigma_decomposition, SieveSets, SieveWeight};
use powersieve_core::vdc::{main_term_cancels, vdc_decompose};
use powersieve_core::weight::IndicatorWeight;
use powersieve_core::{Budget, BumpWeight, CompositeCharacter, MultiPoly, PowerCharacter};

use crate::experiments::{primes_one_mod, random_omega, Output};
use crate::report::Table;

struct Check {
    name: &'static str,
    passed: bool,
    detail: Value,
}

fn poly(text: &str, n: usize) -> MultiPoly {
    MultiPoly::parse(text, n).expect("fixed polynomial parses")
}

/// Power residues map to 1, the full sum vanishes exactly and the
/// character is multiplicative, for every `p ≡ 1 (mod r)` below 200.
fn characters(rng: &mut SplitMix64) -> Result<Check> {
    let mut tested = 0;
    let mut failures = Vec::new();
    for r in [2u32, 3, 4] {
        for p in primes_one_mod(r as u64, 200) {
            let chi = PowerCharacter::new(p, r)?;
            let mut sum = ExactRootSum::new(r as u64);
            for m in 1..p {
                sum.add(chi.exponent(m as i128).expect("unit") as u64, 1);
                let power = (m as u128).pow(r) % p as u128;
                if chi.exponent(power as i128) != Some(0) {
                    failures.push(json!({"r": r, "p": p, "residue_of": m}));
                }
            }
            if !sum.is_zero() {
                failures.push(json!({"r": r, "p": p, "sum": "nonzero"}));
            }
            for _ in 0..50 {
                let a = rng.range_i64(1, p as i64 - 1) as i128;
                let b = rng.range_i64(1, p as i64 - 1) as i128;
                let lhs = chi.exponent(a * b).expect("unit");
                let rhs = (chi.exponent(a).expect("unit") + chi.exponent(b).expect("unit")) % r;
                if lhs != rhs {
                    failures.push(json!({"r": r, "p": p, "a": a, "b": b}));
                }
            }
            tested += 1;
        }
    }
    Ok(Check {
        name: "characters",
        passed: failures.is_empty(),
        detail: json!({"characters": tested, "failures": failures}),
    })
}

fn sieve_random(rng: &mut SplitMix64) -> Result<Check> {
    let sets = SieveSets::from_primes(2, vec![11, 13, 17, 19], vec![5, 7])?;
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let omega = random_omega(rng, 2000, 60);
        let d = sigma_decomposition(&omega, &sets)?;
        worst = worst.max(d.split_residual).max(d.sv_residual);
    }
    Ok(Check {
        name: "sieve_decomposition_random",
        passed: worst <= 1e-9,
        detail: json!({"cases": 10, "max_residual": worst}),
    })
}

fn sieve_polynomial(budget: &Budget) -> Result<Check> {
    let f = poly("x1^3 + x2^3", 2);
    let sets = SieveSets::build(30, 1.0, 2.0 / 3.0, 2)?;
    let omega = SieveWeight::from_poly(&f, 30, &BumpWeight::new(2), budget)?;
    let d = sigma_decomposition(&omega, &sets)?;
    Ok(Check {
        name: "sieve_decomposition_polynomial",
        passed: d.identities_hold(1e-9),
        detail: json!({"Sigma": d.sigma, "split_residual": d.split_residual, "sv_residual": d.sv_residual}),
    })
}

fn vdc_chain(seed: u64, budget: &Budget) -> Result<Check> {
    let chi = |p| Ok::<_, anyhow::Error>(CompositeCharacter::single(Arc::new(PowerCharacter::new(p, 3)?)));
    let (c7, c13) = (chi(7)?, chi(13)?);
    let d = vdc_decompose(&poly("x1^3 + x2^3", 2), &c7, &c13, 26, &BumpWeight::new(2), 20, seed, budget)?;
    let residual = d
        .shift_residual
        .max(d.t_h_residual)
        .max(d.shifted_route_residual)
        .max(d.expansion_residual);
    Ok(Check {
        name: "van_der_corput_chain",
        passed: residual < 1e-9 && d.cauchy_holds() && d.sigma2b_bound_holds() && main_term_cancels(&c7),
        detail: json!({"max_residual": residual, "cauchy_constant": d.cauchy_constant}),
    })
}

fn multiplicativity(rng: &mut SplitMix64, budget: &Budget) -> Result<Check> {
    let (h, g) = (poly("x1^2 + x2^2", 2), poly("x1^3 + x2^3", 2));
    let affine = poly("x1 + x2 - 1", 2);
    let mut literal = true;
    let mut twisted = true;
    for _ in 0..5 {
        let v = [rng.range_i64(0, 34), rng.range_i64(0, 34)];
        let rep = multiplicativity_check(5, 7, &h, &g, &v, budget)?;
        literal &= rep.literal_holds;
        twisted &= rep.twisted_holds;
        twisted &= multiplicativity_check(5, 7, &affine, &g, &v, budget)?.twisted_holds;
    }
    Ok(Check {
        name: "crt_multiplicativity",
        passed: literal && twisted,
        detail: json!({"literal_homogeneous": literal, "twisted": twisted}),
    })
}

fn singular_loci(budget: &Budget) -> Result<Check> {
    let quadric = singular_locus_dim(&poly("x1^2 + x2^2 + x3^2", 3), 7, 2, budget)?;
    let square = singular_locus_dim(&poly("x1^2", 3), 7, 2, budget)?;
    Ok(Check {
        name: "singular_locus",
        passed: quadric.dim_estimate == 0 && square.dim_estimate == 2,
        detail: json!({"diagonal_quadric": quadric.dim_estimate, "x1^2": square.dim_estimate}),
    })
}

fn counting(budget: &Budget) -> Result<Check> {
    let f = poly("x1^3 + x2^3", 2);
    let rep = weighted_count(&f, 2, 10, &IndicatorWeight { n: 2 }, budget)?;
    let mut brute = 0u64;
    for x1 in -10i64..=10 {
        for x2 in -10i64..=10 {
            let v = x1.pow(3) + x2.pow(3);
            brute += (-100i64..=100).filter(|y| y * y == v).count() as u64;
        }
    }
    Ok(Check {
        name: "counting_oracle",
        passed: rep.exact_count == brute && rep.weighted_count == brute as f64,
        detail: json!({"count": rep.exact_count, "oracle": brute}),
    })
}

pub fn run(seed: u64, budget: &Budget) -> Result<Output> {
    let mut rng = SplitMix64::new(seed);
    let checks = [characters(&mut rng)?,
        sieve_random(&mut rng)?,
        sieve_polynomial(budget)?,
        vdc_chain(seed, budget)?,
        multiplicativity(&mut rng, budget)?,
        singular_loci(budget)?,
        counting(budget)?];
    let passed = checks.iter().all(|c| c.passed);
    let rows: Vec<Value> = checks
        .iter()
        .map(|c| json!({"name": c.name, "passed": c.passed, "detail": c.detail}))
        .collect();
    Ok(Output {
        json: json!({"seed": seed, "passed": passed, "checks": rows}),
        table: Table::from_values(&rows)?,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes_and_repeats() {
        let a = run(7, &Budget::default()).unwrap();
        assert!(a.passed, "{}", a.json);
        let b = run(7, &Budget::default()).unwrap();
        assert_eq!(a.json.to_string(), b.json.to_string());
    }
}
