//! One pipeline per subcommand. Each turns a resolved config into a JSON
//! report and a CSV table.

use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use serde_json::{json, Value};

use powersieve_core::arith::{distinct_prime_factors, is_prime};
use powersieve_core::charsum::{deligne_scan, main_term_deviation, multiplicativity_check, poisson_identity_check, s_q_v};
use powersieve_core::counting::{
    exponent_fit, height_count_cyclic_cover, reference_exponent, weighted_count, CountReport, ExponentKind,
};
use powersieve_core::geometry::{lemma3_histogram, singular_locus_dim};
use powersieve_core::rng::SplitMix64;
use powersieve_core::sieve::{verify_sieve_inequality, SieveSets, SieveWeight};
use powersieve_core::vdc::vdc_decompose;
use powersieve_core::{Budget, BumpWeight, CompositeCharacter, MultiPoly, PowerCharacter};

use crate::config::ExperimentConfig;
use crate::report::Table;

pub const BUDGET_ENV: &str = "POWERSIEVE_BUDGET";
pub const DEFAULT_SEED: u64 = 1;

/// A finished experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub json: Value,
    pub table: Table,
    /// False when a self-check failed; the run exits nonzero.
    pub passed: bool,
}

impl Output {
    fn single(json: Value) -> Result<Self> {
        let table = Table::from_values(std::slice::from_ref(&json))?;
        Ok(Output {
            json,
            table,
            passed: true,
        })
    }
}

/// `N` sets both caps, `BOX,SCAN` sets them separately.
pub fn parse_budget_env(text: &str) -> Result<Budget> {
    let parse = |s: &str| {
        s.trim()
            .parse::<u64>()
            .map_err(|e| anyhow!("{BUDGET_ENV}={text:?}: {e}"))
    };
    match text.split_once(',') {
        Some((a, b)) => Ok(Budget {
            box_points: parse(a)?,
            scan_points: parse(b)?,
        }),
        None => Ok(Budget::uniform(parse(text)?)),
    }
}

/// Defaults, then the environment, then explicit config keys.
pub fn resolve_budget(cfg: &ExperimentConfig, env: Option<&str>) -> Result<Budget> {
    let mut budget = match env {
        Some(text) => parse_budget_env(text)?,
        None => Budget::default(),
    };
    if let Some(b) = cfg.box_points {
        budget.box_points = b;
    }
    if let Some(s) = cfg.scan_points {
        budget.scan_points = s;
    }
    Ok(budget)
}

/// Largest `k` with `xk` in the text.
fn infer_nvars(text: &str) -> usize {
    let bytes = text.as_bytes();
    let mut best = 0;
    for (i, &c) in bytes.iter().enumerate() {
        if c == b'x' {
            let digits: String = text[i + 1..].chars().take_while(char::is_ascii_digit).collect();
            if let Ok(k) = digits.parse::<usize>() {
                best = best.max(k);
            }
        }
    }
    best
}

fn nvars(cfg: &ExperimentConfig) -> Result<usize> {
    let n = match cfg.n {
        Some(n) => n,
        None => infer_nvars(cfg.poly.as_deref().unwrap_or("")).max(infer_nvars(cfg.h.as_deref().unwrap_or(""))),
    };
    if n == 0 {
        bail!("number of variables unknown: pass --n");
    }
    Ok(n)
}

fn parse_poly(text: &str, n: usize, what: &str) -> Result<MultiPoly> {
    MultiPoly::parse(text, n).with_context(|| format!("{what} {text:?}"))
}

fn poly(cfg: &ExperimentConfig, n: usize) -> Result<MultiPoly> {
    let text = cfg.poly.as_deref().ok_or_else(|| anyhow!("--poly is required"))?;
    parse_poly(text, n, "polynomial")
}

fn h_poly(cfg: &ExperimentConfig, n: usize) -> Result<MultiPoly> {
    let text = cfg.h.as_deref().ok_or_else(|| anyhow!("--h is required"))?;
    parse_poly(text, n, "polynomial h")
}

fn required<T: Copy>(v: Option<T>, flag: &str) -> Result<T> {
    v.ok_or_else(|| anyhow!("--{flag} is required"))
}

/// `χ_q` as the product of the order-`r` characters of the primes of a
/// squarefree `q`; `q = 1` gives the principal character.
pub fn character_for(q: u64, r: u32) -> Result<CompositeCharacter> {
    if q == 0 {
        bail!("modulus must be positive");
    }
    if q == 1 {
        return Ok(CompositeCharacter::trivial(r));
    }
    let primes = distinct_prime_factors(q);
    if primes.iter().product::<u64>() != q {
        bail!("modulus {q} is not squarefree");
    }
    let chars = primes
        .into_iter()
        .map(|p| PowerCharacter::new(p, r).map(Arc::new))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CompositeCharacter::new(chars)?)
}

pub fn run(command: &str, cfg: &ExperimentConfig, budget: &Budget) -> Result<Output> {
    match command {
        "count" => count(cfg, budget),
        "sieve" => sieve(cfg, budget),
        "charsum" => charsum(cfg, budget),
        "vdc" => vdc(cfg, budget),
        "poisson" => poisson(cfg, budget),
        "geometry" => geometry(cfg, budget),
        "fit" => fit(cfg, budget),
        "selftest" => crate::selftest::run(cfg.seed.unwrap_or(DEFAULT_SEED), budget),
        other => bail!("unknown command {other:?}"),
    }
}

pub fn count(cfg: &ExperimentConfig, budget: &Budget) -> Result<Output> {
    let b = required(cfg.b, "B")?;
    if b < 1 {
        bail!("B must be at least 1, got {b}");
    }
    let n = nvars(cfg)?;
    let f = poly(cfg, n)?;
    let r = cfg.r.unwrap_or(2);
    let w = BumpWeight::new(n);
    let report = weighted_count(&f, r, b, &w, budget)?;
    let mut json = serde_json::to_value(&report)?;
    if let Some(m) = cfg.m {
        let height = height_count_cyclic_cover(&f, m, r, b, budget)?;
        json["height_count"] = json!(height);
    }
    Output::single(json)
}

pub fn sieve(cfg: &ExperimentConfig, budget: &Budget) -> Result<Output> {
    let n = nvars(cfg)?;
    let f = poly(cfg, n)?;
    let r = cfg.r.unwrap_or(2);
    let b = required(cfg.b, "B")?;
    if b < 1 {
        bail!("B must be at least 1");
    }
    let sets = SieveSets::build(b as u64, cfg.delta.unwrap_or(1.0), cfg.alpha.unwrap_or(2.0 / 3.0), r)?;
    let omega = SieveWeight::from_poly(&f, b, &BumpWeight::new(n), budget)?;
    let report = verify_sieve_inequality(&omega, &sets, cfg.allow_support_violation.unwrap_or(false))?;
    let mut json = serde_json::to_value(&report)?;
    json["u_set"] = json!(sets.u_set);
    json["v_set"] = json!(sets.v_set);
    json["Q"] = json!(sets.q);
    json["alpha"] = json!(sets.alpha);
    json["identities_hold"] = json!(report.decomposition.identities_hold(1e-9));
    Output::single(json)
}

pub fn charsum(cfg: &ExperimentConfig, budget: &Budget) -> Result<Output> {
    let n = nvars(cfg)?;
    let g = poly(cfg, n)?;
    let h = h_poly(cfg, n)?;
    let seed = cfg.seed.unwrap_or(DEFAULT_SEED);
    let draws = cfg.draws.unwrap_or(200);
    let primes = cfg.p_list.clone().unwrap_or_else(|| vec![7, 11, 13, 17]);
    let mut rows = Vec::new();
    for &p in &primes {
        let scan = deligne_scan(p, &h, &g, draws, seed, budget)?;
        let s0 = s_q_v(p, &h, &g, &vec![0; n], budget)?;
        let dev = main_term_deviation(p, &h, &g, budget)?;
        rows.push(json!({
            "p": p,
            "draws": draws,
            "max_ratio": scan.max_ratio,
            "mean_ratio": scan.mean_ratio,
            "S_p0_re": s0.sum_re,
            "S_p0_im": s0.sum_im,
            "main_term_deviation": dev,
        }));
    }
    let table = Table::from_values(&rows)?;
    let mut json = json!({ "h": h.to_string(), "g": g.to_string(), "n": n, "seed": seed, "primes": rows });
    if let Some(q) = cfg.q {
        let ps = distinct_prime_factors(q);
        if ps.len() != 2 || ps[0] * ps[1] != q {
            bail!("q must be a product of two distinct primes");
        }
        let mut rng = SplitMix64::new(seed);
        let mut checks = Vec::new();
        for _ in 0..draws.min(20) {
            let v: Vec<i64> = (0..n).map(|_| rng.range_i64(0, q as i64 - 1)).collect();
            checks.push(multiplicativity_check(ps[0], ps[1], &h, &g, &v, budget)?);
        }
        json["multiplicativity"] = json!({
            "q": q,
            "draws": checks.len(),
            "literal_holds": checks.iter().all(|c| c.literal_holds),
            "twisted_holds": checks.iter().all(|c| c.twisted_holds),
            "max_literal_error": checks.iter().map(|c| c.literal_error).fold(0.0, f64::max),
            "max_twisted_error": checks.iter().map(|c| c.twisted_error).fold(0.0, f64::max),
        });
    }
    Ok(Output {
        json,
        table,
        passed: true,
    })
}

pub fn vdc(cfg: &ExperimentConfig, budget: &Budget) -> Result<Output> {
    let n = nvars(cfg)?;
    let f = poly(cfg, n)?;
    let r = cfg.r.unwrap_or(3);
    let q1 = required(cfg.q1, "q1")?;
    let q2 = required(cfg.q2, "q2")?;
    let b = cfg.b.unwrap_or(2 * q2 as i64);
    let chi1 = character_for(q1, r)?;
    let chi2 = character_for(q2, r)?;
    let w = BumpWeight::new(n);
    let d = vdc_decompose(
        &f,
        &chi1,
        &chi2,
        b,
        &w,
        cfg.pairs.unwrap_or(20),
        cfg.seed.unwrap_or(DEFAULT_SEED),
        budget,
    )?;
    let mut json = serde_json::to_value(&d)?;
    json["cauchy_holds"] = json!(d.cauchy_holds());
    json["Sigma2B_bound_holds"] = json!(d.sigma2b_bound_holds());
    Output::single(json)
}

pub fn poisson(cfg: &ExperimentConfig, budget: &Budget) -> Result<Output> {
    let n = nvars(cfg)?;
    let g = poly(cfg, n)?;
    let h = h_poly(cfg, n)?;
    let q = required(cfg.q, "q")?;
    let l = required(cfg.l, "L")?;
    let w = BumpWeight::new(n);
    let report = poisson_identity_check(q, &h, &g, &w, w.delta(), l, budget)?;
    Output::single(serde_json::to_value(&report)?)
}

pub fn geometry(cfg: &ExperimentConfig, budget: &Budget) -> Result<Output> {
    let n = nvars(cfg)?;
    let f = poly(cfg, n)?;
    let p = required(cfg.p, "p")?;
    let locus = singular_locus_dim(&f, p, cfg.k.unwrap_or(2), budget)?;
    let mut json = serde_json::to_value(&locus)?;
    if let Some(h_box) = cfg.h_box {
        let hist = lemma3_histogram(&f, h_box, p, budget)?;
        json["h_box"] = json!(hist.h_box);
        json["histogram"] = serde_json::to_value(&hist.histogram)?;
        json["histogram_ratios"] = serde_json::to_value(&hist.ratios)?;
        json["histogram_total"] = json!(hist.total);
    }
    Output::single(json)
}

pub fn fit(cfg: &ExperimentConfig, budget: &Budget) -> Result<Output> {
    let n = nvars(cfg)?;
    let f = poly(cfg, n)?;
    let r = cfg.r.unwrap_or(2);
    let bs = cfg.b_list.clone().unwrap_or_else(|| vec![10, 20, 40, 80]);
    let w = BumpWeight::new(n);
    let reports: Vec<CountReport> = bs
        .iter()
        .map(|&b| weighted_count(&f, r, b, &w, budget))
        .collect::<Result<_, _>>()?;
    let pts: Vec<(f64, f64)> = reports.iter().map(|c| (c.b as f64, c.exact_count as f64)).collect();
    let slope = exponent_fit(&pts).ok();
    let c_max = reports
        .iter()
        .map(|c| c.exact_count as f64 / (c.b as f64).powi(n as i32))
        .fold(0.0, f64::max);
    let mut reference = serde_json::Map::new();
    for kind in ExponentKind::ALL {
        if let Ok(e) = reference_exponent(n as i64, kind) {
            reference.insert(
                kind.name().to_string(),
                json!({ "ratio": e.to_string(), "value": *e.numer() as f64 / *e.denom() as f64 }),
            );
        }
    }
    let json = json!({
        "n": n,
        "r": r,
        "poly": f.to_string(),
        "reports": reports,
        "slope": slope,
        "C_max": c_max,
        "reference_exponents": reference,
    });
    Ok(Output {
        json,
        table: Table::from_reports(&reports)?,
        passed: true,
    })
}

/// Seeded sieve weight: `count` integers in `[-support, support]` with
/// weights in `[0, 1)`.
pub fn random_omega(rng: &mut SplitMix64, support: i64, count: usize) -> SieveWeight {
    let pairs: Vec<(i64, f64)> = (0..count)
        .map(|_| (rng.range_i64(-support, support), rng.unit_f64()))
        .collect();
    SieveWeight::from_pairs(pairs).expect("finite weights")
}

/// Primes `≡ 1 (mod r)` below `bound`.
pub fn primes_one_mod(r: u64, bound: u64) -> Vec<u64> {
    (2..bound).filter(|&p| is_prime(p) && p % r == 1).collect()
}
