//! Argument parsing and dispatch. Exit status: 0 on success, 1 for bad
//! input or a failed precondition or self-check, 2 when a point budget
//! would be exceeded.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};

use crate::config::{ExperimentConfig, Format};
use crate::experiments::{self, BUDGET_ENV};
use crate::report::{emit_csv, to_json_string};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_BUDGET: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "powersieve",
    version,
    about = "Count perfect r-th power values of integer polynomials and check the identities behind the power sieve"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Weighted count N_w(B) = Σ_{x ∈ Z^n} w(x/B) #{y ∈ Z : f(x) = y^r}
    ///
    /// The weight is the smooth bump e^{4/3} Π exp(-1/(1-t_i²)). Reports the
    /// plain count of pairs (x, y) with |x_i| <= B as well. With --m, also
    /// counts primitive points of height at most B on the cyclic cover
    /// y^r = F(x) of degree m·r.
    Count(CountArgs),
    /// The r-th power sieve: Σ_n ω(n^r) <= C (A^{-1} Σ ω + main sieve + prime sieve)
    ///
    /// Builds 𝒰 and 𝒱 from primes ≡ 1 mod r in (Q^α, 2Q^α] and
    /// (Q^{1-α}, 2Q^{1-α}] with Q = B^δ, takes ω(n) = Σ_{f(x)=n} w(x/B), and
    /// checks Σ = diagonal + coprime + S(𝒰) + S(𝒱) and S(𝒱) = M(𝒱) - E(𝒱)
    /// where Σ = Σ_n ω(n) |Σ_{q ∈ 𝒰𝒱} χ_q(n)|².
    Sieve(SieveArgs),
    /// Complete sums Σ_{x mod p} e_p(a h(x) + b g(x) + v·x) and S_p(v)
    ///
    /// Scans seeded (a, b, v) for the square-root bound |sum| <= C p^{n/2},
    /// measures |S_p(0) - φ(p) p^{n-2}| / p^{n/2} where
    /// S_q(v) = Σ_{z mod q, q | h(z), (g(z), q) = 1} e_q(v·z), and with --q
    /// compares S_{p1p2}(v) with S_{p1}(v) S_{p2}(v).
    Charsum(CharsumArgs),
    /// Van der Corput differencing of T = Σ_x w(x/B) χ_{q1}(f(x)) χ_{q2}(f(x))
    ///
    /// With H = ⌊B/q2⌋, checks the shift identity H^n T = Σ_h Σ_x of the
    /// sum shifted by q2·h, Cauchy's H^{2n}|T|² <= Σ1 Σ2, and the split of
    /// Σ2 into the h = 0 term and the correlations T(h) of χ_{q1}(f(x + q2 h))
    /// conj χ_{q1}(f(x)).
    Vdc(VdcArgs),
    /// Poisson summation: Σ_{q | h(x), (g(x), q) = 1} W(x/L) against
    /// q^{-2} φ(q) Σ_x W(x/L)
    ///
    /// The residual is compared with Δ L^s q^{(n-s)/2} + Δ L^n p^{(s-n+2)/2} q^{-1}
    /// where s is the singular-locus dimension of the leading form of
    /// h - γ g mod p and Δ bounds the weight's derivatives.
    Poisson(PoissonArgs),
    /// Dimension of {F = 0, ∇F = 0} from point counts over F_{p^k}
    ///
    /// With --h-box, also the histogram of s(h) = dim of the singular locus
    /// of h·∇F over nonzero h ∈ [-H, H]^n, with each count compared with
    /// H^{n-s} + H^n p^{-s}.
    Geometry(GeometryArgs),
    /// Counts over a list of B and the slope of log N against log B
    ///
    /// Reported next to the exponents n - 3n/(2n+10), n - n(n-2)/(6n+4),
    /// n - n/(n+1) and n - 1 of the known upper bounds N ≪ B^θ.
    Fit(FitArgs),
    /// Runs the exact-identity suite; output depends only on the seed
    ///
    /// Characters (χ(m^r) = 1, Σχ = 0, χ(ab) = χ(a)χ(b)), the sieve split of
    /// Σ, the van der Corput chain, CRT multiplicativity of S_q(v),
    /// singular-locus dimensions and a brute-force count.
    Selftest(CommonArgs),
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Flat `key = value` file; flags override its entries
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write the report here instead of stdout
    #[arg(long)]
    output: Option<String>,
    /// json or csv
    #[arg(long)]
    format: Option<Format>,
    #[arg(long)]
    seed: Option<u64>,
    /// Cap on integer points visited by box enumerations
    #[arg(long)]
    box_points: Option<u64>,
    /// Cap on points visited by scans over finite rings
    #[arg(long)]
    scan_points: Option<u64>,
}

#[derive(Debug, Args)]
struct PolyArgs {
    /// Polynomial in x1..xn, e.g. "x1^3 + x2^3"
    #[arg(long, allow_hyphen_values = true)]
    poly: Option<String>,
    /// Number of variables (default: largest xk in the polynomial)
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct CountArgs {
    #[command(flatten)]
    poly: PolyArgs,
    #[arg(long)]
    r: Option<u32>,
    #[arg(long = "B")]
    b: Option<i64>,
    /// Degree ratio m = deg F / r for the height count
    #[arg(long)]
    m: Option<u32>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct SieveArgs {
    #[command(flatten)]
    poly: PolyArgs,
    #[arg(long)]
    r: Option<u32>,
    #[arg(long = "B")]
    b: Option<i64>,
    /// Q = B^delta
    #[arg(long)]
    delta: Option<f64>,
    /// Split exponent in [2/3, 1)
    #[arg(long)]
    alpha: Option<f64>,
    /// Proceed when ω is supported beyond exp(min(U, V))
    #[arg(long)]
    allow_support_violation: bool,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct CharsumArgs {
    /// The polynomial g
    #[command(flatten)]
    poly: PolyArgs,
    /// The polynomial h
    #[arg(long, allow_hyphen_values = true)]
    h: Option<String>,
    /// Comma-separated primes
    #[arg(long)]
    p_list: Option<String>,
    #[arg(long)]
    draws: Option<usize>,
    /// Product of two primes for the multiplicativity check
    #[arg(long)]
    q: Option<u64>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct VdcArgs {
    #[command(flatten)]
    poly: PolyArgs,
    #[arg(long)]
    r: Option<u32>,
    /// Squarefree modulus of the outer character
    #[arg(long)]
    q1: Option<u64>,
    /// Squarefree modulus of the differencing character
    #[arg(long)]
    q2: Option<u64>,
    #[arg(long = "B")]
    b: Option<i64>,
    /// Seeded (h1, h2) pairs for the shift identity
    #[arg(long)]
    pairs: Option<usize>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct PoissonArgs {
    /// The polynomial g
    #[command(flatten)]
    poly: PolyArgs,
    /// The polynomial h
    #[arg(long, allow_hyphen_values = true)]
    h: Option<String>,
    #[arg(long)]
    q: Option<u64>,
    #[arg(long = "L")]
    l: Option<f64>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct GeometryArgs {
    /// The form F
    #[command(flatten)]
    poly: PolyArgs,
    #[arg(long)]
    p: Option<u64>,
    /// Largest extension degree for point counts (1 to 3)
    #[arg(long)]
    k: Option<u32>,
    #[arg(long)]
    h_box: Option<i64>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct FitArgs {
    #[command(flatten)]
    poly: PolyArgs,
    #[arg(long)]
    r: Option<u32>,
    /// Comma-separated box sizes
    #[arg(long = "B-list")]
    b_list: Option<String>,
    #[command(flatten)]
    common: CommonArgs,
}

fn set_list(cfg: &mut ExperimentConfig, key: &str, v: &Option<String>) -> Result<()> {
    if let Some(v) = v {
        cfg.set(key, v)?;
    }
    Ok(())
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Count(_) => "count",
            Command::Sieve(_) => "sieve",
            Command::Charsum(_) => "charsum",
            Command::Vdc(_) => "vdc",
            Command::Poisson(_) => "poisson",
            Command::Geometry(_) => "geometry",
            Command::Fit(_) => "fit",
            Command::Selftest(_) => "selftest",
        }
    }

    fn common(&self) -> &CommonArgs {
        match self {
            Command::Count(a) => &a.common,
            Command::Sieve(a) => &a.common,
            Command::Charsum(a) => &a.common,
            Command::Vdc(a) => &a.common,
            Command::Poisson(a) => &a.common,
            Command::Geometry(a) => &a.common,
            Command::Fit(a) => &a.common,
            Command::Selftest(a) => a,
        }
    }

    /// The keys set on the command line.
    fn flags(&self) -> Result<ExperimentConfig> {
        let c = self.common();
        let mut cfg = ExperimentConfig {
            output: c.output.clone(),
            format: c.format,
            seed: c.seed,
            box_points: c.box_points,
            scan_points: c.scan_points,
            ..Default::default()
        };
        let poly = |cfg: &mut ExperimentConfig, p: &PolyArgs| {
            cfg.poly = p.poly.clone();
            cfg.n = p.n;
        };
        match self {
            Command::Count(a) => {
                poly(&mut cfg, &a.poly);
                (cfg.r, cfg.b, cfg.m) = (a.r, a.b, a.m);
            }
            Command::Sieve(a) => {
                poly(&mut cfg, &a.poly);
                (cfg.r, cfg.b, cfg.delta, cfg.alpha) = (a.r, a.b, a.delta, a.alpha);
                if a.allow_support_violation {
                    cfg.allow_support_violation = Some(true);
                }
            }
            Command::Charsum(a) => {
                poly(&mut cfg, &a.poly);
                (cfg.h, cfg.draws, cfg.q) = (a.h.clone(), a.draws, a.q);
                set_list(&mut cfg, "p_list", &a.p_list)?;
            }
            Command::Vdc(a) => {
                poly(&mut cfg, &a.poly);
                (cfg.r, cfg.q1, cfg.q2, cfg.b, cfg.pairs) = (a.r, a.q1, a.q2, a.b, a.pairs);
            }
            Command::Poisson(a) => {
                poly(&mut cfg, &a.poly);
                (cfg.h, cfg.q, cfg.l) = (a.h.clone(), a.q, a.l);
            }
            Command::Geometry(a) => {
                poly(&mut cfg, &a.poly);
                (cfg.p, cfg.k, cfg.h_box) = (a.p, a.k, a.h_box);
            }
            Command::Fit(a) => {
                poly(&mut cfg, &a.poly);
                cfg.r = a.r;
                set_list(&mut cfg, "B_list", &a.b_list)?;
            }
            Command::Selftest(_) => {}
        }
        Ok(cfg)
    }
}

/// Config file entries overlaid with flags.
fn resolve(cmd: &Command) -> Result<ExperimentConfig> {
    let base = match &cmd.common().config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(c) = &base.command {
        if c != cmd.name() {
            bail!("config file is for {c:?}, not {:?}", cmd.name());
        }
    }
    let mut cfg = base.overlay(&cmd.flags()?);
    cfg.command = Some(cmd.name().to_string());
    Ok(cfg)
}

fn exit_code(err: &anyhow::Error) -> i32 {
    let budget = err.chain().any(|e| {
        matches!(
            e.downcast_ref::<powersieve_core::Error>(),
            Some(powersieve_core::Error::Budget { .. })
        )
    });
    if budget {
        EXIT_BUDGET
    } else {
        EXIT_INPUT
    }
}

fn execute(cmd: &Command, env_budget: Option<&str>, stdout: &mut dyn Write) -> Result<bool> {
    let cfg = resolve(cmd)?;
    let budget = experiments::resolve_budget(&cfg, env_budget)?;
    let out = experiments::run(cmd.name(), &cfg, &budget)?;
    let format = cfg.format.unwrap_or_default();
    match (&cfg.output, format) {
        (Some(path), Format::Csv) => emit_csv(&out.table, path.as_ref())?,
        (Some(path), Format::Json) => std::fs::write(path, to_json_string(&out.json))?,
        (None, Format::Csv) => out.table.write_csv(&mut *stdout)?,
        (None, Format::Json) => stdout.write_all(to_json_string(&out.json).as_bytes())?,
    }
    Ok(out.passed)
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// exit status.
pub fn run_with<I, T>(args: I, env_budget: Option<&str>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(stderr, "{}", e.render());
                return EXIT_INPUT;
            }
            let _ = write!(stdout, "{}", e.render());
            return EXIT_OK;
        }
    };
    match execute(&cli.command, env_budget, stdout) {
        Ok(true) => EXIT_OK,
        Ok(false) => {
            let _ = writeln!(stderr, "error: self-check failed");
            EXIT_INPUT
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e:#}");
            exit_code(&e)
        }
    }
}

/// Entry point for the binary: real argv, environment and streams.
pub fn run() -> i32 {
    let env = std::env::var(BUDGET_ENV).ok();
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(std::env::args_os(), env.as_deref(), &mut stdout.lock(), &mut stderr.lock())
}
