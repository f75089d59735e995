//! Flat `key = value` experiment files. `#` starts a comment; later keys
//! override earlier ones; flags override the file.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            _ => bail!("unknown format {s:?} (json|csv)"),
        }
    }
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

/// Every setting an experiment can read. Unset keys fall back to the
/// defaults of the subcommand.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentConfig {
    pub command: Option<String>,
    pub poly: Option<String>,
    pub h: Option<String>,
    pub n: Option<usize>,
    pub r: Option<u32>,
    pub m: Option<u32>,
    pub d: Option<u32>,
    pub b: Option<i64>,
    pub b_list: Option<Vec<i64>>,
    pub p: Option<u64>,
    pub p_list: Option<Vec<u64>>,
    pub q: Option<u64>,
    pub q1: Option<u64>,
    pub q2: Option<u64>,
    pub l: Option<f64>,
    pub delta: Option<f64>,
    pub alpha: Option<f64>,
    pub h_box: Option<i64>,
    pub k: Option<u32>,
    pub draws: Option<usize>,
    pub pairs: Option<usize>,
    pub seed: Option<u64>,
    pub box_points: Option<u64>,
    pub scan_points: Option<u64>,
    pub allow_support_violation: Option<bool>,
    pub output: Option<String>,
    pub format: Option<Format>,
}

fn list<T: FromStr>(s: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .map(|t| t.trim().parse::<T>().map_err(|e| anyhow!("{t:?}: {e}")))
        .collect()
}

fn scalar<T: FromStr>(s: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    s.parse::<T>().map_err(|e| anyhow!("{s:?}: {e}"))
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = ExperimentConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected key = value", lineno + 1))?;
            c.set(key.trim(), value.trim())
                .with_context(|| format!("line {}", lineno + 1))?;
        }
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "command" => self.command = Some(v.to_string()),
            "poly" => self.poly = Some(v.to_string()),
            "h" => self.h = Some(v.to_string()),
            "n" => self.n = Some(scalar(v)?),
            "r" => self.r = Some(scalar(v)?),
            "m" => self.m = Some(scalar(v)?),
            "d" => self.d = Some(scalar(v)?),
            "B" => self.b = Some(scalar(v)?),
            "B_list" => self.b_list = Some(list(v)?),
            "p" => self.p = Some(scalar(v)?),
            "p_list" => self.p_list = Some(list(v)?),
            "q" => self.q = Some(scalar(v)?),
            "q1" => self.q1 = Some(scalar(v)?),
            "q2" => self.q2 = Some(scalar(v)?),
            "L" => self.l = Some(scalar(v)?),
            "delta" => self.delta = Some(scalar(v)?),
            "alpha" => self.alpha = Some(scalar(v)?),
            "h_box" => self.h_box = Some(scalar(v)?),
            "k" => self.k = Some(scalar(v)?),
            "draws" => self.draws = Some(scalar(v)?),
            "pairs" => self.pairs = Some(scalar(v)?),
            "seed" => self.seed = Some(scalar(v)?),
            "box_points" => self.box_points = Some(scalar(v)?),
            "scan_points" => self.scan_points = Some(scalar(v)?),
            "allow_support_violation" => self.allow_support_violation = Some(scalar(v)?),
            "output" => self.output = Some(v.to_string()),
            "format" => self.format = Some(v.parse()?),
            _ => bail!("unknown key {key:?}"),
        }
        Ok(())
    }

    /// Canonical text: set keys only, one per line, fixed order.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                let _ = writeln!(out, "{k} = {v}");
            }
        };
        put("command", self.command.clone());
        put("poly", self.poly.clone());
        put("h", self.h.clone());
        put("n", self.n.map(|x| x.to_string()));
        put("r", self.r.map(|x| x.to_string()));
        put("m", self.m.map(|x| x.to_string()));
        put("d", self.d.map(|x| x.to_string()));
        put("B", self.b.map(|x| x.to_string()));
        put("B_list", self.b_list.as_deref().map(join));
        put("p", self.p.map(|x| x.to_string()));
        put("p_list", self.p_list.as_deref().map(join));
        put("q", self.q.map(|x| x.to_string()));
        put("q1", self.q1.map(|x| x.to_string()));
        put("q2", self.q2.map(|x| x.to_string()));
        put("L", self.l.map(|x| x.to_string()));
        put("delta", self.delta.map(|x| x.to_string()));
        put("alpha", self.alpha.map(|x| x.to_string()));
        put("h_box", self.h_box.map(|x| x.to_string()));
        put("k", self.k.map(|x| x.to_string()));
        put("draws", self.draws.map(|x| x.to_string()));
        put("pairs", self.pairs.map(|x| x.to_string()));
        put("seed", self.seed.map(|x| x.to_string()));
        put("box_points", self.box_points.map(|x| x.to_string()));
        put("scan_points", self.scan_points.map(|x| x.to_string()));
        put(
            "allow_support_violation",
            self.allow_support_violation.map(|x| x.to_string()),
        );
        put("output", self.output.clone());
        put("format", self.format.map(|f| f.name().to_string()));
        out
    }

    /// Keeps `self`'s value wherever `other` leaves a key unset.
    pub fn overlay(mut self, other: &ExperimentConfig) -> Self {
        macro_rules! take {
            ($($f:ident),*) => {$(
                if other.$f.is_some() {
                    self.$f = other.$f.clone();
                }
            )*};
        }
        take!(
            command, poly, h, n, r, m, d, b, b_list, p, p_list, q, q1, q2, l, delta, alpha,
            h_box, k, draws, pairs, seed, box_points, scan_points, allow_support_violation,
            output, format
        );
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_echo() {
        let text = "# sum of two cubes\ncommand = count\npoly = x1^3 + x2^3  # f\nn = 2\nr=2\nB = 20\nB_list = 10, 20,40\nL = 2.5\nformat = csv\n";
        let c = ExperimentConfig::parse(text).unwrap();
        assert_eq!(c.poly.as_deref(), Some("x1^3 + x2^3"));
        assert_eq!(c.b_list, Some(vec![10, 20, 40]));
        assert_eq!(c.format, Some(Format::Csv));
        let canon = c.serialize();
        assert_eq!(ExperimentConfig::parse(&canon).unwrap().serialize(), canon);
        assert!(canon.contains("B_list = 10,20,40\n"));
    }

    #[test]
    fn errors_and_overlay() {
        assert!(ExperimentConfig::parse("bogus = 1").is_err());
        assert!(ExperimentConfig::parse("n = two").is_err());
        assert!(ExperimentConfig::parse("just words").is_err());
        let file = ExperimentConfig::parse("n = 2\nr = 3").unwrap();
        let flags = ExperimentConfig {
            r: Some(2),
            ..Default::default()
        };
        let merged = file.overlay(&flags);
        assert_eq!((merged.n, merged.r), (Some(2), Some(2)));
    }
}
