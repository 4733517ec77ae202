use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::certifier::CertifierConfig;
use crate::error::{invalid, Error, Result};

/// An edge probability, possibly depending on `n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ParamSpec {
    /// `const:<x>`
    Const(f64),
    /// `pow:<c>,<alpha>`: `c n^alpha`.
    Pow { c: f64, alpha: f64 },
}

impl ParamSpec {
    pub fn eval(&self, n: usize) -> f64 {
        match *self {
            ParamSpec::Const(x) => x,
            ParamSpec::Pow { c, alpha } => c * (n as f64).powf(alpha),
        }
    }
}

impl FromStr for ParamSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            Error::InvalidInput(format!(
                "bad probability spec {s:?}; use const:<x> or pow:<c>,<alpha>"
            ))
        };
        let number = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
        match s.split_once(':') {
            Some(("const", x)) => Ok(ParamSpec::Const(number(x)?)),
            Some(("pow", rest)) => {
                let (c, alpha) = rest.split_once(',').ok_or_else(bad)?;
                Ok(ParamSpec::Pow {
                    c: number(c)?,
                    alpha: number(alpha)?,
                })
            }
            None => Ok(ParamSpec::Const(number(s)?)),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for ParamSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamSpec::Const(x) => write!(f, "const:{x}"),
            ParamSpec::Pow { c, alpha } => write!(f, "pow:{c},{alpha}"),
        }
    }
}

impl Serialize for ParamSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ParamSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(x) => Ok(ParamSpec::Const(x)),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub n: Vec<usize>,
    pub k: Vec<usize>,
    pub p: Vec<ParamSpec>,
    pub q: Vec<ParamSpec>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepMode {
    /// Certifier lower bound on a sampled pair.
    Certify,
    /// Exact discrepancy by enumeration (small `n` only).
    Oracle,
    /// `n Λ(m, q, log n)`, the unified predicted order.
    Bounds,
    /// The upper envelope `λ + ε`.
    Envelope,
}

impl SweepMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepMode::Certify => "certify",
            SweepMode::Oracle => "oracle",
            SweepMode::Bounds => "bounds",
            SweepMode::Envelope => "envelope",
        }
    }
}

impl FromStr for SweepMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "certify" => Ok(SweepMode::Certify),
            "oracle" => Ok(SweepMode::Oracle),
            "bounds" => Ok(SweepMode::Bounds),
            "envelope" => Ok(SweepMode::Envelope),
            _ => invalid(format!("unknown sweep mode {s:?}")),
        }
    }
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub grid: Grid,
    #[serde(default = "one")]
    pub seeds_per_point: usize,
    pub mode: SweepMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(default = "one")]
    pub parallelism: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub certifier: CertifierConfig,
}

impl SweepConfig {
    /// Parses and validates; an empty grid axis is rejected here.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: SweepConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let g = &self.grid;
        for (axis, len) in [
            ("n", g.n.len()),
            ("k", g.k.len()),
            ("p", g.p.len()),
            ("q", g.q.len()),
        ] {
            if len == 0 {
                return invalid(format!("grid axis {axis} is empty"));
            }
        }
        if self.seeds_per_point == 0 {
            return invalid("seeds_per_point must be at least 1");
        }
        if self.parallelism == 0 {
            return invalid("parallelism must be at least 1");
        }
        self.certifier.validate()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}
