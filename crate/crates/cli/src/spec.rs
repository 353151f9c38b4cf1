//! Argument types that do not map onto a single core type.

use std::fmt;
use std::str::FromStr;

use anyhow::{anyhow, bail, Error};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use tsplab::bnb::{BoundKind, BranchRule, IncumbentKind};
use tsplab::gadgets::ToyVariant;
use tsplab::Heuristic;

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveMode {
    Tour,
    Path,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundArg {
    Onetree,
    Exact,
}

impl From<BoundArg> for BoundKind {
    fn from(b: BoundArg) -> Self {
        match b {
            BoundArg::Onetree => BoundKind::OneTree,
            BoundArg::Exact => BoundKind::Exact,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleArg {
    /// Most fractional edge of the 1-tree ascent.
    Frac,
    /// Longest undecided edge of the reference tour.
    Long,
    /// Lexicographically first undecided edge.
    Lex,
}

impl From<RuleArg> for BranchRule {
    fn from(r: RuleArg) -> Self {
        match r {
            RuleArg::Frac => BranchRule::MostFractional,
            RuleArg::Long => BranchRule::LongestIncumbent,
            RuleArg::Lex => BranchRule::Lexicographic,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VariantArg {
    Yes,
    No,
}

impl From<VariantArg> for ToyVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Yes => ToyVariant::Yes,
            VariantArg::No => ToyVariant::No,
        }
    }
}

fn two_fields(s: &str) -> anyhow::Result<(&str, &str)> {
    s.split_once(',').ok_or_else(|| anyhow!("expected two comma-separated values, got `{s}`"))
}

/// `x,y`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct PointArg(pub f64, pub f64);

impl FromStr for PointArg {
    type Err = Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        let (a, b) = two_fields(s)?;
        Ok(PointArg(a.trim().parse()?, b.trim().parse()?))
    }
}

impl fmt::Display for PointArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.0, self.1)
    }
}

/// 1-based `i,j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Endpoints(pub usize, pub usize);

impl FromStr for Endpoints {
    type Err = Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        let (a, b) = two_fields(s)?;
        let (a, b): (usize, usize) = (a.trim().parse()?, b.trim().parse()?);
        if a == 0 || b == 0 {
            bail!("endpoints are 1-based");
        }
        if a == b {
            bail!("endpoints must differ");
        }
        Ok(Endpoints(a, b))
    }
}

impl fmt::Display for Endpoints {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.0, self.1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum GadgetSpec {
    Nn,
    Ni,
    Pi(usize),
    Q,
    M,
    PiH,
    Pi3,
}

impl FromStr for GadgetSpec {
    type Err = Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        Ok(match s {
            "nn" => GadgetSpec::Nn,
            "ni" => GadgetSpec::Ni,
            "q" => GadgetSpec::Q,
            "m" => GadgetSpec::M,
            "piH" => GadgetSpec::PiH,
            "pi3" => GadgetSpec::Pi3,
            _ => match s.strip_prefix("pi:") {
                Some(k) => GadgetSpec::Pi(k.parse()?),
                None => bail!("unknown gadget `{s}` (nn, ni, pi:K, q, m, piH, pi3)"),
            },
        })
    }
}

impl fmt::Display for GadgetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GadgetSpec::Nn => f.write_str("nn"),
            GadgetSpec::Ni => f.write_str("ni"),
            GadgetSpec::Pi(k) => write!(f, "pi:{k}"),
            GadgetSpec::Q => f.write_str("q"),
            GadgetSpec::M => f.write_str("m"),
            GadgetSpec::PiH => f.write_str("piH"),
            GadgetSpec::Pi3 => f.write_str("pi3"),
        }
    }
}

/// `heur[:NAME]`, `exact` or `fixed:B`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct IncumbentSpec(pub IncumbentKind);

impl FromStr for IncumbentSpec {
    type Err = Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        let kind = match s {
            "exact" => IncumbentKind::Exact,
            "heur" => IncumbentKind::Heuristic(Heuristic::NearestNeighbor),
            _ => {
                if let Some(h) = s.strip_prefix("heur:") {
                    IncumbentKind::Heuristic(h.parse()?)
                } else if let Some(b) = s.strip_prefix("fixed:") {
                    let b: f64 = b.parse()?;
                    if !(b > 0.0) {
                        bail!("a fixed incumbent must be positive");
                    }
                    IncumbentKind::Fixed(b)
                } else {
                    bail!("unknown incumbent `{s}` (heur[:NAME], exact, fixed:B)");
                }
            }
        };
        Ok(IncumbentSpec(kind))
    }
}

impl fmt::Display for IncumbentSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            IncumbentKind::Heuristic(h) => write!(f, "heur:{h}"),
            IncumbentKind::Exact => f.write_str("exact"),
            IncumbentKind::Fixed(b) => write!(f, "fixed:{b}"),
        }
    }
}

macro_rules! via_string {
    ($($t:ty),*) => {$(
        impl TryFrom<String> for $t {
            type Error = Error;
            fn try_from(s: String) -> anyhow::Result<Self> {
                s.parse()
            }
        }

        impl From<$t> for String {
            fn from(v: $t) -> String {
                v.to_string()
            }
        }
    )*};
}

via_string!(PointArg, Endpoints, GadgetSpec, IncumbentSpec);
