use super::*;
use crate::engine::{matching_guard, AlgorithmFactory, OnlineAlgorithm};
use crate::game::Weight;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Algorithm selected by name, e.g. `gdy`, `dta:3/2` or `guard:gdy`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum AlgSpec {
    Gdy,
    GdyStandard,
    GdyMatching,
    Gma,
    Wgdy,
    Iwa,
    Dta(Option<DtaThreshold>),
    Maxe,
    IMaxe,
    Singletons,
    Guard(Box<AlgSpec>),
}

impl AlgSpec {
    pub const NAMES: &'static [&'static str] = &[
        "gdy",
        "gdy:standard",
        "gdy:matching",
        "gma",
        "wgdy",
        "iwa",
        "dta",
        "dta:<t>",
        "maxe",
        "i-maxe",
        "singletons",
        "guard:<name>",
    ];

    /// True for algorithms whose outputs are always matchings.
    pub fn outputs_matchings(&self) -> bool {
        matches!(
            self,
            AlgSpec::GdyMatching
                | AlgSpec::Gma
                | AlgSpec::Dta(_)
                | AlgSpec::Maxe
                | AlgSpec::IMaxe
                | AlgSpec::Guard(_)
        )
    }

    pub fn build(&self) -> Box<dyn OnlineAlgorithm> {
        match self {
            AlgSpec::Gdy => Box::new(gdy()),
            AlgSpec::GdyStandard => Box::new(gdy_standard_only()),
            AlgSpec::GdyMatching => Box::new(gdy_matching()),
            AlgSpec::Gma => Box::new(gma()),
            AlgSpec::Wgdy => Box::new(wgdy()),
            AlgSpec::Iwa => Box::new(iterated_doubling(|| Box::new(wgdy())).named("iwa")),
            AlgSpec::Dta(None) => Box::new(dta_default()),
            AlgSpec::Dta(Some(t)) => Box::new(dta(t.clone())),
            AlgSpec::Maxe => Box::new(maxe()),
            AlgSpec::IMaxe => Box::new(i_maxe()),
            AlgSpec::Singletons => Box::new(Singletons),
            AlgSpec::Guard(inner) => Box::new(matching_guard(inner.build())),
        }
    }
}

impl AlgorithmFactory for AlgSpec {
    fn build(&self) -> Box<dyn OnlineAlgorithm> {
        AlgSpec::build(self)
    }

    fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for AlgSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlgSpec::Gdy => f.write_str("gdy"),
            AlgSpec::GdyStandard => f.write_str("gdy:standard"),
            AlgSpec::GdyMatching => f.write_str("gdy:matching"),
            AlgSpec::Gma => f.write_str("gma"),
            AlgSpec::Wgdy => f.write_str("wgdy"),
            AlgSpec::Iwa => f.write_str("iwa"),
            AlgSpec::Dta(None) => f.write_str("dta"),
            AlgSpec::Dta(Some(t)) => write!(f, "dta:{t}"),
            AlgSpec::Maxe => f.write_str("maxe"),
            AlgSpec::IMaxe => f.write_str("i-maxe"),
            AlgSpec::Singletons => f.write_str("singletons"),
            AlgSpec::Guard(inner) => write!(f, "guard:{inner}"),
        }
    }
}

impl FromStr for AlgSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("guard:") {
            return Ok(AlgSpec::Guard(Box::new(rest.parse()?)));
        }
        if let Some(t) = s.strip_prefix("dta:") {
            let w = Weight::parse(t)?;
            return Ok(AlgSpec::Dta(Some(DtaThreshold::new(w.into_rational())?)));
        }
        Ok(match s {
            "gdy" => AlgSpec::Gdy,
            "gdy:standard" => AlgSpec::GdyStandard,
            "gdy:matching" => AlgSpec::GdyMatching,
            "gma" => AlgSpec::Gma,
            "wgdy" => AlgSpec::Wgdy,
            "iwa" => AlgSpec::Iwa,
            "dta" => AlgSpec::Dta(None),
            "maxe" => AlgSpec::Maxe,
            "i-maxe" => AlgSpec::IMaxe,
            "singletons" => AlgSpec::Singletons,
            other => {
                return Err(Error::parse(format!(
                    "unknown algorithm {other:?}; expected one of {}",
                    AlgSpec::NAMES.join(", ")
                )))
            }
        })
    }
}

impl TryFrom<String> for AlgSpec {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<AlgSpec> for String {
    fn from(a: AlgSpec) -> String {
        a.to_string()
    }
}
