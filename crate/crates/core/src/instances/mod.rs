//! Instance families, the adaptive adversary and random samplers.

mod adversary;
mod families;
mod random;

pub use adversary::{
    adaptive_adversary, adversary_witness, replay_matches, AdversaryRun, AdversaryStep,
    AdversaryTranscript, ADVERSARY_MIN_N,
};
pub use families::{
    chain_default_eps, gen_dissolution_trap, gen_dta_ladder, gen_dta_ladder_with,
    gen_increasing_chain, gen_star_pair, ladder_default_eps, star_pair_default_eps, Instance,
};
pub use random::{
    gen_lambda_domain, gen_random_ashg, gen_tree_domain, is_tree_domain, lambda_condition,
    LambdaInstance, WeightDist, LAMBDA_RETRIES,
};

use crate::engine::{ArrivalOrder, OnlineAlgorithm};
use crate::error::{Error, Result};
use crate::game::{Game, Weight};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

/// Instance selector, written `family:key=value,…` (or `file:PATH`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum FamilySpec {
    StarPair {
        k: usize,
        eps: Weight,
    },
    Chain {
        k: usize,
        eps: Weight,
    },
    Trap {
        k: usize,
    },
    Ladder {
        k: usize,
        eps: Option<Weight>,
    },
    Adversary {
        n: usize,
    },
    Random {
        n: usize,
        dist: WeightDist,
        seed: u64,
    },
    Tree {
        n: usize,
        seed: u64,
    },
    Lambda {
        n: usize,
        lambda: Weight,
        seed: u64,
    },
    File(PathBuf),
}

impl FamilySpec {
    pub const FORMS: &'static [&'static str] = &[
        "star-pair:k=K[,eps=E]",
        "chain:k=K[,eps=E]",
        "trap:k=K",
        "ladder:k=K[,eps=E]",
        "adversary:n=N",
        "random:n=N[,dist=int:W|pos:W|sparse:p[:W]][,seed=S]",
        "tree:n=N[,seed=S]",
        "lambda:n=N,l=L[,seed=S]",
        "file:PATH",
    ];

    pub fn needs_algorithm(&self) -> bool {
        matches!(self, FamilySpec::Adversary { .. })
    }

    /// Builds the instance; the adversary family needs [`generate_against`](Self::generate_against).
    pub fn generate(&self) -> Result<Instance> {
        let plain = |game: Game| {
            let n = game.n();
            Instance {
                game,
                order: ArrivalOrder::identity(n),
            }
        };
        match self {
            FamilySpec::StarPair { k, eps } => gen_star_pair(*k, eps),
            FamilySpec::Chain { k, eps } => gen_increasing_chain(*k, eps),
            FamilySpec::Trap { k } => gen_dissolution_trap(*k),
            FamilySpec::Ladder { k, eps } => {
                gen_dta_ladder(*k, &eps.clone().unwrap_or_else(|| ladder_default_eps(*k)))
            }
            FamilySpec::Random { n, dist, seed } => Ok(plain(gen_random_ashg(*n, dist, *seed))),
            FamilySpec::Tree { n, seed } => Ok(plain(gen_tree_domain(*n, *seed)?)),
            FamilySpec::Lambda { n, lambda, seed } => {
                Ok(plain(gen_lambda_domain(*n, lambda, *seed)?.game))
            }
            FamilySpec::File(path) => Instance::from_json(&std::fs::read_to_string(path)?),
            FamilySpec::Adversary { .. } => Err(Error::precondition(
                "the adversary family is built against an algorithm",
            )),
        }
    }

    pub fn generate_against(&self, alg: &mut dyn OnlineAlgorithm) -> Result<Instance> {
        match self {
            FamilySpec::Adversary { n } => {
                let run = adaptive_adversary(alg, *n)?;
                Ok(Instance {
                    game: run.game,
                    order: run.order,
                })
            }
            other => other.generate(),
        }
    }
}

fn parse_params(family: &str, body: &str) -> Result<BTreeMap<String, String>> {
    let mut m = BTreeMap::new();
    for part in body.split(',').filter(|p| !p.is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| Error::parse(format!("{family}: expected key=value, got {part:?}")))?;
        if m.insert(k.trim().to_string(), v.trim().to_string())
            .is_some()
        {
            return Err(Error::parse(format!("{family}: duplicate key {k:?}")));
        }
    }
    Ok(m)
}

struct Params {
    family: String,
    map: BTreeMap<String, String>,
}

impl Params {
    fn take(&mut self, key: &str) -> Option<String> {
        self.map.remove(key)
    }

    fn num<T: FromStr>(&mut self, key: &str) -> Result<T> {
        let v = self
            .take(key)
            .ok_or_else(|| Error::parse(format!("{}: missing {key}=", self.family)))?;
        v.parse()
            .map_err(|_| Error::parse(format!("{}: bad value {v:?} for {key}", self.family)))
    }

    fn num_or<T: FromStr>(&mut self, key: &str, default: T) -> Result<T> {
        if self.map.contains_key(key) {
            self.num(key)
        } else {
            Ok(default)
        }
    }

    fn weight(&mut self, key: &str) -> Result<Option<Weight>> {
        self.take(key).map(|v| Weight::parse(&v)).transpose()
    }

    fn finish(self) -> Result<()> {
        match self.map.keys().next() {
            Some(k) => Err(Error::parse(format!("{}: unknown key {k:?}", self.family))),
            None => Ok(()),
        }
    }
}

impl FromStr for FamilySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(path) = s.strip_prefix("file:") {
            return Ok(FamilySpec::File(PathBuf::from(path)));
        }
        let (family, body) = s.split_once(':').unwrap_or((s, ""));
        let mut p = Params {
            family: family.to_string(),
            map: parse_params(family, body)?,
        };
        let spec = match family {
            "star-pair" => FamilySpec::StarPair {
                k: p.num("k")?,
                eps: p.weight("eps")?.unwrap_or_else(star_pair_default_eps),
            },
            "chain" => FamilySpec::Chain {
                k: p.num("k")?,
                eps: p.weight("eps")?.unwrap_or_else(chain_default_eps),
            },
            "trap" => FamilySpec::Trap { k: p.num("k")? },
            "ladder" => FamilySpec::Ladder {
                k: p.num("k")?,
                eps: p.weight("eps")?,
            },
            "adversary" => FamilySpec::Adversary { n: p.num("n")? },
            "random" => FamilySpec::Random {
                n: p.num("n")?,
                dist: match p.take("dist") {
                    Some(d) => d.parse()?,
                    None => WeightDist::Int(10),
                },
                seed: p.num_or("seed", 0)?,
            },
            "tree" => FamilySpec::Tree {
                n: p.num("n")?,
                seed: p.num_or("seed", 0)?,
            },
            "lambda" => FamilySpec::Lambda {
                n: p.num("n")?,
                lambda: p
                    .weight("l")?
                    .ok_or_else(|| Error::parse("lambda: missing l="))?,
                seed: p.num_or("seed", 0)?,
            },
            other => {
                return Err(Error::parse(format!(
                    "unknown instance family {other:?}; expected one of {}",
                    FamilySpec::FORMS.join(", ")
                )))
            }
        };
        p.finish()?;
        Ok(spec)
    }
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilySpec::StarPair { k, eps } => write!(f, "star-pair:k={k},eps={}", eps.to_wire()),
            FamilySpec::Chain { k, eps } => write!(f, "chain:k={k},eps={}", eps.to_wire()),
            FamilySpec::Trap { k } => write!(f, "trap:k={k}"),
            FamilySpec::Ladder { k, eps: None } => write!(f, "ladder:k={k}"),
            FamilySpec::Ladder { k, eps: Some(e) } => write!(f, "ladder:k={k},eps={}", e.to_wire()),
            FamilySpec::Adversary { n } => write!(f, "adversary:n={n}"),
            FamilySpec::Random { n, dist, seed } => {
                write!(f, "random:n={n},dist={dist},seed={seed}")
            }
            FamilySpec::Tree { n, seed } => write!(f, "tree:n={n},seed={seed}"),
            FamilySpec::Lambda { n, lambda, seed } => {
                write!(f, "lambda:n={n},l={},seed={seed}", lambda.to_wire())
            }
            FamilySpec::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

impl TryFrom<String> for FamilySpec {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<FamilySpec> for String {
    fn from(f: FamilySpec) -> String {
        f.to_string()
    }
}
