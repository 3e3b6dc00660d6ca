use super::greedy::best_improving;
use crate::engine::{Candidate, Move, OnlineAlgorithm, StepView};
use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow};
use std::fmt;

/// A dissolution threshold `t ≥ 1`, kept as an exact fraction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DtaThreshold(BigRational);

impl DtaThreshold {
    pub fn new(t: BigRational) -> Result<Self> {
        if t < BigRational::one() {
            return Err(Error::precondition(format!("threshold {t} is below 1")));
        }
        Ok(DtaThreshold(t))
    }

    pub fn value(&self) -> &BigRational {
        &self.0
    }
}

impl fmt::Display for DtaThreshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

/// `1 + √2/2` rounded up to a multiple of `10^-30`.
pub fn t_default() -> DtaThreshold {
    let q = BigInt::from(10u32).pow(30u32);
    // √2/2 · 10^30 = √(5 · 10^59)
    let radicand = BigInt::from(5u32) * BigInt::from(10u32).pow(59u32);
    let mut root = radicand.sqrt();
    if &root * &root != radicand {
        root += 1;
    }
    DtaThreshold(BigRational::new(&q + root, q))
}

/// Matching algorithm: pair with a singleton, or break up a pair `{j, ℓ}`
/// for `{i, j}` when `w(i, j) ≥ t · w(j, ℓ)`. Takes the best strict
/// improvement among those options.
#[derive(Clone, Debug)]
pub struct Dta {
    t: DtaThreshold,
    label: String,
}

pub fn dta(t: DtaThreshold) -> Dta {
    let label = format!("dta:{t}");
    Dta { t, label }
}

pub fn dta_default() -> Dta {
    Dta {
        t: t_default(),
        label: "dta".into(),
    }
}

impl Dta {
    pub fn threshold(&self) -> &DtaThreshold {
        &self.t
    }

    fn allowed(&self, view: &StepView<'_>, c: &Candidate) -> Result<bool> {
        Ok(match c.mv {
            Move::NewSingleton => false,
            Move::Join { .. } => c.target_size == 1,
            Move::DissolveAndPair { anchor, partner } => {
                if c.target_size != 2 {
                    return Ok(false);
                }
                let other = view
                    .partition
                    .coalition_of(anchor)
                    .and_then(|m| m.iter().copied().find(|&x| x != partner))
                    .expect("pair has two members");
                let new = view.revealed.scaled(view.agent, partner)?;
                let old = view.revealed.scaled(partner, other)?;
                let (p, q) = (self.t.0.numer(), self.t.0.denom());
                new.mul_big(q) >= old.mul_big(p)
            }
        })
    }
}

impl OnlineAlgorithm for Dta {
    fn name(&self) -> String {
        self.label.clone()
    }

    fn decide(&mut self, view: &StepView<'_>) -> Result<Move> {
        let mut ok = Vec::with_capacity(view.candidates.len());
        for c in view.candidates {
            if self.allowed(view, c)? {
                ok.push(c);
            }
        }
        Ok(best_improving(ok).map_or(Move::NewSingleton, |c| c.mv))
    }
}
