use super::even_horizon;
use crate::engine::{Candidate, Move, OnlineAlgorithm, StepView};
use crate::error::Result;

fn tie_key(mv: &Move) -> (u8, usize, usize) {
    match *mv {
        Move::Join { anchor } => (0, anchor.0, 0),
        Move::DissolveAndPair { anchor, partner } => (1, anchor.0, partner.0),
        Move::NewSingleton => (2, 0, 0),
    }
}

/// The candidate with the largest strictly positive gain. Ties prefer joins,
/// then dissolutions, then the smaller anchor, then the smaller partner.
pub fn best_improving<'c, I>(cands: I) -> Option<&'c Candidate>
where
    I: IntoIterator<Item = &'c Candidate>,
{
    let mut best: Option<&Candidate> = None;
    for c in cands {
        if !c.gain.is_positive() {
            continue;
        }
        best = match best {
            None => Some(c),
            Some(b) => {
                let better = match c.gain.cmp(&b.gain) {
                    std::cmp::Ordering::Greater => true,
                    std::cmp::Ordering::Less => false,
                    std::cmp::Ordering::Equal => tie_key(&c.mv) < tie_key(&b.mv),
                };
                Some(if better { c } else { b })
            }
        };
    }
    best
}

fn greedy_move<'c, I>(cands: I) -> Move
where
    I: IntoIterator<Item = &'c Candidate>,
{
    best_improving(cands).map_or(Move::NewSingleton, |c| c.mv)
}

/// Greedy: the welfare-maximizing legal move if it strictly improves.
#[derive(Clone, Debug, Default)]
pub struct Gdy {
    /// Ignore dissolution moves even when the engine offers them.
    pub standard_only: bool,
    /// Only consider moves whose result is still a matching.
    pub matching: bool,
}

pub fn gdy() -> Gdy {
    Gdy::default()
}

pub fn gdy_standard_only() -> Gdy {
    Gdy {
        standard_only: true,
        matching: false,
    }
}

/// Greedy over the matching domain: coalitions never exceed size two.
pub fn gdy_matching() -> Gdy {
    Gdy {
        standard_only: false,
        matching: true,
    }
}

impl OnlineAlgorithm for Gdy {
    fn name(&self) -> String {
        match (self.standard_only, self.matching) {
            (false, false) => "gdy".into(),
            (true, false) => "gdy:standard".into(),
            (false, true) => "gdy:matching".into(),
            (true, true) => "gdy:standard:matching".into(),
        }
    }

    fn decide(&mut self, view: &StepView<'_>) -> Result<Move> {
        Ok(greedy_move(view.candidates.iter().filter(|c| {
            (!self.standard_only || c.mv.is_standard()) && (!self.matching || c.keeps_matching())
        })))
    }
}

/// Wait-then-greedy: the first `n/2` arrivals stay single, the rest play
/// greedy over the standard moves.
#[derive(Clone, Debug, Default)]
pub struct Wgdy {
    half: usize,
}

pub fn wgdy() -> Wgdy {
    Wgdy::default()
}

impl OnlineAlgorithm for Wgdy {
    fn name(&self) -> String {
        "wgdy".into()
    }

    fn knows_n(&self) -> bool {
        true
    }

    fn begin(&mut self, horizon: Option<usize>) -> Result<()> {
        self.half = even_horizon("wgdy", horizon)? / 2;
        Ok(())
    }

    fn decide(&mut self, view: &StepView<'_>) -> Result<Move> {
        if view.step <= self.half {
            return Ok(Move::NewSingleton);
        }
        Ok(greedy_move(
            view.candidates.iter().filter(|c| c.mv.is_standard()),
        ))
    }
}

/// Baseline that never forms a coalition.
#[derive(Clone, Debug, Default)]
pub struct Singletons;

impl OnlineAlgorithm for Singletons {
    fn name(&self) -> String {
        "singletons".into()
    }

    fn decide(&mut self, _: &StepView<'_>) -> Result<Move> {
        Ok(Move::NewSingleton)
    }
}
