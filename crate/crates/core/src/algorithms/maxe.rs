use super::doubling::{iterated_doubling, IteratedDoubling};
use crate::engine::{Move, OnlineAlgorithm, StepView};
use crate::error::{Error, Result};
use crate::game::{AgentId, Game, Weight};
use crate::score::Score;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::collections::HashSet;

/// Stopping plan for a known horizon with success odds `p_k = 2/k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OddsPlan {
    pub n: usize,
    /// First arrival (1-based) at which a record edge may be matched.
    pub s: usize,
}

impl OddsPlan {
    /// `r_k = p_k / (1 − p_k)`; `None` stands for the infinite odds at `k = 2`.
    pub fn odds(k: usize) -> Option<BigRational> {
        (k > 2).then(|| BigRational::new(2.into(), ((k - 2) as i64).into()))
    }
}

/// Largest `s` whose tail sum of odds `r_s + … + r_n` reaches one.
pub fn odds_stopping_time(n: usize) -> Result<OddsPlan> {
    if n < 2 {
        return Err(Error::precondition(format!(
            "stopping time needs n >= 2, got {n}"
        )));
    }
    let mut sum = BigRational::zero();
    for s in (3..=n).rev() {
        sum += OddsPlan::odds(s).expect("finite for s > 2");
        if sum >= BigRational::one() {
            return Ok(OddsPlan { n, s });
        }
    }
    Ok(OddsPlan { n, s: 2 })
}

/// Secretary-style maximum edge rule: observe until arrival `s`, then match
/// the first edge that beats everything seen so far.
#[derive(Clone, Debug, Default)]
pub struct Maxe {
    s: usize,
    best_seen: Option<Score>,
    done: bool,
}

pub fn maxe() -> Maxe {
    Maxe::default()
}

impl Maxe {
    pub fn stopping_index(&self) -> usize {
        self.s
    }
}

impl OnlineAlgorithm for Maxe {
    fn name(&self) -> String {
        "maxe".into()
    }

    fn knows_n(&self) -> bool {
        true
    }

    fn begin(&mut self, horizon: Option<usize>) -> Result<()> {
        let n = horizon.ok_or_else(|| Error::Algorithm {
            algorithm: "maxe".into(),
            reason: "needs the number of agents in advance".into(),
        })?;
        self.s = odds_stopping_time(n.max(2))?.s;
        self.best_seen = None;
        self.done = false;
        Ok(())
    }

    fn decide(&mut self, view: &StepView<'_>) -> Result<Move> {
        // Highest edge to an earlier agent; ties go to the smaller partner.
        let mut top: Option<(&Score, AgentId)> = None;
        for j in view.revealed.revealed_agents() {
            if j == view.agent {
                continue;
            }
            let w = view.revealed.scaled(view.agent, j)?;
            if top.is_none_or(|(b, _)| w > b) {
                top = Some((w, j));
            }
        }
        let Some((w, j)) = top else {
            return Ok(Move::NewSingleton);
        };
        let record = self.best_seen.as_ref().is_none_or(|b| w > b);
        let fire = !self.done && view.step >= self.s && record && w.is_positive();
        if record {
            self.best_seen = Some(w.clone());
        }
        if fire {
            self.done = true;
            return Ok(Move::Join { anchor: j });
        }
        Ok(Move::NewSingleton)
    }
}

/// Iterated doubling around [`maxe`].
pub fn i_maxe() -> IteratedDoubling {
    iterated_doubling(|| Box::new(maxe())).named("i-maxe")
}

/// A copy of `game` with pairwise distinct weights and the same strict order.
///
/// With `ε` half the smallest gap between distinct weights, edges are visited
/// in lexicographic order and each is lowered by the smallest offset in
/// `{i·ε/n² : i = 0..n²}` that yields an unused value. The maximum weight
/// keeps offset zero.
pub fn perturb_distinct(game: &Game) -> Game {
    let n = game.n();
    let mut values: Vec<&Weight> = game.edges().map(|(_, _, w)| w).collect();
    values.sort();
    values.dedup();
    let eps = values
        .windows(2)
        .map(|p| p[1] - p[0])
        .min()
        .map_or_else(Weight::one, |d| &d / &Weight::int(2));
    let steps = (n * n) as i64;
    let unit = &eps / &Weight::int(steps.max(1));
    let mut used: HashSet<Weight> = HashSet::new();
    let mut out = vec![Weight::zero(); n * n];
    for (i, j, w) in game.edges() {
        let mut k = 0i64;
        let v = loop {
            let cand = w - &(&unit * &Weight::int(k));
            if !used.contains(&cand) {
                break cand;
            }
            k += 1;
            debug_assert!(k <= steps);
        };
        used.insert(v.clone());
        out[i.0 * n + j.0] = v;
    }
    let g = Game::from_fn(n, |i, j| out[i * n + j].clone());
    match game.labels() {
        Some(l) => g.with_labels(l.to_vec()).expect("same size"),
        None => g,
    }
}
