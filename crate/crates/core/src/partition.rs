//! Coalition structures, matchings, utilities and social welfare.

use crate::error::{Error, Result};
use crate::game::{AgentId, Game, Weight};
use crate::score::Score;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;

/// Disjoint nonempty coalitions over a subset of `[0, universe)`.
///
/// Coalitions are kept in canonical form: members ascending, coalitions
/// ordered by their smallest member (the *anchor*). Two partitions over the
/// same agents are equal iff they are the same set partition.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Partition {
    universe: usize,
    coalitions: Vec<Vec<AgentId>>,
    member_of: Vec<Option<usize>>,
}

impl Partition {
    pub fn empty(universe: usize) -> Self {
        Partition {
            universe,
            coalitions: Vec::new(),
            member_of: vec![None; universe],
        }
    }

    pub fn singletons(universe: usize, agents: impl IntoIterator<Item = AgentId>) -> Self {
        let mut p = Partition::empty(universe);
        p.coalitions = agents.into_iter().map(|a| vec![a]).collect();
        p.normalize();
        p
    }

    pub fn from_coalitions<I, C>(universe: usize, coalitions: I) -> Result<Self>
    where
        I: IntoIterator<Item = C>,
        C: IntoIterator<Item = AgentId>,
    {
        let mut p = Partition::empty(universe);
        let mut seen = vec![false; universe];
        for c in coalitions {
            let members: Vec<AgentId> = c.into_iter().collect();
            if members.is_empty() {
                return Err(Error::precondition("empty coalition"));
            }
            for a in &members {
                if a.0 >= universe {
                    return Err(Error::AgentOutOfRange(a.0, universe));
                }
                if std::mem::replace(&mut seen[a.0], true) {
                    return Err(Error::precondition(format!("agent {a} appears twice")));
                }
            }
            p.coalitions.push(members);
        }
        p.normalize();
        Ok(p)
    }

    /// Convenience for tests and fixtures: coalitions given as index slices.
    pub fn from_indices(universe: usize, coalitions: &[&[usize]]) -> Result<Self> {
        Partition::from_coalitions(
            universe,
            coalitions.iter().map(|c| c.iter().map(|&i| AgentId(i))),
        )
    }

    fn normalize(&mut self) {
        for c in &mut self.coalitions {
            c.sort_unstable();
        }
        self.coalitions.sort_unstable_by_key(|c| c[0]);
        self.member_of.iter_mut().for_each(|m| *m = None);
        for (idx, c) in self.coalitions.iter().enumerate() {
            for a in c {
                self.member_of[a.0] = Some(idx);
            }
        }
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn coalitions(&self) -> &[Vec<AgentId>] {
        &self.coalitions
    }

    pub fn len(&self) -> usize {
        self.coalitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coalitions.is_empty()
    }

    pub fn contains(&self, a: AgentId) -> bool {
        self.member_of.get(a.0).is_some_and(|m| m.is_some())
    }

    /// Index of `a`'s coalition in [`Partition::coalitions`].
    pub fn index_of(&self, a: AgentId) -> Option<usize> {
        self.member_of.get(a.0).copied().flatten()
    }

    /// `π(a)`.
    pub fn coalition_of(&self, a: AgentId) -> Option<&[AgentId]> {
        self.index_of(a).map(|i| self.coalitions[i].as_slice())
    }

    /// Index of the coalition whose smallest member is `anchor`.
    pub fn by_anchor(&self, anchor: AgentId) -> Option<usize> {
        self.index_of(anchor)
            .filter(|&i| self.coalitions[i][0] == anchor)
    }

    /// Agents covered by the partition, ascending.
    pub fn ground_set(&self) -> Vec<AgentId> {
        (0..self.universe)
            .filter(|&i| self.member_of[i].is_some())
            .map(AgentId)
            .collect()
    }

    pub fn agent_count(&self) -> usize {
        self.coalitions.iter().map(Vec::len).sum()
    }

    pub fn max_coalition_size(&self) -> usize {
        self.coalitions.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn add_singleton(&mut self, a: AgentId) -> Result<()> {
        self.ensure_new(a)?;
        self.coalitions.push(vec![a]);
        self.normalize();
        Ok(())
    }

    pub fn join(&mut self, idx: usize, a: AgentId) -> Result<()> {
        self.ensure_new(a)?;
        let c = self
            .coalitions
            .get_mut(idx)
            .ok_or_else(|| Error::precondition(format!("no coalition #{idx}")))?;
        c.push(a);
        self.normalize();
        Ok(())
    }

    /// `(π \ {C}) ∪ {{a, partner}} ∪ {{k} : k ∈ C \ {partner}}`.
    pub fn dissolve_and_pair(&mut self, idx: usize, partner: AgentId, a: AgentId) -> Result<()> {
        self.ensure_new(a)?;
        let c = self
            .coalitions
            .get(idx)
            .ok_or_else(|| Error::precondition(format!("no coalition #{idx}")))?;
        if !c.contains(&partner) {
            return Err(Error::precondition(format!(
                "partner {partner} is not in the dissolved coalition"
            )));
        }
        let old = self.coalitions.remove(idx);
        for k in old {
            if k != partner {
                self.coalitions.push(vec![k]);
            }
        }
        self.coalitions.push(vec![partner, a]);
        self.normalize();
        Ok(())
    }

    fn ensure_new(&self, a: AgentId) -> Result<()> {
        if a.0 >= self.universe {
            return Err(Error::AgentOutOfRange(a.0, self.universe));
        }
        if self.contains(a) {
            return Err(Error::precondition(format!("agent {a} is already placed")));
        }
        Ok(())
    }

    /// `π[N'] = {C ∩ N' : C ∈ π, C ∩ N' ≠ ∅}`.
    pub fn restrict(&self, subset: &[AgentId]) -> Partition {
        let mut keep = vec![false; self.universe];
        for a in subset {
            if a.0 < self.universe {
                keep[a.0] = true;
            }
        }
        let mut p = Partition::empty(self.universe);
        p.coalitions = self
            .coalitions
            .iter()
            .map(|c| c.iter().copied().filter(|a| keep[a.0]).collect::<Vec<_>>())
            .filter(|c| !c.is_empty())
            .collect();
        p.normalize();
        p
    }

    /// `π − i`.
    pub fn without(&self, a: AgentId) -> Partition {
        let rest: Vec<AgentId> = self.ground_set().into_iter().filter(|&b| b != a).collect();
        self.restrict(&rest)
    }

    pub fn as_matching(&self) -> Option<MatchingView> {
        MatchingView::new(self.clone()).ok()
    }

    pub fn to_indices(&self) -> Vec<Vec<usize>> {
        self.coalitions
            .iter()
            .map(|c| c.iter().map(|a| a.0).collect())
            .collect()
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, c) in self.coalitions.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{{")?;
            for (m, a) in c.iter().enumerate() {
                if m > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{a}")?;
            }
            write!(f, "}}")?;
        }
        write!(f, "}}")
    }
}

#[derive(Serialize, Deserialize)]
struct PartitionRepr {
    universe: usize,
    coalitions: Vec<Vec<usize>>,
}

impl Serialize for Partition {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PartitionRepr {
            universe: self.universe,
            coalitions: self.to_indices(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Partition {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = PartitionRepr::deserialize(d)?;
        Partition::from_coalitions(
            r.universe,
            r.coalitions.into_iter().map(|c| c.into_iter().map(AgentId)),
        )
        .map_err(serde::de::Error::custom)
    }
}

/// A partition whose coalitions all have size one or two.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchingView(Partition);

impl MatchingView {
    pub fn new(p: Partition) -> Result<Self> {
        match p.coalitions.iter().map(Vec::len).find(|&s| s > 2) {
            Some(s) => Err(Error::InvalidMatching(s)),
            None => Ok(MatchingView(p)),
        }
    }

    pub fn partition(&self) -> &Partition {
        &self.0
    }

    pub fn into_partition(self) -> Partition {
        self.0
    }

    /// `M(μ)`: matched pairs, each ordered `(low, high)`.
    pub fn edges(&self) -> impl Iterator<Item = (AgentId, AgentId)> + '_ {
        self.0
            .coalitions
            .iter()
            .filter(|c| c.len() == 2)
            .map(|c| (c[0], c[1]))
    }

    pub fn contains_edge(&self, a: AgentId, b: AgentId) -> bool {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        self.edges().any(|e| e == (lo, hi))
    }
}

/// `u_i(C) = Σ_{j ∈ C \ {i}} w(i, j)`.
pub fn utility(game: &Game, i: AgentId, coalition: &[AgentId]) -> Result<Weight> {
    if !coalition.contains(&i) {
        return Err(Error::precondition(format!(
            "agent {i} is not in the coalition"
        )));
    }
    let mut sum = Weight::zero();
    for &j in coalition {
        if j != i {
            sum = &sum + game.weight(i, j)?;
        }
    }
    Ok(sum)
}

/// `SW(C)` on the game's integer scale.
pub fn coalition_welfare_scaled(game: &Game, coalition: &[AgentId]) -> Score {
    let mut s = Score::ZERO;
    for (x, &a) in coalition.iter().enumerate() {
        for &b in &coalition[x + 1..] {
            s += game.scaled(a, b);
        }
    }
    s.double()
}

pub fn coalition_welfare(game: &Game, coalition: &[AgentId]) -> Weight {
    game.unscale(&coalition_welfare_scaled(game, coalition))
}

pub fn social_welfare_scaled(game: &Game, pi: &Partition) -> Score {
    pi.coalitions()
        .iter()
        .map(|c| coalition_welfare_scaled(game, c))
        .sum()
}

/// `SW(π) = Σ_i u_i(π)`.
pub fn social_welfare(game: &Game, pi: &Partition) -> Weight {
    game.unscale(&social_welfare_scaled(game, pi))
}

pub fn restrict_partition(pi: &Partition, subset: &[AgentId]) -> Partition {
    pi.restrict(subset)
}

pub fn is_matching(pi: &Partition) -> Option<MatchingView> {
    pi.as_matching()
}

/// `w(E⁺)`: total weight of positive pairs.
pub fn positive_edge_sum(game: &Game) -> Weight {
    game.unscale(&positive_edge_sum_scaled(game))
}

pub fn positive_edge_sum_scaled(game: &Game) -> Score {
    let mut s = Score::ZERO;
    for i in game.agents() {
        for j in game.agents().skip(i.0 + 1) {
            let w = game.scaled(i, j);
            if w.is_positive() {
                s += w;
            }
        }
    }
    s
}

/// `w(μ)`.
pub fn matching_weight(game: &Game, mu: &MatchingView) -> Weight {
    let s: Score = mu.edges().map(|(a, b)| game.scaled(a, b)).sum();
    game.unscale(&s)
}
