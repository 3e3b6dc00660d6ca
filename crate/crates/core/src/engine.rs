//! Online arrival semantics.
//!
//! Agents arrive one at a time. At each arrival the engine enumerates the
//! legal moves (standard or free-dissolution), annotates each with its exact
//! welfare gain, and hands the algorithm a [`StepView`] that exposes only the
//! weights among agents that have already arrived. The algorithm answers with
//! one of the offered [`Move`]s; anything else aborts the run.

use crate::error::{Error, Result};
use crate::game::{AgentId, Game, Weight};
use crate::partition::{social_welfare, Partition};
use crate::score::Score;
use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Standard,
    Dissolution,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Standard => "standard",
            Mode::Dissolution => "dissolution",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(Mode::Standard),
            "dissolution" => Ok(Mode::Dissolution),
            other => Err(Error::parse(format!("unknown mode {other:?}"))),
        }
    }
}

/// A permutation of `[0, n)`: `order[t]` is the agent arriving at step `t + 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<AgentId>", into = "Vec<AgentId>")]
pub struct ArrivalOrder(Vec<AgentId>);

impl ArrivalOrder {
    pub fn new(seq: Vec<AgentId>) -> Result<Self> {
        let n = seq.len();
        let mut seen = vec![false; n];
        for a in &seq {
            if a.0 >= n || std::mem::replace(&mut seen[a.0], true) {
                return Err(Error::precondition(format!(
                    "arrival order is not a permutation of 0..{n}"
                )));
            }
        }
        Ok(ArrivalOrder(seq))
    }

    pub fn from_indices(seq: &[usize]) -> Result<Self> {
        ArrivalOrder::new(seq.iter().map(|&i| AgentId(i)).collect())
    }

    pub fn identity(n: usize) -> Self {
        ArrivalOrder((0..n).map(AgentId).collect())
    }

    /// Uniform permutation via Fisher–Yates.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut v: Vec<AgentId> = (0..n).map(AgentId).collect();
        v.shuffle(rng);
        ArrivalOrder(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[AgentId] {
        &self.0
    }

    /// `σ⁻¹`: zero-based arrival position of every agent.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.0.len()];
        for (t, a) in self.0.iter().enumerate() {
            pos[a.0] = t;
        }
        pos
    }

    /// `x ⊲ y`: `x` arrives before `y`.
    pub fn before(&self, x: AgentId, y: AgentId) -> bool {
        let pos = self.positions();
        pos[x.0] < pos[y.0]
    }
}

impl TryFrom<Vec<AgentId>> for ArrivalOrder {
    type Error = Error;
    fn try_from(v: Vec<AgentId>) -> Result<Self> {
        ArrivalOrder::new(v)
    }
}

impl From<ArrivalOrder> for Vec<AgentId> {
    fn from(o: ArrivalOrder) -> Self {
        o.0
    }
}

/// The part of a game an online algorithm may see: weights among revealed agents.
#[derive(Clone, Copy)]
pub struct RevealedGame<'a> {
    game: &'a Game,
    visible: &'a [bool],
}

impl<'a> RevealedGame<'a> {
    pub fn new(game: &'a Game, visible: &'a [bool]) -> Self {
        debug_assert_eq!(visible.len(), game.n());
        RevealedGame { game, visible }
    }

    pub fn is_revealed(&self, a: AgentId) -> bool {
        self.visible.get(a.0).copied().unwrap_or(false)
    }

    pub fn revealed_agents(&self) -> impl Iterator<Item = AgentId> + '_ {
        self.visible
            .iter()
            .enumerate()
            .filter(|(_, &v)| v)
            .map(|(i, _)| AgentId(i))
    }

    pub fn revealed_count(&self) -> usize {
        self.visible.iter().filter(|&&v| v).count()
    }

    fn check(&self, i: AgentId, j: AgentId) -> Result<()> {
        if self.is_revealed(i) && self.is_revealed(j) {
            Ok(())
        } else {
            Err(Error::HiddenWeight(i, j))
        }
    }

    pub fn weight(&self, i: AgentId, j: AgentId) -> Result<&'a Weight> {
        self.check(i, j)?;
        self.game.weight(i, j)
    }

    /// Weight on the game's integer scale (see [`Game::scaled`]).
    pub fn scaled(&self, i: AgentId, j: AgentId) -> Result<&'a Score> {
        self.check(i, j)?;
        if i == j {
            return Err(Error::SelfPair(i.0));
        }
        Ok(self.game.scaled(i, j))
    }

    pub fn denominator(&self) -> &'a BigInt {
        self.game.denominator()
    }

    pub fn unscale(&self, s: &Score) -> Weight {
        self.game.unscale(s)
    }

    pub(crate) fn game(&self) -> &'a Game {
        self.game
    }
}

/// One element of `A^S(π, i)` or `A^D(π, i)`.
///
/// Coalitions are addressed by their anchor (smallest member), which is
/// stable for the duration of a step.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Move {
    Join { anchor: AgentId },
    NewSingleton,
    DissolveAndPair { anchor: AgentId, partner: AgentId },
}

impl Move {
    /// Tie-break class: joins first, then dissolutions, then the singleton.
    pub fn class_rank(&self) -> u8 {
        match self {
            Move::Join { .. } => 0,
            Move::DissolveAndPair { .. } => 1,
            Move::NewSingleton => 2,
        }
    }

    pub fn is_standard(&self) -> bool {
        !matches!(self, Move::DissolveAndPair { .. })
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Move::Join { anchor } => write!(f, "join({anchor})"),
            Move::NewSingleton => write!(f, "singleton"),
            Move::DissolveAndPair { anchor, partner } => {
                write!(f, "dissolve({anchor})+pair({partner})")
            }
        }
    }
}

/// A legal move with its exact effect.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Candidate {
    pub mv: Move,
    /// `SW(π') − SW(π)` on the game's integer scale.
    pub gain: Score,
    /// Size of the coalition joined or dissolved; zero for a new singleton.
    pub target_size: usize,
}

impl Candidate {
    /// Size of the arriving agent's coalition after the move.
    pub fn resulting_size(&self) -> usize {
        match self.mv {
            Move::Join { .. } => self.target_size + 1,
            Move::NewSingleton => 1,
            Move::DissolveAndPair { .. } => 2,
        }
    }

    pub fn keeps_matching(&self) -> bool {
        self.resulting_size() <= 2
    }
}

/// Everything an algorithm sees when agent `agent` arrives at step `step` (1-based).
pub struct StepView<'a> {
    pub revealed: RevealedGame<'a>,
    pub partition: &'a Partition,
    pub agent: AgentId,
    pub step: usize,
    pub candidates: &'a [Candidate],
}

/// Deterministic online coalition formation algorithm.
pub trait OnlineAlgorithm {
    fn name(&self) -> String;

    /// Algorithms that return true receive the number of agents in [`begin`](Self::begin).
    fn knows_n(&self) -> bool {
        false
    }

    /// Called once before the first arrival.
    fn begin(&mut self, _horizon: Option<usize>) -> Result<()> {
        Ok(())
    }

    /// Must return the `mv` of one of `view.candidates`.
    fn decide(&mut self, view: &StepView<'_>) -> Result<Move>;
}

impl<A: OnlineAlgorithm + ?Sized> OnlineAlgorithm for Box<A> {
    fn name(&self) -> String {
        (**self).name()
    }
    fn knows_n(&self) -> bool {
        (**self).knows_n()
    }
    fn begin(&mut self, horizon: Option<usize>) -> Result<()> {
        (**self).begin(horizon)
    }
    fn decide(&mut self, view: &StepView<'_>) -> Result<Move> {
        (**self).decide(view)
    }
}

/// Builds fresh algorithm instances; shareable across worker threads.
pub trait AlgorithmFactory: Sync {
    fn build(&self) -> Box<dyn OnlineAlgorithm>;

    fn label(&self) -> String {
        self.build().name()
    }
}

impl<F> AlgorithmFactory for F
where
    F: Fn() -> Box<dyn OnlineAlgorithm> + Sync,
{
    fn build(&self) -> Box<dyn OnlineAlgorithm> {
        self()
    }
}

/// `A^S(π, i)`: join any coalition or open a new singleton.
pub fn legal_moves_standard(pi: &Partition, i: AgentId) -> Result<Vec<Move>> {
    if pi.contains(i) {
        return Err(Error::precondition(format!("agent {i} is already placed")));
    }
    let mut v: Vec<Move> = pi
        .coalitions()
        .iter()
        .map(|c| Move::Join { anchor: c[0] })
        .collect();
    v.push(Move::NewSingleton);
    Ok(v)
}

/// `A^D(π, i)`: the standard moves plus, for every coalition `C` and `j ∈ C`,
/// dissolving `C` and pairing `i` with `j`.
pub fn legal_moves_dissolution(pi: &Partition, i: AgentId) -> Result<Vec<Move>> {
    let mut v = legal_moves_standard(pi, i)?;
    for c in pi.coalitions() {
        for &j in c {
            v.push(Move::DissolveAndPair {
                anchor: c[0],
                partner: j,
            });
        }
    }
    Ok(v)
}

pub fn legal_moves(pi: &Partition, i: AgentId, mode: Mode) -> Result<Vec<Move>> {
    match mode {
        Mode::Standard => legal_moves_standard(pi, i),
        Mode::Dissolution => legal_moves_dissolution(pi, i),
    }
}

/// The partition reached from `pi` when `agent` arrives and `mv` is played.
pub fn apply_move(pi: &Partition, agent: AgentId, mv: &Move) -> Result<Partition> {
    let mut next = pi.clone();
    match *mv {
        Move::NewSingleton => next.add_singleton(agent)?,
        Move::Join { anchor } => {
            let idx = pi
                .by_anchor(anchor)
                .ok_or_else(|| Error::precondition(format!("no coalition anchored at {anchor}")))?;
            next.join(idx, agent)?;
        }
        Move::DissolveAndPair { anchor, partner } => {
            let idx = pi
                .by_anchor(anchor)
                .ok_or_else(|| Error::precondition(format!("no coalition anchored at {anchor}")))?;
            next.dissolve_and_pair(idx, partner, agent)?;
        }
    }
    Ok(next)
}

/// `avai(π, i)` as explicit partitions (duplicates removed).
pub fn available_partitions(pi: &Partition, agent: AgentId, mode: Mode) -> Result<Vec<Partition>> {
    let mut out: Vec<Partition> = Vec::new();
    for mv in legal_moves(pi, agent, mode)? {
        let p = apply_move(pi, agent, &mv)?;
        if !out.contains(&p) {
            out.push(p);
        }
    }
    Ok(out)
}

/// Incremental driver: owns the partition and feeds one arrival at a time.
///
/// The game may be swapped between steps (the adaptive adversary grows its
/// instance as it goes) provided it keeps the same size and integer scale.
pub struct Stepper<'a> {
    alg: &'a mut dyn OnlineAlgorithm,
    mode: Mode,
    n: usize,
    denom: BigInt,
    partition: Partition,
    welfare: Score,
    sw_by_anchor: Vec<Score>,
    visible: Vec<bool>,
    step: usize,
    candidates: Vec<Candidate>,
}

impl<'a> Stepper<'a> {
    pub fn new(
        alg: &'a mut dyn OnlineAlgorithm,
        n: usize,
        denom: BigInt,
        mode: Mode,
    ) -> Result<Self> {
        let horizon = alg.knows_n().then_some(n);
        alg.begin(horizon)?;
        Ok(Stepper {
            alg,
            mode,
            n,
            denom,
            partition: Partition::empty(n),
            welfare: Score::ZERO,
            sw_by_anchor: vec![Score::ZERO; n],
            visible: vec![false; n],
            step: 0,
            candidates: Vec::new(),
        })
    }

    pub fn for_game(alg: &'a mut dyn OnlineAlgorithm, game: &Game, mode: Mode) -> Result<Self> {
        Stepper::new(alg, game.n(), game.denominator().clone(), mode)
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn welfare(&self) -> &Score {
        &self.welfare
    }

    pub fn steps_taken(&self) -> usize {
        self.step
    }

    fn build_candidates(&mut self, game: &Game, agent: AgentId) {
        self.candidates.clear();
        for c in self.partition.coalitions() {
            let mut aff = Score::ZERO;
            for &j in c {
                aff += game.scaled(agent, j);
            }
            self.candidates.push(Candidate {
                mv: Move::Join { anchor: c[0] },
                gain: aff.double(),
                target_size: c.len(),
            });
        }
        self.candidates.push(Candidate {
            mv: Move::NewSingleton,
            gain: Score::ZERO,
            target_size: 0,
        });
        if self.mode == Mode::Dissolution {
            for c in self.partition.coalitions() {
                let sw = &self.sw_by_anchor[c[0].0];
                for &j in c {
                    let gain = &game.scaled(agent, j).double() - sw;
                    self.candidates.push(Candidate {
                        mv: Move::DissolveAndPair {
                            anchor: c[0],
                            partner: j,
                        },
                        gain,
                        target_size: c.len(),
                    });
                }
            }
        }
    }

    /// Processes the arrival of `agent`; returns the chosen move and its gain.
    pub fn step(&mut self, game: &Game, agent: AgentId) -> Result<(Move, Score)> {
        if game.n() != self.n || game.denominator() != &self.denom {
            return Err(Error::precondition(
                "game changed size or scale between steps",
            ));
        }
        if agent.0 >= self.n {
            return Err(Error::AgentOutOfRange(agent.0, self.n));
        }
        if self.partition.contains(agent) {
            return Err(Error::precondition(format!("agent {agent} arrived twice")));
        }
        self.step += 1;
        self.visible[agent.0] = true;
        self.build_candidates(game, agent);
        let mv = {
            let view = StepView {
                revealed: RevealedGame::new(game, &self.visible),
                partition: &self.partition,
                agent,
                step: self.step,
                candidates: &self.candidates,
            };
            self.alg.decide(&view)?
        };
        let Some(cand) = self.candidates.iter().find(|c| c.mv == mv) else {
            return Err(Error::IllegalMove {
                step: self.step,
                algorithm: self.alg.name(),
                detail: format!("{mv} for arriving agent {agent} in {}", self.partition),
            });
        };
        let gain = cand.gain.clone();
        self.apply(game, agent, &mv)?;
        self.welfare += &gain;
        Ok((mv, gain))
    }

    fn apply(&mut self, game: &Game, agent: AgentId, mv: &Move) -> Result<()> {
        match *mv {
            Move::NewSingleton => {
                self.partition.add_singleton(agent)?;
                self.sw_by_anchor[agent.0] = Score::ZERO;
            }
            Move::Join { anchor } => {
                let idx = self
                    .partition
                    .by_anchor(anchor)
                    .expect("offered anchor exists");
                let aff: Score = self.partition.coalitions()[idx]
                    .iter()
                    .map(|&j| game.scaled(agent, j))
                    .sum();
                let sw = &self.sw_by_anchor[anchor.0] + &aff.double();
                self.sw_by_anchor[anchor.0] = Score::ZERO;
                self.partition.join(idx, agent)?;
                let new_anchor = anchor.min(agent);
                self.sw_by_anchor[new_anchor.0] = sw;
            }
            Move::DissolveAndPair { anchor, partner } => {
                let idx = self
                    .partition
                    .by_anchor(anchor)
                    .expect("offered anchor exists");
                for &k in &self.partition.coalitions()[idx] {
                    self.sw_by_anchor[k.0] = Score::ZERO;
                }
                self.partition.dissolve_and_pair(idx, partner, agent)?;
                self.sw_by_anchor[partner.min(agent).0] = game.scaled(agent, partner).double();
            }
        }
        Ok(())
    }
}

/// Mirrors `inner` while its outputs stay matchings. The first move that
/// would create a coalition of size three or more becomes a new singleton,
/// and every later arrival does too.
pub struct MatchingGuard<A> {
    inner: A,
    tripped: bool,
}

pub fn matching_guard<A: OnlineAlgorithm>(inner: A) -> MatchingGuard<A> {
    MatchingGuard {
        inner,
        tripped: false,
    }
}

impl<A> MatchingGuard<A> {
    pub fn tripped(&self) -> bool {
        self.tripped
    }
}

impl<A: OnlineAlgorithm> OnlineAlgorithm for MatchingGuard<A> {
    fn name(&self) -> String {
        format!("guard:{}", self.inner.name())
    }

    fn knows_n(&self) -> bool {
        self.inner.knows_n()
    }

    fn begin(&mut self, horizon: Option<usize>) -> Result<()> {
        self.tripped = false;
        self.inner.begin(horizon)
    }

    fn decide(&mut self, view: &StepView<'_>) -> Result<Move> {
        if self.tripped {
            return Ok(Move::NewSingleton);
        }
        let mv = self.inner.decide(view)?;
        match view.candidates.iter().find(|c| c.mv == mv) {
            Some(c) if !c.keeps_matching() => {
                self.tripped = true;
                Ok(Move::NewSingleton)
            }
            _ => Ok(mv),
        }
    }
}

/// Final state of a run without the per-step records.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunOutcome {
    pub partition: Partition,
    /// Final welfare on the game's integer scale.
    pub welfare: Score,
}

/// Runs `alg` over `order` and keeps only the final state. This is the path
/// used by enumeration and Monte Carlo estimators.
pub fn run_final(
    game: &Game,
    order: &ArrivalOrder,
    alg: &mut dyn OnlineAlgorithm,
    mode: Mode,
) -> Result<RunOutcome> {
    check_order(game, order)?;
    let mut stepper = Stepper::for_game(alg, game, mode)?;
    for &a in order.as_slice() {
        stepper.step(game, a)?;
    }
    Ok(RunOutcome {
        partition: stepper.partition,
        welfare: stepper.welfare,
    })
}

fn check_order(game: &Game, order: &ArrivalOrder) -> Result<()> {
    if order.len() != game.n() {
        return Err(Error::precondition(format!(
            "arrival order has {} agents, game has {}",
            order.len(),
            game.n()
        )));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub agent: AgentId,
    #[serde(rename = "move")]
    pub mv: Move,
    /// `SW(π_step)`.
    pub sw: Weight,
    #[serde(skip)]
    pub partition: Option<Partition>,
    #[serde(skip)]
    pub elapsed: Duration,
}

/// The sequence `π_1, …, π_n` with welfare annotations.
#[derive(Clone, Debug, PartialEq)]
pub struct RunTrace {
    pub algorithm: String,
    pub mode: Mode,
    pub n: usize,
    pub steps: Vec<StepRecord>,
}

impl RunTrace {
    pub fn final_partition(&self) -> Option<&Partition> {
        self.steps.last().and_then(|s| s.partition.as_ref())
    }

    pub fn final_welfare(&self) -> Weight {
        self.steps
            .last()
            .map(|s| s.sw.clone())
            .unwrap_or_else(Weight::zero)
    }

    pub fn order(&self) -> Result<ArrivalOrder> {
        ArrivalOrder::new(self.steps.iter().map(|s| s.agent).collect())
    }

    /// One JSON object per line: `{step, agent, move, sw}`.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for s in &self.steps {
            out.push_str(&serde_json::to_string(s).expect("step serializes"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str, algorithm: &str, mode: Mode) -> Result<RunTrace> {
        let steps = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(serde_json::from_str::<StepRecord>)
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(RunTrace {
            algorithm: algorithm.to_string(),
            mode,
            n: steps.len(),
            steps,
        })
    }
}

/// Runs `alg` over `order`, recording every step.
pub fn run_online(
    game: &Game,
    order: &ArrivalOrder,
    alg: &mut dyn OnlineAlgorithm,
    mode: Mode,
) -> Result<RunTrace> {
    check_order(game, order)?;
    let name = alg.name();
    let mut stepper = Stepper::for_game(alg, game, mode)?;
    let mut steps = Vec::with_capacity(game.n());
    for &a in order.as_slice() {
        let t0 = Instant::now();
        let (mv, _) = stepper.step(game, a)?;
        let elapsed = t0.elapsed();
        steps.push(StepRecord {
            step: stepper.steps_taken(),
            agent: a,
            mv,
            sw: game.unscale(stepper.welfare()),
            partition: Some(stepper.partition().clone()),
            elapsed,
        });
    }
    Ok(RunTrace {
        algorithm: name,
        mode,
        n: game.n(),
        steps,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub step: usize,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TraceReport {
    pub violations: Vec<Violation>,
}

impl TraceReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Replays a trace from scratch: checks arrival order, move legality,
/// snapshot reachability and recomputes every welfare annotation exactly.
pub fn validate_trace(
    game: &Game,
    order: &ArrivalOrder,
    trace: &RunTrace,
    mode: Mode,
) -> TraceReport {
    let mut report = TraceReport::default();
    let mut flag =
        |step: usize, message: String| report.violations.push(Violation { step, message });
    if trace.steps.len() != order.len() || order.len() != game.n() {
        flag(
            0,
            format!(
                "trace has {} steps, order {} agents, game {} agents",
                trace.steps.len(),
                order.len(),
                game.n()
            ),
        );
    }
    let mut pi = Partition::empty(game.n());
    let mut prev_snapshot: Option<Partition> = Some(Partition::empty(game.n()));
    for (t, rec) in trace.steps.iter().enumerate() {
        let step = t + 1;
        if rec.step != step {
            flag(step, format!("step index {} out of sequence", rec.step));
        }
        match order.as_slice().get(t) {
            Some(&a) if a == rec.agent => {}
            Some(&a) => flag(
                step,
                format!("agent {} recorded, order says {a}", rec.agent),
            ),
            None => flag(step, "step beyond the arrival order".into()),
        }
        if rec.agent.0 >= game.n() {
            flag(step, format!("agent {} out of range", rec.agent));
            return report;
        }
        match legal_moves(&pi, rec.agent, mode) {
            Ok(moves) if moves.contains(&rec.mv) => {}
            Ok(_) => flag(step, format!("move {} not in the {mode} move set", rec.mv)),
            Err(e) => flag(step, e.to_string()),
        }
        match apply_move(&pi, rec.agent, &rec.mv) {
            Ok(next) => pi = next,
            Err(e) => {
                flag(step, format!("cannot apply {}: {e}", rec.mv));
                return report;
            }
        }
        let sw = social_welfare(game, &pi);
        if sw != rec.sw {
            flag(
                step,
                format!("recorded welfare {} but replay gives {sw}", rec.sw),
            );
        }
        if let Some(snap) = &rec.partition {
            if snap != &pi {
                flag(step, format!("snapshot {snap} differs from replay {pi}"));
            }
            if let Some(prev) = &prev_snapshot {
                match available_partitions(prev, rec.agent, mode) {
                    Ok(av) if av.contains(snap) => {}
                    Ok(_) => flag(step, format!("snapshot {snap} not reachable from {prev}")),
                    Err(e) => flag(step, e.to_string()),
                }
                if mode == Mode::Standard && &snap.without(rec.agent) != prev {
                    flag(step, "standard step changed earlier coalitions".into());
                }
            }
        }
        prev_snapshot = rec.partition.clone();
    }
    report
}
