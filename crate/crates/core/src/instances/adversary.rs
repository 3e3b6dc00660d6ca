use crate::engine::{run_online, ArrivalOrder, Mode, OnlineAlgorithm, Stepper};
use crate::error::{Error, Result};
use crate::game::{AgentId, Game, Weight};
use crate::partition::Partition;
use num_bigint::BigInt;
use num_traits::Pow;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdversaryStep {
    /// Agent `a_i` (index `i − 1`).
    pub agent: AgentId,
    /// Earlier agents that received weight `−n^i`.
    pub s_set: Vec<AgentId>,
    /// Some earlier partition had a coalition of size three or more, so the
    /// new agent got all-zero weights.
    pub zero_branch: bool,
    /// `π_i`, the algorithm's partition after this arrival.
    pub partition: Partition,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdversaryTranscript {
    pub n: usize,
    pub algorithm: String,
    pub steps: Vec<AdversaryStep>,
}

impl AdversaryTranscript {
    /// Smallest 1-based step whose partition has a coalition of size ≥ 3.
    pub fn j_star(&self) -> Option<usize> {
        self.steps
            .iter()
            .position(|s| s.partition.max_coalition_size() >= 3)
            .map(|p| p + 1)
    }
}

pub struct AdversaryRun {
    pub game: Game,
    pub order: ArrivalOrder,
    pub transcript: AdversaryTranscript,
    /// Set when `n` is below the range the bound is stated for.
    pub warning: Option<String>,
}

pub const ADVERSARY_MIN_N: usize = 12;

fn power(n: usize, i: usize) -> BigInt {
    BigInt::from(n).pow(i as u32)
}

/// Builds the instance online against `alg` (free dissolution): each new
/// agent `a_i` gets `−n^i` towards the lower-indexed member of every pair of
/// `π_{i−1}` and `+n^i` towards everyone else, or zero weights once any
/// coalition of size three or more has appeared.
pub fn adaptive_adversary(alg: &mut dyn OnlineAlgorithm, n: usize) -> Result<AdversaryRun> {
    if n == 0 {
        return Err(Error::precondition("adversary needs n >= 1"));
    }
    let warning = (n < ADVERSARY_MIN_N)
        .then(|| format!("n = {n} is below {ADVERSARY_MIN_N}; no bound is claimed"));
    let name = alg.name();
    let mut w = vec![vec![BigInt::from(0); n]; n];
    let mut steps: Vec<AdversaryStep> = Vec::with_capacity(n);
    let mut seen_large = false;
    let build = |w: &Vec<Vec<BigInt>>| Game::from_fn(n, |i, j| Weight::from(w[i][j].clone()));
    let mut stepper = Stepper::new(alg, n, BigInt::from(1), Mode::Dissolution)?;
    for idx in 0..n {
        let i = idx + 1;
        let mut s_set = Vec::new();
        if !seen_large {
            let prev = stepper.partition();
            s_set = prev
                .coalitions()
                .iter()
                .filter(|c| c.len() == 2)
                .map(|c| c[0])
                .collect();
            let mag = power(n, i);
            for j in 0..idx {
                let v = if s_set.contains(&AgentId(j)) {
                    -mag.clone()
                } else {
                    mag.clone()
                };
                w[idx][j] = v.clone();
                w[j][idx] = v;
            }
        }
        let game = build(&w);
        stepper.step(&game, AgentId(idx))?;
        let partition = stepper.partition().clone();
        steps.push(AdversaryStep {
            agent: AgentId(idx),
            s_set,
            zero_branch: seen_large,
            partition,
        });
        if stepper.partition().max_coalition_size() >= 3 {
            seen_large = true;
        }
    }
    Ok(AdversaryRun {
        game: build(&w),
        order: ArrivalOrder::identity(n),
        transcript: AdversaryTranscript {
            n,
            algorithm: name,
            steps,
        },
        warning,
    })
}

/// Lower-bound witness for the optimum: the best pair `{a_{j*}, a_{i*}}`
/// when a large coalition appeared, otherwise one coalition of every agent
/// outside `S_n` with `S_n` left single.
pub fn adversary_witness(transcript: &AdversaryTranscript, game: &Game) -> Result<Partition> {
    let n = transcript.n;
    if transcript.steps.len() != n || game.n() != n {
        return Err(Error::precondition("adversary transcript is incomplete"));
    }
    if let Some(js) = transcript.j_star() {
        let a = AgentId(js - 1);
        let target = Weight::from(power(n, js));
        let partner = (0..js - 1)
            .map(AgentId)
            .find(|&b| game.weight(a, b).is_ok_and(|w| *w == target));
        let mut coalitions: Vec<Vec<AgentId>> = Vec::new();
        match partner {
            Some(b) => {
                coalitions.push(vec![a, b]);
                coalitions.extend(
                    (0..n)
                        .filter(|&k| k != a.0 && k != b.0)
                        .map(|k| vec![AgentId(k)]),
                );
            }
            None => coalitions.extend((0..n).map(|k| vec![AgentId(k)])),
        }
        return Partition::from_coalitions(n, coalitions);
    }
    let s_n = &transcript.steps[n - 1].s_set;
    let big: Vec<AgentId> = (0..n).map(AgentId).filter(|a| !s_n.contains(a)).collect();
    let mut coalitions = vec![big];
    coalitions.extend(s_n.iter().map(|&a| vec![a]));
    Partition::from_coalitions(n, coalitions)
}

/// Re-runs `alg` on the finished game and checks it reproduces every `π_i`.
pub fn replay_matches(run: &AdversaryRun, alg: &mut dyn OnlineAlgorithm) -> Result<bool> {
    let tr = run_online(&run.game, &run.order, alg, Mode::Dissolution)?;
    Ok(tr
        .steps
        .iter()
        .zip(&run.transcript.steps)
        .all(|(r, s)| r.partition.as_ref() == Some(&s.partition)))
}
