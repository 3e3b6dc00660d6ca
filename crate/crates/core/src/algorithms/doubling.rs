use crate::engine::{Candidate, Move, OnlineAlgorithm, RevealedGame, StepView};
use crate::error::{Error, Result};
use crate::game::AgentId;

type Maker = Box<dyn Fn() -> Box<dyn OnlineAlgorithm> + Send + Sync>;

/// Runs a fresh known-`n` algorithm on consecutive phases of `2, 4, 8, …`
/// arrivals. Each phase only sees its own agents and coalitions, so no
/// coalition ever spans two phases.
pub struct IteratedDoubling {
    make: Maker,
    label: String,
    phase: usize,
    phase_agents: Vec<AgentId>,
    visible: Vec<bool>,
    inner: Option<Box<dyn OnlineAlgorithm>>,
}

pub fn iterated_doubling<F>(make: F) -> IteratedDoubling
where
    F: Fn() -> Box<dyn OnlineAlgorithm> + Send + Sync + 'static,
{
    let label = format!("doubling:{}", make().name());
    IteratedDoubling {
        make: Box::new(make),
        label,
        phase: 0,
        phase_agents: Vec::new(),
        visible: Vec::new(),
        inner: None,
    }
}

impl IteratedDoubling {
    pub fn named(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Zero-based index of the phase the most recent arrival belonged to.
    pub fn phase(&self) -> usize {
        self.phase
    }

    fn phase_len(phase: usize) -> usize {
        2usize << phase
    }

    fn start_phase(&mut self, phase: usize) -> Result<()> {
        self.phase = phase;
        self.phase_agents.clear();
        self.visible.iter_mut().for_each(|v| *v = false);
        let mut inner = (self.make)();
        inner
            .begin(Some(Self::phase_len(phase)))
            .map_err(|e| Error::Algorithm {
                algorithm: self.label.clone(),
                reason: format!("phase {phase}: {e}"),
            })?;
        self.inner = Some(inner);
        Ok(())
    }
}

impl OnlineAlgorithm for IteratedDoubling {
    fn name(&self) -> String {
        self.label.clone()
    }

    fn begin(&mut self, _horizon: Option<usize>) -> Result<()> {
        self.inner = None;
        self.phase = 0;
        self.phase_agents.clear();
        Ok(())
    }

    fn decide(&mut self, view: &StepView<'_>) -> Result<Move> {
        let game = view.revealed.game();
        if self.visible.len() != game.n() {
            self.visible = vec![false; game.n()];
        }
        if self.inner.is_none() {
            self.start_phase(0)?;
        } else if self.phase_agents.len() == Self::phase_len(self.phase) {
            self.start_phase(self.phase + 1)?;
        }
        self.phase_agents.push(view.agent);
        self.visible[view.agent.0] = true;

        let local = view.partition.restrict(&self.phase_agents);
        let visible = &self.visible;
        let candidates: Vec<Candidate> = view
            .candidates
            .iter()
            .filter(|c| match c.mv {
                Move::NewSingleton => true,
                Move::Join { anchor } | Move::DissolveAndPair { anchor, .. } => visible[anchor.0],
            })
            .cloned()
            .collect();
        let local_view = StepView {
            revealed: RevealedGame::new(game, visible),
            partition: &local,
            agent: view.agent,
            step: self.phase_agents.len(),
            candidates: &candidates,
        };
        self.inner
            .as_mut()
            .expect("phase started")
            .decide(&local_view)
    }
}
