use super::even_horizon;
use crate::engine::{Move, OnlineAlgorithm, StepView};
use crate::error::Result;
use crate::game::AgentId;

/// Arrival `n/2 + i` pairs with arrival `i` when their weight is positive.
#[derive(Clone, Debug, Default)]
pub struct Gma {
    half: usize,
    first: Vec<AgentId>,
}

pub fn gma() -> Gma {
    Gma::default()
}

impl OnlineAlgorithm for Gma {
    fn name(&self) -> String {
        "gma".into()
    }

    fn knows_n(&self) -> bool {
        true
    }

    fn begin(&mut self, horizon: Option<usize>) -> Result<()> {
        self.half = even_horizon("gma", horizon)? / 2;
        self.first.clear();
        Ok(())
    }

    fn decide(&mut self, view: &StepView<'_>) -> Result<Move> {
        if view.step <= self.half {
            self.first.push(view.agent);
            return Ok(Move::NewSingleton);
        }
        let Some(&partner) = self.first.get(view.step - self.half - 1) else {
            return Ok(Move::NewSingleton);
        };
        if view.revealed.scaled(view.agent, partner)?.is_positive() {
            Ok(Move::Join { anchor: partner })
        } else {
            Ok(Move::NewSingleton)
        }
    }
}
