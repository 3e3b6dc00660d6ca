//! Online coalition formation in additively separable hedonic games.

pub mod algorithms;
pub mod engine;
pub mod error;
pub mod experiments;
pub mod game;
pub mod instances;
pub mod oracles;
pub mod partition;
pub mod score;

pub use engine::{
    ArrivalOrder, Candidate, Mode, Move, OnlineAlgorithm, RevealedGame, RunTrace, StepView,
};
pub use error::{Error, Result};
pub use game::{AgentId, Game, InstanceFile, Weight};
pub use partition::{social_welfare, MatchingView, Partition};
pub use score::Score;
