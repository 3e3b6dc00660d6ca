//! Online algorithms, all written against [`OnlineAlgorithm`](crate::engine::OnlineAlgorithm).

mod doubling;
mod dta;
mod gma;
mod greedy;
mod maxe;
mod registry;

pub use doubling::{iterated_doubling, IteratedDoubling};
pub use dta::{dta, dta_default, t_default, Dta, DtaThreshold};
pub use gma::{gma, Gma};
pub use greedy::{
    best_improving, gdy, gdy_matching, gdy_standard_only, wgdy, Gdy, Singletons, Wgdy,
};
pub use maxe::{i_maxe, maxe, odds_stopping_time, perturb_distinct, Maxe, OddsPlan};
pub use registry::AlgSpec;

use crate::error::{Error, Result};

/// Shared constructor check for algorithms defined only for a known even `n`.
fn even_horizon(name: &str, horizon: Option<usize>) -> Result<usize> {
    match horizon {
        Some(n) if n % 2 == 0 => Ok(n),
        Some(n) => Err(Error::Precondition(format!("{name} needs an even number of agents, got {n}"))),
        None => Err(Error::Algorithm {
            algorithm: name.into(),
            reason: "needs the number of agents in advance".into(),
        }),
    }
}
