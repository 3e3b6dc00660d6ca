//! Exact offline optima and expectation machinery over arrival orders.

mod expectation;
mod offline;

pub use expectation::{
    competitive_ratio, enumerate_orders, exact_event_probability, exact_expected_welfare,
    mc_estimate, mc_event_probability, mc_expected_welfare, ratio, Arrival, Budget, OptKind,
    OrderStats, RatioEstimate,
};
pub use offline::{
    check_avgmat_bound, max_weight_matching, optimal_partition, MAX_ENUM_N, MAX_MATCHING_N,
    MAX_PARTITION_N,
};

use crate::score::Score;
use num_traits::Zero;
use std::ops::AddAssign;

/// Accumulator for hot loops: plain `i128` when the game's scale allows it.
pub(crate) trait Acc:
    Clone + Ord + Zero + for<'a> AddAssign<&'a Self> + Send + Sync
{
    fn from_score(s: &Score) -> Self;
    fn into_score(self) -> Score;
}

impl Acc for i128 {
    fn from_score(s: &Score) -> Self {
        s.as_i128().expect("checked to fit")
    }
    fn into_score(self) -> Score {
        Score::Small(self)
    }
}

impl Acc for Score {
    fn from_score(s: &Score) -> Self {
        s.clone()
    }
    fn into_score(self) -> Score {
        self
    }
}

/// True when every partial welfare sum over `scores` stays far inside `i128`.
pub(crate) fn fits_i128<'a>(scores: impl IntoIterator<Item = &'a Score>) -> bool {
    let mut total: i128 = 0;
    for s in scores {
        match s.as_i128().and_then(|v| v.checked_abs()) {
            Some(v) => match total.checked_add(v) {
                Some(t) if t < i128::MAX / 8 => total = t,
                _ => return false,
            },
            None => return false,
        }
    }
    true
}
