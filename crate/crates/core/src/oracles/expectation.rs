use super::offline::{max_weight_matching, optimal_partition, MAX_ENUM_N};
use crate::engine::{run_final, AlgorithmFactory, ArrivalOrder, Mode, RunOutcome};
use crate::error::{Error, Result};
use crate::game::{AgentId, Game, Weight};
use crate::partition::Partition;
use crate::score::Score;
use num_bigint::BigInt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Point estimate with a 95% normal-approximation interval; `exact` is set
/// only when every arrival order was enumerated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioEstimate {
    pub point: f64,
    pub exact: Option<Weight>,
    pub trials: u64,
    pub half_width: f64,
    pub std_error: f64,
    pub seed: u64,
}

impl RatioEstimate {
    fn exact(w: Weight, trials: u64) -> Self {
        RatioEstimate {
            point: w.to_f64(),
            exact: Some(w),
            trials,
            half_width: 0.0,
            std_error: 0.0,
            seed: 0,
        }
    }

    /// `point − k·σ`, the one-sided acceptance floor.
    pub fn lower(&self, sigmas: f64) -> f64 {
        self.point - sigmas * self.std_error
    }

    pub fn upper(&self, sigmas: f64) -> f64 {
        self.point + sigmas * self.std_error
    }
}

/// Aggregate over all `n!` arrival orders.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderStats {
    pub orders: u64,
    /// Sum of final welfare on the game's integer scale.
    pub welfare_sum: Score,
    pub min_welfare: Score,
    /// Lexicographically smallest order attaining `min_welfare`.
    pub worst_order: ArrivalOrder,
    /// Orders whose final partition satisfied the event.
    pub hits: u64,
}

impl OrderStats {
    pub fn expected_welfare(&self, game: &Game) -> Weight {
        &game.unscale(&self.welfare_sum) / &Weight::from(BigInt::from(self.orders))
    }

    pub fn probability(&self) -> Weight {
        Weight::from_bigints(self.hits.into(), self.orders.into())
    }
}

fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = v.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = v
        .iter()
        .rposition(|&x| x > v[i])
        .expect("pivot has a successor");
    v.swap(i, j);
    v[i + 1..].reverse();
    true
}

pub type Event<'a> = &'a (dyn Fn(&Partition) -> bool + Sync);

/// Runs a fresh algorithm on every arrival order (parallel over the first arrival).
pub fn enumerate_orders(
    game: &Game,
    factory: &dyn AlgorithmFactory,
    mode: Mode,
    event: Option<Event<'_>>,
) -> Result<OrderStats> {
    let n = game.n();
    if n > MAX_ENUM_N {
        return Err(Error::Capacity {
            what: "arrival-order enumeration",
            n,
            max: MAX_ENUM_N,
        });
    }
    if n == 0 {
        return Ok(OrderStats {
            orders: 1,
            welfare_sum: Score::ZERO,
            min_welfare: Score::ZERO,
            worst_order: ArrivalOrder::identity(0),
            hits: u64::from(event.is_some_and(|e| e(&Partition::empty(0)))),
        });
    }
    let chunks: Vec<OrderStats> = (0..n)
        .into_par_iter()
        .map(|first| -> Result<OrderStats> {
            let mut rest: Vec<usize> = (0..n).filter(|&i| i != first).collect();
            let mut acc: Option<OrderStats> = None;
            loop {
                let seq: Vec<AgentId> = std::iter::once(first)
                    .chain(rest.iter().copied())
                    .map(AgentId)
                    .collect();
                let order = ArrivalOrder::new(seq)?;
                let mut alg = factory.build();
                let out = run_final(game, &order, alg.as_mut(), mode)?;
                let hit = u64::from(event.is_some_and(|e| e(&out.partition)));
                match &mut acc {
                    None => {
                        acc = Some(OrderStats {
                            orders: 1,
                            welfare_sum: out.welfare.clone(),
                            min_welfare: out.welfare,
                            worst_order: order,
                            hits: hit,
                        })
                    }
                    Some(a) => {
                        a.orders += 1;
                        a.welfare_sum += &out.welfare;
                        a.hits += hit;
                        if out.welfare < a.min_welfare {
                            a.min_welfare = out.welfare;
                            a.worst_order = order;
                        }
                    }
                }
                if !next_permutation(&mut rest) {
                    break;
                }
            }
            Ok(acc.expect("at least one order"))
        })
        .collect::<Result<_>>()?;
    let mut it = chunks.into_iter();
    let mut total = it.next().expect("n >= 1");
    for c in it {
        total.orders += c.orders;
        total.welfare_sum += &c.welfare_sum;
        total.hits += c.hits;
        if c.min_welfare < total.min_welfare {
            total.min_welfare = c.min_welfare;
            total.worst_order = c.worst_order;
        }
    }
    Ok(total)
}

/// `E_σ[SW(ALG(G, σ))]` over all `n!` orders, exactly.
pub fn exact_expected_welfare(
    game: &Game,
    factory: &dyn AlgorithmFactory,
    mode: Mode,
) -> Result<Weight> {
    Ok(enumerate_orders(game, factory, mode, None)?.expected_welfare(game))
}

/// Exact probability over uniform arrival orders that the output satisfies `event`.
pub fn exact_event_probability(
    game: &Game,
    factory: &dyn AlgorithmFactory,
    mode: Mode,
    event: Event<'_>,
) -> Result<Weight> {
    Ok(enumerate_orders(game, factory, mode, Some(event))?.probability())
}

/// Monte Carlo mean of `value` over uniformly random orders. Trial `t`
/// shuffles with a generator seeded by `seed ^ t`, so results do not depend
/// on thread scheduling.
pub fn mc_estimate<F>(
    game: &Game,
    factory: &dyn AlgorithmFactory,
    mode: Mode,
    trials: u64,
    seed: u64,
    value: F,
) -> Result<RatioEstimate>
where
    F: Fn(&RunOutcome) -> f64 + Sync,
{
    if trials == 0 {
        return Err(Error::precondition("Monte Carlo needs at least one trial"));
    }
    let samples: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<f64> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ t);
            let order = ArrivalOrder::random(game.n(), &mut rng);
            let mut alg = factory.build();
            let out = run_final(game, &order, alg.as_mut(), mode)?;
            Ok(value(&out))
        })
        .collect::<Result<_>>()?;
    // Welford
    let (mut mean, mut m2) = (0.0f64, 0.0f64);
    for (k, x) in samples.iter().enumerate() {
        let d = x - mean;
        mean += d / (k + 1) as f64;
        m2 += d * (x - mean);
    }
    let var = if trials > 1 {
        m2 / (trials - 1) as f64
    } else {
        0.0
    };
    let se = (var / trials as f64).sqrt();
    Ok(RatioEstimate {
        point: mean,
        exact: None,
        trials,
        half_width: 1.96 * se,
        std_error: se,
        seed,
    })
}

pub fn mc_expected_welfare(
    game: &Game,
    factory: &dyn AlgorithmFactory,
    mode: Mode,
    trials: u64,
    seed: u64,
) -> Result<RatioEstimate> {
    mc_estimate(game, factory, mode, trials, seed, |o| {
        game.unscale(&o.welfare).to_f64()
    })
}

pub fn mc_event_probability(
    game: &Game,
    factory: &dyn AlgorithmFactory,
    mode: Mode,
    trials: u64,
    seed: u64,
    event: Event<'_>,
) -> Result<RatioEstimate> {
    mc_estimate(game, factory, mode, trials, seed, |o| {
        if event(&o.partition) {
            1.0
        } else {
            0.0
        }
    })
}

/// `num / opt` with `0/0 = 1` and `x/0 = 0` for negative `x`.
pub fn ratio(num: &Weight, opt: &Weight) -> Weight {
    if opt.is_zero() {
        if num.is_negative() {
            Weight::zero()
        } else {
            Weight::one()
        }
    } else {
        num / opt
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Budget {
    Exact,
    MonteCarlo { trials: u64, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Arrival {
    Fixed(ArrivalOrder),
    Worst,
    Random(Budget),
}

/// Offline benchmark: best partition, or best matching for matching algorithms.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptKind {
    #[default]
    Coalition,
    Matching,
}

impl OptKind {
    pub fn welfare(&self, game: &Game) -> Result<Weight> {
        match self {
            OptKind::Coalition => Ok(optimal_partition(game)?.1),
            OptKind::Matching => Ok(&max_weight_matching(game)?.1 * &Weight::int(2)),
        }
    }
}

/// `SW(ALG)/SW(OPT)` under a fixed order, the worst order, or random arrival.
pub fn competitive_ratio(
    game: &Game,
    factory: &dyn AlgorithmFactory,
    mode: Mode,
    arrival: &Arrival,
    opt: OptKind,
) -> Result<RatioEstimate> {
    let opt_sw = opt.welfare(game)?;
    match arrival {
        Arrival::Fixed(order) => {
            let mut alg = factory.build();
            let out = run_final(game, order, alg.as_mut(), mode)?;
            Ok(RatioEstimate::exact(
                ratio(&game.unscale(&out.welfare), &opt_sw),
                1,
            ))
        }
        Arrival::Worst => {
            let st = enumerate_orders(game, factory, mode, None)?;
            Ok(RatioEstimate::exact(
                ratio(&game.unscale(&st.min_welfare), &opt_sw),
                st.orders,
            ))
        }
        Arrival::Random(Budget::Exact) => {
            let st = enumerate_orders(game, factory, mode, None)?;
            Ok(RatioEstimate::exact(
                ratio(&st.expected_welfare(game), &opt_sw),
                st.orders,
            ))
        }
        Arrival::Random(Budget::MonteCarlo { trials, seed }) => {
            let mut est = mc_expected_welfare(game, factory, mode, *trials, *seed)?;
            if opt_sw.is_zero() {
                est.point = if est.point < 0.0 { 0.0 } else { 1.0 };
                est.half_width = 0.0;
                est.std_error = 0.0;
            } else {
                let o = opt_sw.to_f64();
                est.point /= o;
                est.half_width /= o;
                est.std_error /= o;
            }
            Ok(est)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::{AlgSpec, Singletons};
    use crate::engine::OnlineAlgorithm;

    #[test]
    fn permutation_walk_counts() {
        let mut v = vec![0, 1, 2, 3];
        let mut c = 1;
        while next_permutation(&mut v) {
            c += 1;
        }
        assert_eq!(c, 24);
        assert_eq!(v, vec![3, 2, 1, 0]);
    }

    #[test]
    fn singleton_policy_is_zero() {
        let g = Game::from_fn(4, |_, _| Weight::one());
        let f = || Box::new(Singletons) as Box<dyn OnlineAlgorithm>;
        assert_eq!(
            exact_expected_welfare(&g, &f, Mode::Standard).unwrap(),
            Weight::zero()
        );
        let r =
            competitive_ratio(&g, &f, Mode::Standard, &Arrival::Worst, OptKind::Coalition).unwrap();
        assert_eq!(r.exact, Some(Weight::zero()));
    }

    #[test]
    fn ratio_conventions() {
        assert_eq!(ratio(&Weight::zero(), &Weight::zero()), Weight::one());
        assert_eq!(ratio(&Weight::int(-1), &Weight::zero()), Weight::zero());
        assert_eq!(ratio(&Weight::int(1), &Weight::int(4)), Weight::ratio(1, 4));
    }

    #[test]
    fn mc_is_reproducible_and_degenerate_when_constant() {
        let g = Game::from_fn(5, |_, _| Weight::one());
        let a = mc_expected_welfare(&g, &AlgSpec::Gdy, Mode::Standard, 200, 7).unwrap();
        let b = mc_expected_welfare(&g, &AlgSpec::Gdy, Mode::Standard, 200, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.point, 20.0);
        assert_eq!(a.half_width, 0.0);
    }
}
