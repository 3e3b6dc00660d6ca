use crate::error::{Error, Result};
use crate::game::{AgentId, Game, Weight};
use crate::oracles::{optimal_partition, MAX_PARTITION_N};
use crate::partition::positive_edge_sum;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Edge weight distribution for [`gen_random_ashg`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum WeightDist {
    /// Uniform integer in `[−W, W]`.
    Int(u32),
    /// Uniform integer in `[1, W]`.
    Pos(u32),
    /// Uniform in `[1, W]` with probability `p`, zero otherwise.
    Sparse { p: f64, w: u32 },
}

impl WeightDist {
    fn sample<R: Rng>(&self, rng: &mut R) -> i64 {
        match *self {
            WeightDist::Int(w) => rng.gen_range(-(w as i64)..=w as i64),
            WeightDist::Pos(w) => rng.gen_range(1..=w.max(1) as i64),
            WeightDist::Sparse { p, w } => {
                if rng.gen_bool(p) {
                    rng.gen_range(1..=w.max(1) as i64)
                } else {
                    0
                }
            }
        }
    }
}

impl fmt::Display for WeightDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightDist::Int(w) => write!(f, "int:{w}"),
            WeightDist::Pos(w) => write!(f, "pos:{w}"),
            WeightDist::Sparse { p, w } => write!(f, "sparse:{p}:{w}"),
        }
    }
}

impl FromStr for WeightDist {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |x: &str| {
            x.parse::<u32>()
                .map_err(|_| Error::parse(format!("bad bound {x:?} in {s:?}")))
        };
        match parts.as_slice() {
            ["int", w] => Ok(WeightDist::Int(num(w)?)),
            ["pos", w] => Ok(WeightDist::Pos(num(w)?)),
            ["sparse", p] | ["sparse", p, _] => {
                let p: f64 = p
                    .parse()
                    .map_err(|_| Error::parse(format!("bad density in {s:?}")))?;
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::parse(format!("density {p} outside [0, 1]")));
                }
                let w = if parts.len() == 3 { num(parts[2])? } else { 10 };
                Ok(WeightDist::Sparse { p, w })
            }
            _ => Err(Error::parse(format!(
                "unknown distribution {s:?}; expected int:W, pos:W or sparse:p[:W]"
            ))),
        }
    }
}

impl TryFrom<String> for WeightDist {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<WeightDist> for String {
    fn from(d: WeightDist) -> String {
        d.to_string()
    }
}

/// Seeded random game; edges are drawn in lexicographic order.
pub fn gen_random_ashg(n: usize, dist: &WeightDist, seed: u64) -> Game {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Game::from_fn(n, |_, _| Weight::int(dist.sample(&mut rng)))
}

/// Random forest of positive edges; every other pair weighs `−(P + 1)` with
/// `P` the total positive weight.
pub fn gen_tree_domain(n: usize, seed: u64) -> Result<Game> {
    if n < 2 {
        return Err(Error::precondition("tree domain needs n >= 2"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pos = vec![0i64; n * n];
    let mut total = 0i64;
    for i in 1..n {
        if i == 1 || rng.gen_bool(0.75) {
            let j = rng.gen_range(0..i);
            let w = rng.gen_range(1..=10);
            pos[j * n + i] = w;
            total += w;
        }
    }
    Ok(Game::from_fn(n, |i, j| {
        let w = pos[i * n + j];
        Weight::int(if w > 0 { w } else { -(total + 1) })
    }))
}

fn find(parent: &mut [usize], x: usize) -> usize {
    let mut r = x;
    while parent[r] != r {
        r = parent[r];
    }
    let mut c = x;
    while parent[c] != r {
        let next = parent[c];
        parent[c] = r;
        c = next;
    }
    r
}

/// Positive edges form a forest and every negative weight exceeds the total
/// positive weight in absolute value.
pub fn is_tree_domain(game: &Game) -> bool {
    let mut parent: Vec<usize> = (0..game.n()).collect();
    for (i, j, w) in game.edges() {
        if w.is_positive() {
            let (a, b) = (find(&mut parent, i.0), find(&mut parent, j.0));
            if a == b {
                return false;
            }
            parent[a] = b;
        }
    }
    let p = positive_edge_sum(game);
    game.edges().all(|(_, _, w)| !w.is_negative() || -w > p)
}

/// Game with a planted unique maximum edge of weight at least `λ·SW(π*)`.
#[derive(Clone, Debug)]
pub struct LambdaInstance {
    pub game: Game,
    pub e_max: (AgentId, AgentId),
    /// Retry at which the construction succeeded.
    pub attempts: usize,
}

pub const LAMBDA_RETRIES: usize = 8;

/// Checks uniqueness of the maximum edge and `w(e_max) ≥ λ·SW(π*)`, exactly
/// for `n ≤ 13` and via `SW(π*) ≤ 2·w(E⁺)` beyond.
pub fn lambda_condition(game: &Game, lambda: &Weight) -> Result<Option<(AgentId, AgentId)>> {
    let mut best: Option<(AgentId, AgentId, &Weight)> = None;
    let mut unique = false;
    for (i, j, w) in game.edges() {
        match best {
            Some((_, _, b)) if w < b => {}
            Some((_, _, b)) if w == b => unique = false,
            _ => {
                best = Some((i, j, w));
                unique = true;
            }
        }
    }
    let Some((i, j, m)) = best else {
        return Ok(None);
    };
    if !unique || !m.is_positive() {
        return Ok(None);
    }
    let opt = if game.n() <= MAX_PARTITION_N {
        optimal_partition(game)?.1
    } else {
        &positive_edge_sum(game) * &Weight::int(2)
    };
    Ok((m >= &(lambda * &opt)).then_some((i, j)))
}

/// Random integer game post-processed into the λ-domain. Later retries turn
/// a growing share of the other positive edges negative; since
/// `SW(π*) ≥ 2·w(e_max)`, only `λ ≤ 1/2` can ever succeed.
pub fn gen_lambda_domain(n: usize, lambda: &Weight, seed: u64) -> Result<LambdaInstance> {
    if n < 2 {
        return Err(Error::precondition("lambda domain needs n >= 2"));
    }
    if !lambda.is_positive() || lambda > &Weight::one() {
        return Err(Error::precondition(format!(
            "lambda must lie in (0, 1], got {lambda}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base: Vec<i64> = (0..n * (n - 1) / 2)
        .map(|_| rng.gen_range(-10..=10))
        .collect();
    let planted = rng.gen_range(0..base.len());
    let half = Weight::ratio(1, 2);
    for attempt in 0..LAMBDA_RETRIES {
        let share = attempt as f64 / (LAMBDA_RETRIES - 1) as f64;
        let mut vals: Vec<i64> = base
            .iter()
            .map(|&v| if v > 0 && rng.gen_bool(share) { -v } else { v })
            .collect();
        vals[planted] = 0;
        let max_other = vals.iter().copied().max().unwrap_or(0).max(0);
        let rest: i64 = vals.iter().filter(|&&v| v > 0).sum();
        // SW(π*) ≤ 2M + 2·rest, so M(1 − 2λ) ≥ 2λ·rest suffices.
        let mut m = BigRational::from_integer((max_other + 1).into());
        if lambda < &half {
            let l = lambda.as_rational();
            let one = BigRational::from_integer(1.into());
            let two = BigRational::from_integer(2.into());
            let need = (&two * l * BigRational::from_integer(rest.into())) / (&one - &two * l);
            if need > m {
                m = need.ceil();
            }
        }
        vals[planted] = 0;
        let mut k = 0;
        let game = Game::from_fn(n, |_, _| {
            let w = if k == planted {
                Weight::from(m.clone())
            } else {
                Weight::int(vals[k])
            };
            k += 1;
            w
        });
        if let Some(e) = lambda_condition(&game, lambda)? {
            return Ok(LambdaInstance {
                game,
                e_max: e,
                attempts: attempt + 1,
            });
        }
    }
    Err(Error::Generator(format!(
        "no lambda-domain game for lambda = {lambda} after {LAMBDA_RETRIES} attempts"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_games_repeat() {
        let d = WeightDist::Int(5);
        assert_eq!(gen_random_ashg(6, &d, 3), gen_random_ashg(6, &d, 3));
        assert_ne!(gen_random_ashg(6, &d, 3), gen_random_ashg(6, &d, 4));
        let z = gen_random_ashg(5, &WeightDist::Sparse { p: 0.0, w: 10 }, 1);
        assert!(z.edges().all(|(_, _, w)| w.is_zero()));
    }

    #[test]
    fn dist_strings() {
        for s in ["int:10", "pos:3", "sparse:0.25:10"] {
            assert_eq!(s.parse::<WeightDist>().unwrap().to_string(), s);
        }
        assert_eq!(
            "sparse:0.5".parse::<WeightDist>().unwrap(),
            WeightDist::Sparse { p: 0.5, w: 10 }
        );
        assert!("gauss:1".parse::<WeightDist>().is_err());
        assert!("sparse:2".parse::<WeightDist>().is_err());
    }

    #[test]
    fn tree_domain_checks() {
        let g = gen_tree_domain(2, 0).unwrap();
        assert!(g.weight(AgentId(0), AgentId(1)).unwrap().is_positive());
        for seed in 0..50 {
            assert!(is_tree_domain(&gen_tree_domain(9, seed).unwrap()));
        }
        let tri = Game::from_fn(3, |_, _| Weight::one());
        assert!(!is_tree_domain(&tri));
    }

    #[test]
    fn lambda_half_feasible_above_not() {
        let inst = gen_lambda_domain(6, &Weight::ratio(1, 2), 11).unwrap();
        assert!(lambda_condition(&inst.game, &Weight::ratio(1, 2))
            .unwrap()
            .is_some());
        let err = gen_lambda_domain(6, &Weight::ratio(3, 5), 11).unwrap_err();
        assert!(matches!(err, Error::Generator(_)));
    }
}
