//! Test-side oracles, written independently of the library's own oracles.
#![allow(dead_code)]

use cofo_core::engine::run_final;
use cofo_core::{ArrivalOrder, Game, Mode, OnlineAlgorithm, Partition, Weight};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::ops::Add;

pub type Q = BigRational;

pub fn q(num: i64, den: i64) -> Q {
    Q::new(num.into(), den.into())
}

pub fn qw(w: &Weight) -> Q {
    w.as_rational().clone()
}

pub fn to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Dense weight matrix as exact rationals.
pub fn matrix(game: &Game) -> Vec<Vec<Q>> {
    let n = game.n();
    let mut m = vec![vec![Q::zero(); n]; n];
    for (i, j, w) in game.edges() {
        m[i.0][j.0] = qw(w);
        m[j.0][i.0] = qw(w);
    }
    m
}

/// Weights multiplied by the lcm of all denominators, plus that lcm.
fn integer_matrix(game: &Game) -> (Vec<Vec<BigInt>>, BigInt) {
    let m = matrix(game);
    let l = m
        .iter()
        .flatten()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints = m
        .iter()
        .map(|row| row.iter().map(|x| x.numer() * (&l / x.denom())).collect())
        .collect();
    (ints, l)
}

fn as_i128(m: &[Vec<BigInt>]) -> Option<Vec<Vec<i128>>> {
    let n = m.len() as i128;
    let limit = i128::MAX / (4 * n * n).max(1);
    m.iter()
        .map(|row| {
            row.iter()
                .map(|x| x.to_i128().filter(|v| v.abs() < limit))
                .collect::<Option<Vec<_>>>()
        })
        .collect()
}

trait Num: Clone + Ord + Zero + for<'a> Add<&'a Self, Output = Self> + Send + Sync {
    fn is_pos(&self) -> bool {
        self > &Self::zero()
    }
}
impl Num for i128 {}
impl Num for BigInt {}

/// Best value of `f[mask]` over set partitions, `O(3^n)` subset DP.
fn subset_dp<T: Num>(w: &[Vec<T>]) -> T {
    let n = w.len();
    let full = 1usize << n;
    // value of a single coalition: twice the pair weights inside it
    let mut val = vec![T::zero(); full];
    for mask in 1..full {
        let low = mask.trailing_zeros() as usize;
        let rest = mask & (mask - 1);
        let mut v = val[rest].clone();
        for j in 0..n {
            if rest >> j & 1 == 1 {
                v = v + &w[low][j] + &w[low][j];
            }
        }
        val[mask] = v;
    }
    let mut f = vec![T::zero(); full];
    for mask in 1..full {
        let low = mask & mask.wrapping_neg();
        let others = mask ^ low;
        let mut best: Option<T> = None;
        let mut sub = others;
        loop {
            let c = sub | low;
            let cand = val[c].clone() + &f[mask ^ c];
            if best.as_ref().is_none_or(|b| &cand > b) {
                best = Some(cand);
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & others;
        }
        f[mask] = best.expect("at least one submask");
    }
    f[full - 1].clone()
}

/// Exhaustive search over all matchings that use positive edges.
fn brute_matching_int<T: Num>(w: &[Vec<T>]) -> T {
    fn go<T: Num>(w: &[Vec<T>], used: &mut [bool], from: usize) -> T {
        let n = w.len();
        let Some(i) = (from..n).find(|&i| !used[i]) else {
            return T::zero();
        };
        used[i] = true;
        let mut best = go(w, used, i + 1);
        for j in i + 1..n {
            if !used[j] && w[i][j].is_pos() {
                used[j] = true;
                let v = go(w, used, i + 1) + &w[i][j];
                if v > best {
                    best = v;
                }
                used[j] = false;
            }
        }
        used[i] = false;
        best
    }
    go(w, &mut vec![false; w.len()], 0)
}

/// `max_π SW(π)` by subset DP.
pub fn opt_partition(game: &Game) -> Q {
    assert!(game.n() <= 14, "subset DP is for small games");
    if game.n() == 0 {
        return Q::zero();
    }
    let (m, l) = integer_matrix(game);
    let v = match as_i128(&m) {
        Some(small) => BigInt::from(subset_dp(&small)),
        None => subset_dp(&m),
    };
    Q::new(v, l)
}

/// Maximum matching weight `w(μ*)` by enumeration.
pub fn opt_matching(game: &Game) -> Q {
    let (m, l) = integer_matrix(game);
    let v = match as_i128(&m) {
        Some(small) => BigInt::from(brute_matching_int(&small)),
        None => brute_matching_int(&m),
    };
    Q::new(v, l)
}

pub fn positive_sum(game: &Game) -> Q {
    game.edges()
        .map(|(_, _, w)| qw(w))
        .filter(|x| x > &Q::zero())
        .sum()
}

/// `SW(π)` recomputed from the weight matrix.
pub fn welfare(m: &[Vec<Q>], coalitions: &[Vec<usize>]) -> Q {
    let mut s = Q::zero();
    for c in coalitions {
        for (x, &i) in c.iter().enumerate() {
            for &j in &c[x + 1..] {
                s += &m[i][j] * Q::from_integer(2.into());
            }
        }
    }
    s
}

pub fn partition_welfare(m: &[Vec<Q>], p: &Partition) -> Q {
    welfare(m, &p.to_indices())
}

pub fn together(p: &Partition, a: usize, b: usize) -> bool {
    p.to_indices()
        .iter()
        .any(|c| c.contains(&a) && c.contains(&b))
}

pub fn is_matching(p: &Partition) -> bool {
    p.to_indices().iter().all(|c| c.len() <= 2)
}

pub fn run(game: &Game, order: &[usize], alg: &mut dyn OnlineAlgorithm, mode: Mode) -> Partition {
    let order = ArrivalOrder::from_indices(order).expect("valid order");
    run_final(game, &order, alg, mode)
        .expect("run succeeds")
        .partition
}

fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let j = (i..v.len())
        .rev()
        .find(|&j| v[j] > v[i - 1])
        .expect("successor exists");
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Folds `f` over all `n!` orders; split on the first agent across threads.
pub fn over_orders<T, F, R>(n: usize, identity: T, f: F, reduce: R) -> T
where
    T: Send + Clone + Sync,
    F: Fn(&[usize]) -> T + Sync,
    R: Fn(T, T) -> T + Sync,
{
    (0..n)
        .into_par_iter()
        .map(|first| {
            let mut rest: Vec<usize> = (0..n).filter(|&x| x != first).collect();
            let mut acc = identity.clone();
            let mut perm = vec![0; n];
            loop {
                perm[0] = first;
                perm[1..].copy_from_slice(&rest);
                acc = reduce(acc, f(&perm));
                if !next_permutation(&mut rest) {
                    break;
                }
            }
            acc
        })
        .reduce(|| identity.clone(), &reduce)
}

pub fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// Fraction of all orders on which `hit` holds.
pub fn order_probability<F: Fn(&[usize]) -> bool + Sync>(n: usize, hit: F) -> Q {
    let hits = over_orders(n, 0u64, |o| hit(o) as u64, |a, b| a + b);
    Q::new(hits.into(), factorial(n).into())
}

/// Average of `f` over all orders.
pub fn order_mean<F: Fn(&[usize]) -> Q + Sync>(n: usize, f: F) -> Q {
    let s = over_orders(n, Q::zero(), f, |a, b| a + b);
    s / Q::from_integer(factorial(n).into())
}

pub fn order_min<F: Fn(&[usize]) -> Q + Sync>(n: usize, f: F) -> Q {
    over_orders(
        n,
        None,
        |o| Some(f(o)),
        |a: Option<Q>, b| match (a, b) {
            (Some(x), Some(y)) => Some(x.min(y)),
            (x, None) => x,
            (None, y) => y,
        },
    )
    .expect("n >= 1")
}

pub fn random_order(n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut v: Vec<usize> = (0..n).collect();
    v.shuffle(rng);
    v
}

/// Sample mean and standard error of `f` over uniformly random orders.
pub fn mc_mean<F: Fn(&[usize]) -> f64 + Sync>(
    n: usize,
    trials: u64,
    seed: u64,
    f: F,
) -> (f64, f64) {
    let (s, s2) = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng =
                ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(t));
            let x = f(&random_order(n, &mut rng));
            (x, x * x)
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let m = trials as f64;
    let mean = s / m;
    let var = ((s2 / m - mean * mean) * m / (m - 1.0).max(1.0)).max(0.0);
    (mean, (var / m).sqrt())
}
