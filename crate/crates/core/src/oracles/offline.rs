use super::{fits_i128, Acc};
use crate::error::{Error, Result};
use crate::game::{AgentId, Game, Weight};
use crate::partition::{positive_edge_sum_scaled, MatchingView, Partition};
use crate::score::Score;
use std::collections::HashMap;

pub const MAX_PARTITION_N: usize = 13;
pub const MAX_MATCHING_N: usize = 24;
pub const MAX_ENUM_N: usize = 9;

fn dense<T: Acc>(game: &Game) -> Vec<T> {
    let n = game.n();
    let mut w = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            w.push(T::from_score(game.scaled(AgentId(i), AgentId(j))));
        }
    }
    w
}

struct PartitionSearch<T> {
    n: usize,
    w: Vec<T>,
    /// `slack[i]`: most welfare agents `i..n` could still add.
    slack: Vec<T>,
    labels: Vec<usize>,
    blocks: Vec<Vec<usize>>,
    best: Option<(T, Vec<usize>)>,
}

impl<T: Acc> PartitionSearch<T> {
    fn new(n: usize, w: Vec<T>) -> Self {
        let mut slack = vec![T::zero(); n + 1];
        for i in (0..n).rev() {
            let mut s = slack[i + 1].clone();
            for j in 0..i {
                let x = &w[i * n + j];
                if *x > T::zero() {
                    s += x;
                    s += x;
                }
            }
            slack[i] = s;
        }
        PartitionSearch {
            n,
            w,
            slack,
            labels: vec![0; n],
            blocks: Vec::new(),
            best: None,
        }
    }

    // Restricted growth strings in lexicographic order; a later partition
    // replaces the incumbent only when strictly better.
    fn dfs(&mut self, i: usize, value: T) {
        if let Some((b, _)) = &self.best {
            let mut bound = value.clone();
            bound += &self.slack[i];
            if bound <= *b {
                return;
            }
        }
        if i == self.n {
            self.best = Some((value, self.labels.clone()));
            return;
        }
        for b in 0..=self.blocks.len() {
            let mut v = value.clone();
            let fresh = b == self.blocks.len();
            if !fresh {
                for &j in &self.blocks[b] {
                    let x = &self.w[i * self.n + j];
                    v += x;
                    v += x;
                }
                self.blocks[b].push(i);
            } else {
                self.blocks.push(vec![i]);
            }
            self.labels[i] = b;
            self.dfs(i + 1, v);
            if fresh {
                self.blocks.pop();
            } else {
                self.blocks[b].pop();
            }
        }
    }
}

fn run_partition_search<T: Acc>(game: &Game) -> (Score, Vec<usize>) {
    let mut s = PartitionSearch::<T>::new(game.n(), dense(game));
    s.dfs(0, T::zero());
    let (v, labels) = s.best.expect("at least one partition");
    (v.into_score(), labels)
}

/// Welfare-optimal partition by exhaustive search over set partitions.
pub fn optimal_partition(game: &Game) -> Result<(Partition, Weight)> {
    let n = game.n();
    if n > MAX_PARTITION_N {
        return Err(Error::Capacity {
            what: "optimal_partition",
            n,
            max: MAX_PARTITION_N,
        });
    }
    let pairs = (0..n).flat_map(|i| (0..n).map(move |j| (i, j)));
    let (value, labels) = if fits_i128(pairs.map(|(i, j)| game.scaled(AgentId(i), AgentId(j)))) {
        run_partition_search::<i128>(game)
    } else {
        run_partition_search::<Score>(game)
    };
    let k = labels.iter().max().map_or(0, |m| m + 1);
    let mut coalitions = vec![Vec::new(); k];
    for (i, &b) in labels.iter().enumerate() {
        coalitions[b].push(AgentId(i));
    }
    let p = Partition::from_coalitions(n, coalitions)?;
    Ok((p, game.unscale(&value)))
}

struct MatchingSearch<T> {
    n: usize,
    w: Vec<T>,
    memo: HashMap<u32, T>,
}

impl<T: Acc> MatchingSearch<T> {
    fn best(&mut self, mask: u32) -> T {
        if mask == 0 {
            return T::zero();
        }
        if let Some(v) = self.memo.get(&mask) {
            return v.clone();
        }
        let low = mask.trailing_zeros() as usize;
        let rest = mask & !(1 << low);
        let mut top = self.best(rest);
        let mut m = rest;
        while m != 0 {
            let j = m.trailing_zeros() as usize;
            m &= m - 1;
            let x = self.w[low * self.n + j].clone();
            if x > T::zero() {
                let mut v = self.best(rest & !(1 << j));
                v += &x;
                if v > top {
                    top = v;
                }
            }
        }
        self.memo.insert(mask, top.clone());
        top
    }

    fn reconstruct(&mut self, mut mask: u32) -> Vec<(usize, usize)> {
        let mut pairs = Vec::new();
        while mask != 0 {
            let low = mask.trailing_zeros() as usize;
            let rest = mask & !(1 << low);
            let target = self.best(mask);
            if self.best(rest) == target {
                mask = rest;
                continue;
            }
            let mut m = rest;
            let mut found = None;
            while m != 0 {
                let j = m.trailing_zeros() as usize;
                m &= m - 1;
                let x = self.w[low * self.n + j].clone();
                if x > T::zero() {
                    let mut v = self.best(rest & !(1 << j));
                    v += &x;
                    if v == target {
                        found = Some(j);
                        break;
                    }
                }
            }
            let j = found.expect("memo is consistent");
            pairs.push((low, j));
            mask = rest & !(1 << j);
        }
        pairs
    }
}

fn run_matching<T: Acc>(game: &Game) -> (Score, Vec<(usize, usize)>) {
    let n = game.n();
    let mut s = MatchingSearch::<T> {
        n,
        w: dense(game),
        memo: HashMap::new(),
    };
    let full = if n == 0 { 0 } else { u32::MAX >> (32 - n) };
    let v = s.best(full);
    let pairs = s.reconstruct(full);
    (v.into_score(), pairs)
}

/// Maximum weight matching by memoized search over agent bitmasks. Only
/// positive edges are ever matched.
pub fn max_weight_matching(game: &Game) -> Result<(MatchingView, Weight)> {
    let n = game.n();
    if n > MAX_MATCHING_N {
        return Err(Error::Capacity {
            what: "max_weight_matching",
            n,
            max: MAX_MATCHING_N,
        });
    }
    let (v, pairs) = if fits_i128(game.edges().map(|(i, j, _)| game.scaled(i, j))) {
        run_matching::<i128>(game)
    } else {
        run_matching::<Score>(game)
    };
    let mut coalitions: Vec<Vec<AgentId>> = pairs
        .iter()
        .map(|&(i, j)| vec![AgentId(i), AgentId(j)])
        .collect();
    let mut matched = vec![false; n];
    for &(i, j) in &pairs {
        matched[i] = true;
        matched[j] = true;
    }
    coalitions.extend((0..n).filter(|&i| !matched[i]).map(|i| vec![AgentId(i)]));
    let p = Partition::from_coalitions(n, coalitions)?;
    Ok((MatchingView::new(p)?, game.unscale(&v)))
}

/// `w(μ*) ≥ w(E⁺)/n`, checked exactly.
pub fn check_avgmat_bound(game: &Game) -> Result<bool> {
    let (_, w) = max_weight_matching(game)?;
    let n = game.n().max(1) as i64;
    let lhs = &w * &Weight::int(n);
    Ok(lhs >= game.unscale(&positive_edge_sum_scaled(game)))
}
