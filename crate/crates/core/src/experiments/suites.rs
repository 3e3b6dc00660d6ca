use super::identities::identity_suite;
use super::report::SuiteReport;
use crate::algorithms::{
    dta_default, gdy, gdy_matching, odds_stopping_time, perturb_distinct, t_default, AlgSpec,
    Singletons,
};
use crate::engine::{
    legal_moves_dissolution, legal_moves_standard, matching_guard, run_final, run_online,
    validate_trace, ArrivalOrder, Mode, OnlineAlgorithm, RunTrace,
};
use crate::error::{Error, Result};
use crate::game::{AgentId, Game, Weight};
use crate::instances::{
    adaptive_adversary, adversary_witness, gen_dissolution_trap, gen_dta_ladder,
    gen_increasing_chain, gen_random_ashg, gen_star_pair, ladder_default_eps, replay_matches,
    WeightDist,
};
use crate::oracles::{
    enumerate_orders, exact_event_probability, exact_expected_welfare, max_weight_matching,
    mc_event_probability, mc_expected_welfare, optimal_partition,
};
use crate::partition::{positive_edge_sum, social_welfare, Partition};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::time::Instant;

/// Monte Carlo checks accept `estimate ± SIGMAS·σ`.
pub const SIGMAS: f64 = 4.0;
/// Allowed gap between ladder ratios and their closed form for `k ≤ 10`.
pub const LADDER_TOL: f64 = 1e-6;
/// Allowed gap between the `k = 30` ladder ratio and `1/(3 + 2√2)`.
pub const LADDER_LIMIT_TOL: f64 = 1e-3;
/// Float slack for the per-instance threshold guarantee.
pub const DTA_SLACK: f64 = 1e-12;
/// Allowed gap between the chain ratio at `ε = 10^-9` and `2/k`.
pub const CHAIN_LIMIT_TOL: f64 = 1e-6;

/// Workload size for the theorem suites.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scale {
    /// The sizes the acceptance criteria ask for.
    Full,
    /// Roughly a tenth of the work, for smoke tests.
    Quick,
}

impl Scale {
    fn n(self, full: usize) -> usize {
        match self {
            Scale::Full => full,
            Scale::Quick => (full / 10).max(1),
        }
    }
    fn trials(self, full: u64) -> u64 {
        match self {
            Scale::Full => full,
            Scale::Quick => (full / 10).max(1000),
        }
    }
}

pub const SUITES: &[&str] = &[
    "gdy-random",
    "wgdy-random",
    "gma-random",
    "wgdy-welfare",
    "iwa-upper",
    "doubling-floor",
    "dta-ladder",
    "dta-instance",
    "gdy-chain",
    "gdy-trap",
    "adversary",
    "maxe",
    "matching-bounds",
    "identities",
    "engine",
];

pub fn theorem_suite(name: &str, scale: Scale) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut rep = match name {
        "gdy-random" => gdy_random(),
        "wgdy-random" => wgdy_random(),
        "gma-random" => gma_random(),
        "wgdy-welfare" => wgdy_welfare(scale),
        "iwa-upper" => iwa_upper(scale),
        "doubling-floor" => doubling_floor(scale),
        "dta-ladder" => dta_ladder(),
        "dta-instance" => dta_instance(scale),
        "gdy-chain" => gdy_chain(),
        "gdy-trap" => gdy_trap(),
        "adversary" => adversary(),
        "maxe" => maxe_suite(scale),
        "matching-bounds" => matching_bounds(scale),
        "identities" => Ok(identity_suite()),
        "engine" => engine_contracts(scale),
        other => Err(Error::parse(format!(
            "unknown suite {other:?}; expected one of {}",
            SUITES.join(", ")
        ))),
    }?;
    rep.elapsed = start.elapsed();
    Ok(rep)
}

pub fn pair_formed(p: &Partition, a: usize, b: usize) -> bool {
    let (lo, hi) = (a.min(b), a.max(b));
    p.coalition_of(AgentId(lo)) == Some(&[AgentId(lo), AgentId(hi)][..])
}

fn ab_event(p: &Partition) -> bool {
    pair_formed(p, 0, 1)
}

fn star_probability(alg: AlgSpec, label: &str, expect: fn(i64) -> Weight) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new(label);
    for k in [2usize, 3] {
        let inst = gen_star_pair(k, &Weight::ratio(1, 2))?;
        let p = exact_event_probability(&inst.game, &alg, Mode::Standard, &ab_event)?;
        let e = expect(k as i64);
        rep.check(
            format!("k={k}"),
            p == e,
            format!("Pr[{{a,b}}] = {p}, expected {e}"),
        );
    }
    Ok(rep)
}

fn gdy_random() -> Result<SuiteReport> {
    star_probability(AlgSpec::Gdy, "gdy-random", |k| {
        Weight::ratio(2, k * k + 3 * k + 2)
    })
}

fn wgdy_random() -> Result<SuiteReport> {
    star_probability(AlgSpec::Wgdy, "wgdy-random", |k| Weight::ratio(1, k + 1))
}

/// A single positive edge `{0, 1}`; everything else zero.
pub fn single_edge_game(n: usize) -> Game {
    Game::from_fn(n, |i, j| {
        if (i, j) == (0, 1) {
            Weight::one()
        } else {
            Weight::zero()
        }
    })
}

fn gma_random() -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("gma-random");
    for n in [4usize, 6] {
        let p = exact_event_probability(
            &single_edge_game(n),
            &AlgSpec::Gma,
            Mode::Standard,
            &ab_event,
        )?;
        let e = Weight::ratio(1, n as i64 - 1);
        rep.check(
            format!("n={n}"),
            p == e,
            format!("Pr[match] = {p}, expected {e}"),
        );
    }
    Ok(rep)
}

fn wgdy_welfare(scale: Scale) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("wgdy-welfare");
    let games = scale.n(200);
    let trials = scale.trials(10_000);
    let results: Vec<Result<(usize, bool, String)>> = (0..games)
        .into_par_iter()
        .map(|g| {
            let n = [4, 6, 8][g % 3];
            let game = gen_random_ashg(n, &WeightDist::Int(10), 1000 + g as u64);
            let bound = &positive_edge_sum(&game) / &Weight::int(n as i64);
            if n <= 6 {
                let e = exact_expected_welfare(&game, &AlgSpec::Wgdy, Mode::Standard)?;
                Ok((g, e >= bound, format!("n={n}: E[SW] = {e} vs {bound}")))
            } else {
                let est =
                    mc_expected_welfare(&game, &AlgSpec::Wgdy, Mode::Standard, trials, g as u64)?;
                let ok = est.upper(SIGMAS) >= bound.to_f64();
                Ok((
                    g,
                    ok,
                    format!(
                        "n={n}: E[SW] ≈ {:.4} ± {:.4} vs {bound}",
                        est.point, est.std_error
                    ),
                ))
            }
        })
        .collect();
    for r in results {
        let (g, ok, d) = r?;
        rep.check(format!("game {g}"), ok, d);
    }
    Ok(rep)
}

fn iwa_upper(scale: Scale) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("iwa-upper");
    let trials = scale.trials(100_000);
    for n in [6usize, 14, 30] {
        let inst = gen_star_pair((n - 2) / 2, &Weight::ratio(1, 2))?;
        let est = mc_event_probability(
            &inst.game,
            &AlgSpec::Iwa,
            Mode::Standard,
            trials,
            n as u64,
            &ab_event,
        )?;
        let bound = 4.0 / (n as f64 - 1.0);
        rep.check(
            format!("n={n}"),
            est.lower(SIGMAS) <= bound,
            format!(
                "Pr[{{a,b}}] ≈ {:.5} ± {:.5}, bound {bound:.5}",
                est.point, est.std_error
            ),
        );
    }
    Ok(rep)
}

fn doubling_floor(scale: Scale) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("doubling-floor");
    let games = scale.n(100);
    let trials = scale.trials(10_000);
    let results: Vec<Result<(bool, String)>> = (0..games)
        .into_par_iter()
        .map(|g| {
            let n = 2 + g % 9;
            let game = gen_random_ashg(n, &WeightDist::Int(10), 2000 + g as u64);
            let (_, opt) = optimal_partition(&game)?;
            let floor = opt.to_f64() / (64.0 * n as f64);
            let est = mc_expected_welfare(&game, &AlgSpec::Iwa, Mode::Standard, trials, g as u64)?;
            Ok((
                est.upper(SIGMAS) >= floor,
                format!(
                    "n={n}: E[SW] ≈ {:.4} ± {:.4}, floor {floor:.4}",
                    est.point, est.std_error
                ),
            ))
        })
        .collect();
    for (g, r) in results.into_iter().enumerate() {
        let (ok, d) = r?;
        rep.check(format!("game {g}"), ok, d);
    }
    Ok(rep)
}

/// `1/(Σ_{i=1}^{k-1} t^{-i} + 3 + √2)` with `t = 1 + √2/2`: the ε → 0 ratio
/// `t^k / (Σ_{i=1}^{k+1} t^i + t^{k+1})`.
pub fn ladder_closed_form(k: usize) -> f64 {
    let t = 1.0 + std::f64::consts::SQRT_2 / 2.0;
    let s: f64 = (1..k).map(|i| t.powi(-(i as i32))).sum();
    1.0 / (s + 3.0 + std::f64::consts::SQRT_2)
}

/// `Σ_{i=1}^{k+1} t^i + t^{k+1} − (k+2)ε`, the rung matching's weight.
pub fn ladder_opt_weight(k: usize, eps: &Weight) -> Weight {
    let t = Weight::from(t_default().value().clone());
    let s: Weight = (1..=k + 1).map(|i| t.pow(i as u32)).sum();
    &(&s + &t.pow(k as u32 + 1)) - &(eps * &Weight::int(k as i64 + 2))
}

fn dta_ladder() -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("dta-ladder");
    let t = Weight::from(t_default().value().clone());
    for k in 1..=10usize {
        let eps = ladder_default_eps(k);
        let inst = gen_dta_ladder(k, &eps)?;
        let mut alg = dta_default();
        let out = run_final(&inst.game, &inst.order, &mut alg, Mode::Dissolution)?;
        let sw = inst.game.unscale(&out.welfare);
        let weight = &sw / &Weight::int(2);
        let pairs: Vec<&Vec<AgentId>> = out
            .partition
            .coalitions()
            .iter()
            .filter(|c| c.len() > 1)
            .collect();
        let only_rail = pairs.len() == 1 && pairs[0] == &vec![AgentId(k), AgentId(k + 1)];
        rep.check(
            format!("k={k} weight"),
            weight == t.pow(k as u32) && only_rail,
            format!("weight {weight}, pairs {pairs:?}"),
        );
        let (_, mu) = max_weight_matching(&inst.game)?;
        let formula = ladder_opt_weight(k, &eps);
        rep.check(
            format!("k={k} opt"),
            mu == formula,
            format!("matching oracle {mu} vs formula {formula}"),
        );
        let ratio = (&weight / &mu).to_f64();
        let cf = ladder_closed_form(k);
        rep.check(
            format!("k={k} ratio"),
            (ratio - cf).abs() <= LADDER_TOL,
            format!("ratio {ratio:.9}, closed form {cf:.9}"),
        );
    }
    let k = 30;
    let eps = ladder_default_eps(k);
    let inst = gen_dta_ladder(k, &eps)?;
    let mut alg = dta_default();
    let out = run_final(&inst.game, &inst.order, &mut alg, Mode::Dissolution)?;
    let weight = &inst.game.unscale(&out.welfare) / &Weight::int(2);
    let ratio = (&weight / &ladder_opt_weight(k, &eps)).to_f64();
    let limit = 1.0 / (3.0 + 2.0 * std::f64::consts::SQRT_2);
    rep.check(
        "k=30 limit",
        (ratio - limit).abs() <= LADDER_LIMIT_TOL,
        format!("ratio {ratio:.6}, limit {limit:.6}"),
    );
    Ok(rep)
}

fn dta_instance(scale: Scale) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("dta-instance");
    let games = scale.n(1000);
    let c = 3.0 + 2.0 * std::f64::consts::SQRT_2;
    let results: Vec<Result<(bool, String)>> = (0..games)
        .into_par_iter()
        .map(|g| {
            let n = 2 + g % 7;
            let game = gen_random_ashg(n, &WeightDist::Int(10), 3000 + g as u64);
            let (_, mu) = max_weight_matching(&game)?;
            let worst = if n <= 6 {
                game.unscale(
                    &enumerate_orders(&game, &AlgSpec::Dta(None), Mode::Dissolution, None)?
                        .min_welfare,
                )
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(g as u64);
                let mut worst: Option<Weight> = None;
                for _ in 0..50 {
                    let order = ArrivalOrder::random(n, &mut rng);
                    let mut alg = dta_default();
                    let sw = game
                        .unscale(&run_final(&game, &order, &mut alg, Mode::Dissolution)?.welfare);
                    worst = Some(worst.map_or(sw.clone(), |w: Weight| w.min(sw)));
                }
                worst.expect("50 orders")
            };
            let weight = (&worst / &Weight::int(2)).to_f64();
            let bound = mu.to_f64() / c;
            Ok((
                weight >= bound - DTA_SLACK,
                format!("n={n}: worst weight {weight:.6}, bound {bound:.6}"),
            ))
        })
        .collect();
    for (g, r) in results.into_iter().enumerate() {
        let (ok, d) = r?;
        rep.check(format!("game {g}"), ok, d);
    }
    Ok(rep)
}

/// `(1 + kε) / (k/2 + k(k+2)ε/4)`.
pub fn chain_ratio(k: usize, eps: &Weight) -> Weight {
    let k = k as i64;
    let num = &Weight::one() + &(eps * &Weight::int(k));
    // the optimal matching pairs (a_{2i}, a_{2i+1}) for i = 0..=k/2, so k/2 + 1 pairs
    let den = &Weight::ratio(k + 2, 2) + &(eps * &Weight::ratio(k * (k + 2), 4));
    &num / &den
}

fn gdy_chain() -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("gdy-chain");
    let eps = Weight::ratio(1, 1_000_000_000);
    for k in (2..=12).step_by(2) {
        let inst = gen_increasing_chain(k, &eps)?;
        let mut alg = gdy_matching();
        let out = run_final(&inst.game, &inst.order, &mut alg, Mode::Dissolution)?;
        let weight = &inst.game.unscale(&out.welfare) / &Weight::int(2);
        let expect = &Weight::one() + &(&eps * &Weight::int(k as i64));
        let last = pair_formed(&out.partition, k, k + 1);
        rep.check(
            format!("k={k} weight"),
            weight == expect && last,
            format!("weight {weight}"),
        );
        let (_, mu) = max_weight_matching(&inst.game)?;
        let ratio = &weight / &mu;
        let formula = chain_ratio(k, &eps);
        rep.check(
            format!("k={k} ratio"),
            ratio == formula,
            format!("ratio {ratio} vs {formula}"),
        );
        let gap = (ratio.to_f64() - 2.0 / (k + 2) as f64).abs();
        rep.check(
            format!("k={k} limit"),
            gap <= CHAIN_LIMIT_TOL,
            format!("|ratio − 2/(k+2)| = {gap:e}"),
        );
    }
    Ok(rep)
}

fn gdy_trap() -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("gdy-trap");
    for k in 2..=6usize {
        let inst = gen_dissolution_trap(k)?;
        let mut alg = gdy();
        let out = run_final(&inst.game, &inst.order, &mut alg, Mode::Dissolution)?;
        let sw = inst.game.unscale(&out.welfare);
        let expect = &Weight::int(2) + &Weight::ratio(2 * (k as i64 - 2), k as i64);
        rep.check(
            format!("k={k} gdy"),
            sw == expect,
            format!("SW(GDY) = {sw}, expected {expect}"),
        );
        let (p, opt) = optimal_partition(&inst.game)?;
        let e = Weight::int(2 * (k as i64 - 1) * k as i64);
        rep.check(
            format!("k={k} opt"),
            opt == e,
            format!("SW(π*) = {opt}, expected {e}"),
        );
        let big: Vec<usize> = (1..2 * k).collect();
        let witness = Partition::from_indices(2 * k, &[&big, &[0]])?;
        rep.check(
            format!("k={k} witness"),
            p == witness,
            format!("oracle {p}, expected {witness}"),
        );
    }
    Ok(rep)
}

fn adversary() -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("adversary");
    let algs: Vec<(&str, fn() -> Box<dyn OnlineAlgorithm>)> = vec![
        ("gdy", || Box::new(gdy())),
        ("dta", || Box::new(dta_default())),
        ("singletons", || Box::new(Singletons)),
    ];
    for (name, make) in &algs {
        for n in [12usize, 14, 16, 20] {
            let mut alg = make();
            let run = adaptive_adversary(alg.as_mut(), n)?;
            let last = &run.transcript.steps[n - 1].partition;
            let sw = social_welfare(&run.game, last);
            let witness = adversary_witness(&run.transcript, &run.game)?;
            let wsw = social_welfare(&run.game, &witness);
            let ok = &sw * &Weight::int(n as i64) <= &wsw * &Weight::int(12);
            rep.check(
                format!("{name} n={n} bound"),
                ok,
                format!("SW(alg) = {sw}, SW(witness) = {wsw}"),
            );
            let mut again = make();
            rep.check(
                format!("{name} n={n} replay"),
                replay_matches(&run, again.as_mut())?,
                "transcript reproduced",
            );
            if n <= 13 {
                let (_, opt) = optimal_partition(&run.game)?;
                rep.check(
                    format!("{name} n={n} witness"),
                    wsw <= opt,
                    format!("SW(witness) = {wsw}, SW(π*) = {opt}"),
                );
            }
        }
    }
    Ok(rep)
}

/// Index pair of the unique heaviest edge, if there is one.
pub fn unique_max_edge(game: &Game) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize, &Weight)> = None;
    let mut unique = false;
    for (i, j, w) in game.edges() {
        match best {
            Some((_, _, b)) if w < b => {}
            Some((_, _, b)) if w == b => unique = false,
            _ => {
                best = Some((i.0, j.0, w));
                unique = true;
            }
        }
    }
    best.filter(|_| unique).map(|(i, j, _)| (i, j))
}

fn maxe_suite(scale: Scale) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("maxe");
    let floor = 1.0 / (2.0 * std::f64::consts::E);
    let s10 = odds_stopping_time(10)?.s;
    rep.check("odds n=10", s10 == 7, format!("s = {s10}"));
    for g in 0..scale.n(20).max(2) {
        let game = perturb_distinct(&gen_random_ashg(6, &WeightDist::Pos(10), 4000 + g as u64));
        let (a, b) = unique_max_edge(&game).expect("distinct weights");
        let hit = move |p: &Partition| pair_formed(p, a, b);
        let p = exact_event_probability(&game, &AlgSpec::Maxe, Mode::Standard, &hit)?;
        rep.check(
            format!("n=6 game {g}"),
            p.to_f64() >= floor,
            format!("success {p} vs {floor:.4}"),
        );
    }
    let game = perturb_distinct(&gen_random_ashg(20, &WeightDist::Pos(1000), 4999));
    let (a, b) = unique_max_edge(&game).expect("distinct weights");
    let hit = move |p: &Partition| pair_formed(p, a, b);
    let est = mc_event_probability(
        &game,
        &AlgSpec::Maxe,
        Mode::Standard,
        scale.trials(100_000),
        5,
        &hit,
    )?;
    rep.check(
        "n=20",
        est.upper(SIGMAS) >= floor,
        format!(
            "success ≈ {:.4} ± {:.4} vs {floor:.4}",
            est.point, est.std_error
        ),
    );
    Ok(rep)
}

fn matching_bounds(scale: Scale) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("matching-bounds");
    let results: Vec<Result<(bool, bool, String)>> = (0..scale.n(500))
        .into_par_iter()
        .map(|g| {
            let n = 1 + g % 12;
            let game = gen_random_ashg(n, &WeightDist::Int(10), 5000 + g as u64);
            let p = positive_edge_sum(&game);
            let (_, mu) = max_weight_matching(&game)?;
            let (_, opt) = optimal_partition(&game)?;
            let avg = &mu * &Weight::int(n as i64) >= p;
            let up = opt <= &p * &Weight::int(2);
            Ok((
                avg,
                up,
                format!("n={n}: w(μ*) = {mu}, SW(π*) = {opt}, w(E+) = {p}"),
            ))
        })
        .collect();
    for (g, r) in results.into_iter().enumerate() {
        let (avg, up, d) = r?;
        rep.check(format!("game {g}"), avg && up, d);
    }
    Ok(rep)
}

fn random_alg<R: Rng>(rng: &mut R) -> AlgSpec {
    let pool = [
        AlgSpec::Gdy,
        AlgSpec::GdyMatching,
        AlgSpec::GdyStandard,
        AlgSpec::Iwa,
        AlgSpec::Dta(None),
        AlgSpec::IMaxe,
        AlgSpec::Singletons,
    ];
    pool[rng.gen_range(0..pool.len())].clone()
}

/// Random partition of a random subset of `0..n`, leaving `missing` out.
fn random_partition<R: Rng>(n: usize, missing: usize, rng: &mut R) -> Result<Partition> {
    let mut blocks: Vec<Vec<AgentId>> = Vec::new();
    for a in (0..n).filter(|&a| a != missing) {
        if !rng.gen_bool(0.8) {
            continue;
        }
        let b = rng.gen_range(0..=blocks.len());
        if b == blocks.len() {
            blocks.push(vec![AgentId(a)]);
        } else {
            blocks[b].push(AgentId(a));
        }
    }
    Partition::from_coalitions(n, blocks)
}

fn engine_contracts(scale: Scale) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("engine");
    let cases = scale.n(10_000) as u64;

    let hiding: Vec<Result<bool>> = (0..cases)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(c);
            let n = rng.gen_range(2..=8);
            let game = gen_random_ashg(n, &WeightDist::Int(5), rng.gen());
            let order = ArrivalOrder::random(n, &mut rng);
            let t = rng.gen_range(1..=n);
            let prefix: Vec<usize> = order.as_slice()[..t].iter().map(|a| a.0).collect();
            let probe = Game::from_fn(n, |i, j| {
                if prefix.contains(&i) && prefix.contains(&j) {
                    game.weight(AgentId(i), AgentId(j)).expect("i != j").clone()
                } else {
                    Weight::int(rng.gen_range(-5..=5))
                }
            });
            let spec = random_alg(&mut rng);
            let mode = if rng.gen_bool(0.5) {
                Mode::Standard
            } else {
                Mode::Dissolution
            };
            let a = run_online(&game, &order, spec.build().as_mut(), mode)?;
            let b = run_online(&probe, &order, spec.build().as_mut(), mode)?;
            Ok(a.steps[..t]
                .iter()
                .zip(&b.steps[..t])
                .all(|(x, y)| x.mv == y.mv))
        })
        .collect();
    let bad = hiding
        .into_iter()
        .collect::<Result<Vec<_>>>()?
        .iter()
        .filter(|&&ok| !ok)
        .count();
    rep.check(
        "information hiding",
        bad == 0,
        format!("{cases} probes, {bad} violations"),
    );

    let mut bad = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..cases {
        let n = rng.gen_range(1..=8);
        let i = rng.gen_range(0..n);
        let p = random_partition(n, i, &mut rng)?;
        let s = legal_moves_standard(&p, AgentId(i))?;
        let d = legal_moves_dissolution(&p, AgentId(i))?;
        let card = p.len() + 1 + p.agent_count();
        if !s.iter().all(|m| d.contains(m)) || d.len() != card {
            bad += 1;
        }
    }
    rep.check(
        "standard within dissolution",
        bad == 0,
        format!("{cases} partitions, {bad} violations"),
    );

    let replay: Vec<Result<(bool, bool)>> = (0..cases)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(1_000_000 + c);
            let n = rng.gen_range(1..=8);
            let game = gen_random_ashg(n, &WeightDist::Int(5), rng.gen());
            let order = ArrivalOrder::random(n, &mut rng);
            let spec = random_alg(&mut rng);
            let mode = if rng.gen_bool(0.5) {
                Mode::Standard
            } else {
                Mode::Dissolution
            };
            let tr = run_online(&game, &order, spec.build().as_mut(), mode)?;
            let direct = validate_trace(&game, &order, &tr, mode).is_valid();
            let back = RunTrace::from_jsonl(&tr.to_jsonl(), &tr.algorithm, mode)?;
            let wire = validate_trace(&game, &order, &back, mode).is_valid();
            let again = run_online(&game, &order, spec.build().as_mut(), mode)?;
            Ok((
                direct && wire,
                again
                    .steps
                    .iter()
                    .map(|s| s.mv)
                    .eq(tr.steps.iter().map(|s| s.mv)),
            ))
        })
        .collect();
    let replay = replay.into_iter().collect::<Result<Vec<_>>>()?;
    let bad = replay.iter().filter(|(v, _)| !v).count();
    rep.check(
        "trace replay",
        bad == 0,
        format!("{cases} traces, {bad} invalid"),
    );
    let bad = replay.iter().filter(|(_, d)| !d).count();
    rep.check(
        "determinism",
        bad == 0,
        format!("{cases} reruns, {bad} differ"),
    );

    let guard: Vec<Result<bool>> = (0..cases)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(2_000_000 + c);
            let n = rng.gen_range(1..=8);
            let game = gen_random_ashg(n, &WeightDist::Int(5), rng.gen());
            let order = ArrivalOrder::random(n, &mut rng);
            let spec = random_alg(&mut rng);
            let mode = if rng.gen_bool(0.5) {
                Mode::Standard
            } else {
                Mode::Dissolution
            };
            let mut alg = matching_guard(spec.build());
            let tr = run_online(&game, &order, &mut alg, mode)?;
            Ok(tr.steps.iter().all(|s| {
                s.partition
                    .as_ref()
                    .is_some_and(|p| p.max_coalition_size() <= 2)
            }))
        })
        .collect();
    let bad = guard
        .into_iter()
        .collect::<Result<Vec<_>>>()?
        .iter()
        .filter(|&&ok| !ok)
        .count();
    rep.check(
        "guard keeps matchings",
        bad == 0,
        format!("{cases} runs, {bad} violations"),
    );
    Ok(rep)
}
