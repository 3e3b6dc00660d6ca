//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails. Tolerances are the constants below.

mod support;

use cofo_core::algorithms::{
    dta_default, gdy, gma, maxe, odds_stopping_time, perturb_distinct, t_default, wgdy, AlgSpec,
};
use cofo_core::engine::{
    available_partitions, legal_moves_dissolution, legal_moves_standard, matching_guard, run_final,
    run_online, validate_trace,
};
use cofo_core::experiments::{identity_suite, theorem_suite, Scale};
use cofo_core::instances::{
    adaptive_adversary, adversary_witness, gen_dissolution_trap, gen_dta_ladder,
    gen_increasing_chain, gen_random_ashg, gen_star_pair, ladder_default_eps,
    star_pair_default_eps, WeightDist,
};
use cofo_core::oracles::{exact_event_probability, max_weight_matching, optimal_partition};
use cofo_core::{
    AgentId, ArrivalOrder, Game, Mode, Move, OnlineAlgorithm, Partition, Result as CoreResult,
    RunTrace, StepView, Weight,
};
use num_bigint::BigInt;
use num_traits::{One, Pow, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::BTreeSet;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Instant;
use support::*;

/// Monte Carlo checks allow this many standard errors.
const SIGMAS: f64 = 4.0;
/// Ladder ratio vs closed form at the default ε.
const LADDER_TOL: f64 = 1e-6;
/// Ladder ratio at k = 30 vs the limit.
const LADDER_LIMIT_TOL: f64 = 1e-3;
/// Per-instance threshold-algorithm slack.
const DTA_SLACK: f64 = 1e-12;
/// Chain ratio at ε = 10^-9 vs its ε → 0 limit.
const CHAIN_LIMIT_TOL: f64 = 1e-6;
/// Randomized cases per engine property.
const ENGINE_CASES: usize = 10_000;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn core<T>(r: CoreResult<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn sqrt2() -> f64 {
    std::f64::consts::SQRT_2
}

fn star_pair_probability(
    k: usize,
    make: fn() -> Box<dyn OnlineAlgorithm>,
    expect: Q,
    name: &str,
) -> Outcome {
    let inst = core(gen_star_pair(k, &star_pair_default_eps()))?;
    let n = inst.game.n();
    ensure(n == 2 * k + 2, || format!("star pair k={k} has {n} agents"))?;
    let game = &inst.game;
    let p = order_probability(n, |o| {
        together(&run(game, o, make().as_mut(), Mode::Standard), 0, 1)
    });
    ensure(p == expect, || {
        format!("{name} k={k}: Pr = {p}, expected {expect}")
    })?;
    let spec: AlgSpec = name.parse().map_err(|e: cofo_core::Error| e.to_string())?;
    let lib = core(exact_event_probability(
        game,
        &spec,
        Mode::Standard,
        &|pi: &Partition| together(pi, 0, 1),
    ))?;
    ensure(qw(&lib) == p, || {
        format!("{name} k={k}: library {lib} vs test {p}")
    })?;
    Ok(format!("k={k}: {p}"))
}

fn c1_gdy_random() -> Outcome {
    let mut parts = Vec::new();
    for k in [2usize, 3] {
        let kk = k as i64;
        parts.push(star_pair_probability(
            k,
            || Box::new(gdy()),
            q(2, kk * kk + 3 * kk + 2),
            "gdy",
        )?);
    }
    Ok(parts.join("; "))
}

fn c2_wgdy_random() -> Outcome {
    let mut parts = Vec::new();
    for k in [2usize, 3] {
        parts.push(star_pair_probability(
            k,
            || Box::new(wgdy()),
            q(1, k as i64 + 1),
            "wgdy",
        )?);
    }
    Ok(parts.join("; "))
}

fn c3_gma() -> Outcome {
    let mut parts = Vec::new();
    for n in [4usize, 6] {
        let game = Game::from_fn(n, |i, j| {
            if (i, j) == (0, 1) {
                Weight::one()
            } else {
                Weight::zero()
            }
        });
        let p = order_probability(n, |o| {
            together(&run(&game, o, &mut gma(), Mode::Standard), 0, 1)
        });
        let expect = q(1, n as i64 - 1);
        ensure(p == expect, || {
            format!("n={n}: Pr = {p}, expected {expect}")
        })?;
        parts.push(format!("n={n}: {p}"));
    }
    Ok(parts.join("; "))
}

fn c4_wgdy_welfare() -> Outcome {
    let mut worst = f64::INFINITY;
    for g in 0..200u64 {
        let n = [4usize, 6, 8][(g % 3) as usize];
        let game = gen_random_ashg(n, &WeightDist::Int(10), 40_000 + g);
        let m = matrix(&game);
        let bound = positive_sum(&game) / Q::from_integer((n as i64).into());
        let sw = |o: &[usize]| partition_welfare(&m, &run(&game, o, &mut wgdy(), Mode::Standard));
        if n <= 6 {
            let e = order_mean(n, sw);
            ensure(e >= bound, || {
                format!("game {g} (n={n}): E[SW] = {e} < {bound}")
            })?;
            if bound > Q::zero() {
                worst = worst.min(to_f64(&(e / &bound)));
            }
        } else {
            let (mean, se) = mc_mean(n, 10_000, g, |o| to_f64(&sw(o)));
            let b = to_f64(&bound);
            ensure(mean + SIGMAS * se >= b, || {
                format!("game {g} (n=8): {mean} ± {se} < {b}")
            })?;
            if b > 0.0 {
                worst = worst.min(mean / b);
            }
        }
    }
    Ok(format!("200 games, min E[SW]/(w(E+)/n) = {worst:.3}"))
}

fn c5_iwa_upper() -> Outcome {
    let mut parts = Vec::new();
    for n in [6usize, 14, 30] {
        let inst = core(gen_star_pair((n - 2) / 2, &star_pair_default_eps()))?;
        let game = &inst.game;
        let (p, se) = mc_mean(n, 100_000, n as u64, |o| {
            together(
                &run(game, o, AlgSpec::Iwa.build().as_mut(), Mode::Standard),
                0,
                1,
            ) as u8 as f64
        });
        let cap = 4.0 / (n as f64 - 1.0);
        ensure(p <= cap + SIGMAS * se, || {
            format!("n={n}: Pr ≈ {p} ± {se} > {cap}")
        })?;
        parts.push(format!("n={n}: {p:.4} ≤ {cap:.4}"));
    }
    Ok(parts.join("; "))
}

fn c6_doubling_floor() -> Outcome {
    let mut worst = f64::INFINITY;
    for g in 0..100u64 {
        let n = 2 + (g % 9) as usize;
        let game = gen_random_ashg(n, &WeightDist::Int(10), 60_000 + g);
        let m = matrix(&game);
        let opt = to_f64(&opt_partition(&game));
        let (mean, se) = mc_mean(n, 10_000, g, |o| {
            to_f64(&partition_welfare(
                &m,
                &run(&game, o, AlgSpec::Iwa.build().as_mut(), Mode::Standard),
            ))
        });
        let floor = opt / (64.0 * n as f64);
        ensure(mean + SIGMAS * se >= floor, || {
            format!("game {g} (n={n}): {mean} ± {se} < {floor}")
        })?;
        if floor > 0.0 {
            worst = worst.min(mean / floor);
        }
    }
    Ok(format!("100 games, min E[SW]/floor = {worst:.2}"))
}

/// `1 + √2/2` rounded up at 30 decimals, computed here from scratch.
fn t_rational() -> Q {
    let scale = BigInt::from(10).pow(30u32);
    let target = BigInt::from(5) * BigInt::from(10).pow(59u32);
    let mut r = target.sqrt();
    if &r * &r < target {
        r += 1;
    }
    Q::new(&scale + r, scale)
}

fn ladder_ratio_limit_form(k: usize) -> f64 {
    let t = 1.0 + sqrt2() / 2.0;
    1.0 / ((1..k).map(|i| t.powi(-(i as i32))).sum::<f64>() + 3.0 + sqrt2())
}

fn c7_dta_ladder() -> Outcome {
    let t = t_rational();
    ensure(qw(&Weight::from(t_default().value().clone())) == t, || {
        "threshold rational differs".into()
    })?;
    let mut max_gap = 0.0f64;
    let mut stated_gap = 0.0f64;
    for k in 1..=10usize {
        let eps = ladder_default_eps(k);
        let inst = core(gen_dta_ladder(k, &eps))?;
        let m = matrix(&inst.game);
        let out = run(
            &inst.game,
            &inst
                .order
                .as_slice()
                .iter()
                .map(|a| a.0)
                .collect::<Vec<_>>(),
            &mut dta_default(),
            Mode::Dissolution,
        );
        let pairs: Vec<Vec<usize>> = out
            .to_indices()
            .into_iter()
            .filter(|c| c.len() > 1)
            .collect();
        ensure(pairs == vec![vec![k, k + 1]], || {
            format!("k={k}: pairs {pairs:?}")
        })?;
        let w = partition_welfare(&m, &out) / Q::from_integer(2.into());
        ensure(w == Pow::pow(&t, k as u32), || {
            format!("k={k}: weight {w} is not t^k")
        })?;
        let mu = opt_matching(&inst.game);
        let e = qw(&eps);
        let rungs: Q = (1..=k as u32 + 1).map(|i| Pow::pow(&t, i)).sum::<Q>()
            + Pow::pow(&t, k as u32 + 1)
            - &e * Q::from_integer((k as i64 + 2).into());
        ensure(mu == rungs, || {
            format!("k={k}: optimum {mu} is not the rung matching")
        })?;
        let ratio = to_f64(&(&w / &mu));
        let gap = (ratio - ladder_ratio_limit_form(k)).abs();
        ensure(gap <= LADDER_TOL, || {
            format!("k={k}: ratio {ratio} vs {}", ladder_ratio_limit_form(k))
        })?;
        max_gap = max_gap.max(gap);
        let tt = 1.0 + sqrt2() / 2.0;
        let stated = 1.0 / ((1..=k).map(|i| tt.powi(-(i as i32))).sum::<f64>() + 3.0 + sqrt2());
        stated_gap = stated_gap.max((ratio - stated).abs());
    }
    let k = 30usize;
    let eps = qw(&ladder_default_eps(k));
    let inst = core(gen_dta_ladder(k, &Weight::from(eps.clone())))?;
    let m = matrix(&inst.game);
    let order: Vec<usize> = inst.order.as_slice().iter().map(|a| a.0).collect();
    let out = run(&inst.game, &order, &mut dta_default(), Mode::Dissolution);
    let w = partition_welfare(&m, &out) / Q::from_integer(2.into());
    let rungs: Q = (1..=k as u32 + 1).map(|i| Pow::pow(&t, i)).sum::<Q>()
        + Pow::pow(&t, k as u32 + 1)
        - &eps * Q::from_integer((k as i64 + 2).into());
    let ratio = to_f64(&(w / rungs));
    let limit = 1.0 / (3.0 + 2.0 * sqrt2());
    ensure((ratio - limit).abs() <= LADDER_LIMIT_TOL, || {
        format!("k=30: {ratio} vs {limit}")
    })?;
    Ok(format!(
        "k=1..10 max |ratio − closed form| = {max_gap:.1e}; k=30 ratio {ratio:.6} vs {limit:.6}; \
         closed form uses Σ_(i<k) (the Σ_(i≤k) form is off by {stated_gap:.3})"
    ))
}

fn c8_dta_instance() -> Outcome {
    let c = 3.0 + 2.0 * sqrt2();
    let fails: Vec<String> = (0..1000u64)
        .into_par_iter()
        .filter_map(|g| {
            let n = 2 + (g % 7) as usize;
            let game = gen_random_ashg(n, &WeightDist::Int(10), 80_000 + g);
            let m = matrix(&game);
            let mu = to_f64(&opt_matching(&game));
            let weight = |o: &[usize]| {
                let p = run(&game, o, &mut dta_default(), Mode::Dissolution);
                debug_assert!(is_matching(&p));
                partition_welfare(&m, &p) / Q::from_integer(2.into())
            };
            let worst = if n <= 6 {
                to_f64(&order_min(n, weight))
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(g);
                (0..50)
                    .map(|_| to_f64(&weight(&random_order(n, &mut rng))))
                    .fold(f64::INFINITY, f64::min)
            };
            (worst * c < mu - DTA_SLACK)
                .then(|| format!("game {g} (n={n}): {worst} vs w(μ*) = {mu}"))
        })
        .collect();
    ensure(fails.is_empty(), || fails.join("; "))?;
    Ok("1000 games, every order ≥ w(μ*)/(3+2√2)".into())
}

fn c9_gdy_chain() -> Outcome {
    let eps = q(1, 1_000_000_000);
    let mut stated_ok = 0;
    for k in (2..=12usize).step_by(2) {
        let kq = Q::from_integer((k as i64).into());
        let inst = core(gen_increasing_chain(k, &Weight::from(eps.clone())))?;
        let m = matrix(&inst.game);
        let order: Vec<usize> = (0..k + 2).collect();
        let mut alg = cofo_core::algorithms::gdy_matching();
        let out = run(&inst.game, &order, &mut alg, Mode::Dissolution);
        let pairs: Vec<Vec<usize>> = out
            .to_indices()
            .into_iter()
            .filter(|c| c.len() > 1)
            .collect();
        ensure(pairs == vec![vec![k, k + 1]], || {
            format!("k={k}: pairs {pairs:?}")
        })?;
        let w = partition_welfare(&m, &out) / Q::from_integer(2.into());
        let num = Q::one() + &kq * &eps;
        ensure(w == num, || format!("k={k}: weight {w}"))?;
        let mu = opt_matching(&inst.game);
        let half = |x: i64| q(x, 2);
        let den = half(k as i64 + 2) + &eps * q((k * (k + 2)) as i64, 4);
        ensure(mu == den, || format!("k={k}: w(μ*) = {mu}, expected {den}"))?;
        let ratio = &w / &mu;
        ensure(ratio == &num / &den, || format!("k={k}: ratio {ratio}"))?;
        let stated = &num / &(half(k as i64) + &eps * q((k * (k + 2)) as i64, 4));
        stated_ok += (ratio == stated) as usize;
        let gap = (to_f64(&ratio) - 2.0 / (k as f64 + 2.0)).abs();
        ensure(gap <= CHAIN_LIMIT_TOL, || {
            format!("k={k}: |ratio − 2/(k+2)| = {gap:e}")
        })?;
    }
    Ok(format!(
        "k=2..12 exact: weight 1+kε, ratio (1+kε)/((k+2)/2 + k(k+2)ε/4) → 2/(k+2); \
         the k/2 denominator agrees in {stated_ok}/6 cases"
    ))
}

fn c10_gdy_trap() -> Outcome {
    for k in 2..=6usize {
        let kk = k as i64;
        let inst = core(gen_dissolution_trap(k))?;
        let m = matrix(&inst.game);
        let order: Vec<usize> = (0..2 * k).collect();
        let out = run(&inst.game, &order, &mut gdy(), Mode::Dissolution);
        let sw = partition_welfare(&m, &out);
        let expect = Q::from_integer(2.into()) + q(2 * (kk - 2), kk);
        ensure(sw == expect, || {
            format!("k={k}: SW(GDY) = {sw}, expected {expect}")
        })?;
        let opt = opt_partition(&inst.game);
        let e = Q::from_integer((2 * (kk - 1) * kk).into());
        ensure(opt == e, || format!("k={k}: optimum {opt}, expected {e}"))?;
        let witness = vec![(1..2 * k).collect::<Vec<_>>(), vec![0]];
        ensure(welfare(&m, &witness) == e, || {
            format!("k={k}: witness welfare differs")
        })?;
        let (p, _) = core(optimal_partition(&inst.game))?;
        let mut got = p.to_indices();
        got.sort();
        let mut want = witness.clone();
        want.sort();
        ensure(got == want, || format!("k={k}: oracle partition {got:?}"))?;
    }
    Ok("k=2..6 exact".into())
}

fn c11_adversary() -> Outcome {
    let mut max_w = BigInt::zero();
    let mut worst = 0.0f64;
    let algs: [(&str, fn() -> Box<dyn OnlineAlgorithm>); 3] = [
        ("gdy", || Box::new(gdy())),
        ("dta", || Box::new(dta_default())),
        ("singletons", || AlgSpec::Singletons.build()),
    ];
    for n in [12usize, 14, 16, 20] {
        for (name, make) in algs {
            let run_ = core(adaptive_adversary(make().as_mut(), n))?;
            let m = matrix(&run_.game);
            for row in &m {
                for x in row {
                    if x.is_integer() && x.numer().abs() > max_w {
                        max_w = x.numer().abs();
                    }
                }
            }
            let order: Vec<usize> = run_.order.as_slice().iter().map(|a| a.0).collect();
            let out = run(&run_.game, &order, make().as_mut(), Mode::Dissolution);
            let sw = partition_welfare(&m, &out);
            let wit = core(adversary_witness(&run_.transcript, &run_.game))?;
            let sw_w = partition_welfare(&m, &wit);
            let nq = Q::from_integer((n as i64).into());
            ensure(&sw * &nq <= &sw_w * Q::from_integer(12.into()), || {
                format!("{name} n={n}: SW {sw} vs witness {sw_w}")
            })?;
            if sw_w > Q::zero() {
                worst = worst.max(to_f64(&(&sw * &nq / &sw_w)));
            }
            if n <= 13 {
                let opt = opt_partition(&run_.game);
                ensure(sw_w <= opt, || {
                    format!("{name} n={n}: witness {sw_w} > optimum {opt}")
                })?;
            }
        }
    }
    let digits = max_w.to_string().len();
    Ok(format!(
        "max n·SW/SW(witness) = {worst:.3} ≤ 12; largest |weight| has {digits} digits"
    ))
}

fn c12_maxe() -> Outcome {
    let s = core(odds_stopping_time(10))?.s;
    // test-side: largest s with Σ_{k=s}^{10} 2/(k−2) ≥ 1
    let tail = |s: usize| (s.max(3)..=10).map(|k| q(2, k as i64 - 2)).sum::<Q>();
    let s_test = (3..=10).rev().find(|&s| tail(s) >= Q::one()).unwrap_or(2);
    ensure(s == 7 && s_test == 7, || {
        format!("stopping index {s}, test-side {s_test}")
    })?;
    let floor = 1.0 / (2.0 * std::f64::consts::E);
    let max_edge = |game: &Game| {
        let mut best: Option<(Q, usize, usize)> = None;
        let mut count = 0;
        for (i, j, w) in game.edges() {
            let w = qw(w);
            match &best {
                Some((b, _, _)) if &w < b => {}
                Some((b, _, _)) if &w == b => count += 1,
                _ => {
                    best = Some((w, i.0, j.0));
                    count = 1;
                }
            }
        }
        assert_eq!(count, 1, "weights must be distinct");
        let (_, a, b) = best.expect("non-empty");
        (a, b)
    };
    let mut min_p = f64::INFINITY;
    for g in 0..20u64 {
        let game = perturb_distinct(&gen_random_ashg(6, &WeightDist::Pos(10), 90_000 + g));
        let (a, b) = max_edge(&game);
        let p = order_probability(6, |o| {
            together(&run(&game, o, &mut maxe(), Mode::Standard), a, b)
        });
        ensure(to_f64(&p) >= floor, || {
            format!("game {g}: success {p} < 1/(2e)")
        })?;
        min_p = min_p.min(to_f64(&p));
    }
    let game = perturb_distinct(&gen_random_ashg(20, &WeightDist::Pos(1000), 90_999));
    let (a, b) = max_edge(&game);
    let (p, se) = mc_mean(20, 100_000, 12, |o| {
        together(&run(&game, o, &mut maxe(), Mode::Standard), a, b) as u8 as f64
    });
    ensure(p + SIGMAS * se >= floor, || {
        format!("n=20: {p} ± {se} < {floor}")
    })?;
    Ok(format!(
        "s(10) = 7; n=6 min success {min_p:.4}; n=20 success {p:.4} ± {se:.4}; floor {floor:.4}"
    ))
}

fn c13_matching_bounds() -> Outcome {
    let fails: Vec<String> = (0..500u64)
        .into_par_iter()
        .filter_map(|g| {
            let n = 1 + (g % 12) as usize;
            let game = gen_random_ashg(n, &WeightDist::Int(10), 100_000 + g);
            let p = positive_sum(&game);
            let mu = opt_matching(&game);
            let opt = opt_partition(&game);
            let nq = Q::from_integer((n as i64).into());
            let (lib_mu, lib_opt) = match (max_weight_matching(&game), optimal_partition(&game)) {
                (Ok(a), Ok(b)) => (qw(&a.1), qw(&b.1)),
                (Err(e), _) | (_, Err(e)) => return Some(format!("game {g}: {e}")),
            };
            let ok = &mu * &nq >= p
                && opt <= &p * Q::from_integer(2.into())
                && lib_mu == mu
                && lib_opt == opt;
            (!ok).then(|| {
                format!("game {g} (n={n}): μ* {mu}/{lib_mu}, π* {opt}/{lib_opt}, w(E+) {p}")
            })
        })
        .collect();
    ensure(fails.is_empty(), || fails.join("; "))?;
    Ok("500 games; library oracles agree with test-side enumeration".into())
}

fn binom(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    (0..k).fold(BigInt::one(), |acc, i| {
        acc * BigInt::from(n - i) / BigInt::from(i + 1)
    })
}

fn c14_identities() -> Outcome {
    let rep = identity_suite();
    ensure(rep.passed(), || rep.to_string())?;
    let qb = |a: BigInt, b: BigInt| Q::new(a, b);
    for k in 0..=30usize {
        for i in 0..=k {
            let lhs: Q = (0..=i).map(|j| qb(binom(i, j), binom(k, j))).sum();
            ensure(lhs == q(k as i64 + 1, (k + 1 - i) as i64), || {
                format!("inner i={i} k={k}")
            })?;
        }
        let outer: Q = (0..=k)
            .map(|i| {
                qb(
                    binom(k, i) * binom(k, k - i),
                    binom(2 * k, k) * BigInt::from(k + 1 - i),
                )
            })
            .sum();
        ensure(
            outer == q(2 * k as i64 + 1, ((k + 1) * (k + 1)) as i64),
            || format!("outer k={k}"),
        )?;
        for i in 0..8u32 {
            let r = (1usize << i) - 1;
            if k + 2 > 1 << i {
                let lhs: Q = (0..=r)
                    .map(|j| {
                        qb(
                            binom(k, j) * binom(k, r - j),
                            binom(2 * k, r) * BigInt::from(r + 1 - j),
                        )
                    })
                    .sum();
                ensure(lhs <= q(2, 1 << i), || format!("crazy i={i} k={k}"))?;
            }
        }
    }
    for x in 2..=10u32 {
        for n in 0..=30u32 {
            let s: BigInt = (0..=n).map(|i| BigInt::from(x).pow(i)).sum();
            ensure(s <= BigInt::from(x).pow(n + 1), || {
                format!("geometric x={x} n={n}")
            })?;
        }
    }
    let t = 1.0 + sqrt2() / 2.0;
    for k in 1..=50 {
        let lhs: f64 = (1..=k).map(|i| t.powi(-i)).sum();
        let rhs = sqrt2() * (1.0 - t.powi(-k));
        ensure((lhs - rhs).abs() <= 1e-12, || {
            format!("partial sum k={k}: {lhs} vs {rhs}")
        })?;
    }
    Ok(format!(
        "{} library checks plus test-side recomputation",
        rep.checks.len()
    ))
}

/// Reads every weight it may and must not see, and checks every candidate's gain.
struct Probe {
    game: Arc<Game>,
    matrix: Arc<Vec<Vec<Q>>>,
    violations: Arc<AtomicUsize>,
    pick: u64,
}

impl OnlineAlgorithm for Probe {
    fn name(&self) -> String {
        "probe".into()
    }

    fn decide(&mut self, view: &StepView<'_>) -> CoreResult<Move> {
        let bad = |v: &AtomicUsize| v.fetch_add(1, Ordering::Relaxed);
        let n = self.game.n();
        let me = view.agent;
        for j in (0..n).map(AgentId) {
            if j == me {
                continue;
            }
            let visible = view.partition.contains(j);
            if view.revealed.weight(me, j).is_ok() != visible
                || view.revealed.is_revealed(j) != visible
            {
                bad(&self.violations);
            }
        }
        if view.revealed.revealed_count() != view.step {
            bad(&self.violations);
        }
        let before = partition_welfare(&self.matrix, view.partition);
        for c in view.candidates {
            let mut cs = view.partition.to_indices();
            match c.mv {
                Move::NewSingleton => cs.push(vec![me.0]),
                Move::Join { anchor } => {
                    let Some(x) = cs.iter_mut().find(|x| x.iter().min() == Some(&anchor.0)) else {
                        bad(&self.violations);
                        continue;
                    };
                    x.push(me.0);
                }
                Move::DissolveAndPair { anchor, partner } => {
                    let Some(pos) = cs.iter().position(|x| x.iter().min() == Some(&anchor.0))
                    else {
                        bad(&self.violations);
                        continue;
                    };
                    let old = cs.remove(pos);
                    cs.extend(old.iter().filter(|&&y| y != partner.0).map(|&y| vec![y]));
                    cs.push(vec![me.0, partner.0]);
                }
            }
            if qw(&self.game.unscale(&c.gain)) != welfare(&self.matrix, &cs) - &before {
                bad(&self.violations);
            }
        }
        self.pick = self
            .pick
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        Ok(
            view.candidates[(self.pick >> 33) as usize % view.candidates.len()]
                .mv,
        )
    }
}

fn canonical(p: &Partition) -> Vec<Vec<usize>> {
    let mut cs: Vec<Vec<usize>> = p
        .to_indices()
        .into_iter()
        .map(|mut c| {
            c.sort();
            c
        })
        .collect();
    cs.sort();
    cs
}

/// Test-side successor set of `pi` when `a` arrives.
fn expected_successors(pi: &Partition, a: usize, mode: Mode) -> BTreeSet<Vec<Vec<usize>>> {
    let cs = canonical(pi);
    let mut out = BTreeSet::new();
    let norm = |mut v: Vec<Vec<usize>>| {
        for c in &mut v {
            c.sort();
        }
        v.sort();
        v
    };
    let mut solo = cs.clone();
    solo.push(vec![a]);
    out.insert(norm(solo));
    for (x, c) in cs.iter().enumerate() {
        let mut joined = cs.clone();
        joined[x].push(a);
        out.insert(norm(joined));
        if mode == Mode::Dissolution {
            for &partner in c {
                let mut d: Vec<Vec<usize>> = cs
                    .iter()
                    .enumerate()
                    .filter(|(y, _)| *y != x)
                    .map(|(_, c)| c.clone())
                    .collect();
                d.extend(c.iter().filter(|&&y| y != partner).map(|&y| vec![y]));
                d.push(vec![a, partner]);
                out.insert(norm(d));
            }
        }
    }
    out
}

fn c15_engine() -> Outcome {
    let rep = core(theorem_suite("engine", Scale::Full))?;
    ensure(rep.passed(), || rep.to_string())?;
    let violations = Arc::new(AtomicUsize::new(0));
    let failures: Vec<String> = (0..ENGINE_CASES as u64)
        .into_par_iter()
        .filter_map(|case| engine_case(case, &violations).err())
        .collect();
    ensure(failures.is_empty(), || {
        failures
            .iter()
            .take(5)
            .cloned()
            .collect::<Vec<_>>()
            .join("; ")
    })?;
    let v = violations.load(Ordering::Relaxed);
    ensure(v == 0, || format!("{v} information or gain violations"))?;
    Ok(format!(
        "{ENGINE_CASES} randomized cases per property, 0 violations"
    ))
}

fn engine_case(case: u64, violations: &Arc<AtomicUsize>) -> Result<(), String> {
    let fail = |what: String| Err(format!("case {case}: {what}"));
    let mut rng = ChaCha8Rng::seed_from_u64(case);
    let n = rng.gen_range(2..=7usize);
    let dist = [
        WeightDist::Int(5),
        WeightDist::Pos(4),
        WeightDist::Sparse { p: 0.4, w: 3 },
    ][case as usize % 3]
        .clone();
    let game = Arc::new(gen_random_ashg(n, &dist, case));
    let matrix = Arc::new(matrix(&game));
    let mode = if case.is_multiple_of(2) {
        Mode::Standard
    } else {
        Mode::Dissolution
    };
    let order = ArrivalOrder::random(n, &mut rng);
    let mut probe = Probe {
        game: game.clone(),
        matrix: matrix.clone(),
        violations: Arc::clone(violations),
        pick: case,
    };
    let trace = core(run_online(&game, &order, &mut probe, mode))?;
    // move sets and successor partitions, step by step
    for rec in &trace.steps {
        let prev = if rec.step == 1 {
            Partition::empty(n)
        } else {
            trace.steps[rec.step - 2]
                .partition
                .clone()
                .expect("snapshot")
        };
        let k = prev.len();
        let total: usize = prev.coalitions().iter().map(|c| c.len()).sum();
        let s = core(legal_moves_standard(&prev, rec.agent))?;
        let d = core(legal_moves_dissolution(&prev, rec.agent))?;
        if s.len() != k + 1 || d.len() != k + 1 + total || !s.iter().all(|m| d.contains(m)) {
            return Err(format!(
                "case {case} step {}: move counts {} / {}",
                rec.step,
                s.len(),
                d.len()
            ));
        }
        let got: BTreeSet<_> = core(available_partitions(&prev, rec.agent, mode))?
            .iter()
            .map(canonical)
            .collect();
        if got != expected_successors(&prev, rec.agent.0, mode) {
            return Err(format!(
                "case {case} step {}: successor sets differ",
                rec.step
            ));
        }
        let snap = rec.partition.as_ref().expect("snapshot");
        if qw(&rec.sw) != partition_welfare(&matrix, snap) {
            return Err(format!("case {case} step {}: welfare annotation", rec.step));
        }
    }
    // replay fidelity through the JSON-lines format
    let text = trace.to_jsonl();
    let back = core(RunTrace::from_jsonl(&text, "probe", mode))?;
    if !validate_trace(&game, &order, &back, mode).is_valid() || back.to_jsonl() != text {
        return Err(format!("case {case}: replay rejected its own trace"));
    }
    // the guard keeps a matching at every step
    let guarded = core(run_online(&game, &order, &mut matching_guard(gdy()), mode))?;
    if !guarded
        .steps
        .iter()
        .all(|s| is_matching(s.partition.as_ref().expect("snapshot")))
    {
        return Err(format!("case {case}: guard left the matching domain"));
    }
    let fin = core(run_final(&game, &order, &mut matching_guard(gdy()), mode))?;
    if Some(&fin.partition) != guarded.final_partition() {
        return fail("run_final disagrees".into());
    }
    Ok(())
}

fn main() {
    let criteria: [(u8, &str, fn() -> Outcome); 15] = [
        (1, "greedy random-arrival pair probability", c1_gdy_random),
        (2, "waiting greedy pair probability", c2_wgdy_random),
        (3, "greedy matching single-edge probability", c3_gma),
        (4, "waiting greedy welfare lower bound", c4_wgdy_welfare),
        (5, "iterated waiting upper bound", c5_iwa_upper),
        (6, "doubling wrapper floor", c6_doubling_floor),
        (7, "threshold ladder ratios", c7_dta_ladder),
        (8, "threshold per-instance guarantee", c8_dta_instance),
        (9, "greedy dissolution chain (matching)", c9_gdy_chain),
        (10, "greedy dissolution trap (coalitions)", c10_gdy_trap),
        (11, "adaptive adversary 12/n bound", c11_adversary),
        (12, "max-edge stopping success", c12_maxe),
        (13, "matching and welfare bounds", c13_matching_bounds),
        (14, "combinatorial identities", c14_identities),
        (15, "engine contracts", c15_engine),
    ];
    let filter: Vec<u8> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failed = 0;
    for (id, name, f) in criteria {
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let t0 = Instant::now();
        let res = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t0.elapsed().as_secs_f64();
        match res {
            Ok(d) => println!("PASS [{id:>2}] {name} ({secs:.1}s): {d}"),
            Err(d) => {
                failed += 1;
                println!("FAIL [{id:>2}] {name} ({secs:.1}s): {d}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
