use crate::algorithms::AlgSpec;
use crate::engine::Mode;
use crate::engine::{run_final, AlgorithmFactory};
use crate::error::{Error, Result};
use crate::game::Weight;
use crate::instances::FamilySpec;
use crate::oracles::{competitive_ratio, Arrival, Budget, OptKind, RatioEstimate};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArrivalKind {
    /// The order the instance family was built for.
    #[default]
    Canonical,
    Worst,
    Random,
}

impl fmt::Display for ArrivalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ArrivalKind::Canonical => "canonical",
            ArrivalKind::Worst => "worst",
            ArrivalKind::Random => "random",
        })
    }
}

impl FromStr for ArrivalKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "canonical" => Ok(ArrivalKind::Canonical),
            "worst" => Ok(ArrivalKind::Worst),
            "random" => Ok(ArrivalKind::Random),
            other => Err(Error::parse(format!(
                "unknown arrival {other:?}; expected canonical, worst or random"
            ))),
        }
    }
}

/// One experiment: instance × algorithm × mode × arrival model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub instance: FamilySpec,
    pub algorithm: AlgSpec,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub arrival: ArrivalKind,
    /// Monte Carlo trials for random arrival; `None` enumerates every order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(default)]
    pub seed: u64,
    /// Offline benchmark; defaults by algorithm kind.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub opt: Option<OptKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl ExperimentSpec {
    pub fn new(instance: FamilySpec, algorithm: AlgSpec) -> Self {
        ExperimentSpec {
            instance,
            algorithm,
            mode: Mode::Standard,
            arrival: ArrivalKind::Canonical,
            trials: None,
            seed: 0,
            opt: None,
            out: None,
        }
    }

    pub fn opt_kind(&self) -> OptKind {
        self.opt.unwrap_or(if self.algorithm.outputs_matchings() {
            OptKind::Matching
        } else {
            OptKind::Coalition
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("spec serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// One CSV row. Exact values are written as `p/q`; Monte Carlo values as
/// decimals with a confidence half-width.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub instance: String,
    pub n: usize,
    pub algorithm: String,
    pub mode: String,
    pub arrival: String,
    pub sw: String,
    pub sw_ci: String,
    pub opt: String,
    pub ratio: String,
    pub ratio_f64: f64,
    pub trials: u64,
    pub seed: u64,
    /// Filled only when timing is requested; off by default so reruns are byte-identical.
    pub wall_ms: Option<f64>,
}

impl ResultRow {
    pub const COLUMNS: &'static [&'static str] = &[
        "instance",
        "n",
        "algorithm",
        "mode",
        "arrival",
        "sw",
        "sw_ci",
        "opt",
        "ratio",
        "ratio_f64",
        "trials",
        "seed",
        "wall_ms",
    ];

    /// A column by name, or a parameter of the instance spec (`k`, `eps`, …).
    pub fn field(&self, name: &str) -> Option<String> {
        Some(match name {
            "instance" => self.instance.clone(),
            "n" => self.n.to_string(),
            "algorithm" => self.algorithm.clone(),
            "mode" => self.mode.clone(),
            "arrival" => self.arrival.clone(),
            "sw" => self.sw.clone(),
            "sw_ci" => self.sw_ci.clone(),
            "opt" => self.opt.clone(),
            "ratio" => self.ratio.clone(),
            "ratio_f64" => self.ratio_f64.to_string(),
            "trials" => self.trials.to_string(),
            "seed" => self.seed.to_string(),
            "wall_ms" => self.wall_ms.map(|w| w.to_string()).unwrap_or_default(),
            key => {
                let (_, params) = self.instance.split_once(':')?;
                return params
                    .split(',')
                    .filter_map(|kv| kv.split_once('='))
                    .find(|(k, _)| *k == key)
                    .map(|(_, v)| v.to_string());
            }
        })
    }
}

fn fmt_f64(x: f64) -> String {
    format!("{x:.9}")
}

/// Runs one experiment and returns its row.
pub fn run_experiment(spec: &ExperimentSpec, timing: bool) -> Result<ResultRow> {
    let start = Instant::now();
    let inst = if spec.instance.needs_algorithm() {
        let mut alg = spec.algorithm.build();
        spec.instance.generate_against(alg.as_mut())?
    } else {
        spec.instance.generate()?
    };
    let game = &inst.game;
    let opt_kind = spec.opt_kind();
    let opt = opt_kind.welfare(game)?;
    let arrival = match spec.arrival {
        ArrivalKind::Canonical => Arrival::Fixed(inst.order.clone()),
        ArrivalKind::Worst => Arrival::Worst,
        ArrivalKind::Random => Arrival::Random(match spec.trials {
            None => Budget::Exact,
            Some(trials) => Budget::MonteCarlo {
                trials,
                seed: spec.seed,
            },
        }),
    };
    let est: RatioEstimate =
        competitive_ratio(game, &spec.algorithm, spec.mode, &arrival, opt_kind)?;
    let (sw, sw_ci) = match (&arrival, &est.exact) {
        (Arrival::Fixed(order), _) => {
            let mut alg = AlgorithmFactory::build(&spec.algorithm);
            let out = run_final(game, order, alg.as_mut(), spec.mode)?;
            (game.unscale(&out.welfare).to_wire(), String::new())
        }
        (_, Some(ratio)) => {
            let sw: Weight = if opt.is_zero() {
                Weight::zero()
            } else {
                ratio * &opt
            };
            (sw.to_wire(), String::new())
        }
        (_, None) => {
            let o = opt.to_f64();
            let scale = if opt.is_zero() { 0.0 } else { o };
            (fmt_f64(est.point * scale), fmt_f64(est.half_width * scale))
        }
    };
    let ratio = match &est.exact {
        Some(r) => r.to_wire(),
        None => fmt_f64(est.point),
    };
    Ok(ResultRow {
        instance: spec.instance.to_string(),
        n: game.n(),
        algorithm: spec.algorithm.to_string(),
        mode: spec.mode.to_string(),
        arrival: spec.arrival.to_string(),
        sw,
        sw_ci,
        opt: opt.to_wire(),
        ratio,
        ratio_f64: est.point,
        trials: est.trials,
        seed: spec.seed,
        wall_ms: timing.then(|| start.elapsed().as_secs_f64() * 1e3),
    })
}

/// Runs experiments on up to `jobs` threads; results come back in input order.
pub fn run_experiments(
    specs: &[ExperimentSpec],
    jobs: usize,
    timing: bool,
) -> Result<Vec<Result<ResultRow>>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::precondition(format!("thread pool: {e}")))?;
    Ok(pool.install(|| {
        specs
            .par_iter()
            .map(|s| run_experiment(s, timing))
            .collect()
    }))
}

pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(ResultRow::COLUMNS)?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn rows_to_csv(rows: &[ResultRow]) -> String {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv is utf-8")
}

pub fn rows_to_json(rows: &[ResultRow]) -> String {
    serde_json::to_string_pretty(rows).expect("rows serialize")
}
