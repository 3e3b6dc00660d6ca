//! Additively separable hedonic games with exact rational weights.

use crate::error::{Error, Result};
use crate::score::Score;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::HashSet;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

/// Dense agent index in `[0, n)`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AgentId(pub usize);

impl AgentId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<usize> for AgentId {
    fn from(i: usize) -> Self {
        AgentId(i)
    }
}

/// An exact rational weight, always in lowest terms with a positive denominator.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Weight(BigRational);

impl Weight {
    pub fn zero() -> Self {
        Weight(BigRational::zero())
    }

    pub fn one() -> Self {
        Weight(BigRational::one())
    }

    pub fn int(v: i64) -> Self {
        Weight(BigRational::from_integer(BigInt::from(v)))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Weight(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_bigints(num: BigInt, den: BigInt) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        Weight(BigRational::new(num, den))
    }

    pub fn from_rational(r: BigRational) -> Self {
        Weight(r)
    }

    pub fn as_rational(&self) -> &BigRational {
        &self.0
    }

    pub fn into_rational(self) -> BigRational {
        self.0
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or_else(|| {
            // Fallback for magnitudes beyond what num's direct conversion handles.
            let n = self.0.numer().to_f64().unwrap_or(f64::NAN);
            let d = self.0.denom().to_f64().unwrap_or(f64::NAN);
            n / d
        })
    }

    pub fn pow(&self, e: u32) -> Weight {
        let mut acc = Weight::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    pub fn recip(&self) -> Weight {
        Weight(self.0.recip())
    }

    /// Canonical wire form `p/q` (denominator always written).
    pub fn to_wire(&self) -> String {
        format!("{}/{}", self.0.numer(), self.0.denom())
    }

    /// Parses `p/q`, an integer, or a finite decimal such as `-0.25`.
    pub fn parse(s: &str) -> Result<Weight> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::parse("empty weight"));
        }
        if let Some((p, q)) = s.split_once('/') {
            let p = BigInt::from_str(p.trim())
                .map_err(|_| Error::parse(format!("bad numerator in {s:?}")))?;
            let q = BigInt::from_str(q.trim())
                .map_err(|_| Error::parse(format!("bad denominator in {s:?}")))?;
            if q.is_zero() {
                return Err(Error::parse(format!("zero denominator in {s:?}")));
            }
            return Ok(Weight::from_bigints(p, q));
        }
        parse_decimal(s)
    }
}

fn parse_decimal(s: &str) -> Result<Weight> {
    let bad = || Error::parse(format!("bad weight {s:?}"));
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part
        .chars()
        .chain(frac_part.chars())
        .all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let all = format!("{int_part}{frac_part}");
    let mut num = BigInt::from_str(if all.is_empty() { "0" } else { &all }).map_err(|_| bad())?;
    if neg {
        num = -num;
    }
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let r = if scale >= 0 {
        BigRational::from_integer(num * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(num, num_traits::pow(ten, (-scale) as usize))
    };
    Ok(Weight(r))
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_wire())
    }
}

impl FromStr for Weight {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Weight::parse(s)
    }
}

impl From<i64> for Weight {
    fn from(v: i64) -> Self {
        Weight::int(v)
    }
}

impl From<BigInt> for Weight {
    fn from(v: BigInt) -> Self {
        Weight(BigRational::from_integer(v))
    }
}

impl From<BigRational> for Weight {
    fn from(r: BigRational) -> Self {
        Weight(r)
    }
}

macro_rules! weight_binop {
    ($tr:ident, $m:ident) => {
        impl<'a> $tr<&'a Weight> for &'a Weight {
            type Output = Weight;
            fn $m(self, rhs: &'a Weight) -> Weight {
                Weight((&self.0).$m(&rhs.0))
            }
        }
        impl $tr for Weight {
            type Output = Weight;
            fn $m(self, rhs: Weight) -> Weight {
                Weight(self.0.$m(rhs.0))
            }
        }
    };
}
weight_binop!(Add, add);
weight_binop!(Sub, sub);
weight_binop!(Mul, mul);
weight_binop!(Div, div);

impl Neg for Weight {
    type Output = Weight;
    fn neg(self) -> Weight {
        Weight(-self.0)
    }
}

impl Neg for &Weight {
    type Output = Weight;
    fn neg(self) -> Weight {
        Weight(-self.0.clone())
    }
}

impl std::iter::Sum for Weight {
    fn sum<I: Iterator<Item = Weight>>(iter: I) -> Weight {
        iter.fold(Weight::zero(), |a, b| a + b)
    }
}

impl<'a> std::iter::Sum<&'a Weight> for Weight {
    fn sum<I: Iterator<Item = &'a Weight>>(iter: I) -> Weight {
        iter.fold(Weight::zero(), |a, b| &a + b)
    }
}

impl Serialize for Weight {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_wire())
    }
}

impl<'de> Deserialize<'de> for Weight {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        weight_from_json(&v).map_err(serde::de::Error::custom)
    }
}

fn weight_from_json(v: &serde_json::Value) -> Result<Weight> {
    match v {
        serde_json::Value::String(s) => Weight::parse(s),
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(Weight::int(i))
            } else if let Some(u) = n.as_u64() {
                Ok(Weight::from(BigInt::from(u)))
            } else {
                // Shortest round-trip decimal of the float, read exactly.
                Weight::parse(&n.to_string())
            }
        }
        other => Err(Error::parse(format!(
            "weight must be a string or number, got {other}"
        ))),
    }
}

/// A complete weighted graph over `n` agents. Immutable once built.
///
/// Alongside the rational weights the game stores every weight multiplied by
/// the least common denominator, so welfare arithmetic in the engine and the
/// oracles stays in integers.
#[derive(Clone, Debug)]
pub struct Game {
    n: usize,
    weights: Vec<Weight>,
    denom: BigInt,
    scaled: Vec<Score>,
    labels: Option<Vec<String>>,
}

impl PartialEq for Game {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.weights == other.weights
    }
}

impl Eq for Game {}

impl Game {
    /// Builds a game from `(i, j, w)` triples. Pairs must be distinct and
    /// off-diagonal; omitted pairs weigh zero.
    pub fn new<I>(n: usize, edges: I) -> Result<Game>
    where
        I: IntoIterator<Item = (usize, usize, Weight)>,
    {
        let mut weights = vec![Weight::zero(); n * n];
        let mut seen = HashSet::new();
        for (i, j, w) in edges {
            if i >= n {
                return Err(Error::AgentOutOfRange(i, n));
            }
            if j >= n {
                return Err(Error::AgentOutOfRange(j, n));
            }
            if i == j {
                return Err(Error::SelfPair(i));
            }
            let key = (i.min(j), i.max(j));
            if !seen.insert(key) {
                return Err(Error::parse(format!(
                    "duplicate edge ({}, {})",
                    key.0, key.1
                )));
            }
            weights[i * n + j] = w.clone();
            weights[j * n + i] = w;
        }
        Ok(Game::from_dense(n, weights))
    }

    /// Builds a game by evaluating `f(i, j)` for every `i < j`.
    pub fn from_fn<F>(n: usize, mut f: F) -> Game
    where
        F: FnMut(usize, usize) -> Weight,
    {
        let mut weights = vec![Weight::zero(); n * n];
        for i in 0..n {
            for j in i + 1..n {
                let w = f(i, j);
                weights[i * n + j] = w.clone();
                weights[j * n + i] = w;
            }
        }
        Game::from_dense(n, weights)
    }

    fn from_dense(n: usize, weights: Vec<Weight>) -> Game {
        let mut denom = BigInt::one();
        for w in &weights {
            if !w.denom().is_one() {
                denom = denom.lcm(w.denom());
            }
        }
        let scaled = weights
            .iter()
            .map(|w| {
                if w.is_zero() {
                    Score::ZERO
                } else {
                    Score::from(w.numer() * (&denom / w.denom()))
                }
            })
            .collect();
        Game {
            n,
            weights,
            denom,
            scaled,
            labels: None,
        }
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Game> {
        if labels.len() != self.n {
            return Err(Error::precondition(format!(
                "{} labels for {} agents",
                labels.len(),
                self.n
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn label(&self, a: AgentId) -> String {
        match &self.labels {
            Some(l) => l[a.0].clone(),
            None => a.0.to_string(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn agents(&self) -> impl Iterator<Item = AgentId> {
        (0..self.n).map(AgentId)
    }

    fn check(&self, i: AgentId, j: AgentId) -> Result<()> {
        if i.0 >= self.n {
            return Err(Error::AgentOutOfRange(i.0, self.n));
        }
        if j.0 >= self.n {
            return Err(Error::AgentOutOfRange(j.0, self.n));
        }
        if i == j {
            return Err(Error::SelfPair(i.0));
        }
        Ok(())
    }

    /// `w(i, j)`; rejects `i == j`.
    pub fn weight(&self, i: AgentId, j: AgentId) -> Result<&Weight> {
        self.check(i, j)?;
        Ok(&self.weights[i.0 * self.n + j.0])
    }

    /// `w(i, j) * D` where `D` is [`Game::denominator`]. The diagonal reads as zero.
    #[inline]
    pub fn scaled(&self, i: AgentId, j: AgentId) -> &Score {
        &self.scaled[i.0 * self.n + j.0]
    }

    /// Least common denominator of all weights.
    pub fn denominator(&self) -> &BigInt {
        &self.denom
    }

    /// Converts a scaled integer back to an exact weight.
    pub fn unscale(&self, s: &Score) -> Weight {
        Weight::from_bigints(s.to_bigint(), self.denom.clone())
    }

    /// Converts an exact weight to the game's integer scale. Fails when the
    /// weight is not a multiple of `1/D`.
    pub fn scale(&self, w: &Weight) -> Option<Score> {
        let prod = w.as_rational() * BigRational::from_integer(self.denom.clone());
        prod.is_integer().then(|| Score::from(prod.to_integer()))
    }

    /// All unordered pairs `i < j` with their weight.
    pub fn edges(&self) -> impl Iterator<Item = (AgentId, AgentId, &Weight)> + '_ {
        (0..self.n).flat_map(move |i| {
            (i + 1..self.n).map(move |j| (AgentId(i), AgentId(j), &self.weights[i * self.n + j]))
        })
    }

    /// Subgame induced by `subset`. Agent `k` of the result is `subset[k]` of `self`.
    pub fn induced_subgame(&self, subset: &[AgentId]) -> Result<(Game, Vec<AgentId>)> {
        for a in subset {
            if a.0 >= self.n {
                return Err(Error::AgentOutOfRange(a.0, self.n));
            }
        }
        let m = subset.len();
        let mut weights = vec![Weight::zero(); m * m];
        for (x, a) in subset.iter().enumerate() {
            for (y, b) in subset.iter().enumerate() {
                if x != y {
                    weights[x * m + y] = self.weights[a.0 * self.n + b.0].clone();
                }
            }
        }
        let mut g = Game::from_dense(m, weights);
        if let Some(l) = &self.labels {
            g.labels = Some(subset.iter().map(|a| l[a.0].clone()).collect());
        }
        Ok((g, subset.to_vec()))
    }

    /// Relabels agents: old agent `i` becomes `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Game {
        assert_eq!(perm.len(), self.n);
        let mut weights = vec![Weight::zero(); self.n * self.n];
        for i in 0..self.n {
            for j in 0..self.n {
                weights[perm[i] * self.n + perm[j]] = self.weights[i * self.n + j].clone();
            }
        }
        Game::from_dense(self.n, weights)
    }

    /// Largest weight over all pairs, or `None` for `n < 2`.
    pub fn max_weight(&self) -> Option<&Weight> {
        self.edges().map(|(_, _, w)| w).max()
    }

    pub fn to_instance(&self) -> InstanceFile {
        InstanceFile {
            n: self.n,
            edges: self
                .edges()
                .filter(|(_, _, w)| !w.is_zero())
                .map(|(i, j, w)| InstanceEdge {
                    i: i.0,
                    j: j.0,
                    w: w.clone(),
                })
                .collect(),
            labels: self.labels.clone(),
            order: None,
        }
    }

    pub fn from_instance(inst: &InstanceFile) -> Result<Game> {
        for e in &inst.edges {
            if e.i >= e.j {
                return Err(Error::parse(format!(
                    "edge ({}, {}) must satisfy i < j",
                    e.i, e.j
                )));
            }
        }
        let g = Game::new(inst.n, inst.edges.iter().map(|e| (e.i, e.j, e.w.clone())))?;
        match &inst.labels {
            Some(l) => g.with_labels(l.clone()),
            None => Ok(g),
        }
    }

    pub fn from_json(s: &str) -> Result<Game> {
        let inst: InstanceFile = serde_json::from_str(s)?;
        Game::from_instance(&inst)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_instance()).expect("instance serializes")
    }
}

/// Instance file schema: `{ "n": int, "edges": [ { "i", "j", "w" } ], "labels"?, "order"? }`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct InstanceFile {
    pub n: usize,
    pub edges: Vec<InstanceEdge>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    /// Suggested arrival order (agent indices); ignored by [`Game::from_json`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<Vec<usize>>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct InstanceEdge {
    pub i: usize,
    pub j: usize,
    pub w: Weight,
}
