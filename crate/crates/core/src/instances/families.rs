use crate::algorithms::t_default;
use crate::engine::ArrivalOrder;
use crate::error::{Error, Result};
use crate::game::{Game, InstanceFile, Weight};
use num_bigint::BigInt;
use num_traits::Pow;

/// A generated game together with the order its construction is designed for.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub game: Game,
    pub order: ArrivalOrder,
}

impl Instance {
    fn labelled(
        n: usize,
        weights: impl FnMut(usize, usize) -> Weight,
        labels: Vec<String>,
        order: Vec<usize>,
    ) -> Result<Self> {
        let game = Game::from_fn(n, weights).with_labels(labels)?;
        Ok(Instance {
            game,
            order: ArrivalOrder::from_indices(&order)?,
        })
    }

    /// Instance file including the arrival order.
    pub fn to_json(&self) -> String {
        let mut file = self.game.to_instance();
        file.order = Some(self.order.as_slice().iter().map(|a| a.0).collect());
        serde_json::to_string_pretty(&file).expect("instance serializes")
    }

    /// Reads an instance file; without an `order` field the identity order is used.
    pub fn from_json(s: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(s)?;
        let game = Game::from_instance(&file)?;
        let order = match &file.order {
            Some(o) => ArrivalOrder::from_indices(o)?,
            None => ArrivalOrder::identity(game.n()),
        };
        if order.len() != game.n() {
            return Err(Error::parse(format!(
                "order lists {} agents, instance has {}",
                order.len(),
                game.n()
            )));
        }
        Ok(Instance { game, order })
    }
}

fn positive_eps(eps: &Weight) -> Result<()> {
    if eps.is_positive() {
        Ok(())
    } else {
        Err(Error::precondition(format!(
            "epsilon must be positive, got {eps}"
        )))
    }
}

/// Star pair: `a = 0`, `b = 1`, `X = 2..2+k`, `Y = 2+k..2+2k`.
/// `w(a,b) = 1`, `w(a,x) = w(b,y) = ε`, every other pair `−1`.
pub fn gen_star_pair(k: usize, eps: &Weight) -> Result<Instance> {
    if k < 1 {
        return Err(Error::precondition("star pair needs k >= 1"));
    }
    positive_eps(eps)?;
    let n = 2 * k + 2;
    let in_x = |i: usize| (2..2 + k).contains(&i);
    let in_y = |i: usize| (2 + k..n).contains(&i);
    let mut labels = vec!["a".to_string(), "b".to_string()];
    labels.extend((1..=k).map(|i| format!("x{i}")));
    labels.extend((1..=k).map(|i| format!("y{i}")));
    Instance::labelled(
        n,
        |i, j| match (i, j) {
            (0, 1) => Weight::one(),
            (0, j) if in_x(j) => eps.clone(),
            (1, j) if in_y(j) => eps.clone(),
            _ => Weight::int(-1),
        },
        labels,
        (0..n).collect(),
    )
}

/// Default `ε = 1/2` for [`gen_star_pair`].
pub fn star_pair_default_eps() -> Weight {
    Weight::ratio(1, 2)
}

/// Increasing path `a_0 … a_{k+1}` with `w(a_{i−1}, a_i) = 1 + (i−1)ε`.
pub fn gen_increasing_chain(k: usize, eps: &Weight) -> Result<Instance> {
    if k == 0 || !k.is_multiple_of(2) {
        return Err(Error::precondition(format!(
            "chain needs a positive even k, got {k}"
        )));
    }
    positive_eps(eps)?;
    let n = k + 2;
    Instance::labelled(
        n,
        |i, j| {
            if j == i + 1 {
                &Weight::one() + &(eps * &Weight::int(i as i64))
            } else {
                Weight::zero()
            }
        },
        (0..n).map(|i| format!("a{i}")).collect(),
        (0..n).collect(),
    )
}

pub fn chain_default_eps() -> Weight {
    Weight::ratio(1, 1_000_000_000)
}

/// Dissolution trap with `ε = 1/k`: `a_i` is agent `i−1`, `b_j` is `k+j−1`.
pub fn gen_dissolution_trap(k: usize) -> Result<Instance> {
    if k < 2 {
        return Err(Error::precondition(format!("trap needs k >= 2, got {k}")));
    }
    let n = 2 * k;
    let eps = Weight::ratio(1, k as i64);
    let mut labels: Vec<String> = (1..=k).map(|i| format!("a{i}")).collect();
    labels.extend((1..=k).map(|j| format!("b{j}")));
    Instance::labelled(
        n,
        |i, j| {
            let (ia, ja) = (i < k, j < k);
            match (ia, ja) {
                (true, true) if i == 0 && j == 1 => Weight::one(),
                (true, true) if i == 0 => eps.clone(),
                (true, false) if i == 0 => Weight::int(-(k as i64)),
                (true, false) => Weight::one(),
                _ => Weight::zero(),
            }
        },
        labels,
        (0..n).collect(),
    )
}

/// Ladder for the threshold algorithm, built from the same rational `t` the
/// default algorithm uses. Rails `a_i a_{i+1}` weigh `t^i`, rungs `a_i b_i`
/// weigh `t^{i+1} − ε` (the last rung `t^{k+1} − ε`).
pub fn gen_dta_ladder(k: usize, eps: &Weight) -> Result<Instance> {
    gen_dta_ladder_with(k, eps, &Weight::from(t_default().value().clone()))
}

pub fn gen_dta_ladder_with(k: usize, eps: &Weight, t: &Weight) -> Result<Instance> {
    if k < 1 {
        return Err(Error::precondition("ladder needs k >= 1"));
    }
    positive_eps(eps)?;
    let m = k + 2;
    let n = 2 * m;
    let pw: Vec<Weight> = (0..=k + 2).map(|e| t.pow(e as u32)).collect();
    let a = |i: usize| i;
    let b = |i: usize| m + i;
    let mut labels: Vec<String> = (0..m).map(|i| format!("a{i}")).collect();
    labels.extend((0..m).map(|i| format!("b{i}")));
    let mut order = vec![a(0), a(1), b(0)];
    for i in 2..=k + 1 {
        order.push(a(i));
        order.push(b(i - 1));
    }
    order.push(b(k + 1));
    Instance::labelled(
        n,
        |i, j| {
            if j < m && j == i + 1 {
                pw[i].clone()
            } else if i < m && j == b(i) {
                let e = if i <= k { i + 1 } else { k + 1 };
                &pw[e] - eps
            } else {
                Weight::zero()
            }
        },
        labels,
        order,
    )
}

/// `ε = t^{k+1} / 10^6`.
pub fn ladder_default_eps(k: usize) -> Weight {
    let t = Weight::from(t_default().value().clone());
    &t.pow(k as u32 + 1) / &Weight::from(BigInt::from(10).pow(6u32))
}
