use super::report::SuiteReport;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, Zero};
use std::time::Instant;

pub const IDENTITY_K_MAX: usize = 30;
pub const PARTIAL_SUM_K_MAX: usize = 50;
/// Fixed-point scale for the numeric partial-sum check: 60 decimal digits.
pub const PARTIAL_SUM_DIGITS: u32 = 60;
/// `|lhs − rhs| ≤ 10^-40` in the numeric partial-sum check.
pub const PARTIAL_SUM_TOL_EXP: u32 = 40;

/// Pascal's triangle up to row `m`.
pub fn binomials(m: usize) -> Vec<Vec<BigInt>> {
    let mut rows: Vec<Vec<BigInt>> = Vec::with_capacity(m + 1);
    for r in 0..=m {
        let mut row = vec![BigInt::one(); r + 1];
        for c in 1..r {
            row[c] = &rows[r - 1][c - 1] + &rows[r - 1][c];
        }
        rows.push(row);
    }
    rows
}

fn binom(t: &[Vec<BigInt>], n: usize, k: usize) -> BigInt {
    if k > n {
        BigInt::zero()
    } else {
        t[n][k].clone()
    }
}

fn q(n: BigInt, d: BigInt) -> BigRational {
    BigRational::new(n, d)
}

fn qi(v: usize) -> BigInt {
    BigInt::from(v)
}

/// `Σ_{j=0}^{i} C(i,j)/C(k,j)`.
pub fn inner_lhs(t: &[Vec<BigInt>], i: usize, k: usize) -> BigRational {
    (0..=i).map(|j| q(binom(t, i, j), binom(t, k, j))).sum()
}

/// `Σ_{i=0}^{k} C(k,i)·C(k,k−i)/C(2k,k) · 1/(k+1−i)`.
pub fn outer_lhs(t: &[Vec<BigInt>], k: usize) -> BigRational {
    (0..=k)
        .map(|i| {
            q(
                binom(t, k, i) * binom(t, k, k - i),
                binom(t, 2 * k, k) * qi(k + 1 - i),
            )
        })
        .sum()
}

/// `Σ_{j=0}^{r} C(k,j)·C(k,r−j)/C(2k,r) · 1/(r+1−j)` with `r = 2^i − 1`.
pub fn crazy_lhs(t: &[Vec<BigInt>], i: u32, k: usize) -> BigRational {
    let r = (1usize << i) - 1;
    (0..=r)
        .map(|j| {
            q(
                binom(t, k, j) * binom(t, k, r - j),
                binom(t, 2 * k, r) * qi(r + 1 - j),
            )
        })
        .sum()
}

/// `a + b√2` with rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Surd(BigRational, BigRational);

impl Surd {
    fn int(a: i64, b: i64) -> Surd {
        Surd(
            BigRational::from_integer(a.into()),
            BigRational::from_integer(b.into()),
        )
    }
    fn add(&self, o: &Surd) -> Surd {
        Surd(&self.0 + &o.0, &self.1 + &o.1)
    }
    fn sub(&self, o: &Surd) -> Surd {
        Surd(&self.0 - &o.0, &self.1 - &o.1)
    }
    fn mul(&self, o: &Surd) -> Surd {
        let two = BigRational::from_integer(2.into());
        Surd(
            &self.0 * &o.0 + two * &self.1 * &o.1,
            &self.0 * &o.1 + &self.1 * &o.0,
        )
    }
}

/// Exact check in `Q(√2)` of `Σ_{i=1}^{k} x^i = √2(1 − x^k)` with
/// `x = 1/(1 + √2/2) = 2 − √2`.
pub fn partial_sum_exact(k: usize) -> bool {
    let x = Surd::int(2, -1);
    let mut pow = Surd::int(1, 0);
    let mut lhs = Surd::int(0, 0);
    for _ in 0..k {
        pow = pow.mul(&x);
        lhs = lhs.add(&pow);
    }
    let rhs = Surd::int(0, 1).mul(&Surd::int(1, 0).sub(&pow));
    lhs == rhs
}

/// Numeric version at `PARTIAL_SUM_DIGITS` digits, summing `(1 + √2/2)^{-i}`
/// directly. Returns `|lhs − rhs|` in units of `10^-DIGITS`.
pub fn partial_sum_numeric_error(k: usize) -> BigInt {
    let scale = BigInt::from(10).pow(PARTIAL_SUM_DIGITS);
    let sqrt2 = (BigInt::from(2) * &scale * &scale).sqrt();
    let t = &scale + &sqrt2 / 2;
    let mut pow = scale.clone();
    let mut lhs = BigInt::zero();
    for _ in 0..k {
        pow = &pow * &scale / &t;
        lhs += &pow;
    }
    let rhs = &sqrt2 * (&scale - &pow) / &scale;
    (lhs - rhs).abs()
}

/// `Σ_{j=0}^{n} x^j ≤ x^{n+1}`, plus the closed form `(x^{n+1} − 1)/(x − 1)`.
pub fn geometric_holds(x: u32, n: u32) -> bool {
    let xb = BigInt::from(x);
    let sum: BigInt = (0..=n).map(|j| xb.clone().pow(j)).sum();
    let top = xb.clone().pow(n + 1);
    sum <= top && sum * (&xb - 1) == top - 1
}

/// All binomial identities and bounds used by the analysis, checked exactly.
pub fn identity_suite() -> SuiteReport {
    let start = Instant::now();
    let mut rep = SuiteReport::new("identities");
    let t = binomials(2 * IDENTITY_K_MAX + 2);

    let mut bad = Vec::new();
    let mut count = 0;
    for k in 0..=IDENTITY_K_MAX {
        for i in 0..=k {
            count += 1;
            if inner_lhs(&t, i, k) != q(qi(k + 1), qi(k + 1 - i)) {
                bad.push(format!("(i={i},k={k})"));
            }
        }
    }
    rep.check(
        "inner",
        bad.is_empty(),
        format!("{count} cases; mismatches {bad:?}"),
    );

    let mut bad = Vec::new();
    for k in 0..=IDENTITY_K_MAX {
        if outer_lhs(&t, k) != q(qi(2 * k + 1), qi((k + 1) * (k + 1))) {
            bad.push(k);
        }
    }
    rep.check(
        "outer",
        bad.is_empty(),
        format!("k = 0..={IDENTITY_K_MAX}; mismatches {bad:?}"),
    );

    let mut bad = Vec::new();
    let mut count = 0;
    for k in 0..=IDENTITY_K_MAX {
        let mut i = 0u32;
        while k + 2 > (1usize << i) {
            count += 1;
            if crazy_lhs(&t, i, k) > q(qi(2), qi(1 << i)) {
                bad.push(format!("(i={i},k={k})"));
            }
            i += 1;
        }
    }
    rep.check(
        "crazy",
        bad.is_empty(),
        format!("{count} admissible cases; violations {bad:?}"),
    );

    let bad: Vec<(u32, u32)> = (2..=10)
        .flat_map(|x| (0..=30).map(move |n| (x, n)))
        .filter(|&(x, n)| !geometric_holds(x, n))
        .collect();
    rep.check(
        "geometric",
        bad.is_empty(),
        format!("x = 2..=10, n = 0..=30; violations {bad:?}"),
    );

    let tol = BigInt::from(10).pow(PARTIAL_SUM_DIGITS - PARTIAL_SUM_TOL_EXP);
    let mut worst = BigInt::zero();
    let mut bad = Vec::new();
    for k in 1..=PARTIAL_SUM_K_MAX {
        let e = partial_sum_numeric_error(k);
        if e > tol {
            bad.push(k);
        }
        worst = worst.max(e);
    }
    rep.check(
        "partial-sum numeric",
        bad.is_empty(),
        format!("k = 1..={PARTIAL_SUM_K_MAX}; worst error {worst}e-{PARTIAL_SUM_DIGITS}; over tolerance {bad:?}"),
    );
    let bad: Vec<usize> = (1..=PARTIAL_SUM_K_MAX)
        .filter(|&k| !partial_sum_exact(k))
        .collect();
    rep.check(
        "partial-sum exact",
        bad.is_empty(),
        format!("k = 1..={PARTIAL_SUM_K_MAX}; mismatches {bad:?}"),
    );

    rep.elapsed = start.elapsed();
    rep
}
