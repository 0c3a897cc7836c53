//! The CM specialization: partition-flavored Hilbert series, their crossing
//! weights, and the resulting point-count bounds.
//!
//! When the local Galois representation splits into CM characters the
//! dimension vectors collapse to `(1, 1, 2, 2, 2, ...)` locally and
//! `(r, s, 1, 1, ...)` globally, so both Hilbert series become eta-like
//! products. Writing `f = sum p(n) t^n` for the partition generating
//! function, the smoothed comparison arrays are
//!
//!   b = f^2 (doubly smoothed local),
//!   a = (1-t)^(-r) (1-t^2)^(-s) f (doubly smoothed global),
//!   a~ = (1-t)^(-r') f with r' = r + s (its relaxation),
//!
//! and the crossing weight `m0` is the first index where the global side's
//! array drops strictly below `b`. Everything here is integer arithmetic on
//! tables; the asymptotic variants (Hardy-Ramanujan sandwich constants, the
//! `gamma(u)` crossing certificate, the closed-form bound) run in certified
//! interval arithmetic.
//!
//! The polylogarithmic quotient gets the same treatment with partitions
//! into odd parts.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Pow, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::{self, product_tree, KappaReport};
use crate::hilbert::expand_product_form;
use crate::interval::{self, RatInterval};
use crate::numth;
use crate::series::{QSeries, SeriesError};

#[derive(Debug, Error, Clone)]
pub enum CmError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("no crossing found within the order budget {budget}")]
    BudgetExceeded { budget: usize },
    #[error("asymptotic mode needs the fitted constant C1")]
    MissingC1,
    #[error("gamma crossing needs both fitted constants C1 and C2")]
    MissingConstants,
    #[error("{p} is not prime")]
    NotPrime { p: u64 },
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// Input data for the CM bound: an elliptic curve with CM, a good odd
/// prime `p`, and the S-unit parameters.
///
/// `t_bad` counts the primes of bad reduction in S; with CM the curve has
/// potentially good reduction everywhere, so each such prime contributes a
/// factor `n_ell + 1 <= 5`. In unconditional mode (`unconditional: true`)
/// the rank input `r` is replaced by `r1`, the p-adic analytic stand-in,
/// along the otherwise identical code path.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CMData {
    pub r: u32,
    pub s: u32,
    pub p: u64,
    pub points_mod_p: u64,
    pub t_bad: u32,
    #[serde(default)]
    pub unconditional: bool,
    #[serde(default)]
    pub r1: Option<u32>,
    #[serde(default, rename = "C1")]
    pub c1: Option<f64>,
}

impl CMData {
    /// The rank actually used: `r`, or `r1` in unconditional mode.
    pub fn effective_r(&self) -> Result<u32, CmError> {
        if self.unconditional {
            self.r1.ok_or_else(|| {
                CmError::InvalidParams("unconditional mode needs the field r1".into())
            })
        } else {
            Ok(self.r)
        }
    }

    pub fn r_prime(&self) -> Result<u32, CmError> {
        Ok(self.effective_r()? + self.s)
    }

    pub fn validate(&self) -> Result<(), CmError> {
        if !numth::is_prime(self.p) {
            return Err(CmError::NotPrime { p: self.p });
        }
        if self.p == 2 {
            return Err(CmError::InvalidParams(
                "the auxiliary prime must be odd".into(),
            ));
        }
        if self.points_mod_p == 0 {
            return Err(CmError::InvalidParams(
                "points_mod_p counts a group, so it is at least 1".into(),
            ));
        }
        if self.r_prime()? < 2 {
            return Err(CmError::InvalidParams(
                "the crossing argument needs r' = r + s >= 2".into(),
            ));
        }
        Ok(())
    }

    pub fn c1_rational(&self) -> Result<BigRational, CmError> {
        let c1 = self.c1.ok_or(CmError::MissingC1)?;
        if !c1.is_finite() || c1 <= 0.0 {
            return Err(CmError::InvalidParams("C1 must be positive".into()));
        }
        BigRational::from_f64(c1).ok_or(CmError::MissingC1)
    }
}

/// Pentagonal-number pair `(k(3k-1)/2, k(3k+1)/2)` for `k >= 1`, while the
/// smaller one stays `<= n`.
fn pentagonal_pairs(n: usize) -> impl Iterator<Item = (usize, usize, bool)> {
    (1usize..)
        .map(|k| (k * (3 * k - 1) / 2, k * (3 * k + 1) / 2, k % 2 == 1))
        .take_while(move |&(g1, _, _)| g1 <= n)
}

/// Partition numbers `p(0..=n_max)` by the pentagonal recurrence.
pub fn partition_numbers(n_max: usize) -> Vec<BigInt> {
    let mut p = vec![BigInt::zero(); n_max + 1];
    p[0] = BigInt::one();
    for n in 1..=n_max {
        let mut value = BigInt::zero();
        for (g1, g2, odd) in pentagonal_pairs(n) {
            let mut term = p[n - g1].clone();
            if g2 <= n {
                term += &p[n - g2];
            }
            if odd {
                value += term;
            } else {
                value -= term;
            }
        }
        p[n] = value;
    }
    p
}

/// Partitions into odd parts `q(0..=n_max)` (equivalently, into distinct
/// parts), from `(sum q(n) u^n) E(u) = E(u^2)` with `E` the pentagonal
/// series.
pub fn odd_partition_numbers(n_max: usize) -> Vec<BigInt> {
    // e2[n] = [u^n] E(u^2): +-1 at the doubled pentagonal numbers.
    let mut e2 = vec![0i8; n_max + 1];
    e2[0] = 1;
    for (g1, g2, odd) in pentagonal_pairs(n_max) {
        let sign = if odd { -1 } else { 1 };
        if 2 * g1 <= n_max {
            e2[2 * g1] += sign;
        }
        if 2 * g2 <= n_max {
            e2[2 * g2] += sign;
        }
    }
    let mut q = vec![BigInt::zero(); n_max + 1];
    q[0] = BigInt::one();
    for n in 1..=n_max {
        let mut value = BigInt::from(e2[n]);
        for (g1, g2, odd) in pentagonal_pairs(n) {
            let mut term = q[n - g1].clone();
            if g2 <= n {
                term += &q[n - g2];
            }
            if odd {
                value += term;
            } else {
                value -= term;
            }
        }
        q[n] = value;
    }
    q
}

/// Coefficients of `b = f^2`, the doubly smoothed local series, by the
/// sparse recurrence `b E = f` instead of an O(n^2) convolution.
pub fn b_table(n_max: usize) -> Vec<BigInt> {
    let p = partition_numbers(n_max);
    let mut b = vec![BigInt::zero(); n_max + 1];
    b[0] = BigInt::one();
    for n in 1..=n_max {
        let mut value = p[n].clone();
        for (g1, g2, odd) in pentagonal_pairs(n) {
            let mut term = b[n - g1].clone();
            if g2 <= n {
                term += &b[n - g2];
            }
            if odd {
                value += term;
            } else {
                value -= term;
            }
        }
        b[n] = value;
    }
    b
}

/// Partial sums of the CM local series: `B_i = b_i - b_{i-2}`.
pub fn local_partial_sums(b: &[BigInt], i: usize) -> BigInt {
    if i >= 2 {
        &b[i] - &b[i - 2]
    } else {
        b[i].clone()
    }
}

fn prefix_sums_stride(values: &mut [BigInt], stride: usize) {
    for i in stride..values.len() {
        let prev = values[i - stride].clone();
        values[i] += prev;
    }
}

/// `a~ = (1-t)^(-r') f` as an integer table.
pub fn a_tilde_table(r_prime: u32, n_max: usize) -> Vec<BigInt> {
    let mut a = partition_numbers(n_max);
    for _ in 0..r_prime {
        prefix_sums_stride(&mut a, 1);
    }
    a
}

/// `a = (1-t)^(-r) (1-t^2)^(-s) f` as an integer table.
pub fn a_table(r: u32, s: u32, n_max: usize) -> Vec<BigInt> {
    let mut a = partition_numbers(n_max);
    for _ in 0..r {
        prefix_sums_stride(&mut a, 1);
    }
    for _ in 0..s {
        prefix_sums_stride(&mut a, 2);
    }
    a
}

/// CM local Hilbert series
/// `(1-t)^(-1) (1-t^2)^(-1) prod_{k>=3} (1-t^k)^(-2)`.
pub fn cm_local_series(order: usize) -> QSeries {
    expand_product_form(order, |k| match k {
        1 | 2 => BigInt::one(),
        _ => BigInt::from(2),
    })
}

/// CM global Hilbert series
/// `(1-t)^(-r) (1-t^2)^(-s) prod_{k>=3} (1-t^k)^(-1)`.
pub fn cm_global_series(r: u32, s: u32, order: usize) -> QSeries {
    expand_product_form(order, move |k| match k {
        1 => BigInt::from(r),
        2 => BigInt::from(s),
        _ => BigInt::one(),
    })
}

/// Polylogarithmic local series
/// `(1-t^2)^(-2) prod_{k>=4 even} (1-t^k)^(-1)`.
pub fn polylog_local_series(order: usize) -> QSeries {
    expand_product_form(order, |k| match k {
        2 => BigInt::from(2),
        _ if k % 2 == 0 => BigInt::one(),
        _ => BigInt::zero(),
    })
}

/// Majorant of the polylogarithmic global series:
/// `(1-t^2)^(-s) prod_{k>=6, k = 2 mod 4} (1-t^k)^(-1)`.
pub fn polylog_majorant_series(s: u32, order: usize) -> QSeries {
    expand_product_form(order, move |k| {
        if k == 2 {
            BigInt::from(s)
        } else if k >= 6 && k % 4 == 2 {
            BigInt::one()
        } else {
            BigInt::zero()
        }
    })
}

fn crossing_search(
    global: impl Fn(usize) -> Vec<BigInt>,
    local: impl Fn(usize) -> Vec<BigInt>,
    order_budget: usize,
) -> Result<usize, CmError> {
    if order_budget == 0 {
        return Err(CmError::BudgetExceeded { budget: 0 });
    }
    let mut order = order_budget.min(256);
    loop {
        let g = global(order);
        let l = local(order);
        for m in 0..=order {
            if g[m] < l[m] {
                return Ok(m);
            }
        }
        if order >= order_budget {
            return Err(CmError::BudgetExceeded {
                budget: order_budget,
            });
        }
        order = (order * 2).min(order_budget);
    }
}

/// Least `m` with `a~_m < b_m`, the crossing weight used by the bound.
pub fn cm_find_minimal_m(r: u32, s: u32, order_budget: usize) -> Result<usize, CmError> {
    let r_prime = r + s;
    if r_prime < 2 {
        return Err(CmError::InvalidParams(
            "the crossing argument needs r' = r + s >= 2".into(),
        ));
    }
    crossing_search(|n| a_tilde_table(r_prime, n), |n| b_table(n), order_budget)
}

/// Least `m` with `a_m < b_m`; never later than the relaxed crossing.
pub fn cm_find_minimal_m_exact(r: u32, s: u32, order_budget: usize) -> Result<usize, CmError> {
    if r + s < 2 {
        return Err(CmError::InvalidParams(
            "the crossing argument needs r' = r + s >= 2".into(),
        ));
    }
    crossing_search(|n| a_table(r, s, n), |n| b_table(n), order_budget)
}

/// Least `m` where the polylogarithmic majorant's smoothed table drops
/// below the local one. Indices are in the t-power grading, so entries sit
/// at even positions before the final smoothing.
pub fn polylog_find_minimal_m(s: u32, order_budget: usize) -> Result<usize, CmError> {
    if s < 1 {
        return Err(CmError::InvalidParams(
            "the polylogarithmic quotient needs s >= 1".into(),
        ));
    }
    let local = |n: usize| {
        let p = partition_numbers(n / 2);
        let mut v = vec![BigInt::zero(); n + 1];
        for (k, value) in p.iter().enumerate() {
            v[2 * k] = value.clone();
        }
        prefix_sums_stride(&mut v, 2);
        prefix_sums_stride(&mut v, 1);
        v
    };
    let global = |n: usize| {
        let q = odd_partition_numbers(n / 2);
        let mut w = vec![BigInt::zero(); n + 1];
        for (k, value) in q.iter().enumerate() {
            w[2 * k] = value.clone();
        }
        for _ in 1..s {
            prefix_sums_stride(&mut w, 2);
        }
        prefix_sums_stride(&mut w, 1);
        w
    };
    crossing_search(global, local, order_budget)
}

/// Sandwich constants for `p(n)` against `e^(pi sqrt(2n/3)) / n` on a
/// checked range: `c0` is certified to work from below and `c1` from
/// above, for all `1 <= n <= n_max`.
#[derive(Clone, Debug)]
pub struct PartitionSandwich {
    pub n_max: usize,
    pub c0: BigRational,
    pub c0_at: usize,
    pub c1: BigRational,
    pub c1_at: usize,
}

fn hardy_ramanujan_exp(n: usize, scale: usize, digits: u32) -> RatInterval {
    // e^(pi sqrt(scale * n / 3)).
    let arg = interval::sqrt(
        &interval::pi(digits)
            .mul(&interval::pi(digits))
            .mul(&RatInterval::point(BigRational::new(
                BigInt::from(scale * n),
                BigInt::from(3),
            ))),
        digits,
    );
    interval::exp(&arg, digits)
}

/// Fits the sandwich over `1..=n_max` by taking the extreme certified
/// ratios `p(n) n / e^(pi sqrt(2n/3))`.
pub fn fit_partition_constants(p: &[BigInt], n_max: usize, digits: u32) -> PartitionSandwich {
    assert!(n_max >= 1 && p.len() > n_max);
    let mut c0: Option<(BigRational, usize)> = None;
    let mut c1: Option<(BigRational, usize)> = None;
    for n in 1..=n_max {
        let e = hardy_ramanujan_exp(n, 2, digits);
        let scaled = BigRational::from_integer(&p[n] * BigInt::from(n));
        let lo = &scaled / e.hi();
        let hi = &scaled / e.lo();
        if c0.as_ref().map_or(true, |(v, _)| lo < *v) {
            c0 = Some((lo, n));
        }
        if c1.as_ref().map_or(true, |(v, _)| hi > *v) {
            c1 = Some((hi, n));
        }
    }
    let (c0, c0_at) = c0.unwrap();
    let (c1, c1_at) = c1.unwrap();
    PartitionSandwich {
        n_max,
        c0,
        c0_at,
        c1,
        c1_at,
    }
}

/// Lower constant for `b_n` against `e^(pi sqrt(4n/3)) / n^2` on a checked
/// range.
#[derive(Clone, Debug)]
pub struct BLowerFit {
    pub n_max: usize,
    pub c2: BigRational,
    pub c2_at: usize,
}

pub fn fit_b_constant(b: &[BigInt], n_max: usize, digits: u32) -> BLowerFit {
    assert!(n_max >= 1 && b.len() > n_max);
    let mut best: Option<(BigRational, usize)> = None;
    for n in 1..=n_max {
        let e = hardy_ramanujan_exp(n, 4, digits);
        let scaled = BigRational::from_integer(&b[n] * BigInt::from(n * n));
        let lo = &scaled / e.hi();
        if best.as_ref().map_or(true, |(v, _)| lo < *v) {
            best = Some((lo, n));
        }
    }
    let (c2, c2_at) = best.unwrap();
    BLowerFit { n_max, c2, c2_at }
}

/// First `n <= n_max` violating `a~_n <= (n+1)^(r') p(n)`, if any.
pub fn first_global_asymptotic_violation(r_prime: u32, n_max: usize) -> Option<usize> {
    let a = a_tilde_table(r_prime, n_max);
    let p = partition_numbers(n_max);
    (0..=n_max).find(|&n| {
        let cap = BigInt::from(n as u64 + 1).pow(r_prime) * &p[n];
        a[n] > cap
    })
}

/// First `n <= n_max` violating the pairing lower bound
/// `b_n >= p(n/2)^2` (even) or `b_n >= 2 p((n-1)/2) p((n+1)/2)` (odd).
pub fn first_local_pairing_violation(n_max: usize) -> Option<usize> {
    let b = b_table(n_max);
    let p = partition_numbers(n_max / 2 + 1);
    (0..=n_max).find(|&n| {
        let floor = if n % 2 == 0 {
            &p[n / 2] * &p[n / 2]
        } else {
            BigInt::from(2) * &p[n / 2] * &p[n / 2 + 1]
        };
        b[n] < floor
    })
}

/// Certified check that `b_n >= c2 e^(pi sqrt(4n/3)) / n^2` on `1..=n_max`.
pub fn verify_b_exponential_lower(
    b: &[BigInt],
    c2: &BigRational,
    n_max: usize,
    digits: u32,
) -> Option<usize> {
    (1..=n_max).find(|&n| {
        let e = hardy_ramanujan_exp(n, 4, digits);
        BigRational::from_integer(&b[n] * BigInt::from(n * n)) < c2 * e.hi()
    })
}

/// Check of `sum_{i<=m} sqrt(i) <= (2/3) m^(3/2) + (1/2) m^(1/2)` for every
/// `m <= m_max`, with the sum accumulated as an interval.
#[derive(Clone, Debug, Serialize)]
pub struct SqrtSumReport {
    pub m_max: usize,
    pub holds: bool,
    pub first_failure: Option<usize>,
}

pub fn verify_sqrt_sum_bound(m_max: usize, digits: u32) -> SqrtSumReport {
    let mut sum = RatInterval::point(BigRational::zero());
    let mut first_failure = None;
    for m in 1..=m_max {
        let root = interval::sqrt_rational(&BigRational::from_integer(BigInt::from(m)), digits);
        sum = sum.add(&root);
        // (2/3) m + 1/2, times sqrt(m).
        let coefficient = BigRational::new(BigInt::from(4 * m as u64 + 3), BigInt::from(6));
        let rhs = root.mul(&RatInterval::point(coefficient));
        if sum.hi() > rhs.lo() {
            first_failure = Some(m);
            break;
        }
    }
    SqrtSumReport {
        m_max,
        holds: first_failure.is_none(),
        first_failure,
    }
}

/// Certificate that the asymptotic global and local bounds cross:
/// `gamma(u) = tau u - 2(r'+1) ln u + (ln C2 - ln C1 - r' ln 2)` with
/// `tau = (sqrt(2)-1) pi sqrt(2/3)`, evaluated at `u = sqrt(n)`, is
/// eventually positive, so `b_n > a~_n` from `n = crossing_n` on (within
/// the constants' certified range).
#[derive(Clone, Debug, Serialize)]
pub struct GammaCrossingReport {
    pub r_prime: u32,
    pub tau_decimal: String,
    pub stationary_u: String,
    /// `d gamma/du >= tau - (r'+1)/(2r') > 3/50` for `u >= 4 r'`,
    /// certified.
    pub derivative_positive_beyond_4r: bool,
    pub crossing_u: u64,
    pub crossing_n: u64,
}

pub fn cm_gamma_crossing(
    r_prime: u32,
    c1: Option<&BigRational>,
    c2: Option<&BigRational>,
    digits: u32,
) -> Result<GammaCrossingReport, CmError> {
    if r_prime < 2 {
        return Err(CmError::InvalidParams(
            "the crossing argument needs r' >= 2".into(),
        ));
    }
    let (c1, c2) = match (c1, c2) {
        (Some(c1), Some(c2)) => (c1, c2),
        _ => return Err(CmError::MissingConstants),
    };
    if !c1.is_positive() || !c2.is_positive() {
        return Err(CmError::InvalidParams(
            "fitted constants must be positive".into(),
        ));
    }
    let two = BigRational::from_integer(BigInt::from(2));
    let sqrt2 = interval::sqrt_rational(&two, digits);
    let tau = sqrt2
        .sub(&RatInterval::point(BigRational::one()))
        .mul(&interval::pi(digits))
        .mul(&interval::sqrt_rational(
            &BigRational::new(BigInt::from(2), BigInt::from(3)),
            digits,
        ));

    let slope = BigRational::new(BigInt::from(r_prime + 1), BigInt::from(2 * r_prime));
    let derivative_positive_beyond_4r =
        tau.lo() - &slope > BigRational::new(BigInt::from(3), BigInt::from(50));

    let ln2 = interval::ln_rational(&two, digits);
    let constant = interval::ln_rational(c2, digits)
        .sub(&interval::ln_rational(c1, digits))
        .sub(&ln2.mul(&RatInterval::from_int(i64::from(r_prime))));

    let factor = RatInterval::from_int(2 * i64::from(r_prime) + 2);
    let stationary = factor.div(&tau);
    let mut u = stationary
        .hi()
        .ceil()
        .to_integer()
        .to_u64()
        .ok_or_else(|| CmError::InvalidParams("stationary point overflows".into()))?
        .max(1);
    let crossing_u = loop {
        let u_rat = BigRational::from_integer(BigInt::from(u));
        let gamma = tau
            .mul(&RatInterval::point(u_rat.clone()))
            .sub(&interval::ln_rational(&u_rat, digits).mul(&factor))
            .add(&constant);
        if gamma.lo().is_positive() {
            break u;
        }
        u += 1;
        if u > 10_000_000 {
            return Err(CmError::InvalidParams(
                "no certified gamma crossing below u = 10^7".into(),
            ));
        }
    };
    Ok(GammaCrossingReport {
        r_prime,
        tau_decimal: interval::decimal_upper(tau.hi(), 6),
        stationary_u: interval::decimal_upper(stationary.hi(), 3),
        derivative_positive_beyond_4r,
        crossing_u,
        crossing_n: crossing_u * crossing_u,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CmBoundMode {
    ExactCoefficient,
    Asymptotic,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CmBoundReport {
    pub m0: u64,
    pub r_prime: u32,
    pub kappa: KappaReport,
    /// `#E(F_p) - 1`.
    pub point_factor: u64,
    /// `5^t` over the bad primes of S.
    pub five_power: String,
    pub mode: CmBoundMode,
    pub bound: String,
    pub bound_digits: u64,
    pub bound_log10: String,
    pub unconditional: bool,
    pub conjectural: bool,
}

fn kappa_for(p: u64, digits: u32) -> Result<bounds::KappaP, CmError> {
    bounds::kappa_p(p, digits).map_err(|e| match e {
        bounds::BoundsError::NotPrime { p } => CmError::NotPrime { p },
        other => CmError::InvalidParams(other.to_string()),
    })
}

/// Assembles the CM bound
/// `kappa_p (#E(F_p)-1) 5^t * 4^(m0) * prod_{i=1..m0} B_i`, with the exact
/// partial sums `B_i` replaced in asymptotic mode by their closed-form
/// majorant `(2 C1^2)^(m0) (1/m0!) e^(2 pi sqrt(2/3) sum sqrt(i))`.
pub fn cm_bound(
    d: &CMData,
    mode: CmBoundMode,
    order_budget: usize,
    digits: u32,
) -> Result<CmBoundReport, CmError> {
    d.validate()?;
    let r_prime = d.r_prime()?;
    let m0 = crossing_search(|n| a_tilde_table(r_prime, n), |n| b_table(n), order_budget)?;

    let kappa = kappa_for(d.p, digits)?;
    let five_power = BigInt::from(5).pow(u64::from(d.t_bad));
    let prefactor = BigInt::from(d.points_mod_p - 1) * &five_power;
    let four_power = BigInt::one() << (2 * m0);

    let enclosure = match mode {
        CmBoundMode::ExactCoefficient => {
            let b = b_table(m0);
            let partials: Vec<BigInt> = (1..=m0).map(|i| local_partial_sums(&b, i)).collect();
            let product = product_tree(&partials);
            kappa
                .enclosure
                .mul(&RatInterval::point(BigRational::from_integer(
                    &prefactor * &four_power * product,
                )))
        }
        CmBoundMode::Asymptotic => {
            let c1 = d.c1_rational()?;
            let doubled = &c1 * &c1 * BigRational::from_integer(BigInt::from(2));
            let per_index = RatInterval::point(doubled).powu(m0 as u64);
            let factorial = BigRational::from_integer(numth::factorial(m0));
            let mut sqrt_sum = RatInterval::point(BigRational::zero());
            for i in 1..=m0 {
                sqrt_sum = sqrt_sum.add(&interval::sqrt_rational(
                    &BigRational::from_integer(BigInt::from(i)),
                    digits,
                ));
            }
            let arg = interval::pi(digits)
                .mul(&interval::sqrt_rational(
                    &BigRational::new(BigInt::from(2), BigInt::from(3)),
                    digits,
                ))
                .mul(&RatInterval::from_int(2))
                .mul(&sqrt_sum);
            let exponential = interval::exp(&arg, digits);
            kappa
                .enclosure
                .mul(&RatInterval::point(BigRational::from_integer(
                    &prefactor * &four_power,
                )))
                .mul(&per_index)
                .mul(&exponential)
                .div(&RatInterval::point(factorial))
        }
    };

    let bound = enclosure.hi().ceil().to_integer();
    let bound_string = bound.to_string();
    let log10 = if bound.is_positive() {
        interval::decimal_upper(interval::log10_bigint(&bound, digits.max(8)).hi(), 6)
    } else {
        "0".to_string()
    };
    Ok(CmBoundReport {
        m0: m0 as u64,
        r_prime,
        kappa: KappaReport {
            p: kappa.p,
            rational_part: kappa.rational_part.to_string(),
            log_coefficient: kappa.log_coefficient.to_string(),
            decimal_upper: kappa.decimal_upper(6),
        },
        point_factor: d.points_mod_p - 1,
        five_power: five_power.to_string(),
        mode,
        bound_digits: bound_string.trim_start_matches('-').len() as u64,
        bound: bound_string,
        bound_log10: log10,
        unconditional: d.unconditional,
        conjectural: !d.unconditional,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::extract_exponents;

    /// Partition counts by the bounded-parts dynamic program, independent
    /// of the pentagonal recurrence.
    fn partitions_by_enumeration(n_max: usize, allowed: impl Fn(usize) -> bool) -> Vec<BigInt> {
        let mut dp = vec![BigInt::zero(); n_max + 1];
        dp[0] = BigInt::one();
        for part in 1..=n_max {
            if !allowed(part) {
                continue;
            }
            for n in part..=n_max {
                let prev = dp[n - part].clone();
                dp[n] += prev;
            }
        }
        dp
    }

    fn distinct_partitions_by_enumeration(n_max: usize) -> Vec<BigInt> {
        let mut dp = vec![BigInt::zero(); n_max + 1];
        dp[0] = BigInt::one();
        for part in 1..=n_max {
            for n in (part..=n_max).rev() {
                let prev = dp[n - part].clone();
                dp[n] += prev;
            }
        }
        dp
    }

    #[test]
    fn partition_numbers_match_enumeration() {
        let p = partition_numbers(40);
        let oracle = partitions_by_enumeration(40, |_| true);
        assert_eq!(p, oracle);
        assert_eq!(p[10], BigInt::from(42));
        assert_eq!(p[20], BigInt::from(627));
    }

    #[test]
    fn odd_partitions_match_both_descriptions() {
        let q = odd_partition_numbers(40);
        let odd = partitions_by_enumeration(40, |part| part % 2 == 1);
        let distinct = distinct_partitions_by_enumeration(40);
        assert_eq!(q, odd);
        assert_eq!(q, distinct);
        let hand: Vec<BigInt> = [1, 1, 1, 2, 2, 3, 4]
            .iter()
            .map(|&v| BigInt::from(v))
            .collect();
        assert_eq!(&q[..7], &hand[..]);
    }

    #[test]
    fn b_recurrence_matches_convolution() {
        let b = b_table(128);
        let p = partition_numbers(128);
        for n in 0..=128 {
            let convolution: BigInt = (0..=n).map(|k| &p[k] * &p[n - k]).sum();
            assert_eq!(b[n], convolution, "b_{n}");
        }
    }

    #[test]
    fn cm_local_series_matches_b_differences() {
        let order = 64;
        let series = cm_local_series(order);
        let b = b_table(order + 3);
        for n in 0..=order {
            // local = b (1-t)(1-t^2) = b_n - b_{n-1} - b_{n-2} + b_{n-3}.
            let mut expected = b[n].clone();
            if n >= 1 {
                expected -= &b[n - 1];
            }
            if n >= 2 {
                expected -= &b[n - 2];
            }
            if n >= 3 {
                expected += &b[n - 3];
            }
            assert_eq!(series[n], BigRational::from_integer(expected), "at {n}");
        }
    }

    #[test]
    fn cm_series_have_expected_product_exponents() {
        let local = extract_exponents(&cm_local_series(64)).unwrap();
        for k in 1..=64 {
            let expected = if k <= 2 { 1 } else { 2 };
            assert_eq!(*local.get(k), BigInt::from(expected), "local exponent {k}");
        }
        let global = extract_exponents(&cm_global_series(3, 2, 64)).unwrap();
        for k in 1..=64 {
            let expected = match k {
                1 => 3,
                2 => 2,
                _ => 1,
            };
            assert_eq!(
                *global.get(k),
                BigInt::from(expected),
                "global exponent {k}"
            );
        }
    }

    #[test]
    fn smoothed_tables_match_series_definitions() {
        let order = 48;
        // a = (1/(1-t))(1/(1-t^2)) times the global series.
        let series = cm_global_series(2, 1, order)
            .mul_inv_one_minus_tk(1)
            .mul_inv_one_minus_tk(2);
        let table = a_table(2, 1, order);
        for n in 0..=order {
            assert_eq!(
                series[n],
                BigRational::from_integer(table[n].clone()),
                "at {n}"
            );
        }
    }

    #[test]
    fn relaxed_table_dominates_exact_table() {
        for (r, s) in [(2u32, 0u32), (1, 1), (0, 2), (2, 3)] {
            let a = a_table(r, s, 64);
            let tilde = a_tilde_table(r + s, 64);
            for n in 0..=64 {
                assert!(a[n] <= tilde[n], "r={r} s={s} n={n}");
            }
        }
    }

    #[test]
    fn crossing_values_for_small_rank() {
        assert_eq!(cm_find_minimal_m(1, 1, 256).unwrap(), 9);
        assert_eq!(cm_find_minimal_m(2, 0, 256).unwrap(), 9);
        assert_eq!(cm_find_minimal_m_exact(1, 1, 256).unwrap(), 3);
        assert!(matches!(
            cm_find_minimal_m(1, 0, 256),
            Err(CmError::InvalidParams(_))
        ));
    }

    #[test]
    fn exact_crossing_never_later_than_relaxed() {
        for (r, s) in [(2u32, 0u32), (1, 1), (0, 3), (2, 2)] {
            let relaxed = cm_find_minimal_m(r, s, 4096).unwrap();
            let exact = cm_find_minimal_m_exact(r, s, 4096).unwrap();
            assert!(exact <= relaxed, "r={r} s={s}: {exact} > {relaxed}");
        }
    }

    #[test]
    fn crossing_budget_gate() {
        match cm_find_minimal_m(4, 4, 8) {
            Err(CmError::BudgetExceeded { budget: 8 }) => {}
            other => panic!("expected BudgetExceeded, got {other:?}"),
        }
    }

    #[test]
    fn partition_sandwich_brackets_table() {
        let p = partition_numbers(128);
        let fit = fit_partition_constants(&p, 128, 12);
        assert!(fit.c0 > BigRational::zero());
        assert!(fit.c0 <= fit.c1);
        // The ratio is smallest at n = 1 and drifts upward overall.
        assert_eq!(fit.c0_at, 1);
        assert!(fit.c1_at > 1);
        // Certified re-check of the lower half of the sandwich.
        for n in 1..=128usize {
            let e = hardy_ramanujan_exp(n, 2, 12);
            assert!(
                BigRational::from_integer(&p[n] * BigInt::from(n)) >= &fit.c0 * e.lo(),
                "lower sandwich fails at {n}"
            );
        }
    }

    #[test]
    fn b_lower_constant_certifies() {
        let b = b_table(128);
        let fit = fit_b_constant(&b, 128, 12);
        assert!(fit.c2 > BigRational::zero());
        assert_eq!(verify_b_exponential_lower(&b, &fit.c2, 128, 12), None);
        // A slightly larger constant must fail somewhere.
        let too_big = &fit.c2 * BigRational::new(BigInt::from(11), BigInt::from(10));
        assert!(verify_b_exponential_lower(&b, &too_big, 128, 12).is_some());
    }

    #[test]
    fn asymptotic_inequalities_hold_exactly() {
        for r_prime in 2..=6 {
            assert_eq!(first_global_asymptotic_violation(r_prime, 256), None);
        }
        assert_eq!(first_local_pairing_violation(128), None);
    }

    #[test]
    fn sqrt_sum_bound_holds() {
        let report = verify_sqrt_sum_bound(512, 12);
        assert!(report.holds, "{report:?}");
    }

    #[test]
    fn gamma_crossing_certifies_positivity() {
        let p = partition_numbers(128);
        let b = b_table(128);
        let sandwich = fit_partition_constants(&p, 128, 12);
        let lower = fit_b_constant(&b, 128, 12);
        let report = cm_gamma_crossing(2, Some(&sandwich.c1), Some(&lower.c2), 12).unwrap();
        // tau = (sqrt 2 - 1) pi sqrt(2/3) = 1.0625006...
        let tau: f64 = report.tau_decimal.parse().unwrap();
        assert!(tau > 1.0624 && tau < 1.0626, "tau = {tau}");
        assert!(report.derivative_positive_beyond_4r);
        assert!(report.crossing_u >= 1);
        assert_eq!(report.crossing_n, report.crossing_u * report.crossing_u);

        assert!(matches!(
            cm_gamma_crossing(2, None, Some(&lower.c2), 12),
            Err(CmError::MissingConstants)
        ));
    }

    #[test]
    fn gamma_crossing_grows_with_rank() {
        let p = partition_numbers(64);
        let b = b_table(64);
        let sandwich = fit_partition_constants(&p, 64, 10);
        let lower = fit_b_constant(&b, 64, 10);
        let mut previous = 0;
        for r_prime in 2..=5 {
            let report =
                cm_gamma_crossing(r_prime, Some(&sandwich.c1), Some(&lower.c2), 10).unwrap();
            assert!(report.crossing_u > previous, "r'={r_prime}");
            previous = report.crossing_u;
        }
    }

    fn example_data() -> CMData {
        CMData {
            r: 1,
            s: 1,
            p: 5,
            points_mod_p: 8,
            t_bad: 2,
            unconditional: false,
            r1: None,
            c1: None,
        }
    }

    #[test]
    fn cm_bound_exact_mode_shape() {
        let report = cm_bound(&example_data(), CmBoundMode::ExactCoefficient, 4096, 10).unwrap();
        assert_eq!(report.m0, 9);
        assert_eq!(report.r_prime, 2);
        assert_eq!(report.point_factor, 7);
        assert_eq!(report.five_power, "25");
        assert!(report.conjectural);
        assert!(!report.unconditional);
        assert_eq!(report.bound.len() as u64, report.bound_digits);
        // kappa_5 = 1.828... so the bound sits a bit above
        // 320 * 4^9 * prod B_i.
        let b = b_table(9);
        let partials: Vec<BigInt> = (1..=9).map(|i| local_partial_sums(&b, i)).collect();
        let product: BigInt = partials.iter().product();
        let floor = BigInt::from(7u32 * 25) * (BigInt::one() << 18) * product;
        let bound: BigInt = report.bound.parse().unwrap();
        assert!(bound > floor, "kappa scaling missing");
        assert!(bound < floor * BigInt::from(2), "kappa scaling too large");
    }

    #[test]
    fn cm_bound_asymptotic_dominates_exact() {
        let p = partition_numbers(64);
        let sandwich = fit_partition_constants(&p, 64, 10);
        let mut data = example_data();
        data.c1 = Some(sandwich.c1.to_f64().map(|v| v * 1.0001).unwrap());
        let exact = cm_bound(&data, CmBoundMode::ExactCoefficient, 4096, 10).unwrap();
        let asymptotic = cm_bound(&data, CmBoundMode::Asymptotic, 4096, 10).unwrap();
        let exact_value: BigInt = exact.bound.parse().unwrap();
        let asymptotic_value: BigInt = asymptotic.bound.parse().unwrap();
        assert!(exact_value <= asymptotic_value);
        assert_eq!(exact.m0, asymptotic.m0);
    }

    #[test]
    fn cm_bound_asymptotic_needs_c1() {
        match cm_bound(&example_data(), CmBoundMode::Asymptotic, 4096, 10) {
            Err(CmError::MissingC1) => {}
            other => panic!("expected MissingC1, got {other:?}"),
        }
    }

    #[test]
    fn cm_bound_unconditional_swaps_rank() {
        let mut data = example_data();
        data.unconditional = true;
        assert!(matches!(
            cm_bound(&data, CmBoundMode::ExactCoefficient, 4096, 10),
            Err(CmError::InvalidParams(_))
        ));
        data.r1 = Some(3);
        let report = cm_bound(&data, CmBoundMode::ExactCoefficient, 4096, 10).unwrap();
        assert_eq!(report.r_prime, 4);
        assert!(report.unconditional);
        assert!(!report.conjectural);
    }

    #[test]
    fn cm_bound_validates_input() {
        let mut data = example_data();
        data.p = 6;
        assert!(matches!(
            cm_bound(&data, CmBoundMode::ExactCoefficient, 4096, 10),
            Err(CmError::NotPrime { p: 6 })
        ));
        let mut data = example_data();
        data.p = 2;
        assert!(matches!(
            cm_bound(&data, CmBoundMode::ExactCoefficient, 4096, 10),
            Err(CmError::InvalidParams(_))
        ));
        let mut data = example_data();
        data.r = 0;
        data.s = 1;
        assert!(matches!(
            cm_bound(&data, CmBoundMode::ExactCoefficient, 4096, 10),
            Err(CmError::InvalidParams(_))
        ));
    }

    #[test]
    fn cm_report_json_round_trip() {
        let report = cm_bound(&example_data(), CmBoundMode::ExactCoefficient, 4096, 10).unwrap();
        let js = serde_json::to_string(&report).unwrap();
        assert!(js.contains("\"mode\":\"exact-coefficient\""));
        let back: CmBoundReport = serde_json::from_str(&js).unwrap();
        assert_eq!(back.bound, report.bound);
        assert_eq!(back.m0, 9);
    }

    #[test]
    fn cm_data_json_accepts_optional_fields() {
        let d: CMData =
            serde_json::from_str(r#"{"r":1,"s":1,"p":5,"points_mod_p":8,"t_bad":2}"#).unwrap();
        assert!(!d.unconditional);
        assert_eq!(d.r1, None);
        assert_eq!(d.c1, None);
        let d: CMData = serde_json::from_str(
            r#"{"r":0,"s":2,"p":13,"points_mod_p":19,"t_bad":0,
                "unconditional":true,"r1":2,"C1":0.15}"#,
        )
        .unwrap();
        assert!(d.unconditional);
        assert_eq!(d.r1, Some(2));
        assert_eq!(d.c1, Some(0.15));
        assert!(d.c1_rational().unwrap() > BigRational::zero());
    }

    #[test]
    fn polylog_local_series_interleaves_partitions() {
        let order = 64;
        let series = polylog_local_series(order);
        // (1-t^2)^(-1) sum p(k) t^(2k).
        let p = partition_numbers(order / 2);
        let mut expected = vec![BigRational::zero(); order + 1];
        for (k, value) in p.iter().enumerate() {
            expected[2 * k] = BigRational::from_integer(value.clone());
        }
        for i in 2..=order {
            let prev = expected[i - 2].clone();
            expected[i] += prev;
        }
        for n in 0..=order {
            assert_eq!(series[n], expected[n], "at {n}");
        }
    }

    #[test]
    fn polylog_majorant_encodes_odd_partitions() {
        let order = 64;
        let series = polylog_majorant_series(1, order);
        let q = odd_partition_numbers(order / 2);
        for n in 0..=order {
            let expected = if n % 2 == 0 {
                BigRational::from_integer(q[n / 2].clone())
            } else {
                BigRational::zero()
            };
            assert_eq!(series[n], expected, "at {n}");
        }
    }

    #[test]
    fn polylog_majorant_dominates_global_exponents() {
        // The majorant drops every exponent of the local series except the
        // allowed residues; sanity-check it stays a genuine product form.
        let series = polylog_majorant_series(3, 48);
        let exponents = extract_exponents(&series).unwrap();
        assert_eq!(*exponents.get(2), BigInt::from(3));
        assert_eq!(*exponents.get(6), BigInt::one());
        assert_eq!(*exponents.get(4), BigInt::zero());
        assert_eq!(*exponents.get(10), BigInt::one());
        assert_eq!(*exponents.get(12), BigInt::zero());
    }

    #[test]
    fn polylog_crossing_small_case() {
        assert_eq!(polylog_find_minimal_m(2, 256).unwrap(), 4);
        assert!(matches!(
            polylog_find_minimal_m(0, 256),
            Err(CmError::InvalidParams(_))
        ));
    }

    #[test]
    fn polylog_crossing_monotone_in_s() {
        let mut previous = 0;
        for s in 2..=5 {
            let m = polylog_find_minimal_m(s, 8192).unwrap();
            assert!(m >= previous, "s={s}");
            previous = m;
        }
    }

    #[test]
    fn smoothing_helper_matches_series_smoothing() {
        let series = cm_local_series(32);
        let smoothed = series.mul_inv_one_minus_tk(1);
        let b = b_table(32);
        for i in 0..=32 {
            assert_eq!(
                smoothed[i],
                BigRational::from_integer(local_partial_sums(&b, i)),
                "at {i}"
            );
        }
    }
}
