//! Truncated formal power series over the exact rationals.
//!
//! A [`QSeries`] of order `N` stores the coefficients of `t^0 .. t^N` densely
//! and represents a series known modulo `t^(N+1)`.
//!
//! Invariants:
//! - `coeffs` has exactly `order + 1` entries;
//! - every coefficient is a rational in lowest terms with positive
//!   denominator (maintained by `BigRational` itself);
//! - binary operations truncate to the minimum order of the two operands;
//!   nothing ever extends precision.
//!
//! Division is deliberately not a separate code path: callers multiply by
//! [`QSeries::invert`]. Rational powers route through [`QSeries::exp`] and
//! [`QSeries::log`], so there is exactly one implementation of each
//! primitive to get right.

use std::fmt;
use std::ops::Index;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeriesError {
    #[error("cannot invert: constant term is zero")]
    ZeroConstantTerm,
    #[error("constant term must be 1 (got a different value)")]
    ConstantTermNotOne,
    #[error("constant term must be 0 (got a nonzero value)")]
    NonzeroConstantTerm,
    #[error("requested index {requested} exceeds available truncation order {available}")]
    OrderTooSmall { requested: usize, available: usize },
    #[error("rational function denominator vanishes at t = 0")]
    ZeroDenominatorConstant,
}

/// Dense truncated power series with `BigRational` coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QSeries {
    coeffs: Vec<BigRational>,
}

impl QSeries {
    /// Builds a series from its coefficients; the order is `coeffs.len() - 1`.
    pub fn from_coeffs(coeffs: Vec<BigRational>) -> Self {
        assert!(
            !coeffs.is_empty(),
            "a series has at least its constant term"
        );
        QSeries { coeffs }
    }

    /// The polynomial with the given integer coefficients, truncated or
    /// zero-padded to the requested order.
    pub fn polynomial(coeffs: &[i64], order: usize) -> Self {
        let mut v: Vec<BigRational> = coeffs
            .iter()
            .take(order + 1)
            .map(|&c| BigRational::from_integer(BigInt::from(c)))
            .collect();
        v.resize(order + 1, BigRational::zero());
        QSeries { coeffs: v }
    }

    pub fn zero(order: usize) -> Self {
        QSeries {
            coeffs: vec![BigRational::zero(); order + 1],
        }
    }

    pub fn one(order: usize) -> Self {
        let mut coeffs = vec![BigRational::zero(); order + 1];
        coeffs[0] = BigRational::one();
        QSeries { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, i: usize) -> &BigRational {
        &self.coeffs[i]
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Drops coefficients beyond `order` (which must not exceed the current
    /// order; truncation never extends precision).
    pub fn truncate(&self, order: usize) -> Self {
        assert!(
            order <= self.order(),
            "truncate cannot extend precision: requested {order}, have {}",
            self.order()
        );
        QSeries {
            coeffs: self.coeffs[..=order].to_vec(),
        }
    }

    pub fn add(&self, other: &QSeries) -> QSeries {
        let order = self.order().min(other.order());
        let coeffs = (0..=order)
            .map(|i| &self.coeffs[i] + &other.coeffs[i])
            .collect();
        QSeries { coeffs }
    }

    pub fn sub(&self, other: &QSeries) -> QSeries {
        let order = self.order().min(other.order());
        let coeffs = (0..=order)
            .map(|i| &self.coeffs[i] - &other.coeffs[i])
            .collect();
        QSeries { coeffs }
    }

    pub fn neg(&self) -> QSeries {
        QSeries {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    pub fn scale(&self, factor: &BigRational) -> QSeries {
        QSeries {
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    pub fn mul(&self, other: &QSeries) -> QSeries {
        let order = self.order().min(other.order());
        let mut out = vec![BigRational::zero(); order + 1];
        for (i, a) in self.coeffs.iter().enumerate().take(order + 1) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(order + 1 - i) {
                if b.is_zero() {
                    continue;
                }
                out[i + j] += a * b;
            }
        }
        QSeries { coeffs: out }
    }

    /// Multiplicative inverse, solved triangularly from the constant term up.
    pub fn invert(&self) -> Result<QSeries, SeriesError> {
        if self.coeffs[0].is_zero() {
            return Err(SeriesError::ZeroConstantTerm);
        }
        let inv0 = self.coeffs[0].recip();
        let mut out = Vec::with_capacity(self.coeffs.len());
        out.push(inv0.clone());
        for k in 1..self.coeffs.len() {
            let mut acc = BigRational::zero();
            for j in 1..=k {
                if self.coeffs[j].is_zero() || out[k - j].is_zero() {
                    continue;
                }
                acc += &self.coeffs[j] * &out[k - j];
            }
            out.push(-(acc * &inv0));
        }
        Ok(QSeries { coeffs: out })
    }

    /// Formal logarithm of a series with constant term 1, via
    /// `(log a)' = a'/a` integrated termwise.
    pub fn log(&self) -> Result<QSeries, SeriesError> {
        if !self.coeffs[0].is_one() {
            return Err(SeriesError::ConstantTermNotOne);
        }
        let n = self.order();
        let inv = self.invert().expect("constant term is 1");
        let mut out = vec![BigRational::zero(); n + 1];
        for k in 1..=n {
            // [t^k] log a = (1/k) [t^(k-1)] (a' * a^-1)
            let mut acc = BigRational::zero();
            for j in 1..=k {
                if self.coeffs[j].is_zero() || inv.coeffs[k - j].is_zero() {
                    continue;
                }
                acc += int_ratio(j) * &self.coeffs[j] * &inv.coeffs[k - j];
            }
            out[k] = acc / int_ratio(k);
        }
        Ok(QSeries { coeffs: out })
    }

    /// Formal exponential of a series with constant term 0, via the
    /// recurrence `k b_k = sum_{j=1..k} j a_j b_{k-j}`.
    pub fn exp(&self) -> Result<QSeries, SeriesError> {
        if !self.coeffs[0].is_zero() {
            return Err(SeriesError::NonzeroConstantTerm);
        }
        let n = self.order();
        let mut out = vec![BigRational::zero(); n + 1];
        out[0] = BigRational::one();
        for k in 1..=n {
            let mut acc = BigRational::zero();
            for j in 1..=k {
                if self.coeffs[j].is_zero() || out[k - j].is_zero() {
                    continue;
                }
                acc += int_ratio(j) * &self.coeffs[j] * &out[k - j];
            }
            out[k] = acc / int_ratio(k);
        }
        Ok(QSeries { coeffs: out })
    }

    /// `a^q` for rational `q`, defined as `exp(q log a)`; needs constant
    /// term 1. For integer `q` this agrees with repeated multiplication or
    /// inversion.
    pub fn rational_power(&self, q: &BigRational) -> Result<QSeries, SeriesError> {
        self.log()?.scale(q).exp()
    }

    /// `a^e` for integer `e`, by repeated squaring; negative exponents invert
    /// first and therefore need a nonzero constant term.
    pub fn pow_integer(&self, e: i64) -> Result<QSeries, SeriesError> {
        let base = if e < 0 { self.invert()? } else { self.clone() };
        let mut exp = e.unsigned_abs();
        let mut acc = QSeries::one(self.order());
        let mut sq = base;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc.mul(&sq);
            }
            exp >>= 1;
            if exp > 0 {
                sq = sq.mul(&sq);
            }
        }
        Ok(acc)
    }

    /// Substitutes `t -> t^k` (`k >= 1`), truncated at the input order. Only
    /// the coefficients up to `order/k` can contribute, so no precision is
    /// invented.
    pub fn substitute_power(&self, k: usize) -> QSeries {
        assert!(k >= 1, "substitution exponent must be at least 1");
        let order = self.order();
        let mut out = vec![BigRational::zero(); order + 1];
        for i in 0..=order / k {
            out[i * k] = self.coeffs[i].clone();
        }
        QSeries { coeffs: out }
    }

    /// Multiplies by `1/(1 - t^k)` in place-order time (cumulative sums with
    /// stride `k`).
    pub fn mul_inv_one_minus_tk(&self, k: usize) -> QSeries {
        assert!(k >= 1);
        let mut out = self.coeffs.clone();
        for i in k..out.len() {
            let prev = out[i - k].clone();
            out[i] += prev;
        }
        QSeries { coeffs: out }
    }

    /// Multiplies by `1 - t^k`.
    pub fn mul_one_minus_tk(&self, k: usize) -> QSeries {
        assert!(k >= 1);
        let mut out = self.coeffs.clone();
        for i in (k..out.len()).rev() {
            let prev = self.coeffs[i - k].clone();
            out[i] -= prev;
        }
        QSeries { coeffs: out }
    }

    /// First index with a negative coefficient, if any.
    pub fn first_negative_index(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| c.is_negative())
    }

    pub fn is_nonnegative(&self) -> bool {
        self.first_negative_index().is_none()
    }

    /// True if every coefficient is an integer.
    pub fn is_integral(&self) -> bool {
        self.coeffs.iter().all(|c| c.denom().is_one())
    }
}

impl Index<usize> for QSeries {
    type Output = BigRational;
    fn index(&self, i: usize) -> &BigRational {
        &self.coeffs[i]
    }
}

impl fmt::Display for QSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut wrote = false;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if wrote {
                write!(f, " + ")?;
            }
            match i {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c})t")?,
                _ => write!(f, "({c})t^{i}")?,
            }
            wrote = true;
        }
        if !wrote {
            write!(f, "0")?;
        }
        write!(f, " + O(t^{})", self.order() + 1)
    }
}

fn int_ratio(n: usize) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Outcome of a coefficientwise `<=` comparison up to a requested index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ComparisonReport {
    pub holds: bool,
    pub first_violation: Option<usize>,
    pub checked_up_to: usize,
}

/// Checks `a_i <= b_i` for `0 <= i <= up_to`.
pub fn compare_coefficientwise(
    a: &QSeries,
    b: &QSeries,
    up_to: usize,
) -> Result<ComparisonReport, SeriesError> {
    let available = a.order().min(b.order());
    if up_to > available {
        return Err(SeriesError::OrderTooSmall {
            requested: up_to,
            available,
        });
    }
    for i in 0..=up_to {
        if a[i] > b[i] {
            return Ok(ComparisonReport {
                holds: false,
                first_violation: Some(i),
                checked_up_to: up_to,
            });
        }
    }
    Ok(ComparisonReport {
        holds: true,
        first_violation: None,
        checked_up_to: up_to,
    })
}

/// Outcome of an exact equality comparison up to a requested index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IdentityReport {
    pub holds: bool,
    pub first_mismatch: Option<usize>,
    pub checked_up_to: usize,
}

/// Checks `a_i == b_i` for `0 <= i <= up_to`.
pub fn equal_up_to(a: &QSeries, b: &QSeries, up_to: usize) -> Result<IdentityReport, SeriesError> {
    let available = a.order().min(b.order());
    if up_to > available {
        return Err(SeriesError::OrderTooSmall {
            requested: up_to,
            available,
        });
    }
    for i in 0..=up_to {
        if a[i] != b[i] {
            return Ok(IdentityReport {
                holds: false,
                first_mismatch: Some(i),
                checked_up_to: up_to,
            });
        }
    }
    Ok(IdentityReport {
        holds: true,
        first_mismatch: None,
        checked_up_to: up_to,
    })
}

/// Quotient of two integer polynomials, with nonvanishing denominator
/// constant term so that the Taylor expansion at 0 exists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalFunction {
    numerator: Vec<BigInt>,
    denominator: Vec<BigInt>,
}

impl RationalFunction {
    pub fn new(numerator: Vec<BigInt>, denominator: Vec<BigInt>) -> Result<Self, SeriesError> {
        if denominator.first().map_or(true, |c| c.is_zero()) {
            return Err(SeriesError::ZeroDenominatorConstant);
        }
        Ok(RationalFunction {
            numerator: trim(numerator),
            denominator: trim(denominator),
        })
    }

    pub fn from_ints(numerator: &[i64], denominator: &[i64]) -> Result<Self, SeriesError> {
        RationalFunction::new(
            numerator.iter().map(|&c| BigInt::from(c)).collect(),
            denominator.iter().map(|&c| BigInt::from(c)).collect(),
        )
    }

    pub fn numerator(&self) -> &[BigInt] {
        &self.numerator
    }

    pub fn denominator(&self) -> &[BigInt] {
        &self.denominator
    }

    pub fn mul(&self, other: &RationalFunction) -> RationalFunction {
        RationalFunction {
            numerator: poly_mul(&self.numerator, &other.numerator),
            denominator: poly_mul(&self.denominator, &other.denominator),
        }
    }

    /// Taylor expansion to the given order. Always succeeds: the constructor
    /// guarantees the denominator is a unit.
    pub fn expand(&self, order: usize) -> QSeries {
        let num = int_poly_series(&self.numerator, order);
        let den = int_poly_series(&self.denominator, order);
        num.mul(&den.invert().expect("denominator constant term is nonzero"))
    }
}

/// Convenience form of [`RationalFunction::expand`].
pub fn expand(rf: &RationalFunction, order: usize) -> QSeries {
    rf.expand(order)
}

fn trim(mut v: Vec<BigInt>) -> Vec<BigInt> {
    while v.len() > 1 && v.last().map_or(false, |c| c.is_zero()) {
        v.pop();
    }
    v
}

fn poly_mul(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if y.is_zero() {
                continue;
            }
            out[i + j] += x * y;
        }
    }
    out
}

fn int_poly_series(p: &[BigInt], order: usize) -> QSeries {
    let mut coeffs: Vec<BigRational> = p
        .iter()
        .take(order + 1)
        .map(|c| BigRational::from_integer(c.clone()))
        .collect();
    coeffs.resize(order + 1, BigRational::zero());
    QSeries::from_coeffs(coeffs)
}

// JSON form: {"order": N, "coeffs": ["p/q", ...]} with exactly order+1
// entries, rationals rendered in lowest terms.
#[derive(Serialize, Deserialize)]
struct QSeriesRepr {
    order: usize,
    coeffs: Vec<String>,
}

impl Serialize for QSeries {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        QSeriesRepr {
            order: self.order(),
            coeffs: self.coeffs.iter().map(|c| c.to_string()).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for QSeries {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = QSeriesRepr::deserialize(deserializer)?;
        if repr.coeffs.len() != repr.order + 1 {
            return Err(D::Error::custom(format!(
                "series of order {} must list {} coefficients, got {}",
                repr.order,
                repr.order + 1,
                repr.coeffs.len()
            )));
        }
        let coeffs = repr
            .coeffs
            .iter()
            .map(|s| {
                BigRational::from_str(s)
                    .map_err(|e| D::Error::custom(format!("bad coefficient {s:?}: {e}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(QSeries::from_coeffs(coeffs))
    }
}
