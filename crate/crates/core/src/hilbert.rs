//! Hilbert series of the local and global Selmer algebras attached to a
//! smooth hyperbolic curve over Q (genus `g`, `n` punctures, `2g + n > 2`),
//! together with the product-form exponent extraction that recovers graded
//! piece dimensions from such a series.
//!
//! The local series has the closed form
//!
//!   HS_loc(t) = (1 - g t) / (1 - 2g t - (n-1) t^2),
//!
//! whose coefficients count dimensions of the weight-graded local Selmer
//! algebra at a prime of good reduction. The series at the real place,
//! `HS_R`, is assembled as the infinite product `prod_j G(t^(2^j))^(1/2^(j+1))`
//! where the ratio
//!
//!   G(t) = (1 - 2g t^2 - (n-1) t^4) / ((1 + (n1-1) t^2)(1 - 2g t - (n-1) t^2))
//!
//! has coefficientwise nonnegative logarithm; factors with `2^j > order`
//! are 1 to the working precision, so the truncated product is exact. The
//! `1 + (n1-1) t^2` factor is forced: dividing the numerator by the full
//! dimension series leaves exactly the conjugation-sign series
//! `1/(1 + (n1-1) t^2)`, and any other sign fails the fixed-dimension count
//! `dim V_2^sigma = g^2 - g + (n - n1)/2` already at weight two. The
//! global series divides the local one by `HS_R` and corrects by Mordell-Weil
//! rank `r`, the number `s` of primes allowed as denominators, the Picard
//! number `rho`, and the count `d_closed` of closed points at infinity; its
//! interpretation as a dimension count is conditional on standard
//! conjectures (finiteness of Sha, Bloch-Kato), which callers surface as a
//! `conjectural` flag on reports.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numth;
use crate::series::{
    equal_up_to, ComparisonReport, IdentityReport, QSeries, RationalFunction, SeriesError,
};

/// Reduction data at one bad prime.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BadPrime {
    /// The prime itself.
    pub ell: u64,
    /// Number of multiplicity-one components of the special fibre of the
    /// regular minimal model (at least 1).
    pub n_ell: u64,
    /// Whether `ell` belongs to the denominator set S.
    #[serde(rename = "in_S")]
    pub in_s: bool,
}

/// Arithmetic invariants of a hyperbolic curve `Y = X - D` over Q.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveData {
    /// Genus of the smooth compactification X.
    pub g: u32,
    /// Number of geometric points removed.
    pub n: u32,
    /// Mordell-Weil rank of the Jacobian of X.
    pub r: u32,
    /// Size of the denominator set S.
    pub s: u32,
    /// Picard number of X (rank of the Neron-Severi group), at least 1.
    pub rho: u32,
    /// Number of closed points of the divisor D at infinity.
    pub d_closed: u32,
    /// Number of real points among the n punctures.
    pub n1: u32,
    /// Auxiliary prime of good reduction, not in S.
    pub p: u64,
    /// Number of F_p-points of Y.
    pub points_mod_p: u64,
    /// Bad-reduction data; primes of good reduction need no entry.
    #[serde(default)]
    pub bad_primes: Vec<BadPrime>,
}

/// A named schema violation in [`CurveData`].
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("invalid curve data: field `{field}`: {constraint}")]
pub struct CurveDataError {
    pub field: &'static str,
    pub constraint: String,
}

impl CurveData {
    fn err(field: &'static str, constraint: impl Into<String>) -> CurveDataError {
        CurveDataError {
            field,
            constraint: constraint.into(),
        }
    }

    /// Checks every schema constraint, reporting the first violation with
    /// the offending field named.
    pub fn validate(&self) -> Result<(), CurveDataError> {
        if 2 * self.g + self.n <= 2 {
            return Err(Self::err(
                "g",
                format!(
                    "curve must be hyperbolic (2g + n > 2), got g={} n={}",
                    self.g, self.n
                ),
            ));
        }
        if self.n1 > self.n {
            return Err(Self::err(
                "n1",
                format!(
                    "real punctures cannot exceed punctures ({} > {})",
                    self.n1, self.n
                ),
            ));
        }
        if (self.n - self.n1) % 2 != 0 {
            return Err(Self::err(
                "n1",
                format!(
                    "non-real punctures pair up, so n - n1 must be even (n={} n1={})",
                    self.n, self.n1
                ),
            ));
        }
        if self.d_closed > self.n {
            return Err(Self::err(
                "d_closed",
                format!(
                    "closed points at infinity cannot exceed punctures ({} > {})",
                    self.d_closed, self.n
                ),
            ));
        }
        if self.n == 0 && (self.d_closed != 0 || self.n1 != 0) {
            return Err(Self::err(
                "d_closed",
                "projective curve (n = 0) must have d_closed = n1 = 0",
            ));
        }
        if self.n > 0 && self.d_closed == 0 {
            return Err(Self::err(
                "d_closed",
                "a nonempty divisor has at least one closed point",
            ));
        }
        if self.rho < 1 {
            return Err(Self::err("rho", "Picard number is at least 1"));
        }
        if !numth::is_prime(self.p) {
            return Err(Self::err("p", format!("{} is not prime", self.p)));
        }
        for bp in &self.bad_primes {
            if !numth::is_prime(bp.ell) {
                return Err(Self::err("bad_primes", format!("{} is not prime", bp.ell)));
            }
            if bp.n_ell == 0 {
                return Err(Self::err(
                    "bad_primes",
                    format!(
                        "prime {} is missing its component count (n_ell >= 1)",
                        bp.ell
                    ),
                ));
            }
            if bp.ell == self.p {
                return Err(Self::err(
                    "p",
                    format!("auxiliary prime {} must have good reduction", self.p),
                ));
            }
        }
        let in_s = self.bad_primes.iter().filter(|bp| bp.in_s).count() as u32;
        if in_s > self.s {
            return Err(Self::err(
                "s",
                format!("{in_s} bad primes are marked in S but s = {}", self.s),
            ));
        }
        Ok(())
    }

    pub fn is_hyperbolic(&self) -> bool {
        2 * self.g + self.n > 2
    }

    /// `t^2`-exponent of the global correction factor:
    /// `rho + d_closed - 1 - s` (may be negative).
    pub fn quadratic_exponent(&self) -> i64 {
        i64::from(self.rho) + i64::from(self.d_closed) - 1 - i64::from(self.s)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HilbertError {
    #[error("curve is not hyperbolic: need 2g + n > 2, got g={g}, n={n}")]
    NotHyperbolic { g: u32, n: u32 },
    #[error("invalid real puncture count n1={n1} for n={n}: need n1 <= n and n - n1 even")]
    InvalidN1 { n1: u32, n: u32 },
    #[error("exponent extraction needs constant term 1")]
    ConstantTermNotOne,
    #[error("exponent e_{index} = {value} is not an integer; input is not a product form")]
    NonIntegerExponent { index: usize, value: String },
    #[error(transparent)]
    Series(#[from] SeriesError),
}

fn check_hyperbolic(g: u32, n: u32) -> Result<(), HilbertError> {
    if 2 * g + n <= 2 {
        return Err(HilbertError::NotHyperbolic { g, n });
    }
    Ok(())
}

fn check_n1(n: u32, n1: u32) -> Result<(), HilbertError> {
    if n1 > n || (n - n1) % 2 != 0 {
        return Err(HilbertError::InvalidN1 { n1, n });
    }
    Ok(())
}

/// Denominator `1 - 2g t - (n-1) t^2` shared by several closed forms.
fn local_denominator(g: u32, n: u32) -> Vec<i64> {
    vec![1, -2 * i64::from(g), -(i64::from(n) - 1)]
}

/// Local Selmer Hilbert series `(1 - g t)/(1 - 2g t - (n-1) t^2)`.
pub fn local_series(c: &CurveData, order: usize) -> Result<QSeries, HilbertError> {
    check_hyperbolic(c.g, c.n)?;
    let rf = RationalFunction::from_ints(&[1, -i64::from(c.g)], &local_denominator(c.g, c.n))?;
    Ok(rf.expand(order))
}

/// The closed form behind [`local_series`], exposed so callers can compose
/// it into other rational functions.
pub fn local_rational_function(c: &CurveData) -> Result<RationalFunction, HilbertError> {
    check_hyperbolic(c.g, c.n)?;
    Ok(RationalFunction::from_ints(
        &[1, -i64::from(c.g)],
        &local_denominator(c.g, c.n),
    )?)
}

/// Ratio `G(t)` appearing in the functional equation of the series at the
/// real place.
pub fn g_series(c: &CurveData, order: usize) -> Result<QSeries, HilbertError> {
    Ok(g_rational_function(c)?.expand(order))
}

fn g_rational_function(c: &CurveData) -> Result<RationalFunction, HilbertError> {
    check_hyperbolic(c.g, c.n)?;
    check_n1(c.n, c.n1)?;
    let g = i64::from(c.g);
    let n = i64::from(c.n);
    let n1 = i64::from(c.n1);
    let numerator = RationalFunction::from_ints(&[1, 0, -2 * g, 0, -(n - 1)], &[1])?;
    let denominator_a = RationalFunction::from_ints(&[1], &[1, 0, n1 - 1])?;
    let denominator_b = RationalFunction::from_ints(&[1], &local_denominator(c.g, c.n))?;
    Ok(numerator.mul(&denominator_a).mul(&denominator_b))
}

/// Re-grades a series known to the needed reduced order along `t -> t^k`,
/// producing the requested (larger) order exactly.
fn inflate(a: &QSeries, k: usize, order: usize) -> QSeries {
    debug_assert!(a.order() >= order / k);
    let mut coeffs = vec![BigRational::zero(); order + 1];
    for i in 0..=order / k {
        coeffs[i * k] = a[i].clone();
    }
    QSeries::from_coeffs(coeffs)
}

/// Product `prod_{j >= j_start} G(t^(2^j))^(1/2^(j+1))` truncated at `order`;
/// factors with `2^j > order` contribute 1.
fn real_place_product(c: &CurveData, order: usize, j_start: u32) -> Result<QSeries, HilbertError> {
    let mut acc = QSeries::one(order);
    let mut j = j_start;
    loop {
        let step = 1usize.checked_shl(j).filter(|&v| v <= order);
        let Some(step) = step else { break };
        let reduced_order = order / step;
        let factor = g_series(c, reduced_order)?
            .rational_power(&BigRational::new(BigInt::one(), BigInt::from(2u64) << j))?;
        acc = acc.mul(&inflate(&factor, step, order));
        j += 1;
    }
    Ok(acc)
}

/// Hilbert series at the real place: generating series of the dimensions of
/// the complex-conjugation fixed subspaces.
pub fn real_fixed_series(c: &CurveData, order: usize) -> Result<QSeries, HilbertError> {
    real_place_product(c, order, 0)
}

/// Global Selmer Hilbert series, reusing a precomputed [`real_fixed_series`]
/// (grid drivers cache that series across `(r, s)` values; it does not
/// depend on them).
pub fn global_series_with_real(
    c: &CurveData,
    real: &QSeries,
    order: usize,
) -> Result<QSeries, HilbertError> {
    check_hyperbolic(c.g, c.n)?;
    let base = local_series(c, order)?.mul(&real.truncate(order.min(real.order())).invert()?);
    Ok(apply_rank_and_s_factors(c, base))
}

/// Global Selmer Hilbert series
/// `(1-t)^(-r) (1-t^2)^(rho + d_closed - 1 - s) HS_loc / HS_R`.
/// Its dimension interpretation is conditional (finiteness of Sha,
/// Bloch-Kato); reports built from it carry a `conjectural` flag.
pub fn global_series(c: &CurveData, order: usize) -> Result<QSeries, HilbertError> {
    let real = real_fixed_series(c, order)?;
    global_series_with_real(c, &real, order)
}

fn apply_rank_and_s_factors(c: &CurveData, mut series: QSeries) -> QSeries {
    for _ in 0..c.r {
        series = series.mul_inv_one_minus_tk(1);
    }
    let e2 = c.quadratic_exponent();
    for _ in 0..e2.unsigned_abs() {
        series = if e2 >= 0 {
            series.mul_one_minus_tk(2)
        } else {
            series.mul_inv_one_minus_tk(2)
        };
    }
    series
}

/// The `(r, s)`-independent core of the closed-form global majorant:
/// `(1 - g t) (1 - 2g t - (n-1) t^2)^(-1/2)
///  ((1 + (n1-1) t^2)/(1 - 2g t^2 - (n-1) t^4))^(1/2)`.
pub fn majorant_core(c: &CurveData, order: usize) -> Result<QSeries, HilbertError> {
    check_hyperbolic(c.g, c.n)?;
    check_n1(c.n, c.n1)?;
    let g = i64::from(c.g);
    let n = i64::from(c.n);
    let n1 = i64::from(c.n1);
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let inv_local_den = RationalFunction::from_ints(&[1], &local_denominator(c.g, c.n))?
        .expand(order)
        .rational_power(&half)?;
    let quartic = RationalFunction::from_ints(&[1, 0, n1 - 1], &[1, 0, -2 * g, 0, -(n - 1)])?
        .expand(order)
        .rational_power(&half)?;
    Ok(QSeries::polynomial(&[1, -g], order)
        .mul(&inv_local_den)
        .mul(&quartic))
}

/// Closed-form coefficientwise upper bound for the global series (no
/// infinite product): the majorant core times the rank and S factors.
pub fn global_bound_series(c: &CurveData, order: usize) -> Result<QSeries, HilbertError> {
    let core = majorant_core(c, order)?;
    Ok(apply_rank_and_s_factors(c, core))
}

/// [`global_bound_series`] reusing a precomputed [`majorant_core`] (grid
/// drivers cache the core across `(r, s)` values; it does not depend on
/// them).
pub fn global_bound_series_with_core(
    c: &CurveData,
    core: &QSeries,
    order: usize,
) -> Result<QSeries, HilbertError> {
    check_hyperbolic(c.g, c.n)?;
    Ok(apply_rank_and_s_factors(
        c,
        core.truncate(order.min(core.order())),
    ))
}

/// Dimension specialization of the motivic series: `1/(1 - 2g t - (n-1) t^2)`.
pub fn motivic_dim_series(c: &CurveData, order: usize) -> Result<QSeries, HilbertError> {
    check_hyperbolic(c.g, c.n)?;
    Ok(RationalFunction::from_ints(&[1], &local_denominator(c.g, c.n))?.expand(order))
}

/// Sign-character specialization of the motivic series:
/// `1/(1 + (n1 - 1) t^2)`.
pub fn sgn_motivic_series(c: &CurveData, order: usize) -> Result<QSeries, HilbertError> {
    check_hyperbolic(c.g, c.n)?;
    check_n1(c.n, c.n1)?;
    Ok(RationalFunction::from_ints(&[1], &[1, 0, i64::from(c.n1) - 1])?.expand(order))
}

/// Exponents `e_k` of a product form `f = prod_k (1 - t^k)^(-e_k)`,
/// recovered for `1 <= k <= order`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExponentVector {
    values: Vec<BigInt>,
}

impl ExponentVector {
    /// Builds the vector from `(k, e_k)` by evaluating `f` at `k = 1..=order`.
    pub fn from_fn(order: usize, f: impl Fn(usize) -> BigInt) -> Self {
        ExponentVector {
            values: (1..=order).map(f).collect(),
        }
    }

    pub fn from_values(values: Vec<BigInt>) -> Self {
        ExponentVector { values }
    }

    /// Largest index `k` with a stored exponent.
    pub fn order(&self) -> usize {
        self.values.len()
    }

    /// Exponent `e_k`, `1 <= k <= order`.
    pub fn get(&self, k: usize) -> &BigInt {
        &self.values[k - 1]
    }

    pub fn values(&self) -> &[BigInt] {
        &self.values
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|e| !e.is_negative())
    }

    /// Expands `prod_k (1 - t^k)^(-e_k)` back into a series of the given
    /// order (exponents beyond the stored range are taken to be 0).
    pub fn reconstruct(&self, order: usize) -> QSeries {
        expand_product_form(order, |k| {
            if k <= self.values.len() {
                self.values[k - 1].clone()
            } else {
                BigInt::zero()
            }
        })
    }
}

/// Expands `prod_{k=1..order} (1 - t^k)^(-e(k))` by accumulating the
/// logarithm `sum_k e(k) sum_j t^(kj)/j` and exponentiating once.
pub fn expand_product_form(order: usize, e: impl Fn(usize) -> BigInt) -> QSeries {
    let mut log_coeffs = vec![BigRational::zero(); order + 1];
    for k in 1..=order {
        let ek = e(k);
        if ek.is_zero() {
            continue;
        }
        let ek = BigRational::from_integer(ek);
        let mut j = 1usize;
        while k * j <= order {
            log_coeffs[k * j] += &ek / BigRational::from_integer(BigInt::from(j));
            j += 1;
        }
    }
    QSeries::from_coeffs(log_coeffs)
        .exp()
        .expect("constant term is 0 by construction")
}

/// Recovers product-form exponents by Moebius inversion:
/// with `L_m = m [t^m] log f` one has `L_m = sum_{d | m} d e_d`, so
/// `n e_n = sum_{d | n} mu(n/d) L_d`. A non-integer `e_n` is reported, not
/// rounded: it certifies the input is not a product form over the integers.
pub fn extract_exponents(f: &QSeries) -> Result<ExponentVector, HilbertError> {
    if !f[0].is_one() {
        return Err(HilbertError::ConstantTermNotOne);
    }
    let order = f.order();
    let log = f.log()?;
    let mobius = numth::mobius_table(order);
    // weighted[n] = sum_{d | n} mu(n/d) L_d, accumulated divisor-first.
    let mut weighted = vec![BigRational::zero(); order + 1];
    for d in 1..=order {
        let l_d = &log[d] * BigRational::from_integer(BigInt::from(d));
        if l_d.is_zero() {
            continue;
        }
        let mut m = d;
        while m <= order {
            let mu = mobius[m / d];
            if mu != 0 {
                weighted[m] += &l_d * BigRational::from_integer(BigInt::from(mu));
            }
            m += d;
        }
    }
    let mut values = Vec::with_capacity(order);
    for n in 1..=order {
        let e_n = &weighted[n] / BigRational::from_integer(BigInt::from(n));
        if !e_n.denom().is_one() {
            return Err(HilbertError::NonIntegerExponent {
                index: n,
                value: e_n.to_string(),
            });
        }
        values.push(e_n.to_integer());
    }
    Ok(ExponentVector { values })
}

/// Functional equation check: `HS_R(t)^2 = G(t) HS_R(t^2)` up to `order`.
pub fn verify_functional_equation(
    c: &CurveData,
    order: usize,
) -> Result<IdentityReport, HilbertError> {
    let real = real_fixed_series(c, order)?;
    let lhs = real.mul(&real);
    let rhs = g_series(c, order)?.mul(&real.substitute_power(2));
    Ok(equal_up_to(&lhs, &rhs, order)?)
}

/// Per-factor diagnostics for the infinite-product expansion of `HS_R`.
#[derive(Clone, Debug, Serialize)]
pub struct ProductFactorsReport {
    /// One entry per factor `G(t^(2^j))^(1/2^(j+1))` with `2^j <= order`.
    pub factors: Vec<ProductFactorCheck>,
    /// Whether `log G` is coefficientwise nonnegative (this is what makes
    /// every factor, hence the whole product, coefficientwise nonnegative).
    pub log_g_nonnegative: bool,
    pub log_g_first_negative: Option<usize>,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProductFactorCheck {
    pub j: u32,
    pub constant_term_one: bool,
    pub nonnegative: bool,
    pub first_negative: Option<usize>,
}

/// Checks that every truncated factor of the `HS_R` product has constant
/// term 1 and nonnegative coefficients, and that `log G >= 0`
/// coefficientwise.
pub fn verify_product_factors(
    c: &CurveData,
    order: usize,
) -> Result<ProductFactorsReport, HilbertError> {
    let log_g = g_series(c, order)?.log()?;
    let log_g_first_negative = log_g.first_negative_index();

    let mut factors = Vec::new();
    let mut j = 0u32;
    loop {
        let step = 1usize.checked_shl(j).filter(|&v| v <= order);
        let Some(step) = step else { break };
        let reduced_order = order / step;
        let factor = g_series(c, reduced_order)?
            .rational_power(&BigRational::new(BigInt::one(), BigInt::from(2u64) << j))?;
        let inflated = inflate(&factor, step, order);
        factors.push(ProductFactorCheck {
            j,
            constant_term_one: inflated[0].is_one(),
            nonnegative: inflated.is_nonnegative(),
            first_negative: inflated.first_negative_index(),
        });
        j += 1;
    }
    let holds = log_g_first_negative.is_none()
        && factors.iter().all(|f| f.constant_term_one && f.nonnegative);
    Ok(ProductFactorsReport {
        factors,
        log_g_nonnegative: log_g_first_negative.is_none(),
        log_g_first_negative,
        holds,
    })
}

/// Checks the closed-form majorant dominates the global series
/// coefficientwise, and the identity behind it:
/// `majorant / HS_glob = prod_{j >= 1} G(t^(2^j))^(1/2^(j+1))`.
#[derive(Clone, Debug, Serialize)]
pub struct MajorantReport {
    pub comparison: ComparisonReport,
    pub ratio_identity: IdentityReport,
    pub holds: bool,
}

pub fn verify_global_majorant(c: &CurveData, order: usize) -> Result<MajorantReport, HilbertError> {
    let glob = global_series(c, order)?;
    let bound = global_bound_series(c, order)?;
    let comparison = crate::series::compare_coefficientwise(&glob, &bound, order)?;

    let tail = real_place_product(c, order, 1)?;
    let ratio = bound.mul(&glob.invert()?);
    let ratio_identity = equal_up_to(&ratio, &tail, order)?;

    Ok(MajorantReport {
        holds: comparison.holds && ratio_identity.holds,
        comparison,
        ratio_identity,
    })
}

/// All hyperbolic `(g, n, n1)` shapes with `g <= g_max`, `n <= n_max`, and
/// every `n1` of the right parity.
pub fn default_shapes(g_max: u32, n_max: u32) -> Vec<(u32, u32, u32)> {
    let mut shapes = Vec::new();
    for g in 0..=g_max {
        for n in 0..=n_max {
            if 2 * g + n <= 2 {
                continue;
            }
            for n1 in (n % 2..=n).step_by(2) {
                shapes.push((g, n, n1));
            }
        }
    }
    shapes
}

/// A plain curve for one shape: no rank, no S, and the divisor at infinity
/// treated as a single closed point whenever there is one.
pub fn shape_curve(g: u32, n: u32, n1: u32) -> CurveData {
    CurveData {
        g,
        n,
        r: 0,
        s: 0,
        rho: 1,
        d_closed: if n == 0 { 0 } else { 1 },
        n1,
        p: 5,
        points_mod_p: 1,
        bad_primes: vec![],
    }
}

/// The standard test grid: every shape from [`default_shapes`] crossed
/// with ranks and S-sizes `0..=2`.
pub fn default_grid(g_max: u32, n_max: u32) -> Vec<CurveData> {
    let mut grid = Vec::new();
    for (g, n, n1) in default_shapes(g_max, n_max) {
        for r in 0..=2 {
            for s in 0..=2 {
                let mut c = shape_curve(g, n, n1);
                c.r = r;
                c.s = s;
                grid.push(c);
            }
        }
    }
    grid
}
