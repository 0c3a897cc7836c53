//! Certified interval arithmetic over exact rationals.
//!
//! Every function returns an enclosure `[lo, hi]` that provably contains the
//! exact real value: series are truncated with explicit tail bounds, square
//! roots bracket via integer square roots, and endpoints are only ever
//! rounded outward. Composited enclosures therefore stay valid, and any upper
//! bound read off `hi` is a true upper bound.
//!
//! Precision is requested in decimal digits `d`; results satisfy
//! `width <= 10^-d * max(1, |value|)`, i.e. the target is absolute for small
//! values and relative for large ones. Callers that need a hard absolute
//! width (e.g. constants rendered to six decimal places) pass a couple of
//! guard digits.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Closed interval with exact rational endpoints, `lo <= hi`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatInterval {
    lo: BigRational,
    hi: BigRational,
}

impl RatInterval {
    pub fn new(lo: BigRational, hi: BigRational) -> Self {
        assert!(lo <= hi, "interval endpoints out of order");
        RatInterval { lo, hi }
    }

    pub fn point(x: BigRational) -> Self {
        RatInterval {
            lo: x.clone(),
            hi: x,
        }
    }

    pub fn from_int(x: i64) -> Self {
        RatInterval::point(BigRational::from_integer(BigInt::from(x)))
    }

    pub fn lo(&self) -> &BigRational {
        &self.lo
    }

    pub fn hi(&self) -> &BigRational {
        &self.hi
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn is_positive(&self) -> bool {
        self.lo.is_positive()
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn add(&self, other: &RatInterval) -> RatInterval {
        RatInterval {
            lo: &self.lo + &other.lo,
            hi: &self.hi + &other.hi,
        }
    }

    pub fn sub(&self, other: &RatInterval) -> RatInterval {
        RatInterval {
            lo: &self.lo - &other.hi,
            hi: &self.hi - &other.lo,
        }
    }

    pub fn neg(&self) -> RatInterval {
        RatInterval {
            lo: -self.hi.clone(),
            hi: -self.lo.clone(),
        }
    }

    pub fn mul(&self, other: &RatInterval) -> RatInterval {
        let candidates = [
            &self.lo * &other.lo,
            &self.lo * &other.hi,
            &self.hi * &other.lo,
            &self.hi * &other.hi,
        ];
        let lo = candidates.iter().min().unwrap().clone();
        let hi = candidates.iter().max().unwrap().clone();
        RatInterval { lo, hi }
    }

    /// Reciprocal; the interval must not contain 0.
    pub fn recip(&self) -> RatInterval {
        assert!(
            self.lo.is_positive() || self.hi.is_negative(),
            "reciprocal of an interval containing zero"
        );
        RatInterval {
            lo: self.hi.recip(),
            hi: self.lo.recip(),
        }
    }

    pub fn div(&self, other: &RatInterval) -> RatInterval {
        self.mul(&other.recip())
    }

    /// Integer power of a nonnegative interval.
    pub fn powu(&self, e: u64) -> RatInterval {
        assert!(
            !self.lo.is_negative(),
            "powu requires a nonnegative interval"
        );
        let mut acc = RatInterval::point(BigRational::one());
        let mut sq = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&sq);
            }
            e >>= 1;
            if e > 0 {
                sq = sq.mul(&sq);
            }
        }
        acc
    }

    /// Rounds both endpoints outward onto the grid of multiples of
    /// `1/scale`, keeping the enclosure valid while capping the size of the
    /// stored rationals.
    pub fn outward_round(&self, scale: &BigInt) -> RatInterval {
        RatInterval {
            lo: floor_to_scale(&self.lo, scale),
            hi: ceil_to_scale(&self.hi, scale),
        }
    }
}

fn floor_to_scale(x: &BigRational, scale: &BigInt) -> BigRational {
    let scaled = x * BigRational::from_integer(scale.clone());
    BigRational::new(scaled.floor().to_integer(), scale.clone())
}

fn ceil_to_scale(x: &BigRational, scale: &BigInt) -> BigRational {
    let scaled = x * BigRational::from_integer(scale.clone());
    BigRational::new(scaled.ceil().to_integer(), scale.clone())
}

fn pow10(d: u32) -> BigInt {
    BigInt::from(10u32).pow(d)
}

fn tol(digits: u32) -> BigRational {
    BigRational::new(BigInt::one(), pow10(digits))
}

fn within_goal(r: &RatInterval, digits: u32) -> bool {
    let scale = if r.hi.abs() > BigRational::one() {
        r.hi.abs()
    } else {
        BigRational::one()
    };
    r.width() <= tol(digits) * scale
}

/// Certified enclosure of `sqrt(x)` for rational `x >= 0`, bracketing with
/// integer square roots.
pub fn sqrt_rational(x: &BigRational, digits: u32) -> RatInterval {
    assert!(!x.is_negative(), "sqrt of a negative rational");
    if x.is_zero() {
        return RatInterval::point(BigRational::zero());
    }
    // sqrt(p/q) = sqrt(p q)/q; with n = isqrt(p q S^2) the root lies in
    // [n/(qS), (n+1)/(qS)].
    let mut d = digits + 2;
    loop {
        let s = pow10(d);
        let n = (x.numer() * x.denom() * &s * &s).sqrt();
        let denom = x.denom() * &s;
        let r = RatInterval::new(
            BigRational::new(n.clone(), denom.clone()),
            BigRational::new(n + BigInt::one(), denom),
        );
        if within_goal(&r, digits) {
            return r;
        }
        d += 4;
    }
}

/// Monotone extension of [`sqrt_rational`] to intervals.
pub fn sqrt(x: &RatInterval, digits: u32) -> RatInterval {
    RatInterval::new(
        sqrt_rational(&x.lo, digits).lo,
        sqrt_rational(&x.hi, digits).hi,
    )
}

/// Natural log of `y` for rational `y in [1, 2]`, via the atanh series in
/// `z = (y-1)/(y+1) <= 1/3` with a geometric tail bound.
fn ln_core(y: &BigRational, digits: u32) -> RatInterval {
    let one = BigRational::one();
    assert!(*y >= one && *y <= BigRational::from_integer(BigInt::from(2)));
    if y.is_one() {
        return RatInterval::point(BigRational::zero());
    }
    let z = (y - &one) / (y + &one);
    let z2 = &z * &z;
    let eps = tol(digits + 2);
    let mut sum = BigRational::zero();
    let mut power = z.clone();
    let mut j = 0usize;
    loop {
        sum += &power / BigRational::from_integer(BigInt::from(2 * j + 1));
        power *= &z2;
        j += 1;
        // Remaining tail <= z^(2j+1)/((2j+1)(1-z^2)) and we carry the factor
        // 2 from the atanh doubling.
        let tail = &power / (BigRational::from_integer(BigInt::from(2 * j + 1)) * (&one - &z2))
            * BigRational::from_integer(BigInt::from(2));
        if tail < eps {
            let lo = &sum * BigRational::from_integer(BigInt::from(2));
            let hi = &lo + tail;
            return RatInterval::new(lo, hi);
        }
    }
}

/// Certified enclosure of `ln x` for rational `x > 0`.
pub fn ln_rational(x: &BigRational, digits: u32) -> RatInterval {
    assert!(x.is_positive(), "ln of a nonpositive rational");
    if *x < BigRational::one() {
        return ln_rational(&x.recip(), digits).neg();
    }
    // Reduce to [1, 2] by halving; ln x = k ln 2 + ln y.
    let two = BigRational::from_integer(BigInt::from(2));
    let mut y = x.clone();
    let mut k = 0u32;
    while y > two {
        y /= &two;
        k += 1;
    }
    // Guard digits absorb the k-fold amplification of the ln 2 width.
    let guard = 2 + 32 - k.leading_zeros().min(31);
    let core = ln_core(&y, digits + guard);
    if k == 0 {
        return core;
    }
    let ln2 = ln_core(&two, digits + guard);
    let k_int = RatInterval::from_int(i64::from(k));
    core.add(&ln2.mul(&k_int))
}

/// Monotone extension of [`ln_rational`] to positive intervals.
pub fn ln(x: &RatInterval, digits: u32) -> RatInterval {
    assert!(x.is_positive(), "ln of an interval reaching 0");
    RatInterval::new(ln_rational(&x.lo, digits).lo, ln_rational(&x.hi, digits).hi)
}

/// Taylor enclosure of `exp(u)` for rational `0 <= u <= 1/2`.
fn exp_core(u: &BigRational, digits: u32) -> RatInterval {
    let eps = tol(digits + 2);
    let mut sum = BigRational::one();
    let mut term = BigRational::one();
    let mut j = 1usize;
    loop {
        term = term * u / BigRational::from_integer(BigInt::from(j));
        sum += &term;
        j += 1;
        // Tail <= next term * sum of the geometric series with ratio u <= 1/2.
        let tail = &term * u / BigRational::from_integer(BigInt::from(j))
            * BigRational::from_integer(BigInt::from(2));
        if tail < eps {
            let hi = &sum + tail;
            return RatInterval::new(sum, hi);
        }
    }
}

/// Certified enclosure of `exp(x)` for rational `x`; relative precision for
/// large arguments (see module docs).
pub fn exp_rational(x: &BigRational, digits: u32) -> RatInterval {
    if x.is_negative() {
        return exp_rational(&-x.clone(), digits).recip();
    }
    let mut d = digits + 2;
    loop {
        // Halve until <= 1/2, evaluate, square back up with outward rounding
        // so endpoint sizes stay proportional to the precision.
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        let two = BigRational::from_integer(BigInt::from(2));
        let mut u = x.clone();
        let mut k = 0u32;
        while u > half {
            u /= &two;
            k += 1;
        }
        let inner_scale = pow10(d + 2 * k + 4);
        let mut r = exp_core(&u, d + 2 * k + 4);
        for _ in 0..k {
            r = r.mul(&r).outward_round(&inner_scale);
        }
        if within_goal(&r, digits) {
            return r;
        }
        d += 8;
    }
}

/// Monotone extension of [`exp_rational`] to intervals.
pub fn exp(x: &RatInterval, digits: u32) -> RatInterval {
    RatInterval::new(
        exp_rational(&x.lo, digits).lo,
        exp_rational(&x.hi, digits).hi,
    )
}

/// Arctangent of `1/m` for integer `m >= 2`: alternating series, so the
/// partial sum and the next term bracket the value.
fn atan_inv(m: i64, digits: u32) -> RatInterval {
    let eps = tol(digits + 2);
    let m2 = BigRational::from_integer(BigInt::from(m * m));
    let mut term = BigRational::new(BigInt::one(), BigInt::from(m));
    let mut sum = BigRational::zero();
    let mut j = 0usize;
    loop {
        if j % 2 == 0 {
            sum += &term;
        } else {
            sum -= &term;
        }
        j += 1;
        term = term / &m2 * BigRational::from_integer(BigInt::from(2 * j - 1))
            / BigRational::from_integer(BigInt::from(2 * j + 1));
        if term < eps {
            // Alternating: value lies between consecutive partial sums.
            return if j % 2 == 0 {
                RatInterval::new(sum.clone(), sum + term)
            } else {
                RatInterval::new(&sum - &term, sum)
            };
        }
    }
}

/// Certified enclosure of pi via Machin's formula
/// `pi = 16 atan(1/5) - 4 atan(1/239)`.
pub fn pi(digits: u32) -> RatInterval {
    let a = atan_inv(5, digits + 2);
    let b = atan_inv(239, digits + 2);
    a.mul(&RatInterval::from_int(16))
        .sub(&b.mul(&RatInterval::from_int(4)))
}

/// Certified enclosure of `log10 n` for a positive big integer, using the
/// top 64 bits as an exact mantissa bracket.
pub fn log10_bigint(n: &BigInt, digits: u32) -> RatInterval {
    assert!(n.is_positive(), "log10 of a nonpositive integer");
    let bits = n.bits();
    let guard = 6;
    let ln_n = if bits > 64 {
        // n lies in [m 2^s, (m+1) 2^s] with m the top 64 bits.
        let shift = bits - 64;
        let mantissa = n >> shift;
        let ln_lo = ln_rational(&BigRational::from_integer(mantissa.clone()), digits + guard);
        let ln_hi = ln_rational(
            &BigRational::from_integer(mantissa + BigInt::one()),
            digits + guard,
        );
        let ln2 = ln_rational(
            &BigRational::from_integer(BigInt::from(2)),
            digits + guard + 14,
        );
        let shift_rat = RatInterval::point(BigRational::from_integer(BigInt::from(shift)));
        RatInterval::new(ln_lo.lo, ln_hi.hi).add(&ln2.mul(&shift_rat))
    } else {
        ln_rational(&BigRational::from_integer(n.clone()), digits + guard)
    };
    let ln10 = ln_rational(&BigRational::from_integer(BigInt::from(10)), digits + guard);
    ln_n.div(&ln10)
}

/// Decimal string of the smallest multiple of `10^-places` that is `>= x`.
pub fn decimal_upper(x: &BigRational, places: u32) -> String {
    let scaled = (x * BigRational::from_integer(pow10(places)))
        .ceil()
        .to_integer();
    render_scaled_decimal(&scaled, places)
}

/// Decimal string of the largest multiple of `10^-places` that is `<= x`.
pub fn decimal_lower(x: &BigRational, places: u32) -> String {
    let scaled = (x * BigRational::from_integer(pow10(places)))
        .floor()
        .to_integer();
    render_scaled_decimal(&scaled, places)
}

fn render_scaled_decimal(scaled: &BigInt, places: u32) -> String {
    if scaled.is_negative() {
        return format!("-{}", render_scaled_decimal(&-scaled, places));
    }
    let (int_part, frac_part) = scaled.div_rem(&pow10(places));
    if places == 0 {
        return int_part.to_string();
    }
    format!(
        "{}.{:0>width$}",
        int_part,
        frac_part.to_string(),
        width = places as usize
    )
}

/// Convenience: `x` as an `f64` for display only (midpoint; never used in
/// certified arithmetic).
pub fn approx_f64(x: &RatInterval) -> f64 {
    let mid = (&x.lo + &x.hi) / BigRational::from_integer(BigInt::from(2));
    mid.numer().to_f64().unwrap_or(f64::NAN) / mid.denom().to_f64().unwrap_or(f64::NAN)
}
