//! Virtual representation classes of the two-element group.
//!
//! A class `a + b*xi` lives in Z[xi]/(xi^2 - 1): `a` counts copies of the
//! trivial character, `b` copies of the sign character, and either may be
//! negative. Multiplication follows xi^2 = 1, and symmetric powers extend the
//! usual rule `s^k(m) = C(m + k - 1, k)` on integers via
//!
//!   s^k(a + b xi) = sum_{i+j=k} s^i(a) s^j(b) xi^j.
//!
//! The dimension map a + b xi -> a + b is a ring homomorphism compatible with
//! symmetric powers; the sign-character evaluation a + b xi -> a - b is a ring
//! homomorphism but *not* compatible with symmetric powers, which is why
//! [`verify_sgn_factorization`] exists: on a full symmetric algebra the sign
//! evaluation factors as (1-t)^(-a) (1+t)^(-b) rather than (1-t)^(-(a-b)).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use crate::numth;
use crate::series::QSeries;

/// Element `a + b*xi` of the virtual representation ring of C2.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct C2Class {
    trivial: BigInt,
    sign: BigInt,
}

impl C2Class {
    pub fn new(trivial: BigInt, sign: BigInt) -> Self {
        C2Class { trivial, sign }
    }

    pub fn from_ints(trivial: i64, sign: i64) -> Self {
        C2Class::new(BigInt::from(trivial), BigInt::from(sign))
    }

    /// Multiplicity of the trivial character.
    pub fn trivial(&self) -> &BigInt {
        &self.trivial
    }

    /// Multiplicity of the sign character.
    pub fn sign(&self) -> &BigInt {
        &self.sign
    }

    pub fn add(&self, other: &C2Class) -> C2Class {
        C2Class {
            trivial: &self.trivial + &other.trivial,
            sign: &self.sign + &other.sign,
        }
    }

    /// Product in Z[xi]/(xi^2 - 1):
    /// (a + b xi)(c + d xi) = (ac + bd) + (ad + bc) xi.
    pub fn mul(&self, other: &C2Class) -> C2Class {
        C2Class {
            trivial: &self.trivial * &other.trivial + &self.sign * &other.sign,
            sign: &self.trivial * &other.sign + &self.sign * &other.trivial,
        }
    }

    /// Virtual dimension `a + b` (character value at the identity).
    pub fn dim(&self) -> BigInt {
        &self.trivial + &self.sign
    }

    /// Character value at the nontrivial element, `a - b`.
    pub fn sgn(&self) -> BigInt {
        &self.trivial - &self.sign
    }

    /// Dimension of the fixed subspace, `(dim + sgn)/2 = a`; always an
    /// integer, and nonnegative for effective classes.
    pub fn fixed_dim(&self) -> BigInt {
        self.trivial.clone()
    }

    /// True if both multiplicities are nonnegative, i.e. the class is an
    /// actual representation.
    pub fn is_effective(&self) -> bool {
        self.trivial >= BigInt::zero() && self.sign >= BigInt::zero()
    }

    /// k-th symmetric power.
    pub fn symmetric_power(&self, k: usize) -> C2Class {
        let mut trivial = BigInt::zero();
        let mut sign = BigInt::zero();
        for j in 0..=k {
            let term = numth::symmetric_power_count(&self.trivial, k - j)
                * numth::symmetric_power_count(&self.sign, j);
            if j % 2 == 0 {
                trivial += term;
            } else {
                sign += term;
            }
        }
        C2Class { trivial, sign }
    }

    /// The series `sum_k s^k(c) t^k` up to the given order, split into its
    /// trivial-character and sign-character components.
    pub fn class_exponent_series(&self, order: usize) -> (QSeries, QSeries) {
        let mut trivial = Vec::with_capacity(order + 1);
        let mut sign = Vec::with_capacity(order + 1);
        for k in 0..=order {
            let sk = self.symmetric_power(k);
            trivial.push(BigRational::from_integer(sk.trivial));
            sign.push(BigRational::from_integer(sk.sign));
        }
        (QSeries::from_coeffs(trivial), QSeries::from_coeffs(sign))
    }
}

/// Outcome of checking the sign-evaluation factorization of a symmetric
/// algebra series.
#[derive(Clone, Debug, Serialize)]
pub struct SgnFactorizationReport {
    pub holds: bool,
    pub first_mismatch: Option<usize>,
    pub checked_up_to: usize,
}

/// Checks, coefficient by coefficient up to `order`, that applying the sign
/// evaluation to `sum_k s^k(a + b xi) t^k` yields the expansion of
/// `(1-t)^(-a) (1+t)^(-b)`.
pub fn verify_sgn_factorization(c: &C2Class, order: usize) -> SgnFactorizationReport {
    let (trivial, sign) = c.class_exponent_series(order);
    let lhs = trivial.sub(&sign);

    let a = BigRational::from_integer(c.trivial().clone());
    let b = BigRational::from_integer(c.sign().clone());
    let one_minus_t = QSeries::polynomial(&[1, -1], order);
    let one_plus_t = QSeries::polynomial(&[1, 1], order);
    let rhs = one_minus_t
        .rational_power(&-a)
        .expect("constant term is 1")
        .mul(&one_plus_t.rational_power(&-b).expect("constant term is 1"));

    let report = crate::series::equal_up_to(&lhs, &rhs, order).expect("orders match");
    SgnFactorizationReport {
        holds: report.holds,
        first_mismatch: report.first_mismatch,
        checked_up_to: order,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Character-theoretic oracle: chi_{S^k}(g) via Newton's recurrence
    /// k chi_{S^k}(g) = sum_{i=1..k} chi(g^i) chi_{S^(k-i)}(g), evaluated at
    /// both elements of C2, then decomposed into multiplicities.
    fn symmetric_power_by_characters(a: i64, b: i64, k: usize) -> (i64, i64) {
        // chi(identity^i) = a + b; chi(sigma^i) alternates a+b, a-b.
        let chi = |at_sigma: bool, i: usize| -> i64 {
            if at_sigma && i % 2 == 1 {
                a - b
            } else {
                a + b
            }
        };
        let mut at_one = vec![1i64];
        let mut at_sigma = vec![1i64];
        for kk in 1..=k {
            let mut s1 = 0;
            let mut s2 = 0;
            for i in 1..=kk {
                s1 += chi(false, i) * at_one[kk - i];
                s2 += chi(true, i) * at_sigma[kk - i];
            }
            at_one.push(s1 / kk as i64);
            at_sigma.push(s2 / kk as i64);
        }
        // Multiplicities from the two character values.
        let dim = at_one[k];
        let sgn = at_sigma[k];
        ((dim + sgn) / 2, (dim - sgn) / 2)
    }

    #[test]
    fn multiplication_uses_xi_squared_equals_one() {
        let x = C2Class::from_ints(1, 2);
        let y = C2Class::from_ints(3, 4);
        // (1 + 2xi)(3 + 4xi) = (3 + 8) + (4 + 6)xi.
        assert_eq!(x.mul(&y), C2Class::from_ints(11, 10));
        let xi = C2Class::from_ints(0, 1);
        assert_eq!(xi.mul(&xi), C2Class::from_ints(1, 0));
    }

    #[test]
    fn dim_and_sgn_are_ring_homomorphisms() {
        let x = C2Class::from_ints(2, -3);
        let y = C2Class::from_ints(-1, 5);
        let p = x.mul(&y);
        assert_eq!(p.dim(), x.dim() * y.dim());
        assert_eq!(p.sgn(), x.sgn() * y.sgn());
        assert_eq!(p.fixed_dim() * 2, p.dim() + p.sgn());
    }

    #[test]
    fn symmetric_squares_of_small_representations() {
        // s^2(xi) = 1 (the square of the sign character is trivial).
        let xi = C2Class::from_ints(0, 1);
        assert_eq!(xi.symmetric_power(2), C2Class::from_ints(1, 0));
        // Regular representation 1 + xi: s^2 = 2 + xi.
        let reg = C2Class::from_ints(1, 1);
        assert_eq!(reg.symmetric_power(2), C2Class::from_ints(2, 1));
    }

    #[test]
    fn symmetric_powers_match_character_oracle() {
        for a in 0..5i64 {
            for b in 0..5i64 {
                let c = C2Class::from_ints(a, b);
                for k in 0..8usize {
                    let (ta, tb) = symmetric_power_by_characters(a, b, k);
                    assert_eq!(
                        c.symmetric_power(k),
                        C2Class::from_ints(ta, tb),
                        "a={a} b={b} k={k}"
                    );
                }
            }
        }
    }

    #[test]
    fn symmetric_powers_of_effective_classes_are_effective() {
        for a in 0..6i64 {
            for b in 0..6i64 {
                let c = C2Class::from_ints(a, b);
                for k in 0..10usize {
                    assert!(c.symmetric_power(k).is_effective(), "a={a} b={b} k={k}");
                }
            }
        }
    }

    #[test]
    fn symmetric_powers_are_additive_as_series() {
        // sum_k s^k(c + d) t^k = (sum s^i(c) t^i)(sum s^j(d) t^j).
        let order = 12;
        let c = C2Class::from_ints(2, -1);
        let d = C2Class::from_ints(-3, 4);
        let (ct, cs) = c.class_exponent_series(order);
        let (dt, ds) = d.class_exponent_series(order);
        let (st, ss) = c.add(&d).class_exponent_series(order);
        // Product in the class ring, coefficientwise on series:
        // trivial part ct*dt + cs*ds, sign part ct*ds + cs*dt.
        assert_eq!(st, ct.mul(&dt).add(&cs.mul(&ds)));
        assert_eq!(ss, ct.mul(&ds).add(&cs.mul(&dt)));
    }

    #[test]
    fn negative_multiplicities_extend_by_inverse_binomials() {
        // s^i(-m) = (-1)^i C(m, i): the class exponent series of (-m, 0) is
        // the expansion of (1-t)^m, a polynomial.
        let c = C2Class::from_ints(-3, 0);
        let (trivial, sign) = c.class_exponent_series(6);
        assert!(sign.is_zero());
        assert_eq!(trivial, QSeries::polynomial(&[1, -3, 3, -1], 6));
    }

    #[test]
    fn sgn_factorization_on_a_mixed_class() {
        let report = verify_sgn_factorization(&C2Class::from_ints(3, 2), 24);
        assert!(report.holds, "mismatch at {:?}", report.first_mismatch);
        let report = verify_sgn_factorization(&C2Class::from_ints(-2, 5), 24);
        assert!(report.holds, "mismatch at {:?}", report.first_mismatch);
    }

    #[test]
    fn sgn_evaluation_is_not_a_lambda_homomorphism() {
        // For the regular representation, sgn(s^2) = 1 while the sign
        // evaluation of the class is 0; collapsing the class to its sgn value
        // before taking symmetric powers would give s^2(0) = 0.
        let reg = C2Class::from_ints(1, 1);
        assert_eq!(reg.sgn(), BigInt::zero());
        assert_eq!(reg.symmetric_power(2).sgn(), BigInt::from(1));
    }
}
