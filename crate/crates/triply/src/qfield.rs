//! Exact arithmetic in multi-quadratic extensions of the rationals.
//!
//! An [`ExactReal`] is a finite sum Σ cₛ·√s over square-free positive
//! integers s, with rational coefficients cₛ; the key s = 1 carries the
//! rational part. Since distinct square roots of square-free integers are
//! linearly independent over ℚ, this representation is canonical: two values
//! are equal iff their term maps are identical, and the zero test is purely
//! structural. Every inner product, eigenvalue and intersection-number
//! expression handled by this crate lives in such an extension.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

/// Arbitrary-precision rational, always in lowest terms with positive
/// denominator (maintained by `num-rational`).
pub type Rational = num_rational::BigRational;

/// Errors from exact-field operations.
#[derive(Debug, Clone, thiserror::Error)]
pub enum QFieldError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("square root of a negative value")]
    NegativeSqrt,
    #[error("square root not representable as a sum of integer square roots: {0}")]
    IrrationalSqrt(String),
}

/// Convenience constructor for a rational from two machine integers.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// An element of a multi-quadratic tower: Σ cₛ·√s with cₛ ∈ ℚ nonzero and
/// every key s square-free, s ≥ 1.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct ExactReal {
    terms: BTreeMap<u64, Rational>,
}

/// Largest square divisor decomposition: returns (g, m) with n = g²·m and m
/// square-free. Trial division; the radicands in play stay small.
fn square_free_decompose(n: u64) -> (u64, u64) {
    assert!(n > 0, "radicand must be positive");
    let mut m = n;
    let mut g = 1u64;
    let mut p = 2u64;
    while p * p <= m {
        while m % (p * p) == 0 {
            m /= p * p;
            g *= p;
        }
        p += 1;
    }
    (g, m)
}

impl ExactReal {
    pub fn zero() -> Self {
        ExactReal::default()
    }

    pub fn one() -> Self {
        ExactReal::from_int(1)
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rational(Rational::from(BigInt::from(n)))
    }

    pub fn from_rational(r: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !r.is_zero() {
            terms.insert(1, r);
        }
        ExactReal { terms }
    }

    /// c·√s, with the square part of s folded into the coefficient.
    pub fn from_term(coeff: Rational, radicand: u64) -> Self {
        let mut out = ExactReal::zero();
        out.add_term(radicand, coeff);
        out
    }

    /// √n for a nonnegative integer n.
    pub fn sqrt_int(n: u64) -> Self {
        if n == 0 {
            return ExactReal::zero();
        }
        Self::from_term(Rational::one(), n)
    }

    fn add_term(&mut self, radicand: u64, coeff: Rational) {
        if coeff.is_zero() {
            return;
        }
        let (g, m) = square_free_decompose(radicand);
        let coeff = coeff * Rational::from(BigInt::from(g));
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += coeff;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.as_rational().map(|r| r.is_one()).unwrap_or(false)
    }

    /// The value as a rational, if it has no irrational part.
    pub fn as_rational(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => self.terms.get(&1).cloned(),
            _ => None,
        }
    }

    pub fn is_rational(&self) -> bool {
        self.as_rational().is_some()
    }

    /// The value as an integer, if it is one.
    pub fn as_integer(&self) -> Option<BigInt> {
        let r = self.as_rational()?;
        r.is_integer().then(|| r.to_integer())
    }

    /// Iterator over (radicand, coefficient) pairs in increasing radicand order.
    pub fn terms(&self) -> impl Iterator<Item = (u64, &Rational)> {
        self.terms.iter().map(|(s, c)| (*s, c))
    }

    pub fn pow(&self, mut e: u32) -> ExactReal {
        let mut base = self.clone();
        let mut acc = ExactReal::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Multiplicative inverse, computed by solving b·a = 1 over the rational
    /// coordinates of the radical basis generated by a's terms.
    pub fn inv(&self) -> Result<ExactReal, QFieldError> {
        if self.is_zero() {
            return Err(QFieldError::DivisionByZero);
        }
        if let Some(r) = self.as_rational() {
            return Ok(ExactReal::from_rational(r.recip()));
        }
        // Close the set of radicands under the reduced product
        // √s·√t = g·√(st/g²); the closure is a finite group.
        let mut basis: Vec<u64> = vec![1];
        for (s, _) in self.terms() {
            if !basis.contains(&s) {
                basis.push(s);
            }
        }
        loop {
            let mut grew = false;
            let snapshot = basis.clone();
            for &a in &snapshot {
                for &b in &snapshot {
                    let (_, m) = square_free_decompose(a * b);
                    if !basis.contains(&m) {
                        basis.push(m);
                        grew = true;
                    }
                }
            }
            if !grew {
                break;
            }
        }
        basis.sort_unstable();
        let index = |s: u64| basis.binary_search(&s).expect("closed basis");
        let n = basis.len();
        // Row r of the multiplication matrix: coordinates of a·√(basis[r]).
        let mut mat = vec![vec![Rational::zero(); n]; n];
        for (r, &br) in basis.iter().enumerate() {
            let prod = self * &ExactReal::sqrt_int(br);
            for (s, c) in prod.terms() {
                mat[index(s)][r] = c.clone();
            }
        }
        // Solve M x = e_1 (coordinates of the constant 1).
        let mut rhs = vec![Rational::zero(); n];
        rhs[index(1)] = Rational::one();
        let x = solve_rational_system(mat, rhs).ok_or(QFieldError::DivisionByZero)?;
        let mut out = ExactReal::zero();
        for (i, c) in x.into_iter().enumerate() {
            out.add_term(basis[i], c);
        }
        debug_assert!((self * &out).is_one());
        Ok(out)
    }

    pub fn div(&self, rhs: &ExactReal) -> Result<ExactReal, QFieldError> {
        Ok(self * &rhs.inv()?)
    }

    /// Sign of the value: -1, 0 or +1.
    ///
    /// Zero is decided structurally (the radicals are linearly independent
    /// over ℚ); otherwise interval bounds on each √s are refined, doubling
    /// the precision until the enclosing interval excludes zero. Terminates
    /// because a nonzero element has nonzero value.
    pub fn sign(&self) -> i32 {
        if self.is_zero() {
            return 0;
        }
        if let Some(r) = self.as_rational() {
            return match r.cmp(&Rational::zero()) {
                Ordering::Less => -1,
                Ordering::Equal => 0,
                Ordering::Greater => 1,
            };
        }
        // Values with at most two terms are decided rationally:
        // a + b·√s has the sign of a when a and b agree, and the sign of
        // a²·sign(a) - b²·s·sign(b) otherwise.
        if self.terms.len() <= 2 {
            let mut parts = self.terms.iter();
            let (s1, c1) = parts.next().expect("nonzero");
            let (rest_sq, c2_sign) = match parts.next() {
                Some((s2, c2)) => (c2 * c2 * Rational::from(BigInt::from(*s2)), c2.is_positive()),
                None => (Rational::zero(), false),
            };
            let c1_positive = c1.is_positive();
            if rest_sq.is_zero() {
                return if c1_positive { 1 } else { -1 };
            }
            if c1_positive == c2_sign {
                return if c1_positive { 1 } else { -1 };
            }
            let first_sq = c1 * c1 * Rational::from(BigInt::from(*s1));
            return match first_sq.cmp(&rest_sq) {
                Ordering::Greater => {
                    if c1_positive {
                        1
                    } else {
                        -1
                    }
                }
                Ordering::Less => {
                    if c2_sign {
                        1
                    } else {
                        -1
                    }
                }
                Ordering::Equal => unreachable!("radicals are independent"),
            };
        }
        let mut bits = 16u32;
        loop {
            let (lo, hi) = self.bounds(bits);
            if lo.is_positive() {
                return 1;
            }
            if hi.is_negative() {
                return -1;
            }
            bits *= 2;
            assert!(bits <= 1 << 20, "sign refinement failed to converge");
        }
    }

    /// Rational interval [lo, hi] enclosing the value, with √s bounded to
    /// `bits` fractional bits via integer square roots.
    fn bounds(&self, bits: u32) -> (Rational, Rational) {
        let scale = BigInt::from(BigUint::one() << bits);
        let mut lo = Rational::zero();
        let mut hi = Rational::zero();
        for (s, c) in self.terms() {
            if s == 1 {
                lo += c;
                hi += c;
                continue;
            }
            // floor(sqrt(s·4^bits)) / 2^bits ≤ √s ≤ (floor+1) / 2^bits
            let scaled = BigUint::from(s) << (2 * bits);
            let root = BigInt::from(scaled.sqrt());
            let r_lo = Rational::new(root.clone(), scale.clone());
            let r_hi = Rational::new(root + BigInt::one(), scale.clone());
            if c.is_positive() {
                lo += c * &r_lo;
                hi += c * &r_hi;
            } else {
                lo += c * &r_hi;
                hi += c * &r_lo;
            }
        }
        (lo, hi)
    }

    pub fn abs(&self) -> ExactReal {
        if self.sign() < 0 {
            -self.clone()
        } else {
            self.clone()
        }
    }

    /// Exact square root, for values whose root stays inside the tower.
    ///
    /// Handles nonnegative rationals (√(p/q) = √(pq)/q) and single-term
    /// values c·√s (root √c·s^{1/4} only when s = 1, i.e. the rational case,
    /// or when c·√s is a perfect square like 2√2·... not supported). Anything
    /// else is rejected.
    pub fn sqrt(&self) -> Result<ExactReal, QFieldError> {
        if self.sign() < 0 {
            return Err(QFieldError::NegativeSqrt);
        }
        if let Some(r) = self.as_rational() {
            // √(p/q) = √(p·q) / q with p·q decomposed as g²·m.
            let p = r.numer().to_biguint().expect("nonnegative");
            let q = r.denom().to_biguint().expect("positive");
            let pq = (&p * &q)
                .to_u64()
                .ok_or_else(|| QFieldError::IrrationalSqrt(self.to_string()))?;
            let coeff = Rational::new(BigInt::one(), BigInt::from(q));
            return Ok(ExactReal::from_term(coeff, pq.max(1)));
        }
        Err(QFieldError::IrrationalSqrt(self.to_string()))
    }

    /// f64 approximation, for diagnostic printing only.
    pub fn to_f64(&self) -> f64 {
        self.terms()
            .map(|(s, c)| c.to_f64().unwrap_or(f64::NAN) * (s as f64).sqrt())
            .sum()
    }
}

/// Dense rational Gaussian elimination; returns None if singular.
fn solve_rational_system(
    mut mat: Vec<Vec<Rational>>,
    mut rhs: Vec<Rational>,
) -> Option<Vec<Rational>> {
    let n = mat.len();
    let mut perm: Vec<usize> = (0..n).collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !mat[perm[r]][col].is_zero())?;
        perm.swap(col, pivot);
        let p = perm[col];
        for r_idx in (col + 1)..n {
            let r = perm[r_idx];
            if mat[r][col].is_zero() {
                continue;
            }
            let factor = &mat[r][col] / &mat[p][col];
            for c in col..n {
                let delta = &factor * &mat[p][c];
                mat[r][c] -= delta;
            }
            let delta = &factor * &rhs[p];
            rhs[r] -= delta;
        }
    }
    let mut x = vec![Rational::zero(); n];
    for col in (0..n).rev() {
        let p = perm[col];
        let mut acc = rhs[p].clone();
        for c in (col + 1)..n {
            acc -= &mat[p][c] * &x[c];
        }
        x[col] = acc / &mat[p][col];
    }
    Some(x)
}

impl Add for &ExactReal {
    type Output = ExactReal;
    fn add(self, rhs: &ExactReal) -> ExactReal {
        let mut out = self.clone();
        for (s, c) in rhs.terms() {
            out.add_term(s, c.clone());
        }
        out
    }
}

impl Sub for &ExactReal {
    type Output = ExactReal;
    fn sub(self, rhs: &ExactReal) -> ExactReal {
        let mut out = self.clone();
        for (s, c) in rhs.terms() {
            out.add_term(s, -c.clone());
        }
        out
    }
}

impl Mul for &ExactReal {
    type Output = ExactReal;
    fn mul(self, rhs: &ExactReal) -> ExactReal {
        let mut out = ExactReal::zero();
        for (s, cs) in self.terms() {
            for (t, ct) in rhs.terms() {
                // √s·√t = g·√(st/g²); add_term performs the reduction.
                out.add_term(s * t, cs * ct);
            }
        }
        out
    }
}

impl Neg for ExactReal {
    type Output = ExactReal;
    fn neg(self) -> ExactReal {
        let terms = self.terms.into_iter().map(|(s, c)| (s, -c)).collect();
        ExactReal { terms }
    }
}

impl Neg for &ExactReal {
    type Output = ExactReal;
    fn neg(self) -> ExactReal {
        -self.clone()
    }
}

macro_rules! forward_value_ops {
    ($($trait:ident :: $method:ident),*) => {$(
        impl $trait for ExactReal {
            type Output = ExactReal;
            fn $method(self, rhs: ExactReal) -> ExactReal {
                $trait::$method(&self, &rhs)
            }
        }
        impl $trait<&ExactReal> for ExactReal {
            type Output = ExactReal;
            fn $method(self, rhs: &ExactReal) -> ExactReal {
                $trait::$method(&self, rhs)
            }
        }
        impl $trait<ExactReal> for &ExactReal {
            type Output = ExactReal;
            fn $method(self, rhs: ExactReal) -> ExactReal {
                $trait::$method(self, &rhs)
            }
        }
    )*};
}
forward_value_ops!(Add::add, Sub::sub, Mul::mul);

impl AddAssign<&ExactReal> for ExactReal {
    fn add_assign(&mut self, rhs: &ExactReal) {
        for (s, c) in rhs.terms() {
            self.add_term(s, c.clone());
        }
    }
}

impl SubAssign<&ExactReal> for ExactReal {
    fn sub_assign(&mut self, rhs: &ExactReal) {
        for (s, c) in rhs.terms() {
            self.add_term(s, -c.clone());
        }
    }
}

impl MulAssign<&ExactReal> for ExactReal {
    fn mul_assign(&mut self, rhs: &ExactReal) {
        *self = &*self * rhs;
    }
}

impl PartialOrd for ExactReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExactReal {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self - other).sign() {
            0 => Ordering::Equal,
            s if s < 0 => Ordering::Less,
            _ => Ordering::Greater,
        }
    }
}

impl From<i64> for ExactReal {
    fn from(n: i64) -> Self {
        ExactReal::from_int(n)
    }
}

impl From<Rational> for ExactReal {
    fn from(r: Rational) -> Self {
        ExactReal::from_rational(r)
    }
}

impl fmt::Display for ExactReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (s, c) in self.terms() {
            if first {
                if s == 1 {
                    write!(f, "{c}")?;
                } else if c.is_one() {
                    write!(f, "sqrt({s})")?;
                } else {
                    write!(f, "{c}*sqrt({s})")?;
                }
                first = false;
            } else if c.is_positive() {
                if c.is_one() {
                    write!(f, " + sqrt({s})")?;
                } else {
                    write!(f, " + {c}*sqrt({s})")?;
                }
            } else {
                let a = -c.clone();
                if a.is_one() {
                    write!(f, " - sqrt({s})")?;
                } else {
                    write!(f, " - {a}*sqrt({s})")?;
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for ExactReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

// Interchange encoding: a JSON array of [s, "num/den"] pairs sorted by s.
impl Serialize for ExactReal {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let pairs: Vec<(u64, String)> = self
            .terms()
            .map(|(s, c)| (s, format!("{}/{}", c.numer(), c.denom())))
            .collect();
        pairs.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ExactReal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let pairs: Vec<(u64, String)> = Vec::deserialize(deserializer)?;
        let mut out = ExactReal::zero();
        for (s, repr) in pairs {
            let (num, den) = repr
                .split_once('/')
                .ok_or_else(|| D::Error::custom(format!("malformed rational {repr:?}")))?;
            let num: BigInt = num
                .parse()
                .map_err(|e| D::Error::custom(format!("bad numerator {num:?}: {e}")))?;
            let den: BigInt = den
                .parse()
                .map_err(|e| D::Error::custom(format!("bad denominator {den:?}: {e}")))?;
            if den.is_zero() {
                return Err(D::Error::custom("zero denominator"));
            }
            if s == 0 {
                return Err(D::Error::custom("radicand must be positive"));
            }
            out.add_term(s, Rational::new(num, den));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sqrt(n: u64) -> ExactReal {
        ExactReal::sqrt_int(n)
    }

    fn int(n: i64) -> ExactReal {
        ExactReal::from_int(n)
    }

    #[test]
    fn conjugate_product() {
        let a = &int(1) + &sqrt(2);
        let b = &int(1) - &sqrt(2);
        assert_eq!(&a * &b, int(-1));
    }

    #[test]
    fn radical_reduction() {
        assert_eq!(&sqrt(2) * &sqrt(3), sqrt(6));
        assert_eq!(&sqrt(2) * &sqrt(2), int(2));
        assert_eq!(&sqrt(8) * &sqrt(2), int(4));
        // √8 folds to 2√2 on construction.
        assert_eq!(sqrt(8), ExactReal::from_term(ratio(2, 1), 2));
    }

    #[test]
    fn golden_ratio_square() {
        // ((1+√5)/2)² = (3+√5)/2
        let phi = ExactReal::from_term(ratio(1, 2), 1) + ExactReal::from_term(ratio(1, 2), 5);
        let expected = ExactReal::from_term(ratio(3, 2), 1) + ExactReal::from_term(ratio(1, 2), 5);
        assert_eq!(phi.pow(2), expected);
    }

    #[test]
    fn inverses() {
        assert_eq!(sqrt(2).inv().unwrap(), ExactReal::from_term(ratio(1, 2), 2));
        assert_eq!(int(2).inv().unwrap(), ExactReal::from_rational(ratio(1, 2)));
        let a = &int(1) + &sqrt(2);
        assert_eq!(a.inv().unwrap(), &sqrt(2) - &int(1));
        assert!(matches!(
            ExactReal::zero().inv(),
            Err(QFieldError::DivisionByZero)
        ));
        // Inverse across two independent radicals.
        let b = &(&sqrt(2) + &sqrt(3)) + &int(1);
        assert!((&b * &b.inv().unwrap()).is_one());
    }

    #[test]
    fn signs() {
        assert_eq!(ExactReal::zero().sign(), 0);
        assert_eq!((&sqrt(2) - &int(1)).sign(), 1);
        // 3 - 2√2 - (√2-1)² = 0, caught structurally.
        let c = &(&int(3) - &ExactReal::from_term(ratio(2, 1), 2)) - &(&sqrt(2) - &int(1)).pow(2);
        assert_eq!(c.sign(), 0);
        // A tight comparison: √2 + √3 vs √10 (3.146 vs 3.162).
        assert_eq!((&(&sqrt(2) + &sqrt(3)) - &sqrt(10)).sign(), -1);
    }

    #[test]
    fn ordering_is_numeric() {
        let mut v = vec![sqrt(2), int(1), -sqrt(3), int(0), ExactReal::from_term(ratio(1, 2), 5)];
        v.sort();
        let approx: Vec<f64> = v.iter().map(|x| x.to_f64()).collect();
        for w in approx.windows(2) {
            assert!(w[0] <= w[1]);
        }
    }

    #[test]
    fn sqrt_of_rational() {
        let x = ExactReal::from_rational(ratio(16, 25));
        assert_eq!(x.sqrt().unwrap(), ExactReal::from_rational(ratio(4, 5)));
        let y = ExactReal::from_rational(ratio(3, 4));
        assert_eq!(y.sqrt().unwrap(), ExactReal::from_term(ratio(1, 2), 3));
        assert!(int(-1).sqrt().is_err());
        assert!(sqrt(2).sqrt().is_err());
        // (16/25)·... √(1792/2025) = 16√7/45
        let z = ExactReal::from_rational(ratio(1792, 2025));
        assert_eq!(z.sqrt().unwrap(), ExactReal::from_term(ratio(16, 45), 7));
    }

    #[test]
    fn serde_round_trip_canonical() {
        let x = ExactReal::from_term(ratio(-3, 7), 10) + ExactReal::from_rational(ratio(1, 2));
        let json = serde_json::to_string(&x).unwrap();
        assert_eq!(json, r#"[[1,"1/2"],[10,"-3/7"]]"#);
        let back: ExactReal = serde_json::from_str(&json).unwrap();
        assert_eq!(back, x);
    }

    fn arb_exact_real() -> impl Strategy<Value = ExactReal> {
        let term = (0u64..4, -6i64..7, 1i64..5).prop_map(|(which, num, den)| {
            let s = [1, 2, 3, 5][which as usize];
            ExactReal::from_term(ratio(num, den), s)
        });
        prop::collection::vec(term, 0..4).prop_map(|ts| {
            let mut acc = ExactReal::zero();
            for t in ts {
                acc += &t;
            }
            acc
        })
    }

    proptest! {
        #[test]
        fn field_axioms(a in arb_exact_real(), b in arb_exact_real(), c in arb_exact_real()) {
            prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert_eq!(&a + &b, &b + &a);
            prop_assert_eq!(&a * &b, &b * &a);
        }

        #[test]
        fn inverse_round_trip(a in arb_exact_real()) {
            if !a.is_zero() {
                prop_assert!((&a * &a.inv().unwrap()).is_one());
            }
        }

        #[test]
        fn serde_round_trip(a in arb_exact_real()) {
            let json = serde_json::to_string(&a).unwrap();
            let back: ExactReal = serde_json::from_str(&json).unwrap();
            prop_assert_eq!(back, a);
        }

        #[test]
        fn sign_matches_float(a in arb_exact_real()) {
            let f = a.to_f64();
            if f.abs() > 1e-6 {
                prop_assert_eq!(a.sign(), if f > 0.0 { 1 } else { -1 });
            }
        }
    }
}
