//! Exact arithmetic in an imaginary-quadratic field K = Q(sqrt(-m)) and its
//! ring of integers O_K = Z + Z*omega.
//!
//! Elements are stored in coordinates over the integral basis {1, omega}, so
//! integrality is exactly "denominator = 1" and norms of integers are plain
//! nonnegative integers. The quadratic character attached to the field
//! discriminant classifies rational primes as split, inert or ramified.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Shape of the generator omega of the ring of integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OmegaKind {
    /// omega = (1 + sqrt(-m))/2, minimal polynomial x^2 - x + (1+m)/4.
    HalfIntegral,
    /// omega = sqrt(-m), minimal polynomial x^2 + m.
    PureRoot,
}

/// Splitting behaviour of a rational prime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PrimeClass {
    Split,
    Inert,
    Ramified,
}

/// The field K = Q(sqrt(-m)) for squarefree m >= 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QuadField {
    m: u64,
    disc: i64,
    kind: OmegaKind,
}

impl QuadField {
    /// Build the field from a squarefree m >= 1.
    pub fn new(m: u64) -> Result<Self> {
        if m == 0 || !is_squarefree(m) {
            return Err(Error::NotSquarefree(m));
        }
        let (disc, kind) = if m % 4 == 3 {
            (-(m as i64), OmegaKind::HalfIntegral)
        } else {
            (-4 * m as i64, OmegaKind::PureRoot)
        };
        Ok(QuadField { m, disc, kind })
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    /// Field discriminant, -m or -4m.
    pub fn disc(&self) -> i64 {
        self.disc
    }

    pub fn omega_kind(&self) -> OmegaKind {
        self.kind
    }

    /// Trace of omega over Q.
    pub fn omega_trace(&self) -> i64 {
        match self.kind {
            OmegaKind::HalfIntegral => 1,
            OmegaKind::PureRoot => 0,
        }
    }

    /// Norm of omega over Q.
    pub fn omega_norm(&self) -> u64 {
        match self.kind {
            OmegaKind::HalfIntegral => (1 + self.m) / 4,
            OmegaKind::PureRoot => self.m,
        }
    }

    /// sqrt(d_K) expressed in the integral basis: 2*omega - tr(omega).
    pub fn sqrt_disc(&self) -> KElem {
        KElem::new(*self, BigInt::from(-self.omega_trace()), BigInt::from(2))
    }

    /// Units of O_K. Only d_K = -3, -4 have units beyond +-1.
    pub fn units(&self) -> Vec<KElem> {
        let one = KElem::one(*self);
        let mut us = vec![one.clone(), -&one];
        if self.disc == -4 || self.disc == -3 {
            let w = KElem::omega(*self);
            let mut u = w;
            // omega is a root of unity here; collect its coset of {1,-1}.
            while u != one {
                us.push(u.clone());
                us.push(-&u);
                u = &u * &KElem::omega(*self);
            }
            us.sort();
            us.dedup();
        }
        us
    }

    /// Kronecker symbol (d_K / n), the real character attached to the field.
    pub fn chi(&self, n: &BigInt) -> i32 {
        kronecker_symbol(&BigInt::from(self.disc), n)
    }

    pub fn chi_i64(&self, n: i64) -> i32 {
        self.chi(&BigInt::from(n))
    }

    /// Classify a rational prime as split, inert or ramified.
    pub fn classify_prime(&self, p: u64) -> Result<PrimeClass> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(match self.chi(&BigInt::from(p)) {
            0 => PrimeClass::Ramified,
            1 => PrimeClass::Split,
            _ => PrimeClass::Inert,
        })
    }

    pub fn is_inert(&self, p: u64) -> bool {
        matches!(self.classify_prime(p), Ok(PrimeClass::Inert))
    }

    /// Class number, counted through the reduced forms of discriminant d_K.
    pub fn class_number(&self) -> usize {
        crate::ideal::reduced_forms(*self).len()
    }
}

/// An element (a + b*omega) / den of K, always in lowest terms with den >= 1.
///
/// Elements of O_K are exactly those with den = 1.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct KElem {
    field: QuadField,
    a: BigInt,
    b: BigInt,
    den: BigInt,
}

impl KElem {
    /// An integral element a + b*omega.
    pub fn new(field: QuadField, a: BigInt, b: BigInt) -> Self {
        KElem {
            field,
            a,
            b,
            den: BigInt::one(),
        }
    }

    /// (a + b*omega) / den, reduced to lowest terms.
    pub fn new_frac(field: QuadField, a: BigInt, b: BigInt, den: BigInt) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let mut e = KElem { field, a, b, den };
        e.reduce();
        Ok(e)
    }

    pub fn from_int(field: QuadField, a: i64) -> Self {
        KElem::new(field, BigInt::from(a), BigInt::zero())
    }

    pub fn from_bigint(field: QuadField, a: BigInt) -> Self {
        KElem::new(field, a, BigInt::zero())
    }

    pub fn from_rational(field: QuadField, r: &BigRational) -> Self {
        KElem {
            field,
            a: r.numer().clone(),
            b: BigInt::zero(),
            den: r.denom().clone(),
        }
    }

    pub fn from_coords(field: QuadField, a: i64, b: i64) -> Self {
        KElem::new(field, BigInt::from(a), BigInt::from(b))
    }

    pub fn zero(field: QuadField) -> Self {
        KElem::from_int(field, 0)
    }

    pub fn one(field: QuadField) -> Self {
        KElem::from_int(field, 1)
    }

    pub fn omega(field: QuadField) -> Self {
        KElem::new(field, BigInt::zero(), BigInt::one())
    }

    fn reduce(&mut self) {
        if self.den.is_negative() {
            self.a = -&self.a;
            self.b = -&self.b;
            self.den = -&self.den;
        }
        let g = self.a.gcd(&self.b).gcd(&self.den);
        if !g.is_one() && !g.is_zero() {
            self.a = &self.a / &g;
            self.b = &self.b / &g;
            self.den = &self.den / &g;
        }
        if self.a.is_zero() && self.b.is_zero() {
            self.den = BigInt::one();
        }
    }

    pub fn field(&self) -> QuadField {
        self.field
    }

    /// Coordinate of 1 (numerator part).
    pub fn coord_a(&self) -> &BigInt {
        &self.a
    }

    /// Coordinate of omega (numerator part).
    pub fn coord_b(&self) -> &BigInt {
        &self.b
    }

    pub fn denom(&self) -> &BigInt {
        &self.den
    }

    pub fn ensure_same_field(&self, other: &KElem) -> Result<()> {
        if self.field == other.field {
            Ok(())
        } else {
            Err(Error::MixedFields)
        }
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.a.is_one() && self.b.is_zero() && self.den.is_one()
    }

    pub fn is_integral(&self) -> bool {
        self.den.is_one()
    }

    /// Real (rational) elements are those with vanishing omega coordinate.
    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        if self.b.is_zero() {
            Some(BigRational::new(self.a.clone(), self.den.clone()))
        } else {
            None
        }
    }

    /// Integral rational value, if the element lies in Z.
    pub fn as_integer(&self) -> Option<BigInt> {
        if self.b.is_zero() && self.den.is_one() {
            Some(self.a.clone())
        } else {
            None
        }
    }

    /// Complex conjugate: conj(omega) = tr(omega) - omega.
    pub fn conj(&self) -> KElem {
        let t = BigInt::from(self.field.omega_trace());
        KElem {
            field: self.field,
            a: &self.a + &t * &self.b,
            b: -&self.b,
            den: self.den.clone(),
        }
    }

    /// Norm to Q, x * conj(x). Nonnegative, zero only at zero.
    pub fn norm(&self) -> BigRational {
        let t = BigInt::from(self.field.omega_trace());
        let n0 = BigInt::from(self.field.omega_norm());
        let num = &self.a * &self.a + &t * &self.a * &self.b + &n0 * &self.b * &self.b;
        BigRational::new(num, &self.den * &self.den)
    }

    /// Norm of an integral element as a plain integer.
    pub fn norm_int(&self) -> Option<BigInt> {
        if !self.is_integral() {
            return None;
        }
        let t = BigInt::from(self.field.omega_trace());
        let n0 = BigInt::from(self.field.omega_norm());
        Some(&self.a * &self.a + &t * &self.a * &self.b + &n0 * &self.b * &self.b)
    }

    /// Trace to Q, x + conj(x).
    pub fn trace(&self) -> BigRational {
        let t = BigInt::from(self.field.omega_trace());
        BigRational::new(2 * &self.a + t * &self.b, self.den.clone())
    }

    pub fn inv(&self) -> Result<KElem> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        // 1/x = conj(x) / norm(x)
        let t = BigInt::from(self.field.omega_trace());
        let n0 = BigInt::from(self.field.omega_norm());
        let norm_num = &self.a * &self.a + &t * &self.a * &self.b + &n0 * &self.b * &self.b;
        KElem::new_frac(
            self.field,
            &self.den * (&self.a + &t * &self.b),
            &self.den * (-&self.b),
            norm_num,
        )
    }

    pub fn checked_div(&self, rhs: &KElem) -> Result<KElem> {
        self.ensure_same_field(rhs)?;
        Ok(self * &rhs.inv()?)
    }

    /// x * r for rational r.
    pub fn scale(&self, r: &BigRational) -> KElem {
        let mut e = KElem {
            field: self.field,
            a: &self.a * r.numer(),
            b: &self.b * r.numer(),
            den: &self.den * r.denom(),
        };
        e.reduce();
        e
    }

    pub fn pow(&self, e: i64) -> Result<KElem> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut acc = KElem::one(self.field);
        for _ in 0..e.unsigned_abs() {
            acc = &acc * &base;
        }
        Ok(acc)
    }
}

impl std::fmt::Display for KElem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.den.is_one() {
            write!(f, "{}+{}w", self.a, self.b)
        } else {
            write!(f, "({}+{}w)/{}", self.a, self.b, self.den)
        }
    }
}

macro_rules! same_field {
    ($a:expr, $b:expr) => {
        assert_eq!($a.field, $b.field, "mixed-field operands");
    };
}

impl std::ops::Add for &KElem {
    type Output = KElem;
    fn add(self, rhs: &KElem) -> KElem {
        same_field!(self, rhs);
        let mut e = KElem {
            field: self.field,
            a: &self.a * &rhs.den + &rhs.a * &self.den,
            b: &self.b * &rhs.den + &rhs.b * &self.den,
            den: &self.den * &rhs.den,
        };
        e.reduce();
        e
    }
}

impl std::ops::Sub for &KElem {
    type Output = KElem;
    fn sub(self, rhs: &KElem) -> KElem {
        same_field!(self, rhs);
        let mut e = KElem {
            field: self.field,
            a: &self.a * &rhs.den - &rhs.a * &self.den,
            b: &self.b * &rhs.den - &rhs.b * &self.den,
            den: &self.den * &rhs.den,
        };
        e.reduce();
        e
    }
}

impl std::ops::Mul for &KElem {
    type Output = KElem;
    fn mul(self, rhs: &KElem) -> KElem {
        same_field!(self, rhs);
        // (a1 + b1 w)(a2 + b2 w) with w^2 = t*w - n0
        let t = BigInt::from(self.field.omega_trace());
        let n0 = BigInt::from(self.field.omega_norm());
        let bb = &self.b * &rhs.b;
        let a = &self.a * &rhs.a - &n0 * &bb;
        let b = &self.a * &rhs.b + &self.b * &rhs.a + &t * &bb;
        let mut e = KElem {
            field: self.field,
            a,
            b,
            den: &self.den * &rhs.den,
        };
        e.reduce();
        e
    }
}

impl std::ops::Neg for &KElem {
    type Output = KElem;
    fn neg(self) -> KElem {
        KElem {
            field: self.field,
            a: -&self.a,
            b: -&self.b,
            den: self.den.clone(),
        }
    }
}

/// Kronecker symbol (a / n), extended to all integers n.
pub fn kronecker_symbol(a: &BigInt, n: &BigInt) -> i32 {
    if n.is_zero() {
        return if a.abs().is_one() { 1 } else { 0 };
    }
    let mut a = a.clone();
    let mut n = n.clone();
    let mut result = 1i32;
    if n.is_negative() {
        n = -n;
        if a.is_negative() {
            result = -result;
        }
    }
    if n.is_even() {
        if a.is_even() {
            return 0;
        }
        let e = n.trailing_zeros().unwrap_or(0);
        n >>= e;
        if e % 2 == 1 {
            // (a/2) supplement: -1 for a = 3, 5 mod 8
            let am8 = a.mod_floor(&BigInt::from(8)).to_u8().unwrap();
            if am8 == 3 || am8 == 5 {
                result = -result;
            }
        }
    }
    // n odd positive from here on; Jacobi loop with reciprocity.
    a = a.mod_floor(&n);
    while !a.is_zero() {
        let e = a.trailing_zeros().unwrap_or(0);
        if e > 0 {
            a >>= e;
            if e % 2 == 1 {
                let nm8 = n.mod_floor(&BigInt::from(8)).to_u8().unwrap();
                if nm8 == 3 || nm8 == 5 {
                    result = -result;
                }
            }
        }
        if a.mod_floor(&BigInt::from(4)).to_u8().unwrap() == 3
            && n.mod_floor(&BigInt::from(4)).to_u8().unwrap() == 3
        {
            result = -result;
        }
        std::mem::swap(&mut a, &mut n);
        a = a.mod_floor(&n);
    }
    if n.is_one() {
        result
    } else {
        0
    }
}

/// Deterministic trial-division primality test; the library works at desk scale.
pub fn is_prime(x: u64) -> bool {
    if x < 2 {
        return false;
    }
    if x % 2 == 0 {
        return x == 2;
    }
    if x % 3 == 0 {
        return x == 3;
    }
    let mut d = 5u64;
    while d.saturating_mul(d) <= x {
        if x % d == 0 || x % (d + 2) == 0 {
            return false;
        }
        d += 6;
    }
    true
}

pub fn is_squarefree(x: u64) -> bool {
    factor_u64(x).iter().all(|&(_, e)| e == 1)
}

/// Prime factorization by trial division, sorted by prime.
pub fn factor_u64(mut x: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    if x < 2 {
        return out;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= x {
        if x % d == 0 {
            let mut e = 0;
            while x % d == 0 {
                x /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if x > 1 {
        out.push((x, 1));
    }
    out
}

/// Iterator over primes, for searches and sieving checks.
pub fn primes_below(bound: u64) -> impl Iterator<Item = u64> {
    (2..bound).filter(|&x| is_prime(x))
}

/// Tiny deterministic PRNG used by randomized drivers; all seeds are explicit.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform in 0..bound (bound > 0).
    pub fn below(&mut self, bound: u64) -> u64 {
        self.next_u64() % bound
    }

    /// Uniform in [lo, hi].
    pub fn range_i64(&mut self, lo: i64, hi: i64) -> i64 {
        lo + (self.below((hi - lo + 1) as u64) as i64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(m: u64) -> QuadField {
        QuadField::new(m).unwrap()
    }

    #[test]
    fn field_construction() {
        assert_eq!(q(1).disc(), -4);
        assert_eq!(q(1).omega_kind(), OmegaKind::PureRoot);
        assert_eq!(q(3).disc(), -3);
        assert_eq!(q(3).omega_kind(), OmegaKind::HalfIntegral);
        assert_eq!(q(5).disc(), -20);
        assert_eq!(q(11).disc(), -11);
        assert!(matches!(QuadField::new(12), Err(Error::NotSquarefree(12))));
        assert!(matches!(QuadField::new(0), Err(Error::NotSquarefree(0))));
    }

    #[test]
    fn norms_and_traces() {
        // Q(i): norm(1 + 2i) = 5
        let f = q(1);
        let x = KElem::from_coords(f, 1, 2);
        assert_eq!(x.norm(), BigRational::from(BigInt::from(5)));
        // Q(sqrt(-3)): omega = (1+sqrt(-3))/2 has norm 1
        let f3 = q(3);
        assert_eq!(KElem::omega(f3).norm(), BigRational::from(BigInt::from(1)));
        // sqrt(d)^2 = d
        for m in [1u64, 2, 3, 5, 7, 11, 15] {
            let f = q(m);
            let s = f.sqrt_disc();
            assert_eq!(
                (&s * &s).as_rational().unwrap(),
                BigRational::from(BigInt::from(f.disc()))
            );
        }
    }

    #[test]
    fn conj_is_involution_and_div() {
        let f = q(5);
        let x = KElem::new_frac(f, BigInt::from(3), BigInt::from(-2), BigInt::from(7)).unwrap();
        assert_eq!(x.conj().conj(), x);
        let y = KElem::from_coords(f, 2, 1);
        let z = x.checked_div(&y).unwrap();
        assert_eq!(&z * &y, x);
        assert!(matches!(
            x.checked_div(&KElem::zero(f)),
            Err(Error::DivisionByZero)
        ));
        let other = KElem::one(q(2));
        assert!(matches!(
            x.ensure_same_field(&other),
            Err(Error::MixedFields)
        ));
    }

    #[test]
    fn chi_values() {
        let qi = q(1);
        assert_eq!(qi.chi_i64(2), 0);
        assert_eq!(qi.chi_i64(3), -1);
        assert_eq!(q(5).chi_i64(3), 1);
        assert_eq!(q(11).chi_i64(2), -1);
    }

    #[test]
    fn chi_multiplicative_and_periodic() {
        for m in [1u64, 2, 3, 5, 11, 23] {
            let f = q(m);
            let d = f.disc().unsigned_abs() as i64;
            for a in 1..60i64 {
                for b in 1..60i64 {
                    if num_integer::gcd(a, d) == 1 && num_integer::gcd(b, d) == 1 {
                        assert_eq!(f.chi_i64(a * b), f.chi_i64(a) * f.chi_i64(b));
                    }
                }
                assert_eq!(f.chi_i64(a), f.chi_i64(a + d));
            }
        }
    }

    #[test]
    fn kronecker_against_euler_criterion() {
        // Oracle: for odd prime p, (a/p) = a^((p-1)/2) mod p.
        for p in primes_below(200).filter(|&p| p > 2) {
            for a in -30i64..30 {
                let expect = {
                    let am = a.rem_euclid(p as i64) as u64;
                    if am % p == 0 {
                        0
                    } else {
                        let mut acc = 1u64;
                        for _ in 0..(p - 1) / 2 {
                            acc = acc * am % p;
                        }
                        if acc == 1 {
                            1
                        } else {
                            -1
                        }
                    }
                };
                assert_eq!(
                    kronecker_symbol(&BigInt::from(a), &BigInt::from(p)),
                    expect,
                    "a={a} p={p}"
                );
            }
        }
    }

    #[test]
    fn classify_primes() {
        assert_eq!(q(5).classify_prime(5).unwrap(), PrimeClass::Ramified);
        assert_eq!(q(5).classify_prime(11).unwrap(), PrimeClass::Inert);
        assert_eq!(q(11).classify_prime(2).unwrap(), PrimeClass::Inert);
        assert!(matches!(q(5).classify_prime(6), Err(Error::NotPrime(6))));
        // ramified iff p | d_K
        for m in [1u64, 2, 3, 5, 11] {
            let f = q(m);
            for p in primes_below(1000) {
                let ram = f.disc().unsigned_abs() % p == 0;
                assert_eq!(
                    f.classify_prime(p).unwrap() == PrimeClass::Ramified,
                    ram,
                    "m={m} p={p}"
                );
            }
        }
    }

    #[test]
    fn split_inert_balance() {
        // Rough Chebotarev sanity: split and inert each near half of the
        // unramified primes below 10^4.
        for m in [1u64, 5, 11] {
            let f = q(m);
            let mut split = 0i64;
            let mut inert = 0i64;
            for p in primes_below(10_000) {
                match f.classify_prime(p).unwrap() {
                    PrimeClass::Split => split += 1,
                    PrimeClass::Inert => inert += 1,
                    PrimeClass::Ramified => {}
                }
            }
            let total = split + inert;
            assert!((split - total / 2).abs() <= total / 10, "m={m}");
            assert!((inert - total / 2).abs() <= total / 10, "m={m}");
        }
    }

    #[test]
    fn random_norm_trace_identities() {
        let mut rng = SplitMix64::new(42);
        for m in [1u64, 3, 5, 11] {
            let f = q(m);
            for _ in 0..250 {
                let x = KElem::from_coords(f, rng.range_i64(-50, 50), rng.range_i64(-50, 50));
                let y = KElem::from_coords(f, rng.range_i64(-50, 50), rng.range_i64(-50, 50));
                assert_eq!((&x * &y).norm(), x.norm() * y.norm());
                assert_eq!((&x + &y).trace(), x.trace() + y.trace());
            }
        }
    }

    proptest! {
        #[test]
        fn prop_norm_multiplicative(a1 in -40i64..40, b1 in -40i64..40,
                                    a2 in -40i64..40, b2 in -40i64..40,
                                    m in prop::sample::select(vec![1u64, 2, 3, 5, 7, 11, 23])) {
            let f = q(m);
            let x = KElem::from_coords(f, a1, b1);
            let y = KElem::from_coords(f, a2, b2);
            prop_assert_eq!((&x * &y).norm(), x.norm() * y.norm());
            prop_assert_eq!((&x * &y).conj(), &x.conj() * &y.conj());
        }

        #[test]
        fn prop_inverse(a in -20i64..20, b in -20i64..20, den in 1i64..9,
                        m in prop::sample::select(vec![1u64, 5, 11])) {
            let f = q(m);
            if (a, b) != (0, 0) {
                let x = KElem::new_frac(f, BigInt::from(a), BigInt::from(b), BigInt::from(den)).unwrap();
                prop_assert!( (&x * &x.inv().unwrap()).is_one());
            }
        }
    }

    #[test]
    fn units_of_small_fields() {
        assert_eq!(q(2).units().len(), 2);
        assert_eq!(q(1).units().len(), 4);
        assert_eq!(q(3).units().len(), 6);
        for u in q(3).units() {
            assert_eq!(u.norm(), BigRational::from(BigInt::from(1)));
        }
    }
}
