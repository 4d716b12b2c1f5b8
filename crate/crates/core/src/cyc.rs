//! Exact sums of roots of unity with rational coefficients.
//!
//! A `CycSum` holds an element of Q(zeta_L) reduced against the L-th
//! cyclotomic polynomial, so rationality and vanishing are exact decisions.
//! These carry the phases e^(2 pi i r), r in Q, that appear in single-coset
//! slash images; summing a full coset set cancels every irrational part.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// A rational linear combination of L-th roots of unity in the canonical
/// power basis 1, zeta, ..., zeta^(phi(L) - 1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycSum {
    modulus: u64,
    coeffs: Vec<BigRational>,
}

impl CycSum {
    pub fn zero() -> Self {
        CycSum {
            modulus: 1,
            coeffs: vec![BigRational::zero()],
        }
    }

    pub fn from_rational(r: BigRational) -> Self {
        CycSum {
            modulus: 1,
            coeffs: vec![r],
        }
    }

    /// c * e^(2 pi i r) for rational r.
    pub fn phase(c: BigRational, r: &BigRational) -> Self {
        // Normalize r mod 1 into [0, 1).
        let num = r.numer().mod_floor(r.denom());
        let modulus = r
            .denom()
            .to_biguint()
            .and_then(|d| d.try_into().ok())
            .expect("phase denominator fits u64");
        let mut dense = vec![BigRational::zero(); modulus as usize];
        let idx: u64 = num.to_biguint().unwrap().try_into().unwrap();
        dense[idx as usize] = c;
        CycSum::reduce_dense(modulus, dense)
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    fn reduce_dense(modulus: u64, dense: Vec<BigRational>) -> Self {
        let phi = cyclotomic_poly(modulus);
        let deg = phi.len() - 1;
        let mut c = dense;
        // Polynomial remainder modulo the monic integer polynomial phi.
        for i in (deg..c.len()).rev() {
            if c[i].is_zero() {
                continue;
            }
            let lead = c[i].clone();
            for (k, pk) in phi.iter().enumerate().take(deg) {
                let delta = &lead * BigRational::from(pk.clone());
                c[i - deg + k] -= delta;
            }
            c[i] = BigRational::zero();
        }
        c.truncate(deg.max(1));
        c.resize(deg.max(1), BigRational::zero());
        CycSum {
            modulus,
            coeffs: c,
        }
    }

    fn lift(&self, modulus: u64) -> Vec<BigRational> {
        assert!(modulus % self.modulus == 0);
        let step = (modulus / self.modulus) as usize;
        let mut dense = vec![BigRational::zero(); modulus as usize];
        for (j, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                dense[j * step] += c;
            }
        }
        dense
    }

    pub fn add(&self, other: &CycSum) -> CycSum {
        let modulus = self.modulus.lcm(&other.modulus);
        let mut dense = self.lift(modulus);
        for (d, o) in dense.iter_mut().zip(other.lift(modulus)) {
            *d += o;
        }
        CycSum::reduce_dense(modulus, dense)
    }

    pub fn scale(&self, r: &BigRational) -> CycSum {
        CycSum {
            modulus: self.modulus,
            coeffs: self.coeffs.iter().map(|c| c * r).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn is_rational(&self) -> bool {
        self.coeffs.iter().skip(1).all(|c| c.is_zero())
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        if self.is_rational() {
            Some(self.coeffs[0].clone())
        } else {
            None
        }
    }
}

/// Coefficients of the L-th cyclotomic polynomial, constant term first.
pub fn cyclotomic_poly(l: u64) -> Vec<BigInt> {
    assert!(l >= 1);
    // x^l - 1 divided by the cyclotomic polynomials of the proper divisors.
    let mut num = vec![BigInt::zero(); l as usize + 1];
    num[0] = BigInt::from(-1);
    num[l as usize] = BigInt::one();
    for d in 1..l {
        if l % d == 0 {
            num = poly_div_exact(&num, &cyclotomic_poly(d));
        }
    }
    num
}

fn poly_div_exact(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    let dn = den.len() - 1;
    assert!(den[dn].is_one(), "monic divisor expected");
    let mut rem = num.to_vec();
    let mut quot = vec![BigInt::zero(); num.len() - dn];
    for i in (dn..num.len()).rev() {
        let c = rem[i].clone();
        if c.is_zero() {
            continue;
        }
        quot[i - dn] = c.clone();
        for (k, dk) in den.iter().enumerate() {
            let delta = &c * dk;
            rem[i - dn + k] -= delta;
        }
    }
    assert!(rem.iter().all(|x| x.is_zero()), "non-exact division");
    quot
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn cyclotomic_polys() {
        assert_eq!(cyclotomic_poly(1), vec![BigInt::from(-1), BigInt::from(1)]);
        assert_eq!(cyclotomic_poly(2), vec![BigInt::from(1), BigInt::from(1)]);
        assert_eq!(
            cyclotomic_poly(3),
            vec![BigInt::from(1), BigInt::from(1), BigInt::from(1)]
        );
        assert_eq!(
            cyclotomic_poly(4),
            vec![BigInt::from(1), BigInt::from(0), BigInt::from(1)]
        );
        // phi(12) = 4: x^4 - x^2 + 1
        assert_eq!(
            cyclotomic_poly(12),
            [1i64, 0, -1, 0, 1].map(BigInt::from).to_vec()
        );
    }

    #[test]
    fn root_of_unity_sums() {
        // 1 + zeta_3 + zeta_3^2 = 0
        let s = CycSum::phase(rat(1, 1), &rat(0, 1))
            .add(&CycSum::phase(rat(1, 1), &rat(1, 3)))
            .add(&CycSum::phase(rat(1, 1), &rat(2, 3)));
        assert!(s.is_zero());
        // zeta_4 + zeta_4^3 = 0 but zeta_4 alone is irrational.
        let i = CycSum::phase(rat(1, 1), &rat(1, 4));
        assert!(!i.is_rational());
        assert!(i.add(&CycSum::phase(rat(1, 1), &rat(3, 4))).is_zero());
        // zeta_6 = 1 + zeta_3 in the reduced basis; check via zeta_6^3 = -1.
        let z6 = CycSum::phase(rat(1, 1), &rat(1, 6));
        let z6_3 = CycSum::phase(rat(1, 1), &rat(3, 6));
        assert_eq!(z6_3.as_rational(), Some(rat(-1, 1)));
        assert!(!z6.is_rational());
    }

    #[test]
    fn phases_mod_one_and_mixed_moduli() {
        assert_eq!(
            CycSum::phase(rat(5, 2), &rat(7, 3)),
            CycSum::phase(rat(5, 2), &rat(1, 3))
        );
        assert_eq!(
            CycSum::phase(rat(1, 1), &rat(-1, 3)),
            CycSum::phase(rat(1, 1), &rat(2, 3))
        );
        // (zeta_2) + (zeta_3 + zeta_3^2) = -1 - 1 = -2
        let s = CycSum::phase(rat(1, 1), &rat(1, 2))
            .add(&CycSum::phase(rat(1, 1), &rat(1, 3)))
            .add(&CycSum::phase(rat(1, 1), &rat(2, 3)));
        assert_eq!(s.as_rational(), Some(rat(-2, 1)));
    }

    #[test]
    fn full_character_sums_collapse() {
        // sum_j zeta_L^(t j) = L when L | t and 0 otherwise; this is the
        // cancellation pattern behind full coset sums.
        use crate::field::SplitMix64;
        let mut rng = SplitMix64::new(5);
        for _ in 0..60 {
            let l = 1 + rng.below(24) as i64;
            let t = rng.range_i64(-40, 40);
            let mut s = CycSum::zero();
            for j in 0..l {
                s = s.add(&CycSum::phase(rat(1, 1), &rat(t * j, l)));
            }
            if t.rem_euclid(l) == 0 {
                assert_eq!(s.as_rational(), Some(rat(l, 1)));
            } else {
                assert!(s.is_zero(), "l={l} t={t}");
            }
        }
    }
}
