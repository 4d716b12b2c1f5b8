//! O_K-ideals in two-generator lattice normal form, the class group through
//! reduced binary quadratic forms, class representatives u_j with a common
//! clearing denominator N, and the inert-prime search.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::field::{is_prime, KElem, QuadField};
use crate::zlattice::row_hnf;

/// A nonzero ideal of O_K as the Z-module Z*a + Z*(b + c*omega),
/// with c | a, c | b and 0 <= b < a. The norm is a*c.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IdealHnf {
    field: QuadField,
    a: BigInt,
    b: BigInt,
    c: BigInt,
}

impl IdealHnf {
    /// Normal form of the O_K-module generated by the given elements.
    ///
    /// Generators may be fractional only in the sense of integral KElems;
    /// non-integral generators are rejected.
    pub fn from_generators(field: QuadField, gens: &[KElem]) -> Result<Self> {
        if gens.iter().all(|g| g.is_zero()) {
            return Err(Error::ZeroIdeal);
        }
        let omega = KElem::omega(field);
        let mut rows = Vec::with_capacity(2 * gens.len());
        for g in gens {
            g.ensure_same_field(&KElem::zero(field))?;
            if !g.is_integral() {
                return Err(Error::NotIntegral);
            }
            // Coordinates are stored omega-first so the normal form comes out
            // as {b + c*omega, a}.
            rows.push(vec![g.coord_b().clone(), g.coord_a().clone()]);
            let wg = &omega * g;
            rows.push(vec![wg.coord_b().clone(), wg.coord_a().clone()]);
        }
        let h = row_hnf(&rows);
        if h.len() != 2 {
            return Err(Error::ZeroIdeal);
        }
        let ideal = IdealHnf {
            field,
            c: h[0][0].clone(),
            b: h[0][1].clone(),
            a: h[1][1].clone(),
        };
        debug_assert!(h[1][0].is_zero());
        debug_assert!(ideal.is_valid());
        Ok(ideal)
    }

    pub fn principal(field: QuadField, g: &KElem) -> Result<Self> {
        IdealHnf::from_generators(field, std::slice::from_ref(g))
    }

    pub fn unit_ideal(field: QuadField) -> Self {
        IdealHnf {
            field,
            a: BigInt::one(),
            b: BigInt::zero(),
            c: BigInt::one(),
        }
    }

    pub fn field(&self) -> QuadField {
        self.field
    }

    pub fn a(&self) -> &BigInt {
        &self.a
    }

    pub fn b(&self) -> &BigInt {
        &self.b
    }

    pub fn c(&self) -> &BigInt {
        &self.c
    }

    /// The two lattice generators a and b + c*omega.
    pub fn generators(&self) -> (KElem, KElem) {
        (
            KElem::from_bigint(self.field, self.a.clone()),
            KElem::new(self.field, self.b.clone(), self.c.clone()),
        )
    }

    pub fn norm(&self) -> BigInt {
        &self.a * &self.c
    }

    /// Check the normal-form invariants and closedness under omega.
    pub fn is_valid(&self) -> bool {
        if !self.a.is_positive() || !self.c.is_positive() {
            return false;
        }
        if self.b.is_negative() || self.b >= self.a {
            return false;
        }
        if !(&self.a % &self.c).is_zero() || !(&self.b % &self.c).is_zero() {
            return false;
        }
        let omega = KElem::omega(self.field);
        let (g1, g2) = self.generators();
        self.contains(&(&omega * &g1)) && self.contains(&(&omega * &g2))
    }

    pub fn contains(&self, x: &KElem) -> bool {
        if !x.is_integral() {
            return false;
        }
        // Solve x = s*(b + c*omega) + t*a in Z.
        let (s, r) = x.coord_b().div_rem(&self.c);
        if !r.is_zero() {
            return false;
        }
        (x.coord_a() - s * &self.b).mod_floor(&self.a).is_zero()
    }

    pub fn mul(&self, other: &IdealHnf) -> Result<IdealHnf> {
        if self.field != other.field {
            return Err(Error::MixedFields);
        }
        let (x1, x2) = self.generators();
        let (y1, y2) = other.generators();
        IdealHnf::from_generators(
            self.field,
            &[&x1 * &y1, &x1 * &y2, &x2 * &y1, &x2 * &y2],
        )
    }

    /// Ideal sum, the gcd of the two ideals.
    pub fn sum(&self, other: &IdealHnf) -> Result<IdealHnf> {
        if self.field != other.field {
            return Err(Error::MixedFields);
        }
        let (x1, x2) = self.generators();
        let (y1, y2) = other.generators();
        IdealHnf::from_generators(self.field, &[x1, x2, y1, y2])
    }

    /// Whether self divides other, i.e. other is contained in self.
    pub fn divides(&self, other: &IdealHnf) -> Result<bool> {
        if self.field != other.field {
            return Err(Error::MixedFields);
        }
        let (g1, g2) = other.generators();
        Ok(self.contains(&g1) && self.contains(&g2))
    }

    pub fn conj(&self) -> IdealHnf {
        let (g1, g2) = self.generators();
        IdealHnf::from_generators(self.field, &[g1.conj(), g2.conj()])
            .expect("conjugate of nonzero ideal")
    }

    pub fn is_coprime_to(&self, other: &IdealHnf) -> Result<bool> {
        Ok(self.sum(other)? == IdealHnf::unit_ideal(self.field))
    }

    /// Divide out a positive rational integer factor dividing the whole ideal.
    pub fn divide_rational(&self, r: &BigInt) -> Result<IdealHnf> {
        if !r.is_positive() {
            return Err(Error::Domain("rational divisor must be positive".into()));
        }
        if !(&self.a % r).is_zero() || !(&self.b % r).is_zero() || !(&self.c % r).is_zero() {
            return Err(Error::Domain("ideal is not divisible by that integer".into()));
        }
        Ok(IdealHnf {
            field: self.field,
            a: &self.a / r,
            b: &self.b / r,
            c: &self.c / r,
        })
    }

    /// The largest rational integer g with the ideal contained in g*O_K.
    /// In normal form this is the coefficient c.
    pub fn rational_content(&self) -> BigInt {
        self.c.clone()
    }

    /// Generator r when the ideal equals r*O_K for a positive integer r.
    pub fn as_rational_multiple(&self) -> Option<BigInt> {
        if self.b.is_zero() && self.a == self.c {
            Some(self.a.clone())
        } else {
            None
        }
    }
}

impl std::fmt::Display for IdealHnf {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "<{}, {}+{}w>", self.a, self.b, self.c)
    }
}

/// A primitive reduced positive-definite binary quadratic form of
/// discriminant d_K.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QuadForm {
    pub alpha: i64,
    pub beta: i64,
    pub gamma: i64,
}

impl QuadForm {
    pub fn disc(&self) -> i64 {
        self.beta * self.beta - 4 * self.alpha * self.gamma
    }

    pub fn is_reduced(&self) -> bool {
        let (a, b, c) = (self.alpha, self.beta, self.gamma);
        b.abs() <= a && a <= c && (b >= 0 || (b.abs() != a && a != c))
    }

    pub fn is_primitive(&self) -> bool {
        num_integer::gcd(num_integer::gcd(self.alpha, self.beta), self.gamma) == 1
    }

    /// Reduce to the canonical representative of the proper equivalence class.
    pub fn reduce(&self) -> QuadForm {
        let d = self.disc();
        assert!(d < 0 && self.alpha > 0, "positive definite form expected");
        let (mut a, mut b, mut c) = (self.alpha, self.beta, self.gamma);
        loop {
            // Normalize b into (-a, a].
            if b > a || b <= -a {
                let two_a = 2 * a;
                let mut r = b.rem_euclid(two_a);
                if r > a {
                    r -= two_a;
                }
                b = r;
                c = (b * b - d) / (4 * a);
            }
            if a > c {
                let (na, nb, nc) = (c, -b, a);
                a = na;
                b = nb;
                c = nc;
                continue;
            }
            break;
        }
        if b < 0 && (a == c || -b == a) {
            b = -b;
        }
        let out = QuadForm {
            alpha: a,
            beta: b,
            gamma: c,
        };
        debug_assert!(out.is_reduced() && out.disc() == d);
        out
    }
}

/// All primitive reduced forms of discriminant d_K, principal form first.
/// The count is the class number.
pub fn reduced_forms(field: QuadField) -> Vec<QuadForm> {
    let d = field.disc();
    let mut out = Vec::new();
    let mut alpha = 1i64;
    while 3 * alpha * alpha <= -d {
        for beta in -alpha..=alpha {
            if (beta * beta - d) % (4 * alpha) != 0 {
                continue;
            }
            let gamma = (beta * beta - d) / (4 * alpha);
            let f = QuadForm {
                alpha,
                beta,
                gamma,
            };
            if f.is_reduced() && f.is_primitive() {
                out.push(f);
            }
        }
        alpha += 1;
    }
    out.sort();
    // Lexicographic order puts the unique alpha = 1 (principal) form first.
    debug_assert_eq!(out[0].alpha, 1);
    out
}

/// One ideal-class representative: the generator u with <u, 1> in the class
/// of `form`, and the minimal positive integer clearing u into O_K.
#[derive(Debug, Clone)]
pub struct ClassRep {
    pub u: KElem,
    pub form: QuadForm,
    pub denominator: BigInt,
}

/// Representatives u_j of every ideal class, produced from the reduced forms,
/// together with N = N_1 * ... * N_h such that N * u_j is integral for all j.
/// With an avoided prime p the construction guarantees p does not divide N.
#[derive(Debug, Clone)]
pub struct ClassRepSet {
    pub field: QuadField,
    pub reps: Vec<ClassRep>,
    pub common_denominator: BigInt,
    pub avoided_prime: Option<u64>,
}

impl ClassRepSet {
    pub fn class_number(&self) -> usize {
        self.reps.len()
    }
}

/// u = (beta + sqrt(d_K)) / (2 alpha) as an exact field element.
fn rep_from_form(field: QuadField, f: &QuadForm) -> KElem {
    let sqrt_d = field.sqrt_disc();
    let num = &KElem::from_int(field, f.beta) + &sqrt_d;
    KElem::new_frac(
        field,
        num.coord_a().clone(),
        num.coord_b().clone(),
        BigInt::from(2 * f.alpha),
    )
    .expect("nonzero denominator")
}

/// Representatives of all ideal classes. With `avoid_p` set (an odd prime
/// dividing d_K, d_K not -4 or -8) the representatives are adjusted so the
/// common denominator N is coprime to p.
pub fn class_representatives(field: QuadField, avoid_p: Option<u64>) -> Result<ClassRepSet> {
    if let Some(p) = avoid_p {
        if field.disc() == -4 || field.disc() == -8 {
            return Err(Error::Hypothesis(format!(
                "avoided prime requires d_K outside {{-4, -8}}, got d_K = {}",
                field.disc()
            )));
        }
        if p % 2 == 0 || !is_prime(p) {
            return Err(Error::Hypothesis(format!("avoided prime {p} must be odd")));
        }
        if field.disc().unsigned_abs() % p != 0 {
            return Err(Error::Hypothesis(format!(
                "avoided prime {p} must divide d_K = {}",
                field.disc()
            )));
        }
    }
    let forms = reduced_forms(field);
    let mut reps = Vec::with_capacity(forms.len());
    let mut total = BigInt::one();
    for f in &forms {
        let (u, nj) = match avoid_p {
            Some(p) if f.alpha % (p as i64) == 0 => {
                // Swap to u* = (beta - sqrt(d)) / (2 gamma), an equal class,
                // whose clearing factor (beta^2 - d)/p avoids p.
                let sqrt_d = field.sqrt_disc();
                let num = &KElem::from_int(field, f.beta) - &sqrt_d;
                let u = KElem::new_frac(
                    field,
                    num.coord_a().clone(),
                    num.coord_b().clone(),
                    BigInt::from(2 * f.gamma),
                )?;
                let nj = BigInt::from((f.beta * f.beta - field.disc()) / p as i64);
                (u, nj)
            }
            _ => {
                let u = rep_from_form(field, f);
                // Minimal N with N*u integral is the reduced denominator.
                let nj = u.denom().clone();
                (u, nj)
            }
        };
        debug_assert!((&u.scale(&num_rational::BigRational::from(nj.clone()))).is_integral());
        total *= &nj;
        reps.push(ClassRep {
            u,
            form: *f,
            denominator: nj,
        });
    }
    if let Some(p) = avoid_p {
        debug_assert!(!(&total % BigInt::from(p)).is_zero());
    }
    Ok(ClassRepSet {
        field,
        reps,
        common_denominator: total,
        avoided_prime: avoid_p,
    })
}

/// The ideal <u, 1> with denominators cleared, i.e. <den*u, den>.
pub fn cleared_rep_ideal(field: QuadField, u: &KElem) -> Result<IdealHnf> {
    let den = u.denom().clone();
    let scaled = u.scale(&num_rational::BigRational::from(den.clone()));
    IdealHnf::from_generators(field, &[scaled, KElem::from_bigint(field, den)])
}

/// 1-based index of the ideal class, matching the order of `reduced_forms`.
/// Principal ideals map to 1.
pub fn ideal_class_index(ideal: &IdealHnf) -> Result<usize> {
    let field = ideal.field();
    let t = BigInt::from(field.omega_trace());
    // Form attached to the lattice basis {a, b + c*omega}:
    //   (norm(a)/N, trace(a * conj(b + c*omega))/N, norm(b + c*omega)/N)
    // with N = a*c the ideal norm.
    let n = ideal.norm();
    let alpha = ideal.a() / ideal.c();
    let beta_num = BigInt::from(2) * ideal.b() + &t * ideal.c();
    let (beta, r) = beta_num.div_rem(ideal.c());
    debug_assert!(r.is_zero());
    let w = KElem::new(field, ideal.b().clone(), ideal.c().clone());
    let gamma_num = w.norm_int().expect("integral generator");
    let (gamma, r) = gamma_num.div_rem(&n);
    if !r.is_zero() {
        return Err(Error::Consistency("ideal norm does not divide form term".into()));
    }
    let form = QuadForm {
        alpha: alpha.to_i64().ok_or_else(|| Error::Domain("form overflow".into()))?,
        beta: beta.to_i64().ok_or_else(|| Error::Domain("form overflow".into()))?,
        gamma: gamma.to_i64().ok_or_else(|| Error::Domain("form overflow".into()))?,
    };
    debug_assert_eq!(form.disc(), field.disc());
    let reduced = form.reduce();
    let forms = reduced_forms(field);
    forms
        .iter()
        .position(|f| *f == reduced)
        .map(|i| i + 1)
        .ok_or_else(|| Error::Consistency("reduced form not found in class list".into()))
}

/// Smallest prime p <= search_bound with p = 1 mod `modulus` and chi(p) = -1.
pub fn find_inert_prime(field: QuadField, modulus: u64, search_bound: u64) -> Result<u64> {
    assert!(modulus >= 1);
    for p in crate::field::primes_below(search_bound + 1) {
        if p % modulus == 1 % modulus && field.chi(&BigInt::from(p)) == -1 {
            return Ok(p);
        }
    }
    // Existence is only guaranteed when d_K is not -4 or -8 and some odd
    // prime divisor of d_K avoids the modulus; report how the request sits
    // against those hypotheses.
    let d = field.disc();
    let odd_divisor = crate::field::factor_u64(d.unsigned_abs())
        .iter()
        .any(|&(p, _)| p % 2 == 1 && modulus % p != 0);
    Err(Error::SearchExhausted(format!(
        "no inert prime = 1 mod {modulus} below {search_bound} in Q(sqrt({})); \
existence hypotheses: d_K = {d} not in {{-4,-8}}: {}; odd prime divisor of d_K \
coprime to the modulus: {}",
        -(field.m() as i64),
        d != -4 && d != -8,
        odd_divisor
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::SplitMix64;
    use num_rational::BigRational;

    fn q(m: u64) -> QuadField {
        QuadField::new(m).unwrap()
    }

    fn elem(f: QuadField, a: i64, b: i64) -> KElem {
        KElem::from_coords(f, a, b)
    }

    #[test]
    fn ideal_normal_forms() {
        let f5 = q(5);
        // <2, 1 + sqrt(-5)>
        let p2 = IdealHnf::from_generators(f5, &[elem(f5, 2, 0), elem(f5, 1, 1)]).unwrap();
        assert_eq!((p2.a(), p2.b(), p2.c()), (&BigInt::from(2), &BigInt::from(1), &BigInt::from(1)));
        assert_eq!(p2.norm(), BigInt::from(2));
        // unit ideal
        for m in [1u64, 5, 11] {
            let f = q(m);
            let one = IdealHnf::from_generators(f, &[KElem::one(f)]).unwrap();
            assert_eq!(one, IdealHnf::unit_ideal(f));
        }
        // 3 O_K over Q(i)
        let fi = q(1);
        let i3 = IdealHnf::principal(fi, &elem(fi, 3, 0)).unwrap();
        assert_eq!((i3.a(), i3.b(), i3.c()), (&BigInt::from(3), &BigInt::from(0), &BigInt::from(3)));
        assert!(matches!(
            IdealHnf::from_generators(fi, &[KElem::zero(fi)]),
            Err(Error::ZeroIdeal)
        ));
    }

    #[test]
    fn ideal_arithmetic() {
        let f5 = q(5);
        let p2 = IdealHnf::from_generators(f5, &[elem(f5, 2, 0), elem(f5, 1, 1)]).unwrap();
        // The ramified prime above 2 squares to (2).
        let sq = p2.mul(&p2).unwrap();
        assert_eq!(sq, IdealHnf::principal(f5, &elem(f5, 2, 0)).unwrap());
        // Unit identity and norm multiplicativity on a fixed example.
        assert_eq!(p2.mul(&IdealHnf::unit_ideal(f5)).unwrap(), p2);
        assert_eq!(sq.norm(), BigInt::from(4));
        assert!(p2.divides(&sq).unwrap());
        assert!(!sq.divides(&p2).unwrap());
    }

    #[test]
    fn ideal_products_random() {
        let mut rng = SplitMix64::new(11);
        for m in [5u64, 23] {
            let f = q(m);
            let random_ideal = |rng: &mut SplitMix64| loop {
                let g1 = elem(f, rng.range_i64(-9, 9), rng.range_i64(-9, 9));
                let g2 = elem(f, rng.range_i64(-9, 9), rng.range_i64(-9, 9));
                if !g1.is_zero() || !g2.is_zero() {
                    return IdealHnf::from_generators(f, &[g1, g2]).unwrap();
                }
            };
            for _ in 0..100 {
                let x = random_ideal(&mut rng);
                let y = random_ideal(&mut rng);
                let z = random_ideal(&mut rng);
                assert_eq!(x.mul(&y).unwrap(), y.mul(&x).unwrap());
                assert_eq!(
                    x.mul(&y).unwrap().mul(&z).unwrap(),
                    x.mul(&y.mul(&z).unwrap()).unwrap()
                );
                assert_eq!(x.mul(&y).unwrap().norm(), x.norm() * y.norm());
                assert!(x.mul(&y).unwrap().is_valid());
            }
        }
    }

    #[test]
    fn reduced_form_lists() {
        let forms5 = reduced_forms(q(5));
        assert_eq!(
            forms5,
            vec![
                QuadForm { alpha: 1, beta: 0, gamma: 5 },
                QuadForm { alpha: 2, beta: 2, gamma: 3 }
            ]
        );
        assert_eq!(reduced_forms(q(1)), vec![QuadForm { alpha: 1, beta: 0, gamma: 1 }]);
        assert_eq!(reduced_forms(q(23)).len(), 3);
        for m in [1u64, 2, 3, 5, 7, 11, 15, 23, 47] {
            let f = q(m);
            let forms = reduced_forms(f);
            for fm in &forms {
                assert_eq!(fm.disc(), f.disc());
                assert!(fm.is_reduced() && fm.is_primitive());
            }
            let mut dedup = forms.clone();
            dedup.dedup();
            assert_eq!(dedup.len(), forms.len());
        }
    }

    #[test]
    fn class_reps_basic() {
        let f5 = q(5);
        let set = class_representatives(f5, None).unwrap();
        assert_eq!(set.class_number(), 2);
        // u_2 = (2 + sqrt(-20)) / 4 = (1 + sqrt(-5)) / 2
        let u2 = &set.reps[1].u;
        assert_eq!(u2, &KElem::new_frac(f5, BigInt::from(1), BigInt::from(1), BigInt::from(2)).unwrap());
        assert_eq!(set.common_denominator, BigInt::from(2));

        let with_avoid = class_representatives(f5, Some(5)).unwrap();
        assert_eq!(with_avoid.common_denominator, BigInt::from(2));
        assert!(!(&with_avoid.common_denominator % BigInt::from(5)).is_zero());

        let f11 = q(11);
        let set = class_representatives(f11, None).unwrap();
        assert_eq!(set.class_number(), 1);
        assert_eq!(set.common_denominator, BigInt::one());
        assert!(set.reps[0].u.is_integral());
    }

    #[test]
    fn class_reps_hypotheses() {
        assert!(matches!(
            class_representatives(q(1), Some(3)),
            Err(Error::Hypothesis(_))
        ));
        assert!(matches!(
            class_representatives(q(2), Some(3)),
            Err(Error::Hypothesis(_))
        ));
        assert!(matches!(
            class_representatives(q(5), Some(2)),
            Err(Error::Hypothesis(_))
        ));
        assert!(matches!(
            class_representatives(q(5), Some(3)),
            Err(Error::Hypothesis(_))
        ));
    }

    #[test]
    fn class_reps_swap_case() {
        // Discriminants with an odd ramified prime dividing some alpha_j.
        for (m, p) in [(15u64, 3u64), (15, 5), (23, 23), (5, 5), (35, 5), (35, 7)] {
            let f = q(m);
            let set = class_representatives(f, Some(p)).unwrap();
            assert!(!(&set.common_denominator % BigInt::from(p)).is_zero(), "m={m} p={p}");
            for rep in &set.reps {
                let cleared = rep
                    .u
                    .scale(&BigRational::from(set.common_denominator.clone()));
                assert!(cleared.is_integral(), "m={m} p={p}");
            }
        }
    }

    #[test]
    fn class_indexing() {
        let f5 = q(5);
        let seven = IdealHnf::principal(f5, &elem(f5, 7, 0)).unwrap();
        assert_eq!(ideal_class_index(&seven).unwrap(), 1);
        let p2 = IdealHnf::from_generators(f5, &[elem(f5, 2, 0), elem(f5, 1, 1)]).unwrap();
        assert_eq!(ideal_class_index(&p2).unwrap(), 2);
        let p3 = IdealHnf::from_generators(f5, &[elem(f5, 3, 0), elem(f5, 1, 1)]).unwrap();
        assert_eq!(ideal_class_index(&p3).unwrap(), 2);
    }

    #[test]
    fn reps_index_consistency() {
        // Each representative's cleared ideal lands in its own class slot.
        for m in [1u64, 2, 5, 11, 23, 47] {
            let f = q(m);
            let set = class_representatives(f, None).unwrap();
            for (j, rep) in set.reps.iter().enumerate() {
                let ideal = cleared_rep_ideal(f, &rep.u).unwrap();
                assert_eq!(ideal_class_index(&ideal).unwrap(), j + 1, "m={m} j={j}");
            }
        }
    }

    #[test]
    fn inert_prime_search() {
        let f5 = q(5);
        assert_eq!(find_inert_prime(f5, 4, 1000).unwrap(), 13);
        assert_eq!(find_inert_prime(q(11), 1, 1000).unwrap(), 2);
        assert_eq!(find_inert_prime(q(1), 1, 1000).unwrap(), 3);
        let p = find_inert_prime(f5, 6, 1000).unwrap();
        assert_eq!(p % 6, 1);
        assert_eq!(f5.chi(&BigInt::from(p)), -1);
        assert!(matches!(
            find_inert_prime(f5, 4, 12),
            Err(Error::SearchExhausted(_))
        ));
    }
}
