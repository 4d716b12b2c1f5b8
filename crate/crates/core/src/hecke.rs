//! The inert part of the Hecke algebra of the Hermitian modular group:
//! canonical elementary-divisor keys for double cosets, right-coset
//! enumeration in block-triangular shape, generators, products, the
//! degree-lowering homomorphism, and the splitting of determinantal chains
//! into inert-rational and complementary parts.
//!
//! Throughout, q is a product of inert primes. In that range determinantal
//! divisor ideals are generated by positive integers, so the elementary
//! divisor chain is a complete double-coset invariant and every right coset
//! has a representative (A B; 0 D) with D upper triangular, positive integer
//! diagonal dividing q, and A = q * conj(D)^(-tr).

use std::collections::{BTreeMap, HashMap, HashSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::field::{factor_u64, KElem, QuadField};
use crate::ideal::IdealHnf;
use crate::matrix::{hermitian_basis, modular_generators, DetDivChain, MatK, RowKey};
use crate::zlattice::{left_kernel, row_hnf, solve_left};

/// Default guard on enumeration size.
pub const DEFAULT_ENUM_CAP: usize = 1_000_000;

/// Canonical invariant of a double coset in the inert part: the divisors
/// a_1, ..., a_n, d_1, ..., d_n of the unique diagonal representative, with
/// a_1 | ... | a_n | d_n | ... | d_1 and a_j * d_j = q.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DoubleCosetKey {
    n: usize,
    divisors: Vec<BigInt>,
}

impl DoubleCosetKey {
    pub fn new(n: usize, divisors: Vec<BigInt>) -> Result<Self> {
        if divisors.len() != 2 * n || n == 0 {
            return Err(Error::Dimension(format!(
                "expected {} divisors, got {}",
                2 * n,
                divisors.len()
            )));
        }
        if divisors.iter().any(|d| !d.is_positive()) {
            return Err(Error::Domain("divisors must be positive".into()));
        }
        let key = DoubleCosetKey { n, divisors };
        let q = key.q();
        for j in 0..n {
            if &key.divisors[j] * &key.divisors[n + j] != q {
                return Err(Error::Domain(
                    "divisor products a_j * d_j must all equal the similitude".into(),
                ));
            }
        }
        // a_1 | ... | a_n | d_n | ... | d_1
        let seq = key.elementary_divisors();
        for w in seq.windows(2) {
            if !(&w[1] % &w[0]).is_zero() {
                return Err(Error::Domain("divisor chain is not a divisibility chain".into()));
            }
        }
        Ok(key)
    }

    pub fn from_ints(n: usize, divisors: &[i64]) -> Result<Self> {
        DoubleCosetKey::new(n, divisors.iter().map(|&x| BigInt::from(x)).collect())
    }

    pub fn identity(n: usize) -> Self {
        DoubleCosetKey {
            n,
            divisors: vec![BigInt::one(); 2 * n],
        }
    }

    /// Key of the generator with representative diag(1,...,1, p,...,p).
    pub fn generator_p(n: usize, p: u64) -> Self {
        let mut divisors = vec![BigInt::one(); n];
        divisors.extend(std::iter::repeat(BigInt::from(p)).take(n));
        DoubleCosetKey { n, divisors }
    }

    /// Key of the similitude-p^2 generator with j leading ones:
    /// diag(1 x j, p x (n-j), p^2 x j, p x (n-j)).
    pub fn generator_p2(n: usize, p: u64, j: usize) -> Result<Self> {
        if j >= n {
            return Err(Error::Domain(format!("generator index {j} out of range")));
        }
        let p = BigInt::from(p);
        let p2 = &p * &p;
        let mut divisors = Vec::with_capacity(2 * n);
        divisors.extend(std::iter::repeat(BigInt::one()).take(j));
        divisors.extend(std::iter::repeat(p.clone()).take(n - j));
        divisors.extend(std::iter::repeat(p2).take(j));
        divisors.extend(std::iter::repeat(p).take(n - j));
        DoubleCosetKey::new(n, divisors)
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn divisors(&self) -> &[BigInt] {
        &self.divisors
    }

    /// The common similitude a_j * d_j.
    pub fn q(&self) -> BigInt {
        &self.divisors[0] * &self.divisors[self.n]
    }

    /// The divisors in divisibility order a_1, ..., a_n, d_n, ..., d_1.
    pub fn elementary_divisors(&self) -> Vec<BigInt> {
        let mut seq: Vec<BigInt> = self.divisors[..self.n].to_vec();
        seq.extend(self.divisors[self.n..].iter().rev().cloned());
        seq
    }

    /// The unique diagonal representative of the double coset.
    pub fn diagonal_representative(&self, field: QuadField) -> MatK {
        let entries: Vec<KElem> = self
            .divisors
            .iter()
            .map(|d| KElem::from_bigint(field, d.clone()))
            .collect();
        MatK::diag(field, &entries)
    }

    /// Reject similitudes with split or ramified prime factors.
    pub fn ensure_inert(&self, field: QuadField) -> Result<Vec<(u64, u32)>> {
        let q = self.q();
        ensure_inert_similitude(field, &q)
    }

    /// Restriction to one prime: the p-power parts of every divisor.
    pub fn p_part(&self, p: u64) -> DoubleCosetKey {
        let divisors = self
            .divisors
            .iter()
            .map(|d| p_power_part(d, p))
            .collect();
        DoubleCosetKey {
            n: self.n,
            divisors,
        }
    }
}

impl std::fmt::Display for DoubleCosetKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let strs: Vec<String> = self.divisors.iter().map(|d| d.to_string()).collect();
        write!(f, "({})", strs.join(","))
    }
}

fn p_power_part(x: &BigInt, p: u64) -> BigInt {
    let p = BigInt::from(p);
    let mut out = BigInt::one();
    let mut rest = x.clone();
    while (&rest % &p).is_zero() {
        rest /= &p;
        out *= &p;
    }
    out
}

/// Factor q and require all primes inert; scope error otherwise.
pub fn ensure_inert_similitude(field: QuadField, q: &BigInt) -> Result<Vec<(u64, u32)>> {
    if !q.is_positive() {
        return Err(Error::Domain("similitude must be positive".into()));
    }
    let qu = q
        .to_u64()
        .ok_or_else(|| Error::Domain("similitude too large to factor".into()))?;
    let factors = factor_u64(qu);
    for &(p, _) in &factors {
        if !field.is_inert(p) {
            return Err(Error::Scope(format!(
                "similitude {q} contains the prime {p}, which is not inert in Q(sqrt(-{}))",
                field.m()
            )));
        }
    }
    Ok(factors)
}

/// Canonical double-coset key of an integral similitude whose factor is a
/// product of inert primes: compute the determinantal chain, read off its
/// rational generators, and form consecutive quotients.
pub fn canonical_form(field: QuadField, m: &MatK) -> Result<DoubleCosetKey> {
    if m.field() != field {
        return Err(Error::MixedFields);
    }
    let q = m.similitude_factor()?.ok_or(Error::NotSimilitude)?;
    ensure_inert_similitude(field, &q)?;
    let dim = m.rows();
    let n = dim / 2;
    let chain = m.detdiv_chain(dim)?;
    if chain.rank() != dim {
        return Err(Error::Consistency("similitude chain is not full rank".into()));
    }
    let mut prev = BigInt::one();
    let mut elem = Vec::with_capacity(dim);
    for ideal in &chain.chain {
        let r = ideal.as_rational_multiple().ok_or_else(|| {
            Error::Consistency("determinantal divisor of an inert similitude is not rational".into())
        })?;
        let (e, rem) = r.div_rem(&prev);
        if !rem.is_zero() {
            return Err(Error::Consistency("determinantal chain is not a divisor chain".into()));
        }
        elem.push(e);
        prev = r;
    }
    let mut divisors = elem[..n].to_vec();
    divisors.extend(elem[n..].iter().rev().cloned());
    let key = DoubleCosetKey::new(n, divisors)?;
    if key.q() != q {
        return Err(Error::Consistency(
            "elementary divisors do not pair up to the similitude".into(),
        ));
    }
    Ok(key)
}

/// A formal rational combination of double cosets of one degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeckeElement {
    field: QuadField,
    n: usize,
    terms: BTreeMap<DoubleCosetKey, BigRational>,
}

impl HeckeElement {
    pub fn zero(field: QuadField, n: usize) -> Self {
        HeckeElement {
            field,
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_key(field: QuadField, key: DoubleCosetKey) -> Result<Self> {
        key.ensure_inert(field)?;
        let n = key.degree();
        let mut terms = BTreeMap::new();
        terms.insert(key, BigRational::one());
        Ok(HeckeElement { field, n, terms })
    }

    pub fn identity(field: QuadField, n: usize) -> Self {
        HeckeElement::from_key(field, DoubleCosetKey::identity(n)).expect("identity key")
    }

    /// T_n(p), the double coset of diag(1,...,1, p,...,p).
    pub fn generator_p(field: QuadField, n: usize, p: u64) -> Result<Self> {
        if !field.is_inert(p) {
            return Err(Error::Scope(format!("{p} is not inert")));
        }
        HeckeElement::from_key(field, DoubleCosetKey::generator_p(n, p))
    }

    /// T_{n,j}(p^2) for j = 0, ..., n-1.
    pub fn generator_p2(field: QuadField, n: usize, p: u64, j: usize) -> Result<Self> {
        if !field.is_inert(p) {
            return Err(Error::Scope(format!("{p} is not inert")));
        }
        HeckeElement::from_key(field, DoubleCosetKey::generator_p2(n, p, j)?)
    }

    pub fn field(&self) -> QuadField {
        self.field
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &BTreeMap<DoubleCosetKey, BigRational> {
        &self.terms
    }

    pub fn add_term(&mut self, key: DoubleCosetKey, coeff: BigRational) {
        let entry = self.terms.entry(key).or_insert_with(BigRational::zero);
        *entry += coeff;
        self.prune();
    }

    pub fn scale(&self, r: &BigRational) -> HeckeElement {
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            *v *= r;
        }
        out.prune();
        out
    }

    pub fn add(&self, other: &HeckeElement) -> Result<HeckeElement> {
        if self.field != other.field || self.n != other.n {
            return Err(Error::Dimension("element degree or field mismatch".into()));
        }
        let mut out = self.clone();
        for (k, v) in &other.terms {
            out.add_term(k.clone(), v.clone());
        }
        Ok(out)
    }

    fn prune(&mut self) {
        self.terms.retain(|_, v| !v.is_zero());
    }
}

/// Full generator list for the degree-n, prime-p component:
/// T_n(p) followed by T_{n,j}(p^2), j = 0, ..., n-1.
pub fn generators(field: QuadField, n: usize, p: u64) -> Result<Vec<HeckeElement>> {
    let mut out = vec![HeckeElement::generator_p(field, n, p)?];
    for j in 0..n {
        out.push(HeckeElement::generator_p2(field, n, p, j)?);
    }
    Ok(out)
}

/// The full set of right-coset representatives of one double coset, in the
/// block-triangular shape (A B; 0 D).
#[derive(Debug, Clone)]
pub struct RightCosetSet {
    pub field: QuadField,
    pub key: DoubleCosetKey,
    pub reps: Vec<MatK>,
}

impl RightCosetSet {
    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    pub fn rep_keys(&self) -> Vec<RowKey> {
        self.reps
            .iter()
            .map(|m| m.row_lattice_key_unchecked())
            .collect()
    }
}

/// Enumerate the right cosets of the double coset with the given key, whose
/// similitude must be a power of a single inert prime. Multi-prime keys are
/// produced through products of their prime-power parts instead.
pub fn enumerate_right_cosets(
    field: QuadField,
    key: &DoubleCosetKey,
    cap: usize,
) -> Result<RightCosetSet> {
    let factors = key.ensure_inert(field)?;
    if factors.len() > 1 {
        return Err(Error::Scope(format!(
            "similitude {} is not a prime power; compose prime-power cosets through products",
            key.q()
        )));
    }
    let (p, l) = factors.first().copied().unwrap_or((2, 0));
    let n = key.degree();
    let q = key.q();
    let q_elem = KElem::from_bigint(field, q.clone());

    let mut seen: HashMap<RowKey, usize> = HashMap::new();
    let mut reps: Vec<MatK> = Vec::new();
    let mut candidates = 0usize;

    for d in triangular_modules(field, n, p, l)? {
        // A = q * conj(D)^(-tr); integrality encodes q O^n inside the row
        // module of D.
        let a = d
            .inverse()?
            .conj_transpose()
            .scale_elem(&q_elem);
        if !a.is_integral() {
            continue;
        }
        let residues = translation_residues(field, n, &d, cap, &mut candidates)?;
        let zero = MatK::zeros(field, n, n);
        for b in residues {
            let m = MatK::from_blocks(&a, &b, &zero, &d)?;
            debug_assert_eq!(m.similitude_factor()?, Some(q.clone()));
            if canonical_form(field, &m)? != *key {
                continue;
            }
            let rk = m.row_lattice_key_unchecked();
            if seen.insert(rk, reps.len()).is_none() {
                reps.push(m);
            } else {
                debug_assert!(false, "duplicate right coset in enumeration");
            }
        }
    }

    // Deterministic order regardless of enumeration scheduling.
    let mut order: Vec<usize> = (0..reps.len()).collect();
    let keys: Vec<RowKey> = reps.iter().map(|m| m.row_lattice_key_unchecked()).collect();
    order.sort_by(|&i, &j| keys[i].cmp(&keys[j]));
    let reps: Vec<MatK> = order.into_iter().map(|i| reps[i].clone()).collect();

    let set = RightCosetSet {
        field,
        key: key.clone(),
        reps,
    };
    verify_closure(&set)?;
    Ok(set)
}

/// Every enumerated set must be stable under right multiplication by the
/// modular group; together with left-coset disjointness this certifies that
/// the union of the cosets is one full double coset.
fn verify_closure(set: &RightCosetSet) -> Result<()> {
    let keys: HashSet<RowKey> = set.rep_keys().into_iter().collect();
    let gens = modular_generators(set.field, set.key.degree());
    for rep in &set.reps {
        for g in &gens {
            let moved = rep.mul(g)?;
            if !keys.contains(&moved.row_lattice_key_unchecked()) {
                return Err(Error::Consistency(
                    "right-coset set is not closed under the modular group".into(),
                ));
            }
        }
    }
    Ok(())
}

/// Upper-triangular candidates D with p-power integer diagonal dividing q
/// and canonically reduced entries above the diagonal. These enumerate the
/// O_K-row modules between q*O^n and O^n exactly once; the A-integrality
/// filter in the caller discards the rest.
fn triangular_modules(field: QuadField, n: usize, p: u64, l: u32) -> Result<Vec<MatK>> {
    let mut out = Vec::new();
    let mut diag = vec![0u32; n];
    loop {
        // Off-diagonal slots (i, j), i < j, with residues mod p^diag[j].
        let slots: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect();
        let radices: Vec<u64> = slots.iter().map(|&(_, j)| p.pow(diag[j])).collect();
        let mut counters = vec![(0u64, 0u64); slots.len()];
        loop {
            let mut d = MatK::zeros(field, n, n);
            for i in 0..n {
                d.set(i, i, KElem::from_bigint(field, BigInt::from(p).pow(diag[i])));
            }
            for (idx, &(i, j)) in slots.iter().enumerate() {
                let (x, y) = counters[idx];
                d.set(i, j, KElem::from_coords(field, x as i64, y as i64));
            }
            out.push(d);
            // Odometer over (x, y) pairs per slot.
            let mut carry = true;
            for (idx, radix) in radices.iter().enumerate() {
                if !carry {
                    break;
                }
                let (ref mut x, ref mut y) = counters[idx];
                *x += 1;
                if *x == *radix {
                    *x = 0;
                    *y += 1;
                    if *y == *radix {
                        *y = 0;
                    } else {
                        carry = false;
                    }
                } else {
                    carry = false;
                }
            }
            if carry {
                break;
            }
        }
        // Advance the diagonal odometer in base l + 1.
        let mut carry = true;
        for e in diag.iter_mut() {
            if !carry {
                break;
            }
            *e += 1;
            if *e > l {
                *e = 0;
            } else {
                carry = false;
            }
        }
        if carry {
            break;
        }
    }
    Ok(out)
}

/// A transversal of the B-slots: integral B with conj(D)^tr * B Hermitian,
/// taken modulo the translation lattice {H * D : H integral Hermitian}.
fn translation_residues(
    field: QuadField,
    n: usize,
    d: &MatK,
    cap: usize,
    candidates: &mut usize,
) -> Result<Vec<MatK>> {
    let ncoords = 2 * n * n;
    let omega = KElem::omega(field);
    let slot = |r: usize, c: usize| 2 * (r * n + c);

    // Integer rows of the constraint system: for every i <= j,
    //   sum_r conj(D[r][i]) B[r][j] - sum_r D[r][j] conj(B[r][i]) = 0.
    let mut rows_a: Vec<Vec<BigInt>> = Vec::new();
    let mut rows_b: Vec<Vec<BigInt>> = Vec::new();
    for i in 0..n {
        for j in i..n {
            let mut coeff_u = vec![KElem::zero(field); n * n];
            let mut coeff_v = vec![KElem::zero(field); n * n];
            for r in 0..n {
                // gamma * B[r][j]
                let gamma = d.at(r, i).conj();
                coeff_u[r * n + j] = &coeff_u[r * n + j] + &gamma;
                coeff_v[r * n + j] = &coeff_v[r * n + j] + &(&gamma * &omega);
                // -delta * conj(B[r][i])
                let delta = -&(d.at(r, j).clone());
                coeff_u[r * n + i] = &coeff_u[r * n + i] + &delta;
                coeff_v[r * n + i] = &coeff_v[r * n + i] + &(&delta * &omega.conj());
            }
            let mut ra = vec![BigInt::zero(); ncoords];
            let mut rb = vec![BigInt::zero(); ncoords];
            for e in 0..n * n {
                let s = 2 * e;
                ra[s] = coeff_u[e].coord_a().clone();
                rb[s] = coeff_u[e].coord_b().clone();
                ra[s + 1] = coeff_v[e].coord_a().clone();
                rb[s + 1] = coeff_v[e].coord_b().clone();
            }
            rows_a.push(ra);
            rows_b.push(rb);
        }
    }
    let mut constraints = rows_a;
    constraints.extend(rows_b);

    // Transpose so the admissible B-lattice is a left kernel.
    let neqs = constraints.len();
    let transposed: Vec<Vec<BigInt>> = (0..ncoords)
        .map(|c| (0..neqs).map(|r| constraints[r][c].clone()).collect())
        .collect();
    let v_basis = left_kernel(&transposed);
    if v_basis.len() != n * n {
        return Err(Error::Consistency(format!(
            "admissible translation block lattice has rank {}, expected {}",
            v_basis.len(),
            n * n
        )));
    }

    // Express {H * D} in V-coordinates.
    let mut w_rows = Vec::new();
    for h in hermitian_basis(field, n) {
        let hd = h.mul(d)?;
        let mut w = vec![BigInt::zero(); ncoords];
        for r in 0..n {
            for c in 0..n {
                let e = hd.at(r, c);
                debug_assert!(e.is_integral());
                w[slot(r, c)] = e.coord_a().clone();
                w[slot(r, c) + 1] = e.coord_b().clone();
            }
        }
        let y = solve_left(&v_basis, &w).ok_or_else(|| {
            Error::Consistency("translation lattice does not sit inside the admissible lattice".into())
        })?;
        w_rows.push(y);
    }
    let h_norm = row_hnf(&w_rows);
    if h_norm.len() != n * n {
        return Err(Error::Consistency("translation lattice has deficient rank".into()));
    }
    let mut box_dims = Vec::with_capacity(n * n);
    for (i, row) in h_norm.iter().enumerate() {
        let pivot = row[i]
            .to_u64()
            .ok_or_else(|| Error::Domain("translation index too large".into()))?;
        if pivot == 0 {
            return Err(Error::Consistency("translation lattice has deficient rank".into()));
        }
        box_dims.push(pivot);
    }
    let total: u128 = box_dims.iter().map(|&x| x as u128).product();
    if *candidates as u128 + total > cap as u128 {
        return Err(Error::EnumerationCap(cap));
    }
    *candidates += total as usize;

    // Walk the box; each coordinate vector combines the V-basis rows.
    let mut out = Vec::with_capacity(total as usize);
    let mut t = vec![0u64; box_dims.len()];
    loop {
        let mut coords = vec![BigInt::zero(); ncoords];
        for (i, &ti) in t.iter().enumerate() {
            if ti == 0 {
                continue;
            }
            let ti = BigInt::from(ti);
            for c in 0..ncoords {
                let delta = &ti * &v_basis[i][c];
                coords[c] += delta;
            }
        }
        let b = MatK::from_fn(field, n, n, |r, c| {
            KElem::new(
                field,
                coords[slot(r, c)].clone(),
                coords[slot(r, c) + 1].clone(),
            )
        });
        out.push(b);
        let mut carry = true;
        for (i, dim) in box_dims.iter().enumerate() {
            if !carry {
                break;
            }
            t[i] += 1;
            if t[i] == *dim {
                t[i] = 0;
            } else {
                carry = false;
            }
        }
        if carry {
            break;
        }
    }
    Ok(out)
}

/// Right-coset representatives for any inert key: prime powers enumerate
/// directly, composite similitudes compose the per-prime sets pairwise
/// (coprime double cosets multiply without collisions).
pub fn coset_reps(field: QuadField, key: &DoubleCosetKey, cap: usize) -> Result<RightCosetSet> {
    let factors = key.ensure_inert(field)?;
    if factors.len() <= 1 {
        return enumerate_right_cosets(field, key, cap);
    }
    let mut parts = Vec::new();
    for &(p, _) in &factors {
        parts.push(enumerate_right_cosets(field, &key.p_part(p), cap)?);
    }
    let mut reps = vec![MatK::identity(field, 2 * key.degree())];
    for part in &parts {
        let mut next = Vec::with_capacity(reps.len() * part.len());
        if reps.len() * part.len() > cap {
            return Err(Error::EnumerationCap(cap));
        }
        for r in &reps {
            for s in &part.reps {
                next.push(r.mul(s)?);
            }
        }
        reps = next;
    }
    // Coprimality makes the products pairwise distinct; verify by key count.
    let mut seen = HashSet::new();
    for m in &reps {
        if !seen.insert(m.row_lattice_key_unchecked()) {
            return Err(Error::Consistency(
                "coprime coset products collided; enumeration is inconsistent".into(),
            ));
        }
    }
    Ok(RightCosetSet {
        field,
        key: key.clone(),
        reps,
    })
}

/// Product in the Hecke algebra together with the right-coset count of every
/// double coset in the support.
pub fn hecke_product_detailed(
    e1: &HeckeElement,
    e2: &HeckeElement,
    cap: usize,
) -> Result<(HeckeElement, BTreeMap<DoubleCosetKey, usize>)> {
    if e1.field != e2.field || e1.n != e2.n {
        return Err(Error::Dimension("element degree or field mismatch".into()));
    }
    let field = e1.field;
    let mut out = HeckeElement::zero(field, e1.n);
    let mut counts: BTreeMap<DoubleCosetKey, usize> = BTreeMap::new();
    for (k1, c1) in &e1.terms {
        let s1 = coset_reps(field, k1, cap)?;
        for (k2, c2) in &e2.terms {
            let s2 = coset_reps(field, k2, cap)?;
            if s1.len().saturating_mul(s2.len()) > cap {
                return Err(Error::EnumerationCap(cap));
            }
            // Group the pairwise products by right coset, then by double coset.
            let mut by_coset: HashMap<RowKey, (DoubleCosetKey, usize)> = HashMap::new();
            for r1 in &s1.reps {
                for r2 in &s2.reps {
                    let prod = r1.mul(r2)?;
                    let rk = prod.row_lattice_key_unchecked();
                    match by_coset.get_mut(&rk) {
                        Some((_, count)) => *count += 1,
                        None => {
                            let key = canonical_form(field, &prod)?;
                            by_coset.insert(rk, (key, 1));
                        }
                    }
                }
            }
            let mut grouped: BTreeMap<DoubleCosetKey, Vec<usize>> = BTreeMap::new();
            for (_, (key, count)) in by_coset {
                grouped.entry(key).or_default().push(count);
            }
            for (key, coset_counts) in grouped {
                let mult = coset_counts[0];
                if coset_counts.iter().any(|&c| c != mult) {
                    return Err(Error::Consistency(
                        "non-uniform multiplicity across the right cosets of one double coset".into(),
                    ));
                }
                let n_cosets = coset_counts.len();
                if let Some(prev) = counts.insert(key.clone(), n_cosets) {
                    if prev != n_cosets {
                        return Err(Error::Consistency(
                            "inconsistent right-coset count for a double coset".into(),
                        ));
                    }
                }
                out.add_term(key, c1 * c2 * BigRational::from(BigInt::from(mult)));
            }
        }
    }
    Ok((out, counts))
}

pub fn hecke_product(e1: &HeckeElement, e2: &HeckeElement, cap: usize) -> Result<HeckeElement> {
    hecke_product_detailed(e1, e2, cap).map(|(e, _)| e)
}

/// The degree-lowering homomorphism at weight k: each triangular right coset
/// (A B; 0 D) maps to its leading (n-1)-block coset weighted by the inverse
/// k-th power of the trailing diagonal entry of D.
pub fn phi_map(e: &HeckeElement, k: i64, cap: usize) -> Result<HeckeElement> {
    let n = e.n;
    if n < 2 {
        return Err(Error::Domain("degree lowering needs degree at least 2".into()));
    }
    let field = e.field;
    let mut out = HeckeElement::zero(field, n - 1);
    for (key, coeff) in &e.terms {
        let set = coset_reps(field, key, cap)?;
        let mut grouped: HashMap<RowKey, (MatK, BigRational)> = HashMap::new();
        for rep in &set.reps {
            let (a, b, c, d) = rep.blocks()?;
            if !c.is_zero() {
                return Err(Error::NotTriangular);
            }
            let delta = d
                .at(n - 1, n - 1)
                .as_integer()
                .filter(|x| x.is_positive())
                .ok_or(Error::NotTriangular)?;
            let lower = MatK::from_blocks(
                &a.block(0, 0, n - 1, n - 1),
                &b.block(0, 0, n - 1, n - 1),
                &MatK::zeros(field, n - 1, n - 1),
                &d.block(0, 0, n - 1, n - 1),
            )?;
            let weight = rational_power(&delta, -k);
            let rk = lower.row_lattice_key_unchecked();
            match grouped.get_mut(&rk) {
                Some((_, acc)) => *acc += weight,
                None => {
                    grouped.insert(rk, (lower, weight));
                }
            }
        }
        let mut by_key: BTreeMap<DoubleCosetKey, Vec<BigRational>> = BTreeMap::new();
        for (_, (lower, total)) in grouped {
            by_key
                .entry(canonical_form(field, &lower)?)
                .or_default()
                .push(total);
        }
        for (lower_key, totals) in by_key {
            let value = totals[0].clone();
            if totals.iter().any(|t| *t != value) {
                return Err(Error::Consistency(
                    "degree lowering produced non-uniform coset weights".into(),
                ));
            }
            // The image must cover the full lower double coset.
            let expected = coset_reps(field, &lower_key, cap)?.len();
            if expected != totals.len() {
                return Err(Error::Consistency(
                    "degree lowering hit only part of a lower double coset".into(),
                ));
            }
            out.add_term(lower_key, coeff * value);
        }
    }
    Ok(out)
}

/// x^e as an exact rational, for integer e of either sign.
pub fn rational_power(x: &BigInt, e: i64) -> BigRational {
    let mag = BigRational::from(x.pow(e.unsigned_abs() as u32));
    if e < 0 {
        mag.recip()
    } else {
        mag
    }
}

/// Split a determinantal chain into its inert-rational part a_k (the largest
/// positive integer factor supported on inert primes) and the complementary
/// ideals I_k with no inert rational prime divisor.
pub fn split_inert_rational(chain: &DetDivChain) -> Result<(Vec<BigInt>, Vec<IdealHnf>)> {
    let field = chain.field;
    let mut inert_parts = Vec::with_capacity(chain.chain.len());
    let mut complements = Vec::with_capacity(chain.chain.len());
    for ideal in &chain.chain {
        let content = ideal.rational_content();
        let cu = content
            .to_u64()
            .ok_or_else(|| Error::Domain("chain content too large to factor".into()))?;
        let mut inert = BigInt::one();
        for (p, e) in factor_u64(cu) {
            if field.is_inert(p) {
                inert *= BigInt::from(p).pow(e);
            }
        }
        complements.push(ideal.divide_rational(&inert)?);
        inert_parts.push(inert);
    }
    Ok((inert_parts, complements))
}

/// Multiplicativity of determinantal chains for matrices with coprime
/// determinantal supports, used as a verification predicate.
pub fn detdiv_multiplicative(m1: &MatK, m2: &MatK) -> Result<bool> {
    let k = m1.rows().min(m1.cols());
    let c1 = m1.detdiv_chain(k)?;
    let c2 = m2.detdiv_chain(k)?;
    let cp = m1.mul(m2)?.detdiv_chain(k)?;
    if c1.rank() != k || c2.rank() != k || cp.rank() != k {
        return Ok(false);
    }
    for i in 0..k {
        if cp.chain[i] != c1.chain[i].mul(&c2.chain[i])? {
            return Ok(false);
        }
    }
    Ok(true)
}
