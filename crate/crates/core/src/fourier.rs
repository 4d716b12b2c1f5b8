//! Formal Fourier expansions indexed by Hermitian matrices, the slash action
//! of block-triangular cosets, Hecke operators on expansions, the Siegel
//! degree-lowering operator, rotation twists, and cusp and rank diagnostics.
//!
//! An expansion is a finitely supported map from Hermitian index matrices to
//! exact rational coefficients, together with a certified truncation bound:
//! every operation computes the bound up to which the image coefficients are
//! complete, so downstream eigenvalue comparisons never quantify over
//! uncertified indices. Single-coset images carry cyclotomic coefficients
//! and possibly fractional support; only full coset sums are finalized back
//! to rational coefficients on the integral index lattice.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::cyc::CycSum;
use crate::error::{Error, Result};
use crate::field::{KElem, QuadField};
use crate::hecke::{coset_reps, rational_power, HeckeElement, RightCosetSet};
use crate::ideal::ClassRepSet;
use crate::matrix::MatK;

/// A Hermitian index matrix: rational diagonal, upper-triangle entries in K
/// stored once per pair (row-major over i < j), the lower triangle implied
/// by conjugation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HermIndex {
    field: QuadField,
    n: usize,
    diag: Vec<BigRational>,
    upper: Vec<KElem>,
}

fn upper_slot(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    // Row-major position among pairs i < j.
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

fn upper_len(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

impl HermIndex {
    pub fn new(field: QuadField, diag: Vec<BigRational>, upper: Vec<KElem>) -> Result<Self> {
        let n = diag.len();
        if upper.len() != upper_len(n) {
            return Err(Error::Dimension("wrong number of off-diagonal entries".into()));
        }
        for e in &upper {
            if e.field() != field {
                return Err(Error::MixedFields);
            }
        }
        Ok(HermIndex {
            field,
            n,
            diag,
            upper,
        })
    }

    pub fn zero(field: QuadField, n: usize) -> Self {
        HermIndex {
            field,
            n,
            diag: vec![BigRational::zero(); n],
            upper: vec![KElem::zero(field); upper_len(n)],
        }
    }

    /// Degree-1 index (t).
    pub fn scalar(field: QuadField, t: BigRational) -> Self {
        HermIndex {
            field,
            n: 1,
            diag: vec![t],
            upper: vec![],
        }
    }

    pub fn scalar_int(field: QuadField, t: i64) -> Self {
        HermIndex::scalar(field, BigRational::from(BigInt::from(t)))
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn field(&self) -> QuadField {
        self.field
    }

    pub fn diag(&self) -> &[BigRational] {
        &self.diag
    }

    pub fn upper(&self) -> &[KElem] {
        &self.upper
    }

    pub fn entry(&self, i: usize, j: usize) -> KElem {
        use std::cmp::Ordering;
        match i.cmp(&j) {
            Ordering::Equal => KElem::from_rational(self.field, &self.diag[i]),
            Ordering::Less => self.upper[upper_slot(self.n, i, j)].clone(),
            Ordering::Greater => self.upper[upper_slot(self.n, j, i)].conj(),
        }
    }

    pub fn trace(&self) -> BigRational {
        self.diag.iter().sum()
    }

    pub fn to_matrix(&self) -> MatK {
        MatK::from_fn(self.field, self.n, self.n, |i, j| self.entry(i, j))
    }

    pub fn from_matrix(m: &MatK) -> Result<Self> {
        if !m.is_hermitian() {
            return Err(Error::Consistency("index matrix must be Hermitian".into()));
        }
        let n = m.rows();
        let mut diag = Vec::with_capacity(n);
        for i in 0..n {
            diag.push(m.at(i, i).as_rational().ok_or_else(|| {
                Error::Consistency("Hermitian diagonal must be rational".into())
            })?);
        }
        let mut upper = Vec::with_capacity(upper_len(n));
        for i in 0..n {
            for j in i + 1..n {
                upper.push(m.at(i, j).clone());
            }
        }
        HermIndex::new(m.field(), diag, upper)
    }

    /// Minimal positive integer s with this index in (1/s) * Lambda_n:
    /// s * diagonal integral and s * (off-diagonal * sqrt(d_K)) integral.
    pub fn lattice_scale(&self) -> BigInt {
        let mut s = BigInt::one();
        for t in &self.diag {
            s = s.lcm(t.denom());
        }
        let sqrt_d = self.field.sqrt_disc();
        for e in &self.upper {
            let mu = e * &sqrt_d;
            s = s.lcm(mu.denom());
        }
        s
    }

    pub fn in_lambda(&self) -> bool {
        self.lattice_scale().is_one()
    }

    /// Positive semidefiniteness, definiteness and rank through exact
    /// principal minors. For Hermitian matrices the rank equals the largest
    /// size of a nonvanishing principal minor.
    pub fn psd_rank(&self) -> (bool, bool, usize) {
        let n = self.n;
        if n == 0 {
            return (true, true, 0);
        }
        let m = self.to_matrix();
        let mut psd = true;
        let mut pd = true;
        let mut rank = 0usize;
        for mask in 1u32..(1 << n) {
            let rows: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
            let sub = MatK::from_fn(self.field, rows.len(), rows.len(), |i, j| {
                m.at(rows[i], rows[j]).clone()
            });
            let det = sub
                .det()
                .expect("square minor")
                .as_rational()
                .expect("principal minor of a Hermitian matrix is real");
            if det.is_negative() {
                psd = false;
            }
            if !det.is_zero() {
                rank = rank.max(rows.len());
            }
            // Leading minors decide definiteness.
            if mask.count_ones() as usize == rows.last().unwrap() + 1 && !det.is_positive() {
                pd = false;
            }
        }
        if !psd {
            pd = false;
        }
        (psd, pd, rank)
    }

    pub fn is_psd(&self) -> bool {
        self.psd_rank().0
    }

    /// Whether the last row and column vanish entirely.
    pub fn last_rowcol_zero(&self) -> bool {
        if self.n == 0 {
            return false;
        }
        if !self.diag[self.n - 1].is_zero() {
            return false;
        }
        (0..self.n - 1).all(|i| self.upper[upper_slot(self.n, i, self.n - 1)].is_zero())
    }

    /// Drop the last row and column.
    pub fn shrink(&self) -> HermIndex {
        let n = self.n - 1;
        let diag = self.diag[..n].to_vec();
        let mut upper = Vec::with_capacity(upper_len(n));
        for i in 0..n {
            for j in i + 1..n {
                upper.push(self.upper[upper_slot(self.n, i, j)].clone());
            }
        }
        HermIndex {
            field: self.field,
            n,
            diag,
            upper,
        }
    }

    /// Congruence transform U * T * conj(U)^tr.
    pub fn congruence(&self, u: &MatK) -> Result<HermIndex> {
        let t = u.mul(&self.to_matrix())?.mul(&u.conj_transpose())?;
        HermIndex::from_matrix(&t)
    }
}

/// A finalized formal Fourier expansion: rational coefficients on positive
/// semidefinite indices, certified complete for trace up to `trunc`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FourierExpansion {
    pub field: QuadField,
    pub n: usize,
    pub weight: i64,
    pub scale: BigInt,
    pub trunc: BigRational,
    coeffs: BTreeMap<HermIndex, BigRational>,
}

impl FourierExpansion {
    pub fn new(field: QuadField, n: usize, weight: i64, trunc: BigRational) -> Self {
        FourierExpansion {
            field,
            n,
            weight,
            scale: BigInt::one(),
            trunc,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, index: HermIndex, coeff: BigRational) -> Result<()> {
        if index.size() != self.n || index.field() != self.field {
            return Err(Error::Dimension("index shape mismatch".into()));
        }
        if index.trace() > self.trunc {
            return Err(Error::Domain(
                "index beyond the certified truncation bound".into(),
            ));
        }
        if !index.is_psd() {
            return Err(Error::Domain(
                "finalized expansions are supported on positive semidefinite indices".into(),
            ));
        }
        if !coeff.is_zero() {
            self.scale = self.scale.lcm(&index.lattice_scale());
            self.coeffs.insert(index, coeff);
        }
        Ok(())
    }

    pub fn coeffs(&self) -> &BTreeMap<HermIndex, BigRational> {
        &self.coeffs
    }

    pub fn coefficient(&self, index: &HermIndex) -> BigRational {
        self.coeffs
            .get(index)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn constant_term(&self) -> BigRational {
        self.coefficient(&HermIndex::zero(self.field, self.n))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn support_len(&self) -> usize {
        self.coeffs.len()
    }

    /// Restrict the certified range, dropping support beyond the new bound.
    pub fn truncate(&self, bound: BigRational) -> FourierExpansion {
        let mut out = FourierExpansion::new(self.field, self.n, self.weight, bound.clone());
        for (t, c) in &self.coeffs {
            if t.trace() <= bound {
                out.insert(t.clone(), c.clone()).expect("within bound");
            }
        }
        out
    }

    fn recompute_scale(&mut self) {
        let mut s = BigInt::one();
        for t in self.coeffs.keys() {
            s = s.lcm(&t.lattice_scale());
        }
        self.scale = s;
    }
}

/// Intermediate image of one coset: cyclotomic coefficients, support
/// possibly off the integral lattice.
#[derive(Debug, Clone)]
pub struct CosetImage {
    pub field: QuadField,
    pub n: usize,
    pub weight: i64,
    pub trunc: BigRational,
    pub coeffs: BTreeMap<HermIndex, CycSum>,
}

/// Slash a finalized expansion by one block-triangular coset representative
/// L = (A B; 0 D) of similitude q: indices map to conj(A)^tr T A / q, and
/// each coefficient picks up det(D)^(-k) times the phase of trace(T B D^-1).
pub fn slash_coset(f: &FourierExpansion, l: &MatK, k: i64) -> Result<CosetImage> {
    if l.field() != f.field {
        return Err(Error::MixedFields);
    }
    if l.rows() != 2 * f.n || !l.is_square() {
        return Err(Error::Dimension("coset representative has the wrong size".into()));
    }
    let q = l.similitude_factor()?.ok_or(Error::NotSimilitude)?;
    let (a, b, c, d) = l.blocks()?;
    if !c.is_zero() {
        return Err(Error::NotTriangular);
    }
    let det_d = d
        .det()?
        .as_integer()
        .filter(|x| x.is_positive())
        .ok_or(Error::NotTriangular)?;
    let det_factor = rational_power(&det_d, -k);
    let bd_inv = b.mul(&d.inverse()?)?;
    let q_rat = BigRational::from(q.clone());

    // Certified image bound: for psd T', the preimage trace is at most
    // q * trace(T') * trace((conj(A)^tr A)^-1).
    let gram_inv = a.conj_transpose().mul(&a)?.inverse()?;
    let mut g_trace = BigRational::zero();
    for i in 0..f.n {
        g_trace += gram_inv
            .at(i, i)
            .as_rational()
            .ok_or_else(|| Error::Consistency("Gram trace must be rational".into()))?;
    }
    let bound = &f.trunc / (&q_rat * &g_trace);

    let mut coeffs: BTreeMap<HermIndex, CycSum> = BTreeMap::new();
    for (t, coeff) in f.coeffs() {
        let tm = t.to_matrix();
        let image = a
            .conj_transpose()
            .mul(&tm)?
            .mul(&a)?
            .scale(&q_rat.recip());
        let t_img = HermIndex::from_matrix(&image)?;
        if t_img.trace() > bound {
            continue;
        }
        let mut phase = KElem::zero(f.field);
        let prod = tm.mul(&bd_inv)?;
        for i in 0..f.n {
            phase = &phase + prod.at(i, i);
        }
        let r = phase.as_rational().ok_or_else(|| {
            Error::Consistency(
                "slash phase has a nonzero imaginary part; the representative is not a similitude coset".into(),
            )
        })?;
        let contribution = CycSum::phase(coeff * &det_factor, &r);
        coeffs
            .entry(t_img)
            .and_modify(|acc| *acc = acc.add(&contribution))
            .or_insert(contribution);
    }
    Ok(CosetImage {
        field: f.field,
        n: f.n,
        weight: k,
        trunc: bound,
        coeffs,
    })
}

/// Apply a full Hecke element to a finalized expansion: sum the slash images
/// over every right-coset representative of every term, then finalize. The
/// cyclotomic parts must cancel exactly and the surviving support must lie
/// in the integral index lattice.
pub fn hecke_act(
    f: &FourierExpansion,
    e: &HeckeElement,
    k: i64,
    cap: usize,
) -> Result<FourierExpansion> {
    if e.field() != f.field || e.degree() != f.n {
        return Err(Error::Dimension("element degree or field mismatch".into()));
    }
    let mut weighted = Vec::new();
    for (key, coeff) in e.terms() {
        let set = coset_reps(f.field, key, cap)?;
        weighted.push((coeff.clone(), set));
    }
    let sets: Vec<(BigRational, &RightCosetSet)> =
        weighted.iter().map(|(c, s)| (c.clone(), s)).collect();
    hecke_act_cosets(f, &sets, k)
}

/// Same as `hecke_act` for explicit coset sets with coefficients.
pub fn hecke_act_cosets(
    f: &FourierExpansion,
    sets: &[(BigRational, &RightCosetSet)],
    k: i64,
) -> Result<FourierExpansion> {
    if !f.scale.is_one() {
        return Err(Error::Domain(
            "Hecke operators act on expansions supported in the integral index lattice".into(),
        ));
    }
    let mut total: BTreeMap<HermIndex, CycSum> = BTreeMap::new();
    let mut bound: Option<BigRational> = None;
    for (coeff, set) in sets {
        for rep in &set.reps {
            let img = slash_coset(f, rep, k)?;
            bound = Some(match bound {
                None => img.trunc.clone(),
                Some(b) => b.min(img.trunc.clone()),
            });
            for (t, cs) in img.coeffs {
                let scaled = cs.scale(coeff);
                total
                    .entry(t)
                    .and_modify(|acc| *acc = acc.add(&scaled))
                    .or_insert(scaled);
            }
        }
    }
    let bound = bound.unwrap_or_else(|| f.trunc.clone());
    let mut out = FourierExpansion::new(f.field, f.n, k, bound.clone());
    for (t, cs) in total {
        if t.trace() > bound {
            continue;
        }
        if cs.is_zero() {
            continue;
        }
        let value = cs.as_rational().ok_or_else(|| {
            Error::Consistency(
                "irrational coefficient survived a full coset sum; the coset set is not a Hecke operator".into(),
            )
        })?;
        if !t.in_lambda() {
            return Err(Error::Consistency(
                "support outside the integral index lattice survived a full coset sum".into(),
            ));
        }
        out.insert(t, value)?;
    }
    Ok(out)
}

/// The Siegel degree-lowering operator: keep the coefficients whose index
/// has vanishing last row and column, as an expansion of degree n - 1.
pub fn siegel_phi(f: &FourierExpansion) -> Result<FourierExpansion> {
    if f.n == 0 {
        return Err(Error::Domain("no lower degree below 0".into()));
    }
    let mut out = FourierExpansion::new(f.field, f.n - 1, f.weight, f.trunc.clone());
    for (t, c) in f.coeffs() {
        if t.last_rowcol_zero() {
            out.insert(t.shrink(), c.clone())?;
        }
    }
    out.recompute_scale();
    Ok(out)
}

/// Slash by the rotation diag(conj(U)^tr, U^-1): indices transform by the
/// congruence U T conj(U)^tr and coefficients scale by det(U)^k, which must
/// be rational.
pub fn slash_rotation(f: &FourierExpansion, u: &MatK, k: i64) -> Result<FourierExpansion> {
    if u.field() != f.field {
        return Err(Error::MixedFields);
    }
    if u.rows() != f.n || !u.is_square() {
        return Err(Error::Dimension("rotation block has the wrong size".into()));
    }
    let det = u.det()?;
    if det.is_zero() {
        return Err(Error::Singular);
    }
    let factor = det.pow(k)?.as_rational().ok_or_else(|| {
        Error::Domain("det(U)^k is irrational; the twist would leave rational coefficients".into())
    })?;
    let gram_inv = u.mul(&u.conj_transpose())?.inverse()?;
    let mut g_trace = BigRational::zero();
    for i in 0..f.n {
        g_trace += gram_inv
            .at(i, i)
            .as_rational()
            .ok_or_else(|| Error::Consistency("Gram trace must be rational".into()))?;
    }
    let bound = &f.trunc / &g_trace;
    let mut out = FourierExpansion::new(f.field, f.n, k, bound.clone());
    for (t, c) in f.coeffs() {
        let img = t.congruence(u)?;
        if img.trace() > bound {
            continue;
        }
        out.insert(img, c * &factor)?;
    }
    Ok(out)
}

/// Report of the two cusp criteria.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CuspReport {
    /// Every supported index is positive definite.
    pub direct: bool,
    /// Every class twist followed by degree lowering vanishes.
    pub twisted: bool,
    /// Per-class vanishing flags backing `twisted`.
    pub per_class: Vec<bool>,
}

impl CuspReport {
    pub fn agree(&self) -> bool {
        self.direct == self.twisted
    }
}

/// Run both cusp tests: the direct support test and the class-twisted
/// degree-lowering test. At degree 1 the twisted test degenerates to the
/// plain degree lowering.
pub fn cusp_tests(f: &FourierExpansion, reps: &ClassRepSet) -> Result<CuspReport> {
    if reps.field != f.field {
        return Err(Error::MixedFields);
    }
    let direct = f.coeffs().keys().all(|t| t.psd_rank().1);
    let per_class: Vec<bool> = if f.n <= 1 {
        vec![siegel_phi(f)?.is_zero()]
    } else {
        let mut flags = Vec::with_capacity(reps.reps.len());
        for rep in &reps.reps {
            // U_j: identity with conj(u_j) inserted next to the last pivot.
            let mut u = MatK::identity(f.field, f.n);
            u.set(f.n - 1, f.n - 2, rep.u.conj());
            let twisted = slash_rotation(f, &u, f.weight)?;
            flags.push(siegel_phi(&twisted)?.is_zero());
        }
        flags
    };
    let twisted = per_class.iter().all(|&b| b);
    Ok(CuspReport {
        direct,
        twisted,
        per_class,
    })
}

/// Minimum rank over the support with a per-rank coefficient count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankProfile {
    pub min_rank: Option<usize>,
    pub histogram: BTreeMap<usize, usize>,
}

pub fn rank_profile(f: &FourierExpansion) -> RankProfile {
    let mut histogram: BTreeMap<usize, usize> = BTreeMap::new();
    for t in f.coeffs().keys() {
        *histogram.entry(t.psd_rank().2).or_insert(0) += 1;
    }
    RankProfile {
        min_rank: histogram.keys().next().copied(),
        histogram,
    }
}

/// Exact Bernoulli number B_m with B_1 = -1/2.
pub fn bernoulli_number(m: usize) -> BigRational {
    let mut b: Vec<BigRational> = Vec::with_capacity(m + 1);
    for j in 0..=m {
        if j == 0 {
            b.push(BigRational::one());
            continue;
        }
        // sum_{i<j} C(j+1, i) B_i = -(j+1) B_j
        let mut acc = BigRational::zero();
        let mut binom = BigInt::one();
        for (i, bi) in b.iter().enumerate().take(j) {
            // binom = C(j+1, i)
            acc += BigRational::from(binom.clone()) * bi;
            binom = &binom * BigInt::from((j + 1 - i) as i64) / BigInt::from((i + 1) as i64);
        }
        b.push(-acc / BigRational::from(BigInt::from((j + 1) as i64)));
    }
    b[m].clone()
}

fn sigma(t: u64, e: u32) -> BigInt {
    let mut acc = BigInt::zero();
    for d in 1..=t {
        if t % d == 0 {
            acc += BigInt::from(d).pow(e);
        }
    }
    acc
}

/// The normalized degree-1 Eisenstein expansion
/// 1 - (2k / B_k) * sum sigma_{k-1}(t) q^t, certified through `terms`.
pub fn eisenstein_q_expansion(
    field: QuadField,
    k: i64,
    terms: u64,
) -> Result<FourierExpansion> {
    if k < 4 || k % 2 != 0 {
        return Err(Error::Domain(format!(
            "Eisenstein weight must be even and at least 4, got {k}"
        )));
    }
    let bk = bernoulli_number(k as usize);
    let factor = -BigRational::from(BigInt::from(2 * k)) / bk;
    let mut f = FourierExpansion::new(
        field,
        1,
        k,
        BigRational::from(BigInt::from(terms)),
    );
    f.insert(HermIndex::scalar_int(field, 0), BigRational::one())?;
    for t in 1..=terms {
        f.insert(
            HermIndex::scalar_int(field, t as i64),
            &factor * BigRational::from(sigma(t, k as u32 - 1)),
        )?;
    }
    Ok(f)
}

/// The weight-12 discriminant cusp expansion q * prod (1 - q^m)^24,
/// certified through `terms`. A classical fixture for cusp-side tests.
pub fn delta_q_expansion(field: QuadField, terms: u64) -> FourierExpansion {
    let len = terms as usize;
    // prod (1 - x^m) up to degree len - 1, then the 24th power.
    let mut eta = vec![BigInt::zero(); len.max(1)];
    eta[0] = BigInt::one();
    for m in 1..len {
        let mut next = eta.clone();
        for (i, c) in eta.iter().enumerate() {
            if i + m < len && !c.is_zero() {
                let delta = c.clone();
                next[i + m] -= delta;
            }
        }
        eta = next;
    }
    let mut pow = vec![BigInt::one()];
    pow.resize(len.max(1), BigInt::zero());
    for _ in 0..24 {
        let mut next = vec![BigInt::zero(); len.max(1)];
        for (i, a) in pow.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in eta.iter().enumerate() {
                if i + j < len && !b.is_zero() {
                    let delta = a * b;
                    next[i + j] += delta;
                }
            }
        }
        pow = next;
    }
    let mut f = FourierExpansion::new(
        field,
        1,
        12,
        BigRational::from(BigInt::from(terms)),
    );
    for t in 1..=terms {
        let c = pow[(t - 1) as usize].clone();
        if !c.is_zero() {
            f.insert(
                HermIndex::scalar_int(field, t as i64),
                BigRational::from(c),
            )
            .expect("within bound");
        }
    }
    f
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::SplitMix64;
    use crate::hecke::DoubleCosetKey;
    use crate::ideal::class_representatives;

    fn q(m: u64) -> QuadField {
        QuadField::new(m).unwrap()
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn ri(n: i64) -> BigRational {
        BigRational::from(BigInt::from(n))
    }

    #[test]
    fn psd_rank_cases() {
        let fi = q(1);
        let zero = HermIndex::zero(fi, 2);
        assert_eq!(zero.psd_rank(), (true, false, 0));
        // [[1, (1+i)/2], [(1-i)/2, 1]] is positive definite with det 1/2.
        let t = HermIndex::new(
            fi,
            vec![ri(1), ri(1)],
            vec![KElem::new_frac(fi, BigInt::from(1), BigInt::from(1), BigInt::from(2)).unwrap()],
        )
        .unwrap();
        assert!(t.in_lambda());
        assert_eq!(t.psd_rank(), (true, true, 2));
        // Rank-1 Gram index.
        let t = HermIndex::new(
            fi,
            vec![ri(1), ri(2)],
            vec![KElem::from_coords(fi, 1, 1)],
        )
        .unwrap();
        assert_eq!(t.psd_rank(), (true, false, 1));
        // Indefinite.
        let t = HermIndex::new(fi, vec![ri(1), ri(-1)], vec![KElem::zero(fi)]).unwrap();
        assert_eq!(t.psd_rank().0, false);
    }

    #[test]
    fn lambda_duality() {
        // trace(T S) is an integer for T in Lambda and S integral Hermitian.
        let mut rng = SplitMix64::new(31);
        for m in [1u64, 5, 11] {
            let f = q(m);
            let sqrt_d = f.sqrt_disc();
            for _ in 0..70 {
                let mu = KElem::from_coords(f, rng.range_i64(-4, 4), rng.range_i64(-4, 4));
                let t = HermIndex::new(
                    f,
                    vec![ri(rng.range_i64(-4, 4)), ri(rng.range_i64(-4, 4))],
                    vec![mu.checked_div(&sqrt_d).unwrap()],
                )
                .unwrap();
                assert!(t.in_lambda());
                let s = {
                    let d0 = rng.range_i64(-4, 4);
                    let d1 = rng.range_i64(-4, 4);
                    let off = KElem::from_coords(f, rng.range_i64(-4, 4), rng.range_i64(-4, 4));
                    MatK::from_entries(
                        f,
                        2,
                        2,
                        vec![
                            KElem::from_int(f, d0),
                            off.clone(),
                            off.conj(),
                            KElem::from_int(f, d1),
                        ],
                    )
                    .unwrap()
                };
                let prod = t.to_matrix().mul(&s).unwrap();
                let tr = (prod.at(0, 0) + prod.at(1, 1)).as_rational().unwrap();
                assert!(tr.is_integer(), "m={m}");
                // Lambda is stable under integral congruence.
                let a = MatK::from_fn(f, 2, 2, |_, _| {
                    KElem::from_coords(f, rng.range_i64(-3, 3), rng.range_i64(-3, 3))
                });
                let img = HermIndex::from_matrix(
                    &a.conj_transpose().mul(&t.to_matrix()).unwrap().mul(&a).unwrap(),
                )
                .unwrap();
                assert!(img.in_lambda(), "m={m}");
            }
        }
    }

    #[test]
    fn eisenstein_values() {
        let fi = q(1);
        let e4 = eisenstein_q_expansion(fi, 4, 10).unwrap();
        assert_eq!(e4.constant_term(), ri(1));
        assert_eq!(e4.coefficient(&HermIndex::scalar_int(fi, 1)), ri(240));
        assert_eq!(e4.coefficient(&HermIndex::scalar_int(fi, 2)), ri(2160));
        let e6 = eisenstein_q_expansion(fi, 6, 10).unwrap();
        assert_eq!(e6.coefficient(&HermIndex::scalar_int(fi, 1)), ri(-504));
        assert_eq!(e6.coefficient(&HermIndex::scalar_int(fi, 2)), ri(-16632));
        assert!(eisenstein_q_expansion(fi, 5, 10).is_err());
        assert!(eisenstein_q_expansion(fi, 2, 10).is_err());
        assert_eq!(bernoulli_number(4), rat(-1, 30));
        assert_eq!(bernoulli_number(6), rat(1, 42));
    }

    #[test]
    fn delta_values() {
        let fi = q(1);
        let d = delta_q_expansion(fi, 10);
        assert_eq!(d.coefficient(&HermIndex::scalar_int(fi, 1)), ri(1));
        assert_eq!(d.coefficient(&HermIndex::scalar_int(fi, 2)), ri(-24));
        assert_eq!(d.coefficient(&HermIndex::scalar_int(fi, 3)), ri(252));
        assert_eq!(d.coefficient(&HermIndex::scalar_int(fi, 4)), ri(-1472));
        assert_eq!(d.constant_term(), ri(0));
    }

    #[test]
    fn slash_single_cosets_degree_one() {
        let fi = q(1);
        let e4 = eisenstein_q_expansion(fi, 4, 12).unwrap();
        // Identity leaves the expansion unchanged.
        let img = slash_coset(&e4, &MatK::identity(fi, 2), 4).unwrap();
        for (t, c) in e4.coeffs() {
            assert_eq!(img.coeffs[t].as_rational().unwrap(), c.clone());
        }
        // (3 0; 0 1): support t -> 3t, coefficient unchanged.
        let l = MatK::diag_ints(fi, &[3, 1]);
        let img = slash_coset(&e4, &l, 4).unwrap();
        let t1 = HermIndex::scalar_int(fi, 3);
        assert_eq!(img.coeffs[&t1].as_rational().unwrap(), ri(240));
        // (1 1; 0 3): support t -> t/3, coefficient 3^-k * phase(t/3).
        let l = MatK::from_entries(
            fi,
            2,
            2,
            vec![
                KElem::one(fi),
                KElem::one(fi),
                KElem::zero(fi),
                KElem::from_int(fi, 3),
            ],
        )
        .unwrap();
        let img = slash_coset(&e4, &l, 4).unwrap();
        let t_third = HermIndex::scalar(fi, rat(1, 3));
        let expected = CycSum::phase(ri(240) * rat(1, 81), &rat(1, 3));
        assert_eq!(img.coeffs[&t_third], expected);
    }

    #[test]
    fn hecke_act_eigen_on_eisenstein() {
        let fi = q(1);
        let e4 = eisenstein_q_expansion(fi, 4, 30).unwrap();
        let t3 = HeckeElement::generator_p(fi, 1, 3).unwrap();
        let g = hecke_act(&e4, &t3, 4, 100_000).unwrap();
        // lambda = 3^(1-4) + 1 = 28/27 on the whole certified range.
        let lambda = rat(28, 27);
        assert_eq!(g.trunc, ri(10));
        assert!(g.support_len() > 0);
        for (t, c) in g.coeffs() {
            assert_eq!(c.clone(), &lambda * e4.coefficient(t), "index {:?}", t.diag());
        }
        for (t, c) in e4.coeffs() {
            if t.trace() <= g.trunc {
                assert_eq!(g.coefficient(t), &lambda * c);
            }
        }
    }

    #[test]
    fn hecke_act_on_cusp_form() {
        let fi = q(1);
        let delta = delta_q_expansion(fi, 21);
        let t3 = HeckeElement::generator_p(fi, 1, 3).unwrap();
        let g = hecke_act(&delta, &t3, 12, 100_000).unwrap();
        // tau(3) = 252 under the det(D)^-k normalization.
        let lambda = rat(252, 177147);
        for (t, c) in g.coeffs() {
            assert_eq!(c.clone(), &lambda * delta.coefficient(t));
            assert!(t.diag()[0].is_positive());
        }
        assert!(!g.is_zero());
        // Identity double coset acts as the identity.
        let id = HeckeElement::identity(fi, 1);
        let back = hecke_act(&delta, &id, 12, 100_000).unwrap();
        assert_eq!(back.coeffs(), delta.coeffs());
    }

    #[test]
    fn siegel_phi_chain() {
        let fi = q(1);
        let e4 = eisenstein_q_expansion(fi, 4, 8).unwrap();
        let phi = siegel_phi(&e4).unwrap();
        assert_eq!(phi.n, 0);
        assert_eq!(phi.constant_term(), ri(1));
        let delta = delta_q_expansion(fi, 8);
        assert!(siegel_phi(&delta).unwrap().is_zero());
        // Degree-2 expansion: only indices with zero last row/column survive.
        let mut f2 = FourierExpansion::new(fi, 2, 4, ri(4));
        let mut idx = HermIndex::zero(fi, 2);
        idx.diag[0] = ri(2);
        f2.insert(idx, ri(7)).unwrap();
        f2.insert(
            HermIndex::new(fi, vec![ri(1), ri(1)], vec![KElem::zero(fi)]).unwrap(),
            ri(5),
        )
        .unwrap();
        let lowered = siegel_phi(&f2).unwrap();
        assert_eq!(lowered.n, 1);
        assert_eq!(lowered.coefficient(&HermIndex::scalar_int(fi, 2)), ri(7));
        assert_eq!(lowered.support_len(), 1);
        // Full lowering reaches the constant term.
        let again = siegel_phi(&lowered).unwrap();
        assert_eq!(again.constant_term(), ri(0));
    }

    #[test]
    fn rotation_twists() {
        let f5 = q(5);
        let mut f = FourierExpansion::new(f5, 2, 4, ri(200));
        let sqrt_d = f5.sqrt_disc();
        let mu = KElem::from_coords(f5, 1, 0).checked_div(&sqrt_d).unwrap();
        f.insert(
            HermIndex::new(f5, vec![ri(1), ri(1)], vec![mu]).unwrap(),
            ri(3),
        )
        .unwrap();
        // Identity is neutral.
        let same = slash_rotation(&f, &MatK::identity(f5, 2), 4).unwrap();
        assert_eq!(same.coeffs(), f.coeffs());
        // A unimodular integral twist permutes the lattice support.
        let mut u = MatK::identity(f5, 2);
        u.set(0, 1, KElem::from_coords(f5, 1, 1));
        let twisted = slash_rotation(&f, &u, 4).unwrap();
        assert_eq!(twisted.scale, BigInt::one());
        assert_eq!(twisted.support_len(), 1);
        // The class twist with u = (1 + sqrt(-5))/2 doubles the denominator
        // on an index met by the twist direction.
        let mut g = FourierExpansion::new(f5, 2, 4, ri(20));
        g.insert(
            HermIndex::new(f5, vec![ri(1), ri(0)], vec![KElem::zero(f5)]).unwrap(),
            ri(1),
        )
        .unwrap();
        let reps = class_representatives(f5, None).unwrap();
        let mut u = MatK::identity(f5, 2);
        u.set(1, 0, reps.reps[1].u.conj());
        let twisted = slash_rotation(&g, &u, 4).unwrap();
        assert!((&twisted.scale % BigInt::from(2)).is_zero());
    }

    #[test]
    fn cusp_reports() {
        let fi = q(1);
        let reps = class_representatives(fi, None).unwrap();
        let delta = delta_q_expansion(fi, 10);
        let r = cusp_tests(&delta, &reps).unwrap();
        assert!(r.direct && r.twisted && r.agree());
        let e4 = eisenstein_q_expansion(fi, 4, 10).unwrap();
        let r = cusp_tests(&e4, &reps).unwrap();
        assert!(!r.direct && !r.twisted && r.agree());
        let zero = FourierExpansion::new(fi, 1, 12, ri(10));
        let r = cusp_tests(&zero, &reps).unwrap();
        assert!(r.direct && r.twisted && r.agree());
    }

    #[test]
    fn cusp_tests_degree_two_with_classes() {
        let f5 = q(5);
        let reps = class_representatives(f5, None).unwrap();
        // Singular index annihilating (u_2, 1): detected by the second class
        // twist, invisible to the plain degree lowering.
        let u2 = &reps.reps[1].u;
        let t = HermIndex::new(
            f5,
            vec![ri(2), ri(3)],
            vec![(-u2).scale(&ri(2))],
        )
        .unwrap();
        assert_eq!(t.psd_rank(), (true, false, 1));
        assert!(t.in_lambda());
        let mut f = FourierExpansion::new(f5, 2, 6, ri(12));
        f.insert(t, ri(1)).unwrap();
        let r = cusp_tests(&f, &reps).unwrap();
        assert!(!r.direct);
        assert!(!r.twisted);
        assert!(r.agree());
        assert_eq!(r.per_class, vec![true, false]);
        // A positive definite fixture passes every twist.
        let mut g = FourierExpansion::new(f5, 2, 6, ri(40));
        g.insert(
            HermIndex::new(f5, vec![ri(2), ri(2)], vec![KElem::zero(f5)]).unwrap(),
            ri(1),
        )
        .unwrap();
        let r = cusp_tests(&g, &reps).unwrap();
        assert!(r.direct && r.twisted && r.agree());
    }

    #[test]
    fn rank_profiles() {
        let fi = q(1);
        let mut constant = FourierExpansion::new(fi, 1, 4, ri(5));
        constant.insert(HermIndex::zero(fi, 1), ri(1)).unwrap();
        assert_eq!(rank_profile(&constant).min_rank, Some(0));
        let e4 = eisenstein_q_expansion(fi, 4, 10).unwrap();
        let profile = rank_profile(&e4);
        assert_eq!(profile.min_rank, Some(0));
        assert_eq!(profile.histogram[&0], 1);
        assert_eq!(profile.histogram[&1], 10);
        // Definite degree-2 support has minimum rank 2.
        let mut f2 = FourierExpansion::new(fi, 2, 4, ri(4));
        f2.insert(
            HermIndex::new(fi, vec![ri(1), ri(1)], vec![KElem::zero(fi)]).unwrap(),
            ri(1),
        )
        .unwrap();
        assert_eq!(rank_profile(&f2).min_rank, Some(2));
    }

    #[test]
    fn vanishing_chain_detects_constant_term() {
        // Chains of rotation twists and lowerings end at a nonzero multiple
        // of the constant term, for arbitrary formal input.
        let fi = q(1);
        let mut rng = SplitMix64::new(77);
        for trial in 0..10 {
            let with_constant = trial % 2 == 0;
            let mut f = FourierExpansion::new(fi, 2, 6, ri(9));
            if with_constant {
                f.insert(HermIndex::zero(fi, 2), ri(3)).unwrap();
            }
            for _ in 0..4 {
                let d0 = rng.range_i64(1, 3);
                let d1 = rng.range_i64(1, 3);
                let t = HermIndex::new(
                    fi,
                    vec![ri(d0), ri(d1)],
                    vec![KElem::zero(fi)],
                )
                .unwrap();
                let c = ri(rng.range_i64(1, 9));
                f.insert(t, c).unwrap();
            }
            // Random unimodular twists at each level.
            let mut u2 = MatK::identity(fi, 2);
            u2.set(0, 1, KElem::from_coords(fi, rng.range_i64(-2, 2), rng.range_i64(-2, 2)));
            let step1 = siegel_phi(&slash_rotation(&f, &u2, 6).unwrap()).unwrap();
            let u1 = MatK::diag_ints(fi, &[1]);
            let step2 = siegel_phi(&slash_rotation(&step1, &u1, 6).unwrap()).unwrap();
            assert_eq!(step2.n, 0);
            assert_eq!(
                step2.constant_term().is_zero(),
                !with_constant,
                "trial {trial}"
            );
        }
    }

    #[test]
    fn act_requires_unscaled_support() {
        let f5 = q(5);
        let mut f = FourierExpansion::new(f5, 1, 4, ri(4));
        f.insert(HermIndex::scalar(f5, rat(1, 2)), ri(1)).unwrap();
        assert!(!f.scale.is_one());
        let key = DoubleCosetKey::generator_p(1, 11);
        let e = HeckeElement::from_key(f5, key).unwrap();
        assert!(matches!(
            hecke_act(&f, &e, 4, 100_000),
            Err(Error::Domain(_))
        ));
    }
}
