//! Exact matrices over K, the similitude groups they form, determinantal
//! divisor chains, and canonical right-coset keys.
//!
//! A 2n x 2n integral matrix M is a similitude of factor q when
//! conj(M)^tr * J * M = q * J for the standard symplectic-type form J.
//! The modular group is the case q = 1. Right cosets of the modular group
//! are separated exactly by the normal form of the O_K-row module, which we
//! compute as an integer-lattice normal form in 4n coordinates.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::field::{KElem, QuadField, SplitMix64};
use crate::ideal::IdealHnf;
use crate::zlattice::{compact_key, row_hnf};

/// A rectangular matrix with entries in K, all sharing one field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatK {
    field: QuadField,
    rows: usize,
    cols: usize,
    data: Vec<KElem>,
}

impl MatK {
    pub fn from_entries(
        field: QuadField,
        rows: usize,
        cols: usize,
        data: Vec<KElem>,
    ) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "expected {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        for e in &data {
            if e.field() != field {
                return Err(Error::MixedFields);
            }
        }
        Ok(MatK {
            field,
            rows,
            cols,
            data,
        })
    }

    pub fn from_fn(
        field: QuadField,
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> KElem,
    ) -> Self {
        let data = (0..rows * cols)
            .map(|i| f(i / cols, i % cols))
            .collect();
        MatK::from_entries(field, rows, cols, data).expect("generator closure")
    }

    pub fn zeros(field: QuadField, rows: usize, cols: usize) -> Self {
        MatK::from_fn(field, rows, cols, |_, _| KElem::zero(field))
    }

    pub fn identity(field: QuadField, n: usize) -> Self {
        MatK::from_fn(field, n, n, |i, j| {
            if i == j {
                KElem::one(field)
            } else {
                KElem::zero(field)
            }
        })
    }

    pub fn diag(field: QuadField, entries: &[KElem]) -> Self {
        let n = entries.len();
        MatK::from_fn(field, n, n, |i, j| {
            if i == j {
                entries[i].clone()
            } else {
                KElem::zero(field)
            }
        })
    }

    pub fn diag_ints(field: QuadField, entries: &[i64]) -> Self {
        let es: Vec<KElem> = entries
            .iter()
            .map(|&x| KElem::from_int(field, x))
            .collect();
        MatK::diag(field, &es)
    }

    /// The form J = (0 -I; I 0) of size 2n.
    pub fn j_matrix(field: QuadField, n: usize) -> Self {
        MatK::from_fn(field, 2 * n, 2 * n, |i, j| {
            if i < n && j == i + n {
                KElem::from_int(field, -1)
            } else if i >= n && j == i - n {
                KElem::one(field)
            } else {
                KElem::zero(field)
            }
        })
    }

    pub fn field(&self) -> QuadField {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, i: usize, j: usize) -> &KElem {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: KElem) {
        assert_eq!(v.field(), self.field);
        self.data[i * self.cols + j] = v;
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_integral(&self) -> bool {
        self.data.iter().all(|e| e.is_integral())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|e| e.is_zero())
    }

    pub fn transpose(&self) -> MatK {
        MatK::from_fn(self.field, self.cols, self.rows, |i, j| self.at(j, i).clone())
    }

    pub fn conj(&self) -> MatK {
        MatK::from_fn(self.field, self.rows, self.cols, |i, j| self.at(i, j).conj())
    }

    pub fn conj_transpose(&self) -> MatK {
        MatK::from_fn(self.field, self.cols, self.rows, |i, j| self.at(j, i).conj())
    }

    pub fn is_hermitian(&self) -> bool {
        self.is_square() && self.conj_transpose() == *self
    }

    pub fn scale(&self, r: &BigRational) -> MatK {
        MatK::from_fn(self.field, self.rows, self.cols, |i, j| self.at(i, j).scale(r))
    }

    pub fn scale_elem(&self, x: &KElem) -> MatK {
        MatK::from_fn(self.field, self.rows, self.cols, |i, j| self.at(i, j) * x)
    }

    pub fn block(&self, r0: usize, c0: usize, h: usize, w: usize) -> MatK {
        MatK::from_fn(self.field, h, w, |i, j| self.at(r0 + i, c0 + j).clone())
    }

    /// Split an even square matrix into its four n x n blocks (A B; C D).
    pub fn blocks(&self) -> Result<(MatK, MatK, MatK, MatK)> {
        if !self.is_square() || self.rows % 2 != 0 {
            return Err(Error::Dimension("expected an even square matrix".into()));
        }
        let n = self.rows / 2;
        Ok((
            self.block(0, 0, n, n),
            self.block(0, n, n, n),
            self.block(n, 0, n, n),
            self.block(n, n, n, n),
        ))
    }

    pub fn from_blocks(a: &MatK, b: &MatK, c: &MatK, d: &MatK) -> Result<MatK> {
        if a.rows != b.rows || c.rows != d.rows || a.cols != c.cols || b.cols != d.cols {
            return Err(Error::Dimension("ragged blocks".into()));
        }
        let field = a.field;
        let n0 = a.rows;
        let m0 = a.cols;
        Ok(MatK::from_fn(
            field,
            a.rows + c.rows,
            a.cols + b.cols,
            |i, j| match (i < n0, j < m0) {
                (true, true) => a.at(i, j).clone(),
                (true, false) => b.at(i, j - m0).clone(),
                (false, true) => c.at(i - n0, j).clone(),
                (false, false) => d.at(i - n0, j - m0).clone(),
            },
        ))
    }

    pub fn add(&self, rhs: &MatK) -> Result<MatK> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::Dimension("add shape mismatch".into()));
        }
        if self.field != rhs.field {
            return Err(Error::MixedFields);
        }
        Ok(MatK::from_fn(self.field, self.rows, self.cols, |i, j| {
            self.at(i, j) + rhs.at(i, j)
        }))
    }

    pub fn sub(&self, rhs: &MatK) -> Result<MatK> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::Dimension("sub shape mismatch".into()));
        }
        if self.field != rhs.field {
            return Err(Error::MixedFields);
        }
        Ok(MatK::from_fn(self.field, self.rows, self.cols, |i, j| {
            self.at(i, j) - rhs.at(i, j)
        }))
    }

    pub fn mul(&self, rhs: &MatK) -> Result<MatK> {
        if self.cols != rhs.rows {
            return Err(Error::Dimension("mul shape mismatch".into()));
        }
        if self.field != rhs.field {
            return Err(Error::MixedFields);
        }
        let n = self.cols;
        Ok(MatK::from_fn(self.field, self.rows, rhs.cols, |i, j| {
            let mut acc = KElem::zero(self.field);
            for k in 0..n {
                acc = &acc + &(self.at(i, k) * rhs.at(k, j));
            }
            acc
        }))
    }

    /// Exact determinant by dynamic programming over column subsets.
    pub fn det(&self) -> Result<KElem> {
        if !self.is_square() {
            return Err(Error::Dimension("determinant of non-square matrix".into()));
        }
        let n = self.rows;
        if n == 0 {
            return Ok(KElem::one(self.field));
        }
        assert!(n <= 16, "determinant size out of supported range");
        let mut cur: std::collections::HashMap<u32, KElem> = std::collections::HashMap::new();
        cur.insert(0, KElem::one(self.field));
        for r in 0..n {
            let mut next: std::collections::HashMap<u32, KElem> =
                std::collections::HashMap::with_capacity(cur.len() * (n - r));
            for (mask, v) in cur {
                if v.is_zero() {
                    continue;
                }
                for c in 0..n as u32 {
                    if mask & (1 << c) != 0 {
                        continue;
                    }
                    let e = self.at(r, c as usize);
                    if e.is_zero() {
                        continue;
                    }
                    let below = (mask & ((1 << c) - 1)).count_ones() as usize;
                    // Sign of extending the partial permutation by r -> c.
                    let term = if (r + below) % 2 == 0 {
                        &v * e
                    } else {
                        -&(&v * e)
                    };
                    next.entry(mask | (1 << c))
                        .and_modify(|acc| *acc = &*acc + &term)
                        .or_insert(term);
                }
            }
            cur = next;
        }
        Ok(cur
            .remove(&((1u32 << n) - 1))
            .unwrap_or_else(|| KElem::zero(self.field)))
    }

    /// Exact inverse over K by Gauss-Jordan elimination.
    pub fn inverse(&self) -> Result<MatK> {
        if !self.is_square() {
            return Err(Error::Dimension("inverse of non-square matrix".into()));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = MatK::identity(self.field, n);
        for col in 0..n {
            let pivot = (col..n)
                .find(|&r| !a.at(r, col).is_zero())
                .ok_or(Error::Singular)?;
            if pivot != col {
                for j in 0..n {
                    let tmp = a.at(pivot, j).clone();
                    a.set(pivot, j, a.at(col, j).clone());
                    a.set(col, j, tmp);
                    let tmp = inv.at(pivot, j).clone();
                    inv.set(pivot, j, inv.at(col, j).clone());
                    inv.set(col, j, tmp);
                }
            }
            let pv = a.at(col, col).inv()?;
            for j in 0..n {
                a.set(col, j, a.at(col, j) * &pv);
                inv.set(col, j, inv.at(col, j) * &pv);
            }
            for r in 0..n {
                if r == col || a.at(r, col).is_zero() {
                    continue;
                }
                let f = a.at(r, col).clone();
                for j in 0..n {
                    a.set(r, j, &(a.at(r, j).clone()) - &(&f * a.at(col, j)));
                    inv.set(r, j, &(inv.at(r, j).clone()) - &(&f * inv.at(col, j)));
                }
            }
        }
        Ok(inv)
    }

    /// conj(M)^tr * J * M.
    pub fn j_transform(&self) -> Result<MatK> {
        if !self.is_square() || self.rows % 2 != 0 {
            return Err(Error::Dimension("expected an even square matrix".into()));
        }
        let j = MatK::j_matrix(self.field, self.rows / 2);
        self.conj_transpose().mul(&j)?.mul(self)
    }

    /// The factor q with conj(M)^tr J M = qJ, when M is such a similitude.
    pub fn similitude_factor(&self) -> Result<Option<BigInt>> {
        if !self.is_square() || self.rows % 2 != 0 {
            return Err(Error::Dimension("expected an even square matrix".into()));
        }
        if !self.is_integral() {
            return Err(Error::NotIntegral);
        }
        let n = self.rows / 2;
        let jm = self.j_transform()?;
        let q = match jm.at(n, 0).as_integer() {
            Some(q) if q.is_positive() => q,
            _ => return Ok(None),
        };
        let expected = MatK::j_matrix(self.field, n)
            .scale(&BigRational::from(q.clone()));
        if jm == expected {
            // Sanity: norm(det M) = q^(2n).
            debug_assert_eq!(
                self.det().unwrap().norm(),
                BigRational::from(q.pow(2 * n as u32))
            );
            Ok(Some(q))
        } else {
            Ok(None)
        }
    }

    /// Modular-group membership; with a level q it additionally requires
    /// M = I mod q entrywise.
    pub fn is_modular(&self, level: Option<&BigInt>) -> bool {
        if !self.is_square() || self.rows % 2 != 0 || !self.is_integral() {
            return false;
        }
        match self.similitude_factor() {
            Ok(Some(q)) if q.is_one() => {}
            _ => return false,
        }
        if let Some(q) = level {
            let n = self.rows;
            for i in 0..n {
                for j in 0..n {
                    let mut e = self.at(i, j).clone();
                    if i == j {
                        e = &e - &KElem::one(self.field);
                    }
                    if !(e.coord_a().mod_floor(q)).is_zero()
                        || !(e.coord_b().mod_floor(q)).is_zero()
                    {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Submatrix determinant for the given row and column subsets.
    fn minor(&self, rs: &[usize], cs: &[usize]) -> KElem {
        let sub = MatK::from_fn(self.field, rs.len(), cs.len(), |i, j| {
            self.at(rs[i], cs[j]).clone()
        });
        sub.det().expect("square minor")
    }

    /// Determinantal divisor chain: the k-th entry is the ideal generated by
    /// all k x k minors, for k = 1..=up_to. The chain stops early if the
    /// matrix rank is reached.
    pub fn detdiv_chain(&self, up_to: usize) -> Result<DetDivChain> {
        if !self.is_integral() {
            return Err(Error::NotIntegral);
        }
        let max_k = self.rows.min(self.cols);
        if up_to > max_k {
            return Err(Error::Dimension(format!(
                "minor size {} exceeds matrix rank bound {}",
                up_to, max_k
            )));
        }
        let mut chain = Vec::with_capacity(up_to);
        for k in 1..=up_to {
            let mut gens = Vec::new();
            for rs in subsets(self.rows, k) {
                for cs in subsets(self.cols, k) {
                    let m = self.minor(&rs, &cs);
                    if !m.is_zero() {
                        gens.push(m);
                    }
                }
            }
            if gens.is_empty() {
                break;
            }
            chain.push(IdealHnf::from_generators(self.field, &gens)?);
        }
        Ok(DetDivChain {
            field: self.field,
            chain,
        })
    }

    /// Canonical key of the right coset (modular group) * M: the normal form
    /// of the O_K-row module of M in integer coordinates. Equal keys are
    /// equivalent to equal right cosets.
    pub fn row_lattice_key(&self) -> Result<RowKey> {
        let q = self
            .similitude_factor()?
            .ok_or(Error::NotSimilitude)?;
        let _ = q;
        Ok(self.row_lattice_key_unchecked())
    }

    /// Same as `row_lattice_key` but without the similitude validation;
    /// enumeration uses this on matrices it constructed itself.
    pub fn row_lattice_key_unchecked(&self) -> RowKey {
        let omega = KElem::omega(self.field);
        let dim = self.cols;
        let mut rows = Vec::with_capacity(2 * self.rows);
        for i in 0..self.rows {
            let mut plain = Vec::with_capacity(2 * dim);
            let mut twisted = Vec::with_capacity(2 * dim);
            for j in 0..dim {
                let e = self.at(i, j);
                debug_assert!(e.is_integral());
                plain.push(e.coord_a().clone());
                plain.push(e.coord_b().clone());
                let w = &omega * e;
                twisted.push(w.coord_a().clone());
                twisted.push(w.coord_b().clone());
            }
            rows.push(plain);
            rows.push(twisted);
        }
        RowKey(compact_key(&row_hnf(&rows)))
    }

    /// Decide equality of right cosets by exact membership of M1 * M2^-1.
    pub fn right_coset_equal(&self, other: &MatK) -> Result<bool> {
        if self.field != other.field {
            return Err(Error::MixedFields);
        }
        let q1 = self.similitude_factor()?.ok_or(Error::NotSimilitude)?;
        let q2 = other.similitude_factor()?.ok_or(Error::NotSimilitude)?;
        if q1 != q2 {
            return Err(Error::SimilitudeMismatch);
        }
        let u = self.mul(&other.inverse()?)?;
        Ok(u.is_integral() && u.is_modular(None))
    }
}

impl std::fmt::Display for MatK {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for i in 0..self.rows {
            write!(f, "[")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.at(i, j))?;
            }
            writeln!(f, "]")?;
        }
        Ok(())
    }
}

/// Compact canonical invariant of a right coset, usable as a map key.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RowKey(pub Vec<u8>);

/// The chain of determinantal divisor ideals of an integral matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DetDivChain {
    pub field: QuadField,
    pub chain: Vec<IdealHnf>,
}

impl DetDivChain {
    pub fn rank(&self) -> usize {
        self.chain.len()
    }

    /// Consecutive divisibility of the chain ideals.
    pub fn is_divisibility_chain(&self) -> bool {
        self.chain
            .windows(2)
            .all(|w| w[0].divides(&w[1]).unwrap_or(false))
    }
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Translation (I H; 0 I) for integral Hermitian H.
pub fn translation(h: &MatK) -> Result<MatK> {
    if !h.is_hermitian() || !h.is_integral() {
        return Err(Error::Domain("translation block must be integral Hermitian".into()));
    }
    let n = h.rows();
    let field = h.field();
    let id = MatK::identity(field, n);
    let z = MatK::zeros(field, n, n);
    MatK::from_blocks(&id, h, &z, &id)
}

/// Rotation diag(conj(U)^tr, U^-1) for invertible U over K.
pub fn rotation(u: &MatK) -> Result<MatK> {
    if !u.is_square() {
        return Err(Error::Dimension("rotation block must be square".into()));
    }
    let n = u.rows();
    let field = u.field();
    let z = MatK::zeros(field, n, n);
    MatK::from_blocks(&u.conj_transpose(), &z, &z, &u.inverse()?)
}

/// A generating set of the degree-n modular group: the inversion J,
/// translations along a Z-basis of the integral Hermitian matrices, and
/// rotations by elementary GL_n(O_K) matrices.
pub fn modular_generators(field: QuadField, n: usize) -> Vec<MatK> {
    let mut gens = vec![MatK::j_matrix(field, n)];
    for h in hermitian_basis(field, n) {
        gens.push(translation(&h).unwrap());
    }
    for u in elementary_units(field, n) {
        gens.push(rotation(&u).unwrap());
    }
    gens
}

/// Z-basis of the integral Hermitian n x n matrices.
pub fn hermitian_basis(field: QuadField, n: usize) -> Vec<MatK> {
    let mut basis = Vec::new();
    let omega = KElem::omega(field);
    for i in 0..n {
        let mut m = MatK::zeros(field, n, n);
        m.set(i, i, KElem::one(field));
        basis.push(m);
    }
    for i in 0..n {
        for j in i + 1..n {
            let mut m = MatK::zeros(field, n, n);
            m.set(i, j, KElem::one(field));
            m.set(j, i, KElem::one(field));
            basis.push(m);
            let mut m = MatK::zeros(field, n, n);
            m.set(i, j, omega.clone());
            m.set(j, i, omega.conj());
            basis.push(m);
        }
    }
    basis
}

/// Elementary GL_n(O_K) matrices: unit scalings, transpositions and shears.
fn elementary_units(field: QuadField, n: usize) -> Vec<MatK> {
    let omega = KElem::omega(field);
    let mut out = Vec::new();
    for u in field.units() {
        if u.is_one() {
            continue;
        }
        let mut m = MatK::identity(field, n);
        m.set(0, 0, u);
        out.push(m);
    }
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let mut m = MatK::identity(field, n);
            m.set(i, j, KElem::one(field));
            out.push(m);
            let mut m = MatK::identity(field, n);
            m.set(i, j, omega.clone());
            out.push(m);
        }
    }
    if n > 1 {
        for i in 0..n - 1 {
            let mut m = MatK::identity(field, n);
            m.set(i, i, KElem::zero(field));
            m.set(i + 1, i + 1, KElem::zero(field));
            m.set(i, i + 1, KElem::one(field));
            m.set(i + 1, i, KElem::one(field));
            out.push(m);
        }
    }
    out
}

/// A pseudorandom word in the modular group generators, for property drivers.
pub fn random_modular(field: QuadField, n: usize, rng: &mut SplitMix64, length: usize) -> MatK {
    let gens = modular_generators(field, n);
    let mut m = MatK::identity(field, 2 * n);
    for _ in 0..length {
        let pick = &gens[rng.below(gens.len() as u64) as usize];
        let factor = if rng.below(2) == 0 {
            pick.clone()
        } else {
            pick.inverse().expect("group element")
        };
        m = m.mul(&factor).unwrap();
    }
    debug_assert!(m.is_modular(None));
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(m: u64) -> QuadField {
        QuadField::new(m).unwrap()
    }

    #[test]
    fn j_and_similitudes() {
        for m in [1u64, 5, 11] {
            let f = q(m);
            for n in 1..=2 {
                let j = MatK::j_matrix(f, n);
                assert_eq!(j.det().unwrap(), KElem::one(f));
                let id = MatK::identity(f, 2 * n);
                assert_eq!(id.j_transform().unwrap(), j);
                assert_eq!(id.similitude_factor().unwrap(), Some(BigInt::one()));
            }
        }
        // n = 1 over Q(i): diag(1, 3) has factor 3.
        let fi = q(1);
        let m = MatK::diag_ints(fi, &[1, 3]);
        assert_eq!(m.similitude_factor().unwrap(), Some(BigInt::from(3)));
        assert_eq!(
            m.j_transform().unwrap(),
            MatK::j_matrix(fi, 1).scale(&BigRational::from(BigInt::from(3)))
        );
        // diag(1,...,1,p,...,p) has factor p.
        let m = MatK::diag_ints(fi, &[1, 1, 3, 3]);
        assert_eq!(m.similitude_factor().unwrap(), Some(BigInt::from(3)));
        // Not a similitude.
        let m = MatK::diag_ints(fi, &[1, 1, 1, 2]);
        assert_eq!(m.similitude_factor().unwrap(), None);
    }

    #[test]
    fn membership() {
        let f = q(1);
        let id = MatK::identity(f, 4);
        assert!(id.is_modular(Some(&BigInt::from(7))));
        let h = MatK::from_entries(
            f,
            2,
            2,
            vec![
                KElem::from_int(f, 2),
                KElem::from_coords(f, 1, 1),
                KElem::from_coords(f, 1, -1),
                KElem::from_int(f, -3),
            ],
        )
        .unwrap();
        assert!(h.is_hermitian());
        let t = translation(&h).unwrap();
        assert!(t.is_modular(None));
        assert!(!t.is_modular(Some(&BigInt::from(5))));
        assert!(!MatK::diag_ints(f, &[1, 3, 3, 1]).is_modular(None));
        let jj = MatK::j_matrix(f, 2);
        assert!(jj.is_modular(None));
    }

    #[test]
    fn det_and_inverse() {
        let f = q(5);
        let mut rng = SplitMix64::new(3);
        for _ in 0..40 {
            let n = 2 + (rng.below(3) as usize);
            let a = MatK::from_fn(f, n, n, |_, _| {
                KElem::from_coords(f, rng.range_i64(-4, 4), rng.range_i64(-2, 2))
            });
            let b = MatK::from_fn(f, n, n, |_, _| {
                KElem::from_coords(f, rng.range_i64(-4, 4), rng.range_i64(-2, 2))
            });
            let prod = a.mul(&b).unwrap();
            assert_eq!(
                prod.det().unwrap(),
                &a.det().unwrap() * &b.det().unwrap()
            );
            if !a.det().unwrap().is_zero() {
                let inv = a.inverse().unwrap();
                assert_eq!(a.mul(&inv).unwrap(), MatK::identity(f, n));
            }
        }
        assert!(matches!(
            MatK::zeros(f, 2, 2).inverse(),
            Err(Error::Singular)
        ));
    }

    #[test]
    fn detdiv_chains() {
        let fi = q(1);
        // diag(1, 3, 9, 3): partial products of sorted elementary divisors.
        let m = MatK::diag_ints(fi, &[1, 3, 9, 3]);
        let chain = m.detdiv_chain(4).unwrap();
        let expected: Vec<BigInt> = [1i64, 3, 9, 81].iter().map(|&x| BigInt::from(x)).collect();
        for (ideal, r) in chain.chain.iter().zip(&expected) {
            assert_eq!(ideal.as_rational_multiple().as_ref(), Some(r));
        }
        assert!(chain.is_divisibility_chain());

        let id = MatK::identity(fi, 4);
        for ideal in id.detdiv_chain(4).unwrap().chain {
            assert_eq!(ideal, IdealHnf::unit_ideal(fi));
        }

        // Non-principal first divisor over Q(sqrt(-5)): diag(2, 1 + sqrt(-5)).
        let f5 = q(5);
        let m = MatK::diag(
            f5,
            &[KElem::from_int(f5, 2), KElem::from_coords(f5, 1, 1)],
        );
        let chain = m.detdiv_chain(2).unwrap();
        let p2 = IdealHnf::from_generators(
            f5,
            &[KElem::from_int(f5, 2), KElem::from_coords(f5, 1, 1)],
        )
        .unwrap();
        assert_eq!(chain.chain[0], p2);
        assert_eq!(chain.chain[0].as_rational_multiple(), None);
        assert_eq!(
            chain.chain[1],
            IdealHnf::principal(f5, &KElem::from_coords(f5, 2, 2)).unwrap()
        );
    }

    #[test]
    fn detdiv_invariance() {
        let fi = q(1);
        let m0 = MatK::diag_ints(fi, &[1, 3, 9, 3]);
        let base = m0.detdiv_chain(4).unwrap();
        let mut rng = SplitMix64::new(17);
        for _ in 0..100 {
            let l = random_modular(fi, 2, &mut rng, 4);
            let r = random_modular(fi, 2, &mut rng, 4);
            let m = l.mul(&m0).unwrap().mul(&r).unwrap();
            assert_eq!(m.detdiv_chain(4).unwrap(), base);
        }
    }

    #[test]
    fn row_keys_and_coset_equality() {
        let fi = q(1);
        let m = MatK::diag_ints(fi, &[1, 3, 3, 1]);
        // diag(1,3,3,1) is a similitude of factor 3 at n = 2.
        assert_eq!(m.similitude_factor().unwrap(), Some(BigInt::from(3)));
        let key = m.row_lattice_key().unwrap();
        let mut rng = SplitMix64::new(23);
        for _ in 0..50 {
            let l = random_modular(fi, 2, &mut rng, 4);
            let lm = l.mul(&m).unwrap();
            assert_eq!(lm.row_lattice_key().unwrap(), key);
            assert!(lm.right_coset_equal(&m).unwrap());
        }
        let other = MatK::diag_ints(fi, &[3, 1, 1, 3]);
        assert_ne!(other.row_lattice_key().unwrap(), key);
        assert!(!other.right_coset_equal(&m).unwrap());
        // Right multiplication generically changes the coset.
        let r = translation(&{
            let mut h = MatK::zeros(fi, 2, 2);
            h.set(0, 0, KElem::one(fi));
            h
        })
        .unwrap();
        let mr = m.mul(&r).unwrap();
        assert_eq!(
            mr.right_coset_equal(&m).unwrap(),
            mr.row_lattice_key().unwrap() == key
        );
        assert!(matches!(
            m.right_coset_equal(&MatK::identity(fi, 4)),
            Err(Error::SimilitudeMismatch)
        ));
    }

    #[test]
    fn key_idempotence() {
        let fi = q(1);
        let m = MatK::diag_ints(fi, &[1, 3, 3, 1]);
        let k1 = m.row_lattice_key().unwrap();
        let k2 = m.row_lattice_key().unwrap();
        assert_eq!(k1, k2);
    }

    #[test]
    fn generators_are_modular() {
        for m in [1u64, 3, 5, 11] {
            let f = q(m);
            for n in 1..=2 {
                for g in modular_generators(f, n) {
                    assert!(g.is_modular(None), "m={m} n={n}");
                }
            }
        }
    }
}
