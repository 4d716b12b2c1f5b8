//! Integer-lattice routines: Hermite row normal form, left kernels and exact
//! linear solves over Z. These canonicalize O_K-lattices (via coordinates)
//! and drive the residue enumeration for coset translations.
//!
//! Vectors are rows throughout. The normal form is the row-style echelon
//! with strictly increasing pivot columns, positive pivots, and the entries
//! above each pivot reduced into [0, pivot). It is the unique such basis of
//! the row lattice, so equality of normal forms decides lattice equality.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

fn row_sub(target: &mut [BigInt], source: &[BigInt], factor: &BigInt) {
    if factor.is_zero() {
        return;
    }
    for (t, s) in target.iter_mut().zip(source) {
        *t -= factor * s;
    }
}

/// Row Hermite normal form together with a unimodular transform U such that
/// U * input = (normal form rows, then zero rows).
pub fn row_hnf_with_transform(input: &[Vec<BigInt>]) -> (Vec<Vec<BigInt>>, Vec<Vec<BigInt>>) {
    let nrows = input.len();
    let ncols = input.first().map_or(0, |r| r.len());
    let mut m: Vec<Vec<BigInt>> = input.to_vec();
    let mut u: Vec<Vec<BigInt>> = (0..nrows)
        .map(|i| {
            (0..nrows)
                .map(|j| if i == j { BigInt::from(1) } else { BigInt::zero() })
                .collect()
        })
        .collect();
    let mut pivot = 0usize;
    for col in 0..ncols {
        if pivot == nrows {
            break;
        }
        // Gcd-reduce the column below `pivot` until a single nonzero remains.
        loop {
            let mut best: Option<usize> = None;
            for r in pivot..nrows {
                if !m[r][col].is_zero()
                    && best.map_or(true, |b| m[r][col].abs() < m[b][col].abs())
                {
                    best = Some(r);
                }
            }
            let Some(b) = best else { break };
            m.swap(pivot, b);
            u.swap(pivot, b);
            let mut clean = true;
            for r in pivot + 1..nrows {
                if !m[r][col].is_zero() {
                    let q = m[r][col].div_floor(&m[pivot][col]);
                    let (head, tail) = m.split_at_mut(r);
                    row_sub(&mut tail[0], &head[pivot], &q);
                    let (uh, ut) = u.split_at_mut(r);
                    row_sub(&mut ut[0], &uh[pivot], &q);
                    if !m[r][col].is_zero() {
                        clean = false;
                    }
                }
            }
            if clean {
                break;
            }
        }
        if m[pivot][col].is_zero() {
            continue;
        }
        if m[pivot][col].is_negative() {
            for x in m[pivot].iter_mut() {
                *x = -&*x;
            }
            for x in u[pivot].iter_mut() {
                *x = -&*x;
            }
        }
        // Reduce entries above the pivot into [0, pivot).
        for r in 0..pivot {
            let q = m[r][col].div_floor(&m[pivot][col]);
            if !q.is_zero() {
                let (head, tail) = m.split_at_mut(pivot);
                row_sub(&mut head[r], &tail[0], &q);
                let (uh, ut) = u.split_at_mut(pivot);
                row_sub(&mut uh[r], &ut[0], &q);
            }
        }
        pivot += 1;
    }
    (m, u)
}

/// Canonical basis of the row lattice, zero rows stripped.
pub fn row_hnf(input: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let (m, _) = row_hnf_with_transform(input);
    m.into_iter()
        .filter(|r| r.iter().any(|x| !x.is_zero()))
        .collect()
}

/// Basis of the left kernel {x : x * mat = 0} as a saturated lattice.
pub fn left_kernel(mat: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let (h, u) = row_hnf_with_transform(mat);
    h.iter()
        .zip(u)
        .filter(|(row, _)| row.iter().all(|x| x.is_zero()))
        .map(|(_, urow)| urow)
        .collect()
}

/// Solve x * mat = target over Z, if a solution exists.
pub fn solve_left(mat: &[Vec<BigInt>], target: &[BigInt]) -> Option<Vec<BigInt>> {
    let (h, u) = row_hnf_with_transform(mat);
    let ncols = target.len();
    let mut rest = target.to_vec();
    let mut y = vec![BigInt::zero(); mat.len()];
    for (i, hrow) in h.iter().enumerate() {
        let Some(pivot_col) = hrow.iter().position(|x| !x.is_zero()) else {
            break;
        };
        let (q, r) = rest[pivot_col].div_rem(&hrow[pivot_col]);
        if !r.is_zero() {
            return None;
        }
        for c in 0..ncols {
            let delta = &q * &hrow[c];
            rest[c] -= delta;
        }
        y[i] = q;
    }
    if rest.iter().any(|x| !x.is_zero()) {
        return None;
    }
    // x = y * U
    let n = mat.len();
    let mut x = vec![BigInt::zero(); n];
    for (i, yi) in y.iter().enumerate() {
        if yi.is_zero() {
            continue;
        }
        for j in 0..n {
            let delta = yi * &u[i][j];
            x[j] += delta;
        }
    }
    Some(x)
}

/// Flatten a normal form into a compact byte key for hashing and dedup.
pub fn compact_key(rows: &[Vec<BigInt>]) -> Vec<u8> {
    let mut out = Vec::with_capacity(rows.len() * rows.first().map_or(0, |r| r.len()) * 3);
    for row in rows {
        for x in row {
            let (sign, bytes) = x.to_bytes_le();
            out.push(match sign {
                num_bigint::Sign::Minus => 0,
                num_bigint::Sign::NoSign => 1,
                num_bigint::Sign::Plus => 2,
            });
            out.push(bytes.len() as u8);
            debug_assert!(bytes.len() < 256);
            out.extend_from_slice(&bytes);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::SplitMix64;

    fn bi(v: i64) -> BigInt {
        BigInt::from(v)
    }

    fn rows(data: &[&[i64]]) -> Vec<Vec<BigInt>> {
        data.iter()
            .map(|r| r.iter().map(|&x| bi(x)).collect())
            .collect()
    }

    #[test]
    fn hnf_simple() {
        let h = row_hnf(&rows(&[&[2, 0], &[0, 2], &[1, 1]]));
        assert_eq!(h, rows(&[&[1, 1], &[0, 2]]));
        let h = row_hnf(&rows(&[&[6, 0], &[0, 6], &[4, 2]]));
        assert_eq!(h, rows(&[&[2, 4], &[0, 6]]));
    }

    #[test]
    fn hnf_idempotent_and_transform_valid() {
        let mut rng = SplitMix64::new(7);
        for _ in 0..200 {
            let nr = 2 + (rng.below(3) as usize);
            let nc = 2 + (rng.below(3) as usize);
            let m: Vec<Vec<BigInt>> = (0..nr)
                .map(|_| (0..nc).map(|_| bi(rng.range_i64(-9, 9))).collect())
                .collect();
            let (h, u) = row_hnf_with_transform(&m);
            // u * m = h
            for i in 0..nr {
                for j in 0..nc {
                    let mut acc = BigInt::zero();
                    for k in 0..nr {
                        acc += &u[i][k] * &m[k][j];
                    }
                    assert_eq!(acc, h[i][j]);
                }
            }
            let stripped: Vec<_> = h
                .iter()
                .filter(|r| r.iter().any(|x| !x.is_zero()))
                .cloned()
                .collect();
            assert_eq!(row_hnf(&stripped), stripped);
        }
    }

    #[test]
    fn kernel_and_solve() {
        let m = rows(&[&[2, 4], &[1, 2], &[3, 6]]);
        let k = left_kernel(&m);
        assert_eq!(k.len(), 2);
        for v in &k {
            for j in 0..2 {
                let mut acc = BigInt::zero();
                for (i, vi) in v.iter().enumerate() {
                    acc += vi * &m[i][j];
                }
                assert!(acc.is_zero());
            }
        }
        let m = rows(&[&[1, 2, 0], &[0, 3, 1]]);
        let x = solve_left(&m, &[bi(2), bi(7), bi(1)]).unwrap();
        assert_eq!(x, vec![bi(2), bi(1)]);
        assert!(solve_left(&m, &[bi(0), bi(1), bi(0)]).is_none());
    }
}
