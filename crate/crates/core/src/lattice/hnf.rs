//! Exact integer row reduction: Hermite normal form and integer kernels.
//!
//! Matrices are dense `Vec<Vec<BigInt>>` in row-major order. All routines use
//! unimodular row operations only, so the row lattice is preserved.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type IntMatrix = Vec<Vec<BigInt>>;

fn sub_multiple(target: &mut [BigInt], source: &[BigInt], q: &BigInt) {
    if q.is_zero() {
        return;
    }
    for (t, s) in target.iter_mut().zip(source) {
        *t -= q * s;
    }
}

/// Row echelon reduction restricted to the first `ncols` columns.
///
/// Returns the reduced matrix and the number of pivot rows. Rows past the
/// pivot count are zero in the first `ncols` columns.
fn echelon(mut rows: IntMatrix, ncols: usize, reduce_above: bool) -> (IntMatrix, usize) {
    let nrows = rows.len();
    let mut p = 0;
    for c in 0..ncols {
        if p == nrows {
            break;
        }
        // Euclid on column c among rows p.. until a single nonzero entry remains.
        loop {
            let mut best: Option<usize> = None;
            for i in p..nrows {
                if !rows[i][c].is_zero()
                    && best.map_or(true, |b| rows[i][c].abs() < rows[b][c].abs())
                {
                    best = Some(i);
                }
            }
            let Some(b) = best else { break };
            rows.swap(p, b);
            let mut done = true;
            for i in (p + 1)..nrows {
                if rows[i][c].is_zero() {
                    continue;
                }
                let q = rows[i][c].div_floor(&rows[p][c]);
                let pivot_row = rows[p].clone();
                sub_multiple(&mut rows[i], &pivot_row, &q);
                if !rows[i][c].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if rows[p][c].is_zero() {
            continue;
        }
        if rows[p][c].is_negative() {
            for e in rows[p].iter_mut() {
                *e = -e.clone();
            }
        }
        if reduce_above {
            let pivot_row = rows[p].clone();
            for i in 0..p {
                let q = rows[i][c].div_floor(&pivot_row[c]);
                sub_multiple(&mut rows[i], &pivot_row, &q);
            }
        }
        p += 1;
    }
    (rows, p)
}

/// Row Hermite normal form of the lattice spanned by `rows` (each of length `d`).
///
/// Zero rows are dropped; pivots are positive and entries above each pivot lie
/// in `[0, pivot)`. Two generating sets give the same output iff they span the
/// same lattice.
pub fn hermite_rows(rows: IntMatrix, d: usize) -> IntMatrix {
    let (reduced, rank) = echelon(rows, d, true);
    reduced.into_iter().take(rank).collect()
}

/// A basis of the integer kernel `{x ∈ Z^d : A x = 0}` of the `m × d` matrix
/// `a`, returned as rows in Hermite normal form. The result is saturated.
pub fn integer_kernel(a: &IntMatrix, d: usize) -> IntMatrix {
    let m = a.len();
    // Row j of the augmented matrix is (column j of A | e_j).
    let aug: IntMatrix = (0..d)
        .map(|j| {
            let mut row: Vec<BigInt> = a.iter().map(|r| r[j].clone()).collect();
            row.extend((0..d).map(|i| if i == j { BigInt::one() } else { BigInt::zero() }));
            row
        })
        .collect();
    let (reduced, rank) = echelon(aug, m, false);
    let kernel: IntMatrix = reduced
        .into_iter()
        .skip(rank)
        .map(|row| row[m..].to_vec())
        .collect();
    hermite_rows(kernel, d)
}

/// Exact determinant of a square rational matrix by Gaussian elimination.
pub fn determinant(mut m: Vec<Vec<BigRational>>) -> BigRational {
    let n = m.len();
    let mut det = BigRational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !m[i][c].is_zero()) else {
            return BigRational::zero();
        };
        if p != c {
            m.swap(p, c);
            det = -det;
        }
        let pivot = m[c][c].clone();
        det *= &pivot;
        for i in (c + 1)..n {
            if m[i][c].is_zero() {
                continue;
            }
            let f = &m[i][c] / &pivot;
            for j in c..n {
                let v = &f * &m[c][j];
                m[i][j] -= v;
            }
        }
    }
    det
}

/// Inverse of a nonsingular square rational matrix (Gauss–Jordan).
pub fn inverse(m: &[Vec<BigRational>]) -> Option<Vec<Vec<BigRational>>> {
    let n = m.len();
    let mut a: Vec<Vec<BigRational>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| {
                if i == j {
                    BigRational::one()
                } else {
                    BigRational::zero()
                }
            }));
            r
        })
        .collect();
    for c in 0..n {
        let p = (c..n).find(|&i| !a[i][c].is_zero())?;
        a.swap(p, c);
        let pivot = a[c][c].clone();
        for e in a[c].iter_mut() {
            *e /= &pivot;
        }
        for i in 0..n {
            if i == c || a[i][c].is_zero() {
                continue;
            }
            let f = a[i][c].clone();
            for j in 0..2 * n {
                let v = &f * &a[c][j];
                a[i][j] -= v;
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

pub fn to_big(rows: &[Vec<i64>]) -> IntMatrix {
    rows.iter()
        .map(|r| r.iter().map(|&c| BigInt::from(c)).collect())
        .collect()
}
