use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exact::matrix::IntegerMatrix;

/// Row echelon form together with the unimodular transform producing it.
#[derive(Clone, Debug)]
pub struct Echelon {
    pub h: IntegerMatrix,
    pub u: IntegerMatrix,
    pub rank: usize,
    pub pivots: Vec<usize>,
}

// Replace rows (a, b) of `m` by (s*a + t*b, x*a + y*b).
fn combine_rows(m: &mut IntegerMatrix, a: usize, b: usize, s: &BigInt, t: &BigInt, x: &BigInt, y: &BigInt) {
    for j in 0..m.cols() {
        let ra = m[(a, j)].clone();
        let rb = m[(b, j)].clone();
        if ra.is_zero() && rb.is_zero() {
            continue;
        }
        m[(a, j)] = s * &ra + t * &rb;
        m[(b, j)] = x * &ra + y * &rb;
    }
}

fn sub_multiple(m: &mut IntegerMatrix, target: usize, src: usize, q: &BigInt) {
    for j in 0..m.cols() {
        if m[(src, j)].is_zero() {
            continue;
        }
        let delta = q * &m[(src, j)];
        m[(target, j)] -= delta;
    }
}

fn negate_row(m: &mut IntegerMatrix, i: usize) {
    for x in m.row_mut(i) {
        *x = -std::mem::take(x);
    }
}

/// Row-style Hermite echelon form of any integer matrix, zero rows last.
///
/// `h = u * m`, `u` unimodular, pivots positive, entries above pivots
/// reduced into `[0, pivot)`.
pub fn echelon_with_transform(m: &IntegerMatrix) -> Echelon {
    let mut h = m.clone();
    let mut u = IntegerMatrix::identity(m.rows());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..h.cols() {
        if r == h.rows() {
            break;
        }
        for i in r + 1..h.rows() {
            if h[(i, c)].is_zero() {
                continue;
            }
            if h[(r, c)].is_zero() {
                h.swap_rows(r, i);
                u.swap_rows(r, i);
                continue;
            }
            let a = h[(r, c)].clone();
            let b = h[(i, c)].clone();
            let eg = a.extended_gcd(&b);
            let (g, s, t) = if eg.gcd.is_negative() {
                (-eg.gcd, -eg.x, -eg.y)
            } else {
                (eg.gcd, eg.x, eg.y)
            };
            // [[s, t], [-b/g, a/g]] has determinant (s*a + t*b)/g = 1.
            let x = -(&b / &g);
            let y = &a / &g;
            combine_rows(&mut h, r, i, &s, &t, &x, &y);
            combine_rows(&mut u, r, i, &s, &t, &x, &y);
        }
        if h[(r, c)].is_zero() {
            continue;
        }
        if h[(r, c)].is_negative() {
            negate_row(&mut h, r);
            negate_row(&mut u, r);
        }
        let pivot = h[(r, c)].clone();
        for i in 0..r {
            let q = h[(i, c)].div_floor(&pivot);
            if !q.is_zero() {
                sub_multiple(&mut h, i, r, &q);
                sub_multiple(&mut u, i, r, &q);
            }
        }
        pivots.push(c);
        r += 1;
    }
    Echelon { h, u, rank: r, pivots }
}

/// Hermite normal form of a full-row-rank matrix.
pub fn hnf(m: &IntegerMatrix) -> Result<(IntegerMatrix, IntegerMatrix)> {
    if m.rows() == 0 {
        return Err(Error::argument("empty matrix"));
    }
    let e = echelon_with_transform(m);
    if e.rank < m.rows() {
        return Err(Error::RankDeficient { rank: e.rank, rows: m.rows() });
    }
    Ok((e.h, e.u))
}

/// Invariant factors (Smith normal form diagonal), each dividing the next.
pub fn snf(m: &IntegerMatrix) -> Vec<BigInt> {
    let rows = m.rows();
    let cols = m.cols();
    let mut a = m.clone();
    let mut diag = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        // Smallest nonzero entry of the trailing block becomes the pivot.
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if a[(i, j)].is_zero() {
                    continue;
                }
                if best.is_none_or(|(bi, bj)| a[(i, j)].abs() < a[(bi, bj)].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        a.swap_rows(t, pi);
        swap_cols(&mut a, t, pj);
        loop {
            let pivot = a[(t, t)].clone();
            let mut clean = true;
            for i in t + 1..rows {
                if a[(i, t)].is_zero() {
                    continue;
                }
                let q = a[(i, t)].div_floor(&pivot);
                sub_multiple(&mut a, i, t, &q);
                clean &= a[(i, t)].is_zero();
            }
            for j in t + 1..cols {
                if a[(t, j)].is_zero() {
                    continue;
                }
                let q = a[(t, j)].div_floor(&pivot);
                for i in t..rows {
                    let delta = &q * &a[(i, t)];
                    a[(i, j)] -= delta;
                }
                clean &= a[(t, j)].is_zero();
            }
            if clean {
                break;
            }
            // A nonzero remainder smaller than the pivot is left somewhere in
            // row t or column t; move it to the corner and repeat.
            let mut best = (t, t);
            for i in t + 1..rows {
                if !a[(i, t)].is_zero() && a[(i, t)].abs() < a[best].abs() {
                    best = (i, t);
                }
            }
            for j in t + 1..cols {
                if !a[(t, j)].is_zero() && a[(t, j)].abs() < a[best].abs() {
                    best = (t, j);
                }
            }
            a.swap_rows(t, best.0);
            swap_cols(&mut a, t, best.1);
        }
        diag.push(a[(t, t)].abs());
        t += 1;
    }
    for i in 0..diag.len() {
        for j in i + 1..diag.len() {
            let g = diag[i].gcd(&diag[j]);
            let l = &diag[i] / &g * &diag[j];
            diag[i] = g;
            diag[j] = l;
        }
    }
    diag
}

fn swap_cols(m: &mut IntegerMatrix, a: usize, b: usize) {
    if a == b {
        return;
    }
    for i in 0..m.rows() {
        let tmp = std::mem::take(&mut m[(i, a)]);
        m[(i, a)] = std::mem::replace(&mut m[(i, b)], tmp);
    }
}

fn require_full_row_rank(m: &IntegerMatrix) -> Result<()> {
    if m.rows() == 0 {
        return Err(Error::argument("empty matrix"));
    }
    let rank = m.rank();
    if rank < m.rows() {
        return Err(Error::RankDeficient { rank, rows: m.rows() });
    }
    Ok(())
}

/// True iff the rows extend to a basis of the integer lattice.
pub fn is_primitive(m: &IntegerMatrix) -> Result<bool> {
    require_full_row_rank(m)?;
    Ok(snf(m).iter().all(One::is_one))
}

/// Basis (as rows) of `{x in Z^n : m x^T = 0}`. May have zero rows.
pub fn integer_kernel(m: &IntegerMatrix) -> IntegerMatrix {
    let e = echelon_with_transform(&m.transpose());
    e.u.select_rows(e.rank..e.u.rows())
}

/// HNF basis of the rational row space of `m` intersected with `Z^n`.
pub fn saturate(m: &IntegerMatrix) -> Result<IntegerMatrix> {
    require_full_row_rank(m)?;
    Ok(saturate_unchecked(m))
}

pub(crate) fn saturate_unchecked(m: &IntegerMatrix) -> IntegerMatrix {
    let closure = integer_kernel(&integer_kernel(m));
    echelon_with_transform(&closure).h
}
