use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::enumerate::GramSchmidt;
use crate::exact::{IntegerMatrix, Rational, RationalMatrix};

fn delta() -> Rational {
    BigRational::new(3.into(), 4.into())
}

fn row_axpy<T>(m: &mut crate::exact::Matrix<T>, target: usize, src: usize, q: &T)
where
    T: Clone + Zero + std::ops::SubAssign,
    for<'a> &'a T: std::ops::Mul<&'a T, Output = T>,
{
    for j in 0..m.cols() {
        let delta = q * &m[(src, j)];
        m[(target, j)] -= delta;
    }
}

/// LLL reduction with `delta = 3/4`; returns the reduced basis and the
/// unimodular `u` with `reduced = u * basis`.
pub(crate) fn lll(basis: &RationalMatrix) -> (RationalMatrix, IntegerMatrix) {
    let r = basis.rows();
    let mut b = basis.clone();
    let mut u = IntegerMatrix::identity(r);
    if r < 2 {
        return (b, u);
    }
    let mut gs = GramSchmidt::from_gram(&b.gram());
    let mut k = 1;
    while k < r {
        for j in (0..k).rev() {
            let q = gs.mu[k][j].round();
            if q.is_zero() {
                continue;
            }
            row_axpy(&mut b, k, j, &q);
            row_axpy(&mut u, k, j, &q.to_integer());
            for i in 0..j {
                let delta = &q * &gs.mu[j][i];
                gs.mu[k][i] -= delta;
            }
            gs.mu[k][j] -= &q;
        }
        let m = &gs.mu[k][k - 1];
        let lovasz = (delta() - m * m) * &gs.bstar[k - 1];
        if gs.bstar[k] >= lovasz {
            k += 1;
        } else {
            b.swap_rows(k, k - 1);
            u.swap_rows(k, k - 1);
            gs = GramSchmidt::from_gram(&b.gram());
            k = (k - 1).max(1);
        }
    }
    (b, u)
}

/// Checks size reduction and the Lovász condition exactly.
pub fn is_lll_reduced(basis: &RationalMatrix) -> bool {
    let gs = GramSchmidt::from_gram(&basis.gram());
    let half = BigRational::new(BigInt::one(), 2.into());
    for i in 0..basis.rows() {
        for j in 0..i {
            if num_traits::Signed::abs(&gs.mu[i][j]) > half {
                return false;
            }
        }
        if i > 0 {
            let m = &gs.mu[i][i - 1];
            if gs.bstar[i] < (delta() - m * m) * &gs.bstar[i - 1] {
                return false;
            }
        }
    }
    true
}
