#![allow(dead_code)]

use grasscount_core::{IntegerMatrix, Lattice, Rational, RationalMatrix};
use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use proptest::prelude::*;

pub fn q(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn ints(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

/// Full-rank `n x n` rational bases with small numerators and denominators.
pub fn lattice(n: usize, bound: i64) -> impl Strategy<Value = Lattice> {
    (prop::collection::vec(-bound..=bound, n * n), prop::collection::vec(1i64..=3, n)).prop_filter_map(
        "full rank",
        move |(v, dens)| {
            let rows: Vec<Vec<Rational>> = v
                .chunks(n)
                .zip(&dens)
                .map(|(r, &d)| r.iter().map(|&x| q(x, d)).collect())
                .collect();
            Lattice::new(RationalMatrix::from_rows(&rows).ok()?).ok()
        },
    )
}

pub fn integer_lattice(n: usize, bound: i64) -> impl Strategy<Value = Lattice> {
    prop::collection::vec(-bound..=bound, n * n).prop_filter_map("full rank", move |v| {
        let rows: Vec<Vec<BigInt>> = v.chunks(n).map(ints).collect();
        Lattice::from_integer_basis(&IntegerMatrix::from_rows(&rows).ok()?).ok()
    })
}

/// Every nonzero coordinate vector with `x G x^T <= r2`, by scanning the box
/// `|x_i| <= sqrt(r2 (G^-1)_ii)`. Independent of the library's enumerator.
pub fn box_points(l: &Lattice, r2: &Rational) -> Vec<(Vec<i64>, Rational)> {
    box_points_gram(l.gram(), r2)
}

pub fn box_points_gram(g: &RationalMatrix, r2: &Rational) -> Vec<(Vec<i64>, Rational)> {
    box_points_filtered(g, r2, |_| true)
}

/// As `box_points_gram`, keeping only points accepted by `keep`. A float
/// prefilter skips the exact check for points clearly outside.
pub fn box_points_filtered(g: &RationalMatrix, r2: &Rational, keep: impl Fn(&[i64]) -> bool) -> Vec<(Vec<i64>, Rational)> {
    let n = g.rows();
    let inv = g.inverse().unwrap();
    let bounds: Vec<i64> = (0..n)
        .map(|i| {
            let b = (r2 * &inv[(i, i)]).to_f64().unwrap().max(0.0).sqrt();
            b.floor() as i64 + 1
        })
        .collect();
    let gf: Vec<f64> = g.entries().iter().map(|x| x.to_f64().unwrap()).collect();
    let limit = r2.to_f64().unwrap() * (1.0 + 1e-9) + 1e-9;
    let mut out = Vec::new();
    let mut x: Vec<i64> = bounds.iter().map(|b| -b).collect();
    loop {
        if x.iter().any(|&v| v != 0) && keep(&x) {
            let mut f = 0.0;
            for i in 0..n {
                let xi = x[i] as f64;
                for j in 0..n {
                    f += gf[i * n + j] * xi * x[j] as f64;
                }
            }
            if f <= limit {
                let norm = quad(g, &x);
                if &norm <= r2 {
                    out.push((x.clone(), norm));
                }
            }
        }
        let mut i = 0;
        loop {
            if i == n {
                return out;
            }
            if x[i] < bounds[i] {
                x[i] += 1;
                break;
            }
            x[i] = -bounds[i];
            i += 1;
        }
    }
}

pub fn quad(g: &RationalMatrix, x: &[i64]) -> Rational {
    let n = x.len();
    let mut s = Rational::zero();
    for i in 0..n {
        for j in 0..n {
            s += &g[(i, j)] * Rational::from_integer(BigInt::from(x[i] * x[j]));
        }
    }
    s
}

pub fn rank_i64(rows: &[Vec<i64>]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let m: Vec<Vec<BigInt>> = rows.iter().map(|r| ints(r)).collect();
    IntegerMatrix::from_rows(&m).unwrap().rank()
}

/// Successive minima squared by greedy selection over a box scan.
pub fn brute_minima(l: &Lattice) -> Vec<Rational> {
    let g = l.gram();
    let n = g.rows();
    let radius = (0..n).map(|i| g[(i, i)].clone()).max().unwrap();
    let mut pts = box_points(l, &radius);
    pts.sort_by(|a, b| a.1.cmp(&b.1));
    let mut chosen: Vec<Vec<i64>> = Vec::new();
    let mut out = Vec::new();
    for (x, norm) in pts {
        let mut trial = chosen.clone();
        trial.push(x);
        if rank_i64(&trial) > chosen.len() {
            chosen = trial;
            out.push(norm);
            if out.len() == n {
                break;
            }
        }
    }
    out
}

/// Second compound of `g`: the Gram matrix of the Plücker embedding.
pub fn compound2(g: &RationalMatrix) -> (RationalMatrix, Vec<(usize, usize)>) {
    let n = g.rows();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let rows: Vec<Vec<Rational>> = pairs
        .iter()
        .map(|&(i, j)| {
            pairs
                .iter()
                .map(|&(k, l)| &g[(i, k)] * &g[(j, l)] - &g[(i, l)] * &g[(j, k)])
                .collect()
        })
        .collect();
    (RationalMatrix::from_rows(&rows).unwrap(), pairs)
}

pub fn gcd_i64(v: &[i64]) -> i64 {
    v.iter().fold(0i64, |g, &x| num_integer::gcd(g, x))
}

/// Primitive rank-2 sublattices with `det^2 <= h2`, counted as primitive
/// Plücker vectors up to sign that satisfy the Plücker relation (n <= 4).
pub fn plucker_count(l: &Lattice, h2: &Rational) -> u64 {
    let n = l.rank();
    assert!((2..=4).contains(&n));
    let (g2, _) = compound2(l.lll_reduce().gram());
    let decomposable = |p: &[i64]| n < 4 || p[0] * p[5] - p[1] * p[4] + p[2] * p[3] == 0;
    box_points_filtered(&g2, h2, decomposable).iter().filter(|(p, _)| gcd_i64(p) == 1).count() as u64 / 2
}

/// Primitive vectors with `|v|^2 <= h2`, up to sign.
pub fn primitive_vector_count(l: &Lattice, h2: &Rational) -> u64 {
    box_points(&l.lll_reduce(), h2).iter().filter(|(x, _)| gcd_i64(x) == 1).count() as u64 / 2
}
