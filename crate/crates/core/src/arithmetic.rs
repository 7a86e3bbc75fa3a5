//! Arithmetic functions and Hecke coset representatives.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{echelon_with_transform, snf, IntegerMatrix};

/// Prime factorization by trial division, primes ascending.
pub fn factorize(mut m: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p.saturating_mul(p) <= m {
        if m.is_multiple_of(p) {
            let mut a = 0;
            while m.is_multiple_of(p) {
                m /= p;
                a += 1;
            }
            out.push((p, a));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if m > 1 {
        out.push((m, 1));
    }
    out
}

pub fn divisors(m: u64) -> Vec<u64> {
    let mut divs = vec![1u64];
    for (p, a) in factorize(m) {
        let mut next = Vec::with_capacity(divs.len() * (a as usize + 1));
        for &d in &divs {
            let mut q = d;
            for _ in 0..=a {
                next.push(q);
                q *= p;
            }
        }
        divs = next;
    }
    divs.sort_unstable();
    divs
}

/// Number of index-`m` sublattices of a rank-`d` lattice, by
/// `σ_1 = 1`, `σ_d(m) = Σ_{r | m} r^{d-1} σ_{d-1}(m / r)`.
pub fn sigma_d(d: u32, m: u64) -> BigUint {
    assert!(d >= 1 && m >= 1, "sigma_d needs d >= 1 and m >= 1");
    if d == 1 {
        return BigUint::one();
    }
    divisors(m)
        .into_iter()
        .map(|r| BigUint::from(r).pow(d - 1) * sigma_d(d - 1, m / r))
        .sum()
}

pub fn moebius(m: u64) -> i8 {
    assert!(m >= 1, "moebius needs m >= 1");
    let f = factorize(m);
    if f.iter().any(|&(_, a)| a > 1) {
        0
    } else if f.len().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

pub fn euler_phi(k: u64) -> u64 {
    assert!(k >= 1, "euler_phi needs k >= 1");
    factorize(k)
        .into_iter()
        .fold(k, |acc, (p, _)| acc / p * (p - 1))
}

/// Number of `d x d` row-style HNFs with determinant `m`: sum over ordered
/// factorizations `m = h_1 ... h_d` of `Π h_j^{j-1}`.
pub fn hnf_count(d: u32, m: u64) -> BigUint {
    assert!(d >= 1 && m >= 1, "hnf_count needs d >= 1 and m >= 1");
    fn go(j: u32, d: u32, rest: u64) -> BigUint {
        if j == d {
            return if rest == 1 { BigUint::one() } else { BigUint::zero() };
        }
        if j == d - 1 {
            return BigUint::from(rest).pow(j);
        }
        divisors(rest)
            .into_iter()
            .map(|h| BigUint::from(h).pow(j) * go(j + 1, d, rest / h))
            .sum()
    }
    go(0, d, m)
}

/// All `d x d` row-style HNFs with determinant `m`, sorted.
pub fn hnf_matrices(d: usize, m: u64) -> Vec<IntegerMatrix> {
    let mut out = Vec::new();
    let mut diag = vec![0u64; d];
    fn diagonals(j: usize, rest: u64, diag: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if j + 1 == diag.len() {
            diag[j] = rest;
            out.push(diag.clone());
            return;
        }
        for h in divisors(rest) {
            diag[j] = h;
            diagonals(j + 1, rest / h, diag, out);
        }
    }
    let mut diags = Vec::new();
    if d > 0 {
        diagonals(0, m, &mut diag, &mut diags);
    }
    for dg in diags {
        // Free entries: (i, j) with i < j, each in [0, dg[j]).
        let slots: Vec<(usize, usize)> = (0..d).flat_map(|j| (0..j).map(move |i| (i, j))).collect();
        let mut vals = vec![0u64; slots.len()];
        loop {
            let mut mat = IntegerMatrix::zeros(d, d);
            for (j, &h) in dg.iter().enumerate() {
                mat[(j, j)] = BigInt::from(h);
            }
            for (s, &(i, j)) in slots.iter().enumerate() {
                mat[(i, j)] = BigInt::from(vals[s]);
            }
            out.push(mat);
            let mut s = 0;
            loop {
                if s == slots.len() {
                    break;
                }
                vals[s] += 1;
                if vals[s] < dg[slots[s].1] {
                    break;
                }
                vals[s] = 0;
                s += 1;
            }
            if s == slots.len() {
                break;
            }
        }
    }
    out.sort_by(|a, b| a.entries().cmp(b.entries()));
    out
}

/// A right coset representative of `Γ` in `Γ diag(1, ..., 1, k) Γ`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HeckeRep {
    #[serde(serialize_with = "crate::json::serialize_integer_matrix")]
    pub matrix: IntegerMatrix,
    pub k: u64,
}

/// `Π_{p^α || k} p^{(α-1)(d-1)} (1 + p + ... + p^{d-1})`.
pub fn hecke_count(d: u32, k: u64) -> BigUint {
    assert!(d >= 1 && k >= 1, "hecke_count needs d >= 1 and k >= 1");
    factorize(k)
        .into_iter()
        .map(|(p, a)| {
            let p = BigUint::from(p);
            let geometric: BigUint = (0..d).map(|i| p.pow(i)).sum();
            p.pow((a - 1) * (d - 1)) * geometric
        })
        .product()
}

/// Largest list `hecke_reps` will materialize.
pub const MAX_HECKE_REPS: u64 = 2_000_000;

// Representatives for a prime power, by the lower-triangular
// characterization: diagonal p^{a_i} with Σ a_i = α, entries h_ji (j > i)
// reduced into [0, h_ii), and h_ji prime to p whenever a_i, a_j >= 1 with
// only trivial diagonal entries strictly between them.
fn prime_power_reps(d: usize, p: u64, alpha: u32) -> Vec<Vec<Vec<u64>>> {
    let mut exps = Vec::new();
    fn compositions(j: usize, rest: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if j + 1 == cur.len() {
            cur[j] = rest;
            out.push(cur.clone());
            return;
        }
        for a in 0..=rest {
            cur[j] = a;
            compositions(j + 1, rest - a, cur, out);
        }
    }
    compositions(0, alpha, &mut vec![0; d], &mut exps);

    let mut out = Vec::new();
    for a in exps {
        let diag: Vec<u64> = a.iter().map(|&e| p.pow(e)).collect();
        // Pairs (i, j), i < j, both nontrivial with trivial entries between.
        let nontrivial: Vec<usize> = (0..d).filter(|&i| a[i] >= 1).collect();
        let coprime: Vec<(usize, usize)> = nontrivial.windows(2).map(|w| (w[0], w[1])).collect();
        let slots: Vec<(usize, usize)> = (0..d).flat_map(|j| (0..j).map(move |i| (j, i))).collect();
        let choices: Vec<Vec<u64>> = slots
            .iter()
            .map(|&(j, i)| {
                (0..diag[i])
                    .filter(|&v| !coprime.contains(&(i, j)) || v % p != 0)
                    .collect()
            })
            .collect();
        if choices.iter().any(Vec::is_empty) {
            continue;
        }
        let mut idx = vec![0usize; slots.len()];
        loop {
            let mut h = vec![vec![0u64; d]; d];
            for i in 0..d {
                h[i][i] = diag[i];
            }
            for (s, &(j, i)) in slots.iter().enumerate() {
                h[j][i] = choices[s][idx[s]];
            }
            out.push(h);
            let mut s = 0;
            while s < slots.len() {
                idx[s] += 1;
                if idx[s] < choices[s].len() {
                    break;
                }
                idx[s] = 0;
                s += 1;
            }
            if s == slots.len() {
                break;
            }
        }
    }
    out
}

/// Canonical lower-triangular basis of the row lattice of `m`: diagonal
/// positive, entries below each diagonal entry reduced into `[0, h_ii)`.
pub fn lower_canonical(m: &IntegerMatrix) -> Result<IntegerMatrix> {
    let d = m.cols();
    let rev = |x: &IntegerMatrix| {
        let mut out = x.clone();
        for i in 0..x.rows() {
            for j in 0..d {
                out[(i, j)] = x[(i, d - 1 - j)].clone();
            }
        }
        out
    };
    let e = echelon_with_transform(&rev(m));
    if e.rank < d {
        return Err(Error::RankDeficient { rank: e.rank, rows: d });
    }
    let h = rev(&e.h.select_rows(0..d));
    Ok(h.select_rows((0..d).rev()))
}

// The row lattice of a rep is a sublattice of Z^d with cyclic quotient of
// order k. For coprime indices k1, k2 the intersection of two such lattices
// is k2*M1 + k1*M2, which has cyclic quotient of order k1*k2.
fn glue(a: &IntegerMatrix, ka: u64, b: &IntegerMatrix, kb: u64) -> IntegerMatrix {
    let sa = a.map(|x| x * kb);
    let sb = b.map(|x| x * ka);
    lower_canonical(&sa.stack(&sb).expect("same width")).expect("full rank")
}

/// Coset representatives of `Γ diag(1, ..., 1, k) Γ`, sorted
/// lexicographically by row-major entries.
pub fn hecke_reps(d: usize, k: u64) -> Result<Vec<HeckeRep>> {
    if d == 0 || k == 0 {
        return Err(Error::argument("hecke_reps needs d >= 1 and k >= 1"));
    }
    let total = hecke_count(d as u32, k);
    if total > BigUint::from(MAX_HECKE_REPS) {
        return Err(Error::capacity(format!(
            "{total} representatives exceed the list limit of {MAX_HECKE_REPS}"
        )));
    }
    let to_matrix = |g: &Vec<Vec<u64>>| {
        let rows: Vec<Vec<BigInt>> = g.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
        IntegerMatrix::from_rows(&rows).expect("square")
    };
    let mut combined = vec![IntegerMatrix::identity(d)];
    let mut done = 1u64;
    for (p, a) in factorize(k) {
        let q = p.pow(a);
        let reps: Vec<IntegerMatrix> = prime_power_reps(d, p, a).iter().map(to_matrix).collect();
        let mut next = Vec::with_capacity(combined.len() * reps.len());
        for acc in &combined {
            for h in &reps {
                next.push(if done == 1 { h.clone() } else { glue(acc, done, h, q) });
            }
        }
        combined = next;
        done *= q;
    }

    let mut out: Vec<HeckeRep> = combined.into_iter().map(|matrix| HeckeRep { matrix, k }).collect();
    out.sort_by(|a, b| a.matrix.entries().cmp(b.matrix.entries()));
    Ok(out)
}

pub fn smith_invariants_of_rep(h: &HeckeRep) -> Vec<BigInt> {
    snf(&h.matrix)
}

/// Partial Dirichlet sum with an explicit bound on the omitted tail.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DirichletSum {
    pub value: f64,
    pub tail_bound: f64,
    pub terms: u64,
}

/// `Σ_{k <= K} hecke_count(d, k) φ(k) k^{-m}`.
///
/// Since `hecke_count(d, k) φ(k) = Π p^{(α-1)d}(p^d - 1) < k^d`, the tail
/// is at most `Σ_{k > K} k^{d-m} <= K^{d-m+1} / (m-d-1)`.
pub fn hecke_dirichlet(d: u32, m: u32, terms: u64) -> Result<DirichletSum> {
    if d == 0 || terms == 0 {
        return Err(Error::argument("hecke_dirichlet needs d >= 1 and at least one term"));
    }
    if m <= d + 1 {
        return Err(Error::Domain(format!("series diverges for m = {m} <= d + 1 = {}", d + 1)));
    }
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for k in 1..=terms {
        let mut term = 1.0f64;
        for (p, a) in factorize(k) {
            let pf = p as f64;
            // p^{(a-1)d} (p^d - 1) / p^{a m}
            term *= (pf.powi(d as i32) - 1.0) * pf.powi((a as i32 - 1) * d as i32) / pf.powi((a * m) as i32);
        }
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    let kf = terms as f64;
    let exponent = d as f64 - m as f64 + 1.0;
    let tail_bound = kf.powf(exponent) / (m as f64 - d as f64 - 1.0);
    Ok(DirichletSum { value: sum, tail_bound, terms })
}

/// `n` as `u64`, for counts known to be small.
pub(crate) fn to_u64(n: &BigUint) -> Result<u64> {
    n.to_u64().ok_or_else(|| Error::capacity(format!("{n} does not fit in 64 bits")))
}
