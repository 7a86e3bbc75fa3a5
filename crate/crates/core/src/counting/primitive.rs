//! Complete enumeration of primitive rank-`d` sublattices under a height
//! budget.
//!
//! If `B` is primitive of rank `d` with `det^2 B <= H^2`, its minima
//! witnesses `w_1, ..., w_d` are primitive vectors of `L` with
//! `Π |w_i|^2 <= γ_d^d H^2 <= (4/3)^{d(d-1)/2} H^2` and `|w_i| >= λ_i(L)`,
//! so `|w_d|^2 <= (4/3)^{d(d-1)/2} H^2 / Π_{i<d} λ_i(L)^2`.
//! Enumerating all primitive vectors up to that radius, taking
//! independent `d`-subsets under the same product bound and saturating them
//! therefore reaches every such `B`.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Pow, ToPrimitive, Zero};

use crate::enumerate::{content, is_sign_normalized, Enumerator};
use crate::error::{Error, Result};
use crate::exact::{hnf, saturate_unchecked, IntegerMatrix, Rational, RationalMatrix};
use crate::lattice::Lattice;
use crate::limits::Limits;

/// A primitive sublattice found by the search: HNF coordinates in the
/// lattice's own basis and its squared determinant.
#[derive(Clone, Debug)]
pub(crate) struct Found {
    pub coords: IntegerMatrix,
    pub det_squared: Rational,
}

/// `(4/3)^{d(d-1)/2}`, an upper bound for `γ_d^d`.
pub(crate) fn hermite_power(d: usize) -> Rational {
    let e = (d * d.saturating_sub(1) / 2) as u32;
    Rational::new(BigInt::from(4u32).pow(e), BigInt::from(3u32).pow(e))
}

fn rational_pow(x: &Rational, e: usize) -> Rational {
    Pow::pow(x, e as i32)
}

/// `Π_{i<=k} λ_i(L)^2`.
pub(crate) fn minima_product(lattice: &Lattice, k: usize, limits: &Limits) -> Result<Rational> {
    let profile = lattice.successive_minima_with(limits)?;
    Ok(profile.lambda_squared[..k].iter().fold(Rational::one(), |acc, l| acc * l.value()))
}

pub(crate) fn search(
    lattice: &Lattice,
    d: usize,
    h2: &Rational,
    limits: &Limits,
    materialize: bool,
) -> Result<(u64, Vec<Found>)> {
    let n = lattice.rank();
    if d == 0 || d > n {
        return Err(Error::argument(format!("rank d = {d} must lie in 1..={n}")));
    }
    if n > limits.max_rank {
        return Err(Error::capacity(format!(
            "lattice rank {n} exceeds the enumeration cap {}",
            limits.max_rank
        )));
    }
    if d == n {
        let det = lattice.det_squared().value().clone();
        if &det > h2 {
            return Ok((0, Vec::new()));
        }
        let found = Found { coords: IntegerMatrix::identity(n), det_squared: det };
        return Ok((1, if materialize { vec![found] } else { Vec::new() }));
    }
    let (_, u) = lattice.lll_pair();
    let u = u.clone();
    let gram = lattice.lll_pair().0.gram();

    let to_original = |key: &[i64], rows: usize| -> Result<IntegerMatrix> {
        let k = IntegerMatrix::from_vec(rows, n, key.iter().map(|&x| BigInt::from(x)).collect())?;
        Ok(hnf(&k.mul(&u)?)?.0)
    };

    if d == 1 {
        let enumerator = Enumerator::new(&gram, h2.clone())
            .excluding_below(0)
            .with_budget(limits.max_vectors);
        let parts = enumerator.fold_subtrees(
            limits.parallel,
            || (0u64, Vec::new()),
            |acc, x, q| {
                if is_sign_normalized(x) && content(x) == 1 {
                    acc.0 += 1;
                    if materialize {
                        acc.1.push((x.to_vec(), q.clone()));
                    }
                }
                Ok(())
            },
        )?;
        let count = parts.iter().map(|p| p.0).sum();
        let mut found = Vec::new();
        if materialize {
            for (x, q) in parts.into_iter().flat_map(|p| p.1) {
                found.push(Found { coords: to_original(&x, 1)?, det_squared: q });
            }
        }
        return Ok((count, found));
    }

    let bound = hermite_power(d) * h2;
    let radius = &bound / minima_product(lattice, d - 1, limits)?;
    let lambda_d = lattice.successive_minima_with(limits)?.lambda_squared[d - 1].value();
    if &radius < lambda_d {
        return Ok((0, Vec::new()));
    }

    let enumerator = Enumerator::new(&gram, radius)
        .excluding_below(0)
        .with_budget(limits.max_vectors);
    let parts = enumerator.fold_subtrees(limits.parallel, Vec::new, |acc, x, q| {
        if is_sign_normalized(x) && content(x) == 1 {
            acc.push((x.to_vec(), q.clone()));
        }
        Ok(())
    })?;
    let mut vectors: Vec<(Vec<i64>, Rational)> = parts.into_iter().flatten().collect();
    vectors.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));

    let search = SubsetSearch {
        d,
        n,
        gram: &gram,
        h2,
        bound: &bound,
        vectors: &vectors,
        budget: limits.max_vectors,
        visited: AtomicU64::new(0),
    };
    let table = search.run(limits.parallel)?;

    let count = table.values().filter(|v| v.is_some()).count() as u64;
    let mut found = Vec::new();
    if materialize {
        for (key, det) in table {
            if let Some(det) = det {
                found.push(Found { coords: to_original(&key, d)?, det_squared: det });
            }
        }
    }
    Ok((count, found))
}

type Table = HashMap<Vec<i64>, Option<Rational>>;

fn merge(mut a: Table, mut b: Table) -> Table {
    if a.len() < b.len() {
        std::mem::swap(&mut a, &mut b);
    }
    a.extend(b);
    a
}

struct SubsetSearch<'a> {
    d: usize,
    n: usize,
    gram: &'a RationalMatrix,
    h2: &'a Rational,
    bound: &'a Rational,
    vectors: &'a [(Vec<i64>, Rational)],
    budget: u64,
    visited: AtomicU64,
}

impl SubsetSearch<'_> {
    fn run(&self, parallel: bool) -> Result<Table> {
        let first = |i: usize| -> Result<Table> {
            let mut table = Table::new();
            let (v, q) = &self.vectors[i];
            if &rational_pow(q, self.d) > self.bound {
                return Ok(table);
            }
            let mut chosen = vec![i];
            let mut echelon = vec![v.iter().map(|&x| x as i128).collect::<Vec<_>>()];
            self.extend(&mut chosen, &mut echelon, q.clone(), &mut table)?;
            Ok(table)
        };
        if parallel {
            use rayon::prelude::*;
            (0..self.vectors.len())
                .into_par_iter()
                .map(first)
                .try_reduce(Table::new, |a, b| Ok(merge(a, b)))
        } else {
            let mut table = Table::new();
            for i in 0..self.vectors.len() {
                table = merge(table, first(i)?);
            }
            Ok(table)
        }
    }

    fn extend(&self, chosen: &mut Vec<usize>, echelon: &mut Vec<Vec<i128>>, prod: Rational, table: &mut Table) -> Result<()> {
        let k = chosen.len();
        if k == self.d {
            return self.finish(chosen, table);
        }
        let start = chosen[k - 1] + 1;
        for j in start..self.vectors.len() {
            let (v, q) = &self.vectors[j];
            // Remaining picks are at least as long as this one.
            if &prod * rational_pow(q, self.d - k) > *self.bound {
                break;
            }
            let Some(row) = reduce_against(echelon, v)? else {
                continue;
            };
            chosen.push(j);
            echelon.push(row);
            self.extend(chosen, echelon, &prod * q, table)?;
            echelon.pop();
            chosen.pop();
        }
        Ok(())
    }

    fn finish(&self, chosen: &[usize], table: &mut Table) -> Result<()> {
        let seen = self.visited.fetch_add(1, Ordering::Relaxed) + 1;
        if seen > self.budget {
            return Err(Error::capacity(format!("more than {} candidate subsets", self.budget)));
        }
        let data: Vec<BigInt> = chosen
            .iter()
            .flat_map(|&i| self.vectors[i].0.iter().map(|&x| BigInt::from(x)))
            .collect();
        let m = IntegerMatrix::from_vec(self.d, self.n, data)?;
        let sat = saturate_unchecked(&m);
        let key: Vec<i64> = sat
            .entries()
            .iter()
            .map(|x| x.to_i64().ok_or_else(|| Error::capacity("HNF entry overflow")))
            .collect::<Result<_>>()?;
        if table.contains_key(&key) {
            return Ok(());
        }
        let det = sublattice_det_squared(&sat, self.gram);
        let keep = (&det <= self.h2).then_some(det);
        table.insert(key, keep);
        Ok(())
    }
}

/// `det(C G C^T)` for integer coordinates `C`.
pub(crate) fn sublattice_det_squared(coords: &IntegerMatrix, gram: &RationalMatrix) -> Rational {
    let c = coords.to_rational();
    let g = c.mul(gram).and_then(|cg| cg.mul(&c.transpose())).expect("dimensions agree");
    g.determinant().expect("square")
}

// Fraction-free elimination of `v` against echelon rows (each row zero at
// the pivots of earlier rows). Returns the reduced row, or None if `v` lies
// in their span.
fn reduce_against(rows: &[Vec<i128>], v: &[i64]) -> Result<Option<Vec<i128>>> {
    let overflow = || Error::capacity("independence test overflowed 128-bit arithmetic");
    let mut w: Vec<i128> = v.iter().map(|&x| x as i128).collect();
    for r in rows {
        let p = r.iter().position(|&x| x != 0).expect("echelon rows are nonzero");
        if w[p] == 0 {
            continue;
        }
        let (a, b) = (r[p], w[p]);
        let g = a.gcd(&b);
        let (a, b) = (a / g, b / g);
        for (wi, ri) in w.iter_mut().zip(r) {
            *wi = wi
                .checked_mul(a)
                .and_then(|x| ri.checked_mul(b).and_then(|y| x.checked_sub(y)))
                .ok_or_else(overflow)?;
        }
        let c = w.iter().fold(0i128, |acc, &x| acc.gcd(&x));
        if c > 1 {
            w.iter_mut().for_each(|x| *x /= c);
        }
    }
    Ok(if w.iter().all(|&x| x == 0) { None } else { Some(w) })
}

/// Rational `r >= x^{1/k}`, close to the true root.
pub(crate) fn upper_root(x: &Rational, k: u32) -> Rational {
    if x <= &Rational::zero() {
        return Rational::zero();
    }
    if k == 1 {
        return x.clone();
    }
    let xf = crate::exact::rational_to_f64(x);
    let guess = xf.powf(1.0 / k as f64) * (1.0 + 1e-9);
    let mut r = if guess.is_finite() && guess > 0.0 {
        Rational::from_float(guess).unwrap_or_else(Rational::one)
    } else if x > &Rational::one() {
        x.clone()
    } else {
        Rational::one()
    };
    let step = Rational::new(BigInt::from(1001), BigInt::from(1000));
    while Pow::pow(&r, k as i32) < *x {
        r *= &step;
    }
    r
}
