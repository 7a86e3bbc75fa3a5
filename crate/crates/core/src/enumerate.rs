//! Exact Fincke–Pohst enumeration of lattice points in a ball.

use std::sync::atomic::{AtomicU64, Ordering};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exact::{rational_to_f64, Rational, RationalMatrix};

/// Gram–Schmidt data derived from a Gram matrix.
#[derive(Clone, Debug)]
pub(crate) struct GramSchmidt {
    /// Squared lengths of the orthogonalized vectors.
    pub bstar: Vec<Rational>,
    /// `mu[i][j]` for `j < i`.
    pub mu: Vec<Vec<Rational>>,
}

impl GramSchmidt {
    pub fn from_gram(g: &RationalMatrix) -> Self {
        let r = g.rows();
        let mut bstar: Vec<Rational> = Vec::with_capacity(r);
        let mut mu = vec![vec![Rational::zero(); r]; r];
        for i in 0..r {
            for j in 0..i {
                let mut s = g[(i, j)].clone();
                for k in 0..j {
                    s -= &mu[j][k] * &mu[i][k] * &bstar[k];
                }
                mu[i][j] = s / &bstar[j];
            }
            let mut b = g[(i, i)].clone();
            for k in 0..i {
                b -= &mu[i][k] * &mu[i][k] * &bstar[k];
            }
            bstar.push(b);
        }
        GramSchmidt { bstar, mu }
    }
}

/// Points `x` (integer coordinates) with `|(x + shift) B|^2 <= radius`.
pub(crate) struct Enumerator {
    gs: GramSchmidt,
    radius: Rational,
    shift: Option<Vec<Rational>>,
    exclude_below: Option<usize>,
    budget: u64,
    visited: AtomicU64,
}

pub(crate) type Visitor<'a> = dyn FnMut(&[i64], &Rational) -> Result<()> + 'a;

impl Enumerator {
    pub fn new(gram: &RationalMatrix, radius: Rational) -> Self {
        Enumerator {
            gs: GramSchmidt::from_gram(gram),
            radius,
            shift: None,
            exclude_below: None,
            budget: u64::MAX,
            visited: AtomicU64::new(0),
        }
    }

    /// Enumerate `x + shift` instead of `x`.
    pub fn with_shift(mut self, shift: Vec<Rational>) -> Self {
        if shift.iter().any(|s| !s.is_zero()) {
            self.shift = Some(shift);
        }
        self
    }

    /// Skip points whose coordinates at indices `>= k` are all zero.
    /// With `k = 0` this drops only the origin.
    pub fn excluding_below(mut self, k: usize) -> Self {
        self.exclude_below = Some(k);
        self
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    pub fn dim(&self) -> usize {
        self.gs.bstar.len()
    }

    fn shift_at(&self, i: usize) -> Rational {
        self.shift.as_ref().map_or_else(Rational::zero, |s| s[i].clone())
    }

    // Center of coordinate i given coordinates above it.
    fn center(&self, i: usize, x: &[i64]) -> Rational {
        let mut c = -self.shift_at(i);
        for j in i + 1..self.dim() {
            let y = Rational::from_integer(BigInt::from(x[j])) + self.shift_at(j);
            c -= &self.gs.mu[j][i] * y;
        }
        c
    }

    // Integers t with bstar_i * (t - c)^2 <= rem.
    fn range(&self, i: usize, c: &Rational, rem: &Rational) -> Result<Option<(i64, i64)>> {
        if rem.is_negative() {
            return Ok(None);
        }
        let q = rem / &self.gs.bstar[i];
        let fits = |t: &BigInt| {
            let d = Rational::from_integer(t.clone()) - c;
            &d * &d <= q
        };
        let cf = rational_to_f64(c);
        let sf = rational_to_f64(&q).sqrt();
        if !cf.is_finite() || !sf.is_finite() || (cf.abs() + sf) > 9.0e15 {
            return Err(Error::capacity("enumeration coordinates exceed 64-bit range"));
        }
        // Nearest integer to the center; if even that fails the interval is empty.
        let near = c.round().to_integer();
        if !fits(&near) {
            return Ok(None);
        }
        let mut lo = BigInt::from((cf - sf).floor() as i64);
        if lo > near {
            lo = near.clone();
        }
        while !fits(&lo) {
            lo += 1;
        }
        while fits(&(&lo - 1)) {
            lo -= 1;
        }
        let mut hi = BigInt::from((cf + sf).ceil() as i64);
        if hi < near {
            hi = near.clone();
        }
        while !fits(&hi) {
            hi -= 1;
        }
        while fits(&(&hi + 1)) {
            hi += 1;
        }
        match (lo.to_i64(), hi.to_i64()) {
            (Some(lo), Some(hi)) => Ok(Some((lo, hi))),
            _ => Err(Error::capacity("enumeration coordinates exceed 64-bit range")),
        }
    }

    /// Admissible values of the last coordinate.
    pub fn top_values(&self) -> Result<Vec<i64>> {
        let r = self.dim();
        if r == 0 {
            return Ok(Vec::new());
        }
        let x = vec![0i64; r];
        let c = self.center(r - 1, &x);
        Ok(match self.range(r - 1, &c, &self.radius)? {
            Some((lo, hi)) => (lo..=hi).collect(),
            None => Vec::new(),
        })
    }

    pub fn visit(&self, f: &mut Visitor<'_>) -> Result<()> {
        for t in self.top_values()? {
            self.visit_top(t, f)?;
        }
        Ok(())
    }

    /// Visit the subtree whose last coordinate equals `top`.
    pub fn visit_top(&self, top: i64, f: &mut Visitor<'_>) -> Result<()> {
        let r = self.dim();
        if r == 0 {
            return Ok(());
        }
        let mut x = vec![0i64; r];
        x[r - 1] = top;
        let c = self.center(r - 1, &x);
        let d = Rational::from_integer(BigInt::from(top)) - &c;
        let used = &self.gs.bstar[r - 1] * &d * &d;
        if used > self.radius {
            return Ok(());
        }
        if self.skip_after(r - 1, &x) {
            return Ok(());
        }
        self.descend(r - 1, &mut x, used, f)
    }

    // True if fixing coordinate `level` has made the excluded region certain.
    fn skip_after(&self, level: usize, x: &[i64]) -> bool {
        match self.exclude_below {
            Some(k) if level == k && k > 0 => x[k..].iter().all(|&v| v == 0),
            _ => false,
        }
    }

    fn descend(&self, level: usize, x: &mut Vec<i64>, used: Rational, f: &mut Visitor<'_>) -> Result<()> {
        if level == 0 {
            if self.exclude_below == Some(0) && x.iter().all(|&v| v == 0) {
                return Ok(());
            }
            let n = self.visited.fetch_add(1, Ordering::Relaxed) + 1;
            if n > self.budget {
                return Err(Error::capacity(format!(
                    "enumeration exceeded {} lattice points",
                    self.budget
                )));
            }
            return f(x, &used);
        }
        let i = level - 1;
        let c = self.center(i, x);
        let rem = &self.radius - &used;
        let Some((lo, hi)) = self.range(i, &c, &rem)? else {
            return Ok(());
        };
        for t in lo..=hi {
            x[i] = t;
            if self.skip_after(i, x) {
                continue;
            }
            let d = Rational::from_integer(BigInt::from(t)) - &c;
            let next = &used + &self.gs.bstar[i] * &d * &d;
            self.descend(i, x, next, f)?;
        }
        x[i] = 0;
        Ok(())
    }

    /// Folds each top-coordinate subtree into its own accumulator, in
    /// parallel when asked. Accumulators come back in top-value order.
    pub fn fold_subtrees<T, I, F>(&self, parallel: bool, init: I, visit: F) -> Result<Vec<T>>
    where
        T: Send,
        I: Fn() -> T + Sync,
        F: Fn(&mut T, &[i64], &Rational) -> Result<()> + Sync,
    {
        let run = |top: i64| -> Result<T> {
            let mut acc = init();
            self.visit_top(top, &mut |x, q| visit(&mut acc, x, q))?;
            Ok(acc)
        };
        let tops = self.top_values()?;
        if parallel {
            use rayon::prelude::*;
            tops.into_par_iter().map(run).collect()
        } else {
            tops.into_iter().map(run).collect()
        }
    }

    /// All points, as `(coords, norm^2)`.
    #[cfg(test)]
    pub fn collect(&self) -> Result<Vec<(Vec<i64>, Rational)>> {
        let mut out = Vec::new();
        self.visit(&mut |x, q| {
            out.push((x.to_vec(), q.clone()));
            Ok(())
        })?;
        Ok(out)
    }
}

/// True if the first nonzero entry is positive.
pub(crate) fn is_sign_normalized(x: &[i64]) -> bool {
    x.iter().find(|&&v| v != 0).is_some_and(|&v| v > 0)
}

pub(crate) fn content(x: &[i64]) -> u64 {
    x.iter().fold(0u64, |g, &v| g.gcd(&v.unsigned_abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::parse_rational;

    fn brute(gram: &RationalMatrix, radius: &Rational, bound: i64) -> Vec<Vec<i64>> {
        let r = gram.rows();
        let mut out = Vec::new();
        let mut x = vec![-bound; r];
        loop {
            let mut q = Rational::zero();
            for i in 0..r {
                for j in 0..r {
                    q += &gram[(i, j)] * Rational::from_integer((x[i] * x[j]).into());
                }
            }
            if &q <= radius {
                out.push(x.clone());
            }
            let mut k = 0;
            loop {
                if k == r {
                    out.sort();
                    return out;
                }
                x[k] += 1;
                if x[k] <= bound {
                    break;
                }
                x[k] = -bound;
                k += 1;
            }
        }
    }

    #[test]
    fn matches_brute_force_on_skewed_gram() {
        let basis = RationalMatrix::from_i64_rows(&[&[3, 1, 0], &[1, 4, 1], &[0, 2, 5]]).unwrap();
        let g = basis.gram();
        let radius = parse_rational("40").unwrap();
        let mut got: Vec<Vec<i64>> = Enumerator::new(&g, radius.clone())
            .collect()
            .unwrap()
            .into_iter()
            .map(|(x, _)| x)
            .collect();
        got.sort();
        assert_eq!(got, brute(&g, &radius, 8));
    }

    #[test]
    fn reports_exact_norms_and_excludes_origin() {
        let g = RationalMatrix::from_i64_rows(&[&[2, 1], &[1, 2]]).unwrap();
        let pts = Enumerator::new(&g, Rational::from_integer(2.into()))
            .excluding_below(0)
            .collect()
            .unwrap();
        assert_eq!(pts.len(), 6);
        assert!(pts.iter().all(|(_, q)| q == &Rational::from_integer(2.into())));
    }

    #[test]
    fn exclusion_above_index() {
        let g = RationalMatrix::identity(3);
        let pts = Enumerator::new(&g, Rational::from_integer(1.into()))
            .excluding_below(2)
            .collect()
            .unwrap();
        let mut xs: Vec<_> = pts.into_iter().map(|(x, _)| x).collect();
        xs.sort();
        assert_eq!(xs, vec![vec![0, 0, -1], vec![0, 0, 1]]);
    }

    #[test]
    fn shifted_ball() {
        // Points of Z + 1/2 within distance 1 of the origin: -1/2, 1/2.
        let g = RationalMatrix::identity(1);
        let pts = Enumerator::new(&g, Rational::from_integer(1.into()))
            .with_shift(vec![parse_rational("1/2").unwrap()])
            .collect()
            .unwrap();
        assert_eq!(pts.len(), 2);
    }

    #[test]
    fn budget_is_enforced() {
        let g = RationalMatrix::identity(3);
        let err = Enumerator::new(&g, Rational::from_integer(100.into()))
            .with_budget(10)
            .collect()
            .unwrap_err();
        assert!(matches!(err, Error::Capacity(_)));
    }
}
