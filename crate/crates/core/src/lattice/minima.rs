use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::enumerate::Enumerator;
use crate::error::{Error, Result};
use crate::exact::{integer_kernel, IntegerMatrix, Rational, SquaredMagnitude};
use crate::lattice::Lattice;
use crate::limits::Limits;

/// Successive minima with one witness per minimum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinimaProfile {
    pub lambda_squared: Vec<SquaredMagnitude>,
    /// Witness coordinates (rows) with respect to the lattice basis.
    pub witnesses: IntegerMatrix,
}

impl MinimaProfile {
    pub fn rank(&self) -> usize {
        self.lambda_squared.len()
    }

    pub fn witness(&self, i: usize) -> &[BigInt] {
        self.witnesses.row(i)
    }
}

struct Candidate {
    coords: Vec<i64>,
    ambient: Vec<Rational>,
    norm: Rational,
}

// Smaller norm wins; among equal norms, the lexicographically greatest
// sign-normalized ambient vector.
fn better(a: &Candidate, b: &Candidate) -> bool {
    match a.norm.cmp(&b.norm) {
        Ordering::Less => true,
        Ordering::Greater => false,
        Ordering::Equal => a.ambient > b.ambient,
    }
}

pub(crate) fn compute(lattice: &Lattice, limits: &Limits) -> Result<MinimaProfile> {
    let r = lattice.rank();
    if r > limits.max_rank {
        return Err(Error::capacity(format!(
            "successive minima need rank {r} but the cap is {}",
            limits.max_rank
        )));
    }
    let (reduced, u) = lattice.lll_pair();
    let gram = reduced.gram();
    let mut witnesses: Vec<Vec<BigInt>> = Vec::with_capacity(r);
    let mut lambda = Vec::with_capacity(r);

    for _ in 0..r {
        // Rows spanning the orthogonal complement (in coordinates) of the
        // witnesses chosen so far, expressed in reduced-basis coordinates.
        let outside: Option<IntegerMatrix> = if witnesses.is_empty() {
            None
        } else {
            let w = IntegerMatrix::from_rows(&witnesses)?;
            // x_reduced * u = x_original, so test (x_reduced * u) against
            // the kernel of the witnesses.
            let k = integer_kernel(&w);
            Some(u.mul(&k.transpose())?)
        };
        let is_outside = |x: &[i64]| match &outside {
            None => x.iter().any(|&v| v != 0),
            Some(t) => (0..t.cols()).any(|j| {
                let mut s = BigInt::zero();
                for (i, &xi) in x.iter().enumerate() {
                    if xi != 0 {
                        s += &t[(i, j)] * xi;
                    }
                }
                !s.is_zero()
            }),
        };

        let mut radius: Option<Rational> = None;
        for i in 0..r {
            let mut e = vec![0i64; r];
            e[i] = 1;
            if is_outside(&e) && radius.as_ref().is_none_or(|q| gram[(i, i)] < *q) {
                radius = Some(gram[(i, i)].clone());
            }
        }
        let radius = radius.expect("reduced basis spans the lattice");

        let mut best: Option<Candidate> = None;
        Enumerator::new(&gram, radius)
            .excluding_below(0)
            .with_budget(limits.max_vectors)
            .visit(&mut |x, q| {
                if !is_outside(x) {
                    return Ok(());
                }
                if let Some(b) = &best {
                    if q > &b.norm {
                        return Ok(());
                    }
                }
                let mut coords = vec![BigInt::zero(); r];
                for (i, &xi) in x.iter().enumerate() {
                    if xi == 0 {
                        continue;
                    }
                    for j in 0..r {
                        coords[j] += &u[(i, j)] * xi;
                    }
                }
                let mut coords: Vec<i64> = coords
                    .iter()
                    .map(|c| i64::try_from(c).map_err(|_| Error::capacity("witness coordinate overflow")))
                    .collect::<Result<_>>()?;
                let mut ambient = lattice.vector_i64(&coords);
                if ambient.iter().find(|a| !a.is_zero()).is_some_and(|a| a.is_negative()) {
                    coords.iter_mut().for_each(|c| *c = -*c);
                    ambient.iter_mut().for_each(|a| *a = -a.clone());
                }
                let cand = Candidate { coords, ambient, norm: q.clone() };
                if best.as_ref().is_none_or(|b| better(&cand, b)) {
                    best = Some(cand);
                }
                Ok(())
            })?;
        let best = best.expect("radius admits at least one outside vector");
        lambda.push(SquaredMagnitude::new(best.norm)?);
        witnesses.push(best.coords.into_iter().map(BigInt::from).collect());
    }

    Ok(MinimaProfile {
        lambda_squared: lambda,
        witnesses: IntegerMatrix::from_rows(&witnesses)?,
    })
}
