//! Lattices with rational bases and their sublattices.

mod lll;
mod minima;

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::Zero;
use once_cell::sync::OnceCell;

use crate::error::{Error, Result};
use crate::exact::{
    det_squared, echelon_with_transform, hnf, integer_kernel, is_primitive, saturate, IntegerMatrix, Rational,
    RationalMatrix, SquaredMagnitude,
};
use crate::limits::Limits;

pub use lll::is_lll_reduced;
pub use minima::MinimaProfile;

struct Inner {
    basis: RationalMatrix,
    gram: RationalMatrix,
    det_squared: SquaredMagnitude,
    reduced: OnceCell<(RationalMatrix, IntegerMatrix)>,
    minima: OnceCell<MinimaProfile>,
}

/// A lattice spanned by the rows of a rational basis.
///
/// The basis is `r x m` with `r <= m` and full row rank; `r` is the rank and
/// `m` the ambient dimension. Cheap to clone.
#[derive(Clone)]
pub struct Lattice(Arc<Inner>);

impl Lattice {
    pub fn new(basis: RationalMatrix) -> Result<Self> {
        if basis.rows() == 0 || basis.cols() == 0 {
            return Err(Error::argument("lattice basis must be non-empty"));
        }
        if basis.rows() > basis.cols() {
            return Err(Error::argument(format!(
                "{} basis vectors cannot be independent in dimension {}",
                basis.rows(),
                basis.cols()
            )));
        }
        let gram = basis.gram();
        let det = det_squared(&basis);
        if det.is_zero() {
            return Err(Error::RankDeficient { rank: basis.rank(), rows: basis.rows() });
        }
        Ok(Lattice(Arc::new(Inner {
            basis,
            gram,
            det_squared: det,
            reduced: OnceCell::new(),
            minima: OnceCell::new(),
        })))
    }

    pub fn from_integer_basis(basis: &IntegerMatrix) -> Result<Self> {
        Lattice::new(basis.to_rational())
    }

    /// The standard lattice `Z^n`.
    pub fn identity(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::argument("dimension must be at least 1"));
        }
        Lattice::new(RationalMatrix::identity(n))
    }

    pub fn diagonal(entries: &[Rational]) -> Result<Self> {
        Lattice::new(RationalMatrix::diagonal(entries))
    }

    /// `c * L`.
    pub fn scaled(&self, c: &Rational) -> Result<Self> {
        Lattice::new(self.basis().scale(c))
    }

    pub fn ambient_dim(&self) -> usize {
        self.0.basis.cols()
    }

    pub fn rank(&self) -> usize {
        self.0.basis.rows()
    }

    pub fn basis(&self) -> &RationalMatrix {
        &self.0.basis
    }

    pub fn gram(&self) -> &RationalMatrix {
        &self.0.gram
    }

    pub fn det_squared(&self) -> &SquaredMagnitude {
        &self.0.det_squared
    }

    /// Ambient vector with the given integer coordinates.
    pub fn vector(&self, coords: &[BigInt]) -> Vec<Rational> {
        let b = self.basis();
        let mut v = vec![Rational::zero(); b.cols()];
        for (i, c) in coords.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let c = Rational::from_integer(c.clone());
            for (j, vj) in v.iter_mut().enumerate() {
                *vj += &c * &b[(i, j)];
            }
        }
        v
    }

    pub(crate) fn vector_i64(&self, coords: &[i64]) -> Vec<Rational> {
        let coords: Vec<BigInt> = coords.iter().map(|&c| BigInt::from(c)).collect();
        self.vector(&coords)
    }

    /// Squared length of the vector with the given coordinates.
    pub fn norm_squared(&self, coords: &[BigInt]) -> SquaredMagnitude {
        let v = self.vector(coords);
        SquaredMagnitude::new(v.iter().map(|x| x * x).sum()).expect("sum of squares")
    }

    /// The polar (dual) lattice, spanned by `G^{-1} B`.
    pub fn polar(&self) -> Lattice {
        let ginv = self.gram().inverse().expect("gram of a basis is invertible");
        let dual = ginv.mul(self.basis()).expect("dimensions agree");
        Lattice::new(dual).expect("dual basis has full rank")
    }

    pub(crate) fn lll_pair(&self) -> &(RationalMatrix, IntegerMatrix) {
        self.0.reduced.get_or_init(|| lll::lll(self.basis()))
    }

    /// The same lattice with an LLL-reduced basis.
    pub fn lll_reduce(&self) -> Lattice {
        self.lll_reduce_with_transform().0
    }

    /// Reduced lattice together with the unimodular `u`, `reduced = u * basis`.
    pub fn lll_reduce_with_transform(&self) -> (Lattice, IntegerMatrix) {
        let (b, u) = self.lll_pair();
        (Lattice::new(b.clone()).expect("reduction preserves rank"), u.clone())
    }

    /// Successive minima, computed once per lattice. Rank is capped by
    /// `GRASSCOUNT_CAP_N`.
    pub fn successive_minima(&self) -> Result<&MinimaProfile> {
        self.successive_minima_with(&Limits::from_env())
    }

    pub fn successive_minima_with(&self, limits: &Limits) -> Result<&MinimaProfile> {
        self.0.minima.get_or_try_init(|| minima::compute(self, limits))
    }

    /// `L ∩ span(v_1, ..., v_{r-i})` for the chosen minima witnesses.
    pub fn minima_filtration(&self, i: usize) -> Result<Sublattice> {
        self.minima_filtration_with(i, &Limits::from_env())
    }

    pub fn minima_filtration_with(&self, i: usize, limits: &Limits) -> Result<Sublattice> {
        let r = self.rank();
        if i == 0 || i >= r {
            return Err(Error::argument(format!("filtration index {i} outside 1..={}", r.saturating_sub(1))));
        }
        let profile = self.successive_minima_with(limits)?;
        let w = profile.witnesses.select_rows(0..r - i);
        let coords = saturate(&w)?;
        Ok(Sublattice { host: self.clone(), coords, primitive: true })
    }

    /// The first minima witness; always primitive.
    pub fn shortest_vector(&self) -> Result<Vec<BigInt>> {
        Ok(self.successive_minima()?.witness(0).to_vec())
    }

    /// `L / <v>` realized as the projection of `L` onto the orthogonal
    /// complement of `v` (given by coordinates; must be primitive).
    pub fn project_quotient(&self, v: &[BigInt]) -> Result<Lattice> {
        let r = self.rank();
        if v.len() != r {
            return Err(Error::argument(format!("vector has {} coordinates, lattice rank is {r}", v.len())));
        }
        if r < 2 {
            return Err(Error::argument("quotient of a rank-1 lattice is trivial"));
        }
        let row = IntegerMatrix::from_rows(&[v.to_vec()])?;
        if v.iter().all(Zero::is_zero) || !is_primitive(&row)? {
            return Err(Error::NotPrimitive("vector is not primitive in the lattice".into()));
        }
        let completion = complete_basis(&row)?;
        let ambient_v = self.vector(v);
        let rows: Vec<Vec<Rational>> = (1..r)
            .map(|i| project_orthogonal(&self.vector(completion.row(i)), &ambient_v))
            .collect();
        Lattice::new(RationalMatrix::from_rows(&rows)?)
    }

    /// Sublattice with the given coordinate rows, canonicalized to HNF.
    pub fn sublattice(&self, coords: &IntegerMatrix) -> Result<Sublattice> {
        if coords.cols() != self.rank() {
            return Err(Error::argument(format!(
                "coordinates have {} columns, lattice rank is {}",
                coords.cols(),
                self.rank()
            )));
        }
        let (h, _) = hnf(coords)?;
        let primitive = is_primitive(&h)?;
        Ok(Sublattice { host: self.clone(), coords: h, primitive })
    }

    /// Wraps coordinates that the caller guarantees are in HNF.
    pub(crate) fn sublattice_unchecked(&self, coords: IntegerMatrix, primitive: bool) -> Sublattice {
        Sublattice { host: self.clone(), coords, primitive }
    }

    pub(crate) fn same_as(&self, other: &Lattice) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.basis() == other.basis()
    }
}

impl PartialEq for Lattice {
    fn eq(&self, other: &Self) -> bool {
        self.same_as(other)
    }
}

impl Eq for Lattice {}

impl fmt::Debug for Lattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Lattice {:?}", self.basis())
    }
}

/// `w` minus its component along `v`.
pub fn project_orthogonal(w: &[Rational], v: &[Rational]) -> Vec<Rational> {
    let vv: Rational = v.iter().map(|x| x * x).sum();
    let wv: Rational = w.iter().zip(v).map(|(a, b)| a * b).sum();
    let t = wv / vv;
    w.iter().zip(v).map(|(a, b)| a - &t * b).collect()
}

/// Unimodular matrix whose first rows are the given primitive rows.
pub fn complete_basis(rows: &IntegerMatrix) -> Result<IntegerMatrix> {
    if !is_primitive(rows)? {
        return Err(Error::NotPrimitive("rows do not extend to a basis".into()));
    }
    // For primitive rows the echelon of rows^T is exactly [I; 0], so
    // rows^T is the first block of columns of u^{-1}.
    let e = echelon_with_transform(&rows.transpose());
    let uinv = e.u.to_rational().inverse()?.to_integer().expect("inverse of unimodular is integral");
    let full = uinv.transpose();
    debug_assert_eq!(full.select_rows(0..rows.rows()), *rows);
    Ok(full)
}

/// Rank-`d` sublattice given by integer coordinates in HNF.
#[derive(Clone, PartialEq, Eq)]
pub struct Sublattice {
    host: Lattice,
    coords: IntegerMatrix,
    primitive: bool,
}

impl Sublattice {
    pub fn host(&self) -> &Lattice {
        &self.host
    }

    pub fn coords(&self) -> &IntegerMatrix {
        &self.coords
    }

    pub fn rank(&self) -> usize {
        self.coords.rows()
    }

    pub fn is_primitive(&self) -> bool {
        self.primitive
    }

    /// Ambient basis `coords * B`.
    pub fn basis(&self) -> RationalMatrix {
        self.coords.to_rational().mul(self.host.basis()).expect("dimensions agree")
    }

    pub fn det_squared(&self) -> SquaredMagnitude {
        det_squared(&self.basis())
    }

    /// This sublattice as a lattice in its own right.
    pub fn as_lattice(&self) -> Lattice {
        Lattice::new(self.basis()).expect("sublattice basis has full rank")
    }

    /// Primitive closure inside the host.
    pub fn saturate(&self) -> Sublattice {
        let coords = saturate(&self.coords).expect("coords have full rank");
        Sublattice { host: self.host.clone(), coords, primitive: true }
    }

    /// The orthogonal lattice, a primitive sublattice of the polar host.
    pub fn orthogonal(&self) -> Result<Sublattice> {
        if !self.primitive {
            return Err(Error::NotPrimitive("orthogonal lattice needs a primitive sublattice".into()));
        }
        let host = self.host.polar();
        if self.rank() == self.host.rank() {
            return Err(Error::argument("orthogonal lattice of a full-rank sublattice is zero"));
        }
        let k = integer_kernel(&self.coords);
        let (h, _) = hnf(&k)?;
        Ok(Sublattice { host, coords: h, primitive: true })
    }
}

impl fmt::Debug for Sublattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Sublattice {:?}", self.coords)
    }
}
