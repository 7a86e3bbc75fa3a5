//! Exact counts of sublattices with bounded determinant.

mod primitive;

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{Pow, Signed, ToPrimitive, Zero};
use serde::Serialize;
use serde_json::{json, Value};

use crate::arithmetic::{hnf_count, hnf_matrices, to_u64};
use crate::enumerate::Enumerator;
use crate::error::{Error, Result};
use crate::exact::{hnf, integer_kernel, parse_rational, IntegerMatrix, Rational, SquaredMagnitude};
use crate::lattice::{Lattice, Sublattice};
use crate::limits::Limits;

pub(crate) use primitive::upper_root;
use primitive::{search, Found};

/// A height bound `H`, kept as `H^2`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct HeightBudget {
    #[serde(serialize_with = "crate::json::serialize_squared")]
    h_squared: SquaredMagnitude,
}

impl HeightBudget {
    pub fn new(h_squared: SquaredMagnitude) -> Self {
        HeightBudget { h_squared }
    }

    /// Budget for the height `h` itself.
    pub fn from_height(h: &Rational) -> Result<Self> {
        if h.is_negative() {
            return Err(Error::Domain("height must be non-negative".into()));
        }
        Ok(HeightBudget { h_squared: SquaredMagnitude::square_of(h) })
    }

    pub fn from_h_squared(h2: Rational) -> Result<Self> {
        Ok(HeightBudget { h_squared: SquaredMagnitude::new(h2)? })
    }

    pub fn from_integer_h_squared(h2: u64) -> Self {
        HeightBudget { h_squared: SquaredMagnitude::from_integer(h2) }
    }

    pub fn h_squared(&self) -> &SquaredMagnitude {
        &self.h_squared
    }

    fn value(&self) -> &Rational {
        self.h_squared.value()
    }

    /// The budget `H^2 * factor`.
    pub fn scaled(&self, factor: &Rational) -> Result<Self> {
        HeightBudget::from_h_squared(self.value() * factor)
    }
}

impl FromStr for HeightBudget {
    type Err = Error;

    /// Parses `H^2` as `p/q`, `p` or a decimal.
    fn from_str(s: &str) -> Result<Self> {
        HeightBudget::from_h_squared(parse_rational(s)?)
    }
}

impl fmt::Display for HeightBudget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "H^2 = {}", self.h_squared)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Primitive,
    All,
    Avoiding,
    Flags,
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "primitive" => Ok(Variant::Primitive),
            "all" => Ok(Variant::All),
            "avoiding" => Ok(Variant::Avoiding),
            "flags" => Ok(Variant::Flags),
            other => Err(Error::Parse(format!("unknown variant {other:?}"))),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Primitive => "primitive",
            Variant::All => "all",
            Variant::Avoiding => "avoiding",
            Variant::Flags => "flags",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CountParams {
    pub n: usize,
    pub d: usize,
    pub variant: Variant,
}

#[derive(Clone, Debug)]
pub struct CountResult {
    pub count: u64,
    /// Present when materialization was requested; sorted by determinant,
    /// then coordinates.
    pub sublattices: Option<Vec<Sublattice>>,
    pub budget: HeightBudget,
    pub params: CountParams,
}

impl CountResult {
    pub fn to_json(&self) -> Result<Value> {
        let mut v = json!({
            "count": self.count,
            "params": self.params,
            "h_squared": self.budget.h_squared.to_string(),
        });
        if let Some(subs) = &self.sublattices {
            let list = subs
                .iter()
                .map(|s| {
                    Ok(json!({
                        "coords": crate::json::integer_matrix_to_i64(s.coords())?,
                        "det_squared": s.det_squared().to_string(),
                    }))
                })
                .collect::<Result<Vec<_>>>()?;
            v["sublattices"] = Value::Array(list);
        }
        Ok(v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FlagCount {
    pub count: u64,
    pub e: usize,
    pub d: usize,
    pub generic_only: bool,
}

/// How `enumerate_primitive` reaches its answer.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Strategy {
    /// Direct search, or the polar search when `n - d < d`.
    #[default]
    Auto,
    /// Always search in `L` itself.
    Direct,
    /// Always search in the polar lattice.
    Dual,
}

#[derive(Clone, Debug, Default)]
pub struct CountOptions {
    pub materialize: bool,
    pub limits: Limits,
    pub strategy: Strategy,
}

impl CountOptions {
    pub fn materialized() -> Self {
        CountOptions { materialize: true, ..Default::default() }
    }

    pub fn direct() -> Self {
        CountOptions { strategy: Strategy::Direct, ..Default::default() }
    }

    pub fn with_limits(mut self, limits: Limits) -> Self {
        self.limits = limits;
        self
    }

    pub fn with_strategy(mut self, strategy: Strategy) -> Self {
        self.strategy = strategy;
        self
    }

    pub fn with_materialize(mut self, materialize: bool) -> Self {
        self.materialize = materialize;
        self
    }
}

fn check_rank(l: &Lattice, d: usize) -> Result<()> {
    let n = l.rank();
    if d == 0 || d >= n {
        return Err(Error::argument(format!("rank d = {d} must lie in 1..={}", n.saturating_sub(1))));
    }
    Ok(())
}

fn to_sublattices(host: &Lattice, found: Vec<Found>) -> Vec<Sublattice> {
    let mut found = found;
    found.sort_by(|a, b| {
        a.det_squared
            .cmp(&b.det_squared)
            .then_with(|| a.coords.entries().cmp(b.coords.entries()))
    });
    found
        .into_iter()
        .map(|f| host.sublattice_unchecked(f.coords, true))
        .collect()
}

/// `P(L, d, H)`: primitive rank-`d` sublattices with `det^2 <= H^2`.
pub fn enumerate_primitive(l: &Lattice, d: usize, budget: &HeightBudget, opts: &CountOptions) -> Result<CountResult> {
    check_rank(l, d)?;
    let n = l.rank();
    let dual = match opts.strategy {
        Strategy::Auto => n - d < d,
        Strategy::Direct => false,
        Strategy::Dual => true,
    };
    if dual {
        return duality_count(l, d, budget, opts);
    }
    let (count, found) = search(l, d, budget.value(), &opts.limits, opts.materialize)?;
    Ok(CountResult {
        count,
        sublattices: opts.materialize.then(|| to_sublattices(l, found)),
        budget: budget.clone(),
        params: CountParams { n, d, variant: Variant::Primitive },
    })
}

/// `P(L, d, H)` computed as `P(L^P, n - d, H / det L)`, mapping sublattices
/// back through their orthogonal lattices.
pub fn duality_count(l: &Lattice, d: usize, budget: &HeightBudget, opts: &CountOptions) -> Result<CountResult> {
    check_rank(l, d)?;
    let n = l.rank();
    let polar = l.polar();
    let h2 = budget.value() / l.det_squared().value();
    let (count, found) = search(&polar, n - d, &h2, &opts.limits, opts.materialize)?;
    let sublattices = if opts.materialize {
        let mut back = Vec::with_capacity(found.len());
        for f in found {
            let (coords, _) = hnf(&integer_kernel(&f.coords))?;
            // det^2(S^perp) * det^2(L^P) = det^2(S), and det^2(L^P) = 1 / det^2(L).
            let det_squared = f.det_squared * l.det_squared().value();
            back.push(Found { coords, det_squared });
        }
        Some(to_sublattices(l, back))
    } else {
        None
    };
    Ok(CountResult {
        count,
        sublattices,
        budget: budget.clone(),
        params: CountParams { n, d, variant: Variant::Primitive },
    })
}

fn primitive_list(l: &Lattice, d: usize, budget: &HeightBudget, opts: &CountOptions) -> Result<Vec<Sublattice>> {
    let opts = CountOptions { materialize: true, ..opts.clone() };
    Ok(enumerate_primitive(l, d, budget, &opts)?.sublattices.unwrap_or_default())
}

/// Largest `m` with `m^2 * det2 <= h2`.
fn max_index(h2: &Rational, det2: &Rational) -> u64 {
    let q = (h2 / det2).floor().to_integer();
    q.sqrt().to_u64().unwrap_or(u64::MAX)
}

/// `N(L, d, H)`: all rank-`d` sublattices with `det^2 <= H^2`.
pub fn count_all(l: &Lattice, d: usize, budget: &HeightBudget, opts: &CountOptions) -> Result<CountResult> {
    let prims = primitive_list(l, d, budget, opts)?;
    let mut per_index: Vec<u64> = vec![0];
    let mut count: u64 = 0;
    let mut listed = Vec::new();
    for b in &prims {
        let m_max = max_index(budget.value(), b.det_squared().value());
        while (per_index.len() as u64) <= m_max {
            let m = per_index.len() as u64;
            per_index.push(to_u64(&hnf_count(d as u32, m))?);
        }
        for m in 1..=m_max {
            count = count
                .checked_add(per_index[m as usize])
                .ok_or_else(|| Error::capacity("count overflow"))?;
            if opts.materialize {
                for t in hnf_matrices(d, m) {
                    let coords = hnf(&t.mul(b.coords())?)?.0;
                    listed.push(l.sublattice_unchecked(coords, m == 1));
                }
            }
        }
    }
    let sublattices = opts.materialize.then(|| {
        let mut keyed: Vec<(SquaredMagnitude, Sublattice)> = listed.into_iter().map(|s| (s.det_squared(), s)).collect();
        keyed.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.coords().entries().cmp(b.1.coords().entries())));
        keyed.into_iter().map(|(_, s)| s).collect()
    });
    Ok(CountResult {
        count,
        sublattices,
        budget: budget.clone(),
        params: CountParams { n: l.rank(), d, variant: Variant::All },
    })
}

fn stacked_rank(a: &IntegerMatrix, b: &IntegerMatrix) -> Result<usize> {
    Ok(a.stack(b)?.rank())
}

/// Primitive rank-`d` sublattices meeting `s` only in zero.
pub fn count_avoiding(
    l: &Lattice,
    d: usize,
    budget: &HeightBudget,
    s: &Sublattice,
    opts: &CountOptions,
) -> Result<CountResult> {
    check_rank(l, d)?;
    if !s.host().same_as(l) {
        return Err(Error::argument("avoided sublattice belongs to a different lattice"));
    }
    if !s.is_primitive() {
        return Err(Error::NotPrimitive("avoided sublattice must be primitive".into()));
    }
    if s.rank() > l.rank() - d {
        return Err(Error::argument(format!(
            "avoided sublattice has rank {} > n - d = {}",
            s.rank(),
            l.rank() - d
        )));
    }
    let mut kept = Vec::new();
    for b in primitive_list(l, d, budget, opts)? {
        if stacked_rank(b.coords(), s.coords())? == d + s.rank() {
            kept.push(b);
        }
    }
    Ok(CountResult {
        count: kept.len() as u64,
        sublattices: opts.materialize.then_some(kept),
        budget: budget.clone(),
        params: CountParams { n: l.rank(), d, variant: Variant::Avoiding },
    })
}

/// `(p1, p2)`: primitive rank-`d` sublattices whose span misses or
/// contains the primitive vector `v` (given by coordinates).
pub fn split_p1_p2(l: &Lattice, d: usize, budget: &HeightBudget, v: &[BigInt], opts: &CountOptions) -> Result<(u64, u64)> {
    check_rank(l, d)?;
    if d < 2 {
        return Err(Error::argument("split needs d >= 2"));
    }
    if v.len() != l.rank() {
        return Err(Error::argument("vector length differs from the lattice rank"));
    }
    let row = IntegerMatrix::from_rows(&[v.to_vec()])?;
    if v.iter().all(Zero::is_zero) || !crate::exact::is_primitive(&row)? {
        return Err(Error::NotPrimitive("split vector must be primitive".into()));
    }
    let (mut p1, mut p2) = (0u64, 0u64);
    for b in primitive_list(l, d, budget, opts)? {
        if stacked_rank(b.coords(), &row)? == d {
            p2 += 1;
        } else {
            p1 += 1;
        }
    }
    Ok((p1, p2))
}

/// Flags `S_e ⊂ S_d` of primitive sublattices with
/// `(det^2 S_e)^d (det^2 S_d)^{n-e} <= H^2`.
pub fn count_flags(
    l: &Lattice,
    e: usize,
    d: usize,
    budget: &HeightBudget,
    generic_only: bool,
    opts: &CountOptions,
) -> Result<FlagCount> {
    let n = l.rank();
    if !(1 <= e && e < d && d < n) {
        return Err(Error::argument(format!("flag type needs 1 <= e < d < n, got e={e}, d={d}, n={n}")));
    }
    let h2 = budget.value();
    if h2.is_zero() {
        return Ok(FlagCount { count: 0, e, d, generic_only });
    }
    // Any rank-e sublattice S has det^2 S >= Π_{i<=e} λ_i^2 / γ_e^e.
    let eps = primitive::minima_product(l, e, &opts.limits)? / primitive::hermite_power(e);
    let outer_bound = upper_root(&(h2 / Pow::pow(&eps, d as i32)), (n - e) as u32);
    let outer = primitive_list(l, d, &HeightBudget::from_h_squared(outer_bound)?, opts)?;

    let mut count = 0u64;
    for sd in outer {
        let det_d = sd.det_squared().into_value();
        let rest = h2 / Pow::pow(&det_d, (n - e) as i32);
        let inner_bound = upper_root(&rest, d as u32);
        let inner_lattice = sd.as_lattice();
        let inner_budget = HeightBudget::from_h_squared(inner_bound)?;
        let filtration = if generic_only {
            Some(inner_lattice.minima_filtration_with(e, &opts.limits)?)
        } else {
            None
        };
        let inner_opts = CountOptions { materialize: true, ..opts.clone() };
        let inner = enumerate_primitive(&inner_lattice, e, &inner_budget, &inner_opts)?
            .sublattices
            .unwrap_or_default();
        for se in inner {
            let det_e = se.det_squared().into_value();
            if Pow::pow(&det_e, d as i32) * Pow::pow(&det_d, (n - e) as i32) > *h2 {
                continue;
            }
            if let Some(f) = &filtration {
                if stacked_rank(se.coords(), f.coords())? != d {
                    continue;
                }
            }
            count += 1;
        }
    }
    Ok(FlagCount { count, e, d, generic_only })
}

/// Points of `Λ + t` with squared length at most `r`. The shift `t` is in
/// ambient coordinates; any component orthogonal to `Λ` adds a constant.
pub fn count_affine_ball(l: &Lattice, t: &[Rational], r: &SquaredMagnitude, limits: &Limits) -> Result<u64> {
    if t.len() != l.ambient_dim() {
        return Err(Error::argument(format!(
            "shift has {} entries, ambient dimension is {}",
            t.len(),
            l.ambient_dim()
        )));
    }
    if l.rank() > limits.max_rank {
        return Err(Error::capacity(format!("rank {} exceeds the cap {}", l.rank(), limits.max_rank)));
    }
    let (reduced, _) = l.lll_pair();
    let gram = reduced.gram();
    // Coordinates of the in-span part of t in the reduced basis.
    let bt: Vec<Rational> = (0..reduced.rows())
        .map(|i| reduced.row(i).iter().zip(t).map(|(a, b)| a * b).sum())
        .collect();
    let ginv = gram.inverse()?;
    let tau: Vec<Rational> = (0..gram.rows())
        .map(|i| (0..gram.rows()).map(|j| &ginv[(i, j)] * &bt[j]).sum())
        .collect();
    let parallel_sq: Rational = tau.iter().zip(&bt).map(|(a, b)| a * b).sum();
    let t_sq: Rational = t.iter().map(|x| x * x).sum();
    let radius = r.value() - (t_sq - parallel_sq);
    if radius.is_negative() {
        return Ok(0);
    }
    let parts = Enumerator::new(&gram, radius)
        .with_shift(tau)
        .with_budget(limits.max_vectors)
        .fold_subtrees(limits.parallel, || 0u64, |acc, _, _| {
            *acc += 1;
            Ok(())
        })?;
    Ok(parts.into_iter().sum())
}

#[cfg(test)]
mod tests;
