//! Seeded verification suites for the exact identities, each comparing a
//! library computation against an injectable reference.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use grasscount_core::arithmetic::{hecke_count, hecke_dirichlet, hecke_reps, sigma_d, smith_invariants_of_rep};
use grasscount_core::asymptotics::{zeta, Precision};
use grasscount_core::counting::{duality_count, enumerate_primitive, split_p1_p2, count_all, CountOptions, HeightBudget, Strategy};
use grasscount_core::exact::format_rational;
use grasscount_core::json::lattice_to_value;
use grasscount_core::lattice::project_orthogonal;
use grasscount_core::{Lattice, Rational};
use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::generate::{random_integer_lattice, random_rational_lattice};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Duality,
    Split,
    Moebius,
    Hecke,
    Dirichlet,
    Projection,
    Scale,
}

impl Suite {
    pub const ALL: [Suite; 7] =
        [Suite::Duality, Suite::Split, Suite::Moebius, Suite::Hecke, Suite::Dirichlet, Suite::Projection, Suite::Scale];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Duality => "duality",
            Suite::Split => "split",
            Suite::Moebius => "moebius",
            Suite::Hecke => "hecke",
            Suite::Dirichlet => "dirichlet",
            Suite::Projection => "projection",
            Suite::Scale => "scale",
        }
    }

    /// Expands `all`; any other name gives a single suite.
    pub fn parse_list(name: &str) -> Result<Vec<Suite>> {
        if name == "all" {
            return Ok(Suite::ALL.to_vec());
        }
        Ok(vec![name.parse()?])
    }

    fn stream(self) -> u64 {
        Suite::ALL.iter().position(|&s| s == self).expect("listed") as u64
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| Error::UnknownSuite(s.to_string()))
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Reference side of each identity. The defaults compute it by a route
/// independent of the quantity under test; test fixtures override single
/// methods to check that the suites notice disagreement.
pub trait Oracle: Sync {
    /// `P(L^P, n - d, H^2 / det^2 L)` by direct search in the polar lattice.
    fn polar_count(&self, l: &Lattice, d: usize, budget: &HeightBudget, opts: &CountOptions) -> Result<u64> {
        let polar = l.polar();
        let b = budget.scaled(&l.det_squared().value().recip())?;
        let direct = opts.clone().with_strategy(Strategy::Direct);
        Ok(enumerate_primitive(&polar, l.rank() - d, &b, &direct)?.count)
    }

    /// `P(L̄, d - 1, H^2 / |v|^2)` with `L̄` the projection along `v`.
    fn quotient_count(&self, l: &Lattice, d: usize, budget: &HeightBudget, v: &[BigInt], opts: &CountOptions) -> Result<u64> {
        let bar = l.project_quotient(v)?;
        let b = budget.scaled(&l.norm_squared(v).value().recip())?;
        Ok(enumerate_primitive(&bar, d - 1, &b, opts)?.count)
    }

    /// `sum_m sigma_d(m) P(L, d, H^2 / m^2)`.
    fn moebius_sum(&self, l: &Lattice, d: usize, budget: &HeightBudget, opts: &CountOptions) -> Result<u64> {
        let mut total = 0u64;
        for m in 1u64.. {
            let b = budget.scaled(&Rational::new(BigInt::one(), BigInt::from(m * m)))?;
            let p = enumerate_primitive(l, d, &b, opts)?.count;
            if p == 0 {
                // Budgets only shrink from here.
                break;
            }
            let s = sigma_d(d as u32, m).to_u64().ok_or_else(|| grasscount_core::Error::Capacity("sigma overflow".into()))?;
            total += s * p;
        }
        Ok(total)
    }

    /// Number of `d x d` upper HNFs with determinant `m`, by explicit enumeration.
    fn hnf_count(&self, d: usize, m: u64) -> u64 {
        brute_hnf_count(d, m)
    }

    /// Whether `a b^{-1}` is integral, i.e. `GL(d, Z) a = GL(d, Z) b`.
    fn same_coset(&self, a: &[Vec<i64>], b: &[Vec<i64>]) -> bool {
        let adj = lower_adjugate(b);
        let det: i64 = (0..b.len()).map(|i| b[i][i]).product();
        let d = a.len();
        (0..d).all(|i| (0..d).all(|j| (0..d).map(|t| a[i][t] * adj[t][j]).sum::<i64>() % det == 0))
    }

    /// `zeta(m - d) / zeta(m)`.
    fn zeta_quotient(&self, d: u32, m: u32, precision: Precision) -> Result<f64> {
        Ok(zeta(m - d, precision)?.div(&zeta(m, precision)?).to_f64())
    }

    /// `P(cL, d, c^{2d} H^2)`.
    fn scaled_count(&self, l: &Lattice, d: usize, budget: &HeightBudget, c: &Rational, opts: &CountOptions) -> Result<u64> {
        let cl = l.scaled(c)?;
        let factor = (c * c).pow(d as i32);
        Ok(enumerate_primitive(&cl, d, &budget.scaled(&factor)?, opts)?.count)
    }

    /// `|w|^2 - (w.v)^2 / |v|^2`.
    fn projected_norm(&self, w: &[Rational], v: &[Rational]) -> Rational {
        let dot = |a: &[Rational], b: &[Rational]| a.iter().zip(b).map(|(x, y)| x * y).sum::<Rational>();
        let wv = dot(w, v);
        dot(w, w) - &wv * &wv / dot(v, v)
    }
}

/// The default oracle.
#[derive(Clone, Copy, Debug, Default)]
pub struct Reference;

impl Oracle for Reference {}

fn brute_hnf_count(d: usize, m: u64) -> u64 {
    fn rec(d: usize, m: u64, col: usize, diag: &mut Vec<u64>) -> u64 {
        if col == d {
            if m != 1 {
                return 0;
            }
            // Walk every choice of the entries above the diagonal.
            let slots: Vec<u64> = (0..d).flat_map(|j| std::iter::repeat_n(diag[j], j)).collect();
            let mut idx = vec![0u64; slots.len()];
            let mut count = 0;
            loop {
                count += 1;
                let mut s = 0;
                while s < slots.len() {
                    idx[s] += 1;
                    if idx[s] < slots[s] {
                        break;
                    }
                    idx[s] = 0;
                    s += 1;
                }
                if s == slots.len() {
                    return count;
                }
            }
        }
        let mut total = 0;
        for a in 1..=m {
            if m.is_multiple_of(a) {
                diag.push(a);
                total += rec(d, m / a, col + 1, diag);
                diag.pop();
            }
        }
        total
    }
    rec(d, m, 0, &mut Vec::new())
}

// det(h) h^{-1} for lower-triangular integer h, by forward substitution.
fn lower_adjugate(h: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let d = h.len();
    let det: i64 = (0..d).map(|i| h[i][i]).product();
    let mut adj = vec![vec![0i64; d]; d];
    for j in 0..d {
        for i in 0..d {
            let mut rhs = if i == j { det } else { 0 };
            for k in 0..i {
                rhs -= h[i][k] * adj[k][j];
            }
            adj[i][j] = rhs / h[i][i];
        }
    }
    adj
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Failure {
    pub suite: Suite,
    pub check: String,
    /// Everything needed to replay the check.
    pub instance: Value,
    pub expected: String,
    pub got: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: usize,
    pub passed: bool,
    pub failures: Vec<Failure>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub passed: bool,
    pub suites: Vec<SuiteReport>,
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Overrides the per-suite instance counts.
    pub instances: Option<usize>,
    pub count: CountOptions,
    pub precision: Precision,
}

impl VerifyOptions {
    pub fn new(seed: u64) -> Self {
        VerifyOptions { seed, instances: None, count: CountOptions::default(), precision: Precision::from_env() }
    }
}

/// Runs the named suite (or `all`) with the reference oracle.
pub fn verify(suite: &str, seed: u64) -> Result<VerifyReport> {
    verify_with(&Suite::parse_list(suite)?, &VerifyOptions::new(seed), &Reference)
}

pub fn verify_with(suites: &[Suite], opts: &VerifyOptions, oracle: &dyn Oracle) -> Result<VerifyReport> {
    let mut reports = Vec::new();
    for &suite in suites {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(suite.stream());
        let checks = build_checks(suite, &mut rng, opts)?;
        let failures: Vec<Failure> = checks
            .par_iter()
            .map(|c| run_check(suite, c, opts, oracle))
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect();
        reports.push(SuiteReport { suite, checks: checks.len(), passed: failures.is_empty(), failures });
    }
    Ok(VerifyReport { seed: opts.seed, passed: reports.iter().all(|r| r.passed), suites: reports })
}

/// One seeded instance.
#[derive(Clone, Debug)]
enum Check {
    Duality { l: Lattice, d: usize, h2: Rational },
    Split { l: Lattice, d: usize, h2: Rational, axis: usize },
    Moebius { l: Lattice, d: usize, h2: Rational },
    Sigma { d: usize, m: u64 },
    Hecke { d: usize, k: u64 },
    Dirichlet { d: u32, m: u32, terms: u64, tol: Option<f64> },
    Projection { l: Lattice },
    Scale { l: Lattice, d: usize, h2: Rational },
}

impl Check {
    fn to_json(&self) -> Value {
        let h = |h2: &Rational| format_rational(h2);
        match self {
            Check::Duality { l, d, h2 } | Check::Moebius { l, d, h2 } | Check::Scale { l, d, h2 } => {
                json!({ "lattice": lattice_to_value(l), "d": d, "h2": h(h2) })
            }
            Check::Split { l, d, h2, axis } => {
                json!({ "lattice": lattice_to_value(l), "d": d, "h2": h(h2), "v": unit(l.rank(), *axis) })
            }
            Check::Sigma { d, m } => json!({ "d": d, "m": m }),
            Check::Hecke { d, k } => json!({ "d": d, "k": k }),
            Check::Dirichlet { d, m, terms, tol } => json!({ "d": d, "m": m, "terms": terms, "tol": tol }),
            Check::Projection { l } => json!({ "lattice": lattice_to_value(l) }),
        }
    }
}

fn unit(n: usize, axis: usize) -> Vec<i64> {
    (0..n).map(|i| i64::from(i == axis)).collect()
}

fn count_for(opts: &VerifyOptions, default: usize) -> usize {
    opts.instances.unwrap_or(default)
}

/// `prod_{i <= d} lambda_i^2 * k`: budgets scaled to the lattice so counts stay small.
fn budget_near_minima(l: &Lattice, d: usize, k: i64, opts: &VerifyOptions) -> Result<Rational> {
    let profile = l.successive_minima_with(&opts.count.limits)?;
    let prod = profile.lambda_squared[..d].iter().fold(Rational::one(), |acc, s| acc * s.value());
    Ok(prod * Rational::from_integer(BigInt::from(k)))
}

fn build_checks(suite: Suite, rng: &mut ChaCha8Rng, opts: &VerifyOptions) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    match suite {
        Suite::Duality => {
            for _ in 0..count_for(opts, 20) {
                let n = rng.gen_range(2..=4);
                let l = random_rational_lattice(rng, n, 3, 3)?;
                for d in 1..n {
                    for k in [1, 2, 4] {
                        out.push(Check::Duality { h2: budget_near_minima(&l, d, k, opts)?, l: l.clone(), d });
                    }
                }
            }
        }
        Suite::Split => {
            for _ in 0..count_for(opts, 20) {
                let n = rng.gen_range(3..=4);
                let d = rng.gen_range(2..n);
                let l = random_rational_lattice(rng, n, 3, 3)?;
                let k = *[1, 2, 4].choose(rng).expect("nonempty");
                let axis = rng.gen_range(0..n);
                out.push(Check::Split { h2: budget_near_minima(&l, d, k, opts)?, l, d, axis });
            }
        }
        Suite::Moebius => {
            for _ in 0..count_for(opts, 20) {
                let n = rng.gen_range(2..=4);
                let d = rng.gen_range(1..n);
                let l = random_integer_lattice(rng, n, 1)?;
                let h2 = Rational::from_integer(BigInt::from(rng.gen_range(1..=64)));
                out.push(Check::Moebius { l, d, h2 });
            }
            for d in 1..=3 {
                for m in 1..=60 {
                    out.push(Check::Sigma { d, m });
                }
            }
        }
        Suite::Hecke => {
            for d in 1..=3 {
                for k in 1..=16 {
                    out.push(Check::Hecke { d, k });
                }
            }
        }
        Suite::Dirichlet => {
            out.push(Check::Dirichlet { d: 2, m: 6, terms: 100_000, tol: Some(1e-6) });
            for (d, m) in [(1, 3), (2, 4), (3, 6), (2, 8), (1, 5)] {
                out.push(Check::Dirichlet { d, m, terms: 1000, tol: None });
            }
        }
        Suite::Projection => {
            for _ in 0..count_for(opts, 20) {
                let n = rng.gen_range(2..=4);
                out.push(Check::Projection { l: random_rational_lattice(rng, n, 4, 3)? });
            }
        }
        Suite::Scale => {
            for _ in 0..count_for(opts, 10) {
                let n = rng.gen_range(2..=4);
                let d = rng.gen_range(1..n);
                let l = random_rational_lattice(rng, n, 3, 3)?;
                let k = *[1, 2, 4].choose(rng).expect("nonempty");
                out.push(Check::Scale { h2: budget_near_minima(&l, d, k, opts)?, l, d });
            }
        }
    }
    Ok(out)
}

struct Ctx<'a> {
    suite: Suite,
    check: &'a Check,
    failures: Vec<Failure>,
}

impl Ctx<'_> {
    fn fail(&mut self, name: &str, expected: impl ToString, got: impl ToString) {
        self.failures.push(Failure {
            suite: self.suite,
            check: name.to_string(),
            instance: self.check.to_json(),
            expected: expected.to_string(),
            got: got.to_string(),
        });
    }

    fn eq<T: PartialEq + ToString>(&mut self, name: &str, expected: T, got: T) {
        if expected != got {
            self.fail(name, expected, got);
        }
    }

    fn ok(&mut self, name: &str, cond: bool, expected: impl ToString, got: impl ToString) {
        if !cond {
            self.fail(name, expected, got);
        }
    }
}

fn run_check(suite: Suite, check: &Check, opts: &VerifyOptions, oracle: &dyn Oracle) -> Vec<Failure> {
    let mut ctx = Ctx { suite, check, failures: Vec::new() };
    if let Err(e) = evaluate(&mut ctx, opts, oracle) {
        ctx.fail("evaluation", "no error", e);
    }
    ctx.failures
}

fn evaluate(ctx: &mut Ctx<'_>, opts: &VerifyOptions, oracle: &dyn Oracle) -> Result<()> {
    let co = &opts.count;
    match ctx.check {
        Check::Duality { l, d, h2 } => {
            let budget = HeightBudget::from_h_squared(h2.clone())?;
            let direct = enumerate_primitive(l, *d, &budget, &co.clone().with_strategy(Strategy::Direct))?.count;
            let reference = oracle.polar_count(l, *d, &budget, co)?;
            ctx.eq("P(L, d, H) = P(L^P, n - d, H / det L)", reference, direct);
            let via_dual = duality_count(l, *d, &budget, co)?.count;
            ctx.eq("duality_count", reference, via_dual);
        }
        Check::Split { l, d, h2, axis } => {
            let budget = HeightBudget::from_h_squared(h2.clone())?;
            let v: Vec<BigInt> = unit(l.rank(), *axis).into_iter().map(BigInt::from).collect();
            let (p1, p2) = split_p1_p2(l, *d, &budget, &v, co)?;
            let reference = oracle.quotient_count(l, *d, &budget, &v, co)?;
            ctx.eq("p2 = P(L̄, d - 1, H / |v|)", reference, p2);
            let total = enumerate_primitive(l, *d, &budget, co)?.count;
            ctx.eq("p1 + p2 = P(L, d, H)", total, p1 + p2);
        }
        Check::Moebius { l, d, h2 } => {
            let budget = HeightBudget::from_h_squared(h2.clone())?;
            let all = count_all(l, *d, &budget, co)?.count;
            let reference = oracle.moebius_sum(l, *d, &budget, co)?;
            ctx.eq("N(L, d, H) = sum sigma_d(m) P(L, d, H / m)", reference, all);
        }
        Check::Sigma { d, m } => {
            let reference = oracle.hnf_count(*d, *m);
            ctx.eq("sigma_d(m) = #HNF", reference.to_string(), sigma_d(*d as u32, *m).to_string());
        }
        Check::Hecke { d, k } => {
            let reps = hecke_reps(*d, *k)?;
            ctx.eq("|reps| = hecke_count", hecke_count(*d as u32, *k).to_string(), reps.len().to_string());
            let mut want = vec![BigInt::one(); *d];
            want[d - 1] = BigInt::from(*k);
            for r in &reps {
                let got = smith_invariants_of_rep(r);
                if got != want {
                    ctx.fail("Smith invariants (1, ..., 1, k)", format!("{want:?}"), format!("{:?} for {:?}", got, r.matrix));
                }
            }
            let mats: Vec<Vec<Vec<i64>>> = reps
                .iter()
                .map(|r| r.matrix.to_i64_rows().ok_or_else(|| grasscount_core::Error::Capacity("entry overflow".into())))
                .collect::<grasscount_core::Result<_>>()?;
            let distinct: HashSet<_> = mats.iter().collect();
            ctx.eq("distinct matrices", mats.len(), distinct.len());
            for a in 0..mats.len() {
                for b in a + 1..mats.len() {
                    if oracle.same_coset(&mats[a], &mats[b]) {
                        ctx.fail("pairwise distinct cosets", "distinct", format!("{:?} ~ {:?}", mats[a], mats[b]));
                    }
                }
            }
        }
        Check::Dirichlet { d, m, terms, tol } => {
            let s = hecke_dirichlet(*d, *m, *terms)?;
            let target = oracle.zeta_quotient(*d, *m, opts.precision)?;
            match tol {
                Some(t) => ctx.ok(
                    "|sum - zeta(m - d) / zeta(m)| within tolerance",
                    (target - s.value).abs() <= *t,
                    format!("{target} ± {t}"),
                    s.value,
                ),
                None => ctx.ok(
                    "partial sum below the limit by at most the tail bound",
                    s.value <= target + 1e-12 && target - s.value <= s.tail_bound + 1e-12,
                    format!("{target} - tail {}", s.tail_bound),
                    s.value,
                ),
            }
        }
        Check::Projection { l } => {
            let v = l.shortest_vector()?;
            let bar = l.project_quotient(&v)?;
            let lam = &l.successive_minima_with(&co.limits)?.lambda_squared;
            let lam_bar = &bar.successive_minima_with(&co.limits)?.lambda_squared;
            for i in 0..bar.rank() {
                ctx.ok(
                    &format!("lambda_{}(L̄)^2 <= lambda_{}(L)^2", i + 1, i + 2),
                    lam_bar[i] <= lam[i + 1],
                    &lam[i + 1],
                    &lam_bar[i],
                );
            }
            let r = l.lll_reduce();
            let rv = r.shortest_vector()?;
            let vv = r.vector(&rv);
            for (i, w) in r.basis().iter_rows().enumerate() {
                let projected = project_orthogonal(w, &vv);
                let got: Rational = projected.iter().map(|x| x * x).sum();
                let want = oracle.projected_norm(w, &vv);
                ctx.eq("projected norm", format_rational(&want), format_rational(&got));
                let full: Rational = w.iter().map(|x| x * x).sum();
                ctx.ok(&format!("|w̄_{}|^2 <= |w_{}|^2", i + 1, i + 1), got <= full, &full, &got);
            }
            ctx.ok("v is nonzero", !v.iter().all(Zero::is_zero), "nonzero", "zero");
        }
        Check::Scale { l, d, h2 } => {
            let budget = HeightBudget::from_h_squared(h2.clone())?;
            let base = enumerate_primitive(l, *d, &budget, co)?.count;
            for c in [Rational::from_integer(2.into()), Rational::new(1.into(), 3.into())] {
                let reference = oracle.scaled_count(l, *d, &budget, &c, co)?;
                ctx.eq(&format!("P(cL, d, c^d H) = P(L, d, H) at c = {}", format_rational(&c)), reference, base);
            }
        }
    }
    Ok(())
}
