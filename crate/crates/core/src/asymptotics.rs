//! Main-term constants and predictions for sublattice counts.
//!
//! Constants are evaluated in multiprecision floating point; the predictions
//! themselves are reported as `f64`.

use std::fmt;
use std::sync::Mutex;

use astro_float::{BigFloat, Consts, Radix, RoundingMode};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed};
use serde::Serialize;

use crate::counting::{enumerate_primitive, CountOptions, HeightBudget};
use crate::error::{Error, Result};
use crate::exact::{format_rational, rational_to_f64, Rational, SquaredMagnitude};
use crate::lattice::Lattice;
use crate::limits::{precision_digits_from_env, DEFAULT_PRECISION_DIGITS};

const RM: RoundingMode = RoundingMode::ToEven;

/// Working precision in significant decimal digits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Precision {
    digits: usize,
}

impl Default for Precision {
    fn default() -> Self {
        Precision { digits: DEFAULT_PRECISION_DIGITS }
    }
}

impl Precision {
    pub fn digits(digits: usize) -> Self {
        Precision { digits: digits.max(1) }
    }

    /// Reads `GRASSCOUNT_PRECISION`.
    pub fn from_env() -> Self {
        Precision::digits(precision_digits_from_env())
    }

    pub fn decimal_digits(&self) -> usize {
        self.digits
    }

    fn min_with(self, other: Precision) -> Precision {
        Precision { digits: self.digits.min(other.digits) }
    }

    // Mantissa bits, with guard bits for the accumulated rounding.
    fn bits(&self) -> usize {
        let bits = (self.digits as f64 * std::f64::consts::LOG2_10).ceil() as usize + 64;
        bits.div_ceil(64) * 64
    }
}

/// A multiprecision real tagged with the precision it was computed at.
#[derive(Debug)]
pub struct Real {
    value: BigFloat,
    precision: Precision,
}

impl Clone for Real {
    fn clone(&self) -> Self {
        Real { value: self.value.clone(), precision: self.precision }
    }
}

impl Real {
    fn new(value: BigFloat, precision: Precision) -> Self {
        Real { value, precision }
    }

    /// Parses a decimal literal such as `3.14159` or `-1.2e-5`.
    pub fn from_decimal(s: &str, precision: Precision) -> Result<Real> {
        let mut cc = consts();
        let v = BigFloat::parse(s.trim(), Radix::Dec, precision.bits(), RM, &mut cc);
        if v.is_nan() {
            return Err(Error::Parse(format!("not a decimal number: {s:?}")));
        }
        Ok(Real::new(v, precision))
    }

    pub fn as_bigfloat(&self) -> &BigFloat {
        &self.value
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    pub fn to_f64(&self) -> f64 {
        self.raw_decimal().parse().unwrap_or(f64::NAN)
    }

    /// Decimal string rounded to the working precision.
    pub fn to_decimal_string(&self) -> String {
        decimal_string(&self.raw_decimal(), self.precision.digits)
    }

    pub fn mul(&self, other: &Real) -> Real {
        let precision = self.precision.min_with(other.precision);
        Real::new(self.value.mul(&other.value, precision.bits(), RM), precision)
    }

    pub fn div(&self, other: &Real) -> Real {
        let precision = self.precision.min_with(other.precision);
        Real::new(self.value.div(&other.value, precision.bits(), RM), precision)
    }

    /// `|self - other| <= tol * max(1, |other|)`.
    pub fn approx_eq(&self, other: &Real, tol: f64) -> bool {
        let p = self.precision.bits().max(other.precision.bits());
        let diff = self.value.sub(&other.value, p, RM).abs();
        let scale = other.value.abs().max(&BigFloat::from_u64(1, p));
        let bound = scale.mul(&BigFloat::from_f64(tol, p), p, RM);
        diff.cmp(&bound).is_some_and(|c| c <= 0)
    }

    fn raw_decimal(&self) -> String {
        let mut cc = consts();
        self.value.format(Radix::Dec, RM, &mut cc).unwrap_or_else(|_| "NaN".into())
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal_string())
    }
}

impl Serialize for Real {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_decimal_string())
    }
}

fn consts() -> Consts {
    Consts::new().expect("astro-float constant cache")
}

// Rounds astro-float's `d.ddd…e±x` output to `digits` significant digits and
// prints it positionally when the exponent is moderate.
fn decimal_string(raw: &str, digits: usize) -> String {
    let (sign, body) = match raw.strip_prefix('-') {
        Some(rest) => ("-", rest),
        None => ("", raw),
    };
    let (mantissa, exp) = match body.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i64>().unwrap_or(0)),
        None => (body, 0),
    };
    let all: Vec<u8> = mantissa.bytes().filter(u8::is_ascii_digit).map(|b| b - b'0').collect();
    if all.iter().all(|&d| d == 0) {
        return "0".into();
    }
    let lead = mantissa.find('.').unwrap_or(mantissa.len()) as i64;
    let first = all.iter().position(|&d| d != 0).unwrap();
    let mut exp = exp + lead - 1 - first as i64;
    let mut kept: Vec<u8> = all[first..].iter().copied().take(digits).collect();
    if all.len() > first + digits && all[first + digits] >= 5 {
        let mut i = kept.len();
        loop {
            if i == 0 {
                kept.insert(0, 1);
                kept.pop();
                exp += 1;
                break;
            }
            i -= 1;
            if kept[i] == 9 {
                kept[i] = 0;
            } else {
                kept[i] += 1;
                break;
            }
        }
    }
    while kept.len() > 1 && kept.last() == Some(&0) {
        kept.pop();
    }
    let text: String = kept.iter().map(|d| char::from(b'0' + d)).collect();
    let n = text.len() as i64;
    if exp >= n - 1 && exp < 40 {
        format!("{sign}{text}{}", "0".repeat((exp - n + 1) as usize))
    } else if (0..n - 1).contains(&exp) {
        let (a, b) = text.split_at(exp as usize + 1);
        format!("{sign}{a}.{b}")
    } else if (-8..0).contains(&exp) {
        format!("{sign}0.{}{text}", "0".repeat((-exp - 1) as usize))
    } else if n == 1 {
        format!("{sign}{text}e{exp}")
    } else {
        format!("{sign}{}.{}e{exp}", &text[..1], &text[1..])
    }
}

fn big(n: &BigInt, p: usize, cc: &mut Consts) -> BigFloat {
    match i64::try_from(n) {
        Ok(v) => BigFloat::from_i64(v, p),
        Err(_) => BigFloat::parse(&n.to_string(), Radix::Dec, p, RM, cc),
    }
}

fn rational(q: &BigRational, p: usize, cc: &mut Consts) -> BigFloat {
    big(q.numer(), p, cc).div(&big(q.denom(), p, cc), p, RM)
}

fn factorial(k: u64, p: usize) -> BigFloat {
    (2..=k).fold(BigFloat::from_u64(1, p), |acc, i| acc.mul(&BigFloat::from_u64(i, p), p, RM))
}

fn ball_volume_raw(i: usize, p: usize, cc: &mut Consts) -> BigFloat {
    let k = (i / 2) as u64;
    let pik = cc.pi(p, RM).powi(k as usize, p, RM);
    if i.is_multiple_of(2) {
        pik.div(&factorial(k, p), p, RM)
    } else {
        // pi^k 2^(k+1) / (2k+1)!!
        let odd = (0..=k).fold(BigFloat::from_u64(1, p), |acc, j| acc.mul(&BigFloat::from_u64(2 * j + 1, p), p, RM));
        let two = BigFloat::from_u64(2, p).powi(k as usize + 1, p, RM);
        pik.mul(&two, p, RM).div(&odd, p, RM)
    }
}

/// Volume of the unit ball in ℝ^i.
pub fn ball_volume(i: usize, precision: Precision) -> Real {
    let p = precision.bits();
    let mut cc = consts();
    Real::new(ball_volume_raw(i, p, &mut cc), precision)
}

static BERNOULLI: Mutex<Vec<BigRational>> = Mutex::new(Vec::new());

// B_0, B_2, ..., B_{2m}, cached across calls.
fn bernoulli_even(m: usize) -> Vec<BigRational> {
    let mut cache = BERNOULLI.lock().unwrap_or_else(|e| e.into_inner());
    if cache.len() <= m {
        *cache = akiyama_tanigawa(m);
    }
    cache[..=m].to_vec()
}

fn akiyama_tanigawa(m: usize) -> Vec<BigRational> {
    let len = 2 * m + 1;
    let mut a: Vec<BigRational> = Vec::with_capacity(len);
    let mut out = Vec::with_capacity(m + 1);
    for k in 0..len {
        a.push(BigRational::new(BigInt::one(), BigInt::from(k + 1)));
        for j in (1..=k).rev() {
            let diff = &a[j - 1] - &a[j];
            a[j - 1] = diff * BigRational::from_integer(BigInt::from(j));
        }
        if k % 2 == 0 {
            out.push(a[0].clone());
        }
    }
    out
}

fn zeta_raw(s: u32, precision: Precision, cc: &mut Consts) -> BigFloat {
    let p = precision.bits();
    if s == 1 {
        return BigFloat::from_u64(1, p);
    }
    // Euler–Maclaurin with cutoff N and m correction terms; the remainder is
    // below (2 pi N)^(-2m) (2m + s)! / (s - 1)!, far under the working precision.
    let n = precision.digits.max(20) as u64;
    let m = precision.digits / 2 + 8;
    let mut sum = BigFloat::from_u64(0, p);
    for k in 1..n {
        let term = BigFloat::from_u64(k, p).powi(s as usize, p, RM).reciprocal(p, RM);
        sum = sum.add(&term, p, RM);
    }
    let nf = BigFloat::from_u64(n, p);
    let n_s = nf.powi(s as usize, p, RM).reciprocal(p, RM);
    let integral = n_s.mul(&nf, p, RM).div(&BigFloat::from_u64(u64::from(s) - 1, p), p, RM);
    sum = sum.add(&integral, p, RM).add(&n_s.div(&BigFloat::from_u64(2, p), p, RM), p, RM);
    let bern = bernoulli_even(m);
    let n2 = nf.mul(&nf, p, RM);
    // rising = s (s+1) ... (s + 2j - 2), power = N^(-s - 2j + 1), fact = (2j)!
    let mut rising = BigRational::from_integer(BigInt::from(s));
    let mut power = n_s.div(&nf, p, RM);
    let mut fact = BigInt::from(2);
    for (j, b) in bern.iter().enumerate().skip(1) {
        let coeff = b * &rising / BigRational::from_integer(fact.clone());
        sum = sum.add(&rational(&coeff, p, cc).mul(&power, p, RM), p, RM);
        let j = j as u64;
        rising *= BigRational::from_integer(BigInt::from(u64::from(s) + 2 * j - 1) * BigInt::from(u64::from(s) + 2 * j));
        fact *= BigInt::from((2 * j + 1) * (2 * j + 2));
        power = power.div(&n2, p, RM);
    }
    sum
}

/// Riemann zeta at an integer `s ≥ 1`, with the convention ζ(1) = 1.
pub fn zeta(s: u32, precision: Precision) -> Result<Real> {
    if s < 1 {
        return Err(Error::Domain(format!("zeta({s}) needs s >= 1")));
    }
    let mut cc = consts();
    Ok(Real::new(zeta_raw(s, precision, &mut cc), precision))
}

fn check_nd(n: usize, d: usize) -> Result<()> {
    if d == 0 || d >= n {
        return Err(Error::argument(format!("need 1 <= d < n, got n = {n}, d = {d}")));
    }
    Ok(())
}

fn binomial(n: usize, k: usize) -> BigInt {
    (0..k).fold(BigInt::one(), |acc, i| acc * BigInt::from(n - i) / BigInt::from(i + 1))
}

fn a_raw(n: usize, d: usize, precision: Precision, cc: &mut Consts) -> BigFloat {
    let p = precision.bits();
    let mut acc = big(&binomial(n, d), p, cc).div(&BigFloat::from_u64(n as u64, p), p, RM);
    for i in 1..=d {
        let top = ball_volume_raw(n - i + 1, p, cc).mul(&zeta_raw(i as u32, precision, cc), p, RM);
        let bottom = ball_volume_raw(i, p, cc).mul(&zeta_raw((n - i + 1) as u32, precision, cc), p, RM);
        acc = acc.mul(&top, p, RM).div(&bottom, p, RM);
    }
    acc
}

/// Leading constant for primitive sublattices of rank `d` in rank `n`.
pub fn a_const(n: usize, d: usize, precision: Precision) -> Result<Real> {
    check_nd(n, d)?;
    let mut cc = consts();
    Ok(Real::new(a_raw(n, d, precision, &mut cc), precision))
}

/// Error exponent `max(1/d, 1/(n - d))`.
pub fn b_exp(n: usize, d: usize) -> Result<Rational> {
    check_nd(n, d)?;
    let small = d.min(n - d);
    Ok(BigRational::new(BigInt::one(), BigInt::from(small)))
}

/// Leading constant for all (not necessarily primitive) sublattices.
pub fn c_const(n: usize, d: usize, precision: Precision) -> Result<Real> {
    check_nd(n, d)?;
    let p = precision.bits();
    let mut cc = consts();
    let mut acc = a_raw(n, d, precision, &mut cc);
    for i in 1..=d {
        acc = acc.mul(&zeta_raw((n - i + 1) as u32, precision, &mut cc), p, RM);
    }
    Ok(Real::new(acc, precision))
}

fn check_positive(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::argument(format!("{name} must be positive and finite, got {x}")))
    }
}

/// Main term `a(n,d) H^n / (det L)^d`.
pub fn predict_p(n: usize, d: usize, det_l: f64, h: f64) -> Result<f64> {
    check_positive("det L", det_l)?;
    if !(h.is_finite() && h >= 0.0) {
        return Err(Error::argument(format!("H must be finite and non-negative, got {h}")));
    }
    let a = a_const(n, d, Precision::default())?.to_f64();
    Ok(a * h.powi(n as i32) / det_l.powi(d as i32))
}

/// Shape of the leading error term,
/// `H^(n-b) / ((det L)^(d-b) (det L^(|-d))^b)` with `b = b(n,d)`.
pub fn predict_leading_error(l: &Lattice, d: usize, h: f64) -> Result<f64> {
    let n = l.rank();
    check_nd(n, d)?;
    if !(h.is_finite() && h >= 0.0) {
        return Err(Error::argument(format!("H must be finite and non-negative, got {h}")));
    }
    let b = rational_to_f64(&b_exp(n, d)?);
    let det = l.det_squared().sqrt_f64();
    let inner = l.minima_filtration(d)?.det_squared().sqrt_f64();
    Ok(h.powf(n as f64 - b) / (det.powf(d as f64 - b) * inner.powf(b)))
}

/// Smallest `det²` of a rank-`e` sublattice of `l`.
///
/// Budgets start at `λ₁^{2e}` and double, never passing the determinant of
/// the rank-`e` minima filtration piece, which is always attained.
pub fn epsilon_min(l: &Lattice, e: usize) -> Result<SquaredMagnitude> {
    epsilon_min_with(l, e, &CountOptions::default())
}

pub fn epsilon_min_with(l: &Lattice, e: usize, opts: &CountOptions) -> Result<SquaredMagnitude> {
    let n = l.rank();
    if e == 0 || e > n {
        return Err(Error::argument(format!("need 1 <= e <= {n}, got {e}")));
    }
    if e == n {
        return Ok(l.det_squared().clone());
    }
    let profile = l.successive_minima_with(&opts.limits)?;
    let ceiling = l.minima_filtration_with(n - e, &opts.limits)?.det_squared().into_value();
    let start: Rational = profile.lambda_squared[0].value().clone().pow(e as u32);
    let mut budget = start.min(ceiling.clone());
    let opts = opts.clone().with_materialize(true);
    loop {
        let found = enumerate_primitive(l, e, &HeightBudget::from_h_squared(budget.clone())?, &opts)?;
        if let Some(best) = found.sublattices.iter().flatten().map(|s| s.det_squared()).min() {
            return Ok(best);
        }
        if budget >= ceiling {
            return Err(Error::Capacity("no sublattice found below the filtration determinant".into()));
        }
        budget = (budget * BigRational::from_integer(BigInt::from(2))).min(ceiling.clone());
    }
}

/// Constant `a(n,d) a(d,e) n / (n - e)` of the flag main term.
pub fn flag_constant(n: usize, e: usize, d: usize, precision: Precision) -> Result<Real> {
    check_flag(n, e, d)?;
    let p = precision.bits();
    let mut cc = consts();
    let v = a_raw(n, d, precision, &mut cc)
        .mul(&a_raw(d, e, precision, &mut cc), p, RM)
        .mul(&BigFloat::from_u64(n as u64, p), p, RM)
        .div(&BigFloat::from_u64((n - e) as u64, p), p, RM);
    Ok(Real::new(v, precision))
}

fn check_flag(n: usize, e: usize, d: usize) -> Result<()> {
    if !(1 <= e && e < d && d < n) {
        return Err(Error::argument(format!("need 1 <= e < d < n, got n = {n}, e = {e}, d = {d}")));
    }
    Ok(())
}

/// Main term for flags `S_e ⊂ S_d ⊂ L` of height at most `h`:
/// `a(n,d) a(d,e) n/(n-e) · H/(det L)^d · log(H / (ε_e^d ε_d^(n-e)))`.
pub fn predict_flag_main(l: &Lattice, e: usize, d: usize, h: f64) -> Result<f64> {
    FlagModel::new(l, e, d, Precision::default())?.main_term(h)
}

/// Constants governing `P(L, d, H)` and `N(L, d, H)` for rank `n`.
#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticModel {
    pub n: usize,
    pub d: usize,
    pub a: Real,
    #[serde(serialize_with = "ser_rational")]
    pub b: Rational,
    pub c: Real,
    /// H-degree `n - b` of the leading error term.
    #[serde(serialize_with = "ser_rational")]
    pub error_degree: Rational,
    /// For `d = n - 1` the secondary term of the all-sublattice count has
    /// degree `n - 1 + η` for every `η > 0`; no numeric value is attached.
    pub all_count_secondary_has_eta: bool,
}

fn ser_rational<S: serde::Serializer>(q: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(q))
}

impl AsymptoticModel {
    pub fn new(n: usize, d: usize, precision: Precision) -> Result<Self> {
        let b = b_exp(n, d)?;
        Ok(AsymptoticModel {
            n,
            d,
            a: a_const(n, d, precision)?,
            c: c_const(n, d, precision)?,
            error_degree: BigRational::from_integer(BigInt::from(n)) - &b,
            b,
            all_count_secondary_has_eta: d + 1 == n,
        })
    }

    pub fn main_term(&self, det_l: f64, h: f64) -> Result<f64> {
        check_positive("det L", det_l)?;
        Ok(self.a.to_f64() * h.powi(self.n as i32) / det_l.powi(self.d as i32))
    }

    pub fn main_term_all(&self, det_l: f64, h: f64) -> Result<f64> {
        check_positive("det L", det_l)?;
        Ok(self.c.to_f64() * h.powi(self.n as i32) / det_l.powi(self.d as i32))
    }
}

/// Flag-count main term data for a fixed lattice.
#[derive(Debug, Clone, Serialize)]
pub struct FlagModel {
    pub n: usize,
    pub d: usize,
    pub e: usize,
    pub a_flag: Real,
    #[serde(serialize_with = "ser_squared")]
    pub epsilon_e: SquaredMagnitude,
    #[serde(serialize_with = "ser_squared")]
    pub epsilon_d: SquaredMagnitude,
    #[serde(serialize_with = "ser_squared")]
    pub det_squared: SquaredMagnitude,
    /// Candidates for the second largest H-degree; the largest is 1.
    #[serde(serialize_with = "ser_rationals")]
    pub secondary_degrees: [Rational; 3],
}

fn ser_squared<S: serde::Serializer>(q: &SquaredMagnitude, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(q.value()))
}

fn ser_rationals<S: serde::Serializer>(qs: &[Rational; 3], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(3))?;
    for q in qs {
        seq.serialize_element(&format_rational(q))?;
    }
    seq.end()
}

impl FlagModel {
    pub fn new(l: &Lattice, e: usize, d: usize, precision: Precision) -> Result<Self> {
        let n = l.rank();
        check_flag(n, e, d)?;
        let int = |v: usize| BigRational::from_integer(BigInt::from(v));
        let one = BigRational::one();
        let bnd = b_exp(n, d)?;
        let bde = b_exp(d, e)?;
        let secondary_degrees = [
            &one - &bnd / int(n),
            &one - &bde * int(n - e) / int(n * d),
            &one - (&one - &bde * int(2) / int(d) + (&one - &bde) / int(n - e)) / int(n),
        ];
        Ok(FlagModel {
            n,
            d,
            e,
            a_flag: flag_constant(n, e, d, precision)?,
            epsilon_e: epsilon_min(l, e)?,
            epsilon_d: epsilon_min(l, d)?,
            det_squared: l.det_squared().clone(),
            secondary_degrees,
        })
    }

    /// `(ε_e^d ε_d^(n-e))²`, the squared cutoff below which the log factor is negative.
    pub fn cutoff_squared(&self) -> Rational {
        self.epsilon_e.value().clone().pow(self.d as u32) * self.epsilon_d.value().clone().pow((self.n - self.e) as u32)
    }

    /// Main term at height `h`. Exactly zero at the cutoff; a domain error below it.
    pub fn main_term(&self, h: f64) -> Result<f64> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::Domain(format!("H must be positive and finite, got {h}")));
        }
        let hq = BigRational::from_float(h).expect("finite");
        let h2 = &hq * &hq;
        let cut = self.cutoff_squared();
        match h2.cmp(&cut) {
            std::cmp::Ordering::Less => {
                return Err(Error::Domain(format!("H = {h} is below the cutoff ε_e^d ε_d^(n-e)")));
            }
            std::cmp::Ordering::Equal => return Ok(0.0),
            std::cmp::Ordering::Greater => {}
        }
        let log = h.ln() - 0.5 * ln_rational(&cut);
        let det = self.det_squared.sqrt_f64();
        Ok(self.a_flag.to_f64() * h / det.powi(self.d as i32) * log.max(0.0))
    }
}

// ln of a positive rational without overflowing f64 on huge numerators.
fn ln_rational(q: &Rational) -> f64 {
    fn ln_int(n: &BigInt) -> f64 {
        let bits = n.bits();
        if bits < 1000 {
            return n.to_string().parse::<f64>().unwrap_or(f64::INFINITY).ln();
        }
        let shift = bits - 900;
        let top: BigInt = n >> shift;
        top.to_string().parse::<f64>().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
    }
    debug_assert!(q.is_positive());
    ln_int(q.numer()) - ln_int(q.denom())
}
