//! Lattice sources: JSON files and named generators.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use grasscount_core::exact::parse_rational;
use grasscount_core::{IntegerMatrix, Lattice, Rational, RationalMatrix};
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Resampling stops after this many singular draws.
const MAX_DRAWS: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LatticeSource {
    Identity(usize),
    Diag(Vec<Rational>),
    Random { n: usize, seed: u64, bound: i64 },
    File(PathBuf),
}

impl LatticeSource {
    pub fn build(&self) -> Result<Lattice> {
        match self {
            LatticeSource::Identity(n) => Ok(Lattice::identity(*n)?),
            LatticeSource::Diag(entries) => Ok(Lattice::diagonal(entries)?),
            LatticeSource::Random { n, seed, bound } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                random_integer_lattice(&mut rng, *n, *bound)
            }
            LatticeSource::File(path) => {
                let text = std::fs::read_to_string(path)?;
                Ok(grasscount_core::json::lattice_from_str(&text)?)
            }
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            LatticeSource::Random { seed, .. } => Some(*seed),
            _ => None,
        }
    }
}

fn bad(s: &str, why: &str) -> Error {
    Error::Config(format!("lattice source {s:?}: {why}"))
}

impl FromStr for LatticeSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("identity:") {
            let n: usize = rest.parse().map_err(|_| bad(s, "expected identity:n"))?;
            if n == 0 {
                return Err(bad(s, "n must be positive"));
            }
            return Ok(LatticeSource::Identity(n));
        }
        if let Some(rest) = s.strip_prefix("diag:") {
            let entries = rest
                .split(',')
                .map(|x| parse_rational(x.trim()))
                .collect::<grasscount_core::Result<Vec<_>>>()
                .map_err(|e| bad(s, &e.to_string()))?;
            if entries.iter().any(|x| x.numer().sign() == num_bigint::Sign::NoSign) {
                return Err(bad(s, "diagonal entries must be nonzero"));
            }
            return Ok(LatticeSource::Diag(entries));
        }
        if let Some(rest) = s.strip_prefix("random:") {
            let parts: Vec<&str> = rest.split(':').collect();
            if parts.len() != 3 {
                return Err(bad(s, "expected random:n:seed:entry_bound"));
            }
            let n: usize = parts[0].parse().map_err(|_| bad(s, "bad n"))?;
            let seed: u64 = parts[1].parse().map_err(|_| bad(s, "bad seed"))?;
            let bound: i64 = parts[2].parse().map_err(|_| bad(s, "bad entry bound"))?;
            if n == 0 || bound < 1 {
                return Err(bad(s, "need n >= 1 and entry_bound >= 1"));
            }
            return Ok(LatticeSource::Random { n, seed, bound });
        }
        if s.is_empty() {
            return Err(bad(s, "empty"));
        }
        Ok(LatticeSource::File(PathBuf::from(s)))
    }
}

impl fmt::Display for LatticeSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LatticeSource::Identity(n) => write!(f, "identity:{n}"),
            LatticeSource::Diag(e) => {
                let parts: Vec<String> = e.iter().map(grasscount_core::exact::format_rational).collect();
                write!(f, "diag:{}", parts.join(","))
            }
            LatticeSource::Random { n, seed, bound } => write!(f, "random:{n}:{seed}:{bound}"),
            LatticeSource::File(p) => write!(f, "{}", p.display()),
        }
    }
}

/// Integer basis with entries uniform in `[-bound, bound]`, redrawn until
/// it has full rank.
pub fn random_integer_lattice<R: Rng>(rng: &mut R, n: usize, bound: i64) -> Result<Lattice> {
    for _ in 0..MAX_DRAWS {
        let rows: Vec<Vec<BigInt>> =
            (0..n).map(|_| (0..n).map(|_| BigInt::from(rng.gen_range(-bound..=bound))).collect()).collect();
        let m = IntegerMatrix::from_rows(&rows)?;
        if m.rank() == n {
            return Ok(Lattice::from_integer_basis(&m)?);
        }
    }
    Err(Error::Config(format!("no full-rank {n}x{n} basis with entries in [-{bound}, {bound}]")))
}

/// As `random_integer_lattice`, with each row divided by a denominator in `1..=max_den`.
pub fn random_rational_lattice<R: Rng>(rng: &mut R, n: usize, bound: i64, max_den: i64) -> Result<Lattice> {
    for _ in 0..MAX_DRAWS {
        let rows: Vec<Vec<Rational>> = (0..n)
            .map(|_| {
                let den = BigInt::from(rng.gen_range(1..=max_den));
                (0..n)
                    .map(|_| Rational::new(BigInt::from(rng.gen_range(-bound..=bound)), den.clone()))
                    .collect()
            })
            .collect();
        let m = RationalMatrix::from_rows(&rows)?;
        if m.rank() == n {
            return Ok(Lattice::new(m)?);
        }
    }
    Err(Error::Config(format!("no full-rank rational {n}x{n} basis")))
}
