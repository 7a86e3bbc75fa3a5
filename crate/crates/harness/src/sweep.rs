//! Budget-ladder sweeps comparing exact counts against the main terms.

use std::path::PathBuf;
use std::time::Instant;

use grasscount_core::asymptotics::{
    a_const, b_exp, c_const, flag_constant, predict_leading_error, AsymptoticModel, FlagModel, Precision,
};
use grasscount_core::counting::{
    count_all, count_avoiding, count_flags, enumerate_primitive, CountOptions, HeightBudget, Variant,
};
use grasscount_core::exact::{format_rational, parse_rational, rational_to_f64};
use grasscount_core::{IntegerMatrix, Lattice, Limits, Rational};
use num_bigint::BigInt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::generate::LatticeSource;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Config(format!("unknown format {other:?}"))),
        }
    }
}

/// On-disk form of a sweep config.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigDoc {
    lattice: String,
    d: usize,
    #[serde(default)]
    e: Option<usize>,
    ladder: Vec<LadderStep>,
    #[serde(default)]
    variant: Option<String>,
    #[serde(default)]
    avoid: Option<Vec<Vec<i64>>>,
    #[serde(default)]
    generic_only: bool,
    #[serde(default)]
    format: Format,
    #[serde(default)]
    output: Option<PathBuf>,
    #[serde(default)]
    parallelism: Option<usize>,
    #[serde(default)]
    timing: bool,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
enum LadderStep {
    Int(u64),
    Text(String),
}

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub lattice: LatticeSource,
    pub d: usize,
    /// Smaller rank of the flag type; only used by `Variant::Flags`.
    pub e: Option<usize>,
    /// Squared height budgets, strictly increasing.
    pub ladder: Vec<Rational>,
    pub variant: Variant,
    /// Coordinates of the sublattice to avoid (`Variant::Avoiding`).
    pub avoid: Option<Vec<Vec<i64>>>,
    pub generic_only: bool,
    pub format: Format,
    pub output: Option<PathBuf>,
    /// Worker threads; `None` uses the global pool.
    pub parallelism: Option<usize>,
    /// Record wall time per row. Off by default so reports are reproducible.
    pub timing: bool,
}

impl SweepConfig {
    pub fn new(lattice: LatticeSource, d: usize, ladder: Vec<Rational>) -> Self {
        SweepConfig {
            lattice,
            d,
            e: None,
            ladder,
            variant: Variant::Primitive,
            avoid: None,
            generic_only: false,
            format: Format::Csv,
            output: None,
            parallelism: None,
            timing: false,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ConfigDoc = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let ladder = doc
            .ladder
            .into_iter()
            .map(|s| match s {
                LadderStep::Int(i) => Ok(Rational::from_integer(BigInt::from(i))),
                LadderStep::Text(t) => parse_rational(&t).map_err(Error::from),
            })
            .collect::<Result<Vec<_>>>()?;
        let variant = match doc.variant {
            Some(v) => v.parse()?,
            None if doc.e.is_some() => Variant::Flags,
            None => Variant::Primitive,
        };
        let cfg = SweepConfig {
            lattice: doc.lattice.parse()?,
            d: doc.d,
            e: doc.e,
            ladder,
            variant,
            avoid: doc.avoid,
            generic_only: doc.generic_only,
            format: doc.format,
            output: doc.output,
            parallelism: doc.parallelism,
            timing: doc.timing,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks everything that does not require building the lattice.
    pub fn validate(&self) -> Result<()> {
        for w in self.ladder.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::Config(format!(
                    "ladder must be strictly increasing ({} then {})",
                    format_rational(&w[0]),
                    format_rational(&w[1])
                )));
            }
        }
        if self.ladder.first().is_some_and(|h| h < &Rational::from_integer(0.into())) {
            return Err(Error::Config("ladder entries must be nonnegative".into()));
        }
        if self.d == 0 {
            return Err(Error::Config("d must be positive".into()));
        }
        match self.variant {
            Variant::Flags => match self.e {
                Some(e) if e >= 1 && e < self.d => {}
                _ => return Err(Error::Config("flag sweeps need 1 <= e < d".into())),
            },
            Variant::Avoiding if self.avoid.is_none() => {
                return Err(Error::Config("variant \"avoiding\" needs an \"avoid\" coordinate matrix".into()))
            }
            _ => {}
        }
        if self.parallelism == Some(0) {
            return Err(Error::Config("parallelism must be positive".into()));
        }
        Ok(())
    }
}

fn ser_rational<S: Serializer>(q: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(q))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    #[serde(serialize_with = "ser_rational")]
    pub h2: Rational,
    pub count: Option<u64>,
    pub predicted: Option<f64>,
    pub ratio: Option<f64>,
    pub leading_error: Option<f64>,
    pub ms: Option<u64>,
    /// Reason the row was not computed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Metadata {
    pub source: String,
    pub lattice: Value,
    pub n: usize,
    pub d: usize,
    pub e: Option<usize>,
    pub variant: String,
    pub generic_only: bool,
    pub constants: Value,
    pub precision_digits: usize,
    pub version: String,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepReport {
    pub metadata: Metadata,
    pub rows: Vec<SweepRow>,
}

struct Prepared {
    lattice: Lattice,
    avoid: Option<grasscount_core::Sublattice>,
    model: Option<AsymptoticModel>,
    flag: Option<FlagModel>,
    opts: CountOptions,
}

impl Prepared {
    fn count(&self, cfg: &SweepConfig, budget: &HeightBudget) -> grasscount_core::Result<u64> {
        let l = &self.lattice;
        Ok(match cfg.variant {
            Variant::Primitive => enumerate_primitive(l, cfg.d, budget, &self.opts)?.count,
            Variant::All => count_all(l, cfg.d, budget, &self.opts)?.count,
            Variant::Avoiding => count_avoiding(l, cfg.d, budget, self.avoid.as_ref().expect("validated"), &self.opts)?.count,
            Variant::Flags => {
                count_flags(l, cfg.e.expect("validated"), cfg.d, budget, cfg.generic_only, &self.opts)?.count
            }
        })
    }

    fn predict(&self, cfg: &SweepConfig, h2: &Rational) -> (Option<f64>, Option<f64>) {
        let h = rational_to_f64(h2).sqrt();
        let det = self.lattice.det_squared().sqrt_f64();
        let n = self.lattice.rank();
        match cfg.variant {
            Variant::Primitive | Variant::Avoiding => {
                let main = self.model.as_ref().and_then(|m| m.main_term(det, h).ok());
                let err = if cfg.variant == Variant::Primitive {
                    predict_leading_error(&self.lattice, cfg.d, h).ok()
                } else {
                    None
                };
                (main, err)
            }
            Variant::All => {
                let main = self.model.as_ref().and_then(|m| m.main_term_all(det, h).ok());
                // Same leading error shape as the primitive count when d <= n - 2.
                let err = (cfg.d + 2 <= n).then(|| predict_leading_error(&self.lattice, cfg.d, h).ok()).flatten();
                (main, err)
            }
            Variant::Flags => (self.flag.as_ref().and_then(|f| f.main_term(h).ok()), None),
        }
    }
}

fn constants(cfg: &SweepConfig, n: usize, precision: Precision) -> Result<Value> {
    let d = cfg.d;
    let mut v = json!({
        "a": a_const(n, d, precision)?.to_decimal_string(),
        "b": format_rational(&b_exp(n, d)?),
        "c": c_const(n, d, precision)?.to_decimal_string(),
    });
    if let (Variant::Flags, Some(e)) = (cfg.variant, cfg.e) {
        v["flag"] = Value::from(flag_constant(n, e, d, precision)?.to_decimal_string());
    }
    Ok(v)
}

fn prepare(cfg: &SweepConfig, limits: Limits, precision: Precision) -> Result<(Prepared, Metadata)> {
    cfg.validate()?;
    let lattice = cfg.lattice.build()?;
    let n = lattice.rank();
    if cfg.d >= n {
        return Err(Error::Config(format!("d = {} must be below the lattice rank {n}", cfg.d)));
    }
    let avoid = match &cfg.avoid {
        Some(rows) => {
            let rows: Vec<Vec<BigInt>> = rows.iter().map(|r| r.iter().map(|&x| x.into()).collect()).collect();
            Some(lattice.sublattice(&IntegerMatrix::from_rows(&rows)?)?)
        }
        None => None,
    };
    let opts = CountOptions::default().with_limits(limits);
    let (model, flag) = match cfg.variant {
        Variant::Flags => (None, FlagModel::new(&lattice, cfg.e.expect("validated"), cfg.d, precision).ok()),
        _ => (Some(AsymptoticModel::new(n, cfg.d, precision)?), None),
    };
    let metadata = Metadata {
        source: cfg.lattice.to_string(),
        lattice: grasscount_core::json::lattice_to_value(&lattice),
        n,
        d: cfg.d,
        e: cfg.e.filter(|_| cfg.variant == Variant::Flags),
        variant: cfg.variant.to_string(),
        generic_only: cfg.generic_only,
        constants: constants(cfg, n, precision)?,
        precision_digits: precision.decimal_digits(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: cfg.lattice.seed(),
    };
    Ok((Prepared { lattice, avoid, model, flag, opts }, metadata))
}

fn run_row(p: &Prepared, cfg: &SweepConfig, h2: &Rational) -> Result<SweepRow> {
    let budget = HeightBudget::from_h_squared(h2.clone())?;
    let start = Instant::now();
    let counted = p.count(cfg, &budget);
    let ms = cfg.timing.then(|| start.elapsed().as_millis() as u64);
    let count = match counted {
        Ok(c) => c,
        Err(grasscount_core::Error::Capacity(msg)) => {
            return Ok(SweepRow {
                h2: h2.clone(),
                count: None,
                predicted: None,
                ratio: None,
                leading_error: None,
                ms,
                skipped: Some(msg),
            })
        }
        Err(e) => return Err(e.into()),
    };
    let (predicted, leading_error) = p.predict(cfg, h2);
    let ratio = predicted.filter(|&x| x > 0.0).map(|x| count as f64 / x);
    Ok(SweepRow { h2: h2.clone(), count: Some(count), predicted, ratio, leading_error, ms, skipped: None })
}

/// Runs the sweep with limits from the environment and the default precision.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepReport> {
    run_sweep_with(cfg, Limits::from_env(), Precision::from_env())
}

pub fn run_sweep_with(cfg: &SweepConfig, limits: Limits, precision: Precision) -> Result<SweepReport> {
    let (prepared, metadata) = prepare(cfg, limits, precision)?;
    let run = || -> Result<Vec<SweepRow>> { cfg.ladder.par_iter().map(|h2| run_row(&prepared, cfg, h2)).collect() };
    let rows = match cfg.parallelism {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?
            .install(run)?,
        None => run()?,
    };
    Ok(SweepReport { metadata, rows })
}
