use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use grasscount_core::arithmetic::{hecke_count, hecke_reps};
use grasscount_core::asymptotics::{a_const, b_exp, c_const, Precision};
use grasscount_core::counting::{
    count_all, count_avoiding, count_flags, enumerate_primitive, CountOptions, HeightBudget, Variant,
};
use grasscount_core::exact::format_rational;
use grasscount_core::{IntegerMatrix, Limits};
use grasscount_harness::emit::emit;
use grasscount_harness::{verify, Error, Format, LatticeSource, Result, SweepConfig};
use num_bigint::BigInt;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "grasscount", version, about = "Exact sublattice counts and asymptotic checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Count rank-d sublattices of bounded determinant.
    Count {
        /// identity:n, diag:a,b,..., random:n:seed:bound, or a lattice JSON file.
        #[arg(long)]
        lattice: String,
        #[arg(long)]
        d: usize,
        /// Squared height budget, as an integer or p/q.
        #[arg(long)]
        h2: String,
        #[arg(long, default_value = "primitive")]
        variant: String,
        /// Smaller flag rank, for --variant flags.
        #[arg(long)]
        e: Option<usize>,
        #[arg(long)]
        generic_only: bool,
        /// Sublattice to avoid, as JSON rows of coordinates.
        #[arg(long)]
        avoid: Option<String>,
        /// Include the sublattices themselves in the output.
        #[arg(long)]
        list: bool,
    },
    /// Print a(n,d), b(n,d) and c(n,d).
    Constants {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
    },
    /// Hecke coset representatives for diag(1, ..., 1, k).
    Hecke {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        k: u64,
        #[arg(long)]
        list: bool,
    },
    /// Run a budget-ladder sweep described by a JSON config.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's output path.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Overrides the config's format (csv or json).
        #[arg(long)]
        format: Option<String>,
    },
    /// Run identity checks on seeded random instances.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

fn print(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("serializable"));
}

fn parse_rows(text: &str) -> Result<IntegerMatrix> {
    let rows: Vec<Vec<i64>> = serde_json::from_str(text)?;
    let rows: Vec<Vec<BigInt>> = rows.into_iter().map(|r| r.into_iter().map(BigInt::from).collect()).collect();
    Ok(IntegerMatrix::from_rows(&rows)?)
}

#[allow(clippy::too_many_arguments)]
fn count(
    lattice: &str,
    d: usize,
    h2: &str,
    variant: &str,
    e: Option<usize>,
    generic_only: bool,
    avoid: Option<&str>,
    list: bool,
) -> Result<Value> {
    let l = lattice.parse::<LatticeSource>()?.build()?;
    let budget: HeightBudget = h2.parse()?;
    let opts = CountOptions::default().with_limits(Limits::from_env()).with_materialize(list);
    let result = match variant.parse::<Variant>()? {
        Variant::Primitive => enumerate_primitive(&l, d, &budget, &opts)?,
        Variant::All => count_all(&l, d, &budget, &opts)?,
        Variant::Avoiding => {
            let rows = avoid.ok_or_else(|| Error::Config("--variant avoiding needs --avoid".into()))?;
            let s = l.sublattice(&parse_rows(rows)?)?;
            count_avoiding(&l, d, &budget, &s, &opts)?
        }
        Variant::Flags => {
            let e = e.ok_or_else(|| Error::Config("--variant flags needs --e".into()))?;
            let f = count_flags(&l, e, d, &budget, generic_only, &opts)?;
            return Ok(json!({ "count": f.count, "e": f.e, "d": f.d, "generic_only": f.generic_only,
                              "h_squared": budget.to_string() }));
        }
    };
    Ok(result.to_json()?)
}

fn constants(n: usize, d: usize) -> Result<Value> {
    let p = Precision::from_env();
    Ok(json!({
        "n": n,
        "d": d,
        "a": a_const(n, d, p)?.to_decimal_string(),
        "b": format_rational(&b_exp(n, d)?),
        "c": c_const(n, d, p)?.to_decimal_string(),
        "precision_digits": p.decimal_digits(),
    }))
}

fn hecke(d: usize, k: u64, list: bool) -> Result<Value> {
    let mut v = json!({ "d": d, "k": k, "count": hecke_count(d as u32, k).to_string() });
    if list {
        v["reps"] = serde_json::to_value(hecke_reps(d, k)?)?;
    }
    Ok(v)
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Count { lattice, d, h2, variant, e, generic_only, avoid, list } => {
            print(&count(&lattice, d, &h2, &variant, e, generic_only, avoid.as_deref(), list)?);
        }
        Command::Constants { n, d } => print(&constants(n, d)?),
        Command::Hecke { d, k, list } => print(&hecke(d, k, list)?),
        Command::Sweep { config, output, format } => {
            let text = std::fs::read_to_string(&config)?;
            let mut cfg = SweepConfig::from_json(&text)?;
            if let Some(f) = format {
                cfg.format = f.parse::<Format>()?;
            }
            if output.is_some() {
                cfg.output = output;
            }
            let report = grasscount_harness::run_sweep(&cfg)?;
            emit(&report, cfg.format, cfg.output.as_deref())?;
        }
        Command::Verify { suite, seed } => {
            let report = verify(&suite, seed)?;
            print(&serde_json::to_value(&report)?);
            return Ok(report.passed);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { 2 } else { 1 })
        }
    }
}
