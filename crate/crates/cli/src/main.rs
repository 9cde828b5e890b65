//! `twistfactor` command-line interface.
//!
//! Exit codes: 0 success, 1 usage or contract error, 2 the algorithm ran out
//! of budget.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde_json::{json, Map, Number, Value};

use twistfactor::arith::factor_small;
use twistfactor::census::{self, CensusError};
use twistfactor::oracle::{DirectOracle, FactoredOracle, PointCountOracle};
use twistfactor::reduction::{factor_completely, ReductionConfig, ReductionError};
use twistfactor::selftest;

#[derive(Parser, Debug)]
#[command(name = "twistfactor", version, about = "Factor squarefree integers with a point-counting oracle")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Completely factor a squarefree n.
    Factor {
        #[arg(value_parser = parse_natural)]
        n: BigUint,
        /// Multiplier bound D (default ceil((ln n)^2)).
        #[arg(long = "D", value_parser = parse_u64)]
        d_bound: Option<u64>,
        /// Largest twist parameter d (default 4 ceil((ln n)^2)).
        #[arg(long, value_parser = parse_u64)]
        max_d: Option<u64>,
        /// Curves per split (default ceil(k (ln n)^2)).
        #[arg(long, value_parser = parse_u64)]
        max_curves: Option<u64>,
        /// Constant k of the default curve budget.
        #[arg(long, default_value = "8")]
        k: f64,
        #[arg(long, env = "TWISTFACTOR_SEED", default_value = "0", value_parser = parse_u64)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = OracleKind::Factored)]
        oracle: OracleKind,
    },
    /// Write the trace census as CSV.
    Census {
        #[arg(long, value_parser = parse_u64)]
        pmin: u64,
        #[arg(long, value_parser = parse_u64)]
        pmax: u64,
        /// Comma-separated multiplier bounds.
        #[arg(long = "D-list", value_delimiter = ',', required = true, value_parser = parse_u64)]
        d_list: Vec<u64>,
        /// Output file; CSV goes to stdout when absent.
        #[arg(long)]
        out: Option<String>,
        /// Enumerate isomorphism classes only for p up to this bound.
        #[arg(long, default_value = "1000", value_parser = parse_u64)]
        classes_max: u64,
    },
    /// Ask the direct oracle for |E_n|.
    Count {
        #[arg(value_parser = parse_natural)]
        n: BigUint,
        #[arg(value_parser = parse_natural)]
        a: BigUint,
        #[arg(value_parser = parse_natural)]
        b: BigUint,
    },
    /// Least d with (d|p) = -1 and (d|m) = +1.
    Nonresidue {
        #[arg(value_parser = parse_u64)]
        p: u64,
        #[arg(value_parser = parse_u64)]
        m: u64,
        #[arg(long, default_value = "10000", value_parser = parse_u64)]
        cap: u64,
    },
    /// Run the invariant suite at reduced scale.
    Selftest {
        #[arg(long, env = "TWISTFACTOR_SEED", default_value = "0", value_parser = parse_u64)]
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OracleKind {
    Factored,
    Direct,
}

fn parse_natural(s: &str) -> Result<BigUint, String> {
    if s.is_empty() || !s.bytes().all(|c| c.is_ascii_digit()) {
        return Err(format!("expected a decimal integer, got {s:?}"));
    }
    BigUint::from_str(s).map_err(|e| e.to_string())
}

fn parse_u64(s: &str) -> Result<u64, String> {
    parse_natural(s)?
        .to_u64()
        .ok_or_else(|| format!("{s} does not fit in 64 bits"))
}

fn num(x: &BigUint) -> Value {
    Value::Number(Number::from_str(&x.to_string()).expect("decimal digits"))
}

enum Failure {
    Usage(String),
    Exhausted(Value),
}

impl From<ReductionError> for Failure {
    fn from(e: ReductionError) -> Self {
        match e {
            ReductionError::Exhausted {
                cofactor,
                partial,
                curves_tried,
                queries,
            } => Failure::Exhausted(json!({
                "status": "exhausted",
                "cofactor": num(&cofactor),
                "partial_factors": partial.iter().map(num).collect::<Vec<_>>(),
                "curves_tried": curves_tried,
                "queries": queries,
            })),
            other => Failure::Usage(other.to_string()),
        }
    }
}

fn make_oracle(kind: OracleKind, n: &BigUint) -> Result<Box<dyn PointCountOracle>, Failure> {
    match kind {
        OracleKind::Factored => {
            // The simulated oracle is handed the factorization.
            let small = n
                .to_u64()
                .ok_or_else(|| Failure::Usage("the factored oracle needs n < 2^64".into()))?;
            let primes: Vec<u64> = factor_small(small)
                .map_err(|e| Failure::Usage(e.to_string()))?
                .factors()
                .iter()
                .map(|&(p, _)| p)
                .filter(|&p| p >= 5)
                .collect();
            let oracle = FactoredOracle::new(&primes).map_err(|e| Failure::Usage(e.to_string()))?;
            Ok(Box::new(oracle))
        }
        OracleKind::Direct => Ok(Box::new(DirectOracle::new(BigUint::from(u64::MAX)))),
    }
}

fn with_command(name: &str, payload: Value) -> Value {
    let mut map = Map::new();
    map.insert("command".into(), Value::String(name.into()));
    if let Value::Object(rest) = payload {
        map.extend(rest);
    }
    Value::Object(map)
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string(v).expect("serializable"));
}

fn run(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Factor {
            n,
            d_bound,
            max_d,
            max_curves,
            k,
            seed,
            oracle,
        } => {
            let cfg = ReductionConfig {
                multiplier_bound: d_bound,
                max_d,
                max_curves,
                k,
                seed,
                redraw_cap: None,
            };
            let budgets = cfg.budgets(&n).map_err(|e| Failure::Usage(e.to_string()))?;
            let config = json!({
                "D": budgets.multiplier_bound,
                "max_d": budgets.max_d,
                "max_curves": budgets.max_curves,
                "k": k,
                "oracle": match oracle { OracleKind::Factored => "factored", OracleKind::Direct => "direct" },
            });
            let oracle = make_oracle(oracle, &n)?;
            match factor_completely(&n, oracle.as_ref(), &cfg) {
                Ok(r) => {
                    print_json(&with_command(
                        "factor",
                        json!({
                            "n": num(&r.n),
                            "factors": r.factors.iter().map(num).collect::<Vec<_>>(),
                            "curves_used": r.curves_used,
                            "oracle_queries": r.stats.queries,
                            "seed": seed,
                            "config": config,
                        }),
                    ));
                    Ok(())
                }
                Err(ReductionError::Exhausted {
                    cofactor,
                    partial,
                    curves_tried,
                    queries,
                }) => {
                    let mut report = with_command(
                        "factor",
                        json!({
                            "n": num(&n),
                            "status": "exhausted",
                            "cofactor": num(&cofactor),
                            "partial_factors": partial.iter().map(num).collect::<Vec<_>>(),
                            "curves_tried": curves_tried,
                            "queries": queries,
                            "seed": seed,
                        }),
                    );
                    report["config"] = config;
                    Err(Failure::Exhausted(report))
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::Census {
            pmin,
            pmax,
            d_list,
            out,
            classes_max,
        } => {
            let rows = census::census_sweep(pmin, pmax, &d_list, classes_max)
                .map_err(|e: CensusError| Failure::Usage(e.to_string()))?;
            match &out {
                Some(path) => {
                    let file = File::create(path)
                        .map_err(|e| Failure::Usage(format!("cannot write {path}: {e}")))?;
                    let mut w = BufWriter::new(file);
                    census::write_csv(&rows, &mut w)
                        .and_then(|_| w.flush())
                        .map_err(|e| Failure::Usage(format!("cannot write {path}: {e}")))?;
                    let violations = rows.iter().filter(|r| !r.is_consistent()).count();
                    print_json(&with_command(
                        "census",
                        json!({
                            "pmin": pmin,
                            "pmax": pmax,
                            "D_list": d_list,
                            "classes_max": classes_max,
                            "out": path,
                            "rows": rows.len(),
                            "violations": violations,
                        }),
                    ));
                }
                None => {
                    let stdout = io::stdout();
                    census::write_csv(&rows, stdout.lock())
                        .map_err(|e| Failure::Usage(e.to_string()))?;
                }
            }
            Ok(())
        }
        Command::Count { n, a, b } => {
            let oracle = make_oracle(OracleKind::Direct, &n)?;
            let count = oracle
                .query(&n, &a, &b)
                .map_err(|e| Failure::Usage(e.to_string()))?;
            print_json(&with_command(
                "count",
                json!({ "n": num(&n), "A": num(&a), "B": num(&b), "count": num(&count) }),
            ));
            Ok(())
        }
        Command::Nonresidue { p, m, cap } => match census::nonresidue_search(p, m, cap) {
            Ok(r) => {
                print_json(&with_command(
                    "nonresidue",
                    json!({ "p": p, "m": m, "cap": cap, "d_min": r.d_min, "ratio": r.ratio }),
                ));
                Ok(())
            }
            Err(e @ CensusError::NotFoundWithinCap { .. }) => Err(Failure::Exhausted(with_command(
                "nonresidue",
                json!({ "p": p, "m": m, "cap": cap, "status": "not_found", "error": e.to_string() }),
            ))),
            Err(e) => Err(Failure::Usage(e.to_string())),
        },
        Command::Selftest { seed } => {
            let results = selftest::run(seed);
            let passed = results.iter().all(|r| r.passed);
            let checks: Vec<Value> = results
                .iter()
                .map(|r| json!({ "name": r.name, "passed": r.passed, "detail": r.detail }))
                .collect();
            let report = with_command(
                "selftest",
                json!({ "seed": seed, "passed": passed, "checks": checks }),
            );
            print_json(&report);
            if passed {
                Ok(())
            } else {
                Err(Failure::Usage("selftest failed".into()))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let start = Instant::now();
    let code = match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Exhausted(report)) => {
            print_json(&report);
            ExitCode::from(2)
        }
    };
    eprintln!("elapsed_ms: {}", start.elapsed().as_millis());
    code
}
