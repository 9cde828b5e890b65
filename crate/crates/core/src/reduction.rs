//! Factoring from point counts.
//!
//! For a random curve `E` mod `n` and a small `d` that is a non-residue
//! modulo exactly one prime `p | n`, the twist flips the sign of `a_p` only:
//!
//! ```text
//! |E_n| / |E_n^d| = (p + 1 - a_p) / (p + 1 + a_p)
//! ```
//!
//! In lowest terms `a/b` we have `a + b = 2(p + 1) / g` where
//! `g = gcd(p + 1 - a_p, p + 1 + a_p)` divides `2 gcd(a_p, p + 1)`. Trying
//! every multiplier up to `2D` therefore recovers `p` whenever
//! `gcd(a_p, p + 1) <= D`.

use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::arith::{is_probable_prime, reduce_fraction, Natural, ReducedFraction};
use crate::curves::{sample_curve, Curve, CurveError, Sample};
use crate::oracle::{OracleError, OracleStats, PointCountOracle};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReductionError {
    #[error("oracle query failed: {0}")]
    Oracle(OracleError),
    #[error("{0} is not squarefree (repeated prime {1})")]
    NotSquarefree(Natural, Natural),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("could not split {cofactor} after {curves_tried} curves and {queries} queries")]
    Exhausted {
        cofactor: Natural,
        partial: Vec<Natural>,
        curves_tried: u64,
        queries: u64,
    },
}

/// Default `k` in the curve budget `k (ln n)^2`.
pub const DEFAULT_K: f64 = 8.0;

/// Budgets of the reduction. Unset bounds default to functions of the
/// modulus being split, see [`ReductionConfig::budgets`].
#[derive(Debug, Clone, PartialEq)]
pub struct ReductionConfig {
    /// `D`: largest `gcd(a_p, p + 1)` the multiplier search must handle.
    pub multiplier_bound: Option<u64>,
    /// Largest twist parameter `d` tried per curve.
    pub max_d: Option<u64>,
    /// Number of curves sampled per split.
    pub max_curves: Option<u64>,
    pub k: f64,
    pub seed: u64,
    /// Redraw cap passed to curve sampling; `None` uses its default.
    pub redraw_cap: Option<usize>,
}

impl Default for ReductionConfig {
    fn default() -> Self {
        ReductionConfig {
            multiplier_bound: None,
            max_d: None,
            max_curves: None,
            k: DEFAULT_K,
            seed: 0,
            redraw_cap: None,
        }
    }
}

impl ReductionConfig {
    pub fn with_seed(seed: u64) -> Self {
        ReductionConfig {
            seed,
            ..Default::default()
        }
    }

    /// Concrete budgets for modulus `n`:
    /// `D = ceil((ln n)^2)`, `max_d = 4 ceil((ln n)^2)`,
    /// `max_curves = ceil(k (ln n)^2)`.
    pub fn budgets(&self, n: &Natural) -> Result<Budgets, ReductionError> {
        let ln = ln_natural(n).max(1.0);
        let sq = ln * ln;
        let log_sq = sq.ceil() as u64;
        let b = Budgets {
            multiplier_bound: self.multiplier_bound.unwrap_or(log_sq),
            max_d: self.max_d.unwrap_or(4 * log_sq),
            max_curves: self.max_curves.unwrap_or((self.k * sq).ceil() as u64),
        };
        if self.k.is_nan() || self.k <= 0.0 {
            return Err(ReductionError::Config(format!("k must be positive, got {}", self.k)));
        }
        if b.multiplier_bound < 1 {
            return Err(ReductionError::Config("D must be at least 1".into()));
        }
        if b.max_d < 2 {
            return Err(ReductionError::Config("max_d must be at least 2".into()));
        }
        if b.max_curves < 1 {
            return Err(ReductionError::Config("max_curves must be at least 1".into()));
        }
        Ok(b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budgets {
    pub multiplier_bound: u64,
    pub max_d: u64,
    pub max_curves: u64,
}

impl Budgets {
    /// Upper bound on oracle queries made by one split.
    pub fn query_bound(&self) -> u64 {
        self.max_curves * self.max_d + self.max_curves
    }
}

fn ln_natural(n: &Natural) -> f64 {
    match n.to_f64() {
        Some(f) if f.is_finite() => f.ln(),
        _ => {
            // Keep the top 64 bits.
            let shift = n.bits().saturating_sub(64);
            let top = (n >> shift).to_f64().unwrap_or(1.0);
            top.ln() + shift as f64 * std::f64::consts::LN_2
        }
    }
}

/// A successful recovery: `factor = multiplier * (a + b) / 2 - 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Recovery {
    pub factor: Natural,
    pub multiplier: u64,
    pub ratio: ReducedFraction,
}

/// Recover a prime `p | n` from `count / twisted_count`.
///
/// Multipliers `g = 1..=2D` are tried in order; a candidate `g(a+b)/2 - 1` is
/// accepted only if it properly divides `n`. A ratio of `1/1` (`a_p = 0`)
/// still recovers `p` through `g = p + 1` when `2D` reaches it.
pub fn recover_from_ratio(
    count: &Natural,
    twisted_count: &Natural,
    multiplier_bound: u64,
    n: &Natural,
) -> Option<Recovery> {
    let ratio = reduce_fraction(count, twisted_count).ok()?;
    let sum = ratio.numerator() + ratio.denominator();
    let one = Natural::one();
    for g in 1..=multiplier_bound.saturating_mul(2) {
        let v = &sum * g;
        if v.is_odd() {
            continue;
        }
        let half = v >> 1u32;
        if half <= one {
            continue;
        }
        let candidate = half - 1u32;
        if candidate > one && &candidate < n && (n % &candidate).is_zero() {
            return Some(Recovery {
                factor: candidate,
                multiplier: g,
                ratio,
            });
        }
    }
    None
}

/// How a factor was found.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    /// Twist-ratio recovery; replaying the two queries reproduces it.
    Ratio {
        curve: Curve,
        d: u64,
        count: Natural,
        twisted_count: Natural,
        ratio: ReducedFraction,
        multiplier: u64,
    },
    /// `gcd(d, n)` was a proper divisor.
    TwistGcd { d: u64 },
    /// A degenerate gcd during curve sampling (coefficient, discriminant or
    /// relatedness test).
    Sampling,
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[allow(clippy::large_enum_variant)]
pub enum SplitOutcome {
    Factor {
        factor: Natural,
        witness: Witness,
        curves_tried: u64,
        queries: u64,
    },
    Exhausted {
        curves_tried: u64,
        queries: u64,
    },
}

fn check_split_input(n: &Natural) -> Result<(), ReductionError> {
    if n < &Natural::from(25u32) || !n.gcd(&Natural::from(6u32)).is_one() {
        return Err(ReductionError::InvalidInput(format!(
            "{n} must be composite and coprime to 6"
        )));
    }
    if is_probable_prime(n) {
        return Err(ReductionError::InvalidInput(format!("{n} is prime")));
    }
    Ok(())
}

/// Find one proper divisor of a composite `n` coprime to 6.
pub fn split(
    n: &Natural,
    oracle: &dyn PointCountOracle,
    cfg: &ReductionConfig,
) -> Result<SplitOutcome, ReductionError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    split_with_rng(n, oracle, cfg, &mut rng)
}

fn split_with_rng(
    n: &Natural,
    oracle: &dyn PointCountOracle,
    cfg: &ReductionConfig,
    rng: &mut ChaCha8Rng,
) -> Result<SplitOutcome, ReductionError> {
    check_split_input(n)?;
    let budgets = cfg.budgets(n)?;
    let mut queries = 0u64;
    let mut used: Vec<Curve> = Vec::new();
    let query = |c: &Curve, queries: &mut u64| {
        *queries += 1;
        oracle.query_curve(c).map_err(ReductionError::Oracle)
    };

    for _ in 0..budgets.max_curves {
        let curve = match sample_curve(n, rng, &used, cfg.redraw_cap) {
            Ok(Sample::Curve(c)) => c,
            Ok(Sample::FactorFound(f)) => {
                return Ok(SplitOutcome::Factor {
                    factor: f,
                    witness: Witness::Sampling,
                    curves_tried: used.len() as u64,
                    queries,
                })
            }
            Err(CurveError::SampleCapExceeded(_)) => break,
            Err(e) => return Err(ReductionError::InvalidInput(e.to_string())),
        };
        used.push(curve.clone());
        let count = query(&curve, &mut queries)?;
        for d in 2..=budgets.max_d {
            let dn = Natural::from(d);
            let g = dn.gcd(n);
            if !g.is_one() {
                if &g != n {
                    return Ok(SplitOutcome::Factor {
                        factor: g,
                        witness: Witness::TwistGcd { d },
                        curves_tried: used.len() as u64,
                        queries,
                    });
                }
                continue;
            }
            let twisted = curve.twist(&dn).expect("d is a unit");
            let twisted_count = query(&twisted, &mut queries)?;
            if let Some(rec) =
                recover_from_ratio(&count, &twisted_count, budgets.multiplier_bound, n)
            {
                return Ok(SplitOutcome::Factor {
                    factor: rec.factor,
                    witness: Witness::Ratio {
                        curve,
                        d,
                        count,
                        twisted_count,
                        ratio: rec.ratio,
                        multiplier: rec.multiplier,
                    },
                    curves_tried: used.len() as u64,
                    queries,
                });
            }
        }
    }
    Ok(SplitOutcome::Exhausted {
        curves_tried: used.len() as u64,
        queries,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorizationResult {
    pub n: Natural,
    /// Strictly increasing primes whose product is `n`.
    pub factors: Vec<Natural>,
    pub stats: OracleStats,
    pub curves_used: u64,
}

/// Complete factorization of a squarefree `n >= 2`.
///
/// 2 and 3 are removed by trial division; every remaining composite is split
/// with the oracle until only primes are left.
pub fn factor_completely(
    n: &Natural,
    oracle: &dyn PointCountOracle,
    cfg: &ReductionConfig,
) -> Result<FactorizationResult, ReductionError> {
    if n < &Natural::from(2u32) {
        return Err(ReductionError::InvalidInput(format!("{n} has no prime factors")));
    }
    let start = oracle.stats();
    let mut primes: Vec<Natural> = Vec::new();
    let mut rest = n.clone();
    for q in [2u32, 3] {
        let qn = Natural::from(q);
        if (&rest % q).is_zero() {
            rest /= q;
            if (&rest % q).is_zero() {
                return Err(ReductionError::NotSquarefree(n.clone(), qn));
            }
            primes.push(qn);
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut curves_used = 0u64;
    let mut work = vec![rest];
    while let Some(m) = work.pop() {
        if m.is_one() {
            continue;
        }
        if is_probable_prime(&m) {
            primes.push(m);
            continue;
        }
        match split_with_rng(&m, oracle, cfg, &mut rng) {
            Ok(SplitOutcome::Factor {
                factor,
                curves_tried,
                ..
            }) => {
                curves_used += curves_tried;
                let other = &m / &factor;
                // Larger part first so the smaller one is popped next.
                let (lo, hi) = if factor < other {
                    (factor, other)
                } else {
                    (other, factor)
                };
                work.push(hi);
                work.push(lo);
            }
            Ok(SplitOutcome::Exhausted {
                curves_tried,
                queries,
            }) => {
                primes.sort();
                return Err(ReductionError::Exhausted {
                    cofactor: m,
                    partial: primes,
                    curves_tried,
                    queries,
                });
            }
            Err(ReductionError::Oracle(OracleError::NotSquarefree(p))) => {
                return Err(ReductionError::NotSquarefree(n.clone(), p))
            }
            Err(e) => return Err(e),
        }
    }
    primes.sort();
    if let Some(w) = primes.windows(2).find(|w| w[0] == w[1]) {
        return Err(ReductionError::NotSquarefree(n.clone(), w[0].clone()));
    }
    Ok(FactorizationResult {
        n: n.clone(),
        factors: primes,
        stats: oracle.stats().since(&start),
        curves_used,
    })
}
