//! The point-counting oracle: given a squarefree `m` and a curve, return
//! `|E_m| = prod_{p | m} (p + 1 - a_p)`.
//!
//! Real oracles are out of reach, so both implementations here cheat with
//! knowledge of the factorization. [`FactoredOracle`] is handed the primes
//! up front; [`DirectOracle`] finds them by trial division and counts by
//! enumeration. They share no counting code path.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::arith::{factor_small, is_prime_u64, Natural};
use crate::counting::{count_points_enumerated, CountError, QuadraticCharacter};
use crate::curves::Curve;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("modulus {0} is not supported by this oracle")]
    UnsupportedModulus(Natural),
    #[error("modulus is divisible by {0}^2")]
    NotSquarefree(Natural),
    #[error("curve is singular modulo {0}")]
    Singular(Natural),
    #[error("modulus {modulus} exceeds oracle limit {limit}")]
    TooLarge { modulus: Natural, limit: Natural },
    #[error("oracle prime set is invalid: {0}")]
    BadPrimeSet(String),
    #[error(transparent)]
    Count(#[from] CountError),
}

/// Snapshot of query accounting.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OracleStats {
    pub queries: u64,
    pub per_modulus: BTreeMap<Natural, u64>,
}

impl OracleStats {
    /// Queries made since `earlier` was taken.
    pub fn since(&self, earlier: &OracleStats) -> OracleStats {
        let per_modulus = self
            .per_modulus
            .iter()
            .filter_map(|(m, &c)| {
                let d = c - earlier.per_modulus.get(m).copied().unwrap_or(0);
                (d > 0).then(|| (m.clone(), d))
            })
            .collect();
        OracleStats {
            queries: self.queries - earlier.queries,
            per_modulus,
        }
    }

    pub fn merge(&mut self, other: &OracleStats) {
        self.queries += other.queries;
        for (m, c) in &other.per_modulus {
            *self.per_modulus.entry(m.clone()).or_insert(0) += c;
        }
    }
}

#[derive(Debug, Default)]
struct StatsRecorder {
    queries: AtomicU64,
    per_modulus: Mutex<BTreeMap<Natural, u64>>,
}

impl StatsRecorder {
    fn record(&self, m: &Natural) {
        let mut map = self.per_modulus.lock().expect("stats lock poisoned");
        *map.entry(m.clone()).or_insert(0) += 1;
        self.queries.fetch_add(1, Ordering::SeqCst);
    }

    fn snapshot(&self) -> OracleStats {
        let map = self.per_modulus.lock().expect("stats lock poisoned");
        OracleStats {
            queries: self.queries.load(Ordering::SeqCst),
            per_modulus: map.clone(),
        }
    }
}

pub trait PointCountOracle: Send + Sync {
    /// `|E_m|` for `y^2 = x^3 + Ax + B`. Singular inputs are an error.
    fn query(&self, m: &Natural, a: &Natural, b: &Natural) -> Result<Natural, OracleError>;

    fn stats(&self) -> OracleStats;

    fn query_curve(&self, curve: &Curve) -> Result<Natural, OracleError> {
        self.query(curve.modulus(), curve.a(), curve.b())
    }
}

fn check_smooth(m: &Natural, a: &Natural, b: &Natural) -> Result<(), OracleError> {
    let disc = Curve::new(m.clone(), a.clone(), b.clone()).discriminant();
    if disc.gcd(m).is_one() {
        Ok(())
    } else {
        Err(OracleError::Singular(m.clone()))
    }
}

fn residue(x: &Natural, p: u64) -> u64 {
    (x % p).to_u64().expect("residue below u64 modulus")
}

/// Oracle built from a known list of distinct primes `>= 5`. Answers any
/// squarefree product of a nonempty subset of them.
#[derive(Debug)]
pub struct FactoredOracle {
    characters: BTreeMap<u64, QuadraticCharacter>,
    stats: StatsRecorder,
}

impl FactoredOracle {
    pub fn new(primes: &[u64]) -> Result<Self, OracleError> {
        let mut characters = BTreeMap::new();
        for &p in primes {
            if p < 5 || !is_prime_u64(p) {
                return Err(OracleError::BadPrimeSet(format!("{p} is not a prime >= 5")));
            }
            if characters.insert(p, QuadraticCharacter::new(p)).is_some() {
                return Err(OracleError::BadPrimeSet(format!("{p} listed twice")));
            }
        }
        Ok(FactoredOracle {
            characters,
            stats: StatsRecorder::default(),
        })
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.characters.keys().copied()
    }

    fn split_modulus(&self, m: &Natural) -> Result<Vec<&QuadraticCharacter>, OracleError> {
        if m <= &Natural::one() {
            return Err(OracleError::UnsupportedModulus(m.clone()));
        }
        let mut rest = m.clone();
        let mut used = Vec::new();
        for (&p, chi) in &self.characters {
            let (q, r) = rest.div_rem(&Natural::from(p));
            if r.is_zero() {
                if (&q % p).is_zero() {
                    return Err(OracleError::NotSquarefree(Natural::from(p)));
                }
                rest = q;
                used.push(chi);
            }
        }
        if !rest.is_one() {
            return Err(OracleError::UnsupportedModulus(m.clone()));
        }
        Ok(used)
    }
}

impl PointCountOracle for FactoredOracle {
    fn query(&self, m: &Natural, a: &Natural, b: &Natural) -> Result<Natural, OracleError> {
        self.stats.record(m);
        let chars = self.split_modulus(m)?;
        check_smooth(m, a, b)?;
        let mut total = Natural::one();
        for chi in chars {
            let p = chi.prime();
            total *= chi.count(residue(a, p), residue(b, p))?.npoints;
        }
        Ok(total)
    }

    fn stats(&self) -> OracleStats {
        self.stats.snapshot()
    }
}

/// Oracle that trial-divides `m <= limit` and counts each prime field by
/// enumerating solutions.
#[derive(Debug)]
pub struct DirectOracle {
    limit: Natural,
    stats: StatsRecorder,
}

impl DirectOracle {
    pub fn new(limit: Natural) -> Self {
        DirectOracle {
            limit,
            stats: StatsRecorder::default(),
        }
    }
}

impl PointCountOracle for DirectOracle {
    fn query(&self, m: &Natural, a: &Natural, b: &Natural) -> Result<Natural, OracleError> {
        self.stats.record(m);
        if m > &self.limit {
            return Err(OracleError::TooLarge {
                modulus: m.clone(),
                limit: self.limit.clone(),
            });
        }
        let Some(small) = m.to_u64().filter(|&v| v > 1) else {
            return Err(OracleError::UnsupportedModulus(m.clone()));
        };
        let factors = factor_small(small).expect("m > 1");
        if let Some(&(p, _)) = factors.factors().iter().find(|&&(_, e)| e > 1) {
            return Err(OracleError::NotSquarefree(Natural::from(p)));
        }
        if factors.factors().iter().any(|&(p, _)| p < 5) {
            return Err(OracleError::UnsupportedModulus(m.clone()));
        }
        check_smooth(m, a, b)?;
        let mut total = Natural::one();
        for &(p, _) in factors.factors() {
            total *= count_points_enumerated(p, residue(a, p), residue(b, p))?.npoints;
        }
        Ok(total)
    }

    fn stats(&self) -> OracleStats {
        self.stats.snapshot()
    }
}
