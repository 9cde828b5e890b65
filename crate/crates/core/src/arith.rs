//! Integer kernel: gcd, Jacobi symbols, square roots, fractions, small
//! multiplicative functions and primality.
//!
//! Moduli and oracle answers live in [`Natural`] (arbitrary precision).
//! Per-prime work (point counting, census sweeps) stays in `u64`, where all
//! inputs are far below `2^32`.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::{Integer, Roots};
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Arbitrary-precision non-negative integer.
pub type Natural = BigUint;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("Jacobi symbol needs an odd positive modulus, got {0}")]
    BadJacobiModulus(String),
    #[error("fraction with zero numerator or denominator")]
    ZeroInFraction,
    #[error("cannot factor 0")]
    FactorZero,
}

pub fn gcd(a: &Natural, b: &Natural) -> Natural {
    a.gcd(b)
}

/// Jacobi symbol `(a | m)` for odd `m >= 1`. Negative `a` is reduced mod `m`.
pub fn jacobi(a: i64, m: u64) -> Result<i8, ArithError> {
    if m == 0 || m.is_multiple_of(2) {
        return Err(ArithError::BadJacobiModulus(m.to_string()));
    }
    let mut a = (a as i128).rem_euclid(m as i128) as u64;
    let mut n = m;
    let mut t = 1i8;
    while a != 0 {
        let tz = a.trailing_zeros();
        a >>= tz;
        if tz % 2 == 1 && matches!(n % 8, 3 | 5) {
            t = -t;
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            t = -t;
        }
        a %= n;
    }
    Ok(if n == 1 { t } else { 0 })
}

/// [`jacobi`] for arbitrary-precision arguments.
pub fn jacobi_big(a: &BigInt, m: &Natural) -> Result<i8, ArithError> {
    if m.is_zero() || m.is_even() {
        return Err(ArithError::BadJacobiModulus(m.to_string()));
    }
    let mb = BigInt::from_biguint(Sign::Plus, m.clone());
    let mut a = a.mod_floor(&mb).magnitude().clone();
    let mut n = m.clone();
    let mut t = 1i8;
    while !a.is_zero() {
        let tz = a.trailing_zeros().unwrap_or(0);
        a >>= tz;
        let n8 = (&n % 8u32).to_u32().unwrap_or(0);
        if tz % 2 == 1 && matches!(n8, 3 | 5) {
            t = -t;
        }
        std::mem::swap(&mut a, &mut n);
        let a4 = (&a % 4u32).to_u32().unwrap_or(0);
        let n4 = (&n % 4u32).to_u32().unwrap_or(0);
        if a4 == 3 && n4 == 3 {
            t = -t;
        }
        a %= &n;
    }
    Ok(if n.is_one() { t } else { 0 })
}

/// Largest `t` with `t^2 <= x`.
pub fn isqrt(x: u64) -> u64 {
    x.sqrt()
}

pub fn isqrt_big(x: &Natural) -> Natural {
    x.sqrt()
}

/// A ratio `numerator / denominator` in lowest terms.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ReducedFraction {
    numerator: Natural,
    denominator: Natural,
}

impl ReducedFraction {
    pub fn numerator(&self) -> &Natural {
        &self.numerator
    }

    pub fn denominator(&self) -> &Natural {
        &self.denominator
    }
}

impl std::fmt::Display for ReducedFraction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.numerator, self.denominator)
    }
}

pub fn reduce_fraction(num: &Natural, den: &Natural) -> Result<ReducedFraction, ArithError> {
    if num.is_zero() || den.is_zero() {
        return Err(ArithError::ZeroInFraction);
    }
    let g = num.gcd(den);
    Ok(ReducedFraction {
        numerator: num / &g,
        denominator: den / &g,
    })
}

/// Prime factorization of a machine-size integer, primes strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmallFactorization {
    factors: Vec<(u64, u32)>,
}

/// Trial-division factorization of `1 <= x <= 2^64 - 1`.
pub fn factor_small(x: u64) -> Result<SmallFactorization, ArithError> {
    if x == 0 {
        return Err(ArithError::FactorZero);
    }
    let mut rest = x;
    let mut factors = Vec::new();
    let mut push = |rest: &mut u64, q: u64| {
        let mut e = 0;
        while rest.is_multiple_of(q) {
            *rest /= q;
            e += 1;
        }
        if e > 0 {
            factors.push((q, e));
        }
    };
    push(&mut rest, 2);
    push(&mut rest, 3);
    // 6k +- 1 wheel
    let mut q = 5u64;
    while q.saturating_mul(q) <= rest {
        push(&mut rest, q);
        push(&mut rest, q + 2);
        q += 6;
    }
    if rest > 1 {
        factors.push((rest, 1));
    }
    Ok(SmallFactorization { factors })
}

impl SmallFactorization {
    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    pub fn value(&self) -> u128 {
        self.factors
            .iter()
            .map(|&(p, e)| (p as u128).pow(e))
            .product()
    }

    /// Number of divisors.
    pub fn tau(&self) -> u64 {
        self.factors.iter().map(|&(_, e)| e as u64 + 1).product()
    }

    /// Number of divisors of the square, `prod (2e + 1)`.
    pub fn tau_of_square(&self) -> u64 {
        self.factors.iter().map(|&(_, e)| 2 * e as u64 + 1).product()
    }

    /// Number of distinct prime factors.
    pub fn omega(&self) -> u32 {
        self.factors.len() as u32
    }

    pub fn mobius(&self) -> i8 {
        if self.factors.iter().any(|&(_, e)| e > 1) {
            0
        } else if self.factors.len().is_multiple_of(2) {
            1
        } else {
            -1
        }
    }

    pub fn euler_phi(&self) -> u64 {
        self.factors
            .iter()
            .map(|&(p, e)| (p - 1) * p.pow(e - 1))
            .product()
    }

    /// `x` with every factor of two removed.
    pub fn odd_part(&self) -> u64 {
        self.factors
            .iter()
            .filter(|&&(p, _)| p != 2)
            .map(|&(p, e)| p.pow(e))
            .product()
    }

    /// The odd part as its own factorization.
    pub fn odd(&self) -> SmallFactorization {
        SmallFactorization {
            factors: self.factors.iter().copied().filter(|&(p, _)| p != 2).collect(),
        }
    }

    /// All divisors, ascending.
    pub fn divisors(&self) -> Vec<u64> {
        let mut divs = vec![1u64];
        for &(p, e) in &self.factors {
            let len = divs.len();
            let mut pk = 1u64;
            for _ in 0..e {
                pk *= p;
                for i in 0..len {
                    divs.push(divs[i] * pk);
                }
            }
        }
        divs.sort_unstable();
        divs
    }

    /// Divisors paired with their factorizations, for Möbius/φ evaluation
    /// without refactoring.
    pub fn divisor_factorizations(&self) -> Vec<(u64, SmallFactorization)> {
        let mut out = vec![(1u64, Vec::<(u64, u32)>::new())];
        for &(p, e) in &self.factors {
            let len = out.len();
            let mut pk = 1u64;
            for k in 1..=e {
                pk *= p;
                for i in 0..len {
                    let (d, ref f) = out[i];
                    let mut f = f.clone();
                    f.push((p, k));
                    out.push((d * pk, f));
                }
            }
        }
        out.sort_unstable_by_key(|(d, _)| *d);
        out.into_iter()
            .map(|(d, factors)| (d, SmallFactorization { factors }))
            .collect()
    }
}

const SMALL_PRIMES: [u64; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for the whole `u64` range.
pub fn is_prime_u64(x: u64) -> bool {
    if x < 2 {
        return false;
    }
    for &q in &SMALL_PRIMES {
        if x.is_multiple_of(q) {
            return x == q;
        }
    }
    let s = (x - 1).trailing_zeros();
    let d = (x - 1) >> s;
    'witness: for &w in &SMALL_PRIMES[..12] {
        let mut y = pow_mod(w, d, x);
        if y == 1 || y == x - 1 {
            continue;
        }
        for _ in 1..s {
            y = mul_mod(y, y, x);
            if y == x - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

// Bases 2..41 are a proven witness set below this bound.
const DETERMINISTIC_LIMIT: u128 = 3_317_044_064_679_887_385_961_981;
const RANDOM_ROUNDS: usize = 64;

/// Miller-Rabin: deterministic below `3.3e24`, above that the 13 fixed
/// bases are followed by 64 pseudo-random ones (error below `4^-64`).
pub fn is_probable_prime(x: &Natural) -> bool {
    if let Some(small) = x.to_u64() {
        return is_prime_u64(small);
    }
    for &q in &SMALL_PRIMES {
        if (x % q).is_zero() {
            return false;
        }
    }
    let one = Natural::one();
    let x_minus_1 = x - &one;
    let s = x_minus_1.trailing_zeros().unwrap_or(0);
    let d = &x_minus_1 >> s;
    let strong_probable = |w: &Natural| -> bool {
        let mut y = w.modpow(&d, x);
        if y.is_one() || y == x_minus_1 {
            return true;
        }
        for _ in 1..s {
            y = (&y * &y) % x;
            if y == x_minus_1 {
                return true;
            }
        }
        false
    };
    if !SMALL_PRIMES
        .iter()
        .all(|&w| strong_probable(&Natural::from(w)))
    {
        return false;
    }
    if x.to_u128().is_some_and(|v| v < DETERMINISTIC_LIMIT) {
        return true;
    }
    use num_bigint::RandBigInt;
    let mut rng = ChaCha8Rng::seed_from_u64(0x6d69_6c6c_6572_7261);
    let upper = x - 2u32;
    (0..RANDOM_ROUNDS).all(|_| {
        let w = rng.gen_biguint_range(&Natural::from(2u32), &upper);
        strong_probable(&w)
    })
}

/// Uniform residue in `[0, n)`.
pub fn random_below<R: Rng + ?Sized>(rng: &mut R, n: &Natural) -> Natural {
    use num_bigint::RandBigInt;
    rng.gen_biguint_below(n)
}
