//! Exact point counts of `y^2 = x^3 + Ax + B` over prime fields and over
//! squarefree `Z/nZ`.
//!
//! Two independent routes are kept apart on purpose:
//! [`count_points_prime`] sums quadratic characters, while
//! [`count_affine_bruteforce`] and [`count_points_enumerated`] histogram the
//! squares `y^2` and count solution pairs directly.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use thiserror::Error;

use crate::arith::{is_prime_u64, Natural};

/// Largest modulus accepted by [`count_affine_bruteforce`].
pub const BRUTEFORCE_LIMIT: u64 = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CountError {
    #[error("p = {0} is not a prime >= 5")]
    BadPrime(u64),
    #[error("curve is singular modulo {0}")]
    Singular(u64),
    #[error("modulus {0} exceeds the brute-force limit {BRUTEFORCE_LIMIT}")]
    TooLarge(u64),
    #[error("duplicate prime {0} in factor list")]
    DuplicatePrime(u64),
}

/// `|E_p| = p + 1 - trace`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrimeCount {
    pub p: u64,
    pub npoints: u64,
    pub trace: i64,
}

impl PrimeCount {
    /// Count of the quadratic twist by a non-residue: `p + 1 + trace`.
    pub fn twisted_npoints(&self) -> u64 {
        (self.p as i64 + 1 + self.trace) as u64
    }
}

/// Quadratic character table of `F_p`: `chi[v] = (v | p)`.
#[derive(Debug, Clone)]
pub struct QuadraticCharacter {
    p: u64,
    chi: Vec<i8>,
}

impl QuadraticCharacter {
    pub fn new(p: u64) -> Self {
        let mut chi = vec![-1i8; p as usize];
        chi[0] = 0;
        for y in 1..=(p / 2) {
            chi[(y * y % p) as usize] = 1;
        }
        QuadraticCharacter { p, chi }
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    #[inline]
    pub fn symbol(&self, v: u64) -> i8 {
        self.chi[(v % self.p) as usize]
    }

    /// `sum_x (x^3 + Ax + B | p)`, i.e. `-trace`.
    pub fn character_sum(&self, a: u64, b: u64) -> i64 {
        let p = self.p;
        let (a, b) = (a % p, b % p);
        (0..p)
            .map(|x| {
                let f = ((x * x % p) * x + a * x + b) % p;
                self.chi[f as usize] as i64
            })
            .sum()
    }

    /// Count over `F_p` with this character table. Caller guarantees `p >= 5`.
    pub fn count(&self, a: u64, b: u64) -> Result<PrimeCount, CountError> {
        let p = self.p;
        if is_singular(p, a, b) {
            return Err(CountError::Singular(p));
        }
        let s = self.character_sum(a, b);
        let npoints = (p as i64 + 1 + s) as u64;
        Ok(PrimeCount {
            p,
            npoints,
            trace: -s,
        })
    }
}

/// `4A^3 + 27B^2 == 0 (mod m)`.
pub fn is_singular(m: u64, a: u64, b: u64) -> bool {
    let m128 = m as u128;
    let (a, b) = (a as u128 % m128, b as u128 % m128);
    let disc = (4 * (a * a % m128 * a % m128) + 27 * (b * b % m128)) % m128;
    disc == 0
}

fn check_prime(p: u64) -> Result<(), CountError> {
    if p < 5 || !is_prime_u64(p) {
        return Err(CountError::BadPrime(p));
    }
    Ok(())
}

/// `|E(F_p)| = p + 1 + sum_x ((x^3 + Ax + B) | p)`.
pub fn count_points_prime(p: u64, a: u64, b: u64) -> Result<PrimeCount, CountError> {
    check_prime(p)?;
    QuadraticCharacter::new(p).count(a, b)
}

fn residue_u64(x: &Natural, p: u64) -> u64 {
    (x % p).to_u64().expect("residue below a u64 modulus")
}

/// `prod_p |E(F_p)|` over distinct primes `p`.
pub fn count_points_squarefree(
    primes: &[u64],
    a: &Natural,
    b: &Natural,
) -> Result<Natural, CountError> {
    let mut seen = std::collections::BTreeSet::new();
    let mut total = BigUint::one();
    for &p in primes {
        if !seen.insert(p) {
            return Err(CountError::DuplicatePrime(p));
        }
        let c = count_points_prime(p, residue_u64(a, p), residue_u64(b, p))?;
        total *= c.npoints;
    }
    Ok(total)
}

/// Affine solutions `#{(x, y) in (Z/m)^2 : y^2 = x^3 + Ax + B}` via a
/// histogram of the squares mod `m`.
fn affine_pairs(m: u64, a: u64, b: u64) -> u64 {
    let m128 = m as u128;
    let mut squares = vec![0u32; m as usize];
    for y in 0..m {
        squares[((y as u128 * y as u128) % m128) as usize] += 1;
    }
    let (a, b) = (a as u128 % m128, b as u128 % m128);
    (0..m as u128)
        .map(|x| {
            let f = ((x * x % m128) * x + a * x + b) % m128;
            squares[f as usize] as u64
        })
        .sum()
}

/// Exhaustive affine count over `Z/n`, `n <= BRUTEFORCE_LIMIT`. No
/// smoothness requirement.
pub fn count_affine_bruteforce(n: u64, a: u64, b: u64) -> Result<u64, CountError> {
    if n > BRUTEFORCE_LIMIT {
        return Err(CountError::TooLarge(n));
    }
    if n == 0 {
        return Ok(0);
    }
    Ok(affine_pairs(n, a, b))
}

/// Projective count over `F_p` by enumerating `(x, y)` solutions, with no
/// use of the Legendre-symbol formula.
pub fn count_points_enumerated(p: u64, a: u64, b: u64) -> Result<PrimeCount, CountError> {
    check_prime(p)?;
    if is_singular(p, a, b) {
        return Err(CountError::Singular(p));
    }
    let npoints = affine_pairs(p, a, b) + 1;
    Ok(PrimeCount {
        p,
        npoints,
        trace: p as i64 + 1 - npoints as i64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{factor_small, isqrt, jacobi};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    // Oracle for the frozen values: literally try every (x, y).
    fn pairs_by_hand(p: u64, a: u64, b: u64) -> u64 {
        let mut n = 0;
        for x in 0..p {
            for y in 0..p {
                if (y * y) % p == (x * x * x + a * x + b) % p {
                    n += 1;
                }
            }
        }
        n
    }

    #[test]
    fn frozen_prime_counts() {
        assert_eq!(pairs_by_hand(5, 1, 1) + 1, 9);
        assert_eq!(pairs_by_hand(7, 1, 1) + 1, 5);
        assert_eq!(pairs_by_hand(5, 4, 3) + 1, 3);

        let c = count_points_prime(5, 1, 1).unwrap();
        assert_eq!((c.npoints, c.trace), (9, -3));
        let c = count_points_prime(7, 1, 1).unwrap();
        assert_eq!((c.npoints, c.trace), (5, 3));
        let c = count_points_prime(5, 4, 3).unwrap();
        assert_eq!((c.npoints, c.trace), (3, 3));
    }

    #[test]
    fn rejects_bad_inputs() {
        assert_eq!(count_points_prime(3, 1, 1), Err(CountError::BadPrime(3)));
        assert_eq!(count_points_prime(2, 1, 1), Err(CountError::BadPrime(2)));
        assert_eq!(count_points_prime(9, 1, 1), Err(CountError::BadPrime(9)));
        assert_eq!(count_points_prime(5, 0, 0), Err(CountError::Singular(5)));
        assert_eq!(
            count_points_enumerated(7, 0, 0),
            Err(CountError::Singular(7))
        );
        assert_eq!(
            count_affine_bruteforce(100_001, 1, 1),
            Err(CountError::TooLarge(100_001))
        );
    }

    #[test]
    fn squarefree_examples() {
        let nat = |x: u64| Natural::from(x);
        assert_eq!(
            count_points_squarefree(&[5, 7], &nat(1), &nat(1)).unwrap(),
            nat(45)
        );
        assert_eq!(
            count_points_squarefree(&[5, 7], &nat(4), &nat(8)).unwrap(),
            nat(15)
        );
        assert_eq!(
            count_points_squarefree(&[13], &nat(2), &nat(3)).unwrap(),
            nat(count_points_prime(13, 2, 3).unwrap().npoints)
        );
        assert_eq!(
            count_points_squarefree(&[5, 5], &nat(1), &nat(1)),
            Err(CountError::DuplicatePrime(5))
        );
        assert_eq!(
            count_points_squarefree(&[5, 7], &nat(0), &nat(0)),
            Err(CountError::Singular(5))
        );
    }

    #[test]
    fn affine_examples() {
        assert_eq!(count_affine_bruteforce(5, 1, 1), Ok(8));
        assert_eq!(count_affine_bruteforce(35, 1, 1), Ok(32));
        assert_eq!(count_affine_bruteforce(7, 1, 1), Ok(4));
        for (n, a, b) in [(5, 1, 1), (35, 1, 1), (7, 1, 1), (33, 2, 5), (20, 3, 3)] {
            assert_eq!(
                count_affine_bruteforce(n, a, b).unwrap(),
                pairs_by_hand(n, a, b)
            );
        }
    }

    #[test]
    fn character_and_enumeration_routes_agree() {
        for p in (5..400u64).filter(|&p| is_prime_u64(p)) {
            let chi = QuadraticCharacter::new(p);
            for a in [0, 1, 2, p - 1] {
                for b in [0, 1, 3, p - 2] {
                    if is_singular(p, a, b) {
                        continue;
                    }
                    let c1 = chi.count(a, b).unwrap();
                    let c2 = count_points_enumerated(p, a, b).unwrap();
                    assert_eq!(c1, c2);
                    for x in 0..p {
                        let f = (x * x % p * x + a * x + b) % p;
                        assert_eq!(chi.symbol(f), jacobi(f as i64, p).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn hasse_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let primes: Vec<u64> = (5..10_000).filter(|&p| is_prime_u64(p)).collect();
        let mut done = 0;
        while done < 10_000 {
            let p = primes[rng.gen_range(0..primes.len())];
            let (a, b) = (rng.gen_range(0..p), rng.gen_range(0..p));
            if is_singular(p, a, b) {
                continue;
            }
            let c = count_points_prime(p, a, b).unwrap();
            assert!(c.trace * c.trace <= 4 * p as i64, "{c:?}");
            assert_eq!(c.npoints as i64, p as i64 + 1 - c.trace);
            done += 1;
        }
    }

    #[test]
    fn character_sum_within_integer_hasse() {
        // |a_p| <= 2 sqrt(p) for an integer a_p is |a_p| <= isqrt(4p); the
        // weaker-looking 2 * isqrt(p) can be exceeded by one.
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for p in (5..3000u64).filter(|&p| is_prime_u64(p)) {
            let chi = QuadraticCharacter::new(p);
            for _ in 0..5 {
                let (a, b) = (rng.gen_range(0..p), rng.gen_range(1..p));
                if is_singular(p, a, b) {
                    continue;
                }
                let s = chi.character_sum(a, b).unsigned_abs();
                assert!(s <= isqrt(4 * p));
            }
        }
        let chi7 = QuadraticCharacter::new(7);
        let widest = (0..7)
            .flat_map(|a| (0..7).map(move |b| (a, b)))
            .filter(|&(a, b)| !is_singular(7, a, b))
            .map(|(a, b)| chi7.character_sum(a, b).unsigned_abs())
            .max();
        assert_eq!(widest, Some(5));
        assert!(5 > 2 * isqrt(7));
    }

    #[test]
    fn twist_identity_exhaustive_d() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for p in (5..300u64).filter(|&p| is_prime_u64(p)) {
            let chi = QuadraticCharacter::new(p);
            let mut curves = 0;
            while curves < 20 {
                let (a, b) = (rng.gen_range(0..p), rng.gen_range(0..p));
                let Ok(base) = chi.count(a, b) else { continue };
                curves += 1;
                for d in 1..p {
                    let (d2, d3) = (d * d % p, d * d % p * d % p);
                    let tw = chi.count(a * d2 % p, b * d3 % p).unwrap();
                    match jacobi(d as i64, p).unwrap() {
                        -1 => assert_eq!(base.npoints + tw.npoints, 2 * (p + 1)),
                        1 => assert_eq!(base.npoints, tw.npoints),
                        _ => unreachable!(),
                    }
                }
            }
        }
    }

    #[test]
    fn crt_cross_check() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for n in 5..=3000u64 {
            let f = factor_small(n).unwrap();
            if f.mobius() == 0 || n % 2 == 0 || n % 3 == 0 {
                continue;
            }
            let primes: Vec<u64> = f.factors().iter().map(|&(p, _)| p).collect();
            let mut curves = 0;
            while curves < 10 {
                let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
                let Ok(counts) = primes
                    .iter()
                    .map(|&p| count_points_prime(p, a % p, b % p))
                    .collect::<Result<Vec<_>, _>>()
                else {
                    continue;
                };
                curves += 1;
                let expected: u64 = counts.iter().map(|c| c.npoints - 1).product();
                assert_eq!(count_affine_bruteforce(n, a, b).unwrap(), expected);
            }
        }
    }
}
