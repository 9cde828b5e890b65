//! Trace census over prime fields.
//!
//! `phi(p, D)` counts `1 <= a <= floor(2 sqrt p)` with `gcd(a, p + 1) <= D`,
//! the number of positive traces the reduction can exploit. It is computed
//! twice, by enumeration and by the divisor/Möbius floor sum, and compared
//! with two closed-form lower bounds. Isomorphism classes of curves are
//! enumerated exhaustively for small `p`.

use std::io::{self, Write};

use num_bigint::BigUint;
use num_integer::gcd;
use rayon::prelude::*;
use thiserror::Error;

use crate::arith::{factor_small, is_prime_u64, isqrt, jacobi};
use crate::counting::{is_singular, QuadraticCharacter};

/// Largest prime accepted by [`class_census`].
pub const CLASS_CENSUS_MAX: u64 = 1000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CensusError {
    #[error("p = {0} is not a prime >= 5")]
    BadPrime(u64),
    #[error("p = {p} is outside the class census range [5, {max}]")]
    OutOfRange { p: u64, max: u64 },
    #[error("no admissible d in [1, {cap}] for p = {p}, m = {m}")]
    NotFoundWithinCap { p: u64, m: u64, cap: u64 },
    #[error("invalid arguments: {0}")]
    InvalidInput(String),
}

fn check_prime(p: u64) -> Result<(), CensusError> {
    if p < 5 || !is_prime_u64(p) {
        return Err(CensusError::BadPrime(p));
    }
    Ok(())
}

/// `#{a : 1 <= a <= isqrt(4p), gcd(a, p + 1) <= D}`.
pub fn phi_direct(p: u64, d_bound: u64) -> u64 {
    let top = isqrt(4 * p);
    (1..=top).filter(|&a| gcd(a, p + 1) <= d_bound).count() as u64
}

/// `sum_{d | p+1, d <= D} sum_{k | (p+1)/d} mu(k) floor(isqrt(4p) / (k d))`.
pub fn phi_mobius(p: u64, d_bound: u64) -> u64 {
    let top = isqrt(4 * p);
    let f = factor_small(p + 1).expect("p + 1 > 0");
    let mut total: i64 = 0;
    for (d, _) in f.divisor_factorizations() {
        if d > d_bound {
            break;
        }
        let q = factor_small((p + 1) / d).expect("nonzero");
        for (k, fk) in q.divisor_factorizations() {
            let mu = fk.mobius() as i64;
            if mu != 0 {
                total += mu * (top / (k * d)) as i64;
            }
        }
    }
    u64::try_from(total).expect("a count is non-negative")
}

/// Right-hand sides of the two lower bounds on `phi(p, D)`:
///
/// * `2 sqrt p - (2 sqrt p / D) tau(p + 1) - tau((p + 1)^2)`
/// * `sqrt p phi(P) / P - 2^omega(P)` with `P` the odd part of `p + 1`.
pub fn lower_bounds(p: u64, d_bound: u64) -> (f64, f64) {
    let f = factor_small(p + 1).expect("p + 1 > 0");
    let root = (p as f64).sqrt();
    let bound_22 = 2.0 * root - 2.0 * root / d_bound as f64 * f.tau() as f64
        - f.tau_of_square() as f64;
    let odd = f.odd();
    let big_p = odd.odd_part() as f64;
    let bound_23 = root * odd.euler_phi() as f64 / big_p - 2f64.powi(odd.omega() as i32);
    (bound_22, bound_23)
}

/// Trace of one representative per `F_p`-isomorphism class of smooth curves
/// `y^2 = x^3 + Ax + B`, where `(A, B) ~ (l^4 A, l^6 B)` for `l` in `F_p^*`.
/// Classes are listed in order of their smallest `(A, B)`.
pub fn class_traces(p: u64) -> Result<Vec<i64>, CensusError> {
    check_prime(p)?;
    if p > CLASS_CENSUS_MAX {
        return Err(CensusError::OutOfRange {
            p,
            max: CLASS_CENSUS_MAX,
        });
    }
    let chi = QuadraticCharacter::new(p);
    // (l^4, l^6) pairs; l and -l coincide.
    let scalings: Vec<(u64, u64)> = (1..=(p - 1) / 2)
        .map(|l| {
            let l2 = l * l % p;
            (l2 * l2 % p, l2 * l2 % p * l2 % p)
        })
        .collect();
    let idx = |a: u64, b: u64| (a * p + b) as usize;
    let mut seen = vec![false; (p * p) as usize];
    let mut traces = Vec::new();
    for a in 0..p {
        for b in 0..p {
            if seen[idx(a, b)] || is_singular(p, a, b) {
                continue;
            }
            for &(l4, l6) in &scalings {
                seen[idx(a * l4 % p, b * l6 % p)] = true;
            }
            traces.push(chi.count(a, b).expect("smooth").trace);
        }
    }
    Ok(traces)
}

/// One `(p, D)` record.
#[derive(Debug, Clone, PartialEq)]
pub struct CensusRow {
    pub p: u64,
    pub d_bound: u64,
    pub phi_direct: u64,
    pub phi_mobius: u64,
    pub bound_22: f64,
    pub bound_23: f64,
    /// `S_{p,D}`; absent when classes were not enumerated.
    pub s_classes: Option<u64>,
    pub total_classes: Option<u64>,
}

impl CensusRow {
    /// `S_{p,D} log p / p`, the empirical stand-in for the unnamed constant.
    pub fn class_ratio(&self) -> Option<f64> {
        self.s_classes
            .map(|s| s as f64 * (self.p as f64).ln() / self.p as f64)
    }

    pub fn is_consistent(&self) -> bool {
        let phi = self.phi_direct as f64;
        self.phi_direct == self.phi_mobius
            && phi >= self.bound_22
            && phi >= self.bound_23
            && match (self.s_classes, self.total_classes) {
                (Some(s), Some(t)) => s <= t,
                (None, None) => true,
                _ => false,
            }
    }
}

fn row_with_traces(p: u64, d_bound: u64, traces: Option<&[i64]>) -> CensusRow {
    let (bound_22, bound_23) = lower_bounds(p, d_bound);
    let s_classes = traces.map(|t| {
        t.iter()
            .filter(|&&a| gcd(a.unsigned_abs(), p + 1) <= d_bound)
            .count() as u64
    });
    CensusRow {
        p,
        d_bound,
        phi_direct: phi_direct(p, d_bound),
        phi_mobius: phi_mobius(p, d_bound),
        bound_22,
        bound_23,
        s_classes,
        total_classes: traces.map(|t| t.len() as u64),
    }
}

/// Full row for `5 <= p <= 1000`, including class counts.
pub fn class_census(p: u64, d_bound: u64) -> Result<CensusRow, CensusError> {
    let traces = class_traces(p)?;
    Ok(row_with_traces(p, d_bound, Some(&traces)))
}

/// Row without class enumeration, for any prime `p >= 5`.
pub fn census_row(p: u64, d_bound: u64) -> Result<CensusRow, CensusError> {
    check_prime(p)?;
    Ok(row_with_traces(p, d_bound, None))
}

/// Rows for every prime in `[pmin, pmax]` (primes below 5 skipped) and every
/// `D` in `d_list`, ordered by `(p, D)`. Class columns are filled for
/// `p <= classes_max`.
pub fn census_sweep(
    pmin: u64,
    pmax: u64,
    d_list: &[u64],
    classes_max: u64,
) -> Result<Vec<CensusRow>, CensusError> {
    if pmin > pmax {
        return Err(CensusError::InvalidInput(format!("pmin {pmin} > pmax {pmax}")));
    }
    if d_list.contains(&0) {
        return Err(CensusError::InvalidInput("D must be at least 1".into()));
    }
    let mut ds = d_list.to_vec();
    ds.sort_unstable();
    ds.dedup();
    let classes_max = classes_max.min(CLASS_CENSUS_MAX);
    let primes: Vec<u64> = (pmin.max(5)..=pmax).filter(|&p| is_prime_u64(p)).collect();
    let rows = primes
        .par_iter()
        .map(|&p| {
            let traces = if p <= classes_max {
                Some(class_traces(p).expect("p in range"))
            } else {
                None
            };
            ds.iter()
                .map(|&d| row_with_traces(p, d, traces.as_deref()))
                .collect::<Vec<_>>()
        })
        .collect::<Vec<_>>();
    Ok(rows.into_iter().flatten().collect())
}

pub const CSV_HEADER: &str = "p,D,phi_direct,phi_mobius,bound22,bound23,s_classes,total_classes";

/// Format like C's `%.6g`.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.5e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if !(-4..6).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim(mantissa), sign, exp.abs())
    } else {
        trim(&format!("{:.*}", (5 - exp) as usize, x))
    }
}

pub fn write_csv<W: Write>(rows: &[CensusRow], mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    let opt = |v: Option<u64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.p,
            r.d_bound,
            r.phi_direct,
            r.phi_mobius,
            format_sig6(r.bound_22),
            format_sig6(r.bound_23),
            opt(r.s_classes),
            opt(r.total_classes),
        )?;
    }
    Ok(())
}

/// Least `d` that is a non-residue mod `p` and a residue mod `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct NonResidueRecord {
    pub p: u64,
    pub m: u64,
    pub d_min: u64,
    /// `d_min / (ln(p m))^2`.
    pub ratio: f64,
}

/// Smallest `d` in `[1, cap]` with `(d|p) = -1`, `gcd(d, m) = 1` and
/// `(d|m) = 1`.
pub fn nonresidue_search(p: u64, m: u64, cap: u64) -> Result<NonResidueRecord, CensusError> {
    if p < 3 || !is_prime_u64(p) {
        return Err(CensusError::InvalidInput(format!("p = {p} must be an odd prime")));
    }
    if m == 0 || m.is_multiple_of(2) || m.is_multiple_of(p) {
        return Err(CensusError::InvalidInput(format!(
            "m = {m} must be odd and coprime to p = {p}"
        )));
    }
    let jac = |d: u64, q: u64| jacobi(d as i64, q).expect("odd modulus");
    let d_min = (1..=cap)
        .find(|&d| jac(d, p) == -1 && gcd(d, m) == 1 && jac(d, m) == 1)
        .ok_or(CensusError::NotFoundWithinCap { p, m, cap })?;
    let ln = ((p as f64) * (m as f64)).ln();
    Ok(NonResidueRecord {
        p,
        m,
        d_min,
        ratio: d_min as f64 / (ln * ln),
    })
}

/// Worst case over all ordered pairs of distinct odd primes `<= limit`.
#[derive(Debug, Clone, PartialEq)]
pub struct NonResidueSummary {
    pub pairs: u64,
    pub worst: NonResidueRecord,
    pub largest_d: u64,
}

pub fn nonresidue_sweep(limit: u64, cap: u64) -> Result<NonResidueSummary, CensusError> {
    let primes: Vec<u64> = (3..=limit).filter(|&p| is_prime_u64(p)).collect();
    let records = primes
        .par_iter()
        .map(|&p| {
            primes
                .iter()
                .filter(|&&m| m != p)
                .map(|&m| nonresidue_search(p, m, cap))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    let records: Vec<NonResidueRecord> = records.into_iter().flatten().collect();
    let largest_d = records.iter().map(|r| r.d_min).max().unwrap_or(0);
    let worst = records
        .iter()
        .max_by(|x, y| x.ratio.total_cmp(&y.ratio))
        .cloned()
        .ok_or_else(|| CensusError::InvalidInput(format!("fewer than two odd primes <= {limit}")))?;
    Ok(NonResidueSummary {
        pairs: records.len() as u64,
        worst,
        largest_d,
    })
}

/// `prod_{i <= l} p_i >= l^l`, exactly, for `1 <= l <= 64`.
pub fn primorial_check(l: u32) -> Result<bool, CensusError> {
    if !(1..=64).contains(&l) {
        return Err(CensusError::InvalidInput(format!("l = {l} outside [1, 64]")));
    }
    let primorial: BigUint = (2u64..)
        .filter(|&q| is_prime_u64(q))
        .take(l as usize)
        .map(BigUint::from)
        .product();
    Ok(primorial >= BigUint::from(l).pow(l))
}

/// `phi(x) > x / (4 ln x)` for `x >= 3`.
pub fn phi_lower_check(x: u64) -> Result<bool, CensusError> {
    if x < 3 {
        return Err(CensusError::InvalidInput(format!("x = {x} < 3")));
    }
    let phi = factor_small(x).expect("x > 0").euler_phi() as f64;
    Ok(phi > x as f64 / (4.0 * (x as f64).ln()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::count_points_enumerated;

    // Independent class enumeration: group smooth pairs by the explicit
    // orbit set, over all l in F_p^*.
    fn classes_by_orbit_sets(p: u64) -> Vec<(Vec<(u64, u64)>, i64)> {
        let mut classes: Vec<(Vec<(u64, u64)>, i64)> = Vec::new();
        for a in 0..p {
            for b in 0..p {
                if is_singular(p, a, b) || classes.iter().any(|(o, _)| o.contains(&(a, b))) {
                    continue;
                }
                let mut orbit: Vec<(u64, u64)> = (1..p)
                    .map(|l| {
                        let l4 = l.pow(4) % p;
                        let l6 = l.pow(6) % p;
                        (a * l4 % p, b * l6 % p)
                    })
                    .collect();
                orbit.sort_unstable();
                orbit.dedup();
                let t = count_points_enumerated(p, a, b).unwrap().trace;
                classes.push((orbit, t));
            }
        }
        classes
    }

    #[test]
    fn phi_examples() {
        assert_eq!(phi_direct(5, 1), 1);
        assert_eq!(phi_direct(5, 6), 4);
        assert_eq!(phi_direct(7, 1), 3);
        assert_eq!(phi_mobius(5, 1), 1);
        assert_eq!(phi_mobius(5, 6), 4);
        assert_eq!(phi_mobius(7, 1), 3);
        assert_eq!(phi_direct(101, 1), 6);
    }

    #[test]
    fn lower_bound_examples() {
        let (b22, _) = lower_bounds(5, 6);
        let root = 5f64.sqrt();
        assert!((b22 - (2.0 * root - 2.0 * root / 6.0 * 4.0 - 9.0)).abs() < 1e-12);
        assert!(b22 < 0.0);
        let (_, b23) = lower_bounds(101, 1);
        assert!((b23 - (101f64.sqrt() * 32.0 / 51.0 - 4.0)).abs() < 1e-12);
        assert!((b23 - 2.306).abs() < 1e-3);
        for p in [5u64, 7, 101, 997] {
            let (b22, _) = lower_bounds(p, p + 1);
            assert!(b22 <= phi_direct(p, p + 1) as f64);
            assert_eq!(phi_direct(p, p + 1), isqrt(4 * p));
        }
    }

    #[test]
    fn class_census_examples() {
        let row = class_census(5, 6).unwrap();
        assert_eq!((row.total_classes, row.s_classes), (Some(12), Some(12)));
        let row = class_census(5, 1).unwrap();
        assert_eq!(row.s_classes, Some(2));
        let mut t = class_traces(5).unwrap();
        t.sort_unstable();
        assert_eq!(t, vec![-4, -3, -2, -2, -1, 0, 0, 1, 2, 2, 3, 4]);
        for d in 1..=7 {
            let row = class_census(5, d).unwrap();
            assert!(row.s_classes.unwrap() >= 2 * row.phi_direct);
        }
        assert_eq!(
            class_census(1009, 1),
            Err(CensusError::OutOfRange { p: 1009, max: 1000 })
        );
        assert_eq!(class_census(9, 1), Err(CensusError::BadPrime(9)));
    }

    #[test]
    fn class_enumeration_matches_orbit_sets() {
        for p in [5u64, 7, 11, 13, 17, 19, 23] {
            let slow = classes_by_orbit_sets(p);
            let mut slow_traces: Vec<i64> = slow.iter().map(|(_, t)| *t).collect();
            let mut fast = class_traces(p).unwrap();
            slow_traces.sort_unstable();
            fast.sort_unstable();
            assert_eq!(fast, slow_traces, "p = {p}");
            let covered: usize = slow.iter().map(|(o, _)| o.len()).sum();
            let smooth = (0..p * p).filter(|&i| !is_singular(p, i / p, i % p)).count();
            assert_eq!(covered, smooth);
        }
    }

    #[test]
    fn class_traces_symmetric() {
        for p in (5..=200).filter(|&p| is_prime_u64(p)) {
            let mut t = class_traces(p).unwrap();
            assert_eq!(t.iter().sum::<i64>(), 0, "p = {p}");
            let mut neg: Vec<i64> = t.iter().map(|x| -x).collect();
            t.sort_unstable();
            neg.sort_unstable();
            assert_eq!(t, neg);
        }
    }

    #[test]
    fn signed_trace_doubling() {
        for p in (5..2000).filter(|&p| is_prime_u64(p)) {
            let top = isqrt(4 * p) as i64;
            for d in [1, 2, 3, 5, 10, p + 1] {
                let signed = (-top..=top)
                    .filter(|&a| a != 0 && gcd(a.unsigned_abs(), p + 1) <= d)
                    .count() as u64;
                assert_eq!(signed, 2 * phi_direct(p, d));
            }
        }
    }

    #[test]
    fn nonresidue_examples() {
        assert_eq!(nonresidue_search(5, 7, 100).unwrap().d_min, 2);
        assert_eq!(nonresidue_search(7, 5, 100).unwrap().d_min, 6);
        assert_eq!(nonresidue_search(3, 1, 100).unwrap().d_min, 2);
        let r = nonresidue_search(7, 5, 100).unwrap();
        assert!((r.ratio - 6.0 / 35f64.ln().powi(2)).abs() < 1e-12);
        assert_eq!(
            nonresidue_search(7, 5, 5),
            Err(CensusError::NotFoundWithinCap { p: 7, m: 5, cap: 5 })
        );
        assert!(nonresidue_search(9, 5, 10).is_err());
        assert!(nonresidue_search(7, 14, 10).is_err());
        assert!(nonresidue_search(7, 21, 10).is_err());
    }

    #[test]
    fn primorial_examples() {
        assert_eq!(primorial_check(1), Ok(true));
        assert_eq!(primorial_check(13), Ok(true));
        assert_eq!(primorial_check(31), Ok(true));
        // 2 * 3 * 5 * 7 = 210 < 4^4 = 256
        assert_eq!(primorial_check(4), Ok(false));
        assert!(primorial_check(0).is_err());
        assert!(primorial_check(65).is_err());
    }

    #[test]
    fn phi_lower_examples() {
        assert_eq!(phi_lower_check(6), Ok(true));
        assert_eq!(phi_lower_check(30), Ok(true));
        assert_eq!(phi_lower_check(3), Ok(true));
        assert!(phi_lower_check(2).is_err());
    }

    #[test]
    fn sig6_formatting() {
        assert_eq!(format_sig6(2.306_084_1), "2.30608");
        assert_eq!(format_sig6(-7.453_559_9), "-7.45356");
        assert_eq!(format_sig6(0.0), "0");
        assert_eq!(format_sig6(100.0), "100");
        assert_eq!(format_sig6(1_234_567.0), "1.23457e+06");
        assert_eq!(format_sig6(999_999.7), "1e+06");
        assert_eq!(format_sig6(0.000_123_456_7), "0.000123457");
        assert_eq!(format_sig6(0.000_012_345_67), "1.23457e-05");
        assert_eq!(format_sig6(-0.5), "-0.5");
    }

    #[test]
    fn sweep_and_csv() {
        let rows = census_sweep(5, 7, &[1], 1000).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!((rows[0].p, rows[0].phi_direct, rows[0].phi_mobius), (5, 1, 1));
        assert_eq!((rows[1].p, rows[1].phi_direct, rows[1].phi_mobius), (7, 3, 3));
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert!(lines[1].starts_with("5,1,1,1,"));
        assert!(lines[2].starts_with("7,1,3,3,"));

        let rows = census_sweep(5, 5, &[6], 1000).unwrap();
        assert_eq!(rows[0].s_classes, Some(12));
        assert_eq!(rows[0].total_classes, Some(12));

        let rows = census_sweep(5, 7, &[1], 5).unwrap();
        assert_eq!(rows[1].s_classes, None);
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().lines().nth(2).unwrap().ends_with(",,"));

        let rows = census_sweep(24, 28, &[1], 1000).unwrap();
        assert!(rows.is_empty());
        assert!(census_sweep(10, 5, &[1], 0).is_err());
        assert!(census_sweep(5, 10, &[0], 0).is_err());

        let rows = census_sweep(5, 50, &[3, 1, 3], 1000).unwrap();
        assert!(rows.windows(2).all(|w| (w[0].p, w[0].d_bound) < (w[1].p, w[1].d_bound)));
        assert!(rows.iter().all(CensusRow::is_consistent));
    }
}
