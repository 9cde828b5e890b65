//! Short Weierstrass curves `y^2 = x^3 + Ax + B` over `Z/nZ`.
//!
//! Every operation that takes a gcd against `n` can stumble on a proper
//! divisor. Those outcomes are surfaced as factors, never swallowed.

use num_integer::Integer;
use num_traits::{One, Zero};
use rand::Rng;
use thiserror::Error;

use crate::arith::{random_below, Natural};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CurveError {
    #[error("twist parameter shares the factor {0} with the modulus")]
    SharedFactor(Natural),
    #[error("no admissible curve after {0} draws")]
    SampleCapExceeded(usize),
    #[error("curves over different moduli")]
    ModulusMismatch,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Curve {
    modulus: Natural,
    a: Natural,
    b: Natural,
}

impl Curve {
    /// Coefficients are reduced into `[0, n)`.
    pub fn new(modulus: Natural, a: Natural, b: Natural) -> Self {
        let a = a % &modulus;
        let b = b % &modulus;
        Curve { modulus, a, b }
    }

    pub fn modulus(&self) -> &Natural {
        &self.modulus
    }

    pub fn a(&self) -> &Natural {
        &self.a
    }

    pub fn b(&self) -> &Natural {
        &self.b
    }

    /// `4A^3 + 27B^2 mod n`.
    pub fn discriminant(&self) -> Natural {
        let n = &self.modulus;
        let a3 = cube_mod(&self.a, n);
        let b2 = &self.b * &self.b % n;
        (a3 * 4u32 + b2 * 27u32) % n
    }

    pub fn screen(&self) -> ScreenResult {
        classify_gcd(self.discriminant().gcd(&self.modulus), &self.modulus)
            .map_or(ScreenResult::Smooth, |r| r)
    }

    /// Quadratic twist `(A d^2, B d^3)`.
    pub fn twist(&self, d: &Natural) -> Result<Curve, CurveError> {
        let n = &self.modulus;
        let g = d.gcd(n);
        if !g.is_one() {
            return Err(CurveError::SharedFactor(g));
        }
        let d2 = (d * d) % n;
        let d3 = (&d2 * d) % n;
        Ok(Curve {
            modulus: n.clone(),
            a: (&self.a * d2) % n,
            b: (&self.b * d3) % n,
        })
    }
}

impl std::fmt::Display for Curve {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "y^2 = x^3 + {}x + {} (mod {})", self.a, self.b, self.modulus)
    }
}

fn cube_mod(x: &Natural, n: &Natural) -> Natural {
    (x * x % n) * x % n
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScreenResult {
    Smooth,
    FactorFound(Natural),
    Singular,
}

// g = 1 -> None, 1 < g < n -> FactorFound, g = n -> Singular.
fn classify_gcd(g: Natural, n: &Natural) -> Option<ScreenResult> {
    if g.is_one() {
        None
    } else if &g == n || g.is_zero() {
        Some(ScreenResult::Singular)
    } else {
        Some(ScreenResult::FactorFound(g))
    }
}

/// Screen `(A, B)` modulo `n` by `gcd(4A^3 + 27B^2, n)`.
pub fn screen(n: &Natural, a: &Natural, b: &Natural) -> ScreenResult {
    Curve::new(n.clone(), a.clone(), b.clone()).screen()
}

/// Outcome of the isomorphism-relatedness test between two curves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Relation {
    Unrelated,
    /// Related modulo every prime of `n`: isomorphic or a quadratic twist.
    Related,
    FactorFound(Natural),
}

/// `g = gcd(B2^2 A1^3 - A2^3 B1^2, n)`, classified.
///
/// Isomorphic curves `(A2, B2) = (l^4 A1, l^6 B1)` make the expression
/// vanish; so do quadratic twists.
pub fn isomorphic_gcd(c1: &Curve, c2: &Curve) -> Result<Relation, CurveError> {
    if c1.modulus != c2.modulus {
        return Err(CurveError::ModulusMismatch);
    }
    let n = &c1.modulus;
    let lhs = (&c2.b * &c2.b % n) * cube_mod(&c1.a, n) % n;
    let rhs = (&c1.b * &c1.b % n) * cube_mod(&c2.a, n) % n;
    let diff = if lhs >= rhs { lhs - rhs } else { lhs + n - rhs };
    let g = diff.gcd(n);
    Ok(if g.is_one() {
        Relation::Unrelated
    } else if &g == n {
        Relation::Related
    } else {
        Relation::FactorFound(g)
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sample {
    Curve(Curve),
    FactorFound(Natural),
}

/// Default redraw cap for [`sample_curve`].
pub fn default_redraw_cap(used: usize) -> usize {
    64 * used + 64
}

/// Draw `(A, B)` uniformly from `[0, n)^2` until the curve is smooth and
/// unrelated to every curve in `used`.
///
/// A proper divisor of `n` met on the way (in `A`, `B`, the discriminant or a
/// relatedness gcd) is returned immediately.
pub fn sample_curve<R: Rng + ?Sized>(
    n: &Natural,
    rng: &mut R,
    used: &[Curve],
    redraw_cap: Option<usize>,
) -> Result<Sample, CurveError> {
    let cap = redraw_cap.unwrap_or_else(|| default_redraw_cap(used.len()));
    'draw: for _ in 0..cap {
        let a = random_below(rng, n);
        let b = random_below(rng, n);
        for coeff in [&a, &b] {
            if let Some(ScreenResult::FactorFound(f)) = classify_gcd(coeff.gcd(n), n) {
                return Ok(Sample::FactorFound(f));
            }
        }
        let curve = Curve::new(n.clone(), a, b);
        match curve.screen() {
            ScreenResult::Smooth => {}
            ScreenResult::FactorFound(f) => return Ok(Sample::FactorFound(f)),
            ScreenResult::Singular => continue,
        }
        for prev in used {
            match isomorphic_gcd(prev, &curve)? {
                Relation::Unrelated => {}
                Relation::Related => continue 'draw,
                Relation::FactorFound(f) => return Ok(Sample::FactorFound(f)),
            }
        }
        return Ok(Sample::Curve(curve));
    }
    Err(CurveError::SampleCapExceeded(cap))
}
