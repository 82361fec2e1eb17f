//! Rational definite quaternion algebras (a,b/Q) and their elements.

pub mod hilbert;
pub mod splitting;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};
use serde::Serialize;

use crate::arith::{self, q, q_str, Q};
use crate::error::{invalid, Result};

pub use hilbert::hilbert_symbol;
pub use splitting::PadicSplitting;

/// Element t + x i + y j + z ij of (a,b/Q).
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Quaternion {
    pub a: i64,
    pub b: i64,
    pub c: [Q; 4],
}

impl Quaternion {
    pub fn new(a: i64, b: i64, c: [Q; 4]) -> Self {
        Quaternion { a, b, c }
    }

    pub fn from_ints(a: i64, b: i64, c: [i128; 4]) -> Self {
        Quaternion { a, b, c: c.map(q) }
    }

    pub fn scalar(a: i64, b: i64, s: Q) -> Self {
        Quaternion { a, b, c: [s, Q::zero(), Q::zero(), Q::zero()] }
    }

    pub fn one(a: i64, b: i64) -> Self {
        Self::scalar(a, b, Q::one())
    }

    pub fn zero(a: i64, b: i64) -> Self {
        Self::scalar(a, b, Q::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|x| x.is_zero())
    }

    pub fn conj(&self) -> Self {
        let [t, x, y, z] = self.c;
        Quaternion { c: [t, -x, -y, -z], ..*self }
    }

    pub fn nrd(&self) -> Q {
        let [t, x, y, z] = self.c;
        let a = q(self.a as i128);
        let b = q(self.b as i128);
        t * t - a * x * x - b * y * y + a * b * z * z
    }

    pub fn trd(&self) -> Q {
        self.c[0] * q(2)
    }

    pub fn scale(&self, s: Q) -> Self {
        Quaternion { c: self.c.map(|x| x * s), ..*self }
    }

    pub fn inverse(&self) -> Result<Self> {
        let n = self.nrd();
        if n.is_zero() {
            return invalid("inverse of a zero-norm quaternion");
        }
        Ok(self.conj().scale(Q::one() / n))
    }

    /// Bilinear form attached to nrd: trd(x conj(y)).
    pub fn pair(&self, other: &Self) -> Q {
        (*self * other.conj()).trd()
    }

    /// Common denominator of the coordinates.
    pub fn denom(&self) -> i128 {
        self.c.iter().fold(1i128, |acc, x| arith::lcm(acc, *x.denom()))
    }

    pub fn coords_str(&self) -> [String; 4] {
        self.c.map(|x| q_str(&x))
    }
}

impl Add for Quaternion {
    type Output = Quaternion;
    fn add(self, o: Quaternion) -> Quaternion {
        let mut c = self.c;
        for k in 0..4 {
            c[k] += o.c[k];
        }
        Quaternion { c, ..self }
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;
    fn sub(self, o: Quaternion) -> Quaternion {
        self + (-o)
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;
    fn neg(self) -> Quaternion {
        Quaternion { c: self.c.map(|x| -x), ..self }
    }
}

impl Mul for Quaternion {
    type Output = Quaternion;
    fn mul(self, o: Quaternion) -> Quaternion {
        debug_assert!(self.a == o.a && self.b == o.b, "mixed algebras");
        let a = q(self.a as i128);
        let b = q(self.b as i128);
        let [t1, x1, y1, z1] = self.c;
        let [t2, x2, y2, z2] = o.c;
        Quaternion {
            c: [
                t1 * t2 + a * x1 * x2 + b * y1 * y2 - a * b * z1 * z2,
                t1 * x2 + x1 * t2 - b * y1 * z2 + b * z1 * y2,
                t1 * y2 + y1 * t2 + a * x1 * z2 - a * z1 * x2,
                t1 * z2 + z1 * t2 + x1 * y2 - y1 * x2,
            ],
            ..self
        }
    }
}

impl fmt::Debug for Quaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for Quaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = ["", "i", "j", "k"];
        let mut first = true;
        for k in 0..4 {
            let x = self.c[k];
            if x.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if k == 0 {
                write!(f, "{}", x)?;
            } else if x == Q::one() {
                write!(f, "{}", names[k])?;
            } else {
                write!(f, "({}){}", x, names[k])?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl Serialize for Quaternion {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.coords_str().serialize(s)
    }
}

impl PartialOrd for Quaternion {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Quaternion {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.c.cmp(&other.c)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QuaternionAlgebra {
    pub a: i64,
    pub b: i64,
    pub ramified_finite: Vec<u64>,
    pub definite: bool,
}

impl QuaternionAlgebra {
    /// The algebra (a,b/Q) with its ramification computed from Hilbert symbols.
    pub fn new(a: i64, b: i64) -> Result<Self> {
        if a == 0 || b == 0 {
            return invalid("quaternion algebra parameters must be nonzero");
        }
        let mut bad = arith::prime_divisors((2 * a as i128 * b as i128).unsigned_abs() as u64);
        bad.sort();
        let ramified_finite = bad
            .into_iter()
            .filter(|&p| hilbert_symbol(q(a as i128), q(b as i128), Some(p)) == -1)
            .collect();
        let definite = hilbert_symbol(q(a as i128), q(b as i128), None) == -1;
        Ok(QuaternionAlgebra { a, b, ramified_finite, definite })
    }

    pub fn discriminant(&self) -> u64 {
        self.ramified_finite.iter().product()
    }

    pub fn elt(&self, c: [Q; 4]) -> Quaternion {
        Quaternion::new(self.a, self.b, c)
    }

    pub fn int(&self, c: [i128; 4]) -> Quaternion {
        Quaternion::from_ints(self.a, self.b, c)
    }

    pub fn one(&self) -> Quaternion {
        Quaternion::one(self.a, self.b)
    }

    pub fn scalar(&self, s: Q) -> Quaternion {
        Quaternion::scalar(self.a, self.b, s)
    }

    pub fn i(&self) -> Quaternion {
        self.int([0, 1, 0, 0])
    }

    pub fn j(&self) -> Quaternion {
        self.int([0, 0, 1, 0])
    }

    pub fn k(&self) -> Quaternion {
        self.int([0, 0, 0, 1])
    }

    pub fn is_ramified(&self, p: u64) -> bool {
        self.ramified_finite.contains(&p)
    }
}

/// Deterministic search for (a,b) ramified exactly at the primes of `n_minus` (and at infinity when definite).
pub fn algebra_for_discriminant(n_minus: u64, require_definite: bool) -> Result<QuaternionAlgebra> {
    if !arith::is_squarefree(n_minus) {
        return invalid(format!("N- = {n_minus} is not squarefree"));
    }
    let primes = arith::prime_divisors(n_minus);
    let definite = primes.len() % 2 == 1;
    if require_definite && !definite {
        return invalid(format!(
            "N- = {n_minus} has an even number of prime factors (even parity): no definite algebra"
        ));
    }
    let mut a_list = vec![-1i64];
    let mut r = 1u64;
    while a_list.len() < 16 {
        r = arith::next_prime(r);
        a_list.push(-(r as i64));
    }
    let b_max = 8 * n_minus as i64 + 64;
    for &a in &a_list {
        for bb in 1..=b_max {
            let (a, b) = if definite { (a, -bb) } else { (-a, bb) };
            let alg = QuaternionAlgebra::new(a, b)?;
            if alg.ramified_finite == primes && alg.definite == definite {
                return Ok(alg);
            }
        }
    }
    invalid(format!("no algebra found for N- = {n_minus} in the search window"))
}
