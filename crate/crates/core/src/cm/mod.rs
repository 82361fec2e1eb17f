//! Imaginary quadratic fields, ring class groups, extended Galois groups and anticyclotomic layers.

pub mod anticyc;
pub mod forms;
pub mod galois;
pub mod ideals;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::arith::{self, kronecker};
use crate::error::{invalid, Result};
use forms::{reduced_forms, Form};
use ideals::{KElt, QLattice};

pub use anticyc::{anticyclotomic_layer, AnticycLayer};
pub use galois::{extended_galois_group, ExtendedGaloisGroup, GalElt};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ImagQuadField {
    pub d_k: i128,
    /// K = Q(√-D)
    pub d: i128,
}

pub fn is_fundamental(d: i128) -> bool {
    if d >= 0 {
        return false;
    }
    let m = d.rem_euclid(4);
    if m == 1 {
        arith::is_squarefree(d.unsigned_abs() as u64)
    } else if m == 0 {
        let e = d / 4;
        let r = e.rem_euclid(4);
        (r == 2 || r == 3) && arith::is_squarefree(e.unsigned_abs() as u64)
    } else {
        false
    }
}

impl ImagQuadField {
    pub fn new(d_k: i128) -> Result<Self> {
        if !is_fundamental(d_k) {
            return invalid(format!("{d_k} is not a negative fundamental discriminant"));
        }
        let d = if d_k.rem_euclid(4) == 0 { -d_k / 4 } else { -d_k };
        Ok(ImagQuadField { d_k, d })
    }

    /// Number of units of O_K.
    pub fn units(&self) -> i128 {
        match self.d_k {
            -3 => 6,
            -4 => 4,
            _ => 2,
        }
    }

    /// 1 if √D_K = √-D, 2 if √D_K = 2√-D.
    pub fn sqrt_scale(&self) -> i128 {
        if self.d_k.rem_euclid(4) == 0 {
            2
        } else {
            1
        }
    }

    pub fn omega(&self) -> KElt {
        KElt::int(self.d_k, 0, 1)
    }

    /// Splitting behaviour of a prime: 1 split, -1 inert, 0 ramified.
    pub fn kronecker(&self, ell: u64) -> i32 {
        kronecker(self.d_k, ell as i128)
    }
}

/// Brute-force splitting type: counts roots of x² ≡ D_K modulo 4ℓ.
fn splitting_brute(dk: i128, ell: i128) -> i32 {
    let m = 4 * ell;
    let roots = (0..m).filter(|x| (x * x - dk).rem_euclid(m) == 0).count();
    if dk.rem_euclid(ell) == 0 {
        0
    } else if roots > 0 {
        1
    } else {
        -1
    }
}

#[derive(Serialize, Clone, Debug)]
pub struct HeegnerReport {
    pub holds: bool,
    /// prime → "split" | "inert" | "ramified"
    pub primes: BTreeMap<u64, String>,
}

pub fn check_heegner_hypothesis(n_plus: u64, n_minus: u64, k: &ImagQuadField, p: u64) -> Result<HeegnerReport> {
    let n = (n_plus * n_minus * p) as i128;
    for ell in arith::prime_divisors(n as u64) {
        if k.d_k.rem_euclid(ell as i128) == 0 {
            return invalid(format!("D_K = {} is not prime to Np (shares the prime {ell})", k.d_k));
        }
    }
    let mut primes = BTreeMap::new();
    let mut holds = true;
    let name = |s: i32| match s {
        1 => "split",
        -1 => "inert",
        _ => "ramified",
    };
    for ell in arith::prime_divisors(n_plus) {
        let s = k.kronecker(ell);
        debug_assert_eq!(s, splitting_brute(k.d_k, ell as i128));
        holds &= s == 1;
        primes.insert(ell, name(s).to_string());
    }
    for ell in arith::prime_divisors(n_minus) {
        let s = k.kronecker(ell);
        debug_assert_eq!(s, splitting_brute(k.d_k, ell as i128));
        holds &= s == -1;
        primes.insert(ell, name(s).to_string());
    }
    Ok(HeegnerReport { holds, primes })
}

/// Pic(O_c) as reduced forms of discriminant c² D_K.
#[derive(Clone, Debug)]
pub struct RingClassGroup {
    pub k: ImagQuadField,
    pub conductor: i128,
    pub disc: i128,
    /// Sorted with the principal form first.
    pub forms: Vec<Form>,
    index: BTreeMap<Form, usize>,
    table: Vec<Vec<usize>>,
}

impl RingClassGroup {
    pub fn len(&self) -> usize {
        self.forms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forms.is_empty()
    }

    pub fn index_of(&self, f: &Form) -> usize {
        self.index[&f.reduce()]
    }

    pub fn mul(&self, x: usize, y: usize) -> usize {
        self.table[x][y]
    }

    pub fn inv(&self, x: usize) -> usize {
        self.index_of(&self.forms[x].inverse())
    }

    pub fn pow(&self, x: usize, e: u64) -> usize {
        self.index_of(&self.forms[x].pow(e))
    }

    pub fn order_of(&self, x: usize) -> u64 {
        let mut k = 1;
        let mut y = x;
        while y != 0 {
            y = self.mul(y, x);
            k += 1;
        }
        k
    }

    /// Class of an invertible O_c-ideal.
    pub fn class_of(&self, l: &QLattice) -> usize {
        self.index_of(&l.form(self.conductor))
    }

    pub fn ideal(&self, x: usize) -> QLattice {
        QLattice::from_form(self.k.d_k, self.conductor, &self.forms[x])
    }

    /// Image of a class in Pic(O_{c'}) for c' | c, through a representative prime to c.
    pub fn project(&self, x: usize, lower: &RingClassGroup, rep: &QLattice) -> usize {
        debug_assert_eq!(self.conductor % lower.conductor, 0);
        let _ = x;
        let o = QLattice::order(self.k.d_k, lower.conductor);
        lower.class_of(&o.mul(rep))
    }
}

pub fn ring_class_group(k: &ImagQuadField, c: i128) -> Result<RingClassGroup> {
    if c < 1 {
        return invalid("conductor must be positive");
    }
    let disc = c * c * k.d_k;
    let mut forms = reduced_forms(disc);
    let e = Form::principal(disc).reduce();
    forms.retain(|f| *f != e);
    forms.insert(0, e);
    let index: BTreeMap<Form, usize> = forms.iter().enumerate().map(|(i, f)| (*f, i)).collect();
    let table = forms.iter().map(|f| forms.iter().map(|g| index[&f.compose(g)]).collect()).collect();
    Ok(RingClassGroup { k: *k, conductor: c, disc, forms, index, table })
}

/// Classical formula h(O_c) = h_K c / [O_K^× : O_c^×] ∏_{ℓ | c} (1 - (D_K/ℓ)/ℓ), with h_K from
/// the Dirichlet class number formula.
pub fn class_number_formula(d_k: i128, c: i128) -> i128 {
    let dabs = -d_k;
    let s: i128 = (1..dabs).map(|n| kronecker(d_k, n) as i128 * n).sum();
    let w = match d_k {
        -3 => 6,
        -4 => 4,
        _ => 2,
    };
    let hk = -(w * s) / (2 * dabs);
    if c == 1 {
        return hk;
    }
    let mut num = hk * c;
    let mut den = 1i128;
    for ell in arith::prime_divisors(c as u64) {
        let l = ell as i128;
        num *= l - kronecker(d_k, l) as i128;
        den *= l;
    }
    num / den / (w / 2)
}
