//! Full-rank Z-lattices in B, orders, Eichler towers and right ideal class sets.

pub mod classes;
pub mod enumerate;
pub mod mass;
pub mod order;

use num_integer::Integer;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::arith::{self, q, Q};
use crate::error::{invalid, Result};
use crate::quaternion::Quaternion;

pub use classes::{classify_right_ideal, right_class_set, RightIdealClassSet};
pub use order::{eichler_order_tower, EichlerTower, Order};

/// Lattice (1/den)·span(rows); rows are in row-style Hermite normal form.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct QuatLattice {
    pub a: i64,
    pub b: i64,
    pub den: i128,
    pub rows: [[i128; 4]; 4],
}

/// Incremental HNF over Z^4. Rows are indexed by pivot column. Returns None on i128 overflow.
struct Echelon {
    rows: [Option<[i128; 4]>; 4],
}

impl Echelon {
    fn new() -> Self {
        Echelon { rows: [None; 4] }
    }

    fn insert(&mut self, mut v: [i128; 4]) -> Option<()> {
        for c in 0..4 {
            if v[c] == 0 {
                continue;
            }
            match self.rows[c] {
                None => {
                    if v[c] < 0 {
                        v = v.map(|x| -x);
                    }
                    self.rows[c] = Some(v);
                    return self.reduce();
                }
                Some(r) => {
                    let e = r[c].extended_gcd(&v[c]);
                    let (s, t, g) = (e.x, e.y, e.gcd);
                    let (ra, va) = (r[c] / g, v[c] / g);
                    let mut nr = [0i128; 4];
                    let mut nv = [0i128; 4];
                    for k in 0..4 {
                        nr[k] = s.checked_mul(r[k])?.checked_add(t.checked_mul(v[k])?)?;
                        nv[k] = ra.checked_mul(v[k])?.checked_sub(va.checked_mul(r[k])?)?;
                    }
                    if nr[c] < 0 {
                        nr = nr.map(|x| -x);
                    }
                    self.rows[c] = Some(nr);
                    v = nv;
                    self.reduce()?;
                    // keep the carried vector small using the rows below c
                    for j in c + 1..4 {
                        if let Some(rj) = self.rows[j] {
                            let f = Integer::div_floor(&v[j], &rj[j]);
                            if f != 0 {
                                for k in 0..4 {
                                    v[k] = v[k].checked_sub(f.checked_mul(rj[k])?)?;
                                }
                            }
                        }
                    }
                }
            }
        }
        self.reduce()
    }

    fn reduce(&mut self) -> Option<()> {
        for i in (0..4).rev() {
            let Some(mut ri) = self.rows[i] else { continue };
            for j in i + 1..4 {
                if let Some(rj) = self.rows[j] {
                    let f = Integer::div_floor(&ri[j], &rj[j]);
                    if f != 0 {
                        for k in 0..4 {
                            ri[k] = ri[k].checked_sub(f.checked_mul(rj[k])?)?;
                        }
                    }
                }
            }
            self.rows[i] = Some(ri);
        }
        Some(())
    }

    fn full(&self) -> Option<[[i128; 4]; 4]> {
        Some([self.rows[0]?, self.rows[1]?, self.rows[2]?, self.rows[3]?])
    }
}

/// Same reduction over BigInt, used when the i128 path overflows.
fn big_hnf(vs: &[[i128; 4]]) -> Option<[[i128; 4]; 4]> {
    use num_bigint::BigInt;
    let mut rows: [Option<[BigInt; 4]>; 4] = Default::default();
    let reduce = |rows: &mut [Option<[BigInt; 4]>; 4]| {
        for i in (0..4).rev() {
            let Some(mut ri) = rows[i].clone() else { continue };
            for j in i + 1..4 {
                if let Some(rj) = &rows[j] {
                    let f = ri[j].div_floor(&rj[j]);
                    if !f.is_zero() {
                        for k in 0..4 {
                            ri[k] -= &f * &rj[k];
                        }
                    }
                }
            }
            rows[i] = Some(ri);
        }
    };
    for v0 in vs {
        let mut v: [BigInt; 4] = v0.map(BigInt::from);
        for c in 0..4 {
            if v[c].is_zero() {
                continue;
            }
            match rows[c].clone() {
                None => {
                    if v[c] < BigInt::zero() {
                        v = v.map(|x| -x);
                    }
                    rows[c] = Some(v);
                    break;
                }
                Some(r) => {
                    let e = r[c].extended_gcd(&v[c]);
                    let (ra, va) = (&r[c] / &e.gcd, &v[c] / &e.gcd);
                    let mut nr: [BigInt; 4] = Default::default();
                    let mut nv: [BigInt; 4] = Default::default();
                    for k in 0..4 {
                        nr[k] = &e.x * &r[k] + &e.y * &v[k];
                        nv[k] = &ra * &v[k] - &va * &r[k];
                    }
                    if nr[c] < BigInt::zero() {
                        nr = nr.map(|x| -x);
                    }
                    rows[c] = Some(nr);
                    v = nv;
                }
            }
        }
        reduce(&mut rows);
    }
    let mut out = [[0i128; 4]; 4];
    for i in 0..4 {
        let r = rows[i].as_ref()?;
        for k in 0..4 {
            out[i][k] = i128::try_from(&r[k]).ok()?;
        }
    }
    Some(out)
}

impl QuatLattice {
    /// Lattice spanned by the given quaternions; errors if not of full rank.
    pub fn from_generators(gens: &[Quaternion]) -> Result<Self> {
        if gens.is_empty() {
            return invalid("empty generator list");
        }
        let (a, b) = (gens[0].a, gens[0].b);
        let den = gens.iter().fold(1i128, |acc, g| arith::lcm(acc, g.denom()));
        let vs: Vec<[i128; 4]> = gens.iter().map(|g| g.c.map(|x| (x * q(den)).to_integer())).collect();
        let mut ech = Echelon::new();
        let fast = vs.iter().try_for_each(|v| ech.insert(*v)).and_then(|_| ech.full());
        let rows = match fast {
            Some(r) => r,
            None => match big_hnf(&vs) {
                Some(r) => r,
                None => return invalid("generators do not span a full-rank lattice"),
            },
        };
        Ok(Self::normalize(a, b, den, rows))
    }

    fn normalize(a: i64, b: i64, den: i128, rows: [[i128; 4]; 4]) -> Self {
        let mut g = den;
        for r in &rows {
            for x in r {
                g = g.gcd(x);
            }
        }
        let rows = rows.map(|r| r.map(|x| x / g));
        QuatLattice { a, b, den: den / g, rows }
    }

    pub fn basis(&self) -> [Quaternion; 4] {
        self.rows.map(|r| Quaternion::new(self.a, self.b, r.map(|x| Q::new(x, self.den))))
    }

    /// Integer coordinates of x in the HNF basis, if x lies in the lattice.
    pub fn coords(&self, x: &Quaternion) -> Option<[i128; 4]> {
        let r = self.rational_coords(x);
        if r.iter().all(|c| c.is_integer()) {
            Some(r.map(|c| c.to_integer()))
        } else {
            None
        }
    }

    /// Rational coordinates of x in the HNF basis.
    pub fn rational_coords(&self, x: &Quaternion) -> [Q; 4] {
        let mut v: [Q; 4] = x.c.map(|c| c * q(self.den));
        let mut out = [Q::zero(); 4];
        for c in 0..4 {
            let coef = v[c] / q(self.rows[c][c]);
            out[c] = coef;
            for k in c..4 {
                v[k] -= coef * q(self.rows[c][k]);
            }
        }
        out
    }

    pub fn contains(&self, x: &Quaternion) -> bool {
        self.coords(x).is_some()
    }

    pub fn contains_lattice(&self, other: &QuatLattice) -> bool {
        other.basis().iter().all(|x| self.contains(x))
    }

    pub fn from_coords(&self, c: &[i128; 4]) -> Quaternion {
        let mut v = [0i128; 4];
        for r in 0..4 {
            for k in 0..4 {
                v[k] += c[r] * self.rows[r][k];
            }
        }
        Quaternion::new(self.a, self.b, v.map(|x| Q::new(x, self.den)))
    }

    /// Covolume relative to Z<1,i,j,ij>.
    pub fn covolume(&self) -> Q {
        let d: i128 = (0..4).map(|k| self.rows[k][k]).product();
        Q::new(d, self.den.pow(4))
    }

    /// Index [self : other] for other ⊂ self (as a rational in general).
    pub fn index_in(&self, sup: &QuatLattice) -> Q {
        self.covolume() / sup.covolume()
    }

    pub fn sum(&self, other: &QuatLattice) -> QuatLattice {
        let mut g: Vec<Quaternion> = self.basis().to_vec();
        g.extend(other.basis());
        QuatLattice::from_generators(&g).unwrap()
    }

    pub fn product(&self, other: &QuatLattice) -> QuatLattice {
        let mut g = Vec::with_capacity(16);
        for x in self.basis() {
            for y in other.basis() {
                g.push(x * y);
            }
        }
        QuatLattice::from_generators(&g).unwrap()
    }

    pub fn left_mul(&self, x: &Quaternion) -> QuatLattice {
        let g: Vec<Quaternion> = self.basis().iter().map(|e| *x * *e).collect();
        QuatLattice::from_generators(&g).unwrap()
    }

    pub fn right_mul(&self, x: &Quaternion) -> QuatLattice {
        let g: Vec<Quaternion> = self.basis().iter().map(|e| *e * *x).collect();
        QuatLattice::from_generators(&g).unwrap()
    }

    pub fn scale(&self, s: Q) -> QuatLattice {
        let g: Vec<Quaternion> = self.basis().iter().map(|e| e.scale(s)).collect();
        QuatLattice::from_generators(&g).unwrap()
    }

    pub fn conj(&self) -> QuatLattice {
        let g: Vec<Quaternion> = self.basis().iter().map(|e| e.conj()).collect();
        QuatLattice::from_generators(&g).unwrap()
    }

    /// Gram matrix of nrd: G[k][l] = trd(e_k conj(e_l))/2, so nrd(x) = x^T G x.
    pub fn gram(&self) -> [[Q; 4]; 4] {
        let e = self.basis();
        let mut g = [[Q::zero(); 4]; 4];
        for k in 0..4 {
            for l in 0..4 {
                g[k][l] = e[k].pair(&e[l]) / q(2);
            }
        }
        g
    }

    /// Reduced norm of the lattice: the gcd of nrd over its elements.
    pub fn nrd(&self) -> Q {
        let e = self.basis();
        let mut acc = Q::zero();
        for k in 0..4 {
            acc = q_gcd(acc, e[k].nrd());
            for l in k + 1..4 {
                acc = q_gcd(acc, e[k].pair(&e[l]));
            }
        }
        acc
    }

    /// The standard order Z<1,i,j,ij>.
    pub fn standard(a: i64, b: i64) -> QuatLattice {
        QuatLattice { a, b, den: 1, rows: [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]] }
    }

    pub fn is_order(&self) -> bool {
        let one = Quaternion::one(self.a, self.b);
        if !self.contains(&one) {
            return false;
        }
        let e = self.basis();
        e.iter().all(|x| e.iter().all(|y| self.contains(&(*x * *y))))
    }

    /// Right order {x : L x ⊂ L}, computed as conj(L)·L / nrd(L) (valid for invertible lattices).
    pub fn right_order(&self) -> QuatLattice {
        self.conj().product(self).scale(Q::one() / self.nrd())
    }

    pub fn left_order(&self) -> QuatLattice {
        self.product(&self.conj()).scale(Q::one() / self.nrd())
    }

    /// L^{-1} = conj(L)/nrd(L).
    pub fn inverse(&self) -> QuatLattice {
        self.conj().scale(Q::one() / self.nrd())
    }

    pub fn to_json(&self) -> LatticeJson {
        LatticeJson { den: self.den.to_string(), rows: self.rows.map(|r| r.map(|x| x.to_string())) }
    }
}

#[derive(Serialize, Clone, Debug)]
pub struct LatticeJson {
    pub den: String,
    pub rows: [[String; 4]; 4],
}

pub fn q_gcd(x: Q, y: Q) -> Q {
    if x.is_zero() && y.is_zero() {
        return Q::zero();
    }
    let n = x.numer().gcd(y.numer());
    let d = x.denom().lcm(y.denom());
    Q::new(n, d)
}
