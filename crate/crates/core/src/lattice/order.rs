use num_traits::{One, Zero};
use serde::Serialize;

use crate::arith::{self, mod_inv, mod_mul, modp, q, Q};
use crate::error::{internal, invalid, Result};
use crate::lattice::QuatLattice;
use crate::quaternion::{PadicSplitting, Quaternion, QuaternionAlgebra};

#[derive(Clone, Debug, Serialize)]
pub struct Order {
    #[serde(skip)]
    pub lattice: QuatLattice,
    pub level: u64,
    pub is_eichler: bool,
    pub discriminant: u64,
}

/// Reduced discriminant sqrt|det(trd(e_k e_l))| of a lattice.
pub fn reduced_discriminant(l: &QuatLattice) -> Q {
    let e = l.basis();
    let mut m = [[Q::zero(); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            m[i][j] = (e[i] * e[j]).trd();
        }
    }
    let d = det4(&m);
    let d = if d < Q::zero() { -d } else { d };
    // d is a perfect square of a rational for lattices coming from orders
    let n = arith::isqrt(*d.numer());
    let dd = arith::isqrt(*d.denom());
    Q::new(n, dd)
}

pub fn det4(m: &[[Q; 4]; 4]) -> Q {
    let mut a = *m;
    let mut det = Q::one();
    for c in 0..4 {
        let Some(p) = (c..4).find(|&r| !a[r][c].is_zero()) else { return Q::zero() };
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        det *= a[c][c];
        for r in c + 1..4 {
            let f = a[r][c] / a[c][c];
            for k in c..4 {
                a[r][k] -= f * a[c][k];
            }
        }
    }
    det
}

fn is_integral(x: &Quaternion) -> bool {
    x.trd().is_integer() && x.nrd().is_integer()
}

/// Ring generated by `l` and `x`, if it stays integral.
fn ring_closure(l: &QuatLattice, x: &Quaternion) -> Option<QuatLattice> {
    let mut gens: Vec<Quaternion> = l.basis().to_vec();
    gens.push(*x);
    let mut cur = QuatLattice::from_generators(&gens).ok()?;
    for _ in 0..8 {
        let e = cur.basis();
        if !e.iter().all(is_integral) {
            return None;
        }
        let next = cur.sum(&cur.product(&cur));
        if next == cur {
            return Some(cur);
        }
        if !next.basis().iter().all(is_integral) {
            return None;
        }
        cur = next;
    }
    None
}

/// A maximal order, by saturating Z<1,i,j,ij> at primes dividing its discriminant.
pub fn maximal_order(alg: &QuaternionAlgebra) -> Result<Order> {
    let target = alg.discriminant();
    let mut o = QuatLattice::standard(alg.a, alg.b);
    loop {
        let d = reduced_discriminant(&o);
        if !d.is_integer() {
            return internal("non-integral discriminant during saturation");
        }
        let d = d.to_integer() as u64;
        if d == target {
            break;
        }
        let mut improved = false;
        for qp in arith::prime_divisors(d / target.max(1)) {
            let qp = qp as i128;
            let basis = o.basis();
            'cand: for c0 in 0..qp {
                for c1 in 0..qp {
                    for c2 in 0..qp {
                        for c3 in 0..qp {
                            if c0 + c1 + c2 + c3 == 0 {
                                continue;
                            }
                            let mut x = Quaternion::zero(alg.a, alg.b);
                            for (k, c) in [c0, c1, c2, c3].iter().enumerate() {
                                x = x + basis[k].scale(Q::new(*c, qp));
                            }
                            if !is_integral(&x) {
                                continue;
                            }
                            if let Some(bigger) = ring_closure(&o, &x) {
                                if bigger != o {
                                    o = bigger;
                                    improved = true;
                                    break 'cand;
                                }
                            }
                        }
                    }
                }
            }
            if improved {
                break;
            }
        }
        if !improved {
            return internal(format!("saturation stuck at discriminant {d}"));
        }
    }
    debug_assert!(o.is_order());
    Ok(Order { lattice: o, level: 1, is_eichler: true, discriminant: target })
}

/// Sublattice {x ∈ l : f(x) ≡ 0 mod n} for a Z-linear functional f given on the basis, n a prime power.
pub fn kernel_sublattice(l: &QuatLattice, values: &[i128; 4], p: i128, n: i128) -> Result<QuatLattice> {
    let basis = l.basis();
    let vals = values.map(|v| modp(v, n));
    if vals.iter().all(|v| *v == 0) {
        return Ok(l.clone());
    }
    let Some(k0) = (0..4).find(|&k| vals[k] % p != 0) else {
        return invalid("functional is not surjective mod p");
    };
    let inv = mod_inv(vals[k0], n).unwrap();
    let mut gens = vec![basis[k0].scale(q(n))];
    for k in 0..4 {
        if k != k0 {
            let s = mod_mul(vals[k], inv, n);
            gens.push(basis[k] - basis[k0].scale(q(s)));
        }
    }
    QuatLattice::from_generators(&gens)
}

/// Elements of `l` whose φ-image has lower-left entry ≡ 0 mod p^e.
pub fn lower_left_condition(l: &QuatLattice, sp: &PadicSplitting, e: u32) -> Result<QuatLattice> {
    let n = sp.p.pow(e);
    let mut vals = [0i128; 4];
    for (k, x) in l.basis().iter().enumerate() {
        let Some(m) = sp.image(x) else { return invalid("lattice not p-integral") };
        vals[k] = m[1][0];
    }
    kernel_sublattice(l, &vals, sp.p, n)
}

#[derive(Clone, Debug)]
pub struct EichlerTower {
    pub algebra: QuaternionAlgebra,
    pub n_plus: u64,
    pub p: u64,
    pub precision: u32,
    pub maximal: Order,
    /// R_0 ⊃ R_1 ⊃ ... ⊃ R_{m_max}
    pub orders: Vec<Order>,
    /// φ_p on R_0.
    pub split: PadicSplitting,
}

pub fn eichler_order_tower(alg: &QuaternionAlgebra, n_plus: u64, p: u64, m_max: u32, precision: u32) -> Result<EichlerTower> {
    let n_minus = alg.discriminant();
    if !arith::is_prime(p) {
        return invalid(format!("p = {p} is not prime"));
    }
    if n_plus == 0 {
        return invalid("N+ must be positive");
    }
    if (n_minus * n_plus).is_multiple_of(p) {
        return invalid(format!("p = {p} divides N = {}", n_minus * n_plus));
    }
    if num_integer::gcd(n_plus, n_minus) != 1 {
        return invalid("N+ and N- are not coprime");
    }
    let maximal = maximal_order(alg)?;
    let mut r0 = maximal.lattice.clone();
    for (ql, e) in arith::factor(n_plus) {
        let sp = PadicSplitting::for_order(alg, &maximal.lattice, ql, e)?;
        r0 = lower_left_condition(&r0, &sp, e)?;
    }
    let precision = precision.max(m_max + 1);
    let split = PadicSplitting::for_order(alg, &r0, p, precision)?;
    let mut orders = vec![Order { lattice: r0.clone(), level: n_plus, is_eichler: true, discriminant: n_minus * n_plus }];
    for m in 1..=m_max {
        let rm = lower_left_condition(&r0, &split, m)?;
        let level = n_plus * p.pow(m);
        orders.push(Order { lattice: rm, level, is_eichler: true, discriminant: n_minus * level });
    }
    for o in &orders {
        if !o.lattice.is_order() {
            return internal("tower member is not an order");
        }
        if reduced_discriminant(&o.lattice) != q(o.discriminant as i128) {
            return internal("tower member has the wrong discriminant");
        }
    }
    Ok(EichlerTower { algebra: alg.clone(), n_plus, p, precision, maximal, orders, split })
}

impl EichlerTower {
    pub fn n(&self) -> u64 {
        self.algebra.discriminant() * self.n_plus
    }

    pub fn order(&self, m: u32) -> &Order {
        &self.orders[m as usize]
    }

    pub fn m_max(&self) -> u32 {
        self.orders.len() as u32 - 1
    }

    /// a-coordinate of φ_p(x) mod p^m for p-integral x.
    pub fn a_coord(&self, x: &Quaternion, m: u32) -> Option<i128> {
        let pm = (self.p as i128).pow(m);
        self.split.image(x).map(|mat| modp(mat[0][0], pm))
    }
}
