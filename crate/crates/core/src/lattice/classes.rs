//! Left R-ideal classes modulo right multiplication by B^×, by an ℓ-neighbor search.

use std::collections::{BTreeSet, VecDeque};

use num_traits::{One, Zero};
use serde::Serialize;

use crate::arith::{self, modp, q, Q};
use crate::error::{internal, invalid, Result};
use crate::lattice::enumerate::short_vectors;
use crate::lattice::mass::eichler_mass;
use crate::lattice::QuatLattice;
use crate::quaternion::Quaternion;

#[derive(Clone, Debug)]
pub struct RightIdealClassSet {
    pub order: QuatLattice,
    pub level: u64,
    pub n_minus: u64,
    /// Representatives I_0 = R, I_1, ...
    pub ideals: Vec<QuatLattice>,
    /// O_R(I_i).
    pub right_orders: Vec<QuatLattice>,
    /// Γ_i = O_R(I_i)^×, sorted.
    pub unit_groups: Vec<Vec<Quaternion>>,
    /// Prime used for the neighbor search.
    pub ell: u64,
}

#[derive(Serialize, Clone, Debug)]
pub struct ClassSummary {
    pub index: usize,
    pub unit_group_order: usize,
    pub ideal_norm: String,
}

impl RightIdealClassSet {
    pub fn len(&self) -> usize {
        self.ideals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ideals.is_empty()
    }

    /// Σ 1/#(Γ_i/±1).
    pub fn mass(&self) -> Q {
        self.unit_groups.iter().fold(Q::zero(), |acc, g| acc + Q::new(2, g.len() as i128))
    }

    pub fn summaries(&self) -> Vec<ClassSummary> {
        (0..self.len())
            .map(|i| ClassSummary {
                index: i,
                unit_group_order: self.unit_groups[i].len(),
                ideal_norm: arith::q_str(&self.ideals[i].nrd()),
            })
            .collect()
    }

    /// (i, b) with J = I_i·b.
    pub fn classify(&self, j: &QuatLattice) -> Result<(usize, Quaternion)> {
        for i in 0..self.len() {
            if let Some(b) = match_class(&self.ideals[i], j) {
                return Ok((i, b));
            }
        }
        internal("ideal matches no class representative")
    }
}

/// Some b with J = I·b, if it exists.
pub fn match_class(i: &QuatLattice, j: &QuatLattice) -> Option<Quaternion> {
    let l = i.inverse().product(j);
    let n = l.nrd();
    let g = l.gram();
    let vs = short_vectors(&g, n, true);
    let x = l.from_coords(vs.first()?);
    if i.right_mul(&x) == *j {
        Some(x)
    } else {
        None
    }
}

pub fn classify_right_ideal(set: &RightIdealClassSet, j: &QuatLattice) -> Result<(usize, Quaternion)> {
    set.classify(j)
}

/// Elements of norm 1 in an order.
pub fn unit_group(o: &QuatLattice) -> Vec<Quaternion> {
    let mut v: Vec<Quaternion> = short_vectors(&o.gram(), Q::one(), true).iter().map(|c| o.from_coords(c)).collect();
    v.sort();
    v
}

/// Left R-ideals J ⊂ I with nrd(J) = ℓ nrd(I), sorted.
pub fn neighbors(r: &QuatLattice, i: &QuatLattice, ell: u64) -> Vec<QuatLattice> {
    let l = ell as i128;
    let basis = i.basis();
    let n0 = i.nrd();
    let ell_i = i.scale(q(l));
    // polar form of nrd/nrd(I) in the basis of I; integral since I is a lattice of that norm
    let g = i.gram();
    let polar: Option<Vec<Vec<i128>>> = (0..4)
        .map(|j| (0..4).map(|k| { let x = g[j][k] * q(2) / n0; x.is_integer().then(|| x.to_integer()) }).collect())
        .collect();
    let Some(polar) = polar else { return neighbors_slow(r, i, ell) };
    let idx = |c: &[i128; 4]| ((c[0] * l + c[1]) * l + c[2]) * l + c[3];
    let mut seen = vec![false; (l * l * l * l) as usize];
    seen[0] = true;
    let mut out = Vec::new();
    for n in 1..l * l * l * l {
        if seen[n as usize] {
            continue;
        }
        let c = [n / (l * l * l), (n / (l * l)) % l, (n / l) % l, n % l];
        let mut twice = 0i128;
        for j in 0..4 {
            for k in 0..4 {
                twice += polar[j][k] * c[j] * c[k];
            }
        }
        if modp(twice / 2, l) != 0 {
            continue;
        }
        let mut x = Quaternion::zero(i.a, i.b);
        for k in 0..4 {
            x = x + basis[k].scale(q(c[k]));
        }
        let j = r.right_mul(&x).sum(&ell_i);
        // mark J/ℓI: span mod ℓ of the basis of J in I-coordinates
        let rows: Vec<[i128; 4]> = j.basis().iter().map(|y| i.coords(y).expect("neighbor not inside I").map(|v| modp(v, l))).collect();
        for v in span_mod(&rows, l) {
            seen[idx(&v) as usize] = true;
        }
        out.push(j);
    }
    out.sort();
    out
}

/// Every element of the F_ℓ-span of `rows`.
fn span_mod(rows: &[[i128; 4]], l: i128) -> Vec<[i128; 4]> {
    let mut m: Vec<[i128; 4]> = rows.to_vec();
    let mut basis = Vec::new();
    let mut r = 0;
    for c in 0..4 {
        let Some(p) = (r..m.len()).find(|&k| m[k][c] != 0) else { continue };
        m.swap(p, r);
        let inv = arith::mod_inv(m[r][c], l).expect("ℓ prime");
        for v in m[r].iter_mut() {
            *v = modp(*v * inv, l);
        }
        for k in 0..m.len() {
            if k != r && m[k][c] != 0 {
                let f = m[k][c];
                for t in 0..4 {
                    m[k][t] = modp(m[k][t] - f * m[r][t], l);
                }
            }
        }
        basis.push(m[r]);
        r += 1;
    }
    let mut out = vec![[0i128; 4]];
    for b in basis {
        let mut next = Vec::with_capacity(out.len() * l as usize);
        for v in &out {
            for a in 0..l {
                next.push([0, 1, 2, 3].map(|t| modp(v[t] + a * b[t], l)));
            }
        }
        out = next;
    }
    out
}

/// Reference version over rational quaternions.
fn neighbors_slow(r: &QuatLattice, i: &QuatLattice, ell: u64) -> Vec<QuatLattice> {
    let l = ell as i128;
    let basis = i.basis();
    let n0 = i.nrd();
    let ell_i = i.scale(q(l));
    let idx = |c: &[i128; 4]| ((c[0] * l + c[1]) * l + c[2]) * l + c[3];
    let mut seen = vec![false; (l * l * l * l) as usize];
    seen[0] = true;
    let mut out = Vec::new();
    for n in 1..l * l * l * l {
        if seen[n as usize] {
            continue;
        }
        let c = [n / (l * l * l), (n / (l * l)) % l, (n / l) % l, n % l];
        let mut x = Quaternion::zero(i.a, i.b);
        for k in 0..4 {
            x = x + basis[k].scale(q(c[k]));
        }
        let rel = x.nrd() / n0;
        if !rel.is_integer() || modp(rel.to_integer(), l) != 0 {
            continue;
        }
        let j = r.right_mul(&x).sum(&ell_i);
        // every residue of J/ℓI gives the same neighbor
        let jb = j.basis();
        let mut cs = [0i128; 4];
        loop {
            let mut y = Quaternion::zero(i.a, i.b);
            for k in 0..4 {
                y = y + jb[k].scale(q(cs[k]));
            }
            let yc = i.coords(&y).expect("neighbor not inside I");
            seen[idx(&yc.map(|v| modp(v, l))) as usize] = true;
            let mut k = 0;
            while k < 4 {
                cs[k] += 1;
                if cs[k] < l {
                    break;
                }
                cs[k] = 0;
                k += 1;
            }
            if k == 4 {
                break;
            }
        }
        out.push(j);
    }
    out.sort();
    out
}

/// Class set of the order `r` (level `level` in the definite algebra of discriminant `n_minus`).
/// The neighbor prime is the least prime not dividing `n_minus * level * avoid`.
pub fn right_class_set(r: &QuatLattice, n_minus: u64, level: u64, avoid: u64) -> Result<RightIdealClassSet> {
    if !r.is_order() {
        return invalid("lattice is not an order");
    }
    let mut ell = 2u64;
    while (n_minus * level * avoid.max(1)).is_multiple_of(ell) {
        ell = arith::next_prime(ell);
    }
    let target = eichler_mass(n_minus, level);
    let mut set = RightIdealClassSet {
        order: r.clone(),
        level,
        n_minus,
        ideals: vec![r.clone()],
        right_orders: vec![r.clone()],
        unit_groups: vec![unit_group(r)],
        ell,
    };
    let mut queue = VecDeque::from([0usize]);
    let mut done = BTreeSet::new();
    while set.mass() < target {
        let Some(k) = queue.pop_front() else {
            return internal(format!("neighbor search exhausted with mass {} of {}", set.mass(), target));
        };
        if !done.insert(k) {
            continue;
        }
        let ideal = set.ideals[k].clone();
        for j in neighbors(r, &ideal, ell) {
            if set.classify(&j).is_ok() {
                continue;
            }
            let o = j.right_order();
            set.unit_groups.push(unit_group(&o));
            set.right_orders.push(o);
            set.ideals.push(j);
            queue.push_back(set.ideals.len() - 1);
            if set.mass() >= target {
                break;
            }
        }
    }
    if set.mass() != target {
        return internal(format!("class set mass {} differs from {}", set.mass(), target));
    }
    Ok(set)
}
