//! The finite sets X_m and X̃_m, their divisors, and Hecke, diamond and covering maps.

pub mod hecke;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::arith::{self, mod_inv, mod_mul, modp, q, Q};
use crate::error::{internal, invalid, Result};
use crate::lattice::classes::right_class_set;
use crate::lattice::{EichlerTower, QuatLattice, RightIdealClassSet};
use crate::quaternion::{PadicSplitting, Quaternion};

pub use hecke::{HeckeMatrix, HeckeOp};

/// A point of X̃_m: class index and fiber coordinate (canonical representative of t·±ν_i(Γ_i)).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct TildePoint {
    pub class: usize,
    pub t: i128,
}

/// An element g of B̂^× recorded as the lattice R̂_m g ∩ B together with a global β
/// with β ∈ lattice and φ_p(β) ≡ g_p mod p^M.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdelicPoint {
    pub lattice: QuatLattice,
    pub beta: Quaternion,
}

#[derive(Clone, Debug)]
pub struct ShimuraLevel {
    pub m: u32,
    pub p: i128,
    /// p^m
    pub pm: i128,
    pub order: QuatLattice,
    pub classes: RightIdealClassSet,
    /// ±ν_i(Γ_i) ⊆ (Z/p^m)^×, sorted.
    pub fiber_groups: Vec<Vec<i128>>,
    /// #ker(ν_i) for each class.
    pub fiber_stabilizers: Vec<usize>,
    pub points: Vec<TildePoint>,
    index: BTreeMap<TildePoint, usize>,
    pub split: PadicSplitting,
}

#[derive(Serialize, Clone, Debug)]
pub struct LevelSummary {
    pub m: u32,
    pub h: usize,
    pub h_tilde: usize,
    pub mass: String,
    pub unit_group_orders: Vec<usize>,
    pub fiber_sizes: Vec<usize>,
    pub neighbor_prime: u64,
}

pub type Divisor = BTreeMap<TildePoint, i64>;

pub fn degree(d: &Divisor) -> i64 {
    d.values().sum()
}

pub fn add_point(d: &mut Divisor, p: TildePoint, c: i64) {
    let e = d.entry(p).or_insert(0);
    *e += c;
    if *e == 0 {
        d.remove(&p);
    }
}

pub fn divisor_add(a: &Divisor, b: &Divisor) -> Divisor {
    let mut r = a.clone();
    for (p, c) in b {
        add_point(&mut r, *p, *c);
    }
    r
}

pub fn divisor_scale(a: &Divisor, s: i64) -> Divisor {
    let mut r = Divisor::new();
    for (p, c) in a {
        add_point(&mut r, *p, c * s);
    }
    r
}

/// Smallest positive integer k with k·x ∈ l.
pub fn exponent_in(l: &QuatLattice, x: &Quaternion) -> i128 {
    l.rational_coords(x).iter().fold(1i128, |acc, c| arith::lcm(acc, *c.denom()))
}

/// λβ with λ ≡ 1 mod p^M and λβ ∈ l; the p-adic datum of β is unchanged.
pub fn beta_into(l: &QuatLattice, beta: &Quaternion, p: i128, modulus: i128) -> Result<Quaternion> {
    let k = exponent_in(l, beta);
    if k % p == 0 {
        return invalid("β is not p-integral for the lattice");
    }
    let lam = k * mod_inv(k, modulus).unwrap();
    Ok(reduce_beta(l, &beta.scale(q(lam)), modulus))
}

/// β + p^M·y with y ∈ l chosen to make the coordinates of β in l small.
pub fn reduce_beta(l: &QuatLattice, beta: &Quaternion, modulus: i128) -> Quaternion {
    let c = l.coords(beta).expect("β outside its lattice");
    let c = c.map(|x| {
        let r = modp(x, modulus);
        if 2 * r > modulus {
            r - modulus
        } else {
            r
        }
    });
    l.from_coords(&c)
}

/// [(Z/p^m)^× : H] cosets; canonical representative is the least element of t·H.
pub fn coset_rep(t: i128, group: &[i128], pm: i128) -> i128 {
    group.iter().map(|h| mod_mul(*h, t, pm)).min().unwrap_or(0)
}

pub fn build_level(tower: &EichlerTower, m: u32) -> Result<ShimuraLevel> {
    if m > tower.m_max() {
        return invalid(format!("level {m} exceeds tower depth {}", tower.m_max()));
    }
    let order = tower.order(m);
    let classes = right_class_set(&order.lattice, tower.algebra.discriminant(), order.level, tower.p)?;
    let p = tower.p as i128;
    let pm = p.pow(m);
    let mut fiber_groups = Vec::new();
    let mut fiber_stabilizers = Vec::new();
    for units in &classes.unit_groups {
        let mut img: Vec<i128> = Vec::new();
        let mut ker = 0;
        for u in units {
            let a = tower.a_coord(u, m).ok_or_else(|| crate::Error::Internal("unit not p-integral".into()))?;
            let a = modp(a, pm);
            if a == modp(1, pm) {
                ker += 1;
            }
            img.push(a);
        }
        img.push(modp(-1, pm));
        img.sort();
        img.dedup();
        fiber_groups.push(img);
        fiber_stabilizers.push(ker);
    }
    let mut points = Vec::new();
    for (i, g) in fiber_groups.iter().enumerate() {
        let mut reps: Vec<i128> = arith::units(pm).into_iter().map(|t| coset_rep(t, g, pm)).collect();
        reps.sort();
        reps.dedup();
        points.extend(reps.into_iter().map(|t| TildePoint { class: i, t }));
    }
    points.sort();
    let index = points.iter().enumerate().map(|(k, p)| (*p, k)).collect();
    Ok(ShimuraLevel {
        m,
        p,
        pm,
        order: order.lattice.clone(),
        classes,
        fiber_groups,
        fiber_stabilizers,
        points,
        index,
        split: tower.split.clone(),
    })
}

impl ShimuraLevel {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn modulus(&self) -> i128 {
        self.split.modulus
    }

    pub fn index_of(&self, pt: &TildePoint) -> Option<usize> {
        self.index.get(pt).copied()
    }

    pub fn normalize(&self, class: usize, t: i128) -> TildePoint {
        TildePoint { class, t: coset_rep(t, &self.fiber_groups[class], self.pm) }
    }

    /// a-coordinate of φ_p(x) mod p^m.
    pub fn a_coord(&self, x: &Quaternion) -> Option<i128> {
        self.split.image(x).map(|mat| modp(mat[0][0], self.pm))
    }

    /// (i, b, raw t) with lattice = I_i·b and t = a(β b^{-1})^{-1} mod p^m.
    pub fn read_raw(&self, pt: &AdelicPoint) -> Result<(usize, Quaternion, i128)> {
        let (i, b) = self.classes.classify(&pt.lattice)?;
        let u = pt.beta * b.inverse()?;
        let Some(a) = self.a_coord(&u) else {
            return internal("p-local unit is not integral");
        };
        let t = if self.pm == 1 {
            0
        } else {
            match mod_inv(a, self.pm) {
                Some(t) => t,
                None => return internal("p-local datum is not a unit"),
            }
        };
        Ok((i, b, t))
    }

    pub fn read(&self, pt: &AdelicPoint) -> Result<TildePoint> {
        let (i, _, t) = self.read_raw(pt)?;
        Ok(self.normalize(i, t))
    }

    /// Adelic representative of (i, t): lattice I_i and β ≡ diag(t^{-1}, 1).
    pub fn representative(&self, pt: &TildePoint) -> Result<AdelicPoint> {
        let lattice = self.classes.ideals[pt.class].clone();
        let n = self.modulus();
        let tinv = if self.pm == 1 { 1 } else { mod_inv(pt.t, n).unwrap() };
        let x = self.split.lift(&[[tinv, 0], [0, 1]]);
        let beta = beta_into(&lattice, &x, self.p, n)?;
        Ok(AdelicPoint { lattice, beta })
    }

    /// Right translation of the p-component by the scalar s.
    pub fn scalar_at_p(&self, pt: &AdelicPoint, s: i128) -> AdelicPoint {
        AdelicPoint { lattice: pt.lattice.clone(), beta: pt.beta.scale(q(s)) }
    }

    pub fn summary(&self) -> LevelSummary {
        LevelSummary {
            m: self.m,
            h: self.classes.len(),
            h_tilde: self.points.len(),
            mass: arith::q_str(&self.classes.mass()),
            unit_group_orders: self.classes.unit_groups.iter().map(|g| g.len()).collect(),
            fiber_sizes: (0..self.classes.len()).map(|i| self.points.iter().filter(|p| p.class == i).count()).collect(),
            neighbor_prime: self.classes.ell,
        }
    }

    /// Weight 1/#ker(ν_i) of a point.
    pub fn weight(&self, pt: &TildePoint) -> Q {
        Q::new(1, self.fiber_stabilizers[pt.class] as i128)
    }

    pub fn divisor_to_vec(&self, d: &Divisor) -> Result<Vec<i64>> {
        let mut v = vec![0i64; self.len()];
        for (p, c) in d {
            let Some(k) = self.index_of(p) else { return invalid("divisor support not on this level") };
            v[k] += c;
        }
        Ok(v)
    }

    pub fn vec_to_divisor(&self, v: &[i64]) -> Divisor {
        let mut d = Divisor::new();
        for (k, c) in v.iter().enumerate() {
            if *c != 0 {
                d.insert(self.points[k], *c);
            }
        }
        d
    }
}

/// A tower of levels 0..=m_max.
#[derive(Clone, Debug)]
pub struct ShimuraTower {
    pub tower: EichlerTower,
    pub levels: Vec<ShimuraLevel>,
}

impl ShimuraTower {
    pub fn new(tower: EichlerTower) -> Result<Self> {
        let levels = (0..=tower.m_max()).map(|m| build_level(&tower, m)).collect::<Result<Vec<_>>>()?;
        Ok(ShimuraTower { tower, levels })
    }

    pub fn level(&self, m: u32) -> &ShimuraLevel {
        &self.levels[m as usize]
    }

    /// α̃_m: X̃_m → X̃_{m-1} on an adelic point.
    pub fn push_point(&self, m: u32, pt: &AdelicPoint) -> Result<AdelicPoint> {
        if m == 0 {
            return invalid("no covering map below level 0");
        }
        let lattice = self.level(m - 1).order.product(&pt.lattice);
        Ok(AdelicPoint { lattice, beta: pt.beta })
    }

    pub fn pushforward(&self, m: u32, d: &Divisor) -> Result<Divisor> {
        let lv = self.level(m);
        let mut out = Divisor::new();
        for (p, c) in d {
            let a = lv.representative(p)?;
            let img = self.push_point(m, &a)?;
            add_point(&mut out, self.level(m - 1).read(&img)?, *c);
        }
        Ok(out)
    }
}
