//! The ordinary idempotent e = lim U_p^{n!} on Z/p^M[X̃_m].

use num_bigint::BigUint;
use num_traits::One;
use serde::Serialize;

use crate::error::{internal, invalid, Result};
use crate::ordinary::linalg::charpoly_mod_p;
use crate::shimura::hecke::{HeckeMatrix, HeckeOp};
use crate::zmod::{rank_mod_p, ModMat};

#[derive(Clone, Debug)]
pub struct OrdinaryDecomposition {
    pub level: u32,
    pub p: i128,
    pub precision: u32,
    pub modulus: i128,
    pub e: ModMat,
    pub ordinary_rank: usize,
    /// Nonzero roots of charpoly(U_p) mod p, with multiplicity.
    pub unit_root_count: usize,
    /// charpoly(U_p) mod p, constant term first.
    pub charpoly_mod_p: Vec<i128>,
    /// Number of p-th power steps until U^{t} was idempotent.
    pub steps: u32,
    /// Inverse of U_p on image(e), as e·W.
    pub u_inverse: ModMat,
}

#[derive(Serialize, Clone, Debug)]
pub struct ProjectorReport {
    pub level: u32,
    pub precision: u32,
    pub dim: usize,
    pub ordinary_rank: usize,
    pub unit_root_count: usize,
    pub charpoly_mod_p: Vec<i128>,
    pub idempotent: bool,
    pub commutes: bool,
    pub inverse_ok: bool,
    pub steps: u32,
}

fn lcm_big(a: &BigUint, b: &BigUint) -> BigUint {
    num_integer::Integer::lcm(a, b)
}

/// Exponent killing the prime-to-p part of any unit in GL_n(F_p).
fn tame_exponent(n: usize, p: i128) -> BigUint {
    let pb = BigUint::from(p as u128);
    let mut acc = BigUint::one();
    let mut pi = BigUint::one();
    for _ in 0..n {
        pi *= &pb;
        acc = lcm_big(&acc, &(&pi - 1u32));
    }
    acc
}

pub fn ordinary_projector(u: &HeckeMatrix, p: u64, precision: u32) -> Result<OrdinaryDecomposition> {
    if u.op != HeckeOp::U {
        return invalid(format!("expected U_p, got {}", u.op.name()));
    }
    if u.level < 1 {
        return invalid("the ordinary projector needs level m ≥ 1");
    }
    let p = p as i128;
    let modulus = p.pow(precision);
    let n = u.dim();
    let um = ModMat::from_int_rows(&u.matrix, modulus);
    // t = n·M·lcm(p^i - 1) clears the nilpotent part and the tame part of the units
    let t = BigUint::from((n.max(1) as u64) * precision as u64) * tame_exponent(n, p);
    let mut e = um.pow(&t);
    let pb = BigUint::from(p as u128);
    let mut steps = 0;
    while e.mul(&e) != e {
        e = e.pow(&pb);
        steps += 1;
        if steps > precision + 64 {
            return internal("U_p powers did not stabilize");
        }
    }
    let ordinary_rank = rank_mod_p(&e, p);
    let cp = charpoly_mod_p(&u.matrix, p);
    let zero_mult = cp.iter().take_while(|c| **c == 0).count();
    let unit_root_count = n - zero_mult;
    // eUe + (1 - e) is invertible iff U is invertible on image(e)
    let id = ModMat::identity(n, modulus);
    let x = e.mul(&um).mul(&e).add(&id.sub(&e));
    let Some(w) = x.inverse(p) else { return internal("U_p is not invertible on the ordinary part") };
    let u_inverse = e.mul(&w);
    Ok(OrdinaryDecomposition { level: u.level, p, precision, modulus, e, ordinary_rank, unit_root_count, charpoly_mod_p: cp, steps, u_inverse })
}

impl OrdinaryDecomposition {
    pub fn dim(&self) -> usize {
        self.e.rows
    }

    pub fn report(&self, u: &HeckeMatrix) -> ProjectorReport {
        let um = ModMat::from_int_rows(&u.matrix, self.modulus);
        let e = &self.e;
        ProjectorReport {
            level: self.level,
            precision: self.precision,
            dim: self.dim(),
            ordinary_rank: self.ordinary_rank,
            unit_root_count: self.unit_root_count,
            charpoly_mod_p: self.charpoly_mod_p.clone(),
            idempotent: e.mul(e) == *e,
            commutes: e.mul(&um) == um.mul(e),
            inverse_ok: e.mul(&um).mul(&self.u_inverse) == *e,
            steps: self.steps,
        }
    }

    /// (1 - e)·U^k mod p.
    pub fn non_ordinary_power(&self, u: &HeckeMatrix, k: u64) -> ModMat {
        let um = ModMat::from_int_rows(&u.matrix, self.modulus);
        let id = ModMat::identity(self.dim(), self.modulus);
        id.sub(&self.e).mul(&um.pow(&BigUint::from(k))).reduce(self.p)
    }
}

/// k = n·M, past which (1 - e)U^k vanishes mod p^M (so certainly mod p).
pub fn nilpotence_bound(n: usize, precision: u32) -> u64 {
    n as u64 * precision as u64
}
