//! Matrix splittings φ_p : R ⊗ Z_p ≅ M_2(Z_p) modulo p^M.

use serde::Serialize;

use crate::arith::{self, mod_inv, mod_mul, modp, q_mod};
use crate::error::{internal, invalid, Result};
use crate::lattice::QuatLattice;
use crate::quaternion::{Quaternion, QuaternionAlgebra};
use crate::zmod::{m2_det, m2_mul, Mat2, ModMat};

#[derive(Clone, Debug, Serialize)]
pub struct PadicSplitting {
    pub p: i128,
    pub precision_m: u32,
    pub modulus: i128,
    /// Denominator exponent e: p^e·φ(i), p^e·φ(j) are integral (always 0 for orders containing i, j).
    pub exponent_e: u32,
    pub image_i: Mat2,
    pub image_j: Mat2,
    /// φ of the HNF basis of `order`.
    #[serde(skip)]
    pub basis_images: [Mat2; 4],
    /// Rows: coordinates of the matrix units E11, E12, E21, E22 in the basis of `order`.
    #[serde(skip)]
    pub units: [[i128; 4]; 4],
    #[serde(skip)]
    pub order: QuatLattice,
}

fn simple_roots_mod_pk(t: i128, n: i128, p: i128, k: u32) -> Option<(i128, i128)> {
    // distinct roots of X^2 - tX + n mod p, Newton-lifted to p^k
    let roots: Vec<i128> = (0..p).filter(|r| modp(r * r - t * r + n, p) == 0).collect();
    if roots.len() != 2 {
        return None;
    }
    let pk = p.pow(k);
    let lift = |r0: i128| {
        let mut r = r0;
        let mut mk = p;
        for _ in 1..k {
            mk *= p;
            let f = modp(r * r - t * r + n, mk);
            let df = mod_inv(modp(2 * r - t, mk), mk).unwrap();
            r = modp(r - mod_mul(f, df, mk), mk);
        }
        r
    };
    Some((lift(roots[0]) % pk, lift(roots[1]) % pk))
}

impl PadicSplitting {
    /// Splitting of the order `order` (which must be maximal or Eichler of level prime to p) at p.
    pub fn for_order(alg: &QuaternionAlgebra, order: &QuatLattice, p: u64, m: u32) -> Result<Self> {
        if alg.is_ramified(p) {
            return invalid(format!("p = {p} is ramified in the algebra"));
        }
        if m == 0 {
            return invalid("precision must be at least 1");
        }
        let p = p as i128;
        let pm = p.pow(m);
        let basis = order.basis();
        let coord_mod = |x: &Quaternion| -> Option<[i128; 4]> {
            let c = order.rational_coords(x);
            let mut out = [0i128; 4];
            for k in 0..4 {
                out[k] = q_mod(&c[k], pm)?;
            }
            Some(out)
        };
        let comb = |c: &[i128; 4]| -> Quaternion {
            let mut x = Quaternion::zero(alg.a, alg.b);
            for k in 0..4 {
                x = x + basis[k].scale(arith::q(c[k]));
            }
            x
        };
        let to_elt = |c: &[i128; 4]| comb(c);
        // idempotent from an element with split characteristic polynomial mod p
        let mut found = None;
        'search: for c0 in 0..p {
            for c1 in 0..p {
                for c2 in 0..p {
                    for c3 in 0..p {
                        let c = [c0, c1, c2, c3];
                        let x = comb(&c);
                        let t = x.trd().to_integer();
                        let n = x.nrd().to_integer();
                        if let Some((r1, r2)) = simple_roots_mod_pk(t, n, p, m) {
                            found = Some((x, r1, r2));
                            break 'search;
                        }
                    }
                }
            }
        }
        let Some((x, r1, r2)) = found else {
            return internal(format!("no split element mod {p}"));
        };
        let one = Quaternion::one(alg.a, alg.b);
        let d = mod_inv(modp(r1 - r2, pm), pm).unwrap();
        let e_raw = (x - one.scale(arith::q(r2))).scale(arith::q(d));
        let e = to_elt(&coord_mod(&e_raw).unwrap());
        let f = one - e;
        let reduce = |x: &Quaternion| -> [i128; 4] { coord_mod(x).unwrap() };
        let nonzero_mod_p = |c: &[i128; 4]| c.iter().any(|v| v % p != 0);
        let e12 = basis
            .iter()
            .map(|y| reduce(&(e * *y * f)))
            .find(nonzero_mod_p)
            .ok_or_else(|| crate::error::Error::Internal("no E12 direction".into()))?;
        let w = basis
            .iter()
            .map(|y| reduce(&(f * *y * e)))
            .find(nonzero_mod_p)
            .ok_or_else(|| crate::error::Error::Internal("no E21 direction".into()))?;
        let e12q = to_elt(&e12);
        let wq = to_elt(&w);
        let prod = reduce(&(e12q * wq));
        let ec = reduce(&e);
        let k = (0..4).find(|&k| ec[k] % p != 0).unwrap();
        let lam = mod_mul(prod[k], mod_inv(ec[k], pm).unwrap(), pm);
        let lam_inv = match mod_inv(lam, pm) {
            Some(v) => v,
            None => return internal("degenerate matrix units"),
        };
        let e21 = w.map(|v| mod_mul(v, lam_inv, pm));
        let e22 = reduce(&f);
        let units = [ec, e12, e21, e22];
        let mut cm = ModMat::zeros(4, 4, pm);
        for r in 0..4 {
            for c in 0..4 {
                cm.set(r, c, units[r][c]);
            }
        }
        let Some(dm) = cm.inverse(p) else {
            return internal("matrix units do not span R/p");
        };
        let mut basis_images = [[[0i128; 2]; 2]; 4];
        for k in 0..4 {
            basis_images[k] = [[dm.get(k, 0), dm.get(k, 1)], [dm.get(k, 2), dm.get(k, 3)]];
        }
        let mut sp = PadicSplitting {
            p,
            precision_m: m,
            modulus: pm,
            exponent_e: 0,
            image_i: [[0; 2]; 2],
            image_j: [[0; 2]; 2],
            basis_images,
            units,
            order: order.clone(),
        };
        let (ii, ei) = sp.image_scaled(&alg.i());
        let (jj, ej) = sp.image_scaled(&alg.j());
        sp.exponent_e = ei.max(ej);
        sp.image_i = ii;
        sp.image_j = jj;
        sp.check(alg)?;
        Ok(sp)
    }

    /// Image of a p-integral (with respect to `order`) element.
    pub fn image(&self, x: &Quaternion) -> Option<Mat2> {
        let c = self.order.rational_coords(x);
        let mut r = [[0i128; 2]; 2];
        for k in 0..4 {
            let ck = q_mod(&c[k], self.modulus)?;
            for i in 0..2 {
                for j in 0..2 {
                    r[i][j] = modp(r[i][j] + mod_mul(ck, self.basis_images[k][i][j], self.modulus), self.modulus);
                }
            }
        }
        Some(r)
    }

    /// (φ(p^e x), e) with e minimal making p^e x integral.
    pub fn image_scaled(&self, x: &Quaternion) -> (Mat2, u32) {
        let c = self.order.rational_coords(x);
        let mut e = 0;
        for ck in &c {
            if !ck.numer().eq(&0) {
                let v = arith::val_q(ck, self.p);
                if v < 0 {
                    e = e.max((-v) as u32);
                }
            }
        }
        let y = x.scale(arith::q(self.p.pow(e)));
        (self.image(&y).unwrap(), e)
    }

    /// An element of `order` whose image is congruent to `m` mod p^M.
    pub fn lift(&self, mat: &Mat2) -> Quaternion {
        let entries = [mat[0][0], mat[0][1], mat[1][0], mat[1][1]];
        let mut c = [0i128; 4];
        for (r, ent) in entries.iter().enumerate() {
            for k in 0..4 {
                c[k] = modp(c[k] + mod_mul(*ent, self.units[r][k], self.modulus), self.modulus);
            }
        }
        self.order.from_coords(&c)
    }

    fn check(&self, alg: &QuaternionAlgebra) -> Result<()> {
        let pm = self.modulus;
        let sq = |m: &Mat2| m2_mul(m, m, pm);
        let ok_i = sq(&self.image_i) == [[modp(alg.a as i128, pm), 0], [0, modp(alg.a as i128, pm)]];
        let ok_j = sq(&self.image_j) == [[modp(alg.b as i128, pm), 0], [0, modp(alg.b as i128, pm)]];
        let ij = m2_mul(&self.image_i, &self.image_j, pm);
        let ji = m2_mul(&self.image_j, &self.image_i, pm);
        let anti = ij.iter().flatten().zip(ji.iter().flatten()).all(|(x, y)| modp(x + y, pm) == 0);
        let dets = self
            .order
            .basis()
            .iter()
            .zip(self.basis_images.iter())
            .all(|(x, m)| m2_det(m, pm) == q_mod(&x.nrd(), pm).unwrap() && modp(m[0][0] + m[1][1], pm) == q_mod(&x.trd(), pm).unwrap());
        if ok_i && ok_j && anti && dets && self.exponent_e == 0 {
            Ok(())
        } else {
            internal("splitting failed its defining relations")
        }
    }
}

/// φ_p for the maximal order of `alg`.
pub fn padic_splitting(alg: &QuaternionAlgebra, p: u64, m: u32) -> Result<PadicSplitting> {
    if alg.is_ramified(p) {
        return invalid(format!("p = {p} is ramified in the algebra"));
    }
    let order = crate::lattice::order::maximal_order(alg)?;
    PadicSplitting::for_order(alg, &order.lattice, p, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quaternion::algebra_for_discriminant;

    #[test]
    fn splitting_relations_disc2() {
        let alg = algebra_for_discriminant(2, true).unwrap();
        let sp = padic_splitting(&alg, 5, 8).unwrap();
        let pm = sp.modulus;
        assert_eq!(sp.image(&alg.one()).unwrap(), [[1, 0], [0, 1]]);
        let x = alg.int([1, 1, 1, 1]);
        assert_eq!(m2_det(&sp.image(&x).unwrap(), pm), 4);
        let ij = m2_mul(&sp.image_i, &sp.image_j, pm);
        let ji = m2_mul(&sp.image_j, &sp.image_i, pm);
        assert_eq!(ij, ji.map(|r| r.map(|v| modp(-v, pm))));
        let back = sp.lift(&[[3, 7], [11, 2]]);
        assert_eq!(sp.image(&back).unwrap(), [[3, 7], [11, 2]]);
        assert!(padic_splitting(&alg, 2, 4).is_err());
    }
}
