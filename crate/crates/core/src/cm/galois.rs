//! Gal(H_C(μ_{p^u})/K) for p^u | C realized as idele classes (ring class, cyclotomic part).
//!
//! The element (c, t) is the class of the idele equal to a uniformizer of the chosen prime
//! 𝔮_c at q_c, to the scalar t at p, and to 1 elsewhere.

use serde::Serialize;

use crate::arith::{self, mod_inv, mod_mul, pm_rep, q_mod};
use crate::cm::forms::Form;
use crate::cm::ideals::{KElt, QLattice};
use crate::cm::{ring_class_group, ImagQuadField, RingClassGroup};
use crate::error::{invalid, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct GalElt {
    pub class: usize,
    /// Cyclotomic part, canonical representative mod ±1 in (Z/p^u)^×.
    pub t: i128,
}

#[derive(Clone, Debug, Serialize)]
pub struct PrimeRep {
    /// 1 for the trivial class.
    pub q: u64,
    #[serde(skip)]
    pub ideal: QLattice,
}

#[derive(Clone, Debug)]
pub struct ExtendedGaloisGroup {
    pub k: ImagQuadField,
    pub p: i128,
    pub u: u32,
    pub pu: i128,
    pub conductor: i128,
    pub pic: RingClassGroup,
    pub reps: Vec<PrimeRep>,
    /// Canonical cyclotomic parts, sorted.
    pub cyc: Vec<i128>,
}

/// G(C, u) with p^u | C. Prime representatives avoid every prime of `avoid`.
pub fn extended_galois_group(k: &ImagQuadField, conductor: i128, p: u64, u: u32, avoid: u64) -> Result<ExtendedGaloisGroup> {
    let pi = p as i128;
    if !arith::is_prime(p) {
        return invalid(format!("{p} is not prime"));
    }
    if conductor % pi.pow(u) != 0 {
        return invalid(format!("p^{u} does not divide the conductor {conductor}"));
    }
    let pic = ring_class_group(k, conductor)?;
    let pu = pi.pow(u);
    let reps = prime_representatives(&pic, avoid.max(1) * p)?;
    let mut cyc: Vec<i128> = arith::units(pu).into_iter().map(|t| pm_rep(t, pu)).collect();
    cyc.sort();
    cyc.dedup();
    Ok(ExtendedGaloisGroup { k: *k, p: pi, u, pu, conductor, pic, reps, cyc })
}

/// One ideal per class of `pic`: O_C itself for the trivial class, otherwise a prime of degree
/// one over the least split prime q ∤ 2·C·D_K·avoid whose class is still unrepresented.
pub fn prime_representatives(pic: &RingClassGroup, avoid: u64) -> Result<Vec<PrimeRep>> {
    let k = &pic.k;
    let conductor = pic.conductor;
    let bad = 2 * conductor * (avoid.max(1) as i128) * k.d_k;
    let mut reps: Vec<Option<PrimeRep>> = vec![None; pic.len()];
    reps[0] = Some(PrimeRep { q: 1, ideal: QLattice::order(k.d_k, conductor) });
    let mut left = pic.len() - 1;
    let mut q = 2u64;
    while left > 0 {
        q = arith::next_prime(q + 1);
        if q > 1_000_000 {
            return invalid(format!("ring class group of order {} too large: prime representatives not found below 10^6", pic.len()));
        }
        let qi = q as i128;
        if bad % qi == 0 || k.kronecker(q) != 1 {
            continue;
        }
        let disc = pic.disc;
        let b = match (0..2 * qi).find(|b| (b * b - disc).rem_euclid(4 * qi) == 0) {
            Some(b) => b,
            None => continue,
        };
        for bb in [b, -b] {
            let f = Form::new(qi, bb, (bb * bb - disc) / (4 * qi));
            let idx = pic.index_of(&f);
            if reps[idx].is_none() {
                reps[idx] = Some(PrimeRep { q, ideal: QLattice::from_form(k.d_k, conductor, &f) });
                left -= 1;
            }
        }
    }
    Ok(reps.into_iter().map(|r| r.unwrap()).collect())
}

impl ExtendedGaloisGroup {
    pub fn order(&self) -> usize {
        self.pic.len() * self.cyc.len()
    }

    pub fn identity(&self) -> GalElt {
        GalElt { class: 0, t: pm_rep(1, self.pu) }
    }

    pub fn elements(&self) -> Vec<GalElt> {
        let mut v = Vec::with_capacity(self.order());
        for c in 0..self.pic.len() {
            for t in &self.cyc {
                v.push(GalElt { class: c, t: *t });
            }
        }
        v
    }

    pub fn index_of(&self, x: &GalElt) -> usize {
        x.class * self.cyc.len() + self.cyc.binary_search(&x.t).expect("non-canonical cyclotomic part")
    }

    pub fn elt(&self, class: usize, t: i128) -> GalElt {
        GalElt { class, t: pm_rep(t, self.pu) }
    }

    /// κ ∈ K^× with 𝔮_{c1}𝔮_{c2} = κ·𝔮_{c3}; unique up to sign.
    pub fn cocycle(&self, c1: usize, c2: usize) -> (usize, KElt) {
        let c3 = self.pic.mul(c1, c2);
        let (r1, r2, r3) = (&self.reps[c1], &self.reps[c2], &self.reps[c3]);
        let l = r1.ideal.mul(&r2.ideal).mul(&r3.ideal.conj());
        let target = arith::q((r1.q * r2.q * r3.q) as i128);
        let x = l.elements_of_norm(target);
        let x = *x.last().expect("principal ideal without generator");
        (c3, x.scale(arith::qf(1, r3.q as i128)))
    }

    pub fn mul(&self, x: &GalElt, y: &GalElt) -> GalElt {
        let (c3, kappa) = self.cocycle(x.class, y.class);
        // κ ≡ α mod p^u(O_K ⊗ Z_p); the unit κ^{-1} at p moves into the cyclotomic part
        let alpha = q_mod(&kappa.u, self.pu).expect("κ is not a p-unit");
        let ai = mod_inv(alpha, self.pu).unwrap();
        self.elt(c3, mod_mul(mod_mul(x.t, y.t, self.pu), ai, self.pu))
    }

    pub fn inv(&self, x: &GalElt) -> GalElt {
        self.elements().into_iter().find(|y| self.mul(x, y) == self.identity()).unwrap()
    }

    /// ε_cyc = N(idele)_p^{-1} = q_c t^{-2} mod p^u.
    pub fn eps(&self, x: &GalElt) -> i128 {
        let q = self.reps[x.class].q as i128;
        let ti = mod_inv(x.t, self.pu).unwrap();
        mod_mul(q, mod_mul(ti, ti, self.pu), self.pu)
    }

    /// Image in Pic(O_{c'}) for c' | C.
    pub fn restrict_class(&self, x: &GalElt, lower: &RingClassGroup) -> usize {
        lower.class_of(&QLattice::order(self.k.d_k, lower.conductor).mul(&self.reps[x.class].ideal))
    }

    /// Elements fixing H_{c'}(μ_{p^{u'}}).
    pub fn fixing(&self, c_prime: i128, u_prime: u32) -> Result<Vec<GalElt>> {
        if self.conductor % c_prime != 0 || u_prime > self.u {
            return invalid(format!("H_{c_prime}(mu_{}^{u_prime}) is not contained in this extension", self.p));
        }
        let lower = ring_class_group(&self.k, c_prime)?;
        let pu2 = self.p.pow(u_prime);
        Ok(self
            .elements()
            .into_iter()
            .filter(|x| self.restrict_class(x, &lower) == 0 && (self.eps(x) - 1).rem_euclid(pu2) == 0)
            .collect())
    }

    /// Elements with class part trivial: Gal(H_C(μ_{p^u})/H_C).
    pub fn cyclotomic_part(&self) -> Vec<GalElt> {
        self.cyc.iter().map(|t| GalElt { class: 0, t: *t }).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cyclotomic_kernel_oracle(c: i128, p: i128, u: u32) -> usize {
        // (O_C ⊗ Z_p)^× modulo (1 + p^u O_K) and ±1, by enumerating a + bω mod p^u
        let pu = p.pow(u);
        let vc = arith::val(c, p).min(u);
        let mut n = 0;
        for a in 0..pu {
            for b in 0..pu {
                if b % p.pow(vc) == 0 && a % p != 0 {
                    n += 1;
                }
            }
        }
        if pu > 2 { n / 2 } else { n }
    }

    #[test]
    fn desk_order_and_axioms() {
        let k = ImagQuadField::new(-11).unwrap();
        let g = extended_galois_group(&k, 5, 5, 1, 2).unwrap();
        assert_eq!(g.order(), 8);
        assert_eq!(g.cyc.len(), cyclotomic_kernel_oracle(5, 5, 1));
        let els = g.elements();
        let e = g.identity();
        for x in &els {
            assert_eq!(g.mul(x, &e), *x);
            for y in &els {
                assert_eq!(g.mul(x, y), g.mul(y, x));
                for z in &els {
                    assert_eq!(g.mul(&g.mul(x, y), z), g.mul(x, &g.mul(y, z)));
                }
            }
        }
        for x in &els {
            for y in &els {
                assert_eq!(g.eps(&g.mul(x, y)), mod_mul(g.eps(x), g.eps(y), 5));
            }
        }
    }

    #[test]
    fn larger_groups() {
        let k = ImagQuadField::new(-11).unwrap();
        for (c, u) in [(25i128, 2u32), (35, 1), (25, 1)] {
            let g = extended_galois_group(&k, c, 5, u, 2).unwrap();
            assert_eq!(g.order() as u64, g.pic.len() as u64 * arith::euler_phi(5u64.pow(u)) / 2);
            assert_eq!(g.cyc.len(), cyclotomic_kernel_oracle(c, 5, u));
            let els = g.elements();
            for x in els.iter().take(12) {
                for y in els.iter().step_by(7) {
                    for z in els.iter().step_by(11) {
                        assert_eq!(g.mul(&g.mul(x, y), z), g.mul(x, &g.mul(y, z)));
                    }
                }
            }
        }
        let g = extended_galois_group(&k, 25, 5, 2, 2).unwrap();
        assert_eq!(g.fixing(5, 2).unwrap().len(), 5);
        let g = extended_galois_group(&k, 35, 5, 1, 2).unwrap();
        assert_eq!(g.fixing(5, 1).unwrap().len(), 8);
    }

    #[test]
    fn degenerate_u_zero_is_pic() {
        let k = ImagQuadField::new(-11).unwrap();
        let g = extended_galois_group(&k, 5, 5, 0, 2).unwrap();
        assert_eq!(g.order(), 4);
    }
}
