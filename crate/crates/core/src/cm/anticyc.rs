//! Layers K_n of the anticyclotomic Z_p-extension, seen as quotients of ring class groups.

use serde::Serialize;

use crate::arith;
use crate::cm::galois::{prime_representatives, PrimeRep};
use crate::cm::ideals::QLattice;
use crate::cm::{ring_class_group, ImagQuadField, RingClassGroup};
use crate::error::{invalid, Result};

#[derive(Clone, Debug)]
pub struct AnticycLayer {
    pub k: ImagQuadField,
    pub p: u64,
    pub n: u32,
    /// p^n
    pub order: u64,
    /// Minimal m with K_n ⊂ H_{p^m}; the layer is read off Pic(O_{p^d}).
    pub d: u32,
    /// True when d came from the p-part growth search rather than d = n + 1.
    pub experimental: bool,
    pub pic: RingClassGroup,
    /// Prime q whose class maps to the generator 1 ∈ Z/p^n.
    pub generator_prime: u64,
    /// quotient[x] ∈ Z/p^n for x ∈ Pic(O_{p^d}).
    pub quotient: Vec<u64>,
}

#[derive(Serialize, Clone, Debug)]
pub struct LayerSummary {
    pub n: u32,
    pub order: u64,
    pub d: u32,
    pub pic_order: usize,
    pub generator_prime: u64,
    pub experimental: bool,
}

fn p_part(n: u64, p: u64) -> u64 {
    p.pow(arith::val(n as i128, p as i128))
}

/// Order of the p-part of Pic(O_{p^m}).
fn p_part_order(k: &ImagQuadField, p: u64, m: u32) -> Result<u64> {
    let c = (p as i128).pow(m);
    Ok(p_part(ring_class_group(k, c)?.len() as u64, p))
}

/// Picks d(n). With p ∤ h_K this is n + 1 (and 1 at n = 0, so that θ_0 uses the same
/// conductor-p input as the lower end of the tower); otherwise the least m at which the
/// p-part of Pic(O_{p^m}) has grown by p^n over its value at m = 1.
pub fn layer_depth(k: &ImagQuadField, p: u64, n: u32) -> Result<(u32, bool)> {
    let hk = ring_class_group(k, 1)?.len() as u64;
    if !hk.is_multiple_of(p) {
        return Ok((n + 1, false));
    }
    let base = p_part_order(k, p, 1)?;
    let target = base * p.pow(n);
    let mut m = 1;
    while p_part_order(k, p, m)? < target {
        m += 1;
        if m > 12 {
            return invalid("anticyclotomic depth search exceeded conductor p^12");
        }
    }
    Ok((m, true))
}

fn dlog(pic: &RingClassGroup, base: usize, x: usize, bound: u64) -> Option<u64> {
    let mut y = 0usize;
    for e in 0..bound {
        if y == x {
            return Some(e);
        }
        y = pic.mul(y, base);
    }
    None
}

fn build(k: &ImagQuadField, p: u64, n: u32, gen_ideal: Option<(u64, QLattice)>) -> Result<AnticycLayer> {
    if !arith::is_prime(p) {
        return invalid(format!("{p} is not prime"));
    }
    if k.d_k.rem_euclid(p as i128) == 0 {
        return invalid(format!("p = {p} divides D_K"));
    }
    let (d, experimental) = layer_depth(k, p, n)?;
    let pic = ring_class_group(k, (p as i128).pow(d))?;
    let order = p.pow(n);
    let h = pic.len() as u64;
    let pp = p_part(h, p);
    let r = h / pp;
    let reps = prime_representatives(&pic, p)?;
    // the p-part must be cyclic of order ≥ p^n for the quotient below
    let exponent_ok = |g: usize| pic.order_of(pic.pow(g, r)) == pp;
    let (q, gen_class) = match &gen_ideal {
        Some((q, id)) => {
            let x = pic.class_of(&QLattice::order(k.d_k, pic.conductor).mul(id));
            if !exponent_ok(x) {
                return invalid(format!("prime {q} does not generate the {p}-part of Pic(O_{{{p}^{d}}})"));
            }
            (*q, x)
        }
        None => match least_generator(&pic, &reps, r, pp) {
            Some(x) => (reps[x].q, x),
            None => return invalid(format!("the {p}-part of Pic(O_{{{p}^{d}}}) is not cyclic")),
        },
    };
    if pp < order {
        return invalid(format!("the {p}-part of Pic(O_{{{p}^{d}}}) is too small for G_{n}"));
    }
    let g = pic.pow(gen_class, r);
    let quotient = (0..pic.len())
        .map(|x| {
            let e = dlog(&pic, g, pic.pow(x, r), pp).expect("p-part element outside the cyclic subgroup");
            e % order
        })
        .collect::<Vec<_>>();
    Ok(AnticycLayer { k: *k, p, n, order, d, experimental, pic, generator_prime: q, quotient })
}

/// Class of the least representative prime whose class generates the p-part.
fn least_generator(pic: &RingClassGroup, reps: &[PrimeRep], r: u64, pp: u64) -> Option<usize> {
    let mut cands: Vec<(u64, usize)> = reps.iter().enumerate().filter(|(_, rp)| rp.q > 1).map(|(i, rp)| (rp.q, i)).collect();
    cands.sort();
    cands.into_iter().map(|(_, i)| i).find(|x| pic.order_of(pic.pow(*x, r)) == pp)
}

/// Layers 0..=n_max with one generator prime shared by all of them.
pub fn anticyclotomic_tower(k: &ImagQuadField, p: u64, n_max: u32) -> Result<Vec<AnticycLayer>> {
    let top = build(k, p, n_max, None)?;
    let reps = prime_representatives(&top.pic, p)?;
    let gen = reps.iter().find(|r| r.q == top.generator_prime && top.quotient[top.pic.class_of(&r.ideal)] == 1 % top.order).unwrap().ideal;
    let gen = (top.generator_prime, gen);
    let mut out: Vec<AnticycLayer> = (0..n_max).map(|n| build(k, p, n, Some(gen))).collect::<Result<_>>()?;
    out.push(top);
    Ok(out)
}

pub fn anticyclotomic_layer(k: &ImagQuadField, p: u64, n: u32) -> Result<AnticycLayer> {
    build(k, p, n, None)
}

impl AnticycLayer {
    /// Image in G_n of the class of an ideal of O_C (C a power of p, C ≥ p^d) prime to p.
    pub fn project_ideal(&self, ideal: &QLattice) -> u64 {
        let o = QLattice::order(self.k.d_k, self.pic.conductor);
        self.quotient[self.pic.class_of(&o.mul(ideal))]
    }

    pub fn summary(&self) -> LayerSummary {
        LayerSummary { n: self.n, order: self.order, d: self.d, pic_order: self.pic.len(), generator_prime: self.generator_prime, experimental: self.experimental }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta_field_layers() {
        let k = ImagQuadField::new(-3).unwrap();
        let l0 = anticyclotomic_layer(&k, 5, 0).unwrap();
        assert_eq!(l0.order, 1);
        assert!(l0.quotient.iter().all(|x| *x == 0));
        let l1 = anticyclotomic_layer(&k, 5, 1).unwrap();
        assert_eq!(l1.d, 2);
        assert_eq!(l1.pic.len(), 10);
        let mut hit = l1.quotient.clone();
        hit.sort();
        hit.dedup();
        assert_eq!(hit, vec![0, 1, 2, 3, 4]);
        // homomorphism
        for x in 0..l1.pic.len() {
            for y in 0..l1.pic.len() {
                assert_eq!(l1.quotient[l1.pic.mul(x, y)], (l1.quotient[x] + l1.quotient[y]) % 5);
            }
        }
    }

    #[test]
    fn tower_is_compatible() {
        let k = ImagQuadField::new(-3).unwrap();
        let t = anticyclotomic_tower(&k, 5, 2).unwrap();
        assert_eq!(t[2].d, 3);
        assert_eq!(t[2].pic.len(), 50);
        let reps = prime_representatives(&t[2].pic, 5).unwrap();
        for r in &reps {
            let a = t[2].project_ideal(&r.ideal);
            assert_eq!(t[1].project_ideal(&r.ideal), a % 5);
            assert_eq!(t[0].project_ideal(&r.ideal), 0);
        }
    }
}
