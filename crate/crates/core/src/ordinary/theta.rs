//! Finite-level theta elements θ_n ∈ Z/p^M[G_n], their products L_n = θ_n θ_n^*, and
//! character values in a cyclotomic extension of Z/p^M.

use serde::Serialize;

use crate::arith::{self, mod_inv, mod_mul, modp};
use crate::cm::anticyc::AnticycLayer;
use crate::cm::galois::{extended_galois_group, ExtendedGaloisGroup, GalElt};
use crate::cm::ring_class_group;
use crate::error::{internal, invalid, Result};
use crate::heegner::{standard_lift, standard_lifts, twisted_trace, HeegnerFamily, HeegnerPoint};
use crate::ordinary::EigenData;
use crate::shimura::ShimuraTower;

/// Element of Z/p^M[Z/p^n], coefficient k at the group element k.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GroupRingElt {
    pub order: u64,
    pub modulus: i128,
    pub coeffs: Vec<i128>,
}

impl GroupRingElt {
    pub fn zero(order: u64, modulus: i128) -> Self {
        GroupRingElt { order, modulus, coeffs: vec![0; order as usize] }
    }

    pub fn mul(&self, o: &GroupRingElt) -> GroupRingElt {
        let n = self.order as usize;
        let mut out = GroupRingElt::zero(self.order, self.modulus);
        for i in 0..n {
            if self.coeffs[i] == 0 {
                continue;
            }
            for j in 0..n {
                let k = (i + j) % n;
                out.coeffs[k] = modp(out.coeffs[k] + mod_mul(self.coeffs[i], o.coeffs[j], self.modulus), self.modulus);
            }
        }
        out
    }

    /// σ ↦ σ^{-1}.
    pub fn star(&self) -> GroupRingElt {
        let n = self.order as usize;
        let coeffs = (0..n).map(|k| self.coeffs[(n - k) % n]).collect();
        GroupRingElt { coeffs, ..self.clone() }
    }

    /// Multiplication by the group element τ.
    pub fn translate(&self, tau: u64) -> GroupRingElt {
        let n = self.order as usize;
        let t = (tau % self.order) as usize;
        let coeffs = (0..n).map(|k| self.coeffs[(k + n - t) % n]).collect();
        GroupRingElt { coeffs, ..self.clone() }
    }

    pub fn augmentation(&self) -> i128 {
        self.coeffs.iter().fold(0, |a, c| modp(a + c, self.modulus))
    }

    /// Image under Z/p^n → Z/q for q | p^n.
    pub fn project(&self, q: u64) -> GroupRingElt {
        let mut out = GroupRingElt::zero(q, self.modulus);
        for (k, c) in self.coeffs.iter().enumerate() {
            let j = k % q as usize;
            out.coeffs[j] = modp(out.coeffs[j] + c, self.modulus);
        }
        out
    }

    pub fn scale(&self, s: i128) -> GroupRingElt {
        GroupRingElt { coeffs: self.coeffs.iter().map(|c| mod_mul(*c, s, self.modulus)).collect(), ..self.clone() }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ThetaElement {
    pub n: u32,
    /// d(n): θ_n is built from P(p^d, m).
    pub d: u32,
    pub level: u32,
    pub precision: u32,
    pub generator_prime: u64,
    pub alpha_p: i128,
    pub element: GroupRingElt,
    /// Same coefficients from the last lift of each coset instead of the first.
    pub section_independent: bool,
    /// Same coefficients from the per-lift sum Σ_x η(P^x)·x̄^{-1}, without choosing sections.
    pub matches_direct_sum: bool,
}

struct ThetaCtx<'a> {
    st: &'a ShimuraTower,
    fam: &'a HeegnerFamily,
    eig: &'a EigenData,
    layer: &'a AnticycLayer,
    pt: &'a HeegnerPoint,
    g: ExtendedGaloisGroup,
    /// Standard lifts of all classes of Pic(O_{cp^{d+m}}) with their image in G_n.
    lifts: Vec<(GalElt, u64)>,
}

fn avoid(st: &ShimuraTower, fam: &HeegnerFamily) -> u64 {
    st.tower.n() * fam.setup.aux.iter().map(|a| a.ell).product::<u64>()
}

impl<'a> ThetaCtx<'a> {
    fn new(st: &'a ShimuraTower, fam: &'a HeegnerFamily, layer: &'a AnticycLayer, eig: &'a EigenData) -> Result<Self> {
        let p = fam.setup.p;
        let m = eig.level;
        if layer.p as i128 != p {
            return invalid("layer and family use different primes");
        }
        if layer.pic.conductor != p.pow(layer.d) {
            return internal("layer is not read off Pic(O_{p^d})");
        }
        let base = fam.c * p.pow(layer.d);
        let Some(pt) = fam.points.get(&(base, m)) else {
            return invalid(format!("θ_{} needs P({base},{m}), i.e. family depth d(n) = {} at level {m}", layer.n, layer.d));
        };
        let g = extended_galois_group(&fam.setup.k, pt.conductor, p as u64, m, avoid(st, fam))?;
        let mut lifts = Vec::with_capacity(g.pic.len());
        for c in 0..g.pic.len() {
            let x = standard_lift(&g, c)?;
            let img = layer.quotient[g.restrict_class(&x, &layer.pic)];
            lifts.push((x, img));
        }
        Ok(ThetaCtx { st, fam, eig, layer, pt, g, lifts })
    }

    fn eta(&self, set: &[GalElt]) -> Result<i128> {
        let lv = self.st.level(self.eig.level);
        let d = twisted_trace(&self.g, set, &self.fam.setup.k, lv, &self.pt.cm)?;
        self.eig.eval(lv, &d)
    }

    fn alpha_inv_n(&self) -> Result<i128> {
        let md = self.eig.modulus;
        let Some(ai) = mod_inv(self.eig.alpha_p, md) else { return internal("α_p is not a unit") };
        Ok(arith::mod_pow(ai, self.layer.n as u128, md))
    }

    fn kernel(&self) -> Vec<GalElt> {
        self.lifts.iter().filter(|(_, q)| *q == 0).map(|(x, _)| *x).collect()
    }

    /// Σ_σ η(𝒬_n^{s(σ)τ}) σ^{-1} with s the first (or last) lift over σ.
    fn by_sections(&self, last: bool, tau: Option<&GalElt>) -> Result<GroupRingElt> {
        let order = self.layer.order;
        let md = self.eig.modulus;
        let ker = self.kernel();
        let mut out = GroupRingElt::zero(order, md);
        for sigma in 0..order {
            let mut over = self.lifts.iter().filter(|(_, q)| *q == sigma).map(|(x, _)| x);
            let s = if last { over.next_back() } else { over.next() };
            let Some(s) = s else { return internal(format!("no lift over σ = {sigma}")) };
            let s = match tau {
                Some(t) => self.g.mul(s, t),
                None => *s,
            };
            let set: Vec<GalElt> = ker.iter().map(|e| self.g.mul(e, &s)).collect();
            let k = ((order - sigma) % order) as usize;
            out.coeffs[k] = modp(out.coeffs[k] + self.eta(&set)?, md);
        }
        Ok(out.scale(self.alpha_inv_n()?))
    }

    /// Σ_x η(P^x)·x̄^{-1} over all lifts x.
    fn direct(&self) -> Result<GroupRingElt> {
        let order = self.layer.order;
        let md = self.eig.modulus;
        let mut out = GroupRingElt::zero(order, md);
        for (x, q) in &self.lifts {
            let k = ((order - q) % order) as usize;
            out.coeffs[k] = modp(out.coeffs[k] + self.eta(std::slice::from_ref(x))?, md);
        }
        Ok(out.scale(self.alpha_inv_n()?))
    }
}

pub fn theta_element(st: &ShimuraTower, fam: &HeegnerFamily, layer: &AnticycLayer, eig: &EigenData) -> Result<ThetaElement> {
    let cx = ThetaCtx::new(st, fam, layer, eig)?;
    let first = cx.by_sections(false, None)?;
    let last = cx.by_sections(true, None)?;
    let direct = cx.direct()?;
    Ok(ThetaElement {
        n: layer.n,
        d: layer.d,
        level: eig.level,
        precision: eig.precision,
        generator_prime: layer.generator_prime,
        alpha_p: eig.alpha_p,
        section_independent: first == last,
        matches_direct_sum: first == direct,
        element: first,
    })
}

/// θ_n computed from 𝒬_n^τ̃, τ̃ the first lift of the G_n-element τ.
pub fn theta_translated(st: &ShimuraTower, fam: &HeegnerFamily, layer: &AnticycLayer, eig: &EigenData, tau: u64) -> Result<GroupRingElt> {
    let cx = ThetaCtx::new(st, fam, layer, eig)?;
    let Some((t, _)) = cx.lifts.iter().find(|(_, q)| *q == tau % layer.order) else { return internal("no lift of τ") };
    let t = *t;
    cx.by_sections(false, Some(&t))
}

/// L_n = θ_n·θ_n^*.
pub fn lp_truncation(theta: &ThetaElement) -> GroupRingElt {
    theta.element.mul(&theta.element.star())
}

/// ν_{n,n-1}(θ_n) = θ_{n-1}, one entry per consecutive pair.
pub fn compatibility(thetas: &[ThetaElement]) -> Vec<bool> {
    thetas.windows(2).map(|w| w[1].element.project(w[0].element.order) == w[0].element).collect()
}

/// 𝒥_c-avatar Σ_{σ ∈ Pic(O_c)} η(𝒫_c^σ)·σ^{-1}, indexed by class of Pic(O_c).
pub fn j_element(st: &ShimuraTower, fam: &HeegnerFamily, eig: &EigenData) -> Result<Vec<i128>> {
    let c = fam.c;
    let m = eig.level;
    let Some(pt) = fam.points.get(&(c, m)) else { return invalid(format!("P({c},{m}) is not in the family")) };
    let g = extended_galois_group(&fam.setup.k, pt.conductor, fam.setup.p as u64, m, avoid(st, fam))?;
    let low = ring_class_group(&fam.setup.k, c)?;
    let ker = standard_lifts(&g, c)?;
    let lv = st.level(m);
    let md = eig.modulus;
    let all = (0..g.pic.len()).map(|x| standard_lift(&g, x)).collect::<Result<Vec<_>>>()?;
    let mut out = vec![0i128; low.len()];
    for sigma in 0..low.len() {
        let Some(s) = all.iter().find(|x| g.restrict_class(x, &low) == sigma).copied() else {
            return internal("no lift of a class of Pic(O_c)");
        };
        let set: Vec<GalElt> = ker.iter().map(|e| g.mul(e, &s)).collect();
        let d = twisted_trace(&g, &set, &fam.setup.k, lv, &pt.cm)?;
        let k = low.inv(sigma);
        out[k] = modp(out[k] + eig.eval(lv, &d)?, md);
    }
    Ok(out)
}

/// Z/p^M[ζ] with ζ a primitive p^n-th root of unity, as polynomials modulo Φ_{p^n}.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CycloElt {
    pub p: u64,
    pub n: u32,
    pub modulus: i128,
    /// Coefficients of 1, ζ, ..., ζ^{φ(p^n)-1}.
    pub coeffs: Vec<i128>,
}

impl CycloElt {
    /// Φ_{p^n}(x) = Σ_{i<p} x^{i p^{n-1}}; empty for n = 0 (the ring is Z/p^M).
    pub fn ring_name(&self) -> String {
        if self.n == 0 {
            format!("Z/{}^{}", self.p, arith::val(self.modulus, self.p as i128))
        } else {
            format!("Z/{}^{}[x]/Phi_{}(x)", self.p, arith::val(self.modulus, self.p as i128), (self.p as i128).pow(self.n))
        }
    }

    /// Reduce Σ c_k x^k (k < p^n) modulo Φ_{p^n}.
    fn from_powers(p: u64, n: u32, modulus: i128, powers: &[i128]) -> Self {
        let mut c = powers.to_vec();
        if n == 0 {
            return CycloElt { p, n, modulus, coeffs: vec![powers.iter().fold(0, |a, x| modp(a + x, modulus))] };
        }
        let step = (p as usize).pow(n - 1);
        let phi = step * (p as usize - 1);
        for e in (phi..c.len()).rev() {
            let v = c[e];
            if v == 0 {
                continue;
            }
            c[e] = 0;
            // x^e = -Σ_{i=0}^{p-2} x^{e - phi + i·step}
            for i in 0..p as usize - 1 {
                let j = e - phi + i * step;
                c[j] = modp(c[j] - v, modulus);
            }
        }
        c.truncate(phi);
        CycloElt { p, n, modulus, coeffs: c.into_iter().map(|x| modp(x, modulus)).collect() }
    }

    pub fn mul(&self, o: &CycloElt) -> CycloElt {
        let order = (self.p as usize).pow(self.n);
        let mut powers = vec![0i128; order.max(1)];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                let k = (i + j) % order.max(1);
                powers[k] = modp(powers[k] + mod_mul(*a, *b, self.modulus), self.modulus);
            }
        }
        CycloElt::from_powers(self.p, self.n, self.modulus, &powers)
    }
}

/// χ_k(x) = Σ x_σ ζ^{kσ} for χ_k(σ) = ζ^{kσ}, ζ of order p^n; k ≡ 0 is the trivial character.
pub fn chi_special_value(x: &GroupRingElt, p: u64, k: u64) -> Result<CycloElt> {
    let n = arith::val(x.order as i128, p as i128);
    if (p as u128).pow(n) != x.order as u128 {
        return invalid(format!("group order {} is not a power of {p}", x.order));
    }
    let mut powers = vec![0i128; x.order as usize];
    for (s, c) in x.coeffs.iter().enumerate() {
        let e = ((k as u128 * s as u128) % x.order as u128) as usize;
        powers[e] = modp(powers[e] + c, x.modulus);
    }
    Ok(CycloElt::from_powers(p, n, x.modulus, &powers))
}

/// χ_k(θ_n) straight from the per-lift terms, without sections or a group-ring element.
pub fn chi_of_theta_direct(st: &ShimuraTower, fam: &HeegnerFamily, layer: &AnticycLayer, eig: &EigenData, k: u64) -> Result<CycloElt> {
    let cx = ThetaCtx::new(st, fam, layer, eig)?;
    let order = layer.order;
    let md = eig.modulus;
    let ai = cx.alpha_inv_n()?;
    let mut powers = vec![0i128; order as usize];
    for (x, q) in &cx.lifts {
        let e = ((k as u128 * ((order - q) % order) as u128) % order as u128) as usize;
        let v = mod_mul(cx.eta(std::slice::from_ref(x))?, ai, md);
        powers[e] = modp(powers[e] + v, md);
    }
    Ok(CycloElt::from_powers(layer.p, layer.n, md, &powers))
}
