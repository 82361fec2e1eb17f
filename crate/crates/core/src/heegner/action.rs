//! Galois action on CM points, refined points (class, fiber, embedding), and twisted traces.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::arith::{self, mod_inv, mod_mul, modp, q, Q};
use crate::cm::galois::{ExtendedGaloisGroup, GalElt};
use crate::cm::ideals::KElt;
use crate::cm::{ring_class_group, ImagQuadField};
use crate::error::{internal, invalid, Result};
use crate::heegner::{embed, verify_optimal, CmPoint};
use crate::lattice::QuatLattice;
use crate::quaternion::Quaternion;
use crate::shimura::{add_point, beta_into, Divisor, ShimuraLevel, TildePoint};

/// P^σ = [(a·f̂(σ), f)]: the lattice is multiplied on the right by f(𝔮) and β by the scalar t.
pub fn galois_act(g: &ExtendedGaloisGroup, sigma: &GalElt, k: &ImagQuadField, cm: &CmPoint, lv: &ShimuraLevel) -> Result<CmPoint> {
    if g.conductor % cm.conductor != 0 {
        return invalid(format!("G({}, {}) does not act through conductor {}", g.conductor, g.u, cm.conductor));
    }
    if cm.m > g.u {
        return invalid(format!("cyclotomic depth {} is below the level {}", g.u, cm.m));
    }
    if cm.m != lv.m {
        return invalid("CM point and level disagree");
    }
    let ideal = &g.reps[sigma.class].ideal;
    let lattice = if sigma.class == 0 {
        cm.lattice.clone()
    } else {
        let fq: Vec<Quaternion> = ideal.basis().iter().map(|x| embed(k, &cm.omega, x)).collect();
        let mut gens = Vec::with_capacity(16);
        for l in cm.lattice.basis() {
            for y in &fq {
                gens.push(l * *y);
            }
        }
        QuatLattice::from_generators(&gens)?
    };
    let t = if g.pu == 1 { 1 } else { sigma.t };
    let beta = beta_into(&lattice, &cm.beta.scale(q(t)), lv.p, lv.modulus())?;
    Ok(CmPoint { conductor: cm.conductor, m: cm.m, lattice, beta, omega: cm.omega })
}

/// A Heegner point as (class i, fiber t, f(√-D) in O_R(I_i)), normalized under Γ_i.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RefinedPoint {
    pub class: usize,
    pub t: i128,
    pub omega: [Q; 4],
}

#[derive(Serialize, Clone, Debug)]
pub struct RefinedSummary {
    pub class: usize,
    pub t: i128,
    pub omega: [String; 4],
}

impl RefinedPoint {
    /// Least (t·a(γ), γωγ^{-1}) over γ ∈ Γ_i.
    pub fn normal(lv: &ShimuraLevel, class: usize, t: i128, omega: &Quaternion) -> Result<Self> {
        let mut best: Option<RefinedPoint> = None;
        for gam in &lv.classes.unit_groups[class] {
            let Some(a) = lv.a_coord(gam) else { return internal("unit is not p-integral") };
            let w = *gam * *omega * gam.inverse()?;
            let cand = RefinedPoint { class, t: mod_mul(t, a, lv.pm), omega: w.c };
            if best.is_none_or(|b| cand < b) {
                best = Some(cand);
            }
        }
        best.ok_or_else(|| crate::Error::Internal("empty unit group".into()))
    }

    pub fn from_cm(lv: &ShimuraLevel, cm: &CmPoint) -> Result<Self> {
        let (i, b, t) = lv.read_raw(&cm.adelic())?;
        let w = b * cm.omega * b.inverse()?;
        Self::normal(lv, i, t, &w)
    }

    pub fn omega_q(&self, lv: &ShimuraLevel) -> Quaternion {
        let o = &lv.order;
        Quaternion::new(o.a, o.b, self.omega)
    }

    /// CM point with lattice I_i and β ≡ diag(t^{-1}, 1).
    pub fn to_cm(&self, lv: &ShimuraLevel, conductor: i128) -> Result<CmPoint> {
        let mut t = self.t;
        if lv.pm == 1 {
            t = 1;
        }
        let rep = lv.representative(&TildePoint { class: self.class, t })?;
        Ok(CmPoint { conductor, m: lv.m, lattice: rep.lattice, beta: rep.beta, omega: self.omega_q(lv) })
    }

    pub fn tilde(&self, lv: &ShimuraLevel) -> TildePoint {
        lv.normalize(self.class, self.t)
    }

    pub fn summary(&self) -> RefinedSummary {
        RefinedSummary { class: self.class, t: self.t, omega: self.omega.map(|x| arith::q_str(&x)) }
    }
}

/// All Heegner points of conductor C on X̃_m (p^m | C): optimal embeddings f of 𝒪_C into each
/// O_R(I_i) with a(φ_p(f(Cω_K))) ≡ c(φ_p(f(Cω_K))) ≡ 0 mod p^m, times every fiber.
pub fn heegner_points(lv: &ShimuraLevel, k: &ImagQuadField, conductor: i128, extra: u64) -> Result<BTreeSet<RefinedPoint>> {
    if conductor % lv.pm != 0 {
        return invalid(format!("p^{} does not divide the conductor {conductor}", lv.m));
    }
    // z = k0 + Cω_K has trace in {0, 1}; f(z) determines f
    let k0 = -arith::q_floor(&(q(conductor * k.d_k) / q(2)));
    let z = KElt::int(k.d_k, k0, conductor);
    let (nz, tz) = (z.norm(), z.trace());
    let s = q(k.sqrt_scale());
    let mut out = BTreeSet::new();
    for (i, o) in lv.classes.right_orders.iter().enumerate() {
        let sv = crate::lattice::enumerate::short_vectors(&o.gram(), nz, true);
        let mut seen = BTreeSet::new();
        for c in sv {
            let x = o.from_coords(&c);
            if x.trd() != tz {
                continue;
            }
            let y = x - Quaternion::scalar(o.a, o.b, q(k0));
            let w = (y.scale(q(2) / q(conductor)) - Quaternion::scalar(o.a, o.b, q(k.d_k))).scale(Q::from_integer(1) / s);
            if !verify_optimal(k, &w, o, conductor, extra * lv.p as u64).certified {
                continue;
            }
            let Some(img) = lv.split.image(&y) else { continue };
            if modp(img[0][0], lv.pm) != 0 || modp(img[1][0], lv.pm) != 0 {
                continue;
            }
            seen.insert(w.c);
        }
        for wc in seen {
            let w = Quaternion::new(o.a, o.b, wc);
            for t in arith::units(lv.pm) {
                out.insert(RefinedPoint::normal(lv, i, t, &w)?);
            }
        }
    }
    Ok(out)
}

pub fn act_refined(g: &ExtendedGaloisGroup, sigma: &GalElt, k: &ImagQuadField, lv: &ShimuraLevel, conductor: i128, r: &RefinedPoint) -> Result<RefinedPoint> {
    let cm = r.to_cm(lv, conductor)?;
    RefinedPoint::from_cm(lv, &galois_act(g, sigma, k, &cm, lv)?)
}

#[derive(Serialize, Clone, Debug)]
pub struct FreenessReport {
    pub conductor: i128,
    pub level: u32,
    pub group_order: usize,
    pub points: usize,
    pub orbits: usize,
    /// Orbit of the family point has group_order distinct members, all Heegner points.
    pub base_orbit_size: usize,
    pub closed: bool,
    pub free: bool,
    pub action_law: bool,
    pub holds: bool,
}

/// Exhaustive freeness, closure and composition-law check of G on the conductor-C points at level m.
pub fn freeness(g: &ExtendedGaloisGroup, k: &ImagQuadField, lv: &ShimuraLevel, base: &CmPoint, extra: u64) -> Result<FreenessReport> {
    let conductor = base.conductor;
    let pts = heegner_points(lv, k, conductor, extra)?;
    let els = g.elements();
    let e = g.identity();
    let p0 = RefinedPoint::from_cm(lv, base)?;
    let mut closed = pts.contains(&p0);
    let mut free = true;
    let mut action_law = true;
    let mut orbit = BTreeSet::new();
    // images[s][σ]
    let list: Vec<RefinedPoint> = pts.iter().copied().collect();
    let mut images = Vec::with_capacity(list.len());
    for r in &list {
        let row: Vec<RefinedPoint> = els.iter().map(|s| act_refined(g, s, k, lv, conductor, r)).collect::<Result<_>>()?;
        images.push(row);
    }
    for (a, r) in list.iter().enumerate() {
        for (si, s) in els.iter().enumerate() {
            let img = images[a][si];
            if !pts.contains(&img) {
                closed = false;
                continue;
            }
            if (*s == e) != (img == *r) {
                free = false;
            }
            let b = list.binary_search(&img).unwrap();
            for (ti, t) in els.iter().enumerate() {
                let st = g.index_of(&g.mul(s, t));
                if images[b][ti] != images[a][st] {
                    action_law = false;
                }
            }
        }
    }
    if let Ok(a) = list.binary_search(&p0) {
        orbit.extend(images[a].iter().copied());
    }
    let mut seen = BTreeSet::new();
    let mut orbits = 0;
    for (a, r) in list.iter().enumerate() {
        if seen.insert(*r) {
            orbits += 1;
            seen.extend(images[a].iter().copied());
        }
    }
    let base_orbit_size = orbit.len();
    let holds = closed && free && action_law && base_orbit_size == g.order();
    Ok(FreenessReport { conductor, level: lv.m, group_order: g.order(), points: list.len(), orbits, base_orbit_size, closed, free, action_law, holds })
}

/// Lifts of Gal(H_C/H_lower) into G(C, u): one element per class of ker(Pic(O_C) → Pic(O_lower)),
/// with ε_cyc ≡ 1 or ω(g) mod p^u for ω the Teichmüller character and g the least non-residue.
pub fn standard_lifts(g: &ExtendedGaloisGroup, lower: i128) -> Result<Vec<GalElt>> {
    if g.conductor % lower != 0 {
        return invalid(format!("{lower} does not divide {}", g.conductor));
    }
    let low = ring_class_group(&g.k, lower)?;
    let mut out = Vec::new();
    for c in 0..g.pic.len() {
        let probe = GalElt { class: c, t: g.cyc[0] };
        if g.restrict_class(&probe, &low) != 0 {
            continue;
        }
        out.push(standard_lift(g, c)?);
    }
    Ok(out)
}

/// The lift of a class of Pic(O_C) with ε_cyc ∈ {1, ω(g)}.
pub fn standard_lift(g: &ExtendedGaloisGroup, class: usize) -> Result<GalElt> {
    let tg = arith::teichmuller(arith::least_nonresidue(g.p), g.p, g.u.max(1));
    let targets = [modp(1, g.pu), modp(tg, g.pu)];
    match g.cyc.iter().find(|t| targets.contains(&g.eps(&GalElt { class, t: **t }))) {
        Some(t) => Ok(GalElt { class, t: *t }),
        None => internal(format!("no standard lift for class {class}")),
    }
}

/// s ≡ 1 mod p with s² = ε_wild = ε·ω(ε)^{-1}; Θ(η) acts on divisors as ⟨s⟩.
pub fn theta_weight(g: &ExtendedGaloisGroup, x: &GalElt) -> i128 {
    if g.pu == 1 {
        return 0;
    }
    let e = g.eps(x);
    let w = arith::teichmuller(e, g.p, g.u);
    let wild = mod_mul(e, mod_inv(w, g.pu).unwrap(), g.pu);
    let r = arith::sqrt_mod_pk(wild, g.p, g.u).expect("wild part is a square");
    if modp(r, g.p) == 1 {
        r
    } else {
        modp(-r, g.pu)
    }
}

/// Σ_{η ∈ lifts} ⟨θ(η)⟩^{-1} P^η on X̃_m.
pub fn twisted_trace(g: &ExtendedGaloisGroup, lifts: &[GalElt], k: &ImagQuadField, lv: &ShimuraLevel, cm: &CmPoint) -> Result<Divisor> {
    let mut out = Divisor::new();
    for eta in lifts {
        let img = galois_act(g, eta, k, cm, lv)?;
        let tp = lv.read(&img.adelic())?;
        let pt = if lv.pm == 1 {
            tp
        } else {
            let s = modp(theta_weight(g, eta), lv.pm);
            lv.normalize(tp.class, mod_mul(mod_inv(s, lv.pm).unwrap(), tp.t, lv.pm))
        };
        add_point(&mut out, pt, 1);
    }
    Ok(out)
}

/// Plain orbit sum Σ_{σ ∈ set} P̃^σ.
pub fn orbit_sum(g: &ExtendedGaloisGroup, set: &[GalElt], k: &ImagQuadField, lv: &ShimuraLevel, cm: &CmPoint) -> Result<Divisor> {
    let mut out = Divisor::new();
    for s in set {
        let img = galois_act(g, s, k, cm, lv)?;
        add_point(&mut out, lv.read(&img.adelic())?, 1);
    }
    Ok(out)
}

#[derive(Serialize, Clone, Debug)]
pub struct DiamondCheck {
    pub t: i128,
    pub action: TildePoint,
    pub diamond: TildePoint,
    pub ok: bool,
}

/// P̃^σ = ⟨ϑ(σ)⟩P̃ for σ = (1, t) ∈ Gal(H_C(μ_{p^m})/H_C), with ϑ(σ) ≡ ±t^{-1} mod p^m.
pub fn diamond_relation(g: &ExtendedGaloisGroup, k: &ImagQuadField, lv: &ShimuraLevel, cm: &CmPoint) -> Result<Vec<DiamondCheck>> {
    let base = lv.read(&cm.adelic())?;
    let mut out = Vec::new();
    for s in g.cyclotomic_part() {
        let img = galois_act(g, &s, k, cm, lv)?;
        let action = lv.read(&img.adelic())?;
        let theta = mod_inv(s.t, lv.pm).unwrap_or(0);
        let diamond = lv.normalize(base.class, mod_mul(theta, base.t, lv.pm));
        out.push(DiamondCheck { t: s.t, action, diamond, ok: action == diamond });
    }
    Ok(out)
}
