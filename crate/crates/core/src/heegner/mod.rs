//! Optimal embeddings of quadratic orders into Eichler orders and the compatible families
//! of Heegner points P̃_{c,m} on X̃_m.

pub mod action;
pub mod local;
pub mod verify;

use std::collections::BTreeMap;

use num_traits::Zero;
use serde::Serialize;

use crate::arith::{self, mod_inv, mod_mul, modp, q, Q};
use crate::cm::ideals::KElt;
use crate::cm::{check_heegner_hypothesis, ImagQuadField};
use crate::error::{internal, invalid, Error, Result};
use crate::lattice::enumerate::short_vectors;
use crate::lattice::order::maximal_order;
use crate::lattice::{right_class_set, QuatLattice};
use crate::quaternion::{PadicSplitting, Quaternion, QuaternionAlgebra};
use crate::shimura::{exponent_in, reduce_beta, AdelicPoint, ShimuraLevel, ShimuraTower, TildePoint};
use crate::zmod::{m2_det, m2_inv, m2_mul, Mat2};

pub use action::{galois_act, standard_lift, standard_lifts, twisted_trace, RefinedPoint};
pub use local::{local_embedding, LocalCase, LocalEmbedding};

/// f(u + vω_K) = u + v(D_K + sω)/2 where ω = f(√-D) and √D_K = s√-D.
pub fn embed(k: &ImagQuadField, omega: &Quaternion, x: &KElt) -> Quaternion {
    let s = q(k.sqrt_scale());
    Quaternion::scalar(omega.a, omega.b, x.u + x.v * q(k.d_k) / q(2)) + omega.scale(x.v * s / q(2))
}

/// Ordering of seeds: integral standard coordinates first, then lexicographic with nonzero
/// entries of small height first and positive before negative.
fn seed_key(x: &Quaternion) -> (bool, [(bool, Q, bool); 3]) {
    let f = |c: Q| (c.is_zero(), arith::q_abs(&c), c < Q::zero());
    (x.denom() != 1, [f(x.c[1]), f(x.c[2]), f(x.c[3])])
}

/// All ω with trd 0, nrd D and f(𝒪_K) ⊆ `order`, sorted by `seed_key`.
pub fn embedding_candidates(order: &QuatLattice, k: &ImagQuadField) -> Vec<Quaternion> {
    // ω = 2f(ω_K) - D_K when s = 1, so ω lies in Z + 2·order
    let lam = if k.sqrt_scale() == 1 {
        let mut g = vec![Quaternion::one(order.a, order.b)];
        g.extend(order.basis().iter().map(|e| e.scale(q(2))));
        QuatLattice::from_generators(&g).expect("Z + 2R has full rank")
    } else {
        order.clone()
    };
    let mut out: Vec<Quaternion> = short_vectors(&lam.gram(), q(k.d), true)
        .iter()
        .map(|c| lam.from_coords(c))
        .filter(|w| w.trd().is_zero() && w.nrd() == q(k.d) && order.contains(&embed(k, w, &k.omega())))
        .collect();
    out.sort_by_key(seed_key);
    out
}

/// K embeds in B only if no prime of N⁻ splits in K.
pub fn check_embeds(alg: &QuaternionAlgebra, k: &ImagQuadField) -> Result<()> {
    for ell in arith::prime_divisors(alg.discriminant()) {
        if k.kronecker(ell) == 1 {
            return invalid(format!("K = Q(sqrt({})) does not embed in B: {ell} divides N- and splits in K", k.d_k));
        }
    }
    Ok(())
}

/// Seed ω = g(√-D) inside a maximal order of `alg`.
pub fn global_embedding_seed(alg: &QuaternionAlgebra, k: &ImagQuadField) -> Result<Quaternion> {
    check_embeds(alg, k)?;
    let max = maximal_order(alg)?.lattice;
    if let Some(w) = embedding_candidates(&max, k).first() {
        return Ok(*w);
    }
    let set = right_class_set(&max, alg.discriminant(), 1, 1)?;
    for o in set.right_orders.iter().skip(1) {
        if let Some(w) = embedding_candidates(o, k).first() {
            return Ok(*w);
        }
    }
    internal("no embedding of K found in any maximal order type")
}

/// Seed inside the right order of some level-0 class I_j; I_j is trivial at p.
#[derive(Clone, Debug)]
pub struct EmbeddingSeed {
    pub class: usize,
    pub ideal: QuatLattice,
    pub order: QuatLattice,
    pub omega: Quaternion,
}

fn level_seed(lv0: &ShimuraLevel, k: &ImagQuadField) -> Result<EmbeddingSeed> {
    for (j, o) in lv0.classes.right_orders.iter().enumerate() {
        if let Some(w) = embedding_candidates(o, k).first() {
            return Ok(EmbeddingSeed { class: j, ideal: lv0.classes.ideals[j].clone(), order: o.clone(), omega: *w });
        }
    }
    internal("no level-0 right order contains an embedded maximal order of K")
}

#[derive(Clone, Debug)]
pub struct OptimalEmbedding {
    pub omega: Quaternion,
    pub target_order: QuatLattice,
    pub certified_conductor: i128,
}

#[derive(Serialize, Clone, Debug, PartialEq, Eq)]
pub struct PrimeOptimality {
    pub prime: u64,
    pub expected_exponent: u32,
    pub exponent: u32,
    pub ok: bool,
}

#[derive(Serialize, Clone, Debug, PartialEq, Eq)]
pub struct OptimalityReport {
    pub conductor: i128,
    /// C' with f(K) ∩ order = f(𝒪_{C'}).
    pub intersection_conductor: i128,
    pub primes: Vec<PrimeOptimality>,
    /// No prime outside the listed ones divides C'.
    pub generic_ok: bool,
    pub certified: bool,
}

/// Compares f(K) ∩ order with f(𝒪_C). Elements of f(K) ∩ order are integral, so the
/// intersection is f(Z + C'𝒪_K) with C' the exponent of f(ω_K) modulo the order.
pub fn verify_optimal(k: &ImagQuadField, omega: &Quaternion, order: &QuatLattice, conductor: i128, extra: u64) -> OptimalityReport {
    let fw = embed(k, omega, &k.omega());
    let one = Quaternion::one(omega.a, omega.b);
    let c2 = if order.contains(&one) { exponent_in(order, &fw) } else { 0 };
    let bad = 2 * k.d_k.unsigned_abs() as u64 * conductor as u64 * extra.max(1);
    let mut primes = Vec::new();
    let mut rest = c2;
    for ell in arith::prime_divisors(bad) {
        let l = ell as i128;
        let e = if c2 == 0 { 0 } else { arith::val(c2, l) };
        let want = arith::val(conductor, l);
        if c2 != 0 {
            rest /= l.pow(e);
        }
        primes.push(PrimeOptimality { prime: ell, expected_exponent: want, exponent: e, ok: c2 != 0 && e == want });
    }
    let generic_ok = c2 != 0 && rest == 1;
    let certified = c2 == conductor && primes.iter().all(|p| p.ok) && generic_ok;
    OptimalityReport { conductor, intersection_conductor: c2, primes, generic_ok, certified }
}

#[derive(Serialize, Clone, Debug)]
pub struct Def31Report {
    pub optimal: OptimalityReport,
    /// f_p^{-1}(f_p(𝒪_C^×) ∩ g_p^{-1}U_{m,p}g_p) = 𝒪_C^× ∩ (1 + p^m 𝒪_K)^×
    pub p_local: bool,
    pub precision: u32,
    pub holds: bool,
}

/// Definition-3.1 check for the pair (g, f) where g is trivial away from p on the class
/// representative I_i and has p-component g_p. With x = α + β·Cω_K, g_p f_p(x) g_p^{-1} lies in
/// U_{m,p} exactly when α ≡ 1, provided the upper-left and lower-left entries of
/// G = g_p f_p(Cω_K) g_p^{-1} vanish mod p^m.
pub fn verify_def31(lv: &ShimuraLevel, k: &ImagQuadField, conductor: i128, class: usize, omega_f: &Quaternion, g_p: &Mat2, extra: u64) -> Result<Def31Report> {
    let order = &lv.classes.right_orders[class];
    let optimal = verify_optimal(k, omega_f, order, conductor, extra * lv.p as u64);
    let n = lv.modulus();
    let x = embed(k, omega_f, &KElt::int(k.d_k, 0, conductor));
    let Some(fx) = lv.split.image(&x) else { return invalid("embedding is not p-integral") };
    let Some(gi) = m2_inv(g_p, n) else { return invalid("g_p is not invertible") };
    let g = m2_mul(&m2_mul(g_p, &fx, n), &gi, n);
    let pm = lv.pm;
    let p_local = modp(g[0][0], pm) == 0 && modp(g[1][0], pm) == 0;
    let holds = optimal.certified && p_local;
    Ok(Def31Report { optimal, p_local, precision: lv.split.precision_m, holds })
}

/// Auxiliary inert prime ℓ ∤ Np with a splitting of R_0 at ℓ and A_ℓ with A_ℓ g_ℓ A_ℓ^{-1} = Φ_ℓ.
#[derive(Clone, Debug)]
pub struct AuxPrime {
    pub ell: u64,
    pub split: PadicSplitting,
    pub a: Mat2,
}

/// Some A with A·g·A^{-1} = model mod n, via cyclic vectors: A sends (e, ge) to (f, model·f).
pub fn conjugator(model: &Mat2, g: &Mat2, n: i128) -> Option<Mat2> {
    let cands = [[1i128, 0], [0, 1], [1, 1], [1, 2]];
    let cyc = |m: &Mat2| -> Option<Mat2> {
        cands.iter().find_map(|e| {
            let me = [modp(m[0][0] * e[0] + m[0][1] * e[1], n), modp(m[1][0] * e[0] + m[1][1] * e[1], n)];
            let b = [[e[0], me[0]], [e[1], me[1]]];
            mod_inv(m2_det(&b, n), n).map(|_| b)
        })
    };
    let be = cyc(g)?;
    let bf = cyc(model)?;
    let a = m2_mul(&bf, &m2_inv(&be, n)?, n);
    (m2_mul(&m2_mul(&a, g, n), &m2_inv(&a, n)?, n) == crate::zmod::m2_reduce(model, n)).then_some(a)
}

#[derive(Clone, Debug)]
pub struct HeegnerSetup {
    pub k: ImagQuadField,
    pub p: i128,
    pub precision: u32,
    pub modulus: i128,
    pub seed: EmbeddingSeed,
    pub local: LocalEmbedding,
    /// A with A g_p A^{-1} = φ_p^{(c,0)}; a_p^{(c,m)} = π^m A.
    pub a_p: Mat2,
    pub aux: Vec<AuxPrime>,
}

/// A point in adelic form [(a, g)]: lattice R_m a ∩ B, β with φ_p(β) ≡ a_p, and ω = g(√-D).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CmPoint {
    pub conductor: i128,
    pub m: u32,
    pub lattice: QuatLattice,
    pub beta: Quaternion,
    pub omega: Quaternion,
}

impl CmPoint {
    pub fn adelic(&self) -> AdelicPoint {
        AdelicPoint { lattice: self.lattice.clone(), beta: self.beta }
    }
}

#[derive(Clone, Debug)]
pub struct HeegnerPoint {
    /// c' with conductor c'p^m.
    pub base: i128,
    pub m: u32,
    pub conductor: i128,
    pub tilde: TildePoint,
    pub raw_t: i128,
    /// a = u γ_i b
    pub b: Quaternion,
    /// f = b g b^{-1}, an optimal embedding of 𝒪_{c'p^m} into O_R(I_i).
    pub omega_f: Quaternion,
    pub g_p: Mat2,
    pub cm: CmPoint,
    pub def31: Def31Report,
}

#[derive(Serialize, Clone, Debug)]
pub struct PointSummary {
    pub base_conductor: i128,
    pub m: u32,
    pub conductor: i128,
    pub class: usize,
    pub t: i128,
    pub omega: [String; 4],
    pub def31: Def31Report,
}

impl HeegnerPoint {
    pub fn summary(&self) -> PointSummary {
        PointSummary {
            base_conductor: self.base,
            m: self.m,
            conductor: self.conductor,
            class: self.tilde.class,
            t: self.tilde.t,
            omega: self.omega_f.coords_str(),
            def31: self.def31.clone(),
        }
    }
}

fn precision_error(what: String) -> Error {
    Error::Invalid(format!("precision insufficient: {what}"))
}

impl HeegnerSetup {
    /// Fixes g, A and the auxiliary data for the primes in `aux_primes` (all must be inert in K).
    pub fn new(st: &ShimuraTower, k: &ImagQuadField, aux_primes: &[u64]) -> Result<Self> {
        let tw = &st.tower;
        let p = tw.p as i128;
        check_embeds(&tw.algebra, k)?;
        let rep = check_heegner_hypothesis(tw.n_plus, tw.algebra.discriminant(), k, tw.p)?;
        if !rep.holds {
            let bad: Vec<String> = rep.primes.iter().map(|(l, s)| format!("{l}: {s}")).collect();
            return invalid(format!("Heegner hypothesis fails ({})", bad.join(", ")));
        }
        let lv0 = st.level(0);
        let seed = level_seed(lv0, k)?;
        let precision = tw.split.precision_m;
        let modulus = tw.split.modulus;
        let local = local_embedding(k, 1, tw.p, precision)?;
        let model = local.reduce(&local.phi(&local.sqrt_minus_d(), 0)).ok_or_else(|| Error::Internal("base model not integral".into()))?;
        let Some(g) = tw.split.image(&seed.omega) else { return internal("seed is not p-integral") };
        let a_p = conjugator(&model, &g, modulus).ok_or_else(|| Error::Internal("no conjugator at p".into()))?;
        let mut aux = Vec::new();
        for &ell in aux_primes {
            let l = ell as i128;
            if k.kronecker(ell) != -1 || tw.n().is_multiple_of(ell) || ell == tw.p {
                return invalid(format!("auxiliary prime {ell} must be inert in K and prime to Np"));
            }
            if seed.class != 0 && ell == lv0.classes.ell {
                return invalid(format!("auxiliary prime {ell} is the neighbor prime of the seed ideal"));
            }
            let mut pr = 3u32;
            while l.pow(pr) < 1_000 {
                pr += 1;
            }
            let split = PadicSplitting::for_order(&tw.algebra, &tw.order(0).lattice, ell, pr)?;
            let n = split.modulus;
            let model = [[0, modp(-1, n)], [modp(k.d, n), 0]];
            let Some(gl) = split.image(&seed.omega) else { return internal("seed is not integral at an auxiliary prime") };
            let a = conjugator(&model, &gl, n).ok_or_else(|| Error::Internal(format!("no conjugator at {ell}")))?;
            aux.push(AuxPrime { ell, split, a });
        }
        Ok(HeegnerSetup { k: *k, p, precision, modulus, seed, local, a_p, aux })
    }

    /// Smallest M for which the point of base conductor c' at level m is determined.
    pub fn required_precision(&self, base: i128, m: u32) -> u32 {
        let h = arith::val(base, self.p);
        (2 * m + h).max(m + h + 1)
    }

    /// [(a^{(c',m)}, g)] with a_p = π^{m+h} A, a_ℓ = π_ℓ^{n(ℓ)} A_ℓ at auxiliary ℓ, and a = γ_j at
    /// the seed class (trivial elsewhere).
    pub fn cm_point(&self, st: &ShimuraTower, base: i128, m: u32) -> Result<CmPoint> {
        let p = self.p;
        let h = arith::val(base, p);
        if self.precision < self.required_precision(base, m) {
            return Err(precision_error(format!("level {m}, conductor {base} needs M >= {}", self.required_precision(base, m))));
        }
        let mut rest = base / p.pow(h);
        let kk = m + h;
        let n = self.modulus;
        let pk = p.pow(kk);
        let ap = [[self.a_p[0][0], self.a_p[0][1]], [mod_mul(pk, self.a_p[1][0], n), mod_mul(pk, self.a_p[1][1], n)]];
        let mut parts = vec![(self.seed_lift(&st.tower.split, &ap), n)];
        let mut scale = p.pow(kk + m);
        for ax in &self.aux {
            let l = ax.ell as i128;
            let e = if rest % l == 0 { arith::val(rest, l) } else { 0 };
            rest /= l.pow(e);
            let ln = ax.split.modulus;
            if l.pow(e + 1) > ln {
                return Err(precision_error(format!("auxiliary precision at {l}")));
            }
            let le = l.pow(e);
            let mat = [[ax.a[0][0], ax.a[0][1]], [mod_mul(le, ax.a[1][0], ln), mod_mul(le, ax.a[1][1], ln)]];
            parts.push((ax.split.lift(&mat), ln));
            scale *= le;
        }
        if rest != 1 {
            return invalid(format!("conductor {base} has a prime factor without local data"));
        }
        let total: i128 = parts.iter().map(|(_, md)| *md).product();
        let mut beta0 = Quaternion::zero(self.seed.omega.a, self.seed.omega.b);
        for (x, md) in &parts {
            let other = total / md;
            let lam = other * mod_inv(other % md, *md).unwrap();
            beta0 = beta0 + x.scale(q(lam));
        }
        let ideal = &self.seed.ideal;
        let e = exponent_in(ideal, &beta0);
        let Some(einv) = mod_inv(e, total) else { return internal("seed ideal exponent meets the local moduli") };
        let beta = beta0.scale(q(e * einv));
        let rm = &st.tower.order(m).lattice;
        let lattice = rm.right_mul(&beta).sum(&ideal.scale(q(scale)));
        let beta = reduce_beta(&lattice, &beta, total);
        Ok(CmPoint { conductor: base * p.pow(m), m, lattice, beta, omega: self.seed.omega })
    }

    fn seed_lift(&self, split: &PadicSplitting, mat: &Mat2) -> Quaternion {
        split.lift(mat)
    }

    /// Classifies a CM point: a = u γ_i b, f = b g b^{-1}, and the Definition-3.1 check.
    pub fn point(&self, st: &ShimuraTower, base: i128, cm: CmPoint) -> Result<HeegnerPoint> {
        let lv = st.level(cm.m);
        let (i, b, t) = lv.read_raw(&cm.adelic())?;
        let bi = b.inverse()?;
        let omega_f = b * cm.omega * bi;
        let Some(g_p) = lv.split.image(&(cm.beta * bi)) else { return internal("p-local unit is not integral") };
        let extra = st.tower.n() * self.aux.iter().map(|a| a.ell).product::<u64>();
        let def31 = verify_def31(lv, &self.k, cm.conductor, i, &omega_f, &g_p, extra)?;
        Ok(HeegnerPoint { base, m: cm.m, conductor: cm.conductor, tilde: lv.normalize(i, t), raw_t: t, b, omega_f, g_p, cm, def31 })
    }
}

#[derive(Clone, Debug)]
pub struct HeegnerFamily {
    pub setup: HeegnerSetup,
    pub c: i128,
    pub m_max: u32,
    /// (c', m) → P̃_{c',m}
    pub points: BTreeMap<(i128, u32), HeegnerPoint>,
}

#[derive(Serialize, Clone, Debug)]
pub struct FamilySummary {
    pub c: i128,
    pub m_max: u32,
    pub precision: u32,
    pub seed_class: usize,
    pub seed_omega: [String; 4],
    pub a_p: [[String; 2]; 2],
    pub points: Vec<PointSummary>,
}

/// Conductors c, cp, ..., cp^{r_max} and cℓ for each ℓ in `ells`, at levels 0..=m_max.
pub fn build_family(st: &ShimuraTower, k: &ImagQuadField, c: i128, m_max: u32, r_max: u32, ells: &[u64]) -> Result<HeegnerFamily> {
    let tw = &st.tower;
    let p = tw.p as i128;
    if c < 1 || arith::gcd(c, tw.n() as i128 * k.d_k * p) != 1 {
        return invalid(format!("c = {c} must be prime to N·p·D_K"));
    }
    if m_max > tw.m_max() {
        return invalid(format!("level {m_max} exceeds the tower depth {}", tw.m_max()));
    }
    let mut aux: Vec<u64> = arith::prime_divisors(c as u64);
    aux.extend(ells.iter().copied());
    aux.sort();
    aux.dedup();
    let setup = HeegnerSetup::new(st, k, &aux)?;
    let mut bases: Vec<i128> = (0..=r_max).map(|r| c * p.pow(r)).collect();
    bases.extend(ells.iter().map(|l| c * *l as i128));
    let mut points = BTreeMap::new();
    for base in bases {
        for m in 0..=m_max {
            if setup.precision < setup.required_precision(base, m) {
                continue;
            }
            let cm = setup.cm_point(st, base, m)?;
            let pt = setup.point(st, base, cm)?;
            if !pt.def31.holds {
                let bad: Vec<String> = pt.def31.optimal.primes.iter().filter(|x| !x.ok).map(|x| x.prime.to_string()).collect();
                let place = if pt.def31.p_local { bad.join(",") } else { format!("p = {p} (unit condition)") };
                return invalid(format!("P({base},{m}) fails Definition 3.1 at {place}"));
            }
            points.insert((base, m), pt);
        }
    }
    Ok(HeegnerFamily { setup, c, m_max, points })
}

impl HeegnerFamily {
    pub fn point(&self, base: i128, m: u32) -> Result<&HeegnerPoint> {
        self.points.get(&(base, m)).ok_or_else(|| Error::Invalid(format!("P({base},{m}) is not in the family (raise the precision or the depth)")))
    }

    pub fn summary(&self) -> FamilySummary {
        FamilySummary {
            c: self.c,
            m_max: self.m_max,
            precision: self.setup.precision,
            seed_class: self.setup.seed.class,
            seed_omega: self.setup.seed.omega.coords_str(),
            a_p: self.setup.a_p.map(|r| r.map(|x| x.to_string())),
            points: self.points.values().map(|p| p.summary()).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::eichler_order_tower;
    use crate::quaternion::algebra_for_discriminant;

    pub(crate) fn desk() -> (ShimuraTower, ImagQuadField) {
        let alg = algebra_for_discriminant(2, true).unwrap();
        let tw = eichler_order_tower(&alg, 1, 5, 2, 8).unwrap();
        (ShimuraTower::new(tw).unwrap(), ImagQuadField::new(-11).unwrap())
    }

    #[test]
    fn hurwitz_seed() {
        let alg = QuaternionAlgebra::new(-1, -1).unwrap();
        let k = ImagQuadField::new(-11).unwrap();
        let w = global_embedding_seed(&alg, &k).unwrap();
        assert_eq!(w, alg.int([0, 1, 1, 3]));
        // nrd(xi + yj + zij) = x² + y² + z² in (-1,-1)
        assert_eq!(w.nrd(), q(1 + 1 + 9));
        assert!(w.trd().is_zero());
    }

    #[test]
    fn seed_is_i_when_a_is_minus_d() {
        let alg = QuaternionAlgebra::new(-1, -3).unwrap();
        let k = ImagQuadField::new(-4).unwrap();
        assert_eq!(global_embedding_seed(&alg, &k).unwrap(), alg.i());
    }

    #[test]
    fn split_prime_of_n_minus_rejected() {
        let alg = QuaternionAlgebra::new(-1, -1).unwrap();
        let k = ImagQuadField::new(-7).unwrap();
        // x² ≡ -7 mod 8 has the solution x = 1, so 2 splits
        assert!((0..8).any(|x: i128| (x * x + 7) % 8 == 0));
        let e = global_embedding_seed(&alg, &k).unwrap_err();
        assert!(e.to_string().contains("2 divides N-"));
    }

    #[test]
    fn conductor_one_into_maximal_order() {
        let alg = QuaternionAlgebra::new(-1, -1).unwrap();
        let k = ImagQuadField::new(-11).unwrap();
        let w = global_embedding_seed(&alg, &k).unwrap();
        let max = maximal_order(&alg).unwrap().lattice;
        assert!(verify_optimal(&k, &w, &max, 1, 2).certified);
        assert!(!verify_optimal(&k, &w, &max, 5, 2).certified);
    }

    #[test]
    fn desk_family_verifies() {
        let (st, k) = desk();
        let fam = build_family(&st, &k, 1, 2, 1, &[7]).unwrap();
        for ((base, m), pt) in &fam.points {
            assert!(pt.def31.holds, "{base} {m}");
            assert_eq!(pt.conductor, base * 5i128.pow(*m));
        }
        assert!(fam.points.contains_key(&(1, 2)));
        assert!(fam.points.contains_key(&(5, 1)));
        assert!(fam.points.contains_key(&(7, 1)));
        // the same embedding tested against R_1 with conductor 1 fails at p
        let pt = fam.point(1, 0).unwrap();
        let r1 = &st.level(1).order;
        let rep = verify_optimal(&k, &pt.omega_f, r1, 1, 10);
        assert!(!rep.certified);
        assert!(!rep.primes.iter().find(|x| x.prime == 5).unwrap().ok);
    }
}
