//! Elements of K in the basis (1, ω_K) and fractional ideals of the orders O_C as Z-lattices.

use std::ops::{Add, Mul, Neg, Sub};

use num_integer::Integer;
use num_traits::{One, Zero};

use crate::arith::{q, Q};
use crate::cm::forms::Form;

/// u + v·ω_K with ω_K = (D_K + √D_K)/2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct KElt {
    pub dk: i128,
    pub u: Q,
    pub v: Q,
}

impl KElt {
    pub fn new(dk: i128, u: Q, v: Q) -> Self {
        KElt { dk, u, v }
    }

    pub fn int(dk: i128, u: i128, v: i128) -> Self {
        KElt { dk, u: q(u), v: q(v) }
    }

    /// N(ω_K).
    pub fn omega_norm(dk: i128) -> i128 {
        (dk * dk - dk) / 4
    }

    pub fn norm(&self) -> Q {
        self.u * self.u + q(self.dk) * self.u * self.v + q(Self::omega_norm(self.dk)) * self.v * self.v
    }

    pub fn trace(&self) -> Q {
        q(2) * self.u + q(self.dk) * self.v
    }

    pub fn conj(&self) -> Self {
        KElt { u: self.u + self.v * q(self.dk), v: -self.v, ..*self }
    }

    pub fn scale(&self, s: Q) -> Self {
        KElt { u: self.u * s, v: self.v * s, ..*self }
    }

    pub fn inverse(&self) -> Self {
        self.conj().scale(Q::one() / self.norm())
    }
}

impl Add for KElt {
    type Output = KElt;
    fn add(self, o: KElt) -> KElt {
        KElt { u: self.u + o.u, v: self.v + o.v, ..self }
    }
}

impl Sub for KElt {
    type Output = KElt;
    fn sub(self, o: KElt) -> KElt {
        KElt { u: self.u - o.u, v: self.v - o.v, ..self }
    }
}

impl Neg for KElt {
    type Output = KElt;
    fn neg(self) -> KElt {
        KElt { u: -self.u, v: -self.v, ..self }
    }
}

impl Mul for KElt {
    type Output = KElt;
    fn mul(self, o: KElt) -> KElt {
        // ω² = D_K ω - N(ω)
        let vv = self.v * o.v;
        KElt {
            u: self.u * o.u - vv * q(Self::omega_norm(self.dk)),
            v: self.u * o.v + self.v * o.u + vv * q(self.dk),
            ..self
        }
    }
}

/// A rank-2 Z-lattice (1/den)·⟨(n, 0), (s, g)⟩ in K, with 0 ≤ s < n, n, g > 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QLattice {
    pub dk: i128,
    pub den: i128,
    pub n: i128,
    pub s: i128,
    pub g: i128,
}

impl QLattice {
    pub fn from_generators(dk: i128, gens: &[KElt]) -> Self {
        let den = gens.iter().fold(1i128, |acc, x| acc.lcm(x.u.denom()).lcm(x.v.denom()));
        // HNF on columns (u, v) with v as the pivot of the second row
        let vecs: Vec<(i128, i128)> = gens.iter().map(|x| ((x.u * q(den)).to_integer(), (x.v * q(den)).to_integer())).collect();
        let mut row2: Option<(i128, i128)> = None;
        let mut n = 0i128;
        for (mut u, mut v) in vecs {
            if v != 0 {
                match row2 {
                    None => {
                        if v < 0 {
                            u = -u;
                            v = -v;
                        }
                        row2 = Some((u, v));
                        continue;
                    }
                    Some((s, g)) => {
                        let e = g.extended_gcd(&v);
                        let (ga, va) = (g / e.gcd, v / e.gcd);
                        let ns = e.x * s + e.y * u;
                        let nu = ga * u - va * s;
                        let mut r = (ns, e.gcd);
                        if r.1 < 0 {
                            r = (-r.0, -r.1);
                        }
                        row2 = Some(r);
                        u = nu;
                    }
                }
            }
            n = n.gcd(&u);
        }
        let (s, g) = row2.expect("rank-deficient lattice in K");
        assert!(n != 0, "rank-deficient lattice in K");
        let s = s.rem_euclid(n);
        let l = QLattice { dk, den, n, s, g };
        l.normalized()
    }

    fn normalized(self) -> Self {
        let c = self.den.gcd(&self.n).gcd(&self.s).gcd(&self.g);
        QLattice { den: self.den / c, n: self.n / c, s: self.s / c, g: self.g / c, ..self }
    }

    pub fn basis(&self) -> [KElt; 2] {
        [
            KElt::new(self.dk, Q::new(self.n, self.den), Q::zero()),
            KElt::new(self.dk, Q::new(self.s, self.den), Q::new(self.g, self.den)),
        ]
    }

    /// The order O_C.
    pub fn order(dk: i128, c: i128) -> Self {
        QLattice { dk, den: 1, n: 1, s: 0, g: c }
    }

    pub fn contains(&self, x: &KElt) -> bool {
        let v = x.v * q(self.den) / q(self.g);
        if !v.is_integer() {
            return false;
        }
        let u = x.u * q(self.den) - v * q(self.s);
        (u / q(self.n)).is_integer()
    }

    pub fn mul(&self, o: &QLattice) -> QLattice {
        let mut gens = Vec::with_capacity(4);
        for x in self.basis() {
            for y in o.basis() {
                gens.push(x * y);
            }
        }
        QLattice::from_generators(self.dk, &gens)
    }

    pub fn scale(&self, x: &KElt) -> QLattice {
        let gens: Vec<KElt> = self.basis().iter().map(|b| *b * *x).collect();
        QLattice::from_generators(self.dk, &gens)
    }

    pub fn conj(&self) -> QLattice {
        let gens: Vec<KElt> = self.basis().iter().map(|b| b.conj()).collect();
        QLattice::from_generators(self.dk, &gens)
    }

    /// Covolume relative to O_K = Z + Zω_K.
    pub fn covolume(&self) -> Q {
        Q::new(self.n * self.g, self.den * self.den)
    }

    /// Norm relative to the order O_C (index [O_C : L] for L ⊂ O_C).
    pub fn norm_in(&self, c: i128) -> Q {
        self.covolume() / q(c)
    }

    /// Primitive form attached to an invertible O_C-ideal, oriented so that the ideal
    /// [a, (-b + √Δ)/2] corresponds to (a, b, c).
    pub fn form(&self, c: i128) -> Form {
        let [alpha, beta] = self.basis();
        let nm = self.norm_in(c);
        // N(x α - y β) = A x² + B x y + C y²
        let a = alpha.norm();
        let cc = beta.norm();
        let b = -(alpha * beta.conj()).trace();
        let f = |x: Q| -> i128 {
            let y = x / nm;
            assert!(y.is_integer(), "ideal is not invertible for this order");
            y.to_integer()
        };
        Form::new(f(a), f(b), f(cc))
    }

    /// The O_C-ideal [a, (-b + C√D_K)/2] attached to a form of discriminant C² D_K.
    pub fn from_form(dk: i128, c: i128, fm: &Form) -> QLattice {
        let s = Q::new(-fm.b - c * dk, 2);
        QLattice::from_generators(dk, &[KElt::int(dk, fm.a, 0), KElt::new(dk, s, q(c))])
    }

    /// Gauss-reduced basis for the norm form.
    pub fn reduced_basis(&self) -> [KElt; 2] {
        let [mut alpha, mut beta] = self.basis();
        loop {
            if beta.norm() < alpha.norm() {
                std::mem::swap(&mut alpha, &mut beta);
            }
            let mu = crate::arith::q_round(&((alpha * beta.conj()).trace() / (q(2) * alpha.norm())));
            if mu == 0 {
                break;
            }
            beta = beta - alpha.scale(q(mu));
        }
        [alpha, beta]
    }

    /// All elements of norm `target`, sorted.
    pub fn elements_of_norm(&self, target: Q) -> Vec<KElt> {
        let [alpha, beta] = self.reduced_basis();
        let a = alpha.norm();
        let cc = beta.norm();
        let b = (alpha * beta.conj()).trace();
        // A x² + B x y + C y² with A, C > 0 and disc < 0: |y| ≤ sqrt(4 A T / |disc|)
        let disc = b * b - q(4) * a * cc;
        let ybound = (q(4) * a * target / (-disc)).to_integer().max(0);
        let ymax = crate::arith::isqrt(ybound) + 1;
        let mut out = Vec::new();
        for y in -ymax..=ymax {
            let yq = q(y);
            // A x² + (B y) x + (C y² - T) = 0
            let bb = b * yq;
            let cy = cc * yq * yq - target;
            let d = bb * bb - q(4) * a * cy;
            if d < Q::zero() {
                continue;
            }
            let r = (*d.numer() as f64 / *d.denom() as f64).sqrt();
            let af = *a.numer() as f64 / *a.denom() as f64;
            let bf = *bb.numer() as f64 / *bb.denom() as f64;
            let lo = ((-bf - r) / (2.0 * af)).floor() as i128 - 1;
            let hi = ((-bf + r) / (2.0 * af)).ceil() as i128 + 1;
            for x in lo..=hi {
                let e = alpha.scale(q(x)) + beta.scale(yq);
                if e.norm() == target {
                    out.push(e);
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cm::forms::reduced_forms;

    #[test]
    fn form_ideal_roundtrip_and_products() {
        for (dk, c) in [(-11i128, 5i128), (-3, 5), (-3, 25), (-23, 1), (-11, 35)] {
            let disc = c * c * dk;
            let fs = reduced_forms(disc);
            for f in &fs {
                let id = QLattice::from_form(dk, c, f);
                assert_eq!(id.form(c).reduce(), *f);
                assert_eq!(id.norm_in(c), q(f.a));
            }
            for f in fs.iter().take(5) {
                for g in fs.iter().take(5) {
                    let prod = QLattice::from_form(dk, c, f).mul(&QLattice::from_form(dk, c, g));
                    assert_eq!(prod.form(c).reduce(), f.compose(g), "{dk} {c} {f:?} {g:?}");
                }
            }
        }
    }

    #[test]
    fn principal_generators() {
        let dk = -11;
        let o = QLattice::order(dk, 5);
        let x = KElt::int(dk, 3, 10);
        let l = o.scale(&x);
        let gens = l.elements_of_norm(x.norm());
        assert!(gens.contains(&x) && gens.contains(&(-x)));
        assert_eq!(gens.len(), 2);
    }
}
