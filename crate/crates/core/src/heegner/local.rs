//! The local models ψ_p^{(c)} and φ_p^{(c,m)} at p, as matrices with entries in Q.
//!
//! For p split the root r of -D in Z_p is stored at precision p^M and treated as an integer;
//! only valuations of r-multiples are ever inspected, and r is a unit.

use num_traits::Zero;
use serde::Serialize;

use crate::arith::{self, q, q_mod, q_str, Q};
use crate::cm::ideals::KElt;
use crate::cm::ImagQuadField;
use crate::error::{invalid, Result};
use crate::zmod::Mat2;

pub type QMat2 = [[Q; 2]; 2];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LocalCase {
    Inert,
    Split,
}

#[derive(Clone, Debug)]
pub struct LocalEmbedding {
    pub k: ImagQuadField,
    pub p: i128,
    pub case: LocalCase,
    /// p^h ∥ c
    pub h: u32,
    pub precision: u32,
    pub modulus: i128,
    /// r² ≡ -D mod p^M (split case only, else 0)
    pub root: i128,
}

#[derive(Serialize, Clone, Debug)]
pub struct LocalCheck {
    pub n: u32,
    pub optimal: bool,
    pub unit_condition: bool,
}

#[derive(Serialize, Clone, Debug)]
pub struct LocalReport {
    pub case: LocalCase,
    pub h: u32,
    pub m: u32,
    pub psi_sqrt: [[String; 2]; 2],
    pub phi_sqrt: [[String; 2]; 2],
    pub square_is_scalar: bool,
    pub psi: Vec<LocalCheck>,
    pub phi: Vec<LocalCheck>,
}

fn qm_str(x: &QMat2) -> [[String; 2]; 2] {
    x.map(|r| r.map(|v| q_str(&v)))
}

fn qm_mul(x: &QMat2, y: &QMat2) -> QMat2 {
    let mut r = [[Q::zero(); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            r[i][j] = x[i][0] * y[0][j] + x[i][1] * y[1][j];
        }
    }
    r
}

/// v_p, with +∞ encoded as i32::MAX.
fn v(x: &Q, p: i128) -> i32 {
    if x.is_zero() {
        i32::MAX
    } else {
        arith::val_q(x, p)
    }
}

pub fn local_embedding(k: &ImagQuadField, c: i128, p: u64, precision: u32) -> Result<LocalEmbedding> {
    let pi = p as i128;
    if !arith::is_prime(p) || p == 2 {
        return invalid(format!("p = {p} must be an odd prime"));
    }
    if c < 1 {
        return invalid("conductor must be positive");
    }
    let case = match k.kronecker(p) {
        1 => LocalCase::Split,
        -1 => LocalCase::Inert,
        _ => return invalid(format!("p = {p} ramifies in K")),
    };
    let h = arith::val(c, pi);
    let modulus = pi.pow(precision);
    let root = match case {
        LocalCase::Split => match arith::sqrt_mod_pk(-k.d, pi, precision) {
            Some(r) => r,
            None => return invalid(format!("no square root of {} modulo {p}^{precision}", -k.d)),
        },
        LocalCase::Inert => 0,
    };
    Ok(LocalEmbedding { k: *k, p: pi, case, h, precision, modulus, root })
}

impl LocalEmbedding {
    /// (a, b) with x = a + b√-D.
    fn sqrt_coords(&self, x: &KElt) -> (Q, Q) {
        let s = q(self.k.sqrt_scale());
        (x.u + x.v * q(self.k.d_k) / q(2), x.v * s / q(2))
    }

    pub fn sqrt_minus_d(&self) -> KElt {
        let s = self.k.sqrt_scale();
        // √-D = (2ω_K - D_K)/s
        KElt::new(self.k.d_k, q(-self.k.d_k) / q(s), q(2) / q(s))
    }

    /// ψ_p^{(c)}(x).
    pub fn psi(&self, x: &KElt) -> QMat2 {
        let (a, b) = self.sqrt_coords(x);
        let ph = q(self.p.pow(self.h));
        match self.case {
            LocalCase::Inert => [[a, -q(self.k.d) * b * ph], [b / ph, a]],
            LocalCase::Split => {
                let r = q(self.root);
                [[a + r * b, Q::zero()], [q(2) * r * b / ph, a - r * b]]
            }
        }
    }

    /// φ_p^{(c,m)}(x) = w_m ψ(x) w_m^{-1}, w_m = [[0, 1], [-p^m, 0]].
    pub fn phi(&self, x: &KElt, m: u32) -> QMat2 {
        let pm = q(self.p.pow(m));
        let w = [[Q::zero(), q(1)], [-pm, Q::zero()]];
        let wi = [[Q::zero(), -q(1) / pm], [q(1), Q::zero()]];
        qm_mul(&qm_mul(&w, &self.psi(x)), &wi)
    }

    /// Reduction of an integral matrix mod p^M.
    pub fn reduce(&self, x: &QMat2) -> Option<Mat2> {
        let mut r = [[0i128; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                if v(&x[i][j], self.p) < 0 {
                    return None;
                }
                r[i][j] = q_mod(&x[i][j], self.modulus)?;
            }
        }
        Some(r)
    }

    /// Membership in [[Z_p, p^{n-m}Z_p], [p^m Z_p, Z_p]] (R_n^{(m)}); m = 0 gives R_n.
    fn in_order(&self, x: &QMat2, n: u32, m: Option<u32>) -> bool {
        let p = self.p;
        let (ur, ll) = match m {
            None => (0, n as i32),
            Some(m) => (n as i32 - m as i32, m as i32),
        };
        v(&x[0][0], p) >= 0 && v(&x[1][1], p) >= 0 && v(&x[0][1], p) >= ur && v(&x[1][0], p) >= ll
    }

    /// Both properties for 𝒪_{cp^n} ⊗ Z_p: optimality into R_n (or R_n^{(m)}) and the
    /// U_{n,p}-preimage identity, which reduces to one entry of the image of the generator
    /// p^{h+n}ω_K vanishing mod p^n.
    fn check(&self, n: u32, m: Option<u32>) -> LocalCheck {
        self.check_with(n, m, m)
    }

    /// Image model φ^{(c,img)} (ψ for None) against the order shape R_n^{(shape)}.
    fn check_with(&self, n: u32, img_m: Option<u32>, shape: Option<u32>) -> LocalCheck {
        let img = |e: u32| {
            let x = KElt::new(self.k.d_k, Q::zero(), q(self.p.pow(e)));
            match img_m {
                None => self.psi(&x),
                Some(m) => self.phi(&x, m),
            }
        };
        let g = img(self.h + n);
        let contained = self.in_order(&g, n, shape);
        let strict = self.h + n == 0 || !self.in_order(&img(self.h + n - 1), n, shape);
        // U_{n,p} fixes the upper-left entry, U_{n,p}^{(m)} the lower-right one
        let e = match shape {
            None => g[0][0],
            Some(_) => g[1][1],
        };
        let unit_condition = contained && (n == 0 || v(&e, self.p) >= n as i32);
        LocalCheck { n, optimal: contained && strict, unit_condition }
    }

    pub fn report(&self, m: u32, n_max: u32) -> LocalReport {
        let s = self.sqrt_minus_d();
        let psi_sqrt = self.psi(&s);
        let phi_sqrt = self.phi(&s, m);
        let sq = qm_mul(&psi_sqrt, &psi_sqrt);
        let md = -q(self.k.d);
        let sq2 = qm_mul(&phi_sqrt, &phi_sqrt);
        // the split model carries r only modulo p^M
        let scalar = |x: &QMat2| match self.case {
            LocalCase::Inert => x == &[[md, Q::zero()], [Q::zero(), md]],
            LocalCase::Split => self.reduce(x).map(|r| r == crate::zmod::m2_scalar(-self.k.d, self.modulus)).unwrap_or(false),
        };
        LocalReport {
            case: self.case,
            h: self.h,
            m,
            psi_sqrt: qm_str(&psi_sqrt),
            phi_sqrt: qm_str(&phi_sqrt),
            square_is_scalar: scalar(&sq) && scalar(&sq2),
            psi: (0..=n_max).map(|n| self.check(n, None)).collect(),
            phi: (0..=n_max).map(|n| self.check(n, Some(m))).collect(),
        }
    }

    /// φ^{(c,m)} against R_m and U_{m,p} themselves (R_m^{(m)} = R_m).
    pub fn phi_into_rm(&self, m: u32) -> bool {
        let c = self.check_with(m, Some(m), None);
        c.optimal && c.unit_condition
    }
}
