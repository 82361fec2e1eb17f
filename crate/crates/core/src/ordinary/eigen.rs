//! Ordinary eigen functionals v with v·T_ℓ = a_ℓ v, v·U_p = α v and trivial diamond character.

use num_traits::Zero;
use serde::Serialize;

use crate::arith::{self, modp, q, q_mod, Q};
use crate::error::{internal, invalid, Error, Result};
use crate::ordinary::linalg::{charpoly, charpoly_int, hensel_root, integer_roots, left_kernel_vector, null_space};
use crate::ordinary::OrdinaryDecomposition;
use crate::shimura::hecke::{HeckeMatrix, HeckeOp};
use crate::shimura::{Divisor, ShimuraLevel};
use crate::zmod::ModMat;

#[derive(Clone, Debug)]
pub struct EigenData {
    pub level: u32,
    pub p: i128,
    pub precision: u32,
    pub modulus: i128,
    /// v[i] for the i-th point of X̃_m.
    pub v: Vec<i128>,
    pub alpha_p: i128,
    /// Trace of U_p on the rational a_ℓ-eigenspace (the a_p of a p-old form when it is 2-dimensional).
    pub a_p: Option<i128>,
    /// charpoly of U_p on the rational eigenspace, constant term first.
    pub up_charpoly: Vec<String>,
    /// (ℓ, a_ℓ) verified on v, U_p excluded.
    pub hecke: Vec<(u64, i64)>,
    pub eigenspace_dim: usize,
}

#[derive(Serialize, Clone, Debug)]
pub struct EigenReport {
    pub level: u32,
    pub precision: u32,
    pub alpha_p: i128,
    pub a_p: Option<i128>,
    pub up_charpoly: Vec<String>,
    pub hecke: Vec<(u64, i64)>,
    pub eigenspace_dim: usize,
    pub v: Vec<i128>,
    pub fixed_by_e: bool,
    pub diamond_trivial: bool,
}

/// Least primitive root modulo p^m (p odd).
pub fn primitive_root(p: i128, m: u32) -> i128 {
    let pm = p.pow(m);
    let phi = (p - 1) * p.pow(m - 1);
    let fs: Vec<i128> = arith::prime_divisors(phi as u64).into_iter().map(|x| x as i128).collect();
    (2..pm).find(|g| arith::gcd(*g, p) == 1 && fs.iter().all(|f| arith::mod_pow(*g, (phi / f) as u128, pm) != 1)).unwrap()
}

fn to_q(m: &HeckeMatrix) -> Vec<Vec<Q>> {
    m.matrix.iter().map(|r| r.iter().map(|x| q(*x as i128)).collect()).collect()
}

/// Integer eigenvalues of T_ℓ (in the Ramanujan range), for error messages.
fn integer_eigenvalues(t: &HeckeMatrix, ell: u64) -> Vec<i64> {
    let mut r = integer_roots(&charpoly_int(&t.matrix), (ell + 1) as i64);
    r.dedup();
    r
}

fn sub_scalar(m: &HeckeMatrix, a: i64) -> Vec<Vec<Q>> {
    let mut r = to_q(m);
    for (i, row) in r.iter_mut().enumerate() {
        row[i] -= q(a as i128);
    }
    r
}

/// Simultaneous eigen functional on image(e) for T_ℓ (ℓ in `targets`), U_p and the diamonds.
/// A target (p, a_p) selects the U_p-eigenvalue α as the unit root of X² - a_p X + p.
pub fn ordinary_eigen(lv: &ShimuraLevel, ord: &OrdinaryDecomposition, targets: &[(u64, i64)]) -> Result<EigenData> {
    if ord.ordinary_rank == 0 {
        return invalid("ordinary rank is zero");
    }
    let p = lv.p;
    let n = lv.len();
    let m = lv.m;
    let modulus = ord.modulus;
    let a_p_target = targets.iter().find(|(l, _)| *l as i128 == p).map(|t| t.1);
    let mut hecke = Vec::new();
    let mut eqs: Vec<Vec<Q>> = Vec::new();
    let mut mats = Vec::new();
    for &(ell, a) in targets.iter().filter(|(l, _)| *l as i128 != p) {
        if lv.classes.n_minus.is_multiple_of(ell) || (lv.classes.level / lv.pm as u64).is_multiple_of(ell) {
            return invalid(format!("T_{ell} needs ℓ prime to the level"));
        }
        let t = lv.hecke(HeckeOp::T(ell))?;
        // v(T - a) = 0  ⇔  (T - a)ᵀ vᵀ = 0
        let s = sub_scalar(&t, a);
        for j in 0..n {
            eqs.push((0..n).map(|i| s[i][j]).collect());
        }
        mats.push((ell, a, t));
        hecke.push((ell, a));
    }
    let g = primitive_root(p, m);
    let dia = lv.hecke(HeckeOp::Diamond(g))?;
    let s = sub_scalar(&dia, 0);
    for j in 0..n {
        let mut row: Vec<Q> = (0..n).map(|i| s[i][j]).collect();
        row[j] -= q(1);
        eqs.push(row);
    }
    let (basis, free) = null_space(&eqs, n);
    if basis.is_empty() {
        let avail = mats.iter().map(|(l, _, t)| format!("T_{l}: {:?}", integer_eigenvalues(t, *l))).collect::<Vec<_>>().join("; ");
        return Err(Error::Nonexistent(format!("no eigensystem matches the targets; integer eigenvalues available: {avail}")));
    }
    let up = lv.hecke(HeckeOp::U)?;
    let uq = to_q(&up);
    // R: row i holds the coordinates of basis[i]·U in the basis (read off the free columns)
    let d = basis.len();
    let r: Vec<Vec<Q>> = basis
        .iter()
        .map(|b| {
            let bu: Vec<Q> = (0..n).map(|j| (0..n).fold(Q::zero(), |acc, i| acc + b[i] * uq[i][j])).collect();
            free.iter().map(|f| bu[*f]).collect()
        })
        .collect();
    let cp = charpoly(&r, &Q::zero());
    let up_charpoly: Vec<String> = cp.iter().map(arith::q_str).collect();
    let a_p = (d == 2).then(|| -cp[1]).filter(|x| x.is_integer()).map(|x| x.to_integer());
    // integer polynomial for Hensel: either the target quadratic or the charpoly itself
    let den = cp.iter().fold(1i128, |acc, c| arith::lcm(acc, *c.denom()));
    let f: Vec<i128> = match a_p_target {
        Some(ap) => vec![p, -(ap as i128), 1],
        None => cp.iter().map(|c| (*c * q(den)).to_integer()).collect(),
    };
    let roots: Vec<i128> = (1..p).filter_map(|r0| hensel_root(&f, r0, p, ord.precision)).collect();
    let rm: Vec<Vec<i128>> = match r.iter().map(|row| row.iter().map(|x| q_mod(x, modulus)).collect::<Option<Vec<_>>>()).collect::<Option<Vec<_>>>() {
        Some(x) => x,
        None => return internal("eigenspace basis is not p-integral"),
    };
    let vb: Vec<Vec<i128>> = match basis.iter().map(|row| row.iter().map(|x| q_mod(x, modulus)).collect::<Option<Vec<_>>>()).collect::<Option<Vec<_>>>() {
        Some(x) => x,
        None => return internal("eigenspace basis is not p-integral"),
    };
    for alpha in roots {
        let mut a = ModMat::zeros(d, d, modulus);
        for i in 0..d {
            for j in 0..d {
                a.set(i, j, rm[i][j] - if i == j { alpha } else { 0 });
            }
        }
        let Some(c) = left_kernel_vector(&a, p) else { continue };
        let mut v = vec![0i128; n];
        for (ci, row) in c.iter().zip(&vb) {
            for j in 0..n {
                v[j] = modp(v[j] + ci * row[j], modulus);
            }
        }
        if v.iter().all(|x| x % p == 0) {
            continue;
        }
        let eig = EigenData { level: m, p, precision: ord.precision, modulus, v, alpha_p: alpha, a_p, up_charpoly: up_charpoly.clone(), hecke: hecke.clone(), eigenspace_dim: d };
        eig.check(lv, ord, &mats.iter().map(|(l, a, t)| (*l, *a, t)).collect::<Vec<_>>(), &up, &dia)?;
        return Ok(eig);
    }
    Err(Error::Nonexistent(format!("no ordinary U_p-eigenvector in the eigenspace (U_p charpoly {})", up_charpoly.join(", "))))
}

/// Like `ordinary_eigen`, but when no T_ℓ target is given and the full diamond-trivial space has no
/// simple ordinary root, splits it by the integer eigenvalues of the least good T_ℓ.
pub fn ordinary_eigen_auto(lv: &ShimuraLevel, ord: &OrdinaryDecomposition, targets: &[(u64, i64)]) -> Result<EigenData> {
    let first = ordinary_eigen(lv, ord, targets);
    if targets.iter().any(|(l, _)| *l as i128 != lv.p) || !matches!(first, Err(Error::Nonexistent(_))) {
        return first;
    }
    let ell = (2u64..).find(|l| arith::is_prime(*l) && !(lv.classes.level * lv.p as u64).is_multiple_of(*l)).unwrap();
    let t = lv.hecke(HeckeOp::T(ell))?;
    for a in integer_eigenvalues(&t, ell) {
        let mut tg = targets.to_vec();
        tg.push((ell, a));
        if let Ok(e) = ordinary_eigen(lv, ord, &tg) {
            return Ok(e);
        }
    }
    first
}

impl EigenData {
    fn check(&self, lv: &ShimuraLevel, ord: &OrdinaryDecomposition, ts: &[(u64, i64, &HeckeMatrix)], up: &HeckeMatrix, dia: &HeckeMatrix) -> Result<()> {
        let md = self.modulus;
        let scaled = |a: i128| self.v.iter().map(|x| arith::mod_mul(*x, a, md)).collect::<Vec<_>>();
        for (l, a, t) in ts {
            if ModMat::from_int_rows(&t.matrix, md).row_vec_mul(&self.v) != scaled(*a as i128) {
                return internal(format!("v is not a T_{l}-eigenvector"));
            }
        }
        if ModMat::from_int_rows(&up.matrix, md).row_vec_mul(&self.v) != scaled(self.alpha_p) {
            return internal("v is not a U_p-eigenvector");
        }
        if ModMat::from_int_rows(&dia.matrix, md).row_vec_mul(&self.v) != self.v {
            return internal("v has nontrivial diamond character");
        }
        if ord.e.row_vec_mul(&self.v) != self.v {
            return internal("v is not fixed by e");
        }
        let _ = lv;
        Ok(())
    }

    /// η_v(D) = Σ D(x)·v(x) mod p^M.
    pub fn eval(&self, lv: &ShimuraLevel, d: &Divisor) -> Result<i128> {
        let mut acc = 0i128;
        for (pt, c) in d {
            let Some(i) = lv.index_of(pt) else { return internal("divisor point outside X̃_m") };
            acc = modp(acc + arith::mod_mul(*c as i128, self.v[i], self.modulus), self.modulus);
        }
        Ok(acc)
    }

    pub fn report(&self, lv: &ShimuraLevel, ord: &OrdinaryDecomposition) -> Result<EigenReport> {
        let g = primitive_root(self.p, self.level);
        let dia = lv.hecke(HeckeOp::Diamond(g))?;
        Ok(EigenReport {
            level: self.level,
            precision: self.precision,
            alpha_p: self.alpha_p,
            a_p: self.a_p,
            up_charpoly: self.up_charpoly.clone(),
            hecke: self.hecke.clone(),
            eigenspace_dim: self.eigenspace_dim,
            v: self.v.clone(),
            fixed_by_e: ord.e.row_vec_mul(&self.v) == self.v,
            diamond_trivial: ModMat::from_int_rows(&dia.matrix, self.modulus).row_vec_mul(&self.v) == self.v,
        })
    }
}
