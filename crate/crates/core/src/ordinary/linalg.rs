//! Characteristic polynomials, rational null spaces and kernels over Z/p^M.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::arith::{mod_inv, mod_mul, modp, Q};
use crate::zmod::ModMat;

/// Minimal field interface for the Hessenberg reduction.
pub trait Scalar: Clone + PartialEq {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn inv(&self) -> Self;
    fn is_zero(&self) -> bool;
}

impl Scalar for Q {
    fn zero_like(&self) -> Self {
        Q::zero()
    }
    fn one_like(&self) -> Self {
        Q::one()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn inv(&self) -> Self {
        Q::one() / self
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
}

impl Scalar for BigRational {
    fn zero_like(&self) -> Self {
        BigRational::zero()
    }
    fn one_like(&self) -> Self {
        BigRational::one()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn inv(&self) -> Self {
        self.recip()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
}

/// Element of F_p.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Fp {
    pub v: i128,
    pub p: i128,
}

impl Scalar for Fp {
    fn zero_like(&self) -> Self {
        Fp { v: 0, p: self.p }
    }
    fn one_like(&self) -> Self {
        Fp { v: 1, p: self.p }
    }
    fn add(&self, o: &Self) -> Self {
        Fp { v: modp(self.v + o.v, self.p), p: self.p }
    }
    fn sub(&self, o: &Self) -> Self {
        Fp { v: modp(self.v - o.v, self.p), p: self.p }
    }
    fn mul(&self, o: &Self) -> Self {
        Fp { v: mod_mul(self.v, o.v, self.p), p: self.p }
    }
    fn inv(&self) -> Self {
        Fp { v: mod_inv(self.v, self.p).expect("inverse of zero"), p: self.p }
    }
    fn is_zero(&self) -> bool {
        self.v == 0
    }
}

fn poly_mul_linear<S: Scalar>(a: &[S], c: &S) -> Vec<S> {
    // (x - c)·a
    let z = c.zero_like();
    let mut out = vec![z.clone(); a.len() + 1];
    for (i, x) in a.iter().enumerate() {
        out[i + 1] = out[i + 1].add(x);
        out[i] = out[i].sub(&x.mul(c));
    }
    out
}

/// Characteristic polynomial det(x - A), coefficients from x^0 up, via Hessenberg form.
/// `zero` fixes the scalar context (needed for F_p).
pub fn charpoly<S: Scalar>(a: &[Vec<S>], zero: &S) -> Vec<S> {
    let n = a.len();
    let mut h: Vec<Vec<S>> = a.to_vec();
    for m in 1..n.saturating_sub(1) {
        let Some(i) = (m..n).find(|&i| !h[i][m - 1].is_zero()) else { continue };
        if i != m {
            h.swap(i, m);
            for row in h.iter_mut() {
                row.swap(i, m);
            }
        }
        let piv = h[m][m - 1].inv();
        for j in m + 1..n {
            let u = h[j][m - 1].mul(&piv);
            if u.is_zero() {
                continue;
            }
            for k in 0..n {
                let t = h[m][k].mul(&u);
                h[j][k] = h[j][k].sub(&t);
            }
            for row in h.iter_mut() {
                let t = row[j].mul(&u);
                row[m] = row[m].add(&t);
            }
        }
    }
    // p_k = (x - h_kk) p_{k-1} - Σ_{i<k} h_ik (Π_{j=i+1}^{k} h_{j,j-1}) p_{i-1}
    let one = zero.one_like();
    let mut ps: Vec<Vec<S>> = vec![vec![one]];
    for k in 0..n {
        let mut next = poly_mul_linear(&ps[k], &h[k][k]);
        let mut t = zero.one_like();
        for i in (0..k).rev() {
            t = t.mul(&h[i + 1][i]);
            let c = h[i][k].mul(&t);
            for (e, x) in ps[i].iter().enumerate() {
                next[e] = next[e].sub(&c.mul(x));
            }
        }
        ps.push(next);
    }
    ps.pop().unwrap()
}

/// Characteristic polynomial of an integer matrix reduced mod a prime.
pub fn charpoly_mod_p(a: &[Vec<i64>], p: i128) -> Vec<i128> {
    let z = Fp { v: 0, p };
    let rows: Vec<Vec<Fp>> = a.iter().map(|r| r.iter().map(|x| Fp { v: modp(*x as i128, p), p }).collect()).collect();
    charpoly(&rows, &z).into_iter().map(|x| x.v).collect()
}

/// Characteristic polynomial of an integer matrix over Z, without overflow.
pub fn charpoly_int(a: &[Vec<i64>]) -> Vec<BigInt> {
    let rows: Vec<Vec<BigRational>> = a.iter().map(|r| r.iter().map(|x| BigRational::from_integer(BigInt::from(*x))).collect()).collect();
    charpoly(&rows, &BigRational::zero()).into_iter().map(|c| c.to_integer()).collect()
}

/// Integer roots of f (constant term first) in [-bound, bound], with multiplicity, ascending.
pub fn integer_roots(f: &[BigInt], bound: i64) -> Vec<i64> {
    let mut poly = f.to_vec();
    let mut roots = Vec::new();
    for r in -bound..=bound {
        while poly.len() > 1 {
            // synthetic division by (x - r)
            let rb = BigInt::from(r);
            let n = poly.len();
            let mut quot = vec![BigInt::zero(); n - 1];
            let mut acc = poly[n - 1].clone();
            for i in (0..n - 1).rev() {
                quot[i] = acc.clone();
                acc = acc * &rb + &poly[i];
            }
            if !acc.is_zero() {
                break;
            }
            roots.push(r);
            poly = quot;
        }
    }
    roots
}

/// Gershgorin bound max_j Σ_i |a_ij| on the eigenvalues.
pub fn spectral_bound(a: &[Vec<i64>]) -> i64 {
    let n = a.len();
    (0..n).map(|j| (0..n).map(|i| a[i][j].abs()).sum::<i64>()).max().unwrap_or(0)
}

/// Reduced row echelon form over Q; returns the pivot columns.
pub fn rref(a: &mut [Vec<Q>]) -> Vec<usize> {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(i) = (r..rows).find(|&i| !Zero::is_zero(&a[i][c])) else { continue };
        a.swap(i, r);
        let inv = Q::one() / a[r][c];
        for x in a[r].iter_mut() {
            *x *= inv;
        }
        for i in 0..rows {
            if i != r && !Zero::is_zero(&a[i][c]) {
                let f = a[i][c];
                for j in 0..cols {
                    let t = f * a[r][j];
                    a[i][j] -= t;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    pivots
}

/// Basis of {x : A x = 0} over Q, one vector per free column (1 there, 0 at the other free columns).
pub fn null_space(a: &[Vec<Q>], cols: usize) -> (Vec<Vec<Q>>, Vec<usize>) {
    let mut m = a.to_vec();
    let pivots = rref(&mut m);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    let basis = free
        .iter()
        .map(|&f| {
            let mut v = vec![Q::zero(); cols];
            v[f] = Q::one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = -m[r][f];
            }
            v
        })
        .collect();
    (basis, free)
}

/// Some x ≢ 0 mod p with x·A ≡ 0 mod p^M, for A square of corank 1 mod p.
pub fn left_kernel_vector(a: &ModMat, p: i128) -> Option<Vec<i128>> {
    let n = a.rows;
    let md = a.modulus;
    // right kernel of Aᵀ by elimination on unit pivots
    let mut m = a.transpose();
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; n];
    let mut r = 0;
    for c in 0..n {
        let Some(i) = (r..n).find(|&i| m.get(i, c) % p != 0) else { continue };
        for j in 0..n {
            let t = m.get(r, j);
            m.set(r, j, m.get(i, j));
            m.set(i, j, t);
        }
        let s = mod_inv(m.get(r, c), md)?;
        for j in 0..n {
            m.set(r, j, mod_mul(m.get(r, j), s, md));
        }
        for i in 0..n {
            if i != r {
                let f = m.get(i, c);
                if f != 0 {
                    for j in 0..n {
                        m.set(i, j, m.get(i, j) - mod_mul(f, m.get(r, j), md));
                    }
                }
            }
        }
        pivot_of_col[c] = Some(r);
        r += 1;
    }
    let free: Vec<usize> = (0..n).filter(|c| pivot_of_col[*c].is_none()).collect();
    if free.len() != 1 {
        return None;
    }
    let f = free[0];
    let mut x = vec![0i128; n];
    x[f] = 1;
    for c in 0..n {
        if let Some(row) = pivot_of_col[c] {
            x[c] = modp(-m.get(row, f), md);
        }
    }
    let check = a.row_vec_mul(&x);
    check.iter().all(|v| *v == 0).then_some(x)
}

/// Simple root of an integer polynomial mod p^k lifted from a root mod p.
pub fn hensel_root(f: &[i128], r0: i128, p: i128, k: u32) -> Option<i128> {
    let eval = |x: i128, m: i128| f.iter().rev().fold(0i128, |acc, c| modp(mod_mul(acc, x, m) + c, m));
    let df: Vec<i128> = f.iter().enumerate().skip(1).map(|(i, c)| c * i as i128).collect();
    let deval = |x: i128, m: i128| df.iter().rev().fold(0i128, |acc, c| modp(mod_mul(acc, x, m) + c, m));
    if eval(r0, p) != 0 || deval(r0, p) == 0 {
        return None;
    }
    let pk = p.pow(k);
    let mut r = modp(r0, p);
    for _ in 0..k {
        let inv = mod_inv(deval(r, pk), pk)?;
        r = modp(r - mod_mul(eval(r, pk), inv, pk), pk);
    }
    (eval(r, pk) == 0).then_some(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::q;
    use num_traits::Signed;

    #[test]
    fn charpoly_small() {
        // [[2,1],[1,2]]: x² - 4x + 3
        let a = vec![vec![q(2), q(1)], vec![q(1), q(2)]];
        assert_eq!(charpoly(&a, &q(0)), vec![q(3), q(-4), q(1)]);
        let b = vec![vec![0i64, 0, 1], vec![1, 0, 0], vec![0, 1, 0]];
        // permutation of order 3: x³ - 1
        assert_eq!(charpoly_mod_p(&b, 5), vec![4, 0, 0, 1]);
    }

    #[test]
    fn integer_charpoly_and_roots() {
        let a = vec![vec![2i64, 1], vec![1, 2]];
        let cp = charpoly_int(&a);
        assert_eq!(cp, vec![BigInt::from(3), BigInt::from(-4), BigInt::from(1)]);
        assert_eq!(integer_roots(&cp, spectral_bound(&a)), vec![1, 3]);
        // (x - 2)² x
        let f: Vec<BigInt> = [0, 4, -4, 1].into_iter().map(BigInt::from).collect();
        assert_eq!(integer_roots(&f, 5), vec![0, 2, 2]);
        assert!(f.iter().any(|c| c.is_negative()));
    }

    #[test]
    fn hensel_unit_root() {
        // x² - x + 5 over Z_5
        let r = hensel_root(&[5, -1, 1], 1, 5, 8).unwrap();
        let m = 5i128.pow(8);
        assert_eq!(modp(r * r - r + 5, m), 0);
        assert_eq!(r % 5, 1);
    }

    #[test]
    fn null_space_basis() {
        let a = vec![vec![q(1), q(2), q(3)]];
        let (b, free) = null_space(&a, 3);
        assert_eq!(free, vec![1, 2]);
        for v in &b {
            assert_eq!(v[0] + q(2) * v[1] + q(3) * v[2], q(0));
        }
    }
}
