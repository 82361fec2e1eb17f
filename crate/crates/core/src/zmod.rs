//! Dense matrices over Z/n.

use crate::arith::{mod_inv, mod_mul, modp};

pub type Mat2 = [[i128; 2]; 2];

pub fn m2_mul(x: &Mat2, y: &Mat2, n: i128) -> Mat2 {
    let mut r = [[0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            r[i][j] = modp(mod_mul(x[i][0], y[0][j], n) + mod_mul(x[i][1], y[1][j], n), n);
        }
    }
    r
}

pub fn m2_det(x: &Mat2, n: i128) -> i128 {
    modp(mod_mul(x[0][0], x[1][1], n) - mod_mul(x[0][1], x[1][0], n), n)
}

pub fn m2_inv(x: &Mat2, n: i128) -> Option<Mat2> {
    let d = mod_inv(m2_det(x, n), n)?;
    Some([
        [mod_mul(x[1][1], d, n), modp(-mod_mul(x[0][1], d, n), n)],
        [modp(-mod_mul(x[1][0], d, n), n), mod_mul(x[0][0], d, n)],
    ])
}

pub fn m2_reduce(x: &Mat2, n: i128) -> Mat2 {
    x.map(|r| r.map(|v| modp(v, n)))
}

pub fn m2_scalar(s: i128, n: i128) -> Mat2 {
    [[modp(s, n), 0], [0, modp(s, n)]]
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModMat {
    pub rows: usize,
    pub cols: usize,
    pub modulus: i128,
    pub data: Vec<i128>,
}

impl ModMat {
    pub fn zeros(rows: usize, cols: usize, modulus: i128) -> Self {
        ModMat { rows, cols, modulus, data: vec![0; rows * cols] }
    }

    pub fn identity(n: usize, modulus: i128) -> Self {
        let mut m = Self::zeros(n, n, modulus);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_int_rows(rows: &[Vec<i64>], modulus: i128) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut m = Self::zeros(r, c, modulus);
        for i in 0..r {
            for j in 0..c {
                m.set(i, j, rows[i][j] as i128);
            }
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> i128 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: i128) {
        self.data[i * self.cols + j] = modp(v, self.modulus);
    }

    pub fn mul(&self, o: &ModMat) -> ModMat {
        assert_eq!(self.cols, o.rows);
        let n = self.modulus;
        let mut r = ModMat::zeros(self.rows, o.cols, n);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..o.cols {
                    let idx = i * o.cols + j;
                    r.data[idx] = modp(r.data[idx] + mod_mul(a, o.get(k, j), n), n);
                }
            }
        }
        r
    }

    pub fn add(&self, o: &ModMat) -> ModMat {
        let mut r = self.clone();
        for (x, y) in r.data.iter_mut().zip(&o.data) {
            *x = modp(*x + *y, self.modulus);
        }
        r
    }

    pub fn sub(&self, o: &ModMat) -> ModMat {
        let mut r = self.clone();
        for (x, y) in r.data.iter_mut().zip(&o.data) {
            *x = modp(*x - *y, self.modulus);
        }
        r
    }

    pub fn scale(&self, s: i128) -> ModMat {
        let mut r = self.clone();
        for x in r.data.iter_mut() {
            *x = mod_mul(*x, s, self.modulus);
        }
        r
    }

    pub fn pow(&self, e: &num_bigint::BigUint) -> ModMat {
        let mut acc = ModMat::identity(self.rows, self.modulus);
        let bits = e.bits();
        for b in (0..bits).rev() {
            acc = acc.mul(&acc);
            if e.bit(b) {
                acc = acc.mul(self);
            }
        }
        acc
    }

    pub fn reduce(&self, m: i128) -> ModMat {
        ModMat { modulus: m, data: self.data.iter().map(|x| modp(*x, m)).collect(), ..*self }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| *x == 0)
    }

    pub fn row_vec_mul(&self, v: &[i128]) -> Vec<i128> {
        let mut out = vec![0; self.cols];
        for i in 0..self.rows {
            if v[i] == 0 {
                continue;
            }
            for j in 0..self.cols {
                out[j] = modp(out[j] + mod_mul(v[i], self.get(i, j), self.modulus), self.modulus);
            }
        }
        out
    }

    pub fn transpose(&self) -> ModMat {
        let mut r = ModMat::zeros(self.cols, self.rows, self.modulus);
        for i in 0..self.rows {
            for j in 0..self.cols {
                r.set(j, i, self.get(i, j));
            }
        }
        r
    }

    /// Inverse over Z/p^k (p prime); None if singular mod p.
    pub fn inverse(&self, p: i128) -> Option<ModMat> {
        let n = self.rows;
        let m = self.modulus;
        let mut a = self.clone();
        let mut inv = ModMat::identity(n, m);
        for c in 0..n {
            let piv = (c..n).find(|&r| a.get(r, c) % p != 0)?;
            if piv != c {
                for j in 0..n {
                    let t = a.get(c, j);
                    a.set(c, j, a.get(piv, j));
                    a.set(piv, j, t);
                    let t = inv.get(c, j);
                    inv.set(c, j, inv.get(piv, j));
                    inv.set(piv, j, t);
                }
            }
            let s = mod_inv(a.get(c, c), m)?;
            for j in 0..n {
                a.set(c, j, mod_mul(a.get(c, j), s, m));
                inv.set(c, j, mod_mul(inv.get(c, j), s, m));
            }
            for r in 0..n {
                if r != c {
                    let f = a.get(r, c);
                    if f != 0 {
                        for j in 0..n {
                            a.set(r, j, a.get(r, j) - mod_mul(f, a.get(c, j), m));
                            inv.set(r, j, inv.get(r, j) - mod_mul(f, inv.get(c, j), m));
                        }
                    }
                }
            }
        }
        Some(inv)
    }
}

/// Rank of an integer-valued matrix modulo a prime.
pub fn rank_mod_p(mat: &ModMat, p: i128) -> usize {
    let mut a = mat.reduce(p);
    let mut rank = 0;
    for c in 0..a.cols {
        let Some(piv) = (rank..a.rows).find(|&r| a.get(r, c) != 0) else { continue };
        for j in 0..a.cols {
            let t = a.get(rank, j);
            a.set(rank, j, a.get(piv, j));
            a.set(piv, j, t);
        }
        let s = mod_inv(a.get(rank, c), p).unwrap();
        for r in 0..a.rows {
            if r != rank {
                let f = mod_mul(a.get(r, c), s, p);
                if f != 0 {
                    for j in 0..a.cols {
                        a.set(r, j, a.get(r, j) - mod_mul(f, a.get(rank, j), p));
                    }
                }
            }
        }
        rank += 1;
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_roundtrip() {
        let m = 5i128.pow(4);
        let a = ModMat::from_int_rows(&[vec![1, 2, 0], vec![5, 1, 3], vec![0, 7, 2]], m);
        let inv = a.inverse(5).unwrap();
        assert_eq!(a.mul(&inv), ModMat::identity(3, m));
    }
}
