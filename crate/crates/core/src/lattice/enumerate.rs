//! Exact short-vector enumeration for positive definite rational Gram matrices.

use num_traits::{One, Zero};

use crate::arith::{q, Q};

pub type Gram = [[Q; 4]; 4];

fn qf_eval(g: &Gram, x: &[i128; 4]) -> Q {
    let mut s = Q::zero();
    for i in 0..4 {
        if x[i] == 0 {
            continue;
        }
        for j in 0..4 {
            if x[j] != 0 {
                s += g[i][j] * q(x[i] * x[j]);
            }
        }
    }
    s
}

/// LLL reduction of the basis described by `g`; returns (reduced Gram, U) with rows of U giving
/// the new basis in terms of the old one. A floating-point pass shrinks badly skewed Gram
/// matrices first so the exact pass stays within i128.
pub fn lll(g: &Gram) -> (Gram, [[i128; 4]; 4]) {
    let u0 = lll_f64(g);
    let g0 = apply_unimodular(g, &u0);
    let (gr, u1) = lll_exact(&g0);
    let mut u = [[0i128; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            u[i][j] = (0..4).map(|k| u1[i][k] * u0[k][j]).sum();
        }
    }
    (gr, u)
}

fn apply_unimodular(g: &Gram, u: &[[i128; 4]; 4]) -> Gram {
    let mut h = [[Q::zero(); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let mut s = Q::zero();
            for k in 0..4 {
                if u[i][k] == 0 {
                    continue;
                }
                for l in 0..4 {
                    if u[j][l] != 0 {
                        s += g[k][l] * q(u[i][k] * u[j][l]);
                    }
                }
            }
            h[i][j] = s;
        }
    }
    h
}

fn to_f64(x: &Q) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

/// Unimodular U making U g Uᵀ roughly LLL-reduced, in floating point.
fn lll_f64(g: &Gram) -> [[i128; 4]; 4] {
    let mut u = [[0i128; 4]; 4];
    for (i, row) in u.iter_mut().enumerate() {
        row[i] = 1;
    }
    let mut gf = [[0f64; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            gf[i][j] = to_f64(&g[i][j]);
        }
    }
    let gso_f = |g: &[[f64; 4]; 4]| {
        let mut mu = [[0f64; 4]; 4];
        let mut bs = [0f64; 4];
        for i in 0..4 {
            for j in 0..i {
                let mut s = g[i][j];
                for k in 0..j {
                    s -= mu[j][k] * mu[i][k] * bs[k];
                }
                mu[i][j] = s / bs[j];
            }
            let mut s = g[i][i];
            for k in 0..i {
                s -= mu[i][k] * mu[i][k] * bs[k];
            }
            bs[i] = s;
        }
        (mu, bs)
    };
    let mut k = 1;
    let mut guard = 0;
    while k < 4 && guard < 10_000 {
        guard += 1;
        for j in (0..k).rev() {
            let (mu, _) = gso_f(&gf);
            let r = mu[k][j].round();
            if r != 0.0 && r.is_finite() && r.abs() < 1e15 {
                let ri = r as i128;
                for c in 0..4 {
                    u[k][c] -= ri * u[j][c];
                }
                let old = gf;
                for c in 0..4 {
                    if c != k {
                        gf[k][c] = old[k][c] - r * old[j][c];
                        gf[c][k] = gf[k][c];
                    }
                }
                gf[k][k] = old[k][k] - 2.0 * r * old[k][j] + r * r * old[j][j];
            }
        }
        let (mu, bs) = gso_f(&gf);
        if bs[k] >= (0.75 - mu[k][k - 1] * mu[k][k - 1]) * bs[k - 1] {
            k += 1;
        } else {
            u.swap(k, k - 1);
            gf.swap(k, k - 1);
            for row in gf.iter_mut() {
                row.swap(k, k - 1);
            }
            k = if k > 1 { k - 1 } else { 1 };
        }
    }
    u
}

fn lll_exact(g: &Gram) -> (Gram, [[i128; 4]; 4]) {
    let n = 4;
    let mut u = [[0i128; 4]; 4];
    for i in 0..n {
        u[i][i] = 1;
    }
    let mut g = *g;
    let delta = Q::new(3, 4);
    let mut k = 1;
    let mut guard = 0;
    while k < n {
        guard += 1;
        assert!(guard < 100_000, "LLL did not terminate");
        for j in (0..k).rev() {
            let (mu, _) = gso(&g);
            let r = round_q(mu[k][j]);
            if r != 0 {
                // b_k <- b_k - r b_j
                for c in 0..n {
                    u[k][c] -= r * u[j][c];
                }
                g = transform_gram(&g, k, j, r);
            }
        }
        let (mu, bstar) = gso(&g);
        if bstar[k] >= (delta - mu[k][k - 1] * mu[k][k - 1]) * bstar[k - 1] {
            k += 1;
        } else {
            u.swap(k, k - 1);
            g = swap_gram(&g, k, k - 1);
            k = if k > 1 { k - 1 } else { 1 };
        }
    }
    (g, u)
}

fn round_q(x: Q) -> i128 {
    (x + Q::new(1, 2)).floor().to_integer()
}

fn gso(g: &Gram) -> ([[Q; 4]; 4], [Q; 4]) {
    let mut mu = [[Q::zero(); 4]; 4];
    let mut bstar = [Q::zero(); 4];
    for i in 0..4 {
        for j in 0..i {
            let mut s = g[i][j];
            for k in 0..j {
                s -= mu[j][k] * mu[i][k] * bstar[k];
            }
            mu[i][j] = s / bstar[j];
        }
        let mut s = g[i][i];
        for k in 0..i {
            s -= mu[i][k] * mu[i][k] * bstar[k];
        }
        bstar[i] = s;
        mu[i][i] = Q::one();
    }
    (mu, bstar)
}

fn transform_gram(g: &Gram, k: usize, j: usize, r: i128) -> Gram {
    // new b_k = b_k - r b_j
    let r = q(r);
    let mut h = *g;
    for c in 0..4 {
        if c != k {
            h[k][c] = g[k][c] - r * g[j][c];
            h[c][k] = h[k][c];
        }
    }
    h[k][k] = g[k][k] - q(2) * r * g[k][j] + r * r * g[j][j];
    h
}

fn swap_gram(g: &Gram, a: usize, b: usize) -> Gram {
    let mut h = *g;
    for i in 0..4 {
        for j in 0..4 {
            let ii = if i == a { b } else if i == b { a } else { i };
            let jj = if j == a { b } else if j == b { a } else { j };
            h[i][j] = g[ii][jj];
        }
    }
    h
}

/// All nonzero x with x^T g x <= bound (or == bound when `exact`), by Fincke–Pohst on the
/// LLL-reduced form. Coordinates refer to the original basis. Output is sorted.
pub fn short_vectors(g: &Gram, bound: Q, exact: bool) -> Vec<[i128; 4]> {
    let (gr, u) = lll(g);
    // q_ii and q_ij from the LDL^T decomposition of gr
    let mut qm = [[Q::zero(); 4]; 4];
    let mut a = gr;
    for i in 0..4 {
        qm[i][i] = a[i][i];
        for j in i + 1..4 {
            qm[i][j] = a[i][j] / a[i][i];
        }
        for j in i + 1..4 {
            for l in i + 1..4 {
                a[j][l] -= qm[i][j] * a[i][l];
            }
        }
    }
    let mut out = Vec::new();
    let mut x = [0i128; 4];
    fp_rec(&qm, 3, bound, &mut x, &mut out, exact);
    let mut res: Vec<[i128; 4]> = out
        .into_iter()
        .filter(|y| y.iter().any(|c| *c != 0))
        .map(|y| {
            let mut z = [0i128; 4];
            for r in 0..4 {
                for c in 0..4 {
                    z[c] += y[r] * u[r][c];
                }
            }
            z
        })
        .collect();
    res.sort();
    res
}

fn fp_rec(qm: &[[Q; 4]; 4], i: usize, remaining: Q, x: &mut [i128; 4], out: &mut Vec<[i128; 4]>, exact: bool) {
    let mut c = Q::zero();
    for j in i + 1..4 {
        c += qm[i][j] * q(x[j]);
    }
    let t = remaining / qm[i][i];
    // integers z with (z + c)^2 <= t
    let tf = (*t.numer() as f64) / (*t.denom() as f64);
    let cf = (*c.numer() as f64) / (*c.denom() as f64);
    let s = tf.max(0.0).sqrt();
    let lo = (-cf - s).floor() as i128 - 1;
    let hi = (-cf + s).ceil() as i128 + 1;
    for z in lo..=hi {
        let d = q(z) + c;
        let used = qm[i][i] * d * d;
        if used > remaining {
            continue;
        }
        x[i] = z;
        let rem = remaining - used;
        if i == 0 {
            if !exact || rem.is_zero() {
                out.push(*x);
            }
        } else {
            fp_rec(qm, i - 1, rem, x, out, exact);
        }
    }
    x[i] = 0;
}

pub fn eval(g: &Gram, x: &[i128; 4]) -> Q {
    qf_eval(g, x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_gram_counts() {
        let mut g = [[Q::zero(); 4]; 4];
        for i in 0..4 {
            g[i][i] = Q::one();
        }
        // Jacobi: r_4(1) = 8, r_4(2) = 24
        assert_eq!(short_vectors(&g, q(1), true).len(), 8);
        assert_eq!(short_vectors(&g, q(2), true).len(), 24);
        assert_eq!(short_vectors(&g, q(2), false).len(), 32);
    }

    #[test]
    fn skewed_basis() {
        // identity form in a skewed basis b_i = e_i + 7 e_0
        let mut b = [[0i128; 4]; 4];
        for i in 0..4 {
            b[i][i] = 1;
            if i > 0 {
                b[i][0] = 7;
            }
        }
        let mut g = [[Q::zero(); 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                g[i][j] = q((0..4).map(|k| b[i][k] * b[j][k]).sum());
            }
        }
        assert_eq!(short_vectors(&g, q(1), true).len(), 8);
        for v in short_vectors(&g, q(2), true) {
            assert_eq!(eval(&g, &v), q(2));
        }
    }
}
