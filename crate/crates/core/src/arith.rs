//! Integer and modular helpers shared by every layer.

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, Zero};

pub type Q = Ratio<i128>;

pub fn q(n: i128) -> Q {
    Q::from_integer(n)
}

pub fn qf(n: i128, d: i128) -> Q {
    Q::new(n, d)
}

/// Serialize a rational as "num/den" (den omitted when 1 is still written).
pub fn q_str(x: &Q) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

pub fn gcd(a: i128, b: i128) -> i128 {
    a.gcd(&b)
}

pub fn lcm(a: i128, b: i128) -> i128 {
    if a == 0 || b == 0 {
        0
    } else {
        a.lcm(&b)
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

pub fn next_prime(n: u64) -> u64 {
    let mut k = n + 1;
    while !is_prime(k) {
        k += 1;
    }
    k
}

pub fn factor(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            let mut e = 0;
            while n.is_multiple_of(d) {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn prime_divisors(n: u64) -> Vec<u64> {
    factor(n).into_iter().map(|(p, _)| p).collect()
}

pub fn is_squarefree(n: u64) -> bool {
    n > 0 && factor(n).iter().all(|&(_, e)| e == 1)
}

/// p-adic valuation of a nonzero integer.
pub fn val(n: i128, p: i128) -> u32 {
    assert!(n != 0, "valuation of zero");
    let mut n = n.abs();
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

pub fn val_q(x: &Q, p: i128) -> i32 {
    val(*x.numer(), p) as i32 - val(*x.denom(), p) as i32
}

pub fn modp(x: i128, m: i128) -> i128 {
    x.rem_euclid(m)
}

pub fn pow_i(b: i128, e: u32) -> i128 {
    b.pow(e)
}

pub fn mod_mul(a: i128, b: i128, m: i128) -> i128 {
    modp(modp(a, m) * modp(b, m), m)
}

pub fn mod_pow(b: i128, mut e: u128, m: i128) -> i128 {
    let mut base = modp(b, m);
    let mut acc = 1 % m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mod_mul(acc, base, m);
        }
        base = mod_mul(base, base, m);
        e >>= 1;
    }
    acc
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn mod_inv(a: i128, m: i128) -> Option<i128> {
    let e = modp(a, m).extended_gcd(&m);
    if e.gcd != 1 {
        return None;
    }
    Some(modp(e.x, m))
}

/// Reduce a p-integral rational modulo m (m a prime power coprime to the denominator).
pub fn q_mod(x: &Q, m: i128) -> Option<i128> {
    let inv = mod_inv(*x.denom(), m)?;
    Some(mod_mul(*x.numer(), inv, m))
}

/// Kronecker symbol (d/n) for n > 0.
pub fn kronecker(d: i128, n: i128) -> i32 {
    assert!(n > 0);
    let mut n = n;
    let mut res = 1i32;
    let mut twos = 0;
    while n % 2 == 0 {
        n /= 2;
        twos += 1;
    }
    if twos > 0 {
        if d % 2 == 0 {
            return 0;
        }
        let r = modp(d, 8);
        if (r == 3 || r == 5) && twos % 2 == 1 {
            res = -res;
        }
    }
    // Jacobi (d/n) for odd n
    let mut a = modp(d, n);
    let mut b = n;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            let r = b % 8;
            if r == 3 || r == 5 {
                res = -res;
            }
        }
        std::mem::swap(&mut a, &mut b);
        if a % 4 == 3 && b % 4 == 3 {
            res = -res;
        }
        a %= b;
    }
    if b == 1 {
        res
    } else {
        0
    }
}

/// A square root of `a` modulo p^k for odd p and a a unit, found by search mod p and Hensel lifting.
pub fn sqrt_mod_pk(a: i128, p: i128, k: u32) -> Option<i128> {
    let pk = p.pow(k);
    let a = modp(a, pk);
    if p == 2 {
        return (0..pk).find(|x| mod_mul(*x, *x, pk) == a);
    }
    if a % p == 0 {
        return (0..pk).find(|x| mod_mul(*x, *x, pk) == a);
    }
    let r0 = (1..p).find(|x| (x * x - a).rem_euclid(p) == 0)?;
    let mut r = r0;
    let mut mk = p;
    for _ in 1..k {
        mk *= p;
        // Newton step r <- r - (r^2 - a)/(2r)
        let f = modp(r * r - a, mk);
        let inv2r = mod_inv(2 * r, mk).unwrap();
        r = modp(r - mod_mul(f, inv2r, mk), mk);
    }
    Some(r)
}

/// Teichmuller representative of a unit mod p^k.
pub fn teichmuller(a: i128, p: i128, k: u32) -> i128 {
    let pk = p.pow(k);
    let mut x = modp(a, pk);
    // x^(p^(k-1)) is the Teichmuller lift of a mod p
    for _ in 1..k {
        x = mod_pow(x, p as u128, pk);
    }
    x
}

/// Smallest positive quadratic non-residue modulo an odd prime.
pub fn least_nonresidue(p: i128) -> i128 {
    (2..p).find(|g| kronecker(*g, p) == -1).unwrap()
}

/// The units of Z/m.
pub fn units(m: i128) -> Vec<i128> {
    if m == 1 {
        return vec![0];
    }
    (1..m).filter(|x| gcd(*x, m) == 1).collect()
}

/// Canonical representative of t modulo {±1} in (Z/m)^×.
pub fn pm_rep(t: i128, m: i128) -> i128 {
    if m <= 2 {
        return modp(t, m);
    }
    let t = modp(t, m);
    t.min(m - t)
}

pub fn euler_phi(n: u64) -> u64 {
    let mut r = n;
    for (p, _) in factor(n) {
        r = r / p * (p - 1);
    }
    r
}

/// Integer square root (floor).
pub fn isqrt(n: i128) -> i128 {
    if n < 0 {
        panic!("isqrt of negative");
    }
    let mut x = (n as f64).sqrt() as i128;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}

pub fn is_square(n: i128) -> bool {
    n >= 0 && isqrt(n).pow(2) == n
}

pub fn q_floor(x: &Q) -> i128 {
    x.floor().to_integer()
}

pub fn q_round(x: &Q) -> i128 {
    (x + qf(1, 2)).floor().to_integer()
}

pub fn q_is_int(x: &Q) -> bool {
    x.is_integer()
}

pub fn q_abs(x: &Q) -> Q {
    x.abs()
}

pub fn q_zero() -> Q {
    Q::zero()
}

pub fn q_one() -> Q {
    Q::one()
}

/// Chinese remainder for pairwise coprime moduli.
pub fn crt(residues: &[(i128, i128)]) -> (i128, i128) {
    let mut x = 0i128;
    let mut m = 1i128;
    for &(r, n) in residues {
        let inv = mod_inv(m % n, n).expect("moduli not coprime");
        let t = mod_mul(modp(r - x, n), inv, n);
        x += m * t;
        m *= n;
        x = modp(x, m);
    }
    (x, m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronecker_matches_brute_force() {
        for p in [3i128, 5, 7, 11, 13] {
            for d in -30i128..30 {
                let k = kronecker(d, p);
                let r = modp(d, p);
                let expected = if r == 0 {
                    0
                } else if (1..p).any(|x| (x * x - r) % p == 0) {
                    1
                } else {
                    -1
                };
                assert_eq!(k, expected, "({d}/{p})");
            }
        }
        assert_eq!(kronecker(-11, 2), -1);
        assert_eq!(kronecker(-7, 2), 1);
    }

    #[test]
    fn hensel_sqrt() {
        let r = sqrt_mod_pk(-19, 5, 8).unwrap();
        assert_eq!(mod_mul(r, r, 5i128.pow(8)), modp(-19, 5i128.pow(8)));
        assert!(sqrt_mod_pk(2, 5, 3).is_none());
    }

    #[test]
    fn teichmuller_is_root_of_unity() {
        let m = 5i128.pow(6);
        for a in 1..5 {
            let w = teichmuller(a, 5, 6);
            assert_eq!(mod_pow(w, 4, m), 1);
            assert_eq!(w % 5, a);
        }
    }

    #[test]
    fn crt_small() {
        assert_eq!(crt(&[(2, 3), (3, 5)]).0, 8);
    }
}
