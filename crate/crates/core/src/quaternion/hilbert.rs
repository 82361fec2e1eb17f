
use crate::arith::{self, Q};

/// Hilbert symbol (a,b)_v; `place = None` is the real place.
pub fn hilbert_symbol(a: Q, b: Q, place: Option<u64>) -> i32 {
    assert!(*a.numer() != 0 && *b.numer() != 0, "hilbert symbol of zero");
    // (a,b) only depends on square classes, so clear denominators: a*den^2.
    let a = a.numer() * a.denom();
    let b = b.numer() * b.denom();
    match place {
        None => {
            if a < 0 && b < 0 {
                -1
            } else {
                1
            }
        }
        Some(2) => hilbert_two_exhaustive(a, b),
        Some(p) => hilbert_odd(a, b, p as i128),
    }
}

fn split_val(n: i128, p: i128) -> (u32, i128) {
    let v = arith::val(n, p);
    (v, n / p.pow(v))
}

fn hilbert_odd(a: i128, b: i128, p: i128) -> i32 {
    let (al, u) = split_val(a, p);
    let (be, v) = split_val(b, p);
    let mut s = 1;
    if (al * be) % 2 == 1 && (p - 1) / 2 % 2 == 1 {
        s = -s;
    }
    if be % 2 == 1 {
        s *= arith::kronecker(u, p);
    }
    if al % 2 == 1 {
        s *= arith::kronecker(v, p);
    }
    s
}

/// Strip even powers of 2 so each valuation is 0 or 1.
fn square_reduce_two(mut n: i128) -> i128 {
    while n % 4 == 0 {
        n /= 4;
    }
    n
}

/// Exhaustive primitive solvability of z^2 = a x^2 + b y^2 modulo 2^k with k = 3 + v(a) + v(b).
fn hilbert_two_exhaustive(a: i128, b: i128) -> i32 {
    let a = square_reduce_two(a);
    let b = square_reduce_two(b);
    let k = 3 + arith::val(a, 2) + arith::val(b, 2);
    let m = 1i128 << k;
    for x in 0..m {
        for y in 0..m {
            let rhs = arith::modp(a * x * x + b * y * y, m);
            for z in 0..m {
                if x % 2 == 0 && y % 2 == 0 && z % 2 == 0 {
                    continue;
                }
                if arith::modp(z * z, m) == rhs {
                    return 1;
                }
            }
        }
    }
    -1
}

/// Closed formula at 2 via the ε and ω characters; used to cross-check the exhaustive search.
pub fn hilbert_two_formula(a: i128, b: i128) -> i32 {
    let (al, u) = split_val(a, 2);
    let (be, v) = split_val(b, 2);
    let eps = |x: i128| (arith::modp(x, 4) == 3) as i64;
    let omega = |x: i128| {
        let r = arith::modp(x, 8);
        (r == 3 || r == 5) as i64
    };
    let e = eps(u) * eps(v) + al as i64 * omega(v) + be as i64 * omega(u);
    if e % 2 == 0 {
        1
    } else {
        -1
    }
}

/// All places where (a,b) may ramify: primes dividing 2ab.
pub fn product_over_places(a: Q, b: Q) -> i32 {
    let n = (a.numer() * a.denom() * b.numer() * b.denom() * 2).unsigned_abs() as u64;
    let mut prod = hilbert_symbol(a, b, None);
    for p in arith::prime_divisors(n) {
        prod *= hilbert_symbol(a, b, Some(p));
    }
    prod
}
