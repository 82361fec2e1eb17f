//! Positive definite primitive binary quadratic forms and Gaussian composition.

use num_integer::Integer;
use serde::Serialize;

use crate::arith;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Form {
    pub a: i128,
    pub b: i128,
    pub c: i128,
}

impl Form {
    pub fn new(a: i128, b: i128, c: i128) -> Self {
        Form { a, b, c }
    }

    pub fn disc(&self) -> i128 {
        self.b * self.b - 4 * self.a * self.c
    }

    pub fn eval(&self, x: i128, y: i128) -> i128 {
        self.a * x * x + self.b * x * y + self.c * y * y
    }

    pub fn is_primitive(&self) -> bool {
        self.a.gcd(&self.b).gcd(&self.c) == 1
    }

    pub fn is_reduced(&self) -> bool {
        let (a, b, c) = (self.a, self.b, self.c);
        b.abs() <= a && a <= c && !(b < 0 && (b.abs() == a || a == c))
    }

    /// Move b into (-a, a].
    fn normalize(&self) -> Form {
        let d = self.disc();
        let (a, b) = (self.a, self.b);
        let r = Integer::div_floor(&(a - b), &(2 * a));
        let b2 = b + 2 * r * a;
        Form { a, b: b2, c: (b2 * b2 - d) / (4 * a) }
    }

    pub fn reduce(&self) -> Form {
        let d = self.disc();
        let mut f = self.normalize();
        while f.a > f.c {
            f = Form { a: f.c, b: -f.b, c: f.a }.normalize();
        }
        if f.a == f.c && f.b < 0 {
            f.b = -f.b;
        }
        debug_assert_eq!(f.disc(), d);
        f
    }

    pub fn inverse(&self) -> Form {
        Form { a: self.a, b: -self.b, c: self.c }.reduce()
    }

    pub fn principal(disc: i128) -> Form {
        let b = if disc.rem_euclid(4) == 0 { 0 } else { 1 };
        Form { a: 1, b, c: (b * b - disc) / 4 }
    }

    /// Gaussian composition (Shanks' formulation), reduced.
    pub fn compose(&self, other: &Form) -> Form {
        let (mut f1, mut f2) = (*self, *other);
        if f1.a > f2.a {
            std::mem::swap(&mut f1, &mut f2);
        }
        let (a1, b1) = (f1.a, f1.b);
        let (a2, b2, c2) = (f2.a, f2.b, f2.c);
        let s = (b1 + b2) / 2;
        let n = b2 - s;
        let (y1, d) = if a2 % a1 == 0 {
            (0, a1)
        } else {
            let e = a2.extended_gcd(&a1);
            (e.x, e.gcd)
        };
        let (x2, y2, d1) = if s % d == 0 {
            (0, -1, d)
        } else {
            let e = s.extended_gcd(&d);
            (e.x, -e.y, e.gcd)
        };
        let v1 = a1 / d1;
        let v2 = a2 / d1;
        let r = (y1 * y2 * n - x2 * c2).rem_euclid(v1);
        let b3 = b2 + 2 * v2 * r;
        let a3 = v1 * v2;
        let c3 = (c2 * d1 + r * (b2 + v2 * r)) / v1;
        let f = Form { a: a3, b: b3, c: c3 };
        debug_assert_eq!(f.disc(), self.disc());
        f.reduce()
    }

    pub fn pow(&self, mut e: u64) -> Form {
        let mut acc = Form::principal(self.disc());
        let mut base = *self;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.compose(&base);
            }
            base = base.compose(&base);
            e >>= 1;
        }
        acc
    }
}

/// All reduced primitive forms of discriminant `disc` < 0, sorted.
pub fn reduced_forms(disc: i128) -> Vec<Form> {
    assert!(disc < 0 && disc.rem_euclid(4) <= 1);
    let mut out = Vec::new();
    let amax = arith::isqrt(-disc / 3) + 1;
    for a in 1..=amax {
        for b in -a + 1..=a {
            if (b - disc).rem_euclid(2) != 0 {
                continue;
            }
            let num = b * b - disc;
            if num % (4 * a) != 0 {
                continue;
            }
            let f = Form { a, b, c: num / (4 * a) };
            if f.is_reduced() && f.is_primitive() {
                out.push(f);
            }
        }
    }
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_class_numbers() {
        assert_eq!(reduced_forms(-11), vec![Form::new(1, 1, 3)]);
        assert_eq!(reduced_forms(-275).len(), 4);
        assert_eq!(reduced_forms(-75).len(), 2);
        assert_eq!(reduced_forms(-23).len(), 3);
        assert_eq!(reduced_forms(-1875).len(), 10);
        assert_eq!(reduced_forms(-7500).len(), 30);
    }

    #[test]
    fn group_axioms_exhaustive() {
        for d in [-23i128, -275, -7500, -11 * 49 * 25, -3 * 15625] {
            let fs = reduced_forms(d);
            let e = Form::principal(d).reduce();
            for f in &fs {
                assert_eq!(f.compose(&e), *f);
                assert_eq!(f.compose(&f.inverse()), e);
                for g in &fs {
                    assert_eq!(f.compose(g), g.compose(f));
                    assert!(fs.contains(&f.compose(g)));
                }
            }
            for f in fs.iter().take(6) {
                for g in fs.iter().take(6) {
                    for h in fs.iter().take(6) {
                        assert_eq!(f.compose(g).compose(h), f.compose(&g.compose(h)));
                    }
                }
            }
        }
    }
}
