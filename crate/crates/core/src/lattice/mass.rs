//! Eichler mass formula, standalone on purpose: it shares no code with the class-set search.

use num_rational::Ratio;

/// Mass of an Eichler order of level `level` in the definite algebra of discriminant `n_minus`:
/// (1/12) ∏_{q | N-} (q - 1) ∏_{q^e || level} q^{e-1} (q + 1).
pub fn eichler_mass(n_minus: u64, level: u64) -> Ratio<i128> {
    let mut num: i128 = 1;
    let mut n = n_minus;
    let mut d = 2;
    while n > 1 {
        if n.is_multiple_of(d) {
            num *= (d - 1) as i128;
            n /= d;
        } else {
            d += 1;
        }
    }
    let mut l = level;
    let mut d = 2;
    while l > 1 {
        if l.is_multiple_of(d) {
            let mut e = 0;
            while l.is_multiple_of(d) {
                l /= d;
                e += 1;
            }
            num *= (d as i128).pow(e - 1) * (d as i128 + 1);
        } else {
            d += 1;
        }
    }
    Ratio::new(num, 12)
}
