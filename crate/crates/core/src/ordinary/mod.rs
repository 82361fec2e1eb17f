//! Ordinary parts of Brandt modules, ordinary eigen functionals and theta elements.

pub mod eigen;
pub mod linalg;
pub mod projector;
pub mod theta;

pub use eigen::{ordinary_eigen, ordinary_eigen_auto, EigenData};
pub use projector::{ordinary_projector, OrdinaryDecomposition};
pub use theta::{chi_special_value, lp_truncation, theta_element, GroupRingElt, ThetaElement};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith;
    use crate::zmod::{rank_mod_p, ModMat};
    use num_bigint::BigUint;
    use crate::cm::anticyc::anticyclotomic_tower;
    use crate::cm::ImagQuadField;
    use crate::heegner::build_family;
    use crate::lattice::order::eichler_order_tower;
    use crate::quaternion::algebra_for_discriminant;
    use crate::shimura::hecke::HeckeOp;
    use crate::shimura::ShimuraTower;

    pub(crate) fn theta_instance() -> (ShimuraTower, ImagQuadField) {
        let alg = algebra_for_discriminant(11, true).unwrap();
        let tw = eichler_order_tower(&alg, 1, 5, 1, 8).unwrap();
        (ShimuraTower::new(tw).unwrap(), ImagQuadField::new(-3).unwrap())
    }

    fn level_one() -> (ShimuraTower, OrdinaryDecomposition, EigenData) {
        let (st, _) = theta_instance();
        let u = st.level(1).hecke(HeckeOp::U).unwrap();
        let ord = ordinary_projector(&u, 5, 8).unwrap();
        let eig = ordinary_eigen(st.level(1), &ord, &[(2, -2), (5, 1)]).unwrap();
        (st, ord, eig)
    }

    /// a_ℓ = ℓ + 1 - #E(F_ℓ) for E: y² + y = x³ - x² - 10x - 20.
    fn curve_a(ell: i128) -> i64 {
        let mut count = 1;
        for x in 0..ell {
            for y in 0..ell {
                let l = y * y + y;
                let r = x * x * x - x * x - 10 * x - 20;
                if (l - r).rem_euclid(ell) == 0 {
                    count += 1;
                }
            }
        }
        (ell + 1 - count) as i64
    }

    #[test]
    fn projector_certificates() {
        let (st, ord, _) = level_one();
        let u = st.level(1).hecke(HeckeOp::U).unwrap();
        let r = ord.report(&u);
        assert!(r.idempotent && r.commutes && r.inverse_ok);
        assert_eq!(r.ordinary_rank, r.unit_root_count);
        // independent count: the nonzero generalized eigenspaces of U mod p have total
        // dimension rank(U^n mod p)
        let n = u.dim();
        let un = ModMat::from_int_rows(&u.matrix, 5).pow(&BigUint::from(n as u64));
        assert_eq!(rank_mod_p(&un, 5), ord.ordinary_rank);
        assert!(ord.non_ordinary_power(&u, projector::nilpotence_bound(n, 8)).is_zero());
    }

    #[test]
    fn projector_rejects_level_zero() {
        let (st, _) = theta_instance();
        let u = st.level(0).hecke(HeckeOp::U);
        if let Ok(u) = u {
            assert!(ordinary_projector(&u, 5, 8).is_err());
        }
    }

    #[test]
    fn eisenstein_functional() {
        let (st, _, _) = level_one();
        let lv = st.level(1);
        let ones = vec![1i128; lv.len()];
        for ell in [2u64, 3, 7, 13] {
            let t = lv.hecke(HeckeOp::T(ell)).unwrap();
            let img = ModMat::from_int_rows(&t.matrix, 5i128.pow(8)).row_vec_mul(&ones);
            assert!(img.iter().all(|x| *x == ell as i128 + 1));
        }
    }

    #[test]
    fn eigensystem_of_level_eleven_curve() {
        let (st, ord, eig) = level_one();
        let lv = st.level(1);
        assert_eq!(curve_a(5), 1);
        assert_eq!(eig.a_p, Some(curve_a(5) as i128));
        let md = eig.modulus;
        let a = eig.alpha_p;
        assert_eq!(arith::modp(a * a - a + 5, md), 0);
        assert_eq!(a % 5, 1);
        for ell in [2u64, 3, 7, 13] {
            let t = lv.hecke(HeckeOp::T(ell)).unwrap();
            let img = ModMat::from_int_rows(&t.matrix, md).row_vec_mul(&eig.v);
            let ae = curve_a(ell as i128) as i128;
            assert!(img.iter().zip(&eig.v).all(|(x, y)| *x == arith::mod_mul(ae, *y, md)), "T_{ell}");
        }
        let r = eig.report(lv, &ord).unwrap();
        assert!(r.fixed_by_e && r.diamond_trivial);
        assert_eq!(r.eigenspace_dim, 2);
    }

    #[test]
    fn unmatched_targets_are_rejected() {
        let (st, ord, _) = level_one();
        let e = ordinary_eigen(st.level(1), &ord, &[(2, 1), (3, 3)]).unwrap_err();
        assert_eq!(e.exit_code(), 3);
    }

    #[test]
    fn theta_tower() {
        let (st, k) = theta_instance();
        let (_, _, eig) = level_one();
        let fam = build_family(&st, &k, 1, 1, 3, &[]).unwrap();
        let layers = anticyclotomic_tower(&k, 5, 2).unwrap();
        let th: Vec<ThetaElement> = layers.iter().map(|l| theta_element(&st, &fam, l, &eig).unwrap()).collect();
        assert_eq!(th.iter().map(|t| t.d).collect::<Vec<_>>(), vec![1, 2, 3]);
        assert!(th.iter().all(|t| t.section_independent && t.matches_direct_sum));
        assert_eq!(theta::compatibility(&th), vec![true, true]);
        // θ_0 is a unit here, so compatibility is not vacuous
        assert_ne!(th[0].element.coeffs[0] % 5, 0);
        let ls: Vec<GroupRingElt> = th.iter().map(lp_truncation).collect();
        for (t, l) in th.iter().zip(&ls) {
            assert_eq!(l.star(), *l);
            assert_eq!(l.augmentation(), arith::mod_mul(t.element.augmentation(), t.element.augmentation(), eig.modulus));
            for tau in 0..t.element.order {
                assert_eq!(lp_truncation(&ThetaElement { element: t.element.translate(tau), ..t.clone() }), *l);
            }
        }
        assert_eq!(ls[1].project(1), ls[0]);
        assert_eq!(ls[2].project(5), ls[1]);
        for tau in [1u64, 3] {
            let moved = theta::theta_translated(&st, &fam, &layers[1], &eig, tau).unwrap();
            assert_eq!(moved, th[1].element.translate(tau));
        }
    }

    #[test]
    fn theta_needs_depth() {
        let (st, k) = theta_instance();
        let (_, _, eig) = level_one();
        let fam = build_family(&st, &k, 1, 1, 1, &[]).unwrap();
        let layers = anticyclotomic_tower(&k, 5, 1).unwrap();
        let e = theta_element(&st, &fam, &layers[1], &eig).unwrap_err();
        assert!(e.to_string().contains("d(n) = 2"), "{e}");
    }

    #[test]
    fn characters_of_theta_one() {
        let (st, k) = theta_instance();
        let (_, _, eig) = level_one();
        let fam = build_family(&st, &k, 1, 1, 2, &[]).unwrap();
        let layers = anticyclotomic_tower(&k, 5, 1).unwrap();
        let t1 = theta_element(&st, &fam, &layers[1], &eig).unwrap();
        let l1 = lp_truncation(&t1);
        for j in 0..5 {
            let a = chi_special_value(&t1.element, 5, j).unwrap();
            let b = theta::chi_of_theta_direct(&st, &fam, &layers[1], &eig, j).unwrap();
            assert_eq!(a, b);
            let conj = chi_special_value(&t1.element, 5, (5 - j) % 5).unwrap();
            assert_eq!(chi_special_value(&l1, 5, j).unwrap(), a.mul(&conj));
        }
        // G̃_1 is trivial for Q(√-3): the 𝒥-avatar is one number, η of the trace to K
        let j = theta::j_element(&st, &fam, &eig).unwrap();
        assert_eq!(j.len(), 1);
        let t0 = theta_element(&st, &fam, &layers[0], &eig).unwrap();
        assert_eq!(t0.element.coeffs.len(), 1);
    }

    #[test]
    fn rescaling_v_scales_theta() {
        let (st, k) = theta_instance();
        let (_, _, eig) = level_one();
        let fam = build_family(&st, &k, 1, 1, 2, &[]).unwrap();
        let layers = anticyclotomic_tower(&k, 5, 1).unwrap();
        let md = eig.modulus;
        let e2 = EigenData { v: eig.v.iter().map(|x| arith::mod_mul(*x, 2, md)).collect(), ..eig.clone() };
        let a = theta_element(&st, &fam, &layers[1], &eig).unwrap();
        let b = theta_element(&st, &fam, &layers[1], &e2).unwrap();
        assert_eq!(b.element, a.element.scale(2));
        assert_eq!(lp_truncation(&b), lp_truncation(&a).scale(4));
    }
}
