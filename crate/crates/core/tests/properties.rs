use proptest::prelude::*;

use gross_tower::arith::{kronecker, q, Q};
use gross_tower::cm::forms::{reduced_forms, Form};
use gross_tower::cm::{class_number_formula, ring_class_group, ImagQuadField};
use gross_tower::lattice::enumerate::{eval, short_vectors};
use gross_tower::lattice::QuatLattice;
use gross_tower::ordinary::linalg::{charpoly, hensel_root};
use gross_tower::ordinary::{chi_special_value, GroupRingElt};
use gross_tower::quaternion::{algebra_for_discriminant, Quaternion};

const MD: i128 = 5i128.pow(6);

fn group_ring(order: u64) -> impl Strategy<Value = GroupRingElt> {
    prop::collection::vec(0..MD, order as usize).prop_map(move |coeffs| GroupRingElt { order, modulus: MD, coeffs })
}

fn pair(order: u64) -> impl Strategy<Value = (GroupRingElt, GroupRingElt)> {
    (group_ring(order), group_ring(order))
}

/// Determinant by cofactor expansion (oracle for small matrices).
fn det(a: &[Vec<Q>]) -> Q {
    let n = a.len();
    if n == 0 {
        return q(1);
    }
    let mut acc = q(0);
    for j in 0..n {
        let minor: Vec<Vec<Q>> = a[1..].iter().map(|r| r.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, x)| *x).collect()).collect();
        let s = if j % 2 == 0 { q(1) } else { q(-1) };
        acc += s * a[0][j] * det(&minor);
    }
    acc
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn star_is_an_involutive_ring_map((x, y) in pair(25)) {
        prop_assert_eq!(x.star().star(), x.clone());
        prop_assert_eq!(x.mul(&y).star(), x.star().mul(&y.star()));
        prop_assert_eq!(x.star().augmentation(), x.augmentation());
    }

    #[test]
    fn l_is_star_invariant_and_translation_invariant(x in group_ring(25), tau in 0u64..25) {
        let l = x.mul(&x.star());
        prop_assert_eq!(l.star(), l.clone());
        let t = x.translate(tau);
        prop_assert_eq!(t.mul(&t.star()), l);
    }

    #[test]
    fn projection_is_a_ring_map((x, y) in pair(25)) {
        prop_assert_eq!(x.mul(&y).project(5), x.project(5).mul(&y.project(5)));
        prop_assert_eq!(x.project(5).project(1), x.project(1));
        prop_assert_eq!(x.project(1).coeffs[0], x.augmentation());
    }

    #[test]
    fn characters_are_multiplicative((x, y) in pair(25), k in 0u64..25) {
        let lhs = chi_special_value(&x.mul(&y), 5, k).unwrap();
        let rhs = chi_special_value(&x, 5, k).unwrap().mul(&chi_special_value(&y, 5, k).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn trivial_character_is_augmentation(x in group_ring(5)) {
        let c = chi_special_value(&x, 5, 0).unwrap();
        // 1 + ζ + ... + ζ^4 = 0, so χ_0 lands on the constant term
        prop_assert_eq!(c.coeffs[0], x.augmentation());
        prop_assert!(c.coeffs[1..].iter().all(|v| *v == 0));
    }

    #[test]
    fn hessenberg_charpoly_matches_determinant(a in prop::collection::vec(prop::collection::vec(-6i128..7, 4), 4), x in -5i128..6) {
        let m: Vec<Vec<Q>> = a.iter().map(|r| r.iter().map(|v| q(*v)).collect()).collect();
        let cp = charpoly(&m, &q(0));
        let at_x = cp.iter().rev().fold(q(0), |acc, c| acc * q(x) + c);
        let shifted: Vec<Vec<Q>> = (0..4).map(|i| (0..4).map(|j| if i == j { q(x) - m[i][j] } else { -m[i][j] }).collect()).collect();
        prop_assert_eq!(at_x, det(&shifted));
    }

    #[test]
    fn hensel_lift_of_unit_root(ap in -4i128..5) {
        // x² - a x + 5 has exactly one unit root mod 5 when 5 ∤ a
        prop_assume!(ap % 5 != 0);
        let f = [5, -ap, 1];
        let roots: Vec<i128> = (1..5).filter_map(|r| hensel_root(&f, r, 5, 8)).collect();
        prop_assert_eq!(roots.len(), 1);
        let r = roots[0];
        let m = 5i128.pow(8);
        prop_assert_eq!((r * r - ap * r + 5).rem_euclid(m), 0);
        prop_assert_eq!(r.rem_euclid(5), ap.rem_euclid(5));
    }

    #[test]
    fn lattice_hnf_is_basis_independent(c in prop::collection::vec(-9i128..10, 16), u in prop::collection::vec(-2i128..3, 2)) {
        let gens: Vec<Quaternion> = c.chunks(4).map(|v| Quaternion::from_ints(-1, -1, [v[0], v[1], v[2], v[3]])).collect();
        let Ok(l) = QuatLattice::from_generators(&gens) else { return Ok(()) };
        // elementary moves and an extra dependent generator
        let mut moved = gens.clone();
        moved.swap(0, 3);
        moved[1] = moved[1] + moved[2].scale(q(u[0]));
        moved.push(gens[0] + gens[1].scale(q(u[1])));
        let l2 = QuatLattice::from_generators(&moved).unwrap();
        prop_assert_eq!(&l, &l2);
        for g in &gens {
            prop_assert!(l.contains(g));
        }
    }

    #[test]
    fn short_vectors_match_brute_force(d in prop::collection::vec(1i128..4, 4), off in -1i128..2, bound in 1i128..7) {
        let mut g = [[q(0); 4]; 4];
        for i in 0..4 {
            g[i][i] = q(d[i] + 1);
        }
        g[0][1] = gross_tower::arith::qf(off, 2);
        g[1][0] = g[0][1];
        let b = q(bound);
        let found = short_vectors(&g, b, false);
        let mut brute = Vec::new();
        let r = 4i128;
        for x0 in -r..=r { for x1 in -r..=r { for x2 in -r..=r { for x3 in -r..=r {
            let x = [x0, x1, x2, x3];
            if x != [0; 4] && eval(&g, &x) <= b {
                brute.push(x);
            }
        }}}}
        brute.sort();
        prop_assert_eq!(found, brute);
    }

    #[test]
    fn ring_class_numbers(idx in 0usize..4, c in 1i128..30) {
        let d_k = [-3i128, -4, -7, -11][idx];
        let k = ImagQuadField::new(d_k).unwrap();
        let pic = ring_class_group(&k, c).unwrap();
        prop_assert_eq!(pic.len() as i128, class_number_formula(d_k, c));
        prop_assert_eq!(reduced_forms(d_k * c * c).len(), pic.len());
    }

    #[test]
    fn form_composition_is_a_group_law(a in 0usize..32, b in 0usize..32) {
        let disc = -4 * 5 * 7 * 3;
        let fs = reduced_forms(disc);
        let (f, g) = (fs[a % fs.len()], fs[b % fs.len()]);
        prop_assert_eq!(f.compose(&g).reduce(), g.compose(&f).reduce());
        prop_assert_eq!(f.compose(&f.inverse()).reduce(), Form::principal(disc).reduce());
        prop_assert_eq!(f.compose(&g).disc(), disc);
    }

    #[test]
    fn kronecker_is_multiplicative_in_n(n in 1i128..200, m in 1i128..200) {
        for d in [-3i128, -4, -8, -11, -15] {
            prop_assert_eq!(kronecker(d, n * m), kronecker(d, n) * kronecker(d, m));
        }
    }
}

#[test]
fn hecke_operators_commute_for_small_discriminants() {
    use gross_tower::lattice::order::eichler_order_tower;
    use gross_tower::shimura::{HeckeOp, ShimuraTower};
    for n_minus in [2u64, 3, 7, 11, 13] {
        let alg = algebra_for_discriminant(n_minus, true).unwrap();
        let p = if n_minus == 7 || n_minus == 13 { 5 } else { 7 };
        let st = ShimuraTower::new(eichler_order_tower(&alg, 1, p, 1, 6).unwrap()).unwrap();
        let lv = st.level(1);
        let ops: Vec<HeckeOp> = [2u64, 3, 5, 11, 13]
            .into_iter()
            .filter(|l| n_minus % l != 0 && *l != p)
            .map(HeckeOp::T)
            .chain([HeckeOp::U, HeckeOp::Diamond(2), HeckeOp::Tnn(if n_minus == 3 { 11 } else { 3 })])
            .collect();
        let mats: Vec<_> = ops.iter().map(|o| lv.hecke(*o).unwrap()).collect();
        for a in &mats {
            for b in &mats {
                assert!(a.commutes_with(b), "N- = {n_minus}: {} and {}", a.op.name(), b.op.name());
            }
        }
    }
}
