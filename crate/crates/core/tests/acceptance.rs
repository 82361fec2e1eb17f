//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Oracles live in this file and share no code with the library paths they check.

#![allow(clippy::needless_range_loop, clippy::type_complexity)]

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use num_rational::Ratio;
use serde_json::Value;

use gross_tower::cm::anticyc::anticyclotomic_tower;
use gross_tower::cm::{extended_galois_group, ImagQuadField};
use gross_tower::heegner::action::{act_refined, diamond_relation, heegner_points};
use gross_tower::heegner::verify::{euler_relations, verify_theorem_1_1, RelationReport};
use gross_tower::heegner::{build_family, RefinedPoint};
use gross_tower::lattice::enumerate::short_vectors;
use gross_tower::lattice::order::eichler_order_tower;
use gross_tower::ordinary::theta::theta_translated;
use gross_tower::ordinary::{lp_truncation, ordinary_eigen, ordinary_projector, theta_element};
use gross_tower::quaternion::algebra_for_discriminant;
use gross_tower::shimura::{HeckeOp, ShimuraTower};

type R = Ratio<i128>;

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome { ok, detail: detail.into() }
}

fn tower(n_minus: u64, m_max: u32, precision: u32) -> ShimuraTower {
    let alg = algebra_for_discriminant(n_minus, true).unwrap();
    ShimuraTower::new(eichler_order_tower(&alg, 1, 5, m_max, precision).unwrap()).unwrap()
}

fn primes_of(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while n > 1 {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    out
}

/// (1/12)·∏_{q | D}(q - 1) for a maximal order.
fn mass_oracle(disc: u64) -> R {
    primes_of(disc).iter().fold(R::new(1, 12), |acc, q| acc * R::from_integer(*q as i128 - 1))
}

/// Kronecker symbol (d / q) for q prime, d a fundamental discriminant.
fn kron(d: i128, q: i128) -> i128 {
    if q == 2 {
        return match d.rem_euclid(8) {
            1 | 7 => 1,
            3 | 5 => -1,
            _ => 0,
        };
    }
    let r = d.rem_euclid(q);
    if r == 0 {
        return 0;
    }
    let mut acc = 1i128;
    let mut b = r;
    let mut e = (q - 1) / 2;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % q;
        }
        b = b * b % q;
        e >>= 1;
    }
    if acc == 1 {
        1
    } else {
        -1
    }
}

/// Eichler's class number of the maximal order of discriminant q (prime).
fn class_number_oracle(q: i128) -> R {
    R::new(q - 1, 12) + R::new(1 - kron(-4, q), 4) + R::new(1 - kron(-3, q), 3)
}

/// a_ℓ = ℓ + 1 - #E(F_ℓ) for the conductor-11 curve y² + y = x³ - x² - 10x - 20.
fn curve_11a(ell: i128) -> i128 {
    let mut count = 1;
    for x in 0..ell {
        for y in 0..ell {
            if (y * y + y - (x * x * x - x * x - 10 * x - 20)).rem_euclid(ell) == 0 {
                count += 1;
            }
        }
    }
    ell + 1 - count
}

fn mat_mul(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = a.len();
    let k = b.len();
    let m = if k == 0 { 0 } else { b[0].len() };
    (0..n).map(|i| (0..m).map(|j| (0..k).map(|t| a[i][t] * b[t][j]).sum()).collect()).collect()
}

fn mat_mul_mod(a: &[Vec<i128>], b: &[Vec<i128>], md: i128) -> Vec<Vec<i128>> {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| (0..n).fold(0i128, |s, t| (s + a[i][t] * b[t][j]) % md)).collect()).collect()
}

fn rank_mod(a: &[Vec<i128>], p: i128) -> usize {
    let mut m: Vec<Vec<i128>> = a.iter().map(|r| r.iter().map(|x| x.rem_euclid(p)).collect()).collect();
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let mut r = 0;
    for c in 0..cols {
        let Some(i) = (r..rows).find(|&i| m[i][c] != 0) else { continue };
        m.swap(i, r);
        let inv = (1..p).find(|x| x * m[r][c] % p == 1).unwrap();
        for j in 0..cols {
            m[r][j] = m[r][j] * inv % p;
        }
        for i in 0..rows {
            if i != r && m[i][c] != 0 {
                let f = m[i][c];
                for j in 0..cols {
                    m[i][j] = (m[i][j] - f * m[r][j]).rem_euclid(p);
                }
            }
        }
        r += 1;
    }
    r
}

/// v·A with A[target][source], mod md.
fn row_times(v: &[i128], a: &[Vec<i64>], md: i128) -> Vec<i128> {
    let n = a.len();
    (0..n).map(|j| (0..n).fold(0i128, |s, i| (s + v[i] * (a[i][j] as i128).rem_euclid(md)) % md)).collect()
}

/// θ·θ^* in Z/md[Z/n], by direct convolution.
fn l_of(theta: &[i128], md: i128) -> Vec<i128> {
    let n = theta.len();
    (0..n).map(|k| (0..n).fold(0i128, |s, i| (s + theta[i] * theta[(i + n - k) % n]) % md)).collect()
}

// 1
fn class_sets() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for (disc, want) in [(2u64, 1usize), (11, 2)] {
        let t = Instant::now();
        let st = tower(disc, 0, 8);
        let lv = st.level(0);
        let h = lv.classes.len();
        let mass: R = lv.classes.unit_groups.iter().fold(R::from_integer(0), |acc, g| acc + R::new(2, g.len() as i128));
        let oracle = mass_oracle(disc);
        let h_formula = class_number_oracle(disc as i128);
        let dt = t.elapsed();
        let good = h == want && mass == oracle && h_formula == R::from_integer(h as i128) && dt < Duration::from_secs(5);
        ok &= good;
        parts.push(format!("disc {disc}: h={h} mass={mass} oracle={oracle} eichler h={h_formula} ({:.2}s)", dt.as_secs_f64()));
    }
    outcome(ok, parts.join("; "))
}

// 2
fn hecke_disc_11() -> Outcome {
    let t = Instant::now();
    let st = tower(11, 0, 8);
    let lv = st.level(0);
    let t2 = lv.hecke(HeckeOp::T(2)).unwrap().matrix;
    // Brandt matrix from theta series: B[i][j] = #{x ∈ I_i^{-1} I_j : nrd x = 2 nrd(I_i^{-1} I_j)} / |Γ_j|
    let cs = &lv.classes;
    let h = cs.len();
    let mut b = vec![vec![0i128; h]; h];
    let mut units_ok = true;
    for i in 0..h {
        for j in 0..h {
            let l = cs.ideals[i].inverse().product(&cs.ideals[j]);
            let n = l.nrd();
            let g = l.gram();
            let count = short_vectors(&g, n * R::from_integer(2), true).len() as i128;
            let gj = cs.unit_groups[j].len() as i128;
            units_ok &= short_vectors(&cs.right_orders[j].gram(), R::from_integer(1), true).len() as i128 == gj;
            b[i][j] = count / gj;
            units_ok &= count % gj == 0;
        }
    }
    let tr = |m: &dyn Fn(usize, usize) -> i128| (0..h).map(|i| m(i, i)).sum::<i128>();
    let det = |m: &dyn Fn(usize, usize) -> i128| m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    let lib = |i: usize, j: usize| t2[i][j] as i128;
    let ora = |i: usize, j: usize| b[i][j];
    let (lt, ld, ot, od) = (tr(&lib), det(&lib), tr(&ora), det(&ora));
    // eigenvalues of x² - t x + d
    let roots = |t: i128, d: i128| -> BTreeSet<i128> { (-10..=10).filter(|x| x * x - t * x + d == 0).collect() };
    let want: BTreeSet<i128> = [3, -2].into_iter().collect();
    let a2 = curve_11a(2);
    let dt = t.elapsed();
    let ok = h == 2 && units_ok && roots(lt, ld) == want && roots(ot, od) == want && (lt, ld) == (ot, od) && roots(ot, od).contains(&a2) && dt < Duration::from_secs(10);
    outcome(ok, format!("T_2 charpoly x²-{lt}x+({ld}), theta-series x²-{ot}x+({od}), eigenvalues {:?}, a_2(11a)={a2} ({:.2}s)", roots(lt, ld), dt.as_secs_f64()))
}

// 3
fn commuting_family() -> Outcome {
    let t = Instant::now();
    let st = tower(2, 2, 8);
    let mut ok = true;
    let mut parts = Vec::new();
    for m in 0..=2u32 {
        let lv = st.level(m);
        let pm = 5i128.pow(m);
        let mut ops = Vec::new();
        for ell in [3u64, 7, 11, 13] {
            ops.push((HeckeOp::T(ell), ell as i64 + 1));
        }
        if m >= 1 {
            ops.push((HeckeOp::U, 5));
            for d in (1..pm).filter(|d| d % 5 != 0) {
                ops.push((HeckeOp::Diamond(d), 1));
            }
        }
        let mats: Vec<Vec<Vec<i64>>> = ops.iter().map(|(o, _)| lv.hecke(*o).unwrap().matrix).collect();
        let n = lv.len();
        let mut sums_ok = true;
        for ((_, want), a) in ops.iter().zip(&mats) {
            sums_ok &= (0..n).all(|j| (0..n).map(|i| a[i][j]).sum::<i64>() == *want);
        }
        let mut pairs = 0;
        let mut comm_ok = true;
        for i in 0..mats.len() {
            for j in i + 1..mats.len() {
                comm_ok &= mat_mul(&mats[i], &mats[j]) == mat_mul(&mats[j], &mats[i]);
                pairs += 1;
            }
        }
        ok &= sums_ok && comm_ok;
        parts.push(format!("m={m}: dim {n}, {} ops, {pairs} pairs commute={comm_ok}, column sums={sums_ok}", ops.len()));
    }
    let dt = t.elapsed();
    ok &= dt < Duration::from_secs(60);
    outcome(ok, format!("{} ({:.2}s)", parts.join("; "), dt.as_secs_f64()))
}

fn desk() -> (ShimuraTower, ImagQuadField, gross_tower::heegner::HeegnerFamily) {
    let st = tower(2, 2, 8);
    let k = ImagQuadField::new(-11).unwrap();
    let fam = build_family(&st, &k, 1, 2, 1, &[7]).unwrap();
    (st, k, fam)
}

fn all_hold(r: &RelationReport, names: &[&str]) -> (bool, String) {
    let mut ok = r.holds;
    let mut parts = Vec::new();
    for n in names {
        match r.check(n) {
            Some(c) => {
                let good = c.holds && c.skipped.is_none();
                ok &= good;
                parts.push(format!("{n}(m={}, conductor {}, degree {}, M={})={}", c.level, c.conductor, c.degree, c.precision, good));
            }
            None => {
                ok = false;
                parts.push(format!("{n} missing"));
            }
        }
    }
    (ok, parts.join(", "))
}

// 4
fn compatibilities() -> Outcome {
    let t = Instant::now();
    let (st, _, fam) = desk();
    let r = verify_theorem_1_1(&st, &fam, 7, 2, 1, 1).unwrap();
    let (ok, d) = all_hold(&r, &["vertical", "horizontal_up", "T_7"]);
    let dt = t.elapsed();
    outcome(ok && dt < Duration::from_secs(300), format!("{d} ({:.2}s)", dt.as_secs_f64()))
}

// 5
fn galois_diamond() -> Outcome {
    let t = Instant::now();
    let (st, k, fam) = desk();
    let avoid = 2 * 7;
    let pt = fam.point(1, 1).unwrap();
    let lv = st.level(1);
    let g = extended_galois_group(&k, pt.conductor, 5, 1, avoid).unwrap();
    let dia = diamond_relation(&g, &k, lv, &pt.cm).unwrap();
    let dia_ok = !dia.is_empty() && dia.len() == g.cyc.len() && dia.iter().all(|d| d.ok && d.action == d.diamond);
    // exhaustive freeness over every conductor-5 point
    let pts = heegner_points(lv, &k, pt.conductor, avoid).unwrap();
    let elts = g.elements();
    let id = g.identity();
    let mut free = true;
    let mut closed = true;
    for p in &pts {
        for s in &elts {
            let q: RefinedPoint = act_refined(&g, s, &k, lv, pt.conductor, p).unwrap();
            closed &= pts.contains(&q);
            free &= (q == *p) == (*s == id);
        }
    }
    let dt = t.elapsed();
    let ok = g.order() == 8 && dia_ok && free && closed && !pts.is_empty() && dt < Duration::from_secs(60);
    outcome(ok, format!("group order {}, {} diamond checks ok={dia_ok}, {} points, free={free}, closed={closed} ({:.2}s)", g.order(), dia.len(), pts.len(), dt.as_secs_f64()))
}

// 6
fn euler_system() -> Outcome {
    let t = Instant::now();
    let (st, _, fam) = desk();
    let r = euler_relations(&st, &fam, Some(7), 2, 1).unwrap();
    let (ok, d) = all_hold(&r, &["tower", "up_point", "up_cores", "T_7_cores"]);
    let dt = t.elapsed();
    outcome(ok && dt < Duration::from_secs(300), format!("{d} ({:.2}s)", dt.as_secs_f64()))
}

// 7
fn ordinary_theta() -> Outcome {
    let t = Instant::now();
    let p = 5i128;
    let md = p.pow(8);
    let st = tower(11, 1, 8);
    let k = ImagQuadField::new(-3).unwrap();
    let lv = st.level(1);
    let u = lv.hecke(HeckeOp::U).unwrap();
    let n = u.dim();
    let ord = ordinary_projector(&u, 5, 8).unwrap();
    let e: Vec<Vec<i128>> = (0..n).map(|i| (0..n).map(|j| ord.e.get(i, j)).collect()).collect();
    let idem = mat_mul_mod(&e, &e, md) == e;
    // unit-root count with multiplicity = rank of U^n mod p
    let u5: Vec<Vec<i128>> = u.matrix.iter().map(|r| r.iter().map(|x| (*x as i128).rem_euclid(p)).collect()).collect();
    let mut pw = u5.clone();
    for _ in 1..n {
        pw = mat_mul_mod(&pw, &u5, p);
    }
    let unit_roots = rank_mod(&pw, p);
    let e_rank = rank_mod(&e, p);
    let proj_ok = idem && e_rank == unit_roots && ord.ordinary_rank == e_rank && ord.unit_root_count == unit_roots;

    let (a2, a5) = (curve_11a(2), curve_11a(5));
    let eig = ordinary_eigen(lv, &ord, &[(2, a2 as i64), (5, a5 as i64)]).unwrap();
    let alpha = eig.alpha_p;
    let hensel = (alpha * alpha % md - a5 * alpha + p).rem_euclid(md) == 0 && alpha % p != 0;
    let t2 = lv.hecke(HeckeOp::T(2)).unwrap().matrix;
    let scaled = |c: i128| eig.v.iter().map(|x| x * c.rem_euclid(md) % md).collect::<Vec<_>>();
    let eig_ok = a2 == -2 && a5 == 1 && row_times(&eig.v, &t2, md) == scaled(a2) && row_times(&eig.v, &u.matrix, md) == scaled(alpha) && eig.v.iter().any(|x| x % p != 0);

    let fam = build_family(&st, &k, 1, 1, 2, &[]).unwrap();
    let layers = anticyclotomic_tower(&k, 5, 1).unwrap();
    let th0 = theta_element(&st, &fam, &layers[0], &eig).unwrap();
    let th1 = theta_element(&st, &fam, &layers[1], &eig).unwrap();
    let c0 = &th0.element.coeffs;
    let c1 = &th1.element.coeffs;
    let nu = c1.iter().fold(0i128, |s, x| (s + x) % md);
    let compat = c0.len() == 1 && c1.len() == 5 && nu == c0[0] && c0[0] % p != 0;
    let l1 = l_of(c1, md);
    let star = (0..5).all(|k| l1[k] == l1[(5 - k) % 5]);
    let lib_l = lp_truncation(&th1).coeffs;
    let mut tau_ok = true;
    for tau in 1..5u64 {
        let moved = theta_translated(&st, &fam, &layers[1], &eig, tau).unwrap();
        let shifted: Vec<i128> = (0..5).map(|i| c1[(i + 5 - tau as usize) % 5]).collect();
        tau_ok &= moved.coeffs == shifted && l_of(&moved.coeffs, md) == l1;
    }
    let dt = t.elapsed();
    let ok = proj_ok && hensel && eig_ok && compat && star && lib_l == l1 && tau_ok && dt < Duration::from_secs(300);
    outcome(
        ok,
        format!(
            "dim {n}, e²=e {idem}, rank(e) {e_rank}, unit roots {unit_roots}; a_2={a2} a_5={a5} α={alpha} (M=8) ok={}; θ_0={c0:?} θ_1={c1:?} ν ok={compat}; L_1={l1:?} *-invariant={star}, τ-invariant={tau_ok} ({:.2}s)",
            hensel && eig_ok,
            dt.as_secs_f64()
        ),
    )
}

fn run_cli(args: &[&str]) -> (Vec<u8>, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_gross-tower")).args(args).env_remove("GROSS_TOWER_PRECISION").output().unwrap();
    (out.stdout, out.status.code().unwrap_or(-1))
}

const VERDICTS: [&str; 8] = ["holds", "ok", "pass", "certified", "mass_ok", "column_sums_ok", "idempotent", "section_independent"];

/// Paths of verdict-carrying objects with no "precision" on themselves or a non-root ancestor.
fn unnamed_precision(v: &Value, path: &str, named: bool, bad: &mut Vec<String>) {
    match v {
        Value::Object(o) => {
            let here = named || (!path.is_empty() && o.contains_key("precision"));
            if !path.is_empty() && !here && VERDICTS.iter().any(|k| o.contains_key(*k)) {
                bad.push(path.to_string());
            }
            for (k, x) in o {
                unnamed_precision(x, &format!("{path}/{k}"), here, bad);
            }
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                unnamed_precision(x, &format!("{path}[{i}]"), named, bad);
            }
        }
        _ => {}
    }
}

// 8
fn determinism() -> Outcome {
    let runs: [&[&str]; 5] = [
        &["classset", "--nminus", "2", "--mmax", "2"],
        &["hecke", "--nminus", "11", "--mmax", "1", "--op", "T", "--param", "2"],
        &["heegner", "--nminus", "2", "--dk", "-11", "--mmax", "2"],
        &["verify", "--nminus", "2", "--dk", "-11", "--mmax", "2", "--suite", "all"],
        &["theta", "--nminus", "11", "--dk", "-3", "--nmax", "1", "--eigensystem", "2:-2,5:1"],
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for args in runs {
        let (a, ca) = run_cli(args);
        let (b, cb) = run_cli(args);
        let same = a == b && ca == cb && ca == 0;
        let v: Value = serde_json::from_slice(&a).unwrap_or(Value::Null);
        let audit = v["precision"]["requested"].is_u64() && v["precision"]["used"].is_u64();
        let mut bad = Vec::new();
        unnamed_precision(&v, "", false, &mut bad);
        let good = same && audit && bad.is_empty();
        ok &= good;
        parts.push(format!("{}: identical={same} audit={audit} unlabelled={}", args[0], bad.len()));
    }
    outcome(ok, parts.join("; "))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("class sets certified by the mass formula", class_sets),
        ("Hecke spectrum at discriminant 11", hecke_disc_11),
        ("commuting Hecke family with degree column sums", commuting_family),
        ("vertical, horizontal and T_7 compatibility", compatibilities),
        ("Galois action equals diamonds; free action", galois_diamond),
        ("Euler-system relations", euler_system),
        ("ordinary projector, eigensystem and theta elements", ordinary_theta),
        ("determinism and precision labels", determinism),
    ];
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        println!("{} {}: {name} | {}", if o.ok { "PASS" } else { "FAIL" }, i + 1, o.detail);
        if !o.ok {
            failed.push(i + 1);
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
