//! Command layer shared by the CLI binary and the C ABI: configuration, validation and
//! JSON reports.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::{json, Value};

use crate::arith::{self, q_str};
use crate::cm::anticyc::anticyclotomic_tower;
use crate::cm::galois::extended_galois_group;
use crate::cm::{check_heegner_hypothesis, ImagQuadField};
use crate::error::{invalid, Error, Result};
use crate::heegner::action::{diamond_relation, freeness};
use crate::heegner::verify::{consistency_chain, degree_checks, euler_relations, verify_theorem_1_1};
use crate::heegner::{build_family, HeegnerFamily};
use crate::lattice::mass::eichler_mass;
use crate::lattice::order::eichler_order_tower;
use crate::ordinary::eigen::primitive_root;
use crate::ordinary::linalg::{charpoly_int, integer_roots, spectral_bound};
use crate::ordinary::theta::{compatibility, j_element};
use crate::ordinary::{lp_truncation, ordinary_eigen_auto, ordinary_projector, theta_element, EigenData};
use crate::quaternion::algebra_for_discriminant;
use crate::shimura::hecke::{HeckeMatrix, HeckeOp};
use crate::shimura::ShimuraTower;

pub const SCHEMA: &str = "gross-tower/1";
pub const DEFAULT_PRECISION: u32 = 8;
pub const PRECISION_ENV: &str = "GROSS_TOWER_PRECISION";

#[derive(Serialize, Clone, Debug, PartialEq, Eq)]
pub struct InstanceConfig {
    pub n_minus: u64,
    pub n_plus: u64,
    pub p: u64,
    pub m_max: u32,
    pub d_k: Option<i128>,
    pub c: i128,
    pub precision: u32,
}

impl Default for InstanceConfig {
    fn default() -> Self {
        InstanceConfig { n_minus: 2, n_plus: 1, p: 5, m_max: 1, d_k: None, c: 1, precision: DEFAULT_PRECISION }
    }
}

/// Precision from the environment, else the default.
pub fn default_precision() -> Result<u32> {
    match std::env::var(PRECISION_ENV) {
        Ok(s) => s.trim().parse().map_err(|_| Error::Invalid(format!("{PRECISION_ENV}={s} is not a positive integer"))),
        Err(_) => Ok(DEFAULT_PRECISION),
    }
}

impl InstanceConfig {
    pub fn n(&self) -> u64 {
        self.n_minus * self.n_plus
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_minus < 2 || !arith::is_squarefree(self.n_minus) {
            return invalid(format!("N- = {} must be squarefree and > 1", self.n_minus));
        }
        if arith::prime_divisors(self.n_minus).len().is_multiple_of(2) {
            return invalid(format!("N- = {} has an even number of prime factors (even parity)", self.n_minus));
        }
        if self.n_plus < 1 || arith::gcd(self.n_plus as i128, self.n_minus as i128) != 1 {
            return invalid("N+ must be positive and prime to N-");
        }
        if !arith::is_prime(self.p) || (6 * self.n()).is_multiple_of(self.p) {
            return invalid(format!("p = {} must be a prime not dividing 6N", self.p));
        }
        if self.precision < self.m_max.max(1) || self.precision > 40 {
            return invalid(format!("precision {} must lie in [max(m_max, 1), 40]", self.precision));
        }
        if self.c < 1 {
            return invalid("c must be positive");
        }
        if let Some(dk) = self.d_k {
            let k = ImagQuadField::new(dk)?;
            let np = (self.n() * self.p) as i128;
            if arith::gcd(dk, np) != 1 {
                return invalid(format!("gcd(D_K, Np) = gcd({dk}, {np}) != 1"));
            }
            if arith::gcd(self.c, np * dk) != 1 {
                return invalid(format!("c = {} must be prime to N·p·D_K", self.c));
            }
            let h = check_heegner_hypothesis(self.n_plus, self.n_minus, &k, self.p)?;
            if !h.holds {
                return invalid(format!("Heegner hypothesis fails for D_K = {dk}: {:?}", h.primes));
            }
        }
        Ok(())
    }

    pub fn field(&self) -> Result<ImagQuadField> {
        match self.d_k {
            Some(dk) => ImagQuadField::new(dk),
            None => invalid("this command needs --dk"),
        }
    }

    pub fn tower(&self, m_max: u32, precision: u32) -> Result<ShimuraTower> {
        let alg = algebra_for_discriminant(self.n_minus, true)?;
        let tw = eichler_order_tower(&alg, self.n_plus, self.p, m_max, precision)?;
        ShimuraTower::new(tw)
    }

    /// Least odd prime inert in K and prime to N·p·c.
    pub fn default_ell(&self, k: &ImagQuadField) -> u64 {
        let bad = self.n() as i128 * self.p as i128 * self.c;
        let mut l = 3u64;
        loop {
            if k.kronecker(l) == -1 && bad % l as i128 != 0 {
                return l;
            }
            l = arith::next_prime(l);
        }
    }
}

#[derive(Serialize, Clone, Debug)]
pub struct PrecisionAudit {
    pub requested: u32,
    pub used: u32,
    pub toggles: BTreeMap<String, String>,
}

fn toggles() -> BTreeMap<String, String> {
    [
        ("fiber_coordinate", "inverse a-coordinate of the p-unit"),
        ("corestriction_lifts", "standard: eps_cyc in {1, teichmuller(least non-residue)}"),
        ("theta_d0", "1"),
        ("eta", "ordinary eigen functional, trivial diamond character"),
        ("rationals", "num/den strings"),
    ]
    .into_iter()
    .map(|(a, b)| (a.to_string(), b.to_string()))
    .collect()
}

#[derive(Serialize, Clone, Debug)]
pub struct JsonReport {
    pub schema: &'static str,
    pub command: String,
    pub args: BTreeMap<String, String>,
    pub instance: InstanceConfig,
    pub ok: bool,
    pub results: Value,
    pub precision: PrecisionAudit,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<Value>,
}

impl JsonReport {
    fn new(command: &str, args: BTreeMap<String, String>, cfg: &InstanceConfig, used: u32, ok: bool, results: Value) -> Self {
        JsonReport {
            schema: SCHEMA,
            command: command.into(),
            args,
            instance: cfg.clone(),
            ok,
            results,
            precision: PrecisionAudit { requested: cfg.precision, used, toggles: toggles() },
            timing: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Error report with the exit code it maps to.
pub fn error_json(command: &str, e: &Error) -> String {
    let kind = match e {
        Error::Invalid(_) => "invalid",
        Error::Nonexistent(_) => "nonexistent",
        Error::Internal(_) => "internal",
    };
    let v = json!({ "schema": SCHEMA, "command": command, "ok": false, "error": { "kind": kind, "exit_code": e.exit_code(), "message": e.to_string() } });
    serde_json::to_string_pretty(&v).unwrap()
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

pub fn cmd_classset(cfg: &InstanceConfig) -> Result<JsonReport> {
    cfg.validate()?;
    let st = cfg.tower(cfg.m_max, cfg.precision)?;
    let mut levels = Vec::new();
    let mut ok = true;
    for m in 0..=cfg.m_max {
        let lv = st.level(m);
        let s = lv.summary();
        let level = cfg.n_plus * cfg.p.pow(m);
        let oracle = eichler_mass(cfg.n_minus, level);
        let computed = lv.classes.mass();
        ok &= oracle == computed;
        levels.push(json!({
            "m": m,
            "h": s.h,
            "h_tilde": s.h_tilde,
            "mass": q_str(&computed),
            "mass_formula": q_str(&oracle),
            "mass_ok": oracle == computed,
            "precision": "exact",
            "unit_group_orders": s.unit_group_orders,
            "fiber_sizes": s.fiber_sizes,
            "neighbor_prime": s.neighbor_prime,
        }));
    }
    Ok(JsonReport::new("classset", BTreeMap::new(), cfg, cfg.precision, ok, json!({ "levels": levels })))
}

/// Integer roots of the characteristic polynomial, with multiplicity, and the polynomial.
pub fn integer_spectrum(t: &HeckeMatrix) -> (Vec<i64>, Vec<String>) {
    let cp = charpoly_int(&t.matrix);
    (integer_roots(&cp, spectral_bound(&t.matrix)), cp.iter().map(|c| format!("{c}/1")).collect())
}

pub fn parse_op(op: &str, param: Option<i128>) -> Result<HeckeOp> {
    match (op.to_ascii_lowercase().as_str(), param) {
        ("t", Some(l)) if l > 1 => Ok(HeckeOp::T(l as u64)),
        ("u", _) => Ok(HeckeOp::U),
        ("diamond", Some(d)) => Ok(HeckeOp::Diamond(d)),
        ("tnn", Some(n)) if n > 0 => Ok(HeckeOp::Tnn(n as u64)),
        _ => invalid(format!("unknown operator {op} (T <l>, U, diamond <d>, Tnn <n>)")),
    }
}

/// T_ℓ (ℓ ≤ 13 prime to Np), U_p and a generating diamond at level m.
pub fn cached_operators(st: &ShimuraTower, m: u32) -> Result<Vec<HeckeMatrix>> {
    let lv = st.level(m);
    let n = st.tower.n() * st.tower.p;
    let mut ops = Vec::new();
    for l in [2u64, 3, 5, 7, 11, 13] {
        if !n.is_multiple_of(l) {
            ops.push(lv.hecke(HeckeOp::T(l))?);
        }
    }
    if m >= 1 {
        ops.push(lv.hecke(HeckeOp::U)?);
        ops.push(lv.hecke(HeckeOp::Diamond(primitive_root(lv.p, m)))?);
    }
    Ok(ops)
}

pub fn cmd_hecke(cfg: &InstanceConfig, op: HeckeOp) -> Result<JsonReport> {
    cfg.validate()?;
    let st = cfg.tower(cfg.m_max, cfg.precision)?;
    let m = cfg.m_max;
    let lv = st.level(m);
    let t = lv.hecke(op)?;
    let sums = t.column_sums();
    let expected: Option<i64> = match op {
        HeckeOp::T(l) => Some(l as i64 + 1),
        HeckeOp::U => Some(cfg.p as i64),
        HeckeOp::Diamond(_) | HeckeOp::Tnn(_) => Some(1),
    };
    let sums_ok = expected.map(|e| sums.iter().all(|s| *s == e)).unwrap_or(true);
    let mut comm = Vec::new();
    for o in cached_operators(&st, m)? {
        comm.push(json!({ "with": o.op.name(), "commutes": t.commutes_with(&o) }));
    }
    let comm_ok = comm.iter().all(|c| c["commutes"] == json!(true));
    let (eig, cp) = integer_spectrum(&t);
    let mut distinct = eig.clone();
    distinct.dedup();
    let results = json!({
        "op": op.name(),
        "level": m,
        "dim": t.dim(),
        "matrix": t.matrix,
        "column_sums": sums,
        "column_sum_expected": expected,
        "column_sums_ok": sums_ok,
        "commutativity": comm,
        "charpoly": cp,
        "integer_eigenvalues": eig,
        "eigenvalues": distinct,
        "precision": "exact",
    });
    let mut args = BTreeMap::new();
    args.insert("op".into(), op.name());
    Ok(JsonReport::new("hecke", args, cfg, cfg.precision, sums_ok && comm_ok, results))
}

fn heegner_precision(cfg: &InstanceConfig, m_max: u32, r_max: u32) -> u32 {
    cfg.precision.max((2 * m_max + r_max).max(m_max + r_max + 1))
}

fn family(cfg: &InstanceConfig, m_max: u32, r_max: u32, ells: &[u64]) -> Result<(ShimuraTower, ImagQuadField, HeegnerFamily, u32)> {
    cfg.validate()?;
    let k = cfg.field()?;
    let used = heegner_precision(cfg, m_max, r_max);
    let st = cfg.tower(cfg.m_max.max(m_max), used)?;
    let fam = build_family(&st, &k, cfg.c, m_max, r_max, ells)?;
    Ok((st, k, fam, used))
}

pub fn cmd_heegner(cfg: &InstanceConfig, r_max: u32, ells: &[u64]) -> Result<JsonReport> {
    let (st, _k, fam, used) = family(cfg, cfg.m_max, r_max, ells)?;
    let summary = fam.summary();
    let chain = consistency_chain(&st, &fam);
    let degrees = degree_checks(&st, &fam)?;
    let certified = summary.points.iter().all(|p| p.def31.holds && p.def31.optimal.certified);
    let ok = certified && chain.iter().all(|c| c.holds) && degrees.iter().all(|d| d.holds);
    let mut args = BTreeMap::new();
    args.insert("rmax".into(), r_max.to_string());
    args.insert("ells".into(), format!("{ells:?}"));
    let results = json!({
        "family": to_value(&summary),
        "certificates": summary.points.iter().map(|p| json!({
            "base_conductor": p.base_conductor, "m": p.m, "optimal": p.def31.optimal.certified,
            "p_local": p.def31.p_local, "precision": p.def31.precision,
        })).collect::<Vec<_>>(),
        "consistency_chain": to_value(&chain),
        "degree_checks": to_value(&degrees),
        "precision": used,
    });
    Ok(JsonReport::new("heegner", args, cfg, used, ok, results))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Tower,
    Euler,
    Galois,
}

pub fn parse_suites(s: &str) -> Result<Vec<Suite>> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|x| !x.is_empty() && *x != "none") {
        match part {
            "tower" => out.push(Suite::Tower),
            "euler" => out.push(Suite::Euler),
            "galois" => out.push(Suite::Galois),
            "all" => out.extend([Suite::Tower, Suite::Euler, Suite::Galois]),
            _ => return invalid(format!("unknown suite {part}")),
        }
    }
    out.dedup();
    Ok(out)
}

pub fn cmd_verify(cfg: &InstanceConfig, suites: &[Suite], ell: Option<u64>) -> Result<JsonReport> {
    let mut args = BTreeMap::new();
    args.insert("suite".into(), format!("{suites:?}"));
    if suites.is_empty() {
        cfg.validate()?;
        return Ok(JsonReport::new("verify", args, cfg, cfg.precision, true, json!({ "suites": {}, "vacuous": true })));
    }
    cfg.validate()?;
    let k = cfg.field()?;
    let ell = ell.unwrap_or_else(|| cfg.default_ell(&k));
    args.insert("ell".into(), ell.to_string());
    let m_max = cfg.m_max.max(1);
    let (st, k, fam, used) = family(cfg, m_max, 1, &[ell])?;
    let mut out = serde_json::Map::new();
    let mut ok = true;
    for s in suites {
        match s {
            Suite::Tower => {
                let r = verify_theorem_1_1(&st, &fam, ell, m_max, 1, 1)?;
                ok &= r.holds;
                out.insert("tower".into(), to_value(&r));
            }
            Suite::Euler => {
                let r = euler_relations(&st, &fam, Some(ell), m_max, 1)?;
                ok &= r.holds;
                out.insert("euler".into(), to_value(&r));
            }
            Suite::Galois => {
                let avoid = st.tower.n() * ell;
                let pt = fam.point(cfg.c, 1)?;
                let lv = st.level(1);
                let g = extended_galois_group(&k, pt.conductor, cfg.p, 1, avoid)?;
                let dia = diamond_relation(&g, &k, lv, &pt.cm)?;
                let free = freeness(&g, &k, lv, &pt.cm, avoid)?;
                let holds = dia.iter().all(|d| d.ok) && free.holds;
                ok &= holds;
                out.insert("galois".into(), json!({ "precision": used, "diamond": to_value(&dia), "freeness": to_value(&free), "holds": holds }));
            }
        }
    }
    Ok(JsonReport::new("verify", args, cfg, used, ok, Value::Object(out)))
}

/// "2:-2,5:1" → [(2, -2), (5, 1)].
pub fn parse_eigensystem(s: &str) -> Result<Vec<(u64, i64)>> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
        let Some((l, a)) = part.split_once(':') else { return invalid(format!("bad eigenvalue spec {part} (want l:a)")) };
        let l: u64 = l.trim().parse().map_err(|_| Error::Invalid(format!("bad prime in {part}")))?;
        let a: i64 = a.trim().parse().map_err(|_| Error::Invalid(format!("bad eigenvalue in {part}")))?;
        if !arith::is_prime(l) {
            return invalid(format!("{l} is not prime"));
        }
        out.push((l, a));
    }
    Ok(out)
}

/// Ordinary eigendata at level 1.
pub fn eigendata(st: &ShimuraTower, p: u64, precision: u32, targets: &[(u64, i64)]) -> Result<(EigenData, Value)> {
    let lv = st.level(1);
    let u = lv.hecke(HeckeOp::U)?;
    let ord = ordinary_projector(&u, p, precision)?;
    let eig = ordinary_eigen_auto(lv, &ord, targets)?;
    let rep = json!({ "projector": to_value(&ord.report(&u)), "eigen": to_value(&eig.report(lv, &ord)?) });
    Ok((eig, rep))
}

/// `r_max` is the Heegner family depth; None builds exactly the depth d(n_max) the layers need.
pub fn cmd_theta(cfg: &InstanceConfig, n_max: u32, targets: &[(u64, i64)], r_max: Option<u32>) -> Result<JsonReport> {
    cfg.validate()?;
    let k = cfg.field()?;
    let layers = anticyclotomic_tower(&k, cfg.p, n_max)?;
    let d_top = layers.last().map(|l| l.d).unwrap_or(1);
    let depth = r_max.unwrap_or(d_top);
    let used = heegner_precision(cfg, 1, depth);
    let st = cfg.tower(1, used)?;
    let fam = build_family(&st, &k, cfg.c, 1, depth, &[])?;
    let (eig, eig_rep) = eigendata(&st, cfg.p, used, targets)?;
    let mut thetas = Vec::new();
    for l in &layers {
        thetas.push(theta_element(&st, &fam, l, &eig)?);
    }
    let compat = compatibility(&thetas);
    let ls: Vec<_> = thetas.iter().map(lp_truncation).collect();
    let star_ok: Vec<bool> = ls.iter().map(|l| l.star() == *l).collect();
    let l_compat: Vec<bool> = ls.windows(2).map(|w| w[1].project(w[0].order) == w[0]).collect();
    let tau_ok: Vec<bool> = thetas
        .iter()
        .zip(&ls)
        .map(|(t, l)| (0..t.element.order).all(|tau| {
            let s = t.element.translate(tau);
            s.mul(&s.star()) == *l
        }))
        .collect();
    // unit rescaling v ↦ 2v scales θ_n by 2 and L_n by 4
    let md = eig.modulus;
    let e2 = EigenData { v: eig.v.iter().map(|x| arith::mod_mul(*x, 2, md)).collect(), ..eig.clone() };
    let rescale_ok = match layers.first() {
        Some(l) => theta_element(&st, &fam, l, &e2)?.element == thetas[0].element.scale(2),
        None => true,
    };
    let j = j_element(&st, &fam, &eig)?;
    let ok = compat.iter().all(|x| *x)
        && star_ok.iter().all(|x| *x)
        && l_compat.iter().all(|x| *x)
        && tau_ok.iter().all(|x| *x)
        && thetas.iter().all(|t| t.section_independent && t.matches_direct_sum)
        && rescale_ok;
    let mut args = BTreeMap::new();
    args.insert("nmax".into(), n_max.to_string());
    args.insert("rmax".into(), depth.to_string());
    args.insert("eigensystem".into(), targets.iter().map(|(l, a)| format!("{l}:{a}")).collect::<Vec<_>>().join(","));
    let results = json!({
        "layers": layers.iter().map(|l| to_value(&l.summary())).collect::<Vec<_>>(),
        "ordinary": eig_rep,
        "theta": to_value(&thetas),
        "compatibility": compat,
        "L": to_value(&ls),
        "L_star_invariant": star_ok,
        "L_compatibility": l_compat,
        "L_translation_invariant": tau_ok,
        "rescaling_audit": rescale_ok,
        "j_element": j,
        "modulus": md.to_string(),
    });
    Ok(JsonReport::new("theta", args, cfg, used, ok, results))
}

/// Smoke tests of directly checkable properties on the two small instances.
pub fn cmd_selftest() -> Result<JsonReport> {
    let cfg = InstanceConfig { n_minus: 2, n_plus: 1, p: 5, m_max: 1, d_k: Some(-11), c: 1, precision: DEFAULT_PRECISION };
    let st = cfg.tower(1, cfg.precision)?;
    let mut checks: Vec<(String, bool)> = Vec::new();
    let lv = st.level(1);
    let id = lv.hecke(HeckeOp::Diamond(1))?;
    checks.push(("diamond_one_is_identity".into(), (0..id.dim()).all(|i| (0..id.dim()).all(|j| id.matrix[i][j] == (i == j) as i64))));
    for o in cached_operators(&st, 1)? {
        let want = match o.op {
            HeckeOp::T(l) => l as i64 + 1,
            HeckeOp::U => 5,
            _ => 1,
        };
        checks.push((format!("column_sums_{}", o.op.name()), o.column_sums().iter().all(|s| *s == want)));
    }
    let empty = cmd_verify(&cfg, &[], None)?;
    checks.push(("empty_suite_is_vacuous".into(), empty.ok));
    let bad = InstanceConfig { n_minus: 15, ..cfg.clone() };
    checks.push(("even_parity_rejected".into(), bad.validate().map_err(|e| e.exit_code()) == Err(2)));
    let bad_c = InstanceConfig { c: 11, ..cfg.clone() };
    checks.push(("c_sharing_d_k_rejected".into(), bad_c.validate().is_err()));
    let ok = checks.iter().all(|c| c.1);
    let results = json!({ "precision": "exact", "checks": checks.iter().map(|(n, b)| json!({ "name": n, "pass": b })).collect::<Vec<_>>() });
    Ok(JsonReport::new("selftest", BTreeMap::new(), &cfg, cfg.precision, ok, results))
}
