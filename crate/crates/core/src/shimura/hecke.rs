//! Hecke, diamond and T(n,n) operators on Z[X̃_m] as integer matrices (columns are sources).

use serde::Serialize;

use crate::arith::{self, q};
use crate::error::{invalid, Result};
use crate::lattice::classes::neighbors;
use crate::shimura::{add_point, beta_into, reduce_beta, AdelicPoint, Divisor, ShimuraLevel, TildePoint};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "op", content = "param")]
pub enum HeckeOp {
    T(u64),
    U,
    Diamond(i128),
    /// T(n,n) computed from the scalar idele at n, independently of the diamond formula.
    Tnn(u64),
}

impl HeckeOp {
    pub fn name(&self) -> String {
        match self {
            HeckeOp::T(l) => format!("T_{l}"),
            HeckeOp::U => "U_p".into(),
            HeckeOp::Diamond(d) => format!("<{d}>"),
            HeckeOp::Tnn(n) => format!("T({n},{n})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HeckeMatrix {
    pub op: HeckeOp,
    pub level: u32,
    /// matrix[target][source]
    pub matrix: Vec<Vec<i64>>,
}

impl HeckeMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.len()
    }

    pub fn column_sums(&self) -> Vec<i64> {
        let n = self.dim();
        (0..n).map(|c| (0..n).map(|r| self.matrix[r][c]).sum()).collect()
    }

    pub fn mul(&self, o: &HeckeMatrix) -> Vec<Vec<i64>> {
        mat_mul(&self.matrix, &o.matrix)
    }

    pub fn commutes_with(&self, o: &HeckeMatrix) -> bool {
        self.mul(o) == o.mul(self)
    }

    pub fn apply_vec(&self, v: &[i64]) -> Vec<i64> {
        self.matrix.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }
}

pub fn mat_mul(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = a.len();
    let k = b.len();
    let m = if k == 0 { 0 } else { b[0].len() };
    let mut r = vec![vec![0i64; m]; n];
    for i in 0..n {
        for l in 0..k {
            if a[i][l] == 0 {
                continue;
            }
            for j in 0..m {
                r[i][j] += a[i][l] * b[l][j];
            }
        }
    }
    r
}

impl ShimuraLevel {
    fn check_op(&self, op: &HeckeOp) -> Result<()> {
        let n = (self.classes.n_minus * self.classes.level) as i128 * self.p;
        match op {
            HeckeOp::T(l) | HeckeOp::Tnn(l) => {
                if !arith::is_prime(*l) || n % (*l as i128) == 0 {
                    return invalid(format!("T_{l} needs a prime not dividing N p^m"));
                }
            }
            HeckeOp::U => {
                if self.m == 0 {
                    return invalid("U_p needs m >= 1");
                }
            }
            HeckeOp::Diamond(d) => {
                if arith::gcd(*d, self.p) != 1 {
                    return invalid(format!("<{d}> needs gcd(d, p) = 1"));
                }
            }
        }
        Ok(())
    }

    /// Images of one adelic point under the coset decomposition of `op`.
    pub fn apply_adelic(&self, op: &HeckeOp, pt: &AdelicPoint) -> Result<Vec<AdelicPoint>> {
        self.check_op(op)?;
        let n = self.modulus();
        match op {
            HeckeOp::T(l) => neighbors(&self.order, &pt.lattice, *l)
                .into_iter()
                .map(|j| {
                    let beta = beta_into(&j, &pt.beta, self.p, n)?;
                    Ok(AdelicPoint { lattice: j, beta })
                })
                .collect(),
            HeckeOp::U => {
                let pl = pt.lattice.scale(q(self.p));
                (0..self.p)
                    .map(|a| {
                        let x = self.split.lift(&[[1, a], [0, self.p]]);
                        let beta = x * pt.beta;
                        let gen = reduce_beta(&pt.lattice, &beta, self.p);
                        let lattice = self.order.right_mul(&gen).sum(&pl);
                        let beta = reduce_beta(&lattice, &beta, n);
                        Ok(AdelicPoint { lattice, beta })
                    })
                    .collect()
            }
            HeckeOp::Diamond(_) => invalid("diamond operators act on tilde points directly"),
            HeckeOp::Tnn(l) => {
                let lattice = pt.lattice.scale(q(*l as i128));
                let beta = beta_into(&lattice, &pt.beta, self.p, n)?;
                Ok(vec![AdelicPoint { lattice, beta }])
            }
        }
    }

    pub fn apply_point(&self, op: &HeckeOp, pt: &TildePoint) -> Result<Divisor> {
        self.check_op(op)?;
        let mut out = Divisor::new();
        if let HeckeOp::Diamond(d) = op {
            add_point(&mut out, self.normalize(pt.class, d * pt.t), 1);
            return Ok(out);
        }
        let rep = self.representative(pt)?;
        for img in self.apply_adelic(op, &rep)? {
            add_point(&mut out, self.read(&img)?, 1);
        }
        Ok(out)
    }

    pub fn apply_divisor(&self, op: &HeckeOp, d: &Divisor) -> Result<Divisor> {
        let mut out = Divisor::new();
        for (p, c) in d {
            for (q, e) in self.apply_point(op, p)? {
                add_point(&mut out, q, c * e);
            }
        }
        Ok(out)
    }

    pub fn hecke(&self, op: HeckeOp) -> Result<HeckeMatrix> {
        let n = self.len();
        let mut matrix = vec![vec![0i64; n]; n];
        for (s, pt) in self.points.iter().enumerate() {
            for (tp, c) in self.apply_point(&op, pt)? {
                let t = self.index_of(&tp).expect("image outside the level");
                matrix[t][s] += c;
            }
        }
        Ok(HeckeMatrix { op, level: self.m, matrix })
    }
}

/// Matrix of α̃_{m,*}: Z[X̃_m] → Z[X̃_{m-1}] (rows indexed by the lower level).
pub fn pushforward_matrix(st: &crate::shimura::ShimuraTower, m: u32) -> Result<Vec<Vec<i64>>> {
    let hi = st.level(m);
    let lo = st.level(m - 1);
    let mut mat = vec![vec![0i64; hi.len()]; lo.len()];
    for (s, pt) in hi.points.iter().enumerate() {
        let mut d = Divisor::new();
        d.insert(*pt, 1);
        for (tp, c) in st.pushforward(m, &d)? {
            mat[lo.index_of(&tp).unwrap()][s] += c;
        }
    }
    Ok(mat)
}
