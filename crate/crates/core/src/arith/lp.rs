//! Dense two-phase primal simplex over exact rationals.
//!
//! Problems are stated as `maximize c·x` subject to rows `a_i·x {<=,=,>=} b_i`
//! and per-variable sign tags. Free variables are split into a difference of
//! two nonnegative columns. Entering and leaving variables follow Bland's
//! least-index rule, so the method terminates on degenerate instances.

use super::{dot, solve_linear_system, RMatrix, RVector, Rational};
use crate::{Error, Result};
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RowKind {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VarKind {
    Free,
    NonNegative,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// `maximize objective·x` subject to `a x (rows) b` and variable sign tags.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearProgram {
    pub objective: RVector,
    pub a: RMatrix,
    pub b: RVector,
    pub rows: Vec<RowKind>,
    pub vars: Vec<VarKind>,
}

impl LinearProgram {
    /// An empty program over `n` variables of the given kind.
    pub fn new(objective: RVector, var_kind: VarKind) -> Self {
        let n = objective.len();
        LinearProgram { objective, a: RMatrix::zeros(0, n), b: Vec::new(), rows: Vec::new(), vars: vec![var_kind; n] }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.b.len()
    }

    /// Appends one constraint row. Rebuilding the matrix is quadratic in the
    /// row count, which is irrelevant at the sizes used here.
    pub fn push_row(&mut self, coeffs: RVector, kind: RowKind, rhs: Rational) -> Result<()> {
        if coeffs.len() != self.num_vars() {
            return Err(Error::Structural(format!(
                "row has {} coefficients for {} variables",
                coeffs.len(),
                self.num_vars()
            )));
        }
        let mut rows = self.a.to_rows();
        rows.push(coeffs);
        self.a = RMatrix::from_rows(rows)?;
        self.b.push(rhs);
        self.rows.push(kind);
        Ok(())
    }

    /// Appends many rows at once.
    pub fn with_rows(mut self, rows: Vec<(RVector, RowKind, Rational)>) -> Result<Self> {
        let mut all = self.a.to_rows();
        for (coeffs, kind, rhs) in rows {
            if coeffs.len() != self.num_vars() {
                return Err(Error::Structural(format!(
                    "row has {} coefficients for {} variables",
                    coeffs.len(),
                    self.num_vars()
                )));
            }
            all.push(coeffs);
            self.b.push(rhs);
            self.rows.push(kind);
        }
        self.a = if all.is_empty() { RMatrix::zeros(0, self.num_vars()) } else { RMatrix::from_rows(all)? };
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.objective.len();
        if self.a.cols() != n && self.a.rows() > 0 {
            return Err(Error::Structural(format!("constraint matrix has {} columns, objective has {n}", self.a.cols())));
        }
        if self.a.rows() != self.b.len() || self.rows.len() != self.b.len() {
            return Err(Error::Structural(format!(
                "{} matrix rows, {} rhs entries, {} row kinds",
                self.a.rows(),
                self.b.len(),
                self.rows.len()
            )));
        }
        if self.vars.len() != n {
            return Err(Error::Structural(format!("{} variable kinds for {n} variables", self.vars.len())));
        }
        Ok(())
    }

    /// Exact feasibility of a candidate point.
    pub fn is_feasible(&self, x: &[Rational]) -> bool {
        if x.len() != self.num_vars() {
            return false;
        }
        let signs_ok = self.vars.iter().zip(x).all(|(k, v)| *k == VarKind::Free || !v.is_negative());
        signs_ok
            && (0..self.num_rows()).all(|i| {
                let lhs = dot(self.a.row(i), x);
                match self.rows[i] {
                    RowKind::Le => lhs <= self.b[i],
                    RowKind::Eq => lhs == self.b[i],
                    RowKind::Ge => lhs >= self.b[i],
                }
            })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub optimum: Option<Rational>,
    /// Primal optimum in the original variables (empty unless optimal).
    pub point: RVector,
    /// Row multipliers certifying optimality (empty unless optimal).
    pub dual: RVector,
    /// Basic columns of the internal standard form, ascending.
    pub basis: Vec<usize>,
    /// Original rows dropped as linearly redundant equalities.
    pub redundant_rows: Vec<usize>,
}

impl LpSolution {
    fn without_point(status: LpStatus) -> Self {
        LpSolution { status, optimum: None, point: Vec::new(), dual: Vec::new(), basis: Vec::new(), redundant_rows: Vec::new() }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    /// Re-checks an optimal solution against `lp` without trusting the
    /// tableau: primal feasibility, objective value, dual feasibility with
    /// strong duality, and that the reported basis reproduces the point.
    pub fn certify(&self, lp: &LinearProgram) -> std::result::Result<(), String> {
        let Some(optimum) = &self.optimum else { return Err("no optimum to certify".into()) };
        if !lp.is_feasible(&self.point) {
            return Err("primal point is infeasible".into());
        }
        if &dot(&lp.objective, &self.point) != optimum {
            return Err("objective at point differs from reported optimum".into());
        }
        if self.dual.len() != lp.num_rows() {
            return Err("dual vector has wrong length".into());
        }
        for (i, (y, kind)) in self.dual.iter().zip(&lp.rows).enumerate() {
            let sign_ok = match kind {
                RowKind::Le => !y.is_negative(),
                RowKind::Ge => !y.is_positive(),
                RowKind::Eq => true,
            };
            if !sign_ok {
                return Err(format!("dual multiplier of row {i} has the wrong sign"));
            }
        }
        for j in 0..lp.num_vars() {
            let reduced = (0..lp.num_rows()).fold(Rational::zero(), |acc, i| acc + lp.a.get(i, j) * &self.dual[i]);
            let ok = match lp.vars[j] {
                VarKind::NonNegative => reduced >= lp.objective[j],
                VarKind::Free => reduced == lp.objective[j],
            };
            if !ok {
                return Err(format!("dual constraint of variable {j} violated"));
            }
        }
        if &dot(&lp.b, &self.dual) != optimum {
            return Err("dual objective differs from primal optimum".into());
        }
        let sf = StandardForm::build(lp);
        let full = sf.lift(&self.point);
        let kept: Vec<usize> = (0..sf.rows.len()).filter(|i| !self.redundant_rows.contains(i)).collect();
        if kept.len() != self.basis.len() {
            return Err("basis size does not match the number of independent rows".into());
        }
        for (j, v) in full.iter().enumerate() {
            if !v.is_zero() && !self.basis.contains(&j) {
                return Err(format!("nonbasic column {j} is nonzero"));
            }
        }
        let bmat = RMatrix::from_fn(kept.len(), self.basis.len(), |r, c| sf.rows[kept[r]].coeff(self.basis[c]));
        let rhs: RVector = kept.iter().map(|&i| sf.rows[i].rhs.clone()).collect();
        match solve_linear_system(&bmat, &rhs).map_err(|e| e.to_string())? {
            None => Err("basis matrix is singular".into()),
            Some(xb) => {
                let expected: RVector = self.basis.iter().map(|&j| full[j].clone()).collect();
                if xb == expected {
                    Ok(())
                } else {
                    Err("basis system does not reproduce the point".into())
                }
            }
        }
    }
}

struct StdRow {
    /// Coefficients on structural columns.
    coeffs: RVector,
    rhs: Rational,
    /// +1 or -1 applied to the original row so that `rhs >= 0`.
    flipped: bool,
    kind: RowKind,
    /// Slack (+1) or surplus (-1) column.
    slack: Option<(usize, bool)>,
    artificial: Option<usize>,
    n_struct: usize,
}

impl StdRow {
    fn coeff(&self, col: usize) -> Rational {
        if col < self.n_struct {
            return self.coeffs[col].clone();
        }
        if let Some((s, positive)) = self.slack {
            if s == col {
                return if positive { Rational::one() } else { -Rational::one() };
            }
        }
        if self.artificial == Some(col) {
            return Rational::one();
        }
        Rational::zero()
    }
}

struct StandardForm {
    /// For each original variable: positive column and, if free, negative column.
    var_cols: Vec<(usize, Option<usize>)>,
    n_struct: usize,
    n_cols: usize,
    rows: Vec<StdRow>,
    artificial_start: usize,
}

impl StandardForm {
    fn build(lp: &LinearProgram) -> Self {
        let mut var_cols = Vec::with_capacity(lp.num_vars());
        let mut next = 0;
        for kind in &lp.vars {
            match kind {
                VarKind::NonNegative => {
                    var_cols.push((next, None));
                    next += 1;
                }
                VarKind::Free => {
                    var_cols.push((next, Some(next + 1)));
                    next += 2;
                }
            }
        }
        let n_struct = next;
        let mut rows = Vec::with_capacity(lp.num_rows());
        for i in 0..lp.num_rows() {
            let mut coeffs = vec![Rational::zero(); n_struct];
            for (j, &(pos, neg)) in var_cols.iter().enumerate() {
                let a = lp.a.get(i, j);
                if a.is_zero() {
                    continue;
                }
                coeffs[pos] = a.clone();
                if let Some(neg) = neg {
                    coeffs[neg] = -a;
                }
            }
            let mut rhs = lp.b[i].clone();
            let mut kind = lp.rows[i];
            let flipped = rhs.is_negative();
            if flipped {
                for c in coeffs.iter_mut() {
                    *c = -c.clone();
                }
                rhs = -rhs;
                kind = match kind {
                    RowKind::Le => RowKind::Ge,
                    RowKind::Ge => RowKind::Le,
                    RowKind::Eq => RowKind::Eq,
                };
            }
            rows.push(StdRow { coeffs, rhs, flipped, kind, slack: None, artificial: None, n_struct });
        }
        let mut col = n_struct;
        for row in rows.iter_mut() {
            match row.kind {
                RowKind::Le => {
                    row.slack = Some((col, true));
                    col += 1;
                }
                RowKind::Ge => {
                    row.slack = Some((col, false));
                    col += 1;
                }
                RowKind::Eq => {}
            }
        }
        let artificial_start = col;
        for row in rows.iter_mut() {
            if row.kind != RowKind::Le {
                row.artificial = Some(col);
                col += 1;
            }
        }
        StandardForm { var_cols, n_struct, n_cols: col, rows, artificial_start }
    }

    /// Standard-form column values for an original point (artificials zero).
    fn lift(&self, x: &[Rational]) -> RVector {
        let mut full = vec![Rational::zero(); self.n_cols];
        for (j, &(pos, neg)) in self.var_cols.iter().enumerate() {
            if x[j].is_negative() {
                if let Some(neg) = neg {
                    full[neg] = -x[j].clone();
                }
            } else {
                full[pos] = x[j].clone();
            }
        }
        for row in &self.rows {
            if let Some((s, positive)) = row.slack {
                let ax = dot(&row.coeffs, &full[..self.n_struct]);
                full[s] = if positive { &row.rhs - ax } else { ax - &row.rhs };
            }
        }
        full
    }
}

struct Tableau {
    t: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    /// Reduced costs per column; the last entry holds minus the objective.
    z: Vec<Rational>,
    /// Original row index of each tableau row.
    origin: Vec<usize>,
    n_cols: usize,
}

enum Outcome {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn from_standard(sf: &StandardForm) -> Self {
        let n_cols = sf.n_cols;
        let mut t = Vec::with_capacity(sf.rows.len());
        let mut basis = Vec::with_capacity(sf.rows.len());
        for row in &sf.rows {
            let mut r = vec![Rational::zero(); n_cols + 1];
            r[..sf.n_struct].clone_from_slice(&row.coeffs);
            if let Some((s, positive)) = row.slack {
                r[s] = if positive { Rational::one() } else { -Rational::one() };
            }
            if let Some(a) = row.artificial {
                r[a] = Rational::one();
            }
            r[n_cols] = row.rhs.clone();
            basis.push(match (row.kind, row.slack, row.artificial) {
                (RowKind::Le, Some((s, _)), _) => s,
                (_, _, Some(a)) => a,
                _ => unreachable!("every row has a basic column"),
            });
            t.push(r);
        }
        Tableau { t, basis, z: vec![Rational::zero(); n_cols + 1], origin: (0..sf.rows.len()).collect(), n_cols }
    }

    fn price(&mut self, cost: &[Rational]) {
        let n = self.n_cols;
        let mut z: Vec<Rational> = cost.to_vec();
        z.push(Rational::zero());
        for (row, &b) in self.t.iter().zip(&self.basis) {
            let cb = &cost[b];
            if cb.is_zero() {
                continue;
            }
            for j in 0..=n {
                if !row[j].is_zero() {
                    z[j] -= cb * &row[j];
                }
            }
        }
        self.z = z;
    }

    fn pivot(&mut self, r: usize, e: usize) {
        let n = self.n_cols;
        let p = self.t[r][e].clone();
        if !p.is_one() {
            for x in self.t[r].iter_mut() {
                if !x.is_zero() {
                    *x /= &p;
                }
            }
        }
        let support: Vec<usize> = (0..=n).filter(|&j| !self.t[r][j].is_zero()).collect();
        let pivot_row = std::mem::take(&mut self.t[r]);
        for row in self.t.iter_mut() {
            if row.is_empty() || row[e].is_zero() {
                continue;
            }
            let f = row[e].clone();
            for &j in &support {
                row[j] -= &f * &pivot_row[j];
            }
        }
        if !self.z[e].is_zero() {
            let f = self.z[e].clone();
            for &j in &support {
                self.z[j] -= &f * &pivot_row[j];
            }
        }
        self.t[r] = pivot_row;
        self.basis[r] = e;
    }

    fn run(&mut self, allowed: &[bool]) -> Outcome {
        let n = self.n_cols;
        loop {
            let Some(e) = (0..n).find(|&j| allowed[j] && self.z[j].is_positive()) else {
                return Outcome::Optimal;
            };
            let mut best: Option<(usize, Rational)> = None;
            for (i, row) in self.t.iter().enumerate() {
                if !row[e].is_positive() {
                    continue;
                }
                let ratio = &row[n] / &row[e];
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                None => return Outcome::Unbounded,
                Some((r, _)) => self.pivot(r, e),
            }
        }
    }

    fn remove_row(&mut self, r: usize) {
        self.t.remove(r);
        self.basis.remove(r);
        self.origin.remove(r);
    }
}

/// Solves `lp` exactly. Deterministic: identical inputs yield identical bases.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution> {
    lp.validate()?;
    let sf = StandardForm::build(lp);
    let mut tab = Tableau::from_standard(&sf);
    let n = sf.n_cols;
    let mut redundant = Vec::new();

    if sf.artificial_start < n {
        let mut cost = vec![Rational::zero(); n];
        for c in cost.iter_mut().skip(sf.artificial_start) {
            *c = -Rational::one();
        }
        tab.price(&cost);
        let allowed = vec![true; n];
        // Phase one is bounded above by zero.
        let _ = tab.run(&allowed);
        if tab.z[n].is_positive() {
            return Ok(LpSolution::without_point(LpStatus::Infeasible));
        }
        let mut r = 0;
        while r < tab.t.len() {
            if tab.basis[r] >= sf.artificial_start {
                match (0..sf.artificial_start).find(|&j| !tab.t[r][j].is_zero()) {
                    Some(j) => tab.pivot(r, j),
                    None => {
                        redundant.push(tab.origin[r]);
                        tab.remove_row(r);
                        continue;
                    }
                }
            }
            r += 1;
        }
    }

    let mut cost = vec![Rational::zero(); n];
    for (j, &(pos, neg)) in sf.var_cols.iter().enumerate() {
        cost[pos] = lp.objective[j].clone();
        if let Some(neg) = neg {
            cost[neg] = -lp.objective[j].clone();
        }
    }
    tab.price(&cost);
    let allowed: Vec<bool> = (0..n).map(|j| j < sf.artificial_start).collect();
    if let Outcome::Unbounded = tab.run(&allowed) {
        return Ok(LpSolution::without_point(LpStatus::Unbounded));
    }

    let mut values = vec![Rational::zero(); n];
    for (row, &b) in tab.t.iter().zip(&tab.basis) {
        values[b] = row[n].clone();
    }
    let point: RVector = sf
        .var_cols
        .iter()
        .map(|&(pos, neg)| match neg {
            Some(neg) => &values[pos] - &values[neg],
            None => values[pos].clone(),
        })
        .collect();

    let mut dual = vec![Rational::zero(); lp.num_rows()];
    for (i, row) in sf.rows.iter().enumerate() {
        if redundant.contains(&i) {
            continue;
        }
        let unit = match (row.kind, row.slack, row.artificial) {
            (RowKind::Le, Some((s, _)), _) => s,
            (_, _, Some(a)) => a,
            _ => unreachable!(),
        };
        let y = -tab.z[unit].clone();
        dual[i] = if row.flipped { -y } else { y };
    }

    let mut basis = tab.basis.clone();
    basis.sort_unstable();
    redundant.sort_unstable();
    Ok(LpSolution {
        status: LpStatus::Optimal,
        optimum: Some(-tab.z[n].clone()),
        point,
        dual,
        basis,
        redundant_rows: redundant,
    })
}

#[cfg(test)]
mod tests {
    use super::super::{int, rat};
    use super::*;

    fn lp1(obj: &[i64], rows: &[(&[i64], RowKind, i64)], vars: VarKind) -> LinearProgram {
        let lp = LinearProgram::new(obj.iter().map(|&c| int(c)).collect(), vars);
        lp.with_rows(rows.iter().map(|(a, k, b)| (a.iter().map(|&x| int(x)).collect(), *k, int(*b))).collect())
            .unwrap()
    }

    #[test]
    fn box_constraint() {
        let lp = lp1(&[1], &[(&[1], RowKind::Le, 1)], VarKind::NonNegative);
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_eq!(sol.optimum, Some(int(1)));
        sol.certify(&lp).unwrap();
    }

    #[test]
    fn simplex_face() {
        let lp = lp1(&[1, 1], &[(&[1, 1], RowKind::Eq, 1)], VarKind::NonNegative);
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.optimum, Some(int(1)));
        sol.certify(&lp).unwrap();
    }

    #[test]
    fn unbounded_ray() {
        let lp = lp1(&[1], &[(&[1], RowKind::Ge, 0)], VarKind::NonNegative);
        assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn infeasible_system() {
        let lp = lp1(&[1, 0], &[(&[1, 1], RowKind::Le, 1), (&[1, 1], RowKind::Ge, 2)], VarKind::NonNegative);
        assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn free_variables_and_redundant_equalities() {
        // max x + 2y with x + y = 1/2 (stated twice), x >= -3, y <= 5.
        let lp = LinearProgram::new(vec![int(1), int(2)], VarKind::Free)
            .with_rows(vec![
                (vec![int(1), int(1)], RowKind::Eq, rat(1, 2)),
                (vec![int(2), int(2)], RowKind::Eq, int(1)),
                (vec![int(1), int(0)], RowKind::Ge, int(-3)),
                (vec![int(0), int(1)], RowKind::Le, int(5)),
            ])
            .unwrap();
        let sol = solve_lp(&lp).unwrap();
        // objective is 1/2 + y and x = 1/2 - y >= -3 caps y at 7/2
        assert_eq!(sol.point, vec![int(-3), rat(7, 2)]);
        assert_eq!(sol.optimum, Some(int(4)));
        assert_eq!(sol.redundant_rows.len(), 1);
        sol.certify(&lp).unwrap();
    }

    #[test]
    fn malformed_dimensions_are_structural() {
        let mut lp = lp1(&[1, 1], &[], VarKind::NonNegative);
        lp.b.push(int(1));
        assert!(matches!(solve_lp(&lp), Err(Error::Structural(_))));
        let bad_row = LinearProgram::new(vec![int(1)], VarKind::Free).with_rows(vec![(vec![int(1), int(2)], RowKind::Le, int(0))]);
        assert!(matches!(bad_row, Err(Error::Structural(_))));
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Beale's classic cycling instance; Bland's rule must terminate.
        let lp = LinearProgram::new(vec![rat(3, 4), int(-150), rat(1, 50), int(-6)], VarKind::NonNegative)
            .with_rows(vec![
                (vec![rat(1, 4), int(-60), rat(-1, 25), int(9)], RowKind::Le, int(0)),
                (vec![rat(1, 2), int(-90), rat(-1, 50), int(3)], RowKind::Le, int(0)),
                (vec![int(0), int(0), int(1), int(0)], RowKind::Le, int(1)),
            ])
            .unwrap();
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.optimum, Some(rat(1, 20)));
        sol.certify(&lp).unwrap();
    }

    #[test]
    fn repeated_solves_are_identical() {
        let lp = lp1(&[2, 3, 1], &[(&[1, 1, 1], RowKind::Le, 4), (&[1, 0, 2], RowKind::Ge, 1)], VarKind::NonNegative);
        assert_eq!(solve_lp(&lp).unwrap(), solve_lp(&lp).unwrap());
    }
}
