//! H-represented polyhedra and exact vertex enumeration by active-set rank.
//!
//! A point is a vertex exactly when it is feasible and its tight rows have
//! rank equal to the ambient dimension. Enumeration walks row subsets that
//! extend an independent set, solves the square system and keeps feasible
//! solutions.

use crate::arith::{dot, format_rational, rank, solve_lp, LinearProgram, LpStatus, RMatrix, RVector, Rational, RowKind, VarKind};
use crate::loss::{LossMatrix, SimplexPoint};
use crate::{Error, Result};
use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};
use std::collections::BTreeSet;

/// Default bound on the free dimension explored by vertex enumeration.
pub const DEFAULT_CAP: usize = 10;

/// Largest k for which transportation polytopes are enumerated.
pub const TRANSPORT_ENUM_MAX_K: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Relation {
    Ge,
    Eq,
}

/// `{x : a_i·x (>= | =) b_i}`.
#[derive(Clone, Debug, PartialEq)]
pub struct HPolytope {
    a: RMatrix,
    b: RVector,
    relations: Vec<Relation>,
}

impl HPolytope {
    pub fn new(a: RMatrix, b: RVector, relations: Vec<Relation>) -> Result<Self> {
        if a.rows() != b.len() || relations.len() != b.len() {
            return Err(Error::dim(format!(
                "{} rows, {} right-hand sides, {} relations",
                a.rows(),
                b.len(),
                relations.len()
            )));
        }
        Ok(HPolytope { a, b, relations })
    }

    pub fn from_rows(n: usize, rows: Vec<(RVector, Relation, Rational)>) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len());
        let mut b = Vec::with_capacity(rows.len());
        let mut rel = Vec::with_capacity(rows.len());
        for (coeffs, r, rhs) in rows {
            if coeffs.len() != n {
                return Err(Error::dim(format!("row of length {} in dimension {n}", coeffs.len())));
            }
            data.push(coeffs);
            rel.push(r);
            b.push(rhs);
        }
        let a = if data.is_empty() { RMatrix::zeros(0, n) } else { RMatrix::from_rows(data)? };
        Self::new(a, b, rel)
    }

    pub fn dim(&self) -> usize {
        self.a.cols()
    }

    pub fn num_rows(&self) -> usize {
        self.b.len()
    }

    pub fn matrix(&self) -> &RMatrix {
        &self.a
    }

    pub fn rhs(&self) -> &[Rational] {
        &self.b
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    fn row_holds(&self, i: usize, x: &[Rational]) -> bool {
        let lhs = dot(self.a.row(i), x);
        match self.relations[i] {
            Relation::Ge => lhs >= self.b[i],
            Relation::Eq => lhs == self.b[i],
        }
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        x.len() == self.dim() && (0..self.num_rows()).all(|i| self.row_holds(i, x))
    }

    /// Indices of rows satisfied with equality at `x`.
    pub fn active_rows(&self, x: &[Rational]) -> Vec<usize> {
        (0..self.num_rows()).filter(|&i| dot(self.a.row(i), x) == self.b[i]).collect()
    }

    /// Feasible with tight rows of full rank.
    pub fn is_vertex(&self, x: &[Rational]) -> bool {
        self.contains(x) && rank(&self.a.select_rows(&self.active_rows(x))) == self.dim()
    }

    /// The LP `maximize objective·x` over this polyhedron. Rows of the form
    /// `c·x_j >= 0` with `c > 0` become sign constraints on `x_j`.
    pub fn to_lp(&self, objective: RVector) -> Result<LinearProgram> {
        if objective.len() != self.dim() {
            return Err(Error::dim(format!("objective of length {} in dimension {}", objective.len(), self.dim())));
        }
        let mut lp = LinearProgram::new(objective, VarKind::Free);
        let mut rows = Vec::new();
        for i in 0..self.num_rows() {
            let row = self.a.row(i);
            if self.relations[i] == Relation::Ge && self.b[i].is_zero() {
                let mut nz = row.iter().enumerate().filter(|(_, c)| !c.is_zero());
                if let (Some((j, c)), None) = (nz.next(), nz.next()) {
                    if c.is_positive() {
                        lp.vars[j] = VarKind::NonNegative;
                        continue;
                    }
                }
            }
            let kind = match self.relations[i] {
                Relation::Ge => RowKind::Ge,
                Relation::Eq => RowKind::Eq,
            };
            rows.push((row.to_vec(), kind, self.b[i].clone()));
        }
        lp.with_rows(rows)
    }

    /// Bounded iff every coordinate is bounded above and below (2n LPs).
    pub fn is_bounded(&self) -> Result<bool> {
        for j in 0..self.dim() {
            for sign in [1, -1] {
                let mut c = vec![Rational::zero(); self.dim()];
                c[j] = Rational::from_integer(sign.into());
                if solve_lp(&self.to_lp(c)?)?.status == LpStatus::Unbounded {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// All vertices, deduplicated and in lexicographic order.
    ///
    /// `cap` bounds the number of free directions `n − rank(equalities)`,
    /// which may be at most `cap + 1`. A polyhedron whose rows do not have
    /// full column rank has no vertices and is rejected.
    pub fn enumerate_vertices(&self, cap: usize) -> Result<VertexSet> {
        let n = self.dim();
        if rank(&self.a) < n {
            return Err(Error::Structural(format!(
                "constraint rows have rank {} < {n}; the polyhedron contains a line and has no vertices",
                rank(&self.a)
            )));
        }
        // Opposing inequality pairs are equalities in disguise.
        let mut paired = vec![false; self.num_rows()];
        let mut eq_rows = Vec::new();
        for i in 0..self.num_rows() {
            match self.relations[i] {
                Relation::Eq => eq_rows.push(i),
                Relation::Ge if !paired[i] => {
                    let partner = (i + 1..self.num_rows()).find(|&j| {
                        !paired[j]
                            && self.relations[j] == Relation::Ge
                            && self.b[j] == -self.b[i].clone()
                            && self.a.row(j).iter().zip(self.a.row(i)).all(|(x, y)| *x == -y.clone())
                    });
                    if let Some(j) = partner {
                        paired[i] = true;
                        paired[j] = true;
                        eq_rows.push(i);
                    }
                }
                Relation::Ge => {}
            }
        }
        let ineq: Vec<usize> = (0..self.num_rows()).filter(|&i| self.relations[i] == Relation::Ge && !paired[i]).collect();

        let mut ech = Echelon::new(n);
        for &i in &eq_rows {
            match ech.insert(self.augmented(i)) {
                Insert::Inconsistent => return Ok(VertexSet::default()),
                Insert::Dependent | Insert::Added => {}
            }
        }
        let free = n - ech.len();
        if free > cap + 1 {
            return Err(Error::Resource(format!(
                "vertex enumeration over {free} free dimensions exceeds the cap of {}; use a smaller k or raise --cap",
                cap + 1
            )));
        }
        let mut found = BTreeSet::new();
        self.dfs(&ineq, 0, &mut ech, &mut found);
        Ok(VertexSet { vertices: found.into_iter().collect() })
    }

    fn augmented(&self, i: usize) -> RVector {
        let mut r = self.a.row(i).to_vec();
        r.push(self.b[i].clone());
        r
    }

    fn dfs(&self, ineq: &[usize], start: usize, ech: &mut Echelon, found: &mut BTreeSet<RVector>) {
        let n = self.dim();
        if ech.len() == n {
            let x = ech.solve();
            if self.contains(&x) {
                found.insert(x);
            }
            return;
        }
        let needed = n - ech.len();
        for pos in start..ineq.len() {
            if ineq.len() - pos < needed {
                break;
            }
            if let Insert::Added = ech.insert(self.augmented(ineq[pos])) {
                self.dfs(ineq, pos + 1, ech, found);
                ech.pop();
            }
        }
    }
}

enum Insert {
    Added,
    Dependent,
    Inconsistent,
}

/// Rows kept so that each new row is zero in all earlier pivot columns.
struct Echelon {
    n: usize,
    rows: Vec<(RVector, usize)>,
}

impl Echelon {
    fn new(n: usize) -> Self {
        Echelon { n, rows: Vec::with_capacity(n) }
    }

    fn len(&self) -> usize {
        self.rows.len()
    }

    fn insert(&mut self, mut r: RVector) -> Insert {
        for (row, p) in &self.rows {
            if r[*p].is_zero() {
                continue;
            }
            let f = &r[*p] / &row[*p];
            for j in 0..=self.n {
                if !row[j].is_zero() {
                    let d = &f * &row[j];
                    r[j] -= d;
                }
            }
        }
        match (0..self.n).find(|&j| !r[j].is_zero()) {
            Some(p) => {
                self.rows.push((r, p));
                Insert::Added
            }
            None if r[self.n].is_zero() => Insert::Dependent,
            None => Insert::Inconsistent,
        }
    }

    fn pop(&mut self) {
        self.rows.pop();
    }

    /// Unique solution of a full set of `n` rows.
    fn solve(&self) -> RVector {
        let mut x = vec![Rational::zero(); self.n];
        for (row, p) in self.rows.iter().rev() {
            let mut rhs = row[self.n].clone();
            for j in 0..self.n {
                if j != *p && !row[j].is_zero() {
                    rhs -= &row[j] * &x[j];
                }
            }
            x[*p] = rhs / &row[*p];
        }
        x
    }
}

/// Exact vertices in lexicographic order, without duplicates.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VertexSet {
    vertices: Vec<RVector>,
}

impl VertexSet {
    pub fn from_points(points: impl IntoIterator<Item = RVector>) -> Self {
        let set: BTreeSet<RVector> = points.into_iter().collect();
        VertexSet { vertices: set.into_iter().collect() }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, RVector> {
        self.vertices.iter()
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        self.vertices.binary_search_by(|v| v.as_slice().cmp(x)).is_ok()
    }

    pub fn as_slice(&self) -> &[RVector] {
        &self.vertices
    }
}

impl Serialize for VertexSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let text: Vec<Vec<String>> = self.vertices.iter().map(|v| v.iter().map(format_rational).collect()).collect();
        text.serialize(s)
    }
}

/// The probability simplex in `k` coordinates.
pub fn simplex_polytope(k: usize) -> HPolytope {
    let mut rows = vec![(vec![Rational::one(); k], Relation::Eq, Rational::one())];
    rows.extend((0..k).map(|z| (unit(k, z), Relation::Ge, Rational::zero())));
    HPolytope::from_rows(k, rows).expect("consistent shapes")
}

fn unit(n: usize, j: usize) -> RVector {
    let mut e = vec![Rational::zero(); n];
    e[j] = Rational::one();
    e
}

/// `Δ(y) = {q ∈ Δ : L_y·q <= L_z·q for all z}`.
#[derive(Clone, Debug)]
pub struct PredictionSet {
    y: usize,
    hrep: HPolytope,
    rows: Vec<RVector>,
}

/// Rows: the simplex equality, `q_z >= 0` for every z, then
/// `(L_z − L_y)·q >= 0` for every `z != y`.
pub fn prediction_set(loss: &LossMatrix, y: usize) -> Result<PredictionSet> {
    loss.check_output(y)?;
    let k = loss.k();
    let simplex = simplex_polytope(k);
    let mut rows: Vec<(RVector, Relation, Rational)> = (0..simplex.num_rows())
        .map(|i| (simplex.a.row(i).to_vec(), simplex.relations[i], simplex.b[i].clone()))
        .collect();
    for z in (0..k).filter(|&z| z != y) {
        let coeffs = loss.row(z).iter().zip(loss.row(y)).map(|(a, b)| a - b).collect();
        rows.push((coeffs, Relation::Ge, Rational::zero()));
    }
    Ok(PredictionSet { y, hrep: HPolytope::from_rows(k, rows)?, rows: loss.rows().to_vec() })
}

impl PredictionSet {
    pub fn output(&self) -> usize {
        self.y
    }

    pub fn hrep(&self) -> &HPolytope {
        &self.hrep
    }

    /// Direct test of `q ∈ Δ` and `y ∈ argmin_z L_z·q`.
    pub fn contains(&self, q: &[Rational]) -> bool {
        if q.len() != self.rows.len() || q.iter().any(|x| x.is_negative()) || !crate::arith::sum(q).is_one() {
            return false;
        }
        let own = dot(&self.rows[self.y], q);
        self.rows.iter().all(|r| own <= dot(r, q))
    }

    pub fn vertices(&self, cap: usize) -> Result<VertexSet> {
        self.hrep.enumerate_vertices(cap)
    }
}

/// `P = {(q, u) : L_y·q >= u for all y, q >= 0, 1·q >= 1, −1·q >= −1}`.
pub fn epigraph_polytope(loss: &LossMatrix) -> HPolytope {
    let k = loss.k();
    let n = k + 1;
    let mut rows = Vec::with_capacity(2 * k + 2);
    for y in 0..k {
        let mut r = loss.row(y).to_vec();
        r.push(-Rational::one());
        rows.push((r, Relation::Ge, Rational::zero()));
    }
    for z in 0..k {
        rows.push((unit(n, z), Relation::Ge, Rational::zero()));
    }
    let mut ones = vec![Rational::one(); k];
    ones.push(Rational::zero());
    let neg: RVector = ones.iter().map(|x| -x.clone()).collect();
    rows.push((ones, Relation::Ge, Rational::one()));
    rows.push((neg, Relation::Ge, -Rational::one()));
    HPolytope::from_rows(n, rows).expect("consistent shapes")
}

/// Tight rows of an epigraph point `x = (q, u)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ActiveSets {
    /// Outputs with `L_y·q = u`.
    pub s: Vec<usize>,
    /// Outputs with `q_y = 0`.
    pub t: Vec<usize>,
    pub rank: usize,
    pub is_vertex: bool,
    pub s_nonempty: bool,
    /// `|S| + |T| >= k`.
    pub covers_k: bool,
}

/// Active sets of a feasible point of an epigraph polytope built by
/// [`epigraph_polytope`].
pub fn active_sets(p: &HPolytope, x: &[Rational]) -> Result<ActiveSets> {
    let n = p.dim();
    if n < 2 || p.num_rows() != 2 * n || x.len() != n {
        return Err(Error::dim(format!(
            "expected an epigraph polytope with {} rows and a point of length {n}",
            2 * n
        )));
    }
    let k = n - 1;
    if !p.contains(x) {
        return Err(Error::precondition("point is not in the epigraph polytope"));
    }
    let active = p.active_rows(x);
    let s: Vec<usize> = active.iter().copied().filter(|&i| i < k).collect();
    let t: Vec<usize> = active.iter().filter(|&&i| (k..2 * k).contains(&i)).map(|i| i - k).collect();
    let r = rank(&p.a.select_rows(&active));
    Ok(ActiveSets {
        s_nonempty: !s.is_empty(),
        covers_k: s.len() + t.len() >= k,
        is_vertex: r == n,
        rank: r,
        s,
        t,
    })
}

/// `U(q, q)`: nonnegative k×k plans, flattened row-major, with both
/// marginals equal to `q`.
pub fn transport_polytope(q: &SimplexPoint) -> HPolytope {
    let k = q.len();
    let n = k * k;
    let mut rows = Vec::with_capacity(2 * k + n);
    for i in 0..k {
        let mut r = vec![Rational::zero(); n];
        for j in 0..k {
            r[i * k + j] = Rational::one();
        }
        rows.push((r, Relation::Eq, q[i].clone()));
    }
    for j in 0..k {
        let mut r = vec![Rational::zero(); n];
        for i in 0..k {
            r[i * k + j] = Rational::one();
        }
        rows.push((r, Relation::Eq, q[j].clone()));
    }
    rows.extend((0..n).map(|c| (unit(n, c), Relation::Ge, Rational::zero())));
    HPolytope::from_rows(n, rows).expect("consistent shapes")
}

/// Vertices of `U(q, q)`; only offered for `k <= 4`.
pub fn transport_vertices(q: &SimplexPoint, cap: usize) -> Result<VertexSet> {
    if q.len() > TRANSPORT_ENUM_MAX_K {
        return Err(Error::Resource(format!(
            "transportation vertices are enumerated only for k <= {TRANSPORT_ENUM_MAX_K}, got k = {}",
            q.len()
        )));
    }
    transport_polytope(q).enumerate_vertices(cap)
}
