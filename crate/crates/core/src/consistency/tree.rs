use super::distance::is_distance;
use crate::arith::{format_rational, Rational};
use crate::loss::LossMatrix;
use num_traits::{Signed, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

/// A weighted spanning tree whose path lengths reproduce the loss.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeCertificate {
    pub edges: Vec<(usize, usize, Rational)>,
}

impl Serialize for TreeCertificate {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let edges: Vec<(usize, usize, String)> =
            self.edges.iter().map(|(a, b, w)| (a + 1, b + 1, format_rational(w))).collect();
        let mut st = s.serialize_struct("TreeCertificate", 1)?;
        st.serialize_field("edges", &edges)?;
        st.end()
    }
}

impl TreeCertificate {
    /// All pairwise path lengths, or `None` if the edges do not form a
    /// spanning tree on `k` nodes.
    pub fn path_lengths(&self, k: usize) -> Option<Vec<Vec<Rational>>> {
        if self.edges.len() + 1 != k {
            return None;
        }
        let mut adj: Vec<Vec<(usize, &Rational)>> = vec![Vec::new(); k];
        for (a, b, w) in &self.edges {
            if *a >= k || *b >= k {
                return None;
            }
            adj[*a].push((*b, w));
            adj[*b].push((*a, w));
        }
        let mut dist = vec![vec![Rational::zero(); k]; k];
        for src in 0..k {
            let mut seen = vec![false; k];
            seen[src] = true;
            let mut stack = vec![src];
            while let Some(u) = stack.pop() {
                for &(v, w) in &adj[u] {
                    if !seen[v] {
                        seen[v] = true;
                        dist[src][v] = &dist[src][u] + w;
                        stack.push(v);
                    }
                }
            }
            if seen.iter().any(|s| !s) {
                return None;
            }
        }
        Some(dist)
    }

    /// Spanning tree, positive weights and exact path sums equal to `L`.
    pub fn verify(&self, loss: &LossMatrix) -> bool {
        let k = loss.k();
        if self.edges.iter().any(|(_, _, w)| !w.is_positive()) {
            return false;
        }
        match self.path_lengths(k) {
            None => false,
            Some(d) => (0..k).all(|i| (0..k).all(|j| d[i][j] == *loss.get(i, j))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum TreeOutcome {
    Certified { certificate: TreeCertificate },
    NotCertified { reason: String },
}

impl TreeOutcome {
    pub fn is_certified(&self) -> bool {
        matches!(self, TreeOutcome::Certified { .. })
    }

    pub fn certificate(&self) -> Option<&TreeCertificate> {
        match self {
            TreeOutcome::Certified { certificate } => Some(certificate),
            TreeOutcome::NotCertified { .. } => None,
        }
    }
}

/// Kruskal's minimum spanning tree over the complete graph weighted by `L`
/// (ties broken by the smaller index pair), then exact path-sum
/// verification. A negative answer means "not certified", not "not a tree".
pub fn certify_tree_metric(loss: &LossMatrix) -> TreeOutcome {
    if !is_distance(loss).is_distance {
        return TreeOutcome::NotCertified { reason: "loss is not a distance".into() };
    }
    let k = loss.k();
    let mut candidates: Vec<(usize, usize)> = (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j))).collect();
    candidates.sort_by(|&(a, b), &(c, d)| loss.get(a, b).cmp(loss.get(c, d)).then((a, b).cmp(&(c, d))));
    let mut parent: Vec<usize> = (0..k).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut x = x;
        while p[x] != r {
            let next = p[x];
            p[x] = r;
            x = next;
        }
        r
    }
    let mut edges = Vec::with_capacity(k - 1);
    for (a, b) in candidates {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
            edges.push((a, b, loss.get(a, b).clone()));
        }
    }
    edges.sort_by_key(|e| (e.0, e.1));
    let certificate = TreeCertificate { edges };
    let Some(d) = certificate.path_lengths(k) else {
        return TreeOutcome::NotCertified { reason: "spanning tree construction failed".into() };
    };
    for i in 0..k {
        for j in i + 1..k {
            if d[i][j] != *loss.get(i, j) {
                return TreeOutcome::NotCertified {
                    reason: format!(
                        "minimum spanning tree path between {} and {} has length {}, loss is {}",
                        i + 1,
                        j + 1,
                        format_rational(&d[i][j]),
                        format_rational(loss.get(i, j))
                    ),
                };
            }
        }
    }
    TreeOutcome::Certified { certificate }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{int, rat};

    #[test]
    fn chain_and_star() {
        let chain = LossMatrix::absolute_deviation(&[int(0), int(1), int(2)]).unwrap();
        let cert = certify_tree_metric(&chain);
        assert_eq!(cert.certificate().unwrap().edges, vec![(0, 1, int(1)), (1, 2, int(1))]);
        let star = LossMatrix::from_ints(&[&[0, 1, 1, 1], &[1, 0, 2, 2], &[1, 2, 0, 2], &[1, 2, 2, 0]]).unwrap();
        let cert = certify_tree_metric(&star);
        assert_eq!(cert.certificate().unwrap().edges, vec![(0, 1, int(1)), (0, 2, int(1)), (0, 3, int(1))]);
        assert!(cert.certificate().unwrap().verify(&star));
    }

    #[test]
    fn four_cycle_is_not_certified() {
        let h = rat(1, 2);
        let hamming = LossMatrix::new(vec![
            vec![int(0), h.clone(), h.clone(), int(1)],
            vec![h.clone(), int(0), int(1), h.clone()],
            vec![h.clone(), int(1), int(0), h.clone()],
            vec![int(1), h.clone(), h.clone(), int(0)],
        ])
        .unwrap();
        assert!(!certify_tree_metric(&hamming).is_certified());
        assert!(!certify_tree_metric(&LossMatrix::zero_one(3).unwrap()).is_certified());
    }

    #[test]
    fn verify_rejects_bad_certificates() {
        let chain = LossMatrix::absolute_deviation(&[int(0), int(1), int(2)]).unwrap();
        let wrong = TreeCertificate { edges: vec![(0, 1, int(1)), (0, 2, int(2))] };
        assert!(!wrong.verify(&chain));
        let short = TreeCertificate { edges: vec![(0, 1, int(1))] };
        assert!(!short.verify(&chain));
    }
}
