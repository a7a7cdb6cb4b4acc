//! Built-in example losses.

use crate::arith::{int, rat, Rational};
use crate::loss::LossMatrix;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorpusEntry {
    pub name: String,
    pub description: String,
    pub labels: Vec<String>,
    pub loss: LossMatrix,
}

fn numbered(k: usize) -> Vec<String> {
    (1..=k).map(|i| i.to_string()).collect()
}

pub fn zero_one(k: usize) -> Result<CorpusEntry> {
    Ok(CorpusEntry {
        name: format!("zero-one-{k}"),
        description: format!("0-1 loss on {k} outputs"),
        labels: numbered(k),
        loss: LossMatrix::zero_one(k)?,
    })
}

/// Absolute deviation `|γ_y − γ_y'|` with `γ = (0, 1, ..., k−1)`.
pub fn chain(k: usize) -> Result<CorpusEntry> {
    let gamma: Vec<Rational> = (0..k as i64).map(int).collect();
    Ok(CorpusEntry {
        name: format!("chain-{k}"),
        description: format!("absolute deviation on the positions 0..{}", k - 1),
        labels: numbered(k),
        loss: LossMatrix::absolute_deviation(&gamma)?,
    })
}

/// Shortest-path distance of a weighted tree given by its edges.
pub fn tree_distance(k: usize, edges: &[(usize, usize, Rational)]) -> Result<LossMatrix> {
    let cert = crate::consistency::TreeCertificate { edges: edges.to_vec() };
    let d = cert
        .path_lengths(k)
        .ok_or_else(|| Error::Validation("edges do not form a spanning tree".into()))?;
    LossMatrix::new(d)
}

/// Center 1 joined to k − 1 leaves by unit edges.
pub fn star(k: usize) -> Result<CorpusEntry> {
    let edges: Vec<_> = (1..k).map(|leaf| (0, leaf, int(1))).collect();
    Ok(CorpusEntry {
        name: format!("star-{k}"),
        description: format!("star with center 1 and {} unit-weight leaves", k - 1),
        labels: numbered(k),
        loss: tree_distance(k, &edges)?,
    })
}

/// Complete binary tree of depth two with rational edge weights.
pub fn binary_tree_7() -> Result<CorpusEntry> {
    let edges = vec![
        (0, 1, rat(1, 2)),
        (0, 2, rat(2, 3)),
        (1, 3, rat(3, 4)),
        (1, 4, int(1)),
        (2, 5, rat(5, 4)),
        (2, 6, rat(1, 3)),
    ];
    Ok(CorpusEntry {
        name: "tree-7".into(),
        description: "bifurcating tree on 7 nodes (root 1, children 2 and 3, leaves 4 to 7) with rational weights".into(),
        labels: numbered(7),
        loss: tree_distance(7, &edges)?,
    })
}

/// Hamming loss on two binary coordinates, 1/2 per disagreement.
pub fn hamming_2x2() -> Result<CorpusEntry> {
    let labels = ["00", "01", "10", "11"];
    let codes = [(0, 0), (0, 1), (1, 0), (1, 1)];
    let loss = LossMatrix::from_fn(4, |i, j| {
        let (a, b) = (codes[i], codes[j]);
        rat(i64::from(a.0 != b.0) + i64::from(a.1 != b.1), 2)
    })?;
    Ok(CorpusEntry {
        name: "hamming-2x2".into(),
        description: "Hamming loss on {0,1}^2 averaged over the two coordinates".into(),
        labels: labels.iter().map(|s| s.to_string()).collect(),
        loss,
    })
}

/// All permutations of `1..=m` in lexicographic order.
pub fn permutations(m: usize) -> Vec<Vec<usize>> {
    fn rec(rest: &mut Vec<usize>, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest.is_empty() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..rest.len() {
            let x = rest.remove(i);
            prefix.push(x);
            rec(rest, prefix, out);
            prefix.pop();
            rest.insert(i, x);
        }
    }
    let mut out = Vec::new();
    rec(&mut (1..=m).collect(), &mut Vec::new(), &mut out);
    out
}

/// Hamming loss on permutations of size 3: the fraction of positions where
/// two permutations differ.
pub fn perm_hamming_3() -> Result<CorpusEntry> {
    let perms = permutations(3);
    let loss = LossMatrix::from_fn(perms.len(), |i, j| {
        let diff = perms[i].iter().zip(&perms[j]).filter(|(a, b)| a != b).count();
        rat(diff as i64, 3)
    })?;
    Ok(CorpusEntry {
        name: "perm-hamming-3".into(),
        description: "normalized Hamming loss on the 6 permutations of (1, 2, 3)".into(),
        labels: perms.iter().map(|p| p.iter().map(|d| d.to_string()).collect()).collect(),
        loss,
    })
}

/// `(y − y')²` on the labels 1, 2, 3.
pub fn squared_3() -> Result<CorpusEntry> {
    Ok(CorpusEntry {
        name: "squared-3".into(),
        description: "squared discrete loss (y - y')^2 on the labels 1, 2, 3".into(),
        labels: numbered(3),
        loss: LossMatrix::from_fn(3, |i, j| int((i as i64 - j as i64).pow(2)))?,
    })
}

/// Every built-in entry in listing order.
pub fn all() -> Vec<CorpusEntry> {
    let mut out = Vec::new();
    for k in 2..=6 {
        out.push(zero_one(k).expect("valid"));
    }
    for k in 2..=6 {
        out.push(chain(k).expect("valid"));
    }
    out.push(star(4).expect("valid"));
    out.push(binary_tree_7().expect("valid"));
    out.push(hamming_2x2().expect("valid"));
    out.push(perm_hamming_3().expect("valid"));
    out.push(squared_3().expect("valid"));
    out
}

pub fn names() -> Vec<String> {
    all().into_iter().map(|e| e.name).collect()
}

pub fn lookup(name: &str) -> Result<CorpusEntry> {
    all()
        .into_iter()
        .find(|e| e.name == name)
        .ok_or_else(|| Error::Validation(format!("unknown corpus entry {name:?}; known: {}", names().join(", "))))
}
