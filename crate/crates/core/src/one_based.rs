//! Serializers that print 0-based output indices as 1-based labels.

use serde::Serializer;

pub fn one<S: Serializer>(y: &usize, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_u64(*y as u64 + 1)
}



pub fn pairs<S: Serializer>(ps: &[(usize, usize)], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(ps.iter().map(|(a, b)| [a + 1, b + 1]))
}

pub fn triple<S: Serializer>(t: &[usize; 3], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(t.iter().map(|y| y + 1))
}

