use crate::loss::LossMatrix;
use serde::Serialize;

/// Why a loss fails to be a distance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistanceViolation {
    /// `L(y, z) != L(z, y)`.
    Asymmetric {
        #[serde(serialize_with = "crate::one_based::one")]
        y: usize,
        #[serde(serialize_with = "crate::one_based::one")]
        z: usize,
    },
    /// `L(y, y') > L(y, via) + L(via, y')`.
    Triangle {
        #[serde(serialize_with = "crate::one_based::one")]
        y: usize,
        #[serde(serialize_with = "crate::one_based::one")]
        via: usize,
        #[serde(serialize_with = "crate::one_based::one")]
        y_prime: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DistanceCheck {
    pub is_distance: bool,
    pub violation: Option<DistanceViolation>,
}

/// Symmetry and the triangle inequality; zero diagonal and positive
/// off-diagonal entries are guaranteed by [`LossMatrix`].
pub fn is_distance(loss: &LossMatrix) -> DistanceCheck {
    if let Some((y, z)) = loss.asymmetric_pair() {
        return DistanceCheck { is_distance: false, violation: Some(DistanceViolation::Asymmetric { y, z }) };
    }
    let k = loss.k();
    for y in 0..k {
        for yp in y + 1..k {
            for via in (0..k).filter(|&z| z != y && z != yp) {
                if *loss.get(y, yp) > loss.get(y, via) + loss.get(via, yp) {
                    return DistanceCheck {
                        is_distance: false,
                        violation: Some(DistanceViolation::Triangle { y, via, y_prime: yp }),
                    };
                }
            }
        }
    }
    DistanceCheck { is_distance: true, violation: None }
}
