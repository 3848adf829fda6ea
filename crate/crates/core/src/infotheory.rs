//! Entropic quantities, all in bits.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::qstate::{CutSpec, DensityMatrix};

/// Eigenvalues below this are treated as exact zeros inside logarithms.
pub const EIGEN_FLOOR: f64 = 1e-12;
/// Weight of the first argument outside the support of the second beyond
/// which the relative entropy is infinite.
pub const SUPPORT_TOL: f64 = 1e-9;

/// Quantum relative entropy, with an explicit infinite value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RelEntropy {
    Finite(f64),
    Infinite,
}

impl RelEntropy {
    pub fn is_finite(&self) -> bool {
        matches!(self, RelEntropy::Finite(_))
    }

    pub fn finite(&self) -> Option<f64> {
        match *self {
            RelEntropy::Finite(v) => Some(v),
            RelEntropy::Infinite => None,
        }
    }

    /// `f64::INFINITY` for the infinite case.
    pub fn to_f64(&self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}

impl fmt::Display for RelEntropy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RelEntropy::Finite(v) => write!(f, "{v}"),
            RelEntropy::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for RelEntropy {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            RelEntropy::Finite(v) => s.serialize_f64(*v),
            RelEntropy::Infinite => s.serialize_str("inf"),
        }
    }
}

/// `-Σ p log2 p` over a spectrum, with the eigenvalue floor applied.
pub fn spectrum_entropy(values: &[f64]) -> f64 {
    let h: f64 = values
        .iter()
        .filter(|&&p| p > EIGEN_FLOOR)
        .map(|&p| -p * p.log2())
        .sum();
    h.max(0.0)
}

/// Binary entropy `h(x)`.
pub fn binary_entropy(x: f64) -> f64 {
    spectrum_entropy(&[x, 1.0 - x])
}

pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    spectrum_entropy(&rho.eigenvalues())
}

/// `S(ρ‖σ) = -S(ρ) - Tr(ρ log2 σ)`, evaluated in the eigenbasis of `σ`.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<RelEntropy> {
    let sigma = sigma.aligned_to(rho.layout()).map_err(|_| {
        Error::DimensionMismatch(format!(
            "relative entropy between states on {:?} and {:?}",
            rho.labels(),
            sigma.labels()
        ))
    })?;
    if sigma.dims() != rho.dims() {
        return Err(Error::DimensionMismatch(format!(
            "dims {:?} vs {:?}",
            rho.dims(),
            sigma.dims()
        )));
    }
    let e = sigma.eigh();
    let m = rho.matrix();
    let mut cross = 0.0;
    for (k, &lambda) in e.values.iter().enumerate() {
        let v = e.vectors.column(k);
        let weight = (v.adjoint() * m * v)[(0, 0)].re;
        if lambda < EIGEN_FLOOR {
            if weight > SUPPORT_TOL {
                return Ok(RelEntropy::Infinite);
            }
            continue;
        }
        cross += weight * lambda.log2();
    }
    let value = -von_neumann_entropy(rho) - cross;
    Ok(RelEntropy::Finite(value.max(0.0)))
}

/// `S(ρ_left) + S(ρ_right) - S(ρ)`.
pub fn mutual_information(rho: &DensityMatrix, cut: &CutSpec) -> Result<f64> {
    cut.validate(rho.layout())?;
    let left = rho.partial_trace(&cut.left)?;
    let right = rho.partial_trace(&cut.right)?;
    let i = von_neumann_entropy(&left) + von_neumann_entropy(&right) - von_neumann_entropy(rho);
    Ok(i.max(0.0))
}

/// `S(ρ_{of ∪ given}) - S(ρ_given)`; may be negative.
pub fn conditional_entropy<S: AsRef<str>>(rho: &DensityMatrix, of: &[S], given: &[S]) -> Result<f64> {
    if of.is_empty() {
        return Err(Error::InvalidCut("conditional entropy of an empty set".into()));
    }
    if let Some(l) = of.iter().find(|l| given.iter().any(|g| g.as_ref() == l.as_ref())) {
        return Err(Error::InvalidCut(format!(
            "label `{}` is on both sides of the conditioning bar",
            l.as_ref()
        )));
    }
    let joint: Vec<&str> = of.iter().chain(given).map(|s| s.as_ref()).collect();
    let s_joint = von_neumann_entropy(&rho.partial_trace(&joint)?);
    let s_given = if given.is_empty() {
        0.0
    } else {
        von_neumann_entropy(&rho.partial_trace(given)?)
    };
    Ok(s_joint - s_given)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{random, PureState};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn diag(labels: &[&str], d: &[f64]) -> DensityMatrix {
        DensityMatrix::from_diagonal(labels, &vec![2; labels.len()], d).unwrap()
    }

    #[test]
    fn entropy_examples() {
        assert!((von_neumann_entropy(&diag(&["A"], &[0.5, 0.5])) - 1.0).abs() < 1e-14);
        let pure = PureState::phi_plus("A", "B").projector();
        assert!(von_neumann_entropy(&pure).abs() < 1e-12);
        // -(1/4)log2(1/4) - (3/4)log2(3/4) = 1/2 + (3/4)(2 - log2 3)
        let oracle = 0.5 + 0.75 * (2.0 - 3f64.log2());
        assert!((oracle - 0.811_278_124_459_132_8).abs() < 1e-15);
        assert!((von_neumann_entropy(&diag(&["A"], &[0.25, 0.75])) - oracle).abs() < 1e-14);
    }

    #[test]
    fn relative_entropy_examples() {
        let zero = diag(&["A"], &[1.0, 0.0]);
        let one = diag(&["A"], &[0.0, 1.0]);
        let mixed = diag(&["A"], &[0.5, 0.5]);
        assert_eq!(relative_entropy(&zero, &zero).unwrap(), RelEntropy::Finite(0.0));
        let r = relative_entropy(&zero, &mixed).unwrap().finite().unwrap();
        assert!((r - 1.0).abs() < 1e-14);
        assert_eq!(relative_entropy(&zero, &one).unwrap(), RelEntropy::Infinite);
        assert!(relative_entropy(&zero, &diag(&["A", "B"], &[1.0, 0.0, 0.0, 0.0])).is_err());
    }

    #[test]
    fn mutual_information_examples() {
        let cut = CutSpec::parse("A:B").unwrap();
        let product = diag(&["A"], &[0.3, 0.7]).tensor(&diag(&["B"], &[0.6, 0.4])).unwrap();
        assert!(mutual_information(&product, &cut).unwrap().abs() < 1e-12);
        let bell = PureState::phi_plus("A", "B").projector();
        assert!((mutual_information(&bell, &cut).unwrap() - 2.0).abs() < 1e-12);
        let classical = diag(&["A", "B"], &[0.5, 0.0, 0.0, 0.5]);
        assert!((mutual_information(&classical, &cut).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn conditional_entropy_examples() {
        let bell = PureState::phi_plus("A", "C").projector();
        assert!((conditional_entropy(&bell, &["C"], &["A"]).unwrap() + 1.0).abs() < 1e-12);
        let mixed = DensityMatrix::maximally_mixed(&["A", "C"], &[2, 2]).unwrap();
        assert!((conditional_entropy(&mixed, &["C"], &["A"]).unwrap() - 1.0).abs() < 1e-12);
        assert!(conditional_entropy(&mixed, &["C"], &["C"]).is_err());
    }

    #[test]
    fn conditional_entropies_of_pure_states_are_opposite() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..50 {
            let rho = random::pure_state(&["A", "B", "C"], &[2, 2, 2], &mut rng).projector();
            let cb = conditional_entropy(&rho, &["C"], &["B"]).unwrap();
            let ca = conditional_entropy(&rho, &["C"], &["A"]).unwrap();
            assert!((cb + ca).abs() < 1e-10);
        }
    }

    #[test]
    fn mutual_information_is_a_relative_entropy() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let cut = CutSpec::parse("A:BC").unwrap();
        for _ in 0..20 {
            let rho = random::mixed_state(&["A", "B", "C"], &[2, 2, 2], &mut rng);
            let product = rho
                .partial_trace(&["A"])
                .unwrap()
                .tensor(&rho.partial_trace(&["B", "C"]).unwrap())
                .unwrap();
            let d = relative_entropy(&rho, &product).unwrap().finite().unwrap();
            assert!((d - mutual_information(&rho, &cut).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn entropy_is_unitarily_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..20 {
            let rho = random::mixed_state(&["A", "B", "C"], &[2, 2, 2], &mut rng);
            let u = random::unitary(&["C", "A"], &[2, 2], &mut rng);
            let s0 = von_neumann_entropy(&rho);
            let s1 = von_neumann_entropy(&rho.apply_unitary(&u).unwrap());
            let s2 = von_neumann_entropy(&rho.permute_subsystems(&["C", "A", "B"]).unwrap());
            assert!((s0 - s1).abs() < 1e-9 && (s0 - s2).abs() < 1e-9);
        }
    }
}
