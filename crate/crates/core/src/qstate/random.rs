//! Seeded random states and unitaries for sweeps and property tests.

use rand::Rng;
use rand_distr::StandardNormal;

use super::{DensityMatrix, Layout, PureState, UnitaryOp};
use crate::linalg::{self, CMatrix, CVector};

pub fn gaussian_vector(dim: usize, rng: &mut impl Rng) -> CVector {
    CVector::from_fn(dim, |_, _| {
        linalg::c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

pub fn ginibre(rows: usize, cols: usize, rng: &mut impl Rng) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        linalg::c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Unit vector with Haar-distributed direction.
pub fn unit_vector(dim: usize, rng: &mut impl Rng) -> CVector {
    let v = gaussian_vector(dim, rng);
    let n = v.norm();
    v.unscale(n)
}

pub fn pure_state<S: AsRef<str>>(labels: &[S], dims: &[usize], rng: &mut impl Rng) -> PureState {
    let layout = Layout::new(labels, dims).expect("valid layout");
    PureState::new(labels, dims, unit_vector(layout.total_dim(), rng)).expect("unit vector")
}

/// Hilbert-Schmidt distributed mixed state, `G G† / Tr(G G†)` with square Ginibre `G`.
pub fn mixed_state<S: AsRef<str>>(labels: &[S], dims: &[usize], rng: &mut impl Rng) -> DensityMatrix {
    let layout = Layout::new(labels, dims).expect("valid layout");
    let n = layout.total_dim();
    mixed_state_with_rank(labels, dims, n, rng)
}

pub fn mixed_state_with_rank<S: AsRef<str>>(
    labels: &[S],
    dims: &[usize],
    rank: usize,
    rng: &mut impl Rng,
) -> DensityMatrix {
    let layout = Layout::new(labels, dims).expect("valid layout");
    let g = ginibre(layout.total_dim(), rank.max(1), rng);
    let m = &g * g.adjoint();
    let tr = linalg::trace(&m).re;
    DensityMatrix::from_parts(layout, m.unscale(tr))
}

/// Haar-random unitary matrix: QR of a Ginibre matrix with the phase fix.
pub fn unitary_matrix(dim: usize, rng: &mut impl Rng) -> CMatrix {
    let g = ginibre(dim, dim, rng);
    let mut cols: Vec<CVector> = Vec::with_capacity(dim);
    for j in 0..dim {
        let mut w: CVector = g.column(j).into_owned();
        for _ in 0..2 {
            for q in &cols {
                let overlap = q.dotc(&w);
                w -= q * overlap;
            }
        }
        let n = w.norm();
        cols.push(w.unscale(n));
    }
    CMatrix::from_columns(&cols)
}

pub fn unitary<S: AsRef<str>>(labels: &[S], dims: &[usize], rng: &mut impl Rng) -> UnitaryOp {
    let n = dims.iter().product();
    UnitaryOp::new(labels, dims, unitary_matrix(n, rng)).expect("orthonormalized columns")
}

/// Point uniform on the probability simplex.
pub fn simplex_point(k: usize, rng: &mut impl Rng) -> Vec<f64> {
    let mut w: Vec<f64> = (0..k)
        .map(|_| -rng.random_range(f64::MIN_POSITIVE..1.0).ln())
        .collect();
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= s);
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn samples_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let rho = mixed_state(&["A", "B", "C"], &[2, 2, 2], &mut rng);
            let d = super::super::defects(rho.matrix()).unwrap();
            assert!(d.hermiticity < 1e-12 && d.trace < 1e-12 && d.min_eigenvalue > -1e-12);
            let u = unitary_matrix(8, &mut rng);
            assert!(linalg::unitarity_defect(&u) < 1e-12);
            let w = simplex_point(5, &mut rng);
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
