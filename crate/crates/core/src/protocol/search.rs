use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::cut;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::optimize::derive_seed;
use crate::qstate::{random, DensityMatrix, UnitaryOp};
use crate::separability::ppt_check;

#[derive(Debug, Clone, Copy)]
pub struct CarrierSearchOpts {
    pub trials: usize,
    pub seed: u64,
    /// Draw the conditional states of `B` diagonal, making `α` fully classical.
    pub classical_b: bool,
}

/// An instance whose carrier passed the PPT test against `AB` while `A:BC`
/// came out NPT.
#[derive(Debug, Clone, Serialize)]
pub struct SearchCandidate {
    pub trial: usize,
    pub encoding_family: &'static str,
    pub carrier_min_eigenvalue: f64,
    pub a_bc_min_eigenvalue: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CarrierSearchReport {
    pub trials: usize,
    pub seed: u64,
    pub classical_b: bool,
    /// Trials in which `C:AB` of `β` was PPT.
    pub carrier_ppt: usize,
    /// Trials in which `A:BC` of `β` was NPT.
    pub a_bc_npt: usize,
    pub candidates: Vec<SearchCandidate>,
}

struct Trial {
    family: &'static str,
    carrier_min: f64,
    a_bc_min: f64,
    carrier_ppt: bool,
    a_bc_npt: bool,
}

/// Controlled unitary `Σ_a |a><a| ⊗ V_a` for the orthonormal columns of `basis`.
fn controlled(basis: &CMatrix, rng: &mut impl Rng) -> CMatrix {
    let mut u = CMatrix::zeros(4, 4);
    for a in 0..2 {
        let col = basis.column(a).into_owned();
        let proj = linalg::projector(&col);
        u += linalg::kron(&proj, &random::unitary_matrix(2, rng));
    }
    u
}

fn trial(index: usize, opts: &CarrierSearchOpts) -> Result<Trial> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(opts.seed, index as u64));
    let weights = random::simplex_point(2, &mut rng);
    let a_basis = random::unitary_matrix(2, &mut rng);
    let mut parts = Vec::with_capacity(2);
    for (a, &p) in weights.iter().enumerate() {
        let flag = linalg::projector(&a_basis.column(a).into_owned());
        let b_state = if opts.classical_b {
            DensityMatrix::from_diagonal(&["B"], &[2], &random::simplex_point(2, &mut rng))?
        } else {
            random::mixed_state(&["B"], &[2], &mut rng)
        };
        parts.push((p, DensityMatrix::new(&["A"], &[2], flag)?.tensor(&b_state)?));
    }
    let refs: Vec<(f64, &DensityMatrix)> = parts.iter().map(|(p, s)| (*p, s)).collect();
    let alpha_ab = DensityMatrix::mixture(&refs)?;
    let carrier = random::pure_state(&["C"], &[2], &mut rng).projector();
    let alpha = alpha_ab.tensor(&carrier)?;

    // mostly Haar, plus controlled unitaries that can leave the carrier unentangled
    let (family, m) = match index % 4 {
        0 | 1 => ("haar", random::unitary_matrix(4, &mut rng)),
        2 => ("controlled, random basis", controlled(&random::unitary_matrix(2, &mut rng), &mut rng)),
        _ => ("controlled, classical basis", controlled(&a_basis, &mut rng)),
    };
    let encoding = UnitaryOp::new(&["A", "C"], &[2, 2], m)?;
    let beta = alpha.apply_unitary(&encoding)?;

    let c_ab = ppt_check(&beta, &cut(&["C"], &["A", "B"]))?;
    let a_bc = ppt_check(&beta, &cut(&["A"], &["B", "C"]))?;
    Ok(Trial {
        family,
        carrier_min: c_ab.min_eigenvalue,
        a_bc_min: a_bc.min_eigenvalue,
        carrier_ppt: !c_ab.is_npt,
        a_bc_npt: a_bc.is_npt,
    })
}

/// Randomized search for entanglement created by a separable carrier from a
/// qubit `A` that is classical towards a qubit `B`, a pure carrier, and a
/// unitary encoding. Instances with `C:AB` PPT and `A:BC` NPT are listed as
/// candidates; none are expected.
pub fn theorem3_search(opts: &CarrierSearchOpts) -> Result<CarrierSearchReport> {
    if opts.trials == 0 {
        return Err(Error::OutOfRange("trials must be at least 1".into()));
    }
    let results: Vec<Trial> = (0..opts.trials)
        .into_par_iter()
        .map(|i| trial(i, opts))
        .collect::<Result<_>>()?;
    let candidates = results
        .iter()
        .enumerate()
        .filter(|(_, t)| t.carrier_ppt && t.a_bc_npt)
        .map(|(i, t)| SearchCandidate {
            trial: i,
            encoding_family: t.family,
            carrier_min_eigenvalue: t.carrier_min,
            a_bc_min_eigenvalue: t.a_bc_min,
        })
        .collect();
    Ok(CarrierSearchReport {
        trials: opts.trials,
        seed: opts.seed,
        classical_b: opts.classical_b,
        carrier_ppt: results.iter().filter(|t| t.carrier_ppt).count(),
        a_bc_npt: results.iter().filter(|t| t.a_bc_npt).count(),
        candidates,
    })
}
