use serde::Serialize;

use super::cut;
use crate::correlations::{conditional_states, MeasurementBasis};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};
use crate::qstate::{DensityMatrix, PureState, UnitaryOp};
use crate::separability::{ppt_check, schmidt, PptVerdict};

/// One outcome of the computational-basis measurement on `C`.
#[derive(Debug, Clone, Serialize)]
pub struct MeasurementBranch {
    pub outcome: usize,
    pub probability: f64,
    #[serde(skip)]
    pub conditional_ab: Option<DensityMatrix>,
}

#[derive(Debug, Clone)]
pub struct LocalizationResult {
    pub localizing_unitary: UnitaryOp,
    /// Probability of outcome 0 on `C`.
    pub outcome_probability: f64,
    pub conditional_ab: DensityMatrix,
    /// `A:B` partial-transpose verdict of `conditional_ab`.
    pub verdict: PptVerdict,
    /// `β` after the localizing unitary, labels `A, B, C`.
    pub transformed: DensityMatrix,
    /// All outcomes, including 0.
    pub branches: Vec<MeasurementBranch>,
}

/// Moves `A:BC` entanglement onto `A:B`.
///
/// The eigenvector `ψ` of the most negative eigenvalue of `β^{T_A}` is
/// Schmidt decomposed as `Σ a_j |a_j>|ā_j>`; the unitary on `BC` sends
/// `|ā_j>` to `|j>_B |0>_C` and the rest of a Gram-Schmidt completion to the
/// remaining basis states in increasing order. Measuring `C` and keeping
/// outcome 0 leaves an `AB` state with a negative partial transpose.
pub fn localize(beta: &DensityMatrix) -> Result<LocalizationResult> {
    let beta = beta.permute_subsystems(&["A", "B", "C"])?;
    let (da, db, dc) = (beta.dims()[0], beta.dims()[1], beta.dims()[2]);
    if db < da {
        return Err(Error::Precondition(format!("localization needs d_B >= d_A, got d_B = {db}, d_A = {da}")));
    }
    let a_bc = cut(&["A"], &["B", "C"]);
    let verdict = ppt_check(&beta, &a_bc)?;
    if !verdict.is_npt {
        return Err(Error::Precondition(format!(
            "A:BC partial transpose is not negative (min eigenvalue {:.3e})",
            verdict.min_eigenvalue
        )));
    }

    let psi = PureState::normalized(beta.labels(), beta.dims(), verdict.witness_vector.clone())?;
    let sd = schmidt(&psi, &a_bc)?;
    let dbc = db * dc;
    let seeds: Vec<CVector> = sd.right_vectors.clone();
    let v = linalg::complete_basis(&seeds, dbc);

    // targets: |j>_B |0>_C for the Schmidt vectors, then the unused indices
    let mut targets: Vec<usize> = (0..seeds.len()).map(|j| j * dc).collect();
    targets.extend((0..dbc).filter(|t| !targets.contains(t)).collect::<Vec<_>>());
    let mut perm = CMatrix::zeros(dbc, dbc);
    for (k, &t) in targets.iter().enumerate() {
        perm[(t, k)] = linalg::ONE;
    }
    let u = UnitaryOp::new(&["B", "C"], &[db, dc], perm * v.adjoint())?;

    let transformed = beta.apply_unitary(&u)?;
    let outcomes = conditional_states(&transformed, &MeasurementBasis::computational("C", dc))?;
    let branches: Vec<MeasurementBranch> = outcomes
        .into_iter()
        .enumerate()
        .map(|(outcome, (probability, conditional_ab))| MeasurementBranch {
            outcome,
            probability,
            conditional_ab,
        })
        .collect();
    let first = &branches[0];
    let conditional_ab = first
        .conditional_ab
        .clone()
        .ok_or_else(|| Error::Precondition("outcome 0 has zero probability".into()))?;
    let ab_verdict = ppt_check(&conditional_ab, &cut(&["A"], &["B"]))?;
    Ok(LocalizationResult {
        localizing_unitary: u,
        outcome_probability: first.probability,
        conditional_ab,
        verdict: ab_verdict,
        transformed,
        branches,
    })
}

impl LocalizationResult {
    /// `Σ_c p_c ρ_c ⊗ |c><c|`, the post-measurement state of `ABC`.
    pub fn reassembled(&self) -> Result<DensityMatrix> {
        let dc = self.transformed.dims()[2];
        let mut parts = Vec::new();
        for b in &self.branches {
            let Some(state) = &b.conditional_ab else { continue };
            let flag = PureState::basis(&["C"], &[dc], &[b.outcome])?.projector();
            parts.push((b.probability, state.tensor(&flag)?));
        }
        let refs: Vec<(f64, &DensityMatrix)> = parts.iter().map(|(p, s)| (*p, s)).collect();
        DensityMatrix::mixture(&refs)
    }
}
