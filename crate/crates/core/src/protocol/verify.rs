use super::{abs_difference, add, cut, subtract, weighted_sum, ScenarioState, Stage, Status, VerificationRecord, EXACT_TOL};
use crate::correlations::{
    conditional_states, dephase, discord, discord_sep_bound, ree, ree_flag_eval_in, BoundReport, Certificate,
    Witness,
};
use crate::error::{Error, Result};
use crate::infotheory::{conditional_entropy, mutual_information};
use crate::linalg::{self, CVector};
use crate::optimize::OptimizerOpts;
use crate::qstate::{CutSpec, DensityMatrix, PureState};
use crate::separability::{ppt_check, NPT_THRESHOLD};

/// Tolerance for "this entanglement vanishes".
const ZERO_TOL: f64 = 1e-9;

fn zero() -> BoundReport {
    BoundReport::exact(0.0, "zero", None)
}

fn require_tripartite(rho: &DensityMatrix) -> Result<()> {
    for l in ["A", "B", "C"] {
        rho.layout().position(l)?;
    }
    if rho.labels().len() != 3 {
        return Err(Error::InvalidCut(format!("expected subsystems A, B, C; got {:?}", rho.labels())));
    }
    Ok(())
}

/// Separability of one stage across a cut, as a record `E <= 0`.
fn vanishing(s: &ScenarioState, stages: &[Stage], c: &CutSpec, name: &str, opts: &OptimizerOpts) -> Result<VerificationRecord> {
    let state = s.stage(stages[0]).expect("first stage exists");
    let verdict = ppt_check(state, c)?;
    if verdict.is_npt {
        let lhs = BoundReport::lower(0.0, "negative partial transpose", Some(Certificate::Witness(Witness::from_verdict(&verdict))));
        let mut r = VerificationRecord::le(name, lhs, zero(), ZERO_TOL);
        r.status = Status::Refuted;
        r.note = format!("entangled: partial transpose eigenvalue {:.6e}", verdict.min_eigenvalue);
        return Ok(r);
    }
    let e = s.invariant_entanglement(stages, c, opts)?;
    let exact = e.is_exact();
    let r = VerificationRecord::le(name, e, zero(), ZERO_TOL);
    Ok(if exact || verdict.exact_criterion {
        r
    } else {
        r.with_note(format!(
            "PPT (min eigenvalue {:.3e}) but no separability certificate on a {} cut",
            verdict.min_eigenvalue,
            c
        ))
    })
}

/// The three conditions for distributing entanglement with a separable
/// carrier: no initial `B:AC` entanglement, `C` separable from `AB` after
/// encoding, and `A:BC` entanglement after encoding (detected by a negative
/// partial transpose).
pub fn check_distribution_conditions(s: &ScenarioState, opts: &OptimizerOpts) -> Result<Vec<VerificationRecord>> {
    let initial = vanishing(s, &[Stage::Alpha, Stage::Beta], &cut(&["B"], &["A", "C"]), "E_B:AC(alpha) = 0", opts)?;
    let carrier = vanishing(s, &[Stage::Beta], &cut(&["C"], &["A", "B"]), "E_C:AB(beta) = 0", opts)?;

    let verdict = ppt_check(&s.beta, &cut(&["A"], &["B", "C"]))?;
    let lhs = BoundReport::exact(
        verdict.min_eigenvalue,
        "min eigenvalue of the A:BC partial transpose",
        Some(Certificate::Witness(Witness::from_verdict(&verdict))),
    );
    let rhs = BoundReport::exact(NPT_THRESHOLD, "NPT threshold", None);
    let created = VerificationRecord::le("A:BC NPT(beta)", lhs, rhs, 0.0);
    Ok(vec![initial, carrier, created])
}

/// `|E_{A:CB} - E_{AC:B}| <= D_{AB|C}`.
pub fn verify_theorem1(rho: &DensityMatrix, opts: &OptimizerOpts) -> Result<VerificationRecord> {
    require_tripartite(rho)?;
    let e_after = ree(rho, &cut(&["A"], &["C", "B"]), opts)?;
    let e_before = ree(rho, &cut(&["A", "C"], &["B"]), opts)?;
    let d = discord(rho, "C", opts)?;
    Ok(VerificationRecord::le(
        "|E_A:CB - E_AC:B| <= D_AB|C",
        abs_difference(&e_after, &e_before),
        d,
        EXACT_TOL,
    ))
}

/// `E_{A:CB}(β) <= E_{AC:B}(α) + D_{AB|C}(β)`.
pub fn verify_eq2(s: &ScenarioState, opts: &OptimizerOpts) -> Result<VerificationRecord> {
    let lhs = s.final_entanglement(opts)?;
    let before = s.initial_entanglement(opts)?;
    let d = discord(&s.beta, "C", opts)?;
    Ok(VerificationRecord::le(
        "E_A:CB(beta) <= E_AC:B(alpha) + D_AB|C(beta)",
        lhs,
        add(&before, &d),
        EXACT_TOL,
    ))
}

/// `E_{A:CB}(β) <= E_{AB:C}(β) + D_{AC|B}(α)`, and `E_{A:BC}(β) <= D_{AC|B}(α)`
/// when the carrier is certified separable after encoding.
pub fn verify_eq6(s: &ScenarioState, opts: &OptimizerOpts) -> Result<Vec<VerificationRecord>> {
    let lhs = s.final_entanglement(opts)?;
    let carrier = s.invariant_entanglement(&[Stage::Beta], &cut(&["A", "B"], &["C"]), opts)?;
    let d = discord(&s.alpha, "B", opts)?;
    let mut out = vec![VerificationRecord::le(
        "E_A:CB(beta) <= E_AB:C(beta) + D_AC|B(alpha)",
        lhs.clone(),
        add(&carrier, &d),
        EXACT_TOL,
    )];
    if carrier.is_exact() && carrier.value.abs() <= ZERO_TOL {
        out.push(VerificationRecord::le(
            "E_A:BC(beta) <= D_AC|B(alpha) [separable carrier]",
            lhs,
            d,
            EXACT_TOL,
        ));
    }
    Ok(out)
}

/// Purifies `ρ_AC` on `B` and checks `E_{A:CB} - E_{AC:B} = -S_{C|A}`.
///
/// The two labels of `rho_ac` are read as `A` and `C` in order. `B` gets
/// dimension `max(rank, 2)`.
pub fn verify_eq4_pure(rho_ac: &DensityMatrix) -> Result<VerificationRecord> {
    if rho_ac.labels().len() != 2 {
        return Err(Error::InvalidCut(format!("expected a bipartite state, got {:?}", rho_ac.labels())));
    }
    let rho_ac = rho_ac.relabeled(&["A", "C"])?;
    let (da, dc) = (rho_ac.dims()[0], rho_ac.dims()[1]);
    let e = rho_ac.eigh();
    let kept: Vec<usize> = (0..e.values.len()).filter(|&k| e.values[k] > 1e-12).collect();
    let db = kept.len().max(2);
    let mut amps = CVector::zeros(da * dc * db);
    for (i, &k) in kept.iter().enumerate() {
        amps += linalg::kron_vec(&e.vector(k), &linalg::basis_vector(db, i)).scale(e.values[k].sqrt());
    }
    let phi = PureState::normalized(&["A", "C", "B"], &[da, dc, db], amps)?.permute_subsystems(&["A", "B", "C"])?;
    let rho = phi.projector();

    let opts = OptimizerOpts::default();
    let after = ree(&rho, &cut(&["A"], &["C", "B"]), &opts)?;
    let before = ree(&rho, &cut(&["A", "C"], &["B"]), &opts)?;
    let s_c_a = conditional_entropy(&rho_ac, &["C"], &["A"])?;
    Ok(VerificationRecord::eq(
        "E_A:CB - E_AC:B = -S_C|A (purification)",
        subtract(&after, &before),
        BoundReport::exact(-s_c_a, "conditional entropy", None),
        EXACT_TOL,
    ))
}

/// `E_{A:CB}(ρ) <= D_{AB|C}(ρ) + Σ p_i E_{A:B}(ρ_i)` with the conditional
/// states of the best measurement on `C` found by the discord search, plus
/// the two flag identities for the dephased state.
pub fn verify_lemma1(rho: &DensityMatrix, opts: &OptimizerOpts) -> Result<Vec<VerificationRecord>> {
    require_tripartite(rho)?;
    let lhs = ree(rho, &cut(&["A"], &["C", "B"]), opts)?;
    let d = discord(rho, "C", opts)?;
    let Some(Certificate::Measurement(basis)) = d.certificate.clone() else {
        return Err(Error::Precondition("discord search returned no measurement".into()));
    };
    let ab = cut(&["A"], &["B"]);
    let mut parts = Vec::new();
    for (p, state) in conditional_states(rho, &basis)? {
        if let Some(state) = state {
            parts.push((p, ree(&state, &ab, opts)?));
        }
    }
    let branch_sum = weighted_sum(&parts, "conditional A:B entanglement after measuring C");
    let main = VerificationRecord::le(
        "E_A:CB <= D_AB|C + sum_i p_i E_A:B(rho_i)",
        lhs,
        add(&d, &branch_sum),
        EXACT_TOL,
    );

    let dephased = dephase(rho, &basis)?;
    let after = ree_flag_eval_in(&dephased, &basis, &cut(&["A"], &["C", "B"]), opts)?;
    let before = ree_flag_eval_in(&dephased, &basis, &cut(&["A", "C"], &["B"]), opts)?;
    Ok(vec![
        main,
        VerificationRecord::eq("sum_i p_i E_A:B(rho_i) = E_A:CB(Pi rho)", branch_sum, after.clone(), EXACT_TOL),
        VerificationRecord::eq("E_A:CB(Pi rho) = E_AC:B(Pi rho)", after, before, EXACT_TOL),
    ])
}

/// `E_{A:CB}(β) - E_{AC:B}(α) <= (1 - 1/d_tot^2) log2 d_C` for a carrier
/// certified separable from `AB`.
pub fn verify_theorem4(s: &ScenarioState, opts: &OptimizerOpts) -> Result<VerificationRecord> {
    let carrier = s.invariant_entanglement(&[Stage::Beta], &cut(&["A", "B"], &["C"]), opts)?;
    if !(carrier.is_exact() && carrier.value.abs() <= ZERO_TOL) {
        return Err(Error::Precondition(format!(
            "carrier not certified separable from AB (E_AB:C = {:.3e}, {})",
            carrier.value, carrier.direction
        )));
    }
    let gain = subtract(&s.final_entanglement(opts)?, &s.initial_entanglement(opts)?);
    let (dc, dtot) = (s.carrier_dim(), s.total_dim());
    let bound = BoundReport::exact(
        discord_sep_bound(dtot / dc, dc),
        &format!("(1 - 1/{dtot}^2) log2 {dc}"),
        None,
    );
    Ok(VerificationRecord::le(
        "E_A:CB(beta) - E_AC:B(alpha) <= (1 - 1/d_tot^2) log2 d_C",
        gain,
        bound,
        EXACT_TOL,
    ))
}

/// `I_{A:CB} - I_{AC:B} <= I_{AB:C}`.
pub fn verify_minfo_chain(rho: &DensityMatrix) -> Result<VerificationRecord> {
    require_tripartite(rho)?;
    let i = |c: CutSpec| -> Result<BoundReport> {
        Ok(BoundReport::exact(mutual_information(rho, &c)?, &format!("I({c})"), None))
    };
    let lhs = subtract(&i(cut(&["A"], &["C", "B"]))?, &i(cut(&["A", "C"], &["B"]))?);
    Ok(VerificationRecord::le("I_A:CB - I_AC:B <= I_AB:C", lhs, i(cut(&["A", "B"], &["C"]))?, EXACT_TOL))
}
