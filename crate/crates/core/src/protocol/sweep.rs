use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{
    cut, run_scenario, theorem3_search, verify_eq2, verify_eq4_pure, verify_eq6, verify_lemma1, verify_minfo_chain,
    verify_theorem1, verify_theorem4, CarrierSearchOpts, CarrierSearchReport, ScenarioState, SeparabilityHint, Stage,
    Status, VerificationRecord,
};
use crate::correlations::{BoundReport, Certificate, SeparableEnsemble};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::optimize::{derive_seed, OptimizerOpts};
use crate::qstate::{random, DensityMatrix, PureState, UnitaryOp};

/// A family of random instances checked by one verifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    /// Random pure three-qubit states.
    Theorem1,
    /// Steps that keep the carrier classical: `α` flagged on `C`, encoding
    /// controlled by `C`.
    Eq2,
    /// Random two-qubit `ρ_AC`, purified.
    Eq4,
    /// `α` flagged on `B`, random encoding.
    Eq6,
    /// Random mixed three-qubit states.
    Eq7,
    /// Random pure three-qubit states.
    Lemma1,
    /// Separable-carrier falsification search.
    Theorem3,
    /// Random carriers separable from `AB` by construction.
    Theorem4,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::Theorem1,
        Suite::Eq2,
        Suite::Eq4,
        Suite::Eq6,
        Suite::Eq7,
        Suite::Lemma1,
        Suite::Theorem3,
        Suite::Theorem4,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Theorem1 => "theorem1",
            Suite::Eq2 => "eq2",
            Suite::Eq4 => "eq4",
            Suite::Eq6 => "eq6",
            Suite::Eq7 => "eq7",
            Suite::Lemma1 => "lemma1",
            Suite::Theorem3 => "theorem3",
            Suite::Theorem4 => "theorem4",
        }
    }

    /// Instances per run when none are requested; the numeric suites are
    /// kept small.
    pub fn default_n(self) -> usize {
        match self {
            Suite::Theorem1 | Suite::Eq7 => 500,
            Suite::Eq4 => 200,
            Suite::Lemma1 => 100,
            Suite::Eq2 | Suite::Eq6 => 10,
            Suite::Theorem3 => 1000,
            Suite::Theorem4 => 2,
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::OutOfRange(format!("unknown suite `{s}`")))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub instances: usize,
    pub seed: u64,
    /// Records in instance order.
    pub records: Vec<VerificationRecord>,
    pub certified: usize,
    pub supported: usize,
    /// Records that are neither certified nor supported.
    pub failed: usize,
    pub worst_slack: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub search: Option<CarrierSearchReport>,
}

impl SuiteReport {
    fn new(suite: Suite, instances: usize, seed: u64, records: Vec<VerificationRecord>) -> Self {
        let count = |f: &dyn Fn(&VerificationRecord) -> bool| records.iter().filter(|r| f(r)).count();
        let certified = count(&|r| r.status == Status::Certified);
        let supported = count(&|r| r.status == Status::Supported);
        let failed = count(&|r| !r.ok());
        let worst_slack = records
            .iter()
            .map(|r| match r.relation {
                super::Relation::Le => r.slack,
                super::Relation::Eq => -r.slack.abs(),
            })
            .fold(f64::INFINITY, f64::min);
        Self {
            suite,
            instances,
            seed,
            records,
            certified,
            supported,
            failed,
            worst_slack,
            search: None,
        }
    }

    pub fn all_ok(&self) -> bool {
        self.failed == 0
    }
}

fn rng_for(seed: u64, i: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, i as u64))
}

/// `Σ_k kron(V_k, |k><k|)`: `V_k` on the first factor controlled by the second.
fn controlled_by_second(us: &[CMatrix]) -> CMatrix {
    let d = us.len();
    let mut out = CMatrix::zeros(us[0].nrows() * d, us[0].nrows() * d);
    for (k, u) in us.iter().enumerate() {
        out += linalg::kron(u, &linalg::projector(&linalg::basis_vector(d, k)));
    }
    out
}

/// `Σ_k p_k ρ_k ⊗ |k><k|_{flag}` with random two-qubit `ρ_k`, labels in
/// `[a, b, flag]` order.
fn flagged(labels: [&str; 2], flag: &str, rng: &mut ChaCha8Rng) -> Result<DensityMatrix> {
    let w = random::simplex_point(2, rng);
    let mut parts = Vec::new();
    for (k, &p) in w.iter().enumerate() {
        let rho = random::mixed_state(&labels, &[2, 2], rng);
        parts.push((p, rho.tensor(&PureState::basis(&[flag], &[2], &[k])?.projector())?));
    }
    let refs: Vec<(f64, &DensityMatrix)> = parts.iter().map(|(p, s)| (*p, s)).collect();
    DensityMatrix::mixture(&refs)
}

fn classical_carrier_instance(rng: &mut ChaCha8Rng) -> Result<ScenarioState> {
    let alpha = flagged(["A", "B"], "C", rng)?.permute_subsystems(&["A", "B", "C"])?;
    let m = controlled_by_second(&[random::unitary_matrix(2, rng), random::unitary_matrix(2, rng)]);
    run_scenario(alpha, UnitaryOp::new(&["A", "C"], &[2, 2], m)?, None)
}

fn flagged_receiver_instance(rng: &mut ChaCha8Rng) -> Result<ScenarioState> {
    let alpha = flagged(["A", "C"], "B", rng)?.permute_subsystems(&["A", "B", "C"])?;
    run_scenario(alpha, random::unitary(&["A", "C"], &[2, 2], rng), None)
}

fn separable_carrier_instance(rng: &mut ChaCha8Rng) -> Result<ScenarioState> {
    let k = 3;
    let weights = random::simplex_point(k, rng);
    let members: Vec<(PureState, PureState)> = (0..k)
        .map(|_| {
            (
                random::pure_state(&["A", "B"], &[2, 2], rng),
                random::pure_state(&["C"], &[2], rng),
            )
        })
        .collect();
    let ensemble = SeparableEnsemble::new(cut(&["A", "B"], &["C"]), weights, members)?;
    let beta = ensemble.assemble()?;
    let u = random::unitary(&["A", "C"], &[2, 2], rng);
    let alpha = beta.apply_unitary(&u.adjoint())?;
    run_scenario(alpha, u, None)?.with_hint(SeparabilityHint {
        stage: Stage::Beta,
        cut: cut(&["A", "B"], &["C"]),
        evidence: Certificate::Ensemble(ensemble),
    })
}

fn instance(suite: Suite, i: usize, seed: u64, opts: &OptimizerOpts) -> Result<Vec<VerificationRecord>> {
    let mut rng = rng_for(seed, i);
    let abc = ["A", "B", "C"];
    let qubits = [2, 2, 2];
    let mut records = match suite {
        Suite::Theorem1 => vec![verify_theorem1(&random::pure_state(&abc, &qubits, &mut rng).projector(), opts)?],
        Suite::Eq2 => vec![verify_eq2(&classical_carrier_instance(&mut rng)?, opts)?],
        Suite::Eq4 => vec![verify_eq4_pure(&random::mixed_state(&["A", "C"], &[2, 2], &mut rng))?],
        Suite::Eq6 => verify_eq6(&flagged_receiver_instance(&mut rng)?, opts)?,
        Suite::Eq7 => vec![verify_minfo_chain(&random::mixed_state(&abc, &qubits, &mut rng))?],
        Suite::Lemma1 => verify_lemma1(&random::pure_state(&abc, &qubits, &mut rng).projector(), opts)?,
        Suite::Theorem4 => vec![verify_theorem4(&separable_carrier_instance(&mut rng)?, opts)?],
        Suite::Theorem3 => unreachable!("handled by the search"),
    };
    for r in &mut records {
        r.name = format!("{}#{i}: {}", suite.name(), r.name);
    }
    Ok(records)
}

/// Runs `n` seeded random instances of a suite in parallel; records come
/// back in instance order.
pub fn run_suite(suite: Suite, n: usize, seed: u64, opts: &OptimizerOpts) -> Result<SuiteReport> {
    if n == 0 {
        return Err(Error::OutOfRange("at least one instance is required".into()));
    }
    if suite == Suite::Theorem3 {
        let search = theorem3_search(&CarrierSearchOpts {
            trials: n,
            seed,
            classical_b: false,
        })?;
        let found = search.candidates.len() as f64;
        let record = VerificationRecord::le(
            "theorem3: counterexample candidates = 0",
            BoundReport::exact(found, "C:AB PPT and A:BC NPT instances", None),
            BoundReport::exact(0.0, "zero", None),
            0.0,
        )
        .with_note(format!(
            "{} trials, {} with C:AB PPT, {} with A:BC NPT",
            search.trials, search.carrier_ppt, search.a_bc_npt
        ));
        let mut report = SuiteReport::new(suite, n, seed, vec![record]);
        report.search = Some(search);
        return Ok(report);
    }
    let per_instance: Vec<Vec<VerificationRecord>> = (0..n)
        .into_par_iter()
        .map(|i| instance(suite, i, seed, opts))
        .collect::<Result<_>>()?;
    Ok(SuiteReport::new(suite, n, seed, per_instance.into_iter().flatten().collect()))
}
