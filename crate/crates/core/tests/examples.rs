use carrier::correlations::Direction;
use carrier::examples::*;
use carrier::infotheory::binary_entropy;
use carrier::optimize::OptimizerOpts;
use carrier::protocol::Status;
use carrier::qstate::{DensityMatrix, PureState, StateFile};
use carrier::separability::example1_admissible;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn fast() -> OptimizerOpts {
    OptimizerOpts {
        restarts: 8,
        ..OptimizerOpts::default()
    }
}

fn proj(labels: &[&str], bits: &[usize]) -> DensityMatrix {
    PureState::basis(labels, &vec![2; labels.len()], bits).unwrap().projector()
}

/// `1/3 φ⁺ ⊗ |0><0| + 2/3 (p 1/4 + (1-p)(|00><00| + |11><11|)/2) ⊗ |1><1|`,
/// assembled from its parts.
fn final_state_oracle(p: f64) -> DensityMatrix {
    let phi = PureState::phi_plus("A", "B").projector();
    let mixed = DensityMatrix::maximally_mixed(&["A", "B"], &[2, 2]).unwrap();
    let diag = DensityMatrix::mixture(&[(0.5, &proj(&["A", "B"], &[0, 0])), (0.5, &proj(&["A", "B"], &[1, 1]))]).unwrap();
    let sep = DensityMatrix::mixture(&[(p, &mixed), (1.0 - p, &diag)]).unwrap();
    let a = phi.tensor(&proj(&["C"], &[0])).unwrap();
    let b = sep.tensor(&proj(&["C"], &[1])).unwrap();
    DensityMatrix::mixture(&[(1.0 / 3.0, &a), (2.0 / 3.0, &b)]).unwrap()
}

#[test]
fn cubitt_protocol() {
    let run = cubitt_run(&OptimizerOpts::default()).unwrap();
    assert!(run.report.all_ok());
    assert_eq!(run.final_entanglement.direction, Direction::Exact);
    assert!((run.final_entanglement.value - 1.0 / 3.0).abs() < 1e-9);
    assert!((run.outcome_probability - 1.0 / 3.0).abs() < 1e-9);
    assert!(run.phi_plus_fidelity > 1.0 - 1e-9);
    let gamma = run.scenario.gamma.as_ref().unwrap();
    assert!(gamma.max_abs_diff(&final_state_oracle(1.0)).unwrap() < 1e-12);
    assert!(run.report.record("E_final = 1/3").unwrap().pass);
}

#[test]
fn cubitt_carrier_marginal() {
    let c = cubitt_state().partial_trace(&["C"]).unwrap();
    let want = DensityMatrix::from_diagonal(&["C"], &[2], &[2.0 / 3.0, 1.0 / 3.0]).unwrap();
    assert!(c.max_abs_diff(&want).unwrap() < 1e-15);
}

#[test]
fn example2_final_state_on_a_grid() {
    let ps = linspace(0.0, 1.0, 10);
    let rows = example2_sweep(&ps).unwrap();
    for row in &rows {
        let (alpha, _) = example2_states(&Example2Params::new(row.p).unwrap()).unwrap();
        let s = carrier::protocol::run_scenario(
            alpha,
            carrier::UnitaryOp::cnot("A", "C"),
            Some(carrier::UnitaryOp::cnot("B", "C")),
        )
        .unwrap();
        let err = s.gamma.unwrap().max_abs_diff(&final_state_oracle(row.p)).unwrap();
        assert!(err < 1e-12, "p = {}: {err}", row.p);
        assert_eq!(row.e_final_direction, Direction::Exact);
        assert!((row.e_final - 1.0 / 3.0).abs() < 1e-9);
        for eig in [row.alpha_c_ab_min_eig, row.beta_c_ab_min_eig, row.gamma_c_ab_min_eig] {
            assert!(eig >= -1e-9);
        }
        if row.p < 1.0 {
            assert!(row.alpha_ac_b_min_eig < -1e-9);
        }
    }
}

#[test]
fn example2_initial_entanglement() {
    // α is a flagged mixture whose AC:B part is Bell diagonal with largest
    // weight 1/(1+p) on a (1+p)/3 branch
    let oracle = |p: f64| (1.0 + p) / 3.0 * (1.0 - binary_entropy(1.0 / (1.0 + p)));
    for (p, opts) in [(0.5, OptimizerOpts::default()), (0.25, fast()), (0.75, fast())] {
        let run = example2_run(&Example2Params::new(p).unwrap(), &opts).unwrap();
        assert!(run.report.all_ok(), "p = {p}");
        let e = &run.initial_entanglement;
        assert!(matches!(e.direction, Direction::Upper | Direction::Exact));
        assert!(e.value >= oracle(p) - 1e-9);
        assert!((e.value - oracle(p)).abs() < 1e-5, "p = {p}: {} vs {}", e.value, oracle(p));
        let bound = run.report.record("E_initial <= (1-p)/3").unwrap();
        assert!((bound.rhs.value - (1.0 - p) / 3.0).abs() < 1e-15);
        assert!(run.report.record("AC:B NPT(alpha)").unwrap().pass);
    }
}

#[test]
fn example2_rejects_bad_weights() {
    assert!(Example2Params::new(1.5).is_err());
    assert!(Example2Params::new(f64::NAN).is_err());
}

#[test]
fn example3_thresholds_for_admissible_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..20 {
        let u = rng.random_range(0.0005..0.13);
        let (lo, hi) = example3_s_range(u).unwrap();
        assert!(lo <= hi);
        let s = rng.random_range(lo..=hi);
        let params = Example3Params::new(u, s).unwrap();
        assert!((params.p - 1.0 / (1.0 + 4.0 * (s * (1.0 - s)).sqrt())).abs() < 1e-15);
        let th = example3_thresholds(&params).unwrap();
        assert!((th.alpha_ab - params.p).abs() < 1e-12, "u = {u}, s = {s}");
        assert!(th.hold(params.p), "u = {u}, s = {s}: {th:?}");
    }
}

#[test]
fn example3_range_errors() {
    assert!(example3_s_range(0.2).is_err());
    assert!(Example3Params::at_lower_s(0.2).is_err());
    assert!(example3_s_range(-0.1).is_err());
    let (lo, _) = example3_s_range(0.05).unwrap();
    assert!(Example3Params::new(0.05, 1.5).is_err());
    // constructible outside the interval, but the carrier thresholds fail
    let outside = Example3Params::new(0.05, lo / 2.0).unwrap();
    assert!(!example3_thresholds(&outside).unwrap().hold(outside.p));
}

#[test]
fn example3_npt_then_ppt() {
    let run = example3_run(&Example3Params::at_lower_s(0.01).unwrap(), &fast()).unwrap();
    assert!(run.thresholds.hold(run.params.p));
    assert!(run.a_bc_min_eigenvalue < -1e-9);
    assert!(run.report.records.iter().all(|r| r.status != Status::Refuted));
    assert!(run.report.record("A:BC NPT(beta)").unwrap().pass);

    let run = example3_run(&Example3Params::at_lower_s(0.1).unwrap(), &fast()).unwrap();
    assert!(run.a_bc_min_eigenvalue >= -1e-9);

    let rows = example3_sweep(&linspace(0.001, 0.13, 50)).unwrap();
    let (lo, hi) = example3_transition(&rows).unwrap();
    assert!(lo >= 0.015 && hi <= 0.03, "{lo} {hi}");
    assert!(rows.iter().all(|r| r.c_ab_min_eig.unwrap() >= -1e-9));
}

fn fixture_psi() -> PureState {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/example1_psi.json")).unwrap();
    StateFile::parse(&text, false).unwrap().dominant_vector()
}

#[test]
fn example1_pipeline() {
    let psi = fixture_psi();
    assert!(example1_admissible(&psi).unwrap().holds);
    let run = example1_build(&psi, &OptimizerOpts::default()).unwrap();
    for r in &run.report.records {
        assert!(r.pass && r.sound, "{}: {:?}", r.name, r.status);
    }
    assert!(run.report.record("beta = Upsilon psi + (1-Upsilon) 1/d").unwrap().lhs.value <= 1e-10);
    assert!(run.report.record("alpha invariant under dephasing C").is_some());
    assert!((run.family.p - run.admissibility.upsilon).abs() < 1e-15);
}

#[test]
fn example1_rejects_ghz() {
    let ghz = PureState::ghz(&["A", "B", "C"]).unwrap();
    assert!(!example1_admissible(&ghz).unwrap().holds);
    assert!(example1_build(&ghz, &fast()).is_err());
}
