use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ree::{ensemble_fit, EnsembleObjective};
use super::*;
use crate::infotheory::{binary_entropy, mutual_information, von_neumann_entropy};
use crate::optimize::OptimizerOpts;
use crate::qstate::{random, CutSpec, PureState, UnitaryOp};

fn cut(s: &str) -> CutSpec {
    CutSpec::parse(s).unwrap()
}

fn quick() -> OptimizerOpts {
    OptimizerOpts {
        restarts: 4,
        grid: 24,
        ..OptimizerOpts::default()
    }
}

fn cubitt_lambda() -> DensityMatrix {
    let mut m = CMatrix::zeros(8, 8);
    let sixth = linalg::re(1.0 / 6.0);
    for (i, j) in [(0, 0), (0, 6), (6, 0), (6, 6), (2, 2), (4, 4), (1, 1), (7, 7)] {
        m[(i, j)] = sixth;
    }
    DensityMatrix::new(&["A", "B", "C"], &[2, 2, 2], m).unwrap()
}

fn cubitt_beta() -> DensityMatrix {
    cubitt_lambda().apply_unitary(&UnitaryOp::cnot("A", "C")).unwrap()
}

/// `F |φ+><φ+| + (1-F)/3 (1 - |φ+><φ+|)`.
fn werner(f: f64) -> DensityMatrix {
    let phi = PureState::phi_plus("A", "B").projector();
    let id = CMatrix::identity(4, 4);
    let m = phi.matrix().scale(f) + (id - phi.matrix()).scale((1.0 - f) / 3.0);
    DensityMatrix::new(&["A", "B"], &[2, 2], m).unwrap()
}

fn random_separable(rng: &mut ChaCha8Rng, k: usize) -> DensityMatrix {
    let w = random::simplex_point(k, rng);
    let states: Vec<DensityMatrix> = (0..k)
        .map(|_| {
            let ab = random::pure_state(&["A", "B"], &[2, 2], rng).projector();
            // product on AB is not required for AB:C separability
            let c = random::pure_state(&["C"], &[2], rng).projector();
            ab.tensor(&c).unwrap()
        })
        .collect();
    let parts: Vec<(f64, &DensityMatrix)> = w.iter().copied().zip(states.iter()).collect();
    DensityMatrix::mixture(&parts).unwrap()
}

#[test]
fn dephasing_examples() {
    let diag = DensityMatrix::from_diagonal(&["A", "B"], &[2, 2], &[0.1, 0.2, 0.3, 0.4]).unwrap();
    let out = dephase(&diag, &MeasurementBasis::computational("B", 2)).unwrap();
    assert!(out.max_abs_diff(&diag).unwrap() < 1e-15);

    let plus = PureState::normalized(&["A"], &[2], CVector::from_element(2, linalg::ONE)).unwrap();
    let out = dephase(&plus.projector(), &MeasurementBasis::computational("A", 2)).unwrap();
    let half = DensityMatrix::maximally_mixed(&["A"], &[2]).unwrap();
    assert!(out.max_abs_diff(&half).unwrap() < 1e-15);

    let lambda = cubitt_lambda();
    let out = dephase(&lambda, &MeasurementBasis::computational("C", 2)).unwrap();
    assert!(out.max_abs_diff(&lambda).unwrap() < 1e-15);

    assert!(dephase(&lambda, &MeasurementBasis::computational("C", 3)).is_err());
    assert!(dephase(&lambda, &MeasurementBasis::computational("D", 2)).is_err());
}

#[test]
fn dephasing_preserves_trace_and_raises_entropy() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..30 {
        let rho = random::mixed_state(&["A", "B", "C"], &[2, 2, 2], &mut rng);
        let basis = MeasurementBasis::qubit("B", rng.random_range(0.0..3.0), rng.random_range(0.0..6.0));
        let out = dephase(&rho, &basis).unwrap();
        assert!((linalg::trace(out.matrix()).re - 1.0).abs() < 1e-12);
        assert!(von_neumann_entropy(&out) >= von_neumann_entropy(&rho) - 1e-9);
        // the output is classical on B in that basis
        let split = Split::new(&out, "B").unwrap();
        assert!(split.off_diagonal_defect(basis.vectors()) < 1e-12);
    }
}

#[test]
fn qubit_angles_are_canonical() {
    for (t, p) in [(-0.3f64, 1.0f64), (2.0, 5.0), (7.0, -1.0), (0.4, 0.2)] {
        let raw = {
            let (s, c) = f64::sin_cos(t);
            let e = linalg::c(p.cos(), p.sin());
            CMatrix::from_column_slice(2, 2, &[linalg::re(c), e * s, -e.conj() * s, linalg::re(c)])
        };
        let b = MeasurementBasis::qubit("C", t, p);
        let (theta, phi) = b.angles().unwrap();
        assert!((0.0..=std::f64::consts::FRAC_PI_2).contains(&theta));
        assert!((0.0..std::f64::consts::TAU).contains(&phi));
        for j in 0..2 {
            let pr = linalg::projector(&raw.column(j).into_owned());
            let found = b.projectors().iter().any(|q| linalg::max_abs_diff(q, &pr) < 1e-12);
            assert!(found);
        }
    }
}

#[test]
fn discord_closed_forms() {
    let opts = OptimizerOpts::default();
    let qc = DensityMatrix::mixture(&[
        (0.3, &random::mixed_state(&["A"], &[2], &mut ChaCha8Rng::seed_from_u64(1)).tensor(
            &DensityMatrix::from_diagonal(&["B"], &[2], &[1.0, 0.0]).unwrap(),
        ).unwrap()),
        (0.7, &random::mixed_state(&["A"], &[2], &mut ChaCha8Rng::seed_from_u64(2)).tensor(
            &DensityMatrix::from_diagonal(&["B"], &[2], &[0.0, 1.0]).unwrap(),
        ).unwrap()),
    ])
    .unwrap();
    let r = discord(&qc, "B", &opts).unwrap();
    assert_eq!((r.value, r.direction), (0.0, Direction::Exact));

    let bell = PureState::phi_plus("A", "B").projector();
    let r = discord(&bell, "B", &opts).unwrap();
    assert!((r.value - 1.0).abs() < 1e-12 && r.is_exact());
    assert!(discord(&bell, "Z", &opts).is_err());
}

#[test]
fn discord_numeric_matches_pure_state_entropy() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let opts = OptimizerOpts::default();
    for _ in 0..10 {
        let rho = random::pure_state(&["A", "B"], &[2, 2], &mut rng).projector();
        let split = Split::new(&rho, "B").unwrap();
        let s_rho = von_neumann_entropy(&rho);
        let (basis, _) = discord::qubit_search(&split, s_rho, &opts);
        let numeric = discord_in_basis(&rho, &basis).unwrap();
        let exact = von_neumann_entropy(&rho.partial_trace(&["A"]).unwrap());
        assert!((numeric - exact).abs() < 1e-4, "{numeric} vs {exact}");
        let r = discord(&rho, "B", &opts).unwrap();
        assert!((r.value - exact).abs() < 1e-10);
    }
}

#[test]
fn discord_vanishes_after_dephasing_in_the_same_basis() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10 {
        let rho = random::mixed_state(&["A", "B", "C"], &[2, 2, 2], &mut rng);
        let basis = MeasurementBasis::qubit("C", rng.random_range(0.0..1.5), rng.random_range(0.0..6.2));
        let out = dephase(&rho, &basis).unwrap();
        let r = discord(&out, "C", &quick()).unwrap();
        assert!(r.value <= 1e-6, "{r:?}");
    }
}

#[test]
fn discord_certificates_reproduce_values() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..5 {
        let rho = random::mixed_state(&["A", "B", "C"], &[2, 2, 2], &mut rng);
        let r = discord(&rho, "C", &quick()).unwrap();
        assert_eq!(r.direction, Direction::Upper);
        let Some(Certificate::Measurement(b)) = &r.certificate else {
            panic!("missing basis")
        };
        assert!((discord_in_basis(&rho, b).unwrap() - r.value).abs() < 1e-9);
        assert!(r.value >= 0.0 && r.error_estimate >= 0.0);
    }
}

#[test]
fn discord_beats_fixed_bases() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..5 {
        let rho = random::mixed_state(&["A", "B"], &[2, 2], &mut rng);
        let r = discord(&rho, "B", &quick()).unwrap();
        for _ in 0..20 {
            let b = MeasurementBasis::qubit("B", rng.random_range(0.0..1.6), rng.random_range(0.0..6.3));
            assert!(r.value <= discord_in_basis(&rho, &b).unwrap() + 1e-9);
        }
    }
}

#[test]
fn qutrit_discord_is_best_effort_upper_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let psi = random::pure_state(&["A", "B"], &[2, 3], &mut rng).projector();
    let noisy = DensityMatrix::mixture(&[
        (0.9, &psi),
        (0.1, &DensityMatrix::maximally_mixed(&["A", "B"], &[2, 3]).unwrap()),
    ])
    .unwrap();
    let r = discord(&noisy, "B", &quick()).unwrap();
    assert_eq!(r.direction, Direction::Upper);
    let comp = discord_in_basis(&noisy, &MeasurementBasis::computational("B", 3)).unwrap();
    assert!(r.value <= comp + 1e-12);
    let Some(Certificate::Measurement(b)) = &r.certificate else { panic!() };
    assert!((discord_in_basis(&noisy, b).unwrap() - r.value).abs() < 1e-9);
}

#[test]
fn separable_discord_bound_examples() {
    assert!((discord_sep_bound(4, 2) - 63.0 / 64.0).abs() < 1e-15);
    assert!((discord_sep_bound(2, 2) - 15.0 / 16.0).abs() < 1e-15);
    assert_eq!(discord_sep_bound(4, 1), 0.0);
}

#[test]
fn separable_states_respect_discord_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    let bound = discord_sep_bound(4, 2);
    for _ in 0..20 {
        let k = rng.random_range(1..6);
        let rho = random_separable(&mut rng, k);
        let r = discord(&rho, "C", &quick()).unwrap();
        assert!(r.value <= bound + 1e-6);
    }
}

#[test]
fn ree_examples() {
    let opts = quick();
    let bell = PureState::phi_plus("A", "B").projector();
    let r = ree(&bell, &cut("A:B"), &opts).unwrap();
    assert!((r.value - 1.0).abs() < 1e-12 && r.is_exact());

    let product = random::mixed_state(&["A"], &[2], &mut ChaCha8Rng::seed_from_u64(1))
        .tensor(&random::mixed_state(&["B", "C"], &[2, 2], &mut ChaCha8Rng::seed_from_u64(2)))
        .unwrap();
    let r = ree(&product, &cut("A:BC"), &opts).unwrap();
    assert_eq!((r.value, r.direction), (0.0, Direction::Exact));

    let lambda = cubitt_lambda();
    assert!(ree(&lambda, &cut("A:BCD"), &opts).is_err());
    let big = lambda.tensor(&DensityMatrix::maximally_mixed(&["D", "E"], &[2, 2]).unwrap()).unwrap();
    assert!(matches!(ree(&big, &cut("AD:BCE"), &opts), Err(crate::Error::TooLarge(32, 16))));
}

#[test]
fn ree_flag_chain_on_cubitt_output() {
    // (1/3) φ+ ⊗ |0><0| + (2/3) 1/4 ⊗ |1><1|
    let gamma = cubitt_beta().apply_unitary(&UnitaryOp::cnot("B", "C")).unwrap();
    let r = ree(&gamma, &cut("A:BC"), &quick()).unwrap();
    assert!(r.is_exact(), "{r:?}");
    assert!((r.value - 1.0 / 3.0).abs() < 1e-9);
    let f = ree_flag_eval(&gamma, "C", &cut("A:BC")).unwrap();
    assert!((f.value - 1.0 / 3.0).abs() < 1e-9);
    assert!(ree_flag_eval(&cubitt_beta(), "C", &cut("A:BC")).is_err());

    let lambda = cubitt_lambda();
    let r = ree(&lambda, &cut("AC:B"), &quick()).unwrap();
    assert_eq!((r.value, r.direction), (0.0, Direction::Exact));
}

#[test]
fn ensemble_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let rho = random::mixed_state(&["A", "B", "C"], &[2, 2, 2], &mut rng);
    let obj = EnsembleObjective::new(&rho, &cut("A:CB")).unwrap();
    let n = obj.params();
    let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut g = vec![0.0; n];
    let f0 = obj.value_grad(&x, &mut g);
    assert!(f0.is_finite());
    let mut scratch = vec![0.0; n];
    for i in (0..n).step_by(7) {
        let h = 1e-6;
        let mut xp = x.clone();
        xp[i] += h;
        let mut xm = x.clone();
        xm[i] -= h;
        let fd = (obj.value_grad(&xp, &mut scratch) - obj.value_grad(&xm, &mut scratch)) / (2.0 * h);
        assert!((fd - g[i]).abs() < 1e-6 * (1.0 + g[i].abs()), "param {i}: {fd} vs {}", g[i]);
    }
}

#[test]
fn bell_diagonal_ree_matches_closed_form() {
    for f in [0.6, 0.75, 0.9] {
        let rho = werner(f);
        let r = ree(&rho, &cut("A:B"), &OptimizerOpts::default()).unwrap();
        let oracle = 1.0 - binary_entropy(f);
        assert_eq!(r.direction, Direction::Upper);
        assert!(r.value >= oracle - 1e-9 && r.value - oracle < 1e-4, "F = {f}: {} vs {oracle}", r.value);
    }
}

#[test]
fn ree_certificates_reproduce_values() {
    let opts = quick();
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let gamma = cubitt_beta().apply_unitary(&UnitaryOp::cnot("B", "C")).unwrap();
    let cases = vec![
        (PureState::phi_plus("A", "B").projector(), cut("A:B")),
        (werner(0.8), cut("A:B")),
        (werner(0.4), cut("A:B")),
        (gamma, cut("A:BC")),
        (cubitt_lambda(), cut("AC:B")),
        (random::pure_state(&["A", "B", "C"], &[2, 2, 2], &mut rng).projector(), cut("B:AC")),
        (
            werner(0.9).tensor(&random::mixed_state(&["C"], &[2], &mut rng)).unwrap(),
            cut("AC:B"),
        ),
        (random::mixed_state(&["A", "B", "C"], &[2, 2, 2], &mut rng), cut("C:AB")),
    ];
    for (rho, c) in cases {
        let r = ree(&rho, &c, &opts).unwrap();
        let again = reevaluate_ree(&rho, &r).unwrap().expect("certificate carries a state");
        assert!((again.to_f64() - r.value).abs() < 1e-6, "{c}: {r:?} vs {again}");
        serde_json::to_string(&r).unwrap();
    }
}

#[test]
fn numeric_ree_upper_bounds_exact_flag_values() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..3 {
        let p = rng.random_range(0.2..0.8);
        let a = random::pure_state(&["A", "B"], &[2, 2], &mut rng).projector();
        let b = werner(rng.random_range(0.3..0.6));
        let rho = DensityMatrix::mixture(&[
            (p, &a.tensor(&DensityMatrix::from_diagonal(&["C"], &[2], &[1.0, 0.0]).unwrap()).unwrap()),
            (1.0 - p, &b.tensor(&DensityMatrix::from_diagonal(&["C"], &[2], &[0.0, 1.0]).unwrap()).unwrap()),
        ])
        .unwrap();
        let c = cut("A:BC");
        let exact = ree(&rho, &c, &quick()).unwrap();
        assert!(exact.is_exact());
        let numeric = ensemble_fit(&rho, &c, &quick()).unwrap();
        assert!(numeric.value >= exact.value - 1e-4, "{} < {}", numeric.value, exact.value);
        assert!(numeric.value - exact.value < 1e-3);
    }
}

#[test]
fn ordering_sandwich_on_closed_form_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    let opts = quick();
    for _ in 0..20 {
        let rho = random::pure_state(&["A", "B"], &[2, 2], &mut rng).projector();
        let i = mutual_information(&rho, &cut("A:B")).unwrap();
        let d = discord(&rho, "B", &opts).unwrap();
        let e = ree(&rho, &cut("A:B"), &opts).unwrap();
        assert!(d.is_exact() && e.is_exact());
        assert!(i >= d.value - 1e-8 && d.value >= e.value - 1e-8);
    }
}

#[test]
fn cubitt_beta_measures_agree() {
    let beta = cubitt_beta();
    let d = discord(&beta, "C", &OptimizerOpts::default()).unwrap();
    let e = ree(&beta, &cut("A:CB"), &OptimizerOpts::default()).unwrap();
    assert!((d.value - 1.0 / 3.0).abs() < 1e-6, "{d:?}");
    assert!((d.value - e.value).abs() < 0.02, "D = {}, E = {}", d.value, e.value);
}
