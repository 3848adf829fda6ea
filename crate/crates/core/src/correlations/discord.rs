use std::f64::consts::{FRAC_PI_2, TAU};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::{classical_basis, nondegenerate_marginal_basis, BoundReport, Certificate, MeasurementBasis, Split};
use crate::error::Result;
use crate::infotheory::{spectrum_entropy, von_neumann_entropy};
use crate::linalg::{self, CMatrix};
use crate::optimize::{derive_seed, NelderMead, OptimizerOpts};
use crate::qstate::{DensityMatrix, STATE_TOL};

/// Grid points refined by the simplex in the qubit search.
const REFINED_STARTS: usize = 4;

/// `S(Π(ρ)) - S(ρ)` for the dephasing `Π` in `basis`.
pub fn discord_in_basis(rho: &DensityMatrix, basis: &MeasurementBasis) -> Result<f64> {
    let split = Split::new(rho, &basis.subsystem)?;
    Ok(dephased_entropy(&split, basis.vectors()) - von_neumann_entropy(rho))
}

fn dephased_entropy(split: &Split, basis: &CMatrix) -> f64 {
    let mut spectrum = Vec::with_capacity(split.dy * split.rest_dim());
    for block in split.diagonal_blocks(basis) {
        spectrum.extend(linalg::eigh(&block).expect("blocks are Hermitian").values);
    }
    spectrum_entropy(&spectrum)
}

/// Relative entropy of discord `D_{X|Y}` with `Y = measured`.
///
/// Exact for pure states (`S(ρ_Y)`) and for states that are block diagonal
/// in the computational basis or the nondegenerate marginal eigenbasis of
/// `Y` (zero). Otherwise a qubit `Y` is searched on a `grid x grid` angle
/// grid followed by simplex refinement; larger `Y` use a unitary
/// parametrization with random restarts (best effort). Numeric results are
/// upper bounds.
pub fn discord(rho: &DensityMatrix, measured: &str, opts: &OptimizerOpts) -> Result<BoundReport> {
    let split = Split::new(rho, measured)?;
    let s_rho = von_neumann_entropy(rho);

    if let Some(basis) = classical_basis(rho, measured, STATE_TOL)? {
        return Ok(BoundReport::exact(
            0.0,
            "quantum-classical",
            Some(Certificate::Measurement(basis)),
        ));
    }

    if split.rest_dim() > 1 && rho.is_pure(1e-10) {
        let marginal = rho.partial_trace(&[measured])?;
        let e = marginal.eigh();
        let basis = MeasurementBasis::new(measured, e.vectors)?;
        return Ok(BoundReport::exact(
            spectrum_entropy(&e.values),
            "pure-state reduced entropy",
            Some(Certificate::Measurement(basis)),
        ));
    }

    let (basis, improvement, method) = if split.dy == 2 {
        let (b, imp) = qubit_search(&split, s_rho, opts);
        (b, imp, "angle grid + simplex")
    } else {
        let (b, imp) = unitary_search(rho, &split, s_rho, opts)?;
        (b, imp, "unitary search (best effort)")
    };
    let value = (dephased_entropy(&split, basis.vectors()) - s_rho).max(0.0);
    Ok(BoundReport::upper(
        value,
        method,
        improvement,
        Some(Certificate::Measurement(basis)),
    ))
}

pub(super) fn qubit_search(split: &Split, s_rho: f64, opts: &OptimizerOpts) -> (MeasurementBasis, f64) {
    let g = opts.grid.max(2);
    let theta = |i: usize| FRAC_PI_2 * i as f64 / (g - 1) as f64;
    let phi = |j: usize| TAU * j as f64 / g as f64;
    let objective = |x: &[f64]| {
        let b = MeasurementBasis::qubit(&split.label, x[0], x[1]);
        dephased_entropy(split, b.vectors()) - s_rho
    };

    let mut grid: Vec<(usize, f64)> = (0..g * g)
        .into_par_iter()
        .map(|k| (k, objective(&[theta(k / g), phi(k % g)])))
        .collect();
    grid.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));

    let nm = NelderMead {
        step: FRAC_PI_2 / (g - 1) as f64,
        xtol: opts.tol,
        ..NelderMead::default()
    };
    let refined: Vec<(f64, f64, Vec<f64>)> = grid
        .iter()
        .take(REFINED_STARTS)
        .map(|&(k, v0)| {
            let m = nm.minimize(objective, &[theta(k / g), phi(k % g)]);
            // the simplex never returns a worse point than its start
            (v0, m.value.min(v0), if m.value <= v0 { m.x } else { vec![theta(k / g), phi(k % g)] })
        })
        .collect();
    let improvement = refined.iter().map(|(v0, v, _)| v0 - v).fold(0.0, f64::max);
    let best = refined
        .iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("at least one start");
    (MeasurementBasis::qubit(&split.label, best.2[0], best.2[1]), improvement)
}

/// Hermitian generator from `d^2` reals: diagonal first, then real and
/// imaginary parts of the upper triangle.
fn generator(x: &[f64], d: usize) -> CMatrix {
    let mut h = CMatrix::zeros(d, d);
    let mut k = d;
    for i in 0..d {
        h[(i, i)] = linalg::re(x[i]);
        for j in (i + 1)..d {
            let z = linalg::c(x[k], x[k + 1]);
            k += 2;
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
        }
    }
    h
}

fn unitary_search(
    rho: &DensityMatrix,
    split: &Split,
    s_rho: f64,
    opts: &OptimizerOpts,
) -> Result<(MeasurementBasis, f64)> {
    let d = split.dy;
    let base = nondegenerate_marginal_basis(rho, &split.label)?.unwrap_or_else(|| CMatrix::identity(d, d));
    let basis_of = |x: &[f64]| -> CMatrix {
        let u = linalg::expi_hermitian(&generator(x, d)).expect("generator is Hermitian");
        &base * u
    };
    let objective = |x: &[f64]| dephased_entropy(split, &basis_of(x)) - s_rho;
    let nm = NelderMead {
        step: 0.3,
        xtol: opts.tol,
        max_iter: 500 * d,
        ..NelderMead::default()
    };
    let n = d * d;
    let runs: Vec<(f64, f64, Vec<f64>)> = (0..opts.restarts.max(1))
        .into_par_iter()
        .map(|r| {
            let x0: Vec<f64> = if r == 0 {
                vec![0.0; n]
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(opts.seed, r as u64));
                (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
            };
            let v0 = objective(&x0);
            let m = nm.minimize(objective, &x0);
            (v0, m.value, m.x)
        })
        .collect();
    let improvement = runs.iter().map(|(v0, v, _)| v0 - v).fold(0.0, f64::max);
    let best = runs
        .iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("at least one restart");
    Ok((MeasurementBasis::new(&split.label, basis_of(&best.2))?, improvement))
}
