use std::f64::consts::LN_2;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use super::{classical_basis, BoundReport, Certificate, Direction, MeasurementBasis, SeparableEnsemble, Split};
use crate::error::{Error, Result};
use crate::infotheory::{relative_entropy, spectrum_entropy, von_neumann_entropy, RelEntropy};
use crate::linalg::{self, CMatrix, CVector};
use crate::optimize::{derive_seed, Lbfgs, OptimizerOpts};
use crate::qstate::{CutSpec, DensityMatrix, PureState, STATE_TOL};
use crate::separability::{cut_dims, ppt_check, schmidt};

/// Largest total dimension accepted by [`ree`].
pub const MAX_REE_DIM: usize = 16;
/// Max-norm distance below which a state counts as a product.
const PRODUCT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Serialize)]
pub struct FlagBranch {
    pub outcome: usize,
    pub probability: f64,
    pub report: BoundReport,
    /// Conditional state, kept for re-evaluation.
    #[serde(skip)]
    pub state: Option<DensityMatrix>,
}

/// `ρ = Σ p_i |f_i><f_i| ⊗ ρ_i` with orthonormal flags `f_i` on one subsystem.
#[derive(Debug, Clone, Serialize)]
pub struct FlagDecomposition {
    pub basis: MeasurementBasis,
    pub branches: Vec<FlagBranch>,
}

/// `ρ = ρ_rest ⊗ τ` with `τ` on subsystems that share a side with others.
#[derive(Debug, Clone, Serialize)]
pub struct Reduction {
    pub dropped: String,
    pub inner: Box<BoundReport>,
    #[serde(skip)]
    pub reduced: Option<DensityMatrix>,
    #[serde(skip)]
    pub factor: Option<DensityMatrix>,
}

/// Relative entropy of entanglement across `cut`.
///
/// Tried in order: product states and PPT on 2x2 / 2x3 cuts (exact zero);
/// pure states (entropy of a reduction); uncorrelated local factors, which
/// are dropped; flag structure on any subsystem, evaluated branch by branch;
/// and finally a numeric minimization over separable ensembles, which gives
/// an upper bound.
pub fn ree(rho: &DensityMatrix, cut: &CutSpec, opts: &OptimizerOpts) -> Result<BoundReport> {
    cut.validate(rho.layout())?;
    if rho.dim() > MAX_REE_DIM {
        return Err(Error::TooLarge(rho.dim(), MAX_REE_DIM));
    }
    dispatch(rho, cut, Ctx { opts, numeric: true })
}

/// The closed-form part of [`ree`]: `Some` only when the value is exact.
pub fn ree_closed_form(rho: &DensityMatrix, cut: &CutSpec) -> Result<Option<BoundReport>> {
    cut.validate(rho.layout())?;
    if rho.dim() > MAX_REE_DIM {
        return Err(Error::TooLarge(rho.dim(), MAX_REE_DIM));
    }
    let ctx = Ctx {
        opts: &OptimizerOpts::default(),
        numeric: false,
    };
    Ok(Some(dispatch(rho, cut, ctx)?).filter(BoundReport::is_exact))
}

/// Flag evaluation on a given subsystem; errors when `rho` is not block
/// diagonal on `flag` in the computational basis or the nondegenerate
/// marginal eigenbasis.
pub fn ree_flag_eval(rho: &DensityMatrix, flag: &str, cut: &CutSpec) -> Result<BoundReport> {
    cut.validate(rho.layout())?;
    if rho.dim() > MAX_REE_DIM {
        return Err(Error::TooLarge(rho.dim(), MAX_REE_DIM));
    }
    let basis = classical_basis(rho, flag, STATE_TOL)?
        .ok_or_else(|| Error::Precondition(format!("no flag structure on `{flag}`")))?;
    flag_eval(rho, cut, &basis, Ctx { opts: &OptimizerOpts::default(), numeric: true })
}

/// Flag evaluation with the flags given by `basis`; errors when `rho` has
/// coherences between different flags.
pub fn ree_flag_eval_in(rho: &DensityMatrix, basis: &MeasurementBasis, cut: &CutSpec, opts: &OptimizerOpts) -> Result<BoundReport> {
    cut.validate(rho.layout())?;
    if rho.dim() > MAX_REE_DIM {
        return Err(Error::TooLarge(rho.dim(), MAX_REE_DIM));
    }
    let defect = Split::new(rho, &basis.subsystem)?.off_diagonal_defect(basis.vectors());
    if defect > STATE_TOL {
        return Err(Error::Precondition(format!(
            "state has coherence {defect:.3e} between flags on `{}`",
            basis.subsystem
        )));
    }
    flag_eval(rho, cut, basis, Ctx { opts, numeric: true })
}

/// Closest-separable-state candidate carried by a report, if it has one.
pub fn separable_state(rho: &DensityMatrix, report: &BoundReport) -> Result<Option<DensityMatrix>> {
    let Some(cert) = &report.certificate else {
        return Ok(None);
    };
    match cert {
        Certificate::Ensemble(e) => Ok(Some(e.assemble()?)),
        Certificate::Ppt(_) => Ok(Some(rho.clone())),
        Certificate::Flags(f) => {
            let mut parts = Vec::with_capacity(f.branches.len());
            for b in &f.branches {
                let Some(state) = &b.state else { continue };
                let Some(sigma) = separable_state(state, &b.report)? else {
                    return Ok(None);
                };
                let v = f.basis.vector(b.outcome);
                let flag = PureState::new(&[f.basis.subsystem.as_str()], &[v.len()], v)?.projector();
                parts.push((b.probability, sigma.tensor(&flag)?.aligned_to(rho.layout())?));
            }
            let refs: Vec<(f64, &DensityMatrix)> = parts.iter().map(|(p, s)| (*p, s)).collect();
            Ok(Some(DensityMatrix::mixture(&refs)?))
        }
        Certificate::Reduction(r) => {
            let (Some(reduced), Some(factor)) = (&r.reduced, &r.factor) else {
                return Ok(None);
            };
            Ok(match separable_state(reduced, &r.inner)? {
                Some(s) => Some(s.tensor(factor)?.aligned_to(rho.layout())?),
                None => None,
            })
        }
        _ => Ok(None),
    }
}

/// `S(ρ‖σ)` for the separable state carried by the report's certificate.
pub fn reevaluate_ree(rho: &DensityMatrix, report: &BoundReport) -> Result<Option<RelEntropy>> {
    match separable_state(rho, report)? {
        Some(sigma) => Ok(Some(relative_entropy(rho, &sigma)?)),
        None => Ok(None),
    }
}

#[derive(Clone, Copy)]
struct Ctx<'a> {
    opts: &'a OptimizerOpts,
    /// Fall back to the ensemble fit when no closed form applies.
    numeric: bool,
}

fn dispatch(rho: &DensityMatrix, cut: &CutSpec, ctx: Ctx<'_>) -> Result<BoundReport> {
    let left = rho.partial_trace(&cut.left)?;
    let right = rho.partial_trace(&cut.right)?;
    if rho.max_abs_diff(&left.tensor(&right)?)? <= PRODUCT_TOL {
        let e = SeparableEnsemble::from_product(&left, &right)?;
        return Ok(BoundReport::exact(0.0, "product state", Some(Certificate::Ensemble(e))));
    }

    let verdict = ppt_check(rho, cut)?;
    if verdict.certifies_separable() {
        return Ok(BoundReport::exact(0.0, "PPT on a 2x2 or 2x3 cut", Some(Certificate::Ppt(verdict))));
    }

    if rho.is_pure(1e-10) {
        return pure_ree(rho, cut);
    }

    if let Some(r) = drop_local_factor(rho, cut, ctx)? {
        return Ok(r);
    }

    if let Some(r) = try_flags(rho, cut, ctx)? {
        if r.is_exact() {
            return Ok(r);
        }
        let numeric = fit(rho, cut, ctx)?;
        return Ok(if numeric.value < r.value { numeric } else { r });
    }

    fit(rho, cut, ctx)
}

fn fit(rho: &DensityMatrix, cut: &CutSpec, ctx: Ctx<'_>) -> Result<BoundReport> {
    if ctx.numeric {
        ensemble_fit(rho, cut, ctx.opts)
    } else {
        Ok(BoundReport::upper(f64::INFINITY, "not evaluated", 0.0, None))
    }
}

fn pure_ree(rho: &DensityMatrix, cut: &CutSpec) -> Result<BoundReport> {
    let psi = rho.dominant_vector();
    let s = schmidt(&psi, cut)?;
    let weights: Vec<f64> = s.coefficients.iter().map(|a| a * a).collect();
    let total: f64 = weights.iter().sum();
    let weights: Vec<f64> = weights.iter().map(|w| w / total).collect();
    let states = (0..s.rank()).map(|k| (s.left_state(k), s.right_state(k))).collect();
    let e = SeparableEnsemble::new(cut.clone(), weights.clone(), states)?;
    Ok(BoundReport::exact(
        spectrum_entropy(&weights),
        "pure-state reduced entropy",
        Some(Certificate::Ensemble(e)),
    ))
}

fn without(side: &[String], label: &str) -> Vec<String> {
    side.iter().filter(|l| l.as_str() != label).cloned().collect()
}

fn drop_local_factor(rho: &DensityMatrix, cut: &CutSpec, ctx: Ctx<'_>) -> Result<Option<BoundReport>> {
    for label in rho.labels() {
        let on_left = cut.left.contains(label);
        let side = if on_left { &cut.left } else { &cut.right };
        if side.len() < 2 {
            continue;
        }
        let factor = rho.partial_trace(&[label.as_str()])?;
        let others: Vec<String> = without(rho.labels(), label);
        let reduced = rho.partial_trace(&others)?;
        if rho.max_abs_diff(&reduced.tensor(&factor)?)? > PRODUCT_TOL {
            continue;
        }
        let sub = if on_left {
            CutSpec::new(&without(&cut.left, label), &cut.right)
        } else {
            CutSpec::new(&cut.left, &without(&cut.right, label))
        };
        let inner = dispatch(&reduced, &sub, ctx)?;
        let mut out = inner.clone();
        out.method = format!("uncorrelated `{label}` dropped; {}", inner.method);
        out.certificate = Some(Certificate::Reduction(Reduction {
            dropped: label.clone(),
            inner: Box::new(inner),
            reduced: Some(reduced),
            factor: Some(factor),
        }));
        return Ok(Some(out));
    }
    Ok(None)
}

fn try_flags(rho: &DensityMatrix, cut: &CutSpec, ctx: Ctx<'_>) -> Result<Option<BoundReport>> {
    let mut best: Option<BoundReport> = None;
    for label in rho.labels() {
        let Some(basis) = classical_basis(rho, label, STATE_TOL)? else {
            continue;
        };
        let r = flag_eval(rho, cut, &basis, ctx)?;
        if r.is_exact() {
            return Ok(Some(r));
        }
        if best.as_ref().is_none_or(|b| r.value < b.value) {
            best = Some(r);
        }
    }
    Ok(best)
}

fn flag_eval(rho: &DensityMatrix, cut: &CutSpec, basis: &MeasurementBasis, ctx: Ctx<'_>) -> Result<BoundReport> {
    let flag = basis.subsystem.as_str();
    let on_left = cut.left.iter().any(|l| l == flag);
    let split = Split::new(rho, flag)?;
    let branches = split.branches(basis.vectors())?;
    let other_side = if on_left { &cut.right } else { &cut.left };

    if (if on_left { &cut.left } else { &cut.right }).len() == 1 {
        // classical on a whole side: separable, and the mixture of flags times
        // spectral decompositions is an explicit ensemble
        let flag_cut = if on_left {
            CutSpec::new(&[flag.to_string()], other_side)
        } else {
            CutSpec::new(other_side, &[flag.to_string()])
        };
        let mut weights = Vec::new();
        let mut states = Vec::new();
        for (i, (p, state)) in branches.iter().enumerate() {
            let Some(state) = state else { continue };
            let f = PureState::new(&[flag], &[split.dy], basis.vector(i))?;
            let local = state.permute_subsystems(other_side)?;
            let e = local.eigh();
            for (k, &lambda) in e.values.iter().enumerate() {
                if p * lambda <= 1e-14 {
                    continue;
                }
                let v = PureState::normalized(local.labels(), local.dims(), e.vector(k))?;
                weights.push(p * lambda);
                states.push(if on_left { (f.clone(), v) } else { (v, f.clone()) });
            }
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        let e = SeparableEnsemble::new(flag_cut, weights, states)?;
        return Ok(BoundReport::exact(
            0.0,
            &format!("classical on `{flag}`"),
            Some(Certificate::Ensemble(e)),
        ));
    }

    let sub = if on_left {
        CutSpec::new(&without(&cut.left, flag), &cut.right)
    } else {
        CutSpec::new(&cut.left, &without(&cut.right, flag))
    };
    let mut out = Vec::with_capacity(branches.len());
    for (i, (p, state)) in branches.into_iter().enumerate() {
        let Some(state) = state else { continue };
        let report = dispatch(&state, &sub, ctx)?;
        out.push(FlagBranch {
            outcome: i,
            probability: p,
            report,
            state: Some(state),
        });
    }
    let value: f64 = out.iter().map(|b| b.probability * b.report.value).sum();
    let error: f64 = out.iter().map(|b| b.probability * b.report.error_estimate).sum();
    let direction = Direction::combine(out.iter().map(|b| b.report.direction));
    Ok(BoundReport {
        value,
        direction,
        method: format!("flags on `{flag}`"),
        error_estimate: error,
        certificate: Some(Certificate::Flags(FlagDecomposition {
            basis: basis.clone(),
            branches: out,
        })),
    })
}

/// `f(σ) = S(ρ‖σ)` for `σ ∝ Σ_k v_k v_k†`, `v_k = a_k ⊗ b_k`, with its
/// gradient in the real and imaginary parts of all `a_k`, `b_k`.
pub(crate) struct EnsembleObjective {
    rho: CMatrix,
    s_rho: f64,
    dl: usize,
    dr: usize,
    k: usize,
}

impl EnsembleObjective {
    pub fn new(rho: &DensityMatrix, cut: &CutSpec) -> Result<Self> {
        let (dl, dr) = cut_dims(rho.layout(), cut)?;
        let ordered = rho.permute_subsystems(&cut.order())?;
        Ok(Self {
            rho: ordered.matrix().clone(),
            s_rho: von_neumann_entropy(rho),
            dl,
            dr,
            k: (dl * dr) * (dl * dr),
        })
    }

    pub fn params(&self) -> usize {
        self.k * 2 * (self.dl + self.dr)
    }

    fn factors(&self, x: &[f64], k: usize) -> (CVector, CVector) {
        let stride = 2 * (self.dl + self.dr);
        let base = &x[k * stride..(k + 1) * stride];
        let a = CVector::from_fn(self.dl, |i, _| linalg::c(base[2 * i], base[2 * i + 1]));
        let off = 2 * self.dl;
        let b = CVector::from_fn(self.dr, |j, _| linalg::c(base[off + 2 * j], base[off + 2 * j + 1]));
        (a, b)
    }

    pub fn value_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let n = self.dl * self.dr;
        let vs: Vec<(CVector, CVector, CVector)> = (0..self.k)
            .map(|k| {
                let (a, b) = self.factors(x, k);
                let v = linalg::kron_vec(&a, &b);
                (a, b, v)
            })
            .collect();
        let mut sigma = CMatrix::zeros(n, n);
        let mut t = 0.0;
        for (_, _, v) in &vs {
            sigma.ger(linalg::ONE, v, &v.conjugate(), linalg::ONE);
            t += v.norm_squared();
        }
        if t.is_nan() || t <= 0.0 {
            return f64::INFINITY;
        }
        let Ok(e) = linalg::eigh(&sigma) else {
            return f64::INFINITY;
        };
        if e.values[0] <= 0.0 {
            return f64::INFINITY;
        }
        let logs: Vec<f64> = e.values.iter().map(|l| l.ln()).collect();
        let rho_hat = e.vectors.adjoint() * &self.rho * &e.vectors;
        let cross: f64 = (0..n).map(|i| rho_hat[(i, i)].re * logs[i]).sum();
        let value = -self.s_rho - (cross - t.ln()) / LN_2;

        // Fréchet derivative of ln at σ applied to ρ, via divided differences
        let mut m = rho_hat;
        for i in 0..n {
            for j in 0..n {
                let (li, lj) = (e.values[i], e.values[j]);
                let dd = if (li - lj).abs() <= 1e-12 * li.max(lj) {
                    2.0 / (li + lj)
                } else {
                    (logs[i] - logs[j]) / (li - lj)
                };
                m[(i, j)] *= dd;
            }
        }
        let mut g = &e.vectors * m * e.vectors.adjoint();
        for i in 0..n {
            g[(i, i)] -= linalg::re(1.0 / t);
        }
        let g = g.unscale(-LN_2);

        let stride = 2 * (self.dl + self.dr);
        for (k, (a, b, v)) in vs.iter().enumerate() {
            let w = &g * v;
            let out = &mut grad[k * stride..(k + 1) * stride];
            for i in 0..self.dl {
                let mut s = linalg::ZERO;
                for j in 0..self.dr {
                    s += w[i * self.dr + j] * b[j].conj();
                }
                out[2 * i] = 2.0 * s.re;
                out[2 * i + 1] = 2.0 * s.im;
            }
            let off = 2 * self.dl;
            for j in 0..self.dr {
                let mut s = linalg::ZERO;
                for i in 0..self.dl {
                    s += w[i * self.dr + j] * a[i].conj();
                }
                out[off + 2 * j] = 2.0 * s.re;
                out[off + 2 * j + 1] = 2.0 * s.im;
            }
        }
        value
    }

    pub fn ensemble(&self, x: &[f64], rho: &DensityMatrix, cut: &CutSpec) -> Result<SeparableEnsemble> {
        let dims_of = |side: &[String]| -> Result<Vec<usize>> { side.iter().map(|l| rho.layout().dim_of(l)).collect() };
        let (ldims, rdims) = (dims_of(&cut.left)?, dims_of(&cut.right)?);
        let mut weights = Vec::with_capacity(self.k);
        let mut states = Vec::with_capacity(self.k);
        for k in 0..self.k {
            let (a, b) = self.factors(x, k);
            let w = a.norm_squared() * b.norm_squared();
            if w <= 0.0 {
                continue;
            }
            weights.push(w);
            states.push((
                PureState::normalized(&cut.left, &ldims, a)?,
                PureState::normalized(&cut.right, &rdims, b)?,
            ));
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        SeparableEnsemble::new(cut.clone(), weights, states)
    }
}

pub(super) fn ensemble_fit(rho: &DensityMatrix, cut: &CutSpec, opts: &OptimizerOpts) -> Result<BoundReport> {
    let obj = EnsembleObjective::new(rho, cut)?;
    let n = obj.params();
    let lbfgs = Lbfgs {
        max_iter: 3000,
        gtol: 1e-9,
        ftol: 1e-11,
        patience: 10,
        ..Lbfgs::default()
    };
    let runs: Vec<(f64, Vec<f64>)> = (0..opts.restarts.max(1))
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(opts.seed, r as u64));
            let x0: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
            let m = lbfgs.minimize(|x, g| obj.value_grad(x, g), &x0);
            (m.value, m.x)
        })
        .collect();
    let mut order: Vec<usize> = (0..runs.len()).collect();
    order.sort_by(|&i, &j| runs[i].0.total_cmp(&runs[j].0).then(i.cmp(&j)));
    let (best_value, best_x) = &runs[order[0]];
    let quartile = runs[order[order.len() / 4]].0;
    let ensemble = obj.ensemble(best_x, rho, cut)?;
    Ok(BoundReport::upper(
        best_value.max(0.0),
        "separable ensemble fit",
        (quartile - best_value).max(0.0),
        Some(Certificate::Ensemble(ensemble)),
    ))
}
