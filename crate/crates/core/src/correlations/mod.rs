//! Relative entropy of discord and of entanglement.
//!
//! Every value comes back as a [`BoundReport`] whose [`Direction`] says
//! whether it is exact or only a one-sided bound. Numeric minimizations
//! over measurements or separable states can only ever produce upper
//! bounds; exact values come from closed forms (pure states,
//! quantum-classical states, certified separable states, flag
//! decompositions).

mod discord;
mod ensemble;
mod ree;

use std::fmt;

use serde::Serialize;

pub use discord::{discord, discord_in_basis};
pub use ensemble::SeparableEnsemble;
pub use ree::{ree, ree_closed_form, ree_flag_eval, ree_flag_eval_in, reevaluate_ree, separable_state, FlagBranch, FlagDecomposition, Reduction, MAX_REE_DIM};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};
use crate::qstate::{DensityMatrix, Layout, STATE_TOL};
use crate::separability::PptVerdict;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Exact,
    /// The true value is at most `value`.
    Upper,
    /// The true value is at least `value`.
    Lower,
    /// Numeric value with no one-sided guarantee.
    Estimate,
}

impl Direction {
    /// Direction of a nonnegative combination of values with these directions.
    pub fn combine(dirs: impl IntoIterator<Item = Direction>) -> Direction {
        dirs.into_iter().fold(Direction::Exact, |acc, d| match (acc, d) {
            (a, Direction::Exact) => a,
            (Direction::Exact, b) => b,
            (a, b) if a == b => a,
            _ => Direction::Estimate,
        })
    }

    /// Direction of `-x` for `x` with this direction.
    pub fn negated(self) -> Direction {
        match self {
            Direction::Upper => Direction::Lower,
            Direction::Lower => Direction::Upper,
            d => d,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Exact => "exact",
            Direction::Upper => "upper",
            Direction::Lower => "lower",
            Direction::Estimate => "estimate",
        })
    }
}

/// Complete rank-1 projective measurement on one subsystem, stored as the
/// orthonormal basis whose projectors it consists of.
#[derive(Debug, Clone)]
pub struct MeasurementBasis {
    pub subsystem: String,
    vectors: CMatrix,
    angles: Option<(f64, f64)>,
}

impl MeasurementBasis {
    /// Columns of `vectors` are the basis vectors.
    pub fn new(subsystem: &str, vectors: CMatrix) -> Result<Self> {
        if vectors.nrows() != vectors.ncols() || vectors.nrows() < 2 {
            return Err(Error::Shape(format!(
                "measurement basis must be a square matrix of size >= 2, got {}x{}",
                vectors.nrows(),
                vectors.ncols()
            )));
        }
        let defect = linalg::unitarity_defect(&vectors);
        if defect > STATE_TOL {
            return Err(Error::NotUnitary(defect));
        }
        Ok(Self {
            subsystem: subsystem.to_string(),
            vectors,
            angles: None,
        })
    }

    pub fn computational(subsystem: &str, dim: usize) -> Self {
        Self {
            subsystem: subsystem.to_string(),
            vectors: CMatrix::identity(dim, dim),
            angles: None,
        }
    }

    /// Qubit basis `{cos θ|0> + e^{iφ} sin θ|1>, -e^{-iφ} sin θ|0> + cos θ|1>}`.
    /// Angles are folded into `θ ∈ [0, π/2]`, `φ ∈ [0, 2π)`; the projectors do
    /// not change.
    pub fn qubit(subsystem: &str, theta: f64, phi: f64) -> Self {
        let (theta, phi) = canonical_angles(theta, phi);
        let (s, c) = theta.sin_cos();
        let e = linalg::c(phi.cos(), phi.sin());
        let vectors = CMatrix::from_column_slice(
            2,
            2,
            &[linalg::re(c), e * s, -e.conj() * s, linalg::re(c)],
        );
        Self {
            subsystem: subsystem.to_string(),
            vectors,
            angles: Some((theta, phi)),
        }
    }

    pub fn dim(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn vectors(&self) -> &CMatrix {
        &self.vectors
    }

    pub fn vector(&self, j: usize) -> CVector {
        self.vectors.column(j).into_owned()
    }

    /// `(θ, φ)` for bases built by [`MeasurementBasis::qubit`].
    pub fn angles(&self) -> Option<(f64, f64)> {
        self.angles
    }

    pub fn projectors(&self) -> Vec<CMatrix> {
        (0..self.dim()).map(|j| linalg::projector(&self.vector(j))).collect()
    }
}

fn canonical_angles(theta: f64, phi: f64) -> (f64, f64) {
    use std::f64::consts::{FRAC_PI_2, PI, TAU};
    // θ -> θ + π flips both vectors' signs; θ -> -θ and θ -> π - θ are
    // compensated by φ -> φ + π up to vector phases
    let mut t = theta.rem_euclid(PI);
    let mut p = phi;
    if t > FRAC_PI_2 {
        t = PI - t;
        p += PI;
    }
    (t, p.rem_euclid(TAU))
}

impl Serialize for MeasurementBasis {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            subsystem: &'a str,
            #[serde(skip_serializing_if = "Option::is_none")]
            theta: Option<f64>,
            #[serde(skip_serializing_if = "Option::is_none")]
            phi: Option<f64>,
            vectors_re: Vec<Vec<f64>>,
            vectors_im: Vec<Vec<f64>>,
        }
        let cols = |f: fn(&num_complex::Complex64) -> f64| -> Vec<Vec<f64>> {
            (0..self.dim())
                .map(|j| self.vectors.column(j).iter().map(f).collect())
                .collect()
        };
        Repr {
            subsystem: &self.subsystem,
            theta: self.angles.map(|a| a.0),
            phi: self.angles.map(|a| a.1),
            vectors_re: cols(|z| z.re),
            vectors_im: cols(|z| z.im),
        }
        .serialize(s)
    }
}

/// NPT witness: the eigenvector of the most negative partial-transpose
/// eigenvalue.
#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    pub min_eigenvalue: f64,
    pub vector_re: Vec<f64>,
    pub vector_im: Vec<f64>,
}

impl Witness {
    pub fn from_verdict(v: &PptVerdict) -> Self {
        Self {
            min_eigenvalue: v.min_eigenvalue,
            vector_re: v.witness_vector.iter().map(|z| z.re).collect(),
            vector_im: v.witness_vector.iter().map(|z| z.im).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    Measurement(MeasurementBasis),
    Ensemble(SeparableEnsemble),
    Flags(FlagDecomposition),
    /// PPT on a 2x2 or 2x3 cut: the state is its own closest separable state.
    Ppt(PptVerdict),
    /// Uncorrelated local factor dropped before evaluation.
    Reduction(Reduction),
    Witness(Witness),
    /// Free-form description of an argument that has no numeric payload.
    Construction { description: String },
    /// A value assembled from several reported terms.
    Composite { terms: Vec<BoundReport> },
}

impl Certificate {
    pub fn kind(&self) -> &'static str {
        match self {
            Certificate::Measurement(_) => "measurement",
            Certificate::Ensemble(_) => "ensemble",
            Certificate::Flags(_) => "flags",
            Certificate::Ppt(_) => "ppt",
            Certificate::Reduction(_) => "reduction",
            Certificate::Witness(_) => "witness",
            Certificate::Construction { .. } => "construction",
            Certificate::Composite { .. } => "composite",
        }
    }
}

/// A measure value with its direction and supporting evidence.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub value: f64,
    pub direction: Direction,
    /// How the value was obtained.
    pub method: String,
    /// For numeric values: spread observed across starts or refinement steps.
    /// Zero for closed forms.
    pub error_estimate: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Certificate>,
}

impl BoundReport {
    pub fn exact(value: f64, method: &str, certificate: Option<Certificate>) -> Self {
        Self {
            value,
            direction: Direction::Exact,
            method: method.to_string(),
            error_estimate: 0.0,
            certificate,
        }
    }

    pub fn upper(value: f64, method: &str, error_estimate: f64, certificate: Option<Certificate>) -> Self {
        Self {
            value,
            direction: Direction::Upper,
            method: method.to_string(),
            error_estimate,
            certificate,
        }
    }

    pub fn lower(value: f64, method: &str, certificate: Option<Certificate>) -> Self {
        Self {
            value,
            direction: Direction::Lower,
            method: method.to_string(),
            error_estimate: 0.0,
            certificate,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.direction == Direction::Exact
    }

    pub fn certificate_kind(&self) -> &'static str {
        self.certificate.as_ref().map_or("none", Certificate::kind)
    }
}

/// `(1 - 1/(d_x d_y)^2) log2 d_y`, the largest discord a separable state
/// can have when measured on the `d_y`-dimensional side.
pub fn discord_sep_bound(d_x: usize, d_y: usize) -> f64 {
    if d_y < 2 {
        return 0.0;
    }
    let d = (d_x * d_y) as f64;
    (1.0 - 1.0 / (d * d)) * (d_y as f64).log2()
}

/// ρ regrouped with one subsystem `Y` last, as a `d_y x d_y` grid of blocks
/// on the remaining subsystems.
pub(crate) struct Split {
    pub labels: Vec<String>,
    pub dims: Vec<usize>,
    pub label: String,
    pub dy: usize,
    /// `blocks[a][b] = <a|_Y ρ |b>_Y`.
    pub blocks: Vec<Vec<CMatrix>>,
}

impl Split {
    pub fn new(rho: &DensityMatrix, label: &str) -> Result<Self> {
        let dy = rho.layout().dim_of(label)?;
        let (labels, dims): (Vec<String>, Vec<usize>) = rho
            .labels()
            .iter()
            .zip(rho.dims())
            .filter(|(l, _)| l.as_str() != label)
            .map(|(l, d)| (l.clone(), *d))
            .unzip();
        let mut order = labels.clone();
        order.push(label.to_string());
        let permuted = rho.permute_subsystems(&order)?;
        let m = permuted.matrix();
        let dr: usize = dims.iter().product();
        let blocks = (0..dy)
            .map(|a| {
                (0..dy)
                    .map(|b| CMatrix::from_fn(dr, dr, |r, s| m[(r * dy + a, s * dy + b)]))
                    .collect()
            })
            .collect();
        Ok(Self {
            labels,
            dims,
            label: label.to_string(),
            dy,
            blocks,
        })
    }

    pub fn rest_dim(&self) -> usize {
        self.dims.iter().product()
    }

    /// `<v|_Y ρ |w>_Y` for vectors on `Y`.
    pub fn sandwich(&self, v: &CVector, w: &CVector) -> CMatrix {
        let dr = self.rest_dim();
        let mut out = CMatrix::zeros(dr, dr);
        for a in 0..self.dy {
            for b in 0..self.dy {
                let coef = v[a].conj() * w[b];
                if coef.norm_sqr() > 0.0 {
                    out += self.blocks[a][b].map(|z| z * coef);
                }
            }
        }
        out
    }

    /// Unnormalized post-measurement blocks `<b_j|ρ|b_j>` for each basis vector.
    pub fn diagonal_blocks(&self, basis: &CMatrix) -> Vec<CMatrix> {
        (0..self.dy)
            .map(|j| {
                let v = basis.column(j).into_owned();
                self.sandwich(&v, &v)
            })
            .collect()
    }

    /// Largest entry of the off-diagonal blocks in `basis`.
    pub fn off_diagonal_defect(&self, basis: &CMatrix) -> f64 {
        let mut worst: f64 = 0.0;
        for j in 0..self.dy {
            for k in (j + 1)..self.dy {
                let b = self.sandwich(&basis.column(j).into_owned(), &basis.column(k).into_owned());
                worst = worst.max(linalg::max_abs(&b));
            }
        }
        worst
    }

    fn rest_layout(&self) -> Result<Layout> {
        Layout::new(&self.labels, &self.dims)
    }

    /// Normalized conditional states on the remaining subsystems with their
    /// probabilities; `None` for outcomes of (numerically) zero probability.
    pub fn branches(&self, basis: &CMatrix) -> Result<Vec<(f64, Option<DensityMatrix>)>> {
        let layout = self.rest_layout()?;
        Ok(self
            .diagonal_blocks(basis)
            .into_iter()
            .map(|b| {
                let p = linalg::trace(&b).re;
                if p > 1e-14 {
                    (p, Some(DensityMatrix::from_parts(layout.clone(), b.unscale(p))))
                } else {
                    (p.max(0.0), None)
                }
            })
            .collect())
    }
}

/// Outcome probabilities and normalized conditional states on the other
/// subsystems for a measurement in `basis`; `None` for zero-probability
/// outcomes.
pub fn conditional_states(rho: &DensityMatrix, basis: &MeasurementBasis) -> Result<Vec<(f64, Option<DensityMatrix>)>> {
    let split = Split::new(rho, &basis.subsystem)?;
    if split.dy != basis.dim() {
        return Err(Error::DimensionMismatch(format!(
            "basis of dimension {} for subsystem `{}` of dimension {}",
            basis.dim(),
            basis.subsystem,
            split.dy
        )));
    }
    split.branches(basis.vectors())
}

/// `Σ_j (1 ⊗ Π_j) ρ (1 ⊗ Π_j)`.
pub fn dephase(rho: &DensityMatrix, basis: &MeasurementBasis) -> Result<DensityMatrix> {
    let split = Split::new(rho, &basis.subsystem)?;
    if split.dy != basis.dim() {
        return Err(Error::DimensionMismatch(format!(
            "basis of dimension {} for subsystem `{}` of dimension {}",
            basis.dim(),
            basis.subsystem,
            split.dy
        )));
    }
    let diag = split.diagonal_blocks(basis.vectors());
    let (dy, dr) = (split.dy, split.rest_dim());
    let v = basis.vectors();
    let mut m = CMatrix::zeros(dr * dy, dr * dy);
    for (j, block) in diag.iter().enumerate() {
        for a in 0..dy {
            for b in 0..dy {
                let coef = v[(a, j)] * v[(b, j)].conj();
                for r in 0..dr {
                    for s in 0..dr {
                        m[(r * dy + a, s * dy + b)] += coef * block[(r, s)];
                    }
                }
            }
        }
    }
    let mut labels = split.labels.clone();
    labels.push(split.label.clone());
    let mut dims = split.dims.clone();
    dims.push(dy);
    let out = DensityMatrix::from_parts(Layout::new(&labels, &dims)?, m);
    out.aligned_to(rho.layout())
}

/// Eigenbasis of the marginal on `label`, when its spectrum has gaps of at
/// least `1e-6`; degenerate marginals have no preferred eigenbasis.
pub(crate) fn nondegenerate_marginal_basis(rho: &DensityMatrix, label: &str) -> Result<Option<CMatrix>> {
    let marginal = rho.partial_trace(&[label])?;
    let e = marginal.eigh();
    let gap = e.values.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    Ok((gap >= 1e-6).then_some(e.vectors))
}

/// Candidate bases on `label` in which ρ might be block diagonal:
/// computational first, then the marginal eigenbasis when nondegenerate.
pub(crate) fn classical_basis(rho: &DensityMatrix, label: &str, tol: f64) -> Result<Option<MeasurementBasis>> {
    let split = Split::new(rho, label)?;
    let comp = CMatrix::identity(split.dy, split.dy);
    if split.off_diagonal_defect(&comp) <= tol {
        return Ok(Some(MeasurementBasis::computational(label, split.dy)));
    }
    if let Some(v) = nondegenerate_marginal_basis(rho, label)? {
        if split.off_diagonal_defect(&v) <= tol {
            return Ok(Some(MeasurementBasis::new(label, v)?));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests;
