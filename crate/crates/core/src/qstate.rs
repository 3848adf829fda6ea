//! Multipartite states on small Hilbert spaces.
//!
//! Basis convention: computational basis, big-endian over label order, so the
//! first label is the most significant digit of a row index. A state on
//! `["A", "B", "C"]` with qubit dims has row `|a b c>` at index `4a + 2b + c`.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, ONE, ZERO};

/// Hermiticity, trace and positivity tolerance for valid states.
pub const STATE_TOL: f64 = 1e-9;
/// Largest defect that [`DensityMatrix::repaired`] will project away.
pub const REPAIR_TOL: f64 = 1e-7;
/// Largest total dimension accepted by the state types.
pub const MAX_TOTAL_DIM: usize = 64;

pub mod random;

/// Labels and dimensions of the tensor factors, in basis order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    labels: Vec<String>,
    dims: Vec<usize>,
}

impl Layout {
    pub fn new<S: AsRef<str>>(labels: &[S], dims: &[usize]) -> Result<Self> {
        if labels.len() != dims.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} labels but {} dims",
                labels.len(),
                dims.len()
            )));
        }
        if labels.is_empty() {
            return Err(Error::Shape("a state needs at least one subsystem".into()));
        }
        let mut seen = HashSet::new();
        for l in labels {
            let l = l.as_ref();
            if l.is_empty() {
                return Err(Error::Shape("empty subsystem label".into()));
            }
            if !seen.insert(l) {
                return Err(Error::LabelCollision(l.to_string()));
            }
        }
        if let Some(&d) = dims.iter().find(|&&d| d < 2) {
            return Err(Error::Shape(format!("subsystem dimension {d} < 2")));
        }
        let total: usize = dims.iter().product();
        if total > MAX_TOTAL_DIM {
            return Err(Error::TooLarge(total, MAX_TOTAL_DIM));
        }
        Ok(Self {
            labels: labels.iter().map(|l| l.as_ref().to_string()).collect(),
            dims: dims.to_vec(),
        })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        Ok(self.dims[self.position(label)?])
    }

    /// Product of the dimensions of `labels`.
    pub fn dim_of_set<S: AsRef<str>>(&self, labels: &[S]) -> Result<usize> {
        labels
            .iter()
            .try_fold(1, |acc, l| Ok(acc * self.dim_of(l.as_ref())?))
    }

    pub(crate) fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for k in (0..self.dims.len()).rev() {
            out[k] = index % self.dims[k];
            index /= self.dims[k];
        }
        out
    }

    pub(crate) fn compose(&self, digits: &[usize]) -> usize {
        digits
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (d, n)| acc * n + d)
    }

    /// Positions of `order` within this layout; errors unless `order` is a
    /// permutation of the labels.
    fn permutation(&self, order: &[String]) -> Result<Vec<usize>> {
        if order.len() != self.labels.len() {
            return Err(Error::InvalidCut(format!(
                "{:?} is not a permutation of {:?}",
                order, self.labels
            )));
        }
        let perm: Vec<usize> = order
            .iter()
            .map(|l| self.position(l))
            .collect::<Result<_>>()?;
        let distinct: HashSet<_> = perm.iter().collect();
        if distinct.len() != perm.len() {
            return Err(Error::InvalidCut(format!(
                "{:?} is not a permutation of {:?}",
                order, self.labels
            )));
        }
        Ok(perm)
    }

    fn permuted(&self, perm: &[usize]) -> Layout {
        Layout {
            labels: perm.iter().map(|&p| self.labels[p].clone()).collect(),
            dims: perm.iter().map(|&p| self.dims[p]).collect(),
        }
    }

    /// For each index of the permuted layout, the index in this layout.
    fn index_map(&self, perm: &[usize]) -> Vec<usize> {
        let target = self.permuted(perm);
        (0..self.total_dim())
            .map(|i| {
                let new_digits = target.digits(i);
                let mut old = vec![0; self.dims.len()];
                for (k, &p) in perm.iter().enumerate() {
                    old[p] = new_digits[k];
                }
                self.compose(&old)
            })
            .collect()
    }

    /// Labels of this layout not in `keep`, in layout order.
    fn complement<S: AsRef<str>>(&self, keep: &[S]) -> Vec<String> {
        self.labels
            .iter()
            .filter(|l| !keep.iter().any(|k| k.as_ref() == l.as_str()))
            .cloned()
            .collect()
    }

    fn check_subset<S: AsRef<str>>(&self, set: &[S]) -> Result<()> {
        let mut seen = HashSet::new();
        for l in set {
            self.position(l.as_ref())?;
            if !seen.insert(l.as_ref()) {
                return Err(Error::LabelCollision(l.as_ref().to_string()));
            }
        }
        Ok(())
    }
}

/// A bipartition of subsystem labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CutSpec {
    pub left: Vec<String>,
    pub right: Vec<String>,
}

impl serde::Serialize for CutSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl CutSpec {
    pub fn new<S: AsRef<str>>(left: &[S], right: &[S]) -> Self {
        Self {
            left: left.iter().map(|s| s.as_ref().to_string()).collect(),
            right: right.iter().map(|s| s.as_ref().to_string()).collect(),
        }
    }

    /// Parses `"A:BC"` (single-character labels) or `"A,C:B"`.
    pub fn parse(text: &str) -> Result<Self> {
        let (l, r) = text
            .split_once(':')
            .ok_or_else(|| Error::InvalidCut(format!("`{text}` has no `:`")))?;
        let side = |s: &str| -> Vec<String> {
            if s.contains(',') {
                s.split(',').map(|x| x.trim().to_string()).filter(|x| !x.is_empty()).collect()
            } else {
                s.trim().chars().map(|ch| ch.to_string()).collect()
            }
        };
        let cut = Self {
            left: side(l),
            right: side(r),
        };
        if cut.left.is_empty() || cut.right.is_empty() {
            return Err(Error::InvalidCut(format!("`{text}` has an empty side")));
        }
        Ok(cut)
    }

    pub fn swapped(&self) -> Self {
        Self {
            left: self.right.clone(),
            right: self.left.clone(),
        }
    }

    /// Checks that the cut is a bipartition of exactly the labels of `layout`.
    pub fn validate(&self, layout: &Layout) -> Result<()> {
        if self.left.is_empty() || self.right.is_empty() {
            return Err(Error::InvalidCut(format!("{self} has an empty side")));
        }
        let mut seen = HashSet::new();
        for l in self.left.iter().chain(&self.right) {
            layout.position(l)?;
            if !seen.insert(l.as_str()) {
                return Err(Error::InvalidCut(format!("label `{l}` appears twice in {self}")));
            }
        }
        if seen.len() != layout.labels.len() {
            return Err(Error::InvalidCut(format!(
                "{self} does not cover all of {:?}",
                layout.labels
            )));
        }
        Ok(())
    }

    pub fn order(&self) -> Vec<String> {
        self.left.iter().chain(&self.right).cloned().collect()
    }
}

impl fmt::Display for CutSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let single = self.left.iter().chain(&self.right).all(|l| l.chars().count() == 1);
        let sep = if single { "" } else { "," };
        write!(f, "{}:{}", self.left.join(sep), self.right.join(sep))
    }
}

/// A unitary acting on a subset of labelled subsystems.
#[derive(Debug, Clone)]
pub struct UnitaryOp {
    layout: Layout,
    entries: CMatrix,
}

impl UnitaryOp {
    pub fn new<S: AsRef<str>>(labels: &[S], dims: &[usize], entries: CMatrix) -> Result<Self> {
        let layout = Layout::new(labels, dims)?;
        let n = layout.total_dim();
        if entries.shape() != (n, n) {
            return Err(Error::DimensionMismatch(format!(
                "unitary on {:?} needs {n}x{n}, got {}x{}",
                layout.labels,
                entries.nrows(),
                entries.ncols()
            )));
        }
        let defect = linalg::unitarity_defect(&entries);
        if defect > STATE_TOL {
            return Err(Error::NotUnitary(defect));
        }
        Ok(Self { layout, entries })
    }

    pub fn identity<S: AsRef<str>>(labels: &[S], dims: &[usize]) -> Result<Self> {
        let n = dims.iter().product();
        Self::new(labels, dims, CMatrix::identity(n, n))
    }

    /// Controlled-NOT on two qubits, `|c t> -> |c, t xor c>`.
    pub fn cnot(control: &str, target: &str) -> Self {
        let mut m = CMatrix::zeros(4, 4);
        m[(0, 0)] = ONE;
        m[(1, 1)] = ONE;
        m[(2, 3)] = ONE;
        m[(3, 2)] = ONE;
        Self::new(&[control, target], &[2, 2], m).expect("CNOT is unitary")
    }

    pub fn labels(&self) -> &[String] {
        self.layout.labels()
    }

    pub fn dims(&self) -> &[usize] {
        self.layout.dims()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.entries
    }

    pub fn adjoint(&self) -> Self {
        Self {
            layout: self.layout.clone(),
            entries: self.entries.adjoint(),
        }
    }

    /// Full matrix on `target`, identity on the other subsystems.
    pub fn embed(&self, target: &Layout) -> Result<CMatrix> {
        for (l, &d) in self.layout.labels.iter().zip(&self.layout.dims) {
            let td = target.dim_of(l)?;
            if td != d {
                return Err(Error::DimensionMismatch(format!(
                    "unitary acts on `{l}` with dim {d}, state has {td}"
                )));
            }
        }
        let rest = target.complement(&self.layout.labels);
        let rest_dim: usize = target.dim_of_set(&rest)?;
        let mut order = self.layout.labels.clone();
        order.extend(rest);
        let perm = target.permutation(&order)?;
        let map = target.index_map(&perm);
        let local = linalg::kron(&self.entries, &CMatrix::identity(rest_dim, rest_dim));
        let n = target.total_dim();
        let mut out = CMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                out[(map[i], map[j])] = local[(i, j)];
            }
        }
        Ok(out)
    }
}

/// A normalized state vector.
#[derive(Debug, Clone)]
pub struct PureState {
    layout: Layout,
    amplitudes: CVector,
}

impl PureState {
    pub fn new<S: AsRef<str>>(labels: &[S], dims: &[usize], amplitudes: CVector) -> Result<Self> {
        let layout = Layout::new(labels, dims)?;
        if amplitudes.len() != layout.total_dim() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} amplitudes, got {}",
                layout.total_dim(),
                amplitudes.len()
            )));
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { layout, amplitudes })
    }

    /// Normalizes `amplitudes` before constructing.
    pub fn normalized<S: AsRef<str>>(labels: &[S], dims: &[usize], amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm < 1e-300 {
            return Err(Error::NotNormalized(norm));
        }
        Self::new(labels, dims, amplitudes.unscale(norm))
    }

    pub fn basis<S: AsRef<str>>(labels: &[S], dims: &[usize], digits: &[usize]) -> Result<Self> {
        let layout = Layout::new(labels, dims)?;
        if digits.len() != dims.len() || digits.iter().zip(dims).any(|(d, n)| d >= n) {
            return Err(Error::OutOfRange(format!("basis digits {digits:?} for dims {dims:?}")));
        }
        let v = linalg::basis_vector(layout.total_dim(), layout.compose(digits));
        Ok(Self { layout, amplitudes: v })
    }

    /// `(|00> + |11>)/sqrt(2)`.
    pub fn phi_plus(a: &str, b: &str) -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v = CVector::from_vec(vec![linalg::re(s), ZERO, ZERO, linalg::re(s)]);
        Self::new(&[a, b], &[2, 2], v).expect("valid Bell state")
    }

    /// `(|0...0> + |1...1>)/sqrt(2)` on qubits.
    pub fn ghz<S: AsRef<str>>(labels: &[S]) -> Result<Self> {
        let dims = vec![2; labels.len()];
        let n = 1usize << labels.len();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut v = CVector::zeros(n);
        v[0] = linalg::re(s);
        v[n - 1] = linalg::re(s);
        Self::new(labels, &dims, v)
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn labels(&self) -> &[String] {
        self.layout.labels()
    }

    pub fn dims(&self) -> &[usize] {
        self.layout.dims()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn projector(&self) -> DensityMatrix {
        DensityMatrix {
            layout: self.layout.clone(),
            entries: linalg::projector(&self.amplitudes),
        }
    }

    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        let layout = concat_layouts(&self.layout, &other.layout)?;
        Ok(PureState {
            layout,
            amplitudes: linalg::kron_vec(&self.amplitudes, &other.amplitudes),
        })
    }

    pub fn permute_subsystems<S: AsRef<str>>(&self, new_order: &[S]) -> Result<PureState> {
        let order: Vec<String> = new_order.iter().map(|s| s.as_ref().to_string()).collect();
        let perm = self.layout.permutation(&order)?;
        let map = self.layout.index_map(&perm);
        let amplitudes = CVector::from_fn(map.len(), |i, _| self.amplitudes[map[i]]);
        Ok(PureState {
            layout: self.layout.permuted(&perm),
            amplitudes,
        })
    }

    pub fn apply_unitary(&self, u: &UnitaryOp) -> Result<PureState> {
        let full = u.embed(&self.layout)?;
        Ok(PureState {
            layout: self.layout.clone(),
            amplitudes: full * &self.amplitudes,
        })
    }

    /// Amplitudes arranged as a `d_left x d_right` matrix for `cut`.
    pub fn cut_matrix(&self, cut: &CutSpec) -> Result<CMatrix> {
        cut.validate(&self.layout)?;
        let p = self.permute_subsystems(&cut.order())?;
        let dl = self.layout.dim_of_set(&cut.left)?;
        let dr = self.layout.dim_of_set(&cut.right)?;
        Ok(CMatrix::from_fn(dl, dr, |i, j| p.amplitudes[i * dr + j]))
    }
}

/// A validated mixed state.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    layout: Layout,
    entries: CMatrix,
}

/// Defects of a candidate density matrix against the three invariants.
#[derive(Debug, Clone, Copy)]
pub struct Defects {
    pub hermiticity: f64,
    pub trace: f64,
    pub min_eigenvalue: f64,
}

pub fn defects(entries: &CMatrix) -> Result<Defects> {
    let hermiticity = linalg::hermiticity_defect(entries);
    let trace = (linalg::trace(entries) - ONE).norm();
    let sym = linalg::symmetrize(entries);
    let min_eigenvalue = linalg::eigh(&sym)?.values[0];
    Ok(Defects {
        hermiticity,
        trace,
        min_eigenvalue,
    })
}

impl DensityMatrix {
    pub fn new<S: AsRef<str>>(labels: &[S], dims: &[usize], entries: CMatrix) -> Result<Self> {
        let layout = Layout::new(labels, dims)?;
        Self::with_layout(layout, entries)
    }

    fn with_layout(layout: Layout, entries: CMatrix) -> Result<Self> {
        let n = layout.total_dim();
        if entries.shape() != (n, n) {
            return Err(Error::DimensionMismatch(format!(
                "state on dims {:?} needs {n}x{n}, got {}x{}",
                layout.dims,
                entries.nrows(),
                entries.ncols()
            )));
        }
        let hermiticity = linalg::hermiticity_defect(&entries);
        if hermiticity > STATE_TOL {
            return Err(Error::NotHermitian(hermiticity));
        }
        let tr = linalg::trace(&entries);
        if (tr - ONE).norm() > STATE_TOL {
            return Err(Error::InvalidTrace(tr.re));
        }
        let min_eig = linalg::eigh(&entries)?.values[0];
        if min_eig < -STATE_TOL {
            return Err(Error::NotPsd(min_eig));
        }
        Ok(Self { layout, entries })
    }

    /// Like [`DensityMatrix::new`], but an input within [`REPAIR_TOL`] of a
    /// valid state is projected back: symmetrized, negative eigenvalues
    /// clipped, trace renormalized.
    pub fn repaired<S: AsRef<str>>(labels: &[S], dims: &[usize], entries: CMatrix) -> Result<Self> {
        let layout = Layout::new(labels, dims)?;
        let n = layout.total_dim();
        if entries.shape() != (n, n) {
            return Err(Error::DimensionMismatch(format!(
                "state on dims {:?} needs {n}x{n}, got {}x{}",
                layout.dims,
                entries.nrows(),
                entries.ncols()
            )));
        }
        let d = defects(&entries)?;
        if d.hermiticity > REPAIR_TOL {
            return Err(Error::NotHermitian(d.hermiticity));
        }
        if d.trace > REPAIR_TOL {
            return Err(Error::InvalidTrace(linalg::trace(&entries).re));
        }
        if d.min_eigenvalue < -REPAIR_TOL {
            return Err(Error::NotPsd(d.min_eigenvalue));
        }
        let e = linalg::eigh(&linalg::symmetrize(&entries))?;
        let clipped = e.map(|x| x.max(0.0));
        let tr = linalg::trace(&clipped).re;
        Self::with_layout(layout, linalg::symmetrize(&clipped).unscale(tr))
    }

    /// Trusted constructor for internal results that are valid by
    /// construction up to rounding; symmetrizes the input.
    pub(crate) fn from_parts(layout: Layout, entries: CMatrix) -> Self {
        debug_assert_eq!(entries.nrows(), layout.total_dim());
        Self {
            layout,
            entries: linalg::symmetrize(&entries),
        }
    }

    pub fn maximally_mixed<S: AsRef<str>>(labels: &[S], dims: &[usize]) -> Result<Self> {
        let layout = Layout::new(labels, dims)?;
        let n = layout.total_dim();
        Ok(Self {
            layout,
            entries: CMatrix::identity(n, n).unscale(n as f64),
        })
    }

    pub fn from_diagonal<S: AsRef<str>>(labels: &[S], dims: &[usize], diag: &[f64]) -> Result<Self> {
        let m = CMatrix::from_diagonal(&CVector::from_iterator(
            diag.len(),
            diag.iter().map(|&x| linalg::re(x)),
        ));
        Self::new(labels, dims, m)
    }

    /// `Σ w_k ρ_k` over states with identical layouts.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let (_, first) = parts
            .first()
            .ok_or_else(|| Error::Shape("empty mixture".into()))?;
        let mut acc = CMatrix::zeros(first.dim(), first.dim());
        for (w, s) in parts {
            if s.layout != first.layout {
                return Err(Error::DimensionMismatch(format!(
                    "mixing {:?} with {:?}",
                    first.labels(),
                    s.labels()
                )));
            }
            if *w < 0.0 {
                return Err(Error::OutOfRange(format!("negative mixture weight {w}")));
            }
            acc += s.entries.scale(*w);
        }
        Self::with_layout(first.layout.clone(), acc)
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn labels(&self) -> &[String] {
        self.layout.labels()
    }

    pub fn dims(&self) -> &[usize] {
        self.layout.dims()
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.entries
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::eigh(&self.entries)
            .expect("density matrices are Hermitian")
            .values
    }

    pub fn eigh(&self) -> linalg::Eigh {
        linalg::eigh(&self.entries).expect("density matrices are Hermitian")
    }

    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        let layout = concat_layouts(&self.layout, &other.layout)?;
        Ok(Self {
            layout,
            entries: linalg::kron(&self.entries, &other.entries),
        })
    }

    pub fn partial_trace<S: AsRef<str>>(&self, keep: &[S]) -> Result<DensityMatrix> {
        if keep.is_empty() {
            return Err(Error::InvalidCut("partial trace must keep at least one subsystem".into()));
        }
        self.layout.check_subset(keep)?;
        // kept labels stay in their original relative order
        let kept: Vec<String> = self
            .layout
            .labels
            .iter()
            .filter(|l| keep.iter().any(|k| k.as_ref() == l.as_str()))
            .cloned()
            .collect();
        let traced = self.layout.complement(&kept);
        let dk = self.layout.dim_of_set(&kept)?;
        let dt = self.layout.dim_of_set(&traced)?;
        let mut order = kept.clone();
        order.extend(traced);
        let permuted = self.permute_subsystems(&order)?;
        let m = &permuted.entries;
        let reduced = CMatrix::from_fn(dk, dk, |i, j| (0..dt).map(|t| m[(i * dt + t, j * dt + t)]).sum());
        let dims: Vec<usize> = kept.iter().map(|l| self.layout.dim_of(l).unwrap()).collect();
        Ok(Self::from_parts(Layout::new(&kept, &dims)?, reduced))
    }

    /// Transpose on the tensor factors in `side`. The result is Hermitian
    /// with unit trace but need not be positive.
    pub fn partial_transpose<S: AsRef<str>>(&self, side: &[S]) -> Result<CMatrix> {
        self.layout.check_subset(side)?;
        let positions: Vec<usize> = side
            .iter()
            .map(|l| self.layout.position(l.as_ref()))
            .collect::<Result<_>>()?;
        Ok(partial_transpose_matrix(&self.entries, &self.layout, &positions))
    }

    pub fn apply_unitary(&self, u: &UnitaryOp) -> Result<DensityMatrix> {
        let full = u.embed(&self.layout)?;
        Ok(Self::from_parts(
            self.layout.clone(),
            &full * &self.entries * full.adjoint(),
        ))
    }

    pub fn permute_subsystems<S: AsRef<str>>(&self, new_order: &[S]) -> Result<DensityMatrix> {
        let order: Vec<String> = new_order.iter().map(|s| s.as_ref().to_string()).collect();
        let perm = self.layout.permutation(&order)?;
        let map = self.layout.index_map(&perm);
        let n = map.len();
        let entries = CMatrix::from_fn(n, n, |i, j| self.entries[(map[i], map[j])]);
        Ok(Self {
            layout: self.layout.permuted(&perm),
            entries,
        })
    }

    /// Reorders subsystems to match `layout`'s label order.
    pub fn aligned_to(&self, layout: &Layout) -> Result<DensityMatrix> {
        self.permute_subsystems(layout.labels())
    }

    /// Renames subsystems without touching entries.
    pub fn relabeled<S: AsRef<str>>(&self, labels: &[S]) -> Result<DensityMatrix> {
        Ok(Self {
            layout: Layout::new(labels, self.dims())?,
            entries: self.entries.clone(),
        })
    }

    pub fn max_abs_diff(&self, other: &DensityMatrix) -> Result<f64> {
        let o = other.aligned_to(&self.layout)?;
        if o.dims() != self.dims() {
            return Err(Error::DimensionMismatch("states have different dims".into()));
        }
        Ok(linalg::max_abs_diff(&self.entries, &o.entries))
    }

    /// `Tr(ρ σ)` for states with the same layout.
    pub fn overlap(&self, other: &DensityMatrix) -> Result<f64> {
        let o = other.aligned_to(&self.layout)?;
        Ok(linalg::trace_product(&self.entries, &o.entries).re)
    }

    pub fn is_pure(&self, tol: f64) -> bool {
        let purity = linalg::trace_product(&self.entries, &self.entries).re;
        (purity - 1.0).abs() <= tol
    }

    /// Dominant eigenvector as a pure state (meaningful when `is_pure`).
    pub fn dominant_vector(&self) -> PureState {
        let e = self.eigh();
        let n = e.values.len();
        let v = e.vector(n - 1);
        let norm = v.norm();
        PureState {
            layout: self.layout.clone(),
            amplitudes: v.unscale(norm),
        }
    }
}

impl PartialEq for DensityMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.layout == other.layout && self.entries == other.entries
    }
}

fn concat_layouts(a: &Layout, b: &Layout) -> Result<Layout> {
    if let Some(l) = a.labels.iter().find(|l| b.labels.contains(l)) {
        return Err(Error::LabelCollision(l.clone()));
    }
    let labels: Vec<String> = a.labels.iter().chain(&b.labels).cloned().collect();
    let dims: Vec<usize> = a.dims.iter().chain(&b.dims).copied().collect();
    Layout::new(&labels, &dims)
}

pub(crate) fn partial_transpose_matrix(m: &CMatrix, layout: &Layout, positions: &[usize]) -> CMatrix {
    let n = layout.total_dim();
    let mut out = CMatrix::zeros(n, n);
    for i in 0..n {
        let di = layout.digits(i);
        for j in 0..n {
            let dj = layout.digits(j);
            let mut ri = di.clone();
            let mut rj = dj.clone();
            for &p in positions {
                ri[p] = dj[p];
                rj[p] = di[p];
            }
            out[(i, j)] = m[(layout.compose(&ri), layout.compose(&rj))];
        }
    }
    out
}

/// JSON state file: `{"labels": [...], "dims": [...], "re": [[...]], "im": [[...]]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateFile {
    pub labels: Vec<String>,
    pub dims: Vec<usize>,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl StateFile {
    pub fn from_state(rho: &DensityMatrix) -> Self {
        let n = rho.dim();
        let m = rho.matrix();
        Self {
            labels: rho.labels().to_vec(),
            dims: rho.dims().to_vec(),
            re: (0..n).map(|i| (0..n).map(|j| m[(i, j)].re).collect()).collect(),
            im: (0..n).map(|i| (0..n).map(|j| m[(i, j)].im).collect()).collect(),
        }
    }

    pub fn to_state(&self, repair: bool) -> Result<DensityMatrix> {
        let n: usize = self.dims.iter().product();
        let check = |name: &str, rows: &Vec<Vec<f64>>| -> Result<()> {
            if rows.len() != n {
                return Err(Error::Parse(format!("field `{name}`: expected {n} rows, got {}", rows.len())));
            }
            for (r, row) in rows.iter().enumerate() {
                if row.len() != n {
                    return Err(Error::Parse(format!(
                        "field `{name}` row {r}: expected {n} entries, got {}",
                        row.len()
                    )));
                }
            }
            Ok(())
        };
        check("re", &self.re)?;
        check("im", &self.im)?;
        let m = CMatrix::from_fn(n, n, |i, j| linalg::c(self.re[i][j], self.im[i][j]));
        if repair {
            DensityMatrix::repaired(&self.labels, &self.dims, m)
        } else {
            DensityMatrix::new(&self.labels, &self.dims, m)
        }
    }

    pub fn parse(text: &str, repair: bool) -> Result<DensityMatrix> {
        let file: StateFile = serde_json::from_str(text)
            .map_err(|e| Error::Parse(format!("line {}, column {}: {e}", e.line(), e.column())))?;
        file.to_state(repair)
    }

    pub fn to_json(rho: &DensityMatrix) -> String {
        serde_json::to_string(&Self::from_state(rho)).expect("plain data serializes")
    }
}
