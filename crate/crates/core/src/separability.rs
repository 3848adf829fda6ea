//! Entanglement detection: partial transposition, Schmidt decomposition and
//! the closed-form separability threshold for a pure state mixed with white
//! noise.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};
use crate::qstate::{CutSpec, DensityMatrix, Layout, PureState};

/// Minimal partial-transpose eigenvalue below which a state counts as NPT.
pub const NPT_THRESHOLD: f64 = -1e-9;

/// Schmidt coefficients below this are dropped.
const SCHMIDT_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct SchmidtData {
    pub cut: CutSpec,
    /// Descending, strictly positive.
    pub coefficients: Vec<f64>,
    pub left_vectors: Vec<CVector>,
    pub right_vectors: Vec<CVector>,
    left_dims: Vec<usize>,
    right_dims: Vec<usize>,
}

impl SchmidtData {
    pub fn rank(&self) -> usize {
        self.coefficients.len()
    }

    /// Product of the two largest coefficients; zero for product states.
    pub fn top_pair_product(&self) -> f64 {
        match self.coefficients.as_slice() {
            [a, b, ..] => a * b,
            _ => 0.0,
        }
    }

    pub fn left_state(&self, k: usize) -> PureState {
        PureState::new(&self.cut.left, &self.left_dims, self.left_vectors[k].clone())
            .expect("Schmidt vectors are normalized")
    }

    pub fn right_state(&self, k: usize) -> PureState {
        PureState::new(&self.cut.right, &self.right_dims, self.right_vectors[k].clone())
            .expect("Schmidt vectors are normalized")
    }

    /// `Σ a_k |l_k>|r_k>` with labels in cut order.
    pub fn reconstruct(&self) -> CVector {
        let dim = self.left_dims.iter().product::<usize>() * self.right_dims.iter().product::<usize>();
        let mut out = CVector::zeros(dim);
        for k in 0..self.rank() {
            out += linalg::kron_vec(&self.left_vectors[k], &self.right_vectors[k]).scale(self.coefficients[k]);
        }
        out
    }
}

/// Schmidt decomposition across `cut`, from the eigendecomposition of the
/// left reduced operator.
pub fn schmidt(psi: &PureState, cut: &CutSpec) -> Result<SchmidtData> {
    let norm = psi.amplitudes().norm();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::NotNormalized(norm));
    }
    let m = psi.cut_matrix(cut)?;
    let reduced = &m * m.adjoint();
    let e = linalg::eigh(&linalg::symmetrize(&reduced))?;
    // |l_k† M| is accurate to rounding in absolute terms, unlike sqrt(λ_k)
    let mut terms: Vec<(f64, CVector, CVector)> = (0..e.values.len())
        .map(|k| {
            let l = e.vector(k);
            let w: CVector = (l.adjoint() * &m).transpose();
            (w.norm(), l, w)
        })
        .filter(|(a, _, _)| *a >= SCHMIDT_FLOOR)
        .collect();
    terms.sort_by(|x, y| y.0.total_cmp(&x.0));
    let mut coefficients = Vec::with_capacity(terms.len());
    let mut left_vectors = Vec::with_capacity(terms.len());
    let mut right_vectors = Vec::with_capacity(terms.len());
    for (a, l, w) in terms {
        coefficients.push(a);
        left_vectors.push(l);
        right_vectors.push(w.unscale(a));
    }
    let layout = psi.layout();
    let dims_of = |side: &[String]| -> Result<Vec<usize>> { side.iter().map(|l| layout.dim_of(l)).collect() };
    Ok(SchmidtData {
        cut: cut.clone(),
        coefficients,
        left_vectors,
        right_vectors,
        left_dims: dims_of(&cut.left)?,
        right_dims: dims_of(&cut.right)?,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PptVerdict {
    pub min_eigenvalue: f64,
    pub is_npt: bool,
    /// PPT is equivalent to separability for this cut (2x2 or 2x3).
    pub exact_criterion: bool,
    /// Eigenvector of the minimal eigenvalue of the partial transpose, in
    /// the state's own basis order.
    #[serde(skip)]
    pub witness_vector: CVector,
}

impl PptVerdict {
    /// PPT on a cut where that does not settle separability.
    pub fn inconclusive(&self) -> bool {
        !self.is_npt && !self.exact_criterion
    }

    pub fn certifies_separable(&self) -> bool {
        !self.is_npt && self.exact_criterion
    }
}

/// Dimensions `(d_left, d_right)` of a cut.
pub fn cut_dims(layout: &Layout, cut: &CutSpec) -> Result<(usize, usize)> {
    cut.validate(layout)?;
    Ok((layout.dim_of_set(&cut.left)?, layout.dim_of_set(&cut.right)?))
}

pub fn ppt_check(rho: &DensityMatrix, cut: &CutSpec) -> Result<PptVerdict> {
    let (dl, dr) = cut_dims(rho.layout(), cut)?;
    let pt = rho.partial_transpose(&cut.left)?;
    let e = linalg::eigh(&pt)?;
    let min_eigenvalue = e.values[0];
    let small = dl.min(dr) == 2 && dl.max(dr) <= 3;
    Ok(PptVerdict {
        min_eigenvalue,
        is_npt: min_eigenvalue < NPT_THRESHOLD,
        exact_criterion: small,
        witness_vector: e.vector(0),
    })
}

/// `p |ψ><ψ| + (1 - p) 1/d_tot` with its critical weight.
#[derive(Debug, Clone)]
pub struct VtFamily {
    pub psi: PureState,
    pub cut: CutSpec,
    pub d_tot: usize,
    pub p: f64,
    /// Separable iff `p <= p_cr`.
    pub p_cr: f64,
}

impl VtFamily {
    pub fn with_p(&self, p: f64) -> Self {
        Self { p, ..self.clone() }
    }

    pub fn is_separable(&self) -> bool {
        self.p <= self.p_cr
    }
}

/// `1 / (1 + a1 a2 d_tot)`.
pub fn vt_critical_weight(top_pair_product: f64, d_tot: usize) -> f64 {
    1.0 / (1.0 + top_pair_product * d_tot as f64)
}

/// Critical mixing weight for `psi` across `cut`; the returned family has
/// `p = p_cr`.
pub fn vt_threshold(psi: &PureState, cut: &CutSpec) -> Result<VtFamily> {
    let s = schmidt(psi, cut)?;
    let d_tot = psi.layout().total_dim();
    let p_cr = vt_critical_weight(s.top_pair_product(), d_tot);
    Ok(VtFamily {
        psi: psi.clone(),
        cut: cut.clone(),
        d_tot,
        p: p_cr,
        p_cr,
    })
}

pub fn vt_family_state(fam: &VtFamily) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&fam.p) {
        return Err(Error::OutOfRange(format!("mixing weight p = {} not in [0, 1]", fam.p)));
    }
    let d = fam.d_tot;
    let noise = CMatrix::identity(d, d).unscale(d as f64);
    let m = linalg::projector(fam.psi.amplitudes()).scale(fam.p) + noise.scale(1.0 - fam.p);
    DensityMatrix::new(fam.psi.labels(), fam.psi.dims(), m)
}

/// Schmidt-product data of a tripartite pure state for the three
/// single-party cuts.
#[derive(Debug, Clone, Serialize)]
pub struct Admissibility {
    pub a1a2: f64,
    pub b1b2: f64,
    pub c1c2: f64,
    /// `max(b1 b2, c1 c2)`.
    pub m: f64,
    /// Critical weight `1 / (1 + M d_tot)`.
    pub upsilon: f64,
    /// `a1 a2 > M`.
    pub holds: bool,
}

pub fn example1_admissible(psi: &PureState) -> Result<Admissibility> {
    let labels = psi.labels();
    if labels.len() != 3 {
        return Err(Error::Precondition(format!(
            "admissibility needs a tripartite state, got labels {labels:?}"
        )));
    }
    let product = |k: usize| -> Result<f64> {
        let rest: Vec<String> = labels.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, l)| l.clone()).collect();
        let cut = CutSpec::new(&[labels[k].clone()], &rest);
        Ok(schmidt(psi, &cut)?.top_pair_product())
    };
    let (a1a2, b1b2, c1c2) = (product(0)?, product(1)?, product(2)?);
    let m = b1b2.max(c1c2);
    Ok(Admissibility {
        a1a2,
        b1b2,
        c1c2,
        m,
        upsilon: vt_critical_weight(m, psi.layout().total_dim()),
        holds: a1a2 > m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::random;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const ABC: [&str; 3] = ["A", "B", "C"];

    #[test]
    fn schmidt_examples() {
        let cut = CutSpec::parse("A:B").unwrap();
        let prod = PureState::basis(&["A", "B"], &[2, 2], &[0, 0]).unwrap();
        let s = schmidt(&prod, &cut).unwrap();
        assert_eq!(s.rank(), 1);
        assert!((s.coefficients[0] - 1.0).abs() < 1e-14);

        let s = schmidt(&PureState::phi_plus("A", "B"), &cut).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(s.rank(), 2);
        assert!(s.coefficients.iter().all(|a| (a - h).abs() < 1e-14));

        let ghz = PureState::ghz(&ABC).unwrap();
        let s = schmidt(&ghz, &CutSpec::parse("A:BC").unwrap()).unwrap();
        assert_eq!(s.rank(), 2);
        assert!(s.coefficients.iter().all(|a| (a - h).abs() < 1e-14));
    }

    #[test]
    fn schmidt_rejects_unnormalized() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let psi = random::pure_state(&["A", "B"], &[2, 2], &mut rng);
        assert!(schmidt(&psi, &CutSpec::parse("A:B").unwrap()).is_ok());
        assert!(PureState::new(&["A", "B"], &[2, 2], psi.amplitudes().scale(1.1)).is_err());
    }

    #[test]
    fn schmidt_reconstructs_random_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for cut in ["A:BC", "B:AC", "AB:C", "CA:B"] {
            let cut = CutSpec::parse(cut).unwrap();
            for _ in 0..50 {
                let psi = random::pure_state(&ABC, &[2, 3, 2], &mut rng);
                let s = schmidt(&psi, &cut).unwrap();
                let reordered = psi.permute_subsystems(&cut.order()).unwrap();
                assert!((s.reconstruct() - reordered.amplitudes()).norm() < 1e-9);
                let norm: f64 = s.coefficients.iter().map(|a| a * a).sum();
                assert!((norm - 1.0).abs() < 1e-10);
                assert!(s.coefficients.windows(2).all(|w| w[0] >= w[1]));
                for i in 0..s.rank() {
                    for j in 0..s.rank() {
                        let want = if i == j { 1.0 } else { 0.0 };
                        assert!((s.left_vectors[i].dotc(&s.left_vectors[j]).norm() - want).abs() < 1e-9);
                        assert!((s.right_vectors[i].dotc(&s.right_vectors[j]).norm() - want).abs() < 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn schmidt_coefficients_survive_local_unitaries() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let cut = CutSpec::parse("A:BC").unwrap();
        for _ in 0..30 {
            let psi = random::pure_state(&ABC, &[2, 2, 2], &mut rng);
            let moved = psi
                .apply_unitary(&random::unitary(&["A"], &[2], &mut rng))
                .unwrap()
                .apply_unitary(&random::unitary(&["C", "B"], &[2, 2], &mut rng))
                .unwrap();
            let a = schmidt(&psi, &cut).unwrap().coefficients;
            let b = schmidt(&moved, &cut).unwrap().coefficients;
            assert_eq!(a.len(), b.len());
            assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-9));
        }
    }

    #[test]
    fn ppt_examples() {
        let cut = CutSpec::parse("A:B").unwrap();
        let bell = PureState::phi_plus("A", "B");
        let v = ppt_check(&bell.projector(), &cut).unwrap();
        assert!((v.min_eigenvalue + 0.5).abs() < 1e-14);
        assert!(v.is_npt && v.exact_criterion);

        // eigenvalues of the partial transpose are (1+p)/4 (x3) and (1-3p)/4
        let fam = vt_threshold(&bell, &cut).unwrap().with_p(1.0 / 3.0);
        let werner = vt_family_state(&fam).unwrap();
        let v = ppt_check(&werner, &cut).unwrap();
        assert!(v.min_eigenvalue.abs() < 1e-15);
        assert!(!v.is_npt);

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random::mixed_state(&["A"], &[2], &mut rng);
        let bc = random::mixed_state(&["B", "C"], &[2, 2], &mut rng);
        let v = ppt_check(&a.tensor(&bc).unwrap(), &CutSpec::parse("A:BC").unwrap()).unwrap();
        assert!(v.min_eigenvalue > -1e-12);
        assert!(v.inconclusive());
    }

    #[test]
    fn witness_vector_has_negative_expectation() {
        let rho = PureState::phi_plus("A", "B").projector();
        let v = ppt_check(&rho, &CutSpec::parse("A:B").unwrap()).unwrap();
        let pt = rho.partial_transpose(&["A"]).unwrap();
        let w = &v.witness_vector;
        let val = (w.adjoint() * pt * w)[(0, 0)].re;
        assert!((val - v.min_eigenvalue).abs() < 1e-14);
    }

    #[test]
    fn vt_threshold_examples() {
        let bell = PureState::phi_plus("A", "B");
        let fam = vt_threshold(&bell, &CutSpec::parse("A:B").unwrap()).unwrap();
        assert_eq!(fam.d_tot, 4);
        assert!((fam.p_cr - 1.0 / 3.0).abs() < 1e-14);

        let prod = PureState::basis(&["A", "B"], &[2, 2], &[0, 0]).unwrap();
        let fam = vt_threshold(&prod, &CutSpec::parse("A:B").unwrap()).unwrap();
        assert_eq!(fam.p_cr, 1.0);

        let ghz = PureState::ghz(&ABC).unwrap();
        let fam = vt_threshold(&ghz, &CutSpec::parse("A:BC").unwrap()).unwrap();
        assert!((fam.p_cr - 0.2).abs() < 1e-14);
    }

    #[test]
    fn vt_family_endpoints_and_range() {
        let bell = PureState::phi_plus("A", "B");
        let cut = CutSpec::parse("A:B").unwrap();
        let fam = vt_threshold(&bell, &cut).unwrap();
        let mixed = vt_family_state(&fam.with_p(0.0)).unwrap();
        let want = DensityMatrix::maximally_mixed(&["A", "B"], &[2, 2]).unwrap();
        assert!(mixed.max_abs_diff(&want).unwrap() < 1e-15);
        let pure = vt_family_state(&fam.with_p(1.0)).unwrap();
        assert!(pure.max_abs_diff(&bell.projector()).unwrap() < 1e-15);
        assert!(vt_family_state(&fam.with_p(1.5)).is_err());
        let above = vt_family_state(&fam.with_p(fam.p_cr + 0.01)).unwrap();
        assert!(ppt_check(&above, &cut).unwrap().is_npt);
    }

    #[test]
    fn ppt_scan_agrees_with_threshold_on_two_qubits() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let cut = CutSpec::parse("A:B").unwrap();
        for _ in 0..10 {
            let psi = random::pure_state(&["A", "B"], &[2, 2], &mut rng);
            let fam = vt_threshold(&psi, &cut).unwrap();
            let mut last = f64::INFINITY;
            for k in 0..200 {
                let p = k as f64 / 199.0;
                let v = ppt_check(&vt_family_state(&fam.with_p(p)).unwrap(), &cut).unwrap();
                assert_eq!(v.is_npt, p > fam.p_cr + 1e-9, "p = {p}, p_cr = {}", fam.p_cr);
                assert!(v.min_eigenvalue <= last + 1e-12);
                last = v.min_eigenvalue;
            }
        }
    }

    #[test]
    fn admissibility_examples() {
        let ghz = PureState::ghz(&ABC).unwrap();
        let adm = example1_admissible(&ghz).unwrap();
        assert!((adm.a1a2 - 0.5).abs() < 1e-14 && (adm.b1b2 - 0.5).abs() < 1e-14 && (adm.c1c2 - 0.5).abs() < 1e-14);
        assert!(!adm.holds);

        let prod = PureState::basis(&ABC, &[2, 2, 2], &[0, 0, 0]).unwrap();
        let adm = example1_admissible(&prod).unwrap();
        assert_eq!((adm.a1a2, adm.b1b2, adm.c1c2), (0.0, 0.0, 0.0));
        assert!(!adm.holds);

        // A entangled with BC while B and C are only weakly entangled with the rest
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let found = (0..2000).any(|_| {
            let psi = random::pure_state(&ABC, &[2, 2, 2], &mut rng);
            example1_admissible(&psi).unwrap().holds
        });
        assert!(found);
    }
}
