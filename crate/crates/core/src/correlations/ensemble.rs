use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::qstate::{CutSpec, DensityMatrix, Layout, PureState};

/// Finite mixture of product pure states across a cut.
#[derive(Debug, Clone)]
pub struct SeparableEnsemble {
    pub cut: CutSpec,
    pub weights: Vec<f64>,
    pub product_states: Vec<(PureState, PureState)>,
}

impl SeparableEnsemble {
    pub fn new(cut: CutSpec, weights: Vec<f64>, product_states: Vec<(PureState, PureState)>) -> Result<Self> {
        if weights.len() != product_states.len() || weights.is_empty() {
            return Err(Error::Shape(format!(
                "{} weights for {} product states",
                weights.len(),
                product_states.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| **w < -1e-12 || !w.is_finite()) {
            return Err(Error::OutOfRange(format!("ensemble weight {w} is negative")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::NotNormalized(total));
        }
        for (l, r) in &product_states {
            if l.labels() != cut.left.as_slice() || r.labels() != cut.right.as_slice() {
                return Err(Error::DimensionMismatch(format!(
                    "product state on {:?} x {:?} does not match cut {cut}",
                    l.labels(),
                    r.labels()
                )));
            }
            if l.dims() != product_states[0].0.dims() || r.dims() != product_states[0].1.dims() {
                return Err(Error::DimensionMismatch("product states of mixed dimensions".into()));
            }
        }
        Ok(Self {
            cut,
            weights,
            product_states,
        })
    }

    /// Spectral decompositions of two local states, paired up.
    pub fn from_product(left: &DensityMatrix, right: &DensityMatrix) -> Result<Self> {
        let cut = CutSpec::new(left.labels(), right.labels());
        let (el, er) = (left.eigh(), right.eigh());
        let mut weights = Vec::new();
        let mut states = Vec::new();
        for (i, &pl) in el.values.iter().enumerate() {
            for (j, &pr) in er.values.iter().enumerate() {
                let w = pl * pr;
                if w > 1e-14 {
                    weights.push(w);
                    states.push((
                        PureState::normalized(left.labels(), left.dims(), el.vector(i))?,
                        PureState::normalized(right.labels(), right.dims(), er.vector(j))?,
                    ));
                }
            }
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        Self::new(cut, weights, states)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `Σ w_k |l_k><l_k| ⊗ |r_k><r_k|`, labels in cut order.
    pub fn assemble(&self) -> Result<DensityMatrix> {
        let (l0, r0) = &self.product_states[0];
        let labels = self.cut.order();
        let dims: Vec<usize> = l0.dims().iter().chain(r0.dims()).copied().collect();
        let layout = Layout::new(&labels, &dims)?;
        let n = layout.total_dim();
        let mut m = CMatrix::zeros(n, n);
        for (w, (l, r)) in self.weights.iter().zip(&self.product_states) {
            let v = linalg::kron_vec(l.amplitudes(), r.amplitudes());
            m += linalg::projector(&v).scale(*w);
        }
        let tr = linalg::trace(&m).re;
        Ok(DensityMatrix::from_parts(layout, m.unscale(tr)))
    }
}

impl Serialize for SeparableEnsemble {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Member {
            weight: f64,
            left_re: Vec<f64>,
            left_im: Vec<f64>,
            right_re: Vec<f64>,
            right_im: Vec<f64>,
        }
        #[derive(Serialize)]
        struct Repr {
            cut: String,
            members: Vec<Member>,
        }
        let parts = |p: &PureState| -> (Vec<f64>, Vec<f64>) {
            (
                p.amplitudes().iter().map(|z| z.re).collect(),
                p.amplitudes().iter().map(|z| z.im).collect(),
            )
        };
        let members = self
            .weights
            .iter()
            .zip(&self.product_states)
            .map(|(&weight, (l, r))| {
                let (left_re, left_im) = parts(l);
                let (right_re, right_im) = parts(r);
                Member {
                    weight,
                    left_re,
                    left_im,
                    right_re,
                    right_im,
                }
            })
            .collect();
        Repr {
            cut: self.cut.to_string(),
            members,
        }
        .serialize(s)
    }
}
