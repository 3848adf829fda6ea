//! Dense complex linear algebra on small Hermitian matrices.
//!
//! Everything in this crate lives on matrices of side at most 16, so the
//! eigensolver is a plain cyclic Jacobi iteration: slow asymptotically but
//! accurate to a few ulps of the matrix norm, which is what the entropy and
//! partial-transpose checks need.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Hermiticity tolerance for inputs to [`eigh`].
pub const HERMITIAN_TOL: f64 = 1e-9;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Eigendecomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct Eigh {
    /// Ascending.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in the order of `values`.
    pub vectors: CMatrix,
}

impl Eigh {
    pub fn vector(&self, k: usize) -> CVector {
        self.vectors.column(k).into_owned()
    }

    /// Rebuild `V f(Λ) V†`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (k, &l) in self.values.iter().enumerate() {
            let fk = f(l);
            for i in 0..n {
                scaled[(i, k)] *= fk;
            }
        }
        &scaled * self.vectors.adjoint()
    }
}

/// Largest absolute entry.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `(M + M†) / 2`.
pub fn symmetrize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// `Tr(A B)` without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let n = a.nrows();
    let mut acc = ZERO;
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

pub fn projector(v: &CVector) -> CMatrix {
    v * v.adjoint()
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn kron_vec(a: &CVector, b: &CVector) -> CVector {
    let mut out = CVector::zeros(a.len() * b.len());
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i * b.len() + j] = x * y;
        }
    }
    out
}

pub fn basis_vector(dim: usize, k: usize) -> CVector {
    let mut v = CVector::zeros(dim);
    v[k] = ONE;
    v
}

/// Hermitian eigendecomposition. The input is symmetrized first; it is
/// rejected when it is further than [`HERMITIAN_TOL`] from Hermitian.
pub fn eigh(m: &CMatrix) -> Result<Eigh> {
    if !m.is_square() {
        return Err(Error::Shape(format!(
            "eigh needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let defect = hermiticity_defect(m);
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian(defect));
    }
    Ok(jacobi(symmetrize(m)))
}

/// Cyclic Jacobi on an exactly Hermitian matrix.
fn jacobi(mut a: CMatrix) -> Eigh {
    let n = a.nrows();
    let mut v = CMatrix::identity(n, n);
    let scale = max_abs(&a).max(f64::MIN_POSITIVE);

    for _sweep in 0..64 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= 1e-17 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r <= 1e-300 || r <= 1e-18 * scale {
                    a[(p, q)] = ZERO;
                    a[(q, p)] = ZERO;
                    continue;
                }
                let phase = apq / r;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (aqq - app) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = t * cs;
                // R e_p = c e_p - s conj(phase) e_q,  R e_q = s phase e_p + c e_q
                let rpp = re(cs);
                let rqp = -phase.conj() * sn;
                let rpq = phase * sn;
                let rqq = re(cs);

                // A <- A R
                for i in 0..n {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = aip * rpp + aiq * rqp;
                    a[(i, q)] = aip * rpq + aiq * rqq;
                }
                // A <- R† A
                for j in 0..n {
                    let apj = a[(p, j)];
                    let aqj = a[(q, j)];
                    a[(p, j)] = rpp.conj() * apj + rqp.conj() * aqj;
                    a[(q, j)] = rpq.conj() * apj + rqq.conj() * aqj;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = re(a[(p, p)].re);
                a[(q, q)] = re(a[(q, q)].re);
                // V <- V R
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = vip * rpp + viq * rqp;
                    v[(i, q)] = vip * rpq + viq * rqq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&k| a[(k, k)].re).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Eigh { values, vectors }
}

/// Orthonormalize `seed` vectors and complete them to a basis of `C^dim`
/// with computational basis vectors, taken in index order. Candidates whose
/// residual norm falls below `1e-10` are skipped.
pub fn complete_basis(seed: &[CVector], dim: usize) -> CMatrix {
    let mut basis: Vec<CVector> = Vec::with_capacity(dim);
    let candidates = seed
        .iter()
        .cloned()
        .chain((0..dim).map(|k| basis_vector(dim, k)));
    for cand in candidates {
        if basis.len() == dim {
            break;
        }
        let mut w = cand;
        // two passes of modified Gram-Schmidt
        for _ in 0..2 {
            for b in &basis {
                let overlap = b.dotc(&w);
                w -= b * overlap;
            }
        }
        let norm = w.norm();
        if norm > 1e-10 {
            basis.push(w.unscale(norm));
        }
    }
    CMatrix::from_columns(&basis)
}

/// `U = V exp(i Λ) V†` for Hermitian `h = V Λ V†`.
pub fn expi_hermitian(h: &CMatrix) -> Result<CMatrix> {
    let e = eigh(h)?;
    let n = e.values.len();
    let mut scaled = e.vectors.clone();
    for (k, &l) in e.values.iter().enumerate() {
        let ph = Complex64::from_polar(1.0, l);
        for i in 0..n {
            scaled[(i, k)] *= ph;
        }
    }
    Ok(&scaled * e.vectors.adjoint())
}

pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let n = u.nrows();
    max_abs_diff(&(u * u.adjoint()), &CMatrix::identity(n, n))
}
