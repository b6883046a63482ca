use nalgebra::DMatrix;

use super::{Operator, C64};

/// Eigen-decomposition of a Hermitian operator.
///
/// Eigenvalues ascend. Each eigenvector column is phase-fixed so that its
/// first component with modulus above [`PHASE_PIVOT_TOL`] is real and
/// positive.
#[derive(Clone, Debug)]
pub struct SpectralDecomp {
    pub values: Vec<f64>,
    pub vectors: Operator,
}

/// Components smaller than this are skipped when fixing eigenvector phases.
pub const PHASE_PIVOT_TOL: f64 = 1e-8;

impl SpectralDecomp {
    /// Decompose `h`, which the caller guarantees to be exactly Hermitian.
    pub(crate) fn from_hermitian(h: &Operator) -> Self {
        let d = h.nrows();
        let eig = h.clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let mut vectors = DMatrix::zeros(d, d);
        for (col, &k) in order.iter().enumerate() {
            let v = eig.eigenvectors.column(k);
            let pivot = v
                .iter()
                .find(|c| c.norm() > PHASE_PIVOT_TOL)
                .copied()
                .unwrap_or(C64::new(1.0, 0.0));
            let phase = pivot.conj() / pivot.norm();
            for r in 0..d {
                vectors[(r, col)] = v[r] * phase;
            }
        }
        Self { values, vectors }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn eigenvector(&self, k: usize) -> nalgebra::DVectorView<'_, C64> {
        self.vectors.column(k)
    }

    /// Rank-one eigenprojector Π_k = |φ_k⟩⟨φ_k|.
    pub fn projector(&self, k: usize) -> Operator {
        let v = self.vectors.column(k);
        &v * v.adjoint()
    }

    /// Σ_k f(E_k) Π_k.
    pub fn apply_fn(&self, f: impl Fn(f64) -> C64) -> Operator {
        let d = self.dim();
        let mut scaled = self.vectors.clone();
        for (k, &e) in self.values.iter().enumerate() {
            let s = f(e);
            for r in 0..d {
                scaled[(r, k)] *= s;
            }
        }
        scaled * self.vectors.adjoint()
    }

    pub fn reconstruct(&self) -> Operator {
        self.apply_fn(|e| C64::new(e, 0.0))
    }
}
