use serde::{Deserialize, Serialize};

use super::AlgebraSpec;
use crate::error::{Error, Result};
use crate::opspace::{self, Operator, C64, ZERO};

/// Which Hilbert–Schmidt-orthogonal projection of B(H) a [`SuperProjection`]
/// realizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionKind {
    /// Conditional expectation P_A onto the algebra.
    OntoAlgebra,
    /// Conditional expectation P_A′ onto the commutant.
    OntoCommutant,
    /// P_{A+A′} = P_A + P_A′ − P_A P_A′.
    OntoSum,
    /// Q = 1 − P_{A+A′}.
    Complement,
}

/// A projection superoperator tied to an algebra.
///
/// The two conditional expectations are the Kraus sums P_A(x) = Σ_β f_β x f_β†
/// and P_A′(x) = Σ_α e_α x e_α†; since every Kraus operator is a frame-rotated
/// matrix unit, they are applied as block averages in the frame basis, and
/// [`SuperProjection::kraus`] materializes the family itself.
#[derive(Clone, Debug)]
pub struct SuperProjection {
    target: AlgebraSpec,
    kind: ProjectionKind,
}

impl SuperProjection {
    pub fn new(target: AlgebraSpec, kind: ProjectionKind) -> Self {
        Self { target, kind }
    }

    pub fn kind(&self) -> ProjectionKind {
        self.kind
    }

    pub fn target(&self) -> &AlgebraSpec {
        &self.target
    }

    pub fn apply(&self, x: &Operator) -> Result<Operator> {
        let d = self.target.dim();
        if x.shape() != (d, d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: x.nrows(),
            });
        }
        let w = self.target.frame();
        let y = w.adjoint() * x * w;
        let z = frame_apply(&self.target, self.kind, &y);
        Ok(w * z * w.adjoint())
    }

    /// Kraus family of a conditional expectation; `None` for the sum and
    /// complement projections, which are not completely positive.
    pub fn kraus(&self) -> Option<Vec<Operator>> {
        match self.kind {
            ProjectionKind::OntoAlgebra => Some(self.target.commutant_basis()),
            ProjectionKind::OntoCommutant => Some(self.target.algebra_basis()),
            _ => None,
        }
    }

    /// Dense d²×d² matrix acting on column-major vec(x). Only for small d.
    pub fn to_superoperator(&self) -> Result<Operator> {
        let d = self.target.dim();
        let mut m = Operator::zeros(d * d, d * d);
        for j in 0..d {
            for i in 0..d {
                let mut unit = Operator::zeros(d, d);
                unit[(i, j)] = C64::new(1.0, 0.0);
                let img = self.apply(&unit)?;
                let col = j * d + i;
                for (r, v) in img.iter().enumerate() {
                    m[(r, col)] = *v;
                }
            }
        }
        Ok(m)
    }
}

/// Apply a projection to `y` expressed in the algebra's frame basis.
pub(crate) fn frame_apply(alg: &AlgebraSpec, kind: ProjectionKind, y: &Operator) -> Operator {
    match kind {
        ProjectionKind::OntoAlgebra => average_multiplicity(alg, y),
        ProjectionKind::OntoCommutant => average_size(alg, y),
        ProjectionKind::OntoSum => onto_sum(alg, y),
        ProjectionKind::Complement => y - onto_sum(alg, y),
    }
}

fn onto_sum(alg: &AlgebraSpec, y: &Operator) -> Operator {
    let pa = average_multiplicity(alg, y);
    let pc = average_size(alg, y);
    let pac = average_multiplicity(alg, &pc);
    pa + pc - pac
}

/// Block J ↦ 1_{n_J} ⊗ (Tr_{n_J} y_JJ)/n_J; off-diagonal blocks dropped.
pub(crate) fn average_multiplicity(alg: &AlgebraSpec, y: &Operator) -> Operator {
    let d = alg.dim();
    let mut z = Operator::zeros(d, d);
    for (blk, &o) in alg.blocks().iter().zip(alg.offsets()) {
        let (n, s) = (blk.mult, blk.size);
        let inv = 1.0 / n as f64;
        for l in 0..s {
            for m in 0..s {
                let avg = (0..n).fold(ZERO, |acc, a| acc + y[(o + a * s + l, o + a * s + m)]) * inv;
                for a in 0..n {
                    z[(o + a * s + l, o + a * s + m)] = avg;
                }
            }
        }
    }
    z
}

/// Block J ↦ (Tr_{d_J} y_JJ)/d_J ⊗ 1_{d_J}; off-diagonal blocks dropped.
pub(crate) fn average_size(alg: &AlgebraSpec, y: &Operator) -> Operator {
    let d = alg.dim();
    let mut z = Operator::zeros(d, d);
    for (blk, &o) in alg.blocks().iter().zip(alg.offsets()) {
        let (n, s) = (blk.mult, blk.size);
        let inv = 1.0 / s as f64;
        for a in 0..n {
            for b in 0..n {
                let avg = (0..s).fold(ZERO, |acc, l| acc + y[(o + a * s + l, o + b * s + l)]) * inv;
                for l in 0..s {
                    z[(o + a * s + l, o + b * s + l)] = avg;
                }
            }
        }
    }
    z
}

/// Choi state ρ = (P ⊗ 1)(|Φ⁺⟩⟨Φ⁺|) on the doubled space, |Φ⁺⟩ = d^{-1/2} Σ |i⟩|i⟩.
#[derive(Clone, Debug)]
pub struct ChoiState {
    pub rho: Operator,
}

impl ChoiState {
    pub fn trace(&self) -> f64 {
        self.rho.trace().re
    }

    pub fn purity(&self) -> f64 {
        self.rho.norm_squared()
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(opspace::eig_hermitian(&self.rho)?.values[0])
    }
}

pub fn choi(p: &SuperProjection) -> Result<ChoiState> {
    if p.kind() != ProjectionKind::OntoAlgebra {
        return Err(Error::WrongKind {
            expected: ProjectionKind::OntoAlgebra,
            found: p.kind(),
        });
    }
    let d = p.target().dim();
    let mut rho = Operator::zeros(d * d, d * d);
    let inv = 1.0 / d as f64;
    for i in 0..d {
        for j in 0..d {
            let mut unit = Operator::zeros(d, d);
            unit[(i, j)] = C64::new(1.0, 0.0);
            let img = p.apply(&unit)?;
            // img ⊗ |i⟩⟨j|
            for r in 0..d {
                for c in 0..d {
                    rho[(r * d + i, c * d + j)] = img[(r, c)] * inv;
                }
            }
        }
    }
    Ok(ChoiState { rho })
}
