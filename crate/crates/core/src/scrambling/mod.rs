//! Scrambling functionals of an algebra under a Hamiltonian: the
//! short-time rate σ_s, the Monte-Carlo A-OTOC G_A(t), and its long-time
//! average σ_l in the no-resonance closed form built from Gram matrices of
//! reduced eigenstates.

mod otoc;

pub use otoc::{
    otoc_curve, otoc_mc, otoc_time_average, short_time_fit, OtocEstimate, ShortTimeFit,
    DEFAULT_SAMPLES,
};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraSpec, ProjectionKind};
use crate::error::{Error, Result};
use crate::models::HamiltonianModel;
use crate::opspace::{self, hs_inner, hs_norm, Operator};


/// Default gap-coincidence tolerance of [`resonance_check`].
pub const RESONANCE_TOL: f64 = 1e-8;

/// σ_s = ‖Q(H)‖₂.
pub fn sigma_s(alg: &AlgebraSpec, h: &Operator) -> Result<f64> {
    let defect = opspace::hermiticity_defect(h);
    if defect > opspace::HERMITIAN_TOL {
        return Err(Error::NotHermitian(defect));
    }
    let q = alg.projection(ProjectionKind::Complement).apply(h)?;
    Ok(hs_norm(&q))
}

/// Which side of a bipartition.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// The algebra factor A (block size).
    Algebra,
    /// The commutant factor A′ (block multiplicity).
    Commutant,
}

/// Gram matrices `G^X_kl = Tr(ρ_k^X ρ_l^X)` of the reduced eigenstates
/// `ρ_k^X` of `VΠ_kV†`, for X = A and X = A′ of a factor algebra.
#[derive(Clone, Debug, PartialEq)]
pub struct GramPair {
    pub gram_a: DMatrix<f64>,
    pub gram_b: DMatrix<f64>,
    /// dim of the algebra factor (block size).
    pub dim_a: usize,
    /// dim of the commutant factor (block multiplicity).
    pub dim_b: usize,
}

impl GramPair {
    pub fn dim(&self) -> usize {
        self.dim_a * self.dim_b
    }

    pub fn gram(&self, side: Side) -> &DMatrix<f64> {
        match side {
            Side::Algebra => &self.gram_a,
            Side::Commutant => &self.gram_b,
        }
    }

    /// `R1[k,l] = ⟨P_X(Π_k), P_X(Π_l)⟩`.
    pub fn r1(&self, side: Side) -> DMatrix<f64> {
        match side {
            Side::Algebra => &self.gram_a / self.dim_b as f64,
            Side::Commutant => &self.gram_b / self.dim_a as f64,
        }
    }

    /// `R0[l,k] = ‖P_X(|φ_k⟩⟨φ_l|)‖₂²`.
    pub fn r0(&self, side: Side) -> DMatrix<f64> {
        match side {
            Side::Algebra => &self.gram_b / self.dim_b as f64,
            Side::Commutant => &self.gram_a / self.dim_a as f64,
        }
    }

    /// Purities of the reduced states on one side.
    pub fn purities(&self, side: Side) -> Vec<f64> {
        self.gram(side).diagonal().iter().copied().collect()
    }

    /// The no-resonance average `1 − d⁻² Σ_kl (1 − δ_kl/2)(G^A_kl² + G^B_kl²)`.
    pub fn nrc_value(&self) -> f64 {
        nrc_from_r(
            &self.r0(Side::Algebra),
            &self.r1(Side::Algebra),
            &self.r0(Side::Commutant),
            &self.r1(Side::Commutant),
        )
    }
}

/// `1 − (1/d) Σ_X [Tr(R0^X R1^{X′}) − ½ Tr(R0_D^X R1_D^{X′})]` for
/// X ∈ {A, A′}; the `_D` parts keep only diagonals.
pub fn nrc_from_r(
    r0_a: &DMatrix<f64>,
    r1_a: &DMatrix<f64>,
    r0_c: &DMatrix<f64>,
    r1_c: &DMatrix<f64>,
) -> f64 {
    let d = r0_a.nrows() as f64;
    let term = |r0: &DMatrix<f64>, r1: &DMatrix<f64>| {
        let full = (r0 * r1).trace();
        let diag: f64 = r0.diagonal().component_mul(&r1.diagonal()).sum();
        full - 0.5 * diag
    };
    1.0 - (term(r0_a, r1_c) + term(r0_c, r1_a)) / d
}

/// Reduced eigenstates `ρ_k^A` (size × size) and `ρ_k^B` (mult × mult) of
/// `VΠ_kV†` in the algebra's block basis, in eigenvalue order.
pub(crate) struct ReducedStates {
    pub a: Vec<Operator>,
    pub b: Vec<Operator>,
    /// Block-basis coordinates `W†Vφ_k` as columns.
    pub psi: Operator,
    pub dim_a: usize,
    pub dim_b: usize,
}

pub(crate) fn reduced_states(
    alg: &AlgebraSpec,
    model: &HamiltonianModel,
    v: &Operator,
) -> Result<ReducedStates> {
    let (dim_a, dim_b) = alg.factor_dims()?;
    let d = alg.dim();
    if model.dim() != d || v.shape() != (d, d) {
        return Err(Error::DimensionMismatch { expected: d, found: model.dim().max(v.nrows()) });
    }
    opspace::ensure_unitary(v)?;
    let psi = alg.frame().adjoint() * v * &model.spectrum().vectors;
    let mut a = Vec::with_capacity(d);
    let mut b = Vec::with_capacity(d);
    for k in 0..d {
        // M[row = mult index, col = size index]
        let m = Operator::from_fn(dim_b, dim_a, |r, c| psi[(r * dim_a + c, k)]);
        a.push(m.transpose() * m.conjugate());
        b.push(&m * m.adjoint());
    }
    Ok(ReducedStates { a, b, psi, dim_a, dim_b })
}

fn gram_of(states: &[Operator]) -> DMatrix<f64> {
    let d = states.len();
    let mut g = DMatrix::zeros(d, d);
    for k in 0..d {
        for l in k..d {
            // Tr(ρ_k ρ_l) = ⟨ρ_k, ρ_l⟩ for Hermitian ρ; real up to rounding.
            let v = states[k].dotc(&states[l]).re;
            g[(k, l)] = v;
            g[(l, k)] = v;
        }
    }
    g
}

/// Gram matrices of the reduced eigenstates of `VΠ_kV†` relative to a
/// factor algebra.
pub fn gram_matrices(alg: &AlgebraSpec, model: &HamiltonianModel, v: &Operator) -> Result<GramPair> {
    let rs = reduced_states(alg, model, v)?;
    Ok(GramPair {
        gram_a: gram_of(&rs.a),
        gram_b: gram_of(&rs.b),
        dim_a: rs.dim_a,
        dim_b: rs.dim_b,
    })
}

/// σ_l in the no-resonance closed form, with the spectral diagnostic that
/// says how far the hypothesis behind it holds.
#[derive(Clone, Debug)]
pub struct NrcEstimate {
    pub value: f64,
    pub resonances: ResonanceReport,
}

/// Long-time average of the A-OTOC of `conjugate(alg, V†)`: the NRC closed
/// form evaluated on the eigenstates `Vφ_k` relative to `alg`. Computed whatever the actual
/// gap structure; see [`NrcEstimate::resonances`].
pub fn sigma_l_nrc(alg: &AlgebraSpec, model: &HamiltonianModel, v: &Operator) -> Result<NrcEstimate> {
    let value = gram_matrices(alg, model, v)?.nrc_value();
    Ok(NrcEstimate { value, resonances: resonance_check(model, RESONANCE_TOL) })
}

/// R matrices of both sides through the conditional expectations, valid
/// for any algebra. Cost O(d⁵); intended as a cross-check at small d.
pub fn r_matrices_general(
    alg: &AlgebraSpec,
    model: &HamiltonianModel,
    v: &Operator,
) -> Result<[DMatrix<f64>; 4]> {
    let d = alg.dim();
    opspace::ensure_unitary(v)?;
    let phi = v * &model.spectrum().vectors;
    let pa = alg.projection(ProjectionKind::OntoAlgebra);
    let pc = alg.projection(ProjectionKind::OntoCommutant);
    let outer = |k: usize, l: usize| phi.column(k) * phi.column(l).adjoint();
    let mut r0_a = DMatrix::zeros(d, d);
    let mut r0_c = DMatrix::zeros(d, d);
    let mut proj_a = Vec::with_capacity(d);
    let mut proj_c = Vec::with_capacity(d);
    for k in 0..d {
        let pk = outer(k, k);
        proj_a.push(pa.apply(&pk)?);
        proj_c.push(pc.apply(&pk)?);
        for l in 0..d {
            let kl = outer(k, l);
            r0_a[(l, k)] = pa.apply(&kl)?.norm_squared();
            r0_c[(l, k)] = pc.apply(&kl)?.norm_squared();
        }
    }
    let gram = |ps: &[Operator]| -> Result<DMatrix<f64>> {
        let mut g = DMatrix::zeros(d, d);
        for k in 0..d {
            for l in 0..d {
                g[(k, l)] = hs_inner(&ps[k], &ps[l])?.re;
            }
        }
        Ok(g)
    };
    Ok([r0_a, gram(&proj_a)?, r0_c, gram(&proj_c)?])
}

/// NRC value through [`r_matrices_general`].
pub fn sigma_l_nrc_general(alg: &AlgebraSpec, model: &HamiltonianModel, v: &Operator) -> Result<f64> {
    let [r0_a, r1_a, r0_c, r1_c] = r_matrices_general(alg, model, v)?;
    Ok(nrc_from_r(&r0_a, &r1_a, &r0_c, &r1_c))
}

/// A pair of coinciding gaps `(E_k − E_l) ≈ (E_m − E_n)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Resonance {
    pub first: (usize, usize),
    pub second: (usize, usize),
    pub delta: f64,
}

/// Gap-coincidence diagnostic for the no-resonance hypothesis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResonanceReport {
    pub tol: f64,
    /// Number of positive gaps examined, d(d−1)/2 minus degeneracies.
    pub n_gaps: usize,
    /// Pairs of eigenvalues closer than `tol`.
    pub degeneracies: usize,
    /// Pairs of distinct positive gaps closer than `tol` (counted within
    /// chains of neighbouring coincidences).
    pub resonances: usize,
    /// Closest coincidences, smallest first (at most 10).
    pub worst: Vec<Resonance>,
}

impl ResonanceReport {
    pub fn is_generic(&self) -> bool {
        self.resonances == 0 && self.degeneracies == 0
    }
}

const WORST_KEPT: usize = 10;

pub fn resonance_check(model: &HamiltonianModel, tol: f64) -> ResonanceReport {
    let e = model.energies();
    let d = e.len();
    let mut gaps = Vec::with_capacity(d * d.saturating_sub(1) / 2);
    let mut degeneracies = 0;
    for k in 0..d {
        for l in 0..k {
            let g = e[k] - e[l];
            if g < tol {
                degeneracies += 1;
            } else {
                gaps.push((g, k, l));
            }
        }
    }
    gaps.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut resonances = 0;
    let mut worst = Vec::new();
    let mut chain = 1usize;
    for w in gaps.windows(2) {
        let delta = w[1].0 - w[0].0;
        if delta < tol {
            resonances += chain;
            chain += 1;
            worst.push(Resonance { first: (w[0].1, w[0].2), second: (w[1].1, w[1].2), delta });
        } else {
            chain = 1;
        }
    }
    worst.sort_by(|a, b| a.delta.total_cmp(&b.delta));
    worst.truncate(WORST_KEPT);
    ResonanceReport { tol, n_gaps: gaps.len(), degeneracies, resonances, worst }
}
