//! Generalized tensor product structures.
//!
//! An algebra is described by its block structure H ≅ ⊕_J C^{n_J} ⊗ C^{d_J}
//! and a *frame* unitary W whose columns are the basis realizing that
//! decomposition: column `offset_J + a·d_J + b` is |J; a⟩ ⊗ |J; b⟩. The
//! algebra acts as `1_{n_J} ⊗ M_{d_J}` on every block, its commutant as
//! `M_{n_J} ⊗ 1_{d_J}`.

mod geometry;
mod projection;

pub use geometry::{
    commutant_bruteforce, commutant_of_span, distance, distance_choi, distance_superoperator,
    metric_element, operator_entanglement, span_projector,
};
pub use projection::{choi, ChoiState, ProjectionKind, SuperProjection};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::opspace::{self, Operator, C64, ONE};

/// One summand C^{mult} ⊗ C^{size} of the decomposition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Block {
    /// Multiplicity n_J (the inaccessible factor).
    pub mult: usize,
    /// Dimension d_J of the factor the algebra acts on.
    pub size: usize,
}

impl Block {
    pub fn new(mult: usize, size: usize) -> Self {
        Self { mult, size }
    }

    pub fn dim(&self) -> usize {
        self.mult * self.size
    }
}

#[derive(Clone, Debug)]
pub struct AlgebraSpec {
    dim: usize,
    blocks: Vec<Block>,
    offsets: Vec<usize>,
    frame: Operator,
}

impl AlgebraSpec {
    pub fn new(blocks: Vec<Block>, frame: Operator) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidBlocks("no blocks".into()));
        }
        if let Some(b) = blocks.iter().find(|b| b.mult == 0 || b.size == 0) {
            return Err(Error::InvalidBlocks(format!("empty block {b:?}")));
        }
        let dim: usize = blocks.iter().map(Block::dim).sum();
        if frame.shape() != (dim, dim) {
            return Err(Error::InvalidBlocks(format!(
                "blocks span dimension {dim} but frame is {}x{}",
                frame.nrows(),
                frame.ncols()
            )));
        }
        opspace::ensure_unitary(&frame)?;
        let offsets = blocks
            .iter()
            .scan(0, |acc, b| {
                let at = *acc;
                *acc += b.dim();
                Some(at)
            })
            .collect();
        Ok(Self {
            dim,
            blocks,
            offsets,
            frame,
        })
    }

    /// Operators diagonal in the basis given by the columns of `frame`.
    pub fn maximal_abelian(n_qubits: usize, frame: Operator) -> Result<Self> {
        let d = 1usize << n_qubits;
        Self::new(vec![Block::new(1, 1); d], frame)
    }

    /// B(H_A) ⊗ 1_B with H_A the qubits in `left_sites`, rotated by `frame`.
    pub fn factor_bipartition(n_qubits: usize, left_sites: &[usize], frame: Operator) -> Result<Self> {
        let mut left = left_sites.to_vec();
        left.sort_unstable();
        left.dedup();
        if left.len() != left_sites.len() || left.iter().any(|&s| s >= n_qubits) {
            return Err(Error::InvalidSites(format!(
                "left sites {left_sites:?} invalid for {n_qubits} qubits"
            )));
        }
        if left.is_empty() || left.len() == n_qubits {
            return Err(Error::InvalidSites(
                "bipartition needs a nonempty proper subset of sites".into(),
            ));
        }
        let right: Vec<usize> = (0..n_qubits).filter(|s| !left.contains(s)).collect();
        let (da, db) = (1usize << left.len(), 1usize << right.len());
        let d = da * db;
        let mut perm = Operator::zeros(d, d);
        for a in 0..db {
            for b in 0..da {
                let mut q = 0usize;
                for (k, &site) in left.iter().enumerate() {
                    let bit = (b >> (left.len() - 1 - k)) & 1;
                    q |= bit << (n_qubits - 1 - site);
                }
                for (k, &site) in right.iter().enumerate() {
                    let bit = (a >> (right.len() - 1 - k)) & 1;
                    q |= bit << (n_qubits - 1 - site);
                }
                perm[(q, a * da + b)] = ONE;
            }
        }
        if frame.shape() != (d, d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: frame.nrows(),
            });
        }
        Self::new(vec![Block::new(db, da)], frame * perm)
    }

    /// Ad u applied to the algebra: the frame becomes u·W.
    pub fn conjugate(&self, u: &Operator) -> Result<Self> {
        if u.shape() != (self.dim, self.dim) {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: u.nrows(),
            });
        }
        opspace::ensure_unitary(u)?;
        Ok(Self {
            frame: u * &self.frame,
            ..self.clone()
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn frame(&self) -> &Operator {
        &self.frame
    }

    pub(crate) fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    /// dim A = Σ_J d_J².
    pub fn dim_algebra(&self) -> usize {
        self.blocks.iter().map(|b| b.size * b.size).sum()
    }

    /// dim A′ = Σ_J n_J².
    pub fn dim_commutant(&self) -> usize {
        self.blocks.iter().map(|b| b.mult * b.mult).sum()
    }

    pub fn center_dim(&self) -> usize {
        self.blocks.len()
    }

    /// n_J/d_J identical across blocks.
    pub fn is_collinear(&self) -> bool {
        let b0 = self.blocks[0];
        self.blocks
            .iter()
            .all(|b| b.mult * b0.size == b0.mult * b.size)
    }

    pub fn is_factor(&self) -> bool {
        self.blocks.len() == 1
    }

    /// (d_A, d_B) = (size, mult) of the single block of a factor.
    pub fn factor_dims(&self) -> Result<(usize, usize)> {
        match self.blocks.as_slice() {
            [b] => Ok((b.size, b.mult)),
            bs => Err(Error::NotFactor(bs.len())),
        }
    }

    /// Isomorphism class check: same dimension and block multiset.
    pub fn same_type(&self, other: &Self) -> bool {
        let mut a = self.blocks.clone();
        let mut b = other.blocks.clone();
        a.sort();
        b.sort();
        self.dim == other.dim && a == b
    }

    /// Algebra equality up to frame gauge: distance below 1e-8.
    pub fn approx_eq(&self, other: &Self) -> bool {
        self.same_type(other) && distance(self, other).map(|d| d < 1e-8).unwrap_or(false)
    }

    pub fn projection(&self, kind: ProjectionKind) -> SuperProjection {
        SuperProjection::new(self.clone(), kind)
    }

    /// Basis element |J; a, l⟩⟨J; b, m| in the frame basis (unrotated).
    fn frame_unit(&self, j: usize, (a, l): (usize, usize), (b, m): (usize, usize)) -> (usize, usize) {
        let o = self.offsets[j];
        let s = self.blocks[j].size;
        (o + a * s + l, o + b * s + m)
    }

    fn rotate(&self, x: &Operator) -> Operator {
        &self.frame * x * self.frame.adjoint()
    }

    /// Orthogonal algebra basis e_α = d_J^{-1/2} 1_{n_J} ⊗ |ℓ⟩⟨m| (frame-rotated).
    pub fn algebra_basis(&self) -> Vec<Operator> {
        self.algebra_elements(|b| 1.0 / (b.size as f64).sqrt())
    }

    /// Orthonormal algebra basis ẽ_α = n_J^{-1/2} 1_{n_J} ⊗ |ℓ⟩⟨m|.
    pub fn algebra_orthonormal_basis(&self) -> Vec<Operator> {
        self.algebra_elements(|b| 1.0 / (b.mult as f64).sqrt())
    }

    /// Orthogonal commutant basis f_β = n_J^{-1/2} |ℓ⟩⟨m| ⊗ 1_{d_J}.
    pub fn commutant_basis(&self) -> Vec<Operator> {
        self.commutant_elements(|b| 1.0 / (b.mult as f64).sqrt())
    }

    /// Orthonormal commutant basis f̃_β = d_J^{-1/2} |ℓ⟩⟨m| ⊗ 1_{d_J}.
    pub fn commutant_orthonormal_basis(&self) -> Vec<Operator> {
        self.commutant_elements(|b| 1.0 / (b.size as f64).sqrt())
    }

    fn algebra_elements(&self, scale: impl Fn(&Block) -> f64) -> Vec<Operator> {
        let mut out = Vec::with_capacity(self.dim_algebra());
        for (j, blk) in self.blocks.iter().enumerate() {
            let c = C64::new(scale(blk), 0.0);
            for l in 0..blk.size {
                for m in 0..blk.size {
                    let mut x = Operator::zeros(self.dim, self.dim);
                    for a in 0..blk.mult {
                        x[self.frame_unit(j, (a, l), (a, m))] = c;
                    }
                    out.push(self.rotate(&x));
                }
            }
        }
        out
    }

    fn commutant_elements(&self, scale: impl Fn(&Block) -> f64) -> Vec<Operator> {
        let mut out = Vec::with_capacity(self.dim_commutant());
        for (j, blk) in self.blocks.iter().enumerate() {
            let c = C64::new(scale(blk), 0.0);
            for l in 0..blk.mult {
                for m in 0..blk.mult {
                    let mut x = Operator::zeros(self.dim, self.dim);
                    for b in 0..blk.size {
                        x[self.frame_unit(j, (l, b), (m, b))] = c;
                    }
                    out.push(self.rotate(&x));
                }
            }
        }
        out
    }

    /// ⊕_J 1_{n_J} ⊗ X_J (frame-rotated) from one d_J×d_J factor per block.
    pub fn embed_algebra_element(&self, factors: &[Operator]) -> Result<Operator> {
        self.check_factors(factors, |b| b.size)?;
        let mut x = Operator::zeros(self.dim, self.dim);
        for (j, (blk, f)) in self.blocks.iter().zip(factors).enumerate() {
            for a in 0..blk.mult {
                for l in 0..blk.size {
                    for m in 0..blk.size {
                        x[self.frame_unit(j, (a, l), (a, m))] = f[(l, m)];
                    }
                }
            }
        }
        Ok(self.rotate(&x))
    }

    /// ⊕_J Y_J ⊗ 1_{d_J} (frame-rotated) from one n_J×n_J factor per block.
    pub fn embed_commutant_element(&self, factors: &[Operator]) -> Result<Operator> {
        self.check_factors(factors, |b| b.mult)?;
        let mut x = Operator::zeros(self.dim, self.dim);
        for (j, (blk, f)) in self.blocks.iter().zip(factors).enumerate() {
            for b in 0..blk.size {
                for l in 0..blk.mult {
                    for m in 0..blk.mult {
                        x[self.frame_unit(j, (l, b), (m, b))] = f[(l, m)];
                    }
                }
            }
        }
        Ok(self.rotate(&x))
    }

    fn check_factors(&self, factors: &[Operator], want: impl Fn(&Block) -> usize) -> Result<()> {
        if factors.len() != self.blocks.len() {
            return Err(Error::InvalidBlocks(format!(
                "{} factors for {} blocks",
                factors.len(),
                self.blocks.len()
            )));
        }
        for (blk, f) in self.blocks.iter().zip(factors) {
            if f.shape() != (want(blk), want(blk)) {
                return Err(Error::DimensionMismatch {
                    expected: want(blk),
                    found: f.nrows(),
                });
            }
        }
        Ok(())
    }
}

/// JSON form: `{dim, blocks: [[n, d], ...], frame: [re, im, ...]}` with the
/// frame row-major.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AlgebraSpecJson {
    dim: usize,
    blocks: Vec<[usize; 2]>,
    frame: Vec<f64>,
}

impl Serialize for AlgebraSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        AlgebraSpecJson {
            dim: self.dim,
            blocks: self.blocks.iter().map(|b| [b.mult, b.size]).collect(),
            frame: opspace::to_interleaved(&self.frame),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for AlgebraSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = AlgebraSpecJson::deserialize(d)?;
        let frame = opspace::from_interleaved(raw.dim, &raw.frame).map_err(serde::de::Error::custom)?;
        let blocks = raw.blocks.iter().map(|&[n, s]| Block::new(n, s)).collect();
        let spec = AlgebraSpec::new(blocks, frame).map_err(serde::de::Error::custom)?;
        if spec.dim != raw.dim {
            return Err(serde::de::Error::custom("block dimensions disagree with dim"));
        }
        Ok(spec)
    }
}

