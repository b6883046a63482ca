//! Dense complex operators on finite-dimensional (mostly qubit) Hilbert
//! spaces: Hilbert–Schmidt geometry, tensor plumbing, spectral calculus and
//! Haar sampling.
//!
//! Qubit ordering: site 0 is the leftmost tensor factor, i.e. the most
//! significant bit of a basis index.

mod rng;
mod spectral;

pub use rng::RngStream;
pub use spectral::{SpectralDecomp, PHASE_PIVOT_TOL};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Operator = DMatrix<C64>;

/// Max entry deviation |M − M†| accepted when tagging an operator Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Tolerance for post-conditions (unitarity, skew-Hermiticity).
pub const POST_TOL: f64 = 1e-10;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn identity(d: usize) -> Operator {
    Operator::identity(d, d)
}

pub fn kron(a: &Operator, b: &Operator) -> Operator {
    a.kronecker(b)
}

pub fn commutator(a: &Operator, b: &Operator) -> Operator {
    a * b - b * a
}

/// Largest entry modulus of `a − b`.
pub fn max_abs_diff(a: &Operator, b: &Operator) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn check_same_dim(a: &Operator, b: &Operator) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            found: b.nrows(),
        });
    }
    Ok(())
}

/// ⟨a, b⟩ = Tr(a† b).
pub fn hs_inner(a: &Operator, b: &Operator) -> Result<C64> {
    check_same_dim(a, b)?;
    Ok(a.dotc(b))
}

pub fn hs_norm(a: &Operator) -> f64 {
    a.norm()
}

pub fn hermiticity_defect(a: &Operator) -> f64 {
    max_abs_diff(a, &a.adjoint())
}

/// ‖u†u − 1‖₂.
pub fn unitarity_defect(u: &Operator) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    (u.adjoint() * u - identity(u.nrows())).norm()
}

pub fn ensure_unitary(u: &Operator) -> Result<()> {
    let defect = unitarity_defect(u);
    if defect > POST_TOL {
        return Err(Error::NotUnitary(defect));
    }
    Ok(())
}

/// An operator that passed the Hermiticity check at construction. The
/// stored matrix is exactly Hermitian (symmetrized after the check).
#[derive(Clone, Debug, PartialEq)]
pub struct Hermitian(Operator);

impl Hermitian {
    pub fn new(m: Operator) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        let defect = hermiticity_defect(&m);
        if defect > HERMITIAN_TOL {
            return Err(Error::NotHermitian(defect));
        }
        Ok(Self(symmetrize(&m)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_op(&self) -> &Operator {
        &self.0
    }

    pub fn into_inner(self) -> Operator {
        self.0
    }

    pub fn eig(&self) -> SpectralDecomp {
        SpectralDecomp::from_hermitian(&self.0)
    }
}

fn symmetrize(m: &Operator) -> Operator {
    (m + m.adjoint()).scale(0.5)
}

/// Spectral decomposition of a Hermitian operator.
pub fn eig_hermitian(h: &Operator) -> Result<SpectralDecomp> {
    Ok(Hermitian::new(h.clone())?.eig())
}

/// Spectral data of a skew-Hermitian generator `k = −iH`, reusable for
/// `exp(s·k)` at many step sizes `s`.
#[derive(Clone, Debug)]
pub struct SkewGenerator {
    spectrum: SpectralDecomp,
}

impl SkewGenerator {
    pub fn new(k: &Operator) -> Result<Self> {
        if !k.is_square() {
            return Err(Error::DimensionMismatch {
                expected: k.nrows(),
                found: k.ncols(),
            });
        }
        let defect = max_abs_diff(k, &(-k.adjoint()));
        if defect > POST_TOL {
            return Err(Error::NotSkewHermitian(defect));
        }
        let h = symmetrize(&(k * I));
        Ok(Self {
            spectrum: SpectralDecomp::from_hermitian(&h),
        })
    }

    /// exp(s·k) = Σ_j e^{−i s λ_j} |φ_j⟩⟨φ_j| with λ the spectrum of ik.
    pub fn exp_scaled(&self, s: f64) -> Operator {
        self.spectrum.apply_fn(|e| C64::from_polar(1.0, -s * e))
    }
}

/// exp(k) for skew-Hermitian `k`, via the spectral decomposition of `ik`.
pub fn unitary_exp(k: &Operator) -> Result<Operator> {
    Ok(SkewGenerator::new(k)?.exp_scaled(1.0))
}

/// Haar-random unitary: QR of a complex Ginibre matrix with the phases of
/// R's diagonal absorbed into Q.
pub fn haar_unitary(dim: usize, rng: &mut RngStream) -> Result<Operator> {
    if dim == 0 {
        return Err(Error::InvalidParameter("Haar dimension must be ≥ 1".into()));
    }
    let z = Operator::from_fn(dim, dim, |_, _| rng.complex_normal());
    let qr = z.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { ONE };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    Ok(q)
}

/// GUE-like random Hermitian matrix with unit-variance entries.
pub fn random_hermitian(dim: usize, rng: &mut RngStream) -> Operator {
    let z = Operator::from_fn(dim, dim, |_, _| rng.complex_normal());
    symmetrize(&z)
}

/// Random density matrix ρ = GG†/Tr(GG†).
pub fn random_density(dim: usize, rng: &mut RngStream) -> Operator {
    let g = Operator::from_fn(dim, dim, |_, _| rng.complex_normal());
    let rho = &g * g.adjoint();
    let tr = rho.trace().re;
    symmetrize(&rho.unscale(tr))
}

/// Pauli axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

pub fn pauli(axis: Axis) -> Operator {
    let (a, b, c, d) = match axis {
        Axis::X => (ZERO, ONE, ONE, ZERO),
        Axis::Y => (ZERO, -I, I, ZERO),
        Axis::Z => (ONE, ZERO, ZERO, -ONE),
    };
    Operator::from_row_slice(2, 2, &[a, b, c, d])
}

/// σ⁺ = |0⟩⟨1| (raises to the σ^z = +1 state).
pub fn sigma_plus() -> Operator {
    Operator::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO])
}

pub fn sigma_minus() -> Operator {
    sigma_plus().adjoint()
}

/// Tensor product of single-site operators on `n_qubits`, identity on
/// unlisted sites.
pub fn site_product(n_qubits: usize, ops: &[(usize, Operator)]) -> Result<Operator> {
    let mut seen = vec![false; n_qubits];
    for (site, op) in ops {
        if *site >= n_qubits {
            return Err(Error::InvalidSites(format!(
                "site {site} out of range for {n_qubits} qubits"
            )));
        }
        if seen[*site] {
            return Err(Error::InvalidSites(format!("duplicate site {site}")));
        }
        if op.shape() != (2, 2) {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: op.nrows(),
            });
        }
        seen[*site] = true;
    }
    let mut out = identity(1);
    for site in 0..n_qubits {
        let factor = ops
            .iter()
            .find(|(s, _)| *s == site)
            .map(|(_, op)| op.clone())
            .unwrap_or_else(|| identity(2));
        out = kron(&out, &factor);
    }
    Ok(out)
}

pub fn pauli_string(n_qubits: usize, ops: &[(usize, Axis)]) -> Result<Operator> {
    let ops: Vec<_> = ops.iter().map(|&(s, a)| (s, pauli(a))).collect();
    site_product(n_qubits, &ops)
}

/// Number of qubits for a `2^N`-dimensional space.
pub fn qubit_count(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::InvalidParameter(format!(
            "dimension {dim} is not a power of two"
        )));
    }
    Ok(dim.trailing_zeros() as usize)
}

/// Mixed-radix digits of `index` for factor dimensions `dims` (first factor
/// most significant).
fn digits(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for (slot, &d) in out.iter_mut().zip(dims).rev() {
        *slot = index % d;
        index /= d;
    }
    out
}

fn undigits(digits: &[usize], dims: &[usize]) -> usize {
    digits.iter().zip(dims).fold(0, |acc, (&x, &d)| acc * d + x)
}

/// Partial trace over the factors of `dims` not listed in `keep`.
pub fn partial_trace_dims(op: &Operator, dims: &[usize], keep: &[usize]) -> Result<Operator> {
    let d: usize = dims.iter().product();
    if op.shape() != (d, d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: op.nrows(),
        });
    }
    let mut keep_sorted = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();
    if keep_sorted.len() != keep.len() || keep_sorted.iter().any(|&k| k >= dims.len()) {
        return Err(Error::InvalidSites(format!(
            "keep set {keep:?} invalid for {} factors",
            dims.len()
        )));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|i| !keep_sorted.contains(i)).collect();
    let keep_dims: Vec<usize> = keep_sorted.iter().map(|&i| dims[i]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&i| dims[i]).collect();
    let dk: usize = keep_dims.iter().product();
    let dt: usize = traced_dims.iter().product();

    // full[kc * dt + tc] = full basis index
    let mut full = vec![0usize; dk * dt];
    let mut dig = vec![0usize; dims.len()];
    for kc in 0..dk {
        let kd = digits(kc, &keep_dims);
        for tc in 0..dt {
            let td = digits(tc, &traced_dims);
            for (slot, &site) in keep_sorted.iter().enumerate() {
                dig[site] = kd[slot];
            }
            for (slot, &site) in traced.iter().enumerate() {
                dig[site] = td[slot];
            }
            full[kc * dt + tc] = undigits(&dig, dims);
        }
    }
    Ok(Operator::from_fn(dk, dk, |i, j| {
        (0..dt).fold(ZERO, |acc, t| acc + op[(full[i * dt + t], full[j * dt + t])])
    }))
}

/// Partial trace on an N-qubit operator keeping the sites in `keep`.
pub fn partial_trace(op: &Operator, keep: &[usize]) -> Result<Operator> {
    let n = qubit_count(op.nrows())?;
    partial_trace_dims(op, &vec![2; n], keep)
}

/// Permutation operator on H ⊗ H (H = ⊗ `dims`) that exchanges each factor
/// listed in `swapped` with its copy.
pub fn swap_doubled(dims: &[usize], swapped: &[usize]) -> Result<Operator> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::InvalidParameter(format!("bad factorization {dims:?}")));
    }
    if swapped.iter().any(|&s| s >= dims.len()) {
        return Err(Error::InvalidSites(format!(
            "swap set {swapped:?} out of range for {} factors",
            dims.len()
        )));
    }
    let n = dims.len();
    let doubled: Vec<usize> = dims.iter().chain(dims).copied().collect();
    let total: usize = doubled.iter().product();
    let mut s = Operator::zeros(total, total);
    for col in 0..total {
        let mut dig = digits(col, &doubled);
        for &f in swapped {
            dig.swap(f, f + n);
        }
        s[(undigits(&dig, &doubled), col)] = ONE;
    }
    Ok(s)
}

/// Polar projection onto the unitary group: u ↦ U W† from the SVD.
pub fn nearest_unitary(u: &Operator) -> Operator {
    let svd = u.clone().svd(true, true);
    match (svd.u, svd.v_t) {
        (Some(l), Some(r)) => l * r,
        _ => u.clone(),
    }
}

/// Row-major interleaved (re, im) serialization.
pub fn to_interleaved(op: &Operator) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * op.len());
    for i in 0..op.nrows() {
        for j in 0..op.ncols() {
            out.push(op[(i, j)].re);
            out.push(op[(i, j)].im);
        }
    }
    out
}

pub fn from_interleaved(dim: usize, data: &[f64]) -> Result<Operator> {
    if data.len() != 2 * dim * dim {
        return Err(Error::InvalidParameter(format!(
            "expected {} reals for a {dim}x{dim} operator, found {}",
            2 * dim * dim,
            data.len()
        )));
    }
    Ok(Operator::from_fn(dim, dim, |i, j| {
        let at = 2 * (i * dim + j);
        C64::new(data[at], data[at + 1])
    }))
}

