//! Hamiltonian builders: the product-rotation toy model, its L/R factor
//! counterpart and the open-chain transverse-field Ising model, plus the
//! closed-form minimisers and metrics of the two toy models.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::opspace::{
    identity, pauli, pauli_string, sigma_minus, sigma_plus, site_product, unitary_exp, Axis,
    Hermitian, Operator, SpectralDecomp, C64,
};


/// Parameters of the one-site-per-qubit toy `Σ ε_i σ^z_i + J_i σ^x_i`.
/// The factor toy reuses the same vectors with `ε_iL = −ε_iR = ε_i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToyParams {
    pub eps: Vec<f64>,
    pub j: Vec<f64>,
}

impl ToyParams {
    pub fn new(eps: Vec<f64>, j: Vec<f64>) -> Result<Self> {
        let p = Self { eps, j };
        p.validate()?;
        Ok(p)
    }

    pub fn uniform(n: usize, eps: f64, j: f64) -> Result<Self> {
        Self::new(vec![eps; n], vec![j; n])
    }

    pub fn n(&self) -> usize {
        self.eps.len()
    }

    /// Shape and finiteness; enough to build a Hamiltonian.
    pub fn validate(&self) -> Result<()> {
        if self.eps.len() != self.j.len() {
            return Err(Error::InvalidParameter(format!(
                "eps has {} entries but j has {}",
                self.eps.len(),
                self.j.len()
            )));
        }
        if self.eps.is_empty() {
            return Err(Error::InvalidParameter("toy model needs at least one site".into()));
        }
        for (i, (&e, &j)) in self.eps.iter().zip(&self.j).enumerate() {
            if !e.is_finite() || !j.is_finite() {
                return Err(Error::InvalidParameter(format!("site {i}: non-finite coupling")));
            }
        }
        Ok(())
    }

    /// [`Self::validate`] plus no site with `ε_i = J_i = 0`, where the
    /// optimal angle is undefined.
    pub fn validate_angles(&self) -> Result<()> {
        self.validate()?;
        for (i, (&e, &j)) in self.eps.iter().zip(&self.j).enumerate() {
            if e == 0.0 && j == 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "site {i}: eps = j = 0 leaves the optimal angle undefined"
                )));
            }
        }
        Ok(())
    }

    /// `self + s·(deps, dj)`.
    pub fn shifted(&self, deps: &[f64], dj: &[f64], s: f64) -> Result<Self> {
        if deps.len() != self.n() || dj.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                found: deps.len().min(dj.len()),
            });
        }
        Self::new(
            self.eps.iter().zip(deps).map(|(e, d)| e + s * d).collect(),
            self.j.iter().zip(dj).map(|(j, d)| j + s * d).collect(),
        )
    }
}

/// Transverse-field Ising chain with open boundaries:
/// `−Σ_{i<N−1} σ^z_i σ^z_{i+1} − Σ_i (h σ^z_i + J_i σ^x_i)`.
/// `j_site`, when present, replaces the uniform `j` site by site.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TfimParams {
    pub n: usize,
    pub j: f64,
    pub h: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j_site: Option<Vec<f64>>,
}

impl TfimParams {
    pub fn clean(n: usize, j: f64, h: f64) -> Self {
        Self { n, j, h, j_site: None }
    }

    pub fn couplings(&self) -> Vec<f64> {
        self.j_site.clone().unwrap_or_else(|| vec![self.j; self.n])
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidParameter(format!("chain needs n >= 2, got {}", self.n)));
        }
        if let Some(js) = &self.j_site {
            if js.len() != self.n {
                return Err(Error::DimensionMismatch { expected: self.n, found: js.len() });
            }
        }
        Ok(())
    }
}

/// Provenance of a Hamiltonian.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ModelParams {
    AbelianToy(ToyParams),
    FactorToy(ToyParams),
    Tfim(TfimParams),
    Custom,
}

/// Hermitian operator with its cached spectral decomposition.
#[derive(Clone, Debug)]
pub struct HamiltonianModel {
    h: Hermitian,
    spectrum: SpectralDecomp,
    params: ModelParams,
}

impl HamiltonianModel {
    pub fn new(op: Operator, params: ModelParams) -> Result<Self> {
        let h = Hermitian::new(op)?;
        let spectrum = h.eig();
        Ok(Self { h, spectrum, params })
    }

    pub fn custom(op: Operator) -> Result<Self> {
        Self::new(op, ModelParams::Custom)
    }

    pub fn dim(&self) -> usize {
        self.h.dim()
    }

    pub fn operator(&self) -> &Operator {
        self.h.as_op()
    }

    pub fn spectrum(&self) -> &SpectralDecomp {
        &self.spectrum
    }

    pub fn energies(&self) -> &[f64] {
        &self.spectrum.values
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// Spectral norm `max |E_k|`.
    pub fn norm(&self) -> f64 {
        self.spectrum.values.iter().fold(0.0, |m, e| m.max(e.abs()))
    }

    /// `U H U†`, rediagonalised.
    pub fn conjugated(&self, u: &Operator) -> Result<Self> {
        crate::opspace::ensure_unitary(u)?;
        if u.nrows() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: u.nrows() });
        }
        let op = u * self.operator() * u.adjoint();
        Self::new((&op + op.adjoint()) * C64::new(0.5, 0.0), ModelParams::Custom)
    }
}

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn build_abelian_toy(p: &ToyParams) -> Result<HamiltonianModel> {
    p.validate()?;
    let n = p.n();
    let mut h = Operator::zeros(1 << n, 1 << n);
    for i in 0..n {
        h += pauli_string(n, &[(i, Axis::Z)])? * real(p.eps[i]);
        h += pauli_string(n, &[(i, Axis::X)])? * real(p.j[i]);
    }
    HamiltonianModel::new(h, ModelParams::AbelianToy(p.clone()))
}

/// Minimising angles `θ_i = tan⁻¹(J_i/ε_i)` on the branch (−π/2, π/2].
/// The diagonal algebra is invariant under θ → θ + π, so the branch is a
/// labelling choice; use [`unwrap_angles`] for continuity along sweeps.
pub fn theta_min_closed(p: &ToyParams) -> Result<Vec<f64>> {
    p.validate_angles()?;
    Ok(p.eps.iter().zip(&p.j).map(|(&e, &j)| fold_half_turn(j.atan2(e))).collect())
}

fn fold_half_turn(t: f64) -> f64 {
    use std::f64::consts::PI;
    if t > FRAC_PI_2 {
        t - PI
    } else if t <= -FRAC_PI_2 {
        t + PI
    } else {
        t
    }
}

/// Shifts each angle of `cur` by a multiple of π to lie nearest `prev`.
pub fn unwrap_angles(prev: &[f64], cur: &[f64]) -> Vec<f64> {
    use std::f64::consts::PI;
    prev.iter()
        .zip(cur)
        .map(|(&p, &c)| c + PI * ((p - c) / PI).round())
        .collect()
}

/// `⊗_i exp(−i θ_i σ^y/2)`; conjugating the computational-basis diagonal
/// algebra by it gives the frame in which the toy is diagonal at θ_min.
pub fn abelian_rotation(thetas: &[f64]) -> Result<Operator> {
    unitary_exp(&(abelian_rotation_generator(thetas)? * C64::new(0.0, 1.0)))
}

/// Hermitian `K = −½ Σ θ_i σ^y_i` with `exp(iK)` the product rotation.
pub fn abelian_rotation_generator(thetas: &[f64]) -> Result<Operator> {
    let n = thetas.len();
    let mut k = Operator::zeros(1 << n, 1 << n);
    for (i, &t) in thetas.iter().enumerate() {
        k -= pauli_string(n, &[(i, Axis::Y)])? * real(0.5 * t);
    }
    Ok(k)
}

/// `Σ_i ((ε_i dJ_i − J_i dε_i)/(ε_i² + J_i²))²`, i.e. `Σ dθ_i²`.
pub fn abelian_metric_closed(p: &ToyParams, deps: &[f64], dj: &[f64]) -> Result<f64> {
    p.validate_angles()?;
    if deps.len() != p.n() || dj.len() != p.n() {
        return Err(Error::DimensionMismatch { expected: p.n(), found: deps.len().min(dj.len()) });
    }
    Ok((0..p.n())
        .map(|i| {
            let (e, j) = (p.eps[i], p.j[i]);
            ((e * dj[i] - j * deps[i]) / (e * e + j * j)).powi(2)
        })
        .sum())
}

/// Constant `c_n` with `metric_element(A_θ, dK) = c_n Σ dθ_i²` for the
/// n-qubit diagonal algebra and `dK = ½ Σ dθ_i σ^y_i`.
///
/// Derivation: dK lies entirely in the complement of `A + A′ = A`, so
/// `‖Q(dK)‖² = ¼ Σ dθ_i² 2^n` and `κ² = 4/(2^n · 2^n)`.
pub fn abelian_metric_scale(n: usize) -> f64 {
    (0.5f64).powi(n as i32)
}

/// The toy-model susceptibility in units of the algebra metric.
pub fn abelian_metric(p: &ToyParams, deps: &[f64], dj: &[f64]) -> Result<f64> {
    Ok(abelian_metric_scale(p.n()) * abelian_metric_closed(p, deps, dj)?)
}

/// L/R factor toy on `2n` qubits: L sites `0..n`, R sites `n..2n`, pair
/// `i = (i, n + i)`. Returns the Hamiltonian and the factor algebra of the
/// L qubits.
///
/// On `span{|01⟩, |10⟩}` of a pair the Hamiltonian reads `2ε σ^z + J σ^x`,
/// because `ε σ^z_L − ε σ^z_R` doubles on the odd-parity sector. The
/// abelian toy with `ε → 2ε` therefore has the same optimal angles, see
/// [`factor_toy_abelian_equivalent`].
pub fn build_factor_toy(p: &ToyParams) -> Result<(HamiltonianModel, crate::algebra::AlgebraSpec)> {
    p.validate()?;
    let n = p.n();
    let sites = 2 * n;
    let d = 1usize << sites;
    let mut h = Operator::zeros(d, d);
    for i in 0..n {
        let (l, r) = (i, n + i);
        h += pauli_string(sites, &[(l, Axis::Z)])? * real(p.eps[i]);
        h -= pauli_string(sites, &[(r, Axis::Z)])? * real(p.eps[i]);
        let hop = site_product(sites, &[(l, sigma_plus()), (r, sigma_minus())])?;
        h += (&hop + hop.adjoint()) * real(p.j[i]);
    }
    let left: Vec<usize> = (0..n).collect();
    let alg = crate::algebra::AlgebraSpec::factor_bipartition(sites, &left, identity(d))?;
    Ok((HamiltonianModel::new(h, ModelParams::FactorToy(p.clone()))?, alg))
}

/// Abelian-toy parameters whose single-site problem matches the odd-parity
/// sector of the factor toy: `(2ε, J)`.
pub fn factor_toy_abelian_equivalent(p: &ToyParams) -> Result<ToyParams> {
    ToyParams::new(p.eps.iter().map(|e| 2.0 * e).collect(), p.j.clone())
}

pub fn theta_min_factor(p: &ToyParams) -> Result<Vec<f64>> {
    theta_min_closed(&factor_toy_abelian_equivalent(p)?)
}

/// `Σ_i dθ_i K^y_i` with `K^y_i = −i(σ⁺_{iL}σ⁻_{iR} − σ⁺_{iR}σ⁻_{iL})`,
/// which acts as σ^y on `span{|01⟩, |10⟩}` of pair i.
pub fn factor_rotation_generator(dtheta: &[f64]) -> Result<Operator> {
    let n = dtheta.len();
    let sites = 2 * n;
    let mut k = Operator::zeros(1 << sites, 1 << sites);
    for (i, &t) in dtheta.iter().enumerate() {
        let lr = site_product(sites, &[(i, sigma_plus()), (n + i, sigma_minus())])?;
        let rl = lr.adjoint();
        k += (lr - rl) * C64::new(0.0, -t);
    }
    Ok(k)
}

/// `exp(−i Σ θ_i K^y_i / 2)`: the product rotation of the odd-parity
/// sectors, minimising the factor toy at [`theta_min_factor`].
pub fn factor_rotation(thetas: &[f64]) -> Result<Operator> {
    unitary_exp(&(factor_rotation_generator(thetas)? * C64::new(0.0, -0.5)))
}

/// Constant `c_n` with `metric_element(A_θ, ½ Σ dθ_i K^y_i) = c_n Σ dθ_i²`
/// for the L/R factor algebra of n pairs (d = 4^n, dim A′ = 4^n).
///
/// Derivation: `‖K^y_i‖² = 2·4^{n−1}`, the K^y_i are mutually orthogonal
/// and orthogonal to A + A′, so `‖Q(dK)‖² = Σ dθ_i² 4^n/8`; with
/// `κ² = 4/(d·dim A′) = 4/16^n` this gives `c_n = 1/(2·4^n)`.
pub fn factor_metric_scale(n_pairs: usize) -> f64 {
    0.5 * (0.25f64).powi(n_pairs as i32)
}

pub fn build_tfim(p: &TfimParams) -> Result<HamiltonianModel> {
    p.validate()?;
    let n = p.n;
    let js = p.couplings();
    let mut h = Operator::zeros(1 << n, 1 << n);
    for i in 0..n - 1 {
        h -= pauli_string(n, &[(i, Axis::Z), (i + 1, Axis::Z)])?;
    }
    for (i, &j) in js.iter().enumerate() {
        h -= pauli_string(n, &[(i, Axis::Z)])? * real(p.h);
        h -= pauli_string(n, &[(i, Axis::X)])? * real(j);
    }
    HamiltonianModel::new(h, ModelParams::Tfim(p.clone()))
}

/// `Π_i σ^x_i`, the spin-flip symmetry of the TFIM at h = 0.
pub fn parity_x(n: usize) -> Result<Operator> {
    let ops: Vec<(usize, Operator)> = (0..n).map(|i| (i, pauli(Axis::X))).collect();
    site_product(n, &ops)
}
