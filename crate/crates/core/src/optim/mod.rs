//! Steepest descent of σ_l over the unitary group.
//!
//! The objective is the no-resonance long-time A-OTOC of the rotated
//! bipartition, f(V) = 1 − d⁻² Σ_kl (1 − δ_kl/2)(G^A_kl² + G^B_kl²), with
//! `G^X` the Gram matrices of the reduced states of `VΠ_kV†`. Iterates move
//! along geodesics `V ← exp(−μG)V` with the Riemannian gradient
//! `G = ΓV† − VΓ†`.

mod angles;

pub use angles::{minimize_toy_angles, AngleResult};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::algebra::AlgebraSpec;
use crate::error::{Error, Result};
use crate::models::HamiltonianModel;
use crate::opspace::{
    self, nearest_unitary, partial_trace_dims, swap_doubled, unitarity_defect, Operator,
    SkewGenerator, C64,
};
use crate::scrambling::{gram_matrices, reduced_states};


/// Largest orthonormality drift tolerated before an early polar
/// re-orthonormalization.
pub const DRIFT_TOL: f64 = 1e-11;
/// Riemannian gradients below this norm count as stationary.
pub const GRAD_TOL: f64 = 1e-14;
/// Dimension cap of [`euclid_gradient_doubled`] (the doubled space is d²).
pub const DOUBLED_MAX_DIM: usize = 16;

fn default_epsilon() -> f64 {
    1e-10
}
fn default_max_iters() -> usize {
    10_000
}
fn default_mu0() -> f64 {
    0.1
}
fn default_mu_min() -> f64 {
    1e-8
}
fn default_mu_max() -> f64 {
    1.0
}
fn default_grow() -> f64 {
    2.0
}
fn default_shrink() -> f64 {
    0.5
}
fn default_reortho() -> usize {
    100
}

/// Optimizer settings. Every field has a default, so `{}` is a valid
/// JSON configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptConfig {
    /// Stop once an accepted step changes f by at most this much.
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Budget of trial steps (accepted or rejected).
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_mu0")]
    pub mu0: f64,
    #[serde(default = "default_mu_min")]
    pub mu_min: f64,
    #[serde(default = "default_mu_max")]
    pub mu_max: f64,
    /// Step multiplier after an accepted step.
    #[serde(default = "default_grow")]
    pub grow: f64,
    /// Step multiplier after a rejected step.
    #[serde(default = "default_shrink")]
    pub shrink: f64,
    /// Polar re-orthonormalization period in iterations.
    #[serde(default = "default_reortho")]
    pub reortho_every: usize,
    #[serde(default)]
    pub seed: u64,
}

impl Default for OptConfig {
    fn default() -> Self {
        Self {
            epsilon: default_epsilon(),
            max_iters: default_max_iters(),
            mu0: default_mu0(),
            mu_min: default_mu_min(),
            mu_max: default_mu_max(),
            grow: default_grow(),
            shrink: default_shrink(),
            reortho_every: default_reortho(),
            seed: 0,
        }
    }
}

impl OptConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.into()));
        if !(self.epsilon > 0.0) {
            return bad("epsilon must be positive");
        }
        if self.max_iters == 0 {
            return bad("max_iters must be at least 1");
        }
        if !(self.mu_min > 0.0 && self.mu_min <= self.mu0 && self.mu0 <= self.mu_max) {
            return bad("step sizes must satisfy 0 < mu_min <= mu0 <= mu_max");
        }
        if !(self.grow >= 1.0) || !(self.shrink > 0.0 && self.shrink < 1.0) {
            return bad("need grow >= 1 and 0 < shrink < 1");
        }
        if self.reortho_every == 0 {
            return bad("reortho_every must be at least 1");
        }
        Ok(())
    }
}

/// Why [`minimize`] returned.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// An accepted step changed f by at most `epsilon`.
    SmallChange,
    /// The Riemannian gradient vanished.
    Stationary,
    /// No improving step above `mu_min`.
    StepUnderflow,
    /// `max_iters` trial steps used.
    MaxIters,
}

impl StopReason {
    pub fn converged(self) -> bool {
        self != StopReason::MaxIters
    }
}

/// One optimizer iteration, as exported to CSV.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iter: usize,
    /// Objective at the current (accepted) iterate.
    pub f: f64,
    pub grad_norm: f64,
    /// Step size tried in this iteration.
    pub mu: f64,
    pub accepted: bool,
}

#[derive(Clone, Debug)]
pub struct OptState {
    pub v: Operator,
    pub f: f64,
    pub mu: f64,
    pub iter: usize,
    pub converged: bool,
    pub stop: StopReason,
    pub trace: Vec<TraceRow>,
}

impl OptState {
    /// `iter,f,grad_norm,mu,accepted` with a header row.
    pub fn trace_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &self.trace {
            w.serialize(row).map_err(|e| Error::InvalidParameter(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidParameter(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::InvalidParameter(e.to_string()))
    }
}

/// f(V) for a factor algebra.
pub fn objective(alg: &AlgebraSpec, model: &HamiltonianModel, v: &Operator) -> Result<f64> {
    Ok(gram_matrices(alg, model, v)?.nrc_value())
}

fn weight(k: usize, l: usize) -> f64 {
    if k == l {
        0.5
    } else {
        1.0
    }
}

/// Euclidean gradient Γ_V with δf = 2 Re Tr(Γ_V† δV), in the reduced form
/// `Γ_V = Σ_k M_k V Π_k` with
/// `M_k = −(4/d²) Σ_l w_kl [G^A_kl (ρ_l^A ⊗ 1) + G^B_kl (1 ⊗ ρ_l^B)]`.
pub fn euclid_gradient(alg: &AlgebraSpec, model: &HamiltonianModel, v: &Operator) -> Result<Operator> {
    let rs = reduced_states(alg, model, v)?;
    let (da, db) = (rs.dim_a, rs.dim_b);
    let d = da * db;
    let ga = gram_dense(&rs.a);
    let gb = gram_dense(&rs.b);
    let scale = -4.0 / (d * d) as f64;
    // Block-basis columns g_k = M_k ψ_k.
    let mut g = Operator::zeros(d, d);
    for k in 0..d {
        let mut ca = Operator::zeros(da, da);
        let mut cb = Operator::zeros(db, db);
        for l in 0..d {
            let w = weight(k, l);
            ca += &rs.a[l] * C64::new(w * ga[(k, l)], 0.0);
            cb += &rs.b[l] * C64::new(w * gb[(k, l)], 0.0);
        }
        // ψ_k as M[row = mult, col = size]; (1 ⊗ C^A) → M C^Aᵀ, (C^B ⊗ 1) → C^B M.
        let m = Operator::from_fn(db, da, |r, c| rs.psi[(r * da + c, k)]);
        let out = &m * ca.transpose() + &cb * &m;
        for r in 0..db {
            for c in 0..da {
                g[(r * da + c, k)] = out[(r, c)] * scale;
            }
        }
    }
    // Γ = W (Σ_k g_k φ_k†).
    Ok(alg.frame() * g * model.spectrum().vectors.adjoint())
}

fn gram_dense(states: &[Operator]) -> DMatrix<f64> {
    let d = states.len();
    DMatrix::from_fn(d, d, |k, l| states[k].dotc(&states[l]).re)
}

/// Γ_V through the doubled-space expression
/// `−(4/d²) Σ_kl w_kl Σ_X G^X_kl Tr_2[S_X (VΠ_k ⊗ VΠ_lV†)]`, with `S_X`
/// swapping factor X between the copies. Limited to d ≤ 16.
pub fn euclid_gradient_doubled(
    alg: &AlgebraSpec,
    model: &HamiltonianModel,
    v: &Operator,
) -> Result<Operator> {
    let d = alg.dim();
    if d > DOUBLED_MAX_DIM {
        return Err(Error::InvalidParameter(format!(
            "doubled-space gradient limited to d <= {DOUBLED_MAX_DIM}, got {d}"
        )));
    }
    let (da, db) = alg.factor_dims()?;
    let gp = gram_matrices(alg, model, v)?;
    // Work in block coordinates: V' = W†V, factors [mult, size].
    let vb = alg.frame().adjoint() * v;
    let dims = [db, da];
    let quad = [db, da, db, da];
    let swap_a = row_permutation(&swap_doubled(&dims, &[1])?);
    let swap_b = row_permutation(&swap_doubled(&dims, &[0])?);
    let vpi: Vec<Operator> = (0..d)
        .map(|k| &vb * model.spectrum().projector(k))
        .collect();
    let mut gamma = Operator::zeros(d, d);
    for k in 0..d {
        for l in 0..d {
            let w = weight(k, l);
            let pair = opspace::kron(&vpi[k], &(&vpi[l] * vb.adjoint()));
            let ta = partial_trace_dims(&permute_rows(&swap_a, &pair), &quad, &[0, 1])?;
            let tb = partial_trace_dims(&permute_rows(&swap_b, &pair), &quad, &[0, 1])?;
            gamma += ta * C64::new(w * gp.gram_a[(k, l)], 0.0);
            gamma += tb * C64::new(w * gp.gram_b[(k, l)], 0.0);
        }
    }
    Ok(alg.frame() * gamma * C64::new(-4.0 / (d * d) as f64, 0.0))
}

/// For a permutation matrix P, the source row of each output row of P·X.
fn row_permutation(p: &Operator) -> Vec<usize> {
    (0..p.nrows())
        .map(|r| (0..p.ncols()).find(|&c| p[(r, c)].re == 1.0).unwrap_or(r))
        .collect()
}

fn permute_rows(src: &[usize], x: &Operator) -> Operator {
    Operator::from_fn(x.nrows(), x.ncols(), |r, c| x[(src[r], c)])
}

/// `G = ΓV† − VΓ†`, skew-Hermitian.
pub fn riemannian_grad(gamma: &Operator, v: &Operator) -> Result<Operator> {
    if gamma.shape() != v.shape() {
        return Err(Error::DimensionMismatch { expected: v.nrows(), found: gamma.nrows() });
    }
    let a = gamma * v.adjoint();
    Ok(&a - a.adjoint())
}

/// Step-size control: accept-and-grow on improvement, reject-and-shrink
/// otherwise, within `[mu_min, mu_max]`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct StepControl {
    pub mu: f64,
    cfg_grow: f64,
    cfg_shrink: f64,
    mu_min: f64,
    mu_max: f64,
}

impl StepControl {
    pub fn new(cfg: &OptConfig) -> Self {
        Self {
            mu: cfg.mu0,
            cfg_grow: cfg.grow,
            cfg_shrink: cfg.shrink,
            mu_min: cfg.mu_min,
            mu_max: cfg.mu_max,
        }
    }

    pub fn accept(&mut self) {
        self.mu = (self.mu * self.cfg_grow).min(self.mu_max);
    }

    /// Shrinks the step; false once it falls below `mu_min`.
    pub fn reject(&mut self) -> bool {
        self.mu *= self.cfg_shrink;
        self.mu >= self.mu_min
    }
}

/// Geodesic steepest descent of [`objective`] from `v0`.
pub fn minimize(
    alg: &AlgebraSpec,
    model: &HamiltonianModel,
    v0: &Operator,
    cfg: &OptConfig,
) -> Result<OptState> {
    cfg.validate()?;
    opspace::ensure_unitary(v0)?;
    let mut v = v0.clone();
    let mut f = objective(alg, model, &v)?;
    let mut grad = riemannian_grad(&euclid_gradient(alg, model, &v)?, &v)?;
    let mut step = StepControl::new(cfg);
    let mut trace = Vec::new();
    let mut generator = SkewGenerator::new(&grad)?;
    let mut iter = 0;
    let stop = loop {
        let grad_norm = grad.norm();
        if grad_norm < GRAD_TOL {
            break StopReason::Stationary;
        }
        if iter >= cfg.max_iters {
            break StopReason::MaxIters;
        }
        iter += 1;
        let mu = step.mu;
        let mut trial = generator.exp_scaled(-mu) * &v;
        if iter % cfg.reortho_every == 0 || unitarity_defect(&trial) > DRIFT_TOL {
            trial = nearest_unitary(&trial);
        }
        let f_trial = objective(alg, model, &trial)?;
        let accepted = f_trial < f;
        trace.push(TraceRow { iter, f: if accepted { f_trial } else { f }, grad_norm, mu, accepted });
        if accepted {
            let change = f - f_trial;
            v = trial;
            f = f_trial;
            step.accept();
            if change <= cfg.epsilon {
                break StopReason::SmallChange;
            }
            grad = riemannian_grad(&euclid_gradient(alg, model, &v)?, &v)?;
            generator = SkewGenerator::new(&grad)?;
        } else if !step.reject() {
            break StopReason::StepUnderflow;
        }
    };
    Ok(OptState { v, f, mu: step.mu, iter, converged: stop.converged(), stop, trace })
}
