//! Descent restricted to the product rotations `⊗ exp(−iθ_iσ^y/2)` of the
//! abelian toy model, minimising σ_s² over the angles.

use super::{OptConfig, StepControl, StopReason};
use crate::algebra::{AlgebraSpec, ProjectionKind};
use crate::error::{Error, Result};
use crate::models::{abelian_rotation, HamiltonianModel};
use crate::opspace::{hs_inner, pauli_string, Axis, Operator, C64};

#[derive(Clone, Debug)]
pub struct AngleResult {
    pub theta: Vec<f64>,
    /// σ_s² at `theta`.
    pub f: f64,
    pub iter: usize,
    pub stop: StopReason,
}

/// σ_s² of the rotated diagonal algebra and its gradient in θ.
///
/// With `H_θ = U_θ† H U_θ`, `∂_i H_θ = (i/2)[σ^y_i, H_θ]`, so
/// `∂_i σ_s² = 2 Re ⟨Q(H_θ), (i/2)[σ^y_i, H_θ]⟩` for the computational
/// diagonal algebra Q.
fn value_and_grad(
    base: &AlgebraSpec,
    h: &Operator,
    sy: &[Operator],
    theta: &[f64],
) -> Result<(f64, Vec<f64>)> {
    let u = abelian_rotation(theta)?;
    let ht = u.adjoint() * h * &u;
    let q = base.projection(ProjectionKind::Complement).apply(&ht)?;
    let f = q.norm_squared();
    let grad = sy
        .iter()
        .map(|s| {
            let dh = (s * &ht - &ht * s) * C64::new(0.0, 0.5);
            hs_inner(&q, &dh).map(|z| 2.0 * z.re)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((f, grad))
}

/// Minimise σ_s²(θ) for an n-qubit Hamiltonian from `theta0`, with the
/// same step policy as [`super::minimize`].
pub fn minimize_toy_angles(model: &HamiltonianModel, theta0: &[f64], cfg: &OptConfig) -> Result<AngleResult> {
    cfg.validate()?;
    let n = theta0.len();
    if model.dim() != 1 << n {
        return Err(Error::DimensionMismatch { expected: 1 << n, found: model.dim() });
    }
    let base = AlgebraSpec::maximal_abelian(n, crate::opspace::identity(1 << n))?;
    let sy = (0..n)
        .map(|i| pauli_string(n, &[(i, Axis::Y)]))
        .collect::<Result<Vec<_>>>()?;
    let h = model.operator();
    let mut theta = theta0.to_vec();
    let (mut f, mut grad) = value_and_grad(&base, h, &sy, &theta)?;
    let mut step = StepControl::new(cfg);
    let mut iter = 0;
    let stop = loop {
        let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if gnorm < super::GRAD_TOL {
            break StopReason::Stationary;
        }
        if iter >= cfg.max_iters {
            break StopReason::MaxIters;
        }
        iter += 1;
        let trial: Vec<f64> = theta.iter().zip(&grad).map(|(t, g)| t - step.mu * g).collect();
        let (f_trial, grad_trial) = value_and_grad(&base, h, &sy, &trial)?;
        if f_trial < f {
            let change = f - f_trial;
            theta = trial;
            f = f_trial;
            grad = grad_trial;
            step.accept();
            if change <= cfg.epsilon {
                break StopReason::SmallChange;
            }
        } else if !step.reject() {
            break StopReason::StepUnderflow;
        }
    };
    Ok(AngleResult { theta, f, iter, stop })
}
