//! Monte-Carlo estimation of G_A(t) = (1/2d) E_{X,Y} ‖[X, U_t Y U_t†]‖₂²
//! with X Haar in A, Y Haar in A′ and U_t = exp(−iHt).
//!
//! Samples are drawn in antithetic pairs (X, X†) from per-sample streams
//! `rng#i`, evaluated in the eigenbasis of H, and reduced in index order.
//! For unitary X and Y the two members of a pair give identical values:
//! Re Tr(Z†X†ZX) and Re Tr(Z†XZX†) are complex conjugates' real parts.
//! The partner is therefore accounted for without a second evaluation.

use serde::{Deserialize, Serialize};

use super::sigma_s;
use crate::algebra::AlgebraSpec;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::models::HamiltonianModel;
use crate::opspace::{haar_unitary, Operator, RngStream, C64};

pub const DEFAULT_SAMPLES: usize = 512;

/// Largest dimension whose d⁴ phase table the time average builds; above
/// it the trapezoid is summed point by point.
const CLOSED_FORM_MAX_DIM: usize = 32;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OtocEstimate {
    pub t: f64,
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: usize,
    pub seed: u64,
}

/// One draw (X, Y) in the eigenbasis of H, stored row-major.
struct Draw {
    d: usize,
    x: Vec<C64>,
    y: Vec<C64>,
}

fn row_major(m: &Operator) -> Vec<C64> {
    m.transpose().as_slice().to_vec()
}

fn draw(alg: &AlgebraSpec, model: &HamiltonianModel, rng: &mut RngStream) -> Result<Draw> {
    let xs = alg
        .blocks()
        .iter()
        .map(|b| haar_unitary(b.size, rng))
        .collect::<Result<Vec<_>>>()?;
    let ys = alg
        .blocks()
        .iter()
        .map(|b| haar_unitary(b.mult, rng))
        .collect::<Result<Vec<_>>>()?;
    let v = &model.spectrum().vectors;
    let x = v.adjoint() * alg.embed_algebra_element(&xs)? * v;
    let y = v.adjoint() * alg.embed_commutant_element(&ys)? * v;
    Ok(Draw { d: alg.dim(), x: row_major(&x), y: row_major(&y) })
}

/// Reusable buffers for [`pair_value`].
struct Scratch {
    phase: Vec<C64>,
    xh: Vec<C64>,
    left: Vec<C64>,
    right: Vec<C64>,
}

impl Scratch {
    fn new(d: usize) -> Self {
        let z = C64::new(0.0, 0.0);
        Self {
            phase: vec![z; d],
            xh: vec![z; d * d],
            left: vec![z; d * d],
            right: vec![z; d * d],
        }
    }
}

/// `out = a·b` for row-major d×d matrices.
fn matmul(d: usize, a: &[C64], b: &[C64], out: &mut [C64]) {
    // Fixed sizes let the compiler unroll the short inner loops.
    match d {
        2 => matmul_fixed::<2>(a, b, out),
        4 => matmul_fixed::<4>(a, b, out),
        8 => matmul_fixed::<8>(a, b, out),
        16 => matmul_fixed::<16>(a, b, out),
        _ => matmul_dyn(d, a, b, out),
    }
}

fn matmul_fixed<const D: usize>(a: &[C64], b: &[C64], out: &mut [C64]) {
    let (a, b) = (&a[..D * D], &b[..D * D]);
    let out = &mut out[..D * D];
    for i in 0..D {
        let mut row = [C64::new(0.0, 0.0); D];
        for k in 0..D {
            let aik = a[i * D + k];
            for j in 0..D {
                row[j] += aik * b[k * D + j];
            }
        }
        out[i * D..(i + 1) * D].copy_from_slice(&row);
    }
}

fn matmul_dyn(d: usize, a: &[C64], b: &[C64], out: &mut [C64]) {
    out.fill(C64::new(0.0, 0.0));
    for i in 0..d {
        let row = &mut out[i * d..(i + 1) * d];
        for k in 0..d {
            let aik = a[i * d + k];
            for (o, bkj) in row.iter_mut().zip(&b[k * d..(k + 1) * d]) {
                *o += aik * bkj;
            }
        }
    }
}

/// `‖a b − b a‖₂²`.
fn commutator_norm_sq(d: usize, a: &[C64], b: &[C64], left: &mut [C64], right: &mut [C64]) -> f64 {
    matmul(d, a, b, left);
    matmul(d, b, a, right);
    left.iter().zip(right.iter()).map(|(l, r)| (l - r).norm_sqr()).sum()
}

/// ½·(g(X) + g(X†)) = g(X) at time t for one draw, with
/// g = (1/2d)‖[X, U_t Y U_t†]‖², evaluated as ‖[U_t† X U_t, Y]‖ in the
/// eigenbasis where U_t is diagonal.
fn pair_value(dr: &Draw, energies: &[f64], t: f64, s: &mut Scratch) -> f64 {
    let d = dr.d;
    for (p, e) in s.phase.iter_mut().zip(energies) {
        *p = C64::from_polar(1.0, e * t);
    }
    for k in 0..d {
        for l in 0..d {
            s.xh[k * d + l] = dr.x[k * d + l] * s.phase[k] * s.phase[l].conj();
        }
    }
    commutator_norm_sq(d, &s.xh, &dr.y, &mut s.left, &mut s.right) / (2.0 * d as f64)
}

fn check(alg: &AlgebraSpec, model: &HamiltonianModel, n_samples: usize) -> Result<()> {
    if n_samples == 0 {
        return Err(Error::InvalidParameter("n_samples must be at least 1".into()));
    }
    if alg.dim() != model.dim() {
        return Err(Error::DimensionMismatch { expected: alg.dim(), found: model.dim() });
    }
    Ok(())
}

fn mean_and_error(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::INFINITY);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Per-sample values `f(draw_i)` for `i < n_samples`, in index order.
fn per_sample<T: Send>(
    alg: &AlgebraSpec,
    model: &HamiltonianModel,
    n_samples: usize,
    rng: &RngStream,
    exec: Exec,
    f: impl Fn(&Draw) -> T + Sync + Send,
) -> Result<Vec<T>> {
    check(alg, model, n_samples)?;
    exec.map(n_samples, |i| {
        let mut stream = rng.indexed(i);
        draw(alg, model, &mut stream).map(|dr| f(&dr))
    })
    .into_iter()
    .collect()
}

/// Unbiased estimate of G_A(t) from `n_samples` antithetic pairs.
pub fn otoc_mc(
    alg: &AlgebraSpec,
    model: &HamiltonianModel,
    t: f64,
    n_samples: usize,
    rng: &RngStream,
    exec: Exec,
) -> Result<OtocEstimate> {
    Ok(otoc_curve(alg, model, &[t], n_samples, rng, exec)?.remove(0))
}

/// G_A(t) on a time grid, reusing the same draws at every time.
pub fn otoc_curve(
    alg: &AlgebraSpec,
    model: &HamiltonianModel,
    times: &[f64],
    n_samples: usize,
    rng: &RngStream,
    exec: Exec,
) -> Result<Vec<OtocEstimate>> {
    let e = model.energies();
    let values = per_sample(alg, model, n_samples, rng, exec, |dr| {
        let mut s = Scratch::new(dr.d);
        times.iter().map(|&t| pair_value(dr, e, t, &mut s)).collect::<Vec<_>>()
    })?;
    Ok(times
        .iter()
        .enumerate()
        .map(|(j, &t)| {
            let col: Vec<f64> = values.iter().map(|v| v[j]).collect();
            let (mean, std_error) = mean_and_error(&col);
            OtocEstimate { t, mean, std_error, n_samples, seed: rng.seed() }
        })
        .collect())
}

/// Trapezoid average of e^{iΩt} over `n` intervals of [0, T] for every
/// Ω = (E_e − E_a) + (E_b − E_c), indexed `((e·d + a)·d + b)·d + c`.
/// Summing the geometric series gives
/// cos(θ/2) sin(nθ/2) / (n sin(θ/2)) · e^{inθ/2} with θ = Ω T/n.
fn trapezoid_phases(energies: &[f64], horizon: f64, n: usize) -> Vec<C64> {
    let d = energies.len();
    let dt = horizon / n as f64;
    let omega = |k: usize, l: usize| energies[k] - energies[l];
    let mut out = Vec::with_capacity(d * d * d * d);
    for e in 0..d {
        for a in 0..d {
            for b in 0..d {
                for c in 0..d {
                    let theta = (omega(e, a) + omega(b, c)) * dt;
                    let half = 0.5 * theta;
                    out.push(if half.sin() == 0.0 {
                        C64::new(1.0, 0.0)
                    } else {
                        let amp = half.cos() * (n as f64 * half).sin() / (n as f64 * half.sin());
                        C64::from_polar(amp, n as f64 * half)
                    });
                }
            }
        }
    }
    out
}

/// Trapezoid time average of one draw,
/// 1 − (1/d) Re Σ conj(Y_ba) Y_ce conj(X_cb) X_ea S_eabc.
fn averaged_value(dr: &Draw, phases: &[C64]) -> f64 {
    let d = dr.d;
    let (x, y) = (&dr.x, &dr.y);
    let mut acc = C64::new(0.0, 0.0);
    for e in 0..d {
        for a in 0..d {
            let xea = x[e * d + a];
            let row = &phases[(e * d + a) * d * d..];
            let mut inner = C64::new(0.0, 0.0);
            for b in 0..d {
                let yba = y[b * d + a].conj();
                for c in 0..d {
                    inner += yba * y[c * d + e] * x[c * d + b].conj() * row[b * d + c];
                }
            }
            acc += xea * inner;
        }
    }
    1.0 - acc.re / d as f64
}

/// `(1/T) ∫₀^T G_A(t) dt` by the trapezoid rule on `n_points` intervals,
/// integrated per draw. The trapezoid sum is evaluated in closed form on
/// the spectrum, so its cost does not grow with `n_points`. Reported with
/// `t = T`.
pub fn otoc_time_average(
    alg: &AlgebraSpec,
    model: &HamiltonianModel,
    horizon: f64,
    n_points: usize,
    n_samples: usize,
    rng: &RngStream,
    exec: Exec,
) -> Result<OtocEstimate> {
    if n_points < 1 || !(horizon > 0.0) {
        return Err(Error::InvalidParameter("time average needs T > 0 and n_points >= 1".into()));
    }
    let e = model.energies();
    let values = if alg.dim() <= CLOSED_FORM_MAX_DIM {
        let phases = trapezoid_phases(e, horizon, n_points);
        per_sample(alg, model, n_samples, rng, exec, |dr| averaged_value(dr, &phases))?
    } else {
        let dt = horizon / n_points as f64;
        per_sample(alg, model, n_samples, rng, exec, |dr| {
            let mut s = Scratch::new(dr.d);
            let mut acc = 0.5 * (pair_value(dr, e, 0.0, &mut s) + pair_value(dr, e, horizon, &mut s));
            for j in 1..n_points {
                acc += pair_value(dr, e, j as f64 * dt, &mut s);
            }
            acc / n_points as f64
        })?
    };
    let (mean, std_error) = mean_and_error(&values);
    Ok(OtocEstimate { t: horizon, mean, std_error, n_samples, seed: rng.seed() })
}

/// Short-time quadratic coefficient of G_A(t) against the prediction
/// `(2/d) σ_s²`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShortTimeFit {
    pub coefficient: f64,
    pub std_error: f64,
    pub predicted: f64,
    pub times: Vec<f64>,
}

impl ShortTimeFit {
    /// |fit − prediction| in units of the standard error.
    pub fn z_score(&self) -> f64 {
        (self.coefficient - self.predicted).abs() / self.std_error
    }
}

/// Fits `a t² + b t³` per draw on `t ∈ {0.01, …, 0.05}/‖H‖` and averages
/// the quadratic coefficients.
pub fn short_time_fit(
    alg: &AlgebraSpec,
    model: &HamiltonianModel,
    n_samples: usize,
    rng: &RngStream,
    exec: Exec,
) -> Result<ShortTimeFit> {
    let scale = model.norm();
    if scale == 0.0 {
        return Err(Error::InvalidParameter("short-time fit needs H != 0".into()));
    }
    let times: Vec<f64> = (1..=5).map(|j| 0.01 * j as f64 / scale).collect();
    let e = model.energies();
    // Normal equations of the two-column design [t², t³].
    let (mut s4, mut s5, mut s6) = (0.0, 0.0, 0.0);
    for &t in &times {
        s4 += t.powi(4);
        s5 += t.powi(5);
        s6 += t.powi(6);
    }
    let det = s4 * s6 - s5 * s5;
    let coeffs = per_sample(alg, model, n_samples, rng, exec, |dr| {
        let mut s = Scratch::new(dr.d);
        let (mut b2, mut b3) = (0.0, 0.0);
        for &t in &times {
            let g = pair_value(dr, e, t, &mut s);
            b2 += g * t * t;
            b3 += g * t * t * t;
        }
        (s6 * b2 - s5 * b3) / det
    })?;
    let (coefficient, std_error) = mean_and_error(&coeffs);
    let s = sigma_s(alg, model.operator())?;
    Ok(ShortTimeFit {
        coefficient,
        std_error,
        predicted: 2.0 * s * s / alg.dim() as f64,
        times,
    })
}
