//! Parameter sweeps: the integrability scan with warm starts, the disorder
//! line with identity starts, and the discrete susceptibility
//! g(h_α) = (D(A_α, A_{α−1})² + D(A_α, A_{α+1})²) / (2 δh²).

mod serial;

use serde::{Deserialize, Serialize};

use crate::algebra::{distance, AlgebraSpec};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::models::{
    abelian_rotation, build_tfim, theta_min_closed, unwrap_angles, TfimParams, ToyParams,
};
use crate::opspace::{identity, Operator, RngStream};
use crate::optim::{minimize, OptConfig, StopReason};

pub use serial::{records_csv, SweepArtifact};

pub const DEFAULT_J: f64 = 1.05;
pub const DEFAULT_H: f64 = 0.5;
pub const DEFAULT_DELTA: f64 = 0.005;
pub const DEFAULT_N_STEPS: usize = 10;
pub const DEFAULT_N_AVG: usize = 5;
/// Largest chain the sweeps accept.
pub const MAX_SITES: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitPolicy {
    /// Start each point from the previous point's optimum, outward from the
    /// center of the grid.
    WarmStart,
    /// Start every point from V = 1.
    Identity,
}

/// Order in which a warm-started grid is visited.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// From the center to both ends (the reference protocol).
    #[default]
    Outward,
    /// From both ends to the center. Robustness probe only.
    Inward,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridPoint {
    /// Sweep coordinate: h for the integrability scan, signed disorder
    /// strength on the disorder line.
    pub label: f64,
    pub model: TfimParams,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepPlan {
    pub n_sites: usize,
    /// Ordered points, `2·n_steps + 1` of them, center at `n_steps`.
    pub grid: Vec<GridPoint>,
    pub init: InitPolicy,
    #[serde(default)]
    pub direction: Direction,
    pub n_steps: usize,
    /// Grid half-width in label units.
    pub delta: f64,
    /// Parameter-space distance between adjacent points, the δh of the
    /// susceptibility.
    pub step: f64,
    pub seed: u64,
    /// RNG stream the grid was drawn from, if any.
    #[serde(default)]
    pub stream: Option<String>,
    pub opt: OptConfig,
}

impl SweepPlan {
    pub fn center(&self) -> usize {
        self.n_steps
    }

    pub fn dh(&self) -> f64 {
        self.step
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.n_sites < 2 || self.n_sites % 2 != 0 || self.n_sites > MAX_SITES {
            return bad(format!("n_sites must be even and in 2..={MAX_SITES}, got {}", self.n_sites));
        }
        if self.n_steps < 2 {
            return bad(format!("n_steps must be at least 2, got {}", self.n_steps));
        }
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return bad(format!("delta must be finite and nonnegative, got {}", self.delta));
        }
        if !(self.step >= 0.0 && self.step.is_finite()) {
            return bad(format!("step must be finite and nonnegative, got {}", self.step));
        }
        if self.grid.len() != 2 * self.n_steps + 1 {
            return bad(format!(
                "grid has {} points, expected {}",
                self.grid.len(),
                2 * self.n_steps + 1
            ));
        }
        if let Some(p) = self.grid.iter().find(|p| p.model.n != self.n_sites) {
            return bad(format!("grid point {} has {} sites", p.label, p.model.n));
        }
        if self.grid.windows(2).any(|w| !(w[0].label <= w[1].label)) {
            return bad("grid labels must be nondecreasing".into());
        }
        if self.init == InitPolicy::Identity && self.direction != Direction::Outward {
            return bad("direction only applies to warm-started plans".into());
        }
        for p in &self.grid {
            p.model.validate()?;
        }
        self.opt.validate()
    }

    /// Subsystem A: the first N/2 sites.
    pub fn reference_algebra(&self) -> Result<AlgebraSpec> {
        let left: Vec<usize> = (0..self.n_sites / 2).collect();
        AlgebraSpec::factor_bipartition(self.n_sites, &left, identity(1 << self.n_sites))
    }
}

/// h_α = α·δ/n_steps for α = −n_steps..=n_steps at fixed transverse
/// coupling `j`, warm-started outward from h = 0.
pub fn integrability_plan(n_sites: usize, j: f64, delta: f64, n_steps: usize, opt: OptConfig) -> Result<SweepPlan> {
    let grid = (0..=2 * n_steps)
        .map(|i| {
            let h = label_at(i, n_steps, delta);
            GridPoint { label: h, model: TfimParams::clean(n_sites, j, h) }
        })
        .collect();
    let plan = SweepPlan {
        n_sites,
        grid,
        init: InitPolicy::WarmStart,
        direction: Direction::Outward,
        n_steps,
        delta,
        step: delta / n_steps as f64,
        seed: opt.seed,
        stream: None,
        opt,
    };
    plan.validate()?;
    Ok(plan)
}

fn label_at(i: usize, n_steps: usize, delta: f64) -> f64 {
    let k = i as f64 - n_steps as f64;
    k * delta / n_steps as f64
}

/// Couplings J_i drawn uniformly from [j_center − δ, j_center + δ], then the
/// straight line from that draw (strength δ) through the clean point
/// (strength 0) to its reflection (labelled −δ), sampled at strengths
/// k·δ/n_steps. The susceptibility step is the Euclidean spacing of the
/// coupling vectors.
pub fn disorder_line_plan(
    n_sites: usize,
    h: f64,
    j_center: f64,
    delta: f64,
    n_steps: usize,
    rng: &mut RngStream,
    opt: OptConfig,
) -> Result<SweepPlan> {
    let dev: Vec<f64> = (0..n_sites)
        .map(|_| if delta > 0.0 { rng.uniform(-delta, delta) } else { 0.0 })
        .collect();
    let grid = (0..=2 * n_steps)
        .map(|i| {
            let k = i as f64 - n_steps as f64;
            let t = k / n_steps as f64;
            let model = if i == n_steps {
                TfimParams::clean(n_sites, j_center, h)
            } else {
                TfimParams {
                    n: n_sites,
                    j: j_center,
                    h,
                    j_site: Some(dev.iter().map(|&x| j_center + t * x).collect()),
                }
            };
            GridPoint { label: label_at(i, n_steps, delta), model }
        })
        .collect();
    let plan = SweepPlan {
        n_sites,
        grid,
        init: InitPolicy::Identity,
        direction: Direction::Outward,
        n_steps,
        delta,
        step: dev.iter().map(|x| x * x).sum::<f64>().sqrt() / n_steps as f64,
        seed: rng.seed(),
        stream: Some(rng.label().to_string()),
        opt,
    };
    plan.validate()?;
    Ok(plan)
}

/// One grid point after optimization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepRecord {
    pub index: usize,
    pub label: f64,
    pub model: TfimParams,
    /// σ_l at the optimum.
    pub f_min: f64,
    pub distance_to_prev: Option<f64>,
    pub distance_to_next: Option<f64>,
    pub g: f64,
    /// Set where g used the one-sided stencil.
    pub endpoint: bool,
    pub iters: usize,
    pub converged: bool,
    pub stop: StopReason,
    pub seed: u64,
    /// Optimal V: the minimizing algebra is the reference algebra
    /// conjugated by V†.
    #[serde(with = "serial::unitary")]
    pub v: Operator,
}

/// Discrete susceptibility from the distances to the neighbors present.
/// With both neighbors: (D₋² + D₊²)/(2δh²); with one: D²/δh².
pub fn susceptibility(d_prev: Option<f64>, d_next: Option<f64>, dh: f64) -> Result<f64> {
    if !(dh > 0.0 && dh.is_finite()) {
        return Err(Error::InvalidParameter(format!("grid step must be positive, got {dh}")));
    }
    let sq: Vec<f64> = [d_prev, d_next].into_iter().flatten().map(|d| d * d).collect();
    if sq.is_empty() {
        return Err(Error::InvalidParameter("no neighbors".into()));
    }
    Ok(sq.iter().sum::<f64>() / (sq.len() as f64 * dh * dh))
}

#[derive(Clone)]
struct Solved {
    v: Operator,
    f: f64,
    iters: usize,
    stop: StopReason,
}

fn solve(plan: &SweepPlan, alg: &AlgebraSpec, i: usize, v0: &Operator) -> Result<Solved> {
    let model = build_tfim(&plan.grid[i].model)?;
    let st = minimize(alg, &model, v0, &plan.opt)?;
    Ok(Solved { v: st.v, f: st.f, iters: st.iter, stop: st.stop })
}

/// Visit `order` sequentially, each point starting where the last ended;
/// `start` is the already solved point the chain grows from, if any.
fn chain(
    plan: &SweepPlan,
    alg: &AlgebraSpec,
    order: &[usize],
    start: Option<(usize, &Solved)>,
) -> Result<Vec<(usize, Solved)>> {
    let mut out: Vec<(usize, Solved)> = Vec::with_capacity(order.len());
    let one = identity(alg.dim());
    for &i in order {
        let prev = out.last().map(|(j, s)| (*j, s)).or(start);
        // A repeated parameter point reuses its predecessor's optimum, so
        // equal parameters always map to the same algebra.
        let s = match prev {
            Some((j, p)) if plan.grid[j].model == plan.grid[i].model => p.clone(),
            Some((_, p)) => solve(plan, alg, i, &p.v)?,
            None => solve(plan, alg, i, &one)?,
        };
        out.push((i, s));
    }
    Ok(out)
}

fn solve_grid(plan: &SweepPlan, alg: &AlgebraSpec, exec: Exec) -> Result<Vec<Solved>> {
    let n = plan.grid.len();
    let c = plan.center();
    let one = identity(alg.dim());
    let mut slots: Vec<Option<Solved>> = (0..n).map(|_| None).collect();
    match (plan.init, plan.direction) {
        (InitPolicy::Identity, _) => {
            for (i, s) in exec.map(n, |i| solve(plan, alg, i, &one)).into_iter().enumerate() {
                slots[i] = Some(s?);
            }
        }
        (InitPolicy::WarmStart, Direction::Outward) => {
            let center = solve(plan, alg, c, &one)?;
            let up: Vec<usize> = (c + 1..n).collect();
            let down: Vec<usize> = (0..c).rev().collect();
            let (a, b) = exec.join(
                || chain(plan, alg, &up, Some((c, &center))),
                || chain(plan, alg, &down, Some((c, &center))),
            );
            for (i, s) in a?.into_iter().chain(b?) {
                slots[i] = Some(s);
            }
            slots[c] = Some(center);
        }
        (InitPolicy::WarmStart, Direction::Inward) => {
            let up: Vec<usize> = (0..=c).collect();
            let down: Vec<usize> = (c + 1..n).rev().collect();
            let (a, b) = exec.join(|| chain(plan, alg, &up, None), || chain(plan, alg, &down, None));
            for (i, s) in a?.into_iter().chain(b?) {
                slots[i] = Some(s);
            }
        }
    }
    Ok(slots.into_iter().map(|s| s.expect("every grid point solved")).collect())
}

/// Optimize every grid point and fill in distances and g. Optimizer
/// failures to converge are recorded on the point, not raised.
pub fn run_sweep(plan: &SweepPlan, exec: Exec) -> Result<Vec<SweepRecord>> {
    plan.validate()?;
    let alg = plan.reference_algebra()?;
    let solved = solve_grid(plan, &alg, exec)?;
    let algebras: Vec<AlgebraSpec> = solved
        .iter()
        .map(|s| alg.conjugate(&s.v.adjoint()))
        .collect::<Result<_>>()?;
    let gaps: Vec<f64> = exec
        .map(algebras.len() - 1, |i| distance(&algebras[i], &algebras[i + 1]))
        .into_iter()
        .collect::<Result<_>>()?;
    let n = solved.len();
    let dh = plan.dh();
    solved
        .into_iter()
        .enumerate()
        .map(|(i, s)| {
            let prev = (i > 0).then(|| gaps[i - 1]);
            let next = (i + 1 < n).then(|| gaps[i]);
            let coincident = prev.unwrap_or(0.0) == 0.0 && next.unwrap_or(0.0) == 0.0;
            let g = if coincident { 0.0 } else { susceptibility(prev, next, dh)? };
            Ok(SweepRecord {
                index: i,
                label: plan.grid[i].label,
                model: plan.grid[i].model.clone(),
                f_min: s.f,
                distance_to_prev: prev,
                distance_to_next: next,
                g,
                endpoint: prev.is_none() || next.is_none(),
                iters: s.iters,
                converged: s.stop.converged(),
                stop: s.stop,
                seed: plan.seed,
                v: s.v,
            })
        })
        .collect()
}

/// Warm-started scan around the integrable point; see [`integrability_plan`].
pub fn integrability_sweep(plan: &SweepPlan, exec: Exec) -> Result<Vec<SweepRecord>> {
    if plan.init != InitPolicy::WarmStart {
        return Err(Error::InvalidParameter("integrability sweep needs a warm-start plan".into()));
    }
    run_sweep(plan, exec)
}

/// Independent disorder lines for realizations `0..n_avg`, each from its own
/// labelled substream so adding realizations leaves earlier ones unchanged.
pub fn disorder_plans(
    n_sites: usize,
    h: f64,
    j_center: f64,
    delta: f64,
    n_steps: usize,
    n_avg: usize,
    seed: u64,
    opt: &OptConfig,
) -> Result<Vec<SweepPlan>> {
    let base = RngStream::new(seed, "disorder");
    (0..n_avg)
        .map(|r| disorder_line_plan(n_sites, h, j_center, delta, n_steps, &mut base.indexed(r), opt.clone()))
        .collect()
}

/// Mean and standard error of g at one disorder strength.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisorderRow {
    pub strength: f64,
    pub mean_g: f64,
    /// Zero when there is a single realization.
    pub stderr_g: f64,
    pub mean_f_min: f64,
    pub n_realizations: usize,
    pub n_unconverged: usize,
    pub endpoint: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisorderResult {
    pub rows: Vec<DisorderRow>,
    pub realizations: Vec<Vec<SweepRecord>>,
}

/// Run every plan and average g pointwise across realizations.
pub fn disorder_sweep(plans: &[SweepPlan], exec: Exec) -> Result<DisorderResult> {
    let first = plans
        .first()
        .ok_or_else(|| Error::InvalidParameter("need at least one realization".into()))?;
    if plans.iter().any(|p| p.grid.len() != first.grid.len()) {
        return Err(Error::InvalidParameter("realizations have different grids".into()));
    }
    let realizations: Vec<Vec<SweepRecord>> = exec
        .map(plans.len(), |r| run_sweep(&plans[r], exec))
        .into_iter()
        .collect::<Result<_>>()?;
    let m = plans.len() as f64;
    let rows = (0..first.grid.len())
        .map(|i| {
            let gs: Vec<f64> = realizations.iter().map(|rs| rs[i].g).collect();
            let mean = gs.iter().sum::<f64>() / m;
            let stderr = if plans.len() > 1 {
                let var = gs.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / (m - 1.0);
                (var / m).sqrt()
            } else {
                0.0
            };
            DisorderRow {
                strength: first.grid[i].label,
                mean_g: mean,
                stderr_g: stderr,
                mean_f_min: realizations.iter().map(|rs| rs[i].f_min).sum::<f64>() / m,
                n_realizations: plans.len(),
                n_unconverged: realizations.iter().filter(|rs| !rs[i].converged).count(),
                endpoint: realizations[0][i].endpoint,
            }
        })
        .collect();
    Ok(DisorderResult { rows, realizations })
}

/// Susceptibility of the maximal-abelian toy along (dε, dJ) from the
/// closed-form optimal frames at p and p ± dh·(dε, dJ).
pub fn abelian_toy_susceptibility(p: &ToyParams, deps: &[f64], dj: &[f64], dh: f64) -> Result<f64> {
    let n = p.n();
    let theta0 = theta_min_closed(p)?;
    let alg_at = |s: f64| -> Result<AlgebraSpec> {
        let q = p.shifted(deps, dj, s)?;
        let theta = unwrap_angles(&theta0, &theta_min_closed(&q)?);
        AlgebraSpec::maximal_abelian(n, abelian_rotation(&theta)?)
    };
    let (lo, mid, hi) = (alg_at(-dh)?, alg_at(0.0)?, alg_at(dh)?);
    susceptibility(Some(distance(&mid, &lo)?), Some(distance(&mid, &hi)?), dh)
}

