//! One function per subcommand. Each returns the CSV body, an optional
//! sidecar document and the first failed numerical check, if any.

use serde::Serialize;

use mereo::algebra::{distance, AlgebraSpec};
use mereo::models::{
    abelian_metric, abelian_rotation, build_abelian_toy, build_factor_toy, build_tfim, factor_rotation,
    theta_min_closed, theta_min_factor, unwrap_angles, HamiltonianModel, TfimParams, ToyParams,
};
use mereo::opspace::{identity, random_hermitian, RngStream, C64};
use mereo::scrambling::{otoc_curve, sigma_l_nrc, sigma_s};
use mereo::sweep::{
    disorder_plans, disorder_sweep, integrability_plan, integrability_sweep, records_csv, SweepArtifact,
};
use mereo::Exec;

use crate::checks::{factor_and_abelian_metric, verify_suite};
use crate::config::{
    DisorderConfig, IntegrabilityConfig, OtocProbeConfig, ProbeModel, ToyAbelianConfig, ToyFactorConfig,
    VerifyConfig,
};
use crate::output::{to_csv, Report};
use crate::CliError;

fn json(v: &impl Serialize) -> Result<serde_json::Value, CliError> {
    serde_json::to_value(v).map_err(|e| CliError::Numerical(e.to_string()))
}

/// Relative error, or absolute error where the reference vanishes.
fn rel_error(got: f64, want: f64) -> f64 {
    if want == 0.0 {
        (got - want).abs()
    } else {
        ((got - want) / want).abs()
    }
}

fn only_site(v: &[f64], i: usize) -> Vec<f64> {
    (0..v.len()).map(|k| if k == i { v[k] } else { 0.0 }).collect()
}

#[derive(Serialize)]
struct ToyRow {
    site: String,
    eps: Option<f64>,
    j: Option<f64>,
    deps: Option<f64>,
    dj: Option<f64>,
    theta_min: Option<f64>,
    sigma_s: f64,
    metric_closed: f64,
    metric_fd: f64,
    rel_error: f64,
}

/// Finite-difference metric of the maximal-abelian toy along (dε, dJ):
/// D(A(p − s), A(p + s))²/(2s)², Richardson-extrapolated.
fn toy_metric_fd(p: &ToyParams, deps: &[f64], dj: &[f64], step: f64) -> Result<f64, CliError> {
    let theta0 = theta_min_closed(p)?;
    let alg = |s: f64| -> Result<AlgebraSpec, CliError> {
        let theta = unwrap_angles(&theta0, &theta_min_closed(&p.shifted(deps, dj, s)?)?);
        Ok(AlgebraSpec::maximal_abelian(p.n(), abelian_rotation(&theta)?)?)
    };
    let m = |s: f64| -> Result<f64, CliError> { Ok(distance(&alg(-s)?, &alg(s)?)?.powi(2) / (4.0 * s * s)) };
    Ok((4.0 * m(step / 2.0)? - m(step)?) / 3.0)
}

pub fn toy_abelian(cfg: &ToyAbelianConfig) -> Result<Report, CliError> {
    let p = &cfg.params;
    let n = p.n();
    let theta = theta_min_closed(p)?;
    let h = build_abelian_toy(p)?;
    let s_min = sigma_s(&AlgebraSpec::maximal_abelian(n, abelian_rotation(&theta)?)?, h.operator())?;
    let mut rows = Vec::with_capacity(n + 1);
    for i in 0..n {
        let (de, dj) = (only_site(&cfg.deps, i), only_site(&cfg.dj, i));
        let closed = abelian_metric(p, &de, &dj)?;
        let fd = toy_metric_fd(p, &de, &dj, cfg.fd_step)?;
        rows.push(ToyRow {
            site: i.to_string(),
            eps: Some(p.eps[i]),
            j: Some(p.j[i]),
            deps: Some(cfg.deps[i]),
            dj: Some(cfg.dj[i]),
            theta_min: Some(theta[i]),
            sigma_s: s_min,
            metric_closed: closed,
            metric_fd: fd,
            rel_error: rel_error(fd, closed),
        });
    }
    let closed = abelian_metric(p, &cfg.deps, &cfg.dj)?;
    let fd = toy_metric_fd(p, &cfg.deps, &cfg.dj, cfg.fd_step)?;
    rows.push(ToyRow {
        site: "all".into(),
        eps: None,
        j: None,
        deps: None,
        dj: None,
        theta_min: None,
        sigma_s: s_min,
        metric_closed: closed,
        metric_fd: fd,
        rel_error: rel_error(fd, closed),
    });
    let failure = rows
        .iter()
        .find(|r| !(r.rel_error < cfg.tolerance))
        .map(|r| format!("metric rel_error {:e} at site {} exceeds {:e}", r.rel_error, r.site, cfg.tolerance));
    Ok(Report { csv: to_csv(&rows)?, sidecar: None, failure })
}

#[derive(Serialize)]
struct FactorRow {
    pair: String,
    eps: Option<f64>,
    j: Option<f64>,
    deps: Option<f64>,
    dj: Option<f64>,
    theta_min: Option<f64>,
    sigma_s: f64,
    metric_factor: f64,
    metric_abelian: f64,
    rel_diff: f64,
}

pub fn toy_factor(cfg: &ToyFactorConfig) -> Result<Report, CliError> {
    let p = &cfg.params;
    let n = p.n();
    let theta = theta_min_factor(p)?;
    let (model, alg) = build_factor_toy(p)?;
    let s_min = sigma_s(&alg.conjugate(&factor_rotation(&theta)?)?, model.operator())?;
    let mut rows = Vec::with_capacity(n + 1);
    let mut row = |pair: String, idx: Option<usize>, de: &[f64], dj: &[f64]| -> Result<(), CliError> {
        let (g_fac, g_ab) = factor_and_abelian_metric(p, de, dj)?;
        rows.push(FactorRow {
            pair,
            eps: idx.map(|i| p.eps[i]),
            j: idx.map(|i| p.j[i]),
            deps: idx.map(|i| cfg.deps[i]),
            dj: idx.map(|i| cfg.dj[i]),
            theta_min: idx.map(|i| theta[i]),
            sigma_s: s_min,
            metric_factor: g_fac,
            metric_abelian: g_ab,
            rel_diff: (g_fac - g_ab).abs() / g_ab.max(1.0),
        });
        Ok(())
    };
    for i in 0..n {
        row(i.to_string(), Some(i), &only_site(&cfg.deps, i), &only_site(&cfg.dj, i))?;
    }
    row("all".into(), None, &cfg.deps, &cfg.dj)?;
    let failure = rows
        .iter()
        .find(|r| !(r.rel_diff < cfg.tolerance))
        .map(|r| format!("factor/abelian metric mismatch {:e} at pair {}", r.rel_diff, r.pair));
    Ok(Report { csv: to_csv(&rows)?, sidecar: None, failure })
}

pub fn sweep_integrability(cfg: &IntegrabilityConfig, exec: Exec) -> Result<Report, CliError> {
    let mut opt = cfg.opt.clone();
    opt.seed = cfg.seed;
    let mut plan = integrability_plan(cfg.n_sites, cfg.j, cfg.delta, cfg.n_steps, opt)?;
    plan.direction = cfg.direction;
    let recs = integrability_sweep(&plan, exec)?;
    let csv = records_csv(std::slice::from_ref(&recs))?;
    let art = SweepArtifact { plans: vec![plan], records: vec![recs] };
    Ok(Report { csv, sidecar: Some(json(&art)?), failure: None })
}

#[derive(Serialize)]
struct DisorderSidecar<'a> {
    rows: &'a [mereo::sweep::DisorderRow],
    artifact: SweepArtifact,
}

pub fn sweep_disorder(cfg: &DisorderConfig, exec: Exec) -> Result<Report, CliError> {
    let plans = disorder_plans(
        cfg.n_sites,
        cfg.h,
        cfg.j_center,
        cfg.delta,
        cfg.n_steps,
        cfg.n_avg,
        cfg.seed,
        &cfg.opt,
    )?;
    let res = disorder_sweep(&plans, exec)?;
    let csv = to_csv(&res.rows)?;
    let side = DisorderSidecar { rows: &res.rows, artifact: SweepArtifact { plans, records: res.realizations } };
    Ok(Report { csv, sidecar: Some(json(&side)?), failure: None })
}

#[derive(Serialize)]
struct OtocRow {
    t: f64,
    mean: f64,
    std_error: f64,
    n_samples: usize,
    /// (2/d) σ_s² t², the short-time law.
    short_time: f64,
    /// Closed-form long-time average.
    nrc: f64,
}

pub fn otoc_probe(cfg: &OtocProbeConfig, exec: Exec) -> Result<Report, CliError> {
    let n = cfg.n_sites;
    let d = 1 << n;
    let alg = AlgebraSpec::factor_bipartition(n, &cfg.left_sites, identity(d))
        .map_err(|e| CliError::Config(e.to_string()))?;
    let rng = RngStream::new(cfg.seed, "otoc-probe");
    let model = match &cfg.model {
        ProbeModel::Tfim { j, h } => build_tfim(&TfimParams::clean(n, *j, *h))?,
        ProbeModel::Random { norm } => {
            let h = random_hermitian(d, &mut rng.substream("model"));
            let scale = norm / HamiltonianModel::custom(h.clone())?.norm();
            HamiltonianModel::custom(h * C64::new(scale, 0.0))?
        }
    };
    let s = sigma_s(&alg, model.operator())?;
    let nrc = sigma_l_nrc(&alg, &model, &identity(d))?.value;
    let curve = otoc_curve(&alg, &model, &cfg.times, cfg.n_samples, &rng.substream("samples"), exec)?;
    let rows: Vec<OtocRow> = curve
        .iter()
        .map(|e| OtocRow {
            t: e.t,
            mean: e.mean,
            std_error: e.std_error,
            n_samples: e.n_samples,
            short_time: 2.0 * s * s / d as f64 * e.t * e.t,
            nrc,
        })
        .collect();
    Ok(Report { csv: to_csv(&rows)?, sidecar: None, failure: None })
}

pub fn verify(cfg: &VerifyConfig, exec: Exec) -> Result<Report, CliError> {
    let results = verify_suite(cfg, exec)?;
    let failure = results
        .iter()
        .filter(|c| !c.pass)
        .map(|c| format!("check {} failed: observed {:e}, required {} {:e}", c.check, c.observed, c.relation, c.tolerance))
        .reduce(|a, b| format!("{a}; {b}"));
    Ok(Report { csv: to_csv(&results)?, sidecar: None, failure })
}
