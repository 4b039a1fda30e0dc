//! Euler–Maruyama simulation of admissible singular controls and discounted
//! cost estimates.
//!
//! Controls are pure jumps on the time grid: `du[k]` is applied at `t_k`, so
//! `U` is piecewise constant and right-continuous. The recursion is
//!
//! ```text
//! W_0     = w0 + G du[0]
//! W_{k+1} = W_k + ϑ(W_k) dt + σ ΔZ_k + G du[k+1]
//! ```

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cone::ControlSystem;
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::hjb::{Coefficients, GridProblem, ValueField};
use crate::numfmt::g17;

const DOMAIN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PolicySpec {
    DoNothing,
    /// Keep the state in a closed ball inside `W` by projecting back onto it.
    ReflectBall { center: Vec<f64>, radius: f64 },
    /// Project back onto `W`; `optimal` pays `c(ξ)` instead of using `ϖ(ξ)`.
    ProjectToW {
        #[serde(default)]
        optimal: bool,
    },
    ImmediateJumpThenIdle { target: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    pub n_paths: usize,
    pub dt: f64,
    pub horizon: f64,
    pub seed: u64,
}

impl SimOptions {
    /// `dt = 1e-3`, `T = 20/α`.
    pub fn defaults_for(alpha: f64) -> Self {
        Self {
            n_paths: 100,
            dt: 1e-3,
            horizon: 20.0 / alpha,
            seed: 0,
        }
    }

    pub fn steps(&self) -> usize {
        (self.horizon / self.dt).round().max(1.0) as usize
    }
}

/// Data needed to simulate the state equation.
#[derive(Debug, Clone, Copy)]
pub struct Dynamics<'a> {
    pub sys: &'a ControlSystem,
    pub domain: &'a Domain,
    pub coefficients: &'a Coefficients,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathSample {
    pub times: Vec<f64>,
    pub w0: Vec<f64>,
    /// Post-action state at each grid time.
    pub w_path: Vec<Vec<f64>>,
    /// Control increment applied at each grid time.
    pub du_path: Vec<Vec<f64>>,
    /// Brownian increments over `[t_k, t_{k+1}]`.
    pub z_path: Vec<Vec<f64>>,
    pub seed: u64,
    pub stream: u64,
}

impl PathSample {
    pub fn dt(&self) -> f64 {
        if self.times.len() > 1 {
            self.times[1] - self.times[0]
        } else {
            0.0
        }
    }

    /// Cumulative control `U_k`.
    pub fn u_path(&self) -> Vec<Vec<f64>> {
        let mut acc = vec![0.0; self.du_path.first().map_or(0, Vec::len)];
        self.du_path
            .iter()
            .map(|du| {
                for (a, v) in acc.iter_mut().zip(du) {
                    *a += v;
                }
                acc.clone()
            })
            .collect()
    }

    /// CSV with columns `t,w1..,u1..` (cumulative control).
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{}", csv_header(self, false))?;
        self.write_rows(None, &mut out)
    }

    fn write_rows<W: std::io::Write>(&self, label: Option<usize>, out: &mut W) -> std::io::Result<()> {
        for ((t, w), u) in self.times.iter().zip(&self.w_path).zip(self.u_path()) {
            let mut row: Vec<String> = label.iter().map(|i| i.to_string()).collect();
            row.push(g17(*t));
            row.extend(w.iter().map(|v| g17(*v)));
            row.extend(u.iter().map(|v| g17(*v)));
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

fn csv_header(path: &PathSample, labelled: bool) -> String {
    let d = path.w0.len();
    let p = path.du_path.first().map_or(0, Vec::len);
    let mut header: Vec<String> = if labelled { vec!["path".into()] } else { vec![] };
    header.push("t".into());
    header.extend((1..=d).map(|i| format!("w{i}")));
    header.extend((1..=p).map(|i| format!("u{i}")));
    header.join(",")
}

/// All paths in one CSV, with a leading `path` column.
pub fn write_paths_csv<W: std::io::Write>(paths: &[PathSample], mut out: W) -> std::io::Result<()> {
    let Some(first) = paths.first() else {
        return Ok(());
    };
    writeln!(out, "{}", csv_header(first, true))?;
    for (i, path) in paths.iter().enumerate() {
        path.write_rows(Some(i), &mut out)?;
    }
    Ok(())
}

fn check_static(policy: &PolicySpec, dynamics: &Dynamics, w0: &[f64]) -> Result<()> {
    let d = dynamics.sys.state_dim();
    if w0.len() != d || dynamics.domain.dim() != d {
        return Err(Error::DimensionMismatch("initial state".into()));
    }
    if !dynamics.domain.contains(w0, DOMAIN_TOL) {
        return Err(Error::InadmissiblePolicy(format!("initial state {w0:?} is outside W")));
    }
    match policy {
        PolicySpec::DoNothing => {}
        PolicySpec::ReflectBall { center, radius } => {
            if center.len() != d {
                return Err(Error::DimensionMismatch("ball center".into()));
            }
            if !(*radius >= 0.0) || !dynamics.domain.contains(center, 0.0) {
                return Err(Error::InadmissiblePolicy("ball center outside W".into()));
            }
            if dynamics.domain.boundary_distance(center) < *radius - 1e-12 {
                return Err(Error::InadmissiblePolicy("ball is not contained in W".into()));
            }
            if !dynamics.sys.is_controllable() {
                return Err(Error::InadmissiblePolicy("reflection needs a controllable system".into()));
            }
        }
        PolicySpec::ProjectToW { .. } => {
            if !dynamics.sys.is_controllable() {
                return Err(Error::InadmissiblePolicy("projection needs a controllable system".into()));
            }
        }
        PolicySpec::ImmediateJumpThenIdle { target } => {
            if target.len() != d {
                return Err(Error::DimensionMismatch("jump target".into()));
            }
            if !dynamics.domain.contains(target, 0.0) {
                return Err(Error::InadmissiblePolicy("jump target outside W".into()));
            }
            if !dynamics.sys.is_controllable() {
                return Err(Error::InadmissiblePolicy("jump needs a controllable system".into()));
            }
        }
    }
    Ok(())
}

fn project_ball(center: &[f64], radius: f64, y: &[f64]) -> Vec<f64> {
    let dist = y.iter().zip(center).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    if dist <= radius {
        return y.to_vec();
    }
    center
        .iter()
        .zip(y)
        .map(|(c, v)| c + (v - c) * radius / dist)
        .collect()
}

/// Control realizing displacement `xi`.
fn control_for(sys: &ControlSystem, xi: &[f64], optimal: bool) -> Result<Vec<f64>> {
    if xi.iter().all(|v| *v == 0.0) {
        return Ok(vec![0.0; sys.control_dim()]);
    }
    if optimal {
        if let Some(u) = sys.displacement_argmin(xi)? {
            return Ok(u);
        }
        return Err(Error::InadmissiblePolicy(format!("displacement {xi:?} has no finite-cost control")));
    }
    sys.varpi(xi)
}

fn simulate_path(
    dynamics: &Dynamics,
    policy: &PolicySpec,
    w0: &[f64],
    opts: &SimOptions,
    stream: u64,
) -> Result<PathSample> {
    let sys = dynamics.sys;
    let d = sys.state_dim();
    let sigma = &dynamics.coefficients.sigma;
    let k = sigma.ncols();
    let n = opts.steps();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(stream);
    let sqrt_dt = opts.dt.sqrt();

    let act = |y: &[f64], step: usize| -> Result<Vec<f64>> {
        match policy {
            PolicySpec::DoNothing => Ok(vec![0.0; sys.control_dim()]),
            PolicySpec::ImmediateJumpThenIdle { target } => {
                if step == 0 {
                    let xi: Vec<f64> = target.iter().zip(y).map(|(t, v)| t - v).collect();
                    control_for(sys, &xi, false)
                } else {
                    Ok(vec![0.0; sys.control_dim()])
                }
            }
            PolicySpec::ReflectBall { center, radius } => {
                let p = project_ball(center, *radius, y);
                let xi: Vec<f64> = p.iter().zip(y).map(|(a, b)| a - b).collect();
                control_for(sys, &xi, false)
            }
            PolicySpec::ProjectToW { optimal } => {
                let p = dynamics.domain.project(y);
                let xi: Vec<f64> = p.iter().zip(y).map(|(a, b)| a - b).collect();
                control_for(sys, &xi, *optimal)
            }
        }
    };

    let mut times = Vec::with_capacity(n + 1);
    let mut w_path = Vec::with_capacity(n + 1);
    let mut du_path = Vec::with_capacity(n + 1);
    let mut z_path = Vec::with_capacity(n);

    let du0 = act(w0, 0)?;
    let gu = sys.apply_g(&du0);
    let mut w: Vec<f64> = w0.iter().zip(&gu).map(|(a, b)| a + b).collect();
    times.push(0.0);
    if !dynamics.domain.contains(&w, DOMAIN_TOL) {
        return Err(Error::StateEscaped { step: 0, state: w });
    }
    w_path.push(w.clone());
    du_path.push(du0);

    for step in 1..=n {
        let dz: Vec<f64> = (0..k).map(|_| StandardNormal.sample(&mut rng)).map(|z: f64| z * sqrt_dt).collect();
        let drift = dynamics.coefficients.drift.eval(&w);
        let noise = sigma * DVector::from_column_slice(&dz);
        let y: Vec<f64> = (0..d).map(|i| w[i] + drift[i] * opts.dt + noise[i]).collect();
        let du = act(&y, step)?;
        let gu = sys.apply_g(&du);
        w = y.iter().zip(&gu).map(|(a, b)| a + b).collect();
        if !dynamics.domain.contains(&w, DOMAIN_TOL) {
            return Err(Error::StateEscaped { step, state: w });
        }
        times.push(step as f64 * opts.dt);
        w_path.push(w.clone());
        du_path.push(du);
        z_path.push(dz);
    }
    Ok(PathSample {
        times,
        w0: w0.to_vec(),
        w_path,
        du_path,
        z_path,
        seed: opts.seed,
        stream,
    })
}

/// Simulates `n_paths` independent paths; path `i` draws from ChaCha stream
/// `i` of `seed`, so results do not depend on scheduling.
pub fn simulate(
    dynamics: &Dynamics,
    policy: &PolicySpec,
    w0: &[f64],
    opts: &SimOptions,
) -> Result<Vec<PathSample>> {
    if !(opts.dt > 0.0 && opts.dt.is_finite()) || opts.horizon < opts.dt {
        return Err(Error::Invalid("need dt > 0 and horizon >= dt".into()));
    }
    check_static(policy, dynamics, w0)?;
    (0..opts.n_paths as u64)
        .into_par_iter()
        .map(|i| simulate_path(dynamics, policy, w0, opts, i))
        .collect()
}

/// Worst violations of the admissibility properties along a path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathAudit {
    pub recursion_error: f64,
    pub cone_violation: bool,
    pub outside_domain: bool,
}

pub fn audit_path(path: &PathSample, dynamics: &Dynamics) -> Result<PathAudit> {
    let sys = dynamics.sys;
    let dt = path.dt();
    let mut err = 0.0_f64;
    let gu0 = sys.apply_g(&path.du_path[0]);
    for i in 0..path.w0.len() {
        err = err.max((path.w_path[0][i] - path.w0[i] - gu0[i]).abs());
    }
    for k in 0..path.z_path.len() {
        let w = &path.w_path[k];
        let drift = dynamics.coefficients.drift.eval(w);
        let noise = &dynamics.coefficients.sigma * DVector::from_column_slice(&path.z_path[k]);
        let gu = sys.apply_g(&path.du_path[k + 1]);
        for i in 0..w.len() {
            let pred = w[i] + drift[i] * dt + noise[i] + gu[i];
            err = err.max((path.w_path[k + 1][i] - pred).abs());
        }
    }
    let mut cone_violation = false;
    for du in &path.du_path {
        if du.iter().any(|v| *v != 0.0) && !sys.cone().contains(du, 1e-9)? {
            cone_violation = true;
        }
    }
    let outside_domain = path.w_path.iter().any(|w| !dynamics.domain.contains(w, DOMAIN_TOL));
    Ok(PathAudit {
        recursion_error: err,
        cone_violation,
        outside_domain,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_paths: usize,
    pub horizon: f64,
    pub tail_bound: f64,
}

/// Discounted cost of one path over `[0, T]`, with the control term
/// evaluated exactly for the step-function `U`.
pub fn path_cost(path: &PathSample, kappa: &[f64], g: &dyn Fn(&[f64]) -> f64, alpha: f64) -> f64 {
    let u = path.u_path();
    let mut total = 0.0;
    for k in 0..path.times.len() - 1 {
        let weight = (-alpha * path.times[k]).exp() - (-alpha * path.times[k + 1]).exp();
        let ku: f64 = kappa.iter().zip(&u[k]).map(|(a, b)| a * b).sum();
        total += weight * (g(&path.w_path[k]) / alpha + ku);
    }
    total
}

/// Mean and standard error of the discounted cost over paths sharing one
/// time grid.
///
/// `tail_bound` covers the cost after `T` assuming `|κ·U|` keeps growing at
/// most linearly at the largest rate seen on the sample:
/// `e^{-αT} (sup|g|/α + C_lin (1 + T))`.
pub fn estimate_cost(
    paths: &[PathSample],
    kappa: &[f64],
    g: &dyn Fn(&[f64]) -> f64,
    alpha: f64,
) -> Result<CostEstimate> {
    let Some(first) = paths.first() else {
        return Err(Error::Invalid("no paths".into()));
    };
    if paths
        .iter()
        .any(|p| p.times.len() != first.times.len() || p.dt() != first.dt())
    {
        return Err(Error::MixedGrids);
    }
    let horizon = *first.times.last().unwrap_or(&0.0);
    let costs: Vec<f64> = paths.iter().map(|p| path_cost(p, kappa, g, alpha)).collect();
    let n = costs.len() as f64;
    let mean = costs.iter().sum::<f64>() / n;
    let std_error = if costs.len() > 1 {
        (costs.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt()
    } else {
        0.0
    };
    let mut g_sup = 0.0_f64;
    let mut c_lin = 0.0_f64;
    for p in paths {
        for (k, u) in p.u_path().iter().enumerate() {
            g_sup = g_sup.max(g(&p.w_path[k]).abs());
            let ku: f64 = kappa.iter().zip(u).map(|(a, b)| a * b).sum();
            c_lin = c_lin.max(ku.abs() / (1.0 + p.times[k]));
        }
    }
    let tail_bound = (-alpha * horizon).exp() * (g_sup / alpha + c_lin * (1.0 + horizon));
    Ok(CostEstimate {
        mean,
        std_error,
        n_paths: paths.len(),
        horizon,
        tail_bound,
    })
}

/// `|α∫_0^t e^{-αs} κ·U_s ds + e^{-αt} κ·U_t - Σ_{t_k <= t} e^{-α t_k} κ·ΔU_k|`,
/// both sides in closed form; `t` is rounded to the path grid.
pub fn check_integration_by_parts(path: &PathSample, kappa: &[f64], alpha: f64, t: f64) -> f64 {
    let dt = path.dt();
    let last = path.times.len() - 1;
    let n = if dt > 0.0 { ((t / dt).round() as usize).min(last) } else { 0 };
    let u = path.u_path();
    let dot = |v: &[f64]| kappa.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
    let mut lhs = 0.0;
    for k in 0..n {
        lhs += dot(&u[k]) * ((-alpha * path.times[k]).exp() - (-alpha * path.times[k + 1]).exp());
    }
    lhs += (-alpha * path.times[n]).exp() * dot(&u[n]);
    let rhs: f64 = (0..=n)
        .map(|k| (-alpha * path.times[k]).exp() * dot(&path.du_path[k]))
        .sum();
    (lhs - rhs).abs()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValueComparison {
    pub psi_w0: f64,
    pub upper: f64,
    pub slack: f64,
    /// `|mean - ψ(w0)|`
    pub gap: f64,
    pub pass: bool,
}

/// Every admissible policy upper-bounds the value function, so the estimate
/// plus its error allowances must not fall below `ψ(w0) - L h`.
pub fn compare_with_value(
    estimate: &CostEstimate,
    gp: &GridProblem,
    field: &ValueField,
    w0: &[f64],
) -> ValueComparison {
    let psi_w0 = gp.interpolate(&field.values, w0);
    let slack = gp.local_lipschitz(&field.values, w0, 2.0 * gp.h) * gp.h;
    let upper = estimate.mean + 3.0 * estimate.std_error + estimate.tail_bound;
    ValueComparison {
        psi_w0,
        upper,
        slack,
        gap: (estimate.mean - psi_w0).abs(),
        pass: upper >= psi_w0 - slack,
    }
}
