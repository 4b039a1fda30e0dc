//! The four subcommands. Each returns the JSON report and the exit code; files
//! are written as a side effect.

use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use singular_control::cone::ConditionReport;
use singular_control::domain::Domain;
use singular_control::hjb::{lattice_nodes, GridProblem, PairDifference, ProbeFlag, RunningCost, SolveOptions, ValueField};
use singular_control::network::{effective_cost, reduce, reduced_system, BrownianNetwork, WorkloadModel};
use singular_control::sim::{
    audit_path, check_integration_by_parts, compare_with_value, estimate_cost, simulate, write_paths_csv, CostEstimate,
    Dynamics, PolicySpec, SimOptions, ValueComparison,
};
use singular_control::Error;

use crate::report::to_json;
use crate::scenario::{rows_of, CostSpec, DirectSpec, NetworkSpec, Problem, ReductionInfo, Scenario};
use crate::{exit, CliError};

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub json: String,
    pub code: i32,
}

impl Report {
    fn new<T: Serialize>(value: &T, code: i32) -> Self {
        Self {
            json: to_json(value),
            code,
        }
    }
}

/// Overrides for the scenario's solver settings.
#[derive(Debug, Clone, Default)]
pub struct SolverArgs {
    pub grid_h: Option<f64>,
    pub dirs: Option<usize>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub probe_offsets: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize)]
struct SolverSettings {
    h_grid: f64,
    n_dirs: usize,
    tol: f64,
    max_iter: Option<usize>,
    probe_offsets: Vec<f64>,
}

impl SolverArgs {
    fn resolve(&self, scn: &Scenario) -> Result<SolverSettings, CliError> {
        let s = &scn.solver;
        let settings = SolverSettings {
            h_grid: self.grid_h.unwrap_or(s.h_grid),
            n_dirs: self.dirs.unwrap_or(s.n_dirs),
            tol: self.tol.unwrap_or(s.tol),
            max_iter: self.max_iter.or(s.max_iter),
            probe_offsets: self.probe_offsets.clone().unwrap_or_else(|| s.probe_offsets.clone()),
        };
        if !(settings.h_grid > 0.0 && settings.h_grid.is_finite()) {
            return Err(CliError::Schema("--grid-h must be positive".into()));
        }
        if !(settings.tol > 0.0 && settings.tol.is_finite()) {
            return Err(CliError::Schema("--tol must be positive".into()));
        }
        if settings.n_dirs < 4 {
            return Err(CliError::Schema("--dirs must be at least 4".into()));
        }
        Ok(settings)
    }
}

fn scenario_label(path: &Path, scn: &Scenario) -> String {
    scn.name.clone().unwrap_or_else(|| {
        path.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default()
    })
}

/// `dir/stem.json` becomes `dir/stem.<suffix>`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    path.with_extension(suffix)
}

struct Reduction {
    net: BrownianNetwork,
    model: WorkloadModel,
    /// `None` when `range(K) ∩ R_+^p = {0}`, so the reduced problem has no
    /// controls.
    direct: Option<DirectSpec>,
    info: ReductionInfo,
}

fn reduce_network(spec: &NetworkSpec, tabulate_on: Option<f64>) -> Result<Reduction, CliError> {
    let net = spec.network()?;
    let model = reduce(&net)?;
    let info = ReductionInfo {
        m: rows_of(&model.m),
        pi: model.pi.clone(),
        basis_residual: model.basis_residual(&net),
        split_residual: model.split_residual(&net),
        basis_tolerance: 1e-10,
        split_tolerance: 1e-10,
    };
    let sys = match reduced_system(&model, &net) {
        Ok(sys) => Some(sys),
        Err(Error::EmptyCone) => None,
        Err(e) => return Err(e.into()),
    };
    let direct = match sys {
        None => None,
        Some(sys) => {
            let gens = sys.cone().generators();
            let running_cost = match tabulate_on {
                None => None,
                Some(h) => {
                    let values = lattice_nodes(&model.w_space, h)?
                        .iter()
                        .map(|w| effective_cost(&model, &net, w).map(|(c, _)| c))
                        .collect::<Result<Vec<f64>, Error>>()?;
                    Some(CostSpec::Tabulated { h, values })
                }
            };
            Some(DirectSpec {
                domain: model.w_space.clone(),
                generators: Some(rows_of(&gens.transpose())),
                g: rows_of(&model.g),
                kappa: model.kappa.clone(),
                alpha: net.alpha,
                drift: Some(crate::scenario::DriftSpec {
                    matrix: None,
                    offset: model.theta_reduced.clone(),
                }),
                sigma: Some(rows_of(&model.sigma_reduced)),
                running_cost,
            })
        }
    };
    Ok(Reduction {
        net,
        model,
        direct,
        info,
    })
}

/// The direct problem of a scenario, reducing a network first. Tabulated
/// costs are built on spacing `h` when given.
pub fn direct_problem(scn: &Scenario, h: Option<f64>) -> Result<Problem, CliError> {
    if let Some(direct) = &scn.direct {
        return direct.problem();
    }
    let spec = scn.network.as_ref().expect("validated scenario has one kind");
    let reduction = reduce_network(spec, h)?;
    match reduction.direct {
        Some(direct) => direct.problem(),
        None => Err(CliError::Schema(
            "the reduced network has no controls (range(K) meets the orthant only at 0)".into(),
        )),
    }
}

#[derive(Serialize)]
struct CheckReport<'a> {
    command: &'static str,
    scenario: String,
    state_dim: usize,
    control_dim: usize,
    solvable: bool,
    unique: bool,
    verdict: String,
    conditions: &'a ConditionReport,
    c_varpi: Option<f64>,
}

pub fn cmd_check(path: &Path, scn: &Scenario, require_unique: bool) -> Result<Report, CliError> {
    let prob = direct_problem(scn, None)?;
    let conditions = prob.sys.check_conditions()?;
    let (solvable, unique) = (conditions.solvable(), conditions.unique());
    let verdict = match (solvable, unique) {
        (true, true) => "DPE solvable (value finite); solution unique",
        (true, false) => "DPE solvable (value finite); uniqueness not established",
        _ => "DPE solvability not established",
    };
    let report = CheckReport {
        command: "check",
        scenario: scenario_label(path, scn),
        state_dim: prob.sys.state_dim(),
        control_dim: prob.sys.control_dim(),
        solvable,
        unique,
        verdict: verdict.into(),
        conditions: &conditions,
        c_varpi: prob.sys.c_varpi(),
    };
    let code = if require_unique && !unique {
        exit::NEGATIVE_VERDICT
    } else {
        exit::OK
    };
    Ok(Report::new(&report, code))
}

#[derive(Serialize)]
struct ReduceReport {
    command: &'static str,
    scenario: String,
    d: usize,
    #[serde(rename = "M")]
    m: Vec<Vec<f64>>,
    #[serde(rename = "G")]
    g: Vec<Vec<f64>>,
    kappa: Vec<f64>,
    pi: Vec<f64>,
    w_space: Domain,
    basis_residual: f64,
    split_residual: f64,
    m_orthonormality_error: f64,
    network_controllable: bool,
    network_no_free_activity: bool,
    cost_grid_h: f64,
    reduced_scenario: Option<String>,
    note: Option<String>,
}

/// Reduces a network scenario and writes the derived direct scenario to
/// `out` (default `<stem>.reduced.json`).
pub fn cmd_reduce(path: &Path, scn: &Scenario, out: Option<&Path>, solver: &SolverArgs) -> Result<Report, CliError> {
    let Some(spec) = &scn.network else {
        return Err(CliError::Schema("`reduce` needs a network scenario".into()));
    };
    let settings = solver.resolve(scn)?;
    let reduction = reduce_network(spec, Some(settings.h_grid))?;
    let model = &reduction.model;
    let d = model.d();
    let mmt = &model.m * model.m.transpose() - nalgebra::DMatrix::<f64>::identity(d, d);
    let out_path = out.map(Path::to_path_buf).unwrap_or_else(|| sibling(path, "reduced.json"));
    let (written, note) = match &reduction.direct {
        Some(direct) => {
            let reduced = Scenario {
                name: Some(format!("{} (reduced)", scenario_label(path, scn))),
                direct: Some(direct.clone()),
                network: None,
                solver: crate::scenario::SolverSpec {
                    h_grid: settings.h_grid,
                    n_dirs: settings.n_dirs,
                    tol: settings.tol,
                    max_iter: settings.max_iter,
                    probe_offsets: settings.probe_offsets.clone(),
                },
                sim: scn.sim.clone(),
                reduction: Some(reduction.info.clone()),
            };
            std::fs::write(&out_path, to_json(&reduced))?;
            (Some(out_path.display().to_string()), None)
        }
        None => (
            None,
            Some("range(K) meets the orthant only at 0: the reduced problem has no controls, no scenario written".into()),
        ),
    };
    let report = ReduceReport {
        command: "reduce",
        scenario: scenario_label(path, scn),
        d,
        m: reduction.info.m.clone(),
        g: rows_of(&model.g),
        kappa: model.kappa.clone(),
        pi: model.pi.clone(),
        w_space: model.w_space.clone(),
        basis_residual: reduction.info.basis_residual,
        split_residual: reduction.info.split_residual,
        m_orthonormality_error: mmt.amax(),
        network_controllable: reduction.net.is_controllable_network()?,
        network_no_free_activity: reduction.net.has_no_free_activity()?,
        cost_grid_h: settings.h_grid,
        reduced_scenario: written,
        note,
    };
    Ok(Report::new(&report, exit::OK))
}

fn build_grid(prob: &Problem, settings: &SolverSettings) -> Result<GridProblem, CliError> {
    if let Some(h) = prob.cost_grid {
        if h != settings.h_grid {
            return Err(CliError::Schema(format!(
                "running cost is tabulated on spacing {h} but the solver uses {}",
                settings.h_grid
            )));
        }
    }
    Ok(GridProblem::build(
        &prob.domain,
        settings.h_grid,
        &prob.coefficients,
        &prob.sys,
        settings.n_dirs,
    )?)
}

#[derive(Serialize)]
struct ProbeSummary {
    flag: ProbeFlag,
    max_difference: f64,
    sup_differences: Vec<PairDifference>,
}

#[derive(Serialize)]
struct SolveReport {
    command: &'static str,
    scenario: String,
    options: SolverSettings,
    nodes: usize,
    converged: bool,
    residual_inf: f64,
    iterations: usize,
    value_csv: String,
    probe: Option<ProbeSummary>,
}

/// Solves from the zero field, writes the value CSV (also when the
/// iteration fails to converge) and runs the uniqueness probe if offsets are
/// set.
pub fn cmd_solve(path: &Path, scn: &Scenario, solver: &SolverArgs, dump: Option<&Path>) -> Result<Report, CliError> {
    let settings = solver.resolve(scn)?;
    let prob = direct_problem(scn, Some(settings.h_grid))?;
    let gp = build_grid(&prob, &settings)?;
    let opts = SolveOptions {
        tol: settings.tol,
        max_iter: settings.max_iter,
    };
    let field = gp.solve_from_constant(0.0, &opts)?;
    let csv_path = dump.map(Path::to_path_buf).unwrap_or_else(|| sibling(path, "value.csv"));
    let mut out = BufWriter::new(std::fs::File::create(&csv_path)?);
    gp.write_csv(&field, &mut out)?;
    out.flush()?;
    let probe = if field.converged && !settings.probe_offsets.is_empty() {
        let report = gp.uniqueness_probe(&settings.probe_offsets, &opts)?;
        Some(ProbeSummary {
            flag: report.flag,
            max_difference: report.max_difference(),
            sup_differences: report.sup_differences,
        })
    } else {
        None
    };
    let code = if field.converged { exit::OK } else { exit::NOT_CONVERGED };
    let report = SolveReport {
        command: "solve",
        scenario: scenario_label(path, scn),
        options: settings,
        nodes: gp.len(),
        converged: field.converged,
        residual_inf: field.residual_inf,
        iterations: field.iterations,
        value_csv: csv_path.display().to_string(),
        probe,
    };
    Ok(Report::new(&report, code))
}

#[derive(Debug, Clone, Default)]
pub struct SimArgs {
    pub policy: Option<PolicySpec>,
    pub paths: Option<usize>,
    pub seed: Option<u64>,
    pub dt: Option<f64>,
    pub horizon: Option<f64>,
    pub w0: Option<Vec<f64>>,
    /// Path CSV output.
    pub dump: Option<PathBuf>,
    /// Value field CSV to compare against; `<stem>.value.csv` if present.
    pub field: Option<PathBuf>,
    pub solver: SolverArgs,
}

/// `do_nothing` style names or a JSON object such as
/// `{"kind": "immediate_jump_then_idle", "target": [0]}`.
pub fn parse_policy(text: &str) -> Result<PolicySpec, CliError> {
    let text = text.trim();
    let value = if text.starts_with('{') {
        serde_json::from_str(text).map_err(|e| CliError::Schema(format!("policy: {e}")))?
    } else {
        serde_json::json!({ "kind": text })
    };
    serde_json::from_value(value).map_err(|e| CliError::Schema(format!("policy: {e}")))
}

#[derive(Serialize)]
struct SimSettings {
    n_paths: usize,
    dt: f64,
    horizon: f64,
    seed: u64,
    w0: Vec<f64>,
    policy: PolicySpec,
}

#[derive(Serialize)]
struct AuditSummary {
    max_recursion_error: f64,
    cone_violations: usize,
    outside_domain: usize,
    max_integration_by_parts_error: f64,
}

#[derive(Serialize)]
struct Comparison {
    value_csv: String,
    #[serde(flatten)]
    result: ValueComparison,
}

#[derive(Serialize)]
struct SimReport {
    command: &'static str,
    scenario: String,
    options: SimSettings,
    estimate: CostEstimate,
    audit: AuditSummary,
    comparison: Option<Comparison>,
}

pub fn cmd_simulate(path: &Path, scn: &Scenario, args: &SimArgs) -> Result<Report, CliError> {
    let settings = args.solver.resolve(scn)?;
    let prob = direct_problem(scn, Some(settings.h_grid))?;
    let alpha = prob.sys.alpha();
    let defaults = SimOptions::defaults_for(alpha);
    let opts = SimOptions {
        n_paths: args.paths.or(scn.sim.n_paths).unwrap_or(defaults.n_paths),
        dt: args.dt.or(scn.sim.dt).unwrap_or(defaults.dt),
        horizon: args.horizon.or(scn.sim.horizon).unwrap_or(defaults.horizon),
        seed: args.seed.or(scn.sim.seed).unwrap_or(defaults.seed),
    };
    if opts.n_paths == 0 {
        return Err(CliError::Schema("--paths must be positive".into()));
    }
    let policy = args
        .policy
        .clone()
        .or_else(|| scn.sim.policy.clone())
        .unwrap_or(PolicySpec::DoNothing);
    let w0 = match args.w0.clone().or_else(|| scn.sim.w0.clone()) {
        Some(w) => w,
        None => {
            let (lo, hi) = prob.domain.bounding_box();
            let centre: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect();
            prob.domain.project(&centre)
        }
    };

    let field_path = match &args.field {
        Some(p) => Some(p.clone()),
        None => Some(sibling(path, "value.csv")).filter(|p| p.exists()),
    };
    let tabulated = matches!(prob.coefficients.running_cost, RunningCost::Tabulated(_));
    let gp = if tabulated || field_path.is_some() {
        Some(build_grid(&prob, &settings)?)
    } else {
        None
    };

    let dynamics = Dynamics {
        sys: &prob.sys,
        domain: &prob.domain,
        coefficients: &prob.coefficients,
    };
    let paths = simulate(&dynamics, &policy, &w0, &opts)?;
    if let Some(dump) = &args.dump {
        let mut out = BufWriter::new(std::fs::File::create(dump)?);
        write_paths_csv(&paths, &mut out)?;
        out.flush()?;
    }

    let mut audit = AuditSummary {
        max_recursion_error: 0.0,
        cone_violations: 0,
        outside_domain: 0,
        max_integration_by_parts_error: 0.0,
    };
    for p in &paths {
        let a = audit_path(p, &dynamics)?;
        audit.max_recursion_error = audit.max_recursion_error.max(a.recursion_error);
        audit.cone_violations += a.cone_violation as usize;
        audit.outside_domain += a.outside_domain as usize;
        let ibp = check_integration_by_parts(p, prob.sys.kappa(), alpha, opts.horizon);
        audit.max_integration_by_parts_error = audit.max_integration_by_parts_error.max(ibp);
    }

    let g = |w: &[f64]| match (&prob.coefficients.running_cost, &gp) {
        (RunningCost::Tabulated(values), Some(gp)) => gp.interpolate(values, w),
        (cost, _) => cost.eval(w).unwrap_or(0.0),
    };
    let estimate = estimate_cost(&paths, prob.sys.kappa(), &g, alpha)?;

    let comparison = match (&field_path, &gp) {
        (Some(fp), Some(gp)) => {
            let field = load_value_csv(fp, gp)?;
            Some(Comparison {
                value_csv: fp.display().to_string(),
                result: compare_with_value(&estimate, gp, &field, &w0),
            })
        }
        _ => None,
    };

    let report = SimReport {
        command: "simulate",
        scenario: scenario_label(path, scn),
        options: SimSettings {
            n_paths: opts.n_paths,
            dt: opts.dt,
            horizon: opts.horizon,
            seed: opts.seed,
            w0,
            policy,
        },
        estimate,
        audit,
        comparison,
    };
    Ok(Report::new(&report, exit::OK))
}

/// Reads a value CSV written by `solve`, checking that its nodes are the
/// nodes of `gp`.
pub fn load_value_csv(path: &Path, gp: &GridProblem) -> Result<ValueField, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let d = gp.dim();
    let mismatch = |what: String| CliError::Schema(format!("{}: {what}", path.display()));
    let mut lines = text.lines();
    lines.next();
    let mut values = Vec::with_capacity(gp.len());
    let mut residual_inf = 0.0_f64;
    for (k, line) in lines.enumerate() {
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != d + 3 {
            return Err(mismatch(format!("row {} has {} columns", k + 1, cols.len())));
        }
        let nums = cols[..d + 2]
            .iter()
            .map(|c| c.parse::<f64>())
            .collect::<Result<Vec<f64>, _>>()
            .map_err(|e| mismatch(format!("row {}: {e}", k + 1)))?;
        let node = gp.nodes.get(k).ok_or_else(|| mismatch("more rows than grid nodes".into()))?;
        if node.iter().zip(&nums[..d]).any(|(a, b)| (a - b).abs() > 1e-9 * (1.0 + a.abs())) {
            return Err(mismatch(format!(
                "row {} is not grid node {k}; re-run solve with the same grid settings",
                k + 1
            )));
        }
        values.push(nums[d]);
        residual_inf = residual_inf.max(nums[d + 1]);
    }
    if values.len() != gp.len() {
        return Err(mismatch(format!("{} rows for {} grid nodes", values.len(), gp.len())));
    }
    Ok(ValueField {
        values,
        residual_inf,
        iterations: 0,
        converged: true,
    })
}
