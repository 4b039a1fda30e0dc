//! Scenario files: a direct control problem or a Brownian network, plus
//! solver and simulation settings.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use singular_control::cone::{ControlCone, ControlSystem};
use singular_control::domain::Domain;
use singular_control::hjb::{AffineField, Coefficients, RunningCost};
use singular_control::network::{AffinePiece, BrownianNetwork, PiecewiseLinear};
use singular_control::sim::PolicySpec;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direct: Option<DirectSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub network: Option<NetworkSpec>,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub sim: SimSpec,
    /// Certificates attached by `reduce`; informational only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reduction: Option<ReductionInfo>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirectSpec {
    pub domain: Domain,
    /// Cone generators, one p-vector each; the nonnegative orthant if absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<Vec<f64>>>,
    /// d x p, by rows.
    #[serde(rename = "G")]
    pub g: Vec<Vec<f64>>,
    pub kappa: Vec<f64>,
    pub alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drift: Option<DriftSpec>,
    /// d x k, by rows; zero if absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub running_cost: Option<CostSpec>,
}

/// `ϑ(w) = A w + b`; `A` defaults to zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriftSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<f64>>>,
    pub offset: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum CostSpec {
    Constant(f64),
    Affine(Piece),
    MaxAffine(Vec<Piece>),
    /// Values at the lattice nodes of spacing `h`, in solver node order.
    Tabulated { h: f64, values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Piece {
    pub slope: Vec<f64>,
    pub intercept: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<usize>,
    pub theta: Vec<f64>,
    #[serde(rename = "Sigma")]
    pub sigma: Vec<Vec<f64>>,
    #[serde(rename = "R")]
    pub r: Vec<Vec<f64>>,
    #[serde(rename = "K")]
    pub k: Vec<Vec<f64>>,
    pub v: Vec<f64>,
    pub z_lo: Vec<f64>,
    pub z_hi: Vec<f64>,
    /// Holding cost `max_i (slope_i·z + intercept_i)`; zero if empty.
    #[serde(default)]
    pub h: Vec<Piece>,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    #[serde(default = "default_h_grid")]
    pub h_grid: f64,
    #[serde(default = "default_n_dirs")]
    pub n_dirs: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub probe_offsets: Vec<f64>,
}

fn default_h_grid() -> f64 {
    0.01
}

fn default_n_dirs() -> usize {
    64
}

fn default_tol() -> f64 {
    1e-9
}

impl Default for SolverSpec {
    fn default() -> Self {
        Self {
            h_grid: default_h_grid(),
            n_dirs: default_n_dirs(),
            tol: default_tol(),
            max_iter: None,
            probe_offsets: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    /// `T`; defaults to `20/α`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_paths: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Initial state; the centre of the domain's bounding box if absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w0: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policy: Option<PolicySpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReductionInfo {
    #[serde(rename = "M")]
    pub m: Vec<Vec<f64>>,
    pub pi: Vec<f64>,
    pub basis_residual: f64,
    pub split_residual: f64,
    pub basis_tolerance: f64,
    pub split_tolerance: f64,
}

/// Everything the solver and simulator need from a direct scenario.
#[derive(Debug, Clone)]
pub struct Problem {
    pub domain: Domain,
    pub sys: ControlSystem,
    pub coefficients: Coefficients,
    /// Spacing the tabulated cost was built on, if any.
    pub cost_grid: Option<f64>,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Schema(msg) => CliError::Schema(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let scenario: Scenario = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            CliError::Schema(format!("field `{path}`: {}", e.into_inner()))
        })?;
        scenario.validate()?;
        Ok(scenario)
    }

    fn validate(&self) -> Result<(), CliError> {
        match (&self.direct, &self.network) {
            (Some(d), None) => d.validate()?,
            (None, Some(n)) => n.validate()?,
            _ => {
                return Err(CliError::Schema(
                    "exactly one of `direct` and `network` must be present".into(),
                ))
            }
        }
        let s = &self.solver;
        if !(s.h_grid > 0.0 && s.h_grid.is_finite()) {
            return Err(field("solver.h_grid", "must be positive"));
        }
        if s.n_dirs < 4 {
            return Err(field("solver.n_dirs", "must be at least 4"));
        }
        if !(s.tol > 0.0 && s.tol.is_finite()) {
            return Err(field("solver.tol", "must be positive"));
        }
        if s.probe_offsets.iter().any(|c| !c.is_finite()) {
            return Err(field("solver.probe_offsets", "must be finite"));
        }
        if let Some(dt) = self.sim.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(field("sim.dt", "must be positive"));
            }
        }
        if let Some(t) = self.sim.horizon {
            if !(t > 0.0 && t.is_finite()) {
                return Err(field("sim.horizon", "must be positive"));
            }
        }
        if self.sim.n_paths == Some(0) {
            return Err(field("sim.n_paths", "must be positive"));
        }
        Ok(())
    }
}

fn field(name: &str, msg: &str) -> CliError {
    CliError::Schema(format!("field `{name}`: {msg}"))
}

fn finite(name: &str, values: &[f64]) -> Result<(), CliError> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(field(name, "entries must be finite"))
    }
}

/// Row-major nested vectors to a matrix with the expected shape.
fn matrix(name: &str, rows: &[Vec<f64>], nrows: usize, ncols: Option<usize>) -> Result<DMatrix<f64>, CliError> {
    if rows.len() != nrows {
        return Err(field(name, &format!("expected {nrows} rows, found {}", rows.len())));
    }
    let ncols = ncols.unwrap_or_else(|| rows.first().map_or(0, Vec::len));
    for (i, r) in rows.iter().enumerate() {
        if r.len() != ncols {
            return Err(field(&format!("{name}[{i}]"), &format!("expected {ncols} entries, found {}", r.len())));
        }
        finite(name, r)?;
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

pub fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

impl DirectSpec {
    fn dims(&self) -> (usize, usize) {
        (self.g.len(), self.kappa.len())
    }

    fn validate(&self) -> Result<(), CliError> {
        let (d, p) = self.dims();
        if d == 0 || p == 0 {
            return Err(field("direct.G", "must be non-empty"));
        }
        if self.domain.dim() != d {
            return Err(field(
                "direct.domain",
                &format!("dimension {} does not match the {d} rows of G", self.domain.dim()),
            ));
        }
        self.domain.clone().validated().map_err(|e| field("direct.domain", &e.to_string()))?;
        for (i, row) in self.g.iter().enumerate() {
            if row.len() != p {
                return Err(field(
                    &format!("direct.G[{i}]"),
                    &format!("has {} entries but kappa has {p}", row.len()),
                ));
            }
        }
        matrix("direct.G", &self.g, d, Some(p))?;
        finite("direct.kappa", &self.kappa)?;
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(field("direct.alpha", "must be positive"));
        }
        if let Some(gens) = &self.generators {
            if gens.is_empty() {
                return Err(field("direct.generators", "must be non-empty"));
            }
            matrix("direct.generators", gens, gens.len(), Some(p))?;
        }
        if let Some(drift) = &self.drift {
            if drift.offset.len() != d {
                return Err(field("direct.drift.offset", &format!("expected {d} entries")));
            }
            finite("direct.drift.offset", &drift.offset)?;
            if let Some(a) = &drift.matrix {
                matrix("direct.drift.matrix", a, d, Some(d))?;
            }
        }
        if let Some(sigma) = &self.sigma {
            matrix("direct.sigma", sigma, d, None)?;
        }
        match &self.running_cost {
            None | Some(CostSpec::Constant(_)) => {}
            Some(CostSpec::Affine(piece)) => piece.check("direct.running_cost.affine", d)?,
            Some(CostSpec::MaxAffine(pieces)) => {
                if pieces.is_empty() {
                    return Err(field("direct.running_cost.max_affine", "needs at least one piece"));
                }
                for piece in pieces {
                    piece.check("direct.running_cost.max_affine", d)?;
                }
            }
            Some(CostSpec::Tabulated { h, values }) => {
                if !(*h > 0.0 && h.is_finite()) {
                    return Err(field("direct.running_cost.tabulated.h", "must be positive"));
                }
                finite("direct.running_cost.tabulated.values", values)?;
            }
        }
        Ok(())
    }

    pub fn problem(&self) -> Result<Problem, CliError> {
        let (d, p) = self.dims();
        let cone = match &self.generators {
            None => ControlCone::orthant(p),
            Some(gens) => {
                let cols = matrix("direct.generators", gens, gens.len(), Some(p))?.transpose();
                ControlCone::new(cols)?
            }
        };
        let g = matrix("direct.G", &self.g, d, Some(p))?;
        let sys = ControlSystem::new(cone, g, self.kappa.clone(), self.alpha)?;
        let drift = match &self.drift {
            None => AffineField::zero(d),
            Some(spec) => AffineField {
                matrix: spec.matrix.clone().unwrap_or_else(|| vec![vec![0.0; d]; d]),
                offset: spec.offset.clone(),
            },
        };
        let sigma = match &self.sigma {
            None => DMatrix::zeros(d, d),
            Some(rows) => matrix("direct.sigma", rows, d, None)?,
        };
        let (running_cost, cost_grid) = match &self.running_cost {
            None => (RunningCost::Constant(0.0), None),
            Some(CostSpec::Constant(c)) => (RunningCost::Constant(*c), None),
            Some(CostSpec::Affine(piece)) => (RunningCost::MaxAffine(vec![piece.pair()]), None),
            Some(CostSpec::MaxAffine(pieces)) => {
                (RunningCost::MaxAffine(pieces.iter().map(Piece::pair).collect()), None)
            }
            Some(CostSpec::Tabulated { h, values }) => (RunningCost::Tabulated(values.clone()), Some(*h)),
        };
        Ok(Problem {
            domain: self.domain.clone(),
            sys,
            coefficients: Coefficients {
                drift,
                sigma,
                running_cost,
            },
            cost_grid,
        })
    }
}

impl Piece {
    fn check(&self, name: &str, d: usize) -> Result<(), CliError> {
        if self.slope.len() != d {
            return Err(field(name, &format!("slope must have {d} entries")));
        }
        finite(name, &self.slope)?;
        finite(name, &[self.intercept])
    }

    fn pair(&self) -> (Vec<f64>, f64) {
        (self.slope.clone(), self.intercept)
    }
}

impl NetworkSpec {
    fn validate(&self) -> Result<(), CliError> {
        self.network().map(|_| ())
    }

    pub fn network(&self) -> Result<BrownianNetwork, CliError> {
        let m = self.theta.len();
        let n = self.v.len();
        let p = self.k.len();
        for (name, declared, actual) in [("network.m", self.m, m), ("network.n", self.n, n), ("network.p", self.p, p)] {
            if let Some(x) = declared {
                if x != actual {
                    return Err(field(name, &format!("declared {x} but the data imply {actual}")));
                }
            }
        }
        finite("network.theta", &self.theta)?;
        finite("network.v", &self.v)?;
        let sigma = matrix("network.Sigma", &self.sigma, m, None)?;
        let r = matrix("network.R", &self.r, m, Some(n))?;
        let k = matrix("network.K", &self.k, p, Some(n))?;
        for (name, v) in [("network.z_lo", &self.z_lo), ("network.z_hi", &self.z_hi)] {
            if v.len() != m {
                return Err(field(name, &format!("expected {m} entries")));
            }
            finite(name, v)?;
        }
        for piece in &self.h {
            piece.check("network.h", m)?;
        }
        let h = if self.h.is_empty() {
            PiecewiseLinear::zero(m)
        } else {
            PiecewiseLinear {
                pieces: self
                    .h
                    .iter()
                    .map(|p| AffinePiece {
                        slope: p.slope.clone(),
                        intercept: p.intercept,
                    })
                    .collect(),
            }
        };
        let net = BrownianNetwork {
            theta: self.theta.clone(),
            sigma,
            r,
            k,
            z_lo: self.z_lo.clone(),
            z_hi: self.z_hi.clone(),
            h,
            v: self.v.clone(),
            alpha: self.alpha,
        };
        net.validate()?;
        Ok(net)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"direct": {"domain": {"interval": {"lo": 0, "hi": 1}},
        "G": [[1, -1]], "kappa": [2, -1], "alpha": 1}}"#;

    #[test]
    fn minimal_direct_scenario_uses_defaults() {
        let s = Scenario::parse(MINIMAL).unwrap();
        assert_eq!(s.solver, SolverSpec::default());
        let prob = s.direct.unwrap().problem().unwrap();
        assert_eq!(prob.sys.control_dim(), 2);
        assert_eq!(prob.coefficients.running_cost, RunningCost::Constant(0.0));
    }

    #[test]
    fn unknown_field_names_its_path() {
        let text = MINIMAL.replace("\"alpha\"", "\"alfa\"");
        let err = Scenario::parse(&text).unwrap_err().to_string();
        assert!(err.contains("alfa") && err.contains("line"), "{err}");
    }

    #[test]
    fn wrong_row_length_is_reported() {
        let text = MINIMAL.replace("[[1, -1]]", "[[1, -1, 0]]");
        let err = Scenario::parse(&text).unwrap_err().to_string();
        assert!(err.contains("direct.G"), "{err}");
    }

    #[test]
    fn both_or_neither_kind_rejected() {
        assert!(Scenario::parse("{}").is_err());
    }

    #[test]
    fn declared_network_sizes_must_agree() {
        let text = r#"{"network": {"m": 3, "theta": [0, 0], "Sigma": [[1, 0], [0, 1]],
            "R": [[1, 0], [0, 1]], "K": [[1, 0], [0, 1]], "v": [1, 1],
            "z_lo": [0, 0], "z_hi": [1, 1], "alpha": 1}}"#;
        let err = Scenario::parse(text).unwrap_err().to_string();
        assert!(err.contains("network.m"), "{err}");
    }
}
