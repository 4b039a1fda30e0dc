//! Monotone finite-difference solver for
//!
//! ```text
//! ((L + α)ψ - g) ∨ H(Dψ) = 0  on W,   L f = -½ tr(Γ D²f) - ϑ·Df
//! ```
//!
//! with the state-constraint boundary condition, for `d ∈ {1, 2}`.
//!
//! The gradient constraint `H(Dψ) <= 0` is discretized through the
//! displacement cost: `ψ(x) <= ψ(x + h e) + h c(e)` for each sampled unit
//! direction `e`. A direction is admitted at a node only when its foot point
//! (and the interpolation cell around it) lies in `W`, so the boundary
//! condition is imposed purely by restricting the stencil to look inward.
//! The diffusion part uses the 7-point stencil in 2D, upwinded first
//! differences for the drift, and a ghost value `ψ(x)` where a neighbour is
//! missing. Every off-diagonal weight is nonnegative.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cone::ControlSystem;
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::numfmt::g17;

const INSIDE_TOL: f64 = 1e-12;
const SNAP_TOL: f64 = 1e-9;

/// `ϑ(x) = A x + b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineField {
    pub matrix: Vec<Vec<f64>>,
    pub offset: Vec<f64>,
}

impl AffineField {
    pub fn zero(d: usize) -> Self {
        Self {
            matrix: vec![vec![0.0; d]; d],
            offset: vec![0.0; d],
        }
    }

    pub fn constant(b: Vec<f64>) -> Self {
        let d = b.len();
        Self {
            matrix: vec![vec![0.0; d]; d],
            offset: b,
        }
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        self.offset
            .iter()
            .zip(&self.matrix)
            .map(|(b, row)| b + row.iter().zip(x).map(|(a, v)| a * v).sum::<f64>())
            .collect()
    }

    fn check(&self, d: usize) -> Result<()> {
        if self.offset.len() != d || self.matrix.len() != d || self.matrix.iter().any(|r| r.len() != d) {
            return Err(Error::DimensionMismatch(format!("drift must be {d}-dimensional")));
        }
        Ok(())
    }
}

/// Running cost `g`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunningCost {
    Constant(f64),
    /// `max_i (a_i·x + b_i)`; a single piece is an affine cost.
    MaxAffine(Vec<(Vec<f64>, f64)>),
    /// One value per grid node, in node order.
    Tabulated(Vec<f64>),
}

impl RunningCost {
    /// Pointwise value; `None` for tabulated costs.
    pub fn eval(&self, x: &[f64]) -> Option<f64> {
        match self {
            RunningCost::Constant(c) => Some(*c),
            RunningCost::MaxAffine(pieces) => Some(
                pieces
                    .iter()
                    .map(|(a, b)| b + a.iter().zip(x).map(|(s, v)| s * v).sum::<f64>())
                    .fold(f64::NEG_INFINITY, f64::max),
            ),
            RunningCost::Tabulated(_) => None,
        }
    }
}

/// Drift, constant diffusion matrix `σ` (d x k) and running cost.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficients {
    pub drift: AffineField,
    pub sigma: DMatrix<f64>,
    pub running_cost: RunningCost,
}

impl Coefficients {
    /// `ϑ = 0`, `σ = 0`, `g = 0`.
    pub fn inert(d: usize) -> Self {
        Self {
            drift: AffineField::zero(d),
            sigma: DMatrix::zeros(d, d),
            running_cost: RunningCost::Constant(0.0),
        }
    }

    pub fn gamma(&self) -> DMatrix<f64> {
        &self.sigma * self.sigma.transpose()
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Jump {
    direction: usize,
    /// `h c(e)`
    cost: f64,
    self_weight: f64,
    weights: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
struct Stencil {
    diag: f64,
    neighbors: Vec<(usize, f64)>,
    jumps: Vec<Jump>,
}

/// Discretized dynamic programming equation on a lattice over `W`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridProblem {
    pub domain: Domain,
    pub h: f64,
    pub nodes: Vec<Vec<f64>>,
    pub boundary: Vec<bool>,
    pub drift: Vec<Vec<f64>>,
    pub gamma: DMatrix<f64>,
    pub running_cost: Vec<f64>,
    pub alpha: f64,
    pub directions: Vec<Vec<f64>>,
    pub dir_costs: Vec<f64>,
    origin: Vec<f64>,
    shape: [usize; 2],
    lattice: Vec<Option<usize>>,
    coords: Vec<[usize; 2]>,
    stencils: Vec<Stencil>,
}

/// Which branch of the max attains the residual.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Branch {
    Pde,
    Gradient,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Pde => "pde",
            Branch::Gradient => "gradient",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualField {
    pub values: Vec<f64>,
    pub branch: Vec<Branch>,
}

impl ResidualField {
    pub fn sup(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValueField {
    pub values: Vec<f64>,
    pub residual_inf: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub tol: f64,
    /// `None` picks `10 (nodes + 1/h)`.
    pub max_iter: Option<usize>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iter: None,
        }
    }
}

impl SolveOptions {
    pub fn resid_tol(&self) -> f64 {
        10.0 * self.tol
    }
}

struct Lattice {
    origin: Vec<f64>,
    shape: [usize; 2],
    index: Vec<Option<usize>>,
    nodes: Vec<Vec<f64>>,
    coords: Vec<[usize; 2]>,
}

impl Lattice {
    fn new(domain: &Domain, h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::Invalid(format!("grid spacing {h} must be positive")));
        }
        let d = domain.dim();
        let (lo, hi) = domain.bounding_box();
        let mut shape = [1usize, 1usize];
        for k in 0..d {
            shape[k] = ((hi[k] - lo[k]) / h + 1e-9).floor() as usize + 1;
        }
        if shape[0] * shape[1] > 4_000_000 {
            return Err(Error::Invalid("grid too large".into()));
        }
        let mut index = vec![None; shape[0] * shape[1]];
        let mut nodes = Vec::new();
        let mut coords = Vec::new();
        for j in 0..shape[1] {
            for i in 0..shape[0] {
                let x: Vec<f64> = [i, j][..d]
                    .iter()
                    .zip(&lo)
                    .map(|(&idx, &l)| l + idx as f64 * h)
                    .collect();
                let scale = 1.0 + x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
                if domain.contains(&x, INSIDE_TOL * scale) {
                    index[j * shape[0] + i] = Some(nodes.len());
                    nodes.push(x);
                    coords.push([i, j]);
                }
            }
        }
        Ok(Self { origin: lo, shape, index, nodes, coords })
    }
}

/// Lattice points of spacing `h` inside `domain`, in the node order used by
/// [`GridProblem`].
pub fn lattice_nodes(domain: &Domain, h: f64) -> Result<Vec<Vec<f64>>> {
    Ok(Lattice::new(domain, h)?.nodes)
}

impl GridProblem {
    pub fn build(
        domain: &Domain,
        h: f64,
        coefficients: &Coefficients,
        sys: &ControlSystem,
        n_dirs: usize,
    ) -> Result<Self> {
        let d = domain.dim();
        if sys.state_dim() != d {
            return Err(Error::DimensionMismatch(format!(
                "control system has d = {}, domain has d = {d}",
                sys.state_dim()
            )));
        }
        coefficients.drift.check(d)?;
        if coefficients.sigma.nrows() != d {
            return Err(Error::DimensionMismatch("sigma must have d rows".into()));
        }

        let Lattice { origin: lo, shape, index: lattice, nodes, coords } = Lattice::new(domain, h)?;
        if nodes.is_empty() {
            return Err(Error::EmptyInterior);
        }

        let gamma = coefficients.gamma();
        let running_cost = match &coefficients.running_cost {
            RunningCost::Tabulated(v) => {
                if v.len() != nodes.len() {
                    return Err(Error::DimensionMismatch(format!(
                        "tabulated running cost has {} values for {} nodes",
                        v.len(),
                        nodes.len()
                    )));
                }
                v.clone()
            }
            g => nodes.iter().map(|x| g.eval(x).unwrap_or(0.0)).collect(),
        };
        let drift: Vec<Vec<f64>> = nodes.iter().map(|x| coefficients.drift.eval(x)).collect();

        let directions = sys.directions(n_dirs)?;
        let dir_costs = sys.direction_costs(&directions)?;

        let mut gp = GridProblem {
            domain: domain.clone(),
            h,
            boundary: vec![false; nodes.len()],
            nodes,
            drift,
            gamma,
            running_cost,
            alpha: sys.alpha(),
            directions,
            dir_costs,
            origin: lo,
            shape,
            lattice,
            coords,
            stencils: Vec::new(),
        };
        gp.check_cross_terms()?;
        gp.assemble()?;
        Ok(gp)
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn node_at(&self, i: i64, j: i64) -> Option<usize> {
        if i < 0 || j < 0 || i as usize >= self.shape[0] || j as usize >= self.shape[1] {
            return None;
        }
        self.lattice[j as usize * self.shape[0] + i as usize]
    }

    fn check_cross_terms(&self) -> Result<()> {
        if self.dim() == 2 {
            let g = &self.gamma;
            let cross = g[(0, 1)].abs();
            let diag = g[(0, 0)].min(g[(1, 1)]);
            if cross > diag * (1.0 + 1e-12) + 1e-15 {
                return Err(Error::CrossTermDominanceViolated { node: 0, cross, diag });
            }
        }
        Ok(())
    }

    fn assemble(&mut self) -> Result<()> {
        let d = self.dim();
        let h = self.h;
        let h2 = h * h;
        let mut stencils = Vec::with_capacity(self.len());
        let mut any_interior = false;
        let mut boundary = vec![false; self.len()];
        for k in 0..self.len() {
            let [i, j] = self.coords[k];
            let (i, j) = (i as i64, j as i64);
            let mut neighbors: Vec<(usize, f64)> = Vec::new();
            let mut push = |nb: Option<usize>, w: f64| {
                if w > 0.0 {
                    if let Some(n) = nb {
                        neighbors.push((n, w));
                    }
                }
            };

            let axis = |a: usize, s: i64| -> Option<usize> {
                if a == 0 {
                    self.node_at(i + s, j)
                } else {
                    self.node_at(i, j + s)
                }
            };
            let mut is_boundary = false;
            for a in 0..d {
                if axis(a, 1).is_none() || axis(a, -1).is_none() {
                    is_boundary = true;
                }
            }
            any_interior |= !is_boundary;
            boundary[k] = is_boundary;

            let cross = if d == 2 { self.gamma[(0, 1)] } else { 0.0 };
            for a in 0..d {
                let diff = 0.5 * (self.gamma[(a, a)] - cross.abs()) / h2;
                push(axis(a, 1), diff);
                push(axis(a, -1), diff);
                let v = self.drift[k][a];
                if v > 0.0 {
                    push(axis(a, 1), v / h);
                } else if v < 0.0 {
                    push(axis(a, -1), -v / h);
                }
            }
            if d == 2 && cross != 0.0 {
                let w = 0.5 * cross.abs() / h2;
                if cross > 0.0 {
                    push(self.node_at(i + 1, j + 1), w);
                    push(self.node_at(i - 1, j - 1), w);
                } else {
                    push(self.node_at(i + 1, j - 1), w);
                    push(self.node_at(i - 1, j + 1), w);
                }
            }
            if neighbors.iter().any(|&(_, w)| w < 0.0) {
                return Err(Error::Invalid("negative off-diagonal stencil weight".into()));
            }
            let diag = self.alpha + neighbors.iter().map(|&(_, w)| w).sum::<f64>();

            let mut jumps = Vec::new();
            for (e_idx, e) in self.directions.iter().enumerate() {
                let foot: Vec<f64> = self.nodes[k].iter().zip(e).map(|(x, v)| x + h * v).collect();
                let scale = 1.0 + foot.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
                if !self.domain.contains(&foot, INSIDE_TOL * scale) {
                    continue;
                }
                let Some(weights) = self.interpolation_weights(&foot) else {
                    continue;
                };
                let mut self_weight = 0.0;
                let mut rest = Vec::new();
                for (n, w) in weights {
                    if n == k {
                        self_weight += w;
                    } else {
                        rest.push((n, w));
                    }
                }
                if self_weight >= 1.0 - 1e-12 {
                    continue;
                }
                jumps.push(Jump {
                    direction: e_idx,
                    cost: h * self.dir_costs[e_idx],
                    self_weight,
                    weights: rest,
                });
            }
            if jumps.is_empty() && neighbors.is_empty() && (0..d).all(|a| axis(a, 1).is_none() && axis(a, -1).is_none()) {
                return Err(Error::NoAdmissibleDirection(k));
            }
            stencils.push(Stencil {
                diag,
                neighbors,
                jumps,
            });
        }
        if !any_interior {
            return Err(Error::EmptyInterior);
        }
        self.stencils = stencils;
        self.boundary = boundary;
        Ok(())
    }

    /// Multilinear interpolation weights at `x`; `None` if a corner with
    /// positive weight is not a grid node.
    fn interpolation_weights(&self, x: &[f64]) -> Option<Vec<(usize, f64)>> {
        let d = self.dim();
        let mut base = [0i64; 2];
        let mut frac = [0.0f64; 2];
        for a in 0..d {
            let s = (x[a] - self.origin[a]) / self.h;
            let r = s.round();
            let s = if (s - r).abs() < SNAP_TOL { r } else { s };
            let f = s.floor();
            base[a] = f as i64;
            frac[a] = s - f;
        }
        let mut out = Vec::with_capacity(1 << d);
        let corners: &[[i64; 2]] = if d == 1 {
            &[[0, 0], [1, 0]]
        } else {
            &[[0, 0], [1, 0], [0, 1], [1, 1]]
        };
        for c in corners {
            let mut w = 1.0;
            for a in 0..d {
                w *= if c[a] == 1 { frac[a] } else { 1.0 - frac[a] };
            }
            if w <= 1e-14 {
                continue;
            }
            let n = self.node_at(base[0] + c[0], base[1] + c[1])?;
            out.push((n, w));
        }
        let total: f64 = out.iter().map(|&(_, w)| w).sum();
        for (_, w) in out.iter_mut() {
            *w /= total;
        }
        Some(out)
    }

    /// Interpolated value of a node field at an arbitrary point of `W`
    /// (nearest node when the cell is incomplete).
    pub fn interpolate(&self, values: &[f64], x: &[f64]) -> f64 {
        match self.interpolation_weights(x) {
            Some(w) => w.iter().map(|&(n, w)| w * values[n]).sum(),
            None => values[self.nearest_node(x)],
        }
    }

    pub fn nearest_node(&self, x: &[f64]) -> usize {
        self.nodes
            .iter()
            .enumerate()
            .map(|(k, y)| (k, y.iter().zip(x).map(|(a, b)| (a - b).powi(2)).sum::<f64>()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(k, _)| k)
            .unwrap_or(0)
    }

    /// Indices (into `directions`) of the jump directions admitted at `node`.
    pub fn admitted_directions(&self, node: usize) -> Vec<usize> {
        self.stencils[node].jumps.iter().map(|j| j.direction).collect()
    }

    /// Foot points `x + h e` of the admitted jumps at `node`.
    pub fn foot_points(&self, node: usize) -> Vec<Vec<f64>> {
        self.admitted_directions(node)
            .into_iter()
            .map(|e| {
                self.nodes[node]
                    .iter()
                    .zip(&self.directions[e])
                    .map(|(x, v)| x + self.h * v)
                    .collect()
            })
            .collect()
    }

    /// Off-diagonal PDE weights at `node`.
    pub fn pde_weights(&self, node: usize) -> &[(usize, f64)] {
        &self.stencils[node].neighbors
    }

    /// `(α + L_h) f (x) - g(x)`.
    pub fn pde_operator(&self, f: &[f64], node: usize) -> f64 {
        let st = &self.stencils[node];
        st.diag * f[node] - st.neighbors.iter().map(|&(n, w)| w * f[n]).sum::<f64>() - self.running_cost[node]
    }

    /// `max_e (f(x) - f(x + h e) - h c(e)) / h` over admitted directions;
    /// `-inf` when none is admitted.
    pub fn hamiltonian_operator(&self, f: &[f64], node: usize) -> f64 {
        self.stencils[node]
            .jumps
            .iter()
            .map(|jp| {
                let target: f64 = jp.weights.iter().map(|&(n, w)| w * f[n]).sum();
                ((1.0 - jp.self_weight) * f[node] - target - jp.cost) / self.h
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn update(&self, psi: &[f64], node: usize) -> f64 {
        let st = &self.stencils[node];
        let pde = (self.running_cost[node] + st.neighbors.iter().map(|&(n, w)| w * psi[n]).sum::<f64>()) / st.diag;
        st.jumps.iter().fold(pde, |best, jp| {
            let target: f64 = jp.weights.iter().map(|&(n, w)| w * psi[n]).sum();
            best.min((target + jp.cost) / (1.0 - jp.self_weight))
        })
    }

    /// One Gauss–Seidel sweep of the fixed-point map; returns the largest
    /// change.
    pub fn sweep(&self, psi: &mut [f64], forward: bool) -> f64 {
        let mut delta = 0.0_f64;
        let mut visit = |k: usize, psi: &mut [f64]| {
            let new = self.update(psi, k);
            delta = delta.max((new - psi[k]).abs());
            psi[k] = new;
        };
        if forward {
            for k in 0..self.len() {
                visit(k, psi);
            }
        } else {
            for k in (0..self.len()).rev() {
                visit(k, psi);
            }
        }
        delta
    }

    pub fn residual(&self, psi: &[f64]) -> ResidualField {
        let mut values = Vec::with_capacity(self.len());
        let mut branch = Vec::with_capacity(self.len());
        for k in 0..self.len() {
            let pde = self.pde_operator(psi, k);
            let ham = self.hamiltonian_operator(psi, k);
            if ham > pde {
                values.push(ham);
                branch.push(Branch::Gradient);
            } else {
                values.push(pde);
                branch.push(Branch::Pde);
            }
        }
        ResidualField { values, branch }
    }

    pub fn default_max_iter(&self) -> usize {
        10 * (self.len() + (1.0 / self.h).ceil() as usize)
    }

    /// Iterates alternating forward/backward sweeps from `init` until the
    /// update falls below `tol` and the residual below `10 tol`.
    pub fn solve(&self, init: &[f64], opts: &SolveOptions) -> Result<ValueField> {
        if init.len() != self.len() {
            return Err(Error::DimensionMismatch(format!(
                "initial field has {} values for {} nodes",
                init.len(),
                self.len()
            )));
        }
        let max_iter = opts.max_iter.unwrap_or_else(|| self.default_max_iter());
        let mut psi = init.to_vec();
        let mut residual_inf = f64::INFINITY;
        let mut iterations = 0;
        let mut converged = false;
        while iterations < max_iter {
            let delta = self.sweep(&mut psi, iterations % 2 == 0);
            iterations += 1;
            if delta < opts.tol {
                residual_inf = self.residual(&psi).sup();
                if residual_inf <= opts.resid_tol() {
                    converged = true;
                    break;
                }
            }
        }
        if !converged {
            residual_inf = self.residual(&psi).sup();
        }
        Ok(ValueField {
            values: psi,
            residual_inf,
            iterations,
            converged,
        })
    }

    pub fn solve_from_constant(&self, c: f64, opts: &SolveOptions) -> Result<ValueField> {
        self.solve(&vec![c; self.len()], opts)
    }

    /// Solves from constant initial fields `0` and `-|c|` for each offset and
    /// compares the fixed points.
    pub fn uniqueness_probe(&self, offsets: &[f64], opts: &SolveOptions) -> Result<ProbeReport> {
        let mut inits = vec![0.0];
        inits.extend(offsets.iter().map(|c| -c.abs()));
        let fields: Vec<ValueField> = inits
            .par_iter()
            .map(|&c| self.solve_from_constant(c, opts))
            .collect::<Result<_>>()?;
        if let Some((i, f)) = fields.iter().enumerate().find(|(_, f)| !f.converged) {
            return Err(Error::NotConverged {
                init: inits[i],
                residual: f.residual_inf,
            });
        }
        let mut sup_differences = Vec::new();
        for a in 0..fields.len() {
            for b in a + 1..fields.len() {
                let diff = fields[a]
                    .values
                    .iter()
                    .zip(&fields[b].values)
                    .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()));
                sup_differences.push(PairDifference {
                    init_a: inits[a],
                    init_b: inits[b],
                    sup_difference: diff,
                });
            }
        }
        let flag = if sup_differences.iter().any(|p| p.sup_difference > 10.0 * opts.tol) {
            ProbeFlag::MultipleFixedPoints
        } else {
            ProbeFlag::Unique
        };
        Ok(ProbeReport {
            sup_differences,
            flag,
            fields,
        })
    }

    /// Largest difference quotient of a node field over axis neighbours.
    pub fn lipschitz_estimate(&self, values: &[f64]) -> f64 {
        let mut l = 0.0_f64;
        for k in 0..self.len() {
            let [i, j] = self.coords[k];
            for (di, dj) in [(1i64, 0i64), (0, 1)] {
                if let Some(n) = self.node_at(i as i64 + di, j as i64 + dj) {
                    l = l.max((values[n] - values[k]).abs() / self.h);
                }
            }
        }
        l
    }

    /// Largest axis difference quotient among node pairs with an end point
    /// within `radius` of `x`.
    pub fn local_lipschitz(&self, values: &[f64], x: &[f64], radius: f64) -> f64 {
        let near = |k: usize| {
            self.nodes[k].iter().zip(x).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt() <= radius
        };
        let mut l = 0.0_f64;
        for k in 0..self.len() {
            let [i, j] = self.coords[k];
            for (di, dj) in [(1i64, 0i64), (0, 1)] {
                if let Some(n) = self.node_at(i as i64 + di, j as i64 + dj) {
                    if near(k) || near(n) {
                        l = l.max((values[n] - values[k]).abs() / self.h);
                    }
                }
            }
        }
        l
    }

    /// CSV with columns `x1[,x2],psi,residual,active_branch`.
    pub fn write_csv<W: std::io::Write>(&self, field: &ValueField, mut out: W) -> std::io::Result<()> {
        let res = self.residual(&field.values);
        let header = if self.dim() == 1 {
            "x1,psi,residual,active_branch"
        } else {
            "x1,x2,psi,residual,active_branch"
        };
        writeln!(out, "{header}")?;
        for k in 0..self.len() {
            let coords: Vec<String> = self.nodes[k].iter().map(|v| g17(*v)).collect();
            writeln!(
                out,
                "{},{},{},{}",
                coords.join(","),
                g17(field.values[k]),
                g17(res.values[k]),
                res.branch[k].as_str()
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ProbeFlag {
    Unique,
    MultipleFixedPoints,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairDifference {
    pub init_a: f64,
    pub init_b: f64,
    pub sup_difference: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeReport {
    pub sup_differences: Vec<PairDifference>,
    pub flag: ProbeFlag,
    pub fields: Vec<ValueField>,
}

impl ProbeReport {
    pub fn max_difference(&self) -> f64 {
        self.sup_differences
            .iter()
            .map(|p| p.sup_difference)
            .fold(0.0, f64::max)
    }
}

/// `(L + α) f - g` at `x` for a smooth `f` given its value, gradient and
/// Hessian there.
pub fn continuous_pde(
    coefficients: &Coefficients,
    alpha: f64,
    x: &[f64],
    f: f64,
    grad: &DVector<f64>,
    hess: &DMatrix<f64>,
) -> f64 {
    let gamma = coefficients.gamma();
    let drift = coefficients.drift.eval(x);
    let trace = (&gamma * hess).trace();
    let g = coefficients.running_cost.eval(x).unwrap_or(0.0);
    alpha * f - 0.5 * trace - drift.iter().zip(grad.iter()).map(|(a, b)| a * b).sum::<f64>() - g
}
