//! Polyhedral control cones, the displacement cost `c(x)`, the Hamiltonian,
//! and exact LP decisions for the solvability and uniqueness conditions.
//!
//! For a cone generated by unit rays `r_1..r_J` the displacement cost is
//!
//! ```text
//! c(x) = inf { κ·u : u ∈ U, G u = x } = min { Σ λ_j κ·r_j : Σ λ_j G r_j = x, λ >= 0 }
//! ```
//!
//! and the Hamiltonian is its conjugate over the unit sphere,
//! `H(q) = sup_{|e| = 1} ( -e·q - c(e) )`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lp::{nullspace_basis, numerical_rank, solve_lp, LinearProgram, LpOutcome};

/// Tolerances for the condition checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeTolerances {
    /// `|G r_j|` at or below this counts as zero.
    pub ray_tol: f64,
    /// Margin separating a strictly positive optimum from zero.
    pub strict_tol: f64,
    pub arb_tol: f64,
    /// Upper cap on δ in the strict-subsolution LP.
    pub delta_cap: f64,
}

impl Default for ConeTolerances {
    fn default() -> Self {
        Self {
            ray_tol: 1e-9,
            strict_tol: 1e-7,
            arb_tol: 1e-9,
            delta_cap: 1e6,
        }
    }
}

/// Finitely generated closed convex cone; generators are stored normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlCone {
    generators: DMatrix<f64>,
}

impl ControlCone {
    pub fn new(generators: DMatrix<f64>) -> Result<Self> {
        if generators.ncols() == 0 || generators.nrows() == 0 {
            return Err(Error::Invalid("cone needs at least one generator".into()));
        }
        if generators.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("cone generators".into()));
        }
        let mut g = generators;
        for mut col in g.column_iter_mut() {
            let n = col.norm();
            if n <= 1e-300 {
                return Err(Error::Invalid("zero generator".into()));
            }
            col /= n;
        }
        Ok(Self { generators: g })
    }

    /// The nonnegative orthant of R^p.
    pub fn orthant(p: usize) -> Self {
        Self {
            generators: DMatrix::identity(p, p),
        }
    }

    pub fn generators(&self) -> &DMatrix<f64> {
        &self.generators
    }

    pub fn dim(&self) -> usize {
        self.generators.nrows()
    }

    pub fn num_generators(&self) -> usize {
        self.generators.ncols()
    }

    /// Conic combination `Σ λ_j r_j`.
    pub fn combine(&self, lambda: &[f64]) -> Vec<f64> {
        let l = DVector::from_column_slice(lambda);
        (&self.generators * l).iter().copied().collect()
    }

    /// LP membership test: is `u` a nonnegative combination of the generators
    /// (to within `tol` in the max norm)?
    pub fn contains(&self, u: &[f64], tol: f64) -> Result<bool> {
        let p = self.dim();
        let j = self.num_generators();
        if u.len() != p {
            return Err(Error::DimensionMismatch("membership vector".into()));
        }
        // Σ λ r - s⁺ + s⁻ = u, minimize slack
        let mut a = DMatrix::zeros(p, j + 2 * p);
        a.view_mut((0, 0), (p, j)).copy_from(&self.generators);
        for i in 0..p {
            a[(i, j + i)] = 1.0;
            a[(i, j + p + i)] = -1.0;
        }
        let mut c = vec![0.0; j + 2 * p];
        for v in c.iter_mut().skip(j) {
            *v = 1.0;
        }
        match solve_lp(&LinearProgram::nonnegative(c, a, u.to_vec()))? {
            LpOutcome::Optimal(s) => {
                let worst = (0..p)
                    .map(|i| s.primal[j + i] + s.primal[j + p + i])
                    .fold(0.0_f64, f64::max);
                Ok(worst <= tol)
            }
            _ => Ok(false),
        }
    }
}

/// Cached ϖ data: `f_i^±` minimizing `1·λ` subject to `G R λ = ±e_i`.
#[derive(Debug, Clone, PartialEq)]
struct VarpiTable {
    plus: Vec<Vec<f64>>,
    minus: Vec<Vec<f64>>,
    c_varpi: f64,
}

/// `(U, G, κ, α)` of the control problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSystem {
    cone: ControlCone,
    g: DMatrix<f64>,
    kappa: Vec<f64>,
    alpha: f64,
    /// `G r_j` as columns
    gr: DMatrix<f64>,
    /// `κ·r_j`
    kr: Vec<f64>,
    varpi: Option<VarpiTable>,
    tol: ConeTolerances,
}

/// Verdicts for the controllability, finiteness, uniqueness and no-arbitrage
/// conditions, with LP witnesses.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    /// `G U = R^d`
    pub controllable: bool,
    /// `H(q) < ∞` for some q
    pub hamiltonian_finite: bool,
    /// `inf_q H(q) < 0`
    pub strict_subsolution_exists: bool,
    /// `{u ∈ U : Gu = 0, κ·u <= 0} = {0}`
    pub no_arbitrage: bool,
    /// `{u ∈ U : |Gu| <= ε, κ·u <= -1} = ∅` for small ε
    pub weak_no_arbitrage: bool,
    /// some unit `u1` with `inf_{u ∈ U_1} u1·u > 0`
    pub u1_condition: bool,
    /// Minimizer of the generator-level bound; `H(witness_q) <= -witness_delta`.
    pub witness_q: Option<Vec<f64>>,
    pub witness_delta: Option<f64>,
    pub arbitrage_direction: Option<Vec<f64>>,
    pub u1_witness: Option<Vec<f64>>,
    /// `(ε, set empty)` for each ε of the weak no-arbitrage sweep.
    pub eps_sweep: Vec<(f64, bool)>,
}

impl ConditionReport {
    /// Verdict of the independent ε-sweep at its smallest ε.
    pub fn eps_sweep_verdict(&self) -> bool {
        self.eps_sweep.last().map(|&(_, empty)| empty).unwrap_or(false)
    }

    /// Value function finite and the dynamic programming equation solvable.
    pub fn solvable(&self) -> bool {
        self.controllable && self.hamiltonian_finite
    }

    /// Solution of the dynamic programming equation unique.
    pub fn unique(&self) -> bool {
        self.solvable() && self.strict_subsolution_exists
    }
}

const EPS_SWEEP: [f64; 7] = [1.0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6];

impl ControlSystem {
    pub fn new(cone: ControlCone, g: DMatrix<f64>, kappa: Vec<f64>, alpha: f64) -> Result<Self> {
        Self::with_tolerances(cone, g, kappa, alpha, ConeTolerances::default())
    }

    pub fn with_tolerances(
        cone: ControlCone,
        g: DMatrix<f64>,
        kappa: Vec<f64>,
        alpha: f64,
        tol: ConeTolerances,
    ) -> Result<Self> {
        let p = cone.dim();
        let d = g.nrows();
        if g.ncols() != p {
            return Err(Error::DimensionMismatch(format!(
                "G has {} columns, cone lives in R^{p}",
                g.ncols()
            )));
        }
        if kappa.len() != p {
            return Err(Error::DimensionMismatch(format!(
                "kappa has length {}, expected {p}",
                kappa.len()
            )));
        }
        if d == 0 || d > p {
            return Err(Error::Invalid(format!("need 1 <= d <= p, got d = {d}, p = {p}")));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::Invalid(format!("discount alpha = {alpha} must be positive")));
        }
        if g.iter().chain(kappa.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("G or kappa".into()));
        }
        let gr = &g * cone.generators();
        let kv = DVector::from_column_slice(&kappa);
        let kr = (cone.generators().transpose() * kv).iter().copied().collect();
        let mut sys = Self {
            cone,
            g,
            kappa,
            alpha,
            gr,
            kr,
            varpi: None,
            tol,
        };
        sys.varpi = sys.build_varpi()?;
        Ok(sys)
    }

    pub fn cone(&self) -> &ControlCone {
        &self.cone
    }

    pub fn g(&self) -> &DMatrix<f64> {
        &self.g
    }

    pub fn kappa(&self) -> &[f64] {
        &self.kappa
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn state_dim(&self) -> usize {
        self.g.nrows()
    }

    pub fn control_dim(&self) -> usize {
        self.cone.dim()
    }

    pub fn tolerances(&self) -> &ConeTolerances {
        &self.tol
    }

    pub fn apply_g(&self, u: &[f64]) -> Vec<f64> {
        (&self.g * DVector::from_column_slice(u)).iter().copied().collect()
    }

    pub fn cost_of(&self, u: &[f64]) -> f64 {
        self.kappa.iter().zip(u).map(|(k, v)| k * v).sum()
    }

    fn displacement_lp(&self, x: &[f64]) -> Result<LpOutcome> {
        if x.len() != self.state_dim() {
            return Err(Error::DimensionMismatch("displacement".into()));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("displacement".into()));
        }
        solve_lp(&LinearProgram::nonnegative(
            self.kr.clone(),
            self.gr.clone(),
            x.to_vec(),
        ))
    }

    /// `c(x) = inf { κ·u : u ∈ U, Gu = x }`; `+inf` when no control reaches
    /// `x`, `-inf` when the cost is unbounded below.
    pub fn displacement_cost(&self, x: &[f64]) -> Result<f64> {
        Ok(match self.displacement_lp(x)? {
            LpOutcome::Optimal(s) => s.value,
            LpOutcome::Infeasible => f64::INFINITY,
            LpOutcome::Unbounded { .. } => f64::NEG_INFINITY,
        })
    }

    /// A cheapest control realizing displacement `x`, if `c(x)` is finite.
    pub fn displacement_argmin(&self, x: &[f64]) -> Result<Option<Vec<f64>>> {
        Ok(match self.displacement_lp(x)? {
            LpOutcome::Optimal(s) => Some(self.cone.combine(&s.primal)),
            _ => None,
        })
    }

    /// Unit directions used to sample the sphere in the Hamiltonian sup.
    ///
    /// `d = 1` gives exactly `{+1, -1}`. `d = 2` gives `n_dirs` equispaced
    /// angles. `d = 3` uses a Fibonacci lattice, which is untested territory.
    pub fn directions(&self, n_dirs: usize) -> Result<Vec<Vec<f64>>> {
        unit_directions(self.state_dim(), n_dirs)
    }

    /// `c(e)` for each direction, failing if the Hamiltonian is infinite.
    pub fn direction_costs(&self, dirs: &[Vec<f64>]) -> Result<Vec<f64>> {
        dirs.iter()
            .map(|e| match self.displacement_lp(e)? {
                LpOutcome::Optimal(s) => Ok(s.value),
                LpOutcome::Infeasible => Ok(f64::INFINITY),
                LpOutcome::Unbounded { ray } => Err(Error::HamiltonianInfinite {
                    ray: self.cone.combine(&ray),
                }),
            })
            .collect()
    }

    /// `H(q)` as the max of `-e·q - c(e)` over the direction set.
    ///
    /// Exact for `d = 1`; for `d = 2` it approaches `H(q)` from below with
    /// error `O(1/n_dirs)`.
    pub fn hamiltonian(&self, q: &[f64], n_dirs: usize) -> Result<f64> {
        HamiltonianTable::new(self, n_dirs)?.eval(q)
    }

    /// `ϖ(x) ∈ U` with `G ϖ(x) = x` and `|ϖ(x)| <= c_ϖ |x|`.
    pub fn varpi(&self, x: &[f64]) -> Result<Vec<f64>> {
        let table = self.varpi.as_ref().ok_or(Error::NotControllable)?;
        if x.len() != self.state_dim() {
            return Err(Error::DimensionMismatch("varpi argument".into()));
        }
        let mut u = vec![0.0; self.control_dim()];
        for (i, &xi) in x.iter().enumerate() {
            let f = if xi > 0.0 { &table.plus[i] } else { &table.minus[i] };
            let s = xi.abs();
            for (uk, fk) in u.iter_mut().zip(f) {
                *uk += s * fk;
            }
        }
        Ok(u)
    }

    /// Linear-growth constant of ϖ, or `None` if not controllable.
    pub fn c_varpi(&self) -> Option<f64> {
        self.varpi.as_ref().map(|t| t.c_varpi)
    }

    fn axis_reach(&self, i: usize, sign: f64) -> Result<Option<Vec<f64>>> {
        let d = self.state_dim();
        let mut rhs = vec![0.0; d];
        rhs[i] = sign;
        let lp = LinearProgram::nonnegative(
            vec![1.0; self.cone.num_generators()],
            self.gr.clone(),
            rhs,
        );
        Ok(match solve_lp(&lp)? {
            LpOutcome::Optimal(s) => Some(self.cone.combine(&s.primal)),
            LpOutcome::Infeasible => None,
            // objective is bounded below by zero
            LpOutcome::Unbounded { .. } => {
                return Err(Error::NumericalBreakdown("unbounded 1·λ".into()))
            }
        })
    }

    fn build_varpi(&self) -> Result<Option<VarpiTable>> {
        let d = self.state_dim();
        let mut plus = Vec::with_capacity(d);
        let mut minus = Vec::with_capacity(d);
        for i in 0..d {
            match (self.axis_reach(i, 1.0)?, self.axis_reach(i, -1.0)?) {
                (Some(fp), Some(fm)) => {
                    plus.push(fp);
                    minus.push(fm);
                }
                _ => return Ok(None),
            }
        }
        let norm = |v: &Vec<f64>| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let biggest = plus
            .iter()
            .chain(minus.iter())
            .map(norm)
            .fold(0.0_f64, f64::max);
        Ok(Some(VarpiTable {
            plus,
            minus,
            c_varpi: d as f64 * biggest,
        }))
    }

    /// `G U = R^d`: every `±e_i` is reachable.
    pub fn is_controllable(&self) -> bool {
        self.varpi.is_some()
    }

    /// Decides all six conditions.
    pub fn check_conditions(&self) -> Result<ConditionReport> {
        let controllable = self.is_controllable();
        let (hamiltonian_finite, strict, witness_q, witness_delta) = self.strict_subsolution_lp()?;
        let (no_arbitrage, arbitrage_direction) = self.no_arbitrage_lp()?;
        let eps_sweep = EPS_SWEEP
            .iter()
            .map(|&eps| Ok((eps, self.weak_arbitrage_set_empty(eps)?)))
            .collect::<Result<Vec<_>>>()?;
        let (u1_condition, u1_witness) = self.u1_lp()?;
        Ok(ConditionReport {
            controllable,
            hamiltonian_finite,
            strict_subsolution_exists: strict,
            no_arbitrage,
            weak_no_arbitrage: hamiltonian_finite,
            u1_condition,
            witness_q,
            witness_delta,
            arbitrage_direction,
            u1_witness,
            eps_sweep,
        })
    }

    /// maximize δ s.t. `κ·r_j + q·G r_j >= δ |G r_j|` for generators with
    /// `G r_j != 0` and `κ·r_j >= 0` for the rest. A feasible `(q, δ)` gives
    /// `κ·u + q·Gu >= δ|Gu|` on the whole cone when `δ >= 0`, i.e.
    /// `H(q) <= -δ`.
    fn strict_subsolution_lp(&self) -> Result<(bool, bool, Option<Vec<f64>>, Option<f64>)> {
        let d = self.state_dim();
        let tol = &self.tol;
        let mut moving = Vec::new();
        for j in 0..self.cone.num_generators() {
            let len = self.gr.column(j).norm();
            if len <= tol.ray_tol {
                if self.kr[j] < -tol.arb_tol {
                    return Ok((false, false, None, None));
                }
            } else {
                moving.push((j, len));
            }
        }
        if moving.is_empty() {
            return Ok((true, true, Some(vec![0.0; d]), Some(tol.delta_cap)));
        }
        // variables: q (free, d), δ (free, <= cap), slacks s_j >= 0
        let nv = d + 1 + moving.len();
        let mut a = DMatrix::zeros(moving.len(), nv);
        let mut b = vec![0.0; moving.len()];
        for (row, &(j, len)) in moving.iter().enumerate() {
            for i in 0..d {
                a[(row, i)] = self.gr[(i, j)];
            }
            a[(row, d)] = -len;
            a[(row, d + 1 + row)] = -1.0;
            b[row] = -self.kr[j];
        }
        let mut c = vec![0.0; nv];
        c[d] = -1.0;
        let mut lower = vec![0.0; nv];
        let mut upper = vec![f64::INFINITY; nv];
        for l in lower.iter_mut().take(d + 1) {
            *l = f64::NEG_INFINITY;
        }
        upper[d] = tol.delta_cap;
        let lp = LinearProgram {
            objective: c,
            equality_matrix: a,
            equality_rhs: b,
            lower,
            upper,
        };
        match solve_lp(&lp)? {
            LpOutcome::Optimal(s) => {
                let delta = s.primal[d];
                let q = s.primal[..d].to_vec();
                let finite = delta >= -tol.strict_tol;
                Ok((finite, delta > tol.strict_tol, Some(q), Some(delta)))
            }
            LpOutcome::Infeasible => Ok((false, false, None, None)),
            LpOutcome::Unbounded { .. } => Err(Error::NumericalBreakdown(
                "capped strict-subsolution LP reported unbounded".into(),
            )),
        }
    }

    fn no_arbitrage_lp(&self) -> Result<(bool, Option<Vec<f64>>)> {
        let d = self.state_dim();
        let j = self.cone.num_generators();
        let tol = &self.tol;
        let mut a = DMatrix::zeros(d + 1, j);
        a.view_mut((0, 0), (d, j)).copy_from(&self.gr);
        for k in 0..j {
            a[(d, k)] = 1.0;
        }
        let mut b = vec![0.0; d + 1];
        b[d] = 1.0;
        let lp = LinearProgram::nonnegative(self.kr.clone(), a, b);
        match solve_lp(&lp)? {
            LpOutcome::Infeasible => Ok((true, None)),
            LpOutcome::Optimal(s) if s.value > tol.arb_tol => Ok((true, None)),
            LpOutcome::Optimal(s) => {
                let u = self.cone.combine(&s.primal);
                let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm > tol.ray_tol {
                    Ok((false, Some(u)))
                } else {
                    // The generators cancel: the cone has a lineality space.
                    self.no_arbitrage_by_coordinates()
                }
            }
            LpOutcome::Unbounded { .. } => Err(Error::NumericalBreakdown(
                "normalized no-arbitrage LP reported unbounded".into(),
            )),
        }
    }

    /// Exact test robust to lineality: a nonzero `u` has some coordinate
    /// that can be scaled to `±1`.
    fn no_arbitrage_by_coordinates(&self) -> Result<(bool, Option<Vec<f64>>)> {
        let d = self.state_dim();
        let p = self.control_dim();
        let j = self.cone.num_generators();
        for i in 0..p {
            for sign in [1.0, -1.0] {
                let mut a = DMatrix::zeros(d + 1, j);
                a.view_mut((0, 0), (d, j)).copy_from(&self.gr);
                for k in 0..j {
                    a[(d, k)] = sign * self.cone.generators()[(i, k)];
                }
                let mut b = vec![0.0; d + 1];
                b[d] = 1.0;
                match solve_lp(&LinearProgram::nonnegative(self.kr.clone(), a, b))? {
                    LpOutcome::Infeasible => {}
                    LpOutcome::Optimal(s) if s.value > self.tol.arb_tol => {}
                    LpOutcome::Optimal(s) => return Ok((false, Some(self.cone.combine(&s.primal)))),
                    LpOutcome::Unbounded { ray } => {
                        return Ok((false, Some(self.cone.combine(&ray))))
                    }
                }
            }
        }
        Ok((true, None))
    }

    /// Is `{λ >= 0 : κ·Rλ <= -1, ||GRλ||_∞ <= ε}` empty?
    pub fn weak_arbitrage_set_empty(&self, eps: f64) -> Result<bool> {
        let d = self.state_dim();
        let j = self.cone.num_generators();
        // variables: λ (J), slack s >= 0, z ∈ [0, 2ε]^d with GRλ - z = -ε
        let nv = j + 1 + d;
        let mut a = DMatrix::zeros(d + 1, nv);
        a.view_mut((0, 0), (d, j)).copy_from(&self.gr);
        for i in 0..d {
            a[(i, j + 1 + i)] = -1.0;
        }
        for k in 0..j {
            a[(d, k)] = self.kr[k];
        }
        a[(d, j)] = 1.0;
        let mut b = vec![-eps; d + 1];
        b[d] = -1.0;
        let mut upper = vec![f64::INFINITY; nv];
        for u in upper.iter_mut().skip(j + 1) {
            *u = 2.0 * eps;
        }
        let lp = LinearProgram {
            objective: vec![0.0; nv],
            equality_matrix: a,
            equality_rhs: b,
            lower: vec![0.0; nv],
            upper,
        };
        Ok(solve_lp(&lp)?.is_infeasible())
    }

    /// maximize δ s.t. `u1·r_j >= δ` for all j, `u1 ∈ [-1, 1]^p`.
    fn u1_lp(&self) -> Result<(bool, Option<Vec<f64>>)> {
        let p = self.control_dim();
        let j = self.cone.num_generators();
        // variables: v = u1 + 1 ∈ [0, 2]^p, δ free, slacks s_j >= 0
        let nv = p + 1 + j;
        let mut a = DMatrix::zeros(j, nv);
        let mut b = vec![0.0; j];
        for k in 0..j {
            let r = self.cone.generators().column(k);
            for i in 0..p {
                a[(k, i)] = r[i];
            }
            a[(k, p)] = -1.0;
            a[(k, p + 1 + k)] = -1.0;
            b[k] = r.sum();
        }
        let mut c = vec![0.0; nv];
        c[p] = -1.0;
        let mut lower = vec![0.0; nv];
        lower[p] = f64::NEG_INFINITY;
        let mut upper = vec![f64::INFINITY; nv];
        for u in upper.iter_mut().take(p) {
            *u = 2.0;
        }
        let lp = LinearProgram {
            objective: c,
            equality_matrix: a,
            equality_rhs: b,
            lower,
            upper,
        };
        match solve_lp(&lp)? {
            LpOutcome::Optimal(s) => {
                let delta = s.primal[p];
                let u1: Vec<f64> = s.primal[..p].iter().map(|v| v - 1.0).collect();
                let n = u1.iter().map(|v| v * v).sum::<f64>().sqrt();
                let holds = delta > self.tol.strict_tol;
                let witness = (holds && n > 0.0).then(|| u1.iter().map(|v| v / n).collect());
                Ok((holds, witness))
            }
            _ => Err(Error::NumericalBreakdown("u1 LP is bounded and feasible".into())),
        }
    }
}

/// Precomputed `(e, c(e))` pairs for repeated Hamiltonian evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianTable {
    pub directions: Vec<Vec<f64>>,
    pub costs: Vec<f64>,
}

impl HamiltonianTable {
    pub fn new(sys: &ControlSystem, n_dirs: usize) -> Result<Self> {
        let directions = sys.directions(n_dirs)?;
        let costs = sys.direction_costs(&directions)?;
        Ok(Self { directions, costs })
    }

    pub fn eval(&self, q: &[f64]) -> Result<f64> {
        let d = self.directions.first().map_or(0, |e| e.len());
        if q.len() != d {
            return Err(Error::DimensionMismatch("Hamiltonian argument".into()));
        }
        Ok(self
            .directions
            .iter()
            .zip(&self.costs)
            .map(|(e, c)| -e.iter().zip(q).map(|(a, b)| a * b).sum::<f64>() - c)
            .fold(f64::NEG_INFINITY, f64::max))
    }
}

pub fn unit_directions(d: usize, n_dirs: usize) -> Result<Vec<Vec<f64>>> {
    match d {
        1 => Ok(vec![vec![1.0], vec![-1.0]]),
        2 => {
            if n_dirs < 2 {
                return Err(Error::Invalid("n_dirs must be at least 2".into()));
            }
            Ok((0..n_dirs)
                .map(|k| {
                    let t = 2.0 * PI * k as f64 / n_dirs as f64;
                    vec![t.cos(), t.sin()]
                })
                .collect())
        }
        3 => {
            if n_dirs < 2 {
                return Err(Error::Invalid("n_dirs must be at least 2".into()));
            }
            let golden = PI * (3.0 - 5.0_f64.sqrt());
            Ok((0..n_dirs)
                .map(|k| {
                    let z = 1.0 - 2.0 * (k as f64 + 0.5) / n_dirs as f64;
                    let r = (1.0 - z * z).sqrt();
                    let t = golden * k as f64;
                    vec![r * t.cos(), r * t.sin(), z]
                })
                .collect())
        }
        _ => Err(Error::DimensionUnsupported(d)),
    }
}

/// Generators of `range(K) ∩ R_+^p` by extreme-ray enumeration.
///
/// An extreme ray is determined by its zero set `Z`: the subspace
/// `{u ∈ range(K) : u_i = 0, i ∈ Z}` must be one-dimensional and contain a
/// nonnegative vector that is positive off `Z`.
pub fn cone_from_subspace_intersection(k: &DMatrix<f64>) -> Result<ControlCone> {
    let p = k.nrows();
    if p > 14 {
        return Err(Error::DimensionTooLarge(p));
    }
    if p == 0 {
        return Err(Error::EmptyCone);
    }
    let rank_tol = 1e-10;
    // range(K) = ker(N') with N spanning ker(K')
    let n = nullspace_basis(&k.transpose(), rank_tol)?;
    let codim = n.ncols();
    let nt = n.transpose();
    let rank_k = numerical_rank(k, rank_tol)?;
    if rank_k == 0 {
        return Err(Error::EmptyCone);
    }

    let mut rays: Vec<DVector<f64>> = Vec::new();
    let min_zeros = (p - 1).saturating_sub(codim);
    for mask in 0u32..(1u32 << p) {
        let zeros = mask.count_ones() as usize;
        if zeros < min_zeros || zeros >= p {
            continue;
        }
        let mut sys = DMatrix::zeros(codim + zeros, p);
        sys.view_mut((0, 0), (codim, p)).copy_from(&nt);
        let mut row = codim;
        for i in 0..p {
            if mask & (1 << i) != 0 {
                sys[(row, i)] = 1.0;
                row += 1;
            }
        }
        let basis = nullspace_basis(&sys, rank_tol)?;
        if basis.ncols() != 1 {
            continue;
        }
        let mut v = basis.column(0).into_owned();
        if v.sum() < 0.0 {
            v = -v;
        }
        let positive_off_zero_set = (0..p).all(|i| {
            if mask & (1 << i) != 0 {
                v[i].abs() <= 1e-9
            } else {
                v[i] > 1e-9
            }
        });
        if !positive_off_zero_set {
            continue;
        }
        for i in 0..p {
            if mask & (1 << i) != 0 {
                v[i] = 0.0;
            }
        }
        let norm = v.norm();
        v /= norm;
        if !rays.iter().any(|r| (r - &v).amax() < 1e-8) {
            rays.push(v);
        }
    }
    if rays.is_empty() {
        return Err(Error::EmptyCone);
    }
    ControlCone::new(DMatrix::from_columns(&rays))
}
