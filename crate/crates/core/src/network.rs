//! Reduction of a generalized Brownian network to workload form.
//!
//! Given network data `(R, K, v, θ, Σ, Z, h)` this computes the workload
//! basis `M`, the matrix `G` with `M R = G K`, a split `v' = π'R + κ'K`, the
//! workload space `W = M Z`, reduced drift and covariance, and the effective
//! cost `g(w) = inf { h(z) + α π·z : M z = w, z ∈ Z }`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::cone::{cone_from_subspace_intersection, ControlSystem};
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::lp::{max_abs, min_norm_solve, nullspace_basis, solve_lp, LinearProgram, LpOutcome};

/// `h(z) = max_i (a_i·z + b_i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinear {
    pub pieces: Vec<AffinePiece>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffinePiece {
    pub slope: Vec<f64>,
    pub intercept: f64,
}

impl PiecewiseLinear {
    pub fn zero(m: usize) -> Self {
        Self {
            pieces: vec![AffinePiece {
                slope: vec![0.0; m],
                intercept: 0.0,
            }],
        }
    }

    pub fn eval(&self, z: &[f64]) -> f64 {
        self.pieces
            .iter()
            .map(|p| p.slope.iter().zip(z).map(|(a, x)| a * x).sum::<f64>() + p.intercept)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BrownianNetwork {
    pub theta: Vec<f64>,
    pub sigma: DMatrix<f64>,
    /// m x n
    pub r: DMatrix<f64>,
    /// p x n
    pub k: DMatrix<f64>,
    pub z_lo: Vec<f64>,
    pub z_hi: Vec<f64>,
    pub h: PiecewiseLinear,
    pub v: Vec<f64>,
    pub alpha: f64,
}

impl BrownianNetwork {
    pub fn m(&self) -> usize {
        self.r.nrows()
    }

    pub fn n(&self) -> usize {
        self.r.ncols()
    }

    pub fn p(&self) -> usize {
        self.k.nrows()
    }

    pub fn validate(&self) -> Result<()> {
        let (m, n, p) = (self.m(), self.n(), self.p());
        let dim = |ok: bool, what: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::DimensionMismatch(what.to_string()))
            }
        };
        dim(m > 0 && n > 0 && p > 0, "m, n, p must be positive")?;
        dim(self.k.ncols() == n, "K must be p x n")?;
        dim(self.theta.len() == m, "theta must have length m")?;
        dim(self.sigma.shape() == (m, m), "Sigma must be m x m")?;
        dim(self.z_lo.len() == m && self.z_hi.len() == m, "Z box bounds must have length m")?;
        dim(self.v.len() == n, "v must have length n")?;
        if self.h.pieces.is_empty() {
            return Err(Error::Invalid("h needs at least one affine piece".into()));
        }
        for piece in &self.h.pieces {
            dim(piece.slope.len() == m, "h slopes must have length m")?;
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::Invalid("alpha must be positive".into()));
        }
        if self.z_lo.iter().zip(&self.z_hi).any(|(l, h)| !(l < h)) {
            return Err(Error::Invalid("Z box must satisfy lo < hi componentwise".into()));
        }
        let asym = max_abs(&(&self.sigma - self.sigma.transpose()));
        if asym > 1e-12 * (1.0 + max_abs(&self.sigma)) {
            return Err(Error::Invalid("Sigma must be symmetric".into()));
        }
        let min_eig = self.sigma.clone().symmetric_eigen().eigenvalues.min();
        if min_eig <= 0.0 {
            return Err(Error::Invalid(format!(
                "Sigma must be positive definite (min eigenvalue {min_eig:.3e})"
            )));
        }
        Ok(())
    }

    /// `{R y : K y >= 0} = R^m`, checked via feasibility of `R y = ±e_i`.
    pub fn is_controllable_network(&self) -> Result<bool> {
        let (m, n, p) = (self.m(), self.n(), self.p());
        // y free (n), s >= 0 (p):  R y = ±e_i,  K y - s = 0
        let mut a = DMatrix::zeros(m + p, n + p);
        a.view_mut((0, 0), (m, n)).copy_from(&self.r);
        a.view_mut((m, 0), (p, n)).copy_from(&self.k);
        for i in 0..p {
            a[(m + i, n + i)] = -1.0;
        }
        let mut lower = vec![f64::NEG_INFINITY; n];
        lower.extend(vec![0.0; p]);
        for i in 0..m {
            for sign in [1.0, -1.0] {
                let mut b = vec![0.0; m + p];
                b[i] = sign;
                let lp = LinearProgram {
                    objective: vec![0.0; n + p],
                    equality_matrix: a.clone(),
                    equality_rhs: b,
                    lower: lower.clone(),
                    upper: vec![f64::INFINITY; n + p],
                };
                if solve_lp(&lp)?.is_infeasible() {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// `{y : K y >= 0, R y = 0, v·y <= 0} = {0}`.
    ///
    /// A nonzero `y` has a coordinate that scales to `±1`, so this runs `2n`
    /// LPs minimizing `v·y` with that coordinate pinned.
    pub fn has_no_free_activity(&self) -> Result<bool> {
        let (m, n, p) = (self.m(), self.n(), self.p());
        for i in 0..n {
            for sign in [1.0, -1.0] {
                let mut a = DMatrix::zeros(m + p + 1, n + p);
                a.view_mut((0, 0), (m, n)).copy_from(&self.r);
                a.view_mut((m, 0), (p, n)).copy_from(&self.k);
                for k in 0..p {
                    a[(m + k, n + k)] = -1.0;
                }
                a[(m + p, i)] = sign;
                let mut b = vec![0.0; m + p + 1];
                b[m + p] = 1.0;
                let mut c = self.v.clone();
                c.extend(vec![0.0; p]);
                let mut lower = vec![f64::NEG_INFINITY; n];
                lower.extend(vec![0.0; p]);
                let lp = LinearProgram {
                    objective: c,
                    equality_matrix: a,
                    equality_rhs: b,
                    lower,
                    upper: vec![f64::INFINITY; n + p],
                };
                match solve_lp(&lp)? {
                    LpOutcome::Infeasible => {}
                    LpOutcome::Optimal(s) if s.value > 1e-9 => {}
                    _ => return Ok(false),
                }
            }
        }
        Ok(true)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkloadModel {
    /// d x m, orthonormal rows
    pub m: DMatrix<f64>,
    /// d x p
    pub g: DMatrix<f64>,
    pub pi: Vec<f64>,
    pub kappa: Vec<f64>,
    pub w_space: Domain,
    pub theta_reduced: Vec<f64>,
    pub gamma_reduced: DMatrix<f64>,
    pub sigma_reduced: DMatrix<f64>,
}

impl WorkloadModel {
    pub fn d(&self) -> usize {
        self.m.nrows()
    }

    /// `||M R - G K||_∞` relative to `1 + ||M R||_∞`.
    pub fn basis_residual(&self, net: &BrownianNetwork) -> f64 {
        let mr = &self.m * &net.r;
        max_abs(&(&mr - &self.g * &net.k)) / (1.0 + max_abs(&mr))
    }

    /// `||v - R'π - K'κ||_∞` relative to `1 + ||v||_∞`.
    pub fn split_residual(&self, net: &BrownianNetwork) -> f64 {
        let v = DVector::from_column_slice(&net.v);
        let fitted = net.r.transpose() * DVector::from_column_slice(&self.pi)
            + net.k.transpose() * DVector::from_column_slice(&self.kappa);
        (v.clone() - fitted).amax() / (1.0 + v.amax())
    }
}

/// Orthonormal rows spanning `{a : R'a ∈ range(K')}`.
pub fn compute_workload_basis(net: &BrownianNetwork) -> Result<DMatrix<f64>> {
    let rank_tol = 1e-10;
    let zk = nullspace_basis(&net.k, rank_tol)?;
    let m = net.m();
    let basis = if zk.ncols() == 0 {
        DMatrix::identity(m, m)
    } else {
        nullspace_basis(&(&net.r * zk).transpose(), rank_tol)?
    };
    if basis.ncols() == 0 {
        return Err(Error::DegenerateWorkload);
    }
    Ok(basis.transpose())
}

pub fn reduce(net: &BrownianNetwork) -> Result<WorkloadModel> {
    net.validate()?;
    let m_mat = compute_workload_basis(net)?;
    let d = m_mat.nrows();
    if d > 2 {
        return Err(Error::DimensionUnsupported(d));
    }

    // G K = M R, row by row: K' g_i = R' m_i
    let kt = net.k.transpose();
    let rtm = net.r.transpose() * m_mat.transpose();
    let mut g = DMatrix::zeros(d, net.p());
    for i in 0..d {
        let row = min_norm_solve(&kt, rtm.column(i).as_slice())?;
        for (j, v) in row.into_iter().enumerate() {
            g[(i, j)] = v;
        }
    }

    // [R' K'] (π; κ) = v
    let (m, n, p) = (net.m(), net.n(), net.p());
    let mut stacked = DMatrix::zeros(n, m + p);
    stacked.view_mut((0, 0), (n, m)).copy_from(&net.r.transpose());
    stacked.view_mut((0, m), (n, p)).copy_from(&kt);
    let split = min_norm_solve(&stacked, &net.v)?;
    let pi = split[..m].to_vec();
    let kappa = split[m..].to_vec();

    let w_space = image_of_box(&m_mat, &net.z_lo, &net.z_hi)?;
    let theta_reduced = (&m_mat * DVector::from_column_slice(&net.theta))
        .iter()
        .copied()
        .collect();
    let gamma_reduced = &m_mat * &net.sigma * m_mat.transpose();
    let sigma_reduced = psd_sqrt(&gamma_reduced);

    let model = WorkloadModel {
        m: m_mat,
        g,
        pi,
        kappa,
        w_space,
        theta_reduced,
        gamma_reduced,
        sigma_reduced,
    };
    let tolerance = 1e-10;
    for residual in [model.basis_residual(net), model.split_residual(net)] {
        if residual > tolerance {
            return Err(Error::Inconsistent { residual, tolerance });
        }
    }
    Ok(model)
}

/// The reduced singular control system `(U = range(K) ∩ R_+^p, G, κ, α)`.
pub fn reduced_system(model: &WorkloadModel, net: &BrownianNetwork) -> Result<ControlSystem> {
    let cone = cone_from_subspace_intersection(&net.k)?;
    ControlSystem::new(cone, model.g.clone(), model.kappa.clone(), net.alpha)
}

fn image_of_box(m: &DMatrix<f64>, lo: &[f64], hi: &[f64]) -> Result<Domain> {
    let d = m.nrows();
    let cols = m.ncols();
    if d == 1 {
        let (mut a, mut b) = (0.0, 0.0);
        for j in 0..cols {
            let (x, y) = (m[(0, j)] * lo[j], m[(0, j)] * hi[j]);
            a += x.min(y);
            b += x.max(y);
        }
        return Domain::interval(a, b);
    }
    let pts: Vec<[f64; 2]> = (0u32..(1u32 << cols))
        .map(|mask| {
            let z: Vec<f64> = (0..cols)
                .map(|j| if mask & (1 << j) != 0 { hi[j] } else { lo[j] })
                .collect();
            let w = m * DVector::from_vec(z);
            [w[0], w[1]]
        })
        .collect();
    Domain::polygon_hull(&pts)
}

/// Symmetric positive semidefinite square root.
pub fn psd_sqrt(a: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = a.clone().symmetric_eigen();
    let vals = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
    &eig.eigenvectors * DMatrix::from_diagonal(&vals) * eig.eigenvectors.transpose()
}

/// `g(w)` and a minimizing network state `z*`.
pub fn effective_cost(model: &WorkloadModel, net: &BrownianNetwork, w: &[f64]) -> Result<(f64, Vec<f64>)> {
    let d = model.d();
    if w.len() != d {
        return Err(Error::DimensionMismatch("workload vector".into()));
    }
    if !model.w_space.contains(w, 1e-9) {
        return Err(Error::OutsideWorkloadSpace(w.to_vec()));
    }
    let m = net.m();
    let pieces = &net.h.pieces;
    let np = pieces.len();
    // variables: y = z - lo ∈ [0, hi - lo] (m), t free, s >= 0 (np)
    let nv = m + 1 + np;
    let mut a = DMatrix::zeros(d + np, nv);
    let mut b = vec![0.0; d + np];
    let lo = DVector::from_column_slice(&net.z_lo);
    let m_lo = &model.m * &lo;
    for i in 0..d {
        for j in 0..m {
            a[(i, j)] = model.m[(i, j)];
        }
        b[i] = w[i] - m_lo[i];
    }
    for (k, piece) in pieces.iter().enumerate() {
        let row = d + k;
        for j in 0..m {
            a[(row, j)] = -piece.slope[j];
        }
        a[(row, m)] = 1.0;
        a[(row, m + 1 + k)] = -1.0;
        b[row] = piece.intercept + piece.slope.iter().zip(&net.z_lo).map(|(s, l)| s * l).sum::<f64>();
    }
    let mut c = vec![0.0; nv];
    for j in 0..m {
        c[j] = net.alpha * model.pi[j];
    }
    c[m] = 1.0;
    let mut lower = vec![0.0; nv];
    lower[m] = f64::NEG_INFINITY;
    let mut upper = vec![f64::INFINITY; nv];
    for j in 0..m {
        upper[j] = net.z_hi[j] - net.z_lo[j];
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
            let z: Vec<f64> = (0..m)
                .map(|j| (net.z_lo[j] + s.primal[j]).clamp(net.z_lo[j], net.z_hi[j]))
                .collect();
            let value = net.h.eval(&z) + net.alpha * model.pi.iter().zip(&z).map(|(p, x)| p * x).sum::<f64>();
            Ok((value, z))
        }
        LpOutcome::Infeasible => Err(Error::OutsideWorkloadSpace(w.to_vec())),
        LpOutcome::Unbounded { .. } => Err(Error::NumericalBreakdown(
            "effective cost LP over a box cannot be unbounded".into(),
        )),
    }
}
