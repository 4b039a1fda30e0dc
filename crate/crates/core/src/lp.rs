//! Small dense linear programming and rank-revealing linear algebra.
//!
//! The simplex here is a textbook two-phase tableau method. Entering columns
//! are chosen by Dantzig's rule until a run of degenerate pivots is detected,
//! after which Bland's rule takes over for the rest of the phase. Problems in
//! this crate have at most a few dozen variables, so everything is dense.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Tolerances used by [`solve_lp`] and the linear algebra helpers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpTolerances {
    pub feas_tol: f64,
    pub gap_tol: f64,
    pub pivot_tol: f64,
    pub rank_tol: f64,
}

impl Default for LpTolerances {
    fn default() -> Self {
        Self {
            feas_tol: 1e-9,
            gap_tol: 1e-8,
            pivot_tol: 1e-11,
            rank_tol: 1e-10,
        }
    }
}

/// `minimize c·x  s.t.  A x = b,  lower <= x <= upper`.
///
/// Lower bounds must be `0.0` or `-inf`; upper bounds are `+inf` or finite.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub equality_matrix: DMatrix<f64>,
    pub equality_rhs: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl LinearProgram {
    /// All variables nonnegative, no upper bounds.
    pub fn nonnegative(objective: Vec<f64>, a: DMatrix<f64>, b: Vec<f64>) -> Self {
        let n = objective.len();
        Self {
            objective,
            equality_matrix: a,
            equality_rhs: b,
            lower: vec![0.0; n],
            upper: vec![f64::INFINITY; n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.equality_rhs.len()
    }

    fn validate(&self) -> Result<()> {
        let n = self.objective.len();
        let m = self.equality_rhs.len();
        if self.equality_matrix.nrows() != m || self.equality_matrix.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "equality matrix is {}x{}, expected {}x{}",
                self.equality_matrix.nrows(),
                self.equality_matrix.ncols(),
                m,
                n
            )));
        }
        if self.lower.len() != n || self.upper.len() != n {
            return Err(Error::DimensionMismatch("bound vectors".into()));
        }
        let finite = self.objective.iter().all(|v| v.is_finite())
            && self.equality_rhs.iter().all(|v| v.is_finite())
            && self.equality_matrix.iter().all(|v| v.is_finite());
        if !finite {
            return Err(Error::NonFinite("linear program data".into()));
        }
        for j in 0..n {
            let (lo, up) = (self.lower[j], self.upper[j]);
            if !(lo == 0.0 || lo == f64::NEG_INFINITY) {
                return Err(Error::Invalid(format!("lower bound {lo} must be 0 or -inf")));
            }
            if up.is_nan() || up == f64::NEG_INFINITY || lo > up {
                return Err(Error::Invalid(format!("bounds [{lo}, {up}] for variable {j}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub value: f64,
    pub primal: Vec<f64>,
    /// Multipliers of the equality rows.
    pub dual: Vec<f64>,
    /// `c - A' y` for the original variables.
    pub reduced_costs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal(LpSolution),
    Infeasible,
    /// Feasible with a direction of unbounded descent in the original variables.
    Unbounded { ray: Vec<f64> },
}

impl LpOutcome {
    pub fn optimal(&self) -> Option<&LpSolution> {
        match self {
            LpOutcome::Optimal(s) => Some(s),
            _ => None,
        }
    }

    pub fn is_infeasible(&self) -> bool {
        matches!(self, LpOutcome::Infeasible)
    }

    pub fn is_unbounded(&self) -> bool {
        matches!(self, LpOutcome::Unbounded { .. })
    }
}

/// How an original variable maps onto the nonnegative standard-form columns.
#[derive(Debug, Clone, Copy)]
enum VarMap {
    Plain(usize),
    Split(usize, usize),
    /// `x = ub - y`, `y >= 0`
    Reflected(usize, f64),
}

struct StandardForm {
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    c: Vec<f64>,
    map: Vec<VarMap>,
    orig_rows: usize,
}

fn standardize(lp: &LinearProgram) -> StandardForm {
    let m = lp.num_rows();
    let n = lp.num_vars();
    let mut cols: Vec<Vec<f64>> = Vec::new();
    let mut c = Vec::new();
    let mut b = lp.equality_rhs.clone();
    let mut map = Vec::with_capacity(n);
    let mut upper_rows: Vec<(usize, f64)> = Vec::new();

    for j in 0..n {
        let col: Vec<f64> = (0..m).map(|i| lp.equality_matrix[(i, j)]).collect();
        let cj = lp.objective[j];
        let (lo, up) = (lp.lower[j], lp.upper[j]);
        if lo == 0.0 {
            map.push(VarMap::Plain(cols.len()));
            if up.is_finite() {
                upper_rows.push((cols.len(), up));
            }
            cols.push(col);
            c.push(cj);
        } else if up.is_finite() {
            for (bi, aij) in b.iter_mut().zip(&col) {
                *bi -= aij * up;
            }
            map.push(VarMap::Reflected(cols.len(), up));
            cols.push(col.iter().map(|v| -v).collect());
            c.push(-cj);
        } else {
            map.push(VarMap::Split(cols.len(), cols.len() + 1));
            cols.push(col.clone());
            c.push(cj);
            cols.push(col.iter().map(|v| -v).collect());
            c.push(-cj);
        }
    }

    let n_struct = cols.len();
    let n_std = n_struct + upper_rows.len();
    let rows = m + upper_rows.len();
    let mut a = vec![vec![0.0; n_std]; rows];
    for (j, col) in cols.iter().enumerate() {
        for i in 0..m {
            a[i][j] = col[i];
        }
    }
    for (k, &(j, up)) in upper_rows.iter().enumerate() {
        a[m + k][j] = 1.0;
        a[m + k][n_struct + k] = 1.0;
        b.push(up);
    }
    c.extend(std::iter::repeat_n(0.0, upper_rows.len()));

    StandardForm {
        a,
        b,
        c,
        map,
        orig_rows: m,
    }
}

enum PhaseResult {
    Optimal,
    Unbounded(usize),
}

struct Tableau {
    /// rows x (cols + 1); last column is the rhs
    t: Vec<Vec<f64>>,
    /// reduced-cost row; last entry is -objective
    obj: Vec<f64>,
    basis: Vec<usize>,
    ncols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, e: usize) {
        let w = self.ncols + 1;
        let p = self.t[r][e];
        for k in 0..w {
            self.t[r][k] /= p;
        }
        let prow = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[e];
            if f != 0.0 {
                for k in 0..w {
                    row[k] -= f * prow[k];
                }
                row[e] = 0.0;
            }
        }
        let f = self.obj[e];
        if f != 0.0 {
            for k in 0..w {
                self.obj[k] -= f * prow[k];
            }
            self.obj[e] = 0.0;
        }
        self.basis[r] = e;
    }

    fn set_costs(&mut self, costs: &[f64]) {
        let w = self.ncols + 1;
        let mut obj = vec![0.0; w];
        obj[..self.ncols].copy_from_slice(costs);
        for (i, &bi) in self.basis.iter().enumerate() {
            let cb = costs[bi];
            if cb != 0.0 {
                for k in 0..w {
                    obj[k] -= cb * self.t[i][k];
                }
            }
        }
        self.obj = obj;
    }

    fn run(&mut self, eligible: &[bool], tol: &LpTolerances) -> Result<PhaseResult> {
        let rows = self.t.len();
        let rhs = self.ncols;
        let max_iter = 50 * (rows + self.ncols) + 1000;
        let mut bland = false;
        let mut degenerate_run = 0usize;
        let dj_tol = tol.feas_tol * 1e-1;

        for _ in 0..max_iter {
            let entering = if bland {
                (0..self.ncols).find(|&j| eligible[j] && self.obj[j] < -dj_tol)
            } else {
                (0..self.ncols)
                    .filter(|&j| eligible[j] && self.obj[j] < -dj_tol)
                    .min_by(|&a, &b| self.obj[a].total_cmp(&self.obj[b]))
            };
            let Some(e) = entering else {
                return Ok(PhaseResult::Optimal);
            };

            let mut leave: Option<(usize, f64)> = None;
            for i in 0..rows {
                let aie = self.t[i][e];
                if aie > tol.pivot_tol {
                    let ratio = self.t[i][rhs].max(0.0) / aie;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((li, lr)) => {
                            let tie = (ratio - lr).abs() <= 1e-12 * (1.0 + lr.abs());
                            let better = if tie {
                                if bland {
                                    self.basis[i] < self.basis[li]
                                } else {
                                    aie > self.t[li][e]
                                }
                            } else {
                                ratio < lr
                            };
                            if better {
                                Some((i, ratio))
                            } else {
                                Some((li, lr))
                            }
                        }
                    };
                }
            }
            let Some((r, ratio)) = leave else {
                return Ok(PhaseResult::Unbounded(e));
            };
            if ratio <= 1e-13 {
                degenerate_run += 1;
                if degenerate_run > 2 * rows + 10 {
                    bland = true;
                }
            } else {
                degenerate_run = 0;
            }
            self.pivot(r, e);
        }
        Err(Error::NumericalBreakdown(format!(
            "no convergence within {max_iter} pivots"
        )))
    }
}

/// Solves a small dense LP.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpOutcome> {
    solve_lp_with(lp, &LpTolerances::default())
}

pub fn solve_lp_with(lp: &LinearProgram, tol: &LpTolerances) -> Result<LpOutcome> {
    lp.validate()?;
    let sf = standardize(lp);
    let rows = sf.b.len();
    let n_std = sf.c.len();
    let ncols = n_std + rows;

    // Phase 1 with one artificial per row, rows flipped to b >= 0.
    let mut signs = vec![1.0; rows];
    let mut t = Vec::with_capacity(rows);
    for i in 0..rows {
        let s = if sf.b[i] < 0.0 { -1.0 } else { 1.0 };
        signs[i] = s;
        let mut row = vec![0.0; ncols + 1];
        for j in 0..n_std {
            row[j] = s * sf.a[i][j];
        }
        row[n_std + i] = 1.0;
        row[ncols] = s * sf.b[i];
        t.push(row);
    }
    let mut tab = Tableau {
        t,
        obj: Vec::new(),
        basis: (n_std..ncols).collect(),
        ncols,
    };

    let b_scale = 1.0 + sf.b.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let a_scale = 1.0
        + sf
            .a
            .iter()
            .flat_map(|r| r.iter())
            .fold(0.0_f64, |m, v| m.max(v.abs()));

    let mut phase1_costs = vec![0.0; ncols];
    for c in phase1_costs.iter_mut().skip(n_std) {
        *c = 1.0;
    }
    tab.set_costs(&phase1_costs);
    let all = vec![true; ncols];
    tab.run(&all, tol)?;
    let infeas = -tab.obj[ncols];
    if infeas > tol.feas_tol * b_scale {
        return Ok(LpOutcome::Infeasible);
    }

    // Drive artificials out of the basis where possible.
    for i in 0..rows {
        if tab.basis[i] >= n_std {
            let best = (0..n_std)
                .map(|j| (j, tab.t[i][j].abs()))
                .filter(|&(_, v)| v > tol.pivot_tol * a_scale)
                .max_by(|a, b| a.1.total_cmp(&b.1));
            if let Some((j, _)) = best {
                tab.pivot(i, j);
            }
        }
    }

    // Phase 2.
    let mut costs = vec![0.0; ncols];
    costs[..n_std].copy_from_slice(&sf.c);
    tab.set_costs(&costs);
    let mut eligible = vec![true; ncols];
    for e in eligible.iter_mut().skip(n_std) {
        *e = false;
    }
    match tab.run(&eligible, tol)? {
        PhaseResult::Unbounded(e) => {
            let mut d = vec![0.0; n_std];
            d[e] = 1.0;
            for i in 0..rows {
                let bi = tab.basis[i];
                if bi < n_std {
                    d[bi] -= tab.t[i][e];
                }
            }
            let ray = map_back_direction(&sf.map, &d);
            let resid = (0..rows)
                .map(|i| (0..n_std).map(|j| sf.a[i][j] * d[j]).sum::<f64>().abs())
                .fold(0.0_f64, f64::max);
            let dnorm = d.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            if resid > 1e-7 * a_scale * (1.0 + dnorm) {
                return Err(Error::NumericalBreakdown(format!(
                    "unbounded ray residual {resid:.3e}"
                )));
            }
            Ok(LpOutcome::Unbounded { ray })
        }
        PhaseResult::Optimal => {
            let mut x = vec![0.0; n_std];
            for i in 0..rows {
                let bi = tab.basis[i];
                if bi < n_std {
                    x[bi] = tab.t[i][ncols].max(0.0);
                }
            }
            let primal = map_back_point(&sf.map, &x);
            let y: Vec<f64> = (0..sf.orig_rows)
                .map(|k| -signs[k] * tab.obj[n_std + k])
                .collect();
            let value = lp
                .objective
                .iter()
                .zip(&primal)
                .map(|(c, x)| c * x)
                .sum::<f64>();
            let reduced_costs = (0..lp.num_vars())
                .map(|j| {
                    lp.objective[j]
                        - (0..sf.orig_rows)
                            .map(|i| lp.equality_matrix[(i, j)] * y[i])
                            .sum::<f64>()
                })
                .collect();
            let resid = (0..lp.num_rows())
                .map(|i| {
                    ((0..lp.num_vars())
                        .map(|j| lp.equality_matrix[(i, j)] * primal[j])
                        .sum::<f64>()
                        - lp.equality_rhs[i])
                        .abs()
                })
                .fold(0.0_f64, f64::max);
            let x_scale = 1.0 + primal.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            if resid > 1e3 * tol.feas_tol * b_scale.max(a_scale * x_scale) {
                return Err(Error::NumericalBreakdown(format!(
                    "primal residual {resid:.3e} after phase 2"
                )));
            }
            Ok(LpOutcome::Optimal(LpSolution {
                value,
                primal,
                dual: y,
                reduced_costs,
            }))
        }
    }
}

fn map_back_point(map: &[VarMap], x: &[f64]) -> Vec<f64> {
    map.iter()
        .map(|m| match *m {
            VarMap::Plain(j) => x[j],
            VarMap::Split(p, q) => x[p] - x[q],
            VarMap::Reflected(j, ub) => ub - x[j],
        })
        .collect()
}

fn map_back_direction(map: &[VarMap], d: &[f64]) -> Vec<f64> {
    map.iter()
        .map(|m| match *m {
            VarMap::Plain(j) => d[j],
            VarMap::Split(p, q) => d[p] - d[q],
            VarMap::Reflected(j, _) => -d[j],
        })
        .collect()
}

/// Largest absolute entry.
pub fn max_abs(a: &DMatrix<f64>) -> f64 {
    a.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// Full SVD `A = U diag(s) V'` (faer backend; `U` is m x m, `V` is n x n).
struct Svd {
    u: DMatrix<f64>,
    s: Vec<f64>,
    v: DMatrix<f64>,
}

fn full_svd(a: &DMatrix<f64>) -> Result<Svd> {
    let (m, n) = a.shape();
    let fa = faer::Mat::<f64>::from_fn(m, n, |i, j| a[(i, j)]);
    let svd = fa
        .svd()
        .map_err(|e| Error::NumericalBreakdown(format!("SVD did not converge: {e:?}")))?;
    let (fu, fv) = (svd.U(), svd.V());
    let s = svd.S().column_vector();
    Ok(Svd {
        u: DMatrix::from_fn(m, m, |i, j| fu[(i, j)]),
        s: (0..m.min(n)).map(|k| s[k]).collect(),
        v: DMatrix::from_fn(n, n, |i, j| fv[(i, j)]),
    })
}

fn rank_threshold(s: &[f64], rank_tol: f64) -> f64 {
    rank_tol * (1.0 + s.iter().fold(0.0_f64, |m, v| m.max(*v)))
}

/// Orthonormal basis of `ker(A)` as the columns of the returned matrix.
///
/// Singular values at or below `rank_tol * (1 + ||A||)` count as zero.
pub fn nullspace_basis(a: &DMatrix<f64>, rank_tol: f64) -> Result<DMatrix<f64>> {
    let n = a.ncols();
    if n == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    if a.nrows() == 0 {
        return Ok(DMatrix::identity(n, n));
    }
    let svd = full_svd(a)?;
    let thresh = rank_threshold(&svd.s, rank_tol);
    let cols: Vec<DVector<f64>> = (0..n)
        .filter(|&k| svd.s.get(k).is_none_or(|&s| s <= thresh))
        .map(|k| svd.v.column(k).into_owned())
        .collect();
    Ok(if cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&cols)
    })
}

/// Numerical rank with the same threshold as [`nullspace_basis`].
pub fn numerical_rank(a: &DMatrix<f64>, rank_tol: f64) -> Result<usize> {
    if a.is_empty() {
        return Ok(0);
    }
    let s = full_svd(a)?.s;
    let thresh = rank_threshold(&s, rank_tol);
    Ok(s.iter().filter(|&&v| v > thresh).count())
}

/// Minimum-norm solution of a consistent system `A x = b`.
pub fn min_norm_solve(a: &DMatrix<f64>, b: &[f64]) -> Result<Vec<f64>> {
    min_norm_solve_with(a, b, LpTolerances::default().rank_tol)
}

pub fn min_norm_solve_with(a: &DMatrix<f64>, b: &[f64], rank_tol: f64) -> Result<Vec<f64>> {
    let (m, n) = a.shape();
    if b.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "rhs has length {}, matrix has {m} rows",
            b.len()
        )));
    }
    let bv = DVector::from_column_slice(b);
    let x = if n == 0 || m == 0 {
        DVector::zeros(n)
    } else {
        let svd = full_svd(a)?;
        let thresh = rank_threshold(&svd.s, rank_tol);
        let mut x = DVector::zeros(n);
        for (k, &s) in svd.s.iter().enumerate() {
            if s > thresh {
                x += svd.v.column(k) * (svd.u.column(k).dot(&bv) / s);
            }
        }
        x
    };
    let residual = (a * &x - &bv).amax();
    let tolerance = 1e-10 * (1.0 + bv.amax());
    if residual > tolerance {
        return Err(Error::Inconsistent { residual, tolerance });
    }
    Ok(x.iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opt(out: &LpOutcome) -> &LpSolution {
        out.optimal().expect("expected optimal")
    }

    #[test]
    fn vertex_of_simplex() {
        let lp = LinearProgram::nonnegative(
            vec![1.0, 0.0],
            DMatrix::from_row_slice(1, 2, &[1.0, 1.0]),
            vec![1.0],
        );
        let out = solve_lp(&lp).unwrap();
        let s = opt(&out);
        assert!(s.value.abs() < 1e-12);
        assert!((s.primal[0]).abs() < 1e-12 && (s.primal[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn free_ray_is_unbounded() {
        let lp = LinearProgram::nonnegative(
            vec![-1.0, 0.0],
            DMatrix::from_row_slice(1, 2, &[1.0, -1.0]),
            vec![0.0],
        );
        match solve_lp(&lp).unwrap() {
            LpOutcome::Unbounded { ray } => {
                assert!(ray[0] > 0.0);
                assert!((ray[0] - ray[1]).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn displacement_cost_of_case_b() {
        // brute force over u2 in {0, 0.01, ..., 10} with u1 = 1 + u2
        let brute = (0..=1000)
            .map(|k| {
                let u2 = k as f64 * 0.01;
                2.0 * (1.0 + u2) - u2
            })
            .fold(f64::INFINITY, f64::min);
        assert!((brute - 2.0).abs() < 1e-12);
        let lp = LinearProgram::nonnegative(
            vec![2.0, -1.0],
            DMatrix::from_row_slice(1, 2, &[1.0, -1.0]),
            vec![1.0],
        );
        let out = solve_lp(&lp).unwrap();
        let s = opt(&out);
        assert!((s.value - brute).abs() < 1e-12);
        assert!((s.primal[0] - 1.0).abs() < 1e-12 && s.primal[1].abs() < 1e-12);
    }

    #[test]
    fn infeasible_detected() {
        let lp = LinearProgram::nonnegative(
            vec![1.0, 1.0],
            DMatrix::from_row_slice(1, 2, &[1.0, 1.0]),
            vec![-1.0],
        );
        assert!(solve_lp(&lp).unwrap().is_infeasible());
    }

    #[test]
    fn free_and_bounded_variables() {
        // min -x0 + x1, x0 + x1 = 0, x0 <= 3, x1 free -> x0 = 3, x1 = -3
        let lp = LinearProgram {
            objective: vec![-1.0, 1.0],
            equality_matrix: DMatrix::from_row_slice(1, 2, &[1.0, 1.0]),
            equality_rhs: vec![0.0],
            lower: vec![0.0, f64::NEG_INFINITY],
            upper: vec![3.0, f64::INFINITY],
        };
        let out = solve_lp(&lp).unwrap();
        let s = opt(&out);
        assert!((s.value + 6.0).abs() < 1e-10);
        assert!((s.primal[0] - 3.0).abs() < 1e-10);
        // free variable with finite upper bound
        let lp = LinearProgram {
            objective: vec![-1.0],
            equality_matrix: DMatrix::zeros(0, 1),
            equality_rhs: vec![],
            lower: vec![f64::NEG_INFINITY],
            upper: vec![2.5],
        };
        let s = solve_lp(&lp).unwrap();
        assert!((opt(&s).primal[0] - 2.5).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let lp = LinearProgram::nonnegative(vec![1.0], DMatrix::zeros(1, 2), vec![0.0]);
        assert!(matches!(solve_lp(&lp), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn redundant_rows_keep_duals_consistent() {
        let a = DMatrix::from_row_slice(2, 3, &[1.0, 1.0, 1.0, 2.0, 2.0, 2.0]);
        let lp = LinearProgram::nonnegative(vec![3.0, 1.0, 2.0], a, vec![1.0, 2.0]);
        let out = solve_lp(&lp).unwrap();
        let s = opt(&out);
        assert!((s.value - 1.0).abs() < 1e-12);
        let yb: f64 = s.dual.iter().zip([1.0, 2.0]).map(|(y, b)| y * b).sum();
        assert!((yb - s.value).abs() < 1e-10);
        assert!(s.reduced_costs.iter().all(|&d| d > -1e-10));
    }

    #[test]
    fn nullspace_examples() {
        let b = nullspace_basis(&DMatrix::from_row_slice(1, 2, &[1.0, -1.0]), 1e-10).unwrap();
        assert_eq!(b.ncols(), 1);
        let v = b.column(0);
        assert!((v[0].abs() - 0.5_f64.sqrt()).abs() < 1e-12);
        assert!((v[0] - v[1]).abs() < 1e-12);

        assert_eq!(nullspace_basis(&DMatrix::identity(3, 3), 1e-10).unwrap().ncols(), 0);

        let a = DMatrix::from_row_slice(2, 3, &[1.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        let b = nullspace_basis(&a, 1e-10).unwrap();
        assert_eq!(b.ncols(), 1);
        assert!(max_abs(&(&a * &b)) < 1e-12);
        assert!((b[(0, 0)] + b[(1, 0)]).abs() < 1e-12 && b[(2, 0)].abs() < 1e-12);
    }

    #[test]
    fn min_norm_examples() {
        let x = min_norm_solve(&DMatrix::from_row_slice(1, 2, &[1.0, 1.0]), &[2.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
        let x = min_norm_solve(&DMatrix::identity(2, 2), &[3.0, 4.0]).unwrap();
        assert!((x[0] - 3.0).abs() < 1e-12 && (x[1] - 4.0).abs() < 1e-12);

        // normal equations oracle: x = A' (A A')^{-1} b
        let a = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 1.0, 0.0, 1.0, 1.0]);
        let b = DVector::from_vec(vec![1.0, 1.0]);
        let aat = &a * a.transpose();
        let oracle = a.transpose() * aat.try_inverse().unwrap() * &b;
        let x = min_norm_solve(&a, b.as_slice()).unwrap();
        for k in 0..3 {
            assert!((x[k] - oracle[k]).abs() < 1e-12);
        }
        assert!((x[0] - 1.0 / 3.0).abs() < 1e-12 && (x[2] - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn min_norm_inconsistent() {
        let a = DMatrix::from_row_slice(2, 1, &[1.0, 1.0]);
        assert!(matches!(
            min_norm_solve(&a, &[1.0, 2.0]),
            Err(Error::Inconsistent { .. })
        ));
    }
}
