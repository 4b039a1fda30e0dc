//! Random instance generators and brute-force oracles shared by the
//! integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use singular_control::cone::{ControlCone, ControlSystem};
use singular_control::network::{AffinePiece, BrownianNetwork, PiecewiseLinear, WorkloadModel};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `d <= 3`, `p <= 5`, at most 6 generators; a third of the draws use small
/// integers so ties and exact cancellations occur.
pub fn random_system(rng: &mut ChaCha8Rng) -> ControlSystem {
    loop {
        let d = rng.random_range(1..=3);
        let p = rng.random_range(1..=5);
        let j = rng.random_range(1..=6);
        let integer = rng.random_bool(0.3);
        let draw = |rng: &mut ChaCha8Rng| {
            if integer {
                rng.random_range(-2i32..=2) as f64
            } else {
                rng.random_range(-1.0..1.0)
            }
        };
        let r = DMatrix::from_fn(p, j, |_, _| draw(rng));
        let g = DMatrix::from_fn(d, p, |_, _| draw(rng));
        let shift = if rng.random_bool(0.5) { 1.0 } else { 0.0 };
        let kappa: Vec<f64> = (0..p).map(|_| draw(rng) + shift).collect();
        let alpha = rng.random_range(0.5..2.0);
        let Ok(cone) = ControlCone::new(r) else { continue };
        if let Ok(sys) = ControlSystem::new(cone, g, kappa, alpha) {
            return sys;
        }
    }
}

pub fn corpus(n: usize, seed: u64) -> Vec<ControlSystem> {
    let mut r = rng(seed);
    (0..n).map(|_| random_system(&mut r)).collect()
}

/// Network with `m, n, p <= 5` whose workload dimension is `d ∈ {1, 2}`.
///
/// `K` is built with a kernel of dimension `m - d`, so that generically
/// `R ker K` has rank `m - d`.
pub fn random_network(rng: &mut ChaCha8Rng) -> BrownianNetwork {
    loop {
        let m = rng.random_range(1..=5);
        let d = rng.random_range(1..=m.min(2));
        let k_dim = m - d;
        let n = rng.random_range(k_dim.max(1)..=5);
        let rank_k = n - k_dim;
        if rank_k == 0 {
            continue;
        }
        let p = rng.random_range(rank_k..=5);
        let a = DMatrix::from_fn(p, rank_k, |_, _| rng.random_range(-1.0..1.0));
        let b = DMatrix::from_fn(rank_k, n, |_, _| rng.random_range(-1.0..1.0));
        let k = a * b;
        let r = DMatrix::from_fn(m, n, |_, _| rng.random_range(-1.0..1.0));
        if !well_conditioned(&r, &k, rank_k, k_dim) {
            continue;
        }
        let l = DMatrix::from_fn(m, m, |_, _| rng.random_range(-1.0..1.0));
        let sigma = &l * l.transpose() + DMatrix::identity(m, m) * 0.1;
        let sigma = (&sigma + sigma.transpose()) * 0.5;
        let z_lo: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..0.0)).collect();
        let z_hi: Vec<f64> = z_lo.iter().map(|l| l + rng.random_range(0.5..2.0)).collect();
        let pieces = (0..rng.random_range(1..=3))
            .map(|_| AffinePiece {
                slope: (0..m).map(|_| rng.random_range(-1.0..1.0)).collect(),
                intercept: rng.random_range(-0.5..0.5),
            })
            .collect();
        return BrownianNetwork {
            theta: (0..m).map(|_| rng.random_range(-1.0..1.0)).collect(),
            sigma,
            r,
            k,
            z_lo,
            z_hi,
            h: PiecewiseLinear { pieces },
            v: (0..n).map(|_| rng.random_range(-1.0..1.0)).collect(),
            alpha: rng.random_range(0.5..2.0),
        };
    }
}

fn smallest_kept_singular_value(a: &DMatrix<f64>, keep: usize) -> f64 {
    if keep == 0 || a.is_empty() {
        return if keep == 0 { 1.0 } else { 0.0 };
    }
    let mut sv: Vec<f64> = a.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv.get(keep - 1).copied().unwrap_or(0.0)
}

/// Rejects draws whose rank structure is only marginally attained.
fn well_conditioned(r: &DMatrix<f64>, k: &DMatrix<f64>, rank_k: usize, k_dim: usize) -> bool {
    let (m, n) = r.shape();
    let p = k.nrows();
    if smallest_kept_singular_value(k, rank_k) < 0.05 {
        return false;
    }
    let zk = singular_control::lp::nullspace_basis(k, 1e-10).unwrap();
    if zk.ncols() != k_dim || smallest_kept_singular_value(&(r * &zk), k_dim) < 0.05 {
        return false;
    }
    let mut stacked = DMatrix::zeros(n, m + p);
    stacked.view_mut((0, 0), (n, m)).copy_from(&r.transpose());
    stacked.view_mut((0, m), (n, p)).copy_from(&k.transpose());
    smallest_kept_singular_value(&stacked, n) >= 0.05
}

fn objective(model: &WorkloadModel, net: &BrownianNetwork, z: &[f64]) -> f64 {
    net.h.eval(z) + net.alpha * model.pi.iter().zip(z).map(|(p, x)| p * x).sum::<f64>()
}

/// `g(w)` by enumerating every point where `m - d` of the box faces and
/// breakpoint hyperplanes of `h` meet the slice `M z = w`.
pub fn effective_cost_by_vertices(model: &WorkloadModel, net: &BrownianNetwork, w: &[f64]) -> Option<f64> {
    let m = net.m();
    let d = model.d();
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
    for j in 0..m {
        let mut e = vec![0.0; m];
        e[j] = 1.0;
        rows.push((e.clone(), net.z_lo[j]));
        rows.push((e, net.z_hi[j]));
    }
    let pcs = &net.h.pieces;
    for a in 0..pcs.len() {
        for b in a + 1..pcs.len() {
            let row = pcs[a].slope.iter().zip(&pcs[b].slope).map(|(x, y)| x - y).collect();
            rows.push((row, pcs[b].intercept - pcs[a].intercept));
        }
    }
    let need = m - d;
    let mut best: Option<f64> = None;
    let mut choose = vec![0usize; need];
    fn next(c: &mut [usize], n: usize) -> bool {
        let k = c.len();
        for i in (0..k).rev() {
            if c[i] < n - k + i {
                c[i] += 1;
                for j in i + 1..k {
                    c[j] = c[j - 1] + 1;
                }
                return true;
            }
        }
        false
    }
    for (i, c) in choose.iter_mut().enumerate() {
        *c = i;
    }
    if need > rows.len() {
        return None;
    }
    loop {
        let mut a = DMatrix::zeros(m, m);
        let mut b = DVector::zeros(m);
        for i in 0..d {
            for j in 0..m {
                a[(i, j)] = model.m[(i, j)];
            }
            b[i] = w[i];
        }
        for (k, &r) in choose.iter().enumerate() {
            for j in 0..m {
                a[(d + k, j)] = rows[r].0[j];
            }
            b[d + k] = rows[r].1;
        }
        if let Some(z) = a.clone().lu().solve(&b) {
            let ok_det = a.determinant().abs() > 1e-10;
            let inside = (0..m).all(|j| z[j] >= net.z_lo[j] - 1e-9 && z[j] <= net.z_hi[j] + 1e-9);
            let consistent = ((&model.m * &z) - DVector::from_column_slice(w)).amax() <= 1e-9;
            if ok_det && inside && consistent {
                let zc: Vec<f64> = (0..m).map(|j| z[j].clamp(net.z_lo[j], net.z_hi[j])).collect();
                let v = objective(model, net, &zc);
                best = Some(best.map_or(v, |bv: f64| bv.min(v)));
            }
        }
        if need == 0 || !next(&mut choose, rows.len()) {
            break;
        }
    }
    best
}

/// Minimum of the effective-cost objective over a step-`step` grid on the
/// slice `M z = w ∩ Z` (only for `m - d <= 2`), plus a Lipschitz constant of
/// the objective in the slice coordinates.
pub fn effective_cost_by_grid(model: &WorkloadModel, net: &BrownianNetwork, w: &[f64], step: f64) -> Option<(f64, f64)> {
    let m = net.m();
    let d = model.d();
    let k = m - d;
    if k > 2 {
        return None;
    }
    // z = M' w + N t, N orthonormal basis of ker M
    let z0 = model.m.transpose() * DVector::from_column_slice(w);
    let nb = singular_control::lp::nullspace_basis(&model.m, 1e-12).unwrap();
    let bound = |c: usize| -> i64 {
        let r: f64 = (0..m)
            .map(|j| nb[(j, c)].abs() * (net.z_lo[j] - z0[j]).abs().max((net.z_hi[j] - z0[j]).abs()))
            .sum();
        (r / step).ceil() as i64
    };
    let mut best: Option<f64> = None;
    let mut visit = |t: &[f64]| {
        let mut z = z0.clone();
        for (c, tv) in t.iter().enumerate() {
            z += nb.column(c) * *tv;
        }
        if (0..m).all(|j| z[j] >= net.z_lo[j] - 1e-12 && z[j] <= net.z_hi[j] + 1e-12) {
            let v = objective(model, net, z.as_slice());
            best = Some(best.map_or(v, |bv: f64| bv.min(v)));
        }
    };
    match k {
        0 => visit(&[]),
        1 => {
            let s0 = bound(0);
            for i in -s0..=s0 {
                visit(&[i as f64 * step]);
            }
        }
        _ => {
            let (s0, s1) = (bound(0), bound(1));
            for i in -s0..=s0 {
                for j in -s1..=s1 {
                    visit(&[i as f64 * step, j as f64 * step]);
                }
            }
        }
    }
    let lip = net
        .h
        .pieces
        .iter()
        .map(|p| {
            p.slope
                .iter()
                .zip(&model.pi)
                .map(|(s, q)| (s + net.alpha * q).powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0, f64::max);
    best.map(|b| (b, lip))
}
