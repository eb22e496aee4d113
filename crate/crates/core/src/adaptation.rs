//! Monitor-driven mesh redistribution.
//!
//! The mesh equations `∇_ξ·(ω ∇_ξ x_k) = 0` are relaxed by Jacobi sweeps
//! with cell-centred monitor values averaged onto mesh edges. Boundary
//! nodes of non-periodic directions slide along their (planar) boundary.

use crate::error::{Error, Result};
use crate::mesh::StructuredMesh;
use crate::metrics::jacobian_unchecked;

/// Physical variable driving the monitor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SigmaKind {
    Rho,
    LnRho,
}

impl SigmaKind {
    pub fn eval(self, rho: f64) -> f64 {
        match self {
            SigmaKind::Rho => rho,
            SigmaKind::LnRho => rho.ln(),
        }
    }
}

impl std::str::FromStr for SigmaKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rho" => Ok(SigmaKind::Rho),
            "lnrho" | "ln_rho" => Ok(SigmaKind::LnRho),
            _ => Err(Error::Invalid(format!(
                "unknown monitor variable '{s}' (expected rho or lnrho)"
            ))),
        }
    }
}

impl std::fmt::Display for SigmaKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SigmaKind::Rho => "rho",
            SigmaKind::LnRho => "lnrho",
        })
    }
}

/// Cell values of the monitor `ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct MonitorField {
    pub omega: Vec<f64>,
    pub alpha: f64,
    pub filter_passes: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptationConfig {
    pub enabled: bool,
    pub alpha: f64,
    pub sigma: SigmaKind,
    /// Jacobi iterations per time step.
    pub mu: usize,
    pub filter_passes: usize,
    pub limiter_on: bool,
    /// Redistribution rounds on the initial data before the first step.
    pub initial_rounds: usize,
}

impl Default for AdaptationConfig {
    fn default() -> Self {
        AdaptationConfig {
            enabled: true,
            alpha: 20.0,
            sigma: SigmaKind::Rho,
            mu: 10,
            filter_passes: 2,
            limiter_on: true,
            initial_rounds: 10,
        }
    }
}

/// Neighbouring cell index along `dir`, clamped or wrapped.
#[inline]
fn cell_nbr(i: usize, off: isize, n: usize, periodic: bool) -> usize {
    let j = i as isize + off;
    if j < 0 {
        if periodic {
            (j + n as isize) as usize
        } else {
            0
        }
    } else if j >= n as isize {
        if periodic {
            (j - n as isize) as usize
        } else {
            n - 1
        }
    } else {
        j as usize
    }
}

/// `ω = √(1 + α |∇_ξ σ| / max |∇_ξ σ|)` with central differences in `ξ`.
pub fn compute_monitor(mesh: &StructuredMesh, sigma: &[f64], alpha: f64) -> MonitorField {
    let n = mesh.cells();
    let dim = mesh.dim();
    let dxi = mesh.dxi();
    let per = mesh.period().map(|p| p.is_some());
    let mut grad = vec![0.0; mesh.num_cells()];
    for k in 0..n[2] {
        for j in 0..n[1] {
            for i in 0..n[0] {
                let idx = [i, j, k];
                let mut g = [0.0; 3];
                for d in 0..dim {
                    let mut lo = idx;
                    let mut hi = idx;
                    lo[d] = cell_nbr(idx[d], -1, n[d], per[d]);
                    hi[d] = cell_nbr(idx[d], 1, n[d], per[d]);
                    let s = sigma[mesh.cell_index(hi[0], hi[1], hi[2])]
                        - sigma[mesh.cell_index(lo[0], lo[1], lo[2])];
                    g[d] = s / (2.0 * dxi[d]);
                }
                let sq = if dim == 2 {
                    g[0] * g[0] + g[1] * g[1]
                } else {
                    (g[0] * g[0] + g[1] * g[1]) + g[2] * g[2]
                };
                grad[mesh.cell_index(i, j, k)] = sq.sqrt();
            }
        }
    }
    let max = grad.iter().cloned().fold(0.0, f64::max);
    let omega = if max > 0.0 {
        grad.iter()
            .map(|g| (1.0 + alpha * (g / max)).sqrt())
            .collect()
    } else {
        vec![1.0; grad.len()]
    };
    MonitorField {
        omega,
        alpha,
        filter_passes: 0,
    }
}

/// Applies the low-pass filter with weights `(½)^{|j|₁ + d}` `passes` times.
pub fn smooth_monitor(mesh: &StructuredMesh, mf: &MonitorField, passes: usize) -> MonitorField {
    let n = mesh.cells();
    let per = mesh.period().map(|p| p.is_some());
    let mut w = mf.omega.clone();
    let mut next = vec![0.0; w.len()];
    for _ in 0..passes {
        for k in 0..n[2] {
            for j in 0..n[1] {
                for i in 0..n[0] {
                    let at = |a: isize, b: isize, c: isize| {
                        let ii = cell_nbr(i, a, n[0], per[0]);
                        let jj = cell_nbr(j, b, n[1], per[1]);
                        let kk = if mesh.dim() == 3 {
                            cell_nbr(k, c, n[2], per[2])
                        } else {
                            0
                        };
                        w[mesh.cell_index(ii, jj, kk)]
                    };
                    let v = if mesh.dim() == 2 {
                        let faces = (at(1, 0, 0) + at(-1, 0, 0)) + (at(0, 1, 0) + at(0, -1, 0));
                        let corners = (at(1, 1, 0) + at(-1, -1, 0)) + (at(-1, 1, 0) + at(1, -1, 0));
                        0.25 * at(0, 0, 0) + 0.125 * faces + 0.0625 * corners
                    } else {
                        let mut faces = 0.0;
                        let mut edges = 0.0;
                        let mut corners = 0.0;
                        for c in -1..=1isize {
                            for b in -1..=1isize {
                                for a in -1..=1isize {
                                    match a.abs() + b.abs() + c.abs() {
                                        1 => faces += at(a, b, c),
                                        2 => edges += at(a, b, c),
                                        3 => corners += at(a, b, c),
                                        _ => {}
                                    }
                                }
                            }
                        }
                        0.125 * at(0, 0, 0) + 0.0625 * faces + 0.03125 * edges + 0.015625 * corners
                    };
                    next[mesh.cell_index(i, j, k)] = v;
                }
            }
        }
        std::mem::swap(&mut w, &mut next);
    }
    MonitorField {
        omega: w,
        alpha: mf.alpha,
        filter_passes: mf.filter_passes + passes,
    }
}

/// `ω` on the edge from node `p` to `p + e_dir`: mean of the cells sharing it.
fn edge_omega(mesh: &StructuredMesh, omega: &[f64], dir: usize, p: [usize; 3]) -> f64 {
    let n = mesh.cells();
    let per = mesh.period().map(|p| p.is_some());
    // Cell index on either side of node coordinate `q` in a transverse direction.
    let side = |d: usize, q: usize, upper: bool| -> usize {
        if upper {
            if q == n[d] {
                if per[d] {
                    0
                } else {
                    n[d] - 1
                }
            } else {
                q
            }
        } else if q == 0 {
            if per[d] {
                n[d] - 1
            } else {
                0
            }
        } else {
            q - 1
        }
    };
    let cell = |a: usize, b: usize, c: usize| omega[mesh.cell_index(a, b, c)];
    if mesh.dim() == 2 {
        let t = 1 - dir;
        let lo = side(t, p[t], false);
        let hi = side(t, p[t], true);
        let (a, b) = if dir == 0 {
            (cell(p[0], lo, 0), cell(p[0], hi, 0))
        } else {
            (cell(lo, p[1], 0), cell(hi, p[1], 0))
        };
        0.5 * (a + b)
    } else {
        let (ta, tb) = match dir {
            0 => (1, 2),
            1 => (2, 0),
            _ => (0, 1),
        };
        let mut vals = [0.0; 4];
        for (s, (ua, ub)) in [(false, false), (true, true), (true, false), (false, true)]
            .into_iter()
            .enumerate()
        {
            let mut c = p;
            c[ta] = side(ta, p[ta], ua);
            c[tb] = side(tb, p[tb], ub);
            vals[s] = cell(c[0], c[1], c[2]);
        }
        0.25 * ((vals[0] + vals[1]) + (vals[2] + vals[3]))
    }
}

/// Neighbour of node `p` along `dir` (`up` selects `+`): coordinates and
/// edge weight, with periodic shifts or boundary mirroring.
fn node_neighbor(
    mesh: &StructuredMesh,
    x: &[[f64; 3]],
    omega: &[f64],
    p: [usize; 3],
    dir: usize,
    up: bool,
) -> ([f64; 3], f64) {
    let nn = mesh.node_dims();
    let last = nn[dir] - 1;
    let idx = |q: [usize; 3]| mesh.node_index(q[0], q[1], q[2]);
    let mut q = p;
    if up && p[dir] < last {
        q[dir] += 1;
        (x[idx(q)], edge_omega(mesh, omega, dir, p))
    } else if !up && p[dir] > 0 {
        q[dir] -= 1;
        (x[idx(q)], edge_omega(mesh, omega, dir, q))
    } else if let Some(len) = mesh.period()[dir] {
        // p sits on the periodic seam: wrap to the node one cell inside.
        if up {
            q[dir] = 1;
            let mut y = x[idx(q)];
            y[dir] += len;
            let mut e = p;
            e[dir] = 0;
            (y, edge_omega(mesh, omega, dir, e))
        } else {
            q[dir] = last - 1;
            let mut y = x[idx(q)];
            y[dir] -= len;
            (y, edge_omega(mesh, omega, dir, q))
        }
    } else {
        // Mirror the inward neighbour across the boundary plane.
        let inner = if up { p[dir] - 1 } else { p[dir] + 1 };
        q[dir] = inner;
        let mut y = x[idx(q)];
        let b = x[idx(p)][dir];
        y[dir] = 2.0 * b - y[dir];
        let e = if up { q } else { p };
        (y, edge_omega(mesh, omega, dir, e))
    }
}

/// Proposed node coordinates after `cfg.mu` Jacobi sweeps.
pub fn jacobi_redistribute(
    mesh: &StructuredMesh,
    mf: &MonitorField,
    cfg: &AdaptationConfig,
) -> Vec<[f64; 3]> {
    let dim = mesh.dim();
    let nn = mesh.node_dims();
    let per = mesh.period();
    let mut x = mesh.nodes.clone();
    let mut next = x.clone();
    for _ in 0..cfg.mu {
        for k in 0..nn[2] {
            for j in 0..nn[1] {
                for i in 0..nn[0] {
                    let p = [i, j, k];
                    let mut num = [[0.0; 3]; 3];
                    let mut den = [0.0; 3];
                    for d in 0..dim {
                        let (xm, wm) = node_neighbor(mesh, &x, &mf.omega, p, d, false);
                        let (xp, wp) = node_neighbor(mesh, &x, &mf.omega, p, d, true);
                        for l in 0..3 {
                            num[d][l] = wm * xm[l] + wp * xp[l];
                        }
                        den[d] = wm + wp;
                    }
                    let idx = mesh.node_index(i, j, k);
                    let mut y = [0.0; 3];
                    let total = if dim == 2 {
                        den[0] + den[1]
                    } else {
                        (den[0] + den[1]) + den[2]
                    };
                    for l in 0..dim {
                        let s = if dim == 2 {
                            num[0][l] + num[1][l]
                        } else {
                            (num[0][l] + num[1][l]) + num[2][l]
                        };
                        y[l] = s / total;
                    }
                    for d in 0..dim {
                        let on_wall = per[d].is_none() && (p[d] == 0 || p[d] == nn[d] - 1);
                        if on_wall {
                            y[d] = x[idx][d];
                        }
                    }
                    next[idx] = y;
                }
            }
        }
        std::mem::swap(&mut x, &mut next);
        enforce_seams(mesh, &mut x);
    }
    x
}

fn enforce_seams(mesh: &StructuredMesh, x: &mut [[f64; 3]]) {
    let nn = mesh.node_dims();
    for d in 0..mesh.dim() {
        let Some(len) = mesh.period()[d] else {
            continue;
        };
        for k in 0..nn[2] {
            for j in 0..nn[1] {
                for i in 0..nn[0] {
                    let p = [i, j, k];
                    if p[d] != nn[d] - 1 {
                        continue;
                    }
                    let mut s = p;
                    s[d] = 0;
                    let mut y = x[mesh.node_index(s[0], s[1], s[2])];
                    y[d] += len;
                    x[mesh.node_index(i, j, k)] = y;
                }
            }
        }
    }
}

/// Largest `Δ_τ ∈ [0, 1]` keeping every node within half the distance to
/// its neighbours along each coordinate direction, halved further until no
/// cell folds. Returns `Δ_τ` and the limited displacement `Δ_τ δx`.
pub fn limit_displacement(mesh: &StructuredMesh, proposed: &[[f64; 3]]) -> (f64, Vec<[f64; 3]>) {
    let dim = mesh.dim();
    let nn = mesh.node_dims();
    let x = &mesh.nodes;
    let delta: Vec<[f64; 3]> = proposed
        .iter()
        .zip(x)
        .map(|(a, b)| [a[0] - b[0], a[1] - b[1], a[2] - b[2]])
        .collect();
    let mut tau: f64 = 1.0;
    let unit_omega = vec![1.0; mesh.num_cells()];
    for k in 0..nn[2] {
        for j in 0..nn[1] {
            for i in 0..nn[0] {
                let p = [i, j, k];
                let idx = mesh.node_index(i, j, k);
                for d in 0..dim {
                    let dx = delta[idx][d];
                    if dx == 0.0 {
                        continue;
                    }
                    let at_end = if dx > 0.0 {
                        p[d] == nn[d] - 1
                    } else {
                        p[d] == 0
                    };
                    if at_end && mesh.period()[d].is_none() {
                        continue;
                    }
                    let (y, _) = node_neighbor(mesh, x, &unit_omega, p, d, dx > 0.0);
                    let gap = (y[d] - x[idx][d]).abs();
                    tau = tau.min(gap / (2.0 * dx.abs()));
                }
            }
        }
    }
    let mut tau = tau.max(0.0);
    let mut trial = mesh.clone();
    for _ in 0..60 {
        for ((t, x0), d) in trial.nodes.iter_mut().zip(x).zip(&delta) {
            for l in 0..3 {
                t[l] = x0[l] + tau * d[l];
            }
        }
        if jacobian_unchecked(&trial).iter().all(|&v| v > 0.0) {
            break;
        }
        tau *= 0.5;
    }
    let disp = delta
        .iter()
        .map(|d| [tau * d[0], tau * d[1], tau * d[2]])
        .collect();
    (tau, disp)
}

/// Monitor, filter, Jacobi sweeps and limiter for cell values `sigma`.
/// Returns the node displacement over the coming step.
pub fn adapt_displacement(
    mesh: &StructuredMesh,
    sigma: &[f64],
    cfg: &AdaptationConfig,
) -> Vec<[f64; 3]> {
    let mf = compute_monitor(mesh, sigma, cfg.alpha);
    let mf = smooth_monitor(mesh, &mf, cfg.filter_passes);
    let proposed = jacobi_redistribute(mesh, &mf, cfg);
    if cfg.limiter_on {
        limit_displacement(mesh, &proposed).1
    } else {
        proposed
            .iter()
            .zip(&mesh.nodes)
            .map(|(a, b)| [a[0] - b[0], a[1] - b[1], a[2] - b[2]])
            .collect()
    }
}
