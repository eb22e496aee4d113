//! Semi-discrete residual, SSP Runge-Kutta stepping coupled to mesh
//! motion, time step control and entropy diagnostics.

use crate::adaptation::{adapt_displacement, AdaptationConfig};
use crate::error::{Error, Result};
use crate::fluxes::{
    ec_flux_cells, entropy_flux_cells, es2_flux_cells, CellState, InterfaceMetrics,
};
use crate::linalg::Vec5;
use crate::mesh::StructuredMesh;
use crate::metrics::{
    check_positive, compute_scl_metrics, face_divergence, jacobian_direct, jacobian_rhs, FaceField,
    MetricSet, Vcl, VclTrajectory,
};
use crate::physics::{
    cons_to_prim, directional_speeds, entropy_bundle, prim_to_cons, ConservedState, GasModel,
    PrimitiveState,
};

/// Interface flux of the finite volume scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FluxKind {
    /// Entropy conservative two-point flux.
    Ec,
    /// Second-order entropy stable flux.
    Es2,
}

impl std::str::FromStr for FluxKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ec" => Ok(FluxKind::Ec),
            "es2" | "es" => Ok(FluxKind::Es2),
            _ => Err(Error::Invalid(format!(
                "unknown flux '{s}' (expected ec or es2)"
            ))),
        }
    }
}

impl std::fmt::Display for FluxKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FluxKind::Ec => "ec",
            FluxKind::Es2 => "es2",
        })
    }
}

/// SSP Runge-Kutta scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RkOrder {
    Rk2,
    Rk3,
}

impl std::str::FromStr for RkOrder {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rk2" | "2" => Ok(RkOrder::Rk2),
            "rk3" | "3" => Ok(RkOrder::Rk3),
            _ => Err(Error::Invalid(format!(
                "unknown Runge-Kutta order '{s}' (expected rk2 or rk3)"
            ))),
        }
    }
}

impl std::fmt::Display for RkOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RkOrder::Rk2 => "rk2",
            RkOrder::Rk3 => "rk3",
        })
    }
}

/// Ghost-cell treatment of one domain side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryKind {
    Periodic,
    /// Zeroth-order extrapolation.
    Outflow,
    /// Mirror with the normal velocity component negated.
    Reflect,
    /// Ghosts held at a fixed state.
    Inflow(PrimitiveState),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub gas: GasModel,
    pub flux: FluxKind,
    pub rk: RkOrder,
    pub vcl: Vcl,
    pub cfl: f64,
    /// `[low, high]` side per direction.
    pub boundaries: [[BoundaryKind; 2]; 3],
    pub adapt: AdaptationConfig,
}

impl SolverConfig {
    pub fn new(dim: usize, boundaries: [[BoundaryKind; 2]; 3]) -> Self {
        SolverConfig {
            gas: GasModel::default(),
            flux: FluxKind::Es2,
            rk: RkOrder::Rk2,
            vcl: Vcl::Vcl1,
            cfl: if dim == 2 { 0.4 } else { 0.3 },
            boundaries,
            adapt: AdaptationConfig::default(),
        }
    }
}

/// `(JU)_i`, `J_i` and the primitive states recovered from them.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionField {
    pub ju: Vec<Vec5>,
    pub jac: Vec<f64>,
    pub prim: Vec<PrimitiveState>,
}

impl SolutionField {
    /// Cell states `prim` on cells with Jacobians `jac`.
    pub fn from_primitives(
        prim: Vec<PrimitiveState>,
        jac: Vec<f64>,
        gas: &GasModel,
    ) -> Result<Self> {
        let mut ju = Vec::with_capacity(prim.len());
        for (p, j) in prim.iter().zip(&jac) {
            let u = prim_to_cons(p, gas)?.to_array();
            ju.push(u.map(|x| j * x));
        }
        Ok(SolutionField { ju, jac, prim })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub dt: f64,
    /// Time at the end of the step.
    pub t: f64,
    /// `Σ_i J_i η(U_i) ∏Δξ_k` at the end of the step.
    pub total_entropy: f64,
    /// Net outward entropy flux through non-periodic boundaries at the start
    /// of the step.
    pub entropy_flux_boundary: f64,
    /// `max_i ϱ_{k,i} / J_i` of the fixed-mesh part per direction.
    pub max_wavespeed: [f64; 3],
    /// Limiter factor applied to the mesh displacement for the CFL budget.
    pub mesh_scale: f64,
}

/// Semi-discrete right-hand sides of one stage.
#[derive(Debug, Clone)]
pub struct Residual {
    /// `d(JU)_i/dt`
    pub du: Vec<Vec5>,
    /// `dJ_i/dt`
    pub dj: Vec<f64>,
    /// Numerical entropy fluxes per face when requested.
    pub q: Option<FaceField<f64>>,
}

struct Padded {
    dims: [usize; 3],
    cells: Vec<CellState>,
}

impl Padded {
    #[inline]
    fn index(&self, p: [usize; 3]) -> usize {
        p[0] + self.dims[0] * (p[1] + self.dims[1] * p[2])
    }
}

const GHOST: usize = 2;

fn mirrored(p: &PrimitiveState, dir: usize) -> PrimitiveState {
    let mut q = *p;
    q.v[dir] = -q.v[dir];
    q
}

fn pad(mesh: &StructuredMesh, prim: &[PrimitiveState], cfg: &SolverConfig) -> Padded {
    let n = mesh.cells();
    let dim = mesh.dim();
    let mut dims = [1; 3];
    let mut off = [0; 3];
    for d in 0..dim {
        dims[d] = n[d] + 2 * GHOST;
        off[d] = GHOST;
    }
    let at = |p: [usize; 3]| p[0] + dims[0] * (p[1] + dims[1] * p[2]);
    let mut buf = vec![PrimitiveState::at_rest(1.0, 1.0); dims[0] * dims[1] * dims[2]];
    for k in 0..n[2] {
        for j in 0..n[1] {
            for i in 0..n[0] {
                buf[at([i + off[0], j + off[1], k + off[2]])] = prim[mesh.cell_index(i, j, k)];
            }
        }
    }
    for d in 0..dim {
        let [lo, hi] = cfg.boundaries[d];
        let mut t = [0usize; 3];
        let tr = [(d + 1) % 3, (d + 2) % 3];
        let ext = |a: usize| if a < dim { n[a] } else { 1 };
        for tb in 0..ext(tr[1]) {
            for ta in 0..ext(tr[0]) {
                t[tr[0]] = ta;
                t[tr[1]] = tb;
                let interior = |c: usize| {
                    let mut q = t;
                    q[d] = c;
                    prim[mesh.cell_index(q[0], q[1], q[2])]
                };
                let mut place = |pos: usize, s: PrimitiveState| {
                    let mut q = [t[0] + off[0], t[1] + off[1], t[2] + off[2]];
                    q[d] = pos;
                    buf[at(q)] = s;
                };
                for g in 1..=GHOST {
                    let low = match lo {
                        BoundaryKind::Periodic => interior(n[d] - g),
                        BoundaryKind::Outflow => interior(0),
                        BoundaryKind::Reflect => mirrored(&interior(g - 1), d),
                        BoundaryKind::Inflow(s) => s,
                    };
                    place(GHOST - g, low);
                    let high = match hi {
                        BoundaryKind::Periodic => interior(g - 1),
                        BoundaryKind::Outflow => interior(n[d] - 1),
                        BoundaryKind::Reflect => mirrored(&interior(n[d] - g), d),
                        BoundaryKind::Inflow(s) => s,
                    };
                    place(GHOST + n[d] - 1 + g, high);
                }
            }
        }
    }
    let cells = buf.iter().map(|p| CellState::new(p, &cfg.gas)).collect();
    Padded { dims, cells }
}

fn cell_of(mesh: &StructuredMesh, c: usize) -> [usize; 3] {
    let n = mesh.cells();
    [c % n[0], (c / n[0]) % n[1], c / (n[0] * n[1])]
}

/// Semi-discrete right-hand sides `d(JU)/dt` and `dJ/dt` for the cell
/// states `prim` on a mesh with metrics `ms`.
pub fn rhs(
    mesh: &StructuredMesh,
    ms: &MetricSet,
    prim: &[PrimitiveState],
    cfg: &SolverConfig,
    with_entropy: bool,
) -> Result<Residual> {
    let dim = mesh.dim();
    let dxi = mesh.dxi();
    let padded = pad(mesh, prim, cfg);
    let mut fluxes: [Vec<Vec5>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    let mut qs: FaceField<f64> = [Vec::new(), Vec::new(), Vec::new()];
    for d in 0..dim {
        let fd = mesh.face_dims(d);
        let mut fv = Vec::with_capacity(mesh.num_faces(d));
        let mut qv = Vec::with_capacity(if with_entropy { mesh.num_faces(d) } else { 0 });
        let mut face = 0;
        for k in 0..fd[2] {
            for j in 0..fd[1] {
                for i in 0..fd[0] {
                    let mut base = [i, j, k];
                    for a in 0..dim {
                        if a != d {
                            base[a] += GHOST;
                        }
                    }
                    let stencil = |s: usize| {
                        let mut q = base;
                        q[d] += s;
                        &padded.cells[padded.index(q)]
                    };
                    let m = InterfaceMetrics {
                        n: ms.normals[d][face],
                        nt: ms.nt[d][face],
                    };
                    let (c0, c1, c2, c3) = (stencil(0), stencil(1), stencil(2), stencil(3));
                    let f = match cfg.flux {
                        FluxKind::Ec => ec_flux_cells(c1, c2, &m, &cfg.gas),
                        FluxKind::Es2 => {
                            es2_flux_cells([c0, c1, c2, c3], &m, &cfg.gas)
                                .map_err(|e| {
                                    let mut c = [i, j, k];
                                    c[d] = c[d].min(mesh.cells()[d] - 1);
                                    e.at_cell(f64::NAN, c)
                                })?
                                .0
                        }
                    };
                    if with_entropy {
                        qv.push(entropy_flux_cells(c1, c2, &m, &f));
                    }
                    fv.push(f);
                    face += 1;
                }
            }
        }
        fluxes[d] = fv;
        qs[d] = qv;
    }
    let n = mesh.cells();
    let mut du = vec![[0.0; 5]; mesh.num_cells()];
    for k in 0..n[2] {
        for j in 0..n[1] {
            for i in 0..n[0] {
                let mut parts = [[0.0; 5]; 3];
                for d in 0..dim {
                    let mut hi = [i, j, k];
                    hi[d] += 1;
                    let fp = &fluxes[d][mesh.face_index(d, hi[0], hi[1], hi[2])];
                    let fm = &fluxes[d][mesh.face_index(d, i, j, k)];
                    let inv = 1.0 / dxi[d];
                    for c in 0..5 {
                        parts[d][c] = (fp[c] - fm[c]) * inv;
                    }
                }
                let out = &mut du[mesh.cell_index(i, j, k)];
                for c in 0..5 {
                    out[c] = if dim == 2 {
                        -(parts[0][c] + parts[1][c])
                    } else {
                        -((parts[0][c] + parts[1][c]) + parts[2][c])
                    };
                }
            }
        }
    }
    let dj = jacobian_rhs(mesh, &ms.nt);
    Ok(Residual {
        du,
        dj,
        q: with_entropy.then_some(qs),
    })
}

/// Cellwise entropy production `Vᵢᵀ d(JU)ᵢ/dt - φᵢ dJᵢ/dt + Σ_k δ_k[q]ᵢ/Δξ_k`.
///
/// It vanishes to roundoff for the entropy conservative flux and is
/// nonpositive for the entropy stable one.
pub fn entropy_production(
    mesh: &StructuredMesh,
    ms: &MetricSet,
    prim: &[PrimitiveState],
    cfg: &SolverConfig,
) -> Result<Vec<f64>> {
    let res = rhs(mesh, ms, prim, cfg, true)?;
    let q = res.q.as_ref().expect("requested");
    let divq = face_divergence(mesh, q);
    Ok(prim
        .iter()
        .enumerate()
        .map(|(c, p)| {
            let b = entropy_bundle(p, &cfg.gas);
            let vdu: f64 = (0..5).map(|l| b.v[l] * res.du[c][l]).sum();
            vdu - b.phi * res.dj[c] + divq[c]
        })
        .collect())
}

/// Net outward entropy flux `Σ ± q ∏Δξ / Δξ_k` over non-periodic boundary faces.
pub fn boundary_entropy_flux(mesh: &StructuredMesh, q: &FaceField<f64>) -> f64 {
    let dxi = mesh.dxi();
    let mut total = 0.0;
    for d in 0..mesh.dim() {
        if mesh.period()[d].is_some() {
            continue;
        }
        let w = mesh.cell_measure() / dxi[d];
        let fd = mesh.face_dims(d);
        for k in 0..fd[2] {
            for j in 0..fd[1] {
                for i in 0..fd[0] {
                    let p = [i, j, k];
                    let s = if p[d] == 0 {
                        -1.0
                    } else if p[d] == fd[d] - 1 {
                        1.0
                    } else {
                        continue;
                    };
                    total += s * w * q[d][mesh.face_index(d, i, j, k)];
                }
            }
        }
    }
    total
}

/// `Σ_i J_i η(U_i) ∏Δξ_k`.
pub fn total_entropy(mesh: &StructuredMesh, sol: &SolutionField, gas: &GasModel) -> f64 {
    let s: f64 = sol
        .prim
        .iter()
        .zip(&sol.jac)
        .map(|(p, j)| j * entropy_bundle(p, gas).eta)
        .sum();
    s * mesh.cell_measure()
}

/// Per direction, `max_i max_faces L max|λ±| / J_i`.
pub fn wave_speeds(
    mesh: &StructuredMesh,
    normals: &FaceField<[f64; 3]>,
    jac: &[f64],
    prim: &[PrimitiveState],
    gas: &GasModel,
) -> [f64; 3] {
    let n = mesh.cells();
    let mut out = [0.0; 3];
    for d in 0..mesh.dim() {
        let mut best: f64 = 0.0;
        for k in 0..n[2] {
            for j in 0..n[1] {
                for i in 0..n[0] {
                    let c = mesh.cell_index(i, j, k);
                    let p = &prim[c];
                    let mut hi = [i, j, k];
                    hi[d] += 1;
                    let mut r: f64 = 0.0;
                    for f in [
                        mesh.face_index(d, i, j, k),
                        mesh.face_index(d, hi[0], hi[1], hi[2]),
                    ] {
                        let nv = normals[d][f];
                        let len = ((nv[0] * nv[0] + nv[1] * nv[1]) + nv[2] * nv[2]).sqrt();
                        if len == 0.0 {
                            continue;
                        }
                        let vn = ((p.v[0] * nv[0] + p.v[1] * nv[1]) + p.v[2] * nv[2]) / len;
                        let (lm, lp) = directional_speeds(p, gas, vn);
                        r = r.max(len * lm.abs().max(lp.abs()));
                    }
                    best = best.max(r / jac[c]);
                }
            }
        }
        out[d] = best;
    }
    out
}

/// Per direction, `max_i max_faces |δx̄ · n| / J_i` for node displacements `disp`.
fn displacement_speeds(
    mesh: &StructuredMesh,
    normals: &FaceField<[f64; 3]>,
    jac: &[f64],
    disp: &[[f64; 3]],
) -> [f64; 3] {
    let mut moved = mesh.clone();
    moved.velocities = disp.to_vec();
    let face = crate::metrics::temporal_metrics_vcl1(&moved, normals);
    let n = mesh.cells();
    let mut out = [0.0; 3];
    for d in 0..mesh.dim() {
        let mut best: f64 = 0.0;
        for k in 0..n[2] {
            for j in 0..n[1] {
                for i in 0..n[0] {
                    let c = mesh.cell_index(i, j, k);
                    let mut hi = [i, j, k];
                    hi[d] += 1;
                    let a = face[d][mesh.face_index(d, i, j, k)].abs();
                    let b = face[d][mesh.face_index(d, hi[0], hi[1], hi[2])].abs();
                    best = best.max(a.max(b) / jac[c]);
                }
            }
        }
        out[d] = best;
    }
    out
}

/// `CFL / Σ_k max_i(ϱ_{k,i} / Δξ_k)` on a fixed mesh.
pub fn cfl_dt(mesh: &StructuredMesh, sol: &SolutionField, gas: &GasModel, cfl: f64) -> f64 {
    let normals = compute_scl_metrics(mesh);
    let s = wave_speeds(mesh, &normals, &sol.jac, &sol.prim, gas);
    let dxi = mesh.dxi();
    let total: f64 = (0..mesh.dim()).map(|d| s[d] / dxi[d]).sum();
    cfl / total
}

/// Mesh motion over one step.
#[derive(Debug, Clone)]
pub enum Motion {
    Static,
    /// Redistribution driven by the monitor of the current solution.
    Adapt,
    /// Given node displacements, subject to the same time step control.
    Prescribed(Vec<[f64; 3]>),
}

/// Primitive states from `(JU)/J`, with the failing cell attached to errors.
pub fn recover(
    mesh: &StructuredMesh,
    ju: &[Vec5],
    jac: &[f64],
    gas: &GasModel,
    t: f64,
) -> Result<Vec<PrimitiveState>> {
    check_positive(mesh, jac)?;
    ju.iter()
        .zip(jac)
        .enumerate()
        .map(|(c, (u, j))| {
            let cons = ConservedState::from_array(&u.map(|x| x / j));
            cons_to_prim(&cons, gas).map_err(|e| e.at_cell(t, cell_of(mesh, c)))
        })
        .collect()
}

fn axpy(out: &mut [Vec5], a: f64, x: &[Vec5], b: f64, y: &[Vec5], c: f64, dy: &[Vec5]) {
    for ((o, xi), (yi, di)) in out.iter_mut().zip(x).zip(y.iter().zip(dy)) {
        for l in 0..5 {
            o[l] = a * xi[l] + b * (yi[l] + c * di[l]);
        }
    }
}

fn axpy_scalar(out: &mut [f64], a: f64, x: &[f64], b: f64, y: &[f64], c: f64, dy: &[f64]) {
    for ((o, xi), (yi, di)) in out.iter_mut().zip(x).zip(y.iter().zip(dy)) {
        *o = a * xi + b * (yi + c * di);
    }
}

/// One SSP Runge-Kutta step from `t`, not passing `t_final`.
pub fn step_ssprk(
    sol: &SolutionField,
    mesh: &StructuredMesh,
    t: f64,
    t_final: f64,
    cfg: &SolverConfig,
    motion: Motion,
) -> Result<(SolutionField, StructuredMesh, StepReport)> {
    let dim = mesh.dim();
    let dxi = mesh.dxi();
    let normals = compute_scl_metrics(mesh);
    let speeds = wave_speeds(mesh, &normals, &sol.jac, &sol.prim, &cfg.gas);
    let s_static: f64 = (0..dim).map(|d| speeds[d] / dxi[d]).sum();
    let disp = match motion {
        Motion::Static => None,
        Motion::Adapt if !cfg.adapt.enabled => None,
        Motion::Adapt => {
            let sigma: Vec<f64> = sol
                .prim
                .iter()
                .map(|p| cfg.adapt.sigma.eval(p.rho))
                .collect();
            Some(adapt_displacement(mesh, &sigma, &cfg.adapt))
        }
        Motion::Prescribed(d) => Some(d),
    };
    let mut budget = 0.0;
    let mut mesh_scale = 1.0;
    if let Some(d) = &disp {
        let m = displacement_speeds(mesh, &normals, &sol.jac, d);
        let total: f64 = (0..dim).map(|k| m[k] / dxi[k]).sum();
        budget = total;
        if total > 0.5 * cfg.cfl {
            mesh_scale = 0.5 * cfg.cfl / total;
            budget = 0.5 * cfg.cfl;
        }
    }
    let dt_cfl = if s_static > 0.0 {
        (cfg.cfl - budget) / s_static
    } else {
        t_final - t
    };
    let dt = dt_cfl.min(t_final - t);
    if !(dt > 1e-14 * t.abs().max(1.0)) || !dt.is_finite() {
        return Err(Error::DtUnderflow(dt));
    }
    let mut base = mesh.clone();
    match &disp {
        Some(d) => {
            let s = mesh_scale / dt_cfl;
            for (v, x) in base.velocities.iter_mut().zip(d) {
                *v = [s * x[0], s * x[1], s * x[2]];
            }
        }
        None => base.velocities.iter_mut().for_each(|v| *v = [0.0; 3]),
    }
    base.enforce_periodicity();
    let moving = disp.is_some();
    let traj = (moving && cfg.vcl == Vcl::Vcl2).then(|| VclTrajectory::new(&base, t, dt));

    let mut boundary_q = 0.0;
    let mut eval = |prim: &[PrimitiveState], ts: f64, first: bool| -> Result<Residual> {
        let stage = if moving {
            base.advanced(ts - t)
        } else {
            base.clone()
        };
        let ms = match &traj {
            Some(tr) => MetricSet::vcl2(&stage, tr, ts),
            None => MetricSet::vcl1(&stage),
        };
        let track = first && (0..dim).any(|d| stage.period()[d].is_none());
        let res = rhs(&stage, &ms, prim, cfg, track).map_err(|e| match e {
            Error::Cell { cell, source, .. } => Error::Cell {
                time: ts,
                cell,
                source,
            },
            other => other,
        })?;
        if let Some(q) = &res.q {
            boundary_q = boundary_entropy_flux(&stage, q);
        }
        Ok(res)
    };

    let nc = sol.ju.len();
    let u0 = &sol.ju;
    let j0 = &sol.jac;
    let r0 = eval(&sol.prim, t, true)?;
    let mut u1 = vec![[0.0; 5]; nc];
    let mut j1 = vec![0.0; nc];
    axpy(&mut u1, 0.0, u0, 1.0, u0, dt, &r0.du);
    axpy_scalar(&mut j1, 0.0, j0, 1.0, j0, dt, &r0.dj);
    let p1 = recover(mesh, &u1, &j1, &cfg.gas, t + dt)?;
    let r1 = eval(&p1, t + dt, false)?;
    let (ju, jac) = match cfg.rk {
        RkOrder::Rk2 => {
            let mut u = vec![[0.0; 5]; nc];
            let mut j = vec![0.0; nc];
            axpy(&mut u, 0.5, u0, 0.5, &u1, dt, &r1.du);
            axpy_scalar(&mut j, 0.5, j0, 0.5, &j1, dt, &r1.dj);
            (u, j)
        }
        RkOrder::Rk3 => {
            let mut u2 = vec![[0.0; 5]; nc];
            let mut j2 = vec![0.0; nc];
            axpy(&mut u2, 0.75, u0, 0.25, &u1, dt, &r1.du);
            axpy_scalar(&mut j2, 0.75, j0, 0.25, &j1, dt, &r1.dj);
            let p2 = recover(mesh, &u2, &j2, &cfg.gas, t + 0.5 * dt)?;
            let r2 = eval(&p2, t + 0.5 * dt, false)?;
            let mut u = vec![[0.0; 5]; nc];
            let mut j = vec![0.0; nc];
            axpy(&mut u, 1.0 / 3.0, u0, 2.0 / 3.0, &u2, dt, &r2.du);
            axpy_scalar(&mut j, 1.0 / 3.0, j0, 2.0 / 3.0, &j2, dt, &r2.dj);
            (u, j)
        }
    };
    let t_new = if dt == t_final - t { t_final } else { t + dt };
    let prim = recover(mesh, &ju, &jac, &cfg.gas, t_new)?;
    let mut next_mesh = if moving { base.advanced(dt) } else { base };
    next_mesh.enforce_periodicity();
    let next = SolutionField { ju, jac, prim };
    let report = StepReport {
        dt,
        t: t_new,
        total_entropy: total_entropy(&next_mesh, &next, &cfg.gas),
        entropy_flux_boundary: boundary_q,
        max_wavespeed: speeds,
        mesh_scale,
    };
    Ok((next, next_mesh, report))
}

/// Mesh, solution and clock of a running simulation.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub mesh: StructuredMesh,
    pub sol: SolutionField,
    pub t: f64,
    pub steps: usize,
    pub cfg: SolverConfig,
}

impl Simulation {
    /// Samples `init` at cell centres, after the configured number of
    /// redistribution rounds on the initial data when adaptation is on.
    pub fn new(
        mut mesh: StructuredMesh,
        init: &dyn Fn([f64; 3]) -> PrimitiveState,
        cfg: SolverConfig,
    ) -> Result<Simulation> {
        for d in 0..mesh.dim() {
            let periodic = mesh.period()[d].is_some();
            for side in cfg.boundaries[d] {
                if (side == BoundaryKind::Periodic) != periodic {
                    return Err(Error::Invalid(format!(
                        "boundary kind in direction {d} does not match the mesh periodicity"
                    )));
                }
            }
        }
        if !(cfg.cfl > 0.0 && cfg.cfl < 1.0) {
            return Err(Error::Invalid(format!(
                "cfl must lie in (0, 1), got {}",
                cfg.cfl
            )));
        }
        let sample = |m: &StructuredMesh| -> Result<Vec<PrimitiveState>> {
            m.cell_centers()
                .into_iter()
                .map(|c| {
                    let p = init(c);
                    p.validate()?;
                    Ok(p)
                })
                .collect()
        };
        if cfg.adapt.enabled {
            for _ in 0..cfg.adapt.initial_rounds {
                let prim = sample(&mesh)?;
                let sigma: Vec<f64> = prim.iter().map(|p| cfg.adapt.sigma.eval(p.rho)).collect();
                let disp = adapt_displacement(&mesh, &sigma, &cfg.adapt);
                for (x, d) in mesh.nodes.iter_mut().zip(&disp) {
                    for l in 0..3 {
                        x[l] += d[l];
                    }
                }
                mesh.enforce_periodicity();
            }
        }
        let jac = jacobian_direct(&mesh)?;
        let prim = sample(&mesh)?;
        let sol = SolutionField::from_primitives(prim, jac, &cfg.gas)?;
        Ok(Simulation {
            mesh,
            sol,
            t: 0.0,
            steps: 0,
            cfg,
        })
    }

    pub fn step(&mut self, t_final: f64) -> Result<StepReport> {
        self.step_with(t_final, Motion::Adapt)
    }

    pub fn step_with(&mut self, t_final: f64, motion: Motion) -> Result<StepReport> {
        let (sol, mesh, report) =
            step_ssprk(&self.sol, &self.mesh, self.t, t_final, &self.cfg, motion)?;
        self.sol = sol;
        self.mesh = mesh;
        self.t = report.t;
        self.steps += 1;
        Ok(report)
    }

    /// Steps until `t_final`, calling `observe` after every step.
    pub fn run_until(
        &mut self,
        t_final: f64,
        mut observe: impl FnMut(&Simulation, &StepReport),
    ) -> Result<()> {
        while self.t < t_final {
            let r = self.step(t_final)?;
            observe(self, &r);
        }
        Ok(())
    }

    pub fn total_entropy(&self) -> f64 {
        total_entropy(&self.mesh, &self.sol, &self.cfg.gas)
    }

    /// `Σ_i |J_i - J̃_i| ∏Δξ_k` between the evolved and the geometric Jacobians.
    pub fn jacobian_discrepancy(&self) -> f64 {
        let direct = crate::metrics::jacobian_unchecked(&self.mesh);
        let s: f64 = direct
            .iter()
            .zip(&self.sol.jac)
            .map(|(a, b)| (a - b).abs())
            .sum();
        s * self.mesh.cell_measure()
    }

    /// `Σ_i (JU)_i ∏Δξ_k`.
    pub fn conserved_totals(&self) -> Vec5 {
        let mut s = [0.0; 5];
        for u in &self.sol.ju {
            for l in 0..5 {
                s[l] += u[l];
            }
        }
        s.map(|x| x * self.mesh.cell_measure())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Domain;

    fn periodic_cfg(dim: usize) -> SolverConfig {
        SolverConfig::new(dim, [[BoundaryKind::Periodic; 2]; 3])
    }

    fn unit_periodic(dim: usize, n: usize) -> StructuredMesh {
        let d = Domain::new([0.0; 3], [1.0; 3]).unwrap();
        StructuredMesh::uniform(dim, [n; 3], &d, [true; 3]).unwrap()
    }

    #[test]
    fn parses_enumerations() {
        assert_eq!("ES2".parse::<FluxKind>().unwrap(), FluxKind::Es2);
        assert_eq!("rk3".parse::<RkOrder>().unwrap(), RkOrder::Rk3);
        assert!("weno".parse::<FluxKind>().is_err());
    }

    #[test]
    fn rest_state_has_zero_rhs() {
        let m = unit_periodic(2, 6);
        let cfg = periodic_cfg(2);
        let prim = vec![PrimitiveState::at_rest(1.0, 1.0); 36];
        let ms = MetricSet::vcl1(&m);
        let r = rhs(&m, &ms, &prim, &cfg, false).unwrap();
        assert!(r.du.iter().flatten().all(|x| x.abs() < 1e-13));
    }

    #[test]
    fn static_rest_dt_pattern() {
        let m = unit_periodic(2, 8);
        let gas = GasModel::default();
        let p = PrimitiveState::at_rest(1.0, 1.0);
        let sol = SolutionField::from_primitives(vec![p; 64], vec![1.0; 64], &gas).unwrap();
        let cs = crate::physics::sound_speed(&p, &gas);
        let dt = cfl_dt(&m, &sol, &gas, 0.4);
        let want = 0.4 / (2.0 * (1.0 / 8.0) * cs / (1.0 / 8.0) * 8.0);
        assert!((dt - want).abs() < 1e-14 * want, "{dt} {want}");
    }

    #[test]
    fn periodic_advection_conserves_totals() {
        let m = unit_periodic(2, 12);
        let mut cfg = periodic_cfg(2);
        cfg.adapt.alpha = 5.0;
        cfg.adapt.initial_rounds = 2;
        let init = |x: [f64; 3]| {
            let r = 1.0 + 0.3 * (2.0 * std::f64::consts::PI * (x[0] + x[1])).sin();
            PrimitiveState::new(r, [0.3, -0.2, 0.0], 1.0)
        };
        let mut sim = Simulation::new(m, &init, cfg).unwrap();
        let before = sim.conserved_totals();
        for _ in 0..5 {
            sim.step(1.0).unwrap();
        }
        let after = sim.conserved_totals();
        for l in 0..5 {
            assert!((before[l] - after[l]).abs() <= 1e-13 * before[l].abs().max(1.0));
        }
        assert!(sim.jacobian_discrepancy() < 1e-13);
    }

    fn wavy_field(dim: usize, n: usize) -> (StructuredMesh, Vec<PrimitiveState>) {
        let mut m = unit_periodic(dim, n);
        for (x, v) in m.nodes.iter_mut().zip(m.velocities.iter_mut()) {
            let tau = 2.0 * std::f64::consts::PI;
            let s = (tau * x[0]).sin() * (tau * x[1]).cos();
            *v = [0.3 * s, -0.2 * (tau * (x[0] + x[2])).sin(), 0.1 * s];
            *x = [x[0] + 0.02 * s, x[1] + 0.015 * (tau * x[0]).sin(), x[2]];
            if dim == 2 {
                v[2] = 0.0;
            }
        }
        m.enforce_periodicity();
        let prim = m
            .cell_centers()
            .iter()
            .map(|c| {
                let tau = 2.0 * std::f64::consts::PI;
                let a = (tau * (c[0] + 2.0 * c[1] + c[2])).sin();
                PrimitiveState::new(
                    1.0 + 0.4 * a,
                    [0.5 * a, 0.3, if dim == 3 { -0.2 * a } else { 0.0 }],
                    1.0 + 0.3 * (tau * c[0]).cos(),
                )
            })
            .collect();
        (m, prim)
    }

    #[test]
    fn entropy_production_signs() {
        for dim in [2, 3] {
            let (m, prim) = wavy_field(dim, 8);
            let mut cfg = periodic_cfg(dim);
            let ms = MetricSet::vcl1(&m);
            cfg.flux = FluxKind::Ec;
            let ec = entropy_production(&m, &ms, &prim, &cfg).unwrap();
            let worst = ec.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
            assert!(worst < 1e-11, "ec {worst}");
            cfg.flux = FluxKind::Es2;
            let es = entropy_production(&m, &ms, &prim, &cfg).unwrap();
            let top = es.iter().cloned().fold(f64::MIN, f64::max);
            assert!(top <= 1e-12, "es {top}");
            assert!(es.iter().any(|&x| x < -1e-6));
        }
    }
}
