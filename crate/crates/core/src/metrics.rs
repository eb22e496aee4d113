//! Conservative metrics, temporal metrics and cell Jacobians.
//!
//! Face metrics of direction `k` are stored per face, indexed like
//! [`StructuredMesh::face_index`]. Spatial metrics `J ∂ξ_k/∂x_l` are
//! evaluated by the conservative (difference of averaged products) form,
//! which for a face with corner nodes `p00, p10, p01, p11` equals
//! `½ (p11 - p00) × (p01 - p10) / (Δξ_a Δξ_b)`; the cross-product form is
//! used because it is translation invariant in floating point.

use crate::error::{Error, Result};
use crate::mesh::StructuredMesh;

/// Per-direction face values; directions beyond the mesh dimension are empty.
pub type FaceField<T> = [Vec<T>; 3];

/// Variant of the discrete volume conservation law.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Vcl {
    /// Temporal metrics from face-averaged node velocities.
    Vcl1,
    /// Temporal metrics from the time-polynomial of the face potentials `A_k`.
    Vcl2,
}

impl std::str::FromStr for Vcl {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "vcl1" => Ok(Vcl::Vcl1),
            "vcl2" => Ok(Vcl::Vcl2),
            _ => Err(Error::Invalid(format!(
                "unknown VCL variant '{s}' (expected vcl1 or vcl2)"
            ))),
        }
    }
}

impl std::fmt::Display for Vcl {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Vcl::Vcl1 => "vcl1",
            Vcl::Vcl2 => "vcl2",
        })
    }
}

/// Metrics of one mesh configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSet {
    /// `J ∂ξ_k/∂x_l` per face.
    pub normals: FaceField<[f64; 3]>,
    /// `J ∂ξ_k/∂t` per face.
    pub nt: FaceField<f64>,
}

const CYCLIC: [(usize, usize); 3] = [(1, 2), (2, 0), (0, 1)];

#[inline]
fn unit(dir: usize) -> [usize; 3] {
    let mut e = [0; 3];
    e[dir] = 1;
    e
}

#[inline]
fn add(a: [usize; 3], b: [usize; 3]) -> [usize; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn for_each_face(mesh: &StructuredMesh, dir: usize, mut f: impl FnMut([usize; 3], usize)) {
    let d = mesh.face_dims(dir);
    let mut idx = 0;
    for k in 0..d[2] {
        for j in 0..d[1] {
            for i in 0..d[0] {
                f([i, j, k], idx);
                idx += 1;
            }
        }
    }
}

fn node_at(mesh: &StructuredMesh, p: [usize; 3]) -> [f64; 3] {
    mesh.node(p[0], p[1], p[2])
}

fn velocity_at(mesh: &StructuredMesh, p: [usize; 3]) -> [f64; 3] {
    mesh.velocities[mesh.node_index(p[0], p[1], p[2])]
}

/// Copies the first face onto the last one along periodic directions.
fn wrap_periodic<T: Copy>(mesh: &StructuredMesh, dir: usize, field: &mut [T]) {
    if mesh.period()[dir].is_none() {
        return;
    }
    let d = mesh.face_dims(dir);
    for k in 0..d[2] {
        for j in 0..d[1] {
            for i in 0..d[0] {
                let idx = [i, j, k];
                if idx[dir] == d[dir] - 1 {
                    let mut src = idx;
                    src[dir] = 0;
                    field[mesh.face_index(dir, i, j, k)] =
                        field[mesh.face_index(dir, src[0], src[1], src[2])];
                }
            }
        }
    }
}

/// `J ∂ξ_k/∂x_l` at every face of every active direction.
pub fn compute_scl_metrics(mesh: &StructuredMesh) -> FaceField<[f64; 3]> {
    let dim = mesh.dim();
    let dxi = mesh.dxi();
    let mut out: FaceField<[f64; 3]> = [Vec::new(), Vec::new(), Vec::new()];
    for dir in 0..dim {
        let mut v = vec![[0.0; 3]; mesh.num_faces(dir)];
        if dim == 2 {
            let t = 1 - dir;
            let inv = 1.0 / dxi[t];
            for_each_face(mesh, dir, |p, idx| {
                let a = node_at(mesh, p);
                let b = node_at(mesh, add(p, unit(t)));
                let d1 = b[0] - a[0];
                let d2 = b[1] - a[1];
                v[idx] = if dir == 0 {
                    [d2 * inv, -d1 * inv, 0.0]
                } else {
                    [-d2 * inv, d1 * inv, 0.0]
                };
            });
        } else {
            let (a, b) = CYCLIC[dir];
            let scale = 0.5 / (dxi[a] * dxi[b]);
            for_each_face(mesh, dir, |p, idx| {
                let p00 = node_at(mesh, p);
                let p11 = node_at(mesh, add(add(p, unit(a)), unit(b)));
                let p10 = node_at(mesh, add(p, unit(a)));
                let p01 = node_at(mesh, add(p, unit(b)));
                let d1 = [p11[0] - p00[0], p11[1] - p00[1], p11[2] - p00[2]];
                let d2 = [p01[0] - p10[0], p01[1] - p10[1], p01[2] - p10[2]];
                v[idx] = [
                    scale * (d1[1] * d2[2] - d1[2] * d2[1]),
                    scale * (d1[2] * d2[0] - d1[0] * d2[2]),
                    scale * (d1[0] * d2[1] - d1[1] * d2[0]),
                ];
            });
        }
        wrap_periodic(mesh, dir, &mut v);
        out[dir] = v;
    }
    out
}

/// Discrete divergence `Σ_k δ_k[f_k]_i / Δξ_k` of a face field, per cell.
pub fn face_divergence(mesh: &StructuredMesh, field: &FaceField<f64>) -> Vec<f64> {
    let n = mesh.cells();
    let dxi = mesh.dxi();
    let mut out = vec![0.0; mesh.num_cells()];
    for k in 0..n[2] {
        for j in 0..n[1] {
            for i in 0..n[0] {
                let c = mesh.cell_index(i, j, k);
                let mut s = [0.0; 3];
                for dir in 0..mesh.dim() {
                    let mut hi = [i, j, k];
                    hi[dir] += 1;
                    let fp = field[dir][mesh.face_index(dir, hi[0], hi[1], hi[2])];
                    let fm = field[dir][mesh.face_index(dir, i, j, k)];
                    s[dir] = (fp - fm) / dxi[dir];
                }
                out[c] = if mesh.dim() == 2 {
                    s[0] + s[1]
                } else {
                    (s[0] + s[1]) + s[2]
                };
            }
        }
    }
    out
}

/// Per-cell residual `Σ_k δ_k[J ∂ξ_k/∂x_l] / Δξ_k` for each `l`.
pub fn scl_residual(mesh: &StructuredMesh, normals: &FaceField<[f64; 3]>) -> Vec<[f64; 3]> {
    let mut out = vec![[0.0; 3]; mesh.num_cells()];
    for l in 0..3 {
        let comp: FaceField<f64> = [0, 1, 2].map(|d| normals[d].iter().map(|v| v[l]).collect());
        for (o, r) in out.iter_mut().zip(face_divergence(mesh, &comp)) {
            o[l] = r;
        }
    }
    out
}

/// Face potentials `A_k = -(J ∂ξ_k/∂x_d) x̄_d`, `d` the last coordinate and
/// `x̄_d` the face average, so that `J = -Σ_k δ_k[A_k] / Δξ_k`.
pub fn face_potentials(mesh: &StructuredMesh) -> FaceField<f64> {
    let dim = mesh.dim();
    let last = dim - 1;
    let normals = raw_normals(mesh);
    let mut out: FaceField<f64> = [Vec::new(), Vec::new(), Vec::new()];
    for dir in 0..dim {
        let mut v = vec![0.0; mesh.num_faces(dir)];
        for_each_face(mesh, dir, |p, idx| {
            let xbar = if dim == 2 {
                let t = 1 - dir;
                0.5 * (node_at(mesh, p)[last] + node_at(mesh, add(p, unit(t)))[last])
            } else {
                let (a, b) = CYCLIC[dir];
                let p00 = node_at(mesh, p)[last];
                let p11 = node_at(mesh, add(add(p, unit(a)), unit(b)))[last];
                let p10 = node_at(mesh, add(p, unit(a)))[last];
                let p01 = node_at(mesh, add(p, unit(b)))[last];
                0.25 * ((p00 + p11) + (p10 + p01))
            };
            v[idx] = -normals[dir][idx][last] * xbar;
        });
        out[dir] = v;
    }
    out
}

/// Normals without the periodic face copy (exact node geometry everywhere).
fn raw_normals(mesh: &StructuredMesh) -> FaceField<[f64; 3]> {
    if mesh.period().iter().all(|p| p.is_none()) {
        return compute_scl_metrics(mesh);
    }
    let mut plain = mesh.clone();
    plain.clear_period();
    compute_scl_metrics(&plain)
}

/// Cell Jacobians `J̃` from the node geometry.
///
/// In 2D this is the quadrilateral area `½ (p11 - p00) × (p01 - p10)`, which
/// equals `-Σ_k δ_k[A_k] / Δξ_k` and is symmetric in the two coordinates.
pub fn jacobian_direct(mesh: &StructuredMesh) -> Result<Vec<f64>> {
    let jac = jacobian_unchecked(mesh);
    check_positive(mesh, &jac)?;
    Ok(jac)
}

pub(crate) fn jacobian_unchecked(mesh: &StructuredMesh) -> Vec<f64> {
    if mesh.dim() == 2 {
        let n = mesh.cells();
        let dxi = mesh.dxi();
        let scale = 0.5 / (dxi[0] * dxi[1]);
        let mut out = Vec::with_capacity(mesh.num_cells());
        for j in 0..n[1] {
            for i in 0..n[0] {
                let p00 = mesh.node(i, j, 0);
                let p11 = mesh.node(i + 1, j + 1, 0);
                let p10 = mesh.node(i + 1, j, 0);
                let p01 = mesh.node(i, j + 1, 0);
                let c =
                    (p11[0] - p00[0]) * (p01[1] - p10[1]) - (p11[1] - p00[1]) * (p01[0] - p10[0]);
                out.push(scale * c);
            }
        }
        out
    } else {
        face_divergence(mesh, &face_potentials(mesh))
            .into_iter()
            .map(|x| -x)
            .collect()
    }
}

pub(crate) fn check_positive(mesh: &StructuredMesh, jac: &[f64]) -> Result<()> {
    let n = mesh.cells();
    for (c, &j) in jac.iter().enumerate() {
        if !(j > 0.0) {
            let cell = [c % n[0], (c / n[0]) % n[1], c / (n[0] * n[1])];
            return Err(Error::TangledMesh { cell, jacobian: j });
        }
    }
    Ok(())
}

/// Averages of the face-corner node velocities.
fn face_velocities(mesh: &StructuredMesh, dir: usize) -> Vec<[f64; 3]> {
    let mut v = vec![[0.0; 3]; mesh.num_faces(dir)];
    if mesh.dim() == 2 {
        let t = 1 - dir;
        for_each_face(mesh, dir, |p, idx| {
            let a = velocity_at(mesh, p);
            let b = velocity_at(mesh, add(p, unit(t)));
            v[idx] = [
                0.5 * (a[0] + b[0]),
                0.5 * (a[1] + b[1]),
                0.5 * (a[2] + b[2]),
            ];
        });
    } else {
        let (a, b) = CYCLIC[dir];
        for_each_face(mesh, dir, |p, idx| {
            let v00 = velocity_at(mesh, p);
            let v11 = velocity_at(mesh, add(add(p, unit(a)), unit(b)));
            let v10 = velocity_at(mesh, add(p, unit(a)));
            let v01 = velocity_at(mesh, add(p, unit(b)));
            for l in 0..3 {
                v[idx][l] = 0.25 * ((v00[l] + v11[l]) + (v10[l] + v01[l]));
            }
        });
    }
    v
}

/// `J ∂ξ_k/∂t = -ẋ_face · (J ∂ξ_k/∂x)` with `ẋ_face` the mean of the
/// face-corner node velocities.
pub fn temporal_metrics_vcl1(
    mesh: &StructuredMesh,
    normals: &FaceField<[f64; 3]>,
) -> FaceField<f64> {
    let mut out: FaceField<f64> = [Vec::new(), Vec::new(), Vec::new()];
    for dir in 0..mesh.dim() {
        let fv = face_velocities(mesh, dir);
        let mut v: Vec<f64> = fv
            .iter()
            .zip(&normals[dir])
            .map(|(x, n)| -((x[0] * n[0] + x[1] * n[1]) + x[2] * n[2]))
            .collect();
        wrap_periodic(mesh, dir, &mut v);
        out[dir] = v;
    }
    out
}

/// `dJ_i/dt = -Σ_k δ_k[J ∂ξ_k/∂t]_i / Δξ_k`.
pub fn jacobian_rhs(mesh: &StructuredMesh, nt: &FaceField<f64>) -> Vec<f64> {
    face_divergence(mesh, nt).into_iter().map(|x| -x).collect()
}

/// Face potentials at `t_n`, `t_n + Δt/3`, `t_n + 2Δt/3` and `t_n + Δt` of
/// the linear node trajectory `x(t) = xⁿ + (t - t_n) ẋ`.
#[derive(Debug, Clone)]
pub struct VclTrajectory {
    pub t0: f64,
    pub dt: f64,
    pub snapshots: [FaceField<f64>; 4],
}

impl VclTrajectory {
    pub fn new(mesh: &StructuredMesh, t0: f64, dt: f64) -> Self {
        let snap = |s: f64| face_potentials(&mesh.advanced(s));
        VclTrajectory {
            t0,
            dt,
            snapshots: [snap(0.0), snap(dt / 3.0), snap(2.0 * dt / 3.0), snap(dt)],
        }
    }

    /// `∂A_k/∂t` at time `t` from the cubic through the four snapshots.
    pub fn potential_rate(&self, t: f64) -> FaceField<f64> {
        let h = self.dt;
        let tau = t - self.t0;
        let c = 1.0 / (2.0 * h * h * h);
        let [a0, a1, a2, a3] = &self.snapshots;
        let mut out: FaceField<f64> = [Vec::new(), Vec::new(), Vec::new()];
        for dir in 0..3 {
            out[dir] = (0..a0[dir].len())
                .map(|i| {
                    let (p0, p1, p2, p3) = (a0[dir][i], a1[dir][i], a2[dir][i], a3[dir][i]);
                    c * (h * h * (-11.0 * p0 + 18.0 * p1 - 9.0 * p2 + 2.0 * p3)
                        + 18.0 * h * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * tau
                        - 27.0 * (p0 - 3.0 * p1 + 3.0 * p2 - p3) * tau * tau)
                })
                .collect();
        }
        out
    }
}

/// Temporal metrics of the second VCL variant at time `t`, for the mesh
/// positioned on its trajectory at `t`.
///
/// `∂A_k/∂t` is completed by the discrete curl of edge potentials built
/// from the node positions and velocities; the curl cancels in the
/// divergence, so `dJ/dt` depends on `∂A_k/∂t` alone, while the face values
/// stay consistent approximations of `J ∂ξ_k/∂t`.
pub fn temporal_metrics_vcl2(
    stage: &StructuredMesh,
    traj: &VclTrajectory,
    t: f64,
) -> FaceField<f64> {
    let mut nt = traj.potential_rate(t);
    let dxi = stage.dxi();
    if stage.dim() == 2 {
        for dir in 0..2 {
            let tdir = 1 - dir;
            let sign = if dir == 0 { -1.0 } else { 1.0 };
            let inv = sign / dxi[tdir];
            let field = &mut nt[dir];
            for_each_face(stage, dir, |p, idx| {
                let g = |q: [usize; 3]| velocity_at(stage, q)[0] * node_at(stage, q)[1];
                field[idx] += inv * (g(add(p, unit(tdir))) - g(p));
            });
        }
    } else {
        let edges = [0, 1, 2].map(|c| edge_potentials(stage, c));
        for dir in 0..3 {
            let (a, b) = CYCLIC[dir];
            let field = &mut nt[dir];
            for_each_face(stage, dir, |p, idx| {
                let eb = |q: [usize; 3]| edges[b][edge_index(stage, b, q)];
                let ea = |q: [usize; 3]| edges[a][edge_index(stage, a, q)];
                let curl =
                    (eb(add(p, unit(a))) - eb(p)) / dxi[a] - (ea(add(p, unit(b))) - ea(p)) / dxi[b];
                field[idx] += curl;
            });
        }
    }
    for dir in 0..stage.dim() {
        wrap_periodic(stage, dir, &mut nt[dir]);
    }
    nt
}

fn edge_dims(mesh: &StructuredMesh, c: usize) -> [usize; 3] {
    let mut d = mesh.node_dims();
    d[c] -= 1;
    d
}

fn edge_index(mesh: &StructuredMesh, c: usize, p: [usize; 3]) -> usize {
    let d = edge_dims(mesh, c);
    p[0] + d[0] * (p[1] + d[1] * p[2])
}

/// `[avg ẋ₁ δx₂ - δx₁ avg ẋ₂] avg x₃ / Δξ_c` on the edges along `c`.
fn edge_potentials(mesh: &StructuredMesh, c: usize) -> Vec<f64> {
    let d = edge_dims(mesh, c);
    let inv = 1.0 / mesh.dxi()[c];
    let mut out = Vec::with_capacity(d[0] * d[1] * d[2]);
    for k in 0..d[2] {
        for j in 0..d[1] {
            for i in 0..d[0] {
                let p = [i, j, k];
                let q = add(p, unit(c));
                let (xp, xq) = (node_at(mesh, p), node_at(mesh, q));
                let (vp, vq) = (velocity_at(mesh, p), velocity_at(mesh, q));
                let e = (0.5 * (vp[0] + vq[0]) * (xq[1] - xp[1])
                    - (xq[0] - xp[0]) * 0.5 * (vp[1] + vq[1]))
                    * 0.5
                    * (xp[2] + xq[2]);
                out.push(e * inv);
            }
        }
    }
    out
}

impl StructuredMesh {
    pub(crate) fn clear_period(&mut self) {
        *self = StructuredMesh::from_nodes(self.dim(), self.cells(), [None; 3], self.nodes.clone())
            .map(|mut m| {
                m.velocities = self.velocities.clone();
                m
            })
            .expect("same shape");
    }
}

impl MetricSet {
    /// Spatial metrics and VCL1 temporal metrics of `mesh`.
    pub fn vcl1(mesh: &StructuredMesh) -> MetricSet {
        let normals = compute_scl_metrics(mesh);
        let nt = temporal_metrics_vcl1(mesh, &normals);
        MetricSet { normals, nt }
    }

    /// Spatial metrics of `stage` and VCL2 temporal metrics at `t`.
    pub fn vcl2(stage: &StructuredMesh, traj: &VclTrajectory, t: f64) -> MetricSet {
        MetricSet {
            normals: compute_scl_metrics(stage),
            nt: temporal_metrics_vcl2(stage, traj, t),
        }
    }
}
