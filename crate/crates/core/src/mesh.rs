//! Logically rectangular node meshes over the unit computational cube.

use crate::error::{Error, Result};

/// Axis-aligned physical box `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub lo: [f64; 3],
    pub hi: [f64; 3],
}

impl Domain {
    pub fn new(lo: [f64; 3], hi: [f64; 3]) -> Result<Self> {
        for k in 0..3 {
            if !(hi[k] > lo[k]) {
                return Err(Error::Invalid(format!(
                    "degenerate domain extent in direction {k}"
                )));
            }
        }
        Ok(Domain { lo, hi })
    }

    pub fn extent(&self, k: usize) -> f64 {
        self.hi[k] - self.lo[k]
    }
}

/// Node coordinates `x(ξ)` and velocities `ẋ` of a structured mesh.
///
/// Two-dimensional meshes have `n[2] == 1` and a single layer of nodes with
/// `x₃ = 0`. Node `(i, j, k)` sits at `ξ = (i Δξ₁, j Δξ₂, k Δξ₃)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuredMesh {
    dim: usize,
    n: [usize; 3],
    nn: [usize; 3],
    dxi: [f64; 3],
    /// Period length of each periodic direction.
    period: [Option<f64>; 3],
    pub nodes: Vec<[f64; 3]>,
    pub velocities: Vec<[f64; 3]>,
}

impl StructuredMesh {
    /// Uniform mesh of `n` cells over `domain`.
    pub fn uniform(
        dim: usize,
        n: [usize; 3],
        domain: &Domain,
        periodic: [bool; 3],
    ) -> Result<Self> {
        let mut period = [None; 3];
        for k in 0..dim.min(3) {
            if periodic[k] {
                period[k] = Some(domain.extent(k));
            }
        }
        let mut mesh = Self::empty(dim, n, period)?;
        for k in 0..mesh.nn[2] {
            for j in 0..mesh.nn[1] {
                for i in 0..mesh.nn[0] {
                    let idx = mesh.node_index(i, j, k);
                    let x1 = domain.lo[0] + domain.extent(0) * (i as f64 / n[0] as f64);
                    let x2 = domain.lo[1] + domain.extent(1) * (j as f64 / n[1] as f64);
                    let x3 = if dim == 3 {
                        domain.lo[2] + domain.extent(2) * (k as f64 / n[2] as f64)
                    } else {
                        0.0
                    };
                    mesh.nodes[idx] = [x1, x2, x3];
                }
            }
        }
        Ok(mesh)
    }

    /// Mesh with the given node coordinates (listed with `i` fastest).
    pub fn from_nodes(
        dim: usize,
        n: [usize; 3],
        period: [Option<f64>; 3],
        nodes: Vec<[f64; 3]>,
    ) -> Result<Self> {
        let mut mesh = Self::empty(dim, n, period)?;
        if nodes.len() != mesh.nodes.len() {
            return Err(Error::Invalid(format!(
                "expected {} nodes, got {}",
                mesh.nodes.len(),
                nodes.len()
            )));
        }
        mesh.nodes = nodes;
        Ok(mesh)
    }

    fn empty(dim: usize, n: [usize; 3], period: [Option<f64>; 3]) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::Invalid(format!(
                "dimension must be 2 or 3, got {dim}"
            )));
        }
        let mut n = n;
        if dim == 2 {
            n[2] = 1;
        }
        if n[..dim].iter().any(|&c| c < 2) {
            return Err(Error::Invalid(format!(
                "need at least 2 cells per direction, got {n:?}"
            )));
        }
        let nn = [n[0] + 1, n[1] + 1, if dim == 3 { n[2] + 1 } else { 1 }];
        let count = nn[0] * nn[1] * nn[2];
        let mut period = period;
        if dim == 2 {
            period[2] = None;
        }
        Ok(StructuredMesh {
            dim,
            n,
            nn,
            dxi: [
                1.0 / n[0] as f64,
                1.0 / n[1] as f64,
                if dim == 3 { 1.0 / n[2] as f64 } else { 1.0 },
            ],
            period,
            nodes: vec![[0.0; 3]; count],
            velocities: vec![[0.0; 3]; count],
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Cell counts; `n[2] == 1` in 2D.
    pub fn cells(&self) -> [usize; 3] {
        self.n
    }

    pub fn num_cells(&self) -> usize {
        self.n[0] * self.n[1] * self.n[2]
    }

    pub fn node_dims(&self) -> [usize; 3] {
        self.nn
    }

    pub fn dxi(&self) -> [f64; 3] {
        self.dxi
    }

    pub fn period(&self) -> [Option<f64>; 3] {
        self.period
    }

    /// Product of the active `Δξ_k`.
    pub fn cell_measure(&self) -> f64 {
        self.dxi[..self.dim].iter().product()
    }

    #[inline]
    pub fn node_index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.nn[0] * (j + self.nn[1] * k)
    }

    #[inline]
    pub fn cell_index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.n[0] * (j + self.n[1] * k)
    }

    #[inline]
    pub fn node(&self, i: usize, j: usize, k: usize) -> [f64; 3] {
        self.nodes[self.node_index(i, j, k)]
    }

    /// Dimensions of the face array normal to direction `dir`.
    pub fn face_dims(&self, dir: usize) -> [usize; 3] {
        let mut d = self.n;
        d[dir] += 1;
        d
    }

    #[inline]
    pub fn face_index(&self, dir: usize, i: usize, j: usize, k: usize) -> usize {
        let d = self.face_dims(dir);
        i + d[0] * (j + d[1] * k)
    }

    pub fn num_faces(&self, dir: usize) -> usize {
        let d = self.face_dims(dir);
        d[0] * d[1] * d[2]
    }

    /// Cell centre as the mean of the cell's corner nodes, summed in
    /// diagonal pairs.
    pub fn cell_center(&self, i: usize, j: usize, k: usize) -> [f64; 3] {
        let mut c = [0.0; 3];
        if self.dim == 2 {
            let a = self.node(i, j, 0);
            let b = self.node(i + 1, j + 1, 0);
            let p = self.node(i + 1, j, 0);
            let q = self.node(i, j + 1, 0);
            for l in 0..3 {
                c[l] = 0.25 * ((a[l] + b[l]) + (p[l] + q[l]));
            }
        } else {
            let n = |a: usize, b: usize, d: usize| self.node(i + a, j + b, k + d);
            let pairs = [
                (n(0, 0, 0), n(1, 1, 1)),
                (n(1, 0, 0), n(0, 1, 1)),
                (n(0, 1, 0), n(1, 0, 1)),
                (n(0, 0, 1), n(1, 1, 0)),
            ];
            for l in 0..3 {
                let s0 = pairs[0].0[l] + pairs[0].1[l];
                let s1 = pairs[1].0[l] + pairs[1].1[l];
                let s2 = pairs[2].0[l] + pairs[2].1[l];
                let s3 = pairs[3].0[l] + pairs[3].1[l];
                c[l] = 0.125 * ((s0 + s1) + (s2 + s3));
            }
        }
        c
    }

    pub fn cell_centers(&self) -> Vec<[f64; 3]> {
        let mut out = Vec::with_capacity(self.num_cells());
        for k in 0..self.n[2] {
            for j in 0..self.n[1] {
                for i in 0..self.n[0] {
                    out.push(self.cell_center(i, j, k));
                }
            }
        }
        out
    }

    /// Node coordinates at `x + s ẋ`.
    pub fn advanced(&self, s: f64) -> StructuredMesh {
        let mut m = self.clone();
        for (x, v) in m.nodes.iter_mut().zip(&self.velocities) {
            for l in 0..3 {
                x[l] += s * v[l];
            }
        }
        m
    }

    /// Restores `x(N) = x(0) + L` on periodic directions.
    pub fn enforce_periodicity(&mut self) {
        for dir in 0..self.dim {
            let Some(len) = self.period[dir] else {
                continue;
            };
            let nn = self.nn;
            for k in 0..nn[2] {
                for j in 0..nn[1] {
                    for i in 0..nn[0] {
                        let idx = [i, j, k];
                        if idx[dir] != nn[dir] - 1 {
                            continue;
                        }
                        let mut src = idx;
                        src[dir] = 0;
                        let s = self.node_index(src[0], src[1], src[2]);
                        let d = self.node_index(i, j, k);
                        let mut x = self.nodes[s];
                        x[dir] += len;
                        self.nodes[d] = x;
                        self.velocities[d] = self.velocities[s];
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_mesh_layout() {
        let d = Domain::new([0.0, -1.0, 0.0], [2.0, 1.0, 1.0]).unwrap();
        let m = StructuredMesh::uniform(2, [4, 2, 7], &d, [false; 3]).unwrap();
        assert_eq!(m.cells(), [4, 2, 1]);
        assert_eq!(m.node_dims(), [5, 3, 1]);
        assert_eq!(m.node(4, 2, 0), [2.0, 1.0, 0.0]);
        assert_eq!(m.cell_center(0, 0, 0), [0.25, -0.5, 0.0]);
        assert_eq!(m.num_faces(0), 10);
        assert_eq!(m.num_faces(1), 12);
    }

    #[test]
    fn rejects_bad_shapes() {
        let d = Domain::new([0.0; 3], [1.0; 3]).unwrap();
        assert!(StructuredMesh::uniform(4, [4, 4, 4], &d, [false; 3]).is_err());
        assert!(StructuredMesh::uniform(3, [4, 1, 4], &d, [false; 3]).is_err());
        assert!(Domain::new([0.0; 3], [1.0, 0.0, 1.0]).is_err());
    }

    #[test]
    fn periodic_copy() {
        let d = Domain::new([0.0; 3], [1.0; 3]).unwrap();
        let mut m = StructuredMesh::uniform(2, [4, 4, 1], &d, [true, false, false]).unwrap();
        let i0 = m.node_index(0, 2, 0);
        m.nodes[i0][1] += 0.01;
        m.enforce_periodicity();
        assert_eq!(m.node(4, 2, 0), [1.0, 0.51, 0.0]);
    }
}
