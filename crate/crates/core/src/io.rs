//! Run configuration, snapshot files, series output and legacy VTK.
//!
//! Configuration files are flat `key = value` text; `#` starts a comment.
//! Snapshots are line-oriented text whose floats use the shortest
//! representation that parses back to the same bits.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::adaptation::SigmaKind;
use crate::cases::{case_by_name, CaseSpec};
use crate::error::{Error, Result};
use crate::mesh::StructuredMesh;
use crate::metrics::Vcl;
use crate::physics::PrimitiveState;
use crate::solver::{FluxKind, RkOrder, SolverConfig};

/// Everything needed to reproduce one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub case: String,
    pub grid: [usize; 3],
    pub cfl: f64,
    pub flux: FluxKind,
    pub vcl: Vcl,
    pub rk: RkOrder,
    pub adapt: bool,
    pub alpha: f64,
    pub sigma: SigmaKind,
    pub filter_passes: usize,
    pub mu: usize,
    pub initial_rounds: usize,
    pub t_final: f64,
    /// Time between snapshots; 0 writes only the initial and final states.
    pub output_interval: f64,
    pub output_dir: String,
    pub vtk: bool,
}

/// Keys accepted by [`RunConfig::set`].
pub const CONFIG_KEYS: [&str; 16] = [
    "case",
    "grid",
    "cfl",
    "flux",
    "vcl",
    "rk",
    "adapt.enabled",
    "adapt.mu",
    "adapt.initial_rounds",
    "monitor.alpha",
    "monitor.sigma",
    "monitor.filter_passes",
    "t_final",
    "output.interval",
    "output.dir",
    "output.vtk",
];

fn parse_bool(v: &str) -> Option<bool> {
    match v.to_ascii_lowercase().as_str() {
        "on" | "true" | "yes" | "1" => Some(true),
        "off" | "false" | "no" | "0" => Some(false),
        _ => None,
    }
}

fn parse_grid(v: &str, dim: usize) -> std::result::Result<[usize; 3], String> {
    let parts: Vec<&str> = v.split(['x', 'X', ',']).map(str::trim).collect();
    let nums: std::result::Result<Vec<usize>, _> =
        parts.iter().map(|p| p.parse::<usize>()).collect();
    let nums = nums.map_err(|_| format!("bad grid '{v}'"))?;
    let grid = match nums.as_slice() {
        [n] => [*n, *n, if dim == 3 { *n } else { 1 }],
        [a, b] if dim == 2 => [*a, *b, 1],
        [a, b, c] if dim == 3 => [*a, *b, *c],
        _ => return Err(format!("grid '{v}' does not match a {dim}D case")),
    };
    if grid[..dim].iter().any(|&n| n < 4) {
        return Err(format!("grid '{v}' needs at least 4 cells per direction"));
    }
    Ok(grid)
}

impl RunConfig {
    /// Defaults of the named case.
    pub fn for_case(name: &str) -> Result<RunConfig> {
        let c = case_by_name(name)?;
        let cfg = c.solver_config();
        Ok(RunConfig {
            case: c.name.to_string(),
            grid: c.default_n,
            cfl: cfg.cfl,
            flux: FluxKind::Es2,
            vcl: Vcl::Vcl1,
            rk: RkOrder::Rk2,
            adapt: true,
            alpha: c.alpha,
            sigma: c.sigma,
            filter_passes: cfg.adapt.filter_passes,
            mu: c.mu,
            initial_rounds: cfg.adapt.initial_rounds,
            t_final: c.t_final,
            output_interval: 0.0,
            output_dir: format!("out/{}", c.name),
            vtk: false,
        })
    }

    pub fn case_spec(&self) -> Result<CaseSpec> {
        case_by_name(&self.case)
    }

    /// Sets one key; changing `case` resets every other field to that
    /// case's defaults.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let v = value.trim();
        let num = |v: &str| {
            v.parse::<f64>()
                .map_err(|_| format!("'{v}' is not a number"))
        };
        let int = |v: &str| {
            v.parse::<usize>()
                .map_err(|_| format!("'{v}' is not a non-negative integer"))
        };
        let dim = case_by_name(&self.case).map(|c| c.dim).unwrap_or(2);
        match key.trim() {
            "case" => *self = RunConfig::for_case(v).map_err(|e| e.to_string())?,
            "grid" => self.grid = parse_grid(v, dim)?,
            "cfl" => {
                let c = num(v)?;
                if !(c > 0.0 && c < 1.0) {
                    return Err(format!("cfl must lie in (0, 1), got {v}"));
                }
                self.cfl = c;
            }
            "flux" => self.flux = v.parse().map_err(|e: Error| e.to_string())?,
            "vcl" => self.vcl = v.parse().map_err(|e: Error| e.to_string())?,
            "rk" => self.rk = v.parse().map_err(|e: Error| e.to_string())?,
            "adapt.enabled" | "adapt" => {
                self.adapt = parse_bool(v).ok_or(format!("'{v}' is not on/off"))?
            }
            "adapt.mu" => self.mu = int(v)?,
            "adapt.initial_rounds" => self.initial_rounds = int(v)?,
            "monitor.alpha" => {
                let a = num(v)?;
                if !(a >= 0.0) {
                    return Err(format!("monitor.alpha must be nonnegative, got {v}"));
                }
                self.alpha = a;
            }
            "monitor.sigma" => self.sigma = v.parse().map_err(|e: Error| e.to_string())?,
            "monitor.filter_passes" => self.filter_passes = int(v)?,
            "t_final" => {
                let t = num(v)?;
                if !(t > 0.0) {
                    return Err(format!("t_final must be positive, got {v}"));
                }
                self.t_final = t;
            }
            "output.interval" => {
                let t = num(v)?;
                if !(t >= 0.0) {
                    return Err(format!("output.interval must be nonnegative, got {v}"));
                }
                self.output_interval = t;
            }
            "output.dir" => self.output_dir = v.to_string(),
            "output.vtk" => self.vtk = parse_bool(v).ok_or(format!("'{v}' is not on/off"))?,
            other => return Err(format!("unknown key '{other}'")),
        }
        Ok(())
    }

    /// Parses configuration text. `case` may appear anywhere; it is applied
    /// first so other keys override its defaults.
    pub fn parse(text: &str) -> Result<RunConfig> {
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::Config {
                    line: i + 1,
                    message: format!("expected 'key = value', got '{line}'"),
                });
            };
            entries.push((i + 1, k.trim().to_string(), v.trim().to_string()));
        }
        let case_line = entries.iter().find(|e| e.1 == "case");
        let mut cfg = match case_line {
            Some((line, _, v)) => RunConfig::for_case(v).map_err(|e| Error::Config {
                line: *line,
                message: e.to_string(),
            })?,
            None => {
                return Err(Error::Config {
                    line: 0,
                    message: "missing 'case' key".into(),
                })
            }
        };
        for (line, k, v) in &entries {
            if k == "case" {
                continue;
            }
            cfg.set(k, v).map_err(|message| Error::Config {
                line: *line,
                message,
            })?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        RunConfig::parse(&fs::read_to_string(path)?)
    }

    /// Canonical text form; parsing it gives back the same configuration.
    pub fn to_text(&self) -> String {
        let g = self.grid;
        let dim = case_by_name(&self.case).map(|c| c.dim).unwrap_or(2);
        let grid = if dim == 2 {
            format!("{}x{}", g[0], g[1])
        } else {
            format!("{}x{}x{}", g[0], g[1], g[2])
        };
        let onoff = |b: bool| if b { "on" } else { "off" };
        let mut s = String::new();
        let _ = writeln!(s, "case = {}", self.case);
        let _ = writeln!(s, "grid = {grid}");
        let _ = writeln!(s, "cfl = {}", self.cfl);
        let _ = writeln!(s, "flux = {}", self.flux);
        let _ = writeln!(s, "vcl = {}", self.vcl);
        let _ = writeln!(s, "rk = {}", self.rk);
        let _ = writeln!(s, "adapt.enabled = {}", onoff(self.adapt));
        let _ = writeln!(s, "adapt.mu = {}", self.mu);
        let _ = writeln!(s, "adapt.initial_rounds = {}", self.initial_rounds);
        let _ = writeln!(s, "monitor.alpha = {}", self.alpha);
        let _ = writeln!(s, "monitor.sigma = {}", self.sigma);
        let _ = writeln!(s, "monitor.filter_passes = {}", self.filter_passes);
        let _ = writeln!(s, "t_final = {}", self.t_final);
        let _ = writeln!(s, "output.interval = {}", self.output_interval);
        let _ = writeln!(s, "output.dir = {}", self.output_dir);
        let _ = writeln!(s, "output.vtk = {}", onoff(self.vtk));
        s
    }

    /// First 16 hex digits of the SHA-256 of the canonical text.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_text().as_bytes());
        format!("{digest:x}")[..16].to_string()
    }

    /// Solver settings for this run.
    pub fn solver_config(&self) -> Result<SolverConfig> {
        let case = self.case_spec()?;
        let mut cfg = case.solver_config();
        cfg.cfl = self.cfl;
        cfg.flux = self.flux;
        cfg.vcl = self.vcl;
        cfg.rk = self.rk;
        cfg.adapt.enabled = self.adapt;
        cfg.adapt.alpha = self.alpha;
        cfg.adapt.sigma = self.sigma;
        cfg.adapt.filter_passes = self.filter_passes;
        cfg.adapt.mu = self.mu;
        cfg.adapt.initial_rounds = self.initial_rounds;
        Ok(cfg)
    }
}

/// Mesh and cell data at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotFile {
    pub case: String,
    pub dim: usize,
    pub cells: [usize; 3],
    pub time: f64,
    pub steps: usize,
    pub config_hash: String,
    pub nodes: Vec<[f64; 3]>,
    pub prim: Vec<PrimitiveState>,
    pub jac: Vec<f64>,
}

const SNAPSHOT_MAGIC: &str = "rhdmm-snapshot 1";

impl SnapshotFile {
    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(64 * (self.nodes.len() + self.prim.len()) + 256);
        let _ = writeln!(s, "{SNAPSHOT_MAGIC}");
        let _ = writeln!(s, "case {}", self.case);
        let _ = writeln!(s, "dim {}", self.dim);
        let _ = writeln!(
            s,
            "cells {} {} {}",
            self.cells[0], self.cells[1], self.cells[2]
        );
        let _ = writeln!(s, "time {:?}", self.time);
        let _ = writeln!(s, "steps {}", self.steps);
        let _ = writeln!(s, "config_hash {}", self.config_hash);
        let _ = writeln!(s, "nodes {} x1 x2 x3", self.nodes.len());
        for x in &self.nodes {
            let _ = writeln!(s, "{:?} {:?} {:?}", x[0], x[1], x[2]);
        }
        let _ = writeln!(s, "cells_data {} rho v1 v2 v3 p jacobian", self.prim.len());
        for (p, j) in self.prim.iter().zip(&self.jac) {
            let _ = writeln!(
                s,
                "{:?} {:?} {:?} {:?} {:?} {:?}",
                p.rho, p.v[0], p.v[1], p.v[2], p.p, j
            );
        }
        s
    }

    pub fn parse(text: &str) -> Result<SnapshotFile> {
        let err = |message: String| Error::Parse {
            what: "snapshot".into(),
            message,
        };
        let mut lines = text.lines().enumerate();
        let mut next = |expect: &str| -> Result<(usize, Vec<String>)> {
            let (i, l) = lines
                .next()
                .ok_or_else(|| err(format!("unexpected end of file, expected {expect}")))?;
            Ok((i + 1, l.split_whitespace().map(String::from).collect()))
        };
        let (_, magic) = next("header")?;
        if magic.join(" ") != SNAPSHOT_MAGIC {
            return Err(err("not a snapshot file".into()));
        }
        fn field<T: std::str::FromStr>(
            got: (usize, Vec<String>),
            key: &str,
            idx: usize,
        ) -> std::result::Result<T, String> {
            let (line, words) = got;
            if words.first().map(String::as_str) != Some(key) {
                return Err(format!("line {line}: expected '{key}'"));
            }
            words
                .get(idx)
                .and_then(|w| w.parse().ok())
                .ok_or_else(|| format!("line {line}: bad value for '{key}'"))
        }
        let case: String = field(next("case")?, "case", 1).map_err(err)?;
        let dim: usize = field(next("dim")?, "dim", 1).map_err(err)?;
        let cl = next("cells")?;
        let cells = [
            field(cl.clone(), "cells", 1).map_err(err)?,
            field(cl.clone(), "cells", 2).map_err(err)?,
            field(cl, "cells", 3).map_err(err)?,
        ];
        let time: f64 = field(next("time")?, "time", 1).map_err(err)?;
        let steps: usize = field(next("steps")?, "steps", 1).map_err(err)?;
        let config_hash: String = field(next("config_hash")?, "config_hash", 1).map_err(err)?;
        let count: usize = field(next("nodes")?, "nodes", 1).map_err(err)?;
        let floats = |(line, words): (usize, Vec<String>), n: usize| -> Result<Vec<f64>> {
            let v: std::result::Result<Vec<f64>, _> =
                words.iter().map(|w| w.parse::<f64>()).collect();
            match v {
                Ok(v) if v.len() == n => Ok(v),
                _ => Err(err(format!("line {line}: expected {n} numbers"))),
            }
        };
        let mut nodes = Vec::with_capacity(count);
        for _ in 0..count {
            let v = floats(next("node")?, 3)?;
            nodes.push([v[0], v[1], v[2]]);
        }
        let ncell: usize = field(next("cells_data")?, "cells_data", 1).map_err(err)?;
        let mut prim = Vec::with_capacity(ncell);
        let mut jac = Vec::with_capacity(ncell);
        for _ in 0..ncell {
            let v = floats(next("cell")?, 6)?;
            prim.push(PrimitiveState {
                rho: v[0],
                v: [v[1], v[2], v[3]],
                p: v[4],
            });
            jac.push(v[5]);
        }
        let nn: usize = (0..3)
            .map(|d| if d < dim { cells[d] + 1 } else { 1 })
            .product();
        if nodes.len() != nn || prim.len() != cells.iter().product::<usize>() {
            return Err(err("array sizes do not match the cell counts".into()));
        }
        Ok(SnapshotFile {
            case,
            dim,
            cells,
            time,
            steps,
            config_hash,
            nodes,
            prim,
            jac,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<SnapshotFile> {
        SnapshotFile::parse(&fs::read_to_string(path)?)
    }

    /// The mesh, periodic in the directions where the named case is.
    pub fn mesh(&self) -> Result<StructuredMesh> {
        let period = match case_by_name(&self.case) {
            Ok(c) => {
                let per = c.periodic();
                [0, 1, 2].map(|d| (per[d] && d < self.dim).then(|| c.domain.extent(d)))
            }
            Err(_) => [None; 3],
        };
        StructuredMesh::from_nodes(self.dim, self.cells, period, self.nodes.clone())
    }
}

/// `t,total_entropy` rows with a header line.
pub fn entropy_series_text(series: &[(f64, f64)]) -> String {
    let mut s = String::from("t,total_entropy\n");
    for (t, e) in series {
        let _ = writeln!(s, "{t:?},{e:?}");
    }
    s
}

/// Legacy VTK structured grid with cell data.
pub fn vtk_text(snap: &SnapshotFile) -> String {
    let nn: Vec<usize> = (0..3)
        .map(|d| if d < snap.dim { snap.cells[d] + 1 } else { 1 })
        .collect();
    let mut s = String::new();
    let _ = writeln!(s, "# vtk DataFile Version 3.0");
    let _ = writeln!(s, "{} t={}", snap.case, snap.time);
    let _ = writeln!(s, "ASCII\nDATASET STRUCTURED_GRID");
    let _ = writeln!(s, "DIMENSIONS {} {} {}", nn[0], nn[1], nn[2]);
    let _ = writeln!(s, "POINTS {} double", snap.nodes.len());
    for x in &snap.nodes {
        let _ = writeln!(s, "{} {} {}", x[0], x[1], x[2]);
    }
    let _ = writeln!(s, "CELL_DATA {}", snap.prim.len());
    for (name, get) in [
        (
            "rho",
            (|p: &PrimitiveState| p.rho) as fn(&PrimitiveState) -> f64,
        ),
        ("pressure", |p: &PrimitiveState| p.p),
    ] {
        let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
        for p in &snap.prim {
            let _ = writeln!(s, "{}", get(p));
        }
    }
    let _ = writeln!(s, "SCALARS jacobian double 1\nLOOKUP_TABLE default");
    for j in &snap.jac {
        let _ = writeln!(s, "{j}");
    }
    let _ = writeln!(s, "VECTORS velocity double");
    for p in &snap.prim {
        let _ = writeln!(s, "{} {} {}", p.v[0], p.v[1], p.v[2]);
    }
    s
}

/// Cell quantity sampled by [`emit_cutline`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutField {
    Rho,
    LnRho,
    Pressure,
    Speed,
}

impl std::str::FromStr for CutField {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rho" => Ok(CutField::Rho),
            "lnrho" => Ok(CutField::LnRho),
            "p" | "pressure" => Ok(CutField::Pressure),
            "speed" | "v" => Ok(CutField::Speed),
            _ => Err(Error::Invalid(format!(
                "unknown field '{s}' (expected rho, lnrho, p or speed)"
            ))),
        }
    }
}

impl CutField {
    pub fn eval(self, p: &PrimitiveState) -> f64 {
        match self {
            CutField::Rho => p.rho,
            CutField::LnRho => p.rho.ln(),
            CutField::Pressure => p.p,
            CutField::Speed => p.speed_sq().sqrt(),
        }
    }
}

fn cross2(o: [f64; 3], a: [f64; 3], b: [f64; 3]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Samples `field` at `samples` equally spaced points from `from` to `to`,
/// returning `(s, value)` with `s` the arclength from `from`.
pub fn emit_cutline(
    snap: &SnapshotFile,
    from: [f64; 3],
    to: [f64; 3],
    samples: usize,
    field: CutField,
) -> Result<Vec<(f64, f64)>> {
    let mesh = snap.mesh()?;
    let n = mesh.cells();
    let dim = snap.dim;
    let len = (0..dim)
        .map(|d| (to[d] - from[d]).powi(2))
        .sum::<f64>()
        .sqrt();
    let mut boxes = Vec::with_capacity(mesh.num_cells());
    let mut corners_of = Vec::with_capacity(mesh.num_cells());
    for k in 0..n[2] {
        for j in 0..n[1] {
            for i in 0..n[0] {
                let mut lo = [f64::INFINITY; 3];
                let mut hi = [f64::NEG_INFINITY; 3];
                let mut cs = Vec::with_capacity(8);
                for c in 0..(1 << dim) {
                    let p = mesh.node(
                        i + (c & 1),
                        j + ((c >> 1) & 1),
                        k + if dim == 3 { (c >> 2) & 1 } else { 0 },
                    );
                    for l in 0..3 {
                        lo[l] = lo[l].min(p[l]);
                        hi[l] = hi[l].max(p[l]);
                    }
                    cs.push(p);
                }
                boxes.push((lo, hi));
                corners_of.push(cs);
            }
        }
    }
    let centers = mesh.cell_centers();
    let mut shifts = vec![[0.0; 3]];
    for d in 0..dim {
        if let Some(p) = mesh.period()[d] {
            let prev = shifts.clone();
            for s in prev {
                for sign in [-1.0, 1.0] {
                    let mut t = s;
                    t[d] = sign * p;
                    shifts.push(t);
                }
            }
        }
    }
    let tol = 1e-12 * len.max(1.0);
    let mut out = Vec::with_capacity(samples);
    for s in 0..samples {
        let f = if samples > 1 {
            s as f64 / (samples - 1) as f64
        } else {
            0.0
        };
        let x0 = [0, 1, 2].map(|d| from[d] + f * (to[d] - from[d]));
        let mut best: Option<(f64, usize)> = None;
        'shift: for shift in &shifts {
            let x = [0, 1, 2].map(|d| x0[d] + shift[d]);
            for (c, (lo, hi)) in boxes.iter().enumerate() {
                if (0..dim).any(|d| x[d] < lo[d] - tol || x[d] > hi[d] + tol) {
                    continue;
                }
                if dim == 2 {
                    let q = &corners_of[c];
                    let ring = [q[0], q[1], q[3], q[2]];
                    let inside = (0..4).all(|e| cross2(ring[e], ring[(e + 1) % 4], x) >= -tol);
                    if inside {
                        best = Some((0.0, c));
                        break 'shift;
                    }
                } else {
                    let d2: f64 = (0..3).map(|d| (x[d] - centers[c][d]).powi(2)).sum();
                    if best.map_or(true, |(b, _)| d2 < b) {
                        best = Some((d2, c));
                    }
                }
            }
        }
        let (_, c) = best
            .ok_or_else(|| Error::Invalid(format!("sample point {x0:?} lies outside the mesh")))?;
        out.push((f * len, field.eval(&snap.prim[c])));
    }
    Ok(out)
}

/// One row of a convergence study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
}

/// `log₂(e_N / e_{2N})` scaled to the actual refinement ratio.
pub fn order(coarse: (usize, f64), fine: (usize, f64)) -> f64 {
    (coarse.1 / fine.1).ln() / (fine.0 as f64 / coarse.0 as f64).ln()
}

/// Aligned table with orders between consecutive rows.
pub fn convergence_table_text(rows: &[ConvergenceRow]) -> String {
    let mut s = format!(
        "{:>6} | {:>10} {:>6} | {:>10} {:>6} | {:>10} {:>6}\n",
        "N", "l1", "order", "l2", "order", "linf", "order"
    );
    for (i, r) in rows.iter().enumerate() {
        let o = |get: fn(&ConvergenceRow) -> f64| {
            if i == 0 {
                "-".to_string()
            } else {
                format!(
                    "{:.2}",
                    order((rows[i - 1].n, get(&rows[i - 1])), (r.n, get(r)))
                )
            }
        };
        let _ = writeln!(
            s,
            "{:>6} | {:>10.3e} {:>6} | {:>10.3e} {:>6} | {:>10.3e} {:>6}",
            r.n,
            r.l1,
            o(|r| r.l1),
            r.l2,
            o(|r| r.l2),
            r.linf,
            o(|r| r.linf)
        );
    }
    s
}

pub fn convergence_table_csv(rows: &[ConvergenceRow]) -> String {
    let mut s = String::from("n,l1,l1_order,l2,l2_order,linf,linf_order\n");
    for (i, r) in rows.iter().enumerate() {
        let o = |get: fn(&ConvergenceRow) -> f64| {
            if i == 0 {
                String::new()
            } else {
                format!(
                    "{:?}",
                    order((rows[i - 1].n, get(&rows[i - 1])), (r.n, get(r)))
                )
            }
        };
        let _ = writeln!(
            s,
            "{},{:?},{},{:?},{},{:?},{}",
            r.n,
            r.l1,
            o(|r| r.l1),
            r.l2,
            o(|r| r.l2),
            r.linf,
            o(|r| r.linf)
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trip_and_overrides() {
        let cfg = RunConfig::parse(
            "# comment\nflux = ec\ncase = vortex\ngrid = 20\nmonitor.alpha = 5 # inline\n",
        )
        .unwrap();
        assert_eq!(cfg.flux, FluxKind::Ec);
        assert_eq!(cfg.grid, [20, 20, 1]);
        assert_eq!(cfg.alpha, 5.0);
        assert_eq!(RunConfig::parse(&cfg.to_text()).unwrap(), cfg);
        assert_eq!(cfg.hash().len(), 16);
        let mut other = cfg.clone();
        other.set("cfl", "0.3").unwrap();
        assert_ne!(other.hash(), cfg.hash());
    }

    #[test]
    fn config_errors_carry_line_numbers() {
        match RunConfig::parse("case = vortex\n\nflux = weno\n") {
            Err(Error::Config { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            RunConfig::parse("case = vortex\ngrid = 2\n"),
            Err(Error::Config { line: 2, .. })
        ));
        assert!(matches!(
            RunConfig::parse("grid = 20\n"),
            Err(Error::Config { .. })
        ));
        assert!(matches!(
            RunConfig::parse("case = vortex\nbogus\n"),
            Err(Error::Config { line: 2, .. })
        ));
        assert!(matches!(
            RunConfig::parse("case = vortex\nspeed = 2\n"),
            Err(Error::Config { line: 2, .. })
        ));
    }

    #[test]
    fn orders_and_tables() {
        assert!((order((20, 4.0), (40, 1.0)) - 2.0).abs() < 1e-15);
        let rows = [
            ConvergenceRow {
                n: 20,
                l1: 4.0,
                l2: 2.0,
                linf: 1.0,
            },
            ConvergenceRow {
                n: 40,
                l1: 1.0,
                l2: 1.0,
                linf: 1.0,
            },
        ];
        let t = convergence_table_text(&rows);
        assert!(t.contains("2.00") && t.contains("1.00") && t.contains("0.00"));
        assert_eq!(convergence_table_csv(&rows).lines().count(), 3);
    }
}
