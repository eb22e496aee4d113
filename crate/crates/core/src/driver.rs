//! Run orchestration: single runs with output, convergence sweeps and
//! Jacobian-discrepancy comparisons.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::cases::{density_errors, CaseSpec};
use crate::error::{Error, Result};
use crate::io::{entropy_series_text, vtk_text, ConvergenceRow, RunConfig, SnapshotFile};
use crate::metrics::Vcl;
use crate::solver::{FluxKind, RkOrder, Simulation};

/// Builds the simulation described by `cfg` at `t = 0`.
pub fn build_simulation(cfg: &RunConfig) -> Result<(CaseSpec, Simulation)> {
    let case = cfg.case_spec()?;
    let mesh = case.mesh(cfg.grid)?;
    let sc = cfg.solver_config()?;
    let sim = Simulation::new(mesh, &|x| case.initial(x), sc)?;
    Ok((case, sim))
}

pub fn snapshot(sim: &Simulation, case: &str, hash: &str) -> SnapshotFile {
    SnapshotFile {
        case: case.to_string(),
        dim: sim.mesh.dim(),
        cells: sim.mesh.cells(),
        time: sim.t,
        steps: sim.steps,
        config_hash: hash.to_string(),
        nodes: sim.mesh.nodes.clone(),
        prim: sim.sol.prim.clone(),
        jac: sim.sol.jac.clone(),
    }
}

/// Outcome of [`run`].
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub steps: usize,
    pub t: f64,
    pub last_dt: f64,
    pub wall_seconds: f64,
    pub snapshots: Vec<PathBuf>,
    pub entropy: Vec<(f64, f64)>,
}

/// Output times: `0, interval, 2·interval, …` and `t_final`.
pub fn output_times(t_final: f64, interval: f64) -> Vec<f64> {
    let mut ts = vec![0.0];
    if interval > 0.0 {
        let mut k = 1.0;
        while k * interval < t_final * (1.0 - 1e-12) {
            ts.push(k * interval);
            k += 1.0;
        }
    }
    ts.push(t_final);
    ts
}

/// Runs `cfg` and writes snapshots, `entropy.csv`, `summary.txt` and
/// `config.txt` to `cfg.output_dir` (resolved against `root`).
pub fn run(cfg: &RunConfig, root: &Path) -> Result<RunSummary> {
    let out_dir = root.join(&cfg.output_dir);
    fs::create_dir_all(&out_dir)?;
    let hash = cfg.hash();
    fs::write(out_dir.join("config.txt"), cfg.to_text())?;
    let start = Instant::now();
    let (case, mut sim) = build_simulation(cfg)?;
    let mut entropy = vec![(0.0, sim.total_entropy())];
    let mut snapshots = Vec::new();
    let mut last_dt = 0.0;
    for (k, &target) in output_times(cfg.t_final, cfg.output_interval)
        .iter()
        .enumerate()
    {
        while sim.t < target {
            let r = sim.step(target)?;
            last_dt = r.dt;
            entropy.push((r.t, r.total_entropy));
        }
        let snap = snapshot(&sim, case.name, &hash);
        let path = out_dir.join(format!("snap_{k:04}.txt"));
        snap.write(&path)?;
        if cfg.vtk {
            fs::write(out_dir.join(format!("snap_{k:04}.vtk")), vtk_text(&snap))?;
        }
        log::info!(
            "t = {:.6} after {} steps -> {}",
            sim.t,
            sim.steps,
            path.display()
        );
        snapshots.push(path);
    }
    fs::write(out_dir.join("entropy.csv"), entropy_series_text(&entropy))?;
    let wall = start.elapsed().as_secs_f64();
    let mut summary = format!(
        "case {}\nconfig_hash {hash}\ncells {:?}\nt {:?}\nsteps {}\nfinal_dt {:?}\nwall_seconds {:.3}\njacobian_discrepancy {:e}\n",
        case.name,
        &cfg.grid[..case.dim],
        sim.t,
        sim.steps,
        last_dt,
        wall,
        sim.jacobian_discrepancy()
    );
    if let Some(e) = density_errors(&case, &sim.mesh, &sim.sol, sim.t) {
        summary.push_str(&format!(
            "rho_l1 {:e}\nrho_l2 {:e}\nrho_linf {:e}\n",
            e.l1, e.l2, e.linf
        ));
    }
    fs::write(out_dir.join("summary.txt"), summary)?;
    Ok(RunSummary {
        out_dir,
        steps: sim.steps,
        t: sim.t,
        last_dt,
        wall_seconds: wall,
        snapshots,
        entropy,
    })
}

/// Density error norms at `t_final` for each grid size.
pub fn convergence_table(
    base: &RunConfig,
    grids: &[usize],
    flux: FluxKind,
    adapt: bool,
) -> Result<Vec<ConvergenceRow>> {
    let case = base.case_spec()?;
    if !case.has_exact() {
        return Err(Error::Invalid(format!(
            "case '{}' has no exact solution",
            case.name
        )));
    }
    let mut rows = Vec::with_capacity(grids.len());
    for &n in grids {
        let mut cfg = base.clone();
        cfg.set("grid", &n.to_string()).map_err(Error::Invalid)?;
        cfg.flux = flux;
        cfg.adapt = adapt;
        let (case, mut sim) = build_simulation(&cfg)?;
        sim.run_until(cfg.t_final, |_, _| {})?;
        let e =
            density_errors(&case, &sim.mesh, &sim.sol, sim.t).expect("case has an exact solution");
        log::info!("N = {n}: l1 {:e} after {} steps", e.l1, sim.steps);
        rows.push(ConvergenceRow {
            n,
            l1: e.l1,
            l2: e.l2,
            linf: e.linf,
        });
    }
    Ok(rows)
}

/// `(t, log₁₀ ‖J − J̃‖₁)` after every step of one variant.
#[derive(Debug, Clone)]
pub struct VclSeries {
    pub vcl: Vcl,
    pub rk: RkOrder,
    pub points: Vec<(f64, f64)>,
}

impl VclSeries {
    pub fn label(&self) -> String {
        format!("{}_{}", self.vcl, self.rk)
    }

    pub fn max_log10(&self) -> f64 {
        self.points
            .iter()
            .map(|p| p.1)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Runs the four VCL/RK combinations of `base`.
pub fn vcl_comparison(base: &RunConfig) -> Result<Vec<VclSeries>> {
    let mut out = Vec::with_capacity(4);
    for vcl in [Vcl::Vcl1, Vcl::Vcl2] {
        for rk in [RkOrder::Rk2, RkOrder::Rk3] {
            let mut cfg = base.clone();
            cfg.vcl = vcl;
            cfg.rk = rk;
            let (_, mut sim) = build_simulation(&cfg)?;
            let mut points = Vec::new();
            sim.run_until(cfg.t_final, |s, r| {
                points.push((r.t, s.jacobian_discrepancy().max(1e-300).log10()))
            })?;
            log::info!("{vcl}/{rk}: {} steps", sim.steps);
            out.push(VclSeries { vcl, rk, points });
        }
    }
    Ok(out)
}

/// Wide CSV with one `t_<label>,log10_<label>` column pair per series.
pub fn vcl_series_csv(series: &[VclSeries]) -> String {
    let mut s = series
        .iter()
        .map(|v| format!("t_{0},log10_{0}", v.label()))
        .collect::<Vec<_>>()
        .join(",");
    s.push('\n');
    let rows = series.iter().map(|v| v.points.len()).max().unwrap_or(0);
    for i in 0..rows {
        let cols: Vec<String> = series
            .iter()
            .map(|v| {
                v.points
                    .get(i)
                    .map_or(",".to_string(), |(t, e)| format!("{t:?},{e:?}"))
            })
            .collect();
        s.push_str(&cols.join(","));
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn output_times_land_on_multiples() {
        assert_eq!(output_times(4.0, 2.0), vec![0.0, 2.0, 4.0]);
        assert_eq!(output_times(1.0, 0.0), vec![0.0, 1.0]);
        assert_eq!(output_times(1.0, 0.4), vec![0.0, 0.4, 0.8, 1.0]);
    }

    #[test]
    fn short_run_writes_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = RunConfig::for_case("vortex").unwrap();
        for (k, v) in [
            ("grid", "8"),
            ("t_final", "0.2"),
            ("output.interval", "0.1"),
            ("output.dir", "v"),
            ("output.vtk", "on"),
        ] {
            cfg.set(k, v).unwrap();
        }
        let s = run(&cfg, dir.path()).unwrap();
        assert_eq!(s.snapshots.len(), 3);
        assert_eq!(s.t, 0.2);
        let mid = SnapshotFile::read(&s.snapshots[1]).unwrap();
        assert_eq!(mid.time, 0.1);
        assert_eq!(mid.config_hash, cfg.hash());
        for f in ["entropy.csv", "summary.txt", "config.txt", "snap_0002.vtk"] {
            assert!(s.out_dir.join(f).exists(), "{f}");
        }
        assert_eq!(RunConfig::load(&s.out_dir.join("config.txt")).unwrap(), cfg);
    }
}
