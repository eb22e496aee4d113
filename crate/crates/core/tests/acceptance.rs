//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits with
//! a nonzero status if any criterion fails.
//!
//! Criteria can be selected by number: `cargo test --test acceptance -- 3 5`.

mod common;

use std::time::Instant;

use common::{fd_df1_du, fd_du_dv, gas, random_normal, random_state, rel_diff, to_m5};
use nalgebra::SMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rhdmm::adaptation::{adapt_displacement, AdaptationConfig};
use rhdmm::driver::{build_simulation, convergence_table, vcl_comparison};
use rhdmm::fluxes::{ec_flux_curvilinear, FluxContext, InterfaceMetrics};
use rhdmm::io::{order, ConvergenceRow, RunConfig};
use rhdmm::mesh::{Domain, StructuredMesh};
use rhdmm::metrics::{compute_scl_metrics, scl_residual, MetricSet, Vcl};
use rhdmm::physics::{
    cons_to_prim, eigenvalues, entropy_bundle, prim_to_cons, scaled_eigenvectors, PrimitiveState,
};
use rhdmm::solver::{
    entropy_production, BoundaryKind, FluxKind, Motion, RkOrder, Simulation, SolverConfig,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn fmt_rows(rows: &[ConvergenceRow]) -> String {
    rows.iter()
        .map(|r| format!("N={} l1={:.3e}", r.n, r.l1))
        .collect::<Vec<_>>()
        .join(", ")
}

fn l1_orders(rows: &[ConvergenceRow]) -> Vec<f64> {
    rows.windows(2)
        .map(|w| order((w[0].n, w[0].l1), (w[1].n, w[1].l1)))
        .collect()
}

fn increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] > w[0])
}

fn vortex_convergence() -> rhdmm::Result<Outcome> {
    let cfg = RunConfig::for_case("vortex")?;
    let rows = convergence_table(&cfg, &[20, 40, 80, 160], FluxKind::Es2, true)?;
    let orders = l1_orders(&rows);
    let last = *orders.last().unwrap();
    let e160 = rows[3].l1;
    let reference = 5.561e-4;
    let pass = increasing(&orders)
        && (1.7..=2.4).contains(&last)
        && e160 <= 3.0 * reference
        && e160 >= reference / 3.0;
    Ok(outcome(
        pass,
        format!(
            "{}; orders {:.2?}; N=160 vs 5.561e-4 ratio {:.2}",
            fmt_rows(&rows),
            orders,
            e160 / reference
        ),
    ))
}

fn sine_convergence() -> rhdmm::Result<Outcome> {
    let cfg = RunConfig::for_case("sine3d")?;
    let rows = convergence_table(&cfg, &[20, 40, 80], FluxKind::Es2, true)?;
    let reference = [2.085e-2, 1.173e-2, 4.166e-3];
    let ratios: Vec<f64> = rows.iter().zip(reference).map(|(r, e)| r.l1 / e).collect();
    let orders = l1_orders(&rows);
    let pass = ratios.iter().all(|&q| (0.5..=2.0).contains(&q)) && increasing(&orders);
    Ok(outcome(
        pass,
        format!(
            "{}; ratios to reference {:.2?}; orders {:.2?}",
            fmt_rows(&rows),
            ratios,
            orders
        ),
    ))
}

fn periodic_unit_mesh(dim: usize, n: usize) -> StructuredMesh {
    let domain = Domain::new([0.0; 3], [1.0; 3]).unwrap();
    StructuredMesh::uniform(
        dim,
        [n, n, if dim == 3 { n } else { 1 }],
        &domain,
        [true, true, dim == 3],
    )
    .unwrap()
}

fn periodic_config(dim: usize) -> SolverConfig {
    let mut b = [[BoundaryKind::Periodic; 2]; 3];
    if dim == 2 {
        b[2] = [BoundaryKind::Outflow; 2];
    }
    let mut cfg = SolverConfig::new(dim, b);
    cfg.adapt.enabled = false;
    cfg
}

/// Smooth random field of cell values with a few Fourier modes.
fn synthetic_monitor<R: Rng>(mesh: &StructuredMesh, rng: &mut R) -> Vec<f64> {
    let modes: Vec<([f64; 3], f64, f64)> = (0..4)
        .map(|_| {
            let k = [
                rng.gen_range(1..3) as f64,
                rng.gen_range(0..3) as f64,
                rng.gen_range(0..3) as f64,
            ];
            (
                k,
                rng.gen_range(0.0..std::f64::consts::TAU),
                rng.gen_range(0.2..1.0),
            )
        })
        .collect();
    mesh.cell_centers()
        .iter()
        .map(|x| {
            modes
                .iter()
                .map(|(k, ph, a)| {
                    a * (std::f64::consts::TAU * (k[0] * x[0] + k[1] * x[1] + k[2] * x[2]) + ph)
                        .sin()
                })
                .sum::<f64>()
        })
        .collect()
}

fn freestream(dim: usize, vcl: Vcl, rk: RkOrder, seed: u64) -> rhdmm::Result<f64> {
    let state = PrimitiveState::new(1.3, [0.3, -0.2, if dim == 3 { 0.1 } else { 0.0 }], 0.7);
    let mut cfg = periodic_config(dim);
    cfg.vcl = vcl;
    cfg.rk = rk;
    let mesh = periodic_unit_mesh(dim, if dim == 2 { 16 } else { 8 });
    let mut sim = Simulation::new(mesh, &|_| state, cfg)?;
    let adapt = AdaptationConfig {
        alpha: 30.0,
        mu: 4,
        ..AdaptationConfig::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    for _ in 0..20 {
        let sigma = synthetic_monitor(&sim.mesh, &mut rng);
        let disp = adapt_displacement(&sim.mesh, &sigma, &adapt);
        sim.step_with(f64::INFINITY, Motion::Prescribed(disp))?;
        for p in &sim.sol.prim {
            worst = worst
                .max((p.rho - state.rho).abs() / state.rho)
                .max((p.p - state.p).abs() / state.p);
            for l in 0..3 {
                worst = worst.max((p.v[l] - state.v[l]).abs() / 0.3);
            }
        }
    }
    Ok(worst)
}

fn freestream_preservation() -> rhdmm::Result<Outcome> {
    let mut worst = 0.0_f64;
    let mut parts = Vec::new();
    for dim in [2, 3] {
        for vcl in [Vcl::Vcl1, Vcl::Vcl2] {
            for rk in [RkOrder::Rk2, RkOrder::Rk3] {
                let dev = freestream(dim, vcl, rk, 11 + dim as u64)?;
                parts.push(format!("{dim}D {vcl}/{rk} {dev:.1e}"));
                worst = worst.max(dev);
            }
        }
    }
    Ok(outcome(
        worst <= 1e-12,
        format!("max relative deviation {worst:.2e} ({})", parts.join(", ")),
    ))
}

fn jittered_mesh<R: Rng>(dim: usize, n: usize, rng: &mut R) -> StructuredMesh {
    let domain = Domain::new([0.0; 3], [1.0; 3]).unwrap();
    let cells = [n, n, if dim == 3 { n } else { 1 }];
    let mut m = StructuredMesh::uniform(dim, cells, &domain, [false; 3]).unwrap();
    let h = 1.0 / n as f64;
    for x in m.nodes.iter_mut() {
        for l in 0..dim {
            x[l] += rng.gen_range(-0.3..0.3) * h;
        }
    }
    m
}

fn scl_identity() -> rhdmm::Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = [0.0_f64; 2];
    for (slot, dim) in [2usize, 3].into_iter().enumerate() {
        for _ in 0..100 {
            let m = jittered_mesh(dim, if dim == 2 { 10 } else { 6 }, &mut rng);
            let normals = compute_scl_metrics(&m);
            for r in scl_residual(&m, &normals) {
                for v in r {
                    worst[slot] = worst[slot].max(v.abs());
                }
            }
        }
    }
    let w = worst[0].max(worst[1]);
    Ok(outcome(
        w <= 1e-13,
        format!("max residual 2D {:.1e}, 3D {:.1e}", worst[0], worst[1]),
    ))
}

fn ec_condition() -> rhdmm::Result<Outcome> {
    let g = gas();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0_f64;
    for i in 0..10_000 {
        let l = random_state(&mut rng, 0.95);
        let r = if i % 4 == 0 {
            let mut r = l;
            r.rho *= 1.0 + 1e-7 * rng.gen_range(-1.0..1.0);
            r.p *= 1.0 + 1e-7 * rng.gen_range(-1.0..1.0);
            r
        } else {
            random_state(&mut rng, 0.95)
        };
        let n = random_normal(&mut rng);
        let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        let nt = rng.gen_range(-1.0..1.0) * len;
        let ctx = FluxContext {
            left: l,
            right: r,
            metrics: InterfaceMetrics::new(n, nt),
            gas: g,
        };
        let f = ec_flux_curvilinear(&ctx)?;
        let (bl, br) = (entropy_bundle(&l, &g), entropy_bundle(&r, &g));
        let mut res = 0.0;
        let mut scale = 0.0;
        for c in 0..5 {
            res += (br.v[c] - bl.v[c]) * f[c];
            scale += (br.v[c].abs() + bl.v[c].abs()) * f[c].abs();
        }
        res -= nt * (br.phi - bl.phi);
        scale += nt.abs() * (br.phi.abs() + bl.phi.abs());
        for k in 0..3 {
            res -= n[k] * (br.psi[k] - bl.psi[k]);
            scale += n[k].abs() * (br.psi[k].abs() + bl.psi[k].abs());
        }
        worst = worst.max(res.abs() / scale);
    }
    Ok(outcome(
        worst <= 1e-11,
        format!("max scaled residual {worst:.2e} over 10^4 pairs"),
    ))
}

fn wavy_field(dim: usize, n: usize) -> (StructuredMesh, Vec<PrimitiveState>) {
    let tau = std::f64::consts::TAU;
    let mut m = periodic_unit_mesh(dim, n);
    for (x, v) in m.nodes.iter_mut().zip(m.velocities.iter_mut()) {
        let s = (tau * x[0]).sin() * (tau * x[1]).cos();
        *v = [
            0.4 * s,
            -0.3 * (tau * (x[0] + x[2])).sin(),
            if dim == 3 { 0.2 * s } else { 0.0 },
        ];
        *x = [
            x[0] + 0.03 * s,
            x[1] + 0.02 * (tau * x[0]).sin(),
            x[2] + if dim == 3 {
                0.02 * (tau * x[1]).sin()
            } else {
                0.0
            },
        ];
    }
    m.enforce_periodicity();
    let prim = m
        .cell_centers()
        .iter()
        .map(|c| {
            let a = (tau * (c[0] + 2.0 * c[1] + c[2])).sin();
            PrimitiveState::new(
                1.0 + 0.5 * a,
                [0.6 * a, 0.3, if dim == 3 { -0.3 * a } else { 0.0 }],
                1.0 + 0.4 * (tau * c[0]).cos(),
            )
        })
        .collect();
    (m, prim)
}

fn entropy_identity() -> rhdmm::Result<Outcome> {
    let mut ec_worst = 0.0_f64;
    let mut es_top = f64::NEG_INFINITY;
    for dim in [2, 3] {
        let (m, prim) = wavy_field(dim, if dim == 2 { 24 } else { 10 });
        let ms = MetricSet::vcl1(&m);
        let mut cfg = periodic_config(dim);
        cfg.flux = FluxKind::Ec;
        for p in entropy_production(&m, &ms, &prim, &cfg)? {
            ec_worst = ec_worst.max(p.abs());
        }
        cfg.flux = FluxKind::Es2;
        for p in entropy_production(&m, &ms, &prim, &cfg)? {
            es_top = es_top.max(p);
        }
    }
    Ok(outcome(
        ec_worst <= 1e-11 && es_top <= 1e-12,
        format!("EC max |P| {ec_worst:.2e}; ES2 max P {es_top:.2e}"),
    ))
}

fn entropy_series(flux: FluxKind) -> rhdmm::Result<(Vec<f64>, f64)> {
    let mut cfg = RunConfig::for_case("vortex")?;
    cfg.set("grid", "80").map_err(rhdmm::Error::Invalid)?;
    cfg.flux = flux;
    let (case, mut sim) = build_simulation(&cfg)?;
    let s_ref: f64 = sim.sol.ju.iter().map(|u| u[0]).sum::<f64>() * sim.mesh.cell_measure()
        / (case.gas.gamma() - 1.0);
    let mut series = vec![sim.total_entropy()];
    sim.run_until(case.t_final, |_, r| series.push(r.total_entropy))?;
    Ok((series, s_ref))
}

fn total_entropy_behaviour() -> rhdmm::Result<Outcome> {
    let (ec, s_ref) = entropy_series(FluxKind::Ec)?;
    let drift = ec.iter().map(|s| (s - ec[0]).abs()).fold(0.0, f64::max) / s_ref;
    let (es, s_ref2) = entropy_series(FluxKind::Es2)?;
    let rise = es
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::NEG_INFINITY, f64::max)
        / s_ref2;
    let decay = (es[0] - es[es.len() - 1]) / s_ref2;
    Ok(outcome(
        drift <= 1e-5 && rise <= 1e-12,
        format!(
            "EC drift {drift:.2e}; ES2 largest per-step increase {rise:.2e}, net decrease {decay:.2e} (relative to total D/(Γ-1) = {s_ref:.3})"
        ),
    ))
}

fn vcl_comparison_check() -> rhdmm::Result<Outcome> {
    let mut cfg = RunConfig::for_case("spherical-riemann")?;
    cfg.set("grid", "50").map_err(rhdmm::Error::Invalid)?;
    let series = match vcl_comparison(&cfg) {
        Ok(s) => s,
        Err(e) => return Ok(outcome(false, format!("run aborted: {e}"))),
    };
    let max = |vcl, rk| {
        series
            .iter()
            .find(|s| s.vcl == vcl && s.rk == rk)
            .unwrap()
            .max_log10()
    };
    let (a, b) = (max(Vcl::Vcl1, RkOrder::Rk2), max(Vcl::Vcl1, RkOrder::Rk3));
    let (c, d) = (max(Vcl::Vcl2, RkOrder::Rk2), max(Vcl::Vcl2, RkOrder::Rk3));
    let pass = d <= -10.0 && c <= a - 1.0 && (a - b).abs() <= 2f64.log10();
    Ok(outcome(pass, format!("max log10 |J-J~|_1: VCL1/RK2 {a:.2}, VCL1/RK3 {b:.2}, VCL2/RK2 {c:.2}, VCL2/RK3 {d:.2}")))
}

fn physics_oracles() -> rhdmm::Result<Outcome> {
    let g = gas();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut rt = 0.0_f64;
    for _ in 0..10_000 {
        let s = random_state(&mut rng, 0.99);
        let back = cons_to_prim(&prim_to_cons(&s, &g)?, &g)?;
        rt = rt
            .max((back.rho - s.rho).abs() / s.rho)
            .max((back.p - s.p).abs() / s.p);
        for l in 0..3 {
            rt = rt.max((back.v[l] - s.v[l]).abs());
        }
    }
    let (mut e_dudv, mut e_flux) = (0.0_f64, 0.0_f64);
    for _ in 0..300 {
        let s = random_state(&mut rng, 0.9);
        let r = to_m5(&scaled_eigenvectors(&s, &g)?);
        e_dudv = e_dudv.max(rel_diff(&(r * r.transpose()), &fd_du_dv(&s, &g)));
        let lam = eigenvalues(&s, &g)?;
        let l = SMatrix::<f64, 5, 5>::from_diagonal(&nalgebra::Vector5::from_column_slice(&lam));
        let a = r * l * r.try_inverse().expect("invertible R");
        e_flux = e_flux.max(rel_diff(&a, &fd_df1_du(&s, &g)));
    }
    Ok(outcome(
        rt <= 1e-11 && e_dudv <= 1e-6 && e_flux <= 1e-6,
        format!(
            "roundtrip {rt:.2e}; RR^T vs dU/dV {e_dudv:.2e}; R Lambda R^-1 vs dF1/dU {e_flux:.2e}"
        ),
    ))
}

fn run_case(name: &str, n: usize) -> rhdmm::Result<Simulation> {
    let mut cfg = RunConfig::for_case(name)?;
    cfg.set("grid", &n.to_string())
        .map_err(rhdmm::Error::Invalid)?;
    let (case, mut sim) = build_simulation(&cfg)?;
    sim.run_until(case.t_final, |_, _| {})?;
    Ok(sim)
}

fn diagonal_asymmetry(sim: &Simulation) -> f64 {
    let m = &sim.mesh;
    let n = m.cells()[0];
    let mut worst = 0.0_f64;
    for j in 0..n {
        for i in 0..n {
            let a = sim.sol.prim[m.cell_index(i, j, 0)];
            let b = sim.sol.prim[m.cell_index(j, i, 0)];
            worst = worst
                .max((a.rho - b.rho).abs())
                .max((a.p - b.p).abs())
                .max((a.v[0] - b.v[1]).abs())
                .max((a.v[1] - b.v[0]).abs());
        }
    }
    for j in 0..=n {
        for i in 0..=n {
            let a = m.node(i, j, 0);
            let b = m.node(j, i, 0);
            worst = worst.max((a[0] - b[1]).abs()).max((a[1] - b[0]).abs());
        }
    }
    worst
}

fn octant_asymmetry(sim: &Simulation) -> f64 {
    let m = &sim.mesh;
    let n = m.cells()[0];
    let mut worst = 0.0_f64;
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                let a = sim.sol.prim[m.cell_index(i, j, k)];
                for (perm, idx) in [
                    ([1, 0, 2], [j, i, k]),
                    ([2, 1, 0], [k, j, i]),
                    ([0, 2, 1], [i, k, j]),
                ] {
                    let b = sim.sol.prim[m.cell_index(idx[0], idx[1], idx[2])];
                    worst = worst.max((a.rho - b.rho).abs()).max((a.p - b.p).abs());
                    for l in 0..3 {
                        worst = worst.max((a.v[l] - b.v[perm[l]]).abs());
                    }
                }
            }
        }
    }
    worst
}

fn structural_checks() -> rhdmm::Result<Outcome> {
    let mut notes = Vec::new();
    let mut pass = true;
    for name in ["rp2", "rp3"] {
        match run_case(name, 64) {
            Ok(sim) => {
                let a = diagonal_asymmetry(&sim);
                pass &= a <= 1e-10;
                notes.push(format!("{name} diagonal asymmetry {a:.1e}"));
            }
            Err(e) => {
                pass = false;
                notes.push(format!("{name} aborted: {e}"));
            }
        }
    }
    match run_case("rp1", 64) {
        Ok(sim) => {
            let centre = sim
                .mesh
                .cell_centers()
                .iter()
                .zip(&sim.sol.prim)
                .filter(|(x, _)| (x[0] - 0.5).abs() < 0.15 && (x[1] - 0.5).abs() < 0.15)
                .map(|(_, p)| p.rho)
                .fold(f64::INFINITY, f64::min);
            pass &= centre < 0.3;
            notes.push(format!("rp1 central min density {centre:.3}"));
        }
        Err(e) => {
            pass = false;
            notes.push(format!("rp1 aborted: {e}"));
        }
    }
    match run_case("spherical-riemann", 20) {
        Ok(sim) => {
            let a = octant_asymmetry(&sim);
            pass &= a <= 1e-10;
            notes.push(format!("spherical octant asymmetry {a:.1e}"));
        }
        Err(e) => {
            pass = false;
            notes.push(format!("spherical-riemann aborted: {e}"));
        }
    }
    Ok(outcome(pass, notes.join("; ")))
}

type Check = fn() -> rhdmm::Result<Outcome>;

fn main() {
    let criteria: [(&str, Check); 10] = [
        ("vortex convergence", vortex_convergence),
        ("3D sine-wave convergence", sine_convergence),
        ("free-stream preservation", freestream_preservation),
        ("discrete SCL identity", scl_identity),
        ("EC condition", ec_condition),
        (
            "semi-discrete entropy identity/inequality",
            entropy_identity,
        ),
        ("total-entropy behaviour", total_entropy_behaviour),
        ("VCL comparison", vcl_comparison_check),
        ("physics-layer oracles", physics_oracles),
        ("qualitative/structural checks", structural_checks),
    ];
    let selected: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let id = i + 1;
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let o = check().unwrap_or_else(|e| outcome(false, format!("error: {e}")));
        let secs = start.elapsed().as_secs_f64();
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {id:>2} {} {name} [{secs:.1} s]: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
