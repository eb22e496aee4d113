//! Initial and boundary data of the benchmark problems.

use std::f64::consts::PI;

use crate::adaptation::{AdaptationConfig, SigmaKind};
use crate::error::{Error, Result};
use crate::mesh::{Domain, StructuredMesh};
use crate::physics::{GasModel, PrimitiveState};
use crate::solver::{BoundaryKind, SolutionField, SolverConfig};

/// Parameters of the isentropic vortex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VortexParams {
    /// Advection speed along `(-1, -1)`.
    pub w: f64,
    pub epsilon: f64,
}

impl Default for VortexParams {
    fn default() -> Self {
        VortexParams {
            w: 0.5 * 2f64.sqrt(),
            epsilon: 5.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CaseKind {
    Vortex(VortexParams),
    /// Four-quadrant problems 1 to 3.
    Riemann2d(u8),
    Sine3d,
    SphericalRiemann,
    ShockBubble,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseSpec {
    pub name: &'static str,
    pub kind: CaseKind,
    pub dim: usize,
    pub domain: Domain,
    pub default_n: [usize; 3],
    pub t_final: f64,
    pub gas: GasModel,
    pub alpha: f64,
    pub sigma: SigmaKind,
    /// Jacobi iterations per step.
    pub mu: usize,
    pub boundaries: [[BoundaryKind; 2]; 3],
}

pub const CASE_NAMES: [&str; 7] = [
    "vortex",
    "rp1",
    "rp2",
    "rp3",
    "sine3d",
    "spherical-riemann",
    "shock-bubble",
];

/// Case from its registry name.
pub fn case_by_name(name: &str) -> Result<CaseSpec> {
    match name.to_ascii_lowercase().as_str() {
        "vortex" => Ok(case_vortex_2d(VortexParams::default())),
        "rp1" => Ok(case_riemann2d(1)),
        "rp2" => Ok(case_riemann2d(2)),
        "rp3" => Ok(case_riemann2d(3)),
        "sine3d" => Ok(case_sine3d()),
        "spherical-riemann" | "sphere" => Ok(case_spherical_riemann()),
        "shock-bubble" | "bubble" => Ok(case_shock_bubble()),
        _ => Err(Error::Invalid(format!(
            "unknown case '{name}' (available: {})",
            CASE_NAMES.join(", ")
        ))),
    }
}

const PERIODIC: [[BoundaryKind; 2]; 3] = [[BoundaryKind::Periodic; 2]; 3];
const OUTFLOW: [[BoundaryKind; 2]; 3] = [[BoundaryKind::Outflow; 2]; 3];

pub fn case_vortex_2d(params: VortexParams) -> CaseSpec {
    CaseSpec {
        name: "vortex",
        kind: CaseKind::Vortex(params),
        dim: 2,
        domain: Domain {
            lo: [-5.0, -5.0, 0.0],
            hi: [5.0, 5.0, 1.0],
        },
        default_n: [40, 40, 1],
        t_final: 4.0,
        gas: GasModel::default(),
        alpha: 20.0,
        sigma: SigmaKind::Rho,
        mu: 3,
        boundaries: PERIODIC,
    }
}

/// Four-quadrant Riemann problem `which ∈ {1, 2, 3}`; other values select 1.
pub fn case_riemann2d(which: u8) -> CaseSpec {
    let which = if (1..=3).contains(&which) { which } else { 1 };
    CaseSpec {
        name: ["rp1", "rp2", "rp3"][which as usize - 1],
        kind: CaseKind::Riemann2d(which),
        dim: 2,
        domain: Domain {
            lo: [0.0; 3],
            hi: [1.0; 3],
        },
        default_n: [200, 200, 1],
        t_final: 0.4,
        gas: GasModel::default(),
        alpha: 1200.0,
        sigma: SigmaKind::LnRho,
        mu: 10,
        boundaries: OUTFLOW,
    }
}

pub fn case_sine3d() -> CaseSpec {
    CaseSpec {
        name: "sine3d",
        kind: CaseKind::Sine3d,
        dim: 3,
        domain: Domain {
            lo: [0.0; 3],
            hi: [1.0; 3],
        },
        default_n: [20, 20, 20],
        t_final: 0.1,
        gas: GasModel::default(),
        alpha: 20.0,
        sigma: SigmaKind::Rho,
        mu: 3,
        boundaries: PERIODIC,
    }
}

pub fn case_spherical_riemann() -> CaseSpec {
    CaseSpec {
        name: "spherical-riemann",
        kind: CaseKind::SphericalRiemann,
        dim: 3,
        domain: Domain {
            lo: [0.0; 3],
            hi: [1.0; 3],
        },
        default_n: [50, 50, 50],
        t_final: 0.4,
        gas: GasModel::default(),
        alpha: 1000.0,
        sigma: SigmaKind::LnRho,
        mu: 10,
        boundaries: [[BoundaryKind::Reflect, BoundaryKind::Outflow]; 3],
    }
}

pub const SHOCK_BUBBLE_POST: PrimitiveState = PrimitiveState {
    rho: 1.865225080631180,
    v: [-0.196781107378299, 0.0, 0.0],
    p: 0.15,
};
pub const SHOCK_BUBBLE_PRE: PrimitiveState = PrimitiveState {
    rho: 1.0,
    v: [0.0; 3],
    p: 0.05,
};
pub const SHOCK_BUBBLE_BUBBLE: PrimitiveState = PrimitiveState {
    rho: 0.1358,
    v: [0.0; 3],
    p: 0.05,
};

pub fn case_shock_bubble() -> CaseSpec {
    CaseSpec {
        name: "shock-bubble",
        kind: CaseKind::ShockBubble,
        dim: 3,
        domain: Domain {
            lo: [0.0, -45.0, -45.0],
            hi: [325.0, 45.0, 45.0],
        },
        default_n: [65, 18, 18],
        t_final: 450.0,
        gas: GasModel::default(),
        alpha: 1000.0,
        sigma: SigmaKind::LnRho,
        mu: 10,
        boundaries: [
            [
                BoundaryKind::Outflow,
                BoundaryKind::Inflow(SHOCK_BUBBLE_POST),
            ],
            [BoundaryKind::Outflow; 2],
            [BoundaryKind::Outflow; 2],
        ],
    }
}

fn vortex_profile(p: &VortexParams, gas: &GasModel, x: [f64; 3]) -> PrimitiveState {
    let g = gas.gamma();
    let w = p.w;
    let lorentz = 1.0 / (1.0 - w * w).sqrt();
    let c1 = ((g - 1.0) / g) / (8.0 * PI * PI) * p.epsilon * p.epsilon;
    let shift = 0.5 * (lorentz - 1.0) * (x[0] + x[1]);
    let xt1 = x[0] + shift - 1.0;
    let xt2 = x[1] + shift - 1.0;
    let r2 = xt1 * xt1 + xt2 * xt2;
    let e = c1 * (1.0 - r2).exp();
    let rho = (1.0 - e).powf(1.0 / (g - 1.0));
    let c2 = 2.0 * g * e / (2.0 * g - 1.0 - g * e);
    let f = (c2 / (1.0 + c2 * r2)).sqrt();
    let (vt1, vt2) = (-xt2 * f, xt1 * f);
    let s2 = 2f64.sqrt();
    let den = 1.0 - w * (vt1 + vt2) / s2;
    let common = -w / s2 + lorentz * w * w / (2.0 * (lorentz + 1.0)) * (vt1 + vt2);
    let v1 = (vt1 / lorentz + common) / den;
    let v2 = (vt2 / lorentz + common) / den;
    PrimitiveState {
        rho,
        v: [v1, v2, 0.0],
        p: rho.powf(g),
    }
}

fn wrap(x: f64, lo: f64, hi: f64) -> f64 {
    let len = hi - lo;
    let y = (x - lo).rem_euclid(len) + lo;
    if y >= hi {
        lo
    } else {
        y
    }
}

fn quadrant(states: [[f64; 4]; 4], x: [f64; 3]) -> PrimitiveState {
    let q = match (x[0] > 0.5, x[1] > 0.5) {
        (true, true) => 0,
        (false, true) => 1,
        (false, false) => 2,
        (true, false) => 3,
    };
    let [rho, v1, v2, p] = states[q];
    PrimitiveState {
        rho,
        v: [v1, v2, 0.0],
        p,
    }
}

const RP1: [[f64; 4]; 4] = [
    [0.5, 0.5, -0.5, 5.0],
    [1.0, 0.5, 0.5, 5.0],
    [3.0, -0.5, 0.5, 5.0],
    [1.5, -0.5, -0.5, 5.0],
];
const RP2: [[f64; 4]; 4] = [
    [1.0, 0.0, 0.0, 1.0],
    [0.5771, -0.3529, 0.0, 0.4],
    [1.0, -0.3529, -0.3529, 1.0],
    [0.5771, 0.0, -0.3529, 0.4],
];
const RP3: [[f64; 4]; 4] = [
    [0.035145216124503, 0.0, 0.0, 0.162931056509027],
    [0.1, 0.7, 0.0, 1.0],
    [0.5, 0.0, 0.0, 1.0],
    [0.1, 0.0, 0.7, 1.0],
];

impl CaseSpec {
    /// State at `x` and `t = 0`.
    pub fn initial(&self, x: [f64; 3]) -> PrimitiveState {
        match self.kind {
            CaseKind::Vortex(p) => {
                let d = &self.domain;
                let y = [
                    wrap(x[0], d.lo[0], d.hi[0]),
                    wrap(x[1], d.lo[1], d.hi[1]),
                    0.0,
                ];
                vortex_profile(&p, &self.gas, y)
            }
            CaseKind::Riemann2d(1) => quadrant(RP1, x),
            CaseKind::Riemann2d(2) => quadrant(RP2, x),
            CaseKind::Riemann2d(_) => quadrant(RP3, x),
            CaseKind::Sine3d => sine3d(x, 0.0),
            CaseKind::SphericalRiemann => {
                let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
                if r2 < 0.25 {
                    PrimitiveState::at_rest(10.0, 40.0 / 3.0)
                } else {
                    PrimitiveState::at_rest(1.0, 1e-6)
                }
            }
            CaseKind::ShockBubble => {
                let b = (x[0] - 215.0).powi(2) + x[1] * x[1] + x[2] * x[2];
                if b <= 625.0 {
                    SHOCK_BUBBLE_BUBBLE
                } else if x[0] < 265.0 {
                    SHOCK_BUBBLE_PRE
                } else {
                    SHOCK_BUBBLE_POST
                }
            }
        }
    }

    pub fn has_exact(&self) -> bool {
        matches!(self.kind, CaseKind::Vortex(_) | CaseKind::Sine3d)
    }

    /// Exact solution at `(x, t)` where one is known.
    pub fn exact(&self, x: [f64; 3], t: f64) -> Option<PrimitiveState> {
        match self.kind {
            CaseKind::Vortex(p) => {
                let s = p.w / 2f64.sqrt() * t;
                Some(self.initial([x[0] + s, x[1] + s, 0.0]))
            }
            CaseKind::Sine3d => Some(sine3d(x, t)),
            _ => None,
        }
    }

    pub fn periodic(&self) -> [bool; 3] {
        [0, 1, 2].map(|d| self.boundaries[d][0] == BoundaryKind::Periodic)
    }

    pub fn mesh(&self, n: [usize; 3]) -> Result<StructuredMesh> {
        StructuredMesh::uniform(self.dim, n, &self.domain, self.periodic())
    }

    /// Solver settings with this case's gas, boundaries and monitor.
    pub fn solver_config(&self) -> SolverConfig {
        let mut cfg = SolverConfig::new(self.dim, self.boundaries);
        cfg.gas = self.gas;
        cfg.adapt = AdaptationConfig {
            alpha: self.alpha,
            sigma: self.sigma,
            mu: self.mu,
            ..AdaptationConfig::default()
        };
        cfg
    }
}

fn sine3d(x: [f64; 3], t: f64) -> PrimitiveState {
    let v = [0.2, 0.4, 0.6];
    let rho = 1.0 + 0.2 * (2.0 * PI * (x[0] + x[1] + x[2] - (v[0] + v[1] + v[2]) * t)).sin();
    PrimitiveState { rho, v, p: 1.0 }
}

/// Density error norms over the cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms {
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
}

/// Density errors against the exact solution at the cell centres, averaged
/// over the computational cells (`Σ_i |e_i| ∏Δξ_k`).
pub fn density_errors(
    case: &CaseSpec,
    mesh: &StructuredMesh,
    sol: &SolutionField,
    t: f64,
) -> Option<ErrorNorms> {
    norms(case, mesh, sol, t, |_| 1.0)
}

/// Density errors weighted by the physical cell volumes `J_i ∏Δξ_k` and
/// normalised by the domain volume.
pub fn density_errors_weighted(
    case: &CaseSpec,
    mesh: &StructuredMesh,
    sol: &SolutionField,
    t: f64,
) -> Option<ErrorNorms> {
    norms(case, mesh, sol, t, |c| sol.jac[c])
}

fn norms(
    case: &CaseSpec,
    mesh: &StructuredMesh,
    sol: &SolutionField,
    t: f64,
    weight: impl Fn(usize) -> f64,
) -> Option<ErrorNorms> {
    if !case.has_exact() {
        return None;
    }
    let (mut l1, mut l2, mut linf, mut vol) = (0.0, 0.0, 0.0_f64, 0.0);
    for (c, (x, p)) in mesh.cell_centers().iter().zip(&sol.prim).enumerate() {
        let e = (p.rho - case.exact(*x, t)?.rho).abs();
        let w = weight(c);
        l1 += e * w;
        l2 += e * e * w;
        linf = linf.max(e);
        vol += w;
    }
    Some(ErrorNorms {
        l1: l1 / vol,
        l2: (l2 / vol).sqrt(),
        linf,
    })
}
