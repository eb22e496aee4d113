//! Two-point entropy conservative fluxes and the entropy stable dissipation.

use crate::error::{Error, Result};
use crate::linalg::{dot, mat_mul, mat_vec, transpose, Mat5, Vec5};
use crate::physics::{
    characteristic_decomposition, entropy_bundle, physical_flux, prim_to_cons, rotation_matrix,
    GasModel, PrimitiveState, Rotation,
};

/// Metric terms at one interface: `n_l = J ∂ξ_k/∂x_l` and `nt = J ∂ξ_k/∂t`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct InterfaceMetrics {
    pub n: [f64; 3],
    pub nt: f64,
}

impl InterfaceMetrics {
    pub fn new(n: [f64; 3], nt: f64) -> Self {
        InterfaceMetrics { n, nt }
    }

    pub fn length(&self) -> f64 {
        (self.n[0] * self.n[0] + self.n[1] * self.n[1] + self.n[2] * self.n[2]).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxContext {
    pub left: PrimitiveState,
    pub right: PrimitiveState,
    pub metrics: InterfaceMetrics,
    pub gas: GasModel,
}

/// Threshold on `((b-a)/(b+a))²` below which the series branch is used.
const LOG_MEAN_SERIES: f64 = 1e-4;

/// Logarithmic mean `(b - a) / (ln b - ln a)`.
pub fn log_mean(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0) || !(b > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(Error::Domain(format!("log mean of {a:e} and {b:e}")));
    }
    Ok(log_mean_with_logs(a, b, a.ln(), b.ln()))
}

#[inline]
pub(crate) fn log_mean_with_logs(a: f64, b: f64, ln_a: f64, ln_b: f64) -> f64 {
    let sum = a + b;
    let zeta = (b - a) / sum;
    let u = zeta * zeta;
    if u < LOG_MEAN_SERIES {
        let f = 1.0 + u * (1.0 / 3.0 + u * (1.0 / 5.0 + u * (1.0 / 7.0)));
        0.5 * sum / f
    } else {
        (b - a) / (ln_b - ln_a)
    }
}

/// `0` unless `a` and `b` share a sign, then the one of smaller magnitude.
#[inline]
pub fn minmod(a: f64, b: f64) -> f64 {
    if a * b <= 0.0 {
        0.0
    } else if a > 0.0 {
        a.min(b)
    } else {
        a.max(b)
    }
}

/// Per-cell quantities reused by every interface flux that touches the cell.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CellState {
    pub prim: PrimitiveState,
    pub w: f64,
    pub wv: [f64; 3],
    pub beta: f64,
    pub ln_rho: f64,
    pub ln_beta: f64,
    /// Entropy variables.
    pub ev: Vec5,
    /// Entropy potential `ρW`.
    pub phi: f64,
}

impl CellState {
    pub fn new(prim: &PrimitiveState, gas: &GasModel) -> Self {
        let w = prim.lorentz();
        let beta = prim.rho / prim.p;
        let b = entropy_bundle(prim, gas);
        CellState {
            prim: *prim,
            w,
            wv: [w * prim.v[0], w * prim.v[1], w * prim.v[2]],
            beta,
            ln_rho: prim.rho.ln(),
            ln_beta: beta.ln(),
            ev: b.v,
            phi: b.phi,
        }
    }
}

/// Mean quantities shared by the flux and the state of the two-point pair.
struct PairMeans {
    rho_ln: f64,
    w: f64,
    wv: [f64; 3],
    p_tilde: f64,
    alpha0: f64,
    inv: f64,
}

#[inline]
fn pair_means(l: &CellState, r: &CellState, gas: &GasModel) -> PairMeans {
    let rho_ln = log_mean_with_logs(l.prim.rho, r.prim.rho, l.ln_rho, r.ln_rho);
    let beta_ln = log_mean_with_logs(l.beta, r.beta, l.ln_beta, r.ln_beta);
    let rho_avg = 0.5 * (l.prim.rho + r.prim.rho);
    let beta_avg = 0.5 * (l.beta + r.beta);
    let w = 0.5 * (l.w + r.w);
    let wv = [
        0.5 * (l.wv[0] + r.wv[0]),
        0.5 * (l.wv[1] + r.wv[1]),
        0.5 * (l.wv[2] + r.wv[2]),
    ];
    let wv2 = wv[0] * wv[0] + wv[1] * wv[1] + wv[2] * wv[2];
    PairMeans {
        rho_ln,
        w,
        wv,
        p_tilde: rho_avg / beta_avg,
        alpha0: 1.0 + 1.0 / ((gas.gamma() - 1.0) * beta_ln),
        inv: 1.0 / (w * w - wv2),
    }
}

/// Entropy conservative flux `nt Ũ + Σ_l n_l F̃_l` from cached cell data.
#[inline]
pub(crate) fn ec_flux_cells(
    l: &CellState,
    r: &CellState,
    m: &InterfaceMetrics,
    gas: &GasModel,
) -> Vec5 {
    let pm = pair_means(l, r, gas);
    let n = &m.n;
    let q = n[0] * pm.wv[0] + n[1] * pm.wv[1] + n[2] * pm.wv[2];
    let f1 = pm.rho_ln * q;
    let f5 = pm.inv * pm.w * (pm.p_tilde * q + pm.alpha0 * f1);
    let c = f5 / pm.w;
    let mut f = [
        f1,
        pm.wv[0] * c + n[0] * pm.p_tilde,
        pm.wv[1] * c + n[1] * pm.p_tilde,
        pm.wv[2] * c + n[2] * pm.p_tilde,
        f5,
    ];
    if m.nt != 0.0 {
        let u = state_from_means(&pm);
        for (fi, ui) in f.iter_mut().zip(&u) {
            *fi += m.nt * ui;
        }
    }
    f
}

#[inline]
fn state_from_means(pm: &PairMeans) -> Vec5 {
    let wv2 = pm.wv[0] * pm.wv[0] + pm.wv[1] * pm.wv[1] + pm.wv[2] * pm.wv[2];
    let u1 = pm.rho_ln * pm.w;
    let u5 = pm.inv * pm.w * (pm.p_tilde * wv2 / pm.w + u1 * pm.alpha0);
    let c = (pm.p_tilde + u5) / pm.w;
    [u1, pm.wv[0] * c, pm.wv[1] * c, pm.wv[2] * c, u5]
}

/// Numerical entropy flux paired with a two-point flux `f`.
#[inline]
pub(crate) fn entropy_flux_cells(
    l: &CellState,
    r: &CellState,
    m: &InterfaceMetrics,
    f: &Vec5,
) -> f64 {
    let mut vbar = [0.0; 5];
    for k in 0..5 {
        vbar[k] = 0.5 * (l.ev[k] + r.ev[k]);
    }
    let phi = 0.5 * (l.phi + r.phi);
    let psi_n = 0.5
        * (l.prim.rho * (m.n[0] * l.wv[0] + m.n[1] * l.wv[1] + m.n[2] * l.wv[2])
            + r.prim.rho * (m.n[0] * r.wv[0] + m.n[1] * r.wv[1] + m.n[2] * r.wv[2]));
    dot(&vbar, f) - m.nt * phi - psi_n
}

/// Frozen characteristic data of one interface.
pub(crate) struct Characteristics {
    pub rot: Rotation,
    pub r: Mat5,
    /// `max_j |nt + L λ_j|`
    pub s: f64,
}

/// Decomposition at the means of `ρ`, `v` and `β = ρ/p`.
pub(crate) fn interface_characteristics(
    l: &PrimitiveState,
    r: &PrimitiveState,
    m: &InterfaceMetrics,
    gas: &GasModel,
) -> Result<Characteristics> {
    let rot = Rotation::from_normal(&m.n);
    let vbar = [
        0.5 * (l.v[0] + r.v[0]),
        0.5 * (l.v[1] + r.v[1]),
        0.5 * (l.v[2] + r.v[2]),
    ];
    let rho = 0.5 * (l.rho + r.rho);
    let beta = 0.5 * (l.rho / l.p + r.rho / r.p);
    let mean = PrimitiveState {
        rho,
        v: rot.apply(&vbar),
        p: rho / beta,
    };
    let (rmat, lambda) = characteristic_decomposition(&mean, gas)?;
    let len = m.length();
    let s = (m.nt + len * lambda[0])
        .abs()
        .max((m.nt + len * lambda[4]).abs());
    Ok(Characteristics { rot, r: rmat, s })
}

impl Characteristics {
    /// `w = Rᵀ T V`
    #[inline]
    pub fn scaled(&self, ev: &Vec5) -> Vec5 {
        crate::linalg::mat_t_vec(&self.r, &self.rot.apply5(ev))
    }

    /// `½ s Tᵀ R jump`
    #[inline]
    pub fn dissipation(&self, jump: &Vec5) -> Vec5 {
        let y = mat_vec(&self.r, jump);
        let mut d = self.rot.apply_transpose5(&y);
        for di in d.iter_mut() {
            *di *= 0.5 * self.s;
        }
        d
    }
}

/// Limited jump `w⁺ - w⁻` of the reconstruction at the interface between
/// stencil cells 1 and 2.
///
/// The acoustic and entropy components use the scalar minmod limiter. The
/// two shear components are limited as a pair: slopes are projected on the
/// direction of the interface jump before limiting, so the result does not
/// depend on the orientation of the tangential frame and keeps the sign of
/// the jump componentwise.
#[inline]
pub(crate) fn reconstructed_jump(w: &[Vec5; 4]) -> Vec5 {
    let mut out = [0.0; 5];
    for k in [0, 1, 4] {
        let dm = w[1][k] - w[0][k];
        let d0 = w[2][k] - w[1][k];
        let dp = w[3][k] - w[2][k];
        out[k] = d0 - 0.5 * (minmod(dm, d0) + minmod(d0, dp));
    }
    let j = [w[2][2] - w[1][2], w[2][3] - w[1][3]];
    let jj = j[0] * j[0] + j[1] * j[1];
    if jj > 0.0 {
        let am = (w[1][2] - w[0][2]) * j[0] + (w[1][3] - w[0][3]) * j[1];
        let ap = (w[3][2] - w[2][2]) * j[0] + (w[3][3] - w[2][3]) * j[1];
        let c = (jj - 0.5 * (minmod(am, jj) + minmod(jj, ap))) / jj;
        out[2] = c * j[0];
        out[3] = c * j[1];
    }
    out
}

/// Second-order entropy stable flux and its dissipation vector from cached
/// cell data of the stencil `i-1, i, i+1, i+2`.
#[inline]
pub(crate) fn es2_flux_cells(
    cells: [&CellState; 4],
    m: &InterfaceMetrics,
    gas: &GasModel,
) -> Result<(Vec5, Vec5)> {
    let f = ec_flux_cells(cells[1], cells[2], m, gas);
    let ch = interface_characteristics(&cells[1].prim, &cells[2].prim, m, gas)?;
    if ch.s == 0.0 {
        return Ok((f, [0.0; 5]));
    }
    let w = [
        ch.scaled(&cells[0].ev),
        ch.scaled(&cells[1].ev),
        ch.scaled(&cells[2].ev),
        ch.scaled(&cells[3].ev),
    ];
    let d = ch.dissipation(&reconstructed_jump(&w));
    Ok((sub(&f, &d), d))
}

/// First-order entropy stable flux `F̃ - ½ D ⟦V⟧`.
#[inline]
pub(crate) fn es1_flux_cells(
    l: &CellState,
    r: &CellState,
    m: &InterfaceMetrics,
    gas: &GasModel,
) -> Result<(Vec5, Vec5)> {
    let f = ec_flux_cells(l, r, m, gas);
    let ch = interface_characteristics(&l.prim, &r.prim, m, gas)?;
    let wl = ch.scaled(&l.ev);
    let wr = ch.scaled(&r.ev);
    let jump = [
        wr[0] - wl[0],
        wr[1] - wl[1],
        wr[2] - wl[2],
        wr[3] - wl[3],
        wr[4] - wl[4],
    ];
    let d = ch.dissipation(&jump);
    Ok((sub(&f, &d), d))
}

#[inline]
fn sub(a: &Vec5, b: &Vec5) -> Vec5 {
    [
        a[0] - b[0],
        a[1] - b[1],
        a[2] - b[2],
        a[3] - b[3],
        a[4] - b[4],
    ]
}

fn validated(prim: &PrimitiveState, gas: &GasModel) -> Result<CellState> {
    prim.validate()?;
    Ok(CellState::new(prim, gas))
}

/// `F̃_dir` for a Cartesian direction `dir` (0-based).
pub fn ec_flux_cartesian(
    left: &PrimitiveState,
    right: &PrimitiveState,
    gas: &GasModel,
    dir: usize,
) -> Result<Vec5> {
    if dir > 2 {
        return Err(Error::Invalid(format!("direction {dir} out of range")));
    }
    let mut n = [0.0; 3];
    n[dir] = 1.0;
    let (l, r) = (validated(left, gas)?, validated(right, gas)?);
    Ok(ec_flux_cells(&l, &r, &InterfaceMetrics::new(n, 0.0), gas))
}

/// The two-point state `Ũ` with `⟦V⟧ᵀ Ũ = ⟦φ⟧`.
pub fn ec_state(left: &PrimitiveState, right: &PrimitiveState, gas: &GasModel) -> Result<Vec5> {
    let (l, r) = (validated(left, gas)?, validated(right, gas)?);
    Ok(state_from_means(&pair_means(&l, &r, gas)))
}

pub fn ec_flux_curvilinear(ctx: &FluxContext) -> Result<Vec5> {
    let (l, r) = (
        validated(&ctx.left, &ctx.gas)?,
        validated(&ctx.right, &ctx.gas)?,
    );
    Ok(ec_flux_cells(&l, &r, &ctx.metrics, &ctx.gas))
}

/// `q̃ = ⟨V⟩ᵀ F - nt ⟨φ⟩ - Σ_l n_l ⟨ψ_l⟩` for a two-point flux `fhat`.
pub fn ec_entropy_flux(ctx: &FluxContext, fhat: &Vec5) -> Result<f64> {
    let (l, r) = (
        validated(&ctx.left, &ctx.gas)?,
        validated(&ctx.right, &ctx.gas)?,
    );
    Ok(entropy_flux_cells(&l, &r, &ctx.metrics, fhat))
}

/// `D = Tᵀ R |nt + L Λ| Rᵀ T` with the scalar choice of `|·|`, evaluated at
/// the interface mean state: arithmetic means of `ρ`, `v` and `β = ρ/p`,
/// with `p = ρ̄/β̄`.
pub fn dissipation_matrix(ctx: &FluxContext) -> Result<Mat5> {
    ctx.left.validate()?;
    ctx.right.validate()?;
    let ch = interface_characteristics(&ctx.left, &ctx.right, &ctx.metrics, &ctx.gas)?;
    let t = rotation_matrix(&ctx.metrics.n);
    let a = mat_mul(&transpose(&ch.r), &t);
    let mut d = mat_mul(&transpose(&a), &a);
    for row in d.iter_mut() {
        for x in row.iter_mut() {
            *x *= ch.s;
        }
    }
    Ok(d)
}

pub fn es_flux_first_order(ctx: &FluxContext) -> Result<Vec5> {
    let (l, r) = (
        validated(&ctx.left, &ctx.gas)?,
        validated(&ctx.right, &ctx.gas)?,
    );
    Ok(es1_flux_cells(&l, &r, &ctx.metrics, &ctx.gas)?.0)
}

/// Second-order entropy stable flux at the interface between `stencil[1]`
/// and `stencil[2]`; `ctx.left`/`ctx.right` are ignored in favour of the
/// stencil.
pub fn es_flux_second_order(stencil: &[PrimitiveState; 4], ctx: &FluxContext) -> Result<Vec5> {
    let c = [
        validated(&stencil[0], &ctx.gas)?,
        validated(&stencil[1], &ctx.gas)?,
        validated(&stencil[2], &ctx.gas)?,
        validated(&stencil[3], &ctx.gas)?,
    ];
    Ok(es2_flux_cells([&c[0], &c[1], &c[2], &c[3]], &ctx.metrics, &ctx.gas)?.0)
}

/// Moving-mesh point flux `nt U + Σ_l n_l F_l(U)`.
pub fn moving_point_flux(
    prim: &PrimitiveState,
    gas: &GasModel,
    m: &InterfaceMetrics,
) -> Result<Vec5> {
    let u = prim_to_cons(prim, gas)?.to_array();
    let mut f = [0.0; 5];
    for i in 0..5 {
        f[i] = m.nt * u[i];
    }
    for l in 0..3 {
        if m.n[l] != 0.0 {
            let fl = physical_flux(prim, gas, l);
            for i in 0..5 {
                f[i] += m.n[l] * fl[i];
            }
        }
    }
    Ok(f)
}
