//! Ideal-gas special relativistic thermodynamics.
//!
//! States always carry a three-component velocity/momentum. Two-dimensional
//! runs keep the third component identically zero; every formula below then
//! reduces exactly to its planar form (the `x3` wave decouples).

use crate::error::{Error, Result};
use crate::linalg::{Mat5, Vec5};

/// Adiabatic index of the ideal-gas closure `p = (Γ-1) ρ e`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasModel {
    gamma: f64,
}

impl GasModel {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > 1.0 && gamma <= 2.0) {
            return Err(Error::Domain(format!(
                "adiabatic index {gamma} outside (1, 2]"
            )));
        }
        Ok(GasModel { gamma })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

impl Default for GasModel {
    fn default() -> Self {
        GasModel { gamma: 5.0 / 3.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PrimitiveState {
    pub rho: f64,
    pub v: [f64; 3],
    pub p: f64,
}

impl PrimitiveState {
    pub fn new(rho: f64, v: [f64; 3], p: f64) -> Self {
        PrimitiveState { rho, v, p }
    }

    pub fn at_rest(rho: f64, p: f64) -> Self {
        PrimitiveState {
            rho,
            v: [0.0; 3],
            p,
        }
    }

    pub fn speed_sq(&self) -> f64 {
        self.v[0] * self.v[0] + self.v[1] * self.v[1] + self.v[2] * self.v[2]
    }

    pub fn lorentz(&self) -> f64 {
        1.0 / (1.0 - self.speed_sq()).sqrt()
    }

    pub fn enthalpy(&self, gas: &GasModel) -> f64 {
        let g = gas.gamma;
        1.0 + g / (g - 1.0) * self.p / self.rho
    }

    /// Thermodynamic entropy `s = ln(p / ρ^Γ)`.
    pub fn entropy(&self, gas: &GasModel) -> f64 {
        (self.p / self.rho.powf(gas.gamma)).ln()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0) || !(self.p > 0.0) {
            return Err(Error::Unphysical(format!(
                "rho = {:e}, p = {:e} must be positive",
                self.rho, self.p
            )));
        }
        if !(self.speed_sq() < 1.0) {
            return Err(Error::Domain(format!("|v|^2 = {} >= 1", self.speed_sq())));
        }
        Ok(())
    }

    pub fn to_array(&self) -> Vec5 {
        [self.rho, self.v[0], self.v[1], self.v[2], self.p]
    }

    pub fn from_array(a: &Vec5) -> Self {
        PrimitiveState {
            rho: a[0],
            v: [a[1], a[2], a[3]],
            p: a[4],
        }
    }
}

/// Conserved vector `U = (D, m, E)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ConservedState {
    pub d: f64,
    pub m: [f64; 3],
    pub e: f64,
}

impl ConservedState {
    pub fn to_array(&self) -> Vec5 {
        [self.d, self.m[0], self.m[1], self.m[2], self.e]
    }

    pub fn from_array(a: &Vec5) -> Self {
        ConservedState {
            d: a[0],
            m: [a[1], a[2], a[3]],
            e: a[4],
        }
    }

    pub fn momentum_sq(&self) -> f64 {
        self.m[0] * self.m[0] + self.m[1] * self.m[1] + self.m[2] * self.m[2]
    }

    /// `E - sqrt(D² + |m|²)`, positive for every admissible state.
    pub fn admissibility_margin(&self) -> f64 {
        self.e - (self.d * self.d + self.momentum_sq()).sqrt()
    }
}

/// Entropy function, flux, variables and potentials of one state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyBundle {
    pub eta: f64,
    pub q: [f64; 3],
    pub v: Vec5,
    pub phi: f64,
    pub psi: [f64; 3],
}

pub fn prim_to_cons(prim: &PrimitiveState, gas: &GasModel) -> Result<ConservedState> {
    if !(prim.speed_sq() < 1.0) {
        return Err(Error::Domain(format!("|v|^2 = {} >= 1", prim.speed_sq())));
    }
    Ok(prim_to_cons_unchecked(prim, gas))
}

#[inline]
pub(crate) fn prim_to_cons_unchecked(prim: &PrimitiveState, gas: &GasModel) -> ConservedState {
    let w2 = 1.0 / (1.0 - prim.speed_sq());
    let w = w2.sqrt();
    let rhw2 = prim.rho * prim.enthalpy(gas) * w2;
    ConservedState {
        d: prim.rho * w,
        m: [rhw2 * prim.v[0], rhw2 * prim.v[1], rhw2 * prim.v[2]],
        e: rhw2 - prim.p,
    }
}

const NEWTON_STEPS: usize = 50;
const BISECTION_STEPS: usize = 200;
const PRESSURE_TOL: f64 = 1e-13;

/// Recovers the primitive state by solving
/// `E + p = D W + Γ/(Γ-1) p W²` for the pressure, with `W = W(p)` from
/// `|v| = |m| / (E + p)`.
///
/// Safeguarded Newton on `[p_min, E]`, falling back to bisection.
pub fn cons_to_prim(cons: &ConservedState, gas: &GasModel) -> Result<PrimitiveState> {
    let d = cons.d;
    let e = cons.e;
    let m2 = cons.momentum_sq();
    let m = m2.sqrt();
    if !(d > 0.0) || !(e > 0.0) || !cons.admissibility_margin().is_finite() {
        return Err(Error::Unphysical(format!("D = {d:e}, E = {e:e}")));
    }
    if !(cons.admissibility_margin() > 0.0) {
        return Err(Error::Unphysical(format!(
            "E - sqrt(D^2 + |m|^2) = {:e} <= 0",
            cons.admissibility_margin()
        )));
    }
    let g = gas.gamma;
    let gk = g / (g - 1.0);

    // f(p) > 0 at the lower end and < 0 at p = E for admissible states.
    let residual = |p: f64| -> (f64, f64) {
        let ep = e + p;
        let w = ep / ((ep - m) * (ep + m)).sqrt();
        let dw = -w * w * w * m2 / (ep * ep * ep);
        let f = ep - d * w - gk * p * w * w;
        let df = 1.0 - d * dw - gk * (w * w + 2.0 * p * w * dw);
        (f, df)
    };

    let eps = f64::MIN_POSITIVE;
    let mut lo = eps.max(m - e + eps * e);
    let mut hi = e;
    if residual(lo).0 <= 0.0 {
        return Err(Error::Unphysical(format!(
            "no pressure root in bracket [{lo:e}, {hi:e}]"
        )));
    }

    let q = cons.admissibility_margin();
    let mut p = ((g - 1.0) * q).clamp(lo, hi);
    let mut converged = false;
    let mut iterations = 0;
    for _ in 0..NEWTON_STEPS {
        iterations += 1;
        let (f, df) = residual(p);
        if f == 0.0 {
            converged = true;
            break;
        }
        if f > 0.0 {
            lo = p;
        } else {
            hi = p;
        }
        let mut next = p - f / df;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let step = (next - p).abs();
        p = next;
        if step <= PRESSURE_TOL * p {
            converged = true;
            break;
        }
    }
    if !converged {
        for _ in 0..BISECTION_STEPS {
            iterations += 1;
            let mid = 0.5 * (lo + hi);
            let (f, _) = residual(mid);
            if f > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            p = 0.5 * (lo + hi);
            if hi - lo <= PRESSURE_TOL * p {
                converged = true;
                break;
            }
        }
    }
    if !converged || !p.is_finite() {
        return Err(Error::NonConvergence {
            iterations,
            last: p,
        });
    }

    let ep = e + p;
    let w = ep / ((ep - m) * (ep + m)).sqrt();
    Ok(PrimitiveState {
        rho: d / w,
        v: [cons.m[0] / ep, cons.m[1] / ep, cons.m[2] / ep],
        p,
    })
}

/// Physical flux `F_k(U)` in coordinate direction `k` (0-based).
pub fn physical_flux(prim: &PrimitiveState, gas: &GasModel, k: usize) -> Vec5 {
    let u = prim_to_cons_unchecked(prim, gas);
    let vk = prim.v[k];
    let mut f = [u.d * vk, u.m[0] * vk, u.m[1] * vk, u.m[2] * vk, u.m[k]];
    f[1 + k] += prim.p;
    f
}

pub fn entropy_bundle(prim: &PrimitiveState, gas: &GasModel) -> EntropyBundle {
    let g = gas.gamma;
    let w = prim.lorentz();
    let s = prim.entropy(gas);
    let rw = prim.rho * w;
    let eta = -rw * s / (g - 1.0);
    let beta_w = rw / prim.p;
    EntropyBundle {
        eta,
        q: [eta * prim.v[0], eta * prim.v[1], eta * prim.v[2]],
        v: [
            (g - s) / (g - 1.0) + prim.rho / prim.p,
            beta_w * prim.v[0],
            beta_w * prim.v[1],
            beta_w * prim.v[2],
            -beta_w,
        ],
        phi: rw,
        psi: [rw * prim.v[0], rw * prim.v[1], rw * prim.v[2]],
    }
}

/// `c_s = sqrt(Γ p / (ρ h))`.
pub fn sound_speed(prim: &PrimitiveState, gas: &GasModel) -> f64 {
    (gas.gamma * prim.p / (prim.rho * prim.enthalpy(gas))).sqrt()
}

/// Eigenvalues of `∂F₁/∂U`, ascending: `λ₋, v₁, v₁, v₁, λ₊`.
pub fn eigenvalues(prim: &PrimitiveState, gas: &GasModel) -> Result<Vec5> {
    let cs2 = sound_speed(prim, gas).powi(2);
    let v1 = prim.v[0];
    let vv = prim.speed_sq();
    let radicand = 1.0 - v1 * v1 - (vv - v1 * v1) * cs2;
    if !(radicand >= 0.0) {
        return Err(Error::Domain(format!(
            "negative characteristic radicand {radicand:e}"
        )));
    }
    let (lm, lp) = acoustic_speeds(v1, vv, cs2, prim.lorentz(), radicand);
    Ok([lm, v1, v1, v1, lp])
}

/// Acoustic speeds `λ₋, λ₊` along a unit direction in which the velocity
/// component is `vn`; the radicand is clamped at zero.
pub fn directional_speeds(prim: &PrimitiveState, gas: &GasModel, vn: f64) -> (f64, f64) {
    let cs2 = gas.gamma * prim.p / (prim.rho * prim.enthalpy(gas));
    let vv = prim.speed_sq();
    let radicand = (1.0 - vn * vn - (vv - vn * vn) * cs2).max(0.0);
    acoustic_speeds(vn, vv, cs2, prim.lorentz(), radicand)
}

#[inline]
fn acoustic_speeds(v1: f64, vv: f64, cs2: f64, w: f64, radicand: f64) -> (f64, f64) {
    let cs = cs2.sqrt();
    let a = v1 * (1.0 - cs2);
    let b = cs / w * radicand.sqrt();
    let den = 1.0 - vv * cs2;
    ((a - b) / den, (a + b) / den)
}

/// Lower clamp for `1 - v₁² - v₂²` in the eigenvector scaling.
const SCALING_FLOOR: f64 = 1e-14;

/// Scaled right eigenvectors `R` of `∂F₁/∂U` with `R Rᵀ = ∂U/∂V`,
/// together with the matching eigenvalues.
pub fn scaled_eigenvectors(prim: &PrimitiveState, gas: &GasModel) -> Result<Mat5> {
    prim.validate()?;
    let (r, _) = characteristic_decomposition(prim, gas)?;
    Ok(r)
}

pub(crate) fn characteristic_decomposition(
    prim: &PrimitiveState,
    gas: &GasModel,
) -> Result<(Mat5, Vec5)> {
    let g = gas.gamma;
    let rho = prim.rho;
    let p = prim.p;
    let [v1, v2, v3] = prim.v;
    let vv = prim.speed_sq();
    let w = prim.lorentz();
    let h = prim.enthalpy(gas);
    let cs2 = g * p / (rho * h);
    let cs = cs2.sqrt();

    let one_v1 = 1.0 - v1 * v1;
    let radicand = one_v1 - (vv - v1 * v1) * cs2;
    if !(radicand >= 0.0) || !(one_v1 > 0.0) {
        return Err(Error::Degenerate(format!(
            "1 - v1^2 = {one_v1:e}, radicand = {radicand:e}"
        )));
    }
    let mut one_v12 = 1.0 - v1 * v1 - v2 * v2;
    if !(one_v12 > 0.0) {
        return Err(Error::Degenerate(format!("1 - v1^2 - v2^2 = {one_v12:e}")));
    }
    one_v12 = one_v12.max(SCALING_FLOOR);

    let (lm, lp) = acoustic_speeds(v1, vv, cs2, w, radicand);
    let a_m = one_v1 / (1.0 - v1 * lm);
    let a_p = one_v1 / (1.0 - v1 * lp);
    let sq = radicand.sqrt();
    let b = rho * w * radicand / (g * one_v1);
    let c = rho * v1 * cs * sq / (g * one_v1);

    let hw = h * w;
    let hw2 = h * w * w;
    let r0: Mat5 = [
        [1.0, 1.0 / w, w * v2, w * v3, 1.0],
        [
            hw * a_m * lm,
            v1,
            2.0 * hw2 * v1 * v2,
            2.0 * hw2 * v1 * v3,
            hw * a_p * lp,
        ],
        [
            hw * v2,
            v2,
            h * (1.0 + 2.0 * w * w * v2 * v2),
            2.0 * hw2 * v2 * v3,
            hw * v2,
        ],
        [
            hw * v3,
            v3,
            2.0 * hw2 * v2 * v3,
            h * (1.0 + 2.0 * w * w * v3 * v3),
            hw * v3,
        ],
        [hw * a_m, 1.0, 2.0 * hw2 * v2, 2.0 * hw2 * v3, hw * a_p],
    ];
    let s11 = (0.5 * (b - c)).sqrt();
    let s22 = ((g - 1.0) * rho * w * w * w / g).sqrt();
    let s33 = (p * w * one_v12 / (h * one_v1)).sqrt();
    let s43 = -v2 * v3 * (p * w / (h * one_v1 * one_v12)).sqrt();
    let s44 = (p / (hw * one_v12)).sqrt();
    let s55 = (0.5 * (b + c)).sqrt();

    let mut r = [[0.0; 5]; 5];
    for i in 0..5 {
        r[i][0] = r0[i][0] * s11;
        r[i][1] = r0[i][1] * s22;
        r[i][2] = r0[i][2] * s33 + r0[i][3] * s43;
        r[i][3] = r0[i][3] * s44;
        r[i][4] = r0[i][4] * s55;
    }
    Ok((r, [lm, v1, v1, v1, lp]))
}

/// Orthogonal rotation taking the unit normal `n/|n|` onto the `x₁` axis.
///
/// Angles follow `θ = atan2(n₂, n₁)` and `φ = atan2(n₃, sqrt(n₁² + n₂²))`;
/// the cosines and sines are formed directly from the components so that
/// axis-aligned normals rotate exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation {
    pub m: [[f64; 3]; 3],
}

impl Rotation {
    pub fn from_normal(n: &[f64; 3]) -> Rotation {
        let r12 = (n[0] * n[0] + n[1] * n[1]).sqrt();
        let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        let (ct, st, cp, sp) = if len == 0.0 {
            (1.0, 0.0, 1.0, 0.0)
        } else if r12 == 0.0 {
            (1.0, 0.0, 0.0, n[2].signum())
        } else {
            (n[0] / r12, n[1] / r12, r12 / len, n[2] / len)
        };
        Rotation {
            m: [
                [cp * ct, cp * st, sp],
                [-st, ct, 0.0],
                [-sp * ct, -sp * st, cp],
            ],
        }
    }

    #[inline]
    pub fn apply(&self, v: &[f64; 3]) -> [f64; 3] {
        let m = &self.m;
        [
            m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
        ]
    }

    #[inline]
    pub fn apply_transpose(&self, v: &[f64; 3]) -> [f64; 3] {
        let m = &self.m;
        [
            m[0][0] * v[0] + m[1][0] * v[1] + m[2][0] * v[2],
            m[0][1] * v[0] + m[1][1] * v[1] + m[2][1] * v[2],
            m[0][2] * v[0] + m[1][2] * v[1] + m[2][2] * v[2],
        ]
    }

    /// Rotates the momentum-like block (entries 1..4) of a 5-vector.
    #[inline]
    pub fn apply5(&self, u: &Vec5) -> Vec5 {
        let r = self.apply(&[u[1], u[2], u[3]]);
        [u[0], r[0], r[1], r[2], u[4]]
    }

    #[inline]
    pub fn apply_transpose5(&self, u: &Vec5) -> Vec5 {
        let r = self.apply_transpose(&[u[1], u[2], u[3]]);
        [u[0], r[0], r[1], r[2], u[4]]
    }
}

/// The 5x5 rotation `T` acting on `(D, m, E)`.
pub fn rotation_matrix(n: &[f64; 3]) -> Mat5 {
    let rot = Rotation::from_normal(n);
    let mut t = crate::linalg::IDENTITY5;
    for i in 0..3 {
        for j in 0..3 {
            t[i + 1][j + 1] = rot.m[i][j];
        }
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn gas() -> GasModel {
        GasModel::default()
    }

    #[test]
    fn rest_states_convert_in_closed_form() {
        let u = prim_to_cons(&PrimitiveState::at_rest(1.0, 1.0), &gas()).unwrap();
        assert_relative_eq!(u.d, 1.0);
        assert_eq!(u.m, [0.0; 3]);
        assert_relative_eq!(u.e, 2.5, epsilon = 1e-15);

        let u = prim_to_cons(&PrimitiveState::at_rest(10.0, 40.0 / 3.0), &gas()).unwrap();
        assert_relative_eq!(u.d, 10.0);
        assert_relative_eq!(u.e, 30.0, epsilon = 1e-13);

        let p = cons_to_prim(
            &ConservedState {
                d: 1.0,
                m: [0.0; 3],
                e: 2.5,
            },
            &gas(),
        )
        .unwrap();
        assert_relative_eq!(p.rho, 1.0, epsilon = 1e-14);
        assert_relative_eq!(p.p, 1.0, epsilon = 1e-13);
        assert_eq!(p.v, [0.0; 3]);
    }

    #[test]
    fn superluminal_velocity_is_rejected() {
        let s = PrimitiveState::new(1.0, [0.8, 0.7, 0.0], 1.0);
        assert!(matches!(prim_to_cons(&s, &gas()), Err(Error::Domain(_))));
    }

    #[test]
    fn post_shock_state_roundtrips() {
        let s = PrimitiveState::new(1.865225080631180, [-0.196781107378299, 0.0, 0.0], 0.15);
        let u = prim_to_cons(&s, &gas()).unwrap();
        let back = cons_to_prim(&u, &gas()).unwrap();
        assert_relative_eq!(back.rho, s.rho, max_relative = 1e-13);
        assert_relative_eq!(back.v[0], s.v[0], max_relative = 1e-13);
        assert_relative_eq!(back.p, s.p, max_relative = 1e-12);
    }

    #[test]
    fn inadmissible_conserved_state_is_reported() {
        let u = ConservedState {
            d: 1.0,
            m: [2.0, 0.0, 0.0],
            e: 1.5,
        };
        assert!(matches!(
            cons_to_prim(&u, &gas()),
            Err(Error::Unphysical(_))
        ));
        let u = ConservedState {
            d: -1.0,
            m: [0.0; 3],
            e: 1.5,
        };
        assert!(cons_to_prim(&u, &gas()).is_err());
    }

    #[test]
    fn entropy_bundle_at_reference_state() {
        let b = entropy_bundle(&PrimitiveState::at_rest(1.0, 1.0), &gas());
        let g = 5.0 / 3.0;
        assert_eq!(b.eta, 0.0);
        assert_eq!(b.phi, 1.0);
        assert_eq!(b.psi, [0.0; 3]);
        assert_relative_eq!(b.v[0], g / (g - 1.0) + 1.0, epsilon = 1e-15);
        assert_eq!(b.v[4], -1.0);
    }

    #[test]
    fn sound_speed_reference_and_limit() {
        let c = sound_speed(&PrimitiveState::at_rest(1.0, 1.0), &gas());
        assert_relative_eq!(c, ((5.0 / 3.0) / 3.5_f64).sqrt(), epsilon = 1e-15);
        assert_relative_eq!(c, 0.690066, epsilon = 1e-6);
        let mut last = f64::INFINITY;
        for k in 0..12 {
            let c = sound_speed(&PrimitiveState::at_rest(1.0, 10f64.powi(-k)), &gas());
            assert!(c < last);
            last = c;
        }
        assert!(last < 1e-5);
    }

    #[test]
    fn eigenvalues_at_rest_are_sound_speeds() {
        let s = PrimitiveState::at_rest(1.0, 1.0);
        let l = eigenvalues(&s, &gas()).unwrap();
        let c = sound_speed(&s, &gas());
        assert_relative_eq!(l[0], -c, epsilon = 1e-15);
        assert_relative_eq!(l[4], c, epsilon = 1e-15);
        assert_eq!(&l[1..4], &[0.0; 3]);

        let s = PrimitiveState::new(1.0, [0.5, 0.0, 0.0], 1.0);
        let l = eigenvalues(&s, &gas()).unwrap();
        assert!(l[0] < 0.5 && 0.5 < l[4]);
    }

    #[test]
    fn rotation_of_axis_normals() {
        assert_eq!(rotation_matrix(&[1.0, 0.0, 0.0]), crate::linalg::IDENTITY5);
        let t = rotation_matrix(&[0.0, 2.0, 0.0]);
        // θ = π/2: normal momentum is m₂, tangential is -m₁.
        let u = [1.0, 0.3, 0.5, 0.7, 2.0];
        let tu = crate::linalg::mat_vec(&t, &u);
        assert_eq!(tu, [1.0, 0.5, -0.3, 0.7, 2.0]);
        let t = rotation_matrix(&[0.0, 0.0, -3.0]);
        let tu = crate::linalg::mat_vec(&t, &u);
        assert_eq!(tu, [1.0, -0.7, 0.5, 0.3, 2.0]);
    }

    #[test]
    fn rotation_fixes_density_and_energy() {
        let rot = Rotation::from_normal(&[-0.3, 0.8, 0.2]);
        let u = [1.3, 0.1, -0.2, 0.4, 3.0];
        let r = rot.apply5(&u);
        assert_eq!(r[0], u[0]);
        assert_eq!(r[4], u[4]);
        let back = rot.apply_transpose5(&r);
        for k in 0..5 {
            assert_relative_eq!(back[k], u[k], epsilon = 1e-15);
        }
    }
}
