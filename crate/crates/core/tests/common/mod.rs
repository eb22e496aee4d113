#![allow(dead_code)]

use nalgebra::SMatrix;
use rand::Rng;
use rhdmm::linalg::{Mat5, Vec5};
use rhdmm::physics::{entropy_bundle, physical_flux, prim_to_cons, GasModel, PrimitiveState};

pub type M5 = SMatrix<f64, 5, 5>;

pub fn gas() -> GasModel {
    GasModel::new(5.0 / 3.0).unwrap()
}

/// Random admissible state with `|v| ≤ vmax` and `p/ρ` spanning four decades.
pub fn random_state<R: Rng>(rng: &mut R, vmax: f64) -> PrimitiveState {
    let rho = 10f64.powf(rng.gen_range(-1.0..1.0));
    let p = rho * 10f64.powf(rng.gen_range(-2.0..2.0));
    let speed = vmax * rng.gen::<f64>().sqrt();
    let ct: f64 = rng.gen_range(-1.0..1.0);
    let ph: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let st = (1.0 - ct * ct).sqrt();
    PrimitiveState::new(
        rho,
        [speed * st * ph.cos(), speed * st * ph.sin(), speed * ct],
        p,
    )
}

pub fn random_normal<R: Rng>(rng: &mut R) -> [f64; 3] {
    let ct: f64 = rng.gen_range(-1.0..1.0);
    let ph: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let st = (1.0 - ct * ct).sqrt();
    let len = 10f64.powf(rng.gen_range(-1.0..1.0));
    [len * st * ph.cos(), len * st * ph.sin(), len * ct]
}

pub fn to_m5(a: &Mat5) -> M5 {
    M5::from_fn(|i, j| a[i][j])
}

fn perturbed(prim: &PrimitiveState, j: usize, d: f64) -> PrimitiveState {
    let mut q = *prim;
    match j {
        0 => q.rho *= 1.0 + d,
        4 => q.p *= 1.0 + d,
        l => q.v[l - 1] += d,
    }
    q
}

/// Fourth-order central-difference Jacobian of `f` with respect to the
/// primitive variables `(ρ, v, p)`, with relative steps in `ρ` and `p`.
pub fn fd_primitive_jacobian(prim: &PrimitiveState, f: impl Fn(&PrimitiveState) -> Vec5) -> M5 {
    let h = 1e-4;
    let mut out = M5::zeros();
    for j in 0..5 {
        let at = |k: f64| f(&perturbed(prim, j, k * h));
        let (p1, m1, p2, m2) = (at(1.0), at(-1.0), at(2.0), at(-2.0));
        let step = match j {
            0 => h * prim.rho,
            4 => h * prim.p,
            _ => h,
        };
        for i in 0..5 {
            out[(i, j)] = (8.0 * (p1[i] - m1[i]) - (p2[i] - m2[i])) / (12.0 * step);
        }
    }
    out
}

fn du_dw(prim: &PrimitiveState, gas: &GasModel) -> M5 {
    fd_primitive_jacobian(prim, |q| prim_to_cons(q, gas).unwrap().to_array())
}

/// `∂U/∂V` from finite differences in primitive space.
pub fn fd_du_dv(prim: &PrimitiveState, gas: &GasModel) -> M5 {
    let dv = fd_primitive_jacobian(prim, |q| entropy_bundle(q, gas).v);
    du_dw(prim, gas) * dv.try_inverse().expect("invertible")
}

/// `∂F₁/∂U` from finite differences in primitive space.
pub fn fd_df1_du(prim: &PrimitiveState, gas: &GasModel) -> M5 {
    let df = fd_primitive_jacobian(prim, |q| physical_flux(q, gas, 0));
    df * du_dw(prim, gas).try_inverse().expect("invertible")
}

/// `max |a - b| / max |b|`.
pub fn rel_diff(a: &M5, b: &M5) -> f64 {
    (a - b).amax() / b.amax()
}
