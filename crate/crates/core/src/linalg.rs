//! Fixed-size helpers for the 5x5 systems used throughout the flux kernels.

pub type Vec5 = [f64; 5];
pub type Mat5 = [[f64; 5]; 5];

pub const IDENTITY5: Mat5 = [
    [1.0, 0.0, 0.0, 0.0, 0.0],
    [0.0, 1.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 1.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 1.0, 0.0],
    [0.0, 0.0, 0.0, 0.0, 1.0],
];

#[inline]
pub fn mat_vec(a: &Mat5, x: &Vec5) -> Vec5 {
    let mut y = [0.0; 5];
    for (yi, row) in y.iter_mut().zip(a) {
        *yi = row[0] * x[0] + row[1] * x[1] + row[2] * x[2] + row[3] * x[3] + row[4] * x[4];
    }
    y
}

/// `aᵀ x`
#[inline]
pub fn mat_t_vec(a: &Mat5, x: &Vec5) -> Vec5 {
    let mut y = [0.0; 5];
    for (j, yj) in y.iter_mut().enumerate() {
        *yj = a[0][j] * x[0] + a[1][j] * x[1] + a[2][j] * x[2] + a[3][j] * x[3] + a[4][j] * x[4];
    }
    y
}

pub fn mat_mul(a: &Mat5, b: &Mat5) -> Mat5 {
    let mut c = [[0.0; 5]; 5];
    for i in 0..5 {
        for j in 0..5 {
            c[i][j] = (0..5).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

pub fn transpose(a: &Mat5) -> Mat5 {
    let mut t = [[0.0; 5]; 5];
    for i in 0..5 {
        for j in 0..5 {
            t[j][i] = a[i][j];
        }
    }
    t
}

#[inline]
pub fn dot(a: &Vec5, b: &Vec5) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3] + a[4] * b[4]
}

#[inline]
pub fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn max_abs(a: &Mat5) -> f64 {
    a.iter().flatten().fold(0.0_f64, |m, x| m.max(x.abs()))
}
