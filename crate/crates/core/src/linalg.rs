//! Fixed-size dense helpers for the 3-state phase model and its 4x4
//! augmented form.

use crate::error::{Error, Result};

pub type Vec3 = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];
pub type Mat4 = [[f64; 4]; 4];

pub fn mat3_vec(m: &Mat3, x: &Vec3) -> Vec3 {
    let mut out = [0.0; 3];
    for (o, row) in out.iter_mut().zip(m) {
        *o = row[0] * x[0] + row[1] * x[1] + row[2] * x[2];
    }
    out
}

fn mat4_mul(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut out = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let mut acc = 0.0;
            for k in 0..4 {
                acc += a[i][k] * b[k][j];
            }
            out[i][j] = acc;
        }
    }
    out
}

fn identity4() -> Mat4 {
    let mut id = [[0.0; 4]; 4];
    for (i, row) in id.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    id
}

fn inf_norm4(m: &Mat4) -> f64 {
    m.iter().map(|row| row.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// Scaled norm at or below which the truncated Taylor series is used directly.
const TAYLOR_RADIUS: f64 = 0.25;
/// 0.25^20 / 20! is far below f64 resolution.
const TAYLOR_TERMS: usize = 20;
const MAX_SQUARINGS: u32 = 60;

/// Matrix exponential by scaling and squaring of a truncated Taylor series.
///
/// Zero rows of `m` stay exactly zero in every power, so the corresponding
/// rows of the result are exactly the identity rows.
pub fn expm4(m: &Mat4) -> Result<Mat4> {
    let norm = inf_norm4(m);
    if !norm.is_finite() {
        return Err(Error::Numeric("matrix exponential of non-finite matrix"));
    }
    let mut squarings = 0u32;
    let mut scaled_norm = norm;
    while scaled_norm > TAYLOR_RADIUS {
        scaled_norm *= 0.5;
        squarings += 1;
        if squarings > MAX_SQUARINGS {
            return Err(Error::Numeric("matrix exponential scaling did not converge"));
        }
    }
    let scale = libm::ldexp(1.0, -(squarings as i32));
    let mut a = *m;
    for row in a.iter_mut() {
        for v in row.iter_mut() {
            *v *= scale;
        }
    }

    let mut result = identity4();
    let mut term = identity4();
    for k in 1..=TAYLOR_TERMS {
        term = mat4_mul(&term, &a);
        let inv_k = 1.0 / k as f64;
        for row in term.iter_mut() {
            for v in row.iter_mut() {
                *v *= inv_k;
            }
        }
        for (r, t) in result.iter_mut().zip(&term) {
            for (rv, tv) in r.iter_mut().zip(t) {
                *rv += tv;
            }
        }
    }
    for _ in 0..squarings {
        result = mat4_mul(&result, &result);
    }
    if result.iter().flatten().all(|v| v.is_finite()) {
        Ok(result)
    } else {
        Err(Error::Numeric("matrix exponential overflowed"))
    }
}
