//! Half-space Neumann function `N = Γ + R` with zero traction on `x₃ = 0`.
//!
//! The regular part is `R(x, y) = R¹(η) + y₃ R²(η) + y₃² R³(η)` with
//! `η = x − ỹ`, `ỹ = (y₁, y₂, −y₃)`. Gradients in `x` are evaluated by
//! running the same closed form over [`Dual3`].

use super::dual::{Dual3, Real};
use super::kelvin::{kelvin, kelvin_grad, kelvin_traction, traction_from_grad};
use crate::error::{BemError, Result};
use crate::geom::{Matrix3, Tensor333, Vec3};
use crate::moduli::ElasticModuli;

#[inline]
fn delta(a: usize, b: usize) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

/// The three matrices `[R¹, R², R³]` evaluated at `η`; requires `η₃ < 0`.
pub fn regular_terms(eta: Vec3, m: &ElasticModuli) -> [Matrix3; 3] {
    let t = terms_generic(eta.0, m);
    [Matrix3(t[0]), Matrix3(t[1]), Matrix3(t[2])]
}

fn terms_generic<T: Real>(eta: [T; 3], m: &ElasticModuli) -> [[[T; 3]; 3]; 3] {
    let c = m.cmn;
    let cnu = m.cnu;
    let a = 3.0 - 4.0 * m.nu;
    let rho = (eta[0] * eta[0] + eta[1] * eta[1] + eta[2] * eta[2]).sqrt();
    let f = T::cst(1.0) / rho;
    let g = T::cst(1.0) / (rho - eta[2]);
    let f3 = f * f * f;
    let f5 = f3 * f * f;
    let fg = f * g;
    let fg2 = fg * g;
    let zero = T::cst(0.0);
    let mut r1 = [[zero; 3]; 3];
    let mut r2 = [[zero; 3]; 3];
    let mut r3 = [[zero; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let (di3, dj3, dij) = (delta(i, 2), delta(j, 2), delta(i, j));
            let ee = eta[i] * eta[j];

            let mut v = -(ee * f3) * a;
            if dij != 0.0 {
                v = v - (f + g * cnu);
            }
            let lin = eta[j] * di3 - eta[i] * (dj3 * (1.0 - di3));
            v = v + lin * fg * cnu;
            let tang = (1.0 - di3) * (1.0 - dj3);
            if tang != 0.0 {
                v = v + ee * fg2 * (cnu * tang);
            }
            r1[i][j] = v * c;

            let sj = 1.0 - 2.0 * dj3;
            let mix = eta[j] * (di3 * (1.0 - dj3)) + eta[i] * (dj3 * (1.0 - di3));
            let mut w = mix * f3 * a + ee * eta[2] * f5 * (3.0 * sj);
            if dij != 0.0 {
                w = w - eta[2] * f3 * sj;
            }
            r2[i][j] = w * (2.0 * c);

            let mut s = -(ee * f5) * 3.0;
            if dij != 0.0 {
                s = s + f3;
            }
            r3[i][j] = s * (2.0 * c * sj);
        }
    }
    [r1, r2, r3]
}

/// `R¹ + y₃ R² + y₃² R³` at `η`, with `r2_sign` multiplying the `R²` term.
fn regular_generic<T: Real>(x: [T; 3], y: Vec3, m: &ElasticModuli, r2_sign: f64) -> [[T; 3]; 3] {
    let eta = [x[0] - y[0], x[1] - y[1], x[2] + y[2]];
    let [r1, r2, r3] = terms_generic(eta, m);
    let y3 = y[2];
    let mut out = r1;
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = out[i][j] + r2[i][j] * (r2_sign * y3) + r3[i][j] * (y3 * y3);
        }
    }
    out
}

fn check_pair(x: Vec3, y: Vec3) -> Result<()> {
    if !(x.is_finite() && y.is_finite()) {
        return Err(BemError::InvalidHalfSpacePoint("non-finite coordinates".into()));
    }
    if x[2] > 0.0 {
        return Err(BemError::InvalidHalfSpacePoint(format!("x3 = {} > 0", x[2])));
    }
    if y[2] > 0.0 {
        return Err(BemError::InvalidHalfSpacePoint(format!("y3 = {} > 0", y[2])));
    }
    if x[2] + y[2] >= 0.0 {
        return Err(BemError::InvalidHalfSpacePoint(
            "both points lie on the surface x3 = 0".into(),
        ));
    }
    Ok(())
}

/// Regular (Mindlin) part `R(x, y)` of the Neumann function.
///
/// Either point may lie on the surface but not both.
pub fn regular_part(x: Vec3, y: Vec3, m: &ElasticModuli) -> Result<Matrix3> {
    check_pair(x, y)?;
    Ok(Matrix3(regular_generic(x.0, y, m, 1.0)))
}

pub(crate) fn regular_grad_signed(x: Vec3, y: Vec3, m: &ElasticModuli, r2_sign: f64) -> Tensor333 {
    let r = regular_generic(Dual3::seed(x.0), y, m, r2_sign);
    let mut t = [[[0.0; 3]; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            t[i][j] = r[i][j].d;
        }
    }
    Tensor333(t)
}

/// `∂_{x_k} R_ij(x, y)`.
pub fn regular_grad(x: Vec3, y: Vec3, m: &ElasticModuli) -> Result<Tensor333> {
    check_pair(x, y)?;
    Ok(regular_grad_signed(x, y, m, 1.0))
}

/// Neumann function `N(x, y) = Γ(x − y) + R(x, y)`.
pub fn neumann(x: Vec3, y: Vec3, m: &ElasticModuli) -> Result<Matrix3> {
    check_pair(x, y)?;
    Ok(kelvin(x - y, m)? + Matrix3(regular_generic(x.0, y, m, 1.0)))
}

/// `∂_{x_k} N_ij(x, y)`.
pub fn neumann_grad(x: Vec3, y: Vec3, m: &ElasticModuli) -> Result<Tensor333> {
    check_pair(x, y)?;
    let g = kelvin_grad(x - y, m)?;
    let r = regular_grad_signed(x, y, m, 1.0);
    Ok(add_tensors(&g, &r))
}

pub(crate) fn add_tensors(a: &Tensor333, b: &Tensor333) -> Tensor333 {
    let mut t = a.0;
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                t[i][j][k] += b.0[i][j][k];
            }
        }
    }
    Tensor333(t)
}

/// Traction of the regular part in `x` on a surface with normal `n`; column
/// `k` is `(C ∇̂_x R^(k)) n`.
pub fn regular_traction(x: Vec3, n: Vec3, y: Vec3, m: &ElasticModuli) -> Result<Matrix3> {
    check_pair(x, y)?;
    Ok(traction_from_grad(&regular_grad_signed(x, y, m, 1.0), n, m))
}

/// Traction of the full Neumann function in `x`; zero on `x₃ = 0` for
/// `n = e₃`.
pub fn neumann_traction(x: Vec3, n: Vec3, y: Vec3, m: &ElasticModuli) -> Result<Matrix3> {
    check_pair(x, y)?;
    Ok(kelvin_traction(x - y, n, m)? + traction_from_grad(&regular_grad_signed(x, y, m, 1.0), n, m))
}

/// Neumann function for the unit-depth source `(0, 0, −1)` written in its
/// own closed form. Independent of [`regular_terms`]; used as a cross-check.
pub fn appendix_neumann(x: Vec3, m: &ElasticModuli) -> Result<Matrix3> {
    if x[2] > 0.0 || !x.is_finite() {
        return Err(BemError::InvalidHalfSpacePoint(format!("x3 = {} > 0", x[2])));
    }
    let src = Vec3::new(x[0], x[1], x[2] + 1.0).norm();
    if src < 1e-300 {
        return Err(BemError::SingularPoint);
    }
    let img = Vec3::new(x[0], x[1], x[2] - 1.0).norm();
    let c = m.cmn;
    let cnu = m.cnu;
    let a = 3.0 - 4.0 * m.nu;
    let phi = 1.0 / src;
    let pt = 1.0 / img;
    let ps = 1.0 / (img - (x[2] - 1.0));
    let (phi3, pt3) = (phi.powi(3), pt.powi(3));
    let pt5 = pt3 * pt * pt;
    let x3 = x[2];
    let mut n = [[0.0; 3]; 3];
    for al in 0..2 {
        let xa = x[al];
        let xa2 = xa * xa;
        n[al][al] = -c
            * (a * phi + xa2 * phi3 + pt + (a * xa2 - 2.0 * x3) * pt3 + 6.0 * xa2 * x3 * pt5
                + cnu * (ps - xa2 * pt * ps * ps));
        n[2][al] = -c
            * xa
            * ((x3 + 1.0) * phi3 + a * (x3 + 1.0) * pt3 + 6.0 * x3 * (x3 - 1.0) * pt5
                - cnu * pt * ps);
        n[al][2] = -c
            * xa
            * ((x3 + 1.0) * phi3 + a * (x3 + 1.0) * pt3 - 6.0 * x3 * (x3 - 1.0) * pt5
                + cnu * pt * ps);
    }
    let off = -c * x[0] * x[1] * (phi3 + a * pt3 + 6.0 * x3 * pt5 - cnu * pt * ps * ps);
    n[0][1] = off;
    n[1][0] = off;
    let s = x3 - 1.0;
    n[2][2] = -c
        * (a * phi + (x3 + 1.0).powi(2) * phi3 + (1.0 + cnu) * pt + (a * s * s + 2.0 * x3) * pt3
            - 6.0 * x3 * s * s * pt5);
    Ok(Matrix3(n))
}
