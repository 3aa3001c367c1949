//! Free-space Kelvin matrix, its gradient and its traction kernel.

use crate::error::{BemError, Result};
use crate::geom::{Matrix3, Tensor333, Vec3};
use crate::moduli::ElasticModuli;

const SINGULAR_RADIUS: f64 = 1e-300;

fn check(x: Vec3) -> Result<f64> {
    let r = x.norm();
    if !(r >= SINGULAR_RADIUS) {
        return Err(BemError::SingularPoint);
    }
    Ok(r)
}

/// `Γ_ij(x) = −C {(3−4ν) δ_ij / |x| + x_i x_j / |x|³}`.
pub fn kelvin(x: Vec3, m: &ElasticModuli) -> Result<Matrix3> {
    let r = check(x)?;
    Ok(kelvin_unchecked(x, r, m))
}

#[inline]
pub(crate) fn kelvin_unchecked(x: Vec3, r: f64, m: &ElasticModuli) -> Matrix3 {
    let ir = 1.0 / r;
    let ir3 = ir * ir * ir;
    let a = (3.0 - 4.0 * m.nu) * ir;
    let mut g = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in i..3 {
            let mut v = x[i] * x[j] * ir3;
            if i == j {
                v += a;
            }
            g[i][j] = -m.cmn * v;
            g[j][i] = g[i][j];
        }
    }
    Matrix3(g)
}

/// `t[i][j][k] = ∂_k Γ_ij(x)`.
pub fn kelvin_grad(x: Vec3, m: &ElasticModuli) -> Result<Tensor333> {
    let r = check(x)?;
    let ir2 = 1.0 / (r * r);
    let ir3 = ir2 / r;
    let ir5 = ir3 * ir2;
    let a = 3.0 - 4.0 * m.nu;
    let d = |p: usize, q: usize| if p == q { 1.0 } else { 0.0 };
    let mut t = [[[0.0; 3]; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                let v = (a * d(i, j) * x[k] - d(i, k) * x[j] - d(j, k) * x[i]) * ir3
                    + 3.0 * x[i] * x[j] * x[k] * ir5;
                t[i][j][k] = m.cmn * v;
            }
        }
    }
    Ok(Tensor333(t))
}

/// Traction kernel: column `k` is the traction `(C ∇̂Γ^(k)) n` of the `k`-th
/// column of Γ on a surface with normal `n` through `x`.
pub fn kelvin_traction(x: Vec3, n: Vec3, m: &ElasticModuli) -> Result<Matrix3> {
    let r = check(x)?;
    Ok(kelvin_traction_unchecked(x, r, n, m))
}

#[inline]
pub(crate) fn kelvin_traction_unchecked(x: Vec3, r: f64, n: Vec3, m: &ElasticModuli) -> Matrix3 {
    let ir = 1.0 / r;
    let ir3 = ir * ir * ir;
    // ∂_h(1/r) = −x_h/r³, ∂_n(1/r) = −(x·n)/r³
    let dn = -x.dot(n) * ir3;
    let q = 3.0 / (1.0 - 2.0 * m.nu);
    let mut t = [[0.0; 3]; 3];
    for h in 0..3 {
        for k in 0..3 {
            let mut v = -n[k] * x[h] * ir3 + n[h] * x[k] * ir3;
            let mut bracket = q * x[k] * x[h] * ir * ir;
            if h == k {
                bracket += 1.0;
            }
            v += bracket * dn;
            t[h][k] = -m.cpnu * v;
        }
    }
    Matrix3(t)
}

/// Traction matrix built from a displacement-gradient tensor: column `k` is
/// `(C ∇̂u^(k)) n` where `∂_l u^(k)_i = grad[i][k][l]`.
pub fn traction_from_grad(grad: &Tensor333, n: Vec3, m: &ElasticModuli) -> Matrix3 {
    let mut out = [[0.0; 3]; 3];
    for k in 0..3 {
        let s = m.stress(&grad.column_gradient(k));
        for h in 0..3 {
            out[h][k] = s[h][0] * n[0] + s[h][1] * n[1] + s[h][2] * n[2];
        }
    }
    Matrix3(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn m() -> ElasticModuli {
        ElasticModuli::from_lame(1.0, 1.0).unwrap()
    }

    fn fd4_grad(x: Vec3, h: f64) -> Tensor333 {
        let m = m();
        let mut t = [[[0.0; 3]; 3]; 3];
        for k in 0..3 {
            let e = Vec3::unit(k) * h;
            let g = |s: f64| kelvin(x + e * s, &m).unwrap().0;
            let (p1, m1, p2, m2) = (g(1.0), g(-1.0), g(2.0), g(-2.0));
            for i in 0..3 {
                for j in 0..3 {
                    t[i][j][k] = (8.0 * (p1[i][j] - m1[i][j]) - (p2[i][j] - m2[i][j])) / (12.0 * h);
                }
            }
        }
        Tensor333(t)
    }

    #[test]
    fn axis_value() {
        let g = kelvin(Vec3::new(1.0, 0.0, 0.0), &m()).unwrap();
        assert!((g.0[0][0] + 1.0 / (4.0 * PI)).abs() < 1e-15);
        assert_eq!(g.0[0][1], 0.0);
        assert_eq!(g.0[0][2], 0.0);
    }

    #[test]
    fn homogeneity_and_parity() {
        let m = m();
        let x = Vec3::new(0.4, -1.1, 0.3);
        let g1 = kelvin(x, &m).unwrap();
        let g2 = kelvin(x * 2.0, &m).unwrap();
        let gm = kelvin(-x, &m).unwrap();
        assert!((g1.scale(0.5) - g2).max_abs() < 1e-15);
        assert_eq!(g1, gm);
        assert_eq!(g1, g1.transpose());
        let d1 = kelvin_grad(x, &m).unwrap();
        let d2 = kelvin_grad(x * 2.0, &m).unwrap();
        let diff: f64 = d1
            .scale(0.25)
            .0
            .iter()
            .flatten()
            .flatten()
            .zip(d2.0.iter().flatten().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(diff < 1e-15);
    }

    #[test]
    fn singular_point() {
        assert_eq!(kelvin(Vec3::ZERO, &m()), Err(BemError::SingularPoint));
        assert!(kelvin_grad(Vec3::ZERO, &m()).is_err());
        assert!(kelvin_traction(Vec3::ZERO, Vec3::unit(2), &m()).is_err());
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let x = Vec3::new(0.3, -0.7, 0.2);
        let exact = kelvin_grad(x, &m()).unwrap();
        let fd = fd4_grad(x, 1e-5);
        let mut num = 0.0f64;
        for (a, b) in exact.0.iter().flatten().flatten().zip(fd.0.iter().flatten().flatten()) {
            num = num.max((a - b).abs());
        }
        assert!(num / exact.max_abs() <= 1e-8, "{}", num / exact.max_abs());
    }

    #[test]
    fn gradient_decays_with_slope_minus_two() {
        let m = m();
        let dir = Vec3::new(0.3, -0.5, 0.8).normalized();
        let (r1, r2) = (10.0, 1000.0);
        let a = kelvin_grad(dir * r1, &m).unwrap().frobenius();
        let b = kelvin_grad(dir * r2, &m).unwrap().frobenius();
        let slope = (b / a).ln() / (r2 / r1).ln();
        assert!((slope + 2.0).abs() < 0.01);
    }

    #[test]
    fn traction_matches_stress_of_gradient() {
        let m = ElasticModuli::from_lame(0.7, 1.3).unwrap();
        let x = Vec3::new(0.3, -0.7, 0.2);
        let n = Vec3::new(0.2, 0.9, -0.4).normalized();
        let closed = kelvin_traction(x, n, &m).unwrap();
        let built = traction_from_grad(&kelvin_grad(x, &m).unwrap(), n, &m);
        assert!((closed - built).max_abs() <= 1e-12 * built.max_abs());
    }

    #[test]
    fn traction_homogeneity_and_axial_symmetry() {
        let m = m();
        let x = Vec3::new(0.3, -0.7, 0.2);
        let n = Vec3::new(0.0, 0.6, 0.8);
        let eps = 0.01;
        let a = kelvin_traction(x * eps, n, &m).unwrap();
        let b = kelvin_traction(x, n, &m).unwrap().scale(1.0 / (eps * eps));
        assert!((a - b).max_abs() <= 1e-12 * b.max_abs());

        let t = kelvin_traction(Vec3::new(0.0, 0.0, -1.0), Vec3::unit(2), &m).unwrap();
        assert_eq!(t.0[0][1], 0.0);
        assert_eq!(t.0[1][0], 0.0);
        assert!((t.0[0][0] - t.0[1][1]).abs() < 1e-16);
    }
}
