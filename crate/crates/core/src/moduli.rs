//! Isotropic elastic constants.

use crate::error::{BemError, Result};
use std::f64::consts::PI;

/// Lamé parameters of a homogeneous isotropic medium together with the
/// constants that appear in the Kelvin and Mindlin kernels.
///
/// The isotropic tensor `C = λ I⊗I + 2μ 𝕀` is never stored; operations apply
/// it component-wise through [`ElasticModuli::stress`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElasticModuli {
    pub lambda: f64,
    pub mu: f64,
    pub nu: f64,
    /// `1 / (16 π μ (1 − ν))`
    pub cmn: f64,
    /// `4 (1 − ν)(1 − 2ν)`
    pub cnu: f64,
    /// `(1 − 2ν) / (8 π (1 − ν))`
    pub cpnu: f64,
    /// `1 / (4 π μ)`
    pub kmu: f64,
}

impl ElasticModuli {
    pub fn from_lame(lambda: f64, mu: f64) -> Result<Self> {
        if !(lambda.is_finite() && mu.is_finite()) {
            return Err(BemError::ModuliOutOfRange(format!(
                "non-finite input lambda={lambda}, mu={mu}"
            )));
        }
        if mu <= 0.0 {
            return Err(BemError::ModuliOutOfRange(format!("mu must be > 0, got {mu}")));
        }
        if 3.0 * lambda + 2.0 * mu <= 0.0 {
            return Err(BemError::ModuliOutOfRange(format!(
                "3*lambda + 2*mu must be > 0, got {}",
                3.0 * lambda + 2.0 * mu
            )));
        }
        let nu = lambda / (2.0 * (lambda + mu));
        Ok(Self::with_derived(lambda, mu, nu))
    }

    pub fn from_poisson(nu: f64, mu: f64) -> Result<Self> {
        if !(nu.is_finite() && mu.is_finite()) {
            return Err(BemError::ModuliOutOfRange(format!(
                "non-finite input nu={nu}, mu={mu}"
            )));
        }
        if mu <= 0.0 {
            return Err(BemError::ModuliOutOfRange(format!("mu must be > 0, got {mu}")));
        }
        if !(nu > -1.0 && nu < 0.5) {
            return Err(BemError::ModuliOutOfRange(format!(
                "nu must lie in (-1, 0.5), got {nu}"
            )));
        }
        let lambda = 2.0 * mu * nu / (1.0 - 2.0 * nu);
        if 3.0 * lambda + 2.0 * mu <= 0.0 {
            return Err(BemError::ModuliOutOfRange(format!(
                "3*lambda + 2*mu must be > 0, got {}",
                3.0 * lambda + 2.0 * mu
            )));
        }
        // keep ν exactly as given; λ is the derived quantity here
        Ok(Self::with_derived(lambda, mu, nu))
    }

    fn with_derived(lambda: f64, mu: f64, nu: f64) -> Self {
        Self {
            lambda,
            mu,
            nu,
            cmn: 1.0 / (16.0 * PI * mu * (1.0 - nu)),
            cnu: 4.0 * (1.0 - nu) * (1.0 - 2.0 * nu),
            cpnu: (1.0 - 2.0 * nu) / (8.0 * PI * (1.0 - nu)),
            kmu: 1.0 / (4.0 * PI * mu),
        }
    }

    /// `3λ + 2μ`, three times the bulk modulus.
    pub fn bulk3(&self) -> f64 {
        3.0 * self.lambda + 2.0 * self.mu
    }

    /// Isotropic tensor entry `C_ijkl`.
    pub fn c(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        self.lambda * d(i, j) * d(k, l) + self.mu * (d(i, k) * d(j, l) + d(i, l) * d(j, k))
    }

    /// `C A = λ tr(A) I + 2μ sym(A)` for a 3×3 matrix `A`.
    pub fn stress(&self, a: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
        let tr = a[0][0] + a[1][1] + a[2][2];
        let mut s = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                s[i][j] = self.mu * (a[i][j] + a[j][i]);
            }
            s[i][i] += self.lambda * tr;
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn lame_unit_gives_quarter_poisson() {
        let m = ElasticModuli::from_lame(1.0, 1.0).unwrap();
        assert_relative_eq!(m.nu, 0.25, epsilon = 1e-16);
        assert_relative_eq!(m.cmn, 1.0 / (12.0 * PI), max_relative = 1e-15);
        assert_relative_eq!(m.cmn, 0.0265258, epsilon = 1e-7);
    }

    #[test]
    fn zero_lambda_is_zero_poisson() {
        let m = ElasticModuli::from_lame(0.0, 1.0).unwrap();
        assert_eq!(m.nu, 0.0);
        let p = ElasticModuli::from_poisson(0.0, 1.0).unwrap();
        assert_eq!(p.lambda, 0.0);
    }

    #[test]
    fn poisson_inversion() {
        let m = ElasticModuli::from_poisson(0.25, 1.0).unwrap();
        assert_relative_eq!(m.lambda, 1.0, max_relative = 1e-15);
    }

    #[test]
    fn out_of_range() {
        assert!(matches!(
            ElasticModuli::from_lame(1.0, 0.0),
            Err(BemError::ModuliOutOfRange(_))
        ));
        assert!(matches!(
            ElasticModuli::from_lame(-1.0, 1.0),
            Err(BemError::ModuliOutOfRange(_))
        ));
        assert!(ElasticModuli::from_poisson(0.5, 1.0).is_err());
        assert!(ElasticModuli::from_poisson(-1.0, 1.0).is_err());
        assert!(ElasticModuli::from_lame(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn stress_matches_tensor_contraction() {
        let m = ElasticModuli::from_lame(0.7, 1.3).unwrap();
        let a = [[0.1, 0.4, -0.2], [0.3, -0.5, 0.8], [0.9, 0.2, 0.6]];
        let s = m.stress(&a);
        for i in 0..3 {
            for j in 0..3 {
                let mut v = 0.0;
                for k in 0..3 {
                    for l in 0..3 {
                        v += m.c(i, j, k, l) * a[k][l];
                    }
                }
                assert_relative_eq!(s[i][j], v, epsilon = 1e-14);
            }
        }
    }

    proptest::proptest! {
        #[test]
        fn poisson_round_trip(nu in -0.95f64..0.49, mu in 0.01f64..100.0) {
            let a = ElasticModuli::from_poisson(nu, mu).unwrap();
            let b = ElasticModuli::from_lame(a.lambda, a.mu).unwrap();
            proptest::prop_assert!((b.nu - nu).abs() <= 1e-15);
        }

        #[test]
        fn derived_constants_recompute(lambda in -0.6f64..50.0, mu in 1.0f64..10.0) {
            let m = ElasticModuli::from_lame(lambda, mu).unwrap();
            proptest::prop_assert!((m.nu - lambda / (2.0 * (lambda + mu))).abs() < 1e-15);
            proptest::prop_assert_eq!(m.kmu, 1.0 / (4.0 * PI * mu));
        }
    }
}
