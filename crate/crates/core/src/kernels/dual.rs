//! Forward-mode dual numbers carrying a three-component gradient.
//!
//! The Mindlin correction has dozens of distinct closed-form partial
//! derivatives; evaluating the same closed form over [`Dual3`] yields them
//! exactly instead of by hand or by differencing.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Scalar field the closed-form kernels are generic over.
pub trait Real:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn cst(v: f64) -> Self;
    fn sqrt(self) -> Self;
    fn value(self) -> f64;
}

impl Real for f64 {
    fn cst(v: f64) -> Self {
        v
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn value(self) -> f64 {
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual3 {
    pub v: f64,
    pub d: [f64; 3],
}

impl Dual3 {
    pub fn constant(v: f64) -> Self {
        Dual3 { v, d: [0.0; 3] }
    }

    /// Independent variable number `axis`.
    pub fn variable(v: f64, axis: usize) -> Self {
        let mut d = [0.0; 3];
        d[axis] = 1.0;
        Dual3 { v, d }
    }

    pub fn seed(p: [f64; 3]) -> [Dual3; 3] {
        [
            Dual3::variable(p[0], 0),
            Dual3::variable(p[1], 1),
            Dual3::variable(p[2], 2),
        ]
    }

    fn map(self, v: f64, slope: f64) -> Self {
        Dual3 {
            v,
            d: [self.d[0] * slope, self.d[1] * slope, self.d[2] * slope],
        }
    }
}

impl Real for Dual3 {
    fn cst(v: f64) -> Self {
        Dual3::constant(v)
    }
    fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        self.map(s, 0.5 / s)
    }
    fn value(self) -> f64 {
        self.v
    }
}

impl Add for Dual3 {
    type Output = Dual3;
    fn add(self, o: Dual3) -> Dual3 {
        Dual3 {
            v: self.v + o.v,
            d: [self.d[0] + o.d[0], self.d[1] + o.d[1], self.d[2] + o.d[2]],
        }
    }
}

impl Sub for Dual3 {
    type Output = Dual3;
    fn sub(self, o: Dual3) -> Dual3 {
        Dual3 {
            v: self.v - o.v,
            d: [self.d[0] - o.d[0], self.d[1] - o.d[1], self.d[2] - o.d[2]],
        }
    }
}

impl Mul for Dual3 {
    type Output = Dual3;
    fn mul(self, o: Dual3) -> Dual3 {
        Dual3 {
            v: self.v * o.v,
            d: [
                self.d[0] * o.v + self.v * o.d[0],
                self.d[1] * o.v + self.v * o.d[1],
                self.d[2] * o.v + self.v * o.d[2],
            ],
        }
    }
}

impl Div for Dual3 {
    type Output = Dual3;
    fn div(self, o: Dual3) -> Dual3 {
        let inv = 1.0 / o.v;
        let q = self.v * inv;
        Dual3 {
            v: q,
            d: [
                (self.d[0] - q * o.d[0]) * inv,
                (self.d[1] - q * o.d[1]) * inv,
                (self.d[2] - q * o.d[2]) * inv,
            ],
        }
    }
}

impl Neg for Dual3 {
    type Output = Dual3;
    fn neg(self) -> Dual3 {
        self.map(-self.v, -1.0)
    }
}

impl Add<f64> for Dual3 {
    type Output = Dual3;
    fn add(self, o: f64) -> Dual3 {
        Dual3 { v: self.v + o, d: self.d }
    }
}

impl Sub<f64> for Dual3 {
    type Output = Dual3;
    fn sub(self, o: f64) -> Dual3 {
        Dual3 { v: self.v - o, d: self.d }
    }
}

impl Mul<f64> for Dual3 {
    type Output = Dual3;
    fn mul(self, o: f64) -> Dual3 {
        self.map(self.v * o, o)
    }
}

impl Div<f64> for Dual3 {
    type Output = Dual3;
    fn div(self, o: f64) -> Dual3 {
        self.map(self.v / o, 1.0 / o)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_rule_on_inverse_distance() {
        let p = [0.3, -1.2, 0.7];
        let [x, y, z] = Dual3::seed(p);
        let r = (x * x + y * y + z * z).sqrt();
        let f = Dual3::cst(1.0) / r;
        let rv = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        for k in 0..3 {
            let exact = -p[k] / rv.powi(3);
            assert!((f.d[k] - exact).abs() < 1e-15);
        }
    }

    #[test]
    fn quotient_and_constants() {
        let [x, y, _] = Dual3::seed([2.0, 3.0, 0.0]);
        let q = (x * 3.0 + 1.0) / (y - 1.0);
        assert_eq!(q.v, 3.5);
        assert!((q.d[0] - 1.5).abs() < 1e-15);
        assert!((q.d[1] + 7.0 / 4.0).abs() < 1e-15);
    }
}
