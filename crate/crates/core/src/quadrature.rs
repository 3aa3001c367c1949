//! Quadrature over flat triangles: a 7-point rule for well-separated
//! targets, Duffy and graded polar rules for singular and near-singular
//! targets, and adaptive subdivision in between.

use crate::geom::Vec3;
use std::sync::OnceLock;

/// Targets closer than this many panel diameters get special treatment.
pub const NEAR_FACTOR: f64 = 3.0;
const MAX_DEPTH: u32 = 9;
const MAX_GAUSS: usize = 32;
const SELF_ORDER: usize = 12;
const POLAR_ANGULAR: usize = 10;
const POLAR_RADIAL: usize = 6;

/// Gauss–Legendre nodes and weights on `[0, 1]`.
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

fn compute_gauss(n: usize) -> GaussRule {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
                p1 = x;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // map [-1, 1] to [0, 1]
        nodes[i] = 0.5 * (1.0 - x);
        nodes[n - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
    GaussRule { nodes, weights }
}

/// Cached `n`-point Gauss–Legendre rule on `[0, 1]`, `1 ≤ n ≤ 32`.
pub fn gauss(n: usize) -> &'static GaussRule {
    static RULES: OnceLock<Vec<GaussRule>> = OnceLock::new();
    assert!((1..=MAX_GAUSS).contains(&n), "gauss rule order {n} unsupported");
    &RULES.get_or_init(|| (1..=MAX_GAUSS).map(compute_gauss).collect())[n - 1]
}

/// Degree-5 symmetric 7-point triangle rule: barycentric points and weights
/// summing to one.
pub const TRI7: [([f64; 3], f64); 7] = {
    const A1: f64 = 0.059_715_871_789_769_82;
    const B1: f64 = 0.470_142_064_105_115_1;
    const W1: f64 = 0.132_394_152_788_506_2;
    const A2: f64 = 0.797_426_985_353_087_3;
    const B2: f64 = 0.101_286_507_323_456_3;
    const W2: f64 = 0.125_939_180_544_827_1;
    [
        ([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 0.225),
        ([A1, B1, B1], W1),
        ([B1, A1, B1], W1),
        ([B1, B1, A1], W1),
        ([A2, B2, B2], W2),
        ([B2, A2, B2], W2),
        ([B2, B2, A2], W2),
    ]
};

fn area(t: &[Vec3; 3]) -> f64 {
    0.5 * (t[1] - t[0]).cross(t[2] - t[0]).norm()
}

fn diameter(t: &[Vec3; 3]) -> f64 {
    (t[1] - t[0]).norm().max((t[2] - t[1]).norm()).max((t[0] - t[2]).norm())
}

/// The 7-point rule mapped onto a triangle; weights include the area.
pub fn tri7_points(t: &[Vec3; 3]) -> [(Vec3, f64); 7] {
    let a = area(t);
    TRI7.map(|(b, w)| (t[0] * b[0] + t[1] * b[1] + t[2] * b[2], w * a))
}

/// Closest point of triangle `t` to `p` and whether it lies in the interior
/// of the face (as opposed to an edge or corner).
pub fn closest_point(p: Vec3, t: &[Vec3; 3]) -> (Vec3, bool) {
    let [a, b, c] = *t;
    let (ab, ac, ap) = (b - a, c - a, p - a);
    let (d1, d2) = (ab.dot(ap), ac.dot(ap));
    if d1 <= 0.0 && d2 <= 0.0 {
        return (a, false);
    }
    let bp = p - b;
    let (d3, d4) = (ab.dot(bp), ac.dot(bp));
    if d3 >= 0.0 && d4 <= d3 {
        return (b, false);
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        return (a + ab * (d1 / (d1 - d3)), false);
    }
    let cp = p - c;
    let (d5, d6) = (ab.dot(cp), ac.dot(cp));
    if d6 >= 0.0 && d5 <= d6 {
        return (c, false);
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        return (a + ac * (d2 / (d2 - d6)), false);
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        return (b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6))), false);
    }
    let denom = 1.0 / (va + vb + vc);
    (a + ab * (vb * denom) + ac * (vc * denom), true)
}

/// Orthogonal projection of `p` onto the plane of `t` when it falls inside
/// the closed triangle.
fn projection_inside(p: Vec3, t: &[Vec3; 3]) -> Option<Vec3> {
    let [a, b, c] = *t;
    let nrm = (b - a).cross(c - a);
    let nn = nrm.dot(nrm);
    if nn == 0.0 {
        return None;
    }
    let foot = p - nrm * ((p - a).dot(nrm) / nn);
    let l0 = (b - foot).cross(c - foot).dot(nrm) / nn;
    let l1 = (c - foot).cross(a - foot).dot(nrm) / nn;
    let l2 = 1.0 - l0 - l1;
    let tol = -1e-14;
    (l0 >= tol && l1 >= tol && l2 >= tol).then_some(foot)
}

/// Distance from `p` to triangle `t`.
pub fn distance(p: Vec3, t: &[Vec3; 3]) -> f64 {
    (closest_point(p, t).0 - p).norm()
}

/// Polar rule about `foot` on the triangle `(foot, a, b)`. The angle is
/// measured from the perpendicular onto the line `ab`, so the ray length
/// `d / cos θ` is smooth. For `h > 0` the radial breakpoints sit at
/// `h, 2h, 4h, …`; for `h = 0` the `ρ dρ` Jacobian cancels a `1/r`
/// singularity at `foot`.
fn polar(foot: Vec3, a: Vec3, b: Vec3, h: f64, f: &mut impl FnMut(Vec3, f64)) {
    let ab = b - a;
    let len_ab = ab.norm();
    if len_ab == 0.0 {
        return;
    }
    let u = ab * (1.0 / len_ab);
    let e = a + u * (foot - a).dot(u);
    let d = (e - foot).norm();
    if d <= 1e-15 * len_ab {
        return;
    }
    let ta = (a - e).dot(u).atan2(d);
    let tb = (b - e).dot(u).atan2(d);
    let (ga, n_ang, n_rad) = if h == 0.0 {
        (gauss(SELF_ORDER), SELF_ORDER, SELF_ORDER)
    } else {
        (gauss(POLAR_ANGULAR), POLAR_ANGULAR, POLAR_RADIAL)
    };
    let _ = n_ang;
    let gr = gauss(n_rad);
    let dth = tb - ta;
    for (&t, &wt) in ga.nodes.iter().zip(&ga.weights) {
        let th = ta + dth * t;
        let q = e + u * (d * th.tan());
        let r_max = d / th.cos();
        let base = wt * dth * r_max * r_max;
        let mut lo = 0.0;
        let mut step = if h == 0.0 { 1.0 } else { h / r_max };
        loop {
            let hi = (lo + step).min(1.0);
            let w_seg = hi - lo;
            for (&r, &wr) in gr.nodes.iter().zip(&gr.weights) {
                let s = lo + w_seg * r;
                f(foot + (q - foot) * s, base * wr * w_seg * s);
            }
            if hi >= 1.0 {
                break;
            }
            lo = hi;
            step = lo;
        }
    }
}

/// Rule for a target lying on the (flat) panel itself.
pub fn singular_points(t: &[Vec3; 3], at: Vec3, f: &mut impl FnMut(Vec3, f64)) {
    polar(at, t[0], t[1], 0.0, f);
    polar(at, t[1], t[2], 0.0, f);
    polar(at, t[2], t[0], 0.0, f);
}

/// Quadrature of a panel as seen from `target`, choosing the rule by
/// distance. `f` receives points and weights including the area element.
pub fn panel_points(t: &[Vec3; 3], target: Vec3, f: &mut impl FnMut(Vec3, f64)) {
    near_recursive(t, target, 0, f);
}

fn near_recursive(t: &[Vec3; 3], target: Vec3, depth: u32, f: &mut impl FnMut(Vec3, f64)) {
    let diam = diameter(t);
    let (foot, inside) = match projection_inside(target, t) {
        Some(foot) => (foot, true),
        None => (closest_point(target, t).0, false),
    };
    let dist = (foot - target).norm();
    if dist >= NEAR_FACTOR * diam || depth >= MAX_DEPTH {
        for (x, w) in tri7_points(t) {
            f(x, w);
        }
        return;
    }
    if inside {
        if dist <= 1e-14 * diam {
            singular_points(t, foot, f);
        } else {
            polar(foot, t[0], t[1], dist, f);
            polar(foot, t[1], t[2], dist, f);
            polar(foot, t[2], t[0], dist, f);
        }
        return;
    }
    let [a, b, c] = *t;
    let (ab, bc, ca) = ((a + b) * 0.5, (b + c) * 0.5, (c + a) * 0.5);
    for sub in [[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]] {
        near_recursive(&sub, target, depth + 1, f);
    }
}
