//! Collocation discretization of the layer potentials on a cavity mesh.
//!
//! Densities are piecewise constant and collocated at panel centroids. For
//! a source point `y` on panel `j` and a target `x`:
//!
//! * single layer: `Γ(y − x)`
//! * double layer: `T(y − x, n_j)ᵀ`, `T` the Kelvin traction kernel
//! * adjoint double layer: `T(x − y, n_x)`
//! * regular single layer: `R(y, x)ᵀ`
//! * regular double layer: `T_R(y, n_j, x)ᵀ`, the traction of `R` in `y`

use crate::error::{BemError, Result};
use crate::geom::{Matrix3, Vec3};
use crate::kernels::{
    kelvin_traction_unchecked, kelvin_unchecked, regular_grad_signed, regular_part, traction_from_grad,
};
use crate::linalg::DenseOperator;
use crate::mesh::TriangleMesh;
use crate::moduli::ElasticModuli;
use crate::par;
use crate::quadrature::{self, NEAR_FACTOR};

/// Which potential [`eval_potential`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PotentialKind {
    SingleLayer,
    DoubleLayer,
    RegularSingleLayer,
    RegularDoubleLayer,
}

/// Constant of the rigid-translation identity `K c = JUMP c`, equivalently
/// `D c = c` inside and `0` outside the cavity.
pub const JUMP: f64 = 0.5;

/// Per-panel geometry and far-field quadrature, computed once per mesh.
pub(crate) struct Panels<'a> {
    pub mesh: &'a TriangleMesh,
    tris: Vec<[Vec3; 3]>,
    far: Vec<[(Vec3, f64); 7]>,
    diam: Vec<f64>,
}

impl<'a> Panels<'a> {
    pub fn new(mesh: &'a TriangleMesh) -> Self {
        let tris: Vec<[Vec3; 3]> = (0..mesh.len()).map(|f| mesh.triangle(f)).collect();
        let far = tris.iter().map(quadrature::tri7_points).collect();
        let diam = (0..mesh.len()).map(|f| mesh.face_diameter(f)).collect();
        Self { mesh, tris, far, diam }
    }

    /// Quadrature of panel `j` as seen from `target`.
    #[inline]
    pub fn integrate(&self, j: usize, target: Vec3, f: &mut impl FnMut(Vec3, f64)) {
        let c = self.mesh.centroids()[j];
        if (target - c).norm() >= (NEAR_FACTOR + 1.0) * self.diam[j] {
            for &(y, w) in &self.far[j] {
                f(y, w);
            }
        } else {
            quadrature::panel_points(&self.tris[j], target, f);
        }
    }

    /// Smallest distance from `x` to the surface.
    pub fn distance(&self, x: Vec3) -> f64 {
        self.tris.iter().map(|t| quadrature::distance(x, t)).fold(f64::INFINITY, f64::min)
    }
}

#[inline]
fn add_scaled(acc: &mut Matrix3, m: &Matrix3, w: f64) {
    for a in 0..3 {
        for b in 0..3 {
            acc.0[a][b] += w * m.0[a][b];
        }
    }
}

#[inline]
fn add_scaled_t(acc: &mut Matrix3, m: &Matrix3, w: f64) {
    for a in 0..3 {
        for b in 0..3 {
            acc.0[a][b] += w * m.0[b][a];
        }
    }
}

fn single_block(p: &Panels, j: usize, x: Vec3, m: &ElasticModuli) -> Matrix3 {
    let mut acc = Matrix3::ZERO;
    p.integrate(j, x, &mut |y, w| {
        let d = y - x;
        let r = d.norm();
        if r > 0.0 {
            add_scaled(&mut acc, &kelvin_unchecked(d, r, m), w);
        }
    });
    acc
}

fn double_block(p: &Panels, j: usize, x: Vec3, m: &ElasticModuli) -> Matrix3 {
    let n = p.mesh.normals()[j];
    let mut acc = Matrix3::ZERO;
    p.integrate(j, x, &mut |y, w| {
        let d = y - x;
        let r = d.norm();
        if r > 0.0 {
            add_scaled_t(&mut acc, &kelvin_traction_unchecked(d, r, n, m), w);
        }
    });
    acc
}

fn adjoint_block(p: &Panels, j: usize, x: Vec3, nx: Vec3, m: &ElasticModuli) -> Matrix3 {
    let mut acc = Matrix3::ZERO;
    p.integrate(j, x, &mut |y, w| {
        let d = x - y;
        let r = d.norm();
        if r > 0.0 {
            add_scaled(&mut acc, &kelvin_traction_unchecked(d, r, nx, m), w);
        }
    });
    acc
}

/// `(S^R block, D^R block)` of panel `j` at `x`; smooth kernels, so the
/// 7-point rule suffices.
fn regular_blocks(p: &Panels, j: usize, x: Vec3, m: &ElasticModuli, r2_sign: f64) -> (Matrix3, Matrix3) {
    let n = p.mesh.normals()[j];
    let mut s = Matrix3::ZERO;
    let mut d = Matrix3::ZERO;
    for &(y, w) in &p.far[j] {
        let g = regular_grad_signed(y, x, m, r2_sign);
        let r = regular_value(y, x, m, r2_sign);
        add_scaled_t(&mut s, &r, w);
        add_scaled_t(&mut d, &traction_from_grad(&g, n, m), w);
    }
    (s, d)
}

fn regular_value(y: Vec3, x: Vec3, m: &ElasticModuli, r2_sign: f64) -> Matrix3 {
    if r2_sign == 1.0 {
        regular_part(y, x, m).expect("points validated by caller")
    } else {
        let eta = Vec3::new(y[0] - x[0], y[1] - x[1], y[2] + x[2]);
        let [r1, r2, r3] = crate::kernels::regular_terms(eta, m);
        let x3 = x[2];
        r1 + r2.scale(r2_sign * x3) + r3.scale(x3 * x3)
    }
}

fn require_valid(mesh: &TriangleMesh) -> Result<()> {
    mesh.validate().map(|_| ()).map_err(|e| BemError::MeshInvalid(e.to_string()))
}

fn require_below_surface(mesh: &TriangleMesh) -> Result<()> {
    let top = mesh.max_height();
    if !(top < 0.0) {
        return Err(BemError::CavityTouchesSurface(top));
    }
    Ok(())
}

/// Single-layer matrix: block `(i, j) = ∫_j Γ(y − c_i) dσ(y)`.
pub fn assemble_single_layer(mesh: &TriangleMesh, m: &ElasticModuli) -> Result<DenseOperator> {
    require_valid(mesh)?;
    let p = Panels::new(mesh);
    let c = mesh.centroids();
    Ok(DenseOperator::from_blocks(mesh.len(), |i, j| single_block(&p, j, c[i], m)))
}

/// Principal-value double-layer trace `K`. Off-diagonal blocks are
/// integrated; each diagonal block is fixed so that `K c = ½ c` for every
/// constant vector `c`.
pub fn assemble_k(mesh: &TriangleMesh, m: &ElasticModuli) -> Result<DenseOperator> {
    require_valid(mesh)?;
    let p = Panels::new(mesh);
    let c = mesh.centroids();
    let mut op = DenseOperator::from_blocks(mesh.len(), |i, j| {
        if i == j {
            Matrix3::ZERO
        } else {
            double_block(&p, j, c[i], m)
        }
    });
    regularize_rows(&mut op);
    Ok(op)
}

/// `K_ii = JUMP·I − Σ_{j≠i} K_ij`, assuming the diagonal is currently zero.
fn regularize_rows(op: &mut DenseOperator) {
    let n = op.panels();
    let sums = par::map_range(n, |i| {
        let mut s = Matrix3::ZERO;
        for j in 0..n {
            s += op.block(i, j);
        }
        s
    });
    for (i, s) in sums.iter().enumerate() {
        let d = Matrix3::IDENTITY.scale(JUMP) - *s;
        let cur = op.block(i, i);
        op.set_block(i, i, &(cur + d));
    }
}

/// Adjoint double-layer trace `K*`, the traction trace of the single layer
/// apart from the jump. Diagonal blocks are fixed by the transposed
/// identity `Σ_i A_i K*_ij = ½ A_j I`.
pub fn assemble_k_adjoint(mesh: &TriangleMesh, m: &ElasticModuli) -> Result<DenseOperator> {
    require_valid(mesh)?;
    let p = Panels::new(mesh);
    let c = mesh.centroids();
    let nrm = mesh.normals();
    let areas = mesh.areas();
    let n = mesh.len();
    let mut op = DenseOperator::zeros(n);
    op.fill_columns(|j, cols, dim| {
        let mut sum = Matrix3::ZERO;
        for i in 0..n {
            if i == j {
                continue;
            }
            let b = adjoint_block(&p, j, c[i], nrm[i], m);
            add_scaled(&mut sum, &b, areas[i] / areas[j]);
            write_block(cols, dim, i, &b);
        }
        let diag = Matrix3::IDENTITY.scale(JUMP) - sum;
        write_block(cols, dim, j, &diag);
    });
    Ok(op)
}

#[inline]
fn write_block(cols: &mut [f64], dim: usize, i: usize, b: &Matrix3) {
    for a in 0..3 {
        for c in 0..3 {
            cols[c * dim + 3 * i + a] = b.0[a][c];
        }
    }
}

/// Matrices of the regular single and double layers at the centroids.
pub fn assemble_regular_ops(mesh: &TriangleMesh, m: &ElasticModuli) -> Result<(DenseOperator, DenseOperator)> {
    require_below_surface(mesh)?;
    let p = Panels::new(mesh);
    let c = mesh.centroids();
    let n = mesh.len();
    let mut s = DenseOperator::zeros(n);
    let mut d = DenseOperator::zeros(n);
    let cols: Vec<Vec<(Matrix3, Matrix3)>> =
        par::map_range(n, |j| (0..n).map(|i| regular_blocks(&p, j, c[i], m, 1.0)).collect());
    for (j, col) in cols.iter().enumerate() {
        for (i, (bs, bd)) in col.iter().enumerate() {
            s.set_block(i, j, bs);
            d.set_block(i, j, bd);
        }
    }
    Ok((s, d))
}

/// Matrix of `½I + K + D^R` for the cavity trace equation. `r2_sign = 1`
/// is the correct kernel; other values exist for fault injection.
pub(crate) fn assemble_trace_operator(
    mesh: &TriangleMesh,
    m: &ElasticModuli,
    r2_sign: f64,
) -> Result<DenseOperator> {
    require_below_surface(mesh)?;
    let mut op = assemble_k(mesh, m)?;
    op.add_identity(0.5);
    let p = Panels::new(mesh);
    let c = mesh.centroids();
    op.fill_columns(|j, cols, dim| {
        for (i, &ci) in c.iter().enumerate() {
            let (_, dr) = regular_blocks(&p, j, ci, m, r2_sign);
            for a in 0..3 {
                for b in 0..3 {
                    cols[b * dim + 3 * i + a] += dr.0[a][b];
                }
            }
        }
    });
    Ok(op)
}

/// `S[φ]` at every centroid without storing the matrix.
pub fn apply_single_layer(mesh: &TriangleMesh, m: &ElasticModuli, density: &[Vec3]) -> Result<Vec<Vec3>> {
    Ok(apply_single_layer_many(mesh, m, &[density])?.pop().unwrap_or_default())
}

/// `S[φ_k]` for several densities, sharing one pass over the panel blocks.
pub fn apply_single_layer_many(
    mesh: &TriangleMesh,
    m: &ElasticModuli,
    densities: &[&[Vec3]],
) -> Result<Vec<Vec<Vec3>>> {
    for d in densities {
        check_density(mesh, d)?;
    }
    let p = Panels::new(mesh);
    let c = mesh.centroids();
    let rows = par::map_range(mesh.len(), |i| {
        let mut u = vec![Vec3::ZERO; densities.len()];
        for j in 0..mesh.len() {
            let b = single_block(&p, j, c[i], m);
            for (acc, d) in u.iter_mut().zip(densities) {
                *acc += b.mul_vec(d[j]);
            }
        }
        u
    });
    Ok((0..densities.len()).map(|k| rows.iter().map(|r| r[k]).collect()).collect())
}

/// `S^R[φ]` at every centroid without storing the matrix.
pub fn apply_regular_single_layer(mesh: &TriangleMesh, m: &ElasticModuli, density: &[Vec3]) -> Result<Vec<Vec3>> {
    check_density(mesh, density)?;
    require_below_surface(mesh)?;
    Ok(apply_regular_single_layer_signed(mesh, m, density, 1.0))
}

pub(crate) fn apply_regular_single_layer_signed(
    mesh: &TriangleMesh,
    m: &ElasticModuli,
    density: &[Vec3],
    r2_sign: f64,
) -> Vec<Vec3> {
    let p = Panels::new(mesh);
    let c = mesh.centroids();
    par::map_range(mesh.len(), |i| {
        let mut u = Vec3::ZERO;
        for (j, phi) in density.iter().enumerate() {
            let mut s = Matrix3::ZERO;
            for &(y, w) in &p.far[j] {
                add_scaled_t(&mut s, &regular_value(y, c[i], m, r2_sign), w);
            }
            u += s.mul_vec(*phi);
        }
        u
    })
}

fn check_density(mesh: &TriangleMesh, density: &[Vec3]) -> Result<()> {
    if density.len() != mesh.len() {
        return Err(BemError::MeshMismatch { expected: mesh.len(), got: density.len() });
    }
    Ok(())
}

/// Relative distance below which a target counts as lying on the surface.
pub const ON_BOUNDARY: f64 = 1e-12;

pub(crate) fn check_target(p: &Panels, x: Vec3) -> Result<()> {
    if !x.is_finite() {
        return Err(BemError::InvalidArgument("evaluation point is not finite".into()));
    }
    let dist = p.distance(x);
    if dist < ON_BOUNDARY * p.mesh.bbox_scale() {
        return Err(BemError::PointOnBoundary(dist));
    }
    Ok(())
}

/// One of the four layer potentials of `density` at an off-surface point.
pub fn eval_potential(
    kind: PotentialKind,
    x: Vec3,
    mesh: &TriangleMesh,
    density: &[Vec3],
    m: &ElasticModuli,
) -> Result<Vec3> {
    check_density(mesh, density)?;
    let p = Panels::new(mesh);
    check_target(&p, x)?;
    if matches!(kind, PotentialKind::RegularSingleLayer | PotentialKind::RegularDoubleLayer) {
        require_below_surface(mesh)?;
        if x[2] > 0.0 {
            return Err(BemError::InvalidHalfSpacePoint(format!("x3 = {} > 0", x[2])));
        }
    }
    Ok(potential_unchecked(&p, kind, x, density, m))
}

pub(crate) fn potential_unchecked(
    p: &Panels,
    kind: PotentialKind,
    x: Vec3,
    density: &[Vec3],
    m: &ElasticModuli,
) -> Vec3 {
    let mut u = Vec3::ZERO;
    for (j, phi) in density.iter().enumerate() {
        let b = match kind {
            PotentialKind::SingleLayer => single_block(p, j, x, m),
            PotentialKind::DoubleLayer => double_block(p, j, x, m),
            PotentialKind::RegularSingleLayer => regular_blocks(p, j, x, m, 1.0).0,
            PotentialKind::RegularDoubleLayer => regular_blocks(p, j, x, m, 1.0).1,
        };
        u += b.mul_vec(*phi);
    }
    u
}

/// `p S[n] − D[f] + p S^R[n] − D^R[f]` at `x`, sharing quadrature points
/// across the four potentials.
pub(crate) fn representation(
    p: &Panels,
    x: Vec3,
    f: &[Vec3],
    pressure: f64,
    m: &ElasticModuli,
) -> Vec3 {
    let nrm = p.mesh.normals();
    let mut u = Vec3::ZERO;
    for j in 0..f.len() {
        let s = single_block(p, j, x, m);
        let d = double_block(p, j, x, m);
        let (sr, dr) = regular_blocks(p, j, x, m, 1.0);
        u += (s + sr).mul_vec(nrm[j] * pressure) - (d + dr).mul_vec(f[j]);
    }
    u
}

/// Largest deviation of the double layer evaluated at `c ± δh n` from its
/// one-sided limits `(K ∓ ½I)φ`, relative to `max |φ|`, over all panels.
/// `δ = delta_rel`, `h` the mean panel size. Returns `(outside, inside)`.
pub fn jump_relation_defect(
    mesh: &TriangleMesh,
    m: &ElasticModuli,
    phi: &[Vec3],
    delta_rel: f64,
) -> Result<(f64, f64)> {
    check_density(mesh, phi)?;
    let k = assemble_k(mesh, m)?;
    let kphi = k.apply(phi);
    let p = Panels::new(mesh);
    let h = (mesh.total_area() / mesh.len() as f64).sqrt();
    let scale = phi.iter().map(|v| v.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let errs = par::map_range(mesh.len(), |i| {
        let c = mesh.centroids()[i];
        let n = mesh.normals()[i];
        let outside = potential_unchecked(&p, PotentialKind::DoubleLayer, c + n * (delta_rel * h), phi, m);
        let inside = potential_unchecked(&p, PotentialKind::DoubleLayer, c - n * (delta_rel * h), phi, m);
        ((outside - (kphi[i] - phi[i] * JUMP)).norm() / scale, (inside - (kphi[i] + phi[i] * JUMP)).norm() / scale)
    });
    Ok(errs.iter().fold((0.0f64, 0.0f64), |a, e| (a.0.max(e.0), a.1.max(e.1))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::flatten;

    fn m() -> ElasticModuli {
        ElasticModuli::from_lame(1.0, 1.0).unwrap()
    }

    #[test]
    fn single_layer_of_normal_is_radial() {
        let mesh = TriangleMesh::icosphere(3).unwrap();
        let s = assemble_single_layer(&mesh, &m()).unwrap();
        let u = s.apply(mesh.normals());
        let mut worst = 0.0f64;
        for (v, c) in u.iter().zip(mesh.centroids()) {
            let rad = c.normalized();
            let radial = v.dot(rad);
            let tang = (*v - rad * radial).norm();
            worst = worst.max(tang / radial.abs());
        }
        assert!(worst <= 1e-3, "{worst}");
        let free = apply_single_layer(&mesh, &m(), mesh.normals()).unwrap();
        let diff = flatten(&free).iter().zip(flatten(&u)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-14);
    }

    #[test]
    fn far_blocks_insensitive_to_refinement() {
        let mesh = TriangleMesh::icosphere(2).unwrap();
        let p = Panels::new(&mesh);
        let m = m();
        let c = mesh.centroids();
        let mut worst = 0.0f64;
        for i in (0..mesh.len()).step_by(7) {
            for j in 0..mesh.len() {
                if i == j {
                    continue;
                }
                let coarse = single_block(&p, j, c[i], &m);
                // reference: every panel split in four
                let [a, b, cc] = mesh.triangle(j);
                let (ab, bc, ca) = ((a + b) * 0.5, (b + cc) * 0.5, (cc + a) * 0.5);
                let mut fine = Matrix3::ZERO;
                for sub in [[a, ab, ca], [ab, b, bc], [ca, bc, cc], [ab, bc, ca]] {
                    quadrature::panel_points(&sub, c[i], &mut |y, w| {
                        add_scaled(&mut fine, &crate::kernels::kelvin(y - c[i], &m).unwrap(), w)
                    });
                }
                worst = worst.max((coarse - fine).max_abs() / fine.max_abs());
            }
        }
        assert!(worst < 1e-6, "{worst}");
    }

    #[test]
    fn scaling_laws() {
        let unit = TriangleMesh::icosphere(1).unwrap();
        let eps = 0.05;
        let placed = unit.place_cavity(eps, Vec3::new(0.3, -0.2, -1.0)).unwrap();
        let m = m();
        let s0 = assemble_single_layer(&unit, &m).unwrap();
        let s1 = assemble_single_layer(&placed, &m).unwrap();
        let k0 = assemble_k(&unit, &m).unwrap();
        let k1 = assemble_k(&placed, &m).unwrap();
        let ks0 = assemble_k_adjoint(&unit, &m).unwrap();
        let ks1 = assemble_k_adjoint(&placed, &m).unwrap();
        for i in 0..unit.len() {
            for j in 0..unit.len() {
                let a = s0.block(i, j).scale(eps);
                assert!((a - s1.block(i, j)).max_abs() <= 1e-10 * s0.max_abs() * eps);
                assert!((k0.block(i, j) - k1.block(i, j)).max_abs() <= 1e-10 * k0.max_abs());
                assert!((ks0.block(i, j) - ks1.block(i, j)).max_abs() <= 1e-10 * ks0.max_abs());
            }
        }
        // Γ ∝ 1/μ at fixed ν
        let m2 = ElasticModuli::from_poisson(m.nu, 2.0 * m.mu).unwrap();
        let s2 = assemble_single_layer(&unit, &m2).unwrap();
        let d = s2.data().iter().zip(s0.data()).map(|(a, b)| (2.0 * a - b).abs()).fold(0.0, f64::max);
        assert!(d <= 1e-15 * s0.max_abs());
    }

    #[test]
    fn translation_identity_is_exact() {
        let mesh = TriangleMesh::icosphere(2).unwrap();
        let k = assemble_k(&mesh, &m()).unwrap();
        for c in [Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.3, -2.0, 0.7)] {
            let u = k.apply(&vec![c; mesh.len()]);
            for v in u {
                assert!((v - c * JUMP).max_abs() <= 1e-12 * c.max_abs());
            }
        }
        let ks = assemble_k_adjoint(&mesh, &m()).unwrap();
        let a = mesh.areas();
        for j in 0..mesh.len() {
            let mut s = Matrix3::ZERO;
            for i in 0..mesh.len() {
                add_scaled(&mut s, &ks.block(i, j), a[i] / a[j]);
            }
            assert!((s - Matrix3::IDENTITY.scale(JUMP)).max_abs() < 1e-12);
        }
    }

    #[test]
    fn rotations_only_approximately() {
        let mesh = TriangleMesh::icosphere(3).unwrap();
        let k = assemble_k(&mesh, &m()).unwrap();
        let axis = Vec3::new(0.2, -0.5, 0.8).normalized();
        let rot: Vec<Vec3> = mesh.centroids().iter().map(|c| axis.cross(*c)).collect();
        let u = k.apply(&rot);
        let err = u.iter().zip(&rot).map(|(a, b)| (*a - *b * JUMP).norm()).fold(0.0, f64::max);
        assert!(err < 0.02, "{err}");
    }

    #[test]
    fn jump_relations_on_sphere() {
        let mesh = TriangleMesh::icosphere(2).unwrap();
        let c = mesh.centroids();
        let densities: Vec<Vec<Vec3>> = vec![
            vec![Vec3::new(0.3, -1.0, 0.5); mesh.len()],
            c.to_vec(),
            c.iter().map(|x| Vec3::new(x[0] * x[1], x[2] * x[2], x[0] - x[1] * x[2])).collect(),
        ];
        for phi in &densities {
            for delta in [1e-2, 1e-3] {
                let (o, i) = jump_relation_defect(&mesh, &m(), phi, delta).unwrap();
                assert!(o < 0.02 && i < 0.02, "delta={delta} out={o} in={i}");
            }
        }
    }

    #[test]
    fn double_layer_of_constant_decays_outside() {
        let mesh = TriangleMesh::icosphere(2).unwrap();
        let phi = vec![Vec3::new(1.0, 2.0, -1.0); mesh.len()];
        let x = Vec3::new(60.0, 70.0, -50.0);
        let u = eval_potential(PotentialKind::DoubleLayer, x, &mesh, &phi, &m()).unwrap();
        assert!(u.norm() <= 1e-3 * 6f64.sqrt());
        let inside = eval_potential(PotentialKind::DoubleLayer, Vec3::new(0.1, 0.0, 0.2), &mesh, &phi, &m()).unwrap();
        assert!((inside - phi[0]).norm() < 1e-3 * phi[0].norm());
    }

    #[test]
    fn single_layer_far_decay() {
        let mesh = TriangleMesh::icosphere(1).unwrap();
        let phi: Vec<Vec3> = mesh.centroids().iter().map(|c| Vec3::new(1.0, c[0], 0.5)).collect();
        let dir = Vec3::new(0.4, 0.5, -0.7).normalized();
        let a = eval_potential(PotentialKind::SingleLayer, dir * 100.0, &mesh, &phi, &m()).unwrap();
        let b = eval_potential(PotentialKind::SingleLayer, dir * 10000.0, &mesh, &phi, &m()).unwrap();
        let slope = (b.norm() / a.norm()).ln() / 100f64.ln();
        assert!((slope + 1.0).abs() < 0.05, "{slope}");
    }

    #[test]
    fn evaluation_errors() {
        let mesh = TriangleMesh::icosphere(1).unwrap();
        let phi = vec![Vec3::unit(0); mesh.len()];
        let m = m();
        let on = mesh.centroids()[3];
        assert!(matches!(
            eval_potential(PotentialKind::SingleLayer, on, &mesh, &phi, &m),
            Err(BemError::PointOnBoundary(_))
        ));
        assert!(matches!(
            eval_potential(PotentialKind::SingleLayer, Vec3::new(3.0, 0.0, 0.0), &mesh, &phi[1..], &m),
            Err(BemError::MeshMismatch { .. })
        ));
        // the unit sphere about the origin crosses the surface
        assert!(matches!(
            eval_potential(PotentialKind::RegularSingleLayer, Vec3::new(3.0, 0.0, -3.0), &mesh, &phi, &m),
            Err(BemError::CavityTouchesSurface(_))
        ));
        let placed = mesh.place_cavity(0.2, Vec3::new(0.0, 0.0, -1.0)).unwrap();
        assert!(matches!(
            eval_potential(PotentialKind::RegularDoubleLayer, Vec3::new(0.0, 0.0, 0.5), &placed, &phi, &m),
            Err(BemError::InvalidHalfSpacePoint(_))
        ));
        assert!(eval_potential(PotentialKind::RegularDoubleLayer, Vec3::new(0.0, 0.0, 0.0), &placed, &phi, &m).is_ok());
    }

    #[test]
    fn regular_operators_shrink_with_cavity() {
        let unit = TriangleMesh::icosphere(1).unwrap();
        let m = m();
        let z = Vec3::new(0.0, 0.0, -1.0);
        let mut ratios = Vec::new();
        let mut srn = Vec::new();
        for eps in [0.1, 0.05, 0.025] {
            let mesh = unit.place_cavity(eps, z).unwrap();
            let k = assemble_k(&mesh, &m).unwrap();
            let (s, d) = assemble_regular_ops(&mesh, &m).unwrap();
            ratios.push(d.max_abs() / k.max_abs());
            let v = s.apply(mesh.normals());
            srn.push(v.iter().map(|x| x.norm()).fold(0.0, f64::max));
            let free = apply_regular_single_layer(&mesh, &m, mesh.normals()).unwrap();
            let diff = flatten(&free).iter().zip(flatten(&v)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(diff < 1e-15);
        }
        // ‖D^R‖/‖K‖ = O(ε²): halving ratio tends to 4
        let r1 = ratios[0] / ratios[1];
        let r2 = ratios[1] / ratios[2];
        assert!((r2 - 4.0).abs() < 0.25 && (r2 - 4.0).abs() < (r1 - 4.0).abs(), "{r1} {r2}");
        // S^R n is at least O(ε²); ∫ n dσ = 0 makes it O(ε³) here
        for w in srn.windows(2) {
            assert!(w[0] / w[1] > 4.0);
        }
    }

    #[test]
    fn trace_operator_matches_parts() {
        let mesh = TriangleMesh::icosphere(1).unwrap().place_cavity(0.3, Vec3::new(0.1, 0.0, -0.6)).unwrap();
        let m = m();
        let a = assemble_trace_operator(&mesh, &m, 1.0).unwrap();
        let mut b = assemble_k(&mesh, &m).unwrap();
        let (_, d) = assemble_regular_ops(&mesh, &m).unwrap();
        b.add_scaled(1.0, &d);
        b.add_identity(0.5);
        let diff = a.data().iter().zip(b.data()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-12 * b.max_abs(), "{diff}");
    }
}
