//! Point-source engine: exterior auxiliary fields `θ^qr`, the elastic
//! moment tensor `𝕄`, the leading-order surface field of a small cavity,
//! and the closed-form Mogi field.
//!
//! The leading term for a cavity `z + εΩ` under pressure `p` is
//! `u^k(y) = ε³|Ω| p ∇̂_z N^(k)(z, y) : 𝕄I`.

use crate::error::{BemError, Result};
use crate::geom::{Matrix3, Vec3};
use crate::kernels::neumann_grad;
use crate::layers;
use crate::linalg::{flatten, from_flat};
use crate::mesh::TriangleMesh;
use crate::moduli::ElasticModuli;
use crate::par;
use std::f64::consts::PI;

/// Fourth-order tensor `M[i][j][q][r]` together with the volume `|Ω|` of the
/// shape it was computed on.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentTensor {
    pub m: [[[[f64; 3]; 3]; 3]; 3],
    pub volume: f64,
}

impl MomentTensor {
    /// Identity on symmetric matrices, `½(δ_iq δ_jr + δ_ir δ_jq)`.
    pub fn identity(volume: f64) -> Self {
        let mut m = [[[[0.0; 3]; 3]; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j][i][j] += 0.5;
                m[i][j][j][i] += 0.5;
            }
        }
        Self { m, volume }
    }

    pub fn get(&self, i: usize, j: usize, q: usize, r: usize) -> f64 {
        self.m[i][j][q][r]
    }

    /// `(𝕄I)_ij = Σ_q M_ijqq`.
    pub fn contract_identity(&self) -> Matrix3 {
        let mut out = Matrix3::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                out.0[i][j] = (0..3).map(|q| self.m[i][j][q][q]).sum();
            }
        }
        out
    }

    /// `max |M_ijqr − M_jiqr| / max |M|`.
    pub fn minor_symmetry_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        let mut scale = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                for q in 0..3 {
                    for r in 0..3 {
                        worst = worst.max((self.m[i][j][q][r] - self.m[j][i][q][r]).abs());
                        scale = scale.max(self.m[i][j][q][r].abs());
                    }
                }
            }
        }
        if scale > 0.0 {
            worst / scale
        } else {
            0.0
        }
    }

    /// Components in a frame rotated by `rot`: `R_ia R_jb R_qc R_rd M_abcd`.
    pub fn rotated(&self, rot: &Matrix3) -> Self {
        let r = &rot.0;
        let mut out = [[[[0.0; 3]; 3]; 3]; 3];
        for (i, oi) in out.iter_mut().enumerate() {
            for (j, oj) in oi.iter_mut().enumerate() {
                for (q, oq) in oj.iter_mut().enumerate() {
                    for (s, o) in oq.iter_mut().enumerate() {
                        let mut acc = 0.0;
                        for a in 0..3 {
                            for b in 0..3 {
                                for c in 0..3 {
                                    for d in 0..3 {
                                        acc += r[i][a] * r[j][b] * r[q][c] * r[s][d] * self.m[a][b][c][d];
                                    }
                                }
                            }
                        }
                        *o = acc;
                    }
                }
            }
        }
        Self { m: out, volume: self.volume }
    }
}

/// `𝕄I` of a spherical cavity, `3(λ+2μ)/(4μ) I`.
pub fn sphere_mi(m: &ElasticModuli) -> Matrix3 {
    Matrix3::IDENTITY.scale(3.0 * (m.lambda + 2.0 * m.mu) / (4.0 * m.mu))
}

/// Volume of the unit ball.
pub const UNIT_BALL_VOLUME: f64 = 4.0 * PI / 3.0;

/// Boundary traces of `θ^qr` on the panels of the unit shape.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaTraces {
    /// `traces[3q + r]`, one value per panel.
    pub traces: Vec<Vec<Vec3>>,
}

impl ThetaTraces {
    pub fn zeros(panels: usize) -> Self {
        Self { traces: vec![vec![Vec3::ZERO; panels]; 9] }
    }

    pub fn get(&self, q: usize, r: usize) -> &[Vec3] {
        &self.traces[3 * q + r]
    }

    /// `w = Σ_q θ^qq`, the trace of the exterior field with traction `−n`.
    pub fn w(&self) -> Vec<Vec3> {
        let n = self.traces[0].len();
        (0..n).map(|k| self.get(0, 0)[k] + self.get(1, 1)[k] + self.get(2, 2)[k]).collect()
    }
}

/// Neumann data `−ℂ(e_q ⊙ e_r) n / (3λ + 2μ)` of `θ^qr` at normal `n`.
pub fn theta_boundary_data(q: usize, r: usize, n: Vec3, m: &ElasticModuli) -> Vec3 {
    let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    let s = -1.0 / (3.0 * m.lambda + 2.0 * m.mu);
    Vec3::new(
        s * (m.lambda * d(q, r) * n[0] + m.mu * (d(0, q) * n[r] + d(0, r) * n[q])),
        s * (m.lambda * d(q, r) * n[1] + m.mu * (d(1, q) * n[r] + d(1, r) * n[q])),
        s * (m.lambda * d(q, r) * n[2] + m.mu * (d(2, q) * n[r] + d(2, r) * n[q])),
    )
}

const PAIRS: [(usize, usize); 6] = [(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)];

/// Solves the nine exterior Neumann problems on the unit shape `mesh`
/// with a single-layer ansatz `θ = S[ψ]`, `(½I + K*)ψ = g^qr`, and returns
/// the traces `S[ψ]`. Only the six distinct `(q ≤ r)` systems are solved.
pub fn solve_theta(mesh: &TriangleMesh, m: &ElasticModuli) -> Result<ThetaTraces> {
    let mut a = layers::assemble_k_adjoint(mesh, m)?;
    a.add_identity(0.5);
    let dim = a.dim();
    let normals = mesh.normals();
    let mut rhs = Vec::with_capacity(6 * dim);
    for &(q, r) in &PAIRS {
        let g: Vec<Vec3> = normals.iter().map(|n| theta_boundary_data(q, r, *n, m)).collect();
        rhs.extend(flatten(&g));
    }
    let lu = a.factor()?;
    lu.solve_in_place(&mut rhs, PAIRS.len());
    if !rhs.iter().all(|v| v.is_finite()) {
        return Err(BemError::SingularSystem { row: 0, pivot: f64::NAN, norm: f64::NAN });
    }
    let psi: Vec<Vec<Vec3>> = rhs.chunks(dim).map(from_flat).collect();
    let refs: Vec<&[Vec3]> = psi.iter().map(|v| v.as_slice()).collect();
    let traces = layers::apply_single_layer_many(mesh, m, &refs)?;
    let mut out = ThetaTraces::zeros(mesh.len());
    for (&(q, r), t) in PAIRS.iter().zip(traces) {
        out.traces[3 * r + q] = t.clone();
        out.traces[3 * q + r] = t;
    }
    Ok(out)
}

/// `𝕄 = 𝕀 + (1/|Ω|) Σ_panels ℂ(θ^qr ⊗ n)·area`, with `|Ω|` the mesh volume.
pub fn moment_tensor(mesh: &TriangleMesh, m: &ElasticModuli, theta: &ThetaTraces) -> Result<MomentTensor> {
    if theta.traces.len() != 9 {
        return Err(BemError::InvalidArgument(format!("expected 9 traces, got {}", theta.traces.len())));
    }
    if let Some(bad) = theta.traces.iter().find(|t| t.len() != mesh.len()) {
        return Err(BemError::MeshMismatch { expected: mesh.len(), got: bad.len() });
    }
    let volume = mesh.signed_volume();
    let mut out = MomentTensor::identity(volume);
    let normals = mesh.normals();
    let areas = mesh.areas();
    for q in 0..3 {
        for r in 0..3 {
            let mut acc = [[0.0; 3]; 3];
            for ((t, n), a) in theta.get(q, r).iter().zip(normals).zip(areas) {
                let tn = t.dot(*n);
                for (i, row) in acc.iter_mut().enumerate() {
                    for (j, v) in row.iter_mut().enumerate() {
                        let iso = if i == j { m.lambda * tn } else { 0.0 };
                        *v += a * (iso + m.mu * (t[i] * n[j] + t[j] * n[i]));
                    }
                }
            }
            for i in 0..3 {
                for j in 0..3 {
                    out.m[i][j][q][r] += acc[i][j] / volume;
                }
            }
        }
    }
    Ok(out)
}

/// [`solve_theta`] followed by [`moment_tensor`].
pub fn bem_moment_tensor(mesh: &TriangleMesh, m: &ElasticModuli) -> Result<MomentTensor> {
    let theta = solve_theta(mesh, m)?;
    moment_tensor(mesh, m, &theta)
}

fn require_source(z: Vec3) -> Result<()> {
    if !(z[2] < 0.0) || !z.is_finite() {
        return Err(BemError::InvalidHalfSpacePoint(format!("source depth must be negative, got z3 = {}", z[2])));
    }
    Ok(())
}

fn require_surface(y: Vec3) -> Result<()> {
    if y[2] != 0.0 || !y.is_finite() {
        return Err(BemError::InvalidHalfSpacePoint(format!("observation point must lie on x3 = 0, got {}", y[2])));
    }
    Ok(())
}

/// Raw gradients `g_k[i][l] = ∂_{z_l} N_ik(z, y)` for a surface point `y`.
fn grad_n_raw(z: Vec3, y: Vec3, m: &ElasticModuli) -> Result<[[[f64; 3]; 3]; 3]> {
    require_source(z)?;
    require_surface(y)?;
    let t = neumann_grad(z, y, m)?;
    Ok([t.column_gradient(0), t.column_gradient(1), t.column_gradient(2)])
}

/// `∇̂_z N^(k)(z, y)` for `k = 1..3`, the symmetrized `z`-gradient of the
/// `k`-th Neumann column, with `y` on the free surface.
pub fn grad_n_surface(z: Vec3, y: Vec3, m: &ElasticModuli) -> Result<[Matrix3; 3]> {
    let raw = grad_n_raw(z, y, m)?;
    Ok(raw.map(|g| {
        let mut s = Matrix3::ZERO;
        for i in 0..3 {
            for l in 0..3 {
                s.0[i][l] = 0.5 * (g[i][l] + g[l][i]);
            }
        }
        s
    }))
}

fn contract(a: &Matrix3, b: &Matrix3) -> f64 {
    (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).map(|(i, j)| a.0[i][j] * b.0[i][j]).sum()
}

/// Leading-order surface displacement of the cavity `z + εΩ` where `Ω`
/// has volume `volume` and contracted moment tensor `mi = 𝕄I`.
pub fn point_source_displacement(
    z: Vec3,
    epsilon: f64,
    pressure: f64,
    volume: f64,
    mi: &Matrix3,
    m: &ElasticModuli,
    points: &[Vec3],
) -> Result<Vec<Vec3>> {
    require_source(z)?;
    if !(epsilon > 0.0) || !pressure.is_finite() || !(volume > 0.0) || !mi.is_finite() {
        return Err(BemError::InvalidArgument("epsilon and volume must be positive, pressure and 𝕄I finite".into()));
    }
    points.iter().try_for_each(|y| require_surface(*y))?;
    let scale = epsilon.powi(3) * volume * pressure;
    par::map_range(points.len(), |k| {
        let g = grad_n_surface(z, points[k], m)?;
        Ok(Vec3::new(contract(&g[0], mi), contract(&g[1], mi), contract(&g[2], mi)) * scale)
    })
    .into_iter()
    .collect()
}

/// Point source with a [`MomentTensor`].
pub fn point_source_from_tensor(
    z: Vec3,
    epsilon: f64,
    pressure: f64,
    tensor: &MomentTensor,
    m: &ElasticModuli,
    points: &[Vec3],
) -> Result<Vec<Vec3>> {
    point_source_displacement(z, epsilon, pressure, tensor.volume, &tensor.contract_identity(), m, points)
}

/// Mogi field `(1 − ν)/μ · ε³p · (z₁ − y₁, z₂ − y₂, z₃) / |z − y|³` on `x₃ = 0`.
pub fn mogi(z: Vec3, epsilon: f64, pressure: f64, m: &ElasticModuli, points: &[Vec3]) -> Result<Vec<Vec3>> {
    require_source(z)?;
    points.iter().try_for_each(|y| require_surface(*y))?;
    let c = (1.0 - m.nu) / m.mu * epsilon.powi(3) * pressure;
    Ok(points
        .iter()
        .map(|y| {
            let d = z - *y;
            let r = d.norm();
            d * (c / (r * r * r))
        })
        .collect())
}
