//! Trace equation and representation formula for a pressurized cavity.

use crate::error::{BemError, Result};
use crate::geom::Vec3;
use crate::layers::{self, Panels};
use crate::linalg::{flatten, from_flat, relative_residual};
use crate::mesh::TriangleMesh;
use crate::moduli::ElasticModuli;
use crate::par;
use std::fmt;

/// Required relative residual of the discrete trace equation.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

/// Displacement trace on the cavity wall and the residual it was solved to.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceSolution {
    pub f: Vec<Vec3>,
    pub residual: f64,
}

/// Solves `(½I + K + D^R) f = p (S n + S^R n)` on the cavity mesh.
pub fn solve_trace(mesh: &TriangleMesh, m: &ElasticModuli, pressure: f64) -> Result<TraceSolution> {
    solve_trace_with(mesh, m, pressure, 1.0)
}

pub(crate) fn solve_trace_with(
    mesh: &TriangleMesh,
    m: &ElasticModuli,
    pressure: f64,
    r2_sign: f64,
) -> Result<TraceSolution> {
    if !pressure.is_finite() {
        return Err(BemError::InvalidArgument(format!("pressure is not finite: {pressure}")));
    }
    let a = layers::assemble_trace_operator(mesh, m, r2_sign)?;
    let sn = layers::apply_single_layer(mesh, m, mesh.normals())?;
    let srn = apply_regular_single_layer_with(mesh, m, r2_sign)?;
    let rhs: Vec<Vec3> = sn.iter().zip(&srn).map(|(a, b)| (*a + *b) * pressure).collect();
    let b = flatten(&rhs);
    let lu = a.clone().factor()?;
    let x = lu.solve(&b);
    let residual = relative_residual(&a, &x, &b);
    if !(residual <= RESIDUAL_TOLERANCE) {
        let norm = a.max_abs();
        return Err(BemError::SingularSystem { row: 0, pivot: residual, norm });
    }
    Ok(TraceSolution { f: from_flat(&x), residual })
}

fn apply_regular_single_layer_with(mesh: &TriangleMesh, m: &ElasticModuli, r2_sign: f64) -> Result<Vec<Vec3>> {
    if r2_sign == 1.0 {
        return layers::apply_regular_single_layer(mesh, m, mesh.normals());
    }
    // fault-injection path: same sum through the generic evaluator
    Ok(layers::apply_regular_single_layer_signed(mesh, m, mesh.normals(), r2_sign))
}

/// Displacement `u = p S n − D f + p S^R n − D^R f` at points outside the
/// cavity (typically on `x₃ = 0`).
pub fn surface_displacement(
    mesh: &TriangleMesh,
    m: &ElasticModuli,
    pressure: f64,
    f: &[Vec3],
    points: &[Vec3],
) -> Result<Vec<Vec3>> {
    if f.len() != mesh.len() {
        return Err(BemError::MeshMismatch { expected: mesh.len(), got: f.len() });
    }
    let top = mesh.max_height();
    if !(top < 0.0) {
        return Err(BemError::CavityTouchesSurface(top));
    }
    let p = Panels::new(mesh);
    for (k, x) in points.iter().enumerate() {
        if x[2] > 0.0 || !x.is_finite() {
            return Err(BemError::InvalidHalfSpacePoint(format!("point {k} has x3 = {}", x[2])));
        }
        layers::check_target(&p, *x)?;
        if mesh.winding_number(*x) > 0.5 {
            return Err(BemError::PointInsideCavity(k));
        }
    }
    Ok(par::map_range(points.len(), |k| layers::representation(&p, points[k], f, pressure, m)))
}

/// Full forward model: trace solve followed by evaluation at `points`.
pub fn forward(mesh: &TriangleMesh, m: &ElasticModuli, pressure: f64, points: &[Vec3]) -> Result<Vec<Vec3>> {
    let sol = solve_trace(mesh, m, pressure)?;
    surface_displacement(mesh, m, pressure, &sol.f, points)
}

/// One line of a [`ConvergenceReport`].
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub epsilon: f64,
    /// `sup |u_bem − u_lead|`
    pub gap: f64,
    /// `gap / sup |u_lead|`
    pub relative_gap: f64,
    /// Gap of the previous (larger) ε divided by this one.
    pub reduction: Option<f64>,
    /// Same ratio for the relative gaps.
    pub relative_reduction: Option<f64>,
}

/// Gap between the finite-cavity solution and the point-source leading
/// term for a decreasing sequence of cavity sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceReport {
    pub fn monotone(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].relative_gap < w[0].relative_gap)
    }

    /// Smallest gap ratio between consecutive rows; `None` for one row.
    /// Halving ε with an `O(ε⁴)` remainder gives about 16, and anything
    /// at or above 8 means the relative gap did not grow.
    pub fn min_reduction(&self) -> Option<f64> {
        self.rows.iter().filter_map(|r| r.reduction).reduce(f64::min)
    }
}

impl fmt::Display for ConvergenceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:>10} {:>14} {:>14} {:>10} {:>10}", "epsilon", "gap", "relative", "ratio", "rel.ratio")?;
        let show = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.3}"));
        for r in &self.rows {
            writeln!(
                f,
                "{:>10.4} {:>14.6e} {:>14.6e} {:>10} {:>10}",
                r.epsilon,
                r.gap,
                r.relative_gap,
                show(r.reduction),
                show(r.relative_reduction)
            )?;
        }
        Ok(())
    }
}

/// Runs the forward model for each ε (strictly decreasing) on
/// `shape` placed at `z`, comparing with `leading(ε)` at `points`.
pub fn convergence_report(
    shape: &TriangleMesh,
    z: Vec3,
    epsilons: &[f64],
    m: &ElasticModuli,
    pressure: f64,
    points: &[Vec3],
    leading: impl Fn(f64) -> Result<Vec<Vec3>>,
) -> Result<ConvergenceReport> {
    if epsilons.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(BemError::InvalidArgument("epsilons must be strictly decreasing".into()));
    }
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let mesh = shape.place_cavity(eps, z)?;
        let u = forward(&mesh, m, pressure, points)?;
        let lead = leading(eps)?;
        let (gap, relative_gap) = sup_gap(&u, &lead);
        let reduction = rows.last().map(|prev| prev.gap / gap);
        let relative_reduction = rows.last().map(|prev| prev.relative_gap / relative_gap);
        rows.push(ConvergenceRow { epsilon: eps, gap, relative_gap, reduction, relative_reduction });
    }
    Ok(ConvergenceReport { rows })
}

/// `(sup |a − b|, sup |a − b| / sup |b|)` over paired vectors.
pub fn sup_gap(a: &[Vec3], b: &[Vec3]) -> (f64, f64) {
    let gap = a.iter().zip(b).map(|(x, y)| (*x - *y).norm()).fold(0.0, f64::max);
    let scale = b.iter().map(|y| y.norm()).fold(0.0, f64::max);
    (gap, if scale > 0.0 { gap / scale } else { gap })
}
