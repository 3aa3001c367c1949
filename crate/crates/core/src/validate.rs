//! Self-checks run by the `validate` command: kernel identities on random
//! samples, jump relations, the sphere moment tensor and the Mogi
//! comparison with its convergence table.

use crate::asymptotics::{self, grad_n_surface};
use crate::error::Result;
use crate::geom::Vec3;
use crate::kernels::{
    add_tensors, appendix_neumann, kelvin_grad, neumann, neumann_grad, regular_grad_signed, traction_from_grad,
};
use crate::layers::jump_relation_defect;
use crate::mesh::TriangleMesh;
use crate::moduli::ElasticModuli;
use crate::solver::{self, ConvergenceReport};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;

/// Deliberate kernel faults, used to show that a check can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Flip the sign of the `y₃ R²` term of the Neumann function.
    R2SignFlip,
}

impl Fault {
    fn r2_sign(fault: Option<Fault>) -> f64 {
        match fault {
            Some(Fault::R2SignFlip) => -1.0,
            None => 1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ValidateOptions {
    pub subdiv: u32,
    pub samples: usize,
    pub seed: u64,
    pub fault: Option<Fault>,
    /// Cavity sizes for the convergence table, decreasing.
    pub epsilons: Vec<f64>,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        Self { subdiv: 3, samples: 100, seed: 20240917, fault: None, epsilons: vec![0.2, 0.1, 0.05] }
    }
}

/// One named check with its measured value and threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub limit: f64,
    pub passed: bool,
}

impl Check {
    /// Passes when `value <= limit`.
    pub fn at_most(name: &'static str, value: f64, limit: f64) -> Self {
        Self { name, value, limit, passed: value <= limit }
    }

    pub fn at_least(name: &'static str, value: f64, limit: f64) -> Self {
        Self { name, value, limit, passed: value >= limit }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag}  {:<40} {:>12.4e}  (limit {:.1e})", self.name, self.value, self.limit)
    }
}

#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
    pub convergence: Option<ConvergenceReport>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        if let Some(t) = &self.convergence {
            writeln!(f, "\nsphere vs Mogi, relative sup-norm gap on a 21x21 grid:")?;
            write!(f, "{t}")?;
        }
        writeln!(f, "\n{}", if self.passed() { "all checks passed" } else { "some checks FAILED" })
    }
}

/// `count` pairs `(x, y)` with `x` on the free surface and `y` strictly
/// below it, both within a few depth units of the origin.
pub fn surface_pairs(seed: u64, count: usize) -> Vec<(Vec3, Vec3)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let x = Vec3::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), 0.0);
            let y = Vec3::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..-0.05));
            (x, y)
        })
        .collect()
}

/// `max ‖(ℂ∇̂N) e₃‖ / ((λ + 2μ) |∇N|)` over the pairs, `x` on the surface.
pub fn traction_free_defect(pairs: &[(Vec3, Vec3)], m: &ElasticModuli, fault: Option<Fault>) -> Result<f64> {
    let sign = Fault::r2_sign(fault);
    let mut worst = 0.0f64;
    for &(x, y) in pairs {
        let g = if sign == 1.0 {
            neumann_grad(x, y, m)?
        } else {
            add_tensors(&kelvin_grad(x - y, m)?, &regular_grad_signed(x, y, m, sign))
        };
        let t = traction_from_grad(&g, Vec3::unit(2), m);
        worst = worst.max(t.frobenius() / ((m.lambda + 2.0 * m.mu) * g.frobenius()));
    }
    Ok(worst)
}

/// Largest deviation of `Tr ∇̂_z N^(k)(z, y)` from its closed form,
/// relative to `2κ_μ(1−2ν)|z − y|⁻²`; `z` below the surface, `y` on it.
pub fn trace_identity_defect(pairs: &[(Vec3, Vec3)], m: &ElasticModuli) -> Result<f64> {
    let mut worst = 0.0f64;
    for &(y, z) in pairs {
        let g = grad_n_surface(z, y, m)?;
        let f = 1.0 / (z - y).norm();
        let k = 2.0 * m.kmu * (1.0 - 2.0 * m.nu) * f.powi(3);
        let exact = [k * (z[0] - y[0]), k * (z[1] - y[1]), k * z[2]];
        for c in 0..3 {
            worst = worst.max((g[c].trace() - exact[c]).abs() / (k / f));
        }
    }
    Ok(worst)
}

/// `max |N(x, y) − |y₃|⁻¹ 𝒩((x − (y₁, y₂, 0))/|y₃|)| / |N|` over the pairs.
pub fn scaling_identity_defect(pairs: &[(Vec3, Vec3)], m: &ElasticModuli) -> Result<f64> {
    let mut worst = 0.0f64;
    for &(x, y) in pairs {
        let d = -y[2];
        let a = neumann(x, y, m)?;
        let xs = Vec3::new((x[0] - y[0]) / d, (x[1] - y[1]) / d, x[2] / d);
        let b = appendix_neumann(xs, m)?.scale(1.0 / d);
        worst = worst.max((a - b).frobenius() / a.frobenius());
    }
    Ok(worst)
}

/// The 21 × 21 grid over `[−5, 5]²` used for the Mogi comparison.
pub fn mogi_grid() -> Vec<Vec3> {
    (0..21).flat_map(|i| (0..21).map(move |j| Vec3::new(-5.0 + 0.5 * i as f64, -5.0 + 0.5 * j as f64, 0.0))).collect()
}

/// Worst jump-relation defect at `δ = 10⁻²h` over constant, linear and
/// quadratic densities on `mesh`.
pub fn jump_defect(mesh: &TriangleMesh, m: &ElasticModuli) -> Result<f64> {
    let c = mesh.centroids();
    let densities: [Vec<Vec3>; 3] = [
        vec![Vec3::new(0.3, -1.0, 0.5); mesh.len()],
        c.to_vec(),
        c.iter().map(|x| Vec3::new(x[0] * x[1], x[2] * x[2], x[0] - x[1] * x[2])).collect(),
    ];
    let mut worst = 0.0f64;
    for phi in &densities {
        let (o, i) = jump_relation_defect(mesh, m, phi, 1e-2)?;
        worst = worst.max(o).max(i);
    }
    Ok(worst)
}

/// Runs every check with `ν = 0.25`, `μ = 1`.
pub fn run(opts: &ValidateOptions) -> Result<ValidationReport> {
    let m = ElasticModuli::from_poisson(0.25, 1.0)?;
    let pairs = surface_pairs(opts.seed, opts.samples);
    let mut checks = vec![
        Check::at_most("traction-free surface", traction_free_defect(&pairs, &m, opts.fault)?, 1e-6),
        Check::at_most("surface trace identities", trace_identity_defect(&pairs, &m)?, 1e-6),
        Check::at_most("half-space scaling identity", scaling_identity_defect(&pairs, &m)?, 1e-12),
    ];
    let unit = TriangleMesh::icosphere(opts.subdiv)?;
    checks.push(Check::at_most("jump relations", jump_defect(&unit, &m)?, 0.02));
    let tensor = asymptotics::bem_moment_tensor(&unit, &m)?;
    let mi = tensor.contract_identity();
    let exact = asymptotics::sphere_mi(&m);
    checks.push(Check::at_most("sphere moment tensor MI", (mi - exact).max_abs() / exact.max_abs(), 0.02));

    let z = Vec3::new(0.0, 0.0, -1.0);
    let grid = mogi_grid();
    let table = solver::convergence_report(&unit, z, &opts.epsilons, &m, 1.0, &grid, |eps| {
        asymptotics::mogi(z, eps, 1.0, &m, &grid)
    })?;
    if let Some(last) = table.rows.last() {
        checks.push(Check::at_most("Mogi relative gap at smallest epsilon", last.relative_gap, 0.05));
    }
    if table.rows.len() > 1 {
        checks.push(Check::at_least(
            "Mogi gap decreases (monotone = 1)",
            if table.monotone() { 1.0 } else { 0.0 },
            1.0,
        ));
        checks.push(Check::at_least("Mogi gap ratio per halving", table.min_reduction().unwrap_or(0.0), 8.0));
    }
    Ok(ValidationReport { checks, convergence: Some(table) })
}
