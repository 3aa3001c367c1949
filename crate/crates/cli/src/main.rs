//! `mogi-bem`: surface displacement of a pressurized cavity in an elastic
//! half-space, from the full boundary-element model or its point-source
//! limit.

use clap::{Args, Parser, Subcommand, ValueEnum};
use halfspace_bem::asymptotics::{self, MomentTensor};
use halfspace_bem::config::{self, CavitySpec, PointSpec, RunConfig, SurfacePointSet};
use halfspace_bem::validate::{self, Fault, ValidateOptions};
use halfspace_bem::{solver, BemError, ElasticModuli, TriangleMesh, Vec3};
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "mogi-bem", version, about = "Surface deformation above a pressurized cavity in an elastic half-space")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full boundary-element solution on the observation grid.
    Forward(RunArgs),
    /// Leading-order point-source field.
    Pointsource {
        #[command(flatten)]
        run: RunArgs,
        /// Where the moment tensor comes from.
        #[arg(long, value_enum, default_value_t = MomentSource::AnalyticSphere)]
        moment: MomentSource,
    },
    /// Closed-form Mogi field of a spherical cavity.
    Mogi(RunArgs),
    /// Elastic moment tensor of a cavity shape.
    Moment(MomentArgs),
    /// Runs the built-in checks; exits with status 1 if any fails.
    Validate {
        /// Icosphere level of the test sphere.
        #[arg(long, default_value_t = 3)]
        subdiv: u32,
        /// Random samples for the kernel identities.
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, value_enum, hide = true)]
        inject: Option<Injection>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Configuration file (`key = value` lines).
    config: PathBuf,
    /// CSV destination; overrides `output` in the configuration.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct MomentArgs {
    /// Shape as an ASCII OFF file; the unit icosphere when absent.
    #[arg(long)]
    mesh: Option<PathBuf>,
    /// Icosphere level when no mesh is given.
    #[arg(long, default_value_t = config::DEFAULT_SUBDIV)]
    subdiv: u32,
    #[arg(long, conflicts_with = "lambda")]
    nu: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    mu: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum MomentSource {
    AnalyticSphere,
    Bem,
}

#[derive(Clone, Copy, ValueEnum)]
enum Injection {
    R2SignFlip,
}

/// Failure classes and their exit codes.
#[derive(Debug)]
enum Failure {
    Config(String),
    Mesh(String),
    Solver(String),
    ChecksFailed,
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::ChecksFailed => 1,
            Failure::Config(_) => 2,
            Failure::Mesh(_) => 3,
            Failure::Solver(_) => 4,
        }
    }
}

fn config_err(e: impl ToString) -> Failure {
    Failure::Config(e.to_string())
}

fn mesh_err(e: impl ToString) -> Failure {
    Failure::Mesh(e.to_string())
}

fn solver_err(e: BemError) -> Failure {
    Failure::Solver(e.to_string())
}

/// A configuration resolved into normalized units: lengths are divided by
/// the source depth `d = |z₃|`, so the source sits at depth 1.
struct Run {
    cfg: RunConfig,
    moduli: ElasticModuli,
    depth: f64,
    z: Vec3,
    points: SurfacePointSet,
}

impl Run {
    fn load(args: &RunArgs) -> Result<Run, Failure> {
        let mut cfg = RunConfig::read(&args.config).map_err(config_err)?;
        let base = args.config.parent().unwrap_or(Path::new("."));
        cfg = cfg.with_base_dir(base);
        if args.output.is_some() {
            cfg.output = args.output.clone();
        }
        let moduli = cfg.moduli.moduli().map_err(config_err)?;
        let depth = -cfg.z[2];
        let points = match &cfg.points {
            PointSpec::Grid { nx, ny, extent } => {
                SurfacePointSet::grid([cfg.z[0], cfg.z[1]], *nx, *ny, extent * depth).map_err(config_err)?
            }
            PointSpec::File(p) => SurfacePointSet::read(p).map_err(|e| config_err(format!("{}: {e}", p.display())))?,
        };
        let z = cfg.z * (1.0 / depth);
        Ok(Run { cfg, moduli, depth, z, points })
    }

    fn normalized_points(&self) -> Vec<Vec3> {
        self.points.to_vec3(1.0 / self.depth)
    }

    fn shape(&self) -> Result<TriangleMesh, Failure> {
        let mesh = match &self.cfg.cavity {
            CavitySpec::Sphere { subdiv } => TriangleMesh::icosphere(*subdiv).map_err(mesh_err)?,
            CavitySpec::MeshFile(p) => {
                TriangleMesh::read_off(p).map_err(|e| mesh_err(format!("{}: {e}", p.display())))?
            }
        };
        mesh.validate().map_err(mesh_err)?;
        Ok(mesh)
    }

    fn warn_if_large(&self, diameter: f64) {
        let ratio = self.cfg.epsilon * diameter;
        if ratio > 0.3 {
            eprintln!("warning: cavity size to depth ratio {ratio:.3} exceeds 0.3; the point-source term is inaccurate");
        }
    }

    /// Writes normalized displacements `u` back in input units.
    fn write(&self, u: &[Vec3]) -> Result<(), Failure> {
        let scaled: Vec<Vec3> = u.iter().map(|v| *v * self.depth).collect();
        match &self.cfg.output {
            Some(path) => {
                let file = File::create(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
                let mut w = BufWriter::new(file);
                config::write_csv(&mut w, &self.points, &scaled).map_err(config_err)?;
                w.flush().map_err(config_err)
            }
            None => {
                let mut w = io::stdout().lock();
                config::write_csv(&mut w, &self.points, &scaled).map_err(config_err)
            }
        }
    }
}

fn forward(args: &RunArgs) -> Result<(), Failure> {
    let run = Run::load(args)?;
    let shape = run.shape()?;
    let cavity = shape.place_cavity(run.cfg.epsilon, run.z).map_err(mesh_err)?;
    cavity.validate().map_err(mesh_err)?;
    let u = solver::forward(&cavity, &run.moduli, run.cfg.pressure, &run.normalized_points()).map_err(solver_err)?;
    run.write(&u)
}

fn pointsource(args: &RunArgs, source: MomentSource) -> Result<(), Failure> {
    let run = Run::load(args)?;
    let (volume, mi) = match source {
        MomentSource::AnalyticSphere => {
            run.warn_if_large(2.0);
            (asymptotics::UNIT_BALL_VOLUME, asymptotics::sphere_mi(&run.moduli))
        }
        MomentSource::Bem => {
            let shape = run.shape()?;
            run.warn_if_large(shape.bbox_scale());
            let t = asymptotics::bem_moment_tensor(&shape, &run.moduli).map_err(solver_err)?;
            (t.volume, t.contract_identity())
        }
    };
    let u = asymptotics::point_source_displacement(
        run.z,
        run.cfg.epsilon,
        run.cfg.pressure,
        volume,
        &mi,
        &run.moduli,
        &run.normalized_points(),
    )
    .map_err(solver_err)?;
    run.write(&u)
}

fn mogi(args: &RunArgs) -> Result<(), Failure> {
    let run = Run::load(args)?;
    run.warn_if_large(2.0);
    let u = asymptotics::mogi(run.z, run.cfg.epsilon, run.cfg.pressure, &run.moduli, &run.normalized_points())
        .map_err(solver_err)?;
    run.write(&u)
}

fn moment(args: &MomentArgs) -> Result<(), Failure> {
    let moduli = match (args.lambda, args.nu) {
        (Some(l), _) => ElasticModuli::from_lame(l, args.mu),
        (None, nu) => ElasticModuli::from_poisson(nu.unwrap_or(0.25), args.mu),
    }
    .map_err(config_err)?;
    let shape = match &args.mesh {
        Some(p) => TriangleMesh::read_off(p).map_err(|e| mesh_err(format!("{}: {e}", p.display())))?,
        None => TriangleMesh::icosphere(args.subdiv).map_err(mesh_err)?,
    };
    let report = shape.validate().map_err(mesh_err)?;
    let t = asymptotics::bem_moment_tensor(&shape, &moduli).map_err(solver_err)?;
    let mut out = io::stdout().lock();
    write_moment(&mut out, &t, report.faces, &moduli).map_err(config_err)
}

fn write_moment(out: &mut impl Write, t: &MomentTensor, faces: usize, m: &ElasticModuli) -> io::Result<()> {
    writeln!(out, "panels {faces}  volume {:.10e}  lambda {:?}  mu {:?}  nu {:?}", t.volume, m.lambda, m.mu, m.nu)?;
    writeln!(out, "\nMI (i, j):")?;
    let mi = t.contract_identity();
    for row in &mi.0 {
        writeln!(out, "{:>20.12e} {:>20.12e} {:>20.12e}", row[0], row[1], row[2])?;
    }
    writeln!(out, "\nM (rows ij, columns qr = 11 12 13 21 22 23 31 32 33):")?;
    for i in 0..3 {
        for j in 0..3 {
            write!(out, "{}{}", i + 1, j + 1)?;
            for q in 0..3 {
                for r in 0..3 {
                    write!(out, " {:>13.6e}", t.get(i, j, q, r))?;
                }
            }
            writeln!(out)?;
        }
    }
    writeln!(out, "\nminor-symmetry defect {:.3e}", t.minor_symmetry_defect())
}

fn run_validate(subdiv: u32, samples: usize, inject: Option<Injection>) -> Result<(), Failure> {
    let opts = ValidateOptions {
        subdiv,
        samples,
        fault: inject.map(|Injection::R2SignFlip| Fault::R2SignFlip),
        ..ValidateOptions::default()
    };
    let report = validate::run(&opts).map_err(solver_err)?;
    print!("{report}");
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::ChecksFailed)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Forward(a) => forward(a),
        Command::Pointsource { run, moment } => pointsource(run, *moment),
        Command::Mogi(a) => mogi(a),
        Command::Moment(a) => moment(a),
        Command::Validate { subdiv, samples, inject } => run_validate(*subdiv, *samples, *inject),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Config(m) => eprintln!("configuration error: {m}"),
                Failure::Mesh(m) => eprintln!("mesh error: {m}"),
                Failure::Solver(m) => eprintln!("solver error: {m}"),
                Failure::ChecksFailed => eprintln!("validation failed"),
            }
            ExitCode::from(f.code())
        }
    }
}
