//! Run configuration, observation points and CSV output.
//!
//! The configuration is a flat list of `key = value` lines; `#` starts a
//! comment. Recognized keys:
//!
//! ```text
//! lambda, mu, nu          moduli: mu plus exactly one of lambda / nu
//! cavity                  sphere | mesh
//! subdiv                  icosphere level for cavity = sphere
//! mesh_file               OFF file for cavity = mesh
//! z                       source centre "z1 z2 z3" (commas allowed), z3 < 0
//! epsilon                 radius-to-depth ratio
//! pressure                pressure change
//! grid_nx, grid_ny        grid size
//! grid_extent             grid half-width in units of |z3|
//! points_file             explicit surface points instead of a grid
//! output                  CSV path (standard output when absent)
//! ```

use crate::error::{BemError, Result};
use crate::geom::Vec3;
use crate::moduli::ElasticModuli;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModuliSpec {
    Lame { lambda: f64, mu: f64 },
    Poisson { nu: f64, mu: f64 },
}

impl ModuliSpec {
    pub fn moduli(&self) -> Result<ElasticModuli> {
        match *self {
            ModuliSpec::Lame { lambda, mu } => ElasticModuli::from_lame(lambda, mu),
            ModuliSpec::Poisson { nu, mu } => ElasticModuli::from_poisson(nu, mu),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CavitySpec {
    Sphere { subdiv: u32 },
    MeshFile(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub enum PointSpec {
    Grid { nx: usize, ny: usize, extent: f64 },
    File(PathBuf),
}

/// A parsed run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub moduli: ModuliSpec,
    pub cavity: CavitySpec,
    pub z: Vec3,
    pub epsilon: f64,
    pub pressure: f64,
    pub points: PointSpec,
    pub output: Option<PathBuf>,
}

const KEYS: [&str; 14] = [
    "lambda",
    "mu",
    "nu",
    "cavity",
    "subdiv",
    "mesh_file",
    "z",
    "epsilon",
    "pressure",
    "grid_nx",
    "grid_ny",
    "grid_extent",
    "points_file",
    "output",
];

pub const DEFAULT_SUBDIV: u32 = 3;
pub const DEFAULT_GRID: usize = 21;
pub const DEFAULT_EXTENT: f64 = 5.0;

struct Entries {
    map: BTreeMap<&'static str, (usize, String)>,
}

impl Entries {
    fn raw(&self, key: &str) -> Option<(usize, &str)> {
        self.map.get(key).map(|(l, v)| (*l, v.as_str()))
    }

    fn has(&self, key: &str) -> bool {
        self.map.contains_key(key)
    }

    fn float(&self, key: &str) -> Result<Option<f64>> {
        self.raw(key).map(|(line, v)| parse_float(v, line, key)).transpose()
    }

    fn count(&self, key: &str) -> Result<Option<usize>> {
        self.raw(key)
            .map(|(line, v)| {
                v.parse::<usize>().map_err(|_| BemError::Parse { line, msg: format!("{key}: expected a non-negative integer, got `{v}`") })
            })
            .transpose()
    }

    fn require_float(&self, key: &str) -> Result<f64> {
        self.float(key)?.ok_or_else(|| missing(key))
    }
}

fn missing(key: &str) -> BemError {
    BemError::Parse { line: 0, msg: format!("missing key `{key}`") }
}

fn parse_float(v: &str, line: usize, key: &str) -> Result<f64> {
    match v.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(BemError::Parse { line, msg: format!("{key}: expected a finite number, got `{v}`") }),
    }
}

fn at(key: &str, entries: &Entries, msg: impl Into<String>) -> BemError {
    let line = entries.raw(key).map_or(0, |(l, _)| l);
    BemError::Parse { line, msg: msg.into() }
}

impl RunConfig {
    /// Parses configuration text. Unknown and repeated keys are errors.
    pub fn parse(text: &str) -> Result<RunConfig> {
        let mut map = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (k, v) = content
                .split_once('=')
                .ok_or_else(|| BemError::Parse { line, msg: format!("expected `key = value`, got `{content}`") })?;
            let k = k.trim();
            let key = KEYS
                .iter()
                .find(|&&known| known == k)
                .ok_or_else(|| BemError::Parse { line, msg: format!("unknown key `{k}`") })?;
            let v = v.trim();
            if v.is_empty() {
                return Err(BemError::Parse { line, msg: format!("empty value for `{k}`") });
            }
            if map.insert(*key, (line, v.to_string())).is_some() {
                return Err(BemError::Parse { line, msg: format!("repeated key `{k}`") });
            }
        }
        let e = Entries { map };

        let mu = e.require_float("mu")?;
        let moduli = match (e.float("lambda")?, e.float("nu")?) {
            (Some(lambda), None) => ModuliSpec::Lame { lambda, mu },
            (None, Some(nu)) => ModuliSpec::Poisson { nu, mu },
            (Some(_), Some(_)) => return Err(at("nu", &e, "give either `lambda` or `nu`, not both")),
            (None, None) => return Err(missing("lambda` or `nu")),
        };
        moduli.moduli().map_err(|err| at("mu", &e, err.to_string()))?;

        let kind = e.raw("cavity").map(|(_, v)| v);
        let cavity = match (kind, e.raw("mesh_file")) {
            (None | Some("sphere"), None) => {
                let subdiv = e.count("subdiv")?.map_or(DEFAULT_SUBDIV, |s| s as u32);
                if subdiv > 7 {
                    return Err(at("subdiv", &e, "subdiv must be at most 7"));
                }
                CavitySpec::Sphere { subdiv }
            }
            (None | Some("mesh"), Some((_, path))) => {
                if e.has("subdiv") {
                    return Err(at("subdiv", &e, "`subdiv` only applies to cavity = sphere"));
                }
                CavitySpec::MeshFile(PathBuf::from(path))
            }
            (Some("mesh"), None) => return Err(at("cavity", &e, "cavity = mesh needs `mesh_file`")),
            (Some("sphere"), Some(_)) => return Err(at("mesh_file", &e, "`mesh_file` conflicts with cavity = sphere")),
            (Some(other), _) => return Err(at("cavity", &e, format!("cavity must be `sphere` or `mesh`, got `{other}`"))),
        };

        let (zline, zraw) = e.raw("z").ok_or_else(|| missing("z"))?;
        let parts: Vec<&str> = zraw.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
        if parts.len() != 3 {
            return Err(BemError::Parse { line: zline, msg: format!("z: expected three numbers, got `{zraw}`") });
        }
        let mut z = Vec3::ZERO;
        for (k, p) in parts.iter().enumerate() {
            z[k] = parse_float(p, zline, "z")?;
        }
        if !(z[2] < 0.0) {
            return Err(BemError::Parse { line: zline, msg: "z3 must be negative".into() });
        }

        let epsilon = e.require_float("epsilon")?;
        if !(epsilon > 0.0) {
            return Err(at("epsilon", &e, "epsilon must be positive"));
        }
        let pressure = e.float("pressure")?.unwrap_or(1.0);

        let grid_keys = ["grid_nx", "grid_ny", "grid_extent"];
        let points = match e.raw("points_file") {
            Some((line, path)) => {
                if grid_keys.iter().any(|k| e.has(k)) {
                    return Err(BemError::Parse { line, msg: "`points_file` conflicts with grid keys".into() });
                }
                PointSpec::File(PathBuf::from(path))
            }
            None => {
                let nx = e.count("grid_nx")?.unwrap_or(DEFAULT_GRID);
                let ny = e.count("grid_ny")?.unwrap_or(DEFAULT_GRID);
                let extent = e.float("grid_extent")?.unwrap_or(DEFAULT_EXTENT);
                if nx == 0 || ny == 0 {
                    return Err(at(if nx == 0 { "grid_nx" } else { "grid_ny" }, &e, "grid counts must be at least 1"));
                }
                if !(extent >= 0.0) {
                    return Err(at("grid_extent", &e, "grid_extent must be non-negative"));
                }
                PointSpec::Grid { nx, ny, extent }
            }
        };
        let output = e.raw("output").map(|(_, v)| PathBuf::from(v));
        Ok(RunConfig { moduli, cavity, z, epsilon, pressure, points, output })
    }

    pub fn read(path: &Path) -> Result<RunConfig> {
        RunConfig::parse(&std::fs::read_to_string(path)?)
    }

    /// Canonical text form; `parse(serialize(c)) == c`.
    pub fn serialize(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        match self.moduli {
            ModuliSpec::Lame { lambda, mu } => {
                put("lambda", format!("{lambda:?}"));
                put("mu", format!("{mu:?}"));
            }
            ModuliSpec::Poisson { nu, mu } => {
                put("nu", format!("{nu:?}"));
                put("mu", format!("{mu:?}"));
            }
        }
        match &self.cavity {
            CavitySpec::Sphere { subdiv } => {
                put("cavity", "sphere".into());
                put("subdiv", subdiv.to_string());
            }
            CavitySpec::MeshFile(p) => {
                put("cavity", "mesh".into());
                put("mesh_file", p.display().to_string());
            }
        }
        put("z", format!("{:?} {:?} {:?}", self.z[0], self.z[1], self.z[2]));
        put("epsilon", format!("{:?}", self.epsilon));
        put("pressure", format!("{:?}", self.pressure));
        match &self.points {
            PointSpec::Grid { nx, ny, extent } => {
                put("grid_nx", nx.to_string());
                put("grid_ny", ny.to_string());
                put("grid_extent", format!("{extent:?}"));
            }
            PointSpec::File(p) => put("points_file", p.display().to_string()),
        }
        if let Some(o) = &self.output {
            put("output", o.display().to_string());
        }
        s
    }

    /// Resolves relative file paths against `base` (the config file's directory).
    pub fn with_base_dir(mut self, base: &Path) -> RunConfig {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let CavitySpec::MeshFile(p) = &mut self.cavity {
            fix(p);
        }
        if let PointSpec::File(p) = &mut self.points {
            fix(p);
        }
        if let Some(p) = &mut self.output {
            fix(p);
        }
        self
    }
}

/// Observation points `(y₁, y₂)` on the free surface.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfacePointSet {
    points: Vec<[f64; 2]>,
}

impl SurfacePointSet {
    pub fn new(points: Vec<[f64; 2]>) -> Result<Self> {
        if points.is_empty() {
            return Err(BemError::InvalidArgument("empty point set".into()));
        }
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(BemError::InvalidArgument("non-finite surface point".into()));
        }
        Ok(Self { points })
    }

    /// `nx × ny` grid centred at `centre` spanning `±half_width`; `y₁` varies
    /// slowest. A count of 1 puts that axis on the centre.
    pub fn grid(centre: [f64; 2], nx: usize, ny: usize, half_width: f64) -> Result<Self> {
        let axis = |n: usize, c: f64| -> Vec<f64> {
            if n == 1 {
                vec![c]
            } else {
                (0..n).map(|k| c - half_width + 2.0 * half_width * k as f64 / (n - 1) as f64).collect()
            }
        };
        let xs = axis(nx, centre[0]);
        let ys = axis(ny, centre[1]);
        Self::new(xs.iter().flat_map(|&x| ys.iter().map(move |&y| [x, y])).collect())
    }

    /// Two numbers per line separated by whitespace or a comma; blank
    /// lines, `#` comments and a `y1,y2` header are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut pts = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() || (pts.is_empty() && content.replace(' ', "") == "y1,y2") {
                continue;
            }
            let parts: Vec<&str> = content.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
            if parts.len() != 2 {
                return Err(BemError::Parse { line, msg: format!("expected two coordinates, got `{content}`") });
            }
            pts.push([parse_float(parts[0], line, "y1")?, parse_float(parts[1], line, "y2")?]);
        }
        Self::new(pts).map_err(|e| BemError::Parse { line: 0, msg: e.to_string() })
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Points on `x₃ = 0`, each coordinate multiplied by `scale`.
    pub fn to_vec3(&self, scale: f64) -> Vec<Vec3> {
        self.points.iter().map(|p| Vec3::new(p[0] * scale, p[1] * scale, 0.0)).collect()
    }
}

pub const CSV_HEADER: &str = "y1,y2,u1,u2,u3";

/// Writes `y1,y2,u1,u2,u3` rows with 17 significant digits and `\n` line ends.
pub fn write_csv(out: &mut impl Write, points: &SurfacePointSet, u: &[Vec3]) -> Result<()> {
    if u.len() != points.len() {
        return Err(BemError::InvalidArgument(format!("{} points but {} values", points.len(), u.len())));
    }
    let mut s = String::with_capacity(96 * (u.len() + 1));
    s.push_str(CSV_HEADER);
    s.push('\n');
    for (p, v) in points.points().iter().zip(u) {
        let _ = writeln!(s, "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}", p[0], p[1], v[0], v[1], v[2]);
    }
    out.write_all(s.as_bytes())?;
    Ok(())
}

/// Reads back a file produced by [`write_csv`].
pub fn read_csv(text: &str) -> Result<(SurfacePointSet, Vec<Vec3>)> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == CSV_HEADER => {}
        _ => return Err(BemError::Parse { line: 1, msg: format!("expected header `{CSV_HEADER}`") }),
    }
    let mut pts = Vec::new();
    let mut u = Vec::new();
    for (idx, l) in lines {
        let vals: Vec<f64> = l
            .split(',')
            .map(|v| parse_float(v.trim(), idx + 1, "csv"))
            .collect::<Result<_>>()?;
        if vals.len() != 5 {
            return Err(BemError::Parse { line: idx + 1, msg: "expected 5 columns".into() });
        }
        pts.push([vals[0], vals[1]]);
        u.push(Vec3::new(vals[2], vals[3], vals[4]));
    }
    Ok((SurfacePointSet::new(pts)?, u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const SAMPLE: &str = "# sphere at unit depth\nnu = 0.25\nmu = 1\ncavity = sphere\nsubdiv = 3\nz = 0, 0, -1\nepsilon = 0.05\npressure = 1\ngrid_nx = 21\ngrid_ny = 21\ngrid_extent = 5\n";

    #[test]
    fn parses_sample() {
        let c = RunConfig::parse(SAMPLE).unwrap();
        assert_eq!(c.moduli, ModuliSpec::Poisson { nu: 0.25, mu: 1.0 });
        assert_eq!(c.cavity, CavitySpec::Sphere { subdiv: 3 });
        assert_eq!(c.z, Vec3::new(0.0, 0.0, -1.0));
        assert_eq!(c.points, PointSpec::Grid { nx: 21, ny: 21, extent: 5.0 });
        assert_eq!(c.output, None);
        assert_eq!(RunConfig::parse(&c.serialize()).unwrap(), c);
    }

    #[test]
    fn rejects_bad_input() {
        let bad = [
            ("mu = 1\nz = 0 0 -1\nepsilon = 0.1\n", 0),
            ("nu = 0.25\nlambda = 1\nmu = 1\nz = 0 0 -1\nepsilon = 0.1\n", 1),
            ("nu = 0.25\nmu = 1\nz = 0 0 1\nepsilon = 0.1\n", 3),
            ("nu = 0.25\nmu = 1\nz = 0 0 -1\nepsilon = -0.1\n", 4),
            ("nu = 0.25\nmu = 1\nz = 0 0 -1\nepsilon = 0.1\ncolour = red\n", 5),
            ("nu = 0.25\nmu = 1\nmu = 2\n", 3),
            ("nu = 0.25\nmu = 1\nz = 0 0 -1\nepsilon = 0.1\ngrid_nx = 0\n", 5),
            ("nu = 0.25\nmu = 1\nz = 0 0 -1\nepsilon = nan\n", 4),
            ("nu = 0.6\nmu = 1\nz = 0 0 -1\nepsilon = 0.1\n", 2),
            ("nu = 0.25\nmu = 1\nz = 0 0 -1\nepsilon = 0.1\ncavity = mesh\n", 5),
            ("nu = 0.25\nmu = 1\nz = 0 0 -1\nepsilon = 0.1\npoints_file = p.txt\ngrid_nx = 3\n", 5),
            ("just text\n", 1),
        ];
        for (text, line) in bad {
            match RunConfig::parse(text) {
                Err(BemError::Parse { line: l, .. }) => assert_eq!(l, line, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn mesh_and_points_file() {
        let c = RunConfig::parse("lambda = 2\nmu = 1\nmesh_file = shapes/ell.off\nz = 1 2 -3\nepsilon = 0.1\npoints_file = pts.txt\noutput = out.csv\n")
            .unwrap();
        assert_eq!(c.cavity, CavitySpec::MeshFile("shapes/ell.off".into()));
        let r = c.clone().with_base_dir(Path::new("/data"));
        assert_eq!(r.cavity, CavitySpec::MeshFile("/data/shapes/ell.off".into()));
        assert_eq!(r.output, Some("/data/out.csv".into()));
        assert_eq!(RunConfig::parse(&c.serialize()).unwrap(), c);
    }

    #[test]
    fn grid_layout() {
        let g = SurfacePointSet::grid([1.0, -2.0], 21, 21, 5.0).unwrap();
        assert_eq!(g.len(), 441);
        assert_eq!(g.points()[0], [-4.0, -7.0]);
        assert_eq!(g.points()[220], [1.0, -2.0]);
        assert_eq!(g.points()[440], [6.0, 3.0]);
        let one = SurfacePointSet::grid([0.5, 0.5], 1, 3, 1.0).unwrap();
        assert_eq!(one.points(), &[[0.5, -0.5], [0.5, 0.5], [0.5, 1.5]]);
    }

    #[test]
    fn points_file_format() {
        let p = SurfacePointSet::parse("y1,y2\n0 0\n# c\n1.5, -2\n\n").unwrap();
        assert_eq!(p.points(), &[[0.0, 0.0], [1.5, -2.0]]);
        assert!(matches!(SurfacePointSet::parse("1 2 3\n"), Err(BemError::Parse { line: 1, .. })));
        assert!(SurfacePointSet::parse("# nothing\n").is_err());
    }

    #[test]
    fn csv_is_exact_and_lf() {
        let p = SurfacePointSet::new(vec![[0.1, -0.3], [1e-300, 2.0]]).unwrap();
        let u = vec![Vec3::new(1.0 / 3.0, -2e-17, 0.0), Vec3::new(f64::MIN_POSITIVE, 7.0, -9.4095e-5)];
        let mut buf = Vec::new();
        write_csv(&mut buf, &p, &u).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(!text.contains('\r'));
        assert!(text.starts_with("y1,y2,u1,u2,u3\n"));
        assert!(text.lines().nth(1).unwrap().starts_with("1.0000000000000001e-1,"));
        let (q, v) = read_csv(&text).unwrap();
        assert_eq!(q, p);
        assert_eq!(v, u);
    }

    proptest! {
        #[test]
        fn round_trip(nu in 0.0..0.49f64, mu in 1e-3..1e3f64, z in prop::array::uniform3(-10.0..10.0f64),
                      eps in 1e-4..1.0f64, p in -1e3..1e3f64, nx in 1usize..50, ny in 1usize..50,
                      ext in 0.0..20.0f64, lame in any::<bool>(), sub in 0u32..7) {
            let moduli = if lame { ModuliSpec::Lame { lambda: nu * 3.0, mu } } else { ModuliSpec::Poisson { nu, mu } };
            let c = RunConfig {
                moduli,
                cavity: CavitySpec::Sphere { subdiv: sub },
                z: Vec3::new(z[0], z[1], -z[2].abs() - 0.1),
                epsilon: eps,
                pressure: p,
                points: PointSpec::Grid { nx, ny, extent: ext },
                output: Some("o.csv".into()),
            };
            let once = RunConfig::parse(&c.serialize()).unwrap();
            prop_assert_eq!(&once, &c);
            prop_assert_eq!(once.serialize(), c.serialize());
        }
    }
}
