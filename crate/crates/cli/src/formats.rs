//! JSON and key = value file formats.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::str::FromStr;
use std::sync::Arc;

use hopfharm_core::gallery::{unit_disk, ClosedFormMap, DISK_SIDES};
use hopfharm_core::geometry::{ConvexCell, GeometryError, JordanDomain};
use hopfharm_core::harmonic::{log_modulus_map, BoundaryMap, BoundaryMapError};
use hopfharm_core::mesh::{MeshError, MeshMap, TriangleMesh};
use hopfharm_core::quaddiff::{QuadDifferential, TrajectoryKind};
use hopfharm_core::Point2;
use serde::{Deserialize, Serialize};

pub const SCHEMA: &str = "hopfharm/1";

/// Knots used when a closed-form circle map feeds a mesh solve.
pub const CIRCLE_KNOTS: usize = 1024;

pub type Pair = [f64; 2];

fn pt(p: Pair) -> Point2 {
    Point2::new(p[0], p[1])
}

fn pair(p: Point2) -> Pair {
    [p.re, p.im]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainFile {
    pub name: String,
    pub boundary: Vec<Pair>,
}

#[derive(Debug, Clone)]
pub struct LoadedDomain {
    pub domain: JordanDomain,
    /// The file listed the boundary clockwise.
    pub reoriented: bool,
}

impl DomainFile {
    pub fn from_domain(d: &JordanDomain) -> Self {
        Self { name: d.name().to_string(), boundary: d.boundary().iter().copied().map(pair).collect() }
    }

    pub fn load(&self) -> Result<LoadedDomain, GeometryError> {
        let pts = self.boundary.iter().copied().map(pt).collect();
        let (domain, reoriented) = JordanDomain::reorienting(self.name.clone(), pts)?;
        Ok(LoadedDomain { domain, reoriented })
    }

    pub fn load_cell(&self) -> Result<ConvexCell, GeometryError> {
        ConvexCell::try_from(self.load()?.domain)
    }
}

/// Closed-form boundary maps of the unit circle, by angle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CircleMap {
    Identity,
    /// `x + 2iy` restricted to the circle.
    Ellipse,
    LogModulus,
}

impl CircleMap {
    pub fn eval(self, t: f64) -> Point2 {
        match self {
            Self::Identity => Point2::from_polar(1.0, t),
            Self::Ellipse => Point2::new(t.cos(), 2.0 * t.sin()),
            Self::LogModulus => log_modulus_map(t),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Identity => "identity",
            Self::Ellipse => "ellipse",
            Self::LogModulus => "log-modulus",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BoundaryFile {
    /// Knots `[s, x, y]`. The period defaults to `2 pi`.
    Samples {
        samples: Vec<[f64; 3]>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        period: Option<f64>,
    },
    ClosedForm { closed_form: CircleMap },
}

/// A boundary file resolved into something the solvers can use.
#[derive(Debug, Clone)]
pub enum BoundarySource {
    Knots(BoundaryMap),
    Circle(CircleMap),
}

impl BoundarySource {
    /// Knot form; closed forms are sampled at [`CIRCLE_KNOTS`] angles.
    pub fn to_map(&self) -> Result<BoundaryMap, BoundaryMapError> {
        match self {
            Self::Knots(g) => Ok(g.clone()),
            Self::Circle(c) => BoundaryMap::on_unit_circle(CIRCLE_KNOTS, |t| c.eval(t)),
        }
    }

    /// The map as a function of the angle on the unit circle.
    pub fn circle_fn(&self) -> Box<dyn Fn(f64) -> Point2 + '_> {
        match self {
            Self::Knots(g) => {
                let k = g.period() / (2.0 * PI);
                Box::new(move |t| g.eval(t * k))
            }
            Self::Circle(c) => {
                let c = *c;
                Box::new(move |t| c.eval(t))
            }
        }
    }
}

impl BoundaryFile {
    pub fn from_map(g: &BoundaryMap) -> Self {
        let samples = g.knots().iter().map(|&(s, w)| [s, w.re, w.im]).collect();
        Self::Samples { samples, period: Some(g.period()) }
    }

    pub fn load(&self) -> Result<BoundarySource, BoundaryMapError> {
        match self {
            Self::Samples { samples, period } => {
                let knots = samples.iter().map(|k| (k[0], Point2::new(k[1], k[2]))).collect();
                Ok(BoundarySource::Knots(BoundaryMap::new(knots, period.unwrap_or(2.0 * PI))?))
            }
            Self::ClosedForm { closed_form } => Ok(BoundarySource::Circle(*closed_form)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshFile {
    pub vertices: Vec<Pair>,
    pub triangles: Vec<[usize; 3]>,
    pub boundary_loop: Vec<usize>,
}

impl MeshFile {
    pub fn from_mesh(m: &TriangleMesh) -> Self {
        Self {
            vertices: m.vertices().iter().copied().map(pair).collect(),
            triangles: m.triangles().to_vec(),
            boundary_loop: m.boundary_loop().to_vec(),
        }
    }

    pub fn load(&self) -> Result<TriangleMesh, MeshError> {
        TriangleMesh::new(self.vertices.iter().copied().map(pt).collect(), self.triangles.clone(), self.boundary_loop.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshMapFile {
    #[serde(flatten)]
    pub mesh: MeshFile,
    pub values: Vec<Pair>,
}

impl MeshMapFile {
    pub fn from_map(m: &MeshMap) -> Self {
        Self { mesh: MeshFile::from_mesh(m.mesh()), values: m.values().iter().copied().map(pair).collect() }
    }

    pub fn load(&self) -> Result<MeshMap, MeshError> {
        let mesh = Arc::new(self.mesh.load()?);
        MeshMap::new(mesh, self.values.iter().copied().map(pt).collect())
    }
}

/// Closed-form maps of the gallery.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GalleryMap {
    Butterfly,
    Strip,
    Control,
}

impl GalleryMap {
    pub const ALL: [Self; 3] = [Self::Butterfly, Self::Strip, Self::Control];

    pub fn closed_form(self) -> ClosedFormMap {
        match self {
            Self::Butterfly => ClosedFormMap::butterfly(),
            Self::Strip => ClosedFormMap::strip(),
            Self::Control => ClosedFormMap::control(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Butterfly => "butterfly",
            Self::Strip => "strip",
            Self::Control => "control",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MapFile {
    ClosedForm { closed_form: GalleryMap },
    Mesh(MeshMapFile),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DomainRef {
    Inline(DomainFile),
    /// `disk` or a [`GalleryMap`] name.
    Named(String),
}

impl DomainRef {
    pub fn load(&self) -> Result<JordanDomain, String> {
        match self {
            Self::Inline(d) => d.load().map(|l| l.domain).map_err(|e| e.to_string()),
            Self::Named(n) if n == "disk" => Ok(unit_disk(DISK_SIDES)),
            Self::Named(n) => GalleryMap::ALL
                .iter()
                .find(|m| m.name() == n)
                .map(|m| m.closed_form().domain().clone())
                .ok_or_else(|| format!("unknown domain name {n:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum KindName {
    #[default]
    Vertical,
    Horizontal,
}

impl From<KindName> for TrajectoryKind {
    fn from(k: KindName) -> Self {
        match k {
            KindName::Vertical => TrajectoryKind::Vertical,
            KindName::Horizontal => TrajectoryKind::Horizontal,
        }
    }
}

/// A quadratic differential: exactly one of `polynomial`, `constant` or `map`.
/// A `map` is sampled from the closed-form Hopf product on a mesh of edge `edge`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadSpecFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<DomainRef>,
    #[serde(default)]
    pub kind: KindName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polynomial: Option<Vec<Pair>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constant: Option<Pair>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<GalleryMap>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge: Option<f64>,
}

pub const DEFAULT_SAMPLED_EDGE: f64 = 0.05;

pub enum QuadSpec {
    Exact(QuadDifferential),
    Sampled { map: GalleryMap, edge: f64 },
}

impl QuadSpecFile {
    pub fn resolve(&self) -> Result<(QuadSpec, Option<JordanDomain>), String> {
        let domain = self.domain.as_ref().map(DomainRef::load).transpose()?;
        let forms = usize::from(self.polynomial.is_some()) + usize::from(self.constant.is_some()) + usize::from(self.map.is_some());
        if forms != 1 {
            return Err("give exactly one of polynomial, constant, map".into());
        }
        if let Some(map) = self.map {
            return Ok((QuadSpec::Sampled { map, edge: self.edge.unwrap_or(DEFAULT_SAMPLED_EDGE) }, domain));
        }
        let d = domain.clone().ok_or("polynomial and constant forms need a domain")?;
        let q = match (&self.polynomial, self.constant) {
            (Some(c), _) => QuadDifferential::polynomial(c.iter().copied().map(pt).collect(), d),
            (None, Some(c)) => QuadDifferential::constant(pt(c), d),
            _ => unreachable!(),
        };
        q.map(|q| (QuadSpec::Exact(q), domain)).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitialMap {
    #[default]
    Harmonic,
    /// Radial extension; needs source and target star-shaped about 0.
    Cone,
}

impl FromStr for InitialMap {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "harmonic" => Ok(Self::Harmonic),
            "cone" => Ok(Self::Cone),
            _ => Err(format!("initial must be harmonic or cone, got {s:?}")),
        }
    }
}

/// `key = value` settings for `alternate`. `#` starts a comment.
#[derive(Debug, Clone, PartialEq)]
pub struct AlternateConfigFile {
    pub target_edge: f64,
    pub max_iters: Option<usize>,
    pub energy_tol: Option<f64>,
    pub sup_tol: Option<f64>,
    pub initial: InitialMap,
    /// Squeezing radius around reflex corners, relative to the target diameter.
    pub corner_tol: Option<f64>,
}

/// Default relative squeezing radius.
pub const DEFAULT_CORNER_TOL: f64 = 1e-2;

impl AlternateConfigFile {
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut kv = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| format!("line {}: expected key = value", n + 1))?;
            if kv.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
                return Err(format!("line {}: duplicate key {}", n + 1, k.trim()));
            }
        }
        fn num<T: FromStr>(kv: &mut BTreeMap<String, String>, k: &str) -> Result<Option<T>, String> {
            kv.remove(k).map(|v| v.parse::<T>().map_err(|_| format!("{k}: cannot parse {v:?}"))).transpose()
        }
        let target_edge = num(&mut kv, "target_edge")?.ok_or("target_edge is required")?;
        let cfg = Self {
            target_edge,
            max_iters: num(&mut kv, "max_iters")?,
            energy_tol: num(&mut kv, "energy_tol")?,
            sup_tol: num(&mut kv, "sup_tol")?,
            initial: num(&mut kv, "initial")?.unwrap_or_default(),
            corner_tol: num(&mut kv, "corner_tol")?,
        };
        match kv.keys().next() {
            Some(k) => Err(format!("unknown key {k}")),
            None => Ok(cfg),
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("target_edge = {}\n", self.target_edge);
        if let Some(v) = self.max_iters {
            s += &format!("max_iters = {v}\n");
        }
        if let Some(v) = self.energy_tol {
            s += &format!("energy_tol = {v:e}\n");
        }
        if let Some(v) = self.sup_tol {
            s += &format!("sup_tol = {v:e}\n");
        }
        s += match self.initial {
            InitialMap::Harmonic => "initial = harmonic\n",
            InitialMap::Cone => "initial = cone\n",
        };
        if let Some(v) = self.corner_tol {
            s += &format!("corner_tol = {v:e}\n");
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    /// Identifier the commands accept, e.g. `clover:0.05`.
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closed_form: Option<String>,
    /// Role (`domain`, `target`, `boundary`, ...) to file name.
    pub files: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema: String,
    pub examples: Vec<ManifestEntry>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trip_and_errors() {
        let cfg = AlternateConfigFile::parse("# heart\ntarget_edge = 0.1\nmax_iters=7 \ninitial = cone\nsup_tol = 1e-9\n").unwrap();
        assert_eq!(cfg.max_iters, Some(7));
        assert_eq!(cfg.initial, InitialMap::Cone);
        assert_eq!(AlternateConfigFile::parse(&cfg.to_text()).unwrap(), cfg);
        assert!(AlternateConfigFile::parse("max_iters = 3").is_err());
        assert!(AlternateConfigFile::parse("target_edge = 0.1\nfoo = 1").is_err());
        assert!(AlternateConfigFile::parse("target_edge = 0.1\ntarget_edge = 0.2").is_err());
        assert!(AlternateConfigFile::parse("target_edge = x").is_err());
        assert!(AlternateConfigFile::parse("target_edge = 0.1\ninitial = radial").is_err());
    }

    #[test]
    fn clockwise_domain_is_reoriented() {
        let f: DomainFile = serde_json::from_str(r#"{"name":"sq","boundary":[[0,0],[0,1],[1,1],[1,0]]}"#).unwrap();
        let l = f.load().unwrap();
        assert!(l.reoriented);
        assert!(l.domain.signed_area() > 0.0);
        assert!(serde_json::from_str::<DomainFile>(r#"{"name":"sq","boundary":[],"extra":1}"#).is_err());
    }

    #[test]
    fn boundary_file_forms() {
        let b: BoundaryFile = serde_json::from_str(r#"{"samples":[[0,1,0],[1,0,1],[2,-1,0],[3,0,-1]],"period":4}"#).unwrap();
        let BoundarySource::Knots(g) = b.load().unwrap() else { panic!() };
        assert_eq!(g.period(), 4.0);
        let b: BoundaryFile = serde_json::from_str(r#"{"samples":[[0,1,0],[2,0,1],[4,-1,0]]}"#).unwrap();
        let BoundarySource::Knots(g) = b.load().unwrap() else { panic!() };
        assert_eq!(g.period(), 2.0 * PI);
        let b: BoundaryFile = serde_json::from_str(r#"{"closed_form":"log-modulus"}"#).unwrap();
        assert!(matches!(b.load().unwrap(), BoundarySource::Circle(CircleMap::LogModulus)));
        let again: BoundaryFile = serde_json::from_str(&serde_json::to_string(&BoundaryFile::from_map(&g)).unwrap()).unwrap();
        assert_eq!(again, BoundaryFile::from_map(&g));
    }

    #[test]
    fn mesh_map_file_round_trip() {
        let d = unit_disk(32);
        let mesh = Arc::new(hopfharm_core::mesh::triangulate(&d, 0.3).unwrap());
        let m = MeshMap::from_fn(mesh, |z| z * z).unwrap();
        let f = MeshMapFile::from_map(&m);
        let text = serde_json::to_string(&f).unwrap();
        let back: MapFile = serde_json::from_str(&text).unwrap();
        let MapFile::Mesh(back) = back else { panic!() };
        let m2 = back.load().unwrap();
        assert_eq!(m2.values(), m.values());
        assert_eq!(m2.mesh().triangles(), m.mesh().triangles());
        let cf: MapFile = serde_json::from_str(r#"{"closed_form":"strip"}"#).unwrap();
        assert_eq!(cf, MapFile::ClosedForm { closed_form: GalleryMap::Strip });
    }

    #[test]
    fn quad_spec_requires_one_form() {
        let s: QuadSpecFile = serde_json::from_str(r#"{"domain":"disk","polynomial":[[-1,0],[-2.25,0]]}"#).unwrap();
        assert!(matches!(s.resolve().unwrap().0, QuadSpec::Exact(_)));
        let s: QuadSpecFile = serde_json::from_str(r#"{"map":"butterfly","kind":"horizontal"}"#).unwrap();
        assert_eq!(s.kind, KindName::Horizontal);
        assert!(matches!(s.resolve().unwrap().0, QuadSpec::Sampled { edge, .. } if edge == DEFAULT_SAMPLED_EDGE));
        let s: QuadSpecFile = serde_json::from_str(r#"{"domain":"disk","constant":[1,0],"map":"strip"}"#).unwrap();
        assert!(s.resolve().is_err());
        let s: QuadSpecFile = serde_json::from_str(r#"{"constant":[1,0]}"#).unwrap();
        assert!(s.resolve().is_err());
        let s: QuadSpecFile = serde_json::from_str(r#"{"domain":"moon","constant":[1,0]}"#).unwrap();
        assert!(s.resolve().is_err());
    }
}
