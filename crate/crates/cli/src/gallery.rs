//! Example files for the commands, addressed by identifier.

use std::collections::BTreeMap;

use hopfharm_core::gallery::{clover, heart_setup, unit_disk, CloverEps, DISK_SIDES};
use hopfharm_core::harmonic::BoundaryMap;
use hopfharm_core::Point2;
use serde::Serialize;

use crate::error::CliError;
use crate::formats::{
    AlternateConfigFile, BoundaryFile, CircleMap, DomainFile, GalleryMap, InitialMap, Manifest, ManifestEntry, MapFile, QuadSpecFile,
    SCHEMA,
};
use crate::report::Session;

pub const DEFAULT_EXAMPLES: [&str; 8] = ["disk", "ellipse", "butterfly", "strip", "control", "clover:0.05", "heart", "log-modulus"];

/// Boundary samples per clover arc in extracted files.
pub const CLOVER_SAMPLES_PER_ARC: usize = 64;
pub const HEART_SAMPLES: usize = 128;

/// A manifest entry and the contents of its files.
pub struct Example {
    pub entry: ManifestEntry,
    pub files: Vec<(String, Vec<u8>)>,
}

struct Builder {
    entry: ManifestEntry,
    files: Vec<(String, Vec<u8>)>,
}

impl Builder {
    fn new(name: &str, id: &str, closed_form: Option<&str>) -> Self {
        let entry = ManifestEntry { name: name.into(), id: id.into(), closed_form: closed_form.map(Into::into), files: BTreeMap::new() };
        Self { entry, files: Vec::new() }
    }

    fn json(mut self, role: &str, file: &str, v: &impl Serialize) -> Self {
        let text = serde_json::to_string_pretty(v).expect("gallery files serialize") + "\n";
        self.entry.files.insert(role.into(), file.into());
        self.files.push((file.into(), text.into_bytes()));
        self
    }

    fn text(mut self, role: &str, file: &str, text: String) -> Self {
        self.entry.files.insert(role.into(), file.into());
        self.files.push((file.into(), text.into_bytes()));
        self
    }

    fn done(self) -> Example {
        Example { entry: self.entry, files: self.files }
    }
}

fn disk_file() -> DomainFile {
    DomainFile::from_domain(&unit_disk(DISK_SIDES))
}

/// Knots at the disk polygon vertices, parameterized by angle, so the data
/// lies exactly on the polygonal targets.
fn disk_boundary(f: impl Fn(Point2) -> Point2) -> Result<BoundaryFile, CliError> {
    let g = BoundaryMap::on_unit_circle(DISK_SIDES, |t| f(Point2::from_polar(1.0, t)))?;
    Ok(BoundaryFile::from_map(&g))
}

pub fn example(id: &str) -> Result<Example, CliError> {
    let unknown = || CliError::Config(format!("unknown gallery example {id:?}"));
    if let Some(eps) = id.strip_prefix("clover:") {
        let eps: f64 = eps.parse().map_err(|_| unknown())?;
        let data = clover(CloverEps::new(eps)?, CLOVER_SAMPLES_PER_ARC)?;
        let stem = format!("clover-{eps}");
        let mut b = Builder::new("clover", &format!("clover:{eps}"), Some(&format!("clover:{eps}")))
            .json("domain", &format!("{stem}.domain.json"), &DomainFile::from_domain(&data.x))
            .json("boundary", &format!("{stem}.boundary.json"), &BoundaryFile::from_map(&data.g));
        if let Some(y) = &data.y {
            b = b.json("target", &format!("{stem}.target.json"), &DomainFile::from_domain(y));
        }
        if let Some(cells) = data.cells() {
            let (h, v) = cells?;
            let cfg = AlternateConfigFile { target_edge: 0.05, max_iters: None, energy_tol: None, sup_tol: None, initial: InitialMap::Harmonic, corner_tol: None };
            b = b
                .json("cell1", &format!("{stem}.cell1.json"), &DomainFile::from_domain(h.domain()))
                .json("cell2", &format!("{stem}.cell2.json"), &DomainFile::from_domain(v.domain()))
                .text("config", &format!("{stem}.config"), cfg.to_text());
        }
        return Ok(b.done());
    }
    let ex = match id {
        "disk" => Builder::new("disk", id, Some("identity"))
            .json("domain", "disk.domain.json", &disk_file())
            .json("target", "disk.domain.json", &disk_file())
            .json("boundary", "disk.boundary.json", &disk_boundary(|z| z)?),
        "ellipse" => {
            let d = unit_disk(DISK_SIDES).map_trusted("ellipse", |z| Point2::new(z.re, 2.0 * z.im));
            Builder::new("ellipse", id, Some("ellipse"))
                .json("domain", "disk.domain.json", &disk_file())
                .json("target", "ellipse.target.json", &DomainFile::from_domain(&d))
                .json("boundary", "ellipse.boundary.json", &disk_boundary(|z| Point2::new(z.re, 2.0 * z.im))?)
        }
        "log-modulus" => Builder::new("log-modulus", id, Some("log-modulus"))
            .json("boundary", "log-modulus.boundary.json", &BoundaryFile::ClosedForm { closed_form: CircleMap::LogModulus }),
        "heart" => {
            let h = heart_setup(HEART_SAMPLES)?;
            let cfg = AlternateConfigFile { target_edge: 0.06, max_iters: Some(40), energy_tol: None, sup_tol: None, initial: InitialMap::Cone, corner_tol: None };
            Builder::new("heart", id, Some("heart"))
                .json("domain", "heart.domain.json", &DomainFile::from_domain(&h.x))
                .json("target", "heart.target.json", &DomainFile::from_domain(&h.y))
                .json("cell1", "heart.cell1.json", &DomainFile::from_domain(h.y1.domain()))
                .json("cell2", "heart.cell2.json", &DomainFile::from_domain(h.y2.domain()))
                .json("boundary", "heart.boundary.json", &BoundaryFile::from_map(&h.g))
                .text("config", "heart.config", cfg.to_text())
        }
        _ => {
            let map = GalleryMap::ALL.into_iter().find(|m| m.name() == id).ok_or_else(unknown)?;
            let spec = QuadSpecFile { domain: None, kind: Default::default(), polynomial: None, constant: None, map: Some(map), edge: None };
            Builder::new(map.name(), id, Some(map.name()))
                .json("domain", &format!("{id}.domain.json"), &DomainFile::from_domain(map.closed_form().domain()))
                .json("map", &format!("{id}.map.json"), &MapFile::ClosedForm { closed_form: map })
                .json("quaddiff", &format!("{id}.quaddiff.json"), &spec)
        }
    };
    Ok(ex.done())
}

pub fn manifest(examples: &[Example]) -> Manifest {
    Manifest { schema: SCHEMA.into(), examples: examples.iter().map(|e| e.entry.clone()).collect() }
}

fn resolve(ids: &[String]) -> Result<Vec<Example>, CliError> {
    if ids.is_empty() {
        DEFAULT_EXAMPLES.iter().map(|id| example(id)).collect()
    } else {
        ids.iter().map(|id| example(id)).collect()
    }
}

/// Lists the examples as a manifest. Metric: `examples`.
pub fn list(s: &mut Session, ids: &[String]) -> Result<Manifest, CliError> {
    s.flag("names", ids.join(","));
    let ex = resolve(ids)?;
    s.metric("examples", ex.len() as f64);
    Ok(manifest(&ex))
}

/// Writes the example files and `manifest.json`. Metrics: `examples`, `files`.
pub fn extract(s: &mut Session, ids: &[String]) -> Result<(), CliError> {
    s.flag("names", ids.join(","));
    let ex = resolve(ids)?;
    let mut written = BTreeMap::new();
    for e in &ex {
        for (name, bytes) in &e.files {
            written.insert(name.clone(), bytes.clone());
        }
    }
    s.metric("examples", ex.len() as f64);
    s.metric("files", written.len() as f64);
    for (name, bytes) in written {
        s.write(&name, bytes)?;
    }
    s.write_json("manifest.json", &manifest(&ex))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formats::AlternateConfigFile;

    #[test]
    fn every_default_example_builds_and_parses() {
        for id in DEFAULT_EXAMPLES {
            let ex = example(id).unwrap();
            assert!(!ex.entry.files.is_empty());
            for (name, bytes) in &ex.files {
                if name.ends_with(".config") {
                    AlternateConfigFile::parse(std::str::from_utf8(bytes).unwrap()).unwrap();
                } else {
                    serde_json::from_slice::<serde_json::Value>(bytes).unwrap();
                }
            }
        }
    }

    #[test]
    fn clover_at_zero_has_no_target_or_cells() {
        let ex = example("clover:0").unwrap();
        assert!(ex.entry.files.contains_key("domain"));
        assert!(!ex.entry.files.contains_key("target"));
        assert!(!ex.entry.files.contains_key("cell1"));
        assert!(example("clover:2").is_err());
        assert!(example("moon").is_err());
    }
}
