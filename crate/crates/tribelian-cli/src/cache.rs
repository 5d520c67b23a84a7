//! Cache directory layout and the build manifest.
//!
//! Every artifact is one text file (see `tribelian::walnut`); the manifest
//! records the file list with content digests plus the non-automaton build
//! products (class table, range set, coordinate ranges). A digest or version
//! mismatch invalidates the artifact and everything downstream, which in this
//! chain means a full rebuild.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use tribelian::pipeline::{
    Artifact, Artifacts, ClassRow, ClassTable, CoordinateRange, RangeSetA, SubsetOfA,
};
use tribelian::relations::Relation;
use tribelian::walnut;

pub const BUILDER_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const CONVENTION_NOTE: &str =
    "state counts exclude the rejecting sink; output DFAOs are counted complete, sink included";

#[derive(Serialize, Deserialize)]
pub struct Manifest {
    pub builder_version: String,
    pub convention: String,
    pub artifacts: BTreeMap<String, ManifestEntry>,
    /// Build order, for displays that should follow the pipeline.
    pub order: Vec<String>,
    pub class_table: Vec<ClassEntry>,
    pub range_set: Vec<[i64; 3]>,
    pub ranges: Vec<RangeEntry>,
}

#[derive(Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub kind: String, // "relation" | "dfao"
    pub vars: Vec<String>,
    pub sha256: String,
}

#[derive(Serialize, Deserialize)]
pub struct ClassEntry {
    pub min_index: u64,
    pub mask: u16,
    pub cardinality: u32,
}

#[derive(Serialize, Deserialize)]
pub struct RangeEntry {
    pub positive: u64,
    pub negative: u64,
}

pub fn default_dir() -> PathBuf {
    std::env::var_os("TRIB_CACHE_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("cache"))
}

pub fn manifest_path(dir: &Path) -> PathBuf {
    dir.join("manifest.json")
}

fn digest(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hex(&hasher.finalize())
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// The first artifact (or the manifest itself) that is missing or corrupt;
/// `None` means the cache is fresh.
pub fn stale_artifact(dir: &Path) -> Option<String> {
    let manifest = match load_manifest(dir) {
        Ok(m) => m,
        Err(_) => return Some("manifest.json".to_string()),
    };
    if manifest.builder_version != BUILDER_VERSION {
        return Some("manifest.json (builder version)".to_string());
    }
    for (name, entry) in &manifest.artifacts {
        let path = dir.join(&entry.file);
        match fs::read(&path) {
            Ok(bytes) if digest(&bytes) == entry.sha256 => {}
            _ => return Some(name.clone()),
        }
    }
    None
}

pub fn load_manifest(dir: &Path) -> Result<Manifest> {
    let path = manifest_path(dir);
    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    Ok(serde_json::from_str(&text)?)
}

/// Serializes all artifacts and the manifest into `dir`.
pub fn store(dir: &Path, artifacts: &Artifacts) -> Result<Manifest> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut entries = BTreeMap::new();
    let mut order = Vec::new();
    for (name, artifact) in artifacts.entries() {
        let file = format!("{name}.txt");
        let (kind, vars, text) = match artifact {
            Artifact::Relation(rel) => (
                "relation",
                rel.vars().to_vec(),
                walnut::serialize_automaton(rel.automaton()),
            ),
            Artifact::Word(dfao) => ("dfao", vec!["n".to_string()], walnut::serialize_dfao(dfao)),
        };
        let path = dir.join(&file);
        fs::write(&path, &text).with_context(|| format!("writing {}", path.display()))?;
        entries.insert(
            name.to_string(),
            ManifestEntry {
                file,
                kind: kind.to_string(),
                vars,
                sha256: digest(text.as_bytes()),
            },
        );
        order.push(name.to_string());
    }
    let manifest = Manifest {
        builder_version: BUILDER_VERSION.to_string(),
        convention: CONVENTION_NOTE.to_string(),
        artifacts: entries,
        order,
        class_table: artifacts
            .class_table
            .rows
            .iter()
            .map(|r| ClassEntry {
                min_index: r.min_index,
                mask: r.subset.0,
                cardinality: r.cardinality,
            })
            .collect(),
        range_set: artifacts
            .range_set
            .vectors()
            .iter()
            .map(|v| [v.0, v.1, v.2])
            .collect(),
        ranges: artifacts
            .ranges
            .iter()
            .map(|r| RangeEntry {
                positive: r.positive,
                negative: r.negative,
            })
            .collect(),
    };
    let json = serde_json::to_string_pretty(&manifest)?;
    fs::write(manifest_path(dir), json)?;
    Ok(manifest)
}

/// Reads the whole cache back into memory.
pub fn load(dir: &Path) -> Result<Artifacts> {
    let manifest = load_manifest(dir)?;
    if let Some(stale) = stale_artifact(dir) {
        bail!(
            "cache at {} is stale ({stale}); run `tribelian build`",
            dir.display()
        );
    }
    let mut entries = Vec::new();
    for name in &manifest.order {
        let entry = manifest
            .artifacts
            .get(name)
            .with_context(|| format!("artifact {name} listed in order but missing"))?;
        let text = fs::read_to_string(dir.join(&entry.file))?;
        let file = walnut::parse(&text)?;
        let artifact = match entry.kind.as_str() {
            "relation" => {
                let vars: Vec<&str> = entry.vars.iter().map(|s| s.as_str()).collect();
                Artifact::Relation(Relation::lift(file.to_automaton()?, &vars)?)
            }
            "dfao" => Artifact::Word(file.to_dfao()?),
            other => bail!("unknown artifact kind `{other}`"),
        };
        entries.push((name.clone(), artifact));
    }
    let range_vectors: std::collections::BTreeSet<tribelian::oracle::RelativeVector> = manifest
        .range_set
        .iter()
        .map(|v| tribelian::oracle::RelativeVector(v[0], v[1], v[2]))
        .collect();
    let range_set = RangeSetA::from_vectors(&range_vectors)
        .map_err(|e| anyhow::anyhow!("manifest range set: {e}"))?;
    let rows = manifest
        .class_table
        .iter()
        .map(|c| ClassRow {
            min_index: c.min_index,
            subset: SubsetOfA(c.mask),
            cardinality: c.cardinality,
        })
        .collect();
    if manifest.ranges.len() != 3 {
        bail!("manifest has {} coordinate ranges", manifest.ranges.len());
    }
    let ranges: Vec<CoordinateRange> = manifest
        .ranges
        .iter()
        .map(|r| CoordinateRange {
            positive: r.positive,
            negative: r.negative,
        })
        .collect();
    Ok(Artifacts::from_parts(
        entries,
        range_set,
        [ranges[0], ranges[1], ranges[2]],
        ClassTable { rows },
    ))
}
