//! On-disk dataset layout.
//!
//! ```text
//! manifest.json          node/edge type tables, target, classes, checksums
//! edges_<name>.tsv       src<TAB>dst[<TAB>weight], ids local to each type
//! features_<type>.bin    "HGF1", u32 rows, u32 cols (LE), f32 LE row-major
//! features_<type>.csv    accepted instead of .bin when reading
//! labels.tsv             node<TAB>class
//! splits.tsv             node<TAB>{train|val|test}
//! ```

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::validate::{valid_edge_type_name, valid_node_type_name};
use super::{
    validate, EdgeType, FeatureMatrix, FindingKind, HeteroGraph, Labels, NodeType, NodeTypeId,
    Pool, Severity, SparseAdjacency, Split, ValidationReport,
};
use crate::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";
const LABELS_FILE: &str = "labels.tsv";
const SPLITS_FILE: &str = "splits.tsv";
const FORMAT: &str = "hgc-dataset/1";
const FEATURE_MAGIC: &[u8; 4] = b"HGF1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeTypeEntry {
    pub name: String,
    pub count: usize,
    pub feature_dim: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeTypeEntry {
    pub name: String,
    pub src: String,
    pub dst: String,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassProvenance {
    pub class: usize,
    pub pool_size: usize,
    pub budget: usize,
    /// Distance between the class mean and the mean of the selected nodes.
    pub mean_distance: Option<f64>,
}

/// How a condensed dataset was produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub method: String,
    pub ratio: f64,
    pub seed: Option<u64>,
    pub metapaths: Vec<String>,
    pub fusion: String,
    pub use_raw_features: bool,
    pub pool: Pool,
    pub neighbor_policy: String,
    pub tool_version: String,
    #[serde(default)]
    pub source_fingerprint: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class_ratios: Option<Vec<f64>>,
    #[serde(default)]
    pub classes: Vec<ClassProvenance>,
    #[serde(default)]
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    #[serde(default = "default_format")]
    pub format: String,
    pub node_types: Vec<NodeTypeEntry>,
    pub edge_types: Vec<EdgeTypeEntry>,
    pub target: String,
    pub num_classes: usize,
    /// SHA-256 of each data file, keyed by file name. Entries that are
    /// present are verified on load.
    #[serde(default)]
    pub checksums: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

fn default_format() -> String {
    FORMAT.to_string()
}

fn edge_file(name: &str) -> String {
    format!("edges_{name}.tsv")
}

fn feature_file(name: &str, ext: &str) -> String {
    format!("features_{name}.{ext}")
}

pub(crate) fn encode_edges(adj: &SparseAdjacency) -> Vec<u8> {
    let mut out = String::with_capacity(adj.nnz() * 12);
    for (r, c, v) in adj.iter() {
        if v == 1.0 {
            out.push_str(&format!("{r}\t{c}\n"));
        } else {
            out.push_str(&format!("{r}\t{c}\t{v}\n"));
        }
    }
    out.into_bytes()
}

/// Binary `HGF1` encoding of a feature matrix.
pub fn encode_features(fm: &FeatureMatrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(12 + 4 * fm.data().len());
    out.extend_from_slice(FEATURE_MAGIC);
    out.extend_from_slice(&(fm.rows() as u32).to_le_bytes());
    out.extend_from_slice(&(fm.cols() as u32).to_le_bytes());
    for x in fm.data() {
        out.extend_from_slice(&x.to_le_bytes());
    }
    out
}

pub(crate) fn encode_labels(labels: &Labels) -> Vec<u8> {
    let mut out = String::new();
    for (v, c) in labels.class_of.iter().enumerate() {
        if let Some(c) = c {
            out.push_str(&format!("{v}\t{c}\n"));
        }
    }
    out.into_bytes()
}

pub(crate) fn encode_splits(labels: &Labels) -> Vec<u8> {
    let mut out = String::new();
    for (v, s) in labels.split_of.iter().enumerate() {
        if let Some(s) = s {
            out.push_str(&format!("{v}\t{}\n", s.as_str()));
        }
    }
    out.into_bytes()
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    let path = dir.join(MANIFEST_FILE);
    let bytes = read_file(&path)?;
    serde_json::from_slice(&bytes).map_err(|e| Error::Parse {
        file: path,
        line: e.line(),
        msg: e.to_string(),
    })
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            Error::MissingFile(path.to_path_buf())
        } else {
            Error::io(path, e)
        }
    })
}

/// Read a data file and check it against the manifest checksum, if any.
fn read_checked(dir: &Path, name: &str, manifest: &Manifest) -> Result<Vec<u8>> {
    let path = dir.join(name);
    let bytes = read_file(&path)?;
    if let Some(expected) = manifest.checksums.get(name) {
        let actual = sha256_hex(&bytes);
        if !expected.eq_ignore_ascii_case(&actual) {
            return Err(Error::Checksum {
                file: path,
                expected: expected.clone(),
                actual,
            });
        }
    }
    Ok(bytes)
}

fn utf8(path: &Path, bytes: Vec<u8>) -> Result<String> {
    String::from_utf8(bytes).map_err(|e| Error::Parse {
        file: path.to_path_buf(),
        line: 0,
        msg: format!("not UTF-8: {e}"),
    })
}

/// Non-empty lines with their 1-based line numbers.
fn records(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty())
}

fn parse_field<T: std::str::FromStr>(file: &Path, line: usize, field: Option<&str>, what: &str) -> Result<T> {
    let raw = field.ok_or_else(|| Error::Parse {
        file: file.to_path_buf(),
        line,
        msg: format!("missing {what}"),
    })?;
    raw.trim().parse().map_err(|_| Error::Parse {
        file: file.to_path_buf(),
        line,
        msg: format!("bad {what} `{raw}`"),
    })
}

/// Load and fully validate a dataset directory.
pub fn load_dataset(dir: impl AsRef<Path>) -> Result<HeteroGraph> {
    let (g, _, report) = load_dataset_with_report(dir)?;
    for w in report.warnings() {
        log::warn!("{w}");
    }
    Ok(g)
}

/// Like [`load_dataset`], also returning the manifest and the non-fatal
/// findings (merged duplicate edges, split entries on unlabeled nodes).
pub fn load_dataset_with_report(
    dir: impl AsRef<Path>,
) -> Result<(HeteroGraph, Manifest, ValidationReport)> {
    let dir = dir.as_ref();
    let manifest = read_manifest(dir)?;
    let mut report = ValidationReport::default();

    let mut type_ids = HashMap::new();
    let mut node_types = Vec::with_capacity(manifest.node_types.len());
    for (i, t) in manifest.node_types.iter().enumerate() {
        if !valid_node_type_name(&t.name) {
            return Err(Error::Manifest(format!("invalid node type name `{}`", t.name)));
        }
        if type_ids.insert(t.name.clone(), NodeTypeId(i as u32)).is_some() {
            return Err(Error::Manifest(format!("node type `{}` declared twice", t.name)));
        }
        node_types.push(NodeType {
            name: t.name.clone(),
            count: t.count,
        });
    }
    let lookup = |name: &str, what: &str| {
        type_ids
            .get(name)
            .copied()
            .ok_or_else(|| Error::Manifest(format!("{what} references undeclared node type `{name}`")))
    };
    let target = lookup(&manifest.target, "target")?;

    let mut edge_types = Vec::with_capacity(manifest.edge_types.len());
    let mut adjacency = Vec::with_capacity(manifest.edge_types.len());
    for e in &manifest.edge_types {
        if !valid_edge_type_name(&e.name) {
            return Err(Error::Manifest(format!("invalid edge type name `{}`", e.name)));
        }
        if edge_types.iter().any(|x: &EdgeType| x.name == e.name) {
            return Err(Error::Manifest(format!("edge type `{}` declared twice", e.name)));
        }
        let what = format!("edge type `{}`", e.name);
        let (src, dst) = (lookup(&e.src, &what)?, lookup(&e.dst, &what)?);
        let name = edge_file(&e.name);
        let path = dir.join(&name);
        let text = utf8(&path, read_checked(dir, &name, &manifest)?)?;
        let (rows, cols) = (node_types[src.index()].count, node_types[dst.index()].count);
        let mut triplets = Vec::with_capacity(e.count);
        for (line, rec) in records(&text) {
            let mut fields = rec.split('\t');
            let s: u64 = parse_field(&path, line, fields.next(), "source id")?;
            let d: u64 = parse_field(&path, line, fields.next(), "destination id")?;
            let w: f64 = match fields.next() {
                Some(f) => parse_field(&path, line, Some(f), "weight")?,
                None => 1.0,
            };
            for (id, ty, count) in [(s, src, rows), (d, dst, cols)] {
                if id >= count as u64 {
                    return Err(Error::DanglingEdge {
                        file: path.clone(),
                        line,
                        id,
                        node_type: node_types[ty.index()].name.clone(),
                        count,
                    });
                }
            }
            if !w.is_finite() {
                return Err(Error::NonFiniteInput {
                    file: path.clone(),
                    row: line,
                    col: 2,
                });
            }
            triplets.push((s as u32, d as u32, w));
        }
        if triplets.len() != e.count {
            return Err(Error::Shape {
                file: path,
                msg: format!("manifest declares {} edges, file has {}", e.count, triplets.len()),
            });
        }
        let (adj, merged) = SparseAdjacency::from_triplets(rows, cols, triplets);
        if merged > 0 {
            report.push(
                Severity::Warning,
                FindingKind::DuplicateEdge,
                format!("edge type `{}`", e.name),
                format!("{merged} duplicate edges merged by summing weights"),
            );
        }
        edge_types.push(EdgeType {
            name: e.name.clone(),
            src,
            dst,
        });
        adjacency.push(adj);
    }

    let mut features = Vec::with_capacity(node_types.len());
    for t in &manifest.node_types {
        features.push(match t.feature_dim {
            Some(dim) => Some(load_features(dir, &manifest, &t.name, t.count, dim)?),
            None => None,
        });
    }

    let labels = load_labels(dir, &manifest, node_types[target.index()].count)?;

    let g = HeteroGraph {
        node_types,
        edge_types,
        adjacency,
        features,
        labels,
        target,
    };
    let structural = validate(&g);
    if !structural.is_valid() {
        return Err(Error::Invalid(structural));
    }
    report.findings.extend(structural.findings);
    Ok((g, manifest, report))
}

fn load_features(
    dir: &Path,
    manifest: &Manifest,
    type_name: &str,
    count: usize,
    dim: usize,
) -> Result<FeatureMatrix> {
    let bin = feature_file(type_name, "bin");
    let csv = feature_file(type_name, "csv");
    let (path, fm) = if dir.join(&bin).exists() || !dir.join(&csv).exists() {
        let path = dir.join(&bin);
        let bytes = read_checked(dir, &bin, manifest)?;
        let fm = decode_features(&path, &bytes)?;
        (path, fm)
    } else {
        let path = dir.join(&csv);
        let text = utf8(&path, read_checked(dir, &csv, manifest)?)?;
        let fm = decode_features_csv(&path, &text)?;
        (path, fm)
    };
    // an empty csv carries no width
    let fm = if count == 0 && fm.rows() == 0 {
        FeatureMatrix::zeros(0, dim)
    } else {
        fm
    };
    if fm.rows() != count || fm.cols() != dim {
        return Err(Error::Shape {
            file: path,
            msg: format!(
                "features are {}x{}, manifest declares {count}x{dim}",
                fm.rows(),
                fm.cols()
            ),
        });
    }
    if let Some((row, col)) = fm.first_non_finite() {
        return Err(Error::NonFiniteInput { file: path, row, col });
    }
    Ok(fm)
}

fn decode_features(path: &Path, bytes: &[u8]) -> Result<FeatureMatrix> {
    if bytes.len() < 12 || &bytes[..4] != FEATURE_MAGIC {
        return Err(Error::Parse {
            file: path.to_path_buf(),
            line: 0,
            msg: "missing HGF1 header".into(),
        });
    }
    let rows = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let cols = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let body = &bytes[12..];
    if body.len() != rows * cols * 4 {
        return Err(Error::Shape {
            file: path.to_path_buf(),
            msg: format!("header says {rows}x{cols} but body has {} bytes", body.len()),
        });
    }
    let data = body
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
        .collect();
    Ok(FeatureMatrix::new(rows, cols, data))
}

fn decode_features_csv(path: &Path, text: &str) -> Result<FeatureMatrix> {
    let mut data = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (line, rec) in records(text) {
        let before = data.len();
        for field in rec.split(',') {
            data.push(parse_field::<f32>(path, line, Some(field), "feature value")?);
        }
        let width = data.len() - before;
        match cols {
            None => cols = Some(width),
            Some(c) if c != width => {
                return Err(Error::Shape {
                    file: path.to_path_buf(),
                    msg: format!("line {line} has {width} values, expected {c}"),
                })
            }
            _ => {}
        }
        rows += 1;
    }
    Ok(FeatureMatrix::new(rows, cols.unwrap_or(0), data))
}

fn load_labels(dir: &Path, manifest: &Manifest, count: usize) -> Result<Labels> {
    let mut labels = Labels::unlabeled(count, manifest.num_classes);

    let path = dir.join(LABELS_FILE);
    let text = utf8(&path, read_checked(dir, LABELS_FILE, manifest)?)?;
    for (line, rec) in records(&text) {
        let mut fields = rec.split('\t');
        let v: usize = parse_field(&path, line, fields.next(), "node id")?;
        let c: u32 = parse_field(&path, line, fields.next(), "class id")?;
        let fail = |msg: String| Error::Parse {
            file: path.clone(),
            line,
            msg,
        };
        if v >= count {
            return Err(fail(format!("node {v} out of range ({count} target nodes)")));
        }
        if c as usize >= manifest.num_classes {
            return Err(fail(format!("class {c} out of range ({} classes)", manifest.num_classes)));
        }
        if labels.class_of[v].replace(c).is_some() {
            return Err(fail(format!("node {v} labeled twice")));
        }
    }

    let path = dir.join(SPLITS_FILE);
    let text = utf8(&path, read_checked(dir, SPLITS_FILE, manifest)?)?;
    for (line, rec) in records(&text) {
        let mut fields = rec.split('\t');
        let v: usize = parse_field(&path, line, fields.next(), "node id")?;
        let s: Split = parse_field(&path, line, fields.next(), "split")?;
        let fail = |msg: String| Error::Parse {
            file: path.clone(),
            line,
            msg,
        };
        if v >= count {
            return Err(fail(format!("node {v} out of range ({count} target nodes)")));
        }
        if labels.split_of[v].replace(s).is_some() {
            return Err(fail(format!("node {v} assigned to more than one split")));
        }
    }
    Ok(labels)
}

fn dir_is_nonempty(dir: &Path) -> Result<bool> {
    match fs::read_dir(dir) {
        Ok(mut it) => Ok(it.next().is_some()),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(false),
        Err(e) => Err(Error::io(dir, e)),
    }
}

/// Write `g` in the dataset layout. Files are staged in a sibling temporary
/// directory and moved into place with a rename, so `dir` never holds a
/// partial dataset. A non-empty `dir` is only replaced when `overwrite` is
/// set.
pub fn save_dataset(
    g: &HeteroGraph,
    dir: impl AsRef<Path>,
    provenance: Option<&Provenance>,
    overwrite: bool,
) -> Result<Manifest> {
    let dir = dir.as_ref();
    let report = validate(g);
    if !report.is_valid() {
        return Err(Error::Invalid(report));
    }
    if !overwrite && dir_is_nonempty(dir)? {
        return Err(Error::WouldOverwrite(dir.to_path_buf()));
    }

    let mut files: Vec<(String, Vec<u8>)> = Vec::new();
    for (e, adj) in g.edge_types.iter().zip(&g.adjacency) {
        files.push((edge_file(&e.name), encode_edges(adj)));
    }
    for (t, fm) in g.node_types.iter().zip(&g.features) {
        if let Some(fm) = fm {
            files.push((feature_file(&t.name, "bin"), encode_features(fm)));
        }
    }
    files.push((LABELS_FILE.into(), encode_labels(&g.labels)));
    files.push((SPLITS_FILE.into(), encode_splits(&g.labels)));

    let manifest = Manifest {
        format: FORMAT.into(),
        node_types: g
            .node_types
            .iter()
            .zip(&g.features)
            .map(|(t, fm)| NodeTypeEntry {
                name: t.name.clone(),
                count: t.count,
                feature_dim: fm.as_ref().map(FeatureMatrix::cols),
            })
            .collect(),
        edge_types: g
            .edge_types
            .iter()
            .zip(&g.adjacency)
            .map(|(e, adj)| EdgeTypeEntry {
                name: e.name.clone(),
                src: g.node_type(e.src).name.clone(),
                dst: g.node_type(e.dst).name.clone(),
                count: adj.nnz(),
            })
            .collect(),
        target: g.node_type(g.target).name.clone(),
        num_classes: g.labels.num_classes,
        checksums: files
            .iter()
            .map(|(name, bytes)| (name.clone(), sha256_hex(bytes)))
            .collect(),
        provenance: provenance.cloned(),
    };
    let mut json = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
    json.push(b'\n');
    files.push((MANIFEST_FILE.into(), json));

    let staging = staging_dir(dir);
    let result = write_all(&staging, &files).and_then(|()| {
        if dir.exists() {
            fs::remove_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        fs::rename(&staging, dir).map_err(|e| Error::io(dir, e))
    });
    if result.is_err() {
        let _ = fs::remove_dir_all(&staging);
    }
    result.map(|()| manifest)
}

fn staging_dir(dir: &Path) -> PathBuf {
    let name = dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into());
    let nanos = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.subsec_nanos())
        .unwrap_or(0);
    dir.with_file_name(format!(".{name}.tmp-{}-{nanos}", std::process::id()))
}

fn write_all(staging: &Path, files: &[(String, Vec<u8>)]) -> Result<()> {
    fs::create_dir_all(staging).map_err(|e| Error::io(staging, e))?;
    for (name, bytes) in files {
        let path = staging.join(name);
        fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}
