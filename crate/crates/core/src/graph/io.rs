//! On-disk graph formats.
//!
//! `json`: one object with `meta`, `nodes` and `edges`; written as
//! `<stem>.graph.json`.
//!
//! `edge_csv`: `<stem>.edges.csv` (header `src,dst`) plus a sibling
//! `<stem>.nodes.csv` (header `id,kind`). Provenance is not stored in CSV,
//! and the graph family is inferred from the node kinds.
//!
//! Both writers are byte-deterministic: nodes by id, edges by `(src, dst)`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Family, NodeKind, TypedDigraph};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    EdgeCsv,
}

impl Format {
    /// File-name suffixes this format writes, in write order.
    pub fn suffixes(self) -> &'static [&'static str] {
        match self {
            Format::Json => &[".graph.json"],
            Format::EdgeCsv => &[".edges.csv", ".nodes.csv"],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("graph schema violation: {0}")]
pub struct SchemaError(pub String);

fn schema(msg: impl Into<String>) -> SchemaError {
    SchemaError(msg.into())
}

#[derive(Debug, Error)]
pub enum GraphIoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Schema {
        path: PathBuf,
        #[source]
        source: SchemaError,
    },
    #[error("{0}: unrecognized graph file name (expected .graph.json or .edges.csv)")]
    UnknownFormat(PathBuf),
}

/// One serialized file: its name suffix and contents.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphFile {
    pub suffix: &'static str,
    pub bytes: Vec<u8>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphDoc {
    meta: Meta,
    nodes: Vec<NodeRecord>,
    edges: Vec<[u32; 2]>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Meta {
    family: Family,
    num_nodes: usize,
    num_edges: usize,
    kind_vocabulary: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeRecord {
    id: u32,
    kind: String,
    provenance: String,
}

pub fn serialize(g: &TypedDigraph, format: Format) -> Vec<GraphFile> {
    match format {
        Format::Json => vec![GraphFile {
            suffix: ".graph.json",
            bytes: to_json(g),
        }],
        Format::EdgeCsv => {
            let (edges, nodes) = to_edge_csv(g);
            vec![
                GraphFile {
                    suffix: ".edges.csv",
                    bytes: edges,
                },
                GraphFile {
                    suffix: ".nodes.csv",
                    bytes: nodes,
                },
            ]
        }
    }
}

/// Inverse of [`serialize`]; `files` holds the contents in the same order.
pub fn deserialize(files: &[&[u8]], format: Format) -> Result<TypedDigraph, SchemaError> {
    match (format, files) {
        (Format::Json, [bytes]) => from_json(bytes),
        (Format::EdgeCsv, [edges, nodes]) => from_edge_csv(edges, nodes),
        _ => Err(schema(format!(
            "{:?} expects {} file(s), got {}",
            format,
            format.suffixes().len(),
            files.len()
        ))),
    }
}

pub fn to_json(g: &TypedDigraph) -> Vec<u8> {
    let doc = GraphDoc {
        meta: Meta {
            family: g.family(),
            num_nodes: g.num_nodes(),
            num_edges: g.num_edges(),
            kind_vocabulary: g.kind_vocabulary().iter().map(|k| k.name().to_string()).collect(),
        },
        nodes: (0..g.num_nodes() as u32)
            .map(|i| NodeRecord {
                id: i,
                kind: g.kind(i).name().to_string(),
                provenance: g.provenance(i).to_string(),
            })
            .collect(),
        edges: g.edges().iter().map(|&(s, d)| [s, d]).collect(),
    };
    let mut out = serde_json::to_vec(&doc).expect("graph documents always serialize");
    out.push(b'\n');
    out
}

pub fn from_json(bytes: &[u8]) -> Result<TypedDigraph, SchemaError> {
    if bytes.iter().all(u8::is_ascii_whitespace) {
        return Err(schema("empty graph file"));
    }
    let doc: GraphDoc = serde_json::from_slice(bytes).map_err(|e| schema(e.to_string()))?;
    let vocab: Vec<&str> = doc.meta.family.vocabulary().iter().map(|k| k.name()).collect();
    if doc.meta.kind_vocabulary != vocab {
        return Err(schema(format!(
            "kind vocabulary {:?} does not match the fixed {} vocabulary",
            doc.meta.kind_vocabulary, doc.meta.family
        )));
    }
    if doc.meta.num_nodes != doc.nodes.len() || doc.meta.num_edges != doc.edges.len() {
        return Err(schema("meta counts disagree with node/edge arrays"));
    }
    let mut kinds = Vec::with_capacity(doc.nodes.len());
    let mut provenance = Vec::with_capacity(doc.nodes.len());
    for (i, node) in doc.nodes.into_iter().enumerate() {
        if node.id as usize != i {
            return Err(schema(format!("node at position {i} has id {}", node.id)));
        }
        kinds.push(node.kind.parse::<NodeKind>().map_err(|e| schema(e.to_string()))?);
        provenance.push(node.provenance);
    }
    let edges = doc.edges.into_iter().map(|[s, d]| (s, d)).collect();
    TypedDigraph::new(doc.meta.family, kinds, provenance, edges).map_err(|e| schema(e.to_string()))
}

/// Returns `(edges.csv, nodes.csv)` contents.
pub fn to_edge_csv(g: &TypedDigraph) -> (Vec<u8>, Vec<u8>) {
    let mut edges = csv::Writer::from_writer(Vec::new());
    edges.write_record(["src", "dst"]).expect("write to memory");
    for &(s, d) in g.edges() {
        edges.serialize((s, d)).expect("write to memory");
    }
    let mut nodes = csv::Writer::from_writer(Vec::new());
    nodes.write_record(["id", "kind"]).expect("write to memory");
    for i in 0..g.num_nodes() as u32 {
        nodes.serialize((i, g.kind(i).name())).expect("write to memory");
    }
    (
        edges.into_inner().expect("flush to memory"),
        nodes.into_inner().expect("flush to memory"),
    )
}

fn csv_rows(bytes: &[u8], header: [&str; 2]) -> Result<Vec<csv::StringRecord>, SchemaError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(bytes);
    let found = reader.headers().map_err(|e| schema(e.to_string()))?.clone();
    if found.is_empty() {
        return Err(schema(format!("missing header `{}`", header.join(","))));
    }
    if found.iter().collect::<Vec<_>>() != header {
        return Err(schema(format!(
            "expected header `{}`, found `{}`",
            header.join(","),
            found.iter().collect::<Vec<_>>().join(",")
        )));
    }
    reader.records().map(|r| r.map_err(|e| schema(e.to_string()))).collect()
}

fn parse_index(field: &str, what: &str) -> Result<u32, SchemaError> {
    field
        .trim()
        .parse::<u32>()
        .map_err(|_| schema(format!("malformed {what} `{field}`")))
}

pub fn from_edge_csv(edges: &[u8], nodes: &[u8]) -> Result<TypedDigraph, SchemaError> {
    let node_rows = csv_rows(nodes, ["id", "kind"])?;
    let mut kinds = Vec::with_capacity(node_rows.len());
    for (i, row) in node_rows.iter().enumerate() {
        let id = parse_index(&row[0], "node id")?;
        if id as usize != i {
            return Err(schema(format!("node at row {} has id {id}", i + 1)));
        }
        kinds.push(row[1].parse::<NodeKind>().map_err(|e| schema(e.to_string()))?);
    }
    let family = kinds
        .first()
        .map(|k| k.family())
        .ok_or_else(|| schema("cannot infer graph family from an empty node list"))?;
    let edge_rows = csv_rows(edges, ["src", "dst"])?;
    let edges = edge_rows
        .iter()
        .map(|row| Ok((parse_index(&row[0], "edge index")?, parse_index(&row[1], "edge index")?)))
        .collect::<Result<Vec<_>, SchemaError>>()?;
    let provenance = vec![String::new(); kinds.len()];
    TypedDigraph::new(family, kinds, provenance, edges).map_err(|e| schema(e.to_string()))
}

/// Writes `<dir>/<stem><suffix>` for each file of `format`; returns the paths.
pub fn write_graph(g: &TypedDigraph, dir: &Path, stem: &str, format: Format) -> Result<Vec<PathBuf>, GraphIoError> {
    serialize(g, format)
        .into_iter()
        .map(|file| {
            let path = dir.join(format!("{stem}{}", file.suffix));
            fs::write(&path, &file.bytes).map_err(|source| GraphIoError::Io {
                path: path.clone(),
                source,
            })?;
            Ok(path)
        })
        .collect()
}

/// Reads a `.graph.json` file, or a `.edges.csv` file with its sibling
/// `.nodes.csv`.
pub fn read_graph(path: &Path) -> Result<TypedDigraph, GraphIoError> {
    let read = |p: &Path| {
        fs::read(p).map_err(|source| GraphIoError::Io {
            path: p.to_path_buf(),
            source,
        })
    };
    let with_path = |source| GraphIoError::Schema {
        path: path.to_path_buf(),
        source,
    };
    let name = path.to_string_lossy();
    if name.ends_with(".graph.json") {
        from_json(&read(path)?).map_err(with_path)
    } else if let Some(base) = name.strip_suffix(".edges.csv") {
        let nodes_path = PathBuf::from(format!("{base}.nodes.csv"));
        from_edge_csv(&read(path)?, &read(&nodes_path)?).map_err(with_path)
    } else {
        Err(GraphIoError::UnknownFormat(path.to_path_buf()))
    }
}
