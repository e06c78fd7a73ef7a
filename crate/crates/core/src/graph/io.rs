//! Graph directory format.
//!
//! ```text
//! nodes.csv      id,label,f0,...,f{d-1}
//! edges.csv      src,dst
//! partition.csv  node,client      (optional)
//! splits.csv     node,tag         (optional)
//! ```
//!
//! Floats are written in shortest round-trip form so a save/load cycle is
//! bit-exact.

use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array2;

use super::{Graph, NodeSplit, Partition, SplitTag};
use crate::error::{Error, Result};

fn reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(file))
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(file))
}

fn parse_err(path: &Path, line: u64, msg: impl Into<String>) -> Error {
    Error::Parse {
        file: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

fn line_of(record: &csv::StringRecord) -> u64 {
    record.position().map_or(0, |p| p.line())
}

fn field<T: std::str::FromStr>(
    path: &Path,
    record: &csv::StringRecord,
    idx: usize,
    what: &str,
) -> Result<T> {
    let raw = record.get(idx).unwrap_or("");
    raw.trim()
        .parse()
        .map_err(|_| parse_err(path, line_of(record), format!("bad {what} {raw:?}")))
}

/// Iterates data records, checking the header and row widths.
fn records(
    path: &Path,
    expected_header: &[&str],
    exact_width: bool,
) -> Result<(Vec<csv::StringRecord>, usize)> {
    let mut rdr = reader(path)?;
    let header = rdr.headers()?.clone();
    let width = header.len();
    let prefix_ok = expected_header
        .iter()
        .enumerate()
        .all(|(i, h)| header.get(i).map(str::trim) == Some(h));
    if !prefix_ok || (exact_width && width != expected_header.len()) {
        return Err(parse_err(
            path,
            1,
            format!("expected header starting {}", expected_header.join(",")),
        ));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        if rec.len() != width {
            return Err(parse_err(
                path,
                line_of(&rec),
                format!("row has {} fields, header has {width}", rec.len()),
            ));
        }
        out.push(rec);
    }
    Ok((out, width))
}

pub fn load_graph_dir(dir: impl AsRef<Path>) -> Result<Graph> {
    let dir = dir.as_ref();
    let nodes_path = dir.join("nodes.csv");
    let (rows, width) = records(&nodes_path, &["id", "label"], false)?;
    let n = rows.len();
    let d = width - 2;
    let mut features = Array2::zeros((n, d));
    let mut labels = vec![usize::MAX; n];
    for rec in &rows {
        let id: usize = field(&nodes_path, rec, 0, "node id")?;
        if id >= n {
            return Err(parse_err(
                &nodes_path,
                line_of(rec),
                format!("node id {id} out of range for {n} nodes"),
            ));
        }
        if labels[id] != usize::MAX {
            return Err(parse_err(
                &nodes_path,
                line_of(rec),
                format!("duplicate node id {id}"),
            ));
        }
        labels[id] = field(&nodes_path, rec, 1, "label")?;
        for j in 0..d {
            features[[id, j]] = field(&nodes_path, rec, j + 2, "feature")?;
        }
    }
    let num_classes = labels.iter().max().map_or(1, |&m| m + 1);

    let edges_path = dir.join("edges.csv");
    let (rows, _) = records(&edges_path, &["src", "dst"], true)?;
    let mut edges = Vec::with_capacity(rows.len());
    for rec in &rows {
        let u: usize = field(&edges_path, rec, 0, "src")?;
        let v: usize = field(&edges_path, rec, 1, "dst")?;
        if u >= n || v >= n {
            return Err(parse_err(
                &edges_path,
                line_of(rec),
                format!("edge ({u}, {v}) out of range for {n} nodes"),
            ));
        }
        edges.push((u, v));
    }
    Graph::new(features, labels, edges, num_classes)
}

pub fn save_graph_dir(g: &Graph, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut w = writer(&dir.join("nodes.csv"))?;
    let mut header = vec!["id".to_string(), "label".to_string()];
    header.extend((0..g.feature_dim()).map(|j| format!("f{j}")));
    w.write_record(&header)?;
    for (i, row) in g.features().rows().into_iter().enumerate() {
        let mut rec = vec![i.to_string(), g.labels()[i].to_string()];
        rec.extend(row.iter().map(|x| format!("{x:?}")));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(dir.join("nodes.csv"), e))?;

    let mut w = writer(&dir.join("edges.csv"))?;
    w.write_record(["src", "dst"])?;
    for &(u, v) in g.edges() {
        w.write_record([u.to_string(), v.to_string()])?;
    }
    w.flush().map_err(|e| Error::io(dir.join("edges.csv"), e))?;
    Ok(())
}

/// Reads `partition.csv`; a node listed under several clients makes the
/// partition overlapping.
pub fn load_partition(path: impl AsRef<Path>, num_nodes: usize) -> Result<Partition> {
    let path = path.as_ref();
    let (rows, _) = records(path, &["node", "client"], true)?;
    let mut lists: Vec<Vec<usize>> = Vec::new();
    let mut seen = vec![0usize; num_nodes];
    for rec in &rows {
        let node: usize = field(path, rec, 0, "node")?;
        let client: usize = field(path, rec, 1, "client")?;
        if node >= num_nodes {
            return Err(parse_err(
                path,
                line_of(rec),
                format!("node {node} out of range"),
            ));
        }
        if lists.len() <= client {
            lists.resize(client + 1, Vec::new());
        }
        lists[client].push(node);
        seen[node] += 1;
    }
    let overlapping = seen.iter().any(|&c| c > 1);
    Partition::from_client_lists(num_nodes, lists, overlapping)
}

pub fn save_partition(p: &Partition, path: impl AsRef<Path>) -> Result<()> {
    let path: PathBuf = path.as_ref().into();
    let mut w = writer(&path)?;
    w.write_record(["node", "client"])?;
    let mut rows: Vec<(usize, usize)> = p
        .client_nodes
        .iter()
        .enumerate()
        .flat_map(|(c, nodes)| nodes.iter().map(move |&v| (v, c)))
        .collect();
    rows.sort_unstable();
    for (v, c) in rows {
        w.write_record([v.to_string(), c.to_string()])?;
    }
    w.flush().map_err(|e| Error::io(&path, e))
}

pub fn load_splits(path: impl AsRef<Path>, num_nodes: usize) -> Result<NodeSplit> {
    let path = path.as_ref();
    let (rows, _) = records(path, &["node", "tag"], true)?;
    let mut tags = vec![None; num_nodes];
    for rec in &rows {
        let node: usize = field(path, rec, 0, "node")?;
        if node >= num_nodes {
            return Err(parse_err(
                path,
                line_of(rec),
                format!("node {node} out of range"),
            ));
        }
        let raw = rec.get(1).unwrap_or("");
        let tag = SplitTag::parse(raw)
            .ok_or_else(|| parse_err(path, line_of(rec), format!("bad tag {raw:?}")))?;
        tags[node] = Some(tag);
    }
    let tags = tags
        .into_iter()
        .enumerate()
        .map(|(v, t)| t.ok_or_else(|| parse_err(path, 0, format!("node {v} has no tag"))))
        .collect::<Result<_>>()?;
    Ok(NodeSplit { tags })
}

pub fn save_splits(s: &NodeSplit, path: impl AsRef<Path>) -> Result<()> {
    let path: PathBuf = path.as_ref().into();
    let mut w = writer(&path)?;
    w.write_record(["node", "tag"])?;
    for (v, t) in s.tags.iter().enumerate() {
        w.write_record([v.to_string(), t.as_str().to_string()])?;
    }
    w.flush().map_err(|e| Error::io(&path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_sbm, make_splits, partition_bisection, SplitRatios};

    #[test]
    fn path_graph_round_trip() {
        let feats = Array2::from_shape_vec((3, 2), vec![0.1, -2.5e-9, 1.0 / 3.0, 7.0, 1e300, -0.0])
            .unwrap();
        let g = Graph::new(feats, vec![0, 1, 1], [(0, 1), (1, 2)], 2).unwrap();
        let dir = tempfile::tempdir().unwrap();
        save_graph_dir(&g, dir.path()).unwrap();
        assert_eq!(load_graph_dir(dir.path()).unwrap(), g);
    }

    #[test]
    fn out_of_range_edge_names_line() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(
            dir.path().join("nodes.csv"),
            "id,label,f0\n0,0,1\n1,0,1\n2,0,1\n3,0,1\n",
        )
        .unwrap();
        fs::write(dir.path().join("edges.csv"), "src,dst\n0,1\n5,2\n").unwrap();
        let err = load_graph_dir(dir.path()).unwrap_err();
        match &err {
            Error::Parse { file, line, .. } => {
                assert!(file.ends_with("edges.csv"));
                assert_eq!(*line, 3);
            }
            other => panic!("unexpected {other}"),
        }
        assert!(err.to_string().contains("edges.csv:3"));
    }

    #[test]
    fn ragged_and_missing_files() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(load_graph_dir(dir.path()), Err(Error::Io { .. })));
        fs::write(dir.path().join("nodes.csv"), "id,label,f0\n0,0,1\n1,0\n").unwrap();
        fs::write(dir.path().join("edges.csv"), "src,dst\n").unwrap();
        let err = load_graph_dir(dir.path()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    }

    #[test]
    fn directed_input_is_symmetrized() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("nodes.csv"), "id,label\n0,0\n1,1\n2,0\n").unwrap();
        fs::write(dir.path().join("edges.csv"), "src,dst\n1,0\n0,1\n2,1\n").unwrap();
        let g = load_graph_dir(dir.path()).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
        assert_eq!(g.num_classes(), 2);
    }

    #[test]
    fn partition_and_split_files_round_trip() {
        let g = generate_sbm(2, 20, 0.3, 0.0, 2, 2, 1).unwrap();
        let p = partition_bisection(&g, 3, 2).unwrap();
        let s = make_splits(&g, SplitRatios::default(), 3).unwrap();
        let dir = tempfile::tempdir().unwrap();
        save_partition(&p, dir.path().join("partition.csv")).unwrap();
        save_splits(&s, dir.path().join("splits.csv")).unwrap();
        assert_eq!(
            load_partition(dir.path().join("partition.csv"), 40).unwrap(),
            p
        );
        assert_eq!(load_splits(dir.path().join("splits.csv"), 40).unwrap(), s);
    }
}
