//! Edge-list, label and circles files.
//!
//! Node ids in all files are arbitrary non-negative integers; they are
//! compacted to `0..n` in order of first appearance in the edge list. Nodes
//! that only a side file (labels, circles) mentions are appended after those
//! as isolated nodes.

use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use dpspec_core::graph::{
    largest_connected_component, select_circles_drop_policy, Circle, Graph, Labels,
};

use crate::config::DatasetSpec;

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{source_name}:{line}: {msg}")]
    Parse {
        source_name: String,
        line: usize,
        msg: String,
    },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] dpspec_core::Error),
}

fn read(path: &Path) -> Result<String, DatasetError> {
    std::fs::read_to_string(path).map_err(|source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Non-empty, comment-stripped lines with their 1-based numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        (!l.is_empty()).then_some((i + 1, l))
    })
}

/// A parsed edge list before it is frozen into a [`Graph`].
#[derive(Debug, Clone, Default)]
pub struct EdgeList {
    ids: Vec<u64>,
    index: HashMap<u64, usize>,
    edges: Vec<(usize, usize)>,
    /// Self-loops dropped while parsing.
    pub self_loops: usize,
    /// Edge lines dropped as repeats (in either orientation).
    pub duplicates: usize,
}

impl EdgeList {
    pub fn parse(text: &str, source_name: &str) -> Result<Self, DatasetError> {
        let mut el = EdgeList::default();
        let mut seen = std::collections::HashSet::new();
        for (line, content) in content_lines(text) {
            let mut it = content.split_whitespace();
            let parse_id = |tok: Option<&str>| -> Result<u64, DatasetError> {
                let tok = tok.ok_or_else(|| DatasetError::Parse {
                    source_name: source_name.to_string(),
                    line,
                    msg: format!("expected two node ids, got `{content}`"),
                })?;
                tok.parse().map_err(|_| DatasetError::Parse {
                    source_name: source_name.to_string(),
                    line,
                    msg: format!("`{tok}` is not a node id"),
                })
            };
            let u = parse_id(it.next())?;
            let v = parse_id(it.next())?;
            if it.next().is_some() {
                return Err(DatasetError::Parse {
                    source_name: source_name.to_string(),
                    line,
                    msg: format!("expected two node ids, got `{content}`"),
                });
            }
            let a = el.intern(u);
            let b = el.intern(v);
            if a == b {
                el.self_loops += 1;
                continue;
            }
            let key = (a.min(b), a.max(b));
            if seen.insert(key) {
                el.edges.push(key);
            } else {
                el.duplicates += 1;
            }
        }
        Ok(el)
    }

    pub fn load(path: &Path) -> Result<Self, DatasetError> {
        Self::parse(&read(path)?, &path.display().to_string())
    }

    /// Compact index of `id`, appending it as a new node if unseen.
    pub fn intern(&mut self, id: u64) -> usize {
        *self.index.entry(id).or_insert_with(|| {
            self.ids.push(id);
            self.ids.len() - 1
        })
    }

    pub fn index_of(&self, id: u64) -> Option<usize> {
        self.index.get(&id).copied()
    }

    /// Original id of every compacted node.
    pub fn ids(&self) -> &[u64] {
        &self.ids
    }

    pub fn n(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn graph(&self) -> Result<Graph, DatasetError> {
        Ok(Graph::from_edges(self.n(), self.edges.iter().copied())?)
    }
}

pub fn load_edge_list(path: &Path) -> Result<Graph, DatasetError> {
    EdgeList::load(path)?.graph()
}

/// Reads `node label` lines; labels are arbitrary tokens numbered by first
/// appearance. Every node of the edge list must be labeled.
pub fn parse_labels(el: &mut EdgeList, text: &str, source_name: &str) -> Result<Labels, DatasetError> {
    let mut class_of: HashMap<String, usize> = HashMap::new();
    let mut assigned: Vec<Option<usize>> = vec![None; el.n()];
    for (line, content) in content_lines(text) {
        let parts: Vec<&str> = content.split_whitespace().collect();
        let err = |msg: String| DatasetError::Parse {
            source_name: source_name.to_string(),
            line,
            msg,
        };
        if parts.len() != 2 {
            return Err(err(format!("expected `node label`, got `{content}`")));
        }
        let id: u64 = parts[0]
            .parse()
            .map_err(|_| err(format!("`{}` is not a node id", parts[0])))?;
        let next = class_of.len();
        let class = *class_of.entry(parts[1].to_string()).or_insert(next);
        let node = el.intern(id);
        if node >= assigned.len() {
            assigned.resize(node + 1, None);
        }
        match assigned[node] {
            Some(c) if c != class => return Err(err(format!("node {id} labeled twice"))),
            _ => assigned[node] = Some(class),
        }
    }
    let values = assigned
        .iter()
        .enumerate()
        .map(|(i, c)| {
            c.ok_or_else(|| DatasetError::Invalid(format!("node {} has no label", el.ids()[i])))
        })
        .collect::<Result<Vec<usize>, _>>()?;
    if class_of.len() < 2 {
        return Err(DatasetError::Invalid("labels must name at least two classes".into()));
    }
    Ok(Labels::new(values, class_of.len())?)
}

pub fn load_labeled(edges: &Path, labels: &Path) -> Result<Graph, DatasetError> {
    let mut el = EdgeList::load(edges)?;
    let labels = parse_labels(&mut el, &read(labels)?, &labels.display().to_string())?;
    Ok(el.graph()?.with_labels(labels)?)
}

/// Reads `name id id ...` lines (whitespace separated).
pub fn parse_circles(el: &mut EdgeList, text: &str, source_name: &str) -> Result<Vec<Circle>, DatasetError> {
    let mut circles = Vec::new();
    for (line, content) in content_lines(text) {
        let mut it = content.split_whitespace();
        let name = it.next().unwrap_or_default().to_string();
        let members = it
            .map(|tok| {
                tok.parse::<u64>().map(|id| el.intern(id)).map_err(|_| DatasetError::Parse {
                    source_name: source_name.to_string(),
                    line,
                    msg: format!("`{tok}` is not a node id"),
                })
            })
            .collect::<Result<Vec<usize>, _>>()?;
        circles.push(Circle { name, members });
    }
    Ok(circles)
}

pub fn load_circles_drop_policy(
    edges: &Path,
    circles: &Path,
    circle_count: usize,
) -> Result<Graph, DatasetError> {
    let mut el = EdgeList::load(edges)?;
    let circles = parse_circles(&mut el, &read(circles)?, &circles.display().to_string())?;
    Ok(select_circles_drop_policy(&el.graph()?, &circles, circle_count)?)
}

/// Loads a file-backed dataset; SBM specs are sampled per trial instead.
pub fn load_fixed(spec: &DatasetSpec) -> Result<Graph, DatasetError> {
    let (g, lcc) = match spec {
        DatasetSpec::Sbm(_) => {
            return Err(DatasetError::Invalid("SBM datasets are sampled, not loaded".into()))
        }
        DatasetSpec::EdgeList {
            edges,
            labels,
            largest_component,
        } => (load_labeled(edges, labels)?, *largest_component),
        DatasetSpec::Circles {
            edges,
            circles,
            circle_count,
            largest_component,
        } => (load_circles_drop_policy(edges, circles, *circle_count)?, *largest_component),
    };
    if lcc {
        Ok(largest_connected_component(&g)?)
    } else {
        Ok(g)
    }
}

/// Writes `u v` lines (`u < v`, sorted) preceded by a node-count comment so
/// isolated nodes survive a round trip through [`read_written_edge_list`].
pub fn write_edge_list<W: Write>(g: &Graph, mut w: W) -> std::io::Result<()> {
    let mut edges: Vec<(usize, usize)> = g.edges().to_vec();
    edges.sort_unstable();
    writeln!(w, "# nodes {}", g.n())?;
    for (u, v) in edges {
        writeln!(w, "{u} {v}")?;
    }
    w.flush()
}

/// Inverse of [`write_edge_list`]: ids are taken literally, not compacted.
pub fn read_written_edge_list(text: &str) -> Result<Graph, DatasetError> {
    let mut n = None;
    let mut edges = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if let Some(rest) = line.strip_prefix("# nodes") {
            n = rest.trim().parse::<usize>().ok();
            continue;
        }
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let parsed: Option<(usize, usize)> = content
            .split_once(char::is_whitespace)
            .and_then(|(a, b)| Some((a.trim().parse().ok()?, b.trim().parse().ok()?)));
        edges.push(parsed.ok_or_else(|| DatasetError::Parse {
            source_name: "edge list".into(),
            line: i + 1,
            msg: format!("malformed edge `{content}`"),
        })?);
    }
    let n = n.unwrap_or_else(|| edges.iter().map(|&(a, b)| a.max(b) + 1).max().unwrap_or(0));
    Ok(Graph::from_edges(n, edges)?)
}
