//! Immutable compressed directed graphs, label maps and node subsets.
//!
//! Out-edges are stored grouped by source with sorted, distinct targets, so
//! that the column of the stochastic matrix belonging to node `j` is a
//! contiguous slice. Self-loops are never stored.

use std::collections::HashMap;
use std::collections::HashSet;
use std::io::BufRead;

use crate::error::{Error, Result};

/// Compressed sparse adjacency: for each source node, the sorted list of
/// distinct targets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedGraph {
    offsets: Vec<usize>,
    targets: Vec<u32>,
    labels: Option<LabelMap>,
}

impl DirectedGraph {
    /// Builds a graph from `(source, target)` pairs, dropping self-loops and
    /// collapsing duplicates.
    pub fn from_edges<I>(node_count: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        check_index_space(node_count)?;
        let mut pairs = Vec::new();
        for (src, dst) in edges {
            for index in [src, dst] {
                if index >= node_count {
                    return Err(Error::IndexOutOfRange { index, node_count });
                }
            }
            if src != dst {
                pairs.push((src as u32, dst as u32));
            }
        }
        Ok(Self::from_sorted_pairs(node_count, sort_dedup(pairs)))
    }

    /// `pairs` must be sorted, duplicate free and loop free.
    fn from_sorted_pairs(node_count: usize, pairs: Vec<(u32, u32)>) -> Self {
        let mut offsets = vec![0usize; node_count + 1];
        for &(src, _) in &pairs {
            offsets[src as usize + 1] += 1;
        }
        for i in 0..node_count {
            offsets[i + 1] += offsets[i];
        }
        let targets = pairs.into_iter().map(|(_, dst)| dst).collect();
        DirectedGraph {
            offsets,
            targets,
            labels: None,
        }
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len()
    }

    /// Sorted targets of the out-edges of `node`.
    #[inline]
    pub fn targets(&self, node: usize) -> &[u32] {
        &self.targets[self.offsets[node]..self.offsets[node + 1]]
    }

    #[inline]
    pub fn out_degree(&self, node: usize) -> usize {
        self.offsets[node + 1] - self.offsets[node]
    }

    #[inline]
    pub fn is_dangling(&self, node: usize) -> bool {
        self.out_degree(node) == 0
    }

    pub fn has_edge(&self, src: usize, dst: usize) -> bool {
        self.targets(src).binary_search(&(dst as u32)).is_ok()
    }

    /// All edges in `(source, target)` order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.node_count()).flat_map(move |src| {
            self.targets(src)
                .iter()
                .map(move |&dst| (src, dst as usize))
        })
    }

    /// The transposed graph: `j -> i` exists iff `i -> j` exists here.
    /// Labels are carried over.
    pub fn invert(&self) -> DirectedGraph {
        let n = self.node_count();
        let mut offsets = vec![0usize; n + 1];
        for &dst in &self.targets {
            offsets[dst as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut cursor = offsets.clone();
        let mut targets = vec![0u32; self.targets.len()];
        // Scanning sources in increasing order keeps each new target list sorted.
        for src in 0..n {
            for &dst in self.targets(src) {
                let slot = &mut cursor[dst as usize];
                targets[*slot] = src as u32;
                *slot += 1;
            }
        }
        DirectedGraph {
            offsets,
            targets,
            labels: self.labels.clone(),
        }
    }

    /// Attaches a label map. Every labelled index must be a node of the graph.
    pub fn with_labels(mut self, labels: LabelMap) -> Result<Self> {
        if let Some(index) = labels.max_index() {
            if index >= self.node_count() {
                return Err(Error::IndexOutOfRange {
                    index,
                    node_count: self.node_count(),
                });
            }
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn labels(&self) -> Option<&LabelMap> {
        self.labels.as_ref()
    }

    pub fn label(&self, node: usize) -> Option<&str> {
        self.labels.as_ref().and_then(|l| l.name(node))
    }

    /// Label of `node`, or its decimal index when unlabelled.
    pub fn display_name(&self, node: usize) -> String {
        self.label(node)
            .map(str::to_owned)
            .unwrap_or_else(|| node.to_string())
    }

    /// Resolves an ordered list of names or decimal indices into a subset.
    ///
    /// Names are looked up in the label map first; an entry that is not a
    /// known name is read as an index.
    pub fn resolve_subset<S: AsRef<str>>(&self, entries: &[S]) -> Result<NodeSubset> {
        let n = self.node_count();
        let mut indices = Vec::with_capacity(entries.len());
        let mut origin = Vec::with_capacity(entries.len());
        let mut seen = HashSet::with_capacity(entries.len());
        for entry in entries {
            let entry = entry.as_ref().trim();
            let (index, how) = match self.labels.as_ref().and_then(|l| l.index_of(entry)) {
                Some(index) => (index, EntryOrigin::Name),
                None => match entry.parse::<usize>() {
                    Ok(index) if index < n => (index, EntryOrigin::Index),
                    Ok(index) => {
                        return Err(Error::IndexOutOfRange {
                            index,
                            node_count: n,
                        })
                    }
                    Err(_) => return Err(Error::UnknownName(entry.to_owned())),
                },
            };
            if !seen.insert(index) {
                return Err(Error::DuplicateEntry(entry.to_owned()));
            }
            indices.push(index);
            origin.push(how);
        }
        Ok(NodeSubset { indices, origin })
    }
}

fn check_index_space(node_count: usize) -> Result<()> {
    if node_count > u32::MAX as usize {
        return Err(Error::IdOverflow(node_count as u64));
    }
    Ok(())
}

fn sort_dedup(mut pairs: Vec<(u32, u32)>) -> Vec<(u32, u32)> {
    pairs.sort_unstable();
    pairs.dedup();
    pairs
}

/// Bidirectional node index to name mapping. Names are unique.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabelMap {
    names: HashMap<usize, String>,
    index: HashMap<String, usize>,
}

impl LabelMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, node: usize, name: impl Into<String>) -> Result<()> {
        let name = name.into();
        if self.index.contains_key(&name) {
            return Err(Error::Invalid(format!("duplicate label {name:?}")));
        }
        if let Some(old) = self.names.insert(node, name.clone()) {
            return Err(Error::Invalid(format!(
                "node {node} labelled twice ({old:?}, {name:?})"
            )));
        }
        self.index.insert(name, node);
        Ok(())
    }

    pub fn name(&self, node: usize) -> Option<&str> {
        self.names.get(&node).map(String::as_str)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    fn max_index(&self) -> Option<usize> {
        self.names.keys().copied().max()
    }

    /// Reads a label file: one `index<TAB>name` per line, `#` comments.
    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let mut labels = LabelMap::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = lineno + 1;
            let line = line.trim_end_matches(['\r', '\n']);
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (index, name) = line.split_once('\t').ok_or_else(|| Error::Parse {
                line: lineno,
                reason: "expected index<TAB>name".into(),
            })?;
            let index = index.trim().parse::<usize>().map_err(|e| Error::Parse {
                line: lineno,
                reason: format!("bad index {index:?}: {e}"),
            })?;
            labels.insert(index, name).map_err(|e| Error::Parse {
                line: lineno,
                reason: e.to_string(),
            })?;
        }
        Ok(labels)
    }
}

/// How a subset entry was resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntryOrigin {
    Name,
    Index,
}

/// Ordered list of distinct node indices; the order defines the basis of a
/// reduced matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeSubset {
    indices: Vec<usize>,
    origin: Vec<EntryOrigin>,
}

impl NodeSubset {
    /// Subset from raw indices; checks range and distinctness.
    pub fn from_indices(indices: Vec<usize>, node_count: usize) -> Result<Self> {
        let mut seen = HashSet::with_capacity(indices.len());
        for &index in &indices {
            if index >= node_count {
                return Err(Error::IndexOutOfRange { index, node_count });
            }
            if !seen.insert(index) {
                return Err(Error::DuplicateEntry(index.to_string()));
            }
        }
        let origin = vec![EntryOrigin::Index; indices.len()];
        Ok(NodeSubset { indices, origin })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn origin(&self) -> &[EntryOrigin] {
        &self.origin
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Position of every node inside the subset, `None` for the complement.
    pub fn positions(&self, node_count: usize) -> Vec<Option<usize>> {
        let mut pos = vec![None; node_count];
        for (k, &i) in self.indices.iter().enumerate() {
            pos[i] = Some(k);
        }
        pos
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LoopPolicy {
    #[default]
    Drop,
    Reject,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DuplicatePolicy {
    #[default]
    Collapse,
    Reject,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    pub self_loops: LoopPolicy,
    pub duplicates: DuplicatePolicy,
    /// Overrides both `1 + max id` and a `#N=` header.
    pub node_count: Option<usize>,
}

/// Counters collected while loading an edge list.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadReport {
    pub lines: usize,
    pub edges_read: usize,
    pub self_loops_dropped: usize,
    pub duplicates_collapsed: usize,
}

/// Reads a `src<TAB>dst` edge list.
///
/// Lines starting with `#` are comments, except a `#N=<n>` header which fixes
/// the node count so that isolated trailing nodes are kept.
pub fn load_edge_list<R: BufRead>(
    reader: R,
    options: LoadOptions,
) -> Result<(DirectedGraph, LoadReport)> {
    let mut report = LoadReport::default();
    let mut header_n: Option<usize> = None;
    let mut max_id: Option<u64> = None;
    let mut pairs: Vec<(u32, u32)> = Vec::new();

    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        report.lines += 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(n) = comment.trim().strip_prefix("N=") {
                let n = n.trim().parse::<u64>().map_err(|e| Error::Parse {
                    line: lineno,
                    reason: format!("bad node count header: {e}"),
                })?;
                if n > u32::MAX as u64 {
                    return Err(Error::IdOverflow(n));
                }
                header_n = Some(n as usize);
            }
            continue;
        }
        let mut fields = line.split(['\t', ' ']).filter(|f| !f.is_empty());
        let (Some(src), Some(dst), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(Error::Parse {
                line: lineno,
                reason: format!("expected src<TAB>dst, got {line:?}"),
            });
        };
        let src = parse_id(src, lineno)?;
        let dst = parse_id(dst, lineno)?;
        report.edges_read += 1;
        max_id = Some(max_id.map_or(src.max(dst), |m| m.max(src).max(dst)));
        if src == dst {
            if options.self_loops == LoopPolicy::Reject {
                return Err(Error::Parse {
                    line: lineno,
                    reason: format!("self-loop on node {src}"),
                });
            }
            report.self_loops_dropped += 1;
            continue;
        }
        pairs.push((src as u32, dst as u32));
    }

    let implied = max_id.map_or(0, |m| m as usize + 1);
    let node_count = options.node_count.or(header_n).unwrap_or(implied);
    if implied > node_count {
        return Err(Error::IndexOutOfRange {
            index: implied - 1,
            node_count,
        });
    }
    check_index_space(node_count)?;

    let before = pairs.len();
    let pairs = sort_dedup(pairs);
    report.duplicates_collapsed = before - pairs.len();
    if report.duplicates_collapsed > 0 && options.duplicates == DuplicatePolicy::Reject {
        return Err(Error::Invalid(format!(
            "{} duplicate edges",
            report.duplicates_collapsed
        )));
    }
    if node_count == 0 {
        log::warn!("edge list is empty, returning a graph with no nodes");
    }
    Ok((DirectedGraph::from_sorted_pairs(node_count, pairs), report))
}

fn parse_id(field: &str, line: usize) -> Result<u64> {
    let id = field.parse::<u64>().map_err(|e| Error::Parse {
        line,
        reason: format!("bad node id {field:?}: {e}"),
    })?;
    // u32::MAX itself is reserved so that N = max + 1 still fits.
    if id >= u32::MAX as u64 {
        return Err(Error::IdOverflow(id));
    }
    Ok(id)
}

/// Reads a subset file: one name or index per line, order significant.
pub fn read_subset_entries<R: BufRead>(reader: R) -> Result<Vec<String>> {
    let mut entries = Vec::new();
    for line in reader.lines() {
        let line = line?;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        entries.push(line.to_owned());
    }
    Ok(entries)
}
