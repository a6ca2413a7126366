//! Leveled friendship networks over effective links.
//!
//! Starting from group leaders (level 1), every placed node is expanded into
//! its `f` strongest outgoing links of the effective matrix
//! `G_rr + G_qrnd`. Friends not yet placed join the next level, attached to
//! a claimant of their own group when one exists, otherwise to the earliest
//! claimant. Expansion stops when a level places nobody new.

use std::collections::HashMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::regomax::ReducedGoogleMatrix;

pub const DEFAULT_FRIENDS: usize = 4;
pub const FORMAT_TAG: &str = "friendship/1";

/// Tolerance of the teleport-floor comparison that marks a hidden link.
pub const HIDDEN_TOLERANCE: f64 = 1e-15;

/// `G_rr + G_qrnd`.
pub fn effective_matrix(m: &ReducedGoogleMatrix) -> DenseMatrix {
    &m.g_rr + m.qrnd()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FriendNode {
    /// Position in the reduced basis.
    pub index: usize,
    pub name: String,
    pub group: String,
    pub leader: bool,
    pub level: usize,
    /// Basis index of the expander that placed this node.
    pub parent: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FriendEdge {
    pub source: usize,
    pub target: usize,
    /// Level of the expanded source node.
    pub origin_level: usize,
    /// No direct link: the `G_rr` entry sits at the teleport floor.
    pub hidden: bool,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FriendshipNetwork {
    /// Nodes in placement order.
    pub nodes: Vec<FriendNode>,
    /// Edges in expansion order.
    pub edges: Vec<FriendEdge>,
}

/// Direct-link matrix and teleport floor used for the hidden flags.
#[derive(Debug, Clone, Copy)]
pub struct DirectLinks<'a> {
    pub g_rr: &'a DenseMatrix,
    pub floor: f64,
}

impl DirectLinks<'_> {
    fn is_hidden(&self, source: usize, target: usize) -> bool {
        (self.g_rr[(target, source)] - self.floor).abs() <= HIDDEN_TOLERANCE
    }
}

/// The `f` largest off-diagonal entries of column `source`, ties by
/// ascending target index.
fn best_friends(eff: &DenseMatrix, source: usize, f: usize) -> Vec<usize> {
    let mut candidates: Vec<usize> = (0..eff.nrows()).filter(|&t| t != source).collect();
    candidates.sort_by(|&a, &b| {
        eff[(b, source)]
            .total_cmp(&eff[(a, source)])
            .then(a.cmp(&b))
    });
    candidates.truncate(f);
    candidates
}

pub fn build_network(
    eff: &DenseMatrix,
    direct: Option<DirectLinks<'_>>,
    names: &[String],
    groups: &[String],
    leaders: &[usize],
    f: usize,
) -> Result<FriendshipNetwork> {
    let n = eff.ncols();
    if eff.nrows() != n {
        return Err(Error::Invalid("effective matrix must be square".into()));
    }
    if names.len() != n || groups.len() != n {
        return Err(Error::BasisMismatch(format!(
            "{} names and {} groups for a {n}-node matrix",
            names.len(),
            groups.len()
        )));
    }
    if f < 1 {
        return Err(Error::InvalidParameter("f must be >= 1".into()));
    }
    if leaders.is_empty() {
        return Err(Error::InvalidParameter("no leaders".into()));
    }

    let mut placed = vec![false; n];
    let mut nodes: Vec<FriendNode> = Vec::new();
    for &leader in leaders {
        if leader >= n {
            return Err(Error::IndexOutOfRange {
                index: leader,
                node_count: n,
            });
        }
        if std::mem::replace(&mut placed[leader], true) {
            return Err(Error::DuplicateEntry(names[leader].clone()));
        }
        nodes.push(FriendNode {
            index: leader,
            name: names[leader].clone(),
            group: groups[leader].clone(),
            leader: true,
            level: 1,
            parent: None,
        });
    }

    let mut edges = Vec::new();
    let mut level_start = 0;
    let mut level = 1;
    while level_start < nodes.len() {
        let level_end = nodes.len();
        // new friend -> claimants, in order of first claim
        let mut claims: Vec<(usize, Vec<usize>)> = Vec::new();
        let mut claim_slot: HashMap<usize, usize> = HashMap::new();
        for expander in &nodes[level_start..level_end] {
            let source = expander.index;
            for target in best_friends(eff, source, f) {
                edges.push(FriendEdge {
                    source,
                    target,
                    origin_level: level,
                    hidden: direct.is_some_and(|d| d.is_hidden(source, target)),
                    weight: eff[(target, source)],
                });
                if !placed[target] {
                    let slot = *claim_slot.entry(target).or_insert_with(|| {
                        claims.push((target, Vec::new()));
                        claims.len() - 1
                    });
                    claims[slot].1.push(source);
                }
            }
        }
        for (friend, claimants) in claims {
            let parent = claimants
                .iter()
                .copied()
                .find(|&c| groups[c] == groups[friend])
                .unwrap_or(claimants[0]);
            placed[friend] = true;
            nodes.push(FriendNode {
                index: friend,
                name: names[friend].clone(),
                group: groups[friend].clone(),
                leader: false,
                level: level + 1,
                parent: Some(parent),
            });
        }
        level_start = level_end;
        level += 1;
    }
    Ok(FriendshipNetwork { nodes, edges })
}

/// Builds the network of a reduced matrix from its effective links.
pub fn network_of_reduced(
    m: &ReducedGoogleMatrix,
    groups: &[String],
    leaders: &[usize],
    f: usize,
) -> Result<FriendshipNetwork> {
    let eff = effective_matrix(m);
    let direct = DirectLinks {
        g_rr: &m.g_rr,
        floor: m.teleport(),
    };
    build_network(&eff, Some(direct), &m.names, groups, leaders, f)
}

/// Group file rows: `canonical_name<TAB>group<TAB>leader{0,1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupAssignment {
    pub name: String,
    pub group: String,
    pub leader: bool,
}

pub fn read_groups<R: std::io::BufRead>(reader: R) -> Result<Vec<GroupAssignment>> {
    let mut out = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.trim_end_matches('\r').split('\t').collect();
        let [name, group, leader] = fields[..] else {
            return Err(Error::Parse {
                line: lineno,
                reason: "expected name<TAB>group<TAB>leader".into(),
            });
        };
        let leader = match leader.trim() {
            "1" => true,
            "0" => false,
            other => {
                return Err(Error::Parse {
                    line: lineno,
                    reason: format!("leader flag must be 0 or 1, got {other:?}"),
                })
            }
        };
        out.push(GroupAssignment {
            name: name.to_owned(),
            group: group.to_owned(),
            leader,
        });
    }
    Ok(out)
}

/// Resolves group assignments against a basis: per-node groups (total) and
/// leaders in file order.
pub fn assign_groups(
    names: &[String],
    rows: &[GroupAssignment],
) -> Result<(Vec<String>, Vec<usize>)> {
    let position: HashMap<&str, usize> = names
        .iter()
        .enumerate()
        .map(|(k, n)| (n.as_str(), k))
        .collect();
    let mut groups: Vec<Option<String>> = vec![None; names.len()];
    let mut leaders = Vec::new();
    for row in rows {
        let k = *position
            .get(row.name.as_str())
            .ok_or_else(|| Error::UnknownName(row.name.clone()))?;
        if groups[k].replace(row.group.clone()).is_some() {
            return Err(Error::DuplicateEntry(row.name.clone()));
        }
        if row.leader {
            leaders.push(k);
        }
    }
    let groups = groups
        .into_iter()
        .enumerate()
        .map(|(k, g)| g.ok_or_else(|| Error::Invalid(format!("no group for {:?}", names[k]))))
        .collect::<Result<Vec<_>>>()?;
    Ok((groups, leaders))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Dot,
    Json,
}

impl std::str::FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dot" => Ok(ExportFormat::Dot),
            "json" => Ok(ExportFormat::Json),
            other => Err(Error::UnknownFormat(other.to_owned())),
        }
    }
}

const PALETTE: [&str; 12] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf", "#393b79", "#ad494a",
];

fn edge_style(origin_level: usize) -> (&'static str, Option<&'static str>) {
    match origin_level {
        1 => ("solid", None),
        2 => ("dashed", None),
        3 => ("dotted", None),
        _ => ("solid", Some("\\\\")),
    }
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

#[derive(Serialize, Deserialize)]
struct JsonDocument {
    format: String,
    nodes: Vec<FriendNode>,
    edges: Vec<FriendEdge>,
}

impl FriendshipNetwork {
    pub fn export<W: Write>(&self, format: ExportFormat, out: W) -> Result<()> {
        match format {
            ExportFormat::Dot => self.write_dot(out),
            ExportFormat::Json => self.write_json(out),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_json(&mut buf)?;
        Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
    }

    fn write_json<W: Write>(&self, mut out: W) -> Result<()> {
        let doc = JsonDocument {
            format: FORMAT_TAG.into(),
            nodes: self.nodes.clone(),
            edges: self.edges.clone(),
        };
        serde_json::to_writer_pretty(&mut out, &doc)?;
        writeln!(out)?;
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: JsonDocument = serde_json::from_str(text)?;
        if doc.format != FORMAT_TAG {
            return Err(Error::UnknownFormat(doc.format));
        }
        Ok(FriendshipNetwork {
            nodes: doc.nodes,
            edges: doc.edges,
        })
    }

    fn write_dot<W: Write>(&self, mut out: W) -> Result<()> {
        let mut colors: HashMap<&str, &str> = HashMap::new();
        for node in &self.nodes {
            let next = PALETTE[colors.len() % PALETTE.len()];
            colors.entry(node.group.as_str()).or_insert(next);
        }
        let name_of: HashMap<usize, &str> = self
            .nodes
            .iter()
            .map(|n| (n.index, n.name.as_str()))
            .collect();

        writeln!(out, "digraph friendship {{")?;
        for node in &self.nodes {
            let color = colors[node.group.as_str()];
            let style = if node.leader { "filled" } else { "solid" };
            writeln!(
                out,
                "  {} [group={}, level={}, color=\"{color}\", fillcolor=\"{color}\", style={style}, xlabel=\"L{}\"];",
                quote(&node.name),
                quote(&node.group),
                node.level,
                node.level
            )?;
        }
        for edge in &self.edges {
            let (style, label) = edge_style(edge.origin_level);
            let color = if edge.hidden { "red" } else { "black" };
            let source = name_of
                .get(&edge.source)
                .map_or_else(|| edge.source.to_string(), |s| s.to_string());
            let target = name_of
                .get(&edge.target)
                .map_or_else(|| edge.target.to_string(), |s| s.to_string());
            write!(
                out,
                "  {} -> {} [origin_level={}, hidden={}, weight={}, color={color}, style={style}",
                quote(&source),
                quote(&target),
                edge.origin_level,
                edge.hidden,
                crate::format::sig(edge.weight, crate::format::MATRIX_DIGITS),
            )?;
            if let Some(label) = label {
                write!(out, ", label=\"{label}\"")?;
            }
            writeln!(out, "];")?;
        }
        writeln!(out, "}}")?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|k| format!("n{k}")).collect()
    }

    #[test]
    fn immediate_closure() {
        // leader 0's friends 1 and 2 only point back at placed nodes
        let eff =
            DenseMatrix::from_column_slice(3, 3, &[0.0, 0.6, 0.4, 0.7, 0.0, 0.3, 0.5, 0.5, 0.0]);
        let groups = vec!["a".to_string(); 3];
        let net = build_network(&eff, None, &names(3), &groups, &[0], 2).unwrap();
        let levels: Vec<usize> = net.nodes.iter().map(|n| n.level).collect();
        assert_eq!(levels, vec![1, 2, 2]);
        assert_eq!(net.edges.len(), 6);
    }

    #[test]
    fn diagonal_is_never_a_candidate() {
        let eff = DenseMatrix::from_column_slice(2, 2, &[0.9, 0.1, 0.2, 0.8]);
        let groups = vec!["a".to_string(); 2];
        let net = build_network(&eff, None, &names(2), &groups, &[0], 4).unwrap();
        assert!(net.edges.iter().all(|e| e.source != e.target));
        assert_eq!(net.edges.len(), 2);
    }

    #[test]
    fn errors() {
        let eff = DenseMatrix::from_element(2, 2, 0.5);
        let g = vec!["a".to_string(); 2];
        assert!(build_network(&eff, None, &names(2), &g, &[0], 0).is_err());
        assert!(build_network(&eff, None, &names(2), &g, &[2], 4).is_err());
        assert!(build_network(&eff, None, &names(2), &g, &[], 4).is_err());
        assert!("svg".parse::<ExportFormat>().is_err());
    }

    #[test]
    fn empty_network_exports() {
        let net = FriendshipNetwork {
            nodes: vec![],
            edges: vec![],
        };
        let mut dot = Vec::new();
        net.export(ExportFormat::Dot, &mut dot).unwrap();
        assert_eq!(String::from_utf8(dot).unwrap(), "digraph friendship {\n}\n");
        let json = net.to_json().unwrap();
        assert_eq!(FriendshipNetwork::from_json(&json).unwrap(), net);
    }

    #[test]
    fn single_edge_dot() {
        let net = FriendshipNetwork {
            nodes: vec![
                FriendNode {
                    index: 0,
                    name: "A".into(),
                    group: "US".into(),
                    leader: true,
                    level: 1,
                    parent: None,
                },
                FriendNode {
                    index: 1,
                    name: "B".into(),
                    group: "UK".into(),
                    leader: false,
                    level: 2,
                    parent: Some(0),
                },
            ],
            edges: vec![FriendEdge {
                source: 0,
                target: 1,
                origin_level: 1,
                hidden: true,
                weight: 0.25,
            }],
        };
        let mut dot = Vec::new();
        net.export(ExportFormat::Dot, &mut dot).unwrap();
        let dot = String::from_utf8(dot).unwrap();
        let edge_lines: Vec<&str> = dot.lines().filter(|l| l.contains("->")).collect();
        assert_eq!(
            edge_lines,
            vec!["  \"A\" -> \"B\" [origin_level=1, hidden=true, weight=0.25, color=red, style=solid];"]
        );
        assert!(dot.contains(
            "\"A\" [group=\"US\", level=1, color=\"#1f77b4\", fillcolor=\"#1f77b4\", style=filled"
        ));
    }

    #[test]
    fn group_file() {
        let rows = read_groups("B\tUK\t0\nA\tUS\t1\n".as_bytes()).unwrap();
        let names = vec!["A".to_string(), "B".to_string()];
        let (groups, leaders) = assign_groups(&names, &rows).unwrap();
        assert_eq!(groups, vec!["US", "UK"]);
        assert_eq!(leaders, vec![0]);
        assert!(assign_groups(&names, &rows[..1]).is_err());
        assert!(read_groups("A\tUS\tyes\n".as_bytes()).is_err());
    }
}
