//! Aggregation over several editions of a network: the cumulative Θ score
//! of per-edition top lists, and the equal-weight average of per-edition
//! reduced matrices written in one canonical basis.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{BufRead, Write};

use crate::dense::{self, DenseMatrix};
use crate::error::{Error, Result};
use crate::google::{IterationParams, RankVector};
use crate::regomax::ReducedGoogleMatrix;

pub const DEFAULT_K_TOP: usize = 100;

/// One edition's ranked list of canonical names, rank 1 first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EditionRankTable {
    pub edition: String,
    pub entries: Vec<String>,
}

impl EditionRankTable {
    pub fn new(edition: impl Into<String>, entries: Vec<String>) -> Result<Self> {
        let edition = edition.into();
        let mut seen = HashSet::with_capacity(entries.len());
        for name in &entries {
            if !seen.insert(name.as_str()) {
                return Err(Error::DuplicateEntry(format!(
                    "{name} in edition {edition}"
                )));
            }
        }
        Ok(EditionRankTable { edition, entries })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThetaScore {
    pub name: String,
    pub theta: u64,
    /// Number of editions listing the entity.
    pub appearances: usize,
}

/// `Θ = Σ_E (k_top + 1 − R_E)` with `R_E = k_top + 1` when absent from `E`.
///
/// Sorted by descending Θ, then descending appearances, then name.
pub fn theta_scores(tables: &[EditionRankTable], k_top: usize) -> Result<Vec<ThetaScore>> {
    if tables.is_empty() {
        return Err(Error::InvalidParameter("no edition tables".into()));
    }
    let mut scores: HashMap<&str, (u64, usize)> = HashMap::new();
    for table in tables {
        if table.entries.len() > k_top {
            return Err(Error::InvalidParameter(format!(
                "edition {} lists {} entries, more than k_top = {k_top}",
                table.edition,
                table.entries.len()
            )));
        }
        let mut seen = HashSet::with_capacity(table.entries.len());
        for (position, name) in table.entries.iter().enumerate() {
            if !seen.insert(name.as_str()) {
                return Err(Error::DuplicateEntry(format!(
                    "{name} in edition {}",
                    table.edition
                )));
            }
            let entry = scores.entry(name.as_str()).or_default();
            entry.0 += (k_top - position) as u64;
            entry.1 += 1;
        }
    }
    let mut out: Vec<ThetaScore> = scores
        .into_iter()
        .map(|(name, (theta, appearances))| ThetaScore {
            name: name.to_owned(),
            theta,
            appearances,
        })
        .collect();
    out.sort_by(|a, b| {
        b.theta
            .cmp(&a.theta)
            .then(b.appearances.cmp(&a.appearances))
            .then_with(|| a.name.cmp(&b.name))
    });
    Ok(out)
}

/// Reads `edition<TAB>rank<TAB>canonical_name` rows. Editions keep the order
/// of first appearance; ranks within an edition must be exactly `1..=len`.
pub fn read_edition_tables<R: BufRead>(reader: R) -> Result<Vec<EditionRankTable>> {
    let mut order: Vec<String> = Vec::new();
    let mut rows: HashMap<String, BTreeMap<usize, String>> = HashMap::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.trim_end_matches('\r').split('\t').collect();
        let [edition, rank, name] = fields[..] else {
            return Err(Error::Parse {
                line: lineno,
                reason: "expected edition<TAB>rank<TAB>name".into(),
            });
        };
        let rank: usize = rank.trim().parse().map_err(|e| Error::Parse {
            line: lineno,
            reason: format!("bad rank {rank:?}: {e}"),
        })?;
        if !rows.contains_key(edition) {
            order.push(edition.to_owned());
        }
        let table = rows.entry(edition.to_owned()).or_default();
        if table.insert(rank, name.to_owned()).is_some() {
            return Err(Error::Parse {
                line: lineno,
                reason: format!("rank {rank} repeated in edition {edition}"),
            });
        }
    }
    order
        .into_iter()
        .map(|edition| {
            let table = rows.remove(&edition).expect("edition recorded");
            for (expected, &rank) in (1..).zip(table.keys()) {
                if rank != expected {
                    return Err(Error::Invalid(format!(
                        "edition {edition}: ranks must be 1..={}, missing {expected}",
                        table.len()
                    )));
                }
            }
            EditionRankTable::new(edition, table.into_values().collect())
        })
        .collect()
}

pub fn write_theta<W: Write>(mut out: W, scores: &[ThetaScore]) -> Result<()> {
    writeln!(out, "rank\ttheta\tN_a\tname")?;
    for (k, s) in scores.iter().enumerate() {
        writeln!(out, "{}\t{}\t{}\t{}", k + 1, s.theta, s.appearances, s.name)?;
    }
    Ok(())
}

/// Per-edition presence flags: `edition<TAB>canonical_name<TAB>{0,1}`.
pub fn read_presence<R: BufRead>(reader: R) -> Result<HashMap<(String, String), bool>> {
    let mut out = HashMap::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.trim_end_matches('\r').split('\t').collect();
        let [edition, name, flag] = fields[..] else {
            return Err(Error::Parse {
                line: lineno,
                reason: "expected edition<TAB>name<TAB>present".into(),
            });
        };
        let present = match flag.trim() {
            "1" => true,
            "0" => false,
            other => {
                return Err(Error::Parse {
                    line: lineno,
                    reason: format!("presence flag must be 0 or 1, got {other:?}"),
                })
            }
        };
        out.insert((edition.to_owned(), name.to_owned()), present);
    }
    Ok(out)
}

/// Edition-local to canonical name mapping:
/// `edition<TAB>local_name<TAB>canonical_name`.
pub fn read_name_map<R: BufRead>(reader: R) -> Result<HashMap<(String, String), String>> {
    let mut out = HashMap::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.trim_end_matches('\r').split('\t').collect();
        let [edition, local, canonical] = fields[..] else {
            return Err(Error::Parse {
                line: lineno,
                reason: "expected edition<TAB>local_name<TAB>canonical_name".into(),
            });
        };
        out.insert((edition.to_owned(), local.to_owned()), canonical.to_owned());
    }
    Ok(out)
}

/// One edition's reduced matrix components in the canonical basis.
#[derive(Debug, Clone, PartialEq)]
pub struct EditionComponents {
    pub edition: String,
    pub g_rr: DenseMatrix,
    pub g_pr: DenseMatrix,
    pub g_qr: DenseMatrix,
    pub presence: Vec<bool>,
}

impl EditionComponents {
    /// Places a reduced matrix into `basis`; `canonical` maps its basis names
    /// to canonical ones (identity when `None`). Basis entries the matrix
    /// does not cover are absent.
    pub fn embed(
        edition: impl Into<String>,
        m: &ReducedGoogleMatrix,
        basis: &[String],
        canonical: Option<&dyn Fn(&str) -> String>,
    ) -> Result<Self> {
        let edition = edition.into();
        let position: HashMap<&str, usize> = basis
            .iter()
            .enumerate()
            .map(|(k, n)| (n.as_str(), k))
            .collect();
        let mut map = Vec::with_capacity(m.n_r());
        for name in &m.names {
            let name = canonical.map_or_else(|| name.clone(), |f| f(name));
            let k = *position.get(name.as_str()).ok_or_else(|| {
                Error::BasisMismatch(format!("{name:?} of edition {edition} is not in the basis"))
            })?;
            map.push(k);
        }
        let n = basis.len();
        let mut presence = vec![false; n];
        for &k in &map {
            if std::mem::replace(&mut presence[k], true) {
                return Err(Error::BasisMismatch(format!(
                    "edition {edition} maps two entries onto {:?}",
                    basis[k]
                )));
            }
        }
        let place = |src: &DenseMatrix| {
            let mut out = DenseMatrix::zeros(n, n);
            for (j, &bj) in map.iter().enumerate() {
                for (i, &bi) in map.iter().enumerate() {
                    out[(bi, bj)] = src[(i, j)];
                }
            }
            out
        };
        Ok(EditionComponents {
            edition,
            g_rr: place(&m.g_rr),
            g_pr: place(&m.g_pr),
            g_qr: place(&m.g_qr),
            presence,
        })
    }

    pub fn g_r(&self) -> DenseMatrix {
        &self.g_rr + &self.g_pr + &self.g_qr
    }

    /// Applies the absent-entity rules: links into absent entities are
    /// removed (a present column that lost mass is renormalized) and absent
    /// columns become uniform `1/n_r`, booked in the `pr` component.
    pub fn adjusted(&self) -> Result<EditionComponents> {
        let n = self.presence.len();
        let mut out = self.clone();
        let absent: Vec<usize> = (0..n).filter(|&k| !self.presence[k]).collect();
        if absent.is_empty() {
            return Ok(out);
        }
        for u in 0..n {
            if self.presence[u] {
                let mut removed = 0.0;
                for &i in &absent {
                    for m in [&mut out.g_rr, &mut out.g_pr, &mut out.g_qr] {
                        removed += m[(i, u)];
                        m[(i, u)] = 0.0;
                    }
                }
                if removed != 0.0 {
                    let total: f64 = (0..n)
                        .map(|i| out.g_rr[(i, u)] + out.g_pr[(i, u)] + out.g_qr[(i, u)])
                        .sum();
                    if !(total > 0.0) {
                        return Err(Error::Invalid(format!(
                            "edition {}: column {u} has no mass left after removing absent entities",
                            self.edition
                        )));
                    }
                    for m in [&mut out.g_rr, &mut out.g_pr, &mut out.g_qr] {
                        m.column_mut(u).iter_mut().for_each(|x| *x /= total);
                    }
                }
            } else {
                out.g_rr.column_mut(u).fill(0.0);
                out.g_qr.column_mut(u).fill(0.0);
                out.g_pr.column_mut(u).fill(1.0 / n as f64);
            }
        }
        Ok(out)
    }
}

/// Equal-weight average of adjusted per-edition reduced matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct AveragedReducedMatrix {
    pub names: Vec<String>,
    pub editions: Vec<String>,
    /// Mean of the adjusted per-edition `G_R`.
    pub matrix: DenseMatrix,
    pub g_rr: DenseMatrix,
    pub g_pr: DenseMatrix,
    pub g_qr: DenseMatrix,
    /// `presence[e][k]`: entity `k` present in edition `e`.
    pub presence: Vec<Vec<bool>>,
}

impl AveragedReducedMatrix {
    pub fn n_r(&self) -> usize {
        self.names.len()
    }
}

pub fn average_reduced(
    basis: &[String],
    editions: &[EditionComponents],
) -> Result<AveragedReducedMatrix> {
    if editions.is_empty() {
        return Err(Error::InvalidParameter(
            "no reduced matrices to average".into(),
        ));
    }
    let n = basis.len();
    for e in editions {
        let shapes = [e.g_rr.shape(), e.g_pr.shape(), e.g_qr.shape()];
        if e.presence.len() != n || shapes.iter().any(|&s| s != (n, n)) {
            return Err(Error::BasisMismatch(format!(
                "edition {} is not written in the {n}-entry basis",
                e.edition
            )));
        }
    }
    let mut matrix = DenseMatrix::zeros(n, n);
    let mut g_rr = DenseMatrix::zeros(n, n);
    let mut g_pr = DenseMatrix::zeros(n, n);
    let mut g_qr = DenseMatrix::zeros(n, n);
    for e in editions {
        let a = e.adjusted()?;
        matrix += a.g_r();
        g_rr += &a.g_rr;
        g_pr += &a.g_pr;
        g_qr += &a.g_qr;
    }
    let count = editions.len() as f64;
    for m in [&mut matrix, &mut g_rr, &mut g_pr, &mut g_qr] {
        m.iter_mut().for_each(|x| *x /= count);
    }
    Ok(AveragedReducedMatrix {
        names: basis.to_vec(),
        editions: editions.iter().map(|e| e.edition.clone()).collect(),
        matrix,
        g_rr,
        g_pr,
        g_qr,
        presence: editions.iter().map(|e| e.presence.clone()).collect(),
    })
}

pub fn pagerank_of_average(
    avg: &AveragedReducedMatrix,
    params: IterationParams,
) -> Result<RankVector> {
    dense::stationary(&avg.matrix, None, params)
}
