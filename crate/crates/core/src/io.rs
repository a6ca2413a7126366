//! Text formats: rank tables, reduced-matrix directories and sensitivity
//! tables.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::format::{sig, MATRIX_DIGITS, PROBABILITY_DIGITS, SENSITIVITY_DIGITS};
use crate::google::IterationParams;
use crate::regomax::{
    ReducedGoogleMatrix, ReductionDiagnostics, ReductionParams, Weights, NEGATIVE_TOLERANCE,
};
use crate::sensitivity::SensitivityResult;

pub const SIDECAR: &str = "reduced.json";
pub const SIDECAR_FORMAT: &str = "reduced/1";

/// Component files of an exported reduced matrix, in write order.
pub const COMPONENT_FILES: [&str; 5] =
    ["G_R.csv", "G_rr.csv", "G_pr.csv", "G_qr.csv", "G_qrnd.csv"];

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::file(path, e))
}

pub fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::file(path, e))
}

pub fn read_to_string(path: &Path) -> Result<String> {
    let mut text = String::new();
    open(path)?
        .read_to_string(&mut text)
        .map_err(|e| Error::file(path, e))?;
    Ok(text)
}

/// `rank<TAB>index<TAB>name<TAB>probability`, rows in `order`.
pub fn write_rank_table<W: Write>(
    mut out: W,
    order: &[usize],
    probabilities: &[f64],
    name: impl Fn(usize) -> String,
) -> Result<()> {
    writeln!(out, "rank\tindex\tname\tprobability")?;
    for (k, &node) in order.iter().enumerate() {
        writeln!(
            out,
            "{}\t{node}\t{}\t{}",
            k + 1,
            name(node),
            sig(probabilities[node], PROBABILITY_DIGITS)
        )?;
    }
    out.flush()?;
    Ok(())
}

/// Round-off negatives in `[−1e-10, 0)` print as zero.
fn export_value(x: f64) -> f64 {
    if (NEGATIVE_TOLERANCE..0.0).contains(&x) {
        0.0
    } else {
        x
    }
}

/// Row-major CSV with the basis names as header row.
pub fn write_matrix_csv<W: Write>(out: W, names: &[String], m: &DenseMatrix) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(names)?;
    for i in 0..m.nrows() {
        w.write_record((0..m.ncols()).map(|j| sig(export_value(m[(i, j)]), MATRIX_DIGITS)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_matrix_csv<R: Read>(input: R) -> Result<(Vec<String>, DenseMatrix)> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(input);
    let names: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    let n = names.len();
    let mut m = DenseMatrix::zeros(n, n);
    let mut rows = 0;
    for (i, record) in r.records().enumerate() {
        let record = record?;
        if i >= n || record.len() != n {
            return Err(Error::Invalid(format!("matrix CSV is not {n}×{n}")));
        }
        for (j, field) in record.iter().enumerate() {
            m[(i, j)] = field.trim().parse().map_err(|e| Error::Parse {
                line: i + 2,
                reason: format!("bad matrix entry {field:?}: {e}"),
            })?;
        }
        rows += 1;
    }
    if rows != n {
        return Err(Error::Invalid(format!(
            "matrix CSV has {rows} rows for {n} columns"
        )));
    }
    Ok((names, m))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub eigen_tol: f64,
    pub eigen_max_iter: usize,
    pub series_tol: f64,
    pub series_max: usize,
    pub block_width: usize,
}

impl From<ReductionParams> for Tolerances {
    fn from(p: ReductionParams) -> Self {
        Tolerances {
            eigen_tol: p.eigen.tol,
            eigen_max_iter: p.eigen.max_iter,
            series_tol: p.series_tol,
            series_max: p.series_max,
            block_width: p.block_width,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub format: String,
    pub names: Vec<String>,
    pub indices: Vec<usize>,
    pub alpha: f64,
    pub global_node_count: usize,
    pub lambda_c: f64,
    pub weights: Weights,
    pub tolerances: Option<Tolerances>,
    pub iterations: ReductionDiagnostics,
    pub reduced_pagerank: Vec<f64>,
}

impl Sidecar {
    pub fn of(m: &ReducedGoogleMatrix) -> Self {
        Sidecar {
            format: SIDECAR_FORMAT.into(),
            names: m.names.clone(),
            indices: m.indices.clone(),
            alpha: m.alpha,
            global_node_count: m.global_node_count,
            lambda_c: m.lambda_c,
            weights: m.weights(),
            tolerances: m.params.map(Tolerances::from),
            iterations: m.diagnostics.clone(),
            reduced_pagerank: m.reduced_pagerank.clone(),
        }
    }
}

/// Writes the component CSVs and the JSON sidecar into `dir`.
pub fn export_reduced(m: &ReducedGoogleMatrix, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::file(dir, e))?;
    let components = [
        m.g_r(),
        m.g_rr.clone(),
        m.g_pr.clone(),
        m.g_qr.clone(),
        m.qrnd(),
    ];
    for (file, matrix) in COMPONENT_FILES.iter().zip(&components) {
        let path = dir.join(file);
        write_matrix_csv(create(&path)?, &m.names, matrix)?;
    }
    let path = dir.join(SIDECAR);
    let mut out = create(&path)?;
    serde_json::to_writer_pretty(&mut out, &Sidecar::of(m))?;
    writeln!(out)?;
    out.flush().map_err(|e| Error::file(&path, e))?;
    Ok(())
}

/// Reads a directory written by [`export_reduced`].
pub fn import_reduced(dir: &Path) -> Result<ReducedGoogleMatrix> {
    let sidecar: Sidecar = serde_json::from_str(&read_to_string(&dir.join(SIDECAR))?)?;
    if sidecar.format != SIDECAR_FORMAT {
        return Err(Error::UnknownFormat(sidecar.format));
    }
    let read = |file: &str| -> Result<DenseMatrix> {
        let (names, m) = read_matrix_csv(open(&dir.join(file))?)?;
        if names != sidecar.names {
            return Err(Error::BasisMismatch(format!(
                "{file} header differs from the sidecar basis"
            )));
        }
        Ok(m)
    };
    let g_rr = read("G_rr.csv")?;
    let g_pr = read("G_pr.csv")?;
    let g_qr = read("G_qr.csv")?;
    if sidecar.reduced_pagerank.len() != sidecar.names.len() {
        return Err(Error::LengthMismatch {
            expected: sidecar.names.len(),
            actual: sidecar.reduced_pagerank.len(),
        });
    }
    let params = sidecar.tolerances.map(|t| ReductionParams {
        alpha: sidecar.alpha,
        eigen: IterationParams {
            tol: t.eigen_tol,
            max_iter: t.eigen_max_iter,
        },
        series_tol: t.series_tol,
        series_max: t.series_max,
        block_width: t.block_width,
    });
    Ok(ReducedGoogleMatrix {
        names: sidecar.names,
        indices: sidecar.indices,
        alpha: sidecar.alpha,
        global_node_count: sidecar.global_node_count,
        g_rr,
        g_pr,
        g_qr,
        lambda_c: sidecar.lambda_c,
        reduced_pagerank: sidecar.reduced_pagerank,
        params,
        diagnostics: sidecar.iterations,
    })
}

/// `source<TAB>link_target<TAB>observed<TAB>D`. With `diagonal_only`, one
/// row per perturbed link observed on its own target.
pub fn write_sensitivity<W: Write>(
    mut out: W,
    results: &[SensitivityResult],
    names: &[String],
    diagonal_only: bool,
) -> Result<()> {
    writeln!(out, "source\tlink_target\tobserved\tD")?;
    for r in results {
        let (u, c) = (&names[r.source], &names[r.target_link]);
        if diagonal_only {
            writeln!(
                out,
                "{u}\t{c}\t{c}\t{}",
                sig(r.diagonal, SENSITIVITY_DIGITS)
            )?;
        } else {
            for &(k, d) in &r.values {
                writeln!(
                    out,
                    "{u}\t{c}\t{}\t{}",
                    names[k],
                    sig(d, SENSITIVITY_DIGITS)
                )?;
            }
        }
    }
    out.flush()?;
    Ok(())
}
