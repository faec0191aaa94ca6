//! File formats and the observed-data pathway.
//!
//! * correlation matrix: header row of names, then the full symmetric matrix;
//!   an optional leading label column is accepted when the header's first
//!   cell is empty.
//! * counts: one column per categorical variable plus a final `count` column;
//!   absent cells are zero.
//! * edge list: `a,b` per line, or `a -> b` for directed input.
//! * data: header plus numeric rows; `,` or `;` separated. Rows with missing
//!   cells (`""`, `NA`, `NaN`, `?`) are dropped and counted.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::entropy::{CorrelationMatrix, ProbabilityTable};
use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, Graph};
use crate::linalg::SquareMatrix;

/// Column-major numeric data.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
    dropped_rows: usize,
}

impl DataMatrix {
    pub fn from_columns(names: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Self> {
        if names.len() != columns.len() {
            return Err(Error::InvalidInput(format!(
                "{} names for {} columns",
                names.len(),
                columns.len()
            )));
        }
        if let Some(c) = columns.iter().find(|c| c.len() != columns[0].len()) {
            return Err(Error::InvalidInput(format!(
                "ragged columns: {} vs {} rows",
                c.len(),
                columns[0].len()
            )));
        }
        if columns.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("data must be finite".into()));
        }
        Ok(DataMatrix {
            names,
            columns,
            dropped_rows: 0,
        })
    }

    pub fn n(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn p(&self) -> usize {
        self.columns.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    /// Rows discarded at ingestion for missing cells.
    pub fn dropped_rows(&self) -> usize {
        self.dropped_rows
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.names).expect("in-memory write");
        for i in 0..self.n() {
            w.write_record(self.columns.iter().map(|c| c[i].to_string()))
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf-8")
    }
}

fn detect_delimiter(text: &str) -> u8 {
    let header = text.lines().next().unwrap_or("");
    if header.contains(';') && !header.contains(',') {
        b';'
    } else {
        b','
    }
}

fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .delimiter(detect_delimiter(text))
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes())
}

fn records(text: &str) -> Result<Vec<Vec<String>>> {
    reader(text)
        .records()
        .map(|r| {
            r.map(|rec| rec.iter().map(str::to_string).collect::<Vec<String>>())
                .map_err(|e| Error::InvalidInput(format!("csv: {e}")))
        })
        .filter(|r| !matches!(r, Ok(v) if v.iter().all(String::is_empty)))
        .collect()
}

fn parse_number(s: &str, what: &str) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|_| Error::InvalidInput(format!("{what}: cannot parse {s:?} as a number")))
}

fn is_missing(s: &str) -> bool {
    matches!(s, "" | "NA" | "NaN" | "nan" | "?")
}

pub fn read_data_csv(text: &str) -> Result<DataMatrix> {
    let rows = records(text)?;
    let (header, body) = rows
        .split_first()
        .ok_or_else(|| Error::InvalidInput("data file is empty".into()))?;
    let p = header.len();
    let mut columns = vec![Vec::new(); p];
    let mut dropped = 0;
    for (line, row) in body.iter().enumerate() {
        if row.len() != p {
            return Err(Error::InvalidInput(format!(
                "data row {} has {} fields, expected {p}",
                line + 2,
                row.len()
            )));
        }
        if row.iter().any(|c| is_missing(c)) {
            dropped += 1;
            continue;
        }
        for (j, cell) in row.iter().enumerate() {
            columns[j].push(parse_number(cell, &format!("data row {}", line + 2))?);
        }
    }
    let mut d = DataMatrix::from_columns(header.clone(), columns)?;
    d.dropped_rows = dropped;
    Ok(d)
}

/// Replaces each column by `Φ⁻¹(rank / (n + 1))`. Tied values receive their
/// ranks in an order fixed by `seed`.
pub fn normal_scores(data: &DataMatrix, seed: u64) -> Result<DataMatrix> {
    let n = data.n();
    if n < 3 {
        return Err(Error::InvalidInput(format!(
            "normal scores need at least 3 rows, got {n}"
        )));
    }
    let normal = Normal::standard();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut columns = Vec::with_capacity(data.p());
    for (j, col) in data.columns.iter().enumerate() {
        if col.iter().all(|&x| x == col[0]) {
            return Err(Error::DegenerateColumn(data.names[j].clone()));
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        order.sort_by(|&a, &b| col[a].total_cmp(&col[b]));
        let mut scores = vec![0.0; n];
        for (rank, &i) in order.iter().enumerate() {
            scores[i] = normal.inverse_cdf((rank + 1) as f64 / (n + 1) as f64);
        }
        columns.push(scores);
    }
    DataMatrix::from_columns(data.names.clone(), columns)
}

/// Product-moment correlations.
pub fn empirical_correlation(data: &DataMatrix) -> Result<CorrelationMatrix> {
    let (n, p) = (data.n(), data.p());
    if p < 2 || n <= p {
        return Err(Error::InvalidInput(format!(
            "correlation needs n > p >= 2, got n = {n}, p = {p}"
        )));
    }
    let centred: Vec<Vec<f64>> = data
        .columns
        .iter()
        .map(|c| {
            let mean = c.iter().sum::<f64>() / n as f64;
            c.iter().map(|x| x - mean).collect()
        })
        .collect();
    let sd: Vec<f64> = centred
        .iter()
        .map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    if let Some(j) = sd.iter().position(|&s| s == 0.0) {
        return Err(Error::DegenerateColumn(data.names[j].clone()));
    }
    let mut m = SquareMatrix::identity(p);
    for i in 0..p {
        for j in i + 1..p {
            let dot: f64 = centred[i].iter().zip(&centred[j]).map(|(a, b)| a * b).sum();
            let r = (dot / (sd[i] * sd[j])).clamp(-1.0, 1.0);
            m[(i, j)] = r;
            m[(j, i)] = r;
        }
    }
    CorrelationMatrix::from_matrix(data.names.clone(), m)
}

pub fn read_correlation_csv(text: &str) -> Result<CorrelationMatrix> {
    let rows = records(text)?;
    let (header, body) = rows
        .split_first()
        .ok_or_else(|| Error::InvalidInput("correlation file is empty".into()))?;
    let labelled = header.first().is_some_and(String::is_empty);
    let names: Vec<String> = header[usize::from(labelled)..].to_vec();
    let p = names.len();
    if body.len() != p {
        return Err(Error::InvalidInput(format!(
            "correlation file has {} rows for {p} names",
            body.len()
        )));
    }
    let values = body
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let cells = &row[usize::from(labelled).min(row.len())..];
            if cells.len() != p {
                return Err(Error::InvalidInput(format!(
                    "correlation row {} has {} values, expected {p}",
                    i + 1,
                    cells.len()
                )));
            }
            cells
                .iter()
                .map(|c| parse_number(c, &format!("correlation row {}", i + 1)))
                .collect()
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    CorrelationMatrix::new(names, values)
}

pub fn write_correlation_csv(c: &CorrelationMatrix) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(c.names()).expect("in-memory write");
    for i in 0..c.dim() {
        w.write_record((0..c.dim()).map(|j| c.get(i, j).to_string()))
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf-8")
}

/// Long-format counts. Levels are ordered by first appearance.
pub fn read_counts_csv(text: &str) -> Result<ProbabilityTable> {
    let rows = records(text)?;
    let (header, body) = rows
        .split_first()
        .ok_or_else(|| Error::InvalidInput("counts file is empty".into()))?;
    if header.len() < 2
        || !header
            .last()
            .is_some_and(|h| h.eq_ignore_ascii_case("count"))
    {
        return Err(Error::InvalidInput(
            "counts header must list the variables followed by `count`".into(),
        ));
    }
    let names: Vec<String> = header[..header.len() - 1].to_vec();
    let p = names.len();
    let mut labels: Vec<Vec<String>> = vec![Vec::new(); p];
    let mut cells: Vec<(Vec<usize>, f64)> = Vec::new();
    for (line, row) in body.iter().enumerate() {
        if row.len() != p + 1 {
            return Err(Error::InvalidInput(format!(
                "counts row {} has {} fields, expected {}",
                line + 2,
                row.len(),
                p + 1
            )));
        }
        let idx: Vec<usize> = (0..p)
            .map(|v| match labels[v].iter().position(|l| *l == row[v]) {
                Some(k) => k,
                None => {
                    labels[v].push(row[v].clone());
                    labels[v].len() - 1
                }
            })
            .collect();
        let count = parse_number(&row[p], &format!("counts row {}", line + 2))?;
        if !(count >= 0.0) || !count.is_finite() {
            return Err(Error::InvalidInput(format!(
                "negative count on row {}",
                line + 2
            )));
        }
        if cells.iter().any(|(c, _)| *c == idx) {
            return Err(Error::InvalidInput(format!(
                "duplicate cell on row {}",
                line + 2
            )));
        }
        cells.push((idx, count));
    }
    let levels: Vec<usize> = labels.iter().map(Vec::len).collect();
    let size: usize = levels.iter().product();
    let mut counts = vec![0.0; size];
    for (idx, c) in cells {
        let flat = idx.iter().zip(&levels).fold(0, |acc, (&i, &l)| acc * l + i);
        counts[flat] = c;
    }
    ProbabilityTable::from_counts(names, labels, &counts)
}

/// Parsed edge list, still in terms of variable indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EdgeList {
    Undirected(Vec<(usize, usize)>),
    Directed(Vec<(usize, usize)>),
}

/// How a directed edge list becomes an undirected graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DirectedConversion {
    Skeleton,
    Moralize,
}

pub fn read_edge_list(text: &str, names: &[String]) -> Result<EdgeList> {
    let index: HashMap<&str, usize> = names
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i))
        .collect();
    let lookup = |n: &str, line: usize| {
        index.get(n).copied().ok_or_else(|| {
            Error::InvalidInput(format!("edge list line {line}: unknown node {n:?}"))
        })
    };
    let mut undirected = Vec::new();
    let mut directed = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (a, b, arrow) = if let Some((a, b)) = line.split_once("->") {
            (a, b, true)
        } else if let Some((a, b)) = line.split_once(',') {
            (a, b, false)
        } else {
            return Err(Error::InvalidInput(format!(
                "edge list line {}: expected `a,b` or `a -> b`",
                k + 1
            )));
        };
        let clean = |s: &str| {
            s.trim()
                .trim_matches(',')
                .trim()
                .trim_matches('"')
                .to_string()
        };
        let (a, b) = (lookup(&clean(a), k + 1)?, lookup(&clean(b), k + 1)?);
        if arrow {
            directed.push((a, b));
        } else {
            undirected.push((a, b));
        }
    }
    match (undirected.is_empty(), directed.is_empty()) {
        (_, true) => Ok(EdgeList::Undirected(undirected)),
        (true, false) => Ok(EdgeList::Directed(directed)),
        (false, false) => Err(Error::InvalidInput(
            "edge list mixes directed and undirected edges".into(),
        )),
    }
}

impl EdgeList {
    pub fn into_graph(
        self,
        names: Vec<String>,
        conversion: Option<DirectedConversion>,
    ) -> Result<Graph> {
        match (self, conversion) {
            (EdgeList::Undirected(e), _) => Graph::named(names, &e),
            (EdgeList::Directed(e), Some(c)) => {
                let d = DirectedGraph::named(names, &e)?;
                d.topological_order()?;
                Ok(match c {
                    DirectedConversion::Skeleton => d.skeleton(),
                    DirectedConversion::Moralize => d.moral_graph(),
                })
            }
            (EdgeList::Directed(_), None) => Err(Error::InvalidInput(
                "directed edge list needs --moralize or --skeleton".into(),
            )),
        }
    }
}
