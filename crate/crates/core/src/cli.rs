//! The `fwdiff` command line.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use sha2::{Digest, Sha256};

use crate::entropy::{CorrelationMatrix, EntropyOracle, ANALYTIC_ZERO_TOL, DATA_ZERO_TOL};
use crate::error::Error;
use crate::forward_diff::forward_differences;
use crate::io::{
    empirical_correlation, normal_scores, read_correlation_csv, read_counts_csv, read_data_csv,
    read_edge_list, write_correlation_csv, DirectedConversion,
};
use crate::lattice::VariableSet;
use crate::report::{ecdf, ReportDocument, ReportMetadata, Units};
use crate::scan::{cluster_scan, colour_synergies};
use crate::synergy::{annotate_suppression, detect_synergies};

#[derive(Debug, Parser)]
#[command(
    name = "fwdiff",
    version,
    about = "Forward differences of the entropy function"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Forward differences of a Gaussian model over a set of variables.
    Deltas {
        #[command(flatten)]
        source: Source,
        /// `all` or a comma-separated list of names.
        #[arg(long, default_value = "all")]
        universe: String,
        #[command(flatten)]
        common: Common,
    },
    /// Forward differences of a contingency table.
    TableDeltas {
        /// Long-format counts CSV.
        #[arg(long)]
        counts: PathBuf,
        #[arg(long, default_value = "all")]
        universe: String,
        #[command(flatten)]
        common: Common,
    },
    /// Every triple of a set of variables with δ below −threshold.
    Synergies {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value = "all")]
        universe: String,
        /// Comma-separated conditioning variables.
        #[arg(long)]
        given: Option<String>,
        #[command(flatten)]
        detection: Detection,
        #[command(flatten)]
        common: Common,
    },
    /// Node-cluster scan of a graph.
    Scan {
        /// Edge list: `a,b` or `a -> b` per line.
        #[arg(long)]
        graph: PathBuf,
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 3)]
        max_order: usize,
        /// Convert a directed edge list by moralizing.
        #[arg(long, conflicts_with = "skeleton")]
        moralize: bool,
        /// Convert a directed edge list by dropping directions.
        #[arg(long)]
        skeleton: bool,
        /// Write the coloured graph in Graphviz format.
        #[arg(long)]
        dot: Option<PathBuf>,
        /// Write ECDF points of the third-order differences as CSV.
        #[arg(long)]
        ecdf: Option<PathBuf>,
        #[command(flatten)]
        detection: Detection,
        #[command(flatten)]
        common: Common,
    },
    /// Normal scores of a data file.
    Scores {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Transformed data CSV (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the correlation matrix of the scores.
        #[arg(long)]
        corr_out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct SourceGroup {
    /// Correlation matrix CSV.
    #[arg(long)]
    corr: Option<PathBuf>,
    /// Raw data CSV; normal scores are taken first.
    #[arg(long)]
    data: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct Source {
    #[command(flatten)]
    group: SourceGroup,
    /// Seed for tie-breaking in normal scores.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct Detection {
    /// Report synergies with δ below minus this many millibits.
    #[arg(long, default_value_t = 0.0)]
    threshold: f64,
    /// Response variable for suppression typing.
    #[arg(long)]
    response: Option<String>,
    /// Correlation within which a response correlation counts as zero.
    #[arg(long, default_value_t = 0.01)]
    suppression_tol: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum UnitArg {
    Mbits,
    Nats,
}

#[derive(Debug, Args)]
struct Common {
    /// Differences within this many millibits of zero are reported as 0
    /// [default: 1e-6, or 1.0 for data input].
    #[arg(long)]
    zero_tol: Option<f64>,
    #[arg(long, value_enum, default_value_t = UnitArg::Mbits)]
    units: UnitArg,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Report file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure carrying its exit code.
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn input(message: String) -> Self {
        Failure { code: 2, message }
    }
}

/// Errors from the library, with sets rendered by name.
fn lib_failure(e: Error, names: &[String]) -> Failure {
    let code = if e.is_numeric() { 3 } else { 2 };
    let render = |s: VariableSet| {
        s.iter()
            .map(|i| names.get(i).cloned().unwrap_or_else(|| i.to_string()))
            .collect::<Vec<_>>()
            .join(", ")
    };
    let mut message = e.to_string();
    match e {
        Error::NotPositiveDefinite { subset } | Error::MissingSubset { subset } => {
            message.push_str(&format!("\noffending subset: {{{}}}", render(subset)));
        }
        Error::NotASynergy(s) => {
            message.push_str(&format!("\noffending subset: {{{}}}", render(s)));
        }
        _ => {}
    }
    Failure { code, message }
}

trait OrFail<T> {
    fn or_fail(self, names: &[String]) -> Result<T, Failure>;
}

impl<T> OrFail<T> for crate::error::Result<T> {
    fn or_fail(self, names: &[String]) -> Result<T, Failure> {
        self.map_err(|e| lib_failure(e, names))
    }
}

struct Inputs {
    hasher: Sha256,
}

impl Inputs {
    fn new() -> Self {
        Inputs {
            hasher: Sha256::new(),
        }
    }

    fn read(&mut self, path: &Path) -> Result<String, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
        self.hasher.update((text.len() as u64).to_le_bytes());
        self.hasher.update(text.as_bytes());
        Ok(text)
    }

    fn fingerprint(self) -> String {
        let digest = self.hasher.finalize();
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        format!("sha256:{hex}")
    }
}

/// A loaded correlation matrix and whether it came from raw data.
fn load_source(src: &Source, inputs: &mut Inputs) -> Result<(CorrelationMatrix, bool), Failure> {
    if let Some(p) = &src.group.corr {
        let text = inputs.read(p)?;
        return read_correlation_csv(&text).or_fail(&[]).map(|c| (c, false));
    }
    let p = src.group.data.as_ref().expect("clap enforces one source");
    let text = inputs.read(p)?;
    let data = read_data_csv(&text).or_fail(&[])?;
    let scores = normal_scores(&data, src.seed).or_fail(data.names())?;
    Ok((empirical_correlation(&scores).or_fail(data.names())?, true))
}

fn parse_names(list: &str, names: &[String]) -> Result<VariableSet, Failure> {
    let mut set = VariableSet::EMPTY;
    for raw in list.split(',') {
        let n = raw.trim();
        if n.is_empty() {
            continue;
        }
        let i = names
            .iter()
            .position(|m| m == n)
            .ok_or_else(|| Failure::input(format!("unknown variable {n:?}")))?;
        set = set.with(i);
    }
    Ok(set)
}

fn parse_universe(spec: &str, names: &[String]) -> Result<VariableSet, Failure> {
    if spec == "all" {
        Ok(VariableSet::full(names.len()))
    } else {
        parse_names(spec, names)
    }
}

fn units(u: UnitArg) -> Units {
    match u {
        UnitArg::Mbits => Units::Mbits,
        UnitArg::Nats => Units::Nats,
    }
}

fn check_tolerance(name: &str, v: f64) -> Result<(), Failure> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Failure::input(format!(
            "{name} must be a finite nonnegative number, got {v}"
        )))
    }
}

/// Files to write once every computation has succeeded.
struct Outputs {
    files: Vec<(PathBuf, String)>,
    stdout: String,
}

impl Outputs {
    fn new() -> Self {
        Outputs {
            files: Vec::new(),
            stdout: String::new(),
        }
    }

    fn emit(&mut self, target: &Option<PathBuf>, content: String) {
        match target {
            Some(p) => self.files.push((p.clone(), content)),
            None => self.stdout.push_str(&content),
        }
    }
}

fn render(doc: &ReportDocument, format: Format) -> String {
    match format {
        Format::Json => doc.to_json(),
        Format::Text => doc.to_text(),
    }
}

fn snap(entries: Vec<(VariableSet, f64)>, zero_tol: f64) -> Vec<(VariableSet, f64)> {
    entries
        .into_iter()
        .map(|(s, d)| (s, if d.abs() <= zero_tol { 0.0 } else { d }))
        .collect()
}

fn annotate(
    findings: &mut [crate::synergy::SynergyFinding],
    corr: &CorrelationMatrix,
    detection: &Detection,
) -> Result<(), Failure> {
    if let Some(r) = &detection.response {
        let idx = corr
            .index_of(r)
            .ok_or_else(|| Failure::input(format!("unknown response variable {r:?}")))?;
        annotate_suppression(findings, corr, idx, detection.suppression_tol)
            .or_fail(corr.names())?;
    }
    Ok(())
}

fn execute(cmd: Command, out: &mut Outputs) -> Result<(), Failure> {
    let mut inputs = Inputs::new();
    match cmd {
        Command::Deltas {
            source,
            universe,
            common,
        } => {
            let (corr, from_data) = load_source(&source, &mut inputs)?;
            let names = corr.names().to_vec();
            let zero_tol = common.zero_tol.unwrap_or(if from_data {
                DATA_ZERO_TOL
            } else {
                ANALYTIC_ZERO_TOL
            });
            check_tolerance("--zero-tol", zero_tol)?;
            let u = parse_universe(&universe, &names)?;
            let oracle = EntropyOracle::gaussian(corr);
            let table = forward_differences(&oracle, u).or_fail(&names)?;
            let mut meta = ReportMetadata::new(
                "deltas",
                inputs.fingerprint(),
                units(common.units),
                zero_tol,
            );
            meta.seed = from_data.then_some(source.seed);
            let doc = ReportDocument::new(meta)
                .with_deltas(&names, snap(table.entries(), zero_tol))
                .with_entropies(&oracle, u)
                .or_fail(&names)?;
            out.emit(&common.out, render(&doc, common.format));
        }
        Command::TableDeltas {
            counts,
            universe,
            common,
        } => {
            let text = inputs.read(&counts)?;
            let table = read_counts_csv(&text).or_fail(&[])?;
            let names = table.names().to_vec();
            let zero_tol = common.zero_tol.unwrap_or(ANALYTIC_ZERO_TOL);
            check_tolerance("--zero-tol", zero_tol)?;
            let u = parse_universe(&universe, &names)?;
            let oracle = EntropyOracle::categorical(table);
            let deltas = forward_differences(&oracle, u).or_fail(&names)?;
            let meta = ReportMetadata::new(
                "table-deltas",
                inputs.fingerprint(),
                units(common.units),
                zero_tol,
            );
            let doc = ReportDocument::new(meta)
                .with_deltas(&names, snap(deltas.entries(), zero_tol))
                .with_entropies(&oracle, u)
                .or_fail(&names)?;
            out.emit(&common.out, render(&doc, common.format));
        }
        Command::Synergies {
            source,
            universe,
            given,
            detection,
            common,
        } => {
            let (corr, from_data) = load_source(&source, &mut inputs)?;
            let names = corr.names().to_vec();
            let zero_tol = common.zero_tol.unwrap_or(if from_data {
                DATA_ZERO_TOL
            } else {
                ANALYTIC_ZERO_TOL
            });
            check_tolerance("--zero-tol", zero_tol)?;
            check_tolerance("--threshold", detection.threshold)?;
            let given = match &given {
                Some(g) => parse_names(g, &names)?,
                None => VariableSet::EMPTY,
            };
            let u = parse_universe(&universe, &names)?.difference(given);
            let triples: Vec<_> = u.subsets_of_size(3).collect();
            let oracle = EntropyOracle::gaussian(corr.clone());
            let mut findings =
                detect_synergies(&oracle, &triples, given, detection.threshold).or_fail(&names)?;
            if given.is_empty() {
                annotate(&mut findings, &corr, &detection)?;
            }
            let mut meta = ReportMetadata::new(
                "synergies",
                inputs.fingerprint(),
                units(common.units),
                zero_tol,
            );
            meta.threshold = Some(detection.threshold);
            meta.seed = from_data.then_some(source.seed);
            let doc = ReportDocument::new(meta).with_findings(&names, &findings);
            out.emit(&common.out, render(&doc, common.format));
        }
        Command::Scan {
            graph,
            source,
            max_order,
            moralize,
            skeleton,
            dot,
            ecdf: ecdf_path,
            detection,
            common,
        } => {
            let (corr, from_data) = load_source(&source, &mut inputs)?;
            let names = corr.names().to_vec();
            let zero_tol = common.zero_tol.unwrap_or(if from_data {
                DATA_ZERO_TOL
            } else {
                ANALYTIC_ZERO_TOL
            });
            check_tolerance("--zero-tol", zero_tol)?;
            check_tolerance("--threshold", detection.threshold)?;
            let edges_text = inputs.read(&graph)?;
            let conversion = match (moralize, skeleton) {
                (true, _) => Some(DirectedConversion::Moralize),
                (_, true) => Some(DirectedConversion::Skeleton),
                _ => None,
            };
            let g = read_edge_list(&edges_text, &names)
                .and_then(|e| e.into_graph(names.clone(), conversion))
                .or_fail(&names)?;
            let oracle = EntropyOracle::gaussian(corr.clone());
            let mut result =
                cluster_scan(&g, &oracle, max_order, detection.threshold).or_fail(&names)?;
            annotate(&mut result.findings, &corr, &detection)?;
            let mut meta =
                ReportMetadata::new("scan", inputs.fingerprint(), units(common.units), zero_tol);
            meta.threshold = Some(detection.threshold);
            meta.max_order = Some(max_order);
            meta.seed = from_data.then_some(source.seed);
            let cluster_rows: Vec<_> = result
                .clusters
                .iter()
                .map(|&c| (c, result.table.get(c).expect("visited clusters are stored")))
                .collect();
            let doc = ReportDocument::new(meta)
                .with_deltas(&names, snap(cluster_rows, zero_tol))
                .with_findings(&names, &result.findings);
            if let Some(p) = &dot {
                let coloured = colour_synergies(&g, &result.findings).or_fail(&names)?;
                out.files.push((p.clone(), coloured.to_dot()));
            }
            if let Some(p) = &ecdf_path {
                let values: Vec<f64> = result.cluster_deltas(3).iter().map(|d| d.1).collect();
                let mut csv = String::from("delta,cumulative\n");
                for (x, f) in ecdf(&values) {
                    csv.push_str(&format!("{},{}\n", units(common.units).present(x), f));
                }
                out.files.push((p.clone(), csv));
            }
            out.emit(&common.out, render(&doc, common.format));
        }
        Command::Scores {
            data,
            seed,
            out: out_path,
            corr_out,
        } => {
            let text = inputs.read(&data)?;
            let d = read_data_csv(&text).or_fail(&[])?;
            let scores = normal_scores(&d, seed).or_fail(d.names())?;
            if let Some(p) = &corr_out {
                let c = empirical_correlation(&scores).or_fail(d.names())?;
                out.files.push((p.clone(), write_correlation_csv(&c)));
            }
            out.emit(&out_path, scores.to_csv());
        }
    }
    Ok(())
}

/// Runs the command line and returns the process exit code: 0 on success, 2
/// for input errors, 3 for numeric failures.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                2
            } else {
                let _ = write!(stdout, "{text}");
                0
            };
        }
    };
    let mut outputs = Outputs::new();
    if let Err(f) = execute(cli.command, &mut outputs) {
        let _ = writeln!(stderr, "error: {}", f.message);
        return f.code;
    }
    for (path, content) in &outputs.files {
        if let Err(e) = std::fs::write(path, content) {
            let _ = writeln!(stderr, "error: cannot write {}: {e}", path.display());
            return 2;
        }
    }
    let _ = stdout.write_all(outputs.stdout.as_bytes());
    0
}
