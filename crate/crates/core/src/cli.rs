//! Command-line front end.
//!
//! Exit codes: 0 on success (impossible evidence included), 1 when an input
//! parses but fails validation, 2 on usage errors, unreadable files,
//! malformed JSON and unknown names.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::hmm::{self, ForwardBackward, HmmSpec};
use crate::io::{self, IoError};
use crate::jtree::{build_junction_tree, validate_junction_tree, JunctionTree};
use crate::model::{DiscreteNetwork, EvidenceSet, VarId};
use crate::oracle;
use crate::propagation::{CompiledQuery, PropagationError};
use crate::sampling::{self, SamplingError};

#[derive(Debug, Parser)]
#[command(
    name = "exactbp",
    version,
    about = "Exact inference in discrete Bayesian networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct QueryArgs {
    /// Network JSON file.
    network: PathBuf,
    /// Evidence JSON file.
    #[arg(long)]
    evidence: PathBuf,
    /// Junction tree JSON file (built with min-fill when absent).
    #[arg(long)]
    jtree: Option<PathBuf>,
    /// Root cluster index.
    #[arg(long, default_value_t = 0)]
    root: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a network (and optionally a junction tree for it).
    Validate {
        network: PathBuf,
        #[arg(long)]
        jtree: Option<PathBuf>,
    },
    /// Build a junction tree.
    Jtree {
        network: PathBuf,
        /// Print the tree as JSON.
        #[arg(long)]
        emit_json: bool,
    },
    /// Probability of the evidence.
    Logz {
        #[command(flatten)]
        query: QueryArgs,
        /// Also print the brute-force value.
        #[arg(long)]
        oracle: bool,
    },
    /// Posterior marginals.
    Marginals {
        #[command(flatten)]
        query: QueryArgs,
        /// Restrict output to these variables.
        #[arg(long = "var", value_name = "NAME")]
        vars: Vec<String>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Also print brute-force values.
        #[arg(long)]
        oracle: bool,
    },
    /// Most probable configuration.
    Map {
        #[command(flatten)]
        query: QueryArgs,
    },
    /// Draw configurations from the posterior.
    Sample {
        #[command(flatten)]
        query: QueryArgs,
        #[arg(short = 'n', long = "count")]
        count: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Simulate the precipitation HMM and decode it.
    HmmDemo {
        #[arg(long)]
        days: usize,
        #[arg(long)]
        seed: u64,
        /// Write the CSV here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Invalid(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Invalid(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Invalid(m) => m,
        }
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        if e.is_validation() {
            Failure::Invalid(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

impl From<PropagationError> for Failure {
    fn from(e: PropagationError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<SamplingError> for Failure {
    fn from(e: SamplingError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<oracle::OracleError> for Failure {
    fn from(e: oracle::OracleError) -> Self {
        Failure::Usage(format!("oracle: {e}"))
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

/// Ten significant digits: fixed notation for magnitudes in `[1e-4, 1e10)`,
/// scientific otherwise.
pub fn fmt_sig(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0.000000000".into();
    }
    let sci = format!("{x:.9e}");
    let exp: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
    if (-4..10).contains(&exp) {
        format!("{:.*}", (9 - exp) as usize, x)
    } else {
        sci
    }
}

/// Scientific notation with ten significant digits.
pub fn fmt_sci(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.9e}")
    } else {
        fmt_sig(x)
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn load_network(path: &Path) -> Result<DiscreteNetwork, Failure> {
    io::parse_network(&read(path)?).map_err(|e| with_path(path, e))
}

fn with_path(path: &Path, e: IoError) -> Failure {
    let f = Failure::from(e);
    let msg = format!("{}: {}", path.display(), f.message());
    match f {
        Failure::Usage(_) => Failure::Usage(msg),
        Failure::Invalid(_) => Failure::Invalid(msg),
    }
}

struct Loaded {
    net: DiscreteNetwork,
    ev: EvidenceSet,
    jt: JunctionTree,
    root: usize,
}

fn load_query(q: &QueryArgs) -> Result<Loaded, Failure> {
    let net = load_network(&q.network)?;
    let ev =
        io::parse_evidence(&net, &read(&q.evidence)?).map_err(|e| with_path(&q.evidence, e))?;
    let jt = match &q.jtree {
        Some(p) => io::parse_junction_tree(&net, &read(p)?).map_err(|e| with_path(p, e))?,
        None => build_junction_tree(&net),
    };
    if q.root >= jt.len() {
        return Err(Failure::Usage(format!(
            "root {} out of range: the tree has {} clusters",
            q.root,
            jt.len()
        )));
    }
    Ok(Loaded {
        net,
        ev,
        jt,
        root: q.root,
    })
}

fn names_of(net: &DiscreteNetwork, vars: &[VarId]) -> String {
    vars.iter()
        .map(|&v| net.variable(v).name.as_str())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Runs the command line `args` (program name first), writing to `out` and
/// `err`, and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message());
            f.code()
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<(), Failure> {
    match cmd {
        Command::Validate { network, jtree } => validate(&network, jtree.as_deref(), out),
        Command::Jtree { network, emit_json } => jtree(&network, emit_json, out),
        Command::Logz { query, oracle } => logz(&query, oracle, out),
        Command::Marginals {
            query,
            vars,
            format,
            oracle,
        } => marginals(&query, &vars, format, oracle, out),
        Command::Map { query } => map(&query, out),
        Command::Sample { query, count, seed } => sample(&query, count, seed, out),
        Command::HmmDemo {
            days,
            seed,
            out: path,
        } => hmm_demo(days, seed, path.as_deref(), out),
    }
}

fn validate(network: &Path, jtree: Option<&Path>, out: &mut dyn Write) -> Result<(), Failure> {
    let net = load_network(network)?;
    writeln!(out, "network ok: {} variables", net.len())?;
    if let Some(p) = jtree {
        let jt = io::parse_junction_tree_unchecked(&net, &read(p)?).map_err(|e| with_path(p, e))?;
        let report = validate_junction_tree(&net, &jt);
        if !report.is_ok() {
            return Err(Failure::Invalid(format!(
                "{}: invalid junction tree\n{report}",
                p.display()
            )));
        }
        writeln!(out, "junction tree ok: {} clusters", jt.len())?;
    }
    Ok(())
}

fn jtree(network: &Path, emit_json: bool, out: &mut dyn Write) -> Result<(), Failure> {
    let net = load_network(network)?;
    let jt = build_junction_tree(&net);
    if emit_json {
        writeln!(out, "{}", io::junction_tree_to_json(&net, &jt))?;
        return Ok(());
    }
    writeln!(
        out,
        "clusters={} max_cluster_size={}",
        jt.len(),
        jt.max_cluster_size()
    )?;
    for (i, c) in jt.clusters().iter().enumerate() {
        let owned = jt.owned(i);
        writeln!(
            out,
            "C{i}: {} | owns: {}",
            names_of(&net, c),
            names_of(&net, &owned)
        )?;
    }
    for &(a, b) in jt.edges() {
        writeln!(out, "C{a} - C{b}: {}", names_of(&net, &jt.separator(a, b)))?;
    }
    Ok(())
}

fn logz(q: &QueryArgs, with_oracle: bool, out: &mut dyn Write) -> Result<(), Failure> {
    let l = load_query(q)?;
    let mut cq = CompiledQuery::new(&l.net, &l.jt, &l.ev)?;
    cq.inward(crate::propagation::Semiring::Sum, l.root)?;
    let lz = cq.log_evidence()?;
    writeln!(out, "p_evidence={}", fmt_sci(lz.exp()))?;
    writeln!(out, "log_p_evidence={}", fmt_sig(lz))?;
    if with_oracle {
        let p = oracle::evidence_probability(&l.net, &l.ev)?;
        writeln!(out, "oracle_p_evidence={}", fmt_sci(p))?;
        writeln!(out, "oracle_log_p_evidence={}", fmt_sig(p.ln()))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct MarginalRecord<'a> {
    variable: &'a str,
    state: &'a str,
    probability: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle_probability: Option<f64>,
}

fn rounded(x: f64) -> f64 {
    fmt_sig(x).parse().unwrap_or(x)
}

fn marginals(
    q: &QueryArgs,
    vars: &[String],
    format: Format,
    with_oracle: bool,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    let l = load_query(q)?;
    let selected: Vec<VarId> = if vars.is_empty() {
        l.net.ids().collect()
    } else {
        vars.iter()
            .map(|n| {
                l.net
                    .find(n)
                    .ok_or_else(|| Failure::Usage(format!("unknown variable '{n}'")))
            })
            .collect::<Result<_, _>>()?
    };
    let mut cq = CompiledQuery::new(&l.net, &l.jt, &l.ev)?;
    cq.calibrate(l.root)?;
    let lz = cq.log_evidence()?;
    if lz == f64::NEG_INFINITY {
        writeln!(out, "log_p_evidence=-inf")?;
        return Ok(());
    }
    let exact = if with_oracle {
        Some(oracle::marginals(&l.net, &l.ev)?)
    } else {
        None
    };
    let mut records = Vec::new();
    for &u in &selected {
        let post = cq.variable_posterior(u)?;
        let var = l.net.variable(u);
        for (s, p) in post.iter().enumerate() {
            records.push(MarginalRecord {
                variable: &var.name,
                state: &var.states[s],
                probability: *p,
                oracle_probability: exact.as_ref().map(|m| m[u.0][s]),
            });
        }
    }
    match format {
        Format::Csv => {
            let header = if with_oracle {
                "variable,state,probability,oracle_probability"
            } else {
                "variable,state,probability"
            };
            writeln!(out, "{header}")?;
            for r in &records {
                write!(out, "{},{},{}", r.variable, r.state, fmt_sig(r.probability))?;
                if let Some(o) = r.oracle_probability {
                    write!(out, ",{}", fmt_sig(o))?;
                }
                writeln!(out)?;
            }
        }
        Format::Json => {
            for r in &mut records {
                r.probability = rounded(r.probability);
                r.oracle_probability = r.oracle_probability.map(rounded);
            }
            writeln!(
                out,
                "{}",
                serde_json::to_string_pretty(&records).expect("records serialize")
            )?;
        }
    }
    Ok(())
}

fn map(q: &QueryArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let l = load_query(q)?;
    let mut cq = CompiledQuery::new(&l.net, &l.jt, &l.ev)?;
    let m = match cq.map_assignment(l.root) {
        Ok(m) => m,
        Err(PropagationError::ImpossibleEvidence) => {
            writeln!(out, "log_p_evidence=-inf")?;
            return Ok(());
        }
        Err(e) => return Err(e.into()),
    };
    writeln!(out, "max_joint={}", fmt_sci(m.log_value.exp()))?;
    writeln!(out, "log_max_joint={}", fmt_sig(m.log_value))?;
    writeln!(out, "variable,state")?;
    for (u, &s) in m.assignment.iter().enumerate() {
        let var = l.net.variable(VarId(u));
        writeln!(out, "{},{}", var.name, var.states[s])?;
    }
    Ok(())
}

fn sample(q: &QueryArgs, count: usize, seed: u64, out: &mut dyn Write) -> Result<(), Failure> {
    let l = load_query(q)?;
    let mut cq = CompiledQuery::new(&l.net, &l.jt, &l.ev)?;
    let draws = match sampling::sample_posterior(&mut cq, l.root, seed, count) {
        Ok(d) => d,
        Err(SamplingError::ImpossibleEvidence) => {
            writeln!(out, "log_p_evidence=-inf")?;
            return Ok(());
        }
        Err(e) => return Err(e.into()),
    };
    let header: Vec<&str> = l.net.variables().iter().map(|v| v.name.as_str()).collect();
    writeln!(out, "{}", header.join(","))?;
    for d in draws {
        let row: Vec<&str> = d
            .iter()
            .enumerate()
            .map(|(u, &s)| l.net.variable(VarId(u)).states[s].as_str())
            .collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

fn hmm_demo(
    days: usize,
    seed: u64,
    path: Option<&Path>,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    if days == 0 {
        return Err(Failure::Usage("--days must be at least 1".into()));
    }
    let spec = HmmSpec::precipitation(days);
    let (s, y) = hmm::simulate(&spec, seed);
    let fb = ForwardBackward::compute(&spec, &y).map_err(|e| Failure::Usage(e.to_string()))?;
    let mut text = String::from("day,y,true_state,posterior_L\n");
    for i in 0..days {
        let post = fb.posterior(i).map_err(|e| Failure::Usage(e.to_string()))?;
        text.push_str(&format!(
            "{},{},{},{}\n",
            i + 1,
            y[i],
            spec.states[s[i]],
            fmt_sig(post[hmm::LOW])
        ));
    }
    match path {
        Some(p) => {
            fs::write(p, text).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?;
            writeln!(out, "wrote {} days to {}", days, p.display())?;
        }
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(fmt_sig(8.0 / 15.0), "0.5333333333");
        assert_eq!(fmt_sig(0.4), "0.4000000000");
        assert_eq!(fmt_sig(1.0), "1.000000000");
        assert_eq!(fmt_sig(0.0), "0.000000000");
        assert_eq!(fmt_sig(-8.720637), "-8.720637000");
        assert_eq!(fmt_sig(1.632e-4), "0.0001632000000");
        assert_eq!(fmt_sig(1.632e-5), "1.632000000e-5");
        assert_eq!(fmt_sig(12345678901.0), "1.234567890e10");
        assert_eq!(fmt_sig(f64::NEG_INFINITY), "-inf");
        assert_eq!(fmt_sci(1.632e-4), "1.632000000e-4");
    }

    #[test]
    fn usage_errors_exit_2() {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        assert_eq!(run(["exactbp", "frobnicate"], &mut o, &mut e), 2);
        assert_eq!(run(["exactbp", "logz", "x.json"], &mut o, &mut e), 2);
        assert_eq!(
            run(["exactbp", "validate", "/nonexistent.json"], &mut o, &mut e),
            2
        );
    }

    #[test]
    fn help_exits_0() {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        assert_eq!(run(["exactbp", "--help"], &mut o, &mut e), 0);
        assert!(String::from_utf8(o).unwrap().contains("marginals"));
    }
}
