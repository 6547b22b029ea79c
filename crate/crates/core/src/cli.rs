//! Command-line front end.
//!
//! Every command reads a data set (a CSV file or a bundled fixture), writes
//! one CSV artifact to `--output` (stdout by default) and a one-line JSON
//! provenance record next to it (`<output>.provenance.json`, or stderr when
//! writing to stdout). Output depends only on the flags, so reruns with the
//! same seed are byte-identical.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::copula::{tail_dependence_estimate, PuCopula, TableConfig};
use crate::error::{CopulaError, Result};
use crate::families::{FamilyKind, PartitionFamily};
use crate::patchwork::{CellCopulaKind, PatchworkCopula};
use crate::ranks::{compute_ranks_with, read_data_csv, write_ranks_csv, TiePolicy};
use crate::risk::{self, MarginalKind};
use crate::sim;
use crate::fixtures;

/// Exit status for malformed command lines (clap's own convention).
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_PARSE: i32 = 3;
pub const EXIT_TIES: i32 = 4;
pub const EXIT_INVALID: i32 = 5;
pub const EXIT_IO: i32 = 6;

#[derive(Debug, Parser)]
#[command(name = "pucopula", version, about = "Data-driven partition-of-unity copulas")]
pub struct Cli {
    /// Worker threads for sampling (defaults to all cores).
    #[arg(long, global = true, env = "PUCOPULA_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rank each data column (`i,r1,...,rd`).
    Ranks {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Discrete joint table of the partition indices (`i,j,p`).
    Pij {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Copula density on a regular interior grid (`u,v,c`).
    Density {
        #[command(flatten)]
        model: ModelArgs,
        /// Grid points per axis, placed at i/(grid+1).
        #[arg(long, default_value_t = 101)]
        grid: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Draw copula samples (`u1,...,ud`).
    Sample {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        mc: McArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Value-at-Risk curve of the summed losses (`level,quantile`).
    ///
    /// Quantiles are the ceil(n*p)-th order statistic of the simulated sums.
    Var {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        mc: McArgs,
        /// Marginal model per coordinate: empirical or lognormal.
        #[arg(long, default_value_t = MarginalKind::Empirical)]
        marginal: MarginalKind,
        /// Explicit quantile levels; overrides --tail.
        #[arg(long, value_delimiter = ',')]
        levels: Vec<f64>,
        /// Report the largest fraction of simulated sums.
        #[arg(long, default_value_t = 0.1)]
        tail: f64,
        /// Also write every simulated sum to this file.
        #[arg(long)]
        sums_output: Option<PathBuf>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Upper tail-dependence estimate P(V>t | U>t) from samples (`t,lambda,n`).
    Taildep {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        mc: McArgs,
        #[arg(long, default_value_t = 0.999)]
        t: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Data CSV, one observation per row.
    #[arg(long, conflicts_with = "fixture", required_unless_present = "fixture")]
    pub input: Option<PathBuf>,
    /// Bundled data set (paper-s4: 20 paired losses).
    #[arg(long)]
    pub fixture: Option<String>,
    /// Break ties by input order instead of failing.
    #[arg(long)]
    pub allow_ties: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Partition family, one for all coordinates or a comma list.
    #[arg(long, value_delimiter = ',', required = true)]
    pub family: Vec<FamilyKind>,
    /// Parameter of the first coordinate's family.
    #[arg(long, conflicts_with = "params")]
    pub a: Option<f64>,
    /// Parameter of the second coordinate's family.
    #[arg(long, requires = "a")]
    pub b: Option<f64>,
    /// One parameter per coordinate.
    #[arg(long, value_delimiter = ',')]
    pub params: Vec<f64>,
    /// Cell copula of the patchwork driver: upper, lower or rook.
    #[arg(long, default_value_t = CellCopulaKind::Rook)]
    pub shuffle: CellCopulaKind,
    /// Total truncation budget for infinite families.
    #[arg(long, default_value_t = 1e-10)]
    pub eps: f64,
    /// Largest index kept per coordinate.
    #[arg(long, default_value_t = 2048)]
    pub max_index: u32,
    /// Rescale the table to total mass 1.
    #[arg(long)]
    pub renormalize: bool,
}

#[derive(Debug, Clone, Args)]
pub struct McArgs {
    /// Random seed (required; there is no time-based default).
    #[arg(long, required = true)]
    pub seed: u64,
    /// Number of draws.
    #[arg(long, default_value_t = 1_000_000)]
    pub n: usize,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output CSV path; stdout when omitted.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

/// Resolved, serializable description of a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: &'static str,
    pub input: Option<PathBuf>,
    pub fixture: Option<String>,
    pub allow_ties: bool,
    pub families: Vec<FamilyKind>,
    pub params: Vec<f64>,
    pub shuffle: Option<CellCopulaKind>,
    pub seed: Option<u64>,
    pub n_sims: Option<usize>,
    pub truncation_eps: Option<f64>,
    pub max_index: Option<u32>,
    pub renormalize: bool,
    pub grid: Option<usize>,
    pub marginal: Option<MarginalKind>,
    pub levels: Vec<f64>,
    pub tail: Option<f64>,
    pub t: Option<f64>,
    pub output: Option<PathBuf>,
    pub sums_output: Option<PathBuf>,
}

impl RunConfig {
    fn base(command: &'static str, data: &DataArgs, out: &OutputArgs) -> Self {
        Self {
            command,
            input: data.input.clone(),
            fixture: data.fixture.clone(),
            allow_ties: data.allow_ties,
            families: Vec::new(),
            params: Vec::new(),
            shuffle: None,
            seed: None,
            n_sims: None,
            truncation_eps: None,
            max_index: None,
            renormalize: false,
            grid: None,
            marginal: None,
            levels: Vec::new(),
            tail: None,
            t: None,
            output: out.output.clone(),
            sums_output: None,
        }
    }

    fn with_model(command: &'static str, m: &ModelArgs, out: &OutputArgs) -> Self {
        let mut params = m.params.clone();
        if let Some(a) = m.a {
            params = std::iter::once(a).chain(m.b).collect();
        }
        Self {
            families: m.family.clone(),
            params,
            shuffle: Some(m.shuffle),
            truncation_eps: Some(m.eps),
            max_index: Some(m.max_index),
            renormalize: m.renormalize,
            ..Self::base(command, &m.data, out)
        }
    }

    fn with_mc(mut self, mc: &McArgs) -> Self {
        self.seed = Some(mc.seed);
        self.n_sims = Some(mc.n);
        self
    }

    pub fn from_command(command: &Command) -> Self {
        match command {
            Command::Ranks { data, out } => Self::base("ranks", data, out),
            Command::Pij { model, out } => Self::with_model("pij", model, out),
            Command::Density { model, grid, out } => {
                Self { grid: Some(*grid), ..Self::with_model("density", model, out) }
            }
            Command::Sample { model, mc, out } => Self::with_model("sample", model, out).with_mc(mc),
            Command::Var { model, mc, marginal, levels, tail, sums_output, out } => Self {
                marginal: Some(*marginal),
                levels: levels.clone(),
                tail: Some(*tail),
                sums_output: sums_output.clone(),
                ..Self::with_model("var", model, out).with_mc(mc)
            },
            Command::Taildep { model, mc, t, out } => {
                Self { t: Some(*t), ..Self::with_model("taildep", model, out).with_mc(mc) }
            }
        }
    }

    fn is_stochastic(&self) -> bool {
        matches!(self.command, "sample" | "var" | "taildep")
    }
}

/// What a run reports besides its CSV artifact.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Summary {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rows: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncated_mass: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pruned_mass: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
}

#[derive(Serialize)]
struct Provenance<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    seed: Option<u64>,
    config: &'a RunConfig,
    #[serde(flatten)]
    summary: &'a Summary,
}

fn load_data(cfg: &RunConfig) -> Result<Vec<Vec<f64>>> {
    match (&cfg.input, &cfg.fixture) {
        (Some(path), _) => read_data_csv(File::open(path)?),
        (None, Some(name)) => fixtures::by_name(name)
            .ok_or_else(|| CopulaError::InvalidParameter(format!("unknown fixture '{name}'"))),
        (None, None) => Err(CopulaError::InvalidParameter("either --input or --fixture is required".into())),
    }
}

fn load_ranks(cfg: &RunConfig) -> Result<crate::RankData> {
    let ties = if cfg.allow_ties { TiePolicy::InputOrder } else { TiePolicy::Reject };
    compute_ranks_with(&load_data(cfg)?, ties)
}

fn build_copula(cfg: &RunConfig) -> Result<PuCopula> {
    let ranks = load_ranks(cfg)?;
    let d = ranks.dim();
    let kinds = match cfg.families.len() {
        1 => vec![cfg.families[0]; d],
        k if k == d => cfg.families.clone(),
        k => return Err(CopulaError::DimensionMismatch { expected: d, found: k }),
    };
    if cfg.params.len() != d {
        return Err(CopulaError::InvalidParameter(format!(
            "{d}-dimensional data needs {d} family parameters, got {}",
            cfg.params.len()
        )));
    }
    let families = kinds
        .iter()
        .zip(&cfg.params)
        .map(|(&k, &a)| PartitionFamily::new(k, a))
        .collect::<Result<Vec<_>>>()?;
    let driver = PatchworkCopula::new(ranks, cfg.shuffle.unwrap_or(CellCopulaKind::Rook))?;
    let config = TableConfig {
        eps: cfg.truncation_eps.unwrap_or(1e-10),
        max_index: u64::from(cfg.max_index.unwrap_or(2048)),
        renormalize: cfg.renormalize,
        ..TableConfig::default()
    };
    PuCopula::with_config(families, driver, config)
}

fn write_rows<W: Write>(out: &mut W, header: &[String], rows: impl Iterator<Item = Vec<f64>>) -> Result<usize> {
    writeln!(out, "{}", header.join(","))?;
    let mut count = 0;
    let mut line = String::new();
    for row in rows {
        line.clear();
        for (k, v) in row.iter().enumerate() {
            if k > 0 {
                line.push(',');
            }
            line.push_str(&format!("{v:?}"));
        }
        writeln!(out, "{line}")?;
        count += 1;
    }
    Ok(count)
}

/// Executes one command, writing its CSV to `out`.
pub fn run<W: Write>(cfg: &RunConfig, out: &mut W) -> Result<Summary> {
    if cfg.is_stochastic() && cfg.seed.is_none() {
        return Err(CopulaError::InvalidParameter("stochastic commands require --seed".into()));
    }
    let mut summary = Summary::default();
    match cfg.command {
        "ranks" => {
            let ranks = load_ranks(cfg)?;
            write_ranks_csv(&ranks, &mut *out)?;
            summary.rows = Some(ranks.n());
        }
        "pij" => {
            let table = build_copula(cfg)?.compute_pij()?;
            table.write_csv(&mut *out)?;
            summary.rows = Some(table.len());
            summary.truncated_mass = Some(table.residual());
            summary.pruned_mass = Some(table.pruned_mass());
        }
        "density" => {
            let cop = build_copula(cfg)?;
            if cop.dim() != 2 {
                return Err(CopulaError::InvalidParameter("density grids are two-dimensional".into()));
            }
            let m = cfg.grid.unwrap_or(101);
            if m == 0 {
                return Err(CopulaError::InvalidParameter("--grid must be positive".into()));
            }
            let table = cop.compute_pij()?;
            let axis: Vec<f64> = (1..=m).map(|i| i as f64 / (m + 1) as f64).collect();
            let c = cop.density_grid(&table, &axis, &axis)?;
            let rows = (0..m * m).map(|k| vec![axis[k / m], axis[k % m], c[k]]);
            summary.rows = Some(write_rows(out, &["u".into(), "v".into(), "c".into()], rows)?);
            summary.truncated_mass = Some(table.residual());
        }
        "sample" => {
            let cop = build_copula(cfg)?;
            let d = cop.dim();
            let points = sim::draw(&cop, cfg.n_sims.unwrap_or(0), cfg.seed.unwrap_or_default());
            let header: Vec<String> = (1..=d).map(|k| format!("u{k}")).collect();
            summary.rows = Some(write_rows(out, &header, points.chunks_exact(d).map(<[f64]>::to_vec))?);
        }
        "var" => {
            let data = load_data(cfg)?;
            let cop = build_copula(cfg)?;
            let kind = cfg.marginal.unwrap_or_default();
            let margins = (0..cop.dim())
                .map(|k| risk::fit_marginal(kind, &data.iter().map(|r| r[k]).collect::<Vec<_>>()))
                .collect::<Result<Vec<_>>>()?;
            let n = cfg.n_sims.unwrap_or(0);
            if n == 0 {
                return Err(CopulaError::InvalidParameter("--n must be positive".into()));
            }
            let mut sums = risk::simulate_portfolio(&cop, &margins, n, cfg.seed.unwrap_or_default())?;
            if let Some(path) = &cfg.sums_output {
                risk::write_sums_csv(&sums, BufWriter::new(File::create(path)?))?;
            }
            sums.sort_by(f64::total_cmp);
            let levels = if cfg.levels.is_empty() {
                risk::tail_levels(n, cfg.tail.unwrap_or(0.1))
            } else {
                cfg.levels.clone()
            };
            let curve = risk::quantiles_of_sorted(&sums, &levels)?;
            curve.write_csv(&mut *out)?;
            summary.rows = Some(curve.len());
        }
        "taildep" => {
            let cop = build_copula(cfg)?;
            if cop.dim() != 2 {
                return Err(CopulaError::InvalidParameter("tail dependence is estimated for pairs".into()));
            }
            let t = cfg.t.unwrap_or(0.999);
            let n = cfg.n_sims.unwrap_or(0);
            let points = sim::draw(&cop, n, cfg.seed.unwrap_or_default());
            let lambda = tail_dependence_estimate(points.chunks_exact(2), t)?;
            writeln!(out, "t,lambda,n")?;
            writeln!(out, "{t:?},{lambda:?},{n}")?;
            summary.rows = Some(1);
            summary.lambda = Some(lambda);
        }
        other => return Err(CopulaError::InvalidParameter(format!("unknown command '{other}'"))),
    }
    Ok(summary)
}

/// The one-line JSON provenance record for a finished run.
pub fn provenance_json(cfg: &RunConfig, summary: &Summary) -> String {
    let record = Provenance {
        tool: "pucopula",
        version: env!("CARGO_PKG_VERSION"),
        command: cfg.command,
        seed: cfg.seed,
        config: cfg,
        summary,
    };
    serde_json::to_string(&record).expect("provenance serializes")
}

pub fn provenance_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".provenance.json");
    PathBuf::from(name)
}

pub fn exit_code(err: &CopulaError) -> i32 {
    match err {
        CopulaError::Parse { .. } => EXIT_PARSE,
        CopulaError::Ties { .. } => EXIT_TIES,
        CopulaError::Io(_) => EXIT_IO,
        _ => EXIT_INVALID,
    }
}

/// Runs a parsed command line end to end and returns the process exit code.
pub fn main_with(cli: Cli) -> i32 {
    if let Some(threads) = cli.threads {
        // fails only if a pool already exists, which is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    let cfg = RunConfig::from_command(&cli.command);
    match execute(&cfg) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn execute(cfg: &RunConfig) -> Result<()> {
    match &cfg.output {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            let summary = run(cfg, &mut w)?;
            w.flush()?;
            let mut p = File::create(provenance_path(path))?;
            writeln!(p, "{}", provenance_json(cfg, &summary))?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            let summary = run(cfg, &mut w)?;
            w.flush()?;
            eprintln!("{}", provenance_json(cfg, &summary));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> RunConfig {
        let cli = Cli::try_parse_from(std::iter::once("pucopula").chain(args.iter().copied())).unwrap();
        RunConfig::from_command(&cli.command)
    }

    fn run_text(args: &[&str]) -> Result<String> {
        let mut buf = Vec::new();
        run(&parse(args), &mut buf)?;
        Ok(String::from_utf8(buf).unwrap())
    }

    #[test]
    fn ranks_of_fixture() {
        let text = run_text(&["ranks", "--fixture", "paper-s4"]).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "i,r1,r2");
        assert_eq!(lines[1], "1,4,9");
        assert_eq!(lines.len(), 21);
    }

    #[test]
    fn aligned_bernstein_table() {
        let text = run_text(&[
            "pij", "--fixture", "paper-s4", "--family", "bernstein", "--a", "20", "--b", "20", "--shuffle", "rook",
        ])
        .unwrap();
        let rows: Vec<&str> = text.lines().skip(1).collect();
        assert_eq!(rows.len(), 20);
        assert!(rows.iter().all(|r| r.ends_with(",5.0000000000000003e-2")));
    }

    #[test]
    fn seed_is_required_for_sampling() {
        let args = ["pucopula", "sample", "--fixture", "paper-s4", "--family", "poisson", "--a", "3", "--b", "4"];
        let err = Cli::try_parse_from(args).unwrap_err();
        assert_eq!(err.exit_code(), EXIT_USAGE);
    }

    #[test]
    fn parameter_count_must_match_dimension() {
        let err = run_text(&["pij", "--fixture", "paper-s4", "--family", "poisson", "--params", "3,4,5"]).unwrap_err();
        assert_eq!(exit_code(&err), EXIT_INVALID);
        let err = run_text(&["pij", "--fixture", "paper-s4", "--family", "poisson", "--a", "3"]).unwrap_err();
        assert_eq!(exit_code(&err), EXIT_INVALID);
    }

    #[test]
    fn mixed_families_and_provenance() {
        let cfg = parse(&[
            "taildep", "--fixture", "paper-s4", "--family", "negbinomial,bernstein", "--a", "17", "--b", "27",
            "--shuffle", "upper", "--seed", "3", "--n", "2000", "--t", "0.9",
        ]);
        let mut buf = Vec::new();
        let summary = run(&cfg, &mut buf).unwrap();
        let lambda = summary.lambda.unwrap();
        assert!((0.0..=1.0).contains(&lambda));
        let json: serde_json::Value = serde_json::from_str(&provenance_json(&cfg, &summary)).unwrap();
        assert_eq!(json["command"], "taildep");
        assert_eq!(json["seed"], 3);
        assert_eq!(json["config"]["families"][0], "negbinomial");
        assert_eq!(json["config"]["shuffle"], "upper");
    }
}
