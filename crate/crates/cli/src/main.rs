mod commands;
mod parse;
mod svg;

use clap::{Args, Parser, Subcommand};
use isoradial::elliptic::EllipticContext;
use isoradial::isograph::{GraphSpec, PeriodicGraph};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Massive Laplacians on isoradial graphs: Green functions, forests,
/// spectral curves, free energy and star-triangle checks.
///
/// Settings come from flags first, then the `--spec` file, then defaults.
/// Tables go to stdout as CSV and, with `--out`, to `<out>/<name>.csv`.
/// Exit status: 0 success, 1 invalid input or violated invariant,
/// 2 numerical non-convergence.
#[derive(Parser, Debug)]
#[command(name = "isoradial", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Named graph: square, triangular, hexagonal or paper-fig4 [default: square]
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Graph spec JSON: `tracks` (+ `parity`) or `preset`, optionally `k`, `k2`, `seed`
    #[arg(long, global = true)]
    spec: Option<PathBuf>,
    /// Elliptic modulus, 0 < k < 1 [default: 0.5]
    #[arg(long, global = true, conflicts_with = "k2")]
    k: Option<f64>,
    /// The modulus squared, as an alternative to --k
    #[arg(long, global = true)]
    k2: Option<f64>,
    /// RNG seed [default: 1]
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for tables and artifacts (artifact commands default to ./isoradial-out)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Green function for vertex pairs
    Green {
        /// Pairs `x:y`, a vertex being `(a,b)` (vertex 0 of cell (a,b)) or `(i,a,b)`
        #[arg(long, default_value = "(0,0):(3,2)")]
        pairs: String,
        /// local-contour, local-residue, truncated-solve or fourier
        #[arg(long, default_value = "local-contour")]
        method: String,
        /// Also compute the truncated-solve value and the difference
        #[arg(long)]
        oracle: bool,
    },
    /// Saddle-point decay rates and the asymptotic Green function
    Asymptotics {
        /// Lattice directions `(a,b)`
        #[arg(long, default_value = "(1,0) (1,1) (2,1)")]
        dirs: String,
        /// Multiple of each direction to evaluate at
        #[arg(long, default_value_t = 20)]
        length: i64,
    },
    /// Sample rooted spanning forests on a torus (JSON + SVG)
    SampleForest {
        /// Torus size in fundamental domains
        #[arg(long, default_value = "8x8")]
        torus: String,
        #[arg(long, default_value_t = 1)]
        count: usize,
    },
    /// Single edge and root probabilities on a torus and on the plane
    Marginals {
        #[arg(long, default_value = "4x4")]
        torus: String,
        /// Forest samples for empirical frequencies (0 skips them)
        #[arg(long, default_value_t = 0)]
        samples: usize,
    },
    /// Amoeba of the spectral curve (SVG + CSV)
    Amoeba {
        /// Side of the torus grid sampled on the curve
        #[arg(long, default_value_t = 120)]
        grid: usize,
    },
    /// Characteristic polynomial coefficients and Newton polygon
    Spectral,
    /// Free energy per fundamental domain, closed form and Fourier
    FreeEnergy {
        /// Tolerance on successive Fourier grids
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Small-k expansion of the free energy (k is not used)
    PhaseScan {
        /// Moduli in (0, 0.2], at least six
        #[arg(long, default_value = "0.01,0.02,0.04,0.06,0.08,0.1,0.15,0.2")]
        ks: String,
    },
    /// Star-triangle (Yang–Baxter) residuals for one star
    CheckZinv {
        /// Three half-angles summing to π; `pi/n` is accepted
        #[arg(long, default_value = "pi/3,pi/3,pi/3")]
        angles: String,
    },
    /// Run the quick invariant suite
    Selftest,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("invariant violated: {0}")]
    Violated(String),
    #[error("no convergence: {0}")]
    NotConverged(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::NotConverged(_) => 2,
            _ => 1,
        }
    }
}

macro_rules! invalid_from {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Invalid(e.to_string())
            }
        }
    )*};
}
invalid_from!(
    isoradial::isograph::GraphError,
    isoradial::elliptic::EllipticError,
    isoradial::asymptotics::AsymptoticError,
    isoradial::spectral::SpectralError,
    isoradial::zinv::ZinvError
);

impl From<isoradial::green::GreenError> for CliError {
    fn from(e: isoradial::green::GreenError) -> Self {
        match e {
            isoradial::green::GreenError::NotConverged { .. } => CliError::NotConverged(e.to_string()),
            _ => CliError::Invalid(e.to_string()),
        }
    }
}

impl From<isoradial::forest::ForestError> for CliError {
    fn from(e: isoradial::forest::ForestError) -> Self {
        match e {
            isoradial::forest::ForestError::NotConverged(_) => CliError::NotConverged(e.to_string()),
            _ => CliError::Invalid(e.to_string()),
        }
    }
}

#[derive(serde::Deserialize)]
struct SpecFile {
    #[serde(flatten)]
    graph: GraphSpec,
    k: Option<f64>,
    k2: Option<f64>,
    seed: Option<u64>,
}

/// Resolved run configuration.
pub struct Config {
    pub graph: PeriodicGraph,
    pub graph_name: String,
    k: f64,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl Config {
    fn resolve(c: &Common) -> Result<Self, CliError> {
        let file = match &c.spec {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::Invalid(format!("spec {}: {e}", p.display())))?;
                Some(serde_json::from_str::<SpecFile>(&text).map_err(|e| CliError::Invalid(format!("spec {}: {e}", p.display())))?)
            }
            None => None,
        };
        let (graph, graph_name) = match (&c.preset, &file) {
            (Some(p), _) => (PeriodicGraph::preset(p)?, p.clone()),
            (None, Some(f)) => {
                let name = f.graph.preset.clone().unwrap_or_else(|| c.spec.as_ref().unwrap().display().to_string());
                (f.graph.build()?, name)
            }
            (None, None) => (PeriodicGraph::preset("square")?, "square".to_string()),
        };
        let from_k2 = |x: f64| if x >= 0.0 { x.sqrt() } else { f64::NAN };
        let k = c
            .k
            .or(c.k2.map(from_k2))
            .or(file.as_ref().and_then(|f| f.k.or(f.k2.map(from_k2))))
            .unwrap_or(0.5);
        let seed = c.seed.or(file.as_ref().and_then(|f| f.seed)).unwrap_or(1);
        Ok(Config { graph, graph_name, k, seed, out: c.out.clone() })
    }

    /// The elliptic context; fails unless `0 < k < 1`.
    pub fn ctx(&self) -> Result<EllipticContext, CliError> {
        EllipticContext::new(self.k).map_err(|e| CliError::Invalid(format!("k: {e}")))
    }

    /// Directory for artifacts that only exist as files.
    pub fn artifact_dir(&self) -> Result<PathBuf, CliError> {
        let dir = self.out.clone().unwrap_or_else(|| PathBuf::from("isoradial-out"));
        std::fs::create_dir_all(&dir)?;
        Ok(dir)
    }
}

/// A CSV table, printed to stdout and saved under `--out` if set.
pub struct Table {
    pub name: &'static str,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &'static str, header: &[&'static str]) -> Self {
        Table { name, header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner().map_err(|e| CliError::Io(e.into_error()))
    }

    pub fn save(&self, dir: &Path) -> Result<(), CliError> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(format!("{}.csv", self.name)), self.to_csv()?)?;
        Ok(())
    }
}

fn emit(cfg: &Config, table: &Table) -> Result<(), CliError> {
    use std::io::Write;
    std::io::stdout().write_all(&table.to_csv()?)?;
    if let Some(dir) = &cfg.out {
        table.save(dir)?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = Config::resolve(&cli.common)?;
    let (table, violation) = commands::run(&cfg, &cli.cmd)?;
    emit(&cfg, &table)?;
    violation.map_or(Ok(()), |v| Err(CliError::Violated(v)))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
