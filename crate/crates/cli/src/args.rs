use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "arw", version, about = "Exact correlations and nodal-area variance for 3-d arithmetic random waves")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Worker threads for the data-parallel kernels (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Output file (default: stdout).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Directory for cached lattice sets and censuses.
    #[arg(long, global = true, env = "ARW_CACHE_DIR")]
    pub cache_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Enumerate lattice points on the sphere of radius sqrt(m).
    Lattice {
        #[command(flatten)]
        sel: MSelection,
        /// Emit only `m,N,admissible` per energy.
        #[arg(long)]
        summary: bool,
    },
    /// Exact correlation census and fitted growth exponents.
    Census {
        #[command(flatten)]
        sel: MSelection,
        #[command(flatten)]
        caps: CapArgs,
    },
    /// Angular moments, exact torus integrals, trace terms, leading-constant assembly.
    Moments {
        #[command(flatten)]
        sel: MSelection,
        #[arg(long, value_enum, default_value_t = MomentTable::Integrals)]
        table: MomentTable,
        /// Highest moment order for `--table angular`.
        #[arg(long, default_value_t = 8)]
        k_max: u32,
        #[arg(long)]
        grid_n: Option<usize>,
        #[command(flatten)]
        caps: CapArgs,
    },
    /// Kac-Rice variance by torus quadrature.
    Kacrice {
        #[command(flatten)]
        sel: MSelection,
        #[command(flatten)]
        quad: QuadArgs,
    },
    /// Monte-Carlo nodal-area ensembles.
    Montecarlo {
        #[command(flatten)]
        sel: MSelection,
        #[command(flatten)]
        mc: McArgs,
        /// Write per-sample areas to `<dir>/samples_m<m>.csv`.
        #[arg(long)]
        samples_dir: Option<PathBuf>,
    },
    /// Quadrature variance, optionally with Monte-Carlo, over a list of energies.
    VarianceSweep {
        #[command(flatten)]
        sel: MSelection,
        #[command(flatten)]
        quad: QuadArgs,
        #[command(flatten)]
        mc: McArgs,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MomentTable {
    /// Sixteen exact correlation-sum integrals with asymptotic budgets.
    Integrals,
    /// Trace terms of the conditioned covariance against predictions.
    Traces,
    /// Angular moments `B_k`.
    Angular,
    /// Rational assembly of the leading variance constant.
    Assembly,
}

#[derive(Args, Debug, Clone)]
pub struct MSelection {
    #[arg(long, conflicts_with_all = ["m_range", "m_list"])]
    pub m: Option<u64>,
    /// Inclusive range `a..b`.
    #[arg(long, conflicts_with = "m_list")]
    pub m_range: Option<String>,
    /// Comma-separated list.
    #[arg(long, value_delimiter = ',')]
    pub m_list: Option<Vec<u64>>,
}

impl MSelection {
    /// The selected energies and whether the user named a single one.
    pub fn resolve(&self) -> Result<(Vec<u64>, bool)> {
        let ms = match (&self.m, &self.m_range, &self.m_list) {
            (Some(m), _, _) => return check(vec![*m]).map(|v| (v, true)),
            (_, Some(r), _) => {
                let (a, b) = r.split_once("..").context("--m-range must look like a..b")?;
                let a: u64 = a.trim().parse().context("--m-range start")?;
                let b: u64 = b.trim().parse().context("--m-range end")?;
                if a > b {
                    bail!("--m-range start {a} exceeds end {b}");
                }
                (a..=b).collect()
            }
            (_, _, Some(l)) => l.clone(),
            _ => bail!("one of --m, --m-range, --m-list is required"),
        };
        check(ms).map(|v| (v, false))
    }
}

fn check(ms: Vec<u64>) -> Result<Vec<u64>> {
    if let Some(bad) = ms.iter().find(|&&m| m == 0) {
        bail!("energy m must be at least 1, got {bad}");
    }
    if ms.is_empty() {
        bail!("empty selection of m");
    }
    Ok(ms)
}

#[derive(Args, Debug, Clone)]
pub struct CapArgs {
    /// Work budget for C(6) counts.
    #[arg(long, default_value_t = 20_000_000_000)]
    pub c6_cap: u128,
    /// Work budget for longer correlation counts.
    #[arg(long, default_value_t = 20_000_000_000)]
    pub cl_cap: u128,
}

impl CapArgs {
    pub fn caps(&self) -> Result<arw_core::correlations::CostCaps> {
        if self.c6_cap == 0 || self.cl_cap == 0 {
            bail!("cost caps must be positive");
        }
        Ok(arw_core::correlations::CostCaps { c6_work: self.c6_cap, cl_work: self.cl_cap })
    }
}

#[derive(Args, Debug, Clone)]
pub struct QuadArgs {
    /// Quadrature points per axis (default grows with sqrt m).
    #[arg(long)]
    pub grid_n: Option<usize>,
    #[arg(long, default_value_t = arw_core::kacrice::DEFAULT_EPS_SING)]
    pub eps_sing: f64,
    #[arg(long, value_enum, default_value_t = Policy::Evaluate)]
    pub policy: Policy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Policy {
    Evaluate,
    Exclude,
}

#[derive(Args, Debug, Clone)]
pub struct McArgs {
    /// Ensemble size; 0 skips Monte-Carlo in a sweep.
    #[arg(long, default_value_t = 0)]
    pub samples: usize,
    /// Marching grid per axis (default grows with sqrt m).
    #[arg(long)]
    pub resolution: Option<usize>,
    /// Master seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}
