use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "gibbs-ineq",
    version,
    about = "Check Gibbs-state inequalities and fidelity-susceptibility bounds on finite quantum systems"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run the inequality families (or a full campaign from --config).
    Suite(SuiteArgs),
    /// Compare the spectral, finite-difference and bound values of the fidelity susceptibility.
    Fidelity(FidelityArgs),
    /// Check the second-order expansion of the fidelity between nearby Gibbs states.
    Expansion(ExpansionArgs),
    /// List the built-in model catalogue.
    Models(ModelsArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelName {
    SingleSpin,
    IsingChain,
    Dicke,
    Random,
}

#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    /// Model family.
    #[arg(long, value_enum, default_value = "random")]
    pub model: ModelName,
    /// Level splitting of the single spin.
    #[arg(long, default_value_t = 2.0)]
    pub delta: f64,
    /// Number of sites of the Ising chain.
    #[arg(long, default_value_t = 4)]
    pub n_sites: usize,
    /// Nearest-neighbour zz coupling of the Ising chain.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub coupling: f64,
    /// Transverse field of the Ising chain.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub field: f64,
    /// Boson cutoff of the Dicke model.
    #[arg(long, default_value_t = 6)]
    pub n_max: usize,
    /// Number of spins of the Dicke model.
    #[arg(long, default_value_t = 2)]
    pub n_spins: usize,
    /// Boson frequency of the Dicke model.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub omega: f64,
    /// Spin splitting of the Dicke model.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub omega0: f64,
    /// Spin-boson coupling of the Dicke model.
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub lambda: f64,
    /// Dimension of the random model.
    #[arg(long, default_value_t = 8)]
    pub dim: usize,
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    /// Inverse temperatures, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub beta: Vec<f64>,
    /// Instances per (model, beta); only random models draw distinct instances.
    #[arg(long, default_value_t = 1)]
    pub trials: u64,
    /// Campaign seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Relative slack tolerance.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// JSON report path (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write a per-instance CSV to this path.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Worker threads (default: available parallelism).
    #[arg(long, env = "GIBBS_INEQ_JOBS")]
    pub jobs: Option<usize>,
    /// Omit per-instance records from the JSON report.
    #[arg(long)]
    pub brief: bool,
    /// Add wall-clock timing to the JSON report.
    #[arg(long)]
    pub timing: bool,
}

#[derive(Args, Debug)]
pub struct SuiteArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub run: RunArgs,
    /// Inequality families, comma separated (`fidelity` and `expansion` also accepted).
    #[arg(long, value_delimiter = ',')]
    pub families: Option<Vec<String>>,
    /// Orders n of the generalized families.
    #[arg(long, value_delimiter = ',')]
    pub orders: Option<Vec<usize>>,
    /// Hierarchy depths k.
    #[arg(long = "holder-k", value_delimiter = ',')]
    pub holder_k: Option<Vec<usize>>,
    /// Hölder exponents p of gen_plechko.
    #[arg(long = "holder-p", value_delimiter = ',')]
    pub holder_p: Option<Vec<f64>>,
    /// Campaign config (JSON); replaces the model, beta and grid flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct FidelityArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub run: RunArgs,
    /// Perturbation strength at which to evaluate.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub x: f64,
}

#[derive(Args, Debug)]
pub struct ExpansionArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub run: RunArgs,
    /// Expansion point.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub x: f64,
    /// Half-separation of the compared states (default: 0.1/(beta |S|)).
    #[arg(long)]
    pub y: Option<f64>,
}

#[derive(Args, Debug)]
pub struct ModelsArgs {
    /// JSON output path (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}
