use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "zipstrat", version, about = "Zip strata of reductive groups: posets, Bruhat strata and GL_n oracles")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,

    /// Write the document here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Run the inner loops sequentially or on the rayon pool.
    #[arg(long, global = true, value_enum, default_value_t = ExecArg::Parallel)]
    pub exec: ExecArg,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Weyl group order and number of positive roots.
    Roots(CartanArgs),
    /// Minimal coset representatives of W_J \ W, and of W_J \ W / W_K with --K.
    Cosets(CosetArgs),
    /// Closure order of the zip strata, with purity and monotonicity checks.
    #[command(name = "zip-poset")]
    ZipPoset(DatumArgs),
    /// Bruhat strata indexed by ^J W^K with their dimensions.
    #[command(name = "bruhat-strata")]
    BruhatStrata(DatumArgs),
    /// Purity, monotonicity and recursion checks for one datum.
    #[command(name = "purity-report")]
    PurityReport(DatumArgs),
    /// Brute-force GL_n zip oracle over F_p and its extensions.
    Oracle(OracleArgs),
}

#[derive(Args, Debug, Clone)]
pub struct CartanArgs {
    /// Series tag (A2, C3, G2, ...) or path to a file of whitespace-separated integer rows.
    #[arg(long)]
    pub cartan: String,
}

#[derive(Args, Debug, Clone)]
pub struct CosetArgs {
    #[command(flatten)]
    pub cartan: CartanArgs,
    /// Nodes of J, e.g. `0,2`; empty for the empty set.
    #[arg(long = "J", default_value = "")]
    pub j: String,
    #[arg(long = "K")]
    pub k: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct DatumArgs {
    #[command(flatten)]
    pub cartan: CartanArgs,
    #[arg(long = "J", default_value = "")]
    pub j: String,
    /// Explicit K; requires --psi. Without it K and psi come from J.
    #[arg(long = "K")]
    pub k: Option<String>,
    /// Explicit psi on J as `s:t` pairs, e.g. `0:1,2:0`.
    #[arg(long)]
    pub psi: Option<String>,
    /// Diagram automorphism: `id` or one-line notation such as `2,1,0`.
    #[arg(long, default_value = "id")]
    pub sigma: String,
    #[arg(long, default_value_t = 2)]
    pub q: u64,
    #[arg(long, value_enum, default_value_t = NormArg::TwistedOpposition)]
    pub normalization: NormArg,
}

#[derive(Args, Debug, Clone)]
pub struct OracleArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub p: u64,
    /// Top of the tower; every divisor is a level.
    #[arg(long = "mmax", default_value_t = 2)]
    pub m_max: u32,
    /// Explicit tower levels instead of the divisors of --mmax, e.g. `1,2,3`.
    #[arg(long)]
    pub levels: Option<String>,
    /// Also list the rational orbits over F_{p^m}.
    #[arg(long)]
    pub m: Option<u32>,
    /// Field degrees for the stabilizer growth behind the dimension estimates.
    #[arg(long, default_value = "1,2")]
    pub dims: String,
    /// Largest |P(F)| a transporter search may enumerate.
    #[arg(long)]
    pub cap: Option<u128>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Dot,
    Text,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecArg {
    Sequential,
    Parallel,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormArg {
    Opposition,
    TwistedOpposition,
}
