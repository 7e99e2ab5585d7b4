use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sos_staircase::sdp::SolverParams;
use sos_staircase::{BigScalar, DEFAULT_PREC};

use crate::ConfigError;

#[derive(Parser, Debug)]
#[command(
    name = "sos-staircase",
    version,
    about = "Moment-SOS relaxations, certificates and exactness thresholds"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Relaxation values v_d(ε) on a grid of orders and ε values.
    Table(TableArgs),
    /// Exactness thresholds ε_d by bisection, with the fitted growth slope.
    Staircase(StaircaseArgs),
    /// Support values of the bivariate relaxations along evenly spaced directions.
    Project(ProjectArgs),
    /// Build, verify and write an SOS certificate.
    Certify(CertifyArgs),
    /// Theoretical and Markov bounds on the thresholds.
    Bounds(BoundsArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Working precision in bits.
    #[arg(long, env = "SOS_STAIRCASE_PREC", default_value_t = DEFAULT_PREC)]
    pub prec_bits: u32,
    /// Relative duality gap tolerance of the SDP solver.
    #[arg(long, default_value_t = 1e-25)]
    pub gap_tol: f64,
    /// Feasibility tolerance of the SDP solver.
    #[arg(long, default_value_t = 1e-25)]
    pub feas_tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

impl Common {
    pub fn solver(&self) -> Result<SolverParams, ConfigError> {
        let p = SolverParams {
            precision: self.prec_bits,
            gap_tol: self.gap_tol,
            feas_tol: self.feas_tol,
            ..SolverParams::default()
        };
        p.validate().map_err(|e| ConfigError(e.to_string()))?;
        if self.jobs == 0 {
            return Err(ConfigError("--jobs must be at least 1".into()));
        }
        Ok(p)
    }
}

#[derive(Args, Debug)]
pub struct TableArgs {
    #[command(flatten)]
    pub common: Common,
    /// Relaxation orders, e.g. `1..5` or `1,3,5`.
    #[arg(long, default_value = "1..5")]
    pub orders: String,
    /// Exponents k of ε = 10^(−k), e.g. `1..5`.
    #[arg(long, conflicts_with = "epsilon")]
    pub log10_eps: Option<String>,
    /// Explicit ε values, comma separated (decimal or `p/q`).
    #[arg(long)]
    pub epsilon: Option<String>,
    /// Values with smaller magnitude are printed as 0.
    #[arg(long, default_value = "1e-20")]
    pub zero_threshold: String,
    /// The long grid: orders 1..8 and k = 1..9.
    #[arg(long, conflicts_with_all = ["orders", "log10_eps", "epsilon"])]
    pub full: bool,
}

#[derive(Args, Debug)]
pub struct StaircaseArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value = "2..6")]
    pub orders: String,
    /// Bisection stops once hi − lo ≤ this fraction of hi.
    #[arg(long, default_value = "1e-3")]
    pub rel_width: String,
}

#[derive(Args, Debug)]
pub struct ProjectArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value = "1..4")]
    pub orders: String,
    #[arg(long, default_value = "3e-3")]
    pub epsilon: String,
    /// Number of evenly spaced directions (at least 8).
    #[arg(long, default_value_t = 16)]
    pub directions: usize,
}

#[derive(Args, Debug)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub epsilon: String,
    /// Certificate order; defaults to one above the Paulynomial degree
    /// parameter with `--paulynomial`.
    #[arg(long)]
    pub orders: Option<String>,
    /// Start from the explicit Paulynomial multiplier instead of a solve.
    #[arg(long)]
    pub paulynomial: bool,
    /// Round to an exact rational certificate.
    #[arg(long)]
    pub rationalize: bool,
    #[arg(long, default_value_t = 1_000_000)]
    pub denom_bound: u64,
}

#[derive(Args, Debug)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub common: Common,
    /// Bound indices d; row d bounds the threshold of order d+1.
    #[arg(long, default_value = "1..5")]
    pub orders: String,
    /// Staircase CSV whose enclosures are checked against the bounds.
    #[arg(long)]
    pub enclosures: Option<PathBuf>,
}

/// `a..b` (inclusive), `a,b,c` or a single integer.
pub fn parse_range(s: &str, what: &str) -> Result<Vec<usize>, ConfigError> {
    let bad = || ConfigError(format!("cannot parse {what} {s:?}"));
    let t = s.trim();
    let out: Vec<usize> = if let Some((a, b)) = t.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b
            .trim()
            .trim_start_matches('=')
            .parse()
            .map_err(|_| bad())?;
        (a..=b).collect()
    } else {
        t.split(',')
            .map(|p| p.trim().parse::<usize>().map_err(|_| bad()))
            .collect::<Result<_, _>>()?
    };
    if out.is_empty() {
        return Err(ConfigError(format!("{what} {s:?} is empty")));
    }
    Ok(out)
}

pub fn parse_orders(s: &str) -> Result<Vec<usize>, ConfigError> {
    let v = parse_range(s, "orders")?;
    if v.contains(&0) {
        return Err(ConfigError("orders must be at least 1".into()));
    }
    Ok(v)
}

pub fn parse_scalar(s: &str, what: &str, prec: u32) -> Result<BigScalar, ConfigError> {
    BigScalar::parse(s, prec).map_err(|e| ConfigError(format!("{what}: {e}")))
}

pub fn parse_epsilon(s: &str, prec: u32) -> Result<BigScalar, ConfigError> {
    let e = parse_scalar(s, "epsilon", prec)?;
    if !(e.is_finite() && e.signum_i() >= 0 && e <= BigScalar::one(prec)) {
        return Err(ConfigError(format!("epsilon must lie in [0,1], got {s}")));
    }
    Ok(e)
}

pub fn parse_positive(s: &str, what: &str, prec: u32) -> Result<BigScalar, ConfigError> {
    let v = parse_scalar(s, what, prec)?;
    if !(v.is_finite() && v.signum_i() > 0) {
        return Err(ConfigError(format!("{what} must be positive, got {s}")));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("1..5", "x").unwrap(), vec![1, 2, 3, 4, 5]);
        assert_eq!(parse_range("2..=3", "x").unwrap(), vec![2, 3]);
        assert_eq!(parse_range("4, 1", "x").unwrap(), vec![4, 1]);
        assert!(parse_range("5..1", "x").is_err());
        assert!(parse_range("a", "x").is_err());
        assert!(parse_orders("0..2").is_err());
    }

    #[test]
    fn epsilon_domain() {
        assert!(parse_epsilon("1/3", 64).is_ok());
        assert!(parse_epsilon("0", 64).is_ok());
        assert!(parse_epsilon("1.5", 64).is_err());
        assert!(parse_epsilon("-1e-3", 64).is_err());
        assert!(parse_positive("0", "w", 64).is_err());
    }
}
