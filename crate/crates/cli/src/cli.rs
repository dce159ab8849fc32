//! Command-line grammar.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use xilab_core::KernelDescriptor;

use crate::config::Format;

#[derive(Debug, Parser)]
#[command(name = "xilab", version, about = "Admissible kernels, cosine transforms, Laguerre expressions and Turán moments")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Working precision in significant decimal digits.
    #[arg(long, global = true)]
    pub digits: Option<u32>,
    /// Relative quadrature tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Absolute quadrature tolerance.
    #[arg(long = "abs-tol", global = true)]
    pub abs_tol: Option<f64>,
    /// Worker threads.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Panel budget per quadrature.
    #[arg(long = "max-panels", global = true)]
    pub max_panels: Option<usize>,
    /// Directory for report files; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output formats, comma separated.
    #[arg(long, global = true, value_enum, value_delimiter = ',')]
    pub format: Vec<Format>,
    /// TOML config file; overrides $XILAB_CONFIG.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Jacobi theta kernel and its derivatives.
    Theta {
        #[arg(long, allow_hyphen_values = true)]
        t: Option<f64>,
        #[arg(long, default_value_t = 0)]
        order: usize,
        #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
        range: Option<(f64, f64)>,
        #[arg(long, default_value_t = 50)]
        grid: usize,
    },
    /// Cosine transform of a kernel and its x-derivatives.
    Transform {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long, allow_hyphen_values = true)]
        x: Option<f64>,
        #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
        range: Option<(f64, f64)>,
        #[arg(long, default_value_t = 50)]
        grid: usize,
        #[arg(long, default_value_t = 0)]
        order: usize,
    },
    /// Real zeros of a cosine transform.
    Zeros {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long, value_parser = parse_range)]
        range: (f64, f64),
        #[arg(long, default_value_t = 400)]
        grid: usize,
    },
    /// Generalized Laguerre expression L_n on a grid.
    Laguerre {
        #[arg(long, value_parser = parse_kernel)]
        kernel: KernelDescriptor,
        #[arg(long)]
        n: usize,
        #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
        range: (f64, f64),
        #[arg(long, default_value_t = 50)]
        grid: usize,
        #[arg(long, value_enum, default_value_t = RouteArg::Deriv)]
        route: RouteArg,
    },
    /// Associated kernel values on a t-grid.
    Assoc {
        #[command(flatten)]
        target: AssocArgs,
        #[arg(long = "t-range", value_parser = parse_range)]
        t_range: (f64, f64),
        #[arg(long, default_value_t = 50)]
        grid: usize,
    },
    /// Positive-definiteness check of a kernel or associated kernel.
    Pd {
        #[arg(long, value_parser = parse_kernel)]
        kernel: KernelDescriptor,
        /// Associated kernel index; the kernel itself when absent.
        #[arg(long)]
        n: Option<u32>,
        /// Use the (s² − t²)^m s² weight instead of s^{2n}.
        #[arg(long = "shifted-m", conflicts_with = "n")]
        shifted_m: Option<u32>,
        #[arg(long, value_enum, default_value_t = PdMethodArg::Transform)]
        method: PdMethodArg,
        #[arg(long, default_value_t = 20.0)]
        xmax: f64,
        #[arg(long, default_value_t = 200)]
        grid: usize,
        /// Gram matrix size.
        #[arg(long, default_value_t = 60)]
        points: usize,
        /// Gram point spacing.
        #[arg(long, default_value_t = 0.25)]
        spacing: f64,
    },
    /// Taylor moments, Turán and double Turán differences.
    Moments {
        #[arg(long, value_parser = parse_kernel, default_value = "theta")]
        kernel: KernelDescriptor,
        #[arg(long, default_value_t = 20)]
        kmax: usize,
    },
    /// Full pipeline for φ(t) = e^{−t²}(15 + t² + t⁴).
    Example312,
    /// Probes of open questions; outcomes are recorded, not asserted.
    Probe {
        #[command(subcommand)]
        target: ProbeTarget,
    },
    /// Fast invariant suite with a deterministic report.
    Selftest,
}

#[derive(Debug, Args)]
pub struct SpecArgs {
    #[arg(long, value_parser = parse_kernel)]
    pub kernel: KernelDescriptor,
    /// Heat-flow parameter: integrand factor e^{λ t²}.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub lambda: f64,
    /// Extra integrand factor t^{2m}.
    #[arg(long, default_value_t = 0)]
    pub m: u32,
}

#[derive(Debug, Args)]
pub struct AssocArgs {
    #[arg(long, value_parser = parse_kernel)]
    pub kernel: KernelDescriptor,
    #[arg(long, default_value_t = 1)]
    pub n: u32,
    /// Use the (s² − t²)^m s² weight instead of s^{2n}.
    #[arg(long = "shifted-m")]
    pub shifted_m: Option<u32>,
}

#[derive(Debug, Subcommand)]
pub enum ProbeTarget {
    /// L_1(x; H) > 0 for the xi transform H.
    Open47 {
        #[arg(long, value_parser = parse_range, default_value = "0,100")]
        range: (f64, f64),
        #[arg(long, default_value_t = 2000)]
        grid: usize,
    },
    /// (Φ^{(n)})² − Φ^{(n−1)}Φ^{(n+1)} on a t-grid.
    Open413 {
        #[arg(long = "n-max", default_value_t = 2)]
        n_max: usize,
        #[arg(long, value_parser = parse_range, default_value = "0,2")]
        range: (f64, f64),
        #[arg(long, default_value_t = 200)]
        grid: usize,
    },
    /// (log f)'' for f = s'² − s s'', s(t) = Φ(√t).
    Open414 {
        #[arg(long, value_parser = parse_range, default_value = "0.1,4")]
        range: (f64, f64),
        #[arg(long, default_value_t = 100)]
        grid: usize,
    },
    /// Associated kernels of e^{λt²}Φ(t) for λ < 0.
    Open410 {
        #[arg(long, default_value_t = -0.1, allow_hyphen_values = true)]
        lambda: f64,
        #[arg(long = "n-max", default_value_t = 2)]
        n_max: u32,
        #[arg(long, default_value_t = 20.0)]
        xmax: f64,
        #[arg(long, default_value_t = 200)]
        grid: usize,
    },
    /// The (s² − t²)^m s² associated kernel of e^{λt²}Φ(t) for λ > 0.
    Open411 {
        #[arg(long, default_value_t = 0.1, allow_hyphen_values = true)]
        lambda: f64,
        #[arg(long, default_value_t = 1)]
        m: u32,
        #[arg(long, value_enum, default_value_t = PdMethodArg::Transform)]
        method: PdMethodArg,
        #[arg(long, default_value_t = 20.0)]
        xmax: f64,
        #[arg(long, default_value_t = 200)]
        grid: usize,
    },
    /// Zeros of H_λ and backward heat equation residuals.
    Heatflow {
        #[arg(long, default_value_t = 0.6, allow_hyphen_values = true)]
        lambda: f64,
        #[arg(long, value_parser = parse_range, default_value = "0,60")]
        range: (f64, f64),
        #[arg(long, default_value_t = 600)]
        grid: usize,
        /// λ at which the heat equation residual is checked.
        #[arg(long = "check-lambda", default_value_t = 0.1, allow_hyphen_values = true)]
        check_lambda: f64,
        #[arg(long = "check-x", value_delimiter = ',', default_value = "0,5")]
        check_x: Vec<f64>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RouteArg {
    Deriv,
    Kernel,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PdMethodArg {
    Transform,
    Gram,
    Sine,
}

impl Command {
    pub fn name(&self) -> String {
        match self {
            Command::Theta { .. } => "theta".into(),
            Command::Transform { .. } => "transform".into(),
            Command::Zeros { .. } => "zeros".into(),
            Command::Laguerre { .. } => "laguerre".into(),
            Command::Assoc { .. } => "assoc".into(),
            Command::Pd { .. } => "pd".into(),
            Command::Moments { .. } => "moments".into(),
            Command::Example312 => "example312".into(),
            Command::Selftest => "selftest".into(),
            Command::Probe { target } => format!(
                "probe {}",
                match target {
                    ProbeTarget::Open47 { .. } => "open47",
                    ProbeTarget::Open413 { .. } => "open413",
                    ProbeTarget::Open414 { .. } => "open414",
                    ProbeTarget::Open410 { .. } => "open410",
                    ProbeTarget::Open411 { .. } => "open411",
                    ProbeTarget::Heatflow { .. } => "heatflow",
                }
            ),
        }
    }
}

pub fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected a,b but got '{s}'"))?;
    let a: f64 = a.trim().parse().map_err(|e| format!("bad lower end '{a}': {e}"))?;
    let b: f64 = b.trim().parse().map_err(|e| format!("bad upper end '{b}': {e}"))?;
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(format!("need finite a < b, got {a},{b}"));
    }
    Ok((a, b))
}

pub fn parse_kernel(s: &str) -> Result<KernelDescriptor, String> {
    s.parse().map_err(|e: xilab_core::Error| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("0,100"), Ok((0.0, 100.0)));
        assert_eq!(parse_range(" -1.5 , 2 "), Ok((-1.5, 2.0)));
        assert!(parse_range("3,1").is_err());
        assert!(parse_range("3").is_err());
    }

    #[test]
    fn grammar_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn negative_lambda_and_global_flags() {
        let c = Cli::try_parse_from(["xilab", "probe", "open410", "--lambda", "-0.2", "--digits", "40"]).unwrap();
        assert_eq!(c.global.digits, Some(40));
        assert!(matches!(c.command, Command::Probe { target: ProbeTarget::Open410 { lambda, .. } } if lambda == -0.2));
        assert!(Cli::try_parse_from(["xilab", "pd", "--kernel", "nope"]).is_err());
    }
}
