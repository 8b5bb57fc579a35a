//! The `dshift` command line: degree-by-degree geometry of homogeneous
//! submodules from a spec file.

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use dshift::angles::AngleMethod;
use dshift::runner::{run, Command, OutputFormat, RunConfig, VariantChoice};
use dshift::specfile::{parse_spec, ModuleSpecFile};

#[derive(Parser)]
#[command(
    name = "dshift",
    version,
    about = "Angles, perpendicularity, stable division, and essential-normality diagnostics for homogeneous submodules of the finite-rank d-shift Hilbert module"
)]
struct Cli {
    #[command(subcommand)]
    command: CliCommand,
}

#[derive(Subcommand)]
enum CliCommand {
    /// Sweep the cosine of the angle between the spec's modules.
    Cosine(CosineArgs),
    /// Certify perpendicularity of the spec's modules.
    Perp(CommonArgs),
    /// Arbitrate the adjoint-product identity on a polynomial pair.
    GwVerify(GwArgs),
    /// Stable-division constants, optionally with a decomposition witness.
    StableDiv(StableDivArgs),
    /// Commutator-block and Schatten diagnostics per module.
    Essnorm(EssnormArgs),
    /// Run the decomposition certification pipeline on the spec's modules.
    Certify(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Module spec file (vars/rank header plus [module] blocks).
    #[arg(long)]
    spec: Option<std::path::PathBuf>,
    /// Inclusive degree range, written A:B.
    #[arg(long, default_value = "1:10", value_parser = parse_degrees)]
    degrees: (u32, u32),
    /// Output format.
    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,
    /// Relative singular-value cutoff for rank decisions.
    #[arg(long, default_value_t = 1e-10)]
    rank_tol: f64,
    /// Commutator-norm tolerance (verdicts use a 10x hysteresis band).
    #[arg(long, default_value_t = 1e-10)]
    comm_tol: f64,
    /// Minimal-gap threshold for certification.
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    /// Worker threads; the DSHIFT_THREADS env var takes precedence.
    #[arg(long)]
    parallel: Option<usize>,
    /// Refuse degrees whose ambient slice dimension exceeds this guard.
    #[arg(long, default_value_t = 20_000)]
    ambient_cap: usize,
}

#[derive(Args)]
struct CosineArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Per-degree formulation.
    #[arg(long, value_enum, default_value_t = MethodArg::Bgm)]
    method: MethodArg,
}

#[derive(Args)]
struct GwArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Left polynomial (dimension inferred from the variables used).
    #[arg(long)]
    p: String,
    /// Right polynomial.
    #[arg(long)]
    q: String,
    /// Check the identity on all degrees up to this cutoff.
    #[arg(long, default_value_t = 8)]
    max_degree: u32,
    /// Which bracket variant(s) to evaluate.
    #[arg(long, value_enum, default_value_t = VariantArg::Both)]
    variant: VariantArg,
}

#[derive(Args)]
struct StableDivArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Target element of the join, e.g. "z1*z2" or "z1^2 (x) e1" (use ⊗ or @).
    #[arg(long)]
    target: Option<String>,
}

#[derive(Args)]
struct EssnormArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Schatten exponent p (partial sums use 2p); defaults to vars + 1.
    #[arg(long)]
    p: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Bgm,
    Rayleigh,
    Borwein,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Paper,
    Corrected,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
    Text,
}

fn parse_degrees(text: &str) -> Result<(u32, u32), String> {
    let (a, b) = text
        .split_once(':')
        .ok_or_else(|| format!("expected A:B, got '{text}'"))?;
    let lo: u32 = a.trim().parse().map_err(|_| format!("bad degree '{a}'"))?;
    let hi: u32 = b.trim().parse().map_err(|_| format!("bad degree '{b}'"))?;
    if lo > hi {
        return Err(format!("empty degree range {lo}:{hi}"));
    }
    Ok((lo, hi))
}

fn build_config(common: &CommonArgs) -> RunConfig {
    RunConfig {
        degrees: common.degrees,
        method: AngleMethod::Bgm,
        variant: VariantChoice::Corrected,
        rank_tol: common.rank_tol,
        comm_tol: common.comm_tol,
        delta: common.delta,
        schatten_p: None,
        format: match common.format {
            FormatArg::Json => OutputFormat::Json,
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Text => OutputFormat::Text,
        },
        parallel: resolve_threads(common.parallel),
        ambient_cap: common.ambient_cap,
    }
}

fn resolve_threads(flag: Option<usize>) -> Option<usize> {
    match std::env::var("DSHIFT_THREADS") {
        Ok(v) => v.parse().ok().or(flag),
        Err(_) => flag,
    }
}

fn load_spec(path: &Option<std::path::PathBuf>) -> Result<Option<ModuleSpecFile>, String> {
    match path {
        None => Ok(None),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| format!("cannot read {}: {e}", p.display()))?;
            parse_spec(&text).map(Some).map_err(|e| e.to_string())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, common, config) = match &cli.command {
        CliCommand::Cosine(args) => {
            let mut config = build_config(&args.common);
            config.method = match args.method {
                MethodArg::Bgm => AngleMethod::Bgm,
                MethodArg::Rayleigh => AngleMethod::Rayleigh,
                MethodArg::Borwein => AngleMethod::Borwein,
            };
            (Command::Cosine, &args.common, config)
        }
        CliCommand::Perp(common) => (Command::Perp, common, build_config(common)),
        CliCommand::GwVerify(args) => {
            let mut config = build_config(&args.common);
            config.variant = match args.variant {
                VariantArg::Paper => VariantChoice::Paper,
                VariantArg::Corrected => VariantChoice::Corrected,
                VariantArg::Both => VariantChoice::Both,
            };
            (
                Command::GwVerify {
                    p: args.p.clone(),
                    q: args.q.clone(),
                    max_degree: args.max_degree,
                },
                &args.common,
                config,
            )
        }
        CliCommand::StableDiv(args) => (
            Command::StableDiv {
                target: args.target.clone(),
            },
            &args.common,
            build_config(&args.common),
        ),
        CliCommand::Essnorm(args) => {
            let mut config = build_config(&args.common);
            config.schatten_p = args.p;
            (Command::EssNorm, &args.common, config)
        }
        CliCommand::Certify(common) => (Command::Certify, common, build_config(common)),
    };

    if let Some(n) = config.parallel {
        // Build the global pool once; a failure just keeps the default.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }

    let spec = match load_spec(&common.spec) {
        Ok(s) => s,
        Err(message) => {
            eprintln!("dshift: {message}");
            return ExitCode::FAILURE;
        }
    };
    match run(&command, spec.as_ref(), &config) {
        Ok(output) => {
            print!("{}", output.render(config.format));
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("dshift: {err}");
            ExitCode::FAILURE
        }
    }
}
