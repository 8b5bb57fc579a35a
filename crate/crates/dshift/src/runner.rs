//! Command dispatch: turns a parsed spec file plus a run configuration into a
//! report document, with an ambient-dimension guard against accidental
//! combinatorial blowup.

use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::angles::{graded_cosine, stable_division, AngleError, AngleMethod};
use crate::essnorm::{certify_decomposition, ess_norm_report};
use crate::parse::{parse_homog_poly, parse_vector, ParseError};
use crate::perp::{certify_perpendicularity, commutator_formula_check, verify_guo_wang, BracketVariant};
use crate::poly::VectorPoly;
use crate::report::{to_csv, to_json_17, to_json_17_pretty, Cell};
use crate::slices::GradedSubmodule;
use crate::specfile::{ModuleSpecFile, SpecEcho};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("degree {degree} needs ambient dimension {dim}, above the guard {cap}")]
    AmbientCapExceeded { degree: u32, dim: usize, cap: usize },
    #[error("command needs a spec file")]
    MissingSpec,
    #[error("command needs at least {needed} module blocks, spec has {got}")]
    NotEnoughModules { needed: usize, got: usize },
    #[error("bad polynomial argument: {0}")]
    Poly(#[from] ParseError),
    #[error(transparent)]
    Angle(#[from] AngleError),
    #[error("bad Schatten exponent '{0}' (need a positive real or 'inf')")]
    BadSchattenP(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VariantChoice {
    Paper,
    Corrected,
    Both,
}

/// Everything a run needs besides the spec itself. Mirrors the CLI flags.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub degrees: (u32, u32),
    pub method: AngleMethod,
    pub variant: VariantChoice,
    pub rank_tol: f64,
    pub comm_tol: f64,
    pub delta: f64,
    pub schatten_p: Option<f64>,
    pub format: OutputFormat,
    pub parallel: Option<usize>,
    /// Refuse degrees whose ambient slice dimension exceeds this.
    pub ambient_cap: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            degrees: (1, 10),
            method: AngleMethod::Bgm,
            variant: VariantChoice::Corrected,
            rank_tol: 1e-10,
            comm_tol: 1e-10,
            delta: 0.05,
            schatten_p: None,
            format: OutputFormat::Json,
            parallel: None,
            ambient_cap: 20_000,
        }
    }
}

/// A CLI command with its command-specific arguments.
#[derive(Clone, Debug)]
pub enum Command {
    Cosine,
    Perp,
    GwVerify {
        p: String,
        q: String,
        max_degree: u32,
    },
    StableDiv {
        target: Option<String>,
    },
    EssNorm,
    Certify,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Cosine => "cosine",
            Command::Perp => "perp",
            Command::GwVerify { .. } => "gw-verify",
            Command::StableDiv { .. } => "stable-div",
            Command::EssNorm => "essnorm",
            Command::Certify => "certify",
        }
    }
}

/// The report document; JSON is canonical, CSV flattens `per_degree`.
#[derive(Debug, Serialize)]
pub struct Document {
    pub command: String,
    pub config: RunConfig,
    pub spec: Option<SpecEcho>,
    pub per_degree: Vec<serde_json::Value>,
    pub summary: serde_json::Value,
    pub warnings: Vec<String>,
    pub timestamp_unix_ms: u128,
}

pub struct RunOutput {
    pub document: Document,
    csv_headers: Vec<&'static str>,
    csv_rows: Vec<Vec<Cell>>,
}

impl RunOutput {
    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Json => to_json_17(&self.document),
            OutputFormat::Csv => to_csv(&self.csv_headers, &self.csv_rows),
            OutputFormat::Text => {
                let mut out = format!("command: {}\n", self.document.command);
                out.push_str("summary:\n");
                out.push_str(&to_json_17_pretty(&self.document.summary));
                out.push('\n');
                if !self.csv_rows.is_empty() {
                    out.push_str("per-degree:\n");
                    out.push_str(&to_csv(&self.csv_headers, &self.csv_rows));
                }
                for w in &self.document.warnings {
                    out.push_str(&format!("warning: {w}\n"));
                }
                out
            }
        }
    }
}

fn guard_ambient(d: usize, r: usize, degrees: (u32, u32), cap: usize) -> Result<(), RunError> {
    for k in degrees.0..=degrees.1 {
        let dim = crate::multiindex::slice_dimension(d, k) * r;
        if dim > cap {
            return Err(RunError::AmbientCapExceeded { degree: k, dim, cap });
        }
    }
    Ok(())
}

fn need_spec<'s>(spec: Option<&'s ModuleSpecFile>) -> Result<&'s ModuleSpecFile, RunError> {
    spec.ok_or(RunError::MissingSpec)
}

fn need_modules(spec: &ModuleSpecFile, needed: usize) -> Result<Vec<GradedSubmodule>, RunError> {
    let modules = spec.submodules();
    if modules.len() < needed {
        return Err(RunError::NotEnoughModules {
            needed,
            got: modules.len(),
        });
    }
    Ok(modules)
}

fn timestamp_ms() -> u128 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0)
}

/// Executes a command. The exit contract: a computed result returns `Ok`
/// whatever its verdict; input and compute failures return `Err`.
pub fn run(
    command: &Command,
    spec: Option<&ModuleSpecFile>,
    config: &RunConfig,
) -> Result<RunOutput, RunError> {
    if let Some(s) = spec {
        guard_ambient(s.vars, s.rank, config.degrees, config.ambient_cap)?;
    }
    let (lo, hi) = config.degrees;
    let mut warnings: Vec<String> = Vec::new();

    let (per_degree, summary, csv_headers, csv_rows): (
        Vec<serde_json::Value>,
        serde_json::Value,
        Vec<&'static str>,
        Vec<Vec<Cell>>,
    ) = match command {
        Command::Cosine => {
            let spec = need_spec(spec)?;
            let modules = need_modules(spec, 2)?;
            let report = graded_cosine(&modules, lo..=hi, config.method, config.rank_tol)?;
            let rows = report
                .per_degree
                .iter()
                .map(|r| {
                    vec![
                        Cell::Int(i64::from(r.degree)),
                        Cell::Num(r.cosine),
                        Cell::opt_num(r.lambda_min),
                        Cell::Int(r.join_rank as i64),
                        Cell::Str(report.method.to_string()),
                    ]
                })
                .collect();
            if report.per_degree.iter().any(|r| r.empty_join) {
                warnings.push("some degrees had an empty join; their cosine is 0 by convention".into());
            }
            if report.per_degree.iter().any(|r| r.degenerate) {
                warnings.push("raw formula value went negative for a degenerate family".into());
            }
            (
                report
                    .per_degree
                    .iter()
                    .map(|r| serde_json::to_value(r).expect("row"))
                    .collect(),
                json!({
                    "method": report.method,
                    "max_cosine": report.summary.max_cosine,
                    "argmax_degree": report.summary.argmax_degree,
                    "trend": report.summary.trend,
                }),
                vec!["degree", "cosine", "lambda_min", "join_rank", "method"],
                rows,
            )
        }
        Command::Perp => {
            let spec = need_spec(spec)?;
            let modules = need_modules(spec, 2)?;
            let cert = certify_perpendicularity(&modules, lo..=hi, config.comm_tol);
            let rows = cert
                .per_degree
                .iter()
                .map(|r| {
                    vec![
                        Cell::Int(i64::from(r.degree)),
                        Cell::Num(r.max_commutator),
                    ]
                })
                .collect();
            (
                cert.per_degree
                    .iter()
                    .map(|r| serde_json::to_value(r).expect("row"))
                    .collect(),
                json!({
                    "verdict": cert.verdict,
                    "criterion": cert.criterion,
                    "max_commutator": cert.max_commutator,
                    "witness": cert.witness,
                }),
                vec!["degree", "max_commutator"],
                rows,
            )
        }
        Command::GwVerify { p, q, max_degree } => {
            let (pp, qq) = parse_poly_pair(p, q)?;
            let mut residuals = serde_json::Map::new();
            let mut rows = Vec::new();
            let variants: &[BracketVariant] = match config.variant {
                VariantChoice::Paper => &[BracketVariant::Paper],
                VariantChoice::Corrected => &[BracketVariant::Corrected],
                VariantChoice::Both => &[BracketVariant::Corrected, BracketVariant::Paper],
            };
            let mut winner: Option<&'static str> = None;
            for v in variants {
                let name = match v {
                    BracketVariant::Paper => "paper",
                    BracketVariant::Corrected => "corrected",
                };
                let residual = verify_guo_wang(&pp, &qq, *max_degree, *v);
                let comm = commutator_formula_check(&pp, &qq, *max_degree, *v);
                if residual < 1e-10 {
                    winner = match winner {
                        None => Some(name),
                        Some(_) => {
                            warnings.push("both variants matched; identity cannot arbitrate on this pair".into());
                            winner
                        }
                    };
                }
                residuals.insert(format!("{name}_residual"), json!(residual));
                residuals.insert(
                    format!("{name}_commutator_residual"),
                    json!(comm.max_residual),
                );
                rows.push(vec![
                    Cell::Str(name.into()),
                    Cell::Num(residual),
                    Cell::Num(comm.max_residual),
                    Cell::Num(comm.max_lhs_norm),
                ]);
            }
            residuals.insert("winning_variant".into(), json!(winner));
            residuals.insert("p".into(), json!(pp.to_string()));
            residuals.insert("q".into(), json!(qq.to_string()));
            residuals.insert("max_degree".into(), json!(max_degree));
            (
                Vec::new(),
                serde_json::Value::Object(residuals),
                vec!["variant", "identity_residual", "commutator_residual", "commutator_lhs_norm"],
                rows,
            )
        }
        Command::StableDiv { target } => {
            let spec = need_spec(spec)?;
            let modules = need_modules(spec, 1)?;
            let parsed_target = match target {
                None => None,
                Some(text) => Some(parse_target(text, spec)?),
            };
            let report = stable_division(
                &modules,
                lo..=hi,
                parsed_target.as_ref(),
                config.rank_tol,
            )?;
            let rows = report
                .per_degree
                .iter()
                .map(|r| {
                    vec![
                        Cell::Int(i64::from(r.degree)),
                        Cell::opt_num(r.constant),
                        Cell::opt_num(r.lambda_min_pos),
                        Cell::Int(r.join_rank as i64),
                    ]
                })
                .collect();
            (
                report
                    .per_degree
                    .iter()
                    .map(|r| serde_json::to_value(r).expect("row"))
                    .collect(),
                json!({
                    "sup_constant": report.summary.sup_constant,
                    "at_degree": report.summary.at_degree,
                    "trend": report.summary.trend,
                    "witness": report.witness,
                }),
                vec!["degree", "constant", "lambda_min_pos", "join_rank"],
                rows,
            )
        }
        Command::EssNorm => {
            let spec = need_spec(spec)?;
            let modules = need_modules(spec, 1)?;
            let p = match config.schatten_p {
                Some(p) if p > 0.0 => p,
                Some(p) => return Err(RunError::BadSchattenP(p.to_string())),
                None => spec.vars as f64 + 1.0,
            };
            let mut per_degree = Vec::new();
            let mut rows = Vec::new();
            let mut summaries = Vec::new();
            for module in &modules {
                let report = ess_norm_report(module, lo..=hi, p, config.rank_tol);
                for var in &report.variables {
                    for (row, partial) in var.per_degree.iter().zip(&var.schatten_partial) {
                        per_degree.push(json!({
                            "module": module.label(),
                            "var": var.var + 1,
                            "degree": row.degree,
                            "norm": row.norm,
                            "schatten_partial": partial,
                        }));
                        rows.push(vec![
                            Cell::Str(module.label().into()),
                            Cell::Int((var.var + 1) as i64),
                            Cell::Int(i64::from(row.degree)),
                            Cell::Num(row.norm),
                            Cell::Num(*partial),
                        ]);
                    }
                }
                summaries.push(json!({
                    "module": module.label(),
                    "schatten_p": report.schatten_p,
                    "decay_slopes": report
                        .variables
                        .iter()
                        .map(|v| v.decay.map(|d| d.slope))
                        .collect::<Vec<_>>(),
                    "max_self_commutator": report
                        .self_commutators
                        .iter()
                        .map(|b| b.norm)
                        .fold(0.0f64, f64::max),
                    "consistent_with_p_normality": report.consistent_with_p_normality,
                    "note": report.heuristic_note,
                }));
            }
            (
                per_degree,
                json!({ "modules": summaries }),
                vec!["module", "var", "degree", "norm", "schatten_partial"],
                rows,
            )
        }
        Command::Certify => {
            let spec = need_spec(spec)?;
            let modules = need_modules(spec, 1)?;
            let cert = certify_decomposition(
                &modules,
                lo..=hi,
                config.delta,
                config.rank_tol,
                config.comm_tol,
            );
            let mut per_degree = Vec::new();
            let mut rows = Vec::new();
            if let Some(angle) = &cert.angle {
                for r in &angle.per_degree {
                    per_degree.push(serde_json::to_value(r).expect("row"));
                    rows.push(vec![
                        Cell::Int(i64::from(r.degree)),
                        Cell::Num(r.cosine),
                        Cell::opt_num(r.lambda_min),
                        Cell::Int(r.join_rank as i64),
                    ]);
                }
            }
            warnings.extend(cert.reasons.iter().cloned());
            (
                per_degree,
                json!({
                    "verdict": cert.verdict,
                    "min_gap": cert.min_gap,
                    "delta": cert.delta,
                    "pieces": cert.pieces,
                    "perp_verdict": cert.perp.as_ref().map(|p| p.verdict),
                    "max_cosine": cert.angle.as_ref().map(|a| a.summary.max_cosine),
                }),
                vec!["degree", "cosine", "lambda_min", "join_rank"],
                rows,
            )
        }
    };

    Ok(RunOutput {
        document: Document {
            command: command.name().to_string(),
            config: config.clone(),
            spec: spec.map(SpecEcho::from),
            per_degree,
            summary,
            warnings,
            timestamp_unix_ms: timestamp_ms(),
        },
        csv_headers,
        csv_rows,
    })
}

fn parse_poly_pair(
    p: &str,
    q: &str,
) -> Result<(crate::poly::HomogPoly, crate::poly::HomogPoly), RunError> {
    let pp = crate::parse::parse_homog_poly_auto(p)?;
    let qq = crate::parse::parse_homog_poly_auto(q)?;
    let dim = pp.dim().max(qq.dim());
    Ok((pp.embed(dim), qq.embed(dim)))
}

/// Accepts `POLY`, or `POLY ⊗ e<j>` / `POLY @ (c1, …, cr)` for rank > 1.
fn parse_target(text: &str, spec: &ModuleSpecFile) -> Result<VectorPoly, RunError> {
    let (poly_text, vector) = match text.split_once('⊗').or_else(|| text.split_once('@')) {
        Some((p, v)) => (p, parse_vector(v.trim(), spec.rank)?),
        None => {
            let mut e1 = vec![num_complex::Complex64::ZERO; spec.rank];
            e1[0] = num_complex::Complex64::ONE;
            (text, e1)
        }
    };
    let poly = parse_homog_poly(poly_text.trim(), spec.vars)?;
    Ok(VectorPoly::tensor(&poly, &vector))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfile::parse_spec;

    fn coordinate_spec() -> ModuleSpecFile {
        parse_spec("vars=3 rank=1\n[N1]\ngen=\"z1\"\n[N2]\ngen=\"z2\"\n[N3]\ngen=\"z3\"").unwrap()
    }

    #[test]
    fn cosine_command_summary() {
        let spec = coordinate_spec();
        let config = RunConfig {
            degrees: (1, 6),
            ..RunConfig::default()
        };
        let out = run(&Command::Cosine, Some(&spec), &config).unwrap();
        let max = out.document.summary["max_cosine"].as_f64().unwrap();
        assert!((max - 0.5).abs() < 1e-9);
        assert_eq!(out.document.per_degree.len(), 6);
        let csv = out.render(OutputFormat::Csv);
        assert!(csv.starts_with("degree,cosine,lambda_min,join_rank,method\n"));
    }

    #[test]
    fn deterministic_json_modulo_timestamp() {
        let spec = coordinate_spec();
        let config = RunConfig {
            degrees: (1, 5),
            ..RunConfig::default()
        };
        let mut a = run(&Command::Cosine, Some(&spec), &config).unwrap();
        let mut b = run(&Command::Cosine, Some(&spec), &config).unwrap();
        a.document.timestamp_unix_ms = 0;
        b.document.timestamp_unix_ms = 0;
        assert_eq!(a.render(OutputFormat::Json), b.render(OutputFormat::Json));
    }

    #[test]
    fn gw_verify_names_the_winner() {
        let config = RunConfig {
            variant: VariantChoice::Both,
            ..RunConfig::default()
        };
        let cmd = Command::GwVerify {
            p: "z1".into(),
            q: "z1".into(),
            max_degree: 8,
        };
        let out = run(&cmd, None, &config).unwrap();
        assert_eq!(out.document.summary["winning_variant"], "corrected");
        assert!(out.document.summary["corrected_residual"].as_f64().unwrap() < 1e-12);
        assert!(out.document.summary["paper_residual"].as_f64().unwrap() > 1e-6);
    }

    #[test]
    fn ambient_guard_names_the_degree() {
        let spec = coordinate_spec();
        let config = RunConfig {
            degrees: (1, 300),
            ambient_cap: 1000,
            ..RunConfig::default()
        };
        match run(&Command::Cosine, Some(&spec), &config) {
            Err(RunError::AmbientCapExceeded { degree, .. }) => {
                // C(k+2, 2) > 1000 first at k = 44.
                assert_eq!(degree, 44);
            }
            other => panic!("expected guard error, got {:?}", other.is_ok()),
        }
    }

    #[test]
    fn certify_command_on_monomials() {
        let spec = parse_spec("vars=3 rank=1\n[K1]\ngen=\"z1^2\"\n[K2]\ngen=\"z2*z3\"").unwrap();
        let config = RunConfig {
            degrees: (1, 6),
            ..RunConfig::default()
        };
        let out = run(&Command::Certify, Some(&spec), &config).unwrap();
        assert_eq!(out.document.summary["verdict"], "certified-at-cutoff");
    }

    #[test]
    fn stable_div_with_target_witness() {
        let spec = parse_spec("vars=2 rank=1\n[A]\ngen=\"z1\"\n[B]\ngen=\"z2\"").unwrap();
        let config = RunConfig {
            degrees: (1, 4),
            ..RunConfig::default()
        };
        let cmd = Command::StableDiv {
            target: Some("z1*z2".into()),
        };
        let out = run(&cmd, Some(&spec), &config).unwrap();
        let ratio = out.document.summary["witness"]["ratio"].as_f64().unwrap();
        assert!((ratio - 0.5).abs() < 1e-10);
    }

    #[test]
    fn essnorm_defaults_p_to_dim_plus_one() {
        let spec = parse_spec("vars=2 rank=1\n[N]\ngen=\"z1\"").unwrap();
        let config = RunConfig {
            degrees: (1, 12),
            ..RunConfig::default()
        };
        let out = run(&Command::EssNorm, Some(&spec), &config).unwrap();
        let p = out.document.summary["modules"][0]["schatten_p"].as_f64().unwrap();
        assert_eq!(p, 3.0);
    }
}
