//! Module spec files: a small text format declaring the ambient dimensions
//! and named generator families.
//!
//! ```text
//! # comments run to end of line
//! vars=3 rank=2
//! [A]
//! gen="z1^2 + z2*z3" ⊗ e1
//! gen="z2^2" ⊗ (1, 0-1i)
//! [B]
//! gen="z3^2" ⊗ e2
//! ```
//!
//! Statements may also be separated by `;`. The tensor sign accepts the
//! ASCII alias `@`. For rank 1 the vector part may be omitted and defaults
//! to `e1`. Parsing is total: it either returns the full structure or a
//! diagnostic naming the line.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::parse::{parse_homog_poly, parse_vector, ParseError};
use crate::poly::{fmt_complex, HomogPoly, VectorPoly};
use crate::slices::GradedSubmodule;

#[derive(Debug, Error, PartialEq)]
pub enum SpecError {
    #[error("line {line}: {source}")]
    Poly {
        line: usize,
        #[source]
        source: ParseError,
    },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("missing 'vars=<d> rank=<r>' header")]
    MissingHeader,
    #[error("spec declares no module blocks")]
    NoModules,
    #[error("line {line}: generator before any [module] block")]
    GeneratorOutsideModule { line: usize },
    #[error("module '{label}' has no generators")]
    EmptyModule { label: String },
}

/// One `gen="…" ⊗ vector` entry, kept in its parsed shape so printing is
/// exact.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorEntry {
    pub poly: HomogPoly,
    pub vector: Vec<Complex64>,
}

impl GeneratorEntry {
    pub fn to_vector_poly(&self) -> VectorPoly {
        VectorPoly::tensor(&self.poly, &self.vector)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModuleBlock {
    pub label: String,
    pub generators: Vec<GeneratorEntry>,
}

/// A parsed spec file: header dimensions plus named module blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct ModuleSpecFile {
    pub vars: usize,
    pub rank: usize,
    pub modules: Vec<ModuleBlock>,
}

impl ModuleSpecFile {
    /// Materializes every block as a graded submodule.
    pub fn submodules(&self) -> Vec<GradedSubmodule> {
        self.modules
            .iter()
            .map(|block| {
                GradedSubmodule::new(
                    block.label.clone(),
                    block
                        .generators
                        .iter()
                        .map(GeneratorEntry::to_vector_poly)
                        .collect(),
                )
                .expect("validated at parse time")
            })
            .collect()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.modules.iter().map(|m| m.label.as_str()).collect()
    }
}

/// Summary of a spec for echoing into reports.
#[derive(Clone, Debug, Serialize)]
pub struct SpecEcho {
    pub vars: usize,
    pub rank: usize,
    pub modules: Vec<SpecModuleEcho>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpecModuleEcho {
    pub label: String,
    pub generators: Vec<String>,
}

impl From<&ModuleSpecFile> for SpecEcho {
    fn from(spec: &ModuleSpecFile) -> Self {
        SpecEcho {
            vars: spec.vars,
            rank: spec.rank,
            modules: spec
                .modules
                .iter()
                .map(|m| SpecModuleEcho {
                    label: m.label.clone(),
                    generators: m
                        .generators
                        .iter()
                        .map(|g| print_generator(g, spec.rank))
                        .collect(),
                })
                .collect(),
        }
    }
}

pub fn parse_spec(text: &str) -> Result<ModuleSpecFile, SpecError> {
    let mut vars: Option<usize> = None;
    let mut rank: Option<usize> = None;
    let mut modules: Vec<ModuleBlock> = Vec::new();

    for (line_idx, raw_line) in text.lines().enumerate() {
        let line_no = line_idx + 1;
        let without_comment = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        };
        for raw_stmt in without_comment.split(';') {
            // A statement may open with one `[label]`, optionally followed by
            // a header or generator item on the same statement.
            let mut stmt = raw_stmt.trim();
            while let Some(rest) = stmt.strip_prefix('[') {
                let end = rest.find(']').ok_or_else(|| SpecError::Malformed {
                    line: line_no,
                    message: "unterminated [module] label".into(),
                })?;
                let label = rest[..end].trim();
                if label.is_empty() {
                    return Err(SpecError::Malformed {
                        line: line_no,
                        message: "empty module label".into(),
                    });
                }
                modules.push(ModuleBlock {
                    label: label.to_string(),
                    generators: Vec::new(),
                });
                stmt = rest[end + 1..].trim();
            }
            if stmt.is_empty() {
                continue;
            }
            if stmt.starts_with("vars") || stmt.starts_with("rank") {
                for field in stmt.split_whitespace() {
                    let (key, value) =
                        field.split_once('=').ok_or_else(|| SpecError::Malformed {
                            line: line_no,
                            message: format!("expected key=value, got '{field}'"),
                        })?;
                    let parsed: usize = value.parse().map_err(|_| SpecError::Malformed {
                        line: line_no,
                        message: format!("'{key}' needs a positive integer, got '{value}'"),
                    })?;
                    match key {
                        "vars" => vars = Some(parsed),
                        "rank" => rank = Some(parsed),
                        _ => {
                            return Err(SpecError::Malformed {
                                line: line_no,
                                message: format!("unknown header field '{key}'"),
                            })
                        }
                    }
                }
            } else if let Some(rest) = stmt.strip_prefix("gen") {
                let d = vars.ok_or(SpecError::MissingHeader)?;
                let r = rank.unwrap_or(1);
                let rest = rest.trim_start();
                let rest = rest.strip_prefix('=').ok_or_else(|| SpecError::Malformed {
                    line: line_no,
                    message: "expected gen=\"...\"".into(),
                })?;
                let rest = rest.trim_start();
                let (poly_text, tail) = take_quoted(rest).ok_or_else(|| SpecError::Malformed {
                    line: line_no,
                    message: "generator polynomial must be double-quoted".into(),
                })?;
                let poly = parse_homog_poly(poly_text, d)
                    .map_err(|source| SpecError::Poly { line: line_no, source })?;
                let tail = tail.trim();
                let vector = if tail.is_empty() {
                    if r == 1 {
                        vec![Complex64::ONE]
                    } else {
                        return Err(SpecError::Malformed {
                            line: line_no,
                            message: format!("rank {r} generator needs '⊗ <vector>'"),
                        });
                    }
                } else {
                    let vec_text = tail
                        .strip_prefix('⊗')
                        .or_else(|| tail.strip_prefix('@'))
                        .ok_or_else(|| SpecError::Malformed {
                            line: line_no,
                            message: format!(
                                "expected '⊗ <vector>' after generator, got '{tail}'"
                            ),
                        })?;
                    parse_vector(vec_text.trim(), r)
                        .map_err(|source| SpecError::Poly { line: line_no, source })?
                };
                let block = modules
                    .last_mut()
                    .ok_or(SpecError::GeneratorOutsideModule { line: line_no })?;
                block.generators.push(GeneratorEntry { poly, vector });
            } else {
                return Err(SpecError::Malformed {
                    line: line_no,
                    message: format!("unrecognized statement '{stmt}'"),
                });
            }
        }
    }

    let vars = vars.ok_or(SpecError::MissingHeader)?;
    let rank = rank.unwrap_or(1);
    if modules.is_empty() {
        return Err(SpecError::NoModules);
    }
    for block in &modules {
        if block.generators.is_empty() {
            return Err(SpecError::EmptyModule {
                label: block.label.clone(),
            });
        }
    }
    Ok(ModuleSpecFile { vars, rank, modules })
}

fn take_quoted(text: &str) -> Option<(&str, &str)> {
    let rest = text.strip_prefix('"')?;
    let end = rest.find('"')?;
    Some((&rest[..end], &rest[end + 1..]))
}

fn print_generator(entry: &GeneratorEntry, rank: usize) -> String {
    let is_e1 = entry.vector.first() == Some(&Complex64::ONE)
        && entry.vector[1..].iter().all(|c| *c == Complex64::ZERO);
    if rank == 1 && is_e1 {
        return format!("gen=\"{}\"", entry.poly);
    }
    // Prefer the e<j> shorthand for standard basis vectors.
    let basis_index = {
        let ones: Vec<usize> = entry
            .vector
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != Complex64::ZERO)
            .map(|(i, _)| i)
            .collect();
        match ones.as_slice() {
            [j] if entry.vector[*j] == Complex64::ONE => Some(*j + 1),
            _ => None,
        }
    };
    match basis_index {
        Some(j) => format!("gen=\"{}\" ⊗ e{}", entry.poly, j),
        None => {
            let comps: Vec<String> = entry.vector.iter().map(|c| fmt_complex(*c)).collect();
            format!("gen=\"{}\" ⊗ ({})", entry.poly, comps.join(", "))
        }
    }
}

/// Canonical printer; `parse_spec(print_spec(s)) == s` for every valid spec.
pub fn print_spec(spec: &ModuleSpecFile) -> String {
    let mut out = format!("vars={} rank={}\n", spec.vars, spec.rank);
    for block in &spec.modules {
        out.push_str(&format!("[{}]\n", block.label));
        for entry in &block.generators {
            out.push_str(&print_generator(entry, spec.rank));
            out.push('\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_spec() {
        let spec = parse_spec("vars=3 rank=1; [A] gen=\"z1\"").unwrap();
        assert_eq!(spec.vars, 3);
        assert_eq!(spec.rank, 1);
        assert_eq!(spec.modules.len(), 1);
        assert_eq!(spec.modules[0].label, "A");
        let modules = spec.submodules();
        assert_eq!(modules[0].generators().len(), 1);
        assert_eq!(modules[0].rank(), 1);
    }

    #[test]
    fn vector_valued_generators() {
        let text = "vars=3 rank=2\n[A]\ngen=\"z1^2 + z2*z3\" ⊗ e1\ngen=\"z2^2\" ⊗ (1, 0-1i)";
        let spec = parse_spec(text).unwrap();
        assert_eq!(spec.rank, 2);
        let gens = &spec.modules[0].generators;
        assert_eq!(gens[0].vector, vec![Complex64::ONE, Complex64::ZERO]);
        assert_eq!(
            gens[1].vector,
            vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, -1.0)]
        );
        // ASCII alias for the tensor sign.
        let alias = parse_spec("vars=2 rank=2; [B] gen=\"z1\" @ e2").unwrap();
        assert_eq!(
            alias.modules[0].generators[0].vector,
            vec![Complex64::ZERO, Complex64::ONE]
        );
    }

    #[test]
    fn rejects_non_homogeneous_with_line() {
        let err = parse_spec("vars=2 rank=1\n[A]\ngen=\"z1 + z2^2\"").unwrap_err();
        match err {
            SpecError::Poly { line, source } => {
                assert_eq!(line, 3);
                assert_eq!(source.to_string(), "non-homogeneous: degrees 1 and 2");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn rejects_structural_problems() {
        assert_eq!(
            parse_spec("[A] gen=\"z1\"").unwrap_err(),
            SpecError::MissingHeader
        );
        assert_eq!(parse_spec("vars=2 rank=1").unwrap_err(), SpecError::NoModules);
        assert!(matches!(
            parse_spec("vars=2 rank=1; gen=\"z1\""),
            Err(SpecError::GeneratorOutsideModule { line: 1 })
        ));
        assert!(matches!(
            parse_spec("vars=2 rank=1; [A]"),
            Err(SpecError::EmptyModule { .. })
        ));
        assert!(matches!(
            parse_spec("vars=2 rank=2; [A] gen=\"z1\""),
            Err(SpecError::Malformed { .. })
        ));
        // Vector length mismatch surfaces from the vector parser.
        assert!(matches!(
            parse_spec("vars=2 rank=2; [A] gen=\"z1\" ⊗ (1, 2, 3)"),
            Err(SpecError::Poly { .. })
        ));
    }

    #[test]
    fn comments_and_semicolons() {
        let text = "# geometry battery\nvars=3 rank=1 # trailing\n[A] ; gen=\"z1\" ; gen=\"z2\"\n[B]\ngen=\"z3\"";
        let spec = parse_spec(text).unwrap();
        assert_eq!(spec.modules.len(), 2);
        assert_eq!(spec.modules[0].generators.len(), 2);
    }

    #[test]
    fn print_parse_round_trip() {
        let text = "vars=3 rank=2\n[A]\ngen=\"z1^2 + (0+1i)*z2*z3\" ⊗ e1\ngen=\"0.5*z2^2\" ⊗ (1, 0-1i)\n[B]\ngen=\"z3^2\" ⊗ e2\n";
        let spec = parse_spec(text).unwrap();
        let printed = print_spec(&spec);
        let reparsed = parse_spec(&printed).unwrap();
        assert_eq!(spec, reparsed);
    }
}
