//! Result envelopes and their JSON and plain-text table renderings.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::analysis::{IndependenceReport, NormalizedSolution, PairOrder, UniquenessCertificate};
use crate::enumeration::{ModelSet, Ranking};
use crate::framework::SocialFramework;
use crate::semantics::{AxiomReport, AxiomStatus, SemanticsConfig};
use crate::solver::{Phase, SolveOutcome, SolverConfig};

/// Significant digits in table output.
pub const SIGNIFICANT_DIGITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Table,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrameworkDigest {
    pub arguments: usize,
    pub attacks: usize,
}

impl FrameworkDigest {
    pub fn of(fw: &SocialFramework) -> Self {
        FrameworkDigest {
            arguments: fw.len(),
            attacks: fw.attack_count(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Parameters {
    pub epsilon: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub damping: f64,
    pub newton_switch_residual: f64,
}

impl Parameters {
    pub fn new(cfg: &SemanticsConfig, scfg: &SolverConfig) -> Self {
        Parameters {
            epsilon: cfg.epsilon(),
            tolerance: scfg.tolerance,
            max_iterations: scfg.max_iterations,
            damping: scfg.damping,
            newton_switch_residual: scfg.newton_switch_residual,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SolverMetadata {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method_trace: Option<Vec<Phase>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub starts: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub non_converged: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exhaustive: Option<bool>,
}

impl SolverMetadata {
    fn for_models(ms: &ModelSet) -> Self {
        SolverMetadata {
            starts: Some(ms.starts_used),
            non_converged: Some(ms.non_converged),
            exhaustive: Some(ms.exhaustive),
            ..Default::default()
        }
    }
}

/// One model row: values keyed by argument name.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelRow {
    pub values: BTreeMap<String, f64>,
    pub residual: f64,
    pub ranking: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Payload {
    Models { models: Vec<ModelRow> },
    Normalized {
        normalized: ModelRow,
        scores: BTreeMap<String, f64>,
        score_ranking: String,
    },
    Certificate(UniquenessCertificate),
    ThreeClique {
        supports: [f64; 3],
        values: [f64; 3],
        residual: f64,
    },
    Independence(IndependenceReport),
    Axioms(AxiomReport),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultEnvelope {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub framework: Option<FrameworkDigest>,
    pub parameters: Parameters,
    pub payload: Payload,
    pub solver: SolverMetadata,
}

fn named(fw: &SocialFramework, values: &[f64]) -> BTreeMap<String, f64> {
    fw.arguments()
        .iter()
        .map(|a| a.as_str().to_owned())
        .zip(values.iter().copied())
        .collect()
}

fn row(fw: &SocialFramework, values: &[f64], residual: f64, tie_epsilon: f64) -> ModelRow {
    ModelRow {
        values: named(fw, values),
        residual,
        ranking: Ranking::from_values(fw, values, tie_epsilon).to_string(),
    }
}

impl ResultEnvelope {
    pub fn for_solve(fw: &SocialFramework, params: Parameters, out: &SolveOutcome, tie_epsilon: f64) -> Self {
        ResultEnvelope {
            framework: Some(FrameworkDigest::of(fw)),
            parameters: params,
            payload: Payload::Models {
                models: vec![row(fw, out.model.values(), out.residual, tie_epsilon)],
            },
            solver: SolverMetadata {
                iterations: Some(out.iterations),
                method_trace: Some(out.method_trace.clone()),
                ..Default::default()
            },
        }
    }

    pub fn for_models(fw: &SocialFramework, params: Parameters, ms: &ModelSet, tie_epsilon: f64) -> Self {
        let models = ms
            .models
            .iter()
            .map(|m| row(fw, m.model.values(), m.residual, tie_epsilon))
            .collect();
        ResultEnvelope {
            framework: Some(FrameworkDigest::of(fw)),
            parameters: params,
            payload: Payload::Models { models },
            solver: SolverMetadata::for_models(ms),
        }
    }

    pub fn for_normalized(
        fw: &SocialFramework,
        params: Parameters,
        sol: &NormalizedSolution,
        tie_epsilon: f64,
    ) -> Self {
        let residual = sol.models.models.first().map_or(0.0, |m| m.residual);
        ResultEnvelope {
            framework: Some(FrameworkDigest::of(fw)),
            parameters: params,
            payload: Payload::Normalized {
                normalized: row(fw, sol.normalized_model.values(), residual, tie_epsilon),
                scores: named(fw, &sol.scores),
                score_ranking: Ranking::from_values(fw, &sol.scores, tie_epsilon).to_string(),
            },
            solver: SolverMetadata::for_models(&sol.models),
        }
    }

    pub fn for_certificate(fw: &SocialFramework, params: Parameters, cert: UniquenessCertificate) -> Self {
        ResultEnvelope {
            framework: Some(FrameworkDigest::of(fw)),
            parameters: params,
            payload: Payload::Certificate(cert),
            solver: SolverMetadata::default(),
        }
    }

    pub fn without_framework(params: Parameters, payload: Payload) -> Self {
        ResultEnvelope {
            framework: None,
            parameters: params,
            payload,
            solver: SolverMetadata::default(),
        }
    }
}

/// Formats `x` with [`SIGNIFICANT_DIGITS`] significant digits.
pub fn format_significant(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    if !(-5..12).contains(&magnitude) {
        return format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    }
    let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

pub fn emit_result(env: &ResultEnvelope, format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(env).expect("envelope is always serialisable");
            s.push('\n');
            s
        }
        OutputFormat::Table => render_table(env),
    }
}

/// Left-aligned columns separated by two spaces.
fn columns(rows: &[Vec<String>]) -> String {
    let width = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..width)
        .map(|c| {
            rows.iter()
                .filter_map(|r| r.get(c))
                .map(|s| s.chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for r in rows {
        let line: Vec<String> = r
            .iter()
            .enumerate()
            .map(|(c, cell)| format!("{cell:<w$}", w = widths[c]))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

fn model_table(header_names: Vec<String>, rows: &[&ModelRow]) -> String {
    let mut table = vec![std::iter::once("model".to_owned())
        .chain(header_names.iter().cloned())
        .chain(["residual".to_owned(), "ranking".to_owned()])
        .collect::<Vec<_>>()];
    for (i, r) in rows.iter().enumerate() {
        let mut line = vec![(i + 1).to_string()];
        line.extend(header_names.iter().map(|n| format_significant(r.values[n])));
        line.push(format!("{:.3e}", r.residual));
        line.push(r.ranking.clone());
        table.push(line);
    }
    columns(&table)
}

fn render_table(env: &ResultEnvelope) -> String {
    let mut out = String::new();
    match &env.payload {
        Payload::Models { models } => {
            let names: Vec<String> = models
                .first()
                .map(|m| m.values.keys().cloned().collect())
                .unwrap_or_default();
            let refs: Vec<&ModelRow> = models.iter().collect();
            out.push_str(&model_table(names, &refs));
        }
        Payload::Normalized {
            normalized,
            scores,
            score_ranking,
        } => {
            let mut table = vec![vec!["argument".to_owned(), "normalized".to_owned(), "score".to_owned()]];
            for (name, score) in scores {
                table.push(vec![
                    name.clone(),
                    format_significant(normalized.values[name]),
                    format_significant(*score),
                ]);
            }
            out.push_str(&columns(&table));
            let _ = writeln!(out, "ranking: {score_ranking}");
        }
        Payload::Certificate(cert) => {
            let _ = writeln!(out, "holds: {}", cert.holds);
            let _ = writeln!(
                out,
                "witness: {}",
                cert.witness.as_ref().map_or("-".to_owned(), |w| w.to_string())
            );
            let mut table = vec![vec!["argument".to_owned(), "margin".to_owned()]];
            for (a, m) in &cert.margins {
                table.push(vec![a.to_string(), format_significant(*m)]);
            }
            out.push_str(&columns(&table));
        }
        Payload::ThreeClique {
            supports,
            values,
            residual,
        } => {
            let mut table = vec![vec!["argument".to_owned(), "support".to_owned(), "value".to_owned()]];
            for k in 0..3 {
                table.push(vec![
                    format!("x{}", k + 1),
                    format_significant(supports[k]),
                    format_significant(values[k]),
                ]);
            }
            out.push_str(&columns(&table));
            let _ = writeln!(out, "residual: {residual:.3e}");
        }
        Payload::Independence(r) => {
            let (a, b) = (&r.focus_pair.0, &r.focus_pair.1);
            let order = |o: PairOrder| match o {
                PairOrder::FirstAbove => format!("{a} ≻ {b}"),
                PairOrder::Tied => format!("{a} ≃ {b}"),
                PairOrder::SecondAbove => format!("{b} ≻ {a}"),
            };
            let table = vec![
                vec!["".to_owned(), a.to_string(), b.to_string(), "order".to_owned()],
                vec![
                    "before".to_owned(),
                    format_significant(r.values_before.0),
                    format_significant(r.values_before.1),
                    order(r.ranking_before),
                ],
                vec![
                    format!("after +{}", r.padding_count),
                    format_significant(r.values_after.0),
                    format_significant(r.values_after.1),
                    order(r.ranking_after),
                ],
            ];
            out.push_str(&columns(&table));
            let _ = writeln!(out, "violated: {}", r.violated);
        }
        Payload::Axioms(report) => {
            let mut table = vec![vec!["operator".to_owned(), "axiom".to_owned(), "status".to_owned()]];
            for res in &report.results {
                let status = match &res.status {
                    AxiomStatus::Pass => "pass".to_owned(),
                    AxiomStatus::Fail { witness, detail } => {
                        let w: Vec<String> = witness.iter().map(|v| format_significant(*v)).collect();
                        format!("FAIL at ({}): {detail}", w.join(", "))
                    }
                    AxiomStatus::NotCheckable { .. } => "not checkable numerically".to_owned(),
                };
                table.push(vec![res.operator.to_owned(), res.axiom.to_owned(), status]);
            }
            out.push_str(&columns(&table));
            let _ = writeln!(out, "all checkable axioms hold: {}", report.all_passed());
        }
    }
    out
}
