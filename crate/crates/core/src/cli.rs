//! Command-line front end. [`cli_main`] is the whole program minus process
//! plumbing, so it can be driven from tests.
//!
//! Exit codes: 0 success, 1 bad input, 2 no convergence, 3 internal
//! invariant breach.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analysis::{
    certify_uniqueness, independence_experiment, normalized_solve, solve_three_clique, three_clique_residual,
    AnalysisError, ExperimentSettings, SolveMode,
};
use crate::enumeration::{
    enumerate_models, grid_oracle_with, EnumerationConfig, EnumerationError, ModelSet, GRID_ORACLE_MAX_ARGUMENTS,
};
use crate::framework::{ArgumentId, SocialFramework, VoteRecord};
use crate::io::output::{emit_result, OutputFormat, Parameters, Payload, ResultEnvelope};
use crate::io::saf::parse_framework;
use crate::semantics::{check_operators, max_distance, OperatorTuple, SemanticsConfig, Valuation};
use crate::solver::{solve, SolverConfig, SolverError};

#[derive(Debug, Parser)]
#[command(name = "saf", version, about = "Social argumentation models under the simple product semantics")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalOpts {
    /// Epsilon in the social support pro / (pro + con + epsilon)
    #[arg(long, global = true, default_value_t = 0.1)]
    epsilon: f64,
    /// Residual tolerance (max-norm)
    #[arg(long, global = true, default_value_t = 1e-12)]
    tol: f64,
    #[arg(long = "max-iter", global = true, default_value_t = 10_000)]
    max_iter: usize,
    /// Picard damping in (0, 1]
    #[arg(long, global = true, default_value_t = 0.5)]
    damping: f64,
    /// Random starts used by enumeration
    #[arg(long, global = true, default_value_t = 256)]
    starts: usize,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Distance under which two models count as the same
    #[arg(long, global = true, default_value_t = 1e-6)]
    dedup: f64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    output: Format,
    /// Divide supports by |A| before solving and rank on rescaled scores
    #[arg(long, global = true)]
    normalize: bool,
    /// Values closer than this are tied in rankings
    #[arg(long = "tie-epsilon", global = true, default_value_t = crate::enumeration::DEFAULT_TIE_EPSILON)]
    tie_epsilon: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum NegationChoice {
    /// 1 - x
    Standard,
    /// 1 - x^2 (not involutive; for exercising the checker)
    Squared,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute one model, starting from the support vector
    Solve { file: PathBuf },
    /// Search for all models
    Enumerate {
        file: PathBuf,
        /// Use the grid oracle instead of multi-start solving
        #[arg(long)]
        oracle: bool,
        /// Grid points per axis minus one, for --oracle
        #[arg(long, default_value_t = 200)]
        resolution: usize,
    },
    /// Check the sufficient condition |Att(a)| * tau(a) < 1
    Certify { file: PathBuf },
    /// Rankings induced by every model
    Rank { file: PathBuf },
    /// Unique model of a three-argument mutual-attack clique
    ThreeClique {
        a1: f64,
        a2: f64,
        a3: f64,
        /// Bisection interval width
        #[arg(long = "bisect-tol", default_value_t = 1e-15)]
        bisect_tol: f64,
    },
    /// Does padding with unrelated arguments change the order of a pair?
    Independence {
        file: PathBuf,
        /// Focus pair, e.g. `a,f`
        #[arg(long, value_parser = parse_pair)]
        focus: (String, String),
        /// Number of isolated arguments to add
        #[arg(long)]
        pad: usize,
        /// Votes of each padding argument, e.g. `1,0`
        #[arg(long = "pad-votes", value_parser = parse_votes, default_value = "1,0")]
        pad_votes: VoteRecord,
        /// Solve with normalised supports
        #[arg(long)]
        normalized: bool,
    },
    /// Sampled check of the well-behavedness axioms
    Axioms {
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, value_enum, default_value_t = NegationChoice::Standard)]
        negation: NegationChoice,
    },
}

fn parse_pair(s: &str) -> Result<(String, String), String> {
    let (a, b) = s.split_once(',').ok_or("expected two names separated by a comma")?;
    Ok((a.trim().to_owned(), b.trim().to_owned()))
}

fn parse_votes(s: &str) -> Result<VoteRecord, String> {
    let (p, c) = s.split_once(',').ok_or("expected PRO,CON")?;
    let count = |v: &str| v.trim().parse::<u64>().map_err(|e| format!("bad vote count `{v}`: {e}"));
    Ok(VoteRecord::new(count(p)?, count(c)?))
}

/// A failure with its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn input(message: impl ToString) -> Self {
        Failure {
            code: 1,
            message: message.to_string(),
        }
    }

    fn breach(message: impl ToString) -> Self {
        Failure {
            code: 3,
            message: message.to_string(),
        }
    }
}

impl From<SolverError> for Failure {
    fn from(e: SolverError) -> Self {
        let code = match e {
            SolverError::NonConvergence { .. } | SolverError::SingularJacobian { .. } => 2,
            SolverError::InvalidConfig(_) | SolverError::Semantics(_) => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<EnumerationError> for Failure {
    fn from(e: EnumerationError) -> Self {
        match e {
            EnumerationError::Solver(inner) => inner.into(),
            other => Failure::input(other),
        }
    }
}

impl From<AnalysisError> for Failure {
    fn from(e: AnalysisError) -> Self {
        let code = match &e {
            AnalysisError::Solver(inner) => return inner.clone().into(),
            AnalysisError::Enumeration(inner) => return inner.clone().into(),
            AnalysisError::NoModel => 2,
            AnalysisError::NotUnique(_) | AnalysisError::CertificateBroken(_) => 3,
            _ => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

struct Context {
    cfg: SemanticsConfig,
    scfg: SolverConfig,
    ecfg: EnumerationConfig,
    format: OutputFormat,
    normalize: bool,
    tie_epsilon: f64,
}

impl Context {
    fn from_opts(g: &GlobalOpts) -> Result<Self, Failure> {
        let cfg = SemanticsConfig::new(g.epsilon).map_err(Failure::input)?;
        let scfg = SolverConfig {
            tolerance: g.tol,
            max_iterations: g.max_iter,
            damping: g.damping,
            ..SolverConfig::default()
        };
        scfg.validate()?;
        let ecfg = EnumerationConfig {
            random_starts: g.starts,
            seed: g.seed,
            dedup_distance: g.dedup,
            ..EnumerationConfig::default()
        };
        ecfg.validate(&scfg)?;
        if g.tie_epsilon.is_nan() || g.tie_epsilon < 0.0 {
            return Err(Failure::input("tie epsilon must be non-negative"));
        }
        Ok(Context {
            cfg,
            scfg,
            ecfg,
            format: match g.output {
                Format::Json => OutputFormat::Json,
                Format::Table => OutputFormat::Table,
            },
            normalize: g.normalize,
            tie_epsilon: g.tie_epsilon,
        })
    }

    fn params(&self) -> Parameters {
        Parameters::new(&self.cfg, &self.scfg)
    }
}

fn load(path: &Path) -> Result<SocialFramework, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    parse_framework(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

/// Re-checks what every model set must satisfy before it is reported.
fn check_model_set(fw: &SocialFramework, ctx: &Context, ms: &ModelSet, supports: Option<&[f64]>) -> Result<(), Failure> {
    let op = crate::semantics::ProductOperator::new(fw, &ctx.cfg, supports).map_err(Failure::breach)?;
    for (i, m) in ms.models.iter().enumerate() {
        let r = op.residual(m.model.values());
        if r > ctx.scfg.tolerance {
            return Err(Failure::breach(format!("model {} has residual {r:e}", i + 1)));
        }
        for other in &ms.models[..i] {
            if max_distance(other.model.values(), m.model.values()) <= ctx.ecfg.dedup_distance {
                return Err(Failure::breach("duplicate models in result set"));
            }
        }
    }
    Ok(())
}

fn run(cli: Cli, out: &mut dyn Write) -> Result<(), Failure> {
    let ctx = Context::from_opts(&cli.global)?;
    let envelope = match cli.command {
        Command::Solve { file } => {
            let fw = load(&file)?;
            if ctx.normalize {
                let sol = normalized_solve(&fw, &ctx.cfg, &ctx.scfg, &ctx.ecfg)?;
                ResultEnvelope::for_normalized(&fw, ctx.params(), &sol, ctx.tie_epsilon)
            } else {
                let start = Valuation::supports(&fw, &ctx.cfg);
                let outcome = solve(&fw, &ctx.cfg, &ctx.scfg, &start, None)?;
                let r = crate::semantics::residual(&fw, &ctx.cfg, &outcome.model);
                if r > ctx.scfg.tolerance {
                    return Err(Failure::breach(format!("solver returned residual {r:e}")));
                }
                ResultEnvelope::for_solve(&fw, ctx.params(), &outcome, ctx.tie_epsilon)
            }
        }
        Command::Enumerate { file, oracle, resolution } => {
            let fw = load(&file)?;
            if ctx.normalize {
                let sol = normalized_solve(&fw, &ctx.cfg, &ctx.scfg, &ctx.ecfg)?;
                ResultEnvelope::for_normalized(&fw, ctx.params(), &sol, ctx.tie_epsilon)
            } else {
                let ms = if oracle {
                    if fw.len() > GRID_ORACLE_MAX_ARGUMENTS {
                        return Err(Failure::input(format!(
                            "--oracle needs at most {GRID_ORACLE_MAX_ARGUMENTS} arguments, file has {}",
                            fw.len()
                        )));
                    }
                    grid_oracle_with(&fw, &ctx.cfg, &ctx.scfg, resolution, ctx.ecfg.dedup_distance)?
                } else {
                    enumerate_models(&fw, &ctx.cfg, &ctx.scfg, &ctx.ecfg)?
                };
                check_model_set(&fw, &ctx, &ms, None)?;
                ResultEnvelope::for_models(&fw, ctx.params(), &ms, ctx.tie_epsilon)
            }
        }
        Command::Rank { file } => {
            let fw = load(&file)?;
            if ctx.normalize {
                let sol = normalized_solve(&fw, &ctx.cfg, &ctx.scfg, &ctx.ecfg)?;
                ResultEnvelope::for_normalized(&fw, ctx.params(), &sol, ctx.tie_epsilon)
            } else {
                let ms = enumerate_models(&fw, &ctx.cfg, &ctx.scfg, &ctx.ecfg)?;
                check_model_set(&fw, &ctx, &ms, None)?;
                ResultEnvelope::for_models(&fw, ctx.params(), &ms, ctx.tie_epsilon)
            }
        }
        Command::Certify { file } => {
            let fw = load(&file)?;
            let cert = certify_uniqueness(&fw, &ctx.cfg);
            ResultEnvelope::for_certificate(&fw, ctx.params(), cert)
        }
        Command::ThreeClique { a1, a2, a3, bisect_tol } => {
            let values = solve_three_clique(a1, a2, a3, bisect_tol)?;
            let supports = [a1, a2, a3];
            ResultEnvelope::without_framework(
                ctx.params(),
                Payload::ThreeClique {
                    supports,
                    values,
                    residual: three_clique_residual(supports, values),
                },
            )
        }
        Command::Independence {
            file,
            focus,
            pad,
            pad_votes,
            normalized,
        } => {
            let fw = load(&file)?;
            let first = ArgumentId::new(focus.0).map_err(Failure::input)?;
            let second = ArgumentId::new(focus.1).map_err(Failure::input)?;
            let mode = if normalized || ctx.normalize {
                SolveMode::Normalized
            } else {
                SolveMode::Raw
            };
            let settings = ExperimentSettings {
                solver: ctx.scfg,
                enumeration: ctx.ecfg,
                tie_epsilon: ctx.tie_epsilon,
            };
            let report = independence_experiment(&fw, &ctx.cfg, (&first, &second), pad, pad_votes, mode, &settings)?;
            let mut env = ResultEnvelope::without_framework(ctx.params(), Payload::Independence(report));
            env.framework = Some(crate::io::output::FrameworkDigest::of(&fw));
            env
        }
        Command::Axioms { samples, negation } => {
            if samples == 0 {
                return Err(Failure::input("--samples must be at least 1"));
            }
            let mut ops = OperatorTuple::simple_product(ctx.cfg);
            if let NegationChoice::Squared = negation {
                ops = ops.with_negation(|x| 1.0 - x * x);
            }
            let report = check_operators(&ops, samples, cli.global.seed);
            ResultEnvelope::without_framework(ctx.params(), Payload::Axioms(report))
        }
    };
    out.write_all(emit_result(&envelope, ctx.format).as_bytes())
        .map_err(|e| Failure::input(format!("cannot write output: {e}")))
}

/// Runs the command line `argv` (program name first) and returns the exit code.
pub fn cli_main<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(rendered.as_bytes())
            } else {
                err.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    match run(cli, out) {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_and_vote_parsers() {
        assert_eq!(parse_pair("a,f").unwrap(), ("a".to_owned(), "f".to_owned()));
        assert!(parse_pair("af").is_err());
        assert_eq!(parse_votes("5, 0").unwrap(), VoteRecord::new(5, 0));
        assert!(parse_votes("-1,0").is_err());
    }

    #[test]
    fn help_exits_zero() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(cli_main(["saf", "--help"], &mut out, &mut err), 0);
        assert!(String::from_utf8(out).unwrap().contains("enumerate"));
    }

    #[test]
    fn usage_error_exits_one() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(cli_main(["saf", "frobnicate"], &mut out, &mut err), 1);
        assert_eq!(cli_main(["saf", "axioms", "--epsilon", "-1"], &mut out, &mut err), 1);
        assert_eq!(cli_main(["saf", "axioms", "--damping", "0"], &mut out, &mut err), 1);
    }
}
