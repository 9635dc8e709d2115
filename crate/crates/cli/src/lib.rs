//! Command-line front end: argument parsing, dispatch and output formatting.

use std::io::{Read, Write};
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use pel::beta::{reduce_theta, BetaError, StepKind, Strategy};
use pel::harness::{self, find_property, GenConfig, PROPERTIES};
use pel::perm::{classify_normal_form, PermStep, DEFAULT_MAX_STEPS};
use pel::projective::evaluate_dist;
use pel::rpo::certify_with_theta;
use pel::syntax::{is_well_labeled, label_judgment, parse, parse_open, ParseError};
use pel::translate::{parse_source, translate_cbn, translate_cbv, translate_cbv_open};
use pel::typing::{check, infer, parse_type, TypeEnv};
use pel::{Label, LabelSeq, Term};

pub mod goldens;

/// Exit code for domain errors: type errors, open terms, exhausted budgets,
/// failing properties.
pub const EXIT_DOMAIN: i32 = 1;
/// Exit code for usage and parse errors.
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "pel", version, about = "Probabilistic event lambda-calculus workbench")]
struct Cli {
    /// Emit line-delimited JSON records instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug)]
struct Input {
    /// Source file (`-` for standard input).
    file: Option<String>,
    /// Inline term text instead of a file.
    #[arg(short = 'e', long = "expr", conflicts_with = "file")]
    expr: Option<String>,
}

#[derive(clap::Args, Debug)]
struct Openness {
    /// Accept free labels.
    #[arg(long)]
    open: bool,
    /// Label sequence for open terms, innermost first (default: free labels
    /// in order of first occurrence).
    #[arg(long, requires = "open", value_name = "a,b,...")]
    theta: Option<String>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum StrategyArg {
    Perm,
    Beta,
    Full,
    Complete,
    Projective,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Strategy {
        match s {
            StrategyArg::Perm => Strategy::PermOnly,
            StrategyArg::Beta => Strategy::LeftmostBeta,
            StrategyArg::Full => Strategy::FullLeftmost,
            StrategyArg::Complete => Strategy::Complete,
            StrategyArg::Projective => Strategy::Projective,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Translation {
    Cbn,
    Cbv,
    /// The open call-by-value interpretation with its label sequence.
    Open,
}

#[derive(clap::Args, Debug)]
struct ReduceArgs {
    #[command(flatten)]
    input: Input,
    #[command(flatten)]
    openness: Openness,
    #[arg(long, value_enum, default_value = "full")]
    strategy: StrategyArg,
    #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
    max_steps: usize,
    /// Print every step.
    #[arg(long)]
    trace: bool,
    /// Attach a path-ordering certificate to every permutative step.
    #[arg(long)]
    certify: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse a term and describe it.
    Parse {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        openness: Openness,
    },
    /// Print a term in canonical surface syntax.
    Fmt {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        openness: Openness,
    },
    /// Check that a term is label-closed (or typed by the label sequence).
    Check {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        openness: Openness,
    },
    /// Infer a simple type, or check against a given one.
    Typecheck {
        #[command(flatten)]
        input: Input,
        /// Typing environment, e.g. `x:o, f:o->o`.
        #[arg(long, default_value = "")]
        env: String,
        /// Check against this type instead of printing the inferred one.
        #[arg(long = "type", value_name = "TYPE")]
        ty: Option<String>,
    },
    /// Reduce a term with a strategy.
    Reduce(ReduceArgs),
    /// Reduce a term and print every step.
    Trace(ReduceArgs),
    /// Translate a source term with `(+)` sums.
    Translate {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value = "cbv")]
        to: Translation,
    },
    /// Exact output distribution of a label-closed term.
    Dist {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
        max_steps: usize,
    },
    /// Run an executable property (`list` shows them, `all` runs every one).
    Test {
        property: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        trials: Option<usize>,
        /// Maximum term size (for `diamond-exhaustive`, the enumeration bound).
        #[arg(long)]
        size: Option<usize>,
        /// Maximum number of generators.
        #[arg(long)]
        labels: Option<usize>,
    },
}

/// A failure with its exit code.
struct Failure {
    code: i32,
    message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_USAGE, message: message.into() }
}

fn domain(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_DOMAIN, message: message.into() }
}

/// An unbound label means the input is not label-closed, a domain error;
/// everything else is a syntax error.
fn parse_failure(e: ParseError) -> Failure {
    match e {
        ParseError::UnboundLabel { .. } => domain(e.to_string()),
        _ => usage(e.to_string()),
    }
}

type Outcome = Result<(), Failure>;

struct Ctx<'a> {
    json: bool,
    stdin: &'a mut dyn Read,
    out: &'a mut dyn Write,
}

impl Ctx<'_> {
    fn line(&mut self, text: impl AsRef<str>) -> Outcome {
        writeln!(self.out, "{}", text.as_ref()).map_err(|e| domain(format!("writing output: {e}")))
    }

    fn record(&mut self, value: serde_json::Value) -> Outcome {
        self.line(value.to_string())
    }

    fn read(&mut self, input: &Input) -> Result<String, Failure> {
        if let Some(e) = &input.expr {
            return Ok(e.clone());
        }
        match input.file.as_deref() {
            None | Some("-") => {
                let mut s = String::new();
                self.stdin.read_to_string(&mut s).map_err(|e| usage(format!("reading standard input: {e}")))?;
                Ok(s)
            }
            Some(path) => std::fs::read_to_string(path).map_err(|e| usage(format!("{path}: {e}"))),
        }
    }

    fn term(&mut self, input: &Input, openness: &Openness) -> Result<(Term, LabelSeq), Failure> {
        let text = self.read(input)?;
        if !openness.open {
            let t = parse(&text).map_err(parse_failure)?;
            return Ok((t, LabelSeq::empty()));
        }
        let t = parse_open(&text).map_err(parse_failure)?;
        let theta = match &openness.theta {
            Some(names) => LabelSeq::from_names(names).map_err(|e| usage(format!("--theta: {e}")))?,
            None => LabelSeq::new(free_labels_in_order(&t)).expect("distinct labels"),
        };
        Ok((t, theta))
    }
}

/// Free labels of `t` in order of first occurrence.
fn free_labels_in_order(t: &Term) -> Vec<Label> {
    let free = t.free_labels();
    let mut out: Vec<Label> = Vec::new();
    t.walk(&mut |n| {
        if let pel::Node::Choice(a, _, _) = n {
            if free.contains(a) && !out.contains(a) {
                out.push(a.clone());
            }
        }
    });
    out
}

/// Run the tool on `args` (including the program name). Returns the exit code.
pub fn run<I, S>(args: I, stdin: &mut dyn Read, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    let mut ctx = Ctx { json: cli.json, stdin, out };
    match dispatch(&mut ctx, cli.command) {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(ctx: &mut Ctx<'_>, command: Command) -> Outcome {
    match command {
        Command::Parse { input, openness } => cmd_parse(ctx, &input, &openness),
        Command::Fmt { input, openness } => {
            let (t, _) = ctx.term(&input, &openness)?;
            if ctx.json {
                ctx.record(json!({ "term": t.to_string() }))
            } else {
                ctx.line(t.to_string())
            }
        }
        Command::Check { input, openness } => cmd_check(ctx, &input, &openness),
        Command::Typecheck { input, env, ty } => cmd_typecheck(ctx, &input, &env, ty.as_deref()),
        Command::Reduce(args) => cmd_reduce(ctx, &args, args.trace),
        Command::Trace(args) => cmd_reduce(ctx, &args, true),
        Command::Translate { input, to } => cmd_translate(ctx, &input, to),
        Command::Dist { input, max_steps } => cmd_dist(ctx, &input, max_steps),
        Command::Test { property, seed, trials, size, labels } => cmd_test(ctx, &property, seed, trials, size, labels),
    }
}

fn cmd_parse(ctx: &mut Ctx<'_>, input: &Input, openness: &Openness) -> Outcome {
    let (t, theta) = ctx.term(input, openness)?;
    let free_vars: Vec<String> = t.free_vars().iter().map(|v| v.name().to_owned()).collect();
    let class = format!("{:?}", classify_normal_form(&t));
    if ctx.json {
        return ctx.record(json!({
            "term": t.to_string(),
            "size": t.size(),
            "free_vars": free_vars,
            "theta": theta.to_string(),
            "class": class,
        }));
    }
    ctx.line(format!("term: {t}"))?;
    ctx.line(format!("size: {}", t.size()))?;
    ctx.line(format!("free variables: {}", free_vars.join(" ")))?;
    if openness.open {
        ctx.line(format!("theta: {theta}"))?;
    }
    ctx.line(format!("class: {class}"))
}

fn cmd_check(ctx: &mut Ctx<'_>, input: &Input, openness: &Openness) -> Outcome {
    let (t, theta) = ctx.term(input, openness)?;
    if !label_judgment(&theta, &t) {
        return Err(domain(format!("free labels of {t} are not all in {theta}")));
    }
    let well = is_well_labeled(&t);
    if ctx.json {
        return ctx.record(json!({ "term": t.to_string(), "theta": theta.to_string(), "well_labeled": well }));
    }
    if theta.is_empty() {
        ctx.line("label-closed")?;
    } else {
        ctx.line(format!("labels within {theta}"))?;
    }
    ctx.line(if well { "well labelled" } else { "not well labelled (a generator rebinds its own label)" })
}

fn cmd_typecheck(ctx: &mut Ctx<'_>, input: &Input, env: &str, ty: Option<&str>) -> Outcome {
    let text = ctx.read(input)?;
    let t = parse(&text).map_err(parse_failure)?;
    let env = TypeEnv::parse(env).map_err(|e| usage(format!("--env: {e}")))?;
    let describe = |e: pel::typing::TypeError| {
        let extra = if e.is_occurs_check() { " (occurs check)" } else { "" };
        domain(format!("type error {e}{extra}"))
    };
    match ty {
        Some(ty) => {
            let ty = parse_type(ty).map_err(|e| usage(format!("--type: {e}")))?;
            if !check(&env, &t, &ty) {
                let inferred = infer(&env, &t).map_err(describe)?;
                return Err(domain(format!("{t} has principal type {inferred}, which does not specialize to {ty}")));
            }
            if ctx.json {
                ctx.record(json!({ "term": t.to_string(), "type": ty.to_string() }))
            } else {
                ctx.line(format!("ok: {ty}"))
            }
        }
        None => {
            let ty = infer(&env, &t).map_err(describe)?;
            if ctx.json {
                ctx.record(json!({ "term": t.to_string(), "type": ty.to_string() }))
            } else {
                ctx.line(ty.to_string())
            }
        }
    }
}

fn cmd_reduce(ctx: &mut Ctx<'_>, args: &ReduceArgs, trace: bool) -> Outcome {
    let (t, theta) = ctx.term(&args.input, &args.openness)?;
    if !label_judgment(&theta, &t) {
        return Err(domain(format!("free labels of {t} are not all in {theta}")));
    }
    let (reduction, exhausted) = match reduce_theta(&t, args.strategy.into(), &theta, args.max_steps) {
        Ok(r) => (r, None),
        Err(BetaError::StepBudgetExceeded { budget, steps, partial, trace }) => {
            let r = pel::beta::Reduction { term: *partial, trace, steps };
            (r, Some(format!("step budget of {budget} exhausted after {steps} steps")))
        }
        Err(e) => return Err(domain(e.to_string())),
    };
    if trace {
        let mut before = t.clone();
        for step in &reduction.trace {
            let certificate = match (args.certify, step.kind) {
                (true, StepKind::Perm(rule)) => {
                    let ps = PermStep {
                        rule,
                        position: step.position.clone(),
                        before: before.clone(),
                        after: step.term.clone(),
                    };
                    Some(match certify_with_theta(&ps, &theta) {
                        Ok(c) => format!("decreasing under {}", c.precedence),
                        Err(f) => return Err(domain(f.to_string())),
                    })
                }
                _ => None,
            };
            if ctx.json {
                let mut rec = json!({
                    "rule": step.kind.to_string(),
                    "pos": step.position.to_string(),
                    "term": step.term.to_string(),
                });
                if let Some(c) = &certificate {
                    rec["certificate"] = json!(c);
                }
                ctx.record(rec)?;
            } else {
                ctx.line(format!("{step}"))?;
                if let Some(c) = certificate {
                    ctx.line(format!("  certificate: {c}"))?;
                }
            }
            // Projective traces follow one branch; the next step starts from
            // the recorded term either way.
            before = step.term.clone();
        }
    }
    if ctx.json {
        ctx.record(json!({ "term": reduction.term.to_string(), "steps": reduction.steps }))?;
    } else {
        ctx.line(reduction.term.to_string())?;
    }
    match exhausted {
        Some(message) => Err(domain(message)),
        None => Ok(()),
    }
}

fn cmd_translate(ctx: &mut Ctx<'_>, input: &Input, to: Translation) -> Outcome {
    let text = ctx.read(input)?;
    let src = parse_source(&text).map_err(parse_failure)?;
    let (term, theta) = match to {
        Translation::Cbn => (translate_cbn(&src).to_string(), None),
        Translation::Cbv => (translate_cbv(&src).to_string(), None),
        Translation::Open => {
            let interp = translate_cbv_open(&src);
            (interp.body.to_string(), Some(interp.theta.to_string()))
        }
    };
    if ctx.json {
        let mut rec = json!({ "term": term });
        if let Some(th) = theta {
            rec["theta"] = json!(th);
        }
        return ctx.record(rec);
    }
    match theta {
        Some(th) => ctx.line(format!("{th} |- {term}")),
        None => ctx.line(term),
    }
}

fn cmd_dist(ctx: &mut Ctx<'_>, input: &Input, max_steps: usize) -> Outcome {
    let text = ctx.read(input)?;
    let t = parse(&text).map_err(parse_failure)?;
    let d = evaluate_dist(&t, max_steps).map_err(|e| domain(e.to_string()))?;
    for (s, _, p) in d.sorted() {
        if ctx.json {
            ctx.record(json!({ "prob": p.to_string(), "term": s }))?;
        } else {
            ctx.line(format!("{p}\t{s}"))?;
        }
    }
    Ok(())
}

fn cmd_test(
    ctx: &mut Ctx<'_>,
    name: &str,
    seed: u64,
    trials: Option<usize>,
    size: Option<usize>,
    labels: Option<usize>,
) -> Outcome {
    if name == "list" {
        for p in PROPERTIES {
            ctx.line(format!("{:<22} {}", p.name, p.summary))?;
        }
        return ctx.line(format!("{:<22} {}", "diamond-exhaustive", "the diamond check on every small term"));
    }
    let mut reports = Vec::new();
    if name == "diamond-exhaustive" {
        reports.push(harness::check_diamond_exhaustive(size.unwrap_or(8)));
    } else {
        let props: Vec<_> = if name == "all" {
            PROPERTIES.iter().collect()
        } else {
            vec![find_property(name).ok_or_else(|| usage(format!("unknown property `{name}` (try `pel test list`)")))?]
        };
        for p in props {
            let base = (p.config)();
            let cfg = GenConfig {
                seed,
                max_size: size.unwrap_or(base.max_size),
                max_labels: labels.unwrap_or(base.max_labels),
                ..base
            };
            reports.push(harness::run_property(p, &cfg, trials.unwrap_or(p.default_trials)));
        }
    }
    let mut failed = 0;
    for mut r in reports {
        failed += r.failures.len();
        // Timings would make the output differ between runs.
        r.elapsed = Duration::ZERO;
        if ctx.json {
            ctx.record(serde_json::to_value(&r).expect("report serializes"))?;
        } else {
            ctx.line(r.to_string())?;
        }
    }
    if failed > 0 {
        Err(domain(format!("{failed} failing trial(s)")))
    } else {
        Ok(())
    }
}
