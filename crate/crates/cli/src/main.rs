//! `clslr`: check, type, run and replay models of looping sequences with
//! local rules.

use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{CommandFactory, Parser, Subcommand, ValueEnum};
use clslr::format::{
    parse_model, render, traces_from_json, traces_to_json, ModelFile, TraceFormatError,
};
use clslr::matcher::Matcher;
use clslr::typed::TypedEngine;
use clslr::{
    check_global, equiv, type_pattern, verify_decomposition, Basis, Engine, Strategy, Trace,
    UnknownElementPolicy,
};

#[derive(Parser, Debug)]
#[command(name = "clslr", version, about = "Looping sequences with local rules")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Redexes applied per parallel step.
    #[arg(long, value_enum, default_value_t = StrategyArg::Maximal, global = true)]
    strategy: StrategyArg,

    /// Number of redexes for `random-k`.
    #[arg(long, global = true)]
    k: Option<usize>,

    #[arg(long, default_value_t = 0, global = true)]
    seed: u64,

    /// Number of parallel steps.
    #[arg(long, default_value_t = 1, global = true)]
    steps: usize,

    /// Apply only typed redexes.
    #[arg(long, global = true)]
    typed: bool,

    /// Classification file (`element` statements).
    #[arg(long, global = true)]
    lambda: Option<PathBuf>,

    /// Write the JSON traces here.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,

    /// Unclassified elements are errors (default).
    #[arg(long, global = true, conflicts_with = "permissive_lambda")]
    strict_lambda: bool,

    /// Unclassified elements get the empty membrane type.
    #[arg(long, global = true)]
    permissive_lambda: bool,

    /// Bound on candidates explored by one match.
    #[arg(long, global = true)]
    match_cap: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse a model and check well-formedness.
    Check { model: PathBuf },
    /// Print the pattern type of the term and check the global rules.
    Typecheck { model: PathBuf },
    /// Perform parallel steps and emit the traces.
    Run { model: PathBuf },
    /// Re-execute a trace file and verify it.
    Replay { traces: PathBuf },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum StrategyArg {
    Single,
    RandomK,
    Maximal,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Text,
    Json,
}

/// A reported problem, already prefixed with its location.
struct Diagnostic(String);

fn diag(path: &Path, msg: impl Display) -> Diagnostic {
    Diagnostic(format!("{}: {msg}", path.display()))
}

fn read(path: &Path) -> Result<String, Diagnostic> {
    fs::read_to_string(path).map_err(|e| diag(path, e))
}

fn load_model(path: &Path) -> Result<ModelFile, Diagnostic> {
    parse_model(&read(path)?).map_err(|e| Diagnostic(format!("{}:{e}", path.display())))
}

fn usage_error(kind: ErrorKind, msg: &str) -> ! {
    Cli::command().error(kind, msg).exit()
}

impl Cli {
    fn validate(&self) {
        if self.typed && self.lambda.is_none() {
            usage_error(
                ErrorKind::MissingRequiredArgument,
                "--typed requires --lambda",
            );
        }
        match (self.strategy, self.k) {
            (StrategyArg::RandomK, None) => usage_error(
                ErrorKind::MissingRequiredArgument,
                "--strategy random-k requires --k",
            ),
            (StrategyArg::RandomK, Some(0)) => {
                usage_error(ErrorKind::ValueValidation, "--k must be positive")
            }
            (StrategyArg::RandomK, Some(_)) => {}
            (_, Some(_)) => usage_error(
                ErrorKind::ArgumentConflict,
                "--k only applies to --strategy random-k",
            ),
            _ => {}
        }
        if self.steps == 0 {
            usage_error(ErrorKind::ValueValidation, "--steps must be positive");
        }
    }

    fn strategy(&self) -> Strategy {
        match self.strategy {
            StrategyArg::Single => Strategy::Single,
            StrategyArg::RandomK => Strategy::RandomK(self.k.unwrap_or(1)),
            StrategyArg::Maximal => Strategy::Maximal,
        }
    }

    /// The model with the classification file merged over its own entries.
    fn model(&self, path: &Path) -> Result<ModelFile, Diagnostic> {
        let mut m = load_model(path)?;
        if let Some(lp) = &self.lambda {
            for (e, phi) in load_model(lp)?.classification.iter() {
                m.classification.insert(e.clone(), *phi);
            }
        }
        m.classification.policy = if self.permissive_lambda {
            UnknownElementPolicy::Permissive
        } else {
            UnknownElementPolicy::Strict
        };
        Ok(m)
    }

    fn engine(&self, m: &ModelFile) -> Engine {
        let mut engine = Engine::new(m.globals.clone());
        if let Some(cap) = self.match_cap {
            engine.matcher = Matcher::new(cap);
        }
        engine
    }

    fn check(&self, path: &Path) -> Result<(), Diagnostic> {
        let m = load_model(path)?;
        match self.format {
            Format::Text => println!("ok: {}", render(&m.term)),
            Format::Json => println!(
                "{}",
                serde_json::json!({ "ok": true, "term": render(&m.term) })
            ),
        }
        Ok(())
    }

    fn typecheck(&self, path: &Path) -> Result<(), Diagnostic> {
        let m = self.model(path)?;
        let tau =
            type_pattern(&Basis::new(), &m.classification, &m.term).map_err(|e| diag(path, e))?;
        for g in &m.globals {
            let ok =
                check_global(&Basis::new(), &m.classification, g).map_err(|e| diag(path, e))?;
            if !ok {
                return Err(diag(path, format!("global rule {g} is not well typed")));
            }
        }
        match self.format {
            Format::Text => println!("{tau}"),
            Format::Json => println!("{}", serde_json::json!({ "type": tau.to_string() })),
        }
        Ok(())
    }

    fn run(&self, path: &Path) -> Result<(), Diagnostic> {
        let m = self.model(path)?;
        let engine = self.engine(&m);
        let traces = if self.typed {
            TypedEngine::new(engine, m.classification.clone()).run(
                &m.term,
                self.strategy(),
                self.seed,
                self.steps,
            )
        } else {
            engine.run(&m.term, self.strategy(), self.seed, self.steps)
        }
        .map_err(|e| diag(path, e))?;
        let json = traces_to_json(&traces);
        if let Some(out) = &self.out {
            fs::write(out, format!("{json}\n")).map_err(|e| diag(out, e))?;
        }
        match self.format {
            Format::Json if self.out.is_none() => println!("{json}"),
            Format::Json => {}
            Format::Text => print_summary(&traces),
        }
        Ok(())
    }

    fn replay(&self, path: &Path) -> Result<(), Diagnostic> {
        let traces = traces_from_json(&read(path)?).map_err(|e| match e {
            TraceFormatError::Json(j) => Diagnostic(format!(
                "{}:{}:{}: {j}",
                path.display(),
                j.line(),
                j.column()
            )),
            other => diag(path, other),
        })?;
        for (i, tr) in traces.iter().enumerate() {
            let got = tr
                .replay()
                .map_err(|e| diag(path, format!("trace {i}: {e}")))?;
            if !equiv(&got, &tr.final_term) {
                return Err(diag(
                    path,
                    format!("trace {i}: replay gives {got}, recorded {}", tr.final_term),
                ));
            }
            if !verify_decomposition(tr) {
                return Err(diag(
                    path,
                    format!("trace {i}: applications do not decompose into disjoint changes"),
                ));
            }
            if let Some(next) = traces.get(i + 1) {
                if !equiv(&next.initial, &tr.final_term) {
                    return Err(diag(
                        path,
                        format!("trace {}: does not start where trace {i} ends", i + 1),
                    ));
                }
            }
        }
        match self.format {
            Format::Text => println!("ok: {} traces verified", traces.len()),
            Format::Json => println!(
                "{}",
                serde_json::json!({ "ok": true, "traces": traces.len() })
            ),
        }
        Ok(())
    }
}

fn print_summary(traces: &[Trace]) {
    if let Some(first) = traces.first() {
        println!("initial: {}", render(&first.initial));
    }
    for (i, tr) in traces.iter().enumerate() {
        println!("step {}: {} applications", i + 1, tr.steps.len());
        for lbl in &tr.steps {
            println!("  {lbl}");
        }
        println!("  => {}", render(&tr.final_term));
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    cli.validate();
    let result = match &cli.command {
        Command::Check { model } => cli.check(model),
        Command::Typecheck { model } => cli.typecheck(model),
        Command::Run { model } => cli.run(model),
        Command::Replay { traces } => cli.replay(traces),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Diagnostic(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
    }
}
