use std::fs;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use patcfg::dsl::{parse_document, serialize_grammar, GrammarDocument};
use patcfg::equiv::{check_bounds_with, check_equivalence_with, EquivError, DEFAULT_MAX_LEN_CAP, DEFAULT_SIZE_CAP};
use patcfg::grammar::{validate, Diagnostic, Grammar};
use patcfg::integrate::{integrate_corpus, parse_corpus, IntegrationOptions};
use patcfg::translate::{render, Penalties, TranslateOptions, TranslationFailure, Translator};

/// Exit status for unreadable or unusable inputs.
const EXIT_INPUT: u8 = 2;
const EXIT_SIZE_CAP: u8 = 3;

#[derive(Parser)]
#[command(name = "patcfg", version, about = "Pattern-based translation with synchronous CFG patterns")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    /// TOML file with defaults for budgets, caps and penalties.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Structured,
}

#[derive(Subcommand)]
enum Command {
    /// Check a grammar file; exit 1 on diagnostics, 2 on syntax errors.
    Validate { grammar: PathBuf },
    /// Translate sentences read from standard input, one per line.
    Translate {
        grammar: PathBuf,
        #[command(flatten)]
        opts: TranslateFlags,
        /// Append the three-phase trace after each result.
        #[arg(long)]
        trace: bool,
        /// Worker threads; output keeps input order.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Compare pattern-grammar acceptance with the head-annotated CFG.
    Equiv {
        grammar: PathBuf,
        #[command(flatten)]
        lengths: LengthFlags,
        /// Largest constructed grammar allowed, in rules.
        #[arg(long)]
        size_cap: Option<usize>,
    },
    /// Check that H-acceptance implies T-acceptance implies G-acceptance.
    Bounds {
        grammar: PathBuf,
        #[command(flatten)]
        lengths: LengthFlags,
    },
    /// List every synchronized derivation of each input line.
    Enumerate {
        grammar: PathBuf,
        #[command(flatten)]
        opts: TranslateFlags,
        /// Stop after this many derivations per line.
        #[arg(long, default_value_t = 100_000)]
        limit: usize,
    },
    /// Integrate a corpus of `source<TAB>target` lines into the grammar.
    Integrate {
        grammar: PathBuf,
        corpus: PathBuf,
        /// Where to write the resulting grammar.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        opts: TranslateFlags,
        /// Weight decrease per promotion round [default: 10].
        #[arg(long)]
        weight_step: Option<f64>,
        /// Promotion rounds before a pair is given up [default: 20].
        #[arg(long)]
        max_rounds: Option<usize>,
        /// Weight of memorized sentence patterns [default: -100].
        #[arg(long)]
        sentence_weight: Option<f64>,
        /// Do not re-check earlier pairs after each lexicalization.
        #[arg(long)]
        no_guard: bool,
    },
}

#[derive(Args, Clone, Default)]
struct TranslateFlags {
    /// Number of distinct translations per input.
    #[arg(long)]
    m: Option<usize>,
    /// Derivation expansion budget.
    #[arg(long)]
    budget: Option<usize>,
    /// Treat target head constraints as hard.
    #[arg(long)]
    strict: bool,
    /// Cost per violated constraint [default: 100].
    #[arg(long)]
    violation_penalty: Option<f64>,
    /// Bonus per source head constraint [default: 2].
    #[arg(long)]
    head_constraint_bonus: Option<f64>,
    /// Bonus per source terminal [default: 1].
    #[arg(long)]
    terminal_bonus: Option<f64>,
    /// Cost per derivation node [default: 1].
    #[arg(long)]
    node_penalty: Option<f64>,
    /// Bonus for user patterns [default: 50].
    #[arg(long)]
    user_bonus: Option<f64>,
}

#[derive(Args, Clone, Default)]
struct LengthFlags {
    /// Check every string up to this length [default: 5].
    #[arg(long)]
    max_len: Option<usize>,
    /// Raise the maximum-length cap.
    #[arg(long)]
    len_cap: Option<usize>,
}

/// Settings readable from `--config`.
#[derive(Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
struct FileConfig {
    m: Option<usize>,
    budget: Option<usize>,
    strict: Option<bool>,
    max_len: Option<usize>,
    len_cap: Option<usize>,
    size_cap: Option<usize>,
    jobs: Option<usize>,
    weight_step: Option<f64>,
    max_rounds: Option<usize>,
    sentence_weight: Option<f64>,
    penalties: Option<Penalties>,
}

impl FileConfig {
    fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else { return Ok(FileConfig::default()) };
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    fn translate_options(&self, f: &TranslateFlags, trace: bool) -> Result<TranslateOptions> {
        let mut p = self.penalties.clone().unwrap_or_default();
        p.violation = f.violation_penalty.unwrap_or(p.violation);
        p.head_constraint = f.head_constraint_bonus.unwrap_or(p.head_constraint);
        p.terminal = f.terminal_bonus.unwrap_or(p.terminal);
        p.node = f.node_penalty.unwrap_or(p.node);
        p.user_bonus = f.user_bonus.unwrap_or(p.user_bonus);
        let d = TranslateOptions::default();
        let m = f.m.or(self.m).unwrap_or(d.m);
        if m == 0 {
            bail!("--m must be at least 1");
        }
        Ok(TranslateOptions {
            m,
            node_budget: f.budget.or(self.budget).unwrap_or(d.node_budget),
            strict: f.strict || self.strict.unwrap_or(false),
            trace,
            penalties: p,
        })
    }

    fn lengths(&self, f: &LengthFlags) -> (usize, usize) {
        (f.max_len.or(self.max_len).unwrap_or(5), f.len_cap.or(self.len_cap).unwrap_or(DEFAULT_MAX_LEN_CAP))
    }
}

/// An error that has already been reported and carries its exit status.
#[derive(Debug)]
struct Exit(u8);

impl std::fmt::Display for Exit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "exit {}", self.0)
    }
}

impl std::error::Error for Exit {}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => match e.downcast_ref::<Exit>() {
            Some(Exit(code)) => ExitCode::from(*code),
            None => {
                eprintln!("error: {e:#}");
                ExitCode::from(EXIT_INPUT)
            }
        },
    }
}

fn run(cli: &Cli) -> Result<u8> {
    let config = FileConfig::load(cli.config.as_deref())?;
    let structured = cli.format == Format::Structured;
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match &cli.command {
        Command::Validate { grammar } => cmd_validate(grammar, structured, &mut out),
        Command::Translate { grammar, opts, trace, jobs } => {
            let g = load_valid(grammar)?;
            let opts = config.translate_options(opts, *trace)?;
            let jobs = jobs.or(config.jobs).unwrap_or(1).max(1);
            let lines = read_lines(io::stdin().lock())?;
            cmd_translate(&g, &lines, &opts, jobs, structured, &mut out)
        }
        Command::Equiv { grammar, lengths, size_cap } => {
            let g = load_valid(grammar)?;
            let (max_len, len_cap) = config.lengths(lengths);
            let cap = size_cap.or(config.size_cap).unwrap_or(DEFAULT_SIZE_CAP);
            report_check(check_equivalence_with(&g, max_len, cap, len_cap), structured, &mut out)
        }
        Command::Bounds { grammar, lengths } => {
            let g = load_valid(grammar)?;
            let (max_len, len_cap) = config.lengths(lengths);
            report_check(check_bounds_with(&g, max_len, len_cap), structured, &mut out)
        }
        Command::Enumerate { grammar, opts, limit } => {
            let g = load_valid(grammar)?;
            let opts = config.translate_options(opts, false)?;
            let lines = read_lines(io::stdin().lock())?;
            cmd_enumerate(&g, &lines, &opts, *limit, structured, &mut out)
        }
        Command::Integrate {
            grammar,
            corpus,
            out: out_path,
            opts,
            weight_step,
            max_rounds,
            sentence_weight,
            no_guard,
        } => {
            let g = load_valid(grammar)?;
            let text = fs::read_to_string(corpus).with_context(|| format!("reading {}", corpus.display()))?;
            let pairs = parse_corpus(&text).with_context(|| format!("in {}", corpus.display()))?;
            let d = IntegrationOptions::default();
            let iopts = IntegrationOptions {
                translate: config.translate_options(opts, false)?,
                weight_step: weight_step.or(config.weight_step).unwrap_or(d.weight_step),
                max_rounds: max_rounds.or(config.max_rounds).unwrap_or(d.max_rounds),
                sentence_weight: sentence_weight.or(config.sentence_weight).unwrap_or(d.sentence_weight),
                guard_regressions: !no_guard,
            };
            let (result, report) = integrate_corpus(&g, &pairs, &iopts);
            fs::write(out_path, serialize_grammar(&result))
                .with_context(|| format!("writing {}", out_path.display()))?;
            if structured {
                writeln!(out, "{}", serde_json::to_string(&report)?)?;
            } else {
                writeln!(out, "{report}")?;
            }
            Ok(if report.all_integrated() { 0 } else { 1 })
        }
    }
}

fn read_grammar(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// A parsed grammar that passes validation; anything else is reported and
/// ends the run with the input-error status.
fn load_valid(path: &Path) -> Result<Grammar> {
    let text = read_grammar(path)?;
    let doc = match parse_document(&text) {
        Ok(doc) => doc,
        Err(errors) => {
            for e in errors {
                eprintln!("{}:{e}", path.display());
            }
            return Err(Exit(EXIT_INPUT).into());
        }
    };
    let diagnostics = validate(&doc.grammar);
    if !diagnostics.is_empty() {
        for d in &diagnostics {
            eprintln!("{}", located(path, &doc, d));
        }
        return Err(Exit(EXIT_INPUT).into());
    }
    Ok(doc.grammar)
}

fn position(doc: &GrammarDocument, d: &Diagnostic) -> Option<(usize, usize)> {
    d.pattern.as_ref().and_then(|id| doc.positions.get(id).copied())
}

fn located(path: &Path, doc: &GrammarDocument, d: &Diagnostic) -> String {
    match position(doc, d) {
        Some((line, col)) => format!("{}:{line}:{col}: {d}", path.display()),
        None => format!("{}: {d}", path.display()),
    }
}

fn cmd_validate(path: &Path, structured: bool, out: &mut impl Write) -> Result<u8> {
    let text = match read_grammar(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e:#}");
            return Ok(EXIT_INPUT);
        }
    };
    let doc = match parse_document(&text) {
        Ok(doc) => doc,
        Err(errors) => {
            if structured {
                writeln!(out, "{}", json!({ "valid": false, "parse_errors": errors, "diagnostics": [] }))?;
            } else {
                for e in errors {
                    writeln!(out, "{}:{e}", path.display())?;
                }
            }
            return Ok(EXIT_INPUT);
        }
    };
    let diagnostics = validate(&doc.grammar);
    if structured {
        let items: Vec<_> = diagnostics
            .iter()
            .map(|d| {
                let (line, column) = position(&doc, d).unzip();
                json!({ "pattern": d.pattern, "check": d.check, "message": d.message, "line": line, "column": column })
            })
            .collect();
        writeln!(
            out,
            "{}",
            json!({
                "valid": diagnostics.is_empty(),
                "patterns": doc.grammar.patterns().len(),
                "parse_errors": [],
                "diagnostics": items,
            })
        )?;
    } else if diagnostics.is_empty() {
        writeln!(out, "{}: ok ({} patterns)", path.display(), doc.grammar.patterns().len())?;
    } else {
        for d in &diagnostics {
            writeln!(out, "{}", located(path, &doc, d))?;
        }
    }
    Ok(if diagnostics.is_empty() { 0 } else { 1 })
}

fn read_lines(input: impl BufRead) -> Result<Vec<String>> {
    let lines: io::Result<Vec<String>> = input.lines().collect();
    Ok(lines?.into_iter().filter(|l| !l.trim().is_empty()).collect())
}

fn tokens(line: &str) -> Vec<&str> {
    line.split_whitespace().collect()
}

#[derive(Serialize)]
struct TranslatedLine<'a> {
    input: &'a str,
    ok: bool,
    failure: Option<TranslationFailure>,
    budget_exhausted: bool,
    results: Vec<ResultRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace: Option<Vec<patcfg::translate::TraceEvent>>,
}

#[derive(Serialize)]
struct ResultRow {
    rank: usize,
    cost: f64,
    violations: usize,
    text: String,
    patterns: Vec<String>,
}

fn translate_line<'a>(t: &Translator<'_>, line: &'a str, opts: &TranslateOptions) -> (TranslatedLine<'a>, String) {
    let toks = tokens(line);
    let mut text = String::new();
    let record = match t.translate(&toks, opts) {
        Ok(output) => {
            let results: Vec<ResultRow> = output
                .translations
                .iter()
                .enumerate()
                .map(|(i, tr)| ResultRow {
                    rank: i + 1,
                    cost: tr.cost,
                    violations: tr.violations,
                    text: tr.text(),
                    patterns: tr.derivation.walk().iter().map(|d| d.pattern_id.clone()).collect(),
                })
                .collect();
            for r in &results {
                text.push_str(&format!("{}\t{}\t{}\n", r.rank, r.cost, r.text));
            }
            let trace = opts.trace.then(|| output.translations[0].trace.clone());
            if let Some(events) = &trace {
                text.push('\n');
                text.push_str(&render(line, events, Some(&results[0].text)));
            }
            TranslatedLine {
                input: line,
                ok: true,
                failure: None,
                budget_exhausted: output.budget_exhausted,
                results,
                trace,
            }
        }
        Err((failure, events)) => {
            text.push_str(&format!("FAIL {failure}\n"));
            let trace = opts.trace.then_some(events);
            if let Some(events) = &trace {
                text.push('\n');
                text.push_str(&render(line, events, None));
            }
            TranslatedLine {
                input: line,
                ok: false,
                failure: Some(failure),
                budget_exhausted: false,
                results: Vec::new(),
                trace,
            }
        }
    };
    (record, text)
}

fn cmd_translate(
    g: &Grammar,
    lines: &[String],
    opts: &TranslateOptions,
    jobs: usize,
    structured: bool,
    out: &mut impl Write,
) -> Result<u8> {
    let translator = Translator::new(g);
    let work = |line: &String| {
        let (record, text) = translate_line(&translator, line, opts);
        let rendered = if structured { serde_json::to_string(&record).map(|s| s + "\n") } else { Ok(text) };
        (record.ok, rendered)
    };
    let results: Vec<_> = if jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?;
        pool.install(|| lines.par_iter().map(work).collect())
    } else {
        lines.iter().map(work).collect()
    };
    let mut all_ok = true;
    for (ok, rendered) in results {
        all_ok &= ok;
        out.write_all(rendered?.as_bytes())?;
    }
    Ok(if all_ok { 0 } else { 1 })
}

fn cmd_enumerate(
    g: &Grammar,
    lines: &[String],
    opts: &TranslateOptions,
    limit: usize,
    structured: bool,
    out: &mut impl Write,
) -> Result<u8> {
    let translator = Translator::new(g);
    let mut all_ok = true;
    for line in lines {
        let toks = tokens(line);
        match translator.derivations(&toks, opts, limit) {
            Ok(list) => {
                let rows: Vec<_> = list
                    .derivations
                    .iter()
                    .map(|(cost, d)| {
                        let target = patcfg::translate::build_target(d, g)
                            .map(|t| patcfg::translate::emit(&t).join(" "))
                            .unwrap_or_default();
                        let patterns: Vec<String> = d.walk().iter().map(|n| n.pattern_id.clone()).collect();
                        (*cost, target, patterns)
                    })
                    .collect();
                if structured {
                    let items: Vec<_> =
                        rows.iter().map(|(c, t, p)| json!({ "cost": c, "text": t, "patterns": p })).collect();
                    writeln!(
                        out,
                        "{}",
                        json!({
                            "input": line,
                            "ok": true,
                            "count": rows.len(),
                            "budget_exhausted": list.budget_exhausted,
                            "derivations": items,
                        })
                    )?;
                } else {
                    writeln!(out, "derivations\t{}\t{line}", rows.len())?;
                    for (i, (c, t, p)) in rows.iter().enumerate() {
                        writeln!(out, "{}\t{c}\t{t}\t{}", i + 1, p.join(" "))?;
                    }
                    if list.budget_exhausted {
                        writeln!(out, "budget exhausted")?;
                    }
                }
            }
            Err(f) => {
                all_ok = false;
                if structured {
                    writeln!(out, "{}", json!({ "input": line, "ok": false, "failure": f, "count": 0 }))?;
                } else {
                    writeln!(out, "FAIL {f}")?;
                }
            }
        }
    }
    Ok(if all_ok { 0 } else { 1 })
}

fn report_check(
    result: Result<patcfg::equiv::EquivalenceReport, EquivError>,
    structured: bool,
    out: &mut impl Write,
) -> Result<u8> {
    match result {
        Ok(report) => {
            if structured {
                writeln!(out, "{}", serde_json::to_string(&report)?)?;
            } else {
                writeln!(out, "{report}")?;
            }
            Ok(if report.passed() { 0 } else { 1 })
        }
        Err(EquivError::SizeCap(e)) => {
            if structured {
                writeln!(out, "{}", json!({ "error": "SizeCapExceeded", "projected": e.projected, "cap": e.cap }))?;
            } else {
                writeln!(out, "{e}")?;
            }
            Ok(EXIT_SIZE_CAP)
        }
        Err(e @ EquivError::LengthCap { .. }) => {
            eprintln!("error: {e}");
            Ok(EXIT_INPUT)
        }
    }
}
