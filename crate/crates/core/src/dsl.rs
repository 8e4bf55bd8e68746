//! Reading and writing the textual grammar format.
//!
//! ```text
//! start S
//! feature PRO
//! feature OBJ local
//! aggregate AGRS/AGRV:
//!   +NOMI+3RD+SG | +FIN+3SG
//! pattern c w=0: know:VP:1:+OBJ well -> VP:1 || VP:1 <- connaitre:VP:1:+OBJ bien
//! lex i: know:knows -> V:+FIN+3SG || V:+FIN+3SG <- connaitre:connait
//! ```
//!
//! See `docs/grammar-format.md` for the full description.

use std::collections::{HashMap, HashSet};
use std::fmt::{self, Write as _};

use serde::Serialize;
use thiserror::Error;

use crate::grammar::{
    is_nonterminal_name, AggregateColumn, AggregatePair, AggregateUse, FeatureClass, FeatureRegistry, FeatureValue,
    FeatureVector, Grammar, Pattern, PatternElement, Provenance, Skeleton, Symbol,
};

#[derive(Clone, Debug, PartialEq, Eq, Error, Serialize)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

/// A parsed grammar together with where each pattern was declared.
#[derive(Clone, Debug)]
pub struct GrammarDocument {
    pub source_text: String,
    pub grammar: Grammar,
    pub positions: HashMap<String, (usize, usize)>,
}

pub fn parse_grammar(text: &str) -> Result<Grammar, Vec<ParseError>> {
    parse_document(text).map(|d| d.grammar)
}

pub fn parse_document(text: &str) -> Result<GrammarDocument, Vec<ParseError>> {
    let mut p = Parser { errors: Vec::new() };
    let doc = p.document(text);
    if p.errors.is_empty() {
        Ok(doc)
    } else {
        Err(p.errors)
    }
}

/// A whitespace-delimited token with its 1-based line and column.
#[derive(Clone, Copy, Debug)]
struct Tok<'a> {
    text: &'a str,
    line: usize,
    column: usize,
}

enum Stmt<'a> {
    Start(Tok<'a>),
    Feature { name: Tok<'a>, local: bool },
    Aggregate { header: Tok<'a>, rows: Vec<(Tok<'a>, &'a str)> },
    Rule { lex: bool, header: Tok<'a>, line: &'a str, body_offset: usize },
}

struct Parser {
    errors: Vec<ParseError>,
}

fn column_of(line: &str, byte: usize) -> usize {
    line[..byte].chars().count() + 1
}

fn tokens<'a>(line: &'a str, from: usize, lineno: usize) -> Vec<Tok<'a>> {
    let base = line.as_ptr() as usize;
    line[from..]
        .split_whitespace()
        .map(|t| Tok { text: t, line: lineno, column: column_of(line, t.as_ptr() as usize - base) })
        .collect()
}

/// Tokens of `part`, a subslice of `line`, with columns relative to `line`.
fn tokens_in<'a>(line: &'a str, part: &'a str, lineno: usize) -> Vec<Tok<'a>> {
    let from = part.as_ptr() as usize - line.as_ptr() as usize;
    let end = from + part.len();
    tokens(line, from, lineno)
        .into_iter()
        .take_while(|t| (t.text.as_ptr() as usize - line.as_ptr() as usize) < end)
        .map(|mut t| {
            let start = t.text.as_ptr() as usize - line.as_ptr() as usize;
            t.text = &t.text[..t.text.len().min(end - start)];
            t
        })
        .collect()
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

impl Parser {
    fn err(&mut self, line: usize, column: usize, message: impl Into<String>) {
        self.errors.push(ParseError { line, column, message: message.into() });
    }

    fn err_at(&mut self, tok: Tok<'_>, message: impl Into<String>) {
        self.err(tok.line, tok.column, message);
    }

    fn document(&mut self, text: &str) -> GrammarDocument {
        let stmts = self.statements(text);

        let mut registry = FeatureRegistry::new();
        let mut start: Option<Tok<'_>> = None;
        for stmt in &stmts {
            match stmt {
                Stmt::Feature { name, local } => {
                    if !name.text.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                        self.err_at(*name, format!("invalid feature name {}", name.text));
                        continue;
                    }
                    let class = if *local { FeatureClass::Local } else { FeatureClass::Head };
                    if let Err(e) = registry.add_feature(name.text, class) {
                        self.err_at(*name, e.to_string());
                    }
                }
                Stmt::Start(tok) => {
                    if start.is_some() {
                        self.err_at(*tok, "start symbol declared twice");
                    } else if !is_nonterminal_name(tok.text) {
                        self.err_at(*tok, format!("start symbol {} is not a nonterminal", tok.text));
                    } else {
                        start = Some(*tok);
                    }
                }
                _ => {}
            }
        }
        for stmt in &stmts {
            if let Stmt::Aggregate { header, rows } = stmt {
                self.aggregate(&mut registry, *header, rows);
            }
        }

        let mut patterns = Vec::new();
        let mut positions = HashMap::new();
        for stmt in &stmts {
            if let Stmt::Rule { lex, header, line, body_offset } = stmt {
                if let Some(p) = self.rule(&registry, *lex, *header, line, *body_offset) {
                    if positions.contains_key(&p.id) {
                        self.err_at(*header, format!("pattern id {} declared twice", p.id));
                        continue;
                    }
                    positions.insert(p.id.clone(), (header.line, header.column));
                    patterns.push(p);
                }
            }
        }
        let start = Symbol::nonterminal(start.map(|t| t.text).unwrap_or("S"));
        GrammarDocument { source_text: text.to_string(), grammar: Grammar::new(registry, patterns, start), positions }
    }

    fn statements<'a>(&mut self, text: &'a str) -> Vec<Stmt<'a>> {
        let mut out = Vec::new();
        let mut lines = text.lines().enumerate().peekable();
        while let Some((i, raw)) = lines.next() {
            let lineno = i + 1;
            let line = strip_comment(raw);
            let toks = tokens(line, 0, lineno);
            let Some(first) = toks.first().copied() else { continue };
            match first.text {
                "start" => {
                    if toks.len() != 2 {
                        self.err_at(first, "expected `start <NONTERMINAL>`");
                    } else {
                        out.push(Stmt::Start(toks[1]));
                    }
                }
                "feature" => match toks.as_slice() {
                    [_, name] => out.push(Stmt::Feature { name: *name, local: false }),
                    [_, name, flag] if flag.text == "local" => out.push(Stmt::Feature { name: *name, local: true }),
                    [_, _, flag] => self.err_at(*flag, format!("unknown feature flag {}", flag.text)),
                    _ => self.err_at(first, "expected `feature <NAME> [local]`"),
                },
                "aggregate" => {
                    let header = toks.get(1).copied().unwrap_or(first);
                    if toks.len() != 2 || !header.text.ends_with(':') {
                        self.err_at(first, "expected `aggregate <A>/<B>:`");
                    }
                    let mut rows = Vec::new();
                    while let Some((j, next)) = lines.peek().copied() {
                        let body = strip_comment(next);
                        if body.trim().is_empty() || !body.starts_with(char::is_whitespace) {
                            break;
                        }
                        lines.next();
                        let trimmed_at = body.len() - body.trim_start().len();
                        let tok = Tok { text: body.trim(), line: j + 1, column: column_of(body, trimmed_at) };
                        rows.push((tok, body.trim()));
                    }
                    if toks.len() == 2 && header.text.ends_with(':') {
                        out.push(Stmt::Aggregate { header, rows });
                    }
                }
                "pattern" | "lex" => {
                    let Some(colon) = line.find(':') else {
                        self.err_at(first, "missing `:` after pattern header");
                        continue;
                    };
                    let header_toks = tokens(&line[..colon], 0, lineno);
                    if header_toks.len() < 2 {
                        self.err_at(first, "missing pattern id");
                        continue;
                    }
                    out.push(Stmt::Rule {
                        lex: first.text == "lex",
                        header: header_toks[1],
                        line,
                        body_offset: colon + 1,
                    });
                }
                other => self.err_at(first, format!("unknown statement `{other}`")),
            }
        }
        out
    }

    fn aggregate(&mut self, registry: &mut FeatureRegistry, header: Tok<'_>, rows: &[(Tok<'_>, &str)]) {
        let name = header.text.trim_end_matches(':');
        let Some((first, second)) = name.split_once('/') else {
            self.err_at(header, "aggregate name must be `<A>/<B>`");
            return;
        };
        let valid = |s: &str| !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
        if !valid(first) || !valid(second) {
            self.err_at(header, format!("invalid aggregate name {name}"));
            return;
        }
        let mut parsed = Vec::new();
        for (tok, text) in rows {
            let Some((a, b)) = text.split_once('|') else {
                self.err_at(*tok, "aggregate row must be `<vector> | <vector>`");
                continue;
            };
            let b_tok = Tok { column: tok.column + a.chars().count() + 1, ..*tok };
            let va = self.vector_literal(registry, a.trim(), *tok);
            let vb = self.vector_literal(registry, b.trim(), b_tok);
            if let (Some(va), Some(vb)) = (va, vb) {
                parsed.push((va, vb));
            }
        }
        let pair = AggregatePair { first: first.to_string(), second: second.to_string(), rows: parsed };
        if let Err(e) = registry.add_aggregate(pair) {
            self.err_at(header, e.to_string());
        }
    }

    /// `+A-B` run, or `_` for the all-unbound vector.
    fn vector_literal(&mut self, registry: &FeatureRegistry, text: &str, at: Tok<'_>) -> Option<FeatureVector> {
        if text == "_" || text.is_empty() {
            return Some(registry.unbound());
        }
        let (v, agg) = self.feature_spec(registry, text, at)?;
        if agg.is_some() {
            self.err_at(at, "aggregate specifier not allowed inside an aggregate table");
            return None;
        }
        Some(v)
    }

    /// Parses `+A-B*AGG` into a vector and an optional aggregate use.
    fn feature_spec(
        &mut self,
        registry: &FeatureRegistry,
        text: &str,
        at: Tok<'_>,
    ) -> Option<(FeatureVector, Option<AggregateUse>)> {
        let mut v = registry.unbound();
        let mut agg = None;
        let mut ok = true;
        let mut items: Vec<(char, String)> = Vec::new();
        for c in text.chars() {
            match c {
                '+' | '-' | '−' | '*' => items.push((c, String::new())),
                c if c.is_ascii_alphanumeric() || c == '_' => match items.last_mut() {
                    Some((_, name)) => name.push(c),
                    None => {
                        self.err_at(at, format!("feature spec `{text}` must start with +, - or *"));
                        return None;
                    }
                },
                other => {
                    self.err_at(at, format!("unexpected character `{other}` in feature spec"));
                    return None;
                }
            }
        }
        for (sign, name) in items {
            if name.is_empty() {
                self.err_at(at, format!("empty name in feature spec `{text}`"));
                ok = false;
                continue;
            }
            if sign == '*' {
                if agg.is_some() {
                    self.err_at(at, "at most one aggregate specifier per element");
                    ok = false;
                    continue;
                }
                match registry.aggregate_column(&name) {
                    Some((i, column)) => agg = Some(AggregateUse { pair: registry.aggregates()[i].name(), column }),
                    None => {
                        self.err_at(at, format!("unknown aggregate specifier *{name}"));
                        ok = false;
                    }
                }
                continue;
            }
            let value = if sign == '+' { FeatureValue::Plus } else { FeatureValue::Minus };
            match registry.slot(&name) {
                Some(slot) => {
                    let old = v.get(slot);
                    if old != FeatureValue::Unbound && old != value {
                        self.err_at(at, format!("feature {name} given both values"));
                        ok = false;
                    }
                    v.set(slot, value);
                }
                None => {
                    self.err_at(at, format!("unknown feature {name}"));
                    ok = false;
                }
            }
        }
        ok.then_some((v, agg))
    }

    fn rule(
        &mut self,
        registry: &FeatureRegistry,
        lex: bool,
        header: Tok<'_>,
        line: &str,
        body_offset: usize,
    ) -> Option<Pattern> {
        let lineno = header.line;
        let errors_before = self.errors.len();

        // header options
        let colon = body_offset - 1;
        let opts = tokens(&line[..colon], 0, lineno);
        let mut weight = 0.0;
        let mut provenance = Provenance::Builtin;
        if header.text.is_empty() {
            self.err_at(header, "empty pattern id");
        }
        for opt in &opts[2..] {
            if let Some(w) = opt.text.strip_prefix("w=") {
                match w.parse::<f64>() {
                    Ok(x) if x.is_finite() => weight = x,
                    _ => self.err_at(*opt, format!("invalid weight `{w}`")),
                }
            } else if opt.text == "user" {
                provenance = Provenance::User;
            } else if opt.text == "integrated" {
                provenance = Provenance::Integrated;
            } else {
                self.err_at(*opt, format!("unknown pattern option `{}`", opt.text));
            }
        }

        let body = &line[body_offset..];
        let Some((left, right)) = split_arrow(body, &["||"]) else {
            self.err(lineno, column_of(line, body_offset), "missing `||` between source and target");
            return None;
        };
        let right_at = body_offset + left.len() + 2;
        let Some((src_rhs, src_lhs)) = split_arrow(left, &["->", "→"]) else {
            self.err(lineno, column_of(line, body_offset), "missing `->` in source rule");
            return None;
        };
        let Some((tgt_lhs, tgt_rhs)) = split_arrow(right, &["<-", "←"]) else {
            self.err(lineno, column_of(line, right_at), "missing `<-` in target rule");
            return None;
        };
        let offset_of = |s: &str| s.as_ptr() as usize - line.as_ptr() as usize;

        let src_rhs_toks = tokens_in(line, src_rhs, lineno);
        let src_lhs_toks = tokens_in(line, src_lhs, lineno);
        let tgt_lhs_toks = tokens_in(line, tgt_lhs, lineno);
        let tgt_rhs_toks = tokens_in(line, tgt_rhs, lineno);

        let source =
            self.skeleton(registry, lex, &src_lhs_toks, &src_rhs_toks, lineno, column_of(line, offset_of(src_lhs)));
        let target =
            self.skeleton(registry, lex, &tgt_lhs_toks, &tgt_rhs_toks, lineno, column_of(line, offset_of(tgt_lhs)));
        if self.errors.len() > errors_before {
            return None;
        }
        Some(Pattern { id: header.text.to_string(), source: source?, target: target?, weight, provenance })
    }

    fn skeleton(
        &mut self,
        registry: &FeatureRegistry,
        lex: bool,
        lhs: &[Tok<'_>],
        rhs: &[Tok<'_>],
        lineno: usize,
        lhs_column: usize,
    ) -> Option<Skeleton> {
        let lhs = match lhs {
            [one] => self.element(registry, *one, ElementMode::Nonterminal)?,
            [] => {
                self.err(lineno, lhs_column, "missing left-hand side");
                return None;
            }
            [_, extra, ..] => {
                self.err_at(*extra, "left-hand side must be a single element");
                return None;
            }
        };
        if rhs.is_empty() {
            self.err(lineno, lhs_column, "empty right-hand side");
            return None;
        }
        let mode = if lex { ElementMode::Terminal } else { ElementMode::Auto };
        let mut elements = Vec::with_capacity(rhs.len());
        let mut links: HashSet<u32> = HashSet::new();
        let mut ok = true;
        for tok in rhs {
            match self.element(registry, *tok, mode) {
                Some(e) => {
                    if let Some(l) = e.link {
                        if !links.insert(l) {
                            self.err_at(*tok, format!("link index {l} used twice on one side"));
                            ok = false;
                        }
                    }
                    elements.push(e);
                }
                None => ok = false,
            }
        }
        ok.then_some(Skeleton { lhs, rhs: elements })
    }

    fn element(&mut self, registry: &FeatureRegistry, tok: Tok<'_>, mode: ElementMode) -> Option<PatternElement> {
        let parts: Vec<&str> = tok.text.split(':').collect();
        if parts.iter().any(|p| p.is_empty()) {
            self.err_at(tok, format!("empty component in `{}`", tok.text));
            return None;
        }
        let nt_at = match mode {
            ElementMode::Terminal => None,
            _ => parts.iter().position(|p| is_nonterminal_name(p)),
        };
        match nt_at {
            Some(k) if k <= 1 => {
                let mut e = PatternElement::new(Symbol::nonterminal(parts[k]), registry.len());
                if k == 1 {
                    e.head = Some(parts[0].to_string());
                }
                let mut rest = &parts[k + 1..];
                if let Some(first) = rest.first() {
                    if let Ok(n) = first.parse::<u32>() {
                        if n == 0 {
                            self.err_at(tok, "link indices start at 1");
                            return None;
                        }
                        e.link = Some(n);
                        rest = &rest[1..];
                    }
                }
                match rest {
                    [] => {}
                    [spec] if spec.starts_with(['+', '-', '−', '*']) => {
                        let (v, agg) = self.feature_spec(registry, spec, tok)?;
                        e.features = v;
                        e.aggregate = agg;
                    }
                    _ => {
                        self.err_at(tok, format!("cannot parse element `{}`", tok.text));
                        return None;
                    }
                }
                Some(e)
            }
            Some(_) => {
                self.err_at(tok, format!("cannot parse element `{}`", tok.text));
                None
            }
            None if mode == ElementMode::Nonterminal => {
                self.err_at(tok, format!("`{}` is not a nonterminal", tok.text));
                None
            }
            None => {
                let mut parts = parts.as_slice();
                let mut link = None;
                if parts.len() > 1 {
                    if let Ok(n) = parts[parts.len() - 1].parse::<u32>() {
                        if n == 0 {
                            self.err_at(tok, "link indices start at 1");
                            return None;
                        }
                        link = Some(n);
                        parts = &parts[..parts.len() - 1];
                    }
                }
                let (lemma, surface) = match parts {
                    [surface] => (None, *surface),
                    [lemma, surface] => (Some(lemma.to_string()), *surface),
                    _ => {
                        self.err_at(tok, format!("cannot parse terminal `{}`", tok.text));
                        return None;
                    }
                };
                if surface.starts_with(['+', '*']) {
                    self.err_at(tok, "features are only allowed on nonterminals");
                    return None;
                }
                let mut e = PatternElement::new(Symbol::terminal(surface), registry.len());
                e.lemma = lemma;
                e.link = link;
                Some(e)
            }
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum ElementMode {
    Auto,
    Terminal,
    Nonterminal,
}

fn split_arrow<'a>(s: &'a str, arrows: &[&str]) -> Option<(&'a str, &'a str)> {
    arrows.iter().filter_map(|a| s.find(a).map(|i| (i, a.len()))).min().map(|(i, n)| (&s[..i], &s[i + n..]))
}

/// Canonical text form: header lines, then one pattern per line in
/// declaration order with weights always printed.
pub fn serialize_grammar(g: &Grammar) -> String {
    let mut out = String::new();
    let r = g.registry();
    out.push_str("# patcfg grammar\n");
    let _ = writeln!(out, "start {}", g.start());
    for f in r.features() {
        match f.class {
            FeatureClass::Head => {
                let _ = writeln!(out, "feature {}", f.name);
            }
            FeatureClass::Local => {
                let _ = writeln!(out, "feature {} local", f.name);
            }
        }
    }
    for pair in r.aggregates() {
        let _ = writeln!(out, "aggregate {}:", pair.name());
        for (a, b) in &pair.rows {
            let _ = writeln!(out, "  {} | {}", vector_text(r, a), vector_text(r, b));
        }
    }
    for p in g.patterns() {
        out.push_str(&pattern_line(r, p));
        out.push('\n');
    }
    out
}

fn vector_text(r: &FeatureRegistry, v: &FeatureVector) -> String {
    let s = r.format_vector(v);
    if s.is_empty() {
        "_".to_string()
    } else {
        s
    }
}

/// One pattern in file syntax.
pub fn pattern_line(r: &FeatureRegistry, p: &Pattern) -> String {
    let lex = p.source.is_all_terminals() && p.target.is_all_terminals();
    let mut s = String::new();
    let _ = write!(s, "{} {} w={}", if lex { "lex" } else { "pattern" }, p.id, p.weight);
    match p.provenance {
        Provenance::Builtin => {}
        Provenance::User => s.push_str(" user"),
        Provenance::Integrated => s.push_str(" integrated"),
    }
    s.push_str(": ");
    let side = |sk: &Skeleton| -> Vec<String> { sk.rhs.iter().map(|e| ElementText(r, e).to_string()).collect() };
    let _ = write!(
        s,
        "{} -> {} || {} <- {}",
        side(&p.source).join(" "),
        ElementText(r, &p.source.lhs),
        ElementText(r, &p.target.lhs),
        side(&p.target).join(" ")
    );
    s
}

/// Display adapter for one element.
pub struct ElementText<'a>(pub &'a FeatureRegistry, pub &'a PatternElement);

impl fmt::Display for ElementText<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ElementText(r, e) = self;
        if e.is_terminal() {
            if let Some(lemma) = &e.lemma {
                write!(f, "{lemma}:")?;
            }
            f.write_str(&e.symbol.name)?;
            if let Some(l) = e.link {
                write!(f, ":{l}")?;
            }
            return Ok(());
        }
        if let Some(h) = &e.head {
            write!(f, "{h}:")?;
        }
        f.write_str(&e.symbol.name)?;
        if let Some(l) = e.link {
            write!(f, ":{l}")?;
        }
        let mut spec = if e.features.len() == r.len() { r.format_vector(&e.features) } else { String::new() };
        if let Some(agg) = &e.aggregate {
            let col =
                r.aggregate(&agg.pair).map(|p| p.column_name(agg.column).to_string()).unwrap_or_else(|| {
                    match agg.column {
                        AggregateColumn::First => agg.pair.split('/').next().unwrap_or("").to_string(),
                        AggregateColumn::Second => agg.pair.split('/').nth(1).unwrap_or("").to_string(),
                    }
                });
            spec.push('*');
            spec.push_str(&col);
        }
        if !spec.is_empty() {
            write!(f, ":{spec}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MISS: &str = "\
start S
pattern m: NP:1 miss:V:2 NP:3 -> S:2 || S:2 <- NP:3 manquer:V:2 à NP:1
";

    #[test]
    fn parses_miss_pattern() {
        let g = parse_grammar(MISS).unwrap();
        let p = &g.patterns()[0];
        assert_eq!(p.id, "m");
        let src_links: Vec<_> = p.source.rhs.iter().filter_map(|e| e.link).collect();
        assert_eq!(src_links, vec![1, 2, 3]);
        assert_eq!(p.source.rhs[1].head.as_deref(), Some("miss"));
        assert_eq!(p.target.rhs[1].head.as_deref(), Some("manquer"));
        assert!(p.target.rhs[2].is_terminal());
        assert_eq!(p.target.rhs[2].symbol.name, "à");
        assert_eq!(p.source.lhs.link, Some(2));
    }

    #[test]
    fn duplicate_link_on_one_side_is_an_error() {
        let errs = parse_grammar("pattern x: NP:1 NP:1 -> S:1 || S:1 <- NP:1\n").unwrap_err();
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].line, 1);
        assert_eq!(errs[0].column, 17);
        assert!(errs[0].message.contains("twice"));
    }

    #[test]
    fn reports_every_defect() {
        let text = "\
feature A
pattern p: X:1:+B -> S:1 || S:1 <- X:1
bogus line
pattern q: X:1 -> S:1 S:1 <- X:1
";
        let errs = parse_grammar(text).unwrap_err();
        let lines: Vec<_> = errs.iter().map(|e| e.line).collect();
        assert_eq!(lines, vec![3, 2, 4]);
        assert_eq!(errs[1].column, 12);
    }

    #[test]
    fn lex_lines_force_terminals_and_lemmas() {
        let g = parse_grammar("lex h: know:knows -> V || V <- savoir:sait\nlex i: I -> NP || NP <- je\n").unwrap();
        let h = &g.patterns()[0];
        assert_eq!(h.source.rhs[0].symbol.name, "knows");
        assert_eq!(h.source.lexical_head(), Some("know"));
        assert_eq!(h.target.lexical_head(), Some("savoir"));
        assert!(g.patterns()[1].source.rhs[0].is_terminal());
    }

    #[test]
    fn weights_and_provenance_round_trip() {
        let text = "pattern p w=-12.5 user: A:1 -> S:1 || S:1 <- A:1\n";
        let g = parse_grammar(text).unwrap();
        assert_eq!(g.patterns()[0].weight, -12.5);
        assert_eq!(g.patterns()[0].provenance, Provenance::User);
        let again = parse_grammar(&serialize_grammar(&g)).unwrap();
        assert!(again.same_as(&g));
    }

    #[test]
    fn empty_grammar_serializes_to_header_only() {
        let g = parse_grammar("").unwrap();
        assert_eq!(serialize_grammar(&g), "# patcfg grammar\nstart S\n");
    }

    #[test]
    fn unknown_feature_is_located() {
        let errs = parse_grammar("pattern p: A:1:+NOPE -> S:1 || S:1 <- A:1\n").unwrap_err();
        assert_eq!((errs[0].line, errs[0].column), (1, 12));
        assert!(errs[0].message.contains("NOPE"));
    }

    #[test]
    fn unicode_arrows_are_accepted() {
        let g = parse_grammar("pattern p: A:1 B:2 → B:2 || B:2 ← B:2 A:1\n").unwrap();
        assert_eq!(g.patterns()[0].target.rhs[0].symbol.name, "B");
    }
}
