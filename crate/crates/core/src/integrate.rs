//! Growing a grammar from bilingual sentence pairs.
//!
//! Each pair is classified: already translated correctly, translatable by a
//! lower-ranked derivation (which is then lexicalized and promoted), or not
//! translatable at all (the pair is memorized as a sentence pattern).

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::grammar::{validate, Grammar, Pattern, PatternElement, Provenance, Skeleton, Symbol};
use crate::translate::{check_constraints, Derivation, TranslateOptions, TranslationFailure, Translator};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BilingualPair {
    pub source: Vec<String>,
    pub target: Vec<String>,
}

impl BilingualPair {
    pub fn new(source: &str, target: &str) -> Self {
        BilingualPair {
            source: source.split_whitespace().map(String::from).collect(),
            target: target.split_whitespace().map(String::from).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct CorpusError {
    pub line: usize,
    pub message: String,
}

/// Reads `source<TAB>target` lines. Blank lines are skipped.
pub fn parse_corpus(text: &str) -> Result<Vec<BilingualPair>, CorpusError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let err = |message: &str| CorpusError { line: i + 1, message: message.to_string() };
        let (s, t) = line.split_once('\t').ok_or_else(|| err("expected source and target separated by a tab"))?;
        let pair = BilingualPair::new(s, t);
        if pair.source.is_empty() || pair.target.is_empty() {
            return Err(err("empty source or target"));
        }
        out.push(pair);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum OutcomeKind {
    AlreadyCorrect,
    Lexicalized,
    NewSentencePattern,
    NotIntegrable,
}

impl fmt::Display for OutcomeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightAdjustment {
    pub pattern: String,
    pub old: f64,
    pub new: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntegrationOutcome {
    pub kind: OutcomeKind,
    pub added_patterns: Vec<Pattern>,
    pub weight_adjustments: Vec<WeightAdjustment>,
    pub iterations: usize,
    /// A competitive pair that fell back to memorization; worth a
    /// hand-written idiom pattern.
    pub needs_review: bool,
    pub note: String,
}

impl IntegrationOutcome {
    fn new(kind: OutcomeKind) -> Self {
        IntegrationOutcome {
            kind,
            added_patterns: Vec::new(),
            weight_adjustments: Vec::new(),
            iterations: 0,
            needs_review: false,
            note: String::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntegrationOptions {
    pub translate: TranslateOptions,
    /// Amount subtracted from new patterns' weights per round.
    pub weight_step: f64,
    pub max_rounds: usize,
    pub sentence_weight: f64,
    /// Re-check earlier pairs of a corpus and memorize instead when a
    /// change would break one of them.
    pub guard_regressions: bool,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        IntegrationOptions {
            translate: TranslateOptions::default(),
            weight_step: 10.0,
            max_rounds: 20,
            sentence_weight: -100.0,
            guard_regressions: true,
        }
    }
}

fn best(g: &Grammar, source: &[String], opts: &TranslateOptions) -> Result<Vec<String>, TranslationFailure> {
    let o = TranslateOptions { m: 1, trace: false, ..opts.clone() };
    let out = Translator::new(g).translate(source, &o).map_err(|(f, _)| f)?;
    Ok(out.translations.into_iter().next().map(|t| t.tokens).unwrap_or_default())
}

/// True when the best translation of the pair's source is its target.
pub fn translates_correctly(g: &Grammar, pair: &BilingualPair, opts: &TranslateOptions) -> bool {
    best(g, &pair.source, opts).is_ok_and(|t| t == pair.target)
}

/// The least-cost lenient derivation of `source` whose target yield is
/// exactly `target`, searched within the node budget.
pub fn find_synchronized_derivation(
    g: &Grammar,
    source: &[String],
    target: &[String],
    opts: &TranslateOptions,
) -> Option<Derivation> {
    let o = TranslateOptions { strict: false, ..opts.clone() };
    Translator::new(g).find_derivation(source, &o, |_, yield_| yield_ == target)
}

fn fresh_id(taken: &dyn Fn(&str) -> bool, base: &str) -> String {
    (1..).map(|k| format!("{base}_{k}")).find(|id| !taken(id)).unwrap()
}

/// Copies of the non-lexical patterns in `d` with every unconstrained
/// nonterminal tied to the head it had in `d`. Copies of rules already in
/// the grammar are left out.
pub fn lexicalize(g: &Grammar, d: &Derivation, opts: &TranslateOptions) -> Vec<Pattern> {
    let mut out: Vec<Pattern> = Vec::new();
    for node in d.walk() {
        let p = g.pattern(node.pattern);
        if p.is_preterminal() {
            continue;
        }
        let nts: Vec<usize> = p.source.nonterminal_positions().collect();
        if nts.iter().all(|&i| p.source.rhs[i].head.is_some()) {
            continue;
        }
        let mut source = p.source.clone();
        let mut target = p.target.clone();
        for (child, &i) in node.children.iter().zip(&nts) {
            let link = source.rhs[i].link;
            if source.rhs[i].head.is_none() {
                source.rhs[i].head = child.head.clone();
            }
            let target_head =
                check_constraints(child, g, &opts.penalties, false).ok().and_then(|c| c.signature.target_head);
            if let Some(e) = target.rhs.iter_mut().find(|e| e.is_nonterminal() && e.link == link) {
                if e.head.is_none() {
                    e.head = target_head;
                }
            }
        }
        let candidate =
            Pattern { id: String::new(), source, target, weight: p.weight, provenance: Provenance::Integrated };
        if candidate.same_rule(p)
            || g.patterns().iter().any(|q| q.same_rule(&candidate))
            || out.iter().any(|q| q.same_rule(&candidate))
        {
            continue;
        }
        let taken = |id: &str| g.index_of(id).is_some() || out.iter().any(|q| q.id == id);
        let id = fresh_id(&taken, &p.id);
        out.push(Pattern { id, ..candidate });
    }
    out
}

/// A lexicon entry rewriting the whole source sentence to the target.
pub fn sentence_pattern(g: &Grammar, pair: &BilingualPair, weight: f64) -> Pattern {
    let n = g.registry().len();
    let start = g.start().clone();
    let words = |ws: &[String]| ws.iter().map(|w| PatternElement::new(Symbol::terminal(w.as_str()), n)).collect();
    let taken = |id: &str| g.index_of(id).is_some();
    Pattern {
        id: fresh_id(&taken, "sent"),
        source: Skeleton { lhs: PatternElement::new(start.clone(), n), rhs: words(&pair.source) },
        target: Skeleton { lhs: PatternElement::new(start, n), rhs: words(&pair.target) },
        weight,
        provenance: Provenance::Integrated,
    }
}

/// Adds `added` to `g` and lowers their weights until the pair translates
/// correctly. `None` when the rounds run out.
fn promote(
    g: &Grammar,
    pair: &BilingualPair,
    added: Vec<Pattern>,
    opts: &IntegrationOptions,
) -> Option<(Grammar, Vec<Pattern>, Vec<WeightAdjustment>, usize)> {
    let originals: Vec<f64> = added.iter().map(|p| p.weight).collect();
    let mut current = added;
    for round in 0..=opts.max_rounds {
        let mut patterns = g.patterns().to_vec();
        patterns.extend(current.iter().cloned());
        let candidate = g.with_patterns(patterns);
        if !validate(&candidate).is_empty() {
            return None;
        }
        if translates_correctly(&candidate, pair, &opts.translate) {
            let adjustments = current
                .iter()
                .zip(&originals)
                .filter(|(p, old)| p.weight != **old)
                .map(|(p, old)| WeightAdjustment { pattern: p.id.clone(), old: *old, new: p.weight })
                .collect();
            return Some((candidate, current, adjustments, round));
        }
        for p in &mut current {
            p.weight -= opts.weight_step;
        }
    }
    None
}

/// Integrates one pair. The returned grammar always validates; it is the
/// input grammar when nothing was added.
pub fn integrate_pair(g: &Grammar, pair: &BilingualPair, opts: &IntegrationOptions) -> (Grammar, IntegrationOutcome) {
    let topts = &opts.translate;
    let parsed = match best(g, &pair.source, topts) {
        Ok(t) if t == pair.target => return (g.clone(), IntegrationOutcome::new(OutcomeKind::AlreadyCorrect)),
        Ok(_) => true,
        Err(TranslationFailure::NoParse) => false,
        Err(_) => true,
    };

    let derivation = if parsed { find_synchronized_derivation(g, &pair.source, &pair.target, topts) } else { None };
    let (needs_review, note) = match derivation {
        Some(d) => {
            let added = lexicalize(g, &d, topts);
            if !added.is_empty() {
                return match promote(g, pair, added, opts) {
                    Some((grammar, added, adjustments, rounds)) => {
                        let mut out = IntegrationOutcome::new(OutcomeKind::Lexicalized);
                        out.added_patterns = added;
                        out.weight_adjustments = adjustments;
                        out.iterations = rounds;
                        (grammar, out)
                    }
                    None => {
                        let mut out = IntegrationOutcome::new(OutcomeKind::NotIntegrable);
                        out.note = format!("lexicalized patterns did not reach rank 1 in {} rounds", opts.max_rounds);
                        (g.clone(), out)
                    }
                };
            }
            (false, "every pattern of the derivation is already lexical; memorized")
        }
        None if parsed => (true, "no derivation yields the target; memorized"),
        None => (false, "source not parsable; memorized"),
    };

    let sentence = sentence_pattern(g, pair, opts.sentence_weight);
    match promote(g, pair, vec![sentence], opts) {
        Some((grammar, added, adjustments, rounds)) => {
            let mut out = IntegrationOutcome::new(OutcomeKind::NewSentencePattern);
            out.added_patterns = added;
            out.weight_adjustments = adjustments;
            out.iterations = rounds;
            out.needs_review = needs_review;
            out.note = note.into();
            (grammar, out)
        }
        None => {
            let mut out = IntegrationOutcome::new(OutcomeKind::NotIntegrable);
            out.note = "sentence pattern did not reach rank 1".into();
            (g.clone(), out)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairReport {
    pub source: String,
    pub target: String,
    pub outcome: IntegrationOutcome,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntegrationReport {
    pub pairs: Vec<PairReport>,
    pub counts: BTreeMap<OutcomeKind, usize>,
    pub patterns_before: usize,
    pub patterns_after: usize,
}

impl IntegrationReport {
    pub fn all_integrated(&self) -> bool {
        self.counts.get(&OutcomeKind::NotIntegrable).copied().unwrap_or(0) == 0
    }
}

impl fmt::Display for IntegrationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.pairs.iter().enumerate() {
            write!(f, "{}\t{}\t{}", i + 1, p.outcome.kind, p.source)?;
            if !p.outcome.added_patterns.is_empty() {
                let ids: Vec<&str> = p.outcome.added_patterns.iter().map(|p| p.id.as_str()).collect();
                write!(f, "\t+{}", ids.join(","))?;
            }
            if p.outcome.needs_review {
                write!(f, "\treview")?;
            }
            writeln!(f)?;
        }
        write!(f, "summary: {} pairs", self.pairs.len())?;
        let counts: Vec<String> = self.counts.iter().map(|(k, n)| format!("{k}={n}")).collect();
        if !counts.is_empty() {
            write!(f, ", {}", counts.join(" "))?;
        }
        write!(f, ", patterns {} -> {}", self.patterns_before, self.patterns_after)
    }
}

/// Folds [`integrate_pair`] over the corpus in order.
pub fn integrate_corpus(
    g: &Grammar,
    pairs: &[BilingualPair],
    opts: &IntegrationOptions,
) -> (Grammar, IntegrationReport) {
    let mut grammar = g.clone();
    let mut reports = Vec::with_capacity(pairs.len());
    let mut satisfied: Vec<usize> = Vec::new();
    for (i, pair) in pairs.iter().enumerate() {
        let (mut next, mut outcome) = integrate_pair(&grammar, pair, opts);
        if opts.guard_regressions && outcome.kind == OutcomeKind::Lexicalized {
            let broken = satisfied.iter().any(|&j| !translates_correctly(&next, &pairs[j], &opts.translate));
            if broken {
                // memorize instead; a sentence pattern only matches its own sentence
                let sentence = sentence_pattern(&grammar, pair, opts.sentence_weight);
                match promote(&grammar, pair, vec![sentence], opts) {
                    Some((g2, added, adjustments, rounds)) => {
                        next = g2;
                        outcome = IntegrationOutcome {
                            kind: OutcomeKind::NewSentencePattern,
                            added_patterns: added,
                            weight_adjustments: adjustments,
                            iterations: rounds,
                            needs_review: true,
                            note: "lexicalization would break an earlier pair; memorized".into(),
                        };
                    }
                    None => {
                        next = grammar.clone();
                        outcome = IntegrationOutcome::new(OutcomeKind::NotIntegrable);
                        outcome.note = "lexicalization would break an earlier pair".into();
                    }
                }
            }
        }
        if outcome.kind != OutcomeKind::NotIntegrable {
            satisfied.push(i);
        }
        grammar = next;
        reports.push(PairReport { source: pair.source.join(" "), target: pair.target.join(" "), outcome });
    }
    let mut counts = BTreeMap::new();
    for r in &reports {
        *counts.entry(r.outcome.kind).or_insert(0) += 1;
    }
    let report = IntegrationReport {
        pairs: reports,
        counts,
        patterns_before: g.patterns().len(),
        patterns_after: grammar.patterns().len(),
    };
    (grammar, report)
}
