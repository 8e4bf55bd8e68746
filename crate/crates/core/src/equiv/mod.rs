//! Language-level checks: plain CFG views of a pattern grammar, an
//! independent recognizer for them, and bounded enumeration comparing the
//! pattern grammar against those views.

mod cfg;
mod construct;
mod random;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

pub use cfg::{cfg_recognize, CfgRule, CfgSymbol, Cyk, PlainCfg};
pub use construct::{
    annotated, head_annotated_cfg, head_vocabulary, projected_rule_count, skeleton_cfg, unconstrained_cfg,
    SizeCapExceeded, DEFAULT_SIZE_CAP, SUPER_START,
};
pub use random::{random_grammar, RandomGrammarConfig};

use crate::grammar::Grammar;
use crate::parser::SourceParser;

pub const DEFAULT_MAX_LEN_CAP: usize = 6;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EquivError {
    #[error(transparent)]
    SizeCap(#[from] SizeCapExceeded),
    #[error("maximum length {max_len} exceeds the cap of {cap}")]
    LengthCap { max_len: usize, cap: usize },
}

/// Something that accepts or rejects token strings.
pub enum Acceptor<'a> {
    Cfg(&'a PlainCfg),
    /// Head-aware recognition with the pattern grammar.
    Grammar(&'a Grammar),
}

/// Every nonempty string over `vocab` of length at most `max_len`, shortest
/// first and lexicographic within a length.
pub fn all_strings(vocab: &[String], max_len: usize) -> Vec<Vec<String>> {
    let mut out = Vec::new();
    let mut layer: Vec<Vec<String>> = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(layer.len() * vocab.len());
        for prefix in &layer {
            for w in vocab {
                let mut s = prefix.clone();
                s.push(w.clone());
                next.push(s);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

fn check_len(max_len: usize, cap: usize) -> Result<(), EquivError> {
    if max_len > cap {
        return Err(EquivError::LengthCap { max_len, cap });
    }
    Ok(())
}

/// Accepted strings up to `max_len` over the acceptor's terminal vocabulary.
pub fn enumerate_accepted(acceptor: Acceptor<'_>, max_len: usize, cap: usize) -> Result<Vec<Vec<String>>, EquivError> {
    check_len(max_len, cap)?;
    Ok(match acceptor {
        Acceptor::Cfg(c) => {
            let vocab: Vec<String> = c.terminals.iter().cloned().collect();
            let cyk = Cyk::new(c);
            all_strings(&vocab, max_len).into_iter().filter(|s| cyk.recognize(s)).collect()
        }
        Acceptor::Grammar(g) => {
            let vocab: Vec<String> = g.vocabulary().iter().cloned().collect();
            let parser = SourceParser::new(g);
            all_strings(&vocab, max_len).into_iter().filter(|s| parser.recognize(s)).collect()
        }
    })
}

/// One string on which two acceptors differ.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Disagreement {
    pub tokens: Vec<String>,
    /// Acceptance by each compared language, named in
    /// [`EquivalenceReport::languages`].
    pub accepted: Vec<bool>,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EquivalenceReport {
    pub kind: String,
    pub max_len: usize,
    pub vocabulary_size: usize,
    pub checked_string_count: usize,
    pub features_erased: bool,
    pub languages: Vec<String>,
    pub disagreements: Vec<Disagreement>,
    /// Strings in the upper bound but outside the pattern language. Not
    /// failures.
    pub upper_only: Vec<Vec<String>>,
    pub rule_count: Option<usize>,
}

impl EquivalenceReport {
    pub fn passed(&self) -> bool {
        self.disagreements.is_empty()
    }
}

impl fmt::Display for EquivalenceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "check: {}", self.kind)?;
        if self.features_erased {
            writeln!(f, "features: erased before construction")?;
        }
        writeln!(f, "languages: {}", self.languages.join(", "))?;
        if let Some(n) = self.rule_count {
            writeln!(f, "constructed rules: {n}")?;
        }
        writeln!(
            f,
            "strings checked: {} (vocabulary {}, max length {})",
            self.checked_string_count, self.vocabulary_size, self.max_len
        )?;
        writeln!(f, "disagreements: {}", self.disagreements.len())?;
        for d in &self.disagreements {
            let marks: Vec<String> = self
                .languages
                .iter()
                .zip(&d.accepted)
                .map(|(l, a)| format!("{l}={}", if *a { "accept" } else { "reject" }))
                .collect();
            writeln!(f, "  \"{}\" {} {}", d.tokens.join(" "), marks.join(" "), d.note)?;
        }
        if !self.upper_only.is_empty() {
            writeln!(f, "in G but not T: {}", self.upper_only.len())?;
            for s in self.upper_only.iter().take(10) {
                writeln!(f, "  \"{}\"", s.join(" "))?;
            }
        }
        write!(f, "result: {}", if self.passed() { "PASS" } else { "FAIL" })
    }
}

/// Compares head-aware recognition with the head-annotated CFG on every
/// string up to `max_len`, after erasing features.
pub fn check_equivalence(g: &Grammar, max_len: usize) -> Result<EquivalenceReport, EquivError> {
    check_equivalence_with(g, max_len, DEFAULT_SIZE_CAP, DEFAULT_MAX_LEN_CAP)
}

pub fn check_equivalence_with(
    g: &Grammar,
    max_len: usize,
    size_cap: usize,
    len_cap: usize,
) -> Result<EquivalenceReport, EquivError> {
    check_len(max_len, len_cap)?;
    let erased = g.feature_erased();
    let gt = head_annotated_cfg(&erased, size_cap)?;
    let cyk = Cyk::new(&gt);
    let parser = SourceParser::new(&erased);
    let vocab: Vec<String> = erased.vocabulary().iter().cloned().collect();
    let strings = all_strings(&vocab, max_len);
    let mut disagreements = Vec::new();
    for s in &strings {
        let t = parser.recognize(s);
        let h = cyk.recognize(s);
        if t != h {
            disagreements.push(Disagreement { tokens: s.clone(), accepted: vec![t, h], note: String::new() });
        }
    }
    Ok(EquivalenceReport {
        kind: "equivalence".into(),
        max_len,
        vocabulary_size: vocab.len(),
        checked_string_count: strings.len(),
        features_erased: true,
        languages: vec!["T".into(), "G_T".into()],
        disagreements,
        upper_only: Vec::new(),
        rule_count: Some(gt.rule_count()),
    })
}

/// Checks `L(H) ⊆ L(T) ⊆ L(G)` on every string up to `max_len`.
pub fn check_bounds(g: &Grammar, max_len: usize) -> Result<EquivalenceReport, EquivError> {
    check_bounds_with(g, max_len, DEFAULT_MAX_LEN_CAP)
}

pub fn check_bounds_with(g: &Grammar, max_len: usize, len_cap: usize) -> Result<EquivalenceReport, EquivError> {
    check_len(max_len, len_cap)?;
    let lower = Cyk::new(&unconstrained_cfg(g));
    let upper = Cyk::new(&skeleton_cfg(g));
    let parser = SourceParser::new(g);
    let vocab: Vec<String> = g.vocabulary().iter().cloned().collect();
    let strings = all_strings(&vocab, max_len);
    let mut disagreements = Vec::new();
    let mut upper_only = Vec::new();
    for s in &strings {
        let h = lower.recognize(s);
        let t = parser.recognize(s);
        let gg = upper.recognize(s);
        let mut note = Vec::new();
        if h && !t {
            note.push("H accepts, T rejects");
        }
        if t && !gg {
            note.push("T accepts, G rejects");
        }
        if !note.is_empty() {
            disagreements.push(Disagreement { tokens: s.clone(), accepted: vec![h, t, gg], note: note.join("; ") });
        } else if gg && !t {
            upper_only.push(s.clone());
        }
    }
    Ok(EquivalenceReport {
        kind: "bounds".into(),
        max_len,
        vocabulary_size: vocab.len(),
        checked_string_count: strings.len(),
        features_erased: false,
        languages: vec!["H".into(), "T".into(), "G".into()],
        disagreements,
        upper_only,
        rule_count: None,
    })
}
