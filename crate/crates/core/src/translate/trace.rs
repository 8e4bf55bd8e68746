//! Three-phase trace of a translation.

use std::fmt;

use serde::Serialize;

use super::graph::AugGraph;
use super::target::Derivation;
use super::Candidate;
use crate::grammar::Grammar;
use crate::parser::{Chart, Span};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum EventKind {
    /// Phase 1: a completed constituent and the patterns that built it.
    Constituent,
    /// Phase 2: surviving candidates of a constituent.
    Candidates,
    PatternFailed,
    PreferenceOrdering,
    /// Phase 3: the pattern used for a constituent.
    Selected,
    /// Phase 3: a lexical choice, source words to target words.
    Lexical,
    /// Phase 3: terminals introduced by a non-lexical pattern.
    Terminals,
    HeadViolation,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceEvent {
    pub phase: u8,
    pub span: Option<Span>,
    pub kind: EventKind,
    pub patterns: Vec<String>,
    /// Source text of the span, or the words involved.
    pub text: String,
    pub detail: String,
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ids = || self.patterns.iter().map(|p| format!("({p})")).collect::<Vec<_>>().join(", ");
        let span = match self.span {
            Some(s) => format!("{s} "),
            None => "      ".to_string(),
        };
        match self.kind {
            EventKind::Constituent | EventKind::Candidates | EventKind::Selected => {
                write!(f, "{span}{} ---> {} {}", self.text, ids(), self.detail)
            }
            EventKind::Lexical | EventKind::Terminals => write!(f, "{span}{} ---> {}", self.text, self.detail),
            EventKind::PatternFailed => write!(f, "   (pattern {} fails: {})", ids(), self.detail),
            EventKind::PreferenceOrdering => write!(f, "   (preference ordering {})", ids()),
            EventKind::HeadViolation => write!(f, "      {} {}", ids(), self.detail),
        }
    }
}

/// Renders events under the three phase headings.
pub fn render(input: &str, events: &[TraceEvent], translation: Option<&str>) -> String {
    let mut out = format!("Input: {input}\n");
    for (phase, title) in [(1, "Source Analysis"), (2, "Constraint Checking"), (3, "Target Generation")] {
        out.push_str(&format!("\nPhase {phase}: {title}\n\n"));
        for e in events.iter().filter(|e| e.phase == phase) {
            out.push_str(&e.to_string());
            out.push('\n');
        }
    }
    if let Some(t) = translation {
        out.push_str(&format!("\nTranslation: {t}\n"));
    }
    out
}

pub(super) fn phase1(chart: &Chart, g: &Grammar) -> Vec<TraceEvent> {
    let mut out = Vec::new();
    for n in chart.nodes_in_span_order() {
        let node = chart.node(n);
        let mut ids: Vec<String> = Vec::new();
        for f in &node.families {
            let id = &g.pattern(f.pattern).id;
            if !ids.contains(id) {
                ids.push(id.clone());
            }
        }
        out.push(TraceEvent {
            phase: 1,
            span: Some(node.span),
            kind: EventKind::Constituent,
            patterns: ids,
            text: chart.text(node.span),
            detail: node.symbol.clone(),
        });
    }
    out
}

pub(super) fn phase2(
    chart: &Chart,
    g: &Grammar,
    graph: &AugGraph,
    ranked: &std::collections::BTreeMap<usize, Vec<Candidate>>,
) -> Vec<TraceEvent> {
    let mut out = Vec::new();
    for n in chart.nodes_in_span_order() {
        let node = chart.node(n);
        let text = chart.text(node.span);
        let candidates = ranked.get(&n).map(Vec::as_slice).unwrap_or(&[]);
        if !candidates.is_empty() {
            out.push(TraceEvent {
                phase: 2,
                span: Some(node.span),
                kind: EventKind::Candidates,
                patterns: candidates.iter().map(|c| c.pattern_id.clone()).collect(),
                text: text.clone(),
                detail: node.symbol.clone(),
            });
        }
        for f in graph.failures.iter().filter(|f| f.node == n) {
            out.push(TraceEvent {
                phase: 2,
                span: Some(node.span),
                kind: EventKind::PatternFailed,
                patterns: vec![g.pattern(f.pattern).id.clone()],
                text: text.clone(),
                detail: f.reason.to_string(),
            });
        }
        if candidates.len() > 1 {
            out.push(TraceEvent {
                phase: 2,
                span: Some(node.span),
                kind: EventKind::PreferenceOrdering,
                patterns: candidates.iter().map(|c| c.pattern_id.clone()).collect(),
                text,
                detail: String::new(),
            });
        }
    }
    out
}

/// Walks the chosen derivation top-down. Target head constraints are
/// passed down the head chain so that a lexical choice can be compared
/// with the constraint that governs it.
pub(super) fn phase3(chart: &Chart, g: &Grammar, d: &Derivation) -> Vec<TraceEvent> {
    let mut out = Vec::new();
    walk(chart, g, d, None, &mut out);
    out
}

fn walk(chart: &Chart, g: &Grammar, d: &Derivation, governing: Option<&str>, out: &mut Vec<TraceEvent>) {
    let p = g.pattern(d.pattern);
    let text = chart.text(d.span);
    if p.is_preterminal() {
        let words: Vec<&str> = p.target.rhs.iter().map(|e| e.symbol.name.as_str()).collect();
        out.push(TraceEvent {
            phase: 3,
            span: Some(d.span),
            kind: EventKind::Lexical,
            patterns: vec![p.id.clone()],
            text,
            detail: words.join(" "),
        });
        let Some(h) = governing else { return };
        let chosen_head = p.target.lexical_head();
        if chosen_head != Some(h) {
            out.push(TraceEvent {
                phase: 3,
                span: Some(d.span),
                kind: EventKind::HeadViolation,
                patterns: vec![p.id.clone()],
                text: String::new(),
                detail: format!("chosen although it violates a head constraint ({h})"),
            });
        }
        let mut seen = Vec::new();
        for f in &chart.node(d.node).families {
            let alt = g.pattern(f.pattern);
            if f.pattern == d.pattern
                || !alt.is_preterminal()
                || alt.target.lhs.symbol != p.target.lhs.symbol
                || seen.contains(&f.pattern)
            {
                continue;
            }
            seen.push(f.pattern);
            if alt.target.lexical_head() != Some(h) {
                out.push(TraceEvent {
                    phase: 3,
                    span: Some(d.span),
                    kind: EventKind::HeadViolation,
                    patterns: vec![alt.id.clone()],
                    text: String::new(),
                    detail: "violates a head constraint".into(),
                });
            }
        }
        return;
    }

    out.push(TraceEvent {
        phase: 3,
        span: Some(d.span),
        kind: EventKind::Selected,
        patterns: vec![p.id.clone()],
        text,
        detail: p.source.lhs.symbol.name.clone(),
    });
    let src_words: Vec<&str> =
        p.source.rhs.iter().filter(|e| e.is_terminal()).map(|e| e.symbol.name.as_str()).collect();
    let tgt_words: Vec<&str> =
        p.target.rhs.iter().filter(|e| e.is_terminal()).map(|e| e.symbol.name.as_str()).collect();
    if !src_words.is_empty() || !tgt_words.is_empty() {
        out.push(TraceEvent {
            phase: 3,
            span: None,
            kind: EventKind::Terminals,
            patterns: vec![p.id.clone()],
            text: src_words.join(" "),
            detail: tgt_words.join(" "),
        });
    }
    let head_link = p.target.lhs.link;
    let nts: Vec<usize> = p.source.nonterminal_positions().collect();
    for (child, &pos) in d.children.iter().zip(&nts) {
        let link = p.source.rhs[pos].link;
        let target_el = p.target.rhs.iter().find(|e| e.is_nonterminal() && e.link == link);
        let inherited = if link.is_some() && link == head_link { governing } else { None };
        let gov = target_el.and_then(|e| e.head.as_deref()).or(inherited);
        walk(chart, g, child, gov, out);
    }
}
