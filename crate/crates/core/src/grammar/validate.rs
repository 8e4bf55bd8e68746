//! Whole-grammar well-formedness checks.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use serde::Serialize;

use super::features::AggregateColumn;
use super::pattern::{Pattern, Skeleton};
use super::Grammar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Check {
    LinkBijection,
    LhsLink,
    DuplicateLink,
    Features,
    AggregatePairing,
    SynchronizedCycle,
    EmptyRhs,
    DuplicateId,
    ElementKind,
    StartSymbol,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Check::LinkBijection => "link-bijection",
            Check::LhsLink => "lhs-link",
            Check::DuplicateLink => "duplicate-link",
            Check::Features => "features",
            Check::AggregatePairing => "aggregate-pairing",
            Check::SynchronizedCycle => "synchronized-cycle",
            Check::EmptyRhs => "empty-rhs",
            Check::DuplicateId => "duplicate-id",
            Check::ElementKind => "element-kind",
            Check::StartSymbol => "start-symbol",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    /// Offending pattern, if the problem is local to one.
    pub pattern: Option<String>,
    pub check: Check,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.pattern {
            Some(id) => write!(f, "pattern {}: {}: {}", id, self.check, self.message),
            None => write!(f, "{}: {}", self.check, self.message),
        }
    }
}

/// Returns every problem found; an empty list means the grammar is usable.
pub fn validate(g: &Grammar) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    if !g.start().is_nonterminal() {
        out.push(Diagnostic {
            pattern: None,
            check: Check::StartSymbol,
            message: format!("start symbol {} is not a nonterminal", g.start()),
        });
    }
    let mut seen = HashSet::new();
    for p in g.patterns() {
        if !seen.insert(p.id.as_str()) {
            out.push(diag(p, Check::DuplicateId, format!("id {} already used", p.id)));
        }
        check_pattern(g, p, &mut out);
    }
    check_cycles(g, &mut out);
    out
}

fn diag(p: &Pattern, check: Check, message: String) -> Diagnostic {
    Diagnostic { pattern: Some(p.id.clone()), check, message }
}

fn check_pattern(g: &Grammar, p: &Pattern, out: &mut Vec<Diagnostic>) {
    let preterminal = p.is_preterminal();
    for (side, sk) in [("source", &p.source), ("target", &p.target)] {
        check_side(g, p, side, sk, preterminal, out);
    }

    // Every RHS nonterminal must be linked, and the link sets must agree.
    let links = |sk: &Skeleton| -> BTreeSet<u32> {
        sk.rhs.iter().filter(|e| e.is_nonterminal()).filter_map(|e| e.link).collect()
    };
    for (side, sk) in [("source", &p.source), ("target", &p.target)] {
        for e in sk.rhs.iter().filter(|e| e.is_nonterminal() && e.link.is_none()) {
            out.push(diag(p, Check::LinkBijection, format!("{side} nonterminal {} has no link index", e.symbol)));
        }
    }
    let (src, tgt) = (links(&p.source), links(&p.target));
    for l in src.symmetric_difference(&tgt) {
        let side = if src.contains(l) { "target" } else { "source" };
        out.push(diag(p, Check::LinkBijection, format!("link index {l} has no partner on the {side} side")));
    }
}

fn check_side(g: &Grammar, p: &Pattern, side: &str, sk: &Skeleton, preterminal: bool, out: &mut Vec<Diagnostic>) {
    let registry = g.registry();
    if sk.rhs.is_empty() {
        out.push(diag(p, Check::EmptyRhs, format!("{side} right-hand side is empty")));
    }
    if !sk.lhs.symbol.is_nonterminal() {
        out.push(diag(p, Check::ElementKind, format!("{side} left-hand side {} is not a nonterminal", sk.lhs.symbol)));
    }
    if sk.lhs.head.is_some() || sk.lhs.lemma.is_some() {
        out.push(diag(p, Check::ElementKind, format!("{side} left-hand side cannot carry a head constraint")));
    }
    if sk.lhs.aggregate.is_some() {
        out.push(diag(p, Check::AggregatePairing, format!("{side} left-hand side cannot use an aggregate specifier")));
    }

    let mut seen_links = BTreeSet::new();
    for e in std::iter::once(&sk.lhs).chain(&sk.rhs) {
        if e.features.len() != registry.len() {
            out.push(diag(
                p,
                Check::Features,
                format!(
                    "{side} element {} has {} feature slots, registry has {}",
                    e.symbol,
                    e.features.len(),
                    registry.len()
                ),
            ));
        }
        if let Some(agg) = &e.aggregate {
            if registry.aggregate(&agg.pair).is_none() {
                out.push(diag(p, Check::Features, format!("aggregate pair {} is not registered", agg.pair)));
            }
        }
    }
    for e in &sk.rhs {
        if e.is_terminal() {
            if e.head.is_some() || e.aggregate.is_some() {
                out.push(diag(
                    p,
                    Check::ElementKind,
                    format!("terminal {} cannot carry a head constraint or aggregate", e.symbol),
                ));
            }
            if e.link.is_some() && !preterminal {
                out.push(diag(
                    p,
                    Check::ElementKind,
                    format!("terminal {} is linked outside a lexicon rule", e.symbol),
                ));
            }
        } else if e.lemma.is_some() {
            out.push(diag(p, Check::ElementKind, format!("nonterminal {} cannot carry a lemma", e.symbol)));
        }
        if let Some(l) = e.link {
            if !seen_links.insert(l) {
                out.push(diag(p, Check::DuplicateLink, format!("link index {l} occurs twice on the {side} side")));
            }
        }
    }
    if let Some(l) = sk.lhs.link {
        if !sk.rhs.iter().any(|e| e.link == Some(l)) {
            out.push(diag(
                p,
                Check::LhsLink,
                format!("{side} left-hand side index {l} does not occur on the right-hand side"),
            ));
        }
    }

    let mut columns: BTreeMap<&str, Vec<AggregateColumn>> = BTreeMap::new();
    for e in &sk.rhs {
        if let Some(agg) = &e.aggregate {
            columns.entry(agg.pair.as_str()).or_default().push(agg.column);
        }
    }
    for (pair, cols) in columns {
        let firsts = cols.iter().filter(|c| **c == AggregateColumn::First).count();
        let seconds = cols.len() - firsts;
        if firsts != 1 || seconds != 1 {
            out.push(diag(
                p,
                Check::AggregatePairing,
                format!(
                    "aggregate {pair} needs exactly one element per column on the {side} side, found {firsts} and {seconds}"
                ),
            ));
        }
    }
}

/// Nodes are (source LHS, target LHS) pairs; a pattern whose source RHS is
/// a single nonterminal adds an edge to the pair it links to.
fn check_cycles(g: &Grammar, out: &mut Vec<Diagnostic>) {
    type Pair<'a> = (&'a str, &'a str);
    let mut edges: BTreeMap<Pair<'_>, Vec<(Pair<'_>, &str)>> = BTreeMap::new();
    for p in g.patterns() {
        if p.source.rhs.len() != 1 || !p.source.rhs[0].is_nonterminal() {
            continue;
        }
        let child = &p.source.rhs[0];
        let Some(target_child) =
            child.link.and_then(|l| p.target.rhs.iter().find(|e| e.is_nonterminal() && e.link == Some(l)))
        else {
            continue;
        };
        let from = (p.source.lhs.symbol.name.as_str(), p.target.lhs.symbol.name.as_str());
        let to = (child.symbol.name.as_str(), target_child.symbol.name.as_str());
        edges.entry(from).or_default().push((to, p.id.as_str()));
    }

    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Active,
        Done,
    }
    let mut marks: BTreeMap<Pair<'_>, Mark> = BTreeMap::new();
    let mut reported: BTreeSet<Vec<&str>> = BTreeSet::new();

    // Iterative DFS; `path` holds (node, pattern id used to reach it).
    let nodes: Vec<Pair<'_>> = edges.keys().copied().collect();
    for root in nodes {
        if marks.contains_key(&root) {
            continue;
        }
        let mut path: Vec<(Pair<'_>, &str)> = vec![(root, "")];
        let mut stack: Vec<usize> = vec![0];
        marks.insert(root, Mark::Active);
        while let Some(next) = stack.last_mut() {
            let (node, _) = *path.last().unwrap();
            let succ = edges.get(&node).map(Vec::as_slice).unwrap_or(&[]);
            if *next >= succ.len() {
                marks.insert(node, Mark::Done);
                path.pop();
                stack.pop();
                continue;
            }
            let (to, via) = succ[*next];
            *next += 1;
            match marks.get(&to) {
                Some(Mark::Done) => {}
                Some(Mark::Active) => {
                    let start = path.iter().position(|(n, _)| *n == to).unwrap();
                    let mut ids: Vec<&str> = path[start + 1..].iter().map(|(_, id)| *id).collect();
                    ids.push(via);
                    let mut key = ids.clone();
                    key.sort();
                    if reported.insert(key) {
                        let cycle: Vec<String> = path[start..]
                            .iter()
                            .map(|((s, t), _)| format!("({s}, {t})"))
                            .chain(std::iter::once(format!("({}, {})", to.0, to.1)))
                            .collect();
                        out.push(Diagnostic {
                            pattern: Some(via.to_string()),
                            check: Check::SynchronizedCycle,
                            message: format!(
                                "cycle of synchronized unary derivations {} via patterns {}",
                                cycle.join(" -> "),
                                ids.join(", ")
                            ),
                        });
                    }
                }
                None => {
                    marks.insert(to, Mark::Active);
                    path.push((to, via));
                    stack.push(0);
                }
            }
        }
    }
}
