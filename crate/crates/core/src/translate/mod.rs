//! Constraint checking, ranking and target generation over a parse forest.
//!
//! The forest from [`crate::parser`] is turned into a hypergraph whose
//! nodes are constituents refined by target symbol and feature signature.
//! Every hyperedge has passed the hard constraints of its pattern, so the
//! m best translations are read off with lazy k-best extraction.

mod constraints;
mod graph;
mod kbest;
mod target;
mod trace;

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use constraints::{effective_weight, evaluate, ChildView, Evaluation, Reason, Signature};
pub use target::{
    build_target, check_constraints, emit, Checked, ConstraintFailure, Derivation, GenerationFailure, TargetItem,
    TargetTree,
};
pub use trace::{render, EventKind, TraceEvent};

use graph::AugGraph;
use kbest::{DerivationRef, KBest};

use crate::grammar::Grammar;
use crate::parser::{Chart, NodeId, SourceParser, Span};

/// Constants turning preferences into additive weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Penalties {
    /// Added per target head constraint violated in lenient mode.
    pub violation: f64,
    /// Subtracted per source head constraint.
    pub head_constraint: f64,
    /// Subtracted per source terminal.
    pub terminal: f64,
    /// Added per derivation node.
    pub node: f64,
    /// Subtracted for user patterns.
    pub user_bonus: f64,
}

impl Default for Penalties {
    fn default() -> Self {
        Penalties { violation: 100.0, head_constraint: 2.0, terminal: 1.0, node: 1.0, user_bonus: 50.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TranslateOptions {
    pub m: usize,
    /// Maximum number of derivation expansions.
    pub node_budget: usize,
    pub strict: bool,
    pub trace: bool,
    pub penalties: Penalties,
}

impl Default for TranslateOptions {
    fn default() -> Self {
        TranslateOptions { m: 1, node_budget: 100_000, strict: false, trace: false, penalties: Penalties::default() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Error, Serialize)]
pub enum TranslationFailure {
    #[error("NoParse")]
    NoParse,
    #[error("AllCandidatesFailed")]
    AllCandidatesFailed,
    #[error("BudgetExhaustedEmpty")]
    BudgetExhaustedEmpty,
}

/// One pattern able to build a constituent.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Candidate {
    pub node: NodeId,
    pub span: Span,
    pub symbol: String,
    pub pattern: usize,
    pub pattern_id: String,
    /// Lowest effective weight over the pattern's surviving applications.
    pub effective_weight: f64,
    pub violations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Translation {
    pub tokens: Vec<String>,
    pub cost: f64,
    pub violations: usize,
    pub derivation: Derivation,
    pub target: TargetTree,
    /// All three phases; empty unless tracing was requested.
    pub trace: Vec<TraceEvent>,
}

impl Translation {
    pub fn text(&self) -> String {
        self.tokens.join(" ")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TranslateOutput {
    pub translations: Vec<Translation>,
    pub budget_exhausted: bool,
    /// Phase 1 and 2 events when tracing; also present on failure.
    pub analysis_trace: Vec<TraceEvent>,
}

/// Every derivation of an input, best first.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DerivationList {
    pub derivations: Vec<(f64, Derivation)>,
    pub budget_exhausted: bool,
}

/// A grammar compiled for repeated translation.
#[derive(Clone, Debug)]
pub struct Translator<'g> {
    grammar: &'g Grammar,
    parser: SourceParser,
}

struct Prepared {
    chart: Chart,
    graph: AugGraph,
}

impl<'g> Translator<'g> {
    pub fn new(grammar: &'g Grammar) -> Self {
        Translator { grammar, parser: SourceParser::new(grammar) }
    }

    pub fn grammar(&self) -> &'g Grammar {
        self.grammar
    }

    fn prepare<S: AsRef<str>>(&self, tokens: &[S], opts: &TranslateOptions) -> Result<Prepared, TranslationFailure> {
        // Phase 1 ignores head constraints; they are checked with the rest.
        let chart = self.parser.parse(tokens, false);
        if !chart.is_complete() {
            return Err(TranslationFailure::NoParse);
        }
        let graph = AugGraph::build(&chart, self.grammar, &opts.penalties, opts.strict);
        Ok(Prepared { chart, graph })
    }

    pub fn translate<S: AsRef<str>>(
        &self,
        tokens: &[S],
        opts: &TranslateOptions,
    ) -> Result<TranslateOutput, (TranslationFailure, Vec<TraceEvent>)> {
        let g = self.grammar;
        let prep = self.prepare(tokens, opts).map_err(|f| (f, Vec::new()))?;
        let (chart, graph) = (&prep.chart, &prep.graph);
        let mut analysis_trace = Vec::new();
        if opts.trace {
            analysis_trace = trace::phase1(chart, g);
            analysis_trace.extend(trace::phase2(chart, g, graph, &rank_from_graph(chart, g, graph)));
        }
        if graph.roots.is_empty() {
            return Err((TranslationFailure::AllCandidatesFailed, analysis_trace));
        }

        let mut kb = KBest::new(graph, opts.node_budget);
        let mut roots = kb.roots();
        let mut seen: HashSet<Vec<String>> = HashSet::new();
        let mut translations = Vec::new();
        while translations.len() < opts.m.max(1) {
            let Some(r) = roots.next(&mut kb) else { break };
            let derivation = extract(&kb, graph, chart, g, r);
            let target = build_target(&derivation, g).expect("links are checked during graph construction");
            let words = emit(&target);
            if !seen.insert(words.clone()) {
                continue;
            }
            let trace = if opts.trace {
                let mut t = analysis_trace.clone();
                t.extend(trace::phase3(chart, g, &derivation));
                t
            } else {
                Vec::new()
            };
            translations.push(Translation {
                tokens: words,
                cost: normalize(derivation.cost),
                violations: derivation.violations,
                derivation,
                target,
                trace,
            });
        }
        let budget_exhausted = kb.budget_exhausted();
        if translations.is_empty() {
            let f = if budget_exhausted {
                TranslationFailure::BudgetExhaustedEmpty
            } else {
                TranslationFailure::AllCandidatesFailed
            };
            return Err((f, analysis_trace));
        }
        Ok(TranslateOutput { translations, budget_exhausted, analysis_trace })
    }

    /// Enumerates up to `limit` derivations without collapsing equal
    /// target strings.
    pub fn derivations<S: AsRef<str>>(
        &self,
        tokens: &[S],
        opts: &TranslateOptions,
        limit: usize,
    ) -> Result<DerivationList, TranslationFailure> {
        let prep = self.prepare(tokens, opts)?;
        let (chart, graph) = (&prep.chart, &prep.graph);
        if graph.roots.is_empty() {
            return Err(TranslationFailure::AllCandidatesFailed);
        }
        let mut kb = KBest::new(graph, opts.node_budget);
        let mut roots = kb.roots();
        let mut derivations = Vec::new();
        while derivations.len() < limit {
            let Some(r) = roots.next(&mut kb) else { break };
            let d = extract(&kb, graph, chart, self.grammar, r);
            derivations.push((normalize(d.cost), d));
        }
        Ok(DerivationList { derivations, budget_exhausted: kb.budget_exhausted() })
    }

    /// The cheapest derivation whose target yield satisfies `accept`,
    /// searched within the node budget.
    pub fn find_derivation<S: AsRef<str>>(
        &self,
        tokens: &[S],
        opts: &TranslateOptions,
        mut accept: impl FnMut(&Derivation, &[String]) -> bool,
    ) -> Option<Derivation> {
        let prep = self.prepare(tokens, opts).ok()?;
        let (chart, graph) = (&prep.chart, &prep.graph);
        let mut kb = KBest::new(graph, opts.node_budget);
        let mut roots = kb.roots();
        while let Some(r) = roots.next(&mut kb) {
            let d = extract(&kb, graph, chart, self.grammar, r);
            let target = build_target(&d, self.grammar).ok()?;
            if accept(&d, &emit(&target)) {
                return Some(d);
            }
        }
        None
    }

    /// The phase 1 chart, for callers that need it alongside results.
    pub fn chart<S: AsRef<str>>(&self, tokens: &[S]) -> Chart {
        self.parser.parse(tokens, false)
    }
}

/// Translates `tokens` with `g`, returning the `opts.m` best distinct
/// target strings.
pub fn translate<S: AsRef<str>>(
    tokens: &[S],
    g: &Grammar,
    opts: &TranslateOptions,
) -> Result<TranslateOutput, TranslationFailure> {
    Translator::new(g).translate(tokens, opts).map_err(|(f, _)| f)
}

/// Every synchronized derivation of `tokens`, up to `limit`.
pub fn enumerate_derivations<S: AsRef<str>>(
    tokens: &[S],
    g: &Grammar,
    opts: &TranslateOptions,
    limit: usize,
) -> Result<DerivationList, TranslationFailure> {
    Translator::new(g).derivations(tokens, opts, limit)
}

/// Candidates per constituent, best first. Constituents with no
/// surviving candidate are left out.
pub fn rank_candidates(chart: &Chart, g: &Grammar, opts: &TranslateOptions) -> BTreeMap<NodeId, Vec<Candidate>> {
    let graph = AugGraph::build(chart, g, &opts.penalties, opts.strict);
    rank_from_graph(chart, g, &graph)
}

fn rank_from_graph(chart: &Chart, g: &Grammar, graph: &AugGraph) -> BTreeMap<NodeId, Vec<Candidate>> {
    let mut out: BTreeMap<NodeId, Vec<Candidate>> = BTreeMap::new();
    for aug in &graph.nodes {
        let node = chart.node(aug.forest);
        let list = out.entry(aug.forest).or_default();
        for e in &aug.edges {
            match list.iter_mut().find(|c| c.pattern == e.pattern) {
                Some(c) => {
                    if e.weight < c.effective_weight {
                        c.effective_weight = e.weight;
                        c.violations = e.violations;
                    }
                }
                None => list.push(Candidate {
                    node: aug.forest,
                    span: node.span,
                    symbol: node.symbol.clone(),
                    pattern: e.pattern,
                    pattern_id: g.pattern(e.pattern).id.clone(),
                    effective_weight: e.weight,
                    violations: e.violations,
                }),
            }
        }
    }
    for list in out.values_mut() {
        list.sort_by(|a, b| a.effective_weight.total_cmp(&b.effective_weight).then(a.pattern.cmp(&b.pattern)));
    }
    out.retain(|_, l| !l.is_empty());
    out
}

fn extract(kb: &KBest<'_>, graph: &AugGraph, chart: &Chart, g: &Grammar, r: DerivationRef) -> Derivation {
    let aug = &graph.nodes[r.node];
    let (e, ranks) = kb.backpointer(r);
    let edge = &aug.edges[e];
    let children: Vec<Derivation> = edge
        .children
        .iter()
        .zip(ranks)
        .map(|(&c, &k)| extract(kb, graph, chart, g, DerivationRef { node: c, rank: k }))
        .collect();
    let node = chart.node(aug.forest);
    let violations = edge.violations + children.iter().map(|c| c.violations).sum::<usize>();
    Derivation {
        pattern: edge.pattern,
        pattern_id: g.pattern(edge.pattern).id.clone(),
        node: aug.forest,
        span: node.span,
        head: node.head.clone(),
        source_features: edge.source_unified.clone(),
        children,
        cost: kb.cost(r),
        violations,
    }
}

fn normalize(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x
    }
}
