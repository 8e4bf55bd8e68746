//! The constraint-checked hypergraph over a parse forest.
//!
//! A forest node is split by the target symbol it must produce and by the
//! signature (target head and synthesized feature vectors) of the
//! analysis, so every hyperedge can be checked locally and costs add up.

use std::collections::{BTreeMap, HashMap};

use super::constraints::{effective_weight, element_label, evaluate, ChildView, Reason, Signature};
use super::Penalties;
use crate::grammar::{FeatureVector, Grammar};
use crate::parser::{Chart, Child, NodeId};

pub type AugId = usize;

#[derive(Clone, Debug)]
pub struct HyperEdge {
    pub pattern: usize,
    /// One child per source RHS nonterminal, in source order.
    pub children: Vec<AugId>,
    pub weight: f64,
    pub violations: usize,
    pub source_unified: Vec<FeatureVector>,
}

#[derive(Clone, Debug)]
pub struct AugNode {
    pub forest: NodeId,
    pub signature: Signature,
    pub edges: Vec<HyperEdge>,
}

/// Why no application of a pattern at a forest node survived.
#[derive(Clone, Debug)]
pub struct FamilyFailure {
    pub node: NodeId,
    pub pattern: usize,
    pub reason: Reason,
}

#[derive(Debug, Default)]
pub struct AugGraph {
    pub nodes: Vec<AugNode>,
    pub failures: Vec<FamilyFailure>,
    pub roots: Vec<AugId>,
}

enum Slot {
    InProgress,
    Done(Vec<AugId>),
}

struct Builder<'a> {
    g: &'a Grammar,
    chart: &'a Chart,
    pen: &'a Penalties,
    strict: bool,
    graph: AugGraph,
    memo: HashMap<(NodeId, String), Slot>,
    /// `(node, pattern)` pairs with at least one surviving application.
    viable: HashMap<(NodeId, usize), bool>,
    first_reason: BTreeMap<(NodeId, usize), Reason>,
}

impl AugGraph {
    /// Builds the graph for every forest node, so failures everywhere in
    /// the chart are known.
    pub fn build(chart: &Chart, g: &Grammar, pen: &Penalties, strict: bool) -> AugGraph {
        let mut b = Builder {
            g,
            chart,
            pen,
            strict,
            graph: AugGraph::default(),
            memo: HashMap::new(),
            viable: HashMap::new(),
            first_reason: BTreeMap::new(),
        };
        for n in chart.nodes_in_span_order() {
            let mut symbols: Vec<&str> =
                chart.node(n).families.iter().map(|f| g.pattern(f.pattern).target.lhs.symbol.name.as_str()).collect();
            symbols.sort();
            symbols.dedup();
            for t in symbols {
                b.node(n, t);
            }
        }
        for ((node, pattern), reason) in std::mem::take(&mut b.first_reason) {
            if !b.viable.get(&(node, pattern)).copied().unwrap_or(false) {
                b.graph.failures.push(FamilyFailure { node, pattern, reason });
            }
        }
        let mut graph = b.graph;
        let roots = chart.roots();
        graph.roots = (0..graph.nodes.len()).filter(|&v| roots.contains(&graph.nodes[v].forest)).collect();
        graph
    }
}

impl Builder<'_> {
    fn node(&mut self, n: NodeId, symbol: &str) -> Vec<AugId> {
        let key = (n, symbol.to_string());
        match self.memo.get(&key) {
            Some(Slot::Done(v)) => return v.clone(),
            // A synchronized unary cycle; validation rules these out.
            Some(Slot::InProgress) => return Vec::new(),
            None => {}
        }
        self.memo.insert(key.clone(), Slot::InProgress);

        let chart = self.chart;
        let g = self.g;
        let mut by_sig: BTreeMap<Signature, AugId> = BTreeMap::new();
        let mut created: Vec<AugId> = Vec::new();
        for fam in &chart.node(n).families {
            let p = g.pattern(fam.pattern);
            if p.target.lhs.symbol.name != symbol {
                continue;
            }
            let viable_key = (n, fam.pattern);
            self.viable.entry(viable_key).or_insert(false);

            // options for each filled position, aligned to the source RHS
            let mut options: Vec<Option<Vec<AugId>>> = Vec::with_capacity(fam.children.len());
            let mut missing = None;
            let mut source_head_failure = None;
            for (pos, child) in fam.children.iter().enumerate() {
                match child {
                    Child::Terminal(_) => options.push(None),
                    Child::Node(c) => {
                        let e = &p.source.rhs[pos];
                        let found = chart.node(*c).head.as_deref();
                        if let Some(h) = &e.head {
                            if found != Some(h.as_str()) && source_head_failure.is_none() {
                                source_head_failure = Some(Reason::SourceHead {
                                    element: element_label(e),
                                    expected: h.clone(),
                                    found: found.map(String::from),
                                });
                            }
                        }
                        let target_symbol = e
                            .link
                            .and_then(|l| p.target.rhs.iter().find(|t| t.is_nonterminal() && t.link == Some(l)))
                            .map(|t| t.symbol.name.clone())
                            .unwrap_or_default();
                        let list = self.node(*c, &target_symbol);
                        if list.is_empty() && missing.is_none() {
                            missing = Some(Reason::NoChildAnalysis { element: element_label(e) });
                        }
                        options.push(Some(list));
                    }
                }
            }
            if let Some(r) = source_head_failure.or(missing) {
                self.first_reason.entry(viable_key).or_insert(r);
                continue;
            }

            let filled: Vec<usize> = (0..options.len()).filter(|&i| options[i].is_some()).collect();
            let mut odometer = vec![0usize; filled.len()];
            loop {
                let chosen: Vec<AugId> =
                    filled.iter().zip(&odometer).map(|(&i, &k)| options[i].as_ref().unwrap()[k]).collect();
                let mut views: Vec<Option<ChildView<'_>>> = vec![None; fam.children.len()];
                for (&i, &v) in filled.iter().zip(&chosen) {
                    let aug = &self.graph.nodes[v];
                    views[i] = Some(ChildView {
                        source_head: chart.node(aug.forest).head.as_deref(),
                        signature: &aug.signature,
                    });
                }
                match evaluate(g, p, &views, self.strict) {
                    Ok(ev) => {
                        self.viable.insert(viable_key, true);
                        let edge = HyperEdge {
                            pattern: fam.pattern,
                            children: chosen,
                            weight: effective_weight(p, ev.violations, self.pen),
                            violations: ev.violations,
                            source_unified: ev.source_unified,
                        };
                        let id = *by_sig.entry(ev.signature.clone()).or_insert_with(|| {
                            let id = self.graph.nodes.len();
                            self.graph.nodes.push(AugNode { forest: n, signature: ev.signature, edges: Vec::new() });
                            created.push(id);
                            id
                        });
                        self.graph.nodes[id].edges.push(edge);
                    }
                    Err(r) => {
                        self.first_reason.entry(viable_key).or_insert(r);
                    }
                }
                let mut k = 0;
                while k < odometer.len() {
                    odometer[k] += 1;
                    if odometer[k] < options[filled[k]].as_ref().unwrap().len() {
                        break;
                    }
                    odometer[k] = 0;
                    k += 1;
                }
                if k == odometer.len() {
                    break;
                }
            }
        }
        self.memo.insert(key, Slot::Done(created.clone()));
        created
    }
}
