//! Derivation trees, their target-side images, and independent checking.

use serde::Serialize;
use thiserror::Error;

use super::constraints::{effective_weight, evaluate, ChildView, Reason, Signature};
use super::Penalties;
use crate::grammar::{FeatureVector, Grammar};
use crate::parser::{NodeId, Span};

/// A synchronized derivation: one pattern per node, children aligned to
/// the source RHS nonterminals.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Derivation {
    pub pattern: usize,
    pub pattern_id: String,
    pub node: NodeId,
    pub span: Span,
    /// Source head of this constituent.
    pub head: Option<String>,
    /// Unified source vectors, one per source RHS element.
    pub source_features: Vec<FeatureVector>,
    pub children: Vec<Derivation>,
    /// Cost of the whole subtree.
    pub cost: f64,
    /// Soft target head violations in the whole subtree.
    pub violations: usize,
}

impl Derivation {
    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(Derivation::node_count).sum::<usize>()
    }

    /// Pre-order walk.
    pub fn walk(&self) -> Vec<&Derivation> {
        let mut out = vec![self];
        for c in &self.children {
            out.extend(c.walk());
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum TargetItem {
    Word(String),
    Tree(TargetTree),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TargetTree {
    pub pattern_id: String,
    pub span: Span,
    pub symbol: String,
    pub items: Vec<TargetItem>,
    /// For each tree item, the source span it was linked from.
    pub links: Vec<Option<Span>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error, Serialize)]
#[error("constraint failure at {span} in pattern {pattern}: {reason}")]
pub struct ConstraintFailure {
    pub span: Span,
    pub pattern: String,
    pub reason: Reason,
}

#[derive(Clone, Debug, PartialEq, Eq, Error, Serialize)]
#[error("cannot generate target at {span}: {reason}")]
pub struct GenerationFailure {
    pub span: Span,
    pub reason: String,
}

/// Result of re-checking a derivation from scratch.
#[derive(Clone, Debug, PartialEq)]
pub struct Checked {
    pub signature: Signature,
    pub cost: f64,
    pub violations: usize,
}

/// Re-evaluates every node of `d` bottom-up and recomputes its cost.
pub fn check_constraints(
    d: &Derivation,
    g: &Grammar,
    pen: &Penalties,
    strict: bool,
) -> Result<Checked, ConstraintFailure> {
    let p = g.pattern(d.pattern);
    let mut kids = Vec::with_capacity(d.children.len());
    for c in &d.children {
        kids.push((c, check_constraints(c, g, pen, strict)?));
    }
    let mut views: Vec<Option<ChildView<'_>>> = vec![None; p.source.rhs.len()];
    let mut it = kids.iter();
    for (i, e) in p.source.rhs.iter().enumerate() {
        if e.is_nonterminal() {
            let (c, checked) = it.next().expect("one child per source nonterminal");
            views[i] = Some(ChildView { source_head: c.head.as_deref(), signature: &checked.signature });
        }
    }
    let ev = evaluate(g, p, &views, strict).map_err(|reason| ConstraintFailure {
        span: d.span,
        pattern: p.id.clone(),
        reason,
    })?;
    let mut cost = effective_weight(p, ev.violations, pen);
    let mut violations = ev.violations;
    for (_, k) in &kids {
        cost += k.cost;
        violations += k.violations;
    }
    Ok(Checked { signature: ev.signature, cost, violations })
}

/// Maps a derivation to its target tree: each node's target skeleton with
/// linked children substituted by index.
pub fn build_target(d: &Derivation, g: &Grammar) -> Result<TargetTree, GenerationFailure> {
    let p = g.pattern(d.pattern);
    let nt_positions: Vec<usize> = p.source.nonterminal_positions().collect();
    let mut items = Vec::with_capacity(p.target.rhs.len());
    let mut links = Vec::with_capacity(p.target.rhs.len());
    for e in &p.target.rhs {
        if e.is_terminal() {
            items.push(TargetItem::Word(e.symbol.name.clone()));
            links.push(None);
            continue;
        }
        let fail = |reason: String| GenerationFailure { span: d.span, reason };
        let link = e.link.ok_or_else(|| fail(format!("target {} has no link", e.symbol)))?;
        let pos = p.source_position(link).ok_or_else(|| fail(format!("link {link} has no source partner")))?;
        let k = nt_positions.iter().position(|&x| x == pos).unwrap();
        let child = d.children.get(k).ok_or_else(|| fail(format!("missing child for link {link}")))?;
        items.push(TargetItem::Tree(build_target(child, g)?));
        links.push(Some(child.span));
    }
    Ok(TargetTree { pattern_id: p.id.clone(), span: d.span, symbol: p.target.lhs.symbol.name.clone(), items, links })
}

/// Left-to-right terminal yield.
pub fn emit(t: &TargetTree) -> Vec<String> {
    let mut out = Vec::new();
    fn go(t: &TargetTree, out: &mut Vec<String>) {
        for item in &t.items {
            match item {
                TargetItem::Word(w) => out.push(w.clone()),
                TargetItem::Tree(c) => go(c, out),
            }
        }
    }
    go(t, &mut out);
    out
}
