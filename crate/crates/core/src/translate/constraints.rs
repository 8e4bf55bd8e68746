//! Local constraint evaluation of one pattern application.

use std::fmt;

use serde::Serialize;

use super::Penalties;
use crate::grammar::{AggregateColumn, FeatureVector, Grammar, Pattern, PatternElement, Provenance, Skeleton};

/// What a completed constituent exposes to the pattern that uses it.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Signature {
    pub target_head: Option<String>,
    pub source: FeatureVector,
    pub target: FeatureVector,
}

/// A filled nonterminal position.
#[derive(Clone, Copy, Debug)]
pub struct ChildView<'a> {
    pub source_head: Option<&'a str>,
    pub signature: &'a Signature,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Reason {
    SourceHead { element: String, expected: String, found: Option<String> },
    SourceFeature { element: String, feature: String },
    TargetFeature { element: String, feature: String },
    Aggregate { side: &'static str, pair: String },
    LhsFeature { side: &'static str, feature: String },
    TargetHead { element: String, expected: String, found: Option<String> },
    NoChildAnalysis { element: String },
}

impl fmt::Display for Reason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let head = |h: &Option<String>| h.clone().unwrap_or_else(|| "none".into());
        match self {
            Reason::SourceHead { element, expected, found } => {
                write!(f, "source head of {element} is {}, not {expected}", head(found))
            }
            Reason::SourceFeature { element, feature } => write!(f, "source feature {feature} clashes at {element}"),
            Reason::TargetFeature { element, feature } => write!(f, "target feature {feature} clashes at {element}"),
            Reason::Aggregate { side, pair } => write!(f, "{side} aggregate {pair} has no matching row"),
            Reason::LhsFeature { side, feature } => write!(f, "{side} left-hand side feature {feature} clashes"),
            Reason::TargetHead { element, expected, found } => {
                write!(f, "target head of {element} is {}, not {expected}", head(found))
            }
            Reason::NoChildAnalysis { element } => write!(f, "no viable analysis for {element}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub signature: Signature,
    pub violations: usize,
    /// Source feature vectors after unification, one per source RHS element.
    pub source_unified: Vec<FeatureVector>,
}

pub fn element_label(e: &PatternElement) -> String {
    match e.link {
        Some(l) => format!("{}:{l}", e.symbol),
        None => e.symbol.to_string(),
    }
}

/// Weight of one node using `p` with `violations` soft target head misses.
pub fn effective_weight(p: &Pattern, violations: usize, pen: &Penalties) -> f64 {
    let mut w = p.weight + pen.violation * violations as f64
        - pen.head_constraint * p.source.head_constraint_count() as f64
        - pen.terminal * p.source.terminal_count() as f64
        + pen.node;
    if p.provenance == Provenance::User {
        w -= pen.user_bonus;
    }
    w
}

/// Applies every pairwise aggregate specifier on one side. `vecs` holds the
/// unified vector of each RHS element (`None` for terminals).
fn apply_aggregates(
    g: &Grammar,
    side: &'static str,
    sk: &Skeleton,
    vecs: &mut [Option<FeatureVector>],
) -> Result<(), Reason> {
    let mut done: Vec<&str> = Vec::new();
    for e in &sk.rhs {
        let Some(agg) = &e.aggregate else { continue };
        if done.contains(&agg.pair.as_str()) {
            continue;
        }
        done.push(&agg.pair);
        let find = |col: AggregateColumn| {
            sk.rhs.iter().position(|x| x.aggregate.as_ref().is_some_and(|a| a.pair == agg.pair && a.column == col))
        };
        let (Some(i), Some(j)) = (find(AggregateColumn::First), find(AggregateColumn::Second)) else {
            continue;
        };
        let (Some(a), Some(b)) = (&vecs[i], &vecs[j]) else { continue };
        let fail = || Reason::Aggregate { side, pair: agg.pair.clone() };
        let (a, b) = g.registry().unify_aggregate(&agg.pair, a, b).map_err(|_| fail())?;
        vecs[i] = Some(a);
        vecs[j] = Some(b);
    }
    Ok(())
}

/// Evaluates `p` over `children`, aligned to the source RHS (`None` at
/// terminal positions). Hard failures return `Err`; target head misses
/// are counted, or fail when `strict`.
pub fn evaluate(
    g: &Grammar,
    p: &Pattern,
    children: &[Option<ChildView<'_>>],
    strict: bool,
) -> Result<Evaluation, Reason> {
    let reg = g.registry();
    let src = &p.source;

    // source heads
    for (e, c) in src.rhs.iter().zip(children) {
        if let (Some(h), Some(c)) = (&e.head, c) {
            if c.source_head != Some(h.as_str()) {
                return Err(Reason::SourceHead {
                    element: element_label(e),
                    expected: h.clone(),
                    found: c.source_head.map(String::from),
                });
            }
        }
    }

    // source features, element by element
    let mut src_vecs: Vec<Option<FeatureVector>> = Vec::with_capacity(src.rhs.len());
    for (e, c) in src.rhs.iter().zip(children) {
        src_vecs.push(match c {
            Some(c) => Some(
                reg.unify(&e.features, &c.signature.source)
                    .map_err(|u| Reason::SourceFeature { element: element_label(e), feature: u.0 })?,
            ),
            None => None,
        });
    }
    apply_aggregates(g, "source", src, &mut src_vecs)?;
    let source_lhs = lhs_vector(g, "source", src, &src_vecs)?;

    // target side: children found through links
    let tgt = &p.target;
    let mut tgt_vecs: Vec<Option<FeatureVector>> = Vec::with_capacity(tgt.rhs.len());
    let mut tgt_heads: Vec<Option<&str>> = Vec::with_capacity(tgt.rhs.len());
    let mut violations = 0;
    for e in &tgt.rhs {
        let child = e.link.filter(|_| e.is_nonterminal()).and_then(|l| p.source_position(l)).and_then(|i| children[i]);
        match child {
            Some(c) => {
                let v = reg
                    .unify(&e.features, &c.signature.target)
                    .map_err(|u| Reason::TargetFeature { element: element_label(e), feature: u.0 })?;
                tgt_vecs.push(Some(v));
                let found = c.signature.target_head.as_deref();
                if let Some(h) = &e.head {
                    if found != Some(h.as_str()) {
                        if strict {
                            return Err(Reason::TargetHead {
                                element: element_label(e),
                                expected: h.clone(),
                                found: found.map(String::from),
                            });
                        }
                        violations += 1;
                    }
                }
                tgt_heads.push(found);
            }
            None => {
                tgt_vecs.push(None);
                tgt_heads.push(None);
            }
        }
    }
    apply_aggregates(g, "target", tgt, &mut tgt_vecs)?;
    let target_lhs = lhs_vector(g, "target", tgt, &tgt_vecs)?;
    let target_head = match tgt.head_position() {
        Some(i) if tgt.rhs[i].is_terminal() => Some(tgt.rhs[i].head_word().to_string()),
        Some(i) => tgt_heads[i].map(String::from),
        None => None,
    };

    let unbound = reg.unbound();
    Ok(Evaluation {
        signature: Signature { target_head, source: source_lhs, target: target_lhs },
        violations,
        source_unified: src_vecs.into_iter().map(|v| v.unwrap_or_else(|| unbound.clone())).collect(),
    })
}

/// The LHS vector: its declared features plus the head-class features of
/// the co-indexed child.
fn lhs_vector(
    g: &Grammar,
    side: &'static str,
    sk: &Skeleton,
    vecs: &[Option<FeatureVector>],
) -> Result<FeatureVector, Reason> {
    let reg = g.registry();
    match sk.head_position().and_then(|i| vecs[i].as_ref()) {
        Some(v) => {
            reg.unify(&sk.lhs.features, &reg.head_part(v)).map_err(|u| Reason::LhsFeature { side, feature: u.0 })
        }
        None => Ok(sk.lhs.features.clone()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_grammar;
    use crate::grammar::FeatureValue;

    fn figure1() -> Grammar {
        parse_grammar(include_str!("../../fixtures/figure1.pcfg")).unwrap()
    }

    fn lexical(g: &Grammar, id: &str) -> Signature {
        evaluate(g, g.by_id(id).unwrap(), &[None], false).unwrap().signature
    }

    #[test]
    fn pattern_d_fails_on_pronoun_object() {
        let g = figure1();
        let v = lexical(&g, "i");
        let me = lexical(&g, "g");
        let kids = [
            Some(ChildView { source_head: Some("know"), signature: &v }),
            Some(ChildView { source_head: Some("me"), signature: &me }),
        ];
        let err = evaluate(&g, g.by_id("d").unwrap(), &kids, false).unwrap_err();
        assert_eq!(err, Reason::TargetFeature { element: "NP:2".into(), feature: "PRO".into() });
        let ok = evaluate(&g, g.by_id("e").unwrap(), &kids, false).unwrap();
        assert_eq!(ok.signature.target_head.as_deref(), Some("connaitre"));
        assert_eq!(g.registry().format_vector(&ok.signature.source), "+FIN+3SG+OBJ");
    }

    #[test]
    fn agreement_in_pattern_a() {
        let g = figure1();
        let he = lexical(&g, "f");
        let knows = lexical(&g, "i");
        let kids = [
            Some(ChildView { source_head: Some("he"), signature: &he }),
            Some(ChildView { source_head: Some("know"), signature: &knows }),
        ];
        let ok = evaluate(&g, g.by_id("a").unwrap(), &kids, false).unwrap();
        assert_eq!(g.registry().format_vector(&ok.signature.source), "+FIN+3SG");
        assert_eq!(ok.violations, 0);

        // "me" leaves NOMI unbound, so the last row still matches and adds +PAST
        let me = lexical(&g, "g");
        let kids = [
            Some(ChildView { source_head: Some("me"), signature: &me }),
            Some(ChildView { source_head: Some("know"), signature: &knows }),
        ];
        let ok = evaluate(&g, g.by_id("a").unwrap(), &kids, false).unwrap();
        assert_eq!(g.registry().format_vector(&ok.signature.source), "+FIN+3SG+PAST");

        // an explicitly non-nominative subject matches no row
        let mut accusative = me.clone();
        let nomi = g.registry().slot("NOMI").unwrap();
        accusative.source.set(nomi, FeatureValue::Minus);
        accusative.target.set(nomi, FeatureValue::Minus);
        let kids = [
            Some(ChildView { source_head: Some("me"), signature: &accusative }),
            Some(ChildView { source_head: Some("know"), signature: &knows }),
        ];
        let err = evaluate(&g, g.by_id("a").unwrap(), &kids, false).unwrap_err();
        assert!(matches!(err, Reason::Aggregate { side: "source", .. }));
    }

    #[test]
    fn target_head_is_soft_unless_strict() {
        let g = figure1();
        let sait = lexical(&g, "h");
        let vp = Signature { target_head: sait.target_head.clone(), ..sait.clone() };
        let mut vp_obj = vp.clone();
        vp_obj.source = g.registry().vector([("OBJ", crate::grammar::FeatureValue::Plus)]).unwrap();
        let kids = [Some(ChildView { source_head: Some("know"), signature: &vp_obj }), None];
        let lenient = evaluate(&g, g.by_id("c").unwrap(), &kids, false).unwrap();
        assert_eq!(lenient.violations, 1);
        assert!(matches!(evaluate(&g, g.by_id("c").unwrap(), &kids, true), Err(Reason::TargetHead { .. })));
    }

    #[test]
    fn source_head_is_hard() {
        let g = figure1();
        let s = lexical(&g, "i");
        let kids = [Some(ChildView { source_head: Some("see"), signature: &s }), None];
        assert!(matches!(evaluate(&g, g.by_id("c").unwrap(), &kids, false), Err(Reason::SourceHead { .. })));
    }

    #[test]
    fn weights_follow_the_penalty_table() {
        let g = figure1();
        let pen = Penalties::default();
        let w = |id: &str| effective_weight(g.by_id(id).unwrap(), 0, &pen);
        assert_eq!(w("c"), -2.0);
        assert_eq!(w("b"), 1.0);
        assert_eq!(w("f"), 0.0);
        assert_eq!(effective_weight(g.by_id("c").unwrap(), 1, &pen), 98.0);
    }
}
