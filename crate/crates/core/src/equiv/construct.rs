//! CFGs derived from a pattern grammar: the skeleton upper bound, the
//! unconstrained lower bound, and the head-annotated grammar that accepts
//! exactly what the pattern grammar accepts.

use std::collections::BTreeSet;

use thiserror::Error;

use super::cfg::{CfgSymbol, PlainCfg};
use crate::grammar::{Grammar, Pattern, Skeleton};

pub const DEFAULT_SIZE_CAP: usize = 50_000;

/// Nonterminal accepting every head variant of the start symbol.
pub const SUPER_START: &str = "^START";

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("head-annotated grammar would need {projected} rules (cap {cap})")]
pub struct SizeCapExceeded {
    pub projected: u128,
    pub cap: usize,
}

fn skeleton_rule(sk: &Skeleton) -> Vec<CfgSymbol> {
    sk.rhs
        .iter()
        .map(
            |e| {
                if e.is_terminal() {
                    CfgSymbol::T(e.symbol.name.clone())
                } else {
                    CfgSymbol::N(e.symbol.name.clone())
                }
            },
        )
        .collect()
}

fn cfg_from<'a>(g: &Grammar, patterns: impl Iterator<Item = &'a Pattern>) -> PlainCfg {
    let mut cfg = PlainCfg::new(g.start().name.clone());
    for p in patterns {
        cfg.add_rule(p.source.lhs.symbol.name.clone(), skeleton_rule(&p.source));
    }
    cfg
}

/// Every source skeleton with its constraints stripped.
pub fn skeleton_cfg(g: &Grammar) -> PlainCfg {
    cfg_from(g, g.patterns().iter())
}

/// Source skeletons of patterns that carry no head constraint.
pub fn unconstrained_cfg(g: &Grammar) -> PlainCfg {
    cfg_from(g, g.patterns().iter().filter(|p| p.source.head_constraint_count() == 0))
}

/// Words a nonterminal can have as its head: every source terminal and
/// every lemma.
pub fn head_vocabulary(g: &Grammar) -> Vec<String> {
    let mut heads: BTreeSet<String> = g.vocabulary().clone();
    for p in g.patterns() {
        for e in p.source.rhs.iter().filter(|e| e.is_terminal()) {
            heads.insert(e.head_word().to_string());
        }
    }
    heads.into_iter().collect()
}

/// `X[w]` for a head word, `X[]` for no head.
pub fn annotated(symbol: &str, head: Option<&str>) -> String {
    format!("{symbol}[{}]", head.unwrap_or(""))
}

/// Rule count the construction would produce, before deduplication.
pub fn projected_rule_count(g: &Grammar) -> u128 {
    let choices = head_vocabulary(g).len() as u128 + 1;
    let per_pattern: u128 = g
        .patterns()
        .iter()
        .map(|p| {
            if p.is_preterminal() {
                1
            } else {
                let free = p.source.rhs.iter().filter(|e| e.is_nonterminal() && e.head.is_none()).count();
                choices.saturating_pow(free as u32)
            }
        })
        .fold(0u128, |a, b| a.saturating_add(b));
    per_pattern.saturating_add(choices)
}

/// Builds the head-annotated CFG: each nonterminal `X` is split into
/// `X[w]` per possible head `w` plus `X[]`, and every source rule is
/// instantiated for all head assignments of its unconstrained positions.
pub fn head_annotated_cfg(g: &Grammar, cap: usize) -> Result<PlainCfg, SizeCapExceeded> {
    let projected = projected_rule_count(g);
    if projected > cap as u128 {
        return Err(SizeCapExceeded { projected, cap });
    }
    let heads = head_vocabulary(g);
    let mut cfg = PlainCfg::new(SUPER_START);
    for p in g.patterns() {
        let src = &p.source;
        let lhs = &src.lhs.symbol.name;
        if p.is_preterminal() {
            let rhs = src.rhs.iter().map(|e| CfgSymbol::T(e.symbol.name.clone())).collect();
            cfg.add_rule(annotated(lhs, src.lexical_head()), rhs);
            continue;
        }
        let positions: Vec<usize> = src.nonterminal_positions().collect();
        let options: Vec<Vec<Option<&str>>> = positions
            .iter()
            .map(|&i| match &src.rhs[i].head {
                Some(h) => vec![Some(h.as_str())],
                None => heads.iter().map(|w| Some(w.as_str())).chain(std::iter::once(None)).collect(),
            })
            .collect();
        let head_pos = src.head_position();
        let mut odometer = vec![0usize; positions.len()];
        loop {
            let chosen = |i: usize| -> Option<&str> {
                let k = positions.iter().position(|&p| p == i).unwrap();
                options[k][odometer[k]]
            };
            let rhs = src
                .rhs
                .iter()
                .enumerate()
                .map(|(i, e)| {
                    if e.is_terminal() {
                        CfgSymbol::T(e.symbol.name.clone())
                    } else {
                        CfgSymbol::N(annotated(&e.symbol.name, chosen(i)))
                    }
                })
                .collect();
            let lhs_head = head_pos.and_then(chosen);
            cfg.add_rule(annotated(lhs, lhs_head), rhs);

            // advance the odometer
            let mut k = 0;
            while k < odometer.len() {
                odometer[k] += 1;
                if odometer[k] < options[k].len() {
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
    let start = &g.start().name;
    for w in heads.iter().map(|w| Some(w.as_str())).chain(std::iter::once(None)) {
        cfg.add_rule(SUPER_START, vec![CfgSymbol::N(annotated(start, w))]);
    }
    // Symbols only reachable as heads still count as vocabulary.
    cfg.terminals.extend(g.vocabulary().iter().cloned());
    Ok(cfg)
}
