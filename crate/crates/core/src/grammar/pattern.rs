use std::cmp::Ordering;

use serde::Serialize;

use super::features::{AggregateColumn, FeatureVector};
use super::symbol::Symbol;

/// Use of an aggregate unification specifier on an element, e.g. `*AGRS`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct AggregateUse {
    /// Pair name, `FIRST/SECOND`.
    pub pair: String,
    pub column: AggregateColumn,
}

/// One symbol occurrence in a skeleton together with its constraints.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct PatternElement {
    pub symbol: Symbol,
    /// Head constraint; nonterminals only.
    pub head: Option<String>,
    /// Citation form of a terminal when it differs from the surface word.
    pub lemma: Option<String>,
    pub link: Option<u32>,
    pub features: FeatureVector,
    pub aggregate: Option<AggregateUse>,
}

impl PatternElement {
    pub fn new(symbol: Symbol, feature_len: usize) -> Self {
        PatternElement {
            symbol,
            head: None,
            lemma: None,
            link: None,
            features: FeatureVector::unbound(feature_len),
            aggregate: None,
        }
    }

    pub fn is_terminal(&self) -> bool {
        self.symbol.is_terminal()
    }

    pub fn is_nonterminal(&self) -> bool {
        self.symbol.is_nonterminal()
    }

    /// The word a terminal contributes as a head: its lemma if given.
    pub fn head_word(&self) -> &str {
        self.lemma.as_deref().unwrap_or(&self.symbol.name)
    }

    pub fn with_link(mut self, link: u32) -> Self {
        self.link = Some(link);
        self
    }

    pub fn with_head(mut self, head: impl Into<String>) -> Self {
        self.head = Some(head.into());
        self
    }
}

/// One side of a pattern: `rhs -> lhs` in source order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Skeleton {
    pub lhs: PatternElement,
    pub rhs: Vec<PatternElement>,
}

impl Skeleton {
    pub fn is_all_terminals(&self) -> bool {
        self.rhs.iter().all(PatternElement::is_terminal)
    }

    /// Position of the RHS element whose head the LHS inherits.
    ///
    /// A single-token all-terminal RHS with no explicit link is treated as
    /// co-indexed with the LHS.
    pub fn head_position(&self) -> Option<usize> {
        match self.lhs.link {
            Some(link) => self.rhs.iter().position(|e| e.link == Some(link)),
            None if self.rhs.len() == 1 && self.rhs[0].is_terminal() => Some(0),
            None => None,
        }
    }

    /// Head introduced by an all-terminal RHS.
    pub fn lexical_head(&self) -> Option<&str> {
        let pos = self.head_position()?;
        let e = &self.rhs[pos];
        e.is_terminal().then(|| e.head_word())
    }

    pub fn nonterminal_positions(&self) -> impl Iterator<Item = usize> + '_ {
        self.rhs.iter().enumerate().filter(|(_, e)| e.is_nonterminal()).map(|(i, _)| i)
    }

    pub fn terminal_count(&self) -> usize {
        self.rhs.iter().filter(|e| e.is_terminal()).count()
    }

    pub fn head_constraint_count(&self) -> usize {
        self.rhs.iter().filter(|e| e.head.is_some()).count()
    }

    /// The bare CFG rule: LHS name and RHS names.
    pub fn cfg_rule(&self) -> (&str, Vec<&str>) {
        (&self.lhs.symbol.name, self.rhs.iter().map(|e| e.symbol.name.as_str()).collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Provenance {
    Builtin,
    User,
    Integrated,
}

/// A synchronized pair of CFG rules with constraints and a weight.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Pattern {
    pub id: String,
    pub source: Skeleton,
    pub target: Skeleton,
    pub weight: f64,
    pub provenance: Provenance,
}

/// Result of comparing two patterns by specificity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Specificity {
    StrictlyMore,
    StrictlyLess,
    Equal,
    Incomparable,
}

impl Pattern {
    /// A lexicon entry: the source RHS is all terminals.
    pub fn is_preterminal(&self) -> bool {
        self.source.is_all_terminals()
    }

    /// `(head constraints, terminals)` counted on the source skeleton.
    pub fn static_priority(&self) -> (usize, usize) {
        (self.source.head_constraint_count(), self.source.terminal_count())
    }

    /// Index of the source RHS element carrying `link`.
    pub fn source_position(&self, link: u32) -> Option<usize> {
        self.source.rhs.iter().position(|e| e.is_nonterminal() && e.link == Some(link))
    }

    /// Two patterns are the same rule when everything but id, weight and
    /// provenance agrees.
    pub fn same_rule(&self, other: &Pattern) -> bool {
        self.source == other.source && self.target == other.target
    }

    /// Specificity by source head constraints. Only patterns whose source
    /// CFG rules coincide are comparable.
    pub fn more_specific(&self, other: &Pattern) -> Specificity {
        if self.source.cfg_rule() != other.source.cfg_rule() {
            return Specificity::Incomparable;
        }
        let mut self_extra = false;
        let mut other_extra = false;
        for (a, b) in self.source.rhs.iter().zip(&other.source.rhs) {
            match (&a.head, &b.head) {
                (Some(x), Some(y)) if x != y => return Specificity::Incomparable,
                (Some(_), None) => self_extra = true,
                (None, Some(_)) => other_extra = true,
                _ => {}
            }
        }
        match (self_extra, other_extra) {
            (false, false) => Specificity::Equal,
            (true, false) => Specificity::StrictlyMore,
            (false, true) => Specificity::StrictlyLess,
            (true, true) => Specificity::Incomparable,
        }
    }
}

impl Specificity {
    pub fn as_ordering(self) -> Option<Ordering> {
        match self {
            Specificity::StrictlyMore => Some(Ordering::Greater),
            Specificity::StrictlyLess => Some(Ordering::Less),
            Specificity::Equal => Some(Ordering::Equal),
            Specificity::Incomparable => None,
        }
    }
}
