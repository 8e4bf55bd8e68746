//! The pattern formalism: symbols, feature vectors, patterns and grammars.

mod features;
mod pattern;
mod symbol;
mod validate;

use std::collections::{BTreeSet, HashMap};

pub use features::{
    AggregateColumn, AggregatePair, Clash, FeatureClass, FeatureDef, FeatureRegistry, FeatureValue, FeatureVector,
    RegistryError, UnifyFailure,
};
pub use pattern::{AggregateUse, Pattern, PatternElement, Provenance, Skeleton, Specificity};
pub use symbol::{is_nonterminal_name, Symbol, SymbolKind};
pub use validate::{validate, Check, Diagnostic};

/// An ordered, immutable collection of patterns over one feature registry.
#[derive(Clone, Debug)]
pub struct Grammar {
    registry: FeatureRegistry,
    patterns: Vec<Pattern>,
    start: Symbol,
    by_id: HashMap<String, usize>,
    by_source_lhs: HashMap<String, Vec<usize>>,
    vocabulary: BTreeSet<String>,
}

impl Grammar {
    pub fn new(registry: FeatureRegistry, patterns: Vec<Pattern>, start: Symbol) -> Self {
        let mut by_id = HashMap::new();
        let mut by_source_lhs: HashMap<String, Vec<usize>> = HashMap::new();
        let mut vocabulary = BTreeSet::new();
        for (i, p) in patterns.iter().enumerate() {
            by_id.entry(p.id.clone()).or_insert(i);
            by_source_lhs.entry(p.source.lhs.symbol.name.clone()).or_default().push(i);
            for e in &p.source.rhs {
                if e.is_terminal() {
                    vocabulary.insert(e.symbol.name.clone());
                }
            }
        }
        Grammar { registry, patterns, start, by_id, by_source_lhs, vocabulary }
    }

    /// Builds the grammar and runs [`validate`] on it.
    pub fn validated(
        registry: FeatureRegistry,
        patterns: Vec<Pattern>,
        start: Symbol,
    ) -> Result<Self, Vec<Diagnostic>> {
        let g = Grammar::new(registry, patterns, start);
        let diagnostics = validate(&g);
        if diagnostics.is_empty() {
            Ok(g)
        } else {
            Err(diagnostics)
        }
    }

    pub fn registry(&self) -> &FeatureRegistry {
        &self.registry
    }

    pub fn patterns(&self) -> &[Pattern] {
        &self.patterns
    }

    pub fn pattern(&self, index: usize) -> &Pattern {
        &self.patterns[index]
    }

    pub fn start(&self) -> &Symbol {
        &self.start
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.by_id.get(id).copied()
    }

    pub fn by_id(&self, id: &str) -> Option<&Pattern> {
        self.index_of(id).map(|i| &self.patterns[i])
    }

    /// Patterns whose source LHS is `name`, in declaration order.
    pub fn expansions(&self, name: &str) -> &[usize] {
        self.by_source_lhs.get(name).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Terminals appearing on any source RHS.
    pub fn vocabulary(&self) -> &BTreeSet<String> {
        &self.vocabulary
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    /// Copy of the grammar with the given pattern list.
    pub fn with_patterns(&self, patterns: Vec<Pattern>) -> Grammar {
        Grammar::new(self.registry.clone(), patterns, self.start.clone())
    }

    /// Copy with a different start symbol.
    pub fn with_start(&self, start: Symbol) -> Grammar {
        Grammar::new(self.registry.clone(), self.patterns.clone(), start)
    }

    /// Copy with every feature vector and aggregate use removed.
    pub fn feature_erased(&self) -> Grammar {
        let erase =
            |e: &PatternElement| PatternElement { features: FeatureVector::default(), aggregate: None, ..e.clone() };
        let erase_side = |s: &Skeleton| Skeleton { lhs: erase(&s.lhs), rhs: s.rhs.iter().map(erase).collect() };
        let patterns = self
            .patterns
            .iter()
            .map(|p| Pattern { source: erase_side(&p.source), target: erase_side(&p.target), ..p.clone() })
            .collect();
        Grammar::new(FeatureRegistry::new(), patterns, self.start.clone())
    }

    /// Structural equality ignoring derived indexes.
    pub fn same_as(&self, other: &Grammar) -> bool {
        self.registry == other.registry && self.patterns == other.patterns && self.start == other.start
    }
}
