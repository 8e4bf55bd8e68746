//! Fixed-length three-valued feature vectors and the registry that names
//! their slots.

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

/// One slot of a feature vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum FeatureValue {
    Unbound,
    Plus,
    Minus,
}

/// Whether a feature travels up the head chain or stays on the node that
/// declares it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum FeatureClass {
    Head,
    Local,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct FeatureDef {
    pub name: String,
    pub class: FeatureClass,
}

/// Which side of an aggregate pair an element refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum AggregateColumn {
    First,
    Second,
}

/// A named disjunction of paired feature assignments, e.g. `AGRS/AGRV`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct AggregatePair {
    pub first: String,
    pub second: String,
    pub rows: Vec<(FeatureVector, FeatureVector)>,
}

impl AggregatePair {
    /// The pair name as written in grammar files: `FIRST/SECOND`.
    pub fn name(&self) -> String {
        format!("{}/{}", self.first, self.second)
    }

    pub fn column_name(&self, column: AggregateColumn) -> &str {
        match column {
            AggregateColumn::First => &self.first,
            AggregateColumn::Second => &self.second,
        }
    }
}

/// Unification failed; carries the clashing feature or aggregate pair name.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("unification failed on {0}")]
pub struct UnifyFailure(pub String);

/// Slot index of a plus/minus clash.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Clash(pub usize);

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct FeatureVector(Vec<FeatureValue>);

impl FeatureVector {
    pub fn unbound(len: usize) -> Self {
        FeatureVector(vec![FeatureValue::Unbound; len])
    }

    pub fn from_values(values: Vec<FeatureValue>) -> Self {
        FeatureVector(values)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[FeatureValue] {
        &self.0
    }

    pub fn get(&self, slot: usize) -> FeatureValue {
        self.0.get(slot).copied().unwrap_or(FeatureValue::Unbound)
    }

    pub fn set(&mut self, slot: usize, value: FeatureValue) {
        self.0[slot] = value;
    }

    /// True when no slot is bound.
    pub fn is_unconstrained(&self) -> bool {
        self.0.iter().all(|v| *v == FeatureValue::Unbound)
    }

    /// Slotwise unification. Unbound is the identity; plus against minus
    /// clashes.
    pub fn unify(&self, other: &FeatureVector) -> Result<FeatureVector, Clash> {
        debug_assert_eq!(self.0.len(), other.0.len());
        let mut out = Vec::with_capacity(self.0.len());
        for (slot, (a, b)) in self.0.iter().zip(&other.0).enumerate() {
            out.push(match (a, b) {
                (FeatureValue::Unbound, x) | (x, FeatureValue::Unbound) => *x,
                (x, y) if x == y => *x,
                _ => return Err(Clash(slot)),
            });
        }
        Ok(FeatureVector(out))
    }
}

/// Ordered feature names with their classes, plus aggregate tables.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct FeatureRegistry {
    features: Vec<FeatureDef>,
    aggregates: Vec<AggregatePair>,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum RegistryError {
    #[error("feature {0} declared twice")]
    DuplicateFeature(String),
    #[error("aggregate name {0} declared twice")]
    DuplicateAggregate(String),
    #[error("aggregate row has {found} slots, registry has {expected}")]
    RowLength { expected: usize, found: usize },
}

impl FeatureRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_feature(&mut self, name: &str, class: FeatureClass) -> Result<usize, RegistryError> {
        if self.index.contains_key(name) {
            return Err(RegistryError::DuplicateFeature(name.to_string()));
        }
        let slot = self.features.len();
        self.features.push(FeatureDef { name: name.to_string(), class });
        self.index.insert(name.to_string(), slot);
        Ok(slot)
    }

    pub fn add_aggregate(&mut self, pair: AggregatePair) -> Result<(), RegistryError> {
        for name in [&pair.first, &pair.second] {
            if self.aggregate_column(name).is_some() {
                return Err(RegistryError::DuplicateAggregate(name.clone()));
            }
        }
        if pair.first == pair.second {
            return Err(RegistryError::DuplicateAggregate(pair.first.clone()));
        }
        let expected = self.features.len();
        for (a, b) in &pair.rows {
            for v in [a, b] {
                if v.len() != expected {
                    return Err(RegistryError::RowLength { expected, found: v.len() });
                }
            }
        }
        self.aggregates.push(pair);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn features(&self) -> &[FeatureDef] {
        &self.features
    }

    pub fn aggregates(&self) -> &[AggregatePair] {
        &self.aggregates
    }

    pub fn slot(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn unbound(&self) -> FeatureVector {
        FeatureVector::unbound(self.features.len())
    }

    /// Looks up an aggregate by column name (`AGRS`) and returns the pair
    /// index and which column it names.
    pub fn aggregate_column(&self, name: &str) -> Option<(usize, AggregateColumn)> {
        self.aggregates.iter().enumerate().find_map(|(i, p)| {
            if p.first == name {
                Some((i, AggregateColumn::First))
            } else if p.second == name {
                Some((i, AggregateColumn::Second))
            } else {
                None
            }
        })
    }

    /// Looks up an aggregate by pair name (`AGRS/AGRV`).
    pub fn aggregate(&self, pair_name: &str) -> Option<&AggregatePair> {
        self.aggregates.iter().find(|p| p.name() == pair_name)
    }

    /// Builds a vector from `(name, value)` assignments.
    pub fn vector<'a, I>(&self, assignments: I) -> Result<FeatureVector, String>
    where
        I: IntoIterator<Item = (&'a str, FeatureValue)>,
    {
        let mut v = self.unbound();
        for (name, value) in assignments {
            let slot = self.slot(name).ok_or_else(|| name.to_string())?;
            v.set(slot, value);
        }
        Ok(v)
    }

    pub fn unify(&self, a: &FeatureVector, b: &FeatureVector) -> Result<FeatureVector, UnifyFailure> {
        a.unify(b).map_err(|Clash(slot)| UnifyFailure(self.features[slot].name.clone()))
    }

    /// Tries each disjunct of the pair in declaration order and commits to
    /// the first one under which both sides unify.
    pub fn unify_aggregate(
        &self,
        pair_name: &str,
        first: &FeatureVector,
        second: &FeatureVector,
    ) -> Result<(FeatureVector, FeatureVector), UnifyFailure> {
        let pair = self.aggregate(pair_name).ok_or_else(|| UnifyFailure(pair_name.to_string()))?;
        unify_rows(pair, first, second).ok_or_else(|| UnifyFailure(pair_name.to_string()))
    }

    /// Keeps the head-class slots of `v` and unbinds local ones.
    pub fn head_part(&self, v: &FeatureVector) -> FeatureVector {
        let mut out = v.clone();
        for (slot, def) in self.features.iter().enumerate() {
            if def.class == FeatureClass::Local {
                out.set(slot, FeatureValue::Unbound);
            }
        }
        out
    }

    /// Renders a vector as a run of `+NAME` / `-NAME` items.
    pub fn format_vector(&self, v: &FeatureVector) -> String {
        let mut s = String::new();
        for (slot, value) in v.values().iter().enumerate() {
            let sign = match value {
                FeatureValue::Plus => '+',
                FeatureValue::Minus => '-',
                FeatureValue::Unbound => continue,
            };
            s.push(sign);
            s.push_str(&self.features[slot].name);
        }
        s
    }

    /// Registry with the same features and no aggregates.
    pub fn without_aggregates(&self) -> FeatureRegistry {
        FeatureRegistry { features: self.features.clone(), aggregates: Vec::new(), index: self.index.clone() }
    }
}

pub(crate) fn unify_rows(
    pair: &AggregatePair,
    first: &FeatureVector,
    second: &FeatureVector,
) -> Option<(FeatureVector, FeatureVector)> {
    pair.rows.iter().find_map(|(row_a, row_b)| {
        let a = row_a.unify(first).ok()?;
        let b = row_b.unify(second).ok()?;
        Some((a, b))
    })
}

impl fmt::Display for FeatureValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FeatureValue::Unbound => "_",
            FeatureValue::Plus => "+",
            FeatureValue::Minus => "-",
        })
    }
}
