//! Lazy k-best extraction over the acyclic hypergraph.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashSet};

use super::graph::{AugGraph, AugId};

#[derive(Clone, Debug)]
struct Ranked {
    cost: f64,
    edge: usize,
    ranks: Vec<usize>,
}

#[derive(Clone, Debug)]
struct Cand {
    cost: f64,
    pattern: usize,
    edge: usize,
    ranks: Vec<usize>,
}

impl PartialEq for Cand {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Cand {}
impl PartialOrd for Cand {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cand {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cost
            .total_cmp(&other.cost)
            .then(self.pattern.cmp(&other.pattern))
            .then(self.edge.cmp(&other.edge))
            .then_with(|| self.ranks.cmp(&other.ranks))
    }
}

/// Per-node sorted derivation lists, filled on demand.
pub struct KBest<'g> {
    graph: &'g AugGraph,
    found: Vec<Vec<Ranked>>,
    heaps: Vec<Option<BinaryHeap<Reverse<Cand>>>>,
    seen: Vec<HashSet<(usize, Vec<usize>)>>,
    pops: usize,
    budget: usize,
    exhausted: bool,
}

/// A derivation addressed as the `rank`-th best of an analysis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DerivationRef {
    pub node: AugId,
    pub rank: usize,
}

impl<'g> KBest<'g> {
    pub fn new(graph: &'g AugGraph, budget: usize) -> Self {
        let n = graph.nodes.len();
        KBest {
            graph,
            found: vec![Vec::new(); n],
            heaps: vec![None; n],
            seen: vec![HashSet::new(); n],
            pops: 0,
            budget,
            exhausted: false,
        }
    }

    /// True once the expansion budget ran out.
    pub fn budget_exhausted(&self) -> bool {
        self.exhausted
    }

    /// Cost of the `k`-th best derivation of `v`, computing it if needed.
    pub fn get(&mut self, v: AugId, k: usize) -> Option<f64> {
        if self.heaps[v].is_none() {
            let mut heap = BinaryHeap::new();
            for e in 0..self.graph.nodes[v].edges.len() {
                let ranks = vec![0; self.graph.nodes[v].edges[e].children.len()];
                if let Some(c) = self.candidate(v, e, ranks) {
                    heap.push(Reverse(c));
                }
            }
            self.heaps[v] = Some(heap);
        }
        while self.found[v].len() <= k {
            if self.pops >= self.budget {
                self.exhausted = true;
                return None;
            }
            let Reverse(c) = self.heaps[v].as_mut().unwrap().pop()?;
            self.pops += 1;
            self.found[v].push(Ranked { cost: c.cost, edge: c.edge, ranks: c.ranks.clone() });
            for j in 0..c.ranks.len() {
                let mut next = c.ranks.clone();
                next[j] += 1;
                if let Some(s) = self.candidate(v, c.edge, next) {
                    self.heaps[v].as_mut().unwrap().push(Reverse(s));
                }
            }
        }
        Some(self.found[v][k].cost)
    }

    fn candidate(&mut self, v: AugId, e: usize, ranks: Vec<usize>) -> Option<Cand> {
        if !self.seen[v].insert((e, ranks.clone())) {
            return None;
        }
        let graph = self.graph;
        let edge = &graph.nodes[v].edges[e];
        let mut cost = edge.weight;
        for (&c, &r) in edge.children.iter().zip(&ranks) {
            cost += self.get(c, r)?;
        }
        Some(Cand { cost, pattern: edge.pattern, edge: e, ranks })
    }

    /// Edge and child ranks of an already computed derivation.
    pub fn backpointer(&self, d: DerivationRef) -> (usize, &[usize]) {
        let r = &self.found[d.node][d.rank];
        (r.edge, &r.ranks)
    }

    pub fn cost(&self, d: DerivationRef) -> f64 {
        self.found[d.node][d.rank].cost
    }

    /// Iterates derivations of the whole input in cost order, merging the
    /// root analyses.
    pub fn roots(&mut self) -> RootIter {
        let mut heap = BinaryHeap::new();
        for (i, &v) in self.graph.roots.iter().enumerate() {
            if let Some(c) = self.get(v, 0) {
                heap.push(Reverse(RootCand { cost: c, order: i, node: v, rank: 0 }));
            }
        }
        RootIter { heap }
    }
}

#[derive(Clone, Copy, Debug)]
struct RootCand {
    cost: f64,
    order: usize,
    node: AugId,
    rank: usize,
}

impl PartialEq for RootCand {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for RootCand {}
impl PartialOrd for RootCand {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for RootCand {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cost.total_cmp(&other.cost).then(self.order.cmp(&other.order)).then(self.rank.cmp(&other.rank))
    }
}

pub struct RootIter {
    heap: BinaryHeap<Reverse<RootCand>>,
}

impl RootIter {
    pub fn next(&mut self, kb: &mut KBest<'_>) -> Option<DerivationRef> {
        let Reverse(c) = self.heap.pop()?;
        if let Some(cost) = kb.get(c.node, c.rank + 1) {
            self.heap.push(Reverse(RootCand { cost, rank: c.rank + 1, ..c }));
        }
        Some(DerivationRef { node: c.node, rank: c.rank })
    }
}
