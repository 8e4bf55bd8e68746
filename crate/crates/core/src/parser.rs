//! Earley parsing over the source skeletons.
//!
//! Completed constituents are packed into forest nodes keyed by
//! `(symbol, span, head)`; each node keeps every way it was derived. With
//! `head_aware` on, head constraints are enforced when an element is
//! completed; otherwise heads are tracked but not checked.

use std::collections::{BTreeSet, HashMap};

use serde::Serialize;

use crate::grammar::Grammar;

pub type NodeId = usize;
pub type EdgeId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

impl std::fmt::Display for Span {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{} {}]", self.start, self.end)
    }
}

/// What fills one RHS position of a derivation step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Child {
    /// Input token at this position.
    Terminal(usize),
    Node(NodeId),
}

/// One way of deriving a forest node: a pattern and its RHS fillers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Family {
    pub pattern: usize,
    pub children: Vec<Child>,
}

#[derive(Clone, Debug)]
pub struct ForestNode {
    pub symbol: String,
    pub span: Span,
    pub head: Option<String>,
    pub families: Vec<Family>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeState {
    Active,
    Inactive,
}

/// An Earley item. `links` holds one `(predecessor, filler)` pair per way
/// the item was reached; items at dot 0 have none.
#[derive(Clone, Debug)]
pub struct Edge {
    pub pattern: usize,
    pub dot: usize,
    pub span: Span,
    pub head: Option<String>,
    pub links: Vec<(EdgeId, Child)>,
    pub state: EdgeState,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Sym {
    T(u32),
    N(u32),
}

#[derive(Clone, Debug)]
struct Rule {
    pattern: usize,
    lhs: u32,
    rhs: Vec<Sym>,
    head_pos: Option<usize>,
    head_constraints: Vec<Option<u32>>,
    /// Head word contributed when `head_pos` is a terminal.
    lexical_head: Option<u32>,
}

/// Source skeletons compiled to integer symbols, reusable across inputs.
#[derive(Clone, Debug)]
pub struct SourceParser {
    rules: Vec<Rule>,
    by_lhs: Vec<Vec<usize>>,
    nonterminals: Vec<String>,
    words: Vec<String>,
    word_ids: HashMap<String, u32>,
    surfaces: BTreeSet<u32>,
    start: Option<u32>,
}

#[derive(Default)]
struct Interner {
    names: Vec<String>,
    ids: HashMap<String, u32>,
}

impl Interner {
    fn id(&mut self, s: &str) -> u32 {
        if let Some(&i) = self.ids.get(s) {
            return i;
        }
        let i = self.names.len() as u32;
        self.names.push(s.to_string());
        self.ids.insert(s.to_string(), i);
        i
    }
}

impl SourceParser {
    pub fn new(g: &Grammar) -> Self {
        let mut nts = Interner::default();
        let mut words = Interner::default();
        let mut surfaces = BTreeSet::new();
        let mut rules = Vec::with_capacity(g.patterns().len());
        for (pi, p) in g.patterns().iter().enumerate() {
            let src = &p.source;
            let lhs = nts.id(&src.lhs.symbol.name);
            let rhs = src
                .rhs
                .iter()
                .map(|e| {
                    if e.is_terminal() {
                        let w = words.id(&e.symbol.name);
                        surfaces.insert(w);
                        Sym::T(w)
                    } else {
                        Sym::N(nts.id(&e.symbol.name))
                    }
                })
                .collect();
            let head_constraints = src.rhs.iter().map(|e| e.head.as_deref().map(|h| words.id(h))).collect();
            let head_pos = src.head_position();
            let lexical_head =
                head_pos.map(|i| &src.rhs[i]).filter(|e| e.is_terminal()).map(|e| words.id(e.head_word()));
            rules.push(Rule { pattern: pi, lhs, rhs, head_pos, head_constraints, lexical_head });
        }
        let start = nts.ids.get(&g.start().name).copied();
        let mut by_lhs = vec![Vec::new(); nts.names.len()];
        for (ri, r) in rules.iter().enumerate() {
            by_lhs[r.lhs as usize].push(ri);
        }
        SourceParser {
            rules,
            by_lhs,
            nonterminals: nts.names,
            words: words.names,
            word_ids: words.ids,
            surfaces,
            start,
        }
    }

    fn token_id(&self, token: &str, position: usize) -> Option<u32> {
        let known = |t: &str| self.word_ids.get(t).copied().filter(|w| self.surfaces.contains(w));
        match known(token) {
            Some(w) => Some(w),
            // sentence-initial capitals fall back to the lowercase entry
            None if position == 0 => known(&token.to_lowercase()),
            None => None,
        }
    }

    pub fn parse<S: AsRef<str>>(&self, tokens: &[S], head_aware: bool) -> Chart {
        self.run(tokens, head_aware).finish(tokens)
    }

    fn run<S: AsRef<str>>(&self, tokens: &[S], head_aware: bool) -> Run<'_> {
        let n = tokens.len();
        let input: Vec<Option<u32>> = tokens.iter().enumerate().map(|(i, t)| self.token_id(t.as_ref(), i)).collect();

        let mut run = Run {
            parser: self,
            head_aware,
            edges: Vec::new(),
            items: Vec::new(),
            sets: vec![Vec::new(); n + 1],
            index: vec![HashMap::new(); n + 1],
            waiting: vec![HashMap::new(); n + 1],
            predicted: vec![vec![false; self.nonterminals.len()]; n + 1],
            node_index: HashMap::new(),
            nodes: Vec::new(),
        };

        if n > 0 {
            if let Some(s) = self.start {
                run.predict(s, 0);
            }
        }
        for end in 0..=n {
            let mut i = 0;
            while i < run.sets[end].len() {
                let eid = run.sets[end][i];
                i += 1;
                let item = run.items[eid];
                let rule = &self.rules[item.rule];
                if item.dot == rule.rhs.len() {
                    run.complete(eid, end);
                    continue;
                }
                match rule.rhs[item.dot] {
                    Sym::N(x) => {
                        run.waiting[end].entry(x).or_default().push(eid);
                        run.predict(x, end);
                    }
                    Sym::T(w) => {
                        if input.get(end) == Some(&Some(w)) {
                            let head = if rule.head_pos == Some(item.dot) { rule.lexical_head } else { item.head };
                            run.add(
                                item.rule,
                                item.dot + 1,
                                item.start,
                                head,
                                end + 1,
                                Some((eid, Child::Terminal(end))),
                            );
                        }
                    }
                }
            }
        }
        run
    }

    /// True when the start symbol covers the whole input with head
    /// constraints enforced.
    pub fn recognize<S: AsRef<str>>(&self, tokens: &[S]) -> bool {
        self.accepts(tokens, true)
    }

    /// Acceptance without building the forest.
    pub fn accepts<S: AsRef<str>>(&self, tokens: &[S], head_aware: bool) -> bool {
        let n = tokens.len();
        let Some(start) = self.start else { return false };
        n > 0 && self.run(tokens, head_aware).nodes.iter().any(|nb| nb.key.0 == start && nb.key.1 == 0 && nb.key.2 == n)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct Item {
    rule: usize,
    dot: usize,
    start: usize,
    head: Option<u32>,
}

struct NodeBuild {
    key: (u32, usize, usize, Option<u32>),
    completions: Vec<EdgeId>,
}

struct Run<'p> {
    parser: &'p SourceParser,
    head_aware: bool,
    edges: Vec<Vec<(EdgeId, Child)>>,
    items: Vec<Item>,
    sets: Vec<Vec<EdgeId>>,
    index: Vec<HashMap<Item, EdgeId>>,
    waiting: Vec<HashMap<u32, Vec<EdgeId>>>,
    predicted: Vec<Vec<bool>>,
    node_index: HashMap<(u32, usize, usize, Option<u32>), NodeId>,
    nodes: Vec<NodeBuild>,
}

impl Run<'_> {
    fn predict(&mut self, x: u32, at: usize) {
        if std::mem::replace(&mut self.predicted[at][x as usize], true) {
            return;
        }
        for &r in &self.parser.by_lhs[x as usize] {
            self.add(r, 0, at, None, at, None);
        }
    }

    fn add(
        &mut self,
        rule: usize,
        dot: usize,
        start: usize,
        head: Option<u32>,
        end: usize,
        link: Option<(EdgeId, Child)>,
    ) {
        let item = Item { rule, dot, start, head };
        let eid = match self.index[end].get(&item) {
            Some(&e) => e,
            None => {
                let e = self.items.len();
                self.items.push(item);
                self.edges.push(Vec::new());
                self.index[end].insert(item, e);
                self.sets[end].push(e);
                e
            }
        };
        if let Some(l) = link {
            self.edges[eid].push(l);
        }
    }

    fn complete(&mut self, eid: EdgeId, end: usize) {
        let item = self.items[eid];
        let lhs = self.parser.rules[item.rule].lhs;
        let key = (lhs, item.start, end, item.head);
        if let Some(&nid) = self.node_index.get(&key) {
            self.nodes[nid].completions.push(eid);
            return;
        }
        let nid = self.nodes.len();
        self.nodes.push(NodeBuild { key, completions: vec![eid] });
        self.node_index.insert(key, nid);
        let waiting = self.waiting[item.start].get(&lhs).cloned().unwrap_or_default();
        for w in waiting {
            let wi = self.items[w];
            let rule = &self.parser.rules[wi.rule];
            if self.head_aware {
                if let Some(h) = rule.head_constraints[wi.dot] {
                    if item.head != Some(h) {
                        continue;
                    }
                }
            }
            let head = if rule.head_pos == Some(wi.dot) { item.head } else { wi.head };
            self.add(wi.rule, wi.dot + 1, wi.start, head, end, Some((w, Child::Node(nid))));
        }
    }

    fn unpack(&self, eid: EdgeId, memo: &mut HashMap<EdgeId, Vec<Vec<Child>>>) -> Vec<Vec<Child>> {
        if let Some(v) = memo.get(&eid) {
            return v.clone();
        }
        let out = if self.items[eid].dot == 0 {
            vec![Vec::new()]
        } else {
            let mut out = Vec::new();
            for &(pred, child) in &self.edges[eid] {
                for mut seq in self.unpack(pred, memo) {
                    seq.push(child);
                    out.push(seq);
                }
            }
            out
        };
        memo.insert(eid, out.clone());
        out
    }

    fn finish<S: AsRef<str>>(self, tokens: &[S]) -> Chart {
        let p = self.parser;
        let mut memo = HashMap::new();
        let mut nodes = Vec::with_capacity(self.nodes.len());
        for nb in &self.nodes {
            let (lhs, start, end, head) = nb.key;
            let mut families = Vec::new();
            for &eid in &nb.completions {
                let pattern = p.rules[self.items[eid].rule].pattern;
                for children in self.unpack(eid, &mut memo) {
                    families.push(Family { pattern, children });
                }
            }
            families.sort_by(|a, b| {
                a.pattern.cmp(&b.pattern).then_with(|| child_key(&a.children).cmp(&child_key(&b.children)))
            });
            nodes.push(ForestNode {
                symbol: p.nonterminals[lhs as usize].clone(),
                span: Span::new(start, end),
                head: head.map(|h| p.words[h as usize].clone()),
                families,
            });
        }
        let mut edges = Vec::with_capacity(self.items.len());
        for (end, set) in self.sets.iter().enumerate() {
            for &eid in set {
                let it = self.items[eid];
                let rule = &p.rules[it.rule];
                edges.push((
                    eid,
                    Edge {
                        pattern: rule.pattern,
                        dot: it.dot,
                        span: Span::new(it.start, end),
                        head: it.head.map(|h| p.words[h as usize].clone()),
                        links: self.edges[eid].clone(),
                        state: if it.dot == rule.rhs.len() { EdgeState::Inactive } else { EdgeState::Active },
                    },
                ));
            }
        }
        edges.sort_by_key(|(eid, _)| *eid);
        let start = p.start.map(|s| p.nonterminals[s as usize].clone());
        Chart {
            tokens: tokens.iter().map(|t| t.as_ref().to_string()).collect(),
            nodes,
            edges: edges.into_iter().map(|(_, e)| e).collect(),
            start,
        }
    }
}

fn child_key(children: &[Child]) -> Vec<(u8, usize)> {
    children
        .iter()
        .map(|c| match c {
            Child::Terminal(i) => (0, *i),
            Child::Node(n) => (1, *n),
        })
        .collect()
}

/// The closed Earley chart and its packed forest.
#[derive(Clone, Debug)]
pub struct Chart {
    tokens: Vec<String>,
    nodes: Vec<ForestNode>,
    edges: Vec<Edge>,
    start: Option<String>,
}

impl Chart {
    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn nodes(&self) -> &[ForestNode] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &ForestNode {
        &self.nodes[id]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Start-symbol nodes spanning the whole input.
    pub fn roots(&self) -> Vec<NodeId> {
        let n = self.tokens.len();
        (0..self.nodes.len())
            .filter(|&i| {
                let node = &self.nodes[i];
                node.span == Span::new(0, n) && Some(&node.symbol) == self.start.as_ref()
            })
            .collect()
    }

    pub fn is_complete(&self) -> bool {
        !self.roots().is_empty()
    }

    /// Distinct `(symbol, start, end)` facts, heads projected out.
    pub fn inactive_facts(&self) -> BTreeSet<(String, usize, usize)> {
        self.nodes.iter().map(|n| (n.symbol.clone(), n.span.start, n.span.end)).collect()
    }

    /// Node ids in completion order: by end position, then shorter spans
    /// first.
    pub fn nodes_in_span_order(&self) -> Vec<NodeId> {
        let mut ids: Vec<NodeId> = (0..self.nodes.len()).collect();
        ids.sort_by_key(|&i| {
            let s = self.nodes[i].span;
            (s.end, std::cmp::Reverse(s.start), i)
        });
        ids
    }

    /// The surface text covered by `span`.
    pub fn text(&self, span: Span) -> String {
        self.tokens[span.start..span.end].join(" ")
    }
}

/// Convenience wrapper: compile `g` and parse once.
pub fn parse<S: AsRef<str>>(tokens: &[S], g: &Grammar, head_aware: bool) -> Chart {
    SourceParser::new(g).parse(tokens, head_aware)
}

/// Head-aware acceptance of `tokens` by `g`.
pub fn recognize<S: AsRef<str>>(tokens: &[S], g: &Grammar) -> bool {
    SourceParser::new(g).recognize(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_grammar;

    const FIGURE1: &str = include_str!("../fixtures/figure1.pcfg");
    const AMBIGUITY: &str = include_str!("../fixtures/ambiguity.pcfg");

    fn words(s: &str) -> Vec<&str> {
        s.split_whitespace().collect()
    }

    fn facts(chart: &Chart) -> BTreeSet<(String, usize, usize)> {
        chart.inactive_facts()
    }

    #[test]
    fn figure1_phase_one_constituents() {
        let g = parse_grammar(FIGURE1).unwrap();
        let chart = parse(&words("He knows me well"), &g, false);
        let f = facts(&chart);
        for (sym, s, e) in [
            ("NP", 0, 1),
            ("V", 1, 2),
            ("NP", 2, 3),
            ("VP", 1, 3),
            ("S", 0, 3),
            ("ADVP", 3, 4),
            ("VP", 1, 4),
            ("S", 0, 4),
        ] {
            assert!(f.contains(&(sym.to_string(), s, e)), "missing {sym}[{s},{e}]");
        }
        assert_eq!(f.len(), 8);
        let vp13 = chart.nodes().iter().find(|n| n.symbol == "VP" && n.span == Span::new(1, 3)).unwrap();
        let pats: Vec<&str> = vp13.families.iter().map(|fam| g.pattern(fam.pattern).id.as_str()).collect();
        assert_eq!(pats, vec!["d", "e"]);
        assert_eq!(vp13.head.as_deref(), Some("know"));
        let vp14 = chart.nodes().iter().find(|n| n.symbol == "VP" && n.span == Span::new(1, 4)).unwrap();
        let pats: Vec<&str> = vp14.families.iter().map(|fam| g.pattern(fam.pattern).id.as_str()).collect();
        assert_eq!(pats, vec!["b", "c"]);
        assert!(chart.is_complete());
    }

    #[test]
    fn unknown_token_blocks_recognition() {
        let g = parse_grammar(FIGURE1).unwrap();
        let chart = parse(&words("he knows zzz well"), &g, false);
        assert!(!chart.nodes().iter().any(|n| n.span.start <= 2 && n.span.end > 2));
        assert!(!recognize(&words("zzz"), &g));
        assert!(!recognize(&words("knows he"), &g));
        assert!(recognize(&words("he knows me well"), &g));
    }

    #[test]
    fn left_recursive_packing_has_one_node_per_suffix() {
        let g = parse_grammar(AMBIGUITY).unwrap();
        let chart = parse(&words("a a a a b"), &g, false);
        for i in 0..5 {
            let count = chart.nodes().iter().filter(|n| n.symbol == "B" && n.span == Span::new(i, 5)).count();
            assert_eq!(count, 1, "B[{i},5]");
        }
        let b05 = chart.nodes().iter().find(|n| n.symbol == "B" && n.span == Span::new(0, 5)).unwrap();
        assert_eq!(b05.families.len(), 2);
    }

    #[test]
    fn head_aware_mode_enforces_constraints() {
        let text = "\
pattern p: leave:V:1 NP:2 -> S:1 || S:1 <- V:1 NP:2
lex l: leave -> V || V <- partir
lex t: take -> V || V <- prendre
lex h: house -> NP || NP <- maison
";
        let g = parse_grammar(text).unwrap();
        assert!(recognize(&words("leave house"), &g));
        assert!(!recognize(&words("take house"), &g));
        assert!(parse(&words("take house"), &g, false).is_complete());
    }

    #[test]
    fn edges_satisfy_span_invariants() {
        let g = parse_grammar(FIGURE1).unwrap();
        let chart = parse(&words("he knows me well"), &g, false);
        for e in chart.edges() {
            assert!(e.span.start <= e.span.end && e.span.end <= 4);
            let len = g.pattern(e.pattern).source.rhs.len();
            assert_eq!(e.state == EdgeState::Inactive, e.dot == len);
            if e.dot == 0 {
                assert!(e.links.is_empty());
            }
        }
    }
}
