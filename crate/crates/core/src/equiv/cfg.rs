//! Plain context-free grammars and a CYK recognizer for them.
//!
//! The recognizer shares no code with the Earley parser so the two can
//! check each other.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum CfgSymbol {
    T(String),
    N(String),
}

impl fmt::Display for CfgSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CfgSymbol::T(s) => write!(f, "{s:?}"),
            CfgSymbol::N(s) => f.write_str(s),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CfgRule {
    pub lhs: String,
    pub rhs: Vec<CfgSymbol>,
}

impl fmt::Display for CfgRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} <-", self.lhs)?;
        for s in &self.rhs {
            write!(f, " {s}")?;
        }
        Ok(())
    }
}

/// A CFG without empty productions. Rules are kept sorted and unique.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PlainCfg {
    pub terminals: BTreeSet<String>,
    pub nonterminals: BTreeSet<String>,
    pub rules: BTreeSet<CfgRule>,
    pub start: String,
}

impl PlainCfg {
    pub fn new(start: impl Into<String>) -> Self {
        let start = start.into();
        let mut nonterminals = BTreeSet::new();
        nonterminals.insert(start.clone());
        PlainCfg { terminals: BTreeSet::new(), nonterminals, rules: BTreeSet::new(), start }
    }

    /// Adds a rule and declares its symbols. Empty right-hand sides are
    /// ignored.
    pub fn add_rule(&mut self, lhs: impl Into<String>, rhs: Vec<CfgSymbol>) -> bool {
        if rhs.is_empty() {
            return false;
        }
        let lhs = lhs.into();
        self.nonterminals.insert(lhs.clone());
        for s in &rhs {
            match s {
                CfgSymbol::T(t) => self.terminals.insert(t.clone()),
                CfgSymbol::N(n) => self.nonterminals.insert(n.clone()),
            };
        }
        self.rules.insert(CfgRule { lhs, rhs })
    }

    pub fn rule_count(&self) -> usize {
        self.rules.len()
    }

    pub fn has_rule(&self, lhs: &str, rhs: &[CfgSymbol]) -> bool {
        self.rules.iter().any(|r| r.lhs == lhs && r.rhs == rhs)
    }
}

impl fmt::Display for PlainCfg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "start {}", self.start)?;
        for r in &self.rules {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}

/// CYK over a binarized copy of a [`PlainCfg`], with unary rules handled
/// by a precomputed closure.
#[derive(Clone, Debug)]
pub struct Cyk {
    count: usize,
    start: usize,
    lexical: HashMap<String, Vec<usize>>,
    binary: Vec<(usize, usize, usize)>,
    /// `closure[b]`: every `a` with `a =>* b` through unary rules.
    closure: Vec<Vec<usize>>,
}

impl Cyk {
    pub fn new(cfg: &PlainCfg) -> Self {
        let mut ids: HashMap<String, usize> = HashMap::new();
        let intern = |name: String, ids: &mut HashMap<String, usize>| -> usize {
            let next = ids.len();
            *ids.entry(name).or_insert(next)
        };
        for n in &cfg.nonterminals {
            intern(format!("N:{n}"), &mut ids);
        }
        let start = ids[&format!("N:{}", cfg.start)];

        let mut lexical: HashMap<String, Vec<usize>> = HashMap::new();
        let mut binary = Vec::new();
        let mut unary: Vec<(usize, usize)> = Vec::new();
        let mut fresh = 0usize;

        for rule in &cfg.rules {
            let lhs = ids[&format!("N:{}", rule.lhs)];
            if let [CfgSymbol::T(t)] = rule.rhs.as_slice() {
                lexical.entry(t.clone()).or_default().push(lhs);
                continue;
            }
            // terminals inside longer rules get a preterminal of their own
            let syms: Vec<usize> = rule
                .rhs
                .iter()
                .map(|s| match s {
                    CfgSymbol::N(n) => ids[&format!("N:{n}")],
                    CfgSymbol::T(t) => {
                        let key = format!("T:{t}");
                        let known = ids.contains_key(&key);
                        let id = intern(key, &mut ids);
                        if !known {
                            lexical.entry(t.clone()).or_default().push(id);
                        }
                        id
                    }
                })
                .collect();
            match syms.as_slice() {
                [one] => unary.push((lhs, *one)),
                [first, rest @ ..] => {
                    let mut left = *first;
                    let mut cur_lhs = lhs;
                    // A -> X1 X2 .. Xk  becomes  A -> X1 @1, @1 -> X2 @2, ...
                    let mut rest = rest;
                    while rest.len() > 1 {
                        let aux = intern(format!("@{fresh}"), &mut ids);
                        fresh += 1;
                        binary.push((cur_lhs, left, aux));
                        cur_lhs = aux;
                        left = rest[0];
                        rest = &rest[1..];
                    }
                    binary.push((cur_lhs, left, rest[0]));
                }
                [] => {}
            }
        }

        let count = ids.len();
        let mut parents: Vec<Vec<usize>> = vec![Vec::new(); count];
        for &(a, b) in &unary {
            parents[b].push(a);
        }
        let mut closure = Vec::with_capacity(count);
        for b in 0..count {
            let mut seen = vec![false; count];
            seen[b] = true;
            let mut stack = vec![b];
            let mut out = vec![b];
            while let Some(x) = stack.pop() {
                for &a in &parents[x] {
                    if !seen[a] {
                        seen[a] = true;
                        out.push(a);
                        stack.push(a);
                    }
                }
            }
            closure.push(out);
        }
        Cyk { count, start, lexical, binary, closure }
    }

    pub fn recognize<S: AsRef<str>>(&self, tokens: &[S]) -> bool {
        let n = tokens.len();
        if n == 0 {
            return false;
        }
        // table[i][l - 1]: symbols deriving tokens[i .. i + l]
        let mut table = vec![vec![vec![false; self.count]; n]; n];
        for (i, tok) in tokens.iter().enumerate() {
            if let Some(heads) = self.lexical.get(tok.as_ref()) {
                for &a in heads {
                    self.mark(&mut table[i][0], a);
                }
            }
        }
        for len in 2..=n {
            for i in 0..=n - len {
                let mut cell = vec![false; self.count];
                for split in 1..len {
                    let (left, right) = (&table[i][split - 1], &table[i + split][len - split - 1]);
                    for &(a, b, c) in &self.binary {
                        if left[b] && right[c] && !cell[a] {
                            self.mark(&mut cell, a);
                        }
                    }
                }
                table[i][len - 1] = cell;
            }
        }
        table[0][n - 1][self.start]
    }

    fn mark(&self, cell: &mut [bool], sym: usize) {
        for &a in &self.closure[sym] {
            cell[a] = true;
        }
    }
}

/// One-shot recognition.
pub fn cfg_recognize<S: AsRef<str>>(cfg: &PlainCfg, tokens: &[S]) -> bool {
    Cyk::new(cfg).recognize(tokens)
}
