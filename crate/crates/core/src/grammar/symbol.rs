use std::fmt;

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum SymbolKind {
    Terminal,
    Nonterminal,
}

/// A grammar symbol. Within one grammar a name always has the same kind.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Symbol {
    pub name: String,
    pub kind: SymbolKind,
}

impl Symbol {
    pub fn terminal(name: impl Into<String>) -> Self {
        Symbol { name: name.into(), kind: SymbolKind::Terminal }
    }

    pub fn nonterminal(name: impl Into<String>) -> Self {
        Symbol { name: name.into(), kind: SymbolKind::Nonterminal }
    }

    pub fn is_terminal(&self) -> bool {
        self.kind == SymbolKind::Terminal
    }

    pub fn is_nonterminal(&self) -> bool {
        self.kind == SymbolKind::Nonterminal
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// ALL-CAPS identifiers name nonterminals: an ASCII capital followed by
/// capitals, digits or underscores.
pub fn is_nonterminal_name(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_uppercase() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_uppercase() || c.is_ascii_digit() || c == '_')
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn case_convention() {
        assert!(is_nonterminal_name("NP"));
        assert!(is_nonterminal_name("S"));
        assert!(is_nonterminal_name("VP_2"));
        assert!(!is_nonterminal_name("miss"));
        assert!(!is_nonterminal_name("Np"));
        assert!(!is_nonterminal_name("3RD"));
        assert!(!is_nonterminal_name("à"));
        assert!(!is_nonterminal_name(""));
    }
}
