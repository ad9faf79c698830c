//! Symbolic polynomial-exponent indices.
//!
//! An index names the exponent of the proof-length bound `n^i` attached to a
//! provability operator. Indices are naturals, named variables, sums with a
//! constant offset, or a binary maximum.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::FormulaError;

/// A symbolic index term.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum IndexTerm {
    Lit(u64),
    Var(String),
    /// term + constant offset
    Add(Box<IndexTerm>, u64),
    Max(Box<IndexTerm>, Box<IndexTerm>),
}

/// Total assignment of naturals to index variables.
pub type IndexWitness = BTreeMap<String, u64>;

impl IndexTerm {
    pub fn var(name: impl Into<String>) -> Self {
        IndexTerm::Var(name.into())
    }

    pub fn add(self, k: u64) -> Self {
        if k == 0 {
            self
        } else {
            IndexTerm::Add(Box::new(self), k)
        }
    }

    pub fn max(a: IndexTerm, b: IndexTerm) -> Self {
        IndexTerm::Max(Box::new(a), Box::new(b))
    }

    /// Evaluate under a total assignment.
    pub fn eval(&self, w: &IndexWitness) -> Result<u64, FormulaError> {
        match self {
            IndexTerm::Lit(n) => Ok(*n),
            IndexTerm::Var(v) => w
                .get(v)
                .copied()
                .ok_or_else(|| FormulaError::UnboundIndexVar(v.clone())),
            IndexTerm::Add(t, k) => Ok(t.eval(w)? + k),
            IndexTerm::Max(a, b) => Ok(a.eval(w)?.max(b.eval(w)?)),
        }
    }

    /// Collect the variable names occurring in the term.
    pub fn vars(&self, out: &mut std::collections::BTreeSet<String>) {
        match self {
            IndexTerm::Lit(_) => {}
            IndexTerm::Var(v) => {
                out.insert(v.clone());
            }
            IndexTerm::Add(t, _) => t.vars(out),
            IndexTerm::Max(a, b) => {
                a.vars(out);
                b.vars(out);
            }
        }
    }

    /// Rename variable `from` to `to`.
    pub fn rename_var(&self, from: &str, to: &str) -> IndexTerm {
        match self {
            IndexTerm::Lit(n) => IndexTerm::Lit(*n),
            IndexTerm::Var(v) => {
                if v == from {
                    IndexTerm::Var(to.to_string())
                } else {
                    IndexTerm::Var(v.clone())
                }
            }
            IndexTerm::Add(t, k) => IndexTerm::Add(Box::new(t.rename_var(from, to)), *k),
            IndexTerm::Max(a, b) => IndexTerm::Max(
                Box::new(a.rename_var(from, to)),
                Box::new(b.rename_var(from, to)),
            ),
        }
    }
}

impl fmt::Display for IndexTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IndexTerm::Lit(n) => write!(f, "{n}"),
            IndexTerm::Var(v) => write!(f, "{v}"),
            IndexTerm::Add(t, k) => write!(f, "{t}+{k}"),
            IndexTerm::Max(a, b) => write!(f, "max({a},{b})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(pairs: &[(&str, u64)]) -> IndexWitness {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn eval_basic() {
        let t = IndexTerm::max(IndexTerm::var("i").add(1), IndexTerm::Lit(3));
        assert_eq!(t.eval(&w(&[("i", 5)])).unwrap(), 6);
        assert_eq!(t.eval(&w(&[("i", 1)])).unwrap(), 3);
    }

    #[test]
    fn eval_unbound() {
        let t = IndexTerm::var("j");
        assert!(t.eval(&w(&[])).is_err());
    }

    #[test]
    fn uniform_shift_preserves_relations() {
        // relations between variable-based terms survive shifting every
        // variable by the same constant
        let a = IndexTerm::max(IndexTerm::var("i"), IndexTerm::var("k")).add(1);
        let b = IndexTerm::var("i").add(2);
        for c in [0u64, 1, 5] {
            let wit = w(&[("i", 2 + c), ("k", 3 + c)]);
            assert_eq!(a.eval(&wit).unwrap(), b.eval(&wit).unwrap());
            assert_eq!(a.eval(&wit).unwrap(), 4 + c);
        }
    }
}
