//! Bounded-arithmetic formulas, numerals, the propositional translation and
//! the symbolic arithmetic interpretation of modal formulas.
//!
//! The translation follows the usual Paris–Wilkie unfolding: after fixing the
//! free number variable to a concrete n, closed relations evaluate away,
//! bounded quantifiers unfold to finite conjunctions/disjunctions, and set
//! memberships become propositional atoms (P, position).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::error::ParseError;
use crate::formula::{ModalFormula, Sequent};
use crate::index::IndexWitness;
use crate::sat::{Atom, PropFormula};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NumTerm {
    Zero,
    One,
    Two,
    Var(String),
    Add(Box<NumTerm>, Box<NumTerm>),
    Mul(Box<NumTerm>, Box<NumTerm>),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BoundedError {
    #[error("unbound number variable `{0}`")]
    UnboundVariable(String),
    #[error("unsupported construct in translation: {0}")]
    UnsupportedConstruct(String),
    #[error("interpretation class violation: {0}")]
    ClassViolation(String),
}

pub type NumEnv = BTreeMap<String, u64>;

impl NumTerm {
    pub fn var(name: impl Into<String>) -> Self {
        NumTerm::Var(name.into())
    }

    pub fn add(a: NumTerm, b: NumTerm) -> Self {
        NumTerm::Add(Box::new(a), Box::new(b))
    }

    pub fn mul(a: NumTerm, b: NumTerm) -> Self {
        NumTerm::Mul(Box::new(a), Box::new(b))
    }

    pub fn eval(&self, env: &NumEnv) -> Result<u64, BoundedError> {
        match self {
            NumTerm::Zero => Ok(0),
            NumTerm::One => Ok(1),
            NumTerm::Two => Ok(2),
            NumTerm::Var(v) => env
                .get(v)
                .copied()
                .ok_or_else(|| BoundedError::UnboundVariable(v.clone())),
            NumTerm::Add(a, b) => Ok(a.eval(env)? + b.eval(env)?),
            NumTerm::Mul(a, b) => Ok(a.eval(env)? * b.eval(env)?),
        }
    }

    /// Node count.
    pub fn size(&self) -> usize {
        match self {
            NumTerm::Zero | NumTerm::One | NumTerm::Two | NumTerm::Var(_) => 1,
            NumTerm::Add(a, b) | NumTerm::Mul(a, b) => 1 + a.size() + b.size(),
        }
    }
}

/// Binary numeral: for bits a₁…a_k of n, (…((a₁·2)+a₂)·2…)·2+a_k.
pub fn numeral(n: u64) -> NumTerm {
    if n == 0 {
        return NumTerm::Zero;
    }
    let bits = 64 - n.leading_zeros();
    let mut acc = NumTerm::One; // leading bit of a nonzero number
    for i in (0..bits - 1).rev() {
        let bit = if n & (1 << i) != 0 {
            NumTerm::One
        } else {
            NumTerm::Zero
        };
        acc = NumTerm::add(NumTerm::mul(acc, NumTerm::Two), bit);
    }
    acc
}

impl fmt::Display for NumTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NumTerm::Zero => write!(f, "0"),
            NumTerm::One => write!(f, "1"),
            NumTerm::Two => write!(f, "2"),
            NumTerm::Var(v) => write!(f, "{v}"),
            NumTerm::Add(a, b) => write!(f, "({a}+{b})"),
            NumTerm::Mul(a, b) => write!(f, "({a}*{b})"),
        }
    }
}

/// Second-order bounded formulas. Set quantifiers are only meaningful at the
/// prefix; the class computation enforces that.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BoundedFormula {
    Eq(NumTerm, NumTerm),
    Le(NumTerm, NumTerm),
    In(NumTerm, String),
    Not(Box<BoundedFormula>),
    And(Box<BoundedFormula>, Box<BoundedFormula>),
    Or(Box<BoundedFormula>, Box<BoundedFormula>),
    ExistsNum {
        var: String,
        bound: NumTerm,
        body: Box<BoundedFormula>,
    },
    ForallNum {
        var: String,
        bound: NumTerm,
        body: Box<BoundedFormula>,
    },
    ExistsSet {
        var: String,
        body: Box<BoundedFormula>,
    },
    ForallSet {
        var: String,
        body: Box<BoundedFormula>,
    },
    /// Symbolic proof predicate: π is a proof of the quoted sequent in the
    /// named system (optionally extended by a quoted axiom), of length within
    /// the bound. Never translated propositionally.
    Prf {
        system: String,
        extension: Option<Box<BoundedFormula>>,
        bound: NumTerm,
        quoted: Box<QuotedSequent>,
        proof_var: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuotedSequent {
    pub ant: Vec<BoundedFormula>,
    pub suc: Vec<BoundedFormula>,
}

/// Computed class of a formula in the second-order bounded hierarchy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormulaClass {
    /// no set quantifiers at all
    Sigma0,
    /// existential set prefix over a Sigma0 matrix
    Sigma1,
    /// universal set prefix over a Sigma0 matrix
    Pi1,
    /// anything else
    Outside,
}

impl BoundedFormula {
    pub fn not(f: BoundedFormula) -> Self {
        BoundedFormula::Not(Box::new(f))
    }

    pub fn and(a: BoundedFormula, b: BoundedFormula) -> Self {
        BoundedFormula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: BoundedFormula, b: BoundedFormula) -> Self {
        BoundedFormula::Or(Box::new(a), Box::new(b))
    }

    fn has_set_quantifier(&self) -> bool {
        match self {
            BoundedFormula::Eq(..) | BoundedFormula::Le(..) | BoundedFormula::In(..) => false,
            BoundedFormula::Prf { .. } => false,
            BoundedFormula::Not(f) => f.has_set_quantifier(),
            BoundedFormula::And(a, b) | BoundedFormula::Or(a, b) => {
                a.has_set_quantifier() || b.has_set_quantifier()
            }
            BoundedFormula::ExistsNum { body, .. } | BoundedFormula::ForallNum { body, .. } => {
                body.has_set_quantifier()
            }
            BoundedFormula::ExistsSet { .. } | BoundedFormula::ForallSet { .. } => true,
        }
    }

    pub fn class(&self) -> FormulaClass {
        if !self.has_set_quantifier() {
            return FormulaClass::Sigma0;
        }
        // peel a homogeneous set-quantifier prefix
        let mut cur = self;
        let mut exist = 0;
        let mut univ = 0;
        loop {
            match cur {
                BoundedFormula::ExistsSet { body, .. } => {
                    exist += 1;
                    cur = body;
                }
                BoundedFormula::ForallSet { body, .. } => {
                    univ += 1;
                    cur = body;
                }
                _ => break,
            }
        }
        if cur.has_set_quantifier() {
            return FormulaClass::Outside;
        }
        match (exist > 0, univ > 0) {
            (true, false) => FormulaClass::Sigma1,
            (false, true) => FormulaClass::Pi1,
            _ => FormulaClass::Outside,
        }
    }

    /// Direct arithmetic truth for formulas with no set variables (the
    /// small-n oracle for the translation).
    pub fn eval_closed(&self, env: &NumEnv) -> Result<bool, BoundedError> {
        match self {
            BoundedFormula::Eq(a, b) => Ok(a.eval(env)? == b.eval(env)?),
            BoundedFormula::Le(a, b) => Ok(a.eval(env)? <= b.eval(env)?),
            BoundedFormula::In(_, p) => Err(BoundedError::UnsupportedConstruct(format!(
                "set membership in {p} has no arithmetic truth value"
            ))),
            BoundedFormula::Not(f) => Ok(!f.eval_closed(env)?),
            BoundedFormula::And(a, b) => Ok(a.eval_closed(env)? && b.eval_closed(env)?),
            BoundedFormula::Or(a, b) => Ok(a.eval_closed(env)? || b.eval_closed(env)?),
            BoundedFormula::ExistsNum { var, bound, body } => {
                let b = bound.eval(env)?;
                for v in 0..=b {
                    let mut e2 = env.clone();
                    e2.insert(var.clone(), v);
                    if body.eval_closed(&e2)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            BoundedFormula::ForallNum { var, bound, body } => {
                let b = bound.eval(env)?;
                for v in 0..=b {
                    let mut e2 = env.clone();
                    e2.insert(var.clone(), v);
                    if !body.eval_closed(&e2)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            BoundedFormula::ExistsSet { .. }
            | BoundedFormula::ForallSet { .. }
            | BoundedFormula::Prf { .. } => Err(BoundedError::UnsupportedConstruct(
                "set quantifier or proof predicate in arithmetic evaluation".into(),
            )),
        }
    }
}

impl fmt::Display for BoundedFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundedFormula::Eq(a, b) => write!(f, "eq({a},{b})"),
            BoundedFormula::Le(a, b) => write!(f, "le({a},{b})"),
            BoundedFormula::In(t, p) => write!(f, "in({t},{p})"),
            BoundedFormula::Not(g) => write!(f, "not({g})"),
            BoundedFormula::And(a, b) => write!(f, "and({a},{b})"),
            BoundedFormula::Or(a, b) => write!(f, "or({a},{b})"),
            BoundedFormula::ExistsNum { var, bound, body } => {
                write!(f, "exists {var} <= {bound} ({body})")
            }
            BoundedFormula::ForallNum { var, bound, body } => {
                write!(f, "forall {var} <= {bound} ({body})")
            }
            BoundedFormula::ExistsSet { var, body } => write!(f, "existsset {var} ({body})"),
            BoundedFormula::ForallSet { var, body } => write!(f, "forallset {var} ({body})"),
            BoundedFormula::Prf {
                system,
                extension,
                bound,
                quoted,
                proof_var,
            } => {
                write!(f, "Prf_{system}")?;
                if let Some(e) = extension {
                    write!(f, "+<{e}>")?;
                }
                write!(f, "({bound}; <")?;
                for (i, g) in quoted.ant.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{g}")?;
                }
                write!(f, " => ")?;
                for (i, g) in quoted.suc.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{g}")?;
                }
                write!(f, ">; {proof_var})")
            }
        }
    }
}

/// Free number variables of a formula.
fn free_num_vars(phi: &BoundedFormula, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
    fn term_vars(t: &NumTerm, bound: &[String], out: &mut BTreeSet<String>) {
        match t {
            NumTerm::Var(v) => {
                if !bound.contains(v) {
                    out.insert(v.clone());
                }
            }
            NumTerm::Add(a, b) | NumTerm::Mul(a, b) => {
                term_vars(a, bound, out);
                term_vars(b, bound, out);
            }
            _ => {}
        }
    }
    match phi {
        BoundedFormula::Eq(a, b) | BoundedFormula::Le(a, b) => {
            term_vars(a, bound, out);
            term_vars(b, bound, out);
        }
        BoundedFormula::In(t, _) => term_vars(t, bound, out),
        BoundedFormula::Not(f) => free_num_vars(f, bound, out),
        BoundedFormula::And(a, b) | BoundedFormula::Or(a, b) => {
            free_num_vars(a, bound, out);
            free_num_vars(b, bound, out);
        }
        BoundedFormula::ExistsNum {
            var,
            bound: b,
            body,
        }
        | BoundedFormula::ForallNum {
            var,
            bound: b,
            body,
        } => {
            term_vars(b, bound, out);
            bound.push(var.clone());
            free_num_vars(body, bound, out);
            bound.pop();
        }
        BoundedFormula::ExistsSet { body, .. } | BoundedFormula::ForallSet { body, .. } => {
            free_num_vars(body, bound, out)
        }
        BoundedFormula::Prf { .. } => {}
    }
}

/// The free number variable of the translation input; fixed by convention.
pub const TRANSLATION_VAR: &str = "x";

/// Paris–Wilkie translation ⟨φ⟩_n. Input must be set-quantifier-free and
/// Prf-free, with `x` as its only free number variable.
pub fn translate_formula(phi: &BoundedFormula, n: u64) -> Result<PropFormula, BoundedError> {
    let mut fv = BTreeSet::new();
    free_num_vars(phi, &mut Vec::new(), &mut fv);
    fv.remove(TRANSLATION_VAR);
    if let Some(v) = fv.into_iter().next() {
        return Err(BoundedError::UnboundVariable(v));
    }
    let mut env = NumEnv::new();
    env.insert(TRANSLATION_VAR.to_string(), n);
    translate_rec(phi, &env)
}

fn translate_rec(phi: &BoundedFormula, env: &NumEnv) -> Result<PropFormula, BoundedError> {
    Ok(match phi {
        BoundedFormula::Eq(a, b) => {
            if a.eval(env)? == b.eval(env)? {
                PropFormula::True
            } else {
                PropFormula::False
            }
        }
        BoundedFormula::Le(a, b) => {
            if a.eval(env)? <= b.eval(env)? {
                PropFormula::True
            } else {
                PropFormula::False
            }
        }
        BoundedFormula::In(t, p) => PropFormula::Atom(Atom::Set(p.clone(), t.eval(env)?)),
        BoundedFormula::Not(f) => PropFormula::not(translate_rec(f, env)?),
        BoundedFormula::And(a, b) => {
            PropFormula::and(vec![translate_rec(a, env)?, translate_rec(b, env)?])
        }
        BoundedFormula::Or(a, b) => {
            PropFormula::or(vec![translate_rec(a, env)?, translate_rec(b, env)?])
        }
        BoundedFormula::ExistsNum { var, bound, body } => {
            let b = bound.eval(env)?;
            let mut disjuncts = Vec::new();
            for v in 0..=b {
                let mut e2 = env.clone();
                e2.insert(var.clone(), v);
                disjuncts.push(translate_rec(body, &e2)?);
            }
            PropFormula::or(disjuncts)
        }
        BoundedFormula::ForallNum { var, bound, body } => {
            let b = bound.eval(env)?;
            let mut conjuncts = Vec::new();
            for v in 0..=b {
                let mut e2 = env.clone();
                e2.insert(var.clone(), v);
                conjuncts.push(translate_rec(body, &e2)?);
            }
            PropFormula::and(conjuncts)
        }
        BoundedFormula::ExistsSet { .. } | BoundedFormula::ForallSet { .. } => {
            return Err(BoundedError::UnsupportedConstruct(
                "set quantifier below the prefix".into(),
            ))
        }
        BoundedFormula::Prf { .. } => {
            return Err(BoundedError::UnsupportedConstruct(
                "symbolic proof predicate cannot be translated".into(),
            ))
        }
    })
}

/// Translate one formula allowing an existential set-quantifier prefix; the
/// prefix becomes an atom-block prefix on the propositional side.
pub fn translate_prefixed(phi: &BoundedFormula, n: u64) -> Result<PropFormula, BoundedError> {
    let mut prefix_vars = Vec::new();
    let mut cur = phi;
    while let BoundedFormula::ExistsSet { var, body } = cur {
        prefix_vars.push(var.clone());
        cur = body;
    }
    let body = translate_formula(cur, n)?;
    if prefix_vars.is_empty() {
        return Ok(body);
    }
    let block: Vec<Atom> = body
        .atoms()
        .into_iter()
        .filter(|a| matches!(a, Atom::Set(p, _) if prefix_vars.contains(p)))
        .collect();
    Ok(PropFormula::Exists(block, Box::new(body)))
}

/// Componentwise sequent translation. When `disjoint_namespaces` is set, set
/// variables of the i-th formula are renamed into their own namespace.
pub fn translate_sequent(
    ant: &[BoundedFormula],
    suc: &[BoundedFormula],
    n: u64,
    disjoint_namespaces: bool,
) -> Result<(Vec<PropFormula>, Vec<PropFormula>), BoundedError> {
    let mut counter = 0usize;
    let mut go = |fs: &[BoundedFormula]| -> Result<Vec<PropFormula>, BoundedError> {
        fs.iter()
            .map(|f| {
                let f = if disjoint_namespaces {
                    counter += 1;
                    rename_sets(f, counter - 1)
                } else {
                    f.clone()
                };
                translate_prefixed(&f, n)
            })
            .collect()
    };
    let a = go(ant)?;
    let s = go(suc)?;
    Ok((a, s))
}

fn rename_sets(phi: &BoundedFormula, ix: usize) -> BoundedFormula {
    match phi {
        BoundedFormula::In(t, p) => BoundedFormula::In(t.clone(), format!("{p}#{ix}")),
        BoundedFormula::Not(f) => BoundedFormula::not(rename_sets(f, ix)),
        BoundedFormula::And(a, b) => BoundedFormula::and(rename_sets(a, ix), rename_sets(b, ix)),
        BoundedFormula::Or(a, b) => BoundedFormula::or(rename_sets(a, ix), rename_sets(b, ix)),
        BoundedFormula::ExistsNum { var, bound, body } => BoundedFormula::ExistsNum {
            var: var.clone(),
            bound: bound.clone(),
            body: Box::new(rename_sets(body, ix)),
        },
        BoundedFormula::ForallNum { var, bound, body } => BoundedFormula::ForallNum {
            var: var.clone(),
            bound: bound.clone(),
            body: Box::new(rename_sets(body, ix)),
        },
        BoundedFormula::ExistsSet { var, body } => BoundedFormula::ExistsSet {
            var: format!("{var}#{ix}"),
            body: Box::new(rename_sets(body, ix)),
        },
        BoundedFormula::ForallSet { var, body } => BoundedFormula::ForallSet {
            var: format!("{var}#{ix}"),
            body: Box::new(rename_sets(body, ix)),
        },
        other => other.clone(),
    }
}

/// Interpretation target for one modal atom.
#[derive(Debug, Clone)]
pub struct AtomInterp {
    pub formula: BoundedFormula,
    pub declared: FormulaClass,
}

/// Arithmetic interpretation of a modal formula: constants and connectives
/// commute, boxes become existentially quantified proof predicates with
/// bound x^i. Output stays symbolic.
pub fn interpret_modal(
    f: &ModalFormula,
    map: &BTreeMap<String, AtomInterp>,
    w: &IndexWitness,
) -> Result<BoundedFormula, BoundedError> {
    let x = || NumTerm::var(TRANSLATION_VAR);
    Ok(match f {
        ModalFormula::Top => BoundedFormula::Eq(x(), x()),
        ModalFormula::Bottom => BoundedFormula::Eq(x(), NumTerm::add(x(), NumTerm::One)),
        ModalFormula::Atom { name, positive } => {
            let interp = map.get(name).ok_or_else(|| {
                BoundedError::UnsupportedConstruct(format!("no interpretation for atom `{name}`"))
            })?;
            if interp.formula.class() != interp.declared {
                return Err(BoundedError::ClassViolation(format!(
                    "atom `{name}`: computed class differs from declared"
                )));
            }
            if *positive {
                interp.formula.clone()
            } else {
                BoundedFormula::not(interp.formula.clone())
            }
        }
        ModalFormula::Not(g) => BoundedFormula::not(interpret_modal(g, map, w)?),
        ModalFormula::And(a, b) => {
            BoundedFormula::and(interpret_modal(a, map, w)?, interpret_modal(b, map, w)?)
        }
        ModalFormula::Or(a, b) => {
            BoundedFormula::or(interpret_modal(a, map, w)?, interpret_modal(b, map, w)?)
        }
        ModalFormula::Boxed(b) => {
            let i = b
                .index
                .eval(w)
                .map_err(|e| BoundedError::UnsupportedConstruct(e.to_string()))?;
            let mut bound = NumTerm::One;
            for _ in 0..i {
                bound = if bound == NumTerm::One {
                    x()
                } else {
                    NumTerm::mul(bound, x())
                };
            }
            let extension = match &b.relativizer {
                None => None,
                Some(p) => {
                    let interp = map.get(p).ok_or_else(|| {
                        BoundedError::UnsupportedConstruct(format!(
                            "no interpretation for relativizer `{p}`"
                        ))
                    })?;
                    if interp.declared != FormulaClass::Pi1 || interp.formula.class() != FormulaClass::Pi1 {
                        return Err(BoundedError::ClassViolation(format!(
                            "relativizer `{p}` must be interpreted by a universally-bound Π-form"
                        )));
                    }
                    Some(Box::new(interp.formula.clone()))
                }
            };
            let quoted = QuotedSequent {
                ant: b
                    .body
                    .ant
                    .iter()
                    .map(|g| interpret_modal(g, map, w))
                    .collect::<Result<_, _>>()?,
                suc: b
                    .body
                    .suc
                    .iter()
                    .map(|g| interpret_modal(g, map, w))
                    .collect::<Result<_, _>>()?,
            };
            let prf = BoundedFormula::Prf {
                system: b.system.clone().unwrap_or_else(|| "base".to_string()),
                extension,
                bound,
                quoted: Box::new(quoted),
                proof_var: "pi".to_string(),
            };
            BoundedFormula::ExistsSet {
                var: "pi".to_string(),
                body: Box::new(prf),
            }
        }
    })
}

/// Interpret both sides of a modal sequent.
pub fn interpret_sequent(
    s: &Sequent,
    map: &BTreeMap<String, AtomInterp>,
    w: &IndexWitness,
) -> Result<(Vec<BoundedFormula>, Vec<BoundedFormula>), BoundedError> {
    let ant = s
        .ant
        .iter()
        .map(|f| interpret_modal(f, map, w))
        .collect::<Result<_, _>>()?;
    let suc = s
        .suc
        .iter()
        .map(|f| interpret_modal(f, map, w))
        .collect::<Result<_, _>>()?;
    Ok((ant, suc))
}

// ---------------------------------------------------------------------------
// text format
// ---------------------------------------------------------------------------

struct BParser<'a> {
    inner: crate::parse::Parser<'a>,
}

impl<'a> BParser<'a> {
    fn term(&mut self) -> Result<NumTerm, ParseError> {
        let mut t = self.prod()?;
        while self.inner.eat("+") {
            let u = self.prod()?;
            t = NumTerm::add(t, u);
        }
        Ok(t)
    }

    fn prod(&mut self) -> Result<NumTerm, ParseError> {
        let mut t = self.term_atom()?;
        while self.inner.eat("*") {
            let u = self.term_atom()?;
            t = NumTerm::mul(t, u);
        }
        Ok(t)
    }

    fn term_atom(&mut self) -> Result<NumTerm, ParseError> {
        match self.inner.peek() {
            Some(b'(') => {
                self.inner.expect("(")?;
                let t = self.term()?;
                self.inner.expect(")")?;
                Ok(t)
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self.inner.nat()?;
                Ok(match n {
                    0 => NumTerm::Zero,
                    1 => NumTerm::One,
                    2 => NumTerm::Two,
                    _ => numeral(n),
                })
            }
            _ => Ok(NumTerm::var(self.inner.ident()?)),
        }
    }

    fn formula(&mut self) -> Result<BoundedFormula, ParseError> {
        if self.inner.eat("(") {
            let f = self.formula()?;
            self.inner.expect(")")?;
            return Ok(f);
        }
        let kw = self.inner.ident()?;
        match kw.as_str() {
            "eq" | "le" => {
                self.inner.expect("(")?;
                let a = self.term()?;
                self.inner.expect(",")?;
                let b = self.term()?;
                self.inner.expect(")")?;
                Ok(if kw == "eq" {
                    BoundedFormula::Eq(a, b)
                } else {
                    BoundedFormula::Le(a, b)
                })
            }
            "in" => {
                self.inner.expect("(")?;
                let t = self.term()?;
                self.inner.expect(",")?;
                let p = self.inner.ident()?;
                self.inner.expect(")")?;
                Ok(BoundedFormula::In(t, p))
            }
            "not" => {
                self.inner.expect("(")?;
                let f = self.formula()?;
                self.inner.expect(")")?;
                Ok(BoundedFormula::not(f))
            }
            "and" | "or" => {
                self.inner.expect("(")?;
                let a = self.formula()?;
                self.inner.expect(",")?;
                let b = self.formula()?;
                self.inner.expect(")")?;
                Ok(if kw == "and" {
                    BoundedFormula::and(a, b)
                } else {
                    BoundedFormula::or(a, b)
                })
            }
            "exists" | "forall" => {
                let var = self.inner.ident()?;
                self.inner.expect("<=")?;
                let bound = self.term()?;
                let body = Box::new(self.formula()?);
                Ok(if kw == "exists" {
                    BoundedFormula::ExistsNum { var, bound, body }
                } else {
                    BoundedFormula::ForallNum { var, bound, body }
                })
            }
            "existsset" | "forallset" => {
                let var = self.inner.ident()?;
                let body = Box::new(self.formula()?);
                Ok(if kw == "existsset" {
                    BoundedFormula::ExistsSet { var, body }
                } else {
                    BoundedFormula::ForallSet { var, body }
                })
            }
            other => Err(self.inner.error(format!("unknown connective `{other}`"))),
        }
    }
}

pub fn parse_bounded(text: &str) -> Result<BoundedFormula, ParseError> {
    let mut p = BParser {
        inner: crate::parse::Parser::new(text),
    };
    let f = p.formula()?;
    if !p.inner.at_end() {
        return Err(p.inner.error("trailing input after formula"));
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numeral_five_matches_display() {
        // bits 101: ((1*2)+0)*2+1
        assert_eq!(numeral(5).to_string(), "((((1*2)+0)*2)+1)");
    }

    #[test]
    fn numeral_shape() {
        assert_eq!(numeral(1), NumTerm::One);
        assert_eq!(numeral(0), NumTerm::Zero);
        let five = numeral(5);
        assert_eq!(
            five,
            NumTerm::add(
                NumTerm::mul(
                    NumTerm::add(NumTerm::mul(NumTerm::One, NumTerm::Two), NumTerm::Zero),
                    NumTerm::Two
                ),
                NumTerm::One
            )
        );
    }

    #[test]
    fn numeral_eval_and_size() {
        for n in 0..2000u64 {
            assert_eq!(numeral(n).eval(&NumEnv::new()).unwrap(), n);
            let bits = if n == 0 { 1 } else { (64 - n.leading_zeros()) as usize };
            assert!(numeral(n).size() <= 4 * bits, "n={n}");
        }
    }

    #[test]
    fn translate_exists_unfolds() {
        let phi = parse_bounded("exists y <= x in(y,P)").unwrap();
        let p = translate_formula(&phi, 2).unwrap();
        assert_eq!(
            p,
            PropFormula::or(vec![
                PropFormula::Atom(Atom::Set("P".into(), 0)),
                PropFormula::Atom(Atom::Set("P".into(), 1)),
                PropFormula::Atom(Atom::Set("P".into(), 2)),
            ])
        );
    }

    #[test]
    fn translate_closed_relation() {
        let phi = parse_bounded("le(2,1+2)").unwrap();
        assert_eq!(translate_formula(&phi, 0).unwrap(), PropFormula::True);
    }

    #[test]
    fn translate_excluded_middle_is_tautology() {
        let phi = parse_bounded("forall y <= x or(in(y,P), not(in(y,P)))").unwrap();
        for n in 0..=16 {
            let p = translate_formula(&phi, n).unwrap();
            assert!(crate::sat::is_tautology(&p, 100_000).unwrap(), "n={n}");
        }
    }

    #[test]
    fn translate_rejects_other_free_vars() {
        let phi = parse_bounded("eq(z,0)").unwrap();
        assert!(matches!(
            translate_formula(&phi, 3),
            Err(BoundedError::UnboundVariable(_))
        ));
    }

    #[test]
    fn atom_monotone_in_n() {
        let phi = parse_bounded("exists y <= x in(y,P)").unwrap();
        for n in 0..10 {
            let small = translate_formula(&phi, n).unwrap().atoms();
            let big = translate_formula(&phi, n + 1).unwrap().atoms();
            assert!(small.is_subset(&big));
        }
    }

    #[test]
    fn prefix_becomes_atom_block() {
        let phi = parse_bounded("existsset P exists y <= x in(y,P)").unwrap();
        let p = translate_prefixed(&phi, 1).unwrap();
        match p {
            PropFormula::Exists(block, _) => assert_eq!(block.len(), 2),
            other => panic!("expected prefix, got {other}"),
        }
    }

    #[test]
    fn class_tags_are_computed() {
        assert_eq!(parse_bounded("eq(x,x)").unwrap().class(), FormulaClass::Sigma0);
        assert_eq!(
            parse_bounded("existsset P in(0,P)").unwrap().class(),
            FormulaClass::Sigma1
        );
        assert_eq!(
            parse_bounded("forallset P in(0,P)").unwrap().class(),
            FormulaClass::Pi1
        );
        assert_eq!(
            parse_bounded("not(existsset P in(0,P))").unwrap().class(),
            FormulaClass::Outside
        );
    }

    #[test]
    fn interpret_constants_and_homomorphism() {
        use crate::parse::parse_formula;
        let map = BTreeMap::new();
        let w = IndexWitness::new();
        let bot = interpret_modal(&ModalFormula::Bottom, &map, &w).unwrap();
        assert_eq!(bot.to_string(), "eq(x,(x+1))");
        let top = interpret_modal(&ModalFormula::Top, &map, &w).unwrap();
        assert_eq!(top.to_string(), "eq(x,x)");
        let conj = parse_formula("top /\\ top").unwrap();
        let got = interpret_modal(&conj, &map, &w).unwrap();
        assert_eq!(got, BoundedFormula::and(top.clone(), top));
    }

    #[test]
    fn interpret_box_builds_prf() {
        use crate::parse::parse_formula;
        let mut map = BTreeMap::new();
        map.insert(
            "q".to_string(),
            AtomInterp {
                formula: parse_bounded("eq(x,x)").unwrap(),
                declared: FormulaClass::Sigma0,
            },
        );
        let f = parse_formula("^2[ => q ]").unwrap();
        let got = interpret_modal(&f, &map, &IndexWitness::new()).unwrap();
        assert_eq!(
            got.to_string(),
            "existsset pi (Prf_base((x*x); < => eq(x,x)>; pi))"
        );
    }

    #[test]
    fn relativizer_needs_pi_form() {
        use crate::parse::parse_formula;
        let mut map = BTreeMap::new();
        map.insert(
            "q".to_string(),
            AtomInterp {
                formula: parse_bounded("eq(x,x)").unwrap(),
                declared: FormulaClass::Sigma0,
            },
        );
        map.insert(
            "p".to_string(),
            AtomInterp {
                formula: parse_bounded("eq(x,x)").unwrap(),
                declared: FormulaClass::Sigma0,
            },
        );
        let f = parse_formula("^1[ => q ]{p}").unwrap();
        assert!(matches!(
            interpret_modal(&f, &map, &IndexWitness::new()),
            Err(BoundedError::ClassViolation(_))
        ));
        map.insert(
            "p".to_string(),
            AtomInterp {
                formula: parse_bounded("forallset Q in(0,Q)").unwrap(),
                declared: FormulaClass::Pi1,
            },
        );
        let ok = interpret_modal(&f, &map, &IndexWitness::new()).unwrap();
        assert!(ok.to_string().contains("Prf_base+<forallset Q (in(0,Q))>"));
    }

    #[test]
    fn eval_closed_oracle() {
        let phi = parse_bounded("exists y <= x eq(y*y, x)").unwrap();
        let mut env = NumEnv::new();
        for (n, truth) in [(4u64, true), (5, false), (9, true), (10, false)] {
            env.insert("x".into(), n);
            assert_eq!(phi.eval_closed(&env).unwrap(), truth, "n={n}");
        }
    }

    #[test]
    fn bounded_round_trip() {
        for text in [
            "eq(x,x)",
            "exists y <= x (in(y,P))",
            "forall y <= x*x (or(in(y,P),not(in(y,P))))",
            "existsset P (and(in(0,P),le(1,2)))",
        ] {
            let f = parse_bounded(text).unwrap();
            let again = parse_bounded(&f.to_string()).unwrap();
            assert_eq!(f, again, "round trip failed for `{text}`");
        }
    }
}
