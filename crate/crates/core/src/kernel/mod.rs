//! The proof checker: initial sequent schemes, structural rules,
//! necessitation, hypothesis schemes with a ledger, and script checking.
//!
//! Steps are compared on canonical forms: index terms evaluated under the
//! script's witness, both sides of every sequent (and of every box body)
//! sorted. Exchange is therefore implicit, and two index terms count as
//! equal exactly when the witness gives them the same value.

pub mod schemes;
pub mod script;

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::error::FormulaError;
use crate::formula::{ModalFormula, RelativizerPolicy, Sequent, Strength};
use crate::index::IndexWitness;
use crate::sat::{self, PropFormula, SatError};

pub use script::parse_script;

/// Opaque-atom cap for the propositional tautology rule.
pub const TAUT_ATOM_LIMIT: usize = 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StepError {
    #[error("rule shape: {0}")]
    RuleShape(String),
    #[error("connective restriction: {0}")]
    ConnectiveRestriction(String),
    #[error("not a propositional tautology (countermodel: {0})")]
    NotTautology(String),
    #[error("opaque atom budget exceeded: {0} atoms, limit {1}")]
    AtomBudgetExceeded(usize, usize),
    #[error("freshness: {0}")]
    Freshness(String),
    #[error("missing hypothesis: {0}")]
    MissingHypothesis(String),
    #[error("side condition: {0}")]
    SideCondition(String),
    #[error("unknown scheme `{0}`")]
    UnknownScheme(String),
    #[error("scheme mismatch for {0}: {1}")]
    SchemeMismatch(String, String),
    #[error("bad premise reference: step {0}")]
    BadRef(usize),
    #[error("ill-formed sequent: {0}")]
    IllFormed(String),
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error(transparent)]
    Sat(#[from] SatError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Justification {
    Init(String),
    Taut,
    Hyp {
        name: String,
        premise_ix: Option<usize>,
    },
    Cut(usize, usize),
    NegL(usize),
    NegR(usize),
    OrL(usize, usize),
    OrR(usize),
    AndL(usize),
    AndR(usize, usize),
    Weak(usize),
    Contract(usize),
    Nec {
        var: String,
        strength: Strength,
        relativizer: Option<String>,
        system: Option<String>,
        premise: usize,
    },
    Subst {
        premise: usize,
        atom: String,
        with: ModalFormula,
    },
    Transfer {
        premise: usize,
        system: String,
        var: String,
    },
    Unify {
        premise: usize,
        from: String,
        to: String,
    },
}

#[derive(Debug, Clone)]
pub struct ProofStep {
    pub num: usize,
    pub conclusion: Sequent,
    pub just: Justification,
    pub line: usize,
}

#[derive(Debug, Clone, Default)]
pub struct ProofScript {
    /// atom name -> declared Π-universal interpretation class
    pub atoms: BTreeMap<String, bool>,
    pub systems: BTreeSet<String>,
    pub normal_systems: BTreeSet<String>,
    pub simulated_systems: BTreeSet<String>,
    pub premises: Vec<Sequent>,
    pub witness: IndexWitness,
    pub exists_vars: BTreeSet<String>,
    pub steps: Vec<ProofStep>,
    pub goal: Sequent,
}

impl ProofScript {
    /// Shift every witness value by a constant; the checker must accept the
    /// result whenever it accepts the original.
    pub fn shifted(&self, c: u64) -> ProofScript {
        let mut out = self.clone();
        for v in out.witness.values_mut() {
            *v += c;
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CheckStatus {
    Ok,
    Failed { step: usize, reason: String },
}

#[derive(Debug, Clone)]
pub struct CheckReport {
    pub status: CheckStatus,
    /// hypothesis schemes the goal depends on
    pub hypotheses: BTreeSet<String>,
    /// initial schemes used anywhere (informational)
    pub schemes_used: BTreeSet<String>,
    /// index side-conditions evaluated along the way
    pub constraints: Vec<String>,
    pub steps_checked: usize,
}

impl CheckReport {
    pub fn is_ok(&self) -> bool {
        self.status == CheckStatus::Ok
    }
}

// --- multiset helpers on normalized (sorted) sides ------------------------

fn remove_one(v: &mut Vec<ModalFormula>, x: &ModalFormula) -> bool {
    if let Some(ix) = v.iter().position(|y| y == x) {
        v.remove(ix);
        true
    } else {
        false
    }
}

fn plus(a: &[ModalFormula], extra: &[ModalFormula]) -> Vec<ModalFormula> {
    let mut out = a.to_vec();
    out.extend_from_slice(extra);
    out.sort();
    out
}

fn minus_one(a: &[ModalFormula], x: &ModalFormula) -> Option<Vec<ModalFormula>> {
    let mut out = a.to_vec();
    if remove_one(&mut out, x) {
        Some(out)
    } else {
        None
    }
}

fn is_sub_multiset(small: &[ModalFormula], big: &[ModalFormula]) -> bool {
    let mut rest = big.to_vec();
    small.iter().all(|f| remove_one(&mut rest, f))
}

// --- propositional abstraction ---------------------------------------------

/// Opaque-atom abstraction: maximal box-rooted subformulas and literals
/// become atoms, constants stay transparent. Input should be normalized so
/// syntactically-different spellings of the same box coincide.
pub fn abstract_formula(f: &ModalFormula) -> PropFormula {
    match f {
        ModalFormula::Top => PropFormula::True,
        ModalFormula::Bottom => PropFormula::False,
        ModalFormula::Atom { name, positive } => {
            let a = PropFormula::opaque(format!("lit:{name}"));
            if *positive {
                a
            } else {
                PropFormula::not(a)
            }
        }
        ModalFormula::Boxed(_) => PropFormula::opaque(format!("box:{f}")),
        ModalFormula::Not(g) => PropFormula::not(abstract_formula(g)),
        ModalFormula::Or(a, b) => PropFormula::or(vec![abstract_formula(a), abstract_formula(b)]),
        ModalFormula::And(a, b) => PropFormula::and(vec![abstract_formula(a), abstract_formula(b)]),
    }
}

/// The implication reading of a sequent at the opaque-atom layer.
pub fn abstract_sequent(s: &Sequent) -> PropFormula {
    let ant = PropFormula::and(s.ant.iter().map(abstract_formula).collect());
    let suc = PropFormula::or(s.suc.iter().map(abstract_formula).collect());
    PropFormula::implies(ant, suc)
}

/// Tautology check over the opaque-atom abstraction.
pub fn apply_proptaut(s_norm: &Sequent, atom_limit: usize) -> Result<(), StepError> {
    let phi = abstract_sequent(s_norm);
    let n_atoms = phi.atoms().len();
    if n_atoms > atom_limit {
        return Err(StepError::AtomBudgetExceeded(n_atoms, atom_limit));
    }
    match sat::sat_solve(&PropFormula::not(phi), sat::DEFAULT_DECISION_BUDGET)? {
        None => Ok(()),
        Some(model) => {
            let desc: Vec<String> = model
                .iter()
                .map(|(a, v)| format!("{a}={}", if *v { 1 } else { 0 }))
                .collect();
            Err(StepError::NotTautology(desc.join(", ")))
        }
    }
}

// --- checking ---------------------------------------------------------------

struct Ctx<'a> {
    script: &'a ProofScript,
    /// normalized conclusions of validated steps, by position
    norm: Vec<Sequent>,
    /// per-step hypothesis ledgers
    ledgers: Vec<BTreeSet<String>>,
    /// exists-variables already introduced somewhere
    introduced: BTreeSet<String>,
    by_num: BTreeMap<usize, usize>,
    constraints: Vec<String>,
    schemes_used: BTreeSet<String>,
}

impl<'a> Ctx<'a> {
    fn resolve(&self, num: usize, upto: usize) -> Result<usize, StepError> {
        match self.by_num.get(&num) {
            Some(&ix) if ix < upto => Ok(ix),
            _ => Err(StepError::BadRef(num)),
        }
    }

    fn w(&self) -> &IndexWitness {
        &self.script.witness
    }

    fn note_exists_vars(&mut self, s: &Sequent) {
        let mut vars = BTreeSet::new();
        s.index_vars(&mut vars);
        for v in vars {
            if self.script.exists_vars.contains(&v) {
                self.introduced.insert(v);
            }
        }
    }

    fn check_freshness(&mut self, var: &str, upto: usize) -> Result<(), StepError> {
        if !self.script.exists_vars.contains(var) {
            return Err(StepError::Freshness(format!(
                "`{var}` is not declared as an exists-variable"
            )));
        }
        if self.introduced.contains(var) {
            // re-introduction with the same committed value is allowed
            return Ok(());
        }
        for step in &self.script.steps[..upto] {
            let mut vars = BTreeSet::new();
            step.conclusion.index_vars(&mut vars);
            if vars.contains(var) {
                return Err(StepError::Freshness(format!(
                    "`{var}` already occurs in step {}",
                    step.num
                )));
            }
        }
        self.introduced.insert(var.to_string());
        Ok(())
    }
}

pub fn check_script(script: &ProofScript) -> CheckReport {
    let mut ctx = Ctx {
        script,
        norm: Vec::new(),
        ledgers: Vec::new(),
        introduced: BTreeSet::new(),
        by_num: BTreeMap::new(),
        constraints: Vec::new(),
        schemes_used: BTreeSet::new(),
    };
    for (ix, step) in script.steps.iter().enumerate() {
        match check_step(&mut ctx, ix, step) {
            Ok(ledger) => {
                let n = match step.conclusion.normalize(&script.witness) {
                    Ok(n) => n,
                    Err(e) => {
                        return fail(&ctx, step.num, ix, e.to_string());
                    }
                };
                ctx.norm.push(n);
                ctx.ledgers.push(ledger);
                ctx.by_num.insert(step.num, ix);
            }
            Err(e) => return fail(&ctx, step.num, ix, e.to_string()),
        }
    }
    // goal must match the last step
    let goal_ok = match (
        script.goal.normalize(&script.witness),
        ctx.norm.last(),
    ) {
        (Ok(g), Some(last)) => g == *last,
        _ => false,
    };
    if !goal_ok {
        let k = script.steps.last().map(|s| s.num).unwrap_or(0);
        return fail(&ctx, k, script.steps.len(), "final step does not match the goal".into());
    }
    CheckReport {
        status: CheckStatus::Ok,
        hypotheses: ctx.ledgers.last().cloned().unwrap_or_default(),
        schemes_used: ctx.schemes_used.clone(),
        constraints: ctx.constraints,
        steps_checked: script.steps.len(),
    }
}

fn fail(ctx: &Ctx, step_num: usize, checked: usize, reason: String) -> CheckReport {
    CheckReport {
        status: CheckStatus::Failed {
            step: step_num,
            reason,
        },
        hypotheses: ctx.ledgers.last().cloned().unwrap_or_default(),
        schemes_used: ctx.schemes_used.clone(),
        constraints: ctx.constraints.clone(),
        steps_checked: checked,
    }
}

fn check_step(
    ctx: &mut Ctx,
    ix: usize,
    step: &ProofStep,
) -> Result<BTreeSet<String>, StepError> {
    if !step.conclusion.wf_prop() {
        return Err(StepError::IllFormed(format!("{}", step.conclusion)));
    }
    // every atom must be declared
    {
        let mut names = BTreeSet::new();
        collect_atoms(&step.conclusion, &mut names);
        for a in names {
            if !ctx.script.atoms.contains_key(&a) {
                return Err(StepError::IllFormed(format!("undeclared atom `{a}`")));
            }
        }
        let mut ivars = BTreeSet::new();
        step.conclusion.index_vars(&mut ivars);
        for v in ivars {
            if !ctx.script.witness.contains_key(&v) {
                return Err(StepError::IllFormed(format!("undeclared index variable `{v}`")));
            }
        }
    }
    let c = step.conclusion.normalize(ctx.w())?;
    let mut ledger = BTreeSet::new();
    // axioms and necessitation over a non-base system need the normal-system
    // premise for that system; nested boxes mentioned in bodies don't count
    let require_normal = |s: Option<&str>, ledger: &mut BTreeSet<String>| -> Result<(), StepError> {
        if let Some(s) = s {
            if !ctx.script.normal_systems.contains(s) {
                return Err(StepError::MissingHypothesis(format!(
                    "system `{s}` used in an axiom or necessitation without a `normal {s}` declaration"
                )));
            }
            ledger.insert(format!("NormalSystem@{s}"));
        }
        Ok(())
    };
    match &step.just {
        Justification::Init(name) => {
            let principal =
                schemes::match_initial(name, &c, ctx.script, &mut ctx.constraints, step.num)?;
            require_normal(principal.as_deref(), &mut ledger)?;
            ctx.schemes_used.insert(name.clone());
            ctx.note_exists_vars(&step.conclusion);
        }
        Justification::Taut => {
            apply_proptaut(&c, TAUT_ATOM_LIMIT)?;
        }
        Justification::Hyp { name, premise_ix } => {
            let entry = if name == "Premise" {
                let k = premise_ix
                    .ok_or_else(|| StepError::RuleShape("`hyp Premise` needs an index".into()))?;
                let p = ctx
                    .script
                    .premises
                    .get(k.wrapping_sub(1))
                    .ok_or_else(|| StepError::RuleShape(format!("no premise {k}")))?;
                if p.normalize(ctx.w())? != c {
                    return Err(StepError::SchemeMismatch(
                        "Premise".into(),
                        format!("step differs from declared premise {k}"),
                    ));
                }
                "Premise".to_string()
            } else {
                schemes::match_hypothesis(name, &c, ctx.script)?
            };
            ledger.insert(entry);
            ctx.note_exists_vars(&step.conclusion);
        }
        Justification::Cut(a, b) => {
            let (pa, pb) = (ctx.resolve(*a, ix)?, ctx.resolve(*b, ix)?);
            rule_cut(&ctx.norm[pa], &ctx.norm[pb], &c)?;
            ledger.extend(ctx.ledgers[pa].iter().cloned());
            ledger.extend(ctx.ledgers[pb].iter().cloned());
        }
        Justification::NegL(a) => {
            let pa = ctx.resolve(*a, ix)?;
            rule_neg_left(&ctx.norm[pa], &c)?;
            ledger.extend(ctx.ledgers[pa].iter().cloned());
        }
        Justification::NegR(a) => {
            let pa = ctx.resolve(*a, ix)?;
            rule_neg_right(&ctx.norm[pa], &c)?;
            ledger.extend(ctx.ledgers[pa].iter().cloned());
        }
        Justification::OrL(a, b) => {
            let (pa, pb) = (ctx.resolve(*a, ix)?, ctx.resolve(*b, ix)?);
            rule_or_left(&ctx.norm[pa], &ctx.norm[pb], &c)?;
            ledger.extend(ctx.ledgers[pa].iter().cloned());
            ledger.extend(ctx.ledgers[pb].iter().cloned());
        }
        Justification::OrR(a) => {
            let pa = ctx.resolve(*a, ix)?;
            rule_or_right(&ctx.norm[pa], &c)?;
            ledger.extend(ctx.ledgers[pa].iter().cloned());
        }
        Justification::AndL(a) => {
            let pa = ctx.resolve(*a, ix)?;
            rule_and_left(&ctx.norm[pa], &c)?;
            ledger.extend(ctx.ledgers[pa].iter().cloned());
        }
        Justification::AndR(a, b) => {
            let (pa, pb) = (ctx.resolve(*a, ix)?, ctx.resolve(*b, ix)?);
            rule_and_right(&ctx.norm[pa], &ctx.norm[pb], &c)?;
            ledger.extend(ctx.ledgers[pa].iter().cloned());
            ledger.extend(ctx.ledgers[pb].iter().cloned());
        }
        Justification::Weak(a) => {
            let pa = ctx.resolve(*a, ix)?;
            rule_weakening(&ctx.norm[pa], &c)?;
            ledger.extend(ctx.ledgers[pa].iter().cloned());
            ctx.note_exists_vars(&step.conclusion);
        }
        Justification::Contract(a) => {
            let pa = ctx.resolve(*a, ix)?;
            rule_contraction(&ctx.norm[pa], &c)?;
            ledger.extend(ctx.ledgers[pa].iter().cloned());
        }
        Justification::Nec {
            var,
            strength,
            relativizer,
            system,
            premise,
        } => {
            let pa = ctx.resolve(*premise, ix)?;
            ctx.check_freshness(var, ix)?;
            rule_necessitation(
                ctx.script,
                &ctx.norm[pa],
                step,
                var,
                *strength,
                relativizer.as_deref(),
                system.as_deref(),
            )?;
            require_normal(system.as_deref(), &mut ledger)?;
            ledger.extend(ctx.ledgers[pa].iter().cloned());
        }
        Justification::Subst {
            premise,
            atom,
            with,
        } => {
            let pa = ctx.resolve(*premise, ix)?;
            let policy = match ctx.script.atoms.get(atom) {
                Some(true) => RelativizerPolicy::PiUniversal,
                Some(false) => RelativizerPolicy::Forbid,
                None => {
                    return Err(StepError::SideCondition(format!(
                        "substitution target `{atom}` is not declared"
                    )))
                }
            };
            let expected = ctx.script.steps[pa]
                .conclusion
                .substitute(atom, with, policy)?
                .normalize(ctx.w())?;
            if expected != c {
                return Err(StepError::RuleShape(
                    "conclusion is not the premise under the declared substitution".into(),
                ));
            }
            ledger.extend(ctx.ledgers[pa].iter().cloned());
        }
        Justification::Transfer {
            premise,
            system,
            var,
        } => {
            let pa = ctx.resolve(*premise, ix)?;
            if !ctx.script.simulated_systems.contains(system) {
                return Err(StepError::MissingHypothesis(format!(
                    "no simulation premise covers system `{system}`"
                )));
            }
            ctx.check_freshness(var, ix)?;
            rule_transfer(ctx.script, &ctx.norm[pa], step, system, var)?;
            ledger.insert("SimulationPremise".to_string());
            ledger.extend(ctx.ledgers[pa].iter().cloned());
        }
        Justification::Unify { premise, from, to } => {
            let pa = ctx.resolve(*premise, ix)?;
            let (wf, wt) = (
                ctx.script.witness.get(from).copied(),
                ctx.script.witness.get(to).copied(),
            );
            match (wf, wt) {
                (Some(x), Some(y)) if x == y => {
                    ctx.constraints
                        .push(format!("step {}: unify {from}={to} ({x})", step.num));
                }
                (Some(x), Some(y)) => {
                    return Err(StepError::SideCondition(format!(
                        "unify needs equal witness values, got {from}={x}, {to}={y}"
                    )))
                }
                _ => {
                    return Err(StepError::SideCondition(
                        "unify variables must be declared".into(),
                    ))
                }
            }
            let expected = ctx.script.steps[pa]
                .conclusion
                .rename_index_var(from, to)
                .normalize(ctx.w())?;
            if expected != c {
                return Err(StepError::RuleShape(
                    "conclusion is not the premise under the variable identification".into(),
                ));
            }
            ledger.extend(ctx.ledgers[pa].iter().cloned());
        }
    }
    Ok(ledger)
}

fn collect_atoms(s: &Sequent, out: &mut BTreeSet<String>) {
    fn go(f: &ModalFormula, out: &mut BTreeSet<String>) {
        match f {
            ModalFormula::Atom { name, .. } => {
                out.insert(name.clone());
            }
            ModalFormula::Boxed(b) => {
                if let Some(p) = &b.relativizer {
                    out.insert(p.clone());
                }
                collect_atoms(&b.body, out);
            }
            ModalFormula::Not(g) => go(g, out),
            ModalFormula::Or(a, b) | ModalFormula::And(a, b) => {
                go(a, out);
                go(b, out);
            }
            _ => {}
        }
    }
    for f in s.ant.iter().chain(&s.suc) {
        go(f, out);
    }
}

// --- structural rules (all arguments normalized) ----------------------------

fn rule_cut(a: &Sequent, b: &Sequent, c: &Sequent) -> Result<(), StepError> {
    for cutf in &a.suc {
        if let Some(b_ant) = minus_one(&b.ant, cutf) {
            let Some(a_suc) = minus_one(&a.suc, cutf) else {
                continue;
            };
            let ant = plus(&a.ant, &b_ant);
            let suc = plus(&a_suc, &b.suc);
            if ant == c.ant && suc == c.suc {
                return Ok(());
            }
        }
    }
    Err(StepError::RuleShape(
        "no cut formula aligns the premises with the conclusion".into(),
    ))
}

fn rule_neg_left(a: &Sequent, c: &Sequent) -> Result<(), StepError> {
    for f in &a.suc {
        let Ok(nf) = f.negate() else { continue };
        let Some(suc) = minus_one(&a.suc, f) else {
            continue;
        };
        if plus(&a.ant, &[nf]) == c.ant && suc == c.suc {
            return Ok(());
        }
    }
    Err(StepError::RuleShape(
        "neg-left: no succedent member matches".into(),
    ))
}

fn rule_neg_right(a: &Sequent, c: &Sequent) -> Result<(), StepError> {
    for f in &a.ant {
        let Ok(nf) = f.negate() else { continue };
        let Some(ant) = minus_one(&a.ant, f) else {
            continue;
        };
        if ant == c.ant && plus(&a.suc, &[nf]) == c.suc {
            return Ok(());
        }
    }
    Err(StepError::RuleShape(
        "neg-right: no antecedent member matches".into(),
    ))
}

fn joinable(a: &ModalFormula, b: &ModalFormula) -> Result<(), StepError> {
    let boxes = a.as_box().is_some() && b.as_box().is_some();
    let neg = |f: &ModalFormula| matches!(f, ModalFormula::Not(g) if g.as_box().is_some());
    if boxes || (neg(a) && neg(b)) {
        Ok(())
    } else {
        Err(StepError::ConnectiveRestriction(
            "∨/∧ rules require box-rooted or negated-box-rooted components".into(),
        ))
    }
}

fn rule_or_left(a: &Sequent, b: &Sequent, c: &Sequent) -> Result<(), StepError> {
    for f in &c.ant {
        let ModalFormula::Or(x, y) = f else { continue };
        joinable(x, y)?;
        let ctx = minus_one(&c.ant, f).unwrap();
        let with = |g: &ModalFormula| plus(&ctx, std::slice::from_ref(g));
        let fits = |p: &Sequent, g: &ModalFormula| p.ant == with(g) && p.suc == c.suc;
        if (fits(a, x) && fits(b, y)) || (fits(a, y) && fits(b, x)) {
            return Ok(());
        }
    }
    Err(StepError::RuleShape(
        "or-left: no principal disjunction aligns".into(),
    ))
}

fn rule_or_right(a: &Sequent, c: &Sequent) -> Result<(), StepError> {
    for f in &c.suc {
        let ModalFormula::Or(x, y) = f else { continue };
        joinable(x, y)?;
        let ctx = minus_one(&c.suc, f).unwrap();
        if a.ant != c.ant {
            continue;
        }
        let cands = [
            plus(&ctx, &[(**x).clone(), (**y).clone()]),
            plus(&ctx, std::slice::from_ref(x)),
            plus(&ctx, std::slice::from_ref(y)),
        ];
        if cands.iter().any(|cand| a.suc == *cand) {
            return Ok(());
        }
    }
    Err(StepError::RuleShape(
        "or-right: no principal disjunction aligns".into(),
    ))
}

fn rule_and_left(a: &Sequent, c: &Sequent) -> Result<(), StepError> {
    for f in &c.ant {
        let ModalFormula::And(x, y) = f else { continue };
        joinable(x, y)?;
        let ctx = minus_one(&c.ant, f).unwrap();
        if a.suc != c.suc {
            continue;
        }
        let cands = [
            plus(&ctx, &[(**x).clone(), (**y).clone()]),
            plus(&ctx, std::slice::from_ref(x)),
            plus(&ctx, std::slice::from_ref(y)),
        ];
        if cands.iter().any(|cand| a.ant == *cand) {
            return Ok(());
        }
    }
    Err(StepError::RuleShape(
        "and-left: no principal conjunction aligns".into(),
    ))
}

fn rule_and_right(a: &Sequent, b: &Sequent, c: &Sequent) -> Result<(), StepError> {
    for f in &c.suc {
        let ModalFormula::And(x, y) = f else { continue };
        joinable(x, y)?;
        let ctx = minus_one(&c.suc, f).unwrap();
        let with = |g: &ModalFormula| plus(&ctx, std::slice::from_ref(g));
        let fits = |p: &Sequent, g: &ModalFormula| p.suc == with(g) && p.ant == c.ant;
        if (fits(a, x) && fits(b, y)) || (fits(a, y) && fits(b, x)) {
            return Ok(());
        }
    }
    Err(StepError::RuleShape(
        "and-right: no principal conjunction aligns".into(),
    ))
}

fn rule_weakening(a: &Sequent, c: &Sequent) -> Result<(), StepError> {
    if is_sub_multiset(&a.ant, &c.ant) && is_sub_multiset(&a.suc, &c.suc) {
        Ok(())
    } else {
        Err(StepError::RuleShape(
            "weakening: premise is not a sub-multiset of the conclusion".into(),
        ))
    }
}

fn rule_contraction(a: &Sequent, c: &Sequent) -> Result<(), StepError> {
    let same_support = |x: &[ModalFormula], y: &[ModalFormula]| {
        let sx: BTreeSet<_> = x.iter().collect();
        let sy: BTreeSet<_> = y.iter().collect();
        sx == sy
    };
    if is_sub_multiset(&c.ant, &a.ant)
        && is_sub_multiset(&c.suc, &a.suc)
        && same_support(&a.ant, &c.ant)
        && same_support(&a.suc, &c.suc)
    {
        Ok(())
    } else {
        Err(StepError::RuleShape(
            "contraction: conclusion must merge duplicate members only".into(),
        ))
    }
}

fn rule_necessitation(
    script: &ProofScript,
    premise_norm: &Sequent,
    step: &ProofStep,
    var: &str,
    strength: Strength,
    relativizer: Option<&str>,
    system: Option<&str>,
) -> Result<(), StepError> {
    let c = &step.conclusion;
    if !c.ant.is_empty() || c.suc.len() != 1 {
        return Err(StepError::RuleShape(
            "necessitation concludes a single boxed formula".into(),
        ));
    }
    let b = c.suc[0]
        .as_box()
        .ok_or_else(|| StepError::RuleShape("necessitation conclusion is not a box".into()))?;
    if b.strength != strength
        || b.relativizer.as_deref() != relativizer
        || b.system.as_deref() != system
    {
        return Err(StepError::RuleShape(
            "box decorations differ from the declared necessitation".into(),
        ));
    }
    if b.index != crate::index::IndexTerm::Var(var.to_string()) {
        return Err(StepError::RuleShape(format!(
            "necessitation index must be exactly the fresh variable `{var}`"
        )));
    }
    if let Some(p) = relativizer {
        if script.atoms.get(p) != Some(&true) {
            return Err(StepError::SideCondition(format!(
                "relativizer `{p}` must be declared with the Π-universal class"
            )));
        }
    }
    if let Some(s) = system {
        if !script.systems.contains(s) {
            return Err(StepError::SideCondition(format!("undeclared system `{s}`")));
        }
    }
    let body = b.body.normalize(&script.witness)?;
    if body != *premise_norm {
        return Err(StepError::RuleShape(
            "boxed body differs from the premise".into(),
        ));
    }
    Ok(())
}

fn rule_transfer(
    script: &ProofScript,
    premise_norm: &Sequent,
    step: &ProofStep,
    system: &str,
    var: &str,
) -> Result<(), StepError> {
    if !premise_norm.ant.is_empty() {
        return Err(StepError::RuleShape(
            "simulation transfer wants an empty antecedent".into(),
        ));
    }
    let c = &step.conclusion;
    if !c.ant.is_empty() || c.suc.len() != premise_norm.suc.len() {
        return Err(StepError::RuleShape(
            "transfer must preserve the succedent shape".into(),
        ));
    }
    // rebuild the expected conclusion from the premise: outer boxes move to
    // the target system with the fresh index variable
    let mut expected = Vec::new();
    for f in &premise_norm.suc {
        let b = f.as_box().ok_or_else(|| {
            StepError::RuleShape("transfer premise members must be boxes".into())
        })?;
        if b.strength != Strength::BlackTriangle || b.system.is_some() {
            return Err(StepError::RuleShape(
                "transfer premise members must be base-system algorithmic boxes".into(),
            ));
        }
        let mut nb = b.clone();
        nb.system = Some(system.to_string());
        nb.index = crate::index::IndexTerm::Var(var.to_string());
        expected.push(ModalFormula::boxed(nb));
    }
    let expected = Sequent::new(vec![], expected).normalize(&script.witness)?;
    let got = c.normalize(&script.witness)?;
    if expected != got {
        return Err(StepError::RuleShape(
            "transfer conclusion differs from the premise over the target system".into(),
        ));
    }
    Ok(())
}

pub use schemes::{match_hypothesis, match_initial};

#[cfg(test)]
mod tests {
    use super::*;

    fn check(text: &str) -> CheckReport {
        let script = parse_script(text).expect("script should parse");
        check_script(&script)
    }

    fn assert_ok(text: &str) -> CheckReport {
        let r = check(text);
        assert!(r.is_ok(), "expected ok, got {:?}", r.status);
        r
    }

    fn assert_fails_at(text: &str, step: usize) {
        let r = check(text);
        match r.status {
            CheckStatus::Failed { step: k, .. } => assert_eq!(k, step, "wrong failing step"),
            CheckStatus::Ok => panic!("expected failure at step {step}, got ok"),
        }
    }

    #[test]
    fn identity_script() {
        let r = assert_ok(
            "atom p\n\
             goal p |- p\n\
             1. p |- p ; init Identity\n",
        );
        assert!(r.hypotheses.is_empty());
    }

    #[test]
    fn ax4_and_mutation() {
        let ok = "atom p\natom q\nindex i = 2\n\
             goal ^i[ p => q ] |- ^i+1[ => ^i[ p => q ] ]\n\
             1. ^i[ p => q ] |- ^i+1[ => ^i[ p => q ] ] ; init Ax4\n";
        assert_ok(ok);
        // off-by-one index
        let bad = ok.replace("^i+1[", "^i+2[");
        assert_fails_at(&bad, 1);
    }

    #[test]
    fn axk_multi_form() {
        assert_ok(
            "atom p\natom q\natom r\nindex j = 2\n\
             goal ^j[ p, q => r ], ^j[ => p ], ^j[ => q ] |- ^j+1[ => r ]\n\
             1. ^j[ p, q => r ], ^j[ => p ], ^j[ => q ] |- ^j+1[ => r ] ; init AxK\n",
        );
    }

    #[test]
    fn axt_rejects_relativized() {
        assert_fails_at(
            "atom p pi\natom q\nindex i = 1\n\
             goal ^i[ => q ]{p} |- q\n\
             1. ^i[ => q ]{p} |- q ; init AxT\n",
            1,
        );
    }

    #[test]
    fn weak_tp_accepts_the_relativized_reflection() {
        assert_ok(
            "atom p pi\natom q\nindex i = 1\nexists l = 2\n\
             goal |- #l[ ^i[ => q ]{p} => q ]{p}\n\
             1. |- #l[ ^i[ => q ]{p} => q ]{p} ; init WeakTp\n",
        );
    }

    #[test]
    fn cut_and_taut() {
        assert_ok(
            "atom a\natom b\nindex i = 1\n\
             goal ^i[ => a ] |- ^i[ => a ] \\/ ^i[ => b ]\n\
             1. ^i[ => a ] |- ^i[ => a ] \\/ ^i[ => b ] ; taut\n",
        );
    }

    #[test]
    fn taut_rejects_distinct_boxes() {
        assert_fails_at(
            "atom p\nindex i = 1\nindex k = 2\n\
             goal |- ^i[ => p ] \\/ ~^k[ => p ]\n\
             1. |- ^i[ => p ] \\/ ~^k[ => p ] ; taut\n",
            1,
        );
    }

    #[test]
    fn necessitation_and_freshness() {
        let ok = "atom p\nindex i = 1\nexists j = 5\n\
             goal |- #j[ ^i[ => p ] => ^i[ => p ] ]\n\
             1. ^i[ => p ] |- ^i[ => p ] ; init Identity\n\
             2. |- #j[ ^i[ => p ] => ^i[ => p ] ] ; nec j btri 1\n";
        let r = assert_ok(ok);
        assert!(r.hypotheses.is_empty());
        // j appears in an earlier step without having been introduced by a
        // scheme -> freshness error
        let bad = "atom p\nexists j = 5\n\
             goal |- #j[ => ^j[ => p ] \\/ ~^j[ => p ] ]\n\
             1. |- ^j[ => p ] \\/ ~^j[ => p ] ; taut\n\
             2. |- #j[ => ^j[ => p ] \\/ ~^j[ => p ] ] ; nec j btri 1\n";
        assert_fails_at(bad, 2);
    }

    #[test]
    fn hypothesis_ledger_propagates_through_nec() {
        let r = assert_ok(
            "atom a\natom b\nindex i = 1\nexists j = 3\nexists m = 9\n\
             goal |- #m[ => #j[ ^i[ => a ] => ^i[ => b ] ], #j[ ^i[ => b ] => ^i[ => a ] ] ]\n\
             1. |- #j[ ^i[ => a ] => ^i[ => b ] ], #j[ ^i[ => b ] => ^i[ => a ] ] ; hyp AlgDot3\n\
             2. |- #m[ => #j[ ^i[ => a ] => ^i[ => b ] ], #j[ ^i[ => b ] => ^i[ => a ] ] ] ; nec m btri 1\n",
        );
        assert_eq!(
            r.hypotheses.iter().cloned().collect::<Vec<_>>(),
            vec!["AlgDot3".to_string()]
        );
    }

    #[test]
    fn witness_shift_keeps_acceptance() {
        let text = "atom p\natom q\nindex i = 2\n\
             goal ^i[ p => q ] |- ^i+1[ => ^i[ p => q ] ]\n\
             1. ^i[ p => q ] |- ^i+1[ => ^i[ p => q ] ] ; init Ax4\n";
        let script = parse_script(text).unwrap();
        assert!(check_script(&script).is_ok());
        assert!(check_script(&script.shifted(1)).is_ok());
        assert!(check_script(&script.shifted(5)).is_ok());
    }

    #[test]
    fn swap_right_moves_and_negates() {
        assert_ok(
            "atom a\natom b\nindex k = 3\nindex i = 1\n\
             goal ^k[ => ~^i[ => a ], ~^i[ => b ] ] |- ^k[ ^i[ => b ] => ~^i[ => a ] ]\n\
             1. ^k[ => ~^i[ => a ], ~^i[ => b ] ] |- ^k[ ^i[ => b ] => ~^i[ => a ] ] ; init SwapRight\n",
        );
    }

    #[test]
    fn or_left_requires_box_components() {
        assert_fails_at(
            "atom a\natom b\n\
             goal a \\/ b |- a, b\n\
             1. a |- a, b ; weak 0\n",
            1,
        );
        // well-formed use on boxes
        assert_ok(
            "atom a\natom b\nindex i = 1\n\
             goal ^i[ => a ] \\/ ^i[ => a ] |- ^i[ => a ]\n\
             1. ^i[ => a ] |- ^i[ => a ] ; init Identity\n\
             2. ^i[ => a ] \\/ ^i[ => a ] |- ^i[ => a ] ; orl 1 1\n",
        );
    }

    #[test]
    fn premise_and_unify() {
        assert_ok(
            "atom a\nindex i = 1\nindex i2 = 1\n\
             premise |- ^i[ => a ]\n\
             goal |- ^i2[ => a ]\n\
             1. |- ^i[ => a ] ; hyp Premise 1\n\
             2. |- ^i2[ => a ] ; unify 1 i := i2\n",
        );
    }

    #[test]
    fn transfer_needs_simulation() {
        let base = "atom f\natom g\nsystem S\nindex i = 1\nexists m = 4\nexists p2 = 9\n\
             goal |- #p2[ ^i[ => f ]@S => ^i[ => g ]@S ]@S\n\
             1. ^i[ => f ]@S |- ^i[ => f ]@S ; init Identity\n\
             2. |- #m[ ^i[ => f ]@S => ^i[ => g ]@S ] ; weak 3\n";
        // (not a real proof; just check the missing-hypothesis path)
        let text = format!(
            "{}3. |- #p2[ ^i[ => f ]@S => ^i[ => g ]@S ]@S ; transfer 2 S p2\n",
            base.replace("2. |- #m[ ^i[ => f ]@S => ^i[ => g ]@S ] ; weak 3\n",
                "")
        );
        let r = check(&text);
        assert!(!r.is_ok());
    }

    #[test]
    fn subst_plain_atom() {
        assert_ok(
            "atom a\natom b\nindex i = 1\n\
             goal ^i[ => b ] |- ^i[ => b ]\n\
             1. ^i[ => a ] |- ^i[ => a ] ; init Identity\n\
             2. ^i[ => b ] |- ^i[ => b ] ; subst 1 a := b\n",
        );
    }

    #[test]
    fn subst_relativizer_folds() {
        assert_ok(
            "atom a\natom p pi\nindex i = 1\nindex k = 3\n\
             goal ^k[ ~^i[ => a ], a => a ] |- ^k[ ~^i[ => a ], a => a ]\n\
             1. ^k[ a => a ]{p} |- ^k[ a => a ]{p} ; init Identity\n\
             2. ^k[ ~^i[ => a ], a => a ] |- ^k[ ~^i[ => a ], a => a ] ; subst 1 p := ~^i[ => a ]\n",
        );
    }

    #[test]
    fn box_cut_scheme() {
        assert_ok(
            "atom a\natom b\natom c\nindex i = 2\nindex j = 3\n\
             goal #i[ a => b ], #j[ b => c ] |- #j+1[ a => c ]\n\
             1. #i[ a => b ], #j[ b => c ] |- #j+1[ a => c ] ; init BoxCut\n",
        );
    }

    #[test]
    fn body_conseq_scheme() {
        assert_ok(
            "atom a\natom b\nindex i = 1\nindex j = 2\nindex k = 5\n\
             goal #k[ => ~(^i[ => a ] /\\ ^j[ => b ]) \\/ ^i[ => a ] ] |- #k[ ^i[ => a ] /\\ ^j[ => b ] => ^i[ => a ] ]\n\
             1. #k[ => ~(^i[ => a ] /\\ ^j[ => b ]) \\/ ^i[ => a ] ] |- #k[ ^i[ => a ] /\\ ^j[ => b ] => ^i[ => a ] ] ; init BodyConseq\n",
        );
    }

    #[test]
    fn goal_mismatch_is_reported() {
        assert_fails_at(
            "atom p\natom q\n\
             goal p |- q\n\
             1. p |- p ; init Identity\n",
            1,
        );
    }
}
