//! Initial sequent schemes and hypothesis schemes.
//!
//! Matching works on normalized sequents: every index is a literal, every
//! sequent side is sorted. Index side-conditions therefore reduce to
//! arithmetic on concrete values, which the caller records in the constraint
//! trace.

use crate::formula::{BoxFormula, ModalFormula, Sequent, Strength};
use crate::index::IndexTerm;
use crate::sat::{self, PropFormula};

use super::{abstract_sequent, ProofScript, StepError, TAUT_ATOM_LIMIT};

fn mismatch(name: &str, why: impl Into<String>) -> StepError {
    StepError::SchemeMismatch(name.to_string(), why.into())
}

fn the_box<'a>(name: &str, f: &'a ModalFormula) -> Result<&'a BoxFormula, StepError> {
    f.as_box()
        .ok_or_else(|| mismatch(name, format!("`{f}` is not a box")))
}

/// Index value of a normalized box.
fn ival(b: &BoxFormula) -> u64 {
    match b.index {
        IndexTerm::Lit(n) => n,
        // unreachable on normalized input
        _ => u64::MAX,
    }
}

fn deco_eq(a: &BoxFormula, b: &BoxFormula) -> bool {
    a.system == b.system && a.relativizer == b.relativizer
}

fn one_each<'a>(
    name: &str,
    c: &'a Sequent,
) -> Result<(&'a ModalFormula, &'a ModalFormula), StepError> {
    if c.ant.len() == 1 && c.suc.len() == 1 {
        Ok((&c.ant[0], &c.suc[0]))
    } else {
        Err(mismatch(name, "expects one formula on each side"))
    }
}

/// On success returns the system of the principal box, if any; axioms about a
/// non-base system are only available when that system is declared normal.
pub fn match_initial(
    name: &str,
    c: &Sequent,
    script: &ProofScript,
    constraints: &mut Vec<String>,
    step_num: usize,
) -> Result<Option<String>, StepError> {
    let mut note = |s: String| constraints.push(format!("step {step_num} {name}: {s}"));
    match name {
        "Identity" => {
            let (a, s) = one_each(name, c)?;
            if a == s {
                Ok(None)
            } else {
                Err(mismatch(name, "sides differ"))
            }
        }
        "Ax4" => {
            let (a, s) = one_each(name, c)?;
            let x = the_box(name, a)?;
            let y = the_box(name, s)?;
            if x.strength != Strength::Triangle || y.strength != Strength::Triangle {
                return Err(mismatch(name, "both boxes must be plain provability"));
            }
            if !deco_eq(x, y) {
                return Err(mismatch(name, "system/relativizer must carry over"));
            }
            if y.body.ant.is_empty() && y.body.suc.len() == 1 && y.body.suc[0] == *a {
                if ival(y) == ival(x) + 1 {
                    note(format!("{} = {}+1", ival(y), ival(x)));
                    Ok(x.system.clone())
                } else {
                    Err(mismatch(name, "conclusion index must be premise index + 1"))
                }
            } else {
                Err(mismatch(name, "succedent box must assert the antecedent box"))
            }
        }
        "Ax4b" => {
            let (a, s) = one_each(name, c)?;
            let x = the_box(name, a)?;
            let y = the_box(name, s)?;
            if x.strength != Strength::BlackTriangle || y.strength != Strength::BlackTriangle {
                return Err(mismatch(name, "outer boxes must be algorithmic"));
            }
            if !deco_eq(x, y) {
                return Err(mismatch(name, "system/relativizer must carry over"));
            }
            if y.body.ant.is_empty() && y.body.suc.len() == 1 {
                let z = the_box(name, &y.body.suc[0])?;
                if z.strength == Strength::Triangle
                    && deco_eq(z, x)
                    && z.body == x.body
                    && ival(z) == ival(x)
                    && ival(y) == ival(x) + 1
                {
                    note(format!("{} = {}+1", ival(y), ival(x)));
                    return Ok(x.system.clone());
                }
            }
            Err(mismatch(name, "shape is box^i => box^{i+1} tri^i"))
        }
        "AxT" => {
            let (a, s) = one_each(name, c)?;
            let x = the_box(name, a)?;
            if x.strength != Strength::Triangle {
                return Err(mismatch(name, "reflection holds for plain provability only"));
            }
            if x.relativizer.is_some() {
                return Err(mismatch(
                    name,
                    "no relativized reflection exists; use the weak scheme instead",
                ));
            }
            if x.body.ant.is_empty() && x.body.suc.len() == 1 && x.body.suc[0] == *s {
                Ok(x.system.clone())
            } else {
                Err(mismatch(name, "succedent must be the boxed formula"))
            }
        }
        "AxK" => match_k(name, c, Strength::Triangle, &mut note),
        "AxKb" => match_k(name, c, Strength::BlackTriangle, &mut note),
        "SwapLeft" => {
            let (a, s) = one_each(name, c)?;
            let x = the_box(name, a)?;
            let y = the_box(name, s)?;
            if x.strength != y.strength || !deco_eq(x, y) || ival(x) != ival(y) {
                return Err(mismatch(name, "boxes must agree up to the moved formula"));
            }
            for f in &x.body.ant {
                let Ok(nf) = f.negate() else { continue };
                let mut ant = x.body.ant.clone();
                ant.retain({
                    let mut done = false;
                    move |g| {
                        if !done && g == f {
                            done = true;
                            false
                        } else {
                            true
                        }
                    }
                });
                let mut suc = x.body.suc.clone();
                suc.push(nf);
                suc.sort();
                if ant == y.body.ant && suc == y.body.suc {
                    return Ok(x.system.clone());
                }
            }
            Err(mismatch(name, "no antecedent member swaps to match"))
        }
        "SwapRight" => {
            let (a, s) = one_each(name, c)?;
            let x = the_box(name, a)?;
            let y = the_box(name, s)?;
            if x.strength != y.strength || !deco_eq(x, y) || ival(x) != ival(y) {
                return Err(mismatch(name, "boxes must agree up to the moved formula"));
            }
            for f in &x.body.suc {
                let Ok(nf) = f.negate() else { continue };
                let mut suc = x.body.suc.clone();
                suc.retain({
                    let mut done = false;
                    move |g| {
                        if !done && g == f {
                            done = true;
                            false
                        } else {
                            true
                        }
                    }
                });
                let mut ant = x.body.ant.clone();
                ant.push(nf);
                ant.sort();
                if ant == y.body.ant && suc == y.body.suc {
                    return Ok(x.system.clone());
                }
            }
            Err(mismatch(name, "no succedent member swaps to match"))
        }
        "WeakTp" => {
            if !c.ant.is_empty() || c.suc.len() != 1 {
                return Err(mismatch(name, "expects a single succedent box"));
            }
            let y = the_box(name, &c.suc[0])?;
            let p = y
                .relativizer
                .as_deref()
                .ok_or_else(|| mismatch(name, "outer box must be relativized"))?;
            if script.atoms.get(p) != Some(&true) {
                return Err(StepError::SideCondition(format!(
                    "relativizer `{p}` must be declared with the Π-universal class"
                )));
            }
            if y.strength != Strength::BlackTriangle {
                return Err(mismatch(name, "outer box must be algorithmic"));
            }
            if y.body.ant.len() != 1 || y.body.suc.len() != 1 {
                return Err(mismatch(name, "body must be a reflection implication"));
            }
            let z = the_box(name, &y.body.ant[0])?;
            let a = &y.body.suc[0];
            if z.strength == Strength::Triangle
                && z.relativizer.as_deref() == Some(p)
                && z.system == y.system
                && z.body.ant.is_empty()
                && z.body.suc.len() == 1
                && z.body.suc[0] == *a
                && ival(y) == ival(z) + 1
            {
                note(format!("{} = {}+1", ival(y), ival(z)));
                Ok(y.system.clone())
            } else {
                Err(mismatch(name, "body is not a relativized reflection"))
            }
        }
        "IndexMono" => {
            let (a, s) = one_each(name, c)?;
            let x = the_box(name, a)?;
            let y = the_box(name, s)?;
            if x.strength == y.strength && deco_eq(x, y) && x.body == y.body {
                if ival(y) >= ival(x) {
                    note(format!("{} >= {}", ival(y), ival(x)));
                    // length monotonicity holds for any proof system
                    Ok(None)
                } else {
                    Err(mismatch(name, "target index must not shrink"))
                }
            } else {
                Err(mismatch(name, "boxes must differ only in the index"))
            }
        }
        "Relax" => {
            let (a, s) = one_each(name, c)?;
            let x = the_box(name, a)?;
            let y = the_box(name, s)?;
            let p = y
                .relativizer
                .as_deref()
                .ok_or_else(|| mismatch(name, "target box must gain a relativizer"))?;
            if script.atoms.get(p) != Some(&true) {
                return Err(StepError::SideCondition(format!(
                    "relativizer `{p}` must be declared with the Π-universal class"
                )));
            }
            if x.relativizer.is_none()
                && x.strength == y.strength
                && x.system == y.system
                && x.body == y.body
                && ival(x) == ival(y)
            {
                Ok(x.system.clone())
            } else {
                Err(mismatch(name, "boxes must differ only in the relativizer"))
            }
        }
        "Forget" => {
            let (a, s) = one_each(name, c)?;
            let x = the_box(name, a)?;
            let y = the_box(name, s)?;
            if x.strength == Strength::BlackTriangle
                && y.strength == Strength::Triangle
                && deco_eq(x, y)
                && x.body == y.body
                && ival(x) == ival(y)
            {
                // dropping the algorithmic claim is sound in any system
                Ok(None)
            } else {
                Err(mismatch(name, "downgrades an algorithmic box only"))
            }
        }
        "BoxCut" => {
            if c.ant.len() != 2 || c.suc.len() != 1 {
                return Err(mismatch(name, "expects two boxes yielding one"));
            }
            let z = the_box(name, &c.suc[0])?;
            for (l, r) in [(0, 1), (1, 0)] {
                let x = the_box(name, &c.ant[l])?;
                let y = the_box(name, &c.ant[r])?;
                if x.strength != y.strength
                    || x.strength != z.strength
                    || !deco_eq(x, y)
                    || !deco_eq(x, z)
                {
                    continue;
                }
                if ival(z) != ival(x).max(ival(y)) + 1 {
                    continue;
                }
                for a in &x.body.suc {
                    let Some(y_ant) = super::minus_one(&y.body.ant, a) else {
                        continue;
                    };
                    let x_suc = super::minus_one(&x.body.suc, a).unwrap();
                    let ant = super::plus(&x.body.ant, &y_ant);
                    let suc = super::plus(&x_suc, &y.body.suc);
                    if ant == z.body.ant && suc == z.body.suc {
                        note(format!(
                            "{} = max({},{})+1",
                            ival(z),
                            ival(x),
                            ival(y)
                        ));
                        return Ok(z.system.clone());
                    }
                }
            }
            Err(mismatch(name, "no internal cut formula aligns"))
        }
        "BodyConseq" => {
            let (a, s) = one_each(name, c)?;
            let x = the_box(name, a)?;
            let y = the_box(name, s)?;
            if x.strength != y.strength || !deco_eq(x, y) {
                return Err(mismatch(name, "box decorations must agree"));
            }
            if ival(y) < ival(x) {
                return Err(mismatch(name, "target index must not shrink"));
            }
            let phi = PropFormula::implies(abstract_sequent(&x.body), abstract_sequent(&y.body));
            let n_atoms = phi.atoms().len();
            if n_atoms > TAUT_ATOM_LIMIT {
                return Err(StepError::AtomBudgetExceeded(n_atoms, TAUT_ATOM_LIMIT));
            }
            if sat::is_tautology(&phi, sat::DEFAULT_DECISION_BUDGET)? {
                note(format!("{} >= {}, body consequence", ival(y), ival(x)));
                Ok(y.system.clone())
            } else {
                Err(mismatch(
                    name,
                    "target body is not a propositional consequence of the source body",
                ))
            }
        }
        other => Err(StepError::UnknownScheme(other.to_string())),
    }
}

fn match_k(
    name: &str,
    c: &Sequent,
    st: Strength,
    note: &mut impl FnMut(String),
) -> Result<Option<String>, StepError> {
    if c.ant.is_empty() || c.suc.len() != 1 {
        return Err(mismatch(name, "expects boxes on the left, one box on the right"));
    }
    let z = the_box(name, &c.suc[0])?;
    if z.strength != st || !z.body.ant.is_empty() {
        return Err(mismatch(name, "conclusion box must have an empty body antecedent"));
    }
    let boxes: Vec<&BoxFormula> = c
        .ant
        .iter()
        .map(|f| the_box(name, f))
        .collect::<Result<_, _>>()?;
    if boxes
        .iter()
        .any(|b| b.strength != st || !deco_eq(b, z))
    {
        return Err(mismatch(name, "all boxes must share strength, system and relativizer"));
    }
    let max_ix = boxes.iter().map(|b| ival(b)).max().unwrap();
    if ival(z) != max_ix + 1 {
        return Err(mismatch(name, "conclusion index must be max of premises + 1"));
    }
    // pick the main box; the rest must assert exactly its body antecedent
    'main: for (mi, m) in boxes.iter().enumerate() {
        if m.body.suc != z.body.suc {
            continue;
        }
        let mut need = m.body.ant.clone();
        for (ai, arg) in boxes.iter().enumerate() {
            if ai == mi {
                continue;
            }
            if arg.body.ant.is_empty() && arg.body.suc.len() == 1 {
                let mut found = false;
                if let Some(ix) = need.iter().position(|g| *g == arg.body.suc[0]) {
                    need.remove(ix);
                    found = true;
                }
                if !found {
                    continue 'main;
                }
            } else {
                continue 'main;
            }
        }
        if need.is_empty() {
            note(format!("{} = max(...)+1 over {} boxes", ival(z), boxes.len()));
            return Ok(z.system.clone());
        }
    }
    Err(mismatch(
        name,
        "argument boxes do not discharge the main box's antecedent",
    ))
}

// --- hypothesis schemes -----------------------------------------------------

/// Match a hypothesis scheme instance; returns the ledger entry name
/// (`Name` or `Name@System`).
pub fn match_hypothesis(
    name: &str,
    c: &Sequent,
    script: &ProofScript,
) -> Result<String, StepError> {
    match name {
        "Dot2" => match_dot2(name, c, script, Strength::Triangle),
        "AlgDot2" => match_dot2(name, c, script, Strength::BlackTriangle),
        "Dot3" => match_dot3(name, c, script, Strength::Triangle),
        "AlgDot3" => match_dot3(name, c, script, Strength::BlackTriangle),
        "Lemma19Disj" => match_lemma19(name, c, script, Strength::Triangle),
        "Lemma19Interp" => match_lemma19(name, c, script, Strength::BlackTriangle),
        "Prop28Persistence" => match_persistence(name, c, script),
        other => Err(StepError::UnknownScheme(other.to_string())),
    }
}

fn ledger_name(name: &str, sys: &Option<String>) -> String {
    match sys {
        Some(s) => format!("{name}@{s}"),
        None => name.to_string(),
    }
}

fn check_system(script: &ProofScript, sys: &Option<String>) -> Result<(), StepError> {
    if let Some(s) = sys {
        if !script.systems.contains(s) {
            return Err(StepError::SideCondition(format!("undeclared system `{s}`")));
        }
    }
    Ok(())
}

fn pair<'a>(name: &str, c: &'a Sequent) -> Result<(&'a BoxFormula, &'a BoxFormula), StepError> {
    if !c.ant.is_empty() || c.suc.len() != 2 {
        return Err(mismatch(name, "expects exactly two succedent boxes"));
    }
    Ok((the_box(name, &c.suc[0])?, the_box(name, &c.suc[1])?))
}

fn match_dot2(
    name: &str,
    c: &Sequent,
    script: &ProofScript,
    st: Strength,
) -> Result<String, StepError> {
    let (b1, b2) = pair(name, c)?;
    if b1.strength != st || b2.strength != st {
        return Err(mismatch(name, "outer strength is wrong"));
    }
    if b1.system != b2.system || b1.relativizer.is_some() || b2.relativizer.is_some() {
        return Err(mismatch(name, "outer boxes must share a system, unrelativized"));
    }
    check_system(script, &b1.system)?;
    if ival(b1) != ival(b2) {
        return Err(mismatch(name, "outer indices must agree"));
    }
    let inner = |b: &BoxFormula| -> Result<(BoxFormula, ModalFormula), StepError> {
        if b.body.ant.is_empty() && b.body.suc.len() == 1 {
            if let ModalFormula::Not(g) = &b.body.suc[0] {
                let ib = the_box(name, g)?;
                if ib.strength == Strength::Triangle
                    && ib.system == b.system
                    && ib.relativizer.is_none()
                    && ib.body.ant.is_empty()
                    && ib.body.suc.len() == 1
                {
                    return Ok((ib.clone(), ib.body.suc[0].clone()));
                }
            }
        }
        Err(mismatch(name, "body must refute one provability box"))
    };
    let (i1, c1) = inner(b1)?;
    let (i2, c2) = inner(b2)?;
    if ival(&i1) != ival(&i2) {
        return Err(mismatch(name, "inner indices must agree"));
    }
    let neg_match = c1.negate().map(|n| n == c2).unwrap_or(false)
        || c2.negate().map(|n| n == c1).unwrap_or(false);
    if !neg_match {
        return Err(mismatch(name, "inner formulas must be a negation pair"));
    }
    Ok(ledger_name(name, &b1.system))
}

fn match_dot3(
    name: &str,
    c: &Sequent,
    script: &ProofScript,
    st: Strength,
) -> Result<String, StepError> {
    let (b1, b2) = pair(name, c)?;
    if b1.strength != st || b2.strength != st {
        return Err(mismatch(name, "outer strength is wrong"));
    }
    if b1.system != b2.system || b1.relativizer.is_some() || b2.relativizer.is_some() {
        return Err(mismatch(name, "outer boxes must share a system, unrelativized"));
    }
    check_system(script, &b1.system)?;
    if ival(b1) != ival(b2) {
        return Err(mismatch(name, "outer indices must agree"));
    }
    let sides = |b: &BoxFormula| -> Result<(ModalFormula, ModalFormula), StepError> {
        if b.body.ant.len() == 1 && b.body.suc.len() == 1 {
            Ok((b.body.ant[0].clone(), b.body.suc[0].clone()))
        } else {
            Err(mismatch(name, "body must be a single implication"))
        }
    };
    let (x1, y1) = sides(b1)?;
    let (x2, y2) = sides(b2)?;
    if !(x1 == y2 && y1 == x2) {
        return Err(mismatch(name, "the two bodies must be converse implications"));
    }
    for f in [&x1, &y1] {
        let ib = the_box(name, f)?;
        if ib.strength != Strength::Triangle
            || ib.system != b1.system
            || ib.relativizer.is_some()
        {
            return Err(mismatch(name, "implication sides must be plain provability boxes"));
        }
    }
    let (ia, ib) = (the_box(name, &x1)?, the_box(name, &y1)?);
    if ival(ia) != ival(ib) {
        return Err(mismatch(name, "inner indices must agree"));
    }
    Ok(ledger_name(name, &b1.system))
}

fn match_lemma19(
    name: &str,
    c: &Sequent,
    script: &ProofScript,
    st: Strength,
) -> Result<String, StepError> {
    let (u, v) = pair(name, c)?;
    for (b1, b2) in [(u, v), (v, u)] {
        if b1.strength != st || b2.strength != st {
            continue;
        }
        if b1.system.is_some() || b2.system.is_some() {
            continue;
        }
        let (Some(p1), Some(p2)) = (&b1.relativizer, &b2.relativizer) else {
            continue;
        };
        if p1 != p2 || script.atoms.get(p1.as_str()) != Some(&true) {
            continue;
        }
        if ival(b1) != ival(b2) {
            continue;
        }
        // b1: ¬A with A a plain box; b2: ¬(tri_p^k ¬A)
        let refuted = |b: &BoxFormula| -> Option<ModalFormula> {
            if b.body.ant.is_empty() && b.body.suc.len() == 1 {
                if let ModalFormula::Not(g) = &b.body.suc[0] {
                    return Some((**g).clone());
                }
            }
            None
        };
        let Some(a) = refuted(b1) else { continue };
        let Some(mid) = refuted(b2) else { continue };
        let Some(abox) = a.as_box() else { continue };
        if abox.strength != Strength::Triangle
            || abox.system.is_some()
            || abox.relativizer.is_some()
        {
            continue;
        }
        let Some(mbox) = mid.as_box() else { continue };
        if mbox.strength != Strength::Triangle
            || mbox.system.is_some()
            || mbox.relativizer.as_deref() != Some(p1.as_str())
        {
            continue;
        }
        if mbox.body.ant.is_empty()
            && mbox.body.suc.len() == 1
            && matches!(&mbox.body.suc[0], ModalFormula::Not(g) if **g == a)
        {
            return Ok(name.to_string());
        }
    }
    Err(mismatch(
        name,
        "shape is => box_p^j ¬A, box_p^j ¬(tri_p^k ¬A) with A a plain box",
    ))
}

fn match_persistence(
    name: &str,
    c: &Sequent,
    script: &ProofScript,
) -> Result<String, StepError> {
    let (a, s) = one_each(name, c)?;
    let x = the_box(name, a)?;
    let y = the_box(name, s)?;
    let Some(sys) = &x.system else {
        return Err(mismatch(name, "persistence is about another system's boxes"));
    };
    if !script.systems.contains(sys) {
        return Err(StepError::SideCondition(format!("undeclared system `{sys}`")));
    }
    if x.strength != Strength::Triangle || x.relativizer.is_some() {
        return Err(mismatch(name, "persisted box must be plain provability"));
    }
    if y.strength == Strength::Triangle
        && y.system.is_none()
        && y.relativizer.is_none()
        && y.body.ant.is_empty()
        && y.body.suc.len() == 1
        && y.body.suc[0] == *a
    {
        Ok(name.to_string())
    } else {
        Err(mismatch(name, "conclusion must assert the premise box in the base system"))
    }
}
