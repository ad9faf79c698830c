//! Oblivious nondeterministic machines compiled to satisfiability instances,
//! plus a brute-force simulation oracle and the separator/selector
//! experiments over ranges of input lengths.
//!
//! Machines are two-tape: a read-only input tape holding the unary input
//! `1^n` followed by `p(n)` free witness bits (zeros beyond), and a work
//! tape. Head positions come from declared schedules, never from
//! transitions, so obliviousness holds by construction. A machine that runs
//! out of applicable transitions is stuck and rejects on that branch.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::error::ParseError;
use crate::par::maybe_par_map;
use crate::sat::{sat_solve, Atom, PropFormula, SatError};

pub mod parse;

pub use parse::parse_machine;

/// Coefficient-list polynomial: `Poly(vec![c0, c1, c2])` is c0 + c1·n + c2·n².
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly(pub Vec<u64>);

impl Poly {
    pub fn eval(&self, n: u64) -> u64 {
        self.0.iter().rev().fold(0u64, |acc, &c| acc * n + c)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Schedule {
    /// cell t at step t
    Linear,
    Const(u64),
    /// triangle wave over cells 0..=width; width 3 has period 6
    Zigzag(u64),
    /// explicit table, cycled
    Table(Vec<u64>),
}

impl Schedule {
    pub fn at(&self, t: u64) -> u64 {
        match self {
            Schedule::Linear => t,
            Schedule::Const(k) => *k,
            Schedule::Zigzag(w) => {
                if *w == 0 {
                    return 0;
                }
                let r = t % (2 * w);
                if r <= *w {
                    r
                } else {
                    2 * w - r
                }
            }
            Schedule::Table(v) => v[(t as usize) % v.len()],
        }
    }
}

/// Most recent step j < i with the head on the same work cell as at step i.
/// `None` means first visit: the cell still holds blank.
pub fn pred_index(sched: &Schedule, i: u64) -> Option<u64> {
    let pos = sched.at(i);
    (0..i).rev().find(|&j| sched.at(j) == pos)
}

/// One quintuple: in `state`, reading input bit `input` and work symbol
/// `work`, the machine may write `write` and move to `next`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Transition {
    pub state: usize,
    pub input: bool,
    pub work: usize,
    pub next: usize,
    pub write: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MachineSpec {
    pub states: Vec<String>,
    pub initial: usize,
    pub accepting: BTreeSet<usize>,
    /// work-tape alphabet; the input tape is binary
    pub alphabet: Vec<String>,
    pub blank: usize,
    pub transitions: Vec<Transition>,
    pub input_schedule: Schedule,
    pub work_schedule: Schedule,
    /// time bound q: the machine makes q(n) steps
    pub time: Poly,
    /// witness bound p: witness bits sit at input positions n..n+p(n)
    pub witness: Poly,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TmError {
    #[error("atom budget exceeded: need {need}, limit {limit}")]
    BudgetExceeded { need: u64, limit: u64 },
    #[error("empty schedule table")]
    ScheduleGap,
    #[error("languages overlap at n = {0}")]
    DisjointnessViolation(u64),
    #[error("neither machine accepts n = {0}")]
    CoveringViolation(u64),
    #[error(transparent)]
    Sat(#[from] SatError),
}

#[derive(Debug, Clone, Copy)]
pub struct Budget {
    pub max_atoms: u64,
    pub sat_steps: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_atoms: 500_000,
            sat_steps: 20_000_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CompiledFormula {
    pub formula: PropFormula,
    pub namespace: String,
    pub n: u64,
    pub steps: u64,
    pub witness_atoms: Vec<Atom>,
}

/// Compile acceptance of the length-n unary input into a propositional
/// formula, satisfiable iff some witness drives the machine into an
/// accepting state.
///
/// The formula is the conjunction of: per-step one-hot snapshot blocks
/// (input bit read, work symbol read, state); agreement of the input
/// component with the tape (positions below n are inlined as the constant
/// true, witness positions are free atoms, the rest false); agreement of the
/// work component with the transition taken at the previous visit of the
/// same cell (blank on first visit); the state recurrence; and acceptance at
/// the final step.
pub fn compile(
    spec: &MachineSpec,
    n: u64,
    namespace: &str,
    budget: &Budget,
) -> Result<CompiledFormula, TmError> {
    let t_max = spec.time.eval(n);
    let p_n = spec.witness.eval(n);
    let na = spec.alphabet.len();
    let ns = spec.states.len();
    let block = (2 * na * ns) as u64;
    let need = (t_max + 1) * block + p_n;
    if need > budget.max_atoms {
        return Err(TmError::BudgetExceeded {
            need,
            limit: budget.max_atoms,
        });
    }
    let in_set = format!("{namespace}in");
    let tag = format!("{namespace}z");
    let bit = |a: usize, b: usize, s: usize| ((a * na + b) * ns + s) as u32;
    let zat = |t: u64, a: usize, b: usize, s: usize| {
        PropFormula::atom(Atom::Snapshot {
            tag: tag.clone(),
            step: t,
            bit: bit(a, b, s),
        })
    };
    // input tape literal at a position: unary prefix, witness window, zeros
    let input_lit = |pos: u64| {
        if pos < n {
            PropFormula::True
        } else if pos < n + p_n {
            PropFormula::atom(Atom::Set(in_set.clone(), pos))
        } else {
            PropFormula::False
        }
    };
    let values: Vec<(usize, usize, usize)> = (0..2)
        .flat_map(|a| (0..na).flat_map(move |b| (0..ns).map(move |s| (a, b, s))))
        .collect();
    let mut parts: Vec<PropFormula> = Vec::new();
    for t in 0..=t_max {
        // exactly one snapshot value per step
        parts.push(PropFormula::or(
            values.iter().map(|&(a, b, s)| zat(t, a, b, s)).collect(),
        ));
        for (i, &(a, b, s)) in values.iter().enumerate() {
            for &(a2, b2, s2) in &values[i + 1..] {
                parts.push(PropFormula::or(vec![
                    PropFormula::not(zat(t, a, b, s)),
                    PropFormula::not(zat(t, a2, b2, s2)),
                ]));
            }
        }
        // input component agrees with the tape at the scheduled position
        match input_lit(spec.input_schedule.at(t)) {
            PropFormula::True => {
                for b in 0..na {
                    for s in 0..ns {
                        parts.push(PropFormula::not(zat(t, 0, b, s)));
                    }
                }
            }
            PropFormula::False => {
                for b in 0..na {
                    for s in 0..ns {
                        parts.push(PropFormula::not(zat(t, 1, b, s)));
                    }
                }
            }
            u => {
                for b in 0..na {
                    for s in 0..ns {
                        parts.push(PropFormula::or(vec![
                            PropFormula::not(zat(t, 1, b, s)),
                            u.clone(),
                        ]));
                        parts.push(PropFormula::or(vec![
                            PropFormula::not(zat(t, 0, b, s)),
                            PropFormula::not(u.clone()),
                        ]));
                    }
                }
            }
        }
        // work component: blank on first visit, otherwise the write of the
        // transition taken at the previous visit (each write is read at most
        // once, at the next visit, so a plain disjunction is exact)
        match pred_index(&spec.work_schedule, t) {
            None => {
                for b in (0..na).filter(|&b| b != spec.blank) {
                    for a in 0..2 {
                        for s in 0..ns {
                            parts.push(PropFormula::not(zat(t, a, b, s)));
                        }
                    }
                }
            }
            Some(j) => {
                for beta in 0..na {
                    let reads: Vec<PropFormula> = (0..2)
                        .flat_map(|a| (0..ns).map(move |s| (a, s)))
                        .map(|(a, s)| zat(t, a, beta, s))
                        .collect();
                    let wrote: Vec<PropFormula> = spec
                        .transitions
                        .iter()
                        .filter(|k| k.write == beta)
                        .map(|k| {
                            PropFormula::and(vec![
                                zat(j, k.input as usize, k.work, k.state),
                                PropFormula::or(
                                    (0..2)
                                        .flat_map(|a| (0..na).map(move |b| (a, b)))
                                        .map(|(a, b)| zat(j + 1, a, b, k.next))
                                        .collect(),
                                ),
                            ])
                        })
                        .collect();
                    parts.push(PropFormula::implies(
                        PropFormula::or(reads),
                        PropFormula::or(wrote),
                    ));
                }
            }
        }
        // state component: initial at step 0, else reached by a transition
        if t == 0 {
            for s in (0..ns).filter(|&s| s != spec.initial) {
                for a in 0..2 {
                    for b in 0..na {
                        parts.push(PropFormula::not(zat(0, a, b, s)));
                    }
                }
            }
        } else {
            for sigma in 0..ns {
                let now: Vec<PropFormula> = (0..2)
                    .flat_map(|a| (0..na).map(move |b| (a, b)))
                    .map(|(a, b)| zat(t, a, b, sigma))
                    .collect();
                let from: Vec<PropFormula> = spec
                    .transitions
                    .iter()
                    .filter(|k| k.next == sigma)
                    .map(|k| zat(t - 1, k.input as usize, k.work, k.state))
                    .collect();
                parts.push(PropFormula::implies(
                    PropFormula::or(now),
                    PropFormula::or(from),
                ));
            }
        }
    }
    parts.push(PropFormula::or(
        values
            .iter()
            .filter(|&&(_, _, s)| spec.accepting.contains(&s))
            .map(|&(a, b, s)| zat(t_max, a, b, s))
            .collect(),
    ));
    let witness_atoms = (n..n + p_n)
        .map(|pos| Atom::Set(in_set.clone(), pos))
        .collect();
    Ok(CompiledFormula {
        formula: PropFormula::and(parts),
        namespace: namespace.to_string(),
        n,
        steps: t_max,
        witness_atoms,
    })
}

pub fn decide_membership(spec: &MachineSpec, n: u64, budget: &Budget) -> Result<bool, TmError> {
    let c = compile(spec, n, "", budget)?;
    Ok(sat_solve(&c.formula, budget.sat_steps)?.is_some())
}

/// Brute-force oracle: enumerate every witness and every nondeterministic
/// branch. Exponential in p(n); only sensible for the desk-scale machines.
pub fn simulate(spec: &MachineSpec, n: u64) -> bool {
    let t_max = spec.time.eval(n);
    let p_n = spec.witness.eval(n);
    assert!(p_n < 24, "witness too long for brute-force enumeration");
    for w in 0..(1u64 << p_n) {
        let input =
            |pos: u64| pos < n || (pos >= n && pos < n + p_n && (w >> (pos - n)) & 1 == 1);
        let mut configs: BTreeSet<(usize, BTreeMap<u64, usize>)> =
            BTreeSet::from([(spec.initial, BTreeMap::new())]);
        for t in 0..t_max {
            let a = input(spec.input_schedule.at(t));
            let wp = spec.work_schedule.at(t);
            let mut next = BTreeSet::new();
            for (s, tape) in &configs {
                let b = *tape.get(&wp).unwrap_or(&spec.blank);
                for k in &spec.transitions {
                    if k.state == *s && k.input == a && k.work == b {
                        let mut t2 = tape.clone();
                        t2.insert(wp, k.write);
                        next.insert((k.next, t2));
                    }
                }
            }
            configs = next;
            if configs.is_empty() {
                break;
            }
        }
        if configs.iter().any(|(s, _)| spec.accepting.contains(s)) {
            return true;
        }
    }
    false
}

/// Compile both machines with distinct namespace prefixes; the results share
/// no atoms (unary input bits are inlined constants, never shared atoms).
pub fn compile_pair(
    a: &MachineSpec,
    b: &MachineSpec,
    n: u64,
    budget: &Budget,
) -> Result<(CompiledFormula, CompiledFormula), TmError> {
    Ok((compile(a, n, "a#", budget)?, compile(b, n, "b#", budget)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeparatorRow {
    pub n: u64,
    pub sat_a: bool,
    pub sat_b: bool,
    /// membership in the separating set C := { n : the A-formula is UNSAT }
    pub in_c: bool,
}

/// Tabulate the separator over lo..=hi. Requires the languages to be
/// disjoint on the range; the first overlap aborts the run.
pub fn separate(
    a: &MachineSpec,
    b: &MachineSpec,
    lo: u64,
    hi: u64,
    budget: &Budget,
) -> Result<Vec<SeparatorRow>, TmError> {
    let rows = maybe_par_map((lo..=hi).collect::<Vec<_>>(), |n| {
        let sat_a = decide_membership(a, n, budget)?;
        let sat_b = decide_membership(b, n, budget)?;
        if sat_a && sat_b {
            return Err(TmError::DisjointnessViolation(n));
        }
        Ok(SeparatorRow {
            n,
            sat_a,
            sat_b,
            in_c: !sat_a,
        })
    });
    rows.into_iter().collect()
}

/// Pick which of the two machines accepts n, preferring the first when both
/// do. The machines are assumed to cover every n; a gap is an error.
pub fn select(
    a: &MachineSpec,
    b: &MachineSpec,
    n: u64,
    budget: &Budget,
) -> Result<usize, TmError> {
    if decide_membership(a, n, budget)? {
        return Ok(1);
    }
    if decide_membership(b, n, budget)? {
        return Ok(2);
    }
    Err(TmError::CoveringViolation(n))
}

/// The machines shipped with the crate, parsed from their spec files.
pub fn bundled_machines() -> Result<Vec<(&'static str, MachineSpec)>, ParseError> {
    [
        ("always-accept", include_str!("../../machines/always-accept.tm")),
        ("always-reject", include_str!("../../machines/always-reject.tm")),
        ("parity", include_str!("../../machines/parity.tm")),
        ("mult2", include_str!("../../machines/mult2.tm")),
        ("nmod4ne0", include_str!("../../machines/nmod4ne0.tm")),
        ("odds", include_str!("../../machines/odds.tm")),
    ]
    .into_iter()
    .map(|(name, text)| Ok((name, parse_machine(text)?)))
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn machine(name: &str) -> MachineSpec {
        bundled_machines()
            .unwrap()
            .into_iter()
            .find(|(k, _)| *k == name)
            .unwrap()
            .1
    }

    #[test]
    fn pred_index_examples() {
        let t = Schedule::Table(vec![0, 1, 0, 1]);
        assert_eq!(pred_index(&t, 2), Some(0));
        assert_eq!(pred_index(&t, 1), None);
        let z = Schedule::Zigzag(3);
        // period 6: 0 1 2 3 2 1 0 1 2 3 ...
        assert_eq!(z.at(9), 3);
        assert_eq!(pred_index(&z, 9), Some(3));
    }

    #[test]
    fn always_accept_n1_is_satisfiable() {
        let m = machine("always-accept");
        assert!(decide_membership(&m, 1, &Budget::default()).unwrap());
    }

    #[test]
    fn parity_small_cases() {
        let m = machine("parity");
        assert!(decide_membership(&m, 4, &Budget::default()).unwrap());
        assert!(!decide_membership(&m, 3, &Budget::default()).unwrap());
        assert!(!decide_membership(&m, 5, &Budget::default()).unwrap());
    }

    #[test]
    fn sat_equals_simulation_on_small_inputs() {
        for (name, m) in bundled_machines().unwrap() {
            for n in 0..=8 {
                assert_eq!(
                    decide_membership(&m, n, &Budget::default()).unwrap(),
                    simulate(&m, n),
                    "{name}, n={n}"
                );
            }
        }
    }

    #[test]
    fn parity_atom_count_is_linear_in_steps() {
        let m = machine("parity");
        for n in [1u64, 8, 32] {
            let c = compile(&m, n, "", &Budget::default()).unwrap();
            let block = 2 * m.alphabet.len() * m.states.len();
            assert!(c.formula.atoms().len() as u64 <= 2 * (c.steps + 1) * block as u64);
        }
    }

    #[test]
    fn pair_atoms_are_disjoint() {
        let e = machine("parity");
        let o = machine("odds");
        let (ca, cb) = compile_pair(&e, &o, 6, &Budget::default()).unwrap();
        assert!(ca.formula.atoms().is_disjoint(&cb.formula.atoms()));
        // same spec twice: still disjoint by namespace prefix
        let (ca, cb) = compile_pair(&e, &e, 4, &Budget::default()).unwrap();
        assert!(ca.formula.atoms().is_disjoint(&cb.formula.atoms()));
    }

    #[test]
    fn disjoint_pair_gives_refutation_tautology() {
        let e = machine("parity");
        let o = machine("odds");
        for n in 0..=5 {
            let (ca, cb) = compile_pair(&e, &o, n, &Budget::default()).unwrap();
            let neg_or = PropFormula::or(vec![
                PropFormula::not(ca.formula),
                PropFormula::not(cb.formula),
            ]);
            assert!(
                crate::sat::is_tautology(&neg_or, Budget::default().sat_steps).unwrap(),
                "n={n}"
            );
        }
    }

    #[test]
    fn models_keep_snapshot_blocks_one_hot() {
        let m = machine("always-accept");
        let c = compile(&m, 2, "", &Budget::default()).unwrap();
        let model = sat_solve(&c.formula, Budget::default().sat_steps)
            .unwrap()
            .expect("satisfiable");
        for t in 0..=c.steps {
            let on = model
                .iter()
                .filter(|(a, v)| {
                    **v && matches!(a, Atom::Snapshot { step, .. } if *step == t)
                })
                .count();
            assert_eq!(on, 1, "step {t}");
        }
    }

    #[test]
    fn separator_on_parity_pair() {
        let e = machine("parity");
        let o = machine("odds");
        let rows = separate(&e, &o, 0, 12, &Budget::default()).unwrap();
        for r in rows {
            assert_eq!(r.sat_a, r.n % 2 == 0);
            assert_eq!(r.in_c, r.n % 2 == 1);
        }
    }

    #[test]
    fn separator_rejects_overlapping_pair() {
        let e = machine("parity");
        let aa = machine("always-accept");
        match separate(&e, &aa, 1, 4, &Budget::default()) {
            Err(TmError::DisjointnessViolation(n)) => assert_eq!(n, 2),
            other => panic!("expected overlap at 2, got {other:?}"),
        }
    }

    #[test]
    fn selector_on_covering_pair() {
        let m2 = machine("mult2");
        let m4 = machine("nmod4ne0");
        assert_eq!(select(&m2, &m4, 6, &Budget::default()).unwrap(), 1);
        assert_eq!(select(&m2, &m4, 3, &Budget::default()).unwrap(), 2);
        let rej = machine("always-reject");
        let e = machine("parity");
        match select(&e, &rej, 1, &Budget::default()) {
            Err(TmError::CoveringViolation(1)) => {}
            other => panic!("expected covering gap, got {other:?}"),
        }
    }

    #[test]
    fn budget_is_enforced() {
        let m = machine("parity");
        let tiny = Budget {
            max_atoms: 10,
            sat_steps: 1000,
        };
        assert!(matches!(
            compile(&m, 8, "", &tiny),
            Err(TmError::BudgetExceeded { .. })
        ));
    }
}
