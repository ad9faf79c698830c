//! End-to-end acceptance checks, one test per criterion. Each prints a
//! single pass line; a failure panics with the criterion named.

use std::collections::BTreeSet;
use std::time::Instant;

use polyprov::bounded::{translate_formula, BoundedFormula, NumEnv, NumTerm, TRANSLATION_VAR};
use polyprov::bounded::numeral;
use polyprov::corpus::{load_corpus, mutations, run_corpus, run_mutations};
use polyprov::formula::{ModalFormula, Sequent};
use polyprov::kernel::{abstract_sequent, apply_proptaut, check_script, parse_script, StepError};
use polyprov::sat::Assignment;
use polyprov::tm::{
    bundled_machines, compile, compile_pair, decide_membership, select, separate, simulate,
    Budget, TmError,
};

fn xorshift(seed: u64) -> impl FnMut() -> u64 {
    let mut s = seed;
    move || {
        s ^= s << 13;
        s ^= s >> 7;
        s ^= s << 17;
        s
    }
}

#[test]
fn criterion_1_corpus_completeness() {
    let start = Instant::now();
    let entries = load_corpus();
    assert_eq!(entries.len(), 8, "corpus entry count");
    let summary = run_corpus(&entries);
    for r in &summary.results {
        assert!(r.ok, "{}{}: {}", r.id, r.label, r.detail);
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 10, "corpus took {elapsed:?}");
    println!("criterion 1 (corpus completeness): pass ({elapsed:?})");
}

#[test]
fn criterion_2_mutation_sensitivity() {
    let muts = mutations();
    assert!(muts.len() >= 20, "only {} mutations", muts.len());
    let outcomes = run_mutations(&muts);
    for o in &outcomes {
        assert!(o.ok, "{} / {}: {}", o.script, o.what, o.detail);
        assert!(
            o.detail.contains("rejected at step"),
            "{}: no step blamed",
            o.what
        );
    }
    println!(
        "criterion 2 (mutation sensitivity): pass ({} mutations)",
        outcomes.len()
    );
}

#[test]
fn criterion_3_proptaut_agreement() {
    let mut next = xorshift(0x5eed_0003);
    fn formula(next: &mut impl FnMut() -> u64, depth: u32) -> ModalFormula {
        if depth == 0 || next() % 5 == 0 {
            return match next() % 8 {
                0 => ModalFormula::Top,
                1 => ModalFormula::Bottom,
                k => ModalFormula::atom(format!("a{}", k * 3 % 12)),
            };
        }
        match next() % 3 {
            0 => ModalFormula::not(formula(next, depth - 1)),
            1 => ModalFormula::or(formula(next, depth - 1), formula(next, depth - 1)),
            _ => ModalFormula::and(formula(next, depth - 1), formula(next, depth - 1)),
        }
    }
    for case in 0..200 {
        let mut side = || {
            (0..1 + next() % 3)
                .map(|_| formula(&mut next, 3))
                .collect::<Vec<_>>()
        };
        let seq = Sequent {
            ant: side(),
            suc: side(),
        };
        let phi = abstract_sequent(&seq);
        let atoms: Vec<_> = phi.atoms().into_iter().collect();
        assert!(atoms.len() <= 12);
        let mut taut = true;
        for mask in 0..(1u32 << atoms.len()) {
            let eta: Assignment = atoms
                .iter()
                .enumerate()
                .map(|(i, a)| (a.clone(), mask & (1 << i) != 0))
                .collect();
            if !phi.evaluate(&eta).unwrap().0 {
                taut = false;
                break;
            }
        }
        let got = match apply_proptaut(&seq, 16) {
            Ok(()) => true,
            Err(StepError::NotTautology(_)) => false,
            Err(e) => panic!("case {case}: unexpected {e}"),
        };
        assert_eq!(got, taut, "case {case}: {seq:?}");
    }
    println!("criterion 3 (proptaut agreement): pass (200 sequents)");
}

#[test]
fn criterion_4_translation_oracle() {
    let mut next = xorshift(0x5eed_0004);
    fn term(next: &mut impl FnMut() -> u64, vars: &[String]) -> NumTerm {
        match next() % 6 {
            0 => NumTerm::Zero,
            1 => NumTerm::One,
            2 => NumTerm::Two,
            3 => NumTerm::add(
                NumTerm::var(vars[(next() % vars.len() as u64) as usize].clone()),
                NumTerm::Two,
            ),
            _ => NumTerm::var(vars[(next() % vars.len() as u64) as usize].clone()),
        }
    }
    fn sigma0(
        next: &mut impl FnMut() -> u64,
        vars: &mut Vec<String>,
        depth: u32,
    ) -> BoundedFormula {
        if depth == 0 || next() % 4 == 0 {
            let a = term(next, vars);
            let b = term(next, vars);
            return if next() % 2 == 0 {
                BoundedFormula::Eq(a, b)
            } else {
                BoundedFormula::Le(a, b)
            };
        }
        match next() % 5 {
            0 => BoundedFormula::not(sigma0(next, vars, depth - 1)),
            1 => BoundedFormula::and(
                sigma0(next, vars, depth - 1),
                sigma0(next, vars, depth - 1),
            ),
            2 => BoundedFormula::or(
                sigma0(next, vars, depth - 1),
                sigma0(next, vars, depth - 1),
            ),
            q => {
                let var = format!("v{}", vars.len());
                let bound = term(next, vars);
                vars.push(var.clone());
                let body = Box::new(sigma0(next, vars, depth - 1));
                vars.pop();
                if q == 3 {
                    BoundedFormula::ExistsNum { var, bound, body }
                } else {
                    BoundedFormula::ForallNum { var, bound, body }
                }
            }
        }
    }
    for case in 0..50 {
        let mut vars = vec![TRANSLATION_VAR.to_string()];
        let phi = sigma0(&mut next, &mut vars, 3);
        let n = next() % 65;
        let mut env = NumEnv::new();
        env.insert(TRANSLATION_VAR.to_string(), n);
        let want = phi.eval_closed(&env).unwrap();
        let got = translate_formula(&phi, n).unwrap();
        assert_eq!(
            got,
            if want {
                polyprov::sat::PropFormula::True
            } else {
                polyprov::sat::PropFormula::False
            },
            "case {case}, n={n}: {phi:?}"
        );
    }
    println!("criterion 4 (translation oracle): pass (50 formulas)");
}

#[test]
fn criterion_5_numeral_bound() {
    let env = NumEnv::new();
    for n in 0..=(1u64 << 16) {
        let t = numeral(n);
        assert_eq!(t.eval(&env).unwrap(), n);
        let bits = 64 - n.max(1).leading_zeros() as usize;
        assert!(t.size() <= 4 * bits, "n={n}: size {} bits {bits}", t.size());
    }
    println!("criterion 5 (numeral bound): pass (n <= 2^16)");
}

#[test]
fn criterion_6_compiler_simulation_equivalence() {
    let start = Instant::now();
    let budget = Budget::default();
    for (name, m) in bundled_machines().unwrap() {
        for n in 0..=32 {
            assert_eq!(
                decide_membership(&m, n, &budget).unwrap(),
                simulate(&m, n),
                "{name}, n={n}"
            );
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 120, "took {elapsed:?}");
    println!("criterion 6 (compiler/simulation equivalence): pass ({elapsed:?})");
}

#[test]
fn criterion_7_disjoint_atoms() {
    let budget = Budget::default();
    let machines = bundled_machines().unwrap();
    for (i, (na, a)) in machines.iter().enumerate() {
        for (nb, b) in &machines[i..] {
            for n in [0u64, 1, 5, 16, 32] {
                let (ca, cb) = compile_pair(a, b, n, &budget).unwrap();
                let inter: BTreeSet<_> = ca
                    .formula
                    .atoms()
                    .intersection(&cb.formula.atoms())
                    .cloned()
                    .collect();
                assert!(inter.is_empty(), "{na}/{nb}, n={n}: shared {inter:?}");
            }
        }
    }
    println!("criterion 7 (disjoint pair atoms): pass");
}

#[test]
fn criterion_8_separator_selector_soundness() {
    let budget = Budget::default();
    let find = |name: &str| {
        bundled_machines()
            .unwrap()
            .into_iter()
            .find(|(k, _)| *k == name)
            .unwrap()
            .1
    };
    let evens = find("parity");
    let odds = find("odds");
    let rows = separate(&evens, &odds, 0, 32, &budget).unwrap();
    assert_eq!(rows.len(), 33);
    for r in &rows {
        // n in C implies n not in A; n outside C implies n not in B
        if r.in_c {
            assert!(!simulate(&evens, r.n), "n={} in C but in A", r.n);
        } else {
            assert!(!simulate(&odds, r.n), "n={} outside C but in B", r.n);
        }
    }
    let mult2 = find("mult2");
    let m4 = find("nmod4ne0");
    for n in 0..=32 {
        let picked = match select(&mult2, &m4, n, &budget).unwrap() {
            1 => &mult2,
            2 => &m4,
            other => panic!("bad selector index {other}"),
        };
        assert!(simulate(picked, n), "selector wrong at n={n}");
    }
    let rej = find("always-reject");
    match select(&evens, &rej, 1, &budget) {
        Err(TmError::CoveringViolation(1)) => {}
        other => panic!("expected covering violation, got {other:?}"),
    }
    println!("criterion 8 (separator/selector soundness): pass");
}

#[test]
fn criterion_9_witness_shift_robustness() {
    let mut checked = 0;
    for entry in load_corpus() {
        for v in entry.variants {
            let script = parse_script(v.text).unwrap();
            for shift in [1u64, 5] {
                let report = check_script(&script.shifted(shift));
                assert!(
                    report.is_ok(),
                    "{}{} under shift +{shift}: {:?}",
                    entry.id,
                    v.label,
                    report.status
                );
            }
            checked += 1;
        }
    }
    assert_eq!(checked, 11);
    println!("criterion 9 (witness-shift robustness): pass (11 scripts, shifts +1/+5)");
}

// sanity for the budget surface the criteria rely on: a starved compile
// reports the overrun instead of mis-deciding
#[test]
fn budget_overruns_are_reported() {
    let m = bundled_machines().unwrap().remove(2).1;
    let tiny = Budget {
        max_atoms: 4,
        sat_steps: 10,
    };
    assert!(matches!(
        compile(&m, 16, "", &tiny),
        Err(TmError::BudgetExceeded { .. })
    ));
}
