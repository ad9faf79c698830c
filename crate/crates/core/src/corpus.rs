//! Bundled derivations, checked in batch as a regression suite.
//!
//! Each entry ships one proof script (one entry ships four variants that
//! differ only in operator strength and relativizer) together with the
//! hypothesis ledger the derivation is expected to lean on. `run_corpus`
//! checks every script and compares ledgers exactly.

use std::collections::BTreeSet;

use crate::kernel::{check_script, parse_script, CheckStatus};
use crate::par::maybe_par_map;

pub struct CorpusVariant {
    pub label: &'static str,
    pub text: &'static str,
    pub expected_ledger: &'static [&'static str],
}

pub struct CorpusEntry {
    /// short name for what the derivation establishes
    pub id: &'static str,
    /// one-line description, with the step range it follows where steps are
    /// numbered in the source derivation
    pub anchor: &'static str,
    pub variants: Vec<CorpusVariant>,
}

fn entry(
    id: &'static str,
    anchor: &'static str,
    variants: Vec<CorpusVariant>,
) -> CorpusEntry {
    CorpusEntry {
        id,
        anchor,
        variants,
    }
}

fn one(
    id: &'static str,
    anchor: &'static str,
    text: &'static str,
    ledger: &'static [&'static str],
) -> CorpusEntry {
    entry(
        id,
        anchor,
        vec![CorpusVariant {
            label: "",
            text,
            expected_ledger: ledger,
        }],
    )
}

pub fn load_corpus() -> Vec<CorpusEntry> {
    vec![
        one(
            "interp-pair-lift",
            "refutation pair lifted through an inner provability box",
            include_str!("../corpus/interp-pair-lift.script"),
            &["Lemma19Interp"],
        ),
        one(
            "implication-exchange",
            "inner boxes trade places across two guarded implications, steps (1)-(28)",
            include_str!("../corpus/implication-exchange.script"),
            &["AlgDot3"],
        ),
        entry(
            "disj-split",
            "a box proving a disjunction of negated boxes splits into a pair, steps (1)-(23) in four operator variants",
            vec![
                CorpusVariant {
                    label: "/tri",
                    text: include_str!("../corpus/disj-split-tri.script"),
                    expected_ledger: &["Dot2"],
                },
                CorpusVariant {
                    label: "/alg",
                    text: include_str!("../corpus/disj-split-alg.script"),
                    expected_ledger: &["AlgDot2"],
                },
                CorpusVariant {
                    label: "/rel-tri",
                    text: include_str!("../corpus/disj-split-rel-tri.script"),
                    expected_ledger: &["Lemma19Disj"],
                },
                CorpusVariant {
                    label: "/rel-alg",
                    text: include_str!("../corpus/disj-split-rel-alg.script"),
                    expected_ledger: &["Lemma19Interp"],
                },
            ],
        ),
        one(
            "effective-disjunction",
            "premise box cut against the inner lemma after index unification",
            include_str!("../corpus/effective-disjunction.script"),
            &["Dot2", "Premise"],
        ),
        one(
            "effective-interpolation",
            "relativizer substitution specializes the inner lemma to an implication pair, steps (7)-(11)",
            include_str!("../corpus/effective-interpolation.script"),
            &["Lemma19Interp"],
        ),
        one(
            "simulation-interpolation",
            "implication pair built at the base level, then carried into a simulated system, steps (1)-(12)",
            include_str!("../corpus/simulation-interpolation.script"),
            &["AlgDot3", "Prop28Persistence", "SimulationPremise"],
        ),
        one(
            "consistency-pair",
            "a normal reflective system refutes a box or its negated twin, steps (1)-(42)",
            include_str!("../corpus/consistency-pair.script"),
            &["AlgDot3@S", "NormalSystem@S"],
        ),
        one(
            "conjunction-split",
            "effective disjunct: one conjunct implies the conjunction, steps (1)-(32)",
            include_str!("../corpus/conjunction-split.script"),
            &["AlgDot3"],
        ),
    ]
}

#[derive(Debug)]
pub struct VariantResult {
    pub id: String,
    pub label: &'static str,
    pub ok: bool,
    pub steps: usize,
    pub detail: String,
}

pub struct CorpusSummary {
    pub results: Vec<VariantResult>,
}

impl CorpusSummary {
    pub fn all_ok(&self) -> bool {
        self.results.iter().all(|r| r.ok)
    }
}

pub fn run_corpus(entries: &[CorpusEntry]) -> CorpusSummary {
    let jobs: Vec<(String, &'static str, &'static str, &'static [&'static str])> = entries
        .iter()
        .flat_map(|e| {
            e.variants
                .iter()
                .map(|v| (e.id.to_string(), v.label, v.text, v.expected_ledger))
        })
        .collect();
    let results = maybe_par_map(jobs, |(id, label, text, expected)| {
        let script = match parse_script(text) {
            Ok(s) => s,
            Err(e) => {
                return VariantResult {
                    id,
                    label,
                    ok: false,
                    steps: 0,
                    detail: format!("parse error: {e}"),
                }
            }
        };
        let steps = script.steps.len();
        let report = check_script(&script);
        match &report.status {
            CheckStatus::Failed { step, reason } => VariantResult {
                id,
                label,
                ok: false,
                steps,
                detail: format!("failed at step {step}: {reason}"),
            },
            CheckStatus::Ok => {
                let want: BTreeSet<String> = expected.iter().map(|s| s.to_string()).collect();
                if report.hypotheses == want {
                    VariantResult {
                        id,
                        label,
                        ok: true,
                        steps,
                        detail: format!("ledger {:?}", report.hypotheses),
                    }
                } else {
                    VariantResult {
                        id,
                        label,
                        ok: false,
                        steps,
                        detail: format!(
                            "ledger mismatch: got {:?}, want {:?}",
                            report.hypotheses, want
                        ),
                    }
                }
            }
        }
    });
    CorpusSummary { results }
}

/// A single-token edit to a bundled script that must be rejected, together
/// with the step the checker is expected to blame.
#[derive(Clone, Copy)]
pub struct Mutation {
    pub script: &'static str,
    pub what: &'static str,
    pub from: &'static str,
    pub to: &'static str,
    pub expect_step: usize,
    base: &'static str,
}

fn mutate(
    script: &'static str,
    what: &'static str,
    base: &'static str,
    from: &'static str,
    to: &'static str,
    expect_step: usize,
) -> Mutation {
    Mutation {
        script,
        what,
        from,
        to,
        expect_step,
        base,
    }
}

pub fn mutations() -> Vec<Mutation> {
    let ipl = include_str!("../corpus/interp-pair-lift.script");
    let tri = include_str!("../corpus/disj-split-tri.script");
    let alg = include_str!("../corpus/disj-split-alg.script");
    let rel_tri = include_str!("../corpus/disj-split-rel-tri.script");
    let rel_alg = include_str!("../corpus/disj-split-rel-alg.script");
    let ed = include_str!("../corpus/effective-disjunction.script");
    let ei = include_str!("../corpus/effective-interpolation.script");
    let ix = include_str!("../corpus/implication-exchange.script");
    let si = include_str!("../corpus/simulation-interpolation.script");
    let cp = include_str!("../corpus/consistency-pair.script");
    let cs = include_str!("../corpus/conjunction-split.script");
    vec![
        mutate(
            "disj-split/tri",
            "introspection conclusion index off by one",
            tri,
            "4. ^i[ => b ] |- ^i+1[ => ^i[ => b ] ] ; init Ax4",
            "4. ^i[ => b ] |- ^i[ => ^i[ => b ] ] ; init Ax4",
            4,
        ),
        mutate(
            "disj-split/tri",
            "hypothesis step dropped",
            tri,
            "20. |- ^j1[ => ~^k+1[ => ^i[ => a ] ] ], ^j1[ => ~^k+1[ => ~^i[ => a ] ] ] ; hyp Dot2\n",
            "",
            22,
        ),
        mutate(
            "disj-split/tri",
            "antecedent and succedent swapped",
            tri,
            "28. ~^k+1[ => ^i[ => a ] ] |- ~^i[ => a ] ; negl 27",
            "28. ~^i[ => a ] |- ~^k+1[ => ^i[ => a ] ] ; negl 27",
            28,
        ),
        mutate(
            "disj-split/tri",
            "index monotonicity pointed downward",
            tri,
            "33. ^j2+1[ => ~^i[ => a ] ] |- ^j[ => ~^i[ => a ] ] ; init IndexMono",
            "33. ^j2+1[ => ~^i[ => a ] ] |- ^j2[ => ~^i[ => a ] ] ; init IndexMono",
            33,
        ),
        mutate(
            "disj-split/alg",
            "necessitation strength downgraded",
            alg,
            "; nec j1 btri 8",
            "; nec j1 tri 8",
            9,
        ),
        mutate(
            "disj-split/alg",
            "plain pair hypothesis against algorithmic boxes",
            alg,
            "; hyp AlgDot2",
            "; hyp Dot2",
            20,
        ),
        mutate(
            "disj-split/alg",
            "index monotonicity with altered body",
            alg,
            "|- #j1+1[ => ~^k+1[ => ~^i[ => a ] ] ] ; init IndexMono",
            "|- #j1+1[ => ~^k[ => ~^i[ => a ] ] ] ; init IndexMono",
            21,
        ),
        mutate(
            "disj-split/rel-tri",
            "relax step that adds no relativizer",
            rel_tri,
            "|- ^k[ => ^i[ => b ] ]{p} ; init Relax",
            "|- ^k[ => ^i[ => b ] ] ; init Relax",
            7,
        ),
        mutate(
            "disj-split/rel-tri",
            "forget step keeping the algorithmic box",
            rel_tri,
            "|- ^k+2[ ^k+1[ => ^i[ => a ] ]{p} => ^i[ => a ] ]{p} ; init Forget",
            "|- #k+2[ ^k+1[ => ^i[ => a ] ]{p} => ^i[ => a ] ]{p} ; init Forget",
            23,
        ),
        mutate(
            "disj-split/rel-alg",
            "plain-pair hypothesis against algorithmic boxes",
            rel_alg,
            "; hyp Lemma19Interp",
            "; hyp Lemma19Disj",
            31,
        ),
        mutate(
            "disj-split/rel-alg",
            "reflection axiom outer index off by one",
            rel_alg,
            "|- #k+2[ ^k+1[ => ^i[ => a ] ]{p} => ^i[ => a ] ]{p} ; init WeakTp",
            "|- #k+1[ ^k+1[ => ^i[ => a ] ]{p} => ^i[ => a ] ]{p} ; init WeakTp",
            22,
        ),
        mutate(
            "effective-disjunction",
            "unification against a variable with a different witness",
            ed,
            "; unify 37 k2 := k",
            "; unify 37 k2 := j",
            38,
        ),
        mutate(
            "effective-disjunction",
            "premise declaration dropped",
            ed,
            "premise |- ^k[ => ~^i[ => a ], ~^i[ => b ] ]\n",
            "",
            39,
        ),
        mutate(
            "effective-disjunction",
            "premise cited with the wrong disjunct",
            ed,
            "39. |- ^k[ => ~^i[ => a ],",
            "39. |- ^k[ => ~^i[ => b ],",
            39,
        ),
        mutate(
            "effective-interpolation",
            "substituted formula's connective flipped",
            ei,
            "subst 48 p := ~^i[ => a ] \\/ ~^i[ => b ]",
            "subst 48 p := ~^i[ => a ] /\\ ~^i[ => b ]",
            49,
        ),
        mutate(
            "effective-interpolation",
            "non-tautology claimed as tautology",
            ei,
            "|- ~^i[ => a ], ~^i[ => b ] ; taut",
            "|- ~^i[ => a ], ~^i[ => a ] ; taut",
            50,
        ),
        mutate(
            "effective-interpolation",
            "contraposition read in the wrong direction",
            ei,
            "|- #j+1[ ^i[ => a ] => ^i[ => b ] ] ; init BodyConseq",
            "|- #j+1[ ^i[ => b ] => ^i[ => a ] ] ; init BodyConseq",
            53,
        ),
        mutate(
            "implication-exchange",
            "exchange tautology with the wrong conclusion guard",
            ix,
            "~(b /\\ ^i[ => e ]) \\/ a ; taut",
            "~(b /\\ ^i[ => e ]) \\/ a2 ; taut",
            1,
        ),
        mutate(
            "implication-exchange",
            "cut citing the wrong premise step",
            ix,
            "; cut 25 13",
            "; cut 25 12",
            26,
        ),
        mutate(
            "implication-exchange",
            "converse-pair hypothesis with both implications alike",
            ix,
            "#k[ ^i[ => e ] => ^i[ => c ] ] ; hyp AlgDot3",
            "#k[ ^i[ => c ] => ^i[ => e ] ] ; hyp AlgDot3",
            25,
        ),
        mutate(
            "consistency-pair",
            "normality declaration dropped",
            cp,
            "normal S\n",
            "",
            1,
        ),
        mutate(
            "consistency-pair",
            "reflection with negation stripped",
            cp,
            "|- ~a ; init AxT",
            "|- a ; init AxT",
            2,
        ),
        mutate(
            "consistency-pair",
            "falsum weakened to verum",
            cp,
            "|- bot ; weak 4",
            "|- top ; weak 4",
            6,
        ),
        mutate(
            "conjunction-split",
            "disjunction introduction at a smaller index",
            cs,
            "] \\/ #j1+1[ ^k[ => p2 ] => ^k[ => p1 ] /\\ ^k[ => p2 ] ] ; orr 31",
            "] \\/ #j1[ ^k[ => p2 ] => ^k[ => p1 ] /\\ ^k[ => p2 ] ] ; orr 31",
            32,
        ),
        mutate(
            "conjunction-split",
            "identity with unequal sides",
            cs,
            "|- ^k[ => p1 ] /\\ ^k[ => p2 ] ; init Identity",
            "|- ^k[ => p1 ] /\\ ^k[ => p1 ] ; init Identity",
            1,
        ),
        mutate(
            "interp-pair-lift",
            "swap losing the negation",
            ipl,
            "|- #l[ ~^i[ => a ], ^k[ => ^i[ => a ] ]{p} => ]{p} ; init SwapRight",
            "|- #l[ ^i[ => a ], ^k[ => ^i[ => a ] ]{p} => ]{p} ; init SwapRight",
            4,
        ),
        mutate(
            "interp-pair-lift",
            "distribution without the index bump",
            ipl,
            "|- #l+1[ => ~^k[ => ^i[ => a ] ]{p} ]{p} ; init AxKb",
            "|- #l[ => ~^k[ => ^i[ => a ] ]{p} ]{p} ; init AxKb",
            8,
        ),
        mutate(
            "simulation-interpolation",
            "simulation declaration dropped",
            si,
            "simulates S\n",
            "",
            35,
        ),
        mutate(
            "simulation-interpolation",
            "transfer into an undeclared system",
            si,
            "; transfer 48 S p2",
            "; transfer 48 T p2",
            49,
        ),
        mutate(
            "simulation-interpolation",
            "necessitation citing a different index variable",
            si,
            "; nec l btri 35",
            "; nec m btri 35",
            36,
        ),
    ]
}

pub struct MutationOutcome {
    pub script: &'static str,
    pub what: &'static str,
    /// true iff the checker rejected the mutated script at the expected step
    pub ok: bool,
    pub detail: String,
}

pub fn run_mutations(muts: &[Mutation]) -> Vec<MutationOutcome> {
    maybe_par_map(muts.to_vec(), |m| {
        if !m.base.contains(m.from) {
            return MutationOutcome {
                script: m.script,
                what: m.what,
                ok: false,
                detail: format!("anchor `{}` not found in script", m.from),
            };
        }
        let mutated = m.base.replacen(m.from, m.to, 1);
        let script = match parse_script(&mutated) {
            Ok(s) => s,
            Err(e) => {
                return MutationOutcome {
                    script: m.script,
                    what: m.what,
                    ok: false,
                    detail: format!("mutated script no longer parses: {e}"),
                }
            }
        };
        match check_script(&script).status {
            CheckStatus::Failed { step, reason } => MutationOutcome {
                script: m.script,
                what: m.what,
                ok: step == m.expect_step,
                detail: format!(
                    "rejected at step {step} (expected {}): {reason}",
                    m.expect_step
                ),
            },
            CheckStatus::Ok => MutationOutcome {
                script: m.script,
                what: m.what,
                ok: false,
                detail: "falsely accepted".into(),
            },
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_checks_with_expected_ledgers() {
        let summary = run_corpus(&load_corpus());
        for r in &summary.results {
            assert!(r.ok, "{}{}: {}", r.id, r.label, r.detail);
        }
    }

    #[test]
    fn mutations_are_rejected_at_the_blamed_step() {
        let muts = mutations();
        assert!(muts.len() >= 20);
        for o in run_mutations(&muts) {
            assert!(o.ok, "{} ({}): {}", o.script, o.what, o.detail);
        }
    }

    #[test]
    fn empty_corpus_is_vacuously_ok() {
        let summary = run_corpus(&[]);
        assert!(summary.all_ok());
        assert_eq!(summary.results.len(), 0);
    }
}
