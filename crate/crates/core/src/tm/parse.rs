//! Line-oriented machine spec files. Five sections, each opened by its
//! keyword on a line of its own:
//!
//! ```text
//! STATES            # one state per line, optional `init` / `accept` markers
//! e init accept
//! o
//! ALPHABET          # work symbols, exactly one marked `blank`
//! _ blank
//! TRANSITIONS       # quintuples: state input-bit work -> next write
//! e 1 _ -> o _
//! SCHEDULE          # `input` / `work`, then linear | const K | zigzag W | table v..
//! input linear
//! work const 0
//! BOUNDS            # coefficient lists, constant term first
//! q 2 1
//! p 0
//! ```
//!
//! `#` starts a comment; explicit tables are cycled, so schedules are total.

use std::collections::BTreeSet;

use super::{MachineSpec, Poly, Schedule, Transition};
use crate::error::ParseError;

#[derive(PartialEq, Clone, Copy)]
enum Sec {
    None,
    States,
    Alphabet,
    Transitions,
    Schedule,
    Bounds,
}

pub fn parse_machine(text: &str) -> Result<MachineSpec, ParseError> {
    let mut sec = Sec::None;
    let mut states: Vec<String> = Vec::new();
    let mut initial: Option<usize> = None;
    let mut accepting: BTreeSet<usize> = BTreeSet::new();
    let mut alphabet: Vec<String> = Vec::new();
    let mut blank: Option<usize> = None;
    // transitions are stored raw and resolved once all names are known
    let mut raw_transitions: Vec<(usize, Vec<String>)> = Vec::new();
    let mut input_schedule: Option<Schedule> = None;
    let mut work_schedule: Option<Schedule> = None;
    let mut time: Option<Poly> = None;
    let mut witness: Option<Poly> = None;

    for (ix, raw) in text.lines().enumerate() {
        let lineno = ix + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        match line {
            "STATES" => {
                sec = Sec::States;
                continue;
            }
            "ALPHABET" => {
                sec = Sec::Alphabet;
                continue;
            }
            "TRANSITIONS" => {
                sec = Sec::Transitions;
                continue;
            }
            "SCHEDULE" => {
                sec = Sec::Schedule;
                continue;
            }
            "BOUNDS" => {
                sec = Sec::Bounds;
                continue;
            }
            _ => {}
        }
        let toks: Vec<String> = line.split_whitespace().map(|s| s.to_string()).collect();
        match sec {
            Sec::None => {
                return Err(ParseError::new(lineno, 1, "expected a section keyword"));
            }
            Sec::States => {
                let name = toks[0].clone();
                if states.contains(&name) {
                    return Err(ParseError::new(lineno, 1, format!("duplicate state `{name}`")));
                }
                let ix = states.len();
                states.push(name);
                for m in &toks[1..] {
                    match m.as_str() {
                        "init" => {
                            if initial.replace(ix).is_some() {
                                return Err(ParseError::new(lineno, 1, "second initial state"));
                            }
                        }
                        "accept" => {
                            accepting.insert(ix);
                        }
                        other => {
                            return Err(ParseError::new(
                                lineno,
                                1,
                                format!("unknown state marker `{other}`"),
                            ));
                        }
                    }
                }
            }
            Sec::Alphabet => {
                let sym = toks[0].clone();
                if alphabet.contains(&sym) {
                    return Err(ParseError::new(lineno, 1, format!("duplicate symbol `{sym}`")));
                }
                let ix = alphabet.len();
                alphabet.push(sym);
                for m in &toks[1..] {
                    if m == "blank" {
                        if blank.replace(ix).is_some() {
                            return Err(ParseError::new(lineno, 1, "second blank symbol"));
                        }
                    } else {
                        return Err(ParseError::new(
                            lineno,
                            1,
                            format!("unknown symbol marker `{m}`"),
                        ));
                    }
                }
            }
            Sec::Transitions => raw_transitions.push((lineno, toks)),
            Sec::Schedule => {
                if toks.len() < 2 {
                    return Err(ParseError::new(lineno, 1, "expected `input ...` or `work ...`"));
                }
                let sched = parse_schedule(lineno, &toks[1..])?;
                match toks[0].as_str() {
                    "input" => input_schedule = Some(sched),
                    "work" => work_schedule = Some(sched),
                    other => {
                        return Err(ParseError::new(
                            lineno,
                            1,
                            format!("unknown tape `{other}`"),
                        ));
                    }
                }
            }
            Sec::Bounds => {
                let coeffs: Result<Vec<u64>, _> = toks[1..]
                    .iter()
                    .map(|t| {
                        t.parse::<u64>()
                            .map_err(|_| ParseError::new(lineno, 1, format!("bad coefficient `{t}`")))
                    })
                    .collect();
                let poly = Poly(coeffs?);
                match toks[0].as_str() {
                    "q" => time = Some(poly),
                    "p" => witness = Some(poly),
                    other => {
                        return Err(ParseError::new(
                            lineno,
                            1,
                            format!("unknown bound `{other}`"),
                        ));
                    }
                }
            }
        }
    }

    let initial = initial.ok_or_else(|| ParseError::new(1, 1, "no initial state"))?;
    let blank = blank.ok_or_else(|| ParseError::new(1, 1, "no blank symbol"))?;
    let input_schedule =
        input_schedule.ok_or_else(|| ParseError::new(1, 1, "no input schedule"))?;
    let work_schedule = work_schedule.ok_or_else(|| ParseError::new(1, 1, "no work schedule"))?;
    let time = time.ok_or_else(|| ParseError::new(1, 1, "no time bound q"))?;
    let witness = witness.ok_or_else(|| ParseError::new(1, 1, "no witness bound p"))?;

    let state_ix = |lineno: usize, name: &str| {
        states
            .iter()
            .position(|s| s == name)
            .ok_or_else(|| ParseError::new(lineno, 1, format!("unknown state `{name}`")))
    };
    let sym_ix = |lineno: usize, name: &str| {
        alphabet
            .iter()
            .position(|s| s == name)
            .ok_or_else(|| ParseError::new(lineno, 1, format!("unknown symbol `{name}`")))
    };
    let mut transitions = Vec::new();
    for (lineno, toks) in raw_transitions {
        if toks.len() != 6 || toks[3] != "->" {
            return Err(ParseError::new(
                lineno,
                1,
                "expected `state input work -> next write`",
            ));
        }
        let input = match toks[1].as_str() {
            "0" => false,
            "1" => true,
            other => {
                return Err(ParseError::new(
                    lineno,
                    1,
                    format!("input bit must be 0 or 1, got `{other}`"),
                ));
            }
        };
        transitions.push(Transition {
            state: state_ix(lineno, &toks[0])?,
            input,
            work: sym_ix(lineno, &toks[2])?,
            next: state_ix(lineno, &toks[4])?,
            write: sym_ix(lineno, &toks[5])?,
        });
    }

    Ok(MachineSpec {
        states,
        initial,
        accepting,
        alphabet,
        blank,
        transitions,
        input_schedule,
        work_schedule,
        time,
        witness,
    })
}

fn parse_schedule(lineno: usize, toks: &[String]) -> Result<Schedule, ParseError> {
    let num = |t: &String| {
        t.parse::<u64>()
            .map_err(|_| ParseError::new(lineno, 1, format!("bad number `{t}`")))
    };
    match toks[0].as_str() {
        "linear" => Ok(Schedule::Linear),
        "const" if toks.len() == 2 => Ok(Schedule::Const(num(&toks[1])?)),
        "zigzag" if toks.len() == 2 => Ok(Schedule::Zigzag(num(&toks[1])?)),
        "table" => {
            let vals: Result<Vec<u64>, _> = toks[1..].iter().map(num).collect();
            let vals = vals?;
            if vals.is_empty() {
                return Err(ParseError::new(lineno, 1, "empty schedule table"));
            }
            Ok(Schedule::Table(vals))
        }
        other => Err(ParseError::new(
            lineno,
            1,
            format!("unknown schedule form `{other}`"),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_minimal_machine() {
        let text = "\
STATES
a init accept
ALPHABET
_ blank
TRANSITIONS
a 0 _ -> a _
a 1 _ -> a _
SCHEDULE
input linear
work const 0
BOUNDS
q 2 1
p 0
";
        let m = parse_machine(text).unwrap();
        assert_eq!(m.states, vec!["a"]);
        assert_eq!(m.initial, 0);
        assert!(m.accepting.contains(&0));
        assert_eq!(m.transitions.len(), 2);
        assert_eq!(m.time.eval(5), 7);
        assert_eq!(m.witness.eval(5), 0);
    }

    #[test]
    fn rejects_missing_sections_and_bad_lines() {
        assert!(parse_machine("STATES\na init\n").is_err());
        let bad = "STATES\na init accept\nALPHABET\n_ blank\nTRANSITIONS\na 2 _ -> a _\nSCHEDULE\ninput linear\nwork const 0\nBOUNDS\nq 1\np 0\n";
        let err = parse_machine(bad).unwrap_err();
        assert!(err.msg.contains("input bit"));
        assert_eq!(err.line, 6);
    }
}
