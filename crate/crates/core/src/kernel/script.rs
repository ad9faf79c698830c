//! Text format for proof scripts.
//!
//! Header lines declare atoms, systems, index variables with their witness
//! values, premises and the goal. Steps follow, one per line:
//!
//! ```text
//! atom a
//! atom p pi
//! system S
//! normal S
//! simulates S
//! index i = 1
//! exists j = 10
//! premise |- ^i[ => a ]
//! goal |- ^j[ => a ]
//! 1. |- ^i[ => a ] ; hyp Premise 1
//! 2. ^i[ => a ] |- ^j[ => a ] ; init IndexMono
//! 3. |- ^j[ => a ] ; cut 1 2
//! ```
//!
//! `//` starts a comment line.

use crate::error::ParseError;
use crate::formula::Strength;
use crate::parse::Parser;

use super::{Justification, ProofScript, ProofStep};

pub fn parse_script(text: &str) -> Result<ProofScript, ParseError> {
    let mut script = ProofScript::default();
    let mut have_goal = false;
    for (ix, raw) in text.lines().enumerate() {
        let lineno = ix + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with("//") {
            continue;
        }
        if line.chars().next().is_some_and(|c| c.is_ascii_digit()) {
            script.steps.push(parse_step(line, lineno)?);
            continue;
        }
        let (kw, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let rest = rest.trim();
        match kw {
            "atom" => {
                let mut it = rest.split_whitespace();
                let name = it
                    .next()
                    .ok_or_else(|| ParseError::new(lineno, 1, "atom needs a name"))?;
                let pi = match it.next() {
                    None => false,
                    Some("pi") => true,
                    Some(other) => {
                        return Err(ParseError::new(
                            lineno,
                            1,
                            format!("unknown atom qualifier `{other}`"),
                        ))
                    }
                };
                script.atoms.insert(name.to_string(), pi);
            }
            "system" => {
                script.systems.insert(rest.to_string());
            }
            "normal" => {
                script.systems.insert(rest.to_string());
                script.normal_systems.insert(rest.to_string());
            }
            "simulates" => {
                script.systems.insert(rest.to_string());
                script.simulated_systems.insert(rest.to_string());
            }
            "index" | "exists" => {
                let (name, val) = rest.split_once('=').ok_or_else(|| {
                    ParseError::new(lineno, 1, "expected `name = value`")
                })?;
                let name = name.trim().to_string();
                let val: u64 = val.trim().parse().map_err(|_| {
                    ParseError::new(lineno, 1, "witness value must be a natural number")
                })?;
                if kw == "exists" {
                    script.exists_vars.insert(name.clone());
                }
                script.witness.insert(name, val);
            }
            "premise" => {
                let mut p = Parser::new_at(rest, lineno);
                let s = p.sequent()?;
                if !p.at_end() {
                    return Err(p.error("trailing input after premise"));
                }
                script.premises.push(s);
            }
            "goal" => {
                let mut p = Parser::new_at(rest, lineno);
                script.goal = p.sequent()?;
                if !p.at_end() {
                    return Err(p.error("trailing input after goal"));
                }
                have_goal = true;
            }
            other => {
                return Err(ParseError::new(
                    lineno,
                    1,
                    format!("unknown declaration `{other}`"),
                ))
            }
        }
    }
    if !have_goal {
        return Err(ParseError::new(0, 0, "script has no goal"));
    }
    Ok(script)
}

fn parse_step(line: &str, lineno: usize) -> Result<ProofStep, ParseError> {
    let dot = line
        .find('.')
        .ok_or_else(|| ParseError::new(lineno, 1, "step needs `k.`"))?;
    let num: usize = line[..dot]
        .trim()
        .parse()
        .map_err(|_| ParseError::new(lineno, 1, "bad step number"))?;
    let rest = &line[dot + 1..];
    let semi = rest
        .find(';')
        .ok_or_else(|| ParseError::new(lineno, 1, "step needs `; <justification>`"))?;
    let mut p = Parser::new_at(&rest[..semi], lineno);
    let conclusion = p.sequent()?;
    if !p.at_end() {
        return Err(p.error("trailing input before `;`"));
    }
    let just = parse_just(rest[semi + 1..].trim(), lineno)?;
    Ok(ProofStep {
        num,
        conclusion,
        just,
        line: lineno,
    })
}

fn parse_just(text: &str, lineno: usize) -> Result<Justification, ParseError> {
    let err = |m: &str| ParseError::new(lineno, 1, m.to_string());
    let toks: Vec<&str> = text.split_whitespace().collect();
    let head = *toks.first().ok_or_else(|| err("empty justification"))?;
    let num = |s: &str| -> Result<usize, ParseError> {
        s.parse().map_err(|_| err(&format!("expected step number, got `{s}`")))
    };
    let one = || -> Result<usize, ParseError> {
        if toks.len() != 2 {
            return Err(err("rule takes one premise"));
        }
        num(toks[1])
    };
    let two = || -> Result<(usize, usize), ParseError> {
        if toks.len() != 3 {
            return Err(err("rule takes two premises"));
        }
        Ok((num(toks[1])?, num(toks[2])?))
    };
    Ok(match head {
        "taut" => {
            if toks.len() != 1 {
                return Err(err("taut takes no arguments"));
            }
            Justification::Taut
        }
        "init" => {
            if toks.len() != 2 {
                return Err(err("init takes one scheme name"));
            }
            Justification::Init(toks[1].to_string())
        }
        "hyp" => match toks.len() {
            2 => Justification::Hyp {
                name: toks[1].to_string(),
                premise_ix: None,
            },
            3 => Justification::Hyp {
                name: toks[1].to_string(),
                premise_ix: Some(num(toks[2])?),
            },
            _ => return Err(err("hyp takes a scheme name and optional index")),
        },
        "cut" => {
            let (a, b) = two()?;
            Justification::Cut(a, b)
        }
        "negl" => Justification::NegL(one()?),
        "negr" => Justification::NegR(one()?),
        "orl" => {
            let (a, b) = two()?;
            Justification::OrL(a, b)
        }
        "orr" => Justification::OrR(one()?),
        "andl" => Justification::AndL(one()?),
        "andr" => {
            let (a, b) = two()?;
            Justification::AndR(a, b)
        }
        "weak" => Justification::Weak(one()?),
        "contract" => Justification::Contract(one()?),
        "nec" => {
            // nec <var> tri|btri [{p}] [@S] <premise>
            if toks.len() < 4 {
                return Err(err("nec takes: var, strength, optional {p} @S, premise"));
            }
            let var = toks[1].to_string();
            let strength = match toks[2] {
                "tri" => Strength::Triangle,
                "btri" => Strength::BlackTriangle,
                other => return Err(err(&format!("unknown strength `{other}`"))),
            };
            let mut relativizer = None;
            let mut system = None;
            let mut rest = &toks[3..];
            while rest.len() > 1 {
                let t = rest[0];
                if let Some(p) = t.strip_prefix('{').and_then(|s| s.strip_suffix('}')) {
                    relativizer = Some(p.to_string());
                } else if let Some(s) = t.strip_prefix('@') {
                    system = Some(s.to_string());
                } else {
                    return Err(err(&format!("unexpected nec argument `{t}`")));
                }
                rest = &rest[1..];
            }
            Justification::Nec {
                var,
                strength,
                relativizer,
                system,
                premise: num(rest[0])?,
            }
        }
        "subst" => {
            // subst <premise> <atom> := <formula>
            let Some(pos) = text.find(":=") else {
                return Err(err("subst needs `:=`"));
            };
            let lhs: Vec<&str> = text[..pos].split_whitespace().collect();
            if lhs.len() != 3 {
                return Err(err("subst takes: premise, atom, := formula"));
            }
            let mut p = Parser::new_at(text[pos + 2..].trim(), lineno);
            let with = p.formula()?;
            if !p.at_end() {
                return Err(p.error("trailing input after substitution formula"));
            }
            Justification::Subst {
                premise: num(lhs[1])?,
                atom: lhs[2].to_string(),
                with,
            }
        }
        "transfer" => {
            if toks.len() != 4 {
                return Err(err("transfer takes: premise, system, fresh var"));
            }
            Justification::Transfer {
                premise: num(toks[1])?,
                system: toks[2].to_string(),
                var: toks[3].to_string(),
            }
        }
        "unify" => {
            // unify <premise> <from> := <to>
            if toks.len() != 5 || toks[3] != ":=" {
                return Err(err("unify takes: premise, from := to"));
            }
            Justification::Unify {
                premise: num(toks[1])?,
                from: toks[2].to_string(),
                to: toks[4].to_string(),
            }
        }
        other => return Err(err(&format!("unknown rule `{other}`"))),
    })
}
