//! Concrete syntax for formulas, sequents and index terms.
//!
//! Grammar sketch (whitespace-insensitive):
//!
//! ```text
//! sequent   := formulas "|-" formulas
//! boxbody   := formulas "=>" formulas
//! formula   := conj ( "\/" conj )*
//! conj      := unary ( "/\" unary )*
//! unary     := "~" unary | "(" formula ")" | "bot" | "top" | box | ident
//! box       := ("^" | "#") index "[" boxbody "]" [ "{" ident "}" ] [ "@" ident ]
//! index     := atom_idx ( "+" nat )*
//! atom_idx  := nat | ident | "max" "(" index "," index ")"
//! ```

use crate::error::ParseError;
use crate::formula::{BoxFormula, ModalFormula, Sequent, Strength};
use crate::index::IndexTerm;

pub struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    line_start: usize,
}

impl<'a> Parser<'a> {
    pub fn new(src: &'a str) -> Self {
        Parser {
            src: src.as_bytes(),
            pos: 0,
            line: 1,
            line_start: 0,
        }
    }

    /// Parser for a fragment known to start at `line` of a larger file.
    pub fn new_at(src: &'a str, line: usize) -> Self {
        Parser {
            src: src.as_bytes(),
            pos: 0,
            line,
            line_start: 0,
        }
    }

    fn col(&self) -> usize {
        self.pos - self.line_start + 1
    }

    pub fn error(&self, msg: impl Into<String>) -> ParseError {
        ParseError::new(self.line, self.col(), msg)
    }

    pub fn skip_ws(&mut self) {
        while let Some(&c) = self.src.get(self.pos) {
            if c == b'\n' {
                self.pos += 1;
                self.line += 1;
                self.line_start = self.pos;
            } else if c.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    pub fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn starts_with(&mut self, s: &str) -> bool {
        self.skip_ws();
        self.src[self.pos..].starts_with(s.as_bytes())
    }

    pub fn eat(&mut self, s: &str) -> bool {
        if self.starts_with(s) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, s: &str) -> Result<(), ParseError> {
        if self.eat(s) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{s}`")))
        }
    }

    pub fn at_end(&mut self) -> bool {
        self.peek().is_none()
    }

    pub fn ident(&mut self) -> Result<String, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while let Some(&c) = self.src.get(self.pos) {
            if c.is_ascii_alphanumeric() || c == b'_' || c == b'\'' {
                self.pos += 1;
            } else {
                break;
            }
        }
        if self.pos == start || self.src[start].is_ascii_digit() {
            return Err(self.error("expected identifier"));
        }
        Ok(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
    }

    pub fn nat(&mut self) -> Result<u64, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while let Some(&c) = self.src.get(self.pos) {
            if c.is_ascii_digit() {
                self.pos += 1;
            } else {
                break;
            }
        }
        if self.pos == start {
            return Err(self.error("expected number"));
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| self.error("number out of range"))
    }

    pub fn index_term(&mut self) -> Result<IndexTerm, ParseError> {
        let mut t = self.index_atom()?;
        while self.eat("+") {
            let k = self.nat()?;
            t = IndexTerm::Add(Box::new(t), k);
        }
        Ok(t)
    }

    fn index_atom(&mut self) -> Result<IndexTerm, ParseError> {
        match self.peek() {
            Some(c) if c.is_ascii_digit() => Ok(IndexTerm::Lit(self.nat()?)),
            _ => {
                let name = self.ident()?;
                if name == "max" {
                    self.expect("(")?;
                    let a = self.index_term()?;
                    self.expect(",")?;
                    let b = self.index_term()?;
                    self.expect(")")?;
                    Ok(IndexTerm::Max(Box::new(a), Box::new(b)))
                } else {
                    Ok(IndexTerm::Var(name))
                }
            }
        }
    }

    pub fn formula(&mut self) -> Result<ModalFormula, ParseError> {
        let mut f = self.conj()?;
        while self.eat("\\/") {
            let g = self.conj()?;
            f = ModalFormula::or(f, g);
        }
        Ok(f)
    }

    fn conj(&mut self) -> Result<ModalFormula, ParseError> {
        let mut f = self.unary()?;
        while self.eat("/\\") {
            let g = self.unary()?;
            f = ModalFormula::and(f, g);
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<ModalFormula, ParseError> {
        if self.eat("~") {
            let inner = self.unary()?;
            return Ok(match inner {
                ModalFormula::Atom { name, positive } => ModalFormula::Atom {
                    name,
                    positive: !positive,
                },
                other => ModalFormula::not(other),
            });
        }
        if self.eat("(") {
            let f = self.formula()?;
            self.expect(")")?;
            return Ok(f);
        }
        match self.peek() {
            Some(b'^') | Some(b'#') => self.box_formula(),
            _ => {
                let name = self.ident()?;
                Ok(match name.as_str() {
                    "bot" => ModalFormula::Bottom,
                    "top" => ModalFormula::Top,
                    _ => ModalFormula::atom(name),
                })
            }
        }
    }

    fn box_formula(&mut self) -> Result<ModalFormula, ParseError> {
        let strength = if self.eat("^") {
            Strength::Triangle
        } else {
            self.expect("#")?;
            Strength::BlackTriangle
        };
        let index = self.index_term()?;
        self.expect("[")?;
        let body = self.box_body()?;
        self.expect("]")?;
        let mut relativizer = None;
        if self.eat("{") {
            relativizer = Some(self.ident()?);
            self.expect("}")?;
        }
        let mut system = None;
        if self.eat("@") {
            system = Some(self.ident()?);
        }
        Ok(ModalFormula::boxed(BoxFormula {
            strength,
            index,
            system,
            relativizer,
            body,
        }))
    }

    fn formula_list(&mut self, stop: &[&str]) -> Result<Vec<ModalFormula>, ParseError> {
        let mut out = Vec::new();
        loop {
            for s in stop {
                if self.starts_with(s) {
                    return Ok(out);
                }
            }
            if self.at_end() && out.is_empty() {
                return Ok(out);
            }
            out.push(self.formula()?);
            if !self.eat(",") {
                return Ok(out);
            }
        }
    }

    fn box_body(&mut self) -> Result<Sequent, ParseError> {
        let ant = self.formula_list(&["=>", "]"])?;
        self.expect("=>")?;
        let suc = self.formula_list(&["]"])?;
        Ok(Sequent::new(ant, suc))
    }

    pub fn sequent(&mut self) -> Result<Sequent, ParseError> {
        let ant = self.formula_list(&["|-"])?;
        self.expect("|-")?;
        let suc = self.formula_list(&[";"])?;
        Ok(Sequent::new(ant, suc))
    }
}

/// Parse a top-level sequent, `Γ |- Δ`. The result must satisfy the relaxed
/// shape; the strict grammar is a separate check ([`Sequent::wf_lambda`]).
pub fn parse_sequent(text: &str) -> Result<Sequent, ParseError> {
    let mut p = Parser::new(text);
    let s = p.sequent()?;
    if !p.at_end() {
        return Err(p.error("trailing input after sequent"));
    }
    Ok(s)
}

pub fn parse_formula(text: &str) -> Result<ModalFormula, ParseError> {
    let mut p = Parser::new(text);
    let f = p.formula()?;
    if !p.at_end() {
        return Err(p.error("trailing input after formula"));
    }
    Ok(f)
}

pub fn format_sequent(s: &Sequent) -> String {
    s.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_antecedent() {
        let s = parse_sequent("|- ^1[ p => q ]").unwrap();
        assert!(s.ant.is_empty());
        assert_eq!(s.suc.len(), 1);
        assert!(s.suc[0].as_box().is_some());
    }

    #[test]
    fn two_antecedents() {
        let s = parse_sequent("p, q |- p").unwrap();
        assert_eq!(s.ant.len(), 2);
        assert_eq!(s.suc.len(), 1);
    }

    #[test]
    fn suffixes_and_indices() {
        let s = parse_sequent("|- #max(k,i+1)+2[ ~^i[=>a] => bot ]{p}@S").unwrap();
        let b = s.suc[0].as_box().unwrap();
        assert_eq!(b.relativizer.as_deref(), Some("p"));
        assert_eq!(b.system.as_deref(), Some("S"));
        assert_eq!(b.index.to_string(), "max(k,i+1)+2");
    }

    #[test]
    fn round_trip() {
        for text in [
            "|- ^1[ p => q ]",
            "p, q |- p",
            "~a, ^k[ ^i[=>b], c => ] |- #j[ => ~^i[=>a] ]{p}, bot",
            "^1[=>a] \\/ ~^2[=>b] |- (^1[=>a] /\\ ^1[=>b]) \\/ ^2[=>c]",
            "#k[ => ~^i[=>a], ~^i[=>b] ]{p} |- #j[ => ~^i[=>a] ]{p}, #j[ => ~^i[=>b] ]{p}",
        ] {
            let s = parse_sequent(text).unwrap();
            let printed = format_sequent(&s);
            let again = parse_sequent(&printed).unwrap();
            assert_eq!(s, again, "round trip failed for `{text}` -> `{printed}`");
        }
    }

    #[test]
    fn parse_error_carries_position() {
        let err = parse_sequent("p |- ^1[ p => ").unwrap_err();
        assert_eq!(err.line, 1);
        assert!(err.col > 1);
    }

    #[test]
    fn tilde_folds_into_literals() {
        let f = parse_formula("~p").unwrap();
        assert_eq!(
            f,
            ModalFormula::Atom {
                name: "p".into(),
                positive: false
            }
        );
        // but a negated box stays a negation node
        let g = parse_formula("~^1[=>p]").unwrap();
        assert!(matches!(g, ModalFormula::Not(_)));
    }
}
