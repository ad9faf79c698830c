//! A workbench for a modal sequent calculus of polynomially bounded
//! provability, together with the machinery that grounds it: a propositional
//! translation into bounded-arithmetic style formulas, a small SAT solver,
//! and a compiler from nondeterministic machines to satisfiability instances.

pub mod bounded;
pub mod corpus;
pub mod error;
pub mod formula;
pub mod index;
pub mod kernel;
pub mod par;
pub mod parse;
pub mod sat;
pub mod tm;
