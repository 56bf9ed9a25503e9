//! Checker for differential-privacy automata: decides in linear time whether
//! a mechanism modeled as a DiPA is dε-differentially private for some d and
//! all ε, computes the exact weight bound when it is, and constructs
//! adjacent-input counterexample path pairs with probability evidence when it
//! is not.

pub mod automaton;
pub mod laplace;
pub mod path;
pub mod pep;
pub mod graph;
pub mod rational;
pub mod report;
pub mod weight;
pub mod witness;
