//! A workbench for the probabilistic event lambda-calculus.
pub mod beta;
pub mod dyadic;
pub mod harness;
pub mod perm;
pub mod projective;
pub mod rpo;
pub mod syntax;
pub mod translate;
pub mod typing;
pub use syntax::{Label, LabelSeq, Node, Position, Term, Var};
