//! Terms, names, parsing and printing.

pub mod alpha;
pub mod labels;
pub mod parse;
pub mod position;
pub mod print;
pub mod subst;
pub mod term;

pub use alpha::alpha_eq;
pub use labels::{is_well_labeled, label_judgment, LabelOrder, LabelSeq};
pub use parse::{parse, parse_labeled, parse_open, parse_with, ParseError, ParseOptions};
pub use position::{Dir, Position};
pub use print::print;
pub use subst::{rename_label, rename_var, substitute};
pub use term::{Annot, Label, Node, Term, Var};
