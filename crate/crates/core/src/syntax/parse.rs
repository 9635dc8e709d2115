//! Surface syntax.
//!
//! ```text
//! term    := app (op app)?
//! op      := '+[' IDENT ']' | '(+)'
//! app     := binder | item+ binder?
//! binder  := ('\' | 'λ') IDENT+ '.' term | '!' IDENT '.' term
//! item    := atom '*'?            -- '*' only in labeled input
//! atom    := IDENT | '(' term ')'
//! ```
//!
//! Choice operators bind looser than application and do not chain. Binders
//! extend as far right as possible. Comments run from `--` to end of line.

use std::collections::HashMap;

use thiserror::Error;

use super::term::{Annot, Label, Node, Term, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{line}:{col}: syntax error: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("{line}:{col}: label `{label}` is not bound by an enclosing generator (use --open for label-open terms)")]
    UnboundLabel { line: usize, col: usize, label: String },
    #[error("{line}:{col}: {message}")]
    Forbidden { line: usize, col: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Loc {
    pub line: usize,
    pub col: usize,
}

impl Loc {
    fn syntax(self, message: impl Into<String>) -> ParseError {
        ParseError::Syntax { line: self.line, col: self.col, message: message.into() }
    }

    pub(crate) fn forbidden(self, message: impl Into<String>) -> ParseError {
        ParseError::Forbidden { line: self.line, col: self.col, message: message.into() }
    }
}

/// Parsed text before names are resolved.
#[derive(Debug, Clone)]
pub(crate) enum Surface {
    Var(String),
    Abs(String, Box<Surface>),
    App(Box<Surface>, Box<Surface>, bool),
    Choice(String, Box<Surface>, Box<Surface>, Loc),
    Gen(String, Box<Surface>, Loc),
    Sum(Box<Surface>, Box<Surface>),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Lambda,
    Bang,
    Dot,
    LParen,
    RParen,
    ChoiceOp(String),
    SumOp,
    Star,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Lambda => "`\\`".into(),
            Tok::Bang => "`!`".into(),
            Tok::Dot => "`.`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::ChoiceOp(a) => format!("`+[{a}]`"),
            Tok::SumOp => "`(+)`".into(),
            Tok::Star => "`*`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() && c != 'λ' || c == '_'
}

fn is_ident_char(c: char) -> bool {
    (c.is_alphanumeric() && c != 'λ') || c == '_' || c == '\''
}

fn lex(text: &str, allow_marks: bool) -> Result<Vec<(Tok, Loc)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let advance = |i: &mut usize, line: &mut usize, col: &mut usize, chars: &[char]| {
        if chars[*i] == '\n' {
            *line += 1;
            *col = 1;
        } else {
            *col += 1;
        }
        *i += 1;
    };
    let skip_ws = |i: &mut usize, line: &mut usize, col: &mut usize| {
        while *i < chars.len() && chars[*i].is_whitespace() {
            advance(i, line, col, &chars);
        }
    };
    while i < chars.len() {
        let c = chars[i];
        let loc = Loc { line, col };
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col, &chars);
            continue;
        }
        if c == '-' && chars.get(i + 1) == Some(&'-') {
            while i < chars.len() && chars[i] != '\n' {
                advance(&mut i, &mut line, &mut col, &chars);
            }
            continue;
        }
        match c {
            '\\' | 'λ' => {
                out.push((Tok::Lambda, loc));
                advance(&mut i, &mut line, &mut col, &chars);
            }
            '!' => {
                out.push((Tok::Bang, loc));
                advance(&mut i, &mut line, &mut col, &chars);
            }
            '.' => {
                out.push((Tok::Dot, loc));
                advance(&mut i, &mut line, &mut col, &chars);
            }
            ')' => {
                out.push((Tok::RParen, loc));
                advance(&mut i, &mut line, &mut col, &chars);
            }
            '⊕' => {
                out.push((Tok::SumOp, loc));
                advance(&mut i, &mut line, &mut col, &chars);
            }
            '*' if allow_marks => {
                out.push((Tok::Star, loc));
                advance(&mut i, &mut line, &mut col, &chars);
            }
            '(' => {
                // `(+)` is a single token; `( + )` with spaces is accepted too.
                let mut j = i + 1;
                while j < chars.len() && chars[j].is_whitespace() && chars[j] != '\n' {
                    j += 1;
                }
                let mut k = j + 1;
                while k < chars.len() && chars[k].is_whitespace() && chars[k] != '\n' {
                    k += 1;
                }
                if chars.get(j) == Some(&'+') && chars.get(k) == Some(&')') {
                    out.push((Tok::SumOp, loc));
                    while i <= k {
                        advance(&mut i, &mut line, &mut col, &chars);
                    }
                } else {
                    out.push((Tok::LParen, loc));
                    advance(&mut i, &mut line, &mut col, &chars);
                }
            }
            '+' => {
                advance(&mut i, &mut line, &mut col, &chars);
                skip_ws(&mut i, &mut line, &mut col);
                if i >= chars.len() || chars[i] != '[' {
                    return Err(loc.syntax("expected `[` after `+` (choices are written `+[a]`)"));
                }
                advance(&mut i, &mut line, &mut col, &chars);
                skip_ws(&mut i, &mut line, &mut col);
                let start = i;
                if i >= chars.len() || !is_ident_start(chars[i]) {
                    return Err(Loc { line, col }.syntax("expected a label name inside `+[...]`"));
                }
                while i < chars.len() && is_ident_char(chars[i]) {
                    advance(&mut i, &mut line, &mut col, &chars);
                }
                let name: String = chars[start..i].iter().collect();
                skip_ws(&mut i, &mut line, &mut col);
                if i >= chars.len() || chars[i] != ']' {
                    return Err(Loc { line, col }.syntax("expected `]` to close the choice label"));
                }
                advance(&mut i, &mut line, &mut col, &chars);
                out.push((Tok::ChoiceOp(name), loc));
            }
            c if is_ident_start(c) => {
                let start = i;
                while i < chars.len() && is_ident_char(chars[i]) {
                    advance(&mut i, &mut line, &mut col, &chars);
                }
                out.push((Tok::Ident(chars[start..i].iter().collect()), loc));
            }
            other => return Err(loc.syntax(format!("unexpected character `{other}`"))),
        }
    }
    out.push((Tok::Eof, Loc { line, col }));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, Loc)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn loc(&self) -> Loc {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, Loc) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        self.loc().syntax(format!("expected {wanted}, found {}", self.peek().describe()))
    }

    fn ident(&mut self, wanted: &str) -> Result<(String, Loc), ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let loc = self.loc();
                self.bump();
                Ok((s, loc))
            }
            _ => Err(self.unexpected(wanted)),
        }
    }

    fn term(&mut self) -> Result<Surface, ParseError> {
        let left = self.app()?;
        let loc = self.loc();
        let op = match self.peek().clone() {
            Tok::ChoiceOp(a) => Some(a),
            Tok::SumOp => None,
            _ => return Ok(left),
        };
        self.bump();
        let right = self.app()?;
        if matches!(self.peek(), Tok::ChoiceOp(_) | Tok::SumOp) {
            return Err(self
                .loc()
                .syntax("choice operators do not associate; add parentheses"));
        }
        Ok(match op {
            Some(a) => Surface::Choice(a, Box::new(left), Box::new(right), loc),
            None => Surface::Sum(Box::new(left), Box::new(right)),
        })
    }

    fn binder(&mut self) -> Result<Surface, ParseError> {
        let (tok, loc) = self.bump();
        match tok {
            Tok::Lambda => {
                let mut names = vec![self.ident("a variable after `\\`")?];
                while let Tok::Ident(_) = self.peek() {
                    names.push(self.ident("a variable")?);
                }
                if *self.peek() != Tok::Dot {
                    return Err(self.unexpected("`.`"));
                }
                self.bump();
                let body = self.term()?;
                Ok(names
                    .into_iter()
                    .rev()
                    .fold(body, |b, (n, _)| Surface::Abs(n, Box::new(b))))
            }
            Tok::Bang => {
                let (name, _) = self.ident("a label after `!`")?;
                if *self.peek() != Tok::Dot {
                    return Err(self.unexpected("`.`"));
                }
                self.bump();
                let body = self.term()?;
                Ok(Surface::Gen(name, Box::new(body), loc))
            }
            _ => unreachable!("binder called on a non-binder token"),
        }
    }

    fn starts_binder(&self) -> bool {
        matches!(self.peek(), Tok::Lambda | Tok::Bang)
    }

    fn starts_atom(&self) -> bool {
        matches!(self.peek(), Tok::Ident(_) | Tok::LParen)
    }

    fn atom(&mut self) -> Result<Surface, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(Surface::Var(s))
            }
            Tok::LParen => {
                self.bump();
                let t = self.term()?;
                if *self.peek() != Tok::RParen {
                    return Err(self.unexpected("`)`"));
                }
                self.bump();
                Ok(t)
            }
            _ => Err(self.unexpected("a term")),
        }
    }

    fn app(&mut self) -> Result<Surface, ParseError> {
        if self.starts_binder() {
            return self.binder();
        }
        if !self.starts_atom() {
            return Err(self.unexpected("a term"));
        }
        let mut acc = self.atom()?;
        let mut pending_mark = false;
        if *self.peek() == Tok::Star {
            self.bump();
            pending_mark = true;
        }
        loop {
            let arg = if self.starts_atom() {
                self.atom()?
            } else if self.starts_binder() {
                self.binder()?
            } else {
                break;
            };
            acc = Surface::App(Box::new(acc), Box::new(arg), pending_mark);
            pending_mark = false;
            if *self.peek() == Tok::Star {
                return Err(self
                    .loc()
                    .syntax("a mark `*` may only follow the function of an application"));
            }
        }
        if pending_mark {
            return Err(self.loc().syntax("a mark `*` must be followed by an argument"));
        }
        Ok(acc)
    }
}

pub(crate) fn parse_surface(text: &str, allow_marks: bool) -> Result<Surface, ParseError> {
    let toks = lex(text, allow_marks)?;
    let mut p = Parser { toks, pos: 0 };
    let t = p.term()?;
    if *p.peek() != Tok::Eof {
        return Err(p.unexpected("end of input"));
    }
    Ok(t)
}

/// How label names without a generator are treated.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ParseOptions {
    /// Accept free labels (resolved to the shared free label of that name).
    pub open: bool,
}

struct Resolver {
    open: bool,
    vars: HashMap<String, Vec<Var>>,
    labels: HashMap<String, Vec<Label>>,
}

impl Resolver {
    fn build<A: Annot>(&mut self, s: &Surface, mark: &impl Fn(bool) -> A) -> Result<Node<A>, ParseError> {
        Ok(match s {
            Surface::Var(n) => Node::Var(
                self.vars
                    .get(n)
                    .and_then(|v| v.last().cloned())
                    .unwrap_or_else(|| Var::free(n)),
            ),
            Surface::Abs(n, b) => {
                let v = Var::fresh(n);
                self.vars.entry(n.clone()).or_default().push(v.clone());
                let body = self.build(b, mark);
                self.vars.get_mut(n).map(Vec::pop);
                Node::Abs(v, Box::new(body?))
            }
            Surface::Gen(n, b, _) => {
                let a = Label::fresh(n);
                self.labels.entry(n.clone()).or_default().push(a.clone());
                let body = self.build(b, mark);
                self.labels.get_mut(n).map(Vec::pop);
                Node::Gen(a, Box::new(body?))
            }
            Surface::App(f, x, m) => Node::App(Box::new(self.build(f, mark)?), Box::new(self.build(x, mark)?), mark(*m)),
            Surface::Choice(n, l, r, loc) => {
                let a = match self.labels.get(n).and_then(|v| v.last().cloned()) {
                    Some(a) => a,
                    None if self.open => Label::free(n),
                    None => {
                        return Err(ParseError::UnboundLabel { line: loc.line, col: loc.col, label: n.clone() })
                    }
                };
                Node::Choice(a, Box::new(self.build(l, mark)?), Box::new(self.build(r, mark)?))
            }
            Surface::Sum(l, r) => {
                let f = Label::fresh("f");
                let l = self.build(l, mark)?;
                let r = self.build(r, mark)?;
                Node::Gen(f.clone(), Box::new(Node::Choice(f, Box::new(l), Box::new(r))))
            }
        })
    }
}

pub fn parse_with(text: &str, opts: ParseOptions) -> Result<Term, ParseError> {
    let s = parse_surface(text, false)?;
    Resolver { open: opts.open, vars: HashMap::new(), labels: HashMap::new() }.build(&s, &|_| ())
}

/// Parse a label-closed term.
pub fn parse(text: &str) -> Result<Term, ParseError> {
    parse_with(text, ParseOptions { open: false })
}

/// Parse a term that may use free labels.
pub fn parse_open(text: &str) -> Result<Term, ParseError> {
    parse_with(text, ParseOptions { open: true })
}

/// Parse a labeled term: `(\x.M)* N` marks that redex. Free labels are allowed.
pub fn parse_labeled(text: &str) -> Result<Node<bool>, ParseError> {
    let s = parse_surface(text, true)?;
    Resolver { open: true, vars: HashMap::new(), labels: HashMap::new() }.build(&s, &|m| m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_over_choice() {
        let t = parse(r"!a.(x +[a] y)").unwrap();
        let Node::Gen(a, body) = &t else { panic!("{t:?}") };
        assert_eq!(**body, Term::choice(a.clone(), Term::var(Var::free("x")), Term::var(Var::free("y"))));
    }

    #[test]
    fn sum_sugar_expands() {
        let t = parse("x (+) y").unwrap();
        let Node::Gen(f, body) = &t else { panic!("{t:?}") };
        assert_eq!(**body, Term::choice(f.clone(), Term::var(Var::free("x")), Term::var(Var::free("y"))));
        assert!(t.alpha_eq(&parse("x ⊕ y").unwrap()));
        assert!(t.alpha_eq(&parse("x ( + ) y").unwrap()));
    }

    #[test]
    fn application_is_left_associative_and_binds_tighter() {
        let t = parse_open("f x y +[a] z").unwrap();
        let Node::Choice(_, l, _) = &t else { panic!() };
        let x = |n| Term::var(Var::free(n));
        assert_eq!(**l, Term::app(Term::app(x("f"), x("x")), x("y")));
    }

    #[test]
    fn binders_extend_right() {
        let t = parse_open(r"\x.x +[a] y").unwrap();
        assert!(matches!(t, Node::Abs(_, ref b) if matches!(**b, Node::Choice(..))));
        let t = parse(r"f \x.x y").unwrap();
        let Node::App(_, arg, _) = &t else { panic!() };
        assert!(matches!(**arg, Node::Abs(..)));
    }

    #[test]
    fn unbound_label_is_reported_unless_open() {
        let e = parse("x +[a] y").unwrap_err();
        assert_eq!(e, ParseError::UnboundLabel { line: 1, col: 3, label: "a".into() });
        let t = parse_open("x +[a] y").unwrap();
        assert!(t.free_labels().contains(&Label::free("a")));
    }

    #[test]
    fn syntax_errors_have_positions() {
        let e = parse("\\x.\n  (x").unwrap_err();
        assert!(matches!(e, ParseError::Syntax { line: 2, .. }), "{e}");
        let e = parse("x (+) y (+) z").unwrap_err();
        assert!(matches!(e, ParseError::Syntax { line: 1, col: 9, .. }), "{e}");
        assert!(parse("").is_err());
        assert!(parse("x $").is_err());
    }

    #[test]
    fn comments_are_ignored() {
        let t = parse("-- identity\n\\x.x -- trailing\n").unwrap();
        assert!(t.alpha_eq(&parse("\\x.x").unwrap()));
    }

    #[test]
    fn shadowing_resolves_innermost() {
        let t = parse(r"\x.\x.x").unwrap();
        assert!(t.alpha_eq(&parse(r"\y.\z.z").unwrap()));
        let t = parse(r"!a.!a.(x +[a] y)").unwrap();
        assert!(t.alpha_eq(&parse(r"!b.!c.(x +[c] y)").unwrap()));
    }

    #[test]
    fn multi_binder_sugar() {
        assert!(parse(r"\x y.x").unwrap().alpha_eq(&parse(r"\x.\y.x").unwrap()));
    }

    #[test]
    fn marks_parse_only_in_labeled_mode() {
        assert!(parse(r"(\x.x)* y").is_err());
        let t = parse_labeled(r"(\x.x)* ((\y.y)* z)").unwrap();
        let Node::App(_, arg, m) = &t else { panic!() };
        assert!(*m);
        assert!(matches!(**arg, Node::App(_, _, true)));
        let t = parse_labeled(r"(\x.x) y").unwrap();
        assert!(matches!(t, Node::App(_, _, false)));
    }
}
