//! Simple types, environments, checking and monomorphic inference.
//!
//! Labels are invisible to types: a choice types like its two branches and a
//! generator like its body.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::syntax::{Annot, Dir, Node, Position, Var};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SimpleType {
    Atom(String),
    Arrow(Box<SimpleType>, Box<SimpleType>),
}

impl SimpleType {
    pub fn atom(name: &str) -> Self {
        SimpleType::Atom(name.to_owned())
    }

    pub fn arrow(dom: SimpleType, cod: SimpleType) -> Self {
        SimpleType::Arrow(Box::new(dom), Box::new(cod))
    }

    pub fn size(&self) -> usize {
        match self {
            SimpleType::Atom(_) => 1,
            SimpleType::Arrow(a, b) => 1 + a.size() + b.size(),
        }
    }

    fn atoms_into(&self, out: &mut Vec<String>) {
        match self {
            SimpleType::Atom(a) => {
                if !out.contains(a) {
                    out.push(a.clone());
                }
            }
            SimpleType::Arrow(a, b) => {
                a.atoms_into(out);
                b.atoms_into(out);
            }
        }
    }

    /// Atoms in order of first occurrence.
    pub fn atoms(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.atoms_into(&mut out);
        out
    }

    /// Equal up to a bijective renaming of atoms.
    pub fn alpha_eq(&self, other: &SimpleType) -> bool {
        fn go<'a>(s: &'a SimpleType, t: &'a SimpleType, fw: &mut HashMap<&'a str, &'a str>, bw: &mut HashMap<&'a str, &'a str>) -> bool {
            match (s, t) {
                (SimpleType::Atom(a), SimpleType::Atom(b)) => {
                    *fw.entry(a).or_insert(b) == b.as_str() && *bw.entry(b).or_insert(a) == a.as_str()
                }
                (SimpleType::Arrow(a, b), SimpleType::Arrow(c, d)) => go(a, c, fw, bw) && go(b, d, fw, bw),
                _ => false,
            }
        }
        go(self, other, &mut HashMap::new(), &mut HashMap::new())
    }

    /// Whether `specific` is a substitution instance of `self`.
    pub fn generalizes(&self, specific: &SimpleType) -> bool {
        fn go<'a>(g: &'a SimpleType, s: &'a SimpleType, sub: &mut HashMap<&'a str, &'a SimpleType>) -> bool {
            match (g, s) {
                (SimpleType::Atom(a), _) => match sub.get(a.as_str()) {
                    Some(t) => *t == s,
                    None => {
                        sub.insert(a, s);
                        true
                    }
                },
                (SimpleType::Arrow(a, b), SimpleType::Arrow(c, d)) => go(a, c, sub) && go(b, d, sub),
                _ => false,
            }
        }
        go(self, specific, &mut HashMap::new())
    }

    /// Rename atoms to `a`, `b`, ... in order of first occurrence.
    pub fn canonical(&self) -> SimpleType {
        let names: HashMap<String, String> =
            self.atoms().into_iter().enumerate().map(|(i, a)| (a, atom_name(i))).collect();
        self.rename(&names)
    }

    fn rename(&self, names: &HashMap<String, String>) -> SimpleType {
        match self {
            SimpleType::Atom(a) => SimpleType::Atom(names.get(a).cloned().unwrap_or_else(|| a.clone())),
            SimpleType::Arrow(a, b) => SimpleType::arrow(a.rename(names), b.rename(names)),
        }
    }
}

fn atom_name(i: usize) -> String {
    let letter = (b'a' + (i % 26) as u8) as char;
    if i < 26 {
        letter.to_string()
    } else {
        format!("{letter}{}", i / 26)
    }
}

impl fmt::Display for SimpleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimpleType::Atom(a) => write!(f, "{a}"),
            SimpleType::Arrow(a, b) => match **a {
                SimpleType::Arrow(..) => write!(f, "({a}) -> {b}"),
                SimpleType::Atom(_) => write!(f, "{a} -> {b}"),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("type syntax error at column {col}: {message}")]
pub struct TypeParseError {
    pub col: usize,
    pub message: String,
}

/// Parse `a`, `t -> t` (right-associative, also `=>` and `⇒`) with parentheses.
pub fn parse_type(text: &str) -> Result<SimpleType, TypeParseError> {
    let mut p = TypeParser { chars: text.chars().collect(), pos: 0 };
    let t = p.arrow()?;
    p.skip_ws();
    if p.pos < p.chars.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(t)
}

impl FromStr for SimpleType {
    type Err = TypeParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_type(s)
    }
}

struct TypeParser {
    chars: Vec<char>,
    pos: usize,
}

impl TypeParser {
    fn error(&self, message: &str) -> TypeParseError {
        TypeParseError { col: self.pos + 1, message: message.to_owned() }
    }

    fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn eat_arrow(&mut self) -> bool {
        self.skip_ws();
        let rest: String = self.chars[self.pos..].iter().take(2).collect();
        for tok in ["->", "=>", "⇒", "→"] {
            if rest.starts_with(tok) {
                self.pos += tok.chars().count();
                return true;
            }
        }
        false
    }

    fn arrow(&mut self) -> Result<SimpleType, TypeParseError> {
        let dom = self.atom()?;
        if self.eat_arrow() {
            Ok(SimpleType::arrow(dom, self.arrow()?))
        } else {
            Ok(dom)
        }
    }

    fn atom(&mut self) -> Result<SimpleType, TypeParseError> {
        self.skip_ws();
        match self.chars.get(self.pos) {
            Some('(') => {
                self.pos += 1;
                let t = self.arrow()?;
                self.skip_ws();
                if self.chars.get(self.pos) != Some(&')') {
                    return Err(self.error("expected `)`"));
                }
                self.pos += 1;
                Ok(t)
            }
            Some(c) if c.is_alphabetic() || *c == '_' => {
                let start = self.pos;
                while self.chars.get(self.pos).is_some_and(|c| c.is_alphanumeric() || *c == '_' || *c == '\'') {
                    self.pos += 1;
                }
                Ok(SimpleType::Atom(self.chars[start..self.pos].iter().collect()))
            }
            _ => Err(self.error("expected a type")),
        }
    }
}

/// Γ: free variable names mapped to types.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TypeEnv {
    bindings: BTreeMap<String, SimpleType>,
}

impl TypeEnv {
    pub fn new() -> Self {
        Self::default()
    }

    /// Bind `name`, replacing an earlier binding of the same name.
    pub fn bind(mut self, name: &str, ty: SimpleType) -> Self {
        self.bindings.insert(name.to_owned(), ty);
        self
    }

    pub fn get(&self, name: &str) -> Option<&SimpleType> {
        self.bindings.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &SimpleType)> {
        self.bindings.iter()
    }

    /// Parse `x:t, y:t -> t`. Commas inside parentheses are not separators.
    pub fn parse(text: &str) -> Result<Self, TypeParseError> {
        let mut env = TypeEnv::new();
        let mut depth = 0i32;
        let mut start = 0;
        let mut parts = Vec::new();
        for (i, c) in text.char_indices() {
            match c {
                '(' => depth += 1,
                ')' => depth -= 1,
                ',' if depth == 0 => {
                    parts.push((start, &text[start..i]));
                    start = i + 1;
                }
                _ => {}
            }
        }
        parts.push((start, &text[start..]));
        for (offset, part) in parts {
            if part.trim().is_empty() {
                continue;
            }
            let (name, ty) = part.split_once(':').ok_or(TypeParseError {
                col: offset + 1,
                message: "expected `name : type`".into(),
            })?;
            let ty = parse_type(ty).map_err(|e| TypeParseError {
                col: e.col + offset + name.len() + 1,
                message: e.message,
            })?;
            env = env.bind(name.trim(), ty);
        }
        Ok(env)
    }
}

impl fmt::Display for TypeEnv {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.bindings.iter().map(|(x, t)| format!("{x}:{t}")).collect();
        write!(f, "{}", parts.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("at {position}: expected {expected}, found {found}")]
    UnificationFailure { position: Position, expected: SimpleType, found: SimpleType },
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
}

impl TypeError {
    /// A unification failure between an atom and a larger type containing it.
    pub fn is_occurs_check(&self) -> bool {
        match self {
            TypeError::UnificationFailure { expected, found, .. } => {
                let inside = |a: &SimpleType, b: &SimpleType| {
                    matches!(a, SimpleType::Atom(n) if b != a && b.atoms().contains(n))
                };
                inside(expected, found) || inside(found, expected)
            }
            TypeError::UnboundVariable(_) => false,
        }
    }
}

/// Types with unification variables. Atoms from the environment are rigid.
#[derive(Clone, Debug, PartialEq, Eq)]
enum Ty {
    Rigid(String),
    Meta(usize),
    Arrow(Box<Ty>, Box<Ty>),
}

impl Ty {
    fn from_simple(t: &SimpleType) -> Ty {
        match t {
            SimpleType::Atom(a) => Ty::Rigid(a.clone()),
            SimpleType::Arrow(a, b) => Ty::Arrow(Box::new(Ty::from_simple(a)), Box::new(Ty::from_simple(b))),
        }
    }
}

struct Unifier {
    subst: Vec<Option<Ty>>,
}

impl Unifier {
    fn fresh(&mut self) -> Ty {
        self.subst.push(None);
        Ty::Meta(self.subst.len() - 1)
    }

    fn resolve(&self, t: &Ty) -> Ty {
        match t {
            Ty::Meta(i) => match &self.subst[*i] {
                Some(u) => self.resolve(u),
                None => t.clone(),
            },
            Ty::Arrow(a, b) => Ty::Arrow(Box::new(self.resolve(a)), Box::new(self.resolve(b))),
            Ty::Rigid(_) => t.clone(),
        }
    }

    fn occurs(&self, i: usize, t: &Ty) -> bool {
        match t {
            Ty::Meta(j) => match &self.subst[*j] {
                Some(u) => self.occurs(i, u),
                None => i == *j,
            },
            Ty::Arrow(a, b) => self.occurs(i, a) || self.occurs(i, b),
            Ty::Rigid(_) => false,
        }
    }

    fn unify(&mut self, s: &Ty, t: &Ty) -> bool {
        let (s, t) = (self.shallow(s), self.shallow(t));
        match (&s, &t) {
            (Ty::Meta(i), Ty::Meta(j)) if i == j => true,
            (Ty::Meta(i), _) => self.bind(*i, &t),
            (_, Ty::Meta(j)) => self.bind(*j, &s),
            (Ty::Rigid(a), Ty::Rigid(b)) => a == b,
            (Ty::Arrow(a, b), Ty::Arrow(c, d)) => self.unify(a, c) && self.unify(b, d),
            _ => false,
        }
    }

    fn bind(&mut self, i: usize, t: &Ty) -> bool {
        if self.occurs(i, t) {
            return false;
        }
        self.subst[i] = Some(t.clone());
        true
    }

    fn shallow(&self, t: &Ty) -> Ty {
        match t {
            Ty::Meta(i) => match &self.subst[*i] {
                Some(u) => self.shallow(u),
                None => t.clone(),
            },
            _ => t.clone(),
        }
    }
}

/// Converts resolved types to simple types, naming unification variables
/// with atoms that avoid the environment's atoms.
struct Namer {
    names: HashMap<usize, String>,
    taken: Vec<String>,
    next: usize,
}

impl Namer {
    fn new(env: &TypeEnv) -> Self {
        let mut taken = Vec::new();
        for (_, t) in env.iter() {
            t.atoms_into(&mut taken);
        }
        Namer { names: HashMap::new(), taken, next: 0 }
    }

    fn name(&mut self, t: &Ty) -> SimpleType {
        match t {
            Ty::Rigid(a) => SimpleType::Atom(a.clone()),
            Ty::Meta(i) => {
                if let Some(n) = self.names.get(i) {
                    return SimpleType::Atom(n.clone());
                }
                let n = loop {
                    let candidate = atom_name(self.next);
                    self.next += 1;
                    if !self.taken.contains(&candidate) {
                        break candidate;
                    }
                };
                self.names.insert(*i, n.clone());
                SimpleType::Atom(n)
            }
            Ty::Arrow(a, b) => SimpleType::arrow(self.name(a), self.name(b)),
        }
    }
}

struct Infer<'e> {
    env: &'e TypeEnv,
    u: Unifier,
    bound: HashMap<Var, Ty>,
}

/// A unification failure before naming.
struct Clash {
    position: Position,
    expected: Ty,
    found: Ty,
}

impl Infer<'_> {
    fn go<A: Annot>(&mut self, t: &Node<A>, pos: &mut Position) -> Result<Ty, Result<Clash, TypeError>> {
        match t {
            Node::Var(x) => match self.bound.get(x) {
                Some(ty) => Ok(ty.clone()),
                None => match self.env.get(x.name()) {
                    Some(ty) => Ok(Ty::from_simple(ty)),
                    None => Err(Err(TypeError::UnboundVariable(x.name().to_owned()))),
                },
            },
            Node::Abs(x, body) => {
                let dom = self.u.fresh();
                let prev = self.bound.insert(x.clone(), dom.clone());
                pos.push(Dir::Body);
                let cod = self.go(body, pos);
                pos.pop();
                crate::syntax::term::restore(&mut self.bound, x.clone(), prev);
                Ok(Ty::Arrow(Box::new(dom), Box::new(cod?)))
            }
            Node::App(f, a, _) => {
                pos.push(Dir::Fun);
                let tf = self.go(f, pos);
                pos.pop();
                let tf = tf?;
                pos.push(Dir::Arg);
                let ta = self.go(a, pos);
                pos.pop();
                let ta = ta?;
                let cod = self.u.fresh();
                let expected = Ty::Arrow(Box::new(ta.clone()), Box::new(cod.clone()));
                match self.u.shallow(&tf) {
                    Ty::Arrow(dom, _) => {
                        if !self.u.unify(&tf, &expected) {
                            return Err(Ok(Clash { position: pos.child(Dir::Arg), expected: *dom, found: ta }));
                        }
                    }
                    _ => {
                        if !self.u.unify(&tf, &expected) {
                            return Err(Ok(Clash { position: pos.child(Dir::Fun), expected, found: tf }));
                        }
                    }
                }
                Ok(cod)
            }
            Node::Choice(_, l, r) => {
                pos.push(Dir::Left);
                let tl = self.go(l, pos);
                pos.pop();
                let tl = tl?;
                pos.push(Dir::Right);
                let tr = self.go(r, pos);
                pos.pop();
                let tr = tr?;
                if !self.u.unify(&tl, &tr) {
                    return Err(Ok(Clash { position: pos.child(Dir::Right), expected: tl, found: tr }));
                }
                Ok(tl)
            }
            Node::Gen(_, body) => {
                pos.push(Dir::Body);
                let r = self.go(body, pos);
                pos.pop();
                r
            }
        }
    }
}

/// Principal type of `t` under `env`, with fresh atoms named `a`, `b`, ...
/// avoiding the atoms of `env`.
pub fn infer<A: Annot>(env: &TypeEnv, t: &Node<A>) -> Result<SimpleType, TypeError> {
    let mut inf = Infer { env, u: Unifier { subst: Vec::new() }, bound: HashMap::new() };
    let mut namer = Namer::new(env);
    match inf.go(t, &mut Position::root()) {
        Ok(ty) => Ok(namer.name(&inf.u.resolve(&ty))),
        Err(Err(e)) => Err(e),
        Err(Ok(c)) => {
            let expected = namer.name(&inf.u.resolve(&c.expected));
            let found = namer.name(&inf.u.resolve(&c.found));
            Err(TypeError::UnificationFailure { position: c.position, expected, found })
        }
    }
}

/// `Γ ⊢ t : ty`. Derivable exactly when `ty` is an instance of the principal
/// type with the environment's atoms held fixed.
pub fn check<A: Annot>(env: &TypeEnv, t: &Node<A>, ty: &SimpleType) -> bool {
    let mut inf = Infer { env, u: Unifier { subst: Vec::new() }, bound: HashMap::new() };
    match inf.go(t, &mut Position::root()) {
        Ok(principal) => inf.u.unify(&principal, &Ty::from_simple(ty)),
        Err(_) => false,
    }
}

/// Derivation search with argument types drawn from `candidates`; an
/// independent reference for [`check`] on small terms.
pub fn check_bounded<A: Annot>(env: &TypeEnv, t: &Node<A>, ty: &SimpleType, candidates: &[SimpleType]) -> bool {
    fn go<A: Annot>(
        env: &TypeEnv,
        bound: &mut HashMap<Var, SimpleType>,
        t: &Node<A>,
        ty: &SimpleType,
        cands: &[SimpleType],
    ) -> bool {
        match t {
            Node::Var(x) => bound.get(x).or_else(|| env.get(x.name())) == Some(ty),
            Node::Abs(x, body) => match ty {
                SimpleType::Arrow(dom, cod) => {
                    let prev = bound.insert(x.clone(), (**dom).clone());
                    let ok = go(env, bound, body, cod, cands);
                    crate::syntax::term::restore(bound, x.clone(), prev);
                    ok
                }
                SimpleType::Atom(_) => false,
            },
            Node::App(f, a, _) => cands.iter().any(|dom| {
                go(env, bound, a, dom, cands)
                    && go(env, bound, f, &SimpleType::arrow(dom.clone(), ty.clone()), cands)
            }),
            Node::Choice(_, l, r) => go(env, bound, l, ty, cands) && go(env, bound, r, ty, cands),
            Node::Gen(_, body) => go(env, bound, body, ty, cands),
        }
    }
    go(env, &mut HashMap::new(), t, ty, candidates)
}

/// Every type of at most `max_size` nodes over the given atoms.
pub fn types_up_to(atoms: &[&str], max_size: usize) -> Vec<SimpleType> {
    let mut by_size: Vec<Vec<SimpleType>> = vec![Vec::new(); max_size + 1];
    if max_size >= 1 {
        by_size[1] = atoms.iter().map(|a| SimpleType::atom(a)).collect();
    }
    for n in 3..=max_size {
        let mut out = Vec::new();
        for l in 1..n - 1 {
            let r = n - 1 - l;
            for a in &by_size[l] {
                for b in &by_size[r] {
                    out.push(SimpleType::arrow(a.clone(), b.clone()));
                }
            }
        }
        by_size[n] = out;
    }
    by_size.into_iter().flatten().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse, parse_open};

    fn ty(s: &str) -> SimpleType {
        parse_type(s).unwrap()
    }

    #[test]
    fn type_syntax_round_trips() {
        for s in ["a", "a -> b", "(a -> b) -> a -> b", "((a -> a) -> a) -> a"] {
            assert_eq!(ty(s).to_string(), s);
        }
        assert_eq!(ty("a => b ⇒ c"), ty("a -> (b -> c)"));
        assert!(parse_type("a ->").is_err());
        assert!(parse_type("(a").is_err());
    }

    #[test]
    fn checking() {
        let env = TypeEnv::new();
        assert!(check(&env, &parse(r"\x.x").unwrap(), &ty("a -> a")));
        assert!(check(&env, &parse(r"\x.x").unwrap(), &ty("(b -> c) -> b -> c")));
        assert!(!check(&env, &parse(r"\x.x").unwrap(), &ty("a -> b")));
        let env = TypeEnv::new().bind("x", ty("t")).bind("y", ty("t"));
        assert!(check(&env, &parse_open("x +[a] y").unwrap(), &ty("t")));
        assert!(!check(&env, &parse_open("x +[a] y").unwrap(), &ty("u")));
        for t in types_up_to(&["a", "b"], 5) {
            assert!(!check(&TypeEnv::new(), &parse(r"\x.x x").unwrap(), &t));
        }
    }

    #[test]
    fn inference() {
        let env = TypeEnv::new();
        assert_eq!(infer(&env, &parse(r"\x.\y.x").unwrap()).unwrap(), ty("a -> b -> a"));
        let t = parse(r"!f.\x.(x +[f] \y.y)").unwrap();
        assert_eq!(infer(&env, &t).unwrap(), ty("(a -> a) -> a -> a"));
        match infer(&env, &parse(r"\x.x x").unwrap()) {
            Err(TypeError::UnificationFailure { .. }) => {}
            other => panic!("{other:?}"),
        }
        assert_eq!(
            infer(&env, &parse("z").unwrap()),
            Err(TypeError::UnboundVariable("z".into()))
        );
        let env = TypeEnv::new().bind("f", ty("a -> a"));
        assert_eq!(infer(&env, &parse(r"\x.f x").unwrap()).unwrap(), ty("a -> a"));
        let env = TypeEnv::new().bind("f", ty("a"));
        assert_eq!(infer(&env, &parse(r"\x.x").unwrap()).unwrap(), ty("b -> b"));
    }

    #[test]
    fn failures_are_located() {
        let env = TypeEnv::new().bind("f", ty("a -> a")).bind("y", ty("b"));
        match infer(&env, &parse("f y").unwrap()) {
            Err(TypeError::UnificationFailure { position, expected, found }) => {
                assert_eq!(position.to_string(), "root.arg");
                assert_eq!((expected, found), (ty("a"), ty("b")));
            }
            other => panic!("{other:?}"),
        }
        match infer(&env, &parse_open("f +[a] y").unwrap()) {
            Err(TypeError::UnificationFailure { position, .. }) => assert_eq!(position.to_string(), "root.right"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn infer_and_bounded_search_agree() {
        let cands = types_up_to(&["a", "b"], 5);
        let env = TypeEnv::new();
        for s in [r"\x.x", r"\x.\y.x", r"\x.x x", r"\f.\x.f (f x)", r"(\x.x) (\y.y)", r"\x.\y.(x +[a] y)"] {
            let t = parse_open(s).unwrap();
            match infer(&env, &t) {
                Ok(principal) => {
                    for c in &cands {
                        let expected = principal.generalizes(c);
                        assert_eq!(check(&env, &t, c), expected, "{s} : {c}");
                        assert_eq!(check_bounded(&env, &t, c, &cands), expected, "{s} : {c}");
                    }
                }
                Err(_) => {
                    for c in &cands {
                        assert!(!check_bounded(&env, &t, c, &cands), "{s} : {c}");
                    }
                }
            }
        }
    }

    #[test]
    fn type_comparisons() {
        assert!(ty("a -> b").alpha_eq(&ty("c -> d")));
        assert!(!ty("a -> a").alpha_eq(&ty("c -> d")));
        assert!(ty("a -> b").generalizes(&ty("(c -> c) -> c")));
        assert!(!ty("a -> a").generalizes(&ty("b -> c")));
        assert_eq!(ty("x -> y -> x").canonical(), ty("a -> b -> a"));
        assert_eq!(types_up_to(&["a"], 3).len(), 2);
    }
}
