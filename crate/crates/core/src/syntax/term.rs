use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, OnceLock};

use super::position::{Dir, Position};

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

pub(crate) fn fresh_id() -> u64 {
    NEXT_ID.fetch_add(1, Ordering::Relaxed)
}

/// Free names are interned so that every occurrence of a free `x` (or a free
/// label `a`) gets the same id, whichever term it was parsed into.
fn interned(kind: u8, name: &str) -> u64 {
    static TABLE: OnceLock<Mutex<HashMap<(u8, String), u64>>> = OnceLock::new();
    let mut table = TABLE
        .get_or_init(Default::default)
        .lock()
        .unwrap_or_else(|e| e.into_inner());
    *table
        .entry((kind, name.to_owned()))
        .or_insert_with(fresh_id)
}

macro_rules! ident_type {
    ($(#[$meta:meta])* $ty:ident, $kind:expr) => {
        $(#[$meta])*
        ///
        /// Identity (equality, hashing, ordering) is the numeric id alone. The
        /// display name is only used for printing, and `origin` remembers which
        /// binder this one was copied from when a rewrite duplicates a subterm.
        #[derive(Clone)]
        pub struct $ty {
            id: u64,
            origin: u64,
            name: Arc<str>,
        }

        impl $ty {
            /// A binder with a globally fresh id.
            pub fn fresh(name: &str) -> Self {
                let id = fresh_id();
                Self { id, origin: id, name: name.into() }
            }

            /// The free occurrence named `name`; equal to every other free `name`.
            pub fn free(name: &str) -> Self {
                let id = interned($kind, name);
                Self { id, origin: id, name: name.into() }
            }

            pub fn id(&self) -> u64 {
                self.id
            }

            pub fn origin(&self) -> u64 {
                self.origin
            }

            pub fn name(&self) -> &str {
                &self.name
            }

            /// Fresh id, same display name and origin (a duplicated copy).
            pub(crate) fn copy_fresh(&self) -> Self {
                Self { id: fresh_id(), origin: self.origin, name: self.name.clone() }
            }

            /// Fresh id and fresh origin (an unrelated binder that happens to
            /// share the display name).
            pub(crate) fn reborn(&self) -> Self {
                let id = fresh_id();
                Self { id, origin: id, name: self.name.clone() }
            }
        }

        impl PartialEq for $ty {
            fn eq(&self, other: &Self) -> bool {
                self.id == other.id
            }
        }

        impl Eq for $ty {}

        impl Hash for $ty {
            fn hash<H: Hasher>(&self, state: &mut H) {
                self.id.hash(state)
            }
        }

        impl PartialOrd for $ty {
            fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
                Some(self.cmp(other))
            }
        }

        impl Ord for $ty {
            fn cmp(&self, other: &Self) -> std::cmp::Ordering {
                self.id.cmp(&other.id)
            }
        }

        impl fmt::Debug for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}#{}", self.name, self.id)
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.name)
            }
        }
    };
}

ident_type!(
    /// A term variable.
    Var,
    0
);
ident_type!(
    /// An event label, bound by a generator `!a` and consumed by choices `+[a]`.
    Label,
    1
);

/// Per-application annotation. Plain terms carry `()`; labeled terms carry a
/// `bool` redex mark.
pub trait Annot: Clone + PartialEq + Default + fmt::Debug + Send + Sync + 'static {
    fn is_marked(&self) -> bool {
        false
    }
}

impl Annot for () {}

impl Annot for bool {
    fn is_marked(&self) -> bool {
        *self
    }
}

/// The five-constructor syntax tree, generic over the annotation carried by
/// application nodes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Node<A = ()> {
    Var(Var),
    Abs(Var, Box<Node<A>>),
    App(Box<Node<A>>, Box<Node<A>>, A),
    Choice(Label, Box<Node<A>>, Box<Node<A>>),
    Gen(Label, Box<Node<A>>),
}

/// A term of the calculus.
pub type Term = Node<()>;

impl<A: Annot> Node<A> {
    pub fn var(v: Var) -> Self {
        Node::Var(v)
    }

    pub fn abs(v: Var, body: Self) -> Self {
        Node::Abs(v, Box::new(body))
    }

    pub fn app(fun: Self, arg: Self) -> Self {
        Node::App(Box::new(fun), Box::new(arg), A::default())
    }

    pub fn app_with(fun: Self, arg: Self, annot: A) -> Self {
        Node::App(Box::new(fun), Box::new(arg), annot)
    }

    pub fn choice(label: Label, left: Self, right: Self) -> Self {
        Node::Choice(label, Box::new(left), Box::new(right))
    }

    pub fn gen(label: Label, body: Self) -> Self {
        Node::Gen(label, Box::new(body))
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        match self {
            Node::Var(_) => 1,
            Node::Abs(_, b) | Node::Gen(_, b) => 1 + b.size(),
            Node::App(f, a, _) => 1 + f.size() + a.size(),
            Node::Choice(_, l, r) => 1 + l.size() + r.size(),
        }
    }

    pub fn is_beta_redex(&self) -> bool {
        matches!(self, Node::App(f, _, _) if matches!(**f, Node::Abs(..)))
    }

    /// Children paired with the direction that reaches them, left to right.
    pub fn children(&self) -> Vec<(Dir, &Node<A>)> {
        match self {
            Node::Var(_) => vec![],
            Node::Abs(_, b) | Node::Gen(_, b) => vec![(Dir::Body, &**b)],
            Node::App(f, a, _) => vec![(Dir::Fun, &**f), (Dir::Arg, &**a)],
            Node::Choice(_, l, r) => vec![(Dir::Left, &**l), (Dir::Right, &**r)],
        }
    }

    pub fn child(&self, dir: Dir) -> Option<&Node<A>> {
        match (self, dir) {
            (Node::Abs(_, b), Dir::Body) | (Node::Gen(_, b), Dir::Body) => Some(b),
            (Node::App(f, _, _), Dir::Fun) => Some(f),
            (Node::App(_, a, _), Dir::Arg) => Some(a),
            (Node::Choice(_, l, _), Dir::Left) => Some(l),
            (Node::Choice(_, _, r), Dir::Right) => Some(r),
            _ => None,
        }
    }

    pub fn subterm(&self, pos: &Position) -> Option<&Node<A>> {
        pos.iter().try_fold(self, |t, &d| t.child(d))
    }

    /// Copy of `self` with the subterm at `pos` replaced. `None` if the
    /// position is not valid.
    pub fn replace_at(&self, pos: &Position, new: Node<A>) -> Option<Node<A>> {
        self.replace_path(pos.as_slice(), new)
    }

    fn replace_path(&self, path: &[Dir], new: Node<A>) -> Option<Node<A>> {
        let Some((&d, rest)) = path.split_first() else {
            return Some(new);
        };
        Some(match (self, d) {
            (Node::Abs(v, b), Dir::Body) => Node::Abs(v.clone(), Box::new(b.replace_path(rest, new)?)),
            (Node::Gen(l, b), Dir::Body) => Node::Gen(l.clone(), Box::new(b.replace_path(rest, new)?)),
            (Node::App(f, a, m), Dir::Fun) => {
                Node::App(Box::new(f.replace_path(rest, new)?), a.clone(), m.clone())
            }
            (Node::App(f, a, m), Dir::Arg) => {
                Node::App(f.clone(), Box::new(a.replace_path(rest, new)?), m.clone())
            }
            (Node::Choice(l, x, y), Dir::Left) => {
                Node::Choice(l.clone(), Box::new(x.replace_path(rest, new)?), y.clone())
            }
            (Node::Choice(l, x, y), Dir::Right) => {
                Node::Choice(l.clone(), x.clone(), Box::new(y.replace_path(rest, new)?))
            }
            _ => return None,
        })
    }

    /// All positions in pre-order (outermost first, left before right).
    pub fn positions(&self) -> Vec<Position> {
        let mut out = Vec::new();
        let mut path = Position::root();
        self.collect_positions(&mut path, &mut out);
        out
    }

    fn collect_positions(&self, path: &mut Position, out: &mut Vec<Position>) {
        out.push(path.clone());
        for (d, c) in self.children() {
            path.push(d);
            c.collect_positions(path, out);
            path.pop();
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        let mut bound = HashSet::new();
        self.collect_free_vars(&mut bound, &mut out);
        out
    }

    fn collect_free_vars(&self, bound: &mut HashSet<u64>, out: &mut BTreeSet<Var>) {
        match self {
            Node::Var(v) => {
                if !bound.contains(&v.id()) {
                    out.insert(v.clone());
                }
            }
            Node::Abs(v, b) => {
                let fresh = bound.insert(v.id());
                b.collect_free_vars(bound, out);
                if fresh {
                    bound.remove(&v.id());
                }
            }
            Node::Gen(_, b) => b.collect_free_vars(bound, out),
            Node::App(f, a, _) => {
                f.collect_free_vars(bound, out);
                a.collect_free_vars(bound, out);
            }
            Node::Choice(_, l, r) => {
                l.collect_free_vars(bound, out);
                r.collect_free_vars(bound, out);
            }
        }
    }

    /// fl(M): labels used by a choice without an enclosing generator.
    pub fn free_labels(&self) -> BTreeSet<Label> {
        let mut out = BTreeSet::new();
        let mut bound = HashSet::new();
        self.collect_free_labels(&mut bound, &mut out);
        out
    }

    fn collect_free_labels(&self, bound: &mut HashSet<u64>, out: &mut BTreeSet<Label>) {
        match self {
            Node::Var(_) => {}
            Node::Abs(_, b) => b.collect_free_labels(bound, out),
            Node::Gen(a, b) => {
                let fresh = bound.insert(a.id());
                b.collect_free_labels(bound, out);
                if fresh {
                    bound.remove(&a.id());
                }
            }
            Node::App(f, x, _) => {
                f.collect_free_labels(bound, out);
                x.collect_free_labels(bound, out);
            }
            Node::Choice(a, l, r) => {
                if !bound.contains(&a.id()) {
                    out.insert(a.clone());
                }
                l.collect_free_labels(bound, out);
                r.collect_free_labels(bound, out);
            }
        }
    }

    pub fn is_label_closed(&self) -> bool {
        self.free_labels().is_empty()
    }

    /// Whether label `a` occurs free (as a choice not under a rebinding `!a`).
    pub fn has_free_label(&self, a: &Label) -> bool {
        match self {
            Node::Var(_) => false,
            Node::Abs(_, b) => b.has_free_label(a),
            Node::Gen(b, body) => b != a && body.has_free_label(a),
            Node::App(f, x, _) => f.has_free_label(a) || x.has_free_label(a),
            Node::Choice(b, l, r) => b == a || l.has_free_label(a) || r.has_free_label(a),
        }
    }

    pub fn has_free_var(&self, x: &Var) -> bool {
        match self {
            Node::Var(y) => y == x,
            Node::Abs(y, b) => y != x && b.has_free_var(x),
            Node::Gen(_, b) => b.has_free_var(x),
            Node::App(f, a, _) => f.has_free_var(x) || a.has_free_var(x),
            Node::Choice(_, l, r) => l.has_free_var(x) || r.has_free_var(x),
        }
    }

    /// Drop all annotations.
    pub fn erase(&self) -> Term {
        self.map_annot(&mut |_| ())
    }

    pub fn map_annot<B: Annot>(&self, f: &mut impl FnMut(&A) -> B) -> Node<B> {
        match self {
            Node::Var(v) => Node::Var(v.clone()),
            Node::Abs(v, b) => Node::Abs(v.clone(), Box::new(b.map_annot(f))),
            Node::Gen(l, b) => Node::Gen(l.clone(), Box::new(b.map_annot(f))),
            Node::App(x, y, m) => {
                let m = f(m);
                Node::App(Box::new(x.map_annot(f)), Box::new(y.map_annot(f)), m)
            }
            Node::Choice(l, x, y) => Node::Choice(l.clone(), Box::new(x.map_annot(f)), Box::new(y.map_annot(f))),
        }
    }

    /// Every binder in `self`, with variables and labels kept apart.
    pub fn binders(&self) -> (Vec<Var>, Vec<Label>) {
        let mut vars = Vec::new();
        let mut labels = Vec::new();
        self.walk(&mut |t| match t {
            Node::Abs(v, _) => vars.push(v.clone()),
            Node::Gen(l, _) => labels.push(l.clone()),
            _ => {}
        });
        (vars, labels)
    }

    /// Pre-order traversal.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Node<A>)) {
        f(self);
        match self {
            Node::Var(_) => {}
            Node::Abs(_, b) | Node::Gen(_, b) => b.walk(f),
            Node::App(x, y, _) | Node::Choice(_, x, y) => {
                x.walk(f);
                y.walk(f);
            }
        }
    }

    /// The freshness invariant: every binder has its own id and no bound id
    /// also occurs free.
    pub fn has_distinct_binders(&self) -> bool {
        let (vars, labels) = self.binders();
        let var_ids: HashSet<u64> = vars.iter().map(Var::id).collect();
        let label_ids: HashSet<u64> = labels.iter().map(Label::id).collect();
        var_ids.len() == vars.len()
            && label_ids.len() == labels.len()
            && self.free_vars().iter().all(|v| !var_ids.contains(&v.id()))
            && self.free_labels().iter().all(|l| !label_ids.contains(&l.id()))
    }

    /// Copy with every binder renamed to a fresh id. With `keep_origin`, the
    /// copies remember which binder they came from.
    pub fn refreshed(&self, keep_origin: bool) -> Self {
        let mut vars = HashMap::new();
        let mut labels = HashMap::new();
        self.refresh_with(keep_origin, &mut vars, &mut labels)
    }

    fn refresh_with(
        &self,
        keep_origin: bool,
        vars: &mut HashMap<u64, Var>,
        labels: &mut HashMap<u64, Label>,
    ) -> Self {
        match self {
            Node::Var(v) => Node::Var(vars.get(&v.id()).cloned().unwrap_or_else(|| v.clone())),
            Node::Abs(v, b) => {
                let nv = if keep_origin { v.copy_fresh() } else { v.reborn() };
                let prev = vars.insert(v.id(), nv.clone());
                let body = b.refresh_with(keep_origin, vars, labels);
                restore(vars, v.id(), prev);
                Node::Abs(nv, Box::new(body))
            }
            Node::Gen(l, b) => {
                let nl = if keep_origin { l.copy_fresh() } else { l.reborn() };
                let prev = labels.insert(l.id(), nl.clone());
                let body = b.refresh_with(keep_origin, vars, labels);
                restore(labels, l.id(), prev);
                Node::Gen(nl, Box::new(body))
            }
            Node::App(f, a, m) => Node::App(
                Box::new(f.refresh_with(keep_origin, vars, labels)),
                Box::new(a.refresh_with(keep_origin, vars, labels)),
                m.clone(),
            ),
            Node::Choice(l, x, y) => Node::Choice(
                labels.get(&l.id()).cloned().unwrap_or_else(|| l.clone()),
                Box::new(x.refresh_with(keep_origin, vars, labels)),
                Box::new(y.refresh_with(keep_origin, vars, labels)),
            ),
        }
    }

    /// Head and arguments of an application spine: `h a1 .. an` gives
    /// `(h, [a1, .., an])`.
    pub fn spine(&self) -> (&Node<A>, Vec<&Node<A>>) {
        let mut args = Vec::new();
        let mut head = self;
        while let Node::App(f, a, _) = head {
            args.push(&**a);
            head = f;
        }
        args.reverse();
        (head, args)
    }
}

pub(crate) fn restore<K: Hash + Eq, V>(map: &mut HashMap<K, V>, key: K, prev: Option<V>) {
    match prev {
        Some(p) => {
            map.insert(key, p);
        }
        None => {
            map.remove(&key);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_names_are_interned() {
        assert_eq!(Var::free("x"), Var::free("x"));
        assert_ne!(Var::free("x"), Var::free("y"));
        assert_ne!(Var::fresh("x"), Var::free("x"));
        assert_eq!(Label::free("a"), Label::free("a"));
    }

    #[test]
    fn refresh_keeps_free_names_and_renames_binders() {
        let x = Var::fresh("x");
        let a = Label::fresh("a");
        let y = Var::free("y");
        let t = Term::gen(a.clone(), Term::abs(x.clone(), Term::choice(a.clone(), Term::var(x.clone()), Term::var(y.clone()))));
        let r = t.refreshed(true);
        let Node::Gen(a2, body) = &r else { panic!() };
        assert_ne!(a2, &a);
        assert_eq!(a2.origin(), a.origin());
        let Node::Abs(x2, inner) = &**body else { panic!() };
        assert_ne!(x2, &x);
        assert_eq!(
            **inner,
            Term::choice(a2.clone(), Term::var(x2.clone()), Term::var(y))
        );
        assert!(r.has_distinct_binders());
    }

    #[test]
    fn replace_and_subterm_agree() {
        let t = Term::app(Term::var(Var::free("f")), Term::var(Var::free("x")));
        let pos: Position = [Dir::Arg].into_iter().collect();
        let r = t.replace_at(&pos, Term::var(Var::free("y"))).unwrap();
        assert_eq!(r.subterm(&pos), Some(&Term::var(Var::free("y"))));
        assert!(t.replace_at(&Position::from(vec![Dir::Body]), Term::var(Var::free("y"))).is_none());
    }
}
