use std::fmt;
use std::str::FromStr;

/// One step from a node to one of its children.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dir {
    Body,
    Fun,
    Arg,
    Left,
    Right,
}

impl Dir {
    pub fn as_str(self) -> &'static str {
        match self {
            Dir::Body => "body",
            Dir::Fun => "fun",
            Dir::Arg => "arg",
            Dir::Left => "left",
            Dir::Right => "right",
        }
    }
}

/// A path from the root, printed as `root.fun.arg`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Position(Vec<Dir>);

impl Position {
    pub fn root() -> Self {
        Position(Vec::new())
    }

    pub fn push(&mut self, d: Dir) {
        self.0.push(d)
    }

    pub fn pop(&mut self) -> Option<Dir> {
        self.0.pop()
    }

    pub fn child(&self, d: Dir) -> Self {
        let mut p = self.clone();
        p.push(d);
        p
    }

    pub fn join(&self, other: &Position) -> Self {
        let mut p = self.clone();
        p.0.extend_from_slice(&other.0);
        p
    }

    pub fn as_slice(&self) -> &[Dir] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Dir> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_prefix_of(&self, other: &Position) -> bool {
        other.0.starts_with(&self.0)
    }
}

impl From<Vec<Dir>> for Position {
    fn from(v: Vec<Dir>) -> Self {
        Position(v)
    }
}

impl FromIterator<Dir> for Position {
    fn from_iter<I: IntoIterator<Item = Dir>>(iter: I) -> Self {
        Position(iter.into_iter().collect())
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("root")?;
        for d in &self.0 {
            write!(f, ".{}", d.as_str())?;
        }
        Ok(())
    }
}

impl FromStr for Position {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = s.split('.');
        if parts.next() != Some("root") {
            return Err(format!("position must start with `root`: {s}"));
        }
        parts
            .map(|p| match p {
                "body" => Ok(Dir::Body),
                "fun" => Ok(Dir::Fun),
                "arg" => Ok(Dir::Arg),
                "left" => Ok(Dir::Left),
                "right" => Ok(Dir::Right),
                other => Err(format!("unknown direction `{other}`")),
            })
            .collect()
    }
}
