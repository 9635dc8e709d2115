//! The golden corpus shipped with the tool.

/// How a golden file is produced from another one.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Golden {
    pub name: &'static str,
    pub contents: &'static str,
    /// Arguments (after `pel`) whose output is this file, with `{}` standing
    /// for the path of `from`. `None` for hand-written sources.
    pub command: Option<&'static [&'static str]>,
    pub from: Option<&'static str>,
}

macro_rules! golden {
    ($name:literal) => {
        Golden { name: $name, contents: include_str!(concat!("../goldens/", $name)), command: None, from: None }
    };
    ($name:literal, $from:literal, [$($arg:literal),*]) => {
        Golden {
            name: $name,
            contents: include_str!(concat!("../goldens/", $name)),
            command: Some(&[$($arg),*]),
            from: Some($from),
        }
    };
}

/// The embedded corpus: the introductory source term, its two translations,
/// their reductions and distributions.
pub fn golden_traces() -> &'static [Golden] {
    static GOLDENS: &[Golden] = &[
        golden!("intro.src"),
        golden!("omega.pel"),
        golden!("cbn_intro.pel", "intro.src", ["translate", "--to", "cbn", "{}"]),
        golden!("cbv_intro.pel", "intro.src", ["translate", "--to", "cbv", "{}"]),
        golden!("cbv_intro.trace", "cbv_intro.pel", ["reduce", "--strategy", "full", "--trace", "{}"]),
        golden!("cbn_intro.trace", "cbn_intro.pel", ["reduce", "--strategy", "full", "--trace", "{}"]),
        golden!("cbn_intro.dist", "cbn_intro.pel", ["dist", "{}"]),
        golden!("cbv_intro.dist", "cbv_intro.pel", ["dist", "{}"]),
    ];
    GOLDENS
}

/// Look up a golden file by name.
pub fn golden(name: &str) -> Option<&'static Golden> {
    golden_traces().iter().find(|g| g.name == name)
}
