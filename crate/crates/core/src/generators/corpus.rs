use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Expect {
    Sat,
    Unsat,
}

impl Expect {
    pub fn label(self) -> &'static str {
        match self {
            Expect::Sat => "SAT",
            Expect::Unsat => "UNSAT",
        }
    }
}

/// One corpus file: `#!key: value` header lines followed by a formula.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorpusEntry {
    pub file: String,
    pub name: String,
    pub expect: Option<Expect>,
    /// Values of `#!tags:` (comma separated) and `#!fragment:`.
    pub tags: Vec<String>,
    pub text: String,
}

impl CorpusEntry {
    pub fn has_tag(&self, t: &str) -> bool {
        self.tags.iter().any(|x| x == t)
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{file}: {msg}")]
    Malformed { file: String, msg: String },
    #[error("{0}: {1}")]
    Io(PathBuf, std::io::Error),
    #[error("{0}: no corpus files")]
    Empty(PathBuf),
}

pub fn parse_corpus_file(file: &str, text: &str) -> Result<CorpusEntry, CorpusError> {
    let bad = |msg: String| CorpusError::Malformed { file: file.to_string(), msg };
    let mut name = None;
    let mut expect = None;
    let mut tags = Vec::new();
    for line in text.lines() {
        let Some(h) = line.strip_prefix("#!") else { continue };
        let (k, v) = h.split_once(':').ok_or_else(|| bad(format!("bad header `{line}`")))?;
        let v = v.trim();
        match k.trim() {
            "name" => name = Some(v.to_string()),
            "expect" => {
                expect = Some(match v {
                    "SAT" => Expect::Sat,
                    "UNSAT" => Expect::Unsat,
                    _ => return Err(bad(format!("expected SAT or UNSAT, found `{v}`"))),
                })
            }
            "tags" => tags.extend(v.split(',').map(|t| t.trim().to_string()).filter(|t| !t.is_empty())),
            "fragment" => tags.push(v.to_string()),
            other => return Err(bad(format!("unknown header `{other}`"))),
        }
    }
    if text.lines().all(|l| l.trim().is_empty() || l.starts_with('#') || l.trim_start().starts_with("//")) {
        return Err(bad("no formula".into()));
    }
    let stem = Path::new(file).file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    Ok(CorpusEntry { file: file.to_string(), name: name.unwrap_or(stem), expect, tags, text: text.to_string() })
}

macro_rules! embed {
    ($($path:literal),* $(,)?) => {
        &[$(($path, include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/corpus/", $path)))),*]
    };
}

const APPLICATIONS: &[(&str, &str)] = embed![
    "applications/chain.tsl",
    "applications/filter.tsl",
    "applications/gamemodechooser.tsl",
    "applications/holding_arbiter.tsl",
    "applications/small_holding_arbiter.tsl",
    "applications/pass_through_arbiter.tsl",
    "applications/approx_pass_through_arbiter.tsl",
    "applications/inductive_assumption.tsl",
    "applications/one_of_two.tsl",
    "applications/one_of_three.tsl",
    "applications/injector.tsl",
    "applications/invariant_holding.tsl",
    "applications/scheduler.tsl",
];

const FRAGMENTS: &[(&str, &str)] = embed![
    "fragments/single_cell.tsl",
    "fragments/reachability.tsl",
];

const STRESS: &[(&str, &str)] = embed![
    "stress/count_to_input.goto",
    "stress/copy_and_dec.goto",
    "stress/loop_forever.goto",
];

fn load(files: &[(&str, &str)]) -> Result<Vec<CorpusEntry>, CorpusError> {
    files.iter().map(|(f, t)| parse_corpus_file(f, t)).collect()
}

/// The application benchmark corpus, in its canonical order.
pub fn load_corpus() -> Result<Vec<CorpusEntry>, CorpusError> {
    let v = load(APPLICATIONS)?;
    if let Some(e) = v.iter().find(|e| e.expect.is_none()) {
        return Err(CorpusError::Malformed { file: e.file.clone(), msg: "missing #!expect".into() });
    }
    Ok(v)
}

/// Satisfiable formulas of the single-cell and reachability fragments, tagged
/// `single-cell` or `reachability`. Files hold several formulas separated by
/// `---` lines; each section carries its own headers.
pub fn fragment_set() -> Result<Vec<CorpusEntry>, CorpusError> {
    let mut out = Vec::new();
    for (file, text) in FRAGMENTS {
        for (i, sec) in text.split("\n---\n").enumerate() {
            let mut e = parse_corpus_file(&format!("{file}#{i}"), sec)?;
            let fragment = Path::new(file).file_stem().unwrap().to_string_lossy().replace('_', "-");
            if !e.has_tag(&fragment) {
                e.tags.push(fragment);
            }
            out.push(e);
        }
    }
    Ok(out)
}

/// GOTO programs whose encodings are expected not to terminate in general.
/// Each entry's `text` is the program source.
pub fn stress_set() -> Result<Vec<CorpusEntry>, CorpusError> {
    load(STRESS)
}

/// Reads every `*.tsl` file of `dir` (non-recursive), sorted by file name.
pub fn load_corpus_dir(dir: &Path) -> Result<Vec<CorpusEntry>, CorpusError> {
    let rd = std::fs::read_dir(dir).map_err(|e| CorpusError::Io(dir.to_path_buf(), e))?;
    let mut paths = Vec::new();
    for ent in rd {
        let p = ent.map_err(|e| CorpusError::Io(dir.to_path_buf(), e))?.path();
        if p.extension().is_some_and(|x| x == "tsl") && p.is_file() {
            paths.push(p);
        }
    }
    paths.sort();
    if paths.is_empty() {
        return Err(CorpusError::Empty(dir.to_path_buf()));
    }
    paths
        .iter()
        .map(|p| {
            let text = std::fs::read_to_string(p).map_err(|e| CorpusError::Io(p.clone(), e))?;
            parse_corpus_file(&p.display().to_string(), &text)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse_formula;

    #[test]
    fn corpus_loads_and_parses() {
        let c = load_corpus().unwrap();
        assert_eq!(c.len(), 13);
        let sat: Vec<&str> = c.iter().filter(|e| e.expect == Some(Expect::Sat)).map(|e| e.name.as_str()).collect();
        assert_eq!(sat, ["Chain", "Holding Arbiter", "Small Holding Arbiter"]);
        for e in &c {
            parse_formula(&e.text, None).unwrap_or_else(|err| panic!("{}: {err}", e.name));
        }
    }

    #[test]
    fn fragments_parse() {
        let f = fragment_set().unwrap();
        assert!(f.iter().any(|e| e.has_tag("single-cell")));
        assert!(f.iter().any(|e| e.has_tag("reachability")));
        for e in &f {
            assert_eq!(e.expect, Some(Expect::Sat), "{}", e.file);
            parse_formula(&e.text, None).unwrap_or_else(|err| panic!("{}: {err}", e.file));
        }
    }

    #[test]
    fn headers() {
        let e = parse_corpus_file("a/b.tsl", "#!expect: UNSAT\n#!tags: x, y\np(x)").unwrap();
        assert_eq!((e.name.as_str(), e.expect, e.tags.len()), ("b", Some(Expect::Unsat), 2));
        assert!(parse_corpus_file("f", "#!expect: maybe\np(x)").is_err());
        assert!(parse_corpus_file("f", "#!expect: SAT\n// nothing\n").is_err());
    }
}
