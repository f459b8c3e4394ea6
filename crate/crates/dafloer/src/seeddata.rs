//! Seed-file format, the embedded corpus of twist and arc-slide bimodules,
//! and canonical serialization.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::{Arc, OnceLock};

use smallvec::SmallVec;
use thiserror::Error;

use crate::algebra::{z1, z2, Algebra, PointedMatchedCircle};
use crate::bimodule::{make_identity, solve_gradings, Action, BimoduleError, DABimodule, GradingAssignment};


pub const TWISTS_SEED: &str = include_str!("../seeds/twists.seed");
pub const IDENTITY_BOUNDED_SEED: &str = include_str!("../seeds/identity_bounded.seed");
/// DD bimodule of τ_E, kept verbatim; never parsed.
pub const DD_TAU_E_DOC: &str = include_str!("../seeds/dd_tau_e.tex");

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeedError {
    #[error("line {line}, column {col}: {msg}")]
    SyntaxError { line: usize, col: usize, msg: String },
    #[error("line {line}: unknown element `{token}` in algebra {algebra}")]
    UnknownElement { line: usize, token: String, algebra: String },
    #[error("line {line}: {detail}")]
    IdempotentMismatch { line: usize, detail: String },
    #[error("line {line}: unknown circle `{name}`")]
    UnknownCircle { line: usize, name: String },
    #[error("line {line}: {source}")]
    Bimodule { line: usize, source: BimoduleError },
    #[error("line {line}: {msg}")]
    Circle { line: usize, msg: String },
    #[error("unknown bimodule `{name}`; available: {}", .available.join(", "))]
    UnknownName { name: String, available: Vec<String> },
    #[error("expected exactly one bimodule, found {0}")]
    NotSingle(usize),
}

/// Named algebras available to the parser.
#[derive(Debug, Clone, Default)]
pub struct Registry {
    algebras: BTreeMap<String, Arc<Algebra>>,
}

impl Registry {
    pub fn empty() -> Self {
        Registry::default()
    }

    /// Z2, Z1 and the arc-slide circles S1..S4.
    pub fn standard() -> Self {
        static STD: OnceLock<Registry> = OnceLock::new();
        STD.get_or_init(|| {
            let mut r = Registry::empty();
            r.insert(z2());
            r.insert(z1());
            let header: Vec<&str> = TWISTS_SEED.lines().take_while(|l| !l.starts_with("bimodule")).collect();
            parse_document(&header.join("\n"), &mut r).expect("builtin circles parse");
            r
        })
        .clone()
    }

    pub fn insert(&mut self, a: Arc<Algebra>) {
        self.algebras.insert(a.name().to_string(), a);
    }

    pub fn get(&self, name: &str) -> Option<&Arc<Algebra>> {
        self.algebras.get(name)
    }

    pub fn names(&self) -> Vec<String> {
        self.algebras.keys().cloned().collect()
    }
}

fn syntax(line: usize, col: usize, msg: impl Into<String>) -> SeedError {
    SeedError::SyntaxError { line, col, msg: msg.into() }
}

/// Column (1-based) of `needle` inside `raw`, for error reports.
fn col_of(raw: &str, needle: &str) -> usize {
    raw.find(needle).map(|c| c + 1).unwrap_or(1)
}

fn parse_pairs(s: &str, line: usize, raw: &str) -> Result<Vec<(usize, usize)>, SeedError> {
    let mut out = Vec::new();
    let mut rest = s.trim();
    while !rest.is_empty() {
        let Some(body) = rest.strip_prefix('(') else {
            return Err(syntax(line, col_of(raw, rest), "expected `(`"));
        };
        let Some(end) = body.find(')') else {
            return Err(syntax(line, col_of(raw, rest), "unclosed pair"));
        };
        let (a, b) = body[..end]
            .split_once(',')
            .and_then(|(a, b)| Some((a.trim().parse().ok()?, b.trim().parse().ok()?)))
            .ok_or_else(|| syntax(line, col_of(raw, rest), "bad pair"))?;
        out.push((a, b));
        rest = body[end + 1..].trim_start();
    }
    Ok(out)
}

/// Parses a seed document: circle declarations are added to the registry,
/// bimodules are returned in file order.
pub fn parse_document(text: &str, registry: &mut Registry) -> Result<Vec<DABimodule>, SeedError> {
    let mut out: Vec<DABimodule> = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let content = raw.split('#').next().unwrap_or("");
        let trimmed = content.trim();
        if trimmed.is_empty() {
            continue;
        }
        let mut words = trimmed.split_whitespace();
        let kw = words.next().unwrap();
        match kw {
            "circle" => {
                let toks: Vec<&str> = trimmed.split_whitespace().collect();
                if toks.len() < 5 || toks[2] != "points" || !toks[4].starts_with("pairs") {
                    return Err(syntax(line, 1, "expected `circle <name> points <n> pairs (a,b)...`"));
                }
                let name = toks[1];
                let n: usize = toks[3].parse().map_err(|_| syntax(line, col_of(raw, toks[3]), "bad point count"))?;
                let pairs_text = trimmed.split_once("pairs").map(|x| x.1).unwrap_or("");
                let pairs = parse_pairs(pairs_text, line, raw)?;
                let circle = PointedMatchedCircle::new(n, &pairs, name)
                    .map_err(|e| SeedError::Circle { line, msg: e.to_string() })?;
                if let Some(old) = registry.get(name) {
                    if old.circle != circle {
                        return Err(SeedError::Circle { line, msg: format!("circle `{name}` redeclared differently") });
                    }
                } else {
                    registry.insert(Algebra::new(circle));
                }
            }
            "bimodule" => {
                let toks: Vec<&str> = trimmed.split_whitespace().collect();
                if toks.len() != 6 || toks[2] != "left" || toks[4] != "right" {
                    return Err(syntax(line, 1, "expected `bimodule <name> left <circle> right <circle>`"));
                }
                let get = |n: &str| {
                    registry.get(n).cloned().ok_or_else(|| SeedError::UnknownCircle { line, name: n.to_string() })
                };
                out.push(DABimodule::new(toks[1], get(toks[3])?, get(toks[5])?));
            }
            "gen" => {
                let m = out.last_mut().ok_or_else(|| syntax(line, 1, "`gen` before any `bimodule`"))?;
                let toks: Vec<&str> = trimmed.split_whitespace().collect();
                let grade = match toks.len() {
                    4 => None,
                    6 if toks[4] == "grade" && (toks[5] == "0" || toks[5] == "1") => Some(toks[5].parse().unwrap()),
                    _ => return Err(syntax(line, 1, "expected `gen <name> <idem> <idem> [grade <0|1>]`")),
                };
                let l = idem(&m.left, toks[2], line, raw)?;
                let r = idem(&m.right, toks[3], line, raw)?;
                m.add_generator(toks[1], l, r, grade).map_err(|source| SeedError::Bimodule { line, source })?;
            }
            "act" => {
                let m = out.last_mut().ok_or_else(|| syntax(line, 1, "`act` before any `bimodule`"))?;
                let body = bar_chords_to_brackets(trimmed["act".len()..].trim());
                let body = body.as_str();
                let parts: Vec<&str> = body.split('|').collect();
                if parts.len() != 3 {
                    return Err(syntax(line, col_of(raw, body), "expected `act <gen> | <inputs> -> <out> | <gen>`"));
                }
                let Some((ins_text, out_text)) = parts[1].split_once("->") else {
                    return Err(syntax(line, col_of(raw, parts[1]), "missing `->`"));
                };
                let src_name = parts[0].trim();
                let tgt_name = parts[2].trim();
                let source = m.gen_id(src_name).ok_or_else(|| SeedError::Bimodule {
                    line,
                    source: BimoduleError::UnknownGenerator(src_name.to_string()),
                })?;
                let target = m.gen_id(tgt_name).ok_or_else(|| SeedError::Bimodule {
                    line,
                    source: BimoduleError::UnknownGenerator(tgt_name.to_string()),
                })?;
                let mut inputs = SmallVec::new();
                if !ins_text.trim().is_empty() {
                    for tok in split_top_level(ins_text) {
                        let tok = tok.trim();
                        let x = m.right.parse_elem(tok).ok_or_else(|| SeedError::UnknownElement {
                            line,
                            token: tok.to_string(),
                            algebra: m.right.name().to_string(),
                        })?;
                        inputs.push(x);
                    }
                }
                let out_tok = out_text.trim();
                let output = if out_tok == "1" {
                    m.generator(source).left
                } else {
                    m.left.parse_elem(out_tok).ok_or_else(|| SeedError::UnknownElement {
                        line,
                        token: out_tok.to_string(),
                        algebra: m.left.name().to_string(),
                    })?
                };
                m.toggle_action(Action { source, inputs, output, target }).map_err(|e| match e {
                    BimoduleError::IdempotentMismatch(d) | BimoduleError::IdempotentInput(d) => {
                        SeedError::IdempotentMismatch { line, detail: d }
                    }
                    source => SeedError::Bimodule { line, source },
                })?;
            }
            other => return Err(syntax(line, col_of(raw, other), format!("unknown keyword `{other}`"))),
        }
    }
    Ok(out)
}

/// Splits on commas that are not inside `[..]` or `{..}`.
fn split_top_level(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let (mut depth, mut start) = (0i32, 0usize);
    for (i, c) in s.char_indices() {
        match c {
            '[' | '{' => depth += 1,
            ']' | '}' => depth -= 1,
            ',' if depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

/// Rewrites `|(a->b)|` and `|(a→b)|` chord tokens as `[a,b]` so that the
/// `|` field separators stay unambiguous.
fn bar_chords_to_brackets(s: &str) -> String {
    let mut out = String::new();
    let mut rest = s;
    while let Some(i) = rest.find("|(") {
        let Some(j) = rest[i..].find(")|") else { break };
        let inner = &rest[i + 2..i + j];
        let Some((a, b)) = inner.split_once("->").or_else(|| inner.split_once('→')) else { break };
        out.push_str(&rest[..i]);
        out.push_str(&format!("[{},{}]", a.trim(), b.trim()));
        rest = &rest[i + j + 2..];
    }
    out.push_str(rest);
    out
}

fn idem(alg: &Algebra, tok: &str, line: usize, _raw: &str) -> Result<crate::algebra::Elem, SeedError> {
    match alg.parse_elem(tok) {
        Some(e) if alg.is_idempotent(e) => Ok(e),
        _ => Err(SeedError::UnknownElement { line, token: tok.to_string(), algebra: alg.name().to_string() }),
    }
}

/// Parses a document holding exactly one bimodule.
pub fn parse_bimodule(text: &str, registry: &mut Registry) -> Result<DABimodule, SeedError> {
    let mut v = parse_document(text, registry)?;
    if v.len() != 1 {
        return Err(SeedError::NotSingle(v.len()));
    }
    Ok(v.pop().unwrap())
}

/// Generators sorted by name, actions by (source, inputs, output, target).
pub fn canonical(m: &DABimodule) -> DABimodule {
    m.restrict(&m.sorted_ids())
}

fn is_builtin_circle(a: &Algebra) -> bool {
    Registry::standard().get(a.name()).is_some_and(|b| b.circle == a.circle)
}

/// Canonical text form. Non-builtin circles are declared in the header so
/// the output is self-contained.
pub fn serialize_bimodule(m: &DABimodule) -> String {
    let mut s = String::new();
    let mut declared = Vec::new();
    for a in [&m.left, &m.right] {
        if !is_builtin_circle(a) && !declared.contains(&a.name()) {
            writeln!(s, "{}", a.circle).unwrap();
            declared.push(a.name());
        }
    }
    // names are single tokens in the seed format
    let name: String = m.name.split_whitespace().collect::<Vec<_>>().join("_");
    let name = if name.is_empty() { "unnamed".to_string() } else { name };
    writeln!(s, "bimodule {} left {} right {}", name, m.left.name(), m.right.name()).unwrap();
    let c = canonical(m);
    for g in c.generators() {
        write!(s, "gen {} {} {}", g.name, c.left.fmt_elem(g.left), c.right.fmt_elem(g.right)).unwrap();
        if let Some(gr) = g.grade {
            write!(s, " grade {gr}").unwrap();
        }
        s.push('\n');
    }
    for a in c.actions() {
        let ins: Vec<String> = a.inputs.iter().map(|&x| c.right.fmt_elem(x)).collect();
        let out = if c.left.is_idempotent(a.output) { "1".to_string() } else { c.left.fmt_elem(a.output) };
        writeln!(
            s,
            "act {} | {} -> {} | {}",
            c.generator(a.source).name,
            ins.join(", "),
            out,
            c.generator(a.target).name
        )
        .unwrap();
    }
    s
}

/// The embedded corpus: twist bimodules, arc-slides, the bounded identity and
/// the identity over Z2.
pub struct Corpus {
    pub registry: Registry,
    pub bimodules: BTreeMap<String, DABimodule>,
    /// Joint mod-2 grading of all seeds, normalized on the identity; the
    /// generator grades are also stored on the bimodules themselves.
    pub gradings: GradingAssignment,
}

/// Names of the twist and arc-slide bimodules in listing order.
pub const TWIST_NAMES: [&str; 10] = [
    "N_tauA", "N_tauA_inv", "N_tauB", "N_tauB_inv", "N_tauC", "N_tauC_inv", "N_tauD", "N_tauD_inv", "N_tauE",
    "N_tauE_inv",
];
pub const ARC_SLIDE_NAMES: [&str; 6] = ["N_eta", "N_mu1", "N_mu2", "N_mu3", "N_mu4", "N_eta_inv"];

/// Generator and action counts of the seeds as listed, in [`Corpus::seeds`] order.
pub const SEED_COUNTS: [(&str, usize, usize); 17] = [
    ("N_tauA", 5, 32),
    ("N_tauA_inv", 5, 35),
    ("N_tauB", 5, 31),
    ("N_tauB_inv", 5, 36),
    ("N_tauC", 16, 74),
    ("N_tauC_inv", 16, 74),
    ("N_tauD", 5, 36),
    ("N_tauD_inv", 5, 31),
    ("N_tauE", 5, 35),
    ("N_tauE_inv", 5, 32),
    ("N_eta", 5, 32),
    ("N_mu1", 5, 35),
    ("N_mu2", 5, 35),
    ("N_mu3", 5, 35),
    ("N_mu4", 5, 35),
    ("N_eta_inv", 5, 30),
    ("I_bounded", 12, 56),
];

impl Corpus {
    fn load() -> Result<Corpus, SeedError> {
        let mut registry = Registry::standard();
        let mut bimodules = BTreeMap::new();
        for m in parse_document(TWISTS_SEED, &mut registry)? {
            bimodules.insert(m.name.clone(), m);
        }
        let ib = parse_bimodule(IDENTITY_BOUNDED_SEED, &mut registry)?;
        bimodules.insert(ib.name.clone(), ib);
        let id = make_identity(registry.get("Z2").unwrap());
        bimodules.insert(id.name.clone(), id);
        let mut names: Vec<&str> = TWIST_NAMES.iter().chain(ARC_SLIDE_NAMES.iter()).copied().collect();
        names.push("I_bounded");
        names.push("I");
        let ms: Vec<&DABimodule> = names.iter().map(|n| &bimodules[*n]).collect();
        let gradings = solve_gradings(&ms, &["I"]).map_err(|source| SeedError::Bimodule { line: 0, source })?;
        for (n, grades) in names.iter().zip(&gradings.generator_grades) {
            let m = bimodules.get_mut(*n).unwrap();
            for (g, &gr) in grades.iter().enumerate() {
                m.set_grade(g as u32, Some(gr));
            }
        }
        Ok(Corpus { registry, bimodules, gradings })
    }

    pub fn get() -> &'static Corpus {
        static CORPUS: OnceLock<Corpus> = OnceLock::new();
        CORPUS.get_or_init(|| Corpus::load().expect("embedded seed data parses"))
    }

    pub fn names(&self) -> Vec<String> {
        self.bimodules.keys().cloned().collect()
    }

    /// Every appendix-style seed plus the bounded identity (17 bimodules).
    pub fn seeds(&self) -> Vec<&DABimodule> {
        TWIST_NAMES
            .iter()
            .chain(ARC_SLIDE_NAMES.iter())
            .chain(["I_bounded"].iter())
            .map(|n| &self.bimodules[*n])
            .collect()
    }
}

pub fn builtin(name: &str) -> Result<DABimodule, SeedError> {
    let c = Corpus::get();
    c.bimodules
        .get(name)
        .cloned()
        .ok_or_else(|| SeedError::UnknownName { name: name.to_string(), available: c.names() })
}

/// Joint grading solution over all seeds, normalized on the identity.
pub fn seed_gradings() -> &'static GradingAssignment {
    &Corpus::get().gradings
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_counts() {
        let c = Corpus::get();
        let counts: Vec<(&str, usize, usize)> =
            c.seeds().iter().map(|m| (m.name.as_str(), m.num_generators(), m.num_actions())).collect();
        assert_eq!(counts, SEED_COUNTS.to_vec());
    }

    #[test]
    fn builtin_lookup() {
        let e = builtin("N_tauE").unwrap();
        assert_eq!(e.num_generators(), 5);
        assert_eq!(e.left.name(), "Z2");
        let eta = builtin("N_eta").unwrap();
        assert_eq!(eta.right.circle.pairs, vec![(0, 2), (1, 6), (3, 5), (4, 7)]);
        assert!(matches!(builtin("nope"), Err(SeedError::UnknownName { .. })));
    }

    #[test]
    fn parse_errors() {
        let mut r = Registry::standard();
        let ok = parse_bimodule("bimodule t left Z2 right Z2\ngen x i0 i0\n", &mut r).unwrap();
        assert_eq!(ok.num_generators(), 1);
        let bad = parse_bimodule("bimodule t left Z2 right Z2\ngen x i0 i0\nact x | r23 -> r56 | x\n", &mut r);
        assert!(matches!(bad, Err(SeedError::IdempotentMismatch { line: 3, .. })));
        let unk = parse_bimodule("bimodule t left Z2 right Z2\ngen x i0 i0\nact x | r9 -> 1 | x\n", &mut r);
        assert!(matches!(unk, Err(SeedError::UnknownElement { line: 3, .. })));
        let bars = parse_bimodule(
            "bimodule t left Z2 right Z2\ngen x i0 i0\ngen y i1 i1\nact x | |(0->1)| -> r1 | y\n",
            &mut r,
        )
        .unwrap();
        assert_eq!(bars.num_actions(), 1);
        let syn = parse_bimodule("bimodule t left Z2 right Z2\ngen x i0 i0\nact x r1 -> 1 x\n", &mut r);
        assert!(matches!(syn, Err(SeedError::SyntaxError { line: 3, .. })));
    }

    #[test]
    fn round_trip() {
        let mut r = Registry::standard();
        for m in Corpus::get().bimodules.values() {
            let text = serialize_bimodule(m);
            let back = parse_bimodule(&text, &mut r).unwrap();
            assert_eq!(back, canonical(m), "{}", m.name);
            assert_eq!(serialize_bimodule(&back), text);
        }
        let id = &Corpus::get().bimodules["I"];
        let text = serialize_bimodule(id);
        assert_eq!(text.lines().filter(|l| l.starts_with("gen")).count(), 4);
        assert_eq!(text.lines().filter(|l| l.starts_with("act")).count(), 28);
        let empty = DABimodule::new("e", z2(), z2());
        assert_eq!(serialize_bimodule(&empty), "bimodule e left Z2 right Z2\n");
    }
}
