//! Words in the Dehn twists A..E, their bimodules, the groupoid relation
//! suite and a rank-growth classifier.
//!
//! A word g₁g₂…g_m denotes g₁ ∘ g₂ ∘ … ∘ g_m. Its bimodule is
//! reduce(N(g_m) ⊠ (… ⊠ (N(g₂) ⊠ N(g₁)))), reducing after every product.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, OnceLock};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::bimodule::{BimoduleError, DABimodule};
use crate::calculus::{box_tensor, is_isomorphic, reduce};
use crate::hochschild::{hochschild_homology, HhError, HhOptions, HhReport};
use crate::seeddata::{builtin, Corpus, ARC_SLIDE_NAMES};

#[derive(Debug, Error)]
pub enum McgError {
    #[error("word syntax error at byte {pos}: {msg}")]
    SyntaxError { pos: usize, msg: String },
    #[error("max power must be at least {min}, got {got}")]
    PowerTooSmall { min: usize, got: usize },
    #[error(transparent)]
    Bimodule(#[from] BimoduleError),
    #[error(transparent)]
    Hochschild(#[from] HhError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Curve {
    A,
    B,
    C,
    D,
    E,
}

impl Curve {
    pub const ALL: [Curve; 5] = [Curve::A, Curve::B, Curve::C, Curve::D, Curve::E];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_char(c: char) -> Option<Curve> {
        match c {
            'A' => Some(Curve::A),
            'B' => Some(Curve::B),
            'C' => Some(Curve::C),
            'D' => Some(Curve::D),
            'E' => Some(Curve::E),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        b"ABCDE"[self.index()] as char
    }

    /// Curves of the chain meet exactly when their letters are neighbours.
    pub fn adjacent(self, other: Curve) -> bool {
        self.index().abs_diff(other.index()) == 1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter {
    pub curve: Curve,
    pub inverse: bool,
}

impl Letter {
    pub fn inverted(self) -> Letter {
        Letter { curve: self.curve, inverse: !self.inverse }
    }

    /// Name of the seed bimodule for this twist.
    pub fn seed_name(self) -> String {
        format!("N_tau{}{}", self.curve.as_char(), if self.inverse { "_inv" } else { "" })
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.curve.as_char(), if self.inverse { "'" } else { "" })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct MCGWord {
    pub letters: Vec<Letter>,
}

impl MCGWord {
    pub fn identity() -> Self {
        MCGWord::default()
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn concat(&self, other: &MCGWord) -> MCGWord {
        MCGWord { letters: self.letters.iter().chain(&other.letters).copied().collect() }
    }

    pub fn power(&self, n: usize) -> MCGWord {
        MCGWord { letters: (0..n).flat_map(|_| self.letters.iter().copied()).collect() }
    }

    pub fn rotate(&self, k: usize) -> MCGWord {
        let mut l = self.letters.clone();
        if !l.is_empty() {
            let k = k % l.len();
            l.rotate_left(k);
        }
        MCGWord { letters: l }
    }
}

impl fmt::Display for MCGWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.letters.iter().map(|l| l.to_string()).collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// Parses letters A–E separated by optional whitespace. A letter may carry
/// `'` or `^-1` for the inverse and `^k` (k possibly negative) for a power.
/// Parentheses group, and a group may carry the same suffixes.
pub fn parse_word(text: &str) -> Result<MCGWord, McgError> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut pos = 0;
    let letters = parse_seq(&chars, &mut pos, text.len())?;
    if pos < chars.len() {
        return Err(McgError::SyntaxError { pos: chars[pos].0, msg: format!("unexpected `{}`", chars[pos].1) });
    }
    Ok(MCGWord { letters })
}

fn parse_seq(chars: &[(usize, char)], pos: &mut usize, end: usize) -> Result<Vec<Letter>, McgError> {
    let mut out = Vec::new();
    loop {
        while *pos < chars.len() && chars[*pos].1.is_whitespace() {
            *pos += 1;
        }
        if *pos >= chars.len() || chars[*pos].1 == ')' {
            return Ok(out);
        }
        let (at, c) = chars[*pos];
        let atom: Vec<Letter> = if c == '(' {
            *pos += 1;
            let inner = parse_seq(chars, pos, end)?;
            if *pos >= chars.len() {
                return Err(McgError::SyntaxError { pos: end, msg: "unclosed `(`".into() });
            }
            *pos += 1;
            inner
        } else if let Some(curve) = Curve::from_char(c) {
            *pos += 1;
            vec![Letter { curve, inverse: false }]
        } else {
            return Err(McgError::SyntaxError { pos: at, msg: format!("unexpected `{c}`") });
        };
        let exp = parse_exponent(chars, pos, end)?;
        let base = if exp < 0 { invert_letters(&atom) } else { atom };
        for _ in 0..exp.unsigned_abs() {
            out.extend_from_slice(&base);
        }
    }
}

fn parse_exponent(chars: &[(usize, char)], pos: &mut usize, end: usize) -> Result<i64, McgError> {
    let mut exp: i64 = 1;
    loop {
        match chars.get(*pos).map(|p| p.1) {
            Some('\'') => {
                *pos += 1;
                exp = -exp;
            }
            Some('^') => {
                *pos += 1;
                let start = *pos;
                if chars.get(*pos).map(|p| p.1) == Some('-') {
                    *pos += 1;
                }
                while chars.get(*pos).is_some_and(|p| p.1.is_ascii_digit()) {
                    *pos += 1;
                }
                let s: String = chars[start..*pos].iter().map(|p| p.1).collect();
                let at = chars.get(start).map_or(end, |p| p.0);
                let k: i64 = s
                    .parse()
                    .map_err(|_| McgError::SyntaxError { pos: at, msg: "expected an integer exponent".into() })?;
                exp = exp
                    .checked_mul(k)
                    .filter(|e| e.abs() <= 10_000)
                    .ok_or(McgError::SyntaxError { pos: at, msg: "exponent too large".into() })?;
            }
            _ => return Ok(exp),
        }
    }
}

fn invert_letters(l: &[Letter]) -> Vec<Letter> {
    l.iter().rev().map(|x| x.inverted()).collect()
}

/// Reversed word with every letter inverted.
pub fn invert_word(w: &MCGWord) -> MCGWord {
    MCGWord { letters: invert_letters(&w.letters) }
}

fn reduced_letters() -> &'static BTreeMap<Letter, Arc<DABimodule>> {
    static CELL: OnceLock<BTreeMap<Letter, Arc<DABimodule>>> = OnceLock::new();
    CELL.get_or_init(|| {
        let corpus = Corpus::get();
        let mut out = BTreeMap::new();
        for curve in Curve::ALL {
            for inverse in [false, true] {
                let l = Letter { curve, inverse };
                out.insert(l, Arc::new(reduce(&corpus.bimodules[&l.seed_name()])));
            }
        }
        out
    })
}

/// Reduced seed bimodule of a single twist.
pub fn letter_bimodule(l: Letter) -> Arc<DABimodule> {
    reduced_letters()[&l].clone()
}

pub fn identity_bimodule() -> DABimodule {
    builtin("I").expect("identity is built in")
}

/// Multiplies one more letter onto the left of the tensor fold.
pub fn fold_letter(acc: &DABimodule, l: Letter) -> Result<DABimodule, McgError> {
    Ok(reduce(&box_tensor(&letter_bimodule(l), acc)?))
}

pub fn bimodule_of(w: &MCGWord) -> Result<DABimodule, McgError> {
    bimodule_from(w, &|l| letter_bimodule(l))
}

fn bimodule_from(w: &MCGWord, letter: &dyn Fn(Letter) -> Arc<DABimodule>) -> Result<DABimodule, McgError> {
    let Some((first, rest)) = w.letters.split_first() else {
        return Ok(identity_bimodule());
    };
    let mut acc = (*letter(*first)).clone();
    for l in rest {
        acc = reduce(&box_tensor(&letter(*l), &acc)?);
    }
    Ok(acc.renamed(&format!("N({w})")))
}

/// Which bimodule is paired with a word when counting its fixed points.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    /// rank HH(N(w⁻¹)), the default.
    Inverse,
    /// rank HH(N(w)).
    Direct,
}

#[derive(Clone, Debug, Serialize)]
pub struct PowerRow {
    pub n: usize,
    pub rank: usize,
    pub graded: Option<[usize; 2]>,
    pub generators: usize,
    pub actions: usize,
    pub seconds: f64,
}

/// rank HH of the bimodule of (wⁿ)⁻¹ (or wⁿ) for n = 1..=max_power, folding
/// one letter at a time so that each power reuses the previous one.
pub fn power_table(
    w: &MCGWord,
    max_power: usize,
    orientation: Orientation,
    mut progress: impl FnMut(&PowerRow),
) -> Result<Vec<PowerRow>, McgError> {
    let period = match orientation {
        Orientation::Inverse => invert_word(w),
        Orientation::Direct => w.clone(),
    };
    let mut rows = Vec::new();
    let mut acc = identity_bimodule();
    let started = std::time::Instant::now();
    for n in 1..=max_power {
        for &l in &period.letters {
            acc = fold_letter(&acc, l)?;
        }
        let report = hochschild_homology(&acc, &HhOptions::default())?;
        let row = PowerRow {
            n,
            rank: report.total,
            graded: report.graded,
            generators: acc.num_generators(),
            actions: acc.num_actions(),
            seconds: started.elapsed().as_secs_f64(),
        };
        progress(&row);
        rows.push(row);
    }
    Ok(rows)
}

/// Fixed-point count attached to a word: rank HH(N(w⁻¹)).
pub fn fixed_points(w: &MCGWord) -> Result<HhReport, McgError> {
    Ok(hochschild_homology(&bimodule_of(&invert_word(w))?, &HhOptions::default())?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationKind {
    Inverse,
    Braid,
    Commuting,
    Unit,
    ArcSlide,
}

impl RelationKind {
    pub const ALL: [RelationKind; 5] =
        [RelationKind::Inverse, RelationKind::Braid, RelationKind::Commuting, RelationKind::Unit, RelationKind::ArcSlide];
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RelationResult {
    pub kind: RelationKind,
    pub name: String,
    pub passed: bool,
    /// Generator matching between the two sides when they are isomorphic.
    pub witness: Option<Vec<(String, String)>>,
    pub sizes: (usize, usize),
}

/// Bimodules used by the relation suite; the seeds can be replaced to test
/// that corrupted data is caught.
#[derive(Clone, Debug)]
pub struct RelationSuite {
    letters: BTreeMap<Letter, Arc<DABimodule>>,
    arc_slides: Vec<DABimodule>,
    tau_c_inv: DABimodule,
}

impl Default for RelationSuite {
    fn default() -> Self {
        let corpus = Corpus::get();
        RelationSuite {
            letters: reduced_letters().clone(),
            arc_slides: ARC_SLIDE_NAMES.iter().map(|n| corpus.bimodules[*n].clone()).collect(),
            tau_c_inv: corpus.bimodules["N_tauC_inv"].clone(),
        }
    }
}

impl RelationSuite {
    /// Replaces the seed of one twist (it is reduced before use).
    pub fn with_letter(mut self, l: Letter, m: &DABimodule) -> Self {
        let r = Arc::new(reduce(m));
        if l == (Letter { curve: Curve::C, inverse: true }) {
            self.tau_c_inv = m.clone();
        }
        self.letters.insert(l, r);
        self
    }

    fn word(&self, text: &str) -> Result<DABimodule, McgError> {
        bimodule_from(&parse_word(text)?, &|l| self.letters[&l].clone())
    }

    fn compare(kind: RelationKind, name: String, x: &DABimodule, y: &DABimodule) -> Result<RelationResult, McgError> {
        let witness = is_isomorphic(x, y)?;
        Ok(RelationResult {
            kind,
            name,
            passed: witness.is_some(),
            witness,
            sizes: (x.num_generators(), y.num_generators()),
        })
    }

    /// The relations of the given kinds, as (kind, name, left word, right word).
    /// Arc-slide relations have empty words and are handled separately.
    fn cases(kinds: &[RelationKind]) -> Vec<(RelationKind, String, String, String)> {
        let mut out = Vec::new();
        for &kind in kinds {
            match kind {
                RelationKind::Inverse => {
                    for c in Curve::ALL.map(|c| c.as_char()) {
                        out.push((kind, format!("{c} {c}' = 1"), format!("{c} {c}'"), String::new()));
                        out.push((kind, format!("{c}' {c} = 1"), format!("{c}' {c}"), String::new()));
                    }
                }
                RelationKind::Braid => {
                    for p in Curve::ALL.windows(2) {
                        let (x, y) = (p[0].as_char(), p[1].as_char());
                        out.push((kind, format!("{x} {y} {x} = {y} {x} {y}"), format!("{x} {y} {x}"), format!("{y} {x} {y}")));
                    }
                }
                RelationKind::Commuting => {
                    for (i, x) in Curve::ALL.iter().enumerate() {
                        for y in &Curve::ALL[i + 1..] {
                            if !x.adjacent(*y) {
                                let (x, y) = (x.as_char(), y.as_char());
                                out.push((kind, format!("{x} {y} = {y} {x}"), format!("{x} {y}"), format!("{y} {x}")));
                            }
                        }
                    }
                }
                RelationKind::Unit => {
                    for c in Curve::ALL.map(|c| c.as_char()) {
                        for s in ["", "'"] {
                            out.push((kind, format!("{c}{s} * 1 = {c}{s}"), format!("{c}{s}"), format!("{c}{s}")));
                        }
                    }
                }
                RelationKind::ArcSlide => {
                    out.push((kind, "arc-slide factorization of C'".into(), String::new(), String::new()));
                }
            }
        }
        out
    }

    fn run_case(&self, case: &(RelationKind, String, String, String)) -> Result<RelationResult, McgError> {
        let (kind, name, lhs, rhs) = case;
        match kind {
            RelationKind::Unit => {
                let m = self.word(lhs)?;
                let with_unit = reduce(&box_tensor(&m, &identity_bimodule())?);
                Self::compare(*kind, name.clone(), &with_unit, &m)
            }
            RelationKind::ArcSlide => {
                let mut acc = self.arc_slides.last().expect("arc slides present").clone();
                for m in self.arc_slides.iter().rev().skip(1) {
                    acc = reduce(&box_tensor(m, &acc)?);
                }
                Self::compare(*kind, name.clone(), &acc, &reduce(&self.tau_c_inv))
            }
            _ => Self::compare(*kind, name.clone(), &self.word(lhs)?, &self.word(rhs)?),
        }
    }

    /// Runs the selected relation kinds on up to `jobs` threads. Results are
    /// returned in a fixed order regardless of `jobs`.
    pub fn verify(&self, kinds: &[RelationKind], jobs: usize) -> Result<Vec<RelationResult>, McgError> {
        let cases = Self::cases(kinds);
        if jobs <= 1 {
            return cases.iter().map(|c| self.run_case(c)).collect();
        }
        let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build().expect("thread pool");
        pool.install(|| cases.par_iter().map(|c| self.run_case(c)).collect())
    }
}

/// Full relation suite on the built-in seeds.
pub fn verify_relations() -> Result<Vec<RelationResult>, McgError> {
    RelationSuite::default().verify(&RelationKind::ALL, 1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Bounded,
    Linear,
    Exponential,
    Inconclusive,
}

impl Verdict {
    pub fn describe(self) -> &'static str {
        match self {
            Verdict::Bounded => "bounded (periodic-type)",
            Verdict::Linear => "linear (reducible, periodic pieces)",
            Verdict::Exponential => "exponential (pseudo-Anosov-type)",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// Heuristic growth verdict from ranks at n = 1, 2, ...
///
/// Bounded when max − min ≤ 1 over n ≥ 2; linear when the least-squares
/// affine fit has every residual at most 1; exponential when each of the last
/// three successive ratios is at least 1.3.
pub fn growth_verdict(ranks: &[usize]) -> Verdict {
    if ranks.len() < 3 {
        return Verdict::Inconclusive;
    }
    let tail = &ranks[1..];
    if tail.iter().max().unwrap() - tail.iter().min().unwrap() <= 1 {
        return Verdict::Bounded;
    }
    let n = ranks.len() as f64;
    let xs: Vec<f64> = (1..=ranks.len()).map(|i| i as f64).collect();
    let ys: Vec<f64> = ranks.iter().map(|&r| r as f64).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    if xs.iter().zip(&ys).all(|(x, y)| (y - (slope * x + icpt)).abs() <= 1.0) {
        return Verdict::Linear;
    }
    let last: Vec<f64> = ys[ys.len().saturating_sub(4)..].to_vec();
    if last.len() == 4 && last.windows(2).all(|p| p[0] > 0.0 && p[1] / p[0] >= 1.3) {
        return Verdict::Exponential;
    }
    Verdict::Inconclusive
}

#[derive(Clone, Debug, Serialize)]
pub struct Classification {
    pub ranks: Vec<usize>,
    pub verdict: Verdict,
}

pub fn classify(w: &MCGWord, max_power: usize) -> Result<Classification, McgError> {
    if max_power < 3 {
        return Err(McgError::PowerTooSmall { min: 3, got: max_power });
    }
    let ranks: Vec<usize> = power_table(w, max_power, Orientation::Inverse, |_| {})?.iter().map(|r| r.rank).collect();
    let verdict = growth_verdict(&ranks);
    Ok(Classification { ranks, verdict })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_examples() {
        assert_eq!(parse_word("A B C D C A B E").unwrap().len(), 8);
        assert_eq!(parse_word("A^5 B C D E^5").unwrap().len(), 13);
        assert!(parse_word("").unwrap().is_empty());
        assert_eq!(parse_word("A B^-1 C'").unwrap().to_string(), "A B' C'");
        assert_eq!(parse_word("(A B)^-1").unwrap().to_string(), "B' A'");
        assert_eq!(parse_word("(ABCD)'").unwrap().to_string(), "D' C' B' A'");
        assert!(matches!(parse_word("A F"), Err(McgError::SyntaxError { pos: 2, .. })));
        assert!(parse_word("(A").is_err());
        assert!(parse_word("A^x").is_err());
    }

    #[test]
    fn inversion() {
        let w = parse_word("A B").unwrap();
        assert_eq!(invert_word(&w).to_string(), "B' A'");
        assert!(invert_word(&MCGWord::identity()).is_empty());
        let psi = parse_word("A B C D C A B E").unwrap();
        assert_eq!(invert_word(&invert_word(&psi)), psi);
    }

    #[test]
    fn verdicts() {
        assert_eq!(growth_verdict(&[4, 4, 4, 4]), Verdict::Bounded);
        assert_eq!(growth_verdict(&[4, 6, 8, 10, 12]), Verdict::Linear);
        assert_eq!(growth_verdict(&[5, 5, 11, 23, 52, 103]), Verdict::Exponential);
        assert_eq!(growth_verdict(&[1, 2]), Verdict::Inconclusive);
    }

    #[test]
    fn single_letter_and_inverse() {
        let e = bimodule_of(&parse_word("E").unwrap()).unwrap();
        assert_eq!(e.num_generators(), 5);
        let aa = bimodule_of(&parse_word("A A'").unwrap()).unwrap();
        assert!(is_isomorphic(&aa, &identity_bimodule()).unwrap().is_some());
    }
}
