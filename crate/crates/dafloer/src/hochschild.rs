//! Hochschild homology of a DA bimodule with equal left and right algebras.
//!
//! The chain complex is spanned by cyclic words `a ⊗ x ⊗ a₁…a_k` with `a` a
//! basis element, `x` a generator and the `aᵢ` chords, with idempotents
//! matching around the cycle. The differential has three kinds of terms:
//!
//! 1. merge two neighbouring bar letters `aᵢ·aᵢ₊₁`;
//! 2. feed a prefix `a₁…a_j` to `x` through an action `x ⊗ (a₁…a_j) → b ⊗ y`,
//!    giving `a·b ⊗ y ⊗ a_{j+1}…a_k`;
//! 3. multiply the last letter into the coefficient, giving `a_k·a ⊗ x ⊗ a₁…a_{k-1}`.
//!
//! Two finite models are offered. [`HhMethod::Koszul`] keeps only bar words
//! made of short chords whose consecutive products vanish. B(Z) is a quadratic
//! monomial algebra, so these words span the Koszul dual coalgebra and the
//! restricted complex is quasi-isomorphic to the full one; the filtration by
//! number of short chords has an acyclic associated graded. The model has no
//! merge terms. [`HhMethod::BarTruncation`] keeps all bar words up to a length
//! bound and raises the bound until the homology stabilizes.

use std::collections::HashMap;

use smallvec::SmallVec;
use thiserror::Error;

use crate::algebra::{Algebra, Elem};
use crate::bimodule::{BimoduleError, DABimodule, Inputs};
use crate::calculus::{box_tensor, reduce};
use crate::seeddata::{builtin, seed_gradings};

#[derive(Debug, Error)]
pub enum HhError {
    #[error("left algebra `{0}` differs from right algebra `{1}`")]
    NotAnEndomorphism(String, String),
    #[error("bar truncation did not stabilize up to length {k_max}; steps {steps:?}")]
    NonStabilized { k_max: usize, steps: Vec<TruncationStep> },
    #[error("bar truncation at length {k} needs {size} generators, above the cap {cap}")]
    TooLarge { k: usize, size: usize, cap: usize },
    #[error("Hochschild differential does not square to zero ({0} nonzero entries)")]
    NotSquareZero(usize),
    #[error("Hochschild differential is not homogeneous of degree 1 for the supplied grading")]
    GradingNotHomogeneous,
    #[error(transparent)]
    Bimodule(#[from] BimoduleError),
}

/// Sparse matrix over F₂ stored by columns; each column is a sorted list of
/// row indices.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SparseF2 {
    pub nrows: usize,
    pub cols: Vec<Vec<u32>>,
}

impl SparseF2 {
    pub fn new(nrows: usize) -> Self {
        SparseF2 { nrows, cols: Vec::new() }
    }

    /// Builds from dense rows of 0/1 entries.
    pub fn from_dense(rows: &[Vec<u8>]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        let cols = (0..ncols)
            .map(|j| (0..nrows).filter(|&i| rows[i][j] & 1 == 1).map(|i| i as u32).collect())
            .collect();
        SparseF2 { nrows, cols }
    }

    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    /// Adds a column given by possibly repeated row indices; repeats cancel.
    pub fn push_col(&mut self, mut rows: Vec<u32>) {
        rows.sort_unstable();
        let mut out: Vec<u32> = Vec::with_capacity(rows.len());
        for r in rows {
            if out.last() == Some(&r) {
                out.pop();
            } else {
                out.push(r);
            }
        }
        self.cols.push(out);
    }

    pub fn rank(&self) -> usize {
        f2_rank_cols(self.cols.iter().cloned(), self.nrows)
    }

    /// Rank of the submatrix on the given columns.
    pub fn rank_of_cols(&self, which: impl Iterator<Item = usize>) -> usize {
        f2_rank_cols(which.map(|j| self.cols[j].clone()), self.nrows)
    }
}

fn xor_sorted(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Rank over F₂ by column reduction on the lowest nonzero row.
pub fn f2_rank_cols(cols: impl Iterator<Item = Vec<u32>>, nrows: usize) -> usize {
    let mut pivot: Vec<Option<Vec<u32>>> = vec![None; nrows];
    let mut rank = 0;
    for mut c in cols {
        while let Some(&low) = c.last() {
            match &pivot[low as usize] {
                Some(p) => c = xor_sorted(&c, p),
                None => {
                    pivot[low as usize] = Some(c);
                    rank += 1;
                    break;
                }
            }
        }
    }
    rank
}

/// Rank of a dense 0/1 matrix given by rows.
pub fn f2_rank(rows: &[Vec<u8>]) -> usize {
    SparseF2::from_dense(rows).rank()
}

/// A finite F₂ chain complex with one differential on a single graded space.
#[derive(Clone, Debug)]
pub struct F2Complex {
    pub d: SparseF2,
    /// Bar length of each basis element.
    pub lengths: Vec<usize>,
    /// Mod-2 grade of each basis element, when a grading is available.
    pub grades: Option<Vec<u8>>,
}

impl F2Complex {
    pub fn len(&self) -> usize {
        self.d.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.d.ncols() == 0
    }

    /// Number of nonzero entries of d∘d.
    pub fn d_squared_defect(&self) -> usize {
        let mut bad = 0;
        for c in &self.d.cols {
            let mut acc: Vec<u32> = Vec::new();
            for &r in c {
                acc = xor_sorted(&acc, &self.d.cols[r as usize]);
            }
            bad += acc.len();
        }
        bad
    }

    pub fn is_homogeneous(&self) -> bool {
        match &self.grades {
            None => true,
            Some(g) => self
                .d
                .cols
                .iter()
                .enumerate()
                .all(|(j, c)| c.iter().all(|&r| g[r as usize] == g[j] ^ 1)),
        }
    }

    pub fn homology_rank(&self) -> usize {
        self.len() - 2 * self.d.rank()
    }

    /// Homology ranks in grades 0 and 1.
    pub fn graded_homology(&self) -> Option<[usize; 2]> {
        let g = self.grades.as_ref()?;
        let n = [g.iter().filter(|&&x| x == 0).count(), g.iter().filter(|&&x| x == 1).count()];
        let r: Vec<usize> = (0..2u8).map(|k| self.d.rank_of_cols((0..g.len()).filter(|&j| g[j] == k))).collect();
        Some([n[0] - r[0] - r[1], n[1] - r[1] - r[0]])
    }
}

/// Composable sequences of short chords whose consecutive products vanish,
/// including the empty word.
pub fn koszul_words(alg: &Algebra) -> Vec<Inputs> {
    let shorts = alg.short_chords();
    let mut out: Vec<Inputs> = vec![SmallVec::new()];
    let mut frontier: Vec<Inputs> = shorts.iter().map(|&s| SmallVec::from_slice(&[s])).collect();
    let mut len = 1;
    while !frontier.is_empty() {
        assert!(len <= alg.len(), "relation paths of unbounded length");
        let mut next = Vec::new();
        for w in &frontier {
            let last = *w.last().unwrap();
            for &s in &shorts {
                if alg.right(last) == alg.left(s) && alg.mul(last, s).is_none() {
                    let mut v = w.clone();
                    v.push(s);
                    next.push(v);
                }
            }
        }
        out.append(&mut frontier);
        frontier = next;
        len += 1;
    }
    out
}

/// Composable sequences of chords of length at most `k`, including the empty word.
pub fn bar_words(alg: &Algebra, k: usize) -> Vec<Inputs> {
    let chords: Vec<Elem> = alg.chords().collect();
    let mut out: Vec<Inputs> = vec![SmallVec::new()];
    let mut frontier: Vec<Inputs> = chords.iter().map(|&s| SmallVec::from_slice(&[s])).collect();
    for _ in 1..=k {
        let mut next = Vec::new();
        for w in &frontier {
            let last = *w.last().unwrap();
            for &c in &chords {
                if alg.right(last) == alg.left(c) {
                    let mut v = w.clone();
                    v.push(c);
                    next.push(v);
                }
            }
        }
        out.append(&mut frontier);
        frontier = next;
    }
    out
}

/// Number of Hochschild generators for the given bar words, without building
/// the differential.
fn count_generators(m: &DABimodule, words: &[Inputs]) -> usize {
    let alg = &m.right;
    let mut by_ends: HashMap<(Elem, Elem), usize> = HashMap::new();
    for w in words {
        if let (Some(f), Some(l)) = (w.first(), w.last()) {
            *by_ends.entry((alg.left(*f), alg.right(*l))).or_default() += 1;
        }
    }
    let mut n = 0;
    for g in m.generators() {
        let coeffs = |e: Elem| alg.basis().filter(|&a| alg.left(a) == e && alg.right(a) == g.left).count();
        n += coeffs(g.right);
        for ((s, e), c) in &by_ends {
            if *s == g.right {
                n += c * coeffs(*e);
            }
        }
    }
    n
}

/// Right actions of a generator grouped by input word: (source, inputs) to [(output, target)].
type PrefixIndex<'a> = HashMap<(u32, &'a [Elem]), Vec<(Elem, u32)>>;

/// Builds the Hochschild complex of `m` on the given set of bar words, which
/// must be closed under the three kinds of terms.
pub fn hochschild_complex(m: &DABimodule, words: &[Inputs], chord_grades: Option<&[u8]>) -> Result<F2Complex, HhError> {
    if m.left != m.right {
        return Err(HhError::NotAnEndomorphism(m.left.name().into(), m.right.name().into()));
    }
    let alg = m.right.clone();
    let mut key_of: Vec<(Elem, u32, usize)> = Vec::new();
    let mut index: HashMap<(Elem, u32, &[Elem]), u32> = HashMap::new();
    let word_ids: HashMap<&[Elem], usize> = words.iter().enumerate().map(|(i, w)| (w.as_slice(), i)).collect();
    for x in m.sorted_ids() {
        let g = m.generator(x);
        for (wi, w) in words.iter().enumerate() {
            let end = match (w.first(), w.last()) {
                (Some(f), Some(l)) => {
                    if alg.left(*f) != g.right {
                        continue;
                    }
                    alg.right(*l)
                }
                _ => g.right,
            };
            for a in alg.basis() {
                if alg.left(a) == end && alg.right(a) == g.left {
                    index.insert((a, x, w.as_slice()), key_of.len() as u32);
                    key_of.push((a, x, wi));
                }
            }
        }
    }
    let mut by_prefix: PrefixIndex = HashMap::new();
    for act in m.actions() {
        by_prefix.entry((act.source, act.inputs.as_slice())).or_default().push((act.output, act.target));
    }
    let look = |a: Elem, x: u32, w: &[Elem]| -> u32 {
        *index
            .get(&(a, x, w))
            .unwrap_or_else(|| panic!("bar word set not closed under the differential"))
    };
    let mut d = SparseF2::new(key_of.len());
    let mut lengths = Vec::with_capacity(key_of.len());
    for &(a, x, wi) in &key_of {
        let w = words[wi].as_slice();
        lengths.push(w.len());
        let mut col: Vec<u32> = Vec::new();
        for i in 0..w.len().saturating_sub(1) {
            if let Some(p) = alg.mul(w[i], w[i + 1]) {
                let mut v: Inputs = SmallVec::from_slice(&w[..i]);
                v.push(p);
                v.extend_from_slice(&w[i + 2..]);
                let key = word_ids.get(v.as_slice()).map(|&k| words[k].as_slice());
                col.push(look(a, x, key.expect("bar word set not closed under merging")));
            }
        }
        for j in 0..=w.len() {
            if let Some(outs) = by_prefix.get(&(x, &w[..j])) {
                for &(b, y) in outs {
                    if let Some(ab) = alg.mul(a, b) {
                        col.push(look(ab, y, &w[j..]));
                    }
                }
            }
        }
        if let Some(&last) = w.last() {
            if let Some(p) = alg.mul(last, a) {
                col.push(look(p, x, &w[..w.len() - 1]));
            }
        }
        d.push_col(col);
    }
    let grades = match chord_grades {
        Some(cg) if m.generators().iter().all(|g| g.grade.is_some()) => Some(
            key_of
                .iter()
                .map(|&(a, x, wi)| {
                    let mut g = cg[a.0 as usize] ^ m.generator(x).grade.unwrap();
                    for e in &words[wi] {
                        g ^= cg[e.0 as usize] ^ 1;
                    }
                    g & 1
                })
                .collect(),
        ),
        _ => None,
    };
    Ok(F2Complex { d, lengths, grades })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HhMethod {
    /// Short-chord relation paths only; exact and small.
    Koszul,
    /// All bar words up to a growing length bound.
    BarTruncation { k_start: usize, k_max: usize, max_generators: usize },
}

impl HhMethod {
    pub fn bar_default() -> Self {
        HhMethod::BarTruncation { k_start: 2, k_max: 12, max_generators: 2_000_000 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HhOptions {
    pub method: HhMethod,
    /// Replace `m` by reduce([𝕀]ᵇ ⊠ (m ⊠ [𝕀]ᵇ)) first.
    pub sandwich: bool,
    /// Verify d² = 0 on the complex that is built.
    pub check_square_zero: bool,
}

impl Default for HhOptions {
    fn default() -> Self {
        HhOptions { method: HhMethod::Koszul, sandwich: false, check_square_zero: false }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HhReport {
    pub total: usize,
    /// Ranks in grades 0 and 1, when the bimodule carries a grading.
    pub graded: Option<[usize; 2]>,
    pub complex_size: usize,
    /// For bar truncation, one entry per length bound tried.
    pub truncation: Vec<TruncationStep>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncationStep {
    pub k: usize,
    /// Homology of the truncation itself.
    pub rank: usize,
    /// Rank of the map from the previous truncation's homology.
    pub persistent: Option<usize>,
    pub persistent_graded: Option<[usize; 2]>,
}

/// Sandwiches a bimodule between two copies of the bounded identity.
pub fn sandwich(m: &DABimodule) -> Result<DABimodule, HhError> {
    let ib = builtin("I_bounded").expect("bounded identity is built in");
    Ok(reduce(&box_tensor(&ib, &reduce(&box_tensor(m, &ib)?))?))
}

fn chord_grades_for(alg: &Algebra) -> Option<Vec<u8>> {
    seed_gradings().chord_grades.get(alg.name()).cloned()
}

fn report_for(c: &F2Complex, options: &HhOptions) -> Result<(usize, Option<[usize; 2]>), HhError> {
    if options.check_square_zero {
        let bad = c.d_squared_defect();
        if bad != 0 {
            return Err(HhError::NotSquareZero(bad));
        }
    }
    if !c.is_homogeneous() {
        return Err(HhError::GradingNotHomogeneous);
    }
    Ok((c.homology_rank(), c.graded_homology()))
}

pub fn hochschild_homology(m: &DABimodule, options: &HhOptions) -> Result<HhReport, HhError> {
    if m.left != m.right {
        return Err(HhError::NotAnEndomorphism(m.left.name().into(), m.right.name().into()));
    }
    let owned;
    let m = if options.sandwich {
        owned = sandwich(m)?;
        &owned
    } else {
        m
    };
    let alg = m.right.clone();
    let cg = chord_grades_for(&alg);
    match options.method {
        HhMethod::Koszul => {
            let c = hochschild_complex(m, &koszul_words(&alg), cg.as_deref())?;
            let (total, graded) = report_for(&c, options)?;
            Ok(HhReport { total, graded, complex_size: c.len(), truncation: Vec::new() })
        }
        HhMethod::BarTruncation { k_start, k_max, max_generators } => {
            bar_truncation(m, k_start, k_max, max_generators, cg.as_deref(), options)
        }
    }
}

/// Raises the bar length bound until the rank of the map on homology induced
/// by the inclusion of one truncation into the next is the same for three
/// consecutive bounds, and reports that rank.
///
/// The homology of a single truncation keeps growing with the bound because
/// each new top layer adds cycles; the image of the previous truncation does
/// not. Every class has a representative on relation paths, so the search
/// starts no lower than the longest relation path; below that, classes can
/// still be missing from the image.
fn bar_truncation(
    m: &DABimodule,
    k_start: usize,
    k_max: usize,
    cap: usize,
    cg: Option<&[u8]>,
    options: &HhOptions,
) -> Result<HhReport, HhError> {
    let alg = m.right.clone();
    let longest = koszul_words(&alg).iter().map(|w| w.len()).max().unwrap_or(0);
    let k_start = k_start.max(longest);
    let mut steps: Vec<TruncationStep> = Vec::new();
    // Per column class (all, grade 0, grade 1): homology and rank of d at the
    // previous bound.
    let mut prev: Option<Vec<(usize, usize)>> = None;
    for k in k_start..=k_max {
        let words = bar_words(&alg, k);
        let size = count_generators(m, &words);
        if size > cap {
            return Err(HhError::TooLarge { k, size, cap });
        }
        let c = hochschild_complex(m, &words, cg)?;
        report_for(&c, options)?;
        let classes: Vec<Vec<usize>> = match &c.grades {
            Some(g) => vec![(0..c.len()).collect(), (0..c.len()).filter(|&j| g[j] == 0).collect(), (0..c.len()).filter(|&j| g[j] == 1).collect()],
            None => vec![(0..c.len()).collect()],
        };
        let top = |j: usize| -> Vec<u32> { c.d.cols[j].iter().copied().filter(|&r| c.lengths[r as usize] == k).collect() };
        let rank_d: Vec<usize> = classes.iter().map(|cl| c.d.rank_of_cols(cl.iter().copied())).collect();
        let proj: Vec<usize> = classes.iter().map(|cl| f2_rank_cols(cl.iter().map(|&j| top(j)), c.len())).collect();
        let h = c.homology_rank();
        let gh = c.graded_homology();
        // Homology in the class whose boundaries come from class i.
        let homology: Vec<usize> = match gh {
            Some([h0, h1]) => vec![h, h1, h0],
            None => vec![h],
        };
        let mut step = TruncationStep { k, rank: h, persistent: None, persistent_graded: None };
        if let Some(p) = &prev {
            // Boundaries of length ≤ k that already lie in length ≤ k-1 but
            // are not boundaries there.
            let maps: Vec<usize> = (0..classes.len()).map(|i| p[i].0 - (rank_d[i] - proj[i] - p[i].1)).collect();
            step.persistent = Some(maps[0]);
            if maps.len() == 3 {
                step.persistent_graded = Some([maps[2], maps[1]]);
            }
        }
        prev = Some(homology.into_iter().zip(rank_d).collect());
        let graded = step.persistent_graded;
        steps.push(step);
        let last: Vec<Option<usize>> = steps.iter().rev().take(3).map(|s| s.persistent).collect();
        if last.len() == 3 && last[0].is_some() && last.iter().all(|x| *x == last[0]) {
            return Ok(HhReport { total: last[0].unwrap(), graded, complex_size: c.len(), truncation: steps });
        }
    }
    Err(HhError::NonStabilized { k_max, steps })
}

/// Total rank of HH by the Koszul model.
pub fn hh_rank(m: &DABimodule) -> Result<usize, HhError> {
    Ok(hochschild_homology(m, &HhOptions::default())?.total)
}
