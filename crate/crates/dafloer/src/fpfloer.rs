//! Fixed point Floer side: a cellular model of the genus-two surface with two
//! boundary circles, the chain of curves A–E on it, cutting along curves,
//! relative cohomology over F₂ and the comparison with Hochschild homology.
//!
//! The surface is the plumbing of five annuli, one around each curve of the
//! chain. Annulus ℓ is a grid of columns `s` (cyclic) by rows `0..=t_ℓ`; row
//! `k` for `1 ≤ k < t_ℓ` is the k-th parallel copy of the curve. Neighbouring
//! annuli share a square in which the columns of one are the rows of the
//! other, so copy `j` of ℓ meets copy `i` of ℓ+1 in exactly one vertex.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::algebra::UnionFind;
use crate::hochschild::{f2_rank_cols, HhError};
use crate::mcg::{bimodule_of, invert_word, Curve, Letter, McgError, MCGWord};

#[derive(Debug, Error)]
pub enum FloerError {
    #[error("invalid curve system: {0}")]
    SpecInvalid(String),
    #[error("cannot parse curve list `{0}`: expected entries like A:5,B:1")]
    SpecSyntax(String),
    #[error("relative set is not a subcomplex: {0}")]
    NotASubcomplex(String),
    #[error("surface model invariant failed: {0}")]
    ModelInvariant(String),
    #[error(transparent)]
    Mcg(#[from] McgError),
    #[error(transparent)]
    Hochschild(#[from] HhError),
}

/// A 2-dimensional cell complex over F₂. Edges list their two vertices and
/// faces list their boundary edges.
#[derive(Clone, Debug, Default)]
pub struct CellComplex {
    pub num_vertices: usize,
    pub edges: Vec<[u32; 2]>,
    pub faces: Vec<Vec<u32>>,
}

impl CellComplex {
    pub fn euler_characteristic(&self) -> i64 {
        self.num_vertices as i64 - self.edges.len() as i64 + self.faces.len() as i64
    }

    fn edge_faces(&self) -> Vec<Vec<u32>> {
        let mut out = vec![Vec::new(); self.edges.len()];
        for (f, es) in self.faces.iter().enumerate() {
            for &e in es {
                out[e as usize].push(f as u32);
            }
        }
        out
    }

    /// Edges with exactly one incident face.
    pub fn boundary_edges(&self) -> Vec<u32> {
        self.edge_faces()
            .iter()
            .enumerate()
            .filter(|(_, fs)| fs.len() == 1)
            .map(|(e, _)| e as u32)
            .collect()
    }

    /// Connected components of a set of edges, each as a closed subcomplex.
    pub fn edge_components(&self, edges: &[u32]) -> Vec<Subcomplex> {
        let mut uf = UnionFind::new(self.num_vertices);
        for &e in edges {
            let [a, b] = self.edges[e as usize];
            uf.union(a as usize, b as usize);
        }
        let mut by_root: BTreeMap<usize, Subcomplex> = BTreeMap::new();
        for &e in edges {
            let [a, b] = self.edges[e as usize];
            let c = by_root.entry(uf.find(a as usize)).or_default();
            c.edges.insert(e);
            c.vertices.insert(a);
            c.vertices.insert(b);
        }
        by_root.into_values().collect()
    }

    /// Checks ∂∂ = 0 and that every edge has one or two faces.
    pub fn check_surface(&self) -> Result<(), FloerError> {
        for (f, es) in self.faces.iter().enumerate() {
            let mut count: HashMap<u32, usize> = HashMap::new();
            for &e in es {
                for v in self.edges[e as usize] {
                    *count.entry(v).or_default() += 1;
                }
            }
            if count.values().any(|c| c % 2 == 1) {
                return Err(FloerError::ModelInvariant(format!("face {f} has nonzero boundary of boundary")));
            }
        }
        if let Some((e, fs)) = self.edge_faces().iter().enumerate().find(|(_, fs)| fs.is_empty() || fs.len() > 2) {
            return Err(FloerError::ModelInvariant(format!("edge {e} has {} faces", fs.len())));
        }
        Ok(())
    }

    /// Ranks (h⁰, h¹, h²) of the cohomology of the pair (self, rel) over F₂.
    pub fn relative_cohomology(&self, rel: &Subcomplex) -> Result<[usize; 3], FloerError> {
        rel.check_closed(self)?;
        let vkeep: Vec<u32> = (0..self.num_vertices as u32).filter(|v| !rel.vertices.contains(v)).collect();
        let ekeep: Vec<u32> = (0..self.edges.len() as u32).filter(|e| !rel.edges.contains(e)).collect();
        let fkeep: Vec<u32> = (0..self.faces.len() as u32).filter(|f| !rel.faces.contains(f)).collect();
        let vpos: HashMap<u32, u32> = vkeep.iter().enumerate().map(|(i, &v)| (v, i as u32)).collect();
        let epos: HashMap<u32, u32> = ekeep.iter().enumerate().map(|(i, &e)| (e, i as u32)).collect();
        let d1 = ekeep.iter().map(|&e| {
            let mut c: Vec<u32> = self.edges[e as usize].iter().filter_map(|v| vpos.get(v).copied()).collect();
            c.sort_unstable();
            c.dedup();
            c
        });
        let r1 = f2_rank_cols(d1, vkeep.len());
        let d2 = fkeep.iter().map(|&f| {
            let mut c: Vec<u32> = self.faces[f as usize].iter().filter_map(|e| epos.get(e).copied()).collect();
            c.sort_unstable();
            c
        });
        let r2 = f2_rank_cols(d2, ekeep.len());
        Ok([vkeep.len() - r1, ekeep.len() - r1 - r2, fkeep.len() - r2])
    }
}

/// A set of cells; used for curves, boundary circles and relative sets.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Subcomplex {
    pub vertices: BTreeSet<u32>,
    pub edges: BTreeSet<u32>,
    pub faces: BTreeSet<u32>,
}

impl Subcomplex {
    pub fn union(&self, other: &Subcomplex) -> Subcomplex {
        Subcomplex {
            vertices: self.vertices.union(&other.vertices).copied().collect(),
            edges: self.edges.union(&other.edges).copied().collect(),
            faces: self.faces.union(&other.faces).copied().collect(),
        }
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edges.len() as i64 + self.faces.len() as i64
    }

    pub fn check_closed(&self, x: &CellComplex) -> Result<(), FloerError> {
        for &e in &self.edges {
            if x.edges[e as usize].iter().any(|v| !self.vertices.contains(v)) {
                return Err(FloerError::NotASubcomplex(format!("edge {e} without its vertices")));
            }
        }
        for &f in &self.faces {
            if x.faces[f as usize].iter().any(|e| !self.edges.contains(e)) {
                return Err(FloerError::NotASubcomplex(format!("face {f} without its edges")));
            }
        }
        Ok(())
    }

    /// Connected, no faces, and every vertex meets exactly two of its edges.
    pub fn is_circle(&self, x: &CellComplex) -> bool {
        if !self.faces.is_empty() || self.edges.is_empty() {
            return false;
        }
        let mut deg: HashMap<u32, usize> = HashMap::new();
        for &e in &self.edges {
            for v in x.edges[e as usize] {
                *deg.entry(v).or_default() += 1;
            }
        }
        let comps = x.edge_components(&self.edges.iter().copied().collect::<Vec<_>>());
        comps.len() == 1 && deg.len() == self.vertices.len() && deg.values().all(|&d| d == 2)
    }
}

/// The surface with its two boundary circles and the curve copies.
#[derive(Clone, Debug)]
pub struct SurfaceModel {
    pub complex: CellComplex,
    pub u1: Subcomplex,
    pub u2: Subcomplex,
    /// Copy `k` (1-based) of each curve.
    pub curves: BTreeMap<(Curve, usize), Subcomplex>,
    /// Rows per annulus; copies `1..t` exist.
    pub levels: [usize; 5],
}

type Key = (usize, usize, usize);

/// Which boundary circle plays U1.
///
/// `Calibrated` takes the circle through the corner of the A–B plumbing
/// square at column 0 of both annuli. The reference ranks were computed under
/// both labelings and agree, so the choice is a fixed convention.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum BoundaryLabeling {
    #[default]
    Calibrated,
    Swapped,
}

fn columns(t: &[usize; 5]) -> ([usize; 5], [Option<usize>; 5], [Option<usize>; 5]) {
    // Window for the previous curve starts at 0; window for the next one
    // follows after a free stretch of three edges.
    let mut width = [0; 5];
    let mut prev = [None; 5];
    let mut next = [None; 5];
    for l in 0..5 {
        let mut s = 0;
        if l > 0 {
            prev[l] = Some(0);
            s += t[l - 1] + 3;
        }
        if l < 4 {
            next[l] = Some(s);
            s += t[l + 1] + 3;
        }
        width[l] = s;
    }
    (width, prev, next)
}

/// The surface with `levels[ℓ] - 1` parallel copies of curve ℓ.
pub fn build_model_with(levels: [usize; 5], labeling: BoundaryLabeling) -> Result<SurfaceModel, FloerError> {
    if levels.iter().any(|&t| t < 2) {
        return Err(FloerError::ModelInvariant("every annulus needs at least two rows".into()));
    }
    let (width, prev, next) = columns(&levels);
    let mut keys: Vec<Key> = Vec::new();
    let mut key_id: HashMap<Key, usize> = HashMap::new();
    for l in 0..5 {
        for s in 0..width[l] {
            for r in 0..=levels[l] {
                key_id.insert((l, s, r), keys.len());
                keys.push((l, s, r));
            }
        }
    }
    let mut uf = UnionFind::new(keys.len());
    for l in 0..4 {
        let (p, q) = (next[l].unwrap(), prev[l + 1].unwrap());
        for i in 0..=levels[l + 1] {
            for j in 0..=levels[l] {
                uf.union(key_id[&(l, p + i, j)], key_id[&(l + 1, q + j, i)]);
            }
        }
    }
    // Vertex ids in order of first key.
    let mut root_id: HashMap<usize, u32> = HashMap::new();
    let mut vid = vec![0u32; keys.len()];
    for (k, v) in vid.iter_mut().enumerate() {
        let n = root_id.len() as u32;
        *v = *root_id.entry(uf.find(k)).or_insert(n);
    }
    let vert = |k: Key| vid[key_id[&k]];
    let mut complex = CellComplex { num_vertices: root_id.len(), ..Default::default() };
    let mut edge_id: HashMap<[u32; 2], u32> = HashMap::new();
    let mut edge = |complex: &mut CellComplex, a: u32, b: u32| -> u32 {
        let k = if a < b { [a, b] } else { [b, a] };
        *edge_id.entry(k).or_insert_with(|| {
            complex.edges.push(k);
            complex.edges.len() as u32 - 1
        })
    };
    let mut seen_faces: BTreeSet<Vec<u32>> = BTreeSet::new();
    for l in 0..5 {
        let w = width[l];
        for s in 0..w {
            for r in 0..levels[l] {
                let c = [vert((l, s, r)), vert((l, (s + 1) % w, r)), vert((l, (s + 1) % w, r + 1)), vert((l, s, r + 1))];
                let mut sorted = c.to_vec();
                sorted.sort_unstable();
                if !seen_faces.insert(sorted) {
                    continue;
                }
                let es = (0..4).map(|i| edge(&mut complex, c[i], c[(i + 1) % 4])).collect();
                complex.faces.push(es);
            }
        }
    }
    let mut curves = BTreeMap::new();
    for (l, curve) in Curve::ALL.into_iter().enumerate() {
        let w = width[l];
        for k in 1..levels[l] {
            let mut c = Subcomplex::default();
            for s in 0..w {
                let (a, b) = (vert((l, s, k)), vert((l, (s + 1) % w, k)));
                c.vertices.insert(a);
                c.edges.insert(edge(&mut complex, a, b));
            }
            curves.insert((curve, k), c);
        }
    }
    if complex.edges.len() != edge_id.len() {
        return Err(FloerError::ModelInvariant("curve edge outside the face structure".into()));
    }
    complex.check_surface()?;
    let bd = complex.edge_components(&complex.boundary_edges());
    if bd.len() != 2 {
        return Err(FloerError::ModelInvariant(format!("{} boundary circles, expected 2", bd.len())));
    }
    let corner = vert((0, 0, 0));
    let (mut u1, mut u2) = (bd[0].clone(), bd[1].clone());
    if u1.vertices.contains(&corner) != (labeling == BoundaryLabeling::Calibrated) {
        std::mem::swap(&mut u1, &mut u2);
    }
    let model = SurfaceModel { complex, u1, u2, curves, levels };
    model.check_invariants()?;
    Ok(model)
}

/// The base model with one copy of each curve.
pub fn build_model() -> SurfaceModel {
    build_model_with([2; 5], BoundaryLabeling::Calibrated).expect("base surface model is valid")
}

impl SurfaceModel {
    pub fn curve(&self, c: Curve, copy: usize) -> Option<&Subcomplex> {
        self.curves.get(&(c, copy))
    }

    pub fn num_boundary_circles(&self) -> usize {
        self.complex.edge_components(&self.complex.boundary_edges()).len()
    }

    /// Rank of the span of the first copies of A..E in H₁.
    pub fn curve_span_rank(&self) -> usize {
        let x = &self.complex;
        let faces: Vec<Vec<u32>> = x.faces.iter().map(|f| sorted(f.clone())).collect();
        let r2 = f2_rank_cols(faces.iter().cloned(), x.edges.len());
        let curves = Curve::ALL.iter().filter_map(|&c| self.curve(c, 1)).map(|s| s.edges.iter().copied().collect());
        f2_rank_cols(faces.into_iter().chain(curves), x.edges.len()) - r2
    }

    /// Surface checks: χ, boundary, cohomology, curve circles and their
    /// intersection pattern.
    pub fn check_invariants(&self) -> Result<(), FloerError> {
        let fail = |m: String| Err(FloerError::ModelInvariant(m));
        if self.complex.euler_characteristic() != -4 {
            return fail(format!("χ = {}", self.complex.euler_characteristic()));
        }
        let h = self.complex.relative_cohomology(&Subcomplex::default())?;
        if h != [1, 5, 0] {
            return fail(format!("H* = {h:?}"));
        }
        for ((c, k), s) in &self.curves {
            if !s.is_circle(&self.complex) {
                return fail(format!("copy {k} of {c:?} is not a circle"));
            }
        }
        for ((c1, k1), s1) in &self.curves {
            for ((c2, k2), s2) in &self.curves {
                if (c1, k1) >= (c2, k2) {
                    continue;
                }
                let meet = s1.vertices.intersection(&s2.vertices).count();
                let want = usize::from(c1.adjacent(*c2));
                if meet != want || !s1.edges.is_disjoint(&s2.edges) {
                    return fail(format!("{c1:?}{k1} and {c2:?}{k2} meet in {meet} vertices"));
                }
            }
            if !s1.vertices.is_disjoint(&self.u1.vertices) || !s1.vertices.is_disjoint(&self.u2.vertices) {
                return fail(format!("copy {k1} of {c1:?} touches the boundary"));
            }
        }
        if self.curve_span_rank() != 5 {
            return fail("curves do not span H¹".into());
        }
        Ok(())
    }
}

fn sorted(mut v: Vec<u32>) -> Vec<u32> {
    v.sort_unstable();
    v
}

/// Curves twisted positively (right) and negatively (left) with multiplicities.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CurveSystemSpec {
    pub right: BTreeMap<Curve, usize>,
    pub left: BTreeMap<Curve, usize>,
}

impl CurveSystemSpec {
    /// Parses lists like `A:5,B:1,C`; a bare letter means multiplicity 1.
    pub fn parse(right: &str, left: &str) -> Result<Self, FloerError> {
        Ok(CurveSystemSpec { right: parse_curve_list(right)?, left: parse_curve_list(left)? })
    }

    fn active(m: &BTreeMap<Curve, usize>) -> impl Iterator<Item = (Curve, usize)> + '_ {
        m.iter().filter(|(_, &k)| k > 0).map(|(&c, &k)| (c, k))
    }

    pub fn validate(&self) -> Result<(), FloerError> {
        let right: BTreeMap<Curve, usize> = Self::active(&self.right).collect();
        let left: BTreeMap<Curve, usize> = Self::active(&self.left).collect();
        for c in right.keys() {
            if left.contains_key(c) {
                return Err(FloerError::SpecInvalid(format!("{c:?} is twisted both ways")));
            }
        }
        for r in right.keys() {
            for l in left.keys() {
                if r.adjacent(*l) {
                    return Err(FloerError::SpecInvalid(format!("{r:?} (right) intersects {l:?} (left)")));
                }
            }
        }
        let all: BTreeMap<Curve, usize> = right.into_iter().chain(left).collect();
        for (a, m) in &all {
            for (b, n) in &all {
                if a < b && a.adjacent(*b) && *m >= 2 && *n >= 2 {
                    return Err(FloerError::SpecInvalid(format!(
                        "{a:?} and {b:?} intersect and both have multiplicity at least 2"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Right curves as positive letters, then left curves as negative letters,
    /// each in chain order.
    pub fn word(&self) -> MCGWord {
        let mut letters = Vec::new();
        for (m, inverse) in [(&self.right, false), (&self.left, true)] {
            for (c, k) in Self::active(m) {
                letters.extend(std::iter::repeat_n(Letter { curve: c, inverse }, k));
            }
        }
        MCGWord { letters }
    }
}

impl fmt::Display for CurveSystemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |m: &BTreeMap<Curve, usize>| {
            Self::active(m).map(|(c, k)| format!("{}:{k}", c.as_char())).collect::<Vec<_>>().join(",")
        };
        write!(f, "right [{}] left [{}]", list(&self.right), list(&self.left))
    }
}

fn parse_curve_list(text: &str) -> Result<BTreeMap<Curve, usize>, FloerError> {
    let mut out = BTreeMap::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let bad = || FloerError::SpecSyntax(item.to_string());
        let (name, mult) = match item.split_once(':') {
            Some((n, m)) => (n.trim(), m.trim().parse::<usize>().map_err(|_| bad())?),
            None => (item, 1),
        };
        let mut chars = name.chars();
        let curve = match (chars.next(), chars.next()) {
            (Some(c), None) => Curve::from_char(c).ok_or_else(bad)?,
            _ => return Err(bad()),
        };
        if out.insert(curve, mult).is_some() {
            return Err(bad());
        }
    }
    Ok(out)
}

/// Cuts the complex along a set of edges forming disjoint circles. Returns the
/// new complex with maps from untouched old vertices and edges to new ones.
fn cut_along(x: &CellComplex, cut: &BTreeSet<u32>) -> (CellComplex, HashMap<u32, u32>, HashMap<u32, u32>) {
    let edge_faces = x.edge_faces();
    let cut_vertices: BTreeSet<u32> = cut.iter().flat_map(|&e| x.edges[e as usize]).collect();
    let mut incident: HashMap<u32, Vec<u32>> = HashMap::new();
    for (e, [a, b]) in x.edges.iter().enumerate() {
        for v in [a, b] {
            if cut_vertices.contains(v) {
                incident.entry(*v).or_default().push(e as u32);
            }
        }
    }
    // Sectors around each cut vertex: faces joined across uncut edges at v.
    let mut sector: HashMap<(u32, u32), u32> = HashMap::new();
    let mut vmap: HashMap<u32, u32> = HashMap::new();
    let mut n = 0u32;
    for v in 0..x.num_vertices as u32 {
        if !cut_vertices.contains(&v) {
            vmap.insert(v, n);
            n += 1;
            continue;
        }
        let faces: Vec<u32> = incident[&v].iter().flat_map(|&e| edge_faces[e as usize].iter().copied()).collect::<BTreeSet<_>>().into_iter().collect();
        let pos: HashMap<u32, usize> = faces.iter().enumerate().map(|(i, &f)| (f, i)).collect();
        let mut uf = UnionFind::new(faces.len());
        for &e in &incident[&v] {
            if !cut.contains(&e) {
                let fs = &edge_faces[e as usize];
                for w in fs.windows(2) {
                    uf.union(pos[&w[0]], pos[&w[1]]);
                }
            }
        }
        let mut root_new: BTreeMap<usize, u32> = BTreeMap::new();
        for &f in &faces {
            let r = uf.find(pos[&f]);
            let id = *root_new.entry(r).or_insert_with(|| {
                n += 1;
                n - 1
            });
            sector.insert((v, f), id);
        }
    }
    let end = |v: u32, f: u32| -> u32 { vmap.get(&v).copied().unwrap_or_else(|| sector[&(v, f)]) };
    let mut out = CellComplex { num_vertices: n as usize, ..Default::default() };
    let mut emap: HashMap<u32, u32> = HashMap::new();
    let mut split: HashMap<(u32, u32), u32> = HashMap::new();
    for (e, &[a, b]) in x.edges.iter().enumerate() {
        let e = e as u32;
        let fs = &edge_faces[e as usize];
        if cut.contains(&e) {
            for &f in fs {
                split.insert((e, f), out.edges.len() as u32);
                out.edges.push([end(a, f), end(b, f)]);
            }
        } else {
            emap.insert(e, out.edges.len() as u32);
            out.edges.push([end(a, fs[0]), end(b, fs[0])]);
        }
    }
    for (f, es) in x.faces.iter().enumerate() {
        let f = f as u32;
        out.faces.push(es.iter().map(|&e| if cut.contains(&e) { split[&(e, f)] } else { emap[&e] }).collect());
    }
    (out, vmap, emap)
}

fn map_sub(s: &Subcomplex, vmap: &HashMap<u32, u32>, emap: &HashMap<u32, u32>) -> Result<Subcomplex, FloerError> {
    let miss = || FloerError::ModelInvariant("relative set meets a cut curve".into());
    Ok(Subcomplex {
        vertices: s.vertices.iter().map(|v| vmap.get(v).copied().ok_or_else(miss)).collect::<Result<_, _>>()?,
        edges: s.edges.iter().map(|e| emap.get(e).copied().ok_or_else(miss)).collect::<Result<_, _>>()?,
        faces: BTreeSet::new(),
    })
}

/// The cut surface and the relative set R ∪ U1 for a curve system.
#[derive(Clone, Debug)]
pub struct CutModel {
    pub complex: CellComplex,
    pub relset: Subcomplex,
    pub boundary_circles: usize,
}

/// Refines the grid so every curve has enough parallel copies, cuts along the
/// left copies and collects the right copies with U1.
pub fn apply_curve_spec(spec: &CurveSystemSpec) -> Result<CutModel, FloerError> {
    apply_curve_spec_with(spec, BoundaryLabeling::Calibrated)
}

pub fn apply_curve_spec_with(spec: &CurveSystemSpec, labeling: BoundaryLabeling) -> Result<CutModel, FloerError> {
    spec.validate()?;
    let mut levels = [2usize; 5];
    for (c, k) in CurveSystemSpec::active(&spec.right).chain(CurveSystemSpec::active(&spec.left)) {
        levels[c.index()] = levels[c.index()].max(k + 1);
    }
    let model = build_model_with(levels, labeling)?;
    let curves = &model.curves;
    let copies = |m: &BTreeMap<Curve, usize>| -> Vec<&Subcomplex> {
        CurveSystemSpec::active(m).flat_map(|(c, k)| (1..=k).map(move |i| &curves[&(c, i)])).collect()
    };
    let cut: BTreeSet<u32> = copies(&spec.left).iter().flat_map(|s| s.edges.iter().copied()).collect();
    let left_copies = copies(&spec.left);
    let cut_vertices: BTreeSet<u32> = left_copies.iter().flat_map(|s| s.vertices.iter().copied()).collect();
    let cut_euler = cut_vertices.len() as i64 - cut.len() as i64;
    let disjoint = left_copies.iter().map(|s| s.vertices.len()).sum::<usize>() == cut_vertices.len();
    let (complex, vmap, emap) = cut_along(&model.complex, &cut);
    let mut relset = map_sub(&model.u1, &vmap, &emap)?;
    for s in copies(&spec.right) {
        relset = relset.union(&map_sub(s, &vmap, &emap)?);
    }
    complex.check_surface()?;
    let boundary_circles = complex.edge_components(&complex.boundary_edges()).len();
    // The cut surface is Σ − L, so χ drops by χ(L); disjoint circles add two
    // boundary circles each.
    let euler_ok = complex.euler_characteristic() == model.complex.euler_characteristic() - cut_euler;
    if !euler_ok || (disjoint && boundary_circles != 2 + 2 * left_copies.len()) {
        return Err(FloerError::ModelInvariant(format!(
            "cutting along {} circles gave χ = {} and {boundary_circles} boundary circles",
            left_copies.len(),
            complex.euler_characteristic()
        )));
    }
    Ok(CutModel { complex, relset, boundary_circles })
}

/// Ranks of HF by degree, with the total and the mod-2 parts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FloerRanks {
    pub degrees: [usize; 3],
    pub total: usize,
    pub even: usize,
    pub odd: usize,
}

impl FloerRanks {
    fn new(degrees: [usize; 3]) -> Self {
        FloerRanks {
            degrees,
            total: degrees.iter().sum(),
            even: degrees[0] + degrees[2],
            odd: degrees[1],
        }
    }
}

/// HF of a product of twists along a forest of chain curves, as the relative
/// cohomology H*(Σ − L, R ∪ U1).
pub fn eftekhary_rank(spec: &CurveSystemSpec) -> Result<FloerRanks, FloerError> {
    eftekhary_rank_with(spec, BoundaryLabeling::Calibrated)
}

pub fn eftekhary_rank_with(spec: &CurveSystemSpec, labeling: BoundaryLabeling) -> Result<FloerRanks, FloerError> {
    let cut = apply_curve_spec_with(spec, labeling)?;
    let h = cut.complex.relative_cohomology(&cut.relset)?;
    let euler = h[0] as i64 - h[1] as i64 + h[2] as i64;
    if euler != cut.complex.euler_characteristic() - cut.relset.euler_characteristic() {
        return Err(FloerError::ModelInvariant(format!("relative Euler identity fails for {h:?}")));
    }
    Ok(FloerRanks::new(h))
}

#[derive(Clone, Debug, Serialize)]
pub struct Crosscheck {
    pub spec: CurveSystemSpec,
    pub word: String,
    pub hh_total: usize,
    pub hh_graded: Option<[usize; 2]>,
    pub hf: FloerRanks,
    pub totals_match: bool,
    /// HH grade g against HF grade g+1, when HH is graded.
    pub shifted_grades_match: Option<bool>,
    /// Graded ranks agree after some overall shift. The mod-2 grading of a
    /// product of twists is fixed only up to such a shift, so this is the
    /// meaningful comparison for words other than the identity.
    pub grades_match_up_to_shift: Option<bool>,
}

/// Compares rank HH(N(w⁻¹)) for the twist word of a curve system with its HF ranks.
pub fn crosscheck(spec: &CurveSystemSpec) -> Result<Crosscheck, FloerError> {
    spec.validate()?;
    let w = spec.word();
    let hf = eftekhary_rank(spec)?;
    let hh = crate::hochschild::hochschild_homology(&bimodule_of(&invert_word(&w))?, &Default::default())?;
    let shifted = hh.graded.map(|[g0, g1]| g0 == hf.odd && g1 == hf.even);
    let up_to_shift = hh.graded.map(|[g0, g1]| (g0 == hf.odd && g1 == hf.even) || (g0 == hf.even && g1 == hf.odd));
    Ok(Crosscheck {
        spec: spec.clone(),
        word: w.to_string(),
        hh_total: hh.total,
        hh_graded: hh.graded,
        hf,
        totals_match: hh.total == hf.total,
        shifted_grades_match: shifted,
        grades_match_up_to_shift: up_to_shift,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(r: &str, l: &str) -> CurveSystemSpec {
        CurveSystemSpec::parse(r, l).unwrap()
    }

    #[test]
    fn base_model() {
        let m = build_model();
        assert_eq!(m.complex.euler_characteristic(), -4);
        assert_eq!(m.num_boundary_circles(), 2);
        assert_eq!(m.complex.relative_cohomology(&Subcomplex::default()).unwrap(), [1, 5, 0]);
        assert_eq!(m.complex.relative_cohomology(&m.u1).unwrap(), [0, 4, 0]);
        assert_eq!(m.curve_span_rank(), 5);
    }

    #[test]
    fn spec_validation() {
        assert!(spec("A", "B").validate().is_err());
        assert!(spec("A", "A").validate().is_err());
        assert!(spec("A:2,B:2", "").validate().is_err());
        assert!(spec("A:5,B,C,D,E:5", "").validate().is_ok());
        assert!(spec("A", "C").validate().is_ok());
        assert!(CurveSystemSpec::parse("A:x", "").is_err());
        assert!(CurveSystemSpec::parse("F", "").is_err());
    }

    #[test]
    fn reference_ranks() {
        assert_eq!(eftekhary_rank(&spec("", "")).unwrap().degrees, [0, 4, 0]);
        assert_eq!(eftekhary_rank(&spec("A", "")).unwrap().total, 4);
        assert_eq!(eftekhary_rank(&spec("", "A")).unwrap().total, 4);
        assert_eq!(eftekhary_rank(&spec("A,B,C,D", "")).unwrap().total, 1);
        assert_eq!(eftekhary_rank(&spec("A:5,B,C,D,E:5", "")).unwrap().total, 10);
    }

    #[test]
    fn boundary_labeling_calibration() {
        for (r, l) in [("", ""), ("A", ""), ("", "A"), ("A,B,C,D", ""), ("A:5,B,C,D,E:5", ""), ("B:2,D", "")] {
            let s = spec(r, l);
            assert_eq!(
                eftekhary_rank_with(&s, BoundaryLabeling::Calibrated).unwrap(),
                eftekhary_rank_with(&s, BoundaryLabeling::Swapped).unwrap()
            );
        }
    }

    #[test]
    fn cutting_adds_boundary() {
        let c = apply_curve_spec(&spec("", "A")).unwrap();
        assert_eq!(c.boundary_circles, 4);
        let c = apply_curve_spec(&spec("", "C:3")).unwrap();
        assert_eq!(c.boundary_circles, 8);
    }
}
