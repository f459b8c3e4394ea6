//! Pointed matched circles and the one-moving-strand algebra B(Z).
//!
//! Points of a circle are numbered 0..n-1 in the order obtained by cutting at
//! the basepoint. The basis of B(Z) is one idempotent per matched pair plus one
//! chord [a,b] for every a < b. Chords concatenate; every other product of two
//! chords is zero.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("matching of circle `{0}` is not a partition of 0..{1}")]
    NotAPartition(String, usize),
    #[error("circle `{name}`: surgery on all pairs gives {components} circles, expected 1")]
    SurgeryDisconnected { name: String, components: usize },
    #[error("elements from different circles: `{0}` and `{1}`")]
    MixedCircles(String, String),
}

/// A basis element of B(Z), interned as an index into its algebra.
///
/// Indices `0..num_pairs` are idempotents; the rest are chords in
/// lexicographic order of their endpoints.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Elem(pub u16);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ElemKind {
    Idempotent(usize),
    Chord(usize, usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointedMatchedCircle {
    pub name: String,
    pub num_points: usize,
    /// Matched pairs (a,b) with a < b, sorted by a.
    pub pairs: Vec<(usize, usize)>,
}

impl PointedMatchedCircle {
    pub fn new(
        num_points: usize,
        matching: &[(usize, usize)],
        name: &str,
    ) -> Result<Self, AlgebraError> {
        let bad = || AlgebraError::NotAPartition(name.to_string(), num_points);
        if !num_points.is_multiple_of(2) || matching.len() * 2 != num_points {
            return Err(bad());
        }
        let mut seen = vec![false; num_points];
        let mut pairs = Vec::with_capacity(matching.len());
        for &(a, b) in matching {
            if a >= num_points || b >= num_points || a == b || seen[a] || seen[b] {
                return Err(bad());
            }
            seen[a] = true;
            seen[b] = true;
            pairs.push((a.min(b), a.max(b)));
        }
        pairs.sort();
        let circle = PointedMatchedCircle { name: name.to_string(), num_points, pairs };
        let components = circle.surgery_components();
        if components != 1 {
            return Err(AlgebraError::SurgeryDisconnected { name: name.to_string(), components });
        }
        Ok(circle)
    }

    pub fn genus(&self) -> usize {
        self.num_points / 4
    }

    pub fn partner(&self, p: usize) -> usize {
        for &(a, b) in &self.pairs {
            if a == p {
                return b;
            }
            if b == p {
                return a;
            }
        }
        unreachable!("point {p} not matched")
    }

    pub fn pair_of(&self, p: usize) -> usize {
        self.pairs.iter().position(|&(a, b)| a == p || b == p).expect("point is matched")
    }

    /// Number of boundary circles after attaching a 1-handle to every matched
    /// pair of the circle.
    ///
    /// The cut circle is split into arcs between consecutive points. An
    /// orientable band on (a,b) joins the end arriving at a to the end leaving
    /// b, and the end arriving at b to the end leaving a. Components are traced
    /// with a union-find over arc ends.
    pub fn surgery_components(&self) -> usize {
        let n = self.num_points;
        // Arc i runs from point i to point (i+1) mod n around the whole circle.
        // Its ends are 2i (at point i) and 2i+1 (at point i+1).
        let mut uf = UnionFind::new(2 * n);
        for i in 0..n {
            uf.union(2 * i, 2 * i + 1);
        }
        let arrive = |p: usize| 2 * ((p + n - 1) % n) + 1;
        let leave = |p: usize| 2 * p;
        for &(a, b) in &self.pairs {
            uf.union(arrive(a), leave(b));
            uf.union(arrive(b), leave(a));
        }
        let mut roots: Vec<usize> = (0..2 * n).map(|i| uf.find(i)).collect();
        roots.sort();
        roots.dedup();
        roots.len()
    }
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }
    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }
    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// The algebra B(Z) with precomputed multiplication table.
#[derive(Debug)]
pub struct Algebra {
    pub circle: PointedMatchedCircle,
    kinds: Vec<ElemKind>,
    left: Vec<Elem>,
    right: Vec<Elem>,
    mul: Vec<Option<Elem>>,
    chord_index: Vec<Option<Elem>>,
    short_names: bool,
}

impl PartialEq for Algebra {
    fn eq(&self, other: &Self) -> bool {
        self.circle.num_points == other.circle.num_points && self.circle.pairs == other.circle.pairs
    }
}
impl Eq for Algebra {}

impl Algebra {
    pub fn new(circle: PointedMatchedCircle) -> Arc<Algebra> {
        let n = circle.num_points;
        let np = circle.pairs.len();
        let mut kinds: Vec<ElemKind> = (0..np).map(ElemKind::Idempotent).collect();
        let mut chord_index = vec![None; n * n];
        for a in 0..n {
            for b in a + 1..n {
                chord_index[a * n + b] = Some(Elem(kinds.len() as u16));
                kinds.push(ElemKind::Chord(a, b));
            }
        }
        let left = kinds
            .iter()
            .map(|k| match *k {
                ElemKind::Idempotent(i) => Elem(i as u16),
                ElemKind::Chord(a, _) => Elem(circle.pair_of(a) as u16),
            })
            .collect();
        let right = kinds
            .iter()
            .map(|k| match *k {
                ElemKind::Idempotent(i) => Elem(i as u16),
                ElemKind::Chord(_, b) => Elem(circle.pair_of(b) as u16),
            })
            .collect();
        let size = kinds.len();
        let mut alg = Algebra {
            short_names: circle.num_points == 8 && circle.pairs == [(0, 2), (1, 3), (4, 6), (5, 7)],
            circle,
            kinds,
            left,
            right,
            mul: vec![None; size * size],
            chord_index,
        };
        for x in 0..size {
            for y in 0..size {
                alg.mul[x * size + y] = alg.compute_product(Elem(x as u16), Elem(y as u16));
            }
        }
        Arc::new(alg)
    }

    fn compute_product(&self, x: Elem, y: Elem) -> Option<Elem> {
        match (self.kind(x), self.kind(y)) {
            (ElemKind::Idempotent(i), ElemKind::Idempotent(j)) => (i == j).then_some(x),
            (ElemKind::Idempotent(_), _) => (self.left(y) == x).then_some(y),
            (_, ElemKind::Idempotent(_)) => (self.right(x) == y).then_some(x),
            (ElemKind::Chord(p, q), ElemKind::Chord(q2, r)) => {
                if q == q2 {
                    self.chord(p, r)
                } else {
                    None
                }
            }
        }
    }

    pub fn name(&self) -> &str {
        &self.circle.name
    }

    pub fn len(&self) -> usize {
        self.kinds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kinds.is_empty()
    }

    pub fn num_idempotents(&self) -> usize {
        self.circle.pairs.len()
    }

    /// All basis elements: idempotents first, then chords lexicographically.
    pub fn basis(&self) -> impl Iterator<Item = Elem> + '_ {
        (0..self.kinds.len()).map(|i| Elem(i as u16))
    }

    pub fn chords(&self) -> impl Iterator<Item = Elem> + '_ {
        (self.num_idempotents()..self.kinds.len()).map(|i| Elem(i as u16))
    }

    pub fn kind(&self, x: Elem) -> ElemKind {
        self.kinds[x.0 as usize]
    }

    pub fn is_idempotent(&self, x: Elem) -> bool {
        (x.0 as usize) < self.num_idempotents()
    }

    pub fn idempotent(&self, pair: usize) -> Elem {
        assert!(pair < self.num_idempotents());
        Elem(pair as u16)
    }

    pub fn chord(&self, a: usize, b: usize) -> Option<Elem> {
        let n = self.circle.num_points;
        if a < b && b < n {
            self.chord_index[a * n + b]
        } else {
            None
        }
    }

    /// ρ_k for the standard circle is `short(k-1)`.
    pub fn short_chord(&self, a: usize) -> Option<Elem> {
        self.chord(a, a + 1)
    }

    pub fn left(&self, x: Elem) -> Elem {
        self.left[x.0 as usize]
    }

    pub fn right(&self, x: Elem) -> Elem {
        self.right[x.0 as usize]
    }

    pub fn idempotent_of(&self, x: Elem, side: Side) -> Elem {
        match side {
            Side::Left => self.left(x),
            Side::Right => self.right(x),
        }
    }

    #[inline]
    pub fn mul(&self, x: Elem, y: Elem) -> Option<Elem> {
        self.mul[x.0 as usize * self.kinds.len() + y.0 as usize]
    }

    /// Multiplication checked against a second algebra handle.
    pub fn multiply(
        a: (&Algebra, Elem),
        b: (&Algebra, Elem),
    ) -> Result<Option<Elem>, AlgebraError> {
        if a.0 != b.0 {
            return Err(AlgebraError::MixedCircles(a.0.name().into(), b.0.name().into()));
        }
        Ok(a.0.mul(a.1, b.1))
    }

    /// Canonical text: `i<k>`, `r<digits>` on the standard genus-2 circle,
    /// `[a,b]` elsewhere.
    pub fn fmt_elem(&self, x: Elem) -> String {
        match self.kind(x) {
            ElemKind::Idempotent(i) => format!("i{i}"),
            ElemKind::Chord(a, b) if self.short_names => {
                let mut s = String::from("r");
                for k in a + 1..=b {
                    s.push_str(&k.to_string());
                }
                s
            }
            ElemKind::Chord(a, b) => format!("[{a},{b}]"),
        }
    }

    /// Parses an element token. Accepted: `i<k>`, `{a,b}` (idempotent of the
    /// matched pair), `r<digits>` with consecutive ascending digits,
    /// `[a,b]`, `|(a->b)|`.
    pub fn parse_elem(&self, tok: &str) -> Option<Elem> {
        let t = tok.trim();
        if let Some(k) = t.strip_prefix('i') {
            let k: usize = k.parse().ok()?;
            return (k < self.num_idempotents()).then(|| self.idempotent(k));
        }
        if let Some(inner) = t.strip_prefix('{').and_then(|s| s.strip_suffix('}')) {
            let (a, b) = parse_two(inner, ",")?;
            let p = (a.min(b), a.max(b));
            return self.circle.pairs.iter().position(|&q| q == p).map(|i| self.idempotent(i));
        }
        if let Some(d) = t.strip_prefix('r') {
            let digits: Vec<usize> =
                d.chars().map(|c| c.to_digit(10).map(|v| v as usize)).collect::<Option<_>>()?;
            if digits.is_empty() || digits.windows(2).any(|w| w[1] != w[0] + 1) || digits[0] == 0 {
                return None;
            }
            return self.chord(digits[0] - 1, *digits.last().unwrap());
        }
        if let Some(inner) = t.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            let (a, b) = parse_two(inner, ",")?;
            return self.chord(a, b);
        }
        if let Some(inner) = t.strip_prefix("|(").and_then(|s| s.strip_suffix(")|")) {
            let (a, b) = parse_two(inner, "->").or_else(|| parse_two(inner, "→"))?;
            return self.chord(a, b);
        }
        None
    }

    /// Chords of length one, i.e. the arrows of the quiver.
    pub fn short_chords(&self) -> Vec<Elem> {
        (0..self.circle.num_points.saturating_sub(1)).filter_map(|a| self.short_chord(a)).collect()
    }

    /// All factorizations x = u·v with u, v chords.
    pub fn factorizations(&self, x: Elem) -> Vec<(Elem, Elem)> {
        match self.kind(x) {
            ElemKind::Idempotent(_) => Vec::new(),
            ElemKind::Chord(a, b) => (a + 1..b)
                .map(|c| (self.chord(a, c).unwrap(), self.chord(c, b).unwrap()))
                .collect(),
        }
    }
}

fn parse_two(s: &str, sep: &str) -> Option<(usize, usize)> {
    let (a, b) = s.split_once(sep)?;
    Some((a.trim().parse().ok()?, b.trim().parse().ok()?))
}

impl fmt::Display for PointedMatchedCircle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "circle {} points {} pairs ", self.name, self.num_points)?;
        for (a, b) in &self.pairs {
            write!(f, "({a},{b})")?;
        }
        Ok(())
    }
}

pub fn z2() -> Arc<Algebra> {
    Algebra::new(PointedMatchedCircle::new(8, &[(0, 2), (1, 3), (4, 6), (5, 7)], "Z2").unwrap())
}

pub fn z1() -> Arc<Algebra> {
    Algebra::new(PointedMatchedCircle::new(4, &[(0, 2), (1, 3)], "Z1").unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rho(a: &Algebra, name: &str) -> Elem {
        a.parse_elem(name).unwrap()
    }

    #[test]
    fn circle_validity() {
        assert!(PointedMatchedCircle::new(8, &[(0, 2), (1, 3), (4, 6), (5, 7)], "Z2").is_ok());
        assert!(PointedMatchedCircle::new(4, &[(0, 2), (1, 3)], "Z1").is_ok());
        assert!(matches!(
            PointedMatchedCircle::new(4, &[(0, 1), (2, 3)], "bad"),
            Err(AlgebraError::SurgeryDisconnected { components, .. }) if components > 1
        ));
        assert!(matches!(
            PointedMatchedCircle::new(4, &[(0, 1), (1, 3)], "x"),
            Err(AlgebraError::NotAPartition(..))
        ));
        for pairs in [
            [(0, 2), (1, 6), (3, 5), (4, 7)],
            [(0, 3), (1, 6), (2, 4), (5, 7)],
            [(0, 4), (1, 6), (2, 7), (3, 5)],
            [(0, 5), (1, 6), (2, 4), (3, 7)],
        ] {
            assert!(PointedMatchedCircle::new(8, &pairs, "s").is_ok(), "{pairs:?}");
        }
    }

    #[test]
    fn basis_counts() {
        let a = z2();
        assert_eq!(a.basis().count(), 32);
        assert_eq!(a.chords().count(), 28);
        let t = z1();
        assert_eq!(t.basis().count(), 8);
        let names: Vec<String> = t.chords().map(|c| format!("{:?}", t.kind(c))).collect();
        assert_eq!(names.len(), 6);
    }

    #[test]
    fn quiver_arrows_match_standard_matching() {
        let a = z2();
        let expect = [(0, 1), (1, 0), (0, 1), (1, 2), (2, 3), (3, 2), (2, 3)];
        for (k, (s, t)) in expect.iter().enumerate() {
            let r = a.short_chord(k).unwrap();
            assert_eq!(a.left(r), a.idempotent(*s), "rho{}", k + 1);
            assert_eq!(a.right(r), a.idempotent(*t), "rho{}", k + 1);
        }
    }

    #[test]
    fn products() {
        let a = z2();
        assert_eq!(a.mul(rho(&a, "r4"), rho(&a, "r5")), Some(rho(&a, "r45")));
        assert_eq!(a.mul(rho(&a, "r3"), rho(&a, "r2")), None);
        assert_eq!(a.mul(rho(&a, "i0"), rho(&a, "r1")), Some(rho(&a, "r1")));
        assert_eq!(a.mul(rho(&a, "i1"), rho(&a, "r1")), None);
        for (x, y) in [("r1", "r4"), ("r4", "r7"), ("r2", "r1"), ("r3", "r2"), ("r6", "r5"), ("r7", "r6")] {
            assert_eq!(a.mul(rho(&a, x), rho(&a, y)), None, "{x}{y}");
        }
        let s = rho(&a, "r56");
        assert_eq!(a.left(s), a.idempotent(2));
        assert_eq!(a.right(s), a.idempotent(2));
        assert_eq!(a.idempotent_of(rho(&a, "r4"), Side::Left), a.idempotent(1));
        assert_eq!(a.idempotent_of(rho(&a, "r4"), Side::Right), a.idempotent(2));
    }

    #[test]
    fn names_round_trip() {
        let a = z2();
        for x in a.basis() {
            assert_eq!(a.parse_elem(&a.fmt_elem(x)), Some(x));
        }
        assert_eq!(a.fmt_elem(a.chord(1, 3).unwrap()), "r23");
        assert_eq!(a.parse_elem("[0,6]"), a.parse_elem("r123456"));
        assert_eq!(a.parse_elem("|(3->5)|"), a.chord(3, 5));
        assert_eq!(a.parse_elem("{4,6}"), Some(a.idempotent(2)));
        assert_eq!(a.parse_elem("r13"), None);
    }

    #[test]
    fn mixed_circles_rejected() {
        let (a, b) = (z2(), z1());
        assert!(Algebra::multiply((&a, Elem(0)), (&b, Elem(0))).is_err());
    }
}
