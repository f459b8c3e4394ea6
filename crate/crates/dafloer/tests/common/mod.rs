//! Shared oracles for integration tests.
#![allow(dead_code)]

use dafloer::algebra::{Algebra, Elem};

/// Quiver with four vertices and arrows ρ1..ρ7 subject to the monomial
/// relations ρ1ρ4 = ρ4ρ7 = ρ2ρ1 = ρ3ρ2 = ρ6ρ5 = ρ7ρ6 = 0. A basis element is
/// a vertex (trivial path) or a nonempty arrow sequence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Path {
    Vertex(usize),
    Arrows(Vec<usize>),
}

const ARROWS: [(usize, usize); 8] = [(0, 0), (0, 1), (1, 0), (0, 1), (1, 2), (2, 3), (3, 2), (2, 3)];
const RELATIONS: [(usize, usize); 6] = [(1, 4), (4, 7), (2, 1), (3, 2), (6, 5), (7, 6)];

pub fn source(p: &Path) -> usize {
    match p {
        Path::Vertex(v) => *v,
        Path::Arrows(a) => ARROWS[a[0]].0,
    }
}

pub fn target(p: &Path) -> usize {
    match p {
        Path::Vertex(v) => *v,
        Path::Arrows(a) => ARROWS[*a.last().unwrap()].1,
    }
}

pub fn path_mul(x: &Path, y: &Path) -> Option<Path> {
    if target(x) != source(y) {
        return None;
    }
    match (x, y) {
        (Path::Vertex(_), _) => Some(y.clone()),
        (_, Path::Vertex(_)) => Some(x.clone()),
        (Path::Arrows(a), Path::Arrows(b)) => {
            let w: Vec<usize> = a.iter().chain(b).copied().collect();
            if w.windows(2).any(|p| RELATIONS.contains(&(p[0], p[1]))) {
                None
            } else {
                Some(Path::Arrows(w))
            }
        }
    }
}

/// All nonzero paths, found by extending arrow sequences until every
/// extension vanishes.
pub fn all_paths() -> Vec<Path> {
    let mut out: Vec<Path> = (0..4).map(Path::Vertex).collect();
    let mut frontier: Vec<Vec<usize>> = (1..=7).map(|k| vec![k]).collect();
    while let Some(w) = frontier.pop() {
        for k in 1..=7 {
            if let Some(Path::Arrows(v)) = path_mul(&Path::Arrows(w.clone()), &Path::Arrows(vec![k])) {
                frontier.push(v);
            }
        }
        out.push(Path::Arrows(w));
    }
    out
}

/// Name of a path in the algebra's notation: i<k> for vertices, r<digits>.
pub fn path_name(p: &Path) -> String {
    match p {
        Path::Vertex(v) => format!("i{v}"),
        Path::Arrows(a) => format!("r{}", a.iter().map(|k| k.to_string()).collect::<String>()),
    }
}

pub fn path_elem(alg: &Algebra, p: &Path) -> Elem {
    alg.parse_elem(&path_name(p)).unwrap_or_else(|| panic!("no element named {}", path_name(p)))
}

/// Compares every product in the algebra with the quiver product. Returns the
/// number of pairs checked and the mismatches.
pub fn multiplication_oracle(alg: &Algebra) -> (usize, Vec<String>) {
    let paths = all_paths();
    let mut bad = Vec::new();
    let mut n = 0;
    for x in &paths {
        for y in &paths {
            n += 1;
            let want = path_mul(x, y).map(|p| path_elem(alg, &p));
            let got = alg.mul(path_elem(alg, x), path_elem(alg, y));
            if want != got {
                bad.push(format!("{} * {}", path_name(x), path_name(y)));
            }
        }
    }
    (n, bad)
}
