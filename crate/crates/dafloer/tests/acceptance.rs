//! Acceptance criteria 1 to 10. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails. Run with `cargo test --test acceptance`.

mod common;

use std::process::Command;
use std::time::{Duration, Instant};

use dafloer::algebra::z2;
use dafloer::bimodule::{check_relations, is_bounded, Boundedness};
use dafloer::calculus::{box_tensor, is_isomorphic, reduce};
use dafloer::fpfloer::{crosscheck, eftekhary_rank, CurveSystemSpec};
use dafloer::hochschild::{bar_words, hochschild_complex, hochschild_homology, HhOptions};
use dafloer::mcg::{
    bimodule_of, identity_bimodule, invert_word, parse_word, power_table, Orientation, RelationKind, RelationSuite,
};
use dafloer::seeddata::{builtin, Corpus, ARC_SLIDE_NAMES};

const CORPUS_LIMIT: Duration = Duration::from_secs(60);
const RELATIONS_LIMIT: Duration = Duration::from_secs(300);
const HH_LIMIT: Duration = Duration::from_secs(120);
const PSI_LIMIT: Duration = Duration::from_secs(1800);
const FLOER_LIMIT: Duration = Duration::from_secs(10);

const PSI: &str = "A B C D C A B E";
const PSI_RANKS: [usize; 6] = [5, 5, 11, 23, 52, 103];

/// Words whose HH is fixed by the acceptance data, with the expected rank.
const HH_WORDS: [(&str, usize); 13] = [
    ("", 4),
    ("A", 4),
    ("A'", 4),
    ("B", 4),
    ("B'", 4),
    ("C", 4),
    ("C'", 4),
    ("D", 4),
    ("D'", 4),
    ("E", 4),
    ("E'", 4),
    ("(A B C D)'", 1),
    ("(A^5 B C D E^5)'", 10),
];

/// Curve systems with expected HF (total, by degree when pinned).
const FLOER_SPECS: [(&str, &str, usize, Option<[usize; 3]>); 5] = [
    ("", "", 4, Some([0, 4, 0])),
    ("A", "", 4, None),
    ("", "A", 4, None),
    ("A,B,C,D", "", 1, None),
    ("A:5,B,C,D,E:5", "", 10, None),
];

type Outcome = Result<String, String>;

fn within(limit: Duration, t: Instant, what: &str) -> Result<(), String> {
    let e = t.elapsed();
    if e > limit {
        Err(format!("{what} took {:.1} s, limit {} s", e.as_secs_f64(), limit.as_secs()))
    } else {
        Ok(())
    }
}

fn corpus_soundness() -> Outcome {
    let t = Instant::now();
    let corpus = Corpus::get();
    let seeds = corpus.seeds();
    if seeds.len() != 17 {
        return Err(format!("{} seeds", seeds.len()));
    }
    let mut terms = 0;
    for m in seeds {
        let r = check_relations(m, 2 * m.max_arity()).map_err(|e| e.to_string())?;
        if !r.passed() {
            return Err(format!("{}: {} violations, first {}", m.name, r.violations.len(), r.violations[0]));
        }
        terms += r.terms_checked;
    }
    within(CORPUS_LIMIT, t, "corpus check")?;
    Ok(format!("17 seeds, {terms} structure-equation terms, {:.2} s", t.elapsed().as_secs_f64()))
}

fn groupoid_relations() -> Outcome {
    let t = Instant::now();
    let kinds = [RelationKind::Inverse, RelationKind::Braid, RelationKind::Commuting];
    let results = RelationSuite::default().verify(&kinds, 1).map_err(|e| e.to_string())?;
    let count = |k: RelationKind| results.iter().filter(|r| r.kind == k).count();
    if (count(RelationKind::Inverse), count(RelationKind::Braid), count(RelationKind::Commuting)) != (10, 4, 6) {
        return Err("wrong number of relations".into());
    }
    if let Some(r) = results.iter().find(|r| !r.passed) {
        return Err(format!("{} fails", r.name));
    }
    let id = identity_bimodule();
    for c in "ABCDE".chars() {
        for w in [format!("{c} {c}'"), format!("{c}' {c}")] {
            let m = bimodule_of(&parse_word(&w).unwrap()).map_err(|e| e.to_string())?;
            if is_isomorphic(&m, &id).map_err(|e| e.to_string())?.is_none() {
                return Err(format!("{w} does not reduce to the identity"));
            }
        }
    }
    within(RELATIONS_LIMIT, t, "relation suite")?;
    Ok(format!("10 inverse, 4 braid, 6 commuting, {:.2} s", t.elapsed().as_secs_f64()))
}

fn arc_slide_factorization() -> Outcome {
    let mut acc = builtin(ARC_SLIDE_NAMES[5]).unwrap();
    for name in ARC_SLIDE_NAMES[..5].iter().rev() {
        acc = reduce(&box_tensor(&builtin(name).unwrap(), &acc).map_err(|e| e.to_string())?);
    }
    let target = reduce(&builtin("N_tauC_inv").unwrap());
    match is_isomorphic(&acc, &target).map_err(|e| e.to_string())? {
        Some(_) => Ok(format!("{} generators, {} actions on both sides", acc.num_generators(), acc.num_actions())),
        None => Err(format!("{acc} not isomorphic to {target}")),
    }
}

fn bounded_identity() -> Outcome {
    let ib = builtin("I_bounded").unwrap();
    if is_isomorphic(&reduce(&ib), &identity_bimodule()).map_err(|e| e.to_string())?.is_none() {
        return Err("reduce([I]^b) is not [I]".into());
    }
    if !matches!(is_bounded(&ib), Boundedness::Acyclic(_)) {
        return Err("[I]^b has a cycle".into());
    }
    for (w, _) in HH_WORDS {
        let m = bimodule_of(&parse_word(w).unwrap()).map_err(|e| e.to_string())?;
        let plain = hochschild_homology(&m, &HhOptions::default()).map_err(|e| e.to_string())?;
        let sand = hochschild_homology(&m, &HhOptions { sandwich: true, ..HhOptions::default() }).map_err(|e| e.to_string())?;
        if plain.total != sand.total {
            return Err(format!("{w}: {} without sandwich, {} with", plain.total, sand.total));
        }
    }
    Ok(format!("reduces to [I], acyclic, sandwich agrees on {} words", HH_WORDS.len()))
}

fn hh_numbers() -> Outcome {
    let mut slowest = 0.0f64;
    for (w, want) in HH_WORDS {
        let t = Instant::now();
        let m = bimodule_of(&parse_word(w).unwrap()).map_err(|e| e.to_string())?;
        let r = hochschild_homology(&m, &HhOptions::default()).map_err(|e| e.to_string())?;
        within(HH_LIMIT, t, w)?;
        slowest = slowest.max(t.elapsed().as_secs_f64());
        if r.total != want {
            return Err(format!("`{w}`: rank {} expected {want}", r.total));
        }
        if w.is_empty() && r.graded != Some([4, 0]) {
            return Err(format!("identity grades {:?}, expected all 4 in grade 0", r.graded));
        }
    }
    Ok(format!("13 words exact, identity graded [4, 0], slowest {slowest:.3} s"))
}

fn psi_table(orientation: Orientation) -> Result<Vec<usize>, String> {
    let rows = power_table(&parse_word(PSI).unwrap(), 6, orientation, |_| {}).map_err(|e| e.to_string())?;
    Ok(rows.iter().map(|r| r.rank).collect())
}

fn psi_powers() -> Outcome {
    let t = Instant::now();
    let inverse = psi_table(Orientation::Inverse)?;
    let direct = psi_table(Orientation::Direct)?;
    within(PSI_LIMIT, t, "psi table")?;
    let matches = |r: &Vec<usize>| r.as_slice() == PSI_RANKS;
    if !matches(&inverse) && !matches(&direct) {
        return Err(format!("w^-1 gives {inverse:?}, w gives {direct:?}"));
    }
    let which = match (matches(&inverse), matches(&direct)) {
        (true, true) => "both w^-1 and w match",
        (true, false) => "w^-1 matches",
        _ => "only w matches",
    };
    if !matches(&inverse) {
        return Err(format!("default orientation w^-1 gives {inverse:?} ({which})"));
    }
    Ok(format!("{inverse:?}; {which}; {:.2} s", t.elapsed().as_secs_f64()))
}

fn floer_ranks() -> Outcome {
    for (r, l, total, degrees) in FLOER_SPECS {
        let t = Instant::now();
        let spec = CurveSystemSpec::parse(r, l).map_err(|e| e.to_string())?;
        let hf = eftekhary_rank(&spec).map_err(|e| e.to_string())?;
        within(FLOER_LIMIT, t, &spec.to_string())?;
        if hf.total != total || degrees.is_some_and(|d| d != hf.degrees) {
            return Err(format!("{spec}: got {:?}", hf.degrees));
        }
    }
    Ok("5 curve systems exact".into())
}

fn conjecture_crosscheck() -> Outcome {
    for (r, l, _, _) in FLOER_SPECS {
        let spec = CurveSystemSpec::parse(r, l).map_err(|e| e.to_string())?;
        let c = crosscheck(&spec).map_err(|e| e.to_string())?;
        if !c.totals_match {
            return Err(format!("{spec}: HH {} vs HF {}", c.hh_total, c.hf.total));
        }
        if r.is_empty() && l.is_empty() && (c.hh_graded != Some([4, 0]) || c.hf.degrees != [0, 4, 0]) {
            return Err(format!("identity grades: HH {:?}, HF {:?}", c.hh_graded, c.hf.degrees));
        }
    }
    Ok("HH = HF on 5 systems; identity HH grade 0 <-> HF degree 1".into())
}

fn property_suites() -> Outcome {
    let alg = z2();
    let (pairs, bad) = common::multiplication_oracle(&alg);
    if pairs != 32 * 32 || !bad.is_empty() {
        return Err(format!("multiplication oracle: {pairs} pairs, mismatches {bad:?}"));
    }
    // d² = 0 on every Hochschild complex used above.
    for (w, _) in HH_WORDS {
        let m = bimodule_of(&parse_word(w).unwrap()).map_err(|e| e.to_string())?;
        hochschild_homology(&m, &HhOptions { check_square_zero: true, ..HhOptions::default() })
            .map_err(|e| format!("{w}: {e}"))?;
    }
    // d² = 0 on short bar truncations as well.
    let mut bar = 0;
    for w in ["", "A"] {
        let m = bimodule_of(&parse_word(w).unwrap()).map_err(|e| e.to_string())?;
        for k in 0..=3 {
            let c = hochschild_complex(&m, &bar_words(&alg, k), None).map_err(|e| e.to_string())?;
            if c.d_squared_defect() != 0 {
                return Err(format!("bar complex of {w:?} at length {k}: d² != 0"));
            }
            bar += 1;
        }
    }
    // Associativity on all triples of single twists and their inverses.
    let letters: Vec<_> = ["A", "A'", "B", "C'", "D", "E'"]
        .iter()
        .map(|w| bimodule_of(&parse_word(w).unwrap()).unwrap())
        .collect();
    let mut triples = 0;
    for x in &letters {
        for y in &letters {
            for z in &letters {
                let l = reduce(&box_tensor(&reduce(&box_tensor(x, y).unwrap()), z).unwrap());
                let r = reduce(&box_tensor(x, &reduce(&box_tensor(y, z).unwrap())).unwrap());
                if is_isomorphic(&l, &r).map_err(|e| e.to_string())?.is_none() {
                    return Err(format!("associativity fails for {} {} {}", x.name, y.name, z.name));
                }
                triples += 1;
            }
        }
    }
    // HH invariance: unreduced product, sandwich, rotation, conjugation.
    let word = parse_word("A B' C D").unwrap();
    let base = hochschild_homology(&bimodule_of(&word).unwrap(), &HhOptions::default()).unwrap().total;
    let ab = box_tensor(&bimodule_of(&parse_word("B' C D").unwrap()).unwrap(), &bimodule_of(&parse_word("A").unwrap()).unwrap()).unwrap();
    let unreduced = hochschild_homology(&ab, &HhOptions::default()).unwrap().total;
    let sandwiched = hochschild_homology(&bimodule_of(&word).unwrap(), &HhOptions { sandwich: true, ..HhOptions::default() }).unwrap().total;
    let mut variants = vec![unreduced, sandwiched];
    for k in 0..word.len() {
        variants.push(hochschild_homology(&bimodule_of(&word.rotate(k)).unwrap(), &HhOptions::default()).unwrap().total);
    }
    for c in ["E", "B C'"] {
        let c = parse_word(c).unwrap();
        let conj = c.concat(&word).concat(&invert_word(&c));
        variants.push(hochschild_homology(&bimodule_of(&conj).unwrap(), &HhOptions::default()).unwrap().total);
    }
    if variants.iter().any(|&v| v != base) {
        return Err(format!("HH invariance: base {base}, variants {variants:?}"));
    }
    // Euler identity is asserted inside every relative cohomology computation.
    for (r, l) in [("", ""), ("B:2,D", ""), ("", "A,C,E"), ("A:3,C:2", "E:2"), ("", "B:2")] {
        eftekhary_rank(&CurveSystemSpec::parse(r, l).unwrap()).map_err(|e| e.to_string())?;
    }
    Ok(format!("oracle 1024 products, d²=0 on {} complexes and {bar} bar truncations, {triples} associativity triples, {} HH invariance samples, Euler identity on 5 systems", HH_WORDS.len(), variants.len()))
}

fn run_cli(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_dafloer")).args(args).output().map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("dafloer {args:?} exited with {:?}", out.status.code()));
    }
    Ok(out.stdout)
}

fn determinism() -> Outcome {
    let verify = ["verify", "--suite", "all", "--json"];
    let a = run_cli(&verify)?;
    let b = run_cli(&verify)?;
    if a != b {
        return Err("verify --suite all --json differs between runs".into());
    }
    let fp = ["fixed-points", "--word", PSI, "--powers", "6", "--json"];
    let c = run_cli(&fp)?;
    let d = run_cli(&fp)?;
    if c != d {
        return Err("fixed-points output differs between runs".into());
    }
    if psi_table(Orientation::Inverse)? != psi_table(Orientation::Inverse)? {
        return Err("psi table differs between in-process runs".into());
    }
    Ok(format!("verify JSON {} bytes and psi table {} bytes identical across runs", a.len(), c.len()))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("corpus soundness", corpus_soundness),
        ("groupoid relations", groupoid_relations),
        ("arc-slide factorization", arc_slide_factorization),
        ("bounded identity", bounded_identity),
        ("HH numbers", hh_numbers),
        ("psi^n table", psi_powers),
        ("fixed point Floer ranks", floer_ranks),
        ("HH vs HF crosscheck", conjecture_crosscheck),
        ("property suites", property_suites),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{secs:.2} s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail} [{secs:.2} s]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
